//! Zero-forcing frequency-domain equalization, unique-word removal and
//! Wiener smoothing of the demodulated coefficients.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::channel::ChannelRealization;
use crate::error::{invalid, Error, Result};
use crate::modem::{ModulationSet, SymbolGrid};
use crate::numerics::Dft;
use crate::scalar::{cabs, Real};
use crate::uw::UwCoder;

pub use crate::modem::demap;

/// Bins weaker than this fraction of the strongest are zeroed, not divided.
pub const NULL_THRESHOLD: f64 = 1e-6;

/// Output of [`equalize_fde`].
#[derive(Debug, Clone)]
pub struct Equalized<T: Real> {
    pub samples: Vec<Complex<T>>,
    pub null_bins: usize,
    /// `1/|H[b]|²` per bin, zero on nulled bins.
    pub inv_power: Vec<f64>,
}

impl<T: Real> Equalized<T> {
    /// Factor by which white input noise grows through the equalizer.
    pub fn noise_gain(&self) -> f64 {
        self.inv_power.iter().sum::<f64>() / self.inv_power.len() as f64
    }
}

/// Drops the leading `guard_len` samples, then divides the next N samples
/// bin-wise by the channel response.
pub fn equalize_fde<T: Real>(
    rx: &[Complex<T>],
    guard_len: usize,
    ch: &ChannelRealization<T>,
    dft: &Dft<T>,
) -> Result<Equalized<T>> {
    let n = dft.size();
    if ch.freq_response.len() != n {
        return Err(invalid(
            "channel response length differs from the block length",
        ));
    }
    if rx.len() < guard_len + n {
        return Err(invalid(format!(
            "received {} samples, need {}",
            rx.len(),
            guard_len + n
        )));
    }
    let peak = ch
        .freq_response
        .iter()
        .map(|h| cabs(*h).to_f64_lossy())
        .fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::DegenerateChannel);
    }
    let mut buf = rx[guard_len..guard_len + n].to_vec();
    dft.forward_in_place(&mut buf);
    let mut null_bins = 0;
    let mut inv_power = vec![0.0; n];
    for ((y, h), ip) in buf
        .iter_mut()
        .zip(&ch.freq_response)
        .zip(inv_power.iter_mut())
    {
        let mag = cabs(*h).to_f64_lossy();
        if mag < NULL_THRESHOLD * peak {
            *y = Complex::new(T::zero(), T::zero());
            null_bins += 1;
        } else {
            *y /= *h;
            *ip = 1.0 / (mag * mag);
        }
    }
    dft.inverse_in_place(&mut buf);
    Ok(Equalized {
        samples: buf,
        null_bins,
        inv_power,
    })
}

/// Demodulated grid before and after smoothing.
#[derive(Debug, Clone)]
pub struct ReceivedGrid<T: Real> {
    pub raw: SymbolGrid<T>,
    pub data_estimates: Vec<Complex<T>>,
}

/// Removes the known unique-word contribution from the demodulated grid.
pub fn subtract_uw<T: Real>(raw: &ReceivedGrid<T>, coder: &UwCoder<T>) -> Result<ReceivedGrid<T>> {
    let v = raw.raw.to_real_stacked();
    if v.len() != coder.uw_influence().len() {
        return Err(invalid("grid does not match the coder"));
    }
    let cleaned = v - coder.uw_influence();
    Ok(ReceivedGrid {
        raw: SymbolGrid::from_real_stacked(raw.raw.subcarriers(), raw.raw.subsymbols(), &cleaned)?,
        data_estimates: raw.data_estimates.clone(),
    })
}

/// `Q = (RᵀR + λI)⁻¹Rᵀ` with `λ = σ_n²/σ_d²`, both per real rail.
#[derive(Debug, Clone)]
pub struct WienerSmoother<T: Real> {
    pub q: DMatrix<T>,
    pub sigma_n2: f64,
    pub sigma_d2: f64,
}

impl<T: Real> WienerSmoother<T> {
    pub fn build(coder: &UwCoder<T>, sigma_n2: f64, sigma_d2: f64) -> Result<Self> {
        Self::from_generator(&coder.r, sigma_n2, sigma_d2)
    }

    /// Smoother for an arbitrary code generator `r`.
    pub fn from_generator(r: &DMatrix<T>, sigma_n2: f64, sigma_d2: f64) -> Result<Self> {
        if !(sigma_n2 >= 0.0) || !(sigma_d2 > 0.0) {
            return Err(invalid(
                "noise variance must be non-negative and symbol variance positive",
            ));
        }
        let lambda = T::lit(sigma_n2 / sigma_d2);
        let mut gram = r.tr_mul(r);
        for i in 0..gram.nrows() {
            gram[(i, i)] += lambda;
        }
        let chol = gram
            .cholesky()
            .ok_or_else(|| Error::Construction("code generator is rank-deficient".into()))?;
        Ok(Self {
            q: chol.solve(&r.transpose()),
            sigma_n2,
            sigma_d2,
        })
    }

    pub fn apply(&self, v: &DVector<T>) -> Result<DVector<T>> {
        if v.len() != self.q.ncols() {
            return Err(invalid(format!(
                "{} coefficients, smoother expects {}",
                v.len(),
                self.q.ncols()
            )));
        }
        Ok(&self.q * v)
    }
}

/// Smoother prepared once per code generator and evaluated for any noise
/// level: an eigendecomposition of `RᵀR` turns each application into three
/// matrix-vector products.
#[derive(Debug, Clone)]
pub struct PreparedSmoother<T: Real> {
    r: DMatrix<T>,
    vectors: DMatrix<T>,
    values: DVector<T>,
}

impl<T: Real> PreparedSmoother<T> {
    pub fn new(r: &DMatrix<T>) -> Result<Self> {
        let eig = r.tr_mul(r).symmetric_eigen();
        let min = eig
            .eigenvalues
            .iter()
            .fold(T::max_value().unwrap_or(T::one()), |a, &v| a.min(v));
        if !(min > T::zero()) {
            return Err(Error::Construction(
                "code generator is rank-deficient".into(),
            ));
        }
        Ok(Self {
            r: r.clone(),
            vectors: eig.eigenvectors,
            values: eig.eigenvalues,
        })
    }

    /// `(RᵀR + λI)⁻¹Rᵀ·v`.
    pub fn apply(&self, v: &DVector<T>, lambda: f64) -> DVector<T> {
        let lambda = T::lit(lambda);
        let mut z = self.vectors.tr_mul(&self.r.tr_mul(v));
        for (zi, &ev) in z.iter_mut().zip(self.values.iter()) {
            *zi /= ev + lambda;
        }
        &self.vectors * z
    }

    /// LMMSE estimate under independent per-coefficient noise variances:
    /// `(RᵀD⁻¹R + σ_d⁻²I)⁻¹RᵀD⁻¹·v`.
    pub fn apply_colored(
        &self,
        v: &DVector<T>,
        noise_var: &DVector<T>,
        sigma_d2: f64,
    ) -> Result<DVector<T>> {
        if noise_var.len() != self.r.nrows() || v.len() != self.r.nrows() {
            return Err(invalid("noise variance length differs from the generator"));
        }
        let floor = T::lit(1e-300f64.max(T::epsilon_f64()));
        let w = noise_var.map(|s| T::one() / s.max(floor));
        let mut weighted = self.r.clone();
        for (mut row, &wi) in weighted.row_iter_mut().zip(w.iter()) {
            row *= wi;
        }
        let mut gram = weighted.tr_mul(&self.r);
        let reg = T::lit(1.0 / sigma_d2);
        for i in 0..gram.nrows() {
            gram[(i, i)] += reg;
        }
        let rhs = weighted.tr_mul(v);
        let chol = gram.cholesky().ok_or_else(|| {
            Error::Construction("coloured smoother is not positive definite".into())
        })?;
        Ok(chol.solve(&rhs))
    }
}

/// `W[j, b] = |DFT(column j)[b]|² / N` for every real-stacked column, so the
/// post-equalizer noise variance of coefficient `j` is
/// `½·σ²·Σ_b W[j, b]/|H[b]|²`.
pub fn spectral_weights<T: Real>(mods: &ModulationSet<T>, dft: &Dft<T>) -> DMatrix<T> {
    let n = mods.block_len();
    let mut w = DMatrix::zeros(2 * n, n);
    let scale = T::one() / T::from_usize_lossy(n);
    for (j, a) in [&mods.a_i, &mods.a_q].iter().enumerate() {
        for c in 0..n {
            let mut col: Vec<Complex<T>> = a.column(c).iter().copied().collect();
            dft.forward_in_place(&mut col);
            for (b, v) in col.iter().enumerate() {
                w[(j * n + c, b)] = v.norm_sqr() * scale;
            }
        }
    }
    w
}

/// Per-coefficient noise variance after zero-forcing.
pub fn coefficient_noise<T: Real>(
    weights: &DMatrix<T>,
    eq: &Equalized<T>,
    sigma2: f64,
) -> DVector<T> {
    let ip = DVector::from_iterator(
        eq.inv_power.len(),
        eq.inv_power.iter().map(|&p| T::lit(0.5 * sigma2 * p)),
    );
    weights * ip
}

/// Applies the smoother to the data coefficients of `grid`. Sub-symbols
/// without redundancy are read out directly.
pub fn smooth<T: Real>(
    grid: &ReceivedGrid<T>,
    coder: &UwCoder<T>,
    smoother: &WienerSmoother<T>,
) -> Result<ReceivedGrid<T>> {
    let v = grid.raw.to_real_stacked();
    let d = if coder.has_redundancy() {
        smoother.apply(&v)?
    } else {
        coder.gather_data(&v)
    };
    Ok(ReceivedGrid {
        raw: grid.raw.clone(),
        data_estimates: coder.unstack_symbols(&d),
    })
}
