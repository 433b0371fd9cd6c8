//! FS-OQAM symbol mapping, modulation matrices and matched-filter demodulation.
//!
//! Symbols are vectorized with the subcarrier index running fastest:
//! position `k + m·K` holds `d_{k,m}`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::config::FrameConfig;
use crate::error::{invalid, Error, Result};
use crate::numerics::ComplexVector;
use crate::pulse::{build_prototype, PrototypeFilter};
use crate::scalar::{cabs, scaled_tolerance, Real};

fn check_mu(mu: usize) -> Result<usize> {
    if mu == 0 || !mu.is_multiple_of(2) || mu > 16 {
        return Err(invalid(format!(
            "bits per symbol {mu} must be even, between 2 and 16"
        )));
    }
    Ok(mu / 2)
}

/// Amplitude scale giving unit mean energy for square QAM with `levels` per rail.
fn qam_scale(levels: usize) -> f64 {
    let l = levels as f64;
    1.0 / (2.0 * (l * l - 1.0) / 3.0).sqrt()
}

fn gray_to_binary(mut g: usize) -> usize {
    let mut b = g;
    while g > 0 {
        g >>= 1;
        b ^= g;
    }
    b
}

/// Maps `bits.len()/mu` groups onto Gray-coded square QAM with unit mean
/// energy. The first `mu/2` bits of a group select the real part, the rest
/// the imaginary part, most significant first. Bit value 0 maps to the
/// positive side, so QPSK `00` is `(1+j)/√2`.
pub fn map_bits<T: Real>(bits: &[u8], mu: usize) -> Result<Vec<Complex<T>>> {
    let half = check_mu(mu)?;
    if !bits.len().is_multiple_of(mu) {
        return Err(invalid(format!(
            "{} bits not divisible by mu = {mu}",
            bits.len()
        )));
    }
    let levels = 1usize << half;
    let scale = qam_scale(levels);
    let rail = |chunk: &[u8]| -> T {
        let gray = chunk
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | usize::from(b & 1));
        let idx = gray_to_binary(gray);
        T::lit(((levels - 1) as f64 - 2.0 * idx as f64) * scale)
    };
    Ok(bits
        .chunks_exact(mu)
        .map(|c| Complex::new(rail(&c[..half]), rail(&c[half..])))
        .collect())
}

/// Nearest-level decision on one rail, returning the level index. Exact
/// midpoints go to the lower index.
fn decide_rail(x: f64, levels: usize, scale: f64) -> usize {
    let pos = ((levels - 1) as f64 - x / scale) / 2.0;
    let idx = (pos - 0.5).ceil();
    if idx.is_nan() || idx < 0.0 {
        0
    } else {
        (idx as usize).min(levels - 1)
    }
}

/// Hard minimum-distance demapping, the inverse of [`map_bits`].
pub fn demap<T: Real>(estimates: &[Complex<T>], mu: usize) -> Result<Vec<u8>> {
    let half = check_mu(mu)?;
    let levels = 1usize << half;
    let scale = qam_scale(levels);
    let mut out = Vec::with_capacity(estimates.len() * mu);
    for s in estimates {
        for x in [s.re, s.im] {
            let gray = {
                let b = decide_rail(x.to_f64_lossy(), levels, scale);
                b ^ (b >> 1)
            };
            for bit in (0..half).rev() {
                out.push(((gray >> bit) & 1) as u8);
            }
        }
    }
    Ok(out)
}

/// K×M grid of complex symbols `d_{k,m} = d^(i) + j·d^(q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGrid<T: Real> {
    subcarriers: usize,
    subsymbols: usize,
    entries: Vec<Complex<T>>,
}

impl<T: Real> SymbolGrid<T> {
    pub fn zeros(subcarriers: usize, subsymbols: usize) -> Self {
        Self {
            subcarriers,
            subsymbols,
            entries: vec![Complex::new(T::zero(), T::zero()); subcarriers * subsymbols],
        }
    }

    /// Builds a grid from entries in `k + m·K` order.
    pub fn from_vec(
        subcarriers: usize,
        subsymbols: usize,
        entries: Vec<Complex<T>>,
    ) -> Result<Self> {
        if entries.len() != subcarriers * subsymbols {
            return Err(invalid(format!(
                "{} entries for a {subcarriers}x{subsymbols} grid",
                entries.len()
            )));
        }
        if entries
            .iter()
            .any(|e| !e.re.is_finite() || !e.im.is_finite())
        {
            return Err(invalid("symbol grid contains non-finite entries"));
        }
        Ok(Self {
            subcarriers,
            subsymbols,
            entries,
        })
    }

    /// Builds a grid from the real-stacked form `[Re(vec d); Im(vec d)]`.
    pub fn from_real_stacked(
        subcarriers: usize,
        subsymbols: usize,
        v: &DVector<T>,
    ) -> Result<Self> {
        let n = subcarriers * subsymbols;
        if v.len() != 2 * n {
            return Err(invalid(format!(
                "real-stacked vector has {} entries, expected {}",
                v.len(),
                2 * n
            )));
        }
        let entries = (0..n).map(|p| Complex::new(v[p], v[n + p])).collect();
        Self::from_vec(subcarriers, subsymbols, entries)
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn subsymbols(&self) -> usize {
        self.subsymbols
    }

    pub fn get(&self, k: usize, m: usize) -> Complex<T> {
        self.entries[k + m * self.subcarriers]
    }

    pub fn set(&mut self, k: usize, m: usize, value: Complex<T>) {
        self.entries[k + m * self.subcarriers] = value;
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.entries
    }

    pub fn in_phase(&self) -> Vec<T> {
        self.entries.iter().map(|e| e.re).collect()
    }

    pub fn quadrature(&self) -> Vec<T> {
        self.entries.iter().map(|e| e.im).collect()
    }

    pub fn to_real_stacked(&self) -> DVector<T> {
        let n = self.entries.len();
        DVector::from_fn(2 * n, |r, _| {
            if r < n {
                self.entries[r].re
            } else {
                self.entries[r - n].im
            }
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| cabs(*a - *b).to_f64_lossy())
            .fold(0.0, f64::max)
    }
}

/// One modulated block before guard insertion.
#[derive(Debug, Clone)]
pub struct GfdmBlock<T: Real> {
    pub time_samples: ComplexVector<T>,
    pub tx_symbols: SymbolGrid<T>,
}

/// FS-OQAM modulation matrices for one (K, M, prototype) triple.
///
/// `basis` is the real-stacked form `[[Re A_i, Re A_q], [Im A_i, Im A_q]]`,
/// which maps real-stacked symbols to real-stacked samples and is orthogonal
/// for a half-Nyquist prototype.
#[derive(Debug, Clone)]
pub struct ModulationSet<T: Real> {
    pub prototype: PrototypeFilter<T>,
    pub a_i: DMatrix<Complex<T>>,
    pub a_q: DMatrix<Complex<T>>,
    pub basis: DMatrix<T>,
    column_norms: Vec<T>,
    /// max |Re{A_iᴴ A_q}|.
    pub cross_residual: f64,
    /// max |BᵀB − I| over the real-stacked basis.
    pub self_residual: f64,
}

impl<T: Real> ModulationSet<T> {
    /// Builds the prototype from `config` and the matrices from it.
    pub fn from_config(config: &FrameConfig) -> Result<Self> {
        let g = build_prototype(config.subcarriers, config.subsymbols, config.pulse_shape())?;
        Self::build(config, g)
    }

    pub fn build(config: &FrameConfig, prototype: PrototypeFilter<T>) -> Result<Self> {
        let (k, m) = (config.subcarriers, config.subsymbols);
        if prototype.subcarriers != k || prototype.subsymbols != m {
            return Err(invalid(format!(
                "prototype built for K={}, M={} but config has K={k}, M={m}",
                prototype.subcarriers, prototype.subsymbols
            )));
        }
        if k % 2 != 0 {
            return Err(invalid("K must be even"));
        }
        let n = k * m;
        let g = &prototype.time_samples;
        let two_pi = T::two_pi();
        let tones: Vec<Complex<T>> = (0..k)
            .map(|r| {
                let ph = two_pi * T::from_usize_lossy(r) / T::from_usize_lossy(k);
                Complex::new(ph.cos(), ph.sin())
            })
            .collect();
        let jpow = |p: usize| -> Complex<T> {
            let (o, z) = (T::one(), T::zero());
            match p % 4 {
                0 => Complex::new(o, z),
                1 => Complex::new(z, o),
                2 => Complex::new(-o, z),
                _ => Complex::new(z, -o),
            }
        };
        let column = |kk: usize, shift: usize, phase: Complex<T>, row: usize| -> Complex<T> {
            let tap = g[(row + n - shift % n) % n];
            phase * tones[(kk * row) % k] * tap
        };
        let a_i = DMatrix::from_fn(n, n, |row, col| {
            let (kk, mm) = (col % k, col / k);
            column(kk, mm * k, jpow(kk), row)
        });
        let a_q = DMatrix::from_fn(n, n, |row, col| {
            let (kk, mm) = (col % k, col / k);
            column(kk, mm * k + k / 2, jpow(kk + 1), row)
        });
        let basis = DMatrix::from_fn(2 * n, 2 * n, |row, col| {
            let a = if col < n { &a_i } else { &a_q };
            let c = a[(row % n, col % n)];
            if row < n {
                c.re
            } else {
                c.im
            }
        });
        let gram = basis.transpose() * &basis;
        let mut cross = 0.0f64;
        let mut selfr = 0.0f64;
        for c in 0..2 * n {
            for r in 0..2 * n {
                let target = if r == c { T::one() } else { T::zero() };
                let dev = (gram[(r, c)] - target).abs().to_f64_lossy();
                selfr = selfr.max(dev);
                if r < n && c >= n {
                    cross = cross.max(dev);
                }
            }
        }
        let tol = scaled_tolerance::<T>(1e-9, n);
        if cross >= tol {
            return Err(Error::Construction(format!(
                "I/Q matrices not real-orthogonal: residual {cross:.3e}"
            )));
        }
        let column_norms = (0..2 * n).map(|c| basis.column(c).norm()).collect();
        Ok(Self {
            prototype,
            a_i,
            a_q,
            basis,
            column_norms,
            cross_residual: cross,
            self_residual: selfr,
        })
    }

    pub fn subcarriers(&self) -> usize {
        self.prototype.subcarriers
    }

    pub fn subsymbols(&self) -> usize {
        self.prototype.subsymbols
    }

    pub fn block_len(&self) -> usize {
        self.prototype.len()
    }

    fn diagonal_block(a: &DMatrix<Complex<T>>, k: usize, m: usize) -> DMatrix<Complex<T>> {
        a.view((m * k, m * k), (k, k)).into_owned()
    }

    /// K×K diagonal block of `A_i` for sub-symbol `m`.
    pub fn block_i(&self, m: usize) -> DMatrix<Complex<T>> {
        Self::diagonal_block(&self.a_i, self.subcarriers(), m)
    }

    pub fn block_q(&self, m: usize) -> DMatrix<Complex<T>> {
        Self::diagonal_block(&self.a_q, self.subcarriers(), m)
    }

    /// Mean fraction of column energy of sub-symbol `m` that falls outside
    /// its own K-sample window.
    pub fn off_block_leakage(&self, m: usize) -> f64 {
        let k = self.subcarriers();
        let window = m * k..(m + 1) * k;
        let mut total = 0.0;
        for a in [&self.a_i, &self.a_q] {
            for col in m * k..(m + 1) * k {
                let outside: f64 = (0..self.block_len())
                    .filter(|r| !window.contains(r))
                    .map(|r| a[(r, col)].norm_sqr().to_f64_lossy())
                    .sum();
                total += outside;
            }
        }
        total / (2 * k) as f64
    }

    /// Real-stacked samples `B·c` as complex samples.
    pub fn modulate_real(&self, coeffs: &DVector<T>) -> Result<Vec<Complex<T>>> {
        let n = self.block_len();
        if coeffs.len() != 2 * n {
            return Err(invalid(format!(
                "{} coefficients, expected {}",
                coeffs.len(),
                2 * n
            )));
        }
        let x = &self.basis * coeffs;
        Ok((0..n).map(|i| Complex::new(x[i], x[n + i])).collect())
    }

    /// Matched-filter outputs `Re⟨g_{k,m}, y⟩` in real-stacked layout, scaled
    /// by the inverse squared column norm.
    pub fn demodulate_real(&self, received: &[Complex<T>]) -> Result<DVector<T>> {
        let n = self.block_len();
        if received.len() != n {
            return Err(invalid(format!(
                "received {} samples, expected {n}",
                received.len()
            )));
        }
        let y = DVector::from_fn(2 * n, |r, _| {
            if r < n {
                received[r].re
            } else {
                received[r - n].im
            }
        });
        let mut v = self.basis.tr_mul(&y);
        for (c, norm) in self.column_norms.iter().enumerate() {
            v[c] /= *norm * *norm;
        }
        Ok(v)
    }

    pub fn modulate(&self, grid: &SymbolGrid<T>) -> Result<GfdmBlock<T>> {
        self.check_grid(grid)?;
        let samples = self.modulate_real(&grid.to_real_stacked())?;
        Ok(GfdmBlock {
            time_samples: ComplexVector::new(samples)?,
            tx_symbols: grid.clone(),
        })
    }

    pub fn demodulate(&self, received: &ComplexVector<T>) -> Result<SymbolGrid<T>> {
        let v = self.demodulate_real(received)?;
        SymbolGrid::from_real_stacked(self.subcarriers(), self.subsymbols(), &v)
    }

    fn check_grid(&self, grid: &SymbolGrid<T>) -> Result<()> {
        if grid.subcarriers() != self.subcarriers() || grid.subsymbols() != self.subsymbols() {
            return Err(invalid(format!(
                "grid is {}x{}, modulator is {}x{}",
                grid.subcarriers(),
                grid.subsymbols(),
                self.subcarriers(),
                self.subsymbols()
            )));
        }
        Ok(())
    }
}

/// Free-function form of [`ModulationSet::modulate`].
pub fn modulate<T: Real>(grid: &SymbolGrid<T>, mods: &ModulationSet<T>) -> Result<GfdmBlock<T>> {
    mods.modulate(grid)
}

/// Free-function form of [`ModulationSet::demodulate`].
pub fn demodulate<T: Real>(
    received: &ComplexVector<T>,
    mods: &ModulationSet<T>,
) -> Result<SymbolGrid<T>> {
    mods.demodulate(received)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{CodingScope, NoiseModel, RedundantPlacement, UwPlacement, Variant};
    use crate::numerics::{random_bits, RngStream};
    use rand::Rng;

    fn cp_config(k: usize, m: usize, alpha: f64) -> FrameConfig {
        FrameConfig {
            subcarriers: k,
            subsymbols: m,
            data_subcarriers: k,
            redundant_subcarriers: 0,
            guard_len: k / 4,
            bits_per_symbol: 2,
            alpha,
            variant: Variant::CpGfdm,
            uw_placement: UwPlacement::FirstOnly,
            uw_sequence: Vec::new(),
            null_subcarriers: Vec::new(),
            slot_offset: 0,
            coding_scope: CodingScope::Block,
            redundant_placement: RedundantPlacement::Default,
            noise_model: NoiseModel::White,
        }
    }

    fn random_grid(k: usize, m: usize, seed: u64) -> SymbolGrid<f64> {
        let mut rng = RngStream::new(seed, 0).generator();
        let e = (0..k * m)
            .map(|_| Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        SymbolGrid::from_vec(k, m, e).unwrap()
    }

    #[test]
    fn qpsk_table() {
        let s = map_bits::<f64>(&[0, 0, 1, 1, 0, 1, 1, 0], 2).unwrap();
        let h = 0.5f64.sqrt();
        assert!((s[0] - Complex::new(h, h)).norm() < 1e-15);
        assert!((s[1] - Complex::new(-h, -h)).norm() < 1e-15);
        assert!((s[2] - Complex::new(h, -h)).norm() < 1e-15);
        assert!((s[3] - Complex::new(-h, h)).norm() < 1e-15);
        let e: f64 = s.iter().map(|c| c.norm_sqr()).sum::<f64>() / 4.0;
        assert!((e - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mapping_rejects_bad_input() {
        assert!(map_bits::<f64>(&[0, 1, 0], 2).is_err());
        assert!(map_bits::<f64>(&[0, 1, 0], 3).is_err());
        assert!(demap::<f64>(&[], 5).is_err());
    }

    #[test]
    fn sixteen_qam_energy_monte_carlo() {
        let mut rng = RngStream::new(3, 0).generator();
        let bits = random_bits(&mut rng, 100_000);
        let s = map_bits::<f64>(&bits, 4).unwrap();
        let e: f64 = s.iter().map(|c| c.norm_sqr()).sum::<f64>() / s.len() as f64;
        assert!((e - 1.0).abs() < 0.02, "{e}");
    }

    #[test]
    fn gray_neighbours_differ_by_one_bit() {
        for mu in [2usize, 4, 6] {
            let half = mu / 2;
            let levels = 1usize << half;
            let mut pts = Vec::new();
            for idx in 0..levels {
                let gray = idx ^ (idx >> 1);
                let bits: Vec<u8> = (0..half).rev().map(|b| ((gray >> b) & 1) as u8).collect();
                let mut both = bits.clone();
                both.extend(&bits);
                pts.push((map_bits::<f64>(&both, mu).unwrap()[0].re, bits));
            }
            pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            for w in pts.windows(2) {
                let diff = w[0].1.iter().zip(&w[1].1).filter(|(a, b)| a != b).count();
                assert_eq!(diff, 1);
            }
        }
    }

    #[test]
    fn demap_round_trip_and_tie_break() {
        for mu in [2usize, 4, 6, 8] {
            let mut rng = RngStream::new(mu as u64, 1).generator();
            let bits = random_bits(&mut rng, mu * 500);
            let s = map_bits::<f64>(&bits, mu).unwrap();
            assert_eq!(demap(&s, mu).unwrap(), bits);
        }
        assert_eq!(demap(&[Complex::new(0.0f64, 0.0)], 2).unwrap(), vec![0, 0]);
    }

    #[test]
    fn first_column_is_prototype_and_norms_unit() {
        let mods = ModulationSet::<f64>::from_config(&cp_config(8, 2, 0.5)).unwrap();
        for n in 0..16 {
            assert!((mods.a_i[(n, 0)].re - mods.prototype.time_samples[n]).abs() < 1e-15);
            assert!(mods.a_i[(n, 0)].im.abs() < 1e-15);
        }
        for c in 0..16 {
            assert!((mods.a_i.column(c).norm() - 1.0).abs() < 1e-12);
            assert!((mods.a_q.column(c).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cross_correlation_oracle() {
        let mods = ModulationSet::<f64>::from_config(&cp_config(8, 2, 0.5)).unwrap();
        let mut worst = 0.0f64;
        for a in 0..16 {
            for b in 0..16 {
                let ip: Complex<f64> = (0..16)
                    .map(|n| mods.a_i[(n, a)].conj() * mods.a_q[(n, b)])
                    .sum();
                worst = worst.max(ip.re.abs());
            }
        }
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn matrix_path_matches_double_sum() {
        let (k, m) = (8, 2);
        let mods = ModulationSet::<f64>::from_config(&cp_config(k, m, 0.5)).unwrap();
        let grid = random_grid(k, m, 11);
        let x = mods.modulate(&grid).unwrap();
        let n = k * m;
        let g = &mods.prototype.time_samples;
        let j = Complex::new(0.0, 1.0);
        for t in 0..n {
            let mut acc = Complex::new(0.0, 0.0);
            for mm in 0..m {
                for kk in 0..k {
                    let tone = Complex::from_polar(
                        1.0,
                        2.0 * std::f64::consts::PI * (kk * t) as f64 / k as f64,
                    );
                    let gi = g[(t + n - mm * k) % n];
                    let gq = g[(t + 2 * n - mm * k - k / 2) % n];
                    let d = grid.get(kk, mm);
                    acc += d.re * j.powu(kk as u32) * gi * tone
                        + d.im * j.powu(kk as u32 + 1) * gq * tone;
                }
            }
            assert!((acc - x.time_samples[t]).norm() < 1e-10);
        }
    }

    #[test]
    fn loopback_and_probe() {
        for (k, m, a) in [(8, 2, 0.5), (8, 4, 0.1), (64, 2, 0.5), (64, 4, 0.1)] {
            let mods = ModulationSet::<f64>::from_config(&cp_config(k, m, a)).unwrap();
            let grid = random_grid(k, m, k as u64 + m as u64);
            let x = mods.modulate(&grid).unwrap();
            let back = mods.demodulate(&x.time_samples).unwrap();
            assert!(back.max_abs_diff(&grid) < 1e-8);
        }
        let mods = ModulationSet::<f64>::from_config(&cp_config(8, 2, 0.5)).unwrap();
        let probe: Vec<_> = mods.a_i.column(3 + 8).iter().copied().collect();
        let back = mods
            .demodulate(&ComplexVector::new(probe).unwrap())
            .unwrap();
        for kk in 0..8 {
            for mm in 0..2 {
                let want = if (kk, mm) == (3, 1) {
                    Complex::new(1.0, 0.0)
                } else {
                    Complex::new(0.0, 0.0)
                };
                assert!((back.get(kk, mm) - want).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        let mods = ModulationSet::<f64>::from_config(&cp_config(8, 2, 0.5)).unwrap();
        assert!(mods.modulate(&SymbolGrid::zeros(8, 3)).is_err());
        assert!(mods.demodulate_real(&[Complex::new(0.0, 0.0); 15]).is_err());
        let g = build_prototype::<f64>(8, 4, crate::pulse::PulseShape::RrcMeyer { alpha: 0.5 })
            .unwrap();
        assert!(ModulationSet::build(&cp_config(8, 2, 0.5), g).is_err());
    }

    #[test]
    fn leakage_is_measured() {
        let mods = ModulationSet::<f64>::from_config(&cp_config(8, 4, 0.5)).unwrap();
        let l = mods.off_block_leakage(1);
        assert!(l > 0.0 && l < 1.0);
    }
}
