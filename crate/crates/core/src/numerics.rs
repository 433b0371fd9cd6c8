//! Complex-vector primitives: DFT, circular convolution, Welch PSD and
//! seeded random streams.
//!
//! DFT convention everywhere in the crate: the forward transform is
//! unnormalized and the inverse is scaled by `1/size`.

use std::f64::consts::PI;
use std::ops::Deref;
use std::sync::Arc;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Non-empty sequence of finite complex samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector<T: Real>(Vec<Complex<T>>);

impl<T: Real> ComplexVector<T> {
    pub fn new(samples: Vec<Complex<T>>) -> Result<Self> {
        if samples.is_empty() {
            return Err(invalid("complex vector must not be empty"));
        }
        if let Some(i) = samples
            .iter()
            .position(|s| !(s.re.is_finite() && s.im.is_finite()))
        {
            return Err(invalid(format!("sample {i} is not finite")));
        }
        Ok(Self(samples))
    }

    pub fn into_inner(self) -> Vec<Complex<T>> {
        self.0
    }

    pub fn energy(&self) -> T {
        self.0.iter().fold(T::zero(), |acc, s| acc + s.norm_sqr())
    }
}

impl<T: Real> Deref for ComplexVector<T> {
    type Target = [Complex<T>];

    fn deref(&self) -> &[Complex<T>] {
        &self.0
    }
}

/// Forward/inverse transform pair planned once for a fixed size.
#[derive(Clone)]
pub struct Dft<T: Real> {
    size: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> std::fmt::Debug for Dft<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dft").field("size", &self.size).finish()
    }
}

impl<T: Real> Dft<T> {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(invalid("DFT size must be positive"));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            size,
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// In-place forward transform; `buf.len()` must equal the planned size.
    pub fn forward_in_place(&self, buf: &mut [Complex<T>]) {
        assert_eq!(buf.len(), self.size, "buffer length must match DFT size");
        self.forward.process(buf);
    }

    /// In-place inverse transform including the `1/size` scaling.
    pub fn inverse_in_place(&self, buf: &mut [Complex<T>]) {
        assert_eq!(buf.len(), self.size, "buffer length must match DFT size");
        self.inverse.process(buf);
        let scale = T::one() / T::from_usize_lossy(self.size);
        for s in buf.iter_mut() {
            *s = s.scale(scale);
        }
    }

    /// Zero-pads `v` to the planned size and transforms it.
    pub fn forward(&self, v: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        let mut buf = padded(v, self.size)?;
        self.forward.process(&mut buf);
        Ok(buf)
    }

    pub fn inverse(&self, v: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        let mut buf = padded(v, self.size)?;
        self.inverse_in_place(&mut buf);
        Ok(buf)
    }
}

fn padded<T: Real>(v: &[Complex<T>], size: usize) -> Result<Vec<Complex<T>>> {
    if v.len() > size {
        return Err(invalid(format!(
            "input length {} exceeds transform size {size}",
            v.len()
        )));
    }
    let mut buf = v.to_vec();
    buf.resize(size, Complex::new(T::zero(), T::zero()));
    Ok(buf)
}

/// `size`-point forward DFT of `v` (zero-padded).
pub fn dft<T: Real>(v: &[Complex<T>], size: usize) -> Result<Vec<Complex<T>>> {
    Dft::new(size)?.forward(v)
}

/// `size`-point inverse DFT of `v`, scaled by `1/size`.
pub fn inverse_dft<T: Real>(v: &[Complex<T>], size: usize) -> Result<Vec<Complex<T>>> {
    Dft::new(size)?.inverse(v)
}

/// `result[n] = Σ_m a[m] · b[(n − m) mod period]`, computed through the DFT.
pub fn circular_convolve<T: Real>(
    a: &[Complex<T>],
    b: &[Complex<T>],
    period: usize,
) -> Result<Vec<Complex<T>>> {
    let dft = Dft::new(period)?;
    let fa = dft.forward(a)?;
    let fb = dft.forward(b)?;
    let mut prod: Vec<_> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    dft.inverse_in_place(&mut prod);
    Ok(prod)
}

/// Averaged periodogram ordered by normalized frequency `-1/2 .. 1/2`.
#[derive(Debug, Clone)]
pub struct PsdEstimate {
    pub freq_norm: Vec<f64>,
    /// Power in dB relative to the strongest bin.
    pub psd_db: Vec<f64>,
    pub segments: usize,
}

impl PsdEstimate {
    /// Mean dB level over bins whose normalized frequency satisfies `pred`.
    pub fn mean_db_where(&self, pred: impl Fn(f64) -> bool) -> Option<f64> {
        let sel: Vec<f64> = self
            .freq_norm
            .iter()
            .zip(&self.psd_db)
            .filter(|(f, _)| pred(**f))
            .map(|(_, p)| *p)
            .collect();
        (!sel.is_empty()).then(|| sel.iter().sum::<f64>() / sel.len() as f64)
    }
}

/// Welch PSD with a periodic Hann window; `overlap` is the fraction of
/// `segment_len` shared by consecutive segments.
pub fn welch_psd<T: Real>(
    v: &[Complex<T>],
    segment_len: usize,
    overlap: f64,
) -> Result<PsdEstimate> {
    if segment_len == 0 {
        return Err(invalid("segment length must be positive"));
    }
    if segment_len > v.len() {
        return Err(invalid(format!(
            "segment length {segment_len} exceeds signal length {}",
            v.len()
        )));
    }
    if !(0.0..1.0).contains(&overlap) {
        return Err(invalid(format!("overlap {overlap} outside [0, 1)")));
    }
    let hop = (((1.0 - overlap) * segment_len as f64).round() as usize).max(1);
    let window: Vec<f64> = (0..segment_len)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / segment_len as f64).cos())
        .collect();
    let dft = Dft::<f64>::new(segment_len)?;
    let mut acc = vec![0.0f64; segment_len];
    let mut buf = vec![Complex::new(0.0, 0.0); segment_len];
    let mut segments = 0usize;
    let mut start = 0usize;
    while start + segment_len <= v.len() {
        for (n, slot) in buf.iter_mut().enumerate() {
            let s = v[start + n];
            *slot = Complex::new(s.re.to_f64_lossy(), s.im.to_f64_lossy()) * window[n];
        }
        dft.forward_in_place(&mut buf);
        for (a, s) in acc.iter_mut().zip(&buf) {
            *a += s.norm_sqr();
        }
        segments += 1;
        start += hop;
    }
    let peak = acc.iter().cloned().fold(0.0f64, f64::max);
    if peak <= 0.0 {
        return Err(invalid("signal has no power; PSD is undefined"));
    }
    let half = segment_len / 2;
    let mut freq_norm = Vec::with_capacity(segment_len);
    let mut psd_db = Vec::with_capacity(segment_len);
    for i in 0..segment_len {
        let bin = (i + segment_len - half) % segment_len;
        freq_norm.push((i as f64 - half as f64) / segment_len as f64);
        psd_db.push(10.0 * (acc[bin] / peak).log10());
    }
    Ok(PsdEstimate {
        freq_norm,
        psd_db,
        segments,
    })
}

/// Identifies one reproducible random stream: equal `(seed, stream_id)`
/// always yields the same draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Child stream keyed by `index`, independent of the draw order of
    /// siblings.
    pub fn substream(&self, index: u64) -> Self {
        Self {
            seed: self.seed,
            stream_id: splitmix64(
                self.stream_id ^ splitmix64(index.wrapping_add(0x5851_f42d_4c95_7f2d)),
            ),
        }
    }

    pub fn generator(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Circularly-symmetric complex Gaussian draw with `E|z|² = variance`.
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex<T> {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::lit(re * s), T::lit(im * s))
}

/// Uniform random bits (0/1).
pub fn random_bits<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<u8> {
    (0..count).map(|_| rng.random::<bool>() as u8).collect()
}
