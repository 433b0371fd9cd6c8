//! Block-fading tapped-delay-line Rayleigh channel and AWGN calibration.

use num_complex::Complex;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::numerics::{complex_gaussian, dft, RngStream};
use crate::scalar::Real;
use crate::uw::FrameBudget;

/// Sample period that maps the WRAN profile's 21 μs tap inside a 16-sample guard.
pub const WRAN_SAMPLE_PERIOD_US: f64 = 1.4;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerDelayProfile {
    pub delays_us: Vec<f64>,
    pub powers_db: Vec<f64>,
    pub sample_period_us: f64,
}

impl PowerDelayProfile {
    pub fn new(delays_us: Vec<f64>, powers_db: Vec<f64>, sample_period_us: f64) -> Result<Self> {
        if delays_us.is_empty() || delays_us.len() != powers_db.len() {
            return Err(invalid(
                "delay and power lists must be non-empty and of equal length",
            ));
        }
        if delays_us[0] != 0.0 || delays_us.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("delays must start at 0 and be nondecreasing"));
        }
        if delays_us.iter().chain(&powers_db).any(|v| !v.is_finite()) {
            return Err(invalid("profile contains non-finite values"));
        }
        if !(sample_period_us > 0.0 && sample_period_us.is_finite()) {
            return Err(invalid("sample period must be positive"));
        }
        Ok(Self {
            delays_us,
            powers_db,
            sample_period_us,
        })
    }

    /// Rural long-delay profile used for the fading experiments.
    pub fn wran() -> Self {
        Self::new(
            vec![0.0, 3.0, 8.0, 11.0, 13.0, 21.0],
            vec![0.0, -7.0, -15.0, -22.0, -24.0, -19.0],
            WRAN_SAMPLE_PERIOD_US,
        )
        .expect("built-in profile is valid")
    }

    /// Single unit tap: flat fading.
    pub fn flat() -> Self {
        Self::new(vec![0.0], vec![0.0], 1.0).expect("built-in profile is valid")
    }

    /// Linear powers normalized to unit sum.
    pub fn linear_powers(&self) -> Vec<f64> {
        let lin: Vec<f64> = self
            .powers_db
            .iter()
            .map(|p| 10f64.powf(p / 10.0))
            .collect();
        let total: f64 = lin.iter().sum();
        lin.iter().map(|p| p / total).collect()
    }

    /// `(sample index, power)` pairs, with colliding taps' powers summed.
    pub fn mapped_taps(&self) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = Vec::new();
        for (d, p) in self.delays_us.iter().zip(self.linear_powers()) {
            let idx = (d / self.sample_period_us).round() as usize;
            match out.iter_mut().find(|(i, _)| *i == idx) {
                Some(slot) => slot.1 += p,
                None => out.push((idx, p)),
            }
        }
        out
    }

    pub fn max_tap_index(&self) -> usize {
        self.mapped_taps().iter().map(|t| t.0).max().unwrap_or(0)
    }
}

/// One block's channel: taps, N-point response and noise level.
#[derive(Debug, Clone)]
pub struct ChannelRealization<T: Real> {
    /// Dense impulse response, index = delay in samples.
    pub taps: Vec<Complex<T>>,
    pub freq_response: Vec<Complex<T>>,
    /// Noise variance per complex sample.
    pub noise_sigma2: f64,
}

impl<T: Real> ChannelRealization<T> {
    pub fn from_taps(taps: Vec<Complex<T>>, block_len: usize, noise_sigma2: f64) -> Result<Self> {
        if taps.is_empty() || taps.len() > block_len {
            return Err(invalid(
                "impulse response must be non-empty and no longer than the block",
            ));
        }
        if !(noise_sigma2 >= 0.0 && noise_sigma2.is_finite()) {
            return Err(invalid("noise variance must be finite and non-negative"));
        }
        let freq_response = dft(&taps, block_len)?;
        Ok(Self {
            taps,
            freq_response,
            noise_sigma2,
        })
    }

    /// Unit tap, no distortion.
    pub fn identity(block_len: usize, noise_sigma2: f64) -> Result<Self> {
        Self::from_taps(
            vec![Complex::new(T::one(), T::zero())],
            block_len,
            noise_sigma2,
        )
    }

    pub fn with_noise(mut self, noise_sigma2: f64) -> Self {
        self.noise_sigma2 = noise_sigma2;
        self
    }
}

/// Draws independent circular Gaussian taps with the profile's powers.
pub fn sample_channel<T: Real, R: Rng + ?Sized>(
    pdp: &PowerDelayProfile,
    guard_len: usize,
    block_len: usize,
    noise_sigma2: f64,
    rng: &mut R,
) -> Result<ChannelRealization<T>> {
    let taps = pdp.mapped_taps();
    let max = pdp.max_tap_index();
    if max >= guard_len.max(1) {
        return Err(Error::GuardViolation {
            tap_index: max,
            guard_len,
        });
    }
    let mut h = vec![Complex::new(T::zero(), T::zero()); max + 1];
    for (idx, p) in taps {
        h[idx] = complex_gaussian(rng, p);
    }
    ChannelRealization::from_taps(h, block_len, noise_sigma2)
}

/// What a Monte Carlo block sees: a fixed unit channel or fresh fading taps.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelModel {
    /// Unit tap, noise only.
    Awgn,
    /// Rayleigh block fading with the given profile.
    Fading(PowerDelayProfile),
}

impl ChannelModel {
    pub fn wran() -> Self {
        Self::Fading(PowerDelayProfile::wran())
    }

    /// One realization; `Awgn` draws nothing from `rng`.
    pub fn realize<T: Real, R: Rng + ?Sized>(
        &self,
        guard_len: usize,
        block_len: usize,
        noise_sigma2: f64,
        rng: &mut R,
    ) -> Result<ChannelRealization<T>> {
        match self {
            Self::Awgn => ChannelRealization::identity(block_len, noise_sigma2),
            Self::Fading(pdp) => sample_channel(pdp, guard_len, block_len, noise_sigma2, rng),
        }
    }
}

/// [`sample_channel`] drawing from a fresh generator of `stream`.
pub fn sample_channel_from_stream<T: Real>(
    pdp: &PowerDelayProfile,
    guard_len: usize,
    block_len: usize,
    noise_sigma2: f64,
    stream: &RngStream,
) -> Result<ChannelRealization<T>> {
    sample_channel(
        pdp,
        guard_len,
        block_len,
        noise_sigma2,
        &mut stream.generator(),
    )
}

/// Linear convolution with the taps, truncated to the input length, plus
/// white circular Gaussian noise.
pub fn apply_channel<T: Real, R: Rng + ?Sized>(
    tx: &[Complex<T>],
    ch: &ChannelRealization<T>,
    rng: &mut R,
) -> Vec<Complex<T>> {
    let mut out = vec![Complex::new(T::zero(), T::zero()); tx.len()];
    for (n, y) in out.iter_mut().enumerate() {
        for (d, h) in ch.taps.iter().enumerate().take(n + 1) {
            *y += *h * tx[n - d];
        }
    }
    if ch.noise_sigma2 > 0.0 {
        for y in out.iter_mut() {
            *y += complex_gaussian::<T, R>(rng, ch.noise_sigma2);
        }
    }
    out
}

/// Noise variance per complex sample for a target Eb/N0, charging the whole
/// frame energy (guard, redundancy and unique word) to the data bits:
/// `σ² = E_frame / (N_bits · 10^(Eb/N0 / 10))`.
pub fn noise_sigma2_from_ebn0(ebn0_db: f64, budget: &FrameBudget) -> Result<f64> {
    if budget.data_bits == 0 || !(budget.energy > 0.0) {
        return Err(invalid("frame carries no data or no energy"));
    }
    if ebn0_db.is_nan() {
        return Err(invalid("Eb/N0 is NaN"));
    }
    Ok(budget.energy / (budget.data_bits as f64 * 10f64.powf(ebn0_db / 10.0)))
}
