//! Complete transmit/receive chain for one configuration.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;

use crate::channel::{apply_channel, noise_sigma2_from_ebn0, ChannelModel, ChannelRealization};
use crate::config::{FrameConfig, GuardKind, NoiseModel};
use crate::error::{invalid, Result};
use crate::modem::{demap, map_bits, ModulationSet};
use crate::numerics::{random_bits, ComplexVector, Dft};
use crate::receiver::{coefficient_noise, equalize_fde, spectral_weights, PreparedSmoother};
use crate::scalar::Real;
use crate::uw::{FrameBudget, UwCoder};

/// Per-rail variance of unit-energy data symbols.
pub const RAIL_VARIANCE: f64 = 0.5;

/// Result of receiving one block.
#[derive(Debug, Clone)]
pub struct Reception<T: Real> {
    pub bits: Vec<u8>,
    pub estimates: Vec<Complex<T>>,
    pub null_bins: usize,
}

/// Counters for one simulated block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockOutcome {
    pub bits: usize,
    pub bit_errors: usize,
    pub null_bins: usize,
}

#[derive(Debug, Clone)]
pub struct Link<T: Real> {
    pub config: FrameConfig,
    pub mods: ModulationSet<T>,
    pub coder: UwCoder<T>,
    smoother: Option<PreparedSmoother<T>>,
    weights: Option<DMatrix<T>>,
    dft: Dft<T>,
    budget: FrameBudget,
}

impl<T: Real> Link<T> {
    pub fn new(config: FrameConfig) -> Result<Self> {
        config.validate()?;
        let mods = ModulationSet::from_config(&config)?;
        let coder = UwCoder::build(&config, &mods)?;
        let dft = Dft::new(config.block_len())?;
        let smoother = if coder.has_redundancy() {
            Some(PreparedSmoother::new(&coder.r)?)
        } else {
            None
        };
        let weights = match (config.noise_model, &smoother) {
            (NoiseModel::Colored, Some(_)) => Some(spectral_weights(&mods, &dft)),
            _ => None,
        };
        let budget = coder.budget(config.bits_per_symbol);
        Ok(Self {
            config,
            mods,
            coder,
            smoother,
            weights,
            dft,
            budget,
        })
    }

    pub fn budget(&self) -> FrameBudget {
        self.budget
    }

    pub fn bits_per_block(&self) -> usize {
        self.budget.data_bits
    }

    pub fn frame_len(&self) -> usize {
        self.config.frame_len()
    }

    pub fn noise_sigma2(&self, ebn0_db: f64) -> Result<f64> {
        noise_sigma2_from_ebn0(ebn0_db, &self.budget)
    }

    /// Maps, encodes, modulates and frames one block of bits.
    pub fn transmit(&self, bits: &[u8]) -> Result<ComplexVector<T>> {
        if bits.len() != self.bits_per_block() {
            return Err(invalid(format!(
                "{} bits, a block carries {}",
                bits.len(),
                self.bits_per_block()
            )));
        }
        let symbols = map_bits(bits, self.config.bits_per_symbol)?;
        self.transmit_symbols(&symbols)
    }

    pub fn transmit_symbols(&self, symbols: &[Complex<T>]) -> Result<ComplexVector<T>> {
        let grid = self.coder.encode(symbols)?;
        let block = self.mods.modulate(&grid)?;
        self.coder.assemble_tx(&block)
    }

    /// What the channel sees for an isolated frame: the frame's own span
    /// preceded by the guard that the previous frame left behind. For UW
    /// frames that guard is the trailing unique word.
    pub fn channel_input(&self, frame: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.config.block_len();
        match self.config.guard() {
            GuardKind::Cp => frame.to_vec(),
            GuardKind::Uw => frame[n..].iter().chain(&frame[..n]).copied().collect(),
        }
    }

    /// Equalizes, demodulates, removes the unique word, smooths and demaps a
    /// received guarded block.
    pub fn receive(&self, rx: &[Complex<T>], ch: &ChannelRealization<T>) -> Result<Reception<T>> {
        let eq = equalize_fde(rx, self.config.guard_len, ch, &self.dft)?;
        let natural = self.coder.unrotate(&eq.samples);
        let mut v = self.mods.demodulate_real(&natural)?;
        if self.config.guard() == GuardKind::Uw {
            v -= self.coder.uw_influence();
        }
        let sigma2 = ch.noise_sigma2;
        let d = match (&self.smoother, &self.weights) {
            (Some(s), Some(w)) if sigma2 > 0.0 => {
                s.apply_colored(&v, &coefficient_noise(w, &eq, sigma2), RAIL_VARIANCE)?
            }
            (Some(s), _) => {
                let rail_noise = 0.5 * sigma2 * eq.noise_gain();
                s.apply(&v, rail_noise / RAIL_VARIANCE)
            }
            (None, _) => self.coder.gather_data(&v),
        };
        let estimates = self.coder.unstack_symbols(&d);
        let bits = demap(&estimates, self.config.bits_per_symbol)?;
        Ok(Reception {
            bits,
            estimates,
            null_bins: eq.null_bins,
        })
    }

    /// Sends one random block through a fresh channel draw.
    pub fn run_block<R: Rng + ?Sized>(
        &self,
        channel: &ChannelModel,
        noise_sigma2: f64,
        rng: &mut R,
    ) -> Result<BlockOutcome> {
        let bits = random_bits(rng, self.bits_per_block());
        let frame = self.transmit(&bits)?;
        let ch = channel.realize(
            self.config.guard_len,
            self.config.block_len(),
            noise_sigma2,
            rng,
        )?;
        let rx = apply_channel(&self.channel_input(&frame), &ch, rng);
        let out = self.receive(&rx, &ch)?;
        let bit_errors = bits.iter().zip(&out.bits).filter(|(a, b)| a != b).count();
        Ok(BlockOutcome {
            bits: bits.len(),
            bit_errors,
            null_bins: out.null_bins,
        })
    }
}
