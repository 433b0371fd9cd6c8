//! Peak-to-average power ratio statistics of transmitted frames.

use rayon::prelude::*;
use serde::Serialize;
use uwgfdm::numerics::{random_bits, RngStream};
use uwgfdm::Link64;

use crate::error::{SimError, SimResult};
use crate::label_stream;
use crate::scenario::{Scenario, SystemSpec};

const PAPR_TAG: u64 = 3;

/// CCDF grid spacing in dB.
pub const CCDF_STEP_DB: f64 = 0.25;

/// `10·log10(max|x|² / mean|x|²)`.
pub fn papr_db(samples: &[num_complex::Complex64]) -> f64 {
    let p: Vec<f64> = samples.iter().map(|s| s.norm_sqr()).collect();
    let mean = p.iter().sum::<f64>() / p.len() as f64;
    let peak = p.iter().fold(0.0, |a: f64, &b| a.max(b));
    10.0 * (peak / mean).log10()
}

#[derive(Debug, Clone, Serialize)]
pub struct PaprResult {
    pub system: String,
    /// `(threshold dB, P[PAPR > threshold])` on a 0.25 dB grid.
    #[serde(skip)]
    pub ccdf: Vec<(f64, f64)>,
    /// PAPR exceeded by a fraction 1e-3 of the blocks.
    pub papr_at_1e3_db: f64,
    pub blocks: usize,
}

/// Smallest threshold exceeded by at most `prob` of `sorted` values.
pub fn quantile_exceeded(sorted: &[f64], prob: f64) -> f64 {
    let allowed = (prob * sorted.len() as f64).floor() as usize;
    let idx = sorted.len().saturating_sub(allowed + 1);
    sorted[idx]
}

pub fn ccdf(sorted: &[f64]) -> Vec<(f64, f64)> {
    let max = sorted.last().copied().unwrap_or(0.0);
    let steps = (max / CCDF_STEP_DB).ceil().max(0.0) as usize + 1;
    let n = sorted.len() as f64;
    (0..=steps)
        .map(|i| {
            let t = i as f64 * CCDF_STEP_DB;
            let above = sorted.len() - sorted.partition_point(|&v| v <= t);
            (t, above as f64 / n)
        })
        .collect()
}

pub fn run_papr(scenario: &Scenario, system: &SystemSpec) -> SimResult<PaprResult> {
    let link = Link64::new(system.config.clone())?;
    let base = RngStream::new(scenario.seed, label_stream(&system.label, PAPR_TAG));
    let mut values: Vec<f64> = (0..scenario.papr_blocks as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = base.substream(b).generator();
            let bits = random_bits(&mut rng, link.bits_per_block());
            link.transmit(&bits).map(|f| papr_db(&f))
        })
        .collect::<Result<_, _>>()?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(SimError::Usage("frame with zero power".into()));
    }
    values.sort_by(f64::total_cmp);
    Ok(PaprResult {
        system: system.label.clone(),
        papr_at_1e3_db: quantile_exceeded(&values, 1e-3),
        ccdf: ccdf(&values),
        blocks: values.len(),
    })
}
