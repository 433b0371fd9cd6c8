//! Out-of-band emission: Welch PSD of a concatenated frame stream with the
//! band-edge subcarriers switched off.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use uwgfdm::numerics::{random_bits, welch_psd, PsdEstimate, RngStream};
use uwgfdm::{FrameConfig, Link64};

use crate::error::{SimError, SimResult};
use crate::label_stream;
use crate::scenario::{Scenario, SystemSpec};

const OOB_TAG: u64 = 2;

/// Keeps the `fraction` of subcarriers closest to DC and nulls the rest.
pub fn with_edge_band(config: &FrameConfig, fraction: f64) -> SimResult<FrameConfig> {
    let k = config.subcarriers;
    let active = (k as f64 * fraction).round() as usize;
    if active >= k {
        return Err(SimError::Usage(
            "all subcarriers are active, so there is no out-of-band region; lower oob_active_fraction".into(),
        ));
    }
    let (pos, neg) = (active.div_ceil(2), active / 2);
    let nulls: Vec<usize> = (pos..k - neg).collect();
    let mut cfg = config.clone();
    let available = active
        .checked_sub(cfg.redundant_subcarriers)
        .filter(|&d| d > 0)
        .ok_or_else(|| {
            SimError::Usage(format!(
                "{active} active subcarriers cannot host the redundancy"
            ))
        })?;
    cfg.data_subcarriers = available;
    cfg.null_subcarriers = nulls;
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, Serialize)]
pub struct OobResult {
    pub system: String,
    #[serde(skip)]
    pub psd: PsdEstimate,
    /// Mean PSD level in dB over the switched-off band, relative to the peak.
    pub oob_db: f64,
    pub blocks: usize,
    pub segments: usize,
}

/// Subcarrier nearest to normalized frequency `f` (cycles per sample).
fn nearest_subcarrier(f: f64, k: usize) -> usize {
    let idx = (f * k as f64).round() as i64;
    idx.rem_euclid(k as i64) as usize
}

pub fn run_oob(scenario: &Scenario, system: &SystemSpec) -> SimResult<OobResult> {
    let cfg = with_edge_band(&system.config, scenario.oob_active_fraction)?;
    let link = Link64::new(cfg.clone())?;
    let base = RngStream::new(scenario.seed, label_stream(&system.label, OOB_TAG));
    let frames: Vec<Vec<Complex64>> = (0..scenario.oob_blocks as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = base.substream(b).generator();
            let bits = random_bits(&mut rng, link.bits_per_block());
            link.transmit(&bits).map(|f| f.into_inner())
        })
        .collect::<Result<_, _>>()?;
    let stream: Vec<Complex64> = frames.concat();
    let psd = welch_psd(&stream, scenario.oob_segment, 0.5)?;
    let oob_db = psd
        .mean_db_where(|f| {
            cfg.null_subcarriers
                .contains(&nearest_subcarrier(f, cfg.subcarriers))
        })
        .ok_or_else(|| {
            SimError::Usage("segment too short to resolve the switched-off band".into())
        })?;
    Ok(OobResult {
        system: system.label.clone(),
        segments: psd.segments,
        psd,
        oob_db,
        blocks: scenario.oob_blocks,
    })
}
