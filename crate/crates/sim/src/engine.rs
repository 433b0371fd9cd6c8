//! BER/BLER sweeps and throughput.

use rayon::prelude::*;
use serde::Serialize;
use uwgfdm::numerics::RngStream;
use uwgfdm::Link64;

use crate::error::SimResult;
use crate::label_stream;
use crate::scenario::{Scenario, SystemSpec};

/// Tag separating BER streams from the other experiments' streams.
const BER_TAG: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRecord {
    pub system: String,
    pub ebn0_db: f64,
    pub ber: f64,
    pub bler: f64,
    /// `N_d/(K+L)·(1−BLER)`.
    pub throughput_paper: f64,
    /// Data symbols per transmitted sample times `(1−BLER)`.
    pub throughput_block: f64,
    pub blocks: u64,
    pub bit_errors: u64,
    #[serde(skip)]
    pub block_errors: u64,
    pub seed: u64,
}

/// Runs every Eb/N0 point of the scenario grid for one system.
///
/// Blocks run in batches of `scenario.batch_blocks`; the stopping rule is
/// checked only between batches, and block `b` of point `p` always draws
/// from the same stream, so results do not depend on thread scheduling.
pub fn run_ber_sweep(scenario: &Scenario, system: &SystemSpec) -> SimResult<Vec<MetricsRecord>> {
    let link = Link64::new(system.config.clone())?;
    let base = RngStream::new(scenario.seed, label_stream(&system.label, BER_TAG));
    let mut out = Vec::with_capacity(scenario.ebn0_grid_db.len());
    for (p, &ebn0) in scenario.ebn0_grid_db.iter().enumerate() {
        let sigma2 = link.noise_sigma2(ebn0)?;
        let point = base.substream(p as u64);
        let (mut blocks, mut bit_errors, mut block_errors) = (0u64, 0u64, 0u64);
        while bit_errors < scenario.min_bit_errors && blocks < scenario.max_blocks {
            let batch = (scenario.batch_blocks as u64).min(scenario.max_blocks - blocks);
            let results: Vec<(u64, u64)> = (blocks..blocks + batch)
                .into_par_iter()
                .map(|b| {
                    let mut rng = point.substream(b).generator();
                    link.run_block(&scenario.channel, sigma2, &mut rng)
                        .map(|o| (o.bit_errors as u64, u64::from(o.bit_errors > 0)))
                })
                .collect::<Result<_, _>>()?;
            for (bits, blk) in results {
                bit_errors += bits;
                block_errors += blk;
            }
            blocks += batch;
        }
        out.push(record(
            &link,
            &system.label,
            ebn0,
            blocks,
            bit_errors,
            block_errors,
            scenario.seed,
        ));
    }
    Ok(out)
}

fn record(
    link: &Link64,
    label: &str,
    ebn0: f64,
    blocks: u64,
    bit_errors: u64,
    block_errors: u64,
    seed: u64,
) -> MetricsRecord {
    let total_bits = blocks * link.bits_per_block() as u64;
    let bler = block_errors as f64 / blocks as f64;
    let (formula, block) = throughput(link, bler);
    MetricsRecord {
        system: label.to_string(),
        ebn0_db: ebn0,
        ber: bit_errors as f64 / total_bits as f64,
        bler,
        throughput_paper: formula,
        throughput_block: block,
        blocks,
        bit_errors,
        block_errors,
        seed,
    }
}

/// (`N_d/(K+L)·(1−BLER)`, data symbols per frame sample · `(1−BLER)`).
pub fn throughput(link: &Link64, bler: f64) -> (f64, f64) {
    let c = &link.config;
    let ok = 1.0 - bler;
    let formula = c.data_subcarriers as f64 / (c.subcarriers + c.guard_len) as f64 * ok;
    let budget = link.budget();
    (
        formula,
        budget.data_symbols as f64 / budget.samples as f64 * ok,
    )
}

/// BER sweep for every system in the scenario; the throughput columns are
/// part of each record.
pub fn run_throughput(scenario: &Scenario) -> SimResult<Vec<MetricsRecord>> {
    let mut all = Vec::new();
    for s in &scenario.systems {
        all.extend(run_ber_sweep(scenario, s)?);
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use uwgfdm::baselines::{system_config, SystemName};

    #[test]
    fn formula_column_values() {
        let uw = Link64::new(system_config(SystemName::UwGfdmFirst)).unwrap();
        assert!((throughput(&uw, 0.0).0 - 0.6).abs() < 1e-15);
        assert_eq!(throughput(&uw, 1.0), (0.0, 0.0));
        let cp = Link64::new(system_config(SystemName::CpGfdm)).unwrap();
        assert!((throughput(&cp, 0.0).1 - 256.0 / 272.0).abs() < 1e-15);
    }

    #[test]
    fn sweep_is_deterministic_and_counts_consistently() {
        let mut sc = Scenario::default();
        sc.ebn0_grid_db = vec![0.0, 10.0];
        sc.max_blocks = 40;
        sc.batch_blocks = 16;
        sc.min_bit_errors = 100;
        let sys = SystemSpec::from_preset("cp-ofdm").unwrap();
        let a = run_ber_sweep(&sc, &sys).unwrap();
        let b = run_ber_sweep(&sc, &sys).unwrap();
        assert_eq!(a, b);
        for r in &a {
            assert!(r.bler >= r.ber);
            assert!(r.blocks <= 40 && r.blocks > 0);
        }
        assert!(a[0].ber > a[1].ber);
    }
}
