//! Monte Carlo harness for the unique-word GFDM link: BER/BLER sweeps over a
//! fading channel, throughput, out-of-band emission and PAPR statistics.
//!
//! Every result is a pure function of the scenario and its seed. Blocks are
//! processed in fixed-size batches with per-block random streams and the
//! counters are integers, so the worker count never changes the output.

pub mod engine;
pub mod error;
pub mod oob;
pub mod output;
pub mod papr;
pub mod scenario;
pub mod selftest;

pub use engine::{run_ber_sweep, run_throughput, MetricsRecord};
pub use error::{SimError, SimResult};
pub use oob::{run_oob, OobResult};
pub use papr::{run_papr, PaprResult};
pub use scenario::{Scenario, SystemSpec};

/// Stable 64-bit label hash used to give each system its own random streams.
pub(crate) fn label_stream(label: &str, tag: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}
