//! Quick invariant suite behind the `selftest` subcommand.

use nalgebra::DMatrix;
use uwgfdm::baselines::{system_config, SystemName};
use uwgfdm::channel::ChannelModel;
use uwgfdm::modem::ModulationSet;
use uwgfdm::numerics::{random_bits, RngStream};
use uwgfdm::receiver::WienerSmoother;
use uwgfdm::Link64;

use crate::engine::run_ber_sweep;
use crate::scenario::{Scenario, SystemSpec};

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String), String>) -> Check {
    match f() {
        Ok((passed, detail)) => Check {
            name,
            passed,
            detail,
        },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

pub fn run_selftest() -> Vec<Check> {
    let s = |e: uwgfdm::Error| e.to_string();
    vec![
        check("real orthogonality of the I/Q matrices", || {
            let mods =
                ModulationSet::<f64>::from_config(&system_config(SystemName::CpGfdm)).map_err(s)?;
            Ok((
                mods.cross_residual < 1e-9,
                format!("max residual {:.2e}", mods.cross_residual),
            ))
        }),
        check("zero tail on coded sub-symbols", || {
            let link = Link64::new(system_config(SystemName::UwGfdmAll)).map_err(s)?;
            let mut rng = RngStream::new(1, 1).generator();
            let mut worst = 0.0f64;
            for _ in 0..50 {
                let bits = random_bits(&mut rng, link.bits_per_block());
                let syms = uwgfdm::modem::map_bits::<f64>(&bits, 2).map_err(s)?;
                let d = link.coder.stack_symbols(&syms).map_err(s)?;
                worst = worst.max(link.coder.tail_residual(&d).map_err(s)?);
            }
            Ok((worst < 1e-7, format!("max tail {worst:.2e}")))
        }),
        check("noiseless loopback over fading for every preset", || {
            let pdp = ChannelModel::wran();
            let mut errors = 0;
            for name in SystemName::ALL {
                let link = Link64::new(system_config(name)).map_err(s)?;
                let mut rng = RngStream::new(2, name as u64).generator();
                for _ in 0..10 {
                    errors += link.run_block(&pdp, 0.0, &mut rng).map_err(s)?.bit_errors;
                }
            }
            Ok((errors == 0, format!("{errors} bit errors")))
        }),
        check("smoother inverts the code at vanishing noise", || {
            let link = Link64::new(system_config(SystemName::UwGfdmFirst)).map_err(s)?;
            let q = WienerSmoother::build(&link.coder, 1e-12, 0.5).map_err(s)?.q;
            let n = q.nrows();
            let dev = (q * &link.coder.r - DMatrix::identity(n, n)).amax();
            Ok((dev < 1e-8, format!("max |QR - I| {dev:.2e}")))
        }),
        check("sweep independent of worker count", || {
            let mut sc = Scenario::default();
            sc.ebn0_grid_db = vec![10.0];
            sc.max_blocks = 32;
            sc.batch_blocks = 8;
            let sys = SystemSpec::from_preset("uw-gfdm").map_err(|e| e.to_string())?;
            let run = |threads: usize| -> Result<_, String> {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .map_err(|e| e.to_string())?;
                pool.install(|| run_ber_sweep(&sc, &sys))
                    .map_err(|e| e.to_string())
            };
            let (a, b) = (run(1)?, run(3)?);
            Ok((
                a == b,
                format!("{} vs {} bit errors", a[0].bit_errors, b[0].bit_errors),
            ))
        }),
    ]
}
