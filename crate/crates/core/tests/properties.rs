use nalgebra::DVector;
use num_complex::Complex;
use proptest::prelude::*;
use uwgfdm::baselines::{system_config, SystemName};
use uwgfdm::modem::{demap, map_bits, ModulationSet, SymbolGrid};
use uwgfdm::numerics::{circular_convolve, dft, inverse_dft};
use uwgfdm::uw::UwCoder;
use uwgfdm::{CodingScope, FrameConfig, NoiseModel, RedundantPlacement, UwPlacement, Variant};

fn complex_vec(max: usize) -> impl Strategy<Value = Vec<Complex<f64>>> {
    prop::collection::vec(
        (-10.0f64..10.0, -10.0f64..10.0).prop_map(|(a, b)| Complex::new(a, b)),
        1..=max,
    )
}

fn small_uw(k: usize, m: usize, n_r: usize, all: bool) -> FrameConfig {
    FrameConfig {
        subcarriers: k,
        subsymbols: m,
        data_subcarriers: k - n_r,
        redundant_subcarriers: n_r,
        guard_len: n_r,
        bits_per_symbol: 2,
        alpha: 0.5,
        variant: Variant::UwGfdm,
        uw_placement: if all {
            UwPlacement::All
        } else {
            UwPlacement::FirstOnly
        },
        uw_sequence: Vec::new(),
        null_subcarriers: Vec::new(),
        slot_offset: FrameConfig::default_slot_offset(k, n_r),
        coding_scope: CodingScope::Block,
        redundant_placement: RedundantPlacement::Default,
        noise_model: NoiseModel::White,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dft_round_trip(v in complex_vec(64), extra in 0usize..8) {
        let n = v.len() + extra;
        let back = inverse_dft(&dft(&v, n).unwrap(), n).unwrap();
        let scale = v.iter().map(|c| c.norm()).fold(1.0, f64::max);
        for (i, b) in back.iter().enumerate() {
            let want = v.get(i).copied().unwrap_or_default();
            prop_assert!((b - want).norm() < 1e-12 * scale * n as f64);
        }
    }

    #[test]
    fn convolution_matches_direct_sum(a in complex_vec(32), b in complex_vec(32)) {
        let p = a.len().max(b.len());
        let fast = circular_convolve(&a, &b, p).unwrap();
        for (n, f) in fast.iter().enumerate() {
            let mut acc = Complex::new(0.0, 0.0);
            for (m, am) in a.iter().enumerate() {
                let idx = (n + p - m % p) % p;
                acc += am * b.get(idx).copied().unwrap_or_default();
            }
            prop_assert!((acc - f).norm() < 1e-9);
        }
    }

    #[test]
    fn bits_round_trip(bits in prop::collection::vec(0u8..2, 0..40), mu in prop::sample::select(vec![2usize, 4, 6])) {
        let usable = bits.len() / mu * mu;
        let s = map_bits::<f64>(&bits[..usable], mu).unwrap();
        prop_assert_eq!(demap(&s, mu).unwrap(), bits[..usable].to_vec());
    }

    #[test]
    fn zero_tail_for_random_configs(
        k in prop::sample::select(vec![8usize, 16, 32]),
        m in 1usize..5,
        frac in 1usize..4,
        all in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let n_r = (k / 8 * frac).max(1);
        let cfg = small_uw(k, m, n_r, all);
        let mods = ModulationSet::<f64>::from_config(&cfg).unwrap();
        let coder = UwCoder::build(&cfg, &mods).unwrap();
        let mut state = seed;
        let d = DVector::from_fn(coder.data_len(), |_, _| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        });
        prop_assert!(coder.tail_residual(&d).unwrap() < 1e-7);
    }
}

#[test]
fn modulation_is_linear_and_invertible() {
    let cfg = system_config(SystemName::CpGfdm);
    let mods = ModulationSet::<f64>::from_config(&cfg).unwrap();
    let g1 = SymbolGrid::from_vec(
        64,
        4,
        (0..256)
            .map(|i| Complex::new((i as f64).sin(), (i as f64).cos()))
            .collect(),
    )
    .unwrap();
    let g2 = SymbolGrid::from_vec(
        64,
        4,
        (0..256)
            .map(|i| Complex::new(0.1 * i as f64, -1.0))
            .collect(),
    )
    .unwrap();
    let (a, b) = (0.7, -1.3);
    let mix = SymbolGrid::from_vec(
        64,
        4,
        g1.as_slice()
            .iter()
            .zip(g2.as_slice())
            .map(|(x, y)| x * a + y * b)
            .collect(),
    )
    .unwrap();
    let x1 = mods.modulate(&g1).unwrap().time_samples;
    let x2 = mods.modulate(&g2).unwrap().time_samples;
    let xm = mods.modulate(&mix).unwrap().time_samples;
    for i in 0..256 {
        assert!((xm[i] - (x1[i] * a + x2[i] * b)).norm() < 1e-10);
    }
    assert!(mods.demodulate(&xm).unwrap().max_abs_diff(&mix) < 1e-8);
}

#[test]
fn table_one_real_orthogonality() {
    for alpha in [0.1, 0.5] {
        let mut cfg = system_config(SystemName::UwGfdmFirst);
        cfg.alpha = alpha;
        let mods = ModulationSet::<f64>::from_config(&cfg).unwrap();
        assert!(mods.cross_residual < 1e-9);
        assert!(mods.self_residual < 1e-9);
    }
}
