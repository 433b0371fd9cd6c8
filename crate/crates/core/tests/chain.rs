use nalgebra::DVector;
use num_complex::{Complex, Complex64};
use rand::Rng;
use uwgfdm::baselines::{preset, system_config, SystemName};
use uwgfdm::channel::{
    apply_channel, sample_channel, ChannelModel, ChannelRealization, PowerDelayProfile,
};
use uwgfdm::numerics::{random_bits, RngStream};
use uwgfdm::receiver::{smooth, subtract_uw, ReceivedGrid, WienerSmoother};
use uwgfdm::{Link32, Link64, NoiseModel, UwPlacement};

#[test]
fn noiseless_wran_identity_for_every_preset() {
    let pdp = ChannelModel::wran();
    for name in SystemName::ALL {
        let link = Link64::new(system_config(name)).unwrap();
        let mut rng = RngStream::new(21, name as u64).generator();
        let mut bits = 0;
        while bits < 10_000 {
            let out = link.run_block(&pdp, 0.0, &mut rng).unwrap();
            assert_eq!(out.bit_errors, 0, "{name}");
            bits += out.bits;
        }
    }
}

#[test]
fn high_snr_ideal_channel_is_error_free() {
    let pdp = ChannelModel::Awgn;
    for name in SystemName::ALL {
        let link = Link64::new(system_config(name)).unwrap();
        let s2 = link.noise_sigma2(60.0).unwrap();
        let mut rng = RngStream::new(5, 0).generator();
        for _ in 0..20 {
            assert_eq!(link.run_block(&pdp, s2, &mut rng).unwrap().bit_errors, 0);
        }
    }
}

fn nonzero_uw(len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|i| Complex64::from_polar(0.7, 0.9 * i as f64))
        .collect()
}

#[test]
fn nonzero_uw_loopback_through_fading() {
    for placement in [UwPlacement::FirstOnly, UwPlacement::All] {
        let mut cfg = system_config(SystemName::UwGfdmAll);
        cfg.uw_placement = placement;
        cfg.uw_sequence = nonzero_uw(16);
        let link = Link64::new(cfg).unwrap();
        let mut rng = RngStream::new(8, 1).generator();
        let bits = random_bits(&mut rng, link.bits_per_block());
        let frame = link.transmit(&bits).unwrap();
        let ch =
            sample_channel::<f64, _>(&PowerDelayProfile::wran(), 16, 256, 0.0, &mut rng).unwrap();
        let rx = apply_channel(&link.channel_input(&frame), &ch, &mut rng);
        let out = link.receive(&rx, &ch).unwrap();
        assert_eq!(out.bits, bits);
        let sent = uwgfdm::modem::map_bits::<f64>(&bits, 2).unwrap();
        let worst = sent
            .iter()
            .zip(&out.estimates)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst}");
    }
}

#[test]
fn uw_only_transmission_cancels() {
    let mut cfg = system_config(SystemName::UwGfdmAll);
    cfg.uw_sequence = nonzero_uw(16);
    let link = Link64::new(cfg).unwrap();
    let zeros = vec![Complex::new(0.0, 0.0); link.coder.data_symbols()];
    let frame = link.transmit_symbols(&zeros).unwrap();
    let natural = link.coder.unrotate(&frame[..256]);
    let grid = link
        .mods
        .demodulate(&uwgfdm::numerics::ComplexVector::new(natural).unwrap())
        .unwrap();
    let raw = ReceivedGrid {
        raw: grid,
        data_estimates: Vec::new(),
    };
    let cleaned = subtract_uw(&raw, &link.coder).unwrap();
    assert!(cleaned.raw.to_real_stacked().amax() < 1e-8);
}

#[test]
fn zero_uw_subtraction_is_identity() {
    let link = Link64::new(system_config(SystemName::UwGfdmFirst)).unwrap();
    let mut rng = RngStream::new(2, 2).generator();
    let v = DVector::from_fn(512, |_, _| rng.random::<f64>());
    let grid = uwgfdm::modem::SymbolGrid::from_real_stacked(64, 4, &v).unwrap();
    let raw = ReceivedGrid {
        raw: grid.clone(),
        data_estimates: Vec::new(),
    };
    assert_eq!(subtract_uw(&raw, &link.coder).unwrap().raw, grid);
}

/// Wiener smoothing against the pseudo-inverse at σ_n² = 0.1 per rail.
#[test]
fn smoothing_beats_pseudo_inverse() {
    for name in [SystemName::UwGfdmAll, SystemName::UwOfdm] {
        let link = Link64::new(system_config(name)).unwrap();
        let coder = &link.coder;
        let wiener = WienerSmoother::build(coder, 0.1, 0.5).unwrap();
        let pinv = WienerSmoother::build(coder, 0.0, 0.5).unwrap();
        let mut rng = RngStream::new(30, name as u64).generator();
        let (mut e_w, mut e_p) = (0.0, 0.0);
        for _ in 0..300 {
            let bits = random_bits(&mut rng, link.bits_per_block());
            let d = coder
                .stack_symbols(&uwgfdm::modem::map_bits::<f64>(&bits, 2).unwrap())
                .unwrap();
            let c = coder.encode_real(&d).unwrap();
            let noisy = &c + DVector::from_fn(c.len(), |_, _| 0.1f64.sqrt() * gaussian(&mut rng));
            let grid =
                uwgfdm::modem::SymbolGrid::from_real_stacked(64, link.config.subsymbols, &noisy)
                    .unwrap();
            let raw = ReceivedGrid {
                raw: grid,
                data_estimates: Vec::new(),
            };
            let w = coder
                .stack_symbols(&smooth(&raw, coder, &wiener).unwrap().data_estimates)
                .unwrap();
            let p = coder
                .stack_symbols(&smooth(&raw, coder, &pinv).unwrap().data_estimates)
                .unwrap();
            e_w += (w - &d).norm_squared();
            e_p += (p - &d).norm_squared();
        }
        assert!(e_w <= e_p, "{name}: {e_w} > {e_p}");
    }
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(rand_distr::StandardNormal)
}

#[test]
fn qr_identity_at_vanishing_noise() {
    let link = Link64::new(system_config(SystemName::UwGfdmAll)).unwrap();
    let q = WienerSmoother::build(&link.coder, 1e-12, 0.5).unwrap().q;
    let qr = q * &link.coder.r;
    let dev = (qr - nalgebra::DMatrix::identity(384, 384)).amax();
    assert!(dev < 1e-8, "{dev}");
}

#[test]
fn frame_accounting() {
    let first = Link64::new(system_config(SystemName::UwGfdmFirst))
        .unwrap()
        .budget();
    assert_eq!(first.data_symbols, 240);
    assert_eq!(first.samples, 272);
    let all = Link64::new(system_config(SystemName::UwGfdmAll))
        .unwrap()
        .budget();
    assert_eq!(all.data_symbols, 192);
    let cp = Link64::new(system_config(SystemName::CpOfdm))
        .unwrap()
        .budget();
    assert_eq!((cp.data_symbols, cp.samples), (64, 80));
    assert!((cp.energy - 80.0).abs() < 1e-9);
    let cpg = Link64::new(system_config(SystemName::CpGfdm))
        .unwrap()
        .budget();
    assert_eq!((cpg.data_symbols, cpg.samples), (256, 272));
}

#[test]
fn coloured_mode_runs_noiselessly() {
    let mut cfg = preset("uw-gfdm-all").unwrap().config;
    cfg.noise_model = NoiseModel::Colored;
    let link = Link64::new(cfg).unwrap();
    let mut rng = RngStream::new(3, 3).generator();
    let pdp = ChannelModel::wran();
    assert_eq!(link.run_block(&pdp, 0.0, &mut rng).unwrap().bit_errors, 0);
    let s2 = link.noise_sigma2(40.0).unwrap();
    assert_eq!(link.run_block(&pdp, s2, &mut rng).unwrap().bit_errors, 0);
}

#[test]
fn single_precision_chain() {
    for name in [SystemName::UwGfdmFirst, SystemName::CpOfdm] {
        let link = Link32::new(system_config(name)).unwrap();
        let mut rng = RngStream::new(4, 4).generator();
        let ch = ChannelRealization::<f32>::identity(link.config.block_len(), 0.0).unwrap();
        let bits = random_bits(&mut rng, link.bits_per_block());
        let frame = link.transmit(&bits).unwrap();
        let rx = apply_channel(&link.channel_input(&frame), &ch, &mut rng);
        assert_eq!(link.receive(&rx, &ch).unwrap().bits, bits);
    }
}

#[test]
fn cp_ofdm_awgn_matches_q_function() {
    let link = Link64::new(system_config(SystemName::CpOfdm)).unwrap();
    let ebn0_db = 4.0;
    let s2 = link.noise_sigma2(ebn0_db).unwrap();
    let ch = ChannelRealization::identity(64, s2).unwrap();
    let mut rng = RngStream::new(77, 0).generator();
    let blocks = 3000;
    let mut errors = 0;
    for _ in 0..blocks {
        let bits = random_bits(&mut rng, link.bits_per_block());
        let frame = link.transmit(&bits).unwrap();
        let rx = apply_channel(&link.channel_input(&frame), &ch, &mut rng);
        let out = link.receive(&rx, &ch).unwrap();
        errors += bits.iter().zip(&out.bits).filter(|(a, b)| a != b).count();
    }
    let total = (blocks * 128) as f64;
    let ber = errors as f64 / total;
    // Q(√(2·Eb/N0·K/(K+L))): the cyclic prefix energy is charged to the data.
    let snr = 2.0 * 10f64.powf(ebn0_db / 10.0) * 64.0 / 80.0;
    let expected = 0.5 * statrs::function::erf::erfc((snr / 2.0).sqrt());
    let sigma = (expected * (1.0 - expected) / total).sqrt();
    assert!((ber - expected).abs() < 3.0 * sigma, "{ber} vs {expected}");
}
