//! Half-Nyquist prototype filter: root raised cosine whose roll-off is
//! shaped by the Meyer auxiliary polynomial, sampled on the block's DFT grid.

use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::numerics::inverse_dft;
use crate::scalar::Real;

/// `x⁴(35 − 84x + 70x² − 20x³)` on `[0, 1]`.
pub fn meyer_aux<T: Real>(x: T) -> Result<T> {
    if !(x >= T::zero() && x <= T::one()) {
        return Err(invalid(format!("Meyer argument {x:?} outside [0, 1]")));
    }
    let c = T::lit;
    let x2 = x * x;
    Ok(x2 * x2 * (c(35.0) - c(84.0) * x + c(70.0) * x2 - c(20.0) * x2 * x))
}

/// Magnitude `sqrt(½(1 − cos(π·f(t))))` at normalized transition position
/// `t ∈ [0, 1]` (0 at the stopband edge, 1 at the passband edge).
pub fn transition_response<T: Real>(t: T) -> Result<T> {
    let f = meyer_aux(t)?;
    Ok((T::lit(0.5) * (T::one() - (T::pi() * f).cos())).sqrt())
}

/// RRC magnitude at signed `bin` offset from a subcarrier centre, with
/// subcarriers `spacing` bins apart.
///
/// The response is flat for `|bin| ≤ (1−α)·spacing/2`, zero for
/// `|bin| ≥ (1+α)·spacing/2`, and follows [`transition_response`] across the
/// `α·spacing`-wide roll-off in between, centred on the half-spacing point.
pub fn rrc_frequency_response<T: Real>(bin: i64, spacing: usize, alpha: T) -> Result<T> {
    if spacing == 0 {
        return Err(invalid("subcarrier spacing must be at least one bin"));
    }
    check_alpha(alpha)?;
    let s = T::from_usize_lossy(spacing);
    let half = T::lit(0.5);
    let f = T::lit(bin.unsigned_abs() as f64);
    let pass_edge = (T::one() - alpha) * s * half;
    let stop_edge = (T::one() + alpha) * s * half;
    if f <= pass_edge {
        Ok(T::one())
    } else if f >= stop_edge {
        Ok(T::zero())
    } else {
        let t = (stop_edge - f) / (alpha * s);
        transition_response(t.clamp(T::zero(), T::one()))
    }
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if alpha > T::zero() && alpha <= T::one() {
        Ok(())
    } else {
        Err(invalid(format!("roll-off {alpha:?} outside (0, 1]")))
    }
}

/// Prototype family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseShape {
    /// Meyer-RRC with roll-off `alpha ∈ (0, 1]`.
    RrcMeyer { alpha: f64 },
    /// Single frequency bin, i.e. constant in time. Only meaningful with one
    /// sub-symbol, where it turns the chain into plain OFDM.
    Rectangular,
}

impl PulseShape {
    pub fn alpha(&self) -> Option<f64> {
        match self {
            PulseShape::RrcMeyer { alpha } => Some(*alpha),
            PulseShape::Rectangular => None,
        }
    }
}

/// Real, zero-phase, unit-energy prototype `g[n]` of length `N = K·M`.
#[derive(Debug, Clone)]
pub struct PrototypeFilter<T: Real> {
    pub time_samples: Vec<T>,
    /// Sampled magnitude response on the `N` DFT bins, before normalization.
    pub frequency_response: Vec<T>,
    pub shape: PulseShape,
    pub subcarriers: usize,
    pub subsymbols: usize,
    /// Largest imaginary part discarded after the inverse transform.
    pub imag_residue: f64,
}

impl<T: Real> PrototypeFilter<T> {
    pub fn len(&self) -> usize {
        self.time_samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time_samples.is_empty()
    }

    pub fn energy(&self) -> T {
        self.time_samples.iter().fold(T::zero(), |a, &g| a + g * g)
    }

    /// Number of bins where the response is exactly one.
    pub fn flat_bins(&self) -> usize {
        self.frequency_response
            .iter()
            .filter(|&&g| g == T::one())
            .count()
    }

    /// Largest deviation of `Σ_l G²[b + l·M]` from its mean over `b`; zero for
    /// an exact half-Nyquist design.
    pub fn half_nyquist_deviation(&self) -> f64 {
        let m = self.subsymbols;
        let n = self.frequency_response.len();
        let sums: Vec<f64> = (0..m)
            .map(|r| {
                (r..n)
                    .step_by(m)
                    .map(|b| self.frequency_response[b].to_f64_lossy().powi(2))
                    .sum()
            })
            .collect();
        let mean = sums.iter().sum::<f64>() / m as f64;
        sums.iter().map(|s| (s - mean).abs()).fold(0.0, f64::max)
    }
}

/// Samples the response on `N = K·M` bins, inverse-transforms it and
/// normalizes to unit energy.
pub fn build_prototype<T: Real>(
    subcarriers: usize,
    subsymbols: usize,
    shape: PulseShape,
) -> Result<PrototypeFilter<T>> {
    if subcarriers < 2 || !subcarriers.is_multiple_of(2) {
        return Err(invalid(format!(
            "subcarrier count {subcarriers} must be even (half-symbol offset K/2)"
        )));
    }
    if subsymbols == 0 {
        return Err(invalid("sub-symbol count must be positive"));
    }
    let n = subcarriers * subsymbols;
    let response: Vec<T> = match shape {
        PulseShape::RrcMeyer { alpha } => {
            let a = T::lit(alpha);
            check_alpha(a)?;
            (0..n)
                .map(|b| {
                    let signed = if b <= n / 2 {
                        b as i64
                    } else {
                        b as i64 - n as i64
                    };
                    rrc_frequency_response(signed, subsymbols, a)
                })
                .collect::<Result<_>>()?
        }
        PulseShape::Rectangular => {
            if subsymbols != 1 {
                return Err(invalid(
                    "rectangular prototype requires a single sub-symbol",
                ));
            }
            (0..n)
                .map(|b| if b == 0 { T::one() } else { T::zero() })
                .collect()
        }
    };
    let spectrum: Vec<Complex<T>> = response
        .iter()
        .map(|&g| Complex::new(g, T::zero()))
        .collect();
    let time = inverse_dft(&spectrum, n)?;
    let imag_residue = time
        .iter()
        .map(|s| s.im.abs().to_f64_lossy())
        .fold(0.0, f64::max);
    let energy = time.iter().fold(T::zero(), |a, s| a + s.re * s.re);
    let scale = T::one() / energy.sqrt();
    Ok(PrototypeFilter {
        time_samples: time.iter().map(|s| s.re * scale).collect(),
        frequency_response: response,
        shape,
        subcarriers,
        subsymbols,
        imag_residue,
    })
}

/// Convenience for `f64` callers holding a roll-off value.
pub fn build_rrc_prototype(
    subcarriers: usize,
    subsymbols: usize,
    alpha: f64,
) -> Result<PrototypeFilter<f64>> {
    build_prototype(subcarriers, subsymbols, PulseShape::RrcMeyer { alpha })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meyer_endpoints_and_midpoint() {
        assert_eq!(meyer_aux(0.0f64).unwrap(), 0.0);
        assert!((meyer_aux(1.0f64).unwrap() - 1.0).abs() < 1e-15);
        assert!((meyer_aux(0.5f64).unwrap() - 0.5).abs() < 1e-15);
        assert!(meyer_aux(-0.01f64).is_err());
        assert!(meyer_aux(1.01f64).is_err());
        assert!(meyer_aux(f64::NAN).is_err());
    }

    #[test]
    fn meyer_symmetry_and_monotone() {
        let mut prev = 0.0;
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            let f = meyer_aux(x).unwrap();
            assert!((f + meyer_aux(1.0 - x).unwrap() - 1.0).abs() < 1e-12);
            assert!(f >= prev - 1e-15);
            prev = f;
        }
    }

    #[test]
    fn transition_values() {
        assert_eq!(transition_response(0.0f64).unwrap(), 0.0);
        assert!((transition_response(1.0f64).unwrap() - 1.0).abs() < 1e-15);
        assert!((transition_response(0.5f64).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn response_is_even_and_bounded() {
        for spacing in [1usize, 4, 16] {
            for alpha in [0.1, 0.5, 1.0] {
                for b in 0..3 * spacing as i64 {
                    let p = rrc_frequency_response(b, spacing, alpha).unwrap();
                    assert_eq!(p, rrc_frequency_response(-b, spacing, alpha).unwrap());
                    assert!((0.0..=1.0).contains(&p));
                }
            }
        }
        assert!(rrc_frequency_response(0, 4, 0.0).is_err());
        assert!(rrc_frequency_response(0, 0, 0.5).is_err());
    }

    #[test]
    fn table_one_prototype() {
        let g = build_rrc_prototype(64, 4, 0.5).unwrap();
        assert_eq!(g.len(), 256);
        assert!((g.energy() - 1.0).abs() < 1e-12);
        assert!(g.imag_residue < 1e-10);
        assert!(g.half_nyquist_deviation() < 1e-10);
    }

    #[test]
    fn rolloff_controls_flat_region() {
        // On a 4-bin subcarrier grid both roll-offs sample identically.
        let narrow = build_rrc_prototype(64, 4, 0.1).unwrap();
        let wide = build_rrc_prototype(64, 4, 0.5).unwrap();
        assert_eq!(narrow.flat_bins(), wide.flat_bins());
        let narrow = build_rrc_prototype(64, 16, 0.1).unwrap();
        let wide = build_rrc_prototype(64, 16, 0.5).unwrap();
        assert!(narrow.flat_bins() > wide.flat_bins());
    }

    #[test]
    fn half_nyquist_across_configs() {
        for (k, m, a) in [
            (8, 2, 0.5),
            (8, 4, 1.0),
            (16, 5, 0.3),
            (64, 4, 0.1),
            (64, 7, 0.9),
        ] {
            let g = build_rrc_prototype(k, m, a).unwrap();
            assert!(g.half_nyquist_deviation() < 1e-10, "{k} {m} {a}");
            assert!((g.energy() - 1.0).abs() < 1e-12);
            assert!(g.imag_residue < 1e-10);
        }
    }

    #[test]
    fn rectangular_is_constant() {
        let g = build_prototype::<f64>(64, 1, PulseShape::Rectangular).unwrap();
        assert!(g.time_samples.iter().all(|&s| (s - 0.125).abs() < 1e-14));
        assert!(build_prototype::<f64>(64, 4, PulseShape::Rectangular).is_err());
    }

    #[test]
    fn odd_subcarriers_rejected() {
        assert!(build_rrc_prototype(63, 4, 0.5).is_err());
        assert!(build_rrc_prototype(64, 0, 0.5).is_err());
    }

    #[test]
    fn single_precision_builds() {
        let g = build_prototype::<f32>(64, 4, PulseShape::RrcMeyer { alpha: 0.5 }).unwrap();
        assert!((g.energy() - 1.0).abs() < 1e-5);
    }
}
