//! System parameters shared by every stage of the chain.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::pulse::PulseShape;

/// Waveform family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    UwGfdm,
    CpGfdm,
    UwOfdm,
    CpOfdm,
}

impl Variant {
    pub fn guard(self) -> GuardKind {
        match self {
            Variant::UwGfdm | Variant::UwOfdm => GuardKind::Uw,
            Variant::CpGfdm | Variant::CpOfdm => GuardKind::Cp,
        }
    }

    pub fn is_ofdm(self) -> bool {
        matches!(self, Variant::UwOfdm | Variant::CpOfdm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GuardKind {
    Cp,
    Uw,
}

/// Which sub-symbols carry a unique word (and therefore redundant subcarriers).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UwPlacement {
    FirstOnly,
    All,
    /// Explicit sub-symbol indices. Must contain 0: the unique word of
    /// sub-symbol 0 doubles as the guard for the following block.
    Explicit(Vec<usize>),
}

/// Matrix the redundant subcarriers are solved against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodingScope {
    /// Full block modulation matrix. The tail is exactly zero.
    Block,
    /// Only the diagonal K×K block of each coded sub-symbol. Ignores the
    /// prototype's leakage into neighbouring sub-symbols.
    SubSymbol,
}

/// Noise statistics assumed by the Wiener smoother.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseModel {
    /// White noise with the block-average post-equalizer variance.
    White,
    /// Per-coefficient variances after zero-forcing (diagonal approximation
    /// of the coloured covariance).
    Colored,
}

/// How redundant subcarrier indices are chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RedundantPlacement {
    /// Last index of each of `N_r` equal segments of the active subcarriers.
    Default,
    /// Greedy swaps starting from `Default`, minimizing redundant energy.
    Search,
    Explicit(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameConfig {
    /// Subcarriers per sub-symbol (K).
    pub subcarriers: usize,
    /// Sub-symbols per block (M).
    pub subsymbols: usize,
    /// Data subcarriers per coded sub-symbol (N_d).
    pub data_subcarriers: usize,
    /// Redundant subcarriers per coded sub-symbol (N_r).
    pub redundant_subcarriers: usize,
    /// Unique word or cyclic prefix length in samples (L).
    pub guard_len: usize,
    /// Bits per complex QAM symbol (μ).
    pub bits_per_symbol: usize,
    /// Prototype roll-off; ignored by the OFDM variants.
    pub alpha: f64,
    pub variant: Variant,
    pub uw_placement: UwPlacement,
    /// Known guard sequence; empty means all-zero.
    pub uw_sequence: Vec<Complex64>,
    /// Deactivated subcarriers, identical in every sub-symbol.
    pub null_subcarriers: Vec<usize>,
    /// Start of the unique-word slot relative to the sub-symbol start.
    pub slot_offset: usize,
    pub coding_scope: CodingScope,
    pub redundant_placement: RedundantPlacement,
    pub noise_model: NoiseModel,
}

impl FrameConfig {
    /// Slot start centred between the in-phase and quadrature pulse peaks.
    pub fn default_slot_offset(subcarriers: usize, guard_len: usize) -> usize {
        (subcarriers / 2).saturating_sub(guard_len) / 2
    }

    pub fn block_len(&self) -> usize {
        self.subcarriers * self.subsymbols
    }

    /// Transmitted samples per block including the guard.
    pub fn frame_len(&self) -> usize {
        self.block_len() + self.guard_len
    }

    pub fn guard(&self) -> GuardKind {
        self.variant.guard()
    }

    pub fn pulse_shape(&self) -> PulseShape {
        if self.variant.is_ofdm() {
            PulseShape::Rectangular
        } else {
            PulseShape::RrcMeyer { alpha: self.alpha }
        }
    }

    pub fn active_subcarriers(&self) -> Vec<usize> {
        (0..self.subcarriers)
            .filter(|k| !self.null_subcarriers.contains(k))
            .collect()
    }

    /// Sorted sub-symbols carrying a unique word; empty for CP variants.
    pub fn coded_subsymbols(&self) -> Vec<usize> {
        if self.guard() == GuardKind::Cp {
            return Vec::new();
        }
        match &self.uw_placement {
            UwPlacement::FirstOnly => vec![0],
            UwPlacement::All => (0..self.subsymbols).collect(),
            UwPlacement::Explicit(set) => {
                let mut v = set.clone();
                v.sort_unstable();
                v.dedup();
                v
            }
        }
    }

    /// Complex data symbols carried per block.
    pub fn data_symbols_per_block(&self) -> usize {
        let active = self.active_subcarriers().len();
        let coded = self.coded_subsymbols().len();
        coded * self.data_subcarriers + (self.subsymbols - coded) * active
    }

    pub fn data_bits_per_block(&self) -> usize {
        self.data_symbols_per_block() * self.bits_per_symbol
    }

    /// Unique word as given, or zeros when unset.
    pub fn uw_samples(&self) -> Vec<Complex64> {
        if self.uw_sequence.is_empty() {
            vec![Complex64::new(0.0, 0.0); self.guard_len]
        } else {
            self.uw_sequence.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.subcarriers;
        if k < 2 || !k.is_multiple_of(2) {
            return Err(invalid(format!("K = {k} must be even and at least 2")));
        }
        if self.subsymbols == 0 {
            return Err(invalid("M must be positive"));
        }
        let mu = self.bits_per_symbol;
        if mu == 0 || !mu.is_multiple_of(2) || mu > 16 {
            return Err(invalid(format!("mu = {mu} must be even, between 2 and 16")));
        }
        let mut nulls = self.null_subcarriers.clone();
        nulls.sort_unstable();
        nulls.dedup();
        if nulls.len() != self.null_subcarriers.len() || nulls.iter().any(|&n| n >= k) {
            return Err(invalid("null subcarriers must be distinct indices below K"));
        }
        if self.data_subcarriers + self.redundant_subcarriers + nulls.len() != k {
            return Err(invalid(format!(
                "N_d ({}) + N_r ({}) + nulls ({}) must equal K ({k})",
                self.data_subcarriers,
                self.redundant_subcarriers,
                nulls.len()
            )));
        }
        if self.guard_len > self.block_len() {
            return Err(invalid("guard longer than the block"));
        }
        if self.variant.is_ofdm() {
            if self.subsymbols != 1 {
                return Err(invalid("OFDM variants use one sub-symbol per block"));
            }
        } else if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(invalid(format!("roll-off {} outside (0, 1]", self.alpha)));
        }
        match self.guard() {
            GuardKind::Cp => {
                if self.redundant_subcarriers != 0 {
                    return Err(invalid("CP variants carry no redundant subcarriers"));
                }
            }
            GuardKind::Uw => self.validate_uw()?,
        }
        Ok(())
    }

    fn validate_uw(&self) -> Result<()> {
        let (k, l) = (self.subcarriers, self.guard_len);
        if self.redundant_subcarriers == 0 {
            return Err(invalid("UW variants need redundant subcarriers"));
        }
        if l != self.redundant_subcarriers {
            return Err(invalid(format!(
                "UW length L = {l} must equal N_r = {}",
                self.redundant_subcarriers
            )));
        }
        if l > k {
            return Err(invalid("UW longer than a sub-symbol"));
        }
        if !self.uw_sequence.is_empty() && self.uw_sequence.len() != l {
            return Err(invalid(format!(
                "UW sequence has {} samples, expected {l}",
                self.uw_sequence.len()
            )));
        }
        if self
            .uw_sequence
            .iter()
            .any(|s| !s.re.is_finite() || !s.im.is_finite())
        {
            return Err(invalid("UW sequence contains non-finite samples"));
        }
        if let UwPlacement::Explicit(set) = &self.uw_placement {
            if !set.contains(&0) {
                return Err(invalid("explicit UW placement must include sub-symbol 0"));
            }
            if set.iter().any(|&m| m >= self.subsymbols) {
                return Err(invalid("UW placement index beyond M"));
            }
        }
        if self.coding_scope == CodingScope::SubSymbol && self.slot_offset % k + l > k {
            return Err(invalid(
                "sub-symbol coding needs the UW slot inside its sub-symbol",
            ));
        }
        if let RedundantPlacement::Explicit(idx) = &self.redundant_placement {
            let mut v = idx.clone();
            v.sort_unstable();
            v.dedup();
            if v.len() != self.redundant_subcarriers
                || v.iter()
                    .any(|&i| i >= k || self.null_subcarriers.contains(&i))
            {
                return Err(invalid(format!(
                    "redundant indices must be {} distinct active subcarriers",
                    self.redundant_subcarriers
                )));
            }
        }
        Ok(())
    }
}
