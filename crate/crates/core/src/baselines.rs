//! Named presets for the compared systems. All share one chain and differ
//! only in guard type, redundancy, sub-symbol count and prototype.

use std::fmt;
use std::str::FromStr;

use crate::config::{
    CodingScope, FrameConfig, NoiseModel, RedundantPlacement, UwPlacement, Variant,
};
use crate::error::{invalid, Error, Result};

/// Default prototype roll-off.
pub const DEFAULT_ALPHA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemName {
    /// Unique word in sub-symbol 0 only.
    UwGfdmFirst,
    UwGfdmAll,
    CpGfdm,
    UwOfdm,
    CpOfdm,
}

impl SystemName {
    pub const ALL: [SystemName; 5] = [
        SystemName::UwGfdmFirst,
        SystemName::UwGfdmAll,
        SystemName::CpGfdm,
        SystemName::UwOfdm,
        SystemName::CpOfdm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SystemName::UwGfdmFirst => "uw-gfdm",
            SystemName::UwGfdmAll => "uw-gfdm-all",
            SystemName::CpGfdm => "cp-gfdm",
            SystemName::UwOfdm => "uw-ofdm",
            SystemName::CpOfdm => "cp-ofdm",
        }
    }
}

impl fmt::Display for SystemName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SystemName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uw-gfdm" | "uw-gfdm-first" => Ok(SystemName::UwGfdmFirst),
            "uw-gfdm-all" => Ok(SystemName::UwGfdmAll),
            "cp-gfdm" => Ok(SystemName::CpGfdm),
            "uw-ofdm" => Ok(SystemName::UwOfdm),
            "cp-ofdm" => Ok(SystemName::CpOfdm),
            other => Err(invalid(format!(
                "unknown system '{other}' (expected uw-gfdm, uw-gfdm-all, cp-gfdm, uw-ofdm or cp-ofdm)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemPreset {
    pub name: SystemName,
    pub config: FrameConfig,
}

/// K = 64, L = 16, QPSK; GFDM with M = 4, OFDM with one DFT symbol per block.
pub fn system_config(name: SystemName) -> FrameConfig {
    let (variant, m, n_r, placement) = match name {
        SystemName::UwGfdmFirst => (Variant::UwGfdm, 4, 16, UwPlacement::FirstOnly),
        SystemName::UwGfdmAll => (Variant::UwGfdm, 4, 16, UwPlacement::All),
        SystemName::CpGfdm => (Variant::CpGfdm, 4, 0, UwPlacement::FirstOnly),
        SystemName::UwOfdm => (Variant::UwOfdm, 1, 16, UwPlacement::All),
        SystemName::CpOfdm => (Variant::CpOfdm, 1, 0, UwPlacement::FirstOnly),
    };
    let (k, l) = (64, 16);
    FrameConfig {
        subcarriers: k,
        subsymbols: m,
        data_subcarriers: k - n_r,
        redundant_subcarriers: n_r,
        guard_len: l,
        bits_per_symbol: 2,
        alpha: DEFAULT_ALPHA,
        variant,
        uw_placement: placement,
        uw_sequence: Vec::new(),
        null_subcarriers: Vec::new(),
        slot_offset: FrameConfig::default_slot_offset(k, l),
        coding_scope: CodingScope::Block,
        redundant_placement: RedundantPlacement::Default,
        noise_model: NoiseModel::White,
    }
}

pub fn preset(name: &str) -> Result<SystemPreset> {
    let name: SystemName = name.parse()?;
    Ok(SystemPreset {
        name,
        config: system_config(name),
    })
}
