//! Scenario files: line-oriented `key = value` pairs, `#` comments, global
//! keys first (or under `[scenario]`), then one `[label]` section per system.
//!
//! ```text
//! seed = 7
//! ebn0_db = 10:2:30        # start:step:stop, or a comma list
//! channel = wran
//!
//! [uw-gfdm-all]
//! alpha = 0.1
//! noise_model = colored
//! ```

use std::path::Path;

use num_complex::Complex64;
use uwgfdm::baselines::preset;
use uwgfdm::channel::{ChannelModel, PowerDelayProfile};
use uwgfdm::{CodingScope, FrameConfig, NoiseModel, RedundantPlacement, UwPlacement, Variant};

use crate::error::{SimError, SimResult};

/// One system under test.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub label: String,
    pub config: FrameConfig,
}

impl SystemSpec {
    pub fn from_preset(name: &str) -> SimResult<Self> {
        let p = preset(name).map_err(|e| SimError::Usage(e.to_string()))?;
        Ok(Self {
            label: p.name.to_string(),
            config: p.config,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub systems: Vec<SystemSpec>,
    pub channel: ChannelModel,
    pub ebn0_grid_db: Vec<f64>,
    /// Stop a point once this many bit errors are counted.
    pub min_bit_errors: u64,
    /// Hard cap on blocks per point.
    pub max_blocks: u64,
    pub seed: u64,
    /// Blocks simulated between stopping checks.
    pub batch_blocks: usize,
    pub oob_active_fraction: f64,
    pub oob_blocks: usize,
    pub oob_segment: usize,
    pub papr_blocks: usize,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            systems: ["uw-gfdm", "uw-gfdm-all", "cp-gfdm", "uw-ofdm", "cp-ofdm"]
                .iter()
                .map(|n| SystemSpec::from_preset(n).expect("built-in preset"))
                .collect(),
            channel: ChannelModel::wran(),
            ebn0_grid_db: (0..=12).map(|i| 2.5 * i as f64).collect(),
            min_bit_errors: 500,
            max_blocks: 20_000,
            seed: 1,
            batch_blocks: 64,
            oob_active_fraction: 0.75,
            oob_blocks: 200,
            oob_segment: 1024,
            papr_blocks: 10_000,
        }
    }
}

struct Entry {
    line: usize,
    key: String,
    value: String,
}

struct Section {
    line: usize,
    label: String,
    entries: Vec<Entry>,
}

impl Scenario {
    pub fn from_file(path: &Path) -> SimResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> SimResult<Self> {
        let err = |line: usize, message: String| SimError::Config {
            origin: origin.to_string(),
            line,
            message,
        };
        let mut globals = Vec::new();
        let mut sections: Vec<Section> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let label = rest
                    .strip_suffix(']')
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .ok_or_else(|| err(line, format!("malformed section header '{content}'")))?;
                if label != "scenario" && sections.iter().any(|s| s.label == label) {
                    return Err(err(line, format!("duplicate section '{label}'")));
                }
                sections.push(Section {
                    line,
                    label: label.to_string(),
                    entries: Vec::new(),
                });
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .filter(|(k, _)| !k.is_empty())
                .ok_or_else(|| err(line, format!("expected 'key = value', found '{content}'")))?;
            let entry = Entry { line, key, value };
            match sections.last_mut() {
                Some(s) if s.label != "scenario" => s.entries.push(entry),
                _ => globals.push(entry),
            }
        }

        let mut sc = Scenario::default();
        let mut channel: Option<(usize, String)> = None;
        let (mut delays, mut powers, mut period) = (None, None, None);
        for e in &globals {
            let bad = |m: String| err(e.line, m);
            match e.key.as_str() {
                "seed" => sc.seed = parse_num(&e.value).map_err(bad)?,
                "ebn0_db" => sc.ebn0_grid_db = parse_grid(&e.value).map_err(bad)?,
                "min_bit_errors" => sc.min_bit_errors = parse_num(&e.value).map_err(bad)?,
                "max_blocks" => sc.max_blocks = parse_num(&e.value).map_err(bad)?,
                "batch_blocks" => sc.batch_blocks = parse_num(&e.value).map_err(bad)?,
                "oob_active_fraction" => {
                    sc.oob_active_fraction = parse_num(&e.value).map_err(bad)?
                }
                "oob_blocks" => sc.oob_blocks = parse_num(&e.value).map_err(bad)?,
                "oob_segment" => sc.oob_segment = parse_num(&e.value).map_err(bad)?,
                "papr_blocks" => sc.papr_blocks = parse_num(&e.value).map_err(bad)?,
                "channel" => channel = Some((e.line, e.value.to_ascii_lowercase())),
                "pdp_delays_us" => {
                    delays = Some((e.line, parse_list::<f64>(&e.value).map_err(bad)?))
                }
                "pdp_powers_db" => {
                    powers = Some((e.line, parse_list::<f64>(&e.value).map_err(bad)?))
                }
                "sample_period_us" => {
                    period = Some((e.line, parse_num::<f64>(&e.value).map_err(bad)?))
                }
                other => return Err(bad(format!("unknown scenario key '{other}'"))),
            }
        }
        if let Some((line, ch)) = channel {
            sc.channel = match ch.as_str() {
                "wran" => ChannelModel::wran(),
                "flat" | "rayleigh" => ChannelModel::Fading(PowerDelayProfile::flat()),
                "awgn" => ChannelModel::Awgn,
                other => {
                    return Err(err(
                        line,
                        format!("unknown channel '{other}' (wran, flat, awgn)"),
                    ))
                }
            };
        }
        if delays.is_some() || powers.is_some() || period.is_some() {
            let line = [
                delays.as_ref().map(|d| d.0),
                powers.as_ref().map(|p| p.0),
                period.map(|p| p.0),
            ]
            .into_iter()
            .flatten()
            .min()
            .unwrap_or(1);
            let base = match &sc.channel {
                ChannelModel::Fading(pdp) => pdp.clone(),
                ChannelModel::Awgn => {
                    return Err(err(line, "delay profile given for an awgn channel".into()))
                }
            };
            let d = delays.map(|d| d.1).unwrap_or(base.delays_us);
            let p = powers.map(|p| p.1).unwrap_or(base.powers_db);
            let t = period.map(|p| p.1).unwrap_or(base.sample_period_us);
            sc.channel = ChannelModel::Fading(
                PowerDelayProfile::new(d, p, t).map_err(|e| err(line, e.to_string()))?,
            );
        }
        let first_line = globals.first().map(|e| e.line).unwrap_or(1);
        sc.validate().map_err(|m| err(first_line, m))?;

        let systems: Vec<&Section> = sections.iter().filter(|s| s.label != "scenario").collect();
        if !systems.is_empty() {
            sc.systems = systems
                .iter()
                .map(|s| parse_system(s, origin))
                .collect::<SimResult<_>>()?;
        }
        Ok(sc)
    }

    fn validate(&self) -> Result<(), String> {
        if self.ebn0_grid_db.is_empty() || self.ebn0_grid_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err("ebn0_db grid must be non-empty and strictly increasing".into());
        }
        if self.min_bit_errors == 0 || self.max_blocks == 0 || self.batch_blocks == 0 {
            return Err("min_bit_errors, max_blocks and batch_blocks must be positive".into());
        }
        if !(self.oob_active_fraction > 0.0 && self.oob_active_fraction <= 1.0) {
            return Err("oob_active_fraction must lie in (0, 1]".into());
        }
        if self.oob_blocks == 0 || self.oob_segment < 2 || self.papr_blocks == 0 {
            return Err("oob_blocks, oob_segment and papr_blocks must be positive".into());
        }
        Ok(())
    }

    /// Systems whose label matches one of `names`; unknown labels that name a
    /// preset are added with the preset configuration.
    pub fn select_systems(&mut self, names: &[String]) -> SimResult<()> {
        if names.is_empty() {
            return Ok(());
        }
        let mut picked = Vec::new();
        for name in names {
            match self.systems.iter().find(|s| &s.label == name) {
                Some(s) => picked.push(s.clone()),
                None => picked.push(SystemSpec::from_preset(name)?),
            }
        }
        self.systems = picked;
        Ok(())
    }
}

fn parse_system(section: &Section, origin: &str) -> SimResult<SystemSpec> {
    let err = |line: usize, message: String| SimError::Config {
        origin: origin.to_string(),
        line,
        message,
    };
    let base = section
        .entries
        .iter()
        .find(|e| e.key == "preset")
        .map(|e| (e.line, e.value.clone()))
        .unwrap_or((section.line, section.label.clone()));
    let mut cfg = preset(&base.1)
        .map_err(|e| err(base.0, e.to_string()))?
        .config;
    let mut touched_data = false;
    for e in &section.entries {
        let bad = |m: String| err(e.line, m);
        let v = e.value.as_str();
        match e.key.as_str() {
            "preset" => {}
            "subcarriers" | "K" => cfg.subcarriers = parse_num(v).map_err(bad)?,
            "subsymbols" | "M" => cfg.subsymbols = parse_num(v).map_err(bad)?,
            "data_subcarriers" | "N_d" => {
                cfg.data_subcarriers = parse_num(v).map_err(bad)?;
                touched_data = true;
            }
            "redundant_subcarriers" | "N_r" => {
                cfg.redundant_subcarriers = parse_num(v).map_err(bad)?
            }
            "guard_len" | "L" => cfg.guard_len = parse_num(v).map_err(bad)?,
            "bits_per_symbol" | "mu" => cfg.bits_per_symbol = parse_num(v).map_err(bad)?,
            "alpha" => cfg.alpha = parse_num(v).map_err(bad)?,
            "slot_offset" => cfg.slot_offset = parse_num(v).map_err(bad)?,
            "variant" => {
                cfg.variant = match v.to_ascii_lowercase().as_str() {
                    "uw-gfdm" => Variant::UwGfdm,
                    "cp-gfdm" => Variant::CpGfdm,
                    "uw-ofdm" => Variant::UwOfdm,
                    "cp-ofdm" => Variant::CpOfdm,
                    other => return Err(bad(format!("unknown variant '{other}'"))),
                }
            }
            "uw_placement" => {
                cfg.uw_placement = match v.to_ascii_lowercase().as_str() {
                    "first" | "first-only" => UwPlacement::FirstOnly,
                    "all" => UwPlacement::All,
                    list => UwPlacement::Explicit(parse_list(list).map_err(bad)?),
                }
            }
            "uw_sequence" => cfg.uw_sequence = parse_complex_list(v).map_err(bad)?,
            "null_subcarriers" => cfg.null_subcarriers = parse_list(v).map_err(bad)?,
            "coding_scope" => {
                cfg.coding_scope = match v.to_ascii_lowercase().as_str() {
                    "block" => CodingScope::Block,
                    "subsymbol" | "sub-symbol" => CodingScope::SubSymbol,
                    other => return Err(bad(format!("unknown coding scope '{other}'"))),
                }
            }
            "redundant_placement" => {
                cfg.redundant_placement = match v.to_ascii_lowercase().as_str() {
                    "default" => RedundantPlacement::Default,
                    "search" => RedundantPlacement::Search,
                    list => RedundantPlacement::Explicit(parse_list(list).map_err(bad)?),
                }
            }
            "noise_model" => {
                cfg.noise_model = match v.to_ascii_lowercase().as_str() {
                    "white" => NoiseModel::White,
                    "colored" | "coloured" => NoiseModel::Colored,
                    other => return Err(bad(format!("unknown noise model '{other}'"))),
                }
            }
            other => return Err(bad(format!("unknown system key '{other}'"))),
        }
    }
    if !touched_data {
        cfg.data_subcarriers = cfg
            .subcarriers
            .saturating_sub(cfg.redundant_subcarriers + cfg.null_subcarriers.len());
    }
    cfg.validate()
        .map_err(|e| err(section.line, format!("system '{}': {e}", section.label)))?;
    Ok(SystemSpec {
        label: section.label.clone(),
        config: cfg,
    })
}

fn parse_num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.trim()
        .parse()
        .map_err(|_| format!("invalid number '{v}'"))
}

fn parse_list<T: std::str::FromStr>(v: &str) -> Result<Vec<T>, String> {
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(parse_num)
        .collect()
}

/// `start:step:stop` (inclusive) or a comma list.
fn parse_grid(v: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = v.split(':').collect();
    if parts.len() == 3 {
        let (a, s, b): (f64, f64, f64) = (
            parse_num(parts[0])?,
            parse_num(parts[1])?,
            parse_num(parts[2])?,
        );
        if !(s > 0.0) || b < a {
            return Err(format!("invalid range '{v}'"));
        }
        let n = ((b - a) / s + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| a + s * i as f64).collect());
    }
    parse_list(v)
}

/// Comma list of `re:im` pairs (a bare number is real).
fn parse_complex_list(v: &str) -> Result<Vec<Complex64>, String> {
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|tok| match tok.split_once(':') {
            Some((re, im)) => Ok(Complex64::new(parse_num(re)?, parse_num(im)?)),
            None => Ok(Complex64::new(parse_num(tok)?, 0.0)),
        })
        .collect()
}
