//! Unique-word coding: redundant subcarrier placement, the zero-tail solve,
//! the code generator `R` and transmit frame assembly.
//!
//! Coding runs on real-stacked coefficients: index `p` is the in-phase rail
//! of grid position `p = k + m·K` and `N + p` its quadrature rail. The
//! in-phase and quadrature redundant values are solved jointly, because a
//! complex tail sample depends on both rails.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::config::{CodingScope, FrameConfig, GuardKind, RedundantPlacement};
use crate::error::{invalid, Error, Result};
use crate::modem::{GfdmBlock, ModulationSet, SymbolGrid};
use crate::numerics::ComplexVector;
use crate::scalar::{cabs, scaled_tolerance, Real};

/// Condition number above which a redundant placement is rejected.
pub const MAX_CONDITION: f64 = 1e10;

/// Assignment of data, redundant and null roles to the K subcarriers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationSpec {
    pub subcarriers: usize,
    pub data_indices: Vec<usize>,
    pub redundant_indices: Vec<usize>,
    pub null_indices: Vec<usize>,
}

impl PermutationSpec {
    pub fn new(subcarriers: usize, redundant: &[usize], nulls: &[usize]) -> Result<Self> {
        let mut redundant_indices = redundant.to_vec();
        redundant_indices.sort_unstable();
        redundant_indices.dedup();
        let mut null_indices = nulls.to_vec();
        null_indices.sort_unstable();
        null_indices.dedup();
        if redundant_indices.len() != redundant.len() || null_indices.len() != nulls.len() {
            return Err(invalid("duplicate subcarrier index"));
        }
        if redundant_indices
            .iter()
            .chain(&null_indices)
            .any(|&i| i >= subcarriers)
            || redundant_indices.iter().any(|i| null_indices.contains(i))
        {
            return Err(invalid(
                "redundant and null indices must be distinct and below K",
            ));
        }
        let data_indices = (0..subcarriers)
            .filter(|k| !redundant_indices.contains(k) && !null_indices.contains(k))
            .collect();
        Ok(Self {
            subcarriers,
            data_indices,
            redundant_indices,
            null_indices,
        })
    }

    /// Subcarrier receiving entry `j` of the stacked `[d_d; d_r; 0]`.
    pub fn order(&self) -> Vec<usize> {
        self.data_indices
            .iter()
            .chain(&self.redundant_indices)
            .chain(&self.null_indices)
            .copied()
            .collect()
    }

    /// K×K permutation `P` with `(P·v)[order[j]] = v[j]`.
    pub fn matrix<T: Real>(&self) -> DMatrix<T> {
        let mut p = DMatrix::zeros(self.subcarriers, self.subcarriers);
        for (j, &k) in self.order().iter().enumerate() {
            p[(k, j)] = T::one();
        }
        p
    }
}

fn condition_number<T: Real>(m: &DMatrix<T>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().fold(T::zero(), |a, &s| a.max(s)).to_f64_lossy();
    let min = sv
        .iter()
        .fold(T::max_value().unwrap_or(T::one()), |a, &s| a.min(s))
        .to_f64_lossy();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `T = −M22⁻¹·M21` with the condition number of `M22`.
pub fn solve_redundant<T: Real>(m22: &DMatrix<T>, m21: &DMatrix<T>) -> Result<(DMatrix<T>, f64)> {
    if !m22.is_square() || m22.nrows() != m21.nrows() {
        return Err(invalid(format!(
            "M22 is {}x{}, M21 has {} rows",
            m22.nrows(),
            m22.ncols(),
            m21.nrows()
        )));
    }
    if m22.nrows() == 0 {
        return Ok((DMatrix::zeros(0, m21.ncols()), 1.0));
    }
    let cond = condition_number(m22);
    if cond.is_nan() || cond > MAX_CONDITION {
        return Err(Error::IllConditioned {
            cond,
            subsymbol: None,
        });
    }
    let t = m22.clone().lu().solve(m21).ok_or(Error::IllConditioned {
        cond: f64::INFINITY,
        subsymbol: None,
    })?;
    Ok((-t, cond))
}

/// Partitions an already permuted K×K block (data columns first) and solves
/// for the redundant columns that zero its last `tail_rows` rows.
pub fn compute_t<T: Real>(
    block: &DMatrix<T>,
    n_data: usize,
    tail_rows: usize,
) -> Result<(DMatrix<T>, f64)> {
    let (rows, cols) = block.shape();
    if n_data > cols || tail_rows > rows || cols - n_data != tail_rows {
        return Err(invalid(format!(
            "cannot split a {rows}x{cols} block into {n_data} data columns and a {tail_rows}-row tail"
        )));
    }
    let top = rows - tail_rows;
    let m21 = block.view((top, 0), (tail_rows, n_data)).into_owned();
    let m22 = block
        .view((top, n_data), (tail_rows, tail_rows))
        .into_owned();
    solve_redundant(&m22, &m21)
}

/// Expected energy and payload of one transmitted frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameBudget {
    /// Expected frame energy for unit-energy data symbols, guard included.
    pub energy: f64,
    pub data_symbols: usize,
    pub data_bits: usize,
    pub samples: usize,
}

/// Per-sub-symbol leakage figures for the block-diagonal approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageAudit {
    pub subsymbol: usize,
    /// Fraction of the sub-symbol's pulse energy outside its own K samples.
    pub off_block_energy: f64,
    /// RMS tail amplitude per unit-energy data symbol, before the UW is added.
    pub tail_rms: f64,
}

/// Linear map from data symbols to coded subcarrier coefficients, with the
/// framing needed to turn the result into a guarded transmit frame.
#[derive(Debug, Clone)]
pub struct UwCoder<T: Real> {
    subcarriers: usize,
    subsymbols: usize,
    guard_len: usize,
    guard: GuardKind,
    slot_offset: usize,
    pub scope: CodingScope,
    pub spec: PermutationSpec,
    pub coded_subsymbols: Vec<usize>,
    /// Grid positions carrying data symbols, in symbol order.
    data_positions: Vec<usize>,
    red_cols: Vec<usize>,
    /// Redundant coefficients per real data coefficient.
    pub t: DMatrix<T>,
    /// Real-stacked code generator, 2N × (2·data symbols).
    pub r: DMatrix<T>,
    /// `B·R`: real-stacked samples per real data coefficient.
    generator: DMatrix<T>,
    pub condition_numbers: Vec<f64>,
    uw: Vec<Complex<T>>,
    uw_frame: Vec<Complex<T>>,
    uw_influence: DVector<T>,
    slot_samples: Vec<usize>,
}

fn default_indices(active: &[usize], n_r: usize) -> Vec<usize> {
    (0..n_r)
        .map(|i| active[(i + 1) * active.len() / n_r - 1])
        .collect()
}

/// Chooses the redundant subcarriers per `config.redundant_placement`.
pub fn select_redundant_indices<T: Real>(
    config: &FrameConfig,
    mods: &ModulationSet<T>,
) -> Result<PermutationSpec> {
    let k = config.subcarriers;
    let n_r = config.redundant_subcarriers;
    let nulls = &config.null_subcarriers;
    if n_r == 0 {
        return PermutationSpec::new(k, &[], nulls);
    }
    let active = config.active_subcarriers();
    if n_r >= active.len() {
        return Err(invalid(format!("N_r = {n_r} leaves no data subcarriers")));
    }
    match &config.redundant_placement {
        RedundantPlacement::Default => {
            PermutationSpec::new(k, &default_indices(&active, n_r), nulls)
        }
        RedundantPlacement::Explicit(idx) => PermutationSpec::new(k, idx, nulls),
        RedundantPlacement::Search => {
            let energy = |red: &[usize]| -> f64 {
                PermutationSpec::new(k, red, nulls)
                    .and_then(|s| UwCoder::with_spec(config, mods, s))
                    .map(|c| c.redundant_energy())
                    .unwrap_or(f64::INFINITY)
            };
            let mut red = default_indices(&active, n_r);
            let mut best = energy(&red);
            let mut improved = true;
            let mut passes = 0;
            while improved && passes < 4 * k {
                improved = false;
                passes += 1;
                for slot in 0..n_r {
                    for &cand in &active {
                        if red.contains(&cand) {
                            continue;
                        }
                        let mut trial = red.clone();
                        trial[slot] = cand;
                        let e = energy(&trial);
                        if e < best * (1.0 - 1e-12) {
                            best = e;
                            red = trial;
                            improved = true;
                        }
                    }
                }
            }
            if !best.is_finite() {
                return Err(Error::Construction(
                    "no redundant placement gives an invertible M22".into(),
                ));
            }
            PermutationSpec::new(k, &red, nulls)
        }
    }
}

impl<T: Real> UwCoder<T> {
    pub fn build(config: &FrameConfig, mods: &ModulationSet<T>) -> Result<Self> {
        config.validate()?;
        let spec = select_redundant_indices(config, mods)?;
        Self::with_spec(config, mods, spec)
    }

    pub fn with_spec(
        config: &FrameConfig,
        mods: &ModulationSet<T>,
        spec: PermutationSpec,
    ) -> Result<Self> {
        let (k, m) = (config.subcarriers, config.subsymbols);
        let n = k * m;
        if mods.subcarriers() != k || mods.subsymbols() != m {
            return Err(invalid(
                "modulation set does not match the frame configuration",
            ));
        }
        let guard = config.guard();
        let coded = config.coded_subsymbols();
        let l = config.guard_len;
        let s = config.slot_offset;

        let mut data_positions = Vec::new();
        let mut red_positions = Vec::new();
        for mm in 0..m {
            let is_coded = coded.contains(&mm);
            for kk in 0..k {
                if spec.null_indices.contains(&kk) {
                    continue;
                }
                if is_coded && spec.redundant_indices.contains(&kk) {
                    red_positions.push(kk + mm * k);
                } else {
                    data_positions.push(kk + mm * k);
                }
            }
        }
        let data_cols: Vec<usize> = data_positions
            .iter()
            .copied()
            .chain(data_positions.iter().map(|p| p + n))
            .collect();
        let red_cols: Vec<usize> = red_positions
            .iter()
            .copied()
            .chain(red_positions.iter().map(|p| p + n))
            .collect();
        let slot = |mm: usize| -> Vec<usize> { (0..l).map(|j| (mm * k + s + j) % n).collect() };
        let slot_samples: Vec<usize> = coded.iter().flat_map(|&mm| slot(mm)).collect();
        let rows_of = |samples: &[usize]| -> Vec<usize> {
            samples
                .iter()
                .copied()
                .chain(samples.iter().map(|i| i + n))
                .collect()
        };
        let b = &mods.basis;
        let pick = |rows: &[usize], cols: &[usize]| {
            DMatrix::from_fn(rows.len(), cols.len(), |r, c| b[(rows[r], cols[c])])
        };

        let mut t = DMatrix::zeros(red_cols.len(), data_cols.len());
        let mut condition_numbers = Vec::new();
        if !red_cols.is_empty() {
            match config.coding_scope {
                CodingScope::Block => {
                    let rows = rows_of(&slot_samples);
                    let (tm, cond) =
                        solve_redundant(&pick(&rows, &red_cols), &pick(&rows, &data_cols))
                            .map_err(|e| tag_subsymbol(e, None))?;
                    t = tm;
                    condition_numbers.push(cond);
                }
                CodingScope::SubSymbol => {
                    for &mm in &coded {
                        let own = |cols: &[usize]| -> Vec<usize> {
                            (0..cols.len())
                                .filter(|&c| (cols[c] % n) / k == mm)
                                .collect()
                        };
                        let dsel = own(&data_cols);
                        let rsel = own(&red_cols);
                        let dc: Vec<usize> = dsel.iter().map(|&c| data_cols[c]).collect();
                        let rc: Vec<usize> = rsel.iter().map(|&c| red_cols[c]).collect();
                        let rows = rows_of(&slot(mm));
                        let (tm, cond) = solve_redundant(&pick(&rows, &rc), &pick(&rows, &dc))
                            .map_err(|e| tag_subsymbol(e, Some(mm)))?;
                        for (i, &ri) in rsel.iter().enumerate() {
                            for (j, &dj) in dsel.iter().enumerate() {
                                t[(ri, dj)] = tm[(i, j)];
                            }
                        }
                        condition_numbers.push(cond);
                    }
                }
            }
        }

        let mut r = DMatrix::zeros(2 * n, data_cols.len());
        for (j, &c) in data_cols.iter().enumerate() {
            r[(c, j)] = T::one();
        }
        for (i, &c) in red_cols.iter().enumerate() {
            for j in 0..data_cols.len() {
                r[(c, j)] = t[(i, j)];
            }
        }
        let generator = b * &r;

        let zero = Complex::new(T::zero(), T::zero());
        let uw: Vec<Complex<T>> = match guard {
            GuardKind::Uw => config
                .uw_samples()
                .iter()
                .map(|c| Complex::new(T::lit(c.re), T::lit(c.im)))
                .collect(),
            GuardKind::Cp => Vec::new(),
        };
        let mut uw_frame = vec![zero; n];
        for &mm in &coded {
            for (j, &i) in slot(mm).iter().enumerate() {
                uw_frame[i] = uw[j];
            }
        }
        let uw_influence = mods.demodulate_real(&uw_frame)?;

        Ok(Self {
            subcarriers: k,
            subsymbols: m,
            guard_len: l,
            guard,
            slot_offset: s,
            scope: config.coding_scope,
            spec,
            coded_subsymbols: coded,
            data_positions,
            red_cols,
            t,
            r,
            generator,
            condition_numbers,
            uw,
            uw_frame,
            uw_influence,
            slot_samples,
        })
    }

    pub fn block_len(&self) -> usize {
        self.subcarriers * self.subsymbols
    }

    pub fn guard_len(&self) -> usize {
        self.guard_len
    }

    pub fn guard(&self) -> GuardKind {
        self.guard
    }

    pub fn data_symbols(&self) -> usize {
        self.data_positions.len()
    }

    /// Real data coefficients per block (twice the symbol count).
    pub fn data_len(&self) -> usize {
        2 * self.data_positions.len()
    }

    pub fn has_redundancy(&self) -> bool {
        !self.red_cols.is_empty()
    }

    pub fn generator(&self) -> &DMatrix<T> {
        &self.generator
    }

    /// Demodulated contribution of the unique words, real-stacked.
    pub fn uw_influence(&self) -> &DVector<T> {
        &self.uw_influence
    }

    /// Unique-word samples in natural block order.
    pub fn uw_frame(&self) -> &[Complex<T>] {
        &self.uw_frame
    }

    /// Natural-order sample indices that must be zero before the UW is added.
    pub fn slot_samples(&self) -> &[usize] {
        &self.slot_samples
    }

    /// Cyclic shift applied to the block when it is emitted.
    pub fn rotation(&self) -> usize {
        match self.guard {
            GuardKind::Uw => (self.slot_offset + self.guard_len) % self.block_len(),
            GuardKind::Cp => 0,
        }
    }

    /// Mean squared redundant coefficient per unit data coefficient.
    pub fn redundant_energy(&self) -> f64 {
        if self.t.ncols() == 0 {
            return 0.0;
        }
        self.t.iter().map(|v| v.to_f64_lossy().powi(2)).sum::<f64>() / self.t.ncols() as f64
    }

    /// `[Re d; Im d]` for data symbols in symbol order.
    pub fn stack_symbols(&self, symbols: &[Complex<T>]) -> Result<DVector<T>> {
        let d = self.data_symbols();
        if symbols.len() != d {
            return Err(invalid(format!(
                "{} data symbols, expected {d}",
                symbols.len()
            )));
        }
        Ok(DVector::from_fn(2 * d, |i, _| {
            if i < d {
                symbols[i].re
            } else {
                symbols[i - d].im
            }
        }))
    }

    pub fn unstack_symbols(&self, v: &DVector<T>) -> Vec<Complex<T>> {
        let d = self.data_symbols();
        (0..d).map(|i| Complex::new(v[i], v[d + i])).collect()
    }

    /// Real-stacked data coefficients gathered from a real-stacked grid.
    pub fn gather_data(&self, coeffs: &DVector<T>) -> DVector<T> {
        let n = self.block_len();
        let d = self.data_symbols();
        DVector::from_fn(2 * d, |i, _| {
            if i < d {
                coeffs[self.data_positions[i]]
            } else {
                coeffs[n + self.data_positions[i - d]]
            }
        })
    }

    /// `R·d` for real-stacked data.
    pub fn encode_real(&self, data: &DVector<T>) -> Result<DVector<T>> {
        if data.len() != self.data_len() {
            return Err(invalid(format!(
                "{} data coefficients, expected {}",
                data.len(),
                self.data_len()
            )));
        }
        Ok(&self.r * data)
    }

    /// Places data symbols and computed redundant values on the K×M grid.
    pub fn encode(&self, symbols: &[Complex<T>]) -> Result<SymbolGrid<T>> {
        let c = self.encode_real(&self.stack_symbols(symbols)?)?;
        SymbolGrid::from_real_stacked(self.subcarriers, self.subsymbols, &c)
    }

    /// Codeword of sub-symbol `m` from its own data symbols. Only defined when
    /// the redundancy of `m` does not depend on other sub-symbols.
    pub fn encode_subsymbol(&self, m: usize, symbols: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if m >= self.subsymbols {
            return Err(invalid(format!("sub-symbol {m} out of range")));
        }
        if self.scope == CodingScope::Block && self.coded_subsymbols.contains(&m) {
            return Err(invalid("block-scope redundancy depends on the whole block"));
        }
        let k = self.subcarriers;
        let own: Vec<usize> = (0..self.data_symbols())
            .filter(|&i| self.data_positions[i] / k == m)
            .collect();
        if symbols.len() != own.len() {
            return Err(invalid(format!(
                "{} symbols for sub-symbol {m}, expected {}",
                symbols.len(),
                own.len()
            )));
        }
        let mut all = vec![Complex::new(T::zero(), T::zero()); self.data_symbols()];
        for (s, &i) in symbols.iter().zip(&own) {
            all[i] = *s;
        }
        let grid = self.encode(&all)?;
        Ok((0..k).map(|kk| grid.get(kk, m)).collect())
    }

    /// Largest magnitude on the unique-word slots of `B·R·d`.
    pub fn tail_residual(&self, data: &DVector<T>) -> Result<f64> {
        if data.len() != self.data_len() {
            return Err(invalid("data length mismatch"));
        }
        let n = self.block_len();
        let rows = &self.generator;
        Ok(self
            .slot_samples
            .iter()
            .map(|&i| {
                let re = rows.row(i).dot(&data.transpose());
                let im = rows.row(n + i).dot(&data.transpose());
                (re * re + im * im).sqrt().to_f64_lossy()
            })
            .fold(0.0, f64::max))
    }

    /// Energy, payload and length of one frame for `mu` bits per symbol.
    pub fn budget(&self, mu: usize) -> FrameBudget {
        let n = self.block_len();
        let row_energy = |i: usize| -> f64 {
            let e = |r: usize| {
                self.generator
                    .row(r)
                    .iter()
                    .map(|v| v.to_f64_lossy().powi(2))
                    .sum::<f64>()
            };
            0.5 * (e(i) + e(n + i))
        };
        let body: f64 = (0..n).map(row_energy).sum();
        let guard = match self.guard {
            GuardKind::Cp => (n - self.guard_len..n).map(row_energy).sum(),
            GuardKind::Uw => {
                let u =
                    |v: &[Complex<T>]| v.iter().map(|c| c.norm_sqr().to_f64_lossy()).sum::<f64>();
                u(&self.uw_frame) + u(&self.uw)
            }
        };
        FrameBudget {
            energy: body + guard,
            data_symbols: self.data_symbols(),
            data_bits: self.data_symbols() * mu,
            samples: n + self.guard_len,
        }
    }

    /// Off-block energy and tail level for each coded sub-symbol.
    pub fn leakage_audit(&self, mods: &ModulationSet<T>) -> Vec<LeakageAudit> {
        let n = self.block_len();
        let l = self.guard_len.max(1);
        self.coded_subsymbols
            .iter()
            .enumerate()
            .map(|(idx, &m)| {
                let samples = &self.slot_samples[idx * l..(idx + 1) * l];
                let energy: f64 = samples
                    .iter()
                    .flat_map(|&i| [i, n + i])
                    .map(|r| {
                        self.generator
                            .row(r)
                            .iter()
                            .map(|v| v.to_f64_lossy().powi(2))
                            .sum::<f64>()
                    })
                    .sum();
                LeakageAudit {
                    subsymbol: m,
                    off_block_energy: mods.off_block_leakage(m),
                    tail_rms: (0.5 * energy / l as f64).sqrt(),
                }
            })
            .collect()
    }

    /// Adds the guard to a modulated block. UW frames are the rotated block
    /// (ending with the unique word of sub-symbol 0) followed by one more copy
    /// of the unique word; CP frames prepend the last `L` samples.
    pub fn assemble_tx(&self, block: &GfdmBlock<T>) -> Result<ComplexVector<T>> {
        let x: &[Complex<T>] = &block.time_samples;
        let n = self.block_len();
        if x.len() != n {
            return Err(invalid(format!(
                "block has {} samples, expected {n}",
                x.len()
            )));
        }
        let l = self.guard_len;
        let out = match self.guard {
            GuardKind::Cp => x[n - l..].iter().chain(x).copied().collect(),
            GuardKind::Uw => {
                let tol = scaled_tolerance::<T>(1e-7, n);
                let worst = self
                    .slot_samples
                    .iter()
                    .map(|&i| cabs(x[i]).to_f64_lossy())
                    .fold(0.0, f64::max);
                if !(worst < tol) {
                    return Err(Error::Consistency(format!(
                        "unique-word slot not empty before insertion: max {worst:.3e}"
                    )));
                }
                let rot = self.rotation();
                let mut out: Vec<Complex<T>> = (0..n)
                    .map(|i| x[(i + rot) % n] + self.uw_frame[(i + rot) % n])
                    .collect();
                out.extend_from_slice(&self.uw);
                out
            }
        };
        ComplexVector::new(out)
    }

    /// Undoes the transmit rotation on an N-sample window.
    pub fn unrotate(&self, window: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = window.len();
        let rot = self.rotation();
        (0..n).map(|i| window[(i + n - rot % n) % n]).collect()
    }
}

fn tag_subsymbol(e: Error, m: Option<usize>) -> Error {
    match e {
        Error::IllConditioned { cond, .. } => Error::IllConditioned { cond, subsymbol: m },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{NoiseModel, UwPlacement, Variant};
    use crate::numerics::RngStream;
    use rand::Rng;

    fn uw_config(k: usize, m: usize, n_r: usize, placement: UwPlacement) -> FrameConfig {
        FrameConfig {
            subcarriers: k,
            subsymbols: m,
            data_subcarriers: k - n_r,
            redundant_subcarriers: n_r,
            guard_len: n_r,
            bits_per_symbol: 2,
            alpha: 0.5,
            variant: Variant::UwGfdm,
            uw_placement: placement,
            uw_sequence: Vec::new(),
            null_subcarriers: Vec::new(),
            slot_offset: FrameConfig::default_slot_offset(k, n_r),
            coding_scope: CodingScope::Block,
            redundant_placement: RedundantPlacement::Default,
            noise_model: NoiseModel::White,
        }
    }

    fn random_data(len: usize, seed: u64) -> DVector<f64> {
        let mut rng = RngStream::new(seed, 9).generator();
        DVector::from_fn(len, |_, _| rng.random::<f64>() * 2.0 - 1.0)
    }

    #[test]
    fn default_rule_example() {
        let cfg = uw_config(8, 2, 2, UwPlacement::All);
        let mods = ModulationSet::<f64>::from_config(&cfg).unwrap();
        let spec = select_redundant_indices(&cfg, &mods).unwrap();
        assert_eq!(spec.redundant_indices, vec![3, 7]);
        assert_eq!(spec.data_indices, vec![0, 1, 2, 4, 5, 6]);
    }

    #[test]
    fn permutation_matrix_places_entries() {
        let spec = PermutationSpec::new(8, &[3, 7], &[]).unwrap();
        let p = spec.matrix::<f64>();
        assert_eq!(p.iter().filter(|&&v| v == 1.0).count(), 8);
        for i in 0..8 {
            assert_eq!(p.row(i).sum(), 1.0);
            assert_eq!(p.column(i).sum(), 1.0);
        }
        let v = DVector::from_fn(8, |i, _| i as f64);
        let placed = &p * v;
        assert_eq!(placed[3], 6.0);
        assert_eq!(placed[7], 7.0);
        assert_eq!(placed[4], 3.0);
        assert!(PermutationSpec::new(8, &[3, 3], &[]).is_err());
    }

    #[test]
    fn cp_spec_is_identity() {
        let spec = PermutationSpec::new(8, &[], &[]).unwrap();
        assert_eq!(spec.matrix::<f64>(), DMatrix::identity(8, 8));
    }

    #[test]
    fn hand_built_scalar_solve() {
        let block = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, 0.0, //
                2.0, -1.0, 4.0, 0.5,
            ],
        );
        let (t, cond) = compute_t::<f64>(&block, 3, 1).unwrap();
        assert_eq!(t.shape(), (1, 3));
        assert!((t[(0, 0)] + 4.0).abs() < 1e-14);
        assert!((t[(0, 1)] - 2.0).abs() < 1e-14);
        assert!((t[(0, 2)] + 8.0).abs() < 1e-14);
        assert_eq!(cond, 1.0);
    }

    #[test]
    fn singular_m22_rejected() {
        let mut block = DMatrix::<f64>::identity(4, 4);
        block[(2, 2)] = 1.0;
        block[(2, 3)] = 2.0;
        block[(3, 2)] = 2.0;
        block[(3, 3)] = 4.0;
        assert!(matches!(
            compute_t(&block, 2, 2),
            Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn zero_tail_block_scope() {
        for placement in [UwPlacement::FirstOnly, UwPlacement::All] {
            let cfg = uw_config(16, 3, 4, placement);
            let mods = ModulationSet::<f64>::from_config(&cfg).unwrap();
            let coder = UwCoder::build(&cfg, &mods).unwrap();
            for seed in 0..100 {
                let d = random_data(coder.data_len(), seed);
                assert!(coder.tail_residual(&d).unwrap() < 1e-7);
            }
        }
    }

    #[test]
    fn subsymbol_scope_leaks() {
        let mut cfg = uw_config(16, 3, 4, UwPlacement::All);
        cfg.coding_scope = CodingScope::SubSymbol;
        let mods = ModulationSet::<f64>::from_config(&cfg).unwrap();
        let coder = UwCoder::build(&cfg, &mods).unwrap();
        let audit = coder.leakage_audit(&mods);
        assert_eq!(audit.len(), 3);
        assert!(audit
            .iter()
            .all(|a| a.tail_rms > 1e-6 && a.off_block_energy > 0.0));
        cfg.coding_scope = CodingScope::Block;
        let coder = UwCoder::build(&cfg, &mods).unwrap();
        assert!(coder
            .leakage_audit(&mods)
            .iter()
            .all(|a| a.tail_rms < 1e-10));
    }

    #[test]
    fn generator_full_rank_and_overhead() {
        let cfg = uw_config(16, 3, 4, UwPlacement::FirstOnly);
        let mods = ModulationSet::<f64>::from_config(&cfg).unwrap();
        let coder = UwCoder::build(&cfg, &mods).unwrap();
        assert_eq!(coder.data_symbols(), 12 + 2 * 16);
        let rtr = coder.r.transpose() * &coder.r;
        assert!(rtr.cholesky().is_some());
    }

    #[test]
    fn search_not_worse_than_default_or_tail() {
        let cfg = uw_config(8, 2, 2, UwPlacement::All);
        let mods = ModulationSet::<f64>::from_config(&cfg).unwrap();
        let energy = |p: RedundantPlacement| {
            let mut c = cfg.clone();
            c.redundant_placement = p;
            UwCoder::build(&c, &mods).unwrap().redundant_energy()
        };
        let search = energy(RedundantPlacement::Search);
        assert!(search <= energy(RedundantPlacement::Default) + 1e-12);
        assert!(search <= energy(RedundantPlacement::Explicit(vec![6, 7])) + 1e-12);
    }

    #[test]
    fn uw_insertion_and_cp() {
        let mut cfg = uw_config(16, 2, 4, UwPlacement::All);
        cfg.uw_sequence = (0..4)
            .map(|i| num_complex::Complex64::new(i as f64 + 1.0, -0.5))
            .collect();
        let mods = ModulationSet::<f64>::from_config(&cfg).unwrap();
        let coder = UwCoder::build(&cfg, &mods).unwrap();
        let mut rng = RngStream::new(5, 0).generator();
        let syms: Vec<_> = (0..coder.data_symbols())
            .map(|_| Complex::new(rng.random::<f64>(), rng.random::<f64>()))
            .collect();
        let block = mods.modulate(&coder.encode(&syms).unwrap()).unwrap();
        let frame = coder.assemble_tx(&block).unwrap();
        assert_eq!(frame.len(), 32 + 4);
        let natural = coder.unrotate(&frame[..32]);
        for (idx, &i) in coder.slot_samples().iter().enumerate() {
            assert!((natural[i] - cfg.uw_sequence[idx % 4]).norm() < 1e-12);
        }
        for i in 0..4 {
            assert!((frame[32 + i] - frame[28 + i]).norm() < 1e-12);
        }

        let mut cp = cfg.clone();
        cp.variant = Variant::CpGfdm;
        cp.redundant_subcarriers = 0;
        cp.data_subcarriers = 16;
        let coder = UwCoder::build(&cp, &mods).unwrap();
        let g = coder.encode(&vec![Complex::new(0.5, -0.5); 32]).unwrap();
        let block = mods.modulate(&g).unwrap();
        let frame = coder.assemble_tx(&block).unwrap();
        assert_eq!(&frame[..4], &block.time_samples[28..]);
    }

    #[test]
    fn nonzero_tail_is_a_consistency_error() {
        let cfg = uw_config(16, 2, 4, UwPlacement::All);
        let mods = ModulationSet::<f64>::from_config(&cfg).unwrap();
        let coder = UwCoder::build(&cfg, &mods).unwrap();
        let mut rng = RngStream::new(6, 0).generator();
        let e = (0..32)
            .map(|_| Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let block = mods
            .modulate(&SymbolGrid::from_vec(16, 2, e).unwrap())
            .unwrap();
        assert!(matches!(
            coder.assemble_tx(&block),
            Err(Error::Consistency(_))
        ));
    }

    #[test]
    fn encode_subsymbol_matches_grid() {
        let mut cfg = uw_config(16, 2, 4, UwPlacement::All);
        cfg.coding_scope = CodingScope::SubSymbol;
        let mods = ModulationSet::<f64>::from_config(&cfg).unwrap();
        let coder = UwCoder::build(&cfg, &mods).unwrap();
        let zero = coder
            .encode_subsymbol(1, &[Complex::new(0.0, 0.0); 12])
            .unwrap();
        assert!(zero.iter().all(|c| c.norm() == 0.0));
        let syms: Vec<_> = (0..24).map(|i| Complex::new(i as f64, 1.0)).collect();
        let grid = coder.encode(&syms).unwrap();
        let c1 = coder.encode_subsymbol(1, &syms[12..]).unwrap();
        for kk in 0..16 {
            assert!((c1[kk] - grid.get(kk, 1)).norm() < 1e-10);
        }
        cfg.coding_scope = CodingScope::Block;
        let coder = UwCoder::build(&cfg, &mods).unwrap();
        assert!(coder.encode_subsymbol(1, &syms[12..]).is_err());
    }
}
