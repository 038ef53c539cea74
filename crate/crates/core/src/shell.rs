//! Energy-shell spectra of `rho_S (x) tau_B (x) rho_A`, epsilon truncation
//! and block-wise majorization.
//!
//! A shell spectrum is a list of blocks `(value, multiplicity)`, both in log
//! form, sorted by non-increasing value. Shells are kept subnormalized: the
//! trace of a shell is the probability of finding the total system in it.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{BathSpec, BitterySpec, DiagonalState, SystemSpec, Temperature};
use crate::numeric::{ln_count, log_boltzmann_weight, log_diff_exp, log_sum_exp};

/// Two log values closer than this belong to the same value class.
pub const LOG_TIE_TOLERANCE: f64 = 1e-12;

/// Partial-sum tolerance for [`majorizes`], relative to the trace.
pub const MAJORIZATION_TOLERANCE: f64 = 1e-10;

/// Where a block came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BlockTag {
    /// Run `run` of system level `level` (energy `energy`, `count` indices).
    System { level: usize, run: usize, energy: f64, count: u64 },
    /// Position in a plain input vector.
    Index(usize),
}

impl fmt::Display for BlockTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockTag::System { level, run, .. } => write!(f, "S{level}:{run}"),
            BlockTag::Index(i) => write!(f, "#{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Block {
    pub log_value: f64,
    pub log_multiplicity: f64,
    pub tag: BlockTag,
}

impl Block {
    pub fn log_mass(&self) -> f64 {
        self.log_value + self.log_multiplicity
    }
}

/// Data needed to evaluate `rk = 2^n M_B(E) sum h exp(-beta E_S)` directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedForm {
    pub cells: u32,
    pub log_bath_multiplicity: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockSpectrum {
    blocks: Vec<Block>,
    closed_form: Option<ClosedForm>,
}

impl BlockSpectrum {
    pub fn new(mut blocks: Vec<Block>) -> Result<Self> {
        for b in &blocks {
            if b.log_value.is_nan() || b.log_value == f64::INFINITY {
                return Err(Error::InvalidState(format!("block {} has value {}", b.tag, b.log_value)));
            }
            if !b.log_multiplicity.is_finite() {
                return Err(Error::InvalidState(format!(
                    "block {} has multiplicity exp({})",
                    b.tag, b.log_multiplicity
                )));
            }
        }
        blocks.retain(|b| b.log_value != f64::NEG_INFINITY);
        blocks.sort_by(|a, b| b.log_value.partial_cmp(&a.log_value).unwrap_or(Ordering::Equal));
        Ok(Self { blocks, closed_form: None })
    }

    /// Unit-multiplicity blocks from a plain vector. Zero entries are dropped,
    /// which leaves every prefix sum unchanged.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let mut blocks = Vec::with_capacity(values.len());
        for (i, &v) in values.iter().enumerate() {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidState(format!("entry {i} is {v}")));
            }
            blocks.push(Block { log_value: v.ln(), log_multiplicity: 0.0, tag: BlockTag::Index(i) });
        }
        Self::new(blocks)
    }

    /// Shell spectrum with the bath factor `M_B(E) exp(-beta E)/Z_B` and the
    /// bittery factor divided out: values `p exp(beta E_S)`, multiplicities
    /// `count * exp(-beta E_S)`. Its trace is one.
    pub fn system_weighted(state: &DiagonalState, system: &SystemSpec, temp: Temperature) -> Result<Self> {
        let beta = temp.beta();
        let mut blocks = Vec::new();
        for (level, (runs, spec)) in state.levels().iter().zip(system.levels()).enumerate() {
            for (run, r) in runs.iter().enumerate() {
                if r.probability <= 0.0 {
                    continue;
                }
                blocks.push(Block {
                    log_value: r.probability.ln() + beta * spec.energy,
                    log_multiplicity: log_boltzmann_weight(r.count, spec.energy, beta),
                    tag: BlockTag::System { level, run, energy: spec.energy, count: r.count },
                });
            }
        }
        if blocks.is_empty() {
            return Err(Error::DegenerateState);
        }
        let mut spec = Self::new(blocks)?;
        spec.closed_form = Some(ClosedForm { cells: 0, log_bath_multiplicity: 0.0, beta });
        Ok(spec)
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn closed_form(&self) -> Option<ClosedForm> {
        self.closed_form
    }

    pub fn log_trace(&self) -> f64 {
        let masses: Vec<f64> = self.blocks.iter().map(Block::log_mass).collect();
        log_sum_exp(&masses)
    }

    pub fn trace(&self) -> f64 {
        self.log_trace().exp()
    }

    /// Log of the number of nonzero entries.
    pub fn log_support_size(&self) -> f64 {
        let lm: Vec<f64> = self.blocks.iter().map(|b| b.log_multiplicity).collect();
        log_sum_exp(&lm)
    }

    /// Writes `log_value,log_multiplicity,tag` rows with a header.
    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["log_value", "log_multiplicity", "tag"])?;
        for b in &self.blocks {
            w.write_record([b.log_value.to_string(), b.log_multiplicity.to_string(), b.tag.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Index ranges of blocks whose log values agree to [`LOG_TIE_TOLERANCE`].
    fn value_classes(&self) -> Vec<std::ops::Range<usize>> {
        let mut classes = Vec::new();
        let mut start = 0;
        for i in 1..=self.blocks.len() {
            if i == self.blocks.len()
                || (self.blocks[start].log_value - self.blocks[i].log_value) > LOG_TIE_TOLERANCE
            {
                classes.push(start..i);
                start = i;
            }
        }
        classes
    }
}

/// Shell spectrum of `rho_S (x) tau_B (x) 2^-n 1` at total energy `E`.
///
/// One block per system run with value `p exp(-beta (E - E_S)) / (Z_B 2^n)`
/// and multiplicity `2^n M_B(E - E_S) * count`. Runs with `p = 0` are omitted.
pub fn assemble_shell(
    state: &DiagonalState,
    system: &SystemSpec,
    bath: &BathSpec,
    bittery: BitterySpec,
    total_energy: f64,
    temp: Temperature,
) -> Result<BlockSpectrum> {
    let beta = temp.beta();
    let log_cells = bittery.log_dimension();
    let mut blocks = Vec::new();
    let mut pairs = 0usize;
    let mut closed_form = None;

    match bath {
        BathSpec::Analytic(bath) => {
            bath.check_temperature(temp)?;
            let e_index = bath.grid_index(total_energy)?;
            let log_zb = bath.log_partition_function();
            for (level, (runs, spec)) in state.levels().iter().zip(system.levels()).enumerate() {
                let s_index = bath.grid_index(spec.energy)?;
                if s_index > e_index || e_index - s_index >= bath.grid_levels() {
                    continue;
                }
                pairs += 1;
                let b_index = e_index - s_index;
                let bath_energy = b_index as f64 * bath.spacing();
                for (run, r) in runs.iter().enumerate() {
                    if r.probability <= 0.0 {
                        continue;
                    }
                    blocks.push(Block {
                        log_value: r.probability.ln() - beta * bath_energy - log_zb - log_cells,
                        log_multiplicity: log_cells + bath.log_multiplicity(b_index) + ln_count(r.count),
                        tag: BlockTag::System { level, run, energy: spec.energy, count: r.count },
                    });
                }
            }
            closed_form = Some(ClosedForm {
                cells: bittery.cells,
                log_bath_multiplicity: bath.log_multiplicity(e_index),
                beta,
            });
        }
        BathSpec::Explicit(bath) => {
            let log_zb = bath.log_partition_function(temp);
            for (level, (runs, spec)) in state.levels().iter().zip(system.levels()).enumerate() {
                let Some(bath_level) = bath.level_at(total_energy - spec.energy) else {
                    continue;
                };
                pairs += 1;
                for (run, r) in runs.iter().enumerate() {
                    if r.probability <= 0.0 {
                        continue;
                    }
                    blocks.push(Block {
                        log_value: r.probability.ln() - beta * bath_level.energy - log_zb - log_cells,
                        log_multiplicity: log_cells + ln_count(bath_level.multiplicity) + ln_count(r.count),
                        tag: BlockTag::System { level, run, energy: spec.energy, count: r.count },
                    });
                }
            }
        }
    }

    if pairs == 0 {
        return Err(Error::EmptyShell {
            energy: total_energy,
            reason: "no system/bath level pair realizes this total energy".into(),
        });
    }
    if blocks.is_empty() {
        return Err(Error::EmptyShell {
            energy: total_energy,
            reason: "the state puts no weight on this shell".into(),
        });
    }
    let mut spectrum = BlockSpectrum::new(blocks)?;
    spectrum.closed_form = closed_form;
    Ok(spectrum)
}

/// The indicator assignment `h` of an epsilon truncation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothingResult {
    /// One entry per block of the truncated spectrum, in spectrum order.
    pub h: Vec<(BlockTag, f64)>,
    pub epsilon: f64,
    /// `ln sum h * multiplicity`.
    pub log_rank: f64,
    /// `sum h * value * multiplicity`, equal to `(1 - epsilon) tr`.
    pub trace_kept: f64,
    pub log_trace: f64,
}

impl SmoothingResult {
    pub fn h_for(&self, tag: &BlockTag) -> Option<f64> {
        self.h.iter().find(|(t, _)| t == tag).map(|(_, h)| *h)
    }
}

pub fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    Ok(())
}

/// Keep the largest values until `(1 - epsilon)` of the trace is reached.
///
/// Tied values form one class and share the boundary fraction. When the
/// target lands exactly on a class boundary that class keeps `h = 1`.
pub fn epsilon_truncate(spectrum: &BlockSpectrum, epsilon: f64) -> Result<SmoothingResult> {
    check_epsilon(epsilon)?;
    let log_trace = spectrum.log_trace();
    let blocks = spectrum.blocks();
    let mut h = vec![0.0; blocks.len()];

    let need = 1.0 - epsilon;
    let mut kept = 0.0;
    let mut done = false;
    for class in spectrum.value_classes() {
        if done {
            break;
        }
        if epsilon == 0.0 {
            h[class].fill(1.0);
            continue;
        }
        let fraction: f64 = blocks[class.clone()]
            .iter()
            .map(|b| (b.log_mass() - log_trace).exp())
            .sum();
        let hc = if kept + fraction < need {
            kept += fraction;
            1.0
        } else {
            done = true;
            let x = ((need - kept) / fraction).clamp(0.0, 1.0);
            if x >= 1.0 - LOG_TIE_TOLERANCE { 1.0 } else { x }
        };
        h[class].fill(hc);
    }

    let rank_terms: Vec<f64> = blocks
        .iter()
        .zip(&h)
        .filter(|(_, &hb)| hb > 0.0)
        .map(|(b, &hb)| hb.ln() + b.log_multiplicity)
        .collect();
    let trace_kept = blocks.iter().zip(&h).map(|(b, &hb)| hb * b.log_mass().exp()).sum();
    Ok(SmoothingResult {
        h: blocks.iter().map(|b| b.tag).zip(h).collect(),
        epsilon,
        log_rank: log_sum_exp(&rank_terms),
        trace_kept,
        log_trace,
    })
}

/// `ln sum h exp(-beta E_S)` over the system-tagged blocks of a truncation.
///
/// Fully kept runs of one level are merged into a single integer count, so
/// keeping every state reproduces the terms of `Z_S` exactly.
pub fn log_weighted_indicator_sum(result: &SmoothingResult, beta: f64) -> f64 {
    let mut full: BTreeMap<usize, (u64, f64)> = BTreeMap::new();
    let mut terms = Vec::new();
    for (tag, h) in &result.h {
        if let BlockTag::System { level, energy, count, .. } = tag {
            if *h == 1.0 {
                full.entry(*level).or_insert((0, *energy)).0 += count;
            } else if *h > 0.0 {
                terms.push(h.ln() + log_boltzmann_weight(*count, *energy, beta));
            }
        }
    }
    terms.extend(full.values().map(|&(count, energy)| log_boltzmann_weight(count, energy, beta)));
    log_sum_exp(&terms)
}

/// Log of the epsilon-smoothed rank. When the spectrum came from an analytic
/// bath the block-wise value is checked against
/// `n ln 2 + ln M_B(E) + ln sum h exp(-beta E_S)`.
pub fn rank_epsilon(spectrum: &BlockSpectrum, epsilon: f64) -> Result<f64> {
    let result = epsilon_truncate(spectrum, epsilon)?;
    if let Some(cf) = spectrum.closed_form() {
        let closed = cf.cells as f64 * std::f64::consts::LN_2
            + cf.log_bath_multiplicity
            + log_weighted_indicator_sum(&result, cf.beta);
        if (closed - result.log_rank).abs() > LOG_TIE_TOLERANCE * closed.abs().max(1.0) {
            return Err(Error::ClosedFormMismatch { computed: result.log_rank, closed_form: closed });
        }
    }
    Ok(result.log_rank)
}

/// Prefix-sum function of a sorted spectrum, evaluated at log positions.
struct PrefixSums<'a> {
    blocks: &'a [Block],
    log_counts: Vec<f64>,
    masses: Vec<f64>,
}

impl<'a> PrefixSums<'a> {
    fn new(spectrum: &'a BlockSpectrum, log_scale: f64) -> Self {
        let blocks = spectrum.blocks();
        let mut log_counts = Vec::with_capacity(blocks.len());
        let mut masses = Vec::with_capacity(blocks.len());
        let mut c = f64::NEG_INFINITY;
        let mut m = 0.0;
        for b in blocks {
            c = crate::numeric::log_add_exp(c, b.log_multiplicity);
            m += (b.log_mass() - log_scale).exp();
            log_counts.push(c);
            masses.push(m);
        }
        Self { blocks, log_counts, masses }
    }

    /// Mass of the largest `exp(log_t)` entries, scaled by `exp(-log_scale)`.
    fn at(&self, log_t: f64, log_scale: f64) -> f64 {
        let i = self.log_counts.partition_point(|&c| c < log_t);
        if i == self.blocks.len() {
            return *self.masses.last().unwrap_or(&0.0);
        }
        let (prev_c, prev_m) = if i == 0 {
            (f64::NEG_INFINITY, 0.0)
        } else {
            (self.log_counts[i - 1], self.masses[i - 1])
        };
        let partial = log_diff_exp(log_t, prev_c) + self.blocks[i].log_value - log_scale;
        prev_m + partial.exp()
    }
}

/// True iff `a` majorizes `b`: every prefix sum of `a` (expanded by
/// multiplicity, sorted non-increasing) is at least the matching prefix sum
/// of `b`. Evaluated block-wise at the union of block boundaries, where the
/// piecewise-linear difference attains its minimum.
pub fn majorizes(a: &BlockSpectrum, b: &BlockSpectrum) -> Result<bool> {
    let (ta, tb) = (a.log_trace(), b.log_trace());
    if ta == f64::NEG_INFINITY && tb == f64::NEG_INFINITY {
        return Ok(true);
    }
    let scale = ta.max(tb);
    let (na, nb) = ((ta - scale).exp(), (tb - scale).exp());
    if (na - nb).abs() > MAJORIZATION_TOLERANCE {
        return Err(Error::TraceMismatch { left: ta.exp(), right: tb.exp() });
    }
    let pa = PrefixSums::new(a, scale);
    let pb = PrefixSums::new(b, scale);
    let ok = pa
        .log_counts
        .iter()
        .chain(&pb.log_counts)
        .all(|&t| pa.at(t, scale) >= pb.at(t, scale) - MAJORIZATION_TOLERANCE);
    Ok(ok)
}

/// [`majorizes`] on plain vectors.
pub fn majorizes_values(a: &[f64], b: &[f64]) -> Result<bool> {
    majorizes(&BlockSpectrum::from_values(a)?, &BlockSpectrum::from_values(b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AnalyticBath, ExplicitBath};
    use std::f64::consts::LN_2;

    fn two_level() -> (SystemSpec, DiagonalState, Temperature) {
        let t = Temperature::from_beta(LN_2).unwrap();
        let sys = SystemSpec::new([(0.0, 1), (1.0, 1)]).unwrap();
        let st = DiagonalState::from_probabilities(&sys, &[vec![0.6], vec![0.4]]).unwrap();
        (sys, st, t)
    }

    #[test]
    fn trivial_shell() {
        let t = Temperature::default();
        let sys = SystemSpec::new([(0.0, 1)]).unwrap();
        let st = sys.gibbs_state(t);
        let bath = BathSpec::Explicit(ExplicitBath::new([(0.0, 1)]).unwrap());
        let s = assemble_shell(&st, &sys, &bath, BitterySpec::new(0), 0.0, t).unwrap();
        assert_eq!(s.blocks().len(), 1);
        assert!(s.blocks()[0].log_value.abs() < 1e-15);
        assert!(s.blocks()[0].log_multiplicity.abs() < 1e-15);
    }

    #[test]
    fn excited_level_sorts_first() {
        let (sys, st, t) = two_level();
        let bath = BathSpec::Analytic(AnalyticBath::new(2, 1.0, 0.0, 1000).unwrap());
        let s = assemble_shell(&st, &sys, &bath, BitterySpec::new(1), 500.0, t).unwrap();
        assert_eq!(s.blocks().len(), 2);
        assert!(matches!(s.blocks()[0].tag, BlockTag::System { level: 1, .. }));
        let ratio = (s.blocks()[1].log_value - s.blocks()[0].log_value).exp();
        assert!((ratio - 0.6 / 0.8).abs() < 1e-12);
        // trace of a bulk shell is 1 / grid_levels
        assert!((s.trace() - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn thermal_shell_is_flat() {
        let t = Temperature::from_beta(LN_2).unwrap();
        let sys = SystemSpec::new([(0.0, 2), (1.0, 1), (3.0, 4)]).unwrap();
        let bath = BathSpec::Analytic(AnalyticBath::new(2, 1.0, 0.0, 64).unwrap());
        let s = assemble_shell(&sys.gibbs_state(t), &sys, &bath, BitterySpec::new(3), 10.0, t).unwrap();
        let v0 = s.blocks()[0].log_value;
        assert!(s.blocks().iter().all(|b| (b.log_value - v0).abs() < 1e-12));
        let r = epsilon_truncate(&s, 0.25).unwrap();
        // single tied class: everything shares the same fraction
        assert!(r.h.iter().all(|(_, h)| (h - 0.75).abs() < 1e-12));
    }

    #[test]
    fn shell_errors() {
        let (sys, st, t) = two_level();
        let analytic = BathSpec::Analytic(AnalyticBath::new(2, 1.0, 0.0, 8).unwrap());
        assert!(matches!(
            assemble_shell(&st, &sys, &analytic, BitterySpec::new(0), 2.5, t),
            Err(Error::IncommensurateEnergy { .. })
        ));
        assert!(matches!(
            assemble_shell(&st, &sys, &analytic, BitterySpec::new(0), 20.0, t),
            Err(Error::EmptyShell { .. })
        ));
        let explicit = BathSpec::Explicit(ExplicitBath::new([(0.0, 1), (1.0, 2)]).unwrap());
        assert!(matches!(
            assemble_shell(&st, &sys, &explicit, BitterySpec::new(0), 5.0, t),
            Err(Error::EmptyShell { .. })
        ));
        let wrong_temp = Temperature::from_beta(1.0).unwrap();
        assert!(assemble_shell(&st, &sys, &analytic, BitterySpec::new(0), 2.0, wrong_temp).is_err());
    }

    #[test]
    fn truncation_examples() {
        let (sys, st, t) = two_level();
        let bath = BathSpec::Analytic(AnalyticBath::new(2, 1.0, 0.0, 1000).unwrap());
        let s = assemble_shell(&st, &sys, &bath, BitterySpec::new(1), 500.0, t).unwrap();

        let r0 = epsilon_truncate(&s, 0.0).unwrap();
        assert!(r0.h.iter().all(|(_, h)| *h == 1.0));
        assert!((r0.log_rank - s.log_support_size()).abs() < 1e-12);

        let r = epsilon_truncate(&s, 0.3).unwrap();
        assert_eq!(r.h[0].1, 1.0);
        assert!((r.h[1].1 - 0.5).abs() < 1e-12);
        assert!((r.trace_kept / s.trace() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn single_block_truncation() {
        let s = BlockSpectrum::new(vec![Block {
            log_value: (0.25f64).ln(),
            log_multiplicity: 4f64.ln(),
            tag: BlockTag::Index(0),
        }])
        .unwrap();
        for eps in [0.1, 0.5, 0.9, 0.999] {
            let r = epsilon_truncate(&s, eps).unwrap();
            assert!((r.h[0].1 - (1.0 - eps)).abs() < 1e-12);
            assert!((r.log_rank.exp() - 4.0 * (1.0 - eps)).abs() < 1e-12);
        }
        assert!(epsilon_truncate(&s, 1.0).is_err());
        assert!(epsilon_truncate(&s, -0.1).is_err());
    }

    #[test]
    fn boundary_exactly_on_class_keeps_full_block() {
        let s = BlockSpectrum::from_values(&[0.5, 0.25, 0.25]).unwrap();
        let r = epsilon_truncate(&s, 0.5).unwrap();
        assert_eq!(r.h[0].1, 1.0);
        assert_eq!(r.h[1].1, 0.0);
        assert_eq!(r.h[2].1, 0.0);
    }

    #[test]
    fn rank_examples() {
        let t = Temperature::from_beta(LN_2).unwrap();
        let sys = SystemSpec::new([(0.0, 1), (1.0, 2), (2.0, 1)]).unwrap();
        let bath_ab = AnalyticBath::new(2, 1.0, 0.5, 100).unwrap();
        let bath = BathSpec::Analytic(bath_ab.clone());
        let e = 40.0;
        let log_mb = bath_ab.log_multiplicity(40);

        let th = sys.gibbs_state(t);
        let s = assemble_shell(&th, &sys, &bath, BitterySpec::new(0), e, t).unwrap();
        let lr = rank_epsilon(&s, 0.0).unwrap();
        assert!((lr - (sys.log_partition_function(t) + log_mb)).abs() < 1e-12);

        let s5 = assemble_shell(&th, &sys, &bath, BitterySpec::new(5), e, t).unwrap();
        let lr5 = rank_epsilon(&s5, 0.2).unwrap();
        let lr0 = rank_epsilon(&assemble_shell(&th, &sys, &bath, BitterySpec::new(0), e, t).unwrap(), 0.2).unwrap();
        assert!((lr5 - lr0 - 5.0 * LN_2).abs() < 1e-12);

        let pure = DiagonalState::pure(&sys, 0, 0).unwrap();
        let sp = assemble_shell(&pure, &sys, &bath, BitterySpec::new(3), e, t).unwrap();
        assert!((rank_epsilon(&sp, 0.0).unwrap() - (3.0 * LN_2 + log_mb)).abs() < 1e-12);
    }

    #[test]
    fn majorization_examples() {
        assert!(majorizes_values(&[0.5, 0.3, 0.2], &[0.5, 0.3, 0.2]).unwrap());
        let third = 1.0 / 3.0;
        assert!(majorizes_values(&[1.0, 0.0, 0.0], &[third, third, third]).unwrap());
        assert!(!majorizes_values(&[third, third, third], &[1.0, 0.0, 0.0]).unwrap());
        assert!(majorizes_values(&[0.5, 0.3, 0.2], &[0.4, 0.4, 0.2]).unwrap());
        assert!(!majorizes_values(&[0.4, 0.4, 0.2], &[0.5, 0.3, 0.2]).unwrap());
        assert!(matches!(
            majorizes_values(&[0.5, 0.5], &[0.5, 0.4]),
            Err(Error::TraceMismatch { .. })
        ));
    }

    #[test]
    fn majorization_with_huge_multiplicities() {
        // 2^2000 entries of 2^-2000 against a half/half split of the same mass
        let big = 2000.0 * LN_2;
        let flat = BlockSpectrum::new(vec![Block { log_value: -big, log_multiplicity: big, tag: BlockTag::Index(0) }]).unwrap();
        let peaked = BlockSpectrum::new(vec![
            Block { log_value: -LN_2, log_multiplicity: 0.0, tag: BlockTag::Index(0) },
            Block { log_value: -LN_2 - big, log_multiplicity: big, tag: BlockTag::Index(1) },
        ])
        .unwrap();
        assert!(majorizes(&peaked, &flat).unwrap());
        assert!(!majorizes(&flat, &peaked).unwrap());
    }

    #[test]
    fn csv_output() {
        let (sys, st, t) = two_level();
        let bath = BathSpec::Analytic(AnalyticBath::new(2, 1.0, 0.0, 10).unwrap());
        let s = assemble_shell(&st, &sys, &bath, BitterySpec::new(1), 5.0, t).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "log_value,log_multiplicity,tag");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].ends_with("S1:0"));
    }
}
