//! Energy, entropy and free-energy accounting for the two kinds of work
//! storage: the bittery (n degenerate qubits) and the weight (an equally
//! spaced ladder).
//!
//! Bittery states are mixtures of `xi^(l) = 2^-l 1_(2^l) (x) |0><0|^(n-l)`.
//! Their supports are nested, so the `2^n` diagonal has at most one distinct
//! value per branch and is never materialized for the entropy.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extraction::{MixedCells, SchemeKind, SchemeSpec};
use crate::model::{Temperature, Translation, WeightLadder, NORMALIZATION_TOLERANCE};
use crate::numeric::{log_diff_exp, log_sum_exp};

/// One component of a bittery mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// `xi^(l)`: the first `l` qubits maximally mixed, the rest reset.
    Pure(u32),
    /// The initial maximally mixed state `rho_A = xi^(n)`.
    Initial,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum BitteryDescription {
    Pure { mixed: u32 },
    Mixture { branches: Vec<(f64, Branch)> },
}

/// Diagonal state of an `n`-cell bittery. The diagonal is indexed with the
/// first qubit as the least significant bit, so `xi^(l)` lives on `[0, 2^l)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BitteryState {
    cells: u32,
    description: BitteryDescription,
}

/// Indices `[start, end)` of the diagonal sharing one value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalClass {
    pub log_count: f64,
    pub log_value: f64,
}

impl BitteryState {
    pub fn pure(cells: u32, mixed: u32) -> Result<Self> {
        if mixed > cells {
            return Err(Error::InvalidRange(format!("{mixed} mixed cells in an {cells}-cell bittery")));
        }
        Ok(Self { cells, description: BitteryDescription::Pure { mixed } })
    }

    pub fn initial(cells: u32) -> Self {
        Self { cells, description: BitteryDescription::Pure { mixed: cells } }
    }

    pub fn mixture(cells: u32, branches: Vec<(f64, Branch)>) -> Result<Self> {
        let mut total = 0.0;
        for &(p, b) in &branches {
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::InvalidDistribution(format!("branch probability {p}")));
            }
            if let Branch::Pure(l) = b {
                if l > cells {
                    return Err(Error::InvalidRange(format!("{l} mixed cells in an {cells}-cell bittery")));
                }
            }
            total += p;
        }
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("branch probabilities sum to {total}")));
        }
        Ok(Self { cells, description: BitteryDescription::Mixture { branches } })
    }

    pub fn cells(&self) -> u32 {
        self.cells
    }

    pub fn description(&self) -> &BitteryDescription {
        &self.description
    }

    /// `(l, P(l))` with equal `l` merged and zero weights dropped, sorted by `l`.
    pub fn branch_weights(&self) -> Vec<(u32, f64)> {
        let raw: Vec<(u32, f64)> = match &self.description {
            BitteryDescription::Pure { mixed } => vec![(*mixed, 1.0)],
            BitteryDescription::Mixture { branches } => branches
                .iter()
                .map(|&(p, b)| match b {
                    Branch::Pure(l) => (l, p),
                    Branch::Initial => (self.cells, p),
                })
                .collect(),
        };
        let mut merged: Vec<(u32, f64)> = Vec::new();
        let mut sorted = raw;
        sorted.sort_by_key(|&(l, _)| l);
        for (l, p) in sorted {
            if p <= 0.0 {
                continue;
            }
            match merged.last_mut() {
                Some((ll, pp)) if *ll == l => *pp += p,
                _ => merged.push((l, p)),
            }
        }
        merged
    }

    /// Distinct diagonal values with their counts, innermost support first.
    pub fn diagonal_classes(&self) -> Vec<DiagonalClass> {
        let weights = self.branch_weights();
        let mut classes = Vec::with_capacity(weights.len());
        for i in 0..weights.len() {
            let l = weights[i].0 as f64;
            let log_count = if i == 0 {
                l * LN_2
            } else {
                log_diff_exp(l * LN_2, weights[i - 1].0 as f64 * LN_2)
            };
            let terms: Vec<f64> = weights[i..]
                .iter()
                .map(|&(lj, pj)| pj.ln() - lj as f64 * LN_2)
                .collect();
            classes.push(DiagonalClass { log_count, log_value: log_sum_exp(&terms) });
        }
        classes
    }

    /// Full `2^n` diagonal; `None` above 20 cells.
    pub fn diagonal(&self) -> Option<Vec<f64>> {
        if self.cells > 20 {
            return None;
        }
        let mut diag = vec![0.0; 1usize << self.cells];
        for (l, p) in self.branch_weights() {
            let width = 1usize << l;
            for d in &mut diag[..width] {
                *d += p / width as f64;
            }
        }
        Some(diag)
    }

    /// Von Neumann entropy in nats, exact up to rounding.
    pub fn entropy(&self) -> f64 {
        self.diagonal_classes()
            .iter()
            .map(|c| -(c.log_count + c.log_value).exp() * c.log_value)
            .sum()
    }
}

fn checked_distribution(
    cells_range: MixedCells,
    distribution: Option<&[(u32, f64)]>,
) -> Result<Vec<(u32, f64)>> {
    let dist: Vec<(u32, f64)> = match distribution {
        Some(d) => d.to_vec(),
        None => {
            let width = (cells_range.hi - cells_range.lo + 1) as f64;
            (cells_range.lo..=cells_range.hi).map(|l| (l, 1.0 / width)).collect()
        }
    };
    let mut total = 0.0;
    for &(l, p) in &dist {
        if !(p.is_finite() && p >= 0.0) {
            return Err(Error::InvalidDistribution(format!("P_A({l}) = {p}")));
        }
        if p > 0.0 && (l < cells_range.lo || l > cells_range.hi) {
            return Err(Error::UnsupportedRange { level: l, lo: cells_range.lo, hi: cells_range.hi });
        }
        total += p;
    }
    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::InvalidDistribution(format!("P_A sums to {total}")));
    }
    Ok(dist)
}

/// Success branch `sum_l P_A(l) xi^(l)` of a scheme. Deterministic schemes
/// ignore `distribution`; the others default to uniform over the range.
pub fn success_branch(
    scheme: &SchemeSpec,
    cells: u32,
    cells_range: MixedCells,
    distribution: Option<&[(u32, f64)]>,
) -> Result<BitteryState> {
    scheme.validate()?;
    cells_range.validate(scheme, cells)?;
    if scheme.kind() == SchemeKind::Deterministic {
        return BitteryState::pure(cells, cells_range.lo);
    }
    let dist = checked_distribution(cells_range, distribution)?;
    BitteryState::mixture(cells, dist.into_iter().map(|(l, p)| (p, Branch::Pure(l))).collect())
}

/// `sigma_A = eps rho_A + (1 - eps) success`. The guaranteed scheme is the
/// bounded one with `m1 = 0`.
pub fn final_bittery_state(
    scheme: &SchemeSpec,
    cells: u32,
    cells_range: MixedCells,
    distribution: Option<&[(u32, f64)]>,
) -> Result<BitteryState> {
    let success = success_branch(scheme, cells, cells_range, distribution)?;
    let eps = scheme.epsilon();
    if eps == 0.0 {
        return Ok(success);
    }
    let mut branches = vec![(eps, Branch::Initial)];
    branches.extend(
        success
            .branch_weights()
            .into_iter()
            .map(|(l, p)| ((1.0 - eps) * p, Branch::Pure(l))),
    );
    BitteryState::mixture(cells, branches)
}

pub fn bittery_entropy(state: &BitteryState) -> f64 {
    state.entropy()
}

/// Energy, entropy and free-energy change of a storage system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StorageLedger {
    pub delta_e: f64,
    /// In nats.
    pub delta_s: f64,
    pub delta_f: f64,
    /// `kT delta_s` when the entropy grows, else zero.
    pub heat_like: f64,
}

impl StorageLedger {
    pub fn new(delta_e: f64, delta_s: f64, temp: Temperature) -> Self {
        let kt = temp.kt();
        Self {
            delta_e,
            delta_s,
            delta_f: delta_e - kt * delta_s,
            heat_like: if delta_s > 0.0 { kt * delta_s } else { 0.0 },
        }
    }
}

/// The two links `S(mix) < sum P(l)[l ln 2 - ln P(l)] <= ln(m2 - m1 + 1) + m2 ln 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyChain {
    pub mixture_entropy: f64,
    pub branch_bound: f64,
    pub range_bound: f64,
    /// `branch_bound - mixture_entropy`, computed as the entropy of the
    /// branch label conditioned on the diagonal outcome. It vanishes only
    /// for orthogonal supports, i.e. a single branch here.
    pub overlap_gap: f64,
    pub support_points: usize,
}

impl EntropyChain {
    fn of(success: &BitteryState, cells_range: MixedCells) -> Self {
        let weights = success.branch_weights();
        let branch_bound: f64 = weights
            .iter()
            .map(|&(l, p)| p * (l as f64 * LN_2 - p.ln()))
            .sum();
        let range_bound = ((cells_range.hi - cells_range.lo + 1) as f64).ln() + cells_range.hi as f64 * LN_2;

        let classes = success.diagonal_classes();
        let mut gap = 0.0;
        for (i, class) in classes.iter().enumerate() {
            let mut h = 0.0;
            for &(l, p) in &weights[i..] {
                let q = (p.ln() - l as f64 * LN_2 - class.log_value).exp();
                if q > 0.0 {
                    h -= q * q.ln();
                }
            }
            gap += (class.log_count + class.log_value).exp() * h;
        }
        Self {
            mixture_entropy: success.entropy(),
            branch_bound,
            range_bound,
            overlap_gap: gap,
            support_points: weights.len(),
        }
    }

    /// Every link holds: the first strictly with two or more branches, and
    /// the gap agrees with the direct difference.
    pub fn holds(&self) -> bool {
        let tol = 1e-12 * self.branch_bound.abs().max(1.0);
        let first = if self.support_points >= 2 {
            self.overlap_gap > 0.0 && self.mixture_entropy <= self.branch_bound
        } else {
            self.mixture_entropy <= self.branch_bound + tol
        };
        let consistent = (self.branch_bound - self.mixture_entropy - self.overlap_gap).abs() <= tol;
        first && consistent && self.branch_bound <= self.range_bound + tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyCertificate {
    pub ledger: StorageLedger,
    /// `S(success branch) - S(rho_A)`.
    pub delta_s: f64,
    /// `delta_s < 0`: the bittery lost entropy, so it stored free energy
    /// without acting as an entropy sink.
    pub decreases: bool,
    /// `n - m2 >= log2(m2 - m1 + 1)`.
    pub sufficient_condition: bool,
    pub chain: EntropyChain,
    /// Entropy of the full mixture including the failure branch.
    pub full_entropy: f64,
}

fn range_condition(cells: u32, cells_range: MixedCells) -> bool {
    let free = cells - cells_range.hi;
    let width = (cells_range.hi - cells_range.lo + 1) as u64;
    free >= 64 || (1u64 << free) >= width
}

/// Exact entropy change of the bittery in the event of success.
pub fn entropy_change_certificate(
    scheme: &SchemeSpec,
    cells: u32,
    cells_range: MixedCells,
    distribution: Option<&[(u32, f64)]>,
    temp: Temperature,
) -> Result<EntropyCertificate> {
    let success = success_branch(scheme, cells, cells_range, distribution)?;
    let full = final_bittery_state(scheme, cells, cells_range, distribution)?;
    let delta_s = success.entropy() - cells as f64 * LN_2;
    Ok(EntropyCertificate {
        ledger: StorageLedger::new(0.0, delta_s, temp),
        delta_s,
        decreases: delta_s < 0.0,
        sufficient_condition: range_condition(cells, cells_range),
        chain: EntropyChain::of(&success, cells_range),
        full_entropy: full.entropy(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdditionalWork {
    /// `kT ln sum_{w = w_min}^{w_max} exp(-beta (w - w_min))`, summed term by term.
    pub value: f64,
    /// The same quantity from the geometric-series formula.
    pub closed_form: f64,
    pub terms: u64,
}

/// Extra energy a ladder weight absorbs when the extracted work spreads over
/// `[w_min, w_max]`. Depends only on the spacing and the number of levels in
/// the window.
pub fn weight_additional_work(
    ladder: &WeightLadder,
    w_min: f64,
    w_max: f64,
    temp: Temperature,
) -> Result<AdditionalWork> {
    let lo = ladder.index_of(w_min)?;
    let hi = ladder.index_of(w_max)?;
    if hi < lo {
        return Err(Error::InvalidRange(format!("w_max = {w_max} below w_min = {w_min}")));
    }
    let terms = hi - lo + 1;
    let step = temp.beta() * ladder.spacing();
    let logs: Vec<f64> = (0..terms).map(|j| -step * j as f64).collect();
    let value = temp.kt() * log_sum_exp(&logs);
    let closed_form = temp.kt() * ((-(-step * terms as f64).exp_m1()).ln() - (-(-step).exp_m1()).ln());
    Ok(AdditionalWork { value, closed_form, terms })
}

/// `ln(W_add(L + 1) - W_add(L))` for a window of `levels` ladder steps.
///
/// The increment `kT ln(1 + q^L (1 - q) / (1 - q^L))`, `q = exp(-beta d)`,
/// drops below the resolution of `W_add` long before it vanishes, so it is
/// returned as a logarithm.
pub fn additional_work_log_increment(spacing: f64, levels: u64, temp: Temperature) -> f64 {
    let step = temp.beta() * spacing;
    let log_x = -step * levels as f64 + (-(-step).exp_m1()).ln() - (-(-step * levels as f64).exp_m1()).ln();
    let log_ln1p = if log_x < -30.0 { log_x + (-0.5 * log_x.exp()).ln_1p() } else { log_x.exp().ln_1p().ln() };
    temp.kt().ln() + log_ln1p
}

/// Weight transition `|x> -> sum_w P_W(w) |x + w>` in the event of success.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightTransition {
    initial_level: f64,
    distribution: Vec<(f64, f64)>,
}

impl WeightTransition {
    pub fn new(ladder: &WeightLadder, initial_level: f64, distribution: Vec<(f64, f64)>) -> Result<Self> {
        let start = ladder.index_of(initial_level)?;
        let mut total = 0.0;
        for &(w, p) in &distribution {
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::InvalidDistribution(format!("P_W({w}) = {p}")));
            }
            if p == 0.0 {
                continue;
            }
            if w <= 0.0 {
                return Err(Error::InvalidDistribution(format!("work values must be positive, got {w}")));
            }
            let steps = w / ladder.spacing();
            let rounded = steps.round();
            if (steps - rounded).abs() > crate::model::GRID_TOLERANCE * steps.abs().max(1.0) {
                return Err(Error::OffGrid { value: w });
            }
            if ladder.translate(start, rounded as i64) == Translation::Truncated {
                return Err(Error::OffGrid { value: initial_level + w });
            }
            total += p;
        }
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("P_W sums to {total}")));
        }
        Ok(Self { initial_level, distribution })
    }

    /// `P_W(w) ∝ exp(-beta (w - w_min))` on the ladder steps of `[w_min, w_max]`.
    pub fn thermal(
        ladder: &WeightLadder,
        initial_level: f64,
        w_min: f64,
        w_max: f64,
        temp: Temperature,
    ) -> Result<Self> {
        if w_max < w_min {
            return Err(Error::InvalidRange(format!("w_max = {w_max} below w_min = {w_min}")));
        }
        let steps = ((w_max - w_min) / ladder.spacing()).round() as u64;
        let logs: Vec<f64> = (0..=steps)
            .map(|j| -temp.beta() * ladder.spacing() * j as f64)
            .collect();
        let log_z = log_sum_exp(&logs);
        let distribution = logs
            .iter()
            .enumerate()
            .map(|(j, lw)| (w_min + j as f64 * ladder.spacing(), (lw - log_z).exp()))
            .collect();
        Self::new(ladder, initial_level, distribution)
    }

    pub fn initial_level(&self) -> f64 {
        self.initial_level
    }

    pub fn distribution(&self) -> &[(f64, f64)] {
        &self.distribution
    }

    pub fn w_min(&self) -> f64 {
        self.support().fold(f64::INFINITY, f64::min)
    }

    pub fn w_max(&self) -> f64 {
        self.support().fold(f64::NEG_INFINITY, f64::max)
    }

    fn support(&self) -> impl Iterator<Item = f64> + '_ {
        self.distribution.iter().filter(|(_, p)| *p > 0.0).map(|(w, _)| *w)
    }
}

/// Ledger of a weight that starts in a pure level.
pub fn weight_ledger(transition: &WeightTransition, temp: Temperature) -> StorageLedger {
    let mut delta_e = 0.0;
    let mut delta_s = 0.0;
    for &(w, p) in transition.distribution() {
        if p > 0.0 {
            delta_e += p * w;
            delta_s -= p * p.ln();
        }
    }
    StorageLedger::new(delta_e, delta_s, temp)
}

/// Ledger of the bittery's success branch: `delta_e = 0`.
pub fn bittery_ledger(certificate: &EntropyCertificate) -> StorageLedger {
    certificate.ledger
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(eps: f64) -> SchemeSpec {
        SchemeSpec::Deterministic { epsilon: eps }
    }

    #[test]
    fn final_state_examples() {
        let s = final_bittery_state(&det(0.0), 2, MixedCells::single(0), None).unwrap();
        assert_eq!(s.diagonal().unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(s.description(), &BitteryDescription::Pure { mixed: 0 });

        let s = final_bittery_state(&det(0.2), 1, MixedCells::single(0), None).unwrap();
        let d = s.diagonal().unwrap();
        assert!((d[0] - 0.9).abs() < 1e-15 && (d[1] - 0.1).abs() < 1e-15);

        let bounded = SchemeSpec::Bounded { epsilon: 0.1, c: 2 };
        let concentrated = final_bittery_state(&bounded, 5, MixedCells::window(1, 3), Some(&[(1, 1.0)])).unwrap();
        let deterministic = final_bittery_state(&det(0.1), 5, MixedCells::single(1), None).unwrap();
        assert_eq!(concentrated.diagonal(), deterministic.diagonal());
    }

    #[test]
    fn guaranteed_is_bounded_from_zero() {
        let g = SchemeSpec::Guaranteed { epsilon: 0.25 };
        let b = SchemeSpec::Bounded { epsilon: 0.25, c: 3 };
        let p = [(0, 0.1), (1, 0.2), (2, 0.3), (3, 0.4)];
        let sg = final_bittery_state(&g, 6, MixedCells::window(0, 3), Some(&p)).unwrap();
        let sb = final_bittery_state(&b, 6, MixedCells::window(0, 3), Some(&p)).unwrap();
        assert_eq!(sg, sb);
        assert!(final_bittery_state(&g, 6, MixedCells::window(1, 3), Some(&p)).is_err());
    }

    #[test]
    fn distribution_outside_range() {
        let b = SchemeSpec::Bounded { epsilon: 0.0, c: 1 };
        assert!(matches!(
            final_bittery_state(&b, 4, MixedCells::window(1, 2), Some(&[(1, 0.5), (3, 0.5)])),
            Err(Error::UnsupportedRange { level: 3, .. })
        ));
    }

    #[test]
    fn entropy_examples() {
        for (n, m) in [(3, 0), (3, 2), (10, 7)] {
            let s = BitteryState::pure(n, m).unwrap();
            assert!((s.entropy() - m as f64 * LN_2).abs() < 1e-12);
        }
        let mix = BitteryState::mixture(1, vec![(0.5, Branch::Pure(0)), (0.5, Branch::Pure(1))]).unwrap();
        let expected = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        assert!((mix.entropy() - expected).abs() < 1e-15);
        assert!((expected - 0.562335).abs() < 1e-6);
        assert!((BitteryState::initial(40).entropy() - 40.0 * LN_2).abs() < 1e-12);
    }

    #[test]
    fn entropy_matches_dense_diagonal() {
        let mix = BitteryState::mixture(
            6,
            vec![(0.2, Branch::Pure(1)), (0.3, Branch::Pure(4)), (0.1, Branch::Initial), (0.4, Branch::Pure(2))],
        )
        .unwrap();
        let dense: f64 = mix
            .diagonal()
            .unwrap()
            .iter()
            .filter(|&&x| x > 0.0)
            .map(|&x| -x * x.ln())
            .sum();
        assert!((mix.entropy() - dense).abs() < 1e-13);
    }

    #[test]
    fn entropy_of_huge_bittery() {
        let mix = BitteryState::mixture(5000, vec![(0.5, Branch::Pure(4000)), (0.5, Branch::Pure(4001))]).unwrap();
        let s = mix.entropy();
        assert!(s > 4000.0 * LN_2 && s < 4001.0 * LN_2 + LN_2);
    }

    #[test]
    fn certificate_examples() {
        let t = Temperature::default();
        let c = entropy_change_certificate(&det(0.0), 5, MixedCells::single(2), None, t).unwrap();
        assert!((c.delta_s + 3.0 * LN_2).abs() < 1e-12);
        assert!(c.decreases);
        assert_eq!(c.ledger.delta_e, 0.0);
        assert!((c.ledger.delta_f - 3.0 * LN_2).abs() < 1e-12);

        let b = SchemeSpec::Bounded { epsilon: 0.0, c: 1 };
        let c = entropy_change_certificate(&b, 4, MixedCells::window(1, 2), Some(&[(1, 0.5), (2, 0.5)]), t).unwrap();
        assert!(c.decreases);
        assert!(c.sufficient_condition);
        assert!(c.chain.holds());
        assert!(c.chain.mixture_entropy < c.chain.branch_bound);
        assert!(c.chain.overlap_gap > 0.0);
    }

    #[test]
    fn failure_branch_raises_full_entropy() {
        let t = Temperature::default();
        let c = entropy_change_certificate(&det(0.3), 4, MixedCells::single(1), None, t).unwrap();
        assert!(c.full_entropy > 1.0 * LN_2);
        assert!((c.delta_s + 3.0 * LN_2).abs() < 1e-12);
    }

    #[test]
    fn additional_work_examples() {
        let t = Temperature::default();
        let ladder = WeightLadder::new(LN_2, 10, 0.0).unwrap();
        let single = weight_additional_work(&ladder, 3.0 * LN_2, 3.0 * LN_2, t).unwrap();
        assert_eq!(single.value, 0.0);
        let two = weight_additional_work(&ladder, LN_2, 2.0 * LN_2, t).unwrap();
        assert!((two.value - 1.5f64.ln()).abs() < 1e-15);
        assert!((two.closed_form - two.value).abs() < 1e-12);
        let inc = additional_work_log_increment(LN_2, 1, t).exp();
        assert!((inc - two.value).abs() < 1e-15);
        assert!(additional_work_log_increment(3.0, 400, t).is_finite());
        assert!(matches!(
            weight_additional_work(&ladder, 0.5, 2.0 * LN_2, t),
            Err(Error::OffGrid { .. })
        ));
    }

    #[test]
    fn weight_ledger_examples() {
        let t = Temperature::from_kt(2.0).unwrap();
        let ladder = WeightLadder::new(0.5, 20, 0.0).unwrap();
        let det = WeightTransition::new(&ladder, 0.0, vec![(1.5, 1.0)]).unwrap();
        let l = weight_ledger(&det, t);
        assert_eq!(l.delta_s, 0.0);
        assert_eq!(l.delta_f, 1.5);
        assert_eq!(l.heat_like, 0.0);

        let two = WeightTransition::new(&ladder, 0.0, vec![(1.5, 0.5), (2.0, 0.5)]).unwrap();
        let l = weight_ledger(&two, t);
        assert!((l.delta_s - LN_2).abs() < 1e-15);
        assert!((l.heat_like - 2.0 * LN_2).abs() < 1e-15);
        assert!((l.delta_f - (1.5 + 0.25 - 2.0 * LN_2)).abs() < 1e-15);
        assert!((l.delta_f - (l.delta_e - 2.0 * l.delta_s)).abs() < 1e-15);
    }

    #[test]
    fn thermal_weight_transition_is_an_entropy_sink() {
        let t = Temperature::default();
        let ladder = WeightLadder::new(0.3, 50, 0.0).unwrap();
        let tr = WeightTransition::thermal(&ladder, 0.0, 0.6, 3.0, t).unwrap();
        let l = weight_ledger(&tr, t);
        assert!(l.delta_s > 0.0);
        assert!((l.delta_e - l.delta_f - l.delta_s).abs() < 1e-12);
        // the free energy left for work is w_min minus the additional contribution
        let add = weight_additional_work(&ladder, 0.6, 3.0, t).unwrap();
        assert!((l.delta_f - (0.6 - add.value)).abs() < 1e-12);
    }

    #[test]
    fn weight_transition_validation() {
        let ladder = WeightLadder::new(0.5, 4, 0.0).unwrap();
        assert!(WeightTransition::new(&ladder, 0.0, vec![(0.0, 1.0)]).is_err());
        assert!(WeightTransition::new(&ladder, 0.0, vec![(0.7, 1.0)]).is_err());
        assert!(WeightTransition::new(&ladder, 0.0, vec![(2.0, 1.0)]).is_err());
        assert!(WeightTransition::new(&ladder, 0.0, vec![(1.0, 0.6)]).is_err());
        let ok = WeightTransition::new(&ladder, 0.0, vec![(0.5, 0.25), (1.5, 0.75)]).unwrap();
        assert_eq!(ok.w_min(), 0.5);
        assert_eq!(ok.w_max(), 1.5);
    }
}
