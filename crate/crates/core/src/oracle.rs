//! Exact brute-force checks on small explicit instances.
//!
//! Energies are integer multiples of a unit `u` and the temperature is fixed
//! by `exp(-beta u) = 1 / base`, so every Boltzmann factor and every shell
//! entry is an exact rational. Reachability of a final diagonal inside a
//! shell is decided by majorization against the shell spectrum.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extraction::{max_work, SchemeKind};
use crate::model::{DiagonalState, ExplicitBath, SystemSpec, Temperature};
use crate::shell::majorizes_values;

pub const DEFAULT_DIMENSION_CAP: usize = 4096;

fn rational(numer: u64, denom: u64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

fn power(base: u32, exp: u32) -> BigInt {
    num_traits::pow(BigInt::from(base), exp as usize)
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Small system, bath, state and bittery with integer energies.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactInstance {
    base: u32,
    system: Vec<(u32, u64)>,
    bath: Vec<(u32, u64)>,
    probabilities: Vec<Vec<BigRational>>,
    cells: u32,
}

fn check_levels(levels: &[(u32, u64)], what: &str) -> std::result::Result<(), String> {
    if levels.is_empty() {
        return Err(format!("{what} has no levels"));
    }
    for (i, &(e, m)) in levels.iter().enumerate() {
        if m == 0 {
            return Err(format!("{what} level {i} has zero multiplicity"));
        }
        if i > 0 && e <= levels[i - 1].0 {
            return Err(format!("{what} energies must be strictly increasing (level {i})"));
        }
    }
    Ok(())
}

impl ExactInstance {
    pub fn new(
        base: u32,
        system: Vec<(u32, u64)>,
        bath: Vec<(u32, u64)>,
        probabilities: Vec<Vec<BigRational>>,
        cells: u32,
    ) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidTemperature(f64::from(base).ln()));
        }
        check_levels(&system, "system").map_err(Error::InvalidSystem)?;
        if system[0].0 != 0 {
            return Err(Error::InvalidSystem("minimum energy must be exactly 0".into()));
        }
        check_levels(&bath, "bath").map_err(Error::InvalidBath)?;
        if probabilities.len() != system.len() {
            return Err(Error::InvalidState(format!(
                "state has {} levels, system has {}",
                probabilities.len(),
                system.len()
            )));
        }
        let mut total = BigRational::zero();
        for (i, (ps, &(_, m))) in probabilities.iter().zip(&system).enumerate() {
            if ps.len() as u64 != m {
                return Err(Error::InvalidState(format!("level {i} needs {m} probabilities, got {}", ps.len())));
            }
            for p in ps {
                if p.is_negative() {
                    return Err(Error::InvalidState(format!("negative probability {p}")));
                }
                total += p;
            }
        }
        if !total.is_one() {
            return Err(Error::InvalidState(format!("probabilities sum to {total}, expected 1")));
        }
        Ok(Self { base, system, bath, probabilities, cells })
    }

    /// Gibbs state of the system at the instance temperature.
    pub fn thermal(base: u32, system: Vec<(u32, u64)>, bath: Vec<(u32, u64)>, cells: u32) -> Result<Self> {
        check_levels(&system, "system").map_err(Error::InvalidSystem)?;
        let top = system.last().map_or(0, |l| l.0);
        let weights: Vec<BigRational> = system
            .iter()
            .map(|&(e, _)| BigRational::from_integer(power(base.max(2), top - e)))
            .collect();
        let z: BigRational = weights.iter().zip(&system).map(|(w, &(_, m))| w * BigInt::from(m)).sum();
        let probabilities = weights
            .iter()
            .zip(&system)
            .map(|(w, &(_, m))| vec![w / &z; m as usize])
            .collect();
        Self::new(base, system, bath, probabilities, cells)
    }

    /// Pure state on the first index of level `level`.
    pub fn pure(base: u32, system: Vec<(u32, u64)>, bath: Vec<(u32, u64)>, level: usize, cells: u32) -> Result<Self> {
        let probabilities = system
            .iter()
            .enumerate()
            .map(|(i, &(_, m))| {
                let mut ps = vec![BigRational::zero(); m as usize];
                if i == level {
                    ps[0] = BigRational::one();
                }
                ps
            })
            .collect();
        Self::new(base, system, bath, probabilities, cells)
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn cells(&self) -> u32 {
        self.cells
    }

    pub fn with_cells(&self, cells: u32) -> Self {
        Self { cells, ..self.clone() }
    }

    pub fn probabilities(&self) -> &[Vec<BigRational>] {
        &self.probabilities
    }

    /// `beta = ln(base)` per energy unit.
    pub fn temperature(&self) -> Temperature {
        Temperature::from_beta(f64::from(self.base).ln()).expect("base >= 2")
    }

    pub fn system_spec(&self) -> SystemSpec {
        SystemSpec::new(self.system.iter().map(|&(e, m)| (f64::from(e), m))).expect("validated levels")
    }

    pub fn explicit_bath(&self) -> ExplicitBath {
        ExplicitBath::new(self.bath.iter().map(|&(e, m)| (f64::from(e), m))).expect("validated levels")
    }

    pub fn diagonal_state(&self) -> Result<DiagonalState> {
        let ps: Vec<Vec<f64>> = self
            .probabilities
            .iter()
            .map(|level| level.iter().map(to_f64).collect())
            .collect();
        DiagonalState::from_probabilities(&self.system_spec(), &ps)
    }

    pub fn is_thermal(&self) -> bool {
        let reference = Self::thermal(self.base, self.system.clone(), self.bath.clone(), self.cells);
        reference.is_ok_and(|r| r.probabilities == self.probabilities)
    }

    /// `Z_B` with `exp(-beta E_B) = base^-E_B`.
    pub fn bath_partition_function(&self) -> BigRational {
        self.bath
            .iter()
            .map(|&(e, m)| BigRational::new(BigInt::from(m), power(self.base, e)))
            .sum()
    }

    fn bath_multiplicity(&self, energy: i64) -> Option<u64> {
        self.bath.iter().find(|&&(e, _)| i64::from(e) == energy).map(|&(_, m)| m)
    }

    /// Every total energy `E_S + E_B`, ascending.
    pub fn shell_energies(&self) -> Vec<u32> {
        let mut es: Vec<u32> = self
            .system
            .iter()
            .flat_map(|&(s, _)| self.bath.iter().map(move |&(b, _)| s + b))
            .collect();
        es.sort_unstable();
        es.dedup();
        es
    }

    /// Shells in which every system level meets a bath level.
    pub fn bulk_energies(&self) -> Vec<u32> {
        self.shell_energies()
            .into_iter()
            .filter(|&e| {
                self.system
                    .iter()
                    .all(|&(s, _)| self.bath_multiplicity(i64::from(e) - i64::from(s)).is_some())
            })
            .collect()
    }
}

impl fmt::Display for ExactInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let levels = |ls: &[(u32, u64)]| {
            ls.iter().map(|(e, m)| format!("{e}:{m}")).collect::<Vec<_>>().join(",")
        };
        let ps = self
            .probabilities
            .iter()
            .map(|l| l.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join("|");
        write!(
            f,
            "base={} system=[{}] bath=[{}] p=[{}] n={}",
            self.base,
            levels(&self.system),
            levels(&self.bath),
            ps,
            self.cells
        )
    }
}

/// Product-basis label `(E_S, g_S, g_B, g_A)` of a shell entry, with the
/// system level given by its index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ShellTag {
    pub system_level: usize,
    pub system_index: u64,
    pub bath_index: u64,
    pub bittery_index: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShellEntry {
    pub value: BigRational,
    pub tag: ShellTag,
}

/// `r^E` expanded entry by entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitShell {
    energy: u32,
    cells: u32,
    entries: Vec<ShellEntry>,
}

impl ExplicitShell {
    pub fn energy(&self) -> u32 {
        self.energy
    }

    pub fn dimension(&self) -> usize {
        self.entries.len()
    }

    /// Dimension of the system-bath part of the shell.
    pub fn system_bath_dimension(&self) -> u64 {
        (self.entries.len() >> self.cells) as u64
    }

    pub fn entries(&self) -> &[ShellEntry] {
        &self.entries
    }

    pub fn values(&self) -> Vec<BigRational> {
        self.entries.iter().map(|e| e.value.clone()).collect()
    }

    pub fn trace(&self) -> BigRational {
        self.entries.iter().map(|e| &e.value).sum()
    }

    /// Distinct nonzero values with their counts, largest first.
    pub fn value_classes(&self) -> Vec<(BigRational, u64)> {
        group_classes(self.values())
    }
}

fn group_classes(mut values: Vec<BigRational>) -> Vec<(BigRational, u64)> {
    values.retain(|v| !v.is_zero());
    values.sort_by(|a, b| b.cmp(a));
    let mut classes: Vec<(BigRational, u64)> = Vec::new();
    for v in values {
        match classes.last_mut() {
            Some((last, c)) if *last == v => *c += 1,
            _ => classes.push((v, 1)),
        }
    }
    classes
}

/// Expand the shell at total energy `energy` with entries
/// `p(E_S, g_S) base^-E_B / Z_B 2^-n`.
pub fn explicit_shell(instance: &ExactInstance, energy: u32, cap: usize) -> Result<ExplicitShell> {
    let bittery = 1u64.checked_shl(instance.cells).unwrap_or(u64::MAX);
    let mut pairs = Vec::new();
    let mut dimension: u128 = 0;
    for (level, &(s, ms)) in instance.system.iter().enumerate() {
        let eb = i64::from(energy) - i64::from(s);
        if let Some(mb) = instance.bath_multiplicity(eb) {
            dimension += u128::from(ms) * u128::from(mb) * u128::from(bittery);
            pairs.push((level, ms, eb as u32, mb));
        }
    }
    if pairs.is_empty() {
        return Err(Error::EmptyShell {
            energy: f64::from(energy),
            reason: "no system level meets a bath level".into(),
        });
    }
    if dimension > cap as u128 {
        return Err(Error::DimensionCap { dimension: usize::try_from(dimension).unwrap_or(usize::MAX), cap });
    }
    let scale = instance.bath_partition_function() * BigInt::from(bittery);
    let mut entries = Vec::with_capacity(dimension as usize);
    for (level, ms, eb, mb) in pairs {
        let bath_factor = BigRational::new(BigInt::one(), power(instance.base, eb)) / &scale;
        for g_s in 0..ms {
            let value = &instance.probabilities[level][g_s as usize] * &bath_factor;
            for g_b in 0..mb {
                for g_a in 0..bittery {
                    entries.push(ShellEntry {
                        value: value.clone(),
                        tag: ShellTag { system_level: level, system_index: g_s, bath_index: g_b, bittery_index: g_a },
                    });
                }
            }
        }
    }
    Ok(ExplicitShell { energy, cells: instance.cells, entries })
}

fn class_trace(classes: &[(BigRational, u64)]) -> BigRational {
    classes.iter().map(|(v, c)| v * BigInt::from(*c)).sum()
}

/// Sum of the `j` largest entries.
fn prefix(classes: &[(BigRational, u64)], j: u64) -> BigRational {
    let mut left = j;
    let mut sum = BigRational::zero();
    for (v, c) in classes {
        let take = left.min(*c);
        sum += v * BigInt::from(take);
        left -= take;
        if left == 0 {
            break;
        }
    }
    sum
}

/// Exact majorization of class-grouped vectors. Both prefix-sum curves are
/// piecewise linear, so the union of class boundaries suffices.
pub fn majorizes_exact(x: &[(BigRational, u64)], t: &[(BigRational, u64)]) -> Result<bool> {
    let (tx, tt) = (class_trace(x), class_trace(t));
    if tx != tt {
        return Err(Error::TraceMismatch { left: to_f64(&tx), right: to_f64(&tt) });
    }
    let mut cuts: Vec<u64> = Vec::new();
    for classes in [x, t] {
        let mut acc = 0u64;
        for (_, c) in classes {
            acc += c;
            cuts.push(acc);
        }
    }
    cuts.sort_unstable();
    cuts.dedup();
    Ok(cuts.into_iter().all(|j| prefix(x, j) >= prefix(t, j)))
}

/// True iff some unitary on the shell maps it to a state with diagonal
/// `target`: the shell spectrum must majorize the target.
pub fn reachable(target: &[BigRational], shell: &ExplicitShell) -> Result<bool> {
    if target.iter().any(Signed::is_negative) {
        return Err(Error::ExactMismatch("target has negative entries".into()));
    }
    majorizes_exact(&shell.value_classes(), &group_classes(target.to_vec()))
}

/// Keep the largest entries until `(1 - epsilon) tr` is reached; the last
/// kept entry is cut to fit.
pub fn truncate_exact(classes: &[(BigRational, u64)], epsilon: &BigRational) -> Vec<(BigRational, u64)> {
    let mut left = (BigRational::one() - epsilon) * class_trace(classes);
    let mut kept = Vec::new();
    for (v, c) in classes {
        if left.is_zero() {
            break;
        }
        let mass = v * BigInt::from(*c);
        if mass <= left {
            left -= mass;
            kept.push((v.clone(), *c));
            continue;
        }
        let whole = (&left / v).floor().to_integer().to_u64().expect("count fits");
        if whole > 0 {
            kept.push((v.clone(), whole));
        }
        let rest = &left - v * BigInt::from(whole);
        if !rest.is_zero() {
            kept.push((rest, 1));
        }
        break;
    }
    kept
}

/// Diagonal classes of `sum_l P(l) xi^(l)`, innermost support first.
fn bittery_classes(distribution: &[(u32, BigRational)]) -> Vec<(BigRational, u64)> {
    let mut dist: Vec<(u32, BigRational)> = distribution.iter().filter(|(_, p)| !p.is_zero()).cloned().collect();
    dist.sort_by_key(|(l, _)| *l);
    let mut classes = Vec::with_capacity(dist.len());
    for i in 0..dist.len() {
        let count = (1u64 << dist[i].0) - if i == 0 { 0 } else { 1u64 << dist[i - 1].0 };
        let value: BigRational = dist[i..]
            .iter()
            .map(|(l, p)| p / BigRational::from_integer(BigInt::one() << *l as usize))
            .sum();
        classes.push((value, count));
    }
    classes
}

/// Success-branch distributions the scheme must support when `k` cells are
/// reset at best: point masses on every admissible `l` and the uniform mix.
fn scheme_family(kind: SchemeKind, cells: u32, k: u32) -> Vec<Vec<(u32, BigRational)>> {
    let m1 = cells - k;
    let m2 = match kind {
        SchemeKind::Deterministic => m1,
        SchemeKind::Bounded { c } => (m1 + c).min(cells - 1),
        // k active cells, any number of them left mixed; the idle cells stay mixed
        SchemeKind::Guaranteed => cells - 1,
    };
    let mut family: Vec<Vec<(u32, BigRational)>> = (m1..=m2).map(|l| vec![(l, BigRational::one())]).collect();
    if m2 > m1 {
        let width = u64::from(m2 - m1 + 1);
        family.push((m1..=m2).map(|l| (l, rational(1, width))).collect());
    }
    family
}

struct PreparedShell {
    energy: u32,
    classes: Vec<(BigRational, u64)>,
    trace: BigRational,
    system_bath_dimension: u64,
}

/// Bulk shells of one instance, expanded once and reused across
/// `epsilon` and scheme.
pub struct OracleSession {
    instance: ExactInstance,
    shells: Vec<PreparedShell>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleOutcome {
    pub k: u32,
    pub shells_checked: usize,
    /// Shifting failure weight between shells would reset one more cell.
    pub uneven_allocation_helps: bool,
}

impl OracleSession {
    pub fn new(instance: &ExactInstance, cap: usize) -> Result<Self> {
        let energies = instance.bulk_energies();
        if energies.is_empty() {
            return Err(Error::InvalidBath("no shell contains every system level".into()));
        }
        let mut shells = Vec::with_capacity(energies.len());
        for e in energies {
            let shell = explicit_shell(instance, e, cap)?;
            let classes = shell.value_classes();
            let trace = class_trace(&classes);
            if trace.is_zero() {
                continue;
            }
            shells.push(PreparedShell { energy: e, classes, trace, system_bath_dimension: shell.system_bath_dimension() });
        }
        Ok(Self { instance: instance.clone(), shells })
    }

    pub fn shell_energies(&self) -> Vec<u32> {
        self.shells.iter().map(|s| s.energy).collect()
    }

    fn feasible(&self, epsilon: &BigRational, kind: SchemeKind, k: u32) -> Result<bool> {
        let keep = BigRational::one() - epsilon;
        let family = scheme_family(kind, self.instance.cells, k);
        for shell in &self.shells {
            let kept = truncate_exact(&shell.classes, epsilon);
            // the flat system-bath factor is majorized by every other choice
            let flat = &keep * &shell.trace / BigInt::from(shell.system_bath_dimension);
            for dist in &family {
                let target: Vec<(BigRational, u64)> = bittery_classes(dist)
                    .into_iter()
                    .map(|(v, c)| (&flat * v, c * shell.system_bath_dimension))
                    .collect();
                if !majorizes_exact(&kept, &target)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Failure weight needed in each shell to leave at most `2^m d_E` entries.
    fn needed_failure(&self, m: u32) -> BigRational {
        self.shells
            .iter()
            .map(|s| &s.trace - prefix(&s.classes, s.system_bath_dimension << m))
            .sum()
    }

    pub fn max_reset(&self, epsilon: &BigRational, kind: SchemeKind) -> Result<OracleOutcome> {
        if epsilon.is_negative() || *epsilon >= BigRational::one() {
            return Err(Error::InvalidEpsilon(to_f64(epsilon)));
        }
        let n = self.instance.cells;
        let mut k = 0;
        for candidate in (1..=n).rev() {
            if self.feasible(epsilon, kind, candidate)? {
                k = candidate;
                break;
            }
        }
        let uneven_allocation_helps = k < n && {
            let budget: BigRational = epsilon * self.shells.iter().map(|s| &s.trace).sum::<BigRational>();
            self.needed_failure(n - k - 1) <= budget
        };
        Ok(OracleOutcome { k, shells_checked: self.shells.len(), uneven_allocation_helps })
    }
}

/// Largest number of bittery cells that can be reset with failure weight at
/// most `epsilon` in every bulk shell.
pub fn brute_force_max_reset(instance: &ExactInstance, epsilon: &BigRational, kind: SchemeKind) -> Result<OracleOutcome> {
    OracleSession::new(instance, DEFAULT_DIMENSION_CAP)?.max_reset(epsilon, kind)
}

/// `sum h_eps base^-E_S` in exact arithmetic.
pub fn exact_smoothed_partition(instance: &ExactInstance, epsilon: &BigRational) -> BigRational {
    let mut blocks: Vec<(BigRational, BigRational)> = Vec::new();
    for (&(s, _), ps) in instance.system.iter().zip(&instance.probabilities) {
        let up = BigRational::from_integer(power(instance.base, s));
        for p in ps.iter().filter(|p| !p.is_zero()) {
            blocks.push((p * &up, up.recip()));
        }
    }
    blocks.sort_by(|a, b| b.0.cmp(&a.0));
    let mut left = BigRational::one() - epsilon;
    let mut sum = BigRational::zero();
    let mut i = 0;
    while i < blocks.len() && !left.is_zero() {
        let mut j = i;
        let mut weight = BigRational::zero();
        while j < blocks.len() && blocks[j].0 == blocks[i].0 {
            weight += &blocks[j].1;
            j += 1;
        }
        let mass = &blocks[i].0 * &weight;
        if mass <= left {
            left -= &mass;
            sum += weight;
        } else {
            sum += weight * (&left / mass);
            left = BigRational::zero();
        }
        i = j;
    }
    sum
}

/// Formula `k_star` for the same instance in floating point.
pub fn formula_k_star(instance: &ExactInstance, epsilon: &BigRational, kind: SchemeKind) -> Result<u32> {
    let scheme = kind.with_epsilon(to_f64(epsilon));
    let state = instance.diagonal_state()?;
    Ok(max_work(&state, &instance.system_spec(), &scheme, instance.temperature(), instance.cells)?.k_star)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub instance: String,
    pub scheme: String,
    pub epsilon: String,
    pub formula_k_star: u32,
    pub oracle_k: u32,
    pub agree: bool,
    pub shells_checked: usize,
    pub uneven_allocation_helps: bool,
}

pub fn compare(session: &OracleSession, epsilon: &BigRational, kind: SchemeKind) -> Result<OracleReport> {
    let outcome = session.max_reset(epsilon, kind)?;
    let formula = formula_k_star(&session.instance, epsilon, kind)?;
    Ok(OracleReport {
        instance: session.instance.to_string(),
        scheme: kind.name().to_string(),
        epsilon: epsilon.to_string(),
        formula_k_star: formula,
        oracle_k: outcome.k,
        agree: formula == outcome.k,
        shells_checked: outcome.shells_checked,
        uneven_allocation_helps: outcome.uneven_allocation_helps,
    })
}

/// Exponential baths `M_B(k) = c base^k`, for which the bath factor cancels
/// in every bulk shell.
pub fn exponential_bath(base: u32, prefactor: u64, levels: u32) -> Vec<(u32, u64)> {
    (0..levels)
        .map(|k| (k, prefactor * power(base, k).to_u64().expect("small bath")))
        .collect()
}

/// Systems of dimension at most three on the energies `0, 1, 2`.
pub fn small_systems() -> Vec<Vec<(u32, u64)>> {
    vec![
        vec![(0, 1)],
        vec![(0, 2)],
        vec![(0, 3)],
        vec![(0, 1), (1, 1)],
        vec![(0, 1), (1, 2)],
        vec![(0, 2), (1, 1)],
        vec![(0, 1), (2, 1)],
        vec![(0, 1), (2, 2)],
        vec![(0, 2), (2, 1)],
        vec![(0, 1), (1, 1), (2, 1)],
    ]
}

fn compositions(total: u64, parts: usize) -> Vec<Vec<u64>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .flat_map(|first| {
            compositions(total - first, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

/// Thermal state, every pure state and every distribution in quarters.
pub fn small_states(base: u32, system: &[(u32, u64)], bath: &[(u32, u64)], cells: u32) -> Result<Vec<ExactInstance>> {
    let dim: u64 = system.iter().map(|l| l.1).sum();
    let mut out = vec![ExactInstance::thermal(base, system.to_vec(), bath.to_vec(), cells)?];
    for comp in compositions(4, dim as usize) {
        let mut flat = comp.into_iter().map(|q| rational(q, 4));
        let probabilities = system
            .iter()
            .map(|&(_, m)| (0..m).map(|_| flat.next().expect("sized")).collect())
            .collect();
        out.push(ExactInstance::new(base, system.to_vec(), bath.to_vec(), probabilities, cells)?);
    }
    Ok(out)
}

/// Shell permutations: all of them up to dimension six, otherwise
/// transpositions against the first entry, adjacent swaps, a cyclic shift,
/// the reversal and seeded random shuffles.
pub fn enumerate_permutations(dimension: usize, seed: u64, random: usize) -> Vec<Vec<usize>> {
    let identity: Vec<usize> = (0..dimension).collect();
    if dimension <= 6 {
        let mut all = Vec::new();
        permute(&mut identity.clone(), 0, &mut all);
        return all;
    }
    let mut perms = vec![identity.clone()];
    for j in 1..dimension {
        let mut p = identity.clone();
        p.swap(0, j);
        perms.push(p);
        if j + 1 < dimension {
            let mut q = identity.clone();
            q.swap(j, j + 1);
            perms.push(q);
        }
    }
    let mut shift = identity.clone();
    shift.rotate_left(1);
    perms.push(shift);
    perms.push(identity.iter().rev().copied().collect());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..random {
        let mut p = identity.clone();
        p.shuffle(&mut rng);
        perms.push(p);
    }
    perms
}

fn permute(items: &mut Vec<usize>, start: usize, out: &mut Vec<Vec<usize>>) {
    if start + 1 >= items.len() {
        out.push(items.clone());
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permute(items, start + 1, out);
        items.swap(start, i);
    }
}

/// Values after moving the entry at `perm[i]` to position `i`.
pub fn apply_permutation(values: &[BigRational], perm: &[usize]) -> Result<Vec<BigRational>> {
    let mut seen = vec![false; values.len()];
    if perm.len() != values.len() {
        return Err(Error::ExactMismatch(format!("permutation of {} on {} entries", perm.len(), values.len())));
    }
    for &p in perm {
        if p >= values.len() || std::mem::replace(&mut seen[p], true) {
            return Err(Error::ExactMismatch("not a bijection".into()));
        }
    }
    Ok(perm.iter().map(|&p| values[p].clone()).collect())
}

/// `F^E = E - kT S^E` of the normalized shell, with the entropy terms summed
/// in sorted order.
pub fn shell_free_energy(values: &[BigRational], energy: f64, temp: Temperature) -> f64 {
    let trace: BigRational = values.iter().sum();
    let mut terms: Vec<f64> = values
        .iter()
        .filter(|v| !v.is_zero())
        .map(|v| {
            let q = to_f64(&(v / &trace));
            -q * q.ln()
        })
        .collect();
    terms.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    energy - temp.kt() * terms.iter().sum::<f64>()
}

/// Reduced system diagonal of a (possibly permuted) shell.
pub fn system_marginal(shell: &ExplicitShell, values: &[BigRational]) -> BTreeMap<(usize, u64), BigRational> {
    let mut out: BTreeMap<(usize, u64), BigRational> = BTreeMap::new();
    for (entry, v) in shell.entries.iter().zip(values) {
        *out.entry((entry.tag.system_level, entry.tag.system_index)).or_insert_with(BigRational::zero) += v;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SchurReport {
    pub dimension: usize,
    pub trials: usize,
    pub passes: usize,
}

/// Haar-like unitary from the QR factor of a complex Gaussian matrix.
pub fn random_unitary(dimension: usize, rng: &mut impl Rng) -> DMatrix<Complex<f64>> {
    let m = DMatrix::from_fn(dimension, dimension, |_, _| {
        Complex::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    m.qr().q()
}

/// Diagonal of `U diag(lambda) U^dagger`.
pub fn conjugated_diagonal(unitary: &DMatrix<Complex<f64>>, eigenvalues: &[f64]) -> Vec<f64> {
    (0..eigenvalues.len())
        .map(|i| {
            eigenvalues
                .iter()
                .enumerate()
                .map(|(j, l)| unitary[(i, j)].norm_sqr() * l)
                .sum()
        })
        .collect()
}

/// Random conjugations of random positive spectra; a pass means the
/// spectrum majorizes the resulting diagonal.
pub fn schur_fuzz(dimension: usize, trials: usize, seed: u64) -> SchurReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (dimension as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut passes = 0;
    for _ in 0..trials {
        let lambda: Vec<f64> = (0..dimension).map(|_| rng.random_range(1e-3..1.0)).collect();
        let u = random_unitary(dimension, &mut rng);
        let diag = conjugated_diagonal(&u, &lambda);
        if majorizes_values(&lambda, &diag).unwrap_or(false) {
            passes += 1;
        }
    }
    SchurReport { dimension, trials, passes }
}

/// `gcd`-reduced check that a rational is dyadic, used by the tests.
pub fn is_dyadic(x: &BigRational) -> bool {
    let mut d = x.denom().clone();
    let two = BigInt::from(2);
    while d.is_even() && !d.is_zero() {
        d /= &two;
    }
    d.is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: u64, d: u64) -> BigRational {
        rational(n, d)
    }

    #[test]
    fn trivial_shell() {
        let inst = ExactInstance::new(2, vec![(0, 1)], vec![(0, 1)], vec![vec![q(1, 1)]], 1).unwrap();
        let shell = explicit_shell(&inst, 0, DEFAULT_DIMENSION_CAP).unwrap();
        assert_eq!(shell.values(), vec![q(1, 2), q(1, 2)]);
    }

    #[test]
    fn dyadic_shell() {
        let inst = ExactInstance::new(
            2,
            vec![(0, 1), (1, 1)],
            vec![(0, 1), (1, 2)],
            vec![vec![q(1, 2)], vec![q(1, 2)]],
            0,
        )
        .unwrap();
        assert_eq!(inst.bath_partition_function(), q(2, 1));
        let shell = explicit_shell(&inst, 1, DEFAULT_DIMENSION_CAP).unwrap();
        let mut vals = shell.values();
        vals.sort();
        // (E_S=1, E_B=0): 1/2 * 1/2; (E_S=0, E_B=1): 1/2 * 1/2 / 2, twice
        assert_eq!(vals, vec![q(1, 8), q(1, 8), q(1, 4)]);
        assert!(vals.iter().all(is_dyadic));
        assert_eq!(shell.trace(), q(1, 2));
    }

    #[test]
    fn empty_shell() {
        let inst = ExactInstance::thermal(2, vec![(0, 1), (1, 1)], vec![(2, 1)], 1).unwrap();
        assert!(matches!(explicit_shell(&inst, 0, 100), Err(Error::EmptyShell { .. })));
        assert!(matches!(explicit_shell(&inst, 2, 1), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn reachability_examples() {
        let inst = ExactInstance::new(2, vec![(0, 2)], vec![(0, 1)], vec![vec![q(3, 5), q(2, 5)]], 0).unwrap();
        let shell = explicit_shell(&inst, 0, 16).unwrap();
        assert!(reachable(&shell.values(), &shell).unwrap());
        assert!(reachable(&[q(1, 2), q(1, 2)], &shell).unwrap());
        assert!(!reachable(&[q(7, 10), q(3, 10)], &shell).unwrap());
        assert!(matches!(reachable(&[q(1, 2), q(1, 4)], &shell), Err(Error::TraceMismatch { .. })));
    }

    #[test]
    fn exact_truncation() {
        let classes = vec![(q(1, 2), 1), (q(1, 8), 4)];
        let kept = truncate_exact(&classes, &q(1, 4));
        assert_eq!(kept, vec![(q(1, 2), 1), (q(1, 8), 2)]);
        let kept = truncate_exact(&classes, &q(3, 10));
        assert_eq!(class_trace(&kept), q(7, 10));
        assert_eq!(kept.last().unwrap().1, 1);
    }

    #[test]
    fn thermal_state_resets_nothing() {
        let inst = ExactInstance::thermal(2, vec![(0, 1), (1, 2)], exponential_bath(2, 1, 4), 3).unwrap();
        assert!(inst.is_thermal());
        for kind in [SchemeKind::Deterministic, SchemeKind::Bounded { c: 1 }, SchemeKind::Guaranteed] {
            assert_eq!(brute_force_max_reset(&inst, &BigRational::zero(), kind).unwrap().k, 0);
        }
    }

    #[test]
    fn pure_excited_state_matches_formula() {
        let system = vec![(0, 1), (1, 1), (2, 1)];
        let inst = ExactInstance::pure(2, system, exponential_bath(2, 1, 4), 2, 4).unwrap();
        let out = brute_force_max_reset(&inst, &BigRational::zero(), SchemeKind::Deterministic).unwrap();
        // (E0 + kT ln Z_S) / (kT ln 2) = 2 + log2(7/4)
        assert_eq!(out.k, 2);
        assert_eq!(formula_k_star(&inst, &BigRational::zero(), SchemeKind::Deterministic).unwrap(), 2);
    }

    #[test]
    fn pure_state_smoothing_is_exact() {
        let inst = ExactInstance::pure(2, vec![(0, 1), (1, 1)], exponential_bath(2, 1, 3), 1, 1).unwrap();
        assert_eq!(exact_smoothed_partition(&inst, &q(1, 4)), q(3, 8));
    }

    #[test]
    fn schemes_agree_on_oracle() {
        let inst = ExactInstance::new(
            2,
            vec![(0, 1), (1, 2)],
            exponential_bath(2, 2, 3),
            vec![vec![q(1, 4)], vec![q(3, 4), q(0, 1)]],
            3,
        )
        .unwrap();
        let session = OracleSession::new(&inst, DEFAULT_DIMENSION_CAP).unwrap();
        for eps in [q(0, 1), q(1, 4), q(1, 2)] {
            let ks: Vec<u32> = [SchemeKind::Deterministic, SchemeKind::Bounded { c: 1 }, SchemeKind::Guaranteed]
                .into_iter()
                .map(|k| session.max_reset(&eps, k).unwrap().k)
                .collect();
            assert!(ks.windows(2).all(|w| w[0] == w[1]), "{ks:?}");
        }
    }

    #[test]
    fn permutations() {
        assert_eq!(enumerate_permutations(3, 0, 0).len(), 6);
        assert_eq!(enumerate_permutations(6, 0, 0).len(), 720);
        let many = enumerate_permutations(10, 1, 4);
        assert!(many.iter().all(|p| {
            let mut s = p.clone();
            s.sort_unstable();
            s == (0..10).collect::<Vec<_>>()
        }));
        assert!(apply_permutation(&[q(1, 2), q(1, 2)], &[0, 0]).is_err());
    }

    #[test]
    fn schur_examples() {
        let lambda = [0.5, 0.3, 0.2];
        let id = DMatrix::<Complex<f64>>::identity(3, 3);
        assert_eq!(conjugated_diagonal(&id, &lambda), lambda.to_vec());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let flat = DMatrix::from_row_slice(2, 2, &[
            Complex::new(h, 0.0), Complex::new(h, 0.0),
            Complex::new(h, 0.0), Complex::new(-h, 0.0),
        ]);
        let d = conjugated_diagonal(&flat, &[0.8, 0.2]);
        assert!((d[0] - 0.5).abs() < 1e-15 && (d[1] - 0.5).abs() < 1e-15);
        let r = schur_fuzz(4, 200, 7);
        assert_eq!(r.passes, 200);
    }
}
