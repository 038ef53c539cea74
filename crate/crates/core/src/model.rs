//! System, bath, bittery and weight specifications, and the thermal-state
//! constructions built on them.
//!
//! Energies are plain `f64` in whatever unit the caller uses for `kT`.
//! Degenerate levels are kept as blocks: a [`DiagonalState`] stores runs of
//! equal probability rather than one entry per degeneracy index.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{ln_count, log_boltzmann_weight, log_sum_exp};

/// Relative tolerance used when snapping an energy onto a bath grid.
pub const GRID_TOLERANCE: f64 = 1e-9;

/// Absolute tolerance on the normalization of a probability vector.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Inverse temperature `beta = 1/kT`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Temperature {
    beta: f64,
}

impl Temperature {
    pub fn from_beta(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidTemperature(beta));
        }
        Ok(Self { beta })
    }

    pub fn from_kt(kt: f64) -> Result<Self> {
        if !(kt.is_finite() && kt > 0.0) {
            return Err(Error::InvalidTemperature(1.0 / kt));
        }
        Self::from_beta(1.0 / kt)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn kt(&self) -> f64 {
        1.0 / self.beta
    }

    /// Work stored by resetting one maximally mixed qubit, `kT ln 2`.
    pub fn bit_energy(&self) -> f64 {
        self.kt() * std::f64::consts::LN_2
    }
}

impl Default for Temperature {
    fn default() -> Self {
        Self { beta: 1.0 }
    }
}

/// One energy level together with its degeneracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Level {
    pub energy: f64,
    pub multiplicity: u64,
}

fn validate_levels(levels: &[Level], what: &str) -> std::result::Result<(), String> {
    if levels.is_empty() {
        return Err(format!("{what} has no levels"));
    }
    for (i, level) in levels.iter().enumerate() {
        if !level.energy.is_finite() || level.energy < 0.0 {
            return Err(format!("{what} level {i} has invalid energy {}", level.energy));
        }
        if level.multiplicity == 0 {
            return Err(format!("{what} level {i} has zero multiplicity"));
        }
        if i > 0 && level.energy <= levels[i - 1].energy {
            return Err(format!("{what} energies must be strictly increasing (level {i})"));
        }
    }
    Ok(())
}

/// Finite system Hamiltonian with ground energy zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemSpec {
    levels: Vec<Level>,
}

impl SystemSpec {
    pub fn new(levels: impl IntoIterator<Item = (f64, u64)>) -> Result<Self> {
        let levels: Vec<Level> = levels
            .into_iter()
            .map(|(energy, multiplicity)| Level { energy, multiplicity })
            .collect();
        validate_levels(&levels, "system").map_err(Error::InvalidSystem)?;
        if levels[0].energy != 0.0 {
            return Err(Error::InvalidSystem(format!(
                "minimum energy must be exactly 0, got {}",
                levels[0].energy
            )));
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn dimension(&self) -> u128 {
        self.levels.iter().map(|l| l.multiplicity as u128).sum()
    }

    /// `ln Z_S`.
    pub fn log_partition_function(&self, temp: Temperature) -> f64 {
        let terms: Vec<f64> = self
            .levels
            .iter()
            .map(|l| log_boltzmann_weight(l.multiplicity, l.energy, temp.beta()))
            .collect();
        log_sum_exp(&terms)
    }

    /// `Z_S = sum_E M_S(E) exp(-beta E)`.
    pub fn partition_function(&self, temp: Temperature) -> f64 {
        self.log_partition_function(temp).exp()
    }

    /// `F(tau_S) = -kT ln Z_S`.
    pub fn standard_free_energy(&self, temp: Temperature) -> f64 {
        -temp.kt() * self.log_partition_function(temp)
    }

    pub fn gibbs_state(&self, temp: Temperature) -> DiagonalState {
        let log_z = self.log_partition_function(temp);
        let levels = self
            .levels
            .iter()
            .map(|l| {
                vec![WeightRun {
                    probability: (-temp.beta() * l.energy - log_z).exp(),
                    count: l.multiplicity,
                }]
            })
            .collect();
        DiagonalState { levels }
    }
}

/// `count` consecutive degeneracy indices sharing one probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightRun {
    pub probability: f64,
    pub count: u64,
}

/// A state diagonal in the energy eigenbasis, stored level by level as runs
/// of equal probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalState {
    levels: Vec<Vec<WeightRun>>,
}

impl DiagonalState {
    pub fn from_runs(system: &SystemSpec, levels: Vec<Vec<WeightRun>>) -> Result<Self> {
        if levels.len() != system.levels().len() {
            return Err(Error::InvalidState(format!(
                "state has {} levels, system has {}",
                levels.len(),
                system.levels().len()
            )));
        }
        let mut total = 0.0;
        for (i, (runs, level)) in levels.iter().zip(system.levels()).enumerate() {
            let mut count = 0u64;
            for run in runs {
                if !(run.probability.is_finite() && run.probability >= 0.0) {
                    return Err(Error::InvalidState(format!(
                        "level {i} has invalid probability {}",
                        run.probability
                    )));
                }
                count = count.checked_add(run.count).ok_or_else(|| {
                    Error::InvalidState(format!("level {i} run counts overflow"))
                })?;
                total += run.probability * run.count as f64;
            }
            if count != level.multiplicity {
                return Err(Error::InvalidState(format!(
                    "level {i} runs cover {count} indices, multiplicity is {}",
                    level.multiplicity
                )));
            }
        }
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        let levels = levels
            .into_iter()
            .map(|runs| runs.into_iter().filter(|r| r.count > 0).collect())
            .collect();
        Ok(Self { levels })
    }

    /// One probability per degeneracy index, level by level.
    pub fn from_probabilities(system: &SystemSpec, probabilities: &[Vec<f64>]) -> Result<Self> {
        let runs = probabilities
            .iter()
            .map(|ps| {
                ps.iter()
                    .map(|&probability| WeightRun { probability, count: 1 })
                    .collect()
            })
            .collect();
        Self::from_runs(system, runs)
    }

    /// Pure state on degeneracy index `index` of level `level`.
    pub fn pure(system: &SystemSpec, level: usize, index: u64) -> Result<Self> {
        let Some(spec) = system.levels().get(level) else {
            return Err(Error::InvalidState(format!("no level {level}")));
        };
        if index >= spec.multiplicity {
            return Err(Error::InvalidState(format!(
                "index {index} outside multiplicity {}",
                spec.multiplicity
            )));
        }
        let levels = system
            .levels()
            .iter()
            .enumerate()
            .map(|(i, l)| {
                if i != level {
                    return vec![WeightRun { probability: 0.0, count: l.multiplicity }];
                }
                vec![
                    WeightRun { probability: 0.0, count: index },
                    WeightRun { probability: 1.0, count: 1 },
                    WeightRun { probability: 0.0, count: l.multiplicity - index - 1 },
                ]
            })
            .collect();
        Self::from_runs(system, levels)
    }

    pub fn levels(&self) -> &[Vec<WeightRun>] {
        &self.levels
    }

    /// Probability of degeneracy index `index` in level `level`.
    pub fn probability(&self, level: usize, index: u64) -> Option<f64> {
        let mut start = 0u64;
        for run in self.levels.get(level)? {
            if index < start + run.count {
                return Some(run.probability);
            }
            start += run.count;
        }
        None
    }

    pub fn total_probability(&self) -> f64 {
        self.levels
            .iter()
            .flatten()
            .map(|r| r.probability * r.count as f64)
            .sum()
    }

    /// True when every degeneracy index carries nonzero weight.
    pub fn has_full_support(&self) -> bool {
        self.levels.iter().flatten().all(|r| r.probability > 0.0)
    }
}

/// Bath with `M_B(k * spacing) = exp(log_reference) * base^k` on the grid
/// `k = 0, ..., grid_levels - 1`.
///
/// The inverse temperature is fixed by the grid, `beta = ln(base) / spacing`,
/// so `M_B(E - E_S) = M_B(E) exp(-beta E_S)` holds exactly whenever `E_S` is
/// a grid multiple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticBath {
    base: u32,
    spacing: f64,
    log_reference: f64,
    grid_levels: u64,
}

impl AnalyticBath {
    pub fn new(base: u32, spacing: f64, log_reference: f64, grid_levels: u64) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidBath(format!("base must be >= 2, got {base}")));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidBath(format!("spacing must be positive, got {spacing}")));
        }
        if !log_reference.is_finite() {
            return Err(Error::InvalidBath("reference log-multiplicity must be finite".into()));
        }
        if grid_levels == 0 {
            return Err(Error::InvalidBath("bath needs at least one grid level".into()));
        }
        Ok(Self { base, spacing, log_reference, grid_levels })
    }

    /// Bath whose spacing realizes `temp`: `spacing = kT ln(base)`.
    pub fn for_temperature(
        base: u32,
        temp: Temperature,
        log_reference: f64,
        grid_levels: u64,
    ) -> Result<Self> {
        Self::new(base, temp.kt() * (base as f64).ln(), log_reference, grid_levels)
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn grid_levels(&self) -> u64 {
        self.grid_levels
    }

    pub fn log_reference(&self) -> f64 {
        self.log_reference
    }

    pub fn beta(&self) -> f64 {
        (self.base as f64).ln() / self.spacing
    }

    /// Errors unless `temp` matches the temperature fixed by the grid.
    pub fn check_temperature(&self, temp: Temperature) -> Result<()> {
        let beta = self.beta();
        if ((beta - temp.beta()) / temp.beta()).abs() > 1e-12 {
            return Err(Error::InvalidBath(format!(
                "grid implies beta = {beta}, requested beta = {}",
                temp.beta()
            )));
        }
        Ok(())
    }

    /// `ln M_B(k * spacing)`; defined for any `k`, including beyond the top
    /// grid level.
    pub fn log_multiplicity(&self, k: u64) -> f64 {
        self.log_reference + k as f64 * (self.base as f64).ln()
    }

    /// Grid index of `energy`, or `IncommensurateEnergy`.
    pub fn grid_index(&self, energy: f64) -> Result<u64> {
        let x = energy / self.spacing;
        let k = x.round();
        if k < 0.0 || (x - k).abs() > GRID_TOLERANCE * x.abs().max(1.0) {
            return Err(Error::IncommensurateEnergy { energy, spacing: self.spacing });
        }
        Ok(k as u64)
    }

    /// `ln Z_B`; each grid level contributes `M_ref base^k base^-k = M_ref`.
    pub fn log_partition_function(&self) -> f64 {
        self.log_reference + ln_count(self.grid_levels)
    }
}

/// Bath given level by level. Used by the exact oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplicitBath {
    levels: Vec<Level>,
}

impl ExplicitBath {
    pub fn new(levels: impl IntoIterator<Item = (f64, u64)>) -> Result<Self> {
        let levels: Vec<Level> = levels
            .into_iter()
            .map(|(energy, multiplicity)| Level { energy, multiplicity })
            .collect();
        validate_levels(&levels, "bath").map_err(Error::InvalidBath)?;
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn log_partition_function(&self, temp: Temperature) -> f64 {
        let terms: Vec<f64> = self
            .levels
            .iter()
            .map(|l| log_boltzmann_weight(l.multiplicity, l.energy, temp.beta()))
            .collect();
        log_sum_exp(&terms)
    }

    /// The level at `energy`, matched to relative tolerance [`GRID_TOLERANCE`].
    pub fn level_at(&self, energy: f64) -> Option<&Level> {
        self.levels
            .iter()
            .find(|l| (l.energy - energy).abs() <= GRID_TOLERANCE * energy.abs().max(1.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum BathSpec {
    Analytic(AnalyticBath),
    Explicit(ExplicitBath),
}

/// `n` degenerate qubits (`H_A = 0`), initially maximally mixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BitterySpec {
    pub cells: u32,
}

impl BitterySpec {
    pub fn new(cells: u32) -> Self {
        Self { cells }
    }

    /// Storage capacity `n kT ln 2`.
    pub fn capacity(&self, temp: Temperature) -> f64 {
        self.cells as f64 * temp.bit_energy()
    }

    pub fn log_dimension(&self) -> f64 {
        self.cells as f64 * std::f64::consts::LN_2
    }
}

/// Equally spaced weight levels `origin + i * spacing`, `i < level_count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightLadder {
    spacing: f64,
    level_count: u64,
    origin: f64,
}

/// Result of translating a ladder level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Translation {
    Inside(u64),
    /// The translated level falls outside the finite ladder.
    Truncated,
}

impl WeightLadder {
    pub fn new(spacing: f64, level_count: u64, origin: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidSystem(format!("ladder spacing must be positive, got {spacing}")));
        }
        if level_count == 0 {
            return Err(Error::InvalidSystem("ladder needs at least one level".into()));
        }
        if !origin.is_finite() {
            return Err(Error::InvalidSystem("ladder origin must be finite".into()));
        }
        Ok(Self { spacing, level_count, origin })
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn level_count(&self) -> u64 {
        self.level_count
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn energy(&self, index: u64) -> f64 {
        self.origin + index as f64 * self.spacing
    }

    pub fn index_of(&self, energy: f64) -> Result<u64> {
        let x = (energy - self.origin) / self.spacing;
        let k = x.round();
        if k < 0.0 || k >= self.level_count as f64 || (x - k).abs() > GRID_TOLERANCE * x.abs().max(1.0) {
            return Err(Error::OffGrid { value: energy });
        }
        Ok(k as u64)
    }

    /// Translate level `index` by `steps` ladder spacings.
    pub fn translate(&self, index: u64, steps: i64) -> Translation {
        match (index as i128).checked_add(steps as i128) {
            Some(t) if t >= 0 && t < self.level_count as i128 => Translation::Inside(t as u64),
            _ => Translation::Truncated,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn qubit() -> SystemSpec {
        SystemSpec::new([(0.0, 1), (LN_2, 1)]).unwrap()
    }

    #[test]
    fn partition_function_examples() {
        let t = Temperature::default();
        assert_eq!(SystemSpec::new([(0.0, 1)]).unwrap().partition_function(t), 1.0);
        assert!((qubit().partition_function(t) - 1.5).abs() < 1e-15);
        let deg = SystemSpec::new([(0.0, 2)]).unwrap();
        assert!((deg.partition_function(Temperature::from_beta(3.7).unwrap()) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn gibbs_examples() {
        let t = Temperature::default();
        let g = qubit().gibbs_state(t);
        assert!((g.probability(0, 0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((g.probability(1, 0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let single = SystemSpec::new([(0.0, 1)]).unwrap().gibbs_state(t);
        assert_eq!(single.probability(0, 0), Some(1.0));
        assert!(Temperature::from_beta(0.0).is_err());
        assert!(Temperature::from_beta(f64::INFINITY).is_err());
    }

    #[test]
    fn free_energy_examples() {
        let t = Temperature::default();
        assert_eq!(SystemSpec::new([(0.0, 1)]).unwrap().standard_free_energy(t), 0.0);
        assert!((qubit().standard_free_energy(t) + 1.5f64.ln()).abs() < 1e-15);
        assert!((SystemSpec::new([(0.0, 2)]).unwrap().standard_free_energy(t) + LN_2).abs() < 1e-15);
    }

    #[test]
    fn free_energy_scales_with_kt() {
        let sys = SystemSpec::new([(0.0, 1), (1.0, 3), (2.5, 2)]).unwrap();
        for kt in [0.3, 1.0, 4.0] {
            let t = Temperature::from_kt(kt).unwrap();
            let f = sys.standard_free_energy(t);
            let z = sys.partition_function(t);
            assert!(((f + kt * z.ln()) / f).abs() < 1e-12);
        }
    }

    #[test]
    fn system_validation() {
        assert!(SystemSpec::new([(0.1, 1)]).is_err());
        assert!(SystemSpec::new([(0.0, 1), (0.0, 1)]).is_err());
        assert!(SystemSpec::new([(0.0, 0)]).is_err());
        assert!(SystemSpec::new(Vec::<(f64, u64)>::new()).is_err());
    }

    #[test]
    fn state_validation() {
        let s = qubit();
        assert!(DiagonalState::from_probabilities(&s, &[vec![0.5], vec![0.4]]).is_err());
        assert!(DiagonalState::from_probabilities(&s, &[vec![0.5, 0.5], vec![0.0]]).is_err());
        assert!(DiagonalState::from_probabilities(&s, &[vec![1.5], vec![-0.5]]).is_err());
        let p = DiagonalState::pure(&SystemSpec::new([(0.0, 3)]).unwrap(), 0, 1).unwrap();
        assert_eq!(p.probability(0, 0), Some(0.0));
        assert_eq!(p.probability(0, 1), Some(1.0));
        assert_eq!(p.probability(0, 3), None);
    }

    #[test]
    fn analytic_bath_grid() {
        let t = Temperature::default();
        let bath = AnalyticBath::for_temperature(2, t, 0.0, 100).unwrap();
        assert!((bath.spacing() - LN_2).abs() < 1e-15);
        bath.check_temperature(t).unwrap();
        assert!(bath.check_temperature(Temperature::from_beta(2.0).unwrap()).is_err());
        for k in 0..50 {
            let step = bath.log_multiplicity(k + 1) - bath.log_multiplicity(k);
            assert!((step - LN_2).abs() < 1e-12);
        }
        assert_eq!(bath.grid_index(3.0 * LN_2).unwrap(), 3);
        assert!(matches!(bath.grid_index(0.5), Err(Error::IncommensurateEnergy { .. })));
    }

    #[test]
    fn ladder_translation() {
        let l = WeightLadder::new(0.5, 4, 1.0).unwrap();
        assert_eq!(l.translate(1, 2), Translation::Inside(3));
        assert_eq!(l.translate(1, 3), Translation::Truncated);
        assert_eq!(l.translate(1, -2), Translation::Truncated);
        assert_eq!(l.index_of(2.0).unwrap(), 2);
        assert!(l.index_of(2.2).is_err());
        assert!(l.index_of(3.0).is_err());
    }
}
