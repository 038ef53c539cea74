//! Smooth min-free energy and the maximum extractable work for the three
//! single-shot extraction schemes.
//!
//! All three schemes share one code path for the work value; they differ only
//! in the rank bound recorded alongside it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AnalyticBath, BathSpec, BitterySpec, DiagonalState, SystemSpec, Temperature};
use crate::shell::{self, BlockSpectrum};

/// Distance from an integer below which `w_max / (kT ln 2)` counts as an
/// exact multiple of the bit energy.
pub const EXACT_MULTIPLE_TOLERANCE: f64 = 1e-9;

/// Which family of final bittery states a scheme admits, without epsilon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Deterministic,
    Bounded { c: u32 },
    Guaranteed,
}

impl SchemeKind {
    pub fn with_epsilon(self, epsilon: f64) -> SchemeSpec {
        match self {
            SchemeKind::Deterministic => SchemeSpec::Deterministic { epsilon },
            SchemeKind::Bounded { c } => SchemeSpec::Bounded { epsilon, c },
            SchemeKind::Guaranteed => SchemeSpec::Guaranteed { epsilon },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Deterministic => "deterministic",
            SchemeKind::Bounded { .. } => "bounded",
            SchemeKind::Guaranteed => "guaranteed",
        }
    }
}

/// epsilon-deterministic, (epsilon, c)-bounded or epsilon-guaranteed work.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "scheme")]
pub enum SchemeSpec {
    Deterministic { epsilon: f64 },
    Bounded { epsilon: f64, c: u32 },
    Guaranteed { epsilon: f64 },
}

impl SchemeSpec {
    pub fn epsilon(&self) -> f64 {
        match *self {
            SchemeSpec::Deterministic { epsilon }
            | SchemeSpec::Bounded { epsilon, .. }
            | SchemeSpec::Guaranteed { epsilon } => epsilon,
        }
    }

    pub fn kind(&self) -> SchemeKind {
        match *self {
            SchemeSpec::Deterministic { .. } => SchemeKind::Deterministic,
            SchemeSpec::Bounded { c, .. } => SchemeKind::Bounded { c },
            SchemeSpec::Guaranteed { .. } => SchemeKind::Guaranteed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        shell::check_epsilon(self.epsilon())
    }

    /// Mixed-cell range for the scheme's parameter `m`: `{m}` for
    /// deterministic, `[m, m + c]` for bounded, `[0, m]` for guaranteed.
    pub fn cells(&self, m: u32) -> MixedCells {
        match *self {
            SchemeSpec::Deterministic { .. } => MixedCells::single(m),
            SchemeSpec::Bounded { c, .. } => MixedCells::window(m, m + c),
            SchemeSpec::Guaranteed { .. } => MixedCells::window(0, m),
        }
    }
}

/// Range `[lo, hi]` of qubits left maximally mixed after extraction.
/// `n - l` qubits are reset in the branch with `l` mixed qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixedCells {
    pub lo: u32,
    pub hi: u32,
}

impl MixedCells {
    pub fn single(m: u32) -> Self {
        Self { lo: m, hi: m }
    }

    pub fn window(lo: u32, hi: u32) -> Self {
        Self { lo, hi }
    }

    /// Checks the range against the scheme and the cell count `n`.
    pub fn validate(&self, scheme: &SchemeSpec, cells: u32) -> Result<()> {
        if self.hi < self.lo {
            return Err(Error::InvalidRange(format!("m2 = {} < m1 = {}", self.hi, self.lo)));
        }
        if self.hi >= cells {
            return Err(Error::InvalidRange(format!(
                "mixed-cell count {} must be below n = {cells}",
                self.hi
            )));
        }
        match scheme.kind() {
            SchemeKind::Deterministic if self.lo != self.hi => Err(Error::InvalidRange(
                "deterministic extraction leaves exactly m cells mixed".into(),
            )),
            SchemeKind::Bounded { c } if self.hi - self.lo != c => Err(Error::InvalidRange(format!(
                "bounded extraction needs m2 - m1 = c = {c}, got {}",
                self.hi - self.lo
            ))),
            SchemeKind::Guaranteed if self.lo != 0 => Err(Error::InvalidRange(
                "guaranteed extraction ranges start at l = 0".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Mixed cells in the most stringent branch of the scheme.
    pub fn stringent(&self, kind: SchemeKind) -> u32 {
        match kind {
            SchemeKind::Deterministic | SchemeKind::Bounded { .. } => self.lo,
            SchemeKind::Guaranteed => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractionResult {
    pub w_max: f64,
    pub f_min: f64,
    pub f_thermal: f64,
    /// Largest number of qubits that can be reset, `floor(w_max / kT ln 2)`
    /// clamped to the cell count.
    pub k_star: u32,
    /// `w_max / (kT ln 2)` lies within [`EXACT_MULTIPLE_TOLERANCE`] of an integer.
    pub exact_multiple: bool,
    pub scheme: SchemeSpec,
    pub epsilon: f64,
    /// `ln(2^m_eff Z_S)`: the scheme's rank bound with `M_B(E)` factored out.
    pub rank_bound_log: f64,
}

/// `F^min_eps = -kT ln sum h_eps exp(-beta E_S)`.
pub fn smooth_min_free_energy(
    state: &DiagonalState,
    system: &SystemSpec,
    epsilon: f64,
    temp: Temperature,
) -> Result<f64> {
    shell::check_epsilon(epsilon)?;
    if state.total_probability() <= 0.0 {
        return Err(Error::DegenerateState);
    }
    let weighted = BlockSpectrum::system_weighted(state, system, temp)?;
    let truncated = shell::epsilon_truncate(&weighted, epsilon)?;
    Ok(-temp.kt() * shell::log_weighted_indicator_sum(&truncated, temp.beta()))
}

/// `F^min_eps` read off an assembled shell: `ln rk - n ln 2 - ln M_B(E)`.
///
/// Exact for analytic baths; used to confirm that the bath and the shell
/// energy cancel out.
pub fn smooth_min_free_energy_in_shell(
    state: &DiagonalState,
    system: &SystemSpec,
    bath: &AnalyticBath,
    bittery: BitterySpec,
    total_energy: f64,
    epsilon: f64,
    temp: Temperature,
) -> Result<f64> {
    let spectrum = shell::assemble_shell(
        state,
        system,
        &BathSpec::Analytic(bath.clone()),
        bittery,
        total_energy,
        temp,
    )?;
    let log_rank = shell::rank_epsilon(&spectrum, epsilon)?;
    let log_mb = bath.log_multiplicity(bath.grid_index(total_energy)?);
    Ok(-temp.kt() * (log_rank - bittery.log_dimension() - log_mb))
}

fn log_rank_bound(mixed: u32, log_z: f64) -> f64 {
    mixed as f64 * std::f64::consts::LN_2 + log_z
}

/// `ln(2^m_eff Z_S)` with `m_eff = m` (deterministic), `m1` (bounded) or `0`
/// (guaranteed).
pub fn scheme_rank_bound(
    scheme: &SchemeSpec,
    cells_range: MixedCells,
    system: &SystemSpec,
    temp: Temperature,
    cells: u32,
) -> Result<f64> {
    scheme.validate()?;
    cells_range.validate(scheme, cells)?;
    Ok(log_rank_bound(
        cells_range.stringent(scheme.kind()),
        system.log_partition_function(temp),
    ))
}

/// `(floor, exact_multiple)` of `w / (kT ln 2)`, clamped to `cells`.
pub fn resettable_qubits(w_max: f64, temp: Temperature, cells: u32) -> (u32, bool) {
    let ratio = w_max / temp.bit_energy();
    let nearest = ratio.round();
    let exact = (ratio - nearest).abs() <= EXACT_MULTIPLE_TOLERANCE;
    let k = if exact { nearest } else { ratio.floor() };
    let k = k.max(0.0).min(cells as f64) as u32;
    (k, exact)
}

/// `W^max_eps = F^min_eps(rho_S) - F(tau_S)`, identical for every scheme.
pub fn max_work(
    state: &DiagonalState,
    system: &SystemSpec,
    scheme: &SchemeSpec,
    temp: Temperature,
    cells: u32,
) -> Result<ExtractionResult> {
    scheme.validate()?;
    if cells == 0 {
        return Err(Error::InvalidRange("work extraction needs at least one bittery cell".into()));
    }
    let epsilon = scheme.epsilon();
    let f_min = smooth_min_free_energy(state, system, epsilon, temp)?;
    let f_thermal = system.standard_free_energy(temp);
    let w_max = f_min - f_thermal;
    let (k_star, exact_multiple) = resettable_qubits(w_max, temp, cells);
    let mixed = cells - k_star;
    let stringent = match scheme.kind() {
        SchemeKind::Guaranteed => 0,
        _ => mixed,
    };
    Ok(ExtractionResult {
        w_max,
        f_min,
        f_thermal,
        k_star,
        exact_multiple,
        scheme: *scheme,
        epsilon,
        rank_bound_log: log_rank_bound(stringent, system.log_partition_function(temp)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn qubit() -> SystemSpec {
        SystemSpec::new([(0.0, 1), (LN_2, 1)]).unwrap()
    }

    #[test]
    fn full_support_at_zero_epsilon_is_standard_free_energy() {
        let t = Temperature::default();
        let sys = SystemSpec::new([(0.0, 2), (0.7, 1), (1.9, 3)]).unwrap();
        let st = DiagonalState::from_probabilities(
            &sys,
            &[vec![0.1, 0.2], vec![0.3], vec![0.1, 0.1, 0.2]],
        )
        .unwrap();
        let f = smooth_min_free_energy(&st, &sys, 0.0, t).unwrap();
        assert_eq!(f, sys.standard_free_energy(t));
    }

    #[test]
    fn pure_state_smoothing() {
        let t = Temperature::from_kt(1.3).unwrap();
        let sys = SystemSpec::new([(0.0, 1), (0.8, 1), (2.0, 2)]).unwrap();
        let st = DiagonalState::pure(&sys, 1, 0).unwrap();
        for eps in [0.01, 0.3, 0.75] {
            let f = smooth_min_free_energy(&st, &sys, eps, t).unwrap();
            assert!((f - (0.8 + 1.3 * (1.0 / (1.0 - eps)).ln())).abs() < 1e-12);
        }
    }

    #[test]
    fn qubit_example() {
        let t = Temperature::default();
        let sys = qubit();
        let st = DiagonalState::from_probabilities(&sys, &[vec![0.6], vec![0.4]]).unwrap();
        let f = smooth_min_free_energy(&st, &sys, 0.3, t).unwrap();
        assert!(f.abs() < 1e-12);
        let r = max_work(&st, &sys, &SchemeSpec::Deterministic { epsilon: 0.3 }, t, 4).unwrap();
        assert!((r.w_max - 1.5f64.ln()).abs() < 1e-12);
        assert_eq!(r.k_star, 0);
    }

    #[test]
    fn thermal_state_yields_nothing() {
        let t = Temperature::from_kt(0.7).unwrap();
        let sys = SystemSpec::new([(0.0, 1), (0.3, 2), (1.1, 1)]).unwrap();
        let th = sys.gibbs_state(t);
        for kind in [SchemeKind::Deterministic, SchemeKind::Bounded { c: 2 }, SchemeKind::Guaranteed] {
            let r = max_work(&th, &sys, &kind.with_epsilon(0.0), t, 8).unwrap();
            assert_eq!(r.w_max, 0.0);
            assert_eq!(r.k_star, 0);
        }
    }

    #[test]
    fn schemes_agree() {
        let t = Temperature::default();
        let sys = SystemSpec::new([(0.0, 1), (1.0, 1), (3.0, 1)]).unwrap();
        let st = DiagonalState::from_probabilities(&sys, &[vec![0.1], vec![0.2], vec![0.7]]).unwrap();
        let d = max_work(&st, &sys, &SchemeSpec::Deterministic { epsilon: 0.1 }, t, 10).unwrap();
        let b = max_work(&st, &sys, &SchemeSpec::Bounded { epsilon: 0.1, c: 3 }, t, 10).unwrap();
        let g = max_work(&st, &sys, &SchemeSpec::Guaranteed { epsilon: 0.1 }, t, 10).unwrap();
        assert_eq!(d.w_max.to_bits(), b.w_max.to_bits());
        assert_eq!(d.w_max.to_bits(), g.w_max.to_bits());
        assert_eq!(d.k_star, g.k_star);
        assert_eq!(g.rank_bound_log, sys.log_partition_function(t));
    }

    #[test]
    fn rank_bound_examples() {
        let t = Temperature::default();
        let sys = qubit();
        let log_z = 1.5f64.ln();
        let g = scheme_rank_bound(&SchemeSpec::Guaranteed { epsilon: 0.0 }, MixedCells::window(0, 3), &sys, t, 8).unwrap();
        assert!((g - log_z).abs() < 1e-15);
        let d = scheme_rank_bound(&SchemeSpec::Deterministic { epsilon: 0.0 }, MixedCells::single(3), &sys, t, 8).unwrap();
        assert!((d - (3.0 * LN_2 + log_z)).abs() < 1e-15);
        let b = scheme_rank_bound(&SchemeSpec::Bounded { epsilon: 0.0, c: 3 }, MixedCells::window(1, 4), &sys, t, 8).unwrap();
        let d1 = scheme_rank_bound(&SchemeSpec::Deterministic { epsilon: 0.0 }, MixedCells::single(1), &sys, t, 8).unwrap();
        assert_eq!(b, d1);
    }

    #[test]
    fn rank_bound_errors() {
        let t = Temperature::default();
        let sys = qubit();
        let bounded = SchemeSpec::Bounded { epsilon: 0.0, c: 0 };
        assert!(matches!(
            scheme_rank_bound(&bounded, MixedCells::window(3, 2), &sys, t, 8),
            Err(Error::InvalidRange(_))
        ));
        assert!(matches!(
            scheme_rank_bound(&SchemeSpec::Deterministic { epsilon: 0.0 }, MixedCells::single(8), &sys, t, 8),
            Err(Error::InvalidRange(_))
        ));
        assert!(scheme_rank_bound(&SchemeSpec::Deterministic { epsilon: 1.0 }, MixedCells::single(1), &sys, t, 8).is_err());
    }

    #[test]
    fn bath_cancels_out() {
        let t = Temperature::default();
        let sys = SystemSpec::new([(0.0, 1), (2.0 * LN_2, 2), (3.0 * LN_2, 1)]).unwrap();
        let st = DiagonalState::from_probabilities(&sys, &[vec![0.2], vec![0.1, 0.3], vec![0.4]]).unwrap();
        let direct = smooth_min_free_energy(&st, &sys, 0.15, t).unwrap();
        let b2 = AnalyticBath::for_temperature(2, t, 0.0, 500).unwrap();
        let b8 = AnalyticBath::for_temperature(8, t, 3.0, 200).unwrap();
        // base 8 has spacing 3 ln 2, so only its multiples are on the grid
        let sys8 = SystemSpec::new([(0.0, 1), (3.0 * LN_2, 3)]).unwrap();
        let st8 = DiagonalState::from_probabilities(&sys8, &[vec![0.5], vec![0.1, 0.2, 0.2]]).unwrap();
        let f2 = smooth_min_free_energy_in_shell(&st, &sys, &b2, BitterySpec::new(4), 300.0 * LN_2, 0.15, t).unwrap();
        assert!((f2 - direct).abs() < 1e-12);
        let f8a = smooth_min_free_energy_in_shell(&st8, &sys8, &b8, BitterySpec::new(2), 150.0 * LN_2, 0.15, t).unwrap();
        let b2b = AnalyticBath::for_temperature(2, t, -1.0, 1000).unwrap();
        let f8b = smooth_min_free_energy_in_shell(&st8, &sys8, &b2b, BitterySpec::new(7), 900.0 * LN_2, 0.15, t).unwrap();
        assert!((f8a - f8b).abs() < 1e-12);
    }

    #[test]
    fn quantization() {
        let t = Temperature::default();
        assert_eq!(resettable_qubits(2.0 * LN_2, t, 10), (2, true));
        assert_eq!(resettable_qubits(2.0 * LN_2 * (1.0 - 1e-15), t, 10), (2, true));
        assert_eq!(resettable_qubits(2.5 * LN_2, t, 10), (2, false));
        assert_eq!(resettable_qubits(20.0 * LN_2, t, 10).0, 10);
        let sys = SystemSpec::new([(0.0, 1), (1.0, 1)]).unwrap();
        let st = DiagonalState::pure(&sys, 1, 0).unwrap();
        assert!(max_work(&st, &sys, &SchemeSpec::Deterministic { epsilon: 0.0 }, t, 0).is_err());
    }
}
