//! Finite-step isothermal reset and withdrawal of a single qubit.
//!
//! The qubit has levels `0` and `g`. Each step changes the gap at fixed
//! occupation (work) and then lets the qubit thermalize at the new gap
//! (heat). Signs follow the qubit: positive work and heat flow into it.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Temperature;

/// Residual bound for the first law checked after every step.
pub const FIRST_LAW_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum GapRule {
    /// `g_k = g_max k / N`.
    Uniform,
    /// `g_k = g_max (r^k - 1) / (r^N - 1)`.
    Geometric { ratio: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaircaseSchedule {
    steps: u64,
    g_max: f64,
    rule: GapRule,
}

impl StaircaseSchedule {
    pub fn new(steps: u64, g_max: f64, rule: GapRule) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidSchedule("at least one step is required".into()));
        }
        if !(g_max.is_finite() && g_max > 0.0) {
            return Err(Error::InvalidSchedule(format!("maximum gap must be positive and finite, got {g_max}")));
        }
        if let GapRule::Geometric { ratio } = rule {
            if !(ratio.is_finite() && ratio > 1.0) {
                return Err(Error::InvalidSchedule(format!("geometric ratio must exceed 1, got {ratio}")));
            }
        }
        Ok(Self { steps, g_max, rule })
    }

    pub fn uniform(steps: u64, g_max: f64) -> Result<Self> {
        Self::new(steps, g_max, GapRule::Uniform)
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn g_max(&self) -> f64 {
        self.g_max
    }

    pub fn rule(&self) -> GapRule {
        self.rule
    }

    /// Gap after `k` raising steps; `gap(0) = 0`, `gap(N) = g_max`.
    pub fn gap(&self, k: u64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        if k >= self.steps {
            return self.g_max;
        }
        match self.rule {
            GapRule::Uniform => self.g_max * (k as f64 / self.steps as f64),
            GapRule::Geometric { ratio } => {
                let lr = ratio.ln();
                let shrink = ((k as f64 - self.steps as f64) * lr).exp();
                self.g_max * shrink * (-(-(k as f64) * lr).exp_m1()) / (-(-(self.steps as f64) * lr).exp_m1())
            }
        }
    }
}

/// Thermal occupation of the upper level, `e^{-beta g} / (1 + e^{-beta g})`.
pub fn excited_population(gap: f64, temp: Temperature) -> f64 {
    let x = (-temp.beta() * gap).exp();
    x / (1.0 + x)
}

/// Work of the quasi-static reset to a finite gap,
/// `kT ln(2 / (1 + e^{-beta g_max}))`.
pub fn quasistatic_work(g_max: f64, temp: Temperature) -> f64 {
    temp.kt() * (LN_2 - (-temp.beta() * g_max).exp().ln_1p())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResetReport {
    /// Work spent raising the gap from `0` to `g_max`.
    pub work: f64,
    /// Heat absorbed by the qubit over the staircase (negative).
    pub heat: f64,
    /// Upper-level occupation left at `g_max`.
    pub residual_occupation: f64,
    /// Work of dropping the gap back to zero at fixed occupation.
    pub lowering_work: f64,
    pub max_first_law_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WithdrawalReport {
    /// Work done on the qubit while the gap is lowered (negative).
    pub work: f64,
    /// Heat absorbed over the staircase, including the initial coupling.
    pub heat: f64,
    /// Heat absorbed when the reset qubit first thermalizes at `g_max`.
    pub initial_heat: f64,
    pub max_first_law_residual: f64,
}

impl WithdrawalReport {
    pub fn work_output(&self) -> f64 {
        -self.work
    }
}

struct Ledger {
    energy0: f64,
    work: f64,
    heat: f64,
    worst: f64,
}

impl Ledger {
    fn new(energy0: f64) -> Self {
        Self { energy0, work: 0.0, heat: 0.0, worst: 0.0 }
    }

    fn step(&mut self, work: f64, heat: f64, energy: f64) {
        self.work += work;
        self.heat += heat;
        let residual = (energy - self.energy0 - self.work - self.heat).abs();
        let scale = energy.abs().max(self.work.abs()).max(self.heat.abs()).max(1.0);
        self.worst = self.worst.max(residual / scale);
    }
}

/// Reset a maximally mixed qubit by raising the gap stepwise.
pub fn reset_protocol(schedule: &StaircaseSchedule, temp: Temperature) -> ResetReport {
    let mut ledger = Ledger::new(0.0);
    let mut gap = 0.0;
    let mut p = 0.5;
    for k in 1..=schedule.steps() {
        let next = schedule.gap(k);
        let work = p * (next - gap);
        let p_next = excited_population(next, temp);
        let heat = (p_next - p) * next;
        ledger.step(work, heat, p_next * next);
        gap = next;
        p = p_next;
    }
    ResetReport {
        work: ledger.work,
        heat: ledger.heat,
        residual_occupation: p,
        lowering_work: -p * gap,
        max_first_law_residual: ledger.worst,
    }
}

/// Draw work from a reset qubit by lowering the gap stepwise from `g_max`.
pub fn withdrawal_protocol(schedule: &StaircaseSchedule, temp: Temperature) -> WithdrawalReport {
    let mut gap = schedule.g_max();
    let mut p = excited_population(gap, temp);
    let initial_heat = p * gap;
    let mut ledger = Ledger::new(0.0);
    ledger.step(0.0, initial_heat, initial_heat);
    for k in (0..schedule.steps()).rev() {
        let next = schedule.gap(k);
        let work = p * (next - gap);
        let p_next = excited_population(next, temp);
        let heat = (p_next - p) * next;
        ledger.step(work, heat, p_next * next);
        gap = next;
        p = p_next;
    }
    WithdrawalReport {
        work: ledger.work,
        heat: ledger.heat,
        initial_heat,
        max_first_law_residual: ledger.worst,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundTrip {
    pub reset: ResetReport,
    pub withdrawal: WithdrawalReport,
    /// Work drawn in the withdrawal minus work spent in the reset.
    pub net_output: f64,
}

pub fn round_trip(schedule: &StaircaseSchedule, temp: Temperature) -> RoundTrip {
    let reset = reset_protocol(schedule, temp);
    let withdrawal = withdrawal_protocol(schedule, temp);
    RoundTrip { reset, withdrawal, net_output: withdrawal.work_output() - reset.work }
}
