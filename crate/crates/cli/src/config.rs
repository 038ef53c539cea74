//! JSON experiment configuration. Unknown keys are rejected.

use std::fs;
use std::path::Path;

use bittery::landauer::GapRule;
use bittery::oracle::ExactInstance;
use bittery::{AnalyticBath, DiagonalState, SchemeKind, StaircaseSchedule, SystemSpec, Temperature, WeightLadder};
use num_rational::BigRational;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Maxwork,
    Sweep,
    Landauer,
    Addwork,
    Ledger,
    OracleVerify,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Maxwork => "maxwork",
            Task::Sweep => "sweep",
            Task::Landauer => "landauer",
            Task::Addwork => "addwork",
            Task::Ledger => "ledger",
            Task::OracleVerify => "oracle-verify",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// `[energy, multiplicity]` pairs.
    pub levels: Vec<(f64, u64)>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PureConfig {
    pub level: usize,
    #[serde(default)]
    pub index: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateConfig {
    Thermal,
    Probabilities(Vec<Vec<f64>>),
    Pure(PureConfig),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticBathConfig {
    pub base: u32,
    /// Must equal `kT ln(base)` when given.
    pub spacing: Option<f64>,
    #[serde(default = "default_bath_levels")]
    pub levels: u64,
    #[serde(default)]
    pub log_reference: f64,
}

fn default_bath_levels() -> u64 {
    1 << 20
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BathConfig {
    Analytic(AnalyticBathConfig),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BitteryConfig {
    pub n: u32,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    pub spacing: f64,
    pub levels: u64,
    #[serde(default)]
    pub origin: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    /// One run per step count.
    pub steps: Vec<u64>,
    pub g_max: f64,
    #[serde(default)]
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AddworkConfig {
    /// `[w_min, w_max]` windows on the weight ladder.
    pub windows: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BitteryCase {
    pub scheme: SchemeKind,
    #[serde(default)]
    pub epsilon: f64,
    pub m1: u32,
    /// Defaults to `m1 + c` for bounded and `m1` otherwise.
    pub m2: Option<u32>,
    /// `[l, P(l)]` pairs; uniform over the range when absent.
    pub distribution: Option<Vec<(u32, f64)>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TransitionConfig {
    Distribution { initial_level: f64, outcomes: Vec<(f64, f64)> },
    Thermal { initial_level: f64, w_min: f64, w_max: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerConfig {
    #[serde(default)]
    pub bittery: Vec<BitteryCase>,
    #[serde(default)]
    pub weight: Vec<TransitionConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    pub base: u32,
    pub system: Vec<(u32, u64)>,
    pub bath: Vec<(u32, u64)>,
    /// Exact rationals such as `"1/4"`, or `"thermal"` for the whole state.
    pub probabilities: ProbabilityConfig,
    pub cells: u32,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ProbabilityConfig {
    Named(String),
    Exact(Vec<Vec<String>>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    /// Explicit instances; the built-in family when absent.
    #[serde(default)]
    pub instances: Option<Vec<InstanceConfig>>,
    #[serde(default = "default_oracle_epsilons")]
    pub epsilons: Vec<String>,
    #[serde(default = "default_oracle_schemes")]
    pub schemes: Vec<SchemeKind>,
}

fn default_oracle_epsilons() -> Vec<String> {
    vec!["0".into(), "1/4".into(), "1/2".into()]
}

fn default_oracle_schemes() -> Vec<SchemeKind> {
    vec![SchemeKind::Deterministic, SchemeKind::Bounded { c: 1 }, SchemeKind::Guaranteed]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Option<Task>,
    pub system: Option<SystemConfig>,
    pub state: Option<StateConfig>,
    pub bath: Option<BathConfig>,
    pub bittery: Option<BitteryConfig>,
    pub weight: Option<WeightConfig>,
    #[serde(default)]
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub schemes: Vec<SchemeKind>,
    pub schedule: Option<ScheduleConfig>,
    pub addwork: Option<AddworkConfig>,
    pub ledger: Option<LedgerConfig>,
    pub oracle: Option<OracleConfig>,
}

/// A parsed config with the digest of its source bytes.
pub struct Loaded {
    pub config: ExperimentConfig,
    pub digest: String,
}

pub fn load(path: &Path) -> CliResult<Loaded> {
    let bytes = fs::read(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    let config: ExperimentConfig = serde_json::from_slice(&bytes)?;
    Ok(Loaded { config, digest: hex::encode(Sha256::digest(&bytes)) })
}

fn missing(what: &str, task: Task) -> CliError {
    CliError::Config(format!("`{what}` is required for {}", task.name()))
}

impl ExperimentConfig {
    pub fn check_task(&self, task: Task) -> CliResult<()> {
        match self.task {
            Some(t) if t != task => Err(CliError::Config(format!(
                "config names task `{}` but `{}` was requested",
                t.name(),
                task.name()
            ))),
            _ => Ok(()),
        }
    }

    pub fn system(&self, task: Task) -> CliResult<SystemSpec> {
        let cfg = self.system.as_ref().ok_or_else(|| missing("system", task))?;
        Ok(SystemSpec::new(cfg.levels.iter().copied())?)
    }

    pub fn state(&self, system: &SystemSpec, temp: Temperature, task: Task) -> CliResult<DiagonalState> {
        match self.state.as_ref().ok_or_else(|| missing("state", task))? {
            StateConfig::Thermal => Ok(system.gibbs_state(temp)),
            StateConfig::Probabilities(ps) => Ok(DiagonalState::from_probabilities(system, ps)?),
            StateConfig::Pure(p) => Ok(DiagonalState::pure(system, p.level, p.index)?),
        }
    }

    pub fn cells(&self, task: Task) -> CliResult<u32> {
        Ok(self.bittery.as_ref().ok_or_else(|| missing("bittery", task))?.n)
    }

    pub fn bath(&self, temp: Temperature) -> CliResult<Option<AnalyticBath>> {
        let Some(BathConfig::Analytic(cfg)) = &self.bath else {
            return Ok(None);
        };
        let bath = AnalyticBath::for_temperature(cfg.base, temp, cfg.log_reference, cfg.levels)?;
        if let Some(spacing) = cfg.spacing {
            if (spacing - bath.spacing()).abs() > 1e-12 * bath.spacing() {
                return Err(CliError::Config(format!(
                    "bath spacing {spacing} does not match kT ln {} = {}",
                    cfg.base,
                    bath.spacing()
                )));
            }
        }
        Ok(Some(bath))
    }

    pub fn epsilons(&self) -> Vec<f64> {
        if self.epsilons.is_empty() {
            vec![0.0]
        } else {
            self.epsilons.clone()
        }
    }

    pub fn schemes(&self) -> Vec<SchemeKind> {
        if self.schemes.is_empty() {
            vec![SchemeKind::Deterministic]
        } else {
            self.schemes.clone()
        }
    }

    pub fn ladder(&self, task: Task) -> CliResult<WeightLadder> {
        let w = self.weight.as_ref().ok_or_else(|| missing("weight", task))?;
        Ok(WeightLadder::new(w.spacing, w.levels, w.origin)?)
    }

    pub fn schedules(&self, task: Task) -> CliResult<Vec<StaircaseSchedule>> {
        let s = self.schedule.as_ref().ok_or_else(|| missing("schedule", task))?;
        if s.steps.is_empty() {
            return Err(CliError::Config("`schedule.steps` is empty".into()));
        }
        let rule = match s.ratio {
            Some(ratio) => GapRule::Geometric { ratio },
            None => GapRule::Uniform,
        };
        s.steps
            .iter()
            .map(|&n| StaircaseSchedule::new(n, s.g_max, rule).map_err(CliError::from))
            .collect()
    }
}

pub fn parse_rational(text: &str) -> CliResult<BigRational> {
    text.trim()
        .parse::<BigRational>()
        .map_err(|_| CliError::Config(format!("`{text}` is not an exact rational")))
}

impl InstanceConfig {
    pub fn build(&self) -> CliResult<ExactInstance> {
        let instance = match &self.probabilities {
            ProbabilityConfig::Named(name) if name == "thermal" => {
                ExactInstance::thermal(self.base, self.system.clone(), self.bath.clone(), self.cells)?
            }
            ProbabilityConfig::Named(name) => {
                return Err(CliError::Config(format!("unknown state `{name}`; use \"thermal\" or exact rationals")))
            }
            ProbabilityConfig::Exact(levels) => {
                let ps = levels
                    .iter()
                    .map(|l| l.iter().map(|p| parse_rational(p)).collect::<CliResult<Vec<_>>>())
                    .collect::<CliResult<Vec<_>>>()?;
                ExactInstance::new(self.base, self.system.clone(), self.bath.clone(), ps, self.cells)?
            }
        };
        Ok(instance)
    }
}
