//! One runner per subcommand. Each prints a summary line per result.

use std::f64::consts::LN_2;

use bittery::extraction::{smooth_min_free_energy_in_shell, MixedCells};
use bittery::landauer::{quasistatic_work, round_trip, GapRule};
use bittery::oracle::{self, OracleReport, OracleSession, DEFAULT_DIMENSION_CAP};
use bittery::storage::{
    entropy_change_certificate, weight_additional_work, weight_ledger, EntropyCertificate, StorageLedger,
};
use bittery::verify::{self, CriterionReport};
use bittery::{max_work, BitterySpec, ExtractionResult, SchemeKind, Temperature, WeightTransition};
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::Serialize;

use crate::config::{parse_rational, ExperimentConfig, Task, TransitionConfig};
use crate::error::{CliError, CliResult};
use crate::output::Output;

pub struct Context {
    pub out: Output,
    pub temp: Temperature,
    pub pool: ThreadPool,
    pub seed: u64,
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn scheme_label(kind: SchemeKind) -> String {
    match kind {
        SchemeKind::Bounded { c } => format!("bounded(c={c})"),
        other => other.name().to_string(),
    }
}

#[derive(Serialize)]
struct MaxworkRecord {
    #[serde(flatten)]
    result: ExtractionResult,
    /// `F^min` read off an assembled analytic-bath shell, when a bath is given.
    shell_f_min: Option<f64>,
}

fn evaluate(cfg: &ExperimentConfig, ctx: &Context, task: Task) -> CliResult<Vec<MaxworkRecord>> {
    let system = cfg.system(task)?;
    let state = cfg.state(&system, ctx.temp, task)?;
    let cells = cfg.cells(task)?;
    let bath = cfg.bath(ctx.temp)?;
    let points: Vec<(f64, SchemeKind)> = cfg
        .epsilons()
        .into_iter()
        .flat_map(|e| cfg.schemes().into_iter().map(move |k| (e, k)))
        .collect();
    ctx.pool.install(|| {
        points
            .par_iter()
            .map(|&(eps, kind)| {
                let result = max_work(&state, &system, &kind.with_epsilon(eps), ctx.temp, cells)?;
                let shell_f_min = match &bath {
                    Some(b) => {
                        let top = system.levels().last().map_or(0.0, |l| l.energy);
                        let energy = (top / b.spacing()).ceil() * b.spacing();
                        Some(smooth_min_free_energy_in_shell(
                            &state,
                            &system,
                            b,
                            BitterySpec::new(cells),
                            energy,
                            eps,
                            ctx.temp,
                        )?)
                    }
                    None => None,
                };
                Ok(MaxworkRecord { result, shell_f_min })
            })
            .collect()
    })
}

fn summary(r: &ExtractionResult) -> String {
    format!(
        "w_max={:.6} k_star={} scheme={} epsilon={}{}",
        r.w_max,
        r.k_star,
        scheme_label(r.scheme.kind()),
        r.epsilon,
        if r.exact_multiple { " exact_multiple" } else { "" }
    )
}

pub fn maxwork(cfg: &ExperimentConfig, ctx: &Context) -> CliResult<()> {
    let records = evaluate(cfg, ctx, Task::Maxwork)?;
    for r in &records {
        println!("{}", summary(&r.result));
    }
    ctx.out.json("maxwork.json", &records)?;
    Ok(())
}

pub fn sweep(cfg: &ExperimentConfig, ctx: &Context) -> CliResult<()> {
    let records = evaluate(cfg, ctx, Task::Sweep)?;
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|rec| {
            let r = &rec.result;
            println!("{}", summary(r));
            vec![
                num(r.epsilon),
                r.scheme.kind().name().to_string(),
                match r.scheme.kind() {
                    SchemeKind::Bounded { c } => c.to_string(),
                    _ => String::new(),
                },
                num(r.w_max),
                num(r.f_min),
                num(r.f_thermal),
                r.k_star.to_string(),
                r.exact_multiple.to_string(),
                num(r.rank_bound_log),
                rec.shell_f_min.map(num).unwrap_or_default(),
            ]
        })
        .collect();
    ctx.out.csv(
        "sweep.csv",
        &["epsilon", "scheme", "c", "w_max", "f_min", "f_thermal", "k_star", "exact_multiple", "rank_bound_log", "shell_f_min"],
        &rows,
    )?;
    Ok(())
}

pub fn landauer(cfg: &ExperimentConfig, ctx: &Context) -> CliResult<()> {
    let schedules = cfg.schedules(Task::Landauer)?;
    let kt = ctx.temp.kt();
    let runs: Vec<_> = ctx.pool.install(|| schedules.par_iter().map(|s| (*s, round_trip(s, ctx.temp))).collect());
    let mut rows = Vec::new();
    for (s, trip) in &runs {
        let target = quasistatic_work(s.g_max(), ctx.temp);
        let rule = match s.rule() {
            GapRule::Uniform => "uniform".to_string(),
            GapRule::Geometric { ratio } => format!("geometric({ratio})"),
        };
        println!(
            "steps={} work={:.9} quasistatic={:.9} net_round_trip={:.3e}",
            s.steps(),
            trip.reset.work,
            target,
            trip.net_output
        );
        rows.push(vec![
            s.steps().to_string(),
            rule,
            num(s.g_max()),
            num(trip.reset.work),
            num(trip.reset.heat),
            num(trip.reset.residual_occupation),
            num(trip.reset.lowering_work),
            num(trip.withdrawal.work_output()),
            num(trip.net_output),
            num(target),
            num((trip.reset.work - target).abs()),
            num(trip.reset.max_first_law_residual.max(trip.withdrawal.max_first_law_residual)),
        ]);
    }
    ctx.out.csv(
        "landauer.csv",
        &[
            "steps",
            "rule",
            "g_max",
            "reset_work",
            "reset_heat",
            "residual_occupation",
            "lowering_work",
            "withdrawal_output",
            "net_round_trip",
            "quasistatic_work",
            "abs_error",
            "first_law_residual",
        ],
        &rows,
    )?;
    let (_, last) = runs.last().expect("at least one schedule");
    println!("|W - ln2| = {:.6e} kT", (last.reset.work / kt - LN_2).abs());
    Ok(())
}

pub fn addwork(cfg: &ExperimentConfig, ctx: &Context) -> CliResult<()> {
    let ladder = cfg.ladder(Task::Addwork)?;
    let windows = &cfg.addwork.as_ref().ok_or_else(|| CliError::Config("`addwork` is required".into()))?.windows;
    let mut rows = Vec::new();
    for &(lo, hi) in windows {
        let a = weight_additional_work(&ladder, lo, hi, ctx.temp)?;
        println!("w_min={lo} w_max={hi} levels={} w_add={:.9}", a.terms, a.value);
        rows.push(vec![num(lo), num(hi), a.terms.to_string(), num(a.value), num(a.closed_form)]);
    }
    ctx.out.csv("addwork.csv", &["w_min", "w_max", "levels", "w_add", "closed_form"], &rows)?;
    Ok(())
}

#[derive(Serialize)]
struct LedgerReport {
    bittery: Vec<EntropyCertificate>,
    weight: Vec<StorageLedger>,
}

pub fn ledger(cfg: &ExperimentConfig, ctx: &Context) -> CliResult<()> {
    let spec = cfg.ledger.as_ref().ok_or_else(|| CliError::Config("`ledger` is required".into()))?;
    let mut rows = Vec::new();
    let mut report = LedgerReport { bittery: Vec::new(), weight: Vec::new() };
    if !spec.bittery.is_empty() {
        let n = cfg.cells(Task::Ledger)?;
        for case in &spec.bittery {
            let m2 = case.m2.unwrap_or(match case.scheme {
                SchemeKind::Bounded { c } => case.m1 + c,
                _ => case.m1,
            });
            let scheme = case.scheme.with_epsilon(case.epsilon);
            let range = MixedCells::window(case.m1, m2);
            let cert = entropy_change_certificate(&scheme, n, range, case.distribution.as_deref(), ctx.temp)?;
            println!(
                "bittery {} [{}, {}] delta_s={:.9} decreases={} chain_holds={}",
                scheme_label(case.scheme),
                case.m1,
                m2,
                cert.delta_s,
                cert.decreases,
                cert.chain.holds()
            );
            rows.push(ledger_row(&format!("bittery {} [{},{}]", scheme_label(case.scheme), case.m1, m2), &cert.ledger));
            report.bittery.push(cert);
        }
    }
    if !spec.weight.is_empty() {
        let ladder = cfg.ladder(Task::Ledger)?;
        for t in &spec.weight {
            let (label, transition) = match t {
                TransitionConfig::Distribution { initial_level, outcomes } => (
                    format!("weight from {initial_level}"),
                    WeightTransition::new(&ladder, *initial_level, outcomes.clone())?,
                ),
                TransitionConfig::Thermal { initial_level, w_min, w_max } => (
                    format!("weight thermal [{w_min},{w_max}]"),
                    WeightTransition::thermal(&ladder, *initial_level, *w_min, *w_max, ctx.temp)?,
                ),
            };
            let l = weight_ledger(&transition, ctx.temp);
            println!("{label} delta_e={:.9} delta_s={:.9} delta_f={:.9}", l.delta_e, l.delta_s, l.delta_f);
            rows.push(ledger_row(&label, &l));
            report.weight.push(l);
        }
    }
    ctx.out.csv("ledger.csv", &["store", "delta_e", "delta_s", "delta_f", "heat_like"], &rows)?;
    ctx.out.json("ledger.json", &report)?;
    Ok(())
}

fn ledger_row(label: &str, l: &StorageLedger) -> Vec<String> {
    vec![label.to_string(), num(l.delta_e), num(l.delta_s), num(l.delta_f), num(l.heat_like)]
}

pub fn oracle_verify(cfg: &ExperimentConfig, ctx: &Context) -> CliResult<()> {
    let default = crate::config::OracleConfig { instances: None, epsilons: Vec::new(), schemes: Vec::new() };
    let ocfg = cfg.oracle.as_ref().unwrap_or(&default);
    let instances = match &ocfg.instances {
        Some(list) => list.iter().map(|i| i.build()).collect::<CliResult<Vec<_>>>()?,
        None => verify::oracle_family(),
    };
    let epsilons = if ocfg.epsilons.is_empty() { vec!["0".into(), "1/4".into(), "1/2".into()] } else { ocfg.epsilons.clone() };
    let epsilons = epsilons.iter().map(|e| parse_rational(e)).collect::<CliResult<Vec<_>>>()?;
    let schemes = if ocfg.schemes.is_empty() {
        vec![SchemeKind::Deterministic, SchemeKind::Bounded { c: 1 }, SchemeKind::Guaranteed]
    } else {
        ocfg.schemes.clone()
    };
    let reports: Vec<OracleReport> = ctx.pool.install(|| {
        instances
            .par_iter()
            .map(|inst| -> CliResult<Vec<OracleReport>> {
                let session = OracleSession::new(inst, DEFAULT_DIMENSION_CAP)?;
                let mut out = Vec::new();
                for eps in &epsilons {
                    for &kind in &schemes {
                        out.push(oracle::compare(&session, eps, kind)?);
                    }
                }
                Ok(out)
            })
            .collect::<CliResult<Vec<_>>>()
            .map(|v| v.into_iter().flatten().collect())
    })?;
    let disagreements = reports.iter().filter(|r| !r.agree).count();
    let uneven = reports.iter().filter(|r| r.uneven_allocation_helps).count();
    for r in reports.iter().filter(|r| !r.agree || r.uneven_allocation_helps) {
        println!(
            "{} {} eps={} formula={} oracle={} uneven={}",
            r.instance, r.scheme, r.epsilon, r.formula_k_star, r.oracle_k, r.uneven_allocation_helps
        );
    }
    println!("instances={} comparisons={} disagreements={disagreements} uneven_allocation={uneven}", instances.len(), reports.len());
    ctx.out.json("oracle.json", &reports)?;
    if disagreements > 0 {
        return Err(CliError::Failed(format!("{disagreements} formula/oracle disagreements")));
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    seed: u64,
    all_passed: bool,
    criteria: &'a [CriterionReport],
}

pub fn verify_all(ctx: &Context) -> CliResult<()> {
    let seed = ctx.seed;
    let jobs: Vec<Box<dyn Fn() -> CriterionReport + Send + Sync>> = vec![
        Box::new(move || verify::scheme_independence(seed)),
        Box::new(verify::formula_vs_oracle),
        Box::new(move || verify::schur_property(seed)),
        Box::new(verify::landauer_convergence),
        Box::new(verify::additional_work_properties),
        Box::new(move || verify::entropy_certificates(seed)),
        Box::new(move || verify::free_energy_invariance(seed)),
        Box::new(move || verify::thermal_fixed_point(seed)),
        Box::new(verify::pure_state_smoothing),
    ];
    let criteria: Vec<CriterionReport> = ctx.pool.install(|| jobs.par_iter().map(|job| job()).collect());
    for c in &criteria {
        println!("[{}] criterion {} ({}): {}", if c.passed { "PASS" } else { "FAIL" }, c.id, c.name, c.detail);
    }
    let all_passed = criteria.iter().all(|c| c.passed);
    ctx.out.json("verify.json", &VerifyReport { seed, all_passed, criteria: &criteria })?;
    if !all_passed {
        return Err(CliError::Failed("acceptance criteria failed".into()));
    }
    Ok(())
}
