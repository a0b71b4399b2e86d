//! File-driven front end for the `itrisk` library.
//!
//! Exit codes: 0 success, 1 parse or validation error, 2 infeasible budget
//! or a plan that stops with risk still open, 3 internal error.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use itrisk::budget::{analyze_pipeline, Pipeline, ProcessorBenchmark};
use itrisk::strategy::{
    build_adaptive_plan, build_conventional_plan, compare, optimize, parse_partition,
    validate_plan, ObjectiveKind, SearchMode, StrategyError, StrategyObjective,
};
use itrisk::testset::{cover_report, reuse_delta, TestSetRegistry};
use itrisk::{simulate, IntegrationPlan, ProductModel, Severity, ValidationReport};

pub mod config;
pub mod data;
pub mod error;
pub mod io;
pub mod render;
pub mod report;

pub use config::RunConfig;
pub use error::CliError;

use config::{Command, ExampleName, ModeArg, ObjectiveArg, TestsetCommand};
use io::{read_json, round_sig, write_atomic, write_report};
use render::render_profile_svg;
use report::{ComparisonJson, KpiRow, OptimizeJson, SimulationReport};

/// What a successful run ends with: 0, or 2 with the reasons.
#[derive(Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub warnings: Vec<String>,
    pub degraded: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        if self.degraded {
            2
        } else {
            0
        }
    }
}

fn check_paths(cfg: &RunConfig) -> Result<(), CliError> {
    let (inputs, outputs) = cfg.paths();
    let mut seen: BTreeSet<&PathBuf> = BTreeSet::new();
    for out in &outputs {
        if !seen.insert(out) {
            return Err(CliError::Usage(format!(
                "output {} is named twice",
                out.display()
            )));
        }
        if inputs.contains(out) {
            return Err(CliError::Usage(format!(
                "output {} would overwrite an input",
                out.display()
            )));
        }
    }
    Ok(())
}

fn load_model(path: &Path) -> Result<ProductModel, CliError> {
    let model: ProductModel = read_json(path)?;
    let report = itrisk::model::validate_model(&model);
    if report.has_errors() {
        return Err(issues(path, &report));
    }
    Ok(model)
}

fn issues(path: &Path, report: &ValidationReport) -> CliError {
    CliError::Invalid(
        report
            .errors()
            .map(|i| format!("{}: {}: {}", path.display(), i.location, i.message))
            .collect(),
    )
}

fn plan_label(plan: &IntegrationPlan, path: &Path) -> String {
    plan.label.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "plan".into())
    })
}

/// Validate; errors fail the run, warnings are returned. A stop-criterion
/// warning marks the outcome degraded.
fn vet_plan(
    model: &ProductModel,
    plan: &IntegrationPlan,
    path: &Path,
    outcome: &mut Outcome,
) -> Result<Vec<String>, CliError> {
    let report = validate_plan(model, plan);
    if report.has_errors() {
        return Err(issues(path, &report));
    }
    let mut notes = Vec::new();
    for w in report.warnings() {
        let line = format!(
            "[{}] {}: {}: {}",
            w.code,
            path.display(),
            w.location,
            w.message
        );
        if w.code == "stop-criterion" {
            outcome.degraded = true;
        }
        outcome.warnings.push(line);
        notes.push(format!("{}: {}", w.code, w.message));
    }
    Ok(notes)
}

fn strategy_error(e: StrategyError) -> CliError {
    match e {
        StrategyError::Simulation(s) => CliError::Internal(s.to_string()),
        other => CliError::Invalid(vec![other.to_string()]),
    }
}

fn parse_weights(text: &str) -> Result<StrategyObjective, CliError> {
    let mut weights = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, w) = part
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("weight '{part}' is not name=value")))?;
        let kind: ObjectiveKind = k.trim().parse().map_err(strategy_error)?;
        let w: f64 = w
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("weight '{part}' has no numeric value")))?;
        weights.push((kind, w));
    }
    let o = StrategyObjective::weighted(weights);
    o.check().map_err(strategy_error)?;
    Ok(o)
}

fn objective(arg: ObjectiveArg, weights: Option<&str>) -> Result<StrategyObjective, CliError> {
    let kind = match arg {
        ObjectiveArg::AvgRisk => ObjectiveKind::AverageRisk,
        ObjectiveArg::MaxRisk => ObjectiveKind::MaxRisk,
        ObjectiveArg::Duration => ObjectiveKind::Duration,
        ObjectiveArg::Weighted => {
            let w = weights
                .ok_or_else(|| CliError::Usage("--objective weighted needs --weights".into()))?;
            return parse_weights(w);
        }
    };
    if weights.is_some() {
        return Err(CliError::Usage(
            "--weights only applies to --objective weighted".into(),
        ));
    }
    Ok(StrategyObjective::new(kind))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Internal(format!("stdout: {e}")))
}

fn summary(row: &KpiRow) -> String {
    format!(
        "{}: phi={} cost={:.6} R_R={:.6} R_T={:.6} R_AD={:.6} max={:.6}\n",
        row.label,
        row.phi,
        row.cost,
        row.remaining_risk,
        row.total_risk_area,
        row.average_risk,
        row.max_risk
    )
}

/// Execute one command. Text goes to `out`; files are written atomically.
pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome, CliError> {
    check_paths(cfg)?;
    let mut outcome = Outcome::default();
    match &cfg.command {
        Command::Simulate(a) => {
            let model = load_model(&a.model)?;
            let plan: IntegrationPlan = read_json(&a.plan)?;
            let notes = vet_plan(&model, &plan, &a.plan, &mut outcome)?;
            let sim =
                simulate::<f64>(&model, &plan).map_err(|e| CliError::Internal(e.to_string()))?;
            let label = plan_label(&plan, &a.plan);
            let report = SimulationReport::new(&label, &sim, notes);
            if let Some(p) = &a.profile_csv {
                write_atomic(p, sim.profile.to_csv().as_bytes())?;
            }
            if let Some(p) = &a.report {
                write_report(p, &report)?;
            }
            if let Some(p) = &a.svg {
                write_atomic(
                    p,
                    render_profile_svg(&[(label, sim.profile.clone())]).as_bytes(),
                )?;
            }
            emit(out, &summary(&report.kpis))?;
        }
        Command::Compare(a) => {
            let model = load_model(&a.model)?;
            let mut plans = Vec::new();
            for path in &a.plans {
                let plan: IntegrationPlan = read_json(path)?;
                vet_plan(&model, &plan, path, &mut outcome)?;
                let label = plan_label(&plan, path);
                plans.push(plan.with_label(label));
            }
            for text in &a.partitions {
                let blocks = parse_partition(text).map_err(strategy_error)?;
                let built = build_adaptive_plan(&model, &blocks, None).map_err(strategy_error)?;
                outcome.warnings.extend(built.warnings);
                plans.push(built.plan.with_label(text.clone()));
            }
            let extra = match &a.weights {
                Some(w) => vec![parse_weights(w)?],
                None => vec![],
            };
            let cmp = compare::<f64>(&model, &plans, &extra).map_err(strategy_error)?;
            let mut profiles = Vec::new();
            for row in &cmp.plans {
                let plan = plans
                    .iter()
                    .find(|p| p.label.as_deref() == Some(&row.label))
                    .unwrap();
                let sim =
                    simulate::<f64>(&model, plan).map_err(|e| CliError::Internal(e.to_string()))?;
                profiles.push((row.label.clone(), sim.profile));
            }
            let json = ComparisonJson::new(&cmp, &profiles);
            if let Some(p) = &a.report {
                write_report(p, &json)?;
            }
            if let Some(p) = &a.profile_csv {
                write_atomic(p, render::profiles_csv(&profiles).as_bytes())?;
            }
            if let Some(p) = &a.svg {
                write_atomic(p, render_profile_svg(&profiles).as_bytes())?;
            }
            let mut text = render::kpi_table(&json.plans);
            for (objective, winner) in &json.winners {
                text.push_str(&format!("best {objective}: {winner}\n"));
            }
            emit(out, &text)?;
        }
        Command::Optimize(a) => {
            let model = load_model(&a.model)?;
            let obj = objective(a.objective, a.weights.as_deref())?;
            let mode = match a.mode {
                ModeArg::Exhaustive => SearchMode::Exhaustive,
                ModeArg::Greedy => SearchMode::Greedy,
            };
            let result =
                optimize::<f64>(&model, &obj, a.max_cycles, mode).map_err(strategy_error)?;
            let json = OptimizeJson::from(&result);
            if let Some(p) = &a.report {
                write_report(p, &json)?;
            }
            if let Some(p) = &a.plan_out {
                let plan = result.best.plan.clone().with_label(format!("{mode}-{obj}"));
                write_report(p, &plan)?;
            }
            if let Some(p) = &a.svg {
                let sim = simulate::<f64>(&model, &result.best.plan)
                    .map_err(|e| CliError::Internal(e.to_string()))?;
                write_atomic(
                    p,
                    render_profile_svg(&[(result.best.key.clone(), sim.profile)]).as_bytes(),
                )?;
            }
            emit(
                out,
                &format!(
                    "{mode} {obj}: best {:.6} after {} candidates\n{}\n",
                    json.best.score, json.explored, json.best.key
                ),
            )?;
        }
        Command::Build(a) => {
            let model = load_model(&a.model)?;
            let built = match (&a.partition, &a.conventional) {
                (Some(p), None) => {
                    let blocks = parse_partition(p).map_err(strategy_error)?;
                    build_adaptive_plan(&model, &blocks, None).map_err(strategy_error)?
                }
                (None, Some(o)) => {
                    let steps = parse_partition(o).map_err(strategy_error)?;
                    build_conventional_plan(&model, &steps).map_err(strategy_error)?
                }
                _ => {
                    return Err(CliError::Usage(
                        "build needs exactly one of --partition or --conventional".into(),
                    ))
                }
            };
            outcome.warnings.extend(built.warnings);
            let mut plan = built.plan;
            if let Some(l) = &a.label {
                plan = plan.with_label(l.clone());
            }
            let text = io::to_json(&plan)?;
            match &a.out {
                Some(p) => {
                    write_report(p, &plan)?;
                    emit(
                        out,
                        &format!(
                            "wrote {} ({} cycles, {} actions)\n",
                            p.display(),
                            plan.cycles.len(),
                            plan.actions().count()
                        ),
                    )?;
                }
                None => emit(out, &text)?,
            }
        }
        Command::Validate(a) => {
            let model: ProductModel = read_json(&a.model)?;
            let mut report = itrisk::model::validate_model(&model);
            let mut source = a.model.clone();
            if let (false, Some(p)) = (report.has_errors(), &a.plan) {
                let plan: IntegrationPlan = read_json(p)?;
                report = validate_plan(&model, &plan);
                source = p.clone();
            }
            let mut text = String::new();
            for i in &report.issues {
                let sev = match i.severity {
                    Severity::Error => "error",
                    Severity::Warning => "warning",
                };
                text.push_str(&format!(
                    "{sev}[{}] {}: {}: {}\n",
                    i.code,
                    source.display(),
                    i.location,
                    i.message
                ));
            }
            if report.has_errors() {
                return Err(CliError::Invalid(text.lines().map(String::from).collect()));
            }
            outcome.degraded = report.has_code("stop-criterion");
            text.push_str(&format!(
                "{}: {} warning(s)\n",
                source.display(),
                report.warnings().count()
            ));
            emit(out, &text)?;
        }
        Command::Budget(a) => {
            let pipeline: Pipeline<f64> = read_json(&a.pipeline)?;
            let bench = match &a.bench {
                Some(p) => read_json(p)?,
                None => ProcessorBenchmark::<f64>::tiger_sharc(),
            };
            let mut r = analyze_pipeline(&pipeline.stages, &bench, &pipeline.context)
                .map_err(|e| CliError::invalid(&a.pipeline, e))?;
            round_budget(&mut r);
            if let Some(p) = &a.report {
                write_report(p, &r)?;
            }
            if !r.feasible {
                outcome.degraded = true;
                for s in r.infeasible_stages() {
                    outcome.warnings.push(format!(
                        "stage '{}' needs {} processors but only {} are allowed",
                        s.name, s.required_processors, s.allocated_processors
                    ));
                }
            }
            emit(out, &render::budget_table(&r))?;
        }
        Command::Testset(t) => {
            let load = |p: &Path| -> Result<TestSetRegistry, CliError> {
                let reg: TestSetRegistry = read_json(p)?;
                reg.check().map_err(|e| CliError::invalid(p, e))?;
                Ok(reg)
            };
            match t {
                TestsetCommand::Reuse {
                    registry,
                    from,
                    to,
                    report,
                } => {
                    let reg = load(registry)?;
                    let d =
                        reuse_delta(&reg, from, to).map_err(|e| CliError::invalid(registry, e))?;
                    if let Some(p) = report {
                        write_report(p, &d)?;
                    }
                    let list =
                        |s: &BTreeSet<String>| s.iter().cloned().collect::<Vec<_>>().join(", ");
                    emit(
                        out,
                        &format!(
                            "{from} -> {to}: reusable [{}]; uncovered [{}]\n",
                            list(&d.reusable),
                            list(&d.uncovered_tags)
                        ),
                    )?;
                }
                TestsetCommand::Cover {
                    registry,
                    version,
                    report,
                } => {
                    let reg = load(registry)?;
                    let c =
                        cover_report(&reg, version).map_err(|e| CliError::invalid(registry, e))?;
                    if let Some(p) = report {
                        write_report(p, &c)?;
                    }
                    let mut text = format!(
                        "{version}: {} case(s): {}\n",
                        c.cases.len(),
                        c.cases.join(", ")
                    );
                    for o in &c.overlaps {
                        let shared: Vec<&str> = o.shared.iter().map(String::as_str).collect();
                        text.push_str(&format!(
                            "overlap {} / {}: {}\n",
                            o.a,
                            o.b,
                            shared.join(", ")
                        ));
                    }
                    emit(out, &text)?;
                }
            }
        }
        Command::Example(a) => {
            let text = data::example(a.name);
            match &a.out {
                Some(p) => write_atomic(p, text.as_bytes())?,
                None => emit(out, text)?,
            }
        }
    }
    Ok(outcome)
}

fn round_budget(r: &mut itrisk::budget::BudgetReport<f64>) {
    for s in &mut r.stages {
        s.per_unit_deadline = round_sig(s.per_unit_deadline);
        s.time_per_op = round_sig(s.time_per_op);
        s.scaled_stage_time = round_sig(s.scaled_stage_time);
        s.input_rate = round_sig(s.input_rate);
    }
    r.aggregate_input_rate = round_sig(r.aggregate_input_rate);
    r.io_utilization = round_sig(r.io_utilization);
}

/// Parse arguments, run, report, and map everything to an exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match <RunConfig as clap::Parser>::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(&cfg, out)));
    match result {
        Ok(Ok(outcome)) => {
            for w in &outcome.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            outcome.exit_code()
        }
        Ok(Err(e)) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
        Err(_) => {
            let _ = writeln!(err, "error: internal error (panic)");
            3
        }
    }
}

/// Bundled name for each example, for `--help` texts and docs.
pub fn example_names() -> Vec<(ExampleName, &'static str)> {
    data::ALL.to_vec()
}
