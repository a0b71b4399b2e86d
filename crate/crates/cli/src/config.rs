use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Risk-driven planning of integration and test.
#[derive(Debug, Parser)]
#[command(name = "itrisk", version, about)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Replay one plan and report its risk profile and KPIs.
    Simulate(SimulateArgs),
    /// Replay several plans on one model and rank them.
    Compare(CompareArgs),
    /// Search for the plan that minimizes an objective.
    Optimize(OptimizeArgs),
    /// Generate a plan from a partition or a step order.
    Build(BuildArgs),
    /// Check a model, and optionally a plan, without simulating outputs.
    Validate(ValidateArgs),
    /// Processor, board and memory budget of a DSP pipeline.
    Budget(BudgetArgs),
    /// Test-set reuse and minimal covers.
    #[command(subcommand)]
    Testset(TestsetCommand),
    /// Print or write one of the bundled example files.
    Example(ExampleArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub plan: PathBuf,
    /// Per-tick profile as `tick,risk` CSV.
    #[arg(long)]
    pub profile_csv: Option<PathBuf>,
    /// Full JSON report: KPIs, per-cycle KPIs, profile and event log.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Plan file; repeat for each plan.
    #[arg(long = "plan")]
    pub plans: Vec<PathBuf>,
    /// Inline adaptive plan such as `DSP2,DAQ2,FFT/DSP4,CFAR2,PDP2`; repeatable.
    #[arg(long = "partition")]
    pub partitions: Vec<String>,
    /// Extra weighted objective, e.g. `avg-risk=1,duration=0.1`.
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// All profiles side by side as CSV.
    #[arg(long)]
    pub profile_csv: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    AvgRisk,
    MaxRisk,
    Duration,
    Weighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exhaustive,
    Greedy,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value = "avg-risk")]
    pub objective: ObjectiveArg,
    /// Weights for `--objective weighted`, e.g. `avg-risk=1,max-risk=0.5`.
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long, default_value_t = 3)]
    pub max_cycles: usize,
    #[arg(long, value_enum, default_value = "exhaustive")]
    pub mode: ModeArg,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Best plan as plan JSON.
    #[arg(long)]
    pub plan_out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Availability blocks for an adaptive plan, `/` between cycles.
    #[arg(long, conflicts_with = "conventional")]
    pub partition: Option<String>,
    /// Step order for a single-cycle plan, `/` between steps.
    #[arg(long)]
    pub conventional: Option<String>,
    #[arg(long)]
    pub label: Option<String>,
    /// Defaults to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub plan: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    #[arg(long)]
    pub pipeline: PathBuf,
    /// Benchmark JSON; the bundled TigerSHARC figures when omitted.
    #[arg(long)]
    pub bench: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum TestsetCommand {
    /// Cases reusable from one version in another, and untested requirements.
    Reuse {
        #[arg(long)]
        registry: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Smallest case set covering a version's requirements.
    Cover {
        #[arg(long)]
        registry: PathBuf,
        #[arg(long)]
        version: String,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExampleName {
    Model,
    Scheme1,
    Scheme2,
    Pipeline,
    Bench,
    Registry,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    #[arg(value_enum)]
    pub name: ExampleName,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// (inputs, outputs) named on the command line.
    pub fn paths(&self) -> (Vec<&PathBuf>, Vec<&PathBuf>) {
        match &self.command {
            Command::Simulate(a) => (
                vec![&a.model, &a.plan],
                [opt(&a.profile_csv), opt(&a.report), opt(&a.svg)].concat(),
            ),
            Command::Compare(a) => (
                std::iter::once(&a.model).chain(&a.plans).collect(),
                [opt(&a.report), opt(&a.profile_csv), opt(&a.svg)].concat(),
            ),
            Command::Optimize(a) => (
                vec![&a.model],
                [opt(&a.report), opt(&a.plan_out), opt(&a.svg)].concat(),
            ),
            Command::Build(a) => (vec![&a.model], opt(&a.out)),
            Command::Validate(a) => ([vec![&a.model], opt(&a.plan)].concat(), vec![]),
            Command::Budget(a) => ([vec![&a.pipeline], opt(&a.bench)].concat(), opt(&a.report)),
            Command::Testset(TestsetCommand::Reuse {
                registry, report, ..
            })
            | Command::Testset(TestsetCommand::Cover {
                registry, report, ..
            }) => (vec![registry], opt(report)),
            Command::Example(a) => (vec![], opt(&a.out)),
        }
    }
}

fn opt(p: &Option<PathBuf>) -> Vec<&PathBuf> {
    p.as_ref().into_iter().collect()
}
