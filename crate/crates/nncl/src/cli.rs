//! `nncl bivariate | learn | simulate | evaluate`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use nncl_core::bivariate::{bivariate_discover, BivariateConfig, Screen};
use nncl_core::consensus::consensus;
use nncl_core::metrics::{holdout_loglik, score};
use nncl_core::nncl::{run_pipeline, Learner, NnclConfig, PipelineConfig};
use nncl_core::piecewise::fit_direction;
use nncl_core::simulate::{assign_nonlinear, builtin, ground_truth, simulate, Family, SimConfig, TruthPolicy};
use nncl_core::{Dataset, Error, Method, QuantileGrid, RngStream, TestConfig};

use crate::io::{parse_edge_list, read_csv, write_csv, write_edge_list, FormatError, NamedGraph};
use crate::report::{ConsensusJson, Fits, FitJson, LearnReport, RunSettings, ScoreReport, VerdictReport};
use crate::Rayon;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 usage, 3 data, 4 infeasible model.
    pub fn exit_code(&self) -> i32 {
        fn core(e: &Error) -> i32 {
            match e {
                Error::Config(_) => 2,
                Error::InfeasibleFit(_) | Error::Inextensible | Error::Degenerate(_) => 4,
                _ => 3,
            }
        }
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) | CliError::Format(FormatError::Core(e)) => core(e),
            _ => 3,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "nncl", version, about = "Causal network learning with non-invertible edges")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Direction verdict for a two-column CSV.
    Bivariate(BivariateArgs),
    /// Learn a graph from a CSV.
    Learn(LearnArgs),
    /// Simulate data from a network.
    Simulate(SimulateArgs),
    /// Score an estimated edge list against the truth.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Bootstrap,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Levels 0.01.
    Default,
    /// Levels 0.001.
    Strict,
}

impl Preset {
    fn level(self) -> f64 {
        match self {
            Preset::Default => 0.01,
            Preset::Strict => 0.001,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    #[arg(long, value_enum, default_value_t = Preset::Default)]
    pub preset: Preset,
    /// Direction test level.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum, default_value_t = MethodArg::Normal)]
    pub method: MethodArg,
    /// Bootstrap replicates.
    #[arg(long, default_value_t = 500)]
    pub reps: usize,
    /// Normal-approximation draws.
    #[arg(long, default_value_t = 100_000)]
    pub draws: usize,
    /// Number of candidate cut quantiles in [0.25, 0.75].
    #[arg(long, default_value_t = 11)]
    pub grid: usize,
    #[arg(long)]
    pub min_segment: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl TestArgs {
    fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(self.preset.level())
    }

    fn config(&self) -> Result<TestConfig> {
        let mut grid = QuantileGrid::evenly(self.grid)?;
        if let Some(m) = self.min_segment {
            grid = grid.with_min_segment(m);
        }
        let method = match self.method {
            MethodArg::Bootstrap => Method::Bootstrap,
            MethodArg::Normal => Method::Normal,
        };
        let cfg = TestConfig { method, bootstrap_reps: self.reps, normal_draws: self.draws, grid };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScreenArg {
    FisherZ,
    FisherZOrSegmented,
}

#[derive(Debug, Clone, Args)]
pub struct BivariateArgs {
    /// CSV with exactly two columns.
    pub data: PathBuf,
    #[command(flatten)]
    pub test: TestArgs,
    #[arg(long, value_enum, default_value_t = ScreenArg::FisherZOrSegmented)]
    pub screen: ScreenArg,
    #[arg(long)]
    pub screen_alpha: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LearnerArg {
    Pc,
    None,
}

#[derive(Debug, Clone, Args)]
pub struct LearnArgs {
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = LearnerArg::Pc)]
    pub learner: LearnerArg,
    /// Edge list used as the initial graph instead of a learner.
    #[arg(long)]
    pub initial_graph: Option<PathBuf>,
    #[arg(long)]
    pub outside_search: bool,
    /// Bootstrap replicates for a consensus graph.
    #[arg(long)]
    pub consensus: Option<usize>,
    #[arg(long, default_value_t = 0.6)]
    pub threshold: f64,
    #[arg(long)]
    pub ci_alpha: Option<f64>,
    #[arg(long)]
    pub pc_alpha: Option<f64>,
    #[arg(long, default_value_t = 3)]
    pub max_cond: usize,
    #[command(flatten)]
    pub test: TestArgs,
    /// Edge list destination (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report destination.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Linear,
    TypeI,
    TypeII,
    TypeIII,
    TypeIV,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Linear => Family::Linear,
            FamilyArg::TypeI => Family::TypeI,
            FamilyArg::TypeII => Family::TypeII,
            FamilyArg::TypeIII => Family::TypeIII,
            FamilyArg::TypeIV => Family::TypeIV,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TruthArg {
    /// Every nonlinear edge is fixed.
    All,
    /// Only nonlinear edges that are non-monotone on the simulated range.
    NonMonotone,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Built-in network: asia, collider, five, chainK.
    #[arg(long, conflicts_with = "dag", required_unless_present = "dag")]
    pub network: Option<String>,
    /// Fully directed edge list.
    #[arg(long)]
    pub dag: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    pub fraction: f64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "type-i")]
    pub families: Vec<FamilyArg>,
    #[arg(long, short, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub noise_sd: f64,
    #[arg(long, value_enum, default_value_t = TruthArg::All)]
    pub truth_policy: TruthArg,
    /// Receives data.csv, spec.json and truth.edges.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub estimate: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long, requires = "test")]
    pub train: Option<PathBuf>,
    #[arg(long, requires = "train")]
    pub test: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })
}

fn read_data(path: &Path) -> Result<Dataset> {
    let f = fs::File::open(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    Ok(read_csv(f)?)
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|source| CliError::Io { path: p.into(), source }),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(v)?;
    s.push(b'\n');
    Ok(s)
}

fn check_level(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("{name} must lie in (0, 1), got {v}")))
    }
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        // fails only if the pool was already built, e.g. in tests
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match cli.command {
        Command::Bivariate(a) => cmd_bivariate(&a),
        Command::Learn(a) => cmd_learn(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
    }
}

pub fn cmd_bivariate(a: &BivariateArgs) -> Result<()> {
    let data = read_data(&a.data)?;
    if data.n_vars() != 2 {
        return Err(Error::InvalidData(format!("expected 2 columns, found {}", data.n_vars())).into());
    }
    let cfg = BivariateConfig {
        alpha: check_level("--alpha", a.test.alpha())?,
        screen_alpha: a.screen_alpha.map(|v| check_level("--screen-alpha", v)).transpose()?,
        screen: match a.screen {
            ScreenArg::FisherZ => Screen::FisherZ,
            ScreenArg::FisherZOrSegmented => Screen::FisherZOrSegmented,
        },
        test: a.test.config()?,
    };
    let (x, y) = (data.column(0), data.column(1));
    let verdict = bivariate_discover(x, y, &cfg, &RngStream::from_seed(a.test.seed))?;
    let fits = Fits {
        forward: fit_direction(x, y, &cfg.test.grid).ok().as_ref().map(FitJson::from),
        backward: fit_direction(y, x, &cfg.test.grid).ok().as_ref().map(FitJson::from),
    };
    let names = data.names();
    let report = VerdictReport::new(&verdict, &names[0], &names[1], fits);
    write_out(a.out.as_deref(), &json_bytes(&report)?)
}

pub fn cmd_learn(a: &LearnArgs) -> Result<()> {
    let data = read_data(&a.data)?;
    let names = data.names().to_vec();
    let alpha = check_level("--alpha", a.test.alpha())?;
    let ci_alpha = check_level("--ci-alpha", a.ci_alpha.unwrap_or(a.test.preset.level()))?;
    let pc_alpha = check_level("--pc-alpha", a.pc_alpha.unwrap_or(a.test.preset.level()))?;
    let (learner, learner_name) = match (&a.initial_graph, a.learner) {
        (Some(path), _) => {
            let g = parse_edge_list(&read_text(path)?, Some(&names))?;
            (Learner::Initial(g.graph), "initial-graph")
        }
        (None, LearnerArg::Pc) => (Learner::Pc { alpha: pc_alpha, max_cond: a.max_cond }, "pc"),
        (None, LearnerArg::None) => (Learner::Empty, "none"),
    };
    let nncl = NnclConfig { alpha, ci_alpha, test: a.test.config()?, seed: a.test.seed };
    nncl.validate()?;
    let outside = a.outside_search || learner == Learner::Empty;
    let cfg = PipelineConfig { learner, nncl, outside_search: outside };
    let settings = RunSettings {
        learner: learner_name.into(),
        alpha,
        ci_alpha,
        pc_alpha,
        max_cond: a.max_cond,
        method: cfg.nncl.test.method,
        bootstrap_reps: cfg.nncl.test.bootstrap_reps,
        normal_draws: cfg.nncl.test.normal_draws,
        outside_search: outside,
        seed: a.test.seed,
    };

    let (report, graph) = match a.consensus {
        Some(r) => {
            let rng = RngStream::from_seed(a.test.seed).child(2);
            let out = consensus(&data, &cfg, r, a.threshold, &rng, &Rayon)?;
            log::info!("consensus over {r} replicates, {} dropped", out.dropped.len());
            let cjson = ConsensusJson::new(&out, a.threshold, &names);
            (LearnReport::new(&names, settings, &out.point.initial, &out.point.state, &out.graph, Some(cjson)), out.graph)
        }
        None => {
            let out = run_pipeline(&data, &cfg, &Rayon)?;
            log::info!("{} commits", out.state.commits().count());
            (LearnReport::new(&names, settings, &out.initial, &out.state, &out.state.graph, None), out.state.graph)
        }
    };
    write_out(a.out.as_deref(), write_edge_list(&NamedGraph { names: names.clone(), graph }).as_bytes())?;
    if let Some(p) = &a.report {
        write_out(Some(p), &json_bytes(&report)?)?;
    }
    Ok(())
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    if !(0.0..=1.0).contains(&a.fraction) {
        return Err(CliError::Usage(format!("--fraction must lie in [0, 1], got {}", a.fraction)));
    }
    if a.n == 0 {
        return Err(CliError::Usage("--n must be positive".into()));
    }
    if !(a.noise_sd > 0.0 && a.noise_sd.is_finite()) {
        return Err(CliError::Usage("--noise-sd must be positive".into()));
    }
    let (names, dag) = match (&a.network, &a.dag) {
        (Some(name), _) => {
            let net = builtin(name).ok_or_else(|| CliError::Usage(format!("unknown network `{name}`")))?;
            (net.names, net.dag)
        }
        (None, Some(path)) => {
            let g = parse_edge_list(&read_text(path)?, None)?;
            if !g.graph.is_fully_directed() {
                return Err(Error::InvalidGraph("--dag must contain directed edges only".into()).into());
            }
            if !g.graph.is_acyclic() {
                return Err(Error::Cyclic.into());
            }
            (g.names, g.graph)
        }
        (None, None) => return Err(CliError::Usage("one of --network or --dag is required".into())),
    };
    let cfg = SimConfig { families: a.families.iter().map(|&f| f.into()).collect(), noise_sd: a.noise_sd, ..SimConfig::default() };
    let root = RngStream::from_seed(a.seed);
    let spec = assign_nonlinear(&dag, &names, a.fraction, &cfg, &root.child(0))?;
    let data = simulate(&spec, a.n, &root.child(1))?;
    let truth = match a.truth_policy {
        TruthArg::All => ground_truth(&spec, TruthPolicy::AllNonlinear)?,
        TruthArg::NonMonotone => ground_truth(&spec, TruthPolicy::NonMonotoneOn(&data))?,
    };
    let dir = &a.out_dir;
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
    let mut csv = Vec::new();
    write_csv(&data, &mut csv)?;
    write_out(Some(&dir.join("data.csv")), &csv)?;
    write_out(Some(&dir.join("spec.json")), &json_bytes(&spec)?)?;
    let edges = write_edge_list(&NamedGraph { names, graph: truth });
    write_out(Some(&dir.join("truth.edges")), edges.as_bytes())
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> Result<()> {
    let split = match (&a.train, &a.test) {
        (Some(tr), Some(te)) => Some((read_data(tr)?, read_data(te)?)),
        _ => None,
    };
    let truth = match &split {
        Some((train, _)) => parse_edge_list(&read_text(&a.truth)?, Some(train.names()))?,
        None => parse_edge_list(&read_text(&a.truth)?, None)?,
    };
    let est = parse_edge_list(&read_text(&a.estimate)?, Some(&truth.names))?;
    let s = score(&est.graph, &truth.graph)?;
    let ll = match &split {
        Some((train, test)) => Some(holdout_loglik(&est.graph, train, test)?),
        None => None,
    };
    write_out(a.out.as_deref(), &json_bytes(&ScoreReport::new(s, ll))?)
}
