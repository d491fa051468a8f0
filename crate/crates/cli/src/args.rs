use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use spatial_growth::{
    build_lattice, ExperimentConfig, Graph, LatticeKind, LatticeSpec, Params, Rule, WeightDistribution,
};

fn parse_kind(s: &str) -> Result<LatticeKind, String> {
    s.parse().map_err(|e: spatial_growth::Error| e.to_string())
}

fn parse_rule(s: &str) -> Result<Rule, String> {
    s.parse().map_err(|e: spatial_growth::Error| e.to_string())
}

fn parse_dist(s: &str) -> Result<DistName, String> {
    s.parse::<WeightDistribution>()
        .map(|d| DistName(d.name()))
        .map_err(|e| e.to_string())
}

/// Name of a built-in weight distribution.
#[derive(Debug, Clone, Copy)]
pub struct DistName(&'static str);

impl DistName {
    pub fn get(self) -> WeightDistribution {
        self.0.parse().expect("validated at parse time")
    }
}

/// A list of grid points, `1,2,4,8` or an inclusive range `1..20`.
#[derive(Debug, Clone)]
pub struct Grid(pub Vec<u64>);

fn parse_grid(s: &str) -> Result<Grid, String> {
    let bad = |_| format!("bad grid {s:?}; use `1,2,4` or `1..20`");
    let values: Vec<u64> = if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse().map_err(bad)?, b.trim().parse().map_err(bad)?);
        (a..=b).collect()
    } else {
        s.split(',').map(|t| t.trim().parse().map_err(bad)).collect::<Result<_, _>>()?
    };
    if values.is_empty() || values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(format!("grid {s:?} must be non-empty and increasing"));
    }
    Ok(Grid(values))
}

#[derive(Args, Debug, Clone)]
pub struct GraphArgs {
    /// square, triangular, hexagonal, path, hypercubic<d>, or custom:<edge list file>.
    #[arg(long, default_value = "square", value_parser = parse_kind)]
    pub lattice: LatticeKind,
    /// Radius of the ball B(n); a periodic box has side 2n+1.
    #[arg(long, default_value_t = 16)]
    pub n: u32,
    /// Periodic boundary (torus) instead of the ball.
    #[arg(long)]
    pub periodic: bool,
    /// Origin vertex id for custom graphs.
    #[arg(long)]
    pub origin: Option<usize>,
}

impl GraphArgs {
    pub fn spec(&self) -> LatticeSpec {
        let mut spec = LatticeSpec::new(self.lattice.clone(), self.n);
        spec.origin = self.origin;
        if self.periodic {
            spec = spec.periodic();
        }
        spec
    }

    pub fn build(&self) -> Result<Graph> {
        Ok(build_lattice(&self.spec())?)
    }
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Probability of an initially white vertex.
    #[arg(long, default_value_t = 0.0)]
    pub pw: f64,
    /// Probability of an initially red vertex; the rest are green.
    #[arg(long, default_value_t = 0.2)]
    pub pr: f64,
    /// Opening-time distribution: exponential or uniform.
    #[arg(long, default_value = "exponential", value_parser = parse_dist)]
    pub dist: DistName,
}

impl ModelArgs {
    pub fn params(&self) -> Result<Params> {
        Ok(Params::white_red(self.pw, self.pr)?)
    }
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Master seed; every random stream derives from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    /// Run the built-in five-vertex example instead of a sampled lattice.
    #[arg(long = "example-1-2")]
    pub example: bool,
    /// Opening rule: exposure (total green time) or contiguous (unbroken green time).
    #[arg(long, default_value = "exposure", value_parser = parse_rule)]
    pub rule: Rule,
    /// Refuse graphs with more vertices.
    #[arg(long, default_value_t = 10_000_000)]
    pub vertex_budget: usize,
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug, Clone)]
pub struct AutonomousArgs {
    /// Use the built-in five-vertex example.
    #[arg(long = "example-1-2")]
    pub example: bool,
    /// Vertex id to explore from (default: the origin).
    #[arg(long)]
    pub vertex: Option<usize>,
    /// Maximal number of edge selections.
    #[arg(long, default_value_t = 1_000_000)]
    pub step_budget: usize,
    /// Replicates for the estimate of ξ(p_w) in the condition check.
    #[arg(long, default_value_t = 20_000)]
    pub xi_replicates: usize,
    /// Random extensions outside H used to confirm autonomy (0 to skip).
    #[arg(long, default_value_t = 0)]
    pub extensions: usize,
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Stopped invasion against the simulation, no white vertices.
    StoppedInvasion,
    /// Min-max path bound against the simulated paralysis time.
    MinMax,
    /// Exploration algorithm times against the simulation.
    Algorithm,
    /// Resampling outside (H, Ē) leaves the evolution on H unchanged.
    Autonomy,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultName {
    /// Move one vertex across the split of the stopped invasion tree.
    PerturbT1,
    /// Paralysis time of a whole tree set to the triggering edge's time.
    FlatParalysisTime,
    /// Exposure credit counted in full even while still green.
    FullCredit,
    /// No exposure credit for registered white vertices.
    NoExposureCredit,
    /// Smallest external edge left out of Ē.
    DropExternalEdge,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    /// Suites to run (repeatable; default: all).
    #[arg(long = "suite", value_enum)]
    pub suites: Vec<Suite>,
    /// Instances per suite.
    #[arg(long, default_value_t = 200)]
    pub cases: usize,
    /// Largest random graph.
    #[arg(long, default_value_t = 30)]
    pub max_vertices: usize,
    /// Random extensions per instance in the autonomy suite.
    #[arg(long, default_value_t = 20)]
    pub extensions: usize,
    /// Deliberate error, to confirm that the suites detect it.
    #[arg(long, value_enum)]
    pub fault: Option<FaultName>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug, Clone)]
pub struct PondsArgs {
    /// Accepted pond samples.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Samples of critical bond percolation.
    #[arg(long, default_value_t = 100_000)]
    pub conn_samples: usize,
    /// Radii at which tails are compared.
    #[arg(long, default_value = "2,4,8,16", value_parser = parse_grid)]
    pub grid: Grid,
    /// Grid values must stay below this fraction of n.
    #[arg(long, default_value_t = 0.5)]
    pub margin: f64,
    /// Censored-sample rate above which the run is flagged.
    #[arg(long, default_value_t = 0.5)]
    pub max_censored: f64,
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug, Clone)]
pub struct TailsArgs {
    #[arg(long, default_value_t = 10_000)]
    pub replicates: usize,
    /// Thresholds n of the survival functions P(X > n).
    #[arg(long, default_value = "1..20", value_parser = parse_grid)]
    pub n_grid: Grid,
    /// Maximal edge selections per exploration run.
    #[arg(long, default_value_t = 1_000_000)]
    pub step_budget: usize,
    /// Excluded or exhausted fraction above which the run is flagged.
    #[arg(long, default_value_t = 0.01)]
    pub max_excluded: f64,
    /// Also estimate responsibility-set tails.
    #[arg(long)]
    pub responsibility: bool,
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

impl TailsArgs {
    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::new(self.graph.spec(), self.model.params()?, self.replicates, self.run.seed);
        cfg.dist = self.model.dist.get();
        cfg.n_grid = self.n_grid.0.clone();
        cfg.step_budget = self.step_budget;
        cfg.max_excluded_rate = self.max_excluded;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug, Clone)]
pub struct XiArgs {
    /// Site occupation probability.
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 100_000)]
    pub replicates: usize,
    /// Largest fraction of clusters allowed to reach the box boundary.
    #[arg(long, default_value_t = 0.001)]
    pub max_truncation: f64,
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

pub fn reject_example_with(example: bool, graph: &GraphArgs) -> Result<()> {
    if example && (graph.periodic || graph.origin.is_some()) {
        bail!("--example-1-2 fixes the graph; drop --periodic and --origin");
    }
    Ok(())
}
