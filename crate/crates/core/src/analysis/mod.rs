//! Monte Carlo experiments: survival curves, `ξ(p)`, critical
//! connectivity and ponds, exponential fits and run manifests.
//!
//! Replicates run in parallel on rayon; every replicate draws from its own
//! generator `(seed, stream, replicate)` and results are combined by
//! summing counts in replicate order, so estimates do not depend on the
//! number of worker threads.

mod fit;
mod ponds;
mod tails;
mod xi;

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::LatticeSpec;
use crate::sampling::{Params, Seed, WeightDistribution};

pub use fit::{fit_exponential, loglog_slope, ExpFit};
pub use ponds::{compare_ponds, critical_connectivity, ConnectivityEstimate, PondComparison, PondRow};
pub use tails::{tail_of_green_cluster, tail_of_responsibility, GreenClusterTails, ResponsibilityTails};
pub use xi::{estimate_xi, estimate_xi_on, XiEstimate};

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub lattice: LatticeSpec,
    pub params: Params,
    pub dist: WeightDistribution,
    pub replicates: usize,
    pub seed: Seed,
    pub n_grid: Vec<u64>,
    /// Selection budget per run of the exploration algorithm.
    pub step_budget: usize,
    /// Largest tolerated fraction of excluded or budget-exhausted
    /// replicates before the experiment is flagged.
    pub max_excluded_rate: f64,
}

impl ExperimentConfig {
    pub fn new(lattice: LatticeSpec, params: Params, replicates: usize, seed: u64) -> Self {
        ExperimentConfig {
            lattice,
            params,
            dist: WeightDistribution::Exponential,
            replicates,
            seed: Seed(seed),
            n_grid: (1..=20).collect(),
            step_budget: 1_000_000,
            max_excluded_rate: 0.01,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidParams("replicates must be at least 1".into()));
        }
        if self.n_grid.is_empty() {
            return Err(Error::InvalidParams("empty n grid".into()));
        }
        self.lattice.validate()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "lattice": self.lattice.kind.to_string(),
            "n": self.lattice.n,
            "boundary": format!("{:?}", self.lattice.boundary).to_lowercase(),
            "p_w": self.params.p_w,
            "p_r": self.params.p_r,
            "p_g": self.params.p_g,
            "distribution": self.dist.name(),
            "replicates": self.replicates,
            "seed": self.seed.0,
            "n_grid": self.n_grid,
            "step_budget": self.step_budget,
            "max_excluded_rate": self.max_excluded_rate,
        })
    }
}

/// Empirical survival function `P(X > n)` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailEstimate {
    pub grid: Vec<u64>,
    pub survival: Vec<f64>,
    pub se: Vec<f64>,
    /// Replicates entering the estimate.
    pub replicates: usize,
}

impl TailEstimate {
    /// Builds the curve from per-replicate values; survival at `n` counts
    /// values strictly above `n`.
    pub fn from_values(grid: &[u64], values: &[u64]) -> Self {
        let counts = grid
            .iter()
            .map(|&n| values.iter().filter(|&&v| v > n).count())
            .collect::<Vec<_>>();
        Self::from_counts(grid, &counts, values.len())
    }

    pub fn from_counts(grid: &[u64], exceed: &[usize], replicates: usize) -> Self {
        let n = replicates.max(1) as f64;
        let survival: Vec<f64> = exceed.iter().map(|&c| c as f64 / n).collect();
        let se = survival.iter().map(|&p| (p * (1.0 - p) / n).sqrt()).collect();
        TailEstimate {
            grid: grid.to_vec(),
            survival,
            se,
            replicates,
        }
    }

    pub fn is_monotone(&self) -> bool {
        self.survival.windows(2).all(|w| w[1] <= w[0])
    }

    /// CSV with columns `n,survival,se,N`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "survival", "se", "N"])?;
        for i in 0..self.grid.len() {
            w.write_record([
                self.grid[i].to_string(),
                format!("{:.10}", self.survival[i]),
                format!("{:.10}", self.se[i]),
                self.replicates.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("csv", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(file)
    }
}

/// Hex SHA-256 of a configuration's canonical JSON.
pub fn config_hash(config: &Value) -> String {
    let digest = Sha256::digest(config.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// `git describe` of the working tree, or `"unknown"` outside a checkout.
pub fn git_describe() -> String {
    std::process::Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .unwrap_or_else(|| "unknown".into())
}

/// Run manifest: configuration, master seed, config hash and source
/// version. Contains no timestamps, so reruns are byte-identical.
pub fn manifest(config: &Value, seed: Seed, results: Value) -> Value {
    json!({
        "config": config,
        "seed": seed.0,
        "config_hash": config_hash(config),
        "git_describe": git_describe(),
        "results": results,
    })
}

/// Runs `f` on a pool with `jobs` threads (all cores when `None`).
pub fn with_jobs<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

pub(crate) fn check_rate(what: &str, bad: usize, total: usize, limit: f64) -> Result<()> {
    let rate = bad as f64 / total.max(1) as f64;
    if rate > limit {
        return Err(Error::ThresholdExceeded {
            what: what.to_string(),
            rate,
            limit,
        });
    }
    Ok(())
}
