use petgraph::unionfind::UnionFind;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{loglog_slope, TailEstimate};
use crate::error::{Error, Result};
use crate::graph::{build_lattice, LatticeSpec, VertexSet};
use crate::invasion::pond;
use crate::sampling::{sample_weights, Seed, Stream, WeightDistribution};

/// `P(O ↔ distance n)` in bond percolation at `p`, for each `n` in the
/// grid: the probability that the open cluster of `O` contains a vertex at
/// graph distance `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConnectivityEstimate {
    pub lattice: String,
    pub p: f64,
    pub grid: Vec<u64>,
    pub probability: Vec<f64>,
    pub se: Vec<f64>,
    pub replicates: usize,
}

/// Estimates connectivity to distance `n` at `p_c` on the ball of radius
/// `max(grid)`. Each replicate computes the farthest distance reached by
/// the open cluster of `O`, so the estimates are nested exactly in `n`.
pub fn critical_connectivity(
    lattice: &LatticeSpec,
    p_c: f64,
    grid: &[u64],
    replicates: usize,
    seed: Seed,
) -> Result<ConnectivityEstimate> {
    if replicates == 0 || grid.is_empty() {
        return Err(Error::InvalidParams("need replicates and a grid".into()));
    }
    let max_n = *grid.iter().max().expect("non-empty grid");
    let mut spec = lattice.clone();
    spec.n = max_n.max(1) as u32;
    let g = build_lattice(&spec)?;
    let reach: Vec<u64> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = seed.rng(Stream::Aux, r);
            let mut uf = UnionFind::<usize>::new(g.num_vertices());
            for &(a, b) in g.edges() {
                if rng.gen::<f64>() < p_c {
                    uf.union(a, b);
                }
            }
            let root = uf.find(g.origin());
            (0..g.num_vertices())
                .filter(|&v| uf.find(v) == root)
                .map(|v| g.dist_from_origin(v) as u64)
                .max()
                .unwrap_or(0)
        })
        .collect();
    // reach >= n  <=>  reach > n - 1
    let counts: Vec<usize> = grid
        .iter()
        .map(|&n| reach.iter().filter(|&&d| d >= n).count())
        .collect();
    let t = TailEstimate::from_counts(grid, &counts, replicates);
    Ok(ConnectivityEstimate {
        lattice: lattice.kind.to_string(),
        p: p_c,
        grid: grid.to_vec(),
        probability: t.survival,
        se: t.se,
        replicates,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PondRow {
    pub n: u64,
    /// `P(R̂ > n)`.
    pub pond: f64,
    pub pond_se: f64,
    /// `P_cr(O ↔ ∂B(n))`, the outer boundary of `B(n)` being at distance
    /// `n + 1`.
    pub critical: f64,
    pub critical_se: f64,
    /// `pond ≥ critical - 3 · combined SE`.
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PondComparison {
    pub rows: Vec<PondRow>,
    pub pond_samples: usize,
    pub censored: usize,
    /// Realizations with `τ̂ > p_c` on which the pond was checked to
    /// contain the `p_c`-open cluster of `O`, and how many failed.
    pub containment_checked: usize,
    pub containment_failures: usize,
    pub pond_slope: Option<f64>,
    pub critical_slope: Option<f64>,
    pub flagged: bool,
}

impl PondComparison {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.passes) && self.containment_failures == 0
    }

    /// Ratio of the log-log slopes, informational only.
    pub fn slope_ratio(&self) -> Option<f64> {
        Some(self.pond_slope? / self.critical_slope?)
    }
}

/// Compares `P(R̂ > n)` for ponds in the box of radius `lattice.n` with
/// critical connectivity to `∂B(n)`.
///
/// A censored pond (outlet beyond `margin · n`, or `τ̂ ≤ p_c`) still
/// carries a lower bound on the infinite-lattice radius: the box run is
/// exact up to its stop, so the true outlet can only come later and its
/// region is larger. `τ̂ ≤ p_c` means a `p_c`-open path reaches the
/// boundary, hence `R̂ ≥ n`. Such samples count as exceedances for every
/// grid value they bound; the censoring rate is reported and flagged
/// above `max_censored`.
#[allow(clippy::too_many_arguments)]
pub fn compare_ponds(
    lattice: &LatticeSpec,
    grid: &[u64],
    pond_samples: usize,
    conn_samples: usize,
    seed: Seed,
    margin: f64,
    max_censored: f64,
) -> Result<PondComparison> {
    let p_c = lattice
        .bond_pc()
        .ok_or_else(|| Error::InvalidSpec(format!("no known p_c for {}", lattice.kind)))?;
    let n = lattice.n as u64;
    if let Some(&k) = grid.iter().find(|&&k| k as f64 >= margin * n as f64) {
        return Err(Error::InvalidParams(format!(
            "grid value {k} is not below the censoring radius {}",
            margin * n as f64
        )));
    }
    let g = build_lattice(lattice)?;
    let samples = (0..pond_samples as u64)
        .into_par_iter()
        .map(|r| -> Result<(u64, bool, Option<bool>)> {
            let mut rng = seed.rng(Stream::Weights, r);
            let w = sample_weights::<f64, _>(&g, &WeightDistribution::Uniform, &mut rng)?;
            let p = pond(&g, &w, g.origin(), p_c, margin)?;
            let lower = if p.tau_hat <= p_c {
                n.max(p.radius as u64)
            } else {
                p.radius as u64
            };
            let contained = (p.tau_hat > p_c).then(|| {
                let region = p.region();
                let mut cluster = VertexSet::from([g.origin()]);
                let mut stack = vec![g.origin()];
                while let Some(u) = stack.pop() {
                    for &(v, e) in g.neighbors(u) {
                        if w[e] < p_c && cluster.insert(v) {
                            stack.push(v);
                        }
                    }
                }
                cluster.is_subset(&region)
            });
            Ok((lower, p.censored, contained))
        })
        .collect::<Result<Vec<_>>>()?;
    let radii: Vec<u64> = samples.iter().map(|s| s.0).collect();
    let censored = samples.iter().filter(|s| s.1).count();
    let ponds = TailEstimate::from_values(grid, &radii);
    let shifted: Vec<u64> = grid.iter().map(|&k| k + 1).collect();
    let conn = critical_connectivity(lattice, p_c, &shifted, conn_samples, seed)?;
    let rows = (0..grid.len())
        .map(|i| {
            let combined = (ponds.se[i].powi(2) + conn.se[i].powi(2)).sqrt();
            PondRow {
                n: grid[i],
                pond: ponds.survival[i],
                pond_se: ponds.se[i],
                critical: conn.probability[i],
                critical_se: conn.se[i],
                passes: ponds.survival[i] >= conn.probability[i] - 3.0 * combined,
            }
        })
        .collect::<Vec<PondRow>>();
    let x: Vec<f64> = grid.iter().map(|&k| k as f64).collect();
    let checked: Vec<bool> = samples.iter().filter_map(|s| s.2).collect();
    Ok(PondComparison {
        pond_slope: loglog_slope(&x, &ponds.survival),
        critical_slope: loglog_slope(&x, &conn.probability),
        rows,
        pond_samples,
        censored,
        containment_checked: checked.len(),
        containment_failures: checked.iter().filter(|&&ok| !ok).count(),
        flagged: censored as f64 > max_censored * pond_samples as f64,
    })
}
