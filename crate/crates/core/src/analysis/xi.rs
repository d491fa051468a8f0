use std::collections::{HashMap, VecDeque};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{build_lattice, Graph, LatticeSpec};
use crate::sampling::{Seed, Stream};

/// Monte Carlo estimate of `ξ_O(p)`, the expected number of vertices in
/// the occupied cluster of `O` in site percolation, with volume 0 when `O`
/// is vacant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XiEstimate {
    pub p: f64,
    pub mean: f64,
    pub se: f64,
    /// 95% confidence interval.
    pub ci: (f64, f64),
    pub replicates: usize,
    pub box_radius: u32,
    /// Replicates whose cluster reached the box boundary (volume
    /// truncated there).
    pub truncated: usize,
}

impl XiEstimate {
    pub fn truncation_rate(&self) -> f64 {
        self.truncated as f64 / self.replicates.max(1) as f64
    }
}

/// Occupied cluster of the origin, exploring sites lazily so that a
/// replicate only draws for the sites it touches.
fn cluster_volume<R: Rng>(g: &Graph, p: f64, rng: &mut R) -> (u64, bool) {
    let origin = g.origin();
    if rng.gen::<f64>() >= p {
        return (0, false);
    }
    let mut state: HashMap<usize, bool> = HashMap::from([(origin, true)]);
    let mut queue = VecDeque::from([origin]);
    let mut volume = 1;
    let mut truncated = false;
    while let Some(u) = queue.pop_front() {
        truncated |= g.on_box_boundary(u);
        for &(w, _) in g.neighbors(u) {
            if state.contains_key(&w) {
                continue;
            }
            let occupied = rng.gen::<f64>() < p;
            state.insert(w, occupied);
            if occupied {
                volume += 1;
                queue.push_back(w);
            }
        }
    }
    (volume, truncated)
}

/// Estimates `ξ(p)` on the ball `B(n)` of `lattice` (the lattices offered
/// are vertex-transitive, so `ξ = ξ_O`). Fails when more than
/// `max_truncation` of the replicates reach the boundary.
pub fn estimate_xi(
    lattice: &LatticeSpec,
    p: f64,
    replicates: usize,
    seed: Seed,
    max_truncation: f64,
) -> Result<XiEstimate> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidParams(format!("p = {p} not in [0, 1)")));
    }
    if replicates == 0 {
        return Err(Error::InvalidParams("replicates must be at least 1".into()));
    }
    let g = build_lattice(lattice)?;
    let est = estimate_xi_on(&g, p, replicates, seed);
    super::check_rate("truncation", est.truncated, replicates, max_truncation)?;
    Ok(XiEstimate {
        box_radius: lattice.n,
        ..est
    })
}

/// Same estimator on an arbitrary graph, from its origin. Truncation is
/// reported but never an error.
pub fn estimate_xi_on(g: &Graph, p: f64, replicates: usize, seed: Seed) -> XiEstimate {
    let samples: Vec<(u64, bool)> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| cluster_volume(g, p, &mut seed.rng(Stream::Aux, r)))
        .collect();
    let n = replicates as f64;
    let sum: u64 = samples.iter().map(|s| s.0).sum();
    let sum_sq: u64 = samples.iter().map(|s| s.0 * s.0).sum();
    let mean = sum as f64 / n;
    let var = if replicates > 1 {
        (sum_sq as f64 - n * mean * mean) / (n - 1.0)
    } else {
        0.0
    };
    let se = (var.max(0.0) / n).sqrt();
    XiEstimate {
        p,
        mean,
        se,
        ci: (mean - 1.96 * se, mean + 1.96 * se),
        replicates,
        box_radius: g.box_radius().unwrap_or(0),
        truncated: samples.iter().filter(|s| s.1).count(),
    }
}
