//! Independent checks of a finished run against the direct simulation.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use super::AutonomousResult;
use crate::analysis::XiEstimate;
use crate::direct_sim::{simulate, SimOptions, Trace};
use crate::error::Result;
use crate::graph::{EdgeId, Graph, VertexId};
use crate::sampling::{sample_colours, ColourField, EdgeWeights, Params, Seed, Stream, WeightDistribution};
use crate::scalar::Scalar;

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AutonomyReport {
    pub trials: usize,
    pub failed_trials: usize,
    /// First divergence found, with the trial it occurred in (0 is the
    /// unmodified configuration).
    pub first_mismatch: Option<(usize, String)>,
}

impl AutonomyReport {
    pub fn passed(&self) -> bool {
        self.failed_trials == 0
    }
}

/// Restriction of a trace to `H`: green and red times of its vertices and
/// opening times of its edges.
#[derive(Debug, Clone, PartialEq)]
struct Restricted {
    vertices: BTreeMap<VertexId, (Option<f64>, Option<f64>)>,
    edges: BTreeMap<EdgeId, Option<f64>>,
}

fn restrict<T: Scalar>(trace: &Trace<T>, res: &AutonomousResult<T>) -> Restricted {
    Restricted {
        vertices: res
            .h_vertices
            .iter()
            .map(|&v| {
                (
                    v,
                    (
                        trace.green_time(v).map(Scalar::as_f64),
                        trace.paralysis_time(v).map(Scalar::as_f64),
                    ),
                )
            })
            .collect(),
        edges: res
            .h_edges
            .iter()
            .map(|&e| (e, trace.opening_time(e).map(Scalar::as_f64)))
            .collect(),
    }
}

fn close(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(a), Some(b)) => (a - b).abs() <= TOL,
        _ => false,
    }
}

fn diff(a: &Restricted, b: &Restricted) -> Option<String> {
    for (v, (ga, ra)) in &a.vertices {
        let (gb, rb) = b.vertices[v];
        if !close(*ga, gb) {
            return Some(format!("vertex {v}: green at {ga:?} vs {gb:?}"));
        }
        if !close(*ra, rb) {
            return Some(format!("vertex {v}: red at {ra:?} vs {rb:?}"));
        }
    }
    for (e, ta) in &a.edges {
        if !close(*ta, b.edges[e]) {
            return Some(format!("edge {e}: opened at {ta:?} vs {:?}", b.edges[e]));
        }
    }
    None
}

/// Compares the result's own times with one simulated trace.
fn against_result<T: Scalar>(r: &Restricted, res: &AutonomousResult<T>) -> Option<String> {
    for (&v, &(g, red)) in &r.vertices {
        let claimed_g = res.t_g.get(&v).map(|t| t.as_f64());
        if !close(claimed_g, g) {
            return Some(format!("vertex {v}: t_g = {claimed_g:?} but simulated {g:?}"));
        }
        let claimed_r = res.t_r.get(&v).map(|t| t.as_f64());
        if !close(claimed_r, red) {
            return Some(format!("vertex {v}: t_r = {claimed_r:?} but simulated {red:?}"));
        }
    }
    for (&e, t) in &res.t_edge {
        let sim = r.edges.get(&e).copied().flatten();
        if !close(Some(t.as_f64()), sim) {
            return Some(format!("edge {e}: t(e) = {} but simulated {sim:?}", t.as_f64()));
        }
    }
    None
}

/// Checks that `(H, Ē)` is autonomous and that the result's times are the
/// true ones.
///
/// Trial 0 simulates the given configuration. Every further trial keeps
/// the colours on `H` and the opening times on `E(H) ∪ Ē`, resamples
/// everything else, and simulates again. All trials must agree on `H` with
/// each other and with the result.
#[allow(clippy::too_many_arguments)]
pub fn verify_autonomous<T: Scalar>(
    g: &Graph,
    colours: &ColourField,
    weights: &EdgeWeights<T>,
    result: &AutonomousResult<T>,
    params: &Params,
    dist: &WeightDistribution,
    trials: usize,
    seed: Seed,
) -> Result<AutonomyReport> {
    let opts = SimOptions::default();
    let mut keep_edge = vec![false; g.num_edges()];
    for &e in result.h_edges.iter().chain(&result.external) {
        keep_edge[e] = true;
    }
    let reference = restrict(&simulate(g, colours, weights, opts)?, result);
    let mut report = AutonomyReport {
        trials: trials + 1,
        failed_trials: 0,
        first_mismatch: None,
    };
    let record = |trial: usize, msg: Option<String>, report: &mut AutonomyReport| {
        if let Some(msg) = msg {
            report.failed_trials += 1;
            report.first_mismatch.get_or_insert((trial, msg));
        }
    };
    record(0, against_result(&reference, result), &mut report);
    for trial in 1..=trials {
        let mut rng = seed.rng(Stream::Extension, trial as u64);
        let mut c = sample_colours(g, params, &mut rng);
        for &v in &result.h_vertices {
            c.set(v, colours[v]);
        }
        let mut w = weights.clone();
        for (e, &keep) in keep_edge.iter().enumerate() {
            if !keep {
                let t = dist.quantile(rng.sample(rand::distributions::Open01));
                w.set(e, T::from_f64(t).expect("finite sample"));
            }
        }
        let r = restrict(&simulate(g, &c, &w, opts)?, result);
        let msg = diff(&reference, &r).or_else(|| against_result(&r, result));
        record(trial, msg, &mut report);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub holds: bool,
    /// `(D-1) ξ̂(p_w)`.
    pub lhs: f64,
    pub p_r: f64,
    /// `p_r - (D-1) ξ̂(p_w)`; positive when the condition holds.
    pub margin: f64,
    /// Same with `ξ̂` replaced by the upper end of its confidence interval.
    pub margin_upper: f64,
}

/// Evaluates `(D-1) ξ(p_w) < p_r` with an estimate of `ξ`. Advisory: the
/// algorithm may terminate even when it fails.
pub fn check_condition(params: &Params, g: &Graph, xi: &XiEstimate) -> ConditionCheck {
    let d = g.max_degree().saturating_sub(1) as f64;
    let lhs = d * xi.mean;
    let margin = params.p_r - lhs;
    ConditionCheck {
        holds: params.p_r > 0.0 && margin > 0.0,
        lhs,
        p_r: params.p_r,
        margin,
        margin_upper: params.p_r - d * xi.ci.1,
    }
}
