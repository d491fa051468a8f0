use rayon::prelude::*;
use serde::Serialize;

use super::{fit_exponential, ExpFit, ExperimentConfig, TailEstimate};
use crate::autonomous::{diagnostics, run_algorithm, AlgoOptions};
use crate::direct_sim::{simulate, SimOptions};
use crate::error::Result;
use crate::graph::{build_lattice, Graph, VertexSet};
use crate::invasion::stopped_invasion;
use crate::sampling::{sample_colours, sample_weights, Colour, ColourField, EdgeWeights, Stream};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreenClusterTails {
    /// `P(|C_g(O)| > n)`.
    pub volume: TailEstimate,
    /// `P(radius of C_g(O) > n)`.
    pub radius: TailEstimate,
    /// `P(invasion steps > n)`, without white vertices only.
    pub steps: Option<TailEstimate>,
    pub volume_fit: Option<ExpFit>,
    pub replicates: usize,
    /// Runs whose explored region touched the box boundary.
    pub excluded: usize,
    pub budget_exhausted: usize,
    /// Pooled `α_k` over all steps of all accepted runs.
    pub alpha_mean: f64,
    pub alpha_se: f64,
    pub alpha_steps: usize,
    /// Steps violating the per-step `η`/`α` bounds, and runs with
    /// `|H| > 1 + Σ η_k`.
    pub bound_violations: usize,
    pub flagged: bool,
}

enum GreenOutcome {
    Accepted {
        volume: u64,
        radius: u64,
        steps: u64,
        alpha: (i64, i64, usize),
        violations: usize,
    },
    Excluded,
    Exhausted,
}

fn sample_fields(
    cfg: &ExperimentConfig,
    g: &Graph,
    replicate: u64,
    origin: Colour,
) -> Result<(ColourField, EdgeWeights<f64>)> {
    let mut c = sample_colours(g, &cfg.params, &mut cfg.seed.rng(Stream::Colours, replicate));
    c.set(g.origin(), origin);
    let w = sample_weights(g, &cfg.dist, &mut cfg.seed.rng(Stream::Weights, replicate))?;
    Ok((c, w))
}

fn touches_boundary(g: &Graph, set: &VertexSet) -> bool {
    set.iter().any(|&v| g.on_box_boundary(v))
}

fn green_replicate(cfg: &ExperimentConfig, g: &Graph, r: u64) -> Result<GreenOutcome> {
    let (c, w) = sample_fields(cfg, g, r, Colour::Green)?;
    let x = g.origin();
    if cfg.params.p_w == 0.0 {
        let s = stopped_invasion(g, &c, &w, x)?;
        if s.exited_box {
            return Ok(GreenOutcome::Excluded);
        }
        return Ok(GreenOutcome::Accepted {
            volume: s.t1.len() as u64,
            radius: g.origin_radius(&s.t1) as u64,
            steps: s.steps() as u64,
            alpha: (0, 0, 0),
            violations: 0,
        });
    }
    let opts = AlgoOptions {
        step_budget: cfg.step_budget,
        ..AlgoOptions::default()
    };
    let run = run_algorithm(g, &c, &w, x, &opts)?;
    let Ok(res) = run.result() else {
        return Ok(GreenOutcome::Exhausted);
    };
    if touches_boundary(g, &res.h_vertices) {
        return Ok(GreenOutcome::Excluded);
    }
    let cg = res.green_cluster(g, x);
    let diag = diagnostics(&run)?;
    let alpha = diag
        .alphas()
        .fold((0, 0, 0), |(s, q, n), a| (s + a, q + a * a, n + 1));
    Ok(GreenOutcome::Accepted {
        volume: cg.len() as u64,
        radius: g.origin_radius(&cg) as u64,
        steps: diag.steps.len() as u64,
        alpha,
        violations: diag.violations.len(),
    })
}

/// Survival curves of the green cluster of an initially green origin. Uses
/// the stopped invasion when there are no white vertices and the
/// exploration algorithm otherwise; runs whose explored region reaches the
/// box boundary are excluded.
pub fn tail_of_green_cluster(cfg: &ExperimentConfig) -> Result<GreenClusterTails> {
    cfg.validate()?;
    let g = build_lattice(&cfg.lattice)?;
    let outcomes = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|r| green_replicate(cfg, &g, r))
        .collect::<Result<Vec<_>>>()?;
    let (mut volumes, mut radii, mut steps) = (Vec::new(), Vec::new(), Vec::new());
    let (mut excluded, mut exhausted, mut violations) = (0, 0, 0);
    let (mut a_sum, mut a_sq, mut a_n) = (0i64, 0i64, 0usize);
    for o in outcomes {
        match o {
            GreenOutcome::Accepted {
                volume,
                radius,
                steps: s,
                alpha,
                violations: v,
            } => {
                volumes.push(volume);
                radii.push(radius);
                steps.push(s);
                a_sum += alpha.0;
                a_sq += alpha.1;
                a_n += alpha.2;
                violations += v;
            }
            GreenOutcome::Excluded => excluded += 1,
            GreenOutcome::Exhausted => exhausted += 1,
        }
    }
    let grid = &cfg.n_grid;
    let volume = TailEstimate::from_values(grid, &volumes);
    let alpha_mean = a_sum as f64 / a_n.max(1) as f64;
    let alpha_var = if a_n > 1 {
        (a_sq as f64 - a_n as f64 * alpha_mean * alpha_mean) / (a_n as f64 - 1.0)
    } else {
        0.0
    };
    let flagged = (excluded + exhausted) as f64 > cfg.max_excluded_rate * cfg.replicates as f64;
    Ok(GreenClusterTails {
        volume_fit: fit_exponential(&volume).ok(),
        volume,
        radius: TailEstimate::from_values(grid, &radii),
        steps: (cfg.params.p_w == 0.0).then(|| TailEstimate::from_values(grid, &steps)),
        replicates: cfg.replicates,
        excluded,
        budget_exhausted: exhausted,
        alpha_mean,
        alpha_se: (alpha_var.max(0.0) / a_n.max(1) as f64).sqrt(),
        alpha_steps: a_n,
        bound_violations: violations,
        flagged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResponsibilityTails {
    /// `P(|D(O)| > n)` for an initially red origin.
    pub size: TailEstimate,
    /// `P(radius of D(O) > n)`, radius measured from `O`.
    pub radius: TailEstimate,
    pub replicates: usize,
    /// Runs where `D(O)` reached the box boundary.
    pub excluded: usize,
    /// Fraction of accepted runs with `D(O)` empty.
    pub empty_fraction: f64,
    /// Final configurations with a red cluster lacking a unique red origin.
    pub origin_violations: usize,
    pub flagged: bool,
}

/// Survival curves of the set `D(O)` of green vertices paralyzed because
/// of an initially red origin, from the exact dynamics on the box.
pub fn tail_of_responsibility(cfg: &ExperimentConfig) -> Result<ResponsibilityTails> {
    cfg.validate()?;
    let g = build_lattice(&cfg.lattice)?;
    let outcomes = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|r| -> Result<(Option<(u64, u64)>, bool)> {
            let (c, w) = sample_fields(cfg, &g, r, Colour::Red)?;
            let opts = SimOptions::default();
            let trace = simulate(&g, &c, &w, opts)?;
            let violation = trace.check_unique_red_origin(&g).is_err();
            let d = trace.responsibility_set(g.origin())?;
            if touches_boundary(&g, &d) {
                return Ok((None, violation));
            }
            Ok((Some((d.len() as u64, g.origin_radius(&d) as u64)), violation))
        })
        .collect::<Result<Vec<_>>>()?;
    let accepted: Vec<(u64, u64)> = outcomes.iter().filter_map(|o| o.0).collect();
    let excluded = outcomes.len() - accepted.len();
    let sizes: Vec<u64> = accepted.iter().map(|a| a.0).collect();
    let radii: Vec<u64> = accepted.iter().map(|a| a.1).collect();
    Ok(ResponsibilityTails {
        size: TailEstimate::from_values(&cfg.n_grid, &sizes),
        radius: TailEstimate::from_values(&cfg.n_grid, &radii),
        replicates: cfg.replicates,
        excluded,
        empty_fraction: sizes.iter().filter(|&&s| s == 0).count() as f64
            / sizes.len().max(1) as f64,
        origin_violations: outcomes.iter().filter(|o| o.1).count(),
        flagged: excluded as f64 > cfg.max_excluded_rate * cfg.replicates as f64,
    })
}
