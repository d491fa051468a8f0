//! Per-step bookkeeping of a run: registered counts, active-tree drift and
//! the per-step bounds in terms of the white cluster met.

use serde::Serialize;

use super::{AutonomousRun, Branch};
use crate::error::{Error, Result};
use crate::sampling::Colour;
use crate::scalar::Scalar;

/// Statistics of step `k`: everything between the `k`th and `(k+1)`th
/// selection of a fresh vertex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepStats {
    pub k: usize,
    /// The fresh vertex `y_k` and its initial colour.
    pub y: usize,
    pub colour: Colour,
    /// `|C_w(y_k)|`.
    pub white_cluster: usize,
    /// `ν_k`: registered vertices at the start of the step.
    pub nu: usize,
    pub eta: usize,
    pub alpha: i64,
    pub eta_bound: usize,
    pub alpha_bound: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepDiagnostics {
    pub steps: Vec<StepStats>,
    /// Active trees when the first step starts (1 for a green start).
    pub initial_active: usize,
    /// First `n` with `initial_active + α_1 + … + α_n = 0`, taking
    /// `α_k = -1` for every `k` past termination.
    pub n: Option<usize>,
    pub final_registered: usize,
    pub terminated: bool,
    pub violations: Vec<String>,
}

impl StepDiagnostics {
    /// `1 + η_1 + … + η_N`, an upper bound for `|H|`.
    pub fn volume_bound(&self) -> Option<usize> {
        let n = self.n?;
        let first = self.steps.first().map_or(1, |s| s.nu);
        Some(first + self.steps.iter().take(n).map(|s| s.eta).sum::<usize>())
    }

    pub fn bounds_hold(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn alphas(&self) -> impl Iterator<Item = i64> + '_ {
        self.steps.iter().map(|s| s.alpha)
    }
}

/// Derives step statistics from a run's log and checks
/// `η_k ≤ D|C_w(y_k)| + 1{y_k not white}` and
/// `α_k ≤ (D-1)|C_w(y_k)| - 1{y_k red}`.
pub fn diagnostics<T: Scalar>(run: &AutonomousRun<T>) -> Result<StepDiagnostics> {
    let fresh: Vec<_> = run.log.iter().filter(|r| r.branch.is_fresh()).collect();
    if fresh.is_empty() {
        return Err(Error::InvalidParams(
            "run has no fresh-vertex steps to analyse".into(),
        ));
    }
    let terminated = run.is_complete();
    let d = run.max_degree;
    let mut steps = Vec::with_capacity(fresh.len());
    for (i, r) in fresh.iter().enumerate() {
        let (nu_next, active_next) = match fresh.get(i + 1) {
            Some(next) => (next.registered_before, next.active_before as i64),
            None => (run.final_registered, run.final_active as i64),
        };
        let last = i + 1 == fresh.len();
        let alpha = if last && terminated {
            -1
        } else {
            active_next - r.active_before as i64
        };
        let colour = match r.branch {
            Branch::FreshRed => Colour::Red,
            Branch::FreshGreen => Colour::Green,
            _ => Colour::White,
        };
        let c = r.white_cluster;
        steps.push(StepStats {
            k: i + 1,
            y: r.y,
            colour,
            white_cluster: c,
            nu: r.registered_before,
            eta: nu_next - r.registered_before,
            alpha,
            eta_bound: d * c + usize::from(colour != Colour::White),
            alpha_bound: (d as i64 - 1) * c as i64 - i64::from(colour == Colour::Red),
        });
    }
    let mut violations = Vec::new();
    for s in &steps {
        if s.eta > s.eta_bound {
            violations.push(format!("step {}: eta {} > {}", s.k, s.eta, s.eta_bound));
        }
        if s.alpha > s.alpha_bound {
            violations.push(format!("step {}: alpha {} > {}", s.k, s.alpha, s.alpha_bound));
        }
    }
    let initial_active = fresh[0].active_before;
    let mut level = initial_active as i64;
    let mut n = None;
    for s in &steps {
        level += s.alpha;
        if level == 0 {
            n = Some(s.k);
            break;
        }
    }
    if n.is_none() && terminated {
        // α_k = -1 beyond the last step
        n = Some(steps.len() + level.max(0) as usize);
    }
    let out = StepDiagnostics {
        steps,
        initial_active,
        n,
        final_registered: run.final_registered,
        terminated,
        violations,
    };
    if let (Some(bound), Ok(res)) = (out.volume_bound(), run.result()) {
        if res.h_vertices.len() > bound {
            let mut out = out;
            out.violations
                .push(format!("|H| = {} > {}", res.h_vertices.len(), bound));
            return Ok(out);
        }
    }
    Ok(out)
}
