//! `ponds`, `tails` and `xi`.

use anyhow::Result;
use serde_json::json;
use spatial_growth::analysis::TailEstimate;
use spatial_growth::{compare_ponds, estimate_xi, tail_of_green_cluster, tail_of_responsibility, Seed};

use crate::args::{PondsArgs, TailsArgs, XiArgs};
use crate::output::{csv, OutDir};
use crate::{OK, THRESHOLD, VERIFICATION_FAILED};

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn cmd_ponds(a: &PondsArgs) -> Result<u8> {
    let spec = a.graph.spec();
    let seed = Seed(a.run.seed);
    let cmp = compare_ponds(&spec, &a.grid.0, a.samples, a.conn_samples, seed, a.margin, a.max_censored)?;
    for r in &cmp.rows {
        println!(
            "n = {:>3}: P(R > n) = {:.4} ± {:.4}, P_cr(O <-> ∂B(n)) = {:.4} ± {:.4}  {}",
            r.n,
            r.pond,
            r.pond_se,
            r.critical,
            r.critical_se,
            verdict(r.passes)
        );
    }
    let censored_rate = cmp.censored as f64 / cmp.pond_samples.max(1) as f64;
    println!("censored samples: {} of {} ({:.1}%)", cmp.censored, cmp.pond_samples, 100.0 * censored_rate);
    println!(
        "containment of the critical cluster: {} of {} checked samples",
        cmp.containment_checked - cmp.containment_failures,
        cmp.containment_checked
    );
    if let Some(ratio) = cmp.slope_ratio() {
        println!("log-log slope ratio pond/critical: {ratio:.3} (informational)");
    }

    let out = OutDir::create(&a.run.out)?;
    out.write(
        "ponds.csv",
        csv(
            &["n", "pond", "pond_se", "critical", "critical_se", "passes"],
            cmp.rows.iter().map(|r| {
                vec![
                    r.n.to_string(),
                    r.pond.to_string(),
                    r.pond_se.to_string(),
                    r.critical.to_string(),
                    r.critical_se.to_string(),
                    r.passes.to_string(),
                ]
            }),
        ),
    )?;
    let config = json!({
        "lattice": spec.kind.to_string(),
        "n": spec.n,
        "samples": a.samples,
        "conn_samples": a.conn_samples,
        "grid": a.grid.0,
        "margin": a.margin,
        "max_censored": a.max_censored,
    });
    out.manifest(config, seed, serde_json::to_value(&cmp)?)?;
    Ok(if !cmp.all_pass() || cmp.containment_failures > 0 {
        VERIFICATION_FAILED
    } else if cmp.flagged {
        println!("warning: censoring rate above {}", a.max_censored);
        THRESHOLD
    } else {
        OK
    })
}

/// Largest `|P̂(X > n) - q^n|` in units of the binomial standard error under
/// `q^n`, over the grid.
fn geometric_deviation(tail: &TailEstimate, q: f64) -> f64 {
    tail.grid
        .iter()
        .zip(&tail.survival)
        .map(|(&n, &p)| {
            let exact = q.powi(n as i32);
            let se = (exact * (1.0 - exact) / tail.replicates.max(1) as f64).sqrt();
            if se > 0.0 {
                (p - exact).abs() / se
            } else if p == exact {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

pub fn cmd_tails(a: &TailsArgs) -> Result<u8> {
    let cfg = a.experiment()?;
    let t = tail_of_green_cluster(&cfg)?;
    let out = OutDir::create(&a.run.out)?;
    out.write("volume.csv", tail_csv(&t.volume)?)?;
    out.write("radius.csv", tail_csv(&t.radius)?)?;
    let mut code = OK;
    let mut results = json!({ "green_cluster": serde_json::to_value(&t)? });
    let accepted = t.replicates - t.excluded - t.budget_exhausted;
    println!(
        "{} replicates: {} accepted, {} left the box, {} exhausted the step budget",
        t.replicates, accepted, t.excluded, t.budget_exhausted
    );
    if let Some(steps) = &t.steps {
        out.write("steps.csv", tail_csv(steps)?)?;
        let q = 1.0 - cfg.params.p_r;
        let z = geometric_deviation(steps, q);
        let pass = z <= 4.0;
        println!(
            "geometric law P(steps > n) = {q}^n on n in {:?}..{:?}: largest deviation {z:.2} SE  {}",
            steps.grid.first().unwrap_or(&0),
            steps.grid.last().unwrap_or(&0),
            verdict(pass)
        );
        results["geometric_max_z"] = json!(z);
        if !pass {
            code = VERIFICATION_FAILED;
        }
    }
    match &t.volume_fit {
        Some(f) => println!(
            "log P(|C_g| > n) slope {:.4}, 95% CI [{:.4}, {:.4}] over {} points",
            f.slope, f.ci.0, f.ci.1, f.points
        ),
        None => println!("too few positive tail points for an exponential fit"),
    }
    if t.alpha_steps > 0 {
        println!(
            "drift: mean α = {:.4} ± {:.4} over {} steps; per-step bound violations {}",
            t.alpha_mean, t.alpha_se, t.alpha_steps, t.bound_violations
        );
    }
    if t.bound_violations > 0 {
        code = VERIFICATION_FAILED;
    }
    let mut flagged = t.flagged;
    if a.responsibility {
        let r = tail_of_responsibility(&cfg)?;
        out.write("responsibility_size.csv", tail_csv(&r.size)?)?;
        out.write("responsibility_radius.csv", tail_csv(&r.radius)?)?;
        println!(
            "responsibility sets: {:.1}% empty, {} excluded, {} red clusters without a unique red origin",
            100.0 * r.empty_fraction,
            r.excluded,
            r.origin_violations
        );
        if r.origin_violations > 0 {
            code = VERIFICATION_FAILED;
        }
        flagged |= r.flagged;
        results["responsibility"] = serde_json::to_value(&r)?;
    }
    out.manifest(cfg.to_json(), cfg.seed, results)?;
    if code == OK && flagged {
        println!("warning: excluded or exhausted fraction above {}", cfg.max_excluded_rate);
        code = THRESHOLD;
    }
    Ok(code)
}

fn tail_csv(t: &TailEstimate) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    t.write_csv(&mut buf)?;
    Ok(buf)
}

pub fn cmd_xi(a: &XiArgs) -> Result<u8> {
    let spec = a.graph.spec();
    let seed = Seed(a.run.seed);
    let est = estimate_xi(&spec, a.p, a.replicates, seed, a.max_truncation)?;
    println!(
        "ξ̂({}) = {:.6} ± {:.6}, 95% CI [{:.6}, {:.6}] from {} clusters in B({}), {} truncated",
        est.p, est.mean, est.se, est.ci.0, est.ci.1, est.replicates, est.box_radius, est.truncated
    );
    let out = OutDir::create(&a.run.out)?;
    let config = json!({
        "lattice": spec.kind.to_string(),
        "n": spec.n,
        "p": a.p,
        "replicates": a.replicates,
        "max_truncation": a.max_truncation,
    });
    out.manifest(config, seed, serde_json::to_value(&est)?)?;
    Ok(OK)
}
