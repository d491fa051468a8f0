//! `verify`: random small instances checked against the direct simulation.
//! Instance `i` of a suite depends only on the seed, the suite and `i`.

use anyhow::Result;
use rand::Rng;
use rayon::prelude::*;
use spatial_growth::autonomous::Fault;
use spatial_growth::graph::random_connected;
use spatial_growth::sampling::{sample_colours, sample_weights, write_snapshot, Stream};
use spatial_growth::{
    min_max_path_bound, run_algorithm, simulate, stopped_invasion, verify_autonomous, AlgoOptions, Colour,
    ColourField, EdgeWeights, Error, Graph, Params, Seed, SimOptions, Trace, WeightDistribution,
};

use crate::args::{FaultName, Suite, VerifyArgs};
use crate::output::{edge_list, OutDir};
use crate::{OK, VERIFICATION_FAILED};

const TOL: f64 = 1e-9;

struct Instance {
    g: Graph,
    colours: ColourField,
    weights: EdgeWeights<f64>,
    params: Params,
    dist: WeightDistribution,
}

enum Check {
    Pass,
    Skip,
    Fail(String),
}

fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::StoppedInvasion => "stopped-invasion",
        Suite::MinMax => "min-max",
        Suite::Algorithm => "algorithm",
        Suite::Autonomy => "autonomy",
    }
}

fn instance(suite: Suite, seed: u64, i: u64, max_vertices: usize) -> Result<Instance> {
    let mut rng = Seed(seed).rng(Stream::Graph, (suite as u64) << 40 | i);
    let n = rng.gen_range(2..=max_vertices.max(2));
    let g = random_connected(n, rng.gen_range(0..n + 10), &mut rng)?;
    let params = match suite {
        Suite::StoppedInvasion | Suite::MinMax => Params::white_red(0.0, rng.gen_range(0.05..=0.5))?,
        Suite::Algorithm | Suite::Autonomy => {
            Params::white_red(rng.gen_range(0.01..=0.15), rng.gen_range(0.05..=0.4))?
        }
    };
    let dist = if rng.gen_bool(0.5) {
        WeightDistribution::Uniform
    } else {
        WeightDistribution::Exponential
    };
    let mut colours = sample_colours(&g, &params, &mut rng);
    colours.set(0, Colour::Green);
    let weights = sample_weights(&g, &dist, &mut rng)?;
    Ok(Instance {
        g,
        colours,
        weights,
        params,
        dist,
    })
}

fn differ(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => (a - b).abs() > TOL,
        (a, b) => a.is_some() != b.is_some(),
    }
}

fn simulate_checked(inst: &Instance) -> Result<Trace<f64>, String> {
    let tr = simulate(&inst.g, &inst.colours, &inst.weights, SimOptions::default()).map_err(|e| e.to_string())?;
    tr.check_unique_red_origin(&inst.g)
        .map_err(|bad| format!("red clusters without a unique initially red vertex: {bad:?}"))?;
    Ok(tr)
}

fn algo_fault(fault: Option<FaultName>) -> Option<Fault> {
    match fault? {
        FaultName::PerturbT1 => None,
        FaultName::FlatParalysisTime => Some(Fault::FlatParalysisTime),
        FaultName::FullCredit => Some(Fault::FullCredit),
        FaultName::NoExposureCredit => Some(Fault::NoExposureCredit),
        FaultName::DropExternalEdge => Some(Fault::DropExternalEdge),
    }
}

fn check(suite: Suite, inst: &Instance, a: &VerifyArgs, i: u64) -> Check {
    let result = match suite {
        Suite::StoppedInvasion => check_stopped(inst, a.fault == Some(FaultName::PerturbT1)),
        Suite::MinMax => check_min_max(inst),
        Suite::Algorithm | Suite::Autonomy => check_algorithm(suite, inst, a, i),
    };
    match result {
        Ok(true) => Check::Pass,
        Ok(false) => Check::Skip,
        Err(msg) => Check::Fail(msg),
    }
}

/// `Ok(false)` marks an instance without a red vertex in reach.
fn check_stopped(inst: &Instance, perturb: bool) -> Result<bool, String> {
    let mut s = match stopped_invasion(&inst.g, &inst.colours, &inst.weights, 0) {
        Err(Error::NoRedReachable(_)) => return Ok(false),
        r => r.map_err(|e| e.to_string())?,
    };
    if perturb {
        let moved = *s.t2.iter().next().expect("the red side is never empty");
        s.t2.remove(&moved);
        s.t1.insert(moved);
    }
    let tr = simulate_checked(inst)?;
    let t = tr.paralysis_time(0);
    if differ(t, Some(s.tau_star)) {
        return Err(format!("t(x) = {t:?} but τ* = {}", s.tau_star));
    }
    let cluster = tr.green_cluster(&inst.g, 0);
    if cluster != s.t1 {
        return Err(format!("green cluster of x is {cluster:?} but T1* = {:?}", s.t1));
    }
    if tr.responsible(0) != Some(s.red) {
        return Err(format!("responsible vertex {:?} but invasion stopped at {}", tr.responsible(0), s.red));
    }
    Ok(true)
}

fn check_min_max(inst: &Instance) -> Result<bool, String> {
    let bound = match min_max_path_bound(&inst.g, &inst.colours, &inst.weights, 0) {
        Err(Error::NoRedReachable(_)) => return Ok(false),
        r => r.map_err(|e| e.to_string())?,
    };
    let t = simulate_checked(inst)?.paralysis_time(0);
    if differ(t, Some(bound)) {
        return Err(format!("t(x) = {t:?} but the min-max path bound is {bound}"));
    }
    Ok(true)
}

fn check_algorithm(suite: Suite, inst: &Instance, a: &VerifyArgs, i: u64) -> Result<bool, String> {
    let opts = AlgoOptions {
        fault: algo_fault(a.fault),
        ..AlgoOptions::default()
    };
    let run = match run_algorithm(&inst.g, &inst.colours, &inst.weights, 0, &opts) {
        Err(Error::NoRedReachable(_)) => return Ok(false),
        r => r.map_err(|e| e.to_string())?,
    };
    let Ok(res) = run.result() else {
        return Ok(false);
    };
    if suite == Suite::Autonomy {
        let seed = Seed(a.run.seed).rng(Stream::Extension, i).gen();
        let report = verify_autonomous(
            &inst.g,
            &inst.colours,
            &inst.weights,
            res,
            &inst.params,
            &inst.dist,
            a.extensions,
            Seed(seed),
        )
        .map_err(|e| e.to_string())?;
        return match report.first_mismatch {
            None => Ok(true),
            Some((trial, msg)) => Err(format!("extension {trial}: {msg}")),
        };
    }
    let tr = simulate_checked(inst)?;
    for &v in &res.h_vertices {
        let (tr_r, tr_g) = (tr.paralysis_time(v), tr.green_time(v));
        let (al_r, al_g) = (res.t_r.get(&v).copied(), res.t_g.get(&v).copied());
        if differ(al_r, tr_r) {
            return Err(format!("t_r({v}) = {al_r:?} but the simulation gives {tr_r:?}"));
        }
        if differ(al_g, tr_g) {
            return Err(format!("t_g({v}) = {al_g:?} but the simulation gives {tr_g:?}"));
        }
        if al_r.is_some() && res.responsible(v) != tr.responsible(v) {
            return Err(format!(
                "vertex {v} blamed on {:?} but the simulation says {:?}",
                res.responsible(v),
                tr.responsible(v)
            ));
        }
    }
    for (&e, &t) in &res.t_edge {
        if differ(Some(t), tr.opening_time(e)) {
            return Err(format!("edge {e} opens at {t} but the simulation gives {:?}", tr.opening_time(e)));
        }
    }
    Ok(true)
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<u8> {
    let suites = if a.suites.is_empty() {
        vec![Suite::StoppedInvasion, Suite::MinMax, Suite::Algorithm, Suite::Autonomy]
    } else {
        a.suites.clone()
    };
    let out = OutDir::create(&a.run.out)?;
    let mut failed = false;
    for suite in suites {
        let name = suite_name(suite);
        let checks = (0..a.cases as u64)
            .into_par_iter()
            .map(|i| Ok(check(suite, &instance(suite, a.run.seed, i, a.max_vertices)?, a, i)))
            .collect::<Result<Vec<Check>>>()?;
        let passed = checks.iter().filter(|c| matches!(c, Check::Pass)).count();
        let skipped = checks.iter().filter(|c| matches!(c, Check::Skip)).count();
        let failures: Vec<(usize, &String)> = checks
            .iter()
            .enumerate()
            .filter_map(|(i, c)| match c {
                Check::Fail(m) => Some((i, m)),
                _ => None,
            })
            .collect();
        println!(
            "{name}: {passed} of {} checked instances pass ({skipped} skipped)",
            a.cases - skipped
        );
        if let Some(&(i, msg)) = failures.first() {
            failed = true;
            let inst = instance(suite, a.run.seed, i as u64, a.max_vertices)?;
            let stem = format!("failure-{name}-{i}");
            let graph = out.write(&format!("{stem}.edges"), edge_list(&inst.g))?;
            let snap = out.write(&format!("{stem}.snapshot"), write_snapshot(&inst.colours, &inst.weights))?;
            let report = format!(
                "suite {name}, instance {i} of seed {}: {msg}\n{} of {} instances diverge\n\
                 graph: {}\ncolours and opening times: {}\n\
                 reproduce: sgrowth verify --suite {name} --seed {} --cases {}\n",
                a.run.seed,
                failures.len(),
                a.cases,
                graph.display(),
                snap.display(),
                a.run.seed,
                i + 1
            );
            out.write(&format!("{stem}.txt"), &report)?;
            print!("DIVERGENCE {report}");
        }
    }
    Ok(if failed { VERIFICATION_FAILED } else { OK })
}
