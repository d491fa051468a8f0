//! `simulate` and `autonomous`, plus dispatch and exit-code mapping.

use anyhow::{bail, ensure, Result};
use serde_json::{json, Value};
use spatial_growth::analysis::estimate_xi_on;
use spatial_growth::autonomous::{check_condition, Outcome};
use spatial_growth::fixtures::example_1_2;
use spatial_growth::sampling::{sample_colours, sample_weights, Stream};
use spatial_growth::{
    diagnostics, run_algorithm, simulate, stopped_invasion, verify_autonomous, AlgoOptions, Colour,
    ColourField, EdgeWeights, Error, Graph, Seed, SimOptions, Trace, VertexId,
};

use crate::args::{reject_example_with, AutonomousArgs, GraphArgs, ModelArgs, SimulateArgs};
use crate::output::OutDir;
use crate::{experiments, verify, Command, CONFIG_ERROR, OK, THRESHOLD, VERIFICATION_FAILED};

pub fn dispatch(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Autonomous(a) => cmd_autonomous(&a),
        Command::Verify(a) => verify::cmd_verify(&a),
        Command::Ponds(a) => experiments::cmd_ponds(&a),
        Command::Tails(a) => experiments::cmd_tails(&a),
        Command::Xi(a) => experiments::cmd_xi(&a),
    }
}

pub fn report_error(e: &anyhow::Error) -> u8 {
    eprintln!("error: {e:#}");
    match e.downcast_ref::<Error>() {
        Some(Error::BudgetExhausted(_) | Error::ThresholdExceeded { .. }) => THRESHOLD,
        _ => CONFIG_ERROR,
    }
}

type Instance = (Graph, ColourField, EdgeWeights<f64>);

/// The built-in example, or colours and opening times sampled on the
/// configured lattice from replicate 0 of the seed.
fn instance(example: bool, graph: &GraphArgs, model: &ModelArgs, seed: Seed) -> Result<(Instance, Value)> {
    reject_example_with(example, graph)?;
    if example {
        return Ok((example_1_2(), json!({ "graph": "example-1-2" })));
    }
    let g = graph.build()?;
    let params = model.params()?;
    let colours = sample_colours(&g, &params, &mut seed.rng(Stream::Colours, 0));
    let weights = sample_weights(&g, &model.dist.get(), &mut seed.rng(Stream::Weights, 0))?;
    let config = json!({
        "lattice": graph.lattice.to_string(),
        "n": graph.n,
        "periodic": graph.periodic,
        "origin": g.origin(),
        "p_w": params.p_w,
        "p_r": params.p_r,
        "distribution": model.dist.get().name(),
    });
    Ok(((g, colours, weights), config))
}

fn paralysis_line(g: &Graph, tr: &Trace<f64>, v: VertexId) -> String {
    match (tr.paralysis_time(v), tr.responsible(v)) {
        (Some(t), Some(w)) => format!("vertex {} paralyzed at t={t} by vertex {}", g.label(v), g.label(w)),
        _ if tr.initial.as_slice()[v] == Colour::Red => format!("vertex {} is initially red", g.label(v)),
        _ => format!(
            "vertex {} is never paralyzed (final colour {})",
            g.label(v),
            tr.final_colours()[v]
        ),
    }
}

fn colour_string(colours: &[Colour]) -> String {
    colours.iter().map(|c| c.code()).collect()
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<u8> {
    let ((g, colours, weights), mut config) = instance(a.example, &a.graph, &a.model, Seed(a.run.seed))?;
    config["rule"] = json!(a.rule);
    config["seed"] = json!(a.run.seed);
    let opts = SimOptions {
        rule: a.rule,
        vertex_budget: a.vertex_budget,
        ..SimOptions::default()
    };
    let tr = simulate(&g, &colours, &weights, opts)?;

    let mut paralyzed: Vec<(f64, VertexId)> = (0..g.num_vertices())
        .filter(|&v| colours.as_slice()[v] != Colour::Red)
        .filter_map(|v| tr.paralysis_time(v).map(|t| (t, v)))
        .collect();
    paralyzed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    if g.num_vertices() <= 32 {
        for &(_, v) in &paralyzed {
            println!("{}", paralysis_line(&g, &tr, v));
        }
    } else {
        println!("{}", paralysis_line(&g, &tr, g.origin()));
    }
    let origins: std::collections::BTreeSet<_> = paralyzed.iter().filter_map(|&(_, v)| tr.responsible(v)).collect();
    println!(
        "{} of {} vertices paralyzed, responsible red origins: {}; last event at t={}",
        paralyzed.len(),
        g.num_vertices(),
        origins.len(),
        tr.final_config.time
    );
    let unique = tr.check_unique_red_origin(&g);
    match &unique {
        Ok(()) => println!("every red cluster has exactly one initially red vertex"),
        Err(bad) => println!("red clusters without a unique initially red vertex: {bad:?}"),
    }

    let out = OutDir::create(&a.run.out)?;
    out.write("trace.jsonl", tr.to_jsonl(&g))?;
    let responsible: serde_json::Map<String, Value> = paralyzed
        .iter()
        .filter_map(|&(_, v)| tr.responsible(v).map(|w| (v.to_string(), json!(w))))
        .collect();
    let open: Vec<usize> = (0..g.num_edges()).filter(|&e| tr.final_config.open[e]).collect();
    out.json(
        "final.json",
        &json!({
            "time": tr.final_config.time,
            "initial": colour_string(colours.as_slice()),
            "colours": colour_string(&tr.final_config.colours),
            "open_edges": open,
            "responsible": responsible,
        }),
    )?;
    out.manifest(
        config,
        Seed(a.run.seed),
        json!({
            "vertices": g.num_vertices(),
            "edges": g.num_edges(),
            "events": tr.events.len(),
            "paralyzed": paralyzed.len(),
            "red_clusters": origins.len(),
            "unique_red_origin": unique.is_ok(),
        }),
    )?;
    Ok(if unique.is_ok() { OK } else { VERIFICATION_FAILED })
}

pub fn cmd_autonomous(a: &AutonomousArgs) -> Result<u8> {
    let seed = Seed(a.run.seed);
    let ((g, colours, weights), mut config) = instance(a.example, &a.graph, &a.model, seed)?;
    let x = a.vertex.unwrap_or(g.origin());
    ensure!(x < g.num_vertices(), "vertex {x} is out of range");
    config["vertex"] = json!(x);
    config["step_budget"] = json!(a.step_budget);
    config["seed"] = json!(a.run.seed);
    let params = a.model.params()?;
    let dist = a.model.dist.get();
    let out = OutDir::create(&a.run.out)?;
    let mut results = json!({});

    if !a.example {
        let xi = estimate_xi_on(&g, params.p_w, a.xi_replicates, seed);
        let cond = check_condition(&params, &g, &xi);
        println!(
            "condition (D-1)·ξ(p_w) < p_r: (D-1)·ξ̂({}) = {:.4} vs p_r = {}, margin {:.4} ({:.4} at the upper CI end): {}",
            params.p_w,
            cond.lhs,
            cond.p_r,
            cond.margin,
            cond.margin_upper,
            if cond.holds { "holds" } else { "fails (advisory)" }
        );
        results["condition"] = serde_json::to_value(cond)?;
        results["xi"] = serde_json::to_value(&xi)?;
    }

    let opts = AlgoOptions {
        step_budget: a.step_budget,
        ..AlgoOptions::default()
    };
    let run = run_algorithm(&g, &colours, &weights, x, &opts)?;
    out.write("steps.jsonl", run.log_jsonl())?;
    // a run that never selects a fresh vertex has no steps to analyse
    let diag = diagnostics(&run).ok();
    if let Some(d) = &diag {
        out.json("diagnostics.json", &serde_json::to_value(d)?)?;
        results["steps"] = json!(d.n);
        results["bounds_hold"] = json!(d.bounds_hold());
    }
    results["selections"] = json!(run.log.len());

    let mut code = OK;
    match &run.outcome {
        Outcome::BudgetExhausted { selections } => {
            println!("step budget exhausted after {selections} selections; the step log is in steps.jsonl");
            results["outcome"] = json!("budget_exhausted");
            code = THRESHOLD;
        }
        Outcome::Completed(res) => {
            out.json("autonomous.json", &res.to_json())?;
            results["outcome"] = json!("completed");
            results["h_vertices"] = json!(res.h_vertices.len());
            results["external_edges"] = json!(res.external.len());
            println!(
                "H has {} vertices and {} edges, {} external edges",
                res.h_vertices.len(),
                res.h_edges.len(),
                res.external.len()
            );
            if let Some(d) = &diag {
                println!(
                    "{} steps, per-step bounds {}",
                    d.n.unwrap_or(d.steps.len()),
                    if d.bounds_hold() { "hold" } else { "violated" }
                );
                if !d.bounds_hold() {
                    code = VERIFICATION_FAILED;
                }
            }
            match (res.t_r.get(&x), res.responsible(x)) {
                _ if colours.as_slice()[x] == Colour::Red => println!("vertex {} is initially red", g.label(x)),
                (Some(t), Some(w)) => {
                    println!("vertex {} paralyzed at t={t} by vertex {}", g.label(x), g.label(w))
                }
                _ => println!("vertex {} is not paralyzed", g.label(x)),
            }
            if colours.count(Colour::White) == 0 {
                let agree = compare_with_stopped_invasion(&g, &colours, &weights, x, res)?;
                results["stopped_invasion_agrees"] = json!(agree);
                if agree == Some(false) {
                    code = VERIFICATION_FAILED;
                }
            }
            if a.extensions > 0 {
                let report = verify_autonomous(&g, &colours, &weights, res, &params, &dist, a.extensions, seed)?;
                println!(
                    "autonomy: {} of {} trials agree on H{}",
                    report.trials - report.failed_trials,
                    report.trials,
                    report
                        .first_mismatch
                        .as_ref()
                        .map_or(String::new(), |(t, m)| format!("; trial {t}: {m}"))
                );
                results["autonomy"] = serde_json::to_value(&report)?;
                if !report.passed() {
                    code = VERIFICATION_FAILED;
                }
            }
        }
    }
    out.manifest(config, seed, results)?;
    Ok(code)
}

/// Without white vertices the exploration is the stopped invasion from `x`.
/// Returns whether both give the same paralysis time and red vertex, or
/// `None` when there is nothing to compare.
fn compare_with_stopped_invasion(
    g: &Graph,
    colours: &ColourField,
    weights: &EdgeWeights<f64>,
    x: VertexId,
    res: &spatial_growth::Autonomous64,
) -> Result<Option<bool>> {
    println!("no white vertices: the algorithm reduces to stopped invasion");
    if colours.as_slice()[x] != Colour::Green {
        return Ok(None);
    }
    let s = match stopped_invasion(g, colours, weights, x) {
        Ok(s) => s,
        Err(Error::NoRedReachable(_)) => {
            println!("no red vertex is reachable; stopped invasion does not stop");
            return Ok(None);
        }
        Err(e) => bail!(e),
    };
    let agree = res.t_r.get(&x).is_some_and(|&t| (t - s.tau_star).abs() <= 1e-9) && res.responsible(x) == Some(s.red);
    println!(
        "stopped invasion: τ* = {} at red vertex {}; {}",
        s.tau_star,
        g.label(s.red),
        if agree { "both paths agree" } else { "the paths DISAGREE" }
    );
    Ok(Some(agree))
}
