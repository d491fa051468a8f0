use super::*;
use crate::fixtures::example_1_2;
use crate::graph::random_connected;
use crate::sampling::{sample_colours, sample_weights, Params, Seed, Stream, WeightDistribution};
use crate::graph::VertexSet;
use crate::Exact;
use rand::Rng;

fn summary<T: Scalar>(trace: &Trace<T>) -> Vec<(String, f64)> {
    trace
        .events
        .iter()
        .map(|ev| {
            let tag = match ev {
                Event::EdgeOpened { edge, .. } => format!("open {edge}"),
                Event::TurnedGreen { vertex, .. } => format!("green {vertex}"),
                Event::Paralyzed {
                    vertices,
                    responsible,
                    ..
                } => format!("red {vertices:?} by {responsible}"),
            };
            (tag, ev.time().as_f64())
        })
        .collect()
}

fn s(tag: &str, t: f64) -> (String, f64) {
    (tag.to_string(), t)
}

#[test]
fn example_exposure_rule() {
    let (g, c, w) = example_1_2::<f64>();
    let tr = simulate(&g, &c, &w, SimOptions::default().checked()).unwrap();
    assert_eq!(
        summary(&tr),
        vec![
            s("open 3", 2.0),
            s("red [3] by 4", 2.0),
            s("open 1", 3.0),
            s("green 2", 3.0),
            s("open 2", 5.0),
            s("red [1, 2] by 4", 5.0),
        ]
    );
    assert_eq!(tr.opening_time(0), None);
    assert_eq!(tr.paralysis_time(1), Some(5.0));
    assert_eq!(tr.responsibility_set(4).unwrap(), VertexSet::from([1, 3]));
    assert!(tr.responsibility_set(0).unwrap().is_empty());
    assert!(tr.check_unique_red_origin(&g).is_ok());
}

#[test]
fn example_contiguous_rule() {
    let (g, c, w) = example_1_2::<f64>();
    let opts = SimOptions::with_rule(Rule::ContiguousGreen).checked();
    let tr = simulate(&g, &c, &w, opts).unwrap();
    assert_eq!(
        summary(&tr),
        vec![
            s("open 3", 2.0),
            s("red [3] by 4", 2.0),
            s("open 1", 3.0),
            s("green 2", 3.0),
            s("open 0", 6.0),
            s("red [1, 2] by 0", 6.0),
        ]
    );
    assert_eq!(tr.opening_time(2), None);
    assert_eq!(tr.responsible(2), Some(0));
}

#[test]
fn example_in_exact_and_single_precision() {
    let (g, c, w) = example_1_2::<Exact>();
    let tr = simulate(&g, &c, &w, SimOptions::default()).unwrap();
    assert_eq!(tr.paralysis_time(2), Some(Exact::from_integer(5)));
    let (g, c, w) = example_1_2::<f32>();
    let tr = simulate(&g, &c, &w, SimOptions::default()).unwrap();
    assert_eq!(tr.paralysis_time(2), Some(5.0f32));
}

#[test]
fn single_green_red_edge() {
    let g = Graph::from_edges(2, &[(0, 1)], 0).unwrap();
    let c = ColourField::from(vec![Colour::Green, Colour::Red]);
    let w = EdgeWeights::<f64>::from_f64(&[0.7]).unwrap();
    let tr = simulate(&g, &c, &w, SimOptions::default()).unwrap();
    assert_eq!(tr.paralysis_time(0), Some(0.7));
    assert_eq!(tr.responsible(0), Some(1));
}

#[test]
fn absorption_delays_clocks_only_through_colour() {
    // G - W - W with τ = 1, 2: the far white turns green at time 3
    let g = Graph::from_edges(3, &[(0, 1), (1, 2)], 0).unwrap();
    let c = ColourField::from(vec![Colour::Green, Colour::White, Colour::White]);
    let w = EdgeWeights::<f64>::from_f64(&[1.0, 2.0]).unwrap();
    let tr = simulate(&g, &c, &w, SimOptions::default()).unwrap();
    assert_eq!(tr.green_time(2), Some(3.0));
    assert_eq!(tr.final_colours(), &[Colour::Green; 3]);
}

#[test]
fn triangle_minmax_bound() {
    // x=0 green, 1 green, 2 red; direct 0-2 has τ=9, detour via 1 has max 5
    let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)], 0).unwrap();
    let c = ColourField::from(vec![Colour::Green, Colour::Green, Colour::Red]);
    let w = EdgeWeights::<f64>::from_f64(&[4.0, 5.0, 9.0]).unwrap();
    assert_eq!(min_max_path_bound(&g, &c, &w, 0).unwrap(), 5.0);
    let tr = simulate(&g, &c, &w, SimOptions::default()).unwrap();
    assert_eq!(tr.paralysis_time(0), Some(5.0));
    assert!(matches!(
        min_max_path_bound(&g, &c, &w, 2),
        Err(Error::NotGreen(2))
    ));
}

#[test]
fn minmax_rejects_white_and_missing_red() {
    let (g, c, w) = example_1_2::<f64>();
    assert!(matches!(
        min_max_path_bound(&g, &c, &w, 1),
        Err(Error::WhiteVertexPresent(2))
    ));
    let g = Graph::from_edges(2, &[(0, 1)], 0).unwrap();
    let c = ColourField::uniform(2, Colour::Green);
    let w = EdgeWeights::<f64>::from_f64(&[1.0]).unwrap();
    assert!(matches!(
        min_max_path_bound(&g, &c, &w, 0),
        Err(Error::NoRedReachable(0))
    ));
}

/// Without white vertices the paralysis time of a green vertex equals the
/// bottleneck distance to the red set.
#[test]
fn minmax_matches_simulation_without_white() {
    for rep in 0..200 {
        let mut rng = Seed(11).rng(Stream::Graph, rep);
        let g = random_connected(rng.gen_range(2..30), rng.gen_range(0..40), &mut rng).unwrap();
        let params = Params::new(0.0, 0.3, 0.7).unwrap();
        let mut c = sample_colours(&g, &params, &mut rng);
        c.set(0, Colour::Green);
        let w = sample_weights::<f64, _>(&g, &WeightDistribution::Exponential, &mut rng).unwrap();
        let tr = simulate(&g, &c, &w, SimOptions::default().checked()).unwrap();
        for x in 0..g.num_vertices() {
            if c[x] != Colour::Green {
                continue;
            }
            match min_max_path_bound(&g, &c, &w, x) {
                Ok(b) => assert_eq!(tr.paralysis_time(x), Some(b)),
                Err(Error::NoRedReachable(_)) => assert_eq!(tr.paralysis_time(x), None),
                Err(e) => panic!("{e}"),
            }
        }
    }
}

/// Without white vertices every edge with a green endpoint opens at its own
/// `τ` under either rule, so only the rank order of `τ` matters.
#[test]
fn rank_order_invariance_without_white() {
    for rep in 0..100 {
        let mut rng = Seed(5).rng(Stream::Graph, rep);
        let g = random_connected(25, 30, &mut rng).unwrap();
        let c = sample_colours(&g, &Params::new(0.0, 0.3, 0.7).unwrap(), &mut rng);
        let w = sample_weights::<f64, _>(&g, &WeightDistribution::Uniform, &mut rng).unwrap();
        let cubed = w.map(|t| t * t * t).unwrap();
        for rule in [Rule::GreenExposure, Rule::ContiguousGreen] {
            let opts = SimOptions::with_rule(rule);
            let a = simulate(&g, &c, &w, opts).unwrap();
            let b = simulate(&g, &c, &cubed, opts).unwrap();
            assert_eq!(a.opened_sequence(), b.opened_sequence());
            assert_eq!(a.final_colours(), b.final_colours());
        }
    }
}

#[test]
fn histories_are_monotone_and_admissible() {
    for rep in 0..200 {
        let mut rng = Seed(3).rng(Stream::Graph, rep);
        let g = random_connected(rng.gen_range(2..40), rng.gen_range(0..60), &mut rng).unwrap();
        let c = sample_colours(&g, &Params::new(0.4, 0.2, 0.4).unwrap(), &mut rng);
        let w = sample_weights::<f64, _>(&g, &WeightDistribution::Exponential, &mut rng).unwrap();
        for rule in [Rule::GreenExposure, Rule::ContiguousGreen] {
            let tr = simulate(&g, &c, &w, SimOptions::with_rule(rule).checked()).unwrap();
            let times: Vec<f64> = tr.events.iter().map(|e| e.time()).collect();
            assert!(times.windows(2).all(|p| p[0] <= p[1]));
            assert!(tr.final_config.is_admissible(&g));
            assert!(tr.check_unique_red_origin(&g).is_ok());
            for v in 0..g.num_vertices() {
                if let (Some(gt), Some(rt)) = (tr.green_time(v), tr.paralysis_time(v)) {
                    assert!(gt <= rt);
                }
                let stays_white = tr.final_colours()[v] == Colour::White;
                assert_eq!(stays_white, c[v] == Colour::White && tr.green_time(v).is_none());
            }
            // no closed edge is left with a green endpoint
            for e in 0..g.num_edges() {
                let (a, b) = g.endpoints(e);
                let col = tr.final_colours();
                if !tr.final_config.open[e] {
                    assert!(col[a] != Colour::Green && col[b] != Colour::Green);
                }
            }
        }
    }
}

#[test]
fn exact_and_float_agree() {
    for rep in 0..50 {
        let mut rng = Seed(21).rng(Stream::Graph, rep);
        let g = random_connected(20, 25, &mut rng).unwrap();
        let c = sample_colours(&g, &Params::new(0.3, 0.3, 0.4).unwrap(), &mut rng);
        let ints: Vec<i64> = (0..g.num_edges()).map(|_| rng.gen_range(1..1000)).collect();
        let wf = EdgeWeights::new(ints.iter().map(|&i| i as f64).collect()).unwrap();
        let we = EdgeWeights::new(ints.iter().map(|&i| Exact::from_integer(i)).collect()).unwrap();
        let a = simulate(&g, &c, &wf, SimOptions::default()).unwrap();
        let b = simulate(&g, &c, &we, SimOptions::default()).unwrap();
        assert_eq!(a.opened_sequence(), b.opened_sequence());
        for v in 0..g.num_vertices() {
            assert_eq!(a.paralysis_time(v), b.paralysis_time(v).map(|t| t.as_f64()));
        }
    }
}

#[test]
fn budget_is_enforced() {
    let (g, c, w) = example_1_2::<f64>();
    let opts = SimOptions {
        vertex_budget: 4,
        ..SimOptions::default()
    };
    assert!(matches!(
        simulate(&g, &c, &w, opts),
        Err(Error::VertexBudgetExceeded { .. })
    ));
}
