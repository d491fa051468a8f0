use super::*;
use crate::direct_sim::{simulate, SimOptions};
use crate::graph::{build_lattice, random_connected, LatticeSpec};
use crate::sampling::{
    sample_colours, sample_coupling, sample_weights, Params, Seed, Stream, WeightDistribution,
};
use rand::Rng;

fn weights(values: &[f64]) -> EdgeWeights<f64> {
    EdgeWeights::new(values.to_vec()).unwrap()
}

#[test]
fn star_stops_after_one_step() {
    // x = 0 with neighbours 1, 2, 3; the cheapest edge leads to red 1
    let g = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)], 0).unwrap();
    use Colour::*;
    let c = ColourField::from(vec![Green, Red, Green, Green]);
    let s = stopped_invasion(&g, &c, &weights(&[0.2, 0.5, 0.9]), 0).unwrap();
    assert_eq!(s.steps(), 1);
    assert_eq!(s.tau_star, 0.2);
    assert_eq!(s.red, 1);
    assert_eq!(s.t1, VertexSet::from([0]));
    // Ē: edges from x to outside, not from R
    assert_eq!(s.external, vec![1, 2]);
}

#[test]
fn path_split_at_maximal_edge() {
    use Colour::*;
    let g = Graph::from_edges(3, &[(0, 1), (1, 2)], 0).unwrap();
    let c = ColourField::from(vec![Green, Green, Red]);
    let w = weights(&[0.7, 0.3]);
    let s = stopped_invasion(&g, &c, &w, 0).unwrap();
    assert_eq!(s.tree.edges.iter().map(|e| e.edge).collect::<Vec<_>>(), vec![0, 1]);
    assert_eq!((s.e_star, s.tau_star), (0, 0.7));
    assert_eq!(s.t1, VertexSet::from([0]));
    assert_eq!(s.t2, VertexSet::from([1, 2]));
    let tr = simulate(&g, &c, &w, SimOptions::default()).unwrap();
    assert_eq!(tr.paralysis_time(0), Some(0.7));
}

#[test]
fn all_red_neighbours_give_min_incident_edge() {
    let g = build_lattice(&LatticeSpec::square(1)).unwrap();
    let mut c = ColourField::uniform(g.num_vertices(), Colour::Red);
    c.set(0, Colour::Green);
    let mut rng = Seed(1).rng(Stream::Weights, 0);
    let w = sample_weights::<f64, _>(&g, &WeightDistribution::Uniform, &mut rng).unwrap();
    let s = stopped_invasion(&g, &c, &w, 0).unwrap();
    let min = g.neighbors(0).iter().map(|&(_, e)| w[e]).fold(f64::INFINITY, f64::min);
    assert_eq!(s.steps(), 1);
    assert_eq!(s.tau_star, min);
}

#[test]
fn stopped_invasion_rejects_bad_inputs() {
    use Colour::*;
    let g = Graph::from_edges(3, &[(0, 1), (1, 2)], 0).unwrap();
    let w = weights(&[1.0, 2.0]);
    let white = ColourField::from(vec![Green, White, Red]);
    assert!(matches!(
        stopped_invasion(&g, &white, &w, 0),
        Err(Error::WhiteVertexPresent(1))
    ));
    let no_red = ColourField::uniform(3, Green);
    assert!(matches!(
        stopped_invasion(&g, &no_red, &w, 0),
        Err(Error::NoRedReachable(0))
    ));
    let red_x = ColourField::from(vec![Red, Green, Green]);
    assert!(matches!(stopped_invasion(&g, &red_x, &w, 0), Err(Error::NotGreen(0))));
}

#[test]
fn triangle_invasion_order() {
    // O = 0, a = 1, b = 2
    let g = Graph::from_edges(3, &[(0, 1), (0, 2), (1, 2)], 0).unwrap();
    let w = weights(&[0.1, 0.6, 0.3]);
    let t = invasion_tree(&g, &w, 0, StopRule::Steps(2)).unwrap();
    assert_eq!(t.edges.iter().map(|e| e.edge).collect::<Vec<_>>(), vec![0, 2]);
    assert_eq!(t.vertices, vec![0, 1, 2]);
    let t = invasion_tree(&g, &w, 0, StopRule::Steps(1)).unwrap();
    assert_eq!(t.edges.len(), 1);
    assert_eq!(t.edges[0].edge, 0);
    assert_eq!(t.stop, StopReason::Steps);
}

#[test]
fn square_cycle_basin_takes_the_heavy_edge_last() {
    let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)], 0).unwrap();
    let w = weights(&[0.1, 0.2, 0.9, 0.3]);
    let tree = invasion_tree(&g, &w, 0, StopRule::Steps(10)).unwrap();
    assert_eq!(tree.taus(), vec![0.1, 0.2, 0.3]);
    assert_eq!(tree.stop, StopReason::Exhausted);
    let basin = invasion_basin(&g, &w, 0, StopRule::Steps(10)).unwrap();
    assert_eq!(basin.taus(), vec![0.1, 0.2, 0.3, 0.9]);
    assert_eq!(basin.edges[3].added, None);
}

#[test]
fn boundary_rule_needs_a_box() {
    let g = Graph::from_edges(2, &[(0, 1)], 0).unwrap();
    assert!(matches!(
        invasion_tree(&g, &weights(&[1.0]), 0, StopRule::Boundary),
        Err(Error::InvalidStopRule(_))
    ));
}

#[test]
fn basin_and_tree_agree_on_trees_and_at_tree_steps() {
    for rep in 0..200 {
        let mut rng = Seed(8).rng(Stream::Graph, rep);
        let n = rng.gen_range(2..40);
        let extra = if rep % 4 == 0 { 0 } else { rng.gen_range(0..50) };
        let g = random_connected(n, extra, &mut rng).unwrap();
        let w = sample_weights::<f64, _>(&g, &WeightDistribution::Uniform, &mut rng).unwrap();
        let tree = invasion_tree(&g, &w, 0, StopRule::Steps(usize::MAX)).unwrap();
        let basin = invasion_basin(&g, &w, 0, StopRule::Steps(usize::MAX)).unwrap();
        assert_eq!(tree.vertices, basin.vertices);
        let tree_steps: Vec<_> = basin.edges.iter().filter(|e| e.added.is_some()).collect();
        assert_eq!(tree_steps.len(), tree.edges.len());
        for (a, b) in tree_steps.iter().zip(&tree.edges) {
            assert_eq!(a.edge, b.edge);
        }
        if extra == 0 {
            assert_eq!(basin.edges.len(), tree.edges.len());
        }
    }
}

#[test]
fn each_invaded_edge_is_the_minimal_external_edge() {
    let mut rng = Seed(2).rng(Stream::Graph, 0);
    let g = random_connected(60, 90, &mut rng).unwrap();
    let w = sample_weights::<f64, _>(&g, &WeightDistribution::Exponential, &mut rng).unwrap();
    let tree = invasion_tree(&g, &w, 5, StopRule::Steps(40)).unwrap();
    let mut inside = VertexSet::from([5]);
    for step in &tree.edges {
        let min = (0..g.num_edges())
            .filter(|&e| {
                let (a, b) = g.endpoints(e);
                inside.contains(&a) != inside.contains(&b)
            })
            .min_by_key(|&e| Keyed::new(w[e], e))
            .unwrap();
        assert_eq!(step.edge, min);
        inside.insert(step.added.unwrap());
    }
}

/// Stopped invasion and direct simulation agree on the paralysis time, the
/// green cluster and the responsible red vertex.
#[test]
fn stopped_invasion_matches_direct_simulation() {
    let mut checked = 0;
    for rep in 0..1500 {
        let mut rng = Seed(13).rng(Stream::Graph, rep);
        let g = random_connected(rng.gen_range(2..35), rng.gen_range(0..50), &mut rng).unwrap();
        let p_r = rng.gen_range(0.05..0.6);
        let mut c = sample_colours(&g, &Params::new(0.0, p_r, 1.0 - p_r).unwrap(), &mut rng);
        c.set(0, Colour::Green);
        let w = sample_weights::<f64, _>(&g, &WeightDistribution::Exponential, &mut rng).unwrap();
        let tr = simulate(&g, &c, &w, SimOptions::default()).unwrap();
        let s = match stopped_invasion(&g, &c, &w, 0) {
            Ok(s) => s,
            Err(Error::NoRedReachable(_)) => {
                assert_eq!(tr.paralysis_time(0), None);
                continue;
            }
            Err(e) => panic!("{e}"),
        };
        assert!((tr.paralysis_time(0).unwrap() - s.tau_star).abs() <= 1e-9);
        assert_eq!(tr.green_cluster(&g, 0), s.t1);
        assert_eq!(tr.responsible(0), Some(s.red));
        // T1* is the x side of e*
        let (a, b) = g.endpoints(s.e_star);
        assert!(s.t1.contains(&a) != s.t1.contains(&b));
        assert!(s.t2.contains(&s.red));
        // edges leaving T1* other than e* are heavier than τ*
        for e in 0..g.num_edges() {
            let (a, b) = g.endpoints(e);
            if e != s.e_star && s.t1.contains(&a) != s.t1.contains(&b) {
                assert!(w[e] > s.tau_star);
            }
        }
        checked += 1;
    }
    assert!(checked >= 1000, "only {checked} instances had a red vertex");
}

#[test]
fn stopped_invasion_in_exact_arithmetic() {
    use crate::Exact;
    let mut rng = Seed(4).rng(Stream::Graph, 0);
    for _ in 0..50 {
        let g = random_connected(20, 20, &mut rng).unwrap();
        let mut c = sample_colours(&g, &Params::new(0.0, 0.2, 0.8).unwrap(), &mut rng);
        c.set(0, Colour::Green);
        let ints: Vec<i64> = (0..g.num_edges()).map(|_| rng.gen_range(1..10_000)).collect();
        let we = EdgeWeights::new(ints.iter().map(|&i| Exact::new(i, 7)).collect()).unwrap();
        let wf = we.map(|t| t.as_f64()).unwrap();
        match (stopped_invasion(&g, &c, &we, 0), stopped_invasion(&g, &c, &wf, 0)) {
            (Ok(a), Ok(b)) => {
                assert_eq!(a.t1, b.t1);
                assert_eq!(a.tau_star.as_f64(), b.tau_star);
            }
            (Err(_), Err(_)) => {}
            _ => panic!("exact and float runs disagree"),
        }
    }
}

fn uniform_box(n: u32, seed: u64, rep: u64) -> (Graph, EdgeWeights<f64>) {
    let g = build_lattice(&LatticeSpec::square(n)).unwrap();
    let mut rng = Seed(seed).rng(Stream::Weights, rep);
    let w = sample_weights(&g, &WeightDistribution::Uniform, &mut rng).unwrap();
    (g, w)
}

#[test]
fn pond_contains_critical_cluster() {
    for rep in 0..100 {
        let (g, w) = uniform_box(12, 31, rep);
        let p = pond(&g, &w, g.origin(), 0.5, 0.5).unwrap();
        assert_eq!(p.basin.stop, StopReason::Boundary);
        assert!(p.radius <= 12);
        if p.tau_hat <= 0.5 {
            assert!(p.censored);
            continue;
        }
        // p_c-open cluster of O by flood fill
        let mut cluster = VertexSet::from([g.origin()]);
        let mut stack = vec![g.origin()];
        while let Some(u) = stack.pop() {
            for &(v, e) in g.neighbors(u) {
                if w[e] < 0.5 && cluster.insert(v) {
                    stack.push(v);
                }
            }
        }
        let region = p.region();
        assert!(cluster.is_subset(&region), "rep {rep}");
        if p.basin.edges.last().unwrap().added.is_some() {
            assert_eq!(p.outlet, p.tree_outlet);
        }
    }
}

#[test]
fn pond_with_early_outlet_has_radius_zero() {
    let g = build_lattice(&LatticeSpec::square(3)).unwrap();
    let mut vals = vec![0.1; g.num_edges()];
    let first = g.neighbors(0)[0].1;
    for &(_, e) in g.neighbors(0) {
        vals[e] = 0.95;
    }
    vals[first] = 0.9;
    // the cheapest edge out of O is the maximum of the whole run
    for &(_, e) in g.neighbors(0) {
        if e != first {
            vals[e] = 0.99;
        }
    }
    let p = pond(&g, &weights(&vals), 0, 0.5, 0.5).unwrap();
    assert_eq!(p.outlet, first);
    assert_eq!(p.outlet_index, 0);
    assert_eq!(p.radius, 0);
    assert!(!p.censored);
}

#[test]
fn pond_requires_a_box_and_a_margin() {
    let g = Graph::from_edges(2, &[(0, 1)], 0).unwrap();
    assert!(pond(&g, &weights(&[0.5]), 0, 0.5, 0.5).is_err());
    let (g, w) = uniform_box(3, 1, 0);
    assert!(matches!(
        pond(&g, &w, 0, 0.5, 1.5),
        Err(Error::InvalidParams(_))
    ));
}

#[test]
fn coupled_regions_are_nested_and_match_stopped_invasion() {
    let grid = [0.9, 0.5, 0.3, 0.1, 0.05, 0.01];
    for rep in 0..200 {
        let (g, w) = uniform_box(10, 7, rep);
        let mut rng = Seed(7).rng(Stream::Coupling, rep);
        let mut rho = sample_coupling(&g, &mut rng).as_slice().to_vec();
        rho[0] = 0.999;
        let coupling = CouplingField::new(rho).unwrap();
        let out = coupled_stopped_radius(&g, &w, &coupling, &grid, 0).unwrap();
        for pair in out.windows(2) {
            if pair[1].status == CoupledStatus::Stopped {
                assert!(pair[0].region.is_subset(&pair[1].region));
            }
        }
        for stop in &out {
            if stop.status != CoupledStatus::Stopped {
                continue;
            }
            let c = coupling.colouring(stop.p_r);
            let s = stopped_invasion(&g, &c, &w, 0).unwrap();
            assert_eq!(s.t1, stop.region);
            assert_eq!(s.steps(), stop.steps);
            assert_eq!(g.origin_radius(&s.t1), stop.radius);
        }
    }
}

#[test]
fn coupled_all_red_but_origin_stops_at_first_vertex() {
    let (g, w) = uniform_box(4, 2, 0);
    let mut rho = vec![0.5; g.num_vertices()];
    // ρ lies in (0,1), so p_r = 1 would make O red as well; p_r = ρ(O)
    // makes every other vertex red
    rho[0] = 0.99;
    let coupling = CouplingField::new(rho).unwrap();
    let out = coupled_stopped_radius(&g, &w, &coupling, &[0.99], 0).unwrap();
    assert_eq!(out[0].status, CoupledStatus::Stopped);
    assert_eq!(out[0].steps, 1);
    assert_eq!(out[0].region, VertexSet::from([0]));
    let red = CouplingField::new(vec![0.1; g.num_vertices()]).unwrap();
    let out = coupled_stopped_radius(&g, &w, &red, &[0.5], 0).unwrap();
    assert_eq!(out[0].status, CoupledStatus::OriginRed);
}

/// As `p_r -> 0` the stopped regions grow to the pond.
#[test]
fn union_of_coupled_regions_is_the_pond() {
    let mut compared = 0;
    for rep in 0..200 {
        let (g, w) = uniform_box(16, 17, rep);
        let p = pond(&g, &w, 0, 0.5, 0.5).unwrap();
        // colour red only the vertex added by the outlet edge and later ones
        let outlet_vertex = match p.basin.edges[p.outlet_index].added {
            Some(v) => v,
            None => continue,
        };
        let order = &p.basin.vertices;
        let pos = order.iter().position(|&v| v == outlet_vertex).unwrap();
        let mut rho = vec![0.9; g.num_vertices()];
        for &v in &order[pos..] {
            rho[v] = 0.001;
        }
        let coupling = CouplingField::new(rho).unwrap();
        let out = coupled_stopped_radius(&g, &w, &coupling, &[0.5, 0.01], 0).unwrap();
        let union: VertexSet = out.iter().flat_map(|s| s.region.iter().copied()).collect();
        assert_eq!(union, p.region());
        compared += 1;
    }
    assert!(compared > 150);
}
