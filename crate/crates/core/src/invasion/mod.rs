//! Invasion percolation: ordinary trees and basins, the stopped variant
//! that solves the dynamics without white vertices, ponds, and the
//! coupling of stopped invasions over `p_r`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, VertexId, VertexSet};
use crate::sampling::{Colour, ColourField, CouplingField, EdgeWeights};
use crate::scalar::{Keyed, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopRule {
    /// Stop right after the first vertex of the box boundary is invaded.
    /// Up to that step the run coincides with the run on the full lattice.
    Boundary,
    /// Stop after this many invaded edges.
    Steps(usize),
    /// Whichever of the two comes first.
    BoundaryOrSteps(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Boundary,
    Steps,
    /// No external edge left: the component was fully invaded.
    Exhausted,
    /// An initially red vertex was invaded.
    Red,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvadedEdge<T> {
    pub edge: EdgeId,
    pub tau: T,
    /// 1-based step index.
    pub step: usize,
    /// The vertex added by this edge; `None` when it closes a cycle.
    pub added: Option<VertexId>,
}

/// Record of an invasion run: edges in invasion order and vertices in the
/// order they were reached (root first).
#[derive(Debug, Clone, PartialEq)]
pub struct InvasionTree<T> {
    pub root: VertexId,
    pub edges: Vec<InvadedEdge<T>>,
    pub vertices: Vec<VertexId>,
    pub stop: StopReason,
}

impl<T: Scalar> InvasionTree<T> {
    pub fn vertex_set(&self) -> VertexSet {
        self.vertices.iter().copied().collect()
    }

    /// `τ(n)`, the values of the invaded edges in order.
    pub fn taus(&self) -> Vec<T> {
        self.edges.iter().map(|e| e.tau).collect()
    }

    /// Position in `edges` of the maximal `(τ, edge id)`.
    pub fn argmax(&self) -> Option<usize> {
        self.edges
            .iter()
            .enumerate()
            .max_by_key(|(_, e)| Keyed::new(e.tau, e.edge))
            .map(|(i, _)| i)
    }

    /// Vertices reached before the edge at position `i` was invaded.
    pub fn vertices_before(&self, i: usize) -> &[VertexId] {
        let added = self.edges[..i].iter().filter(|e| e.added.is_some()).count();
        &self.vertices[..=added]
    }

    pub fn to_json(&self) -> Value {
        json!({
            "root": self.root,
            "stop": format!("{:?}", self.stop).to_lowercase(),
            "steps": self.edges.iter().map(|e| json!({
                "step": e.step,
                "edge": e.edge,
                "tau": e.tau.as_f64(),
                "added": e.added,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Frontier of external edges keyed by `(τ, edge id)` with lazy deletion.
struct Invader<'a, T> {
    g: &'a Graph,
    tau: &'a EdgeWeights<T>,
    inside: Vec<bool>,
    used: Vec<bool>,
    frontier: BinaryHeap<Reverse<Keyed<T>>>,
    basin: bool,
    record: InvasionTree<T>,
}

impl<'a, T: Scalar> Invader<'a, T> {
    fn new(g: &'a Graph, tau: &'a EdgeWeights<T>, root: VertexId, basin: bool) -> Self {
        let mut inv = Invader {
            g,
            tau,
            inside: vec![false; g.num_vertices()],
            used: vec![false; g.num_edges()],
            frontier: BinaryHeap::new(),
            basin,
            record: InvasionTree {
                root,
                edges: Vec::new(),
                vertices: Vec::new(),
                stop: StopReason::Exhausted,
            },
        };
        inv.enter(root);
        inv
    }

    fn enter(&mut self, v: VertexId) {
        self.inside[v] = true;
        self.record.vertices.push(v);
        for &(w, e) in self.g.neighbors(v) {
            if !self.inside[w] || (self.basin && !self.used[e]) {
                self.frontier.push(Reverse(Keyed::new(self.tau[e], e)));
            }
        }
    }

    /// Invades the next edge; returns it, or `None` if the frontier is empty.
    fn step(&mut self) -> Option<&InvadedEdge<T>> {
        while let Some(Reverse(k)) = self.frontier.pop() {
            let e = k.id;
            if self.used[e] {
                continue;
            }
            let (a, b) = self.g.endpoints(e);
            let added = match (self.inside[a], self.inside[b]) {
                (true, true) if !self.basin => continue,
                (true, true) => None,
                (true, false) => Some(b),
                (false, true) => Some(a),
                (false, false) => unreachable!("frontier edges touch the invaded set"),
            };
            self.used[e] = true;
            if let Some(v) = added {
                self.enter(v);
            }
            let step = self.record.edges.len() + 1;
            self.record.edges.push(InvadedEdge {
                edge: e,
                tau: k.value,
                step,
                added,
            });
            return self.record.edges.last();
        }
        None
    }

    /// Runs until `stop` holds. `Boundary` rules need a box graph.
    fn run_until(mut self, rule: StopRule) -> Result<InvasionTree<T>> {
        let (boundary, steps) = match rule {
            StopRule::Boundary => (true, None),
            StopRule::Steps(n) => (false, Some(n)),
            StopRule::BoundaryOrSteps(n) => (true, Some(n)),
        };
        if boundary && self.g.box_radius().is_none() {
            return Err(Error::InvalidStopRule(
                "boundary stop on a graph that is not a lattice box".into(),
            ));
        }
        if boundary && self.g.on_box_boundary(self.record.root) {
            self.record.stop = StopReason::Boundary;
            return Ok(self.record);
        }
        loop {
            if steps.is_some_and(|n| self.record.edges.len() >= n) {
                self.record.stop = StopReason::Steps;
                break;
            }
            let g = self.g;
            match self.step().map(|e| e.added) {
                None => {
                    self.record.stop = StopReason::Exhausted;
                    break;
                }
                Some(Some(v)) if boundary && g.on_box_boundary(v) => {
                    self.record.stop = StopReason::Boundary;
                    break;
                }
                Some(_) => {}
            }
        }
        Ok(self.record)
    }
}

fn check_weights<T: Scalar>(g: &Graph, weights: &EdgeWeights<T>) -> Result<()> {
    if weights.len() != g.num_edges() {
        return Err(Error::InvalidParams(format!(
            "{} opening times for {} edges",
            weights.len(),
            g.num_edges()
        )));
    }
    Ok(())
}

/// Ordinary invasion percolation from `root`: at each step the external
/// edge (one endpoint inside) with minimal `τ` is added with its outer
/// endpoint.
pub fn invasion_tree<T: Scalar>(
    g: &Graph,
    weights: &EdgeWeights<T>,
    root: VertexId,
    stop: StopRule,
) -> Result<InvasionTree<T>> {
    check_weights(g, weights)?;
    if !g.contains(root) {
        return Err(Error::UnknownVertex(root));
    }
    Invader::new(g, weights, root, false).run_until(stop)
}

/// Invasion basin from `root`: like [`invasion_tree`] but edges with both
/// endpoints inside are also candidates. Cycle-closing additions have
/// `added == None`.
pub fn invasion_basin<T: Scalar>(
    g: &Graph,
    weights: &EdgeWeights<T>,
    root: VertexId,
    stop: StopRule,
) -> Result<InvasionTree<T>> {
    check_weights(g, weights)?;
    if !g.contains(root) {
        return Err(Error::UnknownVertex(root));
    }
    Invader::new(g, weights, root, true).run_until(stop)
}

/// Outcome of the invasion from a green vertex `x` stopped at the first
/// initially red vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct StoppedInvasion<T> {
    pub tree: InvasionTree<T>,
    /// The red vertex that stopped the run; responsible for `x`.
    pub red: VertexId,
    /// Maximal tree edge `e*` and its value `τ*`, the paralysis time of `x`.
    pub e_star: EdgeId,
    pub tau_star: T,
    /// Tree part containing `x` after removing `e*`; equals `C_g(x)`.
    pub t1: VertexSet,
    pub t2: VertexSet,
    /// Edges with both endpoints in the tree.
    pub internal: Vec<EdgeId>,
    /// Edges from a tree vertex other than `red` to the outside.
    pub external: Vec<EdgeId>,
    /// A tree vertex other than `red` lies on the box boundary, so the run
    /// may differ from the one on the untruncated lattice.
    pub exited_box: bool,
}

impl<T: Scalar> StoppedInvasion<T> {
    pub fn x(&self) -> VertexId {
        self.tree.root
    }

    pub fn steps(&self) -> usize {
        self.tree.edges.len()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "x": self.x(),
            "red": self.red,
            "e_star": self.e_star,
            "tau_star": self.tau_star.as_f64(),
            "t1": self.t1,
            "t2": self.t2,
            "internal": self.internal,
            "external": self.external,
            "exited_box": self.exited_box,
            "tree": self.tree.to_json(),
        })
    }
}

/// Invasion from the green vertex `x`, stopped as soon as an initially red
/// vertex is added. Requires a colouring without white vertices.
pub fn stopped_invasion<T: Scalar>(
    g: &Graph,
    colours: &ColourField,
    weights: &EdgeWeights<T>,
    x: VertexId,
) -> Result<StoppedInvasion<T>> {
    check_weights(g, weights)?;
    if colours.len() != g.num_vertices() {
        return Err(Error::InvalidParams("colour field size mismatch".into()));
    }
    if !g.contains(x) {
        return Err(Error::UnknownVertex(x));
    }
    if let Some(w) = colours.first_white() {
        return Err(Error::WhiteVertexPresent(w));
    }
    if colours[x] != Colour::Green {
        return Err(Error::NotGreen(x));
    }
    let mut inv = Invader::new(g, weights, x, false);
    let red = loop {
        match inv.step().and_then(|e| e.added) {
            Some(v) if colours[v] == Colour::Red => break v,
            Some(_) => {}
            None => return Err(Error::NoRedReachable(x)),
        }
    };
    inv.record.stop = StopReason::Red;
    let tree = inv.record;
    let star = tree.argmax().expect("at least one step");
    let e_star = tree.edges[star].edge;
    let tau_star = tree.edges[star].tau;
    // every edge invaded after e* is smaller, and every earlier external
    // edge is larger, so the x side of e* is exactly the earlier vertices
    let t1: VertexSet = tree.vertices_before(star).iter().copied().collect();
    let all = tree.vertex_set();
    let t2 = all.difference(&t1).copied().collect();
    let mut internal = Vec::new();
    let mut external = Vec::new();
    for (e, &(a, b)) in g.edges().iter().enumerate() {
        match (all.contains(&a), all.contains(&b)) {
            (true, true) => internal.push(e),
            (true, false) if a != red => external.push(e),
            (false, true) if b != red => external.push(e),
            _ => {}
        }
    }
    let exited_box = tree.vertices.iter().any(|&v| v != red && g.on_box_boundary(v));
    Ok(StoppedInvasion {
        tree,
        red,
        e_star,
        tau_star,
        t1,
        t2,
        internal,
        external,
        exited_box,
    })
}

/// The pond of `O`: the region invaded before the outlet, the maximal edge
/// of the invasion basin.
#[derive(Debug, Clone, PartialEq)]
pub struct PondResult<T> {
    pub basin: InvasionTree<T>,
    /// Outlet `ê` and its value `τ̂`.
    pub outlet: EdgeId,
    pub tau_hat: T,
    /// Position of the outlet in `basin.edges`.
    pub outlet_index: usize,
    /// Maximal edge among tree (vertex-adding) steps. Coincides with
    /// `outlet` whenever the run ends on a vertex addition.
    pub tree_outlet: EdgeId,
    /// `R̂`: radius from `O` of the region invaded before the outlet.
    pub radius: u32,
    pub box_radius: u32,
    pub censored: bool,
}

impl<T: Scalar> PondResult<T> {
    pub fn region(&self) -> VertexSet {
        self.basin
            .vertices_before(self.outlet_index)
            .iter()
            .copied()
            .collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "origin": self.basin.root,
            "outlet": self.outlet,
            "tau_hat": self.tau_hat.as_f64(),
            "outlet_step": self.outlet_index + 1,
            "tree_outlet": self.tree_outlet,
            "radius": self.radius,
            "box_radius": self.box_radius,
            "censored": self.censored,
            "steps": self.basin.edges.len(),
        })
    }
}

/// Runs the invasion basin from `origin` until it reaches the box boundary
/// and locates the pond. The result is censored when the outlet lies
/// beyond `margin · n` or `τ̂ ≤ p_c`, the two signs that the true outlet on
/// the infinite lattice may lie outside the box.
pub fn pond<T: Scalar>(
    g: &Graph,
    weights: &EdgeWeights<T>,
    origin: VertexId,
    p_c: f64,
    margin: f64,
) -> Result<PondResult<T>> {
    let n = g
        .box_radius()
        .ok_or_else(|| Error::InvalidGraph("ponds need a lattice box".into()))?;
    if !(margin > 0.0 && margin < 1.0) {
        return Err(Error::InvalidParams(format!("margin {margin} not in (0,1)")));
    }
    let basin = invasion_basin(g, weights, origin, StopRule::Boundary)?;
    if basin.stop != StopReason::Boundary {
        return Err(Error::BoundaryNotReached(basin.edges.len()));
    }
    let outlet_index = basin.argmax().ok_or(Error::BoundaryNotReached(0))?;
    let outlet = basin.edges[outlet_index].edge;
    let tau_hat = basin.edges[outlet_index].tau;
    let tree_outlet = basin
        .edges
        .iter()
        .filter(|e| e.added.is_some())
        .max_by_key(|e| Keyed::new(e.tau, e.edge))
        .map(|e| e.edge)
        .unwrap_or(outlet);
    let before = basin.vertices_before(outlet_index);
    let radius = if origin == g.origin() {
        g.origin_radius(before)
    } else {
        let d = g.bfs_from(origin);
        before.iter().filter_map(|&v| d[v]).max().unwrap_or(0)
    };
    let censored = radius as f64 > margin * n as f64 || tau_hat.as_f64() <= p_c;
    Ok(PondResult {
        basin,
        outlet,
        tau_hat,
        outlet_index,
        tree_outlet,
        radius,
        box_radius: n,
        censored,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoupledStatus {
    Stopped,
    /// `ρ(O) < p_r`: the origin itself is red.
    OriginRed,
    /// The invasion left the box (or the graph) before meeting a red vertex.
    NotStopped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledStop {
    pub p_r: f64,
    pub status: CoupledStatus,
    pub steps: usize,
    /// `C_g(O)` of the stopped invasion and its radius from `O`.
    pub region: VertexSet,
    pub radius: u32,
}

/// Stopped invasions from `origin` for every `p_r` in the grid, all read
/// off one ordinary invasion: the run for `p_r` stops at the first invaded
/// vertex with `ρ < p_r`.
pub fn coupled_stopped_radius<T: Scalar>(
    g: &Graph,
    weights: &EdgeWeights<T>,
    coupling: &CouplingField,
    p_r_grid: &[f64],
    origin: VertexId,
) -> Result<Vec<CoupledStop>> {
    check_weights(g, weights)?;
    if coupling.as_slice().len() != g.num_vertices() {
        return Err(Error::InvalidParams("coupling field size mismatch".into()));
    }
    if !g.contains(origin) {
        return Err(Error::UnknownVertex(origin));
    }
    let rho = coupling.as_slice();
    let lowest = p_r_grid
        .iter()
        .copied()
        .filter(|&p| rho[origin] >= p)
        .fold(f64::INFINITY, f64::min);
    // run until a vertex red for the smallest relevant p_r is reached
    let mut inv = Invader::new(g, weights, origin, false);
    if !g.on_box_boundary(origin) && lowest.is_finite() {
        while let Some(added) = inv.step().and_then(|e| e.added) {
            if rho[added] < lowest || g.on_box_boundary(added) {
                break;
            }
        }
    }
    let tree = inv.record;
    let dist = (origin != g.origin()).then(|| g.bfs_from(origin));
    let radius = |set: &VertexSet| match &dist {
        None => g.origin_radius(set),
        Some(d) => set.iter().filter_map(|&v| d[v]).max().unwrap_or(0),
    };
    Ok(p_r_grid
        .iter()
        .map(|&p_r| {
            if rho[origin] < p_r {
                return CoupledStop {
                    p_r,
                    status: CoupledStatus::OriginRed,
                    steps: 0,
                    region: VertexSet::new(),
                    radius: 0,
                };
            }
            let stop = tree
                .edges
                .iter()
                .position(|e| e.added.is_some_and(|v| rho[v] < p_r));
            match stop {
                Some(i) => {
                    let prefix = InvasionTree {
                        root: origin,
                        edges: tree.edges[..=i].to_vec(),
                        vertices: tree.vertices[..=i + 1].to_vec(),
                        stop: StopReason::Red,
                    };
                    let star = prefix.argmax().expect("non-empty prefix");
                    let region: VertexSet = prefix.vertices_before(star).iter().copied().collect();
                    CoupledStop {
                        p_r,
                        status: CoupledStatus::Stopped,
                        steps: i + 1,
                        radius: radius(&region),
                        region,
                    }
                }
                None => CoupledStop {
                    p_r,
                    status: CoupledStatus::NotStopped,
                    steps: tree.edges.len(),
                    region: VertexSet::new(),
                    radius: 0,
                },
            }
        })
        .collect())
}

#[cfg(test)]
mod tests;
