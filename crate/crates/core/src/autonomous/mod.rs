//! Local exploration that certifies the fate of one vertex.
//!
//! Starting from `x`, the algorithm grows *active* trees by always taking
//! the external edge with the smallest tentative opening time `t₁`. Trees
//! that reach a red vertex become *paralyzing*; white clusters met along
//! the way are registered whole and their green boundary vertices start
//! new active trees. When no active tree is left, the paralyzing trees and
//! the registered white vertices span a subgraph `H` that, together with
//! its external edges `Ē`, is autonomous: its evolution does not depend on
//! colours or opening times anywhere else.

mod diagnostics;
mod verify;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, VertexId, VertexSet};
use crate::sampling::{Colour, ColourField, EdgeWeights};
use crate::scalar::{Keyed, Scalar};

pub use diagnostics::{diagnostics, StepDiagnostics, StepStats};
pub use verify::{check_condition, verify_autonomous, AutonomyReport, ConditionCheck};

/// How intra-tree edges are removed from the external edge set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PurgeMode {
    /// Scan the whole set before every selection, as the procedure is
    /// written.
    Literal,
    /// Drop such edges when they reach the front of the queue. Selects the
    /// same edges in the same order.
    #[default]
    Lazy,
}

/// Deliberate deviations used to check that verification catches errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Omit the exposure credit when a registered white vertex turns green.
    NoExposureCredit,
    /// Leave the smallest external edge out of `Ē`.
    DropExternalEdge,
    /// Set `t_r(z) = t(e)` on the whole paralyzed tree, as printed. Wrong as
    /// soon as a tree edge on the way to `e` opens after `e`.
    FlatParalysisTime,
    /// Credit the full green time `t_r(z) - t_g(z)`, as printed, even when
    /// `z` was still green at `t(e)`. Counts the overlap twice.
    FullCredit,
}

#[derive(Debug, Clone)]
pub struct AlgoOptions {
    pub purge: PurgeMode,
    /// Maximal number of edge selections.
    pub step_budget: usize,
    /// White vertices whose clusters are registered before the first
    /// selection, as if met spontaneously.
    pub pre_register: Vec<VertexId>,
    pub fault: Option<Fault>,
}

impl Default for AlgoOptions {
    fn default() -> Self {
        AlgoOptions {
            purge: PurgeMode::Lazy,
            step_budget: 1_000_000,
            pre_register: Vec::new(),
            fault: None,
        }
    }
}

impl AlgoOptions {
    pub fn literal() -> Self {
        AlgoOptions {
            purge: PurgeMode::Literal,
            ..Self::default()
        }
    }
}

/// Which part of the procedure handled a selected edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    FreshRed,
    FreshGreen,
    FreshWhite,
    Paralyzing,
    Active,
    RegisteredWhite,
}

impl Branch {
    pub fn is_fresh(self) -> bool {
        matches!(self, Branch::FreshRed | Branch::FreshGreen | Branch::FreshWhite)
    }

    pub fn name(self) -> &'static str {
        match self {
            Branch::FreshRed => "2a-red",
            Branch::FreshGreen => "2a-green",
            Branch::FreshWhite => "2a-white",
            Branch::Paralyzing => "2b-Tp",
            Branch::Active => "2b-Ta",
            Branch::RegisteredWhite => "2b-white",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One edge selection.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord<T> {
    /// 1-based selection counter.
    pub selection: usize,
    pub branch: Branch,
    pub edge: EdgeId,
    /// Endpoint in an active tree.
    pub v: VertexId,
    pub y: VertexId,
    pub t1: T,
    /// Registered vertices and active trees just before the selection.
    pub registered_before: usize,
    pub active_before: usize,
    /// `|C_w(y)|` on the fresh-white branch, else 0.
    pub white_cluster: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParalyzingTree {
    /// The initially red vertex of the tree.
    pub origin: VertexId,
    pub vertices: VertexSet,
    pub edges: Vec<EdgeId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutonomousResult<T> {
    pub x: VertexId,
    pub h_vertices: VertexSet,
    /// Edges with both endpoints in `H`.
    pub h_edges: Vec<EdgeId>,
    /// `Ē`: edges from a non-red vertex of `H` to the outside.
    pub external: Vec<EdgeId>,
    pub t_g: BTreeMap<VertexId, T>,
    pub t_r: BTreeMap<VertexId, T>,
    /// Opening times `t(e)` of tree edges.
    pub t_edge: BTreeMap<EdgeId, T>,
    pub trees: Vec<ParalyzingTree>,
    /// Registered white vertices.
    pub white: VertexSet,
}

impl<T: Scalar> AutonomousResult<T> {
    pub fn tree_of(&self, v: VertexId) -> Option<&ParalyzingTree> {
        self.trees.iter().find(|t| t.vertices.contains(&v))
    }

    /// The initially red vertex responsible for `v`.
    pub fn responsible(&self, v: VertexId) -> Option<VertexId> {
        self.tree_of(v).map(|t| t.origin)
    }

    /// `C_g(x)`: vertices of `x`'s tree joined to `x` by tree edges that
    /// open strictly before `x` turns red. Empty if `x` never turns green.
    pub fn green_cluster(&self, g: &Graph, x: VertexId) -> VertexSet {
        let (Some(tree), Some(&tr)) = (self.tree_of(x), self.t_r.get(&x)) else {
            return VertexSet::new();
        };
        if !self.t_g.contains_key(&x) {
            return VertexSet::new();
        }
        let mut adj: HashMap<VertexId, Vec<(VertexId, EdgeId)>> = HashMap::new();
        for &e in &tree.edges {
            let (a, b) = g.endpoints(e);
            adj.entry(a).or_default().push((b, e));
            adj.entry(b).or_default().push((a, e));
        }
        let mut out = VertexSet::from([x]);
        let mut stack = vec![x];
        while let Some(u) = stack.pop() {
            for &(w, e) in adj.get(&u).into_iter().flatten() {
                if self.t_edge[&e] < tr && out.insert(w) {
                    stack.push(w);
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let times = |m: &BTreeMap<usize, T>| -> Value {
            m.iter()
                .map(|(k, v)| (k.to_string(), json!(v.as_f64())))
                .collect::<serde_json::Map<_, _>>()
                .into()
        };
        json!({
            "x": self.x,
            "h_vertices": self.h_vertices,
            "h_edges": self.h_edges,
            "external": self.external,
            "white": self.white,
            "t_g": times(&self.t_g),
            "t_r": times(&self.t_r),
            "t_edge": times(&self.t_edge),
            "trees": self.trees.iter().map(|t| json!({
                "origin": t.origin,
                "vertices": t.vertices,
                "edges": t.edges,
            })).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome<T> {
    Completed(AutonomousResult<T>),
    BudgetExhausted { selections: usize },
}

/// A run with its step log; the log is kept for exhausted runs too.
#[derive(Debug, Clone, PartialEq)]
pub struct AutonomousRun<T> {
    pub x: VertexId,
    pub log: Vec<StepRecord<T>>,
    pub outcome: Outcome<T>,
    /// Registered vertices and active trees when the run ended.
    pub final_registered: usize,
    pub final_active: usize,
    pub max_degree: usize,
}

impl<T: Scalar> AutonomousRun<T> {
    pub fn result(&self) -> Result<&AutonomousResult<T>> {
        match &self.outcome {
            Outcome::Completed(r) => Ok(r),
            Outcome::BudgetExhausted { selections } => Err(Error::BudgetExhausted(*selections)),
        }
    }

    pub fn into_result(self) -> Result<AutonomousResult<T>> {
        match self.outcome {
            Outcome::Completed(r) => Ok(r),
            Outcome::BudgetExhausted { selections } => Err(Error::BudgetExhausted(selections)),
        }
    }

    pub fn is_complete(&self) -> bool {
        matches!(self.outcome, Outcome::Completed(_))
    }

    /// Step log as JSON lines.
    pub fn log_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.log {
            let rec = json!({
                "selection": r.selection,
                "branch": r.branch.name(),
                "edge": r.edge,
                "v": r.v,
                "y": r.y,
                "t1": r.t1.as_f64(),
                "registered_before": r.registered_before,
                "active_before": r.active_before,
            });
            out.push_str(&rec.to_string());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone)]
struct Tree {
    vertices: Vec<VertexId>,
    edges: Vec<EdgeId>,
    active: bool,
    origin: Option<VertexId>,
}

struct State<'a, T> {
    g: &'a Graph,
    colours: &'a ColourField,
    tau: &'a EdgeWeights<T>,
    opts: &'a AlgoOptions,
    trees: Vec<Option<Tree>>,
    tree_of: Vec<Option<usize>>,
    in_s: Vec<bool>,
    registered: usize,
    active: usize,
    /// `t₁` of edges currently in `ℰ`.
    t1: Vec<Option<T>>,
    queue: BTreeSet<Keyed<T>>,
    t_g: Vec<Option<T>>,
    t_r: Vec<Option<T>>,
    t_e: Vec<Option<T>>,
    log: Vec<StepRecord<T>>,
}

impl<'a, T: Scalar> State<'a, T> {
    fn new(
        g: &'a Graph,
        colours: &'a ColourField,
        tau: &'a EdgeWeights<T>,
        opts: &'a AlgoOptions,
    ) -> Self {
        let n = g.num_vertices();
        let m = g.num_edges();
        State {
            g,
            colours,
            tau,
            opts,
            trees: Vec::new(),
            tree_of: vec![None; n],
            in_s: vec![false; n],
            registered: 0,
            active: 0,
            t1: vec![None; m],
            queue: BTreeSet::new(),
            t_g: vec![None; n],
            t_r: vec![None; n],
            t_e: vec![None; m],
            log: Vec::new(),
        }
    }

    fn is_registered(&self, v: VertexId) -> bool {
        self.tree_of[v].is_some() || self.in_s[v]
    }

    fn tree(&self, id: usize) -> &Tree {
        self.trees[id].as_ref().expect("live tree")
    }

    fn active_tree(&self, v: VertexId) -> Option<usize> {
        self.tree_of[v].filter(|&t| self.tree(t).active)
    }

    fn paralyzing_tree(&self, v: VertexId) -> Option<usize> {
        self.tree_of[v].filter(|&t| !self.tree(t).active)
    }

    fn new_tree(&mut self, v: VertexId, active: bool) {
        if !self.is_registered(v) {
            self.registered += 1;
        }
        let id = self.trees.len();
        self.trees.push(Some(Tree {
            vertices: vec![v],
            edges: Vec::new(),
            active,
            origin: (!active).then_some(v),
        }));
        self.tree_of[v] = Some(id);
        if active {
            self.active += 1;
        }
    }

    /// Merges tree `b` into tree `a` through `e`; the result keeps `a`'s
    /// label.
    fn glue(&mut self, a: usize, b: usize, e: EdgeId) {
        let tb = self.trees[b].take().expect("live tree");
        if tb.active {
            self.active -= 1;
        }
        for &v in &tb.vertices {
            self.tree_of[v] = Some(a);
        }
        let ta = self.trees[a].as_mut().expect("live tree");
        ta.vertices.extend(tb.vertices);
        ta.edges.extend(tb.edges);
        ta.edges.push(e);
    }

    /// Glues the single vertex `y` to tree `a` through `e`.
    fn attach(&mut self, a: usize, y: VertexId, e: EdgeId) {
        if !self.is_registered(y) {
            self.registered += 1;
        }
        self.tree_of[y] = Some(a);
        let ta = self.trees[a].as_mut().expect("live tree");
        ta.vertices.push(y);
        ta.edges.push(e);
    }

    fn enroll(&mut self, e: EdgeId, t1: T) {
        debug_assert!(self.t1[e].is_none());
        self.t1[e] = Some(t1);
        self.queue.insert(Keyed::new(t1, e));
    }

    fn remove(&mut self, e: EdgeId) {
        if let Some(t) = self.t1[e].take() {
            self.queue.remove(&Keyed::new(t, e));
        }
    }

    fn same_active_tree(&self, e: EdgeId) -> bool {
        let (a, b) = self.g.endpoints(e);
        matches!((self.active_tree(a), self.active_tree(b)), (Some(x), Some(y)) if x == y)
    }

    /// Step 2: purge and select. `None` when `ℰ` is empty.
    fn select(&mut self) -> Option<(EdgeId, T)> {
        if self.opts.purge == PurgeMode::Literal {
            let stale: Vec<EdgeId> = self
                .queue
                .iter()
                .map(|k| k.id)
                .filter(|&e| self.same_active_tree(e))
                .collect();
            for e in stale {
                self.remove(e);
            }
            return self.queue.first().map(|k| (k.id, k.value));
        }
        while let Some(k) = self.queue.first().copied() {
            if self.same_active_tree(k.id) {
                self.remove(k.id);
                continue;
            }
            return Some((k.id, k.value));
        }
        None
    }

    /// Step 6 on the white cluster of `y`.
    fn register_white_cluster(&mut self, y: VertexId) -> usize {
        let (cluster, boundary) = self.g.white_cluster(self.colours, y);
        for &w in &cluster {
            if !self.is_registered(w) {
                self.registered += 1;
            }
            self.in_s[w] = true;
        }
        for &z in &boundary {
            match self.colours[z] {
                Colour::Green if self.tree_of[z].is_none() => {
                    self.new_tree(z, true);
                    self.t_g[z] = Some(T::zero());
                    for i in 0..self.g.degree(z) {
                        let e = self.g.neighbors(z)[i].1;
                        if self.t1[e].is_none() {
                            self.enroll(e, self.tau[e]);
                        }
                    }
                }
                Colour::Red if self.paralyzing_tree(z).is_none() => {
                    self.new_tree(z, false);
                    self.t_r[z] = Some(T::zero());
                }
                _ => {}
            }
        }
        cluster.len()
    }

    /// Step 3b: active tree `t` is paralyzed through `e = ⟨v, y⟩` with `y`
    /// in a paralyzing tree.
    fn paralyze(&mut self, t: usize, e: EdgeId, v: VertexId, y: VertexId) {
        let te = self.t_e[e].expect("t(e) is set before 3b");
        let flat = self.opts.fault == Some(Fault::FlatParalysisTime);
        // A vertex z of the tree joins the red cluster once e and every
        // tree edge between z and v are open, and not before y is red.
        let base = te.max_of(self.t_r[y].expect("paralyzing trees are red"));
        let tree = self.tree(t).clone();
        let mut adj: HashMap<VertexId, Vec<(VertexId, EdgeId)>> = HashMap::new();
        for &f in &tree.edges {
            let (a, b) = self.g.endpoints(f);
            adj.entry(a).or_default().push((b, f));
            adj.entry(b).or_default().push((a, f));
        }
        let mut stack = vec![(v, base)];
        let mut seen = VertexSet::from([v]);
        while let Some((z, time)) = stack.pop() {
            self.t_r[z] = Some(if flat { te } else { time });
            for &(w, f) in adj.get(&z).into_iter().flatten() {
                if seen.insert(w) {
                    let tf = self.t_e[f].expect("tree edges have t(e)");
                    stack.push((w, time.max_of(tf)));
                }
            }
        }
        for &z in &tree.vertices {
            for i in 0..self.g.degree(z) {
                let (w, f) = self.g.neighbors(z)[i];
                // edges inside T are already purged in literal mode; the
                // lazy queue may still hold them
                if self.t1[f].is_some() && self.active_tree(w).is_none_or(|tw| tw == t) {
                    self.remove(f);
                }
            }
        }
        let target = self.paralyzing_tree(y).expect("y is in a paralyzing tree");
        self.glue(target, t, e);
    }

    /// Step 7: the registered white vertex `y` turns green through `e`.
    fn absorb_white(&mut self, t: usize, e: EdgeId, y: VertexId) {
        let te = self.t_e[e].expect("t(e) is set in 2b");
        self.t_g[y] = Some(te);
        self.attach(t, y, e);
        for i in 0..self.g.degree(y) {
            let (z, f) = self.g.neighbors(y)[i];
            if self.t1[f].is_some() {
                continue;
            }
            let credit = match (self.paralyzing_tree(z), self.opts.fault) {
                (_, Some(Fault::NoExposureCredit)) => None,
                (Some(_), _) if self.colours[z] != Colour::Red => {
                    // green time of z before e opened; z may still be green
                    let tr = self.t_r[z].expect("red time");
                    let end = if self.opts.fault == Some(Fault::FullCredit) { tr } else { tr.min_of(te) };
                    let start = self.t_g[z].expect("green time");
                    (end > start).then(|| end - start)
                }
                _ => None,
            };
            let t1 = match credit {
                Some(c) => te + self.tau[f] - c,
                None => te + self.tau[f],
            };
            self.enroll(f, t1);
        }
    }

    fn run(&mut self) -> Option<usize> {
        let mut selections = 0;
        loop {
            let (e, t1) = self.select()?;
            if selections == self.opts.step_budget {
                return Some(selections);
            }
            selections += 1;
            let (a, b) = self.g.endpoints(e);
            let (v, y) = if self.active_tree(a).is_some() { (a, b) } else { (b, a) };
            let t = self.active_tree(v).expect("ℰ edges touch an active tree");
            let mut record = StepRecord {
                selection: selections,
                branch: Branch::FreshRed,
                edge: e,
                v,
                y,
                t1,
                registered_before: self.registered,
                active_before: self.active,
                white_cluster: 0,
            };
            if !self.is_registered(y) {
                match self.colours[y] {
                    Colour::Red => {
                        self.t_e[e] = Some(t1);
                        self.new_tree(y, false);
                        self.t_r[y] = Some(T::zero());
                        self.paralyze(t, e, v, y);
                    }
                    Colour::Green => {
                        record.branch = Branch::FreshGreen;
                        self.t_e[e] = Some(t1);
                        self.t_g[y] = Some(T::zero());
                        self.attach(t, y, e);
                        for i in 0..self.g.degree(y) {
                            let f = self.g.neighbors(y)[i].1;
                            if self.t1[f].is_none() {
                                self.enroll(f, self.tau[f]);
                            }
                        }
                    }
                    Colour::White => {
                        record.branch = Branch::FreshWhite;
                        record.white_cluster = self.register_white_cluster(y);
                    }
                }
            } else {
                self.t_e[e] = Some(t1);
                if self.paralyzing_tree(y).is_some() {
                    record.branch = Branch::Paralyzing;
                    self.paralyze(t, e, v, y);
                } else if let Some(ty) = self.active_tree(y) {
                    record.branch = Branch::Active;
                    self.glue(t, ty, e);
                } else {
                    record.branch = Branch::RegisteredWhite;
                    self.absorb_white(t, e, y);
                }
            }
            self.log.push(record);
        }
    }

    fn finish(self, x: VertexId) -> Result<AutonomousResult<T>> {
        if self.active > 0 {
            return Err(Error::NoRedReachable(x));
        }
        let mut trees = Vec::new();
        let mut h_vertices: VertexSet = (0..self.g.num_vertices()).filter(|&v| self.in_s[v]).collect();
        for tree in self.trees.iter().flatten() {
            h_vertices.extend(tree.vertices.iter().copied());
            trees.push(ParalyzingTree {
                origin: tree.origin.expect("paralyzing trees have an origin"),
                vertices: tree.vertices.iter().copied().collect(),
                edges: tree.edges.clone(),
            });
        }
        let mut h_edges = Vec::new();
        let mut external = Vec::new();
        for (e, &(a, b)) in self.g.edges().iter().enumerate() {
            match (h_vertices.contains(&a), h_vertices.contains(&b)) {
                (true, true) => h_edges.push(e),
                (true, false) if self.colours[a] != Colour::Red => external.push(e),
                (false, true) if self.colours[b] != Colour::Red => external.push(e),
                _ => {}
            }
        }
        if self.opts.fault == Some(Fault::DropExternalEdge) && !external.is_empty() {
            external.remove(0);
        }
        let collect = |v: &[Option<T>]| -> BTreeMap<usize, T> {
            v.iter()
                .enumerate()
                .filter_map(|(i, t)| t.map(|t| (i, t)))
                .collect()
        };
        Ok(AutonomousResult {
            x,
            white: (0..self.g.num_vertices()).filter(|&v| self.in_s[v]).collect(),
            h_vertices,
            h_edges,
            external,
            t_g: collect(&self.t_g),
            t_r: collect(&self.t_r),
            t_edge: collect(&self.t_e),
            trees,
        })
    }
}

/// Runs the exploration from `x` until no active tree is left or the step
/// budget is spent.
///
/// A red `x` gives `H = {x}` and no external edges. A white `x` starts by
/// registering its white cluster as in the fresh-white branch.
pub fn run_algorithm<T: Scalar>(
    g: &Graph,
    colours: &ColourField,
    weights: &EdgeWeights<T>,
    x: VertexId,
    opts: &AlgoOptions,
) -> Result<AutonomousRun<T>> {
    crate::direct_sim::check_fields(g, colours, weights)?;
    if !g.contains(x) {
        return Err(Error::UnknownVertex(x));
    }
    let mut st = State::new(g, colours, weights, opts);
    match colours[x] {
        Colour::Red => {
            st.new_tree(x, false);
            st.t_r[x] = Some(T::zero());
            let result = st.finish(x).map(|mut r| {
                r.external.clear();
                r
            })?;
            return Ok(AutonomousRun {
                x,
                log: Vec::new(),
                outcome: Outcome::Completed(result),
                final_registered: 1,
                final_active: 0,
                max_degree: g.max_degree(),
            });
        }
        Colour::Green => {
            st.new_tree(x, true);
            st.t_g[x] = Some(T::zero());
            for i in 0..g.degree(x) {
                let e = g.neighbors(x)[i].1;
                st.enroll(e, weights[e]);
            }
        }
        Colour::White => {
            st.register_white_cluster(x);
        }
    }
    for &w in &opts.pre_register {
        if !g.contains(w) {
            return Err(Error::UnknownVertex(w));
        }
        if colours[w] == Colour::White && !st.is_registered(w) {
            st.register_white_cluster(w);
        }
    }
    let exhausted = st.run();
    let final_registered = st.registered;
    let final_active = st.active;
    let log = std::mem::take(&mut st.log);
    let outcome = match exhausted {
        Some(selections) => Outcome::BudgetExhausted { selections },
        None => Outcome::Completed(st.finish(x)?),
    };
    Ok(AutonomousRun {
        x,
        log,
        outcome,
        final_registered,
        final_active,
        max_degree: g.max_degree(),
    })
}
