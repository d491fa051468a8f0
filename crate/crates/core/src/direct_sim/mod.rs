//! Exact event-driven simulation of the growth and paralysis dynamics on a
//! finite graph.
//!
//! Each closed edge carries a clock. Under [`Rule::GreenExposure`] the
//! clock measures the total time during which the edge had a green
//! endpoint; under [`Rule::ContiguousGreen`] it measures how long one
//! endpoint has been green without interruption. An edge opens when its
//! clock reaches `τ(e)`. Tentative opening times live in a priority queue
//! keyed by `(time, edge id)`; entries made stale by a colour change are
//! skipped when popped.

mod trace;

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, VertexId};
use crate::sampling::{Colour, ColourField, EdgeWeights};
use crate::scalar::{Keyed, Scalar};

pub use trace::{Configuration, Event, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Opens once the Lebesgue measure of green-endpoint time reaches `τ`.
    #[default]
    GreenExposure,
    /// Opens once one endpoint has been green throughout `[t - τ, t)`.
    ContiguousGreen,
}

impl std::str::FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exposure" | "green-exposure" | "basic" => Ok(Rule::GreenExposure),
            "contiguous" | "contiguous-green" => Ok(Rule::ContiguousGreen),
            _ => Err(Error::InvalidParams(format!("unknown rule {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    pub rule: Rule,
    /// Graphs with more vertices are rejected.
    pub vertex_budget: usize,
    /// Re-check admissibility after every event (quadratic; for tests).
    pub check_admissible: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            rule: Rule::GreenExposure,
            vertex_budget: 10_000_000,
            check_admissible: false,
        }
    }
}

impl SimOptions {
    pub fn with_rule(rule: Rule) -> Self {
        SimOptions {
            rule,
            ..Self::default()
        }
    }

    pub fn checked(mut self) -> Self {
        self.check_admissible = true;
        self
    }
}

struct Simulator<'a, T> {
    g: &'a Graph,
    tau: &'a EdgeWeights<T>,
    rule: Rule,
    colour: Vec<Colour>,
    open: Vec<bool>,
    exposure: Vec<T>,
    run_start: Vec<T>,
    green_since: Vec<Option<T>>,
    version: Vec<u32>,
    queue: BinaryHeap<Reverse<(Keyed<T>, u32)>>,
    trace: Trace<T>,
}

impl<'a, T: Scalar> Simulator<'a, T> {
    fn new(g: &'a Graph, colours: &ColourField, tau: &'a EdgeWeights<T>, rule: Rule) -> Self {
        let n = g.num_vertices();
        let m = g.num_edges();
        let colour = colours.as_slice().to_vec();
        let zero = T::zero();
        let green_at: Vec<Option<T>> = colour
            .iter()
            .map(|&c| (c == Colour::Green).then_some(zero))
            .collect();
        let red_at: Vec<Option<T>> = colour
            .iter()
            .map(|&c| (c == Colour::Red).then_some(zero))
            .collect();
        let responsible = (0..n)
            .map(|v| (colour[v] == Colour::Red).then_some(v))
            .collect();
        let green_since = green_at.clone();
        let mut sim = Simulator {
            g,
            tau,
            rule,
            open: vec![false; m],
            exposure: vec![zero; m],
            run_start: vec![zero; m],
            green_since,
            version: vec![0; m],
            queue: BinaryHeap::new(),
            trace: Trace {
                events: Vec::new(),
                initial: colours.clone(),
                final_config: Configuration {
                    colours: Vec::new(),
                    open: Vec::new(),
                    time: zero,
                },
                green_at,
                red_at,
                responsible,
                opened_at: vec![None; m],
                paralysis_event: vec![None; n],
            },
            colour,
        };
        for e in 0..m {
            sim.schedule(e);
        }
        sim
    }

    fn is_green(&self, v: VertexId) -> bool {
        self.colour[v] == Colour::Green
    }

    fn clock_running(&self, e: EdgeId) -> bool {
        let (a, b) = self.g.endpoints(e);
        !self.open[e] && (self.is_green(a) || self.is_green(b))
    }

    /// Updates the exposure bookkeeping of `e` after a colour change of one
    /// of its endpoints. The clock runs on a union of intervals; `run_start`
    /// is the start of the current one.
    fn clock_changed(&mut self, e: EdgeId, was_running: bool, now: T) -> bool {
        let running = self.clock_running(e);
        if was_running && !running {
            self.exposure[e] = self.exposure[e] + (now - self.run_start[e]);
        } else if running && !was_running {
            self.run_start[e] = now;
        }
        running != was_running
    }

    /// Pushes the tentative opening time of `e`, assuming no further colour
    /// changes. Invalidates older queue entries.
    fn schedule(&mut self, e: EdgeId) {
        self.version[e] = self.version[e].wrapping_add(1);
        if !self.clock_running(e) {
            return;
        }
        let tentative = match self.rule {
            Rule::GreenExposure => self.run_start[e] + (self.tau[e] - self.exposure[e]),
            Rule::ContiguousGreen => {
                let (a, b) = self.g.endpoints(e);
                let start = |v: VertexId| {
                    if self.is_green(v) {
                        self.green_since[v]
                    } else {
                        None
                    }
                };
                let s = match (start(a), start(b)) {
                    (Some(x), Some(y)) => {
                        if y < x {
                            y
                        } else {
                            x
                        }
                    }
                    (Some(x), None) | (None, Some(x)) => x,
                    (None, None) => return,
                };
                s + self.tau[e]
            }
        };
        self.queue
            .push(Reverse((Keyed::new(tentative, e), self.version[e])));
    }

    fn recolour(&mut self, vertices: &[VertexId], to: Colour, now: T) {
        let mut incident: Vec<(EdgeId, bool)> = Vec::new();
        for &v in vertices {
            for &(_, e) in self.g.neighbors(v) {
                incident.push((e, self.clock_running(e)));
            }
        }
        for &v in vertices {
            self.colour[v] = to;
            match to {
                Colour::Green => {
                    self.green_since[v] = Some(now);
                    self.trace.green_at[v] = Some(now);
                }
                Colour::Red => {
                    self.green_since[v] = None;
                    self.trace.red_at[v] = Some(now);
                }
                Colour::White => unreachable!("vertices never turn white"),
            }
        }
        // edges with both ends in `vertices` are listed twice
        incident.sort_by_key(|&(e, _)| e);
        incident.dedup_by_key(|&mut (e, _)| e);
        for (e, was_running) in incident {
            let changed = self.clock_changed(e, was_running, now);
            if changed || self.rule == Rule::ContiguousGreen {
                self.schedule(e);
            }
        }
    }

    /// Green cluster of `v` over currently open edges.
    fn green_cluster(&self, v: VertexId) -> Vec<VertexId> {
        let mut seen = std::collections::HashSet::from([v]);
        let mut out = vec![v];
        let mut queue = VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            for &(w, e) in self.g.neighbors(u) {
                if self.open[e] && self.is_green(w) && seen.insert(w) {
                    out.push(w);
                    queue.push_back(w);
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn open_edge(&mut self, e: EdgeId, now: T) {
        self.open[e] = true;
        self.version[e] = self.version[e].wrapping_add(1);
        self.trace.opened_at[e] = Some(now);
        self.trace
            .events
            .push(Event::EdgeOpened { edge: e, time: now });
        let (a, b) = self.g.endpoints(e);
        let (green, other) = match (self.colour[a], self.colour[b]) {
            (Colour::Green, _) => (a, b),
            (_, Colour::Green) => (b, a),
            _ => return,
        };
        match self.colour[other] {
            Colour::Green => {}
            Colour::White => {
                self.recolour(&[other], Colour::Green, now);
                self.trace.events.push(Event::TurnedGreen {
                    vertex: other,
                    time: now,
                });
            }
            Colour::Red => {
                let cluster = self.green_cluster(green);
                let responsible = self.trace.responsible[other].expect("red vertices have an origin");
                self.recolour(&cluster, Colour::Red, now);
                let idx = self.trace.events.len();
                for &v in &cluster {
                    self.trace.responsible[v] = Some(responsible);
                    self.trace.paralysis_event[v] = Some(idx);
                }
                self.trace.events.push(Event::Paralyzed {
                    vertices: cluster,
                    time: now,
                    responsible,
                });
            }
        }
    }

    fn run(mut self, check_admissible: bool) -> Trace<T> {
        let mut now = T::zero();
        while let Some(Reverse((key, version))) = self.queue.pop() {
            let e = key.id;
            if self.open[e] || version != self.version[e] {
                continue;
            }
            now = key.value;
            let before = self.trace.events.len();
            self.open_edge(e, now);
            if check_admissible {
                assert!(
                    trace::is_admissible(self.g, &self.colour, &self.open),
                    "inadmissible configuration after event {before} at time {now}"
                );
            }
        }
        self.trace.final_config = Configuration {
            colours: self.colour,
            open: self.open,
            time: now,
        };
        self.trace
    }
}

/// Runs the dynamics to absorption: until no closed edge has a green
/// endpoint. On a finite graph this takes at most `|E|` openings.
pub fn simulate<T: Scalar>(
    g: &Graph,
    colours: &ColourField,
    weights: &EdgeWeights<T>,
    opts: SimOptions,
) -> Result<Trace<T>> {
    if g.num_vertices() > opts.vertex_budget {
        return Err(Error::VertexBudgetExceeded {
            vertices: g.num_vertices(),
            budget: opts.vertex_budget,
        });
    }
    check_fields(g, colours, weights)?;
    Ok(Simulator::new(g, colours, weights, opts.rule).run(opts.check_admissible))
}

pub(crate) fn check_fields<T: Scalar>(
    g: &Graph,
    colours: &ColourField,
    weights: &EdgeWeights<T>,
) -> Result<()> {
    if colours.len() != g.num_vertices() {
        return Err(Error::InvalidParams(format!(
            "{} colours for {} vertices",
            colours.len(),
            g.num_vertices()
        )));
    }
    if weights.len() != g.num_edges() {
        return Err(Error::InvalidParams(format!(
            "{} opening times for {} edges",
            weights.len(),
            g.num_edges()
        )));
    }
    Ok(())
}

/// `min` over paths from `x` to an initially red vertex of the `max` opening
/// time along the path: a lower bound for the paralysis time of `x`, and
/// equal to it when no vertex is white.
pub fn min_max_path_bound<T: Scalar>(
    g: &Graph,
    colours: &ColourField,
    weights: &EdgeWeights<T>,
    x: VertexId,
) -> Result<T> {
    check_fields(g, colours, weights)?;
    if !g.contains(x) {
        return Err(Error::UnknownVertex(x));
    }
    if let Some(w) = colours.first_white() {
        return Err(Error::WhiteVertexPresent(w));
    }
    if colours[x] != Colour::Green {
        return Err(Error::NotGreen(x));
    }
    // minimax Dijkstra: labels are bottleneck values, settled in increasing order
    let mut best: Vec<Option<T>> = vec![None; g.num_vertices()];
    let mut done = vec![false; g.num_vertices()];
    let mut heap: BinaryHeap<Reverse<Keyed<T>>> = BinaryHeap::new();
    for &(w, e) in g.neighbors(x) {
        relax(&mut best, &mut heap, w, weights[e]);
    }
    done[x] = true;
    while let Some(Reverse(k)) = heap.pop() {
        let v = k.id;
        if done[v] {
            continue;
        }
        done[v] = true;
        if colours[v] == Colour::Red {
            return Ok(k.value);
        }
        for &(w, e) in g.neighbors(v) {
            if !done[w] {
                relax(&mut best, &mut heap, w, k.value.max_of(weights[e]));
            }
        }
    }
    Err(Error::NoRedReachable(x))
}

fn relax<T: Scalar>(
    best: &mut [Option<T>],
    heap: &mut BinaryHeap<Reverse<Keyed<T>>>,
    v: VertexId,
    value: T,
) {
    if best[v].is_none_or(|b| value < b) {
        best[v] = Some(value);
        heap.push(Reverse(Keyed::new(value, v)));
    }
}

/// True iff every open-bond cluster with at least one edge is monochromatic
/// red or green.
pub fn is_admissible<T>(g: &Graph, config: &Configuration<T>) -> bool {
    config.is_admissible(g)
}

#[cfg(test)]
mod tests;
