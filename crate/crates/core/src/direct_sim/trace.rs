use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, VertexId, VertexSet};
use crate::sampling::{Colour, ColourField};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum Event<T> {
    EdgeOpened {
        edge: EdgeId,
        time: T,
    },
    TurnedGreen {
        vertex: VertexId,
        time: T,
    },
    /// A whole green cluster turned red. `responsible` is the initially red
    /// vertex of the red cluster it touched.
    Paralyzed {
        vertices: Vec<VertexId>,
        time: T,
        responsible: VertexId,
    },
}

impl<T: Scalar> Event<T> {
    pub fn time(&self) -> T {
        match self {
            Event::EdgeOpened { time, .. }
            | Event::TurnedGreen { time, .. }
            | Event::Paralyzed { time, .. } => *time,
        }
    }
}

/// Site-bond configuration: colour per vertex, open flag per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration<T> {
    pub colours: Vec<Colour>,
    pub open: Vec<bool>,
    pub time: T,
}

impl<T> Configuration<T> {
    /// Every open-bond cluster with at least one edge is all red or all green.
    pub fn is_admissible(&self, g: &Graph) -> bool {
        is_admissible(g, &self.colours, &self.open)
    }
}

pub(crate) fn is_admissible(g: &Graph, colours: &[Colour], open: &[bool]) -> bool {
    let mut seen = vec![false; g.num_vertices()];
    let mut stack = Vec::new();
    for start in 0..g.num_vertices() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let colour = colours[start];
        let mut has_edge = false;
        let mut mono = true;
        while let Some(u) = stack.pop() {
            if colours[u] != colour {
                mono = false;
            }
            for &(w, e) in g.neighbors(u) {
                if open[e] {
                    has_edge = true;
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        if has_edge && (!mono || colour == Colour::White) {
            return false;
        }
    }
    true
}

/// Full record of one run of the dynamics.
#[derive(Debug, Clone)]
pub struct Trace<T> {
    pub events: Vec<Event<T>>,
    pub initial: ColourField,
    pub final_config: Configuration<T>,
    pub(crate) green_at: Vec<Option<T>>,
    pub(crate) red_at: Vec<Option<T>>,
    pub(crate) responsible: Vec<Option<VertexId>>,
    pub(crate) opened_at: Vec<Option<T>>,
    /// Index into `events` of the `Paralyzed` event of each vertex.
    pub(crate) paralysis_event: Vec<Option<usize>>,
}

impl<T: Scalar> Trace<T> {
    /// `t(v)`: time at which `v` becomes red (0 if initially red).
    pub fn paralysis_time(&self, v: VertexId) -> Option<T> {
        self.red_at[v]
    }

    /// Time at which `v` becomes green (0 if initially green).
    pub fn green_time(&self, v: VertexId) -> Option<T> {
        self.green_at[v]
    }

    pub fn opening_time(&self, e: EdgeId) -> Option<T> {
        self.opened_at[e]
    }

    /// The initially red vertex responsible for `v` being red.
    pub fn responsible(&self, v: VertexId) -> Option<VertexId> {
        self.responsible[v]
    }

    /// `D(w)`: originally green vertices that became red due to `w`.
    pub fn responsibility_set(&self, w: VertexId) -> Result<VertexSet> {
        if w >= self.initial.len() {
            return Err(Error::UnknownVertex(w));
        }
        if self.initial[w] != Colour::Red {
            return Err(Error::NotInitiallyRed(w));
        }
        Ok((0..self.initial.len())
            .filter(|&v| self.initial[v] == Colour::Green && self.responsible[v] == Some(w))
            .collect())
    }

    /// `C_g(v)`: the green cluster of `v` just before it became red, or its
    /// final green cluster if it never did. Empty if `v` was never green.
    pub fn green_cluster(&self, g: &Graph, v: VertexId) -> VertexSet {
        if let Some(i) = self.paralysis_event[v] {
            if let Event::Paralyzed { vertices, .. } = &self.events[i] {
                return vertices.iter().copied().collect();
            }
        }
        if self.final_config.colours[v] != Colour::Green {
            return VertexSet::new();
        }
        let mut set = VertexSet::from([v]);
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            for &(w, e) in g.neighbors(u) {
                if self.final_config.open[e] && set.insert(w) {
                    stack.push(w);
                }
            }
        }
        set
    }

    /// Edges in the order they opened.
    pub fn opened_sequence(&self) -> Vec<EdgeId> {
        self.events
            .iter()
            .filter_map(|ev| match ev {
                Event::EdgeOpened { edge, .. } => Some(*edge),
                _ => None,
            })
            .collect()
    }

    pub fn final_colours(&self) -> &[Colour] {
        &self.final_config.colours
    }

    /// Checks that every red open-bond cluster of the final configuration
    /// contains exactly one initially red vertex. Returns the offending
    /// cluster on failure.
    pub fn check_unique_red_origin(&self, g: &Graph) -> std::result::Result<(), VertexSet> {
        let colours = &self.final_config.colours;
        let open = &self.final_config.open;
        let mut seen = vec![false; g.num_vertices()];
        for start in 0..g.num_vertices() {
            if seen[start] || colours[start] != Colour::Red {
                continue;
            }
            let mut cluster = VertexSet::from([start]);
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(u) = stack.pop() {
                for &(w, e) in g.neighbors(u) {
                    if open[e] && !seen[w] {
                        seen[w] = true;
                        cluster.insert(w);
                        stack.push(w);
                    }
                }
            }
            let origins = cluster
                .iter()
                .filter(|&&v| self.initial[v] == Colour::Red)
                .count();
            if origins != 1 || cluster.iter().any(|&v| colours[v] != Colour::Red) {
                return Err(cluster);
            }
        }
        Ok(())
    }

    /// JSON-lines export, one event per line.
    pub fn to_jsonl(&self, g: &Graph) -> String {
        let mut out = String::new();
        for ev in &self.events {
            let rec = EventRecord::from_event(ev, g);
            out.push_str(&serde_json::to_string(&rec).expect("event records serialize"));
            out.push('\n');
        }
        out
    }
}

#[derive(Serialize)]
struct EventRecord<'a> {
    #[serde(rename = "type")]
    kind: &'static str,
    time: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    edge: Option<EdgeId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    endpoints: Option<[VertexId; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    vertex: Option<VertexId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    vertices: Option<&'a [VertexId]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    responsible: Option<VertexId>,
}

impl<'a> EventRecord<'a> {
    fn from_event<T: Scalar>(ev: &'a Event<T>, g: &Graph) -> Self {
        let blank = EventRecord {
            kind: "",
            time: ev.time().as_f64(),
            edge: None,
            endpoints: None,
            vertex: None,
            vertices: None,
            responsible: None,
        };
        match ev {
            Event::EdgeOpened { edge, .. } => {
                let (a, b) = g.endpoints(*edge);
                EventRecord {
                    kind: "edge_opened",
                    edge: Some(*edge),
                    endpoints: Some([a, b]),
                    ..blank
                }
            }
            Event::TurnedGreen { vertex, .. } => EventRecord {
                kind: "turned_green",
                vertex: Some(*vertex),
                ..blank
            },
            Event::Paralyzed {
                vertices,
                responsible,
                ..
            } => EventRecord {
                kind: "paralyzed",
                vertices: Some(vertices),
                responsible: Some(*responsible),
                ..blank
            },
        }
    }
}
