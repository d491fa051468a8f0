use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Graph, VertexId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeKind {
    Hypercubic(u32),
    Square,
    Triangular,
    /// Honeycomb lattice, realised as the brick-wall graph.
    Hexagonal,
    /// Half-line `0 - 1 - ... - n` with the origin at vertex 0.
    Path,
    /// Edge list read from a text file.
    Custom(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Free,
    Periodic,
}

/// A lattice ball `B(n)` around the origin, or a torus of side `2n + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    pub n: u32,
    pub boundary: Boundary,
    /// Distinguished vertex for custom graphs (vertex 0 otherwise).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<VertexId>,
}

impl LatticeSpec {
    pub fn new(kind: LatticeKind, n: u32) -> Self {
        LatticeSpec {
            kind,
            n,
            boundary: Boundary::Free,
            origin: None,
        }
    }

    pub fn square(n: u32) -> Self {
        Self::new(LatticeKind::Square, n)
    }

    pub fn path(n: u32) -> Self {
        Self::new(LatticeKind::Path, n)
    }

    pub fn periodic(mut self) -> Self {
        self.boundary = Boundary::Periodic;
        self
    }

    /// Bond percolation threshold of the lattice, where it is known exactly.
    pub fn bond_pc(&self) -> Option<f64> {
        let s = (std::f64::consts::PI / 18.0).sin();
        match self.kind {
            LatticeKind::Square => Some(0.5),
            LatticeKind::Hypercubic(2) => Some(0.5),
            LatticeKind::Triangular => Some(2.0 * s),
            LatticeKind::Hexagonal => Some(1.0 - 2.0 * s),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidSpec("box radius n must be at least 1".into()));
        }
        if let LatticeKind::Hypercubic(0) = self.kind {
            return Err(Error::InvalidSpec("dimension d must be at least 1".into()));
        }
        if self.boundary == Boundary::Periodic {
            match self.kind {
                LatticeKind::Hypercubic(_) | LatticeKind::Square | LatticeKind::Triangular => {}
                LatticeKind::Hexagonal => {
                    return Err(Error::InvalidSpec(
                        "hexagonal torus needs even side lengths; periodic boundary is not offered"
                            .into(),
                    ))
                }
                _ => {
                    return Err(Error::InvalidSpec(format!(
                        "periodic boundary is not offered for {}",
                        self.kind
                    )))
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeKind::Hypercubic(d) => write!(f, "hypercubic{d}"),
            LatticeKind::Square => f.write_str("square"),
            LatticeKind::Triangular => f.write_str("triangular"),
            LatticeKind::Hexagonal => f.write_str("hexagonal"),
            LatticeKind::Path => f.write_str("path"),
            LatticeKind::Custom(p) => write!(f, "custom:{}", p.display()),
        }
    }
}

impl FromStr for LatticeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "square" => LatticeKind::Square,
            "triangular" => LatticeKind::Triangular,
            "hexagonal" | "honeycomb" => LatticeKind::Hexagonal,
            "path" => LatticeKind::Path,
            _ => {
                if let Some(d) = s.strip_prefix("hypercubic") {
                    let d = d
                        .trim_start_matches(':')
                        .parse()
                        .map_err(|_| Error::InvalidSpec(format!("bad dimension in {s:?}")))?;
                    LatticeKind::Hypercubic(d)
                } else if let Some(p) = s.strip_prefix("custom:") {
                    LatticeKind::Custom(PathBuf::from(p))
                } else {
                    return Err(Error::InvalidSpec(format!("unknown lattice kind {s:?}")));
                }
            }
        })
    }
}

type Coord = Vec<i64>;

fn neighbours(kind: &LatticeKind, c: &Coord) -> Vec<Coord> {
    let shift = |dx: &[i64]| c.iter().zip(dx).map(|(a, b)| a + b).collect::<Coord>();
    match kind {
        LatticeKind::Hypercubic(_) | LatticeKind::Square => {
            let d = c.len();
            let mut out = Vec::with_capacity(2 * d);
            for i in 0..d {
                for s in [1, -1] {
                    let mut n = c.clone();
                    n[i] += s;
                    out.push(n);
                }
            }
            out
        }
        LatticeKind::Triangular => [[1, 0], [-1, 0], [0, 1], [0, -1], [1, -1], [-1, 1]]
            .iter()
            .map(|d| shift(d))
            .collect(),
        LatticeKind::Hexagonal => {
            let vertical = if (c[0] + c[1]).rem_euclid(2) == 0 { 1 } else { -1 };
            vec![shift(&[1, 0]), shift(&[-1, 0]), shift(&[0, vertical])]
        }
        LatticeKind::Path => [1, -1]
            .iter()
            .map(|d| vec![c[0] + d])
            .filter(|n| n[0] >= 0)
            .collect(),
        LatticeKind::Custom(_) => Vec::new(),
    }
}

fn dimension(kind: &LatticeKind) -> usize {
    match kind {
        LatticeKind::Hypercubic(d) => *d as usize,
        LatticeKind::Square | LatticeKind::Triangular | LatticeKind::Hexagonal => 2,
        LatticeKind::Path | LatticeKind::Custom(_) => 1,
    }
}

/// Builds the ball `B(n)` (free boundary) or the torus (periodic) of the
/// requested lattice. The origin gets vertex id 0; the remaining ids follow
/// breadth-first order.
pub fn build_lattice(spec: &LatticeSpec) -> Result<Graph> {
    spec.validate()?;
    if let LatticeKind::Custom(path) = &spec.kind {
        let g = super::read_edge_list(path, spec.origin.unwrap_or(0))?;
        return ball_of(&g, spec.n);
    }
    let d = dimension(&spec.kind);
    let side = 2 * spec.n as i64 + 1;
    let periodic = spec.boundary == Boundary::Periodic;
    let wrap = |c: Coord| -> Coord {
        if periodic {
            c.into_iter().map(|x| x.rem_euclid(side)).collect()
        } else {
            c
        }
    };

    let origin: Coord = vec![0; d];
    let mut ids: HashMap<Coord, VertexId> = HashMap::new();
    let mut coords: Vec<Coord> = Vec::new();
    let mut depth: Vec<u32> = Vec::new();
    let mut queue = VecDeque::new();
    ids.insert(origin.clone(), 0);
    coords.push(origin);
    depth.push(0);
    queue.push_back(0);
    while let Some(v) = queue.pop_front() {
        if !periodic && depth[v] == spec.n {
            continue;
        }
        for w in neighbours(&spec.kind, &coords[v]) {
            let w = wrap(w);
            if !ids.contains_key(&w) {
                let id = coords.len();
                ids.insert(w.clone(), id);
                coords.push(w);
                depth.push(depth[v] + 1);
                queue.push_back(id);
            }
        }
    }

    let mut edges = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (v, c) in coords.iter().enumerate() {
        for w in neighbours(&spec.kind, c) {
            if let Some(&u) = ids.get(&wrap(w)) {
                if u != v && seen.insert((v.min(u), v.max(u))) {
                    edges.push((v.min(u), v.max(u)));
                }
            }
        }
    }
    edges.sort_unstable();
    let g = Graph::from_edges(coords.len(), &edges, 0)?;
    Ok(g.with_box_radius(if periodic { None } else { Some(spec.n) }))
}

/// Induced ball of radius `n` around the origin of an arbitrary graph.
fn ball_of(g: &Graph, n: u32) -> Result<Graph> {
    let keep: Vec<VertexId> = (0..g.num_vertices())
        .filter(|&v| g.dist_from_origin(v) <= n)
        .collect();
    if keep.len() == g.num_vertices() {
        return Ok(g.clone());
    }
    let mut new_id = vec![usize::MAX; g.num_vertices()];
    for (i, &v) in keep.iter().enumerate() {
        new_id[v] = i;
    }
    let edges: Vec<_> = g
        .edges()
        .iter()
        .filter(|&&(a, b)| new_id[a] != usize::MAX && new_id[b] != usize::MAX)
        .map(|&(a, b)| (new_id[a], new_id[b]))
        .collect();
    Ok(Graph::from_edges(keep.len(), &edges, new_id[g.origin()])?.with_box_radius(Some(n)))
}
