//! Finite graphs and lattice balls.
//!
//! A [`Graph`] is immutable once built. Vertices and edges are dense
//! integer ids; edge ids are stable and are the tie-breaker used
//! everywhere else in the crate.

mod io;
mod lattice;

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::sampling::{Colour, ColourField};

pub use io::{parse_edge_list, random_connected, read_edge_list};
pub use lattice::{build_lattice, Boundary, LatticeKind, LatticeSpec};

pub type VertexId = usize;
pub type EdgeId = usize;
pub type VertexSet = BTreeSet<VertexId>;

#[derive(Debug, Clone)]
pub struct Graph {
    adjacency: Vec<Vec<(VertexId, EdgeId)>>,
    edges: Vec<(VertexId, VertexId)>,
    max_degree: usize,
    origin: VertexId,
    origin_dist: Vec<u32>,
    box_radius: Option<u32>,
    labels: Option<Vec<String>>,
}

impl Graph {
    /// Builds a graph from an edge list.
    ///
    /// Rejects self-loops, parallel edges and disconnected inputs. Edge ids
    /// follow the order of `edges`.
    pub fn from_edges(
        num_vertices: usize,
        edges: &[(VertexId, VertexId)],
        origin: VertexId,
    ) -> Result<Self> {
        if num_vertices == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        if origin >= num_vertices {
            return Err(Error::UnknownVertex(origin));
        }
        let mut adjacency = vec![Vec::new(); num_vertices];
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        for (id, &(u, v)) in edges.iter().enumerate() {
            if u >= num_vertices || v >= num_vertices {
                return Err(Error::UnknownVertex(u.max(v)));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidGraph(format!("parallel edge {u}-{v}")));
            }
            adjacency[u].push((v, id));
            adjacency[v].push((u, id));
        }
        let max_degree = adjacency.iter().map(Vec::len).max().unwrap_or(0);
        let mut graph = Graph {
            adjacency,
            edges: edges.to_vec(),
            max_degree,
            origin,
            origin_dist: Vec::new(),
            box_radius: None,
            labels: None,
        };
        let dist = graph.bfs_from(origin);
        if dist.iter().any(|d| d.is_none()) {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        graph.origin_dist = dist.into_iter().map(|d| d.unwrap_or(u32::MAX)).collect();
        Ok(graph)
    }

    pub(crate) fn with_box_radius(mut self, radius: Option<u32>) -> Self {
        self.box_radius = radius;
        self
    }

    /// Attaches display labels (used by fixtures whose vertices are
    /// conventionally numbered from 1).
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.num_vertices() {
            return Err(Error::InvalidGraph(format!(
                "{} labels for {} vertices",
                labels.len(),
                self.num_vertices()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Returns a copy with a different distinguished vertex.
    pub fn with_origin(&self, origin: VertexId) -> Result<Self> {
        if origin >= self.num_vertices() {
            return Err(Error::UnknownVertex(origin));
        }
        let mut g = self.clone();
        g.origin = origin;
        g.origin_dist = g
            .bfs_from(origin)
            .into_iter()
            .map(|d| d.unwrap_or(u32::MAX))
            .collect();
        g.box_radius = None;
        Ok(g)
    }

    pub fn num_vertices(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn origin(&self) -> VertexId {
        self.origin
    }

    /// The maximal degree `D`.
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v].len()
    }

    /// Neighbours of `v` with the connecting edge ids.
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.adjacency[v]
    }

    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.edges[e]
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    /// The endpoint of `e` that is not `v`.
    pub fn other_end(&self, e: EdgeId, v: VertexId) -> VertexId {
        let (a, b) = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }

    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        self.adjacency[u]
            .iter()
            .find(|&&(w, _)| w == v)
            .map(|&(_, e)| e)
    }

    /// Radius `n` of the lattice ball this graph was built as, if any.
    pub fn box_radius(&self) -> Option<u32> {
        self.box_radius
    }

    /// Distance from the distinguished vertex, precomputed.
    pub fn dist_from_origin(&self, v: VertexId) -> u32 {
        self.origin_dist[v]
    }

    /// True for vertices on the outer layer of a lattice ball: their
    /// lattice neighbourhood is truncated by the box.
    pub fn on_box_boundary(&self, v: VertexId) -> bool {
        matches!(self.box_radius, Some(n) if self.origin_dist[v] >= n)
    }

    pub fn label(&self, v: VertexId) -> String {
        match &self.labels {
            Some(l) => l[v].clone(),
            None => v.to_string(),
        }
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v < self.num_vertices()
    }

    fn check_vertex(&self, v: VertexId) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    /// Breadth-first distances from `from`; `None` for unreachable vertices.
    pub fn bfs_from(&self, from: VertexId) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.num_vertices()];
        let mut queue = VecDeque::new();
        dist[from] = Some(0);
        queue.push_back(from);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            for &(w, _) in &self.adjacency[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Shortest-path length between `u` and `v`.
    pub fn distance(&self, u: VertexId, v: VertexId) -> Result<u32> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == self.origin {
            return Ok(self.origin_dist[v]);
        }
        if v == self.origin {
            return Ok(self.origin_dist[u]);
        }
        // connectivity is checked at construction
        Ok(self.bfs_from(u)[v].unwrap_or(u32::MAX))
    }

    /// External vertex boundary: vertices outside `set` with a neighbour in it.
    pub fn boundary(&self, set: &VertexSet) -> VertexSet {
        let mut out = VertexSet::new();
        for &v in set {
            for &(w, _) in &self.adjacency[v] {
                if !set.contains(&w) {
                    out.insert(w);
                }
            }
        }
        out
    }

    /// Maximal distance from `from` to a vertex of `set`.
    pub fn radius_of(&self, set: &VertexSet, from: VertexId) -> Result<u32> {
        self.check_vertex(from)?;
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        let dist = if from == self.origin {
            None
        } else {
            Some(self.bfs_from(from))
        };
        let d = |v: VertexId| match &dist {
            None => self.origin_dist[v],
            Some(d) => d[v].unwrap_or(u32::MAX),
        };
        Ok(set.iter().map(|&v| d(v)).max().unwrap_or(0))
    }

    /// Maximal distance from `from` to any vertex of `set`, for the common
    /// case `from == origin` without allocating.
    pub fn origin_radius<'a>(&self, set: impl IntoIterator<Item = &'a VertexId>) -> u32 {
        set.into_iter()
            .map(|&v| self.origin_dist[v])
            .max()
            .unwrap_or(0)
    }

    /// The white cluster `C_w(v)` and its boundary. Both are empty when `v`
    /// is not initially white.
    pub fn white_cluster(&self, colours: &ColourField, v: VertexId) -> (VertexSet, VertexSet) {
        let mut cluster = VertexSet::new();
        if colours[v] != Colour::White {
            return (cluster, VertexSet::new());
        }
        let mut queue = VecDeque::from([v]);
        cluster.insert(v);
        while let Some(u) = queue.pop_front() {
            for &(w, _) in &self.adjacency[u] {
                if colours[w] == Colour::White && cluster.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        let boundary = self.boundary(&cluster);
        (cluster, boundary)
    }

    /// Builds the subgraph spanned by `edges` (which must be connected),
    /// returning it with the map from new to old vertex ids and the map from
    /// new to old edge ids.
    pub fn edge_subgraph(
        &self,
        edges: &[EdgeId],
        origin: VertexId,
    ) -> Result<(Graph, Vec<VertexId>, Vec<EdgeId>)> {
        let mut old_of_new: Vec<VertexId> = Vec::new();
        let mut new_of_old = std::collections::HashMap::new();
        let mut index = |v: VertexId, old_of_new: &mut Vec<VertexId>| {
            *new_of_old.entry(v).or_insert_with(|| {
                old_of_new.push(v);
                old_of_new.len() - 1
            })
        };
        let o = index(origin, &mut old_of_new);
        let mut new_edges = Vec::with_capacity(edges.len());
        for &e in edges {
            let (a, b) = self.edges[e];
            let na = index(a, &mut old_of_new);
            let nb = index(b, &mut old_of_new);
            new_edges.push((na, nb));
        }
        let g = Graph::from_edges(old_of_new.len(), &new_edges, o)?;
        Ok((g, old_of_new, edges.to_vec()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Colour::*;

    fn path5() -> Graph {
        build_lattice(&LatticeSpec::path(4)).unwrap()
    }

    #[test]
    fn path_distances() {
        let g = path5();
        assert_eq!(g.num_vertices(), 5);
        assert_eq!(g.distance(0, 4).unwrap(), 4);
        assert_eq!(g.distance(2, 2).unwrap(), 0);
        assert_eq!(g.distance(3, 1).unwrap(), 2);
    }

    #[test]
    fn boundary_examples() {
        let g = path5();
        let all: VertexSet = (0..5).collect();
        assert!(g.boundary(&all).is_empty());
        assert_eq!(g.boundary(&[2].into()), VertexSet::from([1, 3]));
        let sq = build_lattice(&LatticeSpec::square(3)).unwrap();
        assert_eq!(sq.boundary(&[sq.origin()].into()).len(), 4);
    }

    #[test]
    fn radius_examples() {
        let g = path5();
        assert_eq!(g.radius_of(&[3].into(), 3).unwrap(), 0);
        assert_eq!(g.radius_of(&[1, 2, 3].into(), 1).unwrap(), 2);
        assert!(matches!(
            g.radius_of(&VertexSet::new(), 0),
            Err(Error::EmptySet)
        ));
        let sq = build_lattice(&LatticeSpec::square(3)).unwrap();
        let all: VertexSet = (0..sq.num_vertices()).collect();
        assert_eq!(sq.radius_of(&all, sq.origin()).unwrap(), 3);
    }

    #[test]
    fn white_cluster_examples() {
        let g = path5();
        let c = ColourField::from(vec![Red, Green, White, Green, Red]);
        let (cw, bd) = g.white_cluster(&c, 2);
        assert_eq!(cw, VertexSet::from([2]));
        assert_eq!(bd, VertexSet::from([1, 3]));
        let (cw, bd) = g.white_cluster(&c, 1);
        assert!(cw.is_empty() && bd.is_empty());
        let all_white = ColourField::from(vec![White; 5]);
        let (cw, bd) = g.white_cluster(&all_white, 2);
        assert_eq!(cw.len(), 5);
        assert!(bd.is_empty());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Graph::from_edges(2, &[(0, 0)], 0).is_err());
        assert!(Graph::from_edges(2, &[(0, 1), (1, 0)], 0).is_err());
        assert!(Graph::from_edges(3, &[(0, 1)], 0).is_err());
        assert!(Graph::from_edges(2, &[(0, 1)], 5).is_err());
    }

    #[test]
    fn edge_subgraph_maps_ids() {
        let g = path5();
        let (h, verts, edges) = g.edge_subgraph(&[1, 2], 2).unwrap();
        assert_eq!(h.num_vertices(), 3);
        assert_eq!(verts[h.origin()], 2);
        assert_eq!(edges, vec![1, 2]);
    }
}
