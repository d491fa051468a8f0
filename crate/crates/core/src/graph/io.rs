use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Graph, VertexId};
use crate::error::{Error, Result};

/// Parses a whitespace-separated edge list, one `u v` pair per line.
/// Blank lines and lines starting with `#` are ignored; the vertex count
/// is one more than the largest id mentioned.
pub fn parse_edge_list(text: &str, origin: VertexId) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut max_id = 0;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let mut next = || -> Result<VertexId> {
            fields
                .next()
                .ok_or_else(|| Error::Parse {
                    line: i + 1,
                    msg: "expected two vertex ids".into(),
                })?
                .parse()
                .map_err(|e| Error::Parse {
                    line: i + 1,
                    msg: format!("{e}"),
                })
        };
        let (u, v) = (next()?, next()?);
        if fields.next().is_some() {
            return Err(Error::Parse {
                line: i + 1,
                msg: "trailing fields".into(),
            });
        }
        max_id = max_id.max(u).max(v);
        edges.push((u, v));
    }
    if edges.is_empty() {
        return Err(Error::InvalidGraph("edge list is empty".into()));
    }
    Graph::from_edges(max_id + 1, &edges, origin)
}

pub fn read_edge_list(path: impl AsRef<Path>, origin: VertexId) -> Result<Graph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, origin)
}

/// Random connected graph: a uniformly shuffled random tree plus `extra`
/// additional distinct edges (fewer if the graph saturates).
pub fn random_connected<R: Rng + ?Sized>(n: usize, extra: usize, rng: &mut R) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidGraph("graph has no vertices".into()));
    }
    let mut order: Vec<VertexId> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::with_capacity(n - 1 + extra);
    let mut present = std::collections::HashSet::new();
    for i in 1..n {
        let parent = order[rng.gen_range(0..i)];
        let child = order[i];
        present.insert((parent.min(child), parent.max(child)));
        edges.push((parent, child));
    }
    let max_edges = n * (n - 1) / 2;
    let target = (n - 1 + extra).min(max_edges);
    while edges.len() < target {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b && present.insert((a.min(b), a.max(b))) {
            edges.push((a, b));
        }
    }
    Graph::from_edges(n, &edges, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parses_comments_and_blank_lines() {
        let g = parse_edge_list("# a triangle\n0 1\n\n1 2\n2 0\n", 0).unwrap();
        assert_eq!(g.num_vertices(), 3);
        assert_eq!(g.num_edges(), 3);
        assert_eq!(g.max_degree(), 2);
    }

    #[test]
    fn reports_line_numbers() {
        match parse_edge_list("0 1\n1 x\n", 0) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_edge_list("0 1 2\n", 0).is_err());
        assert!(parse_edge_list("", 0).is_err());
    }

    #[test]
    fn random_graphs_are_connected_and_simple() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..30 {
            let g = random_connected(n, n / 2, &mut rng).unwrap();
            assert_eq!(g.num_vertices(), n);
            assert!(g.num_edges() >= n - 1);
        }
    }
}
