//! Small hand-checkable instances.

use crate::graph::Graph;
use crate::sampling::{Colour, ColourField, EdgeWeights};
use crate::scalar::Scalar;

/// The five-vertex path `1 - 2 - 3 - 4 - 5` coloured `R G W G R` with
/// opening times `6, 3, 4, 2`. Vertex ids are 0-based; labels are 1-based.
pub fn example_1_2<T: Scalar>() -> (Graph, ColourField, EdgeWeights<T>) {
    let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)], 0)
        .and_then(|g| g.with_labels((1..=5).map(|i| i.to_string()).collect()))
        .expect("fixture graph is valid");
    use Colour::*;
    let colours = ColourField::from(vec![Red, Green, White, Green, Red]);
    let tau: Vec<T> = [6, 3, 4, 2]
        .iter()
        .map(|&t| T::from_i32(t).expect("small integers are representable"))
        .collect();
    (g, colours, EdgeWeights::new(tau).expect("positive"))
}
