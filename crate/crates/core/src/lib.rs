//! Growth of green clusters against red paralysis on graphs with random
//! edge opening times.
//!
//! Vertices start white, red or green. An edge opens once it has been
//! exposed to a green endpoint for its opening time; green clusters absorb
//! the white vertices they reach and turn red as soon as they touch a red
//! cluster. The crate provides
//!
//! * an exact event-driven simulator of these dynamics ([`direct_sim`]),
//! * invasion percolation and its stopped variant ([`invasion`]),
//! * the local exploration algorithm that certifies the fate of a single
//!   vertex from a finite neighbourhood ([`autonomous`]),
//! * Monte Carlo estimators for tails, ponds and cluster volumes
//!   ([`analysis`]).
//!
//! Times are generic over [`Scalar`], so the same code runs on `f64`, `f32`
//! and exact rationals.

pub mod analysis;
pub mod autonomous;
pub mod direct_sim;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod invasion;
pub mod sampling;
pub mod scalar;

pub use analysis::{
    compare_ponds, critical_connectivity, estimate_xi, fit_exponential, tail_of_green_cluster,
    tail_of_responsibility, ExperimentConfig, TailEstimate,
};
pub use autonomous::{diagnostics, run_algorithm, verify_autonomous, AlgoOptions, AutonomousResult};
pub use direct_sim::{min_max_path_bound, simulate, Event, Rule, SimOptions, Trace};
pub use error::{Error, Result};
pub use graph::{build_lattice, Boundary, EdgeId, Graph, LatticeKind, LatticeSpec, VertexId, VertexSet};
pub use invasion::{invasion_tree, pond, stopped_invasion, StopRule};
pub use sampling::{Colour, ColourField, EdgeWeights, Params, Seed, WeightDistribution};
pub use scalar::{Keyed, Scalar};

/// Exact rational times.
pub type Exact = num_rational::Ratio<i64>;
pub type Trace64 = Trace<f64>;
pub type Weights64 = EdgeWeights<f64>;
pub type Autonomous64 = AutonomousResult<f64>;
