//! Double Coverage for k-taxi and k-server on trees: a small-step simulator,
//! exact offline optima, reverse-time dual certificates, potential checks,
//! lower-bound instance generators and random HST embeddings.

pub mod tree;
pub mod sim;
pub mod offline;
pub mod potentials;
pub mod dual;
pub mod lowerbound;
pub mod embedding;
pub mod io;
pub mod harness;

pub use sim::{run_double_coverage, Configuration, Request, Trace};
pub use tree::{HstSpec, MetricSpace, SubdividedTree, TreeDescription, VertexId, WeightedTree};
