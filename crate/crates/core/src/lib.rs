//! Exact Ollivier-Ricci curvature on graphs, message-passing network
//! simulation, and machine checks of the curvature bounds on over-smoothing
//! and over-squashing, plus curvature-guided rewiring.

pub mod curvature;
pub mod diagnostics;
pub mod error;
pub mod generate;
pub mod graph;
pub mod mpnn;
pub mod ratio;
pub mod rewiring;
pub mod transport;

pub use error::{Error, Result};
pub use graph::Graph;
pub use ratio::Rational;
