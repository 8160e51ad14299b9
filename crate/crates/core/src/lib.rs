//! Uniform sampling from bounded convex polytopes by simplicial decomposition.
//!
//! The pipeline is: H-representation → vertices ([`vertex`]) → triangulation
//! into simplices with volume weights ([`triangulation`]) → mixture sampling
//! with a flat Dirichlet inside a categorically chosen simplex ([`sampler`]).
//! Hit-and-run and rejection sampling are provided as baselines, and
//! [`analysis`] holds the uniformity checks used to validate all three.

pub mod analysis;
pub mod bench;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod rng;
pub mod sampler;
pub mod triangulation;
pub mod vertex;

pub use error::{Error, Result};
pub use exec::Execution;
pub use geometry::{Point, Polytope, Simplex};
pub use rng::RngStream;
pub use sampler::{SampleBatch, Sampler, SamplerId};
pub use triangulation::Decomposition;
pub use vertex::{FacetIncidence, VertexMethod, VertexSet};
