//! Geometric random graphs and their reconstruction from distance queries.
//!
//! The crate samples unit-intensity Poisson point sets on a square window
//! (torus or hard boundary), connects points within a radius, and recovers the
//! edge set with the two-phase SIMPLE algorithm through a query-counting
//! distance oracle. The [`experiments`] module runs the query-complexity and
//! non-edge-detection sweeps and writes them as CSV.

pub mod bounds;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod graph;
pub mod oracle;
pub mod rng;
pub mod simple;

pub use error::{Error, Result};
pub use geometry::{sample_ppp, thin, Boundary, Domain, Point, PointSet};
pub use graph::{
    bfs, build_grg, build_rrg, is_connected, mean_degree, Adjacency, DistanceVector,
    GeometricGraph, RegularGraph, Topology,
};
pub use oracle::{DistanceOracle, Phase, QueryCounts};
pub use simple::{
    candidates, nonedge_detection, phase1, phase2, reconstruct, select_seeds, CandidateSet,
    NonEdgeReport, ReconstructionResult, SeedKind, SeedStrategy, SeedTable,
};
