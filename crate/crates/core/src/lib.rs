//! Heat kernels, intrinsic metrics and Gaussian upper bounds on weighted graphs.
//!
//! A weighted graph `(X, b, m)` carries a symmetric edge weight `b` and a
//! vertex measure `m`; its Laplacian is
//! `Δf(x) = (1/m(x)) Σ_y b(x,y) (f(x) − f(y))` and the heat kernel is the
//! integral kernel of `e^{−tΔ}` with respect to `m`. This crate builds such
//! graphs, computes kernels and metrics, evaluates the right-hand sides of
//! the classical upper bounds in log-domain, and checks one against the other.
//!
//! The crate is `no_std` with `alloc`; file formats, the CLI and the thread
//! pool live in the companion `heatlab` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bounds;
pub mod error;
pub mod exec;
pub mod graph;
pub mod heat;
pub mod laplacian;
pub mod linalg;
pub mod metric;
pub mod solver;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{build_graph, Edge, EdgeSpec, Graph, VertexId, VertexSet, VertexSpec};
pub use metric::{MetricKind, PseudoMetric};
