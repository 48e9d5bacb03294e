//! Exact engine, solver and reduction compilers for Cops-and-Robber and its
//! variant with protected edges.

pub mod error;
pub mod evader;
pub mod game;
pub mod graph;
pub mod qbf;
pub mod reductions;
pub mod solver;
pub mod strategies;
pub mod suites;

pub use error::{Error, Result};
pub use game::{GameSpec, Move, Position, Side, Start, Step, Variant};
pub use graph::{Label, LabelledGraph, VertexId};
pub use qbf::Qbf;
