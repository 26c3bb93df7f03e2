//! Differential invariants, abelian relations and rank of planar webs.
pub mod abel;
pub mod covariant;
pub mod error;
pub mod expr;
pub mod fixtures;
pub mod obstruction;
pub mod projective;
pub mod rank;
pub mod web;

pub use error::{Result, WebError};
pub use expr::{parse, Expr, SampleBox, SampleConfig, Var};
pub use web::{ChartedWeb, Dir, WebSpec};
