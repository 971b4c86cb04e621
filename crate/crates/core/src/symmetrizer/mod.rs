//! Positive definite symmetrizers `S` with `A^T S = S A`.
//!
//! Three constructions live here: graph propagation for axisymmetric
//! structure matrices, the closed form for diagonal-plus-rank-one matrices,
//! and the eigenbasis family `S = V^{-T} Z V^{-1}`.

mod axisymmetric;
mod eigenbasis;
mod rank_one;

pub use axisymmetric::{
    build_coordinate_graph, gershgorin_intervals, solve_diagonal_symmetrizer,
    solve_diagonal_symmetrizer_with, AxisymmetricMatrix, CoordinateGraph, GershgorinReport,
    SeedRule, SolveOptions, Traversal, DEFAULT_CONNECTION_TOL,
};
pub use eigenbasis::symmetrizer_from_eigenbasis;
pub use rank_one::{char_poly_rank_one, rank_one_matrix, rank_one_symmetrizer};
pub(crate) use rank_one::check_hypotheses as check_rank_one_hypotheses;

use crate::matrix::DenseMatrix;

/// Positive diagonal symmetrizer with its certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalSymmetrizer {
    pub s: Vec<f64>,
    /// `||A^T S - S A||_F` evaluated on the dense matrix.
    pub residual: f64,
    /// Largest relative violation over the connection equations that were
    /// checked but not used for propagation.
    pub consistency_violation: f64,
}

impl DiagonalSymmetrizer {
    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_diag(&self.s)
    }
}
