//! Normalized solutions of semilinear elliptic problems.
//!
//! Finds pairs `(u, lambda)` with `-Δu = lambda u + f(u)` on a box domain, subject to
//! `∫ u² = mu`, under Dirichlet, shifted Neumann or Robin boundary conditions with an
//! optional nonlinear boundary flux. Critical points are obtained by continuation of a
//! penalized energy `E_{r,mu}` in the exponent `r`, and a set of explicit mass thresholds
//! is computed alongside so that a run can be checked against the existence theory.

// Negated comparisons are how NaN inputs get rejected; index loops mirror the banded
// factorization they implement.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod certificates;
pub mod functionals;
pub mod linalg;
pub mod mesh;
pub mod scan;
pub mod solver;
pub mod spectra;

pub use functionals::{NonlinearitySpec, PenalizedProblem, PowerTerm, Tolerances};
pub use mesh::{BoundaryMode, Discretization, DomainKind, DomainSpec, ModeSpace};
