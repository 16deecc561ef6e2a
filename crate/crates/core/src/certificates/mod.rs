//! Closed-form thresholds, Gagliardo–Nirenberg constant estimates and checks of
//! solution records against the identities they must satisfy.
//!
//! Every threshold takes its constants explicitly. Where a constant is only known
//! numerically (the interpolation constants) the estimate is a discrete supremum and so
//! a lower bound of the true value; thresholds computed from it are tagged as
//! estimate-based in the report.

mod gn;
mod ground_state;
mod mu0;
mod pohozaev;
mod report;
mod thresholds;
mod verify;

pub use gn::{estimate_gn_constant, gn_ratio, GnEstimate, GnKind};
pub use ground_state::{ground_state_report, GroundStateReport};
pub use mu0::{exclusion_bound, threshold_mu0_scan, ExclusionBound, Mu0Report, Mu0Solution};
pub use pohozaev::pohozaev_residual;
pub use report::{certificate_report, CertificateReport, ReportInputs, TaggedConstant};
pub use thresholds::{
    required_lambda1, shift_printed, threshold_mu_doublestar, threshold_mu_star, threshold_mu_star_shifted,
    threshold_mu_star_theorem, Lambda1Variant, MuDoubleStarInput, MuStarInput,
};
pub use verify::{verify_solution, Verdict};

use crate::linalg::LinalgError;
use crate::mesh::BoundaryMode;
use crate::spectra::SpectraError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CertificateError {
    #[error("exponent {p} outside the admissible range [{lo}, {hi})")]
    ExponentOutOfRange { p: f64, lo: f64, hi: f64 },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("no nontrivial solution of the zero-multiplier equation was found")]
    NoSolutionsFound,
    #[error("empty record set")]
    EmptyRecordSet,
    #[error("operation not available in {0:?} mode")]
    ModeUnsupported(BoundaryMode),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
