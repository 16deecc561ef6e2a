//! Solves over a grid of masses and summarizes where the constraint is attained.

use crate::functionals::PenalizedProblem;
use crate::solver::{continue_in_r, ContinuationSchedule, SolutionCase};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("mu grid has no points")]
    EmptyGrid,
    #[error("invalid mu grid: {0}")]
    InvalidGrid(String),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// `steps` masses from `from` to `to` inclusive, spaced linearly or logarithmically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuGrid {
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    #[serde(default)]
    pub log: bool,
}

impl MuGrid {
    pub fn validate(&self) -> Result<(), ScanError> {
        if self.steps == 0 {
            return Err(ScanError::EmptyGrid);
        }
        if !(self.from > 0.0 && self.to > 0.0) || !self.from.is_finite() || !self.to.is_finite() {
            return Err(ScanError::InvalidGrid(format!(
                "bounds must be positive and finite, got {} and {}",
                self.from, self.to
            )));
        }
        if self.from > self.to {
            return Err(ScanError::InvalidGrid(format!("from = {} exceeds to = {}", self.from, self.to)));
        }
        Ok(())
    }

    pub fn points(&self) -> Result<Vec<f64>, ScanError> {
        self.validate()?;
        if self.steps == 1 {
            return Ok(vec![self.from]);
        }
        let last = (self.steps - 1) as f64;
        let mut pts: Vec<f64> = (0..self.steps)
            .map(|i| {
                let t = i as f64 / last;
                if self.log {
                    self.from * (self.to / self.from).powf(t)
                } else {
                    self.from + t * (self.to - self.from)
                }
            })
            .collect();
        pts[self.steps - 1] = self.to;
        Ok(pts)
    }
}

/// One grid point. The numeric fields are absent when the solve failed; `error` then
/// holds the reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub index: usize,
    pub mu: f64,
    pub converged: bool,
    pub lambda: Option<f64>,
    pub energy: Option<f64>,
    pub mass_error: Option<f64>,
    pub case: Option<SolutionCase>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
    /// Largest grid mass whose run ended with the constraint attained.
    pub largest_mass_attained: Option<f64>,
    pub certificate_mu_star: Option<f64>,
    /// Every grid point strictly below `certificate_mu_star` attained its mass.
    pub attained_below_certificate: Option<bool>,
}

impl ScanTable {
    pub fn summary_line(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or("none".to_string(), |v| format!("{v:e}"));
        format!(
            "largest mu with MassAttained: {}; certificate mu_star: {}",
            fmt(self.largest_mass_attained),
            fmt(self.certificate_mu_star)
        )
    }
}

/// Runs one continuation per grid mass, seeded along `seed`, on at most `jobs` threads.
///
/// Rows are independent and deterministic, so the table does not depend on `jobs`.
pub fn scan_mu(
    template: &PenalizedProblem,
    seed: &[f64],
    grid: &MuGrid,
    schedule: &ContinuationSchedule,
    certificate_mu_star: Option<f64>,
    jobs: usize,
) -> Result<ScanTable, ScanError> {
    let points = grid.points()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| ScanError::ThreadPool(e.to_string()))?;
    let rows: Vec<ScanRow> = pool.install(|| {
        points.par_iter().enumerate().map(|(index, &mu)| solve_row(template, seed, schedule, index, mu)).collect()
    });

    let attained = |r: &&ScanRow| r.case == Some(SolutionCase::MassAttained);
    let largest_mass_attained = rows.iter().filter(attained).map(|r| r.mu).reduce(f64::max);
    let attained_below_certificate =
        certificate_mu_star.map(|c| rows.iter().filter(|r| r.mu < c).all(|r| attained(&r)));
    Ok(ScanTable { rows, largest_mass_attained, certificate_mu_star, attained_below_certificate })
}

fn solve_row(
    template: &PenalizedProblem,
    seed: &[f64],
    schedule: &ContinuationSchedule,
    index: usize,
    mu: f64,
) -> ScanRow {
    let outcome = template
        .with_mu(mu)
        .map_err(|e| e.to_string())
        .and_then(|p| continue_in_r(&p, schedule, seed, 1).map(|run| run.record).map_err(|e| e.to_string()));
    match outcome {
        Ok(rec) => ScanRow {
            index,
            mu,
            converged: rec.case != SolutionCase::NoConverge,
            lambda: Some(rec.lambda_pde),
            energy: Some(rec.energy_unpenalized),
            mass_error: Some((rec.mass - mu).abs()),
            case: Some(rec.case),
            error: None,
        },
        Err(e) => ScanRow {
            index,
            mu,
            converged: false,
            lambda: None,
            energy: None,
            mass_error: None,
            case: None,
            error: Some(e),
        },
    }
}
