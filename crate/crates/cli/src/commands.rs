use crate::artifacts::{write_json, write_solution, write_trace};
use crate::config::RunConfig;
use anyhow::{anyhow, Context};
use normcrit::certificates::{
    certificate_report, estimate_gn_constant, pohozaev_residual, required_lambda1, threshold_mu_doublestar,
    threshold_mu_star, verify_solution, CertificateReport, GnEstimate, GnKind, ReportInputs, TaggedConstant, Verdict,
};
use normcrit::functionals::{hypothesis_check, Role};
use normcrit::mesh::{assemble, build_domain};
use normcrit::scan::scan_mu;
use normcrit::solver::{continue_in_r, multiplicity, sign_changes, ContinuationRun, CriticalPointRecord, SolverError};
use normcrit::spectra::{fountain_frame, lambda_tilde, solve_eigs, SpectraError, Spectrum};
use normcrit::{BoundaryMode, Discretization, ModeSpace, NonlinearitySpec, PenalizedProblem};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Why a subcommand did not succeed; decides the exit code.
#[derive(Debug)]
pub enum Failure {
    /// Configuration rejected before any computation (exit 2).
    Config(anyhow::Error),
    /// A computation failed or a verdict did not pass (exit 1).
    Run(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Run(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(e) => write!(f, "invalid configuration: {e:#}"),
            Self::Run(e) => write!(f, "run failed: {e:#}"),
        }
    }
}

fn config_err(e: anyhow::Error) -> Failure {
    Failure::Config(e)
}

fn run_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Run(e.into())
}

pub struct RunContext {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub seed: u64,
    pub jobs: usize,
}

/// Discretization, mode operators, spectrum and nonlinearities shared by the commands.
struct Setup {
    disc: Discretization,
    space: Arc<ModeSpace>,
    spectrum: Spectrum,
    f: NonlinearitySpec,
    g: Option<NonlinearitySpec>,
}

impl Setup {
    fn new(cfg: &RunConfig, count: usize) -> Result<Self, Failure> {
        let (dom, mode, fblock) = cfg.require_problem().map_err(config_err)?;
        let f = fblock.build(Role::Interior).map_err(config_err)?;
        let g = cfg.g.as_ref().map(|g| g.build(Role::Boundary)).transpose().map_err(config_err)?;
        let domain = build_domain(dom.kind(), dom.star_center()).map_err(|e| config_err(e.into()))?;
        let disc = assemble(&domain, cfg.mesh.n).map_err(|e| config_err(e.into()))?;
        let space = Arc::new(ModeSpace::new(&disc, mode));
        let spectrum = solve_eigs(&space, count.min(space.len())).map_err(run_err)?;
        Ok(Self { disc, space, spectrum, f, g })
    }

    fn mode(&self) -> BoundaryMode {
        self.space.mode()
    }

    fn problem(&self, cfg: &RunConfig, mu: f64) -> Result<PenalizedProblem, Failure> {
        let tol = cfg.tolerances.with_lambda_ref(self.spectrum.lambda(1));
        let p = PenalizedProblem::new(self.space.clone(), self.f.clone(), self.g.clone(), mu, cfg.schedule.r0)
            .map_err(|e| config_err(e.into()))?;
        Ok(p.with_tolerances(tol))
    }

    /// Interpolation-constant estimates for the constants the mode's thresholds need.
    fn gn_estimates(&self, cfg: &RunConfig, seed: u64) -> Result<Vec<GnEstimate>, Failure> {
        let block = cfg.certificate;
        let gn_disc;
        let disc = match block.gn_n {
            Some(n) if n != self.disc.elements_per_axis() => {
                gn_disc = assemble(self.disc.domain(), n).map_err(|e| config_err(e.into()))?;
                &gn_disc
            }
            _ => &self.disc,
        };
        let mut wanted = vec![(
            match self.mode() {
                BoundaryMode::Dirichlet => GnKind::Dirichlet,
                BoundaryMode::Neumann => GnKind::Neumann,
                BoundaryMode::Robin => GnKind::RobinInterior,
            },
            self.f.certificate().p,
            block.c,
        )];
        if let Some(g) = &self.g {
            if !g.is_zero() {
                wanted.push((GnKind::RobinTrace, g.certificate().p, block.c_trace));
            }
        }
        let mut out = Vec::new();
        for (kind, p, given) in wanted {
            if let Some(c) = given {
                let beta = self.disc.dim() as f64 * (0.5 - 1.0 / p);
                out.push(GnEstimate {
                    kind,
                    p,
                    beta,
                    constant: c,
                    bound: "USER_SUPPLIED".into(),
                    elements_per_axis: 0,
                    starts: 0,
                    maximizer: Vec::new(),
                });
                continue;
            }
            match estimate_gn_constant(disc, p, kind, seed) {
                Ok(e) => out.push(e),
                Err(e) => log::warn!("no {kind:?} constant for p = {p}: {e}"),
            }
        }
        Ok(out)
    }

    fn certificate(&self, cfg: &RunConfig, seed: u64, mu: Option<f64>) -> Result<CertificateReport, Failure> {
        let mode = self.mode();
        let dim = self.disc.dim();
        let l1 = self.spectrum.lambda(1);
        let tilde = match mode {
            BoundaryMode::Robin => Some(lambda_tilde(&self.disc).map_err(run_err)?),
            _ => None,
        };
        let flags = hypothesis_check(&self.f, self.g.as_ref(), l1, tilde, mode, dim);
        Ok(certificate_report(&ReportInputs {
            dim,
            mode,
            lambda1: (mode == BoundaryMode::Dirichlet).then_some(l1),
            lambda_hat: (mode == BoundaryMode::Robin).then_some(l1),
            lambda_tilde: tilde,
            f: self.f.certificate(),
            g: self.g.as_ref().map(NonlinearitySpec::certificate),
            gn: self.gn_estimates(cfg, seed)?,
            mu,
            flags: Some(flags),
        }))
    }
}

/// Verdict plus the diagnostics that only apply to some records.
#[derive(Serialize)]
struct CheckedRecord {
    id: usize,
    seed_id: usize,
    verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    sign_changes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pohozaev_residual: Option<f64>,
}

fn check(setup: &Setup, prob: &PenalizedProblem, id: usize, rec: &CriticalPointRecord) -> CheckedRecord {
    let odd = prob.f().is_odd();
    let pohozaev = (setup.mode() == BoundaryMode::Dirichlet && setup.disc.dim() >= 2)
        .then(|| pohozaev_residual(rec, prob, &setup.disc, None).ok())
        .flatten();
    CheckedRecord {
        id,
        seed_id: rec.seed_id,
        verdict: verify_solution(rec, prob, &setup.spectrum),
        sign_changes: odd.then(|| sign_changes(&setup.disc, &setup.space, &rec.u)),
        pohozaev_residual: pohozaev,
    }
}

/// Writes records, verdicts, trace and per-solution files; returns whether every verdict passed.
fn emit_runs(out: &Path, setup: &Setup, prob: &PenalizedProblem, runs: &[ContinuationRun]) -> Result<bool, Failure> {
    let records: Vec<&CriticalPointRecord> = runs.iter().map(|r| &r.record).collect();
    write_json(out, "records.json", &records).map_err(run_err)?;
    let checked: Vec<CheckedRecord> =
        records.iter().enumerate().map(|(i, rec)| check(setup, prob, i + 1, rec)).collect();
    write_json(out, "verdicts.json", &checked).map_err(run_err)?;
    let trace: Vec<(usize, &[_])> = runs.iter().enumerate().map(|(i, r)| (i + 1, r.stages.as_slice())).collect();
    write_trace(out, &trace).map_err(run_err)?;
    for (i, rec) in records.iter().enumerate() {
        write_solution(out, i + 1, &setup.disc, &setup.space, &rec.u).map_err(run_err)?;
    }
    for c in &checked {
        println!(
            "solution {}: lambda = {:.12e}, mass error = {:.3e}, residual = {:.3e}, {}",
            c.id,
            c.verdict.lambda_pde,
            c.verdict.mass_error,
            c.verdict.pde_residual,
            if c.verdict.pass { "PASS" } else { "FAIL" }
        );
    }
    Ok(checked.iter().all(|c| c.verdict.pass))
}

fn write_certificate(ctx: &RunContext, setup: &Setup, mu: Option<f64>) -> Result<Option<CertificateReport>, Failure> {
    if ctx.cfg.certificate.skip {
        return Ok(None);
    }
    let report = setup.certificate(&ctx.cfg, ctx.seed, mu)?;
    write_json(&ctx.out, "certificate.json", &report).map_err(run_err)?;
    Ok(Some(report))
}

pub fn solve(ctx: &RunContext) -> Result<(), Failure> {
    let mu = ctx.cfg.require_mu().map_err(config_err)?;
    let setup = Setup::new(&ctx.cfg, ctx.cfg.eigs.count)?;
    let prob = setup.problem(&ctx.cfg, mu)?;
    write_certificate(ctx, &setup, Some(mu))?;
    let run = continue_in_r(&prob, &ctx.cfg.schedule, setup.spectrum.vector(1), 1).map_err(run_err)?;
    if emit_runs(&ctx.out, &setup, &prob, std::slice::from_ref(&run))? {
        Ok(())
    } else {
        Err(run_err(anyhow!("verification failed")))
    }
}

pub fn multiplicity_cmd(ctx: &RunContext) -> Result<(), Failure> {
    let mu = ctx.cfg.require_mu().map_err(config_err)?;
    let block = ctx.cfg.multiplicity.ok_or_else(|| config_err(anyhow!("multiplicity needs a [multiplicity] block")))?;
    let setup = Setup::new(&ctx.cfg, ctx.cfg.eigs.count.max(3 * block.m + 2))?;
    let prob = setup.problem(&ctx.cfg, mu)?;
    let mut frames = Vec::new();
    // Two spare frames beyond the m - 1 needed, for seeds that fail or repeat.
    let mut j = 2;
    while frames.len() < block.m + 1 && j <= setup.spectrum.len() {
        match fountain_frame(&setup.spectrum, j, mu, block.k_tune) {
            Ok(f) => frames.push(f),
            Err(SpectraError::NonDistinctEigenvalue { .. }) => {}
            Err(e) => return Err(run_err(e)),
        }
        j += 1;
    }
    write_certificate(ctx, &setup, Some(mu))?;
    let runs = match multiplicity(&prob, &setup.spectrum, block.m, &frames, &ctx.cfg.schedule) {
        Ok(runs) => runs,
        Err(SolverError::FoundFewer { wanted, found }) => {
            emit_runs(&ctx.out, &setup, &prob, &found)?;
            return Err(run_err(anyhow!("found {} of {wanted} distinct solutions", found.len())));
        }
        Err(e) => return Err(run_err(e)),
    };
    if emit_runs(&ctx.out, &setup, &prob, &runs)? {
        Ok(())
    } else {
        Err(run_err(anyhow!("verification failed")))
    }
}

pub fn verify(ctx: &RunContext) -> Result<(), Failure> {
    let mu = ctx.cfg.require_mu().map_err(config_err)?;
    let path = ctx.out.join("records.json");
    let text =
        std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display())).map_err(run_err)?;
    let records: Vec<CriticalPointRecord> = serde_json::from_str(&text).map_err(run_err)?;
    let setup = Setup::new(&ctx.cfg, ctx.cfg.eigs.count.max(records.iter().map(|r| r.seed_id).max().unwrap_or(1)))?;
    let prob = setup.problem(&ctx.cfg, mu)?;
    let mut checked = Vec::new();
    for (i, rec) in records.iter().enumerate() {
        if rec.u.len() != setup.space.len() {
            return Err(run_err(anyhow!(
                "record {} has {} values but the configured space has {}",
                i + 1,
                rec.u.len(),
                setup.space.len()
            )));
        }
        checked.push(check(&setup, &prob, i + 1, rec));
    }
    write_json(&ctx.out, "verdicts.json", &checked).map_err(run_err)?;
    for c in &checked {
        println!("solution {}: {}", c.id, if c.verdict.pass { "PASS" } else { "FAIL" });
    }
    if checked.iter().all(|c| c.verdict.pass) {
        Ok(())
    } else {
        Err(run_err(anyhow!("verification failed")))
    }
}

#[derive(Serialize)]
struct SpectrumExport {
    mode: BoundaryMode,
    elements_per_axis: usize,
    eigenvalues: Vec<f64>,
    distinct: Vec<normcrit::spectra::DistinctEigenvalue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_tilde: Option<f64>,
}

pub fn eigs(ctx: &RunContext) -> Result<(), Failure> {
    let setup = Setup::new(&ctx.cfg, ctx.cfg.eigs.count)?;
    let tilde = match setup.mode() {
        BoundaryMode::Robin => Some(lambda_tilde(&setup.disc).map_err(run_err)?),
        _ => None,
    };
    let export = SpectrumExport {
        mode: setup.mode(),
        elements_per_axis: setup.disc.elements_per_axis(),
        eigenvalues: setup.spectrum.pairs.iter().map(|p| p.lambda).collect(),
        distinct: setup.spectrum.distinct(),
        lambda_tilde: tilde,
    };
    for (k, l) in export.eigenvalues.iter().enumerate() {
        println!("lambda_{} = {l:.12e}", k + 1);
    }
    write_json(&ctx.out, "spectrum.json", &export).map_err(run_err)
}

pub fn thresholds(ctx: &RunContext) -> Result<(), Failure> {
    let Some(block) = ctx.cfg.thresholds else {
        let mu = ctx.cfg.mu;
        let setup = Setup::new(&ctx.cfg, 1)?;
        let report = setup.certificate(&ctx.cfg, ctx.seed, mu)?;
        print_constants(&report.constants);
        return write_json(&ctx.out, "certificate.json", &report).map_err(run_err);
    };
    let mut constants = Vec::new();
    if let Some(i) = block.mu_star {
        constants.push(TaggedConstant::new("mu_star", "mu_star: explicit inputs", false, threshold_mu_star(&i)));
    }
    if let Some(i) = block.mu_doublestar {
        constants.push(TaggedConstant::new(
            "mu_doublestar",
            "Robin threshold: explicit inputs",
            false,
            threshold_mu_doublestar(&i),
        ));
    }
    if let Some(i) = block.lambda_star {
        constants.push(TaggedConstant::new(
            "lambda_star",
            "required first eigenvalue: explicit inputs",
            false,
            required_lambda1(i.mu, i.p, i.q, i.dim, i.c, i.variant),
        ));
    }
    if constants.is_empty() {
        return Err(config_err(anyhow!("[thresholds] requests nothing")));
    }
    print_constants(&constants);
    let report = CertificateReport { constants, gn: Vec::new(), flags: None };
    write_json(&ctx.out, "certificate.json", &report).map_err(run_err)?;
    if let Some(c) = report.constants.iter().find(|c| c.value.is_none()) {
        bail_run(&format!("{} could not be computed", c.name))
    } else {
        Ok(())
    }
}

fn bail_run(msg: &str) -> Result<(), Failure> {
    Err(run_err(anyhow!("{msg}")))
}

fn print_constants(constants: &[TaggedConstant]) {
    for c in constants {
        match c.value {
            Some(v) => println!("{} = {v:.15e} ({}, {})", c.name, c.anchor, c.basis),
            None => println!("{} not available: {}", c.name, c.note.as_deref().unwrap_or("")),
        }
    }
}

pub fn scan(ctx: &RunContext) -> Result<(), Failure> {
    let grid = ctx.cfg.mu_scan.ok_or_else(|| config_err(anyhow!("scan-mu needs a [mu-scan] block")))?;
    grid.validate().map_err(|e| config_err(e.into()))?;
    let setup = Setup::new(&ctx.cfg, ctx.cfg.eigs.count)?;
    let template = setup.problem(&ctx.cfg, grid.from)?;
    let cert = write_certificate(ctx, &setup, None)?;
    let mu_star = cert.and_then(|c| c.get("mu_star").or_else(|| c.get("mu_doublestar")));
    let table = scan_mu(&template, setup.spectrum.vector(1), &grid, &ctx.cfg.schedule, mu_star, ctx.jobs)
        .map_err(|e| config_err(e.into()))?;

    let mut w = csv::Writer::from_path(ctx.out.join("scan.csv")).map_err(run_err)?;
    w.write_record(["mu", "converged", "lambda", "energy", "mass_error", "case"]).map_err(run_err)?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
    for r in &table.rows {
        let case = r.case.map_or_else(|| "Failed".to_string(), |c| format!("{c:?}"));
        w.write_record([
            r.mu.to_string(),
            r.converged.to_string(),
            opt(r.lambda),
            opt(r.energy),
            opt(r.mass_error),
            case,
        ])
        .map_err(run_err)?;
    }
    w.flush().map_err(run_err)?;
    write_json(&ctx.out, "scan.json", &table).map_err(run_err)?;
    println!("{}", table.summary_line());
    Ok(())
}

/// Creates the output directory; a failure here is a configuration problem.
pub fn prepare_out(out: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display())).map_err(config_err)?;
    Ok(())
}
