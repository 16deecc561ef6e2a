//! Cross-module invariants: spectra, continuation runs, the shift construction and the
//! geometry of the penalized energy.

mod common;

use normcrit::certificates::{threshold_mu_star, MuStarInput};
use normcrit::functionals::{energy, penalty, NonlinearitySpec, Role};
use normcrit::linalg::{dot, sub};
use normcrit::mesh::{assemble, build_domain};
use normcrit::solver::{continue_in_r, multiplicity, ContinuationSchedule};
use normcrit::spectra::{fountain_frame, solve_eigs};
use normcrit::{BoundaryMode, Discretization, DomainKind, ModeSpace, PenalizedProblem, Tolerances};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;

fn interval(n: usize) -> Discretization {
    assemble(&build_domain(DomainKind::Interval { a: 0.0, b: 1.0 }, None).unwrap(), n).unwrap()
}

fn cubic_problem(disc: &Discretization, mode: BoundaryMode, mu: f64) -> (PenalizedProblem, Vec<f64>) {
    let space = Arc::new(ModeSpace::new(disc, mode));
    let s = solve_eigs(&space, 1).unwrap();
    let f = NonlinearitySpec::single(1.0, 4.0, Role::Interior).unwrap();
    let tol = Tolerances::default().with_lambda_ref(s.lambda(1));
    (PenalizedProblem::new(space, f, None, mu, 2.0).unwrap().with_tolerances(tol), s.vector(1).to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn eigenpairs_are_m_orthonormal(lx in 0.5f64..2.0, ly in 0.5f64..2.0, mode in 0usize..3) {
        let mode = [BoundaryMode::Dirichlet, BoundaryMode::Neumann, BoundaryMode::Robin][mode];
        let d = build_domain(DomainKind::Rectangle { ax: 0.0, bx: lx, ay: 0.0, by: ly }, None).unwrap();
        let space = ModeSpace::new(&assemble(&d, 12).unwrap(), mode);
        let s = solve_eigs(&space, 5).unwrap();
        for i in 1..=5 {
            let vi = s.vector(i);
            let mvi = space.m().mul_vec(vi);
            let resid = sub(&space.apply_a(vi), &mvi.iter().map(|x| s.lambda(i) * x).collect::<Vec<_>>());
            prop_assert!(dot(&resid, &resid).sqrt() <= 1e-9 * s.lambda(i).max(1.0) * dot(vi, vi).sqrt());
            for j in 1..=5 {
                let g = dot(s.vector(j), &mvi);
                prop_assert!((g - if i == j { 1.0 } else { 0.0 }).abs() <= 1e-9, "({i},{j}): {g}");
            }
        }
    }

    #[test]
    fn mu_star_monotone_on_subcritical_branch(
        lambda1 in 0.5f64..50.0,
        kp in 0.1f64..5.0,
        c in 0.1f64..3.0,
        p in 2.1f64..6.0,
    ) {
        // p ≤ 2 + 4/N with N = 1.
        let base = MuStarInput { k2: 0.0, kp, p, q: p, lambda1, dim: 1, m: 0.5 * lambda1, c };
        let mu = threshold_mu_star(&base).unwrap();
        let wider = threshold_mu_star(&MuStarInput { lambda1: lambda1 * 1.05, m: 0.5 * lambda1 * 1.05, ..base }).unwrap();
        let steeper = threshold_mu_star(&MuStarInput { kp: kp * 1.05, ..base }).unwrap();
        prop_assert!(wider > mu, "{} vs {}", wider, mu);
        prop_assert!(steeper < mu, "{} vs {}", steeper, mu);
    }
}

#[test]
fn eigenvalues_converge_at_second_order() {
    let (coarse, fine) = (
        solve_eigs(&ModeSpace::new(&interval(64), BoundaryMode::Dirichlet), 4).unwrap(),
        solve_eigs(&ModeSpace::new(&interval(128), BoundaryMode::Dirichlet), 4).unwrap(),
    );
    for k in 1..=4 {
        let exact = (k as f64 * PI).powi(2);
        let order = ((coarse.lambda(k) - exact) / (fine.lambda(k) - exact)).log2();
        assert!((order - 2.0).abs() <= 0.3, "k = {k}: order {order}");
    }
}

#[test]
fn robin_eigenvalue_grows_with_boundary_weight() {
    // On the scaled domain LΩ (same n), stiffness, boundary mass and mass scale by
    // L^{N-2}, L^{N-1} and L^N. So L²·λ̂(LΩ) is λ̂ on Ω with the boundary form
    // multiplied by L, exactly, also after discretization.
    for kind in [DomainKind::Interval { a: 0.0, b: 1.0 }, DomainKind::Rectangle { ax: 0.0, bx: 1.0, ay: 0.0, by: 2.0 }]
    {
        let d = build_domain(kind, None).unwrap();
        let lhat = |dom: &normcrit::mesh::DomainSpec| {
            solve_eigs(&ModeSpace::new(&assemble(dom, 24).unwrap(), BoundaryMode::Robin), 1).unwrap().lambda(1)
        };
        let plain = lhat(&d);
        let doubled = 4.0 * lhat(&d.scaled(2.0).unwrap());
        assert!(plain > 0.0 && doubled > plain, "{kind:?}: {plain} vs {doubled}");
    }
}

#[test]
fn multiplier_identity_holds_at_every_stage() {
    let (p, seed) = cubic_problem(&interval(128), BoundaryMode::Dirichlet, 0.05);
    let run = continue_in_r(&p, &ContinuationSchedule::default(), &seed, 1).unwrap();
    assert!(run.stages.len() > 3);
    for st in &run.stages {
        let expected = 2.0 / p.mu() * penalty(st.mass / p.mu(), st.r).unwrap().df;
        assert!((st.lambda - expected).abs() <= 1e-12 * expected, "r = {}: {} vs {expected}", st.r, st.lambda);
    }
}

#[test]
fn opposite_seed_gives_opposite_solution() {
    let (p, seed) = cubic_problem(&interval(128), BoundaryMode::Dirichlet, 0.05);
    let sched = ContinuationSchedule::default();
    let plus = continue_in_r(&p, &sched, &seed, 1).unwrap().record;
    let neg: Vec<f64> = seed.iter().map(|x| -x).collect();
    let minus = continue_in_r(&p, &sched, &neg, 1).unwrap().record;
    let sum: Vec<f64> = plus.u.iter().zip(&minus.u).map(|(a, b)| a + b).collect();
    assert!(p.mass_of(&sum).sqrt() <= 1e-10 * p.mu().sqrt());
    assert!((plus.lambda_pde - minus.lambda_pde).abs() <= 1e-12 * plus.lambda_pde);
    assert!((plus.energy_unpenalized - minus.energy_unpenalized).abs() <= 1e-12 * plus.energy_unpenalized.abs());
}

#[test]
fn existence_run_is_mesh_robust() {
    let mut lambdas = Vec::new();
    let mut energies = Vec::new();
    for n in [128, 256, 512] {
        let (p, seed) = cubic_problem(&interval(n), BoundaryMode::Dirichlet, 0.05);
        let rec = continue_in_r(&p, &ContinuationSchedule::default(), &seed, 1).unwrap().record;
        lambdas.push(rec.lambda_pde);
        energies.push(rec.energy_unpenalized);
    }
    let oracle = common::LAMBDA_AT_0_05;
    let lambda_order = ((lambdas[1] - oracle) / (lambdas[2] - oracle)).abs().log2();
    let energy_order = ((energies[0] - energies[1]) / (energies[1] - energies[2])).abs().log2();
    assert!(lambda_order >= 1.7, "lambda order {lambda_order}");
    assert!(energy_order >= 1.7, "energy order {energy_order}");
}

#[test]
fn quadratic_shift_moves_only_the_multiplier() {
    let (p, seed) = cubic_problem(&interval(128), BoundaryMode::Dirichlet, 0.05);
    let sched = ContinuationSchedule::default();
    let s = 3.0;
    let plain = continue_in_r(&p, &sched, &seed, 1).unwrap().record;
    let shifted = continue_in_r(&p.clone().with_shift(s), &sched, &seed, 1).unwrap().record;
    assert!(p.mass_of(&sub(&plain.u, &shifted.u)).sqrt() <= 1e-8 * p.mu().sqrt());
    assert!((shifted.lambda - plain.lambda - s).abs() <= 1e-9);
    assert!((shifted.lambda_pde - plain.lambda_pde).abs() <= 1e-9);
}

#[test]
fn penalized_energy_has_mountain_pass_geometry() {
    let (p, _) = cubic_problem(&interval(128), BoundaryMode::Dirichlet, 0.05);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    // Positive on a small sphere in every sampled direction.
    let rho = (0.01 * p.mu()).sqrt();
    for _ in 0..200 {
        let d: Vec<f64> = (0..p.space().len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let scale = rho / p.mass_of(&d).sqrt();
        let u: Vec<f64> = d.iter().map(|x| x * scale).collect();
        assert!(energy(&p, &u).total_penalized > 0.0);
    }
    // Unbounded below along a ray toward the mass wall.
    let profile: Vec<f64> = (1..128).map(|i| (PI * i as f64 / 128.0).sin()).collect();
    let scale = (p.mu() / p.mass_of(&profile)).sqrt();
    let ray = |t: f64| energy(&p, &profile.iter().map(|x| t * scale * x).collect::<Vec<_>>()).total_penalized;
    let levels: Vec<f64> = [0.9, 0.99, 0.999, 0.9999, 0.99999].iter().map(|&t| ray(t)).collect();
    assert!(levels.windows(2).all(|w| w[1] < w[0]), "{levels:?}");
    assert!(levels[4] < -1e3);
    assert_eq!(ray(1.001), f64::INFINITY);
}

#[test]
fn deflated_solutions_respect_the_fountain_energy_bound() {
    let d = build_domain(DomainKind::Rectangle { ax: -1.0, bx: 1.0, ay: -1.0, by: 1.0 }, None).unwrap();
    let (p, _) = cubic_problem(&assemble(&d, 24).unwrap(), BoundaryMode::Dirichlet, 0.05);
    let s = solve_eigs(&Arc::new(ModeSpace::new(&assemble(&d, 24).unwrap(), BoundaryMode::Dirichlet)), 8).unwrap();
    let frames: Vec<_> = [2, 4, 5].iter().map(|&j| fountain_frame(&s, j, p.mu(), 2.0).unwrap()).collect();
    let runs = multiplicity(&p, &s, 3, &frames, &ContinuationSchedule::default()).unwrap();
    for run in &runs {
        let rec = &run.record;
        let bound = p.mu() * s.lambda(rec.seed_id) / 2.0;
        assert!(rec.energy_unpenalized <= bound + 1e-9, "seed {}: {} > {bound}", rec.seed_id, rec.energy_unpenalized);
    }
}
