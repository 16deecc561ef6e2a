use super::continuation::{run, ContinuationRun, ContinuationSchedule};
use super::SolverError;
use crate::functionals::PenalizedProblem;
use crate::linalg::{add, dot, sub};
use crate::mesh::{Discretization, ModeSpace};
use crate::spectra::{FountainFrame, Spectrum};

/// Deflated search for `m` distinct solution pairs `±u`.
///
/// The first run is seeded along `φ₁`, later runs along the frames in order with the
/// amplitude capped by the frame's `ξ` radius. Each frame offers the candidates of
/// [`cluster_seeds`]. Every run is deflated against the solutions already found, stage
/// by stage. Runs that fail or land within `tol.distinct · √mu` of a known `±u` are
/// dropped and the next candidate is tried; frames beyond the first `m - 1` serve as
/// spares. If fewer than `m` solutions result, the error carries the runs that were
/// found.
pub fn multiplicity(
    prob: &PenalizedProblem,
    spectrum: &Spectrum,
    m: usize,
    frames: &[FountainFrame],
    schedule: &ContinuationSchedule,
) -> Result<Vec<ContinuationRun>, SolverError> {
    if !prob.f().is_odd() || prob.g().is_some_and(|g| !g.is_odd()) {
        return Err(SolverError::NonOddNonlinearity);
    }
    if m == 0 || frames.len() + 1 < m {
        return Err(SolverError::InvalidSchedule(format!("{m} solutions need {} frames, got {}", m - 1, frames.len())));
    }
    let mu = prob.mu();
    let distinct = prob.tol().distinct * mu.sqrt();
    let mut found: Vec<ContinuationRun> = Vec::new();
    let seeds = std::iter::once((1, None)).chain(frames.iter().map(|f| (f.j, Some(f))));
    for (j, frame) in seeds {
        if found.len() == m {
            break;
        }
        for dir in cluster_seeds(prob, spectrum, j) {
            let ball = (mu / prob.mass_of(&dir)).sqrt() * (1.0 - 1e-9);
            let t_hi = frame.map_or(ball, |f| ball.min(f.xi / f.lambda_j.sqrt()));
            let prev: Vec<&ContinuationRun> = found.iter().collect();
            let mut out = match run(prob, schedule, &dir, t_hi, j, &prev) {
                Ok(out) => out,
                Err(e) => {
                    log::warn!("multiplicity seed {j} failed: {e}");
                    continue;
                }
            };
            let dup = found.iter().any(|f| {
                let minus = prob.mass_of(&sub(&out.record.u, &f.record.u)).sqrt();
                let plus = prob.mass_of(&add(&out.record.u, &f.record.u)).sqrt();
                minus.min(plus) < distinct
            });
            if dup {
                log::warn!("multiplicity seed {j} reproduced a known solution");
                continue;
            }
            out.record.deflated_against = found.iter().map(|f| f.record.seed_id).collect();
            found.push(out);
            break;
        }
    }
    if found.len() < m {
        return Err(SolverError::FoundFewer { wanted: m, found });
    }
    Ok(found)
}

/// Seed directions for the solution branch leaving the eigenvalue `λ_j`.
///
/// For a simple eigenvalue this is `φ_j` alone. In a multiple eigenspace the energy is
/// nearly flat along rotations and an arbitrary basis vector is generally far from any
/// solution. Branches leave along critical points of the potential `∫F + ∮G` restricted
/// to the unit sphere of the eigenspace, so the maximizer and the minimizer found by
/// projected gradient steps from `φ_j` come first, followed by `φ_j` itself.
pub fn cluster_seeds(prob: &PenalizedProblem, spectrum: &Spectrum, j: usize) -> Vec<Vec<f64>> {
    let phi_j = spectrum.vector(j).to_vec();
    let Some(cluster) = spectrum.distinct().into_iter().find(|c| c.k <= j && j < c.k + c.multiplicity) else {
        return vec![phi_j];
    };
    let basis: Vec<&[f64]> = (cluster.k..cluster.k + cluster.multiplicity).map(|k| spectrum.vector(k)).collect();
    if basis.len() < 2 {
        return vec![phi_j];
    }
    let space = prob.space();
    let (w, wb) = (space.lumped_weights(), space.lumped_boundary_weights());
    let amp = (0.5 * prob.mu()).sqrt();
    let combine = |c: &[f64]| -> Vec<f64> {
        let mut v = vec![0.0; phi_j.len()];
        for (ck, b) in c.iter().zip(&basis) {
            v.iter_mut().zip(*b).for_each(|(vi, bi)| *vi += ck * bi);
        }
        v
    };
    // Potential and its gradient in the coefficients of the eigenspace basis.
    let potential = |c: &[f64]| -> (f64, Vec<f64>) {
        let v = combine(c);
        let mut val = 0.0;
        let mut nodal = vec![0.0; v.len()];
        for i in 0..v.len() {
            let t = amp * v[i];
            val += w[i] * prob.f().primitive(t);
            nodal[i] = w[i] * prob.f().f(t);
            if let Some(g) = prob.g() {
                val += wb[i] * g.primitive(t);
                nodal[i] += wb[i] * g.f(t);
            }
        }
        (val, basis.iter().map(|b| amp * dot(&nodal, b)).collect())
    };
    let normalize = |c: &mut Vec<f64>| {
        let n = dot(c, c).sqrt();
        c.iter_mut().for_each(|x| *x /= n);
    };
    let mut seeds = Vec::new();
    for sign in [1.0, -1.0] {
        let mut c: Vec<f64> = (0..basis.len()).map(|i| if cluster.k + i == j { 1.0 } else { 0.0 }).collect();
        let (mut val, mut grad) = potential(&c);
        let mut step = 1.0;
        for _ in 0..500 {
            let radial = dot(&grad, &c);
            let tangent: Vec<f64> = grad.iter().zip(&c).map(|(g, ci)| g - radial * ci).collect();
            let tn = dot(&tangent, &tangent).sqrt();
            if tn <= 1e-10 * dot(&grad, &grad).sqrt().max(f64::MIN_POSITIVE) {
                break;
            }
            let mut improved = false;
            while step > 1e-12 {
                let mut trial: Vec<f64> = c.iter().zip(&tangent).map(|(ci, t)| ci + sign * step * t / tn).collect();
                normalize(&mut trial);
                let (tv, tg) = potential(&trial);
                if sign * (tv - val) > 0.0 {
                    (c, val, grad) = (trial, tv, tg);
                    step = (2.0 * step).min(1.0);
                    improved = true;
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        seeds.push(combine(&c));
    }
    seeds.push(phi_j);
    // Drop candidates that coincide up to sign with an earlier one.
    let mut out: Vec<Vec<f64>> = Vec::new();
    for s in seeds {
        let near = out.iter().any(|o| {
            let d = prob.mass_of(&sub(&s, o)).min(prob.mass_of(&add(&s, o)));
            d <= 1e-12
        });
        if !near {
            out.push(s);
        }
    }
    out
}

/// Whether the nodal values of `u` are constant up to variance `1e-10 · mean²`.
pub fn detect_constant(u: &[f64]) -> bool {
    if u.is_empty() {
        return false;
    }
    let n = u.len() as f64;
    let mean = u.iter().sum::<f64>() / n;
    let var = u.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    var <= 1e-10 * mean * mean
}

/// Number of nodal domains minus one; equals the number of sign changes in 1D.
///
/// Nodes with `|u| ≤ 1e-8 max|u|` are treated as zero and separate domains.
pub fn sign_changes(disc: &Discretization, space: &ModeSpace, u: &[f64]) -> usize {
    let full = space.expand(u);
    let cut = 1e-8 * full.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let sign = |i: usize| {
        if full[i] > cut {
            1
        } else if full[i] < -cut {
            -1
        } else {
            0
        }
    };
    let n = full.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let npa = disc.nodes_per_axis();
    for i in 0..n {
        let s = sign(i);
        if s == 0 {
            continue;
        }
        let idx = disc.node_multi_index(i);
        for axis in 0..disc.dim() {
            if idx[axis] + 1 < npa {
                let mut nb = idx;
                nb[axis] += 1;
                let k = disc.node_index(nb);
                if sign(k) == s {
                    let (a, b) = (root(&mut parent, i), root(&mut parent, k));
                    parent[a] = b;
                }
            }
        }
    }
    let domains = (0..n).filter(|&i| sign(i) != 0 && root(&mut parent, i) == i).count();
    domains.saturating_sub(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{NonlinearitySpec, Parity, Role, Tolerances};
    use crate::mesh::{assemble, build_domain, BoundaryMode, DomainKind};
    use crate::solver::SolutionCase;
    use crate::spectra::{fountain_frame, solve_eigs};
    use std::sync::Arc;

    fn interval(n: usize) -> Discretization {
        assemble(&build_domain(DomainKind::Interval { a: 0.0, b: 1.0 }, None).unwrap(), n).unwrap()
    }

    #[test]
    fn constant_detection() {
        assert!(detect_constant(&[2.0; 10]));
        assert!(!detect_constant(&[1.0, 1.1, 1.0]));
        assert!(!detect_constant(&[]));
    }

    #[test]
    fn sign_changes_of_sines() {
        let disc = interval(64);
        let space = ModeSpace::new(&disc, BoundaryMode::Dirichlet);
        let s = solve_eigs(&space, 4).unwrap();
        for k in 1..=4 {
            assert_eq!(sign_changes(&disc, &space, s.vector(k)), k - 1);
        }
    }

    #[test]
    fn sign_changes_two_dimensional() {
        let d = build_domain(DomainKind::Rectangle { ax: 0.0, bx: 1.0, ay: 0.0, by: 1.0 }, None).unwrap();
        let disc = assemble(&d, 16).unwrap();
        let space = ModeSpace::new(&disc, BoundaryMode::Dirichlet);
        let u: Vec<f64> = space
            .free_nodes()
            .iter()
            .map(|&i| {
                let x = disc.node_coords(i);
                (2.0 * std::f64::consts::PI * x[0]).sin() * (std::f64::consts::PI * x[1]).sin()
            })
            .collect();
        assert_eq!(sign_changes(&disc, &space, &u), 1);
    }

    #[test]
    fn non_odd_is_rejected() {
        let disc = interval(32);
        let space = Arc::new(ModeSpace::new(&disc, BoundaryMode::Dirichlet));
        let s = solve_eigs(&space, 3).unwrap();
        let f = NonlinearitySpec::single(1.0, 4.0, Role::Interior).unwrap().with_parity(Parity::PositivePart);
        let p = PenalizedProblem::new(space, f, None, 0.01, 2.0).unwrap();
        let frames = vec![fountain_frame(&s, 2, 0.01, 2.0).unwrap()];
        assert!(matches!(
            multiplicity(&p, &s, 2, &frames, &ContinuationSchedule::default()),
            Err(SolverError::NonOddNonlinearity)
        ));
    }

    #[test]
    fn single_solution_matches_continuation() {
        let disc = interval(64);
        let space = Arc::new(ModeSpace::new(&disc, BoundaryMode::Dirichlet));
        let s = solve_eigs(&space, 3).unwrap();
        let f = NonlinearitySpec::single(1.0, 4.0, Role::Interior).unwrap();
        let tol = Tolerances::default().with_lambda_ref(s.lambda(1));
        let p = PenalizedProblem::new(space, f, None, 0.01, 2.0).unwrap().with_tolerances(tol);
        let sched = ContinuationSchedule::default();
        let one = multiplicity(&p, &s, 1, &[], &sched).unwrap();
        let direct = super::super::continue_in_r(&p, &sched, s.vector(1), 1).unwrap();
        assert_eq!(one[0].record.u, direct.record.u);
    }

    fn square_problem(n: usize, mu: f64) -> (Discretization, PenalizedProblem, Spectrum) {
        let d = build_domain(DomainKind::Rectangle { ax: -1.0, bx: 1.0, ay: -1.0, by: 1.0 }, None).unwrap();
        let disc = assemble(&d, n).unwrap();
        let space = Arc::new(ModeSpace::new(&disc, BoundaryMode::Dirichlet));
        let s = solve_eigs(&space, 6).unwrap();
        let tol = Tolerances::default().with_lambda_ref(s.lambda(1));
        let f = NonlinearitySpec::single(1.0, 4.0, Role::Interior).unwrap();
        let p = PenalizedProblem::new(space, f, None, mu, 2.0).unwrap().with_tolerances(tol);
        (disc, p, s)
    }

    #[test]
    fn cluster_seeds_find_the_extremal_directions() {
        // On (-1,1)² the second eigenspace is spanned by cos(πx/2)sin(πy) and
        // sin(πx)cos(πy/2). For unit combinations at angle θ, ∫v⁴ = 9/16 + (3/8)cos²θ sin²θ:
        // diagonal maximizer, axis-aligned minimizer, ratio 7/6.
        let (disc, p, s) = square_problem(32, 0.05);
        let seeds = cluster_seeds(&p, &s, 2);
        assert_eq!(seeds.len(), 3);
        let w = p.space().lumped_weights();
        let quartic = |v: &[f64]| {
            let m = p.mass_of(v);
            v.iter().zip(w).map(|(x, wi)| wi * x.powi(4)).sum::<f64>() / (m * m)
        };
        let ratio = quartic(&seeds[0]) / quartic(&seeds[1]);
        assert!((ratio - 7.0 / 6.0).abs() < 1e-2, "{ratio}");
        let full = p.space().expand(&seeds[0]);
        let transposed: Vec<f64> = (0..full.len())
            .map(|i| {
                let [a, b, _] = disc.node_multi_index(i);
                full[disc.node_index([b, a, 0])]
            })
            .collect();
        let (sym, anti) = full
            .iter()
            .zip(&transposed)
            .fold((0.0f64, 0.0f64), |(s, a), (x, y)| (s.max((x - y).abs()), a.max((x + y).abs())));
        let peak = full.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(sym.min(anti) < 1e-6 * peak, "maximizer is not diagonal: {sym} {anti}");
        // Simple eigenvalues offer only their eigenvector.
        assert_eq!(cluster_seeds(&p, &s, 1), vec![s.vector(1).to_vec()]);
    }

    #[test]
    fn multiple_eigenvalue_yields_two_branches() {
        let (_, p, s) = square_problem(24, 0.05);
        let frames: Vec<_> = [2, 4].iter().map(|&j| fountain_frame(&s, j, 0.05, 2.0).unwrap()).collect();
        let runs = multiplicity(&p, &s, 2, &frames, &ContinuationSchedule::default()).unwrap();
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[1].record.seed_id, 2);
        assert_eq!(runs[1].record.case, SolutionCase::MassAttained);
    }
}
