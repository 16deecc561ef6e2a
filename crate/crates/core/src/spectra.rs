//! Generalized symmetric eigenproblems `A v = λ M v` of the three boundary modes.
//!
//! Small pencils (dimension below [`DENSE_LIMIT`]) are reduced with a Cholesky factor of
//! `M` and solved densely; larger ones use shift-invert Lanczos with full
//! reorthogonalization. Either way the wanted block is finished with one step of
//! inverse subspace iteration followed by Rayleigh–Ritz, which brings residuals close
//! to machine precision.

use crate::linalg::{axpy, dot, BandMatrix, BandedLu, CsrMatrix, LinalgError};
use crate::mesh::{BoundaryMode, Discretization, ModeSpace};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DENSE_LIMIT: usize = 2000;
/// Relative gap below which consecutive eigenvalues are treated as one value.
pub const DISTINCT_REL_TOL: f64 = 1e-9;
const EXTRA_VECTORS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error("requested {requested} eigenpairs but the space has dimension {dim}")]
    CountExceedsDimension { requested: usize, dim: usize },
    #[error("eigensolver did not converge (worst relative residual {0:e})")]
    SolverNoConvergence(f64),
    #[error("eigenvalue {j} coincides with eigenvalue {}", j - 1)]
    NonDistinctEigenvalue { j: usize },
    #[error("eigenvalue index {j} outside the computed range 2..={max}")]
    IndexOutOfRange { j: usize, max: usize },
    #[error("boundary mass is not positive definite on the boundary nodes")]
    DegenerateBoundaryForm,
    #[error("mass matrix is not positive definite")]
    IndefiniteMass,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    /// 1-based position in the ascending spectrum.
    pub k: usize,
    pub lambda: f64,
    /// `M`-normalized eigenvector on the free degrees of freedom.
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub mode: BoundaryMode,
    pub pairs: Vec<EigenPair>,
}

/// One row of the exported spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistinctEigenvalue {
    pub k: usize,
    pub lambda: f64,
    pub multiplicity: usize,
}

impl Spectrum {
    /// Eigenvalue at 1-based position `k`.
    pub fn lambda(&self, k: usize) -> f64 {
        self.pairs[k - 1].lambda
    }

    pub fn vector(&self, k: usize) -> &[f64] {
        &self.pairs[k - 1].vector
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Groups of consecutive pairs whose eigenvalues agree to [`DISTINCT_REL_TOL`].
    pub fn distinct(&self) -> Vec<DistinctEigenvalue> {
        let mut out: Vec<DistinctEigenvalue> = Vec::new();
        for p in &self.pairs {
            match out.last_mut() {
                Some(last) if same_value(last.lambda, p.lambda) => last.multiplicity += 1,
                _ => out.push(DistinctEigenvalue { k: p.k, lambda: p.lambda, multiplicity: 1 }),
            }
        }
        out
    }
}

fn same_value(a: f64, b: f64) -> bool {
    (a - b).abs() <= DISTINCT_REL_TOL * a.abs().max(b.abs())
}

/// The `count` smallest eigenpairs of the mode's pencil.
pub fn solve_eigs(space: &ModeSpace, count: usize) -> Result<Spectrum, SpectraError> {
    let dim = space.len();
    if count == 0 || count > dim {
        return Err(SpectraError::CountExceedsDimension { requested: count, dim });
    }
    let (lambdas, vectors) = smallest_pairs(space.a(), space.m(), count)?;
    let pairs = lambdas
        .into_iter()
        .zip(vectors)
        .enumerate()
        .map(|(i, (lambda, vector))| EigenPair { k: i + 1, lambda, vector })
        .collect();
    Ok(Spectrum { mode: space.mode(), pairs })
}

/// Smallest `count` eigenpairs of an SPD pencil `(a, m)`.
pub(crate) fn smallest_pairs(
    a: &CsrMatrix,
    m: &CsrMatrix,
    count: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), SpectraError> {
    let dim = a.nrows();
    let block = (count + EXTRA_VECTORS).min(dim);
    let lu = BandMatrix::from_csr(a).factor()?;
    let worst_of = |lam: &[f64], vecs: &[Vec<f64>]| {
        (0..count).map(|i| relative_residual(a, m, lam[i], &vecs[i])).fold(0.0, f64::max)
    };
    let (mut lam, mut vecs) =
        if dim < DENSE_LIMIT { dense_pairs(a, m, block)? } else { lanczos_pairs(&lu, m, block, 0.0)? };
    let mut worst = worst_of(&lam, &vecs);
    // Inverse iteration usually sharpens the pairs. It can also lose accuracy, because the
    // solve's forward error grows with the Euclidean condition of `A`, which is large on
    // anisotropic meshes. Only improving passes are kept.
    for _ in 0..2 {
        let refined: Vec<Vec<f64>> = vecs.iter().map(|v| lu.solve(&m.mul_vec(v))).collect();
        let (l2, v2) = rayleigh_ritz(a, m, &refined)?;
        let w2 = worst_of(&l2, &v2);
        if !(w2 < worst) {
            break;
        }
        (lam, vecs, worst) = (l2, v2, w2);
    }
    if !(worst < 1e-8) {
        return Err(SpectraError::SolverNoConvergence(worst));
    }
    lam.truncate(count);
    vecs.truncate(count);
    vecs.iter_mut().for_each(|v| fix_sign(v));
    Ok((lam, vecs))
}

/// Flips `v` so that its largest-magnitude entry is positive.
fn fix_sign(v: &mut [f64]) {
    let imax = (0..v.len()).max_by(|&p, &q| v[p].abs().total_cmp(&v[q].abs())).unwrap_or(0);
    if v[imax] < 0.0 {
        v.iter_mut().for_each(|e| *e = -*e);
    }
}

fn relative_residual(a: &CsrMatrix, m: &CsrMatrix, lambda: f64, v: &[f64]) -> f64 {
    let mut r = a.mul_vec(v);
    let mv = m.mul_vec(v);
    axpy(-lambda, &mv, &mut r);
    dot(&r, &r).sqrt() / (lambda.abs() * dot(&mv, &mv).sqrt()).max(f64::MIN_POSITIVE)
}

fn dense_pairs(a: &CsrMatrix, m: &CsrMatrix, block: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>), SpectraError> {
    let ad = a.to_dense();
    let md = m.to_dense();
    let chol = nalgebra::Cholesky::new(md).ok_or(SpectraError::IndefiniteMass)?;
    let l = chol.l();
    let x = l.solve_lower_triangular(&ad).ok_or(SpectraError::IndefiniteMass)?;
    let mut c = l.solve_lower_triangular(&x.transpose()).ok_or(SpectraError::IndefiniteMass)?;
    c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let lt = l.transpose();
    let mut lam = Vec::with_capacity(block);
    let mut vecs = Vec::with_capacity(block);
    for &i in order.iter().take(block) {
        let y = eig.eigenvectors.column(i).into_owned();
        let v = lt.solve_upper_triangular(&y).ok_or(SpectraError::IndefiniteMass)?;
        lam.push(eig.eigenvalues[i]);
        vecs.push(v.iter().copied().collect());
    }
    Ok((lam, vecs))
}

/// Shift-invert Lanczos on `(A - σM)⁻¹ M` in the `M` inner product. `lu` factors `A - σM`.
fn lanczos_pairs(
    lu: &BandedLu,
    m: &CsrMatrix,
    block: usize,
    sigma: f64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), SpectraError> {
    let dim = lu.dim();
    let mut steps = (3 * block).max(block + 40).min(dim);
    loop {
        let (lam, vecs, converged) = lanczos_run(lu, m, block, sigma, steps);
        if converged || steps == dim {
            return Ok((lam, vecs));
        }
        steps = (2 * steps).min(dim);
    }
}

fn lanczos_run(
    lu: &BandedLu,
    m: &CsrMatrix,
    block: usize,
    sigma: f64,
    steps: usize,
) -> (Vec<f64>, Vec<Vec<f64>>, bool) {
    let dim = lu.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut q: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let nq = m.quad_form(&q).sqrt();
    q.iter_mut().for_each(|v| *v /= nq);
    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut mbasis: Vec<Vec<f64>> = vec![m.mul_vec(&basis[0])];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    for j in 0..steps {
        let mut w = lu.solve(&mbasis[j]);
        let a = dot(&mbasis[j], &w);
        alpha.push(a);
        for _ in 0..2 {
            for (qi, mqi) in basis.iter().zip(&mbasis) {
                let c = dot(mqi, &w);
                axpy(-c, qi, &mut w);
            }
        }
        if j + 1 == steps {
            break;
        }
        let mw = m.mul_vec(&w);
        let b = dot(&w, &mw).sqrt();
        if !(b > 1e-14 * a.abs()) {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|v| v / b).collect());
        mbasis.push(mw.iter().map(|v| v / b).collect());
    }
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let take = block.min(k);
    let mut lam = Vec::with_capacity(take);
    let mut vecs = Vec::with_capacity(take);
    let mut converged = k == dim;
    let last_beta = beta.get(k.saturating_sub(1)).copied().unwrap_or(0.0);
    let mut worst = 0.0f64;
    for &i in order.iter().take(take) {
        let theta = eig.eigenvalues[i];
        lam.push(sigma + 1.0 / theta);
        let s = eig.eigenvectors.column(i);
        let mut v = vec![0.0; dim];
        for (c, qc) in s.iter().zip(&basis) {
            axpy(*c, qc, &mut v);
        }
        vecs.push(v);
        // Standard Lanczos error estimate |β_k s_k| relative to θ.
        worst = worst.max((last_beta * s[k - 1]).abs() / theta.abs());
    }
    if worst < 1e-10 {
        converged = true;
    }
    (lam, vecs, converged)
}

/// Rayleigh–Ritz projection of the pencil onto `span(x)`.
fn rayleigh_ritz(a: &CsrMatrix, m: &CsrMatrix, x: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>), SpectraError> {
    let b = x.len();
    let ax: Vec<Vec<f64>> = x.iter().map(|v| a.mul_vec(v)).collect();
    let mx: Vec<Vec<f64>> = x.iter().map(|v| m.mul_vec(v)).collect();
    let mut ah = DMatrix::zeros(b, b);
    let mut mh = DMatrix::zeros(b, b);
    for i in 0..b {
        for j in 0..=i {
            let av = 0.5 * (dot(&x[i], &ax[j]) + dot(&x[j], &ax[i]));
            let mv = 0.5 * (dot(&x[i], &mx[j]) + dot(&x[j], &mx[i]));
            ah[(i, j)] = av;
            ah[(j, i)] = av;
            mh[(i, j)] = mv;
            mh[(j, i)] = mv;
        }
    }
    let chol = nalgebra::Cholesky::new(mh).ok_or(SpectraError::SolverNoConvergence(f64::INFINITY))?;
    let l = chol.l();
    let y = l.solve_lower_triangular(&ah).ok_or(SpectraError::SolverNoConvergence(f64::INFINITY))?;
    let mut c = l.solve_lower_triangular(&y.transpose()).ok_or(SpectraError::SolverNoConvergence(f64::INFINITY))?;
    c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..b).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let lt = l.transpose();
    let dim = x[0].len();
    let mut lam = Vec::with_capacity(b);
    let mut vecs = Vec::with_capacity(b);
    for &i in &order {
        let s = lt
            .solve_upper_triangular(&eig.eigenvectors.column(i).into_owned())
            .ok_or(SpectraError::SolverNoConvergence(f64::INFINITY))?;
        let mut v = vec![0.0; dim];
        for (c, xc) in s.iter().zip(x) {
            axpy(*c, xc, &mut v);
        }
        let nv = m.quad_form(&v).sqrt();
        v.iter_mut().for_each(|e| *e /= nv);
        fix_sign(&mut v);
        lam.push(eig.eigenvalues[i]);
        vecs.push(v);
    }
    Ok((lam, vecs))
}

/// Smallest eigenvalue of `(K + B) v = λ̃ B v` on the complement of `ker B`.
///
/// Eliminating the interior nodes by discrete harmonic extension leaves the pencil
/// `(S + B_ΓΓ, B_ΓΓ)` on the boundary nodes, with `S` the Schur complement of `K`.
/// Constants give the Rayleigh quotient 1, so `λ̃ ≤ 1` on every domain.
pub fn lambda_tilde(disc: &Discretization) -> Result<f64, SpectraError> {
    let n = disc.num_nodes();
    let gamma: Vec<usize> = (0..n).filter(|&i| disc.is_boundary_node(i)).collect();
    let interior: Vec<usize> = (0..n).filter(|&i| !disc.is_boundary_node(i)).collect();
    let a = disc.stiffness().linear_combination(1.0, disc.boundary_mass(), 1.0);
    let a_gg = a.submatrix(&gamma, &gamma).to_dense();
    let b_gg = disc.boundary_mass().submatrix(&gamma, &gamma).to_dense();
    let a_ig = a.submatrix(&interior, &gamma);
    let lu = BandMatrix::from_csr(&a.submatrix(&interior, &interior)).factor()?;
    let ng = gamma.len();
    let mut s = a_gg;
    let a_ig_dense = a_ig.to_dense();
    for j in 0..ng {
        let col: Vec<f64> = a_ig_dense.column(j).iter().copied().collect();
        let x = lu.solve(&col);
        for i in 0..ng {
            let c: f64 = a_ig_dense.column(i).iter().zip(&x).map(|(p, q)| p * q).sum();
            s[(i, j)] -= c;
        }
    }
    let s = (&s + s.transpose()) * 0.5;
    let chol = nalgebra::Cholesky::new(b_gg).ok_or(SpectraError::DegenerateBoundaryForm)?;
    let l = chol.l();
    let y = l.solve_lower_triangular(&s).ok_or(SpectraError::DegenerateBoundaryForm)?;
    let c = l.solve_lower_triangular(&y.transpose()).ok_or(SpectraError::DegenerateBoundaryForm)?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Radii and subspaces used to seed the `j`-th fountain solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FountainFrame {
    /// 1-based pair index.
    pub j: usize,
    pub lambda_j: f64,
    /// `sqrt(mu λ_j)`.
    pub rho: f64,
    /// `sqrt((k-1)/k · mu λ_j)`.
    pub xi: f64,
    pub k_tune: f64,
    /// Number of pairs spanning `Y_j` (all eigenvalues up to `λ_j`).
    pub y_dim: usize,
    /// Number of pairs spanning `Y_{j-1}`; `Z_j` is its `M`-orthogonal complement.
    pub z_excluded: usize,
}

impl FountainFrame {
    /// Projection onto `Z_j`: removes the components along `Y_{j-1}`.
    pub fn project_z(&self, spectrum: &Spectrum, m: &CsrMatrix, u: &[f64]) -> Vec<f64> {
        let mu = m.mul_vec(u);
        let mut out = u.to_vec();
        for p in &spectrum.pairs[..self.z_excluded] {
            axpy(-dot(&p.vector, &mu), &p.vector, &mut out);
        }
        out
    }
}

/// Frame for pair index `j ≥ 2` (1-based). `λ_j` must be strictly above `λ_{j-1}`.
pub fn fountain_frame(spectrum: &Spectrum, j: usize, mu: f64, k_tune: f64) -> Result<FountainFrame, SpectraError> {
    let max = spectrum.len();
    if j < 2 || j > max {
        return Err(SpectraError::IndexOutOfRange { j, max });
    }
    let lambda_j = spectrum.lambda(j);
    if same_value(lambda_j, spectrum.lambda(j - 1)) {
        return Err(SpectraError::NonDistinctEigenvalue { j });
    }
    let y_dim = spectrum.pairs.iter().take_while(|p| p.lambda <= lambda_j || same_value(p.lambda, lambda_j)).count();
    let rho = (mu * lambda_j).sqrt();
    let xi = ((k_tune - 1.0) / k_tune * mu * lambda_j).sqrt();
    Ok(FountainFrame { j, lambda_j, rho, xi, k_tune, y_dim, z_excluded: j - 1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{assemble, build_domain, DomainKind};
    use std::f64::consts::PI;

    fn interval(n: usize) -> Discretization {
        assemble(&build_domain(DomainKind::Interval { a: 0.0, b: 1.0 }, None).unwrap(), n).unwrap()
    }

    /// Closed-form P1 eigenvalues of the Dirichlet Laplacian on a uniform grid of (0, 1).
    fn p1_dirichlet(k: usize, n: usize) -> f64 {
        let h = 1.0 / n as f64;
        let c = (k as f64 * PI * h).cos();
        6.0 / (h * h) * (1.0 - c) / (2.0 + c)
    }

    #[test]
    fn interval_dirichlet_matches_closed_form() {
        let n = 64;
        let space = ModeSpace::new(&interval(n), BoundaryMode::Dirichlet);
        let s = solve_eigs(&space, 5).unwrap();
        for k in 1..=5 {
            let exact = p1_dirichlet(k, n);
            assert!((s.lambda(k) - exact).abs() < 1e-10 * exact, "k={k}");
            assert!((space.m().quad_form(s.vector(k)) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn neumann_shifted_first_pair_is_constant() {
        let space = ModeSpace::new(&interval(32), BoundaryMode::Neumann);
        let s = solve_eigs(&space, 3).unwrap();
        assert!((s.lambda(1) - 1.0).abs() < 1e-12);
        let v = s.vector(1);
        assert!(v.iter().all(|x| (x - v[0]).abs() < 1e-10));
    }

    #[test]
    fn robin_first_eigenvalue_matches_transcendental_root() {
        // λ = κ² with tan κ = 2κ / (κ² - 1) on (0, 1) for unit Robin coefficient.
        let g = |k: f64| (k * k - 1.0) * k.sin() - 2.0 * k * k.cos();
        let (mut lo, mut hi) = (1.0, 2.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(lo) * g(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let exact = lo * lo;
        let space = ModeSpace::new(&interval(256), BoundaryMode::Robin);
        let s = solve_eigs(&space, 2).unwrap();
        assert!((s.lambda(1) - exact).abs() < 1e-4 * exact, "{} vs {exact}", s.lambda(1));
    }

    #[test]
    fn square_has_double_second_eigenvalue() {
        let d = build_domain(DomainKind::Rectangle { ax: 0.0, bx: PI, ay: 0.0, by: PI }, None).unwrap();
        let space = ModeSpace::new(&assemble(&d, 16).unwrap(), BoundaryMode::Dirichlet);
        let s = solve_eigs(&space, 4).unwrap();
        let groups = s.distinct();
        assert_eq!(groups[0].multiplicity, 1);
        assert_eq!(groups[1].multiplicity, 2);
        assert!((s.lambda(1) - 2.0).abs() < 0.01 * 2.0);
    }

    #[test]
    fn lanczos_agrees_with_dense() {
        let d = build_domain(DomainKind::Rectangle { ax: 0.0, bx: 1.0, ay: 0.0, by: 1.3 }, None).unwrap();
        let space = ModeSpace::new(&assemble(&d, 12).unwrap(), BoundaryMode::Robin);
        let (ld, _) = dense_pairs(space.a(), space.m(), 6).unwrap();
        let lu = BandMatrix::from_csr(space.a()).factor().unwrap();
        let (ll, _) = lanczos_pairs(&lu, space.m(), 6, 0.0).unwrap();
        for (a, b) in ld.iter().zip(&ll) {
            assert!((a - b).abs() < 1e-8 * a, "{a} vs {b}");
        }
    }

    #[test]
    fn count_checks() {
        let space = ModeSpace::new(&interval(4), BoundaryMode::Dirichlet);
        assert!(matches!(solve_eigs(&space, 4), Err(SpectraError::CountExceedsDimension { .. })));
        assert!(solve_eigs(&space, 3).is_ok());
    }

    #[test]
    fn lambda_tilde_on_interval_and_square() {
        assert!((lambda_tilde(&interval(16)).unwrap() - 1.0).abs() < 1e-12);
        let d = build_domain(DomainKind::Rectangle { ax: 0.0, bx: 1.0, ay: 0.0, by: 1.0 }, None).unwrap();
        let lt = lambda_tilde(&assemble(&d, 16).unwrap()).unwrap();
        assert!(lt <= 1.0 + 1e-9 && lt > 0.0, "{lt}");
    }

    #[test]
    fn fountain_frame_radii() {
        let space = ModeSpace::new(&interval(256), BoundaryMode::Dirichlet);
        let s = solve_eigs(&space, 4).unwrap();
        let fr = fountain_frame(&s, 2, 0.01, 100.0).unwrap();
        assert!((fr.rho - (0.01 * s.lambda(2)).sqrt()).abs() < 1e-15);
        assert!((fr.xi - (0.99 * 0.01 * s.lambda(2)).sqrt()).abs() < 1e-15);
        assert!((fr.rho - 0.2 * PI).abs() < 1e-3);
        assert!(fr.xi < fr.rho);
        assert_eq!((fr.y_dim, fr.z_excluded), (2, 1));
        let z = fr.project_z(&s, space.m(), s.vector(1));
        assert!(crate::linalg::norm2(&z) < 1e-10);
        assert!(matches!(fountain_frame(&s, 1, 0.01, 100.0), Err(SpectraError::IndexOutOfRange { .. })));
        assert!(matches!(fountain_frame(&s, 5, 0.01, 100.0), Err(SpectraError::IndexOutOfRange { .. })));
    }

    #[test]
    fn tied_eigenvalues_cannot_frame() {
        let d = build_domain(DomainKind::Rectangle { ax: 0.0, bx: 1.0, ay: 0.0, by: 1.0 }, None).unwrap();
        let s = solve_eigs(&ModeSpace::new(&assemble(&d, 8).unwrap(), BoundaryMode::Dirichlet), 4).unwrap();
        assert!(matches!(fountain_frame(&s, 3, 0.1, 100.0), Err(SpectraError::NonDistinctEigenvalue { j: 3 })));
        assert_eq!(fountain_frame(&s, 2, 0.1, 100.0).unwrap().y_dim, 3);
    }
}
