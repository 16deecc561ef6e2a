//! Box domains, boundary modes and tensor-grid P1/Q1 assembly.
//!
//! Every operator is a Kronecker sum of one-dimensional pieces, so the assembled
//! matrices are exact for the bilinear/trilinear element space. Nodes are numbered
//! lexicographically with the x index running fastest.

mod cache;
mod quadrature;
mod space;

pub use cache::{cache_key, load_cache, save_cache};
pub use quadrature::{boundary_quadrature, element_quadrature, CellRule, QuadPoint};
pub use space::ModeSpace;

use crate::linalg::CsrMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("domain extent along axis {axis} is not positive ({lo} >= {hi})")]
    NonPositiveExtent { axis: usize, lo: f64, hi: f64 },
    #[error("unsupported dimension {0}; expected 1, 2 or 3")]
    UnsupportedDimension(usize),
    #[error("boundary coefficients ({0}, {1}, {2}) do not name a supported mode")]
    IllegalBoundaryMode(u8, u8, u8),
    #[error("at least {min} elements per axis required, got {got}")]
    ResolutionTooLow { min: usize, got: usize },
    #[error("star center {0:?} is not an interior point of the domain")]
    CenterOutsideDomain(Vec<f64>),
    #[error("cache file is invalid: {0}")]
    InvalidCache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub const MIN_ELEMENTS_PER_AXIS: usize = 4;

/// Geometry of an axis-aligned box domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    Interval { a: f64, b: f64 },
    Rectangle { ax: f64, bx: f64, ay: f64, by: f64 },
    Box { lo: [f64; 3], hi: [f64; 3] },
}

/// A validated box domain with its measures and star center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    kind: DomainKind,
    lower: Vec<f64>,
    upper: Vec<f64>,
    volume: f64,
    boundary_measure: f64,
    star_center: Vec<f64>,
}

/// Validates `kind` and computes `|Ω|`, `|∂Ω|` and the star center (centroid by default).
///
/// In one dimension the boundary is two unit point masses, so `|∂Ω| = 2`.
pub fn build_domain(kind: DomainKind, star_center: Option<Vec<f64>>) -> Result<DomainSpec, MeshError> {
    let (lower, upper) = match kind {
        DomainKind::Interval { a, b } => (vec![a], vec![b]),
        DomainKind::Rectangle { ax, bx, ay, by } => (vec![ax, ay], vec![bx, by]),
        DomainKind::Box { lo, hi } => (lo.to_vec(), hi.to_vec()),
    };
    for (axis, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
        if !(hi - lo > 0.0) || !lo.is_finite() || !hi.is_finite() {
            return Err(MeshError::NonPositiveExtent { axis, lo, hi });
        }
    }
    let ext: Vec<f64> = lower.iter().zip(&upper).map(|(l, u)| u - l).collect();
    let volume: f64 = ext.iter().product();
    let boundary_measure = match ext.len() {
        1 => 2.0,
        2 => 2.0 * (ext[0] + ext[1]),
        _ => 2.0 * (ext[0] * ext[1] + ext[1] * ext[2] + ext[0] * ext[2]),
    };
    let centroid: Vec<f64> = lower.iter().zip(&upper).map(|(l, u)| 0.5 * (l + u)).collect();
    let star_center = match star_center {
        None => centroid,
        Some(c) => {
            let inside =
                c.len() == lower.len() && c.iter().zip(lower.iter().zip(&upper)).all(|(x, (l, u))| *l < *x && *x < *u);
            if !inside {
                return Err(MeshError::CenterOutsideDomain(c));
            }
            c
        }
    };
    Ok(DomainSpec { kind, lower, upper, volume, boundary_measure, star_center })
}

impl DomainSpec {
    /// Builds a domain from per-axis bounds; the number of axes fixes the dimension.
    pub fn from_bounds(bounds: &[(f64, f64)], star_center: Option<Vec<f64>>) -> Result<Self, MeshError> {
        let kind = match bounds {
            [(a, b)] => DomainKind::Interval { a: *a, b: *b },
            [(ax, bx), (ay, by)] => DomainKind::Rectangle { ax: *ax, bx: *bx, ay: *ay, by: *by },
            [x, y, z] => DomainKind::Box { lo: [x.0, y.0, z.0], hi: [x.1, y.1, z.1] },
            _ => return Err(MeshError::UnsupportedDimension(bounds.len())),
        };
        build_domain(kind, star_center)
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn boundary_measure(&self) -> f64 {
        self.boundary_measure
    }

    pub fn star_center(&self) -> &[f64] {
        &self.star_center
    }

    /// Same shape scaled by `factor` about the origin.
    pub fn scaled(&self, factor: f64) -> Result<Self, MeshError> {
        let bounds: Vec<_> = self.lower.iter().zip(&self.upper).map(|(l, u)| (l * factor, u * factor)).collect();
        let center = self.star_center.iter().map(|c| c * factor).collect();
        Self::from_bounds(&bounds, Some(center))
    }
}

/// Boundary condition family, encoded by the coefficients `(α, ζ, γ)`.
///
/// `Neumann` is the shifted form: the quadratic part uses `-Δ + I`, so the first
/// eigenvalue is 1 with a constant eigenfunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    Dirichlet,
    Neumann,
    Robin,
}

impl BoundaryMode {
    pub fn from_coefficients(alpha: u8, zeta: u8, gamma: u8) -> Result<Self, MeshError> {
        match (alpha, zeta, gamma) {
            (1, 0, 0) => Ok(Self::Dirichlet),
            (0, 1, 0) => Ok(Self::Neumann),
            (1, 1, 1) => Ok(Self::Robin),
            _ => Err(MeshError::IllegalBoundaryMode(alpha, zeta, gamma)),
        }
    }

    pub fn coefficients(self) -> (u8, u8, u8) {
        match self {
            Self::Dirichlet => (1, 0, 0),
            Self::Neumann => (0, 1, 0),
            Self::Robin => (1, 1, 1),
        }
    }

    /// Constant added to the Laplacian in the working quadratic form.
    pub fn intrinsic_shift(self) -> f64 {
        match self {
            Self::Neumann => 1.0,
            _ => 0.0,
        }
    }
}

/// Assembled operators on a uniform tensor grid.
#[derive(Debug, Clone)]
pub struct Discretization {
    domain: DomainSpec,
    n: usize,
    h: Vec<f64>,
    coords: Vec<f64>,
    stiffness: CsrMatrix,
    mass: CsrMatrix,
    boundary_mass: CsrMatrix,
    pohozaev: Vec<f64>,
    on_boundary: Vec<bool>,
}

struct Axis1d {
    k: CsrMatrix,
    m: CsrMatrix,
    ends: CsrMatrix,
    lumped: Vec<f64>,
}

fn axis_operators(n: usize, h: f64) -> Axis1d {
    let mut tk = Vec::with_capacity(4 * n);
    let mut tm = Vec::with_capacity(4 * n);
    for e in 0..n {
        let (i, j) = (e, e + 1);
        tk.extend([(i, i, 1.0 / h), (j, j, 1.0 / h), (i, j, -1.0 / h), (j, i, -1.0 / h)]);
        tm.extend([(i, i, h / 3.0), (j, j, h / 3.0), (i, j, h / 6.0), (j, i, h / 6.0)]);
    }
    let m = CsrMatrix::from_triplets(n + 1, n + 1, &tm);
    let lumped = m.row_sums();
    Axis1d {
        k: CsrMatrix::from_triplets(n + 1, n + 1, &tk),
        ends: CsrMatrix::from_triplets(n + 1, n + 1, &[(0, 0, 1.0), (n, n, 1.0)]),
        m,
        lumped,
    }
}

/// Kronecker product over axes with axis 0 running fastest.
fn kron_axes(factors: &[&CsrMatrix]) -> CsrMatrix {
    let mut acc = factors[0].clone();
    for f in &factors[1..] {
        acc = f.kron(&acc);
    }
    acc
}

fn kron_vec_axes(factors: &[&[f64]]) -> Vec<f64> {
    let mut acc = factors[0].to_vec();
    for f in &factors[1..] {
        let mut next = Vec::with_capacity(acc.len() * f.len());
        for &b in f.iter() {
            next.extend(acc.iter().map(|a| a * b));
        }
        acc = next;
    }
    acc
}

/// Assembles stiffness, mass, boundary mass and Pohozaev weights on a grid with
/// `n_per_axis` elements along every axis.
pub fn assemble(domain: &DomainSpec, n_per_axis: usize) -> Result<Discretization, MeshError> {
    if n_per_axis < MIN_ELEMENTS_PER_AXIS {
        return Err(MeshError::ResolutionTooLow { min: MIN_ELEMENTS_PER_AXIS, got: n_per_axis });
    }
    let dim = domain.dim();
    let n = n_per_axis;
    let h: Vec<f64> = (0..dim).map(|d| domain.extent(d) / n as f64).collect();
    let axes: Vec<Axis1d> = h.iter().map(|&hd| axis_operators(n, hd)).collect();

    let mass = kron_axes(&axes.iter().map(|a| &a.m).collect::<Vec<_>>());
    let mut stiffness: Option<CsrMatrix> = None;
    let mut boundary_mass: Option<CsrMatrix> = None;
    for d in 0..dim {
        let pick = |special: &dyn Fn(&Axis1d) -> &CsrMatrix| -> CsrMatrix {
            let f: Vec<&CsrMatrix> =
                axes.iter().enumerate().map(|(e, a)| if e == d { special(a) } else { &a.m }).collect();
            kron_axes(&f)
        };
        let kd = pick(&|a| &a.k);
        let bd = pick(&|a| &a.ends);
        stiffness = Some(match stiffness {
            None => kd,
            Some(s) => s.linear_combination(1.0, &kd, 1.0),
        });
        boundary_mass = Some(match boundary_mass {
            None => bd,
            Some(s) => s.linear_combination(1.0, &bd, 1.0),
        });
    }

    let np = n + 1;
    let total = np.pow(dim as u32);
    let mut coords = vec![0.0; total * dim];
    let mut on_boundary = vec![false; total];
    for node in 0..total {
        let mut rem = node;
        for d in 0..dim {
            let i = rem % np;
            rem /= np;
            coords[node * dim + d] = domain.lower()[d] + i as f64 * h[d];
            if i == 0 || i == n {
                on_boundary[node] = true;
            }
        }
    }

    let pohozaev = pohozaev_vector(domain, &axes, n, domain.star_center());
    Ok(Discretization {
        domain: domain.clone(),
        n,
        h,
        coords,
        stiffness: stiffness.unwrap(),
        mass,
        boundary_mass: boundary_mass.unwrap(),
        pohozaev,
        on_boundary,
    })
}

fn pohozaev_vector(domain: &DomainSpec, axes: &[Axis1d], n: usize, x0: &[f64]) -> Vec<f64> {
    let dim = domain.dim();
    let mut total: Option<Vec<f64>> = None;
    for d in 0..dim {
        let mut ends = vec![0.0; n + 1];
        ends[0] = x0[d] - domain.lower()[d];
        ends[n] = domain.upper()[d] - x0[d];
        let f: Vec<&[f64]> =
            axes.iter().enumerate().map(|(e, a)| if e == d { ends.as_slice() } else { a.lumped.as_slice() }).collect();
        let v = kron_vec_axes(&f);
        total = Some(match total {
            None => v,
            Some(t) => t.iter().zip(&v).map(|(a, b)| a + b).collect(),
        });
    }
    total.unwrap()
}

/// Boundary weights `P_i = ∫_∂Ω φ_i (x - x0)·n dσ` for an explicit star center.
///
/// For a box, `Σ P_i = N |Ω|` by the divergence theorem.
pub fn pohozaev_weights(disc: &Discretization, x0: Option<&[f64]>) -> Result<Vec<f64>, MeshError> {
    let Some(x0) = x0 else {
        return Ok(disc.pohozaev.clone());
    };
    let dom = disc.domain();
    let inside = x0.len() == dom.dim()
        && x0.iter().zip(dom.lower().iter().zip(dom.upper())).all(|(x, (l, u))| *l < *x && *x < *u);
    if !inside {
        return Err(MeshError::CenterOutsideDomain(x0.to_vec()));
    }
    let axes: Vec<Axis1d> = disc.h.iter().map(|&hd| axis_operators(disc.n, hd)).collect();
    Ok(pohozaev_vector(dom, &axes, disc.n, x0))
}

impl Discretization {
    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn elements_per_axis(&self) -> usize {
        self.n
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.n + 1
    }

    pub fn num_nodes(&self) -> usize {
        self.on_boundary.len()
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn node_coords(&self, node: usize) -> &[f64] {
        let d = self.dim();
        &self.coords[node * d..(node + 1) * d]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    pub fn boundary_mass(&self) -> &CsrMatrix {
        &self.boundary_mass
    }

    /// Pohozaev boundary weights for the domain's star center.
    pub fn pohozaev(&self) -> &[f64] {
        &self.pohozaev
    }

    pub fn is_boundary_node(&self, node: usize) -> bool {
        self.on_boundary[node]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.on_boundary
    }

    /// Grid multi-index of a node.
    pub fn node_multi_index(&self, node: usize) -> [usize; 3] {
        let np = self.n + 1;
        let mut out = [0; 3];
        let mut rem = node;
        for o in out.iter_mut().take(self.dim()) {
            *o = rem % np;
            rem /= np;
        }
        out
    }

    pub fn node_index(&self, multi: [usize; 3]) -> usize {
        let np = self.n + 1;
        (0..self.dim()).rev().fold(0, |acc, d| acc * np + multi[d])
    }

    pub(crate) fn from_parts(
        domain: DomainSpec,
        n: usize,
        stiffness: CsrMatrix,
        mass: CsrMatrix,
        boundary_mass: CsrMatrix,
        pohozaev: Vec<f64>,
    ) -> Result<Self, MeshError> {
        let rebuilt = assemble(&domain, n)?;
        if rebuilt.num_nodes() != mass.nrows() || pohozaev.len() != mass.nrows() {
            return Err(MeshError::InvalidCache("array sizes do not match the grid".into()));
        }
        Ok(Self { stiffness, mass, boundary_mass, pohozaev, ..rebuilt })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_square(n: usize) -> Discretization {
        let d = build_domain(DomainKind::Rectangle { ax: 0.0, bx: 1.0, ay: 0.0, by: 1.0 }, None).unwrap();
        assemble(&d, n).unwrap()
    }

    #[test]
    fn measures_of_boxes() {
        let i = build_domain(DomainKind::Interval { a: 0.0, b: 1.0 }, None).unwrap();
        assert_eq!((i.volume(), i.boundary_measure()), (1.0, 2.0));
        let r = build_domain(DomainKind::Rectangle { ax: 0.0, bx: 1.0, ay: 0.0, by: 2.0 }, None).unwrap();
        assert_eq!((r.volume(), r.boundary_measure()), (2.0, 6.0));
        let b = build_domain(DomainKind::Box { lo: [0.0; 3], hi: [1.0, 2.0, 3.0] }, None).unwrap();
        assert_eq!((b.volume(), b.boundary_measure()), (6.0, 22.0));
        assert_eq!(b.star_center(), &[0.5, 1.0, 1.5]);
    }

    #[test]
    fn invalid_domains_are_rejected() {
        assert!(matches!(
            build_domain(DomainKind::Interval { a: 1.0, b: 0.0 }, None),
            Err(MeshError::NonPositiveExtent { axis: 0, .. })
        ));
        assert!(matches!(DomainSpec::from_bounds(&[(0.0, 1.0); 4], None), Err(MeshError::UnsupportedDimension(4))));
        assert!(matches!(
            build_domain(DomainKind::Interval { a: 0.0, b: 1.0 }, Some(vec![1.0])),
            Err(MeshError::CenterOutsideDomain(_))
        ));
        assert!(matches!(BoundaryMode::from_coefficients(1, 1, 0), Err(MeshError::IllegalBoundaryMode(1, 1, 0))));
        let d = build_domain(DomainKind::Interval { a: 0.0, b: 1.0 }, None).unwrap();
        assert!(matches!(assemble(&d, 3), Err(MeshError::ResolutionTooLow { .. })));
    }

    #[test]
    fn unit_interval_operators() {
        let d = build_domain(DomainKind::Interval { a: 0.0, b: 1.0 }, None).unwrap();
        let disc = assemble(&d, 4).unwrap();
        let ones = vec![1.0; 5];
        assert!((disc.mass().quad_form(&ones) - 1.0).abs() < 1e-15);
        assert!(disc.stiffness().mul_vec(&ones).iter().all(|v| v.abs() < 1e-14));
        assert_eq!(disc.boundary_mass().quad_form(&ones), 2.0);
        assert_eq!(disc.stiffness().get(1, 1), 8.0);
        assert_eq!(disc.pohozaev(), &[0.5, 0.0, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn stiffness_reproduces_linear_gradient_energy() {
        // u = x + 2y has ∫|∇u|² = 5 on the unit square; Q1 represents it exactly.
        let disc = unit_square(6);
        let u: Vec<f64> = (0..disc.num_nodes())
            .map(|i| {
                let c = disc.node_coords(i);
                c[0] + 2.0 * c[1]
            })
            .collect();
        assert!((disc.stiffness().quad_form(&u) - 5.0).abs() < 1e-12);
        // ∫∫ (x+2y)² = 1/3 + 1 + 4/3 = 8/3.
        assert!((disc.mass().quad_form(&u) - 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_mass_on_unit_cube() {
        let d = build_domain(DomainKind::Box { lo: [0.0; 3], hi: [1.0; 3] }, None).unwrap();
        let disc = assemble(&d, 4).unwrap();
        let ones = vec![1.0; disc.num_nodes()];
        assert!((disc.boundary_mass().quad_form(&ones) - 6.0).abs() < 1e-12);
        assert!((disc.pohozaev().iter().sum::<f64>() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn node_indexing_roundtrip() {
        let disc = unit_square(5);
        for node in 0..disc.num_nodes() {
            assert_eq!(disc.node_index(disc.node_multi_index(node)), node);
        }
        assert!(disc.is_boundary_node(0));
        assert!(!disc.is_boundary_node(disc.node_index([2, 3, 0])));
    }

    proptest! {
        #[test]
        fn assembly_invariants(
            dim in 1usize..=3,
            lo in prop::array::uniform3(-2.0f64..2.0),
            ext in prop::array::uniform3(0.2f64..3.0),
            n in 4usize..7,
        ) {
            let bounds: Vec<(f64, f64)> = (0..dim).map(|d| (lo[d], lo[d] + ext[d])).collect();
            let dom = DomainSpec::from_bounds(&bounds, None).unwrap();
            let disc = assemble(&dom, n).unwrap();
            let ones = vec![1.0; disc.num_nodes()];
            let tol = 1e-12 * (1.0 + dom.volume());
            prop_assert!(disc.stiffness().is_symmetric(1e-14));
            prop_assert!(disc.mass().is_symmetric(1e-14));
            prop_assert!(disc.stiffness().mul_vec(&ones).iter().all(|v| v.abs() < 1e-9));
            prop_assert!((disc.mass().quad_form(&ones) - dom.volume()).abs() < tol);
            prop_assert!((disc.boundary_mass().quad_form(&ones) - dom.boundary_measure()).abs() < 1e-12 * (1.0 + dom.boundary_measure()));
            let psum: f64 = disc.pohozaev().iter().sum();
            prop_assert!((psum - dim as f64 * dom.volume()).abs() < 1e-10 * (1.0 + dom.volume()));
        }
    }
}
