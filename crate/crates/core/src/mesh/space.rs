use super::{BoundaryMode, Discretization};
use crate::linalg::{BandMatrix, BandedLu, CsrMatrix, LinalgError};
use std::sync::OnceLock;

/// Operators restricted to the free degrees of freedom of one boundary mode.
///
/// Dirichlet eliminates boundary nodes; the other modes keep every node. `a` is the
/// working quadratic form: `K` (Dirichlet), `K + M` (shifted Neumann) or `K + B` (Robin).
/// `w` and `wb` are the lumped interior and boundary quadrature weights of the free nodes.
#[derive(Debug, Clone)]
pub struct ModeSpace {
    mode: BoundaryMode,
    dim: usize,
    num_nodes: usize,
    free: Vec<usize>,
    k: CsrMatrix,
    a: CsrMatrix,
    m: CsrMatrix,
    b: CsrMatrix,
    w: Vec<f64>,
    wb: Vec<f64>,
    bandwidth: usize,
    mass_lu: OnceLock<BandedLu>,
}

impl ModeSpace {
    pub fn new(disc: &Discretization, mode: BoundaryMode) -> Self {
        let free: Vec<usize> = match mode {
            BoundaryMode::Dirichlet => (0..disc.num_nodes()).filter(|&i| !disc.is_boundary_node(i)).collect(),
            _ => (0..disc.num_nodes()).collect(),
        };
        let k = disc.stiffness().submatrix(&free, &free);
        let m = disc.mass().submatrix(&free, &free);
        let b = disc.boundary_mass().submatrix(&free, &free);
        let a = match mode {
            BoundaryMode::Dirichlet => k.clone(),
            BoundaryMode::Neumann => k.linear_combination(1.0, &m, 1.0),
            BoundaryMode::Robin => k.linear_combination(1.0, &b, 1.0),
        };
        let full_w = disc.mass().row_sums();
        let full_wb = disc.boundary_mass().row_sums();
        let w = free.iter().map(|&i| full_w[i]).collect();
        let wb = match mode {
            BoundaryMode::Robin => free.iter().map(|&i| full_wb[i]).collect(),
            _ => vec![0.0; free.len()],
        };
        let bandwidth = a.bandwidth().max(m.bandwidth());
        Self {
            mode,
            dim: disc.dim(),
            num_nodes: disc.num_nodes(),
            free,
            k,
            a,
            m,
            b,
            w,
            wb,
            bandwidth,
            mass_lu: OnceLock::new(),
        }
    }

    pub fn mode(&self) -> BoundaryMode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of free degrees of freedom.
    pub fn len(&self) -> usize {
        self.free.len()
    }

    pub fn is_empty(&self) -> bool {
        self.free.is_empty()
    }

    pub fn free_nodes(&self) -> &[usize] {
        &self.free
    }

    pub fn a(&self) -> &CsrMatrix {
        &self.a
    }

    /// `A u` evaluated as `K u` plus the lower-order part, so that the small mass or
    /// boundary entries are not absorbed into the much larger stiffness entries.
    pub fn apply_a(&self, u: &[f64]) -> Vec<f64> {
        let mut y = self.k.mul_vec(u);
        let extra = match self.mode {
            BoundaryMode::Dirichlet => return y,
            BoundaryMode::Neumann => self.m.mul_vec(u),
            BoundaryMode::Robin => self.b.mul_vec(u),
        };
        crate::linalg::axpy(1.0, &extra, &mut y);
        y
    }

    pub fn m(&self) -> &CsrMatrix {
        &self.m
    }

    /// Boundary mass restricted to the free nodes (zero rows for interior nodes).
    pub fn b(&self) -> &CsrMatrix {
        &self.b
    }

    pub fn lumped_weights(&self) -> &[f64] {
        &self.w
    }

    /// Lumped boundary weights; all zero unless the mode is Robin.
    pub fn lumped_boundary_weights(&self) -> &[f64] {
        &self.wb
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// `sqrt(rᵀ M⁻¹ r)`, the discrete `H⁻¹`-type dual norm used for PDE residuals.
    pub fn inverse_mass_norm(&self, r: &[f64]) -> Result<f64, LinalgError> {
        let lu = match self.mass_lu.get() {
            Some(lu) => lu,
            None => {
                let lu = BandMatrix::from_csr(&self.m).factor()?;
                self.mass_lu.get_or_init(|| lu)
            }
        };
        Ok(crate::linalg::dot(r, &lu.solve(r)).max(0.0).sqrt())
    }

    pub fn mass_of(&self, u: &[f64]) -> f64 {
        self.m.quad_form(u)
    }

    /// Nodal vector on the whole grid, zero on eliminated nodes.
    pub fn expand(&self, u: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.num_nodes];
        for (&node, &v) in self.free.iter().zip(u) {
            full[node] = v;
        }
        full
    }

    pub fn restrict(&self, nodal: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&i| nodal[i]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{assemble, build_domain, DomainKind};

    #[test]
    fn dirichlet_eliminates_boundary() {
        let d = build_domain(DomainKind::Rectangle { ax: 0.0, bx: 1.0, ay: 0.0, by: 1.0 }, None).unwrap();
        let disc = assemble(&d, 4).unwrap();
        let s = ModeSpace::new(&disc, BoundaryMode::Dirichlet);
        assert_eq!(s.len(), 9);
        let u = vec![1.0; 9];
        let full = s.expand(&u);
        assert_eq!(full.iter().filter(|v| **v != 0.0).count(), 9);
        assert_eq!(s.restrict(&full), u);
        assert!(s.lumped_boundary_weights().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn shifted_neumann_form_annihilates_nothing() {
        let d = build_domain(DomainKind::Interval { a: 0.0, b: 1.0 }, None).unwrap();
        let disc = assemble(&d, 8).unwrap();
        let s = ModeSpace::new(&disc, BoundaryMode::Neumann);
        let ones = vec![1.0; s.len()];
        assert!((s.a().quad_form(&ones) - 1.0).abs() < 1e-12);
        let r = ModeSpace::new(&disc, BoundaryMode::Robin);
        assert!((r.a().quad_form(&ones) - 2.0).abs() < 1e-12);
        assert_eq!(r.lumped_boundary_weights().iter().sum::<f64>(), 2.0);
    }
}
