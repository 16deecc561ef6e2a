//! Tensor Gauss rules on grid cells and boundary faces.
//!
//! Used where nodal (lumped) quadrature is not accurate enough, e.g. for `L^p` norms in
//! the Gagliardo–Nirenberg ratio, which must be evaluated exactly on the element space
//! to give a valid lower bound.

use super::Discretization;

const GAUSS4_X: [f64; 4] =
    [-0.861_136_311_594_052_6, -0.339_981_043_584_856_3, 0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
const GAUSS4_W: [f64; 4] =
    [0.347_854_845_137_453_9, 0.652_145_154_862_546_1, 0.652_145_154_862_546_1, 0.347_854_845_137_453_9];

/// One reference quadrature point: weight (already scaled to the cell measure) and the
/// values of the cell's vertex basis functions.
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub weight: f64,
    pub basis: [f64; 8],
}

/// Cells (or boundary faces) sharing one reference rule.
#[derive(Debug, Clone)]
pub struct CellRule {
    pub vertices_per_cell: usize,
    pub cells: Vec<[usize; 8]>,
    pub points: Vec<QuadPoint>,
}

impl CellRule {
    /// `∫ F(u_h)` for a nodal vector `u` over all cells.
    pub fn integrate(&self, u: &[f64], mut f: impl FnMut(f64) -> f64) -> f64 {
        let nv = self.vertices_per_cell;
        let mut total = 0.0;
        for cell in &self.cells {
            for q in &self.points {
                let uq: f64 = (0..nv).map(|a| q.basis[a] * u[cell[a]]).sum();
                total += q.weight * f(uq);
            }
        }
        total
    }

    /// Gradient of `u ↦ ∫ F(u_h)` given `F'`.
    pub fn integrate_gradient(&self, u: &[f64], mut df: impl FnMut(f64) -> f64) -> Vec<f64> {
        let nv = self.vertices_per_cell;
        let mut g = vec![0.0; u.len()];
        for cell in &self.cells {
            for q in &self.points {
                let uq: f64 = (0..nv).map(|a| q.basis[a] * u[cell[a]]).sum();
                let d = q.weight * df(uq);
                for a in 0..nv {
                    g[cell[a]] += d * q.basis[a];
                }
            }
        }
        g
    }
}

/// Reference points on `[0,1]^k` with tensor weights and the `2^k` vertex basis values.
fn reference_points(k: usize, scale: f64) -> Vec<QuadPoint> {
    let npts = 4usize.pow(k as u32);
    let mut out = Vec::with_capacity(npts);
    for flat in 0..npts {
        let mut rem = flat;
        let mut xi = [0.0; 3];
        let mut w = scale;
        for x in xi.iter_mut().take(k) {
            let g = rem % 4;
            rem /= 4;
            *x = 0.5 * (1.0 + GAUSS4_X[g]);
            w *= 0.5 * GAUSS4_W[g];
        }
        let mut basis = [0.0; 8];
        for (v, b) in basis.iter_mut().enumerate().take(1 << k) {
            *b = (0..k).map(|d| if (v >> d) & 1 == 1 { xi[d] } else { 1.0 - xi[d] }).product();
        }
        out.push(QuadPoint { weight: w, basis });
    }
    out
}

/// Gauss rule (4 points per axis) over every grid cell.
pub fn element_quadrature(disc: &Discretization) -> CellRule {
    let dim = disc.dim();
    let n = disc.elements_per_axis();
    let ncell = n.pow(dim as u32);
    let mut cells = Vec::with_capacity(ncell);
    for c in 0..ncell {
        let mut base = [0usize; 3];
        let mut rem = c;
        for b in base.iter_mut().take(dim) {
            *b = rem % n;
            rem /= n;
        }
        let mut verts = [0usize; 8];
        for (v, vert) in verts.iter_mut().enumerate().take(1 << dim) {
            let mut m = base;
            for (d, md) in m.iter_mut().enumerate().take(dim) {
                *md += (v >> d) & 1;
            }
            *vert = disc.node_index(m);
        }
        cells.push(verts);
    }
    let vol: f64 = disc.h().iter().product();
    CellRule { vertices_per_cell: 1 << dim, cells, points: reference_points(dim, vol) }
}

/// Gauss rule over the boundary faces. In one dimension the boundary is the two end
/// nodes with unit weight. Faces are grouped by the axis they are normal to, since the
/// face measure depends on it.
pub fn boundary_quadrature(disc: &Discretization) -> Vec<CellRule> {
    let dim = disc.dim();
    let n = disc.elements_per_axis();
    if dim == 1 {
        let pts = vec![QuadPoint { weight: 1.0, basis: [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0] }];
        let mut c0 = [0usize; 8];
        let mut c1 = [0usize; 8];
        c0[0] = 0;
        c1[0] = n;
        return vec![CellRule { vertices_per_cell: 1, cells: vec![c0, c1], points: pts }];
    }
    let k = dim - 1;
    let mut rules = Vec::new();
    for normal in 0..dim {
        let tangents: Vec<usize> = (0..dim).filter(|&d| d != normal).collect();
        let area: f64 = tangents.iter().map(|&d| disc.h()[d]).product();
        let mut cells = Vec::new();
        for side in [0, n] {
            for c in 0..n.pow(k as u32) {
                let mut base = [0usize; 3];
                base[normal] = side;
                let mut rem = c;
                for &t in &tangents {
                    base[t] = rem % n;
                    rem /= n;
                }
                let mut verts = [0usize; 8];
                for (v, vert) in verts.iter_mut().enumerate().take(1 << k) {
                    let mut m = base;
                    for (a, &t) in tangents.iter().enumerate() {
                        m[t] += (v >> a) & 1;
                    }
                    *vert = disc.node_index(m);
                }
                cells.push(verts);
            }
        }
        rules.push(CellRule { vertices_per_cell: 1 << k, cells, points: reference_points(k, area) });
    }
    rules
}
