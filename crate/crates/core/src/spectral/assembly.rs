//! Finite-volume assembly on cell-centred grids.
//!
//! Sections are stored node-major: dof `node·q + α`. Each grid edge along axis
//! `k` carries the discrete covariant derivative
//! `((ν_J − ν_I)/h_k + ω_k(m)(ν_I + ν_J)/2)/√g_kk(m)` at its midpoint `m`, and the
//! Laplacian is the weighted Gram matrix of these edge values. Open axes only
//! get edges between interior nodes.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use serde::Serialize;

use crate::error::{FolstabError, Result};
use crate::foliation::diagnostics::{bundle_like_residual, mean_curvature};
use crate::foliation::{FoliatedSpace, NormalSection};
use crate::geometry::grid::QuadratureGrid;
use crate::manifolds::space::BuiltinSpace;

pub const BUNDLE_LIKE_TOL: f64 = 1e-6;
pub const HARMONIC_TOL: f64 = 1e-6;

/// Normal sections on the nodes of a grid, with the lumped mass.
#[derive(Debug, Clone)]
pub struct SectionSpace {
    pub grid: QuadratureGrid,
    pub q: usize,
}

impl SectionSpace {
    pub fn new(fs: &FoliatedSpace, res: &[usize]) -> Result<Self> {
        let grid = QuadratureGrid::new(&fs.space().chart, &fs.space().metric, res)?;
        Ok(SectionSpace { grid, q: fs.codim() })
    }

    pub fn dof(&self) -> usize {
        self.grid.len() * self.q
    }

    pub fn mass(&self) -> Result<DVector<f64>> {
        let m = DVector::from_fn(self.dof(), |i, _| self.grid.weights[i / self.q]);
        if m.iter().any(|w| !(*w > 0.0)) {
            return Err(FolstabError::Discretization("non-positive mass weight".into()));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssemblyMetadata {
    pub space: String,
    pub foliation: String,
    pub resolution: Vec<usize>,
    pub scheme: String,
    pub bundle_like_residual: f64,
    pub mean_curvature_sample: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct JacobiMatrix {
    pub disc: SectionSpace,
    pub laplacian: CsrMatrix<f64>,
    pub matrix: CsrMatrix<f64>,
    pub mass: DVector<f64>,
    /// Largest `|ρ_∇|` over nodes.
    pub rho_max: f64,
    pub metadata: AssemblyMetadata,
}

impl JacobiMatrix {
    pub fn dof(&self) -> usize {
        self.mass.len()
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        spmv(&self.matrix, x)
    }

    /// `νᵀAν ≈ ⟨𝒥_∇ν, ν⟩`.
    pub fn form(&self, nu: &NormalSection) -> f64 {
        let v = nu.as_vector();
        v.dot(&self.apply(&v))
    }

    pub fn symmetry_defect(&self) -> f64 {
        let t = self.matrix.transpose();
        let mut worst: f64 = 0.0;
        for (a, b) in self.matrix.row_iter().zip(t.row_iter()) {
            let mut dense_a = std::collections::BTreeMap::new();
            for (c, v) in a.col_indices().iter().zip(a.values()) {
                dense_a.insert(*c, *v);
            }
            for (c, v) in b.col_indices().iter().zip(b.values()) {
                let x = dense_a.remove(c).unwrap_or(0.0);
                worst = worst.max((x - v).abs());
            }
            for v in dense_a.values() {
                worst = worst.max(v.abs());
            }
        }
        worst
    }
}

pub fn spmv(a: &CsrMatrix<f64>, x: &DVector<f64>) -> DVector<f64> {
    let mut y = DVector::zeros(a.nrows());
    let (off, cols, vals) = (a.row_offsets(), a.col_indices(), a.values());
    for i in 0..a.nrows() {
        let mut acc = 0.0;
        for k in off[i]..off[i + 1] {
            acc += vals[k] * x[cols[k]];
        }
        y[i] = acc;
    }
    y
}

pub fn inf_norm(a: &CsrMatrix<f64>) -> f64 {
    a.row_iter().map(|r| r.values().iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Edge along axis `k` from node `i` to `j`, with its midpoint in chart coordinates.
struct Edge {
    i: usize,
    j: usize,
    axis: usize,
    mid: Vec<f64>,
}

fn edges(grid: &QuadratureGrid) -> Vec<Edge> {
    let mut out = Vec::with_capacity(grid.len() * grid.dim());
    for i in 0..grid.len() {
        let x = grid.node(i);
        for k in 0..grid.dim() {
            if let Some((j, _)) = grid.neighbour(i, k) {
                let mut mid = x.clone();
                mid[k] += 0.5 * grid.h[k];
                out.push(Edge { i, j, axis: k, mid });
            }
        }
    }
    out
}

fn require_diagonal(space: &BuiltinSpace) -> Result<()> {
    if !space.model.diagonal_metric() {
        return Err(FolstabError::HypothesisViolation(format!(
            "finite-volume assembly needs a diagonal chart metric; {} has none",
            space.id
        )));
    }
    Ok(())
}

fn push_block(coo: &mut CooMatrix<f64>, rows: &[usize], k: &DMatrix<f64>) {
    for (a, &ra) in rows.iter().enumerate() {
        for (b, &rb) in rows.iter().enumerate() {
            let v = 0.5 * (k[(a, b)] + k[(b, a)]);
            if v != 0.0 {
                coo.push(ra, rb, v);
            }
        }
    }
}

/// Weak-form `Δ = ∇*∇` and pointwise `−ρ_∇` on the section space.
pub fn assemble_jacobi(fs: &FoliatedSpace, disc: &SectionSpace) -> Result<JacobiMatrix> {
    let space = fs.space();
    require_diagonal(space)?;
    let q = disc.q;
    if q == 0 {
        return Err(FolstabError::Discretization("codimension 0 has no normal sections".into()));
    }
    let probes = space.chart.sample_points(6, 0);
    let bl = bundle_like_residual(fs, &probes)?;
    if bl > BUNDLE_LIKE_TOL {
        return Err(FolstabError::HypothesisViolation(format!(
            "metric is not bundle-like for {} (residual {bl:e}); the second-variation formula does not apply",
            fs.foliation.kind
        )));
    }
    let mut h_sample: f64 = 0.0;
    for p in &probes {
        h_sample = h_sample.max(mean_curvature(&fs.connection(p)?).norm());
    }
    let mut warnings = Vec::new();
    if h_sample > HARMONIC_TOL {
        warnings.push(format!("foliation is not harmonic: sampled |H| up to {h_sample:.3e}"));
    }
    let grid = &disc.grid;
    let n = disc.dof();
    let cell: f64 = grid.h.iter().product();
    let mut lap = CooMatrix::new(n, n);
    let id = DMatrix::<f64>::identity(q, q);
    for e in edges(grid) {
        let g = space.metric_at(&e.mid)?;
        let w = g.determinant().sqrt() * cell;
        let conn = fs.connection(&e.mid)?;
        let om = &conn.omega[e.axis];
        let s = 1.0 / g[(e.axis, e.axis)].sqrt();
        let h = grid.h[e.axis];
        let bi = (-&id / h + om * 0.5) * s;
        let bj = (&id / h + om * 0.5) * s;
        let mut b = DMatrix::zeros(q, 2 * q);
        b.view_mut((0, 0), (q, q)).copy_from(&bi);
        b.view_mut((0, q), (q, q)).copy_from(&bj);
        let k = b.transpose() * b * w;
        if k.iter().any(|v| !v.is_finite()) {
            return Err(FolstabError::NonFiniteField { node: e.i });
        }
        let rows: Vec<usize> = (0..q).map(|a| e.i * q + a).chain((0..q).map(|a| e.j * q + a)).collect();
        push_block(&mut lap, &rows, &k);
    }
    let mut full = lap.clone();
    let mut rho_max: f64 = 0.0;
    for i in 0..grid.len() {
        let rho = fs.ricci_operator(&grid.node(i))?;
        if rho.iter().any(|v| !v.is_finite()) {
            return Err(FolstabError::NonFiniteField { node: i });
        }
        rho_max = rho_max.max(rho.norm());
        let rows: Vec<usize> = (0..q).map(|a| i * q + a).collect();
        push_block(&mut full, &rows, &(-rho * grid.weights[i]));
    }
    let metadata = AssemblyMetadata {
        space: space.id.to_string(),
        foliation: fs.foliation.kind.to_string(),
        resolution: grid.res.clone(),
        scheme: format!("{:?}", fs.scheme),
        bundle_like_residual: bl,
        mean_curvature_sample: h_sample,
        warnings,
    };
    Ok(JacobiMatrix {
        disc: disc.clone(),
        laplacian: CsrMatrix::from(&lap),
        matrix: CsrMatrix::from(&full),
        mass: disc.mass()?,
        rho_max,
        metadata,
    })
}

/// Scalar Laplace–Beltrami operator `Δf = −div grad f` and lumped mass.
pub fn assemble_scalar_laplacian(space: &BuiltinSpace, grid: &QuadratureGrid) -> Result<(CsrMatrix<f64>, DVector<f64>)> {
    require_diagonal(space)?;
    let n = grid.len();
    let cell: f64 = grid.h.iter().product();
    let mut coo = CooMatrix::new(n, n);
    for e in edges(grid) {
        let g = space.metric_at(&e.mid)?;
        let h = grid.h[e.axis];
        let c = g.determinant().sqrt() * cell / (h * h * g[(e.axis, e.axis)]);
        coo.push(e.i, e.i, c);
        coo.push(e.j, e.j, c);
        coo.push(e.i, e.j, -c);
        coo.push(e.j, e.i, -c);
    }
    Ok((CsrMatrix::from(&coo), DVector::from_column_slice(&grid.weights)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foliation::Scheme;
    use crate::manifolds::foliation::FoliationKind;
    use crate::manifolds::space::{build_space, SpaceId};

    fn fs(s: &str, f: &str) -> FoliatedSpace {
        let sp = build_space(&SpaceId::parse(s).unwrap()).unwrap();
        FoliatedSpace::new(&sp, &FoliationKind::parse(f).unwrap(), Scheme::Fine).unwrap()
    }

    #[test]
    fn flat_torus_is_five_point_laplacian() {
        let f = fs("flat_torus:extents=1x1", "linear");
        let disc = SectionSpace::new(&f, &[16, 16]).unwrap();
        let jm = assemble_jacobi(&f, &disc).unwrap();
        let g = &disc.grid;
        let x = DVector::from_fn(g.len(), |i, _| {
            let p = g.node(i);
            (p[0] * 3.0).sin() + p[1] * p[1]
        });
        let y = jm.apply(&x);
        for i in 0..g.len() {
            let mut lap = 4.0 * x[i];
            let mi = g.multi_index(i);
            for k in 0..2 {
                for d in [1usize, 15] {
                    let mut m = mi.clone();
                    m[k] = (m[k] + d) % 16;
                    lap -= x[g.index(&m)];
                }
            }
            // weight h² cancels the 1/h² of the stencil
            assert!((y[i] - lap).abs() < 1e-12);
        }
        let ones = DVector::from_element(g.len(), 1.0);
        assert!(jm.apply(&ones).amax() < 1e-12);
        assert_eq!(jm.symmetry_defect(), 0.0);
    }

    #[test]
    fn warped_torus_assembles_with_warning() {
        let f = fs("warped_torus:amplitude=0.3", "warped_circles");
        let jm = assemble_jacobi(&f, &SectionSpace::new(&f, &[8, 8]).unwrap()).unwrap();
        assert!(!jm.metadata.warnings.is_empty());
    }

    #[test]
    fn fubini_study_is_rejected() {
        let f = fs("cpn_fubini_study:n=3", "points");
        let disc = SectionSpace::new(&f, &[8, 8, 8, 8]);
        if let Ok(disc) = disc {
            assert!(matches!(assemble_jacobi(&f, &disc), Err(FolstabError::HypothesisViolation(_))));
        }
    }
}
