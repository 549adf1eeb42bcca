//! Instability of harmonic foliations on submanifolds of Euclidean space:
//! second fundamental form, height-function gradients, the index form `Q_F`
//! and the curvature criteria built on its trace.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{FolstabError, Result};
use crate::foliation::diagnostics::{mean_curvature, pi_jet};
use crate::foliation::{FoliatedSpace, NormalSection};
use crate::geometry::fd::Fd;
use crate::geometry::grid::QuadratureGrid;
use crate::geometry::jet::jet2;
use crate::manifolds::model::{ImmersionFn, Model};
use crate::manifolds::space::BuiltinSpace;
use crate::spectral::assembly::HARMONIC_TOL;

const TANGENT_TOL: f64 = 1e-8;

/// Isometric immersion of a built-in space into `𝔼^m`.
#[derive(Debug, Clone)]
pub struct EuclideanImmersion {
    model: Model,
    dim: usize,
    ambient: usize,
}

/// Extrinsic data at one point, all in chart coordinates except ambient values.
#[derive(Debug, Clone)]
pub struct SecondFundamentalAt {
    pub position: DVector<f64>,
    /// `m × n` differential of the immersion.
    pub dphi: DMatrix<f64>,
    /// Pullback metric.
    pub g: DMatrix<f64>,
    pub ginv: DMatrix<f64>,
    /// `b[j][k] = B(∂_j, ∂_k)` in `𝔼^m`.
    pub b: Vec<Vec<DVector<f64>>>,
    /// Mean curvature vector `η = (1/n) tr_g B`.
    pub eta: DVector<f64>,
}

impl SecondFundamentalAt {
    /// Ricci tensor from the Gauss equation,
    /// `Ric(∂_j, ∂_k) = n⟪B_jk, η⟫ − g^{ab}⟪B_ja, B_kb⟫`.
    pub fn gauss_ricci(&self) -> DMatrix<f64> {
        let n = self.b.len();
        DMatrix::from_fn(n, n, |j, k| {
            let mut v = n as f64 * self.b[j][k].dot(&self.eta);
            for a in 0..n {
                for b in 0..n {
                    v -= self.ginv[(a, b)] * self.b[j][a].dot(&self.b[k][b]);
                }
            }
            v
        })
    }

    pub fn apply(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.position.len());
        for (j, row) in self.b.iter().enumerate() {
            for (k, bjk) in row.iter().enumerate() {
                out += bjk * (x[j] * y[k]);
            }
        }
        out
    }

    /// Chart components of the tangential part of an ambient vector.
    pub fn tangential(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.ginv * (self.dphi.transpose() * v)
    }

    pub fn normal_projector(&self) -> DMatrix<f64> {
        let m = self.position.len();
        DMatrix::identity(m, m) - &self.dphi * &self.ginv * self.dphi.transpose()
    }

    /// Chart components of a tangent ambient vector.
    pub fn to_chart(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let c = self.tangential(x);
        let normal = x - &self.dphi * &c;
        if normal.norm() > TANGENT_TOL * x.norm().max(1.0) {
            return Err(FolstabError::Input(format!("vector is not tangent (normal part {:e})", normal.norm())));
        }
        Ok(c)
    }

    /// `B(∂_j, ·)·v` as a row per `j`: the `n × m` matrix of `v ↦ (B(∂_j, ∂_k)·v)_k`.
    fn b_rows(&self, j: usize) -> DMatrix<f64> {
        let n = self.b.len();
        DMatrix::from_fn(n, self.position.len(), |k, a| self.b[j][k][a])
    }
}

impl EuclideanImmersion {
    pub fn new(space: &BuiltinSpace) -> Result<Self> {
        let model = (*space.model).clone();
        let ambient = model.immersion_dim().ok_or_else(|| {
            FolstabError::UnsupportedPresentation(format!("{} has no built-in Euclidean immersion", space.id))
        })?;
        Ok(EuclideanImmersion { dim: model.dim(), model, ambient })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn normal_space_dim(&self) -> usize {
        self.ambient - self.dim
    }

    pub fn point(&self, p: &[f64]) -> DVector<f64> {
        DVector::from_vec(self.model.immersion(p).expect("model has an immersion"))
    }

    pub fn at(&self, p: &[f64]) -> Result<SecondFundamentalAt> {
        let (n, m) = (self.dim, self.ambient);
        let jet = jet2(&ImmersionFn(&self.model), p);
        let dphi = DMatrix::from_fn(m, n, |a, j| jet.grad[a][j]);
        let g = dphi.transpose() * &dphi;
        let ginv = g.clone().try_inverse().ok_or_else(|| FolstabError::DegenerateMetric {
            point: p.to_vec(),
            min_eigenvalue: g.symmetric_eigenvalues().min(),
        })?;
        let mut sf = SecondFundamentalAt {
            position: DVector::from_column_slice(&jet.value),
            dphi,
            g,
            ginv,
            b: Vec::new(),
            eta: DVector::zeros(m),
        };
        let perp = sf.normal_projector();
        sf.b = (0..n)
            .map(|j| (0..n).map(|k| &perp * DVector::from_fn(m, |a, _| jet.hess[a][j][k])).collect())
            .collect();
        let mut eta = DVector::zeros(m);
        for j in 0..n {
            for k in 0..n {
                eta += &sf.b[j][k] * sf.ginv[(j, k)];
            }
        }
        sf.eta = eta / n as f64;
        Ok(sf)
    }

    /// Orthonormal frame of the space metric pushed into `𝔼^m`.
    pub fn tangent_frame(&self, space: &BuiltinSpace, p: &[f64]) -> Result<DMatrix<f64>> {
        let e = crate::lck::orthonormal_basis(&space.metric_at(p)?)?;
        Ok(self.at(p)?.dphi * e)
    }

    /// `max |φ*⟪·,·⟫ − g|`.
    pub fn pullback_defect(&self, space: &BuiltinSpace, p: &[f64]) -> Result<f64> {
        Ok((self.at(p)?.g - space.metric_at(p)?).amax())
    }
}

/// `B(X, Y)` for tangent ambient vectors `X`, `Y` at `p`.
pub fn second_fundamental_form(imm: &EuclideanImmersion, x: &DVector<f64>, y: &DVector<f64>, p: &[f64]) -> Result<DVector<f64>> {
    let sf = imm.at(p)?;
    let (cx, cy) = (sf.to_chart(x)?, sf.to_chart(y)?);
    Ok(sf.apply(&cx, &cy))
}

/// `grad f_v` at `p` as an ambient vector, `f_v(x) = ⟪v, x⟫`.
pub fn height_gradient(imm: &EuclideanImmersion, v: &DVector<f64>, p: &[f64]) -> Result<DVector<f64>> {
    let sf = imm.at(p)?;
    Ok(&sf.dphi * sf.tangential(v))
}

/// Chart components of `grad f_v`.
pub fn height_gradient_chart(imm: &EuclideanImmersion, v: &DVector<f64>, p: &[f64]) -> Result<DVector<f64>> {
    Ok(imm.at(p)?.tangential(v))
}

/// `π(grad f_v)` sampled on the nodes of `grid`.
pub fn height_section(fs: &FoliatedSpace, v: &DVector<f64>, grid: &QuadratureGrid) -> Result<NormalSection> {
    let imm = EuclideanImmersion::new(fs.space())?;
    check_ambient(&imm, v)?;
    let q = fs.codim();
    NormalSection::from_fn(grid, q, |p| {
        let run = || -> Result<DVector<f64>> { Ok(fs.frame(p)?.project(&height_gradient_chart(&imm, v, p)?)) };
        run().unwrap_or_else(|_| DVector::from_element(q, f64::NAN))
    })
}

fn check_ambient(imm: &EuclideanImmersion, v: &DVector<f64>) -> Result<()> {
    if v.len() != imm.ambient_dim() {
        return Err(FolstabError::Input(format!("vector has {} components, ambient dimension is {}", v.len(), imm.ambient_dim())));
    }
    Ok(())
}

fn require_harmonic(fs: &FoliatedSpace, points: &[Vec<f64>]) -> Result<()> {
    let worst = crate::foliation::diagnostics::bundle_like_residual(fs, points)?;
    if worst > crate::spectral::assembly::BUNDLE_LIKE_TOL {
        return Err(FolstabError::HypothesisViolation(format!("metric is not bundle-like (residual {worst:e})")));
    }
    for p in points {
        let h = mean_curvature(&fs.connection(p)?).norm();
        if h > HARMONIC_TOL {
            return Err(FolstabError::HypothesisViolation(format!("leaves are not minimal at {p:?} (|H| = {h:e})")));
        }
    }
    Ok(())
}

/// Residual of `⟨∇_X V, Y⟩ = ⟪B(X, Y), v⟫` for `V = grad f_v`, with `∇V`
/// taken by finite differences of the chart field.
pub fn height_hessian_residual(space: &BuiltinSpace, v: &DVector<f64>, p: &[f64]) -> Result<f64> {
    let imm = EuclideanImmersion::new(space)?;
    check_ambient(&imm, v)?;
    let sf = imm.at(p)?;
    let nv = nabla_height_fd(space, &imm, v, p)?;
    let n = imm.dim();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for k in 0..n {
            let lhs = nv.column(j).dot(&sf.g.column(k));
            worst = worst.max((lhs - sf.b[j][k].dot(v)).abs());
        }
    }
    Ok(worst)
}

fn fine_fd(space: &BuiltinSpace, p: &[f64]) -> Fd {
    let steps = space.chart.singular_distance(p).iter().map(|d| (d / 100.0).min(1e-3)).collect();
    Fd { order: 4, steps }
}

/// Column `j` holds `∇_{∂_j} grad f_v`.
fn nabla_height_fd(space: &BuiltinSpace, imm: &EuclideanImmersion, v: &DVector<f64>, p: &[f64]) -> Result<DMatrix<f64>> {
    let n = imm.dim();
    let gamma = space.metric.christoffel(p)?;
    let x = height_gradient_chart(imm, v, p)?;
    let f = |z: &[f64]| match height_gradient_chart(imm, v, z) {
        Ok(c) => c.as_slice().to_vec(),
        Err(_) => vec![f64::NAN; n],
    };
    let fd = fine_fd(space, p);
    let mut out = DMatrix::zeros(n, n);
    for j in 0..n {
        let dj = fd.partial(&f, p, j);
        for m in 0..n {
            out[(m, j)] = dj[m] + (0..n).map(|l| gamma[m][(j, l)] * x[l]).sum::<f64>();
        }
    }
    Ok(out)
}

/// Residual of `⟨(∇²V)(∂_z, ∂_x), ∂_y⟩ = −⟪B(∂_x, ∂_y), B(∂_z, V)⟫ + ⟪(∇_{∂_z}B)(∂_x, ∂_y), v⟫`
/// with `(∇²V)(Z, X) = ∇_Z∇_X V − ∇_{∇_Z X}V`, both sides by independent finite differences.
pub fn height_second_derivative_residual(space: &BuiltinSpace, v: &DVector<f64>, p: &[f64]) -> Result<f64> {
    let imm = EuclideanImmersion::new(space)?;
    check_ambient(&imm, v)?;
    let n = imm.dim();
    let sf = imm.at(p)?;
    let gamma = space.metric.christoffel(p)?;
    let fd = fine_fd(space, p);
    let nv = nabla_height_fd(space, &imm, v, p)?;
    let nv_flat = |z: &[f64]| match nabla_height_fd(space, &imm, v, z) {
        Ok(m) => m.as_slice().to_vec(),
        Err(_) => vec![f64::NAN; n * n],
    };
    let b_flat = |z: &[f64]| match imm.at(z) {
        Ok(s) => s.b.iter().flatten().flat_map(|b| b.iter().copied().collect::<Vec<_>>()).collect(),
        Err(_) => vec![f64::NAN; n * n * imm.ambient_dim()],
    };
    let m = imm.ambient_dim();
    let perp = sf.normal_projector();
    let vfield = sf.tangential(v);
    let mut worst: f64 = 0.0;
    for z in 0..n {
        let dnv = DMatrix::from_column_slice(n, n, &fd.partial(&nv_flat, p, z));
        let db = fd.partial(&b_flat, p, z);
        // (∇²V)(∂_z, ∂_x) = ∂_z(∇_x V) + Γ_z (∇_x V) − Γ^l_{zx} ∇_l V
        let gz = DMatrix::from_fn(n, n, |a, l| gamma[a][(z, l)]);
        let mut hess = dnv + &gz * &nv;
        for x in 0..n {
            for l in 0..n {
                let c = gamma[l][(z, x)];
                let col = nv.column(l) * c;
                let mut hx = hess.column_mut(x);
                hx -= col;
            }
        }
        let bzv = sf.apply(&DVector::from_fn(n, |i, _| if i == z { 1.0 } else { 0.0 }), &vfield);
        for x in 0..n {
            for y in 0..n {
                let lhs = hess.column(x).dot(&sf.g.column(y));
                let dbxy = DVector::from_column_slice(&db[(x * n + y) * m..(x * n + y + 1) * m]);
                let mut nabla_b = &perp * dbxy;
                for l in 0..n {
                    nabla_b -= &sf.b[l][y] * gamma[l][(z, x)] + &sf.b[x][l] * gamma[l][(z, y)];
                }
                let rhs = -sf.b[x][y].dot(&bzv) + nabla_b.dot(v);
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    if !worst.is_finite() {
        return Err(FolstabError::Resolution(format!("stencil leaves the chart at {p:?}")));
    }
    Ok(worst)
}

/// The index form `Q_F(v) = ∫ g_Q(𝒥_∇ π(grad f_v), π(grad f_v))` as a matrix on `𝔼^m`.
#[derive(Debug, Clone)]
pub struct IndexForm {
    /// Symmetrised Gram matrix: `Q_F(v) = vᵀ·gram·v`.
    pub gram: DMatrix<f64>,
    /// `∫ Σ_a (n⟪B(e_a, e_a), η⟫ − 2⟨ρ_N e_a, e_a⟩)` over a normal orthonormal frame.
    pub gauss_trace: f64,
    pub resolution: Vec<usize>,
    pub volume: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceQf {
    pub direct: f64,
    pub gauss_formula: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DestabilizingVector {
    pub v: Vec<f64>,
    pub qf_value: f64,
}

impl IndexForm {
    /// Pointwise `𝒥_∇(π X) = −π(ρ_N X) + π(∇^{N*}∇^N X) − 2Σ(∇_{e_i}π)(∇^N_{e_i}X)`
    /// for `X = grad f_v`, integrated by nodal quadrature.
    pub fn assemble(fs: &FoliatedSpace, res: &[usize]) -> Result<Self> {
        let space = fs.space();
        let imm = EuclideanImmersion::new(space)?;
        let grid = QuadratureGrid::new(&space.chart, &space.metric, res)?;
        require_harmonic(fs, &space.chart.sample_points(6, 0))?;
        let (n, m) = (imm.dim(), imm.ambient_dim());
        let l_flat = |z: &[f64]| -> Vec<f64> {
            match imm.at(z) {
                Ok(sf) => (0..n).flat_map(|j| (&sf.ginv * sf.b_rows(j)).as_slice().to_vec()).collect(),
                Err(_) => vec![f64::NAN; n * n * m],
            }
        };
        let mut gram = DMatrix::zeros(m, m);
        let mut gauss = Vec::with_capacity(grid.len());
        for node in 0..grid.len() {
            let p = grid.node(node);
            let w = grid.weights[node];
            let sf = imm.at(&p)?;
            let jet = pi_jet(fs, &p)?;
            let conn = &jet.connection;
            let q = conn.frame.codim();
            let curv = space.metric.curvature(&p)?;
            let gv = &sf.ginv * sf.dphi.transpose();
            let l: Vec<DMatrix<f64>> = (0..n).map(|j| &sf.ginv * sf.b_rows(j)).collect();
            let fd = fs.fd_at(&p);
            let dl: Vec<Vec<f64>> = (0..n).map(|i| fd.partial(&l_flat, &p, i)).collect();
            let mut rough = DMatrix::zeros(n, m);
            let mut cross = DMatrix::zeros(q, m);
            let t = DMatrix::from_columns(&jet.t);
            for i in 0..n {
                let gi = conn.gamma_matrix(i);
                let npi = DMatrix::from_columns(&jet.nabla[i]);
                for j in 0..n {
                    let gij = sf.ginv[(i, j)];
                    if gij == 0.0 {
                        continue;
                    }
                    let dlj = DMatrix::from_column_slice(n, m, &dl[i][j * n * m..(j + 1) * n * m]);
                    let mut hess = dlj + &gi * &l[j];
                    for (k, lk) in l.iter().enumerate() {
                        hess -= lk * conn.gamma[k][(i, j)];
                    }
                    rough -= hess * gij;
                    cross += &npi * &l[j] * gij;
                }
            }
            let k = -(&t * &curv.ricci_operator * &gv) + &t * rough - cross * 2.0;
            let pm = &t * &gv;
            if k.iter().chain(pm.iter()).any(|x| !x.is_finite()) {
                return Err(FolstabError::NonFiniteField { node });
            }
            gram += pm.transpose() * k * w;
            let mut g_int = 0.0;
            for a in 0..q {
                let e = conn.frame.normal(a);
                g_int += n as f64 * sf.apply(&e, &e).dot(&sf.eta) - 2.0 * e.dot(&(&curv.ricci * &e));
            }
            gauss.push(g_int);
        }
        let gram = (&gram + gram.transpose()) * 0.5;
        Ok(IndexForm { gram, gauss_trace: grid.integrate(&gauss)?, resolution: res.to_vec(), volume: grid.volume() })
    }

    pub fn value(&self, v: &DVector<f64>) -> Result<f64> {
        if v.len() != self.gram.nrows() {
            return Err(FolstabError::Input(format!("vector has {} components, ambient dimension is {}", v.len(), self.gram.nrows())));
        }
        Ok(v.dot(&(&self.gram * v)))
    }

    pub fn trace(&self) -> TraceQf {
        TraceQf { direct: self.gram.trace(), gauss_formula: self.gauss_trace }
    }

    /// Most negative direction of `Q_F`; requires a negative trace.
    pub fn destabilizing_vector(&self) -> Result<DestabilizingVector> {
        let tr = self.gram.trace();
        if tr >= 0.0 {
            return Err(FolstabError::NoCertificate(format!("Tr Q_F = {tr:.6e} is not negative")));
        }
        let eig = SymmetricEigen::new(self.gram.clone());
        let (i, val) = eig.eigenvalues.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
        let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        // deterministic sign: largest component positive
        let big = v.iter().cloned().fold(0.0, |a: f64, x| if x.abs() > a.abs() { x } else { a });
        if big < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        Ok(DestabilizingVector { v, qf_value: val })
    }
}

pub fn qf_value(fs: &FoliatedSpace, v: &DVector<f64>, res: &[usize]) -> Result<f64> {
    IndexForm::assemble(fs, res)?.value(v)
}

pub fn trace_qf(fs: &FoliatedSpace, res: &[usize]) -> Result<TraceQf> {
    Ok(IndexForm::assemble(fs, res)?.trace())
}

pub fn destabilizing_vector(fs: &FoliatedSpace, res: &[usize]) -> Result<DestabilizingVector> {
    IndexForm::assemble(fs, res)?.destabilizing_vector()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanCurvatureForm {
    pub max_eigenvalue: f64,
    pub unstable: bool,
}

/// `A(u, u) = n⟪B(u, u), η⟫ − 2⟨ρ_N u, u⟩` on unit vectors at `p`, as a symmetric
/// matrix in an orthonormal frame. `Ric` comes from the Gauss equation; the
/// intrinsic route loses about 1e-10 to cancellation near chart poles.
pub fn mean_curvature_form(space: &BuiltinSpace, imm: &EuclideanImmersion, p: &[f64]) -> Result<DMatrix<f64>> {
    let sf = imm.at(p)?;
    let n = imm.dim();
    let ric = sf.gauss_ricci();
    let a = DMatrix::from_fn(n, n, |j, k| n as f64 * sf.b[j][k].dot(&sf.eta) - 2.0 * ric[(j, k)]);
    let e = crate::lck::orthonormal_basis(&space.metric_at(p)?)?;
    let a = e.transpose() * a * &e;
    Ok((&a + a.transpose()) * 0.5)
}

/// Largest eigenvalue of the mean-curvature form over the nodes of a grid.
pub fn mean_curvature_form_test(space: &BuiltinSpace, res: &[usize]) -> Result<MeanCurvatureForm> {
    let imm = EuclideanImmersion::new(space)?;
    let grid = QuadratureGrid::new(&space.chart, &space.metric, res)?;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..grid.len() {
        let a = mean_curvature_form(space, &imm, &grid.node(i))?;
        worst = worst.max(a.symmetric_eigenvalues().max());
    }
    Ok(MeanCurvatureForm { max_eigenvalue: worst, unstable: worst < 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RicciBound {
    /// `S_N > 2/n`.
    Literal,
    /// `S_N > n/2`.
    Rescaled,
}

impl RicciBound {
    pub fn value(self, n: usize) -> f64 {
        match self {
            RicciBound::Literal => 2.0 / n as f64,
            RicciBound::Rescaled => n as f64 / 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphereRicci {
    pub min_ricci: f64,
    pub bound: f64,
    pub satisfied: bool,
}

/// Ricci criterion for a compact minimal submanifold of the unit sphere.
pub fn sphere_ricci_test(space: &BuiltinSpace, bound: RicciBound, res: &[usize]) -> Result<SphereRicci> {
    let imm = EuclideanImmersion::new(space)?;
    let grid = QuadratureGrid::new(&space.chart, &space.metric, res)?;
    let mut min_ricci = f64::INFINITY;
    for i in 0..grid.len() {
        let p = grid.node(i);
        let sf = imm.at(&p)?;
        let r = sf.position.norm();
        if (r - 1.0).abs() > TANGENT_TOL {
            return Err(FolstabError::HypothesisViolation(format!("image is not in the unit sphere (|x| = {r})")));
        }
        let h = (&sf.eta + &sf.position).norm();
        if h > TANGENT_TOL {
            return Err(FolstabError::HypothesisViolation(format!("not minimal in the unit sphere (|H| = {h:e})")));
        }
        let ric = space.metric.curvature(&p)?.ricci;
        let e = crate::lck::orthonormal_basis(&space.metric_at(&p)?)?;
        min_ricci = min_ricci.min((e.transpose() * ric * &e).symmetric_eigenvalues().min());
    }
    let b = bound.value(imm.dim());
    Ok(SphereRicci { min_ricci, bound: b, satisfied: min_ricci > b })
}
