//! Hermitian and locally conformally Kähler structure: fundamental form, Lee
//! form, and the identities tying `J` to the adapted connection of a foliation
//! with complex leaves.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{FolstabError, Result};
use crate::foliation::{ConnectionAt, FoliatedSpace, SmoothSection};
use crate::geometry::fd::Fd;
use crate::geometry::grid::QuadratureGrid;
use crate::geometry::jet::jet1;
use crate::manifolds::model::FundamentalFormFn;
use crate::manifolds::space::BuiltinSpace;

fn not_complex(space: &BuiltinSpace) -> FolstabError {
    FolstabError::Structure(format!("{} carries no complex structure", space.id))
}

fn fine_fd(space: &BuiltinSpace, p: &[f64]) -> Fd {
    let steps = space.chart.singular_distance(p).iter().map(|d| (d / 100.0).min(1e-3)).collect();
    Fd { order: 4, steps }
}

pub fn complex_structure(space: &BuiltinSpace, p: &[f64]) -> Result<DMatrix<f64>> {
    space.model.complex_structure(p).ok_or_else(|| not_complex(space))
}

/// `Ω_ij = g(J∂_i, ∂_j)`.
pub fn fundamental_form(space: &BuiltinSpace, p: &[f64]) -> Result<DMatrix<f64>> {
    let d = space.dim();
    let w = space.model.fundamental_form(p).ok_or_else(|| not_complex(space))?;
    Ok(DMatrix::from_row_slice(d, d, &w))
}

/// `Ω` and its chart derivatives `∂_kΩ`, exact.
pub fn fundamental_form_jet(space: &BuiltinSpace, p: &[f64]) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>)> {
    if !space.model.is_complex() {
        return Err(not_complex(space));
    }
    let d = space.dim();
    let jet = jet1(&FundamentalFormFn(&space.model), p);
    let w = DMatrix::from_row_slice(d, d, &jet.value);
    let dw = (0..d).map(|k| DMatrix::from_fn(d, d, |i, j| jet.grad[i * d + j][k])).collect();
    Ok((w, dw))
}

/// Orthonormal basis `E` with `EᵀgE = I`, from the Cholesky factor.
pub fn orthonormal_basis(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = g.clone().cholesky().ok_or_else(|| FolstabError::DegenerateMetric {
        point: Vec::new(),
        min_eigenvalue: g.clone().symmetric_eigen().eigenvalues.min(),
    })?;
    let linv = chol.l().try_inverse().expect("triangular factor is invertible");
    Ok(linv.transpose())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HermitianDefects {
    /// `|J² + 1|`
    pub j_squared: f64,
    /// `|JᵀgJ − g|`
    pub compatibility: f64,
    /// `|Jᵀg − Ω|`
    pub form: f64,
    /// `|det Ω' − 1|` in an orthonormal frame, i.e. `Ωⁿ/n!` against the volume form.
    pub volume: f64,
}

impl HermitianDefects {
    pub fn max(&self) -> f64 {
        self.j_squared.max(self.compatibility).max(self.form).max(self.volume)
    }
}

pub fn hermitian_defects(space: &BuiltinSpace, p: &[f64]) -> Result<HermitianDefects> {
    let d = space.dim();
    let j = complex_structure(space, p)?;
    let g = space.metric_at(p)?;
    let w = fundamental_form(space, p)?;
    let e = orthonormal_basis(&g)?;
    Ok(HermitianDefects {
        j_squared: (&j * &j + DMatrix::identity(d, d)).amax(),
        compatibility: (j.transpose() * &g * &j - &g).amax(),
        form: (j.transpose() * &g - &w).amax(),
        volume: ((e.transpose() * &w * &e).determinant() - 1.0).abs(),
    })
}

/// Lee form at a point: chart components of `θ` with `dΩ ≈ θ ∧ Ω`, and the
/// least-squares residual measured in an orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LeeForm {
    pub theta: DVector<f64>,
    pub conformal_residual: f64,
}

fn triples(d: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for a in 0..d {
        for b in a + 1..d {
            for c in b + 1..d {
                out.push((a, b, c));
            }
        }
    }
    out
}

/// Solves `dΩ = θ ∧ Ω` in the least-squares sense.
pub fn lee_form_solve(space: &BuiltinSpace, p: &[f64]) -> Result<LeeForm> {
    let d = space.dim();
    if d < 4 {
        return Err(FolstabError::Underdetermined(format!(
            "every 2-form is closed in real dimension {d}; the Lee form is not determined"
        )));
    }
    let (w, dw) = fundamental_form_jet(space, p)?;
    let g = space.metric_at(p)?;
    let e = orthonormal_basis(&g)?;
    let wf = e.transpose() * &w * &e;
    // dwf[c] = Σ_k E_kc ∂_kΩ' (still with two frame slots)
    let dwf: Vec<DMatrix<f64>> = (0..d)
        .map(|c| {
            let mut m = DMatrix::zeros(d, d);
            for k in 0..d {
                m += &dw[k] * e[(k, c)];
            }
            e.transpose() * m * &e
        })
        .collect();
    let rows = triples(d);
    let mut a = DMatrix::zeros(rows.len(), d);
    let mut b = DVector::zeros(rows.len());
    for (r, &(i, j, k)) in rows.iter().enumerate() {
        b[r] = dwf[i][(j, k)] + dwf[j][(k, i)] + dwf[k][(i, j)];
        a[(r, i)] += wf[(j, k)];
        a[(r, j)] += wf[(k, i)];
        a[(r, k)] += wf[(i, j)];
    }
    let svd = a.clone().svd(true, true);
    let theta_f = svd.solve(&b, 1e-12).map_err(|m| FolstabError::Underdetermined(m.to_string()))?;
    let conformal_residual = (&a * &theta_f - &b).amax();
    Ok(LeeForm { theta: &g * &e * theta_f, conformal_residual })
}

fn theta_flat(space: &BuiltinSpace, p: &[f64]) -> Vec<f64> {
    match lee_form_solve(space, p) {
        Ok(l) => l.theta.as_slice().to_vec(),
        Err(_) => vec![f64::NAN; space.dim()],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LckResidual {
    /// Largest `|dθ|` component in an orthonormal frame.
    pub closedness: f64,
    /// Largest `|dΩ − θ∧Ω|` component in an orthonormal frame.
    pub conformal: f64,
}

impl LckResidual {
    pub fn max(&self) -> f64 {
        self.closedness.max(self.conformal)
    }
}

pub fn lck_residual(space: &BuiltinSpace, points: &[Vec<f64>]) -> Result<LckResidual> {
    let d = space.dim();
    let mut out = LckResidual { closedness: 0.0, conformal: 0.0 };
    for p in points {
        let lee = lee_form_solve(space, p)?;
        out.conformal = out.conformal.max(lee.conformal_residual);
        let fd = fine_fd(space, p);
        let f = |x: &[f64]| theta_flat(space, x);
        let grad = fd.gradient(&f, p);
        let dtheta = DMatrix::from_fn(d, d, |i, j| grad[i][j] - grad[j][i]);
        if dtheta.iter().any(|v| !v.is_finite()) {
            return Err(FolstabError::Resolution(format!("Lee form stencil leaves the chart at {p:?}")));
        }
        let e = orthonormal_basis(&space.metric_at(p)?)?;
        out.closedness = out.closedness.max((e.transpose() * dtheta * e).amax());
    }
    Ok(out)
}

/// Largest `|π(B)|` for the Lee vector `B = θ♯`.
pub fn lee_vector_normal_part(fs: &FoliatedSpace, points: &[Vec<f64>]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in points {
        let lee = lee_form_solve(fs.space(), p)?;
        let fr = fs.frame(p)?;
        let b = fr.g.clone().try_inverse().expect("positive-definite metric") * lee.theta;
        worst = worst.max(fr.project(&b).norm());
    }
    Ok(worst)
}

/// Largest `|∇θ|` component in an orthonormal frame; zero on Vaisman manifolds.
pub fn vaisman_residual(space: &BuiltinSpace, points: &[Vec<f64>]) -> Result<f64> {
    let d = space.dim();
    let mut worst: f64 = 0.0;
    for p in points {
        let theta = lee_form_solve(space, p)?.theta;
        let fd = fine_fd(space, p);
        let f = |x: &[f64]| theta_flat(space, x);
        let grad = fd.gradient(&f, p);
        let gamma = space.metric.christoffel(p)?;
        let nab = DMatrix::from_fn(d, d, |i, j| grad[i][j] - (0..d).map(|k| gamma[k][(i, j)] * theta[k]).sum::<f64>());
        if nab.iter().any(|v| !v.is_finite()) {
            return Err(FolstabError::Resolution(format!("Lee form stencil leaves the chart at {p:?}")));
        }
        let e = orthonormal_basis(&space.metric_at(p)?)?;
        worst = worst.max((e.transpose() * nab * e).amax());
    }
    Ok(worst)
}

/// `(∇_{∂_k}J)` as chart endomorphisms, from the exact jets of `g` and `Ω`.
pub fn nabla_j(space: &BuiltinSpace, p: &[f64]) -> Result<Vec<DMatrix<f64>>> {
    let d = space.dim();
    let (_, dw) = fundamental_form_jet(space, p)?;
    let jet = space.metric.jet(p)?;
    let ginv = jet.g.clone().try_inverse().expect("positive-definite metric");
    let j = complex_structure(space, p)?;
    let gamma = space.metric.christoffel(p)?;
    Ok((0..d)
        .map(|k| {
            // J = −g⁻¹Ω
            let dj = -&ginv * &jet.dg[k] * &j - &ginv * &dw[k];
            let gk = DMatrix::from_fn(d, d, |i, m| gamma[i][(k, m)]);
            dj + &gk * &j - &j * gk
        })
        .collect())
}

/// Right-hand side of `(∇_X J)Y = ½{θ(JY)X − θ(Y)JX − g(X,Y)A + Ω(X,Y)B}`
/// with `B = θ♯` and `A = −JB`, times `sign`.
pub fn nabla_j_formula(space: &BuiltinSpace, x: &DVector<f64>, y: &DVector<f64>, p: &[f64], sign: f64) -> Result<DVector<f64>> {
    let theta = lee_form_solve(space, p)?.theta;
    let g = space.metric_at(p)?;
    let j = complex_structure(space, p)?;
    let w = fundamental_form(space, p)?;
    let b = g.clone().try_inverse().expect("positive-definite metric") * &theta;
    let a = -(&j * &b);
    let jy = &j * y;
    let out = x * theta.dot(&jy) - (&j * x) * theta.dot(y) - a * x.dot(&(&g * y)) + b * x.dot(&(&w * y));
    Ok(out * (0.5 * sign))
}

/// Largest `|(∇_X J)Y − formula|` over orthonormal frame pairs at `p`.
pub fn nabla_j_formula_residual(space: &BuiltinSpace, p: &[f64], sign: f64) -> Result<f64> {
    let nj = nabla_j(space, p)?;
    let e = orthonormal_basis(&space.metric_at(p)?)?;
    let g = space.metric_at(p)?;
    let d = space.dim();
    let mut worst: f64 = 0.0;
    for a in 0..d {
        let x = e.column(a).into_owned();
        let mut nx = DMatrix::zeros(d, d);
        for k in 0..d {
            nx += &nj[k] * x[k];
        }
        for b in 0..d {
            let y = e.column(b).into_owned();
            let diff = &nx * &y - nabla_j_formula(space, &x, &y, p, sign)?;
            worst = worst.max(diff.dot(&(&g * &diff)).sqrt());
        }
    }
    Ok(worst)
}

fn require_complex_leaves(fs: &FoliatedSpace, p: &[f64]) -> Result<()> {
    let r = crate::foliation::diagnostics::complex_leaf_residual(fs, p)?;
    if !fs.foliation.is_complex() || r > 1e-8 {
        return Err(FolstabError::HypothesisViolation(format!(
            "leaves of {} on {} are not complex (|π(J e_i)| = {r:e})",
            fs.foliation.kind,
            fs.space().id
        )));
    }
    Ok(())
}

/// `J_Q` in the adapted normal frame.
pub fn normal_j(fs: &FoliatedSpace, p: &[f64]) -> Result<DMatrix<f64>> {
    let j = complex_structure(fs.space(), p)?;
    Ok(fs.frame(p)?.normal_block(&j))
}

/// Largest spectral norm of `∇_X J_Q = ∂_X J_Q + [ω_X, J_Q]` over frame
/// directions and the given points. Zero when `J_Q` is parallel.
pub fn normal_j_parallel_residual(fs: &FoliatedSpace, points: &[Vec<f64>]) -> Result<f64> {
    let q = fs.codim();
    let mut worst: f64 = 0.0;
    for p in points {
        require_complex_leaves(fs, p)?;
        let conn = fs.connection(p)?;
        let jq = normal_j(fs, p)?;
        let fd = fs.fd_at(p);
        let f = |x: &[f64]| match normal_j(fs, x) {
            Ok(m) => m.as_slice().to_vec(),
            Err(_) => vec![f64::NAN; q * q],
        };
        let djq: Vec<DMatrix<f64>> =
            (0..fs.dim()).map(|k| DMatrix::from_column_slice(q, q, &fd.partial(&f, p, k))).collect();
        for c in 0..fs.dim() {
            let x = conn.frame.e.column(c).into_owned();
            let mut m = conn.omega_along(&x) * &jq - &jq * conn.omega_along(&x);
            for (k, dk) in djq.iter().enumerate() {
                m += dk * x[k];
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(FolstabError::Resolution(format!("stencil leaves the chart at {p:?}")));
            }
            worst = worst.max(m.singular_values().max());
        }
    }
    Ok(worst)
}

/// Pointwise data for the operator `DV(X) = ∇_{JX}V − J_Q∇_X V`.
#[derive(Debug, Clone)]
pub struct DOperatorAt {
    pub connection: ConnectionAt,
    pub j: DMatrix<f64>,
    pub j_q: DMatrix<f64>,
    pub v: DVector<f64>,
    pub dv: Vec<DVector<f64>>,
}

impl DOperatorAt {
    pub fn new<F>(fs: &FoliatedSpace, v: &F, p: &[f64]) -> Result<Self>
    where
        F: Fn(&[f64]) -> DVector<f64>,
    {
        let connection = fs.connection(p)?;
        let j = complex_structure(fs.space(), p)?;
        let j_q = connection.frame.normal_block(&j);
        let fd = fs.fd_at(p);
        let f = |x: &[f64]| v(x).as_slice().to_vec();
        let dv = (0..fs.dim()).map(|k| DVector::from_vec(fd.partial(&f, p, k))).collect();
        Ok(DOperatorAt { connection, j, j_q, v: v(p), dv })
    }

    pub fn nabla(&self, x: &DVector<f64>) -> DVector<f64> {
        self.connection.covariant(x, &self.v, &self.dv)
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.nabla(&(&self.j * x)) - &self.j_q * self.nabla(x)
    }

    /// `Σ_k |DV(E_k)|²` over the adapted orthonormal frame.
    pub fn density(&self) -> f64 {
        let e = &self.connection.frame.e;
        (0..e.ncols()).map(|k| self.apply(&e.column(k).into_owned()).norm_squared()).sum()
    }
}

/// `½∫ Σ_k |DV(E_k)|²` by nodal quadrature.
pub fn d_energy(fs: &FoliatedSpace, section: &SmoothSection, grid: &QuadratureGrid) -> Result<f64> {
    let v = |x: &[f64]| section.eval_or_nan(fs, x);
    let mut total = 0.0;
    for (i, w) in grid.weights.iter().enumerate() {
        let p = grid.node(i);
        let dens = DOperatorAt::new(fs, &v, &p)?.density();
        if !dens.is_finite() {
            return Err(FolstabError::NonFiniteField { node: i });
        }
        total += w * dens;
    }
    Ok(0.5 * total)
}

/// Orthonormal frame `(e_1, Je_1, e_2, Je_2, …)` built from the adapted frame,
/// leaf pairs first. Requires complex leaves.
pub fn complex_frame(fs: &FoliatedSpace, p: &[f64]) -> Result<DMatrix<f64>> {
    let fr = fs.frame(p)?;
    let j = complex_structure(fs.space(), p)?;
    let g = &fr.g;
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(fr.dim());
    for (start, end) in [(0, fr.p), (fr.p, fr.dim())] {
        for k in start..end {
            let mut w = fr.e.column(k).into_owned();
            for _ in 0..2 {
                for u in &cols {
                    let c = u.dot(&(g * &w));
                    w -= u * c;
                }
            }
            let n2 = w.dot(&(g * &w));
            if n2 < 1e-12 {
                continue;
            }
            let w = w / n2.sqrt();
            let jw = &j * &w;
            cols.push(w);
            cols.push(jw);
        }
    }
    if cols.len() != fr.dim() {
        return Err(FolstabError::HypothesisViolation(format!("leaves at {p:?} are not J-invariant")));
    }
    Ok(DMatrix::from_columns(&cols))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexCurvatureResidual {
    /// Largest `|R^∇(e_i, Je_i)|` over leaf pairs.
    pub leaf: f64,
    /// Largest `|J_Q R(e, Je)V − R(V, Je)Je − R(V, e)e|` over normal pairs and unit `V`.
    pub normal: f64,
}

pub fn complex_curvature_residual(fs: &FoliatedSpace, p: &[f64]) -> Result<ComplexCurvatureResidual> {
    require_complex_leaves(fs, p)?;
    let curv = fs.curvature(p)?;
    let cf = complex_frame(fs, p)?;
    let fr = &curv.connection.frame;
    let jq = normal_j(fs, p)?;
    let mut out = ComplexCurvatureResidual { leaf: 0.0, normal: 0.0 };
    for pair in (0..fr.dim()).step_by(2) {
        let e = cf.column(pair).into_owned();
        let je = cf.column(pair + 1).into_owned();
        let r = curv.apply(&e, &je);
        if pair < fr.p {
            out.leaf = out.leaf.max(r.amax());
            continue;
        }
        for a in 0..fr.codim() {
            let v = fr.normal(a);
            let lhs = &jq * &r * fr.project(&v);
            let rhs = curv.apply(&v, &je) * fr.project(&je) + curv.apply(&v, &e) * fr.project(&e);
            out.normal = out.normal.max((lhs - rhs).norm());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceCheck {
    pub integral: f64,
    /// `∫|integrand|`, the scale against which `integral` is small.
    pub magnitude: f64,
}

/// Integrand `Σ_i {e_iφ_i − Je_iψ_i − g_Q(V, J_Q∇_{[e_i,Je_i]}V)}` over the
/// pairs of [`complex_frame`], `φ_i = g_Q(V, J_Q∇_{Je_i}V)`, `ψ_i = g_Q(V, J_Q∇_{e_i}V)`.
pub fn divergence_integrand(fs: &FoliatedSpace, section: &SmoothSection, p: &[f64]) -> Result<f64> {
    require_complex_leaves(fs, p)?;
    let d = fs.dim();
    let n = d / 2;
    let v = |x: &[f64]| section.eval_or_nan(fs, x);
    let phi_psi = |x: &[f64]| -> Vec<f64> {
        let run = || -> Result<Vec<f64>> {
            let op = DOperatorAt::new(fs, &v, x)?;
            let cf = complex_frame(fs, x)?;
            let mut out = Vec::with_capacity(2 * n);
            for i in 0..n {
                let e = cf.column(2 * i).into_owned();
                let je = cf.column(2 * i + 1).into_owned();
                out.push(op.v.dot(&(&op.j_q * op.nabla(&je))));
                out.push(op.v.dot(&(&op.j_q * op.nabla(&e))));
            }
            Ok(out)
        };
        run().unwrap_or_else(|_| vec![f64::NAN; 2 * n])
    };
    let cf_flat = |x: &[f64]| complex_frame(fs, x).map(|m| m.as_slice().to_vec()).unwrap_or_else(|_| vec![f64::NAN; d * d]);
    let fd = fs.fd_at(p);
    let grad = fd.gradient(&phi_psi, p);
    let dcf: Vec<DMatrix<f64>> = (0..d).map(|k| DMatrix::from_column_slice(d, d, &fd.partial(&cf_flat, p, k))).collect();
    let cf = complex_frame(fs, p)?;
    let op = DOperatorAt::new(fs, &v, p)?;
    let mut total = 0.0;
    for i in 0..n {
        let e = cf.column(2 * i);
        let je = cf.column(2 * i + 1);
        let mut br = DVector::zeros(d);
        for k in 0..d {
            total += e[k] * grad[k][2 * i] - je[k] * grad[k][2 * i + 1];
            br += dcf[k].column(2 * i + 1) * e[k] - dcf[k].column(2 * i) * je[k];
        }
        total -= op.v.dot(&(&op.j_q * op.nabla(&br)));
    }
    if !total.is_finite() {
        return Err(FolstabError::Resolution(format!("stencil leaves the chart at {p:?}")));
    }
    Ok(total)
}

/// `W = Σ_a (∇_{E_a}J)E_a` over an orthonormal frame. Vanishes on Kähler
/// manifolds; equals `(1 − n)A` on l.c.K. ones.
pub fn j_divergence_vector(space: &BuiltinSpace, p: &[f64]) -> Result<DVector<f64>> {
    let nj = nabla_j(space, p)?;
    let e = orthonormal_basis(&space.metric_at(p)?)?;
    let d = space.dim();
    let mut w = DVector::zeros(d);
    for a in 0..d {
        let x = e.column(a).into_owned();
        for k in 0..d {
            w += &nj[k] * &x * x[k];
        }
    }
    Ok(w)
}

/// `g_Q(∇_W V, J_Q V)` with `W` from [`j_divergence_vector`]. Its integral is
/// what the divergence integrand integrates to on a non-Kähler Hermitian manifold.
pub fn hermitian_defect_integrand(fs: &FoliatedSpace, section: &SmoothSection, p: &[f64]) -> Result<f64> {
    let v = |x: &[f64]| section.eval_or_nan(fs, x);
    let op = DOperatorAt::new(fs, &v, p)?;
    let w = j_divergence_vector(fs.space(), p)?;
    Ok(op.nabla(&w).dot(&(&op.j_q * &op.v)))
}

pub fn divergence_check(fs: &FoliatedSpace, section: &SmoothSection, grid: &QuadratureGrid) -> Result<DivergenceCheck> {
    let mut vals = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        vals.push(divergence_integrand(fs, section, &grid.node(i))?);
    }
    let abs: Vec<f64> = vals.iter().map(|v| v.abs()).collect();
    Ok(DivergenceCheck { integral: grid.integrate(&vals)?, magnitude: grid.integrate(&abs)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foliation::Scheme;
    use crate::manifolds::foliation::FoliationKind;
    use crate::manifolds::space::{build_space, SpaceId};

    fn space(s: &str) -> BuiltinSpace {
        build_space(&SpaceId::parse(s).unwrap()).unwrap()
    }

    fn fs(s: &str, f: &str) -> FoliatedSpace {
        FoliatedSpace::new(&space(s), &FoliationKind::parse(f).unwrap(), Scheme::Fine).unwrap()
    }

    #[test]
    fn hopf_lee_form_is_minus_two_log_lambda_ds() {
        let sp = space("hopf_complex:n=2,lambda=3");
        let lee = lee_form_solve(&sp, &[0.2, 0.7, 1.0, 2.0]).unwrap();
        let expected = sp.model.lee_form(&[0.0; 4]).unwrap();
        for (a, b) in lee.theta.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(lee.conformal_residual < 1e-12);
    }

    #[test]
    fn hopf_is_lck_and_vaisman() {
        let sp = space("hopf_complex:n=2,lambda=2");
        let pts = sp.chart.sample_points(4, 3);
        let r = lck_residual(&sp, &pts).unwrap();
        assert!(r.max() < 1e-8, "{r:?}");
        assert!(vaisman_residual(&sp, &pts).unwrap() < 1e-8);
        assert!(hermitian_defects(&sp, &pts[0]).unwrap().max() < 1e-12);
    }

    #[test]
    fn surface_lee_form_is_underdetermined() {
        let sp = space("flat_torus:extents=1x1");
        assert!(matches!(lee_form_solve(&sp, &[0.1, 0.2]), Err(FolstabError::Underdetermined(_))));
    }

    #[test]
    fn nabla_j_formula_holds_on_hopf() {
        let sp = space("hopf_complex:n=3,lambda=2");
        let p = [0.3, 0.5, 0.9, 1.0, 2.0, 3.0];
        assert!(nabla_j_formula_residual(&sp, &p, 1.0).unwrap() < 1e-10);
        assert!(nabla_j_formula_residual(&sp, &p, -1.0).unwrap() > 1e-2);
    }

    #[test]
    fn normal_j_is_parallel_on_hopf_fibration() {
        let f = fs("hopf_complex:n=2,lambda=2", "fibration");
        let pts = f.space().chart.sample_points(3, 5);
        assert!(normal_j_parallel_residual(&f, &pts).unwrap() < 1e-8);
        let c = complex_curvature_residual(&f, &pts[0]).unwrap();
        assert!(c.leaf < 1e-6 && c.normal < 1e-6, "{c:?}");
    }

    #[test]
    fn non_complex_leaves_are_rejected() {
        let f = fs("flat_torus:extents=1x1x1x1", "linear");
        let pts = vec![vec![0.1, 0.2, 0.3, 0.4]];
        assert!(matches!(normal_j_parallel_residual(&f, &pts), Err(FolstabError::HypothesisViolation(_))));
    }
}
