//! Residual checks on a foliated space: bundle-like and harmonic conditions,
//! curvature identities of the adapted connection, energy.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{FolstabError, Result};
use crate::foliation::{ConnectionAt, FoliatedSpace};
use crate::geometry::grid::QuadratureGrid;
use crate::manifolds::foliation::Submersion;

/// A chart vector field.
pub type Field<'a> = &'a dyn Fn(&[f64]) -> DVector<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Harmonicity {
    /// Sup over nodes of the leaf mean curvature `|H|`.
    pub mean_curvature: f64,
    /// `L²` norm of `d*_∇π`.
    pub dstar_pi: f64,
    /// Sup over nodes of `|d*_∇π|`.
    pub dstar_pi_sup: f64,
}

fn max_abs_eigen(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.amax()
}

/// Holonomy-invariance defect `|X g_Q(S,T) − g_Q(∇_X S,T) − g_Q(S,∇_X T)|`,
/// maximised over unit `S, T` and frame directions `X` at the given points.
pub fn bundle_like_residual(fs: &FoliatedSpace, points: &[Vec<f64>]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in points {
        let conn = fs.connection(p)?;
        for c in 0..fs.dim() {
            let w = conn.omega_along(&conn.frame.e.column(c).into_owned());
            worst = worst.max(max_abs_eigen(&(&w + w.transpose())));
        }
    }
    Ok(worst)
}

/// `π(∇^N_{e_i} e_i)` summed over leaf vectors and divided by `p`.
pub fn mean_curvature(conn: &ConnectionAt) -> DVector<f64> {
    let fr = &conn.frame;
    let (pl, q) = (fr.p, fr.codim());
    let mut h = DVector::zeros(q);
    if pl == 0 {
        return h;
    }
    for i in 0..pl {
        let along = conn.levi_along(&fr.e.column(i).into_owned());
        for b in 0..q {
            h[b] += along[(pl + b, i)];
        }
    }
    h / pl as f64
}

/// `π` as a `Q`-valued one-form and its covariant derivative at a point.
#[derive(Debug, Clone)]
pub struct PiJet {
    pub connection: ConnectionAt,
    /// `t[m] = π(∂_m)`.
    pub t: Vec<DVector<f64>>,
    /// `nabla[j][m] = (∇_{∂_j} π)(∂_m)`.
    pub nabla: Vec<Vec<DVector<f64>>>,
}

fn pi_components(fs: &FoliatedSpace, p: &[f64]) -> Vec<f64> {
    match fs.frame(p) {
        Ok(fr) => {
            let ge = fr.dual();
            let mut out = Vec::with_capacity(fs.dim() * fr.codim());
            for m in 0..fs.dim() {
                for b in 0..fr.codim() {
                    out.push(ge[(m, fr.p + b)]);
                }
            }
            out
        }
        Err(_) => vec![f64::NAN; fs.dim() * fs.codim()],
    }
}

/// `(∇_j π)_m = ∂_j T_m + ω_j T_m − Γ^l_{jm} T_l` with `T_m = π(∂_m)`.
pub fn pi_jet(fs: &FoliatedSpace, p: &[f64]) -> Result<PiJet> {
    let connection = fs.connection(p)?;
    let (d, q) = (fs.dim(), fs.codim());
    let flat = pi_components(fs, p);
    let t: Vec<DVector<f64>> = (0..d).map(|m| DVector::from_column_slice(&flat[m * q..(m + 1) * q])).collect();
    let fd = fs.fd_at(p);
    let f = |x: &[f64]| pi_components(fs, x);
    let mut nabla = Vec::with_capacity(d);
    for j in 0..d {
        let dt = fd.partial(&f, p, j);
        let row: Vec<DVector<f64>> = (0..d)
            .map(|m| {
                let mut v = DVector::from_column_slice(&dt[m * q..(m + 1) * q]) + &connection.omega[j] * &t[m];
                for (l, tl) in t.iter().enumerate() {
                    v -= tl * connection.gamma[l][(j, m)];
                }
                v
            })
            .collect();
        nabla.push(row);
    }
    Ok(PiJet { connection, t, nabla })
}

/// `d*_∇π = −g^{jm}(∇_j π)_m`.
pub fn dstar_pi(jet: &PiJet) -> DVector<f64> {
    let ginv = jet.connection.frame.g.clone().try_inverse().expect("positive-definite metric");
    let q = jet.connection.frame.codim();
    let mut out = DVector::zeros(q);
    for (j, row) in jet.nabla.iter().enumerate() {
        for (m, v) in row.iter().enumerate() {
            out -= v * ginv[(j, m)];
        }
    }
    out
}

/// Mean curvature sup-norm and `d*_∇π` norms over the nodes of `grid`.
pub fn harmonicity_residual(fs: &FoliatedSpace, grid: &QuadratureGrid) -> Result<Harmonicity> {
    let mut h_sup: f64 = 0.0;
    let mut d_sup: f64 = 0.0;
    let mut d_l2 = 0.0;
    for i in 0..grid.len() {
        let p = grid.node(i);
        let jet = pi_jet(fs, &p)?;
        h_sup = h_sup.max(mean_curvature(&jet.connection).norm());
        let ds = dstar_pi(&jet).norm();
        d_sup = d_sup.max(ds);
        d_l2 += grid.weights[i] * ds * ds;
    }
    Ok(Harmonicity { mean_curvature: h_sup, dstar_pi: d_l2.sqrt(), dstar_pi_sup: d_sup })
}

fn target_norm2(sub: &Submersion, v: &[f64]) -> f64 {
    match sub {
        Submersion::Constant => 0.0,
        _ => v.iter().map(|x| x * x).sum(),
    }
}

/// `½ ∫ |dΦ|²` for the submersion presenting the foliation.
pub fn foliation_energy(fs: &FoliatedSpace, grid: &QuadratureGrid) -> Result<f64> {
    let sub = fs
        .foliation
        .submersion
        .as_ref()
        .ok_or_else(|| FolstabError::UnsupportedPresentation(format!("{} has no global submersion", fs.foliation.kind)))?;
    let model = &fs.space().model;
    let mut density = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let p = grid.node(i);
        let fr = fs.frame(&p)?;
        let mut s = 0.0;
        for c in 0..fr.dim() {
            let v: Vec<f64> = fr.e.column(c).iter().copied().collect();
            s += target_norm2(sub, &sub.push(model, &p, &v));
        }
        density.push(0.5 * s);
    }
    grid.integrate(&density)
}

/// `½ ∫ |π|²`, which is `q·vol/2` for any foliation.
pub fn projection_energy(fs: &FoliatedSpace, grid: &QuadratureGrid) -> Result<f64> {
    let mut density = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let fr = fs.frame(&grid.node(i))?;
        let s: f64 = (0..fr.dim()).map(|c| fr.project(&fr.e.column(c).into_owned()).norm_squared()).sum();
        density.push(0.5 * s);
    }
    grid.integrate(&density)
}

/// Largest `|π[e_i, e_j]|` over leaf frame pairs.
pub fn frobenius_residual(fs: &FoliatedSpace, p: &[f64]) -> Result<f64> {
    let fr = fs.frame(p)?;
    let de = fs.frame_derivatives(p);
    let mut worst: f64 = 0.0;
    for i in 0..fr.p {
        for j in i + 1..fr.p {
            let mut br = DVector::zeros(fr.dim());
            for k in 0..fr.dim() {
                br += de[k].column(j) * fr.e[(k, i)] - de[k].column(i) * fr.e[(k, j)];
            }
            worst = worst.max(fr.project(&br).norm());
        }
    }
    Ok(worst)
}

/// Largest `|π(J e_i)|` over leaf vectors; zero when leaves are complex.
pub fn complex_leaf_residual(fs: &FoliatedSpace, p: &[f64]) -> Result<f64> {
    let j = fs
        .space()
        .model
        .complex_structure(p)
        .ok_or_else(|| FolstabError::HypothesisViolation(format!("{} has no complex structure", fs.space().id)))?;
    let fr = fs.frame(p)?;
    Ok((0..fr.p).map(|i| fr.project(&(&j * fr.e.column(i))).norm()).fold(0.0, f64::max))
}

/// Largest `|dΦ(e_i)|` over leaf vectors: the submersion must kill the leaves.
pub fn presentation_residual(fs: &FoliatedSpace, p: &[f64]) -> Result<f64> {
    let Some(sub) = &fs.foliation.submersion else {
        return Ok(0.0);
    };
    let fr = fs.frame(p)?;
    let mut worst: f64 = 0.0;
    for i in 0..fr.p {
        let v: Vec<f64> = fr.e.column(i).iter().copied().collect();
        worst = worst.max(target_norm2(sub, &sub.push(&fs.space().model, p, &v)).sqrt());
    }
    Ok(worst)
}

fn jacobian(fs: &FoliatedSpace, f: Field, p: &[f64]) -> Vec<DVector<f64>> {
    let fd = fs.fd_at(p);
    let flat = |x: &[f64]| f(x).as_slice().to_vec();
    (0..p.len()).map(|j| DVector::from_vec(fd.partial(&flat, p, j))).collect()
}

/// Lie bracket `[X, Y]` of chart vector fields at `p`.
pub fn bracket(fs: &FoliatedSpace, x: Field, y: Field, p: &[f64]) -> DVector<f64> {
    let (xv, yv) = (x(p), y(p));
    let (jx, jy) = (jacobian(fs, x, p), jacobian(fs, y, p));
    let mut out = DVector::zeros(p.len());
    for j in 0..p.len() {
        out += &jy[j] * xv[j] - &jx[j] * yv[j];
    }
    out
}

/// `∇_X S` straight from the defining branches: `π[X_L, σS] + π(∇^N_{X_σ} σS)`,
/// with `Y = σS` given as a chart vector field. Independent of the connection matrices.
pub fn connection_by_brackets(fs: &FoliatedSpace, x: Field, y: Field, p: &[f64]) -> Result<DVector<f64>> {
    let fr = fs.frame(p)?;
    let leaf_part = |q: &[f64]| -> DVector<f64> {
        match fs.frame(q) {
            Ok(f) => {
                let xv = x(q);
                let gx = &f.g * &xv;
                (0..f.p).fold(DVector::zeros(q.len()), |acc, i| acc + f.e.column(i) * f.e.column(i).dot(&gx))
            }
            Err(_) => DVector::from_element(q.len(), f64::NAN),
        }
    };
    let xl = leaf_part(p);
    let xs = x(p) - &xl;
    let br = bracket(fs, &leaf_part, y, p);
    let gamma = fs.space().metric.christoffel(p)?;
    let yv = y(p);
    let jy = jacobian(fs, y, p);
    let mut nab = DVector::zeros(p.len());
    for j in 0..p.len() {
        if xs[j] == 0.0 {
            continue;
        }
        let mut v = jy[j].clone();
        for k in 0..p.len() {
            for m in 0..p.len() {
                v[k] += gamma[k][(j, m)] * yv[m];
            }
        }
        nab += v * xs[j];
    }
    Ok(fr.project(&(br + nab)))
}

/// `R^∇(X, Y)S` from the connection matrices.
pub fn normal_curvature(fs: &FoliatedSpace, x: &DVector<f64>, y: &DVector<f64>, s: &DVector<f64>, p: &[f64]) -> Result<DVector<f64>> {
    Ok(fs.curvature(p)?.apply(x, y) * s)
}

/// `R^∇(e_a, e_b)S = ∇_{e_a}∇_{e_b}S − ∇_{e_b}∇_{e_a}S − ∇_{[e_a,e_b]}S` by
/// nested stencils of [`connection_by_brackets`], with `S` given by normal components.
pub fn normal_curvature_direct<F>(fs: &FoliatedSpace, a: usize, b: usize, s: &F, p: &[f64]) -> Result<DVector<f64>>
where
    F: Fn(&[f64]) -> DVector<f64>,
{
    let d = fs.dim();
    let nan = move || DVector::from_element(d, f64::NAN);
    let frame_field = |k: usize| {
        move |q: &[f64]| fs.frame(q).map(|f| f.e.column(k).into_owned()).unwrap_or_else(|_| nan())
    };
    let ea = frame_field(a);
    let eb = frame_field(b);
    let ys = |q: &[f64]| fs.frame(q).map(|f| f.lift(&s(q))).unwrap_or_else(|_| nan());
    let second = |x: Field, q: &[f64]| -> DVector<f64> {
        match (fs.frame(q), connection_by_brackets(fs, x, &ys, q)) {
            (Ok(f), Ok(v)) => f.lift(&v),
            _ => nan(),
        }
    };
    let z_b = |q: &[f64]| second(&eb, q);
    let z_a = |q: &[f64]| second(&ea, q);
    let br = |q: &[f64]| bracket(fs, &ea, &eb, q);
    let out = connection_by_brackets(fs, &ea, &z_b, p)? - connection_by_brackets(fs, &eb, &z_a, p)?
        - connection_by_brackets(fs, &br, &ys, p)?;
    if out.iter().any(|v| !v.is_finite()) {
        return Err(FolstabError::Resolution(format!("curvature stencil leaves the chart at {p:?}")));
    }
    Ok(out)
}

/// Largest `|R^∇(e_i, e_b)|` over leaf `e_i` and all frame vectors `e_b`.
pub fn leaf_annihilation_residual(fs: &FoliatedSpace, p: &[f64]) -> Result<f64> {
    let curv = fs.curvature(p)?;
    let mut worst: f64 = 0.0;
    for i in 0..fs.leaf_dim() {
        for b in 0..fs.dim() {
            worst = worst.max(curv.frame_pair(i, b).amax());
        }
    }
    Ok(worst)
}

/// `|ρ_∇ − ρ_∇ᵀ|` in the orthonormal normal frame.
pub fn ricci_symmetry_defect(fs: &FoliatedSpace, p: &[f64]) -> Result<f64> {
    let rho = fs.ricci_operator(p)?;
    Ok((&rho - rho.transpose()).amax())
}

/// `|∇_X π(Y) − ∇_Y π(X) − π[X, Y]|` for chart vector fields.
pub fn torsion_residual(fs: &FoliatedSpace, x: Field, y: Field, p: &[f64]) -> Result<f64> {
    let q = fs.codim();
    let proj = |v: Field, z: &[f64]| fs.frame(z).map(|f| f.project(&v(z))).unwrap_or_else(|_| DVector::from_element(q, f64::NAN));
    let py = |z: &[f64]| proj(y, z);
    let px = |z: &[f64]| proj(x, z);
    let a = fs.adapted_connection(&x(p), &py, p)?;
    let b = fs.adapted_connection(&y(p), &px, p)?;
    let c = fs.frame(p)?.project(&bracket(fs, x, y, p));
    Ok((a - b - c).norm())
}

/// Pointwise residual of `ρ_∇∘π = ∇*∇π + π∘ρ_N`, the Weitzenböck identity for a
/// harmonic foliation with bundle-like metric, measured on the orthonormal frame.
pub fn weitzenbock_residual(fs: &FoliatedSpace, p: &[f64]) -> Result<f64> {
    let (d, q) = (fs.dim(), fs.codim());
    let jet = pi_jet(fs, p)?;
    let fd = fs.fd_at(p);
    let flat = |x: &[f64]| -> Vec<f64> {
        match pi_jet(fs, x) {
            Ok(j) => j.nabla.iter().flatten().flat_map(|v| v.iter().copied().collect::<Vec<_>>()).collect(),
            Err(_) => vec![f64::NAN; d * d * q],
        }
    };
    let at = |v: &[f64], j: usize, m: usize| DVector::from_column_slice(&v[(j * d + m) * q..(j * d + m + 1) * q]);
    let conn = &jet.connection;
    let ginv = conn.frame.g.clone().try_inverse().expect("positive-definite metric");
    let mut lap: Vec<DVector<f64>> = vec![DVector::zeros(q); d];
    for i in 0..d {
        let di = fd.partial(&flat, p, i);
        for j in 0..d {
            let gij = ginv[(i, j)];
            if gij == 0.0 {
                continue;
            }
            for (m, lm) in lap.iter_mut().enumerate() {
                let mut v = at(&di, j, m) + &conn.omega[i] * &jet.nabla[j][m];
                for l in 0..d {
                    v -= &jet.nabla[l][m] * conn.gamma[l][(i, j)];
                    v -= &jet.nabla[j][l] * conn.gamma[l][(i, m)];
                }
                *lm -= v * gij;
            }
        }
    }
    let rho = fs.curvature(p)?.ricci();
    let rho_n = fs.space().metric.curvature(p)?.ricci_operator;
    let res: Vec<DVector<f64>> = (0..d)
        .map(|m| {
            let mut v = &rho * &jet.t[m] - &lap[m];
            for l in 0..d {
                v -= &jet.t[l] * rho_n[(l, m)];
            }
            v
        })
        .collect();
    let e = &conn.frame.e;
    let mut worst: f64 = 0.0;
    for c in 0..d {
        let mut v = DVector::zeros(q);
        for (m, r) in res.iter().enumerate() {
            v += r * e[(m, c)];
        }
        worst = worst.max(v.norm());
    }
    Ok(worst)
}
