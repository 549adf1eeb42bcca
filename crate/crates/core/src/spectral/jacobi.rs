//! Spectra, index, Rayleigh quotients and the energy cross-checks of the Jacobi operator.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{FolstabError, Result};
use crate::foliation::diagnostics::mean_curvature;
use crate::foliation::{FoliatedSpace, NormalSection, SmoothSection};
use crate::lck::d_energy;
use crate::spectral::assembly::{JacobiMatrix, HARMONIC_TOL};
use crate::spectral::eigen::smallest_eigenpairs;

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Number of eigenvalues below `−eps_neg`.
    pub index: usize,
    /// Set when every computed eigenvalue is negative, so the true index may be larger.
    pub index_is_lower_bound: bool,
    pub eps_neg: f64,
    pub method: String,
    pub solver_iterations: usize,
    #[serde(skip)]
    pub eigensections: Vec<NormalSection>,
}

/// Negativity threshold `10·(h²/12)·(1 + max|ρ_∇|)`, scaled.
pub fn eps_neg(jm: &JacobiMatrix, tolerance_scale: f64) -> f64 {
    let h = jm.disc.grid.h_max();
    tolerance_scale * 10.0 * (h * h / 12.0) * (1.0 + jm.rho_max)
}

pub fn spectrum(jm: &JacobiMatrix, k: usize, tolerance_scale: f64, seed: u64) -> Result<SpectrumReport> {
    let k = k.min(jm.dof());
    let pairs = smallest_eigenpairs(&jm.matrix, &jm.mass, k, jm.rho_max + 1.0, seed)?;
    let eps = eps_neg(jm, tolerance_scale);
    let index = pairs.values.iter().filter(|l| **l < -eps).count();
    let q = jm.disc.q;
    Ok(SpectrumReport {
        index,
        index_is_lower_bound: index == pairs.values.len() && index < jm.dof(),
        eps_neg: eps,
        method: pairs.method.to_string(),
        solver_iterations: pairs.iterations,
        eigensections: pairs.vectors.iter().map(|v| NormalSection { q, data: v.as_slice().to_vec() }).collect(),
        residuals: pairs.residuals,
        eigenvalues: pairs.values,
    })
}

pub fn rayleigh_quotient(jm: &JacobiMatrix, nu: &NormalSection) -> Result<f64> {
    let v = nu.as_vector();
    let den = v.dot(&jm.mass.component_mul(&v));
    if !(den > 0.0) {
        return Err(FolstabError::DegenerateInput("Rayleigh quotient of the zero section".into()));
    }
    Ok(jm.form(nu) / den)
}

fn require_harmonic(fs: &FoliatedSpace) -> Result<()> {
    for p in fs.space().chart.sample_points(6, 0) {
        let h = mean_curvature(&fs.connection(&p)?).norm();
        if h > HARMONIC_TOL {
            return Err(FolstabError::HypothesisViolation(format!(
                "foliation is not harmonic (|H| = {h:.3e}); the second variation picks up a first-variation term"
            )));
        }
    }
    Ok(())
}

/// `[E(Φ_t) − 2E(Φ_0) + E(Φ_{−t})]/t²` for `Φ_t = exp_Φ(t·dΦ(σν))`, with the
/// Dirichlet energy discretised on the grid edges as
/// `½ Σ w_e d(Φ_t(I), Φ_t(J))² / (h_k² g_kk)`.
pub fn second_variation_fd(fs: &FoliatedSpace, jm: &JacobiMatrix, nu: &NormalSection, t: f64) -> Result<f64> {
    let sub = fs.foliation.submersion.clone().ok_or_else(|| {
        FolstabError::UnsupportedPresentation(format!("{} on {} has no global submersion", fs.foliation.kind, fs.space().id))
    })?;
    require_harmonic(fs)?;
    let model = &fs.space().model;
    let target = sub.target();
    let grid = &jm.disc.grid;
    let mut base = Vec::with_capacity(grid.len());
    let mut dir = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let p = grid.node(i);
        let fr = fs.frame(&p)?;
        let v: Vec<f64> = fr.lift(&nu.at(i)).iter().copied().collect();
        base.push(sub.map(model, &p));
        dir.push(sub.push(model, &p, &v));
    }
    let cell: f64 = grid.h.iter().product();
    let mut edges = Vec::new();
    for i in 0..grid.len() {
        let x = grid.node(i);
        for k in 0..grid.dim() {
            if let Some((j, _)) = grid.neighbour(i, k) {
                let mut m = x.clone();
                m[k] += 0.5 * grid.h[k];
                let g = fs.space().metric_at(&m)?;
                let c = g.determinant().sqrt() * cell / (grid.h[k] * grid.h[k] * g[(k, k)]);
                edges.push((i, j, c));
            }
        }
    }
    let energy = |s: f64| -> f64 {
        let pts: Vec<Vec<f64>> = base
            .iter()
            .zip(&dir)
            .map(|(b, d)| target.exp(b, &d.iter().map(|x| x * s).collect::<Vec<_>>()))
            .collect();
        0.5 * edges.iter().map(|(i, j, c)| c * target.distance(&pts[*i], &pts[*j]).powi(2)).sum::<f64>()
    };
    let out = (energy(t) - 2.0 * energy(0.0) + energy(-t)) / (t * t);
    if !out.is_finite() {
        return Err(FolstabError::Resolution("non-finite discrete energy".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityGap {
    /// `⟨𝒥_∇V, V⟩` from the assembled matrix.
    pub lhs: f64,
    /// `½⟨DV, DV⟩` by quadrature.
    pub rhs: f64,
    pub gap: f64,
}

/// Both sides of `⟨𝒥_∇V, V⟩ = ½⟨DV, DV⟩` for a smooth section on a complex-leaf foliation.
pub fn stability_identity_gap(fs: &FoliatedSpace, jm: &JacobiMatrix, section: &SmoothSection) -> Result<IdentityGap> {
    let grid = &jm.disc.grid;
    let nu = section.sample(fs, grid)?;
    let lhs = jm.form(&nu);
    let rhs = d_energy(fs, section, grid)?;
    let eps = 1e-12 * nu.norm2(grid);
    let gap = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(eps).max(f64::MIN_POSITIVE);
    Ok(IdentityGap { lhs, rhs, gap })
}

/// Node coordinates followed by section components, one row per node.
pub fn section_csv(jm: &JacobiMatrix, nu: &NormalSection) -> String {
    let grid = &jm.disc.grid;
    let mut out = String::new();
    let head: Vec<String> =
        (0..grid.dim()).map(|k| format!("x{k}")).chain((0..nu.q).map(|a| format!("s{a}"))).collect();
    out.push_str(&head.join(","));
    out.push('\n');
    for i in 0..grid.len() {
        let row: Vec<String> = grid.node(i).iter().chain(nu.at(i).iter()).map(|v| format!("{v:.12e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// `M`-weighted projection of a section onto the first `count` eigensections.
pub fn eigen_coefficients(jm: &JacobiMatrix, report: &SpectrumReport, nu: &NormalSection, count: usize) -> Vec<f64> {
    let v = nu.as_vector();
    report
        .eigensections
        .iter()
        .take(count)
        .map(|e| DVector::from_column_slice(&e.data).dot(&jm.mass.component_mul(&v)))
        .collect()
}
