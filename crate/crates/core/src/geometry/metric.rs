//! Metric fields, Christoffel symbols and curvature in a single chart.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{FolstabError, Result};
use crate::geometry::fd::Fd;
use crate::geometry::jet::jet2;
use crate::manifolds::model::{MetricFn, Model};

pub type PointFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
pub enum MetricSource {
    Model(Arc<Model>),
    /// Row-major components from an arbitrary evaluator.
    Closure { dim: usize, f: PointFn },
}

#[derive(Debug, Clone, PartialEq)]
pub enum DerivativeScheme {
    Analytic,
    FiniteDifference(Fd),
}

#[derive(Clone)]
pub struct MetricField {
    pub source: MetricSource,
    pub scheme: DerivativeScheme,
}

/// `g`, `∂_k g` and `∂_k ∂_l g` at one point.
#[derive(Debug, Clone)]
pub struct MetricJet {
    pub g: DMatrix<f64>,
    pub dg: Vec<DMatrix<f64>>,
    pub d2g: Vec<Vec<DMatrix<f64>>>,
}

/// `gamma[k][(i, j)] = Γ^k_{ij}`.
pub type Christoffel = Vec<DMatrix<f64>>;

#[derive(Debug, Clone)]
pub struct Curvature {
    /// `riemann[a][b][c][d] = g(R(∂_a, ∂_b)∂_c, ∂_d)` with
    /// `R(X,Y) = ∇_X∇_Y − ∇_Y∇_X − ∇_{[X,Y]}`.
    pub riemann: Vec<Vec<Vec<Vec<f64>>>>,
    /// Ricci tensor `Ric(∂_j, ∂_k)`.
    pub ricci: DMatrix<f64>,
    /// Ricci operator `ρ_N = g⁻¹ Ric`, column `k` holds `ρ_N(∂_k)`.
    pub ricci_operator: DMatrix<f64>,
    pub scalar: f64,
}

impl MetricField {
    pub fn analytic(model: Arc<Model>) -> Self {
        MetricField { source: MetricSource::Model(model), scheme: DerivativeScheme::Analytic }
    }

    pub fn dim(&self) -> usize {
        match &self.source {
            MetricSource::Model(m) => m.dim(),
            MetricSource::Closure { dim, .. } => *dim,
        }
    }

    fn raw(&self, p: &[f64]) -> Vec<f64> {
        match &self.source {
            MetricSource::Model(m) => m.metric(p),
            MetricSource::Closure { f, .. } => f(p),
        }
    }

    pub fn value(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let d = self.dim();
        let g = DMatrix::from_row_slice(d, d, &self.raw(p));
        check_positive(&g, p)?;
        Ok(g)
    }

    pub fn jet(&self, p: &[f64]) -> Result<MetricJet> {
        let d = self.dim();
        let mat = |v: &[f64]| DMatrix::from_row_slice(d, d, v);
        let (g, dg, d2g) = match (&self.source, &self.scheme) {
            (MetricSource::Model(m), DerivativeScheme::Analytic) => {
                let j = jet2(&MetricFn(m), p);
                let g = mat(&j.value);
                let dg = (0..d)
                    .map(|k| DMatrix::from_fn(d, d, |a, b| j.grad[a * d + b][k]))
                    .collect();
                let d2g = (0..d)
                    .map(|k| {
                        (0..d)
                            .map(|l| DMatrix::from_fn(d, d, |a, b| j.hess[a * d + b][k][l]))
                            .collect()
                    })
                    .collect();
                (g, dg, d2g)
            }
            (MetricSource::Closure { .. }, DerivativeScheme::Analytic) => {
                return Err(FolstabError::Scheme("closure metric has no analytic derivatives".into()))
            }
            (_, DerivativeScheme::FiniteDifference(fd)) => {
                let f = |q: &[f64]| self.raw(q);
                let g = mat(&f(p));
                let dg = (0..d).map(|k| mat(&fd.partial(&f, p, k))).collect();
                let d2g = (0..d)
                    .map(|k| (0..d).map(|l| mat(&fd.second_partial(&f, p, k, l))).collect())
                    .collect();
                (g, dg, d2g)
            }
        };
        check_positive(&g, p)?;
        Ok(MetricJet { g, dg, d2g })
    }

    pub fn christoffel(&self, p: &[f64]) -> Result<Christoffel> {
        let jet = self.jet(p)?;
        Ok(christoffel_from_jet(&jet))
    }

    pub fn curvature(&self, p: &[f64]) -> Result<Curvature> {
        let jet = self.jet(p)?;
        Ok(curvature_from_jet(&jet))
    }
}

fn check_positive(g: &DMatrix<f64>, p: &[f64]) -> Result<()> {
    let min = g.clone().symmetric_eigen().eigenvalues.min();
    if !(min > 0.0) {
        return Err(FolstabError::DegenerateMetric { point: p.to_vec(), min_eigenvalue: min });
    }
    Ok(())
}

pub fn christoffel_from_jet(jet: &MetricJet) -> Christoffel {
    let d = jet.g.nrows();
    let ginv = jet.g.clone().try_inverse().expect("positive-definite metric");
    // Γ_{l,ij} = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
    let lower = |l: usize, i: usize, j: usize| 0.5 * (jet.dg[i][(j, l)] + jet.dg[j][(i, l)] - jet.dg[l][(i, j)]);
    (0..d)
        .map(|k| {
            DMatrix::from_fn(d, d, |i, j| (0..d).map(|l| ginv[(k, l)] * lower(l, i, j)).sum())
        })
        .collect()
}

/// `out[m][k][(i, j)] = ∂_m Γ^k_{ij}`.
fn christoffel_derivative(jet: &MetricJet) -> Vec<Vec<DMatrix<f64>>> {
    let d = jet.g.nrows();
    let ginv = jet.g.clone().try_inverse().expect("positive-definite metric");
    let lower = |l: usize, i: usize, j: usize| 0.5 * (jet.dg[i][(j, l)] + jet.dg[j][(i, l)] - jet.dg[l][(i, j)]);
    let dlower = |m: usize, l: usize, i: usize, j: usize| {
        0.5 * (jet.d2g[m][i][(j, l)] + jet.d2g[m][j][(i, l)] - jet.d2g[m][l][(i, j)])
    };
    (0..d)
        .map(|m| {
            let dginv = -(&ginv * &jet.dg[m] * &ginv);
            (0..d)
                .map(|k| {
                    DMatrix::from_fn(d, d, |i, j| {
                        (0..d)
                            .map(|l| dginv[(k, l)] * lower(l, i, j) + ginv[(k, l)] * dlower(m, l, i, j))
                            .sum()
                    })
                })
                .collect()
        })
        .collect()
}

pub fn curvature_from_jet(jet: &MetricJet) -> Curvature {
    let d = jet.g.nrows();
    let gam = christoffel_from_jet(jet);
    let dgam = christoffel_derivative(jet);
    // R^l_{ijk} = ∂_iΓ^l_{jk} − ∂_jΓ^l_{ik} + Γ^l_{im}Γ^m_{jk} − Γ^l_{jm}Γ^m_{ik}
    let mut up = vec![vec![vec![vec![0.0; d]; d]; d]; d];
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut v = dgam[i][l][(j, k)] - dgam[j][l][(i, k)];
                    for m in 0..d {
                        v += gam[l][(i, m)] * gam[m][(j, k)] - gam[l][(j, m)] * gam[m][(i, k)];
                    }
                    up[l][i][j][k] = v;
                }
            }
        }
    }
    let mut riemann = vec![vec![vec![vec![0.0; d]; d]; d]; d];
    for a in 0..d {
        for b in 0..d {
            for cc in 0..d {
                for dd in 0..d {
                    riemann[a][b][cc][dd] = (0..d).map(|l| jet.g[(dd, l)] * up[l][a][b][cc]).sum();
                }
            }
        }
    }
    let ricci = DMatrix::from_fn(d, d, |j, k| (0..d).map(|i| up[i][i][j][k]).sum());
    let ginv = jet.g.clone().try_inverse().expect("positive-definite metric");
    let ricci_operator = &ginv * &ricci;
    let scalar = ricci_operator.trace();
    Curvature { riemann, ricci, ricci_operator, scalar }
}
