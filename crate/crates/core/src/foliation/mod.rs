//! The normal bundle `Q`, the adapted connection on it and its curvature.
//!
//! Everything is expressed in an adapted orthonormal frame `e_1..e_n` whose
//! first `p` vectors span the leaves; normal sections are stored by their
//! components on `e_{p+1}..e_n`, so `g_Q` is the identity and `π` is the
//! orthogonal projection onto the last `q` frame coordinates.

pub mod diagnostics;
pub mod section;

use nalgebra::{DMatrix, DVector};

use crate::error::{FolstabError, Result};
use crate::geometry::fd::Fd;
use crate::geometry::metric::Christoffel;
use crate::manifolds::foliation::{build_foliation, BuiltinFoliation, FoliationKind};
use crate::manifolds::space::BuiltinSpace;

pub use section::{NormalSection, SmoothSection};

/// How derivatives of frames, `J` and derived fields are taken.
#[derive(Debug, Clone, PartialEq)]
pub enum Scheme {
    /// Fourth-order differences with step `1e−3`; accurate to about `1e−10`.
    Fine,
    /// Second-order differences with the given per-axis step, normally one grid cell.
    Grid(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct FoliatedSpace {
    pub foliation: BuiltinFoliation,
    pub scheme: Scheme,
}

/// Adapted orthonormal frame at a point; column `a` of `e` holds `e_a` in chart components.
#[derive(Debug, Clone)]
pub struct Frame {
    pub g: DMatrix<f64>,
    pub e: DMatrix<f64>,
    pub p: usize,
}

impl Frame {
    pub fn dim(&self) -> usize {
        self.e.ncols()
    }

    pub fn codim(&self) -> usize {
        self.dim() - self.p
    }

    pub fn normal(&self, alpha: usize) -> DVector<f64> {
        self.e.column(self.p + alpha).into_owned()
    }

    /// `π(X)` as components on the normal frame.
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        let gx = &self.g * x;
        DVector::from_fn(self.codim(), |b, _| self.e.column(self.p + b).dot(&gx))
    }

    /// `σ(S)`, the chart vector of a normal section value.
    pub fn lift(&self, s: &DVector<f64>) -> DVector<f64> {
        self.e.columns(self.p, self.codim()) * s
    }

    /// Frame components of a chart vector.
    pub fn coords(&self, x: &DVector<f64>) -> DVector<f64> {
        self.e.transpose() * (&self.g * x)
    }

    /// `g(∂_j, e_i)` for all `j, i`.
    pub fn dual(&self) -> DMatrix<f64> {
        &self.g * &self.e
    }

    /// Normal block `g(T e_{p+α}, e_{p+β})` of a chart endomorphism `T`.
    pub fn normal_block(&self, t: &DMatrix<f64>) -> DMatrix<f64> {
        let q = self.codim();
        let en = self.e.columns(self.p, q);
        en.transpose() * &self.g * t * en
    }
}

/// First-order data of the adapted connection at a point.
#[derive(Debug, Clone)]
pub struct ConnectionAt {
    pub point: Vec<f64>,
    pub frame: Frame,
    pub gamma: Christoffel,
    /// `levi[j][(b, a)] = g(∇^N_{∂_j} e_a, e_b)`.
    pub levi: Vec<DMatrix<f64>>,
    /// Connection matrices: `∇_{∂_j} S = ∂_j S + omega[j]·S` on normal components.
    pub omega: Vec<DMatrix<f64>>,
}

impl ConnectionAt {
    /// `g(∇^N_X e_a, e_b)` for a chart vector `X`.
    pub fn levi_along(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let d = self.frame.dim();
        let mut out = DMatrix::zeros(d, d);
        for (j, l) in self.levi.iter().enumerate() {
            out += l * x[j];
        }
        out
    }

    /// Connection matrix along a chart vector.
    pub fn omega_along(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let q = self.frame.codim();
        let mut out = DMatrix::zeros(q, q);
        for (j, w) in self.omega.iter().enumerate() {
            out += w * x[j];
        }
        out
    }

    /// `∇_X S` from the chart derivatives `ds[j] = ∂_j S` of the components.
    pub fn covariant(&self, x: &DVector<f64>, s: &DVector<f64>, ds: &[DVector<f64>]) -> DVector<f64> {
        let mut out = self.omega_along(x) * s;
        for (j, dj) in ds.iter().enumerate() {
            out += dj * x[j];
        }
        out
    }

    /// `Γ_j` as the matrix `(Γ_j)[(k, m)] = Γ^k_{jm}`.
    pub fn gamma_matrix(&self, j: usize) -> DMatrix<f64> {
        let d = self.frame.dim();
        DMatrix::from_fn(d, d, |k, m| self.gamma[k][(j, m)])
    }
}

/// Curvature of the adapted connection at a point.
#[derive(Debug, Clone)]
pub struct NormalCurvatureAt {
    pub connection: ConnectionAt,
    /// `r[j][k] = R^∇(∂_j, ∂_k)` acting on normal components.
    pub r: Vec<Vec<DMatrix<f64>>>,
}

impl NormalCurvatureAt {
    pub fn apply(&self, x: &DVector<f64>, y: &DVector<f64>) -> DMatrix<f64> {
        let q = self.connection.frame.codim();
        let mut out = DMatrix::zeros(q, q);
        for (j, row) in self.r.iter().enumerate() {
            for (k, m) in row.iter().enumerate() {
                let c = x[j] * y[k];
                if c != 0.0 {
                    out += m * c;
                }
            }
        }
        out
    }

    /// `R^∇(e_a, e_b)` for adapted frame indices.
    pub fn frame_pair(&self, a: usize, b: usize) -> DMatrix<f64> {
        let e = &self.connection.frame.e;
        self.apply(&e.column(a).into_owned(), &e.column(b).into_owned())
    }

    /// `P^∇(U, V)S = −R^∇(U, S)V` on normal frame indices, as components.
    pub fn p_tensor(&self, u: usize, v: usize, s: usize) -> DVector<f64> {
        let p = self.connection.frame.p;
        -self.frame_pair(p + u, p + s).column(v).into_owned()
    }

    /// `ρ_∇ = Σ_α R^∇(·, e_α)e_α` as a `q × q` matrix on normal components.
    pub fn ricci(&self) -> DMatrix<f64> {
        let q = self.connection.frame.codim();
        let mut rho = DMatrix::zeros(q, q);
        for g in 0..q {
            for a in 0..q {
                let col = -self.p_tensor(g, a, a);
                for b in 0..q {
                    rho[(b, g)] += col[b];
                }
            }
        }
        rho
    }

    /// `S^∇`, the trace of `ρ_∇`.
    pub fn scalar(&self) -> f64 {
        self.ricci().trace()
    }
}

impl FoliatedSpace {
    pub fn new(space: &BuiltinSpace, kind: &FoliationKind, scheme: Scheme) -> Result<Self> {
        let foliation = build_foliation(space, kind)?;
        FoliatedSpace::from_foliation(foliation, scheme)
    }

    pub fn from_foliation(foliation: BuiltinFoliation, scheme: Scheme) -> Result<Self> {
        if let Scheme::Grid(h) = &scheme {
            if h.len() != foliation.space.dim() {
                return Err(FolstabError::Scheme(format!("{} grid steps for dimension {}", h.len(), foliation.space.dim())));
            }
            Fd::new(2, h.clone())?;
        }
        Ok(FoliatedSpace { foliation, scheme })
    }

    pub fn with_scheme(&self, scheme: Scheme) -> Result<Self> {
        FoliatedSpace::from_foliation(self.foliation.clone(), scheme)
    }

    pub fn space(&self) -> &BuiltinSpace {
        &self.foliation.space
    }

    pub fn dim(&self) -> usize {
        self.foliation.space.dim()
    }

    pub fn leaf_dim(&self) -> usize {
        self.foliation.leaf_dim
    }

    pub fn codim(&self) -> usize {
        self.foliation.codim
    }

    /// Difference rule at `p`, shrunk near singular chart ends.
    pub fn fd_at(&self, p: &[f64]) -> Fd {
        let dist = self.space().chart.singular_distance(p);
        let (order, steps): (usize, Vec<f64>) = match &self.scheme {
            Scheme::Fine => (4, dist.iter().map(|d| (d / 100.0).min(1e-3)).collect()),
            Scheme::Grid(h) => (2, h.iter().zip(&dist).map(|(h, d)| h.min(d / 2.0)).collect()),
        };
        Fd { order, steps }
    }

    /// Gram–Schmidt on the built-in frame fields, leaf block first.
    pub fn frame(&self, p: &[f64]) -> Result<Frame> {
        let g = self.space().metric_at(p)?;
        let (leaf, normal) = self.foliation.raw_frame(p);
        let pdim = leaf.len();
        let mut cols: Vec<DVector<f64>> = Vec::with_capacity(self.dim());
        for v in leaf.into_iter().chain(normal) {
            let mut w = v;
            for _ in 0..2 {
                for u in &cols {
                    let c = u.dot(&(&g * &w));
                    w -= u * c;
                }
            }
            let n2 = w.dot(&(&g * &w));
            if !(n2 > 1e-20) {
                return Err(FolstabError::Structure(format!("frame fields are dependent at {p:?}")));
            }
            cols.push(w / n2.sqrt());
        }
        if cols.len() != self.dim() {
            return Err(FolstabError::Structure(format!("frame has {} vectors in dimension {}", cols.len(), self.dim())));
        }
        Ok(Frame { g, e: DMatrix::from_columns(&cols), p: pdim })
    }

    pub fn project(&self, x: &DVector<f64>, p: &[f64]) -> Result<DVector<f64>> {
        Ok(self.frame(p)?.project(x))
    }

    /// Frame columns flattened, for differencing.
    fn frame_flat(&self, p: &[f64]) -> Vec<f64> {
        match self.frame(p) {
            Ok(f) => f.e.as_slice().to_vec(),
            Err(_) => vec![f64::NAN; self.dim() * self.dim()],
        }
    }

    /// Chart derivatives `∂_j e_a` of the adapted frame.
    pub fn frame_derivatives(&self, p: &[f64]) -> Vec<DMatrix<f64>> {
        let d = self.dim();
        let fd = self.fd_at(p);
        let f = |q: &[f64]| self.frame_flat(q);
        (0..d).map(|j| DMatrix::from_column_slice(d, d, &fd.partial(&f, p, j))).collect()
    }

    pub fn connection(&self, p: &[f64]) -> Result<ConnectionAt> {
        let frame = self.frame(p)?;
        let gamma = self.space().metric.christoffel(p)?;
        let de = self.frame_derivatives(p);
        Ok(assemble_connection(p, frame, gamma, &de))
    }

    pub fn omega(&self, p: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        Ok(self.connection(p)?.omega)
    }

    /// `R^∇(∂_j, ∂_k) = ∂_jω_k − ∂_kω_j + [ω_j, ω_k]`.
    pub fn curvature(&self, p: &[f64]) -> Result<NormalCurvatureAt> {
        let conn = self.connection(p)?;
        let d = self.dim();
        let q = self.codim();
        let fd = self.fd_at(p);
        let flat = |x: &[f64]| -> Vec<f64> {
            match self.omega(x) {
                Ok(w) => w.iter().flat_map(|m| m.as_slice().to_vec()).collect(),
                Err(_) => vec![f64::NAN; d * q * q],
            }
        };
        // domega[j][k] = ∂_j ω_k
        let domega: Vec<Vec<DMatrix<f64>>> = (0..d)
            .map(|j| {
                let v = fd.partial(&flat, p, j);
                (0..d).map(|k| DMatrix::from_column_slice(q, q, &v[k * q * q..(k + 1) * q * q])).collect()
            })
            .collect();
        if domega.iter().flatten().any(|m| m.iter().any(|x| !x.is_finite())) {
            return Err(FolstabError::Resolution(format!("curvature stencil leaves the chart at {p:?}")));
        }
        let w = &conn.omega;
        let r = (0..d)
            .map(|j| {
                (0..d)
                    .map(|k| &domega[j][k] - &domega[k][j] + &w[j] * &w[k] - &w[k] * &w[j])
                    .collect()
            })
            .collect();
        Ok(NormalCurvatureAt { connection: conn, r })
    }

    pub fn ricci_operator(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.curvature(p)?.ricci())
    }

    /// `∇_X S` for a normal section given by its components as a function of the point.
    pub fn adapted_connection<F>(&self, x: &DVector<f64>, s: &F, p: &[f64]) -> Result<DVector<f64>>
    where
        F: Fn(&[f64]) -> DVector<f64>,
    {
        let conn = self.connection(p)?;
        let fd = self.fd_at(p);
        let f = |q: &[f64]| s(q).as_slice().to_vec();
        let ds: Vec<DVector<f64>> = (0..self.dim()).map(|j| DVector::from_vec(fd.partial(&f, p, j))).collect();
        Ok(conn.covariant(x, &s(p), &ds))
    }
}

/// Connection matrices from the frame, its derivatives and the Christoffel symbols.
///
/// `ω_j[β][α] = g(∇^N_{∂_j} e_α, e_β) − Σ_i g(∂_j, e_i)·g(∇^N_{e_α} e_i, e_β)`,
/// the second term summing over leaf vectors. This is the normal branch of the
/// connection along the normal part of `∂_j` and `π[X_L, σS]` along its leaf part.
pub fn assemble_connection(p: &[f64], frame: Frame, gamma: Christoffel, de: &[DMatrix<f64>]) -> ConnectionAt {
    let d = frame.dim();
    let pl = frame.p;
    let q = d - pl;
    let ge = &frame.g * &frame.e;
    let levi: Vec<DMatrix<f64>> = (0..d)
        .map(|j| {
            let gj = DMatrix::from_fn(d, d, |k, m| gamma[k][(j, m)]);
            let dj = &de[j] + gj * &frame.e;
            ge.transpose() * dj
        })
        .collect();
    // along[a][(b, c)] = g(∇_{e_a} e_c, e_b)
    let along: Vec<DMatrix<f64>> = (0..d)
        .map(|a| {
            let mut m = DMatrix::zeros(d, d);
            for (j, l) in levi.iter().enumerate() {
                let c = frame.e[(j, a)];
                if c != 0.0 {
                    m += l * c;
                }
            }
            m
        })
        .collect();
    let omega = (0..d)
        .map(|j| {
            DMatrix::from_fn(q, q, |b, a| {
                let mut v = levi[j][(pl + b, pl + a)];
                for i in 0..pl {
                    v -= ge[(j, i)] * along[pl + a][(pl + b, i)];
                }
                v
            })
        })
        .collect();
    ConnectionAt { point: p.to_vec(), frame, gamma, levi, omega }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::space::{build_space, SpaceId};

    fn fs(space: &str, fol: &str) -> FoliatedSpace {
        let s = build_space(&SpaceId::parse(space).unwrap()).unwrap();
        FoliatedSpace::new(&s, &FoliationKind::parse(fol).unwrap(), Scheme::Fine).unwrap()
    }

    #[test]
    fn frame_is_orthonormal() {
        for (s, f, p) in [
            ("hopf_s3_fibration", "hopf", vec![0.4, 1.0, 2.0]),
            ("hopf_complex:n=2,lambda=2", "fibration", vec![0.3, 0.7, 1.0, 4.0]),
            ("hopf_complex:n=3,lambda=2", "fibration", vec![0.3, 0.7, 0.5, 1.0, 4.0, 2.0]),
            ("warped_torus:amplitude=0.3", "warped_circles", vec![0.2, 0.5]),
        ] {
            let fr = fs(s, f).frame(&p).unwrap();
            let gram = fr.e.transpose() * &fr.g * &fr.e;
            assert!((gram - DMatrix::identity(fr.dim(), fr.dim())).amax() < 1e-10, "{s}");
        }
    }

    #[test]
    fn projection_basics() {
        let f = fs("flat_torus:dims=2,extents=1x1", "linear");
        let fr = f.frame(&[0.3, 0.2]).unwrap();
        let x = DVector::from_vec(vec![3.0, 4.0]);
        assert_eq!(fr.project(&x)[0], 3.0);
        assert_eq!(fr.project(&fr.e.column(0).into_owned())[0], 0.0);
    }

    #[test]
    fn flat_connection_vanishes() {
        let f = fs("flat_torus:dims=2,extents=1x1", "linear");
        let w = f.omega(&[0.3, 0.2]).unwrap();
        assert!(w.iter().all(|m| m.amax() < 1e-12));
    }

    #[test]
    fn hopf_base_curvature() {
        // The base of S³ → S²(1/2) has curvature 4, so ρ_∇ = 4·id.
        let f = fs("hopf_s3_fibration", "hopf");
        let rho = f.ricci_operator(&[0.6, 1.1, 2.3]).unwrap();
        assert!((rho - DMatrix::identity(2, 2) * 4.0).amax() < 1e-6);
    }
}
