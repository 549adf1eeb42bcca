//! Spaces with closed-form geodesics, in their natural ambient coordinates.
//!
//! Flat tori use chart coordinates, spheres unit vectors of `ℝ^{n+1}`, and
//! `ℂP^{n−1}` unit representatives in `ℂ^n ≅ ℝ^{2n}` (tangent vectors are
//! horizontal lifts, the metric has holomorphic sectional curvature 4).

use serde::Serialize;

use crate::error::{FolstabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum GeodesicSpace {
    FlatTorus { extents: Vec<f64> },
    Sphere { n: usize },
    ProjectiveFs { n: usize },
    Point,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `i·v` on `ℝ^{2n}`.
pub fn times_i(v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for k in 0..v.len() / 2 {
        out[2 * k] = -v[2 * k + 1];
        out[2 * k + 1] = v[2 * k];
    }
    out
}

/// Hermitian product `⟨a, b⟩ = Σ a_k conj(b_k)` as (re, im).
pub fn hermitian(a: &[f64], b: &[f64]) -> (f64, f64) {
    (dot(a, b), dot(a, &times_i(b)))
}

impl GeodesicSpace {
    pub fn dim(&self) -> usize {
        match self {
            GeodesicSpace::FlatTorus { extents } => extents.len(),
            GeodesicSpace::Sphere { n } => *n,
            GeodesicSpace::ProjectiveFs { n } => 2 * (n - 1),
            GeodesicSpace::Point => 0,
        }
    }

    /// Remove the components of `v` that are not tangent at `base`.
    pub fn tangent_part(&self, base: &[f64], v: &[f64]) -> Vec<f64> {
        match self {
            GeodesicSpace::FlatTorus { .. } | GeodesicSpace::Point => v.to_vec(),
            GeodesicSpace::Sphere { .. } => {
                let a = dot(base, v);
                v.iter().zip(base).map(|(x, b)| x - a * b).collect()
            }
            GeodesicSpace::ProjectiveFs { .. } => {
                let ib = times_i(base);
                let a = dot(base, v);
                let c = dot(&ib, v);
                v.iter().zip(base.iter().zip(&ib)).map(|(x, (b, j))| x - a * b - c * j).collect()
            }
        }
    }

    pub fn exp(&self, base: &[f64], v: &[f64]) -> Vec<f64> {
        match self {
            GeodesicSpace::FlatTorus { extents } => base
                .iter()
                .zip(v)
                .zip(extents)
                .map(|((b, x), l)| (b + x).rem_euclid(*l))
                .collect(),
            GeodesicSpace::Point => base.to_vec(),
            GeodesicSpace::Sphere { .. } | GeodesicSpace::ProjectiveFs { .. } => {
                let w = self.tangent_part(base, v);
                let len = dot(&w, &w).sqrt();
                if len == 0.0 {
                    return base.to_vec();
                }
                let (s, c) = len.sin_cos();
                base.iter().zip(&w).map(|(b, x)| c * b + s * x / len).collect()
            }
        }
    }

    /// Squared chord length in an isometric-at-first-order embedding; agrees
    /// with the squared geodesic distance to fourth order at short range.
    pub fn chord2(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            GeodesicSpace::FlatTorus { extents } => a
                .iter()
                .zip(b)
                .zip(extents)
                .map(|((x, y), l)| {
                    let d = (x - y).rem_euclid(*l);
                    let d = d.min(l - d);
                    d * d
                })
                .sum(),
            GeodesicSpace::Sphere { .. } => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum(),
            GeodesicSpace::ProjectiveFs { .. } => {
                // |P(a) − P(b)|²_F with P(z) = z z*/√2.
                let (re, im) = hermitian(a, b);
                1.0 - (re * re + im * im)
            }
            GeodesicSpace::Point => 0.0,
        }
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            GeodesicSpace::FlatTorus { .. } => self.chord2(a, b).sqrt(),
            GeodesicSpace::Sphere { .. } => dot(a, b).clamp(-1.0, 1.0).acos(),
            GeodesicSpace::ProjectiveFs { .. } => {
                let (re, im) = hermitian(a, b);
                (re * re + im * im).sqrt().min(1.0).acos()
            }
            GeodesicSpace::Point => 0.0,
        }
    }

    pub fn check_point(&self, p: &[f64]) -> Result<()> {
        let expected = match self {
            GeodesicSpace::FlatTorus { extents } => extents.len(),
            GeodesicSpace::Sphere { n } => n + 1,
            GeodesicSpace::ProjectiveFs { n } => 2 * n,
            GeodesicSpace::Point => 0,
        };
        if p.len() != expected {
            return Err(FolstabError::Input(format!("point has {} coordinates, expected {expected}", p.len())));
        }
        Ok(())
    }
}

/// Unit representative of the affine chart point `[1 : w]`.
pub fn affine_to_representative(w: &[f64]) -> Vec<f64> {
    let rho = (1.0 + dot(w, w)).sqrt();
    let mut u = vec![1.0 / rho, 0.0];
    u.extend(w.iter().map(|x| x / rho));
    u
}

/// Affine chart coordinates `w_k = u_k / u_0` of a representative with `u_0 ≠ 0`.
pub fn representative_to_affine(u: &[f64]) -> Result<Vec<f64>> {
    let (a, b) = (u[0], u[1]);
    let d = a * a + b * b;
    if d < 1e-24 {
        return Err(FolstabError::Input("point lies outside the affine chart".into()));
    }
    let mut w = Vec::with_capacity(u.len() - 2);
    for k in 1..u.len() / 2 {
        let (x, y) = (u[2 * k], u[2 * k + 1]);
        w.push((x * a + y * b) / d);
        w.push((y * a - x * b) / d);
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn torus_wraps() {
        let t = GeodesicSpace::FlatTorus { extents: vec![1.0, 1.0] };
        let q = t.exp(&[0.9, 0.0], &[0.2, 0.0]);
        assert!((q[0] - 0.1).abs() < 1e-12 && q[1] == 0.0);
        assert_eq!(t.exp(&[0.3, 0.4], &[0.0, 0.0]), vec![0.3, 0.4]);
    }

    #[test]
    fn sphere_quarter_turn_reaches_equator() {
        let s = GeodesicSpace::Sphere { n: 2 };
        let q = s.exp(&[0.0, 0.0, 1.0], &[PI / 2.0, 0.0, 0.0]);
        assert!(q[2].abs() < 1e-15 && (q[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn projective_geodesic_has_constant_speed() {
        let s = GeodesicSpace::ProjectiveFs { n: 2 };
        let u = affine_to_representative(&[0.3, -0.2]);
        let v = s.tangent_part(&u, &[0.1, 0.4, -0.3, 0.2]);
        let speed = dot(&v, &v).sqrt();
        let dt = 1e-4;
        for t in [0.0, 0.3, 1.1] {
            let a = s.exp(&u, &v.iter().map(|x| x * t).collect::<Vec<_>>());
            let b = s.exp(&u, &v.iter().map(|x| x * (t + dt)).collect::<Vec<_>>());
            assert!((s.distance(&a, &b) / dt - speed).abs() < 1e-6);
        }
    }

    #[test]
    fn affine_round_trip() {
        let w = [0.4, -1.3, 2.0, 0.1];
        let back = representative_to_affine(&affine_to_representative(&w)).unwrap();
        for (a, b) in w.iter().zip(&back) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
