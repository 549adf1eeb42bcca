//! Closed-form chart models of the built-in spaces.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{FolstabError, Result};
use crate::geometry::chart::{Axis, AxisRule, ChartDomain, DeckMap};
use crate::geometry::jet::{c, jet1, Real, VectorFn};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Model {
    /// `ℝ^d / ⊕ L_k ℤ` with the Euclidean metric.
    FlatTorus { extents: Vec<f64> },
    /// Round `S^n` of the given radius. `n = 3` uses Hopf coordinates
    /// `(η, ξ₁, ξ₂)`, other `n` hyperspherical `(θ₁..θ_{n−1}, φ)`. A nonzero
    /// `lift` shifts the immersion by that amount along an extra axis.
    Sphere { n: usize, radius: f64, lift: f64 },
    /// `(ℂⁿ − 0)/⟨λ⟩` with `g₀ = |dz|²/|z|²` in coordinates
    /// `z_k = λ^s r_k(a) e^{iξ_k}`; `bump ≠ 0` adds `bump·Re(z¹)/|z|·|dz¹|²/|z|²`.
    HopfComplex { n: usize, lambda: f64, bump: f64 },
    /// `ℂP^{n−1}` in the affine chart `[1 : w]`, holomorphic sectional curvature 4.
    FubiniStudy { n: usize },
    /// `dx² + f(x)² dy²` on `[0,1)²`, `f = 1 + amplitude·sin 2πx`.
    WarpedTorus { amplitude: f64 },
    Product(Vec<Model>),
}

impl Model {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FolstabError::Construction(m));
        match self {
            Model::FlatTorus { extents } => {
                if extents.is_empty() || extents.iter().any(|e| !(*e > 0.0)) {
                    return bad(format!("flat torus extents {extents:?}"));
                }
            }
            Model::Sphere { n, radius, .. } => {
                if *n < 1 || !(*radius > 0.0) {
                    return bad(format!("sphere n={n} radius={radius}"));
                }
            }
            Model::HopfComplex { n, lambda, bump } => {
                if *n < 1 || !(*lambda > 1.0) {
                    return bad(format!("hopf manifold needs n ≥ 1 and real λ > 1 (got n={n}, λ={lambda})"));
                }
                if bump.abs() >= 1.0 {
                    return bad(format!("bump amplitude {bump} would make the metric degenerate"));
                }
            }
            Model::FubiniStudy { n } => {
                if *n < 2 {
                    return bad(format!("projective space needs n ≥ 2 (got {n})"));
                }
            }
            Model::WarpedTorus { amplitude } => {
                if amplitude.abs() >= 1.0 {
                    return bad(format!("warping amplitude {amplitude} must be below 1"));
                }
            }
            Model::Product(fs) => {
                if fs.is_empty() {
                    return bad("empty product".into());
                }
                for f in fs {
                    f.validate()?;
                }
            }
        }
        if self.dim() > crate::geometry::jet::MAX_DIM {
            return bad(format!("dimension {} exceeds {}", self.dim(), crate::geometry::jet::MAX_DIM));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::FlatTorus { extents } => extents.len(),
            Model::Sphere { n, .. } => *n,
            Model::HopfComplex { n, .. } => 2 * n,
            Model::FubiniStudy { n } => 2 * (n - 1),
            Model::WarpedTorus { .. } => 2,
            Model::Product(fs) => fs.iter().map(Model::dim).sum(),
        }
    }

    fn axes(&self) -> Vec<Axis> {
        match self {
            Model::FlatTorus { extents } => extents.iter().map(|&e| Axis::periodic(e)).collect(),
            Model::Sphere { n: 1, .. } => vec![Axis::periodic(2.0 * PI)],
            Model::Sphere { n: 3, .. } => {
                vec![Axis::singular(0.0, PI / 2.0), Axis::periodic(2.0 * PI), Axis::periodic(2.0 * PI)]
            }
            Model::Sphere { n, .. } => {
                let mut v: Vec<Axis> = (0..n - 1).map(|_| Axis::singular(0.0, PI)).collect();
                v.push(Axis::periodic(2.0 * PI));
                v
            }
            Model::HopfComplex { n, .. } => {
                let mut v = vec![Axis { lower: 0.0, extent: 1.0, rule: AxisRule::PeriodicWithDeck }];
                v.extend((0..n - 1).map(|_| Axis::singular(0.0, PI / 2.0)));
                v.extend((0..*n).map(|_| Axis::periodic(2.0 * PI)));
                v
            }
            Model::FubiniStudy { n } => (0..2 * (n - 1)).map(|_| Axis::open(-4.0, 8.0)).collect(),
            Model::WarpedTorus { .. } => vec![Axis::periodic(1.0), Axis::periodic(1.0)],
            Model::Product(fs) => fs.iter().flat_map(|f| f.axes()).collect(),
        }
    }

    pub fn chart(&self) -> ChartDomain {
        let axes = self.axes();
        let deck = match self {
            // g₀ is invariant under z ↦ λz, so in quotient coordinates the
            // wraparound in s acts trivially on the other coordinates.
            Model::HopfComplex { .. } => Some(DeckMap::identity(0, axes.len())),
            _ => None,
        };
        ChartDomain::new(axes, deck).expect("built-in chart is valid")
    }

    /// Metric components, row-major `dim × dim`.
    pub fn metric<T: Real>(&self, p: &[T]) -> Vec<T> {
        let d = self.dim();
        let mut g = vec![c::<T>(0.0); d * d];
        self.metric_into(p, &mut g, d, 0);
        g
    }

    fn metric_into<T: Real>(&self, p: &[T], g: &mut [T], stride: usize, off: usize) {
        let mut set = |i: usize, j: usize, v: T| g[(off + i) * stride + off + j] = v;
        match self {
            Model::FlatTorus { extents } => {
                for i in 0..extents.len() {
                    set(i, i, c(1.0));
                }
            }
            Model::Sphere { n, radius, .. } => {
                let r2 = c::<T>(radius * radius);
                if *n == 3 {
                    let (s, co) = p[0].sin_cos();
                    set(0, 0, r2);
                    set(1, 1, r2 * co * co);
                    set(2, 2, r2 * s * s);
                } else {
                    let mut prod = r2;
                    for k in 0..*n {
                        set(k, k, prod);
                        if k + 1 < *n {
                            let s = p[k].sin();
                            prod = prod * s * s;
                        }
                    }
                }
            }
            Model::HopfComplex { n, lambda, bump } => {
                let n = *n;
                let l = lambda.ln();
                set(0, 0, c(l * l));
                let mut h = c::<T>(1.0);
                for k in 0..n - 1 {
                    set(1 + k, 1 + k, h);
                    let s = p[1 + k].sin();
                    h = h * s * s;
                }
                let r = orthant(&p[1..n]);
                for k in 0..n {
                    set(n + k, n + k, r[k] * r[k]);
                }
                if *bump != 0.0 {
                    // h₁ = (r₁ L ds + dr₁)² + r₁² dξ₁², weighted by Re(z¹)/|z|.
                    let b = c::<T>(*bump) * r[0] * p[n].cos();
                    let mut w = vec![c::<T>(0.0); 2 * n];
                    w[0] = r[0] * c::<T>(l);
                    if n >= 2 {
                        w[1] = -p[1].sin();
                    }
                    for i in 0..2 * n {
                        for j in 0..2 * n {
                            let idx = (off + i) * stride + off + j;
                            g[idx] = g[idx] + b * w[i] * w[j];
                        }
                    }
                    let idx = (off + n) * stride + off + n;
                    g[idx] = g[idx] + b * r[0] * r[0];
                }
            }
            Model::FubiniStudy { n } => {
                let m = 2 * (n - 1);
                let mut rho = c::<T>(1.0);
                for x in &p[..m] {
                    rho = rho + *x * *x;
                }
                let jw = rotate(&p[..m]);
                for i in 0..m {
                    for j in 0..m {
                        let delta = if i == j { c::<T>(1.0) } else { c(0.0) };
                        set(i, j, delta / rho - (p[i] * p[j] + jw[i] * jw[j]) / (rho * rho));
                    }
                }
            }
            Model::WarpedTorus { amplitude } => {
                let f = c::<T>(1.0) + c::<T>(*amplitude) * (p[0] * c::<T>(2.0 * PI)).sin();
                set(0, 0, c(1.0));
                set(1, 1, f * f);
            }
            Model::Product(fs) => {
                let mut o = off;
                let mut q = 0;
                for f in fs {
                    let d = f.dim();
                    f.metric_into(&p[q..q + d], g, stride, o);
                    o += d;
                    q += d;
                }
            }
        }
    }

    /// Whether every chart metric component off the diagonal vanishes identically.
    pub fn diagonal_metric(&self) -> bool {
        match self {
            Model::FubiniStudy { .. } => false,
            Model::HopfComplex { bump, .. } => *bump == 0.0,
            Model::Product(fs) => fs.iter().all(Model::diagonal_metric),
            _ => true,
        }
    }

    /// Isometric immersion into Euclidean space, when the model has one.
    pub fn immersion<T: Real>(&self, p: &[T]) -> Option<Vec<T>> {
        match self {
            Model::FlatTorus { extents } => {
                let mut out = Vec::with_capacity(2 * extents.len());
                for (x, &l) in p.iter().zip(extents) {
                    let r = l / (2.0 * PI);
                    let (s, co) = (*x / c::<T>(r)).sin_cos();
                    out.push(co * c::<T>(r));
                    out.push(s * c::<T>(r));
                }
                Some(out)
            }
            Model::Sphere { n, radius, lift } => {
                let mut x = sphere_point(*n, p);
                x.iter_mut().for_each(|v| *v = *v * c::<T>(*radius));
                if *lift != 0.0 {
                    x.push(c(*lift));
                }
                Some(x)
            }
            Model::Product(fs) => {
                let mut out = Vec::new();
                let mut q = 0;
                for f in fs {
                    let d = f.dim();
                    out.extend(f.immersion(&p[q..q + d])?);
                    q += d;
                }
                Some(out)
            }
            _ => None,
        }
    }

    pub fn immersion_dim(&self) -> Option<usize> {
        match self {
            Model::FlatTorus { extents } => Some(2 * extents.len()),
            Model::Sphere { n, lift, .. } => Some(n + 1 + usize::from(*lift != 0.0)),
            Model::Product(fs) => fs.iter().map(Model::immersion_dim).sum(),
            _ => None,
        }
    }

    /// Point in `ℂ^m ≅ ℝ^{2m}` (`z^k = x^{2k−1} + i x^{2k}`) for models that
    /// are built from complex coordinates.
    pub fn complex_point<T: Real>(&self, p: &[T]) -> Option<Vec<T>> {
        match self {
            Model::Sphere { n: 3, radius, .. } => {
                Some(sphere_point(3, p).into_iter().map(|v| v * c::<T>(*radius)).collect())
            }
            Model::HopfComplex { n, lambda, .. } => {
                let n = *n;
                let scale = (p[0] * c::<T>(lambda.ln())).exp();
                let r = orthant(&p[1..n]);
                let mut z = Vec::with_capacity(2 * n);
                for k in 0..n {
                    let (s, co) = p[n + k].sin_cos();
                    z.push(scale * r[k] * co);
                    z.push(scale * r[k] * s);
                }
                Some(z)
            }
            Model::FlatTorus { extents } if extents.len() % 2 == 0 => Some(p.to_vec()),
            Model::FubiniStudy { .. } => Some(p.to_vec()),
            _ => None,
        }
    }

    /// Chart components of the complex structure, `J[(i, j)] = dx^i(J ∂_j)`.
    pub fn complex_structure(&self, p: &[f64]) -> Option<DMatrix<f64>> {
        match self {
            Model::FlatTorus { extents } if extents.len() % 2 == 0 => Some(standard_j(extents.len())),
            Model::FubiniStudy { .. } => Some(standard_j(self.dim())),
            Model::HopfComplex { .. } => {
                let d = self.dim();
                let jet = jet1(&ComplexPointFn(self), p);
                let dphi = DMatrix::from_fn(d, d, |k, j| jet.grad[k][j]);
                let inv = dphi.clone().try_inverse()?;
                Some(inv * standard_j(d) * dphi)
            }
            Model::Product(fs) => {
                let d = self.dim();
                let mut j = DMatrix::zeros(d, d);
                let mut q = 0;
                for f in fs {
                    let k = f.dim();
                    let jf = f.complex_structure(&p[q..q + k])?;
                    j.view_mut((q, q), (k, k)).copy_from(&jf);
                    q += k;
                }
                Some(j)
            }
            _ => None,
        }
    }

    /// Fundamental form `Ω_ij = g(J∂_i, ∂_j)`, row-major, for complex models.
    pub fn fundamental_form<T: Real>(&self, p: &[T]) -> Option<Vec<T>> {
        let d = self.dim();
        let zero = c::<T>(0.0);
        match self {
            Model::FlatTorus { extents } if extents.len() % 2 == 0 => {
                let mut w = vec![zero; d * d];
                for k in 0..d / 2 {
                    w[2 * k * d + 2 * k + 1] = c(1.0);
                    w[(2 * k + 1) * d + 2 * k] = c(-1.0);
                }
                Some(w)
            }
            Model::FubiniStudy { .. } => {
                let g = self.metric(p);
                let mut w = vec![zero; d * d];
                for i in 0..d {
                    for j in 0..d {
                        w[i * d + j] = if i % 2 == 0 { g[(i + 1) * d + j] } else { -g[(i - 1) * d + j] };
                    }
                }
                Some(w)
            }
            Model::HopfComplex { n, lambda, bump } => {
                let m = hopf_jacobian(*n, lambda.ln(), p);
                let z = self.complex_point(p)?;
                let mut nz2 = zero;
                for v in &z {
                    nz2 = nz2 + *v * *v;
                }
                let beta = c::<T>(*bump) * z[0] / nz2.sqrt();
                // U = J₀ᵀ G M with G = (I + β P₁)/|z|².
                let mut u = vec![zero; d * d];
                for r in 0..d {
                    let (src, sign) = if r % 2 == 0 { (r + 1, 1.0) } else { (r - 1, -1.0) };
                    let w = if src < 2 { c::<T>(1.0) + beta } else { c::<T>(1.0) };
                    for j in 0..d {
                        u[r * d + j] = m[src * d + j] * w * c::<T>(sign) / nz2;
                    }
                }
                let mut out = vec![zero; d * d];
                for i in 0..d {
                    for j in 0..d {
                        let mut acc = zero;
                        for r in 0..d {
                            acc = acc + m[r * d + i] * u[r * d + j];
                        }
                        out[i * d + j] = acc;
                    }
                }
                Some(out)
            }
            Model::Product(fs) => {
                let mut out = vec![zero; d * d];
                let mut q = 0;
                for f in fs {
                    let k = f.dim();
                    let w = f.fundamental_form(&p[q..q + k])?;
                    for i in 0..k {
                        for j in 0..k {
                            out[(q + i) * d + q + j] = w[i * k + j];
                        }
                    }
                    q += k;
                }
                Some(out)
            }
            _ => None,
        }
    }

    /// Closed-form Lee form `θ` with `dΩ = θ ∧ Ω`, for models where it is known.
    pub fn lee_form(&self, _p: &[f64]) -> Option<Vec<f64>> {
        match self {
            Model::FlatTorus { extents } if extents.len() % 2 == 0 => Some(vec![0.0; extents.len()]),
            Model::FubiniStudy { .. } => Some(vec![0.0; self.dim()]),
            Model::HopfComplex { n, lambda, bump } if *bump == 0.0 => {
                let mut w = vec![0.0; 2 * n];
                w[0] = -2.0 * lambda.ln();
                Some(w)
            }
            Model::Product(fs) => {
                let mut out = Vec::new();
                let mut q = 0;
                for f in fs {
                    let k = f.dim();
                    let w = f.lee_form(&_p[q..q + k])?;
                    if w.iter().any(|x| *x != 0.0) {
                        return None;
                    }
                    out.extend(w);
                    q += k;
                }
                Some(out)
            }
            _ => None,
        }
    }

    pub fn is_complex(&self) -> bool {
        match self {
            Model::FlatTorus { extents } => extents.len() % 2 == 0,
            Model::FubiniStudy { .. } | Model::HopfComplex { .. } => true,
            Model::Product(fs) => fs.iter().all(Model::is_complex),
            _ => false,
        }
    }

    /// Closed-form Riemannian volume where known.
    pub fn volume(&self) -> Option<f64> {
        match self {
            Model::FlatTorus { extents } => Some(extents.iter().product()),
            Model::Sphere { n, radius, .. } => Some(radius.powi(*n as i32) * unit_sphere_volume(*n)),
            Model::HopfComplex { n, lambda, bump } if *bump == 0.0 => {
                Some(lambda.ln() * unit_sphere_volume(2 * n - 1))
            }
            Model::WarpedTorus { .. } => Some(1.0),
            Model::Product(fs) => fs.iter().map(Model::volume).product(),
            _ => None,
        }
    }

    /// Smooth functions on the manifold, used to build low-frequency test sections.
    pub fn features<T: Real>(&self, p: &[T]) -> Vec<T> {
        let mut out = vec![c::<T>(1.0)];
        self.features_into(p, &mut out);
        out
    }

    fn features_into<T: Real>(&self, p: &[T], out: &mut Vec<T>) {
        match self {
            Model::FlatTorus { extents } => {
                for (x, l) in p.iter().zip(extents) {
                    let (s, co) = (*x * c::<T>(2.0 * PI / l)).sin_cos();
                    out.push(co);
                    out.push(s);
                }
            }
            Model::WarpedTorus { .. } => {
                for x in p {
                    let (s, co) = (*x * c::<T>(2.0 * PI)).sin_cos();
                    out.push(co);
                    out.push(s);
                }
            }
            Model::Sphere { n, .. } => out.extend(sphere_point::<T>(*n, p)),
            Model::HopfComplex { .. } => {
                let z = self.complex_point(p).unwrap();
                let norm = z.iter().fold(c::<T>(0.0), |a, v| a + *v * *v).sqrt();
                let (s, co) = (p[0] * c::<T>(2.0 * PI)).sin_cos();
                let time = [c::<T>(1.0), co, s];
                let space: Vec<T> = std::iter::once(c::<T>(1.0)).chain(z.iter().map(|v| *v / norm)).collect();
                for (i, a) in time.iter().enumerate() {
                    for (j, b) in space.iter().enumerate() {
                        if i + j > 0 {
                            out.push(*a * *b);
                        }
                    }
                }
            }
            Model::FubiniStudy { .. } => {
                let rho = p.iter().fold(c::<T>(1.0), |a, v| a + *v * *v).sqrt();
                out.extend(p.iter().map(|v| *v / rho));
            }
            Model::Product(fs) => {
                let mut q = 0;
                for f in fs {
                    let d = f.dim();
                    f.features_into(&p[q..q + d], out);
                    q += d;
                }
            }
        }
    }
}

fn unit_sphere_volume(n: usize) -> f64 {
    // vol(S^n) = 2π^{(n+1)/2} / Γ((n+1)/2), via the recurrence vol(S^n) = 2π/(n−1)·vol(S^{n−2}).
    match n {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 1.0) * unit_sphere_volume(n - 2),
    }
}

/// `(r_1, …, r_n)` on the positive orthant of `S^{n−1}` from `n − 1` angles.
fn orthant<T: Real>(a: &[T]) -> Vec<T> {
    let n = a.len() + 1;
    let mut r = Vec::with_capacity(n);
    let mut prod = c::<T>(1.0);
    for ak in a {
        let (s, co) = ak.sin_cos();
        r.push(prod * co);
        prod = prod * s;
    }
    r.push(prod);
    r
}

/// Row-major Jacobian `∂z/∂p` of the Hopf-manifold complex coordinates.
fn hopf_jacobian<T: Real>(n: usize, l: f64, p: &[T]) -> Vec<T> {
    let d = 2 * n;
    let zero = c::<T>(0.0);
    let scale = (p[0] * c::<T>(l)).exp();
    let a = &p[1..n];
    let r = orthant(a);
    let (sa, ca): (Vec<T>, Vec<T>) = a.iter().map(|x| x.sin_cos()).unzip();
    // ∂r_k/∂a_m
    let dr = |k: usize, m: usize| -> T {
        if m > k || (m == k && k == n - 1) {
            return zero;
        }
        let mut prod = c::<T>(1.0);
        for i in 0..k {
            prod = prod * if i == m { ca[i] } else { sa[i] };
        }
        if k < n - 1 {
            prod = prod * if m == k { -sa[k] } else { ca[k] };
        }
        prod
    };
    let mut m = vec![zero; d * d];
    for k in 0..n {
        let (s, co) = p[n + k].sin_cos();
        m[2 * k * d] = scale * r[k] * co * c::<T>(l);
        m[(2 * k + 1) * d] = scale * r[k] * s * c::<T>(l);
        for j in 0..n - 1 {
            let v = dr(k, j);
            m[2 * k * d + 1 + j] = scale * v * co;
            m[(2 * k + 1) * d + 1 + j] = scale * v * s;
        }
        m[2 * k * d + n + k] = -scale * r[k] * s;
        m[(2 * k + 1) * d + n + k] = scale * r[k] * co;
    }
    m
}

/// Unit-sphere embedding in the chart conventions of [`Model::Sphere`].
fn sphere_point<T: Real>(n: usize, p: &[T]) -> Vec<T> {
    if n == 3 {
        let (se, ce) = p[0].sin_cos();
        let (s1, c1) = p[1].sin_cos();
        let (s2, c2) = p[2].sin_cos();
        return vec![ce * c1, ce * s1, se * c2, se * s2];
    }
    let mut x = vec![c::<T>(0.0); n + 1];
    let mut s = c::<T>(1.0);
    for k in 0..n - 1 {
        let (sk, ck) = p[k].sin_cos();
        x[n - k] = s * ck;
        s = s * sk;
    }
    let (sf, cf) = p[n - 1].sin_cos();
    x[0] = s * cf;
    x[1] = s * sf;
    x
}

/// Multiplication by `i` on `ℝ^{2m}`.
fn rotate<T: Real>(w: &[T]) -> Vec<T> {
    let mut out = vec![c::<T>(0.0); w.len()];
    for k in 0..w.len() / 2 {
        out[2 * k] = -w[2 * k + 1];
        out[2 * k + 1] = w[2 * k];
    }
    out
}

pub fn standard_j(d: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(d, d);
    for k in 0..d / 2 {
        j[(2 * k + 1, 2 * k)] = 1.0;
        j[(2 * k, 2 * k + 1)] = -1.0;
    }
    j
}

pub struct MetricFn<'a>(pub &'a Model);
impl VectorFn for MetricFn<'_> {
    fn eval<T: Real>(&self, p: &[T]) -> Vec<T> {
        self.0.metric(p)
    }
}

pub struct ImmersionFn<'a>(pub &'a Model);
impl VectorFn for ImmersionFn<'_> {
    fn eval<T: Real>(&self, p: &[T]) -> Vec<T> {
        self.0.immersion(p).expect("model has an immersion")
    }
}

pub struct FundamentalFormFn<'a>(pub &'a Model);
impl VectorFn for FundamentalFormFn<'_> {
    fn eval<T: Real>(&self, p: &[T]) -> Vec<T> {
        self.0.fundamental_form(p).expect("model is complex")
    }
}

pub struct FeaturesFn<'a>(pub &'a Model);
impl VectorFn for FeaturesFn<'_> {
    fn eval<T: Real>(&self, p: &[T]) -> Vec<T> {
        self.0.features(p)
    }
}

pub struct ComplexPointFn<'a>(pub &'a Model);
impl VectorFn for ComplexPointFn<'_> {
    fn eval<T: Real>(&self, p: &[T]) -> Vec<T> {
        self.0.complex_point(p).expect("model has complex coordinates")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::jet::jet1;

    fn pullback(m: &Model, p: &[f64]) -> DMatrix<f64> {
        let j = jet1(&ImmersionFn(m), p);
        let d = m.dim();
        DMatrix::from_fn(d, d, |a, b| j.grad.iter().map(|row| row[a] * row[b]).sum())
    }

    #[test]
    fn immersions_are_isometric() {
        let cases = [
            (Model::Sphere { n: 2, radius: 1.0, lift: 0.0 }, vec![0.7, 2.1]),
            (Model::Sphere { n: 3, radius: 2.0, lift: 0.0 }, vec![0.4, 1.0, 5.0]),
            (Model::Sphere { n: 5, radius: 1.0, lift: 0.3 }, vec![0.4, 1.0, 2.0, 2.5, 4.0]),
            (Model::FlatTorus { extents: vec![1.0, 2.0] }, vec![0.3, 1.7]),
        ];
        for (m, p) in cases {
            let g = DMatrix::from_row_slice(m.dim(), m.dim(), &m.metric(&p));
            assert!((pullback(&m, &p) - g).amax() < 1e-12, "{m:?}");
        }
    }

    #[test]
    fn hopf_metric_matches_g0() {
        let m = Model::HopfComplex { n: 3, lambda: 2.0, bump: 0.0 };
        let p = [0.3, 0.5, 0.9, 1.0, 2.0, 3.0];
        let jet = jet1(&ComplexPointFn(&m), &p);
        let z = m.complex_point(&p).unwrap();
        let nz2: f64 = z.iter().map(|v| v * v).sum();
        let d = m.dim();
        let g0 = DMatrix::from_fn(d, d, |a, b| jet.grad.iter().map(|r| r[a] * r[b]).sum::<f64>() / nz2);
        let g = DMatrix::from_row_slice(d, d, &m.metric(&p));
        assert!((g0 - g).amax() < 1e-12);
    }

    #[test]
    fn hopf_complex_structure_squares_to_minus_one() {
        let m = Model::HopfComplex { n: 2, lambda: 2.0, bump: 0.0 };
        let j = m.complex_structure(&[0.2, 0.6, 1.0, 4.0]).unwrap();
        let id = DMatrix::<f64>::identity(4, 4);
        assert!((&j * &j + id).amax() < 1e-12);
    }

    #[test]
    fn fundamental_form_matches_j_and_g() {
        let cases = [
            (Model::HopfComplex { n: 2, lambda: 2.0, bump: 0.0 }, vec![0.3, 0.7, 1.0, 2.0]),
            (Model::HopfComplex { n: 3, lambda: 3.0, bump: 0.4 }, vec![0.3, 0.5, 0.9, 1.0, 2.0, 3.0]),
            (Model::FubiniStudy { n: 3 }, vec![0.3, -0.2, 0.5, 0.1]),
            (Model::FlatTorus { extents: vec![1.0, 2.0] }, vec![0.1, 0.2]),
        ];
        for (m, p) in cases {
            let d = m.dim();
            let j = m.complex_structure(&p).unwrap();
            let g = DMatrix::from_row_slice(d, d, &m.metric(&p));
            let w = DMatrix::from_row_slice(d, d, &m.fundamental_form(&p).unwrap());
            assert!((j.transpose() * &g - &w).amax() < 1e-12, "{m:?}");
            assert!((&w + w.transpose()).amax() < 1e-12);
        }
    }

    #[test]
    fn hopf_jacobian_matches_jet() {
        let m = Model::HopfComplex { n: 3, lambda: 2.5, bump: 0.0 };
        let p = [0.3, 0.5, 0.9, 1.0, 2.0, 3.0];
        let jet = jet1(&ComplexPointFn(&m), &p);
        let a = hopf_jacobian(3, 2.5f64.ln(), &p);
        for r in 0..6 {
            for k in 0..6 {
                assert!((jet.grad[r][k] - a[r * 6 + k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn volumes() {
        assert!((unit_sphere_volume(3) - 2.0 * PI * PI).abs() < 1e-12);
        assert!((unit_sphere_volume(2) - 4.0 * PI).abs() < 1e-12);
        assert!((unit_sphere_volume(5) - PI.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Model::HopfComplex { n: 2, lambda: 0.5, bump: 0.0 }.validate().is_err());
        assert!(Model::Sphere { n: 0, radius: 1.0, lift: 0.0 }.validate().is_err());
        assert!(Model::FlatTorus { extents: vec![1.0, -1.0] }.validate().is_err());
    }
}
