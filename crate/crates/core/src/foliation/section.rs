use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FolstabError, Result};
use crate::geometry::grid::QuadratureGrid;
use crate::geometry::jet::jet1;
use crate::manifolds::model::{FeaturesFn, Model};

use super::FoliatedSpace;

/// A normal section sampled on grid nodes, `q` frame components per node.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalSection {
    pub q: usize,
    pub data: Vec<f64>,
}

impl NormalSection {
    pub fn zeros(q: usize, nodes: usize) -> Self {
        NormalSection { q, data: vec![0.0; q * nodes] }
    }

    pub fn from_fn<F: Fn(&[f64]) -> DVector<f64>>(grid: &QuadratureGrid, q: usize, f: F) -> Result<Self> {
        let mut data = Vec::with_capacity(q * grid.len());
        for i in 0..grid.len() {
            let v = f(&grid.node(i));
            if v.len() != q {
                return Err(FolstabError::Input(format!("section value has {} components, expected {q}", v.len())));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(FolstabError::NonFiniteField { node: i });
            }
            data.extend(v.iter());
        }
        Ok(NormalSection { q, data })
    }

    pub fn nodes(&self) -> usize {
        self.data.len() / self.q.max(1)
    }

    pub fn at(&self, node: usize) -> DVector<f64> {
        DVector::from_column_slice(&self.data[node * self.q..(node + 1) * self.q])
    }

    pub fn as_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.data)
    }

    /// `∫ g_Q(S, T) v_M` by nodal quadrature.
    pub fn inner(&self, other: &NormalSection, grid: &QuadratureGrid) -> f64 {
        grid.weights
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let a = &self.data[i * self.q..(i + 1) * self.q];
                let b = &other.data[i * self.q..(i + 1) * self.q];
                w * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
            })
            .sum()
    }

    pub fn norm2(&self, grid: &QuadratureGrid) -> f64 {
        self.inner(self, grid)
    }

    pub fn scale(&self, c: f64) -> Self {
        NormalSection { q: self.q, data: self.data.iter().map(|x| x * c).collect() }
    }
}

/// A smooth normal section `S = π(Σ_{a,j} C_{aj} φ_j ∇φ_a)` with `φ` the
/// model's feature functions. Smooth wherever the foliation is, independently
/// of chart or frame singularities.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothSection {
    pub coeffs: DMatrix<f64>,
}

impl SmoothSection {
    /// Uniform coefficients in `[−1, 1]`, damped for higher features.
    pub fn random(model: &Model, seed: u64, probe: &[f64]) -> Self {
        let m = model.features(probe).len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let damp = |j: usize| 1.0 / (1.0 + (j as f64).sqrt());
        let coeffs = DMatrix::from_fn(m - 1, m, |a, j| damp(a) * damp(j) * rng.random_range(-1.0..1.0));
        SmoothSection { coeffs }
    }

    /// Chart components of the unprojected field `Σ C_{aj} φ_j ∇φ_a`.
    pub fn field(&self, fs: &FoliatedSpace, p: &[f64]) -> Result<DVector<f64>> {
        let jet = jet1(&FeaturesFn(&fs.space().model), p);
        let ginv = fs.space().metric_at(p)?.try_inverse().expect("positive-definite metric");
        let phi = DVector::from_column_slice(&jet.value);
        let w = &self.coeffs * phi;
        let mut df = DVector::zeros(p.len());
        for (a, wa) in w.iter().enumerate() {
            df += DVector::from_column_slice(&jet.grad[a + 1]) * *wa;
        }
        Ok(ginv * df)
    }

    pub fn eval(&self, fs: &FoliatedSpace, p: &[f64]) -> Result<DVector<f64>> {
        Ok(fs.frame(p)?.project(&self.field(fs, p)?))
    }

    /// `eval` with NaN components on failure, for use inside stencils.
    pub fn eval_or_nan(&self, fs: &FoliatedSpace, p: &[f64]) -> DVector<f64> {
        self.eval(fs, p).unwrap_or_else(|_| DVector::from_element(fs.codim(), f64::NAN))
    }

    pub fn sample(&self, fs: &FoliatedSpace, grid: &QuadratureGrid) -> Result<NormalSection> {
        NormalSection::from_fn(grid, fs.codim(), |p| self.eval_or_nan(fs, p))
    }
}
