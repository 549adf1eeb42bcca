//! Central finite differences on closures over chart points.

use crate::error::{FolstabError, Result};

/// Central difference rule with a per-axis step.
#[derive(Debug, Clone, PartialEq)]
pub struct Fd {
    pub order: usize,
    pub steps: Vec<f64>,
}

const MIN_STEP: f64 = 1e-9;

impl Fd {
    pub fn new(order: usize, steps: Vec<f64>) -> Result<Self> {
        if !matches!(order, 2 | 4 | 6) {
            return Err(FolstabError::Scheme(format!("unsupported order {order}")));
        }
        if let Some(h) = steps.iter().find(|h| !(**h >= MIN_STEP) || !h.is_finite()) {
            return Err(FolstabError::Scheme(format!("step {h:e} underflows")));
        }
        Ok(Fd { order, steps })
    }

    pub fn uniform(order: usize, step: f64, dim: usize) -> Result<Self> {
        Fd::new(order, vec![step; dim])
    }

    fn stencil(&self) -> &'static [(f64, f64)] {
        // (offset in steps, weight); divide by step afterwards.
        match self.order {
            2 => &[(1.0, 0.5), (-1.0, -0.5)],
            4 => &[
                (2.0, -1.0 / 12.0),
                (1.0, 8.0 / 12.0),
                (-1.0, -8.0 / 12.0),
                (-2.0, 1.0 / 12.0),
            ],
            _ => &[
                (3.0, 1.0 / 60.0),
                (2.0, -9.0 / 60.0),
                (1.0, 45.0 / 60.0),
                (-1.0, -45.0 / 60.0),
                (-2.0, 9.0 / 60.0),
                (-3.0, -1.0 / 60.0),
            ],
        }
    }

    /// `∂_axis f(p)` componentwise.
    pub fn partial<F>(&self, f: &F, p: &[f64], axis: usize) -> Vec<f64>
    where
        F: Fn(&[f64]) -> Vec<f64> + ?Sized,
    {
        let h = self.steps[axis];
        let mut q = p.to_vec();
        let mut acc: Vec<f64> = Vec::new();
        for &(off, w) in self.stencil() {
            q[axis] = p[axis] + off * h;
            let v = f(&q);
            if acc.is_empty() {
                acc = vec![0.0; v.len()];
            }
            for (a, b) in acc.iter_mut().zip(&v) {
                *a += w * b;
            }
        }
        acc.iter_mut().for_each(|a| *a /= h);
        acc
    }

    /// All partials: `out[j][k] = ∂_j f_k`.
    pub fn gradient<F>(&self, f: &F, p: &[f64]) -> Vec<Vec<f64>>
    where
        F: Fn(&[f64]) -> Vec<f64> + ?Sized,
    {
        (0..p.len()).map(|j| self.partial(f, p, j)).collect()
    }

    /// Second partial `∂_a ∂_b f` by nesting the first-derivative rule.
    pub fn second_partial<F>(&self, f: &F, p: &[f64], a: usize, b: usize) -> Vec<f64>
    where
        F: Fn(&[f64]) -> Vec<f64> + ?Sized,
    {
        let inner = |q: &[f64]| self.partial(f, q, b);
        self.partial(&inner, p, a)
    }

    pub fn with_steps(&self, steps: Vec<f64>) -> Result<Self> {
        Fd::new(self.order, steps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_are_consistent() {
        let f = |p: &[f64]| vec![p[0].sin() * p[1].exp()];
        let exact = 0.3f64.cos() * 0.2f64.exp();
        for (order, tol) in [(2, 1e-4), (4, 1e-8), (6, 1e-11)] {
            let fd = Fd::uniform(order, 1e-2, 2).unwrap();
            let d = fd.partial(&f, &[0.3, 0.2], 0)[0];
            assert!((d - exact).abs() < tol, "order {order}: {}", d - exact);
        }
    }

    #[test]
    fn second_partial_mixed() {
        let f = |p: &[f64]| vec![p[0] * p[0] * p[1]];
        let fd = Fd::uniform(4, 1e-3, 2).unwrap();
        let d = fd.second_partial(&f, &[0.7, 1.1], 0, 1)[0];
        assert!((d - 1.4).abs() < 1e-8);
    }

    #[test]
    fn rejects_tiny_step() {
        assert!(matches!(Fd::uniform(2, 1e-12, 1), Err(FolstabError::Scheme(_))));
        assert!(Fd::uniform(3, 1e-3, 1).is_err());
    }
}
