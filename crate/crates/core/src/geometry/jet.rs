//! Forward-mode derivatives of chart-level evaluators.
//!
//! Built-in metrics, model maps and immersions are written once, generic over
//! [`Real`], and evaluated either on plain `f64` or on dual numbers.

use num_dual::{Dual2SVec64, DualNum, DualSVec64};

pub trait Real: DualNum<Primitive = f64> + Copy {}
impl<T: DualNum<Primitive = f64> + Copy> Real for T {}

/// A map ℝⁿ → ℝᵐ with an evaluator generic over the scalar type.
pub trait VectorFn {
    fn eval<T: Real>(&self, p: &[T]) -> Vec<T>;
}

/// Value and first derivatives: `grad[k][i] = ∂_i f_k`.
#[derive(Debug, Clone)]
pub struct Jet1 {
    pub value: Vec<f64>,
    pub grad: Vec<Vec<f64>>,
}

/// Value, first and second derivatives: `hess[k][i][j] = ∂_i ∂_j f_k`.
#[derive(Debug, Clone)]
pub struct Jet2 {
    pub value: Vec<f64>,
    pub grad: Vec<Vec<f64>>,
    pub hess: Vec<Vec<Vec<f64>>>,
}

pub const MAX_DIM: usize = 8;

macro_rules! dispatch_dim {
    ($n:expr, $f:ident, $($arg:expr),*) => {
        match $n {
            1 => $f::<_, 1>($($arg),*),
            2 => $f::<_, 2>($($arg),*),
            3 => $f::<_, 3>($($arg),*),
            4 => $f::<_, 4>($($arg),*),
            5 => $f::<_, 5>($($arg),*),
            6 => $f::<_, 6>($($arg),*),
            7 => $f::<_, 7>($($arg),*),
            8 => $f::<_, 8>($($arg),*),
            n => panic!("chart dimension {n} exceeds MAX_DIM"),
        }
    };
}

pub fn jet1<F: VectorFn + ?Sized>(f: &F, p: &[f64]) -> Jet1 {
    dispatch_dim!(p.len(), jet1_n, f, p)
}

pub fn jet2<F: VectorFn + ?Sized>(f: &F, p: &[f64]) -> Jet2 {
    dispatch_dim!(p.len(), jet2_n, f, p)
}

fn jet1_n<F: VectorFn + ?Sized, const N: usize>(f: &F, p: &[f64]) -> Jet1 {
    let x: Vec<DualSVec64<N>> = p
        .iter()
        .enumerate()
        .map(|(i, &v)| DualSVec64::<N>::from_re(v).derivative(i))
        .collect();
    let out = f.eval(&x);
    let mut value = Vec::with_capacity(out.len());
    let mut grad = Vec::with_capacity(out.len());
    for o in out {
        value.push(o.re);
        grad.push(match &o.eps.0 {
            Some(m) => (0..N).map(|i| m[i]).collect(),
            None => vec![0.0; N],
        });
    }
    Jet1 { value, grad }
}

fn jet2_n<F: VectorFn + ?Sized, const N: usize>(f: &F, p: &[f64]) -> Jet2 {
    let x: Vec<Dual2SVec64<N>> = p
        .iter()
        .enumerate()
        .map(|(i, &v)| Dual2SVec64::<N>::from_re(v).derivative(i))
        .collect();
    let out = f.eval(&x);
    let mut value = Vec::with_capacity(out.len());
    let mut grad = Vec::with_capacity(out.len());
    let mut hess = Vec::with_capacity(out.len());
    for o in out {
        value.push(o.re);
        grad.push(match &o.v1.0 {
            Some(m) => (0..N).map(|i| m[i]).collect(),
            None => vec![0.0; N],
        });
        hess.push(match &o.v2.0 {
            Some(m) => (0..N).map(|i| (0..N).map(|j| m[(i, j)]).collect()).collect(),
            None => vec![vec![0.0; N]; N],
        });
    }
    Jet2 { value, grad, hess }
}

#[inline]
pub fn c<T: Real>(x: f64) -> T {
    T::from(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Poly;
    impl VectorFn for Poly {
        fn eval<T: Real>(&self, p: &[T]) -> Vec<T> {
            vec![p[0] * p[0] * p[1], p[1].sin() * p[2]]
        }
    }

    #[test]
    fn polynomial_derivatives() {
        let j = jet2(&Poly, &[2.0, 0.5, 3.0]);
        assert_eq!(j.value[0], 2.0);
        assert_eq!(j.grad[0], vec![2.0, 4.0, 0.0]);
        assert_eq!(j.hess[0][0][1], 4.0);
        assert_eq!(j.hess[0][0][0], 1.0);
        assert!((j.grad[1][1] - 0.5f64.cos() * 3.0).abs() < 1e-15);
        assert!((j.hess[1][1][2] - 0.5f64.cos()).abs() < 1e-15);
        let j1 = jet1(&Poly, &[2.0, 0.5, 3.0]);
        assert_eq!(j1.grad, j.grad);
    }
}
