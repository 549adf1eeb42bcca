//! Cell-centred tensor grids over a chart with metric volume weights.

use crate::error::{FolstabError, Result};
use crate::geometry::chart::ChartDomain;
use crate::geometry::metric::MetricField;

#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub chart: ChartDomain,
    pub res: Vec<usize>,
    pub h: Vec<f64>,
    pub weights: Vec<f64>,
    strides: Vec<usize>,
}

impl QuadratureGrid {
    /// Nodes sit at cell centres, so no node lies on an end of an open axis.
    pub fn new(chart: &ChartDomain, metric: &MetricField, res: &[usize]) -> Result<Self> {
        if res.len() != chart.dim() {
            return Err(FolstabError::Resolution(format!(
                "resolution has {} axes, chart has {}",
                res.len(),
                chart.dim()
            )));
        }
        if res.iter().any(|&r| r < 2) {
            return Err(FolstabError::Resolution(format!("resolution {res:?} too coarse")));
        }
        let h: Vec<f64> = chart.axes.iter().zip(res).map(|(a, &r)| a.extent / r as f64).collect();
        let mut strides = vec![1; res.len()];
        for k in 1..res.len() {
            strides[k] = strides[k - 1] * res[k - 1];
        }
        let mut grid = QuadratureGrid { chart: chart.clone(), res: res.to_vec(), h, weights: Vec::new(), strides };
        let cell: f64 = grid.h.iter().product();
        let mut weights = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let g = metric.value(&grid.node(i))?;
            weights.push(g.determinant().sqrt() * cell);
        }
        grid.weights = weights;
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.res.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.res.len()
    }

    pub fn multi_index(&self, i: usize) -> Vec<usize> {
        self.res.iter().zip(&self.strides).map(|(&r, &s)| (i / s) % r).collect()
    }

    pub fn index(&self, mi: &[usize]) -> usize {
        mi.iter().zip(&self.strides).map(|(a, b)| a * b).sum()
    }

    pub fn node(&self, i: usize) -> Vec<f64> {
        self.multi_index(i)
            .iter()
            .zip(&self.chart.axes)
            .zip(&self.h)
            .map(|((&k, a), h)| a.lower + (k as f64 + 0.5) * h)
            .collect()
    }

    /// Neighbour one step up along `axis`; `None` past the end of an open axis.
    /// The flag reports a periodic wraparound.
    pub fn neighbour(&self, i: usize, axis: usize) -> Option<(usize, bool)> {
        let mut mi = self.multi_index(i);
        mi[axis] += 1;
        if mi[axis] < self.res[axis] {
            return Some((self.index(&mi), false));
        }
        if self.chart.axes[axis].is_periodic() {
            mi[axis] = 0;
            Some((self.index(&mi), true))
        } else {
            None
        }
    }

    pub fn h_max(&self) -> f64 {
        self.h.iter().cloned().fold(0.0, f64::max)
    }

    pub fn volume(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, f: &[f64]) -> Result<f64> {
        if f.len() != self.len() {
            return Err(FolstabError::Input(format!("{} samples for {} nodes", f.len(), self.len())));
        }
        let mut acc = 0.0;
        for (node, (w, v)) in self.weights.iter().zip(f).enumerate() {
            if !v.is_finite() {
                return Err(FolstabError::NonFiniteField { node });
            }
            acc += w * v;
        }
        Ok(acc)
    }

    pub fn integrate_fn<F: Fn(&[f64]) -> f64>(&self, f: F) -> Result<f64> {
        let samples: Vec<f64> = (0..self.len()).map(|i| f(&self.node(i))).collect();
        self.integrate(&samples)
    }
}
