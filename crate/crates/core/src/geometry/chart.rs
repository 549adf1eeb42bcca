use nalgebra::{DMatrix, DVector};
use rand::RngExt;
use serde::Serialize;

use crate::error::{FolstabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AxisRule {
    Periodic,
    /// Periodic, but crossing the upper end applies the chart's deck map to
    /// the remaining coordinates.
    PeriodicWithDeck,
    /// Bounded interval; `singular` marks a coordinate singularity at both ends
    /// (poles, orthant boundaries) rather than a genuine boundary.
    Open { singular: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub lower: f64,
    pub extent: f64,
    pub rule: AxisRule,
}

impl Axis {
    pub fn periodic(extent: f64) -> Self {
        Axis { lower: 0.0, extent, rule: AxisRule::Periodic }
    }
    pub fn singular(lower: f64, extent: f64) -> Self {
        Axis { lower, extent, rule: AxisRule::Open { singular: true } }
    }
    pub fn open(lower: f64, extent: f64) -> Self {
        Axis { lower, extent, rule: AxisRule::Open { singular: false } }
    }
    pub fn is_periodic(&self) -> bool {
        matches!(self.rule, AxisRule::Periodic | AxisRule::PeriodicWithDeck)
    }
}

/// Affine map `y ↦ A y + b` on the coordinates other than the deck axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeckMap {
    pub axis: usize,
    pub linear: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
}

impl DeckMap {
    pub fn identity(axis: usize, dim: usize) -> Self {
        let m = dim - 1;
        let linear = (0..m)
            .map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        DeckMap { axis, linear, offset: vec![0.0; m] }
    }

    fn matrix(&self) -> DMatrix<f64> {
        let m = self.offset.len();
        DMatrix::from_fn(m, m, |i, j| self.linear[i][j])
    }

    /// Apply to the cross-section slice (coordinates with `axis` removed).
    pub fn apply_slice(&self, y: &[f64]) -> Vec<f64> {
        let v = self.matrix() * DVector::from_column_slice(y) + DVector::from_column_slice(&self.offset);
        v.iter().copied().collect()
    }

    pub fn inverse_slice(&self, y: &[f64]) -> Option<Vec<f64>> {
        let inv = self.matrix().try_inverse()?;
        let v = inv * (DVector::from_column_slice(y) - DVector::from_column_slice(&self.offset));
        Some(v.iter().copied().collect())
    }

    pub fn is_bijective(&self) -> bool {
        self.matrix().determinant().abs() > 1e-12
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartDomain {
    pub axes: Vec<Axis>,
    pub deck: Option<DeckMap>,
}

impl ChartDomain {
    pub fn new(axes: Vec<Axis>, deck: Option<DeckMap>) -> Result<Self> {
        if axes.is_empty() {
            return Err(FolstabError::Construction("chart needs at least one axis".into()));
        }
        for (k, a) in axes.iter().enumerate() {
            if !(a.extent > 0.0) || !a.extent.is_finite() {
                return Err(FolstabError::Construction(format!("axis {k} has extent {}", a.extent)));
            }
        }
        if let Some(d) = &deck {
            let m = axes.len() - 1;
            if d.axis >= axes.len()
                || axes[d.axis].rule != AxisRule::PeriodicWithDeck
                || d.offset.len() != m
                || d.linear.len() != m
                || d.linear.iter().any(|r| r.len() != m)
            {
                return Err(FolstabError::Construction("deck map does not fit the chart".into()));
            }
            if !d.is_bijective() {
                return Err(FolstabError::Construction("deck map is not a bijection".into()));
            }
        }
        Ok(ChartDomain { axes, deck })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn extents(&self) -> Vec<f64> {
        self.axes.iter().map(|a| a.extent).collect()
    }

    /// Canonical representative: periodic coordinates reduced into
    /// `[lower, lower + extent)`, applying the deck map on each wrap.
    pub fn wrap(&self, p: &[f64]) -> Vec<f64> {
        let mut q = p.to_vec();
        for (k, a) in self.axes.iter().enumerate() {
            if !a.is_periodic() {
                continue;
            }
            let t = (q[k] - a.lower) / a.extent;
            let turns = t.floor();
            q[k] -= turns * a.extent;
            if q[k] >= a.lower + a.extent {
                q[k] = a.lower;
            }
            if a.rule == AxisRule::PeriodicWithDeck {
                if let Some(d) = &self.deck {
                    let n = turns as i64;
                    for _ in 0..n.unsigned_abs() {
                        let slice: Vec<f64> =
                            q.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, v)| *v).collect();
                        let moved = if n > 0 {
                            d.apply_slice(&slice)
                        } else {
                            d.inverse_slice(&slice).unwrap_or(slice)
                        };
                        let mut it = moved.into_iter();
                        for (i, v) in q.iter_mut().enumerate() {
                            if i != k {
                                *v = it.next().unwrap();
                            }
                        }
                    }
                }
            }
        }
        q
    }

    /// Distance to the nearest singular end of an open axis, measured in that
    /// axis' coordinate; `∞` when the chart has none.
    pub fn singular_distance(&self, p: &[f64]) -> Vec<f64> {
        self.axes
            .iter()
            .zip(p)
            .map(|(a, &x)| match a.rule {
                AxisRule::Open { .. } => (x - a.lower).min(a.lower + a.extent - x),
                _ => f64::INFINITY,
            })
            .collect()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        self.axes.iter().zip(p).all(|(a, &x)| match a.rule {
            AxisRule::Open { .. } => x > a.lower && x < a.lower + a.extent,
            _ => true,
        })
    }

    /// Uniform sample keeping at least `margin[k]` from the ends of open axes.
    pub fn sample_interior<R: RngExt>(&self, rng: &mut R, margin: &[f64]) -> Vec<f64> {
        self.axes
            .iter()
            .zip(margin)
            .map(|(a, &m)| match a.rule {
                AxisRule::Open { .. } => {
                    let m = m.min(0.45 * a.extent);
                    a.lower + m + rng.random::<f64>() * (a.extent - 2.0 * m)
                }
                _ => a.lower + rng.random::<f64>() * a.extent,
            })
            .collect()
    }

    /// `count` seeded interior points, kept a fifth of the extent away from open ends.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let margin: Vec<f64> = self.axes.iter().map(|a| 0.2 * a.extent).collect();
        (0..count).map(|_| self.sample_interior(&mut rng, &margin)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_plain_periodic() {
        let c = ChartDomain::new(vec![Axis::periodic(1.0), Axis::periodic(1.0)], None).unwrap();
        let q = c.wrap(&[1.1, -0.25]);
        assert!((q[0] - 0.1).abs() < 1e-12 && (q[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn deck_twice_is_deck_squared() {
        let deck = DeckMap { axis: 0, linear: vec![vec![0.0, -1.0], vec![1.0, 0.0]], offset: vec![0.5, 0.0] };
        let axes = vec![
            Axis { lower: 0.0, extent: 1.0, rule: AxisRule::PeriodicWithDeck },
            Axis::open(-5.0, 10.0),
            Axis::open(-5.0, 10.0),
        ];
        let c = ChartDomain::new(axes, Some(deck.clone())).unwrap();
        let y = [0.3, -0.7];
        let once = c.wrap(&[1.2, y[0], y[1]]);
        let twice = c.wrap(&[2.2, y[0], y[1]]);
        let sq = deck.apply_slice(&deck.apply_slice(&y));
        assert!((once[0] - 0.2).abs() < 1e-12);
        assert!((twice[1] - sq[0]).abs() < 1e-12 && (twice[2] - sq[1]).abs() < 1e-12);
        let back = c.wrap(&[-0.8, y[0], y[1]]);
        let inv = deck.inverse_slice(&y).unwrap();
        assert!((back[1] - inv[0]).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_extent_and_singular_deck() {
        assert!(ChartDomain::new(vec![Axis::periodic(0.0)], None).is_err());
        let deck = DeckMap { axis: 0, linear: vec![vec![0.0]], offset: vec![0.0] };
        let axes = vec![Axis { lower: 0.0, extent: 1.0, rule: AxisRule::PeriodicWithDeck }, Axis::open(0.0, 1.0)];
        assert!(ChartDomain::new(axes, Some(deck)).is_err());
    }
}
