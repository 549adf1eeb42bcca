//! Built-in foliations, presented by spanning frames and, where available, a
//! global Riemannian submersion.

use std::fmt;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{FolstabError, Result};
use crate::geometry::expmap::GeodesicSpace;
use crate::geometry::jet::jet1;
use crate::manifolds::model::{ComplexPointFn, Model};
use crate::manifolds::space::{split_spec, BuiltinSpace};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum FoliationKind {
    /// Tori: closed or irrational lines along `slope·∂₀ + ∂_{d−1}`.
    Linear { slope: f64 },
    /// Even-dimensional tori: leaves are translates of the first complex line.
    ComplexLines,
    /// Fibres of `S³ → ℂP¹`.
    Hopf,
    /// Fibres of `ℂHⁿ → ℂP^{n−1}`.
    Fibration,
    /// Circles `x = const` on the warped torus.
    WarpedCircles,
    /// One leaf, `q = 0`.
    Whole,
    /// Points as leaves, `q = dim`.
    Points,
    Product(Vec<FoliationKind>),
}

impl FoliationKind {
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('*').map(str::trim).collect();
        if parts.len() > 1 {
            return Ok(FoliationKind::Product(parts.iter().map(|p| FoliationKind::parse(p)).collect::<Result<_>>()?));
        }
        let (name, args) = split_spec(s)?;
        if let Some(k) = args.keys().find(|k| !(name == "linear" && *k == "slope")) {
            return Err(FolstabError::Config(format!("{name}: unknown parameter {k}")));
        }
        Ok(match name {
            "linear" | "slope" | "circles" => {
                let slope = match args.get("slope") {
                    Some(v) => v.parse().map_err(|_| FolstabError::Config(format!("linear: bad slope {v}")))?,
                    None => 0.0,
                };
                FoliationKind::Linear { slope }
            }
            "complex_lines" => FoliationKind::ComplexLines,
            "hopf" => FoliationKind::Hopf,
            "fibration" => FoliationKind::Fibration,
            "warped_circles" => FoliationKind::WarpedCircles,
            "whole" => FoliationKind::Whole,
            "points" => FoliationKind::Points,
            other => return Err(FolstabError::Config(format!("unknown foliation {other}"))),
        })
    }
}

impl fmt::Display for FoliationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FoliationKind::Linear { slope } => write!(f, "linear:slope={slope}"),
            FoliationKind::ComplexLines => write!(f, "complex_lines"),
            FoliationKind::Hopf => write!(f, "hopf"),
            FoliationKind::Fibration => write!(f, "fibration"),
            FoliationKind::WarpedCircles => write!(f, "warped_circles"),
            FoliationKind::Whole => write!(f, "whole"),
            FoliationKind::Points => write!(f, "points"),
            FoliationKind::Product(ks) => {
                let s: Vec<String> = ks.iter().map(|k| k.to_string()).collect();
                write!(f, "{}", s.join(" * "))
            }
        }
    }
}

/// Global submersion whose fibres are the leaves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Submersion {
    /// `p ↦ p[axis]` onto a circle of the given length.
    Circle { axis: usize, length: f64 },
    /// `z ↦ [z]` onto `ℂP^{n−1}` through the model's complex coordinates.
    Projective { n: usize },
    /// Everything to a point.
    Constant,
}

impl Submersion {
    pub fn target(&self) -> GeodesicSpace {
        match self {
            Submersion::Circle { length, .. } => GeodesicSpace::FlatTorus { extents: vec![*length] },
            Submersion::Projective { n } => GeodesicSpace::ProjectiveFs { n: *n },
            Submersion::Constant => GeodesicSpace::Point,
        }
    }

    pub fn map(&self, model: &Model, p: &[f64]) -> Vec<f64> {
        match self {
            Submersion::Circle { axis, length } => vec![p[*axis].rem_euclid(*length)],
            Submersion::Projective { .. } => {
                let z = model.complex_point(p).expect("complex coordinates");
                let norm = z.iter().map(|x| x * x).sum::<f64>().sqrt();
                z.iter().map(|x| x / norm).collect()
            }
            Submersion::Constant => Vec::new(),
        }
    }

    /// Differential applied to the chart vector `v` at `p`, in target coordinates.
    pub fn push(&self, model: &Model, p: &[f64], v: &[f64]) -> Vec<f64> {
        match self {
            Submersion::Circle { axis, .. } => vec![v[*axis]],
            Submersion::Projective { .. } => {
                let jet = jet1(&ComplexPointFn(model), p);
                let norm = jet.value.iter().map(|x| x * x).sum::<f64>().sqrt();
                let u: Vec<f64> = jet.value.iter().map(|x| x / norm).collect();
                let w: Vec<f64> = jet
                    .grad
                    .iter()
                    .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / norm)
                    .collect();
                self.target().tangent_part(&u, &w)
            }
            Submersion::Constant => Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BuiltinFoliation {
    pub kind: FoliationKind,
    pub space: BuiltinSpace,
    pub leaf_dim: usize,
    pub codim: usize,
    pub submersion: Option<Submersion>,
}

fn unit(d: usize, k: usize) -> DVector<f64> {
    let mut v = DVector::zeros(d);
    v[k] = 1.0;
    v
}

pub fn build_foliation(space: &BuiltinSpace, kind: &FoliationKind) -> Result<BuiltinFoliation> {
    let incompatible = || {
        Err(FolstabError::Construction(format!("foliation {kind} is not available on {}", space.id)))
    };
    let d = space.dim();
    let (leaf_dim, submersion) = match (kind, &*space.model) {
        (FoliationKind::Linear { slope }, Model::FlatTorus { extents }) => {
            let sub = (*slope == 0.0 && d == 2).then(|| Submersion::Circle { axis: 0, length: extents[0] });
            (1, sub)
        }
        (FoliationKind::ComplexLines, Model::FlatTorus { extents }) if extents.len() % 2 == 0 => (2, None),
        (FoliationKind::Hopf, Model::Sphere { n: 3, radius, .. }) => {
            let sub = (*radius == 1.0).then_some(Submersion::Projective { n: 2 });
            (1, sub)
        }
        (FoliationKind::Fibration, Model::HopfComplex { n, bump, .. }) => {
            let sub = if *n == 1 {
                Some(Submersion::Constant)
            } else {
                (*bump == 0.0).then_some(Submersion::Projective { n: *n })
            };
            (2, sub)
        }
        (FoliationKind::WarpedCircles, Model::WarpedTorus { .. }) => (1, Some(Submersion::Circle { axis: 0, length: 1.0 })),
        (FoliationKind::Whole, _) => (d, Some(Submersion::Constant)),
        (FoliationKind::Points, _) => (0, None),
        (FoliationKind::Product(ks), Model::Product(_)) => {
            let factors = space.id.factors();
            if factors.len() != ks.len() {
                return Err(FolstabError::Construction(format!(
                    "{} foliation factors for {} space factors",
                    ks.len(),
                    factors.len()
                )));
            }
            let mut p = 0;
            for (k, f) in ks.iter().zip(&factors) {
                let fs = crate::manifolds::space::build_space(f)?;
                p += build_foliation(&fs, k)?.leaf_dim;
            }
            (p, None)
        }
        _ => return incompatible(),
    };
    Ok(BuiltinFoliation { kind: kind.clone(), space: space.clone(), leaf_dim, codim: d - leaf_dim, submersion })
}

impl BuiltinFoliation {
    /// Whether the leaves are complex submanifolds of a complex space.
    pub fn is_complex(&self) -> bool {
        fn complex_kind(k: &FoliationKind) -> bool {
            match k {
                FoliationKind::ComplexLines | FoliationKind::Fibration => true,
                FoliationKind::Whole | FoliationKind::Points => true,
                FoliationKind::Product(ks) => ks.iter().all(complex_kind),
                _ => false,
            }
        }
        self.space.model.is_complex() && complex_kind(&self.kind)
    }

    /// Leaf-spanning and complementary chart vector fields before
    /// orthonormalisation. The second list completes the first to a basis.
    pub fn raw_frame(&self, p: &[f64]) -> (Vec<DVector<f64>>, Vec<DVector<f64>>) {
        raw_frame(&self.kind, &self.space.model, p)
    }
}

fn raw_frame(kind: &FoliationKind, model: &Model, p: &[f64]) -> (Vec<DVector<f64>>, Vec<DVector<f64>>) {
    let d = model.dim();
    match (kind, model) {
        (FoliationKind::Linear { slope }, _) => {
            let mut leaf = unit(d, d - 1);
            leaf[0] += slope;
            if d == 1 {
                leaf = unit(1, 0);
            }
            (vec![leaf], (0..d.saturating_sub(1)).map(|k| unit(d, k)).collect())
        }
        (FoliationKind::ComplexLines, _) => ((0..2).map(|k| unit(d, k)).collect(), (2..d).map(|k| unit(d, k)).collect()),
        (FoliationKind::Hopf, _) => {
            let (se, ce) = p[0].sin_cos();
            let (sp, cp) = (p[1] + p[2]).sin_cos();
            let leaf = DVector::from_vec(vec![0.0, 1.0, 1.0]);
            // j·q and k·q for q = (cos η e^{iξ₁}, sin η e^{iξ₂}).
            let jq = DVector::from_vec(vec![cp, sp * se / ce, -sp * ce / se]);
            let kq = DVector::from_vec(vec![sp, -cp * se / ce, cp * ce / se]);
            (vec![leaf], vec![jq, kq])
        }
        (FoliationKind::Fibration, Model::HopfComplex { n, .. }) => {
            let n = *n;
            let radial = unit(d, 0);
            let mut circle = DVector::zeros(d);
            (0..n).for_each(|k| circle[n + k] = 1.0);
            let normal = if n == 2 {
                let (sa, ca) = p[1].sin_cos();
                let (sp, cp) = (p[2] + p[3]).sin_cos();
                vec![
                    DVector::from_vec(vec![0.0, cp, sp * sa / ca, -sp * ca / sa]),
                    DVector::from_vec(vec![0.0, sp, -cp * sa / ca, cp * ca / sa]),
                ]
            } else {
                let j = model.complex_structure(p).expect("hopf manifold is complex");
                let mut v = Vec::new();
                for k in 1..n {
                    let a = unit(d, k);
                    let ja = &j * &a;
                    v.push(a);
                    v.push(ja);
                }
                v
            };
            (vec![radial, circle], normal)
        }
        (FoliationKind::WarpedCircles, _) => (vec![unit(2, 1)], vec![unit(2, 0)]),
        (FoliationKind::Whole, _) => ((0..d).map(|k| unit(d, k)).collect(), Vec::new()),
        (FoliationKind::Points, _) => (Vec::new(), (0..d).map(|k| unit(d, k)).collect()),
        (FoliationKind::Product(ks), Model::Product(ms)) => {
            let mut leaf = Vec::new();
            let mut normal = Vec::new();
            let mut off = 0;
            for (k, m) in ks.iter().zip(ms) {
                let dm = m.dim();
                let (l, nrm) = raw_frame(k, m, &p[off..off + dm]);
                let embed = |v: DVector<f64>| {
                    let mut w = DVector::zeros(d);
                    w.rows_mut(off, dm).copy_from(&v);
                    w
                };
                leaf.extend(l.into_iter().map(embed));
                normal.extend(nrm.into_iter().map(embed));
                off += dm;
            }
            (leaf, normal)
        }
        _ => unreachable!("checked in build_foliation"),
    }
}
