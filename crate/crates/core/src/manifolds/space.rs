use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{FolstabError, Result};
use crate::geometry::chart::ChartDomain;
use crate::geometry::expmap::GeodesicSpace;
use crate::geometry::metric::MetricField;
use crate::manifolds::model::Model;

/// Addressable built-in space with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SpaceId {
    FlatTorus { extents: Vec<f64> },
    RoundSphere { n: usize, radius: f64, lift: f64 },
    HopfS3Fibration,
    HopfComplex { n: usize, lambda: f64, bump: f64 },
    CpnFubiniStudy { n: usize },
    WarpedTorus { amplitude: f64 },
    Product(Vec<SpaceId>),
}

#[derive(Clone)]
pub struct BuiltinSpace {
    pub id: SpaceId,
    pub model: Arc<Model>,
    pub chart: ChartDomain,
    pub metric: MetricField,
}

impl fmt::Debug for BuiltinSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BuiltinSpace({})", self.id)
    }
}

impl SpaceId {
    pub fn model(&self) -> Model {
        match self {
            SpaceId::FlatTorus { extents } => Model::FlatTorus { extents: extents.clone() },
            SpaceId::RoundSphere { n, radius, lift } => Model::Sphere { n: *n, radius: *radius, lift: *lift },
            SpaceId::HopfS3Fibration => Model::Sphere { n: 3, radius: 1.0, lift: 0.0 },
            SpaceId::HopfComplex { n, lambda, bump } => Model::HopfComplex { n: *n, lambda: *lambda, bump: *bump },
            SpaceId::CpnFubiniStudy { n } => Model::FubiniStudy { n: *n },
            SpaceId::WarpedTorus { amplitude } => Model::WarpedTorus { amplitude: *amplitude },
            SpaceId::Product(fs) => Model::Product(fs.iter().map(SpaceId::model).collect()),
        }
    }

    pub fn factors(&self) -> Vec<SpaceId> {
        match self {
            SpaceId::Product(fs) => fs.clone(),
            other => vec![other.clone()],
        }
    }

    /// Parse `name:key=value,...`; products join factors with `*`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('*').map(str::trim).collect();
        if parts.len() > 1 {
            return Ok(SpaceId::Product(parts.iter().map(|p| SpaceId::parse(p)).collect::<Result<_>>()?));
        }
        let (name, args) = split_spec(s)?;
        let num = |k: &str, default: Option<f64>| -> Result<f64> {
            match args.get(k) {
                Some(v) => v.parse::<f64>().map_err(|_| FolstabError::Config(format!("{name}: bad value for {k}: {v}"))),
                None => default.ok_or_else(|| FolstabError::Config(format!("{name}: missing parameter {k}"))),
            }
        };
        let int = |k: &str, default: Option<usize>| -> Result<usize> {
            match args.get(k) {
                Some(v) => v.parse::<usize>().map_err(|_| FolstabError::Config(format!("{name}: bad value for {k}: {v}"))),
                None => default.ok_or_else(|| FolstabError::Config(format!("{name}: missing parameter {k}"))),
            }
        };
        let known = |keys: &[&str]| -> Result<()> {
            match args.keys().find(|k| !keys.contains(&k.as_str())) {
                Some(k) => Err(FolstabError::Config(format!("{name}: unknown parameter {k}"))),
                None => Ok(()),
            }
        };
        let id = match name {
            "flat_torus" | "torus" => {
                known(&["dims", "extents"])?;
                let dims = int("dims", None).or_else(|_| {
                    args.get("extents").map(|e| e.split('x').count()).ok_or_else(|| {
                        FolstabError::Config("flat_torus: give dims or extents".into())
                    })
                })?;
                let extents = match args.get("extents") {
                    Some(e) => e
                        .split('x')
                        .map(|x| x.parse::<f64>().map_err(|_| FolstabError::Config(format!("flat_torus: bad extent {x}"))))
                        .collect::<Result<Vec<_>>>()?,
                    None => vec![1.0; dims],
                };
                if extents.len() != dims {
                    return Err(FolstabError::Config(format!("flat_torus: {dims} dims but {} extents", extents.len())));
                }
                SpaceId::FlatTorus { extents }
            }
            "sphere" | "round_sphere" => {
                known(&["n", "radius", "lift"])?;
                SpaceId::RoundSphere { n: int("n", None)?, radius: num("radius", Some(1.0))?, lift: num("lift", Some(0.0))? }
            }
            "hopf_s3_fibration" | "hopf_s3" => {
                known(&[])?;
                SpaceId::HopfS3Fibration
            }
            "hopf_complex" | "hopf" => {
                known(&["n", "lambda", "bump"])?;
                SpaceId::HopfComplex { n: int("n", Some(2))?, lambda: num("lambda", Some(2.0))?, bump: num("bump", Some(0.0))? }
            }
            "cpn_fubini_study" | "cpn" => {
                known(&["n"])?;
                SpaceId::CpnFubiniStudy { n: int("n", None)? }
            }
            "warped_torus" => {
                known(&["amplitude"])?;
                SpaceId::WarpedTorus { amplitude: num("amplitude", Some(0.3))? }
            }
            other => return Err(FolstabError::Config(format!("unknown space {other}"))),
        };
        Ok(id)
    }
}

pub(crate) fn split_spec(s: &str) -> Result<(&str, BTreeMap<String, String>)> {
    let (name, rest) = match s.split_once(':') {
        Some((n, r)) => (n.trim(), r.trim()),
        None => (s.trim(), ""),
    };
    let mut args = BTreeMap::new();
    for kv in rest.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| FolstabError::Config(format!("{name}: expected key=value, got {kv}")))?;
        args.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok((name, args))
}

impl fmt::Display for SpaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceId::FlatTorus { extents } => {
                let e: Vec<String> = extents.iter().map(|x| x.to_string()).collect();
                write!(f, "flat_torus:dims={},extents={}", extents.len(), e.join("x"))
            }
            SpaceId::RoundSphere { n, radius, lift } => {
                write!(f, "round_sphere:n={n}")?;
                if *radius != 1.0 {
                    write!(f, ",radius={radius}")?;
                }
                if *lift != 0.0 {
                    write!(f, ",lift={lift}")?;
                }
                Ok(())
            }
            SpaceId::HopfS3Fibration => write!(f, "hopf_s3_fibration"),
            SpaceId::HopfComplex { n, lambda, bump } => {
                write!(f, "hopf_complex:n={n},lambda={lambda}")?;
                if *bump != 0.0 {
                    write!(f, ",bump={bump}")?;
                }
                Ok(())
            }
            SpaceId::CpnFubiniStudy { n } => write!(f, "cpn_fubini_study:n={n}"),
            SpaceId::WarpedTorus { amplitude } => write!(f, "warped_torus:amplitude={amplitude}"),
            SpaceId::Product(fs) => {
                let s: Vec<String> = fs.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", s.join(" * "))
            }
        }
    }
}

pub fn build_space(id: &SpaceId) -> Result<BuiltinSpace> {
    if let SpaceId::RoundSphere { lift, radius, .. } = id {
        if !lift.is_finite() || !radius.is_finite() {
            return Err(FolstabError::Construction("sphere parameters must be finite".into()));
        }
    }
    let model = id.model();
    model.validate()?;
    let model = Arc::new(model);
    Ok(BuiltinSpace {
        id: id.clone(),
        chart: model.chart(),
        metric: MetricField::analytic(model.clone()),
        model,
    })
}

impl BuiltinSpace {
    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn metric_at(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        self.metric.value(p)
    }

    /// The space as a target of geodesic variations, for the kinds with closed-form geodesics.
    pub fn geodesic_space(&self) -> Result<GeodesicSpace> {
        match &*self.model {
            Model::FlatTorus { extents } => Ok(GeodesicSpace::FlatTorus { extents: extents.clone() }),
            Model::Sphere { n, radius, .. } if *radius == 1.0 => Ok(GeodesicSpace::Sphere { n: *n }),
            Model::FubiniStudy { n } => Ok(GeodesicSpace::ProjectiveFs { n: *n }),
            _ => Err(FolstabError::NotImplemented(format!("closed-form geodesics on {}", self.id))),
        }
    }
}

/// Geodesic endpoint `exp_base(v)` on a space with closed-form geodesics.
///
/// Points and vectors are given in the coordinates documented on
/// [`GeodesicSpace`].
pub fn exp_map(space: &BuiltinSpace, base: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let g = space.geodesic_space()?;
    g.check_point(base)?;
    if v.len() != base.len() {
        return Err(FolstabError::Input("tangent vector and base point differ in length".into()));
    }
    Ok(g.exp(base, v))
}
