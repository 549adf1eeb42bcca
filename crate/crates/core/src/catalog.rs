//! Compact symmetric spaces with curated first eigenvalue and scalar
//! curvature, the eigenvalue criterion `λ₁ < 2s/n`, the classification list
//! of unstable spaces and its product extension.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{FolstabError, Result};
use crate::geometry::grid::QuadratureGrid;
use crate::manifolds::space::{build_space, SpaceId};
use crate::spectral::{assemble_scalar_laplacian, smallest_eigenpairs};

/// The catalog shipped with the crate.
pub const BUILTIN_CATALOG: &str = include_str!("../data/symspaces.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyTag {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    Other,
}

impl FromStr for FamilyTag {
    type Err = FolstabError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "a" => FamilyTag::A,
            "b" => FamilyTag::B,
            "c" => FamilyTag::C,
            "d" => FamilyTag::D,
            "e" => FamilyTag::E,
            "f" => FamilyTag::F,
            "g" => FamilyTag::G,
            "other" => FamilyTag::Other,
            _ => return Err(FolstabError::Data(format!("unknown family tag '{s}'"))),
        })
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FamilyTag::A => "a",
            FamilyTag::B => "b",
            FamilyTag::C => "c",
            FamilyTag::D => "d",
            FamilyTag::E => "e",
            FamilyTag::F => "f",
            FamilyTag::G => "g",
            FamilyTag::Other => "other",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetricSpaceRecord {
    pub name: String,
    pub tag: FamilyTag,
    pub params: BTreeMap<String, u32>,
    pub dim: usize,
    pub lambda1: Option<f64>,
    pub scalar: Option<f64>,
    pub simply_connected: bool,
    pub irreducible: bool,
    pub normalization: String,
    pub source: String,
}

impl SymmetricSpaceRecord {
    fn param(&self, key: &str) -> Option<u32> {
        self.params.get(key).copied()
    }

    /// The same space with metric `c·g`: `λ₁ ↦ λ₁/c`, `s ↦ s/c`.
    pub fn rescaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.lambda1 = self.lambda1.map(|v| v / c);
        out.scalar = self.scalar.map(|v| v / c);
        out.normalization = format!("{c} x ({})", self.normalization);
        out
    }

    /// Built-in space realizing this record, if any.
    pub fn realization(&self) -> Option<SpaceId> {
        if self.tag == FamilyTag::D && self.name.starts_with("S^") {
            return Some(SpaceId::RoundSphere { n: self.param("n")? as usize, radius: 1.0, lift: 0.0 });
        }
        None
    }
}

fn parse_number(s: &str) -> Result<f64> {
    let bad = || FolstabError::Data(format!("malformed number '{s}'"));
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let (a, b): (f64, f64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            if b == 0.0 {
                return Err(bad());
            }
            a / b
        }
        None => s.parse().map_err(|_| bad())?,
    };
    if !v.is_finite() {
        return Err(bad());
    }
    Ok(v)
}

fn parse_optional(s: &str) -> Result<Option<f64>> {
    match s {
        "-" | "" => Ok(None),
        _ => parse_number(s).map(Some),
    }
}

fn parse_bool(s: &str) -> Result<bool> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(FolstabError::Data(format!("expected true/false, got '{s}'"))),
    }
}

fn parse_params(s: &str) -> Result<BTreeMap<String, u32>> {
    let mut out = BTreeMap::new();
    if s == "-" || s.is_empty() {
        return Ok(out);
    }
    for kv in s.split(',') {
        let (k, v) = kv.split_once('=').ok_or_else(|| FolstabError::Data(format!("malformed parameter '{kv}'")))?;
        let v = v.trim().parse().map_err(|_| FolstabError::Data(format!("malformed parameter '{kv}'")))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

pub fn parse_record(line: &str) -> Result<SymmetricSpaceRecord> {
    let f: Vec<&str> = line.split('|').map(str::trim).collect();
    if f.len() != 10 {
        return Err(FolstabError::Data(format!("expected 10 fields, found {}: '{line}'", f.len())));
    }
    let dim = f[3].parse().map_err(|_| FolstabError::Data(format!("malformed dimension '{}'", f[3])))?;
    let rec = SymmetricSpaceRecord {
        name: f[0].to_string(),
        tag: f[1].parse()?,
        params: parse_params(f[2])?,
        dim,
        lambda1: parse_optional(f[4])?,
        scalar: parse_optional(f[5])?,
        simply_connected: parse_bool(f[6])?,
        irreducible: parse_bool(f[7])?,
        normalization: f[8].to_string(),
        source: f[9].to_string(),
    };
    validate(&rec)?;
    Ok(rec)
}

fn validate(rec: &SymmetricSpaceRecord) -> Result<()> {
    let fail = |why: String| Err(FolstabError::Data(format!("record {}: {why}", rec.name)));
    if rec.name.is_empty() {
        return fail("empty name".into());
    }
    if rec.dim == 0 {
        return fail("dimension must be positive".into());
    }
    if rec.lambda1.is_some_and(|l| l <= 0.0) {
        return fail("lambda1 must be positive".into());
    }
    if rec.normalization.is_empty() {
        return fail("normalization note is empty".into());
    }
    if classify_unstable(rec).unstable {
        match condition_lambda1(rec) {
            Ok(true) => {}
            Ok(false) => return fail("listed as unstable but lambda1 >= 2s/n".into()),
            Err(e) => return Err(e),
        }
    }
    for c in [0.5, 2.0] {
        if rec.lambda1.is_some() && rec.scalar.is_some() && condition_lambda1(&rec.rescaled(c))? != condition_lambda1(rec)? {
            return fail(format!("criterion changes under rescaling by {c}"));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Catalog {
    pub records: Vec<SymmetricSpaceRecord>,
}

impl Catalog {
    /// One record per non-blank line; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            records.push(parse_record(line).map_err(|e| FolstabError::Data(format!("line {}: {e}", i + 1)))?);
        }
        if records.is_empty() {
            return Err(FolstabError::Data("catalog has no records".into()));
        }
        Ok(Catalog { records })
    }

    pub fn builtin() -> Self {
        Catalog::parse(BUILTIN_CATALOG).expect("built-in catalog is valid")
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Catalog::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, name: &str) -> Result<&SymmetricSpaceRecord> {
        self.records
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| FolstabError::Input(format!("no catalog record named '{name}'")))
    }
}

/// Relative margin under which `λ₁` and `2s/n` count as equal.
pub const BOUNDARY_RTOL: f64 = 1e-12;

/// `λ₁ < 2s/n`, strict. Projective spaces sit on the boundary, so equality up to
/// round-off is not accepted as strict.
pub fn condition_lambda1(rec: &SymmetricSpaceRecord) -> Result<bool> {
    match (rec.lambda1, rec.scalar) {
        (Some(l), Some(s)) => {
            let bound = 2.0 * s / rec.dim as f64;
            Ok(l < bound - BOUNDARY_RTOL * bound.abs())
        }
        _ => Err(FolstabError::Data(format!("record {} lacks lambda1 or scalar curvature", rec.name))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub unstable: bool,
    pub clause: Option<FamilyTag>,
    pub reason: String,
}

/// Membership in the list of compact irreducible symmetric spaces on which
/// every harmonic Riemannian foliation is unstable.
pub fn classify_unstable(rec: &SymmetricSpaceRecord) -> Classification {
    let no = |clause: Option<FamilyTag>, reason: String| Classification { unstable: false, clause, reason };
    if !rec.irreducible {
        return no(None, "not irreducible".into());
    }
    if !rec.simply_connected {
        return no(None, "not simply connected".into());
    }
    let n = rec.param("n");
    let (ok, bound) = match rec.tag {
        FamilyTag::A => (n.is_some_and(|n| n >= 2), "SU(n) with n >= 2"),
        FamilyTag::B => (n.is_some_and(|n| n >= 2), "Sp(n) with n >= 2"),
        FamilyTag::C => (n.is_some_and(|n| n >= 3), "SU(2n)/Sp(n) with n >= 3"),
        FamilyTag::D => (n.is_some_and(|n| n >= 3), "S^n with n >= 3"),
        FamilyTag::E => (
            matches!((rec.param("p"), rec.param("q")), (Some(p), Some(q)) if p >= q && q >= 1),
            "G_{p,q}(H) with p >= q >= 1",
        ),
        FamilyTag::F => (true, "E6/F4"),
        FamilyTag::G => (true, "F4/Spin(9)"),
        FamilyTag::Other => return no(None, "not on the list".into()),
    };
    if ok {
        Classification { unstable: true, clause: Some(rec.tag), reason: format!("clause ({}): {bound}", rec.tag) }
    } else {
        no(Some(rec.tag), format!("clause ({}) dimension bound fails: requires {bound}", rec.tag))
    }
}

/// Every factor must be on the list.
pub fn product_instability(recs: &[&SymmetricSpaceRecord]) -> Result<bool> {
    if recs.is_empty() {
        return Err(FolstabError::Input("product needs at least one factor".into()));
    }
    Ok(recs.iter().all(|r| classify_unstable(r).unstable))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Crosscheck {
    Checked {
        space: String,
        resolution: Vec<usize>,
        lambda1: f64,
        lambda1_rel_error: f64,
        scalar: f64,
        scalar_error: f64,
        agrees: bool,
    },
    Skipped {
        reason: String,
    },
}

pub const CROSSCHECK_TOL: f64 = 0.03;

/// Recomputes `λ₁` (scalar Laplacian eigensolve) and `s` (curvature at a
/// sample point) for records with a built-in realization.
pub fn crosscheck_record(rec: &SymmetricSpaceRecord, res: usize, seed: u64) -> Result<Crosscheck> {
    let Some(id) = rec.realization() else {
        return Ok(Crosscheck::Skipped { reason: format!("{} has no numeric realization", rec.name) });
    };
    let (Some(l_ref), Some(s_ref)) = (rec.lambda1, rec.scalar) else {
        return Err(FolstabError::Data(format!("record {} lacks lambda1 or scalar curvature", rec.name)));
    };
    let space = build_space(&id)?;
    let resolution = vec![res; space.dim()];
    let grid = QuadratureGrid::new(&space.chart, &space.metric, &resolution)?;
    let (a, mass) = assemble_scalar_laplacian(&space, &grid)?;
    let pairs = smallest_eigenpairs(&a, &mass, 2, 1.0, seed)?;
    let lambda1 = pairs.values[1];
    let p = space.chart.sample_points(1, seed).remove(0);
    let scalar = space.metric.curvature(&p)?.scalar;
    let lambda1_rel_error = (lambda1 - l_ref).abs() / l_ref;
    let scalar_error = (scalar - s_ref).abs();
    Ok(Crosscheck::Checked {
        space: id.to_string(),
        resolution,
        lambda1,
        lambda1_rel_error,
        scalar,
        scalar_error,
        agrees: lambda1_rel_error <= CROSSCHECK_TOL && scalar_error <= CROSSCHECK_TOL * s_ref.abs().max(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(name: &str) -> SymmetricSpaceRecord {
        Catalog::builtin().get(name).unwrap().clone()
    }

    #[test]
    fn builtin_catalog_loads() {
        let c = Catalog::builtin();
        assert!(c.records.len() >= 20);
        for r in &c.records {
            if r.tag != FamilyTag::Other && classify_unstable(r).unstable {
                assert!(condition_lambda1(r).unwrap(), "{}", r.name);
            }
        }
    }

    #[test]
    fn sphere_examples() {
        assert!(condition_lambda1(&rec("S^3")).unwrap());
        assert!(!condition_lambda1(&rec("S^2")).unwrap());
        let c = classify_unstable(&rec("S^5"));
        assert!(c.unstable && c.clause == Some(FamilyTag::D));
        assert!(!classify_unstable(&rec("S^2")).unstable);
    }

    #[test]
    fn strict_inequality_at_boundary() {
        let mut r = rec("S^3");
        r.lambda1 = Some(2.0 * 6.0 / 3.0);
        assert!(!condition_lambda1(&r).unwrap());
        assert!(!condition_lambda1(&rec("G2")).unwrap());
    }

    #[test]
    fn clause_c_dimension_bound() {
        let c = classify_unstable(&rec("SU(4)/Sp(2)"));
        assert!(!c.unstable);
        assert_eq!(c.clause, Some(FamilyTag::C));
        assert!(classify_unstable(&rec("SU(6)/Sp(3)")).unstable);
    }

    #[test]
    fn projective_spaces_are_not_listed() {
        for name in ["CP^1", "CP^2", "CP^3", "RP^3"] {
            assert!(!classify_unstable(&rec(name)).unstable, "{name}");
            assert!(!condition_lambda1(&rec(name)).unwrap(), "{name}");
        }
    }

    #[test]
    fn products() {
        let (s3, s5, s2) = (rec("S^3"), rec("S^5"), rec("S^2"));
        assert!(product_instability(&[&s3, &s5]).unwrap());
        assert!(!product_instability(&[&s3, &s2]).unwrap());
        assert_eq!(product_instability(&[&s5]).unwrap(), classify_unstable(&s5).unstable);
        assert!(matches!(product_instability(&[]), Err(FolstabError::Input(_))));
    }

    #[test]
    fn inconsistent_rows_are_rejected() {
        let bad = "X | d | n=4 | 4 | 9 | 12 | true | true | round | made up";
        assert!(matches!(parse_record(bad), Err(FolstabError::Data(_))));
        assert!(parse_record("X | d | n=4 | 4 | 4 | 12 | true | true |  | none").is_err());
        assert!(parse_record("X | q | n=4 | 4 | 4 | 12 | true | true | round | none").is_err());
        assert!(matches!(condition_lambda1(&parse_record("X | other | - | 4 | - | 12 | true | true | round | none").unwrap()), Err(FolstabError::Data(_))));
    }

    #[test]
    fn exceptional_records_are_skipped() {
        assert!(matches!(crosscheck_record(&rec("E6/F4"), 8, 0).unwrap(), Crosscheck::Skipped { .. }));
    }
}
