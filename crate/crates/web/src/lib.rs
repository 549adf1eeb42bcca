//! Browser bindings: three small operations that return JSON strings.

use std::f64::consts::PI;

use folstab_core::catalog::{classify_unstable, condition_lambda1, Catalog};
use folstab_core::foliation::{FoliatedSpace, Scheme};
use folstab_core::instability::{mean_curvature_form_test, IndexForm};
use folstab_core::manifolds::foliation::FoliationKind;
use folstab_core::manifolds::space::{build_space, SpaceId};
use folstab_core::spectral::assembly::{assemble_jacobi, SectionSpace};
use folstab_core::spectral::jacobi::spectrum;
use folstab_core::Result;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Lowest Jacobi eigenvalues of the slope-0 circle foliation on `T²(lx, ly)`
/// next to the Fourier values `(2πk/lx)²`.
pub fn torus_spectrum_value(lx: f64, ly: f64, res: usize, count: usize) -> Result<Value> {
    let space = build_space(&SpaceId::FlatTorus { extents: vec![lx, ly] })?;
    let fs = FoliatedSpace::new(&space, &FoliationKind::Linear { slope: 0.0 }, Scheme::Fine)?;
    let jm = assemble_jacobi(&fs, &SectionSpace::new(&fs, &[res, res])?)?;
    let s = spectrum(&jm, count, 1.0, 0)?;
    let mut exact: Vec<f64> = (0..=count as i64)
        .flat_map(|a| (0..=count as i64).map(move |b| (a, b)))
        .flat_map(|(a, b)| {
            let l = (2.0 * PI * a as f64 / lx).powi(2) + (2.0 * PI * b as f64 / ly).powi(2);
            let mult = if a == 0 && b == 0 { 1 } else if a == 0 || b == 0 { 2 } else { 4 };
            std::iter::repeat_n(l, mult)
        })
        .collect();
    exact.sort_by(f64::total_cmp);
    exact.truncate(s.eigenvalues.len());
    Ok(json!({ "resolution": res, "eigenvalues": s.eigenvalues, "fourier": exact, "index": s.index }))
}

/// Classification of a built-in catalog record.
pub fn classify_value(name: &str) -> Result<Value> {
    let cat = Catalog::builtin();
    let rec = cat.get(name)?;
    let c = classify_unstable(rec);
    Ok(json!({
        "name": rec.name, "dim": rec.dim, "lambda1": rec.lambda1, "scalar": rec.scalar,
        "condition_lambda1": condition_lambda1(rec).ok(),
        "unstable": c.unstable, "clause": c.clause.map(|t| t.to_string()), "reason": c.reason,
    }))
}

pub fn catalog_names() -> Vec<String> {
    Catalog::builtin().records.into_iter().map(|r| r.name).collect()
}

/// Index-form trace and destabilizing direction for the Hopf fibration of
/// `S³`, plus the umbilic eigenvalue test on `S^n`.
pub fn sphere_instability_value(res: usize) -> Result<Value> {
    let space = build_space(&SpaceId::HopfS3Fibration)?;
    let fs = FoliatedSpace::new(&space, &FoliationKind::Hopf, Scheme::Fine)?;
    let form = IndexForm::assemble(&fs, &[res; 3])?;
    let tr = form.trace();
    let cert = form.destabilizing_vector()?;
    let spheres: Vec<Value> = (2..=4usize)
        .map(|n| {
            let sp = build_space(&SpaceId::RoundSphere { n, radius: 1.0, lift: 0.0 })?;
            let l = mean_curvature_form_test(&sp, &vec![8; n])?;
            Ok(json!({ "n": n, "max_eigenvalue": l.max_eigenvalue, "unstable": l.unstable }))
        })
        .collect::<Result<_>>()?;
    Ok(json!({
        "resolution": res, "trace_direct": tr.direct, "trace_gauss": tr.gauss_formula, "trace_exact": -4.0 * PI * PI,
        "v": cert.v, "qf_value": cert.qf_value, "spheres": spheres,
    }))
}

fn js(r: Result<Value>) -> std::result::Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen]
pub fn torus_spectrum(lx: f64, ly: f64, res: usize, count: usize) -> std::result::Result<String, JsValue> {
    if !(8..=48).contains(&res) {
        return Err(JsValue::from_str("resolution must be between 8 and 48"));
    }
    js(torus_spectrum_value(lx, ly, res, count))
}

#[wasm_bindgen]
pub fn classify(name: &str) -> std::result::Result<String, JsValue> {
    js(classify_value(name))
}

#[wasm_bindgen]
pub fn list_catalog() -> String {
    Value::from(catalog_names()).to_string()
}

#[wasm_bindgen]
pub fn sphere_instability(res: usize) -> std::result::Result<String, JsValue> {
    if !(8..=16).contains(&res) {
        return Err(JsValue::from_str("resolution must be between 8 and 16"));
    }
    js(sphere_instability_value(res))
}
