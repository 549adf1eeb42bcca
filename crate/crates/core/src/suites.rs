//! Verification suites run by [`run`] and their tolerance gates.
//!
//! Every tolerance below is multiplied by the config's `tolerance-scale`,
//! except observed convergence orders.

use nalgebra::DVector;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::{
    classify_unstable, condition_lambda1, crosscheck_record, product_instability, Catalog, Crosscheck, CROSSCHECK_TOL,
};
use crate::config::{RunConfig, Suite};
use crate::error::{FolstabError, Result};
use crate::foliation::diagnostics::{
    bundle_like_residual, complex_leaf_residual, harmonicity_residual, weitzenbock_residual,
};
use crate::foliation::{FoliatedSpace, Scheme, SmoothSection};
use crate::geometry::grid::QuadratureGrid;
use crate::instability::{
    height_hessian_residual, height_second_derivative_residual, height_section, mean_curvature_form_test, sphere_ricci_test,
    EuclideanImmersion, IndexForm, RicciBound,
};
use crate::lck::{
    complex_curvature_residual, divergence_check, hermitian_defect_integrand, hermitian_defects, lck_residual,
    nabla_j_formula_residual, normal_j_parallel_residual, vaisman_residual,
};
use crate::manifolds::model::Model;
use crate::manifolds::space::{build_space, BuiltinSpace};
use crate::report::{Check, Report, SuiteReport};
use crate::spectral::assembly::{assemble_jacobi, inf_norm, SectionSpace, BUNDLE_LIKE_TOL, HARMONIC_TOL};
use crate::spectral::eigen::RESIDUAL_TOL;
use crate::spectral::jacobi::{rayleigh_quotient, second_variation_fd, spectrum, stability_identity_gap};

/// Identities evaluated with analytic derivatives.
pub const EXACT_TOL: f64 = 1e-8;
/// Pointwise identities evaluated with the fine finite-difference scheme
/// (step `h = 1e−3`, so this is `C·h²` with `C = 1`).
pub const FD_TOL: f64 = 1e-6;
/// Relative asymmetry of the assembled Jacobi matrix.
pub const SYMMETRY_TOL: f64 = 1e-12;
pub const IDENTITY_GAP_TOL: f64 = 0.05;
pub const SECOND_VARIATION_TOL_FLAT: f64 = 0.01;
pub const SECOND_VARIATION_TOL: f64 = 0.05;
pub const SECOND_VARIATION_STEP: f64 = 1e-3;
/// Agreement of the direct and Gauss-formula traces of the index form.
pub const TRACE_ROUTE_TOL: f64 = 0.03;
/// Smallest accepted observed order between successive refinements.
pub const ORDER_MIN: f64 = 1.8;
/// `C` in the divergence bound `|∫ div| ≤ C·h²·vol`.
pub const DIVERGENCE_C: f64 = 1.0;
/// Seeded points for pointwise identities.
pub const SAMPLE_POINTS: usize = 20;
/// Largest dimension for which the catalog cross-check eigensolve is attempted.
pub const CROSSCHECK_MAX_DIM: usize = 3;

pub struct Context {
    pub cfg: RunConfig,
    pub space: BuiltinSpace,
    pub fs: Option<FoliatedSpace>,
    pub res: Vec<usize>,
}

impl Context {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let space = build_space(&cfg.space)?;
        let res = cfg.res.for_dim(space.dim())?;
        let fs = FoliatedSpace::new(&space, &cfg.foliation, Scheme::Fine).ok();
        Ok(Context { cfg: cfg.clone(), space, fs, res })
    }

    fn tol(&self, t: f64) -> f64 {
        t * self.cfg.tolerance_scale
    }

    fn foliated(&self) -> Result<&FoliatedSpace> {
        self.fs.as_ref().ok_or_else(|| {
            FolstabError::Construction(format!("foliation {} is not defined on {}", self.cfg.foliation, self.space.id))
        })
    }

    fn points(&self) -> Vec<Vec<f64>> {
        self.space.chart.sample_points(SAMPLE_POINTS, self.cfg.seed)
    }

    fn grid(&self) -> Result<QuadratureGrid> {
        QuadratureGrid::new(&self.space.chart, &self.space.metric, &self.res)
    }

    fn sections(&self, model: &Model, probe: &[f64]) -> Vec<SmoothSection> {
        (0..self.cfg.sections as u64).map(|k| SmoothSection::random(model, self.cfg.seed.wrapping_add(k), probe)).collect()
    }
}

/// Runs the selected suites in dependency order. Construction errors that
/// prevent any suite from running are returned as `Err`.
pub fn run(cfg: &RunConfig) -> Result<Report> {
    let ctx = Context::new(cfg)?;
    let suites = Suite::ALL.iter().filter(|s| cfg.suites.contains(s)).map(|&s| run_suite(&ctx, s)).collect();
    Ok(Report::new(cfg, suites))
}

pub fn run_suite(ctx: &Context, suite: Suite) -> SuiteReport {
    let mut rep = SuiteReport::new(suite.name());
    let out = match suite {
        Suite::Harmonicity => harmonicity(ctx, &mut rep),
        Suite::Lck => lck(ctx, &mut rep),
        Suite::Spectrum => spectrum_suite(ctx, &mut rep),
        Suite::StabilityIdentity => stability_identity(ctx, &mut rep),
        Suite::SecondVariation => second_variation(ctx, &mut rep),
        Suite::Instability => instability(ctx, &mut rep),
        Suite::Classify => classify(ctx, &mut rep),
    };
    match out {
        Ok(Some(reason)) => SuiteReport::skipped(suite.name(), reason),
        Ok(None) => rep.finish(),
        Err(e) => {
            rep.fail(&e);
            rep.finish()
        }
    }
}

/// `Ok(Some(reason))` marks a suite that does not apply to the configured space.
type Outcome = Result<Option<String>>;

fn harmonicity(ctx: &Context, rep: &mut SuiteReport) -> Outcome {
    let fs = ctx.foliated()?;
    let res = &ctx.res;
    let grid = ctx.grid()?;
    let h = harmonicity_residual(fs, &grid)?;
    rep.put("harmonicity", h);
    rep.check(Check::le("mean_curvature_sup", h.mean_curvature, ctx.tol(HARMONIC_TOL), res));
    rep.check(Check::le("dstar_pi_sup", h.dstar_pi_sup, ctx.tol(HARMONIC_TOL), res));
    let pts = ctx.points();
    let bl = bundle_like_residual(fs, &pts)?;
    rep.check(Check::le("bundle_like", bl, ctx.tol(BUNDLE_LIKE_TOL), res));
    if h.mean_curvature <= HARMONIC_TOL && bl <= BUNDLE_LIKE_TOL && fs.codim() > 0 {
        let mut worst: f64 = 0.0;
        for p in &pts {
            worst = worst.max(weitzenbock_residual(fs, p)?);
        }
        rep.check(Check::le("weitzenbock", worst, ctx.tol(FD_TOL), res));
    } else {
        rep.put("weitzenbock", "not evaluated: foliation is not harmonic with bundle-like metric");
    }
    Ok(None)
}

/// `(resolution, h_max, residual)` of the `J_Q`-parallelism residual with the
/// grid-step scheme at each resolution.
pub fn jq_parallel_decay(fs: &FoliatedSpace, levels: &[usize], points: &[Vec<f64>]) -> Result<Vec<(usize, f64, f64)>> {
    let space = fs.space();
    levels
        .iter()
        .map(|&r| {
            let grid = QuadratureGrid::new(&space.chart, &space.metric, &vec![r; space.dim()])?;
            let coarse = fs.with_scheme(Scheme::Grid(grid.h.clone()))?;
            Ok((r, grid.h_max(), normal_j_parallel_residual(&coarse, points)?))
        })
        .collect()
}

/// Observed orders `log(r_i/r_{i+1}) / log(h_i/h_{i+1})`.
pub fn observed_orders(levels: &[(usize, f64, f64)]) -> Vec<f64> {
    levels.windows(2).map(|w| (w[0].2 / w[1].2).ln() / (w[0].1 / w[1].1).ln()).collect()
}

fn lck(ctx: &Context, rep: &mut SuiteReport) -> Outcome {
    let space = &ctx.space;
    if !space.model.is_complex() {
        return Ok(Some(format!("{} carries no complex structure", space.id)));
    }
    let pts = ctx.points();
    let exact = [0usize; 0];
    let mut herm: f64 = 0.0;
    for p in &pts {
        herm = herm.max(hermitian_defects(space, p)?.max());
    }
    rep.check(Check::le("hermitian", herm, ctx.tol(EXACT_TOL), &exact));
    if space.dim() < 4 {
        rep.put("lck", "real dimension 2: every Hermitian surface is Kähler-like, no Lee form to test");
        return Ok(None);
    }
    let l = lck_residual(space, &pts)?;
    rep.put("lck_residual", l);
    rep.check(Check::le("lck_closedness", l.closedness, ctx.tol(EXACT_TOL), &exact));
    rep.check(Check::le("lck_conformal", l.conformal, ctx.tol(EXACT_TOL), &exact));
    if l.max() > EXACT_TOL * ctx.cfg.tolerance_scale {
        return Ok(None);
    }
    rep.put("vaisman_residual", vaisman_residual(space, &pts)?);
    let mut nj: f64 = 0.0;
    for p in &pts {
        nj = nj.max(nabla_j_formula_residual(space, p, 1.0)?);
    }
    rep.check(Check::le("nabla_j_formula", nj, ctx.tol(FD_TOL), &exact));

    let Some(fs) = ctx.fs.as_ref().filter(|fs| fs.foliation.is_complex() && fs.codim() > 0) else {
        rep.put("foliation", "leaves are not complex; foliation checks skipped");
        return Ok(None);
    };
    let mut leaf: f64 = 0.0;
    for p in &pts {
        leaf = leaf.max(complex_leaf_residual(fs, p)?);
    }
    rep.check(Check::le("complex_leaves", leaf, ctx.tol(FD_TOL), &exact));
    rep.check(Check::le("normal_j_parallel", normal_j_parallel_residual(fs, &pts)?, ctx.tol(FD_TOL), &exact));
    let (mut cl, mut cn): (f64, f64) = (0.0, 0.0);
    for p in &pts {
        let c = complex_curvature_residual(fs, p)?;
        cl = cl.max(c.leaf);
        cn = cn.max(c.normal);
    }
    rep.check(Check::le("leaf_pair_curvature", cl, ctx.tol(FD_TOL), &exact));
    rep.check(Check::le("normal_curvature_combination", cn, ctx.tol(FD_TOL), &exact));

    let r = *ctx.res.iter().min().expect("positive dimension");
    let levels = [r, r + r / 2, 2 * r];
    let decay = jq_parallel_decay(fs, &levels, &pts[..6])?;
    let orders = observed_orders(&decay);
    rep.put("normal_j_parallel_grid_scheme", decay.iter().map(|(r, h, v)| (r, h, v)).collect::<Vec<_>>());
    rep.put("normal_j_parallel_orders", &orders);
    for (i, o) in orders.iter().enumerate() {
        let name = format!("normal_j_parallel_order_{}_{}", levels[i], levels[i + 1]);
        rep.check(Check::ge(&name, *o, ORDER_MIN, &vec![levels[i + 1]; space.dim()]));
    }
    Ok(None)
}

fn spectrum_suite(ctx: &Context, rep: &mut SuiteReport) -> Outcome {
    let fs = ctx.foliated()?;
    if fs.codim() == 0 {
        return Ok(Some("codimension 0: no normal sections".into()));
    }
    let res = &ctx.res;
    let jm = assemble_jacobi(fs, &SectionSpace::new(fs, res)?)?;
    let sym = jm.symmetry_defect() / inf_norm(&jm.matrix).max(f64::MIN_POSITIVE);
    rep.check(Check::le("symmetry", sym, ctx.tol(SYMMETRY_TOL), res));
    let s = spectrum(&jm, ctx.cfg.eigenvalues, ctx.cfg.tolerance_scale, ctx.cfg.seed)?;
    let worst = s.residuals.iter().copied().fold(0.0, f64::max);
    rep.check(Check::le("eigen_residual", worst, ctx.tol(RESIDUAL_TOL), res));
    rep.put("resolution", res);
    rep.put("dof", jm.dof());
    rep.put("eigenvalues", &s.eigenvalues);
    rep.put("eigen_residuals", &s.residuals);
    rep.put("index", s.index);
    rep.put("index_is_lower_bound", s.index_is_lower_bound);
    rep.put("stable", s.index == 0);
    rep.put("eps_neg", s.eps_neg);
    rep.put("method", &s.method);
    rep.put("assembly", &jm.metadata);
    Ok(None)
}

/// Corrected identity `⟨𝒥V, V⟩ = ½⟨DV, DV⟩ − ∫ g_Q(∇_W V, J_Q V)`, where
/// `W = Σ (∇_{E_a}J)E_a` vanishes on Kähler manifolds.
fn stability_identity(ctx: &Context, rep: &mut SuiteReport) -> Outcome {
    let fs = ctx.foliated()?;
    if !(ctx.space.model.is_complex() && fs.foliation.is_complex() && fs.codim() > 0) {
        return Ok(Some(format!("{} on {} does not have complex leaves", fs.foliation.kind, ctx.space.id)));
    }
    let res = &ctx.res;
    let jm = assemble_jacobi(fs, &SectionSpace::new(fs, res)?)?;
    let grid = &jm.disc.grid;
    let eps = crate::spectral::jacobi::eps_neg(&jm, ctx.cfg.tolerance_scale);
    let (h, vol) = (grid.h_max(), grid.volume());
    let mut rows = Vec::new();
    let (mut worst_gap, mut worst_corrected, mut worst_div, mut worst_div_corrected): (f64, f64, f64, f64) =
        (0.0, 0.0, 0.0, 0.0);
    let mut min_rq = f64::INFINITY;
    for (k, sec) in ctx.sections(&ctx.space.model, &grid.node(0)).iter().enumerate() {
        let g = stability_identity_gap(fs, &jm, sec)?;
        let defect = grid.integrate_fn(|p| hermitian_defect_integrand(fs, sec, p).unwrap_or(f64::NAN))?;
        let corrected_rhs = g.rhs - defect;
        let corrected = (g.lhs - corrected_rhs).abs() / g.lhs.abs().max(corrected_rhs.abs()).max(f64::MIN_POSITIVE);
        let rq = rayleigh_quotient(&jm, &sec.sample(fs, grid)?)?;
        worst_gap = worst_gap.max(g.gap);
        worst_corrected = worst_corrected.max(corrected);
        min_rq = min_rq.min(rq);
        let mut row = serde_json::json!({
            "seed": ctx.cfg.seed.wrapping_add(k as u64),
            "lhs": g.lhs, "rhs": g.rhs, "gap": g.gap,
            "hermitian_defect": defect, "corrected_gap": corrected, "rayleigh_quotient": rq,
        });
        if k == 0 {
            let div = divergence_check(fs, sec, grid)?;
            worst_div = div.integral.abs();
            worst_div_corrected = (div.integral - defect).abs();
            row["divergence_integral"] = div.integral.into();
            row["divergence_magnitude"] = div.magnitude.into();
        }
        rows.push(row);
    }
    rep.put("sections", rows);
    rep.put("h_max", h);
    rep.put("volume", vol);
    rep.check(Check::le("identity_gap", worst_gap, ctx.tol(IDENTITY_GAP_TOL), res));
    rep.check(Check::le("identity_gap_corrected", worst_corrected, ctx.tol(IDENTITY_GAP_TOL), res));
    rep.check(Check::ge("min_rayleigh_quotient", min_rq, -eps, res));
    let bound = ctx.tol(DIVERGENCE_C * h * h * vol);
    rep.check(Check::le("divergence_integral", worst_div, bound, res));
    rep.check(Check::le("divergence_integral_corrected", worst_div_corrected, bound, res));
    Ok(None)
}

fn second_variation(ctx: &Context, rep: &mut SuiteReport) -> Outcome {
    let fs = ctx.foliated()?;
    if fs.foliation.submersion.is_none() || fs.codim() == 0 {
        return Ok(Some(format!("{} on {} has no global submersion", fs.foliation.kind, ctx.space.id)));
    }
    let res = &ctx.res;
    let flat = matches!(*ctx.space.model, Model::FlatTorus { .. });
    let tol = ctx.tol(if flat { SECOND_VARIATION_TOL_FLAT } else { SECOND_VARIATION_TOL });
    let jm = assemble_jacobi(fs, &SectionSpace::new(fs, res)?)?;
    let grid = &jm.disc.grid;
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for (k, sec) in ctx.sections(&ctx.space.model, &grid.node(0)).iter().enumerate() {
        let nu = sec.sample(fs, grid)?;
        let form = jm.form(&nu);
        let fd = second_variation_fd(fs, &jm, &nu, SECOND_VARIATION_STEP)?;
        let rel = (fd - form).abs() / form.abs().max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
        rows.push(serde_json::json!({
            "seed": ctx.cfg.seed.wrapping_add(k as u64), "form": form, "fd": fd, "relative_error": rel,
        }));
    }
    rep.put("sections", rows);
    rep.put("t", SECOND_VARIATION_STEP);
    rep.check(Check::le("second_variation_relative_error", worst, tol, res));
    Ok(None)
}

fn instability(ctx: &Context, rep: &mut SuiteReport) -> Outcome {
    let space = &ctx.space;
    let imm = match EuclideanImmersion::new(space) {
        Ok(imm) => imm,
        Err(_) => return Ok(Some(format!("{} has no Euclidean immersion", space.id))),
    };
    let res = &ctx.res;
    let exact = [0usize; 0];
    let pts = ctx.points();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
    let (mut hess, mut second): (f64, f64) = (0.0, 0.0);
    for p in &pts {
        let v = DVector::from_fn(imm.ambient_dim(), |_, _| rng.random_range(-1.0..1.0));
        hess = hess.max(height_hessian_residual(space, &v, p)?);
        second = second.max(height_second_derivative_residual(space, &v, p)?);
    }
    rep.check(Check::le("height_hessian", hess, ctx.tol(FD_TOL), &exact));
    rep.check(Check::le("height_second_derivative", second, ctx.tol(FD_TOL), &exact));

    let mcf = mean_curvature_form_test(space, res)?;
    rep.put("mean_curvature_form", mcf);
    for bound in [RicciBound::Literal, RicciBound::Rescaled] {
        let key = format!("ricci_criterion_{}", serde_json::to_value(bound).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default());
        match sphere_ricci_test(space, bound, res) {
            Ok(t) => rep.put(&key, t),
            Err(FolstabError::HypothesisViolation(m)) => rep.put(&key, format!("not applicable: {m}")),
            Err(e) => return Err(e),
        }
    }

    let Some(fs) = ctx.fs.as_ref().filter(|fs| fs.codim() > 0) else {
        rep.put("index_form", "no foliation with normal sections");
        return Ok(None);
    };
    let form = match IndexForm::assemble(fs, res) {
        Ok(f) => f,
        Err(FolstabError::HypothesisViolation(m)) => {
            rep.put("index_form", format!("not applicable: {m}"));
            return Ok(None);
        }
        Err(e) => return Err(e),
    };
    let tr = form.trace();
    rep.put("trace_qf", tr);
    let rel = (tr.direct - tr.gauss_formula).abs() / tr.gauss_formula.abs().max(f64::MIN_POSITIVE);
    rep.check(Check::le("trace_routes_agree", rel, ctx.tol(TRACE_ROUTE_TOL), res));
    if mcf.unstable {
        rep.check(Check::lt("mean_curvature_form_trace_negative", tr.gauss_formula, 0.0, res));
    }
    let cert = match form.destabilizing_vector() {
        Ok(c) => c,
        Err(FolstabError::NoCertificate(m)) => {
            rep.put("certificate", serde_json::Value::Null);
            rep.put("certificate_reason", m);
            return Ok(None);
        }
        Err(e) => return Err(e),
    };
    rep.check(Check::lt("certificate_qf", cert.qf_value, 0.0, res));
    rep.put("certificate", &cert);
    match assemble_jacobi(fs, &SectionSpace::new(fs, res)?) {
        Ok(jm) => {
            let s = spectrum(&jm, ctx.cfg.eigenvalues, ctx.cfg.tolerance_scale, ctx.cfg.seed)?;
            let nu = height_section(fs, &DVector::from_vec(cert.v.clone()), &jm.disc.grid)?;
            let rq = rayleigh_quotient(&jm, &nu)?;
            rep.put("spectral_index", s.index);
            rep.put("certificate_rayleigh_quotient", rq);
            rep.check(Check::ge("spectral_index", s.index as f64, 1.0, res));
            rep.check(Check::lt("certificate_rayleigh_quotient", rq, 0.0, res));
        }
        Err(e) => rep.put("spectral_index", format!("not evaluated: {e}")),
    }
    Ok(None)
}

fn classify(ctx: &Context, rep: &mut SuiteReport) -> Outcome {
    let catalog = match &ctx.cfg.catalog {
        Some(path) => Catalog::load(std::path::Path::new(path))?,
        None => Catalog::builtin(),
    };
    let records: Vec<_> = if ctx.cfg.names.is_empty() {
        catalog.records.iter().collect()
    } else {
        ctx.cfg.names.iter().map(|n| catalog.get(n)).collect::<Result<_>>()?
    };
    let r = *ctx.res.iter().max().expect("positive dimension");
    let mut rows = Vec::new();
    for rec in &records {
        let cls = classify_unstable(rec);
        let cond = condition_lambda1(rec).ok();
        if cls.unstable {
            rep.check(Check::flag(&format!("condition[{}]", rec.name), cond == Some(true), true, &[]));
        }
        let cross = if rec.dim <= CROSSCHECK_MAX_DIM {
            crosscheck_record(rec, r, ctx.cfg.seed)?
        } else {
            Crosscheck::Skipped { reason: format!("dimension {} exceeds the cross-check limit {CROSSCHECK_MAX_DIM}", rec.dim) }
        };
        if let Crosscheck::Checked { lambda1_rel_error, resolution, .. } = &cross {
            rep.check(Check::le(&format!("crosscheck[{}]", rec.name), *lambda1_rel_error, ctx.tol(CROSSCHECK_TOL), resolution));
        }
        rows.push(serde_json::json!({
            "name": rec.name, "unstable": cls.unstable, "clause": cls.clause.map(|c| c.to_string()),
            "reason": cls.reason, "condition_lambda1": cond, "crosscheck": cross,
        }));
    }
    rep.put("records", rows);
    if records.len() >= 2 {
        rep.put("product_unstable", product_instability(&records)?);
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_kv;
    use crate::report::Status;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::from_pairs(&parse_kv(text).unwrap()).unwrap()
    }

    #[test]
    fn empty_selection_has_metadata_only() {
        let r = run(&cfg("suite =")).unwrap();
        assert!(r.suites.is_empty() && r.passed);
    }

    #[test]
    fn torus_spectrum_passes_and_is_stable() {
        let r = run(&cfg("space = flat_torus:extents=1x1\nfoliation = linear\nsuite = spectrum,harmonicity\nres = 16")).unwrap();
        assert!(r.passed, "{}", r.to_json());
        let s = r.suite("spectrum").unwrap();
        assert_eq!(s.data["index"], 0);
    }

    #[test]
    fn lck_skips_on_real_spaces() {
        let r = run(&cfg("space = round_sphere:n=2\nfoliation = points\nsuite = lck,stability-identity")).unwrap();
        assert!(r.suites.iter().all(|s| s.status == Status::Skipped));
        assert!(r.passed);
    }

    #[test]
    fn classify_names() {
        let r = run(&cfg("suite = classify\nname = SU(4)/Sp(2); SU(6)/Sp(3)")).unwrap();
        let s = r.suite("classify").unwrap();
        let recs = s.data["records"].as_array().unwrap();
        assert_eq!(recs[0]["unstable"], false);
        assert_eq!(recs[0]["clause"], "c");
        assert_eq!(recs[1]["unstable"], true);
        assert_eq!(s.data["product_unstable"], false);
        assert_eq!(s.status, Status::Passed);
    }

    #[test]
    fn unknown_catalog_name_fails_the_suite() {
        let r = run(&cfg("suite = classify\nname = SU(99)")).unwrap();
        assert_eq!(r.suite("classify").unwrap().status, Status::Failed);
        assert!(!r.passed);
    }

    #[test]
    fn orders_from_levels() {
        let o = observed_orders(&[(8, 0.4, 0.16), (16, 0.2, 0.04)]);
        assert!((o[0] - 2.0).abs() < 1e-12);
    }
}
