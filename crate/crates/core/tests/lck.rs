use folstab_core::foliation::{FoliatedSpace, Scheme, SmoothSection};
use folstab_core::geometry::grid::QuadratureGrid;
use folstab_core::lck::{
    d_energy, divergence_check, hermitian_defect_integrand, lck_residual, lee_form_solve, nabla_j_formula_residual,
    normal_j, DOperatorAt,
};
use folstab_core::manifolds::foliation::FoliationKind;
use folstab_core::manifolds::space::{build_space, BuiltinSpace, SpaceId};
use folstab_core::spectral::assembly::{assemble_jacobi, SectionSpace};
use folstab_core::spectral::jacobi::stability_identity_gap;
use proptest::prelude::*;

fn space(s: &str) -> BuiltinSpace {
    build_space(&SpaceId::parse(s).unwrap()).unwrap()
}

fn foliated(s: &str, f: &str) -> FoliatedSpace {
    FoliatedSpace::new(&space(s), &FoliationKind::parse(f).unwrap(), Scheme::Fine).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn hopf_manifolds_are_lck_for_every_lambda(lambda in 1.3..6.0f64, n in 2usize..=3, seed in 0u64..1000) {
        let sp = space(&format!("hopf_complex:n={n},lambda={lambda}"));
        let pts = sp.chart.sample_points(3, seed);
        prop_assert!(lck_residual(&sp, &pts).unwrap().max() < 1e-8);
        let expected = sp.model.lee_form(&pts[0]).unwrap();
        let lee = lee_form_solve(&sp, &pts[0]).unwrap();
        for (a, b) in lee.theta.iter().zip(&expected) {
            prop_assert!((a - b).abs() < 1e-8);
        }
        for p in &pts {
            prop_assert!(nabla_j_formula_residual(&sp, p, 1.0).unwrap() < 1e-6);
        }
    }

    #[test]
    fn d_commutes_with_normal_j(seed in 0u64..1000, which in 0usize..3) {
        // With J_Q parallel, D(J_Q V) = J_Q DV.
        let fs = foliated("hopf_complex:n=2,lambda=2", "fibration");
        let p = fs.space().chart.sample_points(3, seed)[which].clone();
        let sec = SmoothSection::random(&fs.space().model, seed, &p);
        let v = |x: &[f64]| sec.eval_or_nan(&fs, x);
        let jv = |x: &[f64]| normal_j(&fs, x).unwrap() * sec.eval_or_nan(&fs, x);
        let d = DOperatorAt::new(&fs, &v, &p).unwrap();
        let dj = DOperatorAt::new(&fs, &jv, &p).unwrap();
        let e = d.connection.frame.e.clone();
        for k in 0..e.ncols() {
            let x = e.column(k).into_owned();
            let lhs = dj.apply(&x);
            let rhs = &d.j_q * d.apply(&x);
            prop_assert!((&lhs - &rhs).amax() < 1e-6 * (1.0 + rhs.amax()), "{} vs {}", lhs, rhs);
        }
    }
}

#[test]
fn kahler_torus_satisfies_the_identity_exactly() {
    // On the flat complex torus J is parallel: the Lee-form term and the
    // divergence vanish, and ⟨𝒥V, V⟩ − ½⟨DV, DV⟩ is pure discretization error.
    let fs = foliated("flat_torus:extents=1x1x1x1", "complex_lines");
    let gaps: Vec<f64> = [6, 8]
        .iter()
        .map(|&r| {
            let jm = assemble_jacobi(&fs, &SectionSpace::new(&fs, &[r; 4]).unwrap()).unwrap();
            let grid = &jm.disc.grid;
            let sec = SmoothSection::random(&fs.space().model, 0, &grid.node(0));
            let defect = grid.integrate_fn(|p| hermitian_defect_integrand(&fs, &sec, p).unwrap()).unwrap();
            assert!(defect.abs() < 1e-8, "{defect}");
            assert!(divergence_check(&fs, &sec, grid).unwrap().integral.abs() < 1e-8);
            stability_identity_gap(&fs, &jm, &sec).unwrap().gap
        })
        .collect();
    let order = (gaps[0] / gaps[1]).ln() / (8.0f64 / 6.0).ln();
    assert!(order > 1.8, "{gaps:?}");
}

#[test]
fn divergence_integral_equals_lee_form_term_on_hopf() {
    let fs = foliated("hopf_complex:n=2,lambda=2", "fibration");
    let grid = QuadratureGrid::new(&fs.space().chart, &fs.space().metric, &[8; 4]).unwrap();
    let sec = SmoothSection::random(&fs.space().model, 1, &grid.node(0));
    let div = divergence_check(&fs, &sec, &grid).unwrap();
    let defect = grid.integrate_fn(|p| hermitian_defect_integrand(&fs, &sec, p).unwrap()).unwrap();
    assert!(div.integral.abs() > 1.0);
    // equal up to a quadrature remainder that shrinks with the grid
    assert!((div.integral - defect).abs() < 2e-3 * div.integral.abs(), "{} vs {defect}", div.integral);
    assert!(d_energy(&fs, &sec, &grid).unwrap() > 0.0);
}
