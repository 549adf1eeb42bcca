use folstab_core::foliation::diagnostics::{bundle_like_residual, frobenius_residual, mean_curvature};
use folstab_core::foliation::{FoliatedSpace, Scheme};
use folstab_core::manifolds::foliation::FoliationKind;
use folstab_core::manifolds::space::{build_space, SpaceId};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn foliated(s: &str, f: &str) -> FoliatedSpace {
    let sp = build_space(&SpaceId::parse(s).unwrap()).unwrap();
    FoliatedSpace::new(&sp, &FoliationKind::parse(f).unwrap(), Scheme::Fine).unwrap()
}

const CASES: [(&str, &str); 6] = [
    ("flat_torus:extents=1x2", "linear:slope=0.4"),
    ("flat_torus:extents=1x1x1x1", "complex_lines"),
    ("hopf_s3_fibration", "hopf"),
    ("hopf_complex:n=2,lambda=2", "fibration"),
    ("warped_torus:amplitude=0.3", "warped_circles"),
    ("hopf_s3_fibration * flat_torus:extents=1", "hopf * points"),
];

fn point(fs: &FoliatedSpace, u: &[f64]) -> Vec<f64> {
    fs.space().chart.axes.iter().zip(u).map(|(a, t)| a.lower + a.extent * (0.15 + 0.7 * t)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn frame_is_orthonormal_and_adapted(which in 0..CASES.len(), u in proptest::collection::vec(0.0..1.0f64, 4)) {
        let (s, f) = CASES[which];
        let fs = foliated(s, f);
        let p = point(&fs, &u);
        let fr = fs.frame(&p).unwrap();
        let gram = fr.e.transpose() * &fr.g * &fr.e;
        prop_assert!((gram - DMatrix::identity(fs.dim(), fs.dim())).amax() < 1e-10);
        let s_vec = DVector::from_fn(fr.codim(), |i, _| 0.3 + i as f64);
        prop_assert!((fr.project(&fr.lift(&s_vec)) - &s_vec).amax() < 1e-12);
        for i in 0..fr.p {
            prop_assert!(fr.project(&fr.e.column(i).into_owned()).amax() < 1e-12);
        }
        prop_assert!(frobenius_residual(&fs, &p).unwrap() < 1e-6);
    }

    #[test]
    fn normal_curvature_is_skew(which in 0..CASES.len(), u in proptest::collection::vec(0.0..1.0f64, 4)) {
        let (s, f) = CASES[which];
        let fs = foliated(s, f);
        let p = point(&fs, &u);
        let curv = fs.curvature(&p).unwrap();
        let fr = &curv.connection.frame;
        for a in 0..fs.dim() {
            for b in 0..fs.dim() {
                let r = curv.apply(&fr.e.column(a).into_owned(), &fr.e.column(b).into_owned());
                let rt = curv.apply(&fr.e.column(b).into_owned(), &fr.e.column(a).into_owned());
                prop_assert!((&r + &rt).amax() < 1e-6);
                prop_assert!((&r + r.transpose()).amax() < 1e-6);
            }
        }
    }
}

#[test]
fn harmonic_built_ins() {
    for (s, f) in &CASES[..4] {
        let fs = foliated(s, f);
        let pts = fs.space().chart.sample_points(8, 1);
        assert!(bundle_like_residual(&fs, &pts).unwrap() < 1e-8, "{s}");
        for p in &pts {
            assert!(mean_curvature(&fs.connection(p).unwrap()).norm() < 1e-8, "{s}");
        }
    }
}

#[test]
fn warped_circles_have_mean_curvature() {
    let fs = foliated(CASES[4].0, CASES[4].1);
    let pts = fs.space().chart.sample_points(8, 1);
    let worst = pts.iter().map(|p| mean_curvature(&fs.connection(p).unwrap()).norm()).fold(0.0, f64::max);
    assert!(worst > 0.1, "{worst}");
}

#[test]
fn hopf_normal_bundle_curvature() {
    // The Hopf fibration S³ → S²(1/2) has base curvature 4, so ρ_∇ = 4·Id on Q.
    let fs = foliated("hopf_s3_fibration", "hopf");
    for p in fs.space().chart.sample_points(6, 2) {
        let rho = fs.curvature(&p).unwrap().ricci();
        assert!((rho - DMatrix::identity(2, 2) * 4.0).amax() < 1e-6);
    }
}
