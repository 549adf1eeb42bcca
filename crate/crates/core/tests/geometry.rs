use folstab_core::manifolds::space::{build_space, BuiltinSpace, SpaceId};
use proptest::prelude::*;

fn space(s: &str) -> BuiltinSpace {
    build_space(&SpaceId::parse(s).unwrap()).unwrap()
}

/// A chart point pulled into the interior, away from coordinate singularities.
fn interior(sp: &BuiltinSpace, u: &[f64]) -> Vec<f64> {
    sp.chart
        .axes
        .iter()
        .zip(u)
        .map(|(a, t)| a.lower + a.extent * (0.15 + 0.7 * t))
        .collect()
}

fn unit_vec(d: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0..1.0f64, d)
}

const SPACES: [&str; 5] = [
    "round_sphere:n=3,radius=1.3",
    "hopf_complex:n=2,lambda=2.5",
    "cpn_fubini_study:n=2",
    "warped_torus:amplitude=0.3",
    "round_sphere:n=2 * flat_torus:extents=1",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn riemann_symmetries(which in 0..SPACES.len(), u in unit_vec(4)) {
        let sp = space(SPACES[which]);
        let p = interior(&sp, &u[..sp.dim()]);
        let r = sp.metric.curvature(&p).unwrap().riemann;
        let d = sp.dim();
        let scale = 1.0 + r.iter().flatten().flatten().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
        for a in 0..d { for b in 0..d { for c in 0..d { for e in 0..d {
            prop_assert!((r[a][b][c][e] + r[b][a][c][e]).abs() < 1e-8 * scale);
            prop_assert!((r[a][b][c][e] + r[a][b][e][c]).abs() < 1e-8 * scale);
            prop_assert!((r[a][b][c][e] - r[c][e][a][b]).abs() < 1e-8 * scale);
            prop_assert!((r[a][b][c][e] + r[b][c][a][e] + r[c][a][b][e]).abs() < 1e-8 * scale);
        }}}}
    }

    #[test]
    fn round_sphere_scalar_curvature(n in 2usize..=4, radius in 0.5..2.0f64, u in unit_vec(4)) {
        let sp = space(&format!("round_sphere:n={n},radius={radius}"));
        let p = interior(&sp, &u[..n]);
        let s = sp.metric.curvature(&p).unwrap().scalar;
        let exact = (n * (n - 1)) as f64 / (radius * radius);
        prop_assert!((s - exact).abs() < 1e-8 * exact, "{} vs {}", s, exact);
    }

    #[test]
    fn metric_is_positive_definite(which in 0..SPACES.len(), u in unit_vec(4)) {
        let sp = space(SPACES[which]);
        let p = interior(&sp, &u[..sp.dim()]);
        let g = sp.metric_at(&p).unwrap();
        prop_assert!((&g - g.transpose()).amax() < 1e-14);
        prop_assert!(g.symmetric_eigenvalues().min() > 0.0);
    }

    #[test]
    fn wrap_is_idempotent(which in 0..SPACES.len(), u in proptest::collection::vec(-3.0..3.0f64, 4)) {
        let sp = space(SPACES[which]);
        let q = sp.chart.wrap(&u[..sp.dim()]);
        prop_assert_eq!(sp.chart.wrap(&q), q);
    }
}

#[test]
fn fubini_study_has_constant_holomorphic_curvature_four() {
    // ℂP^{n−1} is Einstein with Ric = 2n·g for holomorphic sectional curvature 4.
    for n in 2..=4usize {
        let sp = space(&format!("cpn_fubini_study:n={n}"));
        for p in sp.chart.sample_points(5, n as u64) {
            let c = sp.metric.curvature(&p).unwrap();
            let g = sp.metric_at(&p).unwrap();
            let lambda = 2.0 * n as f64;
            assert!((&c.ricci - &g * lambda).amax() < 1e-8, "n={n}");
        }
    }
}

#[test]
fn hopf_manifold_ricci_oracle() {
    // g = |z|^{-2}|dz|² on ℂ² − 0 is the product ℝ × S³(1): Ric = 2 on S³ directions, 0 along d ln|z|.
    let sp = space("hopf_complex:n=2,lambda=3");
    for p in sp.chart.sample_points(6, 0) {
        let c = sp.metric.curvature(&p).unwrap();
        let mut ev: Vec<f64> = c.ricci_operator.complex_eigenvalues().iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip([0.0, 2.0, 2.0, 2.0]) {
            assert!((a - b).abs() < 1e-8, "{ev:?}");
        }
        assert!((c.scalar - 6.0).abs() < 1e-8);
    }
}
