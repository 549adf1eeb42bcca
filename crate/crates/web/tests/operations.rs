use folstab_web::{catalog_names, classify_value, sphere_instability_value, torus_spectrum_value};

#[test]
fn torus_spectrum_tracks_fourier_values() {
    let v = torus_spectrum_value(1.0, 2.0, 24, 5).unwrap();
    let ev: Vec<f64> = v["eigenvalues"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let ex: Vec<f64> = v["fourier"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(ev.len(), ex.len());
    for (a, b) in ev.iter().zip(&ex) {
        assert!((a - b).abs() <= 0.03 * b.max(1.0), "{a} vs {b}");
    }
    assert_eq!(v["index"], 0);
}

#[test]
fn classify_reports_clause() {
    let v = classify_value("SU(4)/Sp(2)").unwrap();
    assert_eq!(v["unstable"], false);
    assert_eq!(v["clause"], "c");
    assert!(classify_value("nowhere").is_err());
    assert!(catalog_names().iter().any(|n| n == "G2"));
}

#[test]
fn sphere_instability_certificate() {
    let v = sphere_instability_value(10).unwrap();
    assert!(v["qf_value"].as_f64().unwrap() < 0.0);
    let tr = v["trace_gauss"].as_f64().unwrap();
    assert!((tr / v["trace_exact"].as_f64().unwrap() - 1.0).abs() < 0.02);
    assert_eq!(v["spheres"][0]["unstable"], false);
    assert_eq!(v["spheres"][1]["unstable"], true);
}
