use isoparam_wasm::{curvature_profile, enumerate_pairs, focal_spectra};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).expect("exports return JSON")
}

#[test]
fn enumerate_pairs_includes_open_cases() {
    let v = parse(enumerate_pairs(16));
    assert_eq!(v["open_pairs"].as_array().unwrap().len(), 9);
    assert!(parse(enumerate_pairs(0)).get("error").is_some());
}

#[test]
fn curvature_profile_tracks_cotangent_curves() {
    let v = parse(curvature_profile(2, 4, 6, 3));
    let samples = v["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 6);
    for s in samples {
        assert!(s["max_deviation"].as_f64().unwrap() < 1e-8);
        assert_eq!(s["clusters"].as_array().unwrap().len(), 4);
    }
}

#[test]
fn focal_spectra_cluster_at_unit_values() {
    let v = parse(focal_spectra(3, 8, 4, 5));
    let (m, n) = (3usize, 4usize);
    for s in v["spectra"].as_array().unwrap() {
        let eig: Vec<f64> = serde_json::from_value(s["eigenvalues"].clone()).unwrap();
        assert_eq!(eig.len(), m + 2 * n);
        let near = |target: f64| eig.iter().filter(|e| (*e - target).abs() < 1e-9).count();
        assert_eq!((near(1.0), near(0.0), near(-1.0)), (n, m, n));
    }
}

#[test]
fn bad_dimension_reports_error() {
    assert!(parse(curvature_profile(3, 6, 4, 0)).get("error").is_some());
    assert!(parse(focal_spectra(2, 2, 1, 0)).get("error").is_some());
}
