//! Browser bindings. Every export returns a JSON string; failures come back
//! as `{"error": "..."}` so the page never has to catch exceptions.

use std::f64::consts::FRAC_PI_4;

use isoparam::clifford::{enumerate_fkm_pairs, fkm_system_on, CliffordSystem};
use isoparam::fkm::{level_shape_spectrum, normal_from_coefficients, CartanMunznerField, TubePoint};
use isoparam::focal::{random_frame, shape_operator};
use isoparam::linalg::symmetric_eigenvalues;
use isoparam::rng::{sample_rng, unit_vector};
use nalgebra::DVector;
use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

const STREAM_DEMO_NORMAL: u64 = 0xde40;

fn render(result: Result<Value, String>) -> String {
    match result {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

fn system(m: usize, l: usize) -> Result<CliffordSystem, String> {
    fkm_system_on(m, l).map_err(|e| e.to_string())
}

/// FKM multiplicity pairs with m1 up to `max_m1`, plus the open cases.
#[wasm_bindgen]
pub fn enumerate_pairs(max_m1: u32) -> String {
    render(if max_m1 == 0 {
        Err("max_m1 must be positive".into())
    } else {
        serde_json::to_value(enumerate_fkm_pairs(u64::from(max_m1))).map_err(|e| e.to_string())
    })
}

/// Principal curvature clusters of the level hypersurfaces along one normal
/// geodesic, sampled at `steps` interior points of (0, π/4).
#[wasm_bindgen]
pub fn curvature_profile(m: usize, l: usize, steps: usize, seed: u64) -> String {
    render((|| {
        if steps == 0 {
            return Err("steps must be positive".to_string());
        }
        let sys = system(m, l)?;
        let frame = random_frame(&sys, seed).map_err(|e| e.to_string())?;
        let field = CartanMunznerField::new(&sys);
        let mut samples = Vec::with_capacity(steps);
        for i in 0..steps {
            let t = FRAC_PI_4 * (i as f64 + 0.5) / steps as f64;
            let tube = TubePoint::new(frame.x.clone(), frame.normals[0].clone(), t).map_err(|e| e.to_string())?;
            let spec = level_shape_spectrum(&field, &tube, 1e-8).map_err(|e| e.to_string())?;
            samples.push(json!({
                "t": t,
                "clusters": spec.clusters,
                "expected": spec.matches.iter().map(|c| c.expected).collect::<Vec<_>>(),
                "max_deviation": spec.max_deviation,
            }));
        }
        Ok(json!({
            "m": sys.m(),
            "half_dim": sys.half_dim(),
            "multiplicities": [sys.m(), sys.complementary_multiplicity()],
            "samples": samples,
        }))
    })())
}

/// Eigenvalues of the focal shape operator for `count` random unit normals.
#[wasm_bindgen]
pub fn focal_spectra(m: usize, l: usize, count: usize, seed: u64) -> String {
    render((|| {
        let sys = system(m, l)?;
        let frame = random_frame(&sys, seed).map_err(|e| e.to_string())?;
        let mut spectra = Vec::with_capacity(count);
        for j in 0..count as u64 {
            let mut rng = sample_rng(seed, STREAM_DEMO_NORMAL, j);
            let c: DVector<f64> = unit_vector(&mut rng, sys.m() + 1);
            let nu = normal_from_coefficients(&sys, &frame.x, &c);
            let s = shape_operator(&frame, &nu).map_err(|e| e.to_string())?;
            let sym = (&s + s.transpose()) * 0.5;
            spectra.push(json!({
                "coefficients": c.as_slice(),
                "eigenvalues": symmetric_eigenvalues(&sym).as_slice(),
            }));
        }
        Ok(json!({
            "m": sys.m(),
            "half_dim": sys.half_dim(),
            "multiplicities": [sys.m(), sys.complementary_multiplicity()],
            "spectra": spectra,
        }))
    })())
}
