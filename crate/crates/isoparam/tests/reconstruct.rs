use isoparam::error::FkmCondition;
use isoparam::focal::{extract_frame_tensors, random_frame, DarbouxFrame};
use isoparam::reconstruct::*;
use isoparam::rng::{seeded_rng, special_orthogonal};
use isoparam::*;

fn round_trip(m: usize, l: usize, seed: u64) -> (CliffordSystem, DarbouxFrame, ReconstructedOperators) {
    let sys = fkm_system_on(m, l).unwrap();
    let frame = random_frame(&sys, seed).unwrap();
    let recon = build_q_operators(&frame, &extract_frame_tensors(&frame)).unwrap();
    (sys, frame, recon)
}

#[test]
fn zeroth_operator_acts_as_prescribed() {
    let (sys, f, recon) = round_trip(3, 8, 1);
    let q0 = &recon.operators[0];
    assert!((q0 * &f.x - &f.normals[0]).amax() < 1e-10);
    assert!((q0 * &f.normals[0] - &f.x).amax() < 1e-10);
    for u in &f.plus {
        assert!((q0 * u + u).amax() < 1e-10);
    }
    for u in &f.minus {
        assert!((q0 * u - u).amax() < 1e-10);
    }
    assert!((q0 - sys.operator(0)).amax() < 1e-12);
    for a in 1..=3 {
        assert!((&recon.operators[a] * &f.x - &f.normals[a]).amax() < 1e-10);
    }
    assert!(recon.symmetry_residual < 1e-12);
}

#[test]
fn round_trip_passes_on_test_systems() {
    for (m, l) in [(1, 3), (2, 4), (3, 8), (4, 8)] {
        for seed in 0..3 {
            let (sys, _, recon) = round_trip(m, l, seed);
            let report = verify_reconstruction(&recon, &sys, 1e-8).unwrap();
            assert!(report.pass, "({m}, {l}) seed {seed}: {report:?}");
        }
    }
}

#[test]
fn round_trip_on_every_admissible_small_system() {
    let mut covered = 0;
    for m in 1..=16 {
        let delta = minimal_module_dimension(m - 1) as usize;
        for l in (delta..=32).step_by(delta) {
            if l < m + 2 {
                continue;
            }
            let (sys, _, recon) = round_trip(m, l, 7);
            let report = verify_reconstruction(&recon, &sys, 1e-8).unwrap();
            assert!(report.pass, "({m}, {l}): {report:?}");
            covered += 1;
        }
    }
    assert!(covered >= 20, "only {covered} systems");
}

#[test]
fn unrelated_system_is_far_in_span() {
    let (sys, _, recon) = round_trip(3, 8, 2);
    let o = special_orthogonal(&mut seeded_rng(5), sys.dim());
    let other: Vec<_> = sys.operators().iter().map(|p| &o * p * o.transpose()).collect();
    let other = CliffordSystem::new(other, false).unwrap();
    assert!(verify_clifford_system(&other, 1e-12).pass);
    let d = span_distance(&recon.operators, other.operators());
    assert!(d > 0.5, "span distance {d}");
    let report = verify_reconstruction(&recon, &other, 1e-8).unwrap();
    assert!(!report.pass);
}

#[test]
fn span_distance_is_rotation_invariant() {
    let (sys, _, recon) = round_trip(4, 8, 3);
    let a = special_orthogonal(&mut seeded_rng(11), 5);
    let rotated = rotate_system(&sys, &a).unwrap();
    let d0 = span_distance(&recon.operators, sys.operators());
    let d1 = span_distance(&recon.operators, rotated.operators());
    assert!(d0 < 1e-10 && d1 < 1e-10);
}

#[test]
fn broken_mixed_symmetry_is_reported() {
    let sys = fkm_system_on(3, 8).unwrap();
    let frame = random_frame(&sys, 4).unwrap();
    let mut t = extract_frame_tensors(&frame);
    t.f_mu_alpha_p[(0, 1, 2)] += 1e-2;
    match build_q_operators(&frame, &t) {
        Err(Error::ConditionViolated(list)) => {
            assert_eq!(list.len(), 1);
            assert_eq!(list[0].0, FkmCondition::MixedSymmetry);
            assert!((list[0].1 - 1e-2).abs() < 1e-10);
        }
        other => panic!("expected ConditionViolated, got {other:?}"),
    }
    let mut t = extract_frame_tensors(&frame);
    t.l[(0, 1, 2)] += 1e-2;
    assert!(matches!(
        build_q_operators(&frame, &t),
        Err(Error::ConditionViolated(list)) if list[0].0 == FkmCondition::TripleSkew
    ));
}

#[test]
fn mismatched_shapes_are_rejected() {
    let (_, frame, recon) = round_trip(2, 4, 1);
    let other = fkm_system_on(3, 8).unwrap();
    assert!(matches!(verify_reconstruction(&recon, &other, 1e-8), Err(Error::ShapeMismatch(_))));
    let t = extract_frame_tensors(&random_frame(&other, 1).unwrap());
    assert!(matches!(build_q_operators(&frame, &t), Err(Error::ShapeMismatch(_))));
}

#[test]
fn reconstructed_system_serializes_as_inexact() {
    let (_, _, recon) = round_trip(2, 4, 1);
    let sys = recon.to_system().unwrap();
    assert!(!sys.is_exact());
    let back = CliffordSystem::from_json(&sys.to_json()).unwrap();
    assert_eq!(back.operators(), sys.operators());
}
