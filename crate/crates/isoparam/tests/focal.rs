use isoparam::fkm::{normal_from_coefficients, CartanMunznerField};
use isoparam::focal::*;
use isoparam::rng::{sample_rng, seeded_rng, unit_vector};
use isoparam::*;
use nalgebra::{DMatrix, DVector};

const SYSTEMS: [(usize, usize); 4] = [(1, 3), (2, 4), (3, 8), (4, 8)];

fn frames(m: usize, l: usize, count: u64) -> Vec<DarbouxFrame> {
    let sys = fkm_system_on(m, l).unwrap();
    (0..count).map(|s| random_frame(&sys, 100 + s).unwrap()).collect()
}

#[test]
fn projection_fixed_point_and_convergence() {
    let sys = fkm_system_on(3, 8).unwrap();
    let frame = random_frame(&sys, 1).unwrap();
    let p = project_to_mplus(&sys, &frame.x, 1e-12, 20).unwrap();
    assert_eq!(p.iterations, 0);
    assert_eq!(p.point, frame.x);
    for i in 0..20 {
        let x0 = unit_vector(&mut sample_rng(3, 0, i), sys.dim());
        let p = project_to_mplus(&sys, &x0, 1e-12, 20).unwrap();
        assert!(p.iterations <= 20 && p.residual <= 1e-12);
        assert!(manifold_residual(&sys, &p.point) <= 1e-12);
    }
    let zero = DVector::zeros(sys.dim());
    assert!(matches!(project_to_mplus(&sys, &zero, 1e-12, 20), Err(Error::SingularJacobian { .. })));
    assert!(matches!(build_frame(&sys, &(&frame.x * 1.1), 0), Err(Error::OffManifold { .. })));
}

#[test]
fn frame_dimensions_and_invariants() {
    for (m, l) in SYSTEMS {
        for f in frames(m, l, 3) {
            let n = l - m - 1;
            assert_eq!((f.m(), f.n(), f.osculating.len(), f.minus.len()), (m, n, m, n));
            assert_eq!(f.all_vectors().len(), 2 * l);
            let report = f.validate(1e-10);
            assert!(report.pass, "({m}, {l}): {report:?}");
        }
    }
}

#[test]
fn signature_normal_is_diagonal() {
    let f = &frames(3, 8, 1)[0];
    let (m, n) = (f.m(), f.n());
    let s = shape_operator(f, &f.normals[0]).unwrap();
    let mut diag = vec![1.0; n];
    diag.extend(vec![-1.0; n]);
    diag.extend(vec![0.0; m]);
    let expected = DMatrix::from_diagonal(&DVector::from_vec(diag));
    assert!((s - expected).amax() < 1e-10);
}

#[test]
fn osculating_normals_have_zero_diagonal_blocks() {
    for (m, l) in SYSTEMS {
        let f = &frames(m, l, 1)[0];
        let blocks = shape_blocks(f).unwrap();
        assert!(blocks.diagonal_block_residual() < 1e-12);
        for s in &blocks.s {
            assert!((s - s.transpose()).amax() < 1e-12);
        }
    }
}

#[test]
fn random_normals_have_focal_spectrum() {
    for (m, l) in SYSTEMS {
        let n = l - m - 1;
        for f in frames(m, l, 2) {
            for j in 0..5 {
                let c = unit_vector(&mut sample_rng(7, 1, j), m + 1);
                let nu = normal_from_coefficients(&f.system, &f.x, &c);
                let spec = focal_spectrum(&f, &nu).unwrap();
                assert_eq!(spec.counts, [n, m, n]);
                assert!(spec.max_deviation < 1e-8);
            }
        }
    }
    let f = &frames(2, 4, 1)[0];
    assert!(matches!(shape_operator(f, &f.plus[0]), Err(Error::NotUnitNormal { .. })));
}

#[test]
fn shape_operator_is_linear_in_the_normal() {
    let f = &frames(4, 8, 1)[0];
    let mut rng = seeded_rng(12);
    let c1 = unit_vector(&mut rng, 5);
    let c2 = unit_vector(&mut rng, 5);
    let (alpha, beta) = (0.6, 0.8);
    let n1 = normal_from_coefficients(&f.system, &f.x, &c1);
    let n2 = normal_from_coefficients(&f.system, &f.x, &c2);
    let combo = &n1 * alpha + &n2 * beta;
    let combo = &combo / combo.norm();
    let scale = (&n1 * alpha + &n2 * beta).norm();
    let lhs = shape_operator(f, &combo).unwrap() * scale;
    let rhs = shape_operator(f, &n1).unwrap() * alpha + shape_operator(f, &n2).unwrap() * beta;
    assert!((lhs - rhs).amax() <= 1e-10);
}

#[test]
fn tensor_relations_are_tight() {
    for (m, l) in SYSTEMS {
        for f in frames(m, l, 3) {
            let t = extract_frame_tensors(&f);
            for (cond, r) in tensor_relation_residuals(&t) {
                assert!(r <= 1e-12, "({m}, {l}) {cond:?}: {r}");
            }
            let blocks = shape_blocks(&f).unwrap();
            let (fap, fmp, fma) = tensors_from_blocks(&blocks);
            assert!(fap.max_abs_diff(&t.f_alpha_pa) < 1e-12);
            assert!(fmp.max_abs_diff(&t.f_mu_pa) < 1e-12);
            assert!(fma.max_abs_diff(&t.f_mu_alpha_a) < 1e-12);
        }
    }
}

#[test]
fn triple_coefficients_are_totally_skew() {
    // On (4, 8) the coefficients vanish outright, so use (3, 8).
    let f = &frames(3, 8, 1)[0];
    let t = extract_frame_tensors(f);
    let mut nonzero = 0.0f64;
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                let v = t.l[(a, b, c)];
                nonzero = nonzero.max(v.abs());
                for w in [t.l[(b, a, c)], t.l[(a, c, b)], t.l[(c, b, a)]] {
                    assert!((v + w).abs() <= 1e-12);
                }
            }
        }
    }
    assert!(nonzero > 1e-3, "L vanishes identically; the check would be vacuous");
}

#[test]
fn identities_hold_on_fkm_frames() {
    for (m, l) in SYSTEMS {
        for f in frames(m, l, 3) {
            let t = extract_frame_tensors(&f);
            let blocks = shape_blocks(&f).unwrap();
            let report = verify_focal_identities(&t, &blocks, 1e-10);
            assert!(report.pass, "({m}, {l}): {report:?}");
            for name in QUADRATIC_FAMILY_NAMES {
                assert!(report.component(name).is_some());
            }
        }
    }
}

#[test]
fn small_systems_skip_vacuous_families() {
    let f = &frames(1, 3, 1)[0];
    let report = verify_focal_identities(&extract_frame_tensors(f), &shape_blocks(f).unwrap(), 1e-10);
    assert!(report.skipped.contains(&"shape_triple".to_string()));
    assert!(report.skipped.contains(&"shape_pair".to_string()));
    let f = &frames(2, 4, 1)[0];
    let report = verify_focal_identities(&extract_frame_tensors(f), &shape_blocks(f).unwrap(), 1e-10);
    assert_eq!(report.skipped, vec!["shape_triple".to_string()]);
}

#[test]
fn perturbed_tensor_fails_identities() {
    let f = &frames(3, 8, 1)[0];
    let mut t = extract_frame_tensors(f);
    t.f_alpha_pa[(1, 0, 2)] += 1e-3;
    let report = verify_focal_identities(&t, &shape_blocks(f).unwrap(), 1e-10);
    assert!(!report.pass);
    assert!(report.residuals.max >= 1e-4);
}

#[test]
fn identities_do_not_depend_on_the_basis_seed() {
    let sys = fkm_system_on(3, 8).unwrap();
    let f = random_frame(&sys, 5).unwrap();
    let g = build_frame(&sys, &f.x, 999).unwrap();
    assert!((DMatrix::from_columns(&f.plus) - DMatrix::from_columns(&g.plus)).amax() > 1e-3);
    for frame in [&f, &g] {
        let report = verify_focal_identities(&extract_frame_tensors(frame), &shape_blocks(frame).unwrap(), 1e-10);
        assert!(report.pass);
    }
}

#[test]
fn antipodal_swap_on_fkm_frames() {
    for (m, l) in SYSTEMS {
        for f in frames(m, l, 3) {
            let check = antipodal_swap_check(&f, 1e-10, 4).unwrap();
            assert!(check.report.pass, "({m}, {l}): {:?}", check.report);
            assert!(check.report.component("double_swap_tensors").unwrap().max <= DOUBLE_SWAP_TOL);
            assert!(manifold_residual(&f.system, &check.barred.x) <= 1e-10);
        }
    }
}

#[test]
fn slice_formula_on_fkm_frames() {
    for (m, l) in SYSTEMS {
        let f = &frames(m, l, 1)[0];
        let report = verify_slice_formula(f, 100, 3, 1e-10).unwrap();
        assert!(report.pass, "({m}, {l}): {report:?}");
    }
    let f = &frames(3, 8, 1)[0];
    let report = verify_slice_formula(f, 50, 3, 1e-10).unwrap();
    assert_eq!(report.notes["kernel_points"], 50);
}

#[test]
fn plus_vector_in_the_slice() {
    let f = &frames(3, 8, 1)[0];
    let field = CartanMunznerField::new(&f.system);
    let z = &f.plus[0];
    let basis = f.tangent_basis();
    let forms: Vec<f64> = f
        .normals
        .iter()
        .map(|e| {
            let s = shape_matrix(&f.system, &f.x, e, &basis).unwrap();
            let coords = DVector::from_fn(basis.len(), |k, _| basis[k].dot(z));
            (&s * &coords).dot(&coords)
        })
        .collect();
    assert!((forms[0] - 1.0).abs() < 1e-12);
    // The remaining forms vanish on V_+ alone, so F(z) = 1 − 2.
    assert!(forms[1..].iter().all(|p| p.abs() < 1e-12));
    assert!((field.value(z).unwrap() + 1.0).abs() < 1e-12);
}

#[test]
fn frame_document_round_trip_fields() {
    let f = &frames(2, 4, 1)[0];
    let doc = serde_json::to_value(f.to_document()).unwrap();
    assert_eq!(doc["plus"].as_array().unwrap().len(), 1);
    assert_eq!(doc["basis_seed"], f.basis_seed);
}
