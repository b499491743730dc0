use isoparam::clifford::{clifford_residuals, SignedPerm};
use isoparam::fkm::{normal_from_coefficients, tube_constancy, CartanMunznerField};
use isoparam::focal::*;
use isoparam::par::map_indices;
use isoparam::quadforms::*;
use isoparam::reconstruct::span_distance;
use isoparam::rng::{gaussian_vector, seeded_rng, special_orthogonal, unit_vector};
use isoparam::*;
use proptest::prelude::*;

const SYSTEMS: [(usize, usize); 4] = [(1, 3), (2, 4), (3, 8), (4, 8)];

fn signed_perm(n: usize) -> impl Strategy<Value = SignedPerm> {
    (Just((0..n).collect::<Vec<_>>()).prop_shuffle(), prop::collection::vec(prop::bool::ANY, n))
        .prop_map(|(perm, signs)| SignedPerm::from_parts(perm, signs.into_iter().map(|s| if s { 1 } else { -1 }).collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn signed_perms_match_their_matrices(a in signed_perm(5), b in signed_perm(5), c in signed_perm(3)) {
        prop_assert_eq!(a.compose(&b).to_integer_matrix(), a.to_integer_matrix() * b.to_integer_matrix());
        prop_assert_eq!(a.transpose().to_integer_matrix(), a.to_integer_matrix().transpose());
        prop_assert_eq!(a.compose(&b).transpose(), b.transpose().compose(&a.transpose()));
        prop_assert!(a.compose(&a.transpose()).is_identity());
        prop_assert_eq!(a.kron(&c).to_integer_matrix(), a.to_integer_matrix().kronecker(&c.to_integer_matrix()));
    }

    #[test]
    fn generators_stay_exact_with_copies(q in 0usize..12, copies in 1usize..4) {
        let delta = minimal_module_dimension(q) as usize;
        prop_assert!(build_generators(q, delta * copies).unwrap().is_exact_clifford());
        if delta > 1 {
            prop_assert!(build_generators(q, delta * copies + 1).is_err());
        }
    }

    #[test]
    fn rotation_round_trip(idx in 0usize..4, seed in any::<u64>()) {
        let (m, l) = SYSTEMS[idx];
        let sys = fkm_system_on(m, l).unwrap();
        let a = special_orthogonal(&mut seeded_rng(seed), m + 1);
        let r = rotate_system(&sys, &a).unwrap();
        let (sym, orth, anti) = clifford_residuals(&r);
        prop_assert!(sym <= 1e-12 && orth <= 1e-12 && anti <= 1e-12);
        let back = rotate_system(&r, &a.transpose()).unwrap();
        for (p, q) in back.operators().iter().zip(sys.operators()) {
            prop_assert!((p - q).amax() <= 1e-14);
        }
    }

    #[test]
    fn field_is_quartic(idx in 0usize..4, seed in any::<u64>(), lambda in 0.1f64..4.0) {
        let (m, l) = SYSTEMS[idx];
        let sys = fkm_system_on(m, l).unwrap();
        let field = CartanMunznerField::new(&sys);
        let x = gaussian_vector(&mut seeded_rng(seed), sys.dim());
        let fx = field.value(&x).unwrap();
        let l4 = lambda.powi(4);
        prop_assert!((field.value(&(&x * lambda)).unwrap() - l4 * fx).abs() <= 1e-12 * l4 * (1.0 + fx.abs()));
        let euler = field.gradient(&x).unwrap().dot(&x) - 4.0 * fx;
        prop_assert!(euler.abs() <= 1e-10 * (1.0 + x.norm_squared().powi(2)));
    }

    #[test]
    fn tube_value_is_cos_four_t(idx in 0usize..4, seed in any::<u64>(), t in -3.0f64..3.0) {
        let (m, l) = SYSTEMS[idx];
        let sys = fkm_system_on(m, l).unwrap();
        let c = tube_constancy(&CartanMunznerField::new(&sys), 2, 2, t, seed).unwrap();
        prop_assert!((c.mean - (4.0 * t).cos()).abs() <= 1e-12);
        prop_assert!(c.spread <= 1e-12);
    }

    #[test]
    fn focal_spectra_are_universal(idx in 0usize..4, seed in any::<u64>()) {
        let (m, l) = SYSTEMS[idx];
        let sys = fkm_system_on(m, l).unwrap();
        let frame = random_frame(&sys, seed).unwrap();
        let c = unit_vector(&mut seeded_rng(seed ^ 0x5a5a), m + 1);
        let nu = normal_from_coefficients(&sys, &frame.x, &c);
        let spec = focal_spectrum(&frame, &nu).unwrap();
        let n = l - m - 1;
        prop_assert_eq!(spec.counts, [n, m, n]);
        prop_assert!(spec.max_deviation <= 1e-8);
    }

    #[test]
    fn frame_relations_hold(idx in 0usize..4, seed in any::<u64>()) {
        let (m, l) = SYSTEMS[idx];
        let frame = random_frame(&fkm_system_on(m, l).unwrap(), seed).unwrap();
        let t = extract_frame_tensors(&frame);
        for (_, r) in tensor_relation_residuals(&t) {
            prop_assert!(r <= 1e-12);
        }
        let report = verify_focal_identities(&t, &shape_blocks(&frame).unwrap(), 1e-10);
        prop_assert!(report.pass);
    }

    #[test]
    fn scrambled_normal_forms_recover(
        seed in any::<u64>(),
        s1 in 0.05f64..0.65,
        gap in 0.01f64..0.05,
        extra in 0usize..3,
    ) {
        let s2 = s1 + gap;
        let clusters = [(s1, 2), (s2, 2)];
        let (n, mz) = (4 + extra, 4 + extra / 2);
        let (a, b, c) = normal_form_triple(n, mz, &clusters).unwrap();
        let mut rng = seeded_rng(seed);
        let u = special_orthogonal(&mut rng, n);
        let v = special_orthogonal(&mut rng, n);
        let w = special_orthogonal(&mut rng, mz);
        let r = block_normal_form(&(&u * a * v.transpose()), &(&u * b * w.transpose()), &(&v * c * w.transpose()), NormalFormOptions::new(1e-9)).unwrap();
        prop_assert!(r.pass, "{:?}", r.residuals);
        prop_assert_eq!(r.blocks.len(), 2);
        prop_assert!((r.sigmas[0] - s2).abs() < 1e-9 && (r.sigmas[3] - s1).abs() < 1e-9);
    }

    #[test]
    fn exact_and_numeric_kernels_agree(h in 1usize..4, re1 in -3i64..4, im1 in -3i64..4, re2 in -3i64..4, im2 in -3i64..4) {
        prop_assume!((re1, im1, re2, im2) != (0, 0, 0, 0));
        let sys = ozeki_takeuchi_system(h);
        let exact = exact_kernel_dim(&sys.mats[0], &sys.mats[1], [(re1, im1), (re2, im2)]);
        let c1 = nalgebra::Complex::new(re1 as f64, im1 as f64);
        let c2 = nalgebra::Complex::new(re2 as f64, im2 as f64);
        let k = sys.mats[0].map(|v| nalgebra::Complex::new(v, 0.0)) * c1 + sys.mats[1].map(|v| nalgebra::Complex::new(v, 0.0)) * c2;
        let sv = k.singular_values();
        let smax = sv.max();
        let numeric = sv.iter().filter(|&&s| s <= 1e-10 * smax.max(1.0)).count();
        prop_assert_eq!(exact, numeric);
    }

    #[test]
    fn span_distance_is_rotation_covariant(seed in any::<u64>()) {
        let sys = fkm_system_on(3, 8).unwrap();
        let frame = random_frame(&sys, seed).unwrap();
        let recon = isoparam::reconstruct::build_q_operators(&frame, &extract_frame_tensors(&frame)).unwrap();
        let a = special_orthogonal(&mut seeded_rng(seed.wrapping_add(1)), 4);
        let rotated = rotate_system(&sys, &a).unwrap();
        prop_assert!(span_distance(&recon.operators, rotated.operators()) <= 1e-10);
    }

    #[test]
    fn json_round_trip_is_exact(idx in 0usize..4, seed in any::<u64>()) {
        let (m, l) = SYSTEMS[idx];
        let sys = fkm_system_on(m, l).unwrap();
        let r = rotate_system(&sys, &special_orthogonal(&mut seeded_rng(seed), m + 1)).unwrap();
        prop_assert_eq!(CliffordSystem::from_json(&r.to_json()).unwrap(), r);
    }
}

#[test]
fn parallel_map_preserves_order() {
    let v = map_indices(1000, |i| i * i);
    assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
}

#[test]
fn special_orthogonal_has_unit_determinant() {
    for seed in 0..20 {
        let q = special_orthogonal(&mut seeded_rng(seed), 5);
        assert!((q.determinant() - 1.0).abs() < 1e-12);
        assert!((q.transpose() * &q - nalgebra::DMatrix::identity(5, 5)).amax() < 1e-12);
    }
}
