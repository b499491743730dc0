use std::f64::consts::FRAC_1_SQRT_2;

use isoparam::focal::{extract_frame_tensors, random_frame, shape_blocks, shape_operator, FrameTensors, ShapeBlocks};
use isoparam::linalg::rank;
use isoparam::quadforms::*;
use isoparam::rng::{gaussian_vector, sample_rng, special_orthogonal};
use isoparam::*;
use nalgebra::{DMatrix, DVector};

fn fkm_data(m: usize, l: usize, seed: u64) -> (FrameTensors, ShapeBlocks, BilinearSystem) {
    let sys = fkm_system_on(m, l).unwrap();
    let f = random_frame(&sys, seed).unwrap();
    let t = extract_frame_tensors(&f);
    let b = shape_blocks(&f).unwrap();
    let bs = BilinearSystem::from_tensors(&t);
    (t, b, bs)
}

#[test]
fn forms_agree_three_ways() {
    let (t, blocks, bs) = fkm_data(3, 8, 2);
    let (n, m) = (t.n, t.m);
    let frame = random_frame(&fkm_system_on(3, 8).unwrap(), 2).unwrap();
    let s0 = shape_operator(&frame, &frame.normals[0]).unwrap();
    for i in 0..20 {
        let mut rng = sample_rng(1, 0, i);
        let x = gaussian_vector(&mut rng, n);
        let y = gaussian_vector(&mut rng, n);
        let mut v = DVector::zeros(2 * n + m);
        v.rows_mut(0, n).copy_from(&x);
        v.rows_mut(n, n).copy_from(&y);
        for a in 0..m {
            let direct = bs.eval(a, &x, &y);
            let shape = 0.25 * (&blocks.s[a] * &v).dot(&v);
            let mut sum = 0.0;
            for al in 0..n {
                for mu in 0..n {
                    sum += t.f_mu_alpha_a[(mu, al, a)] * x[al] * y[mu];
                }
            }
            assert!((direct - shape).abs() <= 1e-12 && (direct - sum).abs() <= 1e-12);
            let mut xy = DVector::zeros(2 * n);
            xy.rows_mut(0, n).copy_from(&x);
            xy.rows_mut(n, n).copy_from(&y);
            assert!(((&bs.symmetric_form(a) * &xy).dot(&xy) - direct).abs() <= 1e-12);
        }
        assert_eq!(bs.signature(&x, &y), x.norm_squared() - y.norm_squared());
        assert!(((&s0 * &v).dot(&v) - bs.signature(&x, &y)).abs() <= 1e-12);
    }
}

#[test]
fn symmetric_rank_is_twice_matrix_rank() {
    for (m, l) in [(2, 4), (3, 8), (4, 8)] {
        let (_, _, bs) = fkm_data(m, l, 3);
        for a in 0..m {
            assert_eq!(rank(&bs.symmetric_form(a), None).0, 2 * rank(&bs.mats[a], None).0);
        }
    }
}

#[test]
fn rank_bound_and_spanning_on_three_four() {
    let (_, _, bs) = fkm_data(3, 8, 4);
    let r = rank_and_spanning_check(&bs, 10, 5, None).unwrap();
    assert!(r.rank_bound_holds && r.pass);
    assert_eq!(r.rank_bound, 1);
    assert!(r.x_certificate.is_found() && r.y_certificate.is_found());
    assert!(r.ranks.iter().all(|&k| k as i64 >= r.rank_bound));
}

#[test]
fn spanning_fails_when_m1_exceeds_m2() {
    let (_, _, bs) = fkm_data(4, 8, 4);
    let r = rank_and_spanning_check(&bs, 10, 5, None).unwrap();
    assert!(r.rank_bound_holds);
    assert!(!r.x_certificate.is_found());
    assert!(matches!(r.x_certificate, Certificate::FailureAfterTrials { trials: 10 }));
}

#[test]
fn zero_form_fails_rank_bound() {
    let bs = BilinearSystem::new(vec![DMatrix::zeros(3, 3)]).unwrap();
    let r = rank_and_spanning_check(&bs, 10, 0, None).unwrap();
    assert_eq!(r.rank_bound, 2);
    assert!(!r.rank_bound_holds && !r.pass);
    assert!(!r.x_certificate.is_found() && !r.y_certificate.is_found());
    assert!(BilinearSystem::new(vec![DMatrix::zeros(3, 3), DMatrix::zeros(2, 2)]).is_err());
}

#[test]
fn ozeki_takeuchi_ranks() {
    for h in 1..=4 {
        let bs = ozeki_takeuchi_system(h);
        let r = rank_and_spanning_check(&bs, 10, 0, None).unwrap();
        assert_eq!(r.ranks, vec![2 * h, 2 * h]);
        assert!(r.rank_bound_holds);
    }
}

#[test]
fn normal_form_is_fixed_on_canonical_input() {
    let (a, b, c) = normal_form_triple(6, 4, &[(0.3, 2), (FRAC_1_SQRT_2, 1)]).unwrap();
    let r = block_normal_form(&a, &b, &c, NormalFormOptions::new(1e-9)).unwrap();
    assert!(r.pass, "{:?}", r.residuals);
    assert_eq!(r.rank, 3);
    assert!((&r.a - &a).amax() < 1e-12 && (&r.b - &b).amax() < 1e-12);
    assert_eq!(r.kernel_dim_a, 1);
}

#[test]
fn normal_form_recovers_scrambled_triples() {
    let layouts: [(usize, usize, &[(f64, usize)]); 3] = [
        (6, 4, &[(0.3, 2), (0.5, 2)]),
        (5, 3, &[(0.2, 2), (FRAC_1_SQRT_2, 1)]),
        (4, 4, &[(0.6, 4)]),
    ];
    for seed in 0..50u64 {
        let (n, m, clusters) = layouts[seed as usize % layouts.len()];
        let (a, b, c) = normal_form_triple(n, m, clusters).unwrap();
        let mut rng = sample_rng(seed, 9, 0);
        let u = special_orthogonal(&mut rng, n);
        let v = special_orthogonal(&mut rng, n);
        let w = special_orthogonal(&mut rng, m);
        let (a2, b2, c2) = (&u * a * v.transpose(), &u * b * w.transpose(), &v * c * w.transpose());
        let r = block_normal_form(&a2, &b2, &c2, NormalFormOptions::new(1e-9)).unwrap();
        assert!(r.pass, "seed {seed}: {:?}", r.residuals);
        let mut expected: Vec<f64> = clusters.iter().flat_map(|&(s, k)| vec![s; k]).collect();
        expected.sort_by(|x, y| y.total_cmp(x));
        assert_eq!(r.sigmas.len(), expected.len());
        for (s, e) in r.sigmas.iter().zip(&expected) {
            assert!((s - e).abs() < 1e-9);
        }
        for blk in &r.blocks {
            let size = clusters.iter().find(|c| (c.0 - blk.sigma).abs() < 1e-9).unwrap().1;
            assert_eq!(blk.size, size);
            assert!((blk.f * blk.f - (1.0 - 2.0 * blk.sigma * blk.sigma)).abs() < 1e-9);
        }
        // The recovered bases carry the scrambled triple back to normal form.
        let back = r.plus_basis.transpose() * &a2 * &r.minus_basis;
        assert!((back - &r.a).amax() < 1e-9);
    }
}

#[test]
fn normal_form_on_fkm_blocks() {
    for seed in 0..5 {
        let (_, blocks, _) = fkm_data(3, 8, seed);
        for a in 0..3 {
            let r = block_normal_form(&blocks.a[a], &blocks.b[a], &blocks.c[a], NormalFormOptions::new(1e-9)).unwrap();
            assert!(r.pass, "{:?}", r.residuals);
            assert!(r.residuals["delta_squares"] <= 1e-9);
        }
    }
}

#[test]
fn incompatible_blocks_are_rejected() {
    let (a, b, _) = normal_form_triple(4, 2, &[(0.4, 2)]).unwrap();
    let c = &b * 2.0;
    assert!(matches!(
        block_normal_form(&a, &b, &c, NormalFormOptions::new(1e-9)),
        Err(Error::IncompatibleBC { .. })
    ));
    assert!(block_normal_form(&a, &b, &DMatrix::zeros(3, 2), NormalFormOptions::new(1e-9)).is_err());
    assert!(normal_form_triple(2, 2, &[(0.4, 4)]).is_err());
}

#[test]
fn incidence_probe_on_fkm_systems() {
    let (_, _, bs) = fkm_data(3, 8, 1);
    let p = incidence_dimension_probe(&bs, 3, 200, 100, 1, None).unwrap();
    assert_eq!(p.generic_kernel_dim, 0);
    assert!(p.fiber_bound_holds);
    assert_eq!(p.jacobian_ranks.get(&3), Some(&100));
    assert_eq!(p.smooth_fraction, 1.0);
    let (_, _, bs) = fkm_data(4, 8, 1);
    let p = incidence_dimension_probe(&bs, 4, 200, 20, 1, None).unwrap();
    assert!(p.max_fiber_dim <= p.fiber_bound);
    assert!(incidence_dimension_probe(&bs, 5, 1, 1, 1, None).is_err());
}

#[test]
fn ozeki_takeuchi_exact_kernels() {
    for h in 1..=4 {
        let (_, a) = ozeki_takeuchi_example(h, 20, 3).unwrap();
        assert_eq!(a.special_kernel_dims, [h + 1, h + 1]);
        assert_eq!(a.dim_z2, a.m2 + 1);
        // The last coordinate lies in every kernel, so generic c leaves one.
        assert_eq!(a.generic_kernel_dim, 1);
        assert!(a.generic_kernel_dims.iter().all(|&d| d <= a.special_kernel_dims[0]));
    }
    let (sys, a) = ozeki_takeuchi_example(2, 5, 0).unwrap();
    assert_eq!(a.m2, 5);
    assert_eq!(a.dim_z2, 6);
    assert_eq!(exact_kernel_dim(&sys.mats[0], &sys.mats[1], [(0, 1), (1, 0)]), 3);
    assert_eq!(exact_kernel_dim(&sys.mats[0], &sys.mats[1], [(1, 0), (0, 0)]), 1);
    assert_eq!(exact_kernel_dim(&sys.mats[0], &sys.mats[1], [(2, 1), (1, 3)]), 1);
    assert!(ozeki_takeuchi_example(0, 1, 0).is_err());
}

#[test]
fn bilinear_document_shape() {
    let (_, _, bs) = fkm_data(2, 4, 1);
    let doc = serde_json::to_value(bs.to_document()).unwrap();
    assert_eq!(doc["m1"], 2);
    assert_eq!(doc["mats"].as_array().unwrap().len(), 2);
}
