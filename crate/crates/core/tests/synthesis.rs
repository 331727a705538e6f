//! Kernel test, synthesis and independent verification in sequence.

use momt_core::commutative::{moments_from_tuple, solve_commutative_poisson, solve_trig_moment, total_degree_set};
use momt_core::gns::{synthesize_cp_model, synthesize_row_contraction, synthesize_star_representation, verify_certificate};
use momt_core::kernels::check_star_equality;
use momt_core::linalg::{c64, word_product, CMatrix};
use momt_core::poisson::{generate_instance, GenSpec, InstanceKind};
use momt_core::{AdmissibleSet, Error, LambdaSpec, MomentMap};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn row_contraction_roundtrip(seed in any::<u64>(), n in 1usize..3, dim in 1usize..3, depth in 1usize..3) {
        let g = generate_instance(&GenSpec::new(InstanceKind::RowContraction, n, dim, depth, seed)).unwrap();
        let cert = synthesize_row_contraction(&g.moments, 1e-9).unwrap();
        prop_assert!(cert.moment_residual <= 1e-7);
        prop_assert!(cert.defect_min_eig >= -1e-9);
        let report = verify_certificate(&cert, &g.moments, 1e-7).unwrap();
        prop_assert!(report.pass);
        prop_assert!((report.residual_norm - cert.moment_residual).abs() <= 1e-12);
    }

    #[test]
    fn commuting_roundtrip(seed in any::<u64>(), n in 1usize..3, dim in 1usize..3) {
        let g = generate_instance(&GenSpec::new(InstanceKind::Commuting, n, dim, 2, seed)).unwrap();
        let gamma = moments_from_tuple(&g.tuple, &total_degree_set(n, 2), &CMatrix::identity(dim), LambdaSpec::ones(n)).unwrap();
        let cert = solve_commutative_poisson(&gamma, 1e-9).unwrap();
        prop_assert!(cert.extra_residuals["commutation"] <= 1e-7);
        prop_assert!(cert.extra_residuals["gamma"] <= 1e-7);
        let (model, cp) = solve_trig_moment(&gamma, 1e-9).unwrap();
        prop_assert!(cp.extra_residuals["gamma"] <= 1e-7);
        prop_assert!(cp.extra_residuals["commutation"] <= 1e-7);
        prop_assert!((&model.embed.adjoint_mul(&model.embed) - &CMatrix::identity(dim)).max_abs() <= 1e-9);
    }
}

#[test]
fn scaled_moments_beyond_the_unit_ball_are_rejected() {
    // L(g1) = 2 L(g0) cannot come from a row contraction
    let sigma = AdmissibleSet::truncation(1, 1);
    let l = MomentMap::from_ordered(sigma, vec![CMatrix::identity(2), CMatrix::identity(2).scale(c64(2.0, 0.0))]).unwrap();
    match synthesize_row_contraction(&l, 1e-9) {
        Err(Error::InfeasibleMoments(r)) => assert!((r.min_eigenvalue + 3.0).abs() < 1e-12),
        other => panic!("expected infeasibility, got {other:?}"),
    }
}

#[test]
fn star_case_on_truncated_creations() {
    for (n, depth) in [(1, 2), (2, 1), (2, 2)] {
        let g = generate_instance(&GenSpec::new(InstanceKind::IsometricTruncated, n, 1, depth, 0)).unwrap();
        let report = check_star_equality(&g.moments, 1e-10).unwrap();
        assert!(report.pass && report.details["primed_agrees"] == 1.0);
        let cert = synthesize_star_representation(&g.moments, 1e-9).unwrap();
        for key in ["x_isometry", "t_partial_isometry", "t_range_orthogonality"] {
            assert!(cert.extra_residuals[key] <= 1e-8, "{key} = {}", cert.extra_residuals[key]);
        }
        assert!(verify_certificate(&cert, &g.moments, 1e-8).unwrap().pass);
    }
    // a strict contraction is not a *-representation
    let g = generate_instance(&GenSpec::new(InstanceKind::RowContraction, 2, 2, 2, 1)).unwrap();
    assert!(matches!(synthesize_star_representation(&g.moments, 1e-9), Err(Error::NotStarFeasible(_))));
}

#[test]
fn compressed_model_of_a_scalar_toeplitz_sequence() {
    // c_k = t^k with |t| < 1 is positive definite Toeplitz
    let t = c64(0.4, 0.3);
    let sigma = AdmissibleSet::truncation(1, 4);
    let l = MomentMap::from_fn(sigma, |w| CMatrix::scalar(t.powu(w.len() as u32))).unwrap();
    let (model, cert) = synthesize_cp_model(&l, &[], 1e-9).unwrap();
    assert!(cert.moment_residual <= 1e-9);
    for k in 0..=4u32 {
        let phi = model.embed.adjoint_mul(
            &word_product(&model.compressed_tuple, &momt_core::Word::new(&vec![1; k as usize], 1).unwrap(), model.ambient_dim)
                .matmul(&model.embed),
        );
        assert!((phi[(0, 0)] - t.powu(k)).norm() <= 1e-9);
    }
}
