//! Poisson transform against explicit Fock-space matrices.

use momt_core::linalg::{c64, hermitian_eig, op_norm, word_product, CMatrix};
use momt_core::poisson::{
    defect_operator, generate_instance, poisson_error_bound, poisson_kernel, poisson_moment, required_depth,
    FockTruncation, GenSpec, InstanceKind, RowTuple,
};
use momt_core::words::words_up_to;
use momt_core::Word;
use proptest::prelude::*;

fn kron_identity(x: &CMatrix, d: usize) -> CMatrix {
    CMatrix::from_fn(x.rows() * d, x.cols() * d, |i, j| {
        if i % d == j % d {
            x[(i / d, j / d)]
        } else {
            c64(0.0, 0.0)
        }
    })
}

fn contraction(seed: u64, n: usize, dim: usize) -> RowTuple {
    let g = generate_instance(&GenSpec::new(InstanceKind::RowContraction, n, dim, 0, seed)).unwrap();
    RowTuple::new(g.tuple).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn series_equals_fock_sandwich(seed in any::<u64>(), n in 1usize..3, depth in 1usize..4, r in 0.5f64..=1.0) {
        let t = contraction(seed, n, 2);
        let k = poisson_kernel(&t, r, depth, 1e-9).unwrap();
        let fock = FockTruncation::new(n, depth);
        let s = fock.creations();
        for alpha in words_up_to(n, depth) {
            for beta in words_up_to(n, depth - alpha.len()) {
                let x = word_product(&s, &alpha, fock.dim()).matmul(&word_product(&s, &beta, fock.dim()).adjoint());
                let oracle = k.adjoint_mul(&kron_identity(&x, 2).matmul(&k));
                let got = poisson_moment(&t, &alpha, &beta, r, depth, 1e-9).unwrap();
                prop_assert!((&got - &oracle).max_abs() <= 1e-13, "alpha {alpha} beta {beta}");
            }
        }
    }

    #[test]
    fn defect_is_a_positive_contraction(seed in any::<u64>(), n in 1usize..4, r in 0.1f64..=1.0) {
        let t = contraction(seed, n, 3);
        let d = defect_operator(&t, r, 1e-9).unwrap();
        prop_assert!(d.hermitian_residual() <= 1e-14);
        prop_assert!(hermitian_eig(&d).unwrap().min() >= -1e-12);
        prop_assert!(op_norm(&d).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn error_stays_under_the_bound(seed in any::<u64>(), n in 1usize..3, depth in 2usize..7, r in 0.8f64..=1.0) {
        let t = contraction(seed, n, 2);
        let rho = t.row_norm().unwrap();
        for alpha in words_up_to(n, 1) {
            for beta in words_up_to(n, 1) {
                let m = alpha.len() + beta.len();
                let got = poisson_moment(&t, &alpha, &beta, r, depth, 1e-9).unwrap();
                let exact = t.word(&alpha).matmul(&t.word(&beta).adjoint());
                let err = op_norm(&(&got - &exact)).unwrap();
                prop_assert!(err <= poisson_error_bound(rho, m, r, depth) + 1e-12);
            }
        }
    }
}

#[test]
fn kernel_isometry_defect_is_the_geometric_tail() {
    let t = contraction(5, 2, 2);
    let rho = t.row_norm().unwrap();
    for depth in [2usize, 5, 10] {
        let k = poisson_kernel(&t, 1.0, depth, 1e-9).unwrap();
        let dev = op_norm(&(&k.adjoint_mul(&k) - &CMatrix::identity(2))).unwrap();
        let x = rho * rho;
        assert!(dev <= x.powi(depth as i32 + 1) / (1.0 - x) + 1e-14, "depth {depth}: {dev}");
    }
}

#[test]
fn scalar_kernel_column_norm() {
    let t = RowTuple::new(vec![CMatrix::scalar(c64(0.5, 0.0))]).unwrap();
    let (r, depth) = (0.9f64, 8usize);
    let k = poisson_kernel(&t, r, depth, 1e-9).unwrap();
    let x = r * r * 0.25;
    let want = (1.0 - x) * (0..=depth).map(|j| x.powi(j as i32)).sum::<f64>();
    assert!((k.adjoint_mul(&k)[(0, 0)].re - want).abs() < 1e-15);
}

#[test]
fn required_depth_meets_target() {
    let t = contraction(9, 2, 2);
    let rho = t.row_norm().unwrap();
    let g1 = Word::generator(1);
    let depth = required_depth(rho, 2, 1e-6).unwrap();
    let got = poisson_moment(&t, &g1, &g1, 1.0, depth, 1e-9).unwrap();
    let exact = t.word(&g1).matmul(&t.word(&g1).adjoint());
    assert!(op_norm(&(&got - &exact)).unwrap() <= 1e-6);
}
