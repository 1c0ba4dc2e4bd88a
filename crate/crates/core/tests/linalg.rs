mod common;

use common::*;
use hesselm::linalg::{gram_eigendecompose, hessenberg_decompose, ridge_solve_direct, shifted_hess_solve};
use hesselm::DenseMatrix;
use proptest::prelude::*;

fn off_band_max(u: &DenseMatrix) -> f64 {
    let n = u.rows();
    let mut m = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i.abs_diff(j) > 1 {
                m = m.max(u[(i, j)].abs());
            }
        }
    }
    m
}

fn orthogonality_error(q: &DenseMatrix) -> f64 {
    frob(&naive_mul(&transpose(q), q).sub(&DenseMatrix::identity(q.rows())).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hessenberg_general_input(n in 1usize..=50, seed in any::<u64>()) {
        let a = uniform(&mut rng(seed), n, n);
        let f = hessenberg_decompose(&a).unwrap();
        let recon = naive_mul(&naive_mul(&f.q, &f.u), &transpose(&f.q));
        prop_assert!(frob(&recon.sub(&a).unwrap()) <= 1e-10 * frob(&a));
        prop_assert!(orthogonality_error(&f.q) <= 1e-10 * n as f64);
        for i in 0..n {
            for j in 0..n {
                if i > j + 1 {
                    prop_assert_eq!(f.u[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn hessenberg_symmetric_is_tridiagonal(n in 1usize..=50, extra in 0usize..10, seed in any::<u64>()) {
        let s = random_psd(&mut rng(seed), n, extra);
        let f = hessenberg_decompose(&s).unwrap();
        prop_assert!(frob(&f.reconstruct().sub(&s).unwrap()) <= 1e-10 * frob(&s));
        prop_assert!(off_band_max(&f.u) <= 1e-10 * frob(&f.u));
    }

    #[test]
    fn shifted_solve_matches_elimination(n in 1usize..=30, c in 1usize..=3, seed in any::<u64>()) {
        let mut r = rng(seed);
        // Tall factor keeps S nonsingular so that lambda = 0 is allowed.
        let s = random_psd(&mut r, n, n + 5);
        let b = uniform(&mut r, n, c);
        let f = hessenberg_decompose(&s).unwrap();
        for lambda in [0.0, (-12.0f64).exp(), (-6.0f64).exp(), 1.0] {
            let x = shifted_hess_solve(&f, lambda, &b).unwrap();
            let shifted = s.add(&DenseMatrix::identity(n).scale(lambda)).unwrap();
            let oracle = dense_solve(&shifted, &b);
            prop_assert!(rel(x.data(), oracle.data()) <= 1e-9, "lambda {lambda}");
        }
    }

    #[test]
    fn eigen_reconstruction_and_orthonormality(n in 1usize..=30, extra in 0usize..6, seed in any::<u64>()) {
        let s = random_psd(&mut rng(seed), n, extra);
        let e = gram_eigendecompose(&s).unwrap();
        let d = DenseMatrix::diagonal(&e.values);
        let recon = naive_mul(&naive_mul(&e.vectors, &d), &transpose(&e.vectors));
        prop_assert!(frob(&recon.sub(&s).unwrap()) <= 1e-8 * frob(&s).max(f64::MIN_POSITIVE));
        prop_assert!(orthogonality_error(&e.vectors) <= 1e-10 * n as f64);
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(e.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn ridge_branches_agree(rows in 4usize..=40, cols in 1usize..=40, seed in any::<u64>()) {
        prop_assume!(cols <= rows);
        let mut r = rng(seed);
        let h = uniform(&mut r, rows, cols);
        let t = uniform(&mut r, rows, 2);
        let lambda = (-3.0f64).exp();
        let primal = ridge_solve_direct(&h, &t, lambda).unwrap();
        // Woodbury: (HᵀH + λI)⁻¹Hᵀ = Hᵀ(HHᵀ + λI)⁻¹.
        let hht = naive_mul(&h, &transpose(&h)).add(&DenseMatrix::identity(rows).scale(lambda)).unwrap();
        let dual = naive_mul(&transpose(&h), &dense_solve(&hht, &t));
        prop_assert!(rel(primal.data(), dual.data()) <= 1e-8);
        prop_assert!(rel(primal.data(), ridge_oracle(&h, &t, lambda).data()) <= 1e-9);
    }
}

#[test]
fn wide_design_uses_minimum_norm_form() {
    let mut r = rng(11);
    let h = uniform(&mut r, 6, 15);
    let t = uniform(&mut r, 6, 1);
    let lambda = (-5.0f64).exp();
    let w = ridge_solve_direct(&h, &t, lambda).unwrap();
    assert!(rel(w.data(), ridge_oracle(&h, &t, lambda).data()) <= 1e-9);
}

#[test]
fn singular_system_at_zero_lambda() {
    let h = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]]).unwrap();
    let t = DenseMatrix::column(&[1.0, 2.0, 3.0]).unwrap();
    assert!(matches!(ridge_solve_direct(&h, &t, 0.0), Err(hesselm::Error::Singular(_))));
}
