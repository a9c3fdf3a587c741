mod common;

use c2ucb_lab::linalg::{
    eigvals_sym, gmdl_det, gmdl_inner, lifted_gram, mahalanobis_sq, sym_inverse, Matrix, PosDefMatrix,
};
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn to_matrix(rows: &[Vec<f64>]) -> Matrix {
    let r: Vec<&[f64]> = rows.iter().map(|x| x.as_slice()).collect();
    Matrix::from_rows(&r)
}

fn column(x: &[f64]) -> Matrix {
    Matrix::from_columns(x.len(), &[x.to_vec()]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gmdl_matches_direct_determinant(seed in any::<u64>(), d in 1usize..=5, m in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_pd(d, 0.5, &mut rng);
        let b = gaussian_matrix(d, m, &mut rng);
        let mut full = a.clone();
        for j in 0..m {
            let col: Vec<f64> = b.iter().map(|r| r[j]).collect();
            add_outer(&mut full, &col);
        }
        let a_pd = PosDefMatrix::new(to_matrix(&a)).unwrap();
        let bm = to_matrix(&b);
        let got = gmdl_det(&a_pd, &bm, &bm).unwrap();
        if d <= 4 {
            let oracle = cofactor_det(&full);
            prop_assert!(rel_err(got, oracle) <= 1e-9, "{} vs {}", got, oracle);
        } else {
            let direct = PosDefMatrix::new(to_matrix(&full)).unwrap().logdet();
            prop_assert!(rel_err(got.ln(), direct) <= 1e-9 || (got.ln() - direct).abs() <= 1e-12);
        }
    }

    #[test]
    fn lifted_gram_is_psd(seed in any::<u64>(), d in 1usize..=6, m in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = PosDefMatrix::new(to_matrix(&random_pd(d, 0.1, &mut rng))).unwrap();
        let vinv = sym_inverse(&v);
        let cols: Vec<Vec<f64>> = (0..m).map(|_| unit_ball(d, &mut rng)).collect();
        let x = Matrix::from_columns(d, &cols).unwrap();
        let g = lifted_gram(vinv.entries(), &x).unwrap();
        for e in eigvals_sym(&g).unwrap() {
            prop_assert!(e >= -1e-10, "{}", e);
        }
    }

    #[test]
    fn mahalanobis_is_inner_entry(seed in any::<u64>(), d in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = PosDefMatrix::new(to_matrix(&random_pd(d, 0.2, &mut rng))).unwrap();
        let x = unit_ball(d, &mut rng);
        let inner = gmdl_inner(&a, &column(&x), &column(&x)).unwrap();
        let m = mahalanobis_sq(&x, &sym_inverse(&a)).unwrap();
        prop_assert!((inner[(0, 0)] - 1.0 - m).abs() <= 1e-10 * (1.0 + m));
    }

    #[test]
    fn logdet_matches_cholesky_diagonal(seed in any::<u64>(), d in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = PosDefMatrix::new(to_matrix(&random_pd(d, 0.3, &mut rng))).unwrap();
        let prod: f64 = (0..d).map(|i| a.chol()[(i, i)].powi(2)).product();
        prop_assert!(rel_err(a.logdet().exp(), prod) <= 1e-12);
    }

    #[test]
    fn inverse_residual(seed in any::<u64>(), d in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = PosDefMatrix::new(to_matrix(&random_pd(d, 0.3, &mut rng))).unwrap();
        let inv = sym_inverse(&a);
        let r = a.entries().matmul(inv.entries()).unwrap().sub(&Matrix::identity(d)).unwrap();
        prop_assert!(r.frobenius_norm() <= 1e-10 * d as f64);
        prop_assert!(PosDefMatrix::new(inv.entries().clone()).is_ok());
    }

    #[test]
    fn indefinite_input_rejected(seed in any::<u64>(), d in 1usize..=4) {
        // A negative determinant means an odd number of negative eigenvalues.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = gaussian_matrix(d, d, &mut rng);
        let sym: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| g[i][j] + g[j][i]).collect()).collect();
        if cofactor_det(&sym) < 0.0 {
            prop_assert!(PosDefMatrix::new(to_matrix(&sym)).is_err());
        }
    }
}
