use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use smba_core::cone::{smoothed_l1, stable_logsumexp, ConeBaseOracle};
use smba_oracle::jacobi_eigenvalues;

fn sym_from(m: usize, raw: &[f64]) -> DVector<f64> {
    let a = DMatrix::from_column_slice(m, m, &raw[..m * m]);
    let s = (&a + a.transpose()) * 0.5;
    DVector::from_column_slice(s.as_slice())
}

fn orthogonal(m: usize, raw: &[f64]) -> DMatrix<f64> {
    let a = DMatrix::from_column_slice(m, m, &raw[..m * m]) + DMatrix::identity(m, m) * 3.0;
    a.qr().q()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn orthant_sandwich_and_shift(
        y in prop::collection::vec(-50.0..50.0f64, 1..8),
        mu in 1e-4..10.0f64,
        frac in 0.0..1.0f64,
    ) {
        let oracle = ConeBaseOracle::nonpos_orthant(y.len()).unwrap();
        let y = DVector::from_vec(y);
        let cert = oracle.cert();
        let s = oracle.support_value(&y).unwrap();
        let h = oracle.msa_value(&y, mu).unwrap();
        let tol = 1e-12 * (1.0 + s.abs());
        prop_assert!(s <= h + tol);
        prop_assert!(h <= s + cert.alpha3 * mu + tol);
        let mu1 = mu * frac;
        if mu1 > 0.0 {
            let h1 = oracle.msa_value(&y, mu1).unwrap();
            prop_assert!(h1 <= h - cert.alpha4 * (mu - mu1) + tol);
        }
    }

    #[test]
    fn psd_support_matches_jacobi(raw in prop::collection::vec(-5.0..5.0f64, 16), m in 1usize..5) {
        let oracle = ConeBaseOracle::neg_semidef(m).unwrap();
        let y = sym_from(m, &raw);
        let eig = jacobi_eigenvalues(m, y.as_slice()).unwrap();
        let s = oracle.support_value(&y).unwrap();
        prop_assert!((s - eig[m - 1]).abs() <= 1e-10 * (1.0 + s.abs()));
    }

    #[test]
    fn psd_spectral_invariance(
        raw in prop::collection::vec(-5.0..5.0f64, 16),
        rot in prop::collection::vec(-1.0..1.0f64, 16),
        mu in 1e-2..5.0f64,
    ) {
        let m = 4;
        let oracle = ConeBaseOracle::neg_semidef(m).unwrap();
        let y = sym_from(m, &raw);
        let q = orthogonal(m, &rot);
        let ymat = DMatrix::from_column_slice(m, m, y.as_slice());
        let z = &q * ymat * q.transpose();
        let z = DVector::from_column_slice(((&z + z.transpose()) * 0.5).as_slice());
        let a = oracle.msa_value(&y, mu).unwrap();
        let b = oracle.msa_value(&z, mu).unwrap();
        prop_assert!(rel(a, b) < 1e-12);
    }

    #[test]
    fn psd_gradient_lies_in_base(raw in prop::collection::vec(-5.0..5.0f64, 25), mu in 1e-3..5.0f64) {
        let m = 5;
        let oracle = ConeBaseOracle::neg_semidef(m).unwrap();
        let g = oracle.msa_gradient(&sym_from(m, &raw), mu).unwrap();
        let gm = DMatrix::from_column_slice(m, m, g.as_slice());
        prop_assert!((gm.trace() - 1.0).abs() < 1e-12);
        let eig = jacobi_eigenvalues(m, g.as_slice()).unwrap();
        prop_assert!(eig[0] >= -1e-10);
    }

    #[test]
    fn orthant_gradient_lies_in_simplex(y in prop::collection::vec(-100.0..100.0f64, 1..10), mu in 1e-6..10.0f64) {
        let oracle = ConeBaseOracle::nonpos_orthant(y.len()).unwrap();
        let g = oracle.msa_gradient(&DVector::from_vec(y), mu).unwrap();
        prop_assert!(g.iter().all(|w| *w >= 0.0));
        prop_assert!((g.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pcone_sandwich_and_base(
        y in prop::collection::vec(-20.0..20.0f64, 2..7),
        mu in 1e-4..10.0f64,
    ) {
        let m = y.len() - 1;
        let oracle = ConeBaseOracle::p_cone(m, 2.0).unwrap();
        let y = DVector::from_vec(y);
        let s = oracle.support_value(&y).unwrap();
        let h = oracle.msa_value(&y, mu).unwrap();
        let tol = 1e-12 * (1.0 + s.abs());
        prop_assert!(s <= h + tol && h <= s + oracle.cert().alpha3 * mu + tol);
        let g = oracle.msa_gradient(&y, mu).unwrap();
        prop_assert_eq!(g[m], -1.0);
        prop_assert!(g.rows(0, m).norm() <= 1.0 + 1e-15);
        prop_assert!(g.norm() <= oracle.cert().base_norm_bound + 1e-15);
    }

    #[test]
    fn gradient_lipschitz_certificate(
        a in prop::collection::vec(-5.0..5.0f64, 6),
        b in prop::collection::vec(-5.0..5.0f64, 6),
        mu in 1e-2..5.0f64,
    ) {
        let oracle = ConeBaseOracle::nonpos_orthant(6).unwrap();
        let (a, b) = (DVector::from_vec(a), DVector::from_vec(b));
        let ga = oracle.msa_gradient(&a, mu).unwrap();
        let gb = oracle.msa_gradient(&b, mu).unwrap();
        let lip = oracle.cert().gradient_lipschitz(mu);
        prop_assert!((ga - gb).norm() <= lip * (&a - &b).norm() * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn finite_differences_orthant(y in prop::collection::vec(-3.0..3.0f64, 2..6), mu in 1e-2..3.0f64) {
        let oracle = ConeBaseOracle::nonpos_orthant(y.len()).unwrap();
        let y = DVector::from_vec(y);
        let g = oracle.msa_gradient(&y, mu).unwrap();
        let h = 1e-6 * mu;
        for i in 0..y.len() {
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp[i] += h;
            ym[i] -= h;
            let fd = (oracle.msa_value(&yp, mu).unwrap() - oracle.msa_value(&ym, mu).unwrap()) / (2.0 * h);
            prop_assert!((fd - g[i]).abs() <= 1e-6 * (1.0 + g[i].abs()), "{fd} vs {}", g[i]);
        }
    }
}

#[test]
fn logsumexp_is_stable_for_huge_inputs() {
    let (v, w) = stable_logsumexp(&[1e300, 1e300], 1.0).unwrap();
    assert_eq!(v, 1e300);
    assert_eq!(w, vec![0.5, 0.5]);
    let (v, _) = stable_logsumexp(&[-800.0, -800.0], 1.0).unwrap();
    assert!((v - (-800.0 + 2f64.ln())).abs() < 1e-12);
}

#[test]
fn smoothed_l1_brackets_the_norm() {
    let y = DVector::from_column_slice(&[3.0, -4.0, 0.0]);
    let (v, g) = smoothed_l1(&y, 0.1).unwrap();
    assert!(v >= 7.0 && v <= 7.0 + 3.0 * 0.1 + 1e-12);
    assert!(g.iter().all(|gi| gi.abs() <= 1.0));
}
