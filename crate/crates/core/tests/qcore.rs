mod common;

use nrqmc::prox::{mcp_phi, prox_mcp, svt_mcp, McpParams};
use nrqmc::qcore::{gaussian_qmatrix, hamilton_product, mcp_norm, qsvd, singular_values, Quaternion};
use rand::Rng;

#[test]
fn unit_products_follow_hamilton_rules() {
    let (one, i, j, k) = (
        Quaternion::new(1.0, 0.0, 0.0, 0.0),
        Quaternion::new(0.0, 1.0, 0.0, 0.0),
        Quaternion::new(0.0, 0.0, 1.0, 0.0),
        Quaternion::new(0.0, 0.0, 0.0, 1.0),
    );
    assert_eq!(hamilton_product(i, j), k);
    assert_eq!(hamilton_product(j, i), k * -1.0);
    assert_eq!(hamilton_product(i, i), one * -1.0);
    assert_eq!(hamilton_product(hamilton_product(i, j), k), one * -1.0);
}

#[test]
fn product_conjugate_transposes_in_reverse() {
    let mut r = common::rng(1);
    let a = gaussian_qmatrix(&mut r, 6, 4);
    let b = gaussian_qmatrix(&mut r, 4, 5);
    let lhs = a.matmul(&b).unwrap().conj_transpose();
    let rhs = b.conj_transpose().matmul(&a.conj_transpose()).unwrap();
    assert!((&lhs - &rhs).frobenius_norm() < 1e-12);
}

#[test]
fn singular_values_are_unitarily_invariant() {
    let mut r = common::rng(2);
    let x = gaussian_qmatrix(&mut r, 7, 5);
    let u = qsvd(&gaussian_qmatrix(&mut r, 7, 7)).unwrap().u;
    let a = singular_values(&x).unwrap();
    let b = singular_values(&u.matmul(&x).unwrap()).unwrap();
    for (s, t) in a.iter().zip(&b) {
        assert!((s - t).abs() < 1e-10 * a[0]);
    }
    let fro: f64 = a.iter().map(|s| s * s).sum::<f64>().sqrt();
    assert!((fro - x.frobenius_norm()).abs() < 1e-10 * fro);
}

#[test]
fn mcp_norm_lies_between_zero_and_scaled_rank() {
    let mut r = common::rng(3);
    for _ in 0..20 {
        let x = gaussian_qmatrix(&mut r, 6, 6).scale(r.random_range(0.01..5.0));
        let p = McpParams::new(r.random_range(0.1..2.0), r.random_range(0.5..4.0)).unwrap();
        let v = mcp_norm(&x, p).unwrap();
        assert!(v >= 0.0 && v <= 6.0 * mcp_phi(1e300, p).unwrap() + 1e-12);
    }
}

#[test]
fn svt_applies_scalar_prox_to_each_singular_value() {
    let mut r = common::rng(4);
    let y = gaussian_qmatrix(&mut r, 5, 4).scale(2.0);
    let p = McpParams::new(1.0, 3.0).unwrap();
    let weight = 0.7;
    let got = singular_values(&svt_mcp(&y, weight, p).unwrap()).unwrap();
    let mut want: Vec<f64> = singular_values(&y).unwrap().iter().map(|&s| prox_mcp(s, weight, p)).collect();
    want.sort_by(|a, b| b.total_cmp(a));
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-10, "{got:?} vs {want:?}");
    }
}
