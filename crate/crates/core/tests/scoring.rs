mod common;

use crab_al::matrix::SquareMatrix;
use crab_al::scoring::{
    ab_score, br_score, incomplete_beta, partial_loss_neg, partial_loss_pos, regularized_incomplete_beta,
    AttentionMatrix, BetaParams,
};
use proptest::prelude::*;

use common::incomplete_beta_quadrature;

#[test]
fn quadrature_oracle_sanity() {
    // B(x; 1, 1) = x and B(x; 2, 1) = x²/2
    assert!((incomplete_beta_quadrature(0.3, 1.0, 1.0) - 0.3).abs() < 1e-14);
    assert!((incomplete_beta_quadrature(0.8, 2.0, 1.0) - 0.32).abs() < 1e-14);
    // B(x; ½, ½) = 2 asin(√x)
    let x: f64 = 0.9;
    assert!((incomplete_beta_quadrature(x, 0.5, 0.5) - 2.0 * x.sqrt().asin()).abs() < 1e-12);
}

#[test]
fn complete_beta_at_one() {
    // B(1; 2, 3) = Γ(2)Γ(3)/Γ(5) = 1/12
    assert!((incomplete_beta(1.0, 2.0, 3.0).unwrap() - 1.0 / 12.0).abs() < 1e-14);
    assert_eq!(incomplete_beta(0.0, 2.0, 3.0).unwrap(), 0.0);
}

#[test]
fn domain_errors() {
    assert!(incomplete_beta(1.5, 1.0, 1.0).is_err());
    assert!(incomplete_beta(0.5, 0.0, 1.0).is_err());
    assert!(incomplete_beta(0.5, 1.0, -1.0).is_err());
    assert!(incomplete_beta(f64::NAN, 1.0, 1.0).is_err());
    assert!(partial_loss_pos(1.2, BetaParams::default()).is_err());
    assert!(BetaParams::new(-0.1, 1.0).is_err());
}

#[test]
fn attention_gamma_limit_matches_br() {
    let a = SquareMatrix::from_rows(&[vec![1.0, 0.6, 0.2], vec![0.3, 1.0, 0.9], vec![0.5, 0.1, 1.0]]);
    let p = [0.2, 0.7, 0.45];
    let y = [1, -1, 1];
    let params = BetaParams::default();
    let br = br_score(&p, &y, params).unwrap();
    let att = AttentionMatrix::from_positive(&a, 1e12).unwrap();
    assert!((ab_score(&p, &y, &att, params).unwrap() - br).abs() < 1e-9);
}

proptest! {
    #[test]
    fn matches_quadrature(x in 0.0f64..=1.0, a in 0.05f64..=5.0, b in 0.05f64..=5.0) {
        let got = incomplete_beta(x, a, b).unwrap();
        let want = incomplete_beta_quadrature(x, a, b);
        prop_assert!((got - want).abs() < 1e-8, "B({x}; {a}, {b}) = {got}, oracle {want}");
    }

    #[test]
    fn reflection_symmetry(x in 0.0f64..=1.0, a in 0.1f64..=5.0, b in 0.1f64..=5.0) {
        let total = incomplete_beta(1.0, a, b).unwrap();
        let sum = incomplete_beta(x, a, b).unwrap() + incomplete_beta(1.0 - x, b, a).unwrap();
        prop_assert!((sum - total).abs() < 1e-10 * total.max(1.0));
    }

    #[test]
    fn regularized_is_a_cdf(x in 0.0f64..1.0, dx in 0.0f64..0.1, a in 0.1f64..=5.0, b in 0.1f64..=5.0) {
        let lo = regularized_incomplete_beta(x, a, b).unwrap();
        let hi = regularized_incomplete_beta((x + dx).min(1.0), a, b).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&lo));
        prop_assert!(hi >= lo - 1e-12);
    }

    #[test]
    fn losses_vanish_at_the_correct_end(alpha in 0.0f64..4.0, beta in 0.0f64..4.0) {
        let params = BetaParams { alpha, beta };
        prop_assert_eq!(partial_loss_pos(1.0, params).unwrap(), 0.0);
        prop_assert_eq!(partial_loss_neg(0.0, params).unwrap(), 0.0);
    }

    #[test]
    fn gamma_to_infinity_recovers_br(
        entries in prop::collection::vec(0.0f64..=1.0, 16),
        ps in prop::collection::vec(0.01f64..0.99, 4),
        bits in 0u8..16,
    ) {
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|m| (0..4).map(|n| if m == n { 1.0 } else { entries[m * 4 + n] }).collect())
            .collect();
        let a = SquareMatrix::from_rows(&rows);
        let y: Vec<i8> = (0..4).map(|k| if bits >> k & 1 == 1 { 1 } else { -1 }).collect();
        let params = BetaParams::default();
        let att = AttentionMatrix::from_positive(&a, 1e13).unwrap();
        let br = br_score(&ps, &y, params).unwrap();
        prop_assert!((ab_score(&ps, &y, &att, params).unwrap() - br).abs() < 1e-9);
    }
}
