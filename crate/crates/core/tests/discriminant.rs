use mathieu_core::discriminant::{sigma, sigma_consistency, sigma_prime, sigma_prime0};
use mathieu_core::numeric::gcd;
use proptest::prelude::*;

fn fraction() -> impl Strategy<Value = (u64, u64)> {
    (1u64..=80, any::<u64>()).prop_filter_map("coprime", |(q, r)| {
        let p = if q == 1 { 1 } else { 1 + r % (q - 1) };
        (gcd(p, q) == 1).then_some((p, q))
    })
}

#[test]
fn cubic_at_q3() {
    for e in [-3.0, -1.25, 0.0, 0.5, 2.0, 4.5] {
        let v = sigma(1, 3, e).unwrap().to_f64();
        assert!((v - (-e * e * e + 6.0 * e)).abs() < 1e-12, "E = {e}");
        let d = sigma_prime(1, 3, e).unwrap().to_f64();
        assert!((d - (-3.0 * e * e + 6.0)).abs() < 1e-9, "E = {e}");
    }
}

#[test]
fn slope_sign_follows_q_mod_4() {
    assert_eq!(sigma_prime0(1, 3).unwrap().sign(), 1);
    assert_eq!(sigma_prime0(2, 5).unwrap().sign(), -1);
    assert_eq!(sigma_prime0(3, 7).unwrap().sign(), 1);
    assert!((sigma_prime0(1, 3).unwrap().to_f64() - 6.0).abs() < 1e-12);
}

#[test]
fn rejects_non_reduced() {
    assert!(sigma(2, 4, 0.0).is_err());
    assert!(sigma_prime0(3, 9).is_err());
}

proptest! {
    #[test]
    fn transfer_product_matches_determinant((p, q) in fraction(), e in 4.05f64..6.0, flip in any::<bool>()) {
        // outside the spectrum sigma has no nearby zero, so both routes agree closely
        let e = if flip { -e } else { e };
        let c = sigma_consistency(p, q, e).unwrap();
        prop_assert!(c.signs_agree);
        prop_assert!(c.discrepancy < 1e-9);
    }

    #[test]
    fn parity_symmetry((p, q) in fraction(), e in 4.05f64..6.0) {
        let a = sigma(p, q, e).unwrap();
        let b = sigma(p, q, -e).unwrap();
        let expected_sign = if q % 2 == 0 { b.sign() } else { -b.sign() };
        prop_assert_eq!(a.sign(), expected_sign);
        prop_assert!((a.log_mag() - b.log_mag()).abs() <= 1e-10 * a.log_mag().abs().max(1.0));
    }

    #[test]
    fn large_outside_the_spectrum((p, q) in fraction(), e in 4.05f64..8.0) {
        // |sigma(E)| > 4 for |E| > 4
        prop_assert!(sigma(p, q, e).unwrap().log_mag() > 4f64.ln());
    }
}
