use mathieu_core::contfrac::{
    convergents, expand, parity_admissible_fractions, parity_check, tails, ContinuedFraction, ReducedFraction,
};
use proptest::prelude::*;

/// `[a_1, ..., a_n]` as `1/(a_1 + 1/(a_2 + ...))`, evaluated bottom-up.
fn evaluate(coeffs: &[u64]) -> (u64, u64) {
    let (mut num, mut den) = (0u64, 1u64);
    for &a in coeffs.iter().rev() {
        (num, den) = (den, a * den + num);
    }
    (num, den)
}

fn coefficients() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(1u64..=12, 1..=7).prop_map(|mut v| {
        // canonical form: the last coefficient is at least 2 unless alone
        let n = v.len();
        if n > 1 && v[n - 1] == 1 {
            v[n - 1] = 2;
        }
        v
    })
}

#[test]
fn known_expansions() {
    let cf = expand(ReducedFraction::new(201, 301).unwrap()).unwrap();
    assert_eq!(cf.coeffs(), &[1, 2, 100]);
    assert!(parity_check(&cf));
    let conv = convergents(&cf).unwrap();
    assert_eq!(conv.iter().map(|f| (f.num(), f.den())).collect::<Vec<_>>(), vec![(1, 1), (2, 3), (201, 301)]);
    assert!("1,x".parse::<ContinuedFraction>().is_err());
}

#[test]
fn admissible_enumeration_is_complete() {
    let listed = parity_admissible_fractions(41);
    for q in 1..=41u64 {
        for p in 1..=q {
            let Ok(f) = ReducedFraction::new(p, q) else { continue };
            let admissible = parity_check(&expand(f).unwrap());
            assert_eq!(listed.contains(&f), admissible, "{p}/{q}");
        }
    }
}

proptest! {
    #[test]
    fn expansion_round_trips(coeffs in coefficients()) {
        let cf = ContinuedFraction::new(coeffs.clone()).unwrap();
        let value = cf.value().unwrap();
        prop_assert_eq!((value.num(), value.den()), evaluate(&coeffs));
        let back = expand(value).unwrap();
        prop_assert_eq!(back.coeffs(), &coeffs[..]);
    }

    #[test]
    fn consecutive_convergents_are_unimodular(coeffs in coefficients()) {
        let conv = convergents(&ContinuedFraction::new(coeffs).unwrap()).unwrap();
        for w in conv.windows(2) {
            let det = w[1].num() as i128 * w[0].den() as i128 - w[0].num() as i128 * w[1].den() as i128;
            prop_assert_eq!(det.abs(), 1);
        }
    }

    #[test]
    fn tail_product_is_reciprocal_denominator(coeffs in coefficients()) {
        let cf = ContinuedFraction::new(coeffs.clone()).unwrap();
        let t = tails(&cf).unwrap();
        for (j, tail) in t.tails().iter().enumerate() {
            prop_assert_eq!((tail.num(), tail.den()), evaluate(&coeffs[j..]));
        }
        let prod = t.product().unwrap();
        prop_assert_eq!((prod.num(), prod.den()), (1, cf.value().unwrap().den()));
    }

    #[test]
    fn parity_condition_forces_odd_denominators(coeffs in coefficients()) {
        let cf = ContinuedFraction::new(coeffs).unwrap();
        if parity_check(&cf) {
            for c in convergents(&cf).unwrap() {
                prop_assert_eq!(c.den() % 2, 1);
            }
        }
    }
}
