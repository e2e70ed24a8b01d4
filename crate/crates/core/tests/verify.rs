use mathieu_core::contfrac::{ContinuedFraction, ReducedFraction};
use mathieu_core::numeric::gcd;
use mathieu_core::verify::{
    check_all, check_ams_continuity, check_containment, check_gap_inheritance, check_lemma2, check_theorem3,
    identity_sweep, Constants,
};
use proptest::prelude::*;

#[test]
fn every_check_passes_on_small_fractions() {
    for q in (3..=45u64).step_by(2) {
        for p in 1..q {
            if gcd(p, q) != 1 {
                continue;
            }
            let r = check_all(p, q).unwrap();
            let failures: Vec<_> = r.failures().map(|c| c.name.clone()).collect();
            assert!(failures.is_empty(), "{p}/{q}: {failures:?}");
        }
    }
}

#[test]
fn identity_sweep_covers_both_numerators() {
    let r = identity_sweep(15).unwrap();
    assert!(r.all_pass());
    for p in [1, 2, 4, 7, 8, 11, 13, 14] {
        assert!(r.checks.iter().any(|c| c.inputs.p == p && c.inputs.q == 15 && c.name == "last_wilkinson"));
    }
}

#[test]
fn central_width_is_an_equality_only_at_q1() {
    let r = check_lemma2(1, 1).unwrap();
    let c = r.checks.iter().find(|c| c.name == "lemma2.central_width").unwrap();
    assert!(c.pass && c.equality && c.slack == 0.0);
    let r = check_lemma2(2, 3).unwrap();
    let c = r.checks.iter().find(|c| c.name == "lemma2.central_width").unwrap();
    assert!(c.pass && !c.equality && c.slack > 0.0);
}

#[test]
fn inadmissible_fractions_are_refused() {
    // 2/5 = [2, 2] has an even first coefficient
    assert!(check_lemma2(2, 5).is_err());
    assert!(check_theorem3(2, 5).is_err());
    assert!(check_theorem3(2, 4).is_err());
}

#[test]
fn nested_central_bands_for_rapid_growth() {
    let cf: ContinuedFraction = "1,2,100".parse().unwrap();
    let r = check_containment(&cf, 2).unwrap();
    assert!(r.contained && r.margin > 0.0);
    assert!(r.gap0_closure.right < r.e2 && -r.gap_minus1_closure.left < r.e2);
    let g = check_gap_inheritance(&cf, 2, 56.0, Constants::new().c4).unwrap();
    assert!(!g.vacuous);
    assert!(g.overlaps.iter().all(|o| o.overlap > 0.0));
    let trivial = check_gap_inheritance(&"1,2".parse().unwrap(), 1, 56.0, Constants::new().c4).unwrap();
    assert!(trivial.vacuous);
}

#[test]
fn reports_serialize_deterministically() {
    let a = serde_json::to_string(&check_all(5, 13).unwrap()).unwrap();
    let b = serde_json::to_string(&check_all(5, 13).unwrap()).unwrap();
    assert_eq!(a, b);
}

fn odd_fraction(max_q: u64) -> impl Strategy<Value = ReducedFraction> {
    (1u64..=max_q / 2, any::<u64>()).prop_filter_map("coprime", |(h, r)| {
        let q = 2 * h + 1;
        let p = 1 + r % (q - 1);
        ReducedFraction::new(p, q).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn spectra_move_continuously(a in odd_fraction(151), b in odd_fraction(151)) {
        let r = check_ams_continuity(a, b).unwrap();
        prop_assert!(r.report.all_pass(), "{} {}: {:?}", a, b, r);
        prop_assert_eq!(r.vacuous, r.bound >= 8.0);
    }

    #[test]
    fn nearby_fractions_are_within_bound(q in 21u64..151, p_seed in any::<u64>()) {
        // neighbours in the Farey sense give small, non-vacuous distances
        let q = q | 1;
        let p = 1 + p_seed % (q - 1);
        prop_assume!(gcd(p, q) == 1);
        let a = ReducedFraction::new(p, q).unwrap();
        let b = ReducedFraction::new(2 * p + 1, 2 * q + 2).ok().filter(|_| gcd(2 * p + 1, 2 * q + 2) == 1);
        prop_assume!(b.is_some());
        let r = check_ams_continuity(a, b.unwrap()).unwrap();
        prop_assert!(!r.vacuous);
        prop_assert!(r.report.all_pass());
    }
}
