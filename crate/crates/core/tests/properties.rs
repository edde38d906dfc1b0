use std::collections::BTreeSet;

use matchable_core::apcomb::{APCombination, Restriction};
use matchable_core::arith::{factorize, gcd, FactoredInteger};
use matchable_core::certificate::Certificate;
use matchable_core::matcher::{
    compose_even_odd, coprime_matching, default_j, halve_matching, is_matchable, match_via_partition, mp_matching,
    Descriptor, Evidence, MatchOutcome, MatchingCertificate,
};
use matchable_core::partition::{build_m_partition, build_partition};
use proptest::prelude::*;

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// M-numbers with `tau <= 2048`.
fn m_number() -> impl Strategy<Value = u128> {
    proptest::collection::vec(0u32..7, PRIMES.len()).prop_map(|exps| {
        let mut pairs: Vec<(u64, u32)> = PRIMES
            .iter()
            .zip(exps)
            .map(|(&p, e)| (p, e.min(p as u32 - 1)))
            .collect();
        while pairs.iter().map(|&(_, e)| e as u128 + 1).product::<u128>() > 2048 {
            let top = pairs.iter_mut().max_by_key(|(_, e)| *e).unwrap();
            top.1 -= 1;
        }
        FactoredInteger::from_factors(pairs.into_iter().filter(|&(_, e)| e > 0))
            .unwrap()
            .value()
    })
}

fn odd_squarefree() -> impl Strategy<Value = u128> {
    proptest::collection::vec(any::<bool>(), 7).prop_map(|bits| {
        PRIMES[1..]
            .iter()
            .zip(bits)
            .filter(|(_, b)| *b)
            .map(|(&p, _)| p as u128)
            .product()
    })
}

fn set(c: &APCombination) -> BTreeSet<i128> {
    c.elements(1 << 20).unwrap().into_iter().collect()
}

fn matching_of(n: u128) -> MatchingCertificate {
    match is_matchable(n).unwrap().evidence {
        Evidence::Matching(c) => c,
        other => panic!("{n} has no matching: {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn ap_combinations_count_like_sets(
        a in -50i128..50, s in 1i128..6, la in 0i128..40,
        b in -50i128..50, t in 1i128..6, lb in 0i128..40,
        d in 1i128..12, z in -60i128..120,
    ) {
        let x = APCombination::make_ap(a, s, la).unwrap();
        let y = APCombination::make_ap(b, t, lb).unwrap();
        let (sx, sy) = (set(&x), set(&y));
        prop_assert_eq!(x.intersection_size(&y), sx.intersection(&sy).count() as i128);
        match x.union(&y) {
            Ok(u) => {
                u.validate().unwrap();
                prop_assert_eq!(set(&u), sx.union(&sy).copied().collect::<BTreeSet<_>>());
                let c = u.count_divisible(d).unwrap();
                prop_assert_eq!(c.count, set(&u).iter().filter(|v| *v % d == 0).count() as i128);
            }
            Err(_) => prop_assert!(!sx.is_disjoint(&sy)),
        }
        let below = x.restrict(Restriction::AtMost(z)).unwrap();
        prop_assert_eq!(set(&below), sx.iter().copied().filter(|&v| v <= z).collect::<BTreeSet<_>>());
        prop_assert_eq!(x.count_at_most(z), below.len());
        let rest = x.difference(&below).unwrap();
        rest.validate().unwrap();
        prop_assert_eq!(set(&rest), sx.iter().copied().filter(|&v| v > z).collect::<BTreeSet<_>>());
        let mult = x.restrict(Restriction::MultipleOf(d)).unwrap();
        prop_assert_eq!(set(&mult), sx.iter().copied().filter(|v| v % d == 0).collect::<BTreeSet<_>>());
    }

    #[test]
    fn squarefree_partitions_validate(j in 0usize..5, extra in 0i128..4, start in -40i128..40) {
        let primes: Vec<u64> = PRIMES[..j].to_vec();
        let len = (1i128 << (2 * j)) * (1 + extra);
        let p = build_partition(&primes, start, len).unwrap();
        p.validate().unwrap();
        prop_assert_eq!(p.blocks.len(), 1usize << j);
        prop_assert_eq!(p.error_budget, if j == 0 { 1 } else { 1u128 << (j - 1) });
        for b in &p.blocks {
            prop_assert!(b.set.k as u128 <= p.error_budget);
            for x in set(&b.set) {
                prop_assert_eq!(gcd(x.unsigned_abs(), b.index), 1);
            }
        }
    }

    #[test]
    fn m_partitions_validate(n in m_number(), start in -20i128..20) {
        let f = factorize(n).unwrap();
        if let Some(j) = default_j(&f) {
            if !f.is_squarefree() {
                let p = build_m_partition(&f, j, start).unwrap();
                p.validate().unwrap();
                let budget: u128 = (1..=j)
                    .map(|i| 2 * f.valuation(PRIMES[i]).max(1) as u128)
                    .product();
                prop_assert!(p.error_budget <= budget.max(1));
            }
        }
    }

    #[test]
    fn partition_matchings_validate(n in m_number()) {
        match match_via_partition(n, None).unwrap() {
            MatchOutcome::Matching(c) => {
                c.validate().unwrap();
                prop_assert_eq!(c.domain, Descriptor::Divisors { n });
            }
            MatchOutcome::Hall(w) => panic!("M-number {n} gave a Hall witness {w:?}"),
        }
    }

    #[test]
    fn halving_validates(u in odd_squarefree()) {
        let half = halve_matching(&matching_of(2 * u)).unwrap();
        half.validate().unwrap();
        prop_assert_eq!(half.domain, Descriptor::Divisors { n: u });
    }

    #[test]
    fn composition_validates(u in odd_squarefree()) {
        let tau = factorize(u).unwrap().tau();
        let left = Descriptor::Divisors { n: u }.members(1 << 16).unwrap();
        let odd: Vec<u128> = (0..tau).map(|i| 2 * i + 1).collect();
        if let MatchOutcome::Matching(o) = coprime_matching(&left, &odd).unwrap() {
            let o = MatchingCertificate { domain: Descriptor::Divisors { n: u }, ..o };
            let c = compose_even_odd(&o, &matching_of(u)).unwrap();
            c.validate().unwrap();
            prop_assert_eq!(c.domain, Descriptor::Divisors { n: 2 * u });
        }
    }

    #[test]
    fn tampering_is_detected(n in m_number(), i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>()) {
        let mut c = matching_of(n);
        let (a, b) = (i.index(c.pairs.len()), j.index(c.pairs.len()));
        prop_assume!(c.pairs[a].1 != c.pairs[b].1);
        c.pairs[a].1 = c.pairs[b].1;
        prop_assert!(Certificate::Matching(c).verify().is_err());
    }

    #[test]
    fn certificates_round_trip(n in 1u128..5000) {
        let cert = Certificate::Decision(is_matchable(n).unwrap());
        let back = Certificate::from_json(&cert.to_json()).unwrap();
        prop_assert_eq!(&back, &cert);
        back.verify().unwrap();
    }
}

#[test]
fn mp_matchings_validate() {
    for p in [2, 3, 5, 7] {
        let c = mp_matching(p).unwrap();
        c.validate().unwrap();
        let m: u128 = PRIMES
            .iter()
            .take_while(|&&q| q <= p)
            .map(|&q| (q as u128).pow(q as u32 - 1))
            .product();
        assert_eq!(c.domain, Descriptor::Divisors { n: m });
    }
}
