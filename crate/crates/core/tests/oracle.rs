//! Matchability against a plain augmenting-path matcher that shares no code
//! with the library.

use matchable_core::matcher::{is_matchable, Evidence};

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

fn augment(u: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
    for &v in &adj[u] {
        if !seen[v] {
            seen[v] = true;
            if owner[v].is_none() || augment(owner[v].unwrap(), adj, seen, owner) {
                owner[v] = Some(u);
                return true;
            }
        }
    }
    false
}

fn brute_matchable(n: u64) -> bool {
    let ds = divisors(n);
    let tau = ds.len();
    let adj: Vec<Vec<usize>> = ds
        .iter()
        .map(|&d| (0..tau).filter(|&t| gcd(d, t as u64 + 1) == 1).collect())
        .collect();
    let mut owner = vec![None; tau];
    (0..tau).all(|u| augment(u, &adj, &mut vec![false; tau], &mut owner))
}

#[test]
fn agrees_with_brute_force_up_to_2000() {
    for n in 1..=2000u64 {
        let d = is_matchable(n as u128).unwrap();
        d.validate().unwrap();
        assert_eq!(d.matchable, brute_matchable(n), "n = {n}");
    }
}

#[test]
fn small_and_structured_cases() {
    for n in 1..=7 {
        assert!(is_matchable(n).unwrap().matchable, "n = {n}");
    }
    for n in (8..=2000).step_by(4) {
        assert!(!is_matchable(n).unwrap().matchable, "n = {n}");
    }
    let primes = [2u128, 3, 5, 7, 11, 13, 17, 19, 23, 29];
    for p in primes {
        assert!(is_matchable(27 * p).unwrap().matchable, "27 * {p}");
    }
}

#[test]
fn evidence_kind_matches_verdict() {
    for n in [8u128, 12, 16, 24, 48] {
        let d = is_matchable(n).unwrap();
        assert!(!d.matchable);
        assert!(!matches!(d.evidence, Evidence::Matching(_)), "n = {n}");
    }
    let d = is_matchable(2 * 625).unwrap();
    assert!(matches!(d.evidence, Evidence::Matching(_)));
}
