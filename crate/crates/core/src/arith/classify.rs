use serde::{Deserialize, Serialize};

use super::factor::FactoredInteger;

/// Tight/non-tight decomposition `n = n_T * n_R`.
///
/// A prime `p | n` is tight when `v_p(n) = p - 1`. `n` is an M-number when
/// no `p^p` divides it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MClassification {
    pub is_m_number: bool,
    pub tight_primes: Vec<u64>,
    /// `prod p^(p-1)` over tight primes.
    pub tight_part: FactoredInteger,
    /// `n / n_T`.
    pub rest: FactoredInteger,
    /// `rad(n_T) = tau(n_T)`.
    pub r: u128,
}

pub fn classify(f: &FactoredInteger) -> MClassification {
    let is_m_number = f.factors().iter().all(|&(p, e)| (e as u64) < p);
    let tight = |p: u64, e: u32| e as u64 + 1 == p;
    let tight_part = f.part(tight);
    let rest = f.part(|p, e| !tight(p, e));
    let tight_primes: Vec<u64> = tight_part.primes().collect();
    let r = tight_part.rad();
    MClassification {
        is_m_number,
        tight_primes,
        tight_part,
        rest,
        r,
    }
}

/// Primes `p` with `p^p | n`.
pub fn offending_primes(f: &FactoredInteger) -> Vec<u64> {
    f.factors()
        .iter()
        .filter(|&&(p, e)| e as u64 >= p)
        .map(|&(p, _)| p)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::factorize;

    #[test]
    fn examples() {
        assert!(!classify(&factorize(8).unwrap()).is_m_number);

        let c = classify(&factorize(18).unwrap());
        assert!(c.is_m_number);
        assert_eq!(c.tight_primes, vec![2, 3]);
        assert_eq!(c.tight_part.value(), 18);
        assert_eq!(c.rest.value(), 1);
        assert_eq!(c.r, 6);
        assert_eq!(c.tight_part.tau(), 6);

        assert!(!classify(&factorize(135).unwrap()).is_m_number);
    }

    #[test]
    fn decomposition_invariants() {
        for n in 1..=20_000u128 {
            let f = factorize(n).unwrap();
            let c = classify(&f);
            assert_eq!(c.tight_part.value() * c.rest.value(), n);
            assert_eq!(c.r, c.tight_part.rad());
            if c.is_m_number {
                assert_eq!(c.r, c.tight_part.tau());
            }
            for p in c.rest.primes() {
                assert_ne!(c.rest.valuation(p) as u64 + 1, p);
            }
        }
    }

    #[test]
    fn m_number_matches_trial_division() {
        let ps = crate::arith::primes::sieve(400);
        for n in 1..=100_000u128 {
            let direct = !ps.iter().any(|&p| {
                let pp = (p as u128).checked_pow(p as u32);
                matches!(pp, Some(q) if n % q == 0)
            });
            assert_eq!(classify(&factorize(n).unwrap()).is_m_number, direct, "n={n}");
        }
    }
}
