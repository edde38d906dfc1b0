use std::fmt;

use serde::{Deserialize, Serialize};

use super::primes::{is_prime_u64, small_primes, SIEVE_BOUND};
use crate::error::{Error, Result};

/// Default cap on the number of divisors [`divisors`] will enumerate.
pub const DEFAULT_DIVISOR_LIMIT: usize = 1 << 22;

/// A positive integer together with its canonical prime factorization.
///
/// Values are held in 128 bits; constructors reject anything larger.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<(u64, u32)>", into = "Vec<(u64, u32)>")]
pub struct FactoredInteger {
    value: u128,
    factors: Vec<(u64, u32)>,
}

impl FactoredInteger {
    pub fn one() -> Self {
        FactoredInteger {
            value: 1,
            factors: Vec::new(),
        }
    }

    /// Builds from `(prime, exponent)` pairs in any order. Repeated primes are
    /// merged and zero exponents dropped; non-primes and overflow are errors.
    pub fn from_factors(pairs: impl IntoIterator<Item = (u64, u32)>) -> Result<Self> {
        let mut raw: Vec<(u64, u32)> = pairs.into_iter().filter(|&(_, e)| e > 0).collect();
        raw.sort_unstable();
        let mut factors: Vec<(u64, u32)> = Vec::with_capacity(raw.len());
        for (p, e) in raw {
            match factors.last_mut() {
                Some((q, f)) if *q == p => *f += e,
                _ => factors.push((p, e)),
            }
        }
        let mut value: u128 = 1;
        for &(p, e) in &factors {
            if !is_prime_u64(p) {
                return Err(Error::domain(format!("{p} is not prime")));
            }
            for _ in 0..e {
                value = value
                    .checked_mul(p as u128)
                    .ok_or_else(|| Error::domain("value does not fit in 128 bits"))?;
            }
        }
        Ok(FactoredInteger { value, factors })
    }

    pub fn value(&self) -> u128 {
        self.value
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Number of divisors.
    pub fn tau(&self) -> u128 {
        self.factors.iter().map(|&(_, e)| e as u128 + 1).product()
    }

    /// Number of distinct prime factors.
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    pub fn rad(&self) -> u128 {
        self.factors.iter().map(|&(p, _)| p as u128).product()
    }

    /// Exponent of `p` in the factorization.
    pub fn valuation(&self, p: u64) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map(|&(_, e)| e)
            .unwrap_or(0)
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn is_even(&self) -> bool {
        self.valuation(2) > 0
    }

    /// The product `self * other` (primes may overlap).
    pub fn mul(&self, other: &FactoredInteger) -> Result<Self> {
        Self::from_factors(self.factors.iter().chain(other.factors.iter()).copied())
    }

    /// Exact quotient `self / other`; errors if `other` does not divide `self`.
    pub fn div(&self, other: &FactoredInteger) -> Result<Self> {
        let mut out = Vec::with_capacity(self.factors.len());
        for &(p, e) in &self.factors {
            let f = other.valuation(p);
            if f > e {
                return Err(Error::domain(format!("{} does not divide {}", other, self)));
            }
            out.push((p, e - f));
        }
        if other.primes().any(|p| self.valuation(p) == 0) {
            return Err(Error::domain(format!("{} does not divide {}", other, self)));
        }
        Self::from_factors(out)
    }

    /// Restriction to the given primes.
    pub fn part(&self, keep: impl Fn(u64, u32) -> bool) -> Self {
        let factors: Vec<_> = self.factors.iter().copied().filter(|&(p, e)| keep(p, e)).collect();
        let value = factors.iter().map(|&(p, e)| (p as u128).pow(e)).product();
        FactoredInteger { value, factors }
    }
}

impl TryFrom<Vec<(u64, u32)>> for FactoredInteger {
    type Error = Error;
    fn try_from(v: Vec<(u64, u32)>) -> Result<Self> {
        Self::from_factors(v)
    }
}

impl From<FactoredInteger> for Vec<(u64, u32)> {
    fn from(f: FactoredInteger) -> Self {
        f.factors
    }
}

impl fmt::Display for FactoredInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Factors `n` by trial division over the cached prime table, finishing with a
/// deterministic primality test once the cofactor fits in 64 bits.
pub fn factorize(n: u128) -> Result<FactoredInteger> {
    if n == 0 {
        return Err(Error::domain("cannot factor 0"));
    }
    let mut rem = n;
    let mut factors = Vec::new();
    let mut push = |rem: &mut u128, p: u64| {
        let mut e = 0;
        while (*rem).is_multiple_of(p as u128) {
            *rem /= p as u128;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    };
    for &p in small_primes() {
        if (p as u128) * (p as u128) > rem {
            break;
        }
        push(&mut rem, p);
    }
    let bound_sq = (SIEVE_BOUND as u128) * (SIEVE_BOUND as u128);
    if rem >= bound_sq && !(rem <= u64::MAX as u128 && is_prime_u64(rem as u64)) {
        // slow path: wheel past the sieve
        let mut p = SIEVE_BOUND | 1;
        while (p as u128) * (p as u128) <= rem {
            push(&mut rem, p);
            if rem <= u64::MAX as u128 && is_prime_u64(rem as u64) {
                break;
            }
            p += 2;
        }
    }
    if rem > 1 {
        let p = u64::try_from(rem).map_err(|_| Error::domain("prime factor exceeds 64 bits"))?;
        factors.push((p, 1));
    }
    factors.sort_unstable();
    Ok(FactoredInteger { value: n, factors })
}

/// All divisors of `f` in increasing order.
pub fn divisors(f: &FactoredInteger, limit: usize) -> Result<Vec<u128>> {
    let tau = f.tau();
    if tau > limit as u128 {
        return Err(Error::capacity("divisor count", tau, limit as u128));
    }
    let mut out = Vec::with_capacity(tau as usize);
    out.push(1u128);
    for &(p, e) in f.factors() {
        let len = out.len();
        let mut pk = 1u128;
        for _ in 0..e {
            pk *= p as u128;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let one = factorize(1).unwrap();
        assert!(one.factors().is_empty());
        assert_eq!(one.tau(), 1);
        let f = factorize(18).unwrap();
        assert_eq!(f.factors(), &[(2, 1), (3, 2)]);
        assert_eq!(f.tau(), 6);
        let g = factorize(360).unwrap();
        assert_eq!(g.factors(), &[(2, 3), (3, 2), (5, 1)]);
        assert_eq!(g.tau(), 24);
        assert_eq!(g.rad(), 30);
        assert_eq!(g.omega(), 3);
    }

    #[test]
    fn zero_is_rejected() {
        assert!(matches!(factorize(0), Err(Error::Domain(_))));
    }

    #[test]
    fn divisor_lists() {
        assert_eq!(divisors(&factorize(8).unwrap(), 16).unwrap(), vec![1, 2, 4, 8]);
        assert_eq!(divisors(&factorize(1).unwrap(), 16).unwrap(), vec![1]);
        assert_eq!(divisors(&factorize(12).unwrap(), 16).unwrap(), vec![1, 2, 3, 4, 6, 12]);
        let err = divisors(&factorize(720720).unwrap(), 100).unwrap_err();
        assert!(matches!(err, Error::Capacity { limit: 100, .. }));
    }

    #[test]
    fn large_values() {
        let p = 18_446_744_073_709_551_557u128; // largest 64-bit prime
        let f = factorize(p * 6).unwrap();
        assert_eq!(f.factors(), &[(2, 1), (3, 1), (p as u64, 1)]);
        let q = 1_000_003u128;
        let g = factorize(q * q).unwrap();
        assert_eq!(g.factors(), &[(1_000_003, 2)]);
    }

    #[test]
    fn from_factors_normalizes() {
        let f = FactoredInteger::from_factors([(3, 1), (2, 1), (3, 1), (5, 0)]).unwrap();
        assert_eq!(f.factors(), &[(2, 1), (3, 2)]);
        assert_eq!(f.value(), 18);
        assert!(FactoredInteger::from_factors([(4, 1)]).is_err());
        assert!(FactoredInteger::from_factors([(2, 200)]).is_err());
    }

    #[test]
    fn reconstruct_and_divisors_up_to_1e6() {
        for n in 1..=1_000_000u128 {
            let f = factorize(n).unwrap();
            let prod: u128 = f.factors().iter().map(|&(p, e)| (p as u128).pow(e)).product();
            assert_eq!(prod, n);
            assert!(f.factors().windows(2).all(|w| w[0].0 < w[1].0));
            if n % 997 == 0 || n < 2000 {
                let ds = divisors(&f, DEFAULT_DIVISOR_LIMIT).unwrap();
                assert_eq!(ds.len() as u128, f.tau());
                assert!(ds.iter().all(|d| n % d == 0));
                assert!(ds.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }
}
