use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Bound of the process-wide sieve used for trial division.
pub const SIEVE_BOUND: u64 = 1 << 20;

/// Primes below `bound`, by the sieve of Eratosthenes.
pub fn sieve(bound: u64) -> Vec<u64> {
    if bound < 3 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n];
    let mut out = Vec::new();
    for i in 2..n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i.saturating_mul(i);
        while j < n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// All primes below [`SIEVE_BOUND`], computed once.
pub fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| sieve(SIEVE_BOUND))
}

/// The primes in increasing order, `P_1 = 2, P_2 = 3, ...`.
///
/// Construction checks the classical lower bound `P_i > i log i` for every
/// stored index, since the reciprocal-sum estimates downstream lean on it.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    primes: Vec<u64>,
}

impl PrimeTable {
    /// The first `count` primes.
    pub fn first(count: usize) -> Result<Self> {
        let cached = small_primes();
        let primes = if count <= cached.len() {
            cached[..count].to_vec()
        } else {
            // crude upper bound for the count-th prime
            let c = count as f64;
            let bound = (c * (c.ln() + c.ln().ln()) * 1.2) as u64 + 16;
            let mut all = sieve(bound);
            all.truncate(count);
            all
        };
        Self::from_primes(primes)
    }

    /// All primes `<= bound`.
    pub fn up_to(bound: u64) -> Result<Self> {
        let primes = if bound < SIEVE_BOUND {
            small_primes().iter().copied().take_while(|&p| p <= bound).collect()
        } else {
            sieve(bound + 1)
        };
        Self::from_primes(primes)
    }

    fn from_primes(primes: Vec<u64>) -> Result<Self> {
        for (idx, &p) in primes.iter().enumerate() {
            let i = (idx + 1) as f64;
            if (p as f64) <= i * i.ln() {
                return Err(Error::Invariant(format!(
                    "prime table violates P_i > i log i at i={} (P_i={p})",
                    idx + 1
                )));
            }
        }
        Ok(PrimeTable { primes })
    }

    /// `P_i`, one-based.
    pub fn nth(&self, i: usize) -> Option<u64> {
        i.checked_sub(1).and_then(|k| self.primes.get(k).copied())
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.primes
    }
}

/// The first `count` odd primes `3, 5, 7, ...`.
pub fn odd_primes(count: usize) -> Vec<u64> {
    let cached = small_primes();
    if count < cached.len() {
        return cached[1..=count].to_vec();
    }
    let table = PrimeTable::first(count + 1).expect("prime table");
    table.as_slice()[1..].to_vec()
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for the full 64-bit range.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_small() {
        assert_eq!(sieve(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert!(sieve(2).is_empty());
    }

    #[test]
    fn table_indexing() {
        let t = PrimeTable::first(50).unwrap();
        assert_eq!(t.nth(1), Some(2));
        assert_eq!(t.nth(14), Some(43));
        assert_eq!(t.nth(49), Some(227));
        assert_eq!(t.nth(0), None);
        assert_eq!(t.len(), 50);
    }

    #[test]
    fn large_table_is_checked() {
        let t = PrimeTable::first(100_000).unwrap();
        assert_eq!(t.nth(100_000), Some(1_299_709));
        let u = PrimeTable::up_to(97).unwrap();
        assert_eq!(u.len(), 25);
    }

    #[test]
    fn odd_prime_prefix() {
        assert_eq!(odd_primes(4), vec![3, 5, 7, 11]);
        assert_eq!(odd_primes(24).last(), Some(&97));
    }

    #[test]
    fn miller_rabin_agrees_with_sieve() {
        let ps = sieve(20_000);
        for n in 0..20_000u64 {
            assert_eq!(is_prime_u64(n), ps.binary_search(&n).is_ok(), "n={n}");
        }
        assert!(is_prime_u64(18_446_744_073_709_551_557));
        assert!(!is_prime_u64(3_215_031_751)); // strong pseudoprime to 2,3,5,7
    }
}
