//! Partitions of an interval into divisor-indexed blocks whose elements are
//! coprime to their index, each block an AP combination of bounded size.

use serde::{Deserialize, Serialize};

use crate::apcomb::{APCombination, Restriction, MATERIALIZE_LIMIT};
use crate::arith::{classify, divisors, odd_primes, FactoredInteger, DEFAULT_DIVISOR_LIMIT};
use crate::error::{Error, Result};
use crate::json::{wide, wide_signed};

/// Intervals up to this length are validated element by element.
pub const EXTENSIONAL_LIMIT: i128 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionKind {
    /// Split by the first `j` primes `2 = p_1 < ... < p_j`.
    Squarefree,
    /// Residue classes for the tight primes, then splits by small odd primes.
    MNumber,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    /// The divisor `v` indexing the block; every element is coprime to it.
    #[serde(with = "wide")]
    pub index: u128,
    pub set: APCombination,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionCertificate {
    pub kind: PartitionKind,
    /// Blocks are indexed by the divisors of this number.
    #[serde(with = "wide")]
    pub modulus: u128,
    /// Every constituent step divides this number.
    #[serde(with = "wide")]
    pub step_modulus: u128,
    #[serde(with = "wide_signed")]
    pub interval_start: i128,
    #[serde(with = "wide_signed")]
    pub interval_len: i128,
    #[serde(with = "wide_signed")]
    pub block_size: i128,
    /// Bound on the construction size `k` of every block.
    #[serde(with = "wide")]
    pub error_budget: u128,
    pub blocks: Vec<Block>,
}

impl PartitionCertificate {
    pub fn block(&self, index: u128) -> Option<&APCombination> {
        self.blocks.iter().find(|b| b.index == index).map(|b| &b.set)
    }

    /// Re-checks every invariant from the stored data alone.
    pub fn validate(&self) -> Result<()> {
        let f = crate::arith::factorize(self.modulus)?;
        let idx = divisors(&f, DEFAULT_DIVISOR_LIMIT)?;
        let mut got: Vec<u128> = self.blocks.iter().map(|b| b.index).collect();
        got.sort_unstable();
        if got != idx {
            return Err(Error::validation("block indices are not the divisors of the modulus"));
        }
        let primes: Vec<u64> = f.primes().collect();
        for b in &self.blocks {
            b.set.validate()?;
            if b.set.len() != self.block_size {
                return Err(Error::validation(format!(
                    "block {} has {} elements, expected {}",
                    b.index,
                    b.set.len(),
                    self.block_size
                )));
            }
            if b.set.k as u128 > self.error_budget {
                return Err(Error::validation(format!(
                    "block {} has k = {} above the budget {}",
                    b.index, b.set.k, self.error_budget
                )));
            }
            if let Some(s) = b.set.steps().find(|&s| !self.step_modulus.is_multiple_of(s as u128)) {
                return Err(Error::validation(format!(
                    "block {} has step {s} not dividing {}",
                    b.index, self.step_modulus
                )));
            }
            for &p in primes.iter().filter(|&&p| b.index % p as u128 == 0) {
                let c = b.set.count_divisible(p as i128)?;
                if c.count != 0 {
                    return Err(Error::validation(format!(
                        "block {} contains {} multiples of {p}",
                        b.index, c.count
                    )));
                }
            }
            if b.set.count_in_interval(self.interval_start, self.interval_len) != b.set.len() {
                return Err(Error::validation(format!("block {} leaves the interval", b.index)));
            }
        }
        if self.block_size * self.blocks.len() as i128 != self.interval_len {
            return Err(Error::validation("block sizes do not add up to the interval length"));
        }
        if self.interval_len <= EXTENSIONAL_LIMIT {
            let mut seen = vec![false; self.interval_len as usize];
            for b in &self.blocks {
                let xs = b
                    .set
                    .elements(MATERIALIZE_LIMIT.max(self.interval_len as u128 * 4))
                    .ok_or_else(|| Error::validation("block too large to materialize"))?;
                for x in xs {
                    let i = (x - self.interval_start) as usize;
                    if seen[i] {
                        return Err(Error::validation(format!("{x} lies in two blocks")));
                    }
                    seen[i] = true;
                }
            }
        } else {
            for (i, a) in self.blocks.iter().enumerate() {
                for b in &self.blocks[i + 1..] {
                    if a.set.intersection_size(&b.set) != 0 {
                        return Err(Error::validation(format!("blocks {} and {} overlap", a.index, b.index)));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Least `z` in `[lo, hi]` with `count(z) >= target`, for non-decreasing `count`.
fn least_cutoff(lo: i128, hi: i128, target: i128, count: impl Fn(i128) -> i128) -> Option<i128> {
    if count(hi) < target {
        return None;
    }
    let (mut a, mut b) = (lo, hi);
    while a < b {
        let mid = a + (b - a) / 2;
        if count(mid) >= target {
            b = mid;
        } else {
            a = mid + 1;
        }
    }
    Some(a)
}

/// Splits `set` into a part of `target` non-multiples of `p` taken from
/// `(after, z]` with `z` minimal, and returns `(part, z)`.
fn take_non_multiples(
    set: &APCombination,
    p: i128,
    after: i128,
    target: i128,
    hi: i128,
) -> Result<(APCombination, i128)> {
    let window = set.restrict(Restriction::Above(after))?;
    let mult = window.restrict(Restriction::MultipleOf(p))?;
    let count = |z: i128| window.count_at_most(z) - mult.count_at_most(z);
    let z = least_cutoff(after, hi, target, count).ok_or_else(|| {
        Error::Invariant(format!(
            "not enough non-multiples of {p} to fill a block of size {target}"
        ))
    })?;
    let upto = window.restrict(Restriction::AtMost(z))?;
    let mult_upto = mult.restrict(Restriction::AtMost(z))?;
    Ok((upto.difference(&mult_upto)?, z))
}

/// Splits `set` into `ways - 1` blocks of non-multiples of `p`, each of size
/// `target`, followed by the remainder (which holds every multiple of `p`).
fn split(set: &APCombination, p: i128, ways: usize, target: i128, hi: i128, lo: i128) -> Result<Vec<APCombination>> {
    let mut parts = Vec::with_capacity(ways);
    let mut z = lo - 1;
    for _ in 1..ways {
        let (part, z2) = take_non_multiples(set, p, z, target, hi)?;
        parts.push(part);
        z = z2;
    }
    let mult_upto = set
        .restrict(Restriction::MultipleOf(p))?
        .restrict(Restriction::AtMost(z))?;
    let rest = mult_upto.union(&set.restrict(Restriction::Above(z))?)?;
    if rest.len() != target {
        return Err(Error::Invariant(format!(
            "remainder block has {} elements, expected {target}",
            rest.len()
        )));
    }
    parts.push(rest);
    Ok(parts)
}

/// Partitions the `len` integers from `start` into `2^j` blocks indexed by the
/// divisors of `p_1 ... p_j` (`p_1 = 2`), each a `2^(j-1)`-AP combination.
pub fn build_partition(primes: &[u64], start: i128, len: i128) -> Result<PartitionCertificate> {
    let j = primes.len() as u32;
    if j > 0 && primes[0] != 2 {
        return Err(Error::domain("the first prime must be 2"));
    }
    if primes.windows(2).any(|w| w[0] >= w[1]) || primes.iter().any(|&p| !crate::arith::is_prime_u64(p)) {
        return Err(Error::domain("primes must be increasing"));
    }
    if j > 40 {
        return Err(Error::capacity("number of primes", j as u128, 40u128));
    }
    let blocks_n = 1i128 << j;
    if len <= 0 || len % blocks_n != 0 {
        return Err(Error::domain(format!("2^{j} must divide the interval length {len}")));
    }
    if len < 1i128 << (2 * j) {
        return Err(Error::domain(format!("interval length {len} is below 4^{j}")));
    }
    let hi = start + len - 1;
    let mut blocks: Vec<(u128, APCombination)> = vec![(1, APCombination::interval(start, len)?)];
    if j >= 1 {
        let first_even = if start % 2 == 0 { start } else { start + 1 };
        let first_odd = if start % 2 == 0 { start + 1 } else { start };
        blocks = vec![
            (1, APCombination::make_ap(first_even, 2, len / 2)?),
            (2, APCombination::make_ap(first_odd, 2, len / 2)?),
        ];
    }
    for (i, &p) in primes.iter().enumerate().skip(1) {
        let target = len >> (i + 1);
        let mut next = Vec::with_capacity(blocks.len() * 2);
        for (v, set) in &blocks {
            let parts = split(set, p as i128, 2, target, hi, start)?;
            let mut it = parts.into_iter();
            next.push((v * p as u128, it.next().unwrap()));
            next.push((*v, it.next().unwrap()));
        }
        blocks = next;
    }
    blocks.sort_by_key(|(v, _)| *v);
    let modulus: u128 = primes.iter().map(|&p| p as u128).product();
    Ok(PartitionCertificate {
        kind: PartitionKind::Squarefree,
        modulus,
        step_modulus: modulus.max(1),
        interval_start: start,
        interval_len: len,
        block_size: len >> j,
        error_budget: if j == 0 { 1 } else { 1u128 << (j - 1) },
        blocks: blocks.into_iter().map(|(index, set)| Block { index, set }).collect(),
    })
}

/// The parameters of the M-number partition for a given `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MParameters {
    pub n_t: FactoredInteger,
    pub n_r: FactoredInteger,
    pub r: u128,
    /// The `p_j`-smooth part of `n_R`, `p_1 = 3, p_2 = 5, ...`.
    pub m_j: FactoredInteger,
    pub n_prime: FactoredInteger,
    /// `prod 2 a_i` over `i <= j` with `a_i >= 1`.
    pub k_budget: u128,
}

impl MParameters {
    pub fn new(n: &FactoredInteger, j: usize) -> Result<Self> {
        let c = classify(n);
        if !c.is_m_number {
            return Err(Error::domain(format!("{n} is not an M-number")));
        }
        let small: Vec<u64> = odd_primes(j);
        let m_j = c.rest.part(|p, _| small.contains(&p));
        let n_prime = c.rest.div(&m_j)?;
        let k_budget = m_j.factors().iter().map(|&(_, a)| 2 * a as u128).product();
        Ok(MParameters {
            n_t: c.tight_part,
            n_r: c.rest,
            r: c.r,
            m_j,
            n_prime,
            k_budget,
        })
    }

    /// Whether `tau(n') >= 4^j r^j`.
    pub fn hypothesis_holds(&self, j: usize) -> bool {
        let mut need: u128 = 1;
        for _ in 0..j {
            need = match need.checked_mul(4 * self.r) {
                Some(v) => v,
                None => return false,
            };
        }
        self.n_prime.tau() >= need
    }
}

/// `rho(d_T)`: the residue mod `r` with `rho = v_p(d_T) mod p` for each tight `p`.
pub fn rho(tight_primes: &[u64], d_t: u128) -> u128 {
    let r: u128 = tight_primes.iter().map(|&p| p as u128).product();
    let mut x: u128 = 0;
    for &p in tight_primes {
        let p = p as u128;
        let mut v = 0u128;
        let mut d = d_t;
        while d.is_multiple_of(p) {
            d /= p;
            v += 1;
        }
        let m = r / p;
        let inv = (1..p).find(|&t| (m % p) * t % p == 1).unwrap_or(0);
        x = (x + (v % p) * m % r * inv) % r;
    }
    x
}

/// Partitions `[start, start + tau(n) - 1]` into blocks indexed by the
/// divisors of `n_T m_j`, each of size `tau(n')` and coprime to its index.
pub fn build_m_partition(n: &FactoredInteger, j: usize, start: i128) -> Result<PartitionCertificate> {
    let params = MParameters::new(n, j)?;
    if !params.hypothesis_holds(j) {
        return Err(Error::domain(format!(
            "tau(n') = {} is below 4^{j} r^{j} with r = {}",
            params.n_prime.tau(),
            params.r
        )));
    }
    let r = params.r as i128;
    let tau_r = params.n_r.tau() as i128;
    let len = r * tau_r;
    let hi = start + len - 1;
    let tight: Vec<u64> = params.n_t.primes().collect();
    let mut blocks: Vec<(u128, APCombination)> = Vec::new();
    for d_t in divisors(&params.n_t, DEFAULT_DIVISOR_LIMIT)? {
        let class = rho(&tight, d_t) as i128;
        let first = start + (class - start).rem_euclid(r);
        blocks.push((d_t, APCombination::make_ap(first, r, tau_r)?));
    }
    let mut size = tau_r;
    for &(p, a) in params.m_j.factors() {
        let ways = a as usize + 1;
        size /= ways as i128;
        let mut next = Vec::with_capacity(blocks.len() * ways);
        for (d, set) in &blocks {
            let parts = split(set, p as i128, ways, size, hi, start)?;
            let mut it = parts.into_iter();
            let mut pe = 1u128;
            for _ in 1..ways {
                pe *= p as u128;
                next.push((d * pe, it.next().unwrap()));
            }
            next.push((*d, it.next().unwrap()));
        }
        blocks = next;
    }
    blocks.sort_by_key(|(v, _)| *v);
    Ok(PartitionCertificate {
        kind: PartitionKind::MNumber,
        modulus: params.n_t.value() * params.m_j.value(),
        step_modulus: params.r * params.m_j.value(),
        interval_start: start,
        interval_len: len,
        block_size: size,
        error_budget: params.k_budget,
        blocks: blocks.into_iter().map(|(index, set)| Block { index, set }).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{factorize, gcd};

    fn elems(s: &APCombination) -> Vec<i128> {
        s.elements(MATERIALIZE_LIMIT).unwrap()
    }

    #[test]
    fn j1_is_the_parity_split() {
        let c = build_partition(&[2], 1, 4).unwrap();
        assert_eq!(elems(c.block(2).unwrap()), vec![1, 3]);
        assert_eq!(elems(c.block(1).unwrap()), vec![2, 4]);
        c.validate().unwrap();
    }

    #[test]
    fn j2_and_j3() {
        let c = build_partition(&[2, 3], 1, 16).unwrap();
        assert_eq!(c.blocks.len(), 4);
        assert!(c.blocks.iter().all(|b| b.set.len() == 4));
        assert!(elems(c.block(6).unwrap()).iter().all(|x| x % 2 == 1 && x % 3 != 0));
        c.validate().unwrap();

        let c = build_partition(&[2, 3, 5], 1, 64).unwrap();
        assert_eq!(c.blocks.len(), 8);
        assert!(c.blocks.iter().all(|b| b.set.len() == 8 && b.set.k <= 4));
        c.validate().unwrap();
    }

    #[test]
    fn shifted_interval() {
        let c = build_partition(&[2, 3, 7], -37, 128).unwrap();
        c.validate().unwrap();
        assert_eq!(c.interval_start, -37);
    }

    #[test]
    fn preconditions() {
        assert!(matches!(build_partition(&[2, 3], 1, 12), Err(Error::Domain(_))));
        assert!(matches!(build_partition(&[2, 3, 5], 1, 32), Err(Error::Domain(_))));
        assert!(matches!(build_partition(&[3], 1, 8), Err(Error::Domain(_))));
    }

    #[test]
    fn rho_matches_definition() {
        let tight = [2u64, 3];
        for d in divisors(&factorize(18).unwrap(), 100).unwrap() {
            let x = rho(&tight, d);
            let f = factorize(d).unwrap();
            assert_eq!(x % 2, f.valuation(2) as u128 % 2);
            assert_eq!(x % 3, f.valuation(3) as u128 % 3);
        }
    }

    #[test]
    fn eighteen_singletons() {
        let c = build_m_partition(&factorize(18).unwrap(), 0, 1).unwrap();
        let want = [(1u128, 6i128), (2, 3), (3, 4), (9, 2), (6, 1), (18, 5)];
        for (d, x) in want {
            assert_eq!(elems(c.block(d).unwrap()), vec![x], "d={d}");
            assert_eq!(gcd(d, x as u128), 1);
        }
        c.validate().unwrap();
    }

    #[test]
    fn tight_classes_of_step_r() {
        let n = factorize(2 * 9 * 5 * 7 * 11 * 13).unwrap();
        let c = build_m_partition(&n, 0, 1).unwrap();
        assert_eq!(c.blocks.len(), 6);
        assert_eq!(c.block_size, 16);
        for b in &c.blocks {
            assert_eq!(b.set.terms.len(), 1);
            assert_eq!(b.set.terms[0].step, 6);
        }
        c.validate().unwrap();
    }

    #[test]
    fn higher_exponents_split_many_ways() {
        // 5^3 with budget 2*3, tight 2 (r = 2), plenty of large primes
        let n = FactoredInteger::from_factors([
            (2, 1),
            (5, 3),
            (17, 1),
            (19, 1),
            (23, 1),
            (29, 1),
            (31, 1),
            (37, 1),
            (41, 1),
        ])
        .unwrap();
        let c = build_m_partition(&n, 2, 1).unwrap();
        assert_eq!(c.blocks.len(), 2 * 4);
        assert_eq!(c.error_budget, 6);
        c.validate().unwrap();
    }

    #[test]
    fn non_m_numbers_rejected() {
        let n = FactoredInteger::from_factors([(2, 1), (3, 3), (5, 1)]).unwrap();
        assert!(matches!(build_m_partition(&n, 0, 1), Err(Error::Domain(_))));
        // hypothesis tau(n') >= 4^j r^j fails
        let m = factorize(2 * 3 * 5 * 7 * 11 * 13).unwrap();
        assert!(matches!(build_m_partition(&m, 2, 1), Err(Error::Domain(_))));
    }
}
