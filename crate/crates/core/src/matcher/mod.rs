//! Coprime matchings with independently checkable certificates.
//!
//! A certificate names its two vertex multisets by a [`Descriptor`] and lists
//! the pairs; [`MatchingCertificate::validate`] re-expands both descriptors and
//! checks bijectivity and coprimality without trusting the construction.
//! When no perfect matching exists the answer is a [`HallWitness`].

mod flow;
mod pipeline;
mod strong;
mod transforms;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::arith::{divisors, factorize, gcd, is_prime_u64};
use crate::error::{Error, Result};
use crate::json::{wide, wide_pairs, wide_vec};

pub use pipeline::{
    coprime_matching, coprime_matching_with_limit, is_matchable, is_matchable_with_limit, match_divisors, mp_matching,
    quick_nonmatchable, Decision, Evidence, Route,
};
pub use strong::{
    decide_strong, prime_boost, prime_boost_from, realize_class, strong_fill, strong_fill_from, StrongClass,
    StrongDecision, STRONG_CLASS_LIMIT,
};
pub use transforms::{compose_even_odd, default_j, halve_matching, match_via_partition, partition_for, PartitionRoute};

/// Default bound on the size of each side of a matching problem.
pub const MATCH_LIMIT: usize = 1 << 20;

/// A finite multiset of positive integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Descriptor {
    /// The divisors of `n`.
    Divisors {
        #[serde(with = "wide")]
        n: u128,
    },
    /// `start, start + 1, ..., start + len - 1`.
    Interval {
        #[serde(with = "wide")]
        start: u128,
        #[serde(with = "wide")]
        len: u128,
    },
    /// `start, start + step, ..., start + (len - 1) step`.
    Progression {
        #[serde(with = "wide")]
        start: u128,
        #[serde(with = "wide")]
        step: u128,
        #[serde(with = "wide")]
        len: u128,
    },
    Values {
        #[serde(with = "wide_vec")]
        values: Vec<u128>,
    },
}

impl Descriptor {
    pub fn interval(len: u128) -> Self {
        Descriptor::Interval { start: 1, len }
    }

    pub fn len(&self) -> Result<u128> {
        Ok(match self {
            Descriptor::Divisors { n } => factorize(*n)?.tau(),
            Descriptor::Interval { len, .. } | Descriptor::Progression { len, .. } => *len,
            Descriptor::Values { values } => values.len() as u128,
        })
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(self.len()? == 0)
    }

    /// The members in a canonical order.
    pub fn members(&self, limit: usize) -> Result<Vec<u128>> {
        let len = self.len()?;
        if len > limit as u128 {
            return Err(Error::capacity("descriptor size", len, limit as u128));
        }
        match self {
            Descriptor::Divisors { n } => divisors(&factorize(*n)?, limit),
            Descriptor::Interval { start, len } => progression(*start, 1, *len),
            Descriptor::Progression { start, step, len } => progression(*start, *step, *len),
            Descriptor::Values { values } => {
                if values.contains(&0) {
                    return Err(Error::domain("values must be positive"));
                }
                Ok(values.clone())
            }
        }
    }
}

fn progression(start: u128, step: u128, len: u128) -> Result<Vec<u128>> {
    if start == 0 || step == 0 {
        return Err(Error::domain(
            "progressions start at a positive integer and have positive step",
        ));
    }
    if len > 0 {
        (len - 1)
            .checked_mul(step)
            .and_then(|x| x.checked_add(start))
            .ok_or_else(|| Error::domain("progression exceeds 128 bits"))?;
    }
    Ok((0..len).map(|i| start + i * step).collect())
}

/// A coprime bijection between two multisets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingCertificate {
    pub domain: Descriptor,
    pub codomain: Descriptor,
    /// `(domain element, codomain element)`.
    #[serde(with = "wide_pairs")]
    pub pairs: Vec<(u128, u128)>,
}

fn multiset(values: impl IntoIterator<Item = u128>) -> HashMap<u128, i64> {
    let mut m = HashMap::new();
    for v in values {
        *m.entry(v).or_insert(0) += 1;
    }
    m
}

impl MatchingCertificate {
    /// Checks bijectivity and pairwise coprimality from scratch.
    pub fn validate(&self) -> Result<()> {
        let limit = MATCH_LIMIT.max(self.pairs.len());
        let dom = self.domain.members(limit)?;
        let cod = self.codomain.members(limit)?;
        if dom.len() != self.pairs.len() || cod.len() != self.pairs.len() {
            return Err(Error::validation(format!(
                "{} pairs for a domain of {} and a codomain of {}",
                self.pairs.len(),
                dom.len(),
                cod.len()
            )));
        }
        for &(a, b) in &self.pairs {
            if gcd(a, b) != 1 {
                return Err(Error::validation(format!("pair ({a}, {b}) has gcd {}", gcd(a, b))));
            }
        }
        let mut left = multiset(dom);
        let mut right = multiset(cod);
        for &(a, b) in &self.pairs {
            for (side, v, name) in [(&mut left, a, "domain"), (&mut right, b, "codomain")] {
                match side.get_mut(&v) {
                    Some(c) if *c > 0 => *c -= 1,
                    _ => {
                        return Err(Error::validation(format!(
                            "pair ({a}, {b}): {v} is not an unused {name} element"
                        )))
                    }
                }
            }
        }
        Ok(())
    }

    /// The image of a domain element; the first pair wins on repeats.
    pub fn image(&self, a: u128) -> Option<u128> {
        self.pairs.iter().find(|p| p.0 == a).map(|p| p.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Domain,
    Codomain,
}

/// A set `S` on one side whose coprime neighbourhood is smaller than `S`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HallWitness {
    pub domain: Descriptor,
    pub codomain: Descriptor,
    pub side: Side,
    #[serde(with = "wide_vec")]
    pub set: Vec<u128>,
    /// `N(S)` with multiplicity.
    #[serde(with = "wide_vec")]
    pub neighborhood: Vec<u128>,
    #[serde(with = "wide")]
    pub neighborhood_size: u128,
}

impl HallWitness {
    pub fn deficiency(&self) -> i128 {
        self.set.len() as i128 - self.neighborhood_size as i128
    }

    /// Recomputes `N(S)` from the descriptors and checks `|N(S)| < |S|`.
    pub fn validate(&self) -> Result<()> {
        let limit = MATCH_LIMIT.max(self.set.len());
        let dom = self.domain.members(limit)?;
        let cod = self.codomain.members(limit)?;
        let (own, other) = match self.side {
            Side::Domain => (dom, cod),
            Side::Codomain => (cod, dom),
        };
        let mut avail = multiset(own);
        for &s in &self.set {
            match avail.get_mut(&s) {
                Some(c) if *c > 0 => *c -= 1,
                _ => return Err(Error::validation(format!("{s} is not an unused element of its side"))),
            }
        }
        let mut distinct = self.set.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let mut nbhd: Vec<u128> = other
            .into_iter()
            .filter(|&y| distinct.iter().any(|&s| gcd(s, y) == 1))
            .collect();
        nbhd.sort_unstable();
        let mut stated = self.neighborhood.clone();
        stated.sort_unstable();
        if nbhd != stated || nbhd.len() as u128 != self.neighborhood_size {
            return Err(Error::validation(format!(
                "stated neighbourhood of size {} differs from the recomputed one of size {}",
                self.neighborhood_size,
                nbhd.len()
            )));
        }
        if nbhd.len() >= self.set.len() {
            return Err(Error::validation(format!(
                "|N(S)| = {} is not below |S| = {}",
                nbhd.len(),
                self.set.len()
            )));
        }
        Ok(())
    }
}

/// Proof that `n` is not matchable because `p^k || n` with `k >= p` and
/// `tau(n) > r (p + 1)` where `r = tau(n) mod p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prop21Proof {
    #[serde(with = "wide")]
    pub n: u128,
    pub p: u64,
    pub k: u32,
    #[serde(with = "wide")]
    pub tau: u128,
    #[serde(with = "wide")]
    pub r: u128,
}

impl Prop21Proof {
    pub fn validate(&self) -> Result<()> {
        let f = factorize(self.n)?;
        let fail = |m: String| Err(Error::validation(m));
        if !is_prime_u64(self.p) {
            return fail(format!("{} is not prime", self.p));
        }
        if f.valuation(self.p) != self.k || (self.k as u64) < self.p {
            return fail(format!(
                "v_{}({}) is {}, stated {}",
                self.p,
                self.n,
                f.valuation(self.p),
                self.k
            ));
        }
        if f.tau() != self.tau || self.tau % self.p as u128 != self.r {
            return fail(format!("tau or remainder mismatch for {}", self.n));
        }
        if self.tau <= self.r * (self.p as u128 + 1) {
            return fail(format!(
                "tau = {} does not exceed r (p + 1) = {}",
                self.tau,
                self.r * (self.p as u128 + 1)
            ));
        }
        Ok(())
    }

    /// Whether the stronger `tau(n) >= p^2` form also holds.
    pub fn by_corollary(&self) -> bool {
        self.tau >= (self.p as u128).pow(2)
    }
}

impl std::fmt::Display for Prop21Proof {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Prop 2.1: p={}, \u{3c4}={}, r={}", self.p, self.tau, self.r)
    }
}

/// The outcome of a matching problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum MatchOutcome {
    Matching(MatchingCertificate),
    Hall(HallWitness),
}

impl MatchOutcome {
    pub fn validate(&self) -> Result<()> {
        match self {
            MatchOutcome::Matching(c) => c.validate(),
            MatchOutcome::Hall(w) => w.validate(),
        }
    }

    pub fn matching(self) -> Option<MatchingCertificate> {
        match self {
            MatchOutcome::Matching(c) => Some(c),
            MatchOutcome::Hall(_) => None,
        }
    }
}
