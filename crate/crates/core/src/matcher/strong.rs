//! Matchings against arbitrary coprime progressions.
//!
//! A progression `a, a + q, ...` is coprime when `gcd(a, q) = 1`. Against
//! `D(n)` only residues modulo `R = rad(n)` matter, and a class `(a0, q0)`
//! mod `R` contains a coprime progression iff `gcd(a0, q0, R) = 1`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pipeline::match_divisors;
use super::{Descriptor, HallWitness, MatchOutcome, MatchingCertificate, MATCH_LIMIT};
use crate::arith::{factorize, gcd, is_prime_u64, FactoredInteger};
use crate::error::{Error, Result};
use crate::json::wide;

/// Bound on `rad(n)^2`, the number of residue classes examined.
pub const STRONG_CLASS_LIMIT: u128 = 1 << 20;

/// A residue class of progressions and a concrete coprime member of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrongClass {
    #[serde(with = "wide")]
    pub modulus: u128,
    #[serde(with = "wide")]
    pub a0: u128,
    #[serde(with = "wide")]
    pub q0: u128,
    #[serde(with = "wide")]
    pub start: u128,
    #[serde(with = "wide")]
    pub step: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrongDecision {
    #[serde(with = "wide")]
    pub n: u128,
    pub strong: bool,
    pub classes_checked: usize,
    /// The first class without a matching, with its Hall witness.
    pub failure: Option<(StrongClass, HallWitness)>,
    /// One matching per class when `strong`.
    pub certificates: Vec<(StrongClass, MatchingCertificate)>,
}

impl StrongClass {
    fn progression(&self, len: u128) -> Descriptor {
        Descriptor::Progression {
            start: self.start,
            step: self.step,
            len,
        }
    }

    fn check(&self) -> Result<()> {
        let m = self.modulus;
        if m == 0 || self.start % m != self.a0 || self.step % m != self.q0 || gcd(self.start, self.step) != 1 {
            return Err(Error::validation(format!(
                "{} + k {} is not a coprime member of class ({}, {}) mod {m}",
                self.start, self.step, self.a0, self.q0
            )));
        }
        Ok(())
    }
}

impl StrongDecision {
    /// A strong verdict needs one valid matching for every admissible class
    /// mod `rad(n)`; a negative one needs a Hall witness against a member of
    /// some class.
    pub fn validate(&self) -> Result<()> {
        let f = factorize(self.n)?;
        let (r, tau) = (f.rad(), f.tau());
        let domain = Descriptor::Divisors { n: self.n };
        let check_class = |c: &StrongClass| -> Result<()> {
            c.check()?;
            if c.modulus != r {
                return Err(Error::validation(format!(
                    "class modulus {} is not rad(n) = {r}",
                    c.modulus
                )));
            }
            Ok(())
        };
        if !self.strong {
            let (c, w) = self
                .failure
                .as_ref()
                .ok_or_else(|| Error::validation("negative verdict without a witness"))?;
            check_class(c)?;
            if w.domain != domain || w.codomain != c.progression(tau) {
                return Err(Error::validation(
                    "witness is not for D(n) against the class progression",
                ));
            }
            return w.validate();
        }
        let expected = (0..r)
            .flat_map(|a0| (0..r).map(move |q0| (a0, q0)))
            .filter(|&(a0, q0)| gcd(gcd(a0, q0), r) == 1)
            .count();
        let mut seen: Vec<(u128, u128)> = self.certificates.iter().map(|(c, _)| (c.a0, c.q0)).collect();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != expected || self.certificates.len() != expected || self.classes_checked != expected {
            return Err(Error::validation(format!(
                "{} distinct classes matched, {expected} admissible classes mod {r}",
                seen.len()
            )));
        }
        for (c, m) in &self.certificates {
            check_class(c)?;
            if m.domain != domain || m.codomain != c.progression(tau) {
                return Err(Error::validation(format!(
                    "matching for class ({}, {}) has the wrong domain or codomain",
                    c.a0, c.q0
                )));
            }
            m.validate()
                .map_err(|e| Error::validation(format!("class ({}, {}): {e}", c.a0, c.q0)))?;
        }
        Ok(())
    }
}

/// A coprime progression `start + k step` with `start = a0`, `step = q0`
/// modulo `modulus`, both positive.
pub fn realize_class(a0: u128, q0: u128, modulus: u128) -> Option<StrongClass> {
    if modulus == 0 || a0 >= modulus || q0 >= modulus || gcd(gcd(a0, q0), modulus) != 1 {
        return None;
    }
    let lift = |x: u128| if x == 0 { modulus } else { x };
    for s in 0..256u128 {
        for t in 0..256u128 {
            let (a, q) = (lift(a0) + s * modulus, lift(q0) + t * modulus);
            if gcd(a, q) == 1 {
                return Some(StrongClass {
                    modulus,
                    a0,
                    q0,
                    start: a,
                    step: q,
                });
            }
        }
    }
    None
}

/// Decides whether `D(n)` can be matched to every coprime progression of
/// length `tau(n)` by checking one progression per residue class mod `rad(n)`.
pub fn decide_strong(n: u128) -> Result<StrongDecision> {
    let f = factorize(n)?;
    let r = f.rad();
    if r.saturating_mul(r) > STRONG_CLASS_LIMIT {
        return Err(Error::capacity(
            "residue classes",
            r.saturating_mul(r),
            STRONG_CLASS_LIMIT,
        ));
    }
    let tau = f.tau();
    if tau > MATCH_LIMIT as u128 {
        return Err(Error::capacity("tau(n)", tau, MATCH_LIMIT as u128));
    }
    let classes: Vec<StrongClass> = (0..r)
        .flat_map(|a0| (0..r).map(move |q0| (a0, q0)))
        .filter_map(|(a0, q0)| realize_class(a0, q0, r))
        .collect();
    let results: Vec<Result<MatchOutcome>> = classes
        .par_iter()
        .map(|c| match_divisors(&f, c.progression(tau), MATCH_LIMIT))
        .collect();
    let mut certificates = Vec::with_capacity(classes.len());
    for (c, res) in classes.iter().zip(results) {
        match res? {
            MatchOutcome::Matching(cert) => certificates.push((*c, cert)),
            MatchOutcome::Hall(w) => {
                return Ok(StrongDecision {
                    n,
                    strong: false,
                    classes_checked: classes.len(),
                    failure: Some((*c, w)),
                    certificates: Vec::new(),
                })
            }
        }
    }
    Ok(StrongDecision {
        n,
        strong: true,
        classes_checked: classes.len(),
        failure: None,
        certificates,
    })
}

fn check_prime_coprime(n: &FactoredInteger, p: u64) -> Result<()> {
    if !is_prime_u64(p) {
        return Err(Error::domain(format!("{p} is not prime")));
    }
    if n.valuation(p) > 0 {
        return Err(Error::domain(format!("{p} divides {n}")));
    }
    Ok(())
}

fn check_coprime_ap(start: u128, step: u128) -> Result<()> {
    if start == 0 || step == 0 || gcd(start, step) != 1 {
        return Err(Error::domain(format!(
            "{start} + k {step} is not a coprime progression"
        )));
    }
    Ok(())
}

fn expect_matching(c: &MatchingCertificate, n: u128, target: &Descriptor) -> Result<()> {
    c.validate().map_err(|e| Error::validation(e.to_string()))?;
    if c.domain != (Descriptor::Divisors { n }) {
        return Err(Error::validation(format!("certificate domain is not D({n})")));
    }
    let mut got = c.codomain.members(MATCH_LIMIT)?;
    let mut want = target.members(MATCH_LIMIT)?;
    got.sort_unstable();
    want.sort_unstable();
    if got != want {
        return Err(Error::validation(
            "certificate codomain differs from the expected subsequence",
        ));
    }
    Ok(())
}

fn sub_progressions(start: u128, step: u128, parts: u128, len: u128) -> Vec<Descriptor> {
    (0..parts)
        .map(|j| Descriptor::Progression {
            start: start + j * step,
            step: parts * step,
            len,
        })
        .collect()
}

/// Given matchings `psi_j` of `D(n)` to the `p` interleaved subsequences
/// `I_j = (i_{j + kp})_k` of a coprime progression `I` of length `p tau(n)`,
/// builds a matching of `D(p^(p-1) n)` to `I`. `D(n)` goes to the subsequence
/// whose terms are all multiples of `p` (if any), each `p^k D(n)` to another one.
pub fn strong_fill(
    n: u128,
    p: u64,
    start: u128,
    step: u128,
    certs: &[MatchingCertificate],
) -> Result<MatchingCertificate> {
    let f = factorize(n)?;
    check_prime_coprime(&f, p)?;
    check_coprime_ap(start, step)?;
    let tau = f.tau();
    let pp = p as u128;
    if certs.len() as u128 != pp {
        return Err(Error::validation(format!(
            "expected {p} certificates, got {}",
            certs.len()
        )));
    }
    let subs = sub_progressions(start, step, pp, tau);
    for (c, s) in certs.iter().zip(&subs) {
        expect_matching(c, n, s)?;
    }
    let j0 = (0..pp)
        .find(|&j| !step.is_multiple_of(pp) && (start + j * step).is_multiple_of(pp))
        .unwrap_or(0) as usize;
    let big = FactoredInteger::from_factors([(p, p as u32 - 1)])
        .and_then(|x| x.mul(&f))
        .map_err(|_| Error::capacity("bits of p^(p-1) n", 129u128, 128u128))?;
    let mut pairs: Vec<(u128, u128)> = certs[j0].pairs.clone();
    let mut pk = 1u128;
    for c in certs.iter().enumerate().filter(|&(j, _)| j != j0).map(|(_, c)| c) {
        pk *= pp;
        pairs.extend(c.pairs.iter().map(|&(d, t)| (pk * d, t)));
    }
    pairs.sort_unstable();
    let out = MatchingCertificate {
        domain: Descriptor::Divisors { n: big.value() },
        codomain: Descriptor::Progression {
            start,
            step,
            len: pp * tau,
        },
        pairs,
    };
    out.validate()?;
    Ok(out)
}

fn matching_or_precondition(n: &FactoredInteger, target: Descriptor) -> Result<MatchingCertificate> {
    match match_divisors(n, target.clone(), MATCH_LIMIT)? {
        MatchOutcome::Matching(c) => Ok(c),
        MatchOutcome::Hall(_) => Err(Error::Precondition {
            message: format!("D({n}) has no coprime matching to {target:?}"),
            witness: None,
        }),
    }
}

/// [`strong_fill`] with the subsequence matchings computed directly.
pub fn strong_fill_from(n: u128, p: u64, start: u128, step: u128) -> Result<MatchingCertificate> {
    let f = factorize(n)?;
    check_prime_coprime(&f, p)?;
    check_coprime_ap(start, step)?;
    let certs = sub_progressions(start, step, p as u128, f.tau())
        .into_iter()
        .map(|s| matching_or_precondition(&f, s))
        .collect::<Result<Vec<_>>>()?;
    strong_fill(n, p, start, step, &certs)
}

/// For `p > 2 tau(n)` prime to `n` and matchings of `D(n)` to both halves of
/// a coprime progression of length `2 tau(n)`, a matching of `D(pn)` to it:
/// `pD(n)` goes to a half without multiples of `p`, `D(n)` to the other.
pub fn prime_boost(
    n: u128,
    p: u64,
    start: u128,
    step: u128,
    halves: [&MatchingCertificate; 2],
) -> Result<MatchingCertificate> {
    let f = factorize(n)?;
    check_prime_coprime(&f, p)?;
    check_coprime_ap(start, step)?;
    let tau = f.tau();
    let pp = p as u128;
    if pp <= 2 * tau {
        return Err(Error::domain(format!("{p} does not exceed 2 tau({n}) = {}", 2 * tau)));
    }
    let parts = [
        Descriptor::Progression { start, step, len: tau },
        Descriptor::Progression {
            start: start + tau * step,
            step,
            len: tau,
        },
    ];
    for (c, s) in halves.iter().zip(&parts) {
        expect_matching(c, n, s)?;
    }
    let free = |d: &Descriptor| d.members(MATCH_LIMIT).map(|m| m.iter().all(|&x| x % pp != 0));
    let h = if free(&parts[0])? { 0 } else { 1 };
    if !free(&parts[h])? {
        return Err(Error::Invariant("both halves contain a multiple of p".into()));
    }
    let mut pairs: Vec<(u128, u128)> = halves[h].pairs.iter().map(|&(d, t)| (pp * d, t)).collect();
    pairs.extend(halves[1 - h].pairs.iter().copied());
    pairs.sort_unstable();
    let out = MatchingCertificate {
        domain: Descriptor::Divisors { n: pp * n },
        codomain: Descriptor::Progression {
            start,
            step,
            len: 2 * tau,
        },
        pairs,
    };
    out.validate()?;
    Ok(out)
}

/// [`prime_boost`] with the half matchings computed directly.
pub fn prime_boost_from(n: u128, p: u64, start: u128, step: u128) -> Result<MatchingCertificate> {
    let f = factorize(n)?;
    check_coprime_ap(start, step)?;
    let tau = f.tau();
    let a = matching_or_precondition(&f, Descriptor::Progression { start, step, len: tau })?;
    let b = matching_or_precondition(
        &f,
        Descriptor::Progression {
            start: start + tau * step,
            step,
            len: tau,
        },
    )?;
    prime_boost(n, p, start, step, [&a, &b])
}
