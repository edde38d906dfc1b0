use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::flow::{max_flow, ClassGraph};
use super::transforms::{default_j, match_via_partition};
use super::{Descriptor, HallWitness, MatchOutcome, MatchingCertificate, Prop21Proof, Side, MATCH_LIMIT};
use crate::arith::{classify, divisors, factorize, is_prime_u64, FactoredInteger};
use crate::error::{Error, Result};
use crate::json::wide;

/// Hall witnesses up to this many gcd evaluations are re-validated before
/// being returned.
const HALL_CHECK_LIMIT: u128 = 1 << 28;

/// Finds a perfect coprime matching between `left` and `right`, or a Hall
/// witness on the left side when none exists.
pub fn coprime_matching(left: &[u128], right: &[u128]) -> Result<MatchOutcome> {
    coprime_matching_with_limit(left, right, MATCH_LIMIT)
}

pub fn coprime_matching_with_limit(left: &[u128], right: &[u128], limit: usize) -> Result<MatchOutcome> {
    check_sizes(left.len(), right.len(), limit)?;
    let mut distinct = left.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let mut primes: Vec<u64> = Vec::new();
    for &x in &distinct {
        if x == 0 {
            return Err(Error::domain("matching vertices must be positive"));
        }
        primes.extend(factorize(x)?.primes());
    }
    if right.contains(&0) {
        return Err(Error::domain("matching vertices must be positive"));
    }
    primes.sort_unstable();
    primes.dedup();
    solve(
        Descriptor::Values { values: left.to_vec() },
        Descriptor::Values { values: right.to_vec() },
        left,
        right,
        &primes,
    )
}

/// Matches `D(n)` to the members of `codomain`.
pub fn match_divisors(n: &FactoredInteger, codomain: Descriptor, limit: usize) -> Result<MatchOutcome> {
    let tau = n.tau();
    if tau > limit as u128 {
        return Err(Error::capacity("tau(n)", tau, limit as u128));
    }
    let left = divisors(n, limit)?;
    let right = codomain.members(limit)?;
    check_sizes(left.len(), right.len(), limit)?;
    let primes: Vec<u64> = n.primes().collect();
    solve(Descriptor::Divisors { n: n.value() }, codomain, &left, &right, &primes)
}

fn check_sizes(l: usize, r: usize, limit: usize) -> Result<()> {
    if l != r {
        return Err(Error::domain(format!("sides have sizes {l} and {r}")));
    }
    if l > limit {
        return Err(Error::capacity("matching side size", l as u128, limit as u128));
    }
    Ok(())
}

fn masks(values: &[u128], primes: &[u64]) -> Vec<u128> {
    values
        .iter()
        .map(|&x| {
            primes
                .iter()
                .enumerate()
                .filter(|&(_, &p)| x % p as u128 == 0)
                .fold(0u128, |m, (i, _)| m | 1 << i)
        })
        .collect()
}

struct Classes {
    masks: Vec<u128>,
    members: Vec<Vec<usize>>,
}

fn group(masks: &[u128]) -> Classes {
    let mut index: HashMap<u128, usize> = HashMap::new();
    let mut out = Classes {
        masks: Vec::new(),
        members: Vec::new(),
    };
    for (i, &m) in masks.iter().enumerate() {
        let c = *index.entry(m).or_insert_with(|| {
            out.masks.push(m);
            out.members.push(Vec::new());
            out.masks.len() - 1
        });
        out.members[c].push(i);
    }
    out
}

/// `primes` must contain every prime factor of every left value.
fn solve(
    domain: Descriptor,
    codomain: Descriptor,
    left: &[u128],
    right: &[u128],
    primes: &[u64],
) -> Result<MatchOutcome> {
    let relevant: Vec<u64> = primes
        .iter()
        .copied()
        .filter(|&p| right.iter().any(|&y| y % p as u128 == 0))
        .collect();
    if relevant.len() > 128 {
        return Err(Error::capacity(
            "distinct shared primes",
            relevant.len() as u128,
            128u128,
        ));
    }
    let lc = group(&masks(left, &relevant));
    let rc = group(&masks(right, &relevant));
    let graph = ClassGraph {
        left_masks: lc.masks.clone(),
        left_cap: lc.members.iter().map(|m| m.len() as u64).collect(),
        right_masks: rc.masks.clone(),
        right_cap: rc.members.iter().map(|m| m.len() as u64).collect(),
    };
    let flow = max_flow(&graph);
    if flow.value as usize == left.len() {
        let mut lcur = vec![0usize; lc.masks.len()];
        let mut rcur = vec![0usize; rc.masks.len()];
        let mut pairs = Vec::with_capacity(left.len());
        for &(l, r, f) in &flow.flows {
            for _ in 0..f {
                let a = left[lc.members[l][lcur[l]]];
                let b = right[rc.members[r][rcur[r]]];
                lcur[l] += 1;
                rcur[r] += 1;
                pairs.push((a, b));
            }
        }
        pairs.sort_unstable();
        let cert = MatchingCertificate {
            domain,
            codomain,
            pairs,
        };
        cert.validate()
            .map_err(|e| Error::Invariant(format!("constructed matching failed validation: {e}")))?;
        return Ok(MatchOutcome::Matching(cert));
    }
    let pick = |classes: &Classes, reach: &[bool], values: &[u128]| {
        let mut v: Vec<u128> = classes
            .members
            .iter()
            .zip(reach)
            .filter(|(_, &r)| r)
            .flat_map(|(m, _)| m.iter().map(|&i| values[i]))
            .collect();
        v.sort_unstable();
        v
    };
    let set = pick(&lc, &flow.reach_left, left);
    let neighborhood = pick(&rc, &flow.reach_right, right);
    let w = HallWitness {
        domain,
        codomain,
        side: Side::Domain,
        neighborhood_size: neighborhood.len() as u128,
        set,
        neighborhood,
    };
    if (w.set.len() as u128) * (right.len() as u128) <= HALL_CHECK_LIMIT {
        w.validate()
            .map_err(|e| Error::Invariant(format!("constructed Hall witness failed validation: {e}")))?;
    }
    Ok(MatchOutcome::Hall(w))
}

/// Proposition 2.1: if `p^k || n` with `k >= p` and `tau(n) > r (p + 1)`,
/// `r = tau(n) mod p`, then `n` is not matchable.
pub fn quick_nonmatchable(n: &FactoredInteger) -> Option<Prop21Proof> {
    let tau = n.tau();
    n.factors().iter().find_map(|&(p, k)| {
        let r = tau % p as u128;
        ((k as u64) >= p && tau > r * (p as u128 + 1)).then_some(Prop21Proof {
            n: n.value(),
            p,
            k,
            tau,
            r,
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Prop21,
    Partition,
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    Matching(MatchingCertificate),
    Hall(HallWitness),
    Prop21(Prop21Proof),
}

impl Evidence {
    pub fn validate(&self) -> Result<()> {
        match self {
            Evidence::Matching(c) => c.validate(),
            Evidence::Hall(w) => w.validate(),
            Evidence::Prop21(p) => p.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    #[serde(with = "wide")]
    pub n: u128,
    pub matchable: bool,
    pub route: Route,
    pub evidence: Evidence,
}

impl Decision {
    /// Checks the evidence and that it is evidence about `n` supporting the
    /// stated verdict.
    pub fn validate(&self) -> Result<()> {
        self.evidence.validate()?;
        let f = factorize(self.n)?;
        let domain = Descriptor::Divisors { n: self.n };
        let target = Descriptor::interval(f.tau());
        let consistent = match (&self.evidence, self.matchable) {
            (Evidence::Matching(c), true) => c.domain == domain && c.codomain == target,
            (Evidence::Hall(w), false) => w.domain == domain && w.codomain == target,
            (Evidence::Prop21(p), false) => p.n == self.n,
            _ => false,
        };
        if !consistent {
            return Err(Error::validation(format!(
                "evidence does not support \"{}\" for {}",
                if self.matchable { "matchable" } else { "not matchable" },
                self.n
            )));
        }
        Ok(())
    }
}

pub fn is_matchable(n: u128) -> Result<Decision> {
    is_matchable_with_limit(n, MATCH_LIMIT)
}

/// Prop 2.1, then the partition construction when its hypotheses hold, then
/// an exhaustive matching search.
pub fn is_matchable_with_limit(n: u128, limit: usize) -> Result<Decision> {
    let f = factorize(n)?;
    if let Some(proof) = quick_nonmatchable(&f) {
        return Ok(Decision {
            n,
            matchable: false,
            route: Route::Prop21,
            evidence: Evidence::Prop21(proof),
        });
    }
    if f.tau() > limit as u128 {
        return Err(Error::capacity("tau(n)", f.tau(), limit as u128));
    }
    if classify(&f).is_m_number {
        if let Some(j) = default_j(&f).filter(|&j| j > 0) {
            if let Ok(MatchOutcome::Matching(cert)) = match_via_partition(n, Some(j)) {
                return Ok(Decision {
                    n,
                    matchable: true,
                    route: Route::Partition,
                    evidence: Evidence::Matching(cert),
                });
            }
        }
    }
    let (matchable, evidence) = match match_divisors(&f, Descriptor::interval(f.tau()), limit)? {
        MatchOutcome::Matching(c) => (true, Evidence::Matching(c)),
        MatchOutcome::Hall(w) => (false, Evidence::Hall(w)),
    };
    Ok(Decision {
        n,
        matchable,
        route: Route::Exhaustive,
        evidence,
    })
}

/// The map `j -> prod_{q <= p} q^(j mod q)` matching `[1, tau(M_p)]` to
/// `D(M_p)`, `M_p = prod_{q <= p} q^(q-1)`.
pub fn mp_matching(p: u64) -> Result<MatchingCertificate> {
    if !is_prime_u64(p) {
        return Err(Error::domain(format!("{p} is not prime")));
    }
    let primes: Vec<u64> = (2..=p).filter(|&q| is_prime_u64(q)).collect();
    let tau: u128 = primes.iter().map(|&q| q as u128).product();
    if tau > MATCH_LIMIT as u128 {
        return Err(Error::capacity("tau(M_p)", tau, MATCH_LIMIT as u128));
    }
    let m = FactoredInteger::from_factors(primes.iter().map(|&q| (q, q as u32 - 1)))
        .map_err(|_| Error::capacity("bits of M_p", 129u128, 128u128))?;
    let pairs = (1..=tau)
        .map(|j| {
            let d = primes
                .iter()
                .map(|&q| (q as u128).pow((j % q as u128) as u32))
                .product::<u128>();
            (d, j)
        })
        .collect();
    let cert = MatchingCertificate {
        domain: Descriptor::Divisors { n: m.value() },
        codomain: Descriptor::interval(tau),
        pairs,
    };
    cert.validate()?;
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<(u128, u128)>) -> Vec<(u128, u128)> {
        v.sort_unstable();
        v
    }

    #[test]
    fn small_instances() {
        let out = coprime_matching(&[1, 2, 4, 8], &[1, 2, 3, 4]).unwrap();
        match out {
            MatchOutcome::Hall(w) => {
                assert_eq!(w.set, vec![2, 4, 8]);
                assert_eq!(w.neighborhood, vec![1, 3]);
                w.validate().unwrap();
            }
            other => panic!("expected a Hall witness, got {other:?}"),
        }
        let one = coprime_matching(&[1], &[1]).unwrap().matching().unwrap();
        assert_eq!(one.pairs, vec![(1, 1)]);
        let six = coprime_matching(&[1, 2, 3, 6], &[1, 2, 3, 4])
            .unwrap()
            .matching()
            .unwrap();
        six.validate().unwrap();
        assert!(matches!(coprime_matching(&[1, 2], &[1]), Err(Error::Domain(_))));
        assert!(matches!(
            coprime_matching_with_limit(&[1, 2], &[1, 3], 1),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn quick_test() {
        let p = quick_nonmatchable(&factorize(8).unwrap()).unwrap();
        assert_eq!((p.p, p.k, p.tau, p.r), (2, 3, 4, 0));
        let p = quick_nonmatchable(&factorize(420).unwrap()).unwrap();
        assert_eq!((p.p, p.tau), (2, 24));
        assert!(p.by_corollary());
        assert!(quick_nonmatchable(&factorize(81).unwrap()).is_none());
        assert!(quick_nonmatchable(&factorize(4).unwrap()).is_none());
    }

    #[test]
    fn pipeline_examples() {
        for n in 1..=7 {
            assert!(is_matchable(n).unwrap().matchable, "{n}");
        }
        let d = is_matchable(8).unwrap();
        assert!(!d.matchable);
        assert_eq!(d.route, Route::Prop21);
        assert!(is_matchable(135).unwrap().matchable);
        assert!(is_matchable(81).unwrap().matchable);
        let d = is_matchable(2 * 3 * 5 * 7 * 11 * 13).unwrap();
        assert!(d.matchable);
        assert_eq!(d.route, Route::Partition);
        d.evidence.validate().unwrap();
    }

    #[test]
    fn crt_map() {
        assert_eq!(sorted(mp_matching(2).unwrap().pairs), vec![(1, 2), (2, 1)]);
        let c = mp_matching(3).unwrap();
        let want = [(1, 6), (2, 9), (3, 2), (4, 3), (5, 18), (6, 1)];
        for (j, d) in want {
            assert_eq!(c.pairs.iter().find(|p| p.1 == j).unwrap().0, d);
        }
        let c = mp_matching(5).unwrap();
        assert_eq!(c.pairs.iter().find(|p| p.1 == 30).unwrap().0, 1);
        mp_matching(13).unwrap();
        assert!(matches!(mp_matching(17), Err(Error::Capacity { .. })));
        assert!(matches!(mp_matching(4), Err(Error::Domain(_))));
    }
}
