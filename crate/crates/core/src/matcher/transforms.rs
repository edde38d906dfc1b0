use rayon::prelude::*;

use super::pipeline::match_divisors;
use super::{Descriptor, MatchOutcome, MatchingCertificate, MATCH_LIMIT};
use crate::apcomb::MATERIALIZE_LIMIT;
use crate::arith::{classify, factorize, FactoredInteger};
use crate::error::{Error, Result};
use crate::partition::{build_m_partition, build_partition, MParameters, PartitionCertificate};

fn members_sorted(d: &Descriptor) -> Result<Vec<u128>> {
    let mut v = d.members(MATCH_LIMIT)?;
    v.sort_unstable();
    Ok(v)
}

fn divisor_domain(c: &MatchingCertificate) -> Result<u128> {
    match c.domain {
        Descriptor::Divisors { n } => Ok(n),
        _ => Err(Error::validation("certificate domain is not a divisor set")),
    }
}

fn revalidate(c: &MatchingCertificate) -> Result<()> {
    c.validate().map_err(|e| match e {
        Error::Validation(_) => e,
        other => Error::validation(other.to_string()),
    })
}

/// From a matching of `D(2n)` to `[1, 2 tau(n)]` with `n` odd, a matching of
/// `D(n)` to `[1, tau(n)]`: odd divisors land on even targets, which are halved.
pub fn halve_matching(cert: &MatchingCertificate) -> Result<MatchingCertificate> {
    revalidate(cert)?;
    let m = divisor_domain(cert)?;
    if m % 4 != 2 {
        return Err(Error::validation(format!("{m} is not twice an odd number")));
    }
    let tau = factorize(m)?.tau();
    if members_sorted(&cert.codomain)? != (1..=tau).collect::<Vec<_>>() {
        return Err(Error::validation(format!("codomain is not [1, {tau}]")));
    }
    let n = m / 2;
    let mut pairs = Vec::with_capacity(tau as usize / 2);
    for &(d, t) in cert.pairs.iter().filter(|p| p.0 % 2 == 1) {
        if t % 2 != 0 {
            return Err(Error::Invariant(format!("odd divisor {d} is matched to odd {t}")));
        }
        pairs.push((d, t / 2));
    }
    pairs.sort_unstable();
    let out = MatchingCertificate {
        domain: Descriptor::Divisors { n },
        codomain: Descriptor::interval(tau / 2),
        pairs,
    };
    out.validate()?;
    Ok(out)
}

/// Combines a matching of `D(u')` to the odd numbers in `[1, 2 tau(u')]` and
/// one of `D(u')` to `[1, tau(u')]` into a matching of `D(2u')` to
/// `[1, 2 tau(u')]`: `2d` takes the odd target of `d`, `d` takes twice its
/// interval target.
pub fn compose_even_odd(odd: &MatchingCertificate, interval: &MatchingCertificate) -> Result<MatchingCertificate> {
    revalidate(odd)?;
    revalidate(interval)?;
    let u = divisor_domain(odd)?;
    if divisor_domain(interval)? != u {
        return Err(Error::validation("the two certificates have different domains"));
    }
    if u % 2 == 0 {
        return Err(Error::validation(format!("{u} is even")));
    }
    let tau = factorize(u)?.tau();
    if members_sorted(&odd.codomain)? != (0..tau).map(|i| 2 * i + 1).collect::<Vec<_>>() {
        return Err(Error::validation(format!(
            "first codomain is not the odd numbers below {}",
            2 * tau
        )));
    }
    if members_sorted(&interval.codomain)? != (1..=tau).collect::<Vec<_>>() {
        return Err(Error::validation(format!("second codomain is not [1, {tau}]")));
    }
    let mut pairs: Vec<(u128, u128)> = odd.pairs.iter().map(|&(d, t)| (2 * d, t)).collect();
    pairs.extend(interval.pairs.iter().map(|&(d, a)| (d, 2 * a)));
    pairs.sort_unstable();
    let out = MatchingCertificate {
        domain: Descriptor::Divisors { n: 2 * u },
        codomain: Descriptor::interval(2 * tau),
        pairs,
    };
    out.validate()?;
    Ok(out)
}

/// Which partition construction applies to `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionRoute {
    /// Squarefree `n`; odd `n` are handled through `2n`.
    Squarefree,
    MNumber,
}

impl PartitionRoute {
    pub fn of(n: &FactoredInteger) -> Result<Self> {
        if !classify(n).is_m_number {
            return Err(Error::domain(format!("{n} is not an M-number")));
        }
        Ok(if n.is_squarefree() {
            PartitionRoute::Squarefree
        } else {
            PartitionRoute::MNumber
        })
    }
}

/// The largest admissible `j`, capped at the integer square root of the
/// number of prime factors; `None` for non-M-numbers.
pub fn default_j(n: &FactoredInteger) -> Option<usize> {
    let route = PartitionRoute::of(n).ok()?;
    match route {
        PartitionRoute::Squarefree => {
            let ell = n.omega() + usize::from(!n.is_even());
            Some((ell / 2).min(ell.isqrt()))
        }
        PartitionRoute::MNumber => {
            let cap = n.omega().isqrt();
            (0..=cap)
                .rev()
                .find(|&j| MParameters::new(n, j).map(|p| p.hypothesis_holds(j)).unwrap_or(false))
        }
    }
}

/// Builds the partition of `[1, tau(n)]` used by [`match_via_partition`] and
/// the cofactor whose divisors are matched into each block.
pub fn partition_for(n: &FactoredInteger, j: usize) -> Result<(PartitionCertificate, FactoredInteger)> {
    match PartitionRoute::of(n)? {
        PartitionRoute::Squarefree => {
            if !n.is_even() {
                return Err(Error::domain(format!("{n} is odd; partition 2n instead")));
            }
            if 2 * j > n.omega() {
                return Err(Error::domain(format!("j = {j} exceeds omega(n)/2")));
            }
            let primes: Vec<u64> = n.primes().take(j).collect();
            let part = build_partition(&primes, 1, n.tau() as i128)?;
            let rest = n.part(|p, _| !primes.contains(&p));
            Ok((part, rest))
        }
        PartitionRoute::MNumber => {
            let params = MParameters::new(n, j)?;
            Ok((build_m_partition(n, j, 1)?, params.n_prime))
        }
    }
}

/// Matches `D(n)` to `[1, tau(n)]` by partitioning the interval into blocks
/// `A_v` coprime to `v` and matching `D(n')` into each block; `v e` maps to
/// the image of `e` in `A_v`. A block without a matching yields its Hall witness.
pub fn match_via_partition(n: u128, j: Option<usize>) -> Result<MatchOutcome> {
    let f = factorize(n)?;
    let route = PartitionRoute::of(&f)?;
    let j = match j {
        Some(j) => j,
        None => default_j(&f).unwrap_or(0),
    };
    if route == PartitionRoute::Squarefree && !f.is_even() {
        return match match_via_partition(2 * n, Some(j))? {
            MatchOutcome::Matching(c) => Ok(MatchOutcome::Matching(halve_matching(&c)?)),
            hall => Ok(hall),
        };
    }
    let (part, rest) = partition_for(&f, j)?;
    let blocks: Vec<Result<(u128, MatchOutcome)>> = part
        .blocks
        .par_iter()
        .map(|b| {
            let elems = b
                .set
                .elements(MATERIALIZE_LIMIT)
                .ok_or_else(|| Error::capacity("block size", b.set.len() as u128, MATERIALIZE_LIMIT))?;
            let values = elems.into_iter().map(|x| x as u128).collect();
            Ok((
                b.index,
                match_divisors(&rest, Descriptor::Values { values }, MATCH_LIMIT)?,
            ))
        })
        .collect();
    let mut pairs = Vec::with_capacity(f.tau() as usize);
    for b in blocks {
        let (v, outcome) = b?;
        match outcome {
            MatchOutcome::Matching(c) => pairs.extend(c.pairs.iter().map(|&(e, t)| (v * e, t))),
            hall => return Ok(hall),
        }
    }
    pairs.sort_unstable();
    let cert = MatchingCertificate {
        domain: Descriptor::Divisors { n },
        codomain: Descriptor::interval(f.tau()),
        pairs,
    };
    cert.validate()
        .map_err(|e| Error::Invariant(format!("assembled matching failed validation: {e}")))?;
    Ok(MatchOutcome::Matching(cert))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cert(n: u128, codomain: Descriptor, pairs: &[(u128, u128)]) -> MatchingCertificate {
        MatchingCertificate {
            domain: Descriptor::Divisors { n },
            codomain,
            pairs: pairs.to_vec(),
        }
    }

    #[test]
    fn halving() {
        let six = cert(6, Descriptor::interval(4), &[(2, 3), (6, 1), (3, 2), (1, 4)]);
        assert_eq!(halve_matching(&six).unwrap().pairs, vec![(1, 2), (3, 1)]);
        let two = cert(2, Descriptor::interval(2), &[(1, 2), (2, 1)]);
        assert_eq!(halve_matching(&two).unwrap().pairs, vec![(1, 1)]);
        let bad = cert(6, Descriptor::interval(4), &[(2, 2), (6, 1), (3, 3), (1, 4)]);
        assert!(matches!(halve_matching(&bad), Err(Error::Validation(_))));
        let four = cert(4, Descriptor::interval(3), &[(1, 2), (2, 1), (4, 3)]);
        assert!(halve_matching(&four).is_err());
    }

    #[test]
    fn composition() {
        let odd = cert(
            3,
            Descriptor::Progression {
                start: 1,
                step: 2,
                len: 2,
            },
            &[(1, 3), (3, 1)],
        );
        let int = cert(3, Descriptor::interval(2), &[(1, 1), (3, 2)]);
        let six = compose_even_odd(&odd, &int).unwrap();
        assert_eq!(six.pairs, vec![(1, 2), (2, 3), (3, 4), (6, 1)]);
        let odd = cert(
            1,
            Descriptor::Progression {
                start: 1,
                step: 2,
                len: 1,
            },
            &[(1, 1)],
        );
        let int = cert(1, Descriptor::interval(1), &[(1, 1)]);
        assert_eq!(compose_even_odd(&odd, &int).unwrap().pairs, vec![(1, 2), (2, 1)]);
    }

    #[test]
    fn partition_route() {
        let out = match_via_partition(18, Some(0)).unwrap().matching().unwrap();
        assert_eq!(out.pairs, vec![(1, 6), (2, 3), (3, 4), (6, 1), (9, 2), (18, 5)]);
        let n = 2 * 3 * 5 * 7 * 11 * 13;
        let out = match_via_partition(n, Some(2)).unwrap().matching().unwrap();
        assert_eq!(out.pairs.len(), 64);
        assert!(matches!(match_via_partition(4, None), Err(Error::Domain(_))));
        let odd = match_via_partition(3 * 5 * 7 * 11 * 13, None)
            .unwrap()
            .matching()
            .unwrap();
        assert_eq!(odd.pairs.len(), 32);
        let m = match_via_partition(2 * 9 * 5 * 7 * 11 * 13 * 17, None).unwrap();
        m.validate().unwrap();
    }

    #[test]
    fn default_j_values() {
        let f = factorize(2 * 3 * 5 * 7 * 11 * 13).unwrap();
        assert_eq!(default_j(&f), Some(2));
        assert_eq!(default_j(&factorize(8).unwrap()), None);
        assert_eq!(default_j(&factorize(18).unwrap()), Some(0));
    }
}
