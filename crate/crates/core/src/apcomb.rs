//! Sets of integers built from arithmetic progressions by disjoint unions and
//! subset differences, tracking the construction size `k`.
//!
//! A set is stored as a signed list of progressions whose indicator functions
//! sum to the set's indicator. The number of elements divisible by `d` then
//! differs from `|S|/d` by at most `k` whenever every step is prime to `d`.

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::wide_signed;

/// Above this many progression elements, validation switches from explicit
/// enumeration to pairwise progression arithmetic.
pub const MATERIALIZE_LIMIT: u128 = 1_000_000;

/// One signed progression `start, start + step, ..., start + (len-1) step`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Term {
    /// `1` or `-1`.
    pub sign: i8,
    #[serde(with = "wide_signed")]
    pub start: i128,
    #[serde(with = "wide_signed")]
    pub step: i128,
    #[serde(with = "wide_signed")]
    pub len: i128,
}

impl Term {
    fn last(&self) -> i128 {
        self.start + (self.len - 1) * self.step
    }

    pub fn contains(&self, x: i128) -> bool {
        if self.len <= 0 || x < self.start || x > self.last() {
            return false;
        }
        (x - self.start) % self.step == 0
    }

    /// Number of indices `i < len` with `m | start + i step`.
    fn count_divisible(&self, m: i128) -> i128 {
        match solve_index(self.start, self.step, m) {
            None => 0,
            Some((i0, period)) => count_residue(self.len, i0, period),
        }
    }

    fn elements(&self) -> impl Iterator<Item = i128> + '_ {
        (0..self.len.max(0)).map(move |i| self.start + i * self.step)
    }
}

/// `#{0 <= i < len : i = i0 mod period}` for `0 <= i0 < period`.
fn count_residue(len: i128, i0: i128, period: i128) -> i128 {
    if len <= i0 {
        0
    } else {
        (len - 1 - i0) / period + 1
    }
}

/// Solves `start + i step = 0 mod m` for `i`: the least solution and its period.
fn solve_index(start: i128, step: i128, m: i128) -> Option<(i128, i128)> {
    let g = step.gcd(&m);
    if start.rem_euclid(g) != 0 {
        return None;
    }
    let period = m / g;
    if period == 1 {
        return Some((0, 1));
    }
    let a = (step / g).rem_euclid(period);
    let b = (-start / g).rem_euclid(period);
    let inv = mod_inverse(a, period)?;
    Some((mul_mod(b, inv, period), period))
}

fn mul_mod(a: i128, b: i128, m: i128) -> i128 {
    // operands are below m < 2^63, so the product fits
    (a * b).rem_euclid(m)
}

fn mod_inverse(a: i128, m: i128) -> Option<i128> {
    let e = a.extended_gcd(&m);
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m))
}

/// `|P ∩ Q|` for two progressions.
fn pair_intersection(a: &Term, b: &Term) -> i128 {
    match pair_intersection_first(a, b) {
        None => 0,
        Some((x0, lcm, hi)) => (hi - x0) / lcm + 1,
    }
}

/// Least common element, the common period and the upper limit.
fn pair_intersection_first(a: &Term, b: &Term) -> Option<(i128, i128, i128)> {
    if a.len <= 0 || b.len <= 0 {
        return None;
    }
    let lo = a.start.max(b.start);
    let hi = a.last().min(b.last());
    if lo > hi {
        return None;
    }
    let g = a.step.gcd(&b.step);
    let diff = b.start - a.start;
    if diff.rem_euclid(g) != 0 {
        return None;
    }
    let qb = b.step / g;
    let lcm = a.step * qb;
    let t = if qb == 1 {
        0
    } else {
        let inv = mod_inverse((a.step / g).rem_euclid(qb), qb)?;
        mul_mod((diff / g).rem_euclid(qb), inv, qb)
    };
    let x = a.start + a.step * t; // common element, may lie below lo
    let mut x0 = x + Integer::div_floor(&(lo - x), &lcm) * lcm;
    if x0 < lo {
        x0 += lcm;
    }
    (x0 <= hi).then_some((x0, lcm, hi))
}

/// Which elements [`APCombination::restrict`] keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Restriction {
    AtMost(i128),
    Above(i128),
    MultipleOf(i128),
}

/// Result of [`APCombination::count_divisible`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisibilityCount {
    pub count: i128,
    /// Every constituent step is prime to `d`.
    pub bound_applies: bool,
    /// `count - |S|/d`.
    pub theta: Ratio<i128>,
}

/// A k-AP combination.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct APCombination {
    pub terms: Vec<Term>,
    pub k: u32,
}

impl APCombination {
    /// A single progression; `step` must be positive.
    pub fn make_ap(start: i128, step: i128, len: i128) -> Result<Self> {
        if step <= 0 {
            return Err(Error::domain(format!("progression step must be positive, got {step}")));
        }
        if len < 0 {
            return Err(Error::domain("progression length must be non-negative"));
        }
        Ok(APCombination {
            terms: vec![Term {
                sign: 1,
                start,
                step,
                len,
            }],
            k: 1,
        })
    }

    /// The interval `[start, start + len - 1]`.
    pub fn interval(start: i128, len: i128) -> Result<Self> {
        Self::make_ap(start, 1, len)
    }

    /// Like [`make_ap`](Self::make_ap) but with `k = 0`; used for reference
    /// sets (such as the ambient interval) that are not built by a construction.
    fn reference(start: i128, len: i128) -> Self {
        APCombination {
            terms: vec![Term {
                sign: 1,
                start,
                step: 1,
                len,
            }],
            k: 0,
        }
    }

    pub fn len(&self) -> i128 {
        self.terms.iter().map(|t| t.sign as i128 * t.len.max(0)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn raw_size(&self) -> u128 {
        self.terms.iter().map(|t| t.len.max(0) as u128).sum()
    }

    pub fn contains(&self, x: i128) -> bool {
        self.terms
            .iter()
            .filter(|t| t.contains(x))
            .map(|t| t.sign as i32)
            .sum::<i32>()
            == 1
    }

    /// Sorted elements; `None` if the raw progression size exceeds `limit`.
    pub fn elements(&self, limit: u128) -> Option<Vec<i128>> {
        if self.raw_size() > limit {
            return None;
        }
        let mut plus: Vec<i128> = Vec::new();
        let mut minus: Vec<i128> = Vec::new();
        for t in &self.terms {
            if t.sign > 0 {
                plus.extend(t.elements());
            } else {
                minus.extend(t.elements());
            }
        }
        plus.sort_unstable();
        minus.sort_unstable();
        let mut out = Vec::with_capacity(plus.len().saturating_sub(minus.len()));
        let mut j = 0;
        for x in plus {
            if j < minus.len() && minus[j] == x {
                j += 1;
            } else {
                out.push(x);
            }
        }
        Some(out)
    }

    /// Exact `|self ∩ other|` by pairwise progression intersection.
    pub fn intersection_size(&self, other: &APCombination) -> i128 {
        let mut acc = 0;
        for a in &self.terms {
            for b in &other.terms {
                acc += (a.sign as i128) * (b.sign as i128) * pair_intersection(a, b);
            }
        }
        acc
    }

    /// Some element of `self ∩ other`, searched among pairs of constituents.
    fn common_element(&self, other: &APCombination) -> Option<i128> {
        if self.raw_size() + other.raw_size() <= MATERIALIZE_LIMIT {
            let a = self.elements(MATERIALIZE_LIMIT)?;
            let b = other.elements(MATERIALIZE_LIMIT)?;
            return a.into_iter().find(|x| b.binary_search(x).is_ok());
        }
        for a in self.terms.iter().filter(|t| t.sign > 0) {
            for b in other.terms.iter().filter(|t| t.sign > 0) {
                if let Some((mut x, lcm, hi)) = pair_intersection_first(a, b) {
                    for _ in 0..64 {
                        if x > hi {
                            break;
                        }
                        if self.contains(x) && other.contains(x) {
                            return Some(x);
                        }
                        x += lcm;
                    }
                }
            }
        }
        None
    }

    /// Some element of `self` not in `other`.
    fn element_outside(&self, other: &APCombination) -> Option<i128> {
        if self.raw_size() + other.raw_size() <= MATERIALIZE_LIMIT {
            let a = self.elements(MATERIALIZE_LIMIT)?;
            return a.into_iter().find(|&x| !other.contains(x));
        }
        for t in self.terms.iter().filter(|t| t.sign > 0) {
            for x in t.elements().take(4096) {
                if self.contains(x) && !other.contains(x) {
                    return Some(x);
                }
            }
        }
        None
    }

    /// Disjoint union; fails with a common element when the sets overlap.
    pub fn union(&self, other: &APCombination) -> Result<Self> {
        if self.intersection_size(other) != 0 {
            return Err(Error::Precondition {
                message: "union of overlapping sets".into(),
                witness: self.common_element(other),
            });
        }
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Ok(APCombination {
            terms,
            k: self.k + other.k,
        })
    }

    /// `self \ other` for `other ⊆ self`; fails with an element of `other`
    /// outside `self` otherwise.
    pub fn difference(&self, other: &APCombination) -> Result<Self> {
        if self.intersection_size(other) != other.len() {
            return Err(Error::Precondition {
                message: "difference with a non-subset".into(),
                witness: other.element_outside(self),
            });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|t| Term { sign: -t.sign, ..*t }));
        Ok(APCombination {
            terms,
            k: self.k + other.k,
        })
    }

    /// Applies `r` to every constituent; `k` is unchanged.
    pub fn restrict(&self, r: Restriction) -> Result<Self> {
        if let Restriction::MultipleOf(m) = r {
            if m <= 0 {
                return Err(Error::domain("modulus must be positive"));
            }
        }
        let terms = self.terms.iter().map(|t| restrict_term(t, r)).collect();
        Ok(APCombination { terms, k: self.k })
    }

    pub fn count_divisible(&self, d: i128) -> Result<DivisibilityCount> {
        if d <= 0 {
            return Err(Error::domain("d must be positive"));
        }
        let count: i128 = self.terms.iter().map(|t| t.sign as i128 * t.count_divisible(d)).sum();
        let bound_applies = self.terms.iter().all(|t| t.step.gcd(&d) == 1);
        let theta = Ratio::from_integer(count) - Ratio::new(self.len(), d);
        if bound_applies && num_traits::Signed::abs(&theta) > Ratio::from_integer(self.k as i128) {
            return Err(Error::Invariant(format!(
                "divisibility count error {theta} exceeds k = {}",
                self.k
            )));
        }
        Ok(DivisibilityCount {
            count,
            bound_applies,
            theta,
        })
    }

    /// Checks that the signed terms describe an honest set: every point has
    /// multiplicity 0 or 1. Exact for materializable sets; for larger ones,
    /// checks that the cardinality is non-negative and the set is contained
    /// in the hull of its positive terms.
    pub fn validate(&self) -> Result<()> {
        if (self.k as usize) < self.terms.len() {
            return Err(Error::validation(format!(
                "k = {} is below the number of constituents {}",
                self.k,
                self.terms.len()
            )));
        }
        if self.terms.iter().any(|t| t.step <= 0 || t.len < 0 || t.sign.abs() != 1) {
            return Err(Error::validation("malformed progression"));
        }
        if self.raw_size() <= MATERIALIZE_LIMIT {
            let mut mult: std::collections::HashMap<i128, i32> = std::collections::HashMap::new();
            for t in &self.terms {
                for x in t.elements() {
                    *mult.entry(x).or_insert(0) += t.sign as i32;
                }
            }
            if let Some((&x, &m)) = mult.iter().find(|(_, &m)| m != 0 && m != 1) {
                return Err(Error::validation(format!("element {x} has multiplicity {m}")));
            }
        } else if self.len() < 0 {
            return Err(Error::validation("negative cardinality"));
        }
        Ok(())
    }

    /// `|self ∩ [start, start + len - 1]|`.
    pub fn count_in_interval(&self, start: i128, len: i128) -> i128 {
        self.intersection_size(&Self::reference(start, len))
    }

    /// Number of elements `<= z`.
    pub fn count_at_most(&self, z: i128) -> i128 {
        self.terms
            .iter()
            .map(|t| t.sign as i128 * restrict_term(t, Restriction::AtMost(z)).len)
            .sum()
    }

    /// Steps of all constituents.
    pub fn steps(&self) -> impl Iterator<Item = i128> + '_ {
        self.terms.iter().map(|t| t.step)
    }
}

fn restrict_term(t: &Term, r: Restriction) -> Term {
    if t.len <= 0 {
        return Term { len: 0, ..*t };
    }
    match r {
        Restriction::AtMost(z) => {
            let n = if z < t.start {
                0
            } else {
                ((z - t.start) / t.step + 1).min(t.len)
            };
            Term { len: n, ..*t }
        }
        Restriction::Above(z) => {
            let n = if z < t.start {
                0
            } else {
                ((z - t.start) / t.step + 1).min(t.len)
            };
            Term {
                start: t.start + n * t.step,
                len: t.len - n,
                ..*t
            }
        }
        Restriction::MultipleOf(m) => match solve_index(t.start, t.step, m) {
            None => Term {
                step: t.step * (m / t.step.gcd(&m)),
                len: 0,
                ..*t
            },
            Some((i0, period)) => Term {
                start: t.start + i0 * t.step,
                step: t.step * period,
                len: count_residue(t.len, i0, period),
                ..*t
            },
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(s: &APCombination) -> Vec<i128> {
        s.elements(MATERIALIZE_LIMIT).unwrap()
    }

    fn explicit(xs: &[i128]) -> APCombination {
        let mut acc = APCombination::make_ap(xs[0], 1, 1).unwrap();
        for &x in &xs[1..] {
            acc = acc.union(&APCombination::make_ap(x, 1, 1).unwrap()).unwrap();
        }
        acc
    }

    #[test]
    fn make_ap_examples() {
        let a = APCombination::make_ap(1, 1, 12).unwrap();
        assert_eq!(set(&a), (1..=12).collect::<Vec<_>>());
        assert_eq!(a.k, 1);
        let odd = APCombination::make_ap(1, 2, 8).unwrap();
        assert_eq!(set(&odd), vec![1, 3, 5, 7, 9, 11, 13, 15]);
        let e = APCombination::make_ap(5, 3, 0).unwrap();
        assert!(e.is_empty());
        assert_eq!(e.k, 1);
        assert!(matches!(APCombination::make_ap(1, 0, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn union_examples() {
        let odd = APCombination::make_ap(1, 2, 5).unwrap();
        let even = APCombination::make_ap(2, 2, 5).unwrap();
        let u = odd.union(&even).unwrap();
        assert_eq!(set(&u), (1..=10).collect::<Vec<_>>());
        assert_eq!(u.k, 2);
        let e = APCombination::make_ap(7, 1, 0).unwrap();
        let v = odd.union(&e).unwrap();
        assert_eq!(set(&v), set(&odd));
        assert_eq!(v.k, 2);
        let a = APCombination::make_ap(1, 3, 3).unwrap();
        let b = APCombination::make_ap(2, 2, 2).unwrap();
        match a.union(&b) {
            Err(Error::Precondition { witness, .. }) => assert_eq!(witness, Some(4)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn difference_examples() {
        let i = APCombination::make_ap(1, 1, 12).unwrap();
        let m3 = APCombination::make_ap(3, 3, 4).unwrap();
        let d = i.difference(&m3).unwrap();
        assert_eq!(set(&d), vec![1, 2, 4, 5, 7, 8, 10, 11]);
        assert_eq!(d.k, 2);
        let e = APCombination::make_ap(0, 1, 0).unwrap();
        let same = i.difference(&e).unwrap();
        assert_eq!(set(&same), set(&i));
        assert_eq!(same.k, 2);
        let six = APCombination::make_ap(1, 1, 6).unwrap();
        let seven = APCombination::make_ap(7, 1, 1).unwrap();
        match six.difference(&seven) {
            Err(Error::Precondition { witness, .. }) => assert_eq!(witness, Some(7)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn count_divisible_examples() {
        let i = APCombination::make_ap(1, 1, 12).unwrap();
        let c = i.count_divisible(3).unwrap();
        assert_eq!(c.count, 4);
        assert_eq!(c.theta, Ratio::from_integer(0));

        let odd = APCombination::make_ap(1, 2, 1 << 24).unwrap();
        let c = odd.count_divisible(7).unwrap();
        // odd multiples of 7 up to 2^25: ceil(floor(2^25/7)/2)
        let direct = ((1i128 << 25) / 7 + 1) / 2;
        assert_eq!(c.count, direct);
        assert!(num_traits::Signed::abs(&c.theta) <= Ratio::from_integer(1));

        let s = APCombination::make_ap(1, 1, 10)
            .unwrap()
            .difference(&APCombination::make_ap(5, 5, 2).unwrap())
            .unwrap();
        let c = s.count_divisible(5).unwrap();
        assert_eq!(c.count, 0);
        assert_eq!(c.theta, Ratio::new(-8, 5));
        assert!(!c.bound_applies);
    }

    #[test]
    fn restrict_examples() {
        let i = APCombination::make_ap(1, 1, 12).unwrap();
        assert_eq!(
            set(&i.restrict(Restriction::AtMost(7)).unwrap()),
            (1..=7).collect::<Vec<_>>()
        );
        let odd = APCombination::make_ap(1, 2, 8).unwrap();
        let m = odd.restrict(Restriction::MultipleOf(3)).unwrap();
        assert_eq!(set(&m), vec![3, 9, 15]);
        assert_eq!(m.k, 1);
        let d = i.difference(&APCombination::make_ap(3, 3, 4).unwrap()).unwrap();
        let r = d.restrict(Restriction::Above(10)).unwrap();
        assert_eq!(set(&r), vec![11]);
        assert_eq!(r.k, 2);
    }

    #[test]
    fn intersection_arithmetic() {
        let a = APCombination::make_ap(1, 6, 100).unwrap();
        let b = APCombination::make_ap(3, 4, 200).unwrap();
        let direct = set(&a).iter().filter(|x| set(&b).contains(x)).count() as i128;
        assert_eq!(a.intersection_size(&b), direct);
        let c = explicit(&[2, 9, 40]);
        assert_eq!(c.len(), 3);
        assert_eq!(c.count_in_interval(3, 10), 1);
        assert_eq!(c.count_at_most(9), 2);
    }

    #[test]
    fn large_sets_use_progression_arithmetic() {
        let big = APCombination::make_ap(1, 1, 1 << 30).unwrap();
        let evens = APCombination::make_ap(2, 2, 1 << 29).unwrap();
        let odds = big.difference(&evens).unwrap();
        assert_eq!(odds.len(), 1 << 29);
        assert!(odds.elements(MATERIALIZE_LIMIT).is_none());
        let err = odds.union(&APCombination::make_ap(3, 6, 1 << 20).unwrap()).unwrap_err();
        match err {
            Error::Precondition { witness: Some(w), .. } => assert!(odds.contains(w)),
            other => panic!("{other:?}"),
        }
        let err = odds
            .difference(&APCombination::make_ap(2, 4, 1 << 25).unwrap())
            .unwrap_err();
        match err {
            Error::Precondition { witness: Some(w), .. } => assert_eq!(w % 2, 0),
            other => panic!("{other:?}"),
        }
    }
}
