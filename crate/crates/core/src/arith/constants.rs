use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::interval::{self, truncate_decimal, Interval};
use super::primes::{small_primes, PrimeTable};
use crate::error::{Error, Result};

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn pow10_inv(k: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(10u32).pow(k))
}

/// Certified enclosure of the density `prod_p (1 - p^-p)` of M-numbers.
#[derive(Debug, Clone)]
pub struct AlphaApprox {
    /// Largest prime included in the partial product.
    pub truncation_prime: u64,
    /// The partial product over `p <= truncation_prime` (an upper bound).
    pub partial: BigRational,
    /// Bound on `sum_{p > P} p^-p`, namely `2 P^-P`.
    pub tail_bound: BigRational,
    pub lower: BigRational,
    pub upper: BigRational,
}

impl AlphaApprox {
    /// The decimal truncation to `digits` places if the enclosure pins it down.
    pub fn digits(&self, digits: u32) -> Option<String> {
        let a = truncate_decimal(&self.lower, digits);
        let b = truncate_decimal(&self.upper, digits);
        (a == b).then_some(a)
    }
}

/// Exact partial product `prod_{p <= bound} (1 - p^-p)`.
pub fn alpha_partial(bound: u64) -> BigRational {
    let mut acc = BigRational::one();
    for &p in small_primes().iter().take_while(|&&p| p <= bound) {
        let pp = BigInt::from(p).pow(p as u32);
        acc *= BigRational::new(&pp - 1, pp);
    }
    acc
}

/// Approximates alpha within `eps`. The truncation prime `P` is the least one
/// whose tail bound `2 P^-P` is at most `eps`; since
/// `1 - sum x_i <= prod (1 - x_i)`, the true value lies in
/// `[partial * (1 - tail), partial]`.
pub fn alpha(eps: &BigRational) -> Result<AlphaApprox> {
    if *eps < pow10_inv(30) {
        return Err(Error::Range("alpha tolerance must be at least 1e-30".into()));
    }
    alpha_unchecked(eps)
}

fn alpha_unchecked(eps: &BigRational) -> Result<AlphaApprox> {
    if *eps <= BigRational::zero() {
        return Err(Error::Range("alpha tolerance must be positive".into()));
    }
    let mut chosen = None;
    for &p in small_primes() {
        let tail = BigRational::new(BigInt::from(2), BigInt::from(p).pow(p as u32));
        if &tail <= eps {
            chosen = Some((p, tail));
            break;
        }
    }
    let (p, tail_bound) = chosen.ok_or_else(|| Error::Range("tolerance too small".into()))?;
    let partial = alpha_partial(p);
    let lower = &partial * (BigRational::one() - &tail_bound);
    Ok(AlphaApprox {
        truncation_prime: p,
        upper: partial.clone(),
        partial,
        tail_bound,
        lower,
    })
}

/// Alpha truncated to `digits` decimals, tightening the tolerance until the
/// enclosure determines every printed digit.
pub fn alpha_digits(digits: u32) -> Result<(String, AlphaApprox)> {
    if digits > 60 {
        return Err(Error::Range("at most 60 digits of alpha are supported".into()));
    }
    let mut k = digits + 2;
    loop {
        let approx = alpha_unchecked(&pow10_inv(k))?;
        if let Some(s) = approx.digits(digits) {
            return Ok((s, approx));
        }
        k += 4;
    }
}

/// Exact `sum_{i=a}^{b} 1/P_i` (one-based prime indices).
pub fn reciprocal_prime_sum(a: usize, b: usize) -> Result<BigRational> {
    if a == 0 || b < a {
        return Ok(BigRational::zero());
    }
    let table = PrimeTable::first(b)?;
    let mut acc = BigRational::zero();
    for i in a..=b {
        acc += BigRational::new(BigInt::one(), BigInt::from(table.nth(i).unwrap()));
    }
    Ok(acc)
}

/// Constants behind the lower density bound for strongly matchable numbers.
#[derive(Debug, Clone)]
pub struct StrongDensity {
    /// `(6/pi^2) prod_{p<=7} (1-1/p)(1-1/p^2)^-1`, density of squarefree numbers free of primes below 8.
    pub density_t: Interval,
    /// `sum_{j>=4} (log j - 1.17619)^j / j!`, including a certified truncation remainder.
    pub tail: Interval,
    /// `density_t - tail`, using the lower end of the first and the upper end of the second.
    pub lower_t_prime: BigRational,
    /// `prod_{p in {2,3,5,7}} (1 + p^(1-p))`.
    pub boost_factor: BigRational,
    /// `lower_t_prime * boost_factor`.
    ///
    /// The boost factor is a reconstruction: multiplying members of `T'` by
    /// any sub-product of `p^(p-1)`, `p <= 7`, keeps strong matchability, and
    /// those scaled copies are disjoint with relative density `p^(1-p)` each.
    pub boosted: BigRational,
    /// Index after which the tail series was bounded geometrically.
    pub tail_terms: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct StrongDensityReport {
    pub density_t: String,
    pub tail_upper: String,
    pub lower_t_prime: String,
    pub boosted: String,
}

impl StrongDensity {
    pub fn report(&self, digits: u32) -> StrongDensityReport {
        // upper bounds print rounded up
        let up = |r: &BigRational| {
            let s = BigRational::from_integer(BigInt::from(10u32).pow(digits));
            let c = (r * &s).ceil() / s;
            truncate_decimal(&c, digits)
        };
        StrongDensityReport {
            density_t: truncate_decimal(&self.density_t.lower_rational(), digits),
            tail_upper: up(&self.tail.upper_rational()),
            lower_t_prime: truncate_decimal(&self.lower_t_prime, digits),
            boosted: truncate_decimal(&self.boosted, digits),
        }
    }
}

const LOG_SHIFT_NUM: i64 = 117_619;
const LOG_SHIFT_DEN: i64 = 100_000;

pub fn strong_density_bound() -> StrongDensity {
    let pi = interval::pi();
    let pi2 = pi.mul(&pi);
    // prod p/(p+1) over p <= 7 = 35/96
    let euler = Interval::from_ratio(6 * 35, 96);
    let density_t = euler.div(&pi2);

    // Explicit terms up to J, then term_j <= (e log j / j)^j, which decreases for j >= 3.
    const J: u32 = 60;
    let shift = Interval::from_ratio(LOG_SHIFT_NUM, LOG_SHIFT_DEN);
    let mut sum = Interval::exact_int(0);
    let mut factorial = BigInt::one();
    for j in 1..=J {
        factorial *= j;
        if j < 4 {
            continue;
        }
        let base = interval::ln(j as u64).sub(&shift);
        let term = base.pow(j).div(&Interval::from_ratio(factorial.clone(), 1));
        sum = sum.add(&term);
    }
    let e_upper = ratio(27_183, 10_000);
    let ln_next = interval::ln((J + 1) as u64).upper_rational();
    let x = e_upper * ln_next / BigRational::from_integer(BigInt::from(J + 1));
    debug_assert!(x < BigRational::one());
    let mut x_pow = BigRational::one();
    for _ in 0..(J + 1) {
        x_pow *= &x;
    }
    let rem = x_pow / (BigRational::one() - &x);
    let rem_iv = Interval::from_rational(&rem);
    let tail = Interval {
        lo: sum.lo.clone(),
        hi: &sum.hi + &rem_iv.hi,
    };

    let lower_t_prime = density_t.lower_rational() - tail.upper_rational();
    let boost_factor = ratio(3, 2) * ratio(10, 9) * ratio(626, 625) * ratio(117_650, 117_649);
    let boosted = &lower_t_prime * &boost_factor;
    StrongDensity {
        density_t,
        tail,
        lower_t_prime,
        boost_factor,
        boosted,
        tail_terms: J,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_examples() {
        let (s, approx) = alpha_digits(14).unwrap();
        assert_eq!(s, "0.72199023441955");
        assert!(approx.tail_bound <= pow10_inv(16));
        assert_eq!(alpha_partial(3), ratio(13, 18));
        let coarse = alpha(&ratio(1, 100)).unwrap();
        assert!(coarse.lower >= ratio(711, 1000) && coarse.upper <= ratio(732, 1000));
        assert!(alpha(&pow10_inv(31)).is_err());
        assert!(alpha(&pow10_inv(30)).is_ok());
    }

    #[test]
    fn alpha_partials_decrease_and_stay_above_bound() {
        let approx = alpha(&pow10_inv(25)).unwrap();
        let mut prev = BigRational::one();
        for &p in small_primes().iter().take(12) {
            let cur = alpha_partial(p);
            assert!(cur < prev);
            assert!(cur >= approx.lower);
            prev = cur;
        }
    }

    #[test]
    fn reciprocal_sums() {
        assert_eq!(reciprocal_prime_sum(1, 1).unwrap(), ratio(1, 2));
        assert_eq!(reciprocal_prime_sum(2, 2).unwrap(), ratio(1, 3));
        assert!(reciprocal_prime_sum(5, 49).unwrap() < ratio(93, 100));
    }

    #[test]
    fn strong_density_constants() {
        let sd = strong_density_bound();
        let rep = sd.report(6);
        assert_eq!(rep.density_t, "0.221640");
        assert_eq!(truncate_decimal(&sd.density_t.upper_rational(), 6), "0.221640");
        assert!(sd.boosted >= ratio(3694, 10_000));
        // the enclosure is tight to far beyond the printed digits
        assert!(&sd.tail.hi - &sd.tail.lo < BigInt::from(10u32).pow(40));
        // 0.2213 * (3/2)(10/9)(626/625)(1 + 7^-6) is about 0.36943
        let oracle = ratio(2213, 10_000) * &sd.boost_factor;
        let diff = oracle - ratio(36943, 100_000);
        let eps = ratio(1, 100_000);
        assert!(diff < eps && -diff < eps);
    }
}
