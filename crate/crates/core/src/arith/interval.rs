//! Outward-rounded fixed-point intervals over `BigInt`, used for the
//! transcendental constants (pi, logarithms) that feed the density bounds.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Decimal digits carried after the point.
pub const SCALE_DIGITS: u32 = 64;

fn scale() -> BigInt {
    BigInt::from(10u32).pow(SCALE_DIGITS)
}

/// A closed interval `[lo, hi] * 10^-SCALE_DIGITS` containing the true value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigInt,
    pub hi: BigInt,
}

impl Interval {
    pub fn exact_int(v: i64) -> Self {
        let x = BigInt::from(v) * scale();
        Interval { lo: x.clone(), hi: x }
    }

    /// Encloses `num / den` (den > 0).
    pub fn from_ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        let n = num.into() * scale();
        let d = den.into();
        assert!(d.is_positive(), "denominator must be positive");
        let (q, r) = n.div_mod_floor(&d);
        let hi = if r.is_zero() { q.clone() } else { &q + 1 };
        Interval { lo: q, hi }
    }

    pub fn from_rational(r: &BigRational) -> Self {
        Self::from_ratio(r.numer().clone(), r.denom().clone())
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval {
            lo: &self.lo + &o.lo,
            hi: &self.hi + &o.hi,
        }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        Interval {
            lo: &self.lo - &o.hi,
            hi: &self.hi - &o.lo,
        }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let s = scale();
        let prods = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let min = prods.iter().min().unwrap();
        let max = prods.iter().max().unwrap();
        Interval {
            lo: min.div_floor(&s),
            hi: div_ceil(max, &s),
        }
    }

    /// Division by an interval that is strictly positive.
    pub fn div(&self, o: &Interval) -> Interval {
        assert!(o.lo.is_positive(), "divisor interval must be positive");
        let s = scale();
        let cands = [
            (&self.lo * &s, &o.lo),
            (&self.lo * &s, &o.hi),
            (&self.hi * &s, &o.lo),
            (&self.hi * &s, &o.hi),
        ];
        let lo = cands.iter().map(|(n, d)| n.div_floor(d)).min().unwrap();
        let hi = cands.iter().map(|(n, d)| div_ceil(n, d)).max().unwrap();
        Interval { lo, hi }
    }

    pub fn pow(&self, e: u32) -> Interval {
        let mut acc = Interval::exact_int(1);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn widen(&self, ulps: u32) -> Interval {
        Interval {
            lo: &self.lo - ulps,
            hi: &self.hi + ulps,
        }
    }

    pub fn lower_rational(&self) -> BigRational {
        BigRational::new(self.lo.clone(), scale())
    }

    pub fn upper_rational(&self) -> BigRational {
        BigRational::new(self.hi.clone(), scale())
    }

    pub fn contains(&self, r: &BigRational) -> bool {
        &self.lower_rational() <= r && r <= &self.upper_rational()
    }
}

fn div_ceil(n: &BigInt, d: &BigInt) -> BigInt {
    let (q, r) = n.div_mod_floor(d);
    if r.is_zero() {
        q
    } else {
        q + 1
    }
}

/// Encloses `atanh(num/den) = sum y^(2i+1)/(2i+1)` for `|num/den| <= 1/3`.
fn atanh_ratio(num: i64, den: i64) -> Interval {
    assert!(den > 0 && 3 * num.abs() <= den);
    let mut acc = Interval::exact_int(0);
    let num_b = BigInt::from(num);
    let den_b = BigInt::from(den);
    let mut pow_n = num_b.clone();
    let mut pow_d = den_b.clone();
    let mut i: u64 = 0;
    let ulp = BigInt::one();
    loop {
        let term = Interval::from_ratio(pow_n.clone(), &pow_d * (2 * i + 1));
        acc = acc.add(&term);
        if term.hi.abs() <= ulp && term.lo.abs() <= ulp {
            break;
        }
        pow_n = &pow_n * &num_b * &num_b;
        pow_d = &pow_d * &den_b * &den_b;
        i += 1;
    }
    // remainder is at most |last term| / (1 - y^2) <= 9/8 ulp
    acc.widen(2)
}

/// Encloses `ln 2`.
pub fn ln2() -> Interval {
    atanh_ratio(1, 3).add(&atanh_ratio(1, 3))
}

/// Encloses `ln j` for `j >= 1`.
pub fn ln(j: u64) -> Interval {
    assert!(j >= 1);
    // j = 2^k * m with m in [3/4, 3/2)
    let mut k = 0u32;
    while (3u128 << k) <= 2 * j as u128 {
        k += 1;
    }
    let pk = 1i64 << k;
    let ji = j as i64;
    let y = atanh_ratio(ji - pk, ji + pk);
    let two_y = y.add(&y);
    let mut k_ln2 = ln2();
    let kk = Interval::exact_int(k as i64);
    k_ln2 = k_ln2.mul(&kk);
    k_ln2.add(&two_y)
}

/// Encloses `arctan(1/x)` for integer `x >= 2` by its alternating series.
fn arctan_inv(x: i64) -> Interval {
    let mut acc = Interval::exact_int(0);
    let xb = BigInt::from(x);
    let mut pow = xb.clone();
    let mut k: u64 = 0;
    let ulp = BigInt::one();
    loop {
        let sign = if k.is_multiple_of(2) { 1 } else { -1 };
        let term = Interval::from_ratio(BigInt::from(sign), &pow * (2 * k + 1));
        acc = acc.add(&term);
        if term.hi.abs() <= ulp && term.lo.abs() <= ulp {
            break;
        }
        pow = &pow * &xb * &xb;
        k += 1;
    }
    acc.widen(1)
}

/// Encloses pi via Machin's formula `16 atan(1/5) - 4 atan(1/239)`.
pub fn pi() -> Interval {
    let a = arctan_inv(5).mul(&Interval::exact_int(16));
    let b = arctan_inv(239).mul(&Interval::exact_int(4));
    a.sub(&b)
}

/// Truncates a non-negative rational to `digits` decimals, e.g. `0.72199`.
pub fn truncate_decimal(r: &BigRational, digits: u32) -> String {
    assert!(!r.is_negative(), "non-negative values only");
    let scaled = (r * BigRational::from_integer(BigInt::from(10u32).pow(digits))).floor();
    let s = scaled.to_integer().to_string();
    if digits == 0 {
        return s;
    }
    let d = digits as usize;
    let padded = format!("{:0>width$}", s, width = d + 1);
    let (int, frac) = padded.split_at(padded.len() - d);
    format!("{int}.{frac}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(s: &str) -> BigRational {
        let (int, frac) = s.split_once('.').unwrap();
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        let num: BigInt = format!("{int}{frac}").parse().unwrap();
        BigRational::new(num, den)
    }

    #[test]
    fn pi_encloses_known_digits() {
        let p = pi();
        let lo = rat("3.14159265358979323846264338327950288419716939937510");
        let hi = rat("3.14159265358979323846264338327950288419716939937511");
        assert!(p.lower_rational() <= hi && p.upper_rational() >= lo);
        assert!(p.hi.clone() - p.lo.clone() < BigInt::from(10_000));
    }

    #[test]
    fn logarithms() {
        let l2 = ln2();
        let want = rat("0.69314718055994530941723212145817656807550013436025");
        assert!(l2.lower_rational() <= want + rat("0.00000000000000000000000000000000000000000000000001"));
        let l10 = ln(10);
        assert_eq!(
            truncate_decimal(&l10.lower_rational(), 30),
            "2.302585092994045684017991454684"
        );
        assert_eq!(truncate_decimal(&ln(1).upper_rational(), 3), "0.000");
        for j in [2u64, 3, 4, 7, 40, 1000] {
            let l = ln(j);
            assert!(l.lo < l.hi);
            let approx = (j as f64).ln();
            let mid = truncate_decimal(&l.lower_rational(), 10).parse::<f64>().unwrap();
            assert!((mid - approx).abs() < 1e-9, "j={j}");
        }
    }

    #[test]
    fn truncation_formatting() {
        let r = BigRational::new(BigInt::from(13), BigInt::from(18));
        assert_eq!(truncate_decimal(&r, 4), "0.7222");
        assert_eq!(truncate_decimal(&BigRational::from_integer(BigInt::from(3)), 2), "3.00");
        assert_eq!(
            truncate_decimal(&BigRational::new(BigInt::from(1), BigInt::from(1000)), 2),
            "0.00"
        );
    }

    #[test]
    fn ratio_enclosure() {
        let i = Interval::from_ratio(1, 3);
        assert!(i.contains(&BigRational::new(BigInt::from(1), BigInt::from(3))));
        assert_eq!(&i.hi - &i.lo, BigInt::one());
    }
}
