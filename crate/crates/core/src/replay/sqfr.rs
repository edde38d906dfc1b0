//! Exact verification of the inequalities showing that a squarefree number
//! with `l >= 45` prime factors is matchable.
//!
//! With `u = m_j n`, where `m_j` is the product of the `j` smallest primes of
//! `u`, `tau(n) = 2^(l-j)` and every prime of `n` is at least `P_(j+1)`, each
//! case of the Hall argument reduces to a numeric inequality in `l`, `j`,
//! binomial coefficients and `f = 93/100`. All of them are checked here as
//! exact rationals, with `2^(2 sqrt l + c - l)` replaced by the stronger
//! `2^(2j + c - l)`.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::PrimeTable;
use crate::error::{Error, Result};
use crate::json::ratio;

pub const SQFR_MIN_ELL: u32 = 45;
/// Upper end of the machine-checked range.
pub const SQFR_MAX_ELL: u32 = 2048;

/// What covers `l` beyond [`SQFR_MAX_ELL`].
pub const ANALYTIC_TAIL: &str = "l > 2048: trusted analytic tail, not machine-checked. \
    For l >= 192 with j = floor(sqrt l), kbar < l / log2(43), so c = k/omega(n) < 0.2, \
    and with H(x) = -x log2 x - (1-x) log2(1-x) one has \
    E_k <= 2j - 1 + (c + H(c)) omega(n) - l < -0.078 l + 1.078 sqrt(l) - 1 < -1.03.";

const PRIME_COUNT: usize = 2600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Lt,
    Le,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
        })
    }
}

/// One exact comparison `lhs rel rhs` with its verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<u32>,
    #[serde(with = "ratio")]
    pub lhs: BigRational,
    pub relation: Relation,
    #[serde(with = "ratio")]
    pub rhs: BigRational,
    pub holds: bool,
    /// The smallest `l` for which the argument asserts this inequality.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub claimed_from: Option<u32>,
}

impl Inequality {
    fn new(id: &str, k: Option<u32>, lhs: BigRational, relation: Relation, rhs: BigRational) -> Self {
        let mut out = Inequality {
            id: id.to_string(),
            k,
            lhs,
            relation,
            rhs,
            holds: false,
            claimed_from: None,
        };
        out.holds = out.rederive();
        out
    }

    fn from(mut self, ell: u32) -> Self {
        self.claimed_from = Some(ell);
        self
    }

    /// The verdict recomputed from the stored sides.
    pub fn rederive(&self) -> bool {
        match self.relation {
            Relation::Lt => self.lhs < self.rhs,
            Relation::Le => self.lhs <= self.rhs,
        }
    }

    pub fn label(&self) -> String {
        match self.k {
            Some(k) => format!("{} (k = {k})", self.id),
            None => self.id.clone(),
        }
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {:.6} {} {:.6}  {}",
            self.label(),
            approx(&self.lhs),
            self.relation,
            approx(&self.rhs),
            if self.holds { "ok" } else { "FAILS" }
        )
    }
}

/// A display-only decimal approximation.
fn approx(r: &BigRational) -> f64 {
    let (n, d) = (r.numer(), r.denom());
    let shift = (n.bits().max(d.bits()) as i64 - 60).max(0);
    let n = (n >> shift).to_string().parse::<f64>().unwrap_or(f64::NAN);
    let d = (d >> shift).to_string().parse::<f64>().unwrap_or(f64::NAN);
    if d == 0.0 {
        f64::INFINITY
    } else {
        n / d
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqfrCertificate {
    pub ell: u32,
    pub j: u32,
    pub kbar: u32,
    /// `sum_{i=j+1}^{l} 1/P_i`.
    #[serde(with = "ratio")]
    pub f_bound: BigRational,
    /// Conditions on `j` and `f` plus the `k = 4` anchor.
    pub parameters: Vec<Inequality>,
    /// The `k >= 4` inequality for `4 <= k <= kbar`.
    pub per_k: Vec<Inequality>,
    /// Sub-cases for `k = 3, 2, 1`.
    pub case_records: Vec<Inequality>,
    pub valid: bool,
}

impl SqfrCertificate {
    pub fn inequalities(&self) -> impl Iterator<Item = &Inequality> {
        self.parameters.iter().chain(&self.per_k).chain(&self.case_records)
    }

    pub fn failures(&self) -> Vec<&Inequality> {
        self.inequalities().filter(|i| !i.holds).collect()
    }

    /// Re-derives every verdict from the stored rationals and checks that the
    /// `k >= 4` records cover `4..=kbar`.
    pub fn check(&self) -> Result<()> {
        for i in self.inequalities() {
            if i.rederive() != i.holds {
                return Err(Error::validation(format!(
                    "{}: stored verdict does not match its sides",
                    i.label()
                )));
            }
        }
        let ks: Vec<u32> = self.per_k.iter().filter_map(|i| i.k).collect();
        let want: Vec<u32> = (4..=self.kbar).collect();
        if ks != want {
            return Err(Error::validation(format!(
                "k >= 4 records cover {ks:?}, expected 4..={}",
                self.kbar
            )));
        }
        let f_ok = self
            .parameters
            .iter()
            .any(|i| i.id == "f bound" && i.lhs == self.f_bound);
        if !f_ok {
            return Err(Error::validation("f bound record does not match f_bound"));
        }
        let all = self.inequalities().all(|i| i.holds);
        if all != self.valid {
            return Err(Error::validation(format!(
                "certificate claims valid = {} but verdicts say {all}",
                self.valid
            )));
        }
        if !all {
            let first = self.failures()[0].label();
            return Err(Error::validation(format!("l = {}: {first} fails", self.ell)));
        }
        Ok(())
    }
}

/// One line per `l` of a range verification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqfrSummary {
    pub ell: u32,
    pub j: u32,
    pub kbar: u32,
    pub inequalities: usize,
    pub valid: bool,
    pub failures: Vec<String>,
}

/// The `j` used for `l` prime factors.
pub fn j_choice(ell: u32) -> Result<u32> {
    if ell < SQFR_MIN_ELL {
        return Err(Error::Range(format!("j is chosen for l >= {SQFR_MIN_ELL}, got {ell}")));
    }
    Ok(match ell {
        46..=48 => 3,
        52 => 5,
        45..=67 => 4,
        _ => ell.isqrt(),
    })
}

struct Prefix {
    primes: Vec<u64>,
    /// `num[m] / den[m] = sum_{i<=m} 1/P_i` with `den[m] = P_1 ... P_m`.
    num: Vec<BigUint>,
    den: Vec<BigUint>,
}

fn prefix() -> &'static Prefix {
    static CELL: OnceLock<Prefix> = OnceLock::new();
    CELL.get_or_init(|| {
        let primes = PrimeTable::first(PRIME_COUNT).expect("prime table").as_slice().to_vec();
        let mut num = vec![BigUint::zero()];
        let mut den = vec![BigUint::one()];
        for (m, &p) in primes.iter().enumerate().take(SQFR_MAX_ELL as usize) {
            num.push(&num[m] * p + &den[m]);
            den.push(&den[m] * p);
        }
        Prefix { primes, num, den }
    })
}

fn nth_prime(i: usize) -> Result<u64> {
    prefix()
        .primes
        .get(i - 1)
        .copied()
        .ok_or_else(|| Error::capacity("prime index", i as u128, PRIME_COUNT as u128))
}

/// The largest `k` with `P_(j+1) ... P_(j+k) <= 2^l`.
pub fn kbar(ell: u32, j: u32) -> Result<u32> {
    let limit = BigUint::one() << ell;
    let mut prod = BigUint::one();
    let mut k = 0;
    loop {
        prod *= nth_prime((j + k + 1) as usize)?;
        if prod > limit {
            return Ok(k);
        }
        k += 1;
    }
}

fn f_bound(ell: u32, j: u32) -> BigRational {
    let p = prefix();
    let (l, j) = (ell as usize, j as usize);
    let scaled = &p.num[j] * (&p.den[l] / &p.den[j]);
    let num = &p.num[l] - scaled;
    BigRational::new(num.into(), p.den[l].clone().into())
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn int(v: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(v.into())
}

fn pow2(e: i64) -> BigRational {
    let p = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

fn binom(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn one() -> BigRational {
    BigRational::one()
}

/// `(93/50)^4 / 4! < 1/2`: the first term of the `k >= 4` inequality never
/// exceeds one half.
pub fn anchor() -> Inequality {
    let lhs = q(93, 50).pow(4) / int(24);
    Inequality::new("anchor (93/50)^4/4! < 1/2", None, lhs, Relation::Lt, q(1, 2))
}

fn parameters(ell: u32, j: u32, f: &BigRational) -> Vec<Inequality> {
    vec![
        Inequality::new("j >= 3", None, int(3), Relation::Le, int(j)),
        Inequality::new("j^2 <= l", None, int(j * j), Relation::Le, int(ell)),
        Inequality::new("f bound", None, f.clone(), Relation::Lt, q(93, 100)),
        anchor(),
    ]
}

fn per_k(ell: u32, j: u32, kbar: u32) -> Vec<Inequality> {
    let omega = ell - j;
    let ratio = q(93, 50);
    let mut first = one();
    let mut c = BigInt::one();
    let mut out = Vec::new();
    for k in 1..=kbar {
        first = first * &ratio / int(k);
        c = c * (omega - k + 1) / k;
        if k < 4 {
            continue;
        }
        let e = 2 * j as i64 - 1 + k as i64 - ell as i64;
        let lhs = &first + pow2(e) * int(c.clone());
        out.push(Inequality::new("k >= 4", Some(k), lhs, Relation::Lt, one()));
    }
    out
}

fn case_records(ell: u32, j: u32) -> Vec<Inequality> {
    let (l, j2) = (ell as i64, 2 * j as i64);
    let f = q(93, 100);
    let f2 = &f * &f;
    let f3 = &f2 * &f;
    let f4 = &f3 * &f;
    let lt =
        |id: &str, k: u32, lhs: BigRational, rhs: BigRational| Inequality::new(id, Some(k), lhs, Relation::Lt, rhs);
    let b = |n: u32, k: u32| int(binom(n, k));
    vec![
        lt(
            "unique triple",
            3,
            q(8, 1001) + q(8, 24) * &f4 + pow2(j2 + 2 - l) * (one() + b(ell, 4)),
            one(),
        )
        .from(27),
        lt(
            "two triples",
            3,
            q(16, 18) * &f3 + q(16, 3) * pow2(j2 - 1 - l) * b(ell, 3),
            one(),
        )
        .from(25),
        lt(
            "unique pair",
            2,
            q(4, 77) + q(4, 6) * &f3 + pow2(j2 + 1 - l) * (one() + b(ell, 3)),
            one(),
        )
        .from(23),
        lt(
            "two pairs",
            2,
            q(8, 3) * q(2, 77) + q(8, 18) * &f3 + q(8, 3) * pow2(j2 - 1 - l) * (int(2) + b(ell, 3)),
            one(),
        )
        .from(21),
        lt(
            "three pairs",
            2,
            q(16, 14) * &f2 + q(16, 7) * pow2(j2 - 1 - l) * b(ell - j, 2),
            one(),
        )
        .from(26),
        lt(
            "unique prime coefficient",
            1,
            &f2 / int(2) + (one() - &f) / int(7) + q(1, 98),
            q(453, 1000),
        ),
        lt(
            "unique prime",
            1,
            q(906, 1000) + pow2(j2 - l) * (one() + b(ell - 4, 2)),
            one(),
        )
        .from(30),
        lt("two primes coefficient", 1, q(2, 7) + &f2 / int(2), q(72, 100)),
        lt(
            "two primes",
            1,
            q(96, 100) + q(4, 3) * pow2(j2 - 1 - l) * (int(2) + b(ell - 3, 2)),
            one(),
        )
        .from(22),
        lt("three primes coefficient", 1, q(3, 7) + &f2 / int(2), q(862, 1000)),
        lt(
            "three primes",
            1,
            q(862, 1000) / q(7, 8) + q(8, 7) * pow2(j2 - 1 - l) * (int(3) + b(ell - 3, 2)),
            one(),
        )
        .from(35),
        lt(
            "four or more primes",
            1,
            q(93, 100) / q(15, 16) + q(16, 15) * pow2(j2 - 1 - l) * int(ell),
            one(),
        )
        .from(13),
    ]
}

/// Verifies every inequality of the argument for `l` prime factors.
///
/// A failing inequality does not raise an error; the certificate comes back
/// with `valid = false` and the failure recorded.
pub fn verify_sqfr(ell: u32) -> Result<SqfrCertificate> {
    if !(SQFR_MIN_ELL..=SQFR_MAX_ELL).contains(&ell) {
        return Err(Error::Range(format!(
            "l must lie in [{SQFR_MIN_ELL}, {SQFR_MAX_ELL}], got {ell}"
        )));
    }
    let j = j_choice(ell)?;
    let kbar = kbar(ell, j)?;
    let f = f_bound(ell, j);
    let parameters = parameters(ell, j, &f);
    let per_k = per_k(ell, j, kbar);
    let case_records = case_records(ell, j);
    let valid = parameters.iter().chain(&per_k).chain(&case_records).all(|i| i.holds);
    Ok(SqfrCertificate {
        ell,
        j,
        kbar,
        f_bound: f,
        parameters,
        per_k,
        case_records,
        valid,
    })
}

/// Verifies `l` in `lo..=hi` in parallel, keeping only a summary per `l`.
pub fn verify_sqfr_range(lo: u32, hi: u32) -> Result<Vec<SqfrSummary>> {
    (lo..=hi)
        .into_par_iter()
        .map(|ell| {
            let c = verify_sqfr(ell)?;
            Ok(SqfrSummary {
                ell,
                j: c.j,
                kbar: c.kbar,
                inequalities: c.inequalities().count(),
                valid: c.valid && c.check().is_ok(),
                failures: c.failures().iter().map(|i| i.label()).collect(),
            })
        })
        .collect()
}

/// Checks `E_k < -1.03` for `4 <= k <= kbar` with `j = floor(sqrt l)`, where
/// `E_k = 2j - 1 + k - l + log2 C(l - j, k)`, in the integer form
/// `C(l-j, k)^100 * 2^(100 (2j - 1 + k - l) + 103) < 1`.
pub fn entropy_spot_check(ell: u32) -> Result<Vec<Inequality>> {
    if ell < 16 {
        return Err(Error::Range(format!("entropy check needs l >= 16, got {ell}")));
    }
    let j = ell.isqrt();
    let kb = kbar(ell, j)?;
    Ok((4..=kb)
        .map(|k| {
            let e = 100 * (2 * j as i64 - 1 + k as i64 - ell as i64) + 103;
            let lhs = int(binom(ell - j, k).pow(100)) * pow2(e);
            Inequality::new("E_k < -1.03", Some(k), lhs, Relation::Lt, one())
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j_values() {
        assert_eq!(j_choice(68).unwrap(), 8);
        assert_eq!(j_choice(47).unwrap(), 3);
        assert_eq!(j_choice(52).unwrap(), 5);
        assert_eq!(j_choice(45).unwrap(), 4);
        assert_eq!(j_choice(67).unwrap(), 4);
        assert_eq!(j_choice(2048).unwrap(), 45);
        assert!(matches!(j_choice(44), Err(Error::Range(_))));
        for ell in 45..=400 {
            let j = j_choice(ell).unwrap();
            assert!(j * j <= ell);
        }
    }

    #[test]
    fn kbar_values() {
        assert_eq!(kbar(10, 0).unwrap(), 4);
        assert_eq!(kbar(1, 0).unwrap(), 1);
        assert_eq!(kbar(2, 0).unwrap(), 1);
    }

    #[test]
    fn prefix_sums() {
        assert_eq!(f_bound(3, 0), q(31, 30));
        assert_eq!(f_bound(5, 2), q(1, 5) + q(1, 7) + q(1, 11));
    }

    #[test]
    fn forty_five() {
        let c = verify_sqfr(45).unwrap();
        assert_eq!(c.j, 4);
        assert!(c.valid, "{:?}", c.failures());
        c.check().unwrap();
        assert!(anchor().holds);
    }

    #[test]
    fn tampering_is_caught() {
        let mut c = verify_sqfr(50).unwrap();
        c.per_k[0].lhs = int(2);
        assert!(c.check().is_err());
        let mut c = verify_sqfr(50).unwrap();
        c.per_k.pop();
        assert!(c.check().is_err());
    }

    #[test]
    fn entropy_at_192() {
        let checks = entropy_spot_check(192).unwrap();
        assert!(!checks.is_empty());
        assert!(checks.iter().all(|i| i.holds));
    }

    #[test]
    fn json_round_trip() {
        let c = verify_sqfr(46).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        let back: SqfrCertificate = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
    }
}
