//! Exact counts of integers in `[1, 2^l]` (or odd integers in `[1, 2^(l+1)]`)
//! classified by their gcd with the product of the first `l` odd primes.

mod data;
mod engine;
mod format;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::{factorize, gcd, odd_primes};
use crate::error::{Error, Result};
use crate::json::{wide, wide_map, wide_vec};
use engine::{MASKS, MAX_OMEGA};

pub use data::{bundled, DataStore, DATA_DIR_ENV};
pub use format::{
    format_count, format_row, parse_census_csv, parse_gcd_csv, write_census_csv, write_gcd_csv, CensusCsvRow,
    GcdCsvRow, Rounding, CENSUS_HEADER, GCD_COLUMNS, GCD_HEADER,
};

/// Largest `l` the census supports.
pub const MAX_ELL: u32 = 46;

/// The divisors tabulated alongside the census, in table order.
pub const STANDARD_DS: [u64; 5] = [105, 15, 21, 3, 5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Odd integers in `[1, 2^(l+1)]`.
    Odd,
    /// All integers in `[1, 2^l]`.
    Full,
}

impl Mode {
    /// The interval bound `N`.
    pub fn bound(self, ell: u32) -> u128 {
        match self {
            Mode::Odd => 1u128 << (ell + 1),
            Mode::Full => 1u128 << ell,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Odd => "odd",
            Mode::Full => "full",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "odd" => Ok(Mode::Odd),
            "full" => Ok(Mode::Full),
            _ => Err(Error::Input(format!("unknown mode {s:?} (expected odd or full)"))),
        }
    }
}

/// Number of integers in scope divisible by `v`.
pub fn count_multiples(v: u128, n_bound: u128, mode: Mode) -> Result<u128> {
    if v == 0 {
        return Err(Error::domain("v must be positive"));
    }
    match mode {
        Mode::Full => Ok(n_bound / v),
        Mode::Odd if v.is_multiple_of(2) => Err(Error::domain(format!("{v} is even; odd mode counts odd integers"))),
        Mode::Odd => Ok((n_bound / v).div_ceil(2)),
    }
}

/// The distribution of `omega((s, n))` over `s` in scope.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRow {
    pub ell: u32,
    pub mode: Mode,
    #[serde(with = "wide")]
    pub n_bound: u128,
    /// `c[i]` for `i = 0..=omega_max`.
    #[serde(with = "wide_vec")]
    pub c: Vec<u128>,
    pub omega_max: usize,
}

impl CensusRow {
    pub fn c(&self, i: usize) -> u128 {
        self.c.get(i).copied().unwrap_or(0)
    }

    /// `c_{>= i}`.
    pub fn c_ge(&self, i: usize) -> u128 {
        self.c.iter().skip(i).sum()
    }

    pub fn total(&self) -> u128 {
        self.c.iter().sum()
    }
}

/// Exact counts of `s` in scope with `(s, n) = d`, plus the auxiliary `x_3`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GcdCounts {
    pub ell: u32,
    pub mode: Mode,
    #[serde(with = "wide_map")]
    pub entries: BTreeMap<u64, u128>,
    /// `#{s : 3 | s or omega((s, n)) >= 3}`.
    #[serde(with = "wide")]
    pub x3: u128,
}

impl GcdCounts {
    pub fn get(&self, d: u64) -> Option<u128> {
        self.entries.get(&d).copied()
    }
}

/// A census row together with the standard gcd counts, from a single pass.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusTables {
    pub row: CensusRow,
    pub gcds: GcdCounts,
}

fn check_ell(ell: u32) -> Result<()> {
    if !(3..=MAX_ELL).contains(&ell) {
        return Err(Error::Range(format!("ell must lie in [3, {MAX_ELL}], got {ell}")));
    }
    Ok(())
}

fn binomial(n: usize, k: usize) -> i128 {
    if k > n {
        return 0;
    }
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i128 / (i + 1) as i128;
    }
    acc
}

/// `c_i = sum_{m >= i} (-1)^(m-i) C(m, i) S_m`.
fn invert(s: &[i128]) -> Result<Vec<u128>> {
    let mut c = Vec::with_capacity(s.len());
    for i in 0..s.len() {
        let mut acc: i128 = 0;
        for (m, &sm) in s.iter().enumerate().skip(i) {
            let term = binomial(m, i) * sm;
            if (m - i) % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        let v = u128::try_from(acc).map_err(|_| Error::Invariant(format!("negative census count c_{i} = {acc}")))?;
        c.push(v);
    }
    while c.len() > 1 && *c.last().unwrap() == 0 {
        c.pop();
    }
    Ok(c)
}

/// Computes the census row, the gcd counts for [`STANDARD_DS`] and `x_3`.
pub fn census_tables(ell: u32, mode: Mode) -> Result<CensusTables> {
    check_ell(ell)?;
    let primes = odd_primes(ell as usize);
    let n_bound = mode.bound(ell);
    let sums = engine::enumerate(&primes, n_bound as u64, mode);
    let t = &sums.t;

    let s: Vec<i128> = (0..=MAX_OMEGA)
        .map(|m| (0..MASKS).map(|mask| t[mask][m] as i128).sum())
        .collect();
    let c = invert(&s)?;
    let omega_max = c.len() - 1;
    let row = CensusRow {
        ell,
        mode,
        n_bound,
        c,
        omega_max,
    };

    // gcd_d for d built from 3, 5, 7: alternating sum over masks containing d's.
    let mut entries = BTreeMap::new();
    for d in STANDARD_DS {
        let dmask = mask_of(d);
        let k = dmask.count_ones() as usize;
        let mut acc: i128 = 0;
        for (mask, row) in t.iter().enumerate() {
            if mask & dmask != dmask {
                continue;
            }
            for (m, &v) in row.iter().enumerate().skip(k) {
                if (m - k).is_multiple_of(2) {
                    acc += v as i128;
                } else {
                    acc -= v as i128;
                }
            }
        }
        let v = u128::try_from(acc).map_err(|_| Error::Invariant(format!("negative gcd_{d}")))?;
        entries.insert(d, v);
    }

    // x_3: multiples of 3, plus the census of n/3 over s prime to 3 with omega >= 3.
    let restricted: Vec<i128> = (0..=MAX_OMEGA)
        .map(|m| {
            let mut acc: i128 = 0;
            for (mask, row) in t.iter().enumerate() {
                if mask & 1 == 0 {
                    acc += row[m] as i128;
                } else if m < MAX_OMEGA {
                    acc -= row[m + 1] as i128;
                }
            }
            acc
        })
        .collect();
    let rc = invert(&restricted)?;
    let x3 = count_multiples(3, n_bound, mode)? + rc.iter().skip(3).sum::<u128>();

    Ok(CensusTables {
        row,
        gcds: GcdCounts { ell, mode, entries, x3 },
    })
}

fn mask_of(d: u64) -> usize {
    let mut mask = 0;
    for (i, p) in [3u64, 5, 7].into_iter().enumerate() {
        if d.is_multiple_of(p) {
            mask |= 1 << i;
        }
    }
    mask
}

pub fn census_row(ell: u32, mode: Mode) -> Result<CensusRow> {
    census_tables(ell, mode).map(|t| t.row)
}

/// `gcd_d = sum mu(w) A(d w)` over squarefree `w | n/d`, for each requested `d`,
/// together with `x_3`.
pub fn gcd_counts(ell: u32, mode: Mode, ds: &[u64]) -> Result<GcdCounts> {
    check_ell(ell)?;
    let primes = odd_primes(ell as usize);
    let n: Vec<u64> = primes.clone();
    for &d in ds {
        if d == 0 {
            return Err(Error::domain("d must be positive"));
        }
        let f = factorize(d as u128)?;
        if !f.is_squarefree() || f.primes().any(|p| !n.contains(&p)) {
            return Err(Error::domain(format!(
                "{d} is not a squarefree divisor of the product of the first {ell} odd primes"
            )));
        }
    }
    let tables = census_tables(ell, mode)?;
    let n_bound = mode.bound(ell) as u64;
    let mut entries = BTreeMap::new();
    for &d in ds {
        let v = match tables.gcds.get(d) {
            Some(v) => v,
            None => gcd_count_direct(&primes, n_bound, d, mode)?,
        };
        entries.insert(d, v);
    }
    Ok(GcdCounts {
        ell,
        mode,
        entries,
        x3: tables.gcds.x3,
    })
}

fn gcd_count_direct(primes: &[u64], n_bound: u64, d: u64, mode: Mode) -> Result<u128> {
    let rest: Vec<u64> = primes.iter().copied().filter(|&p| !d.is_multiple_of(p)).collect();
    let v = engine::mobius_sum(&rest, n_bound, d, mode);
    u128::try_from(v).map_err(|_| Error::Invariant(format!("negative gcd_{d}")))
}

/// Checks `c_i(u) <= c_i(n)` for every `i` by direct enumeration of the interval,
/// where `u` is a product of `ell` distinct odd primes.
pub fn monotone_majorize_check(u_primes: &[u64], ell: u32) -> Result<bool> {
    if u_primes.len() != ell as usize {
        return Err(Error::domain(format!("expected {ell} primes, got {}", u_primes.len())));
    }
    if ell > 20 {
        return Err(Error::capacity("ell for direct enumeration", ell as u128, 20u128));
    }
    let mut sorted = u_primes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != u_primes.len() || sorted.iter().any(|&p| p % 2 == 0 || !crate::arith::is_prime_u64(p)) {
        return Err(Error::domain("u must be a product of distinct odd primes"));
    }
    let n = odd_primes(ell as usize);
    for mode in [Mode::Odd, Mode::Full] {
        let cu = direct_census(&sorted, ell, mode);
        let cn = direct_census(&n, ell, mode);
        if cu.iter().enumerate().any(|(i, &x)| x > cn.get(i).copied().unwrap_or(0)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Per-integer census by trial division; the reference implementation used by tests.
pub fn direct_census(primes: &[u64], ell: u32, mode: Mode) -> Vec<u128> {
    let n_bound = mode.bound(ell);
    let mut c = vec![0u128; primes.len() + 1];
    let step = if mode == Mode::Odd { 2 } else { 1 };
    let mut s = 1u128;
    while s <= n_bound {
        let w = primes.iter().filter(|&&p| s.is_multiple_of(p as u128)).count();
        c[w] += 1;
        s += step;
    }
    while c.len() > 1 && *c.last().unwrap() == 0 {
        c.pop();
    }
    c
}

/// Direct `#{s in scope : gcd(s, n) = d}`.
pub fn direct_gcd_count(primes: &[u64], ell: u32, mode: Mode, d: u64) -> u128 {
    let n: u128 = primes.iter().map(|&p| p as u128).product();
    let n_bound = mode.bound(ell);
    let step = if mode == Mode::Odd { 2 } else { 1 };
    (0..)
        .map(|i| 1 + i * step)
        .take_while(|&s| s <= n_bound)
        .filter(|&s| gcd(s, n) == d as u128)
        .count() as u128
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_multiples_examples() {
        assert_eq!(count_multiples(3, 16, Mode::Odd).unwrap(), 3);
        assert_eq!(count_multiples(1, 1 << 25, Mode::Odd).unwrap(), 1 << 24);
        assert_eq!(count_multiples(105, 8, Mode::Full).unwrap(), 0);
        assert!(count_multiples(6, 16, Mode::Odd).is_err());
    }

    #[test]
    fn small_rows() {
        let r = census_row(3, Mode::Odd).unwrap();
        assert_eq!(r.c, vec![3, 4, 1]);
        assert_eq!(r.omega_max, 2);
        let f = census_row(3, Mode::Full).unwrap();
        assert_eq!(f.c, vec![4, 4]);
        assert_eq!(f.omega_max, 1);
        let g = gcd_counts(3, Mode::Odd, &[3]).unwrap();
        assert_eq!(g.get(3), Some(2));
    }

    #[test]
    fn agrees_with_direct_enumeration() {
        for ell in 3..=12u32 {
            let primes = odd_primes(ell as usize);
            for mode in [Mode::Odd, Mode::Full] {
                let t = census_tables(ell, mode).unwrap();
                assert_eq!(t.row.c, direct_census(&primes, ell, mode), "ell={ell} {mode}");
                assert_eq!(t.row.total(), 1u128 << ell);
                for d in STANDARD_DS {
                    let direct = direct_gcd_count(&primes, ell, mode, d);
                    assert_eq!(t.gcds.get(d), Some(direct), "ell={ell} {mode} d={d}");
                    let via_mobius = gcd_count_direct(&primes, mode.bound(ell) as u64, d, mode).unwrap();
                    assert_eq!(via_mobius, direct);
                }
                let n: u128 = primes.iter().map(|&p| p as u128).product();
                let step = if mode == Mode::Odd { 2 } else { 1 };
                let x3 = (0..)
                    .map(|i| 1 + i * step)
                    .take_while(|&s| s <= mode.bound(ell))
                    .filter(|&s| s % 3 == 0 || factorize(gcd(s, n)).unwrap().omega() >= 3)
                    .count() as u128;
                assert_eq!(t.gcds.x3, x3, "ell={ell} {mode}");
            }
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(40, 20), 137_846_528_820);
        assert_eq!(binomial(3, 4), 0);
    }

    #[test]
    fn range_checked() {
        assert!(matches!(census_row(2, Mode::Odd), Err(Error::Range(_))));
        assert!(matches!(census_row(47, Mode::Full), Err(Error::Range(_))));
        assert!(gcd_counts(5, Mode::Odd, &[9]).is_err());
        assert!(gcd_counts(5, Mode::Odd, &[29]).is_err());
    }
}
