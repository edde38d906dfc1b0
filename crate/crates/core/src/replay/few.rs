//! Replay of the Hall-condition case analysis for squarefree `u` with
//! `3 <= l <= 44` prime factors, matched against the odd integers in
//! `[1, 2^(l+1)]` (odd mode) or the integers in `[1, 2^l]` (full mode).
//!
//! For `S` with `k = min omega((s, u))`, each case `k` is closed by the first
//! rung of a fixed fallback chain whose comparisons all hold. Bounds are
//! fractions of `tau(u) = 2^l`; a comparison holds when the count is strictly
//! below the bound.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::group_digits;
use crate::census::{CensusRow, DataStore, GcdCounts, Mode};
use crate::error::{Error, Result};
use crate::json::wide;

pub const FEW_MIN_ELL: u32 = 3;
pub const FEW_MAX_ELL: u32 = 44;

/// A named census quantity and its value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    #[serde(with = "wide")]
    pub value: u128,
}

/// `sum(terms) < num / 2^shift * 2^l`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comparison {
    pub terms: Vec<Term>,
    #[serde(with = "wide")]
    pub lhs: u128,
    #[serde(with = "wide")]
    pub num: u128,
    pub shift: u32,
    pub holds: bool,
}

/// Comparisons that together close a case; evaluation stops at the first
/// that fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rung {
    pub comparisons: Vec<Comparison>,
    pub closed: bool,
}

/// A sub-case with its own fallback chain. Rungs are tried in order until one
/// closes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch {
    pub name: String,
    pub rungs: Vec<Rung>,
    pub closed_by: Option<usize>,
}

/// The case `k = min omega((s, u))`: either the direct rung closes it, or
/// every branch must.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub k: u32,
    pub direct: Rung,
    pub branches: Vec<Branch>,
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FewCertificate {
    pub ell: u32,
    pub mode: Mode,
    pub omega_max: usize,
    /// Cases from `k = omega_max` down to `k = 0`.
    pub steps: Vec<Step>,
    /// Gcd-table columns the replay consulted, in table order.
    pub needed: Vec<String>,
    pub valid: bool,
}

/// The gcd-table columns, in printed order.
const COLUMNS: [&str; 6] = ["gcd105", "gcd15", "gcd21", "gcd3", "x3", "gcd5"];

fn column_of(name: &str) -> Option<&'static str> {
    match name {
        "x_3" => Some("x3"),
        _ => {
            let d = name.strip_prefix("gcd_{")?.strip_suffix('}')?;
            COLUMNS.iter().copied().find(|c| c.strip_prefix("gcd") == Some(d))
        }
    }
}

trait Source {
    fn omega_max(&self) -> usize;
    fn c_ge(&mut self, k: u32) -> Result<u128>;
    fn gcd(&mut self, d: u64) -> Result<u128>;
    fn x3(&mut self) -> Result<u128>;
}

struct Census<'a> {
    ell: u32,
    row: &'a CensusRow,
    gcds: &'a GcdCounts,
}

impl Source for Census<'_> {
    fn omega_max(&self) -> usize {
        self.row.omega_max
    }

    fn c_ge(&mut self, k: u32) -> Result<u128> {
        Ok(self.row.c_ge(k as usize))
    }

    fn gcd(&mut self, d: u64) -> Result<u128> {
        self.gcds
            .get(d)
            .ok_or_else(|| Error::Input(format!("gcd_{d} is needed for l = {} but missing", self.ell)))
    }

    fn x3(&mut self) -> Result<u128> {
        Ok(self.gcds.x3)
    }
}

/// Values read back out of a certificate.
struct Stored {
    omega_max: usize,
    values: BTreeMap<String, u128>,
}

impl Stored {
    fn get(&self, name: String) -> Result<u128> {
        self.values
            .get(&name)
            .copied()
            .ok_or_else(|| Error::validation(format!("certificate does not record {name}")))
    }
}

impl Source for Stored {
    fn omega_max(&self) -> usize {
        self.omega_max
    }

    fn c_ge(&mut self, k: u32) -> Result<u128> {
        self.get(c_name(k))
    }

    fn gcd(&mut self, d: u64) -> Result<u128> {
        self.get(gcd_name(d))
    }

    fn x3(&mut self) -> Result<u128> {
        self.get("x_3".into())
    }
}

fn c_name(k: u32) -> String {
    format!("c_{{≥{k}}}")
}

fn gcd_name(d: u64) -> String {
    format!("gcd_{{{d}}}")
}

#[derive(Clone, Copy)]
enum Q {
    C(u32),
    Gcd(u64),
    X3,
}

struct Replayer<'a> {
    ell: u32,
    src: &'a mut dyn Source,
}

impl Replayer<'_> {
    fn term(&mut self, q: Q) -> Result<Term> {
        Ok(match q {
            Q::C(k) => Term {
                name: c_name(k),
                value: self.src.c_ge(k)?,
            },
            Q::Gcd(d) => Term {
                name: gcd_name(d),
                value: self.src.gcd(d)?,
            },
            Q::X3 => Term {
                name: "x_3".into(),
                value: self.src.x3()?,
            },
        })
    }

    fn compare(&mut self, qs: &[Q], num: u128, shift: u32) -> Result<Comparison> {
        let terms = qs.iter().map(|&q| self.term(q)).collect::<Result<Vec<_>>>()?;
        let lhs = terms.iter().map(|t| t.value).sum();
        Ok(Comparison {
            holds: holds(lhs, num, shift, self.ell),
            terms,
            lhs,
            num,
            shift,
        })
    }

    /// `spec` lists `(terms, num, shift)` for each comparison of the rung.
    fn rung(&mut self, spec: &[Cmp]) -> Result<Rung> {
        let mut comparisons = Vec::new();
        for (qs, num, shift) in spec {
            let c = self.compare(qs, *num, *shift)?;
            let ok = c.holds;
            comparisons.push(c);
            if !ok {
                return Ok(Rung {
                    comparisons,
                    closed: false,
                });
            }
        }
        Ok(Rung {
            comparisons,
            closed: true,
        })
    }

    fn branch(&mut self, name: &str, rungs: &[Vec<Cmp>]) -> Result<Branch> {
        let mut out = Vec::new();
        for (i, spec) in rungs.iter().enumerate() {
            let r = self.rung(spec)?;
            let closed = r.closed;
            out.push(r);
            if closed {
                return Ok(Branch {
                    name: name.into(),
                    rungs: out,
                    closed_by: Some(i),
                });
            }
        }
        Ok(Branch {
            name: name.into(),
            rungs: out,
            closed_by: None,
        })
    }

    fn step(&mut self, k: u32, omega_max: u32) -> Result<Step> {
        let (direct, branches) = chain(k, omega_max);
        let direct = self.rung(&direct)?;
        if direct.closed {
            return Ok(Step {
                k,
                direct,
                branches: vec![],
                closed: true,
            });
        }
        let mut out = Vec::new();
        for (name, rungs) in &branches {
            out.push(self.branch(name, rungs)?);
        }
        let closed = !out.is_empty() && out.iter().all(|b| b.closed_by.is_some());
        Ok(Step {
            k,
            direct,
            branches: out,
            closed,
        })
    }
}

/// `(terms, num, shift)`: the terms sum to less than `num / 2^shift * 2^l`.
type Cmp = (Vec<Q>, u128, u32);

/// A named branch as a list of rungs.
type BranchSpec = (&'static str, Vec<Vec<Cmp>>);

/// The direct rung and the branches for case `k`.
fn chain(k: u32, omega_max: u32) -> (Vec<Cmp>, Vec<BranchSpec>) {
    use Q::*;
    match k {
        0 => (vec![], vec![]),
        1 => (
            vec![(vec![C(1)], 1, 1)],
            vec![
                (
                    "unique prime",
                    vec![
                        vec![(vec![Gcd(3), C(2)], 1, 1)],
                        vec![(vec![X3], 1, 1), (vec![Gcd(3), C(2)], 5, 3)],
                    ],
                ),
                (
                    "second prime",
                    vec![
                        vec![(vec![C(1)], 3, 2)],
                        vec![(vec![C(2), Gcd(3), Gcd(5)], 3, 2), (vec![C(1)], 7, 3)],
                    ],
                ),
            ],
        ),
        2 => (
            vec![(vec![C(2)], 1, 2)],
            vec![
                ("unique pair", vec![vec![(vec![Gcd(15), C(3)], 1, 2)]]),
                (
                    "second pair",
                    vec![
                        vec![(vec![C(2)], 3, 3)],
                        vec![(vec![Gcd(15), Gcd(21), C(3)], 3, 3), (vec![C(2)], 7, 4)],
                    ],
                ),
            ],
        ),
        3 => (
            vec![(vec![C(3)], 1, 3)],
            vec![
                ("unique triple", vec![vec![(vec![Gcd(105), C(4)], 1, 3)]]),
                ("second triple", vec![vec![(vec![C(3)], 3, 4)]]),
            ],
        ),
        _ => (
            vec![(vec![C(k)], 1, omega_max)],
            vec![("some omega = k", vec![vec![(vec![C(k)], 1, k)]])],
        ),
    }
}

fn holds(lhs: u128, num: u128, shift: u32, ell: u32) -> bool {
    (lhs << shift) < (num << ell)
}

fn replay(ell: u32, mode: Mode, src: &mut dyn Source) -> Result<FewCertificate> {
    if !(FEW_MIN_ELL..=FEW_MAX_ELL).contains(&ell) {
        return Err(Error::Range(format!(
            "the case analysis covers l in [{FEW_MIN_ELL}, {FEW_MAX_ELL}], got {ell}"
        )));
    }
    let omega_max = src.omega_max();
    let mut r = Replayer { ell, src };
    let steps = (0..=omega_max as u32)
        .rev()
        .map(|k| r.step(k, omega_max as u32))
        .collect::<Result<Vec<_>>>()?;
    let mut seen = [false; COLUMNS.len()];
    for t in steps.iter().flat_map(step_terms) {
        if let Some(col) = column_of(&t.name) {
            seen[COLUMNS.iter().position(|c| *c == col).unwrap()] = true;
        }
    }
    let needed = COLUMNS
        .iter()
        .zip(seen)
        .filter(|(_, s)| *s)
        .map(|(c, _)| c.to_string())
        .collect();
    let valid = steps.iter().all(|s| s.closed);
    Ok(FewCertificate {
        ell,
        mode,
        omega_max,
        steps,
        needed,
        valid,
    })
}

fn step_terms(s: &Step) -> impl Iterator<Item = &Term> {
    std::iter::once(&s.direct)
        .chain(s.branches.iter().flat_map(|b| &b.rungs))
        .flat_map(|r| &r.comparisons)
        .flat_map(|c| &c.terms)
}

/// Runs the case analysis for `l` against a census row and gcd counts.
///
/// Gcd entries are read only when a rung needs them; a missing one is an
/// input error naming it. A case that no rung closes leaves the certificate
/// invalid.
pub fn replay_few(ell: u32, mode: Mode, row: &CensusRow, gcds: &GcdCounts) -> Result<FewCertificate> {
    if row.ell != ell || gcds.ell != ell || row.mode != mode || gcds.mode != mode {
        return Err(Error::Input(format!(
            "census inputs are not for l = {ell}, {mode} mode"
        )));
    }
    replay(ell, mode, &mut Census { ell, row, gcds })
}

impl FewCertificate {
    /// Re-runs the case analysis on the values recorded in the certificate
    /// and requires an identical transcript, so every comparison, rung choice
    /// and verdict is re-derived without a census.
    pub fn check(&self) -> Result<()> {
        let mut values = BTreeMap::new();
        for t in self.steps.iter().flat_map(step_terms) {
            if let Some(old) = values.insert(t.name.clone(), t.value) {
                if old != t.value {
                    return Err(Error::validation(format!(
                        "{} is recorded as both {old} and {}",
                        t.name, t.value
                    )));
                }
            }
        }
        let mut src = Stored {
            omega_max: self.omega_max,
            values,
        };
        let again = replay(self.ell, self.mode, &mut src)?;
        if &again != self {
            return Err(Error::validation(format!(
                "l = {}: recorded transcript does not follow from its own values",
                self.ell
            )));
        }
        if !self.valid {
            let open: Vec<String> = self
                .steps
                .iter()
                .filter(|s| !s.closed)
                .map(|s| s.k.to_string())
                .collect();
            return Err(Error::validation(format!(
                "l = {}: case k = {} not closed",
                self.ell,
                open.join(", ")
            )));
        }
        Ok(())
    }

    /// The rung-by-rung transcript.
    pub fn explain(&self) -> String {
        let mut out = String::new();
        let scope = match self.mode {
            Mode::Odd => format!("odd integers in [1, 2^{}]", self.ell + 1),
            Mode::Full => format!("integers in [1, 2^{}]", self.ell),
        };
        let _ = writeln!(
            out,
            "l = {}, {scope}: tau(u) = 2^{} = {}, omega_max = {}",
            self.ell,
            self.ell,
            group_digits(1u128 << self.ell),
            self.omega_max
        );
        for s in &self.steps {
            let _ = writeln!(out, "k = {}:", s.k);
            if s.direct.comparisons.is_empty() {
                let _ = writeln!(out, "  N(S) = D(u); closed");
                continue;
            }
            let _ = write!(
                out,
                "{}",
                RungText {
                    ell: self.ell,
                    label: "all",
                    rung: &s.direct,
                    chosen: s.direct.closed
                }
            );
            for b in &s.branches {
                for (i, r) in b.rungs.iter().enumerate() {
                    let label = format!("{}, rung {}", b.name, i + 1);
                    let chosen = b.closed_by == Some(i);
                    let _ = write!(
                        out,
                        "{}",
                        RungText {
                            ell: self.ell,
                            label: &label,
                            rung: r,
                            chosen
                        }
                    );
                }
                if b.closed_by.is_none() {
                    let _ = writeln!(out, "  {}: NOT CLOSED", b.name);
                }
            }
            if !s.closed {
                let _ = writeln!(out, "  case k = {} NOT CLOSED", s.k);
            }
        }
        let _ = writeln!(
            out,
            "{}",
            if self.valid {
                "Hall's condition holds in every case"
            } else {
                "replay FAILED"
            }
        );
        if !self.needed.is_empty() {
            let _ = writeln!(out, "gcd columns used: {}", self.needed.join(", "));
        }
        out
    }
}

struct RungText<'a> {
    ell: u32,
    label: &'a str,
    rung: &'a Rung,
    chosen: bool,
}

impl fmt::Display for RungText<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.rung.comparisons {
            write!(f, "  [{}] {}", self.label, ComparisonText { ell: self.ell, c })?;
            writeln!(f)?;
        }
        if self.chosen {
            writeln!(f, "  [{}] closes the case", self.label)?;
        }
        Ok(())
    }
}

struct ComparisonText<'a> {
    ell: u32,
    c: &'a Comparison,
}

impl fmt::Display for ComparisonText<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.c;
        let names: Vec<&str> = c.terms.iter().map(|t| t.name.as_str()).collect();
        write!(f, "{} = ", names.join(" + "))?;
        if c.terms.len() > 1 {
            let vals: Vec<String> = c.terms.iter().map(|t| group_digits(t.value)).collect();
            write!(f, "{} = ", vals.join(" + "))?;
        }
        let rel = match (c.lhs << c.shift).cmp(&(c.num << self.ell)) {
            std::cmp::Ordering::Less => "<",
            std::cmp::Ordering::Equal => "=",
            std::cmp::Ordering::Greater => ">",
        };
        let bound = if self.ell >= c.shift {
            group_digits(c.num << (self.ell - c.shift))
        } else {
            format!("{}/{}", c.num, 1u128 << (c.shift - self.ell))
        };
        let frac = if c.num == 1 {
            format!("2^({}-{})", self.ell, c.shift)
        } else {
            format!("{}/{}·2^{}", c.num, 1u128 << c.shift, self.ell)
        };
        write!(f, "{} {rel} {bound} = {frac}", group_digits(c.lhs))
    }
}

/// One line per `l` of a range replay.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FewSummary {
    pub ell: u32,
    pub mode: Mode,
    pub valid: bool,
    pub needed: Vec<String>,
    /// Cases that no rung closed.
    pub open_cases: Vec<u32>,
}

impl FewSummary {
    fn of(c: &FewCertificate) -> Self {
        FewSummary {
            ell: c.ell,
            mode: c.mode,
            valid: c.valid && c.check().is_ok(),
            needed: c.needed.clone(),
            open_cases: c.steps.iter().filter(|s| !s.closed).map(|s| s.k).collect(),
        }
    }
}

/// Replays `l` in `ells` for one mode, reading census tables from `store`
/// or computing them when absent (always, with `recompute`).
pub fn replay_few_range(
    ells: std::ops::RangeInclusive<u32>,
    mode: Mode,
    store: &DataStore,
    recompute: bool,
) -> Result<Vec<(FewCertificate, FewSummary)>> {
    ells.into_par_iter()
        .map(|ell| {
            if !(FEW_MIN_ELL..=FEW_MAX_ELL).contains(&ell) {
                return Err(Error::Range(format!(
                    "the case analysis covers l in [{FEW_MIN_ELL}, {FEW_MAX_ELL}], got {ell}"
                )));
            }
            let t = store.tables(ell, mode, recompute)?;
            let c = replay_few(ell, mode, &t.row, &t.gcds)?;
            let s = FewSummary::of(&c);
            Ok((c, s))
        })
        .collect()
}

/// Replays every `l` in `[3, 44]` in both modes.
pub fn verify_all_few(store: &DataStore, recompute: bool) -> Result<Vec<FewSummary>> {
    let mut out = Vec::new();
    for mode in [Mode::Odd, Mode::Full] {
        let r = replay_few_range(FEW_MIN_ELL..=FEW_MAX_ELL, mode, store, recompute)?;
        out.extend(r.into_iter().map(|(_, s)| s));
    }
    Ok(out)
}
