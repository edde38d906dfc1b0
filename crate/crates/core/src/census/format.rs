//! Display strings and CSV in the layout of the printed tables.

use std::fmt::Write as _;

use super::{CensusRow, GcdCounts};
use crate::error::{Error, Result};

/// Values at or above this are printed in scientific notation.
pub const EXACT_LIMIT: u128 = 100_000_000;

/// Column order of the gcd table; `0` stands for the `x_3` column.
pub const GCD_COLUMNS: [u64; 6] = [105, 15, 21, 3, 0, 5];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    /// Round the mantissa up.
    Ceil,
    /// Round half up to the nearest mantissa.
    Nearest,
}

/// Exact digits below `10^8`, otherwise `m.mme E` with `sigfigs` significant digits.
pub fn format_count(value: u128, sigfigs: u32, rounding: Rounding) -> String {
    if value < EXACT_LIMIT {
        return value.to_string();
    }
    let sigfigs = sigfigs.max(1);
    let digits = value.to_string().len() as u32;
    let mut exp = digits - 1;
    let shift = 10u128.pow(digits - sigfigs);
    let (q, r) = (value / shift, value % shift);
    let mut mant = match rounding {
        Rounding::Ceil => q + u128::from(r > 0),
        Rounding::Nearest => q + u128::from(2 * r >= shift),
    };
    if mant == 10u128.pow(sigfigs) {
        mant /= 10;
        exp += 1;
    }
    let m = mant.to_string();
    if sigfigs == 1 {
        format!("{m}e{exp}")
    } else {
        format!("{}.{}e{}", &m[..1], &m[1..], exp)
    }
}

/// Display strings for a census row: `l`, `omega_max`, `c_0..c_6`, `c_{>=7}`;
/// entries beyond `omega_max` are empty.
pub fn format_row(row: &CensusRow, sigfigs: u32, rounding: Rounding) -> Vec<String> {
    let mut out = vec![row.ell.to_string(), row.omega_max.to_string()];
    for i in 0..7 {
        if i <= row.omega_max {
            out.push(format_count(row.c(i), sigfigs, rounding));
        } else {
            out.push(String::new());
        }
    }
    if row.omega_max >= 7 {
        out.push(format_count(row.c_ge(7), sigfigs, rounding));
    } else {
        out.push(String::new());
    }
    out
}

/// One parsed line of a census CSV: the printed columns, exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusCsvRow {
    pub ell: u32,
    pub omega_max: usize,
    pub c: [Option<u128>; 7],
    pub c_ge7: Option<u128>,
}

impl CensusCsvRow {
    pub fn from_row(row: &CensusRow) -> Self {
        let mut c = [None; 7];
        for (i, slot) in c.iter_mut().enumerate() {
            if i <= row.omega_max {
                *slot = Some(row.c(i));
            }
        }
        CensusCsvRow {
            ell: row.ell,
            omega_max: row.omega_max,
            c,
            c_ge7: (row.omega_max >= 7).then(|| row.c_ge(7)),
        }
    }
}

pub const CENSUS_HEADER: &str = "ell,omega_max,c0,c1,c2,c3,c4,c5,c6,c_ge7";
pub const GCD_HEADER: &str = "ell,gcd105,gcd15,gcd21,gcd3,x3,gcd5";

fn opt(v: Option<u128>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_census_csv(rows: &[CensusRow]) -> String {
    let mut s = String::new();
    writeln!(s, "{CENSUS_HEADER}").unwrap();
    for row in rows {
        let r = CensusCsvRow::from_row(row);
        let cells: Vec<String> = r.c.iter().map(|&v| opt(v)).collect();
        writeln!(s, "{},{},{},{}", r.ell, r.omega_max, cells.join(","), opt(r.c_ge7)).unwrap();
    }
    s
}

fn parse_cell(cell: &str, line: usize) -> Result<Option<u128>> {
    let cell = cell.trim();
    if cell.is_empty() {
        return Ok(None);
    }
    cell.parse()
        .map(Some)
        .map_err(|_| Error::Input(format!("line {line}: bad integer {cell:?}")))
}

fn required(cell: &str, line: usize) -> Result<u128> {
    parse_cell(cell, line)?.ok_or_else(|| Error::Input(format!("line {line}: missing value")))
}

pub fn parse_census_csv(text: &str) -> Result<Vec<CensusCsvRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CENSUS_HEADER => {}
        _ => return Err(Error::Input(format!("expected header {CENSUS_HEADER:?}"))),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 10 {
            return Err(Error::Input(format!("line {}: expected 10 columns", i + 1)));
        }
        let mut c = [None; 7];
        for (k, slot) in c.iter_mut().enumerate() {
            *slot = parse_cell(cells[2 + k], i + 1)?;
        }
        out.push(CensusCsvRow {
            ell: required(cells[0], i + 1)? as u32,
            omega_max: required(cells[1], i + 1)? as usize,
            c,
            c_ge7: parse_cell(cells[9], i + 1)?,
        });
    }
    Ok(out)
}

/// One line of the gcd table: values in [`GCD_COLUMNS`] order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GcdCsvRow {
    pub ell: u32,
    pub values: [Option<u128>; 6],
}

impl GcdCsvRow {
    /// Keeps only the columns named in `shown` (use `0` for `x_3`).
    pub fn from_counts(g: &GcdCounts, shown: &[u64]) -> Self {
        let mut values = [None; 6];
        for (slot, &d) in values.iter_mut().zip(GCD_COLUMNS.iter()) {
            if shown.contains(&d) {
                *slot = if d == 0 { Some(g.x3) } else { g.get(d) };
            }
        }
        GcdCsvRow { ell: g.ell, values }
    }
}

pub fn write_gcd_csv(rows: &[GcdCsvRow]) -> String {
    let mut s = String::new();
    writeln!(s, "{GCD_HEADER}").unwrap();
    for r in rows {
        let cells: Vec<String> = r.values.iter().map(|&v| opt(v)).collect();
        writeln!(s, "{},{}", r.ell, cells.join(",")).unwrap();
    }
    s
}

pub fn parse_gcd_csv(text: &str) -> Result<Vec<GcdCsvRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == GCD_HEADER => {}
        _ => return Err(Error::Input(format!("expected header {GCD_HEADER:?}"))),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 7 {
            return Err(Error::Input(format!("line {}: expected 7 columns", i + 1)));
        }
        let mut values = [None; 6];
        for (k, slot) in values.iter_mut().enumerate() {
            *slot = parse_cell(cells[1 + k], i + 1)?;
        }
        out.push(GcdCsvRow {
            ell: required(cells[0], i + 1)? as u32,
            values,
        });
    }
    Ok(out)
}
