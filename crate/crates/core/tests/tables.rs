//! Census and gcd counts recomputed from scratch against the printed tables.

use matchable_core::census::{census_tables, format_count, CensusTables, Mode, Rounding, GCD_COLUMNS};
use matchable_core::replay::replay_few;

const ODD_CENSUS: &str = include_str!("data/odd_census.csv");
const FULL_CENSUS: &str = include_str!("data/full_census.csv");
const ODD_GCDS: &str = include_str!("data/odd_gcds.csv");
const FULL_GCDS: &str = include_str!("data/full_gcds.csv");

/// Rows of printed strings keyed by their first cell.
fn printed(text: &str) -> Vec<(u32, Vec<String>)> {
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let cells: Vec<String> = l.split(',').map(str::to_string).collect();
            (cells[0].parse().unwrap(), cells[1..].to_vec())
        })
        .collect()
}

fn census_cells(t: &CensusTables) -> Vec<Option<u128>> {
    let r = &t.row;
    let mut out = vec![Some(r.omega_max as u128)];
    out.extend((0..7).map(|i| (i <= r.omega_max).then(|| r.c(i))));
    out.push((r.omega_max >= 7).then(|| r.c_ge(7)));
    out
}

fn gcd_cells(t: &CensusTables) -> Vec<u128> {
    GCD_COLUMNS
        .iter()
        .map(|&d| if d == 0 { t.gcds.x3 } else { t.gcds.get(d).unwrap() })
        .collect()
}

/// An entry agrees when it is the exact value or, for a 3-digit mantissa,
/// the value rounded to nearest.
fn agrees(cell: &str, exact: u128) -> bool {
    if cell.contains('e') {
        format_count(exact, 3, Rounding::Nearest) == cell
    } else {
        cell.parse::<u128>() == Ok(exact)
    }
}

fn check_mode(mode: Mode, census: &str, gcds: &str) {
    for (ell, cells) in printed(census) {
        let t = census_tables(ell, mode).unwrap();
        for (k, (cell, exact)) in cells.iter().zip(census_cells(&t)).enumerate() {
            match exact {
                Some(v) => assert!(agrees(cell, v), "l = {ell} {mode}, census column {k}: {cell} vs {v}"),
                None => assert!(cell.is_empty(), "l = {ell} {mode}, census column {k}: {cell} printed"),
            }
        }
    }
    for (ell, cells) in printed(gcds) {
        let t = census_tables(ell, mode).unwrap();
        for (k, (cell, exact)) in cells.iter().zip(gcd_cells(&t)).enumerate() {
            assert!(
                cell.is_empty() || agrees(cell, exact),
                "l = {ell} {mode}, gcd column {k}: {cell} vs {exact}"
            );
        }
    }
}

#[test]
fn odd_tables() {
    check_mode(Mode::Odd, ODD_CENSUS, ODD_GCDS);
}

#[test]
fn full_tables() {
    check_mode(Mode::Full, FULL_CENSUS, FULL_GCDS);
}

#[test]
fn quoted_entries() {
    let t = census_tables(24, Mode::Odd).unwrap();
    assert_eq!(t.row.c(4), 396_604);
    assert_eq!(t.gcds.get(15), Some(504_881));
    assert_eq!(t.gcds.x3, 6_334_949);
    assert_eq!(t.gcds.get(3), Some(2_019_785));
}

/// The printed gcd tables show exactly the columns the case analysis consults.
#[test]
fn printed_columns_are_the_consulted_ones() {
    for (mode, text) in [(Mode::Odd, ODD_GCDS), (Mode::Full, FULL_GCDS)] {
        for (ell, cells) in printed(text).into_iter().filter(|(l, _)| *l <= 44) {
            let t = census_tables(ell, mode).unwrap();
            let cert = replay_few(ell, mode, &t.row, &t.gcds).unwrap();
            let names = ["gcd105", "gcd15", "gcd21", "gcd3", "x3", "gcd5"];
            let shown: Vec<String> = names
                .iter()
                .zip(&cells)
                .filter(|(_, c)| !c.is_empty())
                .map(|(n, _)| n.to_string())
                .collect();
            assert_eq!(cert.needed, shown, "l = {ell} {mode}");
        }
    }
}
