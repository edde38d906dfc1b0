use std::fs;
use std::path::Path;

use matchable_core::arith::interval::truncate_decimal;
use matchable_core::arith::{alpha_digits, factorize, strong_density_bound};
use matchable_core::census::{
    self, bundled, format_row, write_census_csv, write_gcd_csv, CensusRow, DataStore, GcdCsvRow, Mode, Rounding,
};
use matchable_core::certificate::Certificate;
use matchable_core::matcher::{
    decide_strong, is_matchable, match_via_partition, mp_matching, Decision, Evidence, MatchOutcome, Route,
};
use matchable_core::replay::{
    anchor, entropy_spot_check, replay_few_range, verify_sqfr, verify_sqfr_range, ANALYTIC_TAIL, SQFR_MAX_ELL,
    SQFR_MIN_ELL,
};
use matchable_core::Error;

use crate::{CensusArgs, DecideArgs, Failure, MatchArgs, ModeArg, Outcome, ReplayFewArgs, ReplaySqfrArgs};

fn parse_n(s: &str) -> Result<u128, Failure> {
    match s.trim().parse::<u128>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(Failure::Usage(format!("{s:?} is not a positive integer below 2^128"))),
    }
}

fn write_cert(path: &Path, cert: &Certificate) -> Outcome {
    fs::write(path, cert.to_json() + "\n")?;
    println!("certificate written to {}", path.display());
    Ok(())
}

fn describe(d: &Decision) -> String {
    match &d.evidence {
        Evidence::Prop21(p) => format!("not matchable ({p})"),
        Evidence::Hall(w) => format!(
            "not matchable (Hall witness: |S| = {} > |N(S)| = {})",
            w.set.len(),
            w.neighborhood_size
        ),
        Evidence::Matching(c) => {
            let route = match d.route {
                Route::Partition => "partition construction",
                _ => "exhaustive search",
            };
            format!("matchable ({route}, {} pairs verified)", c.pairs.len())
        }
    }
}

pub fn decide(a: &DecideArgs) -> Outcome {
    let n = parse_n(&a.n)?;
    let d = is_matchable(n)?;
    d.validate()?;
    println!("{}", describe(&d));
    if let Some(out) = &a.out {
        write_cert(out, &Certificate::Decision(d))?;
    }
    Ok(())
}

pub fn matching(a: &MatchArgs) -> Outcome {
    let n = parse_n(&a.n)?;
    let tau = factorize(n)?.tau();
    let cert = if a.via_partition {
        match match_via_partition(n, a.j)? {
            MatchOutcome::Matching(c) => {
                println!(
                    "matching of D({n}) onto [1, {tau}] with {} pairs (partition route)",
                    c.pairs.len()
                );
                Certificate::Matching(c)
            }
            MatchOutcome::Hall(w) => {
                println!(
                    "a partition block has no matching: |S| = {} > |N(S)| = {}",
                    w.set.len(),
                    w.neighborhood_size
                );
                Certificate::Hall(w)
            }
        }
    } else {
        let d = is_matchable(n)?;
        println!("{}", describe(&d));
        match d.evidence {
            Evidence::Matching(c) => Certificate::Matching(c),
            Evidence::Hall(w) => Certificate::Hall(w),
            Evidence::Prop21(p) => Certificate::Prop21(p),
        }
    };
    cert.verify()?;
    if let Some(out) = &a.out {
        write_cert(out, &cert)?;
    }
    Ok(())
}

pub fn verify_cert(file: &Path) -> Outcome {
    let text = fs::read_to_string(file)?;
    let cert = Certificate::from_json(&text)?;
    let summary = cert.verify()?;
    println!("{summary}");
    Ok(())
}

pub fn mp(p: u64, out: Option<&Path>, pairs: bool) -> Outcome {
    let cert = mp_matching(p)?;
    let m = match cert.domain {
        matchable_core::matcher::Descriptor::Divisors { n } => n,
        _ => unreachable!("mp matchings have a divisor domain"),
    };
    println!(
        "M_{p} = {}: D(M_{p}) matched to [1, {}] by j -> prod q^(j mod q); {} pairs verified",
        factorize(m)?,
        cert.pairs.len(),
        cert.pairs.len()
    );
    if pairs {
        for (d, j) in &cert.pairs {
            println!("{d} {j}");
        }
    }
    if let Some(out) = out {
        write_cert(out, &Certificate::Matching(cert))?;
    }
    Ok(())
}

fn gcd_columns(names: &[String]) -> Vec<u64> {
    names
        .iter()
        .map(|n| match n.as_str() {
            "x3" => 0,
            other => other.trim_start_matches("gcd").parse().unwrap_or(0),
        })
        .collect()
}

pub fn census(a: &CensusArgs) -> Outcome {
    let mode: Mode = a.mode.into();
    let store = bundled()?;
    let mut tables = Vec::new();
    for ell in a.ell.clone() {
        tables.push(store.tables(ell, mode, a.recompute)?);
    }
    let rows: Vec<CensusRow> = tables.iter().map(|t| t.row.clone()).collect();
    let text = if a.display {
        let mut s = String::from(census::CENSUS_HEADER);
        s.push('\n');
        for r in &rows {
            s.push_str(&format_row(r, 3, Rounding::Nearest).join(","));
            s.push('\n');
        }
        s
    } else {
        write_census_csv(&rows)
    };
    match &a.out {
        Some(p) => {
            fs::write(p, &text)?;
            println!("{} census rows written to {}", rows.len(), p.display());
        }
        None => print!("{text}"),
    }
    if let Some(p) = &a.gcd_out {
        let mut gcd_rows = Vec::new();
        for t in &tables {
            let shown = match replay_few_range(t.row.ell..=t.row.ell, mode, &store, a.recompute) {
                Ok(r) => gcd_columns(&r[0].0.needed),
                Err(Error::Range(_)) => vec![105, 15, 21, 3, 0, 5],
                Err(e) => return Err(e.into()),
            };
            gcd_rows.push(GcdCsvRow::from_counts(&t.gcds, &shown));
        }
        fs::write(p, write_gcd_csv(&gcd_rows))?;
        println!("{} gcd rows written to {}", gcd_rows.len(), p.display());
    }
    if let Some(dir) = &a.save_data {
        let mut out = DataStore::load_dir(dir).unwrap_or_default();
        for t in tables {
            out.insert(t);
        }
        out.save_dir(dir)?;
        println!("{} tables stored in {}", out.len(), dir.display());
    }
    Ok(())
}

pub fn gcds(ell: u32, mode: Mode, ds: &[u64], recompute: bool) -> Outcome {
    let store = bundled()?;
    let stored = store.tables(ell, mode, recompute)?;
    let g = if ds.iter().all(|&d| stored.gcds.get(d).is_some()) {
        stored.gcds
    } else {
        census::gcd_counts(ell, mode, ds)?
    };
    println!("d,count");
    for &d in ds {
        let v = g
            .get(d)
            .ok_or_else(|| Failure::Verification(format!("gcd_{d} was not computed")))?;
        println!("{d},{v}");
    }
    println!("x3,{}", g.x3);
    Ok(())
}

pub fn replay_few(a: &ReplayFewArgs) -> Outcome {
    let modes = match a.mode {
        Some(m) => vec![Mode::from(m)],
        None => vec![Mode::from(ModeArg::Odd), Mode::from(ModeArg::Full)],
    };
    let store = bundled()?;
    if let Some(dir) = &a.out_dir {
        fs::create_dir_all(dir)?;
    }
    let (mut pass, mut fail) = (0, 0);
    for mode in modes {
        for (cert, summary) in replay_few_range(a.ell.clone(), mode, &store, a.recompute)? {
            if a.explain {
                print!("{}", cert.explain());
            }
            let verdict = if summary.valid { "pass" } else { "FAIL" };
            let cols = if summary.needed.is_empty() {
                "none".to_string()
            } else {
                summary.needed.join(",")
            };
            println!("l = {}, {mode}: {verdict} (gcd columns: {cols})", summary.ell);
            if summary.valid {
                pass += 1;
            } else {
                fail += 1;
            }
            if let Some(dir) = &a.out_dir {
                let path = dir.join(format!("few-{mode}-{}.json", summary.ell));
                fs::write(path, Certificate::Few(cert).to_json() + "\n")?;
            }
        }
    }
    println!("{pass} passed, {fail} failed");
    if fail > 0 {
        return Err(Failure::Verification(format!("{fail} replays failed")));
    }
    Ok(())
}

pub fn replay_sqfr(a: &ReplaySqfrArgs) -> Outcome {
    let (lo, hi) = (*a.ell.start(), *a.ell.end());
    if lo < SQFR_MIN_ELL || hi > SQFR_MAX_ELL {
        return Err(Failure::Usage(format!(
            "l must lie in [{SQFR_MIN_ELL}, {SQFR_MAX_ELL}], got {lo}..{hi}"
        )));
    }
    let anchor = anchor();
    println!("{anchor}");
    let mut failed: Vec<u32> = Vec::new();
    if a.explain || a.out_dir.is_some() {
        if let Some(dir) = &a.out_dir {
            fs::create_dir_all(dir)?;
        }
        for ell in lo..=hi {
            let c = verify_sqfr(ell)?;
            let ok = c.valid && c.check().is_ok();
            if a.explain {
                println!(
                    "l = {ell}: j = {}, kbar = {}, f = {}",
                    c.j,
                    c.kbar,
                    truncate_decimal(&c.f_bound, 6)
                );
                for i in c.inequalities() {
                    println!("  {i}");
                }
            } else if a.verbose {
                println!(
                    "l = {ell}: j = {}, kbar = {}: {}",
                    c.j,
                    c.kbar,
                    if ok { "pass" } else { "FAIL" }
                );
            }
            if !ok {
                failed.push(ell);
            }
            if let Some(dir) = &a.out_dir {
                fs::write(
                    dir.join(format!("sqfr-{ell}.json")),
                    Certificate::Sqfr(c).to_json() + "\n",
                )?;
            }
        }
    } else {
        for s in verify_sqfr_range(lo, hi)? {
            if a.verbose || !s.valid {
                let verdict = if s.valid {
                    "pass".to_string()
                } else {
                    format!("FAIL: {}", s.failures.join("; "))
                };
                println!(
                    "l = {}: j = {}, kbar = {}, {} inequalities: {verdict}",
                    s.ell, s.j, s.kbar, s.inequalities
                );
            }
            if !s.valid {
                failed.push(s.ell);
            }
        }
    }
    if a.entropy {
        let checks = entropy_spot_check(192)?;
        let ok = checks.iter().all(|i| i.holds);
        println!(
            "entropy spot check at l = 192: E_k < -1.03 for k = 4..={}: {}",
            checks.last().and_then(|i| i.k).unwrap_or(3),
            if ok { "pass" } else { "FAIL" }
        );
        if !ok {
            failed.push(192);
        }
    }
    let total = hi - lo + 1;
    println!(
        "l = {lo}..{hi}: {} of {total} verified",
        total as usize - failed.len().min(total as usize)
    );
    println!("{ANALYTIC_TAIL}");
    if !anchor.holds || !failed.is_empty() {
        return Err(Failure::Verification(format!(
            "verification failed for l in {failed:?}"
        )));
    }
    Ok(())
}

pub fn alpha(digits: u32) -> Outcome {
    let (s, approx) = alpha_digits(digits)?;
    println!("{s}");
    println!(
        "certified: alpha in [{}, {}], partial product over p <= {} with tail bound 2 P^-P",
        truncate_decimal(&approx.lower, digits + 4),
        truncate_decimal(&approx.upper, digits + 4),
        approx.truncation_prime
    );
    Ok(())
}

pub fn strong(n: &str, out: Option<&Path>) -> Outcome {
    let n = parse_n(n)?;
    let d = decide_strong(n)?;
    d.validate()?;
    match &d.failure {
        None => println!(
            "strongly matchable: every coprime progression class mod rad(n) matched ({} classes)",
            d.classes_checked
        ),
        Some((c, w)) => println!(
            "not strongly matchable: class start = {} (mod {m}), step = {} (mod {m}) fails at {} + k*{}; |S| = {} > |N(S)| = {}",
            c.a0,
            c.q0,
            c.start,
            c.step,
            w.set.len(),
            w.neighborhood_size,
            m = c.modulus
        ),
    }
    if let Some(out) = out {
        write_cert(out, &Certificate::Strong(d))?;
    }
    Ok(())
}

pub fn strong_density(digits: u32) -> Outcome {
    let sd = strong_density_bound();
    let r = sd.report(digits);
    let fine = sd.report(digits + 6);
    println!("density of T (prefix): {}", r.density_t);
    println!("tail (certified upper bound): {}", fine.tail_upper);
    println!("density of T' (lower bound): {}", r.lower_t_prime);
    println!("boost factor (reconstruction): (3/2)(10/9)(626/625)(117650/117649)");
    println!("boosted lower bound: {}", r.boosted);
    Ok(())
}
