//! Mechanical replay of the two Hall-condition proofs: the inequality cascade
//! for squarefree numbers with many prime factors and the census-driven case
//! analysis for at most 44 prime factors.

mod few;
mod sqfr;

pub use few::{
    replay_few, replay_few_range, verify_all_few, Branch, Comparison, FewCertificate, FewSummary, Rung, Step, Term,
    FEW_MAX_ELL, FEW_MIN_ELL,
};
pub use sqfr::{
    anchor, entropy_spot_check, j_choice, kbar, verify_sqfr, verify_sqfr_range, Inequality, Relation, SqfrCertificate,
    SqfrSummary, ANALYTIC_TAIL, SQFR_MAX_ELL, SQFR_MIN_ELL,
};

/// Decimal digits in groups of three separated by commas.
pub fn group_digits(v: u128) -> String {
    let s = v.to_string();
    let mut out = String::with_capacity(s.len() + s.len() / 3);
    for (i, ch) in s.chars().enumerate() {
        if i > 0 && (s.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}
