//! A single JSON envelope for every certificate the toolkit emits, so one
//! checker can validate any of them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcher::{Decision, HallWitness, MatchingCertificate, Prop21Proof, StrongDecision};
use crate::partition::PartitionCertificate;
use crate::replay::{FewCertificate, SqfrCertificate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "certificate", rename_all = "snake_case")]
pub enum Certificate {
    Matching(MatchingCertificate),
    Hall(HallWitness),
    Prop21(Prop21Proof),
    Decision(Decision),
    Partition(PartitionCertificate),
    Sqfr(SqfrCertificate),
    Few(FewCertificate),
    Strong(StrongDecision),
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::Matching(_) => "matching",
            Certificate::Hall(_) => "hall",
            Certificate::Prop21(_) => "prop21",
            Certificate::Decision(_) => "decision",
            Certificate::Partition(_) => "partition",
            Certificate::Sqfr(_) => "sqfr",
            Certificate::Few(_) => "few",
            Certificate::Strong(_) => "strong",
        }
    }

    /// Validates from the stored data alone and describes what was shown.
    pub fn verify(&self) -> Result<String> {
        let as_validation = |e: Error| match e {
            Error::Validation(_) => e,
            other => Error::validation(other.to_string()),
        };
        let summary = match self {
            Certificate::Matching(c) => {
                c.validate().map_err(as_validation)?;
                format!("coprime matching with {} pairs", c.pairs.len())
            }
            Certificate::Hall(w) => {
                w.validate().map_err(as_validation)?;
                format!(
                    "Hall violation: |S| = {} > |N(S)| = {}",
                    w.set.len(),
                    w.neighborhood_size
                )
            }
            Certificate::Prop21(p) => {
                p.validate().map_err(as_validation)?;
                format!("{} is not matchable ({p})", p.n)
            }
            Certificate::Decision(d) => {
                d.validate().map_err(as_validation)?;
                format!("{} is {}", d.n, if d.matchable { "matchable" } else { "not matchable" })
            }
            Certificate::Partition(p) => {
                p.validate().map_err(as_validation)?;
                format!("partition into {} blocks", p.blocks.len())
            }
            Certificate::Sqfr(c) => {
                c.check().map_err(as_validation)?;
                format!("l = {}: {} inequalities hold", c.ell, c.inequalities().count())
            }
            Certificate::Few(c) => {
                c.check().map_err(as_validation)?;
                format!("l = {}, {} mode: every case closed", c.ell, c.mode)
            }
            Certificate::Strong(d) => {
                d.validate().map_err(as_validation)?;
                format!(
                    "{} is {}strongly matchable ({} classes)",
                    d.n,
                    if d.strong { "" } else { "not " },
                    d.classes_checked
                )
            }
        };
        Ok(format!("valid {} certificate: {summary}", self.kind()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("not a certificate: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcher::{is_matchable, Descriptor};

    #[test]
    fn round_trips() {
        let certs = [
            Certificate::Decision(is_matchable(8).unwrap()),
            Certificate::Decision(is_matchable(30).unwrap()),
            Certificate::Matching(MatchingCertificate {
                domain: Descriptor::Divisors { n: 2 },
                codomain: Descriptor::interval(2),
                pairs: vec![(1, 2), (2, 1)],
            }),
            Certificate::Strong(crate::matcher::decide_strong(4).unwrap()),
            Certificate::Sqfr(crate::replay::verify_sqfr(45).unwrap()),
        ];
        for c in certs {
            let text = c.to_json();
            let back = Certificate::from_json(&text).unwrap();
            assert_eq!(back, c);
            back.verify().unwrap();
        }
    }

    #[test]
    fn tampered_pair_is_named() {
        let mut c = MatchingCertificate {
            domain: Descriptor::Divisors { n: 2 },
            codomain: Descriptor::interval(2),
            pairs: vec![(1, 2), (2, 1)],
        };
        c.pairs[1] = (2, 2);
        let err = Certificate::Matching(c).verify().unwrap_err();
        assert!(err.to_string().contains("(2, 2)"), "{err}");
    }

    #[test]
    fn inconsistent_decision() {
        let mut d = is_matchable(6).unwrap();
        d.matchable = false;
        assert!(Certificate::Decision(d).verify().is_err());
    }
}
