//! Machine-readable results of the command-line front end.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::logic::LogicId;
use crate::synth::Side;

/// Version of the JSON layout of [`Report`].
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Bisimilar,
    Distinguished,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Bisimilar => "bisimilar",
            Verdict::Distinguished => "distinguished",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub verdict: Verdict,
    /// Canonical text of the distinguishing formula.
    pub formula: Option<String>,
    /// Which of the two states satisfies `formula`.
    pub holds_in: Option<Side>,
    pub logic: Option<LogicId>,
    pub depth: Option<usize>,
    /// Least unfolding level at which the states differ.
    pub minimal_level: Option<usize>,
    /// Milliseconds spent per phase.
    pub timings: BTreeMap<String, f64>,
}

impl Report {
    pub fn bisimilar(logic: Option<LogicId>) -> Self {
        Report {
            schema: SCHEMA_VERSION,
            verdict: Verdict::Bisimilar,
            formula: None,
            holds_in: None,
            logic,
            depth: None,
            minimal_level: None,
            timings: BTreeMap::new(),
        }
    }

    pub fn distinguished(logic: Option<LogicId>) -> Self {
        Report {
            verdict: Verdict::Distinguished,
            ..Report::bisimilar(logic)
        }
    }

    /// Checks that a formula is present exactly for distinguished pairs.
    pub fn is_consistent(&self) -> bool {
        (self.verdict == Verdict::Distinguished) == self.formula.is_some()
            || (self.logic.is_none() && self.formula.is_none())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let mut r = Report::distinguished(Some(LogicId::PmlOr));
        r.formula = Some("<a>1/2 <b>1".into());
        r.holds_in = Some(Side::Second);
        r.depth = Some(2);
        r.minimal_level = Some(2);
        r.timings.insert("synth".into(), 0.25);
        let text = r.to_json();
        assert!(text.contains("\"PML_OR\""));
        assert!(text.contains("\"distinguished\""));
        assert_eq!(Report::from_json(&text).unwrap(), r);
        assert!(r.is_consistent());
        assert!(Report::bisimilar(None).is_consistent());
    }
}
