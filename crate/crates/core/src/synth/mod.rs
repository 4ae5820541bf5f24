//! Distinguishing-formula synthesis for the four fragments.
//!
//! The negation fragments follow a direct induction on tree height. The
//! negation-free fragments pick a derivative whose Φ-set has no (≤,<)-variant
//! among the other differing derivatives and combine witnesses drawn from the
//! Φ-sets. When a Φ-set is too large to enumerate, or a witness is missing,
//! the synthesizer tries the remaining candidates and finally an exhaustive
//! search; both events are counted in [`SynthStats`].

mod distinguish;
mod phi;
mod search;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::logic::{Formula, LogicId};
use crate::model::{Rplts, StateId};
use crate::rpt::Rpt;

pub use distinguish::{SplitSupport, SynthStats, Synthesizer};
pub use phi::{is_le_lt_variant, phi_and, phi_or, FormulaSkeleton, PhiBuilder, PhiSet, DEFAULT_BUDGET};
pub use search::separate;

/// Which of the two compared inputs satisfies a formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    First,
    Second,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::First => Side::Second,
            Side::Second => Side::First,
        }
    }
}

/// A formula together with the input that satisfies it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distinction {
    pub formula: Formula,
    pub holds_in: Side,
}

/// A formula of `logic` satisfied by exactly one of the trees, or `None` when
/// they are equal.
pub fn distinguish_trees(t1: &Rpt, t2: &Rpt, logic: LogicId) -> Option<Formula> {
    Synthesizer::new()
        .distinguish(t1, t2, logic)
        .map(|d| d.formula)
}

/// A formula of `logic` satisfied by exactly one of the states, or `None` when
/// they are bisimilar. The formula's depth is at most the least level at which
/// the states' unfoldings differ.
pub fn distinguish_states(
    sys: &Rplts,
    s1: StateId,
    s2: StateId,
    logic: LogicId,
) -> Result<Option<Formula>> {
    Ok(Synthesizer::new()
        .distinguish_states(sys, s1, s2, logic)?
        .map(|(d, _)| d.formula))
}
