//! Probabilistic bisimilarity for reactive probabilistic transition systems,
//! with distinguishing-formula synthesis for four probabilistic modal logics.
//!
//! The pipeline: [`parser`] reads a system, [`bisim`] decides bisimilarity by
//! partition refinement, [`rpt`] unfolds states into canonical trees, and
//! [`synth`] builds a formula in the requested fragment that holds in exactly
//! one of two non-bisimilar states. [`oracle`] holds the brute-force checks
//! used by the test suites.

pub mod bisim;
pub mod error;
pub mod logic;
pub mod model;
pub mod oracle;
pub mod parser;
pub mod report;
pub mod rpt;
pub mod synth;

pub use bisim::{bisim_partition, bisimilar, Partition};
pub use error::{Error, Result, SourceSpan};
pub use logic::{depth, in_fragment, sat_state, sat_tree, Formula, LogicId};
pub use model::{dist_mass, make_dist, validate_rplts, ActionId, Dist, Prob, Rational, Rplts, StateId, Symbol};
pub use parser::{parse_formula, parse_system, render_formula, render_system};
pub use rpt::{collapse, height, prune, rpt_equal, semantic_eq, truncate, unfold, RawTree, Rpt};
pub use synth::{distinguish_states, distinguish_trees, Distinction, Side, Synthesizer};
