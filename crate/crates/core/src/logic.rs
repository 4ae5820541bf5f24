//! Probabilistic modal formulas, the four fragments, and satisfaction over
//! systems and trees.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{Prob, Rplts, StateId, Symbol};
use crate::rpt::Rpt;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Top,
    Neg(Arc<Formula>),
    And(Arc<Formula>, Arc<Formula>),
    Or(Arc<Formula>, Arc<Formula>),
    Diamond(Symbol, Prob, Arc<Formula>),
}

impl Formula {
    pub fn neg(f: Formula) -> Formula {
        Formula::Neg(Arc::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Arc::new(l), Arc::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Arc::new(l), Arc::new(r))
    }

    pub fn diamond(action: impl Into<Symbol>, bound: Prob, body: Formula) -> Formula {
        Formula::Diamond(action.into(), bound, Arc::new(body))
    }

    /// `<a>1 true`, the plain "can do `a`" formula.
    pub fn can(action: impl Into<Symbol>) -> Formula {
        Formula::diamond(action, Prob::one(), Formula::Top)
    }

    /// Conjunction of the distinct operands in canonical order, folded to the
    /// left; the empty conjunction is `true`.
    pub fn and_all(operands: impl IntoIterator<Item = Formula>) -> Formula {
        let mut ops: Vec<Formula> = operands.into_iter().collect();
        ops.sort();
        ops.dedup();
        let mut it = ops.into_iter();
        match it.next() {
            None => Formula::Top,
            Some(first) => it.fold(first, Formula::and),
        }
    }

    /// Disjunction of the distinct operands in canonical order, folded to the
    /// left; `None` for an empty operand list.
    pub fn or_all(operands: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        let mut ops: Vec<Formula> = operands.into_iter().collect();
        ops.sort();
        ops.dedup();
        let mut it = ops.into_iter();
        let first = it.next()?;
        Some(it.fold(first, Formula::or))
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Top => 0,
            Formula::Neg(f) => f.depth(),
            Formula::And(l, r) | Formula::Or(l, r) => l.depth().max(r.depth()),
            Formula::Diamond(_, _, f) => 1 + f.depth(),
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::Top => 1,
            Formula::Neg(f) | Formula::Diamond(_, _, f) => 1 + f.size(),
            Formula::And(l, r) | Formula::Or(l, r) => 1 + l.size() + r.size(),
        }
    }

    pub fn has_and(&self) -> bool {
        match self {
            Formula::Top => false,
            Formula::And(..) => true,
            Formula::Neg(f) | Formula::Diamond(_, _, f) => f.has_and(),
            Formula::Or(l, r) => l.has_and() || r.has_and(),
        }
    }

    pub fn has_or(&self) -> bool {
        match self {
            Formula::Top => false,
            Formula::Or(..) => true,
            Formula::Neg(f) | Formula::Diamond(_, _, f) => f.has_or(),
            Formula::And(l, r) => l.has_or() || r.has_or(),
        }
    }

    pub fn has_neg(&self) -> bool {
        match self {
            Formula::Top => false,
            Formula::Neg(_) => true,
            Formula::Diamond(_, _, f) => f.has_neg(),
            Formula::And(l, r) | Formula::Or(l, r) => l.has_neg() || r.has_neg(),
        }
    }

    /// Operands of a left-folded chain of the same connective.
    pub fn or_operands(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        fn walk<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
            match f {
                Formula::Or(l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn and_operands(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        fn walk<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
            match f {
                Formula::And(l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    /// Every diamond bound in pre-order.
    pub fn bounds(&self) -> Vec<Prob> {
        let mut out = Vec::new();
        fn walk(f: &Formula, out: &mut Vec<Prob>) {
            match f {
                Formula::Top => {}
                Formula::Neg(g) => walk(g, out),
                Formula::And(l, r) | Formula::Or(l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                Formula::Diamond(_, p, g) => {
                    out.push(*p);
                    walk(g, out);
                }
            }
        }
        walk(self, &mut out);
        out
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::render_formula(self))
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The four fragments, named after their boolean connectives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LogicId {
    PmlNegAnd,
    PmlNegOr,
    PmlAnd,
    PmlOr,
}

impl LogicId {
    pub const ALL: [LogicId; 4] = [
        LogicId::PmlNegAnd,
        LogicId::PmlNegOr,
        LogicId::PmlAnd,
        LogicId::PmlOr,
    ];

    pub fn allows_neg(self) -> bool {
        matches!(self, LogicId::PmlNegAnd | LogicId::PmlNegOr)
    }

    pub fn allows_and(self) -> bool {
        matches!(self, LogicId::PmlNegAnd | LogicId::PmlAnd)
    }

    pub fn allows_or(self) -> bool {
        matches!(self, LogicId::PmlNegOr | LogicId::PmlOr)
    }

    /// Command-line spelling.
    pub fn flag(self) -> &'static str {
        match self {
            LogicId::PmlNegAnd => "neg-and",
            LogicId::PmlNegOr => "neg-or",
            LogicId::PmlAnd => "and",
            LogicId::PmlOr => "or",
        }
    }
}

impl fmt::Display for LogicId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogicId::PmlNegAnd => "PML_NEG_AND",
            LogicId::PmlNegOr => "PML_NEG_OR",
            LogicId::PmlAnd => "PML_AND",
            LogicId::PmlOr => "PML_OR",
        })
    }
}

impl FromStr for LogicId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        LogicId::ALL
            .into_iter()
            .find(|l| l.flag() == s || l.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown logic `{s}` (expected neg-and, neg-or, and, or)"))
    }
}

pub fn in_fragment(f: &Formula, logic: LogicId) -> bool {
    match f {
        Formula::Top => true,
        Formula::Neg(g) => logic.allows_neg() && in_fragment(g, logic),
        Formula::And(l, r) => logic.allows_and() && in_fragment(l, logic) && in_fragment(r, logic),
        Formula::Or(l, r) => logic.allows_or() && in_fragment(l, logic) && in_fragment(r, logic),
        Formula::Diamond(_, _, g) => in_fragment(g, logic),
    }
}

pub fn depth(f: &Formula) -> usize {
    f.depth()
}

/// The set of states satisfying `f`, as a membership vector.
pub fn sat_set(sys: &Rplts, f: &Formula) -> Vec<bool> {
    let n = sys.num_states();
    match f {
        Formula::Top => vec![true; n],
        Formula::Neg(g) => sat_set(sys, g).into_iter().map(|b| !b).collect(),
        Formula::And(l, r) => {
            let (l, r) = (sat_set(sys, l), sat_set(sys, r));
            l.into_iter().zip(r).map(|(x, y)| x && y).collect()
        }
        Formula::Or(l, r) => {
            let (l, r) = (sat_set(sys, l), sat_set(sys, r));
            l.into_iter().zip(r).map(|(x, y)| x || y).collect()
        }
        Formula::Diamond(a, p, g) => {
            let Some(action) = sys.action(a.as_str()) else {
                return vec![false; n];
            };
            let inner = sat_set(sys, g);
            sys.states()
                .map(|s| match sys.transition(s, action) {
                    Some(d) => d.mass_where(|t| inner[t.index()]) >= *p,
                    None => false,
                })
                .collect()
        }
    }
}

pub fn sat_state(sys: &Rplts, s: StateId, f: &Formula) -> Result<bool> {
    sys.check_state(s)?;
    Ok(sat_set(sys, f)[s.index()])
}

/// Satisfaction at the root of a tree, reading nodes as states.
pub fn sat_tree(t: &Rpt, f: &Formula) -> bool {
    match f {
        Formula::Top => true,
        Formula::Neg(g) => !sat_tree(t, g),
        Formula::And(l, r) => sat_tree(t, l) && sat_tree(t, r),
        Formula::Or(l, r) => sat_tree(t, l) || sat_tree(t, r),
        Formula::Diamond(a, p, g) => match t.children(a) {
            Some(children) => {
                let mass = children
                    .iter()
                    .filter(|(c, _)| sat_tree(c, g))
                    .map(|(_, q)| q.value())
                    .sum::<crate::model::Rational>();
                mass >= p.value()
            }
            None => false,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_formula, parse_system};

    fn f(text: &str) -> Formula {
        parse_formula(text).unwrap()
    }

    #[test]
    fn fragments() {
        assert!(!in_fragment(&f("<a>1 & <b>1"), LogicId::PmlOr));
        for l in LogicId::ALL {
            assert!(in_fragment(&f("<a>1"), l));
        }
        assert!(in_fragment(&f("<a>1.0 (<b>1 | <c>1)"), LogicId::PmlOr));
        assert!(!in_fragment(&f("!<a>1"), LogicId::PmlAnd));
        assert!(in_fragment(&f("!<a>1 & <b>1"), LogicId::PmlNegAnd));
    }

    #[test]
    fn depths() {
        assert_eq!(depth(&Formula::Top), 0);
        assert_eq!(depth(&f("<a>1 <c>1")), 2);
        assert_eq!(depth(&f("<a>1 | <b>1")), 1);
        assert_eq!(depth(&f("!<a>1 <b>1")), 2);
    }

    #[test]
    fn satisfaction_fixture_a() {
        let sys = parse_system(
            "t1 -a-> {1/2: u_bc, 1/2: u_nil}
             u_bc -b-> {1: nil}
             u_bc -c-> {1: nil}
             t2 -a-> {1/2: v_b, 1/2: v_c}
             v_b -b-> {1: nil}
             v_c -c-> {1: nil}",
        )
        .unwrap();
        let t1 = sys.state("t1").unwrap();
        let t2 = sys.state("t2").unwrap();
        let conj = f("<a>0.5 (<b>1 & <c>1)");
        assert!(sat_state(&sys, t1, &conj).unwrap());
        assert!(!sat_state(&sys, t2, &conj).unwrap());
        let disj = f("<a>1.0 (<b>1 | <c>1)");
        assert!(!sat_state(&sys, t1, &disj).unwrap());
        assert!(sat_state(&sys, t2, &disj).unwrap());
        assert!(sat_state(&sys, t1, &Formula::Top).unwrap());
        assert!(!sat_state(&sys, t1, &f("<zzz>0")).unwrap());
        assert!(sat_state(&sys, t1, &f("<a>0")).unwrap());
        assert!(!sat_state(&sys, sys.state("nil").unwrap(), &f("<a>0")).unwrap());
    }

    #[test]
    fn nil_tree_fails_diamonds() {
        assert!(!sat_tree(&Rpt::nil(), &f("<a>0.1")));
        assert!(sat_tree(&Rpt::nil(), &f("!<a>0.1")));
    }

    #[test]
    fn canonical_folds() {
        let a = f("<a>1");
        let b = f("<b>1");
        assert_eq!(
            Formula::or_all([b.clone(), a.clone(), b.clone()]),
            Formula::or_all([a.clone(), b.clone()])
        );
        assert_eq!(Formula::and_all([]), Formula::Top);
        assert_eq!(Formula::or_all([]), None);
        assert_eq!(Formula::and_all([a.clone()]), a);
    }
}
