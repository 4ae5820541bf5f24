use std::cmp::Reverse;
use std::collections::HashMap;
use std::sync::Arc;

use crate::error::Result;
use crate::logic::{sat_tree, Formula, LogicId};
use crate::model::{Prob, Rational, Rplts, StateId, Symbol};
use crate::rpt::{minimal_level, unfold_all, Rpt};

use super::phi::{is_le_lt_variant, PhiBuilder, PhiSet, DEFAULT_BUDGET};
use super::{search, Distinction, Side};

/// The successors two nodes reach under one action, split by whether both
/// distributions agree on them.
#[derive(Debug, Clone)]
pub struct SplitSupport {
    pub action: Symbol,
    first: Vec<(Rpt, Prob)>,
    second: Vec<(Rpt, Prob)>,
    /// Nodes with different probabilities, in canonical order.
    pub supp_neq: Vec<Rpt>,
    /// Nodes with equal probabilities, in canonical order.
    pub supp_eq: Vec<Rpt>,
}

impl SplitSupport {
    pub fn new(action: Symbol, first: &[(Rpt, Prob)], second: &[(Rpt, Prob)]) -> Self {
        let mut support: Vec<Rpt> = first.iter().chain(second).map(|(c, _)| c.clone()).collect();
        support.sort();
        support.dedup();
        let mut split = SplitSupport {
            action,
            first: first.to_vec(),
            second: second.to_vec(),
            supp_neq: Vec::new(),
            supp_eq: Vec::new(),
        };
        for c in support {
            if split.mass(Side::First, &c) == split.mass(Side::Second, &c) {
                split.supp_eq.push(c);
            } else {
                split.supp_neq.push(c);
            }
        }
        split
    }

    pub fn mass(&self, side: Side, node: &Rpt) -> Prob {
        let dist = match side {
            Side::First => &self.first,
            Side::Second => &self.second,
        };
        dist.iter()
            .find(|(c, _)| c == node)
            .map(|(_, p)| *p)
            .unwrap_or_else(Prob::zero)
    }

    /// The side giving `node` the larger probability.
    fn heavier(&self, node: &Rpt) -> Side {
        if self.mass(Side::First, node) > self.mass(Side::Second, node) {
            Side::First
        } else {
            Side::Second
        }
    }

    /// Mass on the agreeing nodes selected by `pred` (the same for both sides).
    fn eq_mass(&self, mut pred: impl FnMut(&Rpt) -> bool) -> Prob {
        let total: Rational = self
            .supp_eq
            .iter()
            .filter(|c| pred(c))
            .map(|c| self.mass(Side::First, c).value())
            .sum();
        Prob::from_rational(total).expect("sub-mass of a distribution")
    }
}

/// Counters describing how results were obtained.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SynthStats {
    /// Inductive steps that used the preferred candidate derivative.
    pub preferred: usize,
    /// Steps where the preferred derivative lacked a witness and another
    /// candidate was used instead.
    pub alternate: usize,
    /// Steps answered by the exhaustive search.
    pub searched: usize,
}

impl SynthStats {
    pub fn merge(&mut self, other: &SynthStats) {
        self.preferred += other.preferred;
        self.alternate += other.alternate;
        self.searched += other.searched;
    }
}

/// Synthesis session: memoizes Φ-sets and results across calls.
pub struct Synthesizer {
    or_sets: PhiBuilder,
    and_sets: PhiBuilder,
    memo: HashMap<(Rpt, Rpt, LogicId), Distinction>,
    stats: SynthStats,
}

impl Default for Synthesizer {
    fn default() -> Self {
        Self::new()
    }
}

fn min_formula<'a>(fs: impl Iterator<Item = &'a Formula>) -> Option<&'a Formula> {
    fs.min_by(|x, y| (x.depth(), x.size(), *x).cmp(&(y.depth(), y.size(), *y)))
}

impl Synthesizer {
    pub fn new() -> Self {
        Self::with_budget(DEFAULT_BUDGET)
    }

    /// `budget` caps the candidates enumerated per Φ-set.
    pub fn with_budget(budget: usize) -> Self {
        Synthesizer {
            or_sets: PhiBuilder::new(LogicId::PmlOr, budget),
            and_sets: PhiBuilder::new(LogicId::PmlAnd, budget),
            memo: HashMap::new(),
            stats: SynthStats::default(),
        }
    }

    pub fn stats(&self) -> SynthStats {
        self.stats
    }

    /// A formula of `logic` telling `t1` from `t2`, or `None` if they are equal.
    pub fn distinguish(&mut self, t1: &Rpt, t2: &Rpt, logic: LogicId) -> Option<Distinction> {
        if t1 == t2 {
            return None;
        }
        let key = (t1.clone(), t2.clone(), logic);
        if let Some(hit) = self.memo.get(&key) {
            return Some(hit.clone());
        }
        let d = self.step(t1, t2, logic);
        debug_assert!(
            {
                let (yes, no) = match d.holds_in {
                    Side::First => (t1, t2),
                    Side::Second => (t2, t1),
                };
                sat_tree(yes, &d.formula) && !sat_tree(no, &d.formula)
            },
            "unsound result {} for {logic}",
            d.formula
        );
        self.memo.insert(key, d.clone());
        Some(d)
    }

    /// Distinguish two states at the least level where their unfoldings
    /// differ; returns the distinction and that level.
    pub fn distinguish_states(
        &mut self,
        sys: &Rplts,
        s1: StateId,
        s2: StateId,
        logic: LogicId,
    ) -> Result<Option<(Distinction, usize)>> {
        let Some(n) = minimal_level(sys, s1, s2)? else {
            return Ok(None);
        };
        let level = unfold_all(sys, n);
        let d = self
            .distinguish(&level[s1.index()], &level[s2.index()], logic)
            .expect("unfoldings differ at the minimal level");
        Ok(Some((d, n)))
    }

    fn step(&mut self, t1: &Rpt, t2: &Rpt, logic: LogicId) -> Distinction {
        if let Some(d) = init_difference(t1, t2) {
            return orient(d, logic);
        }
        match logic {
            LogicId::PmlNegAnd | LogicId::PmlNegOr => self.negation_step(t1, t2, logic),
            LogicId::PmlOr | LogicId::PmlAnd => self.positive_step(t1, t2, logic),
        }
    }

    /// Both negation fragments: pick the first derivative `t'` that `t1`
    /// reaches with higher probability and separate it from every other
    /// derivative of `t2`.
    fn negation_step(&mut self, t1: &Rpt, t2: &Rpt, logic: LogicId) -> Distinction {
        let split = &differing_actions(t1, t2)[0];
        let pivot = split
            .supp_neq
            .iter()
            .find(|c| split.heavier(c) == Side::First)
            .expect("distinct distributions have a node with a larger first mass")
            .clone();
        let others: Vec<Rpt> = split
            .second
            .iter()
            .map(|(c, _)| c.clone())
            .filter(|c| *c != pivot)
            .collect();
        let parts: Vec<Formula> = others
            .iter()
            .map(|y| {
                self.distinguish(&pivot, y, logic)
                    .expect("distinct nodes")
                    .formula
            })
            .collect();
        let action = split.action.clone();
        if logic == LogicId::PmlNegAnd {
            let bound = split.mass(Side::First, &pivot);
            Distinction {
                formula: Formula::diamond(action, bound, Formula::and_all(parts)),
                holds_in: Side::First,
            }
        } else {
            let bound = split.mass(Side::Second, &pivot).complement();
            let body = Formula::or_all(parts).expect("t2 reaches another node");
            Distinction {
                formula: Formula::diamond(action, bound, body),
                holds_in: Side::Second,
            }
        }
    }

    fn phi(&mut self, t: &Rpt, logic: LogicId) -> Option<Arc<PhiSet>> {
        match logic {
            LogicId::PmlOr => self.or_sets.get(t),
            _ => self.and_sets.get(t),
        }
    }

    /// Φ-sets of the differing derivatives, or `None` if any is too large.
    fn phi_sets(&mut self, split: &SplitSupport, logic: LogicId) -> Option<Vec<Arc<PhiSet>>> {
        split.supp_neq.iter().map(|c| self.phi(c, logic)).collect()
    }

    /// Candidate derivatives in order of preference: first those without
    /// (≤,<)-variants, ranked by Φ-set cardinality (smallest for PML∨,
    /// largest for PML∧) with ties going to the greatest canonical node; then
    /// the rest in the same order.
    fn candidates(split: &SplitSupport, sets: &[Arc<PhiSet>], logic: LogicId) -> Vec<usize> {
        let n = split.supp_neq.len();
        let survives = |x: usize| {
            (0..n).filter(|&y| y != x).all(|y| match logic {
                LogicId::PmlOr => !is_le_lt_variant(&sets[y], &sets[x]),
                _ => !is_le_lt_variant(&sets[x], &sets[y]),
            })
        };
        let survivors: Vec<bool> = (0..n).map(survives).collect();
        assert!(
            survivors.iter().any(|s| *s),
            "every differing derivative has a (<=,<)-variant among the others"
        );
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| {
            let rank = |i: usize| {
                let size = match logic {
                    LogicId::PmlOr => sets[i].len() as i64,
                    _ => -(sets[i].len() as i64),
                };
                (!survivors[i], size, Reverse(&split.supp_neq[i]))
            };
            rank(x).cmp(&rank(y))
        });
        order
    }

    fn positive_step(&mut self, t1: &Rpt, t2: &Rpt, logic: LogicId) -> Distinction {
        let splits = differing_actions(t1, t2);
        let mut first_try = true;
        for split in &splits {
            let Some(sets) = self.phi_sets(split, logic) else {
                first_try = false;
                continue;
            };
            for pick in Self::candidates(split, &sets, logic) {
                let built = match logic {
                    LogicId::PmlOr => or_formula(split, pick, &sets),
                    _ => and_formula(split, pick, &sets),
                };
                if let Some(d) = built {
                    if first_try {
                        self.stats.preferred += 1;
                    } else {
                        self.stats.alternate += 1;
                    }
                    return d;
                }
                first_try = false;
            }
        }
        self.stats.searched += 1;
        search::separate(t1, t2, logic).unwrap_or_else(|| {
            panic!("no {logic} formula found for distinct trees {t1:?} and {t2:?}")
        })
    }
}

/// `<a>1` for the least action enabled on exactly one side.
fn init_difference(t1: &Rpt, t2: &Rpt) -> Option<Distinction> {
    let a1: Vec<&Symbol> = t1.actions().collect();
    let a2: Vec<&Symbol> = t2.actions().collect();
    if a1 == a2 {
        return None;
    }
    let only1 = a1.iter().filter(|a| !a2.contains(a)).min();
    let only2 = a2.iter().filter(|a| !a1.contains(a)).min();
    let (action, holds_in) = match (only1, only2) {
        (Some(x), Some(y)) if y < x => (*y, Side::Second),
        (Some(x), _) => (*x, Side::First),
        (None, Some(y)) => (*y, Side::Second),
        (None, None) => unreachable!("action lists differ"),
    };
    Some(Distinction {
        formula: Formula::can(action.clone()),
        holds_in,
    })
}

/// In the negation fragments, put the satisfying side where the induction
/// expects it: `t1` for PML¬∧ and `t2` for PML¬∨.
fn orient(d: Distinction, logic: LogicId) -> Distinction {
    let wanted = match logic {
        LogicId::PmlNegAnd => Side::First,
        LogicId::PmlNegOr => Side::Second,
        _ => return d,
    };
    if d.holds_in == wanted {
        d
    } else {
        Distinction {
            formula: Formula::neg(d.formula),
            holds_in: wanted,
        }
    }
}

/// Actions (with equal enabled sets) whose distributions differ, in order.
fn differing_actions(t1: &Rpt, t2: &Rpt) -> Vec<SplitSupport> {
    let splits: Vec<SplitSupport> = t1
        .succ()
        .iter()
        .zip(t2.succ())
        .filter(|((_, c1), (_, c2))| c1 != c2)
        .map(|((a, c1), (_, c2))| SplitSupport::new(a.clone(), c1, c2))
        .collect();
    assert!(!splits.is_empty(), "distinct trees with equal actions differ somewhere");
    splits
}

/// PML∨: the chosen derivative `m` must satisfy none of the witnesses, each
/// drawn from the Φ∨-set of another differing derivative the lighter side
/// reaches. The lighter side satisfies the result.
fn or_formula(split: &SplitSupport, m: usize, sets: &[Arc<PhiSet>]) -> Option<Distinction> {
    let pivot = &split.supp_neq[m];
    let heavy = split.heavier(pivot);
    let light = heavy.flip();
    let mut witnesses = Vec::new();
    for (j, y) in split.supp_neq.iter().enumerate() {
        if j == m || split.mass(light, y).is_zero() {
            continue;
        }
        let w = min_formula(sets[j].formulas().iter().filter(|f| !sat_tree(pivot, f)))?;
        witnesses.push(w.clone());
    }
    let body = Formula::or_all(witnesses).expect("the lighter side reaches another node");
    let missed = split.eq_mass(|c| !sat_tree(c, &body));
    let excluded = split
        .mass(light, pivot)
        .checked_add(missed)
        .expect("disjoint masses");
    Some(Distinction {
        formula: Formula::diamond(split.action.clone(), excluded.complement(), body),
        holds_in: light,
    })
}

/// PML∧: every witness comes from the chosen derivative's own Φ∧-set and
/// fails in one other differing derivative. The heavier side satisfies the
/// result.
fn and_formula(split: &SplitSupport, m: usize, sets: &[Arc<PhiSet>]) -> Option<Distinction> {
    let pivot = &split.supp_neq[m];
    let heavy = split.heavier(pivot);
    let light = heavy.flip();
    let mut witnesses = Vec::new();
    for (j, y) in split.supp_neq.iter().enumerate() {
        if j == m || split.mass(light, y).is_zero() {
            continue;
        }
        let w = min_formula(sets[m].formulas().iter().filter(|f| !sat_tree(y, f)))?;
        witnesses.push(w.clone());
    }
    let body = Formula::and_all(witnesses);
    let kept = split.eq_mass(|c| sat_tree(c, &body));
    let bound = split
        .mass(heavy, pivot)
        .checked_add(kept)
        .expect("disjoint masses");
    Some(Distinction {
        formula: Formula::diamond(split.action.clone(), bound, body),
        holds_in: heavy,
    })
}
