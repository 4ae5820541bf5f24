//! Φ∨ and Φ∧ sets: the maximal-bound formulas a tree node satisfies, built
//! from the formula sets of its successors.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::logic::{Formula, LogicId};
use crate::model::{Prob, Rational, Symbol};
use crate::rpt::Rpt;

/// A formula with every diamond bound erased.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FormulaSkeleton(Formula);

impl FormulaSkeleton {
    pub fn of(f: &Formula) -> Self {
        fn erase(f: &Formula) -> Formula {
            match f {
                Formula::Top => Formula::Top,
                Formula::Neg(g) => Formula::neg(erase(g)),
                Formula::And(l, r) => Formula::and(erase(l), erase(r)),
                Formula::Or(l, r) => Formula::or(erase(l), erase(r)),
                Formula::Diamond(a, _, g) => Formula::diamond(a.clone(), Prob::zero(), erase(g)),
            }
        }
        FormulaSkeleton(erase(f))
    }

    pub fn formula(&self) -> &Formula {
        &self.0
    }
}

/// A canonical (sorted, duplicate-free) Φ∨- or Φ∧-set.
#[derive(Clone, PartialEq, Eq)]
pub struct PhiSet {
    logic: LogicId,
    formulas: Vec<Formula>,
}

impl PhiSet {
    pub fn new(logic: LogicId, formulas: impl IntoIterator<Item = Formula>) -> Self {
        assert!(
            matches!(logic, LogicId::PmlOr | LogicId::PmlAnd),
            "formula sets exist for the negation-free fragments only"
        );
        let mut formulas: Vec<Formula> = formulas.into_iter().collect();
        formulas.sort();
        formulas.dedup();
        PhiSet { logic, formulas }
    }

    pub fn empty(logic: LogicId) -> Self {
        PhiSet::new(logic, [])
    }

    pub fn logic(&self) -> LogicId {
        self.logic
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }

    pub fn formulas(&self) -> &[Formula] {
        &self.formulas
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.formulas.binary_search(f).is_ok()
    }

    /// Members without the set's connective.
    pub fn basic(&self) -> impl Iterator<Item = &Formula> {
        let logic = self.logic;
        self.formulas.iter().filter(move |f| match logic {
            LogicId::PmlOr => !f.has_or(),
            _ => !f.has_and(),
        })
    }
}

impl fmt::Debug for PhiSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(&self.formulas).finish()
    }
}

/// Whether `a` is a (≤,<)-variant of `b`: the basic members of both sets
/// pair up by skeleton, every bound of an `a` member is at most the matching
/// bound in `b`, and at least one is strictly smaller.
pub fn is_le_lt_variant(a: &PhiSet, b: &PhiSet) -> bool {
    assert_eq!(a.logic, b.logic, "variant check across different logics");
    let group = |s: &PhiSet| {
        let mut groups: HashMap<FormulaSkeleton, Vec<Vec<Prob>>> = HashMap::new();
        for f in s.basic() {
            groups.entry(FormulaSkeleton::of(f)).or_default().push(f.bounds());
        }
        groups
    };
    let (ga, gb) = (group(a), group(b));
    if ga.len() != gb.len() {
        return false;
    }
    for (skel, xs) in &ga {
        let Some(ys) = gb.get(skel) else {
            return false;
        };
        if xs.len() != ys.len() || !perfect_matching(xs, ys) {
            return false;
        }
    }
    let basic_a: BTreeSet<&Formula> = a.basic().collect();
    let basic_b: BTreeSet<&Formula> = b.basic().collect();
    basic_a != basic_b
}

/// Perfect bipartite matching where `xs[i]` may pair with `ys[j]` when every
/// bound of the former is at most the corresponding bound of the latter.
fn perfect_matching(xs: &[Vec<Prob>], ys: &[Vec<Prob>]) -> bool {
    let fits = |x: &Vec<Prob>, y: &Vec<Prob>| x.iter().zip(y).all(|(p, q)| p <= q);
    let mut owner: Vec<Option<usize>> = vec![None; ys.len()];
    fn augment(
        i: usize,
        xs: &[Vec<Prob>],
        ys: &[Vec<Prob>],
        seen: &mut [bool],
        owner: &mut [Option<usize>],
        fits: &dyn Fn(&Vec<Prob>, &Vec<Prob>) -> bool,
    ) -> bool {
        for j in 0..ys.len() {
            if seen[j] || !fits(&xs[i], &ys[j]) {
                continue;
            }
            seen[j] = true;
            if owner[j].is_none_or(|k| augment(k, xs, ys, seen, owner, fits)) {
                owner[j] = Some(i);
                return true;
            }
        }
        false
    }
    (0..xs.len()).all(|i| augment(i, xs, ys, &mut vec![false; ys.len()], &mut owner, &fits))
}

/// Memoizing builder for Φ-sets with a cap on the work done per node.
/// `None` means the set would exceed the cap.
pub struct PhiBuilder {
    logic: LogicId,
    budget: usize,
    memo: HashMap<Rpt, Option<Arc<PhiSet>>>,
}

/// Default cap on enumerated candidates per node.
pub const DEFAULT_BUDGET: usize = 1 << 14;

impl PhiBuilder {
    pub fn new(logic: LogicId, budget: usize) -> Self {
        assert!(matches!(logic, LogicId::PmlOr | LogicId::PmlAnd));
        PhiBuilder {
            logic,
            budget,
            memo: HashMap::new(),
        }
    }

    pub fn unbounded(logic: LogicId) -> Self {
        PhiBuilder::new(logic, usize::MAX)
    }

    pub fn get(&mut self, t: &Rpt) -> Option<Arc<PhiSet>> {
        if let Some(hit) = self.memo.get(t) {
            return hit.clone();
        }
        let result = self.build(t);
        self.memo.insert(t.clone(), result.clone());
        result
    }

    fn build(&mut self, t: &Rpt) -> Option<Arc<PhiSet>> {
        let mut out = Vec::new();
        for (action, children) in t.succ() {
            out.push(Formula::can(action.clone()));
            let mut child_sets = Vec::with_capacity(children.len());
            for (c, p) in children {
                child_sets.push((self.get(c)?, *p));
            }
            let members = match self.logic {
                LogicId::PmlOr => or_members(action, &child_sets, self.budget)?,
                _ => and_members(action, &child_sets, self.budget)?,
            };
            out.extend(members);
            if out.len() > self.budget {
                return None;
            }
        }
        Some(Arc::new(PhiSet::new(self.logic, out)))
    }
}

/// Disjunctions over realizable choices (each child contributes at most one
/// of its formulas), with the highest achievable bound for each body.
fn or_members(
    action: &Symbol,
    children: &[(Arc<PhiSet>, Prob)],
    budget: usize,
) -> Option<Vec<Formula>> {
    let mut combos: usize = 1;
    for (set, _) in children {
        combos = combos.checked_mul(set.len() + 1).filter(|&c| c <= budget)?;
    }
    let mut universe: Vec<&Formula> = children
        .iter()
        .flat_map(|(s, _)| s.formulas().iter())
        .collect();
    universe.sort();
    universe.dedup();
    let index = |f: &Formula| universe.binary_search(&f).expect("member of some child set");
    let child_idx: Vec<Vec<usize>> = children
        .iter()
        .map(|(s, _)| s.formulas().iter().map(index).collect())
        .collect();

    let mut bodies: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut pick: Vec<usize> = Vec::new();
    fn choose(
        j: usize,
        child_idx: &[Vec<usize>],
        pick: &mut Vec<usize>,
        bodies: &mut BTreeSet<Vec<usize>>,
    ) {
        if j == child_idx.len() {
            if !pick.is_empty() {
                let mut s = pick.clone();
                s.sort_unstable();
                s.dedup();
                bodies.insert(s);
            }
            return;
        }
        choose(j + 1, child_idx, pick, bodies);
        for &f in &child_idx[j] {
            pick.push(f);
            choose(j + 1, child_idx, pick, bodies);
            pick.pop();
        }
    }
    choose(0, &child_idx, &mut pick, &mut bodies);

    let out = bodies
        .into_iter()
        .map(|s| {
            let bound: Rational = children
                .iter()
                .zip(&child_idx)
                .filter(|(_, idx)| idx.iter().any(|f| s.binary_search(f).is_ok()))
                .map(|((_, p), _)| p.value())
                .sum();
            let body = Formula::or_all(s.iter().map(|&f| universe[f].clone()))
                .expect("non-empty choice");
            let bound = Prob::from_rational(bound).expect("sub-mass of a distribution");
            Formula::diamond(action.clone(), bound, body)
        })
        .collect();
    Some(out)
}

/// Conjunctions of non-empty subsets of one child's formulas, with bounds of
/// identical bodies from different children summed.
fn and_members(
    action: &Symbol,
    children: &[(Arc<PhiSet>, Prob)],
    budget: usize,
) -> Option<Vec<Formula>> {
    let mut total: usize = 0;
    for (set, _) in children {
        let n = u32::try_from(set.len()).ok().filter(|&n| n < usize::BITS)?;
        total = total.checked_add((1usize << n) - 1).filter(|&c| c <= budget)?;
    }
    let mut bounds: HashMap<Formula, Rational> = HashMap::new();
    for (set, p) in children {
        let fs = set.formulas();
        for mask in 1usize..(1usize << fs.len()) {
            let body = Formula::and_all(
                (0..fs.len())
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| fs[i].clone()),
            );
            *bounds.entry(body).or_default() += p.value();
        }
    }
    let mut out: Vec<Formula> = bounds
        .into_iter()
        .map(|(body, bound)| {
            let bound = Prob::from_rational(bound).expect("sub-mass of a distribution");
            Formula::diamond(action.clone(), bound, body)
        })
        .collect();
    out.sort();
    Some(out)
}

/// The Φ∨-set of a node, without a size cap.
pub fn phi_or(t: &Rpt) -> PhiSet {
    let set = PhiBuilder::unbounded(LogicId::PmlOr)
        .get(t)
        .expect("unbounded builder always succeeds");
    Arc::unwrap_or_clone(set)
}

/// The Φ∧-set of a node, without a size cap.
pub fn phi_and(t: &Rpt) -> PhiSet {
    let set = PhiBuilder::unbounded(LogicId::PmlAnd)
        .get(t)
        .expect("unbounded builder always succeeds");
    Arc::unwrap_or_clone(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::sat_tree;
    use crate::parser::{parse_formula, parse_system};
    use crate::rpt::unfold;

    fn set(logic: LogicId, fs: &[&str]) -> PhiSet {
        PhiSet::new(logic, fs.iter().map(|f| parse_formula(f).unwrap()))
    }

    fn tree(text: &str, state: &str) -> Rpt {
        let sys = parse_system(text).unwrap();
        unfold(&sys, sys.state(state).unwrap(), sys.num_states()).unwrap()
    }

    #[test]
    fn nil_sets_are_empty() {
        assert!(phi_or(&Rpt::nil()).is_empty());
        assert!(phi_and(&Rpt::nil()).is_empty());
    }

    #[test]
    fn fixture_d() {
        let text = "t7 -a-> {1: x_b}\nt8 -a-> {1: x_bc}\nx_b -b-> {1: nil}\nx_bc -b-> {1: nil}\nx_bc -c-> {1: nil}";
        assert_eq!(
            phi_or(&tree(text, "t7")),
            set(LogicId::PmlOr, &["<a>1", "<a>1 <b>1"])
        );
        assert_eq!(
            phi_or(&tree(text, "t8")),
            set(LogicId::PmlOr, &["<a>1", "<a>1 <b>1", "<a>1 <c>1"])
        );
    }

    #[test]
    fn members_hold() {
        let text = "t10 -a-> {2/5: y_bc, 2/5: y_nil, 1/10: y_b, 1/10: y_c}
            y_b -b-> {1: nil}\ny_c -c-> {1: nil}\ny_bc -b-> {1: nil}\ny_bc -c-> {1: nil}";
        let t = tree(text, "t10");
        for f in phi_or(&t).formulas().iter().chain(phi_and(&t).formulas()) {
            assert!(sat_tree(&t, f), "{f}");
        }
    }

    #[test]
    fn variants() {
        let t5 = set(LogicId::PmlOr, &["<a>1", "<a>1/4 <b>1", "<a>1/4 <c>1", "<a>1/2 (<b>1 | <c>1)"]);
        let t6 = set(LogicId::PmlOr, &["<a>1", "<a>1/2 <b>1", "<a>1/2 <c>1"]);
        assert!(is_le_lt_variant(&t5, &t6));
        assert!(!is_le_lt_variant(&t6, &t5));
        assert!(!is_le_lt_variant(&t5, &t5));
        let other = set(LogicId::PmlOr, &["<a>1", "<a>1/2 <b>1"]);
        assert!(!is_le_lt_variant(&other, &t6));
    }

    #[test]
    fn repeated_skeletons_need_matching() {
        // Two members with the same skeleton; the only valid pairing is crossed.
        let a = set(LogicId::PmlOr, &["<a>1/4 <b>1/2", "<a>1/2 <b>1/4"]);
        let b = set(LogicId::PmlOr, &["<a>1/2 <b>1/2", "<a>1/2 <b>1/4"]);
        assert!(is_le_lt_variant(&a, &b));
        assert!(!is_le_lt_variant(&b, &a));
    }

    #[test]
    fn budget_reports_overflow() {
        let text = "t -a-> {1/2: x, 1/2: y}\nx -b-> {1: nil}\nx -c-> {1: nil}\ny -d-> {1: nil}";
        let t = tree(text, "t");
        assert!(PhiBuilder::new(LogicId::PmlAnd, 2).get(&t).is_none());
        assert!(PhiBuilder::new(LogicId::PmlAnd, 100).get(&t).is_some());
    }
}
