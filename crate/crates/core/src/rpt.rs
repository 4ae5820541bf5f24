//! Reactive probabilistic trees: canonical, hash-consed, finite height.
//!
//! Every `Rpt` is interned in a global table keyed by its successor structure,
//! so two trees are isomorphic iff they share a node id. Children of a node are
//! kept sorted by the canonical tree order, which makes the representation
//! unique.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::{Arc, LazyLock, Mutex, Weak};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{Prob, Rational, Rplts, StateId, Symbol};

/// Per-action successors of a node.
pub type Succ = Vec<(Symbol, Vec<(Rpt, Prob)>)>;

type Key = Vec<(Symbol, Vec<(u64, Prob)>)>;

struct Node {
    id: u64,
    height: usize,
    succ: Succ,
}

#[derive(Clone)]
pub struct Rpt(Arc<Node>);

struct Store {
    map: HashMap<Key, Weak<Node>>,
    purge_at: usize,
}

static NEXT_ID: AtomicU64 = AtomicU64::new(0);

static STORE: LazyLock<Mutex<Store>> = LazyLock::new(|| {
    Mutex::new(Store {
        map: HashMap::new(),
        purge_at: 1 << 12,
    })
});

static NIL: LazyLock<Rpt> = LazyLock::new(|| Rpt::intern(Vec::new()));

impl Rpt {
    pub fn nil() -> Rpt {
        NIL.clone()
    }

    /// Intern an already canonical successor structure.
    fn intern(succ: Succ) -> Rpt {
        let key: Key = succ
            .iter()
            .map(|(a, cs)| (a.clone(), cs.iter().map(|(c, p)| (c.id(), *p)).collect()))
            .collect();
        let mut store = STORE.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(node) = store.map.get(&key).and_then(Weak::upgrade) {
            return Rpt(node);
        }
        let height = succ
            .iter()
            .flat_map(|(_, cs)| cs.iter().map(|(c, _)| c.height() + 1))
            .max()
            .unwrap_or(0);
        let node = Arc::new(Node {
            id: NEXT_ID.fetch_add(1, AtomicOrdering::Relaxed),
            height,
            succ,
        });
        store.map.insert(key, Arc::downgrade(&node));
        if store.map.len() >= store.purge_at {
            store.map.retain(|_, w| w.strong_count() > 0);
            store.purge_at = (store.map.len() * 2).max(1 << 12);
        }
        Rpt(node)
    }

    /// Build a tree from per-action children, merging equal siblings by
    /// summing their weights and sorting into canonical order.
    pub fn new(succ: impl IntoIterator<Item = (Symbol, Vec<(Rpt, Prob)>)>) -> Result<Rpt> {
        let mut out: Succ = Vec::new();
        for (action, children) in succ {
            if out.iter().any(|(a, _)| *a == action) {
                return Err(Error::DuplicateTransition {
                    state: "<tree>".to_owned(),
                    action: action.to_string(),
                    span: None,
                });
            }
            if children.is_empty() {
                return Err(Error::EmptyDist { span: None });
            }
            let merged = merge_children(children.into_iter().map(|(c, p)| (c, p.value())))?;
            let total: Rational = merged.iter().map(|(_, p)| p.value()).sum();
            if !total.is_one() {
                return Err(Error::SumNotOne {
                    total: total.to_string(),
                    span: None,
                });
            }
            out.push((action, merged));
        }
        out.sort_by(|(a, _), (b, _)| a.cmp(b));
        Ok(Rpt::intern(out))
    }

    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn height(&self) -> usize {
        self.0.height
    }

    pub fn is_nil(&self) -> bool {
        self.0.succ.is_empty()
    }

    /// Successors, sorted by action name.
    pub fn succ(&self) -> &Succ {
        &self.0.succ
    }

    pub fn children(&self, action: &Symbol) -> Option<&[(Rpt, Prob)]> {
        self.0
            .succ
            .binary_search_by(|(a, _)| a.cmp(action))
            .ok()
            .map(|i| self.0.succ[i].1.as_slice())
    }

    /// Weight of `child` under `action`, zero when absent.
    pub fn weight(&self, action: &Symbol, child: &Rpt) -> Prob {
        self.children(action)
            .and_then(|cs| cs.iter().find(|(c, _)| c == child))
            .map(|(_, p)| *p)
            .unwrap_or_else(Prob::zero)
    }

    pub fn actions(&self) -> impl Iterator<Item = &Symbol> {
        self.0.succ.iter().map(|(a, _)| a)
    }

    /// Number of distinct subtrees, including this one.
    pub fn distinct_nodes(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(t) = stack.pop() {
            if seen.insert(t.id()) {
                for (_, cs) in t.succ() {
                    stack.extend(cs.iter().map(|(c, _)| c.clone()));
                }
            }
        }
        seen.len()
    }

    /// Check every structural invariant; used by tests and debug assertions.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let mut expected_height = 0;
        for (i, (action, children)) in self.succ().iter().enumerate() {
            if i > 0 && self.succ()[i - 1].0 >= *action {
                return Err(format!("actions out of order at `{action}`"));
            }
            if children.is_empty() {
                return Err(format!("empty successor set under `{action}`"));
            }
            let mut total = Rational::zero();
            for (j, (child, p)) in children.iter().enumerate() {
                if p.is_zero() {
                    return Err(format!("zero weight under `{action}`"));
                }
                if j > 0 && children[j - 1].0 >= *child {
                    return Err(format!("children under `{action}` not strictly sorted"));
                }
                total += p.value();
                expected_height = expected_height.max(child.height() + 1);
                child.validate()?;
            }
            if !total.is_one() {
                return Err(format!("weights under `{action}` sum to {total}"));
            }
        }
        if expected_height != self.height() {
            return Err(format!(
                "stored height {} differs from {expected_height}",
                self.height()
            ));
        }
        Ok(())
    }
}

fn merge_children(children: impl IntoIterator<Item = (Rpt, Rational)>) -> Result<Vec<(Rpt, Prob)>> {
    let mut merged: Vec<(Rpt, Rational)> = Vec::new();
    for (c, p) in children {
        if p.is_zero() {
            continue;
        }
        match merged.iter_mut().find(|(d, _)| *d == c) {
            Some((_, acc)) => *acc += p,
            None => merged.push((c, p)),
        }
    }
    merged.sort_by(|(x, _), (y, _)| x.cmp(y));
    merged
        .into_iter()
        .map(|(c, p)| Ok((c, Prob::from_rational(p)?)))
        .collect()
}

impl PartialEq for Rpt {
    fn eq(&self, other: &Self) -> bool {
        self.id() == other.id()
    }
}

impl Eq for Rpt {}

impl Hash for Rpt {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id().hash(state);
    }
}

impl Ord for Rpt {
    /// Canonical order: by height, then successor structure.
    fn cmp(&self, other: &Self) -> Ordering {
        if self.id() == other.id() {
            return Ordering::Equal;
        }
        self.height()
            .cmp(&other.height())
            .then_with(|| self.succ().cmp(other.succ()))
    }
}

impl PartialOrd for Rpt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Rpt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_nil() {
            return f.write_str("nil");
        }
        f.write_str("{")?;
        for (i, (a, cs)) in self.succ().iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}: [")?;
            for (j, (c, p)) in cs.iter().enumerate() {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{p} {c:?}")?;
            }
            f.write_str("]")?;
        }
        f.write_str("}")
    }
}

impl fmt::Display for Rpt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_tree(self, crate::parser::NumberStyle::Fraction))
    }
}

/// A tree that may have isomorphic siblings, as produced by truncation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTree {
    pub succ: Vec<(Symbol, Vec<(Arc<RawTree>, Prob)>)>,
}

impl RawTree {
    pub fn nil() -> RawTree {
        RawTree { succ: Vec::new() }
    }

    pub fn height(&self) -> usize {
        self.succ
            .iter()
            .flat_map(|(_, cs)| cs.iter().map(|(c, _)| c.height() + 1))
            .max()
            .unwrap_or(0)
    }
}

impl From<&Rpt> for RawTree {
    fn from(t: &Rpt) -> Self {
        truncate(t, t.height())
    }
}

/// `tr_n`: cut every branch at depth `n`, without merging siblings.
pub fn truncate(t: &Rpt, n: usize) -> RawTree {
    fn go(t: &Rpt, n: usize, memo: &mut HashMap<(u64, usize), Arc<RawTree>>) -> Arc<RawTree> {
        if let Some(r) = memo.get(&(t.id(), n)) {
            return r.clone();
        }
        let raw = if n == 0 {
            RawTree::nil()
        } else {
            RawTree {
                succ: t
                    .succ()
                    .iter()
                    .map(|(a, cs)| {
                        (
                            a.clone(),
                            cs.iter().map(|(c, p)| (go(c, n - 1, memo), *p)).collect(),
                        )
                    })
                    .collect(),
            }
        };
        let raw = Arc::new(raw);
        memo.insert((t.id(), n), raw.clone());
        raw
    }
    let raw = go(t, n, &mut HashMap::new());
    Arc::unwrap_or_clone(raw)
}

/// `coll`: merge isomorphic siblings bottom-up, summing their weights.
pub fn collapse(t: &RawTree) -> Rpt {
    fn go(t: &RawTree, memo: &mut HashMap<*const RawTree, Rpt>) -> Rpt {
        if let Some(r) = memo.get(&(t as *const RawTree)) {
            return r.clone();
        }
        let mut succ: Succ = t
            .succ
            .iter()
            .map(|(a, cs)| {
                let children = cs.iter().map(|(c, p)| (go(c, memo), p.value()));
                let merged = merge_children(children).expect("collapse preserves total mass");
                (a.clone(), merged)
            })
            .collect();
        succ.sort_by(|(a, _), (b, _)| a.cmp(b));
        let r = Rpt::intern(succ);
        memo.insert(t as *const RawTree, r.clone());
        r
    }
    let r = go(t, &mut HashMap::new());
    debug_assert!(r.validate().is_ok());
    r
}

/// `⌊t⌋_n`: collapse of the truncation.
pub fn prune(t: &Rpt, n: usize) -> Rpt {
    collapse(&truncate(t, n))
}

pub fn height(t: &Rpt) -> usize {
    t.height()
}

pub fn rpt_equal(t1: &Rpt, t2: &Rpt) -> bool {
    t1 == t2
}

/// Level-`n` prunings of every state: `out[s]` is the depth-`n` unfolding of
/// state `s`, collapsed.
pub fn unfold_all(sys: &Rplts, n: usize) -> Vec<Rpt> {
    let mut level: Vec<Rpt> = vec![Rpt::nil(); sys.num_states()];
    for _ in 0..n {
        level = next_level(sys, &level);
    }
    level
}

fn next_level(sys: &Rplts, prev: &[Rpt]) -> Vec<Rpt> {
    sys.states()
        .map(|s| {
            let succ: Succ = sys
                .transitions(s)
                .iter()
                .map(|(a, d)| {
                    let children = d
                        .entries()
                        .iter()
                        .map(|(t, p)| (prev[t.index()].clone(), p.value()));
                    let merged = merge_children(children).expect("distribution masses are valid");
                    (sys.action_name(*a).clone(), merged)
                })
                .collect();
            Rpt::intern(succ)
        })
        .collect()
}

/// `⌊⟦s⟧⌋_n`, computed level by level over the whole system.
pub fn unfold(sys: &Rplts, s: StateId, n: usize) -> Result<Rpt> {
    sys.check_state(s)?;
    Ok(unfold_all(sys, n).swap_remove(s.index()))
}

/// The least `n` with differing level-`n` prunings, searched up to `|S|`;
/// `None` when the states are semantically equal.
pub fn minimal_level(sys: &Rplts, s1: StateId, s2: StateId) -> Result<Option<usize>> {
    sys.check_state(s1)?;
    sys.check_state(s2)?;
    let mut level: Vec<Rpt> = vec![Rpt::nil(); sys.num_states()];
    for n in 1..=sys.num_states() {
        level = next_level(sys, &level);
        if level[s1.index()] != level[s2.index()] {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// Equality of the unfoldings at depth `|S|`.
pub fn semantic_eq(sys: &Rplts, s1: StateId, s2: StateId) -> Result<bool> {
    sys.check_state(s1)?;
    sys.check_state(s2)?;
    let level = unfold_all(sys, sys.num_states());
    Ok(level[s1.index()] == level[s2.index()])
}

/// Indented text: one line per edge, `-a[p]-> nil` for leaves.
pub fn render_tree(t: &Rpt, style: crate::parser::NumberStyle) -> String {
    fn go(t: &Rpt, indent: usize, style: crate::parser::NumberStyle, out: &mut String) {
        for (a, cs) in t.succ() {
            for (c, p) in cs {
                let p = crate::parser::render_prob(*p, style);
                let _ = write!(out, "{:indent$}-{a}[{p}]->", "");
                if c.is_nil() {
                    out.push_str(" nil\n");
                } else {
                    out.push('\n');
                    go(c, indent + 2, style, out);
                }
            }
        }
    }
    if t.is_nil() {
        return "nil\n".to_owned();
    }
    let mut out = String::new();
    go(t, 0, style, &mut out);
    out
}

/// Graphviz rendering of the tree (shared subtrees drawn once per occurrence).
pub fn render_dot(t: &Rpt, style: crate::parser::NumberStyle) -> String {
    fn go(
        t: &Rpt,
        me: usize,
        next: &mut usize,
        style: crate::parser::NumberStyle,
        out: &mut String,
    ) {
        for (a, cs) in t.succ() {
            for (c, p) in cs {
                *next += 1;
                let child = *next;
                let label = if c.is_nil() { "nil" } else { "" };
                let _ = writeln!(out, "  n{child} [label=\"{label}\"];");
                let p = crate::parser::render_prob(*p, style);
                let _ = writeln!(out, "  n{me} -> n{child} [label=\"{a} {p}\"];");
                go(c, child, next, style, out);
            }
        }
    }
    let mut out = String::from("digraph rpt {\n  node [shape=circle];\n");
    let root_label = if t.is_nil() { "nil" } else { "" };
    let _ = writeln!(out, "  n0 [label=\"{root_label}\"];");
    go(t, 0, &mut 0, style, &mut out);
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_system;

    fn p(n: i128, d: i128) -> Prob {
        Prob::new(n, d).unwrap()
    }

    fn leaf(actions: &[&str]) -> Rpt {
        Rpt::new(
            actions
                .iter()
                .map(|a| (Symbol::new(a), vec![(Rpt::nil(), Prob::one())])),
        )
        .unwrap()
    }

    const FIXTURE_A: &str = "t1 -a-> {1/2: u_bc, 1/2: u_nil}
        u_bc -b-> {1: nil}
        u_bc -c-> {1: nil}
        t2 -a-> {1/2: v_b, 1/2: v_c}
        v_b -b-> {1: nil}
        v_c -c-> {1: nil}";

    #[test]
    fn nil_basics() {
        assert_eq!(Rpt::nil().height(), 0);
        assert!(Rpt::nil().is_nil());
        assert_eq!(truncate(&Rpt::nil(), 3), RawTree::nil());
        assert_eq!(prune(&leaf(&["a"]), 0), Rpt::nil());
        assert_eq!(leaf(&["a"]).height(), 1);
    }

    #[test]
    fn order_insensitive_construction() {
        let b = leaf(&["b"]);
        let c = leaf(&["c"]);
        let x = Rpt::new([(Symbol::new("a"), vec![(b.clone(), p(1, 3)), (c.clone(), p(2, 3))])])
            .unwrap();
        let y = Rpt::new([(Symbol::new("a"), vec![(c, p(2, 3)), (b, p(1, 3))])]).unwrap();
        assert_eq!(x, y);
        assert!(rpt_equal(&x, &x));
    }

    #[test]
    fn duplicate_children_merge() {
        let t = Rpt::new([(
            Symbol::new("a"),
            vec![(Rpt::nil(), p(1, 4)), (Rpt::nil(), p(3, 4))],
        )])
        .unwrap();
        assert_eq!(t, leaf(&["a"]));
        assert!(Rpt::new([(Symbol::new("a"), vec![(Rpt::nil(), p(1, 4))])]).is_err());
    }

    #[test]
    fn fixture_a_levels() {
        let sys = parse_system(FIXTURE_A).unwrap();
        let t1 = sys.state("t1").unwrap();
        let t2 = sys.state("t2").unwrap();
        assert_eq!(unfold(&sys, t1, 0).unwrap(), Rpt::nil());
        assert_eq!(unfold(&sys, t1, 1).unwrap(), leaf(&["a"]));
        assert_eq!(unfold(&sys, t1, 1).unwrap(), unfold(&sys, t2, 1).unwrap());
        let d1 = unfold(&sys, t1, 2).unwrap();
        assert_ne!(d1, unfold(&sys, t2, 2).unwrap());
        assert_eq!(d1.height(), 2);
        assert_eq!(prune(&d1, 1), unfold(&sys, t1, 1).unwrap());
        assert_eq!(minimal_level(&sys, t1, t2).unwrap(), Some(2));
        assert!(!semantic_eq(&sys, t1, t2).unwrap());
        assert!(semantic_eq(&sys, t1, t1).unwrap());
        d1.validate().unwrap();
    }

    #[test]
    fn truncate_then_collapse() {
        let sys = parse_system(
            "t5 -a-> {1/4: w_b, 1/4: w_c, 1/2: w_nil}
             w_b -b-> {1: nil}
             w_c -c-> {1: nil}",
        )
        .unwrap();
        let t5 = unfold(&sys, sys.state("t5").unwrap(), 2).unwrap();
        let raw = truncate(&t5, 1);
        let nil = Arc::new(RawTree::nil());
        let mut children = raw.succ[0].1.clone();
        children.sort_by_key(|(_, q)| *q);
        assert_eq!(
            children,
            vec![(nil.clone(), p(1, 4)), (nil.clone(), p(1, 4)), (nil, p(1, 2))]
        );
        let collapsed = collapse(&raw);
        assert_eq!(collapsed, leaf(&["a"]));
        assert_eq!(collapse(&RawTree::from(&collapsed)), collapsed);
        assert_eq!(collapse(&truncate(&t5, 5)), t5);
    }

    #[test]
    fn self_loops() {
        let sys = parse_system("x -a-> {1: x}\ny -a-> {1: y}").unwrap();
        assert!(semantic_eq(&sys, sys.state("x").unwrap(), sys.state("y").unwrap()).unwrap());
    }

    #[test]
    fn renderings() {
        let sys = parse_system(FIXTURE_A).unwrap();
        let t1 = unfold(&sys, sys.state("t1").unwrap(), 2).unwrap();
        assert_eq!(render_tree(&Rpt::nil(), Default::default()), "nil\n");
        let text = render_tree(&t1, Default::default());
        assert_eq!(text, "-a[1/2]-> nil\n-a[1/2]->\n  -b[1]-> nil\n  -c[1]-> nil\n");
        let dot = render_dot(&t1, Default::default());
        assert!(dot.starts_with("digraph rpt {"));
        assert_eq!(dot.matches("->").count(), 4);
    }

    #[test]
    fn unknown_state() {
        let sys = parse_system(FIXTURE_A).unwrap();
        assert!(unfold(&sys, StateId(99), 1).is_err());
    }
}
