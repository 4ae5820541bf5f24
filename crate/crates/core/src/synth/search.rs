//! Exhaustive search for a separating formula over sets of tree nodes.
//!
//! Nodes are grouped in layers by distance from the two roots. For each layer
//! we compute every subset of nodes definable by a fragment formula, keeping
//! one small representative formula per subset. This is complete for the
//! negation-free fragments and is used when the Φ-set construction would be
//! too large to enumerate.

use std::collections::HashMap;

use crate::logic::{Formula, LogicId};
use crate::model::{Prob, Rational, Symbol};
use crate::rpt::Rpt;

use super::{Distinction, Side};

/// Largest layer the search will handle.
pub const MAX_LAYER: usize = 12;

fn key(f: &Formula) -> (usize, usize, &Formula) {
    (f.depth(), f.size(), f)
}

fn combine(logic: LogicId, l: &Formula, r: &Formula) -> Formula {
    if logic.allows_or() {
        let ops = l.or_operands().into_iter().chain(r.or_operands()).cloned();
        Formula::or_all(ops).expect("non-empty")
    } else {
        let ops = l.and_operands().into_iter().chain(r.and_operands()).cloned();
        Formula::and_all(ops)
    }
}

/// Definable subsets of `layer`, given the definable subsets of the next one.
fn layer_family(
    layer: &[Rpt],
    below: &[Rpt],
    below_family: &HashMap<u64, Formula>,
    logic: LogicId,
) -> HashMap<u64, Formula> {
    let full = if layer.len() == 64 { u64::MAX } else { (1u64 << layer.len()) - 1 };
    let position: HashMap<&Rpt, usize> = below.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut actions: Vec<&Symbol> = layer.iter().flat_map(|t| t.actions()).collect();
    actions.sort();
    actions.dedup();

    let mut family: HashMap<u64, Formula> = HashMap::new();
    fn offer(family: &mut HashMap<u64, Formula>, mask: u64, f: Formula) {
        match family.get(&mask) {
            Some(old) if key(old) <= key(&f) => {}
            _ => {
                family.insert(mask, f);
            }
        }
    }
    offer(&mut family, full, Formula::Top);

    let mut below_sorted: Vec<(&u64, &Formula)> = below_family.iter().collect();
    below_sorted.sort_by(|x, y| key(x.1).cmp(&key(y.1)));
    for a in actions {
        for (cmask, body) in &below_sorted {
            let masses: Vec<Option<Rational>> = layer
                .iter()
                .map(|t| {
                    t.children(a).map(|cs| {
                        cs.iter()
                            .filter(|(c, _)| **cmask & (1 << position[c]) != 0)
                            .map(|(_, p)| p.value())
                            .sum()
                    })
                })
                .collect();
            let mut thresholds: Vec<Rational> = masses.iter().flatten().copied().collect();
            thresholds.sort();
            thresholds.dedup();
            for p in thresholds {
                let mask = masses
                    .iter()
                    .enumerate()
                    .filter(|(_, m)| m.is_some_and(|m| m >= p))
                    .fold(0u64, |acc, (i, _)| acc | (1 << i));
                let bound = Prob::from_rational(p).expect("sub-mass of a distribution");
                offer(&mut family, mask, Formula::diamond(a.clone(), bound, (*body).clone()));
            }
        }
    }

    let mut frontier: Vec<u64> = family.keys().copied().collect();
    frontier.sort_unstable();
    while !frontier.is_empty() {
        let mut known: Vec<u64> = family.keys().copied().collect();
        known.sort_unstable();
        let mut next = Vec::new();
        for &m1 in &frontier {
            for &m2 in &known {
                let m = if logic.allows_or() { m1 | m2 } else { m1 & m2 };
                if !family.contains_key(&m) {
                    let f = combine(logic, &family[&m1], &family[&m2]);
                    family.insert(m, f);
                    next.push(m);
                }
            }
        }
        frontier = next;
    }
    family
}

/// A formula of `logic` (negation-free) true in exactly one of the roots, or
/// `None` if the trees are equal or a layer is too wide to search.
pub fn separate(t1: &Rpt, t2: &Rpt, logic: LogicId) -> Option<Distinction> {
    assert!(!logic.allows_neg());
    if t1 == t2 {
        return None;
    }
    let mut layers: Vec<Vec<Rpt>> = vec![vec![t1.clone(), t2.clone()]];
    loop {
        let mut next: Vec<Rpt> = layers
            .last()
            .expect("non-empty")
            .iter()
            .flat_map(|t| t.succ().iter().flat_map(|(_, cs)| cs.iter().map(|(c, _)| c.clone())))
            .collect();
        next.sort();
        next.dedup();
        if next.is_empty() {
            break;
        }
        if next.len() > MAX_LAYER {
            return None;
        }
        layers.push(next);
    }
    let mut family: HashMap<u64, Formula> = HashMap::new();
    let mut below: Vec<Rpt> = Vec::new();
    for layer in layers.iter().rev() {
        family = layer_family(layer, &below, &family, logic);
        below = layer.clone();
    }
    family
        .into_iter()
        .filter(|(mask, _)| (mask & 1 != 0) != (mask & 2 != 0))
        .min_by(|x, y| key(&x.1).cmp(&key(&y.1)))
        .map(|(mask, formula)| Distinction {
            formula,
            holds_in: if mask & 1 != 0 { Side::First } else { Side::Second },
        })
}
