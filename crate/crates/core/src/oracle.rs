//! Brute-force oracles and random system generation for property tests.
//!
//! The oracles here share no code with the algorithms they check: formula
//! enumeration works directly on satisfaction sets of the whole system, and
//! the bisimulation oracle tries every equivalence relation.

use std::collections::HashMap;

use num_traits::Zero;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::logic::{Formula, LogicId};
use crate::model::{Prob, RawTransition, Rational, Rplts, StateId, Symbol};

/// Bounds for [`random_rplts`]. Each (state, action) pair gets a transition
/// with probability 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenParams {
    pub max_states: usize,
    pub max_actions: usize,
    pub max_branching: usize,
    pub denominator_bound: u32,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            max_states: 6,
            max_actions: 3,
            max_branching: 3,
            denominator_bound: 8,
            seed: 0,
        }
    }
}

fn action_name(i: usize) -> String {
    if i < 26 {
        char::from(b'a' + i as u8).to_string()
    } else {
        format!("x{i}")
    }
}

/// A random system, fully determined by the parameters (including the seed).
pub fn random_rplts(p: &GenParams) -> Rplts {
    assert!(
        p.max_states >= 1 && p.max_actions >= 1 && p.max_branching >= 1 && p.denominator_bound >= 1,
        "generator bounds must be positive"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let n = rng.gen_range(1..=p.max_states);
    let k = rng.gen_range(1..=p.max_actions);
    let names: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let mut raw = Vec::new();
    for source in &names {
        for a in 0..k {
            if !rng.gen_bool(0.5) {
                continue;
            }
            let width = rng
                .gen_range(1..=p.max_branching.min(n))
                .min(p.denominator_bound as usize);
            let den = rng.gen_range(width as u32..=p.denominator_bound);
            // Cut points split `den` into `width` positive parts.
            let mut cuts: Vec<u32> = sample(&mut rng, den as usize - 1, width - 1)
                .into_iter()
                .map(|c| c as u32 + 1)
                .collect();
            cuts.sort_unstable();
            cuts.push(den);
            let targets = sample(&mut rng, n, width).into_vec();
            let mut prev = 0;
            let mut branches = Vec::with_capacity(width);
            for (t, cut) in targets.into_iter().zip(cuts) {
                branches.push((names[t].clone(), Rational::new((cut - prev) as i128, den as i128)));
                prev = cut;
            }
            raw.push(RawTransition {
                source: source.clone(),
                action: action_name(a),
                targets: branches,
            });
        }
    }
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    Rplts::with_states(&refs, &raw).expect("generated systems are valid")
}

/// Largest system the formula oracle accepts.
pub const MAX_ORACLE_STATES: usize = 12;

/// Every cumulative mass a distribution of the system can assign, plus 1.
fn achievable_bounds(sys: &Rplts) -> Vec<Prob> {
    let mut out = vec![Prob::one()];
    for s in sys.states() {
        for (_, d) in sys.transitions(s) {
            let values: Vec<Rational> = d.entries().iter().map(|(_, p)| p.value()).collect();
            for mask in 1usize..(1 << values.len()) {
                let sum: Rational = (0..values.len())
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| values[i])
                    .sum();
                out.push(Prob::from_rational(sum).expect("sub-mass"));
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

fn rank(f: &Formula) -> (usize, usize, &Formula) {
    (f.depth(), f.size(), f)
}

/// Satisfaction sets (as state bitmasks) of all fragment formulas up to the
/// given depth, each with its smallest representative formula.
struct Family {
    full: u64,
    sets: HashMap<u64, Formula>,
}

impl Family {
    fn offer(&mut self, mask: u64, f: Formula) -> bool {
        match self.sets.get(&mask) {
            Some(old) if rank(old) <= rank(&f) => false,
            Some(_) => {
                self.sets.insert(mask, f);
                false
            }
            None => {
                self.sets.insert(mask, f);
                true
            }
        }
    }

    /// Close under the fragment's connectives.
    fn close(&mut self, logic: LogicId) {
        let mut frontier: Vec<u64> = self.sets.keys().copied().collect();
        while !frontier.is_empty() {
            frontier.sort_unstable();
            let mut next = Vec::new();
            if logic.allows_neg() {
                for &m in &frontier {
                    let f = Formula::neg(self.sets[&m].clone());
                    if self.offer(!m & self.full, f) {
                        next.push(!m & self.full);
                    }
                }
            }
            let mut known: Vec<u64> = self.sets.keys().copied().collect();
            known.sort_unstable();
            for &m1 in &frontier {
                for &m2 in &known {
                    let (l, r) = (self.sets[&m1].clone(), self.sets[&m2].clone());
                    let (m, f) = if logic.allows_and() {
                        (m1 & m2, Formula::and_all([l, r]))
                    } else {
                        (m1 | m2, Formula::or_all([l, r]).expect("two operands"))
                    };
                    if self.offer(m, f) {
                        next.push(m);
                    }
                }
            }
            frontier = next;
        }
    }
}

type Branches = Vec<(StateId, Rational)>;

fn family(sys: &Rplts, logic: LogicId, max_depth: usize) -> Result<Family> {
    let n = sys.num_states();
    if n > MAX_ORACLE_STATES {
        return Err(Error::TooManyStates {
            max: MAX_ORACLE_STATES,
            got: n,
        });
    }
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut fam = Family {
        full,
        sets: HashMap::new(),
    };
    fam.offer(full, Formula::Top);
    fam.close(logic);
    let bounds = achievable_bounds(sys);
    let actions: Vec<(Symbol, Vec<Option<Branches>>)> = sys
        .actions()
        .map(|a| {
            let per_state = sys
                .states()
                .map(|s| {
                    sys.transition(s, a)
                        .map(|d| d.entries().iter().map(|(t, p)| (*t, p.value())).collect())
                })
                .collect();
            (sys.action_name(a).clone(), per_state)
        })
        .collect();
    for _ in 0..max_depth {
        let mut bodies: Vec<(u64, Formula)> =
            fam.sets.iter().map(|(m, f)| (*m, f.clone())).collect();
        bodies.sort_by(|x, y| rank(&x.1).cmp(&rank(&y.1)));
        for (name, per_state) in &actions {
            for (body_mask, body) in &bodies {
                let masses: Vec<Option<Rational>> = per_state
                    .iter()
                    .map(|d| {
                        d.as_ref().map(|entries| {
                            entries
                                .iter()
                                .filter(|(t, _)| body_mask & (1 << t.0) != 0)
                                .fold(Rational::zero(), |acc, (_, p)| acc + p)
                        })
                    })
                    .collect();
                for p in &bounds {
                    let mask = masses
                        .iter()
                        .enumerate()
                        .filter(|(_, m)| m.is_some_and(|m| m >= p.value()))
                        .fold(0u64, |acc, (i, _)| acc | (1 << i));
                    fam.offer(mask, Formula::diamond(name.clone(), *p, body.clone()));
                }
            }
        }
        fam.close(logic);
    }
    Ok(fam)
}

/// Fragment formulas up to `max_depth`, one per distinct satisfaction set in
/// `sys`, with diamond bounds drawn from the system's achievable masses. Each
/// formula is the smallest of its class, by depth, then size, then order.
pub fn enum_formulas(sys: &Rplts, logic: LogicId, max_depth: usize) -> Result<Vec<Formula>> {
    let fam = family(sys, logic, max_depth)?;
    let mut out: Vec<Formula> = fam.sets.into_values().collect();
    out.sort_by(|x, y| rank(x).cmp(&rank(y)));
    Ok(out)
}

/// The smallest enumerated formula separating the two states, if any.
pub fn separating_formula(
    sys: &Rplts,
    s1: StateId,
    s2: StateId,
    logic: LogicId,
    max_depth: usize,
) -> Result<Option<Formula>> {
    sys.check_state(s1)?;
    sys.check_state(s2)?;
    let fam = family(sys, logic, max_depth)?;
    Ok(fam
        .sets
        .into_iter()
        .filter(|(m, _)| (m >> s1.0) & 1 != (m >> s2.0) & 1)
        .map(|(_, f)| f)
        .min_by(|x, y| rank(x).cmp(&rank(y))))
}

/// Whether no fragment formula up to `max_depth` separates the states.
pub fn logical_eq_bruteforce(
    sys: &Rplts,
    s1: StateId,
    s2: StateId,
    logic: LogicId,
    max_depth: usize,
) -> Result<bool> {
    Ok(separating_formula(sys, s1, s2, logic, max_depth)?.is_none())
}

/// Whether the equivalence with the given block labels is a probabilistic
/// bisimulation, checked pair by pair and class by class.
pub fn is_bisimulation_bruteforce(sys: &Rplts, labels: &[usize]) -> bool {
    let classes: Vec<usize> = {
        let mut c = labels.to_vec();
        c.sort_unstable();
        c.dedup();
        c
    };
    for s in sys.states() {
        for t in sys.states() {
            if labels[s.index()] != labels[t.index()] || s >= t {
                continue;
            }
            for a in sys.actions() {
                match (sys.transition(s, a), sys.transition(t, a)) {
                    (None, None) => {}
                    (Some(d1), Some(d2)) => {
                        for &c in &classes {
                            let m1 = d1.mass_where(|u| labels[u.index()] == c);
                            let m2 = d2.mass_where(|u| labels[u.index()] == c);
                            if m1 != m2 {
                                return false;
                            }
                        }
                    }
                    _ => return false,
                }
            }
        }
    }
    true
}

/// The largest bisimulation, found by trying every equivalence relation
/// (restricted growth strings). Feasible for a handful of states only.
pub fn largest_bisimulation_bruteforce(sys: &Rplts) -> Result<Vec<usize>> {
    let n = sys.num_states();
    if n > 8 {
        return Err(Error::TooManyStates { max: 8, got: n });
    }
    let mut best: Vec<usize> = (0..n).collect();
    let mut labels = vec![0usize; n];
    fn visit(i: usize, max: usize, labels: &mut Vec<usize>, sys: &Rplts, best: &mut Vec<usize>) {
        if i == labels.len() {
            if is_bisimulation_bruteforce(sys, labels) {
                // The union of two bisimulations is contained in the largest
                // one, so keep the relation with the fewest classes.
                let classes = |l: &[usize]| l.iter().max().map_or(0, |m| m + 1);
                if classes(labels) < classes(best) {
                    *best = labels.clone();
                }
            }
            return;
        }
        for l in 0..=max.min(labels.len()) {
            labels[i] = l;
            visit(i + 1, if l == max { max + 1 } else { max }, labels, sys, best);
        }
    }
    if n > 0 {
        visit(1, 1, &mut labels, sys, &mut best);
    }
    Ok(best)
}

/// Runs every cross-check on one random system: partition refinement
/// against the exhaustive bisimulation, tree semantics against
/// bisimilarity, synthesized formulas against model checking, and (for
/// small systems) formula enumeration against bisimilarity. Returns the
/// number of state pairs checked or a description of the first mismatch.
pub fn check_random_case(p: &GenParams) -> std::result::Result<usize, String> {
    let sys = random_rplts(p);
    let fail = |what: String| format!("seed {}: {what}", p.seed);
    let part = crate::bisim::bisim_partition(&sys);
    if sys.num_states() <= 6 {
        let labels = largest_bisimulation_bruteforce(&sys).map_err(|e| fail(e.to_string()))?;
        for s in sys.states() {
            for t in sys.states() {
                if part.related(s, t) != (labels[s.index()] == labels[t.index()]) {
                    return Err(fail(format!("partition disagrees with exhaustive search on ({s:?}, {t:?})")));
                }
            }
        }
    }
    let mut synth = crate::synth::Synthesizer::new();
    let mut pairs = 0;
    for s1 in sys.states() {
        for s2 in sys.states() {
            if s1 >= s2 {
                continue;
            }
            pairs += 1;
            let bis = part.related(s1, s2);
            let name = |s: StateId| sys.state_name(s).to_string();
            let ctx = format!("{} vs {}", name(s1), name(s2));
            let sem = crate::rpt::semantic_eq(&sys, s1, s2).map_err(|e| fail(e.to_string()))?;
            if sem != bis {
                return Err(fail(format!("{ctx}: tree equality {sem}, bisimilar {bis}")));
            }
            for logic in LogicId::ALL {
                let got = synth
                    .distinguish_states(&sys, s1, s2, logic)
                    .map_err(|e| fail(e.to_string()))?;
                match got {
                    None if bis => {}
                    None => return Err(fail(format!("{ctx}: no {logic} formula for non-bisimilar states"))),
                    Some((d, _)) if bis => {
                        return Err(fail(format!("{ctx}: {logic} formula {} for bisimilar states", d.formula)))
                    }
                    Some((d, level)) => {
                        let (yes, no) = match d.holds_in {
                            crate::synth::Side::First => (s1, s2),
                            crate::synth::Side::Second => (s2, s1),
                        };
                        let f = &d.formula;
                        let ok = crate::logic::in_fragment(f, logic)
                            && crate::logic::sat_state(&sys, yes, f).unwrap_or(false)
                            && !crate::logic::sat_state(&sys, no, f).unwrap_or(true)
                            && f.depth() <= level;
                        if !ok {
                            return Err(fail(format!("{ctx}: bad {logic} formula {f} (level {level})")));
                        }
                    }
                }
                if sys.num_states() <= 4 {
                    let eq = logical_eq_bruteforce(&sys, s1, s2, logic, sys.num_states())
                        .map_err(|e| fail(e.to_string()))?;
                    if eq != bis {
                        return Err(fail(format!("{ctx}: {logic} enumeration says {eq}, bisimilar {bis}")));
                    }
                }
            }
        }
    }
    Ok(pairs)
}
