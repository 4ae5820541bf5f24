//! Exact probabilities, finitely supported distributions and reactive
//! probabilistic labeled transition systems.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use num_traits::{CheckedAdd, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Unconstrained exact rational, used for raw input before validation.
pub type Rational = Ratio<i128>;

/// An exact probability in `[0, 1]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prob(Rational);

impl Prob {
    pub fn zero() -> Self {
        Prob(Rational::zero())
    }

    pub fn one() -> Self {
        Prob(Rational::one())
    }

    /// `num / den` in lowest terms, rejecting values outside `[0, 1]`.
    pub fn new(num: i128, den: i128) -> Result<Self> {
        if den == 0 {
            return Err(Error::ProbOutOfRange {
                value: format!("{num}/0"),
                span: None,
            });
        }
        Self::from_rational(Rational::new(num, den))
    }

    pub fn from_rational(value: Rational) -> Result<Self> {
        if value.is_negative() || value > Rational::one() {
            return Err(Error::ProbOutOfRange {
                value: value.to_string(),
                span: None,
            });
        }
        Ok(Prob(value))
    }

    pub fn value(self) -> Rational {
        self.0
    }

    pub fn numer(self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(self) -> i128 {
        *self.0.denom()
    }

    pub fn is_zero(self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(self) -> bool {
        self.0.is_one()
    }

    /// Sum, or `None` when it exceeds 1.
    pub fn checked_add(self, other: Prob) -> Option<Prob> {
        let sum = self.0 + other.0;
        (sum <= Rational::one()).then_some(Prob(sum))
    }

    /// Difference, or `None` when it is negative.
    pub fn checked_sub(self, other: Prob) -> Option<Prob> {
        (self.0 >= other.0).then(|| Prob(self.0 - other.0))
    }

    /// `1 - self`.
    pub fn complement(self) -> Prob {
        Prob(Rational::one() - self.0)
    }

    pub fn to_f64(self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Exact decimal rendering when the denominator only has factors 2 and 5.
    pub fn to_decimal(self) -> Option<String> {
        let mut den = self.denom();
        let mut digits = 0usize;
        let (mut twos, mut fives) = (0u32, 0u32);
        while den % 2 == 0 {
            den /= 2;
            twos += 1;
        }
        while den % 5 == 0 {
            den /= 5;
            fives += 1;
        }
        if den != 1 {
            return None;
        }
        digits += twos.max(fives) as usize;
        if digits == 0 {
            return Some(self.numer().to_string());
        }
        let scale = 10i128.checked_pow(digits as u32)?;
        let scaled = self.numer().checked_mul(scale)? / self.denom();
        let text = format!("{scaled:0>width$}", width = digits + 1);
        let (int, frac) = text.split_at(text.len() - digits);
        Some(format!("{int}.{frac}"))
    }
}

impl fmt::Display for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Cheaply clonable interned name; ordered by its text.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::borrow::Borrow<str> for Symbol {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Symbol {
    fn from(name: &str) -> Self {
        Symbol::new(name)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl ActionId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Finitely supported probability distribution; only positive entries are
/// stored, sorted by state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dist {
    entries: Vec<(StateId, Prob)>,
}

impl Dist {
    /// Build a distribution, merging duplicate states and dropping zeros.
    pub fn new(pairs: impl IntoIterator<Item = (StateId, Rational)>) -> Result<Dist> {
        let mut merged: Vec<(StateId, Rational)> = Vec::new();
        let mut any = false;
        for (state, p) in pairs {
            any = true;
            if p.is_negative() {
                return Err(Error::NegativeProb {
                    value: p.to_string(),
                    span: None,
                });
            }
            match merged.iter_mut().find(|(s, _)| *s == state) {
                Some((_, acc)) => *acc = checked_sum(*acc, p)?,
                None => merged.push((state, p)),
            }
        }
        if !any {
            return Err(Error::EmptyDist { span: None });
        }
        let mut total = Rational::zero();
        for (_, p) in &merged {
            total = checked_sum(total, *p)?;
        }
        if !total.is_one() {
            return Err(Error::SumNotOne {
                total: total.to_string(),
                span: None,
            });
        }
        let mut entries: Vec<(StateId, Prob)> = merged
            .into_iter()
            .filter(|(_, p)| !p.is_zero())
            .map(|(s, p)| (s, Prob(p)))
            .collect();
        entries.sort_by_key(|(s, _)| *s);
        Ok(Dist { entries })
    }

    /// Point mass on `state`.
    pub fn dirac(state: StateId) -> Dist {
        Dist {
            entries: vec![(state, Prob::one())],
        }
    }

    pub fn entries(&self) -> &[(StateId, Prob)] {
        &self.entries
    }

    pub fn support(&self) -> impl Iterator<Item = StateId> + '_ {
        self.entries.iter().map(|(s, _)| *s)
    }

    pub fn get(&self, state: StateId) -> Prob {
        self.entries
            .binary_search_by_key(&state, |(s, _)| *s)
            .map(|i| self.entries[i].1)
            .unwrap_or_else(|_| Prob::zero())
    }

    /// Cumulative mass of the states selected by `pred`.
    pub fn mass_where(&self, mut pred: impl FnMut(StateId) -> bool) -> Prob {
        let total: Rational = self
            .entries
            .iter()
            .filter(|(s, _)| pred(*s))
            .map(|(_, p)| p.value())
            .sum();
        Prob(total)
    }

    /// Cumulative mass of a set of states.
    pub fn mass(&self, set: &[StateId]) -> Prob {
        self.mass_where(|s| set.contains(&s))
    }
}

fn checked_sum(a: Rational, b: Rational) -> Result<Rational> {
    a.checked_add(&b).ok_or_else(|| Error::NumberTooLarge {
        literal: format!("{a} + {b}"),
        span: None,
    })
}

/// Convenience wrapper mirroring the free-function vocabulary.
pub fn make_dist(pairs: impl IntoIterator<Item = (StateId, Rational)>) -> Result<Dist> {
    Dist::new(pairs)
}

pub fn dist_mass(dist: &Dist, set: &[StateId]) -> Prob {
    dist.mass(set)
}

/// One transition as written by a user: source, action, weighted targets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTransition {
    pub source: String,
    pub action: String,
    pub targets: Vec<(String, Rational)>,
}

impl RawTransition {
    pub fn new(source: &str, action: &str, targets: &[(&str, Rational)]) -> Self {
        RawTransition {
            source: source.to_owned(),
            action: action.to_owned(),
            targets: targets.iter().map(|(t, p)| ((*t).to_owned(), *p)).collect(),
        }
    }
}

/// A finite reactive probabilistic labeled transition system: every state
/// has at most one distribution per action.
///
/// Equality is by names, independent of interning order.
#[derive(Debug, Clone)]
pub struct Rplts {
    states: Vec<Symbol>,
    actions: Vec<Symbol>,
    state_index: HashMap<Symbol, StateId>,
    action_index: HashMap<Symbol, ActionId>,
    /// Per state, transitions sorted by action name.
    trans: Vec<Vec<(ActionId, Dist)>>,
}

impl Rplts {
    /// Validate raw transitions; the state set is every name mentioned.
    pub fn from_transitions(raw: &[RawTransition]) -> Result<Rplts> {
        Self::build(None, raw)
    }

    /// Validate raw transitions against an explicit state set.
    pub fn with_states(states: &[&str], raw: &[RawTransition]) -> Result<Rplts> {
        Self::build(Some(states), raw)
    }

    fn build(declared: Option<&[&str]>, raw: &[RawTransition]) -> Result<Rplts> {
        Self::build_indexed(declared, raw).map_err(|(_, e)| e)
    }

    /// Like `from_transitions`, but reports which transition was rejected.
    pub(crate) fn build_indexed(
        declared: Option<&[&str]>,
        raw: &[RawTransition],
    ) -> Result<Rplts, (usize, Error)> {
        let mut sys = Rplts {
            states: Vec::new(),
            actions: Vec::new(),
            state_index: HashMap::new(),
            action_index: HashMap::new(),
            trans: Vec::new(),
        };
        if let Some(names) = declared {
            for name in names {
                sys.intern_state(name);
            }
        }
        let closed = declared.is_some();
        let resolve = |sys: &mut Rplts, name: &str| -> Result<StateId> {
            match sys.state_index.get(name) {
                Some(id) => Ok(*id),
                None if closed => Err(Error::UnknownState(name.to_owned())),
                None => Ok(sys.intern_state(name)),
            }
        };
        for (i, t) in raw.iter().enumerate() {
            let source = resolve(&mut sys, &t.source).map_err(|e| (i, e))?;
            let action = sys.intern_action(&t.action);
            let mut pairs = Vec::with_capacity(t.targets.len());
            for (target, p) in &t.targets {
                pairs.push((resolve(&mut sys, target).map_err(|e| (i, e))?, *p));
            }
            let dist = Dist::new(pairs).map_err(|e| (i, e))?;
            let slot = &mut sys.trans[source.index()];
            match slot.iter().find(|(a, _)| *a == action) {
                Some((_, existing)) if *existing != dist => {
                    return Err((
                        i,
                        Error::DuplicateTransition {
                            state: t.source.clone(),
                            action: t.action.clone(),
                            span: None,
                        },
                    ))
                }
                Some(_) => {}
                None => slot.push((action, dist)),
            }
        }
        let actions = sys.actions.clone();
        for slot in &mut sys.trans {
            slot.sort_by(|(a, _), (b, _)| actions[a.index()].cmp(&actions[b.index()]));
        }
        Ok(sys)
    }

    /// Adds a state without transitions unless it already exists.
    pub(crate) fn ensure_state(&mut self, name: &str) -> StateId {
        self.intern_state(name)
    }

    fn intern_state(&mut self, name: &str) -> StateId {
        if let Some(id) = self.state_index.get(name) {
            return *id;
        }
        let id = StateId(self.states.len() as u32);
        let sym = Symbol::new(name);
        self.states.push(sym.clone());
        self.state_index.insert(sym, id);
        self.trans.push(Vec::new());
        id
    }

    fn intern_action(&mut self, name: &str) -> ActionId {
        if let Some(id) = self.action_index.get(name) {
            return *id;
        }
        let id = ActionId(self.actions.len() as u32);
        let sym = Symbol::new(name);
        self.actions.push(sym.clone());
        self.action_index.insert(sym, id);
        id
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.states.len() as u32).map(StateId)
    }

    pub fn actions(&self) -> impl Iterator<Item = ActionId> {
        (0..self.actions.len() as u32).map(ActionId)
    }

    pub fn state_name(&self, s: StateId) -> &Symbol {
        &self.states[s.index()]
    }

    pub fn action_name(&self, a: ActionId) -> &Symbol {
        &self.actions[a.index()]
    }

    pub fn state(&self, name: &str) -> Result<StateId> {
        self.state_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownState(name.to_owned()))
    }

    pub fn action(&self, name: &str) -> Option<ActionId> {
        self.action_index.get(name).copied()
    }

    pub(crate) fn check_state(&self, s: StateId) -> Result<()> {
        if s.index() < self.states.len() {
            Ok(())
        } else {
            Err(Error::UnknownState(format!("#{}", s.0)))
        }
    }

    /// Outgoing transitions of `s`, sorted by action name.
    pub fn transitions(&self, s: StateId) -> &[(ActionId, Dist)] {
        &self.trans[s.index()]
    }

    pub fn transition(&self, s: StateId, a: ActionId) -> Option<&Dist> {
        self.trans[s.index()]
            .iter()
            .find(|(b, _)| *b == a)
            .map(|(_, d)| d)
    }

    /// States without incoming transitions from other states.
    pub fn roots(&self) -> Vec<StateId> {
        let mut targeted = vec![false; self.states.len()];
        for (s, slot) in self.trans.iter().enumerate() {
            for (_, d) in slot {
                for t in d.support() {
                    if t.index() != s {
                        targeted[t.index()] = true;
                    }
                }
            }
        }
        self.states().filter(|s| !targeted[s.index()]).collect()
    }

    /// Transitions as raw triples, in state then action order.
    pub fn to_raw(&self) -> Vec<RawTransition> {
        let mut out = Vec::new();
        for s in self.states() {
            for (a, d) in self.transitions(s) {
                out.push(RawTransition {
                    source: self.state_name(s).to_string(),
                    action: self.action_name(*a).to_string(),
                    targets: d
                        .entries()
                        .iter()
                        .map(|(t, p)| (self.state_name(*t).to_string(), p.value()))
                        .collect(),
                });
            }
        }
        out
    }
}

impl PartialEq for Rplts {
    fn eq(&self, other: &Self) -> bool {
        if self.num_states() != other.num_states() || self.actions.len() != other.actions.len() {
            return false;
        }
        let keyed = |sys: &Rplts| {
            let mut raw = sys.to_raw();
            for t in &mut raw {
                t.targets.sort();
            }
            raw.sort_by(|x, y| (&x.source, &x.action).cmp(&(&y.source, &y.action)));
            raw
        };
        self.states.iter().all(|s| other.state_index.contains_key(s))
            && self.actions.iter().all(|a| other.action_index.contains_key(a))
            && keyed(self) == keyed(other)
    }
}

impl Eq for Rplts {}

/// Validate a raw transition list into a system.
pub fn validate_rplts(raw: &[RawTransition]) -> Result<Rplts> {
    Rplts::from_transitions(raw)
}
