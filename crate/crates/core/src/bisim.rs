//! Coarsest probabilistic bisimulation by iterated splitter refinement.

use std::collections::HashMap;

use crate::error::Result;
use crate::model::{ActionId, Prob, Rplts, StateId};

/// Blocks are numbered in order of their least state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<StateId>>,
    block_of: Vec<usize>,
}

impl Partition {
    /// Group states by a key; blocks are numbered by least member.
    fn from_keys<K: Eq + std::hash::Hash>(keys: Vec<K>) -> Partition {
        let mut index: HashMap<K, usize> = HashMap::new();
        let mut blocks: Vec<Vec<StateId>> = Vec::new();
        let mut block_of = Vec::with_capacity(keys.len());
        for (s, key) in keys.into_iter().enumerate() {
            let next = blocks.len();
            let b = *index.entry(key).or_insert(next);
            if b == next {
                blocks.push(Vec::new());
            }
            blocks[b].push(StateId(s as u32));
            block_of.push(b);
        }
        Partition { blocks, block_of }
    }

    pub fn blocks(&self) -> &[Vec<StateId>] {
        &self.blocks
    }

    pub fn block_of(&self, s: StateId) -> usize {
        self.block_of[s.index()]
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Whether `(s, t)` are related by the equivalence.
    pub fn related(&self, s: StateId, t: StateId) -> bool {
        self.block_of(s) == self.block_of(t)
    }
}

/// Mass each action assigns to each block, in a comparable form.
type Signature = Vec<(ActionId, Vec<(usize, Prob)>)>;

fn signature(sys: &Rplts, part: &Partition, s: StateId) -> Signature {
    sys.transitions(s)
        .iter()
        .map(|(a, d)| {
            let mut masses: Vec<(usize, Prob)> = Vec::new();
            for (t, p) in d.entries() {
                let b = part.block_of(*t);
                match masses.iter_mut().find(|(c, _)| *c == b) {
                    Some((_, acc)) => {
                        *acc = acc.checked_add(*p).expect("block mass stays within [0, 1]")
                    }
                    None => masses.push((b, *p)),
                }
            }
            masses.sort();
            (*a, masses)
        })
        .collect()
}

/// One refinement round: split every block by the block-mass signature.
/// Returns `None` once the partition is stable.
pub fn refine(sys: &Rplts, part: &Partition) -> Option<Partition> {
    let keys: Vec<(usize, Signature)> = sys
        .states()
        .map(|s| (part.block_of(s), signature(sys, part, s)))
        .collect();
    let next = Partition::from_keys(keys);
    (next.len() != part.len()).then_some(next)
}

pub fn bisim_partition(sys: &Rplts) -> Partition {
    let enabled: Vec<Vec<ActionId>> = sys
        .states()
        .map(|s| sys.transitions(s).iter().map(|(a, _)| *a).collect())
        .collect();
    let mut part = Partition::from_keys(enabled);
    while let Some(next) = refine(sys, &part) {
        part = next;
    }
    part
}

pub fn bisimilar(sys: &Rplts, s1: StateId, s2: StateId) -> Result<bool> {
    sys.check_state(s1)?;
    sys.check_state(s2)?;
    Ok(s1 == s2 || bisim_partition(sys).related(s1, s2))
}

/// Whether an equivalence, given as a block index per state, satisfies the
/// bisimulation transfer condition directly.
pub fn is_bisimulation(sys: &Rplts, block_of: &[usize]) -> bool {
    let part = Partition::from_keys(block_of.to_vec());
    sys.states().all(|s| {
        sys.states()
            .filter(|t| part.related(s, *t))
            .all(|t| signature(sys, &part, s) == signature(sys, &part, t))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_system;

    #[test]
    fn fixture_a_separated() {
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
        assert!(!bisimilar(&sys, t1, t2).unwrap());
        assert!(bisimilar(&sys, t1, t1).unwrap());
        let part = bisim_partition(&sys);
        assert!(part.related(sys.state("u_nil").unwrap(), sys.state("nil").unwrap()));
        assert!(refine(&sys, &part).is_none());
    }

    #[test]
    fn single_state() {
        let sys = parse_system("").unwrap();
        assert!(bisim_partition(&sys).is_empty());
        let sys = crate::model::Rplts::with_states(&["x"], &[]).unwrap();
        assert_eq!(bisim_partition(&sys).len(), 1);
    }

    #[test]
    fn self_loops_bisimilar() {
        let sys = parse_system("x -a-> {1: x}\ny -a-> {1: y}").unwrap();
        assert!(bisimilar(&sys, StateId(0), StateId(1)).unwrap());
        assert!(is_bisimulation(&sys, &[0, 0]));
    }

    #[test]
    fn fixtures_c_e_separated() {
        let c = parse_system(
            "t5 -a-> {1/4: w_b, 1/4: w_c, 1/2: w_nil}
             t6 -a-> {1/2: w_bc, 1/2: w_nil}
             w_b -b-> {1: nil}
             w_c -c-> {1: nil}
             w_bc -b-> {1: nil}
             w_bc -c-> {1: nil}",
        )
        .unwrap();
        assert!(!bisimilar(&c, c.state("t5").unwrap(), c.state("t6").unwrap()).unwrap());
        let e = parse_system(
            "t9 -a-> {1/2: y_bc, 1/2: y_nil}
             t10 -a-> {2/5: y_bc, 2/5: y_nil, 1/10: y_b, 1/10: y_c}
             y_b -b-> {1: nil}
             y_c -c-> {1: nil}
             y_bc -b-> {1: nil}
             y_bc -c-> {1: nil}",
        )
        .unwrap();
        assert!(!bisimilar(&e, e.state("t9").unwrap(), e.state("t10").unwrap()).unwrap());
    }

    #[test]
    fn lumping_merges_masses() {
        let sys = parse_system(
            "s -a-> {1/2: x, 1/2: y}
             t -a-> {1: z}
             x -b-> {1: nil}
             y -b-> {1: nil}
             z -b-> {1: nil}",
        )
        .unwrap();
        assert!(bisimilar(&sys, sys.state("s").unwrap(), sys.state("t").unwrap()).unwrap());
    }
}
