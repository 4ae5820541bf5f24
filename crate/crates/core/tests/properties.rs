use proptest::prelude::*;

use rpbis::bisim::is_bisimulation;
use rpbis::oracle::{enum_formulas, largest_bisimulation_bruteforce, random_rplts, separating_formula, GenParams};
use rpbis::rpt::unfold_all;
use rpbis::synth::{phi_and, phi_or, Side, Synthesizer};
use rpbis::{
    bisim_partition, parse_formula, parse_system, prune, render_formula, render_system, sat_state, sat_tree, LogicId,
};

fn small(seed: u64) -> GenParams {
    GenParams {
        max_states: 5,
        max_actions: 2,
        max_branching: 3,
        denominator_bound: 6,
        seed,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn system_text_round_trips(seed in any::<u64>()) {
        let sys = random_rplts(&GenParams { seed, ..GenParams::default() });
        let again = parse_system(&render_system(&sys)).unwrap();
        prop_assert_eq!(again, sys);
    }

    #[test]
    fn formula_text_round_trips(seed in any::<u64>()) {
        let sys = random_rplts(&small(seed));
        for logic in LogicId::ALL {
            for f in enum_formulas(&sys, logic, 2).unwrap() {
                prop_assert_eq!(parse_formula(&render_formula(&f)).unwrap(), f);
            }
        }
    }

    #[test]
    fn trees_satisfy_what_states_satisfy(seed in any::<u64>()) {
        let sys = random_rplts(&small(seed));
        let trees = unfold_all(&sys, 2);
        for logic in [LogicId::PmlNegAnd, LogicId::PmlOr] {
            for f in enum_formulas(&sys, logic, 2).unwrap() {
                for s in sys.states() {
                    prop_assert_eq!(sat_state(&sys, s, &f).unwrap(), sat_tree(&trees[s.index()], &f));
                }
            }
        }
    }

    #[test]
    fn refinement_finds_the_largest_bisimulation(seed in any::<u64>()) {
        let sys = random_rplts(&GenParams { seed, ..GenParams::default() });
        let part = bisim_partition(&sys);
        let labels: Vec<usize> = sys.states().map(|s| part.block_of(s)).collect();
        prop_assert!(is_bisimulation(&sys, &labels));
        let largest = largest_bisimulation_bruteforce(&sys).unwrap();
        for s in sys.states() {
            for t in sys.states() {
                prop_assert_eq!(part.related(s, t), largest[s.index()] == largest[t.index()]);
            }
        }
    }

    #[test]
    fn pruning_agrees_with_shallower_unfolding(seed in any::<u64>()) {
        let sys = random_rplts(&GenParams { seed, ..GenParams::default() });
        let deep = unfold_all(&sys, 4);
        for n in 0..4 {
            let shallow = unfold_all(&sys, n);
            for s in sys.states() {
                prop_assert_eq!(prune(&deep[s.index()], n), shallow[s.index()].clone());
                prop_assert!(shallow[s.index()].height() <= n);
            }
        }
    }

    #[test]
    fn phi_members_hold_in_their_node(seed in any::<u64>()) {
        let sys = random_rplts(&small(seed));
        for t in unfold_all(&sys, 3) {
            for f in phi_or(&t).formulas().iter().chain(phi_and(&t).formulas()) {
                prop_assert!(sat_tree(&t, f), "{}", f);
            }
        }
    }

    #[test]
    fn synthesis_agrees_with_enumeration(seed in any::<u64>()) {
        let sys = random_rplts(&small(seed));
        let mut synth = Synthesizer::new();
        for s1 in sys.states() {
            for s2 in sys.states() {
                if s1 >= s2 {
                    continue;
                }
                for logic in LogicId::ALL {
                    let got = synth.distinguish_states(&sys, s1, s2, logic).unwrap();
                    let witness = separating_formula(&sys, s1, s2, logic, sys.num_states()).unwrap();
                    prop_assert_eq!(got.is_some(), witness.is_some());
                    if let (Some((d, level)), Some(w)) = (got, witness) {
                        // The enumeration's smallest separator is never deeper
                        // than the synthesized one's level bound allows.
                        prop_assert!(w.depth() <= level);
                        let (yes, no) = match d.holds_in {
                            Side::First => (s1, s2),
                            Side::Second => (s2, s1),
                        };
                        prop_assert!(sat_state(&sys, yes, &d.formula).unwrap());
                        prop_assert!(!sat_state(&sys, no, &d.formula).unwrap());
                    }
                }
            }
        }
    }
}
