//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with a
//! failure status if any criterion fails.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rpbis::oracle::{logical_eq_bruteforce, random_rplts, GenParams};
use rpbis::rpt::{prune, unfold_all};
use rpbis::synth::{phi_and, phi_or, PhiSet, Side, Synthesizer};
use rpbis::{
    bisimilar, in_fragment, parse_formula, parse_system, render_formula, sat_state, sat_tree, semantic_eq, unfold,
    Formula, LogicId, Rplts, Rpt,
};

type Outcome = Result<String, String>;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn load(name: &str) -> Rplts {
    parse_system(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

fn tree(sys: &Rplts, s: &str) -> Rpt {
    unfold(sys, sys.state(s).unwrap(), sys.num_states()).unwrap()
}

fn rendered(fs: &[&str]) -> BTreeSet<String> {
    fs.iter().map(|f| render_formula(&parse_formula(f).unwrap())).collect()
}

fn set_of(phi: &PhiSet) -> BTreeSet<String> {
    phi.formulas().iter().map(render_formula).collect()
}

fn check_sets(file: &str, build: fn(&Rpt) -> PhiSet, cases: &[(&str, &[&str])]) -> Result<usize, String> {
    let sys = load(file);
    for (state, expected) in cases {
        let got = set_of(&build(&tree(&sys, state)));
        let want = rendered(expected);
        if got != want {
            return Err(format!("{file} {state}: got {got:?}, expected {want:?}"));
        }
    }
    Ok(cases.len())
}

fn within(limit: Duration, start: Instant, detail: String) -> Outcome {
    let took = start.elapsed();
    if took <= limit {
        Ok(format!("{detail}; {took:.2?}"))
    } else {
        Err(format!("{detail}; took {took:.2?}, limit {limit:?}"))
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let b: &[&str] = &["<b>1"];
    let c: &[&str] = &["<c>1"];
    let bc: &[&str] = &["<b>1", "<c>1"];
    let none: &[&str] = &[];
    let mut n = 0;
    n += check_sets(
        "fixtureC.rplts",
        phi_or,
        &[
            ("t5", &["<a>1", "<a>1/4 <b>1", "<a>1/4 <c>1", "<a>1/2 (<b>1 | <c>1)"]),
            ("t6", &["<a>1", "<a>1/2 <b>1", "<a>1/2 <c>1"]),
            ("w_b", b),
            ("w_c", c),
            ("w_bc", bc),
            ("w_nil", none),
        ],
    )?;
    n += check_sets(
        "fixtureD.rplts",
        phi_or,
        &[
            ("t7", &["<a>1", "<a>1 <b>1"]),
            ("t8", &["<a>1", "<a>1 <b>1", "<a>1 <c>1"]),
            ("x_b", b),
            ("x_bc", bc),
        ],
    )?;
    n += check_sets(
        "fixtureA.rplts",
        phi_or,
        &[
            ("t1", &["<a>1", "<a>1/2 <b>1", "<a>1/2 <c>1"]),
            ("t2", &["<a>1", "<a>1/2 <b>1", "<a>1/2 <c>1", "<a>1 (<b>1 | <c>1)"]),
            ("u_bc", bc),
            ("u_nil", none),
            ("v_b", b),
            ("v_c", c),
        ],
    )?;
    n += check_sets(
        "fixtureE.rplts",
        phi_or,
        &[
            ("t9", &["<a>1", "<a>1/2 <b>1", "<a>1/2 <c>1"]),
            ("t10", &["<a>1", "<a>1/2 <b>1", "<a>1/2 <c>1", "<a>3/5 (<b>1 | <c>1)"]),
            ("y_bc", bc),
            ("y_nil", none),
            ("y_b", b),
            ("y_c", c),
        ],
    )?;
    n += check_sets(
        "fixtureF.rplts",
        phi_or,
        &[
            ("t11", &["<a>1"]),
            ("t12", &["<a>1", "<a>1 <b>1"]),
            ("t13", &["<a>1", "<a>7/10 <b>1"]),
        ],
    )?;
    within(Duration::from_secs(1), start, format!("{n} sets match"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let n = check_sets(
        "fixtureA.rplts",
        phi_and,
        &[
            ("t1", &["<a>1", "<a>1/2 <b>1", "<a>1/2 <c>1", "<a>1/2 (<b>1 & <c>1)"]),
            ("t2", &["<a>1", "<a>1/2 <b>1", "<a>1/2 <c>1"]),
            ("u_bc", &["<b>1", "<c>1"]),
            ("u_nil", &[]),
            ("v_b", &["<b>1"]),
            ("v_c", &["<c>1"]),
        ],
    )?;
    // Contributions 1/5, 1/5, 1/10, 1/10 under t3 and 1/10, 3/10, 1/5 under
    // t4 must each merge into a single <a>3/5 <b>1.
    let sys = load("splb.rplts");
    let merged = parse_formula("<a>3/5 <b>1").unwrap();
    for root in ["t3", "t4"] {
        let phi = phi_and(&tree(&sys, root));
        let ab: Vec<&Formula> = phi
            .formulas()
            .iter()
            .filter(|f| matches!(f, Formula::Diamond(a, _, body) if a.to_string() == "a" && **body == Formula::can("b")))
            .collect();
        if ab != vec![&merged] {
            let shown: Vec<String> = ab.iter().map(|f| f.to_string()).collect();
            return Err(format!("{root}: <a>_p <b>1 members {shown:?}, expected [<a>3/5 <b>1]"));
        }
    }
    within(Duration::from_secs(1), start, format!("{n} sets match, splb merge reproduced"))
}

/// Runs the CLI and returns the formula and the state it holds in.
fn cli_distinguish(file: &str, s1: &str, s2: &str, logic: &str) -> Result<(Formula, String), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_rpbis"))
        .arg("distinguish")
        .arg(fixture(file))
        .args([s1, s2, "--logic", logic])
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.code() != Some(1) {
        return Err(format!("{file}: exit status {:?}", out.status.code()));
    }
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    let mut lines = text.lines();
    let formula = parse_formula(lines.next().unwrap_or("")).map_err(|e| e.to_string())?;
    let holder = lines
        .next()
        .and_then(|l| l.strip_prefix("holds in "))
        .ok_or_else(|| format!("unexpected output {text:?}"))?
        .to_string();
    Ok((formula, holder))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let cases: &[(&str, &str, &str, &str, &[&str], &str)] = &[
        ("fixtureD.rplts", "t7", "t8", "or", &["<a>1 <c>1"], "t8"),
        ("fixtureE.rplts", "t9", "t10", "or", &["<a>3/5 (<b>1 | <c>1)"], "t10"),
        ("fixtureC.rplts", "t5", "t6", "or", &["<a>1/2 <b>1", "<a>1/2 <c>1"], "t6"),
        ("fixtureA.rplts", "t1", "t2", "or", &["<a>1 (<b>1 | <c>1)"], "t2"),
        ("fixtureA.rplts", "t1", "t2", "and", &["<a>1/2 (<b>1 & <c>1)"], "t1"),
    ];
    for (file, s1, s2, logic, accepted, holder) in cases {
        let (f, got_holder) = cli_distinguish(file, s1, s2, logic)?;
        let ok: Vec<Formula> = accepted.iter().map(|t| parse_formula(t).unwrap()).collect();
        if !ok.contains(&f) {
            return Err(format!("{file} --logic {logic}: got {f}, expected one of {accepted:?}"));
        }
        if got_holder != *holder {
            return Err(format!("{file} --logic {logic}: holds in {got_holder}, expected {holder}"));
        }
        let sys = load(file);
        let other = if holder == s1 { s2 } else { s1 };
        if !sat_tree(&tree(&sys, holder), &f) || sat_tree(&tree(&sys, other), &f) {
            return Err(format!("{file}: {f} does not separate {holder} from {other}"));
        }
    }
    within(Duration::from_secs(1), start, format!("{} goldens reproduced", cases.len()))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let systems = 1000;
    let mut synth = Synthesizer::new();
    let mut checked = 0;
    for seed in 0..systems {
        let sys = random_rplts(&GenParams {
            max_states: 6,
            max_actions: 3,
            max_branching: 3,
            denominator_bound: 8,
            seed: 0x5eed_0000 + seed,
        });
        for s1 in sys.states() {
            for s2 in sys.states() {
                if s1 == s2 {
                    continue;
                }
                let bis = bisimilar(&sys, s1, s2).unwrap();
                for logic in LogicId::ALL {
                    let got = synth.distinguish_states(&sys, s1, s2, logic).unwrap();
                    checked += 1;
                    let ctx = || format!("seed {seed}, {s1:?} vs {s2:?}, {logic}");
                    match got {
                        None if bis => {}
                        None => return Err(format!("{}: none for non-bisimilar states", ctx())),
                        Some((d, _)) if bis => return Err(format!("{}: {} for bisimilar states", ctx(), d.formula)),
                        Some((d, level)) => {
                            let (yes, no) = match d.holds_in {
                                Side::First => (s1, s2),
                                Side::Second => (s2, s1),
                            };
                            let f = &d.formula;
                            if !in_fragment(f, logic) {
                                return Err(format!("{}: {f} not in fragment", ctx()));
                            }
                            if !sat_state(&sys, yes, f).unwrap() || sat_state(&sys, no, f).unwrap() {
                                return Err(format!("{}: {f} does not separate", ctx()));
                            }
                            if f.depth() > level {
                                return Err(format!("{}: depth {} above level {level}", ctx(), f.depth()));
                            }
                        }
                    }
                }
            }
        }
    }
    let s = synth.stats();
    within(
        Duration::from_secs(60),
        start,
        format!(
            "{systems} systems, {checked} checks; steps: {} preferred, {} alternate, {} searched",
            s.preferred, s.alternate, s.searched
        ),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let systems = 500;
    let mut pairs = 0;
    for seed in 0..systems {
        let sys = random_rplts(&GenParams {
            max_states: 6,
            max_actions: 3,
            max_branching: 3,
            denominator_bound: 8,
            seed: 0xc0de_0000 + seed,
        });
        let n = sys.num_states();
        let levels: Vec<Vec<Rpt>> = (0..=n + 2).map(|k| unfold_all(&sys, k)).collect();
        for s1 in sys.states() {
            for s2 in sys.states() {
                if s1 >= s2 {
                    continue;
                }
                pairs += 1;
                let bis = bisimilar(&sys, s1, s2).unwrap();
                if semantic_eq(&sys, s1, s2).unwrap() != bis {
                    return Err(format!("seed {seed}: tree equality disagrees with bisimilarity on {s1:?}, {s2:?}"));
                }
                let eq: Vec<bool> = levels.iter().map(|l| l[s1.index()] == l[s2.index()]).collect();
                // Equal prunings up to some level, then different forever.
                if eq.windows(2).any(|w| !w[0] && w[1]) {
                    return Err(format!("seed {seed}: prunings of {s1:?}, {s2:?} equal again after differing"));
                }
                if eq[n] != eq[n + 2] || eq[n] != bis {
                    return Err(format!("seed {seed}: prunings of {s1:?}, {s2:?} not stable from level {n}"));
                }
            }
        }
        for k in 0..=n + 1 {
            for s in sys.states() {
                if prune(&levels[k + 1][s.index()], k) != levels[k][s.index()] {
                    return Err(format!("seed {seed}: pruning level {} at {k} differs from level {k}", k + 1));
                }
            }
        }
    }
    within(Duration::from_secs(60), start, format!("{systems} systems, {pairs} pairs"))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let systems = 200;
    let mut checks = 0;
    for seed in 0..systems {
        let sys = random_rplts(&GenParams {
            max_states: 5,
            max_actions: 3,
            max_branching: 3,
            denominator_bound: 6,
            seed: 0x0ac1_0000 + seed,
        });
        for s1 in sys.states() {
            for s2 in sys.states() {
                if s1 >= s2 {
                    continue;
                }
                let bis = bisimilar(&sys, s1, s2).unwrap();
                for logic in LogicId::ALL {
                    checks += 1;
                    let eq = logical_eq_bruteforce(&sys, s1, s2, logic, sys.num_states()).unwrap();
                    if eq != bis {
                        return Err(format!("seed {seed}, {logic}: enumeration says {eq}, bisimilar {bis}"));
                    }
                }
            }
        }
    }
    within(Duration::from_secs(300), start, format!("{systems} systems, {checks} checks"))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let sys = load("fixtureG.rplts");
    let (s1, s2) = (sys.state("s1").unwrap(), sys.state("s2").unwrap());
    let mut synth = Synthesizer::new();
    for logic in LogicId::ALL {
        let (d, level) = synth.distinguish_states(&sys, s1, s2, logic).unwrap().ok_or("no formula")?;
        if level != 1 || d.formula.depth() > 1 {
            return Err(format!("{logic}: {} at level {level}", d.formula));
        }
    }
    let at = |n: usize, s| unfold(&sys, s, n).unwrap();
    let sat = |n: usize, f: &Formula| (sat_tree(&at(n, s1), f), sat_tree(&at(n, s2), f));
    let neg = parse_formula("<a>1 !<c>1").unwrap();
    if sat(1, &neg) != (true, false) {
        return Err("<a>1 !<c>1 should separate the level-1 prunings".into());
    }
    if sat(2, &neg) != (false, false) {
        return Err("<a>1 !<c>1 should hold in neither level-2 pruning".into());
    }
    let disj = parse_formula("<a>1 | <b>1 <c>1").unwrap();
    if sat(1, &disj) != (true, false) {
        return Err("<a>1 | <b>1 <c>1 should separate the level-1 prunings".into());
    }
    let derived = parse_formula("<a>1 | <b>1").unwrap();
    if sat(1, &derived) != (true, true) {
        return Err("<a>1 | <b>1 should hold in both level-1 prunings".into());
    }
    within(Duration::from_secs(1), start, "depth-1 formulas for all logics".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("phi-or golden sets", criterion_1),
        ("phi-and golden sets and splb", criterion_2),
        ("distinguishing-formula goldens", criterion_3),
        ("synthesis soundness on random systems", criterion_4),
        ("tree semantics and prune stabilization", criterion_5),
        ("brute-force logical equivalence", criterion_6),
        ("depth bound on the a/b example", criterion_7),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({detail})", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
