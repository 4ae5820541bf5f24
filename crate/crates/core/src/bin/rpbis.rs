//! Command-line front end.
//!
//! Exit codes: 0 for bisimilar / true / success, 1 for distinguished / false
//! / self-test failure, 2 for errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use rpbis::oracle::{check_random_case, GenParams};
use rpbis::parser::{render_formula_with, NumberStyle};
use rpbis::report::Report;
use rpbis::rpt::{render_dot, render_tree, unfold};
use rpbis::synth::{Side, Synthesizer};
use rpbis::{bisimilar, parse_formula, parse_system, sat_state, LogicId, Rplts, StateId};

#[derive(Parser)]
#[command(name = "rpbis", version, about = "Bisimilarity and distinguishing formulas for reactive probabilistic systems")]
struct Cli {
    /// Render probabilities as decimals instead of fractions.
    #[arg(long, global = true)]
    decimal: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LogicFlag {
    NegAnd,
    NegOr,
    And,
    Or,
}

impl From<LogicFlag> for LogicId {
    fn from(l: LogicFlag) -> Self {
        match l {
            LogicFlag::NegAnd => LogicId::PmlNegAnd,
            LogicFlag::NegOr => LogicId::PmlNegOr,
            LogicFlag::And => LogicId::PmlAnd,
            LogicFlag::Or => LogicId::PmlOr,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether two states are bisimilar.
    Bisim {
        file: PathBuf,
        s1: String,
        s2: String,
        #[arg(long)]
        json: bool,
    },
    /// Print a formula satisfied by exactly one of two states.
    Distinguish {
        file: PathBuf,
        s1: String,
        s2: String,
        #[arg(long, value_enum, default_value = "or")]
        logic: LogicFlag,
        #[arg(long)]
        json: bool,
    },
    /// Check whether a state satisfies a formula (`@path` reads it from a file).
    Check {
        file: PathBuf,
        state: String,
        formula: String,
    },
    /// Print the canonical tree of a state pruned at a depth.
    Canon {
        file: PathBuf,
        state: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long)]
        dot: bool,
    },
    /// Run randomized cross-checks of all components.
    Selftest {
        #[arg(long, env = "RPBIS_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        cases: u64,
        #[arg(long, default_value_t = 6)]
        max_states: usize,
        #[arg(long, default_value_t = 3)]
        max_actions: usize,
        #[arg(long, default_value_t = 8)]
        denominator_bound: u32,
    },
}

fn load(path: &Path) -> Result<Rplts, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_system(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn state(sys: &Rplts, name: &str) -> Result<StateId, String> {
    sys.state(name).map_err(|e| e.to_string())
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1000.0
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let style = if cli.decimal {
        NumberStyle::Decimal
    } else {
        NumberStyle::Fraction
    };
    match cli.command {
        Command::Bisim { file, s1, s2, json } => {
            let t = Instant::now();
            let sys = load(&file)?;
            let (a, b) = (state(&sys, &s1)?, state(&sys, &s2)?);
            let parse_ms = ms(t);
            let t = Instant::now();
            let same = bisimilar(&sys, a, b).map_err(|e| e.to_string())?;
            let mut report = if same {
                Report::bisimilar(None)
            } else {
                Report::distinguished(None)
            };
            report.timings.insert("parse".into(), parse_ms);
            report.timings.insert("bisim".into(), ms(t));
            if json {
                println!("{}", report.to_json());
            } else {
                println!("{}", report.verdict);
            }
            Ok(ExitCode::from(if same { 0 } else { 1 }))
        }
        Command::Distinguish {
            file,
            s1,
            s2,
            logic,
            json,
        } => {
            let logic = LogicId::from(logic);
            let t = Instant::now();
            let sys = load(&file)?;
            let (a, b) = (state(&sys, &s1)?, state(&sys, &s2)?);
            let parse_ms = ms(t);
            let t = Instant::now();
            let found = Synthesizer::new()
                .distinguish_states(&sys, a, b, logic)
                .map_err(|e| e.to_string())?;
            let synth_ms = ms(t);
            let mut report = match &found {
                None => Report::bisimilar(Some(logic)),
                Some((d, level)) => {
                    let mut r = Report::distinguished(Some(logic));
                    r.formula = Some(render_formula_with(&d.formula, style));
                    r.holds_in = Some(d.holds_in);
                    r.depth = Some(d.formula.depth());
                    r.minimal_level = Some(*level);
                    r
                }
            };
            report.timings.insert("parse".into(), parse_ms);
            report.timings.insert("synth".into(), synth_ms);
            if json {
                println!("{}", report.to_json());
            } else if let (Some(f), Some(side)) = (&report.formula, report.holds_in) {
                println!("{f}");
                let holder = if side == Side::First { &s1 } else { &s2 };
                println!("holds in {holder}");
            } else {
                println!("bisimilar");
            }
            Ok(ExitCode::from(if found.is_none() { 0 } else { 1 }))
        }
        Command::Check {
            file,
            state: name,
            formula,
        } => {
            let sys = load(&file)?;
            let s = state(&sys, &name)?;
            let text = match formula.strip_prefix('@') {
                Some(path) => std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?,
                None => formula,
            };
            let f = parse_formula(&text).map_err(|e| format!("formula: {e}"))?;
            let holds = sat_state(&sys, s, &f).map_err(|e| e.to_string())?;
            println!("{holds}");
            Ok(ExitCode::from(if holds { 0 } else { 1 }))
        }
        Command::Canon {
            file,
            state: name,
            depth,
            dot,
        } => {
            let sys = load(&file)?;
            let s = state(&sys, &name)?;
            let tree = unfold(&sys, s, depth).map_err(|e| e.to_string())?;
            if dot {
                print!("{}", render_dot(&tree, style));
            } else {
                print!("{}", render_tree(&tree, style));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest {
            seed,
            cases,
            max_states,
            max_actions,
            denominator_bound,
        } => {
            if max_states == 0 || max_actions == 0 || denominator_bound == 0 {
                return Err("generator bounds must be positive".into());
            }
            let t = Instant::now();
            let results: Vec<Result<usize, String>> = (0..cases)
                .into_par_iter()
                .map(|i| {
                    check_random_case(&GenParams {
                        max_states,
                        max_actions,
                        max_branching: 3,
                        denominator_bound,
                        seed: seed.wrapping_add(i),
                    })
                })
                .collect();
            let mut pairs = 0;
            let mut failures = 0;
            for r in results {
                match r {
                    Ok(n) => pairs += n,
                    Err(msg) => {
                        failures += 1;
                        println!("FAIL {msg}");
                    }
                }
            }
            println!(
                "{} cases, {pairs} state pairs, {failures} failures, base seed {seed}, {:.0} ms",
                cases,
                ms(t)
            );
            Ok(ExitCode::from(if failures == 0 { 0 } else { 1 }))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
