//! Implementations of the non-interactive subcommands. Reports go to the
//! given writer (stdout in the binary); diagnostics go to stderr. Each
//! command returns the process exit code: 0 success/pass, 1 failed check or
//! goal not found, 2 usage or parse error.

use std::io::Write;
use std::path::Path;

use handlecalc::affine::bind_n;
use handlecalc::canonical::{equivalent, normal_form};
use handlecalc::derivation::{check_range, derived_min_n, parse_derivation};
use handlecalc::search::{path_as_dsl, search, Goal, Outcome, SearchConfig, Strategy};
use handlecalc::topology::theorem_claim;
use handlecalc::word::{RuleId, Word};
use handlecalc::wordexpr::parse_word_expr;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

fn parse_range(spec: &str) -> Option<(i64, i64)> {
    match spec.split_once("..") {
        Some((from, to)) => Some((from.trim().parse().ok()?, to.trim().parse().ok()?)),
        None => {
            let n: i64 = spec.trim().parse().ok()?;
            Some((n, n))
        }
    }
}

/// `verify <path> [--n A..B]`: replay a derivation file, one report per `n`.
pub fn cmd_verify(out: &mut dyn Write, path: &Path, n_spec: Option<&str>) -> u8 {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return EXIT_USAGE;
        }
    };
    let derivation = match parse_derivation(&text) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return EXIT_USAGE;
        }
    };
    let (n_from, n_to) = match n_spec {
        Some(spec) => match parse_range(spec) {
            Some(range) => range,
            None => {
                eprintln!("error: invalid range {spec:?}; expected A..B or a single integer");
                return EXIT_USAGE;
            }
        },
        None => match derived_min_n(&derivation) {
            Ok(n) => (n, n),
            Err(e) => {
                eprintln!("error: cannot derive a default n for {}: {e}", derivation.name);
                return EXIT_USAGE;
            }
        },
    };
    let reports = match check_range(&derivation, n_from, n_to) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let mut passed = 0usize;
    for report in &reports {
        writeln!(out, "{}", report.render()).expect("write report");
        passed += report.passed() as usize;
    }
    let failed = reports.len() - passed;
    writeln!(out, "verify: {} n={}..{} pass={} fail={}", derivation.name, n_from, n_to, passed, failed)
        .expect("write summary");
    if failed == 0 {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

/// `nf <word>`: print the Garside normal form.
pub fn cmd_nf(out: &mut dyn Write, literal: &str) -> u8 {
    let word: Word = match literal.parse() {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    writeln!(out, "{}", normal_form(&word)).expect("write normal form");
    EXIT_PASS
}

/// `equiv <w1> <w2>`: decide monoid equality; exit 0 iff equivalent.
pub fn cmd_equiv(out: &mut dyn Write, left: &str, right: &str) -> u8 {
    let (left, right): (Word, Word) = match (left.parse(), right.parse()) {
        (Ok(l), Ok(r)) => (l, r),
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let eq = equivalent(&left, &right);
    writeln!(out, "equivalent: {eq}").expect("write verdict");
    if eq {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

/// Options of `search`, mirroring the command-line flags.
pub struct SearchOpts<'a> {
    pub start: &'a str,
    pub n: Option<i64>,
    pub target: Option<&'a str>,
    pub pattern_p: Option<usize>,
    pub strategy: &'a str,
    pub beam: usize,
    pub max_depth: usize,
    pub max_states: usize,
    pub rules: &'a str,
    pub workers: usize,
}

/// `search --start <expr> ...`: on success print a pasteable step list.
pub fn cmd_search(out: &mut dyn Write, opts: &SearchOpts) -> u8 {
    let expr = match parse_word_expr(opts.start.trim_matches('"')) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: start expression: {e}");
            return EXIT_USAGE;
        }
    };
    let lowered = match expr.lower() {
        Ok(pw) => pw,
        Err(e) => {
            eprintln!("error: start expression: {e}");
            return EXIT_USAGE;
        }
    };
    if !lowered.free_vars().is_empty() && opts.n.is_none() {
        eprintln!("error: start expression is parametric; supply --n");
        return EXIT_USAGE;
    }
    let start = match lowered.instantiate(&bind_n(opts.n.unwrap_or(1))) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: start expression: {e}");
            return EXIT_USAGE;
        }
    };

    let goal = match (opts.target, opts.pattern_p) {
        (Some(target), None) => match target.parse::<Word>() {
            Ok(w) => Goal::ExactWord(w),
            Err(e) => {
                eprintln!("error: target word: {e}");
                return EXIT_USAGE;
            }
        },
        (None, Some(p)) if p >= 2 => Goal::GoalPattern { p },
        (None, Some(p)) => {
            eprintln!("error: --pattern-p must be at least 2, got {p}");
            return EXIT_USAGE;
        }
        _ => {
            eprintln!("error: supply exactly one of --target or --pattern-p");
            return EXIT_USAGE;
        }
    };
    let strategy = match opts.strategy {
        "bfs" => Strategy::Bfs,
        "iddfs" => Strategy::Iddfs,
        "beam" => Strategy::GreedyBeam { beam_width: opts.beam },
        other => {
            eprintln!("error: unknown strategy {other:?}; use bfs, iddfs or beam");
            return EXIT_USAGE;
        }
    };
    let rules = match opts.rules {
        "braid" => RuleId::BRAID.to_vec(),
        "all" => RuleId::ALL.to_vec(),
        other => {
            eprintln!("error: unknown rule set {other:?}; use braid or all");
            return EXIT_USAGE;
        }
    };
    let cfg = SearchConfig {
        rules,
        max_depth: opts.max_depth,
        max_states: opts.max_states,
        strategy,
        goal,
        workers: opts.workers,
    };
    let result = search(&start, &cfg);
    match result.outcome {
        Outcome::Found(path) => {
            write!(out, "{}", path_as_dsl(&path)).expect("write steps");
            eprintln!(
                "found: depth={} states-expanded={}",
                path.len(),
                result.states_expanded
            );
            EXIT_PASS
        }
        Outcome::Exhausted => {
            eprintln!(
                "exhausted: no goal within depth {} ({} states expanded)",
                opts.max_depth, result.states_expanded
            );
            EXIT_FAIL
        }
        Outcome::BudgetExceeded => {
            eprintln!(
                "budget exceeded: more than {} states ({} expanded)",
                opts.max_states, result.states_expanded
            );
            EXIT_FAIL
        }
    }
}

/// `claim --p P --n N`: print the stable claim line; exit 0 iff it holds.
pub fn cmd_claim(out: &mut dyn Write, p: i64, n: i64) -> u8 {
    if n < 1 || p < 2 {
        eprintln!("error: claims are defined for n >= 1 and p >= 2");
        return EXIT_USAGE;
    }
    let claim = theorem_claim(n, p);
    writeln!(out, "{claim}").expect("write claim");
    if claim.holds {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
