//! `handlecalc`: verify derivation files, compute normal forms, decide
//! equivalence, search for derivations, print no-1-handle claims, and poke
//! at words interactively.

use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use handlecalc_cli::commands::{
    cmd_claim, cmd_equiv, cmd_nf, cmd_search, cmd_verify, SearchOpts, EXIT_USAGE,
};
use handlecalc_cli::repl::ReplSession;

#[derive(Parser)]
#[command(name = "handlecalc", version, about = "Two-letter handle-word calculus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a derivation file over a range of n and report each run
    Verify {
        /// Path to a .deriv file
        path: PathBuf,
        /// Range "A..B" (inclusive) or a single integer; defaults to the
        /// derivation's derived minimal n
        #[arg(long = "n")]
        n: Option<String>,
    },
    /// Print the Garside normal form of a word
    Nf {
        /// Word literal over {a, b}
        word: String,
    },
    /// Decide monoid equivalence of two words (exit 0 iff equivalent)
    Equiv { left: String, right: String },
    /// Search for a rewriting derivation; on success prints a step list
    /// pasteable into a .deriv file
    Search {
        /// Start word expression, e.g. "(ab)^5" or "(ab)^{6n}"
        #[arg(long)]
        start: String,
        /// Binding for n when the start expression is parametric
        #[arg(long)]
        n: Option<i64>,
        /// Exact target word literal
        #[arg(long)]
        target: Option<String>,
        /// Target the goal pattern a^{p-1} b^m a^p b^k (ab)^j for this p
        #[arg(long = "pattern-p")]
        pattern_p: Option<usize>,
        /// bfs, iddfs or beam
        #[arg(long, default_value = "bfs")]
        strategy: String,
        /// Beam width for --strategy beam
        #[arg(long, default_value_t = 64)]
        beam: usize,
        #[arg(long = "max-depth", default_value_t = 16)]
        max_depth: usize,
        #[arg(long = "max-states", default_value_t = 1_000_000)]
        max_states: usize,
        /// braid (elementary moves only) or all (including macros)
        #[arg(long, default_value = "braid")]
        rules: String,
        /// Worker threads for frontier expansion; results are identical for
        /// any count
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Print the no-1-handle claim line for E(n)_{p,p+1}
    Claim {
        #[arg(long)]
        p: i64,
        #[arg(long)]
        n: i64,
    },
    /// Interactive session
    Repl,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let code = match &cli.command {
        Command::Verify { path, n } => cmd_verify(&mut out, path, n.as_deref()),
        Command::Nf { word } => cmd_nf(&mut out, word),
        Command::Equiv { left, right } => cmd_equiv(&mut out, left, right),
        Command::Search {
            start,
            n,
            target,
            pattern_p,
            strategy,
            beam,
            max_depth,
            max_states,
            rules,
            workers,
        } => cmd_search(
            &mut out,
            &SearchOpts {
                start,
                n: *n,
                target: target.as_deref(),
                pattern_p: *pattern_p,
                strategy,
                beam: *beam,
                max_depth: *max_depth,
                max_states: *max_states,
                rules,
                workers: *workers,
            },
        ),
        Command::Claim { p, n } => cmd_claim(&mut out, *p, *n),
        Command::Repl => run_repl(&mut out),
    };
    ExitCode::from(code)
}

fn run_repl(out: &mut dyn Write) -> u8 {
    let mut session = ReplSession::new();
    let stdin = std::io::stdin();
    eprint!("hw> ");
    for line in stdin.lock().lines() {
        let Ok(line) = line else { break };
        let reply = session.handle(&line);
        if !reply.output.is_empty() {
            writeln!(out, "{}", reply.output).expect("write reply");
        }
        if reply.quit {
            break;
        }
        eprint!("hw> ");
    }
    eprintln!();
    0
}
