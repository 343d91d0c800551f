//! Interactive session: load a word, list and apply moves, mark and delete
//! letters, inspect normal forms, and export the session as a derivation
//! that `verify` replays to the same final word.

use std::collections::BTreeSet;

use handlecalc::affine::bind_n;
use handlecalc::canonical::normal_form;
use handlecalc::word::{apply_rule, enumerate_moves, RuleId, Word};
use handlecalc::wordexpr::parse_word_expr;

#[derive(Debug, Clone, PartialEq, Eq)]
enum SessionStep {
    Rewrite(RuleId, usize),
    Mark(Vec<usize>),
    Delete,
}

#[derive(Debug, Clone)]
struct State {
    initial: Word,
    current: Word,
    marks: BTreeSet<usize>,
    steps: Vec<SessionStep>,
    /// Snapshots (word, marks, steps length) taken before each mutation.
    history: Vec<(Word, BTreeSet<usize>, usize)>,
}

/// Response to one REPL line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reply {
    pub output: String,
    pub quit: bool,
}

impl Reply {
    fn text(output: impl Into<String>) -> Reply {
        Reply { output: output.into(), quit: false }
    }

    fn error(msg: impl std::fmt::Display) -> Reply {
        Reply { output: format!("error: {msg}"), quit: false }
    }
}

/// One interactive session. Lines go in through [`ReplSession::handle`];
/// everything is deterministic, so a session replays identically from its
/// export.
#[derive(Debug, Clone, Default)]
pub struct ReplSession {
    state: Option<State>,
}

const USAGE: &str = "commands: load <word-expr> [n=<int>] | moves | apply <idx> | \
                     mark <pos...> | delete | nf | undo | export | quit";

impl ReplSession {
    pub fn new() -> ReplSession {
        ReplSession::default()
    }

    pub fn handle(&mut self, line: &str) -> Reply {
        let line = line.trim();
        if line.is_empty() {
            return Reply::text("");
        }
        let (command, rest) = match line.split_once(char::is_whitespace) {
            Some((c, r)) => (c, r.trim()),
            None => (line, ""),
        };
        match command {
            "load" => self.cmd_load(rest),
            "moves" => self.with_state(|state| {
                let moves = enumerate_moves(&state.current, &RuleId::ALL);
                if moves.is_empty() {
                    return Reply::text("no moves apply");
                }
                let lines: Vec<String> = moves
                    .iter()
                    .enumerate()
                    .map(|(i, (rule, pos))| format!("[{i}] {} @{pos}", rule.dsl_name()))
                    .collect();
                Reply::text(lines.join("\n"))
            }),
            "apply" => self.cmd_apply(rest),
            "mark" => self.cmd_mark(rest),
            "delete" => self.cmd_delete(),
            "nf" => self.with_state(|state| Reply::text(normal_form(&state.current).to_string())),
            "undo" => self.cmd_undo(),
            "export" => self.with_state(|state| Reply::text(export_text(state))),
            "quit" | "exit" => Reply { output: String::new(), quit: true },
            _ => Reply::error(format_args!("unknown command {command:?}; {USAGE}")),
        }
    }

    fn with_state(&mut self, f: impl FnOnce(&mut State) -> Reply) -> Reply {
        match &mut self.state {
            Some(state) => f(state),
            None => Reply::error("no word loaded; use 'load <word-expr> [n=<int>]'"),
        }
    }

    fn cmd_load(&mut self, rest: &str) -> Reply {
        let mut expr_text = rest;
        let mut n: Option<i64> = None;
        if let Some((head, tail)) = rest.rsplit_once(char::is_whitespace) {
            if let Some(value) = tail.strip_prefix("n=") {
                match value.parse() {
                    Ok(v) => {
                        n = Some(v);
                        expr_text = head.trim();
                    }
                    Err(_) => return Reply::error(format_args!("invalid n binding {tail:?}")),
                }
            }
        }
        let expr_text = expr_text.trim_matches('"');
        let expr = match parse_word_expr(expr_text) {
            Ok(e) => e,
            Err(e) => return Reply::error(e),
        };
        let binding = bind_n(n.unwrap_or(1));
        let word = match expr.instantiate(&binding) {
            Ok(w) => w,
            Err(e) => return Reply::error(e),
        };
        let reply = Reply::text(format!("word: {word} (length {})", word.len()));
        self.state = Some(State {
            initial: word.clone(),
            current: word,
            marks: BTreeSet::new(),
            steps: Vec::new(),
            history: Vec::new(),
        });
        reply
    }

    fn cmd_apply(&mut self, rest: &str) -> Reply {
        let idx: usize = match rest.parse() {
            Ok(i) => i,
            Err(_) => return Reply::error("usage: apply <move index from 'moves'>"),
        };
        self.with_state(|state| {
            if !state.marks.is_empty() {
                return Reply::error("marks are pending; 'delete' or 'undo' first");
            }
            let moves = enumerate_moves(&state.current, &RuleId::ALL);
            let Some(&(rule, pos)) = moves.get(idx) else {
                return Reply::error(format_args!("no move [{idx}]; {} available", moves.len()));
            };
            state.snapshot();
            state.current = apply_rule(&state.current, rule, pos).expect("listed move applies");
            state.steps.push(SessionStep::Rewrite(rule, pos));
            Reply::text(format!("word: {}", state.current))
        })
    }

    fn cmd_mark(&mut self, rest: &str) -> Reply {
        let positions: Result<Vec<usize>, _> = rest
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect();
        let positions = match positions {
            Ok(p) if !p.is_empty() => p,
            _ => return Reply::error("usage: mark <pos> [<pos> ...]"),
        };
        self.with_state(|state| {
            for &pos in &positions {
                if pos >= state.current.len() {
                    return Reply::error(format_args!(
                        "position {pos} outside word of length {}",
                        state.current.len()
                    ));
                }
                if state.marks.contains(&pos) {
                    return Reply::error(format_args!("position {pos} already marked"));
                }
            }
            let mut unique = positions.clone();
            unique.sort_unstable();
            unique.dedup();
            if unique.len() != positions.len() {
                return Reply::error("duplicate positions in mark command");
            }
            state.snapshot();
            state.marks.extend(&positions);
            state.steps.push(SessionStep::Mark(positions));
            let listed: Vec<String> = state.marks.iter().map(|p| p.to_string()).collect();
            Reply::text(format!("marks: {}", listed.join(" ")))
        })
    }

    fn cmd_delete(&mut self) -> Reply {
        self.with_state(|state| {
            state.snapshot();
            let letters: Vec<_> = state
                .current
                .letters()
                .iter()
                .enumerate()
                .filter(|(i, _)| !state.marks.contains(i))
                .map(|(_, &l)| l)
                .collect();
            state.current = Word::new(letters);
            state.marks.clear();
            state.steps.push(SessionStep::Delete);
            Reply::text(format!("word: {}", state.current))
        })
    }

    fn cmd_undo(&mut self) -> Reply {
        self.with_state(|state| {
            let Some((word, marks, len)) = state.history.pop() else {
                return Reply::error("nothing to undo");
            };
            state.current = word;
            state.marks = marks;
            state.steps.truncate(len);
            Reply::text(format!("word: {}", state.current))
        })
    }
}

impl State {
    fn snapshot(&mut self) {
        self.history.push((self.current.clone(), self.marks.clone(), self.steps.len()));
    }
}

/// Render the session as derivation-DSL text; `verify` replays it to the
/// session's current word.
fn export_text(state: &State) -> String {
    let mut out = String::new();
    out.push_str("derivation repl_session\n");
    out.push_str(&format!("initial {}\n", state.initial));
    for step in &state.steps {
        match step {
            SessionStep::Rewrite(rule, pos) => {
                out.push_str(&format!("{} at {pos}\n", rule.dsl_name()))
            }
            SessionStep::Mark(positions) => {
                let listed: Vec<String> = positions.iter().map(|p| p.to_string()).collect();
                out.push_str(&format!("mark {}\n", listed.join(", ")));
            }
            SessionStep::Delete => out.push_str("delete marked\n"),
        }
    }
    out.push_str(&format!("assert word {}\n", state.current));
    out
}
