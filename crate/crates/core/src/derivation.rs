//! The derivation DSL: parsing, replay checking, and symbolic accounting.
//!
//! A derivation file records one rewriting derivation: an initial parametric
//! word, a sequence of fully positioned steps (rewrites, marks, deletion,
//! assertions, bounded loops), and optional `post` records for the
//! accounting of conversions performed after the replayed chain. The checker
//! instantiates the derivation at a concrete `n` and replays it move by
//! move; equivalence assertions are certified through the Garside normal
//! form, so a passing replay is a machine-checked soundness certificate for
//! every rewriting step.
//!
//! File format (line oriented, `#` starts a comment):
//!
//! ```text
//! derivation <name>
//! param n [>= <int>]
//! expect min_n <int>
//! initial <word-expr>
//! braid fwd|rev at <affine>
//! macro R3|R3'|R4|R4' at <affine>
//! foreach <var> in <affine> .. <affine>
//!   ...
//! end
//! mark <affine>[, <affine>]*
//! delete marked
//! assert word <word-expr>
//! assert equiv initial
//! post repeat R4 <affine>
//! post omit <affine> a, <affine> b
//! ```

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::affine::{bind_n, min_nonneg_n, AffineExpr, Binding, ThresholdError};
use crate::canonical::equivalent;
use crate::word::{apply_rule, GoalMatch, MarkedWord, MoveError, RuleId, Word};
use crate::wordexpr::{parse_word_expr, LowerError, WordExpr, WordExprErrorKind};

/// One replayable step of a derivation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    /// Apply `rule` at the evaluated position.
    Rewrite { rule: RuleId, pos: AffineExpr },
    /// `foreach var in from .. to` (`to` exclusive).
    Loop { var: String, from: AffineExpr, to: AffineExpr, body: Vec<Step> },
    /// Mark positions for later omission.
    Mark { positions: Vec<AffineExpr> },
    /// Omit every marked letter.
    DeleteMarked,
    /// The current word must equal the instantiated expression letter for
    /// letter.
    AssertWord(WordExpr),
    /// The current word must be monoid-equivalent to the instantiated
    /// initial word. Invalid after any deletion.
    AssertEquivInitial,
}

impl Step {
    /// Single-line rendering; loops render their header only.
    fn describe(&self) -> String {
        match self {
            Step::Rewrite { rule, pos } => format!("{} at {}", rule.dsl_name(), pos),
            Step::Loop { var, from, to, .. } => format!("foreach {var} in {from} .. {to}"),
            Step::Mark { positions } => {
                let list: Vec<String> = positions.iter().map(|p| p.to_string()).collect();
                format!("mark {}", list.join(", "))
            }
            Step::DeleteMarked => "delete marked".to_string(),
            Step::AssertWord(expr) => format!("assert word {expr}"),
            Step::AssertEquivInitial => "assert equiv initial".to_string(),
        }
    }
}

/// Accounting-only record of work performed after the replayed chain; these
/// contribute nonnegativity constraints to [`derived_min_n`] but are not
/// replayed (the post-conversion letter order is diagram data, not text).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PostRecord {
    /// Number of additional R4 conversions.
    RepeatR4(AffineExpr),
    /// Numbers of `a`- and `b`-letters omitted afterwards.
    Omit { count_a: AffineExpr, count_b: AffineExpr },
}

/// A named, replayable derivation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub name: String,
    /// Declared lower bound for `n`; `None` when no `param` line is present.
    /// The effective floor is 1 in both cases.
    pub declared_floor: Option<i64>,
    /// Documented expected threshold, if any.
    pub expected_min_n: Option<i64>,
    pub initial: WordExpr,
    pub steps: Vec<Step>,
    pub post: Vec<PostRecord>,
}

impl Derivation {
    pub fn floor(&self) -> i64 {
        self.declared_floor.unwrap_or(1)
    }
}

/// Parse failure kinds for derivation files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    NegativeLiteralExponent,
    DuplicateLoopVar,
    UnboundVariable,
}

/// Derivation-file parse failure with source location.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
    pub msg: String,
}

struct LineCtx {
    line: usize,
}

impl LineCtx {
    fn err(&self, kind: ParseErrorKind, msg: impl Into<String>) -> ParseError {
        ParseError { line: self.line, col: 1, kind, msg: msg.into() }
    }

    fn syntax(&self, msg: impl Into<String>) -> ParseError {
        self.err(ParseErrorKind::Syntax, msg)
    }

    fn affine(&self, text: &str) -> Result<AffineExpr, ParseError> {
        text.trim().parse::<AffineExpr>().map_err(|e| ParseError {
            line: self.line,
            col: e.col,
            kind: ParseErrorKind::Syntax,
            msg: e.msg,
        })
    }

    fn word_expr(&self, text: &str) -> Result<WordExpr, ParseError> {
        parse_word_expr(text.trim()).map_err(|e| ParseError {
            line: self.line,
            col: e.col,
            kind: match e.kind {
                WordExprErrorKind::Syntax => ParseErrorKind::Syntax,
                WordExprErrorKind::NegativeLiteralExponent => {
                    ParseErrorKind::NegativeLiteralExponent
                }
            },
            msg: e.msg,
        })
    }
}

/// Parse a derivation file.
struct OpenLoop {
    var: String,
    from: AffineExpr,
    to: AffineExpr,
    line: usize,
}

pub fn parse_derivation(text: &str) -> Result<Derivation, ParseError> {
    let mut name: Option<String> = None;
    let mut declared_floor: Option<i64> = None;
    let mut expected_min_n: Option<i64> = None;
    let mut initial: Option<WordExpr> = None;
    let mut post: Vec<PostRecord> = Vec::new();
    // Stack of open step lists: the bottom is the derivation body, one extra
    // entry per open foreach.
    let mut stack: Vec<(Option<OpenLoop>, Vec<Step>)> = vec![(None, Vec::new())];

    for (idx, raw) in text.lines().enumerate() {
        let ctx = LineCtx { line: idx + 1 };
        let line = match raw.find('#') {
            Some(at) => &raw[..at],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }

        if let Some(rest) = line.strip_prefix("derivation ") {
            if name.is_some() {
                return Err(ctx.syntax("duplicate 'derivation' line"));
            }
            let n = rest.trim();
            if n.is_empty() || !n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(ctx.syntax(format!("invalid derivation name {n:?}")));
            }
            name = Some(n.to_string());
            continue;
        }
        if name.is_none() {
            return Err(ctx.syntax("expected 'derivation <name>' first"));
        }

        if line == "param n" {
            declared_floor = Some(1);
            continue;
        }
        if let Some(rest) = line.strip_prefix("param n >=") {
            let floor: i64 = rest
                .trim()
                .parse()
                .map_err(|_| ctx.syntax("expected an integer floor after 'param n >='"))?;
            declared_floor = Some(floor);
            continue;
        }
        if let Some(rest) = line.strip_prefix("expect min_n ") {
            let v: i64 = rest
                .trim()
                .parse()
                .map_err(|_| ctx.syntax("expected an integer after 'expect min_n'"))?;
            expected_min_n = Some(v);
            continue;
        }
        if let Some(rest) = line.strip_prefix("initial ") {
            if initial.is_some() {
                return Err(ctx.syntax("duplicate 'initial' line"));
            }
            initial = Some(ctx.word_expr(rest)?);
            continue;
        }

        // Step lines.
        if let Some(rest) = line.strip_prefix("braid ") {
            let (dir, pos_text) = rest
                .trim()
                .split_once(" at ")
                .ok_or_else(|| ctx.syntax("expected 'braid fwd|rev at <affine>'"))?;
            let rule = match dir.trim() {
                "fwd" => RuleId::BraidFwd,
                "rev" => RuleId::BraidRev,
                other => return Err(ctx.syntax(format!("unknown braid direction {other:?}"))),
            };
            let pos = ctx.affine(pos_text)?;
            stack.last_mut().unwrap().1.push(Step::Rewrite { rule, pos });
            continue;
        }
        if let Some(rest) = line.strip_prefix("macro ") {
            let (which, pos_text) = rest
                .trim()
                .split_once(" at ")
                .ok_or_else(|| ctx.syntax("expected 'macro R3|R3'|R4|R4' at <affine>'"))?;
            let rule = match which.trim() {
                "R3" => RuleId::R3,
                "R3'" => RuleId::R3Rev,
                "R4" => RuleId::R4,
                "R4'" => RuleId::R4Rev,
                other => return Err(ctx.syntax(format!("unknown macro rule {other:?}"))),
            };
            let pos = ctx.affine(pos_text)?;
            stack.last_mut().unwrap().1.push(Step::Rewrite { rule, pos });
            continue;
        }
        if let Some(rest) = line.strip_prefix("foreach ") {
            let (var, range) = rest
                .trim()
                .split_once(" in ")
                .ok_or_else(|| ctx.syntax("expected 'foreach <var> in <affine> .. <affine>'"))?;
            let var = var.trim().to_string();
            if var.is_empty() || !var.chars().all(|c| c.is_ascii_lowercase()) {
                return Err(ctx.syntax(format!("invalid loop variable {var:?}")));
            }
            let (from_text, to_text) = range
                .split_once("..")
                .ok_or_else(|| ctx.syntax("expected '..' in foreach range"))?;
            let from = ctx.affine(from_text)?;
            let to = ctx.affine(to_text)?;
            stack.push((Some(OpenLoop { var, from, to, line: ctx.line }), Vec::new()));
            continue;
        }
        if line == "end" {
            let (header, body) = stack.pop().unwrap();
            match header {
                Some(OpenLoop { var, from, to, .. }) => {
                    stack.last_mut().unwrap().1.push(Step::Loop { var, from, to, body });
                }
                None => return Err(ctx.syntax("'end' without a matching 'foreach'")),
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("mark ") {
            let positions: Vec<AffineExpr> = rest
                .split(',')
                .map(|part| ctx.affine(part))
                .collect::<Result<_, _>>()?;
            stack.last_mut().unwrap().1.push(Step::Mark { positions });
            continue;
        }
        if line == "delete marked" {
            stack.last_mut().unwrap().1.push(Step::DeleteMarked);
            continue;
        }
        if let Some(rest) = line.strip_prefix("assert word ") {
            let expr = ctx.word_expr(rest)?;
            stack.last_mut().unwrap().1.push(Step::AssertWord(expr));
            continue;
        }
        if line == "assert equiv initial" {
            stack.last_mut().unwrap().1.push(Step::AssertEquivInitial);
            continue;
        }
        if let Some(rest) = line.strip_prefix("post repeat R4") {
            post.push(PostRecord::RepeatR4(ctx.affine(rest)?));
            continue;
        }
        if let Some(rest) = line.strip_prefix("post omit ") {
            let (a_part, b_part) = rest
                .split_once(',')
                .ok_or_else(|| ctx.syntax("expected 'post omit <affine> a, <affine> b'"))?;
            let a_expr = a_part
                .trim()
                .strip_suffix(" a")
                .or_else(|| a_part.trim().strip_suffix('a').filter(|s| s.ends_with(char::is_whitespace)))
                .ok_or_else(|| ctx.syntax("first omit count must end with letter 'a'"))?;
            let b_expr = b_part
                .trim()
                .strip_suffix(" b")
                .or_else(|| b_part.trim().strip_suffix('b').filter(|s| s.ends_with(char::is_whitespace)))
                .ok_or_else(|| ctx.syntax("second omit count must end with letter 'b'"))?;
            post.push(PostRecord::Omit {
                count_a: ctx.affine(a_expr)?,
                count_b: ctx.affine(b_expr)?,
            });
            continue;
        }

        return Err(ctx.syntax(format!("unrecognized line {line:?}")));
    }

    if stack.len() != 1 {
        let open_line = stack.last().unwrap().0.as_ref().unwrap().line;
        return Err(ParseError {
            line: open_line,
            col: 1,
            kind: ParseErrorKind::Syntax,
            msg: "'foreach' without a matching 'end'".to_string(),
        });
    }
    let last_line = LineCtx { line: text.lines().count().max(1) };
    let name = name.ok_or_else(|| last_line.syntax("missing 'derivation <name>' line"))?;
    let initial = initial.ok_or_else(|| last_line.syntax("missing 'initial' line"))?;
    let derivation = Derivation {
        name,
        declared_floor,
        expected_min_n,
        initial,
        steps: stack.pop().unwrap().1,
        post,
    };
    validate_scopes(&derivation)?;
    Ok(derivation)
}

/// Enforce loop-variable uniqueness along nesting paths and that every
/// expression references only `n` and enclosing loop variables.
fn validate_scopes(d: &Derivation) -> Result<(), ParseError> {
    let mut scope: Vec<String> = vec!["n".to_string()];
    check_expr_vars(&expr_vars_of_word(&d.initial), &scope, "initial")?;
    fn walk(steps: &[Step], scope: &mut Vec<String>) -> Result<(), ParseError> {
        for step in steps {
            match step {
                Step::Rewrite { pos, .. } => {
                    check_expr_vars(&pos.vars(), scope, &step.describe())?
                }
                Step::Mark { positions } => {
                    for p in positions {
                        check_expr_vars(&p.vars(), scope, &step.describe())?;
                    }
                }
                Step::AssertWord(expr) => {
                    check_expr_vars(&expr_vars_of_word(expr), scope, &step.describe())?
                }
                Step::DeleteMarked | Step::AssertEquivInitial => {}
                Step::Loop { var, from, to, body } => {
                    check_expr_vars(&from.vars(), scope, &step.describe())?;
                    check_expr_vars(&to.vars(), scope, &step.describe())?;
                    if scope.contains(var) {
                        return Err(ParseError {
                            line: 0,
                            col: 1,
                            kind: ParseErrorKind::DuplicateLoopVar,
                            msg: format!("loop variable '{var}' shadows an enclosing binding"),
                        });
                    }
                    scope.push(var.clone());
                    walk(body, scope)?;
                    scope.pop();
                }
            }
        }
        Ok(())
    }
    walk(&d.steps, &mut scope)?;
    for record in &d.post {
        match record {
            PostRecord::RepeatR4(e) => check_expr_vars(&e.vars(), &scope, "post repeat R4")?,
            PostRecord::Omit { count_a, count_b } => {
                check_expr_vars(&count_a.vars(), &scope, "post omit")?;
                check_expr_vars(&count_b.vars(), &scope, "post omit")?;
            }
        }
    }
    Ok(())
}

fn expr_vars_of_word(expr: &WordExpr) -> BTreeSet<String> {
    match expr {
        WordExpr::Letter(_) => BTreeSet::new(),
        WordExpr::Group(inner) => expr_vars_of_word(inner),
        WordExpr::Power { base, exp } => {
            let mut vars = expr_vars_of_word(base);
            vars.extend(exp.vars());
            vars
        }
        WordExpr::Seq(terms) => terms.iter().flat_map(expr_vars_of_word).collect(),
    }
}

fn check_expr_vars(
    vars: &BTreeSet<String>,
    scope: &[String],
    context: &str,
) -> Result<(), ParseError> {
    for var in vars {
        if !scope.iter().any(|s| s == var) {
            return Err(ParseError {
                line: 0,
                col: 1,
                kind: ParseErrorKind::UnboundVariable,
                msg: format!("unbound variable '{var}' in '{context}'"),
            });
        }
    }
    Ok(())
}

impl fmt::Display for Derivation {
    /// Emit the DSL text; parsing it back yields an identical derivation.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "derivation {}", self.name)?;
        if let Some(floor) = self.declared_floor {
            writeln!(f, "param n >= {floor}")?;
        }
        if let Some(v) = self.expected_min_n {
            writeln!(f, "expect min_n {v}")?;
        }
        writeln!(f, "initial {}", self.initial)?;
        fn write_steps(f: &mut fmt::Formatter<'_>, steps: &[Step], indent: usize) -> fmt::Result {
            for step in steps {
                match step {
                    Step::Loop { body, .. } => {
                        writeln!(f, "{:indent$}{}", "", step.describe())?;
                        write_steps(f, body, indent + 2)?;
                        writeln!(f, "{:indent$}end", "")?;
                    }
                    _ => writeln!(f, "{:indent$}{}", "", step.describe())?,
                }
            }
            Ok(())
        }
        write_steps(f, &self.steps, 0)?;
        for record in &self.post {
            match record {
                PostRecord::RepeatR4(e) => writeln!(f, "post repeat R4 {e}")?,
                PostRecord::Omit { count_a, count_b } => {
                    writeln!(f, "post omit {count_a} a, {count_b} b")?
                }
            }
        }
        Ok(())
    }
}

/// Reason a replay step failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FailCause {
    PatternMismatch { rule: RuleId, pos: usize },
    OutOfRange { pos: i64, window: usize, len: usize },
    AssertFailed { expected: String, found: String },
    EquivAfterDelete,
    NegativeCount { expr: String, value: i64 },
    UnboundVariable { name: String },
    InvalidMark { msg: String },
    MarksPending,
    Lower { msg: String },
}

impl fmt::Display for FailCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailCause::PatternMismatch { rule, pos } => {
                write!(f, "pattern mismatch: {} does not apply at {pos}", rule.dsl_name())
            }
            FailCause::OutOfRange { pos, window, len } => {
                write!(f, "out of range: position {pos} with window {window} in word of length {len}")
            }
            FailCause::AssertFailed { expected, found } => {
                write!(f, "assert failed: expected {expected}, found {found}")
            }
            FailCause::EquivAfterDelete => {
                write!(f, "equiv-initial assertion after deletion is meaningless")
            }
            FailCause::NegativeCount { expr, value } => {
                write!(f, "negative count: {expr} = {value}")
            }
            FailCause::UnboundVariable { name } => write!(f, "unbound variable '{name}'"),
            FailCause::InvalidMark { msg } => write!(f, "invalid mark: {msg}"),
            FailCause::MarksPending => write!(f, "rewrite while marks are pending"),
            FailCause::Lower { msg } => write!(f, "word expression does not lower: {msg}"),
        }
    }
}

/// First failing step of a replay.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepFailure {
    /// 1-based index in execution order; 0 means the initial word itself
    /// failed to instantiate.
    pub step_number: usize,
    pub step: String,
    pub cause: FailCause,
}

/// Outcome of replaying one derivation at one `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub derivation: String,
    pub n: i64,
    pub steps_executed: usize,
    pub deleted: usize,
    pub initial_length: usize,
    pub final_length: usize,
    pub final_word: Word,
    /// Goal-pattern decomposition of the final word, with `p` read off the
    /// leading a-run.
    pub pattern: Option<(usize, GoalMatch)>,
    pub failure: Option<StepFailure>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }

    /// Flat key-value block with stable field order, for golden files.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("derivation: {}\n", self.derivation));
        out.push_str(&format!("n: {}\n", self.n));
        match &self.failure {
            None => {
                out.push_str("status: pass\n");
                out.push_str(&format!("steps: {}\n", self.steps_executed));
                out.push_str(&format!("initial-length: {}\n", self.initial_length));
                out.push_str(&format!("deleted: {}\n", self.deleted));
                out.push_str(&format!("final-length: {}\n", self.final_length));
                out.push_str(&format!("final-word: {}\n", self.final_word));
                match &self.pattern {
                    Some((p, m)) => out.push_str(&format!(
                        "pattern: p={} m={} k={} j={}\n",
                        p, m.m, m.k, m.j
                    )),
                    None => out.push_str("pattern: none\n"),
                }
            }
            Some(failure) => {
                out.push_str("status: fail\n");
                out.push_str(&format!("steps: {}\n", self.steps_executed));
                out.push_str(&format!("failed-step: {}\n", failure.step_number));
                out.push_str(&format!("step: {}\n", failure.step));
                out.push_str(&format!("cause: {}\n", failure.cause));
            }
        }
        out
    }
}

/// Precondition violations of [`check`] and [`check_range`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("n = {n} is below the declared floor {floor}")]
    BelowFloor { n: i64, floor: i64 },
    #[error("empty range: n_from = {from} exceeds n_to = {to}")]
    EmptyRange { from: i64, to: i64 },
}

struct Replay {
    env: Binding,
    initial_word: Word,
    current: Word,
    marks: BTreeSet<usize>,
    deleted: usize,
    steps_executed: usize,
    equiv_allowed: bool,
}

impl Replay {
    fn fail(&self, step: &Step, cause: FailCause) -> StepFailure {
        StepFailure { step_number: self.steps_executed + 1, step: step.describe(), cause }
    }

    fn eval(&self, expr: &AffineExpr, step: &Step) -> Result<i64, StepFailure> {
        expr.eval(&self.env).map_err(|e| {
            let cause = match e {
                crate::affine::AffineError::UnboundVariable(name) => {
                    FailCause::UnboundVariable { name }
                }
                other => FailCause::Lower { msg: other.to_string() },
            };
            self.fail(step, cause)
        })
    }

    fn instantiate(&self, expr: &WordExpr, step: &Step) -> Result<Word, StepFailure> {
        use crate::wordexpr::InstantiateError;
        expr.instantiate(&self.env).map_err(|e| {
            let cause = match e {
                InstantiateError::Affine(crate::affine::AffineError::NegativeCount {
                    expr,
                    value,
                }) => FailCause::NegativeCount { expr, value },
                InstantiateError::Affine(crate::affine::AffineError::UnboundVariable(name)) => {
                    FailCause::UnboundVariable { name }
                }
                other => FailCause::Lower { msg: other.to_string() },
            };
            self.fail(step, cause)
        })
    }

    fn run_steps(&mut self, steps: &[Step]) -> Result<(), StepFailure> {
        for step in steps {
            self.run_step(step)?;
        }
        Ok(())
    }

    fn run_step(&mut self, step: &Step) -> Result<(), StepFailure> {
        match step {
            Step::Rewrite { rule, pos } => {
                if !self.marks.is_empty() {
                    return Err(self.fail(step, FailCause::MarksPending));
                }
                let pos_value = self.eval(pos, step)?;
                if pos_value < 0 {
                    return Err(self.fail(
                        step,
                        FailCause::OutOfRange {
                            pos: pos_value,
                            window: rule.lhs().len(),
                            len: self.current.len(),
                        },
                    ));
                }
                match apply_rule(&self.current, *rule, pos_value as usize) {
                    Ok(next) => self.current = next,
                    Err(MoveError::OutOfRange { pos, len, .. }) => {
                        return Err(self.fail(
                            step,
                            FailCause::OutOfRange {
                                pos: pos as i64,
                                window: rule.lhs().len(),
                                len,
                            },
                        ))
                    }
                    Err(MoveError::PatternMismatch { rule, pos }) => {
                        return Err(self.fail(step, FailCause::PatternMismatch { rule, pos }))
                    }
                }
            }
            Step::Loop { var, from, to, body } => {
                let from_value = self.eval(from, step)?;
                let to_value = self.eval(to, step)?;
                if to_value < from_value {
                    let trip = to.clone() - from.clone();
                    return Err(self.fail(
                        step,
                        FailCause::NegativeCount {
                            expr: trip.to_string(),
                            value: to_value - from_value,
                        },
                    ));
                }
                for value in from_value..to_value {
                    self.env.insert(var.clone(), value);
                    self.run_steps(body)?;
                }
                self.env.remove(var);
                return Ok(());
            }
            Step::Mark { positions } => {
                for pos in positions {
                    let value = self.eval(pos, step)?;
                    if value < 0 || value as usize >= self.current.len() {
                        return Err(self.fail(
                            step,
                            FailCause::InvalidMark {
                                msg: format!(
                                    "{pos} = {value} outside word of length {}",
                                    self.current.len()
                                ),
                            },
                        ));
                    }
                    if !self.marks.insert(value as usize) {
                        return Err(self.fail(
                            step,
                            FailCause::InvalidMark {
                                msg: format!("{pos} = {value} marked twice"),
                            },
                        ));
                    }
                }
            }
            Step::DeleteMarked => {
                let marked = MarkedWord::new(self.current.clone(), self.marks.iter().copied())
                    .expect("marks validated on insertion");
                self.deleted += self.marks.len();
                self.current = marked.delete_marked();
                self.marks.clear();
                self.equiv_allowed = false;
            }
            Step::AssertWord(expr) => {
                let expected = self.instantiate(expr, step)?;
                if expected != self.current {
                    return Err(self.fail(
                        step,
                        FailCause::AssertFailed {
                            expected: expected.to_string(),
                            found: self.current.to_string(),
                        },
                    ));
                }
            }
            Step::AssertEquivInitial => {
                if !self.equiv_allowed {
                    return Err(self.fail(step, FailCause::EquivAfterDelete));
                }
                if !equivalent(&self.current, &self.initial_word) {
                    return Err(self.fail(
                        step,
                        FailCause::AssertFailed {
                            expected: format!("word equivalent to {}", self.initial_word),
                            found: self.current.to_string(),
                        },
                    ));
                }
            }
        }
        self.steps_executed += 1;
        Ok(())
    }
}

/// Replay `d` at the given `n`.
pub fn check(d: &Derivation, n: i64) -> Result<CheckReport, CheckError> {
    if n < d.floor() {
        return Err(CheckError::BelowFloor { n, floor: d.floor() });
    }
    let env = bind_n(n);
    let mut report = CheckReport {
        derivation: d.name.clone(),
        n,
        steps_executed: 0,
        deleted: 0,
        initial_length: 0,
        final_length: 0,
        final_word: Word::empty(),
        pattern: None,
        failure: None,
    };

    let initial_word = match d.initial.instantiate(&env) {
        Ok(word) => word,
        Err(e) => {
            use crate::wordexpr::InstantiateError;
            let cause = match e {
                InstantiateError::Affine(crate::affine::AffineError::NegativeCount {
                    expr,
                    value,
                }) => FailCause::NegativeCount { expr, value },
                other => FailCause::Lower { msg: other.to_string() },
            };
            report.failure = Some(StepFailure {
                step_number: 0,
                step: format!("initial {}", d.initial),
                cause,
            });
            return Ok(report);
        }
    };

    report.initial_length = initial_word.len();
    let mut replay = Replay {
        env,
        initial_word: initial_word.clone(),
        current: initial_word,
        marks: BTreeSet::new(),
        deleted: 0,
        steps_executed: 0,
        equiv_allowed: true,
    };
    let failure = replay.run_steps(&d.steps).err();

    report.steps_executed = replay.steps_executed;
    report.deleted = replay.deleted;
    report.final_length = replay.current.len();
    report.final_word = replay.current;
    report.failure = failure;
    if report.passed() {
        debug_assert_eq!(report.initial_length, report.final_length + report.deleted);
        report.pattern = pattern_of(&report.final_word);
    }
    Ok(report)
}

/// Goal-pattern decomposition with `p` determined by the leading a-run.
fn pattern_of(word: &Word) -> Option<(usize, GoalMatch)> {
    let run = word
        .letters()
        .iter()
        .take_while(|&&l| l == crate::word::Letter::A)
        .count();
    if run == 0 {
        return None;
    }
    let p = run + 1;
    crate::word::match_goal_pattern(word, p).map(|m| (p, m))
}

/// Replay `d` for every `n` in `[n_from, n_to]`; failures land in the
/// reports, not in the error.
pub fn check_range(d: &Derivation, n_from: i64, n_to: i64) -> Result<Vec<CheckReport>, CheckError> {
    if n_from > n_to {
        return Err(CheckError::EmptyRange { from: n_from, to: n_to });
    }
    (n_from..=n_to).map(|n| check(d, n)).collect()
}

/// Failure while computing symbolic data of a derivation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolicError {
    #[error(transparent)]
    Threshold(#[from] ThresholdError),
    #[error(transparent)]
    Lower(#[from] LowerError),
    #[error("nested loop trip counts multiply to a non-affine expression")]
    NonAffineTrips,
}

/// Substitute every loop variable of `expr` by the endpoint of its range
/// that minimizes (`minimize = true`) or maximizes the expression, walking
/// scopes innermost first.
fn bound_over_scopes(
    expr: &AffineExpr,
    scopes: &[(String, AffineExpr, AffineExpr)],
    minimize: bool,
) -> AffineExpr {
    let mut out = expr.clone();
    for (var, from, to) in scopes.iter().rev() {
        let coeff = out.coeff(var);
        if coeff == 0 {
            continue;
        }
        let top = to.clone() - AffineExpr::constant(1);
        let pick_low = (coeff > 0) == minimize;
        out = out.substitute(var, if pick_low { from } else { &top });
    }
    out
}

struct ConstraintWalk {
    constraints: Vec<AffineExpr>,
    length: AffineExpr,
    pending_marks: AffineExpr,
    deleted: AffineExpr,
    scopes: Vec<(String, AffineExpr, AffineExpr)>,
}

impl ConstraintWalk {
    fn trip_product(&self) -> Result<AffineExpr, SymbolicError> {
        let mut product = AffineExpr::constant(1);
        for (_, from, to) in &self.scopes {
            let trips = to.clone() - from.clone();
            product = product.checked_mul(&trips).map_err(|_| SymbolicError::NonAffineTrips)?;
        }
        Ok(product)
    }

    fn require_nonneg(&mut self, expr: &AffineExpr) {
        self.constraints.push(bound_over_scopes(expr, &self.scopes, true));
    }

    fn require_in_word(&mut self, pos: &AffineExpr, window: usize) {
        // pos >= 0 at its minimum; pos + window <= length at its maximum.
        self.require_nonneg(pos);
        let slack = self.length.clone() - bound_over_scopes(pos, &self.scopes, false)
            - AffineExpr::constant(window as i64);
        self.constraints.push(slack);
    }

    fn walk(&mut self, steps: &[Step]) -> Result<(), SymbolicError> {
        for step in steps {
            match step {
                Step::Rewrite { rule, pos } => {
                    self.require_in_word(pos, rule.lhs().len());
                }
                Step::Mark { positions } => {
                    for pos in positions {
                        self.require_in_word(pos, 1);
                    }
                    let count = AffineExpr::constant(positions.len() as i64);
                    let total = count.checked_mul(&self.trip_product()?)
                        .map_err(|_| SymbolicError::NonAffineTrips)?;
                    self.pending_marks = self.pending_marks.clone() + total;
                }
                Step::DeleteMarked => {
                    self.deleted = self.deleted.clone() + self.pending_marks.clone();
                    self.length = self.length.clone() - self.pending_marks.clone();
                    self.pending_marks = AffineExpr::constant(0);
                    self.require_nonneg(&self.length.clone());
                }
                Step::AssertWord(expr) => {
                    for (_, count) in expr.lower()?.segments() {
                        self.require_nonneg(count);
                    }
                }
                Step::AssertEquivInitial => {}
                Step::Loop { var, from, to, body } => {
                    let trips = to.clone() - from.clone();
                    self.require_nonneg(&trips);
                    self.scopes.push((var.clone(), from.clone(), to.clone()));
                    self.walk(body)?;
                    self.scopes.pop();
                }
            }
        }
        Ok(())
    }
}

fn constraint_walk(d: &Derivation) -> Result<ConstraintWalk, SymbolicError> {
    let initial = d.initial.lower()?;
    let mut walk = ConstraintWalk {
        constraints: Vec::new(),
        length: initial.symbolic_counts().length,
        pending_marks: AffineExpr::constant(0),
        deleted: AffineExpr::constant(0),
        scopes: Vec::new(),
    };
    for (_, count) in initial.segments() {
        walk.require_nonneg(count);
    }
    walk.walk(&d.steps)?;
    for record in &d.post {
        match record {
            PostRecord::RepeatR4(e) => walk.require_nonneg(e),
            PostRecord::Omit { count_a, count_b } => {
                walk.require_nonneg(count_a);
                walk.require_nonneg(count_b);
            }
        }
    }
    Ok(walk)
}

/// Smallest `n` at which every affine count arising during replay (segment
/// counts, loop trips, mark cardinalities, position bounds, post records) is
/// nonnegative, clamped to the declared floor.
///
/// Constraints under a loop variable are closed over the variable's range by
/// substituting the extremal endpoint, so the result is a sound sufficient
/// bound; for loops whose body positions stay in range whenever the trip
/// count is nonnegative (all shipped derivations) it is exact.
pub fn derived_min_n(d: &Derivation) -> Result<i64, SymbolicError> {
    let walk = constraint_walk(d)?;
    let threshold = min_nonneg_n(&walk.constraints)?;
    Ok(threshold.max(d.floor()))
}

/// Symbolic length/deletion bookkeeping of a derivation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicAccounting {
    pub initial_length: AffineExpr,
    /// Total marks consumed by `delete marked` steps.
    pub deleted: AffineExpr,
    /// `initial_length - deleted`.
    pub final_length: AffineExpr,
    /// Symbolic length of the last `assert word`, when present.
    pub final_assert_length: Option<AffineExpr>,
}

impl SymbolicAccounting {
    /// The accounting identity `initial = final + deleted`, checked against
    /// the independently computed length of the asserted final word.
    pub fn identity_holds(&self) -> bool {
        match &self.final_assert_length {
            Some(expr) => *expr == self.final_length,
            None => true,
        }
    }
}

/// Compute the symbolic accounting of `d`.
pub fn symbolic_accounting(d: &Derivation) -> Result<SymbolicAccounting, SymbolicError> {
    let walk = constraint_walk(d)?;
    let initial_length = d.initial.lower()?.symbolic_counts().length;
    let final_length = initial_length.clone() - walk.deleted.clone();
    let final_assert_length = last_assert_word(&d.steps)
        .map(|expr| Ok::<_, SymbolicError>(expr.lower()?.symbolic_counts().length))
        .transpose()?;
    Ok(SymbolicAccounting {
        initial_length,
        deleted: walk.deleted,
        final_length,
        final_assert_length,
    })
}

fn last_assert_word(steps: &[Step]) -> Option<&WordExpr> {
    steps.iter().rev().find_map(|step| match step {
        Step::AssertWord(expr) => Some(expr),
        _ => None,
    })
}

/// Letter-count bookkeeping of a loop whose body is straight-line rewrites:
/// per trip each rule consumes its left-hand side's letters and produces its
/// right-hand side's.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopAccounting {
    pub trips: AffineExpr,
    pub consumed_a: AffineExpr,
    pub consumed_b: AffineExpr,
    pub produced_a: AffineExpr,
    pub produced_b: AffineExpr,
}

/// Accounting of a [`Step::Loop`]; `None` for other steps or loops with
/// non-rewrite bodies.
pub fn loop_accounting(step: &Step) -> Option<LoopAccounting> {
    let Step::Loop { from, to, body, .. } = step else {
        return None;
    };
    let mut per_trip = (0i64, 0i64, 0i64, 0i64);
    for inner in body {
        let Step::Rewrite { rule, .. } = inner else {
            return None;
        };
        let lhs = Word::new(rule.lhs().to_vec()).letter_counts();
        let rhs = Word::new(rule.rhs().to_vec()).letter_counts();
        per_trip.0 += lhs.0 as i64;
        per_trip.1 += lhs.1 as i64;
        per_trip.2 += rhs.0 as i64;
        per_trip.3 += rhs.1 as i64;
    }
    let trips = to.clone() - from.clone();
    Some(LoopAccounting {
        consumed_a: trips.clone() * per_trip.0,
        consumed_b: trips.clone() * per_trip.1,
        produced_a: trips.clone() * per_trip.2,
        produced_b: trips.clone() * per_trip.3,
        trips,
    })
}

impl Derivation {
    /// Accounting of every top-level loop with a straight-line rewrite body.
    pub fn loop_accountings(&self) -> Vec<LoopAccounting> {
        self.steps.iter().filter_map(loop_accounting).collect()
    }
}

/// The derivations shipped with the crate, embedded from `fixtures/`.
pub mod fixtures {
    pub const PROP_3_1: &str = include_str!("../../../fixtures/prop_3_1.deriv");
    pub const PROP_3_2: &str = include_str!("../../../fixtures/prop_3_2.deriv");
    pub const PROP_3_3: &str = include_str!("../../../fixtures/prop_3_3.deriv");
    pub const PROP_3_4: &str = include_str!("../../../fixtures/prop_3_4.deriv");
    pub const MACRO_R3: &str = include_str!("../../../fixtures/macro_r3.deriv");
    pub const MACRO_R4: &str = include_str!("../../../fixtures/macro_r4.deriv");
    pub const R4_ROUNDS: &str = include_str!("../../../fixtures/r4_rounds.deriv");

    /// `(file stem, text)` for every shipped fixture.
    pub fn all() -> [(&'static str, &'static str); 7] {
        [
            ("prop_3_1", PROP_3_1),
            ("prop_3_2", PROP_3_2),
            ("prop_3_3", PROP_3_3),
            ("prop_3_4", PROP_3_4),
            ("macro_r3", MACRO_R3),
            ("macro_r4", MACRO_R4),
            ("r4_rounds", R4_ROUNDS),
        ]
    }
}

/// Which macro rule to expand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacroKind {
    R3,
    R4,
}

/// The shipped elementary-move expansion of a macro rule: a derivation from
/// `(ab)^5` to the rule's right-hand side using only braid moves.
pub fn expand_macro_fixture(kind: MacroKind) -> Derivation {
    let text = match kind {
        MacroKind::R3 => fixtures::MACRO_R3,
        MacroKind::R4 => fixtures::MACRO_R4,
    };
    parse_derivation(text).expect("embedded macro fixture parses")
}
