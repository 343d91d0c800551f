//! Word expressions: the textual form `a^4b^{n+1}a^5b^5(ab)^{5n-9}` used by
//! derivation files, parsed to a tree and lowered to a [`ParamWord`].
//!
//! Grammar: `expr := term+`, `term := atom exponent?`,
//! `atom := 'a' | 'b' | '(' expr ')'`,
//! `exponent := '^' INT | '^' '{' affine '}'`.

use std::fmt;

use thiserror::Error;

use crate::affine::{AffineExpr, Binding, ParamWord, SymbolicCounts};
use crate::word::{Letter, Word};

/// Parse tree of a word expression. Printing and re-parsing is the identity
/// on trees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WordExpr {
    Letter(Letter),
    /// A parenthesized group.
    Group(Box<WordExpr>),
    /// `base ^ exp`; the base is a letter or group.
    Power { base: Box<WordExpr>, exp: AffineExpr },
    /// Concatenation of two or more terms.
    Seq(Vec<WordExpr>),
}

impl WordExpr {
    fn seq(mut terms: Vec<WordExpr>) -> WordExpr {
        if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            WordExpr::Seq(terms)
        }
    }

    /// Lower to block/count form.
    pub fn lower(&self) -> Result<ParamWord, LowerError> {
        ParamWord::new(self.segments()?).map_err(|_| LowerError::EmptyBlock)
    }

    fn segments(&self) -> Result<Vec<(Word, AffineExpr)>, LowerError> {
        match self {
            WordExpr::Letter(l) => {
                Ok(vec![(Word::new(vec![*l]), AffineExpr::constant(1))])
            }
            WordExpr::Group(inner) => inner.segments(),
            WordExpr::Seq(terms) => {
                let mut out = Vec::new();
                for term in terms {
                    out.extend(term.segments()?);
                }
                Ok(out)
            }
            WordExpr::Power { base, exp } => {
                let base_segments = base.segments()?;
                if let Some(c) = exp.is_constant() {
                    if c < 0 {
                        return Err(LowerError::NegativeConstantExponent {
                            expr: exp.to_string(),
                            value: c,
                        });
                    }
                    if let Some(word) = concrete(&base_segments)? {
                        if word.is_empty() || c == 0 {
                            return Ok(vec![]);
                        }
                        return Ok(vec![(word, AffineExpr::constant(c))]);
                    }
                    let mut out = Vec::new();
                    for _ in 0..c {
                        out.extend(base_segments.iter().cloned());
                    }
                    Ok(out)
                } else {
                    let word = concrete(&base_segments)?
                        .ok_or(LowerError::SymbolicPowerOfSymbolicBase)?;
                    if word.is_empty() {
                        return Err(LowerError::EmptyBlock);
                    }
                    Ok(vec![(word, exp.clone())])
                }
            }
        }
    }

    /// Symbolic length and letter counts straight off the tree, independent
    /// of lowering.
    pub fn symbolic_counts(&self) -> Result<SymbolicCounts, LowerError> {
        match self {
            WordExpr::Letter(l) => {
                let one = AffineExpr::constant(1);
                let zero = AffineExpr::constant(0);
                let (a, b) = match l {
                    Letter::A => (one.clone(), zero),
                    Letter::B => (zero, one.clone()),
                };
                Ok(SymbolicCounts { length: one, count_a: a, count_b: b })
            }
            WordExpr::Group(inner) => inner.symbolic_counts(),
            WordExpr::Seq(terms) => {
                let mut total = SymbolicCounts {
                    length: AffineExpr::constant(0),
                    count_a: AffineExpr::constant(0),
                    count_b: AffineExpr::constant(0),
                };
                for term in terms {
                    let c = term.symbolic_counts()?;
                    total.length = total.length + c.length;
                    total.count_a = total.count_a + c.count_a;
                    total.count_b = total.count_b + c.count_b;
                }
                Ok(total)
            }
            WordExpr::Power { base, exp } => {
                if let Some(c) = exp.is_constant() {
                    if c < 0 {
                        return Err(LowerError::NegativeConstantExponent {
                            expr: exp.to_string(),
                            value: c,
                        });
                    }
                }
                let c = base.symbolic_counts()?;
                let scale = |e: &AffineExpr| {
                    e.checked_mul(exp).map_err(|_| LowerError::SymbolicPowerOfSymbolicBase)
                };
                Ok(SymbolicCounts {
                    length: scale(&c.length)?,
                    count_a: scale(&c.count_a)?,
                    count_b: scale(&c.count_b)?,
                })
            }
        }
    }

    /// Shorthand: lower and instantiate.
    pub fn instantiate(&self, binding: &Binding) -> Result<Word, InstantiateError> {
        Ok(self.lower()?.instantiate(binding)?)
    }
}

fn concrete(segments: &[(Word, AffineExpr)]) -> Result<Option<Word>, LowerError> {
    let mut out = Word::empty();
    for (block, count) in segments {
        match count.is_constant() {
            Some(c) if c >= 0 => out.extend_from(&block.repeated(c as usize)),
            Some(c) => {
                return Err(LowerError::NegativeConstantExponent {
                    expr: count.to_string(),
                    value: c,
                })
            }
            None => return Ok(None),
        }
    }
    Ok(Some(out))
}

/// Structural failure while lowering a word expression.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LowerError {
    #[error("constant exponent {expr} = {value} is negative")]
    NegativeConstantExponent { expr: String, value: i64 },
    #[error("symbolic exponent applied to a base with symbolic exponents is not affine")]
    SymbolicPowerOfSymbolicBase,
    #[error("symbolic exponent applied to the empty word")]
    EmptyBlock,
}

/// Lowering or evaluation failure when instantiating a word expression.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstantiateError {
    #[error(transparent)]
    Lower(#[from] LowerError),
    #[error(transparent)]
    Affine(#[from] crate::affine::AffineError),
}

impl fmt::Display for WordExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WordExpr::Letter(l) => write!(f, "{}", l.as_char()),
            WordExpr::Group(inner) => write!(f, "({inner})"),
            WordExpr::Power { base, exp } => match exp.is_constant() {
                Some(c) if c >= 0 => write!(f, "{base}^{c}"),
                _ => write!(f, "{base}^{{{exp}}}"),
            },
            WordExpr::Seq(terms) => {
                for term in terms {
                    write!(f, "{term}")?;
                }
                Ok(())
            }
        }
    }
}

/// What went wrong while reading a word expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WordExprErrorKind {
    Syntax,
    NegativeLiteralExponent,
}

/// Word-expression parse failure at a (1-based) column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("column {col}: {msg}")]
pub struct WordExprError {
    pub col: usize,
    pub kind: WordExprErrorKind,
    pub msg: String,
}

struct ExprParser {
    chars: Vec<char>,
    at: usize,
}

impl ExprParser {
    fn error(&self, msg: impl Into<String>) -> WordExprError {
        WordExprError { col: self.at + 1, kind: WordExprErrorKind::Syntax, msg: msg.into() }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.at).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace()) {
            self.at += 1;
        }
    }

    fn parse_expr(&mut self) -> Result<WordExpr, WordExprError> {
        let mut terms = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some('a') | Some('b') | Some('(') => terms.push(self.parse_term()?),
                _ => break,
            }
        }
        if terms.is_empty() {
            return Err(self.error("expected a word expression ('a', 'b' or '(')"));
        }
        Ok(WordExpr::seq(terms))
    }

    fn parse_term(&mut self) -> Result<WordExpr, WordExprError> {
        let atom = match self.peek() {
            Some('a') => {
                self.at += 1;
                WordExpr::Letter(Letter::A)
            }
            Some('b') => {
                self.at += 1;
                WordExpr::Letter(Letter::B)
            }
            Some('(') => {
                self.at += 1;
                let inner = self.parse_expr()?;
                self.skip_ws();
                if self.peek() != Some(')') {
                    return Err(self.error("expected ')'"));
                }
                self.at += 1;
                WordExpr::Group(Box::new(inner))
            }
            _ => return Err(self.error("expected 'a', 'b' or '('")),
        };
        if self.peek() == Some('^') {
            self.at += 1;
            let exp = self.parse_exponent()?;
            return Ok(WordExpr::Power { base: Box::new(atom), exp });
        }
        Ok(atom)
    }

    fn parse_exponent(&mut self) -> Result<AffineExpr, WordExprError> {
        match self.peek() {
            Some('{') => {
                self.at += 1;
                let start = self.at;
                while self.peek().is_some_and(|c| c != '}') {
                    self.at += 1;
                }
                if self.peek() != Some('}') {
                    return Err(self.error("unterminated '{' in exponent"));
                }
                let body: String = self.chars[start..self.at].iter().collect();
                self.at += 1;
                let expr: AffineExpr = body.parse().map_err(
                    |e: crate::affine::AffineParseError| WordExprError {
                        col: start + e.col,
                        kind: WordExprErrorKind::Syntax,
                        msg: e.msg,
                    },
                )?;
                if let Some(c) = expr.is_constant() {
                    if c < 0 {
                        return Err(WordExprError {
                            col: start + 1,
                            kind: WordExprErrorKind::NegativeLiteralExponent,
                            msg: format!("literal exponent {c} is negative"),
                        });
                    }
                }
                Ok(expr)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.at;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.at += 1;
                }
                let digits: String = self.chars[start..self.at].iter().collect();
                let value: i64 = digits
                    .parse()
                    .map_err(|_| self.error("exponent overflows i64"))?;
                Ok(AffineExpr::constant(value))
            }
            _ => Err(self.error("expected an integer or '{affine}' after '^'")),
        }
    }
}

/// Parse a complete word expression; trailing input is an error.
pub fn parse_word_expr(text: &str) -> Result<WordExpr, WordExprError> {
    let mut p = ExprParser { chars: text.chars().collect(), at: 0 };
    let expr = p.parse_expr()?;
    p.skip_ws();
    if let Some(c) = p.peek() {
        return Err(p.error(format!("unexpected {c:?} after word expression")));
    }
    Ok(expr)
}
