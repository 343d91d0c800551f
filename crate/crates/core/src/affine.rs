//! Affine integer expressions in the surface parameter `n` (and loop
//! variables), and parametric words whose block repetition counts are affine.
//!
//! Every exponent appearing in the derivations is affine, e.g. `5n-9` or
//! `n+1`, so degree-one expressions with exact integer arithmetic are all the
//! symbolic machinery the calculus needs. Two expressions are equal iff their
//! canonical forms (no zero coefficients stored) are identical.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use thiserror::Error;

use crate::word::Word;

/// Variable assignment used to evaluate affine expressions.
pub type Binding = BTreeMap<String, i64>;

/// Binding of the single parameter `n`.
pub fn bind_n(n: i64) -> Binding {
    Binding::from([("n".to_string(), n)])
}

/// `constant + sum(coeff_v * v)` with integer coefficients. Zero coefficients
/// are never stored, so structural equality is semantic equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct AffineExpr {
    constant: i64,
    coeffs: BTreeMap<String, i64>,
}

/// Evaluation or instantiation failure.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AffineError {
    #[error("unbound variable '{0}'")]
    UnboundVariable(String),
    #[error("repetition count {expr} evaluates to {value} < 0")]
    NegativeCount { expr: String, value: i64 },
    #[error("product of two non-constant affine expressions is not affine")]
    NonAffineProduct,
    #[error("parametric word block is empty")]
    EmptyBlock,
}

impl AffineExpr {
    pub fn constant(value: i64) -> AffineExpr {
        AffineExpr { constant: value, coeffs: BTreeMap::new() }
    }

    pub fn var(name: &str) -> AffineExpr {
        AffineExpr::term(1, name)
    }

    pub fn term(coeff: i64, name: &str) -> AffineExpr {
        let mut coeffs = BTreeMap::new();
        if coeff != 0 {
            coeffs.insert(name.to_string(), coeff);
        }
        AffineExpr { constant: 0, coeffs }
    }

    /// `c*n + d` in the single variable `n`.
    pub fn in_n(coeff: i64, constant: i64) -> AffineExpr {
        AffineExpr::term(coeff, "n") + AffineExpr::constant(constant)
    }

    pub fn is_constant(&self) -> Option<i64> {
        self.coeffs.is_empty().then_some(self.constant)
    }

    pub fn constant_part(&self) -> i64 {
        self.constant
    }

    pub fn coeff(&self, name: &str) -> i64 {
        self.coeffs.get(name).copied().unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.coeffs.keys().cloned().collect()
    }

    pub fn eval(&self, binding: &Binding) -> Result<i64, AffineError> {
        let mut value = self.constant;
        for (name, coeff) in &self.coeffs {
            let v = binding
                .get(name)
                .ok_or_else(|| AffineError::UnboundVariable(name.clone()))?;
            value += coeff * v;
        }
        Ok(value)
    }

    /// Replace `name` by `replacement` (which may itself mention variables).
    pub fn substitute(&self, name: &str, replacement: &AffineExpr) -> AffineExpr {
        let coeff = self.coeff(name);
        if coeff == 0 {
            return self.clone();
        }
        let mut out = self.clone();
        out.coeffs.remove(name);
        out + replacement.clone() * coeff
    }

    /// Product, defined only when at least one factor is constant.
    pub fn checked_mul(&self, other: &AffineExpr) -> Result<AffineExpr, AffineError> {
        if let Some(c) = other.is_constant() {
            Ok(self.clone() * c)
        } else if let Some(c) = self.is_constant() {
            Ok(other.clone() * c)
        } else {
            Err(AffineError::NonAffineProduct)
        }
    }

    fn normalized(mut self) -> AffineExpr {
        self.coeffs.retain(|_, c| *c != 0);
        self
    }
}

impl Add for AffineExpr {
    type Output = AffineExpr;

    fn add(mut self, rhs: AffineExpr) -> AffineExpr {
        self.constant += rhs.constant;
        for (name, coeff) in rhs.coeffs {
            *self.coeffs.entry(name).or_insert(0) += coeff;
        }
        self.normalized()
    }
}

impl Sub for AffineExpr {
    type Output = AffineExpr;

    fn sub(self, rhs: AffineExpr) -> AffineExpr {
        self + -rhs
    }
}

impl Neg for AffineExpr {
    type Output = AffineExpr;

    fn neg(mut self) -> AffineExpr {
        self.constant = -self.constant;
        for coeff in self.coeffs.values_mut() {
            *coeff = -*coeff;
        }
        self
    }
}

impl Mul<i64> for AffineExpr {
    type Output = AffineExpr;

    fn mul(mut self, rhs: i64) -> AffineExpr {
        self.constant *= rhs;
        for coeff in self.coeffs.values_mut() {
            *coeff *= rhs;
        }
        self.normalized()
    }
}

impl fmt::Display for AffineExpr {
    /// Canonical form `c*n+d` with zero terms omitted, e.g. `5*n-9`, `n+1`,
    /// `-n+3`, `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (name, &coeff) in &self.coeffs {
            if wrote {
                write!(f, "{}", if coeff < 0 { "-" } else { "+" })?;
            } else if coeff < 0 {
                write!(f, "-")?;
            }
            match coeff.unsigned_abs() {
                1 => write!(f, "{name}")?,
                c => write!(f, "{c}*{name}")?,
            }
            wrote = true;
        }
        if self.constant != 0 || !wrote {
            if wrote {
                write!(f, "{}", if self.constant < 0 { "-" } else { "+" })?;
                write!(f, "{}", self.constant.unsigned_abs())?;
            } else {
                write!(f, "{}", self.constant)?;
            }
        }
        Ok(())
    }
}

/// Malformed affine literal.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid affine expression at column {col}: {msg}")]
pub struct AffineParseError {
    pub col: usize,
    pub msg: String,
}

impl FromStr for AffineExpr {
    type Err = AffineParseError;

    /// Accepts `INT`, `IDENT`, `INT*IDENT` (also juxtaposed `5n`), combined
    /// with `+` and `-`, e.g. `5n-9`, `2*n - 48`, `-n+3`, `12+2*k`.
    fn from_str(s: &str) -> Result<AffineExpr, AffineParseError> {
        parse_affine(s)
    }
}

fn parse_affine(s: &str) -> Result<AffineExpr, AffineParseError> {
    let chars: Vec<char> = s.chars().collect();
    let mut at = 0usize;
    let err = |at: usize, msg: &str| AffineParseError { col: at + 1, msg: msg.to_string() };
    let skip_ws = |at: &mut usize| {
        while *at < chars.len() && chars[*at].is_whitespace() {
            *at += 1;
        }
    };

    let mut expr = AffineExpr::constant(0);
    let mut first = true;
    loop {
        skip_ws(&mut at);
        if at == chars.len() {
            if first {
                return Err(err(at, "empty expression"));
            }
            return Ok(expr);
        }
        let sign = match chars[at] {
            '+' if !first => {
                at += 1;
                1
            }
            '-' => {
                at += 1;
                -1
            }
            _ if first => 1,
            c => return Err(err(at, &format!("expected '+' or '-', found {c:?}"))),
        };
        first = false;
        skip_ws(&mut at);
        if at == chars.len() {
            return Err(err(at, "dangling sign"));
        }

        // term := INT ['*'] IDENT | INT | IDENT
        let term = if chars[at].is_ascii_digit() {
            let start = at;
            while at < chars.len() && chars[at].is_ascii_digit() {
                at += 1;
            }
            let value: i64 = chars[start..at]
                .iter()
                .collect::<String>()
                .parse()
                .map_err(|_| err(start, "integer literal overflows i64"))?;
            let mut peek = at;
            skip_ws(&mut peek);
            if peek < chars.len() && chars[peek] == '*' {
                at = peek + 1;
                skip_ws(&mut at);
            }
            if at < chars.len() && is_ident_start(chars[at]) {
                let name = read_ident(&chars, &mut at);
                AffineExpr::term(value, &name)
            } else {
                AffineExpr::constant(value)
            }
        } else if is_ident_start(chars[at]) {
            let name = read_ident(&chars, &mut at);
            AffineExpr::var(&name)
        } else {
            return Err(err(at, &format!("unexpected character {:?}", chars[at])));
        };
        expr = expr + term * sign;
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_lowercase()
}

fn read_ident(chars: &[char], at: &mut usize) -> String {
    let start = *at;
    while *at < chars.len() && (chars[*at].is_ascii_lowercase() || chars[*at].is_ascii_digit()) {
        *at += 1;
    }
    chars[start..*at].iter().collect()
}

/// A word given as blocks with affine repetition counts, e.g.
/// `[("ab", 6n)]` for `(ab)^{6n}`. Blocks are non-empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamWord {
    segments: Vec<(Word, AffineExpr)>,
}

/// Symbolic length and letter counts of a [`ParamWord`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicCounts {
    pub length: AffineExpr,
    pub count_a: AffineExpr,
    pub count_b: AffineExpr,
}

impl ParamWord {
    pub fn new(segments: Vec<(Word, AffineExpr)>) -> Result<ParamWord, AffineError> {
        if segments.iter().any(|(block, _)| block.is_empty()) {
            return Err(AffineError::EmptyBlock);
        }
        Ok(ParamWord { segments })
    }

    pub fn segments(&self) -> &[(Word, AffineExpr)] {
        &self.segments
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        self.segments.iter().flat_map(|(_, count)| count.vars()).collect()
    }

    /// Expand every block its evaluated number of times, in order.
    pub fn instantiate(&self, binding: &Binding) -> Result<Word, AffineError> {
        let mut out = Word::empty();
        for (block, count) in &self.segments {
            let value = count.eval(binding)?;
            if value < 0 {
                return Err(AffineError::NegativeCount { expr: count.to_string(), value });
            }
            out.extend_from(&block.repeated(value as usize));
        }
        Ok(out)
    }

    /// Exact symbolic totals; evaluation commutes with `letter_counts` of the
    /// instantiation.
    pub fn symbolic_counts(&self) -> SymbolicCounts {
        let mut length = AffineExpr::constant(0);
        let mut count_a = AffineExpr::constant(0);
        let mut count_b = AffineExpr::constant(0);
        for (block, count) in &self.segments {
            let (a, b) = block.letter_counts();
            length = length + count.clone() * block.len() as i64;
            count_a = count_a + count.clone() * a as i64;
            count_b = count_b + count.clone() * b as i64;
        }
        SymbolicCounts { length, count_a, count_b }
    }
}

/// No finite threshold: outcome of [`min_nonneg_n`] on degenerate input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ThresholdError {
    #[error("constraint {0} has negative n-coefficient; nonnegativity holds for arbitrarily small n only")]
    UnboundedBelow(String),
    #[error("constraint {0} is a negative constant; no n satisfies it")]
    Infeasible(String),
    #[error("constraint {0} mentions a variable other than n")]
    NotSingleVariable(String),
}

/// Smallest integer `n` making every constraint nonnegative. Constraints that
/// are nonnegative for all `n` impose nothing; if none binds, the declared
/// global floor 1 is returned (the surfaces are defined for `n >= 1`).
pub fn min_nonneg_n(constraints: &[AffineExpr]) -> Result<i64, ThresholdError> {
    let mut best: Option<i64> = None;
    for expr in constraints {
        if !expr.vars().iter().all(|v| v == "n") {
            return Err(ThresholdError::NotSingleVariable(expr.to_string()));
        }
        let c = expr.coeff("n");
        let d = expr.constant_part();
        if c < 0 {
            return Err(ThresholdError::UnboundedBelow(expr.to_string()));
        }
        if c == 0 {
            if d < 0 {
                return Err(ThresholdError::Infeasible(expr.to_string()));
            }
            continue;
        }
        let root = ceil_div(-d, c);
        best = Some(best.map_or(root, |b: i64| b.max(root)));
    }
    Ok(best.unwrap_or(1))
}

/// `ceil(x / y)` for `y > 0`.
fn ceil_div(x: i64, y: i64) -> i64 {
    debug_assert!(y > 0);
    x.div_euclid(y) + i64::from(x.rem_euclid(y) != 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> AffineExpr {
        s.parse().unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(e("5n-9").eval(&bind_n(4)), Ok(11));
        assert_eq!(e("0").eval(&Binding::new()), Ok(0));
        assert_eq!(e("2n-48").eval(&bind_n(24)), Ok(0));
        assert_eq!(
            e("n+k").eval(&bind_n(1)),
            Err(AffineError::UnboundVariable("k".to_string()))
        );
    }

    #[test]
    fn canonical_display() {
        assert_eq!(e("5n-9").to_string(), "5*n-9");
        assert_eq!(e("n+1").to_string(), "n+1");
        assert_eq!(e("-n+3").to_string(), "-n+3");
        assert_eq!(e("n-n").to_string(), "0");
        assert_eq!(e("12 + 2*k").to_string(), "2*k+12");
        assert_eq!(e("0").to_string(), "0");
    }

    #[test]
    fn display_reparses_to_same_expr() {
        for s in ["5n-9", "-n+3", "2*k+12", "7", "n", "-3*n-4", "0", "n+k+1"] {
            let expr = e(s);
            assert_eq!(e(&expr.to_string()), expr);
        }
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!("".parse::<AffineExpr>().is_err());
        assert!("n+".parse::<AffineExpr>().is_err());
        assert!("n n".parse::<AffineExpr>().is_err());
        assert!("^2".parse::<AffineExpr>().is_err());
    }

    #[test]
    fn substitute_endpoint() {
        // position 12+2k at k = n-5 becomes 2n+2
        let pos = e("12+2k");
        assert_eq!(pos.substitute("k", &e("n-5")), e("2n+2"));
        assert_eq!(e("7").substitute("k", &e("n")), e("7"));
    }

    fn pw(segments: &[(&str, &str)]) -> ParamWord {
        ParamWord::new(
            segments
                .iter()
                .map(|(block, count)| (block.parse().unwrap(), e(count)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn instantiate_examples() {
        let ab6n = pw(&[("ab", "6n")]);
        assert_eq!(ab6n.instantiate(&bind_n(1)).unwrap().to_string(), "abababababab");

        // a^4 b^{n+1} a^5 b^5 (ab)^{5n-9} at n = 4: length 41, counts (20, 21).
        let final_word = pw(&[("a", "4"), ("b", "n+1"), ("a", "5"), ("b", "5"), ("ab", "5n-9")]);
        let inst = final_word.instantiate(&bind_n(4)).unwrap();
        assert_eq!(inst.len(), 41);
        assert_eq!(inst.letter_counts(), (20, 21));

        assert_eq!(
            pw(&[("ab", "2n-48")]).instantiate(&bind_n(23)),
            Err(AffineError::NegativeCount { expr: "2*n-48".to_string(), value: -2 })
        );
    }

    #[test]
    fn symbolic_counts_examples() {
        let counts = pw(&[("a", "4"), ("b", "n+1"), ("a", "5"), ("b", "5"), ("ab", "5n-9")])
            .symbolic_counts();
        assert_eq!(counts.length, e("11n-3"));
        assert_eq!(counts.count_a, e("5n"));
        assert_eq!(counts.count_b, e("6n-3"));

        let counts = pw(&[("ab", "6n")]).symbolic_counts();
        assert_eq!((counts.length, counts.count_a, counts.count_b), (e("12n"), e("6n"), e("6n")));

        let counts = pw(&[("a", "7"), ("b", "n+1"), ("a", "8"), ("b", "4"), ("ab", "5n-6")])
            .symbolic_counts();
        assert_eq!(counts.length, e("11n+8"));
        assert_eq!(counts.count_a, e("5n+9"));
        assert_eq!(counts.count_b, e("6n-1"));
    }

    #[test]
    fn counts_commute_with_instantiation() {
        let word = pw(&[("a", "4"), ("b", "n+1"), ("a", "5"), ("b", "5"), ("ab", "5n-9")]);
        let counts = word.symbolic_counts();
        for n in 2..=20 {
            let binding = bind_n(n);
            let inst = word.instantiate(&binding).unwrap();
            let (a, b) = inst.letter_counts();
            assert_eq!(inst.len() as i64, counts.length.eval(&binding).unwrap());
            assert_eq!(a as i64, counts.count_a.eval(&binding).unwrap());
            assert_eq!(b as i64, counts.count_b.eval(&binding).unwrap());
        }
    }

    #[test]
    fn empty_blocks_rejected() {
        assert_eq!(
            ParamWord::new(vec![(Word::empty(), e("3"))]),
            Err(AffineError::EmptyBlock)
        );
    }

    #[test]
    fn min_nonneg_n_examples() {
        let exprs = |ss: &[&str]| ss.iter().map(|s| e(s)).collect::<Vec<_>>();
        assert_eq!(min_nonneg_n(&exprs(&["2n-8", "4n-12", "5n-10", "n-2"])), Ok(4));
        assert_eq!(min_nonneg_n(&exprs(&["3n-14", "2n-8"])), Ok(5));
        assert_eq!(
            min_nonneg_n(&exprs(&["-n+3"])),
            Err(ThresholdError::UnboundedBelow("-n+3".to_string()))
        );
        // No binding constraint at all: global floor 1.
        assert_eq!(min_nonneg_n(&exprs(&["5", "0"])), Ok(1));
        assert_eq!(min_nonneg_n(&[]), Ok(1));
        // A binding constraint may land below the floor; it is reported as-is.
        assert_eq!(min_nonneg_n(&exprs(&["n+7"])), Ok(-7));
        assert_eq!(
            min_nonneg_n(&exprs(&["-3"])),
            Err(ThresholdError::Infeasible("-3".to_string()))
        );
        assert_eq!(
            min_nonneg_n(&exprs(&["k-2"])),
            Err(ThresholdError::NotSingleVariable("k-2".to_string()))
        );
    }

    #[test]
    fn min_nonneg_n_is_tight() {
        let cases: Vec<(Vec<&str>, i64)> =
            vec![(vec!["2n-8", "4n-12", "5n-10", "n-2"], 4), (vec!["3n-14", "2n-8"], 5)];
        for (ss, expect) in cases {
            let exprs: Vec<AffineExpr> = ss.iter().map(|s| e(s)).collect();
            let n0 = min_nonneg_n(&exprs).unwrap();
            assert_eq!(n0, expect);
            assert!(exprs.iter().all(|c| c.eval(&bind_n(n0)).unwrap() >= 0));
            assert!(exprs.iter().any(|c| c.eval(&bind_n(n0 - 1)).unwrap() < 0));
        }
    }
}
