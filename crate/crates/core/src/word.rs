//! Concrete words over the two-letter alphabet `{a, b}` and the positional
//! rewriting moves on them.
//!
//! The letter `a` stands for a vertical 2-handle and `b` for a horizontal
//! one, so a word records a row of 2-handles left to right. Six rules act on
//! words: the elementary braid move `aba -> bab`, its inverse, and the two
//! macro conversions of `(ab)^5` together with their inverses. All rules
//! preserve word length; only marked-letter deletion shrinks a word.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// One of the two generators. `A` prints as `a`, `B` as `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    A,
    B,
}

impl Letter {
    pub fn as_char(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::B => 'b',
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'a' => Some(Letter::A),
            'b' => Some(Letter::B),
            _ => None,
        }
    }

    /// The other letter (`a <-> b`).
    pub fn flip(self) -> Letter {
        match self {
            Letter::A => Letter::B,
            Letter::B => Letter::A,
        }
    }
}

/// A finite word over `{a, b}`. Positions are 0-based from the left.
/// The empty word is legal everywhere.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn new(letters: Vec<Letter>) -> Word {
        Word { letters }
    }

    pub fn empty() -> Word {
        Word::default()
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn get(&self, pos: usize) -> Option<Letter> {
        self.letters.get(pos).copied()
    }

    pub fn push(&mut self, letter: Letter) {
        self.letters.push(letter);
    }

    pub fn extend_from(&mut self, other: &Word) {
        self.letters.extend_from_slice(&other.letters);
    }

    /// Concatenation of `self` repeated `count` times.
    pub fn repeated(&self, count: usize) -> Word {
        let mut letters = Vec::with_capacity(self.len() * count);
        for _ in 0..count {
            letters.extend_from_slice(&self.letters);
        }
        Word { letters }
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Word { letters }
    }

    /// Number of `a`s and number of `b`s; the two counts sum to the length.
    pub fn letter_counts(&self) -> (usize, usize) {
        let a = self.letters.iter().filter(|&&l| l == Letter::A).count();
        (a, self.len() - a)
    }

    fn window_matches(&self, pos: usize, pattern: &[Letter]) -> bool {
        self.letters[pos..pos + pattern.len()] == *pattern
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

/// Rejected character while reading a word literal.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid letter {found:?} at position {position} (word literals use only 'a' and 'b')")]
pub struct WordParseError {
    pub position: usize,
    pub found: char,
}

impl FromStr for Word {
    type Err = WordParseError;

    fn from_str(s: &str) -> Result<Word, WordParseError> {
        let mut letters = Vec::with_capacity(s.len());
        for (position, c) in s.chars().enumerate() {
            match Letter::from_char(c) {
                Some(l) => letters.push(l),
                None => return Err(WordParseError { position, found: c }),
            }
        }
        Ok(Word { letters })
    }
}

/// Fixed-width packed form of a [`Word`]: two bits per letter, 32 letters per
/// limb, unused high bits zero. Used as the dedupe key in search.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PackedWord {
    len: usize,
    limbs: Vec<u64>,
}

const LETTERS_PER_LIMB: usize = 32;

impl PackedWord {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn unpack(&self) -> Word {
        let mut letters = Vec::with_capacity(self.len);
        for i in 0..self.len {
            let limb = self.limbs[i / LETTERS_PER_LIMB];
            let code = (limb >> (2 * (i % LETTERS_PER_LIMB))) & 0b11;
            letters.push(if code == 0 { Letter::A } else { Letter::B });
        }
        Word { letters }
    }
}

impl From<&Word> for PackedWord {
    fn from(w: &Word) -> PackedWord {
        let len = w.len();
        let mut limbs = vec![0u64; len.div_ceil(LETTERS_PER_LIMB)];
        for (i, &l) in w.letters().iter().enumerate() {
            let code: u64 = match l {
                Letter::A => 0b00,
                Letter::B => 0b01,
            };
            limbs[i / LETTERS_PER_LIMB] |= code << (2 * (i % LETTERS_PER_LIMB));
        }
        PackedWord { len, limbs }
    }
}

/// A word with a set of marked (to-be-omitted) positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedWord {
    word: Word,
    marks: BTreeSet<usize>,
}

/// Invalid mark set for a [`MarkedWord`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarkError {
    #[error("mark {pos} out of range for word of length {len}")]
    OutOfRange { pos: usize, len: usize },
    #[error("position {pos} marked twice")]
    Duplicate { pos: usize },
}

impl MarkedWord {
    pub fn new(word: Word, marks: impl IntoIterator<Item = usize>) -> Result<MarkedWord, MarkError> {
        let mut set = BTreeSet::new();
        for pos in marks {
            if pos >= word.len() {
                return Err(MarkError::OutOfRange { pos, len: word.len() });
            }
            if !set.insert(pos) {
                return Err(MarkError::Duplicate { pos });
            }
        }
        Ok(MarkedWord { word, marks: set })
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn marks(&self) -> &BTreeSet<usize> {
        &self.marks
    }

    /// The subsequence of unmarked letters, in order. The result has length
    /// `word.len() - marks.len()`.
    pub fn delete_marked(&self) -> Word {
        let letters = self
            .word
            .letters()
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.marks.contains(i))
            .map(|(_, &l)| l)
            .collect();
        Word::new(letters)
    }
}

/// Omit the marked letters of `mw`.
pub fn delete_marked(mw: &MarkedWord) -> Word {
    mw.delete_marked()
}

/// The six rewriting rules. `BraidFwd`/`BraidRev` are the elementary braid
/// move `aba <-> bab`; `R3`/`R4` are the two length-10 conversions of
/// `(ab)^5`, with `R3Rev`/`R4Rev` their inverses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleId {
    BraidFwd,
    BraidRev,
    R3,
    R3Rev,
    R4,
    R4Rev,
}

use Letter::{A, B};

const ABA: [Letter; 3] = [A, B, A];
const BAB: [Letter; 3] = [B, A, B];
/// `(ab)^5`.
const AB5: [Letter; 10] = [A, B, A, B, A, B, A, B, A, B];
/// `(a^3 b)^2 a^2`.
const R3_RHS: [Letter; 10] = [A, A, A, B, A, A, A, B, A, A];
/// `b^2 (a b^3)^2`.
const R4_RHS: [Letter; 10] = [B, B, A, B, B, B, A, B, B, B];

impl RuleId {
    /// Fixed rule order used everywhere tie-breaking is needed.
    pub const ALL: [RuleId; 6] = [
        RuleId::BraidFwd,
        RuleId::BraidRev,
        RuleId::R3,
        RuleId::R3Rev,
        RuleId::R4,
        RuleId::R4Rev,
    ];

    /// The two elementary braid moves.
    pub const BRAID: [RuleId; 2] = [RuleId::BraidFwd, RuleId::BraidRev];

    pub fn lhs(self) -> &'static [Letter] {
        match self {
            RuleId::BraidFwd => &ABA,
            RuleId::BraidRev => &BAB,
            RuleId::R3 => &AB5,
            RuleId::R3Rev => &R3_RHS,
            RuleId::R4 => &AB5,
            RuleId::R4Rev => &R4_RHS,
        }
    }

    pub fn rhs(self) -> &'static [Letter] {
        self.partner().lhs()
    }

    /// The inverse rule: applying `r` then `r.partner()` at the same position
    /// restores the original word.
    pub fn partner(self) -> RuleId {
        match self {
            RuleId::BraidFwd => RuleId::BraidRev,
            RuleId::BraidRev => RuleId::BraidFwd,
            RuleId::R3 => RuleId::R3Rev,
            RuleId::R3Rev => RuleId::R3,
            RuleId::R4 => RuleId::R4Rev,
            RuleId::R4Rev => RuleId::R4,
        }
    }

    /// Name used in the derivation DSL (`braid fwd`, `macro R3'`, ...).
    pub fn dsl_name(self) -> &'static str {
        match self {
            RuleId::BraidFwd => "braid fwd",
            RuleId::BraidRev => "braid rev",
            RuleId::R3 => "macro R3",
            RuleId::R3Rev => "macro R3'",
            RuleId::R4 => "macro R4",
            RuleId::R4Rev => "macro R4'",
        }
    }
}

/// Why a rule application was rejected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoveError {
    #[error("window [{pos}, {end}) exceeds word of length {len}")]
    OutOfRange { pos: usize, end: usize, len: usize },
    #[error("subword at position {pos} does not match the left-hand side of {rule:?}")]
    PatternMismatch { rule: RuleId, pos: usize },
}

/// Replace the subword `lhs(rule)` at `pos` by `rhs(rule)`. Length and all
/// letters outside the window are unchanged.
pub fn apply_rule(w: &Word, rule: RuleId, pos: usize) -> Result<Word, MoveError> {
    let lhs = rule.lhs();
    let end = pos + lhs.len();
    if end > w.len() {
        return Err(MoveError::OutOfRange { pos, end, len: w.len() });
    }
    if !w.window_matches(pos, lhs) {
        return Err(MoveError::PatternMismatch { rule, pos });
    }
    let mut letters = w.letters().to_vec();
    letters[pos..end].copy_from_slice(rule.rhs());
    Ok(Word::new(letters))
}

/// All `(rule, pos)` pairs from `rules` that apply to `w`, ordered by
/// position ascending and then by the fixed rule order. The input order of
/// `rules` is irrelevant.
pub fn enumerate_moves(w: &Word, rules: &[RuleId]) -> Vec<(RuleId, usize)> {
    let mut moves = Vec::new();
    for pos in 0..=w.len() {
        for rule in RuleId::ALL {
            if !rules.contains(&rule) {
                continue;
            }
            let lhs = rule.lhs();
            if pos + lhs.len() <= w.len() && w.window_matches(pos, lhs) {
                moves.push((rule, pos));
            }
        }
    }
    moves
}

/// Successful decomposition of a word as `a^{p-1} b^m a^p b^k (ab)^j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GoalMatch {
    pub m: usize,
    pub k: usize,
    pub j: usize,
}

/// Build the goal-pattern word `a^{p-1} b^m a^p b^k (ab)^j`.
pub fn goal_pattern_word(p: usize, m: usize, k: usize, j: usize) -> Word {
    let mut letters = Vec::with_capacity((p - 1) + m + p + k + 2 * j);
    letters.extend(std::iter::repeat_n(A, p - 1));
    letters.extend(std::iter::repeat_n(B, m));
    letters.extend(std::iter::repeat_n(A, p));
    letters.extend(std::iter::repeat_n(B, k));
    for _ in 0..j {
        letters.push(A);
        letters.push(B);
    }
    Word::new(letters)
}

/// Decompose `w` as `a^{p-1} b^m a^p b^k (ab)^j` with `m >= 1`, `k >= 0`,
/// `j >= 0`. The decomposition is unique for a given `p` when it exists.
pub fn match_goal_pattern(w: &Word, p: usize) -> Option<GoalMatch> {
    assert!(p >= 2, "goal pattern requires p >= 2");
    let ls = w.letters();
    let run = |from: usize, letter: Letter| ls[from..].iter().take_while(|&&l| l == letter).count();

    // a^{p-1}: exactly p-1 leading a's, then a b.
    if run(0, A) != p - 1 {
        return None;
    }
    let mut at = p - 1;
    let m = run(at, B);
    if m == 0 {
        return None;
    }
    at += m;
    // After b^m comes a^p; the a-run is p+1 exactly when k = 0 and j >= 1
    // (the first pair of (ab)^j contributes the extra a).
    let a_run = run(at, A);
    let (k, tail_at) = if a_run == p {
        at += p;
        let k = run(at, B);
        (k, at + k)
    } else if a_run == p + 1 {
        (0, at + p)
    } else {
        return None;
    };
    // Remainder must be exactly alternating (ab)^j.
    let tail = &ls[tail_at..];
    if !tail.len().is_multiple_of(2) {
        return None;
    }
    let j = tail.len() / 2;
    for (i, &l) in tail.iter().enumerate() {
        let want = if i % 2 == 0 { A } else { B };
        if l != want {
            return None;
        }
    }
    Some(GoalMatch { m, k, j })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn display_parse_round_trip() {
        assert_eq!(w("aabab").to_string(), "aabab");
        assert_eq!(w("").len(), 0);
        assert!(matches!(
            "abxba".parse::<Word>(),
            Err(WordParseError { position: 2, found: 'x' })
        ));
    }

    #[test]
    fn packed_round_trip_exact() {
        for s in ["", "a", "b", "ab", "aabab", "abababababab"] {
            let word = w(s);
            let packed = PackedWord::from(&word);
            assert_eq!(packed.unpack(), word);
            assert_eq!(packed.len(), word.len());
        }
        // 0/1 codes leave unused bits zero so equal words pack identically.
        let long = w("ab").repeated(40);
        assert_eq!(PackedWord::from(&long), PackedWord::from(&long.clone()));
        assert_eq!(PackedWord::from(&long).unpack(), long);
    }

    #[test]
    fn apply_braid_fwd() {
        assert_eq!(apply_rule(&w("aba"), RuleId::BraidFwd, 0).unwrap(), w("bab"));
    }

    #[test]
    fn apply_braid_rev_inside() {
        assert_eq!(apply_rule(&w("abab"), RuleId::BraidRev, 1).unwrap(), w("aaba"));
    }

    #[test]
    fn apply_macro_rules() {
        assert_eq!(apply_rule(&w("ababababab"), RuleId::R3, 0).unwrap(), w("aaabaaabaa"));
        assert_eq!(apply_rule(&w("ababababab"), RuleId::R4, 0).unwrap(), w("bbabbbabbb"));
    }

    #[test]
    fn apply_mismatch_and_range_errors() {
        assert_eq!(
            apply_rule(&w("abba"), RuleId::BraidFwd, 0),
            Err(MoveError::PatternMismatch { rule: RuleId::BraidFwd, pos: 0 })
        );
        assert_eq!(
            apply_rule(&w("ab"), RuleId::BraidFwd, 0),
            Err(MoveError::OutOfRange { pos: 0, end: 3, len: 2 })
        );
        assert_eq!(
            apply_rule(&w("aba"), RuleId::BraidFwd, 1),
            Err(MoveError::OutOfRange { pos: 1, end: 4, len: 3 })
        );
    }

    #[test]
    fn rules_have_equal_length_sides_and_partners() {
        for rule in RuleId::ALL {
            assert_eq!(rule.lhs().len(), rule.rhs().len());
            assert_eq!(rule.partner().partner(), rule);
            assert_eq!(rule.partner().lhs(), rule.rhs());
        }
        let lens: Vec<usize> = RuleId::ALL.iter().map(|r| r.lhs().len()).collect();
        assert_eq!(lens, vec![3, 3, 10, 10, 10, 10]);
    }

    #[test]
    fn enumerate_moves_examples() {
        let braid = &RuleId::BRAID;
        assert_eq!(enumerate_moves(&w("aba"), braid), vec![(RuleId::BraidFwd, 0)]);
        assert_eq!(enumerate_moves(&w("ab"), braid), vec![]);
        assert_eq!(
            enumerate_moves(&w("ababa"), braid),
            vec![(RuleId::BraidFwd, 0), (RuleId::BraidRev, 1), (RuleId::BraidFwd, 2)]
        );
        // Input order of the rule set does not matter.
        assert_eq!(
            enumerate_moves(&w("ababa"), &[RuleId::BraidRev, RuleId::BraidFwd]),
            enumerate_moves(&w("ababa"), braid)
        );
    }

    #[test]
    fn enumerate_moves_sound_and_complete() {
        for s in ["", "a", "aba", "ababab", "aabbaabb", "ababababab"] {
            let word = w(s);
            let listed = enumerate_moves(&word, &RuleId::ALL);
            for &(rule, pos) in &listed {
                assert!(apply_rule(&word, rule, pos).is_ok());
            }
            for pos in 0..=word.len() {
                for rule in RuleId::ALL {
                    let applies = apply_rule(&word, rule, pos).is_ok();
                    assert_eq!(applies, listed.contains(&(rule, pos)), "{s} {rule:?} {pos}");
                }
            }
        }
    }

    #[test]
    fn delete_marked_examples() {
        // Positions are 0-based: marks {1, 3} of a-a-b-a-b drop the second
        // and fourth letters.
        let mw = MarkedWord::new(w("aabab"), [1, 3]).unwrap();
        assert_eq!(mw.delete_marked(), w("abb"));
        let mw = MarkedWord::new(w("ab"), []).unwrap();
        assert_eq!(mw.delete_marked(), w("ab"));
    }

    #[test]
    fn delete_marked_replays_first_proposition_at_minimum() {
        // Pre-deletion word of the first derivation at n = 4 with its mark set.
        let pre = w(&format!("aabaabbabbab{}aabaabbabbab{}", "ab", "ab".repeat(11)));
        assert_eq!(pre.len(), 48);
        let mw = MarkedWord::new(pre, [2, 7, 10, 13, 16, 21, 24]).unwrap();
        let out = mw.delete_marked();
        assert_eq!(out.len(), 41);
        assert_eq!(out, w(&format!("aaaabbbbbaaaaabbbbb{}", "ab".repeat(11))));
    }

    #[test]
    fn marked_word_rejects_bad_marks() {
        assert_eq!(
            MarkedWord::new(w("ab"), [2]),
            Err(MarkError::OutOfRange { pos: 2, len: 2 })
        );
        assert_eq!(MarkedWord::new(w("aba"), [1, 1]), Err(MarkError::Duplicate { pos: 1 }));
    }

    #[test]
    fn letter_counts_examples() {
        assert_eq!(w("ababab").letter_counts(), (3, 3));
        assert_eq!(w("").letter_counts(), (0, 0));
        // a^4 b^{n+1} a^5 b^5 (ab)^{5n-9} at n = 4: counts (5n, 6n-3) = (20, 21).
        let final_word = goal_pattern_word(5, 5, 5, 11);
        assert_eq!(final_word.letter_counts(), (20, 21));
        assert_eq!(final_word.len(), 41);
    }

    #[test]
    fn goal_pattern_examples() {
        let word = goal_pattern_word(5, 5, 5, 11);
        assert_eq!(match_goal_pattern(&word, 5), Some(GoalMatch { m: 5, k: 5, j: 11 }));
        assert_eq!(match_goal_pattern(&w("ab"), 2), None);
        let word = goal_pattern_word(6, 6, 2, 17);
        assert_eq!(match_goal_pattern(&word, 6), Some(GoalMatch { m: 6, k: 2, j: 17 }));
    }

    #[test]
    fn goal_pattern_handles_k_zero_tail() {
        // k = 0 makes the middle a-run p+1 letters long when j >= 1.
        let word = goal_pattern_word(3, 2, 0, 2);
        assert_eq!(match_goal_pattern(&word, 3), Some(GoalMatch { m: 2, k: 0, j: 2 }));
        let word = goal_pattern_word(3, 2, 0, 0);
        assert_eq!(match_goal_pattern(&word, 3), Some(GoalMatch { m: 2, k: 0, j: 0 }));
    }

    /// Brute-force oracle: enumerate every (m, k, j) decomposition of `w`.
    fn all_decompositions(word: &Word, p: usize) -> Vec<GoalMatch> {
        let len = word.len();
        let mut found = Vec::new();
        if len < 2 * p - 1 {
            return found;
        }
        let rest = len - (2 * p - 1);
        for j in 0..=rest / 2 {
            for k in 0..=rest - 2 * j {
                let m = rest - 2 * j - k;
                if m >= 1 && goal_pattern_word(p, m, k, j) == *word {
                    found.push(GoalMatch { m, k, j });
                }
            }
        }
        found
    }

    #[test]
    fn goal_pattern_unique_over_all_short_words() {
        // Exhaustive scan: length <= 12, p in {2, 3, 4}. The matcher must agree
        // with the brute-force enumeration, which must never find two triples.
        for len in 0..=12usize {
            for bits in 0..(1u32 << len) {
                let letters: Vec<Letter> = (0..len)
                    .map(|i| if bits >> i & 1 == 0 { Letter::A } else { Letter::B })
                    .collect();
                let word = Word::new(letters);
                for p in 2..=4 {
                    let all = all_decompositions(&word, p);
                    assert!(all.len() <= 1, "ambiguous decomposition for {word} p={p}");
                    assert_eq!(match_goal_pattern(&word, p), all.first().copied());
                }
            }
        }
    }
}
