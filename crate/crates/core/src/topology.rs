//! Bookkeeping tying word-calculus results to the topological statements:
//! parameter validity for the no-1-handle criterion, the proven claim table
//! for the surfaces `E(n)_{p,p+1}`, Euler-characteristic handle counting,
//! and canonicalization of logarithmic-transformation data.

use std::fmt;

/// Parameters of the no-1-handle criterion's diagram: `p > 1`, `q` an
/// arbitrary integer, `h2, h3 >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LemmaParams {
    pub p: i64,
    /// Framing-like parameter; validated for range only, its geometric role
    /// is diagram data.
    pub q: i64,
    pub h2: i64,
    pub h3: i64,
}

/// True iff the parameters satisfy the criterion's stated ranges.
pub fn validate_lemma_params(lp: &LemmaParams) -> bool {
    lp.p > 1 && lp.h2 >= 0 && lp.h3 >= 0
}

/// Threshold entry of the claim table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coverage {
    /// `E(n)_{p,p+1}` has a handle decomposition without 1-handles for all
    /// `n` at or above this value.
    Covered(i64),
    /// `p` outside the proven range {5, 6, 7, 8}.
    NotCovered,
}

/// One claim of the table: whether `E(n)_{p,p+1}` is known to need no
/// 1-handles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TheoremClaim {
    pub n: i64,
    pub p: i64,
    pub holds: bool,
    pub threshold: Coverage,
}

/// Proven thresholds for `p` in {5, 6, 7, 8}.
pub fn threshold_for(p: i64) -> Coverage {
    match p {
        5 => Coverage::Covered(4),
        6 => Coverage::Covered(5),
        7 => Coverage::Covered(9),
        8 => Coverage::Covered(24),
        _ => Coverage::NotCovered,
    }
}

/// Look up the claim for `E(n)_{p,p+1}`. Requires `n >= 1` and `p >= 2`.
pub fn theorem_claim(n: i64, p: i64) -> TheoremClaim {
    assert!(n >= 1 && p >= 2, "claims are defined for n >= 1, p >= 2");
    let threshold = threshold_for(p);
    let holds = match threshold {
        Coverage::Covered(t) => n >= t,
        Coverage::NotCovered => false,
    };
    TheoremClaim { n, p, holds, threshold }
}

impl fmt::Display for TheoremClaim {
    /// Stable claim line, e.g.
    /// `E(4)_{5,6}: no-1-handles=true threshold=4 source=Theorem1.2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E({})_{{{},{}}}: no-1-handles={} threshold=", self.n, self.p, self.p + 1, self.holds)?;
        match self.threshold {
            Coverage::Covered(t) => write!(f, "{t}")?,
            Coverage::NotCovered => write!(f, "NOT_COVERED")?,
        }
        write!(f, " source=Theorem1.2")
    }
}

/// The finer correspondence is diagram data and cannot be recovered here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("NOT_DERIVABLE: the (q, h2, h3) of a goal-pattern word is fixed by diagram data, not by the word")]
pub struct NotDerivable;

/// Refused by design: the diagram parameters `(q, h2, h3)` matching a
/// goal-pattern decomposition live in the pictures, so any word-level answer
/// would be invented. Only `p` transfers (it is the leading a-run plus one);
/// everything finer is `NOT_DERIVABLE`.
pub fn goal_word_lemma_params(
    _match: &crate::word::GoalMatch,
) -> Result<LemmaParams, NotDerivable> {
    Err(NotDerivable)
}

/// `p, q >= 2` and coprime: the multiplicity constraint on `E(n)_{p,q}`.
pub fn coprimality_check(p: i64, q: i64) -> bool {
    fn gcd(mut a: i64, mut b: i64) -> i64 {
        while b != 0 {
            (a, b) = (b, a.rem_euclid(b));
        }
        a.abs()
    }
    p >= 2 && q >= 2 && gcd(p, q) == 1
}

/// Number of 2-handles a closed decomposition of `E(n)` must have, given the
/// 1- and 3-handle counts: the Euler characteristic `12n` equals
/// `1 - h1 + h2 - h3 + 1`, so `h2 = 12n - 2 + h1 + h3`.
pub fn expected_two_handles(n: i64, h1: i64, h3: i64) -> i64 {
    assert!(n >= 1 && h1 >= 0 && h3 >= 0);
    12 * n - 2 + h1 + h3
}

/// Normalized data determining `E(n)_{p_1,...,p_k}`: `n` and the sorted
/// multiplicities. Multiplicity-1 entries are dropped by convention and the
/// drop is flagged, never silent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogTransformSpec {
    pub n: i64,
    /// Sorted ascending; no 1s.
    pub multiplicities: Vec<i64>,
    /// How many multiplicity-1 entries were dropped.
    pub dropped_unit_multiplicities: usize,
}

/// Canonicalize `(n, multiplicities)`. Requires `n >= 1` and every
/// multiplicity `>= 1`.
pub fn canonical_log_spec(n: i64, multiplicities: &[i64]) -> LogTransformSpec {
    assert!(n >= 1, "surfaces are defined for n >= 1");
    assert!(multiplicities.iter().all(|&m| m >= 1), "multiplicities are >= 1");
    let mut kept: Vec<i64> = multiplicities.iter().copied().filter(|&m| m > 1).collect();
    kept.sort_unstable();
    LogTransformSpec {
        n,
        dropped_unit_multiplicities: multiplicities.len() - kept.len(),
        multiplicities: kept,
    }
}

impl fmt::Display for LogTransformSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mults: Vec<String> = self.multiplicities.iter().map(|m| m.to_string()).collect();
        write!(f, "E({})_{{{}}}", self.n, mults.join(","))?;
        if self.dropped_unit_multiplicities > 0 {
            write!(f, " [dropped {} multiplicity-1 transform(s)]", self.dropped_unit_multiplicities)?;
        }
        Ok(())
    }
}
