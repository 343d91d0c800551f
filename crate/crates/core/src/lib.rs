//! Handle-word calculus for elliptic-surface handle decompositions.
//!
//! Rows of 2-handles are encoded as words over `{a, b}` (`a` vertical, `b`
//! horizontal). The crate provides the rewriting moves on such words, a
//! Garside-normal-form oracle deciding equality in the underlying positive
//! braid monoid, a small derivation DSL whose shipped fixtures mechanically
//! replay the discovery of the words `a^{p-1} b^{n+1} a^p b^k (ab)^j` for
//! `p = 5..8`, bounded search for new derivations, and the bookkeeping that
//! turns replayed derivations into no-1-handle claims for `E(n)_{p,p+1}`.

pub mod affine;
pub mod canonical;
pub mod derivation;
pub mod search;
pub mod topology;
pub mod word;
pub mod wordexpr;

pub use affine::{AffineExpr, Binding, ParamWord};
pub use canonical::{closure_oracle, equivalent, normal_form, GarsideNF};
pub use derivation::{check, check_range, derived_min_n, parse_derivation, CheckReport, Derivation};
pub use search::{search, Goal, SearchConfig, SearchResult, Strategy};
pub use word::{apply_rule, enumerate_moves, match_goal_pattern, Letter, RuleId, Word};
pub use wordexpr::{parse_word_expr, WordExpr};
