//! Bounded, deterministic search for rewriting derivations.
//!
//! Search states are words; successors are rule applications in the fixed
//! order of [`enumerate_moves`] (position ascending, then rule order), and
//! every strategy processes states in that order, so results are identical
//! run to run and across worker counts. Dedupe is by exact word identity via
//! the packed encoding: monoid-equivalent words are distinct states, since
//! the target is a specific word or pattern, not an equivalence class.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::word::{
    apply_rule, enumerate_moves, match_goal_pattern, Letter, PackedWord, RuleId, Word,
};

/// Search strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Breadth-first; minimal-length paths for exact goals.
    Bfs,
    /// Iterative-deepening depth-first with per-iteration best-depth pruning;
    /// also minimal for exact goals.
    Iddfs,
    /// Greedy beam of the given width; no completeness promise.
    GreedyBeam { beam_width: usize },
}

/// What counts as success.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Goal {
    ExactWord(Word),
    GoalPattern { p: usize },
}

impl Goal {
    fn satisfied_by(&self, w: &Word) -> bool {
        match self {
            Goal::ExactWord(target) => w == target,
            Goal::GoalPattern { p } => match_goal_pattern(w, *p).is_some(),
        }
    }
}

/// Bounds and strategy for one search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub rules: Vec<RuleId>,
    pub max_depth: usize,
    /// For BFS/beam: cap on stored states; for IDDFS: cap on cumulative
    /// expansions.
    pub max_states: usize,
    pub strategy: Strategy,
    pub goal: Goal,
    /// `<= 1` runs single-threaded; larger values expand BFS frontiers on a
    /// pool of that many workers. Results are bit-identical either way.
    pub workers: usize,
}

impl SearchConfig {
    pub fn bfs_exact(target: Word, max_depth: usize) -> SearchConfig {
        SearchConfig {
            rules: RuleId::BRAID.to_vec(),
            max_depth,
            max_states: 1_000_000,
            strategy: Strategy::Bfs,
            goal: Goal::ExactWord(target),
            workers: 1,
        }
    }
}

/// How a search ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// A goal was reached; the path replays from the start word.
    Found(Vec<(RuleId, usize)>),
    /// The whole reachable space within the depth bound holds no goal.
    Exhausted,
    BudgetExceeded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    pub outcome: Outcome,
    pub states_expanded: usize,
    pub depth_reached: usize,
}

/// Run the configured search from `start`.
pub fn search(start: &Word, cfg: &SearchConfig) -> SearchResult {
    match cfg.strategy {
        Strategy::Bfs => bfs(start, cfg),
        Strategy::Iddfs => iddfs(start, cfg),
        Strategy::GreedyBeam { beam_width } => beam(start, cfg, beam_width.max(1)),
    }
}

fn successors(w: &Word, rules: &[RuleId]) -> Vec<(RuleId, usize, Word)> {
    enumerate_moves(w, rules)
        .into_iter()
        .map(|(rule, pos)| (rule, pos, apply_rule(w, rule, pos).expect("enumerated move applies")))
        .collect()
}

struct Arena {
    words: Vec<Word>,
    parents: Vec<Option<(usize, RuleId, usize)>>,
    visited: HashMap<PackedWord, usize>,
}

impl Arena {
    fn new(start: &Word) -> Arena {
        let mut visited = HashMap::new();
        visited.insert(PackedWord::from(start), 0);
        Arena { words: vec![start.clone()], parents: vec![None], visited }
    }

    fn insert(&mut self, word: Word, parent: usize, rule: RuleId, pos: usize) -> Option<usize> {
        let packed = PackedWord::from(&word);
        if self.visited.contains_key(&packed) {
            return None;
        }
        let idx = self.words.len();
        self.visited.insert(packed, idx);
        self.words.push(word);
        self.parents.push(Some((parent, rule, pos)));
        Some(idx)
    }

    fn path_to(&self, mut idx: usize) -> Vec<(RuleId, usize)> {
        let mut path = Vec::new();
        while let Some((parent, rule, pos)) = self.parents[idx] {
            path.push((rule, pos));
            idx = parent;
        }
        path.reverse();
        path
    }
}

fn bfs(start: &Word, cfg: &SearchConfig) -> SearchResult {
    let pool = (cfg.workers > 1).then(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .expect("worker pool")
    });
    let mut arena = Arena::new(start);
    let mut level: Vec<usize> = vec![0];
    let mut depth = 0usize;
    let mut states_expanded = 0usize;

    loop {
        for &idx in &level {
            if cfg.goal.satisfied_by(&arena.words[idx]) {
                return SearchResult {
                    outcome: Outcome::Found(arena.path_to(idx)),
                    states_expanded,
                    depth_reached: depth,
                };
            }
        }
        if depth == cfg.max_depth || level.is_empty() {
            return SearchResult {
                outcome: Outcome::Exhausted,
                states_expanded,
                depth_reached: depth,
            };
        }

        // Expand the whole level in frontier order; with a pool the map is
        // order-preserving, so the merge below is identical either way.
        let expand = |&idx: &usize| successors(&arena.words[idx], &cfg.rules);
        let batches: Vec<Vec<(RuleId, usize, Word)>> = match &pool {
            Some(pool) => pool.install(|| level.par_iter().map(expand).collect()),
            None => level.iter().map(expand).collect(),
        };
        states_expanded += level.len();

        let mut next_level = Vec::new();
        for (slot, batch) in batches.into_iter().enumerate() {
            let parent = level[slot];
            for (rule, pos, word) in batch {
                if let Some(idx) = arena.insert(word, parent, rule, pos) {
                    if arena.words.len() > cfg.max_states {
                        return SearchResult {
                            outcome: Outcome::BudgetExceeded,
                            states_expanded,
                            depth_reached: depth + 1,
                        };
                    }
                    next_level.push(idx);
                }
            }
        }
        depth += 1;
        level = next_level;
    }
}

struct IddfsRun<'a> {
    cfg: &'a SearchConfig,
    best_depth: HashMap<PackedWord, usize>,
    path: Vec<(RuleId, usize)>,
    expanded: usize,
    deepest: usize,
    hit_bound: bool,
    over_budget: bool,
}

enum DfsOutcome {
    Found,
    NotHere,
}

impl IddfsRun<'_> {
    fn dfs(&mut self, word: &Word, depth: usize, bound: usize) -> DfsOutcome {
        self.deepest = self.deepest.max(depth);
        if self.cfg.goal.satisfied_by(word) {
            return DfsOutcome::Found;
        }
        if depth == bound {
            self.hit_bound = true;
            return DfsOutcome::NotHere;
        }
        self.expanded += 1;
        if self.expanded > self.cfg.max_states {
            self.over_budget = true;
            return DfsOutcome::NotHere;
        }
        for (rule, pos, child) in successors(word, &self.cfg.rules) {
            let key = PackedWord::from(&child);
            match self.best_depth.get(&key) {
                Some(&seen) if seen <= depth + 1 => continue,
                _ => {
                    self.best_depth.insert(key, depth + 1);
                }
            }
            self.path.push((rule, pos));
            if let DfsOutcome::Found = self.dfs(&child, depth + 1, bound) {
                return DfsOutcome::Found;
            }
            self.path.pop();
            if self.over_budget {
                return DfsOutcome::NotHere;
            }
        }
        DfsOutcome::NotHere
    }
}

fn iddfs(start: &Word, cfg: &SearchConfig) -> SearchResult {
    let mut run = IddfsRun {
        cfg,
        best_depth: HashMap::new(),
        path: Vec::new(),
        expanded: 0,
        deepest: 0,
        hit_bound: false,
        over_budget: false,
    };
    for bound in 0..=cfg.max_depth {
        run.best_depth.clear();
        run.best_depth.insert(PackedWord::from(start), 0);
        run.path.clear();
        run.hit_bound = false;
        if let DfsOutcome::Found = run.dfs(start, 0, bound) {
            return SearchResult {
                outcome: Outcome::Found(run.path),
                states_expanded: run.expanded,
                depth_reached: run.deepest,
            };
        }
        if run.over_budget {
            return SearchResult {
                outcome: Outcome::BudgetExceeded,
                states_expanded: run.expanded,
                depth_reached: run.deepest,
            };
        }
        if !run.hit_bound {
            // The bound never cut anything off: the space is fully explored.
            break;
        }
    }
    SearchResult {
        outcome: Outcome::Exhausted,
        states_expanded: run.expanded,
        depth_reached: run.deepest,
    }
}

fn beam(start: &Word, cfg: &SearchConfig, width: usize) -> SearchResult {
    let score = |w: &Word| -> usize {
        match &cfg.goal {
            Goal::ExactWord(target) => heuristic_distance(w, target).unwrap_or(usize::MAX),
            Goal::GoalPattern { p } => pattern_guidance(w, *p),
        }
    };
    if let Goal::ExactWord(target) = &cfg.goal {
        if target.len() != start.len() {
            // All rules preserve length; a different length is unreachable.
            return SearchResult { outcome: Outcome::Exhausted, states_expanded: 0, depth_reached: 0 };
        }
    }

    let mut arena = Arena::new(start);
    let mut level: Vec<usize> = vec![0];
    let mut states_expanded = 0usize;
    for depth in 0..=cfg.max_depth {
        for &idx in &level {
            if cfg.goal.satisfied_by(&arena.words[idx]) {
                return SearchResult {
                    outcome: Outcome::Found(arena.path_to(idx)),
                    states_expanded,
                    depth_reached: depth,
                };
            }
        }
        if depth == cfg.max_depth || level.is_empty() {
            return SearchResult {
                outcome: Outcome::Exhausted,
                states_expanded,
                depth_reached: depth,
            };
        }
        let mut candidates: Vec<usize> = Vec::new();
        for &parent in &level {
            for (rule, pos, word) in successors(&arena.words[parent], &cfg.rules) {
                if let Some(idx) = arena.insert(word, parent, rule, pos) {
                    if arena.words.len() > cfg.max_states {
                        return SearchResult {
                            outcome: Outcome::BudgetExceeded,
                            states_expanded,
                            depth_reached: depth + 1,
                        };
                    }
                    candidates.push(idx);
                }
            }
        }
        states_expanded += level.len();
        // Keep the `width` best; ties broken by packed word for determinism.
        candidates.sort_by_key(|&idx| (score(&arena.words[idx]), PackedWord::from(&arena.words[idx])));
        candidates.truncate(width);
        level = candidates;
    }
    unreachable!("loop returns at the depth bound");
}

/// The two words have different lengths, so no move sequence connects them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("length mismatch: {left} vs {right}")]
pub struct LengthMismatch {
    pub left: usize,
    pub right: usize,
}

/// `ceil(hamming / 3)`: admissible for elementary braid moves, which change
/// exactly the three letters of their window. Zero iff the words are equal.
pub fn heuristic_distance(w: &Word, target: &Word) -> Result<usize, LengthMismatch> {
    if w.len() != target.len() {
        return Err(LengthMismatch { left: w.len(), right: target.len() });
    }
    let mismatches = w
        .letters()
        .iter()
        .zip(target.letters())
        .filter(|(x, y)| x != y)
        .count();
    Ok(mismatches.div_ceil(3))
}

/// Greedy guidance toward the goal pattern `a^{p-1} b^m a^p b^k (ab)^j`:
/// zero iff the word matches, otherwise decreasing as a longer prefix fits.
/// No admissibility claim; used only to rank beam candidates.
fn pattern_guidance(w: &Word, p: usize) -> usize {
    if match_goal_pattern(w, p).is_some() {
        return 0;
    }
    let ls = w.letters();
    let mut at = 0usize;
    while at < ls.len() && at < p - 1 && ls[at] == Letter::A {
        at += 1;
    }
    if at == p - 1 {
        let b_run = ls[at..].iter().take_while(|&&l| l == Letter::B).count();
        at += b_run;
        if b_run > 0 {
            let a_run = ls[at..].iter().take_while(|&&l| l == Letter::A).count().min(p);
            at += a_run;
            if a_run == p {
                at += ls[at..].iter().take_while(|&&l| l == Letter::B).count();
                while at + 1 < ls.len() && ls[at] == Letter::A && ls[at + 1] == Letter::B {
                    at += 2;
                }
            }
        }
    }
    w.len() - at + 1
}

/// Apply up to `moves` random applicable moves to `base`, seeded and
/// reproducible. Returns the scrambled word and the number of moves actually
/// applied (fewer only if no move applies at some point).
pub fn scramble(base: &Word, moves: usize, rules: &[RuleId], seed: u64) -> (Word, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut word = base.clone();
    let mut applied = 0;
    for _ in 0..moves {
        let options = enumerate_moves(&word, rules);
        if options.is_empty() {
            break;
        }
        let (rule, pos) = options[rng.random_range(0..options.len())];
        word = apply_rule(&word, rule, pos).expect("enumerated move applies");
        applied += 1;
    }
    (word, applied)
}

/// Render a found path as derivation-DSL step lines, directly pasteable into
/// a `.deriv` file.
pub fn path_as_dsl(path: &[(RuleId, usize)]) -> String {
    let mut out = String::new();
    for &(rule, pos) in path {
        out.push_str(&format!("{} at {}\n", rule.dsl_name(), pos));
    }
    out
}
