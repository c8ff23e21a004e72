//! Exact assembly index by branch and bound.
//!
//! A minimal plan never builds the same string twice and only ever builds
//! substrings of the target (every useful intermediate occurs inside the
//! final product). So a plan is equivalent to a set of distinct substrings
//! of `w`, containing `w`, where each member is cut into two parts that are
//! letters or other members. The cost of the plan is the size of the set.
//!
//! The search grows such a set top-down: pick the longest member whose cut
//! has not been chosen yet and branch over its cuts, left to right. Budgets
//! `k` are tried from the best lower bound upward (iterative deepening), so
//! the first success is optimal. Failed states are memoized on the pair
//! (members, unresolved members) together with the slack they failed with.
//!
//! Runtime is exponential in the worst case; computing the index exactly is
//! NP-hard. [`ExactConfig::max_len`] guards the entry point.

mod table;

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use dashmap::DashMap;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::approx::approx_best;
use crate::bounds::bounds_report;
use crate::model::convert::plan_to_slp;
use crate::model::plan::{AssemblyPlan, AssemblyStep, Operand};
use crate::model::slp::{Slp, SlpRule};
use crate::model::word::{Alphabet, Word};
use table::{Part, SubstringTable};

/// Default cap on word length for [`asi_exact`].
pub const DEFAULT_EXACT_LIMIT: usize = 30;

#[derive(Debug, Clone)]
pub struct ExactConfig {
    /// Longest word the exact search accepts.
    pub max_len: usize,
    pub node_budget: Option<u64>,
    pub time_budget: Option<Duration>,
    /// Worker threads for the root of each search; 1 runs inline.
    pub threads: usize,
    /// Alphabet for the returned witnesses. Defaults to the word's own
    /// symbols; extra letters never lower the index.
    pub alphabet: Option<Alphabet>,
}

impl Default for ExactConfig {
    fn default() -> Self {
        Self {
            max_len: DEFAULT_EXACT_LIMIT,
            node_budget: None,
            time_budget: None,
            threads: 1,
            alphabet: None,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SolveStats {
    pub nodes: u64,
    pub memo_hits: u64,
    pub elapsed_ms: f64,
    /// Best lower bound before any search.
    pub root_lower: usize,
    /// Witness-backed upper bound before any search.
    pub root_upper: usize,
    /// Largest budget proven infeasible plus one; equals `value` when optimal.
    pub proven_lower: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    pub value: usize,
    /// False only inside [`SolveError::BudgetExhausted`].
    pub optimal: bool,
    /// Which construction produced the witness: `exact`, or the approximation
    /// backend whose grammar turned out optimal or was the best known.
    pub method: String,
    pub plan: AssemblyPlan,
    pub slp: Slp,
    pub stats: SolveStats,
}

#[derive(Debug, Clone, Error)]
pub enum SolveError {
    #[error("word has {len} symbols; exact search is limited to {limit}")]
    WordTooLong { len: usize, limit: usize },
    #[error("search budget exhausted; best known upper bound is {}", best.value)]
    BudgetExhausted { best: Box<SolveResult> },
}

/// All `|s| - 1` cuts of `s`, left to right, as `(left, right)` pairs. Parts
/// of length one are free letters; longer parts must be built.
pub fn enumerate_splits(s: &[char]) -> Vec<(&[char], &[char])> {
    (1..s.len()).map(|k| s.split_at(k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Abort {
    Budget,
    Cancelled,
}

/// Shared across iterative-deepening rounds and worker threads.
struct Shared<'a> {
    table: &'a SubstringTable,
    memo: DashMap<Box<[u64]>, u32>,
    nodes: AtomicU64,
    memo_hits: AtomicU64,
    cancel: AtomicBool,
    node_budget: Option<u64>,
    deadline: Option<Instant>,
}

#[derive(Clone)]
struct State {
    members: Vec<u64>,
    unresolved: Vec<u64>,
    count: usize,
    /// Number of members of each length, for the chain bound.
    by_len: Vec<u32>,
    /// (member, cut) decisions along the current branch.
    path: Vec<(u32, u32)>,
}

fn has(bits: &[u64], id: u32) -> bool {
    bits[id as usize / 64] >> (id % 64) & 1 == 1
}

fn set(bits: &mut [u64], id: u32) {
    bits[id as usize / 64] |= 1 << (id % 64);
}

fn clear(bits: &mut [u64], id: u32) {
    bits[id as usize / 64] &= !(1 << (id % 64));
}

fn lowest(bits: &[u64]) -> Option<u32> {
    bits.iter()
        .enumerate()
        .find(|(_, &w)| w != 0)
        .map(|(i, &w)| i as u32 * 64 + w.trailing_zeros())
}

impl State {
    fn root(table: &SubstringTable) -> Self {
        let mut st = State {
            members: vec![0; table.words],
            unresolved: vec![0; table.words],
            count: 0,
            by_len: vec![0; table.codes.len() + 1],
            path: Vec::new(),
        };
        st.add(table, 0);
        st
    }

    fn add(&mut self, table: &SubstringTable, id: u32) {
        set(&mut self.members, id);
        set(&mut self.unresolved, id);
        self.by_len[table.len[id as usize] as usize] += 1;
        self.count += 1;
    }

    fn remove(&mut self, table: &SubstringTable, id: u32) {
        clear(&mut self.members, id);
        clear(&mut self.unresolved, id);
        self.by_len[table.len[id as usize] as usize] -= 1;
        self.count -= 1;
    }

    fn key(&self) -> Box<[u64]> {
        let mut k = Vec::with_capacity(self.members.len() * 2);
        k.extend_from_slice(&self.members);
        k.extend_from_slice(&self.unresolved);
        k.into_boxed_slice()
    }

    /// Minimum number of members that must still be added below a member of
    /// length `top`: any cut of a length-`l` member has a part of length in
    /// `[ceil(l/2), l-1]`, which is a member when it is at least 2 long.
    /// Following the longer parts gives a chain of members of strictly
    /// decreasing lengths; every chain length not yet present in the set
    /// forces a new member.
    fn chain_bound(&self, top: usize) -> usize {
        if top <= 2 {
            return 0;
        }
        let mut need = vec![0usize; top + 1];
        for l in 3..=top {
            need[l] = (l.div_ceil(2)..l)
                .map(|m| need[m] + usize::from(self.by_len[m] == 0))
                .min()
                .unwrap_or(0);
        }
        need[top]
    }
}

impl Shared<'_> {
    fn tick(&self) -> Result<(), Abort> {
        if self.cancel.load(Ordering::Relaxed) {
            return Err(Abort::Cancelled);
        }
        let n = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if self.node_budget.is_some_and(|b| n > b) {
            return Err(Abort::Budget);
        }
        if n.is_multiple_of(1024) && self.deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(Abort::Budget);
        }
        Ok(())
    }

    fn expand(&self, st: &mut State, k: usize) -> Result<bool, Abort> {
        self.tick()?;
        let Some(u) = lowest(&st.unresolved) else {
            return Ok(true);
        };
        let table = self.table;
        if st.count + st.chain_bound(table.len[u as usize] as usize) > k {
            return Ok(false);
        }
        let key = st.key();
        let slack = (k - st.count) as u32;
        if self.memo.get(&key).is_some_and(|failed| *failed >= slack) {
            self.memo_hits.fetch_add(1, Ordering::Relaxed);
            return Ok(false);
        }

        clear(&mut st.unresolved, u);
        for cut in 1..table.len[u as usize] {
            let mut added = [u32::MAX; 2];
            for (slot, part) in table.split(u, cut).into_iter().enumerate() {
                if let Part::Member(id) = part {
                    if !has(&st.members, id) {
                        st.add(table, id);
                        added[slot] = id;
                    }
                }
            }
            if st.count <= k {
                st.path.push((u, cut));
                if self.expand(st, k)? {
                    return Ok(true);
                }
                st.path.pop();
            }
            for id in added.into_iter().filter(|&id| id != u32::MAX) {
                st.remove(table, id);
            }
        }
        set(&mut st.unresolved, u);

        self.memo
            .entry(key)
            .and_modify(|v| *v = (*v).max(slack))
            .or_insert(slack);
        Ok(false)
    }

    /// Searches for a member set of size at most `k`. Returns the decision
    /// path on success.
    fn search(&self, k: usize, threads: usize) -> Result<Option<Vec<(u32, u32)>>, Abort> {
        let root = State::root(self.table);
        if root.count > k {
            return Ok(None);
        }
        if threads <= 1 {
            let mut st = root;
            return Ok(self.expand(&mut st, k)?.then_some(st.path));
        }

        // Fan the root's cuts out over the pool; the first success cancels
        // the rest. Cancelled branches are not memoized as failures.
        self.tick()?;
        let found: Mutex<Option<Vec<(u32, u32)>>> = Mutex::new(None);
        let budget_hit = AtomicBool::new(false);
        let cuts: Vec<u32> = (1..self.table.len[0]).collect();
        cuts.par_iter().for_each(|&cut| {
            let mut st = root.clone();
            clear(&mut st.unresolved, 0);
            for part in self.table.split(0, cut) {
                if let Part::Member(id) = part {
                    if !has(&st.members, id) {
                        st.add(self.table, id);
                    }
                }
            }
            if st.count > k {
                return;
            }
            st.path.push((0, cut));
            match self.expand(&mut st, k) {
                Ok(true) => {
                    let mut slot = found.lock().expect("no poisoned workers");
                    if slot.is_none() {
                        *slot = Some(std::mem::take(&mut st.path));
                    }
                    self.cancel.store(true, Ordering::Relaxed);
                }
                Ok(false) | Err(Abort::Cancelled) => {}
                Err(Abort::Budget) => {
                    budget_hit.store(true, Ordering::Relaxed);
                    self.cancel.store(true, Ordering::Relaxed);
                }
            }
        });
        self.cancel.store(false, Ordering::Relaxed);
        if let Some(path) = found.into_inner().expect("no poisoned workers") {
            return Ok(Some(path));
        }
        if budget_hit.load(Ordering::Relaxed) {
            return Err(Abort::Budget);
        }
        Ok(None)
    }
}

/// Orders the chosen members shortest first and emits one step per member.
fn plan_from_path(table: &SubstringTable, alphabet: &Alphabet, letters: &[char], path: &[(u32, u32)]) -> AssemblyPlan {
    let mut chosen: Vec<(u32, u32)> = path.to_vec();
    // Higher ids are never longer; reversing id order puts parts first.
    chosen.sort_by(|a, b| b.0.cmp(&a.0));
    let mut step_of = vec![0usize; table.member_count()];
    let mut steps = Vec::with_capacity(chosen.len());
    for &(id, cut) in &chosen {
        let [l, r] = table.split(id, cut).map(|p| match p {
            Part::Letter(c) => Operand::Terminal(letters[c as usize]),
            Part::Member(m) => Operand::Prior(step_of[m as usize]),
        });
        steps.push(AssemblyStep::new(l, r));
        step_of[id as usize] = steps.len();
    }
    AssemblyPlan::new(alphabet.clone(), steps)
}

fn single_letter(w: &Word, alphabet: &Alphabet, stats: SolveStats) -> SolveResult {
    let c = w.symbols()[0];
    SolveResult {
        value: 0,
        optimal: true,
        method: "exact".into(),
        plan: AssemblyPlan::new(alphabet.clone(), Vec::new()).with_target(w.clone()),
        slp: Slp::new(alphabet.clone(), vec![SlpRule::alias("S", c)], "S").expect("letter is in alphabet"),
        stats,
    }
}

fn resolve_alphabet(w: &Word, config: &ExactConfig) -> Alphabet {
    match &config.alphabet {
        Some(a) => a.extended(w.symbols().iter().copied()),
        None => w.inferred_alphabet(),
    }
}

/// Computes the assembly index exactly, with a verifying plan and grammar.
///
/// On budget exhaustion the error carries the best witness known (from the
/// approximation backends) with `optimal = false`; the certified lower bound
/// reached is in its `stats.proven_lower`.
pub fn asi_exact(w: &Word, config: &ExactConfig) -> Result<SolveResult, SolveError> {
    if w.len() > config.max_len {
        return Err(SolveError::WordTooLong {
            len: w.len(),
            limit: config.max_len,
        });
    }
    let started = Instant::now();
    let alphabet = resolve_alphabet(w, config);
    if w.len() == 1 {
        return Ok(single_letter(w, &alphabet, SolveStats::default()));
    }

    let bounds = bounds_report(w);
    let approx = approx_best(w);
    let lower = bounds.best_lower;
    let upper = approx.value;

    let letters = w.inferred_alphabet();
    let table = SubstringTable::new(w.codes(&letters));
    let shared = Shared {
        table: &table,
        memo: DashMap::new(),
        nodes: AtomicU64::new(0),
        memo_hits: AtomicU64::new(0),
        cancel: AtomicBool::new(false),
        node_budget: config.node_budget,
        deadline: config.time_budget.map(|d| started + d),
    };

    let run = || -> (Result<Option<(usize, Vec<(u32, u32)>)>, Abort>, usize) {
        let mut proven = lower;
        for k in lower..upper {
            match shared.search(k, config.threads) {
                Ok(Some(path)) => return (Ok(Some((k, path))), k),
                Ok(None) => proven = k + 1,
                Err(e) => return (Err(e), proven),
            }
        }
        (Ok(None), upper)
    };
    let (outcome, proven_lower) = if config.threads > 1 {
        match rayon::ThreadPoolBuilder::new().num_threads(config.threads).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        }
    } else {
        run()
    };

    let stats = SolveStats {
        nodes: shared.nodes.load(Ordering::Relaxed),
        memo_hits: shared.memo_hits.load(Ordering::Relaxed),
        elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
        root_lower: lower,
        root_upper: upper,
        proven_lower,
    };
    let approx_result = |optimal: bool, stats: SolveStats| {
        let mut plan = approx.plan.clone();
        plan.alphabet = alphabet.clone();
        let slp = plan_to_slp(&plan).expect("approximation plan is valid");
        SolveResult {
            value: upper,
            optimal,
            method: approx.method.name().to_string(),
            plan,
            slp,
            stats,
        }
    };
    match outcome {
        Ok(Some((k, path))) => {
            let plan = plan_from_path(&table, &alphabet, letters.symbols(), &path);
            debug_assert_eq!(plan.cost(), k);
            let slp = plan_to_slp(&plan).expect("search plan is valid");
            Ok(SolveResult {
                value: k,
                optimal: true,
                method: "exact".into(),
                plan,
                slp,
                stats,
            })
        }
        Ok(None) => Ok(approx_result(true, stats)),
        Err(_) => Err(SolveError::BudgetExhausted {
            best: Box::new(approx_result(false, stats)),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DecisionOutcome {
    Yes,
    No,
    Unknown,
}

#[derive(Debug, Clone, Serialize)]
pub struct Decision {
    pub outcome: DecisionOutcome,
    /// Search nodes expanded; zero when a bound settled the question.
    pub nodes: u64,
    /// What settled the question.
    pub reason: &'static str,
}

/// Decides whether the assembly index of `w` is at most `k`.
///
/// `k >= n - 1` is answered YES and `k` below the log/LZ lower bound NO, both
/// without search, as is `k` at or above an approximation's size. Otherwise
/// a single search with budget `k` runs. UNKNOWN means the budget ran out or
/// the word exceeds `config.max_len`.
pub fn asi_decide(w: &Word, k: usize, config: &ExactConfig) -> Decision {
    let settled = |outcome, reason| Decision {
        outcome,
        nodes: 0,
        reason,
    };
    if k >= w.len().saturating_sub(1) {
        return settled(DecisionOutcome::Yes, "trivial_upper");
    }
    let bounds = bounds_report(w);
    if k < bounds.best_lower {
        return settled(DecisionOutcome::No, "lower_bound");
    }
    if approx_best(w).value <= k {
        return settled(DecisionOutcome::Yes, "approximation");
    }
    if w.len() > config.max_len {
        return settled(DecisionOutcome::Unknown, "word_too_long");
    }

    let letters = w.inferred_alphabet();
    let table = SubstringTable::new(w.codes(&letters));
    let started = Instant::now();
    let shared = Shared {
        table: &table,
        memo: DashMap::new(),
        nodes: AtomicU64::new(0),
        memo_hits: AtomicU64::new(0),
        cancel: AtomicBool::new(false),
        node_budget: config.node_budget,
        deadline: config.time_budget.map(|d| started + d),
    };
    let result = if config.threads > 1 {
        match rayon::ThreadPoolBuilder::new().num_threads(config.threads).build() {
            Ok(pool) => pool.install(|| shared.search(k, config.threads)),
            Err(_) => shared.search(k, 1),
        }
    } else {
        shared.search(k, 1)
    };
    let nodes = shared.nodes.load(Ordering::Relaxed);
    match result {
        Ok(Some(_)) => Decision {
            outcome: DecisionOutcome::Yes,
            nodes,
            reason: "search",
        },
        Ok(None) => Decision {
            outcome: DecisionOutcome::No,
            nodes,
            reason: "search",
        },
        Err(_) => Decision {
            outcome: DecisionOutcome::Unknown,
            nodes,
            reason: "budget",
        },
    }
}
