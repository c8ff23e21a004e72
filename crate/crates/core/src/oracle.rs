//! Exhaustive reference search over the unrestricted assembly model.
//!
//! The pool starts with the letters; each step concatenates any ordered pair
//! of pool strings, substrings of the target or not. Depths are tried from
//! `ceil(log2 n)` upward. This is slow on purpose: it shares no code or
//! normalization with [`crate::exact`] and exists to check it.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::approx::approx_best;
use crate::bounds::{bounds_report, ceil_log2};
use crate::exact::{asi_exact, ExactConfig};
use crate::model::word::{Alphabet, Word};

#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    /// Longest word accepted.
    pub limit: usize,
    /// Discard products longer than the target.
    pub prune_length: bool,
    /// Stop when even repeated doubling of the longest pool string cannot
    /// reach the target length.
    pub prune_doubling: bool,
    /// Remember (pool, remaining depth) failures.
    pub memoize: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            limit: 10,
            prune_length: true,
            prune_doubling: true,
            memoize: true,
        }
    }
}

impl OracleConfig {
    /// No pruning and no memoization at all.
    pub fn unpruned(limit: usize) -> Self {
        Self {
            limit,
            prune_length: false,
            prune_doubling: false,
            memoize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("word has {len} symbols; the oracle is limited to {limit}")]
    WordTooLong { len: usize, limit: usize },
}

struct Oracle<'a> {
    target: &'a [u8],
    letters: Vec<Vec<u8>>,
    config: OracleConfig,
    /// Sorted pool -> largest remaining depth known to fail.
    failed: HashMap<Vec<Vec<u8>>, usize>,
}

impl Oracle<'_> {
    fn reachable(&mut self, pool: &[Vec<u8>], remaining: usize) -> bool {
        if pool.iter().any(|s| s == self.target) {
            return true;
        }
        if remaining == 0 {
            return false;
        }
        let n = self.target.len();
        if self.config.prune_doubling {
            let longest = pool.iter().map(Vec::len).max().unwrap_or(1).max(1);
            if remaining < usize::BITS as usize && longest << remaining < n {
                return false;
            }
        }
        if self.config.memoize && self.failed.get(pool).is_some_and(|&d| d >= remaining) {
            return false;
        }

        let items: Vec<Vec<u8>> = self.letters.iter().chain(pool.iter()).cloned().collect();
        for x in &items {
            for y in &items {
                if self.config.prune_length && x.len() + y.len() > n {
                    continue;
                }
                let mut product = x.clone();
                product.extend_from_slice(y);
                let mut next = pool.to_vec();
                if let Err(at) = next.binary_search(&product) {
                    next.insert(at, product);
                }
                if self.reachable(&next, remaining - 1) {
                    return true;
                }
            }
        }

        if self.config.memoize {
            let entry = self.failed.entry(pool.to_vec()).or_insert(0);
            *entry = (*entry).max(remaining);
        }
        false
    }
}

/// Exact assembly index over the word's own letters.
pub fn asi_oracle(w: &Word, config: &OracleConfig) -> Result<usize, OracleError> {
    asi_oracle_with(w, &w.inferred_alphabet(), config)
}

/// Exact assembly index when the initial pool is `alphabet`, which must
/// contain every symbol of `w`.
pub fn asi_oracle_with(w: &Word, alphabet: &Alphabet, config: &OracleConfig) -> Result<usize, OracleError> {
    let n = w.len();
    if n > config.limit {
        return Err(OracleError::WordTooLong { len: n, limit: config.limit });
    }
    assert!(alphabet.len() < 256, "oracle alphabets are small");
    let target: Vec<u8> = w
        .symbols()
        .iter()
        .map(|&c| alphabet.position(c).expect("alphabet covers the word") as u8)
        .collect();
    if n == 1 {
        return Ok(0);
    }
    let mut oracle = Oracle {
        target: &target,
        letters: (0..alphabet.len() as u8).map(|c| vec![c]).collect(),
        config: *config,
        failed: HashMap::new(),
    };
    for depth in ceil_log2(n)..n {
        if oracle.reachable(&[], depth) {
            return Ok(depth);
        }
    }
    unreachable!("n - 1 steps always suffice")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditRow {
    pub word: String,
    pub n: usize,
    pub oracle: usize,
    pub exact: usize,
    pub log_lower: usize,
    pub lz_factors: usize,
    pub lz_lower: usize,
    pub approx_best: usize,
    pub trivial_upper: usize,
    /// Oracle value with one unused letter added to the pool, when requested.
    pub enlarged: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct AuditReport {
    pub rows: Vec<AuditRow>,
    pub violations: Vec<String>,
}

impl AuditReport {
    pub fn words(&self) -> usize {
        self.rows.len()
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct AuditOptions {
    pub oracle: OracleConfig,
    /// Re-run the oracle with one extra unused letter and require the same value.
    pub enlarge_alphabet: bool,
}

/// All words over `alphabet` of length 1 to `max_n`, shortest first, then
/// in alphabet order.
pub fn all_words(alphabet: &Alphabet, max_n: usize) -> impl Iterator<Item = Word> + '_ {
    let sigma = alphabet.len();
    (1..=max_n).flat_map(move |n| {
        let total = sigma.checked_pow(n as u32).expect("audit size fits in usize");
        (0..total).map(move |mut index| {
            let mut symbols = vec![alphabet.symbols()[0]; n];
            for slot in symbols.iter_mut().rev() {
                *slot = alphabet.symbols()[index % sigma];
                index /= sigma;
            }
            Word::new(symbols).expect("n >= 1")
        })
    })
}

fn fresh_letter(alphabet: &Alphabet) -> char {
    ('#'..)
        .chain('A'..)
        .find(|&c| !alphabet.contains(c))
        .expect("some character is unused")
}

/// Audits one word: oracle against exact solver, and both against every
/// bound and approximation.
pub fn audit_word(w: &Word, options: &AuditOptions) -> (AuditRow, Vec<String>) {
    let oracle = asi_oracle(w, &options.oracle).expect("audit words are within the oracle limit");
    let exact = asi_exact(
        w,
        &ExactConfig {
            max_len: w.len().max(crate::exact::DEFAULT_EXACT_LIMIT),
            ..ExactConfig::default()
        },
    )
    .expect("unbudgeted exact search completes");
    let bounds = bounds_report(w);
    let approx = approx_best(w).value;
    let enlarged = options.enlarge_alphabet.then(|| {
        let own = w.inferred_alphabet();
        let bigger = own.extended([fresh_letter(&own)]);
        asi_oracle_with(w, &bigger, &options.oracle).expect("within limit")
    });

    let mut violations = Vec::new();
    let word = w.to_string();
    if oracle != exact.value {
        violations.push(format!("{word}: oracle {oracle} != exact {}", exact.value));
    }
    if bounds.log_lower > oracle {
        violations.push(format!("{word}: log_lower {} > {oracle}", bounds.log_lower));
    }
    if bounds.lz_lower > oracle {
        violations.push(format!("{word}: lz_lower {} > {oracle}", bounds.lz_lower));
    }
    if approx < oracle {
        violations.push(format!("{word}: approx {approx} < {oracle}"));
    }
    if approx > bounds.trivial_upper {
        violations.push(format!("{word}: approx {approx} > n-1"));
    }
    if let Some(e) = enlarged.filter(|&e| e != oracle) {
        violations.push(format!("{word}: enlarged alphabet gives {e} != {oracle}"));
    }

    let row = AuditRow {
        word,
        n: w.len(),
        oracle,
        exact: exact.value,
        log_lower: bounds.log_lower,
        lz_factors: bounds.lz_factors,
        lz_lower: bounds.lz_lower,
        approx_best: approx,
        trivial_upper: bounds.trivial_upper,
        enlarged,
    };
    (row, violations)
}

/// Audits every word over `alphabet` up to length `max_n`.
pub fn oracle_audit(alphabet: &Alphabet, max_n: usize, options: &AuditOptions) -> AuditReport {
    let mut report = AuditReport::default();
    for w in all_words(alphabet, max_n) {
        let (row, violations) = audit_word(&w, options);
        report.rows.push(row);
        report.violations.extend(violations);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn known_values() {
        let cfg = OracleConfig::default();
        assert_eq!(asi_oracle(&w("01010"), &cfg), Ok(3));
        assert_eq!(asi_oracle(&w("0"), &cfg), Ok(0));
        assert_eq!(asi_oracle(&w("0011"), &cfg), Ok(3));
        assert_eq!(asi_oracle(&w("aaaa"), &cfg), Ok(2));
        assert_eq!(
            asi_oracle(&w("01010101010"), &cfg),
            Err(OracleError::WordTooLong { len: 11, limit: 10 })
        );
    }

    #[test]
    fn unpruned_agrees_on_small_words() {
        for s in ["01010", "0011", "aaaa", "ab", "abcab"] {
            assert_eq!(
                asi_oracle(&w(s), &OracleConfig::unpruned(10)),
                asi_oracle(&w(s), &OracleConfig::default()),
                "{s}"
            );
        }
    }

    #[test]
    fn word_enumeration() {
        let sigma = Alphabet::new(['0', '1']).unwrap();
        let words: Vec<String> = all_words(&sigma, 2).map(|w| w.to_string()).collect();
        assert_eq!(words, ["0", "1", "00", "01", "10", "11"]);
        assert_eq!(all_words(&sigma, 8).count(), 510);
    }

    #[test]
    fn small_binary_audit_is_clean() {
        let sigma = Alphabet::new(['0', '1']).unwrap();
        let report = oracle_audit(&sigma, 4, &AuditOptions::default());
        assert_eq!(report.words(), 2 + 4 + 8 + 16);
        assert!(report.is_clean(), "{:?}", report.violations);
    }

    #[test]
    fn unary_audit_hits_log_at_powers_of_two() {
        let sigma = Alphabet::new(['a']).unwrap();
        let report = oracle_audit(&sigma, 8, &AuditOptions::default());
        assert!(report.is_clean(), "{:?}", report.violations);
        for row in &report.rows {
            if row.n.is_power_of_two() {
                assert_eq!(row.oracle, row.log_lower);
            }
        }
    }

    #[test]
    fn row_for_01010() {
        let (row, violations) = audit_word(
            &w("01010"),
            &AuditOptions {
                enlarge_alphabet: true,
                ..AuditOptions::default()
            },
        );
        assert!(violations.is_empty());
        assert_eq!((row.oracle, row.exact, row.log_lower, row.enlarged), (3, 3, 3, Some(3)));
        assert!(row.approx_best >= 3);
    }
}
