//! Cheap certified bounds on the assembly index.

use serde::Serialize;

use crate::model::word::Word;

/// `n - 1`: each concatenation adds at least one symbol to the longest word.
pub fn trivial_upper(w: &Word) -> usize {
    w.len().saturating_sub(1)
}

/// `ceil(log2 n)`: a concatenation at most doubles the longest word built
/// so far, which starts at length 1.
pub fn log_lower(w: &Word) -> usize {
    ceil_log2(w.len())
}

pub(crate) fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// One phrase of a greedy LZ77 parse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LzFactor {
    /// A letter with no earlier occurrence.
    Fresh(char),
    /// `length` symbols copied from `source`, which starts strictly before
    /// the phrase. The copy may overlap the phrase itself.
    Copy { source: usize, length: usize },
}

impl LzFactor {
    pub fn len(&self) -> usize {
        match self {
            LzFactor::Fresh(_) => 1,
            LzFactor::Copy { length, .. } => *length,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Greedy leftmost LZ77 parse with self-referential copies, computed by
/// direct longest-previous-prefix scanning. Among equally long sources the
/// leftmost wins.
pub fn lz77_factorize(w: &Word) -> Vec<LzFactor> {
    lz77_factorize_symbols(w.symbols())
}

pub(crate) fn lz77_factorize_symbols(s: &[char]) -> Vec<LzFactor> {
    let n = s.len();
    let mut factors = Vec::new();
    let mut i = 0;
    while i < n {
        let mut best = (0usize, 0usize);
        for j in 0..i {
            let mut l = 0;
            while i + l < n && s[j + l] == s[i + l] {
                l += 1;
            }
            if l > best.1 {
                best = (j, l);
                if i + l == n {
                    break;
                }
            }
        }
        if best.1 == 0 {
            factors.push(LzFactor::Fresh(s[i]));
            i += 1;
        } else {
            factors.push(LzFactor::Copy {
                source: best.0,
                length: best.1,
            });
            i += best.1;
        }
    }
    factors
}

/// Decodes a factor list left to right; overlapping copies read symbols
/// produced earlier in the same copy.
pub fn lz77_decode(factors: &[LzFactor]) -> Vec<char> {
    let mut out: Vec<char> = Vec::new();
    for f in factors {
        match *f {
            LzFactor::Fresh(c) => out.push(c),
            LzFactor::Copy { source, length } => {
                for k in 0..length {
                    out.push(out[source + k]);
                }
            }
        }
    }
    out
}

/// LZ77 phrase count minus one. The offset keeps the bound safe for words
/// whose letters are all distinct, where the count is one more than the
/// index.
pub fn lz_lower(w: &Word) -> usize {
    lz_lower_from_count(lz77_factorize(w).len())
}

fn lz_lower_from_count(count: usize) -> usize {
    count.saturating_sub(1)
}

/// Where a reported bound came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSource {
    Log,
    Lz,
    Trivial,
    /// An upper bound certified by a witness from the named method.
    Witness(String),
}

/// Lower and upper bounds on the assembly index, with provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundsReport {
    pub n: usize,
    pub trivial_upper: usize,
    pub log_lower: usize,
    pub lz_factors: usize,
    pub lz_lower: usize,
    pub best_lower: usize,
    pub best_lower_source: BoundSource,
    pub best_upper: usize,
    pub best_upper_source: BoundSource,
}

impl BoundsReport {
    /// Lowers `best_upper` to `value` when it improves on the current bound.
    pub fn with_upper(mut self, value: usize, method: &str) -> Self {
        if value < self.best_upper {
            self.best_upper = value;
            self.best_upper_source = BoundSource::Witness(method.to_string());
        }
        self
    }
}

/// Assembles the trivial, log and LZ bounds. Use
/// [`BoundsReport::with_upper`] to fold in a witness-backed upper bound.
pub fn bounds_report(w: &Word) -> BoundsReport {
    let n = w.len();
    let log = log_lower(w);
    let lz_factors = lz77_factorize(w).len();
    let lz = lz_lower_from_count(lz_factors);
    let (best_lower, best_lower_source) = if lz > log {
        (lz, BoundSource::Lz)
    } else {
        (log, BoundSource::Log)
    };
    BoundsReport {
        n,
        trivial_upper: trivial_upper(w),
        log_lower: log,
        lz_factors,
        lz_lower: lz,
        best_lower,
        best_lower_source,
        best_upper: trivial_upper(w),
        best_upper_source: BoundSource::Trivial,
    }
}
