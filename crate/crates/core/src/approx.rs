//! Polynomial-time grammar compressors. Their output sizes are certified
//! upper bounds on the assembly index, never claims of optimality.

use std::collections::HashMap;

use serde::Serialize;

use crate::model::convert::slp_to_plan;
use crate::model::plan::AssemblyPlan;
use crate::model::slp::{Slp, SlpRule, SlpSymbol};
use crate::model::word::Word;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ApproxMethod {
    Repair,
    Balanced,
}

impl ApproxMethod {
    pub const ALL: [ApproxMethod; 2] = [ApproxMethod::Repair, ApproxMethod::Balanced];

    pub fn name(self) -> &'static str {
        match self {
            ApproxMethod::Repair => "repair",
            ApproxMethod::Balanced => "balanced",
        }
    }

    pub fn run(self, w: &Word) -> Slp {
        match self {
            ApproxMethod::Repair => repair_compress(w),
            ApproxMethod::Balanced => balanced_shared(w),
        }
    }
}

/// Symbols of the working sequence: alphabet positions below `sigma`,
/// rule ids above.
struct GrammarBuilder<'a> {
    word: &'a Word,
    sigma: u32,
    pairs: Vec<(u32, u32)>,
}

impl<'a> GrammarBuilder<'a> {
    fn new(word: &'a Word) -> Self {
        Self {
            word,
            sigma: word.inferred_alphabet().len() as u32,
            pairs: Vec::new(),
        }
    }

    fn add(&mut self, left: u32, right: u32) -> u32 {
        self.pairs.push((left, right));
        self.sigma + self.pairs.len() as u32 - 1
    }

    fn finish(self, start: u32) -> Slp {
        let alphabet = self.word.inferred_alphabet();
        let symbols = alphabet.symbols().to_vec();
        let sigma = self.sigma;
        let symbol = |code: u32| {
            if code < sigma {
                SlpSymbol::Terminal(symbols[code as usize])
            } else {
                SlpSymbol::Nonterminal(format!("R{}", code - sigma + 1))
            }
        };
        if start < sigma {
            return Slp::new(alphabet.clone(), vec![SlpRule::alias("S", symbols[start as usize])], "S")
                .expect("alias grammar is valid");
        }
        let rules = self
            .pairs
            .iter()
            .enumerate()
            .map(|(i, &(l, r))| SlpRule::pair(format!("R{}", i + 1), symbol(l), symbol(r)))
            .collect();
        Slp::new(alphabet.clone(), rules, format!("R{}", start - sigma + 1)).expect("builder output is valid")
    }
}

/// RePair: while some adjacent pair occurs at least twice (counted without
/// overlap, left to right), replace the most frequent one with a fresh rule,
/// breaking ties by earliest first occurrence. The remaining sequence is
/// then folded left to right into binary rules.
pub fn repair_compress(w: &Word) -> Slp {
    let mut builder = GrammarBuilder::new(w);
    let alphabet = w.inferred_alphabet();
    let mut seq: Vec<u32> = w.codes(&alphabet);

    // (count, first position, start of last counted occurrence)
    let mut stats: HashMap<(u32, u32), (usize, usize, usize)> = HashMap::new();
    loop {
        stats.clear();
        for (i, win) in seq.windows(2).enumerate() {
            let e = stats.entry((win[0], win[1])).or_insert((0, i, usize::MAX));
            if e.2 == usize::MAX || i >= e.2 + 2 {
                e.0 += 1;
                e.2 = i;
            }
        }
        let best = stats
            .iter()
            .filter(|(_, &(count, _, _))| count >= 2)
            .max_by(|a, b| a.1 .0.cmp(&b.1 .0).then(b.1 .1.cmp(&a.1 .1)))
            .map(|(&pair, _)| pair);
        let Some(pair) = best else { break };
        let fresh = builder.add(pair.0, pair.1);
        let mut out = Vec::with_capacity(seq.len());
        let mut i = 0;
        while i < seq.len() {
            if i + 1 < seq.len() && (seq[i], seq[i + 1]) == pair {
                out.push(fresh);
                i += 2;
            } else {
                out.push(seq[i]);
                i += 1;
            }
        }
        seq = out;
    }

    let mut acc = seq[0];
    for &next in &seq[1..] {
        acc = builder.add(acc, next);
    }
    builder.finish(acc)
}

/// Balanced binary split tree of `w` (left half gets the floor), with equal
/// substrings sharing one rule. At most `n - 1` rules; exactly `log2 n` on
/// unary words of power-of-two length.
pub fn balanced_shared(w: &Word) -> Slp {
    let alphabet = w.inferred_alphabet();
    let codes = w.codes(&alphabet);
    let mut builder = GrammarBuilder::new(w);
    let mut memo: HashMap<&[u32], u32> = HashMap::new();

    fn build<'s>(s: &'s [u32], builder: &mut GrammarBuilder<'_>, memo: &mut HashMap<&'s [u32], u32>) -> u32 {
        if s.len() == 1 {
            return s[0];
        }
        if let Some(&id) = memo.get(s) {
            return id;
        }
        let mid = s.len() / 2;
        let left = build(&s[..mid], builder, memo);
        let right = build(&s[mid..], builder, memo);
        let id = builder.add(left, right);
        memo.insert(s, id);
        id
    }

    let root = build(&codes, &mut builder, &mut memo);
    builder.finish(root)
}

/// Output of [`approx_best`] or a single backend.
#[derive(Debug, Clone, Serialize)]
pub struct ApproxResult {
    pub value: usize,
    pub method: ApproxMethod,
    pub slp: Slp,
    pub plan: AssemblyPlan,
}

impl ApproxResult {
    fn from_slp(method: ApproxMethod, slp: Slp) -> Self {
        let plan = slp_to_plan(&slp).expect("compressor output is a valid SLP");
        Self {
            value: slp.size(),
            method,
            slp,
            plan,
        }
    }
}

/// Runs a single backend.
pub fn approx_with(w: &Word, method: ApproxMethod) -> ApproxResult {
    ApproxResult::from_slp(method, method.run(w))
}

/// Runs every backend in parallel and keeps the smallest grammar. Ties go to
/// the earlier backend in [`ApproxMethod::ALL`].
pub fn approx_best(w: &Word) -> ApproxResult {
    let (repair, balanced) = rayon::join(|| repair_compress(w), || balanced_shared(w));
    if balanced.size() < repair.size() {
        ApproxResult::from_slp(ApproxMethod::Balanced, balanced)
    } else {
        ApproxResult::from_slp(ApproxMethod::Repair, repair)
    }
}
