use std::collections::{BTreeSet, HashMap};

use serde::ser::SerializeStruct;
use serde::Serialize;

use super::word::{Alphabet, Word};
use crate::error::ModelError;

/// Default cap on materialized expansion length (2^20 symbols).
pub const DEFAULT_MAX_EXPANSION: usize = 1 << 20;

/// A symbol on the right-hand side of a rule.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SlpSymbol {
    Terminal(char),
    Nonterminal(String),
}

impl SlpSymbol {
    pub fn nt(name: impl Into<String>) -> Self {
        SlpSymbol::Nonterminal(name.into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleRhs {
    /// `X -> Y Z`, a concatenation rule.
    Pair(SlpSymbol, SlpSymbol),
    /// `X -> a`, a terminal alias. Costs nothing.
    Terminal(char),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SlpRule {
    pub lhs: String,
    pub rhs: RuleRhs,
}

impl SlpRule {
    pub fn pair(lhs: impl Into<String>, left: SlpSymbol, right: SlpSymbol) -> Self {
        Self {
            lhs: lhs.into(),
            rhs: RuleRhs::Pair(left, right),
        }
    }

    pub fn alias(lhs: impl Into<String>, terminal: char) -> Self {
        Self {
            lhs: lhs.into(),
            rhs: RuleRhs::Terminal(terminal),
        }
    }

    pub fn is_concatenation(&self) -> bool {
        matches!(self.rhs, RuleRhs::Pair(..))
    }
}

/// A straight-line program: every nonterminal has exactly one rule and the
/// grammar derives a single word from `start`.
///
/// Construction checks single-production and alphabet membership. Acyclicity
/// and definedness of referenced names are checked by the operations that
/// need a derivation order ([`expand_slp`], [`crate::slp_to_plan`]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slp {
    alphabet: Alphabet,
    rules: Vec<SlpRule>,
    start: String,
}

/// Right-hand side after name resolution; aliases are inlined as terminals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Ref {
    Terminal(char),
    Rule(usize),
}

#[derive(Debug, Clone)]
pub(crate) enum ResolvedRhs {
    Pair(Ref, Ref),
    Terminal(char),
}

/// Rules indexed by position, plus a dependency-respecting order with the
/// start rule last.
#[derive(Debug, Clone)]
pub(crate) struct Resolved {
    pub rhs: Vec<ResolvedRhs>,
    pub order: Vec<usize>,
    pub start: usize,
}

impl Slp {
    pub fn new(alphabet: Alphabet, rules: Vec<SlpRule>, start: impl Into<String>) -> Result<Self, ModelError> {
        let mut seen = BTreeSet::new();
        for rule in &rules {
            if !seen.insert(rule.lhs.as_str()) {
                return Err(ModelError::DuplicateNonterminal(rule.lhs.clone()));
            }
            let terminals: Vec<char> = match &rule.rhs {
                RuleRhs::Terminal(c) => vec![*c],
                RuleRhs::Pair(a, b) => [a, b]
                    .into_iter()
                    .filter_map(|s| match s {
                        SlpSymbol::Terminal(c) => Some(*c),
                        SlpSymbol::Nonterminal(_) => None,
                    })
                    .collect(),
            };
            if let Some(c) = terminals.into_iter().find(|&c| !alphabet.contains(c)) {
                return Err(ModelError::SymbolNotInAlphabet(c));
            }
        }
        Ok(Self {
            alphabet,
            rules,
            start: start.into(),
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn rules(&self) -> &[SlpRule] {
        &self.rules
    }

    pub fn start(&self) -> &str {
        &self.start
    }

    /// Number of concatenation rules.
    pub fn size(&self) -> usize {
        self.rules.iter().filter(|r| r.is_concatenation()).count()
    }

    /// Resolves names and computes a stable topological order: among ready
    /// rules the earliest listed goes first, and the start rule is emitted
    /// last. No rule may reference the start symbol.
    pub(crate) fn resolve(&self) -> Result<Resolved, ModelError> {
        let index: HashMap<&str, usize> = self
            .rules
            .iter()
            .enumerate()
            .map(|(i, r)| (r.lhs.as_str(), i))
            .collect();
        let start = *index
            .get(self.start.as_str())
            .ok_or_else(|| ModelError::UndefinedNonterminal(self.start.clone()))?;

        let lookup = |sym: &SlpSymbol| -> Result<Ref, ModelError> {
            match sym {
                SlpSymbol::Terminal(c) => Ok(Ref::Terminal(*c)),
                SlpSymbol::Nonterminal(name) => index
                    .get(name.as_str())
                    .map(|&i| Ref::Rule(i))
                    .ok_or_else(|| ModelError::UndefinedNonterminal(name.clone())),
            }
        };
        let mut raw = Vec::with_capacity(self.rules.len());
        for rule in &self.rules {
            raw.push(match &rule.rhs {
                RuleRhs::Terminal(c) => ResolvedRhs::Terminal(*c),
                RuleRhs::Pair(a, b) => ResolvedRhs::Pair(lookup(a)?, lookup(b)?),
            });
        }

        let m = self.rules.len();
        let mut dependents: Vec<Vec<usize>> = vec![Vec::new(); m];
        let mut pending = vec![0usize; m];
        for (i, rhs) in raw.iter().enumerate() {
            if let ResolvedRhs::Pair(a, b) = rhs {
                for r in [a, b] {
                    if let Ref::Rule(j) = *r {
                        if j == start && i != start {
                            return Err(ModelError::StartReferenced(self.start.clone()));
                        }
                        dependents[j].push(i);
                        pending[i] += 1;
                    }
                }
            }
        }
        let mut ready: BTreeSet<usize> = (0..m).filter(|&i| pending[i] == 0 && i != start).collect();
        let mut order = Vec::with_capacity(m);
        let mut start_ready = pending[start] == 0;
        loop {
            let next = match ready.pop_first() {
                Some(i) => i,
                None if start_ready && !order.contains(&start) => start,
                None => break,
            };
            order.push(next);
            for &d in &dependents[next] {
                pending[d] -= 1;
                if pending[d] == 0 {
                    if d == start {
                        start_ready = true;
                    } else {
                        ready.insert(d);
                    }
                }
            }
        }
        if order.len() < m {
            let stuck = (0..m).find(|i| !order.contains(i)).expect("some rule left");
            return Err(ModelError::CyclicGrammar(self.rules[stuck].lhs.clone()));
        }

        // Inline aliases so that callers see terminals directly.
        let rhs = raw
            .iter()
            .map(|r| match r {
                ResolvedRhs::Pair(a, b) => {
                    let inline = |x: &Ref| match *x {
                        Ref::Rule(j) => match raw[j] {
                            ResolvedRhs::Terminal(c) => Ref::Terminal(c),
                            ResolvedRhs::Pair(..) => Ref::Rule(j),
                        },
                        t => t,
                    };
                    ResolvedRhs::Pair(inline(a), inline(b))
                }
                t => t.clone(),
            })
            .collect();
        Ok(Resolved { rhs, order, start })
    }
}

/// Number of concatenation rules `X -> Y Z`.
pub fn slp_size(slp: &Slp) -> usize {
    slp.size()
}

/// Derives the unique word of `slp`. Lengths are computed first so that the
/// `max_len` cap applies before anything is materialized.
pub fn expand_slp(slp: &Slp, max_len: usize) -> Result<Word, ModelError> {
    let resolved = slp.resolve()?;
    let len_of = |lengths: &[u128], r: Ref| match r {
        Ref::Terminal(_) => 1,
        Ref::Rule(j) => lengths[j],
    };
    let mut lengths = vec![0u128; resolved.rhs.len()];
    for &i in &resolved.order {
        lengths[i] = match resolved.rhs[i] {
            ResolvedRhs::Terminal(_) => 1,
            ResolvedRhs::Pair(a, b) => len_of(&lengths, a).saturating_add(len_of(&lengths, b)),
        };
    }
    let total = lengths[resolved.start];
    if total > max_len as u128 {
        return Err(ModelError::ExpansionTooLarge { length: total, max_len });
    }

    let mut reachable = vec![false; resolved.rhs.len()];
    reachable[resolved.start] = true;
    for &i in resolved.order.iter().rev() {
        if reachable[i] {
            if let ResolvedRhs::Pair(a, b) = resolved.rhs[i] {
                for r in [a, b] {
                    if let Ref::Rule(j) = r {
                        reachable[j] = true;
                    }
                }
            }
        }
    }
    let mut built: Vec<Vec<char>> = vec![Vec::new(); resolved.rhs.len()];
    for &i in &resolved.order {
        if !reachable[i] {
            continue;
        }
        let s = match resolved.rhs[i] {
            ResolvedRhs::Terminal(c) => vec![c],
            ResolvedRhs::Pair(a, b) => {
                let mut s = Vec::with_capacity(lengths[i] as usize);
                for r in [a, b] {
                    match r {
                        Ref::Terminal(c) => s.push(c),
                        Ref::Rule(j) => s.extend_from_slice(&built[j]),
                    }
                }
                s
            }
        };
        built[i] = s;
    }
    Word::new(std::mem::take(&mut built[resolved.start]))
}

impl Serialize for Slp {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Slp", 4)?;
        s.serialize_field("alphabet", &self.alphabet)?;
        s.serialize_field("start", &self.start)?;
        s.serialize_field("rules", &self.rules)?;
        s.serialize_field("size", &self.size())?;
        s.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use SlpSymbol::Terminal as T;

    fn binary() -> Alphabet {
        Alphabet::new(['0', '1']).unwrap()
    }

    fn grammar_01010() -> Slp {
        Slp::new(
            binary(),
            vec![
                SlpRule::pair("R1", T('0'), T('1')),
                SlpRule::pair("R2", SlpSymbol::nt("R1"), T('0')),
                SlpRule::pair("R3", SlpSymbol::nt("R1"), SlpSymbol::nt("R2")),
            ],
            "R3",
        )
        .unwrap()
    }

    fn doubling(depth: usize) -> Slp {
        let sigma = Alphabet::new(['a']).unwrap();
        let mut rules = vec![SlpRule::pair("R1", T('a'), T('a'))];
        for i in 2..=depth {
            let prev = format!("R{}", i - 1);
            rules.push(SlpRule::pair(format!("R{i}"), SlpSymbol::nt(&prev), SlpSymbol::nt(&prev)));
        }
        Slp::new(sigma, rules, format!("R{depth}")).unwrap()
    }

    #[test]
    fn grammar_01010_expands_and_sizes() {
        let g = grammar_01010();
        assert_eq!(slp_size(&g), 3);
        assert_eq!(expand_slp(&g, DEFAULT_MAX_EXPANSION).unwrap().to_string(), "01010");
    }

    #[test]
    fn doubling_chain() {
        assert_eq!(expand_slp(&doubling(3), 100).unwrap().to_string(), "aaaaaaaa");
        assert_eq!(
            expand_slp(&doubling(40), DEFAULT_MAX_EXPANSION),
            Err(ModelError::ExpansionTooLarge {
                length: 1 << 40,
                max_len: DEFAULT_MAX_EXPANSION
            })
        );
    }

    #[test]
    fn terminal_alias_costs_nothing() {
        let g = Slp::new(binary(), vec![SlpRule::alias("S", '1')], "S").unwrap();
        assert_eq!(slp_size(&g), 0);
        assert_eq!(expand_slp(&g, 10).unwrap().to_string(), "1");
    }

    #[test]
    fn alias_can_be_referenced() {
        let g = Slp::new(
            binary(),
            vec![
                SlpRule::alias("Z", '0'),
                SlpRule::pair("S", SlpSymbol::nt("Z"), T('1')),
            ],
            "S",
        )
        .unwrap();
        assert_eq!(expand_slp(&g, 10).unwrap().to_string(), "01");
        assert_eq!(slp_size(&g), 1);
    }

    #[test]
    fn structural_errors() {
        let cyclic = Slp::new(
            binary(),
            vec![
                SlpRule::pair("A", SlpSymbol::nt("B"), T('0')),
                SlpRule::pair("B", SlpSymbol::nt("A"), T('1')),
                SlpRule::pair("S", SlpSymbol::nt("A"), T('1')),
            ],
            "S",
        )
        .unwrap();
        assert!(matches!(expand_slp(&cyclic, 100), Err(ModelError::CyclicGrammar(_))));

        let undefined = Slp::new(binary(), vec![SlpRule::pair("S", SlpSymbol::nt("Q"), T('0'))], "S").unwrap();
        assert_eq!(
            expand_slp(&undefined, 100),
            Err(ModelError::UndefinedNonterminal("Q".into()))
        );

        let no_start = Slp::new(binary(), vec![SlpRule::pair("S", T('1'), T('0'))], "X").unwrap();
        assert_eq!(expand_slp(&no_start, 100), Err(ModelError::UndefinedNonterminal("X".into())));

        assert_eq!(
            Slp::new(
                binary(),
                vec![SlpRule::alias("S", '0'), SlpRule::alias("S", '1')],
                "S"
            ),
            Err(ModelError::DuplicateNonterminal("S".into()))
        );
        assert_eq!(
            Slp::new(binary(), vec![SlpRule::alias("S", 'q')], "S"),
            Err(ModelError::SymbolNotInAlphabet('q'))
        );
    }

    #[test]
    fn order_is_topological_with_start_last() {
        let g = Slp::new(
            binary(),
            vec![
                SlpRule::pair("R3", SlpSymbol::nt("R1"), SlpSymbol::nt("R2")),
                SlpRule::pair("R2", SlpSymbol::nt("R1"), T('0')),
                SlpRule::pair("R1", T('0'), T('1')),
                SlpRule::pair("U", T('1'), T('1')),
            ],
            "R3",
        )
        .unwrap();
        let r = g.resolve().unwrap();
        assert_eq!(r.order, vec![2, 1, 3, 0]);
        assert_eq!(expand_slp(&g, 100).unwrap().to_string(), "01010");
    }

    #[test]
    fn json_field_names() {
        let json = serde_json::to_value(grammar_01010()).unwrap();
        assert_eq!(json["size"], 3);
        assert_eq!(json["start"], "R3");
        assert_eq!(json["rules"][1]["rhs"]["pair"][0], serde_json::json!({"nonterminal": "R1"}));
    }
}
