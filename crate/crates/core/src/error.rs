use thiserror::Error;

/// Errors raised by the word, plan and grammar model.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("alphabet must contain at least one symbol")]
    EmptyAlphabet,
    #[error("duplicate symbol {0:?} in alphabet")]
    DuplicateSymbol(char),
    #[error("words must contain at least one symbol")]
    EmptyWord,
    #[error("symbol {0:?} is not in the alphabet")]
    SymbolNotInAlphabet(char),
    #[error("step {step} references s{reference}, which is not an earlier step")]
    DanglingReference { step: usize, reference: usize },
    #[error("empty plan cannot produce a target of length {0}")]
    EmptyPlanNonEmptyTarget(usize),
    #[error("plan has no steps, so no start rule can be derived")]
    EmptyPlan,
    #[error("grammar is cyclic through nonterminal {0}")]
    CyclicGrammar(String),
    #[error("nonterminal {0} is referenced but never defined")]
    UndefinedNonterminal(String),
    #[error("start symbol {0} is referenced by another rule")]
    StartReferenced(String),
    #[error("nonterminal {0} has more than one rule")]
    DuplicateNonterminal(String),
    #[error("expansion length {length} exceeds the limit of {max_len} symbols")]
    ExpansionTooLarge { length: u128, max_len: usize },
    #[error("malformed witness encoding: {0}")]
    MalformedWitness(String),
}

/// A text-format parse failure, tagged with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}
