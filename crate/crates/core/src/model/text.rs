//! Line-oriented text formats for plans and grammars.
//!
//! ```text
//! alphabet: 0 1          alphabet: 0 1
//! target: 01010          start: R3
//! s1 = '0' + '1'         R1 -> '0' '1'
//! s2 = s1 + '0'          R2 -> R1 '0'
//! s3 = s1 + s2           R3 -> R1 R2
//! ```
//!
//! Blank lines and `#` comments (outside quotes) are ignored. Terminals are
//! single characters in single quotes; alphabet entries may be bare or quoted.

use std::fmt::Write as _;

use super::plan::{AssemblyPlan, AssemblyStep, Operand};
use super::slp::{RuleRhs, Slp, SlpRule, SlpSymbol};
use super::word::{Alphabet, Word};
use crate::error::{ModelError, ParseError};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Quoted(char),
    Bare(String),
    Equals,
    Plus,
    Arrow,
}

fn tokenize(line_no: usize, text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '#' => break,
            c if c.is_whitespace() => {}
            '\'' => {
                let sym = chars
                    .next()
                    .ok_or_else(|| ParseError::new(line_no, "unterminated quoted terminal"))?;
                if chars.next() != Some('\'') {
                    return Err(ParseError::new(line_no, "quoted terminal must be one symbol"));
                }
                tokens.push(Token::Quoted(sym));
            }
            '=' => tokens.push(Token::Equals),
            '+' => tokens.push(Token::Plus),
            '-' if chars.peek() == Some(&'>') => {
                chars.next();
                tokens.push(Token::Arrow);
            }
            _ => {
                let mut s = String::from(c);
                while let Some(&d) = chars.peek() {
                    if d.is_whitespace() || matches!(d, '#' | '\'' | '=' | '+') {
                        break;
                    }
                    s.push(d);
                    chars.next();
                }
                tokens.push(Token::Bare(s));
            }
        }
    }
    Ok(tokens)
}

/// Splits `key: value` directives; returns `None` for other lines.
fn directive<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let rest = line.trim_start().strip_prefix(key)?;
    rest.trim_start().strip_prefix(':')
}

fn parse_alphabet(line_no: usize, value: &str) -> Result<Alphabet, ParseError> {
    let mut symbols = Vec::new();
    let mut chars = value.chars().peekable();
    while let Some(c) = chars.next() {
        if c.is_whitespace() {
            continue;
        }
        let sym = if c == '\'' {
            let s = chars
                .next()
                .ok_or_else(|| ParseError::new(line_no, "unterminated quoted symbol"))?;
            if chars.next() != Some('\'') {
                return Err(ParseError::new(line_no, "quoted symbol must be one character"));
            }
            s
        } else {
            if chars.peek().is_some_and(|d| !d.is_whitespace()) {
                return Err(ParseError::new(line_no, "alphabet symbols must be single characters"));
            }
            c
        };
        symbols.push(sym);
    }
    Alphabet::new(symbols).map_err(|e| ParseError::new(line_no, e.to_string()))
}

fn write_symbol(out: &mut String, c: char) {
    if c.is_whitespace() || c == '#' || c == '\'' {
        let _ = write!(out, "'{c}'");
    } else {
        out.push(c);
    }
}

fn write_alphabet(out: &mut String, alphabet: &Alphabet) {
    out.push_str("alphabet:");
    for &c in alphabet.symbols() {
        out.push(' ');
        write_symbol(out, c);
    }
    out.push('\n');
}

fn step_index(name: &str) -> Option<usize> {
    name.strip_prefix('s')?.parse().ok().filter(|&i| i > 0)
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

/// Parses the plan text format. Without an `alphabet:` line the alphabet is
/// inferred from the target and the terminals, in order of first appearance.
pub fn parse_plan(text: &str) -> Result<AssemblyPlan, ParseError> {
    let mut alphabet: Option<(usize, Alphabet)> = None;
    let mut target: Option<(usize, Word)> = None;
    let mut steps: Vec<(usize, AssemblyStep)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(value) = directive(line, "alphabet") {
            if alphabet.is_some() {
                return Err(ParseError::new(line_no, "duplicate alphabet directive"));
            }
            alphabet = Some((line_no, parse_alphabet(line_no, value)?));
            continue;
        }
        if let Some(value) = directive(line, "target") {
            if target.is_some() {
                return Err(ParseError::new(line_no, "duplicate target directive"));
            }
            let word = Word::parse(value.trim()).map_err(|e| ParseError::new(line_no, e.to_string()))?;
            target = Some((line_no, word));
            continue;
        }

        let tokens = tokenize(line_no, line)?;
        let expected = steps.len() + 1;
        let operand = |tok: &Token| -> Result<Operand, ParseError> {
            match tok {
                Token::Quoted(c) => Ok(Operand::Terminal(*c)),
                Token::Bare(name) => match step_index(name) {
                    Some(j) if j < expected => Ok(Operand::Prior(j)),
                    Some(j) => Err(ParseError::new(
                        line_no,
                        format!("s{expected} refers to s{j}, which is not an earlier step"),
                    )),
                    None => Err(ParseError::new(line_no, format!("unknown operand {name:?}"))),
                },
                _ => Err(ParseError::new(line_no, "expected an operand")),
            }
        };
        match tokens.as_slice() {
            [Token::Bare(name), Token::Equals, l, Token::Plus, r] => {
                if step_index(name) != Some(expected) {
                    return Err(ParseError::new(
                        line_no,
                        format!("expected step s{expected}, found {name:?}"),
                    ));
                }
                steps.push((line_no, AssemblyStep::new(operand(l)?, operand(r)?)));
            }
            _ => {
                return Err(ParseError::new(
                    line_no,
                    "expected `sN = <operand> + <operand>`",
                ))
            }
        }
    }

    let alphabet = match alphabet {
        Some((_, a)) => {
            for (step_line, step) in &steps {
                for op in step.operands() {
                    if let Operand::Terminal(c) = op {
                        if !a.contains(c) {
                            return Err(ParseError::new(*step_line, format!("symbol {c:?} is not in the alphabet")));
                        }
                    }
                }
            }
            if let Some((target_line, w)) = &target {
                if let Some(c) = w.symbols().iter().find(|&&c| !a.contains(c)) {
                    return Err(ParseError::new(*target_line, format!("symbol {c:?} is not in the alphabet")));
                }
            }
            a
        }
        None => {
            let mut seen = String::new();
            if let Some((_, w)) = &target {
                seen.push_str(&w.to_string());
            }
            for (_, step) in &steps {
                for op in step.operands() {
                    if let Operand::Terminal(c) = op {
                        seen.push(c);
                    }
                }
            }
            Alphabet::infer(&seen).map_err(|_| ParseError::new(1, "cannot infer an alphabet from an empty plan"))?
        }
    };

    let mut plan = AssemblyPlan::new(alphabet, steps.into_iter().map(|(_, s)| s).collect());
    plan.declared_target = target.map(|(_, w)| w);
    Ok(plan)
}

/// Writes the plan text format. The output parses back to an equal plan.
pub fn format_plan(plan: &AssemblyPlan) -> String {
    let mut out = String::new();
    write_alphabet(&mut out, &plan.alphabet);
    if let Some(target) = &plan.declared_target {
        let _ = writeln!(out, "target: {target}");
    }
    let operand = |op: Operand| match op {
        Operand::Terminal(c) => format!("'{c}'"),
        Operand::Prior(j) => format!("s{j}"),
    };
    for (i, step) in plan.steps.iter().enumerate() {
        let _ = writeln!(out, "s{} = {} + {}", i + 1, operand(step.left), operand(step.right));
    }
    out
}

/// Parses the grammar text format. A `start:` line is required.
pub fn parse_grammar(text: &str) -> Result<Slp, ParseError> {
    let mut alphabet: Option<Alphabet> = None;
    let mut start: Option<String> = None;
    let mut rules: Vec<SlpRule> = Vec::new();
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(value) = directive(line, "alphabet") {
            if alphabet.is_some() {
                return Err(ParseError::new(line_no, "duplicate alphabet directive"));
            }
            alphabet = Some(parse_alphabet(line_no, value)?);
            continue;
        }
        if let Some(value) = directive(line, "start") {
            let name = value.trim();
            if !is_identifier(name) {
                return Err(ParseError::new(line_no, format!("invalid start symbol {name:?}")));
            }
            if start.replace(name.to_string()).is_some() {
                return Err(ParseError::new(line_no, "duplicate start directive"));
            }
            continue;
        }

        let tokens = tokenize(line_no, line)?;
        let symbol = |tok: &Token| -> Result<SlpSymbol, ParseError> {
            match tok {
                Token::Quoted(c) => Ok(SlpSymbol::Terminal(*c)),
                Token::Bare(name) if is_identifier(name) => Ok(SlpSymbol::Nonterminal(name.clone())),
                Token::Bare(name) => Err(ParseError::new(line_no, format!("invalid nonterminal {name:?}"))),
                _ => Err(ParseError::new(line_no, "expected a symbol")),
            }
        };
        let rule = match tokens.as_slice() {
            [Token::Bare(lhs), Token::Arrow, Token::Quoted(c)] => SlpRule::alias(lhs.clone(), *c),
            [Token::Bare(lhs), Token::Arrow, l, r] => SlpRule::pair(lhs.clone(), symbol(l)?, symbol(r)?),
            _ => {
                return Err(ParseError::new(
                    line_no,
                    "expected `NAME -> <symbol> <symbol>` or `NAME -> '<terminal>'`",
                ))
            }
        };
        if !is_identifier(&rule.lhs) {
            return Err(ParseError::new(line_no, format!("invalid nonterminal {:?}", rule.lhs)));
        }
        if rules.iter().any(|r| r.lhs == rule.lhs) {
            return Err(ParseError::new(line_no, format!("nonterminal {} has more than one rule", rule.lhs)));
        }
        if let Some(a) = &alphabet {
            let bad = match &rule.rhs {
                RuleRhs::Terminal(c) => (!a.contains(*c)).then_some(*c),
                RuleRhs::Pair(l, r) => [l, r].into_iter().find_map(|s| match s {
                    SlpSymbol::Terminal(c) if !a.contains(*c) => Some(*c),
                    _ => None,
                }),
            };
            if let Some(c) = bad {
                return Err(ParseError::new(line_no, format!("symbol {c:?} is not in the alphabet")));
            }
        }
        rules.push(rule);
    }

    let start = start.ok_or_else(|| ParseError::new(last_line.max(1), "missing `start:` directive"))?;
    let alphabet = match alphabet {
        Some(a) => a,
        None => {
            let mut seen = String::new();
            for rule in &rules {
                match &rule.rhs {
                    RuleRhs::Terminal(c) => seen.push(*c),
                    RuleRhs::Pair(l, r) => {
                        for s in [l, r] {
                            if let SlpSymbol::Terminal(c) = s {
                                seen.push(*c);
                            }
                        }
                    }
                }
            }
            Alphabet::infer(&seen).map_err(|_| ParseError::new(1, "cannot infer an alphabet from a grammar without terminals"))?
        }
    };
    Slp::new(alphabet, rules, start).map_err(|e: ModelError| ParseError::new(last_line.max(1), e.to_string()))
}

/// Writes the grammar text format, rules in their listed order.
pub fn format_grammar(slp: &Slp) -> String {
    let mut out = String::new();
    write_alphabet(&mut out, slp.alphabet());
    let _ = writeln!(out, "start: {}", slp.start());
    let symbol = |s: &SlpSymbol| match s {
        SlpSymbol::Terminal(c) => format!("'{c}'"),
        SlpSymbol::Nonterminal(n) => n.clone(),
    };
    for rule in slp.rules() {
        match &rule.rhs {
            RuleRhs::Terminal(c) => {
                let _ = writeln!(out, "{} -> '{c}'", rule.lhs);
            }
            RuleRhs::Pair(l, r) => {
                let _ = writeln!(out, "{} -> {} {}", rule.lhs, symbol(l), symbol(r));
            }
        }
    }
    out
}
