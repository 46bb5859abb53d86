//! Line-oriented text formats for grammars and matrix systems.
//!
//! Both formats use whitespace separated symbol tokens, `.` for the empty
//! string and full-line `#` comments.
//!
//! ```text
//! grammar special-gnf
//! terminals: a b
//! nonterminals: S S' S1
//! r1: S -> a S1
//! S1 -> S' b
//! S' -> .
//! ```
//!
//! ```text
//! matrix-insdel
//! alphabet: S A a
//! terminals: a
//! axioms: S, a a
//! matrix r.1: ins(. | a | S) del(. | S | .)
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::grammar::{GeffertGrammar, Grammar, Production, SpecialGeffertGrammar, ERASERS, FINAL};
use crate::model::{InsDelRule, Matrix, MatrixSystem, RuleOp, Word};

pub const GRAMMAR_SPECIAL_HEADER: &str = "grammar special-gnf";
pub const GRAMMAR_GNF_HEADER: &str = "grammar gnf";
pub const SYSTEM_HEADER: &str = "matrix-insdel";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

/// Non-blank, non-comment lines with their 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('#')
    })
}

/// 1-based column of `part` inside `line`; `part` must be a subslice.
fn column(line: &str, part: &str) -> usize {
    part.as_ptr() as usize - line.as_ptr() as usize + 1
}

fn expect_header<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    accepted: &[&'static str],
) -> Result<(usize, &'static str), ParseError> {
    match lines.next() {
        Some((n, l)) => {
            let header = l.split_whitespace().collect::<Vec<_>>().join(" ");
            accepted
                .iter()
                .find(|h| **h == header)
                .map(|h| (n, *h))
                .ok_or_else(|| ParseError::new(n, 1, format!("expected header {}", quoted(accepted))))
        }
        None => Err(ParseError::new(
            1,
            1,
            format!("empty input, expected header {}", quoted(accepted)),
        )),
    }
}

fn quoted(items: &[&str]) -> String {
    items.iter().map(|h| format!("`{h}`")).collect::<Vec<_>>().join(" or ")
}

/// `key: rest` with `key` one of `keys`.
fn section<'a>(line: &'a str, keys: &[&'static str]) -> Option<(&'static str, &'a str)> {
    let (key, rest) = line.split_once(':')?;
    let key = key.trim();
    keys.iter().find(|k| **k == key).map(|k| (*k, rest))
}

fn tokens(rest: &str) -> Vec<String> {
    rest.split_whitespace().map(str::to_owned).collect()
}

pub fn parse_grammar(text: &str) -> Result<Grammar, ParseError> {
    let mut lines = content_lines(text);
    let (_, header) = expect_header(&mut lines, &[GRAMMAR_SPECIAL_HEADER, GRAMMAR_GNF_HEADER])?;
    let special = header == GRAMMAR_SPECIAL_HEADER;
    let default_prefix = if special { "r" } else { "g" };

    let mut terminals = None;
    let mut nonterminals = None;
    let mut rules = Vec::new();
    let mut final_erase = false;

    for (n, line) in lines {
        let Some((lhs_part, rhs)) = line.split_once("->") else {
            match section(line, &["terminals", "nonterminals"]) {
                Some(("terminals", rest)) if terminals.is_none() => terminals = Some(tokens(rest)),
                Some(("nonterminals", rest)) if special && nonterminals.is_none() => nonterminals = Some(tokens(rest)),
                Some((key, _)) => {
                    return Err(ParseError::new(
                        n,
                        column(line, line.trim_start()),
                        format!("unexpected `{key}:` section"),
                    ))
                }
                None => {
                    return Err(ParseError::new(
                        n,
                        column(line, line.trim_start()),
                        "expected a section or a rule",
                    ))
                }
            }
            continue;
        };
        let (label, lhs_part) = match lhs_part.split_once(':') {
            Some((label, lhs)) => (Some(label.trim()), lhs),
            None => (None, lhs_part),
        };
        let lhs = Word::parse(lhs_part);
        let rhs_word = Word::parse(rhs);
        let at = column(line, lhs_part.trim_start());
        if label.is_some_and(str::is_empty) {
            return Err(ParseError::new(n, 1, "empty rule label"));
        }

        if rhs_word.is_empty() && label.is_none() {
            match lhs.0.as_slice() {
                [x] if x == FINAL && special => {
                    final_erase = true;
                    continue;
                }
                [a, b] if ERASERS.iter().any(|(l, r)| a == l && b == r) => continue,
                _ => {}
            }
        }
        let [lhs] = <[String; 1]>::try_from(lhs.0).map_err(|_| {
            ParseError::new(
                n,
                at,
                "left-hand side must be a single nonterminal (or `S' -> .`, `A B -> .`, `C D -> .`)",
            )
        })?;
        let label = label.map_or_else(|| format!("{default_prefix}{}", rules.len() + 1), str::to_owned);
        rules.push(Production::new(label, lhs, rhs_word));
    }

    let terminals = terminals.ok_or_else(|| ParseError::new(1, 1, "missing `terminals:` section"))?;
    Ok(if special {
        Grammar::Special(SpecialGeffertGrammar {
            nonterminals: nonterminals.ok_or_else(|| ParseError::new(1, 1, "missing `nonterminals:` section"))?,
            terminals,
            rules,
            final_erase,
        })
    } else {
        Grammar::Geffert(GeffertGrammar { terminals, rules })
    })
}

pub fn print_grammar(g: &Grammar) -> String {
    let mut out = String::new();
    let rules = match g {
        Grammar::Special(g) => {
            writeln!(out, "{GRAMMAR_SPECIAL_HEADER}").unwrap();
            writeln!(out, "terminals: {}", g.terminals.join(" ")).unwrap();
            writeln!(out, "nonterminals: {}", g.nonterminals.join(" ")).unwrap();
            &g.rules
        }
        Grammar::Geffert(g) => {
            writeln!(out, "{GRAMMAR_GNF_HEADER}").unwrap();
            writeln!(out, "terminals: {}", g.terminals.join(" ")).unwrap();
            &g.rules
        }
    };
    for r in rules {
        writeln!(out, "{}: {} -> {}", r.label, r.lhs, r.rhs).unwrap();
    }
    if let Grammar::Special(g) = g {
        if g.final_erase {
            writeln!(out, "{FINAL} -> .").unwrap();
        }
    }
    for (a, b) in ERASERS {
        writeln!(out, "{a} {b} -> .").unwrap();
    }
    out
}

pub fn parse_system(text: &str) -> Result<MatrixSystem, ParseError> {
    let mut lines = content_lines(text);
    expect_header(&mut lines, &[SYSTEM_HEADER])?;

    let mut alphabet = None;
    let mut terminals: Option<BTreeSet<String>> = None;
    let mut axioms = None;
    let mut matrices = Vec::new();

    for (n, line) in lines {
        let start = column(line, line.trim_start());
        if let Some(rest) = line.trim_start().strip_prefix("matrix ") {
            let (label, body) = rest
                .split_once(':')
                .ok_or_else(|| ParseError::new(n, start, "expected `matrix LABEL: rules`"))?;
            let label = label.trim();
            if label.is_empty() {
                return Err(ParseError::new(n, start, "empty matrix label"));
            }
            matrices.push(Matrix::new(label, parse_rules(line, body, n)?));
            continue;
        }
        match section(line, &["alphabet", "terminals", "axioms"]) {
            Some(("alphabet", rest)) if alphabet.is_none() => alphabet = Some(tokens(rest)),
            Some(("terminals", rest)) if terminals.is_none() => terminals = Some(tokens(rest).into_iter().collect()),
            Some(("axioms", rest)) if axioms.is_none() => axioms = Some(rest.split(',').map(Word::parse).collect()),
            Some((key, _)) => return Err(ParseError::new(n, start, format!("unexpected `{key}:` section"))),
            None => return Err(ParseError::new(n, start, "expected a section or a matrix")),
        }
    }

    Ok(MatrixSystem {
        alphabet: alphabet.ok_or_else(|| ParseError::new(1, 1, "missing `alphabet:` section"))?,
        terminals: terminals.ok_or_else(|| ParseError::new(1, 1, "missing `terminals:` section"))?,
        axioms: axioms.ok_or_else(|| ParseError::new(1, 1, "missing `axioms:` section"))?,
        matrices,
    })
}

fn parse_rules(line: &str, body: &str, n: usize) -> Result<Vec<InsDelRule>, ParseError> {
    let mut rules = Vec::new();
    let mut rest = body.trim_start();
    while !rest.is_empty() {
        let at = column(line, rest);
        let (op, after) = if let Some(r) = rest.strip_prefix("ins") {
            (RuleOp::Insertion, r)
        } else if let Some(r) = rest.strip_prefix("del") {
            (RuleOp::Deletion, r)
        } else {
            return Err(ParseError::new(n, at, "expected `ins(` or `del(`"));
        };
        let after = after
            .trim_start()
            .strip_prefix('(')
            .ok_or_else(|| ParseError::new(n, at, "expected `(` after rule keyword"))?;
        let close = after.find(')').ok_or_else(|| ParseError::new(n, at, "unclosed rule"))?;
        let fields: Vec<&str> = after[..close].split('|').collect();
        let [left, body, right] = fields[..] else {
            return Err(ParseError::new(
                n,
                at,
                format!("expected 3 fields separated by `|`, found {}", fields.len()),
            ));
        };
        rules.push(InsDelRule::new(
            op,
            Word::parse(left),
            Word::parse(body),
            Word::parse(right),
        ));
        rest = after[close + 1..].trim_start();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim_start();
        }
    }
    if rules.is_empty() {
        return Err(ParseError::new(n, column(line, body), "matrix has no rules"));
    }
    Ok(rules)
}

/// Deterministic rendering; [`parse_system`] inverts it exactly.
pub fn print_system(sys: &MatrixSystem) -> String {
    let mut out = String::new();
    writeln!(out, "{SYSTEM_HEADER}").unwrap();
    writeln!(out, "alphabet: {}", sys.alphabet.join(" ")).unwrap();
    writeln!(
        out,
        "terminals: {}",
        sys.terminals.iter().cloned().collect::<Vec<_>>().join(" ")
    )
    .unwrap();
    writeln!(
        out,
        "axioms: {}",
        sys.axioms.iter().map(Word::to_string).collect::<Vec<_>>().join(", ")
    )
    .unwrap();
    for m in &sys.matrices {
        write!(out, "matrix {}:", m.label).unwrap();
        for r in &m.rules {
            write!(out, " {r}").unwrap();
        }
        out.push('\n');
    }
    out
}
