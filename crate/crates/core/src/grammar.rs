//! Geffert normal form grammars: validation, splitting of the linear rules
//! into left-/right-linear rules, and bounded enumeration of their languages
//! (the oracle the compiled systems are checked against).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::engine::{collect_language, BoundedLanguage, CompiledRewriting, EnumerateError, EnumerationBounds};
use crate::model::{is_valid_symbol_name, Violation, Word};

pub const START: &str = "S";
pub const FINAL: &str = "S'";
/// `N'' = {A, B, C, D}`.
pub const CORE: [&str; 4] = ["A", "B", "C", "D"];
/// The two erasing rules `AB -> λ` and `CD -> λ`.
pub const ERASERS: [(&str, &str); 2] = [("A", "B"), ("C", "D")];

const RESERVED_LABELS: [&str; 3] = ["AB", "CD", "S'"];

/// A context-free production `lhs -> rhs` with a label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Production {
    pub label: String,
    pub lhs: String,
    pub rhs: Word,
}

impl Production {
    pub fn new(label: impl Into<String>, lhs: impl Into<String>, rhs: impl Into<Word>) -> Self {
        Production {
            label: label.into(),
            lhs: lhs.into(),
            rhs: rhs.into(),
        }
    }
}

impl fmt::Display for Production {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

/// Which side of the successor nonterminal the emitted symbol lands on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// `X -> bY`
    Left,
    /// `X -> Yb`
    Right,
}

/// A production of special Geffert normal form, `X -> bY` or `X -> Yb`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearRule {
    pub label: String,
    pub lhs: String,
    pub emit: String,
    pub next: String,
    pub side: Side,
}

impl LinearRule {
    /// The right-hand side as written, `(x, y)` with `lhs -> x y`.
    pub fn rhs_pair(&self) -> (&str, &str) {
        match self.side {
            Side::Left => (&self.emit, &self.next),
            Side::Right => (&self.next, &self.emit),
        }
    }

    pub fn is_self_loop(&self) -> bool {
        self.lhs == self.next
    }
}

/// A grammar in special Geffert normal form.
///
/// `nonterminals` is `N'` (it must contain `S` and `S'`); `N'' = {A,B,C,D}`
/// is implicit, as are the erasing rules `AB -> λ` and `CD -> λ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecialGeffertGrammar {
    pub nonterminals: Vec<String>,
    pub terminals: Vec<String>,
    pub rules: Vec<Production>,
    /// Whether `S' -> λ` is present.
    pub final_erase: bool,
}

/// A grammar in Geffert normal form: `N = {S, A, B, C, D}`, rules
/// `S -> uSv` with `u ∈ {A,C}*`, `v ∈ {B,D}*`, rules `S -> x` with
/// `x ∈ (T ∪ {A,B,C,D})*`, plus the two erasing rules.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeffertGrammar {
    pub terminals: Vec<String>,
    pub rules: Vec<Production>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Grammar {
    Special(SpecialGeffertGrammar),
    Geffert(GeffertGrammar),
}

fn is_core(name: &str) -> bool {
    CORE.contains(&name)
}

fn check_grammar_symbol(name: &str, location: &str, out: &mut Vec<Violation>) {
    if !is_valid_symbol_name(name) {
        out.push(Violation::new(
            location,
            format!("invalid grammar symbol name `{name}`"),
        ));
    }
}

fn check_labels(rules: &[Production], out: &mut Vec<Violation>) {
    let mut seen = BTreeSet::new();
    for r in rules {
        let location = format!("rule {}", r.label);
        if !is_valid_symbol_name(&r.label) {
            out.push(Violation::new(&location, "invalid rule label"));
        }
        if RESERVED_LABELS.contains(&r.label.as_str()) {
            out.push(Violation::new(&location, "label is reserved"));
        }
        if !seen.insert(r.label.as_str()) {
            out.push(Violation::new(&location, "duplicate rule label"));
        }
    }
}

impl SpecialGeffertGrammar {
    pub fn is_nonterminal(&self, name: &str) -> bool {
        self.nonterminals.iter().any(|n| n == name)
    }

    pub fn is_terminal(&self, name: &str) -> bool {
        self.terminals.iter().any(|n| n == name)
    }

    /// Classifies a production as `X -> bY` or `X -> Yb`.
    pub fn shape(&self, rule: &Production) -> Option<LinearRule> {
        if !self.is_nonterminal(&rule.lhs) || rule.rhs.len() != 2 {
            return None;
        }
        let (x, y) = (&rule.rhs.0[0], &rule.rhs.0[1]);
        let emittable = |s: &str| self.is_terminal(s) || is_core(s);
        let (emit, next, side) = if emittable(x) && self.is_nonterminal(y) {
            (x, y, Side::Left)
        } else if self.is_nonterminal(x) && emittable(y) {
            (y, x, Side::Right)
        } else {
            return None;
        };
        Some(LinearRule {
            label: rule.label.clone(),
            lhs: rule.lhs.clone(),
            emit: emit.clone(),
            next: next.clone(),
            side,
        })
    }

    /// The linear rules, or the validation violations.
    pub fn linear_rules(&self) -> Result<Vec<LinearRule>, Vec<Violation>> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(violations);
        }
        Ok(self.rules.iter().map(|r| self.shape(r).expect("validated")).collect())
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for n in &self.nonterminals {
            check_grammar_symbol(n, "nonterminals", &mut out);
            if is_core(n) {
                out.push(Violation::new("nonterminals", format!("`{n}` belongs to {{A,B,C,D}}")));
            }
            if self.is_terminal(n) {
                out.push(Violation::new("nonterminals", format!("`{n}` is also a terminal")));
            }
        }
        for t in &self.terminals {
            check_grammar_symbol(t, "terminals", &mut out);
            if is_core(t) {
                out.push(Violation::new("terminals", format!("`{t}` belongs to {{A,B,C,D}}")));
            }
        }
        for required in [START, FINAL] {
            if !self.is_nonterminal(required) {
                out.push(Violation::new("nonterminals", format!("`{required}` is missing")));
            }
        }
        check_labels(&self.rules, &mut out);

        let mut by_rhs: BTreeMap<&Word, Vec<&Production>> = BTreeMap::new();
        for r in &self.rules {
            match self.shape(r) {
                None => out.push(Violation::new(
                    format!("rule {}", r.label),
                    format!("`{r}` is not of the form X -> bY or X -> Yb"),
                )),
                Some(_) => by_rhs.entry(&r.rhs).or_default().push(r),
            }
        }
        for (rhs, rules) in by_rhs {
            let lhs: BTreeSet<&str> = rules.iter().map(|r| r.lhs.as_str()).collect();
            if lhs.len() < 2 {
                continue;
            }
            let shape = self.shape(rules[0]).expect("classified");
            let exempt = shape.side == Side::Right && (shape.next == START || shape.next == FINAL);
            if !exempt {
                let labels: Vec<&str> = rules.iter().map(|r| r.label.as_str()).collect();
                out.push(Violation::new(
                    format!("rule {}", labels.join(",")),
                    format!("right-hand side `{rhs}` is shared by different nonterminals"),
                ));
            }
        }
        out
    }

    pub(crate) fn rewriting(&self) -> CompiledRewriting {
        let mut symbols: Vec<String> = self.nonterminals.clone();
        symbols.extend(CORE.iter().map(|s| s.to_string()));
        symbols.extend(self.terminals.iter().cloned());
        let mut rules: Vec<(String, Word, Word)> = self
            .rules
            .iter()
            .map(|r| (r.label.clone(), Word::from_symbols([r.lhs.as_str()]), r.rhs.clone()))
            .collect();
        if self.final_erase {
            rules.push((FINAL.to_owned(), Word::from_symbols([FINAL]), Word::empty()));
        }
        push_erasers(&mut rules);
        let terminals = self.terminals.iter().cloned().collect();
        CompiledRewriting::new(&symbols, &terminals, &Word::from_symbols([START]), &rules)
    }
}

fn push_erasers(rules: &mut Vec<(String, Word, Word)>) {
    for (a, b) in ERASERS {
        rules.push((format!("{a}{b}"), Word::from_symbols([a, b]), Word::empty()));
    }
}

/// Shape of a Geffert normal form production.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeffertShape {
    /// `S -> uSv`
    Loop { left: Word, right: Word },
    /// `S -> x`
    Final { body: Word },
}

impl GeffertGrammar {
    pub fn shape(&self, rule: &Production) -> Option<GeffertShape> {
        if rule.lhs != START {
            return None;
        }
        let starts: Vec<usize> = rule
            .rhs
            .0
            .iter()
            .enumerate()
            .filter(|(_, s)| *s == START)
            .map(|(i, _)| i)
            .collect();
        match starts.as_slice() {
            [] => rule
                .rhs
                .symbols()
                .all(|s| is_core(s) || self.terminals.iter().any(|t| t == s))
                .then(|| GeffertShape::Final { body: rule.rhs.clone() }),
            [i] => {
                let left = Word(rule.rhs.0[..*i].to_vec());
                let right = Word(rule.rhs.0[i + 1..].to_vec());
                let ok = left.symbols().all(|s| s == "A" || s == "C") && right.symbols().all(|s| s == "B" || s == "D");
                ok.then_some(GeffertShape::Loop { left, right })
            }
            _ => None,
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for t in &self.terminals {
            check_grammar_symbol(t, "terminals", &mut out);
            if is_core(t) || t == START {
                out.push(Violation::new("terminals", format!("`{t}` is a nonterminal")));
            }
        }
        check_labels(&self.rules, &mut out);
        for r in &self.rules {
            if self.shape(r).is_none() {
                out.push(Violation::new(
                    format!("rule {}", r.label),
                    format!("`{r}` is not of the form S -> uSv or S -> x"),
                ));
            }
        }
        out
    }

    pub(crate) fn rewriting(&self) -> CompiledRewriting {
        let mut symbols: Vec<String> = vec![START.to_owned()];
        symbols.extend(CORE.iter().map(|s| s.to_string()));
        symbols.extend(self.terminals.iter().cloned());
        let mut rules: Vec<(String, Word, Word)> = self
            .rules
            .iter()
            .map(|r| (r.label.clone(), Word::from_symbols([START]), r.rhs.clone()))
            .collect();
        push_erasers(&mut rules);
        let terminals = self.terminals.iter().cloned().collect();
        CompiledRewriting::new(&symbols, &terminals, &Word::from_symbols([START]), &rules)
    }
}

impl Grammar {
    pub fn terminals(&self) -> &[String] {
        match self {
            Grammar::Special(g) => &g.terminals,
            Grammar::Geffert(g) => &g.terminals,
        }
    }

    /// The grammar in special form, splitting Geffert rules if necessary.
    pub fn to_special(&self) -> SpecialGeffertGrammar {
        match self {
            Grammar::Special(g) => g.clone(),
            Grammar::Geffert(g) => split_linear(g),
        }
    }

    pub(crate) fn rewriting(&self) -> CompiledRewriting {
        match self {
            Grammar::Special(g) => g.rewriting(),
            Grammar::Geffert(g) => g.rewriting(),
        }
    }
}

impl From<SpecialGeffertGrammar> for Grammar {
    fn from(g: SpecialGeffertGrammar) -> Self {
        Grammar::Special(g)
    }
}

impl From<GeffertGrammar> for Grammar {
    fn from(g: GeffertGrammar) -> Self {
        Grammar::Geffert(g)
    }
}

/// Shape violations of either grammar kind; empty iff valid.
pub fn validate_gnf(g: &Grammar) -> Vec<Violation> {
    match g {
        Grammar::Special(g) => g.validate(),
        Grammar::Geffert(g) => g.validate(),
    }
}

/// Rewrites every Geffert production as a chain of left-/right-linear rules
/// over fresh nonterminals `X@<rule>.<position>` (rules numbered from 1).
///
/// `S -> u1..ua S v1..vb` emits `u` left to right with `X -> bY` rules and
/// then `v` right to left with `X -> Yb` rules, returning to `S`.
/// `S -> x1..xc` emits `x1..x(c-1)` the same way and ends with
/// `X -> S' xc`, so chains of different rules never share a right-hand side
/// outside the `X -> S'b` exemption. `S -> S` is dropped. `S -> λ` becomes
/// `S -> A X`, `X -> S' B`, whose only way to vanish is the erasing rule
/// `AB -> λ`.
///
/// Two loops with empty `v` whose `u` end in the same symbol both need a
/// rule `X -> uS`; no linear chain avoids that, and the result then fails
/// the uniqueness check of [`SpecialGeffertGrammar::validate`].
///
/// The input must validate.
pub fn split_linear(g: &GeffertGrammar) -> SpecialGeffertGrammar {
    let mut nonterminals = vec![START.to_owned(), FINAL.to_owned()];
    let mut rules = Vec::new();
    let mut final_erase = false;

    for (index, rule) in g.rules.iter().enumerate() {
        let index = index + 1;
        let fresh = |pos: usize| format!("X@{index}.{pos}");
        let (emissions, end): (Vec<(Side, String)>, &str) = match g.shape(rule).expect("validated grammar") {
            GeffertShape::Loop { left, right } => {
                let mut e: Vec<(Side, String)> = left.0.into_iter().map(|s| (Side::Left, s)).collect();
                e.extend(right.0.into_iter().rev().map(|s| (Side::Right, s)));
                (e, START)
            }
            GeffertShape::Final { body } if body.is_empty() => {
                (vec![(Side::Left, "A".to_owned()), (Side::Right, "B".to_owned())], FINAL)
            }
            GeffertShape::Final { body } => {
                let last = body.len() - 1;
                let sides = (0..body.len()).map(|i| if i == last { Side::Right } else { Side::Left });
                (sides.zip(body.0).collect(), FINAL)
            }
        };
        if end == FINAL {
            final_erase = true;
        }
        let mut current = START.to_owned();
        let n = emissions.len();
        for (pos, (side, emit)) in emissions.into_iter().enumerate() {
            let pos = pos + 1;
            let next = if pos == n { end.to_owned() } else { fresh(pos) };
            if pos < n {
                nonterminals.push(next.clone());
            }
            let rhs = match side {
                Side::Left => Word::from_symbols([emit, next.clone()]),
                Side::Right => Word::from_symbols([next.clone(), emit]),
            };
            rules.push(Production::new(format!("{}.{pos}", rule.label), current, rhs));
            current = next;
        }
    }

    SpecialGeffertGrammar {
        nonterminals,
        terminals: g.terminals.clone(),
        rules,
        final_erase,
    }
}

/// Bounded language of a grammar, computed with the same search and bounds
/// contract as [`crate::engine::enumerate`].
pub fn enumerate_grammar(g: &Grammar, bounds: &EnumerationBounds) -> Result<BoundedLanguage, EnumerateError> {
    let violations = validate_gnf(g);
    if !violations.is_empty() {
        return Err(EnumerateError::Invalid(violations));
    }
    collect_language(&g.rewriting(), bounds)
}
