//! Value types for symbols, words, insertion/deletion rules, matrices and
//! matrix insertion-deletion systems.
//!
//! Strings are sequences of symbol names rather than characters, so fresh
//! symbols such as `K@AB` or `#3@r2` are ordinary single symbols.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Tokens that may not be used as (part of) a symbol name because the text
/// formats reserve them.
const RESERVED_CHARS: &[char] = &['|', '(', ')', ',', ':'];

/// Returns `true` if `name` can be written as a single token in the text
/// formats.
pub fn is_valid_symbol_name(name: &str) -> bool {
    !name.is_empty()
        && name != "."
        && name != "->"
        && !name.chars().any(|c| c.is_whitespace() || RESERVED_CHARS.contains(&c))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolKind {
    Terminal,
    Nonterminal,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub kind: SymbolKind,
}

/// A string over an alphabet, stored as a sequence of symbol names.
///
/// Displays as space separated tokens; the empty word displays as `.`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(pub Vec<String>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Parses whitespace separated tokens; a lone `.` (or nothing) is the
    /// empty word.
    pub fn parse(text: &str) -> Self {
        Word(
            text.split_whitespace()
                .filter(|t| *t != ".")
                .map(str::to_owned)
                .collect(),
        )
    }

    pub fn from_symbols<I, S>(symbols: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Word(symbols.into_iter().map(Into::into).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn count(&self, name: &str) -> usize {
        self.0.iter().filter(|s| *s == name).count()
    }

    pub fn reversed(&self) -> Self {
        Word(self.0.iter().rev().cloned().collect())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            f.write_str(".")
        } else {
            f.write_str(&self.0.join(" "))
        }
    }
}

impl From<&str> for Word {
    fn from(text: &str) -> Self {
        Word::parse(text)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Ok(Word::parse(&text))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleOp {
    Insertion,
    Deletion,
}

impl RuleOp {
    pub fn keyword(self) -> &'static str {
        match self {
            RuleOp::Insertion => "ins",
            RuleOp::Deletion => "del",
        }
    }
}

/// An insertion or deletion rule `(left, body, right)`.
///
/// An insertion rewrites `left right` into `left body right`; a deletion
/// rewrites `left body right` into `left right`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InsDelRule {
    pub op: RuleOp,
    pub left: Word,
    pub body: Word,
    pub right: Word,
}

impl InsDelRule {
    pub fn new(op: RuleOp, left: impl Into<Word>, body: impl Into<Word>, right: impl Into<Word>) -> Self {
        InsDelRule {
            op,
            left: left.into(),
            body: body.into(),
            right: right.into(),
        }
    }

    /// `ins(left | body | right)`.
    pub fn ins(left: &str, body: &str, right: &str) -> Self {
        Self::new(RuleOp::Insertion, left, body, right)
    }

    /// `del(left | body | right)`.
    pub fn del(left: &str, body: &str, right: &str) -> Self {
        Self::new(RuleOp::Deletion, left, body, right)
    }

    /// Rules with an empty body act as the identity relation.
    pub fn is_padding(&self) -> bool {
        self.body.is_empty()
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.left
            .symbols()
            .chain(self.body.symbols())
            .chain(self.right.symbols())
    }

    /// The mirror image of the rule: every part reversed and the contexts
    /// swapped.
    pub fn mirrored(&self) -> Self {
        InsDelRule {
            op: self.op,
            left: self.right.reversed(),
            body: self.body.reversed(),
            right: self.left.reversed(),
        }
    }
}

impl fmt::Display for InsDelRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}({} | {} | {})",
            self.op.keyword(),
            self.left,
            self.body,
            self.right
        )
    }
}

/// The size vector `(n, m, m'; p, q, q')` of a set of rules: maximal body,
/// left-context and right-context lengths of the insertion rules and of the
/// deletion rules.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SizeVector {
    pub ins_body: usize,
    pub ins_left: usize,
    pub ins_right: usize,
    pub del_body: usize,
    pub del_left: usize,
    pub del_right: usize,
}

impl SizeVector {
    pub const fn new(
        ins_body: usize,
        ins_left: usize,
        ins_right: usize,
        del_body: usize,
        del_left: usize,
        del_right: usize,
    ) -> Self {
        SizeVector {
            ins_body,
            ins_left,
            ins_right,
            del_body,
            del_left,
            del_right,
        }
    }

    pub fn components(&self) -> [usize; 6] {
        [
            self.ins_body,
            self.ins_left,
            self.ins_right,
            self.del_body,
            self.del_left,
            self.del_right,
        ]
    }

    /// Componentwise `<=`.
    pub fn within(&self, bound: &SizeVector) -> bool {
        self.components()
            .iter()
            .zip(bound.components().iter())
            .all(|(a, b)| a <= b)
    }

    pub fn include(&mut self, rule: &InsDelRule) {
        let (body, left, right) = match rule.op {
            RuleOp::Insertion => (&mut self.ins_body, &mut self.ins_left, &mut self.ins_right),
            RuleOp::Deletion => (&mut self.del_body, &mut self.del_left, &mut self.del_right),
        };
        *body = (*body).max(rule.body.len());
        *left = (*left).max(rule.left.len());
        *right = (*right).max(rule.right.len());
    }
}

impl fmt::Display for SizeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{};{},{},{})",
            self.ins_body, self.ins_left, self.ins_right, self.del_body, self.del_left, self.del_right
        )
    }
}

/// An ordered sequence of rules applied atomically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matrix {
    pub label: String,
    pub rules: Vec<InsDelRule>,
}

impl Matrix {
    pub fn new(label: impl Into<String>, rules: Vec<InsDelRule>) -> Self {
        Matrix {
            label: label.into(),
            rules,
        }
    }

    /// Number of rules, counted after padding removal.
    pub fn width(&self) -> usize {
        self.rules.iter().filter(|r| !r.is_padding()).count()
    }

    /// Drops rules with an empty body.
    pub fn normalized(&self) -> Matrix {
        Matrix {
            label: self.label.clone(),
            rules: self.rules.iter().filter(|r| !r.is_padding()).cloned().collect(),
        }
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: [", self.label)?;
        for (i, rule) in self.rules.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{rule}")?;
        }
        f.write_str("]")
    }
}

/// A matrix insertion-deletion system `(V, T, A, M)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixSystem {
    /// `V`, in declaration order.
    pub alphabet: Vec<String>,
    /// `T`, a subset of `alphabet`.
    pub terminals: BTreeSet<String>,
    pub axioms: Vec<Word>,
    pub matrices: Vec<Matrix>,
}

impl MatrixSystem {
    pub fn symbols(&self) -> Vec<Symbol> {
        self.alphabet
            .iter()
            .map(|name| Symbol {
                name: name.clone(),
                kind: self.kind_of(name),
            })
            .collect()
    }

    pub fn kind_of(&self, name: &str) -> SymbolKind {
        if self.terminals.contains(name) {
            SymbolKind::Terminal
        } else {
            SymbolKind::Nonterminal
        }
    }

    pub fn is_terminal_word(&self, word: &Word) -> bool {
        word.symbols().all(|s| self.terminals.contains(s))
    }

    pub fn matrix(&self, label: &str) -> Option<&Matrix> {
        self.matrices.iter().find(|m| m.label == label)
    }

    pub fn matrix_mut(&mut self, label: &str) -> Option<&mut Matrix> {
        self.matrices.iter_mut().find(|m| m.label == label)
    }

    /// Removes padding rules from every matrix.
    pub fn normalized(&self) -> MatrixSystem {
        MatrixSystem {
            matrices: self.matrices.iter().map(Matrix::normalized).collect(),
            ..self.clone()
        }
    }

    /// Largest matrix width (after normalization); zero without matrices.
    pub fn max_width(&self) -> usize {
        self.matrices.iter().map(Matrix::width).max().unwrap_or(0)
    }
}

/// Componentwise maxima over all (non-padding) insertion and deletion rules.
pub fn size_of(system: &MatrixSystem) -> SizeVector {
    let mut size = SizeVector::default();
    for rule in system.matrices.iter().flat_map(|m| m.rules.iter()) {
        if !rule.is_padding() {
            size.include(rule);
        }
    }
    size
}

/// A structural problem found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    /// Where the problem was found, e.g. `matrix r1.2 rule 1` or `axiom 0`.
    pub location: String,
    pub message: String,
}

impl Violation {
    pub fn new(location: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            location: location.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// Checks the structural invariants of a system. An empty result means the
/// system is well formed.
pub fn validate(system: &MatrixSystem) -> Vec<Violation> {
    let mut violations = Vec::new();

    let mut seen = BTreeSet::new();
    for name in &system.alphabet {
        if !is_valid_symbol_name(name) {
            violations.push(Violation::new("alphabet", format!("invalid symbol name `{name}`")));
        }
        if !seen.insert(name.as_str()) {
            violations.push(Violation::new("alphabet", format!("duplicate symbol `{name}`")));
        }
    }
    for t in &system.terminals {
        if !seen.contains(t.as_str()) {
            violations.push(Violation::new(
                "terminals",
                format!("terminal `{t}` is not in the alphabet"),
            ));
        }
    }

    let check_word = |word: &Word, location: &str, violations: &mut Vec<Violation>| {
        for s in word.symbols() {
            if !seen.contains(s) {
                violations.push(Violation::new(location, format!("symbol `{s}` is not in the alphabet")));
            }
        }
    };

    for (i, axiom) in system.axioms.iter().enumerate() {
        check_word(axiom, &format!("axiom {i}"), &mut violations);
    }

    let mut labels: BTreeMap<&str, usize> = BTreeMap::new();
    for matrix in &system.matrices {
        *labels.entry(matrix.label.as_str()).or_default() += 1;
        if matrix.width() == 0 {
            violations.push(Violation::new(
                format!("matrix {}", matrix.label),
                "matrix has no (non-padding) rules",
            ));
        }
        for (j, rule) in matrix.rules.iter().enumerate() {
            let location = format!("matrix {} rule {}", matrix.label, j + 1);
            check_word(&rule.left, &location, &mut violations);
            check_word(&rule.body, &location, &mut violations);
            check_word(&rule.right, &location, &mut violations);
        }
    }
    for (label, count) in labels {
        if count > 1 {
            violations.push(Violation::new(
                format!("matrix {label}"),
                format!("label used by {count} matrices"),
            ));
        }
    }
    violations
}
