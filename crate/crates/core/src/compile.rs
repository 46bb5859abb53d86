//! Compilers from special Geffert normal form grammars to matrix
//! insertion-deletion systems, one per construction:
//!
//! | id | family                    | matrices          |
//! |----|---------------------------|-------------------|
//! | t1 | `Mat_3 INS_1^{1,0} DEL_2^{0,0}` | width ≤ 3   |
//! | t2 | `Mat_3 INS_1^{1,0} DEL_1^{1,0}` | width ≤ 3   |
//! | t3 | `Mat_3 INS_1^{1,0} DEL_1^{0,1}` | width ≤ 3   |
//! | t4 | `Mat_3 INS_2^{0,0} DEL_1^{1,0}` | width ≤ 3   |
//! | t6 | `Mat_2 INS_2^{0,0} DEL_1^{1,0}` | width ≤ 2   |
//! | t7 | `Mat_2 INS_1^{1,0} DEL_2^{0,0}` | width ≤ 2   |
//!
//! Fresh symbols carry an `@` followed by the rule (or eraser) they belong
//! to, e.g. `K@AB`, `#3@r2`, `X@S`; the global markers are `$`, `X@` and
//! `Y@`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grammar::{LinearRule, Side, SpecialGeffertGrammar, CORE, ERASERS, FINAL, START};
use crate::model::{InsDelRule, Matrix, MatrixSystem, SizeVector, Violation, Word};

pub const DOLLAR: &str = "$";
/// Left and right position markers of the binary context-free-deletion
/// construction.
pub const LEFT_MARK: &str = "X@";
pub const RIGHT_MARK: &str = "Y@";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theorem {
    T1,
    T2,
    T3,
    T4,
    T6,
    T7,
}

impl Theorem {
    pub const ALL: [Theorem; 6] = [
        Theorem::T1,
        Theorem::T2,
        Theorem::T3,
        Theorem::T4,
        Theorem::T6,
        Theorem::T7,
    ];

    pub fn family(self) -> Family {
        let (width, size) = match self {
            Theorem::T1 => (3, SizeVector::new(1, 1, 0, 2, 0, 0)),
            Theorem::T2 => (3, SizeVector::new(1, 1, 0, 1, 1, 0)),
            Theorem::T3 => (3, SizeVector::new(1, 1, 0, 1, 0, 1)),
            Theorem::T4 => (3, SizeVector::new(2, 0, 0, 1, 1, 0)),
            Theorem::T6 => (2, SizeVector::new(2, 0, 0, 1, 1, 0)),
            Theorem::T7 => (2, SizeVector::new(1, 1, 0, 2, 0, 0)),
        };
        Family { width, size }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let id = match self {
            Theorem::T1 => "t1",
            Theorem::T2 => "t2",
            Theorem::T3 => "t3",
            Theorem::T4 => "t4",
            Theorem::T6 => "t6",
            Theorem::T7 => "t7",
        };
        f.write_str(id)
    }
}

impl FromStr for Theorem {
    type Err = CompileError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "t1" => Ok(Theorem::T1),
            "t2" => Ok(Theorem::T2),
            "t3" => Ok(Theorem::T3),
            "t4" => Ok(Theorem::T4),
            "t6" => Ok(Theorem::T6),
            "t7" => Ok(Theorem::T7),
            "t5" => Err(CompileError::NoConstruction),
            other => Err(CompileError::UnknownTheorem(other.to_owned())),
        }
    }
}

/// `Mat_k INS_n^{m,m'} DEL_p^{q,q'}`: maximal matrix width and size bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Family {
    pub width: usize,
    pub size: SizeVector,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat_{} {}", self.width, self.size)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SymbolRole {
    pub role: String,
    /// The grammar rule (or eraser) the symbol was introduced for.
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompilationOutput {
    pub theorem: Theorem,
    pub system: MatrixSystem,
    pub symbol_table: BTreeMap<String, SymbolRole>,
    pub declared_family: Family,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("grammar is not in special Geffert normal form: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidGrammar(Vec<Violation>),
    #[error("rule {0} rewrites a nonterminal into itself; the context-insertion construction cannot place symbols unambiguously")]
    SelfLoop(String),
    #[error("fresh symbol `{0}` collides with a grammar symbol")]
    NameClash(String),
    #[error("no construction exists for t5 (negative result)")]
    NoConstruction,
    #[error("unknown theorem `{0}` (expected one of t1, t2, t3, t4, t6, t7)")]
    UnknownTheorem(String),
}

struct Builder {
    alphabet: Vec<String>,
    known: BTreeSet<String>,
    terminals: BTreeSet<String>,
    symbol_table: BTreeMap<String, SymbolRole>,
    matrices: Vec<Matrix>,
}

impl Builder {
    fn new(g: &SpecialGeffertGrammar) -> Self {
        let mut b = Builder {
            alphabet: Vec::new(),
            known: BTreeSet::new(),
            terminals: g.terminals.iter().cloned().collect(),
            symbol_table: BTreeMap::new(),
            matrices: Vec::new(),
        };
        for name in g
            .nonterminals
            .iter()
            .map(String::as_str)
            .chain(CORE)
            .chain(g.terminals.iter().map(String::as_str))
        {
            if b.known.insert(name.to_owned()) {
                b.alphabet.push(name.to_owned());
            }
        }
        b
    }

    /// Declares a fresh symbol; declaring the same fresh symbol twice is a
    /// no-op.
    fn fresh(&mut self, name: String, role: &str, source: Option<&str>) -> Result<String, CompileError> {
        if let Some(existing) = self.symbol_table.get(&name) {
            debug_assert_eq!(existing.role, role);
            return Ok(name);
        }
        if !self.known.insert(name.clone()) {
            return Err(CompileError::NameClash(name));
        }
        self.alphabet.push(name.clone());
        self.symbol_table.insert(
            name.clone(),
            SymbolRole {
                role: role.to_owned(),
                source: source.map(str::to_owned),
            },
        );
        Ok(name)
    }

    fn matrix(&mut self, label: impl Into<String>, rules: Vec<InsDelRule>) {
        self.matrices.push(Matrix::new(label, rules));
    }

    fn finish(self, theorem: Theorem, axiom: Word) -> CompilationOutput {
        CompilationOutput {
            theorem,
            system: MatrixSystem {
                alphabet: self.alphabet,
                terminals: self.terminals,
                axioms: vec![axiom],
                matrices: self.matrices,
            },
            symbol_table: self.symbol_table,
            declared_family: theorem.family(),
        }
    }
}

fn linear_rules(g: &SpecialGeffertGrammar) -> Result<Vec<LinearRule>, CompileError> {
    g.linear_rules().map_err(CompileError::InvalidGrammar)
}

fn ins(left: &str, body: &[&str], right: &str) -> InsDelRule {
    InsDelRule::new(
        crate::model::RuleOp::Insertion,
        Word::parse(left),
        Word::from_symbols(body.iter().copied()),
        Word::parse(right),
    )
}

fn del(left: &str, body: &[&str], right: &str) -> InsDelRule {
    InsDelRule::new(
        crate::model::RuleOp::Deletion,
        Word::parse(left),
        Word::from_symbols(body.iter().copied()),
        Word::parse(right),
    )
}

/// `X -> xy` as `[ins(X | y | .), ins(X | x | .), del(. | X | .)]`.
fn context_insertion_rules(b: &mut Builder, rules: &[LinearRule]) -> Result<(), CompileError> {
    for r in rules {
        if r.is_self_loop() {
            return Err(CompileError::SelfLoop(r.label.clone()));
        }
        let (x, y) = r.rhs_pair();
        b.matrix(
            r.label.clone(),
            vec![ins(&r.lhs, &[y], "."), ins(&r.lhs, &[x], "."), del(".", &[&r.lhs], ".")],
        );
    }
    Ok(())
}

fn final_erase(b: &mut Builder, g: &SpecialGeffertGrammar, rules: Vec<InsDelRule>) {
    if g.final_erase {
        b.matrix(FINAL, rules);
    }
}

/// `Mat_3 INS_1^{1,0} DEL_2^{0,0}`: context insertions for the linear
/// rules and direct deletion of `AB`, `CD` and `S'`.
pub fn compile_t1(g: &SpecialGeffertGrammar) -> Result<CompilationOutput, CompileError> {
    let rules = linear_rules(g)?;
    let mut b = Builder::new(g);
    context_insertion_rules(&mut b, &rules)?;
    for (x, y) in ERASERS {
        b.matrix(format!("{x}{y}"), vec![del(".", &[x, y], ".")]);
    }
    final_erase(&mut b, g, vec![del(".", &[FINAL], ".")]);
    Ok(b.finish(Theorem::T1, Word::from_symbols([START])))
}

/// Shared by t2 and t3: the erasing rules go through a key symbol `K@xy`
/// that is exchanged against the unique `$`.
fn keyed_erasers(
    g: &SpecialGeffertGrammar,
    theorem: Theorem,
    pair_deletion: impl Fn(&str, &str, &str) -> Vec<InsDelRule>,
) -> Result<CompilationOutput, CompileError> {
    let rules = linear_rules(g)?;
    let mut b = Builder::new(g);
    let dollar = b.fresh(DOLLAR.into(), "stage marker", None)?;
    context_insertion_rules(&mut b, &rules)?;
    for (x, y) in ERASERS {
        let eraser = format!("{x}{y}");
        let key = b.fresh(format!("K@{eraser}"), "eraser key", Some(&eraser))?;
        b.matrix(
            format!("{eraser}.1"),
            vec![ins(".", &[&key], "."), del(".", &[&dollar], ".")],
        );
        b.matrix(format!("{eraser}.2"), pair_deletion(&key, x, y));
        b.matrix(
            format!("{eraser}.3"),
            vec![del(".", &[&key], "."), ins(".", &[&dollar], ".")],
        );
    }
    final_erase(&mut b, g, vec![del(".", &[FINAL], ".")]);
    b.matrix(DOLLAR, vec![del(".", &[&dollar], ".")]);
    Ok(b.finish(theorem, Word::from_symbols([DOLLAR, START])))
}

/// `Mat_3 INS_1^{1,0} DEL_1^{1,0}`: as t1, but `xy -> λ` deletes `x` and
/// then `y` to the right of a key symbol `K@xy`.
pub fn compile_t2(g: &SpecialGeffertGrammar) -> Result<CompilationOutput, CompileError> {
    keyed_erasers(g, Theorem::T2, |key, x, y| {
        vec![del(key, &[x], "."), del(key, &[y], ".")]
    })
}

/// `Mat_3 INS_1^{1,0} DEL_1^{0,1}`: the t2 construction with the erasing
/// deletions mirrored, `xy -> λ` deleting `y` and then `x` to the left of
/// `K@xy`. Insertions keep their left contexts.
pub fn compile_t3(g: &SpecialGeffertGrammar) -> Result<CompilationOutput, CompileError> {
    keyed_erasers(g, Theorem::T3, |key, x, y| {
        vec![del(".", &[y], key), del(".", &[x], key)]
    })
}

/// `X -> bY` as `[ins(bY), del(Y | X | .)]`: `bY` must land directly in
/// front of the unique `X`.
fn rewrite_in_place(b: &mut Builder, r: &LinearRule) {
    b.matrix(
        r.label.clone(),
        vec![ins(".", &[&r.emit, &r.next], "."), del(&r.next, &[&r.lhs], ".")],
    );
}

/// `Mat_3 INS_2^{0,0} DEL_1^{1,0}`.
///
/// `X -> Yb` first replaces `X` by `X@X Y@X` and then `Y@X` by `Yb`; the
/// leftover `X@X` is removed once `$` appears, which only happens after
/// `S' -> λ`.
pub fn compile_t4(g: &SpecialGeffertGrammar) -> Result<CompilationOutput, CompileError> {
    let rules = linear_rules(g)?;
    let mut b = Builder::new(g);
    let dollar = b.fresh(DOLLAR.into(), "stage marker", None)?;
    for r in &rules {
        match r.side {
            Side::Left => rewrite_in_place(&mut b, r),
            Side::Right => {
                let xa = b.fresh(format!("X@{}", r.lhs), "left residue", Some(&r.lhs))?;
                let ya = b.fresh(format!("Y@{}", r.lhs), "placeholder", Some(&r.lhs))?;
                b.matrix(
                    format!("{}.1", r.label),
                    vec![ins(".", &[&xa, &ya], "."), del(&ya, &[&r.lhs], ".")],
                );
                b.matrix(
                    format!("{}.2", r.label),
                    vec![ins(".", &[&r.next, &r.emit], "."), del(&r.emit, &[&ya], ".")],
                );
                b.matrix(
                    format!("{}.3", r.label),
                    vec![
                        del(".", &[&dollar], "."),
                        del(".", &[&xa], "."),
                        ins(".", &[&dollar], "."),
                    ],
                );
            }
        }
    }
    for (x, y) in ERASERS {
        let eraser = format!("{x}{y}");
        let key = b.fresh(format!("K@{eraser}"), "eraser key", Some(&eraser))?;
        b.matrix(
            format!("{eraser}.1"),
            vec![ins(".", &[&key], "."), del(".", &[&dollar], ".")],
        );
        b.matrix(format!("{eraser}.2"), vec![del(&key, &[x], "."), del(&key, &[y], ".")]);
        b.matrix(
            format!("{eraser}.3"),
            vec![del(".", &[&key], "."), ins(".", &[&dollar], ".")],
        );
    }
    final_erase(&mut b, g, vec![del(".", &[FINAL], "."), ins(".", &[&dollar], ".")]);
    b.matrix(DOLLAR, vec![del(".", &[&dollar], ".")]);
    Ok(b.finish(Theorem::T4, Word::from_symbols([START])))
}

/// `Mat_2 INS_2^{0,0} DEL_1^{1,0}`.
///
/// `X -> Yb` (rule `r`) runs `X -> #1 #2`, `#1 -> Y`, `#2 -> #3 #4`,
/// `#4 -> #5 b` as insert-then-contextually-delete pairs and finally
/// removes `#3 #5` behind a key `K@r` exchanged against `$`.
pub fn compile_t6(g: &SpecialGeffertGrammar) -> Result<CompilationOutput, CompileError> {
    let rules = linear_rules(g)?;
    let mut b = Builder::new(g);
    let dollar = b.fresh(DOLLAR.into(), "stage marker", None)?;
    for r in &rules {
        match r.side {
            Side::Left => rewrite_in_place(&mut b, r),
            Side::Right => {
                let label = &r.label;
                let mut hash = Vec::new();
                for k in 1..=5 {
                    hash.push(b.fresh(format!("#{k}@{label}"), &format!("intermediate #{k}"), Some(label))?);
                }
                let key = b.fresh(format!("K@{label}"), "rule key", Some(label))?;
                let h = |k: usize| hash[k - 1].as_str();
                b.matrix(
                    format!("{label}.1"),
                    vec![ins(".", &[h(1), h(2)], "."), del(h(2), &[&r.lhs], ".")],
                );
                b.matrix(
                    format!("{label}.2"),
                    vec![ins(".", &[&r.next], "."), del(&r.next, &[h(1)], ".")],
                );
                b.matrix(
                    format!("{label}.3"),
                    vec![ins(".", &[h(3), h(4)], "."), del(h(4), &[h(2)], ".")],
                );
                b.matrix(
                    format!("{label}.4"),
                    vec![ins(".", &[h(5), &r.emit], "."), del(&r.emit, &[h(4)], ".")],
                );
                b.matrix(
                    format!("{label}.5"),
                    vec![del(".", &[&dollar], "."), ins(".", &[&key], ".")],
                );
                b.matrix(
                    format!("{label}.6"),
                    vec![del(".", &[&key], "."), ins(".", &[&dollar], ".")],
                );
                b.matrix(
                    format!("{label}.7"),
                    vec![del(&key, &[h(3)], "."), del(&key, &[h(5)], ".")],
                );
            }
        }
    }
    for (x, y) in ERASERS {
        let eraser = format!("{x}{y}");
        let key = b.fresh(format!("K@{eraser}"), "eraser key", Some(&eraser))?;
        b.matrix(
            format!("{eraser}.1"),
            vec![del(".", &[&dollar], "."), ins(".", &[&key], ".")],
        );
        b.matrix(
            format!("{eraser}.2"),
            vec![del(".", &[&key], "."), ins(".", &[&dollar], ".")],
        );
        b.matrix(format!("{eraser}.3"), vec![del(&key, &[x], "."), del(&key, &[y], ".")]);
    }
    final_erase(&mut b, g, vec![del(".", &[FINAL], ".")]);
    b.matrix(DOLLAR, vec![del(".", &[&dollar], ".")]);
    Ok(b.finish(Theorem::T6, Word::from_symbols([DOLLAR, START])))
}

/// `Mat_2 INS_1^{1,0} DEL_2^{0,0}`.
///
/// `X@` sits directly in front of the current nonterminal and `Y@` at the
/// end of the string. Every simulated rule pushes rule-specific symbols
/// right after `Y@` while inserting after `X@`; a terminal string is only
/// reachable if those symbols are later deleted in the intended pairs.
pub fn compile_t7(g: &SpecialGeffertGrammar) -> Result<CompilationOutput, CompileError> {
    let rules = linear_rules(g)?;
    let mut b = Builder::new(g);
    let x = b.fresh(LEFT_MARK.into(), "site marker", None)?;
    let y = b.fresh(RIGHT_MARK.into(), "stack marker", None)?;
    for r in &rules {
        let label = &r.label;
        let p = b.fresh(format!("p@{label}"), "rule stack symbol", Some(label))?;
        match r.side {
            Side::Right => {
                let p1 = b.fresh(format!("p'@{label}"), "emission check", Some(label))?;
                b.matrix(
                    format!("{label}.1"),
                    vec![del(".", &[&r.lhs], "."), ins(&y, &[&p], ".")],
                );
                b.matrix(
                    format!("{label}.2"),
                    vec![ins(&x, &[&r.emit], "."), ins(&y, &[&p1], ".")],
                );
                b.matrix(
                    format!("{label}.3"),
                    vec![ins(&x, &[&r.next], "."), del(".", &[&p1, &p], ".")],
                );
            }
            Side::Left => {
                let p2 = b.fresh(format!("p2@{label}"), "stack symbol", Some(label))?;
                let p3 = b.fresh(format!("p3@{label}"), "stack symbol", Some(label))?;
                let h = b.fresh(format!("#@{label}"), "stack symbol", Some(label))?;
                let h1 = b.fresh(format!("#'@{label}"), "stack symbol", Some(label))?;
                let c1 = b.fresh(format!("C1@{label}"), "site symbol", Some(label))?;
                let c2 = b.fresh(format!("C2@{label}"), "site symbol", Some(label))?;
                b.matrix(
                    format!("{label}.1"),
                    vec![del(".", &[&r.lhs], "."), ins(&y, &[&p], ".")],
                );
                b.matrix(format!("{label}.2"), vec![ins(&x, &[&c1], "."), ins(&y, &[&h], ".")]);
                b.matrix(format!("{label}.3"), vec![ins(&y, &[&h1], "."), ins(&y, &[&p2], ".")]);
                b.matrix(
                    format!("{label}.4"),
                    vec![ins(&y, &[&p3], "."), del(".", &[&h1, &h], ".")],
                );
                b.matrix(
                    format!("{label}.5"),
                    vec![ins(&x, &[&r.emit], "."), del(".", &[&p2], ".")],
                );
                b.matrix(format!("{label}.6"), vec![del(".", &[&x], "."), ins(&c1, &[&c2], ".")]);
                b.matrix(
                    format!("{label}.7"),
                    vec![ins(&c2, &[&x], "."), del(".", &[&p3, &p], ".")],
                );
                b.matrix(
                    format!("{label}.8"),
                    vec![ins(&x, &[&r.next], "."), del(".", &[&c1, &c2], ".")],
                );
            }
        }
    }
    for (a, c) in ERASERS {
        b.matrix(format!("{a}{c}"), vec![del(".", &[a, c], ".")]);
    }
    b.matrix("XY", vec![del(".", &[&x], "."), del(".", &[&y], ".")]);
    final_erase(&mut b, g, vec![del(".", &[FINAL], ".")]);
    Ok(b.finish(Theorem::T7, Word::from_symbols([LEFT_MARK, START, RIGHT_MARK])))
}

pub fn compile_theorem(g: &SpecialGeffertGrammar, theorem: Theorem) -> Result<CompilationOutput, CompileError> {
    match theorem {
        Theorem::T1 => compile_t1(g),
        Theorem::T2 => compile_t2(g),
        Theorem::T3 => compile_t3(g),
        Theorem::T4 => compile_t4(g),
        Theorem::T6 => compile_t6(g),
        Theorem::T7 => compile_t7(g),
    }
}

/// Dispatches on a theorem id such as `"t6"`.
pub fn compile(g: &SpecialGeffertGrammar, theorem: &str) -> Result<CompilationOutput, CompileError> {
    compile_theorem(g, theorem.parse()?)
}
