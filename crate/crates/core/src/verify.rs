//! Bounded equivalence checks against the grammar oracle, family
//! conformance, invariant scans over reachable configurations, and
//! single-edit faults used to show that the checks are not vacuous.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compile::{CompilationOutput, Theorem, DOLLAR, LEFT_MARK, RIGHT_MARK};
use crate::engine::{explore, BoundedLanguage, CompiledSystem, EnumerateError, EnumerationBounds, Rewriting, Witness};
use crate::grammar::{enumerate_grammar, validate_gnf, Grammar, Side, SpecialGeffertGrammar, ERASERS};
use crate::model::{size_of, InsDelRule, MatrixSystem, Violation, Word};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub k: usize,
    pub grammar_bounds: EnumerationBounds,
    pub system_bounds: EnumerationBounds,
    pub grammar_strings: usize,
    pub system_strings: usize,
    pub only_in_grammar: BTreeSet<Word>,
    pub only_in_system: BTreeSet<Word>,
    pub equal: bool,
    /// A derivation for every string in either difference set, taken from
    /// the side that produced it.
    pub witnesses: BTreeMap<Word, Witness>,
}

impl fmt::Display for EquivalenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "grammar bounds: {}", self.grammar_bounds)?;
        writeln!(f, "system bounds: {}", self.system_bounds)?;
        writeln!(f, "grammar strings: {}", self.grammar_strings)?;
        writeln!(f, "system strings: {}", self.system_strings)?;
        writeln!(f, "equal (terminal strings up to length {}): {}", self.k, self.equal)?;
        for (title, set) in [
            ("only in grammar", &self.only_in_grammar),
            ("only in system", &self.only_in_system),
        ] {
            for w in set {
                writeln!(f, "{title}: {w}")?;
                if let Some(witness) = self.witnesses.get(w) {
                    writeln!(f, "  witness: {witness}")?;
                }
            }
        }
        Ok(())
    }
}

/// Compares terminal strings up to length `k` derived by the grammar and by
/// the system under the same bounds.
pub fn bounded_equivalence(
    g: &Grammar,
    sys: &MatrixSystem,
    bounds: &EnumerationBounds,
) -> Result<EquivalenceReport, EnumerateError> {
    bounded_equivalence_with(g, sys, bounds, bounds)
}

/// As [`bounded_equivalence`], with separate bounds for the two sides. The
/// terminal length bound of `grammar_bounds` is the one compared.
pub fn bounded_equivalence_with(
    g: &Grammar,
    sys: &MatrixSystem,
    grammar_bounds: &EnumerationBounds,
    system_bounds: &EnumerationBounds,
) -> Result<EquivalenceReport, EnumerateError> {
    let k = grammar_bounds.max_terminal_len;
    let system_bounds = EnumerationBounds {
        max_terminal_len: k,
        ..*system_bounds
    };
    let oracle = enumerate_grammar(g, grammar_bounds)?;
    let found = crate::engine::enumerate(sys, &system_bounds)?;
    Ok(compare(k, oracle, found))
}

fn compare(k: usize, oracle: BoundedLanguage, found: BoundedLanguage) -> EquivalenceReport {
    let only_in_grammar: BTreeSet<Word> = oracle.strings.difference(&found.strings).cloned().collect();
    let only_in_system: BTreeSet<Word> = found.strings.difference(&oracle.strings).cloned().collect();
    let mut witnesses = BTreeMap::new();
    for w in &only_in_grammar {
        witnesses.insert(w.clone(), oracle.witnesses[w].clone());
    }
    for w in &only_in_system {
        witnesses.insert(w.clone(), found.witnesses[w].clone());
    }
    EquivalenceReport {
        k,
        grammar_bounds: oracle.bounds,
        system_bounds: found.bounds,
        grammar_strings: oracle.strings.len(),
        system_strings: found.strings.len(),
        equal: only_in_grammar.is_empty() && only_in_system.is_empty(),
        only_in_grammar,
        only_in_system,
        witnesses,
    }
}

/// Violations of the declared `Mat_k INS DEL` family.
pub fn check_family(out: &CompilationOutput) -> Vec<Violation> {
    let mut violations = Vec::new();
    let family = out.declared_family;
    for m in &out.system.matrices {
        if m.width() > family.width {
            violations.push(Violation::new(
                format!("matrix {}", m.label),
                format!("width {} exceeds {}", m.width(), family.width),
            ));
        }
    }
    let size = size_of(&out.system);
    if !size.within(&family.size) {
        violations.push(Violation::new(
            "system",
            format!("size {size} exceeds declared bound {}", family.size),
        ));
    }
    violations
}

/// Configuration predicates that can be checked over a reachable set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Predicate {
    /// At most one symbol among `$` and the keys `K@...`.
    MarkerCount,
    /// At most one symbol of the given set (the grammar's `N'`).
    SingleNonterminal(BTreeSet<String>),
    /// At most one `X@` and at most one `Y@`.
    PositionMarkers,
    /// No erasing rule applies while a symbol of the given set is present.
    StageSeparation(BTreeSet<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PredicateError {
    #[error("unknown predicate `{0}` (expected marker-count, single-nonterminal, xy-count or stage-separation)")]
    Unknown(String),
    #[error("predicate `{0}` needs a grammar")]
    NeedsGrammar(String),
}

impl Predicate {
    pub const NAMES: [&'static str; 4] = ["marker-count", "single-nonterminal", "xy-count", "stage-separation"];

    /// Looks up a registered predicate; the grammar supplies `N'` where
    /// needed.
    pub fn named(name: &str, grammar: Option<&SpecialGeffertGrammar>) -> Result<Predicate, PredicateError> {
        let nonterminals = || {
            grammar
                .map(|g| g.nonterminals.iter().cloned().collect())
                .ok_or_else(|| PredicateError::NeedsGrammar(name.to_owned()))
        };
        match name {
            "marker-count" => Ok(Predicate::MarkerCount),
            "xy-count" => Ok(Predicate::PositionMarkers),
            "single-nonterminal" => Ok(Predicate::SingleNonterminal(nonterminals()?)),
            "stage-separation" => Ok(Predicate::StageSeparation(nonterminals()?)),
            other => Err(PredicateError::Unknown(other.to_owned())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Predicate::MarkerCount => "marker-count",
            Predicate::SingleNonterminal(_) => "single-nonterminal",
            Predicate::PositionMarkers => "xy-count",
            Predicate::StageSeparation(_) => "stage-separation",
        }
    }

    pub fn holds(&self, w: &Word) -> bool {
        match self {
            Predicate::MarkerCount => w.symbols().filter(|s| *s == DOLLAR || s.starts_with("K@")).count() <= 1,
            Predicate::SingleNonterminal(set) => w.symbols().filter(|s| set.contains(*s)).count() <= 1,
            Predicate::PositionMarkers => w.count(LEFT_MARK) <= 1 && w.count(RIGHT_MARK) <= 1,
            Predicate::StageSeparation(set) => {
                !w.symbols().any(|s| set.contains(s))
                    || !w
                        .0
                        .windows(2)
                        .any(|p| ERASERS.iter().any(|(a, b)| p[0] == *a && p[1] == *b))
            }
        }
    }
}

/// What to scan: a matrix system or a grammar.
#[derive(Debug, Clone, Copy)]
pub enum ScanTarget<'a> {
    System(&'a MatrixSystem),
    Grammar(&'a Grammar),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantViolation {
    pub configuration: Word,
    pub witness: Witness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanResult {
    pub configurations: usize,
    pub exhausted: bool,
    /// The first violating configuration in breadth-first order.
    pub violation: Option<InvariantViolation>,
}

/// Checks `predicate` on every configuration reachable within `bounds`,
/// stopping after the breadth-first level where it first fails.
pub fn scan_invariant(
    target: ScanTarget<'_>,
    bounds: &EnumerationBounds,
    predicate: &Predicate,
) -> Result<ScanResult, EnumerateError> {
    match target {
        ScanTarget::System(sys) => scan(&CompiledSystem::new(sys)?, bounds, predicate),
        ScanTarget::Grammar(g) => {
            let violations = validate_gnf(g);
            if !violations.is_empty() {
                return Err(EnumerateError::Invalid(violations));
            }
            scan(&g.rewriting(), bounds, predicate)
        }
    }
}

fn scan<R: Rewriting>(
    sys: &R,
    bounds: &EnumerationBounds,
    predicate: &Predicate,
) -> Result<ScanResult, EnumerateError> {
    let interner = sys.interner();
    let violated = |w: &[_]| !predicate.holds(&interner.decode(w));
    let exploration = explore(sys, bounds, false, Some(&violated))?;
    let violation = (0..exploration.len()).find_map(|i| {
        let w = sys.interner().decode(exploration.config(i));
        (!predicate.holds(&w)).then(|| InvariantViolation {
            configuration: w,
            witness: exploration.witness(sys, i),
        })
    });
    Ok(ScanResult {
        configurations: exploration.len(),
        exhausted: exploration.exhausted,
        violation,
    })
}

/// A documented single-edit mutation of a construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Fault {
    /// t1/t2/t3: the first linear-rule matrix deletes its nonterminal before
    /// the two insertions that need it as context.
    ReorderLinear,
    /// t2/t3: `AB.2` deletes its two symbols in the wrong order.
    SwapEraserDeletions,
    /// t4: `S'` no longer inserts `$`, so the residues `X@X` can never be
    /// removed.
    DropStageMarker,
    /// t6: `r.6` of the first `X -> Yb` rule no longer puts `$` back.
    DropMarkerRestore,
    /// t7: `p.3` of the first `X -> Yb` rule deletes only `p` instead of the
    /// pair `p' p`.
    DropStackCheck,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FaultError {
    #[error("unknown fault `{0}`")]
    Unknown(String),
    #[error("fault `{fault}` does not apply to {theorem}")]
    WrongTheorem { fault: Fault, theorem: Theorem },
    #[error("fault `{0}` needs a grammar rule it can edit")]
    NoTarget(Fault),
}

impl Fault {
    pub const ALL: [Fault; 5] = [
        Fault::ReorderLinear,
        Fault::SwapEraserDeletions,
        Fault::DropStageMarker,
        Fault::DropMarkerRestore,
        Fault::DropStackCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Fault::ReorderLinear => "reorder-linear",
            Fault::SwapEraserDeletions => "swap-eraser-deletions",
            Fault::DropStageMarker => "drop-stage-marker",
            Fault::DropMarkerRestore => "drop-marker-restore",
            Fault::DropStackCheck => "drop-stack-check",
        }
    }

    pub fn applies_to(self, theorem: Theorem) -> bool {
        use Theorem::*;
        match self {
            Fault::ReorderLinear => matches!(theorem, T1 | T2 | T3),
            Fault::SwapEraserDeletions => matches!(theorem, T2 | T3),
            Fault::DropStageMarker => theorem == T4,
            Fault::DropMarkerRestore => theorem == T6,
            Fault::DropStackCheck => theorem == T7,
        }
    }

    /// The fault `--inject-fault` uses when no name is given.
    pub fn default_for(theorem: Theorem) -> Fault {
        match theorem {
            Theorem::T1 => Fault::ReorderLinear,
            Theorem::T2 | Theorem::T3 => Fault::SwapEraserDeletions,
            Theorem::T4 => Fault::DropStageMarker,
            Theorem::T6 => Fault::DropMarkerRestore,
            Theorem::T7 => Fault::DropStackCheck,
        }
    }
}

impl fmt::Display for Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Fault {
    type Err = FaultError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Fault::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| FaultError::Unknown(s.to_owned()))
    }
}

/// Returns the compiled system with `fault` applied.
pub fn inject_fault(
    g: &SpecialGeffertGrammar,
    out: &CompilationOutput,
    fault: Fault,
) -> Result<MatrixSystem, FaultError> {
    if !fault.applies_to(out.theorem) {
        return Err(FaultError::WrongTheorem {
            fault,
            theorem: out.theorem,
        });
    }
    let mut sys = out.system.clone();
    let first_right = g
        .rules
        .iter()
        .filter_map(|r| g.shape(r))
        .find(|r| r.side == Side::Right)
        .map(|r| r.label);
    let target = match fault {
        Fault::ReorderLinear => g.rules.first().map(|r| r.label.clone()),
        Fault::SwapEraserDeletions => Some("AB.2".to_owned()),
        Fault::DropStageMarker => Some("S'".to_owned()),
        Fault::DropMarkerRestore => first_right.map(|l| format!("{l}.6")),
        Fault::DropStackCheck => first_right.map(|l| format!("{l}.3")),
    };
    let matrix = target
        .as_deref()
        .and_then(|label| sys.matrix_mut(label))
        .ok_or(FaultError::NoTarget(fault))?;
    match fault {
        Fault::ReorderLinear => matrix.rules.rotate_right(1),
        Fault::SwapEraserDeletions => matrix.rules.swap(0, 1),
        Fault::DropStageMarker | Fault::DropMarkerRestore => {
            matrix.rules.truncate(1);
        }
        Fault::DropStackCheck => {
            let pair = &matrix.rules[1].body;
            let single = Word(pair.0[1..].to_vec());
            matrix.rules[1] = InsDelRule::new(matrix.rules[1].op, Word::empty(), single, Word::empty());
        }
    }
    Ok(sys)
}
