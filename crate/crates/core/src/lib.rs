//! Matrix-controlled insertion-deletion systems.
//!
//! [`model`] defines rules, matrices and systems; [`engine`] applies them and
//! enumerates bounded languages; [`grammar`] handles Geffert normal form
//! grammars and serves as the reference oracle; [`compile`] turns grammars
//! into matrix systems of a fixed family; [`verify`] checks the results; and
//! [`text`] reads and writes the file formats used by the command line tool.

pub mod compile;
pub mod engine;
pub mod grammar;
pub mod model;
pub mod text;
pub mod verify;

pub use compile::{compile, compile_theorem, CompilationOutput, CompileError, Family, Theorem};
pub use engine::{
    apply_matrix, apply_rule, enumerate, replay, replay_chain, BoundedLanguage, EnumerateError, EnumerationBounds,
    ReplayError, TraceStep, Witness,
};
pub use grammar::{
    enumerate_grammar, split_linear, validate_gnf, GeffertGrammar, Grammar, Production, SpecialGeffertGrammar,
};
pub use model::{size_of, validate, InsDelRule, Matrix, MatrixSystem, RuleOp, SizeVector, Violation, Word};
pub use text::{parse_grammar, parse_system, print_grammar, print_system, ParseError};
pub use verify::{
    bounded_equivalence, check_family, inject_fault, scan_invariant, EquivalenceReport, Fault, Predicate,
};
