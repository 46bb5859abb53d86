//! Rule application, atomic matrix transitions, bounded breadth-first
//! enumeration and witness replay.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::BuildHasher;

use hashbrown::{DefaultHashBuilder, HashTable};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{validate, InsDelRule, Matrix, MatrixSystem, RuleOp, Violation, Word};

/// Default number of extra symbols a sentential form may carry beyond the
/// terminal length bound.
pub const DEFAULT_FORM_SLACK: usize = 8;

/// Rewrites `w` with one rule at every matching position.
///
/// Results are sorted and deduplicated.
pub fn rewrite_all<T: Ord + Clone>(w: &[T], op: RuleOp, left: &[T], body: &[T], right: &[T]) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    match op {
        RuleOp::Insertion => {
            let window = left.len() + right.len();
            if window > w.len() {
                return out;
            }
            for i in 0..=w.len() - window {
                let cut = i + left.len();
                if w[i..cut] == *left && w[cut..cut + right.len()] == *right {
                    let mut r = Vec::with_capacity(w.len() + body.len());
                    r.extend_from_slice(&w[..cut]);
                    r.extend_from_slice(body);
                    r.extend_from_slice(&w[cut..]);
                    out.push(r);
                }
            }
        }
        RuleOp::Deletion => {
            let window = left.len() + body.len() + right.len();
            if window > w.len() {
                return out;
            }
            for i in 0..=w.len() - window {
                let start = i + left.len();
                let end = start + body.len();
                if w[i..start] == *left && w[start..end] == *body && w[end..end + right.len()] == *right {
                    let mut r = Vec::with_capacity(w.len() - body.len());
                    r.extend_from_slice(&w[..start]);
                    r.extend_from_slice(&w[end..]);
                    out.push(r);
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// All strings obtained from `w` by one application of `rule`.
pub fn apply_rule(w: &Word, rule: &InsDelRule) -> BTreeSet<Word> {
    rewrite_all(&w.0, rule.op, &rule.left.0, &rule.body.0, &rule.right.0)
        .into_iter()
        .map(Word)
        .collect()
}

/// All strings reachable from `w` by applying the rules of `matrix` in order.
/// Empty when no complete sequence of applications exists.
pub fn apply_matrix(w: &Word, matrix: &Matrix) -> BTreeSet<Word> {
    let mut current: BTreeSet<Word> = BTreeSet::from([w.clone()]);
    for rule in &matrix.rules {
        current = current.iter().flat_map(|x| apply_rule(x, rule)).collect();
        if current.is_empty() {
            break;
        }
    }
    current
}

/// One transition of the system from `w`: every `(label, result)` pair,
/// ordered by label and then by result.
pub fn step(w: &Word, system: &MatrixSystem) -> Vec<(String, Word)> {
    let mut matrices: Vec<&Matrix> = system.matrices.iter().collect();
    matrices.sort_by(|a, b| a.label.cmp(&b.label));
    matrices
        .into_iter()
        .flat_map(|m| apply_matrix(w, m).into_iter().map(move |r| (m.label.clone(), r)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnumerationBounds {
    /// Longest terminal string collected.
    pub max_terminal_len: usize,
    /// Longest sentential form kept in the search.
    pub max_form_len: usize,
    /// Maximal number of transitions per derivation; `None` for unlimited.
    pub max_steps: Option<usize>,
}

impl EnumerationBounds {
    pub fn new(max_terminal_len: usize, max_form_len: usize, max_steps: Option<usize>) -> Self {
        EnumerationBounds {
            max_terminal_len,
            max_form_len,
            max_steps,
        }
    }

    /// `max_form_len = k + slack`, no step limit.
    pub fn with_slack(k: usize, slack: usize) -> Self {
        Self::new(k, k + slack, None)
    }

    /// The default bounds for terminal length `k`.
    pub fn for_length(k: usize) -> Self {
        Self::with_slack(k, DEFAULT_FORM_SLACK)
    }

    pub fn with_max_steps(mut self, steps: usize) -> Self {
        self.max_steps = Some(steps);
        self
    }
}

impl fmt::Display for EnumerationBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={} form={} steps=", self.max_terminal_len, self.max_form_len)?;
        match self.max_steps {
            Some(n) => write!(f, "{n}"),
            None => f.write_str("unlimited"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerateError {
    #[error("axiom exceeds form bound: axiom of length {len}, form bound {max}")]
    AxiomExceedsFormBound { len: usize, max: usize },
    #[error("form bound {max_form} is below terminal bound {max_terminal}")]
    FormBelowTerminal { max_form: usize, max_terminal: usize },
    #[error("system is not well formed: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

/// One transition of a derivation together with the strings produced by each
/// of its rules, `w_1, ..., w_k`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TraceStep {
    pub label: String,
    pub intermediates: Vec<Word>,
}

impl TraceStep {
    /// The configuration after the step.
    pub fn result(&self) -> Option<&Word> {
        self.intermediates.last()
    }
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.label)?;
        for (i, w) in self.intermediates.iter().enumerate() {
            if i > 0 {
                f.write_str(" => ")?;
            }
            write!(f, "{w}")?;
        }
        Ok(())
    }
}

/// Terminal strings found under a set of bounds, with one witness derivation
/// per string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundedLanguage {
    pub strings: BTreeSet<Word>,
    pub bounds: EnumerationBounds,
    /// Witness for each string: the axiom it starts from and the steps.
    pub witnesses: BTreeMap<Word, Witness>,
    /// `true` iff the search frontier emptied before reaching the step limit.
    pub exhausted: bool,
    /// Number of distinct configurations visited.
    pub configurations: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub axiom: Word,
    pub steps: Vec<TraceStep>,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.axiom)?;
        for s in &self.steps {
            write!(f, "\n  {s}")?;
        }
        Ok(())
    }
}

pub(crate) type Sym = u16;

/// Name <-> id mapping. Ids follow name order so that comparing id sequences
/// is comparing symbol-name sequences.
#[derive(Debug, Clone)]
pub(crate) struct Interner {
    names: Vec<String>,
    ids: HashMap<String, Sym>,
}

impl Interner {
    pub(crate) fn new<'a>(names: impl IntoIterator<Item = &'a str>) -> Self {
        let mut names: Vec<String> = names.into_iter().map(str::to_owned).collect();
        names.sort();
        names.dedup();
        assert!(names.len() <= Sym::MAX as usize, "alphabet too large");
        let ids = names.iter().enumerate().map(|(i, n)| (n.clone(), i as Sym)).collect();
        Interner { names, ids }
    }

    pub(crate) fn id(&self, name: &str) -> Option<Sym> {
        self.ids.get(name).copied()
    }

    pub(crate) fn encode(&self, word: &Word) -> Option<Vec<Sym>> {
        word.symbols().map(|s| self.id(s)).collect()
    }

    pub(crate) fn decode(&self, syms: &[Sym]) -> Word {
        Word(syms.iter().map(|&s| self.names[s as usize].clone()).collect())
    }

    pub(crate) fn len(&self) -> usize {
        self.names.len()
    }
}

/// A string rewriting device explored by [`explore`].
pub(crate) trait Rewriting: Sync {
    fn interner(&self) -> &Interner;
    fn axioms(&self) -> Vec<Vec<Sym>>;
    fn label(&self, index: u32) -> &str;
    /// Calls `emit(label, result)` for every successor no longer than
    /// `max_len`, in no particular order and possibly with repetitions.
    fn for_each_successor(&self, w: &[Sym], max_len: usize, emit: &mut dyn FnMut(u32, &[Sym]));
    fn is_terminal(&self, w: &[Sym]) -> bool;
    /// Per symbol: whether some rule can remove an occurrence of it.
    fn removable(&self) -> &[bool];
    /// Intermediate strings of the transition `from -> to` via `label`.
    fn intermediates(&self, from: &[Sym], label: u32, to: &[Sym]) -> Vec<Vec<Sym>>;
}

#[derive(Debug, Clone)]
struct CompiledRule {
    op: RuleOp,
    left: Vec<Sym>,
    body: Vec<Sym>,
    right: Vec<Sym>,
}

impl CompiledRule {
    fn apply(&self, w: &[Sym]) -> Vec<Vec<Sym>> {
        rewrite_all(w, self.op, &self.left, &self.body, &self.right)
    }
}

/// A matrix system with interned symbols and label-sorted matrices.
pub(crate) struct CompiledSystem {
    interner: Interner,
    terminal: Vec<bool>,
    removable: Vec<bool>,
    axioms: Vec<Vec<Sym>>,
    matrices: Vec<CompiledMatrix>,
    max_rules: usize,
    max_body: usize,
}

struct CompiledMatrix {
    label: String,
    rules: Vec<CompiledRule>,
    /// Length change of a successful application.
    delta: isize,
    /// Symbols some rule needs before any earlier rule of the matrix could
    /// have inserted them; all must occur in the input.
    required: Vec<Sym>,
}

impl CompiledMatrix {
    fn new(label: String, rules: Vec<CompiledRule>) -> Self {
        let mut delta = 0isize;
        let mut inserted: Vec<Sym> = Vec::new();
        let mut required: Vec<Sym> = Vec::new();
        for r in &rules {
            let needed = r.left.iter().chain(&r.right).chain(match r.op {
                RuleOp::Deletion => r.body.iter(),
                RuleOp::Insertion => [].iter(),
            });
            for &s in needed {
                if !inserted.contains(&s) && !required.contains(&s) {
                    required.push(s);
                }
            }
            match r.op {
                RuleOp::Insertion => {
                    delta += r.body.len() as isize;
                    inserted.extend_from_slice(&r.body);
                }
                RuleOp::Deletion => delta -= r.body.len() as isize,
            }
        }
        CompiledMatrix {
            label,
            rules,
            delta,
            required,
        }
    }
}

impl CompiledSystem {
    pub(crate) fn new(system: &MatrixSystem) -> Result<Self, EnumerateError> {
        let violations = validate(system);
        if !violations.is_empty() {
            return Err(EnumerateError::Invalid(violations));
        }
        let interner = Interner::new(system.alphabet.iter().map(String::as_str));
        let encode = |w: &Word| interner.encode(w).expect("validated word");
        let terminal = (0..interner.len())
            .map(|i| system.terminals.contains(&interner.names[i]))
            .collect();
        let axioms = system.axioms.iter().map(encode).collect();
        let mut matrices: Vec<CompiledMatrix> = system
            .matrices
            .iter()
            .map(|m| {
                let rules = m
                    .rules
                    .iter()
                    .filter(|r| !r.is_padding())
                    .map(|r| CompiledRule {
                        op: r.op,
                        left: encode(&r.left),
                        body: encode(&r.body),
                        right: encode(&r.right),
                    })
                    .collect();
                CompiledMatrix::new(m.label.clone(), rules)
            })
            .collect();
        matrices.sort_by(|a, b| a.label.cmp(&b.label));
        let mut removable = vec![false; interner.len()];
        for r in matrices.iter().flat_map(|m| &m.rules) {
            if r.op == RuleOp::Deletion {
                for &s in &r.body {
                    removable[s as usize] = true;
                }
            }
        }
        Ok(CompiledSystem {
            interner,
            terminal,
            removable,
            axioms,
            max_rules: matrices.iter().map(|m| m.rules.len()).max().unwrap_or(0),
            max_body: matrices
                .iter()
                .flat_map(|m| &m.rules)
                .map(|r| r.body.len())
                .max()
                .unwrap_or(0),
            matrices,
        })
    }
}

fn same(a: &[Sym], b: &[Sym]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x == y)
}

/// Depth-first application of `rules` to `w`, passing every final string
/// (possibly with repetitions) to `emit`. `scratch` holds one buffer per
/// rule.
fn apply_from(rules: &[CompiledRule], w: &[Sym], scratch: &mut [Vec<Sym>], emit: &mut dyn FnMut(&[Sym])) {
    let Some((rule, rest)) = rules.split_first() else {
        emit(w);
        return;
    };
    let (buf, deeper) = scratch.split_first_mut().expect("one buffer per rule");
    let (left, body, right) = (&rule.left[..], &rule.body[..], &rule.right[..]);
    let window = match rule.op {
        RuleOp::Insertion => left.len() + right.len(),
        RuleOp::Deletion => left.len() + body.len() + right.len(),
    };
    if window > w.len() {
        return;
    }
    for i in 0..=w.len() - window {
        let cut = i + left.len();
        if !same(&w[i..cut], left) {
            continue;
        }
        buf.clear();
        match rule.op {
            RuleOp::Insertion => {
                if !same(&w[cut..cut + right.len()], right) {
                    continue;
                }
                buf.extend_from_slice(&w[..cut]);
                buf.extend_from_slice(body);
                buf.extend_from_slice(&w[cut..]);
            }
            RuleOp::Deletion => {
                let end = cut + body.len();
                if !same(&w[cut..end], body) || !same(&w[end..end + right.len()], right) {
                    continue;
                }
                buf.extend_from_slice(&w[..cut]);
                buf.extend_from_slice(&w[end..]);
            }
        }
        if rest.is_empty() {
            emit(buf);
        } else {
            let next = std::mem::take(buf);
            apply_from(rest, &next, deeper, emit);
            *buf = next;
        }
    }
}

impl Rewriting for CompiledSystem {
    fn interner(&self) -> &Interner {
        &self.interner
    }

    fn axioms(&self) -> Vec<Vec<Sym>> {
        self.axioms.clone()
    }

    fn label(&self, index: u32) -> &str {
        &self.matrices[index as usize].label
    }

    fn for_each_successor(&self, w: &[Sym], max_len: usize, emit: &mut dyn FnMut(u32, &[Sym])) {
        let mut present = vec![false; self.interner.len()];
        for &s in w {
            present[s as usize] = true;
        }
        let mut scratch = vec![Vec::with_capacity(max_len + self.max_body); self.max_rules];
        for (i, m) in self.matrices.iter().enumerate() {
            if w.len() as isize + m.delta > max_len as isize || !m.required.iter().all(|&s| present[s as usize]) {
                continue;
            }
            apply_from(&m.rules, w, &mut scratch, &mut |r| emit(i as u32, r));
        }
    }

    fn removable(&self) -> &[bool] {
        &self.removable
    }

    fn is_terminal(&self, w: &[Sym]) -> bool {
        w.iter().all(|&s| self.terminal[s as usize])
    }

    fn intermediates(&self, from: &[Sym], label: u32, to: &[Sym]) -> Vec<Vec<Sym>> {
        // Depth-first over the rule sequence, smallest candidates first.
        fn search(rules: &[CompiledRule], w: &[Sym], to: &[Sym], path: &mut Vec<Vec<Sym>>) -> bool {
            match rules.split_first() {
                None => w == to,
                Some((rule, rest)) => {
                    for next in rule.apply(w) {
                        path.push(next);
                        if search(rest, path.last().unwrap().clone().as_slice(), to, path) {
                            return true;
                        }
                        path.pop();
                    }
                    false
                }
            }
        }
        let rules = &self.matrices[label as usize].rules;
        let mut path = Vec::new();
        let found = search(rules, from, to, &mut path);
        debug_assert!(found, "transition has no intermediate path");
        path
    }
}

/// A semi-Thue system `lhs -> rhs` (used for grammars).
pub(crate) struct CompiledRewriting {
    interner: Interner,
    terminal: Vec<bool>,
    removable: Vec<bool>,
    axioms: Vec<Vec<Sym>>,
    rules: Vec<(String, Vec<Sym>, Vec<Sym>)>,
}

impl CompiledRewriting {
    /// `rules` are `(label, lhs, rhs)`; `symbols` must cover all of them.
    pub(crate) fn new(
        symbols: &[String],
        terminals: &BTreeSet<String>,
        axiom: &Word,
        rules: &[(String, Word, Word)],
    ) -> Self {
        let interner = Interner::new(symbols.iter().map(String::as_str));
        let encode = |w: &Word| interner.encode(w).expect("grammar symbol not declared");
        let terminal = (0..interner.len())
            .map(|i| terminals.contains(&interner.names[i]))
            .collect();
        let mut compiled: Vec<(String, Vec<Sym>, Vec<Sym>)> = rules
            .iter()
            .map(|(l, lhs, rhs)| (l.clone(), encode(lhs), encode(rhs)))
            .collect();
        compiled.sort_by(|a, b| a.0.cmp(&b.0));
        let mut removable = vec![false; interner.len()];
        for (_, lhs, _) in &compiled {
            for &s in lhs {
                removable[s as usize] = true;
            }
        }
        CompiledRewriting {
            axioms: vec![encode(axiom)],
            interner,
            terminal,
            removable,
            rules: compiled,
        }
    }

    fn rewrite(lhs: &[Sym], rhs: &[Sym], w: &[Sym]) -> Vec<Vec<Sym>> {
        let mut out = Vec::new();
        if lhs.len() > w.len() {
            return out;
        }
        for i in 0..=w.len() - lhs.len() {
            if w[i..i + lhs.len()] == *lhs {
                let mut r = Vec::with_capacity(w.len() + rhs.len() - lhs.len());
                r.extend_from_slice(&w[..i]);
                r.extend_from_slice(rhs);
                r.extend_from_slice(&w[i + lhs.len()..]);
                out.push(r);
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

impl Rewriting for CompiledRewriting {
    fn interner(&self) -> &Interner {
        &self.interner
    }

    fn axioms(&self) -> Vec<Vec<Sym>> {
        self.axioms.clone()
    }

    fn label(&self, index: u32) -> &str {
        &self.rules[index as usize].0
    }

    fn for_each_successor(&self, w: &[Sym], max_len: usize, emit: &mut dyn FnMut(u32, &[Sym])) {
        for (i, (_, lhs, rhs)) in self.rules.iter().enumerate() {
            if w.len() + rhs.len() > max_len + lhs.len() {
                continue;
            }
            for r in Self::rewrite(lhs, rhs, w) {
                emit(i as u32, &r);
            }
        }
    }

    fn is_terminal(&self, w: &[Sym]) -> bool {
        w.iter().all(|&s| self.terminal[s as usize])
    }

    fn removable(&self) -> &[bool] {
        &self.removable
    }

    fn intermediates(&self, _from: &[Sym], _label: u32, to: &[Sym]) -> Vec<Vec<Sym>> {
        vec![to.to_vec()]
    }
}

/// Interned configurations stored back to back, indexed by a hash table.
struct Arena {
    syms: Vec<Sym>,
    starts: Vec<usize>,
    table: HashTable<u32>,
    hasher: DefaultHashBuilder,
}

impl Arena {
    fn new() -> Self {
        Arena {
            syms: Vec::new(),
            starts: vec![0],
            table: HashTable::new(),
            hasher: DefaultHashBuilder::default(),
        }
    }

    fn len(&self) -> usize {
        self.starts.len() - 1
    }

    fn get(&self, i: usize) -> &[Sym] {
        &self.syms[self.starts[i]..self.starts[i + 1]]
    }

    fn contains(&self, w: &[Sym]) -> bool {
        let hash = self.hasher.hash_one(w);
        self.table.find(hash, |&i| self.get(i as usize) == w).is_some()
    }

    /// Index of `w` and whether it was newly added.
    fn insert(&mut self, w: &[Sym]) -> (usize, bool) {
        let hash = self.hasher.hash_one(w);
        let Arena {
            syms,
            starts,
            table,
            hasher,
        } = self;
        let get = |i: u32| &syms[starts[i as usize]..starts[i as usize + 1]];
        if let Some(&i) = table.find(hash, |&i| get(i) == w) {
            return (i as usize, false);
        }
        let index = starts.len() - 1;
        assert!(index < u32::MAX as usize, "too many configurations");
        syms.extend_from_slice(w);
        starts.push(syms.len());
        let (syms, starts) = (&*syms, &*starts);
        table.insert_unique(hash, index as u32, |&i| {
            hasher.hash_one(&syms[starts[i as usize]..starts[i as usize + 1]])
        });
        (index, true)
    }
}

const ROOT: (u32, u32) = (u32::MAX, u32::MAX);

type StopAt<'a> = &'a dyn Fn(&[Sym]) -> bool;

/// Number of frontier configurations expanded per parallel batch.
const BATCH: usize = 4096;

/// The reachable configurations of a rewriting device under bounds, with a
/// parent pointer per configuration.
pub(crate) struct Exploration {
    nodes: Arena,
    /// `(parent index, label index)`; [`ROOT`] for axioms.
    parents: Vec<(u32, u32)>,
    pub(crate) exhausted: bool,
}

impl Exploration {
    pub(crate) fn len(&self) -> usize {
        self.nodes.len()
    }

    pub(crate) fn config(&self, index: usize) -> &[Sym] {
        self.nodes.get(index)
    }

    pub(crate) fn witness<R: Rewriting + ?Sized>(&self, sys: &R, index: usize) -> Witness {
        let mut chain = vec![index];
        let mut cur = index;
        while self.parents[cur] != ROOT {
            cur = self.parents[cur].0 as usize;
            chain.push(cur);
        }
        chain.reverse();
        let interner = sys.interner();
        let axiom = interner.decode(self.nodes.get(chain[0]));
        let steps = chain
            .windows(2)
            .map(|pair| {
                let (from, to) = (self.nodes.get(pair[0]), self.nodes.get(pair[1]));
                let label = self.parents[pair[1]].1;
                TraceStep {
                    label: sys.label(label).to_owned(),
                    intermediates: sys
                        .intermediates(from, label, to)
                        .iter()
                        .map(|w| interner.decode(w))
                        .collect(),
                }
            })
            .collect();
        Witness { axiom, steps }
    }
}

/// Breadth-first closure from the axioms.
///
/// Frontier configurations are expanded concurrently in batches;
/// discoveries are merged in frontier order so the result (including
/// witnesses) does not depend on scheduling. Within a level, a configuration
/// is attributed to the first parent in frontier order and the smallest
/// `(label, result)` transition, which makes every witness shortest and then
/// lexicographically smallest.
///
/// With `prune` set, configurations that cannot lead to a terminal string of
/// length at most `max_terminal_len` are not kept: those holding a
/// non-terminal no rule removes, or more such terminals than the bound. Both
/// counts never decrease along a derivation, so the terminal strings found
/// and their witnesses are unchanged.
///
/// With `until` set, the search ends after the first level holding a
/// configuration that satisfies it; everything up to that level is
/// discovered exactly as in a full run.
pub(crate) fn explore<R: Rewriting>(
    sys: &R,
    bounds: &EnumerationBounds,
    prune: bool,
    until: Option<StopAt<'_>>,
) -> Result<Exploration, EnumerateError> {
    if bounds.max_form_len < bounds.max_terminal_len {
        return Err(EnumerateError::FormBelowTerminal {
            max_form: bounds.max_form_len,
            max_terminal: bounds.max_terminal_len,
        });
    }
    let mut axioms = sys.axioms();
    if let Some(len) = axioms.iter().map(Vec::len).max() {
        if len > bounds.max_form_len {
            return Err(EnumerateError::AxiomExceedsFormBound {
                len,
                max: bounds.max_form_len,
            });
        }
    }
    axioms.sort();
    axioms.dedup();

    let mut nodes = Arena::new();
    let mut parents = Vec::new();
    let mut frontier = Vec::new();
    for a in &axioms {
        let (i, _) = nodes.insert(a);
        parents.push(ROOT);
        frontier.push(i);
    }

    let expand = |nodes: &Arena, batch: &[usize]| -> Vec<Vec<(u32, Vec<Sym>)>> {
        batch
            .par_iter()
            .map(|&i| {
                let mut succ: Vec<(u32, Vec<Sym>)> = Vec::new();
                sys.for_each_successor(nodes.get(i), bounds.max_form_len, &mut |label, w| {
                    if !nodes.contains(w) && !(prune && is_dead(sys, w, bounds.max_terminal_len)) {
                        succ.push((label, w.to_vec()));
                    }
                });
                succ.sort_unstable();
                succ.dedup();
                succ
            })
            .collect()
    };

    let hit = |nodes: &Arena, level: &[usize]| until.is_some_and(|f| level.iter().any(|&i| f(nodes.get(i))));
    let mut depth = 0usize;
    let exhausted = loop {
        if frontier.is_empty() {
            break true;
        }
        if hit(&nodes, &frontier) {
            break false;
        }
        if bounds.max_steps.is_some_and(|max| depth >= max) {
            let grows = frontier
                .chunks(BATCH)
                .any(|batch| expand(&nodes, batch).iter().any(|s| !s.is_empty()));
            break !grows;
        }
        let mut next = Vec::new();
        for batch in frontier.chunks(BATCH) {
            let expanded = expand(&nodes, batch);
            for (&parent, succ) in batch.iter().zip(expanded) {
                for (label, w) in succ {
                    let (i, fresh) = nodes.insert(&w);
                    if fresh {
                        parents.push((parent as u32, label));
                        next.push(i);
                    }
                }
            }
        }
        frontier = next;
        depth += 1;
    };

    Ok(Exploration {
        nodes,
        parents,
        exhausted,
    })
}

fn is_dead<R: Rewriting>(sys: &R, w: &[Sym], max_terminal_len: usize) -> bool {
    let removable = sys.removable();
    let mut fixed_terminals = 0;
    for &s in w {
        if !removable[s as usize] {
            if !sys.is_terminal(std::slice::from_ref(&s)) {
                return true;
            }
            fixed_terminals += 1;
        }
    }
    fixed_terminals > max_terminal_len
}

pub(crate) fn collect_language<R: Rewriting>(
    sys: &R,
    bounds: &EnumerationBounds,
) -> Result<BoundedLanguage, EnumerateError> {
    let exploration = explore(sys, bounds, true, None)?;
    let mut strings = BTreeSet::new();
    let mut witnesses = BTreeMap::new();
    for i in 0..exploration.len() {
        let w = exploration.config(i);
        if w.len() <= bounds.max_terminal_len && sys.is_terminal(w) {
            let word = sys.interner().decode(w);
            witnesses.insert(word.clone(), exploration.witness(sys, i));
            strings.insert(word);
        }
    }
    Ok(BoundedLanguage {
        strings,
        bounds: *bounds,
        witnesses,
        exhausted: exploration.exhausted,
        configurations: exploration.len(),
    })
}

/// Bounded under-approximation of the language of `system`: every terminal
/// string of length at most `max_terminal_len` derivable through sentential
/// forms no longer than `max_form_len`.
pub fn enumerate(system: &MatrixSystem, bounds: &EnumerationBounds) -> Result<BoundedLanguage, EnumerateError> {
    let compiled = CompiledSystem::new(system)?;
    collect_language(&compiled, bounds)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("step {step}: no matrix labelled `{label}`")]
    UnknownLabel { step: usize, label: String },
    #[error("step {step}: matrix `{label}` has {rules} rules but the trace gives {given} intermediates")]
    Arity {
        step: usize,
        label: String,
        rules: usize,
        given: usize,
    },
    #[error("step {step} (`{label}`, rule {rule}): expected `{expected}`, actual one of [{}]", .actual.iter().map(|w| format!("`{w}`")).collect::<Vec<_>>().join(", "))]
    Mismatch {
        step: usize,
        label: String,
        rule: usize,
        expected: Word,
        actual: Vec<Word>,
    },
}

/// Re-executes a trace rule by rule from `start`, checking every
/// intermediate string, and returns the final string.
pub fn replay(trace: &[TraceStep], system: &MatrixSystem, start: &Word) -> Result<Word, ReplayError> {
    let mut current = start.clone();
    for (i, step) in trace.iter().enumerate() {
        let matrix = system
            .matrix(&step.label)
            .ok_or_else(|| ReplayError::UnknownLabel {
                step: i,
                label: step.label.clone(),
            })?
            .normalized();
        if matrix.rules.len() != step.intermediates.len() {
            return Err(ReplayError::Arity {
                step: i,
                label: step.label.clone(),
                rules: matrix.rules.len(),
                given: step.intermediates.len(),
            });
        }
        for (j, (rule, expected)) in matrix.rules.iter().zip(&step.intermediates).enumerate() {
            let actual = apply_rule(&current, rule);
            if !actual.contains(expected) {
                return Err(ReplayError::Mismatch {
                    step: i,
                    label: step.label.clone(),
                    rule: j + 1,
                    expected: expected.clone(),
                    actual: actual.into_iter().collect(),
                });
            }
            current = expected.clone();
        }
    }
    Ok(current)
}

/// Checks a chain given only by matrix labels and the string after each
/// matrix application.
pub fn replay_chain(system: &MatrixSystem, start: &Word, chain: &[(&str, Word)]) -> Result<Word, ReplayError> {
    let mut current = start.clone();
    for (i, (label, expected)) in chain.iter().enumerate() {
        let matrix = system.matrix(label).ok_or_else(|| ReplayError::UnknownLabel {
            step: i,
            label: label.to_string(),
        })?;
        let actual = apply_matrix(&current, matrix);
        if !actual.contains(expected) {
            return Err(ReplayError::Mismatch {
                step: i,
                label: label.to_string(),
                rule: matrix.width(),
                expected: expected.clone(),
                actual: actual.into_iter().collect(),
            });
        }
        current = expected.clone();
    }
    Ok(current)
}
