//! Definitional reference implementations used as oracles by the
//! integration tests. Deliberately naive: strings are `Vec<String>`, rule
//! application follows the textbook definition split by split, and the
//! language search keeps every configuration in a `HashSet`.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::path::PathBuf;

use matinsdel::grammar::{ERASERS, FINAL, START};
use matinsdel::{Grammar, InsDelRule, Matrix, MatrixSystem, RuleOp, Word};

pub type Str = Vec<String>;

pub fn s(text: &str) -> Str {
    Word::parse(text).0
}

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn corpus() -> Vec<(String, Grammar)> {
    (1..=7)
        .map(|i| {
            let name = format!("g{i}");
            let text = std::fs::read_to_string(data(&format!("{name}.grammar"))).unwrap();
            (name, matinsdel::parse_grammar(&text).unwrap())
        })
        .collect()
}

fn ends_with(w: &[String], suffix: &[String]) -> bool {
    w.len() >= suffix.len() && w[w.len() - suffix.len()..] == *suffix
}

fn starts_with(w: &[String], prefix: &[String]) -> bool {
    w.len() >= prefix.len() && w[..prefix.len()] == *prefix
}

/// `x = w1 u v w2  =>  w1 u α v w2` (insertion) and
/// `x = w1 u α v w2  =>  w1 u v w2` (deletion), over all factorizations.
pub fn apply_rule(w: &[String], rule: &InsDelRule) -> BTreeSet<Str> {
    let (u, alpha, v) = (&rule.left.0, &rule.body.0, &rule.right.0);
    let mut out = BTreeSet::new();
    match rule.op {
        RuleOp::Insertion => {
            for i in 0..=w.len() {
                let (x, y) = w.split_at(i);
                if ends_with(x, u) && starts_with(y, v) {
                    out.insert([x, alpha.as_slice(), y].concat());
                }
            }
        }
        RuleOp::Deletion => {
            for i in 0..=w.len() {
                for j in i..=w.len() {
                    let (x, rest) = w.split_at(i);
                    let (mid, y) = rest.split_at(j - i);
                    if mid == alpha.as_slice() && ends_with(x, u) && starts_with(y, v) {
                        out.insert([x, y].concat());
                    }
                }
            }
        }
    }
    out
}

/// Relational composition of the rule relations, in matrix order.
pub fn apply_matrix(w: &[String], m: &Matrix) -> BTreeSet<Str> {
    let mut current = BTreeSet::from([w.to_vec()]);
    for rule in &m.rules {
        let mut next = BTreeSet::new();
        for x in &current {
            next.extend(apply_rule(x, rule));
        }
        current = next;
    }
    current
}

/// Terminal strings of length `<= k` reachable through configurations of
/// length `<= form`, optionally within `steps` transitions.
pub fn system_language(sys: &MatrixSystem, k: usize, form: usize, steps: Option<usize>) -> BTreeSet<Str> {
    let successors = |w: &Str| -> Vec<Str> {
        sys.matrices
            .iter()
            .flat_map(|m| apply_matrix(w, m))
            .filter(|x| x.len() <= form)
            .collect()
    };
    let is_terminal = |w: &Str| w.iter().all(|x| sys.terminals.contains(x));
    let axioms: Vec<Str> = sys.axioms.iter().map(|a| a.0.clone()).collect();
    bfs(axioms, successors, is_terminal, k, steps)
}

/// Semi-Thue rules `lhs -> rhs` of a grammar, erasers included.
pub fn grammar_rules(g: &Grammar) -> (Vec<(Str, Str)>, BTreeSet<String>) {
    let mut rules = Vec::new();
    let (productions, final_erase) = match g {
        Grammar::Special(g) => (&g.rules, g.final_erase),
        Grammar::Geffert(g) => (&g.rules, false),
    };
    for p in productions {
        rules.push((vec![p.lhs.clone()], p.rhs.0.clone()));
    }
    if final_erase {
        rules.push((vec![FINAL.to_owned()], vec![]));
    }
    for (a, b) in ERASERS {
        rules.push((vec![a.to_owned(), b.to_owned()], vec![]));
    }
    (rules, g.terminals().iter().cloned().collect())
}

pub fn grammar_language(g: &Grammar, k: usize, form: usize) -> BTreeSet<Str> {
    let (rules, terminals) = grammar_rules(g);
    let successors = |w: &Str| -> Vec<Str> {
        let mut out = Vec::new();
        for (lhs, rhs) in &rules {
            for i in 0..w.len() {
                if starts_with(&w[i..], lhs) {
                    let x = [&w[..i], rhs.as_slice(), &w[i + lhs.len()..]].concat();
                    if x.len() <= form {
                        out.push(x);
                    }
                }
            }
        }
        out
    };
    let is_terminal = |w: &Str| w.iter().all(|x| terminals.contains(x));
    bfs(vec![vec![START.to_owned()]], successors, is_terminal, k, None)
}

fn bfs(
    axioms: Vec<Str>,
    successors: impl Fn(&Str) -> Vec<Str>,
    is_terminal: impl Fn(&Str) -> bool,
    k: usize,
    steps: Option<usize>,
) -> BTreeSet<Str> {
    let mut seen: HashSet<Str> = axioms.iter().cloned().collect();
    let mut queue: VecDeque<(Str, usize)> = axioms.into_iter().map(|a| (a, 0)).collect();
    let mut found = BTreeSet::new();
    while let Some((w, depth)) = queue.pop_front() {
        if w.len() <= k && is_terminal(&w) {
            found.insert(w.clone());
        }
        if steps.is_some_and(|max| depth >= max) {
            continue;
        }
        for x in successors(&w) {
            if seen.insert(x.clone()) {
                queue.push_back((x, depth + 1));
            }
        }
    }
    found
}

pub fn words(set: &BTreeSet<Word>) -> BTreeSet<Str> {
    set.iter().map(|w| w.0.clone()).collect()
}
