mod common;

use std::collections::{BTreeSet, HashSet, VecDeque};

use matinsdel::engine::{replay_chain, step};
use matinsdel::verify::{scan_invariant, ScanTarget};
use matinsdel::{
    apply_matrix, bounded_equivalence, check_family, compile, compile_theorem, enumerate, replay, size_of, validate,
    CompileError, EnumerationBounds, Grammar, InsDelRule, MatrixSystem, Predicate, Production, SizeVector,
    SpecialGeffertGrammar, Theorem, Word,
};
use proptest::prelude::*;

fn special(name: &str) -> SpecialGeffertGrammar {
    match common::corpus().into_iter().find(|(n, _)| n == name).unwrap().1 {
        Grammar::Special(g) => g,
        Grammar::Geffert(g) => matinsdel::split_linear(&g),
    }
}

fn system(name: &str, theorem: Theorem) -> MatrixSystem {
    compile_theorem(&special(name), theorem).unwrap().system
}

fn chain<'a>(steps: &[(&'a str, &str)]) -> Vec<(&'a str, Word)> {
    steps.iter().map(|(l, w)| (*l, Word::parse(w))).collect()
}

fn set(items: &[&str]) -> BTreeSet<Word> {
    items.iter().map(|w| Word::parse(w)).collect()
}

#[test]
fn t1_linear_rule_and_eraser() {
    let sys = system("g2", Theorem::T1);
    assert_eq!(
        sys.matrix("r1").unwrap().rules,
        [
            InsDelRule::ins("S", "S'", "."),
            InsDelRule::ins("S", "c", "."),
            InsDelRule::del(".", "S", ".")
        ]
    );
    assert_eq!(sys.matrix("AB").unwrap().rules, [InsDelRule::del(".", "A B", ".")]);
    assert_eq!(sys.matrix("S'").unwrap().rules, [InsDelRule::del(".", "S'", ".")]);
    assert_eq!(sys.axioms, [Word::parse("S")]);
}

#[test]
fn t2_key_must_precede_eraser() {
    let sys = system("g1", Theorem::T2);
    let ab2 = sys.matrix("AB.2").unwrap();
    assert!(apply_matrix(&"$ A B".into(), ab2).is_empty());
    let keyed = apply_matrix(&"$ A B".into(), sys.matrix("AB.1").unwrap());
    assert!(keyed.contains(&Word::parse("K@AB A B")));
    assert_eq!(apply_matrix(&"K@AB A B".into(), ab2), set(&["K@AB"]));
    assert_eq!(sys.axioms, [Word::parse("$ S")]);
}

#[test]
fn t3_mirrors_eraser_deletions() {
    let out = compile_theorem(&special("g1"), Theorem::T3).unwrap();
    assert_eq!(
        out.system.matrix("AB.2").unwrap().rules,
        [InsDelRule::del(".", "B", "K@AB"), InsDelRule::del(".", "A", "K@AB")]
    );
    assert_eq!(size_of(&out.system), SizeVector::new(1, 1, 0, 1, 0, 1));
    assert_eq!(
        apply_matrix(&"A B K@AB".into(), out.system.matrix("AB.2").unwrap()),
        set(&["K@AB"])
    );
}

#[test]
fn t4_shapes() {
    let sys = system("g2", Theorem::T4);
    assert_eq!(
        sys.matrix("r1").unwrap().rules,
        [InsDelRule::ins(".", "c S'", "."), InsDelRule::del("S'", "S", ".")]
    );
    assert_eq!(
        sys.matrix("S'").unwrap().rules,
        [InsDelRule::del(".", "S'", "."), InsDelRule::ins(".", "$", ".")]
    );

    // The residue X@S1 of S1 -> S b stays until `$` appears.
    let sys = system("g4", Theorem::T4);
    let residue = replay_chain(
        &sys,
        &"a S1".into(),
        &chain(&[("r2.1", "a X@S1 Y@S1"), ("r2.2", "a X@S1 S b")]),
    )
    .unwrap();
    assert!(apply_matrix(&residue, sys.matrix("r2.3").unwrap()).is_empty());
    assert!(apply_matrix(&"$ a X@S1 c b".into(), sys.matrix("r2.3").unwrap()).contains(&Word::parse("$ a c b")));
}

#[test]
fn t6_chain_replays() {
    let sys = system("g4", Theorem::T6);
    let end = replay_chain(
        &sys,
        &"$ a S1 b".into(),
        &chain(&[
            ("r2.1", "$ a #1@r2 #2@r2 b"),
            ("r2.2", "$ a S #2@r2 b"),
            ("r2.3", "$ a S #3@r2 #4@r2 b"),
            ("r2.4", "$ a S #3@r2 #5@r2 b b"),
            ("r2.5", "a S K@r2 #3@r2 #5@r2 b b"),
            ("r2.7", "a S K@r2 b b"),
            ("r2.6", "$ a S b b"),
        ]),
    )
    .unwrap();
    assert_eq!(end, Word::parse("$ a S b b"));
}

#[test]
fn t6_first_matrices_are_rewrites() {
    let sys = system("g4", Theorem::T6);
    for (label, from, to) in [
        ("r2.1", "S1", "#1@r2 #2@r2"),
        ("r2.2", "#1@r2", "S"),
        ("r2.3", "#2@r2", "#3@r2 #4@r2"),
        ("r2.4", "#4@r2", "#5@r2 b"),
    ] {
        let w = Word::parse(&format!("a {from} c"));
        assert_eq!(
            apply_matrix(&w, sys.matrix(label).unwrap()),
            set(&[&format!("a {to} c")]),
            "{label}"
        );
    }
    assert!(sys.matrices.iter().all(|m| m.width() <= 2));
}

#[test]
fn t7_right_linear_chain_replays() {
    let sys = system("g4", Theorem::T7);
    let end = replay_chain(
        &sys,
        &"a X@ S1 b Y@".into(),
        &chain(&[
            ("r2.1", "a X@ b Y@ p@r2"),
            ("r2.2", "a X@ b b Y@ p'@r2 p@r2"),
            ("r2.3", "a X@ S b b Y@"),
        ]),
    )
    .unwrap();
    assert_eq!(end, Word::parse("a X@ S b b Y@"));
}

/// `w1 X A w2 Y` ends as `w1 b X C w2 Y`, with `X` in front of the new
/// nonterminal.
#[test]
fn t7_left_linear_chain_replays() {
    let sys = system("g4", Theorem::T7);
    let end = replay_chain(
        &sys,
        &"c X@ S b Y@".into(),
        &chain(&[
            ("r1.1", "c X@ b Y@ p@r1"),
            ("r1.2", "c X@ C1@r1 b Y@ #@r1 p@r1"),
            ("r1.3", "c X@ C1@r1 b Y@ p2@r1 #'@r1 #@r1 p@r1"),
            ("r1.4", "c X@ C1@r1 b Y@ p3@r1 p2@r1 p@r1"),
            ("r1.5", "c X@ a C1@r1 b Y@ p3@r1 p@r1"),
            ("r1.6", "c a C1@r1 C2@r1 b Y@ p3@r1 p@r1"),
            ("r1.7", "c a C1@r1 C2@r1 X@ b Y@"),
            ("r1.8", "c a X@ S1 b Y@"),
        ]),
    )
    .unwrap();
    assert_eq!(end, Word::parse("c a X@ S1 b Y@"));
}

#[test]
fn t7_repeated_emission_is_a_dead_end() {
    let mut sys = system("g4", Theorem::T7);
    let stuck = replay_chain(
        &sys,
        &"a X@ S1 b Y@".into(),
        &chain(&[
            ("r2.1", "a X@ b Y@ p@r2"),
            ("r2.2", "a X@ b b Y@ p'@r2 p@r2"),
            ("r2.2", "a X@ b b b Y@ p'@r2 p'@r2 p@r2"),
        ]),
    )
    .unwrap();
    sys.axioms = vec![stuck];
    let lang = enumerate(&sys, &EnumerationBounds::new(4, 12, None)).unwrap();
    assert!(lang.strings.is_empty());
    assert!(lang.exhausted);
}

/// Breadth-first search over configurations paired with a flag recording
/// whether `r1.3` ever fired with no `#@r1` present.
#[test]
fn t7_stack_symbol_before_marker_never_terminates() {
    let sys = system("g4", Theorem::T7);
    let form = 8;
    let start = (sys.axioms[0].clone(), false);
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    let mut flagged = 0;
    while let Some((w, early)) = queue.pop_front() {
        if early {
            flagged += 1;
            assert!(!sys.is_terminal_word(&w), "terminal {w} after early r1.3");
        }
        for (label, x) in step(&w, &sys) {
            if x.len() > form {
                continue;
            }
            let early = early || (label == "r1.3" && w.count("#@r1") == 0);
            if seen.insert((x.clone(), early)) {
                queue.push_back((x, early));
            }
        }
    }
    assert!(flagged > 0, "the flagged branch was never explored");
}

#[test]
fn dispatch_and_errors() {
    let g2 = special("g2");
    assert_eq!(compile(&g2, "t5").unwrap_err(), CompileError::NoConstruction);
    assert!(compile(&g2, "t5").unwrap_err().to_string().contains("no construction"));
    assert_eq!(compile(&g2, "t1").unwrap(), compile_theorem(&g2, Theorem::T1).unwrap());
    let g1 = special("g1");
    assert_eq!(compile(&g1, "t6").unwrap(), compile_theorem(&g1, Theorem::T6).unwrap());

    let mut bad = g2.clone();
    bad.rules.push(Production::new("r9", "S", "c c"));
    assert!(matches!(compile(&bad, "t4"), Err(CompileError::InvalidGrammar(_))));
}

#[test]
fn small_equivalences() {
    for theorem in Theorem::ALL {
        let report = bounded_equivalence(
            &special("g2").into(),
            &system("g2", theorem),
            &EnumerationBounds::for_length(3),
        )
        .unwrap();
        assert!(report.equal, "{theorem}: {report}");
        let lang = enumerate(&system("g2", theorem), &EnumerationBounds::for_length(3)).unwrap();
        assert_eq!(lang.strings, set(&["c"]), "{theorem}");
    }
    for theorem in [Theorem::T2, Theorem::T7] {
        let report = bounded_equivalence(
            &special("g1").into(),
            &system("g1", theorem),
            &EnumerationBounds::for_length(2),
        )
        .unwrap();
        assert!(report.equal, "{theorem}: {report}");
        assert_eq!(report.grammar_strings, 1);
    }
}

#[test]
fn corpus_outputs_are_well_formed_and_hygienic() {
    for (name, _) in common::corpus() {
        let g = special(&name);
        for theorem in Theorem::ALL {
            let out = match compile_theorem(&g, theorem) {
                Err(CompileError::SelfLoop(_)) => continue,
                other => other.unwrap(),
            };
            assert!(
                validate(&out.system).is_empty(),
                "{name} {theorem}: {:?}",
                validate(&out.system)
            );
            assert!(check_family(&out).is_empty(), "{name} {theorem}");
            let terminals: BTreeSet<&String> = out.system.terminals.iter().collect();
            assert_eq!(terminals, g.terminals.iter().collect(), "{name} {theorem}");
            for fresh in out.symbol_table.keys() {
                assert!(!g.terminals.contains(fresh) && !g.nonterminals.contains(fresh));
            }
            let lang = enumerate(&out.system, &EnumerationBounds::with_slack(2, 4)).unwrap();
            for (w, witness) in &lang.witnesses {
                assert_eq!(&replay(&witness.steps, &out.system, &witness.axiom).unwrap(), w);
            }
        }
    }
}

#[test]
fn marker_count_holds_and_mutation_breaks_it() {
    let bounds = EnumerationBounds::new(2, 12, Some(12));
    for name in ["g1", "g2"] {
        for theorem in [Theorem::T2, Theorem::T4, Theorem::T6] {
            let sys = system(name, theorem);
            let result = scan_invariant(ScanTarget::System(&sys), &bounds, &Predicate::MarkerCount).unwrap();
            assert!(result.violation.is_none(), "{name} {theorem}: {:?}", result.violation);
        }
    }
    let mut sys = system("g1", Theorem::T2);
    sys.matrix_mut("AB.3").unwrap().rules = vec![InsDelRule::ins(".", "$", "."), InsDelRule::ins(".", "$", ".")];
    let result = scan_invariant(ScanTarget::System(&sys), &bounds, &Predicate::MarkerCount).unwrap();
    let violation = result.violation.expect("two markers must be reachable");
    assert!(violation.configuration.count("$") >= 2);
    assert_eq!(
        replay(&violation.witness.steps, &sys, &violation.witness.axiom).unwrap(),
        violation.configuration
    );
}

fn linear_grammar() -> impl Strategy<Value = SpecialGeffertGrammar> {
    const NAMES: [&str; 4] = ["S", "S'", "N1", "N2"];
    let rule = (
        prop::sample::select(vec!["S", "N1", "N2"]),
        prop::sample::select(vec!["a", "b", "A", "B", "C", "D"]),
        prop::sample::select(NAMES.to_vec()),
        any::<bool>(),
    );
    prop::collection::vec(rule, 1..=6)
        .prop_map(|rules| SpecialGeffertGrammar {
            nonterminals: NAMES.iter().map(|s| s.to_string()).collect(),
            terminals: vec!["a".into(), "b".into()],
            rules: rules
                .into_iter()
                .enumerate()
                .map(|(i, (x, e, y, left))| {
                    let rhs = if left { format!("{e} {y}") } else { format!("{y} {e}") };
                    Production::new(format!("r{}", i + 1), x, rhs.as_str())
                })
                .collect(),
            final_erase: true,
        })
        .prop_filter("valid special grammar", |g| g.validate().is_empty())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn family_conformance(g in linear_grammar()) {
        for theorem in Theorem::ALL {
            match compile_theorem(&g, theorem) {
                Ok(out) => {
                    prop_assert!(check_family(&out).is_empty(), "{} {:?}", theorem, check_family(&out));
                    prop_assert!(validate(&out.system).is_empty());
                }
                Err(CompileError::SelfLoop(label)) => {
                    prop_assert!(matches!(theorem, Theorem::T1 | Theorem::T2 | Theorem::T3));
                    let r = g.rules.iter().find(|r| r.label == label).unwrap();
                    prop_assert!(r.rhs.symbols().any(|s| s == r.lhs));
                }
                Err(e) => prop_assert!(false, "{}: {}", theorem, e),
            }
        }
    }

    #[test]
    fn compilation_is_deterministic(g in linear_grammar()) {
        for theorem in Theorem::ALL {
            prop_assert_eq!(compile_theorem(&g, theorem), compile_theorem(&g, theorem));
        }
    }
}
