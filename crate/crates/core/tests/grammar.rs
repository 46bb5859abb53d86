mod common;

use std::collections::BTreeSet;

use matinsdel::grammar::{LinearRule, Side};
use matinsdel::verify::ScanTarget;
use matinsdel::{
    enumerate_grammar, scan_invariant, split_linear, validate_gnf, EnumerationBounds, GeffertGrammar, Grammar,
    Predicate, Production, SpecialGeffertGrammar, Word,
};
use proptest::prelude::*;

fn special(nonterminals: &[&str], rules: &[(&str, &str)]) -> SpecialGeffertGrammar {
    SpecialGeffertGrammar {
        nonterminals: nonterminals.iter().map(|s| s.to_string()).collect(),
        terminals: vec!["a".into(), "b".into(), "c".into()],
        rules: rules
            .iter()
            .enumerate()
            .map(|(i, (l, r))| Production::new(format!("r{}", i + 1), *l, *r))
            .collect(),
        final_erase: true,
    }
}

fn corpus_grammar(name: &str) -> Grammar {
    common::corpus().into_iter().find(|(n, _)| n == name).unwrap().1
}

fn strings(g: &Grammar, bounds: &EnumerationBounds) -> BTreeSet<Word> {
    enumerate_grammar(g, bounds).unwrap().strings
}

fn set(items: &[&str]) -> BTreeSet<Word> {
    items.iter().map(|w| Word::parse(w)).collect()
}

#[test]
fn two_terminals_on_the_right_is_a_violation() {
    let g = special(&["S", "S'", "X"], &[("S", "a X"), ("X", "b c")]);
    let v = g.validate();
    assert_eq!(v.len(), 1, "{v:?}");
    assert_eq!(v[0].location, "rule r2");
}

#[test]
fn shared_right_hand_side_is_a_violation() {
    let g = special(
        &["S", "S'", "X", "U", "Y"],
        &[("S", "a X"), ("X", "b Y"), ("U", "b Y"), ("Y", "c S'")],
    );
    let v = validate_gnf(&g.into());
    assert_eq!(v.len(), 1, "{v:?}");
    assert!(v[0].message.contains("shared"));
}

#[test]
fn corpus_validates() {
    let corpus = common::corpus();
    assert_eq!(corpus.len(), 7);
    for (name, g) in &corpus {
        assert!(validate_gnf(g).is_empty(), "{name}: {:?}", validate_gnf(g));
    }
}

#[test]
fn corpus_covers_required_shapes() {
    let shapes = |g: &SpecialGeffertGrammar| -> Vec<LinearRule> { g.linear_rules().unwrap() };
    let specials: Vec<(String, SpecialGeffertGrammar)> = common::corpus()
        .into_iter()
        .filter_map(|(n, g)| match g {
            Grammar::Special(g) => Some((n, g)),
            Grammar::Geffert(_) => None,
        })
        .collect();
    assert!(specials.iter().any(|(_, g)| {
        let s = shapes(g);
        s.iter().any(|r| r.side == Side::Left) && s.iter().any(|r| r.side == Side::Right)
    }));
    assert!(specials
        .iter()
        .any(|(_, g)| g.rules.iter().any(|r| r.rhs.count("C") > 0)));
    assert!(specials.iter().any(|(_, g)| g.rules.len() >= 6));
}

#[test]
fn small_corpus_languages() {
    let bounds = EnumerationBounds::for_length(4);
    assert_eq!(strings(&corpus_grammar("g1"), &bounds), set(&["."]));
    assert_eq!(strings(&corpus_grammar("g2"), &bounds), set(&["c"]));
    assert_eq!(
        strings(&corpus_grammar("g3"), &EnumerationBounds::new(3, 12, None)),
        set(&["c"])
    );
    assert_eq!(strings(&corpus_grammar("g4"), &bounds), set(&["c", "a c b"]));
    assert_eq!(strings(&corpus_grammar("g5"), &bounds), set(&["a b"]));
    assert_eq!(strings(&corpus_grammar("g7"), &bounds), set(&["a", "a b"]));
}

#[test]
fn corpus_matches_naive_search() {
    for (name, g) in common::corpus() {
        for k in 0..=4 {
            let form = k + 4;
            let ours = strings(&g, &EnumerationBounds::new(k, form, None));
            assert_eq!(
                common::words(&ours),
                common::grammar_language(&g, k, form),
                "{name} k={k}"
            );
        }
    }
}

#[test]
fn split_one_symbol_contexts() {
    let g = GeffertGrammar {
        terminals: vec![],
        rules: vec![Production::new("g1", "S", "A S B")],
    };
    let s = split_linear(&g);
    let rules: Vec<(&str, String)> = s.rules.iter().map(|r| (r.lhs.as_str(), r.rhs.to_string())).collect();
    assert_eq!(rules, [("S", "A X@1.1".to_owned()), ("X@1.1", "S B".to_owned())]);
}

#[test]
fn split_collapses_unit_loop() {
    let g = GeffertGrammar {
        terminals: vec!["a".into()],
        rules: vec![Production::new("g1", "S", "S"), Production::new("g2", "S", "a")],
    };
    let s = split_linear(&g);
    assert!(s.rules.iter().all(|r| r.label.starts_with("g2")));
    assert!(s.validate().is_empty());
}

#[test]
fn split_preserves_corpus_languages() {
    let bounds = EnumerationBounds::for_length(6);
    for (name, g) in common::corpus() {
        if let Grammar::Geffert(g) = g {
            let split = split_linear(&g);
            assert!(split.validate().is_empty());
            assert_eq!(strings(&g.into(), &bounds), strings(&split.into(), &bounds), "{name}");
        }
    }
}

#[test]
fn corpus_reachability_invariants() {
    let bounds = EnumerationBounds::new(4, 12, Some(12));
    for (name, g) in common::corpus() {
        let Grammar::Special(special) = &g else { continue };
        for predicate in ["single-nonterminal", "stage-separation"] {
            let p = Predicate::named(predicate, Some(special)).unwrap();
            let result = scan_invariant(ScanTarget::Grammar(&g), &bounds, &p).unwrap();
            assert!(result.violation.is_none(), "{name} {predicate}: {:?}", result.violation);
            assert!(result.configurations > 0);
        }
    }
}

fn geffert() -> impl Strategy<Value = GeffertGrammar> {
    let left = prop::collection::vec(prop::sample::select(vec!["A", "C"]), 0..=2);
    let right = prop::collection::vec(prop::sample::select(vec!["B", "D"]), 0..=2);
    let body = prop::collection::vec(prop::sample::select(vec!["a", "b", "A", "B", "C", "D"]), 0..=2);
    let looping = (left, right).prop_map(|(l, r)| [l, vec!["S"], r].concat());
    let rule = prop_oneof![looping, body];
    prop::collection::vec(rule, 1..=4).prop_map(|rhss| GeffertGrammar {
        terminals: vec!["a".into(), "b".into()],
        rules: rhss
            .into_iter()
            .enumerate()
            .map(|(i, rhs)| Production::new(format!("g{}", i + 1), "S", Word::from_symbols(rhs)))
            .collect(),
    })
}

const LINEAR_NAMES: [&str; 4] = ["S", "S'", "N1", "N2"];

fn special_grammar() -> impl Strategy<Value = SpecialGeffertGrammar> {
    let emit = prop::sample::select(vec!["a", "b", "A", "B", "C", "D"]);
    let lhs = prop::sample::select(vec!["S", "N1", "N2"]);
    let next = prop::sample::select(LINEAR_NAMES.to_vec());
    let rule = (lhs, emit, next, any::<bool>()).prop_map(|(x, e, y, left)| {
        let rhs = if left { format!("{e} {y}") } else { format!("{y} {e}") };
        (x, rhs)
    });
    prop::collection::vec(rule, 1..=5)
        .prop_map(|rules| SpecialGeffertGrammar {
            nonterminals: LINEAR_NAMES.iter().map(|s| s.to_string()).collect(),
            terminals: vec!["a".into(), "b".into()],
            rules: rules
                .into_iter()
                .enumerate()
                .map(|(i, (x, rhs))| Production::new(format!("r{}", i + 1), x, rhs.as_str()))
                .collect(),
            final_erase: true,
        })
        .prop_filter("valid special grammar", |g| g.validate().is_empty())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_yields_valid_special_grammar(g in geffert()) {
        prop_assume!(g.validate().is_empty());
        let violations = split_linear(&g).validate();
        if !violations.is_empty() {
            // Only loops with an empty right part may collide.
            let mut last_left = BTreeSet::new();
            let collide = g.rules.iter().any(|r| {
                let n = r.rhs.len();
                n >= 2 && r.rhs.0[n - 1] == "S" && !last_left.insert(r.rhs.0[n - 2].clone())
            });
            prop_assert!(collide, "{:?}", violations);
        }
    }

    /// The split grammar may need two more symbols of room for its chain
    /// nonterminals, so each side is checked against the other with that
    /// extra slack.
    #[test]
    fn split_preserves_bounded_language(g in geffert()) {
        prop_assume!(g.validate().is_empty());
        let split = split_linear(&g);
        prop_assume!(split.validate().is_empty());
        let split: Grammar = split.into();
        let g: Grammar = g.into();
        let (tight, loose) = (EnumerationBounds::new(6, 12, None), EnumerationBounds::new(6, 14, None));
        prop_assert!(strings(&g, &tight).is_subset(&strings(&split, &loose)));
        prop_assert!(strings(&split, &tight).is_subset(&strings(&g, &tight)));
    }

    #[test]
    fn enumerate_grammar_matches_naive_search(g in special_grammar(), k in 0usize..=3) {
        let g: Grammar = g.into();
        let ours = strings(&g, &EnumerationBounds::new(k, k + 4, None));
        prop_assert_eq!(common::words(&ours), common::grammar_language(&g, k, k + 4));
    }

    #[test]
    fn one_linear_nonterminal_at_a_time(g in special_grammar()) {
        let p = Predicate::named("single-nonterminal", Some(&g)).unwrap();
        let g: Grammar = g.into();
        let result = scan_invariant(ScanTarget::Grammar(&g), &EnumerationBounds::new(3, 8, None), &p).unwrap();
        prop_assert!(result.violation.is_none());
    }
}
