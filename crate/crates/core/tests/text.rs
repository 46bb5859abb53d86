mod common;

use matinsdel::{
    compile_theorem, parse_grammar, parse_system, print_grammar, print_system, GeffertGrammar, Grammar, InsDelRule,
    Matrix, MatrixSystem, Production, RuleOp, SpecialGeffertGrammar, Theorem, Word,
};
use proptest::prelude::*;

const NAMES: [&str; 7] = ["S", "S'", "a", "b", "#1@r2", "K@AB", "X@"];

fn word(max: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(prop::sample::select(NAMES.to_vec()), 0..=max).prop_map(Word::from_symbols)
}

fn rule() -> impl Strategy<Value = InsDelRule> {
    (any::<bool>(), word(2), word(2), word(2))
        .prop_map(|(ins, l, b, r)| InsDelRule::new(if ins { RuleOp::Insertion } else { RuleOp::Deletion }, l, b, r))
}

fn system() -> impl Strategy<Value = MatrixSystem> {
    let matrices = prop::collection::vec(prop::collection::vec(rule(), 1..=3), 0..=4);
    (prop::collection::vec(word(4), 1..=3), matrices).prop_map(|(axioms, matrices)| MatrixSystem {
        alphabet: NAMES.iter().map(|s| s.to_string()).collect(),
        terminals: ["a", "b"].iter().map(|s| s.to_string()).collect(),
        axioms,
        matrices: matrices
            .into_iter()
            .enumerate()
            .map(|(i, rules)| Matrix::new(format!("m.{i}"), rules))
            .collect(),
    })
}

fn special() -> impl Strategy<Value = SpecialGeffertGrammar> {
    let rule = (
        prop::sample::select(vec!["S", "N1"]),
        prop::sample::select(vec!["a", "A", "D"]),
        prop::sample::select(vec!["S", "S'", "N1"]),
        any::<bool>(),
    );
    (prop::collection::vec(rule, 0..=4), any::<bool>()).prop_map(|(rules, final_erase)| SpecialGeffertGrammar {
        nonterminals: vec!["S".into(), "S'".into(), "N1".into()],
        terminals: vec!["a".into()],
        rules: rules
            .into_iter()
            .enumerate()
            .map(|(i, (x, e, y, left))| {
                let rhs = if left { format!("{e} {y}") } else { format!("{y} {e}") };
                Production::new(format!("p{i}"), x, rhs.as_str())
            })
            .collect(),
        final_erase,
    })
}

fn geffert() -> impl Strategy<Value = GeffertGrammar> {
    let rhs = prop::collection::vec(prop::sample::select(vec!["S", "a", "A", "B", "C", "D"]), 0..=4);
    prop::collection::vec(rhs, 0..=4).prop_map(|rhss| GeffertGrammar {
        terminals: vec!["a".into(), "b".into()],
        rules: rhss
            .into_iter()
            .enumerate()
            .map(|(i, rhs)| Production::new(format!("q{i}"), "S", Word::from_symbols(rhs)))
            .collect(),
    })
}

#[test]
fn corpus_round_trips() {
    for (name, g) in common::corpus() {
        assert_eq!(parse_grammar(&print_grammar(&g)).unwrap(), g, "{name}");
        let special = match &g {
            Grammar::Special(s) => s.clone(),
            Grammar::Geffert(gnf) => matinsdel::split_linear(gnf),
        };
        for theorem in Theorem::ALL {
            let Ok(out) = compile_theorem(&special, theorem) else {
                continue;
            };
            let text = print_system(&out.system);
            assert_eq!(parse_system(&text).unwrap(), out.system, "{name} {theorem}");
            assert_eq!(print_system(&parse_system(&text).unwrap()), text);
        }
    }
}

#[test]
fn comments_and_commas_are_accepted() {
    let text = "# a system\nmatrix-insdel\nalphabet: S a\nterminals: a\naxioms: S\n\n# rules\nmatrix m: ins(S | a | .), del(. | S | .)\n";
    let sys = parse_system(text).unwrap();
    assert_eq!(
        sys.matrices[0].rules,
        [InsDelRule::ins("S", "a", "."), InsDelRule::del(".", "S", ".")]
    );
}

#[test]
fn parse_errors_carry_line_numbers() {
    let e =
        parse_system("matrix-insdel\nalphabet: a\nterminals: a\naxioms: a\nmatrix m: swap(a | a | a)\n").unwrap_err();
    assert_eq!(e.line, 5);
    assert!(e.to_string().contains('5'));
    let e = parse_grammar("grammar special-gnf\nterminals: a\nnonterminals: S S'\nS => a S'\n").unwrap_err();
    assert_eq!(e.line, 4);
}

proptest! {
    #[test]
    fn system_round_trip(sys in system()) {
        let text = print_system(&sys);
        prop_assert_eq!(parse_system(&text).unwrap(), sys);
    }

    #[test]
    fn special_grammar_round_trip(g in special()) {
        let g = Grammar::Special(g);
        prop_assert_eq!(parse_grammar(&print_grammar(&g)).unwrap(), g);
    }

    #[test]
    fn gnf_grammar_round_trip(g in geffert()) {
        let g = Grammar::Geffert(g);
        prop_assert_eq!(parse_grammar(&print_grammar(&g)).unwrap(), g);
    }
}
