use std::collections::BTreeSet;

use orthokit_core::oracle::{
    check_diamond, check_inclusion_chain, check_triangle, combinatory_logic, Verdict,
};
use orthokit_core::parallel::{parse_step_items, DEFAULT_STEP_CAP};
use orthokit_core::{
    analyze, apply_parallel, critical_pairs, join_parallel_divergence, parallel_reducts_bounded,
    parse_term, parse_trs, print_trs, triangle_join, JoinError, ParallelStep, Position, Redex,
    Term, Trs,
};

fn load(text: &str) -> Trs {
    parse_trs(text).expect("fixture parses")
}

fn term(trs: &Trs, text: &str) -> Term {
    parse_term(text, trs.signature(), &BTreeSet::new()).expect("term parses")
}

fn step(trs: &Trs, s: &Term, text: &str) -> ParallelStep {
    ParallelStep::infer(trs, s, &parse_step_items(text).unwrap()).unwrap()
}

const E1: &str = "(VAR x) (RULES f(x) -> g(x) a -> b)";
const E2: &str = "(VAR x) (RULES f(x) -> h(x,x) a -> b)";

#[test]
fn e1_divergence_joins_at_g_b() {
    let e1 = load(E1);
    let s = term(&e1, "f(a)");
    let w =
        join_parallel_divergence(&e1, &s, &step(&e1, &s, "e:0"), &step(&e1, &s, "1:1")).unwrap();
    assert_eq!(w.join_term, term(&e1, "g(b)"));
    assert_eq!(w.step_from_left.to_string(), "1:1");
    assert_eq!(w.step_from_right.to_string(), "e:0");
    let reducts: BTreeSet<Term> = parallel_reducts_bounded(&e1, &w.left_result, DEFAULT_STEP_CAP)
        .unwrap()
        .into_iter()
        .map(|(_, t)| t)
        .collect();
    assert!(reducts.contains(&w.join_term));
}

#[test]
fn e2_duplicates_the_residual() {
    let e2 = load(E2);
    let s = term(&e2, "f(a)");
    let w =
        join_parallel_divergence(&e2, &s, &step(&e2, &s, "e:0"), &step(&e2, &s, "1:1")).unwrap();
    assert_eq!(w.left_result, term(&e2, "h(a,a)"));
    assert_eq!(w.join_term, term(&e2, "h(b,b)"));
    assert_eq!(w.step_from_left.to_string(), "1:1,2:1");
    assert_eq!(
        apply_parallel(&e2, &w.right_result, &w.step_from_right).unwrap(),
        w.join_term
    );
}

#[test]
fn equal_steps_join_reflexively() {
    let e1 = load(E1);
    let s = term(&e1, "f(a)");
    let l = step(&e1, &s, "1:1");
    let w = join_parallel_divergence(&e1, &s, &l, &l).unwrap();
    assert_eq!(w.join_term, w.left_result);
    assert!(w.step_from_left.is_empty() && w.step_from_right.is_empty());
}

#[test]
fn join_rejects_non_orthogonal_systems() {
    let amb = load("(RULES a -> b a -> c)");
    let s = term(&amb, "a");
    let err = join_parallel_divergence(&amb, &s, &step(&amb, &s, "e:0"), &step(&amb, &s, "e:1"))
        .unwrap_err();
    assert!(matches!(err, JoinError::NotOrthogonal));
}

#[test]
fn triangle_on_parallel_redexes() {
    let trs = load("(VAR x) (RULES h2(c,x) -> x a -> b)");
    let s = term(&trs, "h2(a,a)");
    let r = |p: &str| Redex {
        position: p.parse::<Position>().unwrap(),
        rule: 1,
        subst: Default::default(),
    };
    let j = triangle_join(&trs, &s, &r("1"), &r("2")).unwrap();
    assert_eq!(j.join_term, term(&trs, "h2(b,b)"));
    assert!(j.from_left.is_some() && j.from_right.is_some());
}

#[test]
fn classification_of_fixture_systems() {
    assert!(analyze(&load(E1)).orthogonal);
    let e2 = analyze(&load(E2));
    assert!(e2.orthogonal && !e2.right_linear);
    let nl = analyze(&load("(VAR x) (RULES h(x,x) -> x)"));
    assert!(!nl.left_linear);
    assert_eq!(nl.offending_rules[0].occurrences, 2);
    let cps = critical_pairs(&load("(VAR x) (RULES f(g(x)) -> a g(b) -> c)"));
    assert_eq!(cps.len(), 1);
    assert_eq!(
        (cps[0].left.to_string(), cps[0].right.to_string()),
        ("f(c)".into(), "a".into())
    );
    assert_eq!(cps[0].mgu.to_string(), "{x#0↦b}");
}

#[test]
fn checkers_pass_on_small_systems() {
    let e1 = load(E1);
    let s = term(&e1, "f(a)");
    assert_eq!(check_inclusion_chain(&e1, &s).verdict(), Verdict::Pass);
    assert_eq!(check_diamond(&e1, &s).verdict(), Verdict::Pass);
    assert_eq!(check_triangle(&e1, &s).verdict(), Verdict::Pass);
    let cl = combinatory_logic();
    let s = term(&cl, "app(app(app(S,K),K),app(I,app(K,S)))");
    assert_eq!(check_diamond(&cl, &s).verdict(), Verdict::Pass);
}

#[test]
fn printed_systems_parse_back() {
    let cl = combinatory_logic();
    assert_eq!(load(&print_trs(&cl)).rules(), cl.rules());
}
