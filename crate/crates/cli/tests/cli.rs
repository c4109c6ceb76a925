use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orthokit"))
        .args(args)
        .env_remove("ORTHOKIT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn check_reports_orthogonality() {
    let o = run(&["check", &fixture("e2.trs")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("orthogonal:        true"));
    assert!(out.contains("right-linear:      false"));
}

#[test]
fn cps_lists_both_orientations() {
    let o = run(&["cps", &fixture("ambiguous.trs")]);
    assert_eq!(stdout(&o).lines().count(), 2);
    let o = run(&["cps", &fixture("e1.trs")]);
    assert_eq!(stdout(&o), "no critical pairs\n");
}

#[test]
fn rewrite_normalizes_combinatory_terms() {
    let o = run(&[
        "rewrite",
        &fixture("cl.trs"),
        "--term",
        "app(app(app(S,K),K),a)",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "a\n");
}

#[test]
fn rewrite_reports_fuel_exhaustion() {
    let o = run(&[
        "rewrite",
        &fixture("loop.trs"),
        "--term",
        "a",
        "--fuel",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("fuel exhausted"));
}

#[test]
fn reducts_one_step_and_parallel() {
    let o = run(&["reducts", &fixture("e1.trs"), "--term", "f(a)"]);
    assert_eq!(stdout(&o), "e:0 -> g(a)\n1:1 -> f(b)\n");
    let o = run(&[
        "reducts",
        &fixture("e1.trs"),
        "--term",
        "f(a)",
        "--parallel",
    ]);
    assert_eq!(stdout(&o), "[] -> f(a)\n[e:0] -> g(a)\n[1:1] -> f(b)\n");
}

#[test]
fn parallel_applies_steps() {
    let o = run(&[
        "parallel",
        &fixture("e2.trs"),
        "--term",
        "h(a,a)",
        "--step",
        "1:1,2:1",
    ]);
    assert_eq!(stdout(&o), "h(b,b)\n");
    let o = run(&[
        "parallel",
        &fixture("e2.trs"),
        "--term",
        "f(a)",
        "--step",
        "e:0,1:1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not parallel"));
}

#[test]
fn join_prints_witness() {
    let o = run(&[
        "join",
        &fixture("e1.trs"),
        "--term",
        "f(a)",
        "--left",
        "e:0",
        "--right",
        "1:1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("join:       g(b)"));
}

#[test]
fn join_explains_non_orthogonality() {
    let o = run(&[
        "join",
        &fixture("nonlinear.trs"),
        "--term",
        "h(a,a)",
        "--left",
        "e:0",
        "--right",
        "e:0",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("variable x occurs 2 times"));
}

#[test]
fn parse_errors_carry_locations() {
    let o = run(&["check", &fixture("malformed.trs")]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("malformed.trs:3:"), "{err}");
    let o = run(&["check", &fixture("strategy.trs")]);
    assert!(
        stderr(&o).contains("2:2: unsupported section `STRATEGY`"),
        "{}",
        stderr(&o)
    );
    let o = run(&["reducts", &fixture("e1.trs"), "--term", "f(a"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--term:1:4"), "{}", stderr(&o));
}

#[test]
fn terms_may_use_fresh_constants() {
    let o = run(&["reducts", &fixture("e1.trs"), "--term", "k(f(c))"]);
    assert_eq!(stdout(&o), "1:0 -> k(g(c))\n");
}

#[test]
fn confluence_verdicts_map_to_exit_codes() {
    let o = run(&[
        "confluence",
        &fixture("ambiguous.trs"),
        "--term",
        "a",
        "--depth",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("a -> b and a -> c"));
    let o = run(&[
        "confluence",
        &fixture("cl.trs"),
        "--term",
        "app(app(K,a),app(I,a))",
        "--depth",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn fuzz_honours_the_seed_variable() {
    let with_flag = run(&[
        "fuzz", "--seed", "3", "--cases", "4", "--terms", "2", "--json",
    ]);
    let with_env = Command::new(env!("CARGO_BIN_EXE_orthokit"))
        .args(["fuzz", "--cases", "4", "--terms", "2", "--json"])
        .env("ORTHOKIT_SEED", "3")
        .output()
        .unwrap();
    assert_eq!(with_flag.stdout, with_env.stdout);
    assert!(stdout(&with_flag).contains("\"seed\": 3"));
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["fuzz", "--suite", "nope"]).status.code(), Some(2));
}
