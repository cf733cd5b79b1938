//! End-to-end tests of the command-line front end.

use std::path::PathBuf;

use hodecomp::ast::alpha_eq;
use hodecomp::cli::{run_cli, EXIT_FAIL, EXIT_OK, EXIT_USAGE};
use hodecomp::parse::{parse_process, Mode};

struct Output {
    code: i32,
    out: String,
    err: String,
}

fn cli(args: &[&str]) -> Output {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_cli(std::iter::once("hodecomp").chain(args.iter().copied()), &mut out, &mut err);
    Output { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

/// A scratch directory unique to one test.
fn scratch(test: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hodecomp-cli-{}-{test}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &std::path::Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn decomposing_inaction_gives_the_two_trio_term() {
    let dir = scratch("zero");
    let src = write(&dir, "zero.ho", "0\n");
    let out = write(&dir, "zero.out", "");
    let o = cli(&["decompose", &src, "--out", &out]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    assert!(o.out.contains("minimal typing: ok"), "{}", o.out);
    assert!(o.out.contains("degree: 1"), "{}", o.out);
    let got = parse_process(&std::fs::read_to_string(&out).unwrap(), Mode::Internal).unwrap();
    let want = parse_process("new #1 : ?<>;end in ~#1!().0 | #1?().0", Mode::Internal).unwrap();
    assert!(alpha_eq(&got, &want), "{got}");
}

#[test]
fn check_reports_typing_and_degree() {
    let dir = scratch("check");
    let good = write(&dir, "good.ho", "free a : !<Int>;end;\nexpect degree 2;\na!(1).0\n");
    let o = cli(&["check", &good]);
    assert_eq!(o.code, EXIT_OK, "{}{}", o.out, o.err);
    assert!(o.out.contains("typing: ok") && o.out.contains("degree: 2"), "{}", o.out);

    let wrong = write(&dir, "wrong.ho", "free a : !<Int>;end;\nexpect degree 5;\na!(1).0\n");
    assert_eq!(cli(&["check", &wrong]).code, EXIT_FAIL);

    let ill = write(&dir, "ill.ho", "new s : !<Int>;end in s!(1).0\n");
    let o = cli(&["check", &ill]);
    assert_eq!(o.code, EXIT_FAIL);
    assert!(o.out.contains("typing: error"), "{}", o.out);
}

#[test]
fn usage_and_parse_errors_exit_with_two() {
    let dir = scratch("usage");
    assert_eq!(cli(&["check", &dir.join("missing.ho").to_string_lossy()]).code, EXIT_USAGE);
    let bad = write(&dir, "bad.ho", "a!(1.0\n");
    let o = cli(&["check", &bad]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.err.contains("parse error"), "{}", o.err);
    assert_eq!(cli(&["frobnicate"]).code, EXIT_USAGE);
    assert_eq!(cli(&["decompose", &bad, "--opt", "trios"]).code, EXIT_USAGE);
    assert_eq!(cli(&["compare", "no-such-entry"]).code, EXIT_USAGE);
}

#[test]
fn compare_on_the_recursion_entry_reaches_the_first_state_in_three_steps() {
    let o = cli(&["compare", "recursion"]);
    assert_eq!(o.code, EXIT_OK, "{}{}", o.out, o.err);
    assert!(o.out.contains("PASS decomposition: P' after 3 steps"), "{}", o.out);
}

#[test]
fn compare_on_a_file_reports_both_step_counts() {
    let dir = scratch("compare");
    let src = write(&dir, "pass.ho", "new s : !<Int>;end in (s!(1).0 | ~s?(x).0)\n");
    let o = cli(&["compare", &src]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    assert!(o.out.contains("source: 1 steps, inert"), "{}", o.out);
    assert!(o.out.contains("decomposition (none):"), "{}", o.out);
}

#[test]
fn run_writes_a_trace_with_one_record_per_step() {
    let dir = scratch("run");
    let src = write(&dir, "pass.ho", "new s : !<Int>;?<Bool>;end in (s!(1).s?(b).0 | ~s?(x).~s!(true).0)\n");
    let trace = dir.join("trace.jsonl");
    let o = cli(&["run", &src, "--trace", &trace.to_string_lossy()]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    assert!(o.out.contains("steps: 2") && o.out.contains("terminal: inert"), "{}", o.out);
    let text = std::fs::read_to_string(&trace).unwrap();
    let records: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 2, "{text}");
    for r in &records {
        assert_eq!(r["rule"], "Pass", "{r}");
        assert!(r.get("path").is_some() && r.get("term").is_some(), "{r}");
    }
}

#[test]
fn exhaustive_runs_list_terminal_states() {
    let dir = scratch("all");
    let src = write(&dir, "race.ho", "new k : chan Int in (k!(1).0 | k!(2).0 | k?(x).0)\n");
    let o = cli(&["run", &src, "--policy", "all"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    assert!(o.out.contains("terminal states: 2"), "{}", o.out);
}

#[test]
fn namepassing_files_are_encoded() {
    let dir = scratch("np");
    let src = write(&dir, "ex.np", "free n : !<!<Int>;end>;end;\nfree m : !<Int>;end;\nn!(m).0\n");
    let o = cli(&["decompose", &src]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    assert!(o.out.contains("minimal typing: ok"), "{}", o.out);
}

#[test]
fn optimized_decompositions_are_minimally_typed() {
    let dir = scratch("opt");
    let src = write(&dir, "seq.ho", "new s : !<Int>;?<Bool>;end in (s!(1).s?(y).0 | ~s?(a).~s!(true).0)\n");
    for opt in ["duos", "monadic"] {
        let o = cli(&["decompose", &src, "--opt", opt]);
        assert_eq!(o.code, EXIT_OK, "{opt}: {}", o.err);
        assert!(o.out.contains("minimal typing: ok"), "{opt}: {}", o.out);
    }
    // The monadic form is defined for monadic sources only.
    let poly = write(&dir, "poly.ho", "new s : !<Int, Bool>;end in (s!(1, true).0 | ~s?(a, b).0)\n");
    assert_eq!(cli(&["decompose", &poly, "--opt", "monadic"]).code, EXIT_FAIL);
    assert_eq!(cli(&["decompose", &poly, "--opt", "duos"]).code, EXIT_OK);
}

#[test]
fn corpus_replay_passes_apart_from_known_red_checks() {
    let dir = scratch("corpus");
    let jsonl = dir.join("corpus.jsonl");
    let o = cli(&["corpus", "--out", &jsonl.to_string_lossy()]);
    assert_eq!(o.code, EXIT_OK, "{}{}", o.out, o.err);
    assert!(o.out.contains(" 0 failed, 2 known red"), "{}", o.out);
    let lines = std::fs::read_to_string(&jsonl).unwrap();
    assert!(lines.lines().count() > 20);
    let ex4 = cli(&["corpus", "--entry", "example4-namepass", "--opt", "none"]);
    assert_eq!(ex4.code, EXIT_OK);
    assert!(ex4.out.contains("degree [[P]]") && ex4.out.contains("19"), "{}", ex4.out);
}
