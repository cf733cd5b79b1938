//! Acceptance harness: one status line per criterion, followed by indented
//! detail lines. Exits non-zero when a criterion fails for a reason that is
//! not recorded as known red.

mod common;

use std::process::ExitCode;

use hodecomp::ast::{free_names, Linearity, Process, Value};
use hodecomp::corpus::{self, check_run, Entry, Snippet, RUN_FUEL};
use hodecomp::decompose::{audit_propagators, decompose, degree, degree_value};
use hodecomp::optimize::{decompose_with, thunk_param_type, Optimization};
use hodecomp::parse::{parse_process, parse_stype, parse_value, Mode};
use hodecomp::semantics::{run, Terminal};
use hodecomp::typeck::{check_minimal_typed, check_with_frees};
use hodecomp::types::{findex, gdecomp, rsdecomp, SType};

use common::gen::{prefix_depth, sample, Coverage, MAX_DEPTH};

/// Generated processes in the property suite.
const RANDOM_COUNT: usize = 250;
/// Minimum number of generated processes the suite must cover.
const RANDOM_MIN: usize = 200;
/// Depth bound of the subject-reduction exploration.
const SR_FUEL: usize = 50;
/// State bound per corpus process in the subject-reduction exploration.
const SR_MAX_STATES: usize = 200_000;
/// Generated processes also explored for subject reduction, and their state bound.
const SR_RANDOM_COUNT: usize = 60;
const SR_RANDOM_MAX_STATES: usize = 2_000;
/// Largest nesting of prefixes allowed in duo form outside thunk bodies.
const DUO_DEPTH: usize = 2;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    KnownRed,
    Fail,
}

struct Check {
    status: Status,
    text: String,
}

impl Check {
    fn new(ok: bool, text: impl Into<String>) -> Check {
        Check { status: if ok { Status::Pass } else { Status::Fail }, text: text.into() }
    }
    fn red(ok: bool, text: impl Into<String>, why: &str) -> Check {
        let text = text.into();
        if ok {
            Check { status: Status::Pass, text }
        } else {
            Check { status: Status::KnownRed, text: format!("{text} [known red: {why}]") }
        }
    }
}

struct Criterion {
    id: u32,
    title: &'static str,
    checks: Vec<Check>,
}

impl Criterion {
    fn status(&self) -> Status {
        if self.checks.is_empty() || self.checks.iter().any(|c| c.status == Status::Fail) {
            Status::Fail
        } else if self.checks.iter().any(|c| c.status == Status::KnownRed) {
            Status::KnownRed
        } else {
            Status::Pass
        }
    }
    fn print(&self) {
        let label = match self.status() {
            Status::Pass => "PASS",
            Status::KnownRed => "FAIL (known red)",
            Status::Fail => "FAIL",
        };
        let passed = self.checks.iter().filter(|c| c.status == Status::Pass).count();
        println!("{label}: criterion {} ({}): {passed}/{} checks pass", self.id, self.title, self.checks.len());
        for c in &self.checks {
            let mark = match c.status {
                Status::Pass => "ok  ",
                Status::KnownRed => "red ",
                Status::Fail => "FAIL",
            };
            println!("    {mark} {}", c.text);
        }
    }
}

fn stype(s: &str) -> SType {
    parse_stype(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn list(xs: &[SType]) -> String {
    format!("[{}]", xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))
}

fn slices(label: &str, got: Result<Vec<SType>, impl std::fmt::Display>, want: &[&str]) -> Check {
    let want: Vec<SType> = want.iter().map(|s| stype(s)).collect();
    match got {
        Ok(got) => Check::new(got == want, format!("{label} = {}, expected {}", list(&got), list(&want))),
        Err(e) => Check::new(false, format!("{label}: {e}")),
    }
}

fn type_decomposition() -> Criterion {
    let rec_slices = ["rec t. ?<Int>;t", "rec t. ?<Bool>;t", "rec t. !<Bool>;t"];
    let rec_ty = stype("rec t. ?<Int>;?<Bool>;!<Bool>;t");
    let unfolding = stype("?<Bool>;!<Bool>;rec t. ?<Int>;?<Bool>;!<Bool>;t");
    let idx = |label: &str, s: &SType, want: usize| match findex(s) {
        Ok(i) => Check::new(i == want, format!("findex({label}) = {i}, expected {want}")),
        Err(e) => Check::new(false, format!("findex({label}): {e}")),
    };
    Criterion {
        id: 1,
        title: "type decomposition",
        checks: vec![
            slices(
                "gdecomp(?Int;?Int;!Bool;end)",
                gdecomp(&stype("?<Int>;?<Int>;!<Bool>;end")),
                &["?<Int>;end", "?<Int>;end", "!<Bool>;end"],
            ),
            slices("gdecomp(rec t.?Int;?Bool;!Bool;t)", gdecomp(&rec_ty), &rec_slices),
            slices("rsdecomp(?Bool;!Bool;rec t.?Int;?Bool;!Bool;t)", rsdecomp(&unfolding), &rec_slices),
            idx("rec t.?Int;?Bool;!Bool;t", &rec_ty, 1),
            idx("?Bool;!Bool;rec t.?Int;?Bool;!Bool;t", &unfolding, 2),
        ],
    }
}

/// Expected degrees: entry, label of the degree check, value.
const DEGREES: &[(&str, &str, u32)] = &[
    ("example4-namepass", "V", 2),
    ("example4-namepass", "W'", 2),
    ("example4-namepass", "W", 4),
    ("example4-namepass", "Q", 9),
    ("example4-namepass", "R", 9),
    ("example4-namepass", "[[P]]", 19),
    ("math-server", "Q", 1),
    ("math-server", "R", 4),
    ("math-server", "P", 6),
    ("recursion", "[[P]]", 7),
    ("recursion", "V", 0),
];

fn degrees() -> Criterion {
    let mut checks = Vec::new();
    for &(name, label, want) in DEGREES {
        let e = corpus::entry(name).expect("corpus entry exists");
        let Some(d) = e.degrees.iter().find(|d| d.label == label) else {
            checks.push(Check::new(false, format!("{name}: no term labelled {label}")));
            continue;
        };
        let got = match d.snippet {
            Snippet::Whole => e.load().map(|l| degree(&l.process)).map_err(|e| e.to_string()),
            Snippet::Value(t) => parse_value(t, Mode::User).map(|v| degree_value(&v)).map_err(|e| e.to_string()),
            Snippet::Process(t) => parse_process(t, Mode::User).map(|p| degree(&p)).map_err(|e| e.to_string()),
        };
        let text = match &got {
            Ok(g) => format!("{name}: |{label}| = {g}, expected {want}"),
            Err(err) => format!("{name}: |{label}|: {err}"),
        };
        let ok = got == Ok(want);
        checks.push(match d.known_red {
            Some(why) => Check::red(ok, text, why),
            None => Check::new(ok, text),
        });
    }
    Criterion { id: 2, title: "degrees", checks }
}

fn corpus_processes() -> Vec<(Entry, corpus::Loaded)> {
    corpus::entries()
        .into_iter()
        .filter(Entry::has_process)
        .map(|e| {
            let l = e.load().unwrap_or_else(|err| panic!("{}: {err}", e.name));
            (e, l)
        })
        .collect()
}

/// Typechecks, decomposes and audits one process; `None` when all is well.
fn minimal_typing_failure(p: &Process, frees: &[(hodecomp::ast::Name, hodecomp::types::CType)]) -> Option<String> {
    let typed = check_with_frees(frees, p);
    if !typed.ok {
        return Some(format!("ill-typed source: {}", typed.message()));
    }
    let d = match decompose(p, frees) {
        Ok(d) => d,
        Err(e) => return Some(format!("decompose: {e}")),
    };
    let m = check_minimal_typed(&d.frees, &d.term);
    if !m.ok {
        return Some(format!("not minimally typed: {}", m.message()));
    }
    audit_propagators(&d.term).err().map(|e| format!("propagator accounting: {e}"))
}

fn property_suite() -> Criterion {
    let mut checks = Vec::new();
    for (e, l) in corpus_processes() {
        let f = minimal_typing_failure(&l.process, &l.frees);
        checks.push(Check::new(
            f.is_none(),
            format!("{}: {}", e.name, f.unwrap_or_else(|| "minimally typed, propagators accounted".into())),
        ));
    }
    let procs = sample(RANDOM_COUNT);
    let mut cov = Coverage::default();
    let mut failures = Vec::new();
    let mut deepest = 0;
    for (seed, p) in &procs {
        cov.add(p);
        deepest = deepest.max(prefix_depth(p));
        if let Some(f) = minimal_typing_failure(p, &[]) {
            failures.push(format!("seed {seed}: {f}"));
        }
    }
    checks.push(Check::new(
        procs.len() >= RANDOM_MIN && deepest <= MAX_DEPTH,
        format!("{} generated processes, deepest prefix nesting {deepest} (bound {MAX_DEPTH})", procs.len()),
    ));
    let missing = cov.missing();
    checks.push(Check::new(
        missing.is_empty(),
        if missing.is_empty() {
            format!(
                "all constructs covered (select {}, branch {}, tail-recursive names {}, shared channels {})",
                cov.select, cov.branch, cov.recursive_name, cov.shared_restriction
            )
        } else {
            format!("constructs never generated: {}", missing.join(", "))
        },
    ));
    checks.push(Check::new(
        failures.is_empty(),
        format!(
            "{}/{} generated processes minimally typed with propagators accounted{}",
            procs.len() - failures.len(),
            procs.len(),
            failures.first().map(|f| format!("; first failure {f}")).unwrap_or_default()
        ),
    ));
    Criterion { id: 3, title: "minimal typing of decompositions", checks }
}

fn step_counts() -> Criterion {
    let mut checks = Vec::new();
    for (e, l) in corpus_processes() {
        let mut runs = Vec::new();
        if !e.source_run.is_empty() {
            runs.push(("source", run(&l.process, &l.frees, RUN_FUEL), e.source_run));
        }
        if !e.decomposition_run.is_empty() {
            let d = decompose(&l.process, &l.frees).expect("corpus entries decompose");
            runs.push(("decomposition", run(&d.term, &d.frees, RUN_FUEL), e.decomposition_run));
        }
        for (side, trace, cps) in runs {
            for (cp, r) in check_run(&trace, cps) {
                let text = match &r {
                    Ok(d) | Err(d) => format!("{} {side}: {}: {d}", e.name, cp.label),
                };
                checks.push(match cp.known_red {
                    Some(why) => Check::red(r.is_ok(), text, why),
                    None => Check::new(r.is_ok(), text),
                });
            }
        }
        for x in e.extra {
            let r = (x.check)(&l);
            checks.push(Check::new(
                r.is_ok(),
                format!("{}: {}{}", e.name, x.label, r.err().map(|e| format!(": {e}")).unwrap_or_default()),
            ));
        }
    }
    Criterion { id: 4, title: "step counts", checks }
}

fn sr_check(label: String, p: &Process, frees: &[(hodecomp::ast::Name, hodecomp::types::CType)], max: usize) -> Check {
    let r = common::sr::check(p, frees, SR_FUEL, max);
    let bounded = if r.truncated { ", bounded" } else { "" };
    Check::new(
        r.failures.is_empty(),
        format!(
            "{label}: {} states{bounded}{}",
            r.states,
            r.failures.first().map(|f| format!("; first failure {f}")).unwrap_or_default()
        ),
    )
}

fn subject_reduction() -> Criterion {
    let mut checks = Vec::new();
    for (e, l) in corpus_processes() {
        checks.push(sr_check(format!("{} source", e.name), &l.process, &l.frees, SR_MAX_STATES));
        let d = decompose(&l.process, &l.frees).expect("corpus entries decompose");
        checks.push(sr_check(format!("{} decomposition", e.name), &d.term, &d.frees, SR_MAX_STATES));
    }
    let mut bad = Vec::new();
    let mut states = 0;
    for (seed, p) in sample(SR_RANDOM_COUNT) {
        let r = common::sr::check(&p, &[], SR_FUEL, SR_RANDOM_MAX_STATES);
        states += r.states;
        if let Some(f) = r.failures.first() {
            bad.push(format!("seed {seed}: {f}"));
        }
    }
    checks.push(Check::new(
        bad.is_empty(),
        format!(
            "{SR_RANDOM_COUNT} generated processes: {states} states{}",
            bad.first().map(|f| format!("; first failure {f}")).unwrap_or_default()
        ),
    ));
    Criterion { id: 5, title: "subject reduction", checks }
}

fn is_thunk_shape(v: &Value) -> bool {
    let Value::Abs(a) = v else { return false };
    a.lin == Linearity::Lin
        && a.params.len() == 1
        && a.params[0].1 == thunk_param_type()
        && !free_names(&a.body).iter().any(|n| n.key() == a.params[0].0.key())
}

/// Longest chain of nested prefixes in `p` and in every abstraction it
/// carries, except in the bodies of thunks themselves.
fn duo_depth(p: &Process) -> usize {
    fn val(v: &Value) -> usize {
        match v {
            Value::Abs(a) if is_thunk_shape(v) => carried(&a.body),
            Value::Abs(a) => duo_depth(&a.body),
            _ => 0,
        }
    }
    fn chain(p: &Process) -> usize {
        match p {
            Process::Inact | Process::App { .. } => 0,
            Process::Out { cont, .. } | Process::In { cont, .. } | Process::Sel { cont, .. } => 1 + chain(cont),
            Process::Bra { cases, .. } => 1 + cases.iter().map(|(_, q)| chain(q)).max().unwrap_or(0),
            Process::Par(a, b) => chain(a).max(chain(b)),
            Process::Res { body, .. } => chain(body),
        }
    }
    fn carried(p: &Process) -> usize {
        match p {
            Process::Inact => 0,
            Process::Out { payload, cont, .. } => payload.iter().map(val).max().unwrap_or(0).max(carried(cont)),
            Process::In { cont, .. } | Process::Sel { cont, .. } => carried(cont),
            Process::Bra { cases, .. } => cases.iter().map(|(_, q)| carried(q)).max().unwrap_or(0),
            Process::App { fun, args } => args.iter().chain([fun]).map(val).max().unwrap_or(0),
            Process::Par(a, b) => carried(a).max(carried(b)),
            Process::Res { body, .. } => carried(body),
        }
    }
    chain(p).max(carried(p))
}

/// Every output carries one value and every input binds one variable.
fn monadic_violation(p: &Process) -> Option<String> {
    let val = |v: &Value| match v {
        Value::Abs(a) => monadic_violation(&a.body),
        _ => None,
    };
    match p {
        Process::Inact => None,
        Process::Out { subj, payload, cont } => {
            if payload.len() != 1 {
                return Some(format!("output on {subj} of arity {}", payload.len()));
            }
            payload.iter().find_map(val).or_else(|| monadic_violation(cont))
        }
        Process::In { subj, binders, cont } => {
            if binders.len() != 1 {
                return Some(format!("input on {subj} of arity {}", binders.len()));
            }
            monadic_violation(cont)
        }
        Process::Sel { cont, .. } => monadic_violation(cont),
        Process::Bra { cases, .. } => cases.iter().find_map(|(_, q)| monadic_violation(q)),
        Process::App { fun, args } => args.iter().chain([fun]).find_map(val),
        Process::Par(a, b) => monadic_violation(a).or_else(|| monadic_violation(b)),
        Process::Res { body, .. } => monadic_violation(body),
    }
}

fn optimizations() -> Criterion {
    let mut checks = Vec::new();
    for (e, l) in corpus_processes() {
        for opt in [Optimization::Duos, Optimization::Monadic] {
            let d = match decompose_with(opt, &l.process, &l.frees) {
                Ok(d) => d,
                Err(err) => {
                    checks.push(Check::new(false, format!("{} ({opt}): {err}", e.name)));
                    continue;
                }
            };
            let m = check_minimal_typed(&d.frees, &d.term);
            checks.push(Check::new(
                m.ok,
                format!("{} ({opt}): minimal typing {}", e.name, if m.ok { "ok".into() } else { m.message() }),
            ));
            match opt {
                Optimization::Duos => {
                    let depth = duo_depth(&d.term);
                    checks.push(Check::new(
                        depth <= DUO_DEPTH,
                        format!("{} ({opt}): prefix nesting outside thunks {depth}", e.name),
                    ));
                }
                _ => {
                    let v = monadic_violation(&d.term);
                    checks.push(Check::new(
                        v.is_none(),
                        format!("{} ({opt}): {}", e.name, v.unwrap_or_else(|| "every prefix has arity 1".into())),
                    ));
                }
            }
            if e.terminates {
                let t = run(&d.term, &d.frees, RUN_FUEL);
                checks.push(Check::new(
                    t.terminal == Terminal::Inert,
                    format!("{} ({opt}): run ends {} after {} steps", e.name, t.terminal, t.steps.len()),
                ));
            }
        }
    }
    Criterion { id: 6, title: "optimizations", checks }
}

fn main() -> ExitCode {
    // Decomposed terms are deep; recursive traversals need a large stack.
    let worker = std::thread::Builder::new()
        .stack_size(512 << 20)
        .spawn(|| {
            let criteria = [
                type_decomposition(),
                degrees(),
                property_suite(),
                step_counts(),
                subject_reduction(),
                optimizations(),
            ];
            for c in &criteria {
                c.print();
            }
            let failed = criteria.iter().filter(|c| c.status() == Status::Fail).count();
            let red = criteria.iter().filter(|c| c.status() == Status::KnownRed).count();
            println!("{} criteria: {failed} failed, {red} known red", criteria.len());
            failed
        })
        .expect("spawn the acceptance thread");
    match worker.join() {
        Ok(0) => ExitCode::SUCCESS,
        _ => ExitCode::FAILURE,
    }
}
