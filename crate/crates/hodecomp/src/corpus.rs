//! The embedded corpus of worked examples, with the degrees, reduction step
//! counts and intermediate states each one is expected to exhibit.

use thiserror::Error;

use crate::ast::{substitute, Name, Process, Subst, Value};
use crate::decompose::{audit_propagators, breakdown_process, breakdown_value, degree, degree_value, DecompError};
use crate::np::{encode_namepass, NpError};
use crate::optimize::{audit_monadic, decompose_with, max_prefix_depth_outside_thunks, OptError, Optimization};
use crate::parse::{parse_ctype, parse_file, parse_process, parse_stype, parse_value, Mode, ParseError};
use crate::semantics::{canonical, run, Terminal, Trace};
use crate::typeck::check_minimal_typed;
use crate::types::{gdecomp, CType, SType};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorpusError {
    #[error("no corpus entry named `{0}`")]
    UnknownEntry(String),
    #[error("entry `{0}` has no process")]
    NoProcess(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Encode(#[from] NpError),
    #[error(transparent)]
    Decompose(#[from] DecompError),
    #[error(transparent)]
    Optimize(#[from] OptError),
}

type Result<T> = std::result::Result<T, CorpusError>;

/// Builds an expected term.
pub type TermBuilder = fn() -> Result<Process>;

/// What an entry is made of.
#[derive(Clone, Copy, Debug)]
pub enum Source {
    /// A process file, parsed in the given mode. Name-passing sources are
    /// encoded into abstraction passing before anything else is done.
    Process { mode: Mode, text: &'static str },
    /// A session type whose decomposition is checked.
    Types { session: &'static str, expected_slices: &'static [&'static str] },
}

/// The term whose degree is checked.
#[derive(Clone, Copy, Debug)]
pub enum Snippet {
    /// The entry's (encoded) process.
    Whole,
    /// A value, in user syntax.
    Value(&'static str),
    /// A process, in user syntax.
    Process(&'static str),
}

#[derive(Clone, Copy, Debug)]
pub struct DegreeCheck {
    pub label: &'static str,
    pub snippet: Snippet,
    pub expected: u32,
    /// Set when the expected value is known not to be met; the text says why.
    pub known_red: Option<&'static str>,
}

/// What the deterministic run must show after a given number of steps.
#[derive(Clone, Copy, Debug)]
pub enum Expect {
    /// The state is this term, up to α-renaming, structural congruence and
    /// type annotations.
    Term(TermBuilder),
    /// The run stops here in an inert state.
    Inert,
}

#[derive(Clone, Copy, Debug)]
pub struct Checkpoint {
    pub label: &'static str,
    /// Steps from the start of the run.
    pub at: usize,
    pub expect: Expect,
    pub known_red: Option<&'static str>,
}

#[derive(Clone, Copy, Debug)]
pub struct Entry {
    pub name: &'static str,
    pub summary: &'static str,
    pub source: Source,
    /// For name-passing entries: the encoding as printed with the example.
    pub encoding: Option<TermBuilder>,
    pub degrees: &'static [DegreeCheck],
    /// Checkpoints of the deterministic run of the (encoded) process.
    pub source_run: &'static [Checkpoint],
    /// Checkpoints of the deterministic run of its decomposition.
    pub decomposition_run: &'static [Checkpoint],
    /// Further checks that do not fit the shapes above.
    pub extra: &'static [ExtraCheck],
    /// Whether the process and its decompositions run to an inert state.
    pub terminates: bool,
}

/// A named check over a loaded entry.
#[derive(Clone, Copy, Debug)]
pub struct ExtraCheck {
    pub label: &'static str,
    pub check: fn(&Loaded) -> std::result::Result<(), String>,
}

/// An entry's process, ready for decomposition.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub process: Process,
    pub frees: Vec<(Name, CType)>,
}

/// Fuel for the deterministic runs of corpus entries.
pub const RUN_FUEL: usize = 400;

impl Entry {
    /// Parses the entry, encoding name passing where needed.
    pub fn load(&self) -> Result<Loaded> {
        match self.source {
            Source::Process { mode, text } => {
                let f = parse_file(text, mode)?;
                let process =
                    if mode == Mode::NamePassing { encode_namepass(&f.process, &f.frees)? } else { f.process };
                Ok(Loaded { process, frees: f.frees })
            }
            Source::Types { .. } => Err(CorpusError::NoProcess(self.name.into())),
        }
    }

    pub fn has_process(&self) -> bool {
        matches!(self.source, Source::Process { .. })
    }
}

/// Looks an entry up by name.
pub fn entry(name: &str) -> Result<Entry> {
    entries().into_iter().find(|e| e.name == name).ok_or_else(|| CorpusError::UnknownEntry(name.into()))
}

/// All entries, sorted by name.
pub fn entries() -> Vec<Entry> {
    let mut v = vec![example1(), example4(), equality_service(), math_server(), recursion()];
    v.sort_by_key(|e| e.name);
    v
}

// ---------------------------------------------------------------------------
// Outcomes
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Outcome {
    pub entry: String,
    pub check: String,
    pub passed: bool,
    pub detail: String,
    /// Set when the check is known to fail; it does not affect verdicts.
    pub known_red: Option<String>,
}

impl Outcome {
    /// Whether this outcome makes the overall verdict fail.
    pub fn counts_as_failure(&self) -> bool {
        !self.passed && self.known_red.is_none()
    }
}

struct Report<'a> {
    entry: &'a str,
    out: Vec<Outcome>,
}

impl Report<'_> {
    fn push(&mut self, check: String, r: std::result::Result<String, String>, known_red: Option<&str>) {
        let (passed, detail) = match r {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        self.out.push(Outcome {
            entry: self.entry.into(),
            check,
            passed,
            detail,
            known_red: known_red.map(str::to_string),
        });
    }
}

fn snippet_degree(s: Snippet, whole: Option<&Process>) -> std::result::Result<u32, String> {
    match s {
        Snippet::Whole => whole.map(degree).ok_or_else(|| "the entry has no process".to_string()),
        Snippet::Value(t) => parse_value(t, Mode::User).map(|v| degree_value(&v)).map_err(|e| e.to_string()),
        Snippet::Process(t) => parse_process(t, Mode::User).map(|p| degree(&p)).map_err(|e| e.to_string()),
    }
}

fn steps(n: usize) -> String {
    if n == 1 {
        "1 step".into()
    } else {
        format!("{n} steps")
    }
}

/// Compares the states of `trace` with the checkpoints.
pub fn check_run(trace: &Trace, cps: &[Checkpoint]) -> Vec<(Checkpoint, std::result::Result<String, String>)> {
    cps.iter()
        .map(|cp| {
            let r = match cp.expect {
                Expect::Inert => {
                    if trace.steps.len() == cp.at && trace.terminal == Terminal::Inert {
                        Ok(format!("inert after {}", steps(cp.at)))
                    } else {
                        Err(format!("run ended {} after {}", trace.terminal, steps(trace.steps.len())))
                    }
                }
                Expect::Term(build) => match (trace.states.get(cp.at), build()) {
                    (None, _) => Err(format!("run ended {} after {}", trace.terminal, steps(trace.steps.len()))),
                    (_, Err(e)) => Err(format!("expected term does not build: {e}")),
                    (Some(state), Ok(want)) => {
                        if state.canonical() == canonical(&want) {
                            Ok(format!("reached after {}", steps(cp.at)))
                        } else {
                            Err(format!("state after {} is {}", steps(cp.at), state.to_process()))
                        }
                    }
                },
            };
            (*cp, r)
        })
        .collect()
}

/// Number of steps the checks need to observe.
fn horizon(cps: &[Checkpoint]) -> usize {
    cps.iter().map(|c| c.at).max().unwrap_or(0).max(RUN_FUEL)
}

/// Replays one entry with the given decomposition variant.
pub fn replay(e: &Entry, opt: Optimization) -> Vec<Outcome> {
    let mut rep = Report { entry: e.name, out: Vec::new() };
    if let Source::Types { session, expected_slices } = e.source {
        if opt == Optimization::None {
            rep.push("session type decomposition".into(), check_slices(session, expected_slices), None);
        }
        return rep.out;
    }
    let loaded = match e.load() {
        Ok(l) => l,
        Err(err) => {
            rep.push("load".into(), Err(err.to_string()), None);
            return rep.out;
        }
    };

    if opt == Optimization::None {
        if let Some(build) = e.encoding {
            let r = build().map_err(|e| e.to_string()).and_then(|want| {
                if canonical(&want) == canonical(&loaded.process) {
                    Ok("matches the printed encoding".to_string())
                } else {
                    Err(format!("encoding is {}", loaded.process))
                }
            });
            rep.push("name-passing encoding".into(), r, None);
        }
        for d in e.degrees {
            let r = snippet_degree(d.snippet, Some(&loaded.process)).and_then(|got| {
                if got == d.expected {
                    Ok(format!("{got}"))
                } else {
                    Err(format!("got {got}, expected {}", d.expected))
                }
            });
            rep.push(format!("degree {}", d.label), r, d.known_red);
        }
        let trace = run(&loaded.process, &loaded.frees, horizon(e.source_run));
        for (cp, r) in check_run(&trace, e.source_run) {
            rep.push(format!("source: {}", cp.label), r, cp.known_red);
        }
        for x in e.extra {
            rep.push(x.label.into(), (x.check)(&loaded).map(|()| "ok".into()), None);
        }
    }

    let d = match decompose_with(opt, &loaded.process, &loaded.frees) {
        Ok(d) => d,
        Err(err) => {
            rep.push(format!("decompose ({opt})"), Err(err.to_string()), None);
            return rep.out;
        }
    };
    let typed = check_minimal_typed(&d.frees, &d.term);
    rep.push(format!("minimal typing ({opt})"), if typed.ok { Ok("ok".into()) } else { Err(typed.message()) }, None);
    match opt {
        Optimization::None => {
            rep.push("propagator accounting".into(), audit_propagators(&d.term).map(|()| "ok".into()), None);
            let trace = run(&d.term, &d.frees, horizon(e.decomposition_run));
            for (cp, r) in check_run(&trace, e.decomposition_run) {
                rep.push(format!("decomposition: {}", cp.label), r, cp.known_red);
            }
        }
        Optimization::Duos => {
            let depth = max_prefix_depth_outside_thunks(&d.term);
            rep.push(
                "prefix depth outside thunks (duos)".into(),
                if depth <= 2 { Ok(format!("{depth}")) } else { Err(format!("depth {depth}")) },
                None,
            );
        }
        Optimization::Monadic => {
            rep.push("payload arity (monadic)".into(), audit_monadic(&d.term).map(|()| "all 1".into()), None);
        }
    }
    if e.terminates {
        let trace = run(&d.term, &d.frees, RUN_FUEL);
        rep.push(
            format!("reaches an inert state ({opt})"),
            if trace.terminal == Terminal::Inert {
                Ok(format!("after {}", steps(trace.steps.len())))
            } else {
                Err(format!("run ended {} after {}", trace.terminal, steps(trace.steps.len())))
            },
            None,
        );
    }
    rep.out
}

fn check_slices(session: &str, expected: &[&str]) -> std::result::Result<String, String> {
    let s = parse_stype(session).map_err(|e| e.to_string())?;
    let got = gdecomp(&s).map_err(|e| e.to_string())?;
    let want: Vec<SType> =
        expected.iter().map(|t| parse_stype(t)).collect::<std::result::Result<_, _>>().map_err(|e| e.to_string())?;
    if got == want {
        Ok(got.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))
    } else {
        Err(format!("got [{}]", got.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")))
    }
}

/// Replays every entry with every variant, ordered by entry name.
pub fn replay_all() -> Vec<Outcome> {
    let mut out = Vec::new();
    for e in entries() {
        for opt in Optimization::ALL {
            out.extend(replay(&e, opt));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Helpers for expected terms
// ---------------------------------------------------------------------------

fn internal(text: &str) -> Result<Process> {
    Ok(parse_file(text, Mode::Internal)?.process)
}

fn user_value(text: &str) -> Result<Value> {
    Ok(parse_value(text, Mode::User)?)
}

fn user_process(text: &str) -> Result<Process> {
    Ok(parse_process(text, Mode::User)?)
}

fn np_encoding(text: &str) -> Result<Process> {
    let f = parse_file(text, Mode::NamePassing)?;
    Ok(encode_namepass(&f.process, &f.frees)?)
}

// ---------------------------------------------------------------------------
// Name passing: the basic exchange
// ---------------------------------------------------------------------------

const EXAMPLE1: &str = "\
free m : !<Bool>;end;
new n : !<!<Bool>;end>;end in n!(m).0 | ~n?(x).x!(true).0
";

fn example1() -> Entry {
    Entry {
        name: "example1-namepass",
        summary: "a name sent on n is packed in an abstraction and unpacked by the receiver",
        source: Source::Process { mode: Mode::NamePassing, text: EXAMPLE1 },
        encoding: Some(|| {
            user_process(
                "new n : !<lin(?<lin(!<lin(?<lin(Bool)>;end)>;end)>;end)>;end in \
                 ( n!(\\lin(z: ?<lin(!<lin(?<lin(Bool)>;end)>;end)>;end) -> z?(x).apply x (m)).0 \
                 | ~n?(y).new s : ?<lin(!<lin(?<lin(Bool)>;end)>;end)>;end in \
                   ( apply y (s) \
                   | ~s!(\\lin(x: !<lin(?<lin(Bool)>;end)>;end) -> \
                       x!(\\lin(z: ?<lin(Bool)>;end) -> z?(w).apply w (true)).0).0 ) )",
            )
        }),
        degrees: &[],
        source_run: &[Checkpoint {
            label: "the exchange is mimicked in 4 steps",
            at: 4,
            expect: Expect::Term(|| np_encoding("free m : !<Bool>;end; m!(true).0")),
            known_red: None,
        }],
        decomposition_run: &[],
        extra: &[],
        terminates: false,
    }
}

// ---------------------------------------------------------------------------
// Name passing: the decomposed exchange
// ---------------------------------------------------------------------------

const EXAMPLE4: &str = "\
free m : !<Bool>;end;
free ~m : ?<Bool>;end;
new u : !<!<Bool>;end>;end in u!(m).~m?(b).0 | ~u?(x).x!(true).0
";

const EXAMPLE4_ENCODED: &str = "\
type Sm = !<lin(?<lin(Bool)>;end)>;end;
new u : !<lin(?<lin(Sm)>;end)>;end in
  u!(\\lin(z: ?<lin(Sm)>;end) -> z?(x).apply x (m))
    .~m?(y).(new s : ?<lin(Bool)>;end in apply y (s) | ~s!(\\lin(b: Bool) -> 0))
| ~u?(y).(new s : ?<lin(Sm)>;end in apply y (s)
    | ~s!(\\lin(x: Sm) -> x!(\\lin(z: ?<lin(Bool)>;end) -> z?(w).apply w (true))))
";

const EX4_V: &str = "\\lin(z: ?<lin(!<lin(?<lin(Bool)>;end)>;end)>;end) -> z?(x).apply x (m)";
const EX4_W1: &str = "\\lin(z: ?<lin(Bool)>;end) -> z?(x).apply x (true)";
const EX4_W: &str =
    "\\lin(x: !<lin(?<lin(Bool)>;end)>;end) -> x!(\\lin(z: ?<lin(Bool)>;end) -> z?(w).apply w (true)).0";
const EX4_Q: &str = "u!(\\lin(z: ?<lin(!<lin(?<lin(Bool)>;end)>;end)>;end) -> z?(x).apply x (m))\
    .~m?(y).new s : ?<lin(Bool)>;end in (apply y (s) | ~s!(\\lin(b: Bool) -> 0).0)";
const EX4_R: &str = "~u?(y).new s : ?<lin(!<lin(?<lin(Bool)>;end)>;end)>;end in \
    (apply y (s) | ~s!(\\lin(x: !<lin(?<lin(Bool)>;end)>;end) -> \
    x!(\\lin(z: ?<lin(Bool)>;end) -> z?(w).apply w (true)).0).0)";

/// Types shared by the expected states of the decomposed exchange.
const EX4_TYPES: &str = "\
type B1 = ?<lin(Bool)>;end;
type Sm = !<lin(B1)>;end;
type Pm = ?<lin(Sm)>;end;
";

/// The breakdown of the receiver of `true`, still waiting on `~m_1`.
const EX4_RECEIVER: &str = "\
  new s_1 : B1 in
    ( #6?(y).~#7!(y).~#8!().0
    | #7?(y).apply y (s_1)
    | #8?().~s_1!(\\lin(b_1: Bool) -> (~#9!().0 | #9?().0)).~#10!().0
    | #10?().0 )";

const EX4_W1_BROKEN: &str = "\\lin(z_1: B1) -> (~#16!().0 | #16?().z_1?(x).~#17!(x).0 | #17?(x).apply x (true))";

fn ex4_first_state() -> Result<Process> {
    internal(&format!(
        "{EX4_TYPES}
new #3 : ?<>;end in new #4 : ?<lin(Sm)>;end in new #5 : ?<>;end in
new #6 : ?<lin(B1)>;end in new #7 : ?<lin(B1)>;end in new #8 : ?<>;end in
new #9 : ?<>;end in new #10 : ?<>;end in new #15 : ?<>;end in new #16 : ?<>;end in
new #17 : ?<lin(Bool)>;end in new #18 : ?<>;end in new #19 : ?<>;end in
( ~#5!().0
| #5?().~m_1?(y).~#6!(y).0
| {EX4_RECEIVER}
| new s_1 : Pm in
    ( apply (\\lin(z_1: Pm) -> (~#3!().0 | #3?().z_1?(x).~#4!(x).0 | #4?(x).apply x (m_1))) (s_1)
    | ~s_1!(\\lin(x_1: Sm) -> (~#15!().0 | #15?().x_1!({EX4_W1_BROKEN}).~#18!().0 | #18?().0)).~#19!().0
    | #19?().0 ) )"
    ))
}

fn ex4_second_state() -> Result<Process> {
    internal(&format!(
        "{EX4_TYPES}
new #6 : ?<lin(B1)>;end in new #7 : ?<lin(B1)>;end in new #8 : ?<>;end in
new #9 : ?<>;end in new #10 : ?<>;end in new #16 : ?<>;end in
new #17 : ?<lin(Bool)>;end in new #18 : ?<>;end in
( ~m_1?(y).~#6!(y).0
| m_1!({EX4_W1_BROKEN}).~#18!().0
| #18?().0
| {EX4_RECEIVER} )"
    ))
}

/// The decomposition of the process left after the source has mimicked the
/// exchange of `m` reaches the second expected state in three steps.
fn ex4_reduced_then_decomposed(_: &Loaded) -> std::result::Result<(), String> {
    let f = parse_file("free m : !<Bool>;end; free ~m : ?<Bool>;end; ~m?(b).0 | m!(true).0", Mode::NamePassing)
        .map_err(|e| e.to_string())?;
    let p = encode_namepass(&f.process, &f.frees).map_err(|e| e.to_string())?;
    let d = crate::decompose::decompose(&p, &f.frees).map_err(|e| e.to_string())?;
    let trace = run(&d.term, &d.frees, 3);
    let want = ex4_second_state().map_err(|e| e.to_string())?;
    match trace.states.get(3) {
        Some(s) if s.canonical() == canonical(&want) => Ok(()),
        Some(s) => Err(format!("state after 3 steps is {}", s.to_process())),
        None => Err(format!("run ended {} after {}", trace.terminal, steps(trace.steps.len()))),
    }
}

fn example4() -> Entry {
    Entry {
        name: "example4-namepass",
        summary: "the decomposition of an encoded name-passing exchange",
        source: Source::Process { mode: Mode::NamePassing, text: EXAMPLE4 },
        encoding: Some(|| Ok(parse_file(EXAMPLE4_ENCODED, Mode::User)?.process)),
        degrees: &[
            DegreeCheck { label: "V", snippet: Snippet::Value(EX4_V), expected: 2, known_red: None },
            DegreeCheck { label: "W'", snippet: Snippet::Value(EX4_W1), expected: 2, known_red: None },
            DegreeCheck { label: "W", snippet: Snippet::Value(EX4_W), expected: 4, known_red: None },
            DegreeCheck { label: "Q", snippet: Snippet::Process(EX4_Q), expected: 9, known_red: None },
            DegreeCheck { label: "R", snippet: Snippet::Process(EX4_R), expected: 9, known_red: None },
            DegreeCheck { label: "[[P]]", snippet: Snippet::Whole, expected: 19, known_red: None },
        ],
        source_run: &[
            Checkpoint {
                label: "Boolean exchange state after 4 steps",
                at: 4,
                expect: Expect::Term(|| {
                    np_encoding("free m : !<Bool>;end; free ~m : ?<Bool>;end; ~m?(b).0 | m!(true).0")
                }),
                known_red: None,
            },
            Checkpoint { label: "inert after 8 steps", at: 8, expect: Expect::Inert, known_red: None },
        ],
        decomposition_run: &[
            Checkpoint { label: "P' after 7 steps", at: 7, expect: Expect::Term(ex4_first_state), known_red: None },
            Checkpoint {
                label: "P'' after 8 more steps",
                at: 15,
                expect: Expect::Term(ex4_second_state),
                known_red: None,
            },
        ],
        extra: &[ExtraCheck {
            label: "decomposition of the 4-step reduct reaches P'' in 3 steps",
            check: ex4_reduced_then_decomposed,
        }],
        terminates: true,
    }
}

// ---------------------------------------------------------------------------
// Session types: the equality service
// ---------------------------------------------------------------------------

fn equality_service() -> Entry {
    Entry {
        name: "equality-service-type",
        summary: "a server that receives two integers and answers whether they are equal",
        source: Source::Types {
            session: "?<Int>;?<Int>;!<Bool>;end",
            expected_slices: &["?<Int>;end", "?<Int>;end", "!<Bool>;end"],
        },
        encoding: None,
        degrees: &[],
        source_run: &[],
        decomposition_run: &[],
        extra: &[],
        terminates: false,
    }
}

// ---------------------------------------------------------------------------
// Branching and selection: the math server
// ---------------------------------------------------------------------------

const MATH: &str = "\
type Op = un(Int, Int);
new u : &{add: !<Op>;end, sub: !<Op>;end} in
  branch u { add: u!(\\un(a: Int, b: Int) -> 0).0; sub: u!(\\un(a: Int, b: Int) -> 0).0 }
| select ~u add.~u?(x).apply x (16, 26)
";

const MATH_Q: &str = "branch u { add: u!(\\un(a: Int, b: Int) -> 0).0; sub: u!(\\un(a: Int, b: Int) -> 0).0 }";
const MATH_R: &str = "select ~u add.~u?(x).apply x (16, 26)";

/// Pieces shared by the expected states of the math server.
struct MathPieces {
    /// `λy_1.(c̄_3!⟨⟩ | B_3(y_1!⟨V⟩))`, the abstraction sent by the server.
    server_abs: String,
    /// `B_5(u_2?(x).(x (16,26)))`.
    client_rest: String,
}

const MATH_SLICE: &str = "!<un(Int, Int)>;end";
const MATH_BRANCH: &str = "&{add: !<lin(!<un(Int, Int)>;end)>;end, sub: !<lin(!<un(Int, Int)>;end)>;end}";

fn math_pieces() -> Result<MathPieces> {
    let y_ty = parse_ctype(MATH_SLICE)?;
    let send = user_process("y!(\\un(a: Int, b: Int) -> 0).0")?;
    let b3 = breakdown_process(&send, 3, &[(Name::new("y"), y_ty)], &[])?;
    let server_abs = format!("\\lin(y_1: {MATH_SLICE}) -> (~#3!().0 | {b3})");

    let recv = user_process("u?(x).apply x (16, 26)")?;
    let u_ty = parse_ctype("?<un(Int, Int)>;end")?;
    let b5 = breakdown_process(&recv, 5, &[(Name::new("u"), u_ty)], &[])?;
    let to_second = Subst::new().name(&Name::indexed("u", 1), Value::Name(Name::indexed("u", 2)));
    let client_rest = substitute(&b5, &to_second).to_string();
    Ok(MathPieces { server_abs, client_rest })
}

fn math_first_state() -> Result<Process> {
    let MathPieces { server_abs, client_rest } = math_pieces()?;
    internal(&format!(
        "new #5 : ?<>;end in new #6 : ?<un(Int, Int)>;end in new u_1 : {MATH_BRANCH} in
         ( branch u_1 {{
             add: new #3 : ?<>;end in new #4 : ?<>;end in u_1!({server_abs}).0;
             sub: new #3 : ?<>;end in new #4 : ?<>;end in u_1!({server_abs}).0 }}
         | new u_2 : ?<un(Int, Int)>;end in
             ( apply (\\lin(y_1: {MATH_SLICE}) -> select ~u_1 add.~u_1?(z).~#5!().apply z (y_1)) (~u_2)
             | {client_rest} ) )"
    ))
}

fn math_second_state() -> Result<Process> {
    let MathPieces { server_abs, client_rest } = math_pieces()?;
    internal(&format!(
        "new #5 : ?<>;end in new #6 : ?<un(Int, Int)>;end in new u_1 : {MATH_BRANCH} in
         ( new #3 : ?<>;end in new #4 : ?<>;end in u_1!({server_abs}).0
         | new u_2 : ?<un(Int, Int)>;end in (~u_1?(z).~#5!().apply z (~u_2) | {client_rest}) )"
    ))
}

/// The state after the abstraction crosses `u_1` and `c_5` fires.
fn math_third_state() -> Result<Process> {
    let MathPieces { server_abs, .. } = math_pieces()?;
    internal(&format!(
        "new #3 : ?<>;end in new #4 : ?<>;end in new #6 : ?<un(Int, Int)>;end in
         new u_2 : ?<un(Int, Int)>;end in
         ( apply ({server_abs}) (~u_2)
         | u_2?(x).~#6!(x).0
         | #6?(x).apply x (16, 26) )"
    ))
}

/// The third state exactly as printed with the example.
fn math_third_state_as_printed() -> Result<Process> {
    let MathPieces { client_rest, .. } = math_pieces()?;
    let send = user_process("u!(\\un(a: Int, b: Int) -> 0).0")?;
    let b3 = breakdown_process(&send, 3, &[(Name::new("u"), parse_ctype(MATH_SLICE)?)], &[])?;
    let to_second = Subst::new().name(&Name::indexed("u", 1), Value::Name(Name::indexed("u", 2)));
    let b3 = substitute(&b3, &to_second);
    internal(&format!(
        "new #3 : ?<>;end in new #4 : ?<>;end in new #5 : ?<>;end in new #6 : ?<un(Int, Int)>;end in
         new u_2 : ?<un(Int, Int)>;end in
         ( ~#5!().~#3!().0 | {b3} | {client_rest} )"
    ))
}

fn math_server() -> Entry {
    Entry {
        name: "math-server",
        summary: "a client selects addition from a server offering addition and subtraction",
        source: Source::Process { mode: Mode::User, text: MATH },
        encoding: None,
        degrees: &[
            DegreeCheck { label: "Q", snippet: Snippet::Process(MATH_Q), expected: 1, known_red: None },
            DegreeCheck { label: "R", snippet: Snippet::Process(MATH_R), expected: 4, known_red: None },
            DegreeCheck { label: "P", snippet: Snippet::Whole, expected: 6, known_red: None },
        ],
        source_run: &[
            Checkpoint {
                label: "the server's output is ready after 1 step",
                at: 1,
                expect: Expect::Term(|| {
                    user_process(
                        "new u : !<un(Int, Int)>;end in \
                         (u!(\\un(a: Int, b: Int) -> 0).0 | ~u?(x).apply x (16, 26))",
                    )
                }),
                known_red: None,
            },
            Checkpoint {
                label: "the addition is applied after 2 steps",
                at: 2,
                expect: Expect::Term(|| user_process("apply (\\un(a: Int, b: Int) -> 0) (16, 26)")),
                known_red: None,
            },
            Checkpoint { label: "inert after 3 steps", at: 3, expect: Expect::Inert, known_red: None },
        ],
        decomposition_run: &[
            Checkpoint { label: "P' after 4 steps", at: 4, expect: Expect::Term(math_first_state), known_red: None },
            Checkpoint {
                label: "P'' after 2 more steps",
                at: 6,
                expect: Expect::Term(math_second_state),
                known_red: None,
            },
            Checkpoint {
                label: "P''' after 2 more steps (exchange on u_1, then c_5)",
                at: 8,
                expect: Expect::Term(math_third_state),
                known_red: None,
            },
            Checkpoint {
                label: "P''' as printed after 2 more steps",
                at: 8,
                expect: Expect::Term(math_third_state_as_printed),
                known_red: Some(
                    "the printed state applies the abstraction while c_5 is still pending; \
                     the application is guarded by that output, so no run reaches it",
                ),
            },
        ],
        extra: &[],
        terminates: true,
    }
}

// ---------------------------------------------------------------------------
// Recursion
// ---------------------------------------------------------------------------

const RECURSION: &str = "\
type Ta = rec t. ?<Int>;!<Int>;t;
type Sy = rec t. ?<un(Ta, t)>;end;
free a : Ta;
a?(m).a!(m).new s : Sy in
  ( apply (\\un(xa: Ta, y: Sy) -> y?(zx).xa?(n).xa!(n).new r : Sy in (apply zx (xa, r) | ~r!(zx))) (a, s)
  | ~s!(\\un(xa: Ta, y: Sy) -> y?(zx).xa?(n).xa!(n).new r : Sy in (apply zx (xa, r) | ~r!(zx))) )
";

const REC_V: &str = "\\un(xa: rec t. ?<Int>;!<Int>;t, y: rec t. ?<un(rec t. ?<Int>;!<Int>;t, t)>;end) -> \
    y?(zx).xa?(n).xa!(n).new r : rec t. ?<un(rec t. ?<Int>;!<Int>;t, t)>;end in (apply zx (xa, r) | ~r!(zx))";

fn recursion_first_state() -> Result<Process> {
    let v = user_value(REC_V)?;
    let v5 = breakdown_value(&v, 5, &[], &[])?;
    let v6 = breakdown_value(&v, 6, &[], &[])?;
    internal(&format!(
        "type A1 = rec t. ?<Int>;t;
         type A2 = rec t. !<Int>;t;
         type Sy = rec t. ?<un(A1, A2, t)>;end;
         new #2 : ?<Int>;end in new #3 : ?<>;end in new #4 : ?<>;end in new #5 : ?<>;end in
         new #6 : ?<>;end in new #rec:a : chan lin(A1, A2) in
         ( a_1?(m).~#2!(m).#rec:a?(b).apply b (a_1, a_2)
         | #2?(m).#rec:a!(\\lin(z_1: A1, z_2: A2) -> z_2!(m).~#3!().#rec:a?(b).apply b (z_1, z_2)).0
         | new s_1 : Sy in
             ( #3?().~#4!().~#5!().0
             | #4?().#rec:a!(\\lin(z_1: A1, z_2: A2) -> apply ({v5}) (z_1, z_2, s_1)).0
             | #5?().~s_1!({v6}).~#6!().0
             | #6?().0 ) )"
    ))
}

fn recursion() -> Entry {
    Entry {
        name: "recursion",
        summary: "a recursive server encoded with a shared abstraction that calls itself",
        source: Source::Process { mode: Mode::User, text: RECURSION },
        encoding: None,
        degrees: &[
            DegreeCheck { label: "V", snippet: Snippet::Value(REC_V), expected: 0, known_red: None },
            DegreeCheck {
                label: "[[P]]",
                snippet: Snippet::Whole,
                expected: 7,
                known_red: Some(
                    "the degree clauses give 6; the printed decomposition skips propagator 6 \
                     when triggering the trio after the output of the shared value",
                ),
            },
        ],
        source_run: &[],
        decomposition_run: &[Checkpoint {
            label: "P' after 3 steps",
            at: 3,
            expect: Expect::Term(recursion_first_state),
            known_red: None,
        }],
        extra: &[],
        terminates: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_are_sorted_and_load() {
        let es = entries();
        let names: Vec<_> = es.iter().map(|e| e.name).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
        for e in es.iter().filter(|e| e.has_process()) {
            e.load().unwrap_or_else(|err| panic!("{}: {err}", e.name));
        }
    }

    #[test]
    fn every_non_red_check_passes() {
        let failures: Vec<_> = replay_all().into_iter().filter(Outcome::counts_as_failure).collect();
        assert!(failures.is_empty(), "{failures:#?}");
    }
}
