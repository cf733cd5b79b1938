//! Command-line front end: check, decompose, run, compare and replay the
//! embedded corpus.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::ast::{Name, Process};
use crate::corpus::{self, check_run, Outcome, RUN_FUEL};
use crate::decompose::degree;
use crate::np::encode_namepass;
use crate::optimize::{decompose_with, Optimization};
use crate::parse::{parse_file, Mode};
use crate::semantics::{explore, run};
use crate::typeck::{check_minimal_typed, check_with_frees};
use crate::types::CType;

/// Exit status: every verdict passed.
pub const EXIT_OK: i32 = 0;
/// Exit status: some verdict or assertion failed.
pub const EXIT_FAIL: i32 = 1;
/// Exit status: bad usage, unreadable input or a parse error.
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "hodecomp", version, about = "Decompose higher-order session processes into minimal session types")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Typecheck a source file and print the verdict with diagnostics.
    Check(InputArgs),
    /// Decompose a source file and report whether the result is minimally typed.
    Decompose {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = Opt::None)]
        opt: Opt,
        /// Write the decomposition here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduce a source file, or its decomposition.
    Run {
        #[command(flatten)]
        input: InputArgs,
        /// Run the decomposition in the given form instead of the source.
        #[arg(long, value_enum)]
        opt: Option<Opt>,
        #[arg(long, value_enum, default_value_t = Policy::Det)]
        policy: Policy,
        #[arg(long, default_value_t = RUN_FUEL)]
        fuel: usize,
        /// Write the trace of a deterministic run here, one JSON record per line.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the final term (deterministic) or the terminal states (all) here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a process and its decomposition side by side. The target is a
    /// file or the name of a corpus entry; for corpus entries the expected
    /// intermediate states are checked too.
    Compare {
        target: String,
        #[arg(long, value_enum)]
        syntax: Option<Syntax>,
        #[arg(long, value_enum, default_value_t = Opt::None)]
        opt: Opt,
        #[arg(long, default_value_t = RUN_FUEL)]
        fuel: usize,
    },
    /// Replay the embedded corpus and print a pass/fail table.
    Corpus {
        /// Only this variant; all three by default.
        #[arg(long, value_enum)]
        opt: Option<Opt>,
        /// Only this entry.
        #[arg(long)]
        entry: Option<String>,
        /// Write the outcomes here as JSON lines.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct InputArgs {
    /// Source file.
    pub file: PathBuf,
    #[arg(long, value_enum)]
    pub syntax: Option<Syntax>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Opt {
    None,
    Duos,
    Monadic,
}

impl From<Opt> for Optimization {
    fn from(o: Opt) -> Self {
        match o {
            Opt::None => Optimization::None,
            Opt::Duos => Optimization::Duos,
            Opt::Monadic => Optimization::Monadic,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Policy {
    /// One reproducible run.
    Det,
    /// Every interleaving, up to the fuel bound.
    All,
}

/// Source dialect.
#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Syntax {
    /// Higher-order processes.
    Ho,
    /// First-order name passing, encoded into higher-order processes.
    Namepass,
}

/// A failure that ends the command.
struct Abort(i32, String);

type Res<T> = std::result::Result<T, Abort>;

fn usage(msg: impl std::fmt::Display) -> Abort {
    Abort(EXIT_USAGE, msg.to_string())
}

fn fail(msg: impl std::fmt::Display) -> Abort {
    Abort(EXIT_FAIL, msg.to_string())
}

struct Io<'a> {
    out: &'a mut dyn Write,
}

impl Io<'_> {
    fn line(&mut self, s: impl std::fmt::Display) {
        let _ = writeln!(self.out, "{s}");
    }
}

/// A loaded source file.
struct Input {
    process: Process,
    frees: Vec<(Name, CType)>,
    expect_degree: Option<usize>,
}

fn load(path: &Path, syntax: Option<Syntax>) -> Res<Input> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let syntax =
        syntax.unwrap_or(if path.extension().is_some_and(|x| x == "np") { Syntax::Namepass } else { Syntax::Ho });
    match syntax {
        Syntax::Ho => {
            let f = parse_file(&text, Mode::User).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            Ok(Input { process: f.process, frees: f.frees, expect_degree: f.expect_degree })
        }
        Syntax::Namepass => {
            let f = parse_file(&text, Mode::NamePassing).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let process = encode_namepass(&f.process, &f.frees).map_err(fail)?;
            Ok(Input { process, frees: f.frees, expect_degree: f.expect_degree })
        }
    }
}

fn write_to(path: &Path, text: &str) -> Res<()> {
    std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn cmd_check(io: &mut Io, input: &InputArgs) -> Res<()> {
    let inp = load(&input.file, input.syntax)?;
    let r = check_with_frees(&inp.frees, &inp.process);
    let mut ok = r.ok;
    io.line(format!("typing: {}", if r.ok { "ok" } else { "error" }));
    if !r.ok {
        io.line(r.message());
    }
    let d = degree(&inp.process);
    io.line(format!("degree: {d}"));
    if let Some(want) = inp.expect_degree {
        if want != d as usize {
            io.line(format!("expected degree {want}"));
            ok = false;
        }
    }
    if ok {
        Ok(())
    } else {
        Err(fail("check failed"))
    }
}

fn cmd_decompose(io: &mut Io, input: &InputArgs, opt: Opt, out: Option<&Path>) -> Res<()> {
    let inp = load(&input.file, input.syntax)?;
    let d = decompose_with(opt.into(), &inp.process, &inp.frees).map_err(fail)?;
    let term = format!("{}\n", d.term);
    match out {
        Some(p) => write_to(p, &term)?,
        None => io.line(term.trim_end()),
    }
    let r = check_minimal_typed(&d.frees, &d.term);
    io.line(format!("degree: {}", d.degree));
    io.line(format!("minimal typing: {}", if r.ok { "ok" } else { "error" }));
    if r.ok {
        Ok(())
    } else {
        io.line(r.message());
        Err(fail("the decomposition is not minimally typed"))
    }
}

struct RunArgs<'a> {
    opt: Option<Opt>,
    policy: Policy,
    fuel: usize,
    trace: Option<&'a Path>,
    out: Option<&'a Path>,
}

fn cmd_run(io: &mut Io, input: &InputArgs, a: RunArgs) -> Res<()> {
    let inp = load(&input.file, input.syntax)?;
    let (p, frees) = match a.opt {
        None => (inp.process, inp.frees),
        Some(o) => {
            let d = decompose_with(o.into(), &inp.process, &inp.frees).map_err(fail)?;
            (d.term, d.frees)
        }
    };
    match a.policy {
        Policy::Det => {
            let t = run(&p, &frees, a.fuel);
            if let Some(path) = a.trace {
                write_to(path, &t.to_jsonl())?;
            }
            let last = t.states.last().map(|c| c.to_process()).unwrap_or(Process::Inact);
            io.line(format!("steps: {}", t.steps.len()));
            io.line(format!("terminal: {}", t.terminal));
            match a.out {
                Some(path) => write_to(path, &format!("{last}\n"))?,
                None => io.line(format!("final: {last}")),
            }
        }
        Policy::All => {
            if a.trace.is_some() {
                return Err(usage("--trace needs --policy det"));
            }
            let x = explore(&p, &frees, a.fuel, 200_000);
            io.line(format!("states: {}", x.states.len()));
            io.line(format!("terminal states: {}", x.terminals.len()));
            io.line(format!("truncated: {}", x.truncated));
            let listing: String = x.terminals.iter().map(|k| format!("{k}\n")).collect();
            match a.out {
                Some(path) => write_to(path, &listing)?,
                None => {
                    for k in &x.terminals {
                        io.line(format!("terminal: {k}"));
                    }
                }
            }
        }
    }
    Ok(())
}

fn cmd_compare(io: &mut Io, target: &str, syntax: Option<Syntax>, opt: Opt, fuel: usize) -> Res<()> {
    let path = Path::new(target);
    let (entry, inp) = if path.exists() {
        (None, load(path, syntax)?)
    } else {
        let e = corpus::entry(target).map_err(usage)?;
        let l = e.load().map_err(fail)?;
        (Some(e), Input { process: l.process, frees: l.frees, expect_degree: None })
    };
    let d = decompose_with(opt.into(), &inp.process, &inp.frees).map_err(fail)?;
    let src = run(&inp.process, &inp.frees, fuel);
    let dec = run(&d.term, &d.frees, fuel);
    io.line(format!("source: {} steps, {}", src.steps.len(), src.terminal));
    io.line(format!("decomposition ({}): {} steps, {}", Optimization::from(opt), dec.steps.len(), dec.terminal));
    let mut ok = true;
    if let (Some(e), Opt::None) = (entry, opt) {
        let rows = check_run(&src, e.source_run)
            .into_iter()
            .map(|r| ("source", r))
            .chain(check_run(&dec, e.decomposition_run).into_iter().map(|r| ("decomposition", r)));
        for (side, (cp, r)) in rows {
            let status = match (&r, cp.known_red) {
                (Ok(_), _) => "PASS",
                (Err(_), Some(_)) => "KNOWN-RED",
                (Err(_), None) => {
                    ok = false;
                    "FAIL"
                }
            };
            let detail = match r {
                Ok(d) | Err(d) => d,
            };
            io.line(format!("{status} {side}: {}: {detail}", cp.label));
        }
    }
    if ok {
        Ok(())
    } else {
        Err(fail("an expected state was not reached"))
    }
}

/// Renders outcomes as an aligned table.
pub fn outcome_table(outcomes: &[Outcome]) -> String {
    let ew = outcomes.iter().map(|o| o.entry.len()).max().unwrap_or(0);
    let cw = outcomes.iter().map(|o| o.check.len()).max().unwrap_or(0);
    let mut s = String::new();
    for o in outcomes {
        let status = if o.passed {
            "PASS"
        } else if o.known_red.is_some() {
            "KNOWN-RED"
        } else {
            "FAIL"
        };
        s.push_str(&format!("{status:<9} {:<ew$}  {:<cw$}  {}\n", o.entry, o.check, o.detail));
    }
    s
}

fn cmd_corpus(io: &mut Io, opt: Option<Opt>, entry: Option<&str>, out: Option<&Path>) -> Res<()> {
    let entries = match entry {
        Some(n) => vec![corpus::entry(n).map_err(usage)?],
        None => corpus::entries(),
    };
    let opts: Vec<Optimization> = match opt {
        Some(o) => vec![o.into()],
        None => Optimization::ALL.to_vec(),
    };
    let mut outcomes = Vec::new();
    for e in &entries {
        for &o in &opts {
            outcomes.extend(corpus::replay(e, o));
        }
    }
    io.line(outcome_table(&outcomes).trim_end());
    if let Some(path) = out {
        let lines: String =
            outcomes.iter().map(|o| serde_json::to_string(o).expect("outcomes serialise") + "\n").collect();
        write_to(path, &lines)?;
    }
    let failed = outcomes.iter().filter(|o| o.counts_as_failure()).count();
    let red = outcomes.iter().filter(|o| !o.passed && o.known_red.is_some()).count();
    io.line(format!("{} checks, {} failed, {} known red", outcomes.len(), failed, red));
    if failed == 0 {
        Ok(())
    } else {
        Err(fail(format!("{failed} corpus checks failed")))
    }
}

/// Runs the command line `args` (including the program name), writing
/// results to `out` and errors to `err`; returns the exit status.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    let mut io = Io { out };
    let r = match &cli.command {
        Command::Check(i) => cmd_check(&mut io, i),
        Command::Decompose { input, opt, out } => cmd_decompose(&mut io, input, *opt, out.as_deref()),
        Command::Run { input, opt, policy, fuel, trace, out } => cmd_run(
            &mut io,
            input,
            RunArgs { opt: *opt, policy: *policy, fuel: *fuel, trace: trace.as_deref(), out: out.as_deref() },
        ),
        Command::Compare { target, syntax, opt, fuel } => cmd_compare(&mut io, target, *syntax, *opt, *fuel),
        Command::Corpus { opt, entry, out } => cmd_corpus(&mut io, *opt, entry.as_deref(), out.as_deref()),
    };
    match r {
        Ok(()) => EXIT_OK,
        Err(Abort(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}
