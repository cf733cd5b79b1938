//! Reduction semantics: structural normalisation into a flat configuration
//! of threads under top-level restrictions, enumeration of redexes, a
//! deterministic scheduler and bounded exhaustive exploration.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::ast::{free_names, substitute, Key, Lit, Name, Process, Subst, Supply, Value};
use crate::types::CType;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemError {
    #[error("redex refers to thread {0}, which does not exist")]
    NoThread(usize),
    #[error("redex no longer matches the configuration: {0}")]
    Mismatch(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Rule {
    App,
    Pass,
    Sel,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::App => "App",
            Rule::Pass => "Pass",
            Rule::Sel => "Sel",
        })
    }
}

/// An enabled reduction. For `Pass` and `Sel` the first thread is the
/// sender (output or selection) and the second the receiver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Redex {
    pub rule: Rule,
    pub threads: Vec<usize>,
    pub subject: Option<Name>,
}

impl Redex {
    /// Location of the redex, as thread positions in the configuration.
    pub fn path(&self) -> String {
        self.threads.iter().map(|t| format!("t{t}")).collect::<Vec<_>>().join(",")
    }
    /// Whether the redex is a synchronisation on a reserved name (a propagator or server).
    pub fn on_reserved(&self) -> bool {
        self.subject.as_ref().is_some_and(Name::is_reserved)
    }
}

/// A process in normal form: `ν ñ (T₁ | … | Tₙ)` where no thread is a
/// parallel composition, a restriction or `0`.
#[derive(Clone, Debug)]
pub struct Config {
    pub restricted: Vec<(Name, CType)>,
    pub threads: Vec<Process>,
    shared: HashSet<Key>,
    used: HashSet<Key>,
}

impl Config {
    /// Normalises `p`, whose free names are typed by `frees`.
    pub fn new(p: &Process, frees: &[(Name, CType)]) -> Config {
        let mut c =
            Config { restricted: Vec::new(), threads: Vec::new(), shared: HashSet::new(), used: HashSet::new() };
        for (n, t) in frees {
            c.used.insert(n.key());
            if matches!(t, CType::Chan(_)) {
                c.shared.insert(n.key());
            }
        }
        for n in free_names(p) {
            c.used.insert(n.key());
        }
        c.add(p.clone());
        c
    }

    fn add(&mut self, p: Process) {
        match p {
            Process::Inact => {}
            Process::Par(a, b) => {
                self.add(*a);
                self.add(*b);
            }
            Process::Res { name, ty, body } => {
                let plain = name.plain();
                let (name, body) = if self.used.contains(&plain.key()) {
                    let mut procs: Vec<&Process> = self.threads.iter().collect();
                    procs.push(&body);
                    let mut supply = Supply::above(&procs, &[]);
                    let mut fresh = supply.fresh_name(&plain);
                    while self.used.contains(&fresh.key()) {
                        fresh = supply.fresh_name(&plain);
                    }
                    let s = Subst::new().name(&plain, Value::Name(fresh.clone()));
                    (fresh, substitute(&body, &s))
                } else {
                    (plain, *body)
                };
                self.used.insert(name.key());
                if matches!(ty, CType::Chan(_)) {
                    self.shared.insert(name.key());
                }
                self.restricted.push((name, ty));
                self.add(body);
            }
            other => self.threads.push(other),
        }
    }

    fn matches(&self, out: &Name, inp: &Name) -> bool {
        out.key() == inp.key() && (out.dual != inp.dual || self.shared.contains(&out.key()))
    }

    /// All enabled redexes, in thread order.
    pub fn redexes(&self) -> Vec<Redex> {
        let mut out = Vec::new();
        for (i, t) in self.threads.iter().enumerate() {
            match t {
                Process::App { fun: Value::Abs(a), args } if a.params.len() == args.len() => {
                    out.push(Redex { rule: Rule::App, threads: vec![i], subject: None });
                }
                Process::Out { subj, payload, .. } => {
                    for (j, u) in self.threads.iter().enumerate() {
                        if let Process::In { subj: s2, binders, .. } = u {
                            if i != j && binders.len() == payload.len() && self.matches(subj, s2) {
                                out.push(Redex { rule: Rule::Pass, threads: vec![i, j], subject: Some(subj.clone()) });
                            }
                        }
                    }
                }
                Process::Sel { subj, label, .. } => {
                    for (j, u) in self.threads.iter().enumerate() {
                        if let Process::Bra { subj: s2, cases } = u {
                            if i != j && self.matches(subj, s2) && cases.iter().any(|(l, _)| l == label) {
                                out.push(Redex { rule: Rule::Sel, threads: vec![i, j], subject: Some(subj.clone()) });
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        out
    }

    /// Performs one reduction. Participating threads are removed and their
    /// continuations appended, the sender's first.
    pub fn fire(&self, r: &Redex) -> Result<Config, SemError> {
        let get = |i: usize| self.threads.get(i).ok_or(SemError::NoThread(i));
        let results: Vec<Process> = match r.rule {
            Rule::App => {
                let Process::App { fun: Value::Abs(a), args } = get(r.threads[0])? else {
                    return Err(SemError::Mismatch("App expects an applied abstraction".into()));
                };
                if a.params.len() != args.len() {
                    return Err(SemError::Mismatch("arity mismatch in application".into()));
                }
                let mut s = Subst::new();
                for ((n, _), v) in a.params.iter().zip(args) {
                    s = s.name(n, v.clone());
                }
                vec![substitute(&a.body, &s)]
            }
            Rule::Pass => {
                let (Process::Out { payload, cont: k1, .. }, Process::In { binders, cont: k2, .. }) =
                    (get(r.threads[0])?, get(r.threads[1])?)
                else {
                    return Err(SemError::Mismatch("Pass expects an output and an input".into()));
                };
                let mut s = Subst::new();
                for (x, v) in binders.iter().zip(payload) {
                    s = s.var(x, v.clone());
                }
                vec![(**k1).clone(), substitute(k2, &s)]
            }
            Rule::Sel => {
                let (Process::Sel { label, cont, .. }, Process::Bra { cases, .. }) =
                    (get(r.threads[0])?, get(r.threads[1])?)
                else {
                    return Err(SemError::Mismatch("Sel expects a selection and a branching".into()));
                };
                let chosen = cases
                    .iter()
                    .find(|(l, _)| l == label)
                    .map(|(_, q)| q.clone())
                    .ok_or_else(|| SemError::Mismatch(format!("label {label} not offered")))?;
                vec![(**cont).clone(), chosen]
            }
        };
        let mut next = Config {
            restricted: self.restricted.clone(),
            threads: Vec::with_capacity(self.threads.len() + 2),
            shared: self.shared.clone(),
            used: self.used.clone(),
        };
        for (i, t) in self.threads.iter().enumerate() {
            if !r.threads.contains(&i) {
                next.threads.push(t.clone());
            }
        }
        for p in results {
            next.add(p);
        }
        next.prune();
        Ok(next)
    }

    /// Drops restrictions on names that no longer occur.
    fn prune(&mut self) {
        let mut live: HashSet<Key> = HashSet::new();
        for t in &self.threads {
            live.extend(free_names(t).into_iter().map(|n| n.key()));
        }
        self.restricted.retain(|(n, _)| live.contains(&n.key()));
    }

    /// Reassembles the configuration into a process.
    pub fn to_process(&self) -> Process {
        Process::res_all(self.restricted.clone(), Process::par_all(self.threads.clone()))
    }

    /// No redex is enabled and every thread waits on an input or a branching.
    pub fn is_inert(&self) -> bool {
        self.redexes().is_empty() && self.threads.iter().all(|t| matches!(t, Process::In { .. } | Process::Bra { .. }))
    }

    /// A key identifying the configuration up to α-renaming, reordering of
    /// threads and restrictions, and type annotations.
    pub fn canonical(&self) -> String {
        canonical_key(&self.restricted, &self.threads)
    }
}

// ---------------------------------------------------------------------------
// Canonical keys
// ---------------------------------------------------------------------------

struct Canon<'a> {
    top: &'a HashMap<Key, String>,
    names: Vec<(Key, String)>,
    vars: Vec<(Key, String)>,
    next: usize,
    out: String,
}

impl Canon<'_> {
    fn name(&mut self, n: &Name) {
        if n.dual {
            self.out.push('~');
        }
        let k = n.key();
        if let Some((_, s)) = self.names.iter().rev().find(|(b, _)| *b == k) {
            self.out.push_str(s);
        } else if let Some(s) = self.top.get(&k) {
            self.out.push_str(s);
        } else {
            self.out.push_str(&n.plain().to_string());
        }
    }
    fn bind_name(&mut self, n: &Name) {
        let s = format!("n{}", self.next);
        self.next += 1;
        self.names.push((n.key(), s.clone()));
        self.out.push_str(&s);
    }
    fn value(&mut self, v: &Value) {
        match v {
            Value::Name(n) => self.name(n),
            Value::Var(x) => {
                let k = x.key();
                match self.vars.iter().rev().find(|(b, _)| *b == k) {
                    Some((_, s)) => {
                        let s = s.clone();
                        self.out.push_str(&s)
                    }
                    None => self.out.push_str(&format!("{x}")),
                }
            }
            Value::Lit(Lit::Int(i)) => self.out.push_str(&i.to_string()),
            Value::Lit(Lit::Bool(b)) => self.out.push_str(&b.to_string()),
            Value::Abs(a) => {
                let mark = self.names.len();
                self.out.push_str(if a.lin == crate::ast::Linearity::Lin { "\\l(" } else { "\\u(" });
                for (n, _) in &a.params {
                    self.bind_name(n);
                    self.out.push(',');
                }
                self.out.push_str(").");
                self.proc(&a.body);
                self.names.truncate(mark);
            }
        }
    }
    fn values(&mut self, vs: &[Value]) {
        self.out.push('(');
        for v in vs {
            self.value(v);
            self.out.push(',');
        }
        self.out.push(')');
    }
    fn proc(&mut self, p: &Process) {
        match p {
            Process::Inact => self.out.push('0'),
            Process::Out { subj, payload, cont } => {
                self.name(subj);
                self.out.push('!');
                self.values(payload);
                self.out.push('.');
                self.proc(cont);
            }
            Process::In { subj, binders, cont } => {
                self.name(subj);
                self.out.push_str("?(");
                let mark = self.vars.len();
                for x in binders {
                    let s = format!("x{}", self.next);
                    self.next += 1;
                    self.vars.push((x.key(), s.clone()));
                    self.out.push_str(&s);
                    self.out.push(',');
                }
                self.out.push_str(").");
                self.proc(cont);
                self.vars.truncate(mark);
            }
            Process::Sel { subj, label, cont } => {
                self.out.push_str("sel ");
                self.name(subj);
                self.out.push_str(&format!(" {label}."));
                self.proc(cont);
            }
            Process::Bra { subj, cases } => {
                self.out.push_str("bra ");
                self.name(subj);
                self.out.push('{');
                for (l, q) in cases {
                    self.out.push_str(&format!("{l}:"));
                    self.proc(q);
                    self.out.push(';');
                }
                self.out.push('}');
            }
            Process::App { fun, args } => {
                self.out.push_str("app ");
                self.value(fun);
                self.values(args);
            }
            Process::Par(..) => {
                // Nested components are ordered canonically as well.
                let mut parts: Vec<String> = p
                    .par_components()
                    .into_iter()
                    .map(|q| {
                        let mut sub = Canon {
                            top: self.top,
                            names: self.names.clone(),
                            vars: self.vars.clone(),
                            next: self.next,
                            out: String::new(),
                        };
                        sub.proc(q);
                        sub.out
                    })
                    .collect();
                parts.sort();
                self.out.push('[');
                self.out.push_str(&parts.join("|"));
                self.out.push(']');
            }
            Process::Res { name, body, .. } => {
                let mark = self.names.len();
                self.out.push_str("new ");
                self.bind_name(&name.plain());
                self.out.push('.');
                self.proc(body);
                self.names.truncate(mark);
            }
        }
    }
}

fn render(top: &HashMap<Key, String>, p: &Process) -> String {
    let mut c = Canon { top, names: Vec::new(), vars: Vec::new(), next: 0, out: String::new() };
    c.proc(p);
    c.out
}

fn canonical_key(restricted: &[(Name, CType)], threads: &[Process]) -> String {
    let colour = refine_colours(restricted, threads);
    let mut order: Vec<(String, usize)> = threads.iter().enumerate().map(|(i, t)| (render(&colour, t), i)).collect();
    order.sort();
    let mut numbered: HashMap<Key, String> = HashMap::new();
    for (_, i) in &order {
        for n in free_names(&threads[*i]) {
            let k = n.key();
            if colour.contains_key(&k) && !numbered.contains_key(&k) {
                let s = format!("r{}", numbered.len());
                numbered.insert(k, s);
            }
        }
    }
    let mut parts: Vec<String> = threads.iter().map(|t| render(&numbered, t)).collect();
    if parts.is_empty() {
        return "0".into();
    }
    parts.sort();
    parts.join(" | ")
}

/// Labels the restricted names so that names playing the same role in the
/// configuration get the same label. Each round relabels a name by the
/// rendering of the threads it occurs in, with the name itself marked,
/// until the number of distinct labels stops growing.
fn refine_colours(restricted: &[(Name, CType)], threads: &[Process]) -> HashMap<Key, String> {
    let mut keys: Vec<Key> = restricted.iter().map(|(n, _)| n.key()).collect();
    keys.dedup();
    let mut occurs: HashMap<Key, Vec<usize>> = keys.iter().map(|k| (k.clone(), Vec::new())).collect();
    for (i, t) in threads.iter().enumerate() {
        let mut seen = HashSet::new();
        for n in free_names(t) {
            let k = n.key();
            if let Some(v) = occurs.get_mut(&k) {
                if seen.insert(k) {
                    v.push(i);
                }
            }
        }
    }
    let mut colour: HashMap<Key, String> = keys.iter().map(|k| (k.clone(), "*".to_string())).collect();
    let mut classes = 1;
    loop {
        let mut sigs: HashMap<Key, String> = HashMap::new();
        for k in &keys {
            let mut focus = colour.clone();
            focus.insert(k.clone(), "@".into());
            let mut parts: Vec<String> = occurs[k].iter().map(|&i| render(&focus, &threads[i])).collect();
            parts.sort();
            sigs.insert(k.clone(), format!("{}{{{}}}", colour[k], parts.join("|")));
        }
        let distinct: BTreeSet<&String> = sigs.values().collect();
        let rank: HashMap<&String, usize> = distinct.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let next: HashMap<Key, String> = sigs.iter().map(|(k, s)| (k.clone(), format!("c{}", rank[s]))).collect();
        let n = distinct.len();
        colour = next;
        if n <= classes {
            return colour;
        }
        classes = n;
    }
}

/// Canonical normal form of a process: restrictions floated to the top,
/// parallel components flattened, `0` and unused restrictions dropped, and
/// threads sorted by their canonical key.
pub fn normalize(p: &Process) -> Process {
    let mut c = Config::new(p, &[]);
    c.prune();
    let anon: HashMap<Key, String> = c.restricted.iter().map(|(n, _)| (n.key(), "*".to_string())).collect();
    let mut keyed: Vec<(String, Process)> = c.threads.drain(..).map(|t| (render(&anon, &t), t)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    c.threads = keyed.into_iter().map(|(_, t)| t).collect();
    c.to_process()
}

/// Canonical key of a process, up to α-renaming, structural congruence and
/// type annotations.
pub fn canonical(p: &Process) -> String {
    let mut c = Config::new(p, &[]);
    c.prune();
    c.canonical()
}

/// All one-step successors of `p`.
pub fn step(p: &Process, frees: &[(Name, CType)]) -> Vec<(Redex, Process)> {
    let c = Config::new(p, frees);
    c.redexes().into_iter().filter_map(|r| c.fire(&r).ok().map(|n| (r, n.to_process()))).collect()
}

// ---------------------------------------------------------------------------
// Scheduling
// ---------------------------------------------------------------------------

/// The deterministic policy: synchronisations on reserved names
/// (propagators and servers) come first; among those of equal priority the
/// redex involving the most recently created thread wins.
pub fn choose(redexes: &[Redex]) -> Option<&Redex> {
    redexes.iter().max_by_key(|r| {
        let hi = r.threads.iter().copied().max().unwrap_or(0);
        let lo = r.threads.iter().copied().min().unwrap_or(0);
        (r.on_reserved(), hi, lo)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Terminal {
    Inert,
    FuelExhausted,
    Stuck,
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Terminal::Inert => "inert",
            Terminal::FuelExhausted => "fuel-exhausted",
            Terminal::Stuck => "stuck",
        })
    }
}

/// One trace record.
#[derive(Clone, Debug, Serialize)]
pub struct TraceStep {
    pub step: usize,
    pub rule: Rule,
    pub path: String,
    pub subject: Option<String>,
    pub term: String,
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    pub terminal: Terminal,
    /// Configurations after each step; `states[0]` is the initial one.
    pub states: Vec<Config>,
}

impl Trace {
    /// Line-delimited JSON, one record per step.
    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for st in &self.steps {
            s.push_str(&serde_json::to_string(st).expect("trace records serialise"));
            s.push('\n');
        }
        s
    }
}

/// Runs the deterministic policy for at most `fuel` steps.
pub fn run(p: &Process, frees: &[(Name, CType)], fuel: usize) -> Trace {
    let mut cur = Config::new(p, frees);
    let mut steps = Vec::new();
    let mut states = vec![cur.clone()];
    for i in 0..fuel {
        let rs = cur.redexes();
        let Some(r) = choose(&rs) else {
            let terminal = if cur.is_inert() { Terminal::Inert } else { Terminal::Stuck };
            return Trace { steps, terminal, states };
        };
        let next = cur.fire(r).expect("an enumerated redex fires");
        steps.push(TraceStep {
            step: i + 1,
            rule: r.rule,
            path: r.path(),
            subject: r.subject.as_ref().map(|n| n.to_string()),
            term: next.to_process().to_string(),
        });
        cur = next;
        states.push(cur.clone());
    }
    let terminal = if cur.redexes().is_empty() {
        if cur.is_inert() {
            Terminal::Inert
        } else {
            Terminal::Stuck
        }
    } else {
        Terminal::FuelExhausted
    };
    Trace { steps, terminal, states }
}

/// Result of a bounded breadth-first exploration.
#[derive(Clone, Debug)]
pub struct Exploration {
    /// Every distinct reachable configuration, in discovery order.
    pub states: Vec<Config>,
    /// Canonical keys of the reachable configurations without redexes.
    pub terminals: BTreeSet<String>,
    /// Whether some configuration at the depth bound still had redexes,
    /// or the state bound was hit.
    pub truncated: bool,
}

/// Explores all interleavings up to `fuel` steps deep, identifying
/// configurations by their canonical key, visiting at most `max_states`.
pub fn explore(p: &Process, frees: &[(Name, CType)], fuel: usize, max_states: usize) -> Exploration {
    let start = Config::new(p, frees);
    let mut seen: HashSet<String> = HashSet::new();
    seen.insert(start.canonical());
    let mut states = vec![start.clone()];
    let mut queue: VecDeque<(Config, usize)> = VecDeque::from([(start, 0)]);
    let mut terminals = BTreeSet::new();
    let mut truncated = false;
    while let Some((c, depth)) = queue.pop_front() {
        let rs = c.redexes();
        if rs.is_empty() {
            terminals.insert(c.canonical());
            continue;
        }
        if depth >= fuel {
            truncated = true;
            continue;
        }
        for r in &rs {
            let n = c.fire(r).expect("an enumerated redex fires");
            let key = n.canonical();
            if seen.insert(key) {
                if states.len() >= max_states {
                    truncated = true;
                    continue;
                }
                states.push(n.clone());
                queue.push_back((n, depth + 1));
            }
        }
    }
    Exploration { states, terminals, truncated }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_process, Mode};

    fn p(s: &str) -> Process {
        parse_process(s, Mode::User).unwrap()
    }

    #[test]
    fn normalisation_laws() {
        assert_eq!(canonical(&p("a!(1).0 | 0")), canonical(&p("a!(1).0")));
        assert_eq!(canonical(&p("new n : end in 0")), canonical(&p("0")));
        assert_eq!(canonical(&p("(a!(1) | b!(2)) | c!(3)")), canonical(&p("a!(1) | (b!(2) | c!(3))")));
        assert_eq!(canonical(&p("new s : !<Int>;end in s!(1)")), canonical(&p("new t : !<Int>;end in t!(1)")));
        assert_ne!(canonical(&p("a?(x).0")), canonical(&p("a?(x).apply x (b)")));
    }

    #[test]
    fn basic_rules() {
        let pass = p("new s : !<Int>;end in s!(1).0 | ~s?(x).a!(x).0");
        let succ = step(&pass, &[]);
        assert_eq!(succ.len(), 1);
        assert_eq!(canonical(&succ[0].1), canonical(&p("a!(1).0")));

        let app = p("apply (\\lin(x: !<Int>;end) -> x!(3).0) (a)");
        let succ = step(&app, &[]);
        assert_eq!(canonical(&succ[0].1), canonical(&p("a!(3).0")));

        let sel = p("new u : +{l: end, r: end} in select u l.a!(1) | branch ~u { l: b!(1); r: c!(1) }");
        let succ = step(&sel, &[]);
        assert_eq!(canonical(&succ[0].1), canonical(&p("a!(1) | b!(1)")));
    }
}
