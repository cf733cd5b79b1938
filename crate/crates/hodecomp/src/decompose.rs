//! Decomposition of HO processes into compositions of trios whose names all
//! carry minimal session types.
//!
//! The breakdown is type directed: every source endpoint is tracked together
//! with the indexed name that currently stands for it and its remaining
//! session type, so that each action on a session name is mimicked on the
//! next slice of that name.

use thiserror::Error;

use crate::ast::{
    barendregt, free_names, free_vars, free_vars_value, sym, Abs, Linearity, Name, Process, Sym, Value, Var,
};
use crate::typeck::check_with_frees;
use crate::types::{
    dual, findex, gdecomp, gdecomp_c, gdecomp_v, is_recursive_session, is_tail_recursive, rsdecomp, CType, SType,
    TypeError, VType,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecompError {
    #[error("process is not closed: variable `{0}` is free")]
    Open(String),
    #[error("name `{0}` already carries an index; decomposition expects index-free names")]
    Indexed(String),
    #[error("source process is not well typed: {0}")]
    IllTyped(String),
    #[error("no type is known for name `{0}`")]
    UnknownName(String),
    #[error("no type is known for variable `{0}`")]
    UnknownVar(String),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("propagator accounting failed: {0}")]
    Accounting(String),
}

type Result<T> = std::result::Result<T, DecompError>;

/// The result of decomposing a closed process.
#[derive(Clone, Debug)]
pub struct Decomposition {
    /// The source process after binder renaming; all further data refer to it.
    pub source: Process,
    /// The decomposed process.
    pub term: Process,
    /// Typing of the free names of `term`.
    pub frees: Vec<(Name, CType)>,
    /// Degree of the source process.
    pub degree: u32,
    /// Propagators restricted at top level, with the type of their input endpoint.
    pub propagators: Vec<(Name, SType)>,
    /// Server channels introduced for free names of recursive session type.
    pub servers: Vec<(Name, CType)>,
}

// ---------------------------------------------------------------------------
// Degree
// ---------------------------------------------------------------------------

/// Number of propagators the breakdown of `p` consumes.
pub fn degree(p: &Process) -> u32 {
    match p {
        Process::Out { payload, cont, .. } => payload.iter().map(degree_value).sum::<u32>() + degree(cont) + 1,
        Process::In { cont, .. } => degree(cont) + 1,
        Process::Sel { cont, .. } => degree(cont) + 2,
        Process::Bra { .. } => 1,
        Process::App { fun, .. } => degree_value(fun) + 1,
        Process::Par(a, b) => degree(a) + degree(b) + 1,
        Process::Res { body, .. } => degree(body),
        Process::Inact => 1,
    }
}

/// Number of propagators a value contributes to its enclosing scope: the
/// degree of the body for a linear abstraction, zero otherwise.
pub fn degree_value(v: &Value) -> u32 {
    match v {
        Value::Abs(a) if a.lin == Linearity::Lin => degree(&a.body),
        _ => 0,
    }
}

// ---------------------------------------------------------------------------
// Breakdown environment
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub(crate) enum Entry {
    /// Session endpoint of non-recursive type; `target` carries the index of
    /// the slice that mimics the next action.
    Session { target: Name, ty: SType },
    /// Endpoint of tail-recursive type whose slices are handed out by `server`.
    Recursive { server: Name, ty: SType },
    /// Shared channel or base-typed name.
    Fixed { target: Name, ty: CType },
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Env {
    pub(crate) names: Vec<(Sym, bool, Entry)>,
    pub(crate) vars: Vec<(Var, VType)>,
}

impl Env {
    pub(crate) fn lookup(&self, n: &Name) -> Result<&Entry> {
        if let Some((_, _, e)) = self.names.iter().rev().find(|(b, d, _)| *b == n.base && *d == n.dual) {
            return Ok(e);
        }
        self.names
            .iter()
            .rev()
            .find(|(b, _, e)| *b == n.base && matches!(e, Entry::Fixed { .. }))
            .map(|(_, _, e)| e)
            .ok_or_else(|| DecompError::UnknownName(n.to_string()))
    }
    pub(crate) fn set(&mut self, n: &Name, e: Entry) {
        match self.names.iter().rposition(|(b, d, _)| *b == n.base && *d == n.dual) {
            Some(i) => self.names[i].2 = e,
            None => self.names.push((n.base.clone(), n.dual, e)),
        }
    }
    pub(crate) fn var(&self, x: &Var) -> Result<&VType> {
        self.vars
            .iter()
            .rev()
            .find(|(y, _)| y == x)
            .map(|(_, u)| u)
            .ok_or_else(|| DecompError::UnknownVar(x.to_string()))
    }
}

pub(crate) fn server_name(n: &Name) -> Name {
    Name::new(&format!("#rec:{}{}", if n.dual { "~" } else { "" }, n.base))
}

pub(crate) fn slices(base: &Sym, dual_flag: bool, start: u32, n: usize) -> Vec<Name> {
    (0..n as u32).map(|j| Name::from_sym(base.clone(), Some(start + j), dual_flag)).collect()
}

pub(crate) fn names_as_values(ns: &[Name]) -> Vec<Value> {
    ns.iter().cloned().map(Value::Name).collect()
}

fn vars_as_values(xs: &[Var]) -> Vec<Value> {
    xs.iter().cloned().map(Value::Var).collect()
}

pub(crate) fn sessions(ts: &[SType]) -> Vec<CType> {
    ts.iter().cloned().map(CType::Session).collect()
}

/// The typing of a name that is split into slices.
pub(crate) struct Split {
    pub(crate) entry: Entry,
    pub(crate) slices: Vec<(Name, CType)>,
    /// Server channel and its type, for names of recursive type.
    pub(crate) server: Option<(Name, CType)>,
}

/// Splits the endpoint `n` of type `c`, naming its slices after `n` from index 1.
pub(crate) fn split_name(n: &Name, c: &CType) -> Result<Split> {
    match c {
        CType::Session(s) if is_tail_recursive(s) => {
            let pieces = rsdecomp(s)?;
            let server = server_name(n);
            let names = slices(&n.base, n.dual, 1, pieces.len());
            let ty = CType::Chan(VType::Lin(sessions(&pieces)));
            Ok(Split {
                entry: Entry::Recursive { server: server.clone(), ty: s.clone() },
                slices: names.into_iter().zip(sessions(&pieces)).collect(),
                server: Some((server, ty)),
            })
        }
        CType::Session(s) if is_recursive_session(s) => {
            Err(DecompError::Unsupported(format!("`{n}` has type {s}, whose recursion is preceded by prefixes")))
        }
        CType::Session(s) => {
            let pieces = gdecomp(s)?;
            let names = slices(&n.base, n.dual, 1, pieces.len());
            Ok(Split {
                entry: Entry::Session { target: n.with_index(Some(1)), ty: s.clone() },
                slices: names.into_iter().zip(sessions(&pieces)).collect(),
                server: None,
            })
        }
        other => {
            let target = n.plain().with_index(Some(1));
            let pieces = gdecomp_c(other)?;
            Ok(Split {
                entry: Entry::Fixed { target: target.clone(), ty: other.clone() },
                slices: vec![(target, pieces.into_iter().next().expect("one slice for a non-session type"))],
                server: None,
            })
        }
    }
}

/// `c?(b).(b ñ)`: hands the slices `ñ` to whoever asks on `c`.
pub(crate) fn server_process(server: &Name, args: Vec<Value>, fresh: &mut u32) -> Process {
    *fresh += 1;
    let b = Var::new(&format!("#b{fresh}"));
    Process::inp(server.clone(), vec![b.clone()], Process::app(Value::Var(b), args))
}

// ---------------------------------------------------------------------------
// Breakdown
// ---------------------------------------------------------------------------

struct Breakdown {
    fresh: u32,
    /// Propagators generated in the scopes currently open, with the type of
    /// their input endpoint.
    props: Vec<(u32, SType)>,
}

impl Breakdown {
    fn fresh(&mut self, stem: &str) -> String {
        self.fresh += 1;
        format!("#{stem}{}", self.fresh)
    }

    /// `c_k?(x̃).cont`, recording the type of `c_k`.
    fn reader(&mut self, k: u32, ctx: &[Var], env: &Env, cont: Process) -> Result<Process> {
        let mut payload = Vec::with_capacity(ctx.len());
        for x in ctx {
            payload.push(gdecomp_v(env.var(x)?)?);
        }
        self.props.push((k, SType::In(payload, Box::new(SType::End))));
        Ok(Process::inp(Name::prop(k), ctx.to_vec(), cont))
    }

    /// Closes the scope opened at `mark`: the propagators generated since
    /// then must be exactly `c_k … c_{k+deg-1}`. Returns their restrictions.
    fn close_scope(&mut self, mark: usize, k: u32, deg: u32) -> Result<Vec<(Name, CType)>> {
        let mut inner = self.props.split_off(mark);
        inner.sort_by_key(|(i, _)| *i);
        let got: Vec<u32> = inner.iter().map(|(i, _)| *i).collect();
        let want: Vec<u32> = (k..k + deg).collect();
        if got != want {
            return Err(DecompError::Accounting(format!("scope starting at c_{k} used {got:?}, expected {want:?}")));
        }
        Ok(inner.into_iter().map(|(i, s)| (Name::prop(i), CType::Session(s))).collect())
    }

    fn proc(&mut self, env: &Env, k: u32, ctx: &[Var], p: &Process) -> Result<Process> {
        match p {
            Process::Out { subj, payload, cont } => self.output(env, k, ctx, subj, payload, cont),
            Process::In { subj, binders, cont } => self.input(env, k, ctx, subj, binders, cont),
            Process::Sel { subj, label, cont } => self.select(env, k, ctx, subj, label, cont),
            Process::Bra { subj, cases } => self.branch(env, k, ctx, subj, cases),
            Process::App { fun, args } => self.apply(env, k, ctx, fun, args),
            Process::Par(a, b) => {
                let left = free_vars(a);
                let right = free_vars(b);
                let l = degree(a);
                let trio = self.reader(
                    k,
                    ctx,
                    env,
                    Process::out(
                        Name::prop(k + 1).co(),
                        vars_as_values(&left),
                        Process::out(Name::prop(k + l + 1).co(), vars_as_values(&right), Process::Inact),
                    ),
                )?;
                let pa = self.proc(env, k + 1, &left, a)?;
                let pb = self.proc(env, k + l + 1, &right, b)?;
                Ok(Process::par_all(vec![trio, pa, pb]))
            }
            Process::Res { name, ty, body } => self.restrict(env, k, ctx, name, ty, body),
            Process::Inact => self.reader(k, ctx, env, Process::Inact),
        }
    }

    fn value(&mut self, env: &Env, k: u32, v: &Value) -> Result<Value> {
        match v {
            Value::Var(_) | Value::Lit(_) => Ok(v.clone()),
            Value::Name(n) => match env.lookup(n)? {
                Entry::Fixed { target, ty: CType::Base(_) } => Ok(Value::Name(target.clone())),
                _ => Err(DecompError::Unsupported(format!("name `{n}` is passed as a value"))),
            },
            Value::Abs(a) => self.abstraction(env, k, a, &free_vars_value(v)),
        }
    }

    fn abstraction(&mut self, env: &Env, k: u32, a: &Abs, ctx: &[Var]) -> Result<Value> {
        let mut env2 = env.clone();
        let mut params = Vec::new();
        let mut servers = Vec::new();
        let mut server_decls = Vec::new();
        for (y, c) in &a.params {
            let split = split_name(y, c)?;
            if let Some((server, sty)) = split.server {
                let args = names_as_values(&split.slices.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>());
                servers.push(server_process(&server, args, &mut self.fresh));
                server_decls.push((server, sty));
            }
            env2.set(y, split.entry);
            params.extend(split.slices);
        }
        let mark = self.props.len();
        let body = self.proc(&env2, k, ctx, &a.body)?;
        let mut parts = servers;
        parts.push(Process::out(Name::prop(k).co(), vars_as_values(ctx), Process::Inact));
        parts.push(body);
        let mut n = Process::res_all(server_decls, Process::par_all(parts));
        if a.lin == Linearity::Sh {
            let restricted = self.close_scope(mark, k, degree(&a.body))?;
            n = Process::res_all(restricted, n);
        }
        Ok(Value::abs(params, a.lin, n))
    }

    fn output(
        &mut self,
        env: &Env,
        k: u32,
        ctx: &[Var],
        subj: &Name,
        payload: &[Value],
        cont: &Process,
    ) -> Result<Process> {
        let mut env2 = env.clone();
        let entry = env.lookup(subj)?.clone();
        let rest_ctx = free_vars(cont);
        let mut values = Vec::with_capacity(payload.len());
        let decompose_payload = |this: &mut Self, env2: &Env, values: &mut Vec<Value>| -> Result<u32> {
            let mut l = 0;
            for v in payload {
                values.push(this.value(env2, k + 1 + l, v)?);
                l += degree_value(v);
            }
            Ok(l)
        };
        match entry {
            Entry::Session { target, ty } => {
                let SType::Out(_, next) = ty.unfold() else {
                    return Err(DecompError::Unsupported(format!("output on `{subj}` of type {ty}")));
                };
                env2.set(subj, Entry::Session { target: target.with_index(target.index.map(|i| i + 1)), ty: *next });
                let l = decompose_payload(self, &env2, &mut values)?;
                let trio = self.reader(
                    k,
                    ctx,
                    env,
                    Process::out(
                        target,
                        values,
                        Process::out(Name::prop(k + l + 1).co(), vars_as_values(&rest_ctx), Process::Inact),
                    ),
                )?;
                let rest = self.proc(&env2, k + l + 1, &rest_ctx, cont)?;
                Ok(Process::par(trio, rest))
            }
            Entry::Fixed { target, ty: CType::Chan(_) } => {
                let l = decompose_payload(self, &env2, &mut values)?;
                let trio = self.reader(
                    k,
                    ctx,
                    env,
                    Process::out(
                        target,
                        values,
                        Process::out(Name::prop(k + l + 1).co(), vars_as_values(&rest_ctx), Process::Inact),
                    ),
                )?;
                let rest = self.proc(&env2, k + l + 1, &rest_ctx, cont)?;
                Ok(Process::par(trio, rest))
            }
            Entry::Recursive { server, ty } => {
                let SType::Out(_, next) = ty.unfold() else {
                    return Err(DecompError::Unsupported(format!("output on `{subj}` of type {ty}")));
                };
                let pieces = rsdecomp(&ty)?;
                let f = findex(&ty)?;
                env2.set(subj, Entry::Recursive { server: server.clone(), ty: *next });
                let l = decompose_payload(self, &env2, &mut values)?;
                let zbase = sym(&self.fresh("r"));
                let zs = slices(&zbase, false, 1, pieces.len());
                let reinstate = server_process(&server, names_as_values(&zs), &mut self.fresh);
                let body = Process::out(
                    zs[f - 1].clone(),
                    values,
                    Process::out(Name::prop(k + l + 1).co(), vars_as_values(&rest_ctx), reinstate),
                );
                let nv = Value::abs(zs.into_iter().zip(sessions(&pieces)).collect(), Linearity::Lin, body);
                let trio = self.reader(k, ctx, env, Process::out(server, vec![nv], Process::Inact))?;
                let rest = self.proc(&env2, k + l + 1, &rest_ctx, cont)?;
                Ok(Process::par(trio, rest))
            }
            Entry::Fixed { ty, .. } => {
                Err(DecompError::Unsupported(format!("output on `{subj}`, a name of base type {ty}")))
            }
        }
    }

    fn input(
        &mut self,
        env: &Env,
        k: u32,
        ctx: &[Var],
        subj: &Name,
        binders: &[Var],
        cont: &Process,
    ) -> Result<Process> {
        let mut env2 = env.clone();
        let entry = env.lookup(subj)?.clone();
        let rest_ctx = free_vars(cont);
        let forward = |reinstate: Process| Process::out(Name::prop(k + 1).co(), vars_as_values(&rest_ctx), reinstate);
        let bind = |env2: &mut Env, us: &[VType]| -> Result<()> {
            if us.len() != binders.len() {
                return Err(DecompError::Unsupported(format!("arity mismatch on input `{subj}`")));
            }
            for (x, u) in binders.iter().zip(us) {
                env2.vars.push((x.clone(), u.clone()));
            }
            Ok(())
        };
        let trio = match entry {
            Entry::Session { target, ty } => {
                let SType::In(us, next) = ty.unfold() else {
                    return Err(DecompError::Unsupported(format!("input on `{subj}` of type {ty}")));
                };
                bind(&mut env2, &us)?;
                env2.set(subj, Entry::Session { target: target.with_index(target.index.map(|i| i + 1)), ty: *next });
                self.reader(k, ctx, env, Process::inp(target, binders.to_vec(), forward(Process::Inact)))?
            }
            Entry::Fixed { target, ty: CType::Chan(u) } => {
                bind(&mut env2, std::slice::from_ref(&u))?;
                self.reader(k, ctx, env, Process::inp(target, binders.to_vec(), forward(Process::Inact)))?
            }
            Entry::Recursive { server, ty } => {
                let SType::In(us, next) = ty.unfold() else {
                    return Err(DecompError::Unsupported(format!("input on `{subj}` of type {ty}")));
                };
                let pieces = rsdecomp(&ty)?;
                let f = findex(&ty)?;
                bind(&mut env2, &us)?;
                env2.set(subj, Entry::Recursive { server: server.clone(), ty: *next });
                let zbase = sym(&self.fresh("r"));
                let zs = slices(&zbase, false, 1, pieces.len());
                let reinstate = server_process(&server, names_as_values(&zs), &mut self.fresh);
                let body = Process::inp(zs[f - 1].clone(), binders.to_vec(), forward(reinstate));
                let ny = Value::abs(zs.into_iter().zip(sessions(&pieces)).collect(), Linearity::Lin, body);
                self.reader(k, ctx, env, Process::out(server, vec![ny], Process::Inact))?
            }
            Entry::Fixed { ty, .. } => {
                return Err(DecompError::Unsupported(format!("input on `{subj}`, a name of base type {ty}")))
            }
        };
        let rest = self.proc(&env2, k + 1, &rest_ctx, cont)?;
        Ok(Process::par(trio, rest))
    }

    fn apply(&mut self, env: &Env, k: u32, ctx: &[Var], fun: &Value, args: &[Value]) -> Result<Process> {
        let fun2 = match fun {
            Value::Var(_) => fun.clone(),
            Value::Abs(a) => self.abstraction(env, k + 1, a, &free_vars_value(fun))?,
            other => return Err(DecompError::Unsupported(format!("application of `{other}`"))),
        };
        let mut args2 = Vec::new();
        // Recursive arguments: server, slice variables and their types.
        let mut wraps: Vec<(Name, Vec<Name>, Vec<SType>)> = Vec::new();
        for a in args {
            match a {
                Value::Name(n) => match env.lookup(n)? {
                    Entry::Session { target, ty } => {
                        let len = gdecomp(ty)?.len();
                        let start = target.index.unwrap_or(1);
                        args2.extend(names_as_values(&slices(&target.base, target.dual, start, len)));
                    }
                    Entry::Fixed { target, .. } => args2.push(Value::Name(target.clone())),
                    Entry::Recursive { server, ty } => {
                        let pieces = rsdecomp(ty)?;
                        let zbase = sym(&self.fresh("r"));
                        let zs = slices(&zbase, false, 1, pieces.len());
                        args2.extend(names_as_values(&zs));
                        wraps.push((server.clone(), zs, pieces));
                    }
                },
                Value::Var(_) | Value::Lit(_) => args2.push(a.clone()),
                Value::Abs(_) => return Err(DecompError::Unsupported("abstraction passed as an argument".into())),
            }
        }
        let mut body = Process::app(fun2, args2);
        for (server, zs, pieces) in wraps.into_iter().rev() {
            let abs = Value::abs(zs.into_iter().zip(sessions(&pieces)).collect(), Linearity::Lin, body);
            body = Process::out(server, vec![abs], Process::Inact);
        }
        self.reader(k, ctx, env, body)
    }

    fn restrict(&mut self, env: &Env, k: u32, ctx: &[Var], name: &Name, ty: &CType, body: &Process) -> Result<Process> {
        let mut env2 = env.clone();
        match ty {
            CType::Session(s) => {
                let plain = name.plain();
                let here = split_name(&plain, ty)?;
                let there = split_name(&plain.co(), &CType::Session(dual(s)))?;
                env2.set(&plain, here.entry);
                env2.set(&plain.co(), there.entry);
                let inner = self.proc(&env2, k, ctx, body)?;
                let decls: Vec<(Name, CType)> = here.slices.clone();
                match (here.server, there.server) {
                    (Some((sa, ta)), Some((sb, tb))) => {
                        let own: Vec<Value> =
                            names_as_values(&here.slices.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>());
                        let other: Vec<Value> = own
                            .iter()
                            .map(|v| match v {
                                Value::Name(n) => Value::Name(n.co()),
                                v => v.clone(),
                            })
                            .collect();
                        let pa = server_process(&sa, own, &mut self.fresh);
                        let pb = server_process(&sb, other, &mut self.fresh);
                        let servers = vec![(sa, ta), (sb, tb)];
                        Ok(Process::res_all(decls, Process::res_all(servers, Process::par_all(vec![pa, pb, inner]))))
                    }
                    _ => Ok(Process::res_all(decls, inner)),
                }
            }
            CType::Chan(_) => {
                let split = split_name(name, ty)?;
                env2.set(&name.plain(), split.entry);
                let inner = self.proc(&env2, k, ctx, body)?;
                Ok(Process::res_all(split.slices, inner))
            }
            CType::Base(b) => Err(DecompError::Unsupported(format!("restriction of `{name}` at base type {b}"))),
        }
    }

    fn branch(&mut self, env: &Env, k: u32, ctx: &[Var], subj: &Name, cases: &[(Sym, Process)]) -> Result<Process> {
        let Entry::Session { target, ty } = env.lookup(subj)?.clone() else {
            return Err(DecompError::Unsupported(format!("branching on `{subj}`, which is not a plain session")));
        };
        let SType::Bra(tcases) = ty.unfold() else {
            return Err(DecompError::Unsupported(format!("branching on `{subj}` of type {ty}")));
        };
        let mut out = Vec::with_capacity(cases.len());
        for (label, pj) in cases {
            let sj = tcases
                .iter()
                .find(|(l, _)| l == label)
                .map(|(_, s)| s.clone())
                .ok_or_else(|| DecompError::Unsupported(format!("label `{label}` not offered by {ty}")))?;
            if is_recursive_session(&sj) {
                return Err(DecompError::Unsupported(format!("branch continuation of recursive type {sj}")));
            }
            let pieces = gdecomp(&sj)?;
            let nbase = sym(&self.fresh("n"));
            let params: Vec<(Name, CType)> =
                slices(&nbase, false, 1, pieces.len()).into_iter().zip(sessions(&pieces)).collect();
            let mut env2 = env.clone();
            env2.set(subj, Entry::Session { target: Name::from_sym(nbase, Some(1), false), ty: sj });
            let mark = self.props.len();
            let body = self.proc(&env2, k + 1, ctx, pj)?;
            let restricted = self.close_scope(mark, k + 1, degree(pj))?;
            let n = Process::par(Process::out(Name::prop(k + 1).co(), vars_as_values(ctx), Process::Inact), body);
            let send = Process::out(target.clone(), vec![Value::abs(params, Linearity::Lin, n)], Process::Inact);
            out.push((label.clone(), Process::res_all(restricted, send)));
        }
        self.reader(k, ctx, env, Process::Bra { subj: target, cases: out })
    }

    fn select(&mut self, env: &Env, k: u32, ctx: &[Var], subj: &Name, label: &Sym, cont: &Process) -> Result<Process> {
        let Entry::Session { target, ty } = env.lookup(subj)?.clone() else {
            return Err(DecompError::Unsupported(format!("selection on `{subj}`, which is not a plain session")));
        };
        let SType::Sel(tcases) = ty.unfold() else {
            return Err(DecompError::Unsupported(format!("selection on `{subj}` of type {ty}")));
        };
        let sj = tcases
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, s)| s.clone())
            .ok_or_else(|| DecompError::Unsupported(format!("label `{label}` not offered by {ty}")))?;
        if is_recursive_session(&sj) {
            return Err(DecompError::Unsupported(format!("selection continuation of recursive type {sj}")));
        }
        let pieces = gdecomp(&sj)?;
        let dpieces = gdecomp(&dual(&sj))?;
        let tag = self.fresh("m");
        let mbase = sym(&tag);
        let z = Var::new(&format!("{tag}z"));
        let y = Var::new(&format!("{tag}y"));
        let ms = slices(&mbase, false, 1, dpieces.len());
        let mj = Value::abs(
            ms.iter().cloned().zip(sessions(&dpieces)).collect(),
            Linearity::Lin,
            Process::sel(
                target.clone(),
                label,
                Process::inp(
                    target.clone(),
                    vec![z.clone()],
                    Process::out(
                        Name::prop(k + 2).co(),
                        vars_as_values(ctx),
                        Process::app(Value::Var(z), names_as_values(&ms)),
                    ),
                ),
            ),
        );
        let trio = self.reader(k, ctx, env, Process::out(Name::prop(k + 1).co(), vec![mj], Process::Inact))?;

        // The continuation slices reuse the base of the endpoint unless the
        // opposite endpoint still occurs in the continuation.
        let clash = free_names(cont).iter().any(|n| n.base == subj.base && n.dual != subj.dual);
        let (cbase, start) =
            if clash { (sym(&format!("{tag}u")), 1) } else { (target.base.clone(), target.index.unwrap_or(1) + 1) };
        let us = slices(&cbase, false, start, pieces.len());
        let co_us: Vec<Name> = us.iter().map(Name::co).collect();
        self.props.push((k + 1, SType::In(vec![VType::Lin(sessions(&dpieces))], Box::new(SType::End))));
        let receiver =
            Process::inp(Name::prop(k + 1), vec![y.clone()], Process::app(Value::Var(y), names_as_values(&co_us)));
        let mut env2 = env.clone();
        env2.set(subj, Entry::Session { target: Name::from_sym(cbase, Some(start), false), ty: sj });
        let rest = self.proc(&env2, k + 2, ctx, cont)?;
        Ok(Process::par(
            trio,
            Process::res_all(us.into_iter().zip(sessions(&pieces)).collect(), Process::par(receiver, rest)),
        ))
    }
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

pub(crate) fn check_unindexed(p: &Process) -> Result<()> {
    fn name(n: &Name) -> Result<()> {
        match n.index {
            Some(_) => Err(DecompError::Indexed(n.to_string())),
            None => Ok(()),
        }
    }
    fn value(v: &Value) -> Result<()> {
        match v {
            Value::Name(n) => name(n),
            Value::Abs(a) => {
                for (n, _) in &a.params {
                    name(n)?;
                }
                proc(&a.body)
            }
            _ => Ok(()),
        }
    }
    fn proc(p: &Process) -> Result<()> {
        match p {
            Process::Out { subj, payload, cont } => {
                name(subj)?;
                payload.iter().try_for_each(value)?;
                proc(cont)
            }
            Process::In { subj, cont, .. } | Process::Sel { subj, cont, .. } => {
                name(subj)?;
                proc(cont)
            }
            Process::Bra { subj, cases } => {
                name(subj)?;
                cases.iter().try_for_each(|(_, q)| proc(q))
            }
            Process::App { fun, args } => {
                value(fun)?;
                args.iter().try_for_each(value)
            }
            Process::Par(a, b) => {
                proc(a)?;
                proc(b)
            }
            Process::Res { name: n, body, .. } => {
                name(n)?;
                proc(body)
            }
            Process::Inact => Ok(()),
        }
    }
    proc(p)
}

/// Decomposes a closed, index-free process whose free names are typed by
/// `frees`. Each free endpoint is listed separately with its own type.
pub fn decompose(p: &Process, frees: &[(Name, CType)]) -> Result<Decomposition> {
    let source = barendregt(p);
    if let Some(x) = free_vars(&source).first() {
        return Err(DecompError::Open(x.to_string()));
    }
    check_unindexed(&source)?;
    for (n, _) in frees {
        if n.index.is_some() {
            return Err(DecompError::Indexed(n.to_string()));
        }
    }
    let typed = check_with_frees(frees, &source);
    if !typed.ok {
        return Err(DecompError::IllTyped(typed.message()));
    }

    let mut bd = Breakdown { fresh: 0, props: Vec::new() };
    let mut env = Env::default();
    let mut dfrees = Vec::new();
    let mut servers = Vec::new();
    let mut server_procs = Vec::new();
    for (n, c) in frees {
        let split = split_name(n, c)?;
        if let Some((server, sty)) = split.server {
            let args = names_as_values(&split.slices.iter().map(|(m, _)| m.clone()).collect::<Vec<_>>());
            server_procs.push(server_process(&server, args, &mut bd.fresh));
            servers.push((server, sty));
        }
        env.set(n, split.entry);
        dfrees.extend(split.slices);
    }

    let deg = degree(&source);
    let body = bd.proc(&env, 1, &[], &source)?;
    let restricted = bd.close_scope(0, 1, deg)?;
    let mut parts = server_procs;
    parts.push(Process::out(Name::prop(1).co(), vec![], Process::Inact));
    parts.push(body);
    let term = Process::res_all(restricted.clone(), Process::res_all(servers.clone(), Process::par_all(parts)));
    audit_propagators(&term).map_err(DecompError::Accounting)?;

    let propagators = restricted
        .into_iter()
        .map(|(n, c)| match c {
            CType::Session(s) => (n, s),
            _ => unreachable!("propagators carry session types"),
        })
        .collect();
    Ok(Decomposition { source, term, frees: dfrees, degree: deg, propagators, servers })
}

fn standalone_env(frees: &[(Name, CType)], vars: &[(Var, VType)]) -> Result<Env> {
    let mut env = Env::default();
    for (n, c) in frees {
        env.set(n, split_name(n, c)?.entry);
    }
    env.vars = vars.to_vec();
    Ok(env)
}

/// The breakdown `B_k(P)` of a subterm on its own, with context `fv(P)`.
/// Free names typed by `frees` are mimicked by their slices from index 1,
/// and free variables are typed by `vars`.
pub fn breakdown_process(p: &Process, k: u32, frees: &[(Name, CType)], vars: &[(Var, VType)]) -> Result<Process> {
    let env = standalone_env(frees, vars)?;
    let mut bd = Breakdown { fresh: 0, props: Vec::new() };
    bd.proc(&env, k, &free_vars(p), p)
}

/// The breakdown `V_k(V)` of a value on its own; see [`breakdown_process`].
pub fn breakdown_value(v: &Value, k: u32, frees: &[(Name, CType)], vars: &[(Var, VType)]) -> Result<Value> {
    let env = standalone_env(frees, vars)?;
    let mut bd = Breakdown { fresh: 0, props: Vec::new() };
    bd.value(&env, k, v)
}

// ---------------------------------------------------------------------------
// Audit
// ---------------------------------------------------------------------------

#[derive(Default)]
struct Uses {
    inputs: Vec<Vec<Var>>,
    outputs: Vec<Vec<Value>>,
}

fn uses_in_proc(p: &Process, c: &Name, u: &mut Uses) {
    match p {
        Process::Out { subj, payload, cont } => {
            if subj.key() == c.key() {
                u.outputs.push(payload.clone());
            }
            payload.iter().for_each(|v| uses_in_value(v, c, u));
            uses_in_proc(cont, c, u);
        }
        Process::In { subj, binders, cont } => {
            if subj.key() == c.key() {
                u.inputs.push(binders.clone());
            }
            uses_in_proc(cont, c, u);
        }
        Process::Sel { cont, .. } => uses_in_proc(cont, c, u),
        Process::Bra { cases, .. } => cases.iter().for_each(|(_, q)| uses_in_proc(q, c, u)),
        Process::App { fun, args } => {
            uses_in_value(fun, c, u);
            args.iter().for_each(|v| uses_in_value(v, c, u));
        }
        Process::Par(a, b) => {
            uses_in_proc(a, c, u);
            uses_in_proc(b, c, u);
        }
        Process::Res { name, body, .. } => {
            if name.key() != c.key() {
                uses_in_proc(body, c, u);
            }
        }
        Process::Inact => {}
    }
}

fn uses_in_value(v: &Value, c: &Name, u: &mut Uses) {
    if let Value::Abs(a) = v {
        uses_in_proc(&a.body, c, u);
    }
}

/// Checks that every restricted propagator is used by exactly one input and
/// one output, and that a propagator carrying a context sends exactly the
/// variables its reader binds.
pub fn audit_propagators(p: &Process) -> std::result::Result<(), String> {
    fn walk(p: &Process) -> std::result::Result<(), String> {
        match p {
            Process::Out { payload, cont, .. } => {
                payload.iter().try_for_each(walk_value)?;
                walk(cont)
            }
            Process::In { cont, .. } | Process::Sel { cont, .. } => walk(cont),
            Process::Bra { cases, .. } => cases.iter().try_for_each(|(_, q)| walk(q)),
            Process::App { fun, args } => {
                walk_value(fun)?;
                args.iter().try_for_each(walk_value)
            }
            Process::Par(a, b) => {
                walk(a)?;
                walk(b)
            }
            Process::Res { name, body, .. } => {
                if name.prop_index().is_some() {
                    let mut u = Uses::default();
                    uses_in_proc(body, name, &mut u);
                    if u.inputs.len() != 1 || u.outputs.len() != 1 {
                        return Err(format!("{name} has {} inputs and {} outputs", u.inputs.len(), u.outputs.len()));
                    }
                    let (ins, outs) = (&u.inputs[0], &u.outputs[0]);
                    if ins.len() != outs.len() {
                        return Err(format!("{name} binds {} variables but carries {}", ins.len(), outs.len()));
                    }
                    let carries_context = outs.iter().all(|v| matches!(v, Value::Var(_)));
                    if carries_context && !ins.iter().zip(outs).all(|(x, v)| *v == Value::Var(x.clone())) {
                        return Err(format!("{name} does not propagate the context its reader expects"));
                    }
                }
                walk(body)
            }
            Process::Inact => Ok(()),
        }
    }
    fn walk_value(v: &Value) -> std::result::Result<(), String> {
        match v {
            Value::Abs(a) => walk(&a.body),
            _ => Ok(()),
        }
    }
    walk(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_file, parse_process, Mode};
    use crate::typeck::check_minimal_typed;

    fn degree_of(src: &str) -> u32 {
        degree(&parse_process(src, Mode::User).unwrap())
    }

    #[test]
    fn degree_rows() {
        assert_eq!(degree_of("0"), 1);
        assert_eq!(degree_of("a?(x).0"), 2);
        assert_eq!(degree_of("a!(\\lin(b: Bool) -> 0).0"), 3);
        assert_eq!(degree_of("a!(\\un(b: Bool) -> 0).0"), 2);
        assert_eq!(degree_of("0 | 0"), 3);
        assert_eq!(degree_of("select a l.0"), 3);
        assert_eq!(degree_of("branch a { l: 0; r: 0 | 0 }"), 1);
    }

    #[test]
    fn simple_session_decomposes_to_minimal_types() {
        let f = parse_file(
            "free a : !<Int>;?<Bool>;end; free ~a : ?<Int>;!<Bool>;end;\
             a!(1).a?(x).0 | ~a?(y).~a!(true).0",
            Mode::User,
        )
        .unwrap();
        let d = decompose(&f.process, &f.frees).unwrap();
        let r = check_minimal_typed(&d.frees, &d.term);
        assert!(r.ok, "{}\n{}", r.message(), d.term);
        assert_eq!(d.propagators.len() as u32, d.degree);
    }

    #[test]
    fn indexed_names_are_rejected() {
        let p = parse_process("a_1!(1).0", Mode::Internal).unwrap();
        assert!(matches!(decompose(&p, &[]), Err(DecompError::Indexed(_)) | Err(DecompError::IllTyped(_))));
    }
}
