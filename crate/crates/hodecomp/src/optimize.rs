//! Two refinements of the decomposition built on thunks: rewriting trios
//! into duos, and a monadic breakdown in which every communication carries
//! exactly one value.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ast::{barendregt, free_vars, free_vars_value, sym, Abs, Linearity, Name, Process, Sym, Value, Var};
use crate::decompose::{
    check_unindexed, names_as_values, server_process, sessions, slices, split_name, DecompError, Decomposition, Entry,
    Env,
};
use crate::typeck::check_with_frees;
use crate::types::{dual, findex, gdecomp, gdecomp_v, is_recursive_session, rsdecomp, CType, SType, TypeError, VType};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptError {
    #[error("sequence of {0} prefixes found; expected decomposition output with at most three")]
    TooDeep(usize),
    #[error(transparent)]
    Decomp(#[from] DecompError),
}

impl From<TypeError> for OptError {
    fn from(e: TypeError) -> Self {
        OptError::Decomp(DecompError::Type(e))
    }
}

type Result<T> = std::result::Result<T, OptError>;

// ---------------------------------------------------------------------------
// Thunks
// ---------------------------------------------------------------------------

/// Type `chan un(end)` of the dummy name a thunk is applied to.
pub fn thunk_param_type() -> CType {
    CType::Chan(VType::Sh(vec![CType::Session(SType::End)]))
}

/// Type of a thunk: a linear abstraction over one dummy name.
pub fn thunk_type() -> VType {
    VType::Lin(vec![thunk_param_type()])
}

/// Input-endpoint type of a channel that carries one thunk.
fn thunk_channel_type() -> CType {
    CType::Session(SType::In(vec![thunk_type()], Box::new(SType::End)))
}

/// `{P}`: the abstraction of `p` over a dummy name not free in `p`.
pub fn thunk(p: Process) -> Value {
    Value::abs(vec![(Name::new("#x"), thunk_param_type())], Linearity::Lin, p)
}

/// Whether `v` has the shape of a thunk.
pub fn is_thunk(v: &Value) -> bool {
    match v {
        Value::Abs(a) => {
            a.lin == Linearity::Lin
                && a.params.len() == 1
                && a.params[0].1 == thunk_param_type()
                && !crate::ast::free_names(&a.body).iter().any(|n| n.key() == a.params[0].0.key())
        }
        _ => false,
    }
}

/// `c?(b).(b t)`: receives a thunk on `c` and activates it with a fresh dummy name.
fn activator(c: Name, b: Var) -> Process {
    let t = Name::new("#t");
    Process::inp(
        c,
        vec![b.clone()],
        Process::res(t.clone(), thunk_param_type(), Process::app(Value::Var(b), vec![Value::Name(t)])),
    )
}

// ---------------------------------------------------------------------------
// Audits
// ---------------------------------------------------------------------------

fn chain_depth(p: &Process) -> usize {
    match p {
        Process::Inact | Process::App { .. } => 0,
        Process::Out { cont, .. } | Process::In { cont, .. } | Process::Sel { cont, .. } => 1 + chain_depth(cont),
        Process::Bra { cases, .. } => 1 + cases.iter().map(|(_, q)| chain_depth(q)).max().unwrap_or(0),
        Process::Par(a, b) => chain_depth(a).max(chain_depth(b)),
        Process::Res { body, .. } => chain_depth(body),
    }
}

/// Longest sequence of nested prefixes, not counting the bodies of thunks
/// but looking inside every other abstraction.
pub fn max_prefix_depth_outside_thunks(p: &Process) -> usize {
    fn values_in(p: &Process, out: &mut Vec<Value>) {
        match p {
            Process::Inact => {}
            Process::Out { payload, cont, .. } => {
                out.extend(payload.iter().cloned());
                values_in(cont, out);
            }
            Process::In { cont, .. } | Process::Sel { cont, .. } => values_in(cont, out),
            Process::Bra { cases, .. } => cases.iter().for_each(|(_, q)| values_in(q, out)),
            Process::App { fun, args } => {
                out.push(fun.clone());
                out.extend(args.iter().cloned());
            }
            Process::Par(a, b) => {
                values_in(a, out);
                values_in(b, out);
            }
            Process::Res { body, .. } => values_in(body, out),
        }
    }
    fn in_value(v: &Value) -> usize {
        match v {
            Value::Abs(a) if is_thunk(v) => {
                // The thunk body itself is exempt; abstractions it carries are not.
                let mut vs = Vec::new();
                values_in(&a.body, &mut vs);
                vs.iter().map(in_value).max().unwrap_or(0)
            }
            Value::Abs(a) => max_prefix_depth_outside_thunks(&a.body),
            _ => 0,
        }
    }
    let mut vs = Vec::new();
    values_in(p, &mut vs);
    chain_depth(p).max(vs.iter().map(in_value).max().unwrap_or(0))
}

/// Checks that every output carries exactly one value and every input binds
/// exactly one variable.
pub fn audit_monadic(p: &Process) -> std::result::Result<(), String> {
    fn value(v: &Value) -> std::result::Result<(), String> {
        match v {
            Value::Abs(a) => audit_monadic(&a.body),
            _ => Ok(()),
        }
    }
    match p {
        Process::Inact => Ok(()),
        Process::Out { subj, payload, cont } => {
            if payload.len() != 1 {
                return Err(format!("output on `{subj}` carries {} values", payload.len()));
            }
            payload.iter().try_for_each(value)?;
            audit_monadic(cont)
        }
        Process::In { subj, binders, cont } => {
            if binders.len() != 1 {
                return Err(format!("input on `{subj}` binds {} variables", binders.len()));
            }
            audit_monadic(cont)
        }
        Process::Sel { cont, .. } => audit_monadic(cont),
        Process::Bra { cases, .. } => cases.iter().try_for_each(|(_, q)| audit_monadic(q)),
        Process::App { fun, args } => {
            value(fun)?;
            args.iter().try_for_each(value)
        }
        Process::Par(a, b) => {
            audit_monadic(a)?;
            audit_monadic(b)
        }
        Process::Res { body, .. } => audit_monadic(body),
    }
}

// ---------------------------------------------------------------------------
// Trios to duos
// ---------------------------------------------------------------------------

/// Position of a propagator in the final numbering: original propagators
/// `c_k` sit at `(k, 0)`; an inserted one sits just before or after an
/// original index.
type SortKey = (u64, i8, u32);

struct Duos {
    inserted: Vec<SortKey>,
    fresh: u32,
}

impl Duos {
    fn insert(&mut self, chain: &Process) -> Name {
        let key = match chain {
            Process::In { subj, .. } if subj.base.as_ref() == "#" && subj.index.is_some() => {
                (u64::from(subj.index.unwrap()), 1, 0)
            }
            _ => match first_prop_output(chain) {
                Some(j) => (u64::from(j), -1, 0),
                None => (u64::MAX, 0, self.inserted.len() as u32),
            },
        };
        self.inserted.push(key);
        Name::indexed("#d", (self.inserted.len() - 1) as u32)
    }

    fn fresh_var(&mut self) -> Var {
        self.fresh += 1;
        Var::new(&format!("#db{}", self.fresh))
    }

    fn value(&mut self, v: &Value) -> Result<Value> {
        match v {
            Value::Abs(a) => Ok(Value::abs(a.params.clone(), a.lin, self.proc(&a.body)?)),
            other => Ok(other.clone()),
        }
    }

    fn values(&mut self, vs: &[Value]) -> Result<Vec<Value>> {
        vs.iter().map(|v| self.value(v)).collect()
    }

    /// Rewrites the values inside a process whose prefix structure is kept.
    fn inner(&mut self, p: &Process) -> Result<Process> {
        Ok(match p {
            Process::Inact => Process::Inact,
            Process::Out { subj, payload, cont } => {
                Process::out(subj.clone(), self.values(payload)?, self.inner(cont)?)
            }
            Process::In { subj, binders, cont } => Process::inp(subj.clone(), binders.clone(), self.inner(cont)?),
            Process::Sel { subj, label, cont } => {
                Process::Sel { subj: subj.clone(), label: label.clone(), cont: Box::new(self.inner(cont)?) }
            }
            Process::Bra { subj, cases } => Process::Bra {
                subj: subj.clone(),
                cases: cases.iter().map(|(l, q)| Ok((l.clone(), self.inner(q)?))).collect::<Result<_>>()?,
            },
            Process::App { fun, args } => Process::app(self.value(fun)?, self.values(args)?),
            Process::Par(..) | Process::Res { .. } => self.proc(p)?,
        })
    }

    fn proc(&mut self, p: &Process) -> Result<Process> {
        match p {
            Process::Par(a, b) => Ok(Process::par(self.proc(a)?, self.proc(b)?)),
            Process::Res { name, ty, body } => Ok(Process::res(name.clone(), ty.clone(), self.proc(body)?)),
            _ => {
                let d = chain_depth(p);
                if d > 3 {
                    return Err(OptError::TooDeep(d));
                }
                if d < 3 {
                    return self.inner(p);
                }
                let c = self.insert(p);
                let b = self.fresh_var();
                let send = |body: Process| Process::out(c.co(), vec![thunk(body)], Process::Inact);
                let head = match p {
                    Process::Out { subj, payload, cont } => {
                        Process::out(subj.clone(), self.values(payload)?, send(self.inner(cont)?))
                    }
                    Process::In { subj, binders, cont } => {
                        Process::inp(subj.clone(), binders.clone(), send(self.inner(cont)?))
                    }
                    Process::Sel { subj, label, cont } => Process::Sel {
                        subj: subj.clone(),
                        label: label.clone(),
                        cont: Box::new(send(self.inner(cont)?)),
                    },
                    Process::Bra { subj, cases } => Process::Bra {
                        subj: subj.clone(),
                        cases: cases
                            .iter()
                            .map(|(l, q)| Ok((l.clone(), send(self.inner(q)?))))
                            .collect::<Result<_>>()?,
                    },
                    _ => unreachable!("a chain of depth three starts with a prefix"),
                };
                Ok(Process::res(c.clone(), thunk_channel_type(), Process::par(head, activator(c, b))))
            }
        }
    }
}

fn first_prop_output(p: &Process) -> Option<u32> {
    match p {
        Process::Out { subj, cont, .. } => {
            if subj.base.as_ref() == "#" {
                subj.index
            } else {
                first_prop_output(cont)
            }
        }
        Process::In { cont, .. } | Process::Sel { cont, .. } => first_prop_output(cont),
        Process::Bra { cases, .. } => cases.iter().find_map(|(_, q)| first_prop_output(q)),
        _ => None,
    }
}

/// Applies `f` to every name occurrence, binders included.
fn map_names(p: &Process, f: &dyn Fn(&Name) -> Name) -> Process {
    fn value(v: &Value, f: &dyn Fn(&Name) -> Name) -> Value {
        match v {
            Value::Name(n) => Value::Name(f(n)),
            Value::Abs(a) => {
                Value::abs(a.params.iter().map(|(n, c)| (f(n), c.clone())).collect(), a.lin, map_names(&a.body, f))
            }
            other => other.clone(),
        }
    }
    match p {
        Process::Inact => Process::Inact,
        Process::Out { subj, payload, cont } => {
            Process::out(f(subj), payload.iter().map(|v| value(v, f)).collect(), map_names(cont, f))
        }
        Process::In { subj, binders, cont } => Process::inp(f(subj), binders.clone(), map_names(cont, f)),
        Process::Sel { subj, label, cont } => {
            Process::Sel { subj: f(subj), label: label.clone(), cont: Box::new(map_names(cont, f)) }
        }
        Process::Bra { subj, cases } => {
            Process::Bra { subj: f(subj), cases: cases.iter().map(|(l, q)| (l.clone(), map_names(q, f))).collect() }
        }
        Process::App { fun, args } => Process::app(value(fun, f), args.iter().map(|v| value(v, f)).collect()),
        Process::Par(a, b) => Process::par(map_names(a, f), map_names(b, f)),
        Process::Res { name, ty, body } => Process::res(f(name), ty.clone(), map_names(body, f)),
    }
}

fn collect_prop_indices(p: &Process, out: &mut Vec<u32>) {
    let record = |n: &Name, out: &mut Vec<u32>| {
        if n.base.as_ref() == "#" {
            out.extend(n.index);
        }
    };
    fn value(v: &Value, out: &mut Vec<u32>) {
        match v {
            Value::Name(n) if n.base.as_ref() == "#" => out.extend(n.index),
            Value::Abs(a) => collect_prop_indices(&a.body, out),
            _ => {}
        }
    }
    match p {
        Process::Inact => {}
        Process::Out { subj, payload, cont } => {
            record(subj, out);
            payload.iter().for_each(|v| value(v, out));
            collect_prop_indices(cont, out);
        }
        Process::In { subj, cont, .. } | Process::Sel { subj, cont, .. } => {
            record(subj, out);
            collect_prop_indices(cont, out);
        }
        Process::Bra { subj, cases } => {
            record(subj, out);
            cases.iter().for_each(|(_, q)| collect_prop_indices(q, out));
        }
        Process::App { fun, args } => {
            value(fun, out);
            args.iter().for_each(|v| value(v, out));
        }
        Process::Par(a, b) => {
            collect_prop_indices(a, out);
            collect_prop_indices(b, out);
        }
        Process::Res { name, body, .. } => {
            record(name, out);
            collect_prop_indices(body, out);
        }
    }
}

/// Rewrites every sequence of three prefixes into a duo that sends the
/// last two prefixes as a thunk to a fresh control process, then renumbers
/// all propagators so that inserted ones sit next to the propagator whose
/// trio they split.
pub fn to_duos(p: &Process) -> Result<Process> {
    let mut st = Duos { inserted: Vec::new(), fresh: 0 };
    let rewritten = st.proc(p)?;

    let mut originals = Vec::new();
    collect_prop_indices(&rewritten, &mut originals);
    let mut keys: Vec<SortKey> = originals.iter().map(|&k| (u64::from(k), 0, 0)).collect();
    keys.extend(st.inserted.iter().copied());
    keys.sort();
    keys.dedup();
    let rank: BTreeMap<SortKey, u32> = keys.into_iter().enumerate().map(|(i, k)| (k, i as u32 + 1)).collect();
    let inserted = st.inserted;
    let renumber = move |n: &Name| -> Name {
        match (n.base.as_ref(), n.index) {
            ("#", Some(k)) => Name::prop(rank[&(u64::from(k), 0, 0)]).with_dual(n.dual),
            ("#d", Some(t)) => Name::prop(rank[&inserted[t as usize]]).with_dual(n.dual),
            _ => n.clone(),
        }
    };
    Ok(map_names(&rewritten, &renumber))
}

/// Applies [`to_duos`] to a decomposition.
pub fn duos_decomposition(d: &Decomposition) -> Result<Decomposition> {
    let term = to_duos(&d.term)?;
    Ok(Decomposition { term, ..d.clone() })
}

// ---------------------------------------------------------------------------
// Monadic breakdown
// ---------------------------------------------------------------------------

/// A variable that a piece of the breakdown reads from a dedicated channel.
struct Need {
    var: Var,
    chan: Name,
}

struct Monadic {
    next: u32,
    fresh: u32,
    /// Propagators of the scopes currently open.
    props: Vec<(Name, CType)>,
}

type Piece = (Process, Vec<Need>);

/// Forwarders, the channels they use, and the needs still unmet.
type Forwarding = (Vec<Process>, Vec<(Name, CType)>, Vec<Need>);

impl Monadic {
    fn alloc(&mut self) -> u32 {
        self.next += 1;
        self.next
    }

    fn fresh(&mut self, stem: &str) -> String {
        self.fresh += 1;
        format!("#{stem}{}", self.fresh)
    }

    /// `c̄_k!⟨{body}⟩`, recording `c_k`.
    fn piece(&mut self, k: u32, body: Process) -> Process {
        self.props.push((Name::prop(k), thunk_channel_type()));
        Process::out(Name::prop(k).co(), vec![thunk(body)], Process::Inact)
    }

    fn activate(&mut self, k: u32) -> Process {
        let b = Var::new(&self.fresh("mb"));
        activator(Name::prop(k), b)
    }

    /// Reads each variable of `xs` from a fresh dedicated channel before `body`.
    fn fetch(&mut self, xs: &[Var], body: Process, needs: &mut Vec<Need>) -> Process {
        let mut out = body;
        for x in xs.iter().rev() {
            let chan = Name::new(&self.fresh("v"));
            out = Process::inp(chan.clone(), vec![x.clone()], out);
            needs.push(Need { var: x.clone(), chan });
        }
        out
    }

    /// Outputs of the variables in `scope` to every piece that needs them;
    /// returns the forwarders with their channels, and the needs left over.
    fn forward(&self, env: &Env, scope: &[Var], needs: Vec<Need>) -> std::result::Result<Forwarding, DecompError> {
        let mut fwd = Vec::new();
        let mut decls = Vec::new();
        let mut rest = Vec::new();
        for n in needs {
            if scope.contains(&n.var) {
                let u = gdecomp_v(env.var(&n.var)?)?;
                decls.push((n.chan.clone(), CType::Session(SType::In(vec![u], Box::new(SType::End)))));
                fwd.push(Process::out(n.chan.co(), vec![Value::Var(n.var)], Process::Inact));
            } else {
                rest.push(n);
            }
        }
        Ok((fwd, decls, rest))
    }

    fn proc(&mut self, env: &Env, k: u32, p: &Process) -> Result<Piece> {
        match p {
            Process::Inact => Ok((self.piece(k, Process::Inact), Vec::new())),
            Process::Par(a, b) => {
                let ka = self.alloc();
                let (pa, mut na) = self.proc(env, ka, a)?;
                let kb = self.alloc();
                let (pb, nb) = self.proc(env, kb, b)?;
                na.extend(nb);
                let both = Process::par(self.activate(ka), self.activate(kb));
                Ok((Process::par_all(vec![self.piece(k, both), pa, pb]), na))
            }
            Process::Res { name, ty, body } => self.restrict(env, k, name, ty, body),
            Process::In { subj, binders, cont } => self.input(env, k, subj, binders, cont),
            Process::Out { subj, payload, cont } => self.output(env, k, subj, payload, cont),
            Process::App { fun, args } => self.apply(env, k, fun, args),
            Process::Bra { subj, cases } => self.branch(env, k, subj, cases),
            Process::Sel { subj, label, cont } => self.select(env, k, subj, label, cont),
        }
    }

    fn value(&mut self, env: &Env, v: &Value) -> Result<Value> {
        match v {
            Value::Var(_) | Value::Lit(_) => Ok(v.clone()),
            Value::Name(n) => match env.lookup(n)? {
                Entry::Fixed { target, ty: CType::Base(_) } => Ok(Value::Name(target.clone())),
                _ => Err(DecompError::Unsupported(format!("name `{n}` is passed as a value")).into()),
            },
            Value::Abs(a) => self.abstraction(env, a, &free_vars_value(v)),
        }
    }

    /// A body with the variables of `scope` in hand: a fresh chain of pieces
    /// with its own propagators, fed by forwarders of the captured variables.
    fn closed_body(&mut self, env: &Env, scope: &[Var], body: &Process) -> Result<Process> {
        let saved = std::mem::take(&mut self.props);
        let k = self.alloc();
        let (inner, needs) = self.proc(env, k, body)?;
        let (fwd, decls, rest) = self.forward(env, scope, needs)?;
        if let Some(n) = rest.first() {
            return Err(DecompError::UnknownVar(n.var.to_string()).into());
        }
        let mut parts = fwd;
        parts.push(self.activate(k));
        parts.push(inner);
        let props = std::mem::replace(&mut self.props, saved);
        Ok(Process::res_all(props, Process::res_all(decls, Process::par_all(parts))))
    }

    fn abstraction(&mut self, env: &Env, a: &Abs, scope: &[Var]) -> Result<Value> {
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
        let body = self.closed_body(&env2, scope, &a.body)?;
        servers.push(body);
        Ok(Value::abs(params, a.lin, Process::res_all(server_decls, Process::par_all(servers))))
    }

    /// `c^r!⟨λz̃. body(z_f)⟩` for an action on a name of recursive type.
    fn via_server(
        &mut self,
        server: &Name,
        ty: &SType,
        body: impl FnOnce(&mut Self, Name, Process) -> Process,
    ) -> Result<Process> {
        let pieces = rsdecomp(ty)?;
        let f = findex(ty)?;
        let zbase = sym(&self.fresh("r"));
        let zs = slices(&zbase, false, 1, pieces.len());
        let reinstate = server_process(server, names_as_values(&zs), &mut self.fresh);
        let inner = body(self, zs[f - 1].clone(), reinstate);
        let abs = Value::abs(zs.into_iter().zip(sessions(&pieces)).collect(), Linearity::Lin, inner);
        Ok(Process::out(server.clone(), vec![abs], Process::Inact))
    }

    fn input(&mut self, env: &Env, k: u32, subj: &Name, binders: &[Var], cont: &Process) -> Result<Piece> {
        let [x] = binders else {
            return Err(DecompError::Unsupported(format!("input on `{subj}` binds {} variables", binders.len())).into());
        };
        let mut env2 = env.clone();
        let entry = env.lookup(subj)?.clone();
        let u = match &entry {
            Entry::Session { ty, .. } | Entry::Recursive { ty, .. } => match ty.unfold() {
                SType::In(us, _) if us.len() == 1 => us[0].clone(),
                _ => return Err(DecompError::Unsupported(format!("input on `{subj}` of type {ty}")).into()),
            },
            Entry::Fixed { ty: CType::Chan(u), .. } => u.clone(),
            Entry::Fixed { ty, .. } => {
                return Err(DecompError::Unsupported(format!("input on `{subj}`, a name of base type {ty}")).into())
            }
        };
        env2.vars.push((x.clone(), u));
        match &entry {
            Entry::Session { target, ty } => {
                let SType::In(_, next) = ty.unfold() else { unreachable!() };
                env2.set(subj, Entry::Session { target: target.with_index(target.index.map(|i| i + 1)), ty: *next });
            }
            Entry::Recursive { server, ty } => {
                let SType::In(_, next) = ty.unfold() else { unreachable!() };
                env2.set(subj, Entry::Recursive { server: server.clone(), ty: *next });
            }
            Entry::Fixed { .. } => {}
        }
        let k1 = self.alloc();
        let (rest, needs) = self.proc(&env2, k1, cont)?;
        let (fwd, decls, needs) = self.forward(&env2, std::slice::from_ref(x), needs)?;
        let mut after = fwd;
        after.push(self.activate(k1));
        let after = Process::par_all(after);
        let body = match entry {
            Entry::Session { target, .. } | Entry::Fixed { target, .. } => Process::inp(target, vec![x.clone()], after),
            Entry::Recursive { server, ty } => self.via_server(&server, &ty, |_, z, reinstate| {
                Process::inp(z, vec![x.clone()], Process::par(after, reinstate))
            })?,
        };
        let piece = self.piece(k, body);
        Ok((Process::res_all(decls, Process::par(piece, rest)), needs))
    }

    fn output(&mut self, env: &Env, k: u32, subj: &Name, payload: &[Value], cont: &Process) -> Result<Piece> {
        let [v] = payload else {
            return Err(DecompError::Unsupported(format!("output on `{subj}` carries {} values", payload.len())).into());
        };
        let mut env2 = env.clone();
        let entry = env.lookup(subj)?.clone();
        match &entry {
            Entry::Session { target, ty } => {
                let SType::Out(_, next) = ty.unfold() else {
                    return Err(DecompError::Unsupported(format!("output on `{subj}` of type {ty}")).into());
                };
                env2.set(subj, Entry::Session { target: target.with_index(target.index.map(|i| i + 1)), ty: *next });
            }
            Entry::Recursive { server, ty } => {
                let SType::Out(_, next) = ty.unfold() else {
                    return Err(DecompError::Unsupported(format!("output on `{subj}` of type {ty}")).into());
                };
                env2.set(subj, Entry::Recursive { server: server.clone(), ty: *next });
            }
            Entry::Fixed { ty: CType::Chan(_), .. } => {}
            Entry::Fixed { ty, .. } => {
                return Err(DecompError::Unsupported(format!("output on `{subj}`, a name of base type {ty}")).into())
            }
        }
        let mut needs = Vec::new();
        let sent = self.value(&env2, v)?;
        let k1 = self.alloc();
        let next = self.activate(k1);
        let action = match entry {
            Entry::Session { target, .. } | Entry::Fixed { target, .. } => Process::out(target, vec![sent], next),
            Entry::Recursive { server, ty } => self.via_server(&server, &ty, |_, z, reinstate| {
                Process::out(z, vec![sent], Process::par(next, reinstate))
            })?,
        };
        let body = self.fetch(&free_vars_value(v), action, &mut needs);
        let piece = self.piece(k, body);
        let (rest, more) = self.proc(&env2, k1, cont)?;
        needs.extend(more);
        Ok((Process::par(piece, rest), needs))
    }

    fn apply(&mut self, env: &Env, k: u32, fun: &Value, args: &[Value]) -> Result<Piece> {
        let fun2 = match fun {
            Value::Var(_) => fun.clone(),
            Value::Abs(a) => self.abstraction(env, a, &free_vars_value(fun))?,
            other => return Err(DecompError::Unsupported(format!("application of `{other}`")).into()),
        };
        let mut args2 = Vec::new();
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
                Value::Abs(_) => {
                    return Err(DecompError::Unsupported("abstraction passed as an argument".into()).into())
                }
            }
        }
        let mut body = Process::app(fun2, args2);
        for (server, zs, pieces) in wraps.into_iter().rev() {
            let abs = Value::abs(zs.into_iter().zip(sessions(&pieces)).collect(), Linearity::Lin, body);
            body = Process::out(server, vec![abs], Process::Inact);
        }
        let mut xs = free_vars_value(fun);
        for a in args {
            for x in free_vars_value(a) {
                if !xs.contains(&x) {
                    xs.push(x);
                }
            }
        }
        let mut needs = Vec::new();
        let body = self.fetch(&xs, body, &mut needs);
        Ok((self.piece(k, body), needs))
    }

    fn restrict(&mut self, env: &Env, k: u32, name: &Name, ty: &CType, body: &Process) -> Result<Piece> {
        let mut env2 = env.clone();
        match ty {
            CType::Session(s) => {
                let plain = name.plain();
                let here = split_name(&plain, ty)?;
                let there = split_name(&plain.co(), &CType::Session(dual(s)))?;
                env2.set(&plain, here.entry);
                env2.set(&plain.co(), there.entry);
                let (inner, needs) = self.proc(&env2, k, body)?;
                let decls = here.slices.clone();
                let inner = match (here.server, there.server) {
                    (Some((sa, ta)), Some((sb, tb))) => {
                        let own = names_as_values(&here.slices.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>());
                        let other = here.slices.iter().map(|(n, _)| Value::Name(n.co())).collect();
                        let pa = server_process(&sa, own, &mut self.fresh);
                        let pb = server_process(&sb, other, &mut self.fresh);
                        Process::res_all(vec![(sa, ta), (sb, tb)], Process::par_all(vec![pa, pb, inner]))
                    }
                    _ => inner,
                };
                Ok((Process::res_all(decls, inner), needs))
            }
            CType::Chan(_) => {
                let split = split_name(name, ty)?;
                env2.set(&name.plain(), split.entry);
                let (inner, needs) = self.proc(&env2, k, body)?;
                Ok((Process::res_all(split.slices, inner), needs))
            }
            CType::Base(b) => Err(DecompError::Unsupported(format!("restriction of `{name}` at base type {b}")).into()),
        }
    }

    fn branch(&mut self, env: &Env, k: u32, subj: &Name, cases: &[(Sym, Process)]) -> Result<Piece> {
        let Entry::Session { target, ty } = env.lookup(subj)?.clone() else {
            return Err(DecompError::Unsupported(format!("branching on `{subj}`, which is not a plain session")).into());
        };
        let SType::Bra(tcases) = ty.unfold() else {
            return Err(DecompError::Unsupported(format!("branching on `{subj}` of type {ty}")).into());
        };
        let mut scope: Vec<Var> = Vec::new();
        for (_, q) in cases {
            for x in free_vars(q) {
                if !scope.contains(&x) {
                    scope.push(x);
                }
            }
        }
        let mut out = Vec::with_capacity(cases.len());
        for (label, pj) in cases {
            let sj = tcases
                .iter()
                .find(|(l, _)| l == label)
                .map(|(_, s)| s.clone())
                .ok_or_else(|| DecompError::Unsupported(format!("label `{label}` not offered by {ty}")))?;
            if is_recursive_session(&sj) {
                return Err(DecompError::Unsupported(format!("branch continuation of recursive type {sj}")).into());
            }
            let pieces = gdecomp(&sj)?;
            let nbase = sym(&self.fresh("n"));
            let params: Vec<(Name, CType)> =
                slices(&nbase, false, 1, pieces.len()).into_iter().zip(sessions(&pieces)).collect();
            let mut env2 = env.clone();
            env2.set(subj, Entry::Session { target: Name::from_sym(nbase, Some(1), false), ty: sj });
            let body = self.closed_body(&env2, &scope, pj)?;
            let send = Process::out(target.clone(), vec![Value::abs(params, Linearity::Lin, body)], Process::Inact);
            out.push((label.clone(), send));
        }
        let mut needs = Vec::new();
        let body = self.fetch(&scope, Process::Bra { subj: target, cases: out }, &mut needs);
        Ok((self.piece(k, body), needs))
    }

    fn select(&mut self, env: &Env, k: u32, subj: &Name, label: &Sym, cont: &Process) -> Result<Piece> {
        let Entry::Session { target, ty } = env.lookup(subj)?.clone() else {
            return Err(DecompError::Unsupported(format!("selection on `{subj}`, which is not a plain session")).into());
        };
        let SType::Sel(tcases) = ty.unfold() else {
            return Err(DecompError::Unsupported(format!("selection on `{subj}` of type {ty}")).into());
        };
        let sj = tcases
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, s)| s.clone())
            .ok_or_else(|| DecompError::Unsupported(format!("label `{label}` not offered by {ty}")))?;
        if is_recursive_session(&sj) {
            return Err(DecompError::Unsupported(format!("selection continuation of recursive type {sj}")).into());
        }
        let pieces = gdecomp(&sj)?;
        let tag = self.fresh("m");
        let z = Var::new(&format!("{tag}z"));
        let ubase = sym(&format!("{tag}u"));
        let us = slices(&ubase, false, 1, pieces.len());
        let co_us: Vec<Name> = us.iter().map(Name::co).collect();
        let k1 = self.alloc();
        let next = self.activate(k1);
        let body = Process::sel(
            target.clone(),
            label,
            Process::inp(
                target,
                vec![z.clone()],
                Process::par(Process::app(Value::Var(z), names_as_values(&co_us)), next),
            ),
        );
        let piece = self.piece(k, body);
        let mut env2 = env.clone();
        env2.set(subj, Entry::Session { target: Name::from_sym(ubase, Some(1), false), ty: sj });
        let (rest, needs) = self.proc(&env2, k1, cont)?;
        Ok((Process::res_all(us.into_iter().zip(sessions(&pieces)).collect(), Process::par(piece, rest)), needs))
    }
}

/// The monadic decomposition: a chain of thunks, each activated by the
/// previous one, with variables handed over on dedicated channels.
pub fn monadic_decompose(p: &Process, frees: &[(Name, CType)]) -> Result<Decomposition> {
    let source = barendregt(p);
    if let Some(x) = free_vars(&source).first() {
        return Err(DecompError::Open(x.to_string()).into());
    }
    check_unindexed(&source)?;
    for (n, _) in frees {
        if n.index.is_some() {
            return Err(DecompError::Indexed(n.to_string()).into());
        }
    }
    let typed = check_with_frees(frees, &source);
    if !typed.ok {
        return Err(DecompError::IllTyped(typed.message()).into());
    }

    let mut st = Monadic { next: 0, fresh: 0, props: Vec::new() };
    let mut env = Env::default();
    let mut dfrees = Vec::new();
    let mut servers = Vec::new();
    let mut parts = Vec::new();
    for (n, c) in frees {
        let split = split_name(n, c)?;
        if let Some((server, sty)) = split.server {
            let args = names_as_values(&split.slices.iter().map(|(m, _)| m.clone()).collect::<Vec<_>>());
            parts.push(server_process(&server, args, &mut st.fresh));
            servers.push((server, sty));
        }
        env.set(n, split.entry);
        dfrees.extend(split.slices);
    }
    let k = st.alloc();
    let (body, needs) = st.proc(&env, k, &source)?;
    if let Some(n) = needs.first() {
        return Err(DecompError::UnknownVar(n.var.to_string()).into());
    }
    parts.push(st.activate(k));
    parts.push(body);
    let props = std::mem::take(&mut st.props);
    let term = Process::res_all(props.clone(), Process::res_all(servers.clone(), Process::par_all(parts)));
    audit_monadic(&term).map_err(DecompError::Accounting)?;
    let propagators = props
        .into_iter()
        .map(|(n, c)| match c {
            CType::Session(s) => (n, s),
            _ => unreachable!("propagators carry session types"),
        })
        .collect();
    Ok(Decomposition { source, term, frees: dfrees, degree: st.next, propagators, servers })
}

// ---------------------------------------------------------------------------
// Selection of a variant
// ---------------------------------------------------------------------------

/// Which form of the decomposition to produce.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Optimization {
    /// The plain decomposition built from trios.
    #[default]
    None,
    /// The decomposition with every trio rewritten into duos.
    Duos,
    /// The monadic decomposition.
    Monadic,
}

impl Optimization {
    pub const ALL: [Optimization; 3] = [Optimization::None, Optimization::Duos, Optimization::Monadic];

    pub fn as_str(self) -> &'static str {
        match self {
            Optimization::None => "none",
            Optimization::Duos => "duos",
            Optimization::Monadic => "monadic",
        }
    }
}

impl std::fmt::Display for Optimization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Optimization {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Optimization::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| format!("unknown optimization `{s}`; expected none, duos or monadic"))
    }
}

/// Decomposes `p`, whose free names are typed by `frees`, in the requested form.
pub fn decompose_with(opt: Optimization, p: &Process, frees: &[(Name, CType)]) -> Result<Decomposition> {
    match opt {
        Optimization::None => Ok(crate::decompose::decompose(p, frees)?),
        Optimization::Duos => duos_decomposition(&crate::decompose::decompose(p, frees)?),
        Optimization::Monadic => monadic_decompose(p, frees),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::decompose;
    use crate::parse::{parse_file, Mode};
    use crate::semantics::{run, Terminal};
    use crate::typeck::check_minimal_typed;

    const SIMPLE: &str = "new s : !<Int>;?<Bool>;end in s!(1).s?(b).0 | ~s?(x).~s!(true).0";

    #[test]
    fn duos_have_depth_two_and_stay_typed() {
        let f = parse_file(SIMPLE, Mode::User).unwrap();
        let d = decompose(&f.process, &f.frees).unwrap();
        assert_eq!(max_prefix_depth_outside_thunks(&d.term), 3);
        let t = to_duos(&d.term).unwrap();
        assert!(max_prefix_depth_outside_thunks(&t) <= 2, "{t}");
        let r = check_minimal_typed(&d.frees, &t);
        assert!(r.ok, "{}", r.message());
        assert_eq!(run(&t, &d.frees, 200).terminal, Terminal::Inert);
    }

    #[test]
    fn monadic_is_monadic_and_typed() {
        let f = parse_file(SIMPLE, Mode::User).unwrap();
        let d = monadic_decompose(&f.process, &f.frees).unwrap();
        audit_monadic(&d.term).unwrap();
        let r = check_minimal_typed(&d.frees, &d.term);
        assert!(r.ok, "{}\n{}", r.message(), d.term);
        assert_eq!(run(&d.term, &d.frees, 200).terminal, Terminal::Inert);
    }

    #[test]
    fn inaction_pieces() {
        let d = monadic_decompose(&Process::Inact, &[]).unwrap();
        let s = d.term.to_string();
        assert!(s.contains("~#1!(\\lin(#x: chan un(end)) -> 0)"), "{s}");
    }
}
