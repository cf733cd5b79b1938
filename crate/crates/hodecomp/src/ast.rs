//! Terms of HO: names, variables, values and processes, together with
//! free-name analysis, capture-avoiding substitution and alpha-equivalence.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::types::CType;

/// Interned identifier text.
pub type Sym = Arc<str>;

pub fn sym(s: &str) -> Sym {
    Arc::from(s)
}

/// Errors raised by AST-level operations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AstError {
    #[error("name `{0}` already carries an index")]
    AlreadyIndexed(String),
}

/// A channel name. Session names come in two polarities (`s` and `~s`);
/// shared names ignore polarity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name {
    pub base: Sym,
    pub index: Option<u32>,
    pub dual: bool,
}

/// Identity of a binder: the base and index, independent of polarity.
pub type Key = (Sym, Option<u32>);

impl Name {
    pub fn new(base: &str) -> Name {
        Name { base: sym(base), index: None, dual: false }
    }
    pub fn indexed(base: &str, index: u32) -> Name {
        Name { base: sym(base), index: Some(index), dual: false }
    }
    pub fn from_sym(base: Sym, index: Option<u32>, dual: bool) -> Name {
        Name { base, index, dual }
    }
    /// The opposite endpoint of a session name.
    pub fn co(&self) -> Name {
        Name { dual: !self.dual, ..self.clone() }
    }
    pub fn with_dual(&self, dual: bool) -> Name {
        Name { dual, ..self.clone() }
    }
    pub fn with_index(&self, index: Option<u32>) -> Name {
        Name { index, ..self.clone() }
    }
    pub fn plain(&self) -> Name {
        self.with_dual(false)
    }
    pub fn key(&self) -> Key {
        (self.base.clone(), self.index)
    }
    /// Names in the reserved namespace start with `#`.
    pub fn is_reserved(&self) -> bool {
        self.base.starts_with('#')
    }
    /// Propagator `c_k`.
    pub fn prop(k: u32) -> Name {
        Name::indexed("#", k)
    }
    /// Index of a propagator `c_k`, if this is one.
    pub fn prop_index(&self) -> Option<u32> {
        if &*self.base == "#" {
            self.index
        } else {
            None
        }
    }
}

/// An input-bound value variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub base: Sym,
    pub index: Option<u32>,
}

impl Var {
    pub fn new(base: &str) -> Var {
        Var { base: sym(base), index: None }
    }
    pub fn key(&self) -> Key {
        (self.base.clone(), self.index)
    }
}

/// Base literals admitted as opaque values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Lit {
    Int(i64),
    Bool(bool),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Linearity {
    Lin,
    Sh,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Name(Name),
    Var(Var),
    Lit(Lit),
    Abs(Box<Abs>),
}

/// An abstraction `λ(x̃:C̃).P`, linear or shared.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Abs {
    pub params: Vec<(Name, CType)>,
    pub lin: Linearity,
    pub body: Process,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Process {
    Out { subj: Name, payload: Vec<Value>, cont: Box<Process> },
    In { subj: Name, binders: Vec<Var>, cont: Box<Process> },
    Sel { subj: Name, label: Sym, cont: Box<Process> },
    Bra { subj: Name, cases: Vec<(Sym, Process)> },
    App { fun: Value, args: Vec<Value> },
    Par(Box<Process>, Box<Process>),
    Res { name: Name, ty: CType, body: Box<Process> },
    Inact,
}

impl Value {
    pub fn name(n: Name) -> Value {
        Value::Name(n)
    }
    pub fn var(v: &str) -> Value {
        Value::Var(Var::new(v))
    }
    pub fn abs(params: Vec<(Name, CType)>, lin: Linearity, body: Process) -> Value {
        Value::Abs(Box::new(Abs { params, lin, body }))
    }
}

impl Process {
    pub fn out(subj: Name, payload: Vec<Value>, cont: Process) -> Process {
        Process::Out { subj, payload, cont: Box::new(cont) }
    }
    pub fn inp(subj: Name, binders: Vec<Var>, cont: Process) -> Process {
        Process::In { subj, binders, cont: Box::new(cont) }
    }
    pub fn sel(subj: Name, label: &str, cont: Process) -> Process {
        Process::Sel { subj, label: sym(label), cont: Box::new(cont) }
    }
    pub fn app(fun: Value, args: Vec<Value>) -> Process {
        Process::App { fun, args }
    }
    pub fn par(a: Process, b: Process) -> Process {
        Process::Par(Box::new(a), Box::new(b))
    }
    pub fn res(name: Name, ty: CType, body: Process) -> Process {
        Process::Res { name, ty, body: Box::new(body) }
    }
    /// Right-nested parallel composition of a list; `0` when empty.
    pub fn par_all(mut ps: Vec<Process>) -> Process {
        match ps.len() {
            0 => Process::Inact,
            1 => ps.pop().unwrap(),
            _ => {
                let last = ps.pop().unwrap();
                ps.into_iter().rev().fold(last, |acc, p| Process::par(p, acc))
            }
        }
    }
    /// Wraps `body` in restrictions, the first entry outermost.
    pub fn res_all(binders: Vec<(Name, CType)>, body: Process) -> Process {
        binders.into_iter().rev().fold(body, |acc, (n, t)| Process::res(n, t, acc))
    }
    /// Flattens nested parallel compositions into a list of components.
    pub fn par_components(&self) -> Vec<&Process> {
        let mut out = Vec::new();
        fn go<'a>(p: &'a Process, out: &mut Vec<&'a Process>) {
            match p {
                Process::Par(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                _ => out.push(p),
            }
        }
        go(self, &mut out);
        out
    }
    /// Number of AST nodes, counting values.
    pub fn size(&self) -> usize {
        let n = std::cell::Cell::new(0usize);
        visit_values_and_procs(self, &mut |_| n.set(n.get() + 1), &mut |_| n.set(n.get() + 1));
        n.get()
    }
}

fn visit_values_and_procs(p: &Process, fp: &mut dyn FnMut(&Process), fv: &mut dyn FnMut(&Value)) {
    fp(p);
    match p {
        Process::Out { payload, cont, .. } => {
            for v in payload {
                visit_value(v, fp, fv);
            }
            visit_values_and_procs(cont, fp, fv);
        }
        Process::In { cont, .. } | Process::Sel { cont, .. } => visit_values_and_procs(cont, fp, fv),
        Process::Bra { cases, .. } => {
            for (_, q) in cases {
                visit_values_and_procs(q, fp, fv);
            }
        }
        Process::App { fun, args } => {
            visit_value(fun, fp, fv);
            for a in args {
                visit_value(a, fp, fv);
            }
        }
        Process::Par(a, b) => {
            visit_values_and_procs(a, fp, fv);
            visit_values_and_procs(b, fp, fv);
        }
        Process::Res { body, .. } => visit_values_and_procs(body, fp, fv),
        Process::Inact => {}
    }
}

fn visit_value(v: &Value, fp: &mut dyn FnMut(&Process), fv: &mut dyn FnMut(&Value)) {
    fv(v);
    if let Value::Abs(a) = v {
        visit_values_and_procs(&a.body, fp, fv);
    }
}

// ---------------------------------------------------------------------------
// Free names and variables
// ---------------------------------------------------------------------------

#[derive(Default)]
struct FreeAcc {
    names: Vec<Name>,
    name_seen: HashSet<Name>,
    vars: Vec<Var>,
    var_seen: HashSet<Var>,
}

struct Bound {
    names: Vec<Key>,
    vars: Vec<Key>,
}

impl Bound {
    fn has_name(&self, k: &Key) -> bool {
        self.names.iter().any(|b| b == k)
    }
    fn has_var(&self, k: &Key) -> bool {
        self.vars.iter().any(|b| b == k)
    }
}

fn free_in_value(v: &Value, b: &mut Bound, acc: &mut FreeAcc) {
    match v {
        Value::Name(n) => free_name(n, b, acc),
        Value::Var(x) => {
            if !b.has_var(&x.key()) && acc.var_seen.insert(x.clone()) {
                acc.vars.push(x.clone());
            }
        }
        Value::Lit(_) => {}
        Value::Abs(a) => {
            let depth = b.names.len();
            for (p, _) in &a.params {
                b.names.push(p.key());
            }
            free_in_proc(&a.body, b, acc);
            b.names.truncate(depth);
        }
    }
}

fn free_name(n: &Name, b: &Bound, acc: &mut FreeAcc) {
    if !b.has_name(&n.key()) && acc.name_seen.insert(n.clone()) {
        acc.names.push(n.clone());
    }
}

fn free_in_proc(p: &Process, b: &mut Bound, acc: &mut FreeAcc) {
    match p {
        Process::Out { subj, payload, cont } => {
            free_name(subj, b, acc);
            for v in payload {
                free_in_value(v, b, acc);
            }
            free_in_proc(cont, b, acc);
        }
        Process::In { subj, binders, cont } => {
            free_name(subj, b, acc);
            let depth = b.vars.len();
            for x in binders {
                b.vars.push(x.key());
            }
            free_in_proc(cont, b, acc);
            b.vars.truncate(depth);
        }
        Process::Sel { subj, cont, .. } => {
            free_name(subj, b, acc);
            free_in_proc(cont, b, acc);
        }
        Process::Bra { subj, cases } => {
            free_name(subj, b, acc);
            for (_, q) in cases {
                free_in_proc(q, b, acc);
            }
        }
        Process::App { fun, args } => {
            free_in_value(fun, b, acc);
            for a in args {
                free_in_value(a, b, acc);
            }
        }
        Process::Par(l, r) => {
            free_in_proc(l, b, acc);
            free_in_proc(r, b, acc);
        }
        Process::Res { name, body, .. } => {
            b.names.push(name.key());
            free_in_proc(body, b, acc);
            b.names.pop();
        }
        Process::Inact => {}
    }
}

fn free_acc_proc(p: &Process) -> FreeAcc {
    let mut acc = FreeAcc::default();
    free_in_proc(p, &mut Bound { names: vec![], vars: vec![] }, &mut acc);
    acc
}

fn free_acc_value(v: &Value) -> FreeAcc {
    let mut acc = FreeAcc::default();
    free_in_value(v, &mut Bound { names: vec![], vars: vec![] }, &mut acc);
    acc
}

/// Free value variables of `p`, each once, in left-to-right preorder of first occurrence.
pub fn free_vars(p: &Process) -> Vec<Var> {
    free_acc_proc(p).vars
}

/// Free value variables of a value.
pub fn free_vars_value(v: &Value) -> Vec<Var> {
    free_acc_value(v).vars
}

/// Free names of `p` (each polarity listed separately), in first-occurrence order.
pub fn free_names(p: &Process) -> Vec<Name> {
    free_acc_proc(p).names
}

pub fn free_names_value(v: &Value) -> Vec<Name> {
    free_acc_value(v).names
}

/// A process is closed when it has no free value variables.
pub fn is_closed(p: &Process) -> bool {
    free_vars(p).is_empty()
}

/// Gives index 1 to every name of an index-free tuple, keeping order and polarity.
pub fn init_names(names: &[Name]) -> Result<Vec<Name>, AstError> {
    names
        .iter()
        .map(|n| match n.index {
            Some(_) => Err(AstError::AlreadyIndexed(n.to_string())),
            None => Ok(n.with_index(Some(1))),
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Fresh names
// ---------------------------------------------------------------------------

/// Splits a base of the form `stem'N` into the stem and N.
pub fn split_prime(base: &str) -> (&str, Option<u64>) {
    if let Some(pos) = base.rfind('\'') {
        if let Ok(n) = base[pos + 1..].parse::<u64>() {
            return (&base[..pos], Some(n));
        }
    }
    (base, None)
}

/// Deterministic source of fresh binder bases of the form `stem'N`.
#[derive(Clone, Debug, Default)]
pub struct Supply {
    next: u64,
}

impl Supply {
    /// A supply whose names do not occur in any of the given processes or values.
    pub fn above(procs: &[&Process], vals: &[&Value]) -> Supply {
        let mut max = 0u64;
        let mut bump = |s: &Sym| {
            if let (_, Some(n)) = split_prime(s) {
                max = max.max(n);
            }
        };
        for p in procs {
            for_each_ident_proc(p, &mut bump);
        }
        for v in vals {
            for_each_ident_value(v, &mut bump);
        }
        Supply { next: max + 1 }
    }
    pub fn starting_at(next: u64) -> Supply {
        Supply { next }
    }
    pub fn fresh_base(&mut self, base: &str) -> Sym {
        let (stem, _) = split_prime(base);
        let n = self.next;
        self.next += 1;
        sym(&format!("{stem}'{n}"))
    }
    pub fn fresh_name(&mut self, n: &Name) -> Name {
        Name { base: self.fresh_base(&n.base), index: n.index, dual: false }
    }
    pub fn fresh_var(&mut self, x: &Var) -> Var {
        Var { base: self.fresh_base(&x.base), index: x.index }
    }
}

/// Calls `f` on the base of every name and variable in `p`, free or bound.
pub fn for_each_ident_proc(p: &Process, f: &mut dyn FnMut(&Sym)) {
    match p {
        Process::Out { subj, payload, cont } => {
            f(&subj.base);
            for v in payload {
                for_each_ident_value(v, f);
            }
            for_each_ident_proc(cont, f);
        }
        Process::In { subj, binders, cont } => {
            f(&subj.base);
            for x in binders {
                f(&x.base);
            }
            for_each_ident_proc(cont, f);
        }
        Process::Sel { subj, cont, .. } => {
            f(&subj.base);
            for_each_ident_proc(cont, f);
        }
        Process::Bra { subj, cases } => {
            f(&subj.base);
            for (_, q) in cases {
                for_each_ident_proc(q, f);
            }
        }
        Process::App { fun, args } => {
            for_each_ident_value(fun, f);
            for a in args {
                for_each_ident_value(a, f);
            }
        }
        Process::Par(a, b) => {
            for_each_ident_proc(a, f);
            for_each_ident_proc(b, f);
        }
        Process::Res { name, body, .. } => {
            f(&name.base);
            for_each_ident_proc(body, f);
        }
        Process::Inact => {}
    }
}

pub fn for_each_ident_value(v: &Value, f: &mut dyn FnMut(&Sym)) {
    match v {
        Value::Name(n) => f(&n.base),
        Value::Var(x) => f(&x.base),
        Value::Lit(_) => {}
        Value::Abs(a) => {
            for (p, _) in &a.params {
                f(&p.base);
            }
            for_each_ident_proc(&a.body, f);
        }
    }
}

// ---------------------------------------------------------------------------
// Substitution
// ---------------------------------------------------------------------------

/// A simultaneous substitution of values for names and variables.
///
/// A name entry keyed by `(base, index)` replaces both polarities; an
/// occurrence of the dual endpoint receives the dual of the replacement.
#[derive(Clone, Debug, Default)]
pub struct Subst {
    pub names: HashMap<Key, Value>,
    pub vars: HashMap<Key, Value>,
}

impl Subst {
    pub fn new() -> Subst {
        Subst::default()
    }
    pub fn is_empty(&self) -> bool {
        self.names.is_empty() && self.vars.is_empty()
    }
    /// Maps name `from` (and its dual) to `to`; if `from` is a dual
    /// occurrence the mapping is normalised so that `~from` yields `to`.
    pub fn name(mut self, from: &Name, to: Value) -> Subst {
        let to = if from.dual { dual_value(&to) } else { to };
        self.names.insert(from.key(), to);
        self
    }
    pub fn var(mut self, from: &Var, to: Value) -> Subst {
        self.vars.insert(from.key(), to);
        self
    }
    fn range_free(&self) -> (HashSet<Key>, HashSet<Key>) {
        let mut ns = HashSet::new();
        let mut vs = HashSet::new();
        for v in self.names.values().chain(self.vars.values()) {
            let acc = free_acc_value(v);
            ns.extend(acc.names.iter().map(|n| n.key()));
            vs.extend(acc.vars.iter().map(|x| x.key()));
        }
        (ns, vs)
    }
}

fn dual_value(v: &Value) -> Value {
    match v {
        Value::Name(n) => Value::Name(n.co()),
        other => other.clone(),
    }
}

struct SubstCtx<'a> {
    avoid_names: HashSet<Key>,
    avoid_vars: HashSet<Key>,
    supply: Option<Supply>,
    seed_procs: Vec<&'a Process>,
    seed_vals: Vec<&'a Value>,
}

impl<'a> SubstCtx<'a> {
    fn supply(&mut self) -> &mut Supply {
        if self.supply.is_none() {
            self.supply = Some(Supply::above(&self.seed_procs, &self.seed_vals));
        }
        self.supply.as_mut().unwrap()
    }
}

/// Applies `s` to `p` simultaneously, renaming binders that would capture.
pub fn substitute(p: &Process, s: &Subst) -> Process {
    if s.is_empty() {
        return p.clone();
    }
    let (avoid_names, avoid_vars) = s.range_free();
    let range: Vec<&Value> = s.names.values().chain(s.vars.values()).collect();
    let mut ctx = SubstCtx { avoid_names, avoid_vars, supply: None, seed_procs: vec![p], seed_vals: range };
    subst_proc(p, s, &mut ctx)
}

/// Applies `s` to a value.
pub fn substitute_value(v: &Value, s: &Subst) -> Value {
    if s.is_empty() {
        return v.clone();
    }
    let (avoid_names, avoid_vars) = s.range_free();
    let mut seed_vals: Vec<&Value> = s.names.values().chain(s.vars.values()).collect();
    seed_vals.push(v);
    let mut ctx = SubstCtx { avoid_names, avoid_vars, supply: None, seed_procs: vec![], seed_vals };
    subst_value(v, s, &mut ctx)
}

fn subst_name(n: &Name, s: &Subst) -> Value {
    match s.names.get(&n.key()) {
        Some(v) => {
            if n.dual {
                dual_value(v)
            } else {
                v.clone()
            }
        }
        None => Value::Name(n.clone()),
    }
}

fn subst_subject(n: &Name, s: &Subst) -> Name {
    match subst_name(n, s) {
        Value::Name(m) => m,
        // A subject can only be replaced by a name in well-sorted terms;
        // anything else leaves the subject untouched.
        _ => n.clone(),
    }
}

fn subst_value(v: &Value, s: &Subst, ctx: &mut SubstCtx) -> Value {
    match v {
        Value::Name(n) => subst_name(n, s),
        Value::Var(x) => s.vars.get(&x.key()).cloned().unwrap_or_else(|| v.clone()),
        Value::Lit(_) => v.clone(),
        Value::Abs(a) => {
            let mut inner = s.clone();
            let mut params = Vec::with_capacity(a.params.len());
            for (pn, ty) in &a.params {
                inner.names.remove(&pn.key());
                if ctx.avoid_names.contains(&pn.key()) {
                    let fresh = ctx.supply().fresh_name(pn);
                    inner.names.insert(pn.key(), Value::Name(fresh.clone()));
                    params.push((fresh, ty.clone()));
                } else {
                    params.push((pn.clone(), ty.clone()));
                }
            }
            let body = subst_proc(&a.body, &inner, ctx);
            Value::Abs(Box::new(Abs { params, lin: a.lin, body }))
        }
    }
}

fn subst_proc(p: &Process, s: &Subst, ctx: &mut SubstCtx) -> Process {
    match p {
        Process::Out { subj, payload, cont } => Process::Out {
            subj: subst_subject(subj, s),
            payload: payload.iter().map(|v| subst_value(v, s, ctx)).collect(),
            cont: Box::new(subst_proc(cont, s, ctx)),
        },
        Process::In { subj, binders, cont } => {
            let subj = subst_subject(subj, s);
            let mut inner = s.clone();
            let mut bs = Vec::with_capacity(binders.len());
            for x in binders {
                inner.vars.remove(&x.key());
                if ctx.avoid_vars.contains(&x.key()) {
                    let fresh = ctx.supply().fresh_var(x);
                    inner.vars.insert(x.key(), Value::Var(fresh.clone()));
                    bs.push(fresh);
                } else {
                    bs.push(x.clone());
                }
            }
            Process::In { subj, binders: bs, cont: Box::new(subst_proc(cont, &inner, ctx)) }
        }
        Process::Sel { subj, label, cont } => Process::Sel {
            subj: subst_subject(subj, s),
            label: label.clone(),
            cont: Box::new(subst_proc(cont, s, ctx)),
        },
        Process::Bra { subj, cases } => Process::Bra {
            subj: subst_subject(subj, s),
            cases: cases.iter().map(|(l, q)| (l.clone(), subst_proc(q, s, ctx))).collect(),
        },
        Process::App { fun, args } => {
            Process::App { fun: subst_value(fun, s, ctx), args: args.iter().map(|a| subst_value(a, s, ctx)).collect() }
        }
        Process::Par(a, b) => Process::par(subst_proc(a, s, ctx), subst_proc(b, s, ctx)),
        Process::Res { name, ty, body } => {
            let mut inner = s.clone();
            inner.names.remove(&name.key());
            let name = if ctx.avoid_names.contains(&name.key()) {
                let fresh = ctx.supply().fresh_name(name);
                inner.names.insert(name.key(), Value::Name(fresh.clone()));
                fresh
            } else {
                name.clone()
            };
            Process::Res { name, ty: ty.clone(), body: Box::new(subst_proc(body, &inner, ctx)) }
        }
        Process::Inact => Process::Inact,
    }
}

// ---------------------------------------------------------------------------
// Binder renaming
// ---------------------------------------------------------------------------

/// Renames binders so that every binder is distinct from every other binder
/// and from every free name or variable. The first binder of a given
/// identity keeps its spelling.
pub fn barendregt(p: &Process) -> Process {
    let acc = free_acc_proc(p);
    let mut used_names: HashSet<Key> = acc.names.iter().map(|n| n.key()).collect();
    let mut used_vars: HashSet<Key> = acc.vars.iter().map(|x| x.key()).collect();
    let mut supply = Supply::above(&[p], &[]);
    let mut r = Renamer { used_names: &mut used_names, used_vars: &mut used_vars, supply: &mut supply };
    r.proc(p, &Subst::new())
}

/// Like [`barendregt`] but also avoids the given identities and uses the
/// given supply; used when splicing terms into a larger context.
pub fn barendregt_avoiding(
    p: &Process,
    used_names: &mut HashSet<Key>,
    used_vars: &mut HashSet<Key>,
    supply: &mut Supply,
) -> Process {
    let acc = free_acc_proc(p);
    used_names.extend(acc.names.iter().map(|n| n.key()));
    used_vars.extend(acc.vars.iter().map(|x| x.key()));
    let mut r = Renamer { used_names, used_vars, supply };
    r.proc(p, &Subst::new())
}

struct Renamer<'a> {
    used_names: &'a mut HashSet<Key>,
    used_vars: &'a mut HashSet<Key>,
    supply: &'a mut Supply,
}

impl Renamer<'_> {
    fn bind_name(&mut self, n: &Name, s: &mut Subst) -> Name {
        if self.used_names.insert(n.key()) {
            s.names.remove(&n.key());
            n.plain()
        } else {
            let fresh = loop {
                let f = self.supply.fresh_name(n);
                if self.used_names.insert(f.key()) {
                    break f;
                }
            };
            s.names.insert(n.key(), Value::Name(fresh.clone()));
            fresh
        }
    }
    fn bind_var(&mut self, x: &Var, s: &mut Subst) -> Var {
        if self.used_vars.insert(x.key()) {
            s.vars.remove(&x.key());
            x.clone()
        } else {
            let fresh = loop {
                let f = self.supply.fresh_var(x);
                if self.used_vars.insert(f.key()) {
                    break f;
                }
            };
            s.vars.insert(x.key(), Value::Var(fresh.clone()));
            fresh
        }
    }
    fn value(&mut self, v: &Value, s: &Subst) -> Value {
        match v {
            Value::Name(n) => subst_name(n, s),
            Value::Var(x) => s.vars.get(&x.key()).cloned().unwrap_or_else(|| v.clone()),
            Value::Lit(_) => v.clone(),
            Value::Abs(a) => {
                let mut inner = s.clone();
                let params = a.params.iter().map(|(pn, t)| (self.bind_name(pn, &mut inner), t.clone())).collect();
                let body = self.proc(&a.body, &inner);
                Value::Abs(Box::new(Abs { params, lin: a.lin, body }))
            }
        }
    }
    fn proc(&mut self, p: &Process, s: &Subst) -> Process {
        match p {
            Process::Out { subj, payload, cont } => Process::Out {
                subj: subst_subject(subj, s),
                payload: payload.iter().map(|v| self.value(v, s)).collect(),
                cont: Box::new(self.proc(cont, s)),
            },
            Process::In { subj, binders, cont } => {
                let subj = subst_subject(subj, s);
                let mut inner = s.clone();
                let bs = binders.iter().map(|x| self.bind_var(x, &mut inner)).collect();
                Process::In { subj, binders: bs, cont: Box::new(self.proc(cont, &inner)) }
            }
            Process::Sel { subj, label, cont } => {
                Process::Sel { subj: subst_subject(subj, s), label: label.clone(), cont: Box::new(self.proc(cont, s)) }
            }
            Process::Bra { subj, cases } => Process::Bra {
                subj: subst_subject(subj, s),
                cases: cases.iter().map(|(l, q)| (l.clone(), self.proc(q, s))).collect(),
            },
            Process::App { fun, args } => {
                Process::App { fun: self.value(fun, s), args: args.iter().map(|a| self.value(a, s)).collect() }
            }
            Process::Par(a, b) => Process::par(self.proc(a, s), self.proc(b, s)),
            Process::Res { name, ty, body } => {
                let mut inner = s.clone();
                let name = self.bind_name(name, &mut inner);
                Process::Res { name, ty: ty.clone(), body: Box::new(self.proc(body, &inner)) }
            }
            Process::Inact => Process::Inact,
        }
    }
}

// ---------------------------------------------------------------------------
// Alpha-equivalence
// ---------------------------------------------------------------------------

/// Options for [`alpha_eq_with`].
#[derive(Clone, Copy, Debug, Default)]
pub struct EqOpts {
    /// Ignore the type annotations on restrictions and abstraction binders.
    pub ignore_annotations: bool,
}

/// Binder correspondence used while comparing two terms.
#[derive(Clone, Debug, Default)]
pub struct Bij {
    names: Vec<(Key, Key)>,
    vars: Vec<(Key, Key)>,
    /// Top-level identities that may be matched on first encounter.
    pub open_left: HashSet<Key>,
    pub open_right: HashSet<Key>,
    pub fixed: HashMap<Key, Key>,
    pub fixed_rev: HashMap<Key, Key>,
}

impl Bij {
    fn name_eq(&mut self, a: &Name, b: &Name) -> bool {
        if a.dual != b.dual {
            return false;
        }
        let (ka, kb) = (a.key(), b.key());
        for (l, r) in self.names.iter().rev() {
            if *l == ka || *r == kb {
                return *l == ka && *r == kb;
            }
        }
        if let Some(m) = self.fixed.get(&ka) {
            return *m == kb;
        }
        if self.fixed_rev.contains_key(&kb) {
            return false;
        }
        if self.open_left.contains(&ka) && self.open_right.contains(&kb) {
            self.fixed.insert(ka.clone(), kb.clone());
            self.fixed_rev.insert(kb, ka);
            return true;
        }
        if self.open_left.contains(&ka) || self.open_right.contains(&kb) {
            return false;
        }
        ka == kb
    }
    fn var_eq(&self, a: &Var, b: &Var) -> bool {
        let (ka, kb) = (a.key(), b.key());
        for (l, r) in self.vars.iter().rev() {
            if *l == ka || *r == kb {
                return *l == ka && *r == kb;
            }
        }
        ka == kb
    }
}

/// True iff `p` and `q` are equal up to consistent renaming of bound names and variables.
pub fn alpha_eq(p: &Process, q: &Process) -> bool {
    alpha_eq_with(p, q, EqOpts::default(), &mut Bij::default())
}

pub fn alpha_eq_value(v: &Value, w: &Value) -> bool {
    val_eq(v, w, EqOpts::default(), &mut Bij::default())
}

/// Alpha-equivalence under an initial binder correspondence.
pub fn alpha_eq_with(p: &Process, q: &Process, o: EqOpts, bij: &mut Bij) -> bool {
    proc_eq(p, q, o, bij)
}

fn val_eq(v: &Value, w: &Value, o: EqOpts, bij: &mut Bij) -> bool {
    match (v, w) {
        (Value::Name(a), Value::Name(b)) => bij.name_eq(a, b),
        (Value::Var(a), Value::Var(b)) => bij.var_eq(a, b),
        (Value::Lit(a), Value::Lit(b)) => a == b,
        (Value::Abs(a), Value::Abs(b)) => {
            if a.lin != b.lin || a.params.len() != b.params.len() {
                return false;
            }
            if !o.ignore_annotations && a.params.iter().zip(&b.params).any(|((_, t), (_, u))| t != u) {
                return false;
            }
            let depth = bij.names.len();
            for ((pa, _), (pb, _)) in a.params.iter().zip(&b.params) {
                bij.names.push((pa.key(), pb.key()));
            }
            let r = proc_eq(&a.body, &b.body, o, bij);
            bij.names.truncate(depth);
            r
        }
        _ => false,
    }
}

fn proc_eq(p: &Process, q: &Process, o: EqOpts, bij: &mut Bij) -> bool {
    match (p, q) {
        (Process::Inact, Process::Inact) => true,
        (Process::Out { subj: a, payload: pa, cont: ca }, Process::Out { subj: b, payload: pb, cont: cb }) => {
            bij.name_eq(a, b)
                && pa.len() == pb.len()
                && pa.iter().zip(pb).all(|(x, y)| val_eq(x, y, o, bij))
                && proc_eq(ca, cb, o, bij)
        }
        (Process::In { subj: a, binders: xa, cont: ca }, Process::In { subj: b, binders: xb, cont: cb }) => {
            if !bij.name_eq(a, b) || xa.len() != xb.len() {
                return false;
            }
            let depth = bij.vars.len();
            for (x, y) in xa.iter().zip(xb) {
                bij.vars.push((x.key(), y.key()));
            }
            let r = proc_eq(ca, cb, o, bij);
            bij.vars.truncate(depth);
            r
        }
        (Process::Sel { subj: a, label: la, cont: ca }, Process::Sel { subj: b, label: lb, cont: cb }) => {
            la == lb && bij.name_eq(a, b) && proc_eq(ca, cb, o, bij)
        }
        (Process::Bra { subj: a, cases: xa }, Process::Bra { subj: b, cases: xb }) => {
            bij.name_eq(a, b)
                && xa.len() == xb.len()
                && xa.iter().zip(xb).all(|((l, p1), (m, q1))| l == m && proc_eq(p1, q1, o, bij))
        }
        (Process::App { fun: fa, args: aa }, Process::App { fun: fb, args: ab }) => {
            aa.len() == ab.len() && val_eq(fa, fb, o, bij) && aa.iter().zip(ab).all(|(x, y)| val_eq(x, y, o, bij))
        }
        (Process::Par(a1, a2), Process::Par(b1, b2)) => proc_eq(a1, b1, o, bij) && proc_eq(a2, b2, o, bij),
        (Process::Res { name: a, ty: ta, body: ba }, Process::Res { name: b, ty: tb, body: bb }) => {
            if !o.ignore_annotations && ta != tb {
                return false;
            }
            bij.names.push((a.key(), b.key()));
            let r = proc_eq(ba, bb, o, bij);
            bij.names.pop();
            r
        }
        _ => false,
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dual {
            write!(f, "~")?;
        }
        if &*self.base == "#" {
            if let Some(i) = self.index {
                return write!(f, "#{i}");
            }
        }
        write!(f, "{}", self.base)?;
        if let Some(i) = self.index {
            write!(f, "_{i}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.base)?;
        if let Some(i) = self.index {
            write!(f, "_{i}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lit::Int(i) => write!(f, "{i}"),
            Lit::Bool(b) => write!(f, "{b}"),
        }
    }
}
