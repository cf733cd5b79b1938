//! Algorithmic typechecking of HO processes over shared, linear and session
//! environments, with linear resources threaded left to right.

use serde::Serialize;

use crate::ast::{barendregt, Abs, Key, Linearity, Lit, Name, Process, Value, Var};
use crate::types::{ctype_eq, dual, is_minimal_c, is_minimal_v, stype_eq, vtype_eq, BaseTy, CType, SType, VType};

/// Typing environments.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Envs {
    /// Shared names (channels `chan U`) and base-typed abstraction parameters.
    pub gamma_names: Vec<(Key, CType)>,
    /// Value variables of shared arrow or base type.
    pub gamma_vars: Vec<(Key, VType)>,
    /// Value variables of linear arrow type.
    pub lambda: Vec<(Key, VType)>,
    /// Session endpoints.
    pub delta: Vec<(Name, SType)>,
}

impl Envs {
    pub fn new() -> Envs {
        Envs::default()
    }
    /// Environments for a process whose free names are declared by `frees`.
    pub fn from_frees(frees: &[(Name, CType)]) -> Envs {
        let mut e = Envs::new();
        for (n, c) in frees {
            e.add_name(n, c);
        }
        e
    }
    pub fn add_name(&mut self, n: &Name, c: &CType) {
        match c {
            CType::Session(s) => self.delta.push((n.clone(), s.clone())),
            other => self.gamma_names.push((n.key(), other.clone())),
        }
    }
    fn delta_pos(&self, n: &Name) -> Option<usize> {
        self.delta.iter().position(|(m, _)| m == n)
    }
    fn gamma_name(&self, n: &Name) -> Option<&CType> {
        self.gamma_names.iter().rev().find(|(k, _)| *k == n.key()).map(|(_, c)| c)
    }
    /// True when no linear resources remain: Λ is empty and every session
    /// endpoint has type `end`.
    pub fn is_exhausted(&self) -> bool {
        self.lambda.is_empty() && self.delta.iter().all(|(_, s)| s.is_end())
    }
}

/// One typing failure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    /// Path from the root of the term to the offending subterm.
    pub path: String,
    pub rule: &'static str,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub ok: bool,
    pub leftover: Envs,
    pub diagnostics: Vec<Diagnostic>,
}

impl CheckResult {
    fn from(r: Result<Envs, Diagnostic>, require_exhausted: bool) -> CheckResult {
        match r {
            Ok(env) => {
                if require_exhausted && !env.is_exhausted() {
                    let mut msgs = Vec::new();
                    for (k, u) in &env.lambda {
                        msgs.push(format!("linear variable `{}` of type {u} is unused", key_str(k)));
                    }
                    for (n, s) in &env.delta {
                        if !s.is_end() {
                            msgs.push(format!("session `{n}` left with type {s}"));
                        }
                    }
                    CheckResult {
                        ok: false,
                        leftover: env,
                        diagnostics: vec![Diagnostic { path: String::new(), rule: "End", message: msgs.join("; ") }],
                    }
                } else {
                    CheckResult { ok: true, leftover: env, diagnostics: vec![] }
                }
            }
            Err(d) => CheckResult { ok: false, leftover: Envs::new(), diagnostics: vec![d] },
        }
    }
    /// The first diagnostic as text.
    pub fn message(&self) -> String {
        match self.diagnostics.first() {
            Some(d) if d.path.is_empty() => format!("[{}] {}", d.rule, d.message),
            Some(d) => format!("[{}] at {}: {}", d.rule, d.path, d.message),
            None => "ok".into(),
        }
    }
}

fn key_str(k: &Key) -> String {
    match k.1 {
        Some(i) => format!("{}_{i}", k.0),
        None => k.0.to_string(),
    }
}

/// Checks `Γ;Λ;Δ ⊢ P ▷ ⋄`; succeeds only if all linear resources are consumed.
pub fn check_process(envs: &Envs, p: &Process) -> CheckResult {
    let mut c = Checker { path: Vec::new() };
    CheckResult::from(c.proc(envs.clone(), &barendregt(p)), true)
}

/// Checks a process and returns the unconsumed linear resources.
pub fn check_process_leftover(envs: &Envs, p: &Process) -> CheckResult {
    let mut c = Checker { path: Vec::new() };
    CheckResult::from(c.proc(envs.clone(), &barendregt(p)), false)
}

/// Types a value, consuming the linear resources it uses.
pub fn check_value(envs: &Envs, v: &Value) -> (Option<VType>, CheckResult) {
    let mut c = Checker { path: Vec::new() };
    match c.value(envs.clone(), v) {
        Ok((u, env)) => (Some(u), CheckResult { ok: true, leftover: env, diagnostics: vec![] }),
        Err(d) => (None, CheckResult { ok: false, leftover: Envs::new(), diagnostics: vec![d] }),
    }
}

/// Checks a closed process whose free names are declared by `frees`.
pub fn check_with_frees(frees: &[(Name, CType)], p: &Process) -> CheckResult {
    check_process(&Envs::from_frees(frees), p)
}

/// Checks the process and additionally requires every type annotation and
/// every declared free-name type to be minimal.
pub fn check_minimal_typed(frees: &[(Name, CType)], p: &Process) -> CheckResult {
    for (n, c) in frees {
        if !is_minimal_c(c) {
            return CheckResult {
                ok: false,
                leftover: Envs::new(),
                diagnostics: vec![Diagnostic {
                    path: String::new(),
                    rule: "Minimal",
                    message: format!("free name `{n}` has non-minimal type {c}"),
                }],
            };
        }
    }
    if let Some(d) = first_non_minimal(p, &mut Vec::new()) {
        return CheckResult { ok: false, leftover: Envs::new(), diagnostics: vec![d] };
    }
    check_with_frees(frees, p)
}

fn first_non_minimal(p: &Process, path: &mut Vec<String>) -> Option<Diagnostic> {
    let found =
        |path: &Vec<String>, what: String| Some(Diagnostic { path: path.join("/"), rule: "Minimal", message: what });
    match p {
        Process::Res { name, ty, body } => {
            if !is_minimal_c(ty) {
                return found(path, format!("restriction of `{name}` has non-minimal type {ty}"));
            }
            path.push("body".into());
            let r = first_non_minimal(body, path);
            path.pop();
            r
        }
        Process::Out { payload, cont, .. } => {
            for (i, v) in payload.iter().enumerate() {
                path.push(format!("payload[{i}]"));
                let r = value_non_minimal(v, path);
                path.pop();
                if r.is_some() {
                    return r;
                }
            }
            path.push("cont".into());
            let r = first_non_minimal(cont, path);
            path.pop();
            r
        }
        Process::In { cont, .. } | Process::Sel { cont, .. } => {
            path.push("cont".into());
            let r = first_non_minimal(cont, path);
            path.pop();
            r
        }
        Process::Bra { cases, .. } => {
            for (l, q) in cases {
                path.push(format!("case:{l}"));
                let r = first_non_minimal(q, path);
                path.pop();
                if r.is_some() {
                    return r;
                }
            }
            None
        }
        Process::App { fun, args } => {
            path.push("fun".into());
            let r = value_non_minimal(fun, path);
            path.pop();
            if r.is_some() {
                return r;
            }
            for (i, v) in args.iter().enumerate() {
                path.push(format!("arg[{i}]"));
                let r = value_non_minimal(v, path);
                path.pop();
                if r.is_some() {
                    return r;
                }
            }
            None
        }
        Process::Par(a, b) => {
            path.push("left".into());
            let r = first_non_minimal(a, path);
            path.pop();
            if r.is_some() {
                return r;
            }
            path.push("right".into());
            let r = first_non_minimal(b, path);
            path.pop();
            r
        }
        Process::Inact => None,
    }
}

fn value_non_minimal(v: &Value, path: &mut Vec<String>) -> Option<Diagnostic> {
    if let Value::Abs(a) = v {
        for (n, c) in &a.params {
            if !is_minimal_c(c) {
                return Some(Diagnostic {
                    path: path.join("/"),
                    rule: "Minimal",
                    message: format!("parameter `{n}` has non-minimal type {c}"),
                });
            }
        }
        path.push("body".into());
        let r = first_non_minimal(&a.body, path);
        path.pop();
        return r;
    }
    None
}

struct Checker {
    path: Vec<String>,
}

type TResult<T> = Result<T, Diagnostic>;

impl Checker {
    fn fail<T>(&self, rule: &'static str, message: String) -> TResult<T> {
        Err(Diagnostic { path: self.path.join("/"), rule, message })
    }

    fn at<T>(&mut self, seg: String, f: impl FnOnce(&mut Self) -> TResult<T>) -> TResult<T> {
        self.path.push(seg);
        let r = f(self);
        self.path.pop();
        r
    }

    /// Looks up a session endpoint and returns its unfolded type.
    fn session_of(&self, env: &Envs, n: &Name, rule: &'static str) -> TResult<Option<(usize, SType)>> {
        if let Some(i) = env.delta_pos(n) {
            return Ok(Some((i, env.delta[i].1.unfold_all())));
        }
        if env.gamma_name(n).is_some() {
            return Ok(None);
        }
        self.fail(rule, format!("name `{n}` is not in scope or already consumed"))
    }

    fn proc(&mut self, mut env: Envs, p: &Process) -> TResult<Envs> {
        match p {
            Process::Inact => Ok(env),
            Process::Out { subj, payload, cont } => {
                match self.session_of(&env, subj, "Send")? {
                    Some((_, s)) => {
                        let SType::Out(us, k) = s else {
                            return self
                                .fail("Send", format!("`{subj}` has type {s}, which does not start with an output"));
                        };
                        if us.len() != payload.len() {
                            return self.fail(
                                "PolySend",
                                format!("`{subj}` expects {} values, {} sent", us.len(), payload.len()),
                            );
                        }
                        for (j, (v, u)) in payload.iter().zip(&us).enumerate() {
                            env = self.at(format!("payload[{j}]"), |c| c.value_against(env, v, u))?;
                        }
                        let Some(i) = env.delta_pos(subj) else {
                            return self.fail("Send", format!("`{subj}` is used inside its own payload"));
                        };
                        env.delta[i].1 = *k;
                    }
                    None => {
                        let Some(CType::Chan(u)) = env.gamma_name(subj).cloned() else {
                            return self.fail("Req", format!("`{subj}` is not a shared channel"));
                        };
                        if payload.len() != 1 {
                            return self.fail("Req", format!("shared channel `{subj}` carries exactly one value"));
                        }
                        env = self.at("payload[0]".into(), |c| c.value_against(env, &payload[0], &u))?;
                    }
                }
                self.at("cont".into(), |c| c.proc(env, cont))
            }
            Process::In { subj, binders, cont } => {
                let tys: Vec<VType> = match self.session_of(&env, subj, "Rcv")? {
                    Some((i, s)) => {
                        let SType::In(us, k) = s else {
                            return self
                                .fail("Rcv", format!("`{subj}` has type {s}, which does not start with an input"));
                        };
                        if us.len() != binders.len() {
                            return self.fail(
                                "PolyRcv",
                                format!("`{subj}` carries {} values, {} binders given", us.len(), binders.len()),
                            );
                        }
                        env.delta[i].1 = *k;
                        us
                    }
                    None => {
                        let Some(CType::Chan(u)) = env.gamma_name(subj).cloned() else {
                            return self.fail("Acc", format!("`{subj}` is not a shared channel"));
                        };
                        if binders.len() != 1 {
                            return self.fail("Acc", format!("shared channel `{subj}` carries exactly one value"));
                        }
                        vec![u]
                    }
                };
                for (x, u) in binders.iter().zip(&tys) {
                    bind_var(&mut env, x, u);
                }
                let mut out = self.at("cont".into(), |c| c.proc(env, cont))?;
                for (x, u) in binders.iter().zip(&tys) {
                    if matches!(u, VType::Lin(_)) {
                        if out.lambda.iter().any(|(k, _)| *k == x.key()) {
                            return self.fail("Rcv", format!("linear variable `{x}` is never used"));
                        }
                    } else if let Some(pos) = out.gamma_vars.iter().rposition(|(k, _)| *k == x.key()) {
                        out.gamma_vars.remove(pos);
                    }
                }
                Ok(out)
            }
            Process::Sel { subj, label, cont } => {
                let Some((i, s)) = self.session_of(&env, subj, "Sel")? else {
                    return self.fail("Sel", format!("`{subj}` is shared; selection needs a session"));
                };
                let SType::Sel(cases) = s else {
                    return self.fail("Sel", format!("`{subj}` has type {s}, which is not a selection"));
                };
                let Some((_, k)) = cases.iter().find(|(l, _)| l == label) else {
                    return self.fail("Sel", format!("label `{label}` not offered by `{subj}`"));
                };
                env.delta[i].1 = k.clone();
                self.at("cont".into(), |c| c.proc(env, cont))
            }
            Process::Bra { subj, cases } => {
                let Some((i, s)) = self.session_of(&env, subj, "Bra")? else {
                    return self.fail("Bra", format!("`{subj}` is shared; branching needs a session"));
                };
                let SType::Bra(tcases) = s else {
                    return self.fail("Bra", format!("`{subj}` has type {s}, which is not a branching"));
                };
                if tcases.len() != cases.len() || tcases.iter().any(|(l, _)| !cases.iter().any(|(m, _)| m == l)) {
                    return self
                        .fail("Bra", format!("branches of `{subj}` do not match its type {}", SType::Bra(tcases)));
                }
                let mut result: Option<Envs> = None;
                for (l, q) in cases {
                    let k = tcases.iter().find(|(m, _)| m == l).map(|(_, k)| k.clone()).unwrap();
                    let mut e = env.clone();
                    e.delta[i].1 = k;
                    let out = self.at(format!("case:{l}"), |c| c.proc(e, q))?;
                    match &result {
                        None => result = Some(out),
                        Some(prev) => {
                            if !same_linear(prev, &out) {
                                return self.fail("Bra", format!("branch `{l}` consumes different linear resources"));
                            }
                        }
                    }
                }
                Ok(result.unwrap_or(env))
            }
            Process::App { fun, args } => {
                let (u, env1) = self.at("fun".into(), |c| c.value(env, fun))?;
                let params = match u {
                    VType::Lin(cs) | VType::Sh(cs) => cs,
                    VType::Base(b) => return self.fail("App", format!("cannot apply a value of base type {b}")),
                };
                if params.len() != args.len() {
                    return self.fail(
                        "PolyApp",
                        format!("abstraction expects {} arguments, {} given", params.len(), args.len()),
                    );
                }
                let mut env = env1;
                for (j, (a, c)) in args.iter().zip(&params).enumerate() {
                    env = self.at(format!("arg[{j}]"), |ch| ch.arg(env, a, c))?;
                }
                Ok(env)
            }
            Process::Par(a, b) => {
                let before = env.delta.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>();
                let mut out = self.at("left".into(), |c| c.proc(env, a))?;
                let used = crate::ast::free_names(a);
                for n in used {
                    if !before.contains(&n) {
                        continue;
                    }
                    if let Some(pos) = out.delta_pos(&n) {
                        if !out.delta[pos].1.is_end() {
                            return self.fail(
                                "Par",
                                format!("`{n}` is used on the left of `|` but left with type {}", out.delta[pos].1),
                            );
                        }
                        out.delta.remove(pos);
                    }
                }
                self.at("right".into(), |c| c.proc(out, b))
            }
            Process::Res { name, ty, body } => {
                let mark_names = env.gamma_names.len();
                match ty {
                    CType::Session(s) => {
                        if env.delta_pos(&name.plain()).is_some() || env.delta_pos(&name.co()).is_some() {
                            return self.fail("ResS", format!("`{name}` is already bound; rename the restriction"));
                        }
                        env.delta.push((name.plain(), s.clone()));
                        env.delta.push((name.plain().co(), dual(s)));
                    }
                    CType::Chan(_) => env.gamma_names.push((name.key(), ty.clone())),
                    CType::Base(b) => return self.fail("Res", format!("cannot restrict a name of base type {b}")),
                }
                let mut out = self.at("body".into(), |c| c.proc(env, body))?;
                match ty {
                    CType::Session(_) => {
                        for n in [name.plain(), name.plain().co()] {
                            if let Some(pos) = out.delta_pos(&n) {
                                if !out.delta[pos].1.is_end() {
                                    return self.fail(
                                        "ResS",
                                        format!("restricted session `{n}` left with type {}", out.delta[pos].1),
                                    );
                                }
                                out.delta.remove(pos);
                            }
                        }
                    }
                    _ => out.gamma_names.truncate(mark_names.min(out.gamma_names.len())),
                }
                Ok(out)
            }
        }
    }

    /// Checks an application argument against a parameter type.
    fn arg(&mut self, mut env: Envs, a: &Value, c: &CType) -> TResult<Envs> {
        match (a, c) {
            (Value::Name(n), CType::Session(s)) => {
                let Some(i) = env.delta_pos(n) else {
                    return self.fail("App", format!("session `{n}` is not available to pass"));
                };
                if !stype_eq(&env.delta[i].1, s) {
                    return self
                        .fail("App", format!("`{n}` has type {} but the parameter expects {s}", env.delta[i].1));
                }
                env.delta.remove(i);
                Ok(env)
            }
            (Value::Name(n), CType::Chan(_)) => match env.gamma_name(n) {
                Some(d) if ctype_eq(d, c) => Ok(env),
                Some(d) => self.fail("App", format!("`{n}` has type {d} but the parameter expects {c}")),
                None => self.fail("App", format!("shared name `{n}` is not in scope")),
            },
            (_, CType::Base(b)) => {
                let found = match a {
                    Value::Lit(l) => Some(lit_ty(l)),
                    Value::Name(n) => match env.gamma_name(n) {
                        Some(CType::Base(x)) => Some(*x),
                        _ => None,
                    },
                    Value::Var(x) => match env.gamma_vars.iter().rev().find(|(k, _)| *k == x.key()) {
                        Some((_, VType::Base(y))) => Some(*y),
                        _ => None,
                    },
                    Value::Abs(_) => None,
                };
                match found {
                    Some(x) if x == *b => Ok(env),
                    _ => self.fail("App", format!("argument `{a}` is not of base type {b}")),
                }
            }
            _ => self.fail("App", format!("argument `{a}` cannot instantiate a parameter of type {c}")),
        }
    }

    fn value_against(&mut self, env: Envs, v: &Value, expected: &VType) -> TResult<Envs> {
        let (u, out) = self.value(env, v)?;
        let ok = vtype_eq(&u, expected)
            || matches!((&u, expected), (VType::Sh(a), VType::Lin(b)) if a.len() == b.len() && a.iter().zip(b).all(|(x, y)| ctype_eq(x, y)));
        if !ok {
            return self.fail("Send", format!("value `{v}` has type {u}, expected {expected}"));
        }
        Ok(out)
    }

    fn value(&mut self, mut env: Envs, v: &Value) -> TResult<(VType, Envs)> {
        match v {
            Value::Lit(l) => Ok((VType::Base(lit_ty(l)), env)),
            Value::Var(x) => {
                if let Some(pos) = env.lambda.iter().position(|(k, _)| *k == x.key()) {
                    let (_, u) = env.lambda.remove(pos);
                    return Ok((u, env));
                }
                if let Some((_, u)) = env.gamma_vars.iter().rev().find(|(k, _)| *k == x.key()) {
                    return Ok((u.clone(), env));
                }
                self.fail("LVar", format!("variable `{x}` is not in scope or already used"))
            }
            Value::Name(n) => match env.gamma_name(n) {
                Some(CType::Base(b)) => Ok((VType::Base(*b), env)),
                _ => self.fail("Send", format!("name `{n}` cannot be sent: HO has no name passing")),
            },
            Value::Abs(a) => self.abs(env, a),
        }
    }

    fn abs(&mut self, env: Envs, a: &Abs) -> TResult<(VType, Envs)> {
        let tys: Vec<CType> = a.params.iter().map(|(_, c)| c.clone()).collect();
        let mut inner = match a.lin {
            Linearity::Lin => env.clone(),
            Linearity::Sh => Envs {
                gamma_names: env.gamma_names.clone(),
                gamma_vars: env.gamma_vars.clone(),
                lambda: vec![],
                delta: vec![],
            },
        };
        for (n, c) in &a.params {
            match c {
                CType::Session(s) => {
                    if inner.delta_pos(n).is_some() {
                        return self.fail("Abs", format!("parameter `{n}` shadows a session in scope"));
                    }
                    inner.delta.push((n.plain(), s.clone()));
                }
                other => inner.gamma_names.push((n.key(), other.clone())),
            }
        }
        let mark = env.gamma_names.len();
        let mut out = self.at("body".into(), |c| c.proc(inner, &a.body))?;
        for (n, c) in &a.params {
            if let CType::Session(_) = c {
                if let Some(pos) = out.delta_pos(&n.plain()) {
                    if !out.delta[pos].1.is_end() {
                        return self.fail("Abs", format!("parameter `{n}` left with type {}", out.delta[pos].1));
                    }
                    out.delta.remove(pos);
                }
            }
        }
        match a.lin {
            Linearity::Lin => {
                out.gamma_names.truncate(mark.min(out.gamma_names.len()));
                Ok((VType::Lin(tys), out))
            }
            Linearity::Sh => {
                if !out.is_exhausted() {
                    return self.fail("Prom", "a shared abstraction must not leave linear resources".into());
                }
                Ok((VType::Sh(tys), env))
            }
        }
    }
}

fn lit_ty(l: &Lit) -> BaseTy {
    match l {
        Lit::Int(_) => BaseTy::Int,
        Lit::Bool(_) => BaseTy::Bool,
    }
}

fn bind_var(env: &mut Envs, x: &Var, u: &VType) {
    match u {
        VType::Lin(_) => env.lambda.push((x.key(), u.clone())),
        _ => env.gamma_vars.push((x.key(), u.clone())),
    }
}

fn same_linear(a: &Envs, b: &Envs) -> bool {
    let lam = |e: &Envs| {
        let mut v: Vec<Key> = e.lambda.iter().map(|(k, _)| k.clone()).collect();
        v.sort();
        v
    };
    if lam(a) != lam(b) {
        return false;
    }
    let live = |e: &Envs| e.delta.iter().filter(|(_, s)| !s.is_end()).cloned().collect::<Vec<_>>();
    let (da, db) = (live(a), live(b));
    da.len() == db.len() && da.iter().all(|(n, s)| db.iter().any(|(m, t)| m == n && stype_eq(s, t)))
}

/// Whether every type annotation in `p` is minimal.
pub fn annotations_minimal(p: &Process) -> bool {
    first_non_minimal(p, &mut Vec::new()).is_none()
}

/// Whether a value type is minimal; re-exported for callers auditing payloads.
pub fn value_type_minimal(u: &VType) -> bool {
    is_minimal_v(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_file, parse_process, Mode};

    fn check_src(src: &str) -> CheckResult {
        let f = parse_file(src, Mode::User).unwrap();
        check_with_frees(&f.frees, &f.process)
    }

    #[test]
    fn nil_is_typable() {
        assert!(check_process(&Envs::new(), &Process::Inact).ok);
    }

    #[test]
    fn direction_mismatch_fails_at_send() {
        let r = check_src("free s : ?<Int>;end; s!(1).0");
        assert!(!r.ok);
        assert_eq!(r.diagnostics[0].rule, "Send");
    }

    #[test]
    fn session_exchange_is_typable() {
        assert!(check_src("new s : !<Bool>;end in s!(true).0 | ~s?(b).0").ok);
    }

    #[test]
    fn unfinished_session_is_rejected() {
        assert!(!check_src("new s : !<Bool>;!<Bool>;end in s!(true).0 | ~s?(b).~s?(c).0").ok);
    }

    #[test]
    fn linear_variable_value() {
        let mut env = Envs::new();
        env.lambda.push((Var::new("y").key(), VType::Lin(vec![CType::Session(SType::End)])));
        let (u, r) = check_value(&env, &Value::var("y"));
        assert!(r.ok);
        assert_eq!(u.unwrap().to_string(), "lin(end)");
    }

    #[test]
    fn shared_abstraction_cannot_capture_linear_variable() {
        let r = check_src("free a : ?<lin(end)>;end; free b : !<un(end)>;end; a?(y).b!(\\un(x: end) -> apply y (x)).0");
        assert!(!r.ok);
        assert_eq!(r.diagnostics[0].rule, "LVar");
    }

    #[test]
    fn branch_and_select() {
        let src = "type S = &{add: !<un(Int, Int)>;end, sub: !<un(Int, Int)>;end};
                   new u : S in branch u { add: u!(\\un(a: Int, b: Int) -> 0); sub: u!(\\un(a: Int, b: Int) -> 0) }
                   | select ~u add.~u?(x).apply x (16, 26)";
        let r = check_src(src);
        assert!(r.ok, "{}", r.message());
    }

    #[test]
    fn abstraction_type() {
        let p = parse_process("a!(\\lin(x: end) -> 0).0", Mode::User).unwrap();
        let Process::Out { payload, .. } = p else { panic!() };
        let (u, r) = check_value(&Envs::new(), &payload[0]);
        assert!(r.ok);
        assert_eq!(u.unwrap(), VType::Lin(vec![CType::Session(SType::End)]));
    }
}
