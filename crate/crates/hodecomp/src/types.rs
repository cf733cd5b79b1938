//! Session types, value types and channel types of HO; duality,
//! equi-recursive equality, minimality, and the type decomposition functions.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::ast::{sym, Name, Sym};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TypeError {
    #[error("recursive type `{0}` is not contractive")]
    NotContractive(String),
    #[error("recursive type `{0}` is not simple: its body contains another recursive type")]
    NotSimple(String),
    #[error("type `{0}` has free recursion variable `{1}`")]
    FreeTypeVar(String, String),
    #[error("recursion variable `{1}` of `{0}` occurs both in tail and payload position")]
    MixedRecursion(String, String),
    #[error("non-tail-recursive type `{0}` does not decompose into a single minimal type")]
    NonTailNotSingle(String),
    #[error("recursive body `{0}` contains a construct R cannot decompose")]
    UnsupportedInRecursion(String),
    #[error("type `{0}` has no reachable recursive type")]
    NoRecursion(String),
    #[error("type `{0}` is not recursive")]
    NotRecursive(String),
    #[error("session entry `{0}` carries no index")]
    Unindexed(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseTy {
    Int,
    Bool,
}

/// Session types.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SType {
    End,
    Out(Vec<VType>, Box<SType>),
    In(Vec<VType>, Box<SType>),
    /// Internal choice; labels kept in declaration order.
    Sel(Vec<(Sym, SType)>),
    /// External choice; labels kept in declaration order.
    Bra(Vec<(Sym, SType)>),
    Rec(Sym, Box<SType>),
    TVar(Sym),
}

/// Value types: linear and shared higher-order arrows, and base types.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum VType {
    Lin(Vec<CType>),
    Sh(Vec<CType>),
    Base(BaseTy),
}

/// Types of names and abstraction parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CType {
    Session(SType),
    Chan(VType),
    Base(BaseTy),
}

impl SType {
    pub fn out(u: VType, s: SType) -> SType {
        SType::Out(vec![u], Box::new(s))
    }
    pub fn inp(u: VType, s: SType) -> SType {
        SType::In(vec![u], Box::new(s))
    }
    pub fn rec(t: &str, s: SType) -> SType {
        SType::Rec(sym(t), Box::new(s))
    }
    pub fn tvar(t: &str) -> SType {
        SType::TVar(sym(t))
    }
    pub fn is_end(&self) -> bool {
        matches!(self, SType::End)
    }
    /// One-step unfolding of a top-level recursion; identity otherwise.
    pub fn unfold(&self) -> SType {
        match self {
            SType::Rec(t, body) => subst_tvar_s(body, t, self),
            other => other.clone(),
        }
    }
    /// Unfolds until the head is not a recursion.
    pub fn unfold_all(&self) -> SType {
        let mut cur = self.clone();
        // Contractive types reach a non-recursive head in one step per nested
        // binder; the bound guards against malformed input.
        for _ in 0..64 {
            if let SType::Rec(..) = cur {
                cur = cur.unfold();
            } else {
                break;
            }
        }
        cur
    }
}

impl CType {
    pub fn session(s: SType) -> CType {
        CType::Session(s)
    }
    pub fn as_session(&self) -> Option<&SType> {
        match self {
            CType::Session(s) => Some(s),
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Recursion variables
// ---------------------------------------------------------------------------

fn subst_tvar_s(s: &SType, t: &Sym, r: &SType) -> SType {
    match s {
        SType::End => SType::End,
        SType::TVar(u) if u == t => r.clone(),
        SType::TVar(_) => s.clone(),
        SType::Out(us, k) => {
            SType::Out(us.iter().map(|u| subst_tvar_v(u, t, r)).collect(), Box::new(subst_tvar_s(k, t, r)))
        }
        SType::In(us, k) => {
            SType::In(us.iter().map(|u| subst_tvar_v(u, t, r)).collect(), Box::new(subst_tvar_s(k, t, r)))
        }
        SType::Sel(m) => SType::Sel(m.iter().map(|(l, k)| (l.clone(), subst_tvar_s(k, t, r))).collect()),
        SType::Bra(m) => SType::Bra(m.iter().map(|(l, k)| (l.clone(), subst_tvar_s(k, t, r))).collect()),
        SType::Rec(u, _) if u == t => s.clone(),
        SType::Rec(u, b) => SType::Rec(u.clone(), Box::new(subst_tvar_s(b, t, r))),
    }
}

fn subst_tvar_v(u: &VType, t: &Sym, r: &SType) -> VType {
    match u {
        VType::Lin(cs) => VType::Lin(cs.iter().map(|c| subst_tvar_c(c, t, r)).collect()),
        VType::Sh(cs) => VType::Sh(cs.iter().map(|c| subst_tvar_c(c, t, r)).collect()),
        VType::Base(b) => VType::Base(*b),
    }
}

fn subst_tvar_c(c: &CType, t: &Sym, r: &SType) -> CType {
    match c {
        CType::Session(s) => CType::Session(subst_tvar_s(s, t, r)),
        CType::Chan(u) => CType::Chan(subst_tvar_v(u, t, r)),
        CType::Base(b) => CType::Base(*b),
    }
}

/// Free recursion variables of a session type.
pub fn free_tvars(s: &SType) -> Vec<Sym> {
    let mut out = Vec::new();
    ftv_s(s, &mut vec![], &mut out);
    out
}

fn ftv_s(s: &SType, bound: &mut Vec<Sym>, out: &mut Vec<Sym>) {
    match s {
        SType::End => {}
        SType::TVar(t) => {
            if !bound.contains(t) && !out.contains(t) {
                out.push(t.clone());
            }
        }
        SType::Out(us, k) | SType::In(us, k) => {
            for u in us {
                ftv_v(u, bound, out);
            }
            ftv_s(k, bound, out);
        }
        SType::Sel(m) | SType::Bra(m) => {
            for (_, k) in m {
                ftv_s(k, bound, out);
            }
        }
        SType::Rec(t, b) => {
            bound.push(t.clone());
            ftv_s(b, bound, out);
            bound.pop();
        }
    }
}

fn ftv_v(u: &VType, bound: &mut Vec<Sym>, out: &mut Vec<Sym>) {
    match u {
        VType::Lin(cs) | VType::Sh(cs) => {
            for c in cs {
                ftv_c(c, bound, out);
            }
        }
        VType::Base(_) => {}
    }
}

fn ftv_c(c: &CType, bound: &mut Vec<Sym>, out: &mut Vec<Sym>) {
    match c {
        CType::Session(s) => ftv_s(s, bound, out),
        CType::Chan(u) => ftv_v(u, bound, out),
        CType::Base(_) => {}
    }
}

/// Where recursion variable `t` occurs in the session spine of `s`
/// (continuations) and inside payload types.
fn tvar_positions(s: &SType, t: &Sym) -> (bool, bool) {
    let mut tail = false;
    let mut payload = false;
    fn go(s: &SType, t: &Sym, tail: &mut bool, payload: &mut bool) {
        match s {
            SType::TVar(u) if u == t => *tail = true,
            SType::Out(us, k) | SType::In(us, k) => {
                for u in us {
                    let mut fv = Vec::new();
                    ftv_v(u, &mut vec![], &mut fv);
                    if fv.contains(t) {
                        *payload = true;
                    }
                }
                go(k, t, tail, payload);
            }
            SType::Sel(m) | SType::Bra(m) => {
                for (_, k) in m {
                    go(k, t, tail, payload);
                }
            }
            SType::Rec(u, b) if u != t => go(b, t, tail, payload),
            _ => {}
        }
    }
    go(s, t, &mut tail, &mut payload);
    (tail, payload)
}

/// Tail-recursive: the recursion variable occurs only as a continuation.
pub fn is_tail_recursive(s: &SType) -> bool {
    match s {
        SType::Rec(t, body) => {
            let (tail, payload) = tvar_positions(body, t);
            tail && !payload
        }
        _ => false,
    }
}

/// Checks that every recursion is contractive and simple and that `s` is closed.
pub fn validate(s: &SType) -> Result<(), TypeError> {
    if let Some(t) = free_tvars(s).first() {
        return Err(TypeError::FreeTypeVar(s.to_string(), t.to_string()));
    }
    validate_s(s)
}

pub fn validate_c(c: &CType) -> Result<(), TypeError> {
    match c {
        CType::Session(s) => validate(s),
        CType::Chan(u) => validate_v(u),
        CType::Base(_) => Ok(()),
    }
}

pub fn validate_v(u: &VType) -> Result<(), TypeError> {
    match u {
        VType::Lin(cs) | VType::Sh(cs) => cs.iter().try_for_each(validate_c_open),
        VType::Base(_) => Ok(()),
    }
}

fn validate_c_open(c: &CType) -> Result<(), TypeError> {
    match c {
        CType::Session(s) => validate_s(s),
        CType::Chan(u) => validate_v(u),
        CType::Base(_) => Ok(()),
    }
}

fn spine_has_rec(s: &SType) -> bool {
    match s {
        SType::Rec(..) => true,
        SType::Out(_, k) | SType::In(_, k) => spine_has_rec(k),
        SType::Sel(m) | SType::Bra(m) => m.iter().any(|(_, k)| spine_has_rec(k)),
        _ => false,
    }
}

fn validate_s(s: &SType) -> Result<(), TypeError> {
    match s {
        SType::End | SType::TVar(_) => Ok(()),
        SType::Out(us, k) | SType::In(us, k) => {
            for u in us {
                validate_v(u)?;
            }
            validate_s(k)
        }
        SType::Sel(m) | SType::Bra(m) => m.iter().try_for_each(|(_, k)| validate_s(k)),
        SType::Rec(t, body) => {
            if let SType::TVar(u) = &**body {
                if u == t {
                    return Err(TypeError::NotContractive(s.to_string()));
                }
            }
            if matches!(&**body, SType::Rec(..)) || spine_has_rec(body) {
                return Err(TypeError::NotSimple(s.to_string()));
            }
            let (tail, payload) = tvar_positions(body, t);
            if tail && payload {
                return Err(TypeError::MixedRecursion(s.to_string(), t.to_string()));
            }
            validate_s(body)
        }
    }
}

// ---------------------------------------------------------------------------
// Duality and equality
// ---------------------------------------------------------------------------

/// The dual of a session type. Payload occurrences of a recursion variable
/// keep referring to the original (non-dualised) recursive type.
pub fn dual(s: &SType) -> SType {
    dual_in(s, &mut Vec::new())
}

fn close_payload(u: &VType, env: &[(Sym, SType)]) -> VType {
    env.iter().rev().fold(u.clone(), |acc, (t, orig)| subst_tvar_v(&acc, t, orig))
}

fn dual_in(s: &SType, env: &mut Vec<(Sym, SType)>) -> SType {
    match s {
        SType::End => SType::End,
        SType::TVar(t) => SType::TVar(t.clone()),
        SType::Out(us, k) => SType::In(us.iter().map(|u| close_payload(u, env)).collect(), Box::new(dual_in(k, env))),
        SType::In(us, k) => SType::Out(us.iter().map(|u| close_payload(u, env)).collect(), Box::new(dual_in(k, env))),
        SType::Sel(m) => SType::Bra(m.iter().map(|(l, k)| (l.clone(), dual_in(k, env))).collect()),
        SType::Bra(m) => SType::Sel(m.iter().map(|(l, k)| (l.clone(), dual_in(k, env))).collect()),
        SType::Rec(t, body) => {
            env.push((t.clone(), s.clone()));
            let d = dual_in(body, env);
            env.pop();
            SType::Rec(t.clone(), Box::new(d))
        }
    }
}

/// Equi-recursive equality of session types.
pub fn stype_eq(a: &SType, b: &SType) -> bool {
    Eq_::default().s(a, b)
}

pub fn vtype_eq(a: &VType, b: &VType) -> bool {
    Eq_::default().v(a, b)
}

pub fn ctype_eq(a: &CType, b: &CType) -> bool {
    Eq_::default().c(a, b)
}

#[derive(Default)]
struct Eq_ {
    assumed: HashSet<(SType, SType)>,
}

impl Eq_ {
    fn s(&mut self, a: &SType, b: &SType) -> bool {
        if a == b {
            return true;
        }
        if matches!(a, SType::Rec(..)) || matches!(b, SType::Rec(..)) {
            let key = (a.clone(), b.clone());
            if !self.assumed.insert(key) {
                return true;
            }
            return self.s(&a.unfold(), &b.unfold());
        }
        match (a, b) {
            (SType::Out(ua, ka), SType::Out(ub, kb)) | (SType::In(ua, ka), SType::In(ub, kb)) => {
                ua.len() == ub.len() && ua.iter().zip(ub).all(|(x, y)| self.v(x, y)) && self.s(ka, kb)
            }
            (SType::Sel(ma), SType::Sel(mb)) | (SType::Bra(ma), SType::Bra(mb)) => {
                ma.len() == mb.len()
                    && ma.iter().all(|(l, ka)| match mb.iter().find(|(m, _)| m == l) {
                        Some((_, kb)) => self.s(ka, kb),
                        None => false,
                    })
            }
            _ => false,
        }
    }
    fn v(&mut self, a: &VType, b: &VType) -> bool {
        match (a, b) {
            (VType::Lin(ca), VType::Lin(cb)) | (VType::Sh(ca), VType::Sh(cb)) => {
                ca.len() == cb.len() && ca.iter().zip(cb).all(|(x, y)| self.c(x, y))
            }
            (VType::Base(x), VType::Base(y)) => x == y,
            _ => false,
        }
    }
    fn c(&mut self, a: &CType, b: &CType) -> bool {
        match (a, b) {
            (CType::Session(x), CType::Session(y)) => self.s(x, y),
            (CType::Chan(x), CType::Chan(y)) => self.v(x, y),
            (CType::Base(x), CType::Base(y)) => x == y,
            _ => false,
        }
    }
}

// ---------------------------------------------------------------------------
// Minimality
// ---------------------------------------------------------------------------

/// Whether a session type belongs to the minimal fragment.
pub fn is_minimal(s: &SType) -> bool {
    match s {
        SType::End | SType::TVar(_) => true,
        SType::Out(us, k) | SType::In(us, k) => {
            us.iter().all(is_minimal_v) && matches!(**k, SType::End | SType::TVar(_))
        }
        SType::Sel(m) | SType::Bra(m) => m.iter().all(|(_, k)| is_minimal(k)),
        SType::Rec(_, body) => !matches!(**body, SType::Rec(..)) && is_minimal(body),
    }
}

pub fn is_minimal_v(u: &VType) -> bool {
    match u {
        VType::Lin(cs) | VType::Sh(cs) => cs.iter().all(is_minimal_c),
        VType::Base(_) => true,
    }
}

pub fn is_minimal_c(c: &CType) -> bool {
    match c {
        CType::Session(s) => is_minimal(s),
        CType::Chan(u) => is_minimal_v(u),
        CType::Base(_) => true,
    }
}

// ---------------------------------------------------------------------------
// Decomposition of types
// ---------------------------------------------------------------------------

/// Decomposes a session type into its list of minimal session types.
pub fn gdecomp(s: &SType) -> Result<Vec<SType>, TypeError> {
    match s {
        SType::End => Ok(vec![SType::End]),
        SType::TVar(t) => Ok(vec![SType::TVar(t.clone())]),
        SType::Out(us, k) | SType::In(us, k) => {
            let payload = us.iter().map(gdecomp_v).collect::<Result<Vec<_>, _>>()?;
            let head = match s {
                SType::Out(..) => SType::Out(payload, Box::new(SType::End)),
                _ => SType::In(payload, Box::new(SType::End)),
            };
            let mut out = vec![head];
            if !k.is_end() {
                out.extend(gdecomp(k)?);
            }
            Ok(out)
        }
        SType::Bra(m) => {
            let mut cases = Vec::with_capacity(m.len());
            for (l, k) in m {
                let arrow = VType::Lin(gdecomp(k)?.into_iter().map(CType::Session).collect());
                cases.push((l.clone(), SType::Out(vec![arrow], Box::new(SType::End))));
            }
            Ok(vec![SType::Bra(cases)])
        }
        SType::Sel(m) => {
            let mut cases = Vec::with_capacity(m.len());
            for (l, k) in m {
                let arrow = VType::Lin(gdecomp(&dual(k))?.into_iter().map(CType::Session).collect());
                cases.push((l.clone(), SType::In(vec![arrow], Box::new(SType::End))));
            }
            Ok(vec![SType::Sel(cases)])
        }
        SType::Rec(t, body) => {
            let (tail, payload) = tvar_positions(body, t);
            if tail && payload {
                return Err(TypeError::MixedRecursion(s.to_string(), t.to_string()));
            }
            if is_tail_recursive(s) {
                rdecomp(t, body)
            } else {
                let mut inner = gdecomp(body)?;
                if inner.len() != 1 {
                    return Err(TypeError::NonTailNotSingle(s.to_string()));
                }
                Ok(vec![SType::Rec(t.clone(), Box::new(inner.pop().unwrap()))])
            }
        }
    }
}

/// Decomposes a value type.
pub fn gdecomp_v(u: &VType) -> Result<VType, TypeError> {
    match u {
        VType::Lin(cs) => Ok(VType::Lin(gdecomp_params(cs)?)),
        VType::Sh(cs) => Ok(VType::Sh(gdecomp_params(cs)?)),
        VType::Base(b) => Ok(VType::Base(*b)),
    }
}

/// Decomposes a parameter list, flattening session types into their slices.
pub fn gdecomp_params(cs: &[CType]) -> Result<Vec<CType>, TypeError> {
    let mut out = Vec::new();
    for c in cs {
        out.extend(gdecomp_c(c)?);
    }
    Ok(out)
}

/// Decomposes a name type: a session type yields its list of slices, a
/// shared channel or base type yields a single entry.
pub fn gdecomp_c(c: &CType) -> Result<Vec<CType>, TypeError> {
    match c {
        CType::Session(s) => Ok(gdecomp(s)?.into_iter().map(CType::Session).collect()),
        CType::Chan(u) => Ok(vec![CType::Chan(gdecomp_v(u)?)]),
        CType::Base(b) => Ok(vec![CType::Base(*b)]),
    }
}

/// Number of slices a name of this type is split into.
pub fn glen_c(c: &CType) -> Result<usize, TypeError> {
    Ok(gdecomp_c(c)?.len())
}

/// Decomposition of the body of a tail-recursive type `μt.body`.
pub fn rdecomp(t: &Sym, body: &SType) -> Result<Vec<SType>, TypeError> {
    match body {
        SType::TVar(u) if u == t => Ok(vec![]),
        SType::Out(us, k) | SType::In(us, k) => {
            let payload = us.iter().map(gdecomp_v).collect::<Result<Vec<_>, _>>()?;
            let inner = match body {
                SType::Out(..) => SType::Out(payload, Box::new(SType::TVar(t.clone()))),
                _ => SType::In(payload, Box::new(SType::TVar(t.clone()))),
            };
            let mut out = vec![SType::Rec(t.clone(), Box::new(inner))];
            out.extend(rdecomp(t, k)?);
            Ok(out)
        }
        other => Err(TypeError::UnsupportedInRecursion(other.to_string())),
    }
}

/// Skips leading prefixes until a recursive type is met, then decomposes it.
pub fn rsdecomp(s: &SType) -> Result<Vec<SType>, TypeError> {
    let mut cur = s;
    loop {
        match cur {
            SType::Out(_, k) | SType::In(_, k) => cur = k,
            SType::Rec(t, body) => return rdecomp(t, body),
            _ => return Err(TypeError::NoRecursion(s.to_string())),
        }
    }
}

/// Position of the top-most prefix of a (possibly unfolded) tail-recursive
/// type within its recursion body, counted from 1.
pub fn findex(s: &SType) -> Result<usize, TypeError> {
    let start = match s {
        SType::Rec(t, body) => subst_tvar_s(body, t, s),
        other => other.clone(),
    };
    let mut l = 0usize;
    let mut cur = &start;
    loop {
        match cur {
            SType::Out(_, k) | SType::In(_, k) => {
                l += 1;
                cur = k;
            }
            SType::Rec(t, body) => {
                let n = rdecomp(t, body)?.len();
                if l > n {
                    return Err(TypeError::NotRecursive(s.to_string()));
                }
                return Ok(n - l + 1);
            }
            _ => return Err(TypeError::NotRecursive(s.to_string())),
        }
    }
}

/// Whether a name of this type is handled by the recursive rows of the
/// breakdown: a session type whose prefixes lead to a tail-recursive type.
pub fn is_recursive_session(s: &SType) -> bool {
    let mut cur = s;
    loop {
        match cur {
            SType::Out(_, k) | SType::In(_, k) => cur = k,
            SType::Rec(..) => return is_tail_recursive(cur),
            _ => return false,
        }
    }
}

// ---------------------------------------------------------------------------
// Environments
// ---------------------------------------------------------------------------

/// Decomposes a session environment: `u_i : S` becomes
/// `u_i, …, u_{i+|G(S)|-1}` typed by the slices of `S`.
pub fn envdecomp_delta(delta: &[(Name, SType)]) -> Result<Vec<(Name, SType)>, TypeError> {
    let mut out = Vec::new();
    for (n, s) in delta {
        let i = n.index.ok_or_else(|| TypeError::Unindexed(n.to_string()))?;
        for (j, piece) in gdecomp(s)?.into_iter().enumerate() {
            out.push((n.with_index(Some(i + j as u32)), piece));
        }
    }
    Ok(out)
}

/// Decomposes a shared environment pointwise.
pub fn envdecomp_shared<K: Clone>(gamma: &[(K, VType)]) -> Result<Vec<(K, VType)>, TypeError> {
    gamma.iter().map(|(k, u)| Ok((k.clone(), gdecomp_v(u)?))).collect()
}

/// Decomposes shared channel entries `u_i : chan U`.
pub fn envdecomp_chan(gamma: &[(Name, CType)]) -> Result<Vec<(Name, CType)>, TypeError> {
    gamma
        .iter()
        .map(|(n, c)| match c {
            CType::Chan(u) => Ok((n.clone(), CType::Chan(gdecomp_v(u)?))),
            other => Ok((n.clone(), other.clone())),
        })
        .collect()
}

/// Every co-located pair of endpoints carries dual types.
pub fn balanced(delta: &[(Name, SType)]) -> bool {
    for (n, s) in delta {
        if n.dual {
            continue;
        }
        if let Some((_, t)) = delta.iter().find(|(m, _)| *m == n.co()) {
            if !stype_eq(&dual(s), t) {
                return false;
            }
        }
    }
    true
}

/// The session environments reachable by one communication or one choice.
pub fn env_step(delta: &[(Name, SType)]) -> Vec<Vec<(Name, SType)>> {
    let mut out = Vec::new();
    for (i, (n, s)) in delta.iter().enumerate() {
        let Some(j) = delta.iter().position(|(m, _)| *m == n.co()) else { continue };
        let s = s.unfold_all();
        let t = delta[j].1.unfold_all();
        let mut push = |a: SType, b: SType| {
            let mut d = delta.to_vec();
            d[i].1 = a;
            d[j].1 = b;
            out.push(d);
        };
        match (&s, &t) {
            (SType::Out(ua, ka), SType::In(ub, kb))
                if ua.len() == ub.len() && ua.iter().zip(ub).all(|(x, y)| vtype_eq(x, y)) =>
            {
                push((**ka).clone(), (**kb).clone())
            }
            (SType::Sel(ma), SType::Bra(mb)) => {
                for (l, ka) in ma {
                    if let Some((_, kb)) = mb.iter().find(|(m, _)| m == l) {
                        push(ka.clone(), kb.clone());
                    }
                }
            }
            _ => {}
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

impl fmt::Display for BaseTy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseTy::Int => write!(f, "Int"),
            BaseTy::Bool => write!(f, "Bool"),
        }
    }
}

fn comma<T: fmt::Display>(f: &mut fmt::Formatter<'_>, xs: &[T]) -> fmt::Result {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

impl fmt::Display for SType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SType::End => write!(f, "end"),
            SType::TVar(t) => write!(f, "{t}"),
            SType::Out(us, k) => {
                write!(f, "!<")?;
                comma(f, us)?;
                write!(f, ">;{k}")
            }
            SType::In(us, k) => {
                write!(f, "?<")?;
                comma(f, us)?;
                write!(f, ">;{k}")
            }
            SType::Sel(m) | SType::Bra(m) => {
                write!(f, "{}{{", if matches!(self, SType::Sel(_)) { "+" } else { "&" })?;
                for (i, (l, k)) in m.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{l}: {k}")?;
                }
                write!(f, "}}")
            }
            SType::Rec(t, b) => write!(f, "rec {t}. {b}"),
        }
    }
}

impl fmt::Display for VType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VType::Lin(cs) => {
                write!(f, "lin(")?;
                comma(f, cs)?;
                write!(f, ")")
            }
            VType::Sh(cs) => {
                write!(f, "un(")?;
                comma(f, cs)?;
                write!(f, ")")
            }
            VType::Base(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Display for CType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CType::Session(s) => write!(f, "{s}"),
            CType::Chan(u) => write!(f, "chan {u}"),
            CType::Base(b) => write!(f, "{b}"),
        }
    }
}
