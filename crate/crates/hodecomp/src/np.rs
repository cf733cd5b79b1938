//! Encoding of first-order name passing into abstraction passing.
//!
//! A name or base value `m` is sent packed as `λz. z?(x).(x m)`. A receiver
//! `n?(x).Q` obtains the packed value `y` and unpacks it by applying it to a
//! fresh session `s` whose other endpoint offers `λx.Q`:
//! `n?(y).νs (y s | s̄!⟨λx.Q⟩.0)`.
//!
//! Input sources are parsed with [`crate::parse::Mode::NamePassing`], in
//! which payload types that are not abstraction types are already read as
//! `lin(?<lin(C)>;end)`, the type of the packed form of a `C`.

use thiserror::Error;

use crate::ast::{barendregt, substitute, Abs, Linearity, Name, Process, Subst, Supply, Value, Var};
use crate::types::{dual, CType, SType, VType};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NpError {
    #[error("no type is known for name `{0}`")]
    UnknownName(String),
    #[error("`{subj}` has type {ty}, which does not allow {action}")]
    Mismatch { subj: String, ty: String, action: String },
    #[error("input on `{0}` binds several packed names; only one per input is supported")]
    Polyadic(String),
}

type Result<T> = std::result::Result<T, NpError>;

#[derive(Clone, Default)]
struct TyEnv {
    names: Vec<(Name, CType)>,
}

impl TyEnv {
    fn lookup(&self, n: &Name) -> Result<CType> {
        if let Some((_, c)) = self.names.iter().rev().find(|(m, _)| m.key() == n.key() && m.dual == n.dual) {
            return Ok(c.clone());
        }
        self.names
            .iter()
            .rev()
            .find(|(m, c)| m.key() == n.key() && !matches!(c, CType::Session(_)))
            .map(|(_, c)| c.clone())
            .ok_or_else(|| NpError::UnknownName(n.to_string()))
    }
    fn bind(&mut self, n: &Name, c: CType) {
        self.names.push((n.clone(), c));
    }
    fn session(&self, n: &Name) -> Result<Option<SType>> {
        match self.lookup(n)? {
            CType::Session(s) => Ok(Some(s.unfold())),
            _ => Ok(None),
        }
    }
}

/// The session type `?<lin(C)>;end` read by the receiver of a packed `C`,
/// if `u` is the type of a packed value.
fn unpacker(u: &VType) -> Option<(SType, CType)> {
    match u {
        VType::Lin(cs) if cs.len() == 1 => match &cs[0] {
            CType::Session(s @ SType::In(us, k)) if k.is_end() && us.len() == 1 => match &us[0] {
                VType::Lin(inner) if inner.len() == 1 => Some((s.clone(), inner[0].clone())),
                _ => None,
            },
            _ => None,
        },
        _ => None,
    }
}

struct Encoder {
    supply: Supply,
}

impl Encoder {
    fn mismatch(subj: &Name, ty: impl ToString, action: &str) -> NpError {
        NpError::Mismatch { subj: subj.to_string(), ty: ty.to_string(), action: action.into() }
    }

    fn abs(&mut self, env: &TyEnv, a: &Abs) -> Result<Value> {
        let mut env2 = env.clone();
        for (n, c) in &a.params {
            env2.bind(n, c.clone());
        }
        Ok(Value::abs(a.params.clone(), a.lin, self.proc(&env2, &a.body)?))
    }

    fn value(&mut self, env: &TyEnv, v: &Value) -> Result<Value> {
        match v {
            Value::Abs(a) => self.abs(env, a),
            other => Ok(other.clone()),
        }
    }

    /// `λz. z?(x).(x v)`, with `z` typed by `zt`.
    fn pack(&mut self, zt: SType, v: Value) -> Value {
        let z = self.supply.fresh_name(&Name::new("z"));
        let x = self.supply.fresh_var(&Var::new("x"));
        Value::abs(
            vec![(z.clone(), CType::Session(zt))],
            Linearity::Lin,
            Process::inp(z, vec![x.clone()], Process::app(Value::Var(x), vec![v])),
        )
    }

    fn advance(&self, env: &mut TyEnv, subj: &Name, next: SType) {
        env.bind(subj, CType::Session(next));
    }

    fn proc(&mut self, env: &TyEnv, p: &Process) -> Result<Process> {
        match p {
            Process::Inact => Ok(Process::Inact),
            Process::Out { subj, payload, cont } => {
                let mut env2 = env.clone();
                let us = match env.lookup(subj)? {
                    CType::Session(s) => match s.unfold() {
                        SType::Out(us, next) => {
                            self.advance(&mut env2, subj, *next);
                            us
                        }
                        other => return Err(Self::mismatch(subj, other, "an output")),
                    },
                    CType::Chan(u) => vec![u],
                    other => return Err(Self::mismatch(subj, other, "an output")),
                };
                if us.len() != payload.len() {
                    return Err(Self::mismatch(subj, format!("{us:?}"), "this many values"));
                }
                let mut out = Vec::with_capacity(payload.len());
                for (v, u) in payload.iter().zip(&us) {
                    out.push(match (v, unpacker(u)) {
                        (Value::Name(_) | Value::Lit(_), Some((zt, _))) => self.pack(zt, v.clone()),
                        _ => self.value(env, v)?,
                    });
                }
                Ok(Process::out(subj.clone(), out, self.proc(&env2, cont)?))
            }
            Process::In { subj, binders, cont } => {
                let mut env2 = env.clone();
                let us = match env.lookup(subj)? {
                    CType::Session(s) => match s.unfold() {
                        SType::In(us, next) => {
                            self.advance(&mut env2, subj, *next);
                            us
                        }
                        other => return Err(Self::mismatch(subj, other, "an input")),
                    },
                    CType::Chan(u) => vec![u],
                    other => return Err(Self::mismatch(subj, other, "an input")),
                };
                if us.len() != binders.len() {
                    return Err(Self::mismatch(subj, format!("{us:?}"), "this many binders"));
                }
                let packed: Vec<_> = us.iter().map(unpacker).collect();
                if packed.iter().all(Option::is_none) {
                    // Abstraction passing: occurrences of the binders are variables.
                    let mut s = Subst::new();
                    for x in binders {
                        s = s.name(&Name::from_sym(x.base.clone(), x.index, false), Value::Var(x.clone()));
                    }
                    let cont = substitute(cont, &s);
                    return Ok(Process::inp(subj.clone(), binders.clone(), self.proc(&env2, &cont)?));
                }
                let [x] = binders.as_slice() else {
                    return Err(NpError::Polyadic(subj.to_string()));
                };
                let Some((st, c)) = packed[0].clone() else { unreachable!("checked above") };
                let xn = Name::from_sym(x.base.clone(), x.index, false);
                let mut env3 = env2.clone();
                env3.bind(&xn, c.clone());
                let body = self.proc(&env3, cont)?;
                let y = self.supply.fresh_var(&Var::new("y"));
                let s = self.supply.fresh_name(&Name::new("s"));
                let unpack = Value::abs(vec![(xn, c)], Linearity::Lin, body);
                let inner = Process::res(
                    s.clone(),
                    CType::Session(st.clone()),
                    Process::par(
                        Process::app(Value::Var(y.clone()), vec![Value::Name(s.clone())]),
                        Process::out(s.co(), vec![unpack], Process::Inact),
                    ),
                );
                Ok(Process::inp(subj.clone(), vec![y], inner))
            }
            Process::Sel { subj, label, cont } => {
                let mut env2 = env.clone();
                match env.session(subj)? {
                    Some(SType::Sel(cases)) => {
                        let next = cases
                            .iter()
                            .find(|(l, _)| l == label)
                            .map(|(_, s)| s.clone())
                            .ok_or_else(|| Self::mismatch(subj, SType::Sel(cases.clone()), "this label"))?;
                        self.advance(&mut env2, subj, next);
                    }
                    other => return Err(Self::mismatch(subj, format!("{other:?}"), "a selection")),
                }
                Ok(Process::Sel { subj: subj.clone(), label: label.clone(), cont: Box::new(self.proc(&env2, cont)?) })
            }
            Process::Bra { subj, cases } => {
                let Some(SType::Bra(tcases)) = env.session(subj)? else {
                    return Err(Self::mismatch(subj, "a non-branching type", "a branching"));
                };
                let mut out = Vec::with_capacity(cases.len());
                for (l, q) in cases {
                    let next = tcases
                        .iter()
                        .find(|(m, _)| m == l)
                        .map(|(_, s)| s.clone())
                        .ok_or_else(|| Self::mismatch(subj, SType::Bra(tcases.clone()), "this label"))?;
                    let mut env2 = env.clone();
                    self.advance(&mut env2, subj, next);
                    out.push((l.clone(), self.proc(&env2, q)?));
                }
                Ok(Process::Bra { subj: subj.clone(), cases: out })
            }
            Process::App { fun, args } => {
                let fun = self.value(env, fun)?;
                let args = args.iter().map(|a| self.value(env, a)).collect::<Result<_>>()?;
                Ok(Process::App { fun, args })
            }
            Process::Par(a, b) => Ok(Process::par(self.proc(env, a)?, self.proc(env, b)?)),
            Process::Res { name, ty, body } => {
                let mut env2 = env.clone();
                let plain = name.plain();
                env2.bind(&plain, ty.clone());
                if let CType::Session(s) = ty {
                    env2.bind(&plain.co(), CType::Session(dual(s)));
                }
                Ok(Process::res(plain, ty.clone(), self.proc(&env2, body)?))
            }
        }
    }
}

/// Encodes a name-passing process, parsed in name-passing mode, whose free
/// names are typed by `frees`.
pub fn encode_namepass(p: &Process, frees: &[(Name, CType)]) -> Result<Process> {
    let mut env = TyEnv::default();
    for (n, c) in frees {
        env.bind(n, c.clone());
    }
    let mut enc = Encoder { supply: Supply::above(&[p], &[]) };
    Ok(barendregt(&enc.proc(&env, p)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::alpha_eq;
    use crate::parse::{parse_file, parse_process, Mode};

    #[test]
    fn inaction_is_unchanged() {
        assert!(alpha_eq(&encode_namepass(&Process::Inact, &[]).unwrap(), &Process::Inact));
    }

    #[test]
    fn output_of_a_name_is_packed() {
        let f = parse_file("free n : !<!<Int>;end>;end; free m : !<Int>;end; n!(m).0", Mode::NamePassing).unwrap();
        let got = encode_namepass(&f.process, &f.frees).unwrap();
        let want =
            parse_process("n!(\\lin(z: ?<lin(!<lin(?<lin(Int)>;end)>;end)>;end) -> z?(x).apply x (m)).0", Mode::User)
                .unwrap();
        assert!(alpha_eq(&got, &want), "{got}");
    }

    #[test]
    fn input_of_a_name_is_unpacked() {
        let f = parse_file("free n : ?<!<Int>;end>;end; n?(x).x!(1).0", Mode::NamePassing).unwrap();
        let got = encode_namepass(&f.process, &f.frees).unwrap();
        let want = parse_process(
            "n?(y).new s : ?<lin(!<lin(?<lin(Int)>;end)>;end)>;end in \
             (apply y (s) | ~s!(\\lin(x: !<lin(?<lin(Int)>;end)>;end) -> x!(\\lin(z: ?<lin(Int)>;end) -> z?(w).apply w (1)).0).0)",
            Mode::User,
        )
        .unwrap();
        assert!(alpha_eq(&got, &want), "{got}");
    }
}
