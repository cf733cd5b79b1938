//! Surface syntax for processes and types.
//!
//! ```text
//! file    ::= item* process
//! item    ::= "type" X "=" type ";" | "free" ["~"] n ":" ctype ";" | "expect" "degree" N ";"
//! process ::= atom ("|" atom)*
//! atom    ::= "0" | u "!" "(" value,* ")" ["." atom] | u "?" "(" x,* ")" ["." atom]
//!           | "select" u l ["." atom] | "branch" u "{" (l ":" process);* "}"
//!           | "apply" head "(" value,* ")" | "new" n ":" ctype "in" process | "(" process ")"
//! value   ::= name | var | int | "true" | "false" | "\lin(" (n ":" ctype),* ")" "->" process
//!           | "\un(" … ")" "->" process | "(" value ")"
//! ```
//! Names may be written `~n` for the dual endpoint and `n_3` for an indexed name.
//! In internal mode identifiers may also start with `#` and contain `'`, `:` and `~`.

use std::collections::HashMap;

use thiserror::Error;

use crate::ast::{barendregt, sym, Abs, Linearity, Lit, Name, Process, Sym, Value, Var};
use crate::types::{validate_c, BaseTy, CType, SType, TypeError, VType};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at {line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

/// Which dialect is parsed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Source processes; reserved identifiers are rejected.
    User,
    /// Decomposition output; reserved identifiers are accepted.
    Internal,
    /// Source processes with first-order name passing. Input binders are
    /// names, and every payload type that is not an abstraction type is
    /// read as the type of its packed form (see [`crate::np`]).
    NamePassing,
}

/// A parsed source file.
#[derive(Clone, Debug)]
pub struct SourceFile {
    pub frees: Vec<(Name, CType)>,
    pub expect_degree: Option<usize>,
    pub process: Process,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

const SYMBOLS: [&str; 20] =
    ["->", "!", "?", ".", ",", "(", ")", "{", "}", "<", ">", ";", ":", "|", "~", "\\", "+", "&", "=", "-"];

fn lex(src: &str, mode: Mode) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: String| ParseError { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (l0, c0) = (line, col);
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let n = text.parse::<i64>().map_err(|e| err(l0, c0, e.to_string()))?;
            col += i - start;
            out.push((Tok::Int(n), l0, c0));
            continue;
        }
        let reserved_start = c == '#';
        if c.is_ascii_alphabetic() || reserved_start {
            if reserved_start && mode != Mode::Internal {
                return Err(err(l0, c0, "identifiers starting with `#` are reserved".into()));
            }
            let start = i;
            i += 1;
            while i < chars.len() {
                let d = chars[i];
                let ok = d.is_ascii_alphanumeric()
                    || d == '_'
                    || (mode == Mode::Internal
                        && (d == '\''
                            || (reserved_start
                                && (d == ':' || d == '~')
                                && chars.get(i + 1).is_some_and(|e| e.is_ascii_alphanumeric() || *e == '~'))));
                if !ok {
                    break;
                }
                i += 1;
            }
            if mode != Mode::Internal && i < chars.len() && chars[i] == '\'' {
                return Err(err(line, col + (i - start), "`'` is reserved for generated names".into()));
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            out.push((Tok::Ident(text), l0, c0));
            continue;
        }
        let mut matched = None;
        for s in SYMBOLS {
            let sc: Vec<char> = s.chars().collect();
            if chars[i..].starts_with(&sc) {
                matched = Some(s);
                break;
            }
        }
        match matched {
            Some(s) => {
                i += s.len();
                col += s.len();
                out.push((Tok::Sym(s), l0, c0));
            }
            None => return Err(err(l0, c0, format!("unexpected character `{c}`"))),
        }
    }
    out.push((Tok::Eof, line, col));
    Ok(out)
}

/// Splits `base_N` into the base and the index N; `#N` denotes propagator N.
pub fn split_ident(text: &str) -> (String, Option<u32>) {
    if let Some(rest) = text.strip_prefix('#') {
        if !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit()) {
            return ("#".into(), rest.parse().ok());
        }
    }
    if let Some(pos) = text.rfind('_') {
        let digits = &text[pos + 1..];
        if pos > 0 && !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
            if let Ok(n) = digits.parse() {
                return (text[..pos].to_string(), Some(n));
            }
        }
    }
    (text.to_string(), None)
}

const KEYWORDS: [&str; 17] = [
    "new", "in", "select", "branch", "apply", "rec", "chan", "lin", "un", "end", "Int", "Bool", "true", "false",
    "type", "free", "expect",
];

#[derive(Clone, Debug)]
enum Ty {
    Session(SType),
    Value(VType),
    Chan(VType),
    Base(BaseTy),
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    aliases: HashMap<String, Ty>,
    /// Input-bound variables in scope, innermost last.
    vars: Vec<(Sym, Option<u32>)>,
    mode: Mode,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }
    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }
    fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let (_, line, col) = self.toks[self.pos];
        Err(ParseError { line, col, msg: msg.into() })
    }
    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }
    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == k)
    }
    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }
    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(format!("expected `{s}`, found {}", describe(self.peek())))
        }
    }
    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.is_kw(k) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected `{k}`, found {}", describe(self.peek())))
        }
    }
    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            other => self.error(format!("expected identifier, found {}", describe(&other))),
        }
    }
    fn name(&mut self) -> PResult<Name> {
        let dual = self.eat_sym("~");
        let id = self.ident()?;
        let (base, index) = split_ident(&id);
        Ok(Name::from_sym(sym(&base), index, dual))
    }

    // ----- types -----

    fn ty(&mut self) -> PResult<Ty> {
        match self.peek().clone() {
            Tok::Sym("!") | Tok::Sym("?") => {
                let out = self.is_sym("!");
                self.bump();
                self.expect_sym("<")?;
                let mut us = Vec::new();
                if !self.is_sym(">") {
                    loop {
                        us.push(self.vtype()?);
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                }
                self.expect_sym(">")?;
                self.expect_sym(";")?;
                let k = self.stype()?;
                Ok(Ty::Session(if out { SType::Out(us, Box::new(k)) } else { SType::In(us, Box::new(k)) }))
            }
            Tok::Sym("+") | Tok::Sym("&") => {
                let sel = self.is_sym("+");
                self.bump();
                self.expect_sym("{")?;
                let mut cases: Vec<(Sym, SType)> = Vec::new();
                loop {
                    let l = self.ident()?;
                    if cases.iter().any(|(m, _)| **m == *l) {
                        return self.error(format!("duplicate label `{l}`"));
                    }
                    self.expect_sym(":")?;
                    let k = self.stype()?;
                    cases.push((sym(&l), k));
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym("}")?;
                Ok(Ty::Session(if sel { SType::Sel(cases) } else { SType::Bra(cases) }))
            }
            Tok::Sym("(") => {
                self.bump();
                let t = self.ty()?;
                self.expect_sym(")")?;
                Ok(t)
            }
            Tok::Ident(k) => match k.as_str() {
                "end" => {
                    self.bump();
                    Ok(Ty::Session(SType::End))
                }
                "rec" => {
                    self.bump();
                    let t = self.ident()?;
                    self.expect_sym(".")?;
                    let shadow = self.aliases.remove(&t);
                    let body = self.stype();
                    if let Some(a) = shadow {
                        self.aliases.insert(t.clone(), a);
                    }
                    Ok(Ty::Session(SType::Rec(sym(&t), Box::new(body?))))
                }
                "chan" => {
                    self.bump();
                    Ok(Ty::Chan(self.vtype()?))
                }
                "lin" | "un" => {
                    let lin = k == "lin";
                    self.bump();
                    self.expect_sym("(")?;
                    let mut cs = Vec::new();
                    if !self.is_sym(")") {
                        loop {
                            cs.push(self.ctype()?);
                            if !self.eat_sym(",") {
                                break;
                            }
                        }
                    }
                    self.expect_sym(")")?;
                    Ok(Ty::Value(if lin { VType::Lin(cs) } else { VType::Sh(cs) }))
                }
                "Int" => {
                    self.bump();
                    Ok(Ty::Base(BaseTy::Int))
                }
                "Bool" => {
                    self.bump();
                    Ok(Ty::Base(BaseTy::Bool))
                }
                _ => {
                    let id = self.ident()?;
                    match self.aliases.get(&id) {
                        Some(t) => Ok(t.clone()),
                        None => Ok(Ty::Session(SType::TVar(sym(&id)))),
                    }
                }
            },
            other => self.error(format!("expected a type, found {}", describe(&other))),
        }
    }
    fn stype(&mut self) -> PResult<SType> {
        match self.ty()? {
            Ty::Session(s) => Ok(s),
            _ => self.error("expected a session type"),
        }
    }
    fn vtype(&mut self) -> PResult<VType> {
        match self.ty()? {
            Ty::Value(u) => Ok(u),
            Ty::Session(s) if self.mode == Mode::NamePassing => Ok(packed_type(CType::Session(s))),
            Ty::Chan(u) if self.mode == Mode::NamePassing => Ok(packed_type(CType::Chan(u))),
            Ty::Base(b) if self.mode == Mode::NamePassing => Ok(packed_type(CType::Base(b))),
            Ty::Base(b) => Ok(VType::Base(b)),
            _ => self.error("expected a value type (lin(..), un(..) or a base type)"),
        }
    }
    fn ctype(&mut self) -> PResult<CType> {
        match self.ty()? {
            Ty::Session(s) => Ok(CType::Session(s)),
            Ty::Chan(u) => Ok(CType::Chan(u)),
            Ty::Base(b) => Ok(CType::Base(b)),
            Ty::Value(_) => self.error("an arrow type is not a name type; use `chan` for shared names"),
        }
    }
    fn checked_ctype(&mut self) -> PResult<CType> {
        let c = self.ctype()?;
        if let Err(e) = validate_c(&c) {
            return self.error(type_msg(e));
        }
        Ok(c)
    }

    // ----- values -----

    fn lookup_var(&self, base: &str, index: Option<u32>) -> bool {
        self.vars.iter().rev().any(|(b, i)| &**b == base && *i == index)
    }

    fn value(&mut self) -> PResult<Value> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Value::Lit(Lit::Int(n)))
            }
            Tok::Sym("-") => {
                self.bump();
                match self.bump() {
                    Tok::Int(n) => Ok(Value::Lit(Lit::Int(-n))),
                    _ => self.error("expected an integer after `-`"),
                }
            }
            Tok::Ident(k) if k == "true" || k == "false" => {
                self.bump();
                Ok(Value::Lit(Lit::Bool(k == "true")))
            }
            Tok::Sym("\\") => self.abs(),
            Tok::Sym("(") => {
                self.bump();
                let v = self.value()?;
                self.expect_sym(")")?;
                Ok(v)
            }
            Tok::Sym("~") => Ok(Value::Name(self.name()?)),
            Tok::Ident(_) => {
                let id = self.ident()?;
                let (base, index) = split_ident(&id);
                if self.lookup_var(&base, index) {
                    Ok(Value::Var(Var { base: sym(&base), index }))
                } else {
                    Ok(Value::Name(Name::from_sym(sym(&base), index, false)))
                }
            }
            other => self.error(format!("expected a value, found {}", describe(&other))),
        }
    }

    fn abs(&mut self) -> PResult<Value> {
        self.expect_sym("\\")?;
        let lin = if self.is_kw("lin") {
            Linearity::Lin
        } else if self.is_kw("un") {
            Linearity::Sh
        } else {
            return self.error("expected `lin` or `un` after `\\`");
        };
        self.bump();
        self.expect_sym("(")?;
        let mut params = Vec::new();
        if !self.is_sym(")") {
            loop {
                let n = self.name()?;
                if n.dual {
                    return self.error("abstraction parameters cannot be dual endpoints");
                }
                self.expect_sym(":")?;
                let c = self.checked_ctype()?;
                params.push((n, c));
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        self.expect_sym("->")?;
        // Parameters shadow input-bound variables of the same spelling.
        let saved = self.vars.clone();
        self.vars.retain(|(b, i)| !params.iter().any(|(p, _)| p.base == *b && p.index == *i));
        let body = self.process();
        self.vars = saved;
        Ok(Value::Abs(Box::new(Abs { params, lin, body: body? })))
    }

    fn values_in_parens(&mut self) -> PResult<Vec<Value>> {
        self.expect_sym("(")?;
        let mut vs = Vec::new();
        if !self.is_sym(")") {
            loop {
                vs.push(self.value()?);
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        Ok(vs)
    }

    // ----- processes -----

    fn process(&mut self) -> PResult<Process> {
        let mut parts = vec![self.atom()?];
        while self.eat_sym("|") {
            parts.push(self.atom()?);
        }
        Ok(Process::par_all(parts))
    }

    fn continuation(&mut self) -> PResult<Process> {
        if self.eat_sym(".") {
            self.atom()
        } else {
            Ok(Process::Inact)
        }
    }

    fn atom(&mut self) -> PResult<Process> {
        match self.peek().clone() {
            Tok::Int(0) => {
                self.bump();
                Ok(Process::Inact)
            }
            Tok::Sym("(") => {
                self.bump();
                let p = self.process()?;
                self.expect_sym(")")?;
                Ok(p)
            }
            Tok::Ident(k) if k == "new" => {
                self.bump();
                let n = self.name()?;
                if n.dual {
                    return self.error("restrict the name, not its dual endpoint");
                }
                self.expect_sym(":")?;
                let c = self.checked_ctype()?;
                self.expect_kw("in")?;
                let body = self.process()?;
                Ok(Process::res(n, c, body))
            }
            Tok::Ident(k) if k == "select" => {
                self.bump();
                let u = self.name()?;
                let l = self.ident()?;
                let cont = self.continuation()?;
                Ok(Process::Sel { subj: u, label: sym(&l), cont: Box::new(cont) })
            }
            Tok::Ident(k) if k == "branch" => {
                self.bump();
                let u = self.name()?;
                self.expect_sym("{")?;
                let mut cases: Vec<(Sym, Process)> = Vec::new();
                loop {
                    let l = self.ident()?;
                    if cases.iter().any(|(m, _)| **m == *l) {
                        return self.error(format!("duplicate label `{l}`"));
                    }
                    self.expect_sym(":")?;
                    let p = self.process()?;
                    cases.push((sym(&l), p));
                    if !self.eat_sym(";") || self.is_sym("}") {
                        break;
                    }
                }
                self.expect_sym("}")?;
                Ok(Process::Bra { subj: u, cases })
            }
            Tok::Ident(k) if k == "apply" => {
                self.bump();
                let fun = match self.peek() {
                    Tok::Sym("(") => {
                        self.bump();
                        let v = self.value()?;
                        self.expect_sym(")")?;
                        v
                    }
                    _ => self.value()?,
                };
                if matches!(fun, Value::Lit(_)) {
                    return self.error("a literal cannot be applied");
                }
                let args = self.values_in_parens()?;
                Ok(Process::App { fun, args })
            }
            Tok::Ident(_) | Tok::Sym("~") => {
                let u = self.name()?;
                if self.lookup_var(&u.base, u.index) {
                    return self.error(format!("`{u}` is a value variable and cannot be a channel subject"));
                }
                if self.eat_sym("!") {
                    let payload = self.values_in_parens()?;
                    let cont = self.continuation()?;
                    Ok(Process::Out { subj: u, payload, cont: Box::new(cont) })
                } else if self.eat_sym("?") {
                    self.expect_sym("(")?;
                    let mut binders = Vec::new();
                    if !self.is_sym(")") {
                        loop {
                            let id = self.ident()?;
                            let (base, index) = split_ident(&id);
                            binders.push(Var { base: sym(&base), index });
                            if !self.eat_sym(",") {
                                break;
                            }
                        }
                    }
                    self.expect_sym(")")?;
                    let depth = self.vars.len();
                    if self.mode != Mode::NamePassing {
                        self.vars.extend(binders.iter().map(|x| (x.base.clone(), x.index)));
                    }
                    let cont = self.continuation();
                    self.vars.truncate(depth);
                    Ok(Process::In { subj: u, binders, cont: Box::new(cont?) })
                } else {
                    self.error(format!("expected `!` or `?` after `{u}`"))
                }
            }
            other => self.error(format!("expected a process, found {}", describe(&other))),
        }
    }

    fn file(&mut self) -> PResult<SourceFile> {
        let mut frees = Vec::new();
        let mut expect_degree = None;
        loop {
            if self.is_kw("type") {
                self.bump();
                let x = self.ident()?;
                self.expect_sym("=")?;
                let t = self.ty()?;
                self.expect_sym(";")?;
                self.aliases.insert(x, t);
            } else if self.is_kw("free") {
                self.bump();
                let n = self.name()?;
                self.expect_sym(":")?;
                let c = self.checked_ctype()?;
                self.expect_sym(";")?;
                frees.push((n, c));
            } else if self.is_kw("expect") {
                self.bump();
                let what = self.ident()?;
                if what != "degree" {
                    return self.error(format!("unknown expectation `{what}`"));
                }
                let n = match self.bump() {
                    Tok::Int(n) if n >= 0 => n as usize,
                    _ => return self.error("expected a degree"),
                };
                self.expect_sym(";")?;
                expect_degree = Some(n);
            } else {
                break;
            }
        }
        let process = self.process()?;
        if self.peek() != &Tok::Eof {
            return self.error(format!("unexpected {} after process", describe(self.peek())));
        }
        Ok(SourceFile { frees, expect_degree, process })
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(n) => format!("`{n}`"),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Eof => "end of input".into(),
    }
}

/// `lin(?<lin(C)>;end)`: the type of an abstraction that packs a value of type `C`.
pub fn packed_type(c: CType) -> VType {
    VType::Lin(vec![CType::Session(SType::In(vec![VType::Lin(vec![c])], Box::new(SType::End)))])
}

fn type_msg(e: TypeError) -> String {
    e.to_string()
}

fn parser(src: &str, mode: Mode) -> PResult<Parser> {
    Ok(Parser { toks: lex(src, mode)?, pos: 0, aliases: HashMap::new(), vars: Vec::new(), mode })
}

/// Parses a source file; binders that clash with other binders or with
/// free names are renamed apart.
pub fn parse_file(src: &str, mode: Mode) -> PResult<SourceFile> {
    let mut p = parser(src, mode)?;
    let mut f = p.file()?;
    if mode != Mode::NamePassing {
        f.process = barendregt(&f.process);
    }
    Ok(f)
}

/// Parses a process without renaming binders.
pub fn parse_process(src: &str, mode: Mode) -> PResult<Process> {
    let mut p = parser(src, mode)?;
    let proc_ = p.process()?;
    if p.peek() != &Tok::Eof {
        return p.error(format!("unexpected {} after process", describe(p.peek())));
    }
    Ok(proc_)
}

/// Parses a value without renaming binders.
pub fn parse_value(src: &str, mode: Mode) -> PResult<Value> {
    let mut p = parser(src, mode)?;
    let v = p.value()?;
    if p.peek() != &Tok::Eof {
        return p.error(format!("unexpected {} after value", describe(p.peek())));
    }
    Ok(v)
}

/// Parses a name type.
pub fn parse_ctype(src: &str) -> PResult<CType> {
    let mut p = parser(src, Mode::Internal)?;
    let c = p.checked_ctype()?;
    if p.peek() != &Tok::Eof {
        return p.error("trailing input after type");
    }
    Ok(c)
}

/// Parses a session type.
pub fn parse_stype(src: &str) -> PResult<SType> {
    match parse_ctype(src)? {
        CType::Session(s) => Ok(s),
        _ => Err(ParseError { line: 1, col: 1, msg: "expected a session type".into() }),
    }
}

/// Parses a value type.
pub fn parse_vtype(src: &str) -> PResult<VType> {
    let mut p = parser(src, Mode::Internal)?;
    let u = p.vtype()?;
    if p.peek() != &Tok::Eof {
        return p.error("trailing input after type");
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_indices() {
        assert_eq!(split_ident("s_1"), ("s".into(), Some(1)));
        assert_eq!(split_ident("x_a_2"), ("x_a".into(), Some(2)));
        assert_eq!(split_ident("#12"), ("#".into(), Some(12)));
        assert_eq!(split_ident("#'5_3"), ("#'5".into(), Some(3)));
        assert_eq!(split_ident("x_a"), ("x_a".into(), None));
    }

    #[test]
    fn user_mode_rejects_reserved() {
        assert!(parse_process("#1!().0", Mode::User).is_err());
        assert!(parse_process("s'1!().0", Mode::User).is_err());
        assert!(parse_process("#1!().0", Mode::Internal).is_ok());
    }

    #[test]
    fn variables_and_names_are_distinguished() {
        let p = parse_process("a?(x).b!(x, y).0", Mode::User).unwrap();
        match p {
            Process::In { cont, .. } => match *cont {
                Process::Out { payload, .. } => {
                    assert!(matches!(payload[0], Value::Var(_)));
                    assert!(matches!(payload[1], Value::Name(_)));
                }
                _ => panic!(),
            },
            _ => panic!(),
        }
    }

    #[test]
    fn restriction_extends_to_the_right() {
        let p = parse_process("new s : end in 0 | 0", Mode::User).unwrap();
        assert!(matches!(p, Process::Res { .. }));
    }

    #[test]
    fn type_aliases_and_recursion() {
        let f = parse_file("type A = rec t. ?<Int>;!<Int>;t; free a : A; a?(m).0", Mode::User).unwrap();
        assert_eq!(f.frees[0].1.to_string(), "rec t. ?<Int>;!<Int>;t");
    }
}
