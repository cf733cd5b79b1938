//! Printing of processes in the surface syntax accepted by [`crate::parse`].

use std::fmt::{self, Write};

use crate::ast::{Abs, Linearity, Process, Value};

/// Renders a process on one line.
pub fn process_to_string(p: &Process) -> String {
    let mut s = String::new();
    write_proc(&mut s, p, true).expect("writing to a String cannot fail");
    s
}

pub fn value_to_string(v: &Value) -> String {
    let mut s = String::new();
    write_value(&mut s, v).expect("writing to a String cannot fail");
    s
}

fn write_list(out: &mut String, vs: &[Value]) -> fmt::Result {
    out.push('(');
    for (i, v) in vs.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_value(out, v)?;
    }
    out.push(')');
    Ok(())
}

fn write_value(out: &mut String, v: &Value) -> fmt::Result {
    match v {
        Value::Name(n) => write!(out, "{n}"),
        Value::Var(x) => write!(out, "{x}"),
        Value::Lit(l) => write!(out, "{l}"),
        Value::Abs(a) => write_abs(out, a),
    }
}

fn write_abs(out: &mut String, a: &Abs) -> fmt::Result {
    out.push_str(match a.lin {
        Linearity::Lin => "\\lin(",
        Linearity::Sh => "\\un(",
    });
    for (i, (n, c)) in a.params.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write!(out, "{n}: {c}")?;
    }
    out.push_str(") -> ");
    write_proc(out, &a.body, true)
}

/// Writes a continuation: parallel compositions are parenthesised.
fn write_cont(out: &mut String, p: &Process, tail: bool) -> fmt::Result {
    match p {
        Process::Inact => Ok(()),
        Process::Par(..) => {
            out.push_str(".(");
            write_proc(out, p, true)?;
            out.push(')');
            Ok(())
        }
        _ => {
            out.push('.');
            write_proc(out, p, tail)
        }
    }
}

/// `tail` is true when nothing follows at the same nesting level, so a
/// restriction may extend to the right without parentheses.
fn write_proc(out: &mut String, p: &Process, tail: bool) -> fmt::Result {
    match p {
        Process::Inact => {
            out.push('0');
            Ok(())
        }
        Process::Out { subj, payload, cont } => {
            write!(out, "{subj}!")?;
            write_list(out, payload)?;
            write_cont(out, cont, tail)
        }
        Process::In { subj, binders, cont } => {
            write!(out, "{subj}?(")?;
            for (i, x) in binders.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write!(out, "{x}")?;
            }
            out.push(')');
            write_cont(out, cont, tail)
        }
        Process::Sel { subj, label, cont } => {
            write!(out, "select {subj} {label}")?;
            write_cont(out, cont, tail)
        }
        Process::Bra { subj, cases } => {
            write!(out, "branch {subj} {{ ")?;
            for (i, (l, q)) in cases.iter().enumerate() {
                if i > 0 {
                    out.push_str("; ");
                }
                write!(out, "{l}: ")?;
                write_proc(out, q, true)?;
            }
            out.push_str(" }");
            Ok(())
        }
        Process::App { fun, args } => {
            out.push_str("apply ");
            match fun {
                Value::Abs(_) => {
                    out.push('(');
                    write_value(out, fun)?;
                    out.push(')');
                }
                _ => write_value(out, fun)?,
            }
            out.push(' ');
            write_list(out, args)
        }
        Process::Par(a, b) => {
            if matches!(**a, Process::Par(..)) {
                out.push('(');
                write_proc(out, a, true)?;
                out.push(')');
            } else {
                write_proc(out, a, false)?;
            }
            out.push_str(" | ");
            write_proc(out, b, tail)
        }
        Process::Res { name, ty, body } => {
            if !tail {
                out.push('(');
            }
            write!(out, "new {name} : {ty} in ")?;
            write_proc(out, body, true)?;
            if !tail {
                out.push(')');
            }
            Ok(())
        }
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&process_to_string(self))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&value_to_string(self))
    }
}

#[cfg(test)]
mod tests {
    use crate::parse::{parse_process, Mode};

    fn roundtrip(src: &str) {
        let p = parse_process(src, Mode::Internal).unwrap();
        let printed = p.to_string();
        let q = parse_process(&printed, Mode::Internal).unwrap();
        assert_eq!(p, q, "{src} printed as {printed}");
    }

    #[test]
    fn printing_reparses() {
        roundtrip("a!(\\lin(x: end) -> 0).b?(y).apply y (c)");
        roundtrip("(new s : !<Int>;end in s!(1)) | ~s?(x).0");
        roundtrip("a?(x).(b!(x) | c!(x))");
        roundtrip("branch u { add: u!(1); sub: new t : end in 0 }");
        roundtrip("select ~u add.~u?(x).apply x (16, 26)");
        roundtrip("#1?(x).#'2_3!(#rec:a).0");
    }
}
