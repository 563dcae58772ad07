//! Code as program text. Every fragment renders exactly as the pretty printer
//! renders the corresponding tree.

use std::rc::Rc;

use crate::ast::pretty::{at, Prec};
use crate::ast::{pretty, Comb, SourceExpr};
use crate::diag::{DiagKind, Diagnostic};
use crate::engine::Value;

use super::CodeValue;

fn code(text: String, prec: Prec) -> CodeValue {
    CodeValue::Str { text: Rc::from(text), prec }
}

fn part(c: &CodeValue, want: Prec) -> String {
    match c {
        CodeValue::Str { text, prec } => at(text.to_string(), *prec, want),
        _ => unreachable!("string backend receives only text"),
    }
}

/// Text of a variable or literal.
pub(super) fn literal(e: &SourceExpr) -> CodeValue {
    code(pretty(e), Prec::Atom)
}

/// Only values with a literal form can be written into program text.
pub(super) fn csp(v: &Value) -> Result<CodeValue, Diagnostic> {
    match v.to_literal() {
        Some(e) => Ok(literal(&e)),
        None => Err(Diagnostic::new(
            DiagKind::CspSerialization,
            format!("a {} value cannot be written into generated text", v.tag()),
        )),
    }
}

pub(super) fn lam(x: &str, body: &str, prec: Prec) -> CodeValue {
    code(format!("fun {x} -> {}", at(body.to_string(), prec, Prec::Top)), Prec::Top)
}

pub(super) fn let_(x: &str, rhs: (&str, Prec), body: (&str, Prec)) -> CodeValue {
    code(
        format!(
            "let {x} = {} in {}",
            at(rhs.0.to_string(), rhs.1, Prec::Top),
            at(body.0.to_string(), body.1, Prec::Top)
        ),
        Prec::Top,
    )
}

/// Combinators whose arguments are all code.
pub(super) fn build(c: Comb, args: &[CodeValue]) -> CodeValue {
    let a = |i: usize, want: Prec| part(&args[i], want);
    match c {
        Comb::Add => code(format!("({} + {})", a(0, Prec::App), a(1, Prec::App)), Prec::Atom),
        Comb::Cons => code(format!("({} :: {})", a(0, Prec::App), a(1, Prec::App)), Prec::Atom),
        Comb::Pair => code(format!("({}, {})", a(0, Prec::Top), a(1, Prec::Top)), Prec::Atom),
        Comb::App => code(format!("{} {}", a(0, Prec::App), a(1, Prec::Atom)), Prec::App),
        Comb::Nil => code("[]".into(), Prec::Atom),
        Comb::RefNew => code(format!("ref {}", a(0, Prec::Atom)), Prec::App),
        Comb::RefGet => code(format!("!{}", a(0, Prec::Atom)), Prec::Atom),
        Comb::Rset => code(format!("rset {} {}", a(0, Prec::Atom), a(1, Prec::Atom)), Prec::App),
        other => unreachable!("{other} is not a code-only combinator"),
    }
}
