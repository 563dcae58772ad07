//! Code as expression trees.

use std::rc::Rc;

use crate::ast::{Comb, SourceExpr};
use crate::engine::{Session, Value};

use super::CodeValue;

fn tree(c: &CodeValue) -> SourceExpr {
    match c {
        CodeValue::Quote(e) => (**e).clone(),
        _ => unreachable!("quote backend receives only trees"),
    }
}

/// A literal when the value has one; otherwise a reference to the value,
/// kept alive by the session.
pub(super) fn csp(session: &mut Session, v: Value) -> CodeValue {
    let e = v
        .to_literal()
        .unwrap_or_else(|| SourceExpr::Persisted(session.persist(v)));
    CodeValue::Quote(Rc::new(e))
}

pub(super) fn build(c: Comb, args: &[CodeValue]) -> CodeValue {
    let a = |i: usize| tree(&args[i]);
    let e = match c {
        Comb::Add => SourceExpr::add(a(0), a(1)),
        Comb::Cons => SourceExpr::cons(a(0), a(1)),
        Comb::Pair => SourceExpr::pair(a(0), a(1)),
        Comb::App => SourceExpr::app(a(0), a(1)),
        Comb::Nil => SourceExpr::Nil,
        Comb::RefNew => SourceExpr::ref_new(a(0)),
        Comb::RefGet => SourceExpr::ref_get(a(0)),
        Comb::Rset => SourceExpr::rset(a(0), a(1)),
        other => unreachable!("{other} is not a code-only combinator"),
    };
    CodeValue::Quote(Rc::new(e))
}
