//! Code as delayed computation. A generated function's parameter is a
//! dynamic variable: its code reads the variable, and the function value
//! made when the code is forced binds it around each call, in the dynamic
//! environment current at forcing time.

use std::cell::RefCell;
use std::rc::Rc;

use crate::ast::Comb;
use crate::diag::Diagnostic;
use crate::engine::{rset_runtime, DVar, DynClosure, Session, VList, Value};

use super::CodeValue;

#[derive(Debug)]
pub enum Thunk {
    Const(Value),
    DRef(DVar),
    Lam { dvar: DVar, body: Rc<Thunk> },
    Let { dvar: DVar, rhs: Rc<Thunk>, body: Rc<Thunk> },
    App(Rc<Thunk>, Rc<Thunk>),
    Add(Rc<Thunk>, Rc<Thunk>),
    Pair(Rc<Thunk>, Rc<Thunk>),
    Nil,
    Cons(Rc<Thunk>, Rc<Thunk>),
    RefNew(Rc<Thunk>),
    RefGet(Rc<Thunk>),
    Rset(Rc<Thunk>, Rc<Thunk>),
}

fn thunk(c: &CodeValue) -> Rc<Thunk> {
    match c {
        CodeValue::Eval(t) => t.clone(),
        _ => unreachable!("eval backend receives only thunks"),
    }
}

pub(super) fn build(c: Comb, args: &[CodeValue]) -> CodeValue {
    let a = |i: usize| thunk(&args[i]);
    let t = match c {
        Comb::Add => Thunk::Add(a(0), a(1)),
        Comb::Cons => Thunk::Cons(a(0), a(1)),
        Comb::Pair => Thunk::Pair(a(0), a(1)),
        Comb::App => Thunk::App(a(0), a(1)),
        Comb::Nil => Thunk::Nil,
        Comb::RefNew => Thunk::RefNew(a(0)),
        Comb::RefGet => Thunk::RefGet(a(0)),
        Comb::Rset => Thunk::Rset(a(0), a(1)),
        other => unreachable!("{other} is not a code-only combinator"),
    };
    CodeValue::Eval(Rc::new(t))
}

/// Runs the code. Operands are forced right to left, as the host evaluates
/// them.
pub fn force(s: &mut Session, t: &Thunk) -> Result<Value, Diagnostic> {
    Ok(match t {
        Thunk::Const(v) => v.clone(),
        Thunk::DRef(d) => s.dref(*d)?,
        Thunk::Lam { dvar, body } => Value::DynClosure(Rc::new(DynClosure {
            denv: s.denv_get(),
            dvar: *dvar,
            body: body.clone(),
        })),
        Thunk::Let { dvar, rhs, body } => {
            let v = force(s, rhs)?;
            let denv = s.denv_get();
            s.dlet(&denv, *dvar, v, |s| force(s, body))?
        }
        Thunk::App(f, x) => {
            let x = force(s, x)?;
            let f = force(s, f)?;
            s.apply(f, x)?
        }
        Thunk::Add(a, b) => {
            let b = force(s, b)?;
            match (force(s, a)?, b) {
                (Value::Int(a), Value::Int(b)) => Value::Int(a.wrapping_add(b)),
                (a, b) => {
                    return Err(Diagnostic::runtime(format!("int expected, got {} + {}", a.tag(), b.tag())))
                }
            }
        }
        Thunk::Pair(a, b) => {
            let b = force(s, b)?;
            Value::pair(force(s, a)?, b)
        }
        Thunk::Nil => Value::List(VList::nil()),
        Thunk::Cons(a, b) => {
            let b = force(s, b)?;
            let a = force(s, a)?;
            match b {
                Value::List(tail) => Value::List(VList::cons(a, tail)),
                other => return Err(Diagnostic::runtime(format!("list expected, got {}", other.tag()))),
            }
        }
        Thunk::RefNew(a) => Value::Ref(Rc::new(RefCell::new(force(s, a)?))),
        Thunk::RefGet(a) => match force(s, a)? {
            Value::Ref(r) => r.borrow().clone(),
            other => return Err(Diagnostic::runtime(format!("reference expected, got {}", other.tag()))),
        },
        Thunk::Rset(r, v) => {
            let v = force(s, v)?;
            let r = force(s, r)?;
            Value::List(rset_runtime(&r, v)?)
        }
    })
}
