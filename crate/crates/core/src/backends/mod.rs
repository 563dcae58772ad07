//! Interpretations of the code combinators.
//!
//! Each session picks one backend, and every code value it builds has that
//! backend's representation. Let-insertion captures the continuation up to
//! the scope's prompt, so a `genlet` inside `lam` bodies places its binding
//! above them.

pub mod eval;
mod quote;
mod string;

use std::cell::RefCell;
use std::rc::Rc;

use crate::ast::{free_vars, pretty::Prec, Comb, SourceExpr};
use crate::diag::{DiagKind, Diagnostic};
use crate::engine::{Backend, Ctl, DVar, Frame, Machine, ScopeVal, Value};

pub use eval::Thunk;

/// A generated piece of code.
#[derive(Clone, Debug)]
pub enum CodeValue {
    /// Program text and the precedence of its outermost form.
    Str { text: Rc<str>, prec: Prec },
    /// A staging-free expression tree.
    Quote(Rc<SourceExpr>),
    /// A computation producing the value of the code when forced.
    Eval(Rc<Thunk>),
}

impl CodeValue {
    fn backend(&self) -> Backend {
        match self {
            CodeValue::Str { .. } => Backend::String,
            CodeValue::Quote(_) => Backend::Quote,
            CodeValue::Eval(_) => Backend::Eval,
        }
    }
}

#[derive(Clone, Debug)]
pub enum LamVar {
    Named(String),
    Dynamic(DVar),
}

/// Backend work pending on the machine stack.
#[derive(Clone)]
pub enum BackendFrame {
    /// Waiting for a `lam` body.
    Lam(LamVar),
    /// Waiting for the code under an inserted `let`.
    Let { var: LamVar, rhs: CodeValue },
    /// Waiting for `lam body`, to be let-inserted into `scope`.
    GenletAfterLam(Rc<ScopeVal>),
    /// Waiting for the code to record in `scope`'s memo.
    MemoStore(Rc<ScopeVal>),
}

fn code_arg(m: &Machine<'_>, v: &Value) -> Result<CodeValue, Diagnostic> {
    match v {
        Value::Code(c) if c.backend() == m.session.backend => Ok(c.clone()),
        Value::Code(c) => Err(Diagnostic::runtime(format!(
            "{:?} code passed to the {:?} backend",
            c.backend(),
            m.session.backend
        ))),
        other => Err(Diagnostic::runtime(format!("code expected, got {}", other.tag()))),
    }
}

fn scope_arg(v: &Value) -> Result<Rc<ScopeVal>, Diagnostic> {
    match v {
        Value::Scope(s) => Ok(s.clone()),
        other => Err(Diagnostic::runtime(format!("scope expected, got {}", other.tag()))),
    }
}

fn ret(c: CodeValue) -> Result<Ctl, Diagnostic> {
    Ok(Ctl::Return(Value::Code(c)))
}

/// Applies combinator `c` to all of its arguments.
pub(crate) fn comb(m: &mut Machine<'_>, c: Comb, args: Vec<Value>) -> Result<Ctl, Diagnostic> {
    let backend = m.session.backend;
    match c {
        Comb::NewScope | Comb::NewFunScope => {
            let p = m.session.new_prompt();
            let memo = (c == Comb::NewFunScope).then(|| RefCell::new(None));
            m.push(Frame::Prompt(p));
            let scope = Value::Scope(Rc::new(ScopeVal { prompt: p, memo }));
            Ok(Ctl::Apply(args[0].clone(), scope))
        }
        Comb::Lam => lam(m, args[0].clone()),
        Comb::Genlet => {
            let scope = scope_arg(&args[0])?;
            let code = code_arg(m, &args[1])?;
            genlet(m, &scope, code)
        }
        Comb::GenletFun => {
            let scope = scope_arg(&args[0])?;
            let Some(memo) = &scope.memo else {
                return Err(Diagnostic::runtime("genletfun needs a function scope"));
            };
            if let Some(code) = memo.borrow().clone() {
                return ret(code);
            }
            m.push(Frame::Backend(BackendFrame::MemoStore(scope.clone())));
            m.push(Frame::Backend(BackendFrame::GenletAfterLam(scope)));
            lam(m, args[1].clone())
        }
        Comb::Csp => {
            let v = args[0].clone();
            ret(match backend {
                Backend::String => string::csp(&v)?,
                Backend::Quote => quote::csp(m.session, v),
                Backend::Eval => CodeValue::Eval(Rc::new(Thunk::Const(v))),
            })
        }
        Comb::Int | Comb::Str => {
            let lit = match &args[0] {
                Value::Int(i) if c == Comb::Int => SourceExpr::IntLit(*i),
                Value::Str(s) if c == Comb::Str => SourceExpr::StrLit(s.to_string()),
                other => return Err(Diagnostic::runtime(format!("{c} applied to a {}", other.tag()))),
            };
            ret(match backend {
                Backend::String => string::literal(&lit),
                Backend::Quote => CodeValue::Quote(Rc::new(lit)),
                Backend::Eval => CodeValue::Eval(Rc::new(Thunk::Const(args[0].clone()))),
            })
        }
        _ => {
            let codes = args.iter().map(|a| code_arg(m, a)).collect::<Result<Vec<_>, _>>()?;
            ret(match backend {
                Backend::String => string::build(c, &codes),
                Backend::Quote => quote::build(c, &codes),
                Backend::Eval => eval::build(c, &codes),
            })
        }
    }
}

/// Starts building `lam body`: binds a fresh variable and applies `body` to
/// its code with a frame that wraps the result.
fn lam(m: &mut Machine<'_>, body: Value) -> Result<Ctl, Diagnostic> {
    let (var, var_code) = match m.session.backend {
        Backend::String => {
            let x = m.session.gensym("x");
            let code = string::literal(&SourceExpr::Var(x.clone()));
            (LamVar::Named(x), code)
        }
        Backend::Quote => {
            let x = m.session.gensym("x");
            let code = CodeValue::Quote(Rc::new(SourceExpr::Var(x.clone())));
            (LamVar::Named(x), code)
        }
        Backend::Eval => {
            let d = m.session.dnew();
            (LamVar::Dynamic(d), CodeValue::Eval(Rc::new(Thunk::DRef(d))))
        }
    };
    m.push(Frame::Backend(BackendFrame::Lam(var)));
    Ok(Ctl::Apply(body, Value::Code(var_code)))
}

/// Binds `code` to a fresh variable at the point marked by `scope` and
/// returns the variable's code. Evaluator code binds a dynamic variable when
/// forced, so the right-hand side runs where the binding lands, not at
/// generation time.
fn genlet(m: &mut Machine<'_>, scope: &ScopeVal, code: CodeValue) -> Result<Ctl, Diagnostic> {
    let p = scope.prompt;
    let k = m.capture_upto(p)?;
    let (var, var_code) = match &code {
        CodeValue::Eval(_) => {
            let d = m.session.dnew();
            (LamVar::Dynamic(d), CodeValue::Eval(Rc::new(Thunk::DRef(d))))
        }
        CodeValue::Str { .. } => {
            let t = m.session.gensym("t");
            (LamVar::Named(t.clone()), string::literal(&SourceExpr::Var(t)))
        }
        CodeValue::Quote(_) => {
            let t = m.session.gensym("t");
            (LamVar::Named(t.clone()), CodeValue::Quote(Rc::new(SourceExpr::Var(t))))
        }
    };
    m.push(Frame::Backend(BackendFrame::Let { var, rhs: code }));
    m.reinstate(p, k);
    ret(var_code)
}

pub(crate) fn resume(m: &mut Machine<'_>, frame: BackendFrame, v: Value) -> Result<Ctl, Diagnostic> {
    match frame {
        BackendFrame::Lam(var) => {
            let body = code_arg(m, &v)?;
            ret(match (var, body) {
                (LamVar::Named(x), CodeValue::Str { text, prec }) => string::lam(&x, &text, prec),
                (LamVar::Named(x), CodeValue::Quote(b)) => {
                    CodeValue::Quote(Rc::new(SourceExpr::Fun(x, Box::new((*b).clone()))))
                }
                (LamVar::Dynamic(d), CodeValue::Eval(b)) => CodeValue::Eval(Rc::new(Thunk::Lam { dvar: d, body: b })),
                _ => return Err(Diagnostic::runtime("lam body from a different backend")),
            })
        }
        BackendFrame::Let { var, rhs } => {
            let body = code_arg(m, &v)?;
            ret(match (var, rhs, body) {
                (LamVar::Named(x), CodeValue::Str { text: r, prec: rp }, CodeValue::Str { text: b, prec: bp }) => {
                    string::let_(&x, (&r, rp), (&b, bp))
                }
                (LamVar::Named(x), CodeValue::Quote(r), CodeValue::Quote(b)) => CodeValue::Quote(Rc::new(
                    SourceExpr::let_(&x, (*r).clone(), (*b).clone()),
                )),
                (LamVar::Dynamic(d), CodeValue::Eval(r), CodeValue::Eval(b)) => {
                    CodeValue::Eval(Rc::new(Thunk::Let { dvar: d, rhs: r, body: b }))
                }
                _ => return Err(Diagnostic::runtime("let body from a different backend")),
            })
        }
        BackendFrame::GenletAfterLam(scope) => {
            let code = code_arg(m, &v)?;
            genlet(m, &scope, code)
        }
        BackendFrame::MemoStore(scope) => {
            let code = code_arg(m, &v)?;
            let memo = scope.memo.as_ref().expect("function scope");
            // the first entry is kept
            if memo.borrow().is_none() {
                *memo.borrow_mut() = Some(code);
            }
            Ok(Ctl::Return(v))
        }
    }
}

/// Rejects generated code that mentions variables bound nowhere in it.
pub fn check_scope(code: &SourceExpr) -> Result<(), Diagnostic> {
    let free = free_vars(code);
    if free.is_empty() {
        return Ok(());
    }
    let names = free.into_iter().collect::<Vec<_>>().join(", ");
    Err(Diagnostic::new(
        DiagKind::ScopeExtrusion,
        format!("generated code mentions unbound {names}"),
    ))
}

#[cfg(test)]
mod tests;
