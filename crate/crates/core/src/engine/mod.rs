//! Evaluator for target terms.
//!
//! The evaluator is a small-step machine over an explicit stack of frames, so
//! a delimited continuation is just the run of frames above a prompt. All
//! compound forms evaluate their operands right to left: the argument before
//! the function, the second pair component before the first.
//!
//! Combinator constants are interpreted by the session's backend. Anything
//! that re-enters evaluation from Rust (forcing evaluator code, applying a
//! generated function) runs a fresh machine on the same session, and
//! continuations cannot be captured across that boundary.

mod dynbind;
mod value;

use std::sync::atomic::{AtomicU64, Ordering};

use crate::ast::{Name, SourceExpr, TargetTerm, Term};
use crate::backends::{self, BackendFrame, CodeValue};
use crate::diag::{DiagKind, Diagnostic};

pub use dynbind::{DEnv, DVar};
pub use value::{Closure, Cont, DynClosure, Env, Prim, ScopeVal, Tag, VList, Value};

pub type PromptId = u64;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Backend {
    /// Code values are program text.
    String,
    /// Code values are syntax trees.
    Quote,
    /// Code values are delayed computations.
    Eval,
}

static SESSIONS: AtomicU64 = AtomicU64::new(1);

/// Per-evaluation state: counters, the dynamic environment and the table of
/// persisted values that quoted code refers to.
pub struct Session {
    pub backend: Backend,
    id: u64,
    gensym: u64,
    next_prompt: PromptId,
    next_dvar: DVar,
    denv: DEnv,
    persisted: Vec<Value>,
}

impl Session {
    pub fn new(backend: Backend) -> Self {
        Session::with_gensym_start(backend, 1)
    }

    /// The first generated name is numbered `start`.
    pub fn with_gensym_start(backend: Backend, start: u64) -> Self {
        Session {
            backend,
            id: SESSIONS.fetch_add(1, Ordering::Relaxed),
            gensym: start,
            next_prompt: 0,
            next_dvar: 0,
            denv: DEnv::default(),
            persisted: Vec::new(),
        }
    }

    /// `prefix_N` with one counter shared by all prefixes.
    pub fn gensym(&mut self, prefix: &str) -> String {
        let n = self.gensym;
        self.gensym += 1;
        format!("{prefix}_{n}")
    }

    pub fn new_prompt(&mut self) -> PromptId {
        self.next_prompt += 1;
        self.next_prompt
    }

    /// Stores a value that quoted code refers to by slot.
    pub fn persist(&mut self, v: Value) -> usize {
        self.persisted.push(v);
        self.persisted.len() - 1
    }

    pub fn persisted(&self, slot: usize) -> Option<&Value> {
        self.persisted.get(slot)
    }

    /// Evaluates a closed term.
    pub fn eval(&mut self, t: &Term) -> Result<Value, Diagnostic> {
        self.eval_in(t, &[])
    }

    /// Evaluates `t` with the given host bindings in scope.
    pub fn eval_in(&mut self, t: &Term, bindings: &[(&str, Value)]) -> Result<Value, Diagnostic> {
        let env = bindings
            .iter()
            .fold(Env::default(), |env, (x, v)| env.extend(x, v.clone()));
        Machine::new(self).run(Ctl::Eval(t.clone(), env))
    }

    pub fn apply(&mut self, f: Value, a: Value) -> Result<Value, Diagnostic> {
        Machine::new(self).run(Ctl::Apply(f, a))
    }

    /// Runs generated code in this session: evaluator code is forced, text is
    /// re-parsed and trees are evaluated directly.
    pub fn run_code(&mut self, code: &CodeValue) -> Result<Value, Diagnostic> {
        match code {
            CodeValue::Eval(th) => backends::eval::force(self, th),
            CodeValue::Quote(e) => self.eval_plain(e),
            CodeValue::Str { text, .. } => {
                let e = crate::parser::parse_plain(text)?.tree;
                self.eval_plain(&e)
            }
        }
    }

    /// Evaluates a staging-free source expression.
    pub fn eval_plain(&mut self, e: &SourceExpr) -> Result<Value, Diagnostic> {
        if e.contains_staging() {
            return Err(Diagnostic::runtime("generated code contains a staging form"));
        }
        self.eval(&crate::unstage::translate(e))
    }
}

/// Evaluates a closed term in a fresh session. A final quoted code value is
/// checked for scope extrusion.
pub fn eval(t: &Term, backend: Backend) -> Result<Value, Diagnostic> {
    let mut s = Session::new(backend);
    let v = s.eval(t)?;
    if let Value::Code(CodeValue::Quote(e)) = &v {
        backends::check_scope(e)?;
    }
    Ok(v)
}

/// Host bindings for the raw delimited-control operators:
/// `new_prompt ()`, `push_prompt p (fun () -> e)` and `shift0 p (fun k -> e)`.
pub fn control_builtins() -> Vec<(&'static str, Value)> {
    vec![
        ("new_prompt", Value::Prim(Prim::NewPrompt, vec![])),
        ("push_prompt", Value::Prim(Prim::PushPrompt, vec![])),
        ("shift0", Value::Prim(Prim::Shift0, vec![])),
    ]
}

#[derive(Copy, Clone, Debug)]
pub enum Op2 {
    Add,
    Pair,
    Cons,
    Rset,
    App,
}

#[derive(Clone)]
pub enum Frame {
    /// The right operand is done; evaluate the left one.
    Left { op: Op2, left: Term, env: Env },
    /// Both operands are done.
    Combine { op: Op2, right: Value },
    RefNew,
    RefGet,
    LetBody { name: Name, body: Term, env: Env },
    /// Evaluating argument `index` of a combinator node; arguments after it
    /// are in `done`, last first.
    CombArg { node: Term, index: usize, env: Env, done: Vec<Value> },
    Prompt(PromptId),
    Backend(BackendFrame),
}

pub(crate) enum Ctl {
    Eval(Term, Env),
    Return(Value),
    Apply(Value, Value),
}

pub(crate) struct Machine<'s> {
    pub(crate) session: &'s mut Session,
    stack: Vec<Frame>,
}

fn type_mismatch(what: &str, v: &Value) -> Diagnostic {
    Diagnostic::runtime(format!("{what} expected, got {}", v.tag()))
}

impl<'s> Machine<'s> {
    fn new(session: &'s mut Session) -> Self {
        Machine { session, stack: Vec::new() }
    }

    fn run(&mut self, mut ctl: Ctl) -> Result<Value, Diagnostic> {
        loop {
            ctl = match ctl {
                Ctl::Eval(t, env) => self.eval(t, env)?,
                Ctl::Apply(f, a) => self.apply(f, a)?,
                Ctl::Return(v) => match self.stack.pop() {
                    None => return Ok(v),
                    Some(frame) => self.resume(frame, v)?,
                },
            }
        }
    }

    pub(crate) fn push(&mut self, f: Frame) {
        self.stack.push(f);
    }

    /// Removes the frames up to and including the innermost `Prompt(p)` and
    /// returns those above it.
    pub(crate) fn capture_upto(&mut self, p: PromptId) -> Result<Vec<Frame>, Diagnostic> {
        let pos = self
            .stack
            .iter()
            .rposition(|f| matches!(f, Frame::Prompt(q) if *q == p))
            .ok_or_else(|| Diagnostic::runtime(format!("prompt {p} not active")))?;
        let captured = self.stack.split_off(pos + 1);
        self.stack.pop();
        Ok(captured)
    }

    /// Reinstalls a captured continuation, delimiter included.
    pub(crate) fn reinstate(&mut self, p: PromptId, frames: Vec<Frame>) {
        self.stack.push(Frame::Prompt(p));
        self.stack.extend(frames);
    }

    fn eval(&mut self, t: Term, env: Env) -> Result<Ctl, Diagnostic> {
        use TargetTerm::*;
        let binary = |m: &mut Self, op: Op2, a: &Term, b: &Term, env: Env| {
            m.push(Frame::Left { op, left: a.clone(), env: env.clone() });
            Ctl::Eval(b.clone(), env)
        };
        Ok(match t.as_ref() {
            Var(x) => match env.lookup(x) {
                Some(v) => Ctl::Return(v.clone()),
                None => return Err(Diagnostic::new(DiagKind::UnboundVar, format!("`{x}`"))),
            },
            IntLit(i) => Ctl::Return(Value::Int(*i)),
            StrLit(s) => Ctl::Return(Value::str(s)),
            UnitLit => Ctl::Return(Value::Unit),
            Nil => Ctl::Return(Value::List(VList::nil())),
            Persisted(slot) => match self.session.persisted(*slot) {
                Some(v) => Ctl::Return(v.clone()),
                None => return Err(Diagnostic::runtime(format!("no persisted value in slot {slot}"))),
            },
            Add(a, b) => binary(self, Op2::Add, a, b, env),
            Pair(a, b) => binary(self, Op2::Pair, a, b, env),
            Cons(a, b) => binary(self, Op2::Cons, a, b, env),
            Rset(a, b) => binary(self, Op2::Rset, a, b, env),
            App(f, x) => binary(self, Op2::App, f, x, env),
            RefNew(a) => {
                self.push(Frame::RefNew);
                Ctl::Eval(a.clone(), env)
            }
            RefGet(a) => {
                self.push(Frame::RefGet);
                Ctl::Eval(a.clone(), env)
            }
            Fun(x, body) => Ctl::Return(Value::Closure(std::rc::Rc::new(Closure {
                param: x.clone(),
                body: body.clone(),
                env,
            }))),
            Let(x, rhs, body) => {
                self.push(Frame::LetBody { name: x.clone(), body: body.clone(), env: env.clone() });
                Ctl::Eval(rhs.clone(), env)
            }
            Comb(c, args) => match args.len() {
                0 => self.saturate(Prim::Comb(*c), vec![])?,
                n => {
                    let last = args[n - 1].clone();
                    self.push(Frame::CombArg { node: t.clone(), index: n - 1, env: env.clone(), done: vec![] });
                    Ctl::Eval(last, env)
                }
            },
        })
    }

    /// Applies `p` to `args` if that is all of them, else returns the partial
    /// application.
    fn saturate(&mut self, p: Prim, args: Vec<Value>) -> Result<Ctl, Diagnostic> {
        if args.len() < p.arity() {
            return Ok(Ctl::Return(Value::Prim(p, args)));
        }
        match p {
            Prim::Comb(c) => backends::comb(self, c, args),
            Prim::NewPrompt => Ok(Ctl::Return(Value::Prompt(self.session.new_prompt()))),
            Prim::PushPrompt => {
                let mut args = args.into_iter();
                let (p, body) = (args.next().unwrap(), args.next().unwrap());
                let Value::Prompt(p) = p else { return Err(type_mismatch("prompt", &p)) };
                self.push(Frame::Prompt(p));
                Ok(Ctl::Apply(body, Value::Unit))
            }
            Prim::Shift0 => {
                let mut args = args.into_iter();
                let (p, consumer) = (args.next().unwrap(), args.next().unwrap());
                let Value::Prompt(p) = p else { return Err(type_mismatch("prompt", &p)) };
                let frames = self.capture_upto(p)?;
                let k = Cont { session: self.session.id, prompt: p, frames };
                Ok(Ctl::Apply(consumer, Value::Cont(std::rc::Rc::new(k))))
            }
        }
    }

    fn apply(&mut self, f: Value, a: Value) -> Result<Ctl, Diagnostic> {
        match f {
            Value::Closure(c) => Ok(Ctl::Eval(c.body.clone(), c.env.extend(&c.param, a))),
            Value::Prim(p, mut args) => {
                args.push(a);
                self.saturate(p, args)
            }
            Value::Cont(k) => {
                if k.session != self.session.id {
                    return Err(Diagnostic::runtime("continuation resumed outside its session"));
                }
                self.reinstate(k.prompt, k.frames.clone());
                Ok(Ctl::Return(a))
            }
            Value::DynClosure(dc) => {
                let v = self
                    .session
                    .dlet(&dc.denv, dc.dvar, a, |s| backends::eval::force(s, &dc.body))?;
                Ok(Ctl::Return(v))
            }
            other => Err(type_mismatch("function", &other)),
        }
    }

    fn resume(&mut self, frame: Frame, v: Value) -> Result<Ctl, Diagnostic> {
        Ok(match frame {
            Frame::Left { op, left, env } => {
                self.push(Frame::Combine { op, right: v });
                Ctl::Eval(left, env)
            }
            Frame::Combine { op, right } => combine(op, v, right)?,
            Frame::RefNew => Ctl::Return(Value::Ref(std::rc::Rc::new(std::cell::RefCell::new(v)))),
            Frame::RefGet => match v {
                Value::Ref(r) => Ctl::Return(r.borrow().clone()),
                other => return Err(type_mismatch("reference", &other)),
            },
            Frame::LetBody { name, body, env } => Ctl::Eval(body, env.extend(&name, v)),
            Frame::CombArg { node, index, env, mut done } => {
                done.push(v);
                let TargetTerm::Comb(c, args) = node.as_ref() else { unreachable!("CombArg on a combinator node") };
                if index == 0 {
                    done.reverse();
                    return self.saturate(Prim::Comb(*c), done);
                }
                let next = args[index - 1].clone();
                self.push(Frame::CombArg { node: node.clone(), index: index - 1, env: env.clone(), done });
                Ctl::Eval(next, env)
            }
            Frame::Prompt(_) => Ctl::Return(v),
            Frame::Backend(bf) => backends::resume(self, bf, v)?,
        })
    }
}

fn combine(op: Op2, left: Value, right: Value) -> Result<Ctl, Diagnostic> {
    Ok(Ctl::Return(match op {
        Op2::Add => match (&left, &right) {
            (Value::Int(a), Value::Int(b)) => Value::Int(a.wrapping_add(*b)),
            (Value::Int(_), other) | (other, _) => return Err(type_mismatch("int", other)),
        },
        Op2::Pair => Value::pair(left, right),
        Op2::Cons => match right {
            Value::List(tail) => Value::List(VList::cons(left, tail)),
            other => return Err(type_mismatch("list", &other)),
        },
        Op2::Rset => Value::List(rset_runtime(&left, right)?),
        Op2::App => return Ok(Ctl::Apply(left, right)),
    }))
}

/// Prepends `v` to the list in `cell`, stores and returns the new list.
/// Prepending a value whose runtime tag differs from the current head's is
/// the heterogeneous list that unsound generalization would build; it is
/// reported instead of performed.
pub fn rset_runtime(cell: &Value, v: Value) -> Result<VList, Diagnostic> {
    let Value::Ref(r) = cell else { return Err(type_mismatch("reference", cell)) };
    let old = match &*r.borrow() {
        Value::List(l) => l.clone(),
        other => return Err(type_mismatch("list in the cell", other)),
    };
    if let Some(head) = old.head() {
        if head.tag() != v.tag() {
            return Err(Diagnostic::new(
                DiagKind::SoundnessViolation,
                format!("prepending a {} to a list of {}s: {v} :: {}", v.tag(), head.tag(), Value::List(old.clone())),
            ));
        }
    }
    let new = VList::cons(v, old);
    *r.borrow_mut() = Value::List(new.clone());
    Ok(new)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_target;
    use std::sync::Arc;

    fn run(src: &str) -> Result<Value, Diagnostic> {
        let t = Arc::new(parse_target(src).unwrap().tree);
        Session::new(Backend::Eval).eval_in(&t, &control_builtins())
    }

    fn shows(src: &str) -> String {
        run(src).unwrap().to_string()
    }

    #[test]
    fn shared_cell_trace() {
        assert_eq!(shows("let x = ref (1 :: []) in (rset x 2, rset x 3)"), "([2; 3; 1], [3; 1])");
        assert_eq!(shows("(rset (ref (1 :: [])) 2, rset (ref (1 :: [])) 3)"), "([2; 1], [3; 1])");
    }

    #[test]
    fn evaluation_is_right_to_left() {
        let src = "let r = ref [] in let a = (rset r 1, rset r 2) in !r";
        assert_eq!(shows(src), "[1; 2]");
        let app = "let r = ref [] in (fun u -> !r) (rset r 7)";
        assert_eq!(shows(app), "[7]");
    }

    #[test]
    fn heterogeneous_prepend_is_a_soundness_violation() {
        let cell = Value::Ref(std::rc::Rc::new(std::cell::RefCell::new(Value::list(vec![Value::str("3")]))));
        let d = rset_runtime(&cell, Value::Int(2)).unwrap_err();
        assert_eq!(d.kind, DiagKind::SoundnessViolation);
        let empty = Value::Ref(std::rc::Rc::new(std::cell::RefCell::new(Value::list(vec![]))));
        assert_eq!(Value::List(rset_runtime(&empty, Value::str("3")).unwrap()).to_string(), "[\"3\"]");
        assert_eq!(empty.to_string(), "{contents = [\"3\"]}");
    }

    #[test]
    fn shift0_with_immediate_resume_is_identity() {
        let src = "let p = new_prompt () in push_prompt p (fun u -> 1 + shift0 p (fun k -> k 41))";
        assert_eq!(shows(src), "42");
    }

    #[test]
    fn shift0_removes_the_delimiter() {
        // k is applied twice; the consumer runs outside the prompt
        let src = "let p = new_prompt () in \
                   push_prompt p (fun u -> (1, shift0 p (fun k -> (k 2, k 3))))";
        assert_eq!(shows(src), "((1, 2), (1, 3))");
        let dropped = "let p = new_prompt () in push_prompt p (fun u -> 1 + shift0 p (fun k -> 10))";
        assert_eq!(shows(dropped), "10");
    }

    #[test]
    fn capture_without_delimiter_fails() {
        let d = run("let p = new_prompt () in shift0 p (fun k -> 1)").unwrap_err();
        assert_eq!(d.kind, DiagKind::RuntimeError);
        assert!(d.message.contains("not active"));
    }

    #[test]
    fn continuations_stay_in_their_session() {
        let src = "let p = new_prompt () in push_prompt p (fun u -> 1 + shift0 p (fun k -> k))";
        let k = run(src).unwrap();
        let mut other = Session::new(Backend::Eval);
        let d = other.apply(k, Value::Int(1)).unwrap_err();
        assert!(d.message.contains("outside its session"));
    }

    #[test]
    fn runtime_type_errors_are_diagnostics() {
        assert_eq!(run("1 2").unwrap_err().kind, DiagKind::RuntimeError);
        assert_eq!(run("y").unwrap_err().kind, DiagKind::UnboundVar);
    }
}
