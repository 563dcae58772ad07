use std::cell::RefCell;
use std::fmt;
use std::rc::Rc;

use crate::ast::{pretty, pretty::quote_string, Comb, Name, SourceExpr, Term};
use crate::backends::{CodeValue, Thunk};

use super::dynbind::{DEnv, DVar};
use super::{Frame, PromptId};

#[derive(Clone)]
pub enum Value {
    Int(i64),
    Str(Rc<str>),
    Unit,
    List(VList),
    Pair(Rc<(Value, Value)>),
    Closure(Rc<Closure>),
    /// A primitive applied to fewer arguments than its arity.
    Prim(Prim, Vec<Value>),
    Ref(Rc<RefCell<Value>>),
    Code(CodeValue),
    Scope(Rc<ScopeVal>),
    Prompt(PromptId),
    Cont(Rc<Cont>),
    /// A generated function, produced by forcing evaluator code.
    DynClosure(Rc<DynClosure>),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Prim {
    Comb(Comb),
    NewPrompt,
    PushPrompt,
    Shift0,
}

impl Prim {
    pub fn arity(self) -> usize {
        match self {
            Prim::Comb(c) => c.arity(),
            Prim::NewPrompt => 1,
            Prim::PushPrompt | Prim::Shift0 => 2,
        }
    }
}

pub struct Closure {
    pub param: Name,
    pub body: Term,
    pub env: Env,
}

pub struct DynClosure {
    pub denv: DEnv,
    pub dvar: DVar,
    pub body: Rc<Thunk>,
}

/// What a `new_scope` or `new_funscope` body receives.
pub struct ScopeVal {
    pub prompt: PromptId,
    /// The function scope's single memo entry; `None` for plain scopes.
    pub memo: Option<RefCell<Option<CodeValue>>>,
}

/// A captured delimited continuation: the frames between the capture point
/// and its prompt, innermost last.
pub struct Cont {
    pub session: u64,
    pub prompt: PromptId,
    pub frames: Vec<Frame>,
}

/// Immutable cons list; tails are shared.
#[derive(Clone, Default)]
pub struct VList(pub Option<Rc<(Value, VList)>>);

impl VList {
    pub fn nil() -> Self {
        VList(None)
    }

    pub fn cons(head: Value, tail: VList) -> Self {
        VList(Some(Rc::new((head, tail))))
    }

    pub fn head(&self) -> Option<&Value> {
        self.0.as_ref().map(|c| &c.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Value> {
        let mut cur = self;
        std::iter::from_fn(move || {
            let cell = cur.0.as_ref()?;
            cur = &cell.1;
            Some(&cell.0)
        })
    }

    pub fn from_values(vs: impl IntoIterator<Item = Value, IntoIter: DoubleEndedIterator>) -> Self {
        vs.into_iter().rev().fold(VList::nil(), |tail, v| VList::cons(v, tail))
    }
}

impl fmt::Debug for VList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Value::List(self.clone()))
    }
}

/// Persistent variable environment of the host evaluator.
#[derive(Clone, Default)]
pub struct Env(Option<Rc<(Name, Value, Env)>>);

impl Env {
    pub fn extend(&self, name: &str, v: Value) -> Env {
        Env(Some(Rc::new((name.to_string(), v, self.clone()))))
    }

    pub fn lookup(&self, name: &str) -> Option<&Value> {
        let mut cur = self;
        while let Some(node) = &cur.0 {
            if node.0 == name {
                return Some(&node.1);
            }
            cur = &node.2;
        }
        None
    }
}

/// Shallow runtime tag, used by the `rset` homogeneity check.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Tag {
    Int,
    Str,
    Unit,
    List,
    Pair,
    Function,
    Ref,
    Code,
    Scope,
    Prompt,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tag::Int => "int",
            Tag::Str => "string",
            Tag::Unit => "unit",
            Tag::List => "list",
            Tag::Pair => "pair",
            Tag::Function => "function",
            Tag::Ref => "reference",
            Tag::Code => "code",
            Tag::Scope => "scope",
            Tag::Prompt => "prompt",
        })
    }
}

impl Value {
    pub fn str(s: &str) -> Value {
        Value::Str(Rc::from(s))
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Rc::new((a, b)))
    }

    pub fn list(vs: Vec<Value>) -> Value {
        Value::List(VList::from_values(vs))
    }

    pub fn tag(&self) -> Tag {
        match self {
            Value::Int(_) => Tag::Int,
            Value::Str(_) => Tag::Str,
            Value::Unit => Tag::Unit,
            Value::List(_) => Tag::List,
            Value::Pair(_) => Tag::Pair,
            Value::Closure(_) | Value::Prim(..) | Value::Cont(_) | Value::DynClosure(_) => Tag::Function,
            Value::Ref(_) => Tag::Ref,
            Value::Code(_) => Tag::Code,
            Value::Scope(_) => Tag::Scope,
            Value::Prompt(_) => Tag::Prompt,
        }
    }

    /// Built from integers, strings, unit, lists and pairs only.
    pub fn is_first_order(&self) -> bool {
        match self {
            Value::Int(_) | Value::Str(_) | Value::Unit => true,
            Value::List(l) => l.iter().all(Value::is_first_order),
            Value::Pair(p) => p.0.is_first_order() && p.1.is_first_order(),
            _ => false,
        }
    }

    /// Structural equality on first-order values, identity on cells, and
    /// `false` for anything else.
    pub fn same(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::Unit, Value::Unit) => true,
            (Value::List(a), Value::List(b)) => {
                let (mut x, mut y) = (a.iter(), b.iter());
                loop {
                    match (x.next(), y.next()) {
                        (None, None) => return true,
                        (Some(p), Some(q)) if p.same(q) => {}
                        _ => return false,
                    }
                }
            }
            (Value::Pair(a), Value::Pair(b)) => a.0.same(&b.0) && a.1.same(&b.1),
            (Value::Ref(a), Value::Ref(b)) => Rc::ptr_eq(a, b),
            _ => false,
        }
    }

    /// The literal expression denoting this value, if it has one.
    pub fn to_literal(&self) -> Option<SourceExpr> {
        Some(match self {
            Value::Int(i) => SourceExpr::IntLit(*i),
            Value::Str(s) => SourceExpr::StrLit(s.to_string()),
            Value::Unit => SourceExpr::Unit,
            Value::List(l) => {
                let items = l.iter().map(Value::to_literal).collect::<Option<Vec<_>>>()?;
                items
                    .into_iter()
                    .rev()
                    .fold(SourceExpr::Nil, |tail, h| SourceExpr::cons(h, tail))
            }
            Value::Pair(p) => SourceExpr::pair(p.0.to_literal()?, p.1.to_literal()?),
            _ => return None,
        })
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Str(s) => f.write_str(&quote_string(s)),
            Value::Unit => f.write_str("()"),
            Value::List(l) => {
                f.write_str("[")?;
                for (i, v) in l.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
            Value::Pair(p) => write!(f, "({}, {})", p.0, p.1),
            Value::Closure(_) | Value::Prim(..) | Value::DynClosure(_) => f.write_str("<fun>"),
            Value::Cont(_) => f.write_str("<cont>"),
            Value::Ref(r) => write!(f, "{{contents = {}}}", r.borrow()),
            Value::Code(CodeValue::Str { text, .. }) => write!(f, ".<{text}>."),
            Value::Code(CodeValue::Quote(e)) => write!(f, ".<{}>.", pretty(e)),
            Value::Code(CodeValue::Eval(_)) => f.write_str("<code>"),
            Value::Scope(_) => f.write_str("<scope>"),
            Value::Prompt(p) => write!(f, "<prompt {p}>"),
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
