//! Abstract syntax for the two-stage source language and for the unstaged
//! target language built over code-generating combinators.

mod alpha;
pub mod pretty;

use std::fmt;
use std::sync::Arc;

pub use alpha::{alpha_equal, alpha_equal_target, free_vars, free_vars_target};
pub use pretty::{pretty, pretty_target};

pub type Name = String;

/// Binder name used for parameters that are never referenced (`fun () -> e`
/// and `fun _ -> e` both bind it).
pub const WILDCARD: &str = "_";

/// Two-stage object-language expression.
///
/// `Persisted` never comes out of the parser: it is how a code value refers to
/// a cross-stage persisted value that has no literal form (a reference cell or
/// a closure). The number is a slot in the table of the session that built it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SourceExpr {
    Var(Name),
    IntLit(i64),
    StrLit(String),
    Nil,
    Unit,
    Add(Box<SourceExpr>, Box<SourceExpr>),
    Pair(Box<SourceExpr>, Box<SourceExpr>),
    Cons(Box<SourceExpr>, Box<SourceExpr>),
    RefNew(Box<SourceExpr>),
    RefGet(Box<SourceExpr>),
    Rset(Box<SourceExpr>, Box<SourceExpr>),
    App(Box<SourceExpr>, Box<SourceExpr>),
    Fun(Name, Box<SourceExpr>),
    Let(Name, Box<SourceExpr>, Box<SourceExpr>),
    Bracket(Box<SourceExpr>),
    Escape(Box<SourceExpr>),
    Csp(Box<SourceExpr>),
    Persisted(usize),
}

impl SourceExpr {
    pub fn var(x: &str) -> Self {
        SourceExpr::Var(x.to_string())
    }
    pub fn int(i: i64) -> Self {
        SourceExpr::IntLit(i)
    }
    pub fn str(s: &str) -> Self {
        SourceExpr::StrLit(s.to_string())
    }
    pub fn add(a: SourceExpr, b: SourceExpr) -> Self {
        SourceExpr::Add(Box::new(a), Box::new(b))
    }
    pub fn pair(a: SourceExpr, b: SourceExpr) -> Self {
        SourceExpr::Pair(Box::new(a), Box::new(b))
    }
    pub fn cons(a: SourceExpr, b: SourceExpr) -> Self {
        SourceExpr::Cons(Box::new(a), Box::new(b))
    }
    pub fn ref_new(a: SourceExpr) -> Self {
        SourceExpr::RefNew(Box::new(a))
    }
    pub fn ref_get(a: SourceExpr) -> Self {
        SourceExpr::RefGet(Box::new(a))
    }
    pub fn rset(r: SourceExpr, v: SourceExpr) -> Self {
        SourceExpr::Rset(Box::new(r), Box::new(v))
    }
    pub fn app(f: SourceExpr, x: SourceExpr) -> Self {
        SourceExpr::App(Box::new(f), Box::new(x))
    }
    pub fn fun(x: &str, body: SourceExpr) -> Self {
        SourceExpr::Fun(x.to_string(), Box::new(body))
    }
    pub fn let_(x: &str, rhs: SourceExpr, body: SourceExpr) -> Self {
        SourceExpr::Let(x.to_string(), Box::new(rhs), Box::new(body))
    }
    pub fn bracket(e: SourceExpr) -> Self {
        SourceExpr::Bracket(Box::new(e))
    }
    pub fn escape(e: SourceExpr) -> Self {
        SourceExpr::Escape(Box::new(e))
    }
    pub fn csp(e: SourceExpr) -> Self {
        SourceExpr::Csp(Box::new(e))
    }

    /// Immediate subexpressions, left to right.
    pub fn children(&self) -> Vec<&SourceExpr> {
        use SourceExpr::*;
        match self {
            Var(_) | IntLit(_) | StrLit(_) | Nil | Unit | Persisted(_) => vec![],
            RefNew(a) | RefGet(a) | Fun(_, a) | Bracket(a) | Escape(a) | Csp(a) => vec![a],
            Add(a, b) | Pair(a, b) | Cons(a, b) | Rset(a, b) | App(a, b) | Let(_, a, b) => {
                vec![a, b]
            }
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().into_iter().map(|c| c.node_count()).sum::<usize>()
    }

    pub fn contains_staging(&self) -> bool {
        matches!(
            self,
            SourceExpr::Bracket(_) | SourceExpr::Escape(_) | SourceExpr::Csp(_)
        ) || self.children().into_iter().any(|c| c.contains_staging())
    }

    /// Checks the two-level discipline: brackets do not nest, escapes and CSP
    /// markers only occur at level 1. Returns the preorder index of the first
    /// offending node together with a message.
    pub fn check_levels(&self) -> Result<(), (usize, &'static str)> {
        fn go(e: &SourceExpr, level: u8, id: &mut usize) -> Result<(), (usize, &'static str)> {
            let here = *id;
            *id += 1;
            let inner = match (e, level) {
                (SourceExpr::Bracket(_), 1) => return Err((here, "nested bracket")),
                (SourceExpr::Bracket(_), _) => 1,
                (SourceExpr::Escape(_), 0) => return Err((here, "escape at level 0")),
                (SourceExpr::Csp(_), 0) => return Err((here, "CSP marker at level 0")),
                (SourceExpr::Escape(_) | SourceExpr::Csp(_), _) => 0,
                _ => level,
            };
            for c in e.children() {
                go(c, inner, id)?;
            }
            Ok(())
        }
        go(self, 0, &mut 0)
    }
}

impl fmt::Display for SourceExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty(self))
    }
}

/// The code-generating combinators of the target language.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Comb {
    Int,
    Str,
    Add,
    Lam,
    App,
    Pair,
    Nil,
    Cons,
    RefNew,
    RefGet,
    Rset,
    Csp,
    NewScope,
    Genlet,
    NewFunScope,
    GenletFun,
}

impl Comb {
    pub const ALL: [Comb; 16] = [
        Comb::Int,
        Comb::Str,
        Comb::Add,
        Comb::Lam,
        Comb::App,
        Comb::Pair,
        Comb::Nil,
        Comb::Cons,
        Comb::RefNew,
        Comb::RefGet,
        Comb::Rset,
        Comb::Csp,
        Comb::NewScope,
        Comb::Genlet,
        Comb::NewFunScope,
        Comb::GenletFun,
    ];

    /// Concrete-syntax name. The combinator for `rset` is spelled `rset_` so
    /// that it does not collide with the host primitive, as `ref_` does for
    /// `ref`.
    pub fn name(self) -> &'static str {
        match self {
            Comb::Int => "int",
            Comb::Str => "str",
            Comb::Add => "add",
            Comb::Lam => "lam",
            Comb::App => "app",
            Comb::Pair => "pair",
            Comb::Nil => "nil",
            Comb::Cons => "cons",
            Comb::RefNew => "ref_",
            Comb::RefGet => "rget",
            Comb::Rset => "rset_",
            Comb::Csp => "csp",
            Comb::NewScope => "new_scope",
            Comb::Genlet => "genlet",
            Comb::NewFunScope => "new_funscope",
            Comb::GenletFun => "genletfun",
        }
    }

    pub fn from_name(name: &str) -> Option<Comb> {
        Comb::ALL.iter().copied().find(|c| c.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            Comb::Nil => 0,
            Comb::Int
            | Comb::Str
            | Comb::Lam
            | Comb::RefNew
            | Comb::RefGet
            | Comb::Csp
            | Comb::NewScope
            | Comb::NewFunScope => 1,
            Comb::Add
            | Comb::App
            | Comb::Pair
            | Comb::Cons
            | Comb::Rset
            | Comb::Genlet
            | Comb::GenletFun => 2,
        }
    }
}

impl fmt::Display for Comb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub type Term = Arc<TargetTerm>;

/// Unstaged host term: plain lambda terms over combinator constants.
///
/// `Comb` holds at most `arity` arguments; fewer means partial application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TargetTerm {
    Var(Name),
    IntLit(i64),
    StrLit(String),
    UnitLit,
    Nil,
    Add(Term, Term),
    Pair(Term, Term),
    Cons(Term, Term),
    RefNew(Term),
    RefGet(Term),
    Rset(Term, Term),
    Fun(Name, Term),
    App(Term, Term),
    Let(Name, Term, Term),
    Comb(Comb, Vec<Term>),
    Persisted(usize),
}

impl TargetTerm {
    pub fn children(&self) -> Vec<&Term> {
        use TargetTerm::*;
        match self {
            Var(_) | IntLit(_) | StrLit(_) | UnitLit | Nil | Persisted(_) => vec![],
            RefNew(a) | RefGet(a) | Fun(_, a) => vec![a],
            Add(a, b) | Pair(a, b) | Cons(a, b) | Rset(a, b) | App(a, b) | Let(_, a, b) => {
                vec![a, b]
            }
            Comb(_, args) => args.iter().collect(),
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().into_iter().map(|c| c.node_count()).sum::<usize>()
    }

    /// Applies `f` to every node, outermost first.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a TargetTerm)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }
}

impl fmt::Display for TargetTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_target(self))
    }
}

/// Shorthand constructors for target terms, mostly for tests and for the
/// translation.
pub mod t {
    use super::{Comb, TargetTerm, Term};
    use std::sync::Arc;

    pub fn var(x: &str) -> Term {
        Arc::new(TargetTerm::Var(x.to_string()))
    }
    pub fn int(i: i64) -> Term {
        Arc::new(TargetTerm::IntLit(i))
    }
    pub fn str(s: &str) -> Term {
        Arc::new(TargetTerm::StrLit(s.to_string()))
    }
    pub fn unit() -> Term {
        Arc::new(TargetTerm::UnitLit)
    }
    pub fn fun(x: &str, body: Term) -> Term {
        Arc::new(TargetTerm::Fun(x.to_string(), body))
    }
    pub fn app(f: Term, x: Term) -> Term {
        Arc::new(TargetTerm::App(f, x))
    }
    pub fn let_(x: &str, rhs: Term, body: Term) -> Term {
        Arc::new(TargetTerm::Let(x.to_string(), rhs, body))
    }
    pub fn comb(c: Comb, args: Vec<Term>) -> Term {
        debug_assert!(args.len() <= c.arity());
        Arc::new(TargetTerm::Comb(c, args))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_check_rejects_nested_brackets() {
        let e = SourceExpr::bracket(SourceExpr::bracket(SourceExpr::int(1)));
        assert_eq!(e.check_levels(), Err((1, "nested bracket")));
        let ok = SourceExpr::bracket(SourceExpr::escape(SourceExpr::bracket(SourceExpr::int(1))));
        assert!(ok.check_levels().is_ok());
    }

    #[test]
    fn level_check_rejects_top_level_escape() {
        let e = SourceExpr::app(SourceExpr::var("f"), SourceExpr::escape(SourceExpr::var("x")));
        assert_eq!(e.check_levels(), Err((2, "escape at level 0")));
    }

    #[test]
    fn comb_names_round_trip() {
        for c in Comb::ALL {
            assert_eq!(Comb::from_name(c.name()), Some(c));
        }
        assert_eq!(Comb::from_name("rset"), None);
    }
}
