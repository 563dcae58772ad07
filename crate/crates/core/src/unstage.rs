//! Translation of two-level source programs into plain host terms over the
//! code combinators.
//!
//! Present-stage forms translate homomorphically and a bracket translates
//! its body with the future-stage rules: constants and operators become
//! combinator applications, `fun` becomes `lam` of a host function, an
//! escape returns to the present-stage rules and `%` becomes `csp`. A
//! future-stage `let` introduces a scope right above its `genlet`; a `let` of
//! a function goes through `new_funscope`/`genletfun` with every use of the
//! bound name replaced by `f ()`.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::ast::{t, Comb, SourceExpr, TargetTerm, Term, WILDCARD};

pub fn translate(e: &SourceExpr) -> Term {
    let mut names = BTreeSet::new();
    collect_names(e, &mut names);
    let scope_var = fresh_like("p", &names);
    Translator { scope_var }.present(e)
}

fn collect_names(e: &SourceExpr, out: &mut BTreeSet<String>) {
    match e {
        SourceExpr::Var(x) | SourceExpr::Fun(x, _) | SourceExpr::Let(x, _, _) => {
            out.insert(x.clone());
        }
        _ => {}
    }
    for c in e.children() {
        collect_names(c, out);
    }
}

/// `base` itself if unused, otherwise the first unused `base_N`.
fn fresh_like(base: &str, used: &BTreeSet<String>) -> String {
    if !used.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|i| format!("{base}_{i}"))
        .find(|n| !used.contains(n))
        .expect("unbounded supply")
}

struct Translator {
    /// Binder for every scope parameter. One name suffices: each `genlet`
    /// refers to the scope directly above it, with no binder in between, and
    /// the name occurs nowhere in the source.
    scope_var: String,
}

fn comb(c: Comb, args: Vec<Term>) -> Term {
    t::comb(c, args)
}

impl Translator {
    fn present(&self, e: &SourceExpr) -> Term {
        use SourceExpr::*;
        let node = match e {
            Var(x) => TargetTerm::Var(x.clone()),
            IntLit(i) => TargetTerm::IntLit(*i),
            StrLit(s) => TargetTerm::StrLit(s.clone()),
            Nil => TargetTerm::Nil,
            Unit => TargetTerm::UnitLit,
            Persisted(i) => TargetTerm::Persisted(*i),
            Add(a, b) => TargetTerm::Add(self.present(a), self.present(b)),
            Pair(a, b) => TargetTerm::Pair(self.present(a), self.present(b)),
            Cons(a, b) => TargetTerm::Cons(self.present(a), self.present(b)),
            RefNew(a) => TargetTerm::RefNew(self.present(a)),
            RefGet(a) => TargetTerm::RefGet(self.present(a)),
            Rset(a, b) => TargetTerm::Rset(self.present(a), self.present(b)),
            App(a, b) => TargetTerm::App(self.present(a), self.present(b)),
            Fun(x, b) => TargetTerm::Fun(x.clone(), self.present(b)),
            Let(x, a, b) => TargetTerm::Let(x.clone(), self.present(a), self.present(b)),
            Bracket(b) => return self.future(b),
            // not produced by the parser; read as lift
            Escape(a) => return self.present(a),
            Csp(a) => return comb(Comb::Csp, vec![self.present(a)]),
        };
        Arc::new(node)
    }

    fn future(&self, e: &SourceExpr) -> Term {
        use SourceExpr::*;
        match e {
            Var(x) => t::var(x),
            IntLit(i) => comb(Comb::Int, vec![t::int(*i)]),
            StrLit(s) => comb(Comb::Str, vec![t::str(s)]),
            Nil => comb(Comb::Nil, vec![]),
            Unit => comb(Comb::Csp, vec![t::unit()]),
            Persisted(i) => comb(Comb::Csp, vec![Arc::new(TargetTerm::Persisted(*i))]),
            Add(a, b) => comb(Comb::Add, vec![self.future(a), self.future(b)]),
            Pair(a, b) => comb(Comb::Pair, vec![self.future(a), self.future(b)]),
            Cons(a, b) => comb(Comb::Cons, vec![self.future(a), self.future(b)]),
            RefNew(a) => comb(Comb::RefNew, vec![self.future(a)]),
            RefGet(a) => comb(Comb::RefGet, vec![self.future(a)]),
            Rset(a, b) => comb(Comb::Rset, vec![self.future(a), self.future(b)]),
            App(a, b) => comb(Comb::App, vec![self.future(a), self.future(b)]),
            Fun(x, b) => comb(Comb::Lam, vec![t::fun(x, self.future(b))]),
            Let(x, rhs, body) => {
                let p = &self.scope_var;
                match rhs.as_ref() {
                    Fun(z, fbody) => {
                        let gen = comb(
                            Comb::GenletFun,
                            vec![t::var(p), t::fun(z, self.future(fbody))],
                        );
                        let thunk = t::fun(WILDCARD, gen);
                        let body = force_uses(&self.future(body), x);
                        comb(Comb::NewFunScope, vec![t::fun(p, t::let_(x, thunk, body))])
                    }
                    _ => {
                        let gen = comb(Comb::Genlet, vec![t::var(p), self.future(rhs)]);
                        let body = self.future(body);
                        comb(Comb::NewScope, vec![t::fun(p, t::let_(x, gen, body))])
                    }
                }
            }
            Escape(a) => self.present(a),
            Csp(a) => comb(Comb::Csp, vec![self.present(a)]),
            Bracket(b) => self.future(b),
        }
    }
}

/// Replaces every free occurrence of `f` by `f ()`.
pub fn force_uses(term: &Term, f: &str) -> Term {
    use TargetTerm::*;
    let go = |t: &Term| force_uses(t, f);
    let node = match term.as_ref() {
        Var(x) if x == f => return t::app(t::var(f), t::unit()),
        Var(_) | IntLit(_) | StrLit(_) | UnitLit | Nil | Persisted(_) => return term.clone(),
        Fun(x, _) if x == f => return term.clone(),
        Fun(x, b) => Fun(x.clone(), go(b)),
        Let(x, a, b) if x == f => Let(x.clone(), go(a), b.clone()),
        Let(x, a, b) => Let(x.clone(), go(a), go(b)),
        Add(a, b) => Add(go(a), go(b)),
        Pair(a, b) => Pair(go(a), go(b)),
        Cons(a, b) => Cons(go(a), go(b)),
        Rset(a, b) => Rset(go(a), go(b)),
        App(a, b) => App(go(a), go(b)),
        RefNew(a) => RefNew(go(a)),
        RefGet(a) => RefGet(go(a)),
        Comb(c, args) => Comb(*c, args.iter().map(go).collect()),
    };
    Arc::new(node)
}

/// Every `genlet`/`genletfun` takes as its scope a variable bound by the
/// parameter of a `new_scope`/`new_funscope` body with no `lam` in between.
/// Returns a description of the first violation.
pub fn lint_scopes(term: &TargetTerm) -> Result<(), String> {
    // (scope name, crossed a lam since binding)
    fn go(t: &TargetTerm, scopes: &mut Vec<(String, bool)>) -> Result<(), String> {
        use TargetTerm::*;
        match t {
            Comb(c @ (crate::ast::Comb::NewScope | crate::ast::Comb::NewFunScope), args) => {
                if let Some(arg) = args.first() {
                    if let Fun(p, body) = arg.as_ref() {
                        scopes.push((p.clone(), false));
                        let r = go(body, scopes);
                        scopes.pop();
                        return r;
                    }
                    return Err(format!("{c} applied to a non-function"));
                }
                Ok(())
            }
            Comb(c @ (crate::ast::Comb::Genlet | crate::ast::Comb::GenletFun), args) => {
                match args.first().map(|a| a.as_ref()) {
                    Some(Var(p)) => match scopes.iter().rev().find(|(n, _)| n == p) {
                        Some((_, false)) => {}
                        Some((_, true)) => return Err(format!("{c} {p} is separated from its scope by lam")),
                        None => return Err(format!("{c} {p} has no enclosing scope")),
                    },
                    Some(_) => return Err(format!("{c} applied to a non-variable scope")),
                    None => {}
                }
                args.iter().try_for_each(|a| go(a, scopes))
            }
            Comb(crate::ast::Comb::Lam, args) => {
                let saved: Vec<bool> = scopes.iter().map(|s| s.1).collect();
                scopes.iter_mut().for_each(|s| s.1 = true);
                let r = args.iter().try_for_each(|a| go(a, scopes));
                scopes.iter_mut().zip(saved).for_each(|(s, b)| s.1 = b);
                r
            }
            Fun(x, b) | Let(x, _, b) if scopes.iter().any(|(n, _)| n == x) => {
                // a binder shadowing a scope name hides it in `b`
                if let Let(_, a, _) = t {
                    go(a, scopes)?;
                }
                let hidden: Vec<(String, bool)> = scopes.iter().filter(|(n, _)| n != x).cloned().collect();
                let mut inner = hidden;
                go(b, &mut inner)
            }
            _ => t.children().into_iter().try_for_each(|c| go(c, scopes)),
        }
    }
    go(term, &mut Vec::new())
}
