use std::collections::BTreeSet;

use super::{SourceExpr, TargetTerm};

/// Variables of `e` not bound by an enclosing `fun` or `let`.
pub fn free_vars(e: &SourceExpr) -> BTreeSet<String> {
    fn go(e: &SourceExpr, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match e {
            SourceExpr::Var(x) => {
                if !bound.iter().any(|b| b == x) {
                    out.insert(x.clone());
                }
            }
            SourceExpr::Fun(x, body) => {
                bound.push(x.clone());
                go(body, bound, out);
                bound.pop();
            }
            SourceExpr::Let(x, rhs, body) => {
                go(rhs, bound, out);
                bound.push(x.clone());
                go(body, bound, out);
                bound.pop();
            }
            other => {
                for c in other.children() {
                    go(c, bound, out);
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    go(e, &mut Vec::new(), &mut out);
    out
}

pub fn free_vars_target(t: &TargetTerm) -> BTreeSet<String> {
    fn go(t: &TargetTerm, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match t {
            TargetTerm::Var(x) => {
                if !bound.iter().any(|b| b == x) {
                    out.insert(x.clone());
                }
            }
            TargetTerm::Fun(x, body) => {
                bound.push(x.clone());
                go(body, bound, out);
                bound.pop();
            }
            TargetTerm::Let(x, rhs, body) => {
                go(rhs, bound, out);
                bound.push(x.clone());
                go(body, bound, out);
                bound.pop();
            }
            other => {
                for c in other.children() {
                    go(c, bound, out);
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

/// Binder correspondence for a simultaneous traversal. Each entry pairs a
/// binder of the left term with the binder of the right term introduced at
/// the same point.
#[derive(Default)]
struct Binders {
    pairs: Vec<(String, String)>,
}

impl Binders {
    fn vars_match(&self, x: &str, y: &str) -> bool {
        let left = self.pairs.iter().rposition(|(a, _)| a == x);
        let right = self.pairs.iter().rposition(|(_, b)| b == y);
        match (left, right) {
            (Some(i), Some(j)) => i == j,
            (None, None) => x == y,
            _ => false,
        }
    }

    fn under<R>(&mut self, x: &str, y: &str, f: impl FnOnce(&mut Self) -> R) -> R {
        self.pairs.push((x.to_string(), y.to_string()));
        let r = f(self);
        self.pairs.pop();
        r
    }
}

/// True iff `a` and `b` differ only in the names of bound variables.
pub fn alpha_equal(a: &SourceExpr, b: &SourceExpr) -> bool {
    fn go(a: &SourceExpr, b: &SourceExpr, env: &mut Binders) -> bool {
        use SourceExpr::*;
        match (a, b) {
            (Var(x), Var(y)) => env.vars_match(x, y),
            (IntLit(i), IntLit(j)) => i == j,
            (StrLit(s), StrLit(t)) => s == t,
            (Nil, Nil) | (Unit, Unit) => true,
            (Persisted(i), Persisted(j)) => i == j,
            (Fun(x, e), Fun(y, f)) => env.under(x, y, |env| go(e, f, env)),
            (Let(x, r1, e), Let(y, r2, f)) => go(r1, r2, env) && env.under(x, y, |env| go(e, f, env)),
            (Add(a1, a2), Add(b1, b2))
            | (Pair(a1, a2), Pair(b1, b2))
            | (Cons(a1, a2), Cons(b1, b2))
            | (Rset(a1, a2), Rset(b1, b2))
            | (App(a1, a2), App(b1, b2)) => go(a1, b1, env) && go(a2, b2, env),
            (RefNew(x), RefNew(y))
            | (RefGet(x), RefGet(y))
            | (Bracket(x), Bracket(y))
            | (Escape(x), Escape(y))
            | (Csp(x), Csp(y)) => go(x, y, env),
            _ => false,
        }
    }
    go(a, b, &mut Binders::default())
}

pub fn alpha_equal_target(a: &TargetTerm, b: &TargetTerm) -> bool {
    fn go(a: &TargetTerm, b: &TargetTerm, env: &mut Binders) -> bool {
        use TargetTerm::*;
        match (a, b) {
            (Var(x), Var(y)) => env.vars_match(x, y),
            (IntLit(i), IntLit(j)) => i == j,
            (StrLit(s), StrLit(t)) => s == t,
            (UnitLit, UnitLit) | (Nil, Nil) => true,
            (Persisted(i), Persisted(j)) => i == j,
            (Fun(x, e), Fun(y, f)) => env.under(x, y, |env| go(e, f, env)),
            (Let(x, r1, e), Let(y, r2, f)) => go(r1, r2, env) && env.under(x, y, |env| go(e, f, env)),
            (Add(a1, a2), Add(b1, b2))
            | (Pair(a1, a2), Pair(b1, b2))
            | (Cons(a1, a2), Cons(b1, b2))
            | (Rset(a1, a2), Rset(b1, b2))
            | (App(a1, a2), App(b1, b2)) => go(a1, b1, env) && go(a2, b2, env),
            (RefNew(x), RefNew(y)) | (RefGet(x), RefGet(y)) => go(x, y, env),
            (Comb(c, xs), Comb(d, ys)) => {
                c == d && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| go(x, y, env))
            }
            _ => false,
        }
    }
    go(a, b, &mut Binders::default())
}
