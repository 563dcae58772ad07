//! Code comparisons coarser than alpha-equivalence.

use std::collections::BTreeSet;

use crate::ast::{free_vars, Name, SourceExpr};

/// Drops `let f = fun ... in e` where `f` does not occur in `e`. A function
/// let that is never used generates no binding at all, because insertion
/// happens at the first use.
pub fn strip_dead_fun_lets(e: &SourceExpr) -> SourceExpr {
    use SourceExpr::*;
    let s = |e: &SourceExpr| Box::new(strip_dead_fun_lets(e));
    match e {
        Let(x, rhs, body) if matches!(**rhs, Fun(..)) && !free_vars(body).contains(x) => strip_dead_fun_lets(body),
        Let(x, a, b) => Let(x.clone(), s(a), s(b)),
        Fun(x, a) => Fun(x.clone(), s(a)),
        Add(a, b) => Add(s(a), s(b)),
        Pair(a, b) => Pair(s(a), s(b)),
        Cons(a, b) => Cons(s(a), s(b)),
        Rset(a, b) => Rset(s(a), s(b)),
        App(a, b) => App(s(a), s(b)),
        RefNew(a) => RefNew(s(a)),
        RefGet(a) => RefGet(s(a)),
        Bracket(a) => Bracket(s(a)),
        Escape(a) => Escape(s(a)),
        Csp(a) => Csp(s(a)),
        leaf => leaf.clone(),
    }
}

/// Alpha-equivalence that also identifies chains of adjacent lets differing
/// only in the order of bindings that do not depend on each other.
pub fn equal_modulo_let_reorder(a: &SourceExpr, b: &SourceExpr) -> bool {
    eq(a, b, &mut Vec::new())
}

fn var_match(env: &[(Name, Name)], x: &str, y: &str) -> bool {
    let l = env.iter().rposition(|(a, _)| a == x);
    let r = env.iter().rposition(|(_, b)| b == y);
    match (l, r) {
        (Some(i), Some(j)) => i == j,
        (None, None) => x == y,
        _ => false,
    }
}

fn under(env: &mut Vec<(Name, Name)>, x: &str, y: &str, f: impl FnOnce(&mut Vec<(Name, Name)>) -> bool) -> bool {
    env.push((x.to_string(), y.to_string()));
    let r = f(env);
    env.pop();
    r
}

fn eq(a: &SourceExpr, b: &SourceExpr, env: &mut Vec<(Name, Name)>) -> bool {
    use SourceExpr::*;
    match (a, b) {
        (Let(..), Let(..)) => {
            let (ca, ba) = chain(a);
            let (cb, bb) = chain(b);
            ca.len() == cb.len() && eq_chain(&ca, ba, &cb, bb, &mut vec![false; cb.len()], env)
        }
        (Var(x), Var(y)) => var_match(env, x, y),
        (IntLit(i), IntLit(j)) => i == j,
        (StrLit(s), StrLit(t)) => s == t,
        (Nil, Nil) | (Unit, Unit) => true,
        (Persisted(i), Persisted(j)) => i == j,
        (Fun(x, e), Fun(y, f)) => under(env, x, y, |env| eq(e, f, env)),
        (Add(a1, a2), Add(b1, b2))
        | (Pair(a1, a2), Pair(b1, b2))
        | (Cons(a1, a2), Cons(b1, b2))
        | (Rset(a1, a2), Rset(b1, b2))
        | (App(a1, a2), App(b1, b2)) => eq(a1, b1, env) && eq(a2, b2, env),
        (RefNew(x), RefNew(y))
        | (RefGet(x), RefGet(y))
        | (Bracket(x), Bracket(y))
        | (Escape(x), Escape(y))
        | (Csp(x), Csp(y)) => eq(x, y, env),
        _ => false,
    }
}

type Binding<'a> = (&'a Name, &'a SourceExpr);

fn chain(mut e: &SourceExpr) -> (Vec<Binding<'_>>, &SourceExpr) {
    let mut out = Vec::new();
    while let SourceExpr::Let(x, rhs, body) = e {
        out.push((x, &**rhs));
        e = body;
    }
    (out, e)
}

/// Binding `j` of `c` may move before every unused binding ahead of it when
/// it neither reads nor rebinds their names, and none of them reads its name.
fn ready(c: &[Binding<'_>], used: &[bool], j: usize) -> bool {
    let fv_j: BTreeSet<Name> = free_vars(c[j].1);
    (0..j).filter(|&i| !used[i]).all(|i| {
        let (xi, ri) = c[i];
        !fv_j.contains(xi) && xi != c[j].0 && !free_vars(ri).contains(c[j].0)
    })
}

/// Matches the bindings of `a` in order against some dependency-respecting
/// permutation of `b`'s, backtracking over candidates.
fn eq_chain(
    a: &[Binding<'_>],
    body_a: &SourceExpr,
    b: &[Binding<'_>],
    body_b: &SourceExpr,
    used: &mut Vec<bool>,
    env: &mut Vec<(Name, Name)>,
) -> bool {
    let Some(((xa, ra), rest)) = a.split_first() else {
        return eq(body_a, body_b, env);
    };
    for j in 0..b.len() {
        if used[j] || !ready(b, used, j) || !eq(ra, b[j].1, env) {
            continue;
        }
        used[j] = true;
        let ok = under(env, xa, b[j].0, |env| eq_chain(rest, body_a, b, body_b, used, env));
        used[j] = false;
        if ok {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_plain;

    fn p(s: &str) -> SourceExpr {
        parse_plain(s).unwrap().tree
    }

    #[test]
    fn independent_lets_commute() {
        let a = p("let a = 1 in let b = \"s\" in (a, b)");
        let b = p("let y = \"s\" in let x = 1 in (x, y)");
        assert!(equal_modulo_let_reorder(&a, &b));
    }

    #[test]
    fn dependent_lets_do_not_commute() {
        let a = p("let a = 1 in let b = a + 1 in (a, b)");
        let b = p("let b = a + 1 in let a = 1 in (a, b)");
        assert!(!equal_modulo_let_reorder(&a, &b));
    }

    #[test]
    fn identical_right_hand_sides_backtrack() {
        let a = p("let t2 = fun x -> x in let t4 = fun x -> x in (t4 1, t2 \"3\")");
        let b = p("let u = fun y -> y in let v = fun z -> z in (u 1, v \"3\")");
        assert!(equal_modulo_let_reorder(&a, &b));
    }

    #[test]
    fn reordering_is_still_alpha_strict() {
        assert!(!equal_modulo_let_reorder(&p("let a = 1 in a"), &p("let a = 2 in a")));
        assert!(!equal_modulo_let_reorder(&p("fun x -> y"), &p("fun y -> y")));
    }

    #[test]
    fn unused_function_lets_are_dropped() {
        let e = strip_dead_fun_lets(&p("let f = fun x -> x in let g = fun y -> y in g 1"));
        assert!(equal_modulo_let_reorder(&e, &p("let g = fun y -> y in g 1")));
        let kept = p("let f = 1 in 2");
        assert_eq!(strip_dead_fun_lets(&kept), kept);
    }
}
