//! Replays a recorded staged typing against the rules, independently of the
//! unifier that produced it.

use std::collections::BTreeMap;

use crate::ast::SourceExpr;
use crate::types::{Level, TyVar, Type, TypeEnv, TypeScheme};

use super::staged::StagedTyping;
use super::{generalize_against, rhs_generalizable, GenPolicy};

/// Checks that `typing` is a derivation for `e`: every node's type satisfies
/// its rule given its children's types, every variable occurrence is an
/// instance of its binder's scheme, and every let scheme is exactly what the
/// policy allows.
pub fn validate_staged(
    env: &TypeEnv,
    e: &SourceExpr,
    level: Level,
    policy: GenPolicy,
    typing: &StagedTyping,
) -> Result<(), String> {
    let lets: BTreeMap<usize, &TypeScheme> = typing.let_schemes.iter().map(|(i, s)| (*i, s)).collect();
    let mut v = Validator {
        types: &typing.node_types,
        lets,
        env: env.clone(),
        policy,
        next: 0,
    };
    v.check(e, level)?;
    if v.next != typing.node_types.len() {
        return Err(format!("{} node types recorded for {} nodes", typing.node_types.len(), v.next));
    }
    Ok(())
}

struct Validator<'a> {
    types: &'a [Type],
    lets: BTreeMap<usize, &'a TypeScheme>,
    env: TypeEnv,
    policy: GenPolicy,
    next: usize,
}

fn expect(id: usize, got: &Type, want: &Type) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("node {id}: recorded {got}, rule requires {want}"))
    }
}

/// One-way matching of `pattern` (whose `vars` may be instantiated) against
/// `t`.
fn matches(pattern: &Type, t: &Type, vars: &[TyVar], inst: &mut BTreeMap<TyVar, Type>) -> bool {
    match (pattern, t) {
        (Type::Var(v), _) if vars.contains(v) => match inst.get(v) {
            Some(bound) => bound == t,
            None => {
                inst.insert(*v, t.clone());
                true
            }
        },
        (Type::Var(a), Type::Var(b)) => a == b,
        (Type::Int, Type::Int) | (Type::Str, Type::Str) | (Type::Unit, Type::Unit) => true,
        (Type::List(p), Type::List(q))
        | (Type::Ref(p), Type::Ref(q))
        | (Type::Code(p), Type::Code(q))
        | (Type::Scope(p), Type::Scope(q))
        | (Type::FunScope(p), Type::FunScope(q)) => matches(p, q, vars, inst),
        (Type::Pair(p1, p2), Type::Pair(q1, q2)) | (Type::Arrow(p1, p2), Type::Arrow(q1, q2)) => {
            matches(p1, q1, vars, inst) && matches(p2, q2, vars, inst)
        }
        _ => false,
    }
}

impl Validator<'_> {
    fn check(&mut self, e: &SourceExpr, level: Level) -> Result<Type, String> {
        use SourceExpr::*;
        let id = self.next;
        self.next += 1;
        let here = self
            .types
            .get(id)
            .cloned()
            .ok_or_else(|| format!("node {id}: no recorded type"))?;
        match e {
            Var(x) => {
                let (bound, scheme) = self.env.lookup(x).ok_or_else(|| format!("node {id}: `{x}` unbound"))?;
                if bound != level {
                    return Err(format!("node {id}: `{x}` used across levels"));
                }
                if !matches(&scheme.body, &here, &scheme.quantified, &mut BTreeMap::new()) {
                    return Err(format!("node {id}: {here} is not an instance of {scheme}"));
                }
            }
            IntLit(_) => expect(id, &here, &Type::Int)?,
            StrLit(_) => expect(id, &here, &Type::Str)?,
            Unit => expect(id, &here, &Type::Unit)?,
            Nil => {
                if !matches!(here, Type::List(_)) {
                    return Err(format!("node {id}: [] recorded as {here}"));
                }
            }
            Persisted(_) => {}
            Add(a, b) => {
                expect(id, &self.check(a, level)?, &Type::Int)?;
                expect(id, &self.check(b, level)?, &Type::Int)?;
                expect(id, &here, &Type::Int)?;
            }
            Pair(a, b) => {
                let ta = self.check(a, level)?;
                let tb = self.check(b, level)?;
                expect(id, &here, &Type::pair(ta, tb))?;
            }
            Cons(a, b) => {
                let ta = self.check(a, level)?;
                let tb = self.check(b, level)?;
                expect(id, &tb, &Type::list(ta.clone()))?;
                expect(id, &here, &Type::list(ta))?;
            }
            RefNew(a) => {
                let ta = self.check(a, level)?;
                expect(id, &here, &Type::reference(ta))?;
            }
            RefGet(a) => {
                let ta = self.check(a, level)?;
                expect(id, &ta, &Type::reference(here.clone()))?;
            }
            Rset(r, v) => {
                let tr = self.check(r, level)?;
                let tv = self.check(v, level)?;
                expect(id, &tr, &Type::reference(Type::list(tv.clone())))?;
                expect(id, &here, &Type::list(tv))?;
            }
            App(f, x) => {
                let tf = self.check(f, level)?;
                let tx = self.check(x, level)?;
                expect(id, &tf, &Type::arrow(tx, here.clone()))?;
            }
            Fun(x, body) => {
                let Type::Arrow(param, _) = &here else {
                    return Err(format!("node {id}: function recorded as {here}"));
                };
                self.env.push(x, level, TypeScheme::mono((**param).clone()));
                let tb = self.check(body, level);
                self.env.pop();
                expect(id, &here, &Type::arrow((**param).clone(), tb?))?;
            }
            Let(x, rhs, body) => {
                let scheme = (*self.lets.get(&id).ok_or_else(|| format!("node {id}: no let scheme"))?).clone();
                let tr = self.check(rhs, level)?;
                expect(id, &scheme.body, &tr)?;
                let fvs = self.env.free_vars();
                let allowed = generalize_against(&tr, &fvs, rhs_generalizable(self.policy, rhs), self.policy);
                if allowed.quantified != scheme.quantified {
                    return Err(format!(
                        "node {id}: let quantifies {:?}, policy allows {:?}",
                        scheme.quantified, allowed.quantified
                    ));
                }
                self.env.push(x, level, scheme);
                let tb = self.check(body, level);
                self.env.pop();
                expect(id, &here, &tb?)?;
            }
            Bracket(b) => {
                let tb = self.check(b, level + 1)?;
                expect(id, &here, &Type::code(tb))?;
            }
            Escape(a) => {
                let ta = self.check(a, level.checked_sub(1).ok_or("escape at level 0")?)?;
                expect(id, &ta, &Type::code(here.clone()))?;
            }
            Csp(a) => {
                let ta = self.check(a, level.checked_sub(1).ok_or("CSP marker at level 0")?)?;
                expect(id, &here, &ta)?;
            }
        }
        Ok(here)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_source;
    use crate::typecheck::infer_staged_detailed;

    #[test]
    fn inferred_derivations_validate() {
        for src in [
            "let id = fun x -> x in (id 1, id \"a\")",
            ".<let x = [] in (2::x, \"3\"::x)>.",
            "let c = .<1 + 2>. in .<fun x -> .~c + x>.",
            "let r = ref [] in .<rset (% r) 0>.",
            "let x = let r = ref [] in !r in (2::x, \"3\"::x)",
        ] {
            let e = parse_source(src).unwrap().tree;
            let env = TypeEnv::new();
            let typing = infer_staged_detailed(&env, &e, 0, GenPolicy::Relaxed).unwrap();
            validate_staged(&env, &e, 0, GenPolicy::Relaxed, &typing).unwrap();
        }
    }

    #[test]
    fn tampered_derivation_is_rejected() {
        let e = parse_source("(1, \"a\")").unwrap().tree;
        let env = TypeEnv::new();
        let mut typing = infer_staged_detailed(&env, &e, 0, GenPolicy::Relaxed).unwrap();
        typing.node_types[2] = Type::Int;
        assert!(validate_staged(&env, &e, 0, GenPolicy::Relaxed, &typing).is_err());
    }
}
