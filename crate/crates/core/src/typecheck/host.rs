//! Single-level inference for target terms, with the combinators as
//! polymorphic constants.

use crate::ast::{Comb, TargetTerm};
use crate::diag::{DiagKind, Diagnostic};
use crate::types::{Type, TypeEnv, TypeScheme};

use super::staged::max_var;
use super::{generalize_against, rhs_generalizable_target, GenPolicy, Unifier};

/// Closed scheme of a combinator constant, over variables 0 and 1.
pub fn comb_scheme(c: Comb) -> TypeScheme {
    let (a, b) = (Type::Var(0), Type::Var(1));
    let cod = Type::code;
    let arr = Type::arrow;
    let body = match c {
        Comb::Int => arr(Type::Int, cod(Type::Int)),
        Comb::Str => arr(Type::Str, cod(Type::Str)),
        Comb::Add => arr(cod(Type::Int), arr(cod(Type::Int), cod(Type::Int))),
        Comb::Lam => arr(arr(cod(a.clone()), cod(b.clone())), cod(arr(a, b))),
        Comb::App => arr(cod(arr(a.clone(), b.clone())), arr(cod(a), cod(b))),
        Comb::Pair => arr(cod(a.clone()), arr(cod(b.clone()), cod(Type::pair(a, b)))),
        Comb::Nil => cod(Type::list(a)),
        Comb::Cons => arr(cod(a.clone()), arr(cod(Type::list(a.clone())), cod(Type::list(a)))),
        Comb::RefNew => arr(cod(a.clone()), cod(Type::reference(a))),
        Comb::RefGet => arr(cod(Type::reference(a.clone())), cod(a)),
        Comb::Rset => arr(
            cod(Type::reference(Type::list(a.clone()))),
            arr(cod(a.clone()), cod(Type::list(a))),
        ),
        Comb::Csp => arr(a.clone(), cod(a)),
        Comb::NewScope => arr(arr(Type::scope(a.clone()), cod(a.clone())), cod(a)),
        Comb::Genlet => arr(Type::scope(a), arr(cod(b.clone()), cod(b))),
        Comb::NewFunScope => arr(arr(Type::fun_scope(a.clone()), cod(a.clone())), cod(a)),
        // 'w funscope -> ('a cod -> 'b cod) -> ('a -> 'b) cod, with 'w = 2
        Comb::GenletFun => arr(
            Type::fun_scope(Type::Var(2)),
            arr(arr(cod(a.clone()), cod(b.clone())), cod(arr(a, b))),
        ),
    };
    let mut quantified = Vec::new();
    body.vars_in_order(&mut quantified);
    TypeScheme { quantified, body }
}

pub fn infer_host(env: &TypeEnv, t: &TargetTerm, policy: GenPolicy) -> Result<TypeScheme, Diagnostic> {
    infer_host_detailed(env, t, policy).map(|(s, _)| s)
}

/// Also returns the scheme given to every `let`, in preorder of the let
/// nodes.
pub fn infer_host_detailed(
    env: &TypeEnv,
    t: &TargetTerm,
    policy: GenPolicy,
) -> Result<(TypeScheme, Vec<(usize, TypeScheme)>), Diagnostic> {
    let mut u = Unifier::with_code_kw("cod");
    u.reserve(max_var(env));
    let mut cx = Host {
        u,
        env: env.clone(),
        policy,
        next_id: 0,
        let_schemes: Vec::new(),
    };
    let ty = cx.infer(t)?;
    let ty = cx.u.resolve(&ty);
    let fvs = cx.u.env_free_vars(env);
    let scheme = generalize_against(&ty, &fvs, rhs_generalizable_target(policy, t), policy);
    let lets = cx
        .let_schemes
        .iter()
        .map(|(id, s)| (*id, cx.u.resolve_scheme(s)))
        .collect();
    Ok((scheme, lets))
}

struct Host {
    u: Unifier,
    env: TypeEnv,
    policy: GenPolicy,
    next_id: usize,
    let_schemes: Vec<(usize, TypeScheme)>,
}

impl Host {
    fn unify(&mut self, a: &Type, b: &Type) -> Result<(), Diagnostic> {
        self.u.unify(a, b).map_err(Diagnostic::type_error)
    }

    fn infer(&mut self, t: &TargetTerm) -> Result<Type, Diagnostic> {
        let id = self.next_id;
        self.next_id += 1;
        self.infer_node(t, id).map_err(|d| d.at_node(id))
    }

    fn infer_node(&mut self, t: &TargetTerm, id: usize) -> Result<Type, Diagnostic> {
        use TargetTerm::*;
        Ok(match t {
            Var(x) => {
                let Some((_, scheme)) = self.env.lookup(x) else {
                    return Err(Diagnostic::new(DiagKind::UnboundVar, format!("`{x}`")));
                };
                let scheme = scheme.clone();
                self.u.instantiate(&scheme)
            }
            IntLit(_) => Type::Int,
            StrLit(_) => Type::Str,
            UnitLit => Type::Unit,
            Nil => Type::list(self.u.fresh()),
            Persisted(_) => self.u.fresh(),
            Add(a, b) => {
                let ta = self.infer(a)?;
                self.unify(&ta, &Type::Int)?;
                let tb = self.infer(b)?;
                self.unify(&tb, &Type::Int)?;
                Type::Int
            }
            Pair(a, b) => {
                let ta = self.infer(a)?;
                Type::pair(ta, self.infer(b)?)
            }
            Cons(a, b) => {
                let ta = self.infer(a)?;
                let tb = self.infer(b)?;
                self.unify(&tb, &Type::list(ta.clone()))?;
                Type::list(ta)
            }
            RefNew(a) => Type::reference(self.infer(a)?),
            RefGet(a) => {
                let ta = self.infer(a)?;
                let elem = self.u.fresh();
                self.unify(&ta, &Type::reference(elem.clone()))?;
                elem
            }
            Rset(r, v) => {
                let tr = self.infer(r)?;
                let tv = self.infer(v)?;
                self.unify(&tr, &Type::reference(Type::list(tv.clone())))?;
                Type::list(tv)
            }
            App(f, x) => {
                let tf = self.infer(f)?;
                let tx = self.infer(x)?;
                let res = self.u.fresh();
                self.unify(&tf, &Type::arrow(tx, res.clone()))?;
                res
            }
            Fun(x, body) => {
                let a = self.u.fresh();
                self.env.push(x, 0, TypeScheme::mono(a.clone()));
                let tb = self.infer(body);
                self.env.pop();
                Type::arrow(a, tb?)
            }
            Let(x, rhs, body) => {
                let tr = self.infer(rhs)?;
                let tr = self.u.resolve(&tr);
                let fvs = self.u.env_free_vars(&self.env);
                let flag = rhs_generalizable_target(self.policy, rhs);
                let scheme = generalize_against(&tr, &fvs, flag, self.policy);
                self.let_schemes.push((id, scheme.clone()));
                self.env.push(x, 0, scheme);
                let tb = self.infer(body);
                self.env.pop();
                tb?
            }
            Comb(c, args) => {
                let mut tf = self.u.instantiate(&comb_scheme(*c));
                for arg in args {
                    let ta = self.infer(arg)?;
                    let res = self.u.fresh();
                    self.unify(&tf, &Type::arrow(ta, res.clone()))?;
                    tf = res;
                }
                tf
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_target;

    fn host(src: &str) -> Result<String, Diagnostic> {
        let t = parse_target(src).unwrap().tree;
        infer_host(&TypeEnv::new(), &t, GenPolicy::Relaxed).map(|s| s.display("cod"))
    }

    #[test]
    fn combinator_schemes_print() {
        assert_eq!(comb_scheme(Comb::Lam).display("cod"), "('a cod -> 'b cod) -> ('a -> 'b) cod");
        assert_eq!(
            comb_scheme(Comb::GenletFun).display("cod"),
            "'a funscope -> ('b cod -> 'c cod) -> ('b -> 'c) cod"
        );
        assert_eq!(comb_scheme(Comb::Nil).display("cod"), "'a list cod");
    }

    #[test]
    fn let_inserted_nil_generalizes() {
        let src = "new_scope @@ fun p -> let x = genlet p nil in pair (cons (int 2) x) (cons (str \"3\") x)";
        assert_eq!(host(src).unwrap(), "(int list * string list) cod");
    }

    #[test]
    fn let_inserted_cell_does_not() {
        let src = "new_scope @@ fun p -> let x = genlet p (ref_ nil) in \
                   pair (rset_ x (int 2)) (rset_ x (str \"3\"))";
        assert_eq!(host(src).unwrap_err().kind, DiagKind::TypeError);
    }

    #[test]
    fn let_inserted_function_does_not() {
        let src = "new_scope (fun p -> let f = genlet p (lam (fun x -> x)) in \
                   pair (app f (int 1)) (app f (str \"3\")))";
        assert!(host(src).is_err());
        let thunked = "new_funscope @@ fun p -> let f = fun () -> genletfun p (fun x -> x) in \
                       pair (app (f ()) (int 1)) (app (f ()) (str \"3\"))";
        assert_eq!(host(thunked).unwrap(), "(int * string) cod");
    }

    #[test]
    fn unbound_variable_reported() {
        assert_eq!(host("lam (fun x -> y)").unwrap_err().kind, DiagKind::UnboundVar);
    }
}
