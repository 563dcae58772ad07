//! Inference for the two-level source language.

use crate::ast::SourceExpr;
use crate::diag::{DiagKind, Diagnostic};
use crate::types::{Level, Type, TypeEnv, TypeScheme};

use super::{generalize_against, rhs_generalizable, GenPolicy, Unifier};

/// Everything inference learned about a term, fully resolved.
#[derive(Clone, Debug)]
pub struct StagedTyping {
    pub scheme: TypeScheme,
    /// Type of every node, in preorder.
    pub node_types: Vec<Type>,
    /// Scheme given to each `let`, keyed by the let node's preorder index.
    pub let_schemes: Vec<(usize, TypeScheme)>,
}

pub fn infer_staged(
    env: &TypeEnv,
    e: &SourceExpr,
    level: Level,
    policy: GenPolicy,
) -> Result<TypeScheme, Diagnostic> {
    infer_staged_detailed(env, e, level, policy).map(|t| t.scheme)
}

pub fn infer_staged_detailed(
    env: &TypeEnv,
    e: &SourceExpr,
    level: Level,
    policy: GenPolicy,
) -> Result<StagedTyping, Diagnostic> {
    let mut u = Unifier::new();
    u.reserve(max_var(env));
    let mut cx = Infer {
        u,
        env: env.clone(),
        policy,
        node_types: Vec::new(),
        let_schemes: Vec::new(),
    };
    let t = cx.infer(e, level)?;
    let t = cx.u.resolve(&t);
    let fvs = cx.u.env_free_vars(env);
    let scheme = generalize_against(&t, &fvs, rhs_generalizable(policy, e), policy);
    let node_types = cx
        .node_types
        .iter()
        .map(|t| t.as_ref().map(|t| cx.u.resolve(t)).expect("every node typed"))
        .collect::<Vec<_>>();
    let let_schemes = cx
        .let_schemes
        .iter()
        .map(|(id, s)| (*id, cx.u.resolve_scheme(s)))
        .collect();
    Ok(StagedTyping {
        scheme,
        node_types,
        let_schemes,
    })
}

pub(crate) fn max_var(env: &TypeEnv) -> usize {
    env.schemes()
        .flat_map(|s| s.body.free_vars().into_iter().chain(s.quantified.iter().copied()))
        .max()
        .map_or(0, |v| v as usize + 1)
}

struct Infer {
    u: Unifier,
    env: TypeEnv,
    policy: GenPolicy,
    node_types: Vec<Option<Type>>,
    let_schemes: Vec<(usize, TypeScheme)>,
}

impl Infer {
    fn unify(&mut self, a: &Type, b: &Type) -> Result<(), Diagnostic> {
        self.u.unify(a, b).map_err(Diagnostic::type_error)
    }

    fn infer(&mut self, e: &SourceExpr, level: Level) -> Result<Type, Diagnostic> {
        let id = self.node_types.len();
        self.node_types.push(None);
        let t = self.infer_node(e, level).map_err(|d| d.at_node(id))?;
        self.node_types[id] = Some(t.clone());
        Ok(t)
    }

    fn infer_node(&mut self, e: &SourceExpr, level: Level) -> Result<Type, Diagnostic> {
        use SourceExpr::*;
        Ok(match e {
            Var(x) => {
                let Some((bound, scheme)) = self.env.lookup(x) else {
                    return Err(Diagnostic::new(DiagKind::UnboundVar, format!("`{x}`")));
                };
                if bound != level {
                    return Err(Diagnostic::type_error(format!(
                        "level: `{x}` is bound at level {bound} but used at level {level}{}",
                        if bound < level { " without %" } else { "" }
                    )));
                }
                let scheme = scheme.clone();
                self.u.instantiate(&scheme)
            }
            IntLit(_) => Type::Int,
            StrLit(_) => Type::Str,
            Unit => Type::Unit,
            Nil => Type::list(self.u.fresh()),
            Persisted(_) => self.u.fresh(),
            Add(a, b) => {
                let ta = self.infer(a, level)?;
                self.unify(&ta, &Type::Int).map_err(|d| d.at_node(self.id_of_last(a)))?;
                let tb = self.infer(b, level)?;
                self.unify(&tb, &Type::Int).map_err(|d| d.at_node(self.id_of_last(b)))?;
                Type::Int
            }
            Pair(a, b) => {
                let ta = self.infer(a, level)?;
                let tb = self.infer(b, level)?;
                Type::pair(ta, tb)
            }
            Cons(a, b) => {
                let ta = self.infer(a, level)?;
                let tb = self.infer(b, level)?;
                self.unify(&tb, &Type::list(ta.clone()))
                    .map_err(|d| d.at_node(self.id_of_last(b)))?;
                Type::list(ta)
            }
            RefNew(a) => Type::reference(self.infer(a, level)?),
            RefGet(a) => {
                let ta = self.infer(a, level)?;
                let elem = self.u.fresh();
                self.unify(&ta, &Type::reference(elem.clone()))?;
                elem
            }
            Rset(r, v) => {
                let tr = self.infer(r, level)?;
                let tv = self.infer(v, level)?;
                self.unify(&tr, &Type::reference(Type::list(tv.clone())))?;
                Type::list(tv)
            }
            App(f, x) => {
                let tf = self.infer(f, level)?;
                let tx = self.infer(x, level)?;
                let res = self.u.fresh();
                self.unify(&tf, &Type::arrow(tx, res.clone()))?;
                res
            }
            Fun(x, body) => {
                let a = self.u.fresh();
                self.env.push(x, level, TypeScheme::mono(a.clone()));
                let tb = self.infer(body, level);
                self.env.pop();
                Type::arrow(a, tb?)
            }
            Let(x, rhs, body) => {
                let id = self.node_types.len() - 1;
                let tr = self.infer(rhs, level)?;
                let tr = self.u.resolve(&tr);
                let fvs = self.u.env_free_vars(&self.env);
                let scheme =
                    generalize_against(&tr, &fvs, rhs_generalizable(self.policy, rhs), self.policy);
                self.let_schemes.push((id, scheme.clone()));
                self.env.push(x, level, scheme);
                let tb = self.infer(body, level);
                self.env.pop();
                tb?
            }
            Bracket(b) => {
                if level > 0 {
                    return Err(Diagnostic::type_error("nested bracket"));
                }
                Type::code(self.infer(b, level + 1)?)
            }
            Escape(a) => {
                if level == 0 {
                    return Err(Diagnostic::type_error("escape at level 0"));
                }
                let ta = self.infer(a, level - 1)?;
                let inner = self.u.fresh();
                self.unify(&ta, &Type::code(inner.clone()))?;
                inner
            }
            Csp(a) => {
                if level == 0 {
                    return Err(Diagnostic::type_error("CSP marker at level 0"));
                }
                self.infer(a, level - 1)?
            }
        })
    }

    /// Preorder index of `child`, which must be the most recently completed
    /// subtree.
    fn id_of_last(&self, child: &SourceExpr) -> usize {
        self.node_types.len() - child.node_count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_source;

    fn check(src: &str, policy: GenPolicy) -> Result<String, Diagnostic> {
        let e = parse_source(src).unwrap().tree;
        infer_staged(&TypeEnv::new(), &e, 0, policy).map(|s| s.display("code"))
    }

    fn relaxed(src: &str) -> Result<String, Diagnostic> {
        check(src, GenPolicy::Relaxed)
    }

    #[test]
    fn brackets_and_escapes() {
        assert_eq!(relaxed(".<1 + 2>.").unwrap(), "int code");
        assert_eq!(
            relaxed("let c = .<1 + 2>. in .<fun x -> .~c + x>.").unwrap(),
            "(int -> int) code"
        );
        assert_eq!(relaxed(".<fun x -> fun y -> x>.").unwrap(), "('a -> 'b -> 'a) code");
    }

    #[test]
    fn staged_let_generalizes_values() {
        assert_eq!(
            relaxed(".<let x = [] in (2::x, \"3\"::x)>.").unwrap(),
            "(int list * string list) code"
        );
        assert_eq!(
            relaxed(".<let f = fun () -> ref [] in (rset (f ()) 2, rset (f ()) \"3\")>.").unwrap(),
            "(int list * string list) code"
        );
        let d = relaxed(".<let x = ref [] in (rset x 2, rset x \"3\")>.").unwrap_err();
        assert_eq!(d.kind, DiagKind::TypeError);
    }

    #[test]
    fn csp_hides_the_cell_from_the_value_restriction() {
        assert_eq!(
            relaxed(".<let f = fun () -> % (ref []) in (rset (f ()) 2, rset (f ()) \"3\")>.").unwrap(),
            "(int list * string list) code"
        );
    }

    #[test]
    fn level_discipline() {
        let d = relaxed("let y = 1 in .<y>.").unwrap_err();
        assert!(d.message.starts_with("level"), "{}", d.message);
        assert_eq!(relaxed("let y = 1 in .<% y>.").unwrap(), "int code");
        let d = relaxed(".<fun x -> .~x>.").unwrap_err();
        assert!(d.message.starts_with("level"), "{}", d.message);
        assert_eq!(relaxed("z").unwrap_err().kind, DiagKind::UnboundVar);
    }

    #[test]
    fn policy_controls_expansive_lets() {
        let src = "let x = let r = ref [] in !r in (2::x, \"3\"::x)";
        assert!(check(src, GenPolicy::Relaxed).is_ok());
        assert!(check(src, GenPolicy::NonExpansive).is_err());
        assert!(check(src, GenPolicy::StrictValue).is_err());
        assert_eq!(check("ref []", GenPolicy::Relaxed).unwrap(), "'_a list ref");
    }

    #[test]
    fn errors_point_at_nodes() {
        let e = parse_source("(1 + \"a\")").unwrap().tree;
        let d = infer_staged(&TypeEnv::new(), &e, 0, GenPolicy::Relaxed).unwrap_err();
        assert_eq!(d.node, Some(2));
    }

    #[test]
    fn detailed_typing_is_resolved() {
        let e = parse_source("let id = fun x -> x in id 3").unwrap().tree;
        let t = infer_staged_detailed(&TypeEnv::new(), &e, 0, GenPolicy::Relaxed).unwrap();
        assert_eq!(t.node_types.len(), e.node_count());
        assert_eq!(t.node_types[0], Type::Int);
        assert_eq!(t.let_schemes.len(), 1);
        assert_eq!(t.let_schemes[0].1.display("code"), "'a -> 'a");
    }
}
