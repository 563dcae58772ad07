use std::collections::{BTreeMap, BTreeSet};

use crate::types::{Namer, TyVar, Type, TypeEnv, TypeScheme};

/// Substitution store: one mutable cell per type variable.
pub struct Unifier {
    cells: Vec<Option<Type>>,
    /// Spelling of the code type constructor in messages.
    code_kw: &'static str,
}

impl Default for Unifier {
    fn default() -> Self {
        Unifier {
            cells: Vec::new(),
            code_kw: "code",
        }
    }
}

impl Unifier {
    pub fn new() -> Self {
        Unifier::default()
    }

    pub fn with_code_kw(code_kw: &'static str) -> Self {
        Unifier {
            cells: Vec::new(),
            code_kw,
        }
    }

    /// Makes variables `0..n` valid, so that types built outside this store
    /// (an initial environment) can be unified against.
    pub fn reserve(&mut self, n: usize) {
        if self.cells.len() < n {
            self.cells.resize(n, None);
        }
    }

    pub fn fresh(&mut self) -> Type {
        self.cells.push(None);
        Type::Var((self.cells.len() - 1) as TyVar)
    }

    /// Follows variable bindings at the head of `t`, compressing the chain.
    fn head(&mut self, t: &Type) -> Type {
        let Type::Var(v) = t else { return t.clone() };
        match self.cells[*v as usize].clone() {
            None => t.clone(),
            Some(bound) => {
                let end = self.head(&bound);
                self.cells[*v as usize] = Some(end.clone());
                end
            }
        }
    }

    /// Applies the current substitution everywhere in `t`.
    pub fn resolve(&mut self, t: &Type) -> Type {
        match self.head(t) {
            Type::Var(v) => Type::Var(v),
            Type::Int => Type::Int,
            Type::Str => Type::Str,
            Type::Unit => Type::Unit,
            Type::List(a) => Type::list(self.resolve(&a)),
            Type::Ref(a) => Type::reference(self.resolve(&a)),
            Type::Code(a) => Type::code(self.resolve(&a)),
            Type::Scope(a) => Type::scope(self.resolve(&a)),
            Type::FunScope(a) => Type::fun_scope(self.resolve(&a)),
            Type::Pair(a, b) => Type::pair(self.resolve(&a), self.resolve(&b)),
            Type::Arrow(a, b) => Type::arrow(self.resolve(&a), self.resolve(&b)),
        }
    }

    pub fn resolve_scheme(&mut self, s: &TypeScheme) -> TypeScheme {
        TypeScheme {
            quantified: s.quantified.clone(),
            body: self.resolve(&s.body),
        }
    }

    fn occurs(&mut self, v: TyVar, t: &Type) -> bool {
        match self.head(t) {
            Type::Var(w) => v == w,
            Type::Int | Type::Str | Type::Unit => false,
            Type::List(a) | Type::Ref(a) | Type::Code(a) | Type::Scope(a) | Type::FunScope(a) => {
                self.occurs(v, &a)
            }
            Type::Pair(a, b) | Type::Arrow(a, b) => self.occurs(v, &a) || self.occurs(v, &b),
        }
    }

    pub fn unify(&mut self, a: &Type, b: &Type) -> Result<(), String> {
        let (x, y) = (self.head(a), self.head(b));
        match (&x, &y) {
            (Type::Var(v), Type::Var(w)) if v == w => Ok(()),
            (Type::Var(v), t) | (t, Type::Var(v)) => {
                if self.occurs(*v, t) {
                    return Err(format!(
                        "occurs check: {} occurs in {}",
                        self.show_pair(&Type::Var(*v), t).0,
                        self.show_pair(&Type::Var(*v), t).1
                    ));
                }
                self.cells[*v as usize] = Some(t.clone());
                Ok(())
            }
            (Type::Int, Type::Int) | (Type::Str, Type::Str) | (Type::Unit, Type::Unit) => Ok(()),
            (Type::List(p), Type::List(q))
            | (Type::Ref(p), Type::Ref(q))
            | (Type::Code(p), Type::Code(q))
            | (Type::Scope(p), Type::Scope(q))
            | (Type::FunScope(p), Type::FunScope(q)) => self.unify(p, q),
            (Type::Pair(p1, p2), Type::Pair(q1, q2)) | (Type::Arrow(p1, p2), Type::Arrow(q1, q2)) => {
                self.unify(p1, q1)?;
                self.unify(p2, q2)
            }
            _ => {
                let (l, r) = self.show_pair(&x, &y);
                Err(format!("cannot unify {l} with {r}"))
            }
        }
    }

    /// Renders two types with a shared variable naming.
    pub fn show_pair(&mut self, a: &Type, b: &Type) -> (String, String) {
        let (a, b) = (self.resolve(a), self.resolve(b));
        let mut namer = Namer::default();
        (namer.render(&a, self.code_kw), namer.render(&b, self.code_kw))
    }

    /// Free variables of the environment under the current substitution.
    pub fn env_free_vars(&mut self, env: &TypeEnv) -> BTreeSet<TyVar> {
        let schemes: Vec<TypeScheme> = env.schemes().cloned().collect();
        let mut out = BTreeSet::new();
        for s in schemes {
            let mut body_vars = Vec::new();
            // quantified variables are never bound in the store
            self.resolve(&s.body).vars_in_order(&mut body_vars);
            out.extend(body_vars.into_iter().filter(|v| !s.quantified.contains(v)));
        }
        out
    }

    pub fn instantiate(&mut self, s: &TypeScheme) -> Type {
        let map: BTreeMap<TyVar, Type> = s.quantified.iter().map(|v| (*v, self.fresh())).collect();
        s.body.substitute(&map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn occurs_check_fails() {
        let mut u = Unifier::new();
        let a = u.fresh();
        let err = u.unify(&a, &Type::list(a.clone())).unwrap_err();
        assert!(err.contains("occurs check"), "{err}");
    }

    #[test]
    fn chains_resolve() {
        let mut u = Unifier::new();
        let (a, b, c) = (u.fresh(), u.fresh(), u.fresh());
        u.unify(&a, &b).unwrap();
        u.unify(&b, &c).unwrap();
        u.unify(&c, &Type::Int).unwrap();
        assert_eq!(u.resolve(&Type::pair(a, b)), Type::pair(Type::Int, Type::Int));
    }

    #[test]
    fn mismatch_names_both_sides() {
        let mut u = Unifier::new();
        let err = u.unify(&Type::list(Type::Int), &Type::list(Type::Str)).unwrap_err();
        assert_eq!(err, "cannot unify int with string");
    }
}
