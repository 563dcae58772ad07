//! Types, type schemes and environments shared by both type checkers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub type TyVar = u32;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Int,
    Str,
    Unit,
    List(Box<Type>),
    Pair(Box<Type>, Box<Type>),
    Arrow(Box<Type>, Box<Type>),
    Ref(Box<Type>),
    /// `t code` in the staged language, `t cod` in the host language.
    Code(Box<Type>),
    Scope(Box<Type>),
    FunScope(Box<Type>),
    Var(TyVar),
}

impl Type {
    pub fn list(t: Type) -> Type {
        Type::List(Box::new(t))
    }
    pub fn pair(a: Type, b: Type) -> Type {
        Type::Pair(Box::new(a), Box::new(b))
    }
    pub fn arrow(a: Type, b: Type) -> Type {
        Type::Arrow(Box::new(a), Box::new(b))
    }
    pub fn reference(t: Type) -> Type {
        Type::Ref(Box::new(t))
    }
    pub fn code(t: Type) -> Type {
        Type::Code(Box::new(t))
    }
    pub fn scope(t: Type) -> Type {
        Type::Scope(Box::new(t))
    }
    pub fn fun_scope(t: Type) -> Type {
        Type::FunScope(Box::new(t))
    }

    /// Type variables in order of first occurrence, left to right.
    pub fn vars_in_order(&self, out: &mut Vec<TyVar>) {
        match self {
            Type::Var(v) => {
                if !out.contains(v) {
                    out.push(*v);
                }
            }
            Type::Int | Type::Str | Type::Unit => {}
            Type::List(a) | Type::Ref(a) | Type::Code(a) | Type::Scope(a) | Type::FunScope(a) => {
                a.vars_in_order(out)
            }
            Type::Pair(a, b) | Type::Arrow(a, b) => {
                a.vars_in_order(out);
                b.vars_in_order(out);
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<TyVar> {
        let mut v = Vec::new();
        self.vars_in_order(&mut v);
        v.into_iter().collect()
    }

    /// True for types built only from int, string, unit, lists and pairs.
    pub fn is_first_order(&self) -> bool {
        match self {
            Type::Int | Type::Str | Type::Unit => true,
            Type::List(a) => a.is_first_order(),
            Type::Pair(a, b) => a.is_first_order() && b.is_first_order(),
            _ => false,
        }
    }

    pub fn substitute(&self, map: &BTreeMap<TyVar, Type>) -> Type {
        match self {
            Type::Var(v) => map.get(v).cloned().unwrap_or(Type::Var(*v)),
            Type::Int | Type::Str | Type::Unit => self.clone(),
            Type::List(a) => Type::list(a.substitute(map)),
            Type::Ref(a) => Type::reference(a.substitute(map)),
            Type::Code(a) => Type::code(a.substitute(map)),
            Type::Scope(a) => Type::scope(a.substitute(map)),
            Type::FunScope(a) => Type::fun_scope(a.substitute(map)),
            Type::Pair(a, b) => Type::pair(a.substitute(map), b.substitute(map)),
            Type::Arrow(a, b) => Type::arrow(a.substitute(map), b.substitute(map)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeScheme {
    pub quantified: Vec<TyVar>,
    pub body: Type,
}

impl TypeScheme {
    pub fn mono(t: Type) -> Self {
        TypeScheme { quantified: vec![], body: t }
    }

    pub fn free_vars(&self) -> BTreeSet<TyVar> {
        let mut fv = self.body.free_vars();
        for q in &self.quantified {
            fv.remove(q);
        }
        fv
    }

    /// Renders the scheme with quantified variables named `'a`, `'b`, ... in
    /// order of appearance and unquantified ones `'_a`, `'_b`, ... .
    /// `code_kw` names the code type constructor (`code` or `cod`).
    pub fn display(&self, code_kw: &str) -> String {
        let mut names = Namer::default();
        let mut order = Vec::new();
        self.body.vars_in_order(&mut order);
        for v in order {
            names.name(v, !self.quantified.contains(&v));
        }
        names.render(&self.body, code_kw)
    }
}

impl fmt::Display for TypeScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display("code"))
    }
}

/// Assigns printable names to type variables.
#[derive(Default)]
pub struct Namer {
    names: BTreeMap<TyVar, String>,
    poly: usize,
    weak: usize,
}

fn letters(mut n: usize) -> String {
    let mut s = String::new();
    loop {
        s.insert(0, (b'a' + (n % 26) as u8) as char);
        if n < 26 {
            break;
        }
        n = n / 26 - 1;
    }
    s
}

impl Namer {
    pub fn name(&mut self, v: TyVar, weak: bool) -> String {
        if let Some(n) = self.names.get(&v) {
            return n.clone();
        }
        let n = if weak {
            self.weak += 1;
            format!("'_{}", letters(self.weak - 1))
        } else {
            self.poly += 1;
            format!("'{}", letters(self.poly - 1))
        };
        self.names.insert(v, n.clone());
        n
    }

    pub fn render(&mut self, t: &Type, code_kw: &str) -> String {
        self.render_at(t, code_kw, 0)
    }

    // 0: arrow context, 1: product operand, 2: constructor argument
    fn render_at(&mut self, t: &Type, kw: &str, ctx: u8) -> String {
        let wrap = |s: String, mine: u8| if mine < ctx { format!("({s})") } else { s };
        match t {
            Type::Int => "int".into(),
            Type::Str => "string".into(),
            Type::Unit => "unit".into(),
            Type::Var(v) => self.name(*v, false),
            Type::List(a) => format!("{} list", self.render_at(a, kw, 2)),
            Type::Ref(a) => format!("{} ref", self.render_at(a, kw, 2)),
            Type::Code(a) => format!("{} {kw}", self.render_at(a, kw, 2)),
            Type::Scope(a) => format!("{} scope", self.render_at(a, kw, 2)),
            Type::FunScope(a) => format!("{} funscope", self.render_at(a, kw, 2)),
            Type::Pair(a, b) => {
                let s = format!("{} * {}", self.render_at(a, kw, 2), self.render_at(b, kw, 2));
                wrap(s, 1)
            }
            Type::Arrow(a, b) => {
                let s = format!("{} -> {}", self.render_at(a, kw, 1), self.render_at(b, kw, 0));
                wrap(s, 0)
            }
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&Namer::default().render(self, "code"))
    }
}

/// Stage level of a binding or judgment.
pub type Level = u8;

/// Typing environment; later entries shadow earlier ones.
#[derive(Clone, Debug, Default)]
pub struct TypeEnv {
    entries: Vec<(String, Level, TypeScheme)>,
}

impl TypeEnv {
    pub fn new() -> Self {
        TypeEnv::default()
    }

    pub fn push(&mut self, name: &str, level: Level, scheme: TypeScheme) {
        self.entries.push((name.to_string(), level, scheme));
    }

    pub fn pop(&mut self) {
        self.entries.pop();
    }

    pub fn lookup(&self, name: &str) -> Option<(Level, &TypeScheme)> {
        self.entries
            .iter()
            .rev()
            .find(|(n, _, _)| n == name)
            .map(|(_, l, s)| (*l, s))
    }

    pub fn schemes(&self) -> impl Iterator<Item = &TypeScheme> {
        self.entries.iter().map(|(_, _, s)| s)
    }

    pub fn free_vars(&self) -> BTreeSet<TyVar> {
        self.schemes().flat_map(TypeScheme::free_vars).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prints_like_ocaml() {
        let t = Type::code(Type::pair(Type::list(Type::Int), Type::list(Type::Str)));
        assert_eq!(t.to_string(), "(int list * string list) code");
        let k = TypeScheme {
            quantified: vec![7, 3],
            body: Type::code(Type::arrow(Type::Var(7), Type::arrow(Type::Var(3), Type::Var(7)))),
        };
        assert_eq!(k.display("code"), "('a -> 'b -> 'a) code");
        assert_eq!(k.display("cod"), "('a -> 'b -> 'a) cod");
        let higher = Type::arrow(Type::arrow(Type::Int, Type::Int), Type::Int);
        assert_eq!(higher.to_string(), "(int -> int) -> int");
        let nested = Type::pair(Type::pair(Type::Int, Type::Str), Type::Unit);
        assert_eq!(nested.to_string(), "(int * string) * unit");
    }

    #[test]
    fn weak_variables_are_marked() {
        let s = TypeScheme::mono(Type::reference(Type::list(Type::Var(0))));
        assert_eq!(s.display("code"), "'_a list ref");
    }

    #[test]
    fn env_lookup_shadows() {
        let mut env = TypeEnv::new();
        env.push("x", 0, TypeScheme::mono(Type::Int));
        env.push("x", 1, TypeScheme::mono(Type::Str));
        assert_eq!(env.lookup("x"), Some((1, &TypeScheme::mono(Type::Str))));
        env.pop();
        assert_eq!(env.lookup("x").unwrap().0, 0);
    }
}
