//! Type-directed generator of closed two-stage programs.
//!
//! A target type is drawn first and a term of that type is grown around it,
//! so nearly every candidate typechecks. Candidates are still validated
//! (level discipline, size bound, staged inference) before use.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ast::SourceExpr;
use crate::typecheck::{infer_staged, GenPolicy};
use crate::types::TypeEnv;

pub const MAX_NODES: usize = 40;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Ty {
    Int,
    Str,
    List(Box<Ty>),
    Pair(Box<Ty>, Box<Ty>),
    Arrow(Box<Ty>, Box<Ty>),
}

impl Ty {
    fn first_order(&self) -> bool {
        match self {
            Ty::Int | Ty::Str => true,
            Ty::List(t) => t.first_order(),
            Ty::Pair(a, b) => a.first_order() && b.first_order(),
            Ty::Arrow(..) => false,
        }
    }
}

#[derive(Clone)]
enum Kind {
    Mono(Ty),
    /// `fun y -> y`, usable at any arrow type `t -> t`.
    PolyId,
    /// `[]`, usable at any list type.
    PolyNil,
}

#[derive(Clone)]
struct Binding {
    name: String,
    kind: Kind,
    level: u8,
}

pub struct Generator {
    rng: ChaCha8Rng,
    names: usize,
    fuel: i32,
}

impl Generator {
    pub fn new(seed: u64) -> Self {
        Generator { rng: ChaCha8Rng::seed_from_u64(seed), names: 0, fuel: 0 }
    }

    /// Draws the next valid program. Gives up after a generous number of
    /// rejected candidates, which would indicate a generator bug.
    pub fn program(&mut self) -> SourceExpr {
        for _ in 0..10_000 {
            let e = self.candidate();
            if valid(&e) {
                return e;
            }
        }
        panic!("generator failed to produce a well-typed program");
    }

    fn candidate(&mut self) -> SourceExpr {
        self.names = 0;
        self.fuel = self.rng.gen_range(4..16);
        let ty = self.ty(2);
        let mut ctx = Vec::new();
        if self.rng.gen_bool(0.3) {
            let t = [Ty::Int, Ty::Str, Ty::List(Box::new(Ty::Int))].choose(&mut self.rng).unwrap().clone();
            let k = self.fresh("k");
            let rhs = self.leaf(&t, 0, &ctx);
            ctx.push(Binding { name: k.clone(), kind: Kind::Mono(t), level: 0 });
            let body = SourceExpr::bracket(self.expr(&ty, 1, &ctx));
            return SourceExpr::let_(&k, rhs, body);
        }
        SourceExpr::bracket(self.expr(&ty, 1, &ctx))
    }

    fn fresh(&mut self, base: &str) -> String {
        self.names += 1;
        format!("{base}{}", self.names)
    }

    fn ty(&mut self, depth: u32) -> Ty {
        let pick = if depth == 0 { self.rng.gen_range(0..2) } else { self.rng.gen_range(0..5) };
        match pick {
            0 => Ty::Int,
            1 => Ty::Str,
            2 => Ty::List(Box::new(self.ty(depth - 1))),
            3 => Ty::Pair(Box::new(self.ty(depth - 1)), Box::new(self.ty(depth - 1))),
            _ => Ty::Arrow(Box::new(self.ty(depth - 1)), Box::new(self.ty(depth - 1))),
        }
    }

    fn vars(ctx: &[Binding], ty: &Ty, level: u8) -> Vec<SourceExpr> {
        ctx.iter()
            .filter_map(|b| {
                let fits = match (&b.kind, ty) {
                    (Kind::Mono(t), _) => t == ty,
                    (Kind::PolyId, Ty::Arrow(a, r)) => a == r,
                    (Kind::PolyNil, Ty::List(_)) => true,
                    _ => false,
                };
                if !fits {
                    return None;
                }
                match (b.level, level) {
                    (l, m) if l == m => Some(SourceExpr::var(&b.name)),
                    (0, 1) if ty.first_order() => Some(SourceExpr::csp(SourceExpr::var(&b.name))),
                    _ => None,
                }
            })
            .collect()
    }

    fn leaf(&mut self, ty: &Ty, level: u8, ctx: &[Binding]) -> SourceExpr {
        let vars = Self::vars(ctx, ty, level);
        if !vars.is_empty() && self.rng.gen_bool(0.5) {
            return vars.choose(&mut self.rng).unwrap().clone();
        }
        match ty {
            Ty::Int => SourceExpr::int(self.rng.gen_range(0..10)),
            Ty::Str => SourceExpr::str(["a", "b", "3"].choose(&mut self.rng).unwrap()),
            Ty::List(_) => SourceExpr::Nil,
            Ty::Pair(a, b) => SourceExpr::pair(self.leaf(a, level, ctx), self.leaf(b, level, ctx)),
            Ty::Arrow(a, r) => {
                let y = self.fresh("y");
                let mut inner = ctx.to_vec();
                inner.push(Binding { name: y.clone(), kind: Kind::Mono((**a).clone()), level });
                SourceExpr::fun(&y, self.leaf(r, level, &inner))
            }
        }
    }

    fn expr(&mut self, ty: &Ty, level: u8, ctx: &[Binding]) -> SourceExpr {
        self.fuel -= 1;
        if self.fuel <= 0 {
            return self.leaf(ty, level, ctx);
        }
        match self.rng.gen_range(0..10) {
            0 => self.mono_let(ty, level, ctx),
            1 => self.poly_let(ty, level, ctx),
            2 => self.app(ty, level, ctx),
            3 | 4 if level == 1 => self.escape(ty, ctx),
            _ => self.intro(ty, level, ctx),
        }
    }

    fn mono_let(&mut self, ty: &Ty, level: u8, ctx: &[Binding]) -> SourceExpr {
        let t = self.ty(1);
        let x = self.fresh("x");
        let rhs = self.expr(&t, level, ctx);
        let mut inner = ctx.to_vec();
        inner.push(Binding { name: x.clone(), kind: Kind::Mono(t), level });
        SourceExpr::let_(&x, rhs, self.expr(ty, level, &inner))
    }

    fn poly_let(&mut self, ty: &Ty, level: u8, ctx: &[Binding]) -> SourceExpr {
        let (x, rhs, kind) = if self.rng.gen_bool(0.5) {
            let y = self.fresh("y");
            (self.fresh("f"), SourceExpr::fun(&y, SourceExpr::var(&y)), Kind::PolyId)
        } else {
            (self.fresh("n"), SourceExpr::Nil, Kind::PolyNil)
        };
        let mut inner = ctx.to_vec();
        inner.push(Binding { name: x.clone(), kind, level });
        SourceExpr::let_(&x, rhs, self.expr(ty, level, &inner))
    }

    fn app(&mut self, ty: &Ty, level: u8, ctx: &[Binding]) -> SourceExpr {
        let ids: Vec<&Binding> = ctx
            .iter()
            .filter(|b| b.level == level && matches!(b.kind, Kind::PolyId))
            .collect();
        if let Some(b) = ids.choose(&mut self.rng) {
            let f = SourceExpr::var(&b.name);
            return SourceExpr::app(f, self.expr(ty, level, ctx));
        }
        let a = self.ty(1);
        let f = self.expr(&Ty::Arrow(Box::new(a.clone()), Box::new(ty.clone())), level, ctx);
        SourceExpr::app(f, self.expr(&a, level, ctx))
    }

    /// A level-0 computation of code, spliced back in.
    fn escape(&mut self, ty: &Ty, ctx: &[Binding]) -> SourceExpr {
        if *ty == Ty::Int && self.rng.gen_bool(0.3) {
            let n = SourceExpr::add(self.leaf(ty, 0, ctx), SourceExpr::int(self.rng.gen_range(0..10)));
            return SourceExpr::escape(SourceExpr::bracket(SourceExpr::csp(n)));
        }
        let code = SourceExpr::bracket(self.expr(ty, 1, ctx));
        let inner = match self.rng.gen_range(0..3) {
            0 => code,
            1 => {
                let c = self.fresh("c");
                SourceExpr::let_(&c, code, SourceExpr::var(&c))
            }
            _ => {
                let c = self.fresh("c");
                SourceExpr::app(SourceExpr::fun(&c, SourceExpr::var(&c)), code)
            }
        };
        SourceExpr::escape(inner)
    }

    fn intro(&mut self, ty: &Ty, level: u8, ctx: &[Binding]) -> SourceExpr {
        match ty {
            Ty::Int => match self.rng.gen_range(0..3) {
                0 => SourceExpr::ref_get(SourceExpr::ref_new(self.expr(ty, level, ctx))),
                _ => {
                    let b = self.expr(ty, level, ctx);
                    SourceExpr::add(self.expr(ty, level, ctx), b)
                }
            },
            Ty::Str => self.leaf(ty, level, ctx),
            Ty::List(t) => {
                if self.rng.gen_bool(0.25) {
                    let v = self.expr(t, level, ctx);
                    return SourceExpr::rset(SourceExpr::ref_new(self.expr(ty, level, ctx)), v);
                }
                let tail = self.expr(ty, level, ctx);
                SourceExpr::cons(self.expr(t, level, ctx), tail)
            }
            Ty::Pair(a, b) => {
                let b = self.expr(b, level, ctx);
                SourceExpr::pair(self.expr(a, level, ctx), b)
            }
            Ty::Arrow(a, r) => {
                let y = self.fresh("y");
                let mut inner = ctx.to_vec();
                inner.push(Binding { name: y.clone(), kind: Kind::Mono((**a).clone()), level });
                SourceExpr::fun(&y, self.expr(r, level, &inner))
            }
        }
    }
}

/// Well-formed, within the size bound, and accepted by the staged checker.
pub fn valid(e: &SourceExpr) -> bool {
    e.node_count() <= MAX_NODES
        && e.check_levels().is_ok()
        && infer_staged(&TypeEnv::new(), e, 0, GenPolicy::Relaxed).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::pretty;

    #[test]
    fn same_seed_same_programs() {
        let a: Vec<_> = { let mut g = Generator::new(7); (0..20).map(|_| pretty(&g.program())).collect() };
        let b: Vec<_> = { let mut g = Generator::new(7); (0..20).map(|_| pretty(&g.program())).collect() };
        assert_eq!(a, b);
    }

    #[test]
    fn programs_are_bracketed_and_bounded() {
        let mut g = Generator::new(1);
        for _ in 0..200 {
            let e = g.program();
            assert!(valid(&e));
            assert!(e.contains_staging());
        }
    }

    #[test]
    fn the_generator_reaches_every_staging_form() {
        let mut g = Generator::new(3);
        let text: String = (0..300).map(|_| pretty(&g.program())).collect();
        for form in [".~", "% ", "let ", "fun ", "rset", "!"] {
            assert!(text.contains(form), "never generated {form}");
        }
    }
}
