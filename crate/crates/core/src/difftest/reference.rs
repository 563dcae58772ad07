//! Direct big-step evaluator for two-stage programs.
//!
//! Shares nothing with the translation or the backends: brackets build
//! syntax trees by walking the quoted expression, renaming every future-stage
//! binder. Operands are evaluated right to left, like the host machine, so
//! the order of generation-time effects (and of persisted slots) agrees.

use std::cell::RefCell;
use std::rc::Rc;

use crate::ast::{Name, SourceExpr};

#[derive(Clone)]
pub enum RVal {
    Int(i64),
    Str(String),
    Unit,
    List(Vec<RVal>),
    Pair(Box<RVal>, Box<RVal>),
    Closure(Name, Rc<SourceExpr>, Env),
    Ref(Rc<RefCell<RVal>>),
    Code(SourceExpr),
}

type Env = Rc<Vec<(Name, RVal)>>;

fn extend(env: &Env, x: &str, v: RVal) -> Env {
    let mut next = (**env).clone();
    next.push((x.to_string(), v));
    Rc::new(next)
}

fn lookup<'a>(env: &'a Env, x: &str) -> Result<&'a RVal, String> {
    env.iter()
        .rev()
        .find(|(y, _)| y == x)
        .map(|(_, v)| v)
        .ok_or_else(|| format!("unbound `{x}`"))
}

/// Evaluation state: the fresh-name counter and the persisted values table.
#[derive(Default)]
pub struct Reference {
    counter: usize,
    pub persisted: Vec<RVal>,
}

impl Reference {
    /// Evaluates a closed level-0 program.
    pub fn run(&mut self, e: &SourceExpr) -> Result<RVal, String> {
        self.eval(e, &Rc::new(Vec::new()))
    }

    fn fresh(&mut self, base: &str) -> Name {
        self.counter += 1;
        format!("{}'{}", base, self.counter)
    }

    fn eval(&mut self, e: &SourceExpr, env: &Env) -> Result<RVal, String> {
        use SourceExpr::*;
        Ok(match e {
            Var(x) => lookup(env, x)?.clone(),
            IntLit(i) => RVal::Int(*i),
            StrLit(s) => RVal::Str(s.clone()),
            Unit => RVal::Unit,
            Nil => RVal::List(Vec::new()),
            Persisted(i) => self.persisted.get(*i).cloned().ok_or("dangling slot")?,
            Add(a, b) => {
                let b = self.eval(b, env)?;
                match (self.eval(a, env)?, b) {
                    (RVal::Int(a), RVal::Int(b)) => RVal::Int(a.wrapping_add(b)),
                    _ => return Err("`+` on non-integers".into()),
                }
            }
            Pair(a, b) => {
                let b = self.eval(b, env)?;
                RVal::Pair(Box::new(self.eval(a, env)?), Box::new(b))
            }
            Cons(a, b) => {
                let b = self.eval(b, env)?;
                let a = self.eval(a, env)?;
                let RVal::List(mut tail) = b else { return Err("`::` onto a non-list".into()) };
                tail.insert(0, a);
                RVal::List(tail)
            }
            RefNew(a) => RVal::Ref(Rc::new(RefCell::new(self.eval(a, env)?))),
            RefGet(a) => match self.eval(a, env)? {
                RVal::Ref(r) => r.borrow().clone(),
                _ => return Err("`!` on a non-reference".into()),
            },
            Rset(r, v) => {
                let v = self.eval(v, env)?;
                let RVal::Ref(r) = self.eval(r, env)? else { return Err("rset on a non-reference".into()) };
                let RVal::List(mut vs) = r.borrow().clone() else { return Err("rset on a non-list cell".into()) };
                vs.insert(0, v);
                *r.borrow_mut() = RVal::List(vs.clone());
                RVal::List(vs)
            }
            App(f, a) => {
                let a = self.eval(a, env)?;
                match self.eval(f, env)? {
                    RVal::Closure(x, body, cenv) => self.eval(&body, &extend(&cenv, &x, a))?,
                    _ => return Err("application of a non-function".into()),
                }
            }
            Fun(x, body) => RVal::Closure(x.clone(), Rc::new((**body).clone()), env.clone()),
            Let(x, rhs, body) => {
                let v = self.eval(rhs, env)?;
                self.eval(body, &extend(env, x, v))?
            }
            Bracket(b) => RVal::Code(self.build(b, env)?),
            Escape(_) | Csp(_) => return Err("staging form at level 0".into()),
        })
    }

    /// Builds the code denoted by a level-1 expression.
    fn build(&mut self, e: &SourceExpr, env: &Env) -> Result<SourceExpr, String> {
        use SourceExpr::*;
        let two = |me: &mut Self, a: &SourceExpr, b: &SourceExpr| -> Result<(SourceExpr, SourceExpr), String> {
            let b = me.build(b, env)?;
            Ok((me.build(a, env)?, b))
        };
        Ok(match e {
            Var(x) => match lookup(env, x)? {
                RVal::Code(c) => c.clone(),
                _ => return Err(format!("`{x}` is a present-stage value used in code")),
            },
            IntLit(_) | StrLit(_) | Unit | Nil | Persisted(_) => e.clone(),
            Add(a, b) => {
                let (a, b) = two(self, a, b)?;
                SourceExpr::add(a, b)
            }
            Pair(a, b) => {
                let (a, b) = two(self, a, b)?;
                SourceExpr::pair(a, b)
            }
            Cons(a, b) => {
                let (a, b) = two(self, a, b)?;
                SourceExpr::cons(a, b)
            }
            Rset(a, b) => {
                let (a, b) = two(self, a, b)?;
                SourceExpr::rset(a, b)
            }
            App(a, b) => {
                let (a, b) = two(self, a, b)?;
                SourceExpr::app(a, b)
            }
            RefNew(a) => SourceExpr::ref_new(self.build(a, env)?),
            RefGet(a) => SourceExpr::ref_get(self.build(a, env)?),
            Fun(x, body) => {
                let y = self.fresh(x);
                let body = self.build(body, &extend(env, x, RVal::Code(SourceExpr::var(&y))))?;
                SourceExpr::fun(&y, body)
            }
            Let(x, rhs, body) => {
                let rhs = self.build(rhs, env)?;
                let y = self.fresh(x);
                let body = self.build(body, &extend(env, x, RVal::Code(SourceExpr::var(&y))))?;
                SourceExpr::let_(&y, rhs, body)
            }
            Escape(a) => match self.eval(a, env)? {
                RVal::Code(c) => c,
                _ => return Err("escape of a non-code value".into()),
            },
            Csp(a) => {
                let v = self.eval(a, env)?;
                self.lift(v)
            }
            Bracket(_) => return Err("nested bracket".into()),
        })
    }

    /// First-order values become literals; anything else is persisted.
    fn lift(&mut self, v: RVal) -> SourceExpr {
        fn literal(v: &RVal) -> Option<SourceExpr> {
            Some(match v {
                RVal::Int(i) => SourceExpr::int(*i),
                RVal::Str(s) => SourceExpr::str(s),
                RVal::Unit => SourceExpr::Unit,
                RVal::List(vs) => {
                    let mut out = SourceExpr::Nil;
                    for v in vs.iter().rev() {
                        out = SourceExpr::cons(literal(v)?, out);
                    }
                    out
                }
                RVal::Pair(a, b) => SourceExpr::pair(literal(a)?, literal(b)?),
                _ => return None,
            })
        }
        literal(&v).unwrap_or_else(|| {
            self.persisted.push(v);
            SourceExpr::Persisted(self.persisted.len() - 1)
        })
    }
}

/// The code a staged program generates, or `None` when its value is not code.
pub fn generate(e: &SourceExpr) -> Result<Option<SourceExpr>, String> {
    match Reference::default().run(e)? {
        RVal::Code(c) => Ok(Some(c)),
        _ => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::alpha_equal;
    use crate::parser::{parse_plain, parse_source};

    fn gen(src: &str) -> SourceExpr {
        generate(&parse_source(src).unwrap().tree).unwrap().unwrap()
    }

    #[test]
    fn splicing_keeps_hygiene() {
        let c1 = gen(".<fun x -> .~(let body = .<x>. in .<fun x -> .~body>.)>.");
        assert!(alpha_equal(&c1, &parse_plain("fun a -> fun b -> a").unwrap().tree));
    }

    #[test]
    fn csp_of_a_computed_int_is_a_literal() {
        let c = gen(".<fun x -> .~(% (1 + 2)) + x>.");
        assert!(alpha_equal(&c, &parse_plain("fun x -> 3 + x").unwrap().tree));
    }

    #[test]
    fn csp_of_a_cell_is_persisted() {
        let c = gen("let r = ref [] in .<(% r, % r)>.");
        assert_eq!(c, SourceExpr::pair(SourceExpr::Persisted(1), SourceExpr::Persisted(0)));
    }

    #[test]
    fn present_stage_programs_evaluate() {
        let e = parse_source("let x = ref (1 :: []) in (rset x 2, rset x 3)").unwrap().tree;
        let RVal::Pair(a, b) = Reference::default().run(&e).unwrap() else { panic!() };
        let ints = |v: &RVal| match v {
            RVal::List(vs) => vs.iter().map(|v| if let RVal::Int(i) = v { *i } else { 0 }).collect::<Vec<_>>(),
            _ => vec![],
        };
        assert_eq!((ints(&a), ints(&b)), (vec![2, 3, 1], vec![3, 1]));
    }
}
