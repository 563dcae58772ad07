use super::{SourceExpr, TargetTerm};

/// Syntactic precedence of a rendered fragment. `Top` forms (`fun`, `let`)
/// extend as far right as possible, `App` forms are juxtapositions, and
/// `Atom`s never need parentheses.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Prec {
    Top,
    App,
    Atom,
}

/// Wraps `text` in parentheses unless it already binds at least as tightly
/// as `want`.
pub fn at(text: String, have: Prec, want: Prec) -> String {
    if have >= want {
        text
    } else {
        format!("({text})")
    }
}

pub fn quote_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Renders a source expression in concrete `.pml` syntax. Additions and
/// conses are always parenthesized.
pub fn pretty(e: &SourceExpr) -> String {
    render(e).0
}

fn render(e: &SourceExpr) -> (String, Prec) {
    use SourceExpr::*;
    let sub = |e: &SourceExpr, want: Prec| {
        let (s, p) = render(e);
        at(s, p, want)
    };
    match e {
        Var(x) => (x.clone(), Prec::Atom),
        IntLit(i) => (i.to_string(), Prec::Atom),
        StrLit(s) => (quote_string(s), Prec::Atom),
        Nil => ("[]".into(), Prec::Atom),
        Unit => ("()".into(), Prec::Atom),
        Persisted(n) => (format!("<csp#{n}>"), Prec::Atom),
        Add(a, b) => (
            format!("({} + {})", sub(a, Prec::App), sub(b, Prec::App)),
            Prec::Atom,
        ),
        Cons(a, b) => (
            format!("({} :: {})", sub(a, Prec::App), sub(b, Prec::App)),
            Prec::Atom,
        ),
        Pair(a, b) => (
            format!("({}, {})", sub(a, Prec::Top), sub(b, Prec::Top)),
            Prec::Atom,
        ),
        RefNew(a) => (format!("ref {}", sub(a, Prec::Atom)), Prec::App),
        RefGet(a) => (format!("!{}", sub(a, Prec::Atom)), Prec::Atom),
        Rset(a, b) => (
            format!("rset {} {}", sub(a, Prec::Atom), sub(b, Prec::Atom)),
            Prec::App,
        ),
        App(f, x) => (
            format!("{} {}", sub(f, Prec::App), sub(x, Prec::Atom)),
            Prec::App,
        ),
        Fun(x, b) => (format!("fun {x} -> {}", sub(b, Prec::Top)), Prec::Top),
        Let(x, r, b) => (
            format!("let {x} = {} in {}", sub(r, Prec::Top), sub(b, Prec::Top)),
            Prec::Top,
        ),
        Bracket(b) => (format!(".<{}>.", sub(b, Prec::Top)), Prec::Atom),
        Escape(b) => (format!(".~{}", sub(b, Prec::Atom)), Prec::Atom),
        Csp(b) => (format!("% {}", sub(b, Prec::Atom)), Prec::App),
    }
}

pub fn pretty_target(t: &TargetTerm) -> String {
    render_target(t).0
}

fn render_target(t: &TargetTerm) -> (String, Prec) {
    use TargetTerm::*;
    let sub = |t: &TargetTerm, want: Prec| {
        let (s, p) = render_target(t);
        at(s, p, want)
    };
    match t {
        Var(x) => (x.clone(), Prec::Atom),
        IntLit(i) => (i.to_string(), Prec::Atom),
        StrLit(s) => (quote_string(s), Prec::Atom),
        UnitLit => ("()".into(), Prec::Atom),
        Nil => ("[]".into(), Prec::Atom),
        Persisted(n) => (format!("<csp#{n}>"), Prec::Atom),
        Add(a, b) => (
            format!("({} + {})", sub(a, Prec::App), sub(b, Prec::App)),
            Prec::Atom,
        ),
        Cons(a, b) => (
            format!("({} :: {})", sub(a, Prec::App), sub(b, Prec::App)),
            Prec::Atom,
        ),
        Pair(a, b) => (
            format!("({}, {})", sub(a, Prec::Top), sub(b, Prec::Top)),
            Prec::Atom,
        ),
        RefNew(a) => (format!("ref {}", sub(a, Prec::Atom)), Prec::App),
        RefGet(a) => (format!("!{}", sub(a, Prec::Atom)), Prec::Atom),
        Rset(a, b) => (
            format!("rset {} {}", sub(a, Prec::Atom), sub(b, Prec::Atom)),
            Prec::App,
        ),
        App(f, x) => (
            format!("{} {}", sub(f, Prec::App), sub(x, Prec::Atom)),
            Prec::App,
        ),
        Fun(x, b) => (format!("fun {x} -> {}", sub(b, Prec::Top)), Prec::Top),
        Let(x, r, b) => (
            format!("let {x} = {} in {}", sub(r, Prec::Top), sub(b, Prec::Top)),
            Prec::Top,
        ),
        Comb(c, args) if args.is_empty() => (c.name().to_string(), Prec::Atom),
        Comb(c, args) => {
            let mut s = c.name().to_string();
            for a in args {
                s.push(' ');
                s.push_str(&sub(a, Prec::Atom));
            }
            (s, Prec::App)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{t, Comb};

    #[test]
    fn renders_function_with_parenthesized_addition() {
        let e = SourceExpr::fun("x", SourceExpr::add(SourceExpr::var("x"), SourceExpr::int(1)));
        assert_eq!(pretty(&e), "fun x -> (x + 1)");
    }

    #[test]
    fn renders_bracket() {
        let e = SourceExpr::bracket(SourceExpr::add(SourceExpr::int(1), SourceExpr::int(2)));
        assert_eq!(pretty(&e), ".<(1 + 2)>.");
    }

    #[test]
    fn parenthesizes_function_in_application_head() {
        let e = SourceExpr::app(
            SourceExpr::fun("x_2", SourceExpr::var("x_2")),
            SourceExpr::int(1),
        );
        assert_eq!(pretty(&e), "(fun x_2 -> x_2) 1");
        let nested = SourceExpr::app(e.clone(), SourceExpr::app(SourceExpr::var("g"), SourceExpr::int(2)));
        assert_eq!(pretty(&nested), "(fun x_2 -> x_2) 1 (g 2)");
    }

    #[test]
    fn renders_host_let_and_combinators() {
        let term = t::let_(
            "t_1",
            t::comb(Comb::Add, vec![t::comb(Comb::Int, vec![t::int(1)]), t::comb(Comb::Int, vec![t::int(2)])]),
            t::comb(Comb::Lam, vec![t::fun("x", t::var("t_1"))]),
        );
        assert_eq!(
            pretty_target(&term),
            "let t_1 = add (int 1) (int 2) in lam (fun x -> t_1)"
        );
        assert_eq!(pretty_target(&t::comb(Comb::Nil, vec![])), "nil");
    }

    #[test]
    fn escapes_strings() {
        assert_eq!(quote_string("a\"b\\"), "\"a\\\"b\\\\\"");
    }
}
