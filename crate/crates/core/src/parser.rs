//! Concrete `.pml` syntax.
//!
//! Precedence, loosest first: `let`/`fun`, `@@` (right), `+` (left),
//! `::` (right), application, prefix `!` and `.~`. Pairs only appear inside
//! parentheses. `ref e`, `rset e e` and `% e` are application-level forms.

use std::sync::Arc;

use crate::ast::{Comb, Name, SourceExpr, TargetTerm, Term, WILDCARD};
use crate::diag::{DiagKind, Diagnostic, Location};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

/// A parsed tree together with the source span of every node, indexed by the
/// node's position in a preorder traversal.
#[derive(Clone, Debug)]
pub struct Parsed<T> {
    pub tree: T,
    pub spans: Vec<Span>,
}

impl<T> Parsed<T> {
    /// Fills in the location of a diagnostic that only knows its node.
    pub fn locate(&self, src: &str, mut d: Diagnostic) -> Diagnostic {
        if d.location.is_none() {
            let offset = d
                .node
                .and_then(|n| self.spans.get(n))
                .map_or(0, |s| s.start);
            d.location = Some(Location::of_offset(src, offset));
        }
        d
    }
}

#[derive(Clone, Debug)]
struct SpanTree {
    span: Span,
    children: Vec<SpanTree>,
}

impl SpanTree {
    fn leaf(span: Span) -> Self {
        SpanTree { span, children: vec![] }
    }

    fn flatten(&self, out: &mut Vec<Span>) {
        out.push(self.span);
        for c in &self.children {
            c.flatten(out);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(i64),
    Str(String),
    Ident(String),
    Wild,
    Let,
    In,
    Fun,
    Ref,
    Rset,
    Arrow,
    Eq,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Plus,
    ColonColon,
    BraOpen,
    BraClose,
    Tilde,
    Percent,
    Bang,
    AtAt,
    Eof,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(i) => format!("integer `{i}`"),
        Tok::Str(_) => "string literal".into(),
        Tok::Ident(x) => format!("identifier `{x}`"),
        Tok::Eof => "end of input".into(),
        other => {
            let s = match other {
                Tok::Wild => "_",
                Tok::Let => "let",
                Tok::In => "in",
                Tok::Fun => "fun",
                Tok::Ref => "ref",
                Tok::Rset => "rset",
                Tok::Arrow => "->",
                Tok::Eq => "=",
                Tok::LParen => "(",
                Tok::RParen => ")",
                Tok::LBrack => "[",
                Tok::RBrack => "]",
                Tok::Comma => ",",
                Tok::Plus => "+",
                Tok::ColonColon => "::",
                Tok::BraOpen => ".<",
                Tok::BraClose => ">.",
                Tok::Tilde => ".~",
                Tok::Percent => "%",
                Tok::Bang => "!",
                Tok::AtAt => "@@",
                _ => unreachable!(),
            };
            format!("`{s}`")
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Span)>, Diagnostic> {
    let bytes = src.as_bytes();
    let err = |at: usize, msg: String| {
        Diagnostic::new(DiagKind::ParseError, msg).at_location(Location::of_offset(src, at))
    };
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if src[i..].starts_with("(*") {
            let mut depth = 0usize;
            loop {
                if i >= bytes.len() {
                    return Err(err(start, "unterminated comment".into()));
                }
                if src[i..].starts_with("(*") {
                    depth += 1;
                    i += 2;
                } else if src[i..].starts_with("*)") {
                    depth -= 1;
                    i += 2;
                    if depth == 0 {
                        break;
                    }
                } else {
                    i += src[i..].chars().next().map_or(1, char::len_utf8);
                }
            }
            continue;
        }
        let two = src.get(i..i + 2).unwrap_or("");
        let fixed = match two {
            "->" => Some(Tok::Arrow),
            "::" => Some(Tok::ColonColon),
            ".<" => Some(Tok::BraOpen),
            ">." => Some(Tok::BraClose),
            ".~" => Some(Tok::Tilde),
            "@@" => Some(Tok::AtAt),
            _ => None,
        };
        if let Some(t) = fixed {
            i += 2;
            toks.push((t, Span { start, end: i }));
            continue;
        }
        let single = match c {
            b'=' => Some(Tok::Eq),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b'[' => Some(Tok::LBrack),
            b']' => Some(Tok::RBrack),
            b',' => Some(Tok::Comma),
            b'+' => Some(Tok::Plus),
            b'%' => Some(Tok::Percent),
            b'!' => Some(Tok::Bang),
            _ => None,
        };
        if let Some(t) = single {
            i += 1;
            toks.push((t, Span { start, end: i }));
            continue;
        }
        if c.is_ascii_digit() || (c == b'-' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = src[start..i]
                .parse::<i64>()
                .map_err(|_| err(start, format!("integer literal `{}` out of range", &src[start..i])))?;
            toks.push((Tok::Int(n), Span { start, end: i }));
            continue;
        }
        if c == b'"' {
            i += 1;
            let mut s = String::new();
            loop {
                let Some(ch) = src[i..].chars().next() else {
                    return Err(err(start, "unterminated string literal".into()));
                };
                i += ch.len_utf8();
                match ch {
                    '"' => break,
                    '\\' => {
                        let Some(esc) = src[i..].chars().next() else {
                            return Err(err(start, "unterminated string literal".into()));
                        };
                        i += esc.len_utf8();
                        s.push(match esc {
                            'n' => '\n',
                            't' => '\t',
                            '\\' => '\\',
                            '"' => '"',
                            other => return Err(err(i - 2, format!("unknown escape `\\{other}`"))),
                        });
                    }
                    other => s.push(other),
                }
            }
            toks.push((Tok::Str(s), Span { start, end: i }));
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'') {
                i += 1;
            }
            let word = &src[start..i];
            let tok = match word {
                "_" => Tok::Wild,
                "let" => Tok::Let,
                "in" => Tok::In,
                "fun" => Tok::Fun,
                "ref" => Tok::Ref,
                "rset" => Tok::Rset,
                w => Tok::Ident(w.to_string()),
            };
            toks.push((tok, Span { start, end: i }));
            continue;
        }
        let ch = src[i..].chars().next().unwrap_or('?');
        return Err(err(start, format!("unexpected character `{ch}`")));
    }
    toks.push((Tok::Eof, Span { start: src.len(), end: src.len() }));
    Ok(toks)
}

#[derive(Copy, Clone, PartialEq, Eq)]
enum Mode {
    Staged,
    Plain,
}

struct Parser<'s> {
    src: &'s str,
    toks: Vec<(Tok, Span)>,
    pos: usize,
    mode: Mode,
}

type Node = (SourceExpr, SpanTree);

impl<'s> Parser<'s> {
    // `pos` may run past the end token; reads clamp to it
    fn current(&self) -> &(Tok, Span) {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn peek(&self) -> &Tok {
        &self.current().0
    }

    fn span(&self) -> Span {
        self.current().1
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.toks[(self.pos - 1).min(self.toks.len() - 1)].1.end
        }
    }

    fn bump(&mut self) -> Tok {
        let t = self.peek().clone();
        self.pos += 1;
        t
    }

    fn error_here(&self, msg: String) -> Diagnostic {
        Diagnostic::new(DiagKind::ParseError, msg).at_location(Location::of_offset(self.src, self.span().start))
    }

    fn expect(&mut self, want: Tok) -> Result<(), Diagnostic> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(format!("expected {}, found {}", describe(&want), describe(self.peek()))))
        }
    }

    fn staging_allowed(&self, what: &str) -> Result<(), Diagnostic> {
        match self.mode {
            Mode::Staged => Ok(()),
            Mode::Plain => Err(self.error_here(format!("{what} is not allowed in plain code"))),
        }
    }

    fn binder(&mut self) -> Result<Name, Diagnostic> {
        match self.bump() {
            Tok::Ident(x) => Ok(x),
            Tok::Wild => Ok(WILDCARD.to_string()),
            other => {
                self.pos -= 1;
                Err(self.error_here(format!("expected a variable name, found {}", describe(&other))))
            }
        }
    }

    fn param(&mut self) -> Result<Name, Diagnostic> {
        if *self.peek() == Tok::LParen && self.toks.get(self.pos + 1).map(|t| &t.0) == Some(&Tok::RParen) {
            self.pos += 2;
            return Ok(WILDCARD.to_string());
        }
        self.binder()
    }

    fn expr(&mut self) -> Result<Node, Diagnostic> {
        let start = self.span().start;
        match self.peek() {
            Tok::Let => {
                self.bump();
                let x = self.binder()?;
                self.expect(Tok::Eq)?;
                let (rhs, rs) = self.expr()?;
                self.expect(Tok::In)?;
                let (body, bs) = self.expr()?;
                let span = Span { start, end: self.prev_end() };
                Ok((
                    SourceExpr::Let(x, Box::new(rhs), Box::new(body)),
                    SpanTree { span, children: vec![rs, bs] },
                ))
            }
            Tok::Fun => {
                self.bump();
                let x = self.param()?;
                self.expect(Tok::Arrow)?;
                let (body, bs) = self.expr()?;
                let span = Span { start, end: self.prev_end() };
                Ok((SourceExpr::Fun(x, Box::new(body)), SpanTree { span, children: vec![bs] }))
            }
            _ => self.pipe(),
        }
    }

    fn pipe(&mut self) -> Result<Node, Diagnostic> {
        let start = self.span().start;
        let lhs = self.plus()?;
        if *self.peek() == Tok::AtAt {
            self.bump();
            let rhs = self.expr()?;
            return Ok(self.binary(start, lhs, rhs, SourceExpr::App));
        }
        Ok(lhs)
    }

    fn binary(
        &self,
        start: usize,
        (a, sa): Node,
        (b, sb): Node,
        mk: fn(Box<SourceExpr>, Box<SourceExpr>) -> SourceExpr,
    ) -> Node {
        let span = Span { start, end: self.prev_end() };
        (mk(Box::new(a), Box::new(b)), SpanTree { span, children: vec![sa, sb] })
    }

    fn plus(&mut self) -> Result<Node, Diagnostic> {
        let start = self.span().start;
        let mut lhs = self.cons()?;
        while *self.peek() == Tok::Plus {
            self.bump();
            let rhs = self.cons()?;
            lhs = self.binary(start, lhs, rhs, SourceExpr::Add);
        }
        Ok(lhs)
    }

    fn cons(&mut self) -> Result<Node, Diagnostic> {
        let start = self.span().start;
        let head = self.app()?;
        if *self.peek() == Tok::ColonColon {
            self.bump();
            let tail = self.cons()?;
            return Ok(self.binary(start, head, tail, SourceExpr::Cons));
        }
        Ok(head)
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Int(_)
                | Tok::Str(_)
                | Tok::Ident(_)
                | Tok::LBrack
                | Tok::LParen
                | Tok::BraOpen
                | Tok::Tilde
                | Tok::Bang
        )
    }

    fn app(&mut self) -> Result<Node, Diagnostic> {
        let start = self.span().start;
        let mut f = match self.peek() {
            Tok::Ref => {
                self.bump();
                let (a, sa) = self.atom()?;
                let span = Span { start, end: self.prev_end() };
                (SourceExpr::RefNew(Box::new(a)), SpanTree { span, children: vec![sa] })
            }
            Tok::Rset => {
                self.bump();
                let r = self.atom()?;
                let v = self.atom()?;
                self.binary(start, r, v, SourceExpr::Rset)
            }
            Tok::Percent => {
                self.staging_allowed("a CSP marker")?;
                self.bump();
                let (a, sa) = self.atom()?;
                let span = Span { start, end: self.prev_end() };
                (SourceExpr::Csp(Box::new(a)), SpanTree { span, children: vec![sa] })
            }
            _ => self.atom()?,
        };
        while self.starts_atom() {
            let x = self.atom()?;
            f = self.binary(start, f, x, SourceExpr::App);
        }
        Ok(f)
    }

    fn atom(&mut self) -> Result<Node, Diagnostic> {
        let start = self.span().start;
        let leaf = |p: &Self, e: SourceExpr| (e, SpanTree::leaf(Span { start, end: p.prev_end() }));
        match self.bump() {
            Tok::Int(i) => Ok(leaf(self, SourceExpr::IntLit(i))),
            Tok::Str(s) => Ok(leaf(self, SourceExpr::StrLit(s))),
            Tok::Ident(x) => Ok(leaf(self, SourceExpr::Var(x))),
            Tok::LBrack => {
                self.expect(Tok::RBrack)?;
                Ok(leaf(self, SourceExpr::Nil))
            }
            Tok::LParen => {
                if *self.peek() == Tok::RParen {
                    self.bump();
                    return Ok(leaf(self, SourceExpr::Unit));
                }
                let first = self.expr()?;
                match self.bump() {
                    Tok::RParen => Ok(first),
                    Tok::Comma => {
                        let second = self.expr()?;
                        if *self.peek() == Tok::Comma {
                            return Err(self.error_here("only pairs are supported, not larger tuples".into()));
                        }
                        self.expect(Tok::RParen)?;
                        Ok(self.binary(start, first, second, SourceExpr::Pair))
                    }
                    other => {
                        self.pos -= 1;
                        Err(self.error_here(format!("expected `)` or `,`, found {}", describe(&other))))
                    }
                }
            }
            Tok::BraOpen => {
                self.pos -= 1;
                self.staging_allowed("a bracket")?;
                self.bump();
                let (body, bs) = self.expr()?;
                self.expect(Tok::BraClose)?;
                let span = Span { start, end: self.prev_end() };
                Ok((SourceExpr::Bracket(Box::new(body)), SpanTree { span, children: vec![bs] }))
            }
            Tok::Tilde => {
                self.pos -= 1;
                self.staging_allowed("an escape")?;
                self.bump();
                let (a, sa) = self.atom()?;
                let span = Span { start, end: self.prev_end() };
                Ok((SourceExpr::Escape(Box::new(a)), SpanTree { span, children: vec![sa] }))
            }
            Tok::Bang => {
                let (a, sa) = self.atom()?;
                let span = Span { start, end: self.prev_end() };
                Ok((SourceExpr::RefGet(Box::new(a)), SpanTree { span, children: vec![sa] }))
            }
            other => {
                self.pos -= 1;
                Err(self.error_here(format!("expected an expression, found {}", describe(&other))))
            }
        }
    }
}

fn parse_with(src: &str, mode: Mode) -> Result<(SourceExpr, SpanTree), Diagnostic> {
    let toks = lex(src)?;
    let mut p = Parser { src, toks, pos: 0, mode };
    let node = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error_here(format!("unexpected {} after expression", describe(p.peek()))));
    }
    Ok(node)
}

/// Parses a two-stage program, enforcing the two-level discipline.
pub fn parse_source(src: &str) -> Result<Parsed<SourceExpr>, Diagnostic> {
    let (tree, st) = parse_with(src, Mode::Staged)?;
    let (tree, st) = lift_present_csp(tree, st, 0);
    let mut spans = Vec::new();
    st.flatten(&mut spans);
    let parsed = Parsed { tree, spans };
    if let Err((node, msg)) = parsed.tree.check_levels() {
        return Err(parsed.locate(src, Diagnostic::new(DiagKind::ParseError, msg).at_node(node)));
    }
    Ok(parsed)
}

/// `% e` outside brackets lifts a present-stage value into code; it is read
/// as `.<% e>.`, so the level discipline holds for every parsed tree.
fn lift_present_csp(e: SourceExpr, st: SpanTree, level: u8) -> (SourceExpr, SpanTree) {
    use SourceExpr::*;
    let span = st.span;
    let mut kids = st.children.into_iter();
    let mut sub = |e: Box<SourceExpr>, level: u8| {
        let (e, s) = lift_present_csp(*e, kids.next().expect("one span per child"), level);
        (Box::new(e), s)
    };
    let (tree, children) = match e {
        Csp(a) if level == 0 => {
            let (a, s) = sub(a, 0);
            let csp = SpanTree { span, children: vec![s] };
            (Bracket(Box::new(Csp(a))), vec![csp])
        }
        Bracket(a) => {
            let (a, s) = sub(a, level + 1);
            (Bracket(a), vec![s])
        }
        Escape(a) => {
            let (a, s) = sub(a, level.saturating_sub(1));
            (Escape(a), vec![s])
        }
        Csp(a) => {
            let (a, s) = sub(a, level - 1);
            (Csp(a), vec![s])
        }
        RefNew(a) => {
            let (a, s) = sub(a, level);
            (RefNew(a), vec![s])
        }
        RefGet(a) => {
            let (a, s) = sub(a, level);
            (RefGet(a), vec![s])
        }
        Fun(x, a) => {
            let (a, s) = sub(a, level);
            (Fun(x, a), vec![s])
        }
        Add(a, b) => {
            let ((a, sa), (b, sb)) = (sub(a, level), sub(b, level));
            (Add(a, b), vec![sa, sb])
        }
        Pair(a, b) => {
            let ((a, sa), (b, sb)) = (sub(a, level), sub(b, level));
            (Pair(a, b), vec![sa, sb])
        }
        Cons(a, b) => {
            let ((a, sa), (b, sb)) = (sub(a, level), sub(b, level));
            (Cons(a, b), vec![sa, sb])
        }
        Rset(a, b) => {
            let ((a, sa), (b, sb)) = (sub(a, level), sub(b, level));
            (Rset(a, b), vec![sa, sb])
        }
        App(a, b) => {
            let ((a, sa), (b, sb)) = (sub(a, level), sub(b, level));
            (App(a, b), vec![sa, sb])
        }
        Let(x, a, b) => {
            let ((a, sa), (b, sb)) = (sub(a, level), sub(b, level));
            (Let(x, a, b), vec![sa, sb])
        }
        leaf => (leaf, vec![]),
    };
    (tree, SpanTree { span, children })
}

/// Parses staging-free code, such as the string backend's output.
pub fn parse_plain(src: &str) -> Result<Parsed<SourceExpr>, Diagnostic> {
    let (tree, st) = parse_with(src, Mode::Plain)?;
    let mut spans = Vec::new();
    st.flatten(&mut spans);
    Ok(Parsed { tree, spans })
}

/// Parses a host program written directly against the combinators. Free
/// occurrences of combinator names (`lam`, `genlet`, ...) become combinator
/// constants; a binder of the same name shadows them.
pub fn parse_target(src: &str) -> Result<Parsed<TargetTerm>, Diagnostic> {
    let (tree, st) = parse_with(src, Mode::Plain)?;
    let mut bound = Vec::new();
    let (term, tst) = resolve(&tree, &st, &mut bound);
    let mut spans = Vec::new();
    tst.flatten(&mut spans);
    Ok(Parsed { tree: Arc::unwrap_or_clone(term), spans })
}

fn resolve(e: &SourceExpr, st: &SpanTree, bound: &mut Vec<Name>) -> (Term, SpanTree) {
    use SourceExpr as S;
    let node = |t: TargetTerm, children: Vec<SpanTree>| (Arc::new(t), SpanTree { span: st.span, children });
    let comb_head = |e: &SourceExpr, bound: &Vec<Name>| match e {
        S::Var(x) if !bound.contains(x) => Comb::from_name(x),
        _ => None,
    };

    // Flatten an application spine headed by a combinator name.
    if let S::App(..) = e {
        let mut args = Vec::new();
        let mut cur = (e, st);
        while let (S::App(f, x), s) = cur {
            args.push((x.as_ref(), &s.children[1]));
            cur = (f.as_ref(), &s.children[0]);
        }
        if let Some(c) = comb_head(cur.0, bound) {
            args.reverse();
            let take = args.len().min(c.arity());
            let mut children = Vec::new();
            let mut terms = Vec::new();
            for (a, sa) in &args[..take] {
                let (t, ts) = resolve(a, sa, bound);
                terms.push(t);
                children.push(ts);
            }
            let head_end = if take == 0 { cur.1.span.end } else { args[take - 1].1.span.end };
            let head_span = Span { start: st.span.start, end: head_end };
            let mut acc = (Arc::new(TargetTerm::Comb(c, terms)), SpanTree { span: head_span, children });
            for (a, sa) in &args[take..] {
                let (t, ts) = resolve(a, sa, bound);
                let span = Span { start: st.span.start, end: sa.span.end };
                acc = (Arc::new(TargetTerm::App(acc.0, t)), SpanTree { span, children: vec![acc.1, ts] });
            }
            return acc;
        }
    }

    match e {
        S::Var(x) => match comb_head(e, bound) {
            Some(c) => node(TargetTerm::Comb(c, vec![]), vec![]),
            None => node(TargetTerm::Var(x.clone()), vec![]),
        },
        S::IntLit(i) => node(TargetTerm::IntLit(*i), vec![]),
        S::StrLit(s) => node(TargetTerm::StrLit(s.clone()), vec![]),
        S::Nil => node(TargetTerm::Nil, vec![]),
        S::Unit => node(TargetTerm::UnitLit, vec![]),
        S::Persisted(n) => node(TargetTerm::Persisted(*n), vec![]),
        S::Fun(x, b) => {
            bound.push(x.clone());
            let (b, bs) = resolve(b, &st.children[0], bound);
            bound.pop();
            node(TargetTerm::Fun(x.clone(), b), vec![bs])
        }
        S::Let(x, r, b) => {
            let (r, rs) = resolve(r, &st.children[0], bound);
            bound.push(x.clone());
            let (b, bs) = resolve(b, &st.children[1], bound);
            bound.pop();
            node(TargetTerm::Let(x.clone(), r, b), vec![rs, bs])
        }
        S::RefNew(a) | S::RefGet(a) => {
            let (a, sa) = resolve(a, &st.children[0], bound);
            let t = if matches!(e, S::RefNew(_)) { TargetTerm::RefNew(a) } else { TargetTerm::RefGet(a) };
            node(t, vec![sa])
        }
        S::Add(a, b) | S::Pair(a, b) | S::Cons(a, b) | S::Rset(a, b) | S::App(a, b) => {
            let (a, sa) = resolve(a, &st.children[0], bound);
            let (b, sb) = resolve(b, &st.children[1], bound);
            let t = match e {
                S::Add(..) => TargetTerm::Add(a, b),
                S::Pair(..) => TargetTerm::Pair(a, b),
                S::Cons(..) => TargetTerm::Cons(a, b),
                S::Rset(..) => TargetTerm::Rset(a, b),
                _ => TargetTerm::App(a, b),
            };
            node(t, vec![sa, sb])
        }
        S::Bracket(_) | S::Escape(_) | S::Csp(_) => unreachable!("plain mode rejects staging forms"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{alpha_equal, pretty, pretty_target, t};
    use SourceExpr as S;

    fn src(s: &str) -> SourceExpr {
        parse_source(s).unwrap_or_else(|d| panic!("{s}: {d}")).tree
    }

    #[test]
    fn bracket_of_addition() {
        assert_eq!(src(".<1 + 2>."), S::bracket(S::add(S::int(1), S::int(2))));
    }

    #[test]
    fn top_level_escape_is_rejected() {
        let d = parse_source(".~x").unwrap_err();
        assert_eq!(d.kind, DiagKind::ParseError);
        assert!(d.message.contains("escape at level 0"));
        assert_eq!(d.location.unwrap().offset, 0);
    }

    #[test]
    fn present_stage_csp_lifts() {
        let p = parse_source(".<fun x -> .~(% (1 + 2)) + x>.").unwrap();
        let lifted = S::csp(S::add(S::int(1), S::int(2)));
        let want = S::bracket(S::fun(
            "x",
            S::add(S::escape(S::bracket(lifted.clone())), S::var("x")),
        ));
        assert_eq!(p.tree, want);
        assert_eq!(p.spans.len(), p.tree.node_count());
        assert_eq!(src("% 3"), S::bracket(S::csp(S::int(3))));
    }

    #[test]
    fn nested_bracket_is_rejected() {
        let d = parse_source("let c = 1 in .< .< c >. >.").unwrap_err();
        assert!(d.message.contains("nested bracket"));
        assert_eq!(d.location.unwrap().column, 17);
    }

    #[test]
    fn polymorphic_nil_in_bracket() {
        let want = S::bracket(S::let_(
            "x",
            S::Nil,
            S::pair(S::cons(S::int(2), S::var("x")), S::cons(S::str("3"), S::var("x"))),
        ));
        assert_eq!(src(r#".<let x = [] in (2::x,"3"::x)>."#), want);
    }

    #[test]
    fn precedence_app_cons_plus() {
        // f x :: y + 1  ==  ((f x) :: y) + 1
        let e = src("f x :: y + 1");
        let want = S::add(S::cons(S::app(S::var("f"), S::var("x")), S::var("y")), S::int(1));
        assert_eq!(e, want);
        assert_eq!(src("1 :: 2 :: []"), S::cons(S::int(1), S::cons(S::int(2), S::Nil)));
        assert_eq!(src("1 + 2 + 3"), S::add(S::add(S::int(1), S::int(2)), S::int(3)));
    }

    #[test]
    fn unit_parameter_and_prefix_forms() {
        let e = src("fun () -> rset (f ()) !r");
        let want = S::fun(
            WILDCARD,
            S::rset(S::app(S::var("f"), S::Unit), S::ref_get(S::var("r"))),
        );
        assert_eq!(e, want);
        assert_eq!(src(".<% (ref [])>."), S::bracket(S::csp(S::ref_new(S::Nil))));
    }

    #[test]
    fn comments_nest() {
        assert_eq!(src("(* a (* b *) c *) 1"), S::int(1));
    }

    #[test]
    fn plain_rejects_staging() {
        let d = parse_plain(".<1>.").unwrap_err();
        assert_eq!(d.kind, DiagKind::ParseError);
        assert!(parse_plain("% 1").is_err());
    }

    #[test]
    fn plain_reads_let_inserted_code() {
        let e = parse_plain("let t_1 = (1 + 2) in fun x_1 -> (x_1 + t_1)").unwrap().tree;
        let want = S::let_(
            "t_1",
            S::add(S::int(1), S::int(2)),
            S::fun("x_1", S::add(S::var("x_1"), S::var("t_1"))),
        );
        assert_eq!(e, want);
        assert_eq!(pretty(&e), "let t_1 = (1 + 2) in fun x_1 -> (x_1 + t_1)");
    }

    #[test]
    fn plain_reads_inlined_identity_pair() {
        let e = parse_plain(r#"((fun x_2 -> x_2) 1, (fun x_1 -> x_1) "3")"#).unwrap().tree;
        let want = S::pair(
            S::app(S::fun("x_2", S::var("x_2")), S::int(1)),
            S::app(S::fun("x_1", S::var("x_1")), S::str("3")),
        );
        assert!(alpha_equal(&e, &want));
    }

    #[test]
    fn spans_are_preorder() {
        let p = parse_source("f (1 + 2)").unwrap();
        assert_eq!(p.spans.len(), p.tree.node_count());
        // App, Var f, Add, 1, 2
        assert_eq!(p.spans[0], Span { start: 0, end: 9 });
        assert_eq!(p.spans[1], Span { start: 0, end: 1 });
        assert_eq!(p.spans[2], Span { start: 3, end: 8 });
        assert_eq!(p.spans[4], Span { start: 7, end: 8 });
    }

    #[test]
    fn target_resolves_combinators_and_pipe() {
        let p = parse_target("new_scope @@ fun p -> lam (fun x -> add x (genlet p (add (int 1) (int 2))))").unwrap();
        assert_eq!(
            pretty_target(&p.tree),
            "new_scope (fun p -> lam (fun x -> add x (genlet p (add (int 1) (int 2)))))"
        );
        assert_eq!(p.spans.len(), p.tree.node_count());
    }

    #[test]
    fn target_binders_shadow_combinators() {
        let p = parse_target("fun int -> int 1").unwrap();
        assert_eq!(*p.tree.children()[0].as_ref(), *t::app(t::var("int"), t::int(1)));
        let partial = parse_target("let f = cons in f").unwrap();
        assert_eq!(pretty_target(&partial.tree), "let f = cons in f");
    }

    #[test]
    fn errors_are_located() {
        let d = parse_source("let x = 1 in\n  (x,").unwrap_err();
        let loc = d.location.unwrap();
        assert_eq!((loc.line, loc.column), (2, 6));
        assert!(parse_source("(1, 2, 3)").is_err());
        assert!(parse_source("\"abc").is_err());
    }
}
