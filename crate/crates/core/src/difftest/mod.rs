//! Differential checks of the translation against the staged semantics.
//!
//! Three properties are checked on the built-in corpus and on generated
//! programs: a translation of a well-typed staged program is host-typable,
//! the quote backend rebuilds exactly the code the staged program denotes,
//! and the three backends agree on what generated code computes.

mod compare;
pub mod corpus;
pub mod gen;
pub mod reference;

use std::fmt::Write as _;

use crate::ast::{pretty, SourceExpr, Term};
use crate::backends::CodeValue;
use crate::diag::{DiagKind, Diagnostic};
use crate::engine::{self, Backend, Session, Value};
use crate::parser::{parse_plain, parse_source, parse_target};
use crate::typecheck::{infer_host, infer_staged_detailed, variance_of, GenPolicy, StagedTyping, Variance};
use crate::types::{Type, TypeEnv, TypeScheme};
use crate::unstage::{lint_scopes, translate};

pub use compare::{equal_modulo_let_reorder, strip_dead_fun_lets};
pub use corpus::{CorpusEntry, Expect, Program, Verdict, CORPUS};
pub use gen::Generator;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    /// A failure of a class listed in the divergence manifest.
    KnownDivergence(String),
    Skipped(String),
    Fail(String),
}

impl Outcome {
    pub fn is_fail(&self) -> bool {
        matches!(self, Outcome::Fail(_))
    }
}

const MANIFEST: &str = include_str!("known_divergences.txt");

/// Divergence classes listed in the checked-in manifest.
pub fn known_divergence_classes() -> Vec<&'static str> {
    MANIFEST
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

fn rhs_shape(e: &SourceExpr) -> &'static str {
    use SourceExpr::*;
    match e {
        Var(_) => "var",
        Pair(..) => "pair",
        Cons(..) => "cons",
        Let(..) => "let",
        Csp(_) => "csp",
        Nil => "nil",
        _ => "other",
    }
}

/// The shape of the first future-stage let that the staged checker
/// generalizes over a non-covariant variable without the right-hand side
/// being a literal function.
fn divergence_shape(e: &SourceExpr, typing: &StagedTyping) -> Option<&'static str> {
    fn go(e: &SourceExpr, level: u8, id: &mut usize, typing: &StagedTyping) -> Option<&'static str> {
        let here = *id;
        *id += 1;
        if let (SourceExpr::Let(_, rhs, _), 1) = (e, level) {
            let scheme = typing.let_schemes.iter().find(|(i, _)| *i == here).map(|(_, s)| s);
            if let Some(s) = scheme {
                let bad = s
                    .quantified
                    .iter()
                    .any(|v| !matches!(variance_of(*v, &s.body), Variance::Covariant | Variance::Unused));
                if bad && !matches!(**rhs, SourceExpr::Fun(..)) {
                    return Some(rhs_shape(rhs));
                }
            }
        }
        let inner = match e {
            SourceExpr::Bracket(_) => 1,
            SourceExpr::Escape(_) | SourceExpr::Csp(_) => 0,
            _ => level,
        };
        e.children().into_iter().find_map(|c| go(c, inner, id, typing))
    }
    go(e, 0, &mut 0, typing)
}

/// A program the staged checker accepts must have a host-typable
/// translation, except in the manifest's divergence classes.
pub fn check_typing_preservation(e: &SourceExpr) -> Outcome {
    let env = TypeEnv::new();
    let Ok(typing) = infer_staged_detailed(&env, e, 0, GenPolicy::Relaxed) else {
        return Outcome::Pass;
    };
    let Err(d) = infer_host(&env, &translate(e), GenPolicy::Relaxed) else {
        return Outcome::Pass;
    };
    match divergence_shape(e, &typing) {
        Some(class) if known_divergence_classes().contains(&class) => Outcome::KnownDivergence(class.to_string()),
        Some(class) => Outcome::Fail(format!("unlisted divergence class `{class}`: {d}")),
        None => Outcome::Fail(format!("translation rejected: {d}")),
    }
}

/// Quote-backend code for a translated program.
pub fn quote_code(t: &Term) -> Result<SourceExpr, Diagnostic> {
    match engine::eval(t, Backend::Quote)? {
        Value::Code(CodeValue::Quote(e)) => Ok((*e).clone()),
        other => Err(Diagnostic::runtime(format!("expected code, got {}", other.tag()))),
    }
}

/// String-backend text for a translated program.
pub fn string_code(t: &Term) -> Result<String, Diagnostic> {
    match engine::eval(t, Backend::String)? {
        Value::Code(CodeValue::Str { text, .. }) => Ok(text.to_string()),
        other => Err(Diagnostic::runtime(format!("expected code, got {}", other.tag()))),
    }
}

fn same_code(a: &SourceExpr, b: &SourceExpr) -> bool {
    equal_modulo_let_reorder(&strip_dead_fun_lets(a), &strip_dead_fun_lets(b))
}

/// The quote backend's code must be the code the reference evaluator builds
/// from the staged program directly.
pub fn check_round_trip(e: &SourceExpr) -> Outcome {
    let want = match reference::generate(e) {
        Ok(Some(c)) => c,
        Ok(None) => return Outcome::Fail("program does not produce code".into()),
        Err(msg) => return Outcome::Fail(format!("reference evaluator: {msg}")),
    };
    match quote_code(&translate(e)) {
        Ok(got) if same_code(&got, &want) => Outcome::Pass,
        Ok(got) => Outcome::Fail(format!("got `{}`, want `{}`", pretty(&got), pretty(&want))),
        Err(d) => Outcome::Fail(d.to_string()),
    }
}

/// Result of running a program's generated code, applied to `arg` when
/// given.
fn leg(t: &Term, backend: Backend, arg: Option<&SourceExpr>) -> Result<Value, Diagnostic> {
    let mut s = Session::new(backend);
    let Value::Code(code) = s.eval(t)? else {
        return Err(Diagnostic::runtime("program does not produce code"));
    };
    let v = s.run_code(&code)?;
    match arg {
        Some(a) => {
            let a = s.eval_plain(a)?;
            s.apply(v, a)
        }
        None => Ok(v),
    }
}

fn agree(a: &Result<Value, Diagnostic>, b: &Result<Value, Diagnostic>) -> bool {
    match (a, b) {
        (Ok(x), Ok(y)) => x.same(y),
        (Err(x), Err(y)) => x.kind == y.kind,
        _ => false,
    }
}

fn show(r: &Result<Value, Diagnostic>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(d) => d.to_string(),
    }
}

/// Forcing evaluator code, re-running printed code and re-running the code
/// tree must give the same first-order result. Printing is undefined for
/// code that persists a mutable value, so that leg is then skipped.
pub fn check_observational(e: &SourceExpr, arg: Option<&SourceExpr>) -> Outcome {
    observe(&translate(e), arg)
}

pub fn observe(t: &Term, arg: Option<&SourceExpr>) -> Outcome {
    let a = leg(t, Backend::Eval, arg);
    let c = leg(t, Backend::Quote, arg);
    if !agree(&a, &c) {
        return Outcome::Fail(format!("eval gives {}, quote gives {}", show(&a), show(&c)));
    }
    if let Ok(v) = &a {
        if !v.is_first_order() {
            return Outcome::Fail(format!("result {v} is not first-order"));
        }
    }
    let b = leg(t, Backend::String, arg);
    match &b {
        Err(d) if d.kind == DiagKind::CspSerialization => Outcome::Skipped(format!("string leg: {}", d.message)),
        _ if agree(&a, &b) => Outcome::Pass,
        _ => Outcome::Fail(format!("eval gives {}, string gives {}", show(&a), show(&b))),
    }
}

/// True for `t code` with `t` first-order, or for `(a -> t) code` when an
/// argument will be supplied.
pub fn observable(scheme: &TypeScheme, with_arg: bool) -> bool {
    match &scheme.body {
        Type::Code(t) => match &**t {
            Type::Arrow(_, r) if with_arg => r.is_first_order(),
            t => t.is_first_order(),
        },
        _ => false,
    }
}

fn verdict(name: &str, got: Result<TypeScheme, Diagnostic>, want: Verdict, code_kw: &str) -> Outcome {
    match (got, want) {
        (Ok(s), Verdict::Accept(Some(w))) if s.display(code_kw) != w => {
            Outcome::Fail(format!("{name} scheme `{}`, want `{w}`", s.display(code_kw)))
        }
        (Ok(_), Verdict::Accept(_)) | (Err(_), Verdict::Reject) => Outcome::Pass,
        (Ok(s), Verdict::Reject) => Outcome::Fail(format!("{name} accepts with `{}`", s.display(code_kw))),
        (Err(d), Verdict::Accept(_)) => Outcome::Fail(format!("{name} rejects: {d}")),
    }
}

fn expect_code(got: Result<SourceExpr, Diagnostic>, want: Expect) -> Outcome {
    match (got, want) {
        (Ok(c), Expect::Code(w)) => match parse_plain(w) {
            Ok(w) if same_code(&c, &w.tree) => Outcome::Pass,
            Ok(_) => Outcome::Fail(format!("got `{}`, want `{w}`", pretty(&c))),
            Err(d) => Outcome::Fail(format!("bad expectation: {d}")),
        },
        (Err(d), Expect::Diag(k)) if d.kind == k => Outcome::Pass,
        (Ok(c), want) => Outcome::Fail(format!("got `{}`, want {want:?}", pretty(&c))),
        (Err(d), want) => Outcome::Fail(format!("got {d}, want {want:?}")),
    }
}

/// Runs a translated program with the eval backend, forcing any code.
pub fn run_eval(t: &Term, arg: Option<&SourceExpr>) -> Result<Value, Diagnostic> {
    let mut s = Session::new(Backend::Eval);
    let mut v = s.eval(t)?;
    if let Value::Code(c) = &v {
        v = s.run_code(c)?;
        if let Some(a) = arg {
            let a = s.eval_plain(a)?;
            v = s.apply(v, a)?;
        }
    }
    Ok(v)
}

fn expect_value(got: Result<Value, Diagnostic>, want: Expect) -> Outcome {
    match (got, want) {
        (Ok(v), Expect::Value(w)) if v.to_string() == w => Outcome::Pass,
        (Err(d), Expect::Diag(k)) if d.kind == k => Outcome::Pass,
        (got, want) => Outcome::Fail(format!("got {}, want {want:?}", show(&got))),
    }
}

/// Every check the entry's expectations call for, labelled.
pub fn check_entry(entry: &CorpusEntry) -> Vec<(String, Outcome)> {
    let mut out = Vec::new();
    let mut push = |what: &str, o: Outcome| out.push((format!("{} {what}", entry.name), o));
    let env = TypeEnv::new();
    let arg = match entry.arg.map(parse_plain).transpose() {
        Ok(a) => a.map(|p| p.tree),
        Err(d) => {
            push("argument", Outcome::Fail(d.to_string()));
            return out;
        }
    };
    let (term, host_scheme) = match entry.program {
        Program::Source(src) => {
            let e = match parse_source(src) {
                Ok(p) => p.tree,
                Err(d) => {
                    push("parse", Outcome::Fail(d.to_string()));
                    return out;
                }
            };
            let staged = infer_staged_detailed(&env, &e, 0, GenPolicy::Relaxed).map(|t| t.scheme);
            if let Some(want) = entry.staged {
                push("staged typing", verdict("staged checker", staged.clone(), want, "code"));
            }
            let t = translate(&e);
            push(
                "scope lint",
                lint_scopes(&t).map_or_else(Outcome::Fail, |()| Outcome::Pass),
            );
            let preservation = check_typing_preservation(&e);
            let preservation = match (entry.divergence, preservation) {
                (Some(c), Outcome::KnownDivergence(got)) if got == c => Outcome::KnownDivergence(got),
                (Some(c), other) => Outcome::Fail(format!("expected divergence `{c}`, got {other:?}")),
                (None, other) => other,
            };
            push("typing preservation", preservation);
            if let Ok(s) = &staged {
                if matches!(s.body, Type::Code(_)) && !matches!(entry.quote, Some(Expect::Diag(_))) {
                    push("round trip", check_round_trip(&e));
                }
                if observable(s, arg.is_some()) {
                    push("observational", observe(&t, arg.as_ref()));
                }
            }
            let host = infer_host(&env, &t, GenPolicy::Relaxed);
            (t, host)
        }
        Program::Target(src) => {
            let t = match parse_target(src) {
                Ok(p) => std::sync::Arc::new(p.tree),
                Err(d) => {
                    push("parse", Outcome::Fail(d.to_string()));
                    return out;
                }
            };
            let host = infer_host(&env, &t, GenPolicy::Relaxed);
            if let Ok(s) = &host {
                if observable(s, arg.is_some()) {
                    push("observational", observe(&t, arg.as_ref()));
                }
            }
            (t, host)
        }
    };
    push("host typing", verdict("host checker", host_scheme, entry.host, "cod"));
    if let Some(want) = entry.quote {
        push("quote backend", expect_code(quote_code(&term), want));
    }
    if let Some(want) = entry.text {
        let got = string_code(&term).and_then(|text| parse_plain(&text).map(|p| p.tree));
        push("string backend", expect_code(got, want));
    }
    if let Some(want) = entry.eval {
        push("eval backend", expect_value(run_eval(&term, arg.as_ref()), want));
    }
    out
}

/// Checks on one generated program.
pub fn check_generated(e: &SourceExpr) -> Vec<(&'static str, Outcome)> {
    let mut out = vec![
        ("typing preservation", check_typing_preservation(e)),
        ("round trip", check_round_trip(e)),
    ];
    if let Ok(t) = infer_staged_detailed(&TypeEnv::new(), e, 0, GenPolicy::Relaxed) {
        if observable(&t.scheme, false) {
            out.push(("observational", check_observational(e, None)));
        }
    }
    out
}

#[derive(Default)]
pub struct Report {
    pub results: Vec<(String, Outcome)>,
}

impl Report {
    pub fn failures(&self) -> usize {
        self.results.iter().filter(|(_, o)| o.is_fail()).count()
    }

    pub fn count(&self, pred: impl Fn(&Outcome) -> bool) -> usize {
        self.results.iter().filter(|(_, o)| pred(o)).count()
    }

    /// TAP version 13. Skips use the SKIP directive; known divergences pass
    /// with a trailing note.
    pub fn to_tap(&self) -> String {
        let mut s = String::from("TAP version 13\n");
        let _ = writeln!(s, "1..{}", self.results.len());
        for (i, (name, o)) in self.results.iter().enumerate() {
            let n = i + 1;
            let _ = match o {
                Outcome::Pass => writeln!(s, "ok {n} - {name}"),
                Outcome::Skipped(why) => writeln!(s, "ok {n} - {name} # SKIP {why}"),
                Outcome::KnownDivergence(c) => writeln!(s, "ok {n} - {name} (known divergence: {c})"),
                Outcome::Fail(why) => {
                    writeln!(s, "not ok {n} - {name}").and_then(|_| {
                        why.lines().try_for_each(|l| writeln!(s, "  # {l}"))
                    })
                }
            };
        }
        let _ = writeln!(s, "# fail {}", self.failures());
        s
    }
}

/// The corpus followed by `count` programs generated from `seed`.
pub fn run(seed: u64, count: usize) -> Report {
    let mut report = Report::default();
    for entry in CORPUS {
        report.results.extend(check_entry(entry));
    }
    let mut g = Generator::new(seed);
    for i in 0..count {
        let e = g.program();
        for (what, o) in check_generated(&e) {
            report.results.push((format!("random {seed}/{i} {what}: {}", pretty(&e)), o));
        }
    }
    report
}
