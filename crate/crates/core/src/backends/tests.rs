use std::sync::Arc;

use super::*;
use crate::ast::{alpha_equal, pretty};
use crate::engine::{eval as eval_term, Session};
use crate::parser::{parse_plain, parse_source, parse_target};
use crate::unstage::translate;

fn target(src: &str) -> crate::ast::Term {
    Arc::new(parse_target(src).unwrap().tree)
}

fn generate(src: &str, backend: Backend) -> Result<Value, Diagnostic> {
    eval_term(&target(src), backend)
}

fn text(src: &str) -> String {
    match generate(src, Backend::String).unwrap() {
        Value::Code(CodeValue::Str { text, .. }) => text.to_string(),
        other => panic!("not text: {other}"),
    }
}

fn tree(src: &str) -> SourceExpr {
    match generate(src, Backend::Quote).unwrap() {
        Value::Code(CodeValue::Quote(e)) => (*e).clone(),
        other => panic!("not a tree: {other}"),
    }
}

fn plain(src: &str) -> SourceExpr {
    parse_plain(src).unwrap().tree
}

#[test]
fn string_add_is_parenthesized() {
    assert_eq!(text("add (int 1) (int 2)"), "(1 + 2)");
}

#[test]
fn quote_lam_binds_a_fresh_name() {
    let e = tree("lam (fun x -> x)");
    assert!(alpha_equal(&e, &plain("fun x_1 -> x_1")), "{}", pretty(&e));
    assert!(matches!(e, SourceExpr::Fun(ref x, _) if x.starts_with("x_")));
}

#[test]
fn eval_lam_applies() {
    let mut s = Session::new(Backend::Eval);
    let v = s.eval(&target("app (lam (fun x -> add x (int 1))) (int 4)")).unwrap();
    let Value::Code(c) = v else { panic!() };
    assert!(s.run_code(&c).unwrap().same(&Value::Int(5)));
}

const GENLET_EXAMPLE: &str = "new_scope (fun p -> lam (fun x -> add x (genlet p (add (int 1) (int 2)))))";

#[test]
fn genlet_inserts_above_lam() {
    let want = plain("let t = (1 + 2) in fun x -> (x + t)");
    assert!(alpha_equal(&tree(GENLET_EXAMPLE), &want));
    assert_eq!(text(GENLET_EXAMPLE), "let t_2 = (1 + 2) in fun x_1 -> (x_1 + t_2)");
}

#[test]
fn genlet_shares_polymorphic_nil() {
    let src = "new_scope (fun p -> let x = genlet p nil in pair (cons (int 2) x) (cons (str \"3\") x))";
    let want = plain("let x_1 = [] in ((2 :: x_1), (\"3\" :: x_1))");
    assert!(alpha_equal(&tree(src), &want));
    let inlined = "new_scope (fun p -> let x = nil in pair (cons (int 2) x) (cons (str \"3\") x))";
    assert_eq!(pretty(&tree(inlined)), "((2 :: []), (\"3\" :: []))");
}

#[test]
fn thunked_genlet_inserts_twice() {
    let src = "new_scope (fun p -> let f = fun () -> genlet p (lam (fun x -> x)) in \
               pair (app (f ()) (int 1)) (app (f ()) (str \"3\")))";
    assert_eq!(
        text(src),
        "let t_2 = fun x_1 -> x_1 in let t_4 = fun x_3 -> x_3 in (t_4 1, t_2 \"3\")"
    );
}

#[test]
fn genletfun_inserts_once() {
    let src = "new_funscope (fun p -> let f = fun () -> genletfun p (fun x -> x) in \
               pair (app (f ()) (int 2)) (app (f ()) (str \"3\")))";
    assert_eq!(text(src), "let t_2 = fun x_1 -> x_1 in (t_2 2, t_2 \"3\")");
    let mut s = Session::new(Backend::Eval);
    let Value::Code(c) = s.eval(&target(src)).unwrap() else { panic!() };
    assert_eq!(s.run_code(&c).unwrap().to_string(), "(2, \"3\")");
}

#[test]
fn genletfun_memo_keeps_the_first_entry() {
    let src = "new_funscope (fun p -> pair (genletfun p (fun x -> x)) (genletfun p (fun y -> int 1)))";
    let e = tree(src);
    let want = plain("let t = fun y -> 1 in (t, t)");
    assert!(alpha_equal(&e, &want), "{}", pretty(&e));
}

#[test]
fn unsound_sharing_is_caught_at_run_time() {
    let src = ".<let f = fun () -> % (ref []) in (rset (f ()) 2, rset (f ()) \"3\")>.";
    let t = translate(&parse_source(src).unwrap().tree);
    let mut s = Session::new(Backend::Eval);
    let Value::Code(c) = s.eval(&t).unwrap() else { panic!() };
    let d = s.run_code(&c).unwrap_err();
    assert_eq!(d.kind, DiagKind::SoundnessViolation, "{d}");
}

#[test]
fn moving_a_bound_variable_is_scope_extrusion() {
    let src = "new_scope (fun p -> lam (fun x -> add x (genlet p (add x (int 2)))))";
    let d = generate(src, Backend::Quote).unwrap_err();
    assert_eq!(d.kind, DiagKind::ScopeExtrusion);
    assert!(d.message.contains("x_1"), "{}", d.message);
}

#[test]
fn closed_code_passes_the_scope_check() {
    assert!(check_scope(&plain("(1, [])")).is_ok());
    assert!(check_scope(&plain("fun x -> x")).is_ok());
}

#[test]
fn string_csp_writes_literals_only() {
    assert_eq!(text("csp (1 :: 2 :: [])"), "(1 :: (2 :: []))");
    assert_eq!(text("csp (\"a\", ())"), "(\"a\", ())");
    let d = generate("csp (ref [])", Backend::String).unwrap_err();
    assert_eq!(d.kind, DiagKind::CspSerialization);
}

#[test]
fn quote_csp_persists_cells() {
    let mut s = Session::new(Backend::Quote);
    let v = s.eval(&target("let r = ref [] in pair (csp r) (csp r)")).unwrap();
    let Value::Code(CodeValue::Quote(e)) = &v else { panic!() };
    // Right-to-left: the second component persists first.
    assert_eq!(pretty(e), "(<csp#1>, <csp#0>)");
    let Value::Code(c) = v else { panic!() };
    let Value::Pair(p) = s.run_code(&c).unwrap() else { panic!() };
    assert!(p.0.same(&p.1), "both slots hold the same cell");
}

#[test]
fn eval_csp_shares_the_cell_across_runs() {
    let mut s = Session::new(Backend::Eval);
    let r = Value::Ref(Rc::new(RefCell::new(Value::list(vec![]))));
    let t = target("rset_ (csp r) (int 0)");
    let Value::Code(c) = s.eval_in(&t, &[("r", r.clone())]).unwrap() else { panic!() };
    s.run_code(&c).unwrap();
    s.run_code(&c).unwrap();
    assert_eq!(r.to_string(), "{contents = [0; 0]}");
}

#[test]
fn genlet_outside_its_scope_fails() {
    let stale = Value::Scope(Rc::new(ScopeVal { prompt: 99, memo: None }));
    for backend in [Backend::String, Backend::Quote, Backend::Eval] {
        let mut s = Session::new(backend);
        let d = s.eval_in(&target("genlet p (int 1)"), &[("p", stale.clone())]).unwrap_err();
        assert!(d.message.contains("not active"), "{d}");
    }
}

#[test]
fn mixing_backends_is_rejected() {
    let mut s = Session::new(Backend::Quote);
    let foreign = Value::Code(CodeValue::Str { text: Rc::from("1"), prec: Prec::Atom });
    let d = s.eval_in(&target("add c c"), &[("c", foreign)]).unwrap_err();
    assert_eq!(d.kind, DiagKind::RuntimeError);
}
