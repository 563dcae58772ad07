//! Built-in example programs with their expected verdicts.
//!
//! Source programs are two-stage; target programs are written directly
//! against the combinators. Expected code is compared up to alpha-renaming,
//! reordering of independent adjacent lets, and unused function lets.

use crate::diag::DiagKind;

#[derive(Copy, Clone, Debug)]
pub enum Program {
    Source(&'static str),
    Target(&'static str),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Accepted; the scheme, when given, must print exactly so.
    Accept(Option<&'static str>),
    Reject,
}

#[derive(Copy, Clone, Debug)]
pub enum Expect {
    /// Generated code, written in plain syntax.
    Code(&'static str),
    /// A printed value.
    Value(&'static str),
    Diag(DiagKind),
}

#[derive(Copy, Clone, Debug)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub program: Program,
    /// Verdict of the staged checker; `None` for target programs.
    pub staged: Option<Verdict>,
    /// Verdict of the host checker on the translation (or on the program
    /// itself, for target programs).
    pub host: Verdict,
    /// Code built by the quote backend.
    pub quote: Option<Expect>,
    /// Code built by the string backend.
    pub text: Option<Expect>,
    /// Outcome of running through the eval backend, forcing any code.
    pub eval: Option<Expect>,
    /// Literal argument for a program that generates a function.
    pub arg: Option<&'static str>,
    /// Divergence class the typing-preservation check should report.
    pub divergence: Option<&'static str>,
}

const BASE: CorpusEntry = CorpusEntry {
    name: "",
    program: Program::Source(""),
    staged: None,
    host: Verdict::Accept(None),
    quote: None,
    text: None,
    eval: None,
    arg: None,
    divergence: None,
};

const fn acc(s: &'static str) -> Verdict {
    Verdict::Accept(Some(s))
}

pub const CORPUS: &[CorpusEntry] = &[
    // Present-stage programs.
    CorpusEntry {
        name: "shared-list",
        program: Program::Source("let x = 1 :: [] in (2 :: x, 3 :: x)"),
        staged: Some(acc("int list * int list")),
        host: acc("int list * int list"),
        eval: Some(Expect::Value("([2; 1], [3; 1])")),
        ..BASE
    },
    CorpusEntry {
        name: "copied-list",
        program: Program::Source("(2 :: 1 :: [], 3 :: 1 :: [])"),
        staged: Some(acc("int list * int list")),
        eval: Some(Expect::Value("([2; 1], [3; 1])")),
        ..BASE
    },
    CorpusEntry {
        name: "poly-nil",
        program: Program::Source("let x = [] in (2 :: x, \"3\" :: x)"),
        staged: Some(acc("int list * string list")),
        host: acc("int list * string list"),
        eval: Some(Expect::Value("([2], [\"3\"])")),
        ..BASE
    },
    CorpusEntry {
        name: "inlined-nil",
        program: Program::Source("(2 :: [], \"3\" :: [])"),
        staged: Some(acc("int list * string list")),
        ..BASE
    },
    CorpusEntry {
        name: "nonexpansive-nil",
        program: Program::Source("let x = let msg = \"bound\" in [] in (2 :: x, \"3\" :: x)"),
        staged: Some(acc("int list * string list")),
        host: acc("int list * string list"),
        ..BASE
    },
    CorpusEntry {
        name: "shared-cell",
        program: Program::Source("let x = ref (1 :: []) in (rset x 2, rset x 3)"),
        staged: Some(acc("int list * int list")),
        eval: Some(Expect::Value("([2; 3; 1], [3; 1])")),
        ..BASE
    },
    CorpusEntry {
        name: "fresh-cells",
        program: Program::Source("(rset (ref (1 :: [])) 2, rset (ref (1 :: [])) 3)"),
        staged: Some(acc("int list * int list")),
        eval: Some(Expect::Value("([2; 1], [3; 1])")),
        ..BASE
    },
    CorpusEntry {
        name: "poly-cell",
        program: Program::Source("let x = ref [] in (rset x 2, rset x \"3\")"),
        staged: Some(Verdict::Reject),
        host: Verdict::Reject,
        ..BASE
    },
    CorpusEntry {
        name: "relaxed-deref",
        program: Program::Source("let x = let r = ref [] in !r in (2 :: x, \"3\" :: x)"),
        staged: Some(acc("int list * string list")),
        host: acc("int list * string list"),
        eval: Some(Expect::Value("([2], [\"3\"])")),
        ..BASE
    },
    // Brackets, escapes and cross-stage persistence.
    CorpusEntry {
        name: "sum-code",
        program: Program::Source(".<1 + 2>."),
        staged: Some(acc("int code")),
        host: acc("int cod"),
        quote: Some(Expect::Code("1 + 2")),
        text: Some(Expect::Code("1 + 2")),
        eval: Some(Expect::Value("3")),
        ..BASE
    },
    CorpusEntry {
        name: "splice",
        program: Program::Source("let c = .<1 + 2>. in .<fun x -> .~c + x>."),
        staged: Some(acc("(int -> int) code")),
        host: acc("(int -> int) cod"),
        quote: Some(Expect::Code("fun x -> (1 + 2) + x")),
        eval: Some(Expect::Value("5")),
        arg: Some("2"),
        ..BASE
    },
    CorpusEntry {
        name: "hygiene-same-name",
        program: Program::Source(".<fun x -> .~(let body = .<x>. in .<fun x -> .~body>.)>."),
        staged: Some(acc("('a -> 'b -> 'a) code")),
        host: acc("('_a -> '_b -> '_a) cod"),
        quote: Some(Expect::Code("fun a -> fun b -> a")),
        ..BASE
    },
    CorpusEntry {
        name: "hygiene-other-name",
        program: Program::Source(".<fun y -> .~(let body = .<y>. in .<fun x -> .~body>.)>."),
        staged: Some(acc("('a -> 'b -> 'a) code")),
        host: acc("('_a -> '_b -> '_a) cod"),
        quote: Some(Expect::Code("fun a -> fun b -> a")),
        ..BASE
    },
    CorpusEntry {
        name: "lift-sum",
        program: Program::Source(".<fun x -> .~(% (1 + 2)) + x>."),
        staged: Some(acc("(int -> int) code")),
        quote: Some(Expect::Code("fun x -> 3 + x")),
        text: Some(Expect::Code("fun x -> 3 + x")),
        eval: Some(Expect::Value("5")),
        arg: Some("2"),
        ..BASE
    },
    CorpusEntry {
        name: "let-lift",
        program: Program::Source(".<fun x -> .~(let y = 1 + 2 in .<% y>.) + x>."),
        staged: Some(acc("(int -> int) code")),
        quote: Some(Expect::Code("fun x -> 3 + x")),
        eval: Some(Expect::Value("5")),
        arg: Some("2"),
        ..BASE
    },
    CorpusEntry {
        name: "mutable-csp",
        program: Program::Source("let r = ref [] in .<rset (% r) 0>."),
        staged: Some(acc("int list code")),
        host: acc("int list cod"),
        text: Some(Expect::Diag(DiagKind::CspSerialization)),
        eval: Some(Expect::Value("[0]")),
        ..BASE
    },
    CorpusEntry {
        name: "mutable-csp-pair",
        program: Program::Source("let r = ref [] in .<(rset (% r) 1, rset (% r) 2)>."),
        staged: Some(acc("(int list * int list) code")),
        eval: Some(Expect::Value("([1; 2], [2])")),
        ..BASE
    },
    // Polymorphic let inside brackets.
    CorpusEntry {
        name: "shared-list-code",
        program: Program::Source(".<let x = 1 :: [] in (2 :: x, 3 :: x)>."),
        staged: Some(acc("(int list * int list) code")),
        host: acc("(int list * int list) cod"),
        quote: Some(Expect::Code("let t = 1 :: [] in (2 :: t, 3 :: t)")),
        eval: Some(Expect::Value("([2; 1], [3; 1])")),
        ..BASE
    },
    CorpusEntry {
        name: "poly-nil-code",
        program: Program::Source(".<let x = [] in (2 :: x, \"3\" :: x)>."),
        staged: Some(acc("(int list * string list) code")),
        host: acc("(int list * string list) cod"),
        quote: Some(Expect::Code("let t = [] in (2 :: t, \"3\" :: t)")),
        text: Some(Expect::Code("let t = [] in (2 :: t, \"3\" :: t)")),
        eval: Some(Expect::Value("([2], [\"3\"])")),
        ..BASE
    },
    CorpusEntry {
        name: "poly-id-code",
        program: Program::Source(".<let f = fun x -> x in (f 2, f \"3\")>."),
        staged: Some(acc("(int * string) code")),
        host: acc("(int * string) cod"),
        quote: Some(Expect::Code("let f = fun x -> x in (f 2, f \"3\")")),
        text: Some(Expect::Code("let f = fun x -> x in (f 2, f \"3\")")),
        eval: Some(Expect::Value("(2, \"3\")")),
        ..BASE
    },
    CorpusEntry {
        name: "poly-cell-code",
        program: Program::Source(".<let x = ref [] in (rset x 2, rset x \"3\")>."),
        staged: Some(Verdict::Reject),
        host: Verdict::Reject,
        ..BASE
    },
    CorpusEntry {
        name: "thunked-cell",
        program: Program::Source(".<let f = fun () -> ref [] in (rset (f ()) 2, rset (f ()) \"3\")>."),
        staged: Some(acc("(int list * string list) code")),
        host: acc("(int list * string list) cod"),
        quote: Some(Expect::Code("let f = fun u -> ref [] in (rset (f ()) 2, rset (f ()) \"3\")")),
        eval: Some(Expect::Value("([2], [\"3\"])")),
        ..BASE
    },
    CorpusEntry {
        name: "persisted-cell-thunk",
        program: Program::Source(".<let f = fun () -> .~(% (ref [])) in (rset (f ()) 2, rset (f ()) \"3\")>."),
        staged: Some(acc("(int list * string list) code")),
        host: acc("(int list * string list) cod"),
        eval: Some(Expect::Diag(DiagKind::SoundnessViolation)),
        ..BASE
    },
    CorpusEntry {
        name: "closure-cell-code",
        program: Program::Source(".<let f = let r = ref [] in fun x -> rset r x in (f 1, f \"3\")>."),
        staged: Some(Verdict::Reject),
        host: Verdict::Reject,
        ..BASE
    },
    CorpusEntry {
        name: "present-stage-function",
        program: Program::Source("fun x -> .<fun y -> (y + 1) :: .~x>."),
        staged: Some(acc("int list code -> (int -> int list) code")),
        host: acc("int list cod -> (int -> int list) cod"),
        ..BASE
    },
    // Staged lets whose translation needs a let-insertion form for values
    // other than functions.
    CorpusEntry {
        name: "pair-with-function",
        program: Program::Source(
            ".<let x = ((fun y -> y), 1) in \
             (x :: ((fun y -> y + 1), 2) :: [], x :: ((fun y -> \"s\"), 3) :: [])>.",
        ),
        staged: Some(acc("(((int -> int) * int) list * ((string -> string) * int) list) code")),
        host: Verdict::Reject,
        divergence: Some("pair"),
        ..BASE
    },
    CorpusEntry {
        name: "function-alias",
        program: Program::Source(".<let f = fun x -> x in let g = f in (g 1, g \"a\")>."),
        staged: Some(acc("(int * string) code")),
        host: Verdict::Reject,
        divergence: Some("var"),
        ..BASE
    },
    // Programs written against the combinators.
    CorpusEntry {
        name: "genlet-above-lam",
        program: Program::Target("new_scope (fun p -> lam (fun x -> add x (genlet p (add (int 1) (int 2)))))"),
        host: acc("(int -> int) cod"),
        quote: Some(Expect::Code("let t = 1 + 2 in fun x -> x + t")),
        text: Some(Expect::Code("let t = 1 + 2 in fun x -> x + t")),
        eval: Some(Expect::Value("5")),
        arg: Some("2"),
        ..BASE
    },
    CorpusEntry {
        name: "genlet-nil",
        program: Program::Target(
            "new_scope (fun p -> let x = genlet p nil in pair (cons (int 2) x) (cons (str \"3\") x))",
        ),
        host: acc("(int list * string list) cod"),
        quote: Some(Expect::Code("let t = [] in (2 :: t, \"3\" :: t)")),
        ..BASE
    },
    CorpusEntry {
        name: "inlined-nil-combinators",
        program: Program::Target("new_scope (fun p -> let x = nil in pair (cons (int 2) x) (cons (str \"3\") x))"),
        host: acc("(int list * string list) cod"),
        quote: Some(Expect::Code("(2 :: [], \"3\" :: [])")),
        ..BASE
    },
    CorpusEntry {
        name: "genlet-cell",
        program: Program::Target(
            "new_scope (fun p -> let x = genlet p (ref_ nil) in pair (rset_ x (int 2)) (rset_ x (str \"3\")))",
        ),
        host: Verdict::Reject,
        ..BASE
    },
    CorpusEntry {
        name: "genlet-identity",
        program: Program::Target(
            "new_scope (fun p -> let f = genlet p (lam (fun x -> x)) in pair (app f (int 1)) (app f (str \"3\")))",
        ),
        host: Verdict::Reject,
        ..BASE
    },
    CorpusEntry {
        name: "genlet-closure-cell",
        program: Program::Target(
            "new_scope (fun p1 -> let f = genlet p1 (new_scope (fun p2 -> \
             let r = genlet p2 (ref_ nil) in lam (fun x -> rset_ r x))) in \
             pair (app f (int 1)) (app f (str \"3\")))",
        ),
        host: Verdict::Reject,
        ..BASE
    },
    CorpusEntry {
        name: "thunk-inlined",
        program: Program::Target(
            "let f = fun () -> lam (fun x -> x) in pair (app (f ()) (int 1)) (app (f ()) (str \"3\"))",
        ),
        host: acc("(int * string) cod"),
        text: Some(Expect::Code("((fun x -> x) 1, (fun x -> x) \"3\")")),
        ..BASE
    },
    CorpusEntry {
        name: "thunk-genlet",
        program: Program::Target(
            "new_scope (fun p -> let f = fun () -> genlet p (lam (fun x -> x)) in \
             pair (app (f ()) (int 1)) (app (f ()) (str \"3\")))",
        ),
        host: acc("(int * string) cod"),
        text: Some(Expect::Code("let t2 = fun x1 -> x1 in let t4 = fun x3 -> x3 in (t4 1, t2 \"3\")")),
        eval: Some(Expect::Value("(1, \"3\")")),
        ..BASE
    },
    CorpusEntry {
        name: "thunk-genletfun",
        program: Program::Target(
            "new_funscope (fun p -> let f = fun () -> genletfun p (fun x -> x) in \
             pair (app (f ()) (int 1)) (app (f ()) (str \"3\")))",
        ),
        host: acc("(int * string) cod"),
        text: Some(Expect::Code("let t = fun x -> x in (t 1, t \"3\")")),
        eval: Some(Expect::Value("(1, \"3\")")),
        ..BASE
    },
    CorpusEntry {
        name: "thunk-genletfun-persisted-cell",
        program: Program::Target(
            "new_funscope (fun p -> let f = fun () -> genletfun p (fun _ -> csp (ref [])) in \
             pair (rset_ (app (f ()) (csp ())) (int 1)) (rset_ (app (f ()) (csp ())) (str \"3\")))",
        ),
        host: acc("(int list * string list) cod"),
        eval: Some(Expect::Diag(DiagKind::SoundnessViolation)),
        ..BASE
    },
    CorpusEntry {
        name: "genlet-moves-bound-variable",
        program: Program::Target("new_scope (fun p -> lam (fun x -> add x (genlet p (add x (int 2)))))"),
        host: acc("(int -> int) cod"),
        quote: Some(Expect::Diag(DiagKind::ScopeExtrusion)),
        ..BASE
    },
];

/// Looks an entry up by name.
pub fn entry(name: &str) -> Option<&'static CorpusEntry> {
    CORPUS.iter().find(|e| e.name == name)
}
