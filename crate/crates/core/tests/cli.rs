use std::path::PathBuf;
use std::process::{Command, Output};

fn file(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("polylet-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn polylet(args: &[&str], path: Option<&PathBuf>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_polylet"));
    cmd.args(args).env_remove("POLYLET_SEED");
    if let Some(p) = path {
        cmd.arg(p);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim_end().to_string()
}

#[test]
fn typecheck_rejects_a_shared_polymorphic_cell() {
    let p = file("cell.pml", ".<let x = ref [] in (rset x 2, rset x \"3\")>.");
    let o = polylet(&["typecheck"], Some(&p));
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.starts_with(&format!("{}:1:", p.display())), "{err}");
    assert!(err.contains("type error"), "{err}");
}

#[test]
fn typecheck_picks_the_system_from_the_file() {
    let staged = file("staged.pml", ".<let x = [] in (2 :: x, \"3\" :: x)>.");
    assert_eq!(stdout(&polylet(&["typecheck"], Some(&staged))), "(int list * string list) code");
    let host = file("host.pml", "new_scope (fun p -> let x = genlet p nil in pair (cons (int 2) x) (cons (str \"3\") x))");
    assert_eq!(stdout(&polylet(&["typecheck"], Some(&host))), "(int list * string list) cod");
    let translated = polylet(&["typecheck", "--system", "host"], Some(&staged));
    assert_eq!(stdout(&translated), "(int list * string list) cod");
}

#[test]
fn gen_policy_changes_the_verdict() {
    let p = file("relaxed.pml", "let x = let r = ref [] in !r in (2 :: x, \"3\" :: x)");
    assert_eq!(polylet(&["typecheck", "--system", "staged"], Some(&p)).status.code(), Some(0));
    let strict = polylet(&["typecheck", "--system", "staged", "--gen-policy", "nonexpansive"], Some(&p));
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn codegen_shares_the_inserted_let() {
    let p = file("genlet.pml", ".<let y = 1 + 2 in fun x -> x + y>.");
    let o = polylet(&["codegen", "--backend", "string"], Some(&p));
    assert_eq!(stdout(&o), "let t_1 = (1 + 2) in fun x_2 -> (x_2 + t_1)");
    let seeded = Command::new(env!("CARGO_BIN_EXE_polylet"))
        .args(["codegen", "--backend", "quote"])
        .arg(&p)
        .env("POLYLET_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(stdout(&seeded), "let t_7 = (1 + 2) in fun x_8 -> (x_8 + t_7)");
}

#[test]
fn translate_prints_combinators() {
    let p = file("fn.pml", "fun x -> .<fun y -> (y + 1) :: .~x>.");
    assert_eq!(stdout(&polylet(&["translate"], Some(&p))), "fun x -> lam (fun y -> cons (add y (int 1)) x)");
}

#[test]
fn run_applies_the_generated_function() {
    let p = file("cb.pml", "let c = .<1 + 2>. in .<fun x -> .~c + x>.");
    let o = polylet(&["run", "--arg", "2"], Some(&p));
    assert_eq!((o.status.code(), stdout(&o)), (Some(0), "5".to_string()));
}

#[test]
fn run_reports_the_unsound_program() {
    let p = file("cbad.pml", ".<let f = fun () -> .~(% (ref [])) in (rset (f ()) 2, rset (f ()) \"3\")>.");
    let o = polylet(&["run"], Some(&p));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("soundness violation"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(polylet(&["codegen", "--backend", "text", "x.pml"], None).status.code(), Some(2));
    assert_eq!(polylet(&["run", "/nonexistent/file.pml"], None).status.code(), Some(2));
}

#[test]
fn difftest_emits_tap_and_succeeds() {
    let o = polylet(&["difftest", "--seed", "5", "--count", "10"], None);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("TAP version 13\n1.."), "{out}");
    assert!(out.ends_with("# fail 0"), "{out}");
    assert!(!out.contains("\nnot ok"));
}
