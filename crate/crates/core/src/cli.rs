//! Command-line front end. Artifacts go to stdout, diagnostics to stderr.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::ast::{pretty, pretty_target, SourceExpr, TargetTerm};
use crate::backends::{check_scope, CodeValue};
use crate::diag::Diagnostic;
use crate::engine::{Backend, Session, Value};
use crate::parser::{parse_plain, parse_source, parse_target};
use crate::typecheck::{infer_host, infer_staged, GenPolicy};
use crate::types::TypeEnv;
use crate::unstage::translate;

pub const SEED_VAR: &str = "POLYLET_SEED";

#[derive(Parser, Debug)]
#[command(name = "polylet", version, about = "Two-stage ML: typecheck, unstage, generate and run code")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the inferred type scheme.
    Typecheck {
        #[arg(long, value_enum)]
        system: Option<System>,
        #[arg(long, default_value = "relaxed")]
        gen_policy: GenPolicy,
        file: PathBuf,
    },
    /// Print the combinator term a staged program translates to.
    Translate { file: PathBuf },
    /// Run the translation and print the code it generates.
    Codegen {
        #[arg(long, value_enum)]
        backend: CodegenBackend,
        file: PathBuf,
    },
    /// Run with the evaluator backend, forcing any resulting code.
    Run {
        file: PathBuf,
        /// Applied to the generated function.
        #[arg(long)]
        arg: Option<String>,
    },
    /// Check the backends against each other and against the typecheckers.
    Difftest {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum System {
    Staged,
    Host,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum CodegenBackend {
    String,
    Quote,
}

/// A failure carrying its exit status.
enum Failure {
    Diag(String, Diagnostic),
    Usage(String),
}

/// Runs one invocation and returns the process exit status.
pub fn main(argv: impl IntoIterator<Item = String>) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut out = std::io::stdout().lock();
    match dispatch(cli.command, &mut out) {
        Ok(code) => code,
        Err(Failure::Diag(file, d)) => {
            eprintln!("{}", d.render(&file));
            1
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("polylet: {msg}");
            2
        }
    }
}

fn gensym_start() -> Result<u64, Failure> {
    match std::env::var(SEED_VAR) {
        Ok(s) => s.trim().parse().map_err(|_| Failure::Usage(format!("{SEED_VAR} must be a number, got `{s}`"))),
        Err(_) => Ok(1),
    }
}

struct Input {
    name: String,
    text: String,
}

impl Input {
    fn read(path: &PathBuf) -> Result<Self, Failure> {
        let name = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {name}: {e}")))?;
        Ok(Input { name, text })
    }

    fn fail(&self, d: Diagnostic) -> Failure {
        Failure::Diag(self.name.clone(), d)
    }

    fn source(&self) -> Result<(SourceExpr, crate::parser::Parsed<SourceExpr>), Failure> {
        let p = parse_source(&self.text).map_err(|d| self.fail(d))?;
        Ok((p.tree.clone(), p))
    }

    /// Unlocated diagnostics point at the start of the file.
    fn unlocated(&self, mut d: Diagnostic) -> Failure {
        d.node = None;
        if d.location.is_none() {
            d.location = Some(crate::diag::Location::of_offset(&self.text, 0));
        }
        self.fail(d)
    }
}

fn dispatch(cmd: Command, out: &mut impl Write) -> Result<i32, Failure> {
    let emit = |out: &mut dyn Write, s: &str| {
        writeln!(out, "{s}").map_err(|e| Failure::Usage(format!("cannot write output: {e}")))
    };
    match cmd {
        Command::Typecheck { system, gen_policy, file } => {
            let input = Input::read(&file)?;
            let system = system.unwrap_or(if input.text.contains(".<") { System::Staged } else { System::Host });
            let shown = match system {
                System::Staged => {
                    let (e, p) = input.source()?;
                    infer_staged(&TypeEnv::new(), &e, 0, gen_policy)
                        .map_err(|d| input.fail(p.locate(&input.text, d)))?
                        .display("code")
                }
                System::Host => {
                    let (t, located) = host_input(&input)?;
                    infer_host(&TypeEnv::new(), &t, gen_policy)
                        .map_err(|d| match &located {
                            Some(p) => input.fail(p.locate(&input.text, d)),
                            None => input.unlocated(d),
                        })?
                        .display("cod")
                }
            };
            emit(out, &shown)?;
        }
        Command::Translate { file } => {
            let input = Input::read(&file)?;
            let (e, _) = input.source()?;
            emit(out, &pretty_target(&translate(&e)))?;
        }
        Command::Codegen { backend, file } => {
            let input = Input::read(&file)?;
            let (e, _) = input.source()?;
            let backend = match backend {
                CodegenBackend::String => Backend::String,
                CodegenBackend::Quote => Backend::Quote,
            };
            let mut s = Session::with_gensym_start(backend, gensym_start()?);
            let v = s.eval(&translate(&e)).map_err(|d| input.unlocated(d))?;
            let shown = match &v {
                Value::Code(CodeValue::Str { text, .. }) => text.to_string(),
                Value::Code(CodeValue::Quote(c)) => {
                    check_scope(c).map_err(|d| input.unlocated(d))?;
                    pretty(c)
                }
                other => other.to_string(),
            };
            emit(out, &shown)?;
        }
        Command::Run { file, arg } => {
            let input = Input::read(&file)?;
            let (e, _) = input.source()?;
            let arg = match arg {
                Some(a) => Some(
                    parse_plain(&a)
                        .map_err(|d| Failure::Usage(format!("bad --arg `{a}`: {d}")))?
                        .tree,
                ),
                None => None,
            };
            let mut s = Session::with_gensym_start(Backend::Eval, gensym_start()?);
            let v = run(&mut s, &e, arg.as_ref()).map_err(|d| input.unlocated(d))?;
            emit(out, &v.to_string())?;
        }
        Command::Difftest { seed, count } => {
            let report = crate::difftest::run(seed, count);
            out.write_all(report.to_tap().as_bytes())
                .map_err(|e| Failure::Usage(format!("cannot write output: {e}")))?;
            return Ok(if report.failures() == 0 { 0 } else { 1 });
        }
    }
    Ok(0)
}

/// A file for the host checker: a combinator program as written, or the
/// translation of a source program. Only the former has source locations.
fn host_input(input: &Input) -> Result<(TargetTerm, Option<crate::parser::Parsed<TargetTerm>>), Failure> {
    if let Ok(p) = parse_target(&input.text) {
        return Ok((p.tree.clone(), Some(p)));
    }
    let (e, _) = input.source()?;
    Ok((translate(&e).as_ref().clone(), None))
}

fn run(s: &mut Session, e: &SourceExpr, arg: Option<&SourceExpr>) -> Result<Value, Diagnostic> {
    let v = s.eval(&translate(e))?;
    let Value::Code(c) = &v else {
        return Ok(v);
    };
    let v = s.run_code(c)?;
    match arg {
        Some(a) => {
            let a = s.eval_plain(a)?;
            s.apply(v, a)
        }
        None => Ok(v),
    }
}
