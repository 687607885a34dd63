use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use lsq_core::eval::{eval, eval_traced};
use lsq_core::syntax::{parse_term, print_term, SourceProgram};
use lsq_core::{check_user_program, Configuration, EvalOutcome, Mode};
use lsq_harness::difftest::{difftest_calculus, difftest_mini, with_big_stack, DiffReport};
use lsq_mini::{
    compile, completion, parse_args, parse_mini, read_value, snapshot_instance, start_instance, CompileOptions,
    Completion, Instance,
};
use lsq_target::{eval_target, parse_target, print_target, typecheck_target, TargetOutcome};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser)]
#[command(
    name = "lsq",
    about = "Coroutine calculus, CPS transform and MiniLang coroutine compiler"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the type of a program.
    Typecheck {
        file: PathBuf,
        #[arg(long)]
        subtyping: bool,
    },
    /// Evaluate a program.
    Eval {
        file: PathBuf,
        /// Print every transition.
        #[arg(long)]
        trace: bool,
        #[arg(long, default_value_t = 1_000_000)]
        fuel: usize,
    },
    /// Print the CPS translation of a program.
    Transform { file: PathBuf },
    /// Typecheck and evaluate a target-language program.
    EvalTarget {
        file: PathBuf,
        #[arg(long, default_value_t = 10_000_000)]
        fuel: usize,
    },
    /// Compare source evaluation with evaluation of the transform on generated programs.
    Difftest {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 10_000)]
        fuel: usize,
    },
    /// MiniLang coroutine compiler.
    Mini {
        #[command(subcommand)]
        cmd: MiniCmd,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Dump {
    Cfg,
    Segments,
    Entries,
}

#[derive(Subcommand)]
enum MiniCmd {
    /// Compile a program and dump one coroutine.
    Compile {
        file: PathBuf,
        #[arg(long)]
        coroutine: String,
        #[arg(long, value_enum, default_value = "entries")]
        dump: Dump,
        /// Load and store every variable in scope.
        #[arg(long)]
        no_opt: bool,
    },
    /// Run a coroutine, printing each yielded value and the outcome.
    Run {
        file: PathBuf,
        #[arg(long)]
        coroutine: String,
        /// Comma-separated argument values, e.g. `[1, 2], 3`.
        #[arg(long, default_value = "")]
        args: String,
        /// Snapshot after this many resumes and run the copy to the end too.
        #[arg(long)]
        snapshot_at: Option<usize>,
        #[arg(long, default_value_t = 100_000_000)]
        fuel: u64,
    },
    /// Three-way differential test on generated programs.
    Difftest {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 300)]
        count: usize,
        #[arg(long, default_value_t = 200_000)]
        fuel: u64,
    },
}

/// A failed check, reported with exit code 1. Anything else is a usage error.
struct Failed(String);

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn source(path: &Path) -> Result<SourceProgram> {
    Ok(SourceProgram {
        text: read(path)?,
        origin: path.display().to_string(),
    })
}

type Outcome = Result<std::result::Result<(), Failed>>;

fn report(r: &DiffReport) -> Outcome {
    println!("{}", serde_json::to_string_pretty(r)?);
    Ok(if r.passed() {
        Ok(())
    } else {
        Err(Failed(format!("{} divergences", r.failures.len())))
    })
}

fn run(cmd: Cmd) -> Outcome {
    match cmd {
        Cmd::Typecheck { file, subtyping } => {
            let mode = if subtyping { Mode::Subtyping } else { Mode::Base };
            let t = match parse_term(&source(&file)?) {
                Ok(t) => t,
                Err(e) => return Ok(Err(Failed(e.to_string()))),
            };
            Ok(match check_user_program(&t, mode) {
                Ok(ty) => {
                    println!("{ty}");
                    Ok(())
                }
                Err(e) => Err(Failed(format!("type error: {e}"))),
            })
        }
        Cmd::Eval { file, trace, fuel } => {
            let t = match parse_term(&source(&file)?) {
                Ok(t) => t,
                Err(e) => return Ok(Err(Failed(e.to_string()))),
            };
            let r = with_big_stack(move || {
                let c = Configuration::new(t);
                if trace {
                    eval_traced(c, fuel, |rule, t| println!("{rule:<14} {}", print_term(t)))
                } else {
                    eval(c, fuel)
                }
            });
            Ok(match r.outcome {
                EvalOutcome::Finished(v) => {
                    println!("{}", print_term(&v));
                    Ok(())
                }
                EvalOutcome::SuspendedAtTop { value, .. } => Err(Failed(format!(
                    "yield of {} escaped to the top level",
                    print_term(&value)
                ))),
                EvalOutcome::Stuck(why) => Err(Failed(format!("stuck: {why}"))),
                EvalOutcome::OutOfFuel => Err(Failed(format!("out of fuel after {} steps", r.steps))),
            })
        }
        Cmd::Transform { file } => {
            let t = match parse_term(&source(&file)?) {
                Ok(t) => t,
                Err(e) => return Ok(Err(Failed(e.to_string()))),
            };
            Ok(match lsq_cps::transform_program(&t) {
                Ok(x) => {
                    println!("{}", print_target(&x));
                    Ok(())
                }
                Err(e) => Err(Failed(e.to_string())),
            })
        }
        Cmd::EvalTarget { file, fuel } => {
            let x = match parse_target(&read(&file)?) {
                Ok(x) => x,
                Err(e) => return Ok(Err(Failed(e.to_string()))),
            };
            if let Err(e) = typecheck_target(&x) {
                return Ok(Err(Failed(format!("type error: {e}"))));
            }
            let r = with_big_stack(move || eval_target(&x, fuel));
            Ok(match r.outcome {
                TargetOutcome::Value(v) => {
                    println!("{}", print_target(&v));
                    Ok(())
                }
                TargetOutcome::Stuck(why) => Err(Failed(format!("stuck: {why}"))),
                TargetOutcome::OutOfFuel => Err(Failed("out of fuel".into())),
            })
        }
        Cmd::Difftest { seed, count, fuel } => report(&difftest_calculus(seed, count, fuel)),
        Cmd::Mini { cmd } => run_mini(cmd),
    }
}

fn print_rest(label: &str, inst: &mut Instance) -> Outcome {
    loop {
        match inst.resume() {
            Ok(true) => println!("{label}yield {}", read_value(inst)?),
            Ok(false) => break,
            Err(e) => return Ok(Err(Failed(format!("{label}{e}")))),
        }
    }
    match completion(inst)? {
        Completion::Result(v) => println!("{label}result {v}"),
        Completion::Exception(v) => println!("{label}exception {v}"),
    }
    Ok(Ok(()))
}

fn run_mini(cmd: MiniCmd) -> Outcome {
    match cmd {
        MiniCmd::Compile {
            file,
            coroutine,
            dump,
            no_opt,
        } => {
            let prog = match parse_mini(&read(&file)?) {
                Ok(p) => p,
                Err(e) => return Ok(Err(Failed(e.to_string()))),
            };
            let compiled = match compile(&prog, CompileOptions { optimize: !no_opt }) {
                Ok(c) => c,
                Err(e) => return Ok(Err(Failed(e.to_string()))),
            };
            let c = compiled
                .get(&coroutine)
                .ok_or_else(|| anyhow!("no coroutine named `{coroutine}`"))?;
            let text = match dump {
                Dump::Cfg => c.dump_cfg(),
                Dump::Segments => c.dump_segments(),
                Dump::Entries => c.dump_entries(),
            };
            print!("{text}");
            Ok(Ok(()))
        }
        MiniCmd::Run {
            file,
            coroutine,
            args,
            snapshot_at,
            fuel,
        } => {
            let prog = match parse_mini(&read(&file)?) {
                Ok(p) => p,
                Err(e) => return Ok(Err(Failed(e.to_string()))),
            };
            let args = parse_args(&args).map_err(|e| anyhow!("bad --args: {e}"))?;
            let compiled = match compile(&prog, CompileOptions::default()) {
                Ok(c) => Arc::new(c),
                Err(e) => return Ok(Err(Failed(e.to_string()))),
            };
            let mut inst = match start_instance(&compiled, &coroutine, args) {
                Ok(i) => i,
                Err(e) => return Ok(Err(Failed(e.to_string()))),
            };
            inst.set_fuel(Some(fuel));
            let Some(k) = snapshot_at else {
                return print_rest("", &mut inst);
            };
            for _ in 0..k {
                match inst.resume() {
                    Ok(true) => println!("yield {}", read_value(&inst)?),
                    Ok(false) => return Ok(Err(Failed(format!("instance ended before resume {}", k + 1)))),
                    Err(e) => return Ok(Err(Failed(e.to_string()))),
                }
            }
            let mut copy = snapshot_instance(&inst);
            if let Err(f) = print_rest("original: ", &mut inst)? {
                return Ok(Err(f));
            }
            print_rest("snapshot: ", &mut copy)
        }
        MiniCmd::Difftest { seed, count, fuel } => report(&difftest_mini(seed, count, fuel)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failed(msg))) => {
            eprintln!("lsq: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("lsq: {e:#}");
            ExitCode::from(2)
        }
    }
}
