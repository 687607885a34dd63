//! Differential testing of the CPS transform and the MiniLang pipeline.

use crate::gen::gen_well_typed;
use lsq_core::eval::eval;
use lsq_core::syntax::print_term;
use lsq_core::{check_user_program, Configuration, EvalOutcome, Mode, Term, Type};
use lsq_cps::{transform_program, translate_type};
use lsq_mini::{
    compile, completion, direct_run, gen_mini_program, read_value, run_compiled, snapshot_instance, start_instance,
    CompileOptions, GenConfig, Instance, MiniError, MiniProgram, RunOutcome, Value,
};
use lsq_target::{eval_target, print_target, typecheck_target, TargetOutcome, TargetTerm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiffFailure {
    /// Seed that regenerates this program on its own.
    pub program_seed: u64,
    pub program: String,
    pub source: String,
    pub target: String,
    pub divergence: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiffReport {
    pub seed: u64,
    pub count: usize,
    /// Programs skipped because the reference run ran out of fuel.
    pub discarded: usize,
    pub failures: Vec<DiffFailure>,
}

impl DiffReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Size used for generated calculus programs.
pub const CALCULUS_SIZE: usize = 6;

/// Target evaluation counts reductions of the larger translated term.
const TARGET_FUEL_FACTOR: usize = 50;

/// Per-program seeds derived from the run seed, in order.
pub fn program_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen()).collect()
}

/// Runs `f` on a thread with a large stack; the evaluators recurse on term depth.
pub fn with_big_stack<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    std::thread::Builder::new()
        .stack_size(512 << 20)
        .spawn(f)
        .expect("spawn evaluator thread")
        .join()
        .unwrap_or_else(|e| std::panic::resume_unwind(e))
}

/// Outcome of comparing one calculus program.
pub enum CalculusCheck {
    Agree,
    Discard,
    Diverge(DiffFailure),
}

fn ground(t: &Term) -> Option<TargetTerm> {
    match t {
        Term::Int(n) => Some(TargetTerm::Int(*n)),
        Term::Unit => Some(TargetTerm::Unit),
        _ => None,
    }
}

/// Source evaluation against target evaluation of the transform, plus the
/// type of the transform.
pub fn check_calculus(program: &Term, program_seed: u64, fuel: usize) -> CalculusCheck {
    let text = print_term(program);
    let fail = |source: String, target: String, divergence: String| {
        CalculusCheck::Diverge(DiffFailure {
            program_seed,
            program: text.clone(),
            source,
            target,
            divergence,
        })
    };
    let ty = match check_user_program(program, Mode::Base) {
        Ok(ty @ (Type::Int | Type::Unit)) => ty,
        Ok(other) => {
            return fail(
                String::new(),
                String::new(),
                format!("program type {other} is not Int or Unit"),
            )
        }
        Err(e) => {
            return fail(
                String::new(),
                String::new(),
                format!("generated program is ill-typed: {e}"),
            )
        }
    };
    let source = match eval(Configuration::new(program.clone()), fuel).outcome {
        EvalOutcome::Finished(v) => v,
        EvalOutcome::OutOfFuel => return CalculusCheck::Discard,
        other => return fail(format!("{other:?}"), String::new(), "source evaluation failed".into()),
    };
    let source_text = print_term(&source);
    let Some(expected) = ground(&source) else {
        return fail(source_text, String::new(), "source result is not ground".into());
    };
    let x = match transform_program(program) {
        Ok(x) => x,
        Err(e) => return fail(source_text, String::new(), format!("transform failed: {e}")),
    };
    let want_ty = translate_type(&ty).expect("ground types translate");
    match typecheck_target(&x) {
        Ok(t) if t == want_ty => {}
        Ok(t) => {
            return fail(
                source_text,
                print_target(&x),
                format!("target type {t}, expected {want_ty}"),
            )
        }
        Err(e) => return fail(source_text, print_target(&x), format!("target does not typecheck: {e}")),
    }
    match eval_target(&x, fuel * TARGET_FUEL_FACTOR).outcome {
        TargetOutcome::Value(v) if v == expected => CalculusCheck::Agree,
        TargetOutcome::Value(v) => fail(source_text, print_target(&v), "results differ".into()),
        other => fail(source_text, format!("{other:?}"), "target evaluation failed".into()),
    }
}

/// Generates `count` programs and compares source and target evaluation.
pub fn difftest_calculus(seed: u64, count: usize, fuel: usize) -> DiffReport {
    with_big_stack(move || {
        let mut report = DiffReport {
            seed,
            count,
            discarded: 0,
            failures: Vec::new(),
        };
        for s in program_seeds(seed, count) {
            let program = gen_well_typed(s, CALCULUS_SIZE, Mode::Base);
            match check_calculus(&program, s, fuel) {
                CalculusCheck::Agree => {}
                CalculusCheck::Discard => report.discarded += 1,
                CalculusCheck::Diverge(f) => report.failures.push(f),
            }
        }
        report
    })
}

/// Normalization multiplies statement counts, so compiled runs get more fuel
/// than the direct interpreter.
const COMPILED_FUEL_FACTOR: u64 = 20;

fn run_to_end(inst: &mut Instance) -> Result<RunOutcome, MiniError> {
    let mut yields = Vec::new();
    while inst.resume()? {
        yields.push(read_value(inst)?);
    }
    Ok(RunOutcome {
        yields,
        end: completion(inst)?,
    })
}

/// Resumes `at` times, snapshots, then runs the original and the copy to the
/// end. Both must finish exactly like `expected` from that point on.
pub fn snapshot_probe(
    program: &MiniProgram,
    entry: &str,
    args: Vec<Value>,
    at: usize,
    expected: &RunOutcome,
    fuel: u64,
) -> Result<(), String> {
    let compiled = Arc::new(compile(program, CompileOptions::default()).map_err(|e| e.to_string())?);
    let mut inst = start_instance(&compiled, entry, args).map_err(|e| e.to_string())?;
    inst.set_fuel(Some(fuel));
    let at = at.min(expected.yields.len());
    for _ in 0..at {
        if !inst.resume().map_err(|e| e.to_string())? {
            return Err("instance ended before the snapshot point".into());
        }
    }
    let mut copy = snapshot_instance(&inst);
    let want = RunOutcome {
        yields: expected.yields[at..].to_vec(),
        end: expected.end.clone(),
    };
    let original = run_to_end(&mut inst).map_err(|e| format!("original: {e}"))?;
    let snapshot = run_to_end(&mut copy).map_err(|e| format!("snapshot: {e}"))?;
    if original != want {
        return Err(format!(
            "original after snapshot at {at}: {original:?}, expected {want:?}"
        ));
    }
    if snapshot != want {
        return Err(format!("snapshot taken at {at}: {snapshot:?}, expected {want:?}"));
    }
    Ok(())
}

/// Three-way comparison of one MiniLang program plus a snapshot probe at
/// resume index `probe_at`. `Ok(false)` means the reference run ran out of fuel.
pub fn check_mini(
    program: &MiniProgram,
    entry: &str,
    args: &[Value],
    probe_at: usize,
    fuel: u64,
) -> Result<bool, (String, String, String)> {
    let expected = match direct_run(program, entry, args.to_vec(), fuel) {
        Ok(o) => o,
        Err(MiniError::OutOfFuel) => return Ok(false),
        Err(e) => return Err((e.to_string(), String::new(), "direct run failed".into())),
    };
    let show = |r: &Result<RunOutcome, MiniError>| format!("{r:?}");
    for optimize in [true, false] {
        let got = compile(program, CompileOptions { optimize })
            .map(Arc::new)
            .and_then(|p| run_compiled(&p, entry, args.to_vec(), fuel * COMPILED_FUEL_FACTOR));
        if got.as_ref() != Ok(&expected) {
            let which = if optimize { "optimized" } else { "unoptimized" };
            return Err((
                format!("{expected:?}"),
                show(&got),
                format!("{which} compiled run differs"),
            ));
        }
    }
    snapshot_probe(
        program,
        entry,
        args.to_vec(),
        probe_at,
        &expected,
        fuel * COMPILED_FUEL_FACTOR,
    )
    .map_err(|e| (format!("{expected:?}"), String::new(), format!("snapshot probe: {e}")))?;
    Ok(true)
}

/// Generates `count` MiniLang programs and checks each with [`check_mini`].
pub fn difftest_mini(seed: u64, count: usize, fuel: u64) -> DiffReport {
    let mut report = DiffReport {
        seed,
        count,
        discarded: 0,
        failures: Vec::new(),
    };
    for s in program_seeds(seed, count) {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let g = gen_mini_program(&mut rng, &GenConfig::default());
        let probe_at = rng.gen_range(0..8);
        match check_mini(&g.program, &g.entry, &g.args, probe_at, fuel) {
            Ok(true) => {}
            Ok(false) => report.discarded += 1,
            Err((source, target, divergence)) => report.failures.push(DiffFailure {
                program_seed: s,
                program: format!("{}// run {} with {:?}\n", g.program, g.entry, g.args),
                source,
                target,
                divergence,
            }),
        }
    }
    report
}
