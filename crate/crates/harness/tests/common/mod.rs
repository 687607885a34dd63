//! Oracles shared by the harness integration tests.

#![allow(dead_code)]

use lsq_core::eval::eval;
use lsq_core::syntax::{parse_term, print_term, SourceProgram};
use lsq_core::{Configuration, EvalOutcome, Term, Type};
use lsq_harness::corpus::CorpusProgram;
use lsq_harness::difftest::{check_calculus, CalculusCheck};
use lsq_target::{TargetTerm, TargetType};

fn plain_type(t: &Type) -> Option<TargetType> {
    match t {
        Type::Unit => Some(TargetType::Unit),
        Type::Int => Some(TargetType::Int),
        Type::Fun(a, r) => Some(TargetType::fun(plain_type(a)?, plain_type(r)?)),
        _ => None,
    }
}

/// The literal rendering of a term that uses only functions, integers and
/// unit in the target syntax, or `None` if the term uses anything else.
pub fn plain_image(t: &Term) -> Option<TargetTerm> {
    let b = |t: &Term| plain_image(t).map(Box::new);
    Some(match t {
        Term::Var(x) => TargetTerm::Var(x.clone()),
        Term::Unit => TargetTerm::Unit,
        Term::Int(n) => TargetTerm::Int(*n),
        Term::Abs(x, ty, body) => TargetTerm::Abs(x.clone(), plain_type(ty)?, b(body)?),
        Term::App(f, a) => TargetTerm::App(b(f)?, b(a)?),
        Term::Add(l, r) => TargetTerm::Add(b(l)?, b(r)?),
        _ => return None,
    })
}

pub fn parse(text: &str) -> Term {
    parse_term(&SourceProgram::inline(text)).unwrap_or_else(|e| panic!("{e}\n{text}"))
}

/// Checks a corpus program against its `-- expect:` value in the source and
/// through the transform, and that coroutine-free programs are emitted as is.
pub fn check_corpus_program(p: &CorpusProgram) -> Result<(), String> {
    let t = parse_term(&SourceProgram {
        text: p.text.clone(),
        origin: p.path.display().to_string(),
    })
    .map_err(|e| e.to_string())?;
    match eval(Configuration::new(t.clone()), 1_000_000).outcome {
        EvalOutcome::Finished(v) if print_term(&v) == p.expect => {}
        other => return Err(format!("{}: expected {}, source gave {other:?}", p.name, p.expect)),
    }
    match check_calculus(&t, 0, 1_000_000) {
        CalculusCheck::Agree => {}
        CalculusCheck::Discard => return Err(format!("{}: ran out of fuel", p.name)),
        CalculusCheck::Diverge(f) => {
            return Err(format!("{}: {} ({} vs {})", p.name, f.divergence, f.source, f.target))
        }
    }
    if let Some(image) = plain_image(&t) {
        let x = lsq_cps::transform_program(&t).map_err(|e| e.to_string())?;
        if x != image {
            return Err(format!("{}: coroutine-free program changed to {x}", p.name));
        }
    }
    Ok(())
}
