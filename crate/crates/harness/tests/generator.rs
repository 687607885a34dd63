use lsq_core::syntax::{parse_term, print_term, SourceProgram};
use lsq_core::{check_user_program, Mode, Term, Type};
use lsq_harness::gen_well_typed;
use std::collections::{BTreeMap, HashMap};

/// Counts constructs by walking the term with the annotated binder types.
/// A direct call is an application of a variable of coroutine type.
fn census(t: &Term, env: &mut HashMap<String, Vec<Type>>, out: &mut BTreeMap<&'static str, usize>) {
    let mut bump = |k| *out.entry(k).or_insert(0) += 1;
    match t {
        Term::Start(..) => bump("start"),
        Term::Resume(..) => bump("resume"),
        Term::Snapshot(_) => bump("snapshot"),
        Term::Yield(_) => bump("yield"),
        Term::Fix(_) => bump("fix"),
        Term::App(f, _) => {
            if let Term::Var(g) = &**f {
                if matches!(env.get(g).and_then(|s| s.last()), Some(Type::Coroutine(..))) {
                    bump("direct call");
                }
            }
        }
        _ => {}
    }
    let bound = match t {
        Term::Abs(x, ty, _) => Some((x.clone(), ty.clone())),
        Term::Coroutine { param, annot, .. } => Some((param.clone(), annot.clone())),
        _ => None,
    };
    if let Some((x, ty)) = &bound {
        env.entry(x.clone()).or_default().push(ty.clone());
    }
    for c in t.children() {
        census(c, env, out);
    }
    if let Some((x, _)) = bound {
        env.get_mut(&x).unwrap().pop();
    }
}

#[test]
fn generation_is_deterministic() {
    for mode in [Mode::Base, Mode::Subtyping] {
        assert_eq!(gen_well_typed(1, 3, mode), gen_well_typed(1, 3, mode));
        assert_eq!(gen_well_typed(99, 8, mode), gen_well_typed(99, 8, mode));
    }
}

#[test]
fn every_sample_typechecks() {
    for mode in [Mode::Base, Mode::Subtyping] {
        for seed in 0..1000u64 {
            let size = 1 + (seed % 8) as usize;
            let t = gen_well_typed(seed, size, mode);
            let ty = check_user_program(&t, mode).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{}", print_term(&t)));
            assert!(
                matches!(ty, Type::Int | Type::Unit) || mode == Mode::Subtyping,
                "seed {seed}: {ty}"
            );
        }
    }
}

#[test]
fn printed_samples_parse_back() {
    for seed in 0..300u64 {
        let t = gen_well_typed(seed, 8, Mode::Base);
        let text = print_term(&t);
        let back = parse_term(&SourceProgram::inline(text.clone())).unwrap_or_else(|e| panic!("{e}\n{text}"));
        assert_eq!(back, t, "{text}");
    }
}

#[test]
fn samples_cover_every_construct() {
    let mut counts = BTreeMap::new();
    for seed in 0..200u64 {
        census(&gen_well_typed(seed, 8, Mode::Base), &mut HashMap::new(), &mut counts);
    }
    for k in ["start", "resume", "snapshot", "yield", "fix", "direct call"] {
        assert!(counts.get(k).copied().unwrap_or(0) >= 1, "no {k} in {counts:?}");
    }
}
