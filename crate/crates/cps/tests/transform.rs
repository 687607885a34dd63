use lsq_core::eval::eval;
use lsq_core::syntax::{parse_term, SourceProgram};
use lsq_core::{check_user_program, Configuration, EvalOutcome, Mode, Term, Type, TypingContext};
use lsq_cps::{
    build_output_transformer, build_store_constructor, kappa, sigma_t, transform, transform_free, transform_program,
    translate_type, CpsError, TransformEnv,
};
use lsq_target::{
    eval_target, parse_target, parse_target_type, typecheck_target, TargetOutcome, TargetTerm, TargetType,
};

fn src(s: &str) -> Term {
    parse_term(&SourceProgram::inline(s)).unwrap()
}

fn tgt(s: &str) -> TargetTerm {
    parse_target(s).unwrap()
}

fn tty(s: &str) -> TargetType {
    parse_target_type(s).unwrap()
}

/// Source and target evaluation agree, and the output has type τ(T).
fn agree(program: &str) -> TargetTerm {
    let t = src(program);
    let ty = check_user_program(&t, Mode::Base).unwrap();
    let x = transform_program(&t).unwrap();
    assert_eq!(typecheck_target(&x).unwrap(), translate_type(&ty).unwrap(), "{x}");
    let expected = match eval(Configuration::new(t), 100_000).outcome {
        EvalOutcome::Finished(v) => v,
        other => panic!("source did not finish: {other:?}"),
    };
    let got = match eval_target(&x, 100_000).outcome {
        TargetOutcome::Value(v) => v,
        other => panic!("target did not finish: {other:?}\n{x}"),
    };
    let expected = match expected {
        Term::Int(n) => TargetTerm::Int(n),
        Term::Unit => TargetTerm::Unit,
        other => panic!("non-ground result {other}"),
    };
    assert_eq!(got, expected, "{x}");
    got
}

#[test]
fn abbreviations_expand() {
    assert_eq!(
        translate_type(&Type::cor(Type::Int, Type::Int, Type::Unit)).unwrap(),
        tty("((Unit => Out[Int, Unit]) => Unit) => Int => Out[Int, Unit]")
    );
    assert_eq!(
        translate_type(&Type::inst(Type::Int, Type::Unit)).unwrap(),
        tty("Ref[Unit => Out[Int, Unit]]")
    );
    assert_eq!(translate_type(&Type::Unit).unwrap(), TargetType::Unit);
    assert_eq!(translate_type(&Type::Top), Err(CpsError::TopType));
}

#[test]
fn dup_translation_is_exact() {
    let x = transform_free(&TypingContext::new(), &src("cor (x: Int) yields Bot => x + x")).unwrap();
    let golden =
        tgt("(s: (Unit => Out[Never, Int]) => Unit) => (x: Int) => s(() => Term[Never, Int]); Ret[Never, Int](x + x)");
    assert!(x.alpha_eq(&golden), "{x}");
}

#[test]
fn once_translation_is_exact() {
    let x = transform_free(&TypingContext::new(), &src("cor (x: Int) yields Int => yield(x)")).unwrap();
    let golden = tgt("(s: (Unit => Out[Int, Unit]) => Unit) => (x: Int) =>
           ((s: (Unit => Out[Int, Unit]) => Unit) => (k: Unit => Out[Int, Unit]) => s(k); Yield[Int, Unit](x))
           (s)((y: Unit) => s(() => Term[Int, Unit]); Ret[Int, Unit](y))");
    assert!(x.alpha_eq(&golden), "{x}");
    let ty = tty("((Unit => Out[Int, Unit]) => Unit) => Int => Out[Int, Unit]");
    assert_eq!(typecheck_target(&x).unwrap(), ty);
}

#[test]
fn coroutine_free_terms_are_unchanged() {
    for (s, t) in [
        ("(fun (x: Unit) => x)(())", "((x: Unit) => x)(())"),
        (
            "let f: Int -> Int = fun (n: Int) => n + 1 in f(f(3))",
            "((f: Int => Int) => f(f(3)))((n: Int) => n + 1)",
        ),
    ] {
        let x = transform_free(&TypingContext::new(), &src(s)).unwrap();
        assert_eq!(x, tgt(t));
    }
}

#[test]
fn yield_rule_stores_continuation() {
    let env = TransformEnv {
        gamma: TypingContext::new().extend("x", Type::Int),
        yields: Type::Int,
        ret: Type::Unit,
    };
    let x = transform(&env, &src_in("yield(x)", &["x"])).unwrap();
    let golden =
        tgt("(s: (Unit => Out[Int, Unit]) => Unit) => (k: Unit => Out[Int, Unit]) => s(k); Yield[Int, Unit](x)");
    assert!(x.alpha_eq(&golden), "{x}");
    let unit = transform(&env, &Term::Unit).unwrap();
    let golden = tgt("(s: (Unit => Out[Int, Unit]) => Unit) => (k: Unit => Out[Int, Unit]) => k(())");
    assert!(unit.alpha_eq(&golden), "{unit}");
}

#[test]
fn bottom_env_is_rejected() {
    let env = TransformEnv {
        gamma: TypingContext::new(),
        yields: Type::Bot,
        ret: Type::Bot,
    };
    assert_eq!(transform(&env, &Term::Unit), Err(CpsError::UnsupportedAtBottom));
    let e = transform_free(
        &TypingContext::new().extend("x", Type::Int),
        &src_in("yield(x)", &["x"]),
    );
    assert!(matches!(e, Err(CpsError::FreeYield(Type::Int))));
}

fn src_in(s: &str, scope: &[&str]) -> Term {
    lsq_core::syntax::parse_term_in(&SourceProgram::inline(s), scope).unwrap()
}

#[test]
fn output_transformer_cases() {
    let (i, u) = (TargetType::Int, TargetType::Unit);
    let phi = build_output_transformer(&i, &i, &u, tgt("(x: Int) => Ret[Int, Unit](())"));
    for (input, expect) in [
        ("Ret[Int, Int](7)", "Ret[Int, Unit](())"),
        ("Yield[Int, Int](7)", "Yield[Int, Unit](7)"),
        ("Term[Int, Int]", "Term[Int, Unit]"),
    ] {
        let t = lsq_target::build::app(phi.clone(), tgt(input));
        assert_eq!(typecheck_target(&t).unwrap(), TargetType::out(i.clone(), u.clone()));
        assert_eq!(eval_target(&t, 100).outcome, TargetOutcome::Value(tgt(expect)));
    }
}

#[test]
fn store_constructor_writes_last_continuation() {
    let (i, u) = (TargetType::Int, TargetType::Unit);
    let psi = build_store_constructor(&i, &u);
    assert_eq!(
        typecheck_target(&psi).unwrap(),
        TargetType::fun(lsq_cps::rho(i.clone(), u.clone()), sigma_t(i.clone(), u.clone()))
    );
    assert_eq!(kappa(u.clone(), i.clone(), u.clone()), tty("Unit => Out[Int, Unit]"));
    let prog = lsq_target::build::let_(
        "psi",
        typecheck_target(&psi).unwrap(),
        psi,
        tgt("val r: Ref[Unit => Out[Int, Unit]] = ref(() => Term[Int, Unit]);
             psi(r)(() => Yield[Int, Unit](1)); psi(r)(() => Yield[Int, Unit](2)); (!r)(())"),
    );
    assert_eq!(
        eval_target(&prog, 100).outcome,
        TargetOutcome::Value(tgt("Yield[Int, Unit](2)"))
    );
}

const ID: &str = "cor (y: Int) yields Bot => y";
const ZERO: &str = "cor (u: Unit) yields Bot => 0";

fn resume(i: &str, on_yield: &str) -> String {
    format!("resume({i}, {ZERO}, {on_yield}, {ZERO})")
}

#[test]
fn dup_driver() {
    let p = format!("resume(start(cor (x: Int) yields Bot => x + x, 7), {ID}, cor (y: Bot) yields Bot => 0, {ZERO})");
    assert_eq!(agree(&p), TargetTerm::Int(14));
}

#[test]
fn rep_driver_weights_the_yields() {
    let r = resume("i", ID);
    let ten = ["a"; 10].join(" + ");
    let p = format!(
        "let i: Int <~> Unit = start(cor (x: Int) yields Int => yield(x); yield(x), 7) in
         let a: Int = {r} in let b: Int = {r} in {ten} + b"
    );
    assert_eq!(agree(&p), TargetTerm::Int(77));
}

#[test]
fn snapshots_evolve_independently() {
    let r = |i| resume(i, ID);
    let p = format!(
        "let i: Int <~> Unit = start(cor (x: Int) yields Int => yield(x); yield(x + 1); yield(x + 2), 10) in
         let a: Int = {} in
         let j: Int <~> Unit = snapshot(i) in
         a + {} + {} + {} + {}",
        r("i"),
        r("i"),
        r("j"),
        r("i"),
        r("j")
    );
    assert_eq!(agree(&p), TargetTerm::Int(10 + 11 + 11 + 12 + 12));
}

#[test]
fn stackful_calls_forward_yields() {
    let r = resume("i", ID);
    let p = format!(
        "let once: Int ~Int~> Unit = cor (x: Int) yields Int => yield(x) in
         let outer: Int ~Int~> Unit = cor (x: Int) yields Int => once(x); once(x + x) in
         let i: Int <~> Unit = start(outer, 3) in
         let a: Int = {r} in let b: Int = {r} in let c: Int = {r} in a + b + b + c + c + c"
    );
    assert_eq!(agree(&p), TargetTerm::Int(3 + 12));
}

#[test]
fn terminated_instance_takes_dead_handler() {
    let p = format!(
        "let i: Int <~> Int = start(cor (x: Int) yields Int => yield(x); x + 100, 3) in
         resume(i, {ID}, {ID}, cor (u: Unit) yields Bot => 1000) +
         resume(i, {ID}, {ID}, cor (u: Unit) yields Bot => 1000) +
         resume(i, {ID}, {ID}, cor (u: Unit) yields Bot => 1000)"
    );
    assert_eq!(agree(&p), TargetTerm::Int(3 + 103 + 1000));
}

#[test]
fn resume_inside_coroutine_with_yielding_handlers() {
    // The outer coroutine re-yields whatever the inner one yields, plus one.
    let fwd = "cor (y: Int) yields Int => yield(y + 1); 0";
    let done = "cor (r: Unit) yields Int => 5";
    let dead = "cor (u: Unit) yields Int => 9";
    let r = format!("resume(i, {ID}, {ID}, {ZERO})");
    let p = format!(
        "let inner: Int ~Int~> Unit = cor (x: Int) yields Int => yield(x); yield(x + x) in
         let outer: (Int <~> Unit) ~Int~> Int = cor (j: Int <~> Unit) yields Int =>
           resume(j, {done}, {fwd}, {dead}) + resume(j, {done}, {fwd}, {dead}) + resume(j, {done}, {fwd}, {dead}) in
         let i: Int <~> Int = start(outer, start(inner, 4)) in
         let a: Int = {r} in let b: Int = {r} in let c: Int = {r} in a + b + b + c + c + c"
    );
    // Yields 5 and 9, then the inner instance finishes and outer returns 0 + 0 + 5.
    assert_eq!(agree(&p), TargetTerm::Int(5 + 9 + 9 + 5 + 5 + 5));
}

#[test]
fn fix_through_backpatching() {
    let p = "let f: Int -> Int = fix(fun (self: Int -> Int) => fun (n: Int) => n + 1) in f(41)";
    assert_eq!(agree(p), TargetTerm::Int(42));
}

#[test]
fn unsupported_fix_is_reported() {
    let t = src("fix(fun (f: Int -> Int) => f)");
    assert!(matches!(transform_program(&t), Err(CpsError::UnsupportedFix(_))));
}

#[test]
fn generated_names_are_hygienic() {
    let t = src("let once: Int ~Int~> Unit = cor (x: Int) yields Int => yield(x) in start(once, 1)");
    let x = transform_program(&t).unwrap();
    assert!(x.free_vars().is_empty(), "{:?}", x.free_vars());
}
