use lsq_core::ast::*;
use lsq_core::eval::{drive, eval, step, DriveEnd, StepOutcome};
use lsq_core::syntax::{parse_term, print_term, SourceProgram};
use lsq_core::typeck::{check_user_program, infer, InstanceTyping, Mode, TypingContext};
use lsq_core::{Configuration, EvalOutcome};

fn parse(s: &str) -> Term {
    parse_term(&SourceProgram::inline(s)).unwrap()
}

fn rep() -> Term {
    parse("cor (x: Int) yields Int => yield(x); yield(x)")
}

#[test]
fn rep_body_after_start_substitution() {
    let Term::Coroutine { param, body, .. } = rep() else {
        panic!()
    };
    let inst = body.substitute(&param, &Term::Int(7));
    let expected = app(
        cor("u", Type::Unit, Type::Int, yield_(Term::Int(7))),
        yield_(Term::Int(7)),
    );
    assert!(inst.alpha_eq(&expected), "{inst}");
}

#[test]
fn first_resume_of_rep_reduces_to_seven() {
    let id = cor("x", Type::Int, Type::Bot, var("x"));
    let zero_u = cor("u", Type::Unit, Type::Bot, Term::Int(0));
    let prog = app(
        abs(
            "i",
            Type::inst(Type::Int, Type::Unit),
            resume(var("i"), zero_u.clone(), id, zero_u),
        ),
        start(rep(), Term::Int(7)),
    );
    assert_eq!(check_user_program(&prog, Mode::Base).unwrap(), Type::Int);
    let mut rules = Vec::new();
    let mut c = Configuration::new(prog);
    loop {
        match step(&c) {
            StepOutcome::Stepped { next, rule, .. } => {
                rules.push(rule);
                c = next;
            }
            StepOutcome::Finished(v) => {
                assert_eq!(v, Term::Int(7));
                break;
            }
            other => panic!("{other:?}"),
        }
    }
    assert_eq!(
        rules,
        [
            "E-Start",
            "E-AppAbs",
            "E-Resume1",
            "E-Yield",
            "E-Pause",
            "E-Capture",
            "E-AppCor"
        ]
    );
}

#[test]
fn drive_rep_yields_twice() {
    let out = drive(&rep(), &Term::Int(7), (&Type::Int, &Type::Unit), 10, 1000);
    assert_eq!(out.yields, vec![Term::Int(7), Term::Int(7)]);
    assert_eq!(out.end, DriveEnd::Result(Term::Unit));
}

#[test]
fn drive_dup_returns_fourteen() {
    let dup = parse("cor (x: Int) yields Bot => x + x");
    let out = drive(&dup, &Term::Int(7), (&Type::Bot, &Type::Int), 10, 1000);
    assert!(out.yields.is_empty());
    assert_eq!(out.end, DriveEnd::Result(Term::Int(14)));
}

#[test]
fn drive_stackful_direct_calls() {
    let outer = parse(
        "let once: Int ~Int~> Unit = cor (x: Int) yields Int => yield(x) in
         cor (x: Int) yields Int => once(x); once(x)",
    );
    let out = drive(&outer, &Term::Int(7), (&Type::Int, &Type::Unit), 10, 1000);
    assert_eq!(out.yields, vec![Term::Int(7), Term::Int(7)]);
    assert_eq!(out.end, DriveEnd::Result(Term::Unit));
}

#[test]
fn drive_reports_still_live() {
    let out = drive(&rep(), &Term::Int(1), (&Type::Int, &Type::Unit), 1, 1000);
    assert_eq!(out.yields, vec![Term::Int(1)]);
    assert_eq!(out.end, DriveEnd::StillLive);
}

#[test]
fn start_dup_then_resume() {
    let prog = parse(
        "let i: Bot <~> Int = start(cor (x: Int) yields Bot => x + x, 7) in
         resume(i, cor (r: Int) yields Bot => r, cor (y: Bot) yields Bot => 0,
                cor (u: Unit) yields Bot => 0)",
    );
    assert_eq!(check_user_program(&prog, Mode::Base).unwrap(), Type::Int);
    let r = eval(Configuration::new(prog), 100);
    assert_eq!(r.outcome, EvalOutcome::Finished(Term::Int(14)));
}

#[test]
fn resume_after_termination_takes_dead_handler() {
    let prog = parse(
        "let i: Int <~> Unit = start(cor (x: Int) yields Int => yield(x), 3) in
         let h: Unit ~Bot~> Int = cor (u: Unit) yields Bot => 100 in
         let y: Int ~Bot~> Int = cor (v: Int) yields Bot => v in
         resume(i, h, y, h) + resume(i, h, y, cor (u: Unit) yields Bot => 1000) +
         resume(i, h, y, cor (u: Unit) yields Bot => 1000)",
    );
    assert_eq!(check_user_program(&prog, Mode::Base).unwrap(), Type::Int);
    let r = eval(Configuration::new(prog), 1000);
    assert_eq!(r.outcome, EvalOutcome::Finished(Term::Int(3 + 100 + 1000)));
}

#[test]
fn snapshot_copies_are_independent() {
    // Resume the original once, snapshot it, then drain both.
    let prog = parse(
        "let c: Int ~Int~> Unit = cor (x: Int) yields Int => yield(x); yield(x + 1); yield(x + 2) in
         let i: Int <~> Unit = start(c, 10) in
         let r: Unit ~Bot~> Int = cor (u: Unit) yields Bot => 0 in
         let y: Int ~Bot~> Int = cor (v: Int) yields Bot => v in
         let a: Int = resume(i, r, y, r) in
         let s: Int <~> Unit = snapshot(i) in
         let b: Int = resume(i, r, y, r) in
         let c2: Int = resume(s, r, y, r) in
         let d: Int = resume(s, r, y, r) in
         let e: Int = resume(i, r, y, r) in
         a + b + c2 + d + e",
    );
    assert_eq!(check_user_program(&prog, Mode::Base).unwrap(), Type::Int);
    let r = eval(Configuration::new(prog), 10_000);
    assert_eq!(r.outcome, EvalOutcome::Finished(Term::Int(10 + 11 + 11 + 12 + 12)));
}

#[test]
fn printed_rep_round_trips() {
    let t = rep();
    assert!(parse(&print_term(&t)).alpha_eq(&t));
}

#[test]
fn covariance_in_subtyping_mode() {
    let body = parse("cor (x: Int) yields Bot => x");
    let Term::Coroutine { param, annot, body, .. } = body else {
        panic!()
    };
    let widened = Term::Coroutine {
        param,
        annot,
        yields: Type::Int,
        body,
    };
    let j = infer(&InstanceTyping::new(), &TypingContext::new(), &widened, Mode::Subtyping).unwrap();
    assert_eq!(j.ty, Type::cor(Type::Int, Type::Int, Type::Int));
}
