//! Small-step call-by-value evaluation with a coroutine instance store.

use std::collections::BTreeMap;

use crate::ast::{Label, Term, Type};

/// μ: instance labels to their current terms, plus the label counter.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InstanceStore {
    pub bindings: BTreeMap<Label, Term>,
    next: Label,
}

impl InstanceStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, i: Label) -> Option<&Term> {
        self.bindings.get(&i)
    }

    fn fresh(&mut self) -> Label {
        let i = self.next;
        self.next += 1;
        i
    }

    /// True if the instance is running or has terminated (`[[t]]^%empty`).
    pub fn is_blocked(&self, i: Label) -> bool {
        matches!(self.get(i), Some(Term::Suspension(_, p)) if **p == Term::Empty)
    }

    /// The result of a terminated instance, if it has one.
    pub fn result(&self, i: Label) -> Option<&Term> {
        match self.get(i) {
            Some(Term::Suspension(t, p)) if **p == Term::Empty && t.is_value() => Some(t),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Configuration {
    pub term: Term,
    pub store: InstanceStore,
}

impl Configuration {
    pub fn new(term: Term) -> Self {
        Configuration {
            term,
            store: InstanceStore::new(),
        }
    }
}

/// Store-level side effect of a step, used to extend Σ alongside μ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StoreEffect {
    /// A fresh instance of the given coroutine value.
    Started { label: Label, coroutine: Term },
    /// A fresh copy of an existing instance.
    Copied { from: Label, to: Label },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    Stepped {
        next: Configuration,
        rule: &'static str,
        effect: Option<StoreEffect>,
    },
    Finished(Term),
    /// The whole term is a suspension: a yield escaped every resumption.
    SuspendedAtTop {
        value: Term,
        rest: Term,
    },
    Stuck(String),
}

/// Why a configuration cannot step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Halt {
    Finished(Term),
    SuspendedAtTop { value: Box<Term>, rest: Box<Term> },
    Stuck(String),
}

impl From<Halt> for StepOutcome {
    fn from(h: Halt) -> Self {
        match h {
            Halt::Finished(v) => StepOutcome::Finished(v),
            Halt::SuspendedAtTop { value, rest } => StepOutcome::SuspendedAtTop {
                value: *value,
                rest: *rest,
            },
            Halt::Stuck(r) => StepOutcome::Stuck(r),
        }
    }
}

enum Local {
    Reduced(&'static str),
    Value,
    Suspended,
    Stuck(String),
}

enum Reduction {
    To(Term, &'static str),
    Stuck(String),
}

struct Machine<'a> {
    store: &'a mut InstanceStore,
    effect: Option<StoreEffect>,
}

/// Position of the first non-value child and whether its frame is a
/// suspension context (every frame except the resumption body).
fn first_pending(t: &Term) -> Option<(usize, bool)> {
    let kids = t.children();
    let pos = match t {
        Term::App(..) | Term::Add(..) | Term::Start(..) | Term::Resume(..) => {
            kids.iter().position(|k| !k.is_value())?
        }
        Term::Yield(_) | Term::Snapshot(_) | Term::Fix(_) => {
            if kids[0].is_value() {
                return None;
            }
            0
        }
        Term::Resumption { body, .. } => {
            return (!body.is_value()).then_some((0, false));
        }
        _ => return None,
    };
    Some((pos, true))
}

fn child_mut(t: &mut Term, pos: usize) -> &mut Term {
    match (t, pos) {
        (Term::App(a, _), 0)
        | (Term::Add(a, _), 0)
        | (Term::Start(a, _), 0)
        | (Term::Resume(a, _, _, _), 0)
        | (Term::Yield(a), 0)
        | (Term::Snapshot(a), 0)
        | (Term::Fix(a), 0)
        | (Term::Resumption { body: a, .. }, 0) => a,
        (Term::App(_, b), 1) | (Term::Add(_, b), 1) | (Term::Start(_, b), 1) | (Term::Resume(_, b, _, _), 1) => b,
        (Term::Resume(_, _, c, _), 2) => c,
        (Term::Resume(_, _, _, d), 3) => d,
        (_, pos) => unreachable!("no evaluation frame at position {pos}"),
    }
}

impl Machine<'_> {
    /// Reduces `t` in place, descending through evaluation frames without
    /// copying them.
    fn step(&mut self, t: &mut Term) -> Local {
        if t.is_value() {
            return Local::Value;
        }
        if matches!(t, Term::Suspension(..)) {
            return Local::Suspended;
        }
        let Some((pos, pausable)) = first_pending(t) else {
            return self.reduce_here(t, Self::redex);
        };
        let child = child_mut(t, pos);
        if matches!(child, Term::Suspension(..)) {
            if !pausable {
                return self.reduce_here(t, Self::capture);
            }
            // E-Pause: the frame moves inside the suspension.
            let Term::Suspension(inner, pending) = std::mem::take(child) else {
                unreachable!()
            };
            *child = *inner;
            let frame = std::mem::take(t);
            *t = Term::Suspension(Box::new(frame), pending);
            return Local::Reduced("E-Pause");
        }
        match self.step(child) {
            Local::Value | Local::Suspended => unreachable!("child is a non-value, non-suspension"),
            other => other,
        }
    }

    fn reduce_here(&mut self, t: &mut Term, rule: fn(&mut Self, &Term) -> Reduction) -> Local {
        match rule(self, t) {
            Reduction::To(next, name) => {
                *t = next;
                Local::Reduced(name)
            }
            Reduction::Stuck(r) => Local::Stuck(r),
        }
    }

    /// E-Capture: a suspension reached the resumption boundary.
    fn capture(&mut self, t: &Term) -> Reduction {
        let Term::Resumption {
            body, on_yield, label, ..
        } = t
        else {
            return Reduction::Stuck("suspension outside a resumption frame".into());
        };
        let Term::Suspension(rest, pending) = &**body else {
            unreachable!()
        };
        if **pending == Term::Empty {
            return Reduction::Stuck("captured a suspension without a pending value".into());
        }
        self.store.bindings.insert(*label, (**rest).clone());
        Reduction::To(Term::App(on_yield.clone(), pending.clone()), "E-Capture")
    }

    fn redex(&mut self, t: &Term) -> Reduction {
        match t {
            Term::App(f, v) => match &**f {
                Term::Abs(x, _, body) => Reduction::To(body.substitute(x, v), "E-AppAbs"),
                Term::Coroutine { param, body, .. } => Reduction::To(body.substitute(param, v), "E-AppCor"),
                other => Reduction::Stuck(format!("cannot apply {other}")),
            },
            Term::Add(a, b) => match (&**a, &**b) {
                (Term::Int(m), Term::Int(n)) => Reduction::To(Term::Int(m.wrapping_add(*n)), "E-Add"),
                _ => Reduction::Stuck(format!("cannot add {a} and {b}")),
            },
            Term::Start(c, v) => match &**c {
                Term::Coroutine { param, body, .. } => {
                    let i = self.store.fresh();
                    self.store.bindings.insert(i, body.substitute(param, v));
                    self.effect = Some(StoreEffect::Started {
                        label: i,
                        coroutine: (**c).clone(),
                    });
                    Reduction::To(Term::Label(i), "E-Start")
                }
                other => Reduction::Stuck(format!("cannot start {other}")),
            },
            Term::Yield(v) => Reduction::To(Term::Suspension(Box::new(Term::Unit), v.clone()), "E-Yield"),
            Term::Snapshot(i) => match &**i {
                Term::Label(i) => match self.store.get(*i).cloned() {
                    Some(copy) => {
                        let j = self.store.fresh();
                        self.store.bindings.insert(j, copy);
                        self.effect = Some(StoreEffect::Copied { from: *i, to: j });
                        Reduction::To(Term::Label(j), "E-Snapshot")
                    }
                    None => Reduction::Stuck(format!("unbound label #inst{i}")),
                },
                other => Reduction::Stuck(format!("cannot snapshot {other}")),
            },
            Term::Fix(f) => match &**f {
                Term::Abs(x, _, body) => Reduction::To(body.substitute(x, t), "E-Fix"),
                other => Reduction::Stuck(format!("cannot take the fixpoint of {other}")),
            },
            Term::Resume(i, r, y, d) => {
                let Term::Label(i) = **i else {
                    return Reduction::Stuck(format!("cannot resume {i}"));
                };
                let Some(current) = self.store.get(i).cloned() else {
                    return Reduction::Stuck(format!("unbound label #inst{i}"));
                };
                if self.store.is_blocked(i) {
                    return Reduction::To(Term::App(d.clone(), Box::new(Term::Unit)), "E-Resume2");
                }
                self.store
                    .bindings
                    .insert(i, Term::Suspension(Box::new(current.clone()), Box::new(Term::Empty)));
                Reduction::To(
                    Term::Resumption {
                        body: Box::new(current),
                        on_ret: r.clone(),
                        on_yield: y.clone(),
                        on_dead: d.clone(),
                        label: i,
                    },
                    "E-Resume1",
                )
            }
            Term::Resumption {
                body, on_ret, label, ..
            } => {
                self.store
                    .bindings
                    .insert(*label, Term::Suspension(body.clone(), Box::new(Term::Empty)));
                Reduction::To(Term::App(on_ret.clone(), body.clone()), "E-Terminate")
            }
            Term::Var(x) => Reduction::Stuck(format!("free variable `{x}`")),
            other => Reduction::Stuck(format!("no rule applies to {other}")),
        }
    }
}

/// Performs one transition.
pub fn step(c: &Configuration) -> StepOutcome {
    let mut next = c.clone();
    match step_mut(&mut next) {
        Ok((rule, effect)) => StepOutcome::Stepped { next, rule, effect },
        Err(halt) => halt.into(),
    }
}

/// In-place variant of [`step`]. The term is left unchanged unless the
/// configuration steps.
pub fn step_mut(c: &mut Configuration) -> Result<(&'static str, Option<StoreEffect>), Halt> {
    let mut m = Machine {
        store: &mut c.store,
        effect: None,
    };
    match m.step(&mut c.term) {
        Local::Reduced(rule) => {
            let effect = m.effect.take();
            Ok((rule, effect))
        }
        Local::Value => Err(Halt::Finished(c.term.clone())),
        Local::Suspended => {
            let Term::Suspension(rest, value) = &c.term else {
                unreachable!()
            };
            Err(Halt::SuspendedAtTop {
                value: value.clone(),
                rest: rest.clone(),
            })
        }
        Local::Stuck(reason) => Err(Halt::Stuck(reason)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalOutcome {
    Finished(Term),
    SuspendedAtTop { value: Term, rest: Term },
    Stuck(String),
    OutOfFuel,
}

#[derive(Debug, Clone)]
pub struct EvalResult {
    pub outcome: EvalOutcome,
    pub store: InstanceStore,
    pub steps: usize,
}

/// Iterates [`step`] for at most `fuel` transitions.
pub fn eval(c: Configuration, fuel: usize) -> EvalResult {
    eval_traced(c, fuel, |_, _| {})
}

/// Like [`eval`], calling `trace(rule, term)` after every transition.
pub fn eval_traced(mut c: Configuration, fuel: usize, mut trace: impl FnMut(&'static str, &Term)) -> EvalResult {
    let mut steps = 0;
    loop {
        if steps == fuel {
            // A value needs no further fuel.
            let outcome = if c.term.is_value() {
                EvalOutcome::Finished(c.term.clone())
            } else {
                EvalOutcome::OutOfFuel
            };
            return EvalResult {
                outcome,
                store: c.store,
                steps,
            };
        }
        match step_mut(&mut c) {
            Ok((rule, _)) => {
                steps += 1;
                trace(rule, &c.term);
            }
            Err(done) => {
                let outcome = match done {
                    Halt::Finished(v) => EvalOutcome::Finished(v),
                    Halt::SuspendedAtTop { value, rest } => EvalOutcome::SuspendedAtTop {
                        value: *value,
                        rest: *rest,
                    },
                    Halt::Stuck(r) => EvalOutcome::Stuck(r),
                };
                return EvalResult {
                    outcome,
                    store: c.store,
                    steps,
                };
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DriveEnd {
    Result(Term),
    StillLive,
    Dead,
    Stuck(String),
    OutOfFuel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DriveOutcome {
    pub yields: Vec<Term>,
    pub end: DriveEnd,
}

/// Handlers used by [`drive`]: every handler is a non-yielding coroutine
/// returning `Int`. Returns of type `Unit` are mapped to `0`.
pub fn drive_handlers(yield_ty: &Type, ret_ty: &Type) -> Option<(Term, Term, Term)> {
    use crate::ast::{cor, var};
    let ret = match ret_ty {
        Type::Int => cor("r", Type::Int, Type::Bot, var("r")),
        Type::Unit => cor("r", Type::Unit, Type::Bot, Term::Int(0)),
        _ => return None,
    };
    let yld = match yield_ty {
        Type::Int => cor("y", Type::Int, Type::Bot, var("y")),
        Type::Bot => cor("y", Type::Bot, Type::Bot, Term::Int(0)),
        _ => return None,
    };
    let dead = cor("d", Type::Unit, Type::Bot, Term::Int(0));
    Some((ret, yld, dead))
}

/// Starts `coroutine` on `arg` and resumes the instance until it terminates
/// or `max_resumes` is reached, collecting the yielded values.
///
/// `coroutine` must evaluate to a coroutine with yield type `Int` or `Bot`
/// and return type `Int` or `Unit`; `types` names those two types.
pub fn drive(coroutine: &Term, arg: &Term, types: (&Type, &Type), max_resumes: usize, fuel: usize) -> DriveOutcome {
    let fail = |end| DriveOutcome { yields: vec![], end };
    let Some((h_ret, h_yield, h_dead)) = drive_handlers(types.0, types.1) else {
        return fail(DriveEnd::Stuck("unsupported driver types".into()));
    };
    let started = eval(
        Configuration::new(Term::Start(Box::new(coroutine.clone()), Box::new(arg.clone()))),
        fuel,
    );
    let label = match started.outcome {
        EvalOutcome::Finished(Term::Label(i)) => i,
        EvalOutcome::OutOfFuel => return fail(DriveEnd::OutOfFuel),
        other => return fail(DriveEnd::Stuck(format!("start did not produce an instance: {other:?}"))),
    };
    let mut store = started.store;
    let mut yields = Vec::new();
    for _ in 0..max_resumes {
        let was_blocked = store.is_blocked(label);
        let term = Term::Resume(
            Box::new(Term::Label(label)),
            Box::new(h_ret.clone()),
            Box::new(h_yield.clone()),
            Box::new(h_dead.clone()),
        );
        let r = eval(Configuration { term, store }, fuel);
        store = r.store;
        let value = match r.outcome {
            EvalOutcome::Finished(v) => v,
            EvalOutcome::OutOfFuel => {
                return DriveOutcome {
                    yields,
                    end: DriveEnd::OutOfFuel,
                }
            }
            EvalOutcome::Stuck(s) => {
                return DriveOutcome {
                    yields,
                    end: DriveEnd::Stuck(s),
                }
            }
            EvalOutcome::SuspendedAtTop { .. } => {
                return DriveOutcome {
                    yields,
                    end: DriveEnd::Stuck("suspension escaped the resume".into()),
                }
            }
        };
        if was_blocked {
            return DriveOutcome {
                yields,
                end: DriveEnd::Dead,
            };
        }
        if let Some(result) = store.result(label) {
            return DriveOutcome {
                yields,
                end: DriveEnd::Result(result.clone()),
            };
        }
        yields.push(value);
    }
    DriveOutcome {
        yields,
        end: DriveEnd::StillLive,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::*;

    #[test]
    fn beta() {
        let c = Configuration::new(app(abs("x", Type::Unit, var("x")), Term::Unit));
        let StepOutcome::Stepped { next, rule, .. } = step(&c) else {
            panic!()
        };
        assert_eq!(rule, "E-AppAbs");
        assert_eq!(next.term, Term::Unit);
    }

    #[test]
    fn yield_suspends_unit() {
        let c = Configuration::new(yield_(Term::Int(7)));
        let StepOutcome::Stepped { next, rule, .. } = step(&c) else {
            panic!()
        };
        assert_eq!(rule, "E-Yield");
        assert_eq!(next.term, suspension(Term::Unit, Term::Int(7)));
    }

    #[test]
    fn resume_on_blocked_instance_runs_dead_handler() {
        let h = |x: &str| cor(x, Type::Int, Type::Bot, var(x));
        let d = cor("d", Type::Unit, Type::Bot, Term::Int(0));
        let mut c = Configuration::new(resume(Term::Label(0), h("r"), h("y"), d.clone()));
        c.store = InstanceStore {
            bindings: BTreeMap::from([(0, suspension(Term::Unit, Term::Empty))]),
            next: 1,
        };
        let StepOutcome::Stepped { next, rule, .. } = step(&c) else {
            panic!()
        };
        assert_eq!(rule, "E-Resume2");
        assert_eq!(next.term, app(d, Term::Unit));
    }

    #[test]
    fn values_finish_without_steps() {
        let r = eval(Configuration::new(Term::Unit), 10);
        assert_eq!(r.outcome, EvalOutcome::Finished(Term::Unit));
        assert_eq!(r.steps, 0);
    }
}
