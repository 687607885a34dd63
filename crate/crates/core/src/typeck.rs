//! Algorithmic typing for the base calculus and its subtyping extension.
//!
//! Judgments synthesize a type and a yield type. Child yields are combined
//! with `Bot` as the unit; base mode demands that every other yield agrees,
//! subtyping mode takes their join.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ast::{Label, Term, Type};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Base,
    Subtyping,
}

/// The result of typing a term: its type and the type of values it may yield.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Judgment {
    pub ty: Type,
    pub yields: Type,
}

impl Judgment {
    fn pure(ty: Type) -> Self {
        Judgment { ty, yields: Type::Bot }
    }
}

/// Γ: ordered bindings, innermost last.
#[derive(Debug, Clone, Default)]
pub struct TypingContext {
    bindings: Vec<(String, Type)>,
}

impl TypingContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn extend(&self, x: &str, t: Type) -> Self {
        let mut bindings = self.bindings.clone();
        bindings.push((x.to_string(), t));
        TypingContext { bindings }
    }

    pub fn lookup(&self, x: &str) -> Option<&Type> {
        self.bindings.iter().rev().find(|(y, _)| y == x).map(|(_, t)| t)
    }

    fn push(&mut self, x: &str, t: Type) {
        self.bindings.push((x.to_string(), t));
    }

    fn pop(&mut self) {
        self.bindings.pop();
    }
}

/// Σ: instance labels and their instance types.
pub type InstanceTyping = BTreeMap<Label, Type>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unknown instance label #inst{0}")]
    UnboundLabel(Label),
    #[error("{what}: expected {expected}, found {found}")]
    Mismatch {
        what: &'static str,
        expected: Type,
        found: Type,
    },
    #[error("incompatible yield types {0} and {1}")]
    YieldMismatch(Type, Type),
    #[error("function body may yield {0}; only coroutine bodies may yield")]
    YieldInFunction(Type),
    #[error("coroutine body yields {found}, but the coroutine declares {declared}")]
    CoroutineYield { declared: Type, found: Type },
    #[error("cannot apply a term of type {0}")]
    NotAFunction(Type),
    #[error("{what}: expected a coroutine, found {found}")]
    NotACoroutine { what: &'static str, found: Type },
    #[error("expected a coroutine instance, found {0}")]
    NotAnInstance(Type),
    #[error("resume handlers disagree: {0}")]
    HandlerMismatch(String),
    #[error("fix expects a function of type T -> T, found {0}")]
    FixMismatch(Type),
    #[error("fix argument must not yield, but yields {0}")]
    FixYields(Type),
    #[error("program may yield {0} at top level")]
    NonBottomYield(Type),
    #[error("runtime-only term in a user program")]
    RuntimeForm,
    #[error("`Top` is only available in subtyping mode")]
    TopInBaseMode,
    #[error("the empty term can only appear as a pending yield")]
    StrayEmpty,
}

/// `s <: t`. Unit and Int relate only to themselves, `Bot` and `Top`.
pub fn subtype(s: &Type, t: &Type) -> bool {
    use Type::*;
    match (s, t) {
        (Bot, _) | (_, Top) => true,
        (Unit, Unit) | (Int, Int) => true,
        (Fun(a1, r1), Fun(a2, r2)) => subtype(a2, a1) && subtype(r1, r2),
        (Coroutine(a1, y1, r1), Coroutine(a2, y2, r2)) => subtype(a2, a1) && subtype(y1, y2) && subtype(r1, r2),
        (Instance(y1, r1), Instance(y2, r2)) => subtype(y1, y2) && subtype(r1, r2),
        _ => false,
    }
}

/// Least upper bound; incompatible shapes join to `Top`.
pub fn join(s: &Type, t: &Type) -> Type {
    use Type::*;
    if subtype(s, t) {
        return t.clone();
    }
    if subtype(t, s) {
        return s.clone();
    }
    match (s, t) {
        (Fun(a1, r1), Fun(a2, r2)) => Type::fun(meet(a1, a2), join(r1, r2)),
        (Coroutine(a1, y1, r1), Coroutine(a2, y2, r2)) => Type::cor(meet(a1, a2), join(y1, y2), join(r1, r2)),
        (Instance(y1, r1), Instance(y2, r2)) => Type::inst(join(y1, y2), join(r1, r2)),
        _ => Top,
    }
}

/// Greatest lower bound; incompatible shapes meet at `Bot`.
pub fn meet(s: &Type, t: &Type) -> Type {
    use Type::*;
    if subtype(s, t) {
        return s.clone();
    }
    if subtype(t, s) {
        return t.clone();
    }
    match (s, t) {
        (Fun(a1, r1), Fun(a2, r2)) => Type::fun(join(a1, a2), meet(r1, r2)),
        (Coroutine(a1, y1, r1), Coroutine(a2, y2, r2)) => Type::cor(join(a1, a2), meet(y1, y2), meet(r1, r2)),
        (Instance(y1, r1), Instance(y2, r2)) => Type::inst(meet(y1, y2), meet(r1, r2)),
        _ => Bot,
    }
}

struct Checker<'a> {
    sigma: &'a InstanceTyping,
    mode: Mode,
}

impl Checker<'_> {
    /// `found` may stand where `expected` is required.
    fn fits(&self, found: &Type, expected: &Type) -> bool {
        match self.mode {
            Mode::Base => found == expected,
            Mode::Subtyping => subtype(found, expected),
        }
    }

    fn require(&self, what: &'static str, found: &Type, expected: &Type) -> Result<(), TypeError> {
        if self.fits(found, expected) {
            Ok(())
        } else {
            Err(TypeError::Mismatch {
                what,
                expected: expected.clone(),
                found: found.clone(),
            })
        }
    }

    /// Combines two yield types, with `Bot` as the unit.
    fn combine(&self, a: &Type, b: &Type) -> Result<Type, TypeError> {
        match self.mode {
            Mode::Subtyping => Ok(join(a, b)),
            Mode::Base => {
                if a.is_bot() {
                    Ok(b.clone())
                } else if b.is_bot() || a == b {
                    Ok(a.clone())
                } else {
                    Err(TypeError::YieldMismatch(a.clone(), b.clone()))
                }
            }
        }
    }

    fn combine_all<'t>(&self, ys: impl IntoIterator<Item = &'t Type>) -> Result<Type, TypeError> {
        ys.into_iter().try_fold(Type::Bot, |acc, y| self.combine(&acc, y))
    }

    /// Yield of a term run under a context whose yield type is fixed to `ctx`.
    fn within(&self, inner: &Type, ctx: &Type) -> Result<(), TypeError> {
        let ok = match self.mode {
            Mode::Base => inner.is_bot() || inner == ctx,
            Mode::Subtyping => subtype(inner, ctx),
        };
        if ok {
            Ok(())
        } else {
            Err(TypeError::YieldMismatch(ctx.clone(), inner.clone()))
        }
    }

    fn annotation(&self, t: &Type) -> Result<(), TypeError> {
        if self.mode == Mode::Base && t.mentions_top() {
            Err(TypeError::TopInBaseMode)
        } else {
            Ok(())
        }
    }

    fn handlers(
        &self,
        gamma: &mut TypingContext,
        ret: &Type,
        yld: &Type,
        hs: [&Term; 3],
    ) -> Result<(Type, Type, Type), TypeError> {
        let mut results = Vec::new();
        let mut hyields = Vec::new();
        let mut term_yields = Vec::new();
        let inputs = [ret, yld, &Type::Unit];
        for (h, input) in hs.into_iter().zip(inputs) {
            let j = self.infer(gamma, h)?;
            term_yields.push(j.yields);
            match j.ty {
                Type::Coroutine(a, y, r) => {
                    self.require("resume handler input", input, &a)?;
                    hyields.push(*y);
                    results.push(*r);
                }
                other => {
                    return Err(TypeError::NotACoroutine {
                        what: "resume handler",
                        found: other,
                    })
                }
            }
        }
        let (result, hw) = match self.mode {
            Mode::Base => {
                if results.iter().any(|r| *r != results[0]) {
                    return Err(TypeError::HandlerMismatch(format!(
                        "return types {}, {}, {}",
                        results[0], results[1], results[2]
                    )));
                }
                if hyields.iter().any(|y| *y != hyields[0]) {
                    return Err(TypeError::HandlerMismatch(format!(
                        "yield types {}, {}, {}",
                        hyields[0], hyields[1], hyields[2]
                    )));
                }
                (results[0].clone(), hyields[0].clone())
            }
            Mode::Subtyping => (
                results.iter().fold(Type::Bot, |a, r| join(&a, r)),
                hyields.iter().fold(Type::Bot, |a, y| join(&a, y)),
            ),
        };
        let terms = self.combine_all(&term_yields)?;
        Ok((result, hw, terms))
    }

    fn infer(&self, gamma: &mut TypingContext, t: &Term) -> Result<Judgment, TypeError> {
        match t {
            Term::Var(x) => gamma
                .lookup(x)
                .cloned()
                .map(Judgment::pure)
                .ok_or_else(|| TypeError::UnboundVariable(x.clone())),
            Term::Unit => Ok(Judgment::pure(Type::Unit)),
            Term::Int(_) => Ok(Judgment::pure(Type::Int)),
            Term::Add(a, b) => {
                let ja = self.infer(gamma, a)?;
                let jb = self.infer(gamma, b)?;
                self.require("left operand of +", &ja.ty, &Type::Int)?;
                self.require("right operand of +", &jb.ty, &Type::Int)?;
                Ok(Judgment {
                    ty: Type::Int,
                    yields: self.combine(&ja.yields, &jb.yields)?,
                })
            }
            Term::Abs(x, ty, body) => {
                self.annotation(ty)?;
                gamma.push(x, ty.clone());
                let jb = self.infer(gamma, body);
                gamma.pop();
                let jb = jb?;
                if !jb.yields.is_bot() {
                    return Err(TypeError::YieldInFunction(jb.yields));
                }
                Ok(Judgment::pure(Type::fun(ty.clone(), jb.ty)))
            }
            Term::Coroutine {
                param,
                annot,
                yields,
                body,
            } => {
                self.annotation(annot)?;
                self.annotation(yields)?;
                gamma.push(param, annot.clone());
                let jb = self.infer(gamma, body);
                gamma.pop();
                let jb = jb?;
                self.within(&jb.yields, yields).map_err(|_| TypeError::CoroutineYield {
                    declared: yields.clone(),
                    found: jb.yields.clone(),
                })?;
                Ok(Judgment::pure(Type::cor(annot.clone(), yields.clone(), jb.ty)))
            }
            Term::App(f, a) => {
                let jf = self.infer(gamma, f)?;
                let ja = self.infer(gamma, a)?;
                match jf.ty {
                    Type::Fun(p, r) => {
                        self.require("function argument", &ja.ty, &p)?;
                        Ok(Judgment {
                            ty: *r,
                            yields: self.combine(&jf.yields, &ja.yields)?,
                        })
                    }
                    Type::Coroutine(p, y, r) => {
                        self.require("coroutine argument", &ja.ty, &p)?;
                        let yields = match self.mode {
                            Mode::Base => {
                                self.within(&jf.yields, &y)?;
                                self.within(&ja.yields, &y)?;
                                *y
                            }
                            Mode::Subtyping => join(&join(&jf.yields, &ja.yields), &y),
                        };
                        Ok(Judgment { ty: *r, yields })
                    }
                    Type::Bot if self.mode == Mode::Subtyping => Ok(Judgment {
                        ty: Type::Bot,
                        yields: join(&jf.yields, &ja.yields),
                    }),
                    other => Err(TypeError::NotAFunction(other)),
                }
            }
            Term::Yield(a) => {
                let ja = self.infer(gamma, a)?;
                let y = match self.mode {
                    Mode::Base => {
                        self.within(&ja.yields, &ja.ty)?;
                        ja.ty
                    }
                    Mode::Subtyping => join(&ja.ty, &ja.yields),
                };
                Ok(Judgment {
                    ty: Type::Unit,
                    yields: y,
                })
            }
            Term::Start(c, a) => {
                let jc = self.infer(gamma, c)?;
                let ja = self.infer(gamma, a)?;
                match jc.ty {
                    Type::Coroutine(p, y, r) => {
                        self.require("start argument", &ja.ty, &p)?;
                        Ok(Judgment {
                            ty: Type::Instance(y, r),
                            yields: self.combine(&jc.yields, &ja.yields)?,
                        })
                    }
                    other => Err(TypeError::NotACoroutine {
                        what: "start",
                        found: other,
                    }),
                }
            }
            Term::Snapshot(i) => {
                let ji = self.infer(gamma, i)?;
                match ji.ty {
                    Type::Instance(..) => Ok(ji),
                    other => Err(TypeError::NotAnInstance(other)),
                }
            }
            Term::Resume(i, r, y, d) => {
                let ji = self.infer(gamma, i)?;
                let (ty_y, ty_r) = match &ji.ty {
                    Type::Instance(y, r) => ((**y).clone(), (**r).clone()),
                    other => return Err(TypeError::NotAnInstance(other.clone())),
                };
                let (result, hw, terms) = self.handlers(gamma, &ty_r, &ty_y, [r, y, d])?;
                let sub = self.combine(&ji.yields, &terms)?;
                let yields = match self.mode {
                    Mode::Base => {
                        self.within(&sub, &hw)?;
                        hw
                    }
                    Mode::Subtyping => join(&sub, &hw),
                };
                Ok(Judgment { ty: result, yields })
            }
            Term::Fix(f) => {
                let jf = self.infer(gamma, f)?;
                if !jf.yields.is_bot() {
                    return Err(TypeError::FixYields(jf.yields));
                }
                match &jf.ty {
                    Type::Fun(a, r) if self.fits(r, a) => Ok(Judgment::pure((**a).clone())),
                    other => Err(TypeError::FixMismatch(other.clone())),
                }
            }
            Term::Label(i) => match self.sigma.get(i) {
                Some(t @ Type::Instance(..)) => Ok(Judgment::pure(t.clone())),
                Some(other) => Err(TypeError::NotAnInstance(other.clone())),
                None => Err(TypeError::UnboundLabel(*i)),
            },
            Term::Suspension(body, pending) => {
                let jb = self.infer(gamma, body)?;
                if **pending == Term::Empty {
                    return Ok(jb);
                }
                let jp = self.infer(gamma, pending)?;
                if !jp.yields.is_bot() {
                    return Err(TypeError::YieldMismatch(Type::Bot, jp.yields));
                }
                Ok(Judgment {
                    ty: jb.ty,
                    yields: self.combine(&jb.yields, &jp.ty)?,
                })
            }
            Term::Resumption {
                body,
                on_ret,
                on_yield,
                on_dead,
                label,
            } => {
                let (ty_y, ty_r) = match self.sigma.get(label) {
                    Some(Type::Instance(y, r)) => ((**y).clone(), (**r).clone()),
                    Some(other) => return Err(TypeError::NotAnInstance(other.clone())),
                    None => return Err(TypeError::UnboundLabel(*label)),
                };
                let jb = self.infer(gamma, body)?;
                self.require("resumed body", &jb.ty, &ty_r)?;
                self.within(&jb.yields, &ty_y)?;
                let (result, hw, terms) = self.handlers(gamma, &ty_r, &ty_y, [on_ret, on_yield, on_dead])?;
                let yields = match self.mode {
                    Mode::Base => {
                        self.within(&terms, &hw)?;
                        hw
                    }
                    Mode::Subtyping => join(&terms, &hw),
                };
                Ok(Judgment { ty: result, yields })
            }
            Term::Empty => Err(TypeError::StrayEmpty),
        }
    }
}

/// Synthesizes the type and yield type of `t` under Σ and Γ.
pub fn infer(sigma: &InstanceTyping, gamma: &TypingContext, t: &Term, mode: Mode) -> Result<Judgment, TypeError> {
    let mut gamma = gamma.clone();
    Checker { sigma, mode }.infer(&mut gamma, t)
}

/// Types a closed user program, which must not yield.
pub fn check_user_program(t: &Term, mode: Mode) -> Result<Type, TypeError> {
    if t.contains_runtime_form() {
        return Err(TypeError::RuntimeForm);
    }
    let j = infer(&InstanceTyping::new(), &TypingContext::new(), t, mode)?;
    if !j.yields.is_bot() {
        return Err(TypeError::NonBottomYield(j.yields));
    }
    Ok(j.ty)
}

/// Σ ⊢ μ: equal domains, and every stored term has the instance's return
/// type and yields at most the instance's yield type.
pub fn store_well_typed<'a>(
    sigma: &InstanceTyping,
    mu: impl IntoIterator<Item = (&'a Label, &'a Term)>,
    mode: Mode,
) -> bool {
    let mu: Vec<_> = mu.into_iter().collect();
    if mu.len() != sigma.len() || mu.iter().any(|(i, _)| !sigma.contains_key(i)) {
        return false;
    }
    let checker = Checker { sigma, mode };
    mu.iter().all(|(i, t)| {
        let Some(Type::Instance(y, r)) = sigma.get(i) else {
            return false;
        };
        let Ok(j) = checker.infer(&mut TypingContext::new(), t) else {
            return false;
        };
        checker.fits(&j.ty, r) && checker.within(&j.yields, y).is_ok()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::*;

    fn base(t: &Term) -> Result<Judgment, TypeError> {
        infer(&InstanceTyping::new(), &TypingContext::new(), t, Mode::Base)
    }

    #[test]
    fn dup_and_once() {
        let dup = cor("x", Type::Int, Type::Bot, add(var("x"), var("x")));
        assert_eq!(base(&dup).unwrap().ty, Type::cor(Type::Int, Type::Bot, Type::Int));
        let once = cor("x", Type::Int, Type::Int, yield_(var("x")));
        assert_eq!(base(&once).unwrap().ty, Type::cor(Type::Int, Type::Int, Type::Unit));
        let j = base(&start(once, Term::Int(7))).unwrap();
        assert_eq!(j.ty, Type::inst(Type::Int, Type::Unit));
        assert!(j.yields.is_bot());
    }

    #[test]
    fn top_level_yield_is_rejected() {
        assert!(matches!(
            check_user_program(&yield_(Term::Unit), Mode::Base),
            Err(TypeError::NonBottomYield(Type::Unit))
        ));
    }

    #[test]
    fn function_bodies_cannot_yield() {
        let f = abs("x", Type::Int, yield_(var("x")));
        assert!(matches!(base(&f), Err(TypeError::YieldInFunction(_))));
    }

    #[test]
    fn subtype_examples() {
        let c = |y| Type::cor(Type::Int, y, Type::Int);
        assert!(subtype(&Type::Bot, &Type::cor(Type::Int, Type::Int, Type::Unit)));
        assert!(subtype(&c(Type::Bot), &c(Type::Int)));
        assert!(!subtype(&c(Type::Int), &c(Type::Bot)));
    }

    #[test]
    fn join_examples() {
        assert_eq!(join(&Type::Int, &Type::Bot), Type::Int);
        assert_eq!(join(&Type::Int, &Type::Unit), Type::Top);
        let c = |y| Type::cor(Type::Int, y, Type::Int);
        assert_eq!(join(&c(Type::Int), &c(Type::Bot)), c(Type::Int));
        assert_eq!(meet(&Type::Int, &Type::Unit), Type::Bot);
    }

    #[test]
    fn store_typing() {
        let sigma = InstanceTyping::from([(0, Type::inst(Type::Int, Type::Unit))]);
        let mu = BTreeMap::from([(0, yield_(Term::Int(7)))]);
        assert!(store_well_typed(&sigma, &mu, Mode::Base));
        assert!(!store_well_typed(&sigma, &BTreeMap::new(), Mode::Base));
        assert!(store_well_typed(&InstanceTyping::new(), &BTreeMap::new(), Mode::Base));
    }
}
