//! The term translation.
//!
//! Terms that cannot yield are translated directly by [`Tx::free`]. Inside a
//! coroutine body, terms that may yield go through [`Tx::cps`], which builds
//! the body of a ξ-function `(s) => (k) => ...` with administrative redexes
//! reduced at translation time: continuations are meta-level closures until
//! they must become target values.
//!
//! Store functions do not close over the instance they were created for.
//! Each instance type `y <~> r` has a current-instance cell, set by `resume`
//! for the duration of the call, and the store function writes through it.
//! A snapshot therefore keeps updating its own reference when resumed.

use std::collections::BTreeMap;

use lsq_core::typeck::Judgment;
use lsq_core::{infer, InstanceTyping, Mode, Term, Type, TypingContext};
use lsq_target::build::*;
use lsq_target::{TargetTerm, TargetType};

use crate::abbrev::*;
use crate::CpsError;

type Res = Result<TargetTerm, CpsError>;
type MetaK<'a> = Box<dyn FnOnce(&mut Tx, TargetTerm) -> Res + 'a>;
type Done<'a> = Box<dyn FnOnce(&mut Tx, Vec<TargetTerm>) -> Res + 'a>;

enum Cont<'a> {
    /// A target variable of continuation type.
    Var(String),
    Meta(MetaK<'a>),
}

/// Typing context and position of a term inside a coroutine body.
#[derive(Clone)]
struct Ctx {
    gamma: TypingContext,
    yields: Type,
    ret: Type,
    store: String,
}

#[derive(Default)]
pub(crate) struct Tx {
    fresh: usize,
    cells: BTreeMap<(TargetType, TargetType), String>,
}

fn atomic(t: &TargetTerm) -> bool {
    matches!(t, TargetTerm::Var(_) | TargetTerm::Unit | TargetTerm::Int(_))
}

fn judge(gamma: &TypingContext, t: &Term) -> Result<Judgment, CpsError> {
    Ok(infer(&InstanceTyping::new(), gamma, t, Mode::Base)?)
}

fn instance_parts(t: &Type) -> (Type, Type) {
    match t {
        Type::Instance(y, r) => ((**y).clone(), (**r).clone()),
        other => unreachable!("typechecked instance position has type {other}"),
    }
}

fn coroutine_parts(t: &Type) -> (Type, Type, Type) {
    match t {
        Type::Coroutine(a, y, r) => ((**a).clone(), (**y).clone(), (**r).clone()),
        other => unreachable!("typechecked handler position has type {other}"),
    }
}

impl Tx {
    pub(crate) fn fresh(&mut self, base: &str) -> String {
        let n = self.fresh;
        self.fresh += 1;
        format!("%{base}{n}")
    }

    fn cur_cell(&mut self, y: &TargetType, r: &TargetType) -> String {
        let key = (y.clone(), r.clone());
        if let Some(name) = self.cells.get(&key) {
            return name.clone();
        }
        let name = self.fresh("cur");
        self.cells.insert(key, name.clone());
        name
    }

    /// Declares the current-instance cells used by `body`.
    pub(crate) fn wrap_cells(&mut self, body: TargetTerm) -> TargetTerm {
        let cells = std::mem::take(&mut self.cells);
        cells.into_iter().rev().fold(body, |acc, ((y, r), name)| {
            let init = new_ref(new_ref(thunk(term_tag(&y, &r))));
            let_(&name, TargetType::reference(rho(y, r)), init, acc)
        })
    }

    /// Binds `t` to a fresh variable unless it is atomic, then continues.
    fn name_value(&mut self, t: TargetTerm, ty: &TargetType, rest: impl FnOnce(&mut Tx, TargetTerm) -> Res) -> Res {
        if atomic(&t) {
            return rest(self, t);
        }
        let x = self.fresh("x");
        let body = rest(self, var(&x))?;
        Ok(let_(&x, ty.clone(), t, body))
    }

    fn apply_k(&mut self, k: Cont<'_>, v: TargetTerm, ty: &TargetType) -> Res {
        match k {
            Cont::Var(name) => Ok(app(var(&name), v)),
            Cont::Meta(f) => self.name_value(v, ty, f),
        }
    }

    /// Turns a continuation into a target value of type `kappa[ty, ..]`.
    fn reify(&mut self, k: Cont<'_>, ty: &TargetType) -> Res {
        match k {
            Cont::Var(name) => Ok(var(&name)),
            Cont::Meta(f) => {
                let x = self.fresh("x");
                let body = f(self, var(&x))?;
                Ok(lam(&x, ty.clone(), body))
            }
        }
    }

    /// The store function handed to a coroutine started at type `y <~> r`.
    fn store_function(&mut self, y: &TargetType, r: &TargetType) -> TargetTerm {
        let cur = self.cur_cell(y, r);
        let kk = self.fresh("k");
        lam(
            &kk,
            kappa(TargetType::Unit, y.clone(), r.clone()),
            assign(deref(var(&cur)), var(&kk)),
        )
    }

    fn start(&mut self, c: TargetTerm, a: TargetTerm, y: &TargetType, r: &TargetType) -> TargetTerm {
        let store = self.store_function(y, r);
        new_ref(thunk(app2(c, store, a)))
    }

    /// Calls a coroutine that cannot yield and unwraps its `Ret`.
    fn call_silent(&mut self, c: TargetTerm, a: TargetTerm, ret: &TargetType) -> TargetTerm {
        let kk = self.fresh("k");
        let dummy = lam(
            &kk,
            kappa(TargetType::Unit, TargetType::Never, ret.clone()),
            TargetTerm::Unit,
        );
        let z = self.fresh("x");
        matches(
            app2(c, dummy, a),
            (&z, var(&z)),
            (&z, TargetTerm::Unreachable(ret.clone())),
            TargetTerm::Unreachable(ret.clone()),
        )
    }

    /// Calls a coroutine that yields the same type as the enclosing body.
    fn call_yielding(&mut self, ctx: &Ctx, c: TargetTerm, a: TargetTerm, ret: &Type, k: Cont<'_>) -> Res {
        let ty = translate_type(&ctx.yields)?;
        let tr = translate_type(&ctx.ret)?;
        let t2 = translate_type(ret)?;
        let kv = self.reify(k, &t2)?;
        let f = self.fresh("f");
        let s2 = self.fresh("s");
        let k2 = self.fresh("k");
        let u = self.fresh("u");
        let store = lam(
            &k2,
            kappa(TargetType::Unit, ty.clone(), t2.clone()),
            app(
                var(&ctx.store),
                lam(&u, TargetType::Unit, app(var(&f), app(var(&k2), var(&u)))),
            ),
        );
        Ok(let_(
            &f,
            phi_t(ty.clone(), t2.clone(), tr),
            build_output_transformer(&ty, &t2, &translate_type(&ctx.ret)?, kv),
            let_(&s2, sigma_t(ty, t2), store, app(var(&f), app2(c, var(&s2), a))),
        ))
    }

    /// Runs instance `i` of type `y <~> r` and dispatches on its output.
    /// `arm` builds the body of each case from the handler index and payload.
    fn resume_with(
        &mut self,
        i: TargetTerm,
        y: &TargetType,
        r: &TargetType,
        mut arm: impl FnMut(&mut Tx, usize, TargetTerm) -> Res,
    ) -> Res {
        let cur = self.cur_cell(y, r);
        let (f, saved, o, a) = (self.fresh("f"), self.fresh("c"), self.fresh("o"), self.fresh("x"));
        let cases = matches(
            var(&o),
            (&a, arm(self, 0, var(&a))?),
            (&a, arm(self, 1, var(&a))?),
            arm(self, 2, TargetTerm::Unit)?,
        );
        let run = let_(
            &f,
            kappa(TargetType::Unit, y.clone(), r.clone()),
            deref(i.clone()),
            seq(
                assign(i.clone(), thunk(term_tag(y, r))),
                let_(
                    &saved,
                    rho(y.clone(), r.clone()),
                    deref(var(&cur)),
                    seq(
                        assign(var(&cur), i),
                        let_(
                            &o,
                            TargetType::out(y.clone(), r.clone()),
                            app(var(&f), TargetTerm::Unit),
                            seq(assign(var(&cur), var(&saved)), cases),
                        ),
                    ),
                ),
            ),
        );
        Ok(run)
    }

    /// Translates every term in order, binding non-atomic results.
    fn free_all(
        &mut self,
        gamma: &TypingContext,
        ts: &[&Term],
        done: impl FnOnce(&mut Tx, Vec<TargetTerm>) -> Res,
    ) -> Res {
        let mut vals = Vec::new();
        for t in ts {
            let ty = translate_type(&judge(gamma, t)?.ty)?;
            vals.push((self.free(gamma, t)?, ty));
        }
        let mut names = Vec::new();
        let mut binds = Vec::new();
        for (v, ty) in vals {
            if atomic(&v) {
                names.push(v);
            } else {
                let x = self.fresh("x");
                names.push(var(&x));
                binds.push((x, ty, v));
            }
        }
        let body = done(self, names)?;
        Ok(binds
            .into_iter()
            .rev()
            .fold(body, |acc, (x, ty, v)| let_(&x, ty, v, acc)))
    }

    /// Translation of a term that does not yield.
    pub(crate) fn free(&mut self, gamma: &TypingContext, t: &Term) -> Res {
        match t {
            Term::Var(x) => Ok(var(x)),
            Term::Unit => Ok(TargetTerm::Unit),
            Term::Int(n) => Ok(TargetTerm::Int(*n)),
            Term::Add(a, b) => Ok(add(self.free(gamma, a)?, self.free(gamma, b)?)),
            Term::Abs(x, ty, body) => {
                let inner = gamma.extend(x, ty.clone());
                Ok(lam(x, translate_type(ty)?, self.free(&inner, body)?))
            }
            Term::App(f, a) => {
                let jf = judge(gamma, f)?;
                let (vf, va) = (self.free(gamma, f)?, self.free(gamma, a)?);
                match &jf.ty {
                    Type::Coroutine(_, _, r) => {
                        let r = translate_type(r)?;
                        Ok(self.call_silent(vf, va, &r))
                    }
                    _ => Ok(app(vf, va)),
                }
            }
            Term::Coroutine {
                param,
                annot,
                yields,
                body,
            } => self.coroutine(gamma, param, annot, yields, body),
            Term::Start(c, a) => {
                let (_, y, r) = coroutine_parts(&judge(gamma, c)?.ty);
                let (y, r) = (translate_type(&y)?, translate_type(&r)?);
                let vc = self.free(gamma, c)?;
                let va = self.free(gamma, a)?;
                if vc.is_value() && va.is_value() {
                    return Ok(self.start(vc, va, &y, &r));
                }
                self.free_all(gamma, &[c, a], |tx, vs| {
                    let [vc, va] = <[_; 2]>::try_from(vs).expect("two operands");
                    Ok(tx.start(vc, va, &y, &r))
                })
            }
            Term::Snapshot(i) => Ok(new_ref(deref(self.free(gamma, i)?))),
            Term::Resume(i, h2, h3, h4) => {
                let (y, r) = instance_parts(&judge(gamma, i)?.ty);
                let (y, r) = (translate_type(&y)?, translate_type(&r)?);
                let (_, _, tz) = coroutine_parts(&judge(gamma, h2)?.ty);
                let tz = translate_type(&tz)?;
                self.free_all(gamma, &[i, h2, h3, h4], |tx, vs| {
                    let [vi, v2, v3, v4] = <[_; 4]>::try_from(vs).expect("four operands");
                    let hs = [v2, v3, v4];
                    tx.resume_with(vi, &y, &r, |tx, which, payload| {
                        Ok(tx.call_silent(hs[which].clone(), payload, &tz))
                    })
                })
            }
            Term::Fix(f) => self.fix(gamma, f),
            Term::Yield(_) => Err(CpsError::FreeYield(judge(gamma, t)?.yields)),
            Term::Label(_) | Term::Resumption { .. } | Term::Suspension(..) | Term::Empty => Err(CpsError::RuntimeForm),
        }
    }

    fn coroutine(&mut self, gamma: &TypingContext, param: &str, annot: &Type, yields: &Type, body: &Term) -> Res {
        let inner = gamma.extend(param, annot.clone());
        let body_ty = judge(&inner, body)?.ty;
        let (t1, ty, t2) = (
            translate_type(annot)?,
            translate_type(yields)?,
            translate_type(&body_ty)?,
        );
        let s = self.fresh("s");
        let x2 = self.fresh("x");
        let finish = seq(app(var(&s), thunk(term_tag(&ty, &t2))), ret(&ty, &t2, var(&x2)));
        let translated = if yields.is_bot() {
            seq(
                app(var(&s), thunk(term_tag(&ty, &t2))),
                ret(&ty, &t2, self.free(&inner, body)?),
            )
        } else {
            let ctx = Ctx {
                gamma: inner,
                yields: yields.clone(),
                ret: body_ty.clone(),
                store: String::new(),
            };
            let xi = self.xi(ctx, &body_ty, body)?;
            app2(xi, var(&s), lam(&x2, t2.clone(), finish))
        };
        Ok(lam(&s, sigma_t(ty, t2), lam(param, t1, translated)))
    }

    /// `(s) => (k) => ...` for a term of type `ty` inside a body described
    /// by `ctx`; `ctx.store` is replaced by the fresh store binder.
    fn xi(&mut self, mut ctx: Ctx, ty: &Type, t: &Term) -> Res {
        let (yt, rt, tt) = (
            translate_type(&ctx.yields)?,
            translate_type(&ctx.ret)?,
            translate_type(ty)?,
        );
        let s = self.fresh("s");
        let k = self.fresh("k");
        ctx.store = s.clone();
        let body = self.cps(&ctx, t, Cont::Var(k.clone()))?;
        Ok(lam(
            &s,
            sigma_t(yt.clone(), rt.clone()),
            lam(&k, kappa(tt, yt, rt), body),
        ))
    }

    fn fix(&mut self, gamma: &TypingContext, f: &Term) -> Res {
        let jf = judge(gamma, f)?;
        let a = match &jf.ty {
            Type::Fun(a, _) => translate_type(a)?,
            other => unreachable!("typechecked fix has type {other}"),
        };
        let (p, q) = match &a {
            TargetType::Fun(p, q) => ((**p).clone(), (**q).clone()),
            _ => {
                return Err(CpsError::UnsupportedFix(format!(
                    "fixed point of non-function type {a}"
                )))
            }
        };
        match f {
            Term::Abs(_, _, body) if body.is_value() => {}
            _ => {
                return Err(CpsError::UnsupportedFix(
                    "argument must be an abstraction whose body is a value".into(),
                ))
            }
        }
        let vf = self.free(gamma, f)?;
        let (r, v, y) = (self.fresh("r"), self.fresh("v"), self.fresh("y"));
        let placeholder = lam(&y, p.clone(), TargetTerm::Unreachable(q));
        let proxy = lam(&y, p, app(deref(var(&r)), var(&y)));
        Ok(let_(
            &r,
            TargetType::reference(a.clone()),
            new_ref(placeholder),
            let_(&v, a, app(vf, proxy), seq(assign(var(&r), var(&v)), var(&v))),
        ))
    }

    /// Translates each term in CPS, left to right, then continues with the values.
    fn cps_all<'a>(&mut self, ctx: &'a Ctx, mut ts: Vec<&'a Term>, mut acc: Vec<TargetTerm>, done: Done<'a>) -> Res {
        if ts.is_empty() {
            return done(self, acc);
        }
        let t = ts.remove(0);
        self.cps(
            ctx,
            t,
            Cont::Meta(Box::new(move |tx, v| {
                acc.push(v);
                tx.cps_all(ctx, ts, acc, done)
            })),
        )
    }

    /// Translation of `t` inside a coroutine body, passing its value to `k`.
    fn cps<'a>(&mut self, ctx: &'a Ctx, t: &'a Term, k: Cont<'a>) -> Res {
        let j = judge(&ctx.gamma, t)?;
        let ty = translate_type(&j.ty)?;
        if j.yields.is_bot() {
            let v = self.free(&ctx.gamma, t)?;
            return self.apply_k(k, v, &ty);
        }
        match t {
            Term::Add(a, b) => self.cps_all(
                ctx,
                vec![a, b],
                Vec::new(),
                Box::new(move |tx, vs| tx.apply_k(k, add(vs[0].clone(), vs[1].clone()), &TargetType::Int)),
            ),
            Term::App(f, a) => {
                let jf = judge(&ctx.gamma, f)?;
                self.cps_all(
                    ctx,
                    vec![f, a],
                    Vec::new(),
                    Box::new(move |tx, vs| {
                        let [vf, va] = <[_; 2]>::try_from(vs).expect("two operands");
                        match &jf.ty {
                            Type::Coroutine(_, w, r) if !w.is_bot() => tx.call_yielding(ctx, vf, va, r, k),
                            Type::Coroutine(_, _, r) => {
                                let r = translate_type(r)?;
                                let v = tx.call_silent(vf, va, &r);
                                tx.apply_k(k, v, &r)
                            }
                            _ => tx.apply_k(k, app(vf, va), &ty),
                        }
                    }),
                )
            }
            Term::Yield(a) => {
                let (yt, rt) = (translate_type(&ctx.yields)?, translate_type(&ctx.ret)?);
                self.cps(
                    ctx,
                    a,
                    Cont::Meta(Box::new(move |tx, v| {
                        let kv = tx.reify(k, &TargetType::Unit)?;
                        Ok(seq(app(var(&ctx.store), kv), yield_tag(&yt, &rt, v)))
                    })),
                )
            }
            Term::Start(c, a) => {
                let (_, y, r) = coroutine_parts(&judge(&ctx.gamma, c)?.ty);
                let (y, r) = (translate_type(&y)?, translate_type(&r)?);
                self.cps_all(
                    ctx,
                    vec![c, a],
                    Vec::new(),
                    Box::new(move |tx, vs| {
                        let [vc, va] = <[_; 2]>::try_from(vs).expect("two operands");
                        let inst = tx.start(vc, va, &y, &r);
                        tx.apply_k(k, inst, &ty)
                    }),
                )
            }
            Term::Snapshot(i) => self.cps(
                ctx,
                i,
                Cont::Meta(Box::new(move |tx, v| tx.apply_k(k, new_ref(deref(v)), &ty))),
            ),
            Term::Resume(i, h2, h3, h4) => {
                let (y, r) = instance_parts(&judge(&ctx.gamma, i)?.ty);
                let (y, r) = (translate_type(&y)?, translate_type(&r)?);
                let (_, hw, tz) = coroutine_parts(&judge(&ctx.gamma, h2)?.ty);
                self.cps_all(
                    ctx,
                    vec![i, h2, h3, h4],
                    Vec::new(),
                    Box::new(move |tx, vs| {
                        let [vi, v2, v3, v4] = <[_; 4]>::try_from(vs).expect("four operands");
                        let hs = [v2, v3, v4];
                        if hw.is_bot() {
                            let tzt = translate_type(&tz)?;
                            let direct = tx.resume_with(vi, &y, &r, |tx, which, payload| {
                                Ok(tx.call_silent(hs[which].clone(), payload, &tzt))
                            })?;
                            return tx.apply_k(k, direct, &tzt);
                        }
                        // Each case continues with k, so it is shared.
                        let kv = tx.reify(k, &translate_type(&tz)?)?;
                        let (kname, bind) = match kv {
                            TargetTerm::Var(n) => (n, None),
                            other => (tx.fresh("k"), Some(other)),
                        };
                        let body = tx.resume_with(vi, &y, &r, |tx, which, payload| {
                            tx.call_yielding(ctx, hs[which].clone(), payload, &tz, Cont::Var(kname.clone()))
                        })?;
                        Ok(match bind {
                            Some(v) => {
                                let kt = kappa(
                                    translate_type(&tz)?,
                                    translate_type(&ctx.yields)?,
                                    translate_type(&ctx.ret)?,
                                );
                                let_(&kname, kt, v, body)
                            }
                            None => body,
                        })
                    }),
                )
            }
            other => unreachable!("a yielding term is never a value or variable: {other}"),
        }
    }

    /// Public entry for yielding positions: the ξ-function for `t`.
    pub(crate) fn xi_public(&mut self, gamma: &TypingContext, yields: &Type, ret: &Type, t: &Term) -> Res {
        let ty = judge(gamma, t)?.ty;
        let ctx = Ctx {
            gamma: gamma.clone(),
            yields: yields.clone(),
            ret: ret.clone(),
            store: String::new(),
        };
        self.xi(ctx, &ty, t)
    }
}
