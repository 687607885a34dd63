//! Type-directed generation of closed, well-typed user programs.
//!
//! The generator picks a goal type and builds a term inhabiting it. Every
//! subterm is generated against the yield type of its context (`Bot` outside
//! coroutine bodies), so the finished program never yields at top level.
//! `let` bindings follow the parser's desugaring: an applied `fun` outside
//! coroutine bodies, an applied `cor` with the body's yield type inside one.
//! Printing a generated term and parsing it back gives the same term.
//!
//! Recursion through `fix` only ever recurses through a nested, unapplied
//! abstraction, but nothing stops a generated program from calling it, so
//! callers should treat running out of fuel as a discard.

use lsq_core::ast::{abs, add, app, cor, fix, resume, snapshot, start, var, yield_};
use lsq_core::{Mode, Term, Type};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Binder {
    Fun,
    Cor,
}

struct Gen {
    rng: ChaCha8Rng,
    mode: Mode,
    next_name: usize,
    /// Remaining composite nodes; once spent, only leaves are produced.
    budget: usize,
}

#[derive(Clone)]
struct Ctx {
    vars: Vec<(String, Type)>,
    /// Yield type of the enclosing coroutine body, `Bot` elsewhere.
    yields: Type,
    binder: Binder,
}

impl Ctx {
    fn bind(&self, x: &str, t: &Type) -> Ctx {
        let mut c = self.clone();
        c.vars.push((x.to_string(), t.clone()));
        c
    }

    fn fun_body(&self, x: &str, t: &Type) -> Ctx {
        let mut c = self.bind(x, t);
        c.yields = Type::Bot;
        c.binder = Binder::Fun;
        c
    }

    fn cor_body(&self, x: &str, t: &Type, y: &Type) -> Ctx {
        let mut c = self.bind(x, t);
        c.yields = y.clone();
        c.binder = Binder::Cor;
        c
    }

    fn with_yields(&self, y: &Type) -> Ctx {
        let mut c = self.clone();
        c.yields = y.clone();
        c
    }

    /// Innermost variables of exactly type `t`.
    fn of_type(&self, t: &Type) -> Vec<String> {
        let mut seen = std::collections::HashSet::new();
        self.vars
            .iter()
            .rev()
            .filter(|(x, _)| seen.insert(x.clone()))
            .filter(|(_, u)| u == t)
            .map(|(x, _)| x.clone())
            .collect()
    }
}

impl Gen {
    fn fresh(&mut self, prefix: &str) -> String {
        self.next_name += 1;
        format!("{prefix}{}", self.next_name)
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    fn ground(&mut self) -> Type {
        if self.chance(0.7) {
            Type::Int
        } else {
            Type::Unit
        }
    }

    fn yield_ty(&mut self) -> Type {
        match self.rng.gen_range(0..4) {
            0 => Type::Bot,
            3 => Type::Unit,
            _ => Type::Int,
        }
    }

    /// A type for an intermediate binding.
    fn small_type(&mut self) -> Type {
        match self.rng.gen_range(0..10) {
            0..=4 => self.ground(),
            5 => {
                let (a, r) = (self.ground(), self.ground());
                Type::fun(a, r)
            }
            6 | 7 => {
                let (a, y, r) = (self.ground(), self.yield_ty(), self.ground());
                Type::cor(a, y, r)
            }
            _ => {
                let (y, r) = (self.yield_ty(), self.ground());
                Type::inst(y, r)
            }
        }
    }

    fn take(&mut self) -> bool {
        if self.budget == 0 {
            return false;
        }
        self.budget -= 1;
        true
    }

    /// `let x: t = e in body`, desugared the way the parser does it.
    fn let_in(&mut self, ctx: &Ctx, x: &str, t: &Type, e: Term, body: Term) -> Term {
        let binder = match ctx.binder {
            Binder::Cor => cor(x, t.clone(), ctx.yields.clone(), body),
            Binder::Fun => abs(x, t.clone(), body),
        };
        app(binder, e)
    }

    fn body_ctx(&self, ctx: &Ctx, x: &str, t: &Type) -> Ctx {
        match ctx.binder {
            Binder::Cor => ctx.cor_body(x, t, &ctx.yields),
            Binder::Fun => ctx.fun_body(x, t),
        }
    }

    fn term(&mut self, ctx: &Ctx, goal: &Type, depth: usize) -> Term {
        let vars = ctx.of_type(goal);
        if depth == 0 || !self.take() {
            if let Some(x) = vars.choose(&mut self.rng) {
                if self.chance(0.8) {
                    return var(x);
                }
            }
            return self.leaf(ctx, goal);
        }
        if !vars.is_empty() && self.chance(0.25) {
            return var(vars.choose(&mut self.rng).unwrap());
        }
        let d = depth - 1;
        if !ctx.yields.is_bot() && self.chance(0.2) {
            return self.gen_yield_then(ctx, goal, d);
        }
        match self.rng.gen_range(0..10) {
            0 | 1 => self.gen_let(ctx, goal, d),
            2 => self.gen_direct_call(ctx, goal, d),
            3 | 4 if goal_is_ground(goal) => self.gen_resume(ctx, goal, d),
            5 if goal_is_ground(goal) => self.gen_apply(ctx, goal, d),
            _ => self.gen_intro(ctx, goal, d),
        }
    }

    /// Smallest term of type `goal`.
    fn leaf(&mut self, ctx: &Ctx, goal: &Type) -> Term {
        match goal {
            Type::Int => Term::Int(self.rng.gen_range(-3..10)),
            Type::Unit => Term::Unit,
            Type::Fun(a, r) => {
                let x = self.fresh("x");
                let body = self.leaf(&ctx.fun_body(&x, a), r);
                abs(&x, (**a).clone(), body)
            }
            Type::Coroutine(a, y, r) => {
                let x = self.fresh("x");
                let body = self.leaf(&ctx.cor_body(&x, a, y), r);
                cor(&x, (**a).clone(), (**y).clone(), body)
            }
            Type::Instance(y, r) => {
                let c = self.leaf(ctx, &Type::cor(Type::Unit, (**y).clone(), (**r).clone()));
                start(c, Term::Unit)
            }
            Type::Bot | Type::Top => unreachable!("never a goal"),
        }
    }

    fn gen_let(&mut self, ctx: &Ctx, goal: &Type, d: usize) -> Term {
        let t = self.small_type();
        let x = self.fresh("v");
        let bound_ty = self.subsumed(&t);
        let e = self.term(ctx, &bound_ty, d);
        let body = self.term(&self.body_ctx(ctx, &x, &t), goal, d);
        self.let_in(ctx, &x, &t, e, body)
    }

    /// In subtyping mode, sometimes a strict subtype of `t` to bind at `t`.
    fn subsumed(&mut self, t: &Type) -> Type {
        if self.mode != Mode::Subtyping || !self.chance(0.4) {
            return t.clone();
        }
        match t {
            Type::Coroutine(a, y, r) if !y.is_bot() => Type::cor((**a).clone(), Type::Bot, (**r).clone()),
            Type::Instance(y, r) if !y.is_bot() => Type::inst(Type::Bot, (**r).clone()),
            _ => t.clone(),
        }
    }

    /// `yield(e); rest`. Only called inside coroutine bodies, where `;`
    /// desugars to an applied coroutine binding `_`.
    fn gen_yield_then(&mut self, ctx: &Ctx, goal: &Type, d: usize) -> Term {
        let y = ctx.yields.clone();
        let e = yield_(self.term(ctx, &y, d));
        let rest = self.term(ctx, goal, d);
        app(cor("_", Type::Unit, y, rest), e)
    }

    /// `let g = cor ... in g(arg)`. The callee yields either nothing or the
    /// context's yield type.
    fn gen_direct_call(&mut self, ctx: &Ctx, goal: &Type, d: usize) -> Term {
        let a = self.ground();
        let y = if ctx.yields.is_bot() || self.chance(0.3) {
            Type::Bot
        } else {
            ctx.yields.clone()
        };
        let cty = Type::cor(a.clone(), y.clone(), goal.clone());
        let g = self.fresh("g");
        let callee = self.term(ctx, &cty, d);
        let inner = self.body_ctx(ctx, &g, &cty).with_yields(&y);
        let arg = self.term(&inner, &a, d);
        self.let_in(ctx, &g, &cty, callee, app(var(&g), arg))
    }

    /// Resumes an instance, usually one bound just before.
    fn gen_resume(&mut self, ctx: &Ctx, goal: &Type, d: usize) -> Term {
        let y = if self.chance(0.8) { Type::Int } else { self.yield_ty() };
        let r = self.ground();
        let ity = Type::inst(y.clone(), r.clone());
        // Handlers yield nothing, or the context's yield type.
        let hy = if ctx.yields.is_bot() || self.chance(0.5) {
            Type::Bot
        } else {
            ctx.yields.clone()
        };
        let existing = ctx.of_type(&ity);
        let (bind, inst) = match existing.choose(&mut self.rng) {
            Some(i) if self.chance(0.5) => {
                let i = var(i);
                (None, if self.chance(0.3) { snapshot(i) } else { i })
            }
            _ => {
                let i = self.fresh("i");
                let e = self.term(ctx, &ity, d);
                (Some((i.clone(), e)), var(&i))
            }
        };
        let handler = |s: &mut Gen, input: &Type| {
            let x = s.fresh("h");
            let body = s.term(&ctx.cor_body(&x, input, &hy), goal, d.saturating_sub(1));
            cor(&x, input.clone(), hy.clone(), body)
        };
        let mut resumes = Vec::new();
        for k in 0..self.rng.gen_range(1..=2) {
            let hr = handler(self, &r);
            let hv = handler(self, &y);
            let hd = handler(self, &Type::Unit);
            let target = if k == 1 && self.chance(0.4) {
                snapshot(inst.clone())
            } else {
                inst.clone()
            };
            resumes.push(resume(target, hr, hv, hd));
        }
        let body = if *goal == Type::Int && resumes.len() == 2 {
            let b = resumes.pop().unwrap();
            add(resumes.pop().unwrap(), b)
        } else {
            resumes.pop().unwrap()
        };
        match bind {
            Some((i, e)) => self.let_in(ctx, &i, &ity, e, body),
            None => body,
        }
    }

    fn gen_apply(&mut self, ctx: &Ctx, goal: &Type, d: usize) -> Term {
        let a = self.ground();
        let f = self.term(ctx, &Type::fun(a.clone(), goal.clone()), d);
        let arg = self.term(ctx, &a, d);
        app(f, arg)
    }

    /// Introduction forms for the goal type.
    fn gen_intro(&mut self, ctx: &Ctx, goal: &Type, d: usize) -> Term {
        match goal {
            Type::Int => add(self.term(ctx, &Type::Int, d), self.term(ctx, &Type::Int, d)),
            Type::Unit => {
                if !ctx.yields.is_bot() && self.chance(0.7) {
                    let y = ctx.yields.clone();
                    yield_(self.term(ctx, &y, d))
                } else {
                    self.gen_let(ctx, goal, d)
                }
            }
            Type::Fun(a, r) => {
                if self.chance(0.3) {
                    let f = self.fresh("f");
                    let x = self.fresh("n");
                    let inner = ctx.fun_body(&f, goal).fun_body(&x, a);
                    let body = self.term(&inner, r, d);
                    fix(abs(&f, goal.clone(), abs(&x, (**a).clone(), body)))
                } else {
                    let x = self.fresh("x");
                    let body = self.term(&ctx.fun_body(&x, a), r, d);
                    abs(&x, (**a).clone(), body)
                }
            }
            Type::Coroutine(a, y, r) => {
                let x = self.fresh("x");
                let body = self.term(&ctx.cor_body(&x, a, y), r, d);
                cor(&x, (**a).clone(), (**y).clone(), body)
            }
            Type::Instance(y, r) => {
                let existing = ctx.of_type(goal);
                if let Some(i) = existing.choose(&mut self.rng) {
                    if self.chance(0.6) {
                        return snapshot(var(i));
                    }
                }
                let a = self.ground();
                let cty = self.subsumed(&Type::cor(a.clone(), (**y).clone(), (**r).clone()));
                let c = self.term(ctx, &cty, d);
                let arg = self.term(ctx, &a, d);
                start(c, arg)
            }
            Type::Bot | Type::Top => unreachable!("never a goal"),
        }
    }
}

fn goal_is_ground(t: &Type) -> bool {
    matches!(t, Type::Int | Type::Unit)
}

/// Generates a closed user program whose type is `Int` or `Unit`.
///
/// `size` bounds the nesting depth; the same arguments always give the same
/// term. The result passes `check_user_program` in `mode`.
pub fn gen_well_typed(seed: u64, size: usize, mode: Mode) -> Term {
    assert!(size >= 1, "size must be at least 1");
    for attempt in 0u64.. {
        let mut g = Gen {
            rng: ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15))),
            mode,
            next_name: 0,
            budget: 6 * size,
        };
        let goal = if g.chance(0.8) { Type::Int } else { Type::Unit };
        let ctx = Ctx {
            vars: Vec::new(),
            yields: Type::Bot,
            binder: Binder::Fun,
        };
        let t = g.term(&ctx, &goal, size);
        if lsq_core::check_user_program(&t, mode).is_ok() || attempt == 15 {
            return t;
        }
    }
    unreachable!()
}
