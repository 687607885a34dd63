//! Terms and types of the coroutine calculus.
//!
//! Runtime-only forms (instance labels, resumptions, suspensions and the
//! empty term) share the [`Term`] type with user syntax so that the
//! evaluator and typechecker can work on in-flight configurations.

use std::collections::BTreeSet;
use std::fmt;

/// A coroutine instance label. Labels are handed out by a monotone counter.
pub type Label = u64;

/// Types of the calculus. `Top` is only meaningful in subtyping mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Unit,
    Int,
    Fun(Box<Type>, Box<Type>),
    /// `param ~yield~> ret`
    Coroutine(Box<Type>, Box<Type>, Box<Type>),
    /// `yield <~> ret`
    Instance(Box<Type>, Box<Type>),
    Bot,
    Top,
}

impl Type {
    pub fn fun(a: Type, r: Type) -> Type {
        Type::Fun(Box::new(a), Box::new(r))
    }

    pub fn cor(a: Type, y: Type, r: Type) -> Type {
        Type::Coroutine(Box::new(a), Box::new(y), Box::new(r))
    }

    pub fn inst(y: Type, r: Type) -> Type {
        Type::Instance(Box::new(y), Box::new(r))
    }

    pub fn is_bot(&self) -> bool {
        matches!(self, Type::Bot)
    }

    /// True if `Top` occurs anywhere inside the type.
    pub fn mentions_top(&self) -> bool {
        match self {
            Type::Top => true,
            Type::Unit | Type::Int | Type::Bot => false,
            Type::Fun(a, r) | Type::Instance(a, r) => a.mentions_top() || r.mentions_top(),
            Type::Coroutine(a, y, r) => a.mentions_top() || y.mentions_top() || r.mentions_top(),
        }
    }

    fn is_arrow(&self) -> bool {
        matches!(self, Type::Fun(..) | Type::Coroutine(..) | Type::Instance(..))
    }
}

struct Operand<'a>(&'a Type);

impl fmt::Display for Operand<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_arrow() {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Unit => f.write_str("Unit"),
            Type::Int => f.write_str("Int"),
            Type::Bot => f.write_str("Bot"),
            Type::Top => f.write_str("Top"),
            Type::Fun(a, r) => write!(f, "{} -> {}", Operand(a), r),
            Type::Coroutine(a, y, r) => write!(f, "{} ~{}~> {}", Operand(a), Operand(y), r),
            Type::Instance(y, r) => write!(f, "{} <~> {}", Operand(y), r),
        }
    }
}

/// Terms of the calculus, including the runtime-only forms.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub enum Term {
    Abs(String, Type, Box<Term>),
    App(Box<Term>, Box<Term>),
    Var(String),
    #[default]
    Unit,
    Int(i64),
    Add(Box<Term>, Box<Term>),
    /// `cor (param: annot) yields y => body`
    Coroutine {
        param: String,
        annot: Type,
        yields: Type,
        body: Box<Term>,
    },
    Yield(Box<Term>),
    Start(Box<Term>, Box<Term>),
    Resume(Box<Term>, Box<Term>, Box<Term>, Box<Term>),
    Snapshot(Box<Term>),
    Fix(Box<Term>),
    Label(Label),
    Resumption {
        body: Box<Term>,
        on_ret: Box<Term>,
        on_yield: Box<Term>,
        on_dead: Box<Term>,
        label: Label,
    },
    /// `[[ body ]]^pending`; `pending` is a value or `Empty`.
    Suspension(Box<Term>, Box<Term>),
    Empty,
}

pub fn var(x: &str) -> Term {
    Term::Var(x.to_string())
}

pub fn abs(x: &str, t: Type, body: Term) -> Term {
    Term::Abs(x.to_string(), t, Box::new(body))
}

pub fn app(f: Term, a: Term) -> Term {
    Term::App(Box::new(f), Box::new(a))
}

pub fn add(a: Term, b: Term) -> Term {
    Term::Add(Box::new(a), Box::new(b))
}

pub fn cor(x: &str, t: Type, y: Type, body: Term) -> Term {
    Term::Coroutine {
        param: x.to_string(),
        annot: t,
        yields: y,
        body: Box::new(body),
    }
}

pub fn yield_(t: Term) -> Term {
    Term::Yield(Box::new(t))
}

pub fn start(c: Term, a: Term) -> Term {
    Term::Start(Box::new(c), Box::new(a))
}

pub fn resume(i: Term, r: Term, y: Term, d: Term) -> Term {
    Term::Resume(Box::new(i), Box::new(r), Box::new(y), Box::new(d))
}

pub fn snapshot(t: Term) -> Term {
    Term::Snapshot(Box::new(t))
}

pub fn fix(t: Term) -> Term {
    Term::Fix(Box::new(t))
}

pub fn suspension(body: Term, pending: Term) -> Term {
    Term::Suspension(Box::new(body), Box::new(pending))
}

impl Term {
    /// Abstractions, literals, coroutines, labels and the empty term.
    pub fn is_value(&self) -> bool {
        matches!(
            self,
            Term::Abs(..) | Term::Unit | Term::Int(_) | Term::Coroutine { .. } | Term::Label(_) | Term::Empty
        )
    }

    pub fn is_runtime_form(&self) -> bool {
        matches!(
            self,
            Term::Label(_) | Term::Resumption { .. } | Term::Suspension(..) | Term::Empty
        )
    }

    /// True if the term or any subterm is a runtime-only form.
    pub fn contains_runtime_form(&self) -> bool {
        let mut found = false;
        self.visit(&mut |t| found |= t.is_runtime_form());
        found
    }

    /// Immediate subterms in evaluation order.
    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Var(_) | Term::Unit | Term::Int(_) | Term::Label(_) | Term::Empty => vec![],
            Term::Abs(_, _, b) | Term::Coroutine { body: b, .. } => vec![b],
            Term::Yield(t) | Term::Snapshot(t) | Term::Fix(t) => vec![t],
            Term::App(a, b) | Term::Add(a, b) | Term::Start(a, b) | Term::Suspension(a, b) => {
                vec![a, b]
            }
            Term::Resume(a, b, c, d) => vec![a, b, c, d],
            Term::Resumption {
                body,
                on_ret,
                on_yield,
                on_dead,
                ..
            } => vec![body, on_ret, on_yield, on_dead],
        }
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Term)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// Number of syntax nodes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// Labels mentioned anywhere in the term.
    pub fn labels(&self) -> BTreeSet<Label> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| match t {
            Term::Label(i) => {
                out.insert(*i);
            }
            Term::Resumption { label, .. } => {
                out.insert(*label);
            }
            _ => {}
        });
        out
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        collect_free(self, &mut bound, &mut out);
        out
    }

    /// Capture-avoiding substitution of `v` for the free occurrences of `x`.
    pub fn substitute(&self, x: &str, v: &Term) -> Term {
        let fv = v.free_vars();
        subst(self, x, v, &fv)
    }

    /// Structural equality modulo consistent renaming of bound variables.
    pub fn alpha_eq(&self, other: &Term) -> bool {
        alpha(self, other, &mut Vec::new())
    }
}

fn collect_free(t: &Term, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match t {
        Term::Var(x) => {
            if !bound.iter().any(|b| b == x) {
                out.insert(x.clone());
            }
        }
        Term::Abs(x, _, b) | Term::Coroutine { param: x, body: b, .. } => {
            bound.push(x.clone());
            collect_free(b, bound, out);
            bound.pop();
        }
        _ => {
            for c in t.children() {
                collect_free(c, bound, out);
            }
        }
    }
}

fn fresh_name(base: &str, avoid: &BTreeSet<String>, body: &Term) -> String {
    let used = body.free_vars();
    (0..)
        .map(|n| format!("{base}{n}"))
        .find(|c| !avoid.contains(c) && !used.contains(c))
        .expect("unbounded name supply")
}

/// Substitution into a binder body, renaming the binder if it would capture.
fn subst_binder(param: &str, body: &Term, x: &str, v: &Term, fv: &BTreeSet<String>) -> (String, Term) {
    if param == x {
        return (param.to_string(), body.clone());
    }
    if fv.contains(param) {
        let fresh = fresh_name(param, fv, body);
        let renamed = subst(body, param, &Term::Var(fresh.clone()), &BTreeSet::new());
        (fresh, subst(&renamed, x, v, fv))
    } else {
        (param.to_string(), subst(body, x, v, fv))
    }
}

fn subst(t: &Term, x: &str, v: &Term, fv: &BTreeSet<String>) -> Term {
    let s = |t: &Term| Box::new(subst(t, x, v, fv));
    match t {
        Term::Var(y) if y == x => v.clone(),
        Term::Var(_) | Term::Unit | Term::Int(_) | Term::Label(_) | Term::Empty => t.clone(),
        Term::Abs(p, ty, b) => {
            let (p, b) = subst_binder(p, b, x, v, fv);
            Term::Abs(p, ty.clone(), Box::new(b))
        }
        Term::Coroutine {
            param,
            annot,
            yields,
            body,
        } => {
            let (param, body) = subst_binder(param, body, x, v, fv);
            Term::Coroutine {
                param,
                annot: annot.clone(),
                yields: yields.clone(),
                body: Box::new(body),
            }
        }
        Term::App(a, b) => Term::App(s(a), s(b)),
        Term::Add(a, b) => Term::Add(s(a), s(b)),
        Term::Start(a, b) => Term::Start(s(a), s(b)),
        Term::Suspension(a, b) => Term::Suspension(s(a), s(b)),
        Term::Yield(a) => Term::Yield(s(a)),
        Term::Snapshot(a) => Term::Snapshot(s(a)),
        Term::Fix(a) => Term::Fix(s(a)),
        Term::Resume(a, b, c, d) => Term::Resume(s(a), s(b), s(c), s(d)),
        Term::Resumption {
            body,
            on_ret,
            on_yield,
            on_dead,
            label,
        } => Term::Resumption {
            body: s(body),
            on_ret: s(on_ret),
            on_yield: s(on_yield),
            on_dead: s(on_dead),
            label: *label,
        },
    }
}

fn alpha<'a>(a: &'a Term, b: &'a Term, env: &mut Vec<(&'a str, &'a str)>) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => {
            for (l, r) in env.iter().rev() {
                if *l == x || *r == y {
                    return *l == x && *r == y;
                }
            }
            x == y
        }
        (Term::Abs(x, tx, bx), Term::Abs(y, ty, by)) => {
            if tx != ty {
                return false;
            }
            env.push((x, y));
            let r = alpha(bx, by, env);
            env.pop();
            r
        }
        (
            Term::Coroutine {
                param: x,
                annot: ax,
                yields: yx,
                body: bx,
            },
            Term::Coroutine {
                param: y,
                annot: ay,
                yields: yy,
                body: by,
            },
        ) => {
            if ax != ay || yx != yy {
                return false;
            }
            env.push((x, y));
            let r = alpha(bx, by, env);
            env.pop();
            r
        }
        (Term::Label(i), Term::Label(j)) => i == j,
        (Term::Resumption { label: i, .. }, Term::Resumption { label: j, .. }) if i != j => false,
        (Term::Int(m), Term::Int(n)) => m == n,
        _ => {
            if std::mem::discriminant(a) != std::mem::discriminant(b) {
                return false;
            }
            let (ca, cb) = (a.children(), b.children());
            ca.len() == cb.len() && ca.iter().zip(cb).all(|(x, y)| alpha(x, y, env))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        assert!(abs("x", Type::Unit, var("x")).is_value());
        assert!(!yield_(Term::Unit).is_value());
        assert!(!suspension(Term::Unit, Term::Unit).is_value());
        assert!(Term::Empty.is_value());
    }

    #[test]
    fn substitution_respects_shadowing() {
        let t = abs("x", Type::Unit, var("x"));
        assert_eq!(t.substitute("x", &Term::Unit), t);
        assert_eq!(var("x").substitute("x", &Term::Unit), Term::Unit);
    }

    #[test]
    fn substitution_avoids_capture() {
        let t = abs("y", Type::Int, add(var("x"), var("y")));
        let out = t.substitute("x", &var("y"));
        assert_eq!(out.free_vars(), BTreeSet::from(["y".to_string()]));
        assert!(out.alpha_eq(&abs("z", Type::Int, add(var("y"), var("z")))));
    }

    #[test]
    fn free_vars_of_app() {
        let t = app(var("f"), yield_(var("y")));
        let fv: Vec<_> = t.free_vars().into_iter().collect();
        assert_eq!(fv, vec!["f", "y"]);
    }

    #[test]
    fn type_display() {
        let t = Type::cor(Type::Int, Type::Int, Type::Unit);
        assert_eq!(t.to_string(), "Int ~Int~> Unit");
        let f = Type::fun(Type::fun(Type::Int, Type::Int), Type::Int);
        assert_eq!(f.to_string(), "(Int -> Int) -> Int");
        assert_eq!(Type::inst(Type::Int, Type::Unit).to_string(), "Int <~> Unit");
    }
}
