//! Canonicalization into the restricted form consumed by the CFG builder.
//!
//! In restricted form every declaration has an atomic or single-operation
//! right-hand side, assignments, conditions, throws and results are atoms,
//! `yieldval` and coroutine calls appear only as declaration right-hand sides,
//! and every catch handler is a single copy of the exception into a variable.
//! Temporaries are named `x_<n>` in the order they are introduced.

use crate::ast::{BinOp, Block, CoroutineDef, Expr, MiniProgram, Stmt};
use std::collections::HashSet;

struct Fresh {
    next: usize,
    taken: HashSet<String>,
}

impl Fresh {
    fn name(&mut self) -> String {
        loop {
            let x = format!("x_{}", self.next);
            self.next += 1;
            if !self.taken.contains(&x) {
                self.taken.insert(x.clone());
                return x;
            }
        }
    }

    fn norm_expr(&mut self, e: &Expr) -> (Vec<Stmt>, Expr) {
        if e.is_atom() {
            return (Vec::new(), e.clone());
        }
        let mut pre = Vec::new();
        let rhs = match e {
            Expr::Bin(op @ (BinOp::And | BinOp::Or), a, b) => {
                let (c1, x1) = self.norm_expr(a);
                pre.extend(c1);
                let x = self.name();
                let (c2, x2) = self.norm_expr(b);
                let mut rhs_branch = c2;
                rhs_branch.push(Stmt::Assign(x.clone(), x2));
                let short = vec![Stmt::Assign(x.clone(), Expr::Bool(*op == BinOp::Or))];
                let (t, f) = if *op == BinOp::Or {
                    (short, rhs_branch)
                } else {
                    (rhs_branch, short)
                };
                pre.push(Stmt::Var(x.clone(), None));
                pre.push(Stmt::If(x1, block(t), block(f)));
                return (pre, Expr::Var(x));
            }
            Expr::Bin(op, a, b) => {
                let a = self.atomize(a, &mut pre);
                let b = self.atomize(b, &mut pre);
                Expr::Bin(*op, Box::new(a), Box::new(b))
            }
            Expr::Sel(a, field) => Expr::Sel(Box::new(self.atomize(a, &mut pre)), *field),
            Expr::Yield(a) => Expr::Yield(Box::new(self.atomize(a, &mut pre))),
            Expr::Call(name, args) => {
                Expr::Call(name.clone(), args.iter().map(|a| self.atomize(a, &mut pre)).collect())
            }
            Expr::List(items) => Expr::List(items.iter().map(|a| self.atomize(a, &mut pre)).collect()),
            _ => unreachable!("atoms handled above"),
        };
        let x = self.name();
        pre.push(Stmt::Var(x.clone(), Some(rhs)));
        (pre, Expr::Var(x))
    }

    fn atomize(&mut self, e: &Expr, pre: &mut Vec<Stmt>) -> Expr {
        let (c, x) = self.norm_expr(e);
        pre.extend(c);
        x
    }

    fn norm_block(&mut self, b: &Block) -> Block {
        let mut stmts = Vec::new();
        for s in &b.stmts {
            self.norm_stmt(s, &mut stmts);
        }
        let result = b.result.as_ref().map(|r| self.atomize(r, &mut stmts));
        Block { stmts, result }
    }

    fn norm_stmt(&mut self, s: &Stmt, out: &mut Vec<Stmt>) {
        match s {
            Stmt::Var(_, None) => out.push(s.clone()),
            Stmt::Var(x, Some(e)) if e.is_simple() => out.push(Stmt::Var(x.clone(), Some(e.clone()))),
            Stmt::Var(x, Some(e)) => {
                let a = self.atomize(e, out);
                out.push(Stmt::Var(x.clone(), Some(a)));
            }
            Stmt::Assign(x, e) => {
                let a = self.atomize(e, out);
                out.push(Stmt::Assign(x.clone(), a));
            }
            Stmt::Expr(e) => {
                self.atomize(e, out);
            }
            Stmt::Throw(e) => {
                let a = self.atomize(e, out);
                out.push(Stmt::Throw(a));
            }
            Stmt::If(c, t, f) => {
                let a = self.atomize(c, out);
                let t = self.norm_block(t);
                let f = self.norm_block(f);
                out.push(Stmt::If(a, t, f));
            }
            Stmt::While(c, body) if c.is_atom() => {
                let body = self.norm_block(body);
                out.push(Stmt::While(c.clone(), body));
            }
            Stmt::While(c, body) => {
                let (cw, xw) = self.norm_expr(c);
                let x = self.name();
                out.extend(cw.iter().cloned());
                out.push(Stmt::Var(x.clone(), Some(xw.clone())));
                let mut body = self.norm_block(body);
                body.stmts.extend(cw);
                body.stmts.push(Stmt::Assign(x.clone(), xw));
                out.push(Stmt::While(Expr::Var(x), body));
            }
            Stmt::Try(body, x, handler) if is_canonical_handler(x, handler) => {
                let body = self.norm_block(body);
                out.push(Stmt::Try(body, x.clone(), handler.clone()));
            }
            Stmt::Try(body, x, handler) => {
                let slot = self.name();
                out.push(Stmt::Var(slot.clone(), Some(Expr::Unit)));
                let body = self.norm_block(body);
                out.push(Stmt::Try(
                    body,
                    x.clone(),
                    block(vec![Stmt::Assign(slot.clone(), Expr::Var(x.clone()))]),
                ));
                let flag = self.name();
                out.push(Stmt::Var(
                    flag.clone(),
                    Some(Expr::Bin(
                        BinOp::Ne,
                        Box::new(Expr::Var(slot.clone())),
                        Box::new(Expr::Unit),
                    )),
                ));
                let mut h = vec![Stmt::Var(x.clone(), Some(Expr::Var(slot)))];
                let nh = self.norm_block(handler);
                h.extend(nh.stmts);
                out.push(Stmt::If(Expr::Var(flag), block(h), Block::default()));
            }
        }
    }
}

fn block(stmts: Vec<Stmt>) -> Block {
    Block { stmts, result: None }
}

fn is_canonical_handler(x: &str, h: &Block) -> bool {
    h.result.is_none() && matches!(h.stmts.as_slice(), [Stmt::Assign(t, Expr::Var(y))] if y == x && t != x)
}

fn collect_names(b: &Block, out: &mut HashSet<String>) {
    fn expr(e: &Expr, out: &mut HashSet<String>) {
        match e {
            Expr::Var(x) => {
                out.insert(x.clone());
            }
            Expr::List(xs) | Expr::Call(_, xs) => xs.iter().for_each(|x| expr(x, out)),
            Expr::Bin(_, a, b) => {
                expr(a, out);
                expr(b, out);
            }
            Expr::Sel(a, _) | Expr::Yield(a) => expr(a, out),
            _ => {}
        }
    }
    for s in &b.stmts {
        match s {
            Stmt::Var(x, e) => {
                out.insert(x.clone());
                if let Some(e) = e {
                    expr(e, out);
                }
            }
            Stmt::Assign(x, e) => {
                out.insert(x.clone());
                expr(e, out);
            }
            Stmt::Expr(e) | Stmt::Throw(e) => expr(e, out),
            Stmt::While(c, body) => {
                expr(c, out);
                collect_names(body, out);
            }
            Stmt::If(c, t, f) => {
                expr(c, out);
                collect_names(t, out);
                collect_names(f, out);
            }
            Stmt::Try(body, x, h) => {
                out.insert(x.clone());
                collect_names(body, out);
                collect_names(h, out);
            }
        }
    }
    if let Some(r) = &b.result {
        expr(r, out);
    }
}

pub fn normalize_coroutine(c: &CoroutineDef) -> CoroutineDef {
    let mut taken: HashSet<String> = c.params.iter().map(|(p, _)| p.clone()).collect();
    collect_names(&c.body, &mut taken);
    let mut fresh = Fresh { next: 0, taken };
    CoroutineDef {
        body: fresh.norm_block(&c.body),
        ..c.clone()
    }
}

pub fn normalize(p: &MiniProgram) -> MiniProgram {
    MiniProgram {
        coroutines: p.coroutines.iter().map(normalize_coroutine).collect(),
    }
}

/// Checks the restricted form described in the module docs.
pub fn is_restricted(p: &MiniProgram) -> bool {
    fn block(b: &Block) -> bool {
        b.stmts.iter().all(stmt) && b.result.as_ref().is_none_or(Expr::is_atom)
    }
    fn nested(b: &Block) -> bool {
        b.result.is_none() && block(b)
    }
    fn stmt(s: &Stmt) -> bool {
        match s {
            Stmt::Var(_, None) => true,
            Stmt::Var(_, Some(e)) => e.is_simple(),
            Stmt::Assign(_, e) | Stmt::Throw(e) => e.is_atom(),
            Stmt::Expr(_) => false,
            Stmt::While(c, b) => c.is_atom() && nested(b),
            Stmt::If(c, t, f) => c.is_atom() && nested(t) && nested(f),
            Stmt::Try(b, x, h) => nested(b) && is_canonical_handler(x, h),
        }
    }
    p.coroutines.iter().all(|c| block(&c.body))
}
