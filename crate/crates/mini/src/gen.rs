//! Random MiniLang programs that always terminate and never hit a dynamic
//! type error.
//!
//! Coroutine `c0` is the entry point. A coroutine only calls coroutines with
//! a higher index, loops count up to a small bound or walk a list that the
//! body cannot reassign, and `.head`/`.tail` only appear under a non-nil
//! guard or on a list literal.

use crate::ast::{BinOp, Block, CoroutineDef, Expr, Field, MiniProgram, MiniType, Stmt, Value};
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub max_coroutines: usize,
    pub max_depth: usize,
    pub max_block: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_coroutines: 3,
            max_depth: 3,
            max_block: 4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedMini {
    pub program: MiniProgram,
    pub entry: String,
    pub args: Vec<Value>,
}

#[derive(Clone)]
struct Var {
    name: String,
    ty: MiniType,
    assignable: bool,
}

struct Sig {
    name: String,
    params: Vec<MiniType>,
}

struct Gen<'a, R> {
    rng: &'a mut R,
    cfg: &'a GenConfig,
    scopes: Vec<Vec<Var>>,
    callees: &'a [Sig],
    next_name: usize,
}

fn int_list() -> MiniType {
    MiniType::List(Box::new(MiniType::Int))
}

impl<R: Rng> Gen<'_, R> {
    fn fresh(&mut self) -> String {
        // Occasionally reuse a visible name to exercise shadowing, or take a
        // name from the temporary namespace.
        let roll = self.rng.gen_range(0..10);
        if roll == 0 {
            // Counters and cursors are never shadowed: their update is
            // appended to the loop body and must see the loop's binding.
            let reusable: Vec<Var> = self.visible().into_iter().filter(|v| v.assignable).collect();
            if let Some(v) = reusable.choose(self.rng) {
                return v.name.clone();
            }
        }
        if roll == 1 {
            return format!("x_{}", self.rng.gen_range(0..4));
        }
        self.next_name += 1;
        format!("v{}", self.next_name)
    }

    fn visible(&self) -> Vec<Var> {
        let mut out: Vec<Var> = Vec::new();
        for scope in self.scopes.iter().rev() {
            for v in scope.iter().rev() {
                if !out.iter().any(|o| o.name == v.name) {
                    out.push(v.clone());
                }
            }
        }
        out
    }

    fn vars_of(&self, ty: &MiniType) -> Vec<Var> {
        self.visible().into_iter().filter(|v| &v.ty == ty).collect()
    }

    fn declare(&mut self, name: String, ty: MiniType, assignable: bool) {
        self.scopes
            .last_mut()
            .expect("scope")
            .push(Var { name, ty, assignable });
    }

    fn int_lit(&mut self) -> Expr {
        Expr::Int(self.rng.gen_range(-3..10))
    }

    fn expr(&mut self, ty: &MiniType, depth: usize) -> Expr {
        let leaf = depth == 0 || self.rng.gen_bool(0.4);
        let vars = self.vars_of(ty);
        if leaf {
            if !vars.is_empty() && self.rng.gen_bool(0.6) {
                return Expr::Var(vars.choose(self.rng).expect("non-empty").name.clone());
            }
            return match ty {
                MiniType::Int => self.int_lit(),
                MiniType::Bool => Expr::Bool(self.rng.gen()),
                MiniType::Unit => Expr::Unit,
                MiniType::List(_) => Expr::Nil,
            };
        }
        let d = depth - 1;
        match ty {
            MiniType::Int => match self.rng.gen_range(0..6) {
                0 | 1 => {
                    let op = if self.rng.gen() { BinOp::Add } else { BinOp::Sub };
                    Expr::Bin(op, Box::new(self.expr(ty, d)), Box::new(self.expr(ty, d)))
                }
                2 => {
                    let items = (0..self.rng.gen_range(1..3)).map(|_| self.expr(ty, d)).collect();
                    Expr::Sel(Box::new(Expr::List(items)), Field::Head)
                }
                3 if !self.callees.is_empty() => self.call(d),
                _ => self.expr(ty, 0),
            },
            MiniType::Bool => match self.rng.gen_range(0..6) {
                0 => Expr::Bin(
                    BinOp::Lt,
                    Box::new(self.expr(&MiniType::Int, d)),
                    Box::new(self.expr(&MiniType::Int, d)),
                ),
                1 => {
                    let op = if self.rng.gen() { BinOp::Eq } else { BinOp::Ne };
                    let t = [MiniType::Int, MiniType::Bool, int_list()]
                        .choose(self.rng)
                        .expect("types")
                        .clone();
                    Expr::Bin(op, Box::new(self.expr(&t, d)), Box::new(self.expr(&t, d)))
                }
                2 | 3 => {
                    let op = if self.rng.gen() { BinOp::And } else { BinOp::Or };
                    Expr::Bin(op, Box::new(self.expr(ty, d)), Box::new(self.expr(ty, d)))
                }
                4 => Expr::Sel(Box::new(self.expr(&int_list(), d)), Field::IsNil),
                _ => self.expr(ty, 0),
            },
            MiniType::List(_) => match self.rng.gen_range(0..3) {
                0 => {
                    let items = (0..self.rng.gen_range(0..4))
                        .map(|_| self.expr(&MiniType::Int, d))
                        .collect();
                    Expr::List(items)
                }
                1 => {
                    let items = (0..self.rng.gen_range(1..4))
                        .map(|_| self.expr(&MiniType::Int, d))
                        .collect();
                    Expr::Sel(Box::new(Expr::List(items)), Field::Tail)
                }
                _ => self.expr(ty, 0),
            },
            MiniType::Unit => Expr::Unit,
        }
    }

    fn call(&mut self, depth: usize) -> Expr {
        let sig = self.callees.choose(self.rng).expect("callee");
        let name = sig.name.clone();
        let params = sig.params.clone();
        Expr::Call(name, params.iter().map(|t| self.expr(t, depth.min(1))).collect())
    }

    fn any_type(&mut self) -> MiniType {
        [MiniType::Int, MiniType::Int, MiniType::Bool, int_list()]
            .choose(self.rng)
            .expect("types")
            .clone()
    }

    fn block(&mut self, depth: usize) -> Block {
        self.scopes.push(Vec::new());
        let n = self.rng.gen_range(1..=self.cfg.max_block);
        let mut stmts = Vec::new();
        for _ in 0..n {
            self.stmt(depth, &mut stmts);
        }
        self.scopes.pop();
        Block { stmts, result: None }
    }

    fn stmt(&mut self, depth: usize, out: &mut Vec<Stmt>) {
        let structured = depth > 0;
        let pick = self.rng.gen_range(0..if structured { 13 } else { 6 });
        match pick {
            0 | 1 => {
                let ty = self.any_type();
                let e = self.expr(&ty, 2);
                let x = self.fresh();
                out.push(Stmt::Var(x.clone(), Some(e)));
                self.declare(x, ty, true);
            }
            2 => {
                let targets: Vec<Var> = self.visible().into_iter().filter(|v| v.assignable).collect();
                match targets.choose(self.rng) {
                    Some(v) => {
                        let v = v.clone();
                        out.push(Stmt::Assign(v.name, self.expr(&v.ty, 2)));
                    }
                    None => out.push(Stmt::Expr(Expr::Yield(Box::new(self.int_lit())))),
                }
            }
            3 | 4 => out.push(Stmt::Expr(Expr::Yield(Box::new(self.expr(&MiniType::Int, 2))))),
            5 if !self.callees.is_empty() => out.push(Stmt::Expr(self.call(1))),
            5 => out.push(Stmt::Expr(Expr::Yield(Box::new(self.expr(&MiniType::Int, 1))))),
            6 => {
                let c = self.expr(&MiniType::Bool, 2);
                let t = self.block(depth - 1);
                let f = if self.rng.gen() {
                    self.block(depth - 1)
                } else {
                    Block::default()
                };
                out.push(Stmt::If(c, t, f));
            }
            7 | 8 => {
                // Counted loop; the counter is read-only inside the body.
                let counter = format!("i{}", self.next_name + 1);
                self.next_name += 1;
                out.push(Stmt::Var(counter.clone(), Some(Expr::Int(0))));
                self.declare(counter.clone(), MiniType::Int, false);
                let bound = Expr::Int(self.rng.gen_range(0..4));
                let mut body = self.block(depth - 1);
                body.stmts.push(Stmt::Assign(
                    counter.clone(),
                    Expr::Bin(BinOp::Add, Box::new(Expr::Var(counter.clone())), Box::new(Expr::Int(1))),
                ));
                out.push(Stmt::While(
                    Expr::Bin(BinOp::Lt, Box::new(Expr::Var(counter)), Box::new(bound)),
                    body,
                ));
            }
            9 => {
                // Walk a list held in a variable the body cannot reassign.
                let cursor = format!("l{}", self.next_name + 1);
                self.next_name += 1;
                let init = self.expr(&int_list(), 2);
                out.push(Stmt::Var(cursor.clone(), Some(init)));
                self.declare(cursor.clone(), int_list(), false);
                let cond = Expr::Bin(BinOp::Ne, Box::new(Expr::Var(cursor.clone())), Box::new(Expr::Nil));
                self.scopes.push(Vec::new());
                let h = self.fresh();
                let mut stmts = vec![Stmt::Var(
                    h.clone(),
                    Some(Expr::Sel(Box::new(Expr::Var(cursor.clone())), Field::Head)),
                )];
                self.declare(h, MiniType::Int, true);
                let inner = self.block(depth - 1);
                stmts.extend(inner.stmts);
                stmts.push(Stmt::Assign(
                    cursor.clone(),
                    Expr::Sel(Box::new(Expr::Var(cursor)), Field::Tail),
                ));
                self.scopes.pop();
                out.push(Stmt::While(cond, Block { stmts, result: None }));
            }
            10 | 11 => {
                let body = self.block(depth - 1);
                self.scopes.push(Vec::new());
                let e = self.fresh();
                self.declare(e.clone(), MiniType::Int, true);
                let handler = self.block(depth - 1);
                self.scopes.pop();
                out.push(Stmt::Try(body, e, handler));
            }
            _ => {
                let payload = self.expr(&MiniType::Int, 1);
                let guard = self.expr(&MiniType::Bool, 1);
                out.push(Stmt::If(
                    guard,
                    Block {
                        stmts: vec![Stmt::Throw(payload)],
                        result: None,
                    },
                    Block::default(),
                ));
            }
        }
    }
}

fn random_value<R: Rng>(rng: &mut R, ty: &MiniType) -> Value {
    match ty {
        MiniType::Int => Value::Int(rng.gen_range(-3..10)),
        MiniType::Bool => Value::Bool(rng.gen()),
        MiniType::Unit => Value::Unit,
        MiniType::List(_) => {
            let items: Vec<i64> = (0..rng.gen_range(0..4)).map(|_| rng.gen_range(-3..10)).collect();
            Value::int_list(&items)
        }
    }
}

/// Generates a program whose entry point is `c0`, with arguments for it.
pub fn gen_mini_program<R: Rng>(rng: &mut R, cfg: &GenConfig) -> GeneratedMini {
    let n = rng.gen_range(1..=cfg.max_coroutines.max(1));
    let sigs: Vec<Sig> = (0..n)
        .map(|i| Sig {
            name: format!("c{i}"),
            params: (0..rng.gen_range(0..3))
                .map(|_| if rng.gen() { MiniType::Int } else { int_list() })
                .collect(),
        })
        .collect();
    let mut coroutines = Vec::new();
    for (i, sig) in sigs.iter().enumerate() {
        let mut g = Gen {
            rng: &mut *rng,
            cfg,
            scopes: vec![Vec::new()],
            callees: &sigs[i + 1..],
            next_name: 0,
        };
        let params: Vec<(String, MiniType)> = sig
            .params
            .iter()
            .enumerate()
            .map(|(k, t)| (format!("p{k}"), t.clone()))
            .collect();
        for (p, t) in &params {
            g.declare(p.clone(), t.clone(), true);
        }
        let mut stmts = Vec::new();
        for _ in 0..g.rng.gen_range(1..=cfg.max_block + 1) {
            g.stmt(cfg.max_depth, &mut stmts);
        }
        let result = g.expr(&MiniType::Int, 2);
        coroutines.push(CoroutineDef {
            name: sig.name.clone(),
            params,
            ret: MiniType::Int,
            yields: MiniType::Int,
            body: Block {
                stmts,
                result: Some(result),
            },
        });
    }
    let args = sigs[0].params.iter().map(|t| random_value(rng, t)).collect();
    GeneratedMini {
        program: MiniProgram { coroutines },
        entry: "c0".into(),
        args,
    }
}
