//! Tree-walking reference interpreter over the surface AST.
//!
//! Coroutine calls run on the host stack and every `yieldval` is appended to
//! a trace, so one run produces the whole observable behaviour of an instance.
//! The compiled runtime is tested against this.

use crate::ast::{BinOp, Block, Expr, MiniProgram, Stmt, Value};
use crate::error::MiniError;
use crate::ops;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Completion {
    Result(Value),
    Exception(Value),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub yields: Vec<Value>,
    pub end: Completion,
}

enum Flow {
    Throw(Value),
    Fail(MiniError),
}

impl From<MiniError> for Flow {
    fn from(e: MiniError) -> Self {
        Flow::Fail(e)
    }
}

struct Interp<'p> {
    prog: &'p MiniProgram,
    yields: Vec<Value>,
    fuel: u64,
}

type Scopes = Vec<Vec<(String, Value)>>;

fn lookup<'a>(env: &'a Scopes, x: &str) -> Result<&'a Value, MiniError> {
    env.iter()
        .rev()
        .flat_map(|s| s.iter().rev())
        .find(|(n, _)| n == x)
        .map(|(_, v)| v)
        .ok_or_else(|| MiniError::Unbound(x.to_string()))
}

fn assign(env: &mut Scopes, x: &str, v: Value) -> Result<(), MiniError> {
    let slot = env
        .iter_mut()
        .rev()
        .flat_map(|s| s.iter_mut().rev())
        .find(|(n, _)| n == x)
        .ok_or_else(|| MiniError::Unbound(x.to_string()))?;
    slot.1 = v;
    Ok(())
}

impl Interp<'_> {
    fn tick(&mut self) -> Result<(), MiniError> {
        if self.fuel == 0 {
            return Err(MiniError::OutOfFuel);
        }
        self.fuel -= 1;
        Ok(())
    }

    fn call(&mut self, name: &str, args: Vec<Value>) -> Result<Value, Flow> {
        let c = self
            .prog
            .get(name)
            .ok_or_else(|| MiniError::UnknownCoroutine(name.to_string()))?;
        if c.params.len() != args.len() {
            return Err(MiniError::Arity {
                name: name.to_string(),
                expected: c.params.len(),
                found: args.len(),
            }
            .into());
        }
        let frame = c.params.iter().map(|(p, _)| p.clone()).zip(args).collect();
        let mut env = vec![frame];
        self.block(&mut env, &c.body)?;
        let result = match &c.body.result {
            Some(r) => self.expr(&mut env, r)?,
            None => Value::Unit,
        };
        Ok(result)
    }

    fn block(&mut self, env: &mut Scopes, b: &Block) -> Result<(), Flow> {
        for s in &b.stmts {
            self.stmt(env, s)?;
        }
        Ok(())
    }

    fn scoped(&mut self, env: &mut Scopes, b: &Block) -> Result<(), Flow> {
        env.push(Vec::new());
        let r = self.block(env, b);
        env.pop();
        r
    }

    fn stmt(&mut self, env: &mut Scopes, s: &Stmt) -> Result<(), Flow> {
        self.tick()?;
        match s {
            Stmt::Var(x, init) => {
                let v = match init {
                    Some(e) => self.expr(env, e)?,
                    None => Value::Unit,
                };
                env.last_mut().expect("scope").push((x.clone(), v));
            }
            Stmt::Assign(x, e) => {
                let v = self.expr(env, e)?;
                assign(env, x, v)?;
            }
            Stmt::Expr(e) => {
                self.expr(env, e)?;
            }
            Stmt::Throw(e) => {
                let v = self.expr(env, e)?;
                return Err(Flow::Throw(ops::exception_payload(v)?));
            }
            Stmt::If(c, t, f) => {
                let c = self.expr(env, c)?;
                let branch = if ops::truthy(&c)? { t } else { f };
                self.scoped(env, branch)?;
            }
            Stmt::While(c, body) => loop {
                let v = self.expr(env, c)?;
                if !ops::truthy(&v)? {
                    break;
                }
                self.scoped(env, body)?;
                self.tick()?;
            },
            Stmt::Try(body, x, handler) => match self.scoped(env, body) {
                Err(Flow::Throw(v)) => {
                    env.push(vec![(x.clone(), v)]);
                    let r = self.block(env, handler);
                    env.pop();
                    r?;
                }
                other => other?,
            },
        }
        Ok(())
    }

    fn expr(&mut self, env: &mut Scopes, e: &Expr) -> Result<Value, Flow> {
        Ok(match e {
            Expr::Int(n) => Value::Int(*n),
            Expr::Bool(b) => Value::Bool(*b),
            Expr::Unit => Value::Unit,
            Expr::Nil => Value::Nil,
            Expr::Var(x) => lookup(env, x)?.clone(),
            Expr::List(items) => {
                let vs = items.iter().map(|i| self.expr(env, i)).collect::<Result<Vec<_>, _>>()?;
                Value::list(vs)
            }
            Expr::Bin(BinOp::And, a, b) => {
                let a = self.expr(env, a)?;
                if ops::truthy(&a)? {
                    Value::Bool(ops::truthy(&self.expr(env, b)?)?)
                } else {
                    Value::Bool(false)
                }
            }
            Expr::Bin(BinOp::Or, a, b) => {
                let a = self.expr(env, a)?;
                if ops::truthy(&a)? {
                    Value::Bool(true)
                } else {
                    Value::Bool(ops::truthy(&self.expr(env, b)?)?)
                }
            }
            Expr::Bin(op, a, b) => {
                let a = self.expr(env, a)?;
                let b = self.expr(env, b)?;
                ops::binary(*op, &a, &b)?
            }
            Expr::Sel(a, field) => ops::select(*field, &self.expr(env, a)?)?,
            Expr::Yield(a) => {
                let v = self.expr(env, a)?;
                self.yields.push(v);
                Value::Unit
            }
            Expr::Call(name, args) => {
                let vs = args.iter().map(|a| self.expr(env, a)).collect::<Result<Vec<_>, _>>()?;
                self.tick()?;
                self.call(name, vs)?
            }
        })
    }
}

/// Runs coroutine `name` to completion, collecting every yielded value.
/// `fuel` bounds the number of statements and loop iterations executed.
pub fn direct_run(prog: &MiniProgram, name: &str, args: Vec<Value>, fuel: u64) -> Result<RunOutcome, MiniError> {
    let mut it = Interp {
        prog,
        yields: Vec::new(),
        fuel,
    };
    let end = match it.call(name, args) {
        Ok(v) => Completion::Result(v),
        Err(Flow::Throw(v)) => Completion::Exception(v),
        Err(Flow::Fail(e)) => return Err(e),
    };
    Ok(RunOutcome { yields: it.yields, end })
}
