//! Name resolution of restricted-form coroutines.
//!
//! Every declaration (parameter, `var`, catch binder) gets its own slot, so a
//! redeclared temporary in an inner scope is a different variable from the
//! outer one. Statements are numbered in pre-order.

use crate::ast::{BinOp, Block, CoroutineDef, Expr, Field, MiniProgram, Stmt, Value};
use crate::error::MiniError;
use std::collections::{BTreeSet, HashMap};

pub type VarId = usize;
pub type SId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Atom {
    Const(Value),
    Var(VarId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rhs {
    Atom(Atom),
    Bin(BinOp, Atom, Atom),
    Sel(Field, Atom),
    List(Vec<Atom>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SKind {
    Decl(VarId, Option<Rhs>),
    Assign(VarId, Atom),
    Yield {
        var: VarId,
        value: Atom,
    },
    Call {
        var: VarId,
        callee: usize,
        args: Vec<Atom>,
    },
    Throw(Atom),
    While(Atom, Vec<SId>),
    If(Atom, Vec<SId>, Vec<SId>),
    Try {
        body: Vec<SId>,
        catch: VarId,
        handler: Vec<SId>,
    },
}

/// Which block of its parent a statement sits in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Owner {
    Top,
    Body(SId),
    Then(SId),
    Else(SId),
    TryBody(SId),
    Handler(SId),
}

#[derive(Debug, Clone)]
pub struct RStmt {
    pub kind: SKind,
    pub owner: Owner,
    pub index: usize,
    /// Variables in scope just after this statement's own declaration.
    pub scope: BTreeSet<VarId>,
    pub text: String,
}

#[derive(Debug, Clone)]
pub struct Resolved {
    pub name: String,
    pub arity: usize,
    pub var_names: Vec<String>,
    pub stmts: Vec<RStmt>,
    pub body: Vec<SId>,
    pub result: Atom,
    pub end_scope: BTreeSet<VarId>,
}

impl Resolved {
    pub fn block(&self, owner: Owner) -> &[SId] {
        match owner {
            Owner::Top => &self.body,
            Owner::Body(s) => match &self.stmts[s].kind {
                SKind::While(_, b) => b,
                _ => unreachable!(),
            },
            Owner::Then(s) | Owner::Else(s) => match &self.stmts[s].kind {
                SKind::If(_, t, e) => {
                    if matches!(owner, Owner::Then(_)) {
                        t
                    } else {
                        e
                    }
                }
                _ => unreachable!(),
            },
            Owner::TryBody(s) | Owner::Handler(s) => match &self.stmts[s].kind {
                SKind::Try { body, handler, .. } => {
                    if matches!(owner, Owner::TryBody(_)) {
                        body
                    } else {
                        handler
                    }
                }
                _ => unreachable!(),
            },
        }
    }

    /// Number of try bodies enclosing a block.
    pub fn try_depth(&self, mut owner: Owner) -> usize {
        let mut depth = 0;
        loop {
            let parent = match owner {
                Owner::Top => return depth,
                Owner::TryBody(s) => {
                    depth += 1;
                    s
                }
                Owner::Body(s) | Owner::Then(s) | Owner::Else(s) | Owner::Handler(s) => s,
            };
            owner = self.stmts[parent].owner;
        }
    }

    /// Display name of a variable, disambiguated when shadowed.
    pub fn var_label(&self, v: VarId) -> String {
        let name = &self.var_names[v];
        if self.var_names.iter().filter(|n| *n == name).count() > 1 {
            format!("{name}#{v}")
        } else {
            name.clone()
        }
    }

    pub fn atom_vars(a: &Atom) -> Option<VarId> {
        match a {
            Atom::Var(v) => Some(*v),
            Atom::Const(_) => None,
        }
    }

    /// Variables read by a statement's own evaluation (not its sub-blocks).
    pub fn reads(&self, s: SId) -> Vec<VarId> {
        let atoms: Vec<&Atom> = match &self.stmts[s].kind {
            SKind::Decl(_, None) => vec![],
            SKind::Decl(_, Some(r)) => match r {
                Rhs::Atom(a) | Rhs::Sel(_, a) => vec![a],
                Rhs::Bin(_, a, b) => vec![a, b],
                Rhs::List(xs) => xs.iter().collect(),
            },
            SKind::Assign(_, a) | SKind::Throw(a) | SKind::While(a, _) | SKind::If(a, _, _) => vec![a],
            SKind::Yield { value, .. } => vec![value],
            SKind::Call { args, .. } => args.iter().collect(),
            SKind::Try { .. } => vec![],
        };
        atoms.into_iter().filter_map(Self::atom_vars).collect()
    }
}

struct Resolver<'a> {
    names: &'a HashMap<String, (usize, usize)>,
    vars: Vec<String>,
    stmts: Vec<RStmt>,
    scopes: Vec<Vec<(String, VarId)>>,
}

impl Resolver<'_> {
    fn declare(&mut self, x: &str) -> VarId {
        let id = self.vars.len();
        self.vars.push(x.to_string());
        self.scopes.last_mut().expect("scope").push((x.to_string(), id));
        id
    }

    fn lookup(&self, x: &str) -> Result<VarId, MiniError> {
        self.scopes
            .iter()
            .rev()
            .flat_map(|s| s.iter().rev())
            .find(|(n, _)| n == x)
            .map(|(_, v)| *v)
            .ok_or_else(|| MiniError::Unbound(x.to_string()))
    }

    fn in_scope(&self) -> BTreeSet<VarId> {
        self.scopes.iter().flatten().map(|(_, v)| *v).collect()
    }

    fn atom(&self, e: &Expr) -> Result<Atom, MiniError> {
        Ok(match e {
            Expr::Int(n) => Atom::Const(Value::Int(*n)),
            Expr::Bool(b) => Atom::Const(Value::Bool(*b)),
            Expr::Unit => Atom::Const(Value::Unit),
            Expr::Nil => Atom::Const(Value::Nil),
            Expr::Var(x) => Atom::Var(self.lookup(x)?),
            other => return Err(MiniError::NotRestricted(format!("expected an atom, found {other}"))),
        })
    }

    fn block(&mut self, b: &Block, owner: Owner) -> Result<Vec<SId>, MiniError> {
        b.stmts
            .iter()
            .enumerate()
            .map(|(i, s)| self.stmt(s, owner, i))
            .collect()
    }

    fn scoped(&mut self, b: &Block, owner: Owner) -> Result<Vec<SId>, MiniError> {
        self.scopes.push(Vec::new());
        let r = self.block(b, owner);
        self.scopes.pop();
        r
    }

    fn stmt(&mut self, s: &Stmt, owner: Owner, index: usize) -> Result<SId, MiniError> {
        let id = self.stmts.len();
        let text = match s {
            Stmt::While(c, _) => format!("while ({c})"),
            Stmt::If(c, _, _) => format!("if ({c})"),
            Stmt::Try(_, x, _) => format!("try/catch {x}"),
            other => Block {
                stmts: vec![other.clone()],
                result: None,
            }
            .to_string()
            .trim()
            .to_string(),
        };
        self.stmts.push(RStmt {
            kind: SKind::Decl(0, None),
            owner,
            index,
            scope: BTreeSet::new(),
            text,
        });
        let kind = match s {
            Stmt::Var(x, None) => SKind::Decl(self.declare(x), None),
            Stmt::Var(x, Some(Expr::Yield(a))) => {
                let value = self.atom(a)?;
                SKind::Yield {
                    var: self.declare(x),
                    value,
                }
            }
            Stmt::Var(x, Some(Expr::Call(name, args))) => {
                let &(callee, arity) = self
                    .names
                    .get(name)
                    .ok_or_else(|| MiniError::UnknownCoroutine(name.clone()))?;
                if arity != args.len() {
                    return Err(MiniError::Arity {
                        name: name.clone(),
                        expected: arity,
                        found: args.len(),
                    });
                }
                let args = args.iter().map(|a| self.atom(a)).collect::<Result<_, _>>()?;
                SKind::Call {
                    var: self.declare(x),
                    callee,
                    args,
                }
            }
            Stmt::Var(x, Some(e)) => {
                let rhs = self.rhs(e)?;
                SKind::Decl(self.declare(x), Some(rhs))
            }
            Stmt::Assign(x, e) => SKind::Assign(self.lookup(x)?, self.atom(e)?),
            Stmt::Throw(e) => SKind::Throw(self.atom(e)?),
            Stmt::While(c, b) => {
                let c = self.atom(c)?;
                SKind::While(c, self.scoped(b, Owner::Body(id))?)
            }
            Stmt::If(c, t, f) => {
                let c = self.atom(c)?;
                let t = self.scoped(t, Owner::Then(id))?;
                SKind::If(c, t, self.scoped(f, Owner::Else(id))?)
            }
            Stmt::Try(b, x, h) => {
                let body = self.scoped(b, Owner::TryBody(id))?;
                self.scopes.push(Vec::new());
                let catch = self.declare(x);
                let handler = self.block(h, Owner::Handler(id));
                self.scopes.pop();
                SKind::Try {
                    body,
                    catch,
                    handler: handler?,
                }
            }
            Stmt::Expr(e) => return Err(MiniError::NotRestricted(format!("expression statement {e}"))),
        };
        self.stmts[id].kind = kind;
        self.stmts[id].scope = self.in_scope();
        Ok(id)
    }

    fn rhs(&self, e: &Expr) -> Result<Rhs, MiniError> {
        Ok(match e {
            Expr::Bin(op, a, b) => Rhs::Bin(*op, self.atom(a)?, self.atom(b)?),
            Expr::Sel(a, f) => Rhs::Sel(*f, self.atom(a)?),
            Expr::List(xs) => Rhs::List(xs.iter().map(|a| self.atom(a)).collect::<Result<_, _>>()?),
            other => Rhs::Atom(self.atom(other)?),
        })
    }
}

/// Resolves one restricted-form coroutine of `prog`.
pub fn resolve(prog: &MiniProgram, c: &CoroutineDef) -> Result<Resolved, MiniError> {
    let names: HashMap<String, (usize, usize)> = prog
        .coroutines
        .iter()
        .enumerate()
        .map(|(i, c)| (c.name.clone(), (i, c.params.len())))
        .collect();
    let mut r = Resolver {
        names: &names,
        vars: Vec::new(),
        stmts: Vec::new(),
        scopes: vec![Vec::new()],
    };
    for (p, _) in &c.params {
        r.declare(p);
    }
    let body = r.block(&c.body, Owner::Top)?;
    let result = match &c.body.result {
        Some(e) => r.atom(e)?,
        None => Atom::Const(Value::Unit),
    };
    let end_scope = r.in_scope();
    Ok(Resolved {
        name: c.name.clone(),
        arity: c.params.len(),
        var_names: r.vars,
        stmts: r.stmts,
        body,
        result,
        end_scope,
    })
}
