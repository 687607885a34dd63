//! MiniLang syntax trees and runtime values.

use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MiniType {
    Int,
    Bool,
    Unit,
    List(Box<MiniType>),
}

impl fmt::Display for MiniType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MiniType::Int => f.write_str("Int"),
            MiniType::Bool => f.write_str("Bool"),
            MiniType::Unit => f.write_str("Unit"),
            MiniType::List(t) => write!(f, "List[{t}]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Eq,
    Ne,
    Lt,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Head,
    Tail,
    IsNil,
}

impl Field {
    pub fn name(self) -> &'static str {
        match self {
            Field::Head => "head",
            Field::Tail => "tail",
            Field::IsNil => "isNil",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Unit,
    Nil,
    List(Vec<Expr>),
    Var(String),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Sel(Box<Expr>, Field),
    Call(String, Vec<Expr>),
    Yield(Box<Expr>),
}

impl Expr {
    /// Constants and identifiers.
    pub fn is_atom(&self) -> bool {
        matches!(
            self,
            Expr::Int(_) | Expr::Bool(_) | Expr::Unit | Expr::Nil | Expr::Var(_)
        )
    }

    /// A single operation whose operands are all atoms. Short-circuit
    /// operators never count, since canonical form spells them as branches.
    pub fn is_simple(&self) -> bool {
        match self {
            e if e.is_atom() => true,
            Expr::List(xs) | Expr::Call(_, xs) => xs.iter().all(Expr::is_atom),
            Expr::Bin(BinOp::And | BinOp::Or, ..) => false,
            Expr::Bin(_, a, b) => a.is_atom() && b.is_atom(),
            Expr::Sel(a, _) | Expr::Yield(a) => a.is_atom(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    /// `var x = e;` or `var x;`
    Var(String, Option<Expr>),
    Assign(String, Expr),
    While(Expr, Block),
    If(Expr, Block, Block),
    Throw(Expr),
    /// `try { body } catch x { handler }`
    Try(Block, String, Block),
    Expr(Expr),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Block {
    pub stmts: Vec<Stmt>,
    /// Trailing expression; only meaningful for coroutine bodies.
    pub result: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoroutineDef {
    pub name: String,
    pub params: Vec<(String, MiniType)>,
    pub ret: MiniType,
    pub yields: MiniType,
    pub body: Block,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MiniProgram {
    pub coroutines: Vec<CoroutineDef>,
}

impl MiniProgram {
    pub fn get(&self, name: &str) -> Option<&CoroutineDef> {
        self.coroutines.iter().find(|c| c.name == name)
    }
}

/// Runtime values. Lists are immutable cons cells shared between copies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Unit,
    Nil,
    Cons(Arc<(Value, Value)>),
}

impl Value {
    pub fn list(items: impl IntoIterator<Item = Value, IntoIter: DoubleEndedIterator>) -> Value {
        items
            .into_iter()
            .rev()
            .fold(Value::Nil, |tail, head| Value::Cons(Arc::new((head, tail))))
    }

    pub fn int_list(items: &[i64]) -> Value {
        Value::list(items.iter().map(|&n| Value::Int(n)))
    }
}

impl Drop for Value {
    // Long lists would otherwise be dropped recursively.
    fn drop(&mut self) {
        let mut next = match self {
            Value::Cons(c) => std::mem::replace(c, Arc::new((Value::Unit, Value::Unit))),
            _ => return,
        };
        loop {
            match Arc::try_unwrap(next) {
                Ok((_, mut tail)) => match &mut tail {
                    Value::Cons(c) => next = std::mem::replace(c, Arc::new((Value::Unit, Value::Unit))),
                    _ => return,
                },
                Err(_) => return,
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Unit => f.write_str("()"),
            Value::Nil => f.write_str("nil"),
            Value::Cons(_) => {
                f.write_str("[")?;
                let mut cur = self;
                let mut first = true;
                while let Value::Cons(c) = cur {
                    if !first {
                        f.write_str(", ")?;
                    }
                    first = false;
                    write!(f, "{}", c.0)?;
                    cur = &c.1;
                }
                f.write_str("]")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(n) => write!(f, "{n}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Unit => f.write_str("()"),
            Expr::Nil => f.write_str("nil"),
            Expr::Var(x) => f.write_str(x),
            Expr::List(xs) => {
                f.write_str("[")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str("]")
            }
            Expr::Bin(op, a, b) => {
                let wrap = |e: &Expr| {
                    if matches!(e, Expr::Bin(..)) {
                        format!("({e})")
                    } else {
                        e.to_string()
                    }
                };
                write!(f, "{} {} {}", wrap(a), op.symbol(), wrap(b))
            }
            Expr::Sel(a, field) => {
                if matches!(**a, Expr::Bin(..)) {
                    write!(f, "({a}).{}", field.name())
                } else {
                    write!(f, "{a}.{}", field.name())
                }
            }
            Expr::Call(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Expr::Yield(a) => write!(f, "yieldval({a})"),
        }
    }
}

fn indent(f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
    write!(f, "{:width$}", "", width = depth * 2)
}

pub(crate) fn fmt_block(f: &mut fmt::Formatter<'_>, b: &Block, depth: usize) -> fmt::Result {
    for s in &b.stmts {
        fmt_stmt(f, s, depth)?;
    }
    if let Some(r) = &b.result {
        indent(f, depth)?;
        writeln!(f, "{r}")?;
    }
    Ok(())
}

fn fmt_stmt(f: &mut fmt::Formatter<'_>, s: &Stmt, depth: usize) -> fmt::Result {
    indent(f, depth)?;
    match s {
        Stmt::Var(x, Some(e)) => writeln!(f, "var {x} = {e};"),
        Stmt::Var(x, None) => writeln!(f, "var {x};"),
        Stmt::Assign(x, e) => writeln!(f, "{x} = {e};"),
        Stmt::Expr(e) => writeln!(f, "{e};"),
        Stmt::Throw(e) => writeln!(f, "throw({e});"),
        Stmt::While(c, b) => {
            writeln!(f, "while ({c}) {{")?;
            fmt_block(f, b, depth + 1)?;
            indent(f, depth)?;
            writeln!(f, "}}")
        }
        Stmt::If(c, t, e) => {
            writeln!(f, "if ({c}) {{")?;
            fmt_block(f, t, depth + 1)?;
            indent(f, depth)?;
            if e.stmts.is_empty() && e.result.is_none() {
                writeln!(f, "}}")
            } else {
                writeln!(f, "}} else {{")?;
                fmt_block(f, e, depth + 1)?;
                indent(f, depth)?;
                writeln!(f, "}}")
            }
        }
        Stmt::Try(b, x, h) => {
            writeln!(f, "try {{")?;
            fmt_block(f, b, depth + 1)?;
            indent(f, depth)?;
            writeln!(f, "}} catch {x} {{")?;
            fmt_block(f, h, depth + 1)?;
            indent(f, depth)?;
            writeln!(f, "}}")
        }
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_block(f, self, 0)
    }
}

impl fmt::Display for CoroutineDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "coroutine {}(", self.name)?;
        for (i, (p, t)) in self.params.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}: {t}")?;
        }
        writeln!(f, "): {} yields {} {{", self.ret, self.yields)?;
        fmt_block(f, &self.body, 1)?;
        writeln!(f, "}}")
    }
}

impl fmt::Display for MiniProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.coroutines.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}
