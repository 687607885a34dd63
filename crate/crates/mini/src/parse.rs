//! Lexer and recursive-descent parser for MiniLang.

use crate::ast::{BinOp, Block, CoroutineDef, Expr, Field, MiniProgram, MiniType, Stmt, Value};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {msg}")]
pub struct MiniSyntaxError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

const SYMBOLS: &[&str] = &[
    "==", "!=", "&&", "||", "(", ")", "{", "}", "[", "]", ",", ";", ":", ".", "=", "+", "-", "<",
];

fn lex(src: &str) -> Result<Vec<(Tok, usize, usize)>, MiniSyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let mut out = Vec::new();
    let err = |line, col, msg: String| MiniSyntaxError { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (l0, c0) = (line, col);
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let n = text
                .parse()
                .map_err(|_| err(l0, c0, format!("integer literal out of range: {text}")))?;
            col += i - start;
            out.push((Tok::Int(n), l0, c0));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push((Tok::Ident(chars[start..i].iter().collect()), l0, c0));
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                i += s.len();
                col += s.len();
                out.push((Tok::Sym(s), l0, c0));
            }
            None => return Err(err(l0, c0, format!("unexpected character '{c}'"))),
        }
    }
    out.push((Tok::Eof, line, col));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, MiniSyntaxError> {
        let (_, line, col) = self.toks[self.pos];
        Err(MiniSyntaxError {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == kw)
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), MiniSyntaxError> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected '{s}', found {:?}", self.peek()))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), MiniSyntaxError> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected '{kw}'"))
        }
    }

    fn ident(&mut self) -> Result<String, MiniSyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(s)
            }
            t => self.error(format!("expected identifier, found {t:?}")),
        }
    }

    fn program(&mut self) -> Result<MiniProgram, MiniSyntaxError> {
        let mut coroutines = Vec::new();
        while *self.peek() != Tok::Eof {
            coroutines.push(self.coroutine()?);
        }
        Ok(MiniProgram { coroutines })
    }

    fn coroutine(&mut self) -> Result<CoroutineDef, MiniSyntaxError> {
        self.expect_kw("coroutine")?;
        let name = self.ident()?;
        self.expect_sym("(")?;
        let mut params = Vec::new();
        while !self.is_sym(")") {
            if !params.is_empty() {
                self.expect_sym(",")?;
            }
            let p = self.ident()?;
            self.expect_sym(":")?;
            params.push((p, self.ty()?));
        }
        self.bump();
        self.expect_sym(":")?;
        let ret = self.ty()?;
        self.expect_kw("yields")?;
        let yields = self.ty()?;
        let body = self.block(true)?;
        Ok(CoroutineDef {
            name,
            params,
            ret,
            yields,
            body,
        })
    }

    fn ty(&mut self) -> Result<MiniType, MiniSyntaxError> {
        match self.bump() {
            Tok::Ident(s) if s == "Int" => Ok(MiniType::Int),
            Tok::Ident(s) if s == "Bool" => Ok(MiniType::Bool),
            Tok::Ident(s) if s == "Unit" => Ok(MiniType::Unit),
            Tok::Ident(s) if s == "List" => {
                self.expect_sym("[")?;
                let t = self.ty()?;
                self.expect_sym("]")?;
                Ok(MiniType::List(Box::new(t)))
            }
            t => {
                self.pos -= 1;
                self.error(format!("expected a type, found {t:?}"))
            }
        }
    }

    /// `{ stmt* expr? }`; a trailing expression is accepted only when `allow_result`.
    fn block(&mut self, allow_result: bool) -> Result<Block, MiniSyntaxError> {
        self.expect_sym("{")?;
        let mut stmts = Vec::new();
        let mut result = None;
        while !self.is_sym("}") {
            if self.is_kw("var") {
                self.bump();
                let x = self.ident()?;
                let init = if self.is_sym("=") {
                    self.bump();
                    Some(self.expr()?)
                } else {
                    None
                };
                self.expect_sym(";")?;
                stmts.push(Stmt::Var(x, init));
            } else if self.is_kw("while") {
                self.bump();
                let c = self.paren_expr()?;
                stmts.push(Stmt::While(c, self.block(false)?));
            } else if self.is_kw("if") {
                self.bump();
                let c = self.paren_expr()?;
                let t = self.block(false)?;
                let e = if self.is_kw("else") {
                    self.bump();
                    self.block(false)?
                } else {
                    Block::default()
                };
                stmts.push(Stmt::If(c, t, e));
            } else if self.is_kw("throw") {
                self.bump();
                let e = self.paren_expr()?;
                self.expect_sym(";")?;
                stmts.push(Stmt::Throw(e));
            } else if self.is_kw("try") {
                self.bump();
                let body = self.block(false)?;
                self.expect_kw("catch")?;
                let x = self.ident()?;
                let handler = self.block(false)?;
                stmts.push(Stmt::Try(body, x, handler));
            } else if matches!(self.peek(), Tok::Ident(s) if !is_keyword(s)) && matches!(self.peek_at(1), Tok::Sym("="))
            {
                let x = self.ident()?;
                self.bump();
                let e = self.expr()?;
                self.expect_sym(";")?;
                stmts.push(Stmt::Assign(x, e));
            } else {
                let e = self.expr()?;
                if self.is_sym(";") {
                    self.bump();
                    stmts.push(Stmt::Expr(e));
                } else if allow_result && self.is_sym("}") {
                    result = Some(e);
                } else {
                    return self.error("expected ';'");
                }
            }
        }
        self.bump();
        Ok(Block { stmts, result })
    }

    fn paren_expr(&mut self) -> Result<Expr, MiniSyntaxError> {
        self.expect_sym("(")?;
        let e = self.expr()?;
        self.expect_sym(")")?;
        Ok(e)
    }

    fn expr(&mut self) -> Result<Expr, MiniSyntaxError> {
        self.binary(0)
    }

    fn binary(&mut self, level: usize) -> Result<Expr, MiniSyntaxError> {
        const LEVELS: &[&[(&str, BinOp)]] = &[
            &[("||", BinOp::Or)],
            &[("&&", BinOp::And)],
            &[("==", BinOp::Eq), ("!=", BinOp::Ne), ("<", BinOp::Lt)],
            &[("+", BinOp::Add), ("-", BinOp::Sub)],
        ];
        if level == LEVELS.len() {
            return self.postfix();
        }
        let mut lhs = self.binary(level + 1)?;
        loop {
            let Some(&(_, op)) = LEVELS[level].iter().find(|(s, _)| self.is_sym(s)) else {
                return Ok(lhs);
            };
            self.bump();
            let rhs = self.binary(level + 1)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
            // Comparisons do not chain.
            if level == 2 {
                return Ok(lhs);
            }
        }
    }

    fn postfix(&mut self) -> Result<Expr, MiniSyntaxError> {
        let mut e = self.atom()?;
        while self.is_sym(".") {
            self.bump();
            let field = match self.bump() {
                Tok::Ident(s) if s == "head" => Field::Head,
                Tok::Ident(s) if s == "tail" => Field::Tail,
                Tok::Ident(s) if s == "isNil" => Field::IsNil,
                _ => {
                    self.pos -= 1;
                    return self.error("expected head, tail or isNil");
                }
            };
            e = Expr::Sel(Box::new(e), field);
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<Expr, MiniSyntaxError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Int(n))
            }
            Tok::Sym("-") if matches!(self.peek_at(1), Tok::Int(_)) => {
                self.bump();
                let Tok::Int(n) = self.bump() else { unreachable!() };
                Ok(Expr::Int(-n))
            }
            Tok::Sym("(") => {
                self.bump();
                if self.is_sym(")") {
                    self.bump();
                    return Ok(Expr::Unit);
                }
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Sym("[") => {
                self.bump();
                let mut items = Vec::new();
                while !self.is_sym("]") {
                    if !items.is_empty() {
                        self.expect_sym(",")?;
                    }
                    items.push(self.expr()?);
                }
                self.bump();
                Ok(Expr::List(items))
            }
            Tok::Ident(s) => match s.as_str() {
                "true" => {
                    self.bump();
                    Ok(Expr::Bool(true))
                }
                "false" => {
                    self.bump();
                    Ok(Expr::Bool(false))
                }
                "nil" => {
                    self.bump();
                    Ok(Expr::Nil)
                }
                "yieldval" => {
                    self.bump();
                    Ok(Expr::Yield(Box::new(self.paren_expr()?)))
                }
                _ if is_keyword(&s) => self.error(format!("unexpected keyword '{s}'")),
                _ => {
                    self.bump();
                    if self.is_sym("(") {
                        self.bump();
                        let mut args = Vec::new();
                        while !self.is_sym(")") {
                            if !args.is_empty() {
                                self.expect_sym(",")?;
                            }
                            args.push(self.expr()?);
                        }
                        self.bump();
                        Ok(Expr::Call(s, args))
                    } else {
                        Ok(Expr::Var(s))
                    }
                }
            },
            t => self.error(format!("unexpected token {t:?}")),
        }
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(
        s,
        "coroutine"
            | "yields"
            | "var"
            | "while"
            | "if"
            | "else"
            | "throw"
            | "try"
            | "catch"
            | "true"
            | "false"
            | "nil"
            | "yieldval"
    )
}

fn parser(src: &str) -> Result<Parser, MiniSyntaxError> {
    Ok(Parser {
        toks: lex(src)?,
        pos: 0,
    })
}

/// Parses a sequence of coroutine definitions.
pub fn parse_mini(src: &str) -> Result<MiniProgram, MiniSyntaxError> {
    let mut p = parser(src)?;
    let prog = p.program()?;
    let mut seen = std::collections::HashSet::new();
    for c in &prog.coroutines {
        if !seen.insert(&c.name) {
            return Err(MiniSyntaxError {
                line: 1,
                col: 1,
                msg: format!("duplicate coroutine '{}'", c.name),
            });
        }
    }
    Ok(prog)
}

/// Parses a single expression.
pub fn parse_expr(src: &str) -> Result<Expr, MiniSyntaxError> {
    let mut p = parser(src)?;
    let e = p.expr()?;
    match p.peek() {
        Tok::Eof => Ok(e),
        t => p.error(format!("trailing input {t:?}")),
    }
}

/// Parses a literal value such as `3`, `true`, `()`, `nil` or `[[1], [2, 3]]`.
pub fn parse_value(src: &str) -> Result<Value, MiniSyntaxError> {
    fn lit(e: &Expr) -> Option<Value> {
        Some(match e {
            Expr::Int(n) => Value::Int(*n),
            Expr::Bool(b) => Value::Bool(*b),
            Expr::Unit => Value::Unit,
            Expr::Nil => Value::Nil,
            Expr::List(xs) => Value::list(xs.iter().map(lit).collect::<Option<Vec<_>>>()?),
            _ => return None,
        })
    }
    let e = parse_expr(src)?;
    lit(&e).ok_or_else(|| MiniSyntaxError {
        line: 1,
        col: 1,
        msg: format!("not a literal value: {e}"),
    })
}

/// Splits a comma-separated argument list at top-level commas and parses each value.
pub fn parse_args(csv: &str) -> Result<Vec<Value>, MiniSyntaxError> {
    if csv.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in csv.char_indices() {
        match c {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&csv[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&csv[start..]);
    parts.into_iter().map(parse_value).collect()
}
