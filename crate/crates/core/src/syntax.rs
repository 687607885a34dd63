//! Concrete syntax: lexer, parser and printer for `.lsq` programs.
//!
//! `t1; t2` and `let x: T = t1 in t2` desugar to an immediately applied
//! binder whose kind follows the innermost enclosing binder: a `cor` body
//! gets a coroutine of the same yield type (so the continuation may yield),
//! anywhere else gets a plain `fun`. The printer mirrors that choice so
//! printing and parsing round-trip.

use std::fmt;

use thiserror::Error;

use crate::ast::{Term, Type};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{origin}:{line}:{col}: {msg}")]
pub struct SyntaxError {
    pub origin: String,
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

/// Program text together with where it came from.
#[derive(Debug, Clone)]
pub struct SourceProgram {
    pub text: String,
    pub origin: String,
}

impl SourceProgram {
    pub fn inline(text: impl Into<String>) -> Self {
        SourceProgram {
            text: text.into(),
            origin: "<inline>".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

const SYMBOLS: &[&str] = &["<~>", "=>", "->", "~>", "(", ")", ",", ":", ";", "+", "=", "~"];

const KEYWORDS: &[&str] = &[
    "fun", "cor", "yields", "yield", "start", "resume", "snapshot", "fix", "let", "in", "Unit", "Int", "Bot", "Top",
];

struct Lexed {
    toks: Vec<(Tok, usize, usize)>,
}

fn lex(src: &SourceProgram) -> Result<Lexed, SyntaxError> {
    let chars: Vec<char> = src.text.chars().collect();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: String| SyntaxError {
        origin: src.origin.clone(),
        line,
        col,
        msg,
    };
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
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (sl, sc) = (line, col);
        let neg = c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit());
        if c.is_ascii_digit() || neg {
            let start = i;
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let n = s
                .parse::<i64>()
                .map_err(|_| err(sl, sc, format!("integer literal out of range: {s}")))?;
            toks.push((Tok::Int(n), sl, sc));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            col += i - start;
            toks.push((Tok::Ident(chars[start..i].iter().collect()), sl, sc));
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 6)].iter().collect();
        for runtime in ["#inst", "<|", "[[", "%empty"] {
            if rest.starts_with(runtime) {
                return Err(err(
                    sl,
                    sc,
                    format!("runtime form `{runtime}` is not allowed in programs"),
                ));
            }
        }
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                i += s.len();
                col += s.len();
                toks.push((Tok::Sym(s), sl, sc));
            }
            None => return Err(err(sl, sc, format!("unexpected character `{c}`"))),
        }
    }
    toks.push((Tok::Eof, line, col));
    Ok(Lexed { toks })
}

/// Innermost enclosing binder, which decides how sequencing desugars.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Binder {
    None,
    Fun,
    Cor(Type),
}

struct Parser<'a> {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    origin: &'a str,
    scope: Vec<String>,
    binders: Vec<Binder>,
}

type PResult<T> = Result<T, SyntaxError>;

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn error<T>(&self, msg: String) -> PResult<T> {
        let (_, line, col) = &self.toks[self.pos];
        Err(SyntaxError {
            origin: self.origin.to_string(),
            line: *line,
            col: *col,
            msg,
        })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected `{s}`, found {}", self.peek()))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.is_kw(k) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected `{k}`, found {}", self.peek()))
        }
    }

    fn binder_name(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(x) if !KEYWORDS.contains(&x.as_str()) => {
                self.bump();
                Ok(x)
            }
            t => self.error(format!("expected a variable name, found {t}")),
        }
    }

    fn ty(&mut self) -> PResult<Type> {
        let lhs = self.ty_atom()?;
        if self.is_sym("->") {
            self.bump();
            Ok(Type::fun(lhs, self.ty()?))
        } else if self.is_sym("~") {
            self.bump();
            let y = self.ty()?;
            self.expect_sym("~>")?;
            Ok(Type::cor(lhs, y, self.ty()?))
        } else if self.is_sym("<~>") {
            self.bump();
            Ok(Type::inst(lhs, self.ty()?))
        } else {
            Ok(lhs)
        }
    }

    fn ty_atom(&mut self) -> PResult<Type> {
        let t = match self.peek() {
            Tok::Ident(x) if x == "Unit" => Type::Unit,
            Tok::Ident(x) if x == "Int" => Type::Int,
            Tok::Ident(x) if x == "Bot" => Type::Bot,
            Tok::Ident(x) if x == "Top" => Type::Top,
            Tok::Sym("(") => {
                self.bump();
                let t = self.ty()?;
                self.expect_sym(")")?;
                return Ok(t);
            }
            t => return self.error(format!("expected a type, found {t}")),
        };
        self.bump();
        Ok(t)
    }

    fn current_binder(&self) -> Binder {
        self.binders.last().cloned().unwrap_or(Binder::None)
    }

    /// `let`/`;` desugaring: apply a binder of the current kind.
    fn sugar(&self, x: String, t: Type, body: Term, arg: Term) -> Term {
        let f = match self.current_binder() {
            Binder::Cor(y) => Term::Coroutine {
                param: x,
                annot: t,
                yields: y,
                body: Box::new(body),
            },
            _ => Term::Abs(x, t, Box::new(body)),
        };
        Term::App(Box::new(f), Box::new(arg))
    }

    fn seq(&mut self) -> PResult<Term> {
        let first = self.expr()?;
        if self.is_sym(";") {
            self.bump();
            self.scope.push("_".into());
            let rest = self.seq();
            self.scope.pop();
            Ok(self.sugar("_".into(), Type::Unit, rest?, first))
        } else {
            Ok(first)
        }
    }

    fn bound_body(&mut self, x: &str, binder: Binder) -> PResult<Term> {
        self.scope.push(x.to_string());
        self.binders.push(binder);
        let body = self.seq();
        self.binders.pop();
        self.scope.pop();
        body
    }

    fn expr(&mut self) -> PResult<Term> {
        if self.is_kw("fun") {
            self.bump();
            self.expect_sym("(")?;
            let x = self.binder_name()?;
            self.expect_sym(":")?;
            let t = self.ty()?;
            self.expect_sym(")")?;
            self.expect_sym("=>")?;
            let body = self.bound_body(&x, Binder::Fun)?;
            return Ok(Term::Abs(x, t, Box::new(body)));
        }
        if self.is_kw("cor") {
            self.bump();
            self.expect_sym("(")?;
            let x = self.binder_name()?;
            self.expect_sym(":")?;
            let t = self.ty()?;
            self.expect_sym(")")?;
            self.expect_kw("yields")?;
            let y = self.ty()?;
            self.expect_sym("=>")?;
            let body = self.bound_body(&x, Binder::Cor(y.clone()))?;
            return Ok(Term::Coroutine {
                param: x,
                annot: t,
                yields: y,
                body: Box::new(body),
            });
        }
        if self.is_kw("let") {
            self.bump();
            let x = self.binder_name()?;
            self.expect_sym(":")?;
            let t = self.ty()?;
            self.expect_sym("=")?;
            let bound = self.seq()?;
            self.expect_kw("in")?;
            self.scope.push(x.clone());
            let body = self.seq();
            self.scope.pop();
            return Ok(self.sugar(x, t, body?, bound));
        }
        self.sum()
    }

    fn sum(&mut self) -> PResult<Term> {
        let mut lhs = self.app()?;
        while self.is_sym("+") {
            self.bump();
            let rhs = self.app()?;
            lhs = Term::Add(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn app(&mut self) -> PResult<Term> {
        let mut f = self.atom()?;
        while self.is_sym("(") {
            self.bump();
            let a = self.seq()?;
            self.expect_sym(")")?;
            f = Term::App(Box::new(f), Box::new(a));
        }
        Ok(f)
    }

    fn args(&mut self, n: usize) -> PResult<Vec<Term>> {
        self.expect_sym("(")?;
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            if k > 0 {
                self.expect_sym(",")?;
            }
            out.push(self.seq()?);
        }
        self.expect_sym(")")?;
        Ok(out)
    }

    fn atom(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Term::Int(n))
            }
            Tok::Sym("(") => {
                self.bump();
                if self.is_sym(")") {
                    self.bump();
                    return Ok(Term::Unit);
                }
                let t = self.seq()?;
                self.expect_sym(")")?;
                Ok(t)
            }
            Tok::Ident(k) if k == "fun" || k == "cor" || k == "let" => self.expr(),
            Tok::Ident(k) if k == "yield" => {
                self.bump();
                let mut a = self.args(1)?;
                Ok(Term::Yield(Box::new(a.remove(0))))
            }
            Tok::Ident(k) if k == "snapshot" => {
                self.bump();
                let mut a = self.args(1)?;
                Ok(Term::Snapshot(Box::new(a.remove(0))))
            }
            Tok::Ident(k) if k == "fix" => {
                self.bump();
                let mut a = self.args(1)?;
                Ok(Term::Fix(Box::new(a.remove(0))))
            }
            Tok::Ident(k) if k == "start" => {
                self.bump();
                let mut a = self.args(2)?.into_iter();
                let (c, x) = (a.next().unwrap(), a.next().unwrap());
                Ok(Term::Start(Box::new(c), Box::new(x)))
            }
            Tok::Ident(k) if k == "resume" => {
                self.bump();
                let mut a = self.args(4)?.into_iter().map(Box::new);
                let mut next = || a.next().unwrap();
                Ok(Term::Resume(next(), next(), next(), next()))
            }
            Tok::Ident(x) if !KEYWORDS.contains(&x.as_str()) => {
                if x == "_" {
                    return self.error("`_` can only be used as a binder".into());
                }
                if !self.scope.contains(&x) {
                    return self.error(format!("unbound variable `{x}`"));
                }
                self.bump();
                Ok(Term::Var(x))
            }
            t => self.error(format!("expected a term, found {t}")),
        }
    }
}

/// Parses a closed user program.
pub fn parse_term(src: &SourceProgram) -> Result<Term, SyntaxError> {
    parse_term_in(src, &[])
}

/// Parses a user term whose free variables are drawn from `scope`.
pub fn parse_term_in(src: &SourceProgram, scope: &[&str]) -> Result<Term, SyntaxError> {
    let lexed = lex(src)?;
    let mut p = Parser {
        toks: lexed.toks,
        pos: 0,
        origin: &src.origin,
        scope: scope.iter().map(|s| s.to_string()).collect(),
        binders: Vec::new(),
    };
    let t = p.seq()?;
    if *p.peek() != Tok::Eof {
        return p.error(format!("unexpected {} after term", p.peek()));
    }
    Ok(t)
}

/// Parses a type.
pub fn parse_type(src: &str) -> Result<Type, SyntaxError> {
    let src = SourceProgram::inline(src);
    let lexed = lex(&src)?;
    let mut p = Parser {
        toks: lexed.toks,
        pos: 0,
        origin: &src.origin,
        scope: Vec::new(),
        binders: Vec::new(),
    };
    let t = p.ty()?;
    if *p.peek() != Tok::Eof {
        return p.error(format!("unexpected {} after type", p.peek()));
    }
    Ok(t)
}

/// Renders a term in concrete syntax.
pub fn print_term(t: &Term) -> String {
    let mut out = String::new();
    Printer {
        out: &mut out,
        binders: Vec::new(),
    }
    .term(t, Prec::Seq);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Seq,
    Sum,
    App,
}

struct Printer<'a> {
    out: &'a mut String,
    binders: Vec<Binder>,
}

impl Printer<'_> {
    fn current(&self) -> Binder {
        self.binders.last().cloned().unwrap_or(Binder::None)
    }

    /// Recognizes an application the parser would have produced from `;` or `let`.
    fn as_sugar<'t>(&self, t: &'t Term) -> Option<(&'t str, &'t Type, &'t Term, &'t Term)> {
        let Term::App(f, arg) = t else { return None };
        match (&**f, self.current()) {
            (Term::Abs(x, ty, body), Binder::None | Binder::Fun) => Some((x, ty, body, arg)),
            (
                Term::Coroutine {
                    param,
                    annot,
                    yields,
                    body,
                },
                Binder::Cor(y),
            ) if *yields == y => Some((param, annot, body, arg)),
            _ => None,
        }
    }

    fn with_binder(&mut self, b: Binder, t: &Term) {
        self.binders.push(b);
        self.term(t, Prec::Seq);
        self.binders.pop();
    }

    fn term(&mut self, t: &Term, prec: Prec) {
        if let Some((x, ty, body, arg)) = self.as_sugar(t) {
            if prec > Prec::Seq {
                self.out.push('(');
            }
            if x == "_" && *ty == Type::Unit {
                self.term(arg, Prec::Sum);
                self.out.push_str("; ");
            } else {
                self.out.push_str(&format!("let {x}: {ty} = "));
                self.term(arg, Prec::Seq);
                self.out.push_str(" in ");
            }
            self.term(body, Prec::Seq);
            if prec > Prec::Seq {
                self.out.push(')');
            }
            return;
        }
        match t {
            Term::Abs(x, ty, body) => {
                self.open(prec);
                self.out.push_str(&format!("fun ({x}: {ty}) => "));
                self.with_binder(Binder::Fun, body);
                self.close(prec);
            }
            Term::Coroutine {
                param,
                annot,
                yields,
                body,
            } => {
                self.open(prec);
                self.out
                    .push_str(&format!("cor ({param}: {annot}) yields {yields} => "));
                self.with_binder(Binder::Cor(yields.clone()), body);
                self.close(prec);
            }
            Term::Add(a, b) => {
                if prec > Prec::Sum {
                    self.out.push('(');
                }
                self.term(a, Prec::Sum);
                self.out.push_str(" + ");
                self.term(b, Prec::App);
                if prec > Prec::Sum {
                    self.out.push(')');
                }
            }
            Term::App(f, a) => {
                self.term(f, Prec::App);
                self.out.push('(');
                self.term(a, Prec::Seq);
                self.out.push(')');
            }
            Term::Var(x) => self.out.push_str(x),
            Term::Unit => self.out.push_str("()"),
            Term::Int(n) => self.out.push_str(&n.to_string()),
            Term::Yield(a) => self.call("yield", &[a]),
            Term::Snapshot(a) => self.call("snapshot", &[a]),
            Term::Fix(a) => self.call("fix", &[a]),
            Term::Start(a, b) => self.call("start", &[a, b]),
            Term::Resume(a, b, c, d) => self.call("resume", &[a, b, c, d]),
            Term::Label(i) => self.out.push_str(&format!("#inst{i}")),
            Term::Resumption {
                body,
                on_ret,
                on_yield,
                on_dead,
                label,
            } => {
                self.out.push_str("<| ");
                for (k, part) in [body, on_ret, on_yield, on_dead].into_iter().enumerate() {
                    if k > 0 {
                        self.out.push_str(" , ");
                    }
                    self.term(part, Prec::Seq);
                }
                self.out.push_str(&format!(" |>#{label}"));
            }
            Term::Suspension(body, pending) => {
                self.out.push_str("[[ ");
                self.term(body, Prec::Seq);
                self.out.push_str(" ]]^");
                self.term(pending, Prec::App);
            }
            Term::Empty => self.out.push_str("%empty"),
        }
    }

    fn open(&mut self, prec: Prec) {
        if prec > Prec::Seq {
            self.out.push('(');
        }
    }

    fn close(&mut self, prec: Prec) {
        if prec > Prec::Seq {
            self.out.push(')');
        }
    }

    fn call(&mut self, name: &str, args: &[&Term]) {
        self.out.push_str(name);
        self.out.push('(');
        for (k, a) in args.iter().enumerate() {
            if k > 0 {
                self.out.push_str(", ");
            }
            self.term(a, Prec::Seq);
        }
        self.out.push(')');
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::*;

    fn parse(s: &str) -> Term {
        parse_term(&SourceProgram::inline(s)).unwrap()
    }

    #[test]
    fn parses_dup() {
        let t = parse("cor (x: Int) yields Bot => x + x");
        assert_eq!(t, cor("x", Type::Int, Type::Bot, add(var("x"), var("x"))));
    }

    #[test]
    fn unit_literal() {
        assert_eq!(parse("()"), Term::Unit);
    }

    #[test]
    fn unbound_reference_is_rejected() {
        let e = parse_term(&SourceProgram::inline("resume(i, h1, h2, h3)")).unwrap_err();
        assert!(e.msg.contains("unbound variable `i`"), "{e}");
        assert_eq!((e.line, e.col), (1, 8));
    }

    #[test]
    fn runtime_forms_are_rejected() {
        for s in ["#inst0", "[[ () ]]^1", "%empty", "<| 1 , 2 , 3 , 4 |>#0"] {
            assert!(parse_term(&SourceProgram::inline(s)).is_err(), "{s}");
        }
    }

    #[test]
    fn prints_once() {
        let t = cor("x", Type::Int, Type::Int, yield_(var("x")));
        assert_eq!(print_term(&t), "cor (x: Int) yields Int => yield(x)");
    }

    #[test]
    fn prints_runtime_forms() {
        assert_eq!(print_term(&suspension(Term::Unit, Term::Int(7))), "[[ () ]]^7");
        assert_eq!(print_term(&Term::Label(3)), "#inst3");
        assert_eq!(print_term(&Term::Empty), "%empty");
    }

    #[test]
    fn sequencing_inside_coroutine_uses_coroutine_binder() {
        let t = parse("cor (x: Int) yields Int => yield(x); yield(x)");
        let expected = cor(
            "x",
            Type::Int,
            Type::Int,
            app(cor("_", Type::Unit, Type::Int, yield_(var("x"))), yield_(var("x"))),
        );
        assert_eq!(t, expected);
        assert_eq!(print_term(&t), "cor (x: Int) yields Int => yield(x); yield(x)");
    }

    #[test]
    fn sequencing_outside_coroutine_uses_fun() {
        let t = parse("(); 1");
        assert_eq!(t, app(abs("_", Type::Unit, Term::Int(1)), Term::Unit));
        let l = parse("let y: Int = 2 in y + y");
        assert_eq!(l, app(abs("y", Type::Int, add(var("y"), var("y"))), Term::Int(2)));
        assert_eq!(print_term(&l), "let y: Int = 2 in y + y");
    }

    #[test]
    fn types_are_right_associative() {
        assert_eq!(
            parse_type("Int -> Int -> Int").unwrap(),
            Type::fun(Type::Int, Type::fun(Type::Int, Type::Int))
        );
        assert_eq!(
            parse_type("Int ~Int~> Unit").unwrap(),
            Type::cor(Type::Int, Type::Int, Type::Unit)
        );
        assert_eq!(
            parse_type("(Int <~> Unit) -> Int").unwrap(),
            Type::fun(Type::inst(Type::Int, Type::Unit), Type::Int)
        );
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(
            parse("-- a comment\n 1 + -2 -- trailing"),
            add(Term::Int(1), Term::Int(-2))
        );
    }

    #[test]
    fn binder_bodies_are_parenthesized_in_operand_position() {
        let t = app(abs("x", Type::Int, var("x")), Term::Int(1));
        let t = add(t.clone(), t);
        let printed = print_term(&t);
        assert_eq!(parse(&printed), t);
    }
}
