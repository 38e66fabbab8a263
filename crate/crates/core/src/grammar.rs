//! Infix grammar for PDEs and closed-form expressions.
//!
//! ```text
//! equation := expr ('=' expr)?
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := '-' unary | power
//! power    := postfix ('^' unary)?
//! postfix  := atom suffix*          suffix := '_' letters
//! atom     := number | ident | ident '(' args ')' | '(' expr ')'
//! ```
//!
//! Identifiers are letters and digits, optionally followed by primes
//! (`U''`). A `_letters` suffix differentiates the preceding atom, so
//! `u_xx` and `(u^2)_xx` are both derivatives. `pi` is reserved.

use std::fmt;

use crate::error::{Error, Result};
use crate::reduction::PdeSpec;
use crate::symkernel::rational::{self, Rational};
use crate::symkernel::{Expr, Func, Symbol};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ast {
    /// Nonnegative decimal or integer literal, kept as written.
    Num(String),
    Ident(String),
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, Box<Ast>),
    Call(String, Vec<Ast>),
    /// Derivative of the operand in the listed independents.
    Deriv(Box<Ast>, String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedInput {
    pub lhs: Ast,
    pub rhs: Option<Ast>,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Suffix(String),
    Op(char),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { line, col, msg: msg.into() }
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut advance = |n: usize, i: &mut usize| {
            *i += n;
            col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i);
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            let mut seen_dot = false;
            while i < chars.len() && (chars[i].is_ascii_digit() || (chars[i] == '.' && !seen_dot)) {
                seen_dot |= chars[i] == '.';
                i += 1;
            }
            col += i - start;
            out.push(Token { tok: Tok::Num(chars[start..i].iter().collect()), line: l0, col: c0 });
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            while i < chars.len() && chars[i] == '\'' {
                i += 1;
            }
            col += i - start;
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line: l0, col: c0 });
            continue;
        }
        if c == '_' {
            let start = i + 1;
            let mut j = start;
            while j < chars.len() && chars[j].is_ascii_alphabetic() {
                j += 1;
            }
            if j == start {
                return Err(syntax(l0, c0, "expected derivative letters after `_`"));
            }
            col += j - i;
            out.push(Token { tok: Tok::Suffix(chars[start..j].iter().collect()), line: l0, col: c0 });
            i = j;
            continue;
        }
        if "+-*/^()=,".contains(c) {
            advance(1, &mut i);
            out.push(Token { tok: Tok::Op(c), line: l0, col: c0 });
            continue;
        }
        return Err(syntax(l0, c0, format!("unexpected character `{}`", c)));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|t| (t.line, t.col)).unwrap_or(self.end)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            let (l, k) = self.here();
            Err(syntax(l, k, format!("expected `{}`", c)))
        }
    }

    fn expr(&mut self) -> Result<Ast> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Ast::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Ast::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Ast> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Ast::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Ast::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Ast> {
        if self.eat('-') {
            return Ok(Ast::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Ast> {
        let base = self.postfix()?;
        if self.eat('^') {
            return Ok(Ast::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn postfix(&mut self) -> Result<Ast> {
        let mut a = self.atom()?;
        while let Some(Tok::Suffix(s)) = self.peek().cloned() {
            self.pos += 1;
            a = Ast::Deriv(Box::new(a), s);
        }
        Ok(a)
    }

    fn atom(&mut self) -> Result<Ast> {
        let (l, k) = self.here();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Ast::Num(n))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.eat('(') {
                    let mut args = Vec::new();
                    if !self.eat(')') {
                        loop {
                            args.push(self.expr()?);
                            if self.eat(')') {
                                break;
                            }
                            self.expect(',')?;
                        }
                    }
                    return Ok(Ast::Call(name, args));
                }
                Ok(Ast::Ident(name))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Suffix(_)) => Err(syntax(l, k, "derivative suffix without an operand")),
            Some(Tok::Op(c)) => Err(syntax(l, k, format!("unexpected `{}`", c))),
            None => Err(syntax(l, k, "unexpected end of input")),
        }
    }
}

fn end_position(text: &str) -> (usize, usize) {
    let line = text.matches('\n').count() + 1;
    let col = text.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

/// Parses `expr` or `expr = expr`.
pub fn parse_input(text: &str) -> Result<ParsedInput> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: end_position(text) };
    let lhs = p.expr()?;
    let rhs = if p.eat('=') { Some(p.expr()?) } else { None };
    if p.pos < p.toks.len() {
        let (l, k) = p.here();
        return Err(syntax(l, k, "unexpected trailing input"));
    }
    Ok(ParsedInput { lhs, rhs })
}

/// Parses a single expression (no `=`).
pub fn parse_ast(text: &str) -> Result<Ast> {
    let parsed = parse_input(text)?;
    if parsed.rhs.is_some() {
        return Err(syntax(1, 1, "expected an expression, found an equation"));
    }
    Ok(parsed.lhs)
}

// ---- printing ----------------------------------------------------------------

fn prec(a: &Ast) -> u8 {
    match a {
        Ast::Add(..) | Ast::Sub(..) => 1,
        Ast::Mul(..) | Ast::Div(..) => 2,
        Ast::Neg(..) => 3,
        Ast::Pow(..) => 4,
        _ => 5,
    }
}

fn wrap(a: &Ast, min: u8) -> String {
    if prec(a) < min {
        format!("({})", a)
    } else {
        a.to_string()
    }
}

impl fmt::Display for Ast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ast::Num(n) => f.write_str(n),
            Ast::Ident(s) => f.write_str(s),
            Ast::Neg(a) => write!(f, "-{}", wrap(a, 3)),
            // right operands of left-associative operators need one more level
            Ast::Add(a, b) => write!(f, "{} + {}", wrap(a, 1), wrap(b, 2)),
            Ast::Sub(a, b) => write!(f, "{} - {}", wrap(a, 1), wrap(b, 2)),
            Ast::Mul(a, b) => write!(f, "{}*{}", wrap(a, 2), wrap(b, 3)),
            Ast::Div(a, b) => write!(f, "{}/{}", wrap(a, 2), wrap(b, 3)),
            Ast::Pow(a, b) => write!(f, "{}^{}", wrap(a, 5), wrap(b, 3)),
            Ast::Call(name, args) => {
                let a: Vec<String> = args.iter().map(|x| x.to_string()).collect();
                write!(f, "{}({})", name, a.join(", "))
            }
            Ast::Deriv(a, v) => write!(f, "{}_{}", wrap(a, 5), v),
        }
    }
}

impl fmt::Display for ParsedInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.rhs {
            Some(r) => write!(f, "{} = {}", self.lhs, r),
            None => write!(f, "{}", self.lhs),
        }
    }
}

// ---- lowering ----------------------------------------------------------------

fn number(text: &str) -> Rational {
    rational::parse(text).expect("lexer only produces decimal literals")
}

/// Lowers an AST to an [`Expr`]. Derivative suffixes need `pde` to resolve
/// the independents; without it they are rejected.
pub fn lower(ast: &Ast, pde: Option<&PdeSpec>) -> Result<Expr> {
    Ok(match ast {
        Ast::Num(n) => Expr::num(number(n)),
        Ast::Ident(s) => Expr::sym(s),
        Ast::Neg(a) => -lower(a, pde)?,
        Ast::Add(a, b) => lower(a, pde)? + lower(b, pde)?,
        Ast::Sub(a, b) => lower(a, pde)? - lower(b, pde)?,
        Ast::Mul(a, b) => lower(a, pde)? * lower(b, pde)?,
        Ast::Div(a, b) => lower(a, pde)? / lower(b, pde)?,
        Ast::Pow(a, b) => {
            let base = lower(a, pde)?;
            let ex = lower(b, pde)?;
            Expr::pow(&base, &ex)
        }
        Ast::Call(name, args) => {
            let lowered = args.iter().map(|a| lower(a, pde)).collect::<Result<Vec<_>>>()?;
            let func = Func::from_name(name);
            if let Some(k) = func.arity() {
                if k != lowered.len() {
                    return Err(syntax(1, 1, format!("`{}` takes {} argument(s)", name, k)));
                }
            }
            // sqrt stays unflagged: printed radicands may change sign
            Expr::apply(func, lowered)
        }
        Ast::Deriv(a, vars) => {
            let pde = pde.ok_or_else(|| syntax(1, 1, "derivative suffix outside a PDE"))?;
            let mut e = lower(a, Some(pde))?;
            for ch in vars.chars() {
                let k = pde
                    .independents
                    .iter()
                    .position(|v| v.name() == ch.to_string())
                    .ok_or_else(|| Error::UnknownSymbol {
                        name: ch.to_string(),
                        declared: pde.independents.iter().map(|s| s.to_string()).collect(),
                    })?;
                e = pde.total_derivative(&e, k)?;
            }
            e
        }
    })
}

fn identifiers(ast: &Ast, out: &mut Vec<String>) {
    match ast {
        Ast::Num(_) => {}
        Ast::Ident(s) => out.push(s.clone()),
        Ast::Neg(a) | Ast::Deriv(a, _) => identifiers(a, out),
        Ast::Add(a, b) | Ast::Sub(a, b) | Ast::Mul(a, b) | Ast::Div(a, b) | Ast::Pow(a, b) => {
            identifiers(a, out);
            identifiers(b, out);
        }
        Ast::Call(_, args) => args.iter().for_each(|a| identifiers(a, out)),
    }
}

pub const PDE_SYMBOLS: [&str; 5] = ["u", "x", "t", "p", "q"];

/// Parses `lhs = rhs` (or a bare `lhs`) into a PDE in `u(x, t)` with
/// parameters `p, q`.
pub fn parse_pde(text: &str) -> Result<PdeSpec> {
    parse_pde_with(text, &PDE_SYMBOLS)
}

pub fn parse_pde_with(text: &str, declared: &[&str]) -> Result<PdeSpec> {
    let parsed = parse_input(text)?;
    let mut ids = Vec::new();
    identifiers(&parsed.lhs, &mut ids);
    if let Some(r) = &parsed.rhs {
        identifiers(r, &mut ids);
    }
    for id in ids {
        if !declared.contains(&id.as_str()) && id != "pi" {
            return Err(Error::UnknownSymbol {
                name: id,
                declared: declared.iter().map(|s| s.to_string()).collect(),
            });
        }
    }
    let base = PdeSpec::new(Expr::zero());
    let lhs = lower(&parsed.lhs, Some(&base))?;
    let lhs = match &parsed.rhs {
        Some(r) => lhs - lower(r, Some(&base))?,
        None => lhs,
    };
    Ok(PdeSpec::new(lhs.expand()))
}

/// Parses a closed-form expression. Every identifier is a symbol.
pub fn parse_expr(text: &str) -> Result<Expr> {
    lower(&parse_ast(text)?, None)
}

/// Parses an expression and checks its identifiers against `declared`.
pub fn parse_expr_declared(text: &str, declared: &[Symbol]) -> Result<Expr> {
    let ast = parse_ast(text)?;
    let mut ids = Vec::new();
    identifiers(&ast, &mut ids);
    for id in ids {
        if id != "pi" && !declared.iter().any(|d| d.name() == id) {
            return Err(Error::UnknownSymbol {
                name: id,
                declared: declared.iter().map(|s| s.to_string()).collect(),
            });
        }
    }
    lower(&ast, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heat_equation_parses() {
        let pde = parse_pde("u_t - (u^2)_xx - p*u + q*u^3 = 0").unwrap();
        let u = Expr::sym("u");
        let expect = (Expr::sym("u_t")
            - Expr::int(2) * Expr::sym("u_x").powi(2)
            - Expr::int(2) * u.clone() * Expr::sym("u_xx")
            - Expr::sym("p") * u.clone()
            + Expr::sym("q") * u.powi(3))
        .expand();
        assert_eq!(pde.lhs, expect);
        assert_eq!(pde.parameters, vec![Symbol::new("p"), Symbol::new("q")]);
    }

    #[test]
    fn trivial_equation() {
        assert_eq!(parse_pde("u = 0").unwrap().lhs, Expr::sym("u"));
    }

    #[test]
    fn suffix_binds_tighter_than_minus() {
        let a = parse_ast("u_t - (u^2)_xx").unwrap();
        match &a {
            Ast::Sub(l, r) => {
                assert!(matches!(**l, Ast::Deriv(_, ref v) if v == "t"));
                assert!(matches!(**r, Ast::Deriv(_, ref v) if v == "xx"));
            }
            other => panic!("unexpected {:?}", other),
        }
        assert_eq!(parse_ast(&a.to_string()).unwrap(), a);
    }

    #[test]
    fn unknown_symbol_lists_declared() {
        match parse_pde("u_t - w") {
            Err(Error::UnknownSymbol { name, declared }) => {
                assert_eq!(name, "w");
                assert_eq!(declared, vec!["u", "x", "t", "p", "q"]);
            }
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn syntax_error_position() {
        match parse_input("u_t +\n  * u") {
            Err(Error::Syntax { line, col, .. }) => assert_eq!((line, col), (2, 3)),
            other => panic!("unexpected {:?}", other),
        }
        assert!(matches!(parse_input("(u"), Err(Error::Syntax { line: 1, col: 3, .. })));
    }

    #[test]
    fn power_is_right_associative_and_binds_over_negation() {
        assert_eq!(parse_expr("-x^2").unwrap(), -Expr::sym("x").powi(2));
        assert_eq!(parse_expr("2^3^2").unwrap(), Expr::int(512));
    }

    #[test]
    fn functions_and_decimals() {
        let e = parse_expr("arctan(x/sqrt(-4*t - x^2)) + 0.5").unwrap();
        assert!(e.to_sexpr().contains("(arctan"));
        assert_eq!(parse_expr("0.25").unwrap(), Expr::frac(1, 4));
        let h = parse_expr("hypergeom(1, 2, 3, z)").unwrap();
        assert!(h.to_sexpr().starts_with("(hyp2f1"));
    }

    #[test]
    fn primes_in_identifiers() {
        let e = parse_expr("U'' - U'*U").unwrap();
        assert!(e.free_symbols().contains(&Symbol::new("U''")));
    }
}
