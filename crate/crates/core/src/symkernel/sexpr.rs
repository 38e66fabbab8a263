//! Parser for the S-expression form produced by [`Expr::to_sexpr`].

use super::expr::{Expr, Func};
use super::rational;
use super::symbol::Symbol;
use crate::error::KernelError;

pub fn parse_sexpr(text: &str) -> Result<Expr, KernelError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> KernelError {
        KernelError::SExpr { offset: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn atom(&mut self) -> Result<String, KernelError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_whitespace() || c == b'(' || c == b')' {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected atom"));
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn expect(&mut self, c: u8) -> Result<(), KernelError> {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn args(&mut self) -> Result<Vec<Expr>, KernelError> {
        let mut out = Vec::new();
        while self.peek() != Some(b')') {
            if self.peek().is_none() {
                return Err(self.err("unterminated list"));
            }
            out.push(self.expr()?);
        }
        self.expect(b')')?;
        Ok(out)
    }

    fn expr(&mut self) -> Result<Expr, KernelError> {
        if self.peek() != Some(b'(') {
            let a = self.atom()?;
            return rational::parse(&a)
                .map(Expr::num)
                .ok_or_else(|| self.err(&format!("bad number `{}`", a)));
        }
        self.expect(b'(')?;
        let head = self.atom()?;
        match head.as_str() {
            "sym" => {
                let name = self.atom()?;
                self.expect(b')')?;
                Ok(Expr::symbol(&Symbol::new(&name)))
            }
            "add" => Ok(Expr::add_all(self.args()?)),
            "mul" => Ok(Expr::mul_all(self.args()?)),
            "pow" => {
                let a = self.args()?;
                if a.len() != 2 {
                    return Err(self.err("pow takes two arguments"));
                }
                Ok(Expr::pow(&a[0], &a[1]))
            }
            "fn" => {
                let name = self.atom()?;
                let a = self.args()?;
                Ok(Expr::apply(Func::Other(Symbol::new(&name)), a))
            }
            other => {
                let f = Func::from_name(other);
                if matches!(f, Func::Other(_)) {
                    return Err(self.err(&format!("unknown head `{}`", other)));
                }
                let a = self.args()?;
                if f.arity() != Some(a.len()) {
                    return Err(self.err(&format!("wrong arity for `{}`", other)));
                }
                Ok(Expr::apply(f, a))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_examples() {
        for s in [
            "(mul (sym q) (pow (sym x) 2))",
            "-3/4",
            "(add 1 (sym x))",
            "(hyp2f1 1 (sym a) 2 (mul -1 (sym t)))",
            "(fn g (sym x) (sym t))",
            "(sqrt (add 4 (pow (sym z) 2)))",
        ] {
            let e = parse_sexpr(s).unwrap();
            assert_eq!(e.to_sexpr(), s);
        }
    }

    #[test]
    fn errors_carry_offsets() {
        match parse_sexpr("(add 1") {
            Err(KernelError::SExpr { offset, .. }) => assert_eq!(offset, 6),
            other => panic!("{:?}", other),
        }
        assert!(parse_sexpr("(bogus 1)").is_err());
    }
}
