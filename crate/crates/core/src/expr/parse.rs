//! Infix expression syntax.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 'e' | variable | func '(' expr ')' | '(' expr ')'
//! func   := exp | log | sqrt | sin | cos
//! number := digits ('.' digits)?
//! ```
//!
//! `^` is right associative and binds tighter than unary minus, so `-x^2`
//! is `-(x^2)` and `x^-1` is `x^(-1)`. Decimal literals are read exactly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{Expr, Func, Var};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { position: usize, name: String },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { position, .. } | ParseError::UnknownIdentifier { position, .. } => {
                *position
            }
        }
    }
}

/// Parse an expression in the plane variables `x`, `y`.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    parse_with(text, &[Var::X, Var::Y])
}

/// Parse an expression allowing exactly the given variables.
pub fn parse_with(text: &str, vars: &[Var]) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        vars,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [Var],
}

impl Parser<'_> {
    fn syntax(&self, message: &str) -> ParseError {
        ParseError::Syntax {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = lhs.add(&self.term()?);
            } else if self.eat(b'-') {
                lhs = lhs.sub(&self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = lhs.mul(&self.unary()?);
            } else if self.eat(b'/') {
                lhs = lhs.div(&self.unary()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let exponent = self.unary()?;
            return Ok(base.pow(&exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.syntax("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                if let Some(f) = Func::from_name(name) {
                    if !self.eat(b'(') {
                        return Err(self.syntax(&format!("expected `(` after `{name}`")));
                    }
                    let arg = self.expr()?;
                    if !self.eat(b')') {
                        return Err(self.syntax("expected `)`"));
                    }
                    return Ok(arg.apply(f));
                }
                if name == "e" {
                    return Ok(Expr::e());
                }
                match Var::from_name(name) {
                    Some(v) if self.vars.contains(&v) => Ok(Expr::var(v)),
                    _ => Err(ParseError::UnknownIdentifier {
                        position: start,
                        name: name.to_string(),
                    }),
                }
            }
            Some(c) => Err(self.syntax(&format!("unexpected character `{}`", c as char))),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let mut int_part = BigInt::zero();
        let mut frac = BigRational::zero();
        let mut digits = 0;
        while let Some(c) = self.src.get(self.pos).copied().filter(u8::is_ascii_digit) {
            int_part = int_part * 10 + (c - b'0');
            self.pos += 1;
            digits += 1;
        }
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            let mut scale = BigRational::one();
            let ten = BigRational::from_integer(BigInt::from(10));
            while let Some(c) = self.src.get(self.pos).copied().filter(u8::is_ascii_digit) {
                scale /= &ten;
                frac += &scale * BigRational::from_integer(BigInt::from(c - b'0'));
                self.pos += 1;
                digits += 1;
            }
        }
        if digits == 0 {
            self.pos = start;
            return Err(self.syntax("malformed number"));
        }
        Ok(Expr::constant(BigRational::from_integer(int_part) + frac))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_structure() {
        let e = parse("x + y").unwrap();
        assert_eq!(e, Expr::x().add(&Expr::y()));
        let e = parse("(x-y)^2/x").unwrap();
        let expected = Expr::x().sub(&Expr::y()).powi(2).div(&Expr::x());
        assert_eq!(e, expected);
    }

    #[test]
    fn precedence() {
        assert_eq!(parse("-x^2").unwrap(), Expr::x().powi(2).neg());
        assert_eq!(parse("x^-1").unwrap(), Expr::x().powi(-1));
        assert_eq!(parse("2^3^2").unwrap(), Expr::int(512));
        assert_eq!(parse("1.25").unwrap(), Expr::ratio(5, 4));
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse("x + * y").unwrap_err();
        assert_eq!(err.position(), 4);
        let err = parse("x + z").unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownIdentifier {
                position: 4,
                name: "z".into()
            }
        );
        assert!(parse("(x + y").is_err());
        assert!(parse("log x").is_err());
        assert!(parse("t").is_err());
        assert!(parse_with("t", &[Var::T]).is_ok());
    }
}
