use std::fmt::{self, Write};

use num_traits::{Signed, Zero};

use super::{BinOp, Expr, Func, Kind};

const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e.kind() {
        Kind::Bin(BinOp::Add | BinOp::Sub, ..) => PREC_SUM,
        Kind::Bin(BinOp::Mul | BinOp::Div, ..) => PREC_PRODUCT,
        Kind::Bin(BinOp::Pow, ..) => PREC_POW,
        Kind::Unary(Func::Neg, _) => PREC_NEG,
        _ => PREC_ATOM,
    }
}

fn write_expr(out: &mut impl Write, e: &Expr) -> fmt::Result {
    stacker::maybe_grow(64 * 1024, 4 * 1024 * 1024, || match e.kind() {
        Kind::Const(q) => {
            if q.is_integer() && !q.is_negative() {
                write!(out, "{}", q.numer())
            } else if q.is_integer() {
                write!(out, "({})", q.numer())
            } else {
                write!(out, "({}/{})", q.numer(), q.denom())
            }
        }
        Kind::E => out.write_str("e"),
        Kind::Var(v) => out.write_str(v.name()),
        Kind::Unary(Func::Neg, a) => {
            out.write_char('-')?;
            operand(out, a, precedence(a) >= PREC_POW)
        }
        Kind::Unary(f, a) => {
            write!(out, "{}(", f.name())?;
            write_expr(out, a)?;
            out.write_char(')')
        }
        Kind::Bin(op, a, b) => {
            let (sym, left_ok, right_ok) = match op {
                BinOp::Add => (" + ", true, precedence(b) > PREC_SUM),
                BinOp::Sub => (" - ", true, precedence(b) > PREC_SUM),
                BinOp::Mul => ("*", precedence(a) >= PREC_PRODUCT, precedence(b) >= PREC_POW),
                BinOp::Div => ("/", precedence(a) >= PREC_PRODUCT, precedence(b) >= PREC_POW),
                BinOp::Pow => ("^", precedence(a) >= PREC_ATOM, precedence(b) >= PREC_POW),
            };
            operand(out, a, left_ok)?;
            out.write_str(sym)?;
            operand(out, b, right_ok)
        }
    })
}

fn operand(out: &mut impl Write, e: &Expr, bare: bool) -> fmt::Result {
    if bare {
        write_expr(out, e)
    } else {
        out.write_char('(')?;
        write_expr(out, e)?;
        out.write_char(')')
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // top-level constants print without the protective parentheses
        if let Some(q) = self.as_const() {
            if q.denom().is_zero() {
                return f.write_str("NaN");
            }
            return if q.is_integer() {
                write!(f, "{}", q.numer())
            } else {
                write!(f, "{}/{}", q.numer(), q.denom())
            };
        }
        write_expr(f, self)
    }
}

impl Expr {
    /// Printed form, elided in the middle when longer than `max_len` bytes.
    pub fn abbreviated(&self, max_len: usize) -> String {
        struct Capped {
            buf: String,
            cap: usize,
        }
        impl Write for Capped {
            fn write_str(&mut self, s: &str) -> fmt::Result {
                if self.buf.len() + s.len() > self.cap {
                    return Err(fmt::Error);
                }
                self.buf.push_str(s);
                Ok(())
            }
        }
        let mut c = Capped {
            buf: String::new(),
            cap: max_len,
        };
        if write!(c, "{self}").is_ok() {
            c.buf
        } else {
            let keep = max_len.saturating_sub(32);
            let mut s: String = c.buf.chars().take(keep).collect();
            write!(s, " ... [{} nodes]", self.dag_size()).ok();
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::parse;

    fn round(text: &str) -> String {
        parse(text).unwrap().to_string()
    }

    #[test]
    fn printing() {
        assert_eq!(round("x + y"), "x + y");
        assert_eq!(round("x - (y - x)"), "x - (y - x)");
        assert_eq!(round("(x-y)^2/x"), "(x - y)^2/x");
        assert_eq!(round("x*(y/x)"), "x*(y/x)");
        assert_eq!(round("-(x*y)"), "-(x*y)");
        assert_eq!(round("x^(1/2)"), "x^(1/2)");
        assert_eq!(round("(-x)^3"), "(-x)^3");
        assert_eq!(round("x/2"), "x/2");
        assert_eq!(round("3/4"), "3/4");
        assert_eq!(round("exp(-x)"), "exp(-x)");
    }

    #[test]
    fn reparse_is_identity() {
        for text in ["x*(y/x)", "-(x+y)^2", "x^y^2", "(x/y)/(x*y)", "1/2*x", "-3 - x", "e^(x - 1)"] {
            let e = parse(text).unwrap();
            assert_eq!(parse(&e.to_string()).unwrap(), e, "{text}");
        }
    }

    #[test]
    fn abbreviation() {
        let e = parse("(x+y)^2").unwrap();
        assert_eq!(e.abbreviated(100), "(x + y)^2");
        let long = parse("(x + y)^2*(x - y)^3*exp(x*y)*log(x + 2*y)*sin(x)").unwrap();
        let s = long.abbreviated(40);
        assert!(s.contains("nodes"), "{s}");
        assert!(s.len() < 60);
    }
}
