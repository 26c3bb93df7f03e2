use std::sync::LazyLock;

use dashmap::DashMap;

use super::{BinOp, Expr, Func, Kind, Var};

static CACHE: LazyLock<DashMap<(u64, Var), Expr>> = LazyLock::new(DashMap::new);

pub(super) fn differentiate(e: &Expr, var: Var) -> Expr {
    if let Some(d) = CACHE.get(&(e.id(), var)) {
        return d.clone();
    }
    let d = stacker::maybe_grow(64 * 1024, 4 * 1024 * 1024, || rule(e, var));
    CACHE.insert((e.id(), var), d.clone());
    d
}

fn rule(e: &Expr, var: Var) -> Expr {
    match e.kind() {
        Kind::Const(_) | Kind::E => Expr::zero(),
        Kind::Var(v) => {
            if *v == var {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Kind::Unary(f, a) => {
            let da = differentiate(a, var);
            if da.is_zero() {
                return Expr::zero();
            }
            match f {
                Func::Neg => da.neg(),
                Func::Exp => e.mul(&da),
                Func::Log => da.div(a),
                Func::Sqrt => da.div(&e.scale(2)),
                Func::Sin => a.cos().mul(&da),
                Func::Cos => a.sin().mul(&da).neg(),
            }
        }
        Kind::Bin(op, a, b) => {
            let da = differentiate(a, var);
            let db = differentiate(b, var);
            match op {
                BinOp::Add => da.add(&db),
                BinOp::Sub => da.sub(&db),
                BinOp::Mul => da.mul(b).add(&a.mul(&db)),
                BinOp::Div => da.div(b).sub(&a.mul(&db).div(&b.square())),
                BinOp::Pow => {
                    if db.is_zero() {
                        if da.is_zero() {
                            return Expr::zero();
                        }
                        // b is free of var: b a^(b-1) a'
                        let lowered = a.pow(&b.sub(&Expr::one()));
                        b.mul(&lowered).mul(&da)
                    } else if da.is_zero() {
                        e.mul(&a.ln()).mul(&db)
                    } else {
                        e.mul(&db.mul(&a.ln()).add(&b.mul(&da).div(a)))
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{parse, Var};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn product_rule() {
        let e = parse("x*y").unwrap();
        assert_eq!(e.dx(), parse("y").unwrap());
    }

    #[test]
    fn quotient_rule() {
        let d = parse("x/y").unwrap().dy();
        for (x, y) in [(1.0, 2.0), (3.0, -0.5)] {
            assert!(close(d.eval_xy(x, y).unwrap(), -x / (y * y)));
        }
    }

    #[test]
    fn mixed_log_derivative() {
        let d = parse("log((2*x+y)/x)").unwrap().dx().dy();
        for (x, y) in [(1.0f64, 1.0f64), (2.0, 0.3), (0.7, 5.0)] {
            let expected = -2.0 / (2.0 * x + y).powi(2);
            assert!(close(d.eval_xy(x, y).unwrap(), expected));
        }
    }

    #[test]
    fn repeated_calls_return_the_same_node() {
        let e = parse("sin(x*y)^3/exp(y)").unwrap();
        assert_eq!(e.diff(Var::X), e.diff(Var::X));
    }

    #[test]
    fn general_power() {
        let d = parse("x^y").unwrap().dx();
        assert!(close(d.eval_xy(2.0, 3.0).unwrap(), 12.0));
        let d = parse("x^y").unwrap().dy();
        assert!(close(d.eval_xy(2.0, 3.0).unwrap(), 8.0 * 2f64.ln()));
    }
}
