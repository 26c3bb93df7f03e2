//! Exact evaluation of rational functions in the prime field `Z/p`,
//! `p = 2^61 - 1`.
//!
//! A nonzero rational function of low degree vanishes at a uniformly random
//! point of `(Z/p)^2` with probability at most `deg / p`, so a handful of
//! modular samples decides identities that floating point cannot resolve
//! after heavy cancellation.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use super::{BinOp, Expr, Func, Kind, Var};

pub const MODULUS: u64 = (1 << 61) - 1;

fn reduce(v: u128) -> u64 {
    let p = MODULUS as u128;
    let r = (v & p) + (v >> 61);
    let r = (r & p) + (r >> 61);
    (r % p) as u64
}

fn mul(a: u64, b: u64) -> u64 {
    reduce(a as u128 * b as u128)
}

fn add(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= MODULUS {
        s - MODULUS
    } else {
        s
    }
}

fn sub(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + MODULUS - b
    }
}

fn pow(mut a: u64, mut n: u64) -> u64 {
    let mut acc = 1;
    while n > 0 {
        if n & 1 == 1 {
            acc = mul(acc, a);
        }
        a = mul(a, a);
        n >>= 1;
    }
    acc
}

fn inverse(a: u64) -> Option<u64> {
    (a != 0).then(|| pow(a, MODULUS - 2))
}

fn from_bigint(n: &BigInt) -> u64 {
    let r = (n.abs() % BigInt::from(MODULUS)).to_u64().expect("reduced below p");
    if n.is_negative() {
        sub(0, r)
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    /// A constant whose denominator is divisible by `p` cannot be evaluated.
    Const(Option<u64>),
    Var(Var),
    Neg(u32),
    Bin(BinOp, u32, u32),
    Powi(u32, i64),
}

/// A rational-function DAG compiled for evaluation modulo [`MODULUS`].
pub struct ModTape {
    ops: Vec<Op>,
    roots: Vec<u32>,
}

impl ModTape {
    /// `None` if some root involves `e`, a transcendental function or a
    /// non-integer power.
    pub fn compile(roots: &[Expr]) -> Option<ModTape> {
        let mut index: HashMap<u64, u32> = HashMap::new();
        let mut ops = Vec::new();
        let mut root_slots = Vec::with_capacity(roots.len());
        for root in roots {
            let mut stack: Vec<(Expr, bool)> = vec![(root.clone(), false)];
            while let Some((e, expanded)) = stack.pop() {
                if index.contains_key(&e.id()) {
                    continue;
                }
                if !expanded {
                    stack.push((e.clone(), true));
                    match e.kind() {
                        Kind::Bin(BinOp::Pow, a, _) => stack.push((a.clone(), false)),
                        Kind::Bin(_, a, b) => {
                            stack.push((b.clone(), false));
                            stack.push((a.clone(), false));
                        }
                        Kind::Unary(_, a) => stack.push((a.clone(), false)),
                        _ => {}
                    }
                    continue;
                }
                let op = match e.kind() {
                    Kind::Const(q) => Op::Const(
                        inverse(from_bigint(q.denom())).map(|d| mul(from_bigint(q.numer()), d)),
                    ),
                    Kind::E => return None,
                    Kind::Var(v) => Op::Var(*v),
                    Kind::Unary(Func::Neg, a) => Op::Neg(index[&a.id()]),
                    Kind::Unary(..) => return None,
                    Kind::Bin(BinOp::Pow, a, b) => {
                        let q = b.as_const().filter(|q| q.is_integer())?;
                        Op::Powi(index[&a.id()], q.to_integer().to_i64()?)
                    }
                    Kind::Bin(op, a, b) => Op::Bin(*op, index[&a.id()], index[&b.id()]),
                };
                index.insert(e.id(), ops.len() as u32);
                ops.push(op);
            }
            root_slots.push(index[&root.id()]);
        }
        Some(ModTape {
            ops,
            roots: root_slots,
        })
    }

    /// Values of the roots at `(x, y)`; `None` if a denominator vanishes.
    pub fn eval(&self, x: u64, y: u64) -> Option<Vec<u64>> {
        let (x, y) = (x % MODULUS, y % MODULUS);
        let mut v: Vec<u64> = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let value = match *op {
                Op::Const(c) => c?,
                Op::Var(Var::X) => x,
                Op::Var(Var::Y) => y,
                Op::Var(_) => return None,
                Op::Neg(a) => sub(0, v[a as usize]),
                Op::Powi(a, n) => {
                    let base = v[a as usize];
                    if n >= 0 {
                        pow(base, n as u64)
                    } else {
                        inverse(pow(base, n.unsigned_abs()))?
                    }
                }
                Op::Bin(op, a, b) => {
                    let (a, b) = (v[a as usize], v[b as usize]);
                    match op {
                        BinOp::Add => add(a, b),
                        BinOp::Sub => sub(a, b),
                        BinOp::Mul => mul(a, b),
                        BinOp::Div => mul(a, inverse(b)?),
                        BinOp::Pow => unreachable!("compiled as Powi"),
                    }
                }
            };
            v.push(value);
        }
        Some(self.roots.iter().map(|&r| v[r as usize]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn field_arithmetic() {
        assert_eq!(mul(MODULUS - 1, MODULUS - 1), 1);
        assert_eq!(mul(inverse(12345).unwrap(), 12345), 1);
        assert_eq!(from_bigint(&BigInt::from(-1)), MODULUS - 1);
    }

    #[test]
    fn identities_vanish_exactly() {
        let e = parse("(x + y)^2 - x^2 - 2*x*y - y^2 + 1/(x*y) - 1/x/y").unwrap();
        let t = ModTape::compile(&[e]).unwrap();
        assert_eq!(t.eval(123456789, 987654321).unwrap(), vec![0]);
        let half = parse("x/2").unwrap();
        let t = ModTape::compile(&[half]).unwrap();
        assert_eq!(mul(t.eval(7, 0).unwrap()[0], 2), 7);
    }

    #[test]
    fn transcendental_is_rejected() {
        assert!(ModTape::compile(&[parse("exp(x)").unwrap()]).is_none());
        assert!(ModTape::compile(&[parse("x^(1/2)").unwrap()]).is_none());
        assert!(ModTape::compile(&[parse("1/(x - y)").unwrap()]).unwrap().eval(3, 3).is_none());
    }
}
