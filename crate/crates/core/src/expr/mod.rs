//! Symbolic expressions in a handful of real variables.
//!
//! Expressions are hash-consed: every structurally distinct node is created
//! exactly once and carries a process-unique id, so structural equality is
//! pointer equality and repeated subterms are shared. Derivatives are
//! memoized per node, which keeps the DAG size of high-order invariants
//! polynomial in the number of differentiations.
//!
//! There is no general simplifier. The smart constructors only fold
//! constants, apply the 0/1 identities and collapse negations.

mod diff;
mod eval;
pub mod modular;
mod parse;
mod print;
pub(crate) mod zero;

use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, LazyLock};

use dashmap::DashMap;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub use eval::{Env, EvalError, Tape};
pub use parse::{parse, parse_with, ParseError};
pub use zero::{SampleBox, SampleConfig, SampledCheck, ZeroTestError, DEFAULT_NODE_CAP};

/// Variables an expression may mention.
///
/// `X`/`Y` are the plane coordinates, `T` is the argument of the one-variable
/// functions in abelian relations and `U1..U3` are the ambient coordinates of
/// a web equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Var {
    X,
    Y,
    T,
    U1,
    U2,
    U3,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::T => "t",
            Var::U1 => "u1",
            Var::U2 => "u2",
            Var::U3 => "u3",
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        Some(match name {
            "x" => Var::X,
            "y" => Var::Y,
            "t" => Var::T,
            "u1" => Var::U1,
            "u2" => Var::U2,
            "u3" => Var::U3,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Neg,
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Neg => "-",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug)]
pub enum Kind {
    Const(BigRational),
    /// Euler's number.
    E,
    Var(Var),
    Bin(BinOp, Expr, Expr),
    Unary(Func, Expr),
}

#[derive(Debug)]
pub struct Node {
    id: u64,
    kind: Kind,
}

/// Immutable, shared expression handle.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

#[derive(PartialEq, Eq, Hash)]
enum Key {
    Const(BigRational),
    E,
    Var(Var),
    Bin(BinOp, u64, u64),
    Unary(Func, u64),
}

static NEXT_ID: AtomicU64 = AtomicU64::new(0);
static TABLE: LazyLock<DashMap<Key, Expr>> = LazyLock::new(DashMap::new);

fn intern(key: Key, make: impl FnOnce() -> Kind) -> Expr {
    if let Some(e) = TABLE.get(&key) {
        return e.clone();
    }
    TABLE
        .entry(key)
        .or_insert_with(|| {
            Expr(Arc::new(Node {
                id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
                kind: make(),
            }))
        })
        .clone()
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.0.id == other.0.id
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.id.hash(state)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl Expr {
    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub fn constant(q: BigRational) -> Expr {
        intern(Key::Const(q.clone()), || Kind::Const(q))
    }

    pub fn int(n: i64) -> Expr {
        Expr::constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(num: i64, den: i64) -> Expr {
        Expr::constant(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn e() -> Expr {
        intern(Key::E, || Kind::E)
    }

    pub fn var(v: Var) -> Expr {
        intern(Key::Var(v), || Kind::Var(v))
    }

    pub fn x() -> Expr {
        Expr::var(Var::X)
    }

    pub fn y() -> Expr {
        Expr::var(Var::Y)
    }

    pub fn as_const(&self) -> Option<&BigRational> {
        match self.kind() {
            Kind::Const(q) => Some(q),
            _ => None,
        }
    }

    pub fn is_const(&self) -> bool {
        matches!(self.kind(), Kind::Const(_) | Kind::E)
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(|q| q.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(|q| q.is_one())
    }

    fn is_negative_const(&self) -> bool {
        self.as_const().is_some_and(|q| q.is_negative())
    }

    fn neg_operand(&self) -> Option<&Expr> {
        match self.kind() {
            Kind::Unary(Func::Neg, a) => Some(a),
            _ => None,
        }
    }

    fn raw_bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        intern(Key::Bin(op, a.id(), b.id()), || Kind::Bin(op, a, b))
    }

    fn raw_unary(f: Func, a: Expr) -> Expr {
        intern(Key::Unary(f, a.id()), || Kind::Unary(f, a))
    }

    pub fn add(&self, other: &Expr) -> Expr {
        let (a, b) = (self, other);
        if let (Some(p), Some(q)) = (a.as_const(), b.as_const()) {
            return Expr::constant(p + q);
        }
        if a.is_zero() {
            return b.clone();
        }
        if b.is_zero() {
            return a.clone();
        }
        if let Some(c) = b.neg_operand() {
            return a.sub(c);
        }
        if b.is_negative_const() {
            return a.sub(&b.neg());
        }
        if let Some(c) = a.neg_operand() {
            return b.sub(c);
        }
        Expr::raw_bin(BinOp::Add, a.clone(), b.clone())
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        let (a, b) = (self, other);
        if let (Some(p), Some(q)) = (a.as_const(), b.as_const()) {
            return Expr::constant(p - q);
        }
        if b.is_zero() {
            return a.clone();
        }
        if a == b {
            return Expr::zero();
        }
        if a.is_zero() {
            return b.neg();
        }
        if let Some(c) = b.neg_operand() {
            return a.add(c);
        }
        if b.is_negative_const() {
            return a.add(&b.neg());
        }
        Expr::raw_bin(BinOp::Sub, a.clone(), b.clone())
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        let (a, b) = (self, other);
        if let (Some(p), Some(q)) = (a.as_const(), b.as_const()) {
            return Expr::constant(p * q);
        }
        if a.is_zero() || b.is_zero() {
            return Expr::zero();
        }
        if a.is_one() {
            return b.clone();
        }
        if b.is_one() {
            return a.clone();
        }
        if let Some(c) = a.neg_operand() {
            return c.mul(b).neg();
        }
        if let Some(c) = b.neg_operand() {
            return a.mul(c).neg();
        }
        if a.is_negative_const() {
            return a.neg().mul(b).neg();
        }
        if b.is_negative_const() {
            return a.mul(&b.neg()).neg();
        }
        Expr::raw_bin(BinOp::Mul, a.clone(), b.clone())
    }

    pub fn div(&self, other: &Expr) -> Expr {
        let (a, b) = (self, other);
        if let (Some(p), Some(q)) = (a.as_const(), b.as_const()) {
            if !q.is_zero() {
                return Expr::constant(p / q);
            }
        }
        if b.is_one() {
            return a.clone();
        }
        if a.is_zero() && !b.is_zero() {
            return Expr::zero();
        }
        if a == b && !b.is_zero() {
            return Expr::one();
        }
        if let Some(c) = a.neg_operand() {
            return c.div(b).neg();
        }
        if let Some(c) = b.neg_operand() {
            return a.div(c).neg();
        }
        if a.is_negative_const() {
            return a.neg().div(b).neg();
        }
        if b.is_negative_const() {
            return a.div(&b.neg()).neg();
        }
        Expr::raw_bin(BinOp::Div, a.clone(), b.clone())
    }

    pub fn pow(&self, exponent: &Expr) -> Expr {
        let (a, b) = (self, exponent);
        if b.is_zero() {
            return Expr::one();
        }
        if b.is_one() {
            return a.clone();
        }
        if a.is_one() {
            return Expr::one();
        }
        if let (Some(base), Some(q)) = (a.as_const(), b.as_const()) {
            if q.is_integer() {
                if let Some(n) = q.to_integer().to_i32() {
                    if n.abs() <= 64 && !(base.is_zero() && n < 0) {
                        return Expr::constant(rational_powi(base, n));
                    }
                }
            }
        }
        if a.is_zero() && b.as_const().is_some_and(|q| q.is_positive()) {
            return Expr::zero();
        }
        Expr::raw_bin(BinOp::Pow, a.clone(), b.clone())
    }

    pub fn powi(&self, n: i64) -> Expr {
        self.pow(&Expr::int(n))
    }

    pub fn square(&self) -> Expr {
        self.powi(2)
    }

    pub fn neg(&self) -> Expr {
        if let Some(q) = self.as_const() {
            return Expr::constant(-q.clone());
        }
        if let Some(c) = self.neg_operand() {
            return c.clone();
        }
        Expr::raw_unary(Func::Neg, self.clone())
    }

    pub fn recip(&self) -> Expr {
        Expr::one().div(self)
    }

    pub fn apply(&self, f: Func) -> Expr {
        match f {
            Func::Neg => self.neg(),
            Func::Exp if self.is_zero() => Expr::one(),
            Func::Log if self.is_one() => Expr::zero(),
            Func::Log if matches!(self.kind(), Kind::E) => Expr::one(),
            Func::Sqrt if self.is_zero() || self.is_one() => self.clone(),
            Func::Sin if self.is_zero() => Expr::zero(),
            Func::Cos if self.is_zero() => Expr::one(),
            _ => Expr::raw_unary(f, self.clone()),
        }
    }

    pub fn exp(&self) -> Expr {
        self.apply(Func::Exp)
    }

    pub fn ln(&self) -> Expr {
        self.apply(Func::Log)
    }

    pub fn sqrt(&self) -> Expr {
        self.apply(Func::Sqrt)
    }

    pub fn sin(&self) -> Expr {
        self.apply(Func::Sin)
    }

    pub fn cos(&self) -> Expr {
        self.apply(Func::Cos)
    }

    pub fn scale(&self, c: i64) -> Expr {
        Expr::int(c).mul(self)
    }

    /// Number of distinct nodes reachable from this expression.
    pub fn dag_size(&self) -> usize {
        let mut seen = HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.id()) {
                continue;
            }
            match e.kind() {
                Kind::Bin(_, a, b) => {
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
                Kind::Unary(_, a) => stack.push(a.clone()),
                _ => {}
            }
        }
        seen.len()
    }

    /// Fails with [`ResourceError`] when the DAG exceeds `cap` nodes.
    pub fn check_size(&self, cap: usize) -> Result<(), ResourceError> {
        let size = self.dag_size();
        if size > cap {
            Err(ResourceError { size, cap })
        } else {
            Ok(())
        }
    }

    /// Variables occurring in the expression.
    pub fn variables(&self) -> Vec<Var> {
        let mut seen = HashSet::new();
        let mut vars = Vec::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.id()) {
                continue;
            }
            match e.kind() {
                Kind::Var(v) if !vars.contains(v) => vars.push(*v),
                Kind::Bin(_, a, b) => {
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
                Kind::Unary(_, a) => stack.push(a.clone()),
                _ => {}
            }
        }
        vars.sort();
        vars
    }

    /// Does the expression contain exp/log/sqrt/sin/cos or non-integer powers?
    pub fn is_rational_function(&self) -> bool {
        let mut seen = HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.id()) {
                continue;
            }
            match e.kind() {
                Kind::E => return false,
                Kind::Unary(Func::Neg, a) => stack.push(a.clone()),
                Kind::Unary(_, _) => return false,
                Kind::Bin(BinOp::Pow, a, b) => {
                    if !b.as_const().is_some_and(|q| q.is_integer()) {
                        return false;
                    }
                    stack.push(a.clone());
                }
                Kind::Bin(_, a, b) => {
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
                _ => {}
            }
        }
        true
    }

    /// Replace every occurrence of `var` by `by`.
    pub fn substitute(&self, var: Var, by: &Expr) -> Expr {
        let mut memo = std::collections::HashMap::new();
        subst_rec(self, var, by, &mut memo)
    }

    /// Exact symbolic partial derivative.
    pub fn diff(&self, var: Var) -> Expr {
        diff::differentiate(self, var)
    }

    pub fn dx(&self) -> Expr {
        self.diff(Var::X)
    }

    pub fn dy(&self) -> Expr {
        self.diff(Var::Y)
    }

    /// Evaluate at a plane point `(x, y)`.
    pub fn eval_xy(&self, x: f64, y: f64) -> Result<f64, EvalError> {
        Tape::compile(std::slice::from_ref(self)).eval_one(&Env::xy(x, y))
    }

    pub fn eval(&self, env: &Env) -> Result<f64, EvalError> {
        Tape::compile(std::slice::from_ref(self)).eval_one(env)
    }
}

fn subst_rec(
    e: &Expr,
    var: Var,
    by: &Expr,
    memo: &mut std::collections::HashMap<u64, Expr>,
) -> Expr {
    if let Some(r) = memo.get(&e.id()) {
        return r.clone();
    }
    let r = stacker::maybe_grow(64 * 1024, 4 * 1024 * 1024, || match e.kind() {
        Kind::Var(v) if *v == var => by.clone(),
        Kind::Const(_) | Kind::E | Kind::Var(_) => e.clone(),
        Kind::Unary(f, a) => subst_rec(a, var, by, memo).apply(*f),
        Kind::Bin(op, a, b) => {
            let a = subst_rec(a, var, by, memo);
            let b = subst_rec(b, var, by, memo);
            binary(*op, &a, &b)
        }
    });
    memo.insert(e.id(), r.clone());
    r
}

pub(crate) fn binary(op: BinOp, a: &Expr, b: &Expr) -> Expr {
    match op {
        BinOp::Add => a.add(b),
        BinOp::Sub => a.sub(b),
        BinOp::Mul => a.mul(b),
        BinOp::Div => a.div(b),
        BinOp::Pow => a.pow(b),
    }
}

fn rational_powi(base: &BigRational, n: i32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..n.unsigned_abs() {
        acc *= base;
    }
    if n < 0 {
        acc.recip()
    } else {
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("expression has {size} nodes, exceeding the cap of {cap}")]
pub struct ResourceError {
    pub size: usize,
    pub cap: usize,
}

macro_rules! impl_ops {
    ($($tr:ident $method:ident $call:ident),*) => {$(
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr { Expr::$call(&self, &rhs) }
        }
        impl std::ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr { Expr::$call(&self, rhs) }
        }
        impl std::ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr { Expr::$call(self, &rhs) }
        }
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr { Expr::$call(self, rhs) }
        }
        impl std::ops::$tr<i64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: i64) -> Expr { Expr::$call(&self, &Expr::int(rhs)) }
        }
        impl std::ops::$tr<i64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: i64) -> Expr { Expr::$call(self, &Expr::int(rhs)) }
        }
        impl std::ops::$tr<Expr> for i64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr { Expr::$call(&Expr::int(self), &rhs) }
        }
        impl std::ops::$tr<&Expr> for i64 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr { Expr::$call(&Expr::int(self), rhs) }
        }
    )*};
}

impl_ops!(Add add add, Sub sub sub, Mul mul mul, Div div div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_consing_shares_structure() {
        let a = Expr::x() + Expr::y();
        let b = Expr::x() + Expr::y();
        assert_eq!(a, b);
        assert_eq!(a.id(), b.id());
        assert_ne!(a, Expr::y() + Expr::x());
    }

    #[test]
    #[allow(clippy::erasing_op, clippy::identity_op)]
    fn local_identities() {
        let x = Expr::x();
        assert_eq!(&x + 0, x);
        assert_eq!(&x * 1, x);
        assert!((&x * 0).is_zero());
        assert!((&x - &x).is_zero());
        assert_eq!(-(-x.clone()), x);
        assert_eq!(&x - (-Expr::y()), &x + Expr::y());
        assert_eq!(Expr::int(2) / Expr::int(4), Expr::ratio(1, 2));
        assert_eq!(Expr::ratio(2, 3).powi(-2), Expr::ratio(9, 4));
        assert!(Expr::zero().exp().is_one());
    }

    #[test]
    fn substitution() {
        let e = parse("x*y + x").unwrap();
        let s = e.substitute(Var::X, &parse("y^2").unwrap());
        assert_eq!(s.eval_xy(0.0, 3.0).unwrap(), 36.0);
    }

    #[test]
    fn dag_size_counts_shared_nodes_once() {
        let s = Expr::x() + Expr::y();
        let e = &s * &s;
        assert_eq!(e.dag_size(), 4);
    }

    #[test]
    fn rational_detection() {
        assert!(parse("x/(y^2+1)").unwrap().is_rational_function());
        assert!(!parse("exp(x)").unwrap().is_rational_function());
        assert!(!parse("x^(1/2)").unwrap().is_rational_function());
    }
}
