use std::collections::HashMap;

use num_traits::ToPrimitive;

use super::{BinOp, Expr, Func, Kind, Var};

/// Variable assignment used during evaluation.
#[derive(Debug, Clone, Default)]
pub struct Env {
    values: [Option<f64>; 6],
}

fn slot(v: Var) -> usize {
    match v {
        Var::X => 0,
        Var::Y => 1,
        Var::T => 2,
        Var::U1 => 3,
        Var::U2 => 4,
        Var::U3 => 5,
    }
}

impl Env {
    pub fn xy(x: f64, y: f64) -> Env {
        Env::default().with(Var::X, x).with(Var::Y, y)
    }

    pub fn with(mut self, v: Var, value: f64) -> Env {
        self.values[slot(v)] = Some(value);
        self
    }

    pub fn get(&self, v: Var) -> Option<f64> {
        self.values[slot(v)]
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero in `{0}`")]
    DivisionByZero(String),
    #[error("logarithm of non-positive value {value} in `{expr}`")]
    LogDomain { expr: String, value: f64 },
    #[error("square root of negative value {value} in `{expr}`")]
    SqrtDomain { expr: String, value: f64 },
    #[error("negative base {base} raised to non-integer power in `{expr}`")]
    PowDomain { expr: String, base: f64 },
    #[error("non-finite value in `{0}`")]
    NonFinite(String),
    #[error("variable `{0}` is not bound")]
    Unbound(&'static str),
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Const(f64),
    Var(Var),
    Bin(BinOp, u32, u32),
    /// Power with a small integer exponent.
    Powi(u32, i32),
    Unary(Func, u32),
}

/// A DAG flattened into topological order, for repeated evaluation.
///
/// Shared subterms are evaluated once per point.
pub struct Tape {
    ops: Vec<Op>,
    nodes: Vec<Expr>,
    roots: Vec<u32>,
}

impl Tape {
    pub fn compile(roots: &[Expr]) -> Tape {
        let mut index: HashMap<u64, u32> = HashMap::new();
        let mut ops = Vec::new();
        let mut nodes = Vec::new();
        let mut root_slots = Vec::with_capacity(roots.len());
        for root in roots {
            // iterative post-order
            let mut stack: Vec<(Expr, bool)> = vec![(root.clone(), false)];
            while let Some((e, expanded)) = stack.pop() {
                if index.contains_key(&e.id()) {
                    continue;
                }
                if !expanded {
                    stack.push((e.clone(), true));
                    match e.kind() {
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
                    Kind::Const(q) => Op::Const(q.to_f64().unwrap_or(f64::NAN)),
                    Kind::E => Op::Const(std::f64::consts::E),
                    Kind::Var(v) => Op::Var(*v),
                    Kind::Unary(f, a) => Op::Unary(*f, index[&a.id()]),
                    Kind::Bin(BinOp::Pow, a, b) => {
                        let small_int = b.as_const().and_then(|q| {
                            if q.is_integer() {
                                q.to_integer().to_i32().filter(|n| n.abs() <= 1024)
                            } else {
                                None
                            }
                        });
                        match small_int {
                            Some(n) => Op::Powi(index[&a.id()], n),
                            None => Op::Bin(BinOp::Pow, index[&a.id()], index[&b.id()]),
                        }
                    }
                    Kind::Bin(op, a, b) => Op::Bin(*op, index[&a.id()], index[&b.id()]),
                };
                index.insert(e.id(), ops.len() as u32);
                ops.push(op);
                nodes.push(e);
            }
            root_slots.push(index[&root.id()]);
        }
        Tape {
            ops,
            nodes,
            roots: root_slots,
        }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Evaluate every slot. Returns the full slot vector.
    pub fn eval_slots(&self, env: &Env) -> Result<Vec<f64>, EvalError> {
        let mut v: Vec<f64> = Vec::with_capacity(self.ops.len());
        for (i, op) in self.ops.iter().enumerate() {
            let value = match *op {
                Op::Const(c) => c,
                Op::Var(var) => env.get(var).ok_or(EvalError::Unbound(var.name()))?,
                Op::Powi(a, n) => v[a as usize].powi(n),
                Op::Unary(f, a) => {
                    let a = v[a as usize];
                    match f {
                        Func::Neg => -a,
                        Func::Exp => a.exp(),
                        Func::Log => {
                            if a <= 0.0 {
                                return Err(EvalError::LogDomain {
                                    expr: self.nodes[i].abbreviated(160),
                                    value: a,
                                });
                            }
                            a.ln()
                        }
                        Func::Sqrt => {
                            if a < 0.0 {
                                return Err(EvalError::SqrtDomain {
                                    expr: self.nodes[i].abbreviated(160),
                                    value: a,
                                });
                            }
                            a.sqrt()
                        }
                        Func::Sin => a.sin(),
                        Func::Cos => a.cos(),
                    }
                }
                Op::Bin(op, a, b) => {
                    let (a, b) = (v[a as usize], v[b as usize]);
                    match op {
                        BinOp::Add => a + b,
                        BinOp::Sub => a - b,
                        BinOp::Mul => a * b,
                        BinOp::Div => {
                            if b == 0.0 {
                                return Err(EvalError::DivisionByZero(self.nodes[i].abbreviated(160)));
                            }
                            a / b
                        }
                        BinOp::Pow => {
                            if a < 0.0 && b.fract() != 0.0 {
                                return Err(EvalError::PowDomain {
                                    expr: self.nodes[i].abbreviated(160),
                                    base: a,
                                });
                            }
                            a.powf(b)
                        }
                    }
                }
            };
            if !value.is_finite() {
                return Err(EvalError::NonFinite(self.nodes[i].abbreviated(160)));
            }
            v.push(value);
        }
        Ok(v)
    }

    pub fn eval(&self, env: &Env) -> Result<Vec<f64>, EvalError> {
        let slots = self.eval_slots(env)?;
        Ok(self.roots.iter().map(|&r| slots[r as usize]).collect())
    }

    pub fn eval_one(&self, env: &Env) -> Result<f64, EvalError> {
        Ok(self.eval(env)?[0])
    }

    /// Value of the first root together with its rounding scale: the
    /// first-order sensitivity of the result to relative perturbations of
    /// every leaf, `Σ |∂e/∂leaf| |leaf|`, propagated through the DAG.
    ///
    /// Cancellation leaves the value tiny compared to the scale, while a
    /// genuinely small quantity (a product of small factors, say) has a
    /// scale of the same size as its value.
    pub(crate) fn eval_with_scale(&self, env: &Env) -> Result<(f64, f64), EvalError> {
        let v = self.eval_slots(env)?;
        let mut m: Vec<f64> = Vec::with_capacity(v.len());
        for (i, op) in self.ops.iter().enumerate() {
            let scale = match *op {
                Op::Const(c) => c.abs(),
                Op::Var(_) => v[i].abs(),
                Op::Powi(a, n) => {
                    let a = a as usize;
                    if n == 0 {
                        0.0
                    } else {
                        (n as f64).abs() * v[a].abs().powi(n - 1) * m[a]
                    }
                }
                Op::Unary(f, a) => {
                    let (x, mx) = (v[a as usize], m[a as usize]);
                    match f {
                        Func::Neg => mx,
                        Func::Exp => v[i].abs() * mx,
                        Func::Log => mx / x.abs(),
                        Func::Sqrt => mx / (2.0 * v[i].abs()),
                        Func::Sin => x.cos().abs() * mx,
                        Func::Cos => x.sin().abs() * mx,
                    }
                }
                Op::Bin(op, a, b) => {
                    let (a, b) = (a as usize, b as usize);
                    let (x, y) = (v[a], v[b]);
                    match op {
                        BinOp::Add | BinOp::Sub => m[a] + m[b],
                        BinOp::Mul => m[a] * y.abs() + x.abs() * m[b],
                        BinOp::Div => m[a] / y.abs() + x.abs() * m[b] / (y * y),
                        BinOp::Pow => {
                            let r = v[i].abs();
                            let log_part = if x > 0.0 { x.ln().abs() * m[b] } else { 0.0 };
                            r * ((y * m[a] / x).abs() + log_part)
                        }
                    }
                }
            };
            // keep the scale at least as large as the value itself
            m.push(if scale.is_finite() { scale.max(v[i].abs()) } else { f64::INFINITY });
        }
        let r = self.roots[0] as usize;
        Ok((v[r], m[r]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn plain_values() {
        assert_eq!(parse("x + y").unwrap().eval_xy(1.0, 2.0).unwrap(), 3.0);
        let e = parse("2/(x*(2*x+y)^3)").unwrap();
        assert!((e.eval_xy(1.0, 1.0).unwrap() - 2.0 / 27.0).abs() < 1e-15);
    }

    #[test]
    fn domain_errors_name_the_subtree() {
        let err = parse("log(x-y)").unwrap().eval_xy(1.0, 2.0).unwrap_err();
        match err {
            EvalError::LogDomain { expr, value } => {
                assert_eq!(expr, "log(x - y)");
                assert_eq!(value, -1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse("1/(x-1)").unwrap().eval_xy(1.0, 0.0),
            Err(EvalError::DivisionByZero(_))
        ));
        assert!(matches!(
            parse("sqrt(y)").unwrap().eval_xy(1.0, -1.0),
            Err(EvalError::SqrtDomain { .. })
        ));
    }

    #[test]
    fn unbound_variable() {
        let e = parse_t();
        assert!(matches!(e.eval_xy(1.0, 1.0), Err(EvalError::Unbound("t"))));
        assert_eq!(e.eval(&Env::default().with(Var::T, 2.0)).unwrap(), 4.0);
    }

    fn parse_t() -> Expr {
        crate::expr::parse_with("t^2", &[Var::T]).unwrap()
    }
}
