//! Jet-coordinate operator algebra for the abelian PDE system, and the
//! reduction of the compatibility obstruction `κ` to its coefficients.
//!
//! The unknowns `u, v, w` have weight one. Jet coordinates are
//! `u_{k,l} = δ1^k δ2^l u` with every `δ2` applied before the `δ1`'s; applying
//! `δ2` to `u_{k,l}` with `k > 0` is normal-ordered with the commutation
//! relation `δ2δ1 - δ1δ2 = sK` on weight-`s` objects.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WebError};
use crate::expr::modular::ModTape;
use crate::expr::{Env, Expr, Tape};
use crate::web::{ChartedWeb, Dir};

/// Unknown function of the abelian system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Unknown {
    U,
    V,
    W,
}

impl Unknown {
    pub fn name(self) -> &'static str {
        match self {
            Unknown::U => "u",
            Unknown::V => "v",
            Unknown::W => "w",
        }
    }
}

/// Jet coordinate `sym_{k,l}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Jet {
    pub sym: Unknown,
    pub k: u8,
    pub l: u8,
}

impl Jet {
    pub fn new(sym: Unknown, k: u8, l: u8) -> Jet {
        Jet { sym, k, l }
    }

    pub fn order(self) -> u8 {
        self.k + self.l
    }

    pub fn weight(self) -> i32 {
        1 + self.order() as i32
    }
}

impl fmt::Display for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.sym.name())?;
        if self.order() > 0 {
            f.write_str("_")?;
            for _ in 0..self.k {
                f.write_str("1")?;
            }
            for _ in 0..self.l {
                f.write_str("2")?;
            }
        }
        Ok(())
    }
}

/// Homogeneous linear combination of jet coordinates. Every coefficient has
/// weight `weight - jet.weight()`.
#[derive(Debug, Clone, PartialEq)]
pub struct JetPolynomial {
    weight: i32,
    terms: BTreeMap<Jet, Expr>,
}

impl JetPolynomial {
    pub fn zero(weight: i32) -> JetPolynomial {
        JetPolynomial {
            weight,
            terms: BTreeMap::new(),
        }
    }

    pub fn jet(jet: Jet) -> JetPolynomial {
        let mut p = JetPolynomial::zero(jet.weight());
        p.terms.insert(jet, Expr::one());
        p
    }

    pub fn unknown(sym: Unknown) -> JetPolynomial {
        JetPolynomial::jet(Jet::new(sym, 0, 0))
    }

    pub fn weight(&self) -> i32 {
        self.weight
    }

    pub fn terms(&self) -> &BTreeMap<Jet, Expr> {
        &self.terms
    }

    pub fn coefficient(&self, jet: Jet) -> Expr {
        self.terms.get(&jet).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest jet order present.
    pub fn order(&self) -> Option<u8> {
        self.terms.keys().map(|j| j.order()).max()
    }

    fn add_term(&mut self, jet: Jet, c: &Expr) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.get(&jet) {
            Some(old) => old.add(c),
            None => c.clone(),
        };
        if sum.is_zero() {
            self.terms.remove(&jet);
        } else {
            self.terms.insert(jet, sum);
        }
    }

    fn check_weight(&self, other: &JetPolynomial) {
        assert!(
            self.is_empty() || other.is_empty() || self.weight == other.weight,
            "adding jet polynomials of weights {} and {}",
            self.weight,
            other.weight
        );
    }

    pub fn add(&self, other: &JetPolynomial) -> JetPolynomial {
        self.check_weight(other);
        let mut out = self.clone();
        if out.is_empty() {
            out.weight = other.weight;
        }
        for (j, c) in &other.terms {
            out.add_term(*j, c);
        }
        out
    }

    pub fn sub(&self, other: &JetPolynomial) -> JetPolynomial {
        self.add(&other.scale(&Expr::int(-1), 0))
    }

    /// Multiply by a function of weight `w`.
    pub fn scale(&self, c: &Expr, w: i32) -> JetPolynomial {
        let mut out = JetPolynomial::zero(self.weight + w);
        if c.is_zero() {
            return out;
        }
        for (j, e) in &self.terms {
            out.add_term(*j, &e.mul(c));
        }
        out
    }

    /// Drop the term of `jet`.
    fn without(&self, jet: Jet) -> JetPolynomial {
        let mut out = self.clone();
        out.terms.remove(&jet);
        out
    }

    fn map_coefficients(&self, f: impl Fn(&Expr) -> Expr) -> JetPolynomial {
        let mut out = JetPolynomial::zero(self.weight);
        for (j, c) in &self.terms {
            out.add_term(*j, &f(c));
        }
        out
    }
}

impl fmt::Display for JetPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (j, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({})*{}", c.abbreviated(120), j)?;
        }
        Ok(())
    }
}

/// Covariant derivatives acting on jet polynomials over a charted web.
pub struct JetCalculus<'a> {
    web: &'a ChartedWeb,
    k: Expr,
    jet_cache: std::cell::RefCell<HashMap<(Dir, Jet), JetPolynomial>>,
}

impl<'a> JetCalculus<'a> {
    pub fn new(web: &'a ChartedWeb) -> JetCalculus<'a> {
        JetCalculus {
            web,
            k: web.curvature(),
            jet_cache: Default::default(),
        }
    }

    pub fn web(&self) -> &ChartedWeb {
        self.web
    }

    /// `δ_dir` of a single jet coordinate, normal ordered.
    pub fn delta_jet(&self, dir: Dir, jet: Jet) -> JetPolynomial {
        if let Some(p) = self.jet_cache.borrow().get(&(dir, jet)) {
            return p.clone();
        }
        let out = match (dir, jet.k) {
            (Dir::One, _) => JetPolynomial::jet(Jet::new(jet.sym, jet.k + 1, jet.l)),
            (Dir::Two, 0) => JetPolynomial::jet(Jet::new(jet.sym, 0, jet.l + 1)),
            (Dir::Two, k) => {
                // δ2 δ1 X = δ1 δ2 X + s K X for X of weight s
                let lower = Jet::new(jet.sym, k - 1, jet.l);
                let swapped = self.delta(Dir::One, &self.delta_jet(Dir::Two, lower));
                let s = lower.weight() as i64;
                swapped.add(&JetPolynomial::jet(lower).scale(&self.k.scale(s), 2))
            }
        };
        self.jet_cache.borrow_mut().insert((dir, jet), out.clone());
        out
    }

    /// `δ_dir` of a jet polynomial (Leibniz rule on every term).
    pub fn delta(&self, dir: Dir, p: &JetPolynomial) -> JetPolynomial {
        let mut out = JetPolynomial::zero(p.weight + 1);
        for (jet, c) in &p.terms {
            let cw = p.weight - jet.weight();
            let dc = self.web.delta(dir, c, cw);
            out.add_term(*jet, &dc);
            out = out.add(&self.delta_jet(dir, *jet).scale(c, cw));
        }
        out
    }

    pub fn apply_atom(&self, atom: &Atom, p: &JetPolynomial) -> JetPolynomial {
        match atom {
            Atom::Delta(dir) => self.delta(*dir, p),
            Atom::Mul(c, w) => p.scale(c, *w),
        }
    }

    /// Apply the atoms of `word` right to left.
    pub fn apply_word(&self, word: &OperatorWord, p: &JetPolynomial) -> JetPolynomial {
        word.atoms
            .iter()
            .rev()
            .fold(p.clone(), |acc, atom| self.apply_atom(atom, &acc))
    }

    pub fn apply(&self, op: &Operator, p: &JetPolynomial) -> JetPolynomial {
        let mut out = JetPolynomial::zero(p.weight + op.degree_weight());
        for (c, word) in &op.terms {
            out = out.add(&self.apply_word(word, p).scale(&Expr::int(*c), 0));
        }
        out
    }

    /// Apply the factors right to left, `ops = [A, B, C]` meaning `A∘B∘C`.
    pub fn apply_composition(&self, ops: &[Operator], p: &JetPolynomial) -> JetPolynomial {
        ops.iter().rev().fold(p.clone(), |acc, op| self.apply(op, &acc))
    }
}

/// Operator building block.
#[derive(Debug, Clone, PartialEq)]
pub enum Atom {
    Delta(Dir),
    /// Multiplication by a function of the given weight.
    Mul(Expr, i32),
}

/// A composition of atoms, applied right to left.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OperatorWord {
    pub atoms: Vec<Atom>,
}

impl OperatorWord {
    pub fn new(atoms: Vec<Atom>) -> OperatorWord {
        OperatorWord { atoms }
    }

    fn weight(&self) -> i32 {
        self.atoms
            .iter()
            .map(|a| match a {
                Atom::Delta(_) => 1,
                Atom::Mul(_, w) => *w,
            })
            .sum()
    }
}

/// Integer combination of operator words of equal weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    pub terms: Vec<(i64, OperatorWord)>,
}

impl Operator {
    pub fn delta(dir: Dir) -> Operator {
        Operator {
            terms: vec![(1, OperatorWord::new(vec![Atom::Delta(dir)]))],
        }
    }

    /// `Δ = δ1 - δ2∘a` for a basic invariant `a` (weight zero).
    pub fn big_delta(a: &Expr) -> Operator {
        let second = if a.is_one() {
            OperatorWord::new(vec![Atom::Delta(Dir::Two)])
        } else {
            OperatorWord::new(vec![Atom::Delta(Dir::Two), Atom::Mul(a.clone(), 0)])
        };
        Operator {
            terms: vec![
                (1, OperatorWord::new(vec![Atom::Delta(Dir::One)])),
                (-1, second),
            ],
        }
    }

    fn degree_weight(&self) -> i32 {
        self.terms.first().map(|(_, w)| w.weight()).unwrap_or(0)
    }
}

/// Which form of the 4-web obstruction to expand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kappa4Form {
    /// `(Δ1Δ2δ1 - δ1Δ2Δ1)u + (Δ1Δ2δ1 - Δ1δ1Δ2)v`; every term vanishes on
    /// solutions of the abelian system.
    Compatibility,
    /// `(Δ1Δ2δ1 - δ1Δ1Δ2)u + (Δ1Δ2δ1 - Δ1δ1Δ2)v`, with `Δ1Δ2` in the
    /// subtracted `u` term. It does not vanish on solutions.
    Transposed,
}

fn difference(
    calc: &JetCalculus<'_>,
    plus: &[Operator],
    minus: &[Operator],
    sym: Unknown,
) -> JetPolynomial {
    let p = JetPolynomial::unknown(sym);
    calc.apply_composition(plus, &p)
        .sub(&calc.apply_composition(minus, &p))
}

/// Unreduced `κ` of a 4-web in the given form.
pub fn kappa_4web(calc: &JetCalculus<'_>, a: &Expr, form: Kappa4Form) -> JetPolynomial {
    let d1 = Operator::delta(Dir::One);
    let b1 = Operator::big_delta(&Expr::one());
    let b2 = Operator::big_delta(a);
    let lead = [b1.clone(), b2.clone(), d1.clone()];
    let u_minus = match form {
        Kappa4Form::Compatibility => [d1.clone(), b2.clone(), b1.clone()],
        Kappa4Form::Transposed => [d1.clone(), b1.clone(), b2.clone()],
    };
    let u = difference(calc, &lead, &u_minus, Unknown::U);
    let v = difference(calc, &lead, &[b1, d1, b2], Unknown::V);
    u.add(&v)
}

/// Unreduced `κ` of a 5-web with basic invariants `a` (for `u`) and `b`
/// (for `v`).
pub fn kappa_5web(calc: &JetCalculus<'_>, a: &Expr, b: &Expr) -> JetPolynomial {
    let d1 = Operator::delta(Dir::One);
    let b1 = Operator::big_delta(&Expr::one());
    let b2 = Operator::big_delta(a);
    let b3 = Operator::big_delta(b);
    let lead = [b1.clone(), b2.clone(), b3.clone(), d1.clone()];
    let w = difference(
        calc,
        &lead,
        &[d1.clone(), b2.clone(), b3.clone(), b1.clone()],
        Unknown::W,
    );
    let u = difference(
        calc,
        &lead,
        &[b1.clone(), d1.clone(), b3.clone(), b2.clone()],
        Unknown::U,
    );
    let v = difference(calc, &lead, &[b1, b2, d1, b3], Unknown::V);
    w.add(&u).add(&v)
}

/// Base equations of the abelian system, `(Δ_i applied to its unknown,
/// δ1 of the sum of unknowns)`.
pub fn abelian_system(calc: &JetCalculus<'_>, invariants: &[(Unknown, Expr)]) -> Vec<JetPolynomial> {
    let mut out = Vec::new();
    let mut sum = JetPolynomial::zero(1);
    for (sym, a) in invariants {
        let p = JetPolynomial::unknown(*sym);
        out.push(calc.apply(&Operator::big_delta(a), &p));
        sum = sum.add(&p);
    }
    out.push(calc.delta(Dir::One, &sum));
    out
}

/// Base equations and all their `δ` prolongations up to `depth` extra orders.
pub fn prolong(calc: &JetCalculus<'_>, base: &[JetPolynomial], depth: usize) -> Vec<JetPolynomial> {
    let mut all = base.to_vec();
    let mut layer = base.to_vec();
    for _ in 0..depth {
        let mut next = Vec::new();
        for dir in [Dir::One, Dir::Two] {
            next.extend(layer.iter().map(|e| calc.delta(dir, e)));
        }
        all.extend(next.iter().cloned());
        layer = next;
    }
    all
}

/// Fixed residues for the exact probe of rational coefficients.
const MODULAR_PROBES: [(u64, u64); 3] = [
    (0x1d2c_3b4a_5968_7786, 0x0a1b_2c3d_4e5f_6071),
    (0x13f8_2e91_7c46_05ab, 0x1c0d_e23f_9a58_6b47),
    (0x05a7_c3e1_f092_b4d6, 0x1e6f_4a3b_2c1d_0e9f),
];

/// Numeric probe used to decide whether a coefficient vanishes.
struct Probe {
    points: Vec<(f64, f64)>,
    tolerance: f64,
}

impl Probe {
    fn new(web: &ChartedWeb, anchors: &[Expr]) -> Result<Probe> {
        let cfg = web.web().config();
        let pts = cfg.sample_many(anchors)?;
        Ok(Probe {
            points: pts.into_iter().map(|(p, _)| p).take(6).collect(),
            tolerance: 1e-7,
        })
    }

    /// Largest normalized magnitude over the probe points, or `None` when
    /// the expression cannot be evaluated at any of them.
    fn magnitude(&self, e: &Expr) -> Option<f64> {
        if let Some(q) = e.as_const() {
            return num_traits::ToPrimitive::to_f64(q).map(f64::abs);
        }
        let tape = Tape::compile(std::slice::from_ref(e));
        let mut best: Option<f64> = None;
        for &(x, y) in &self.points {
            if let Ok((v, scale)) = tape.eval_with_scale(&Env::xy(x, y)) {
                let m = crate::expr::zero::normalize(v, scale);
                best = Some(best.map_or(m, |b: f64| b.max(m)));
            }
        }
        best
    }

    /// Exact for rational coefficients, otherwise a float test.
    fn is_nonzero(&self, e: &Expr) -> bool {
        if e.is_zero() {
            return false;
        }
        if let Some(tape) = ModTape::compile(std::slice::from_ref(e)) {
            let mut seen = 0;
            for (x, y) in MODULAR_PROBES {
                if let Some(v) = tape.eval(x, y) {
                    if v[0] != 0 {
                        return true;
                    }
                    seen += 1;
                }
            }
            if seen > 0 {
                return false;
            }
        }
        self.magnitude(e).is_some_and(|m| m > self.tolerance)
    }
}

/// Order in which pivot equations are preferred during elimination.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotOrder {
    Forward,
    Reverse,
}

/// Reduce `target` modulo the span of `relations`, eliminating every jet
/// not in `basis`, highest order first.
pub fn reduce(
    calc: &JetCalculus<'_>,
    target: &JetPolynomial,
    relations: &[JetPolynomial],
    basis: &[Jet],
    order: PivotOrder,
) -> Result<JetPolynomial> {
    let basis: BTreeSet<Jet> = basis.iter().copied().collect();
    let mut anchors = vec![calc.k.clone()];
    anchors.extend(relations.iter().flat_map(|r| r.terms.values().cloned()));
    let probe = Probe::new(calc.web, &anchors)?;

    let mut rows: Vec<JetPolynomial> = relations.to_vec();
    if order == PivotOrder::Reverse {
        rows.reverse();
    }
    let mut target = target.clone();
    let mut pending: Vec<Jet> = rows
        .iter()
        .flat_map(|r| r.terms.keys().copied())
        .chain(target.terms.keys().copied())
        .filter(|j| !basis.contains(j))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    // highest order first, then canonical order
    pending.sort_by_key(|j| (std::cmp::Reverse(j.order()), *j));

    for jet in pending {
        let choice = rows
            .iter()
            .enumerate()
            .filter_map(|(n, r)| r.terms.get(&jet).map(|c| (n, c)))
            .filter(|(_, c)| probe.is_nonzero(c))
            .min_by_key(|(n, c)| (!c.is_const(), *n))
            .map(|(n, _)| n);
        let Some(n) = choice else { continue };
        let row = rows.remove(n);
        let pivot = row.coefficient(jet);
        let normalized = row.without(jet).map_coefficients(|c| c.div(&pivot));
        let eliminate = |p: &JetPolynomial| -> JetPolynomial {
            match p.terms.get(&jet) {
                None => p.clone(),
                Some(c) => {
                    let cw = p.weight - jet.weight();
                    p.without(jet).sub(&normalized.scale(c, cw))
                }
            }
        };
        rows = rows.iter().map(eliminate).collect();
        target = eliminate(&target);
    }

    let mut leftover = Vec::new();
    for (jet, c) in target.terms.clone() {
        if basis.contains(&jet) {
            continue;
        }
        if probe.is_nonzero(&c) {
            leftover.push(jet.to_string());
        } else {
            target.terms.remove(&jet);
        }
    }
    if !leftover.is_empty() {
        return Err(WebError::ReductionIncomplete(leftover.join(", ")));
    }
    Ok(target)
}

/// Reduced obstruction coefficients `κ = c0 v2 + c1 v + c2 u` of a 4-web.
#[derive(Debug, Clone)]
pub struct Kappa4 {
    pub c0: Expr,
    pub c1: Expr,
    pub c2: Expr,
    /// Factor `4 a (1 - a)` divided out of the raw coefficients so that `c0`
    /// is the curvature function.
    pub scale: Expr,
}

impl Kappa4 {
    /// Coefficients before division by [`Kappa4::scale`].
    pub fn raw(&self) -> [Expr; 3] {
        [&self.c0, &self.c1, &self.c2].map(|c| c.mul(&self.scale))
    }
}

/// Reduced obstruction `κ = c0 w22 + c1 w2 + c2 v2 + c3 w + c4 u + c5 v` of
/// a 5-web.
#[derive(Debug, Clone)]
pub struct Kappa5 {
    pub c: [Expr; 6],
    /// Factor `-10 (1 - a)(1 - b)` divided out of the raw coefficients so
    /// that `c0` is the curvature function.
    pub scale: Expr,
}

impl Kappa5 {
    /// Coefficients before division by [`Kappa5::scale`].
    pub fn raw(&self) -> [Expr; 6] {
        self.c.clone().map(|c| c.mul(&self.scale))
    }
}

pub fn kappa_reduce_4web(web: &ChartedWeb) -> Result<Kappa4> {
    kappa_reduce_4web_with(web, Kappa4Form::Compatibility, PivotOrder::Forward)
}

pub fn kappa_reduce_4web_with(web: &ChartedWeb, form: Kappa4Form, order: PivotOrder) -> Result<Kappa4> {
    if web.web().d() != 4 {
        return Err(WebError::Precondition(format!(
            "expected a 4-web, got d = {}",
            web.web().d()
        )));
    }
    let a = web.basic_invariants()?[1].clone();
    let calc = JetCalculus::new(web);
    let kappa = kappa_4web(&calc, &a, form);
    let scale = a.mul(&Expr::one().sub(&a)).scale(4);
    let base = abelian_system(&calc, &[(Unknown::U, Expr::one()), (Unknown::V, a)]);
    let relations = prolong(&calc, &base, 1);
    let v2 = Jet::new(Unknown::V, 0, 1);
    let v = Jet::new(Unknown::V, 0, 0);
    let u = Jet::new(Unknown::U, 0, 0);
    let reduced = reduce(&calc, &kappa, &relations, &[v2, v, u], order)?;
    Ok(Kappa4 {
        c0: reduced.coefficient(v2).div(&scale),
        c1: reduced.coefficient(v).div(&scale),
        c2: reduced.coefficient(u).div(&scale),
        scale,
    })
}

pub fn kappa_reduce_5web(web: &ChartedWeb) -> Result<Kappa5> {
    kappa_reduce_5web_with(web, PivotOrder::Forward)
}

pub fn kappa_reduce_5web_with(web: &ChartedWeb, order: PivotOrder) -> Result<Kappa5> {
    if web.web().d() != 5 {
        return Err(WebError::Precondition(format!(
            "expected a 5-web, got d = {}",
            web.web().d()
        )));
    }
    let inv = web.basic_invariants()?;
    let (a, b) = (inv[1].clone(), inv[2].clone());
    let scale = Expr::one()
        .sub(&a)
        .mul(&Expr::one().sub(&b))
        .scale(-10);
    let calc = JetCalculus::new(web);
    let kappa = kappa_5web(&calc, &a, &b);
    let base = abelian_system(
        &calc,
        &[(Unknown::W, Expr::one()), (Unknown::U, a), (Unknown::V, b)],
    );
    let relations = prolong(&calc, &base, 2);
    let basis = [
        Jet::new(Unknown::W, 0, 2),
        Jet::new(Unknown::W, 0, 1),
        Jet::new(Unknown::V, 0, 1),
        Jet::new(Unknown::W, 0, 0),
        Jet::new(Unknown::U, 0, 0),
        Jet::new(Unknown::V, 0, 0),
    ];
    let reduced = reduce(&calc, &kappa, &relations, &basis, order)?;
    Ok(Kappa5 {
        c: basis.map(|j| reduced.coefficient(j).div(&scale)),
        scale,
    })
}
