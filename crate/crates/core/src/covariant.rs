//! Covariant derivatives of weighted functions with respect to the Chern
//! connection of the canonical 3-subweb.

use serde::Serialize;

use crate::error::Result;
use crate::expr::Expr;
use crate::web::{ChartedWeb, Dir};

/// A function together with its weight `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedField {
    pub value: Expr,
    pub weight: i32,
}

impl WeightedField {
    pub fn new(value: Expr, weight: i32) -> WeightedField {
        WeightedField { value, weight }
    }
}

/// `δi(u) = ∂i(u) - k H u` for `u` of weight `k`; the result has weight
/// `k + 1`.
pub fn covariant_derivative(u: &WeightedField, dir: Dir, web: &ChartedWeb) -> WeightedField {
    WeightedField {
        value: web.delta(dir, &u.value, u.weight),
        weight: u.weight + 1,
    }
}

impl ChartedWeb {
    /// `δi` on a plain expression of weight `k`.
    pub fn delta(&self, dir: Dir, u: &Expr, k: i32) -> Expr {
        let d = self.partial(dir, u);
        if k == 0 {
            return d;
        }
        d.sub(&self.connection().mul(u).scale(k as i64))
    }

    /// Apply `δ`'s in the listed order: `deltas(u, k, [One, Two])` is
    /// `δ2(δ1(u))`.
    pub fn deltas(&self, u: &Expr, k: i32, word: &[Dir]) -> Expr {
        let mut out = u.clone();
        for (n, dir) in word.iter().enumerate() {
            out = self.delta(*dir, &out, k + n as i32);
        }
        out
    }

    /// Jet coordinate `u_{k,l} = δ1^k δ2^l u` (all `δ2` applied first).
    pub fn jet(&self, u: &Expr, weight: i32, k: usize, l: usize) -> Expr {
        let mut word = vec![Dir::Two; l];
        word.extend(std::iter::repeat_n(Dir::One, k));
        self.deltas(u, weight, &word)
    }
}

/// `(δ2δ1 - δ1δ2)(u) - s K u`, which vanishes identically for `u` of weight `s`.
pub fn commutation_defect(u: &WeightedField, web: &ChartedWeb) -> Expr {
    let s = u.weight;
    let d21 = web.deltas(&u.value, s, &[Dir::One, Dir::Two]);
    let d12 = web.deltas(&u.value, s, &[Dir::Two, Dir::One]);
    d21.sub(&d12)
        .sub(&web.curvature().mul(&u.value).scale(s as i64))
}

/// Covariant jets of one basic invariant, up to third order.
#[derive(Debug, Clone)]
pub struct InvariantJets {
    pub value: Expr,
    pub d1: Expr,
    pub d2: Expr,
    pub d11: Expr,
    pub d12: Expr,
    pub d22: Expr,
    pub d112: Expr,
    pub d122: Expr,
}

impl InvariantJets {
    fn new(web: &ChartedWeb, a: &Expr) -> InvariantJets {
        InvariantJets {
            value: a.clone(),
            d1: web.jet(a, 0, 1, 0),
            d2: web.jet(a, 0, 0, 1),
            d11: web.jet(a, 0, 2, 0),
            d12: web.jet(a, 0, 1, 1),
            d22: web.jet(a, 0, 0, 2),
            d112: web.jet(a, 0, 2, 1),
            d122: web.jet(a, 0, 1, 2),
        }
    }

    fn entries(&self, name: &str) -> Vec<(String, i32, Expr)> {
        [
            ("", 0, &self.value),
            ("1", 1, &self.d1),
            ("2", 1, &self.d2),
            ("11", 2, &self.d11),
            ("12", 2, &self.d12),
            ("22", 2, &self.d22),
            ("112", 3, &self.d112),
            ("122", 3, &self.d122),
        ]
        .into_iter()
        .map(|(sub, w, e)| (format!("{name}{sub}"), w, e.clone()))
        .collect()
    }
}

/// Curvature, basic invariants and their covariant jets. The mixed jet
/// `a12` is `δ1(δ2(a))`.
#[derive(Debug, Clone)]
pub struct JetTable {
    pub k: Expr,
    pub k1: Expr,
    pub k2: Expr,
    pub a: InvariantJets,
    /// Second basic invariant `b` of a 5-web.
    pub b: Option<InvariantJets>,
}

/// One named entry of a [`JetTable`].
#[derive(Debug, Clone, Serialize)]
pub struct JetEntry {
    pub name: String,
    pub weight: i32,
    #[serde(skip)]
    pub value: Expr,
}

pub fn jet_table(web: &ChartedWeb) -> Result<JetTable> {
    let invariants = web.basic_invariants()?;
    let k = web.curvature();
    Ok(JetTable {
        k1: web.delta(Dir::One, &k, 2),
        k2: web.delta(Dir::Two, &k, 2),
        k,
        a: InvariantJets::new(web, &invariants[1]),
        b: invariants.get(2).map(|b| InvariantJets::new(web, b)),
    })
}

impl JetTable {
    pub fn entries(&self) -> Vec<JetEntry> {
        let mut out = vec![
            ("K".to_string(), 2, self.k.clone()),
            ("K1".to_string(), 3, self.k1.clone()),
            ("K2".to_string(), 3, self.k2.clone()),
        ];
        out.extend(self.a.entries("a"));
        if let Some(b) = &self.b {
            out.extend(b.entries("b"));
        }
        out.into_iter()
            .map(|(name, weight, value)| JetEntry {
                name,
                weight,
                value,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, SampleBox, SampleConfig};
    use crate::web::WebSpec;

    fn charted(fs: &[&str], b: (f64, f64, f64, f64)) -> ChartedWeb {
        let cfg = SampleConfig::new(SampleBox::new(b.0, b.1, b.2, b.3).unwrap());
        let w = WebSpec::new(fs.iter().map(|s| parse(s).unwrap()).collect(), cfg).unwrap();
        ChartedWeb::new(&w).unwrap()
    }

    #[test]
    fn derivative_of_constant() {
        let w = charted(&["x", "y", "x*y"], (2.0, 3.0, 4.0, 5.0));
        let d = covariant_derivative(&WeightedField::new(Expr::one(), 0), Dir::One, &w);
        assert!(d.value.is_zero());
        assert_eq!(d.weight, 1);
    }

    #[test]
    fn weight_one_value() {
        let w = charted(&["x", "y", "x*y"], (2.0, 3.0, 4.0, 5.0));
        let d = covariant_derivative(&WeightedField::new(Expr::x(), 1), Dir::One, &w);
        assert!((d.value.eval_xy(2.0, 3.0).unwrap() + 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn commutation_on_quadratic_web() {
        let w = charted(&["x", "y", "x^2 + x*y"], (1.0, 2.0, 1.0, 2.0));
        let u = Expr::x();
        let d21 = w.deltas(&u, 1, &[Dir::One, Dir::Two]);
        let d12 = w.deltas(&u, 1, &[Dir::Two, Dir::One]);
        let v = d21.sub(&d12).eval_xy(1.0, 1.0).unwrap();
        assert!((v - 2.0 / 27.0).abs() < 1e-14);
        for s in 0..4 {
            let defect = commutation_defect(&WeightedField::new(parse("x^2*y - y/x").unwrap(), s), &w);
            assert!(w.web().is_zero(&defect).unwrap());
        }
    }

    #[test]
    fn jets_of_parallel_web_vanish() {
        let w = charted(&["x", "y", "x + y", "x + 2*y"], (1.0, 2.0, 1.0, 2.0));
        let t = jet_table(&w).unwrap();
        for e in t.entries().iter().filter(|e| e.name != "a") {
            assert!(w.web().is_zero(&e.value).unwrap(), "{}", e.name);
        }
    }

    #[test]
    fn first_jet_of_a() {
        let w = charted(&["x", "y", "x + y", "x*y"], (2.0, 3.0, 4.0, 5.0));
        let t = jet_table(&w).unwrap();
        assert!((t.a.d1.eval_xy(2.0, 3.0).unwrap() - 0.75).abs() < 1e-14);
    }
}
