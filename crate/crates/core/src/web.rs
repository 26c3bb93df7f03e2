//! Planar webs given by web functions, their Chern connection and curvature.
//!
//! A web is a list of functions `f1, ..., fd` of `(x, y)`. The first two
//! serve as chart coordinates `(X, Y) = (f1, f2)` and the third plays the
//! role of `f` with `ω3 = df`, so that `ω1 = -f_X dX`, `ω2 = -f_Y dY`.
//! Derivatives in the chart are obtained from ordinary `x, y` derivatives by
//! the chain rule, and every expression returned here is a function of the
//! original `x, y`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WebError};
use crate::expr::{Expr, SampleBox, SampleConfig, Var};

/// Which of the two chart directions (or basis fields) is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dir {
    One,
    Two,
}

/// Sampled certificate that `fi` and `fj` are functionally independent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCertificate {
    /// One-based indices.
    pub i: usize,
    pub j: usize,
    /// Largest sampled `|∂(fi, fj)/∂(x, y)|`.
    pub max_abs_jacobian: f64,
}

/// A validated planar web.
#[derive(Debug, Clone)]
pub struct WebSpec {
    functions: Vec<Expr>,
    config: SampleConfig,
    certificates: Vec<PairCertificate>,
}

pub fn make_web(functions: Vec<Expr>, domain: SampleBox, cfg: &SampleConfig) -> Result<WebSpec> {
    let mut cfg = cfg.clone();
    cfg.domain = domain;
    WebSpec::new(functions, cfg)
}

fn jacobian(f: &Expr, g: &Expr) -> Expr {
    f.dx().mul(&g.dy()).sub(&f.dy().mul(&g.dx()))
}

impl WebSpec {
    pub fn new(functions: Vec<Expr>, config: SampleConfig) -> Result<WebSpec> {
        if functions.len() < 3 {
            return Err(WebError::TooFewFunctions {
                min: 3,
                got: functions.len(),
            });
        }
        config.validate()?;
        for f in &functions {
            if f.variables().iter().any(|v| !matches!(v, Var::X | Var::Y)) {
                return Err(WebError::Precondition(format!(
                    "web function `{f}` uses variables other than x, y"
                )));
            }
        }
        config.sample_many(&functions)?;
        let mut certificates = Vec::new();
        for i in 0..functions.len() {
            for j in i + 1..functions.len() {
                let check = config.check_zero(&jacobian(&functions[i], &functions[j]))?;
                if check.is_zero {
                    return Err(WebError::DegeneratePair { i: i + 1, j: j + 1 });
                }
                certificates.push(PairCertificate {
                    i: i + 1,
                    j: j + 1,
                    max_abs_jacobian: check.max_abs,
                });
            }
        }
        Ok(WebSpec {
            functions,
            config,
            certificates,
        })
    }

    pub fn functions(&self) -> &[Expr] {
        &self.functions
    }

    /// Number of foliations `d`.
    pub fn d(&self) -> usize {
        self.functions.len()
    }

    pub fn config(&self) -> &SampleConfig {
        &self.config
    }

    pub fn certificates(&self) -> &[PairCertificate] {
        &self.certificates
    }

    /// Same web with a different sampling configuration (the box is kept).
    pub fn with_config(&self, cfg: &SampleConfig) -> WebSpec {
        let mut config = cfg.clone();
        config.domain = self.config.domain;
        WebSpec {
            functions: self.functions.clone(),
            config,
            certificates: self.certificates.clone(),
        }
    }

    /// The web with its functions reordered, `order[k]` being the zero-based
    /// index of the function placed at position `k`.
    pub fn permuted(&self, order: &[usize]) -> Result<WebSpec> {
        let mut seen = vec![false; self.d()];
        if order.len() != self.d() {
            return Err(WebError::Precondition(format!(
                "permutation has {} entries for a {}-web",
                order.len(),
                self.d()
            )));
        }
        for &k in order {
            if k >= self.d() || seen[k] {
                return Err(WebError::Precondition(format!("{order:?} is not a permutation")));
            }
            seen[k] = true;
        }
        let functions = order.iter().map(|&k| self.functions[k].clone()).collect();
        WebSpec::new(functions, self.config.clone())
    }

    /// The subweb formed by the listed zero-based indices, in that order.
    pub fn subweb(&self, indices: &[usize]) -> Result<WebSpec> {
        if indices.iter().any(|&k| k >= self.d()) {
            return Err(WebError::Precondition(format!(
                "subweb indices {indices:?} out of range for a {}-web",
                self.d()
            )));
        }
        let functions = indices.iter().map(|&k| self.functions[k].clone()).collect();
        WebSpec::new(functions, self.config.clone())
    }

    pub fn is_zero(&self, e: &Expr) -> Result<bool> {
        Ok(self.config.is_identically_zero(e)?)
    }

    pub fn are_equal(&self, a: &Expr, b: &Expr) -> Result<bool> {
        Ok(self.config.are_equal(a, b)?)
    }
}

/// Coordinates `(X, Y) = (first, second)` with chain-rule partials.
#[derive(Debug, Clone)]
pub struct Chart {
    first: Expr,
    second: Expr,
    jacobian: Expr,
}

impl Chart {
    pub fn new(first: &Expr, second: &Expr) -> Chart {
        Chart {
            first: first.clone(),
            second: second.clone(),
            jacobian: jacobian(first, second),
        }
    }

    pub fn coordinates(&self) -> (&Expr, &Expr) {
        (&self.first, &self.second)
    }

    /// `∂(X, Y)/∂(x, y)`.
    pub fn jacobian(&self) -> &Expr {
        &self.jacobian
    }

    /// Partial derivative `∂h/∂X` (for `Dir::One`) or `∂h/∂Y`.
    pub fn partial(&self, dir: Dir, h: &Expr) -> Expr {
        let (hx, hy) = (h.dx(), h.dy());
        let num = match dir {
            Dir::One => self.second.dy().mul(&hx).sub(&self.second.dx().mul(&hy)),
            Dir::Two => self.first.dx().mul(&hy).sub(&self.first.dy().mul(&hx)),
        };
        num.div(&self.jacobian)
    }
}

/// A web (or one of its 3-subwebs) in the chart of two of its functions.
#[derive(Debug, Clone)]
pub struct ChartedWeb {
    web: WebSpec,
    triple: [usize; 3],
    chart: Chart,
    f: Expr,
    fx: Expr,
    fy: Expr,
    h: Expr,
}

impl ChartedWeb {
    /// The canonical chart `(f1, f2)` with `f = f3`.
    pub fn new(web: &WebSpec) -> Result<ChartedWeb> {
        ChartedWeb::for_triple(web, [0, 1, 2])
    }

    /// Chart `(fi, fj)` with `f = fk`, for zero-based `[i, j, k]`.
    pub fn for_triple(web: &WebSpec, triple: [usize; 3]) -> Result<ChartedWeb> {
        let [i, j, k] = triple;
        let d = web.d();
        if i >= d || j >= d || k >= d || i == j || j == k || i == k {
            return Err(WebError::Precondition(format!(
                "invalid triple {:?} for a {d}-web",
                triple.map(|t| t + 1)
            )));
        }
        let fs = web.functions();
        let chart = Chart::new(&fs[i], &fs[j]);
        if web.is_zero(chart.jacobian())? {
            return Err(WebError::ChartDegenerate(format!(
                "f{} and f{} do not form a chart",
                i + 1,
                j + 1
            )));
        }
        let f = fs[k].clone();
        let fx = chart.partial(Dir::One, &f);
        let fy = chart.partial(Dir::Two, &f);
        for (name, e) in [("f_X", &fx), ("f_Y", &fy)] {
            if web.is_zero(e)? {
                return Err(WebError::ChartDegenerate(format!(
                    "{name} of f{} vanishes identically in the chart (f{}, f{})",
                    k + 1,
                    i + 1,
                    j + 1
                )));
            }
        }
        let fxy = chart.partial(Dir::Two, &fx);
        let h = fxy.div(&fx.mul(&fy));
        Ok(ChartedWeb {
            web: web.clone(),
            triple,
            chart,
            f,
            fx,
            fy,
            h,
        })
    }

    pub fn web(&self) -> &WebSpec {
        &self.web
    }

    pub fn triple(&self) -> [usize; 3] {
        self.triple
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// The closed-form function `f` with `ω3 = df`.
    pub fn f(&self) -> &Expr {
        &self.f
    }

    /// `f_X` and `f_Y` in the chart.
    pub fn f_partials(&self) -> (&Expr, &Expr) {
        (&self.fx, &self.fy)
    }

    /// `H = f_XY / (f_X f_Y)`; the connection form is `γ = -H ω3`, so
    /// `g1 = g2 = H`.
    pub fn connection(&self) -> &Expr {
        &self.h
    }

    /// Basis field `∂1 = -f_X⁻¹ ∂_X` or `∂2 = -f_Y⁻¹ ∂_Y` applied to `u`.
    pub fn partial(&self, dir: Dir, u: &Expr) -> Expr {
        let scale = match dir {
            Dir::One => &self.fx,
            Dir::Two => &self.fy,
        };
        self.chart.partial(dir, u).div(scale).neg()
    }

    /// Curvature `K = -(log(f_X/f_Y))_XY / (f_X f_Y)`.
    pub fn curvature(&self) -> Expr {
        let log_ratio = self.fx.div(&self.fy).ln();
        let mixed = self
            .chart
            .partial(Dir::One, &self.chart.partial(Dir::Two, &log_ratio));
        mixed.div(&self.fx.mul(&self.fy)).neg()
    }

    /// Curvature from the connection, `K = ∂1(g2) - ∂2(g1)`.
    pub fn curvature_from_connection(&self) -> Expr {
        self.partial(Dir::One, &self.h)
            .sub(&self.partial(Dir::Two, &self.h))
    }

    /// Coefficient of `dx∧dy` in `ω1∧ω2 = f_X f_Y dX∧dY`.
    pub fn area_density(&self) -> Expr {
        self.fx.mul(&self.fy).mul(self.chart.jacobian())
    }

    /// Coefficient of `dx∧dy` in the curvature form `dγ = K ω1∧ω2`.
    /// Unlike `K` itself this does not depend on the normalization.
    pub fn curvature_form(&self) -> Expr {
        self.curvature().mul(&self.area_density())
    }

    /// Basic invariant of the foliation `g`: `a = f_Y g_X / (f_X g_Y)`.
    pub fn basic_invariant_of(&self, g: &Expr) -> Expr {
        let gx = self.chart.partial(Dir::One, g);
        let gy = self.chart.partial(Dir::Two, g);
        self.fy.mul(&gx).div(&self.fx.mul(&gy))
    }

    /// `[a1 = 1, a2, ..., a_{d-2}]` for the remaining functions.
    pub fn basic_invariants(&self) -> Result<Vec<Expr>> {
        if self.web.d() < 4 {
            return Err(WebError::Precondition(
                "basic invariants need at least four foliations".into(),
            ));
        }
        let mut out = vec![Expr::one()];
        let others = (0..self.web.d()).filter(|k| !self.triple.contains(k));
        for (n, k) in others.enumerate() {
            let a = self.basic_invariant_of(&self.web.functions()[k]);
            let index = n + 2;
            if self.web.is_zero(&a)? {
                return Err(WebError::InvariantDegenerate { index, value: 0 });
            }
            if self.web.is_zero(&a.sub(&Expr::one()))? {
                return Err(WebError::InvariantDegenerate { index, value: 1 });
            }
            out.push(a);
        }
        Ok(out)
    }
}

pub fn curvature_k(web: &ChartedWeb) -> Expr {
    web.curvature()
}

pub fn basic_invariants(web: &ChartedWeb) -> Result<Vec<Expr>> {
    web.basic_invariants()
}

/// Curvature of the 3-subweb `[i, j, k]` (zero-based), charted by `(fi, fj)`.
pub fn subweb_curvature(web: &WebSpec, triple: [usize; 3]) -> Result<Expr> {
    Ok(ChartedWeb::for_triple(web, triple)?.curvature())
}

/// All increasing triples of `0..d`.
pub fn triples(d: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            for k in j + 1..d {
                out.push([i, j, k]);
            }
        }
    }
    out
}

/// Mean curvature of all 3-subwebs, expressed in the gauge of the canonical
/// chart.
///
/// Each subweb carries its own normalization, so the curvatures are averaged
/// as 2-forms and the mean is divided by `ω1∧ω2` of the canonical subweb.
pub fn curvature_function(web: &WebSpec) -> Result<Expr> {
    let main = ChartedWeb::new(web)?;
    let all = triples(web.d());
    let mut sum = Expr::zero();
    for t in &all {
        sum = sum.add(&ChartedWeb::for_triple(web, *t)?.curvature_form());
    }
    Ok(sum
        .div(&Expr::int(all.len() as i64))
        .div(&main.area_density()))
}

/// Parallelizability: `K ≡ 0` for `[1, 2, 3]` and every basic invariant
/// constant.
pub fn is_parallelizable(web: &WebSpec) -> Result<bool> {
    let charted = ChartedWeb::new(web)?;
    if !web.is_zero(&charted.curvature())? {
        return Ok(false);
    }
    if web.d() >= 4 {
        for a in charted.basic_invariants()?.iter().skip(1) {
            if !web.is_zero(&a.dx())? || !web.is_zero(&a.dy())? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Upper bound `(d-1)(d-2)/2` on the rank of a planar d-web.
pub fn max_rank_bound(d: usize) -> Result<usize> {
    if d < 3 {
        return Err(WebError::TooFewFunctions { min: 3, got: d });
    }
    Ok((d - 1) * (d - 2) / 2)
}

/// A 3-web given implicitly by `W(u1, u2, u3) = 0` with `ui = params[i]`.
#[derive(Debug, Clone)]
pub struct WebEquation {
    w: Expr,
    params: [Expr; 3],
}

const U: [Var; 3] = [Var::U1, Var::U2, Var::U3];

impl WebEquation {
    pub fn new(w: Expr, params: [Expr; 3], cfg: &SampleConfig) -> Result<WebEquation> {
        let weq = WebEquation { w, params };
        if !cfg.is_identically_zero(&weq.pull_back(&weq.w))? {
            return Err(WebError::InvalidWebEquation);
        }
        for (r, v) in U.iter().enumerate() {
            let wr = weq.pull_back(&weq.w.diff(*v));
            if cfg.is_identically_zero(&wr)? {
                return Err(WebError::GaugeDegenerate(r + 1));
            }
        }
        Ok(weq)
    }

    pub fn equation(&self) -> &Expr {
        &self.w
    }

    pub fn params(&self) -> &[Expr; 3] {
        &self.params
    }

    /// Substitute `ui = params[i]`.
    pub fn pull_back(&self, e: &Expr) -> Expr {
        let mut out = e.clone();
        for (v, p) in U.iter().zip(&self.params) {
            out = out.substitute(*v, p);
        }
        out
    }
}

/// `K = A12 + A23 + A31` with `A_rs = (log(W_r/W_s))_{u_r u_s} / (W_r W_s)`,
/// composed with the parametrization.
///
/// For `W = u3 - f(u1, u2)` with parameters `(x, y, f)` this is the negative
/// of [`curvature_k`]; see [`WEB_EQUATION_GAUGE_FACTOR`].
pub fn curvature_from_web_equation(weq: &WebEquation) -> Expr {
    let partials: Vec<Expr> = U.iter().map(|v| weq.w.diff(*v)).collect();
    let a = |r: usize, s: usize| {
        let log_ratio = partials[r].div(&partials[s]).ln();
        log_ratio
            .diff(U[r])
            .diff(U[s])
            .div(&partials[r].mul(&partials[s]))
    };
    let k = a(0, 1).add(&a(1, 2)).add(&a(2, 0));
    weq.pull_back(&k)
}

/// Ratio of [`curvature_from_web_equation`] to [`curvature_k`] when the web
/// equation is solved for `u3` and parametrized by `(x, y, f3)`.
pub const WEB_EQUATION_GAUGE_FACTOR: i64 = -1;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, parse_with};

    fn cfg(b: (f64, f64, f64, f64)) -> SampleConfig {
        SampleConfig::new(SampleBox::new(b.0, b.1, b.2, b.3).unwrap())
    }

    fn web(fs: &[&str], b: (f64, f64, f64, f64)) -> WebSpec {
        WebSpec::new(fs.iter().map(|s| parse(s).unwrap()).collect(), cfg(b)).unwrap()
    }

    const UNIT: (f64, f64, f64, f64) = (1.0, 2.0, 1.0, 2.0);

    #[test]
    fn degenerate_pair_is_named() {
        let err = WebSpec::new(
            ["x", "y", "2*x"].iter().map(|s| parse(s).unwrap()).collect(),
            cfg(UNIT),
        )
        .unwrap_err();
        assert_eq!(err, WebError::DegeneratePair { i: 1, j: 3 });
    }

    #[test]
    fn curvature_of_quadratic_web() {
        let w = web(&["x", "y", "x^2 + x*y"], UNIT);
        let k = ChartedWeb::new(&w).unwrap().curvature();
        // f_x = 2x + y, f_y = x, so K = 2/(x (2x+y)^3)
        for (x, y) in [(1.0, 1.0), (1.5, 1.2), (1.9, 1.7)] {
            let expected = 2.0 / (x * (2.0 * x + y) * (2.0 * x + y) * (2.0 * x + y));
            assert!((k.eval_xy(x, y).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn curvature_matches_connection_form() {
        let w = web(&["x", "y", "x^2*y + y^3/x"], UNIT);
        let c = ChartedWeb::new(&w).unwrap();
        assert!(w
            .is_zero(&c.curvature().sub(&c.curvature_from_connection()))
            .unwrap());
    }

    #[test]
    fn non_coordinate_chart() {
        // same 3-web as [x, y, x^2 + x y] written in the chart (x + y, x - y)
        let w = web(&["x + y", "x - y", "((x+y)^2 + (x+y)*(x-y))"], UNIT);
        let k = ChartedWeb::new(&w).unwrap().curvature();
        let (s, t) = (1.3f64, 1.1f64);
        let (x, y) = (s + t, s - t);
        let expected = 2.0 / (x * (2.0 * x + y).powi(3));
        let got = k.eval_xy(s, t).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn web_equation_curvature_is_negated_chart_curvature() {
        let c = cfg(UNIT);
        let vars = [Var::U1, Var::U2, Var::U3];
        let cases = [
            ("u3 - u1^2 - u1*u2", "x^2 + x*y"),
            ("u3 - u1*u2", "x*y"),
            ("u3 - u1 - u2", "x + y"),
            ("u3 - exp(u1)*u2 - u2^3", "exp(x)*y + y^3"),
        ];
        for (w, f) in cases {
            let w = parse_with(w, &vars).unwrap();
            let f = parse(f).unwrap();
            let weq = WebEquation::new(w, [Expr::x(), Expr::y(), f.clone()], &c).unwrap();
            let k9 = curvature_from_web_equation(&weq);
            let web = WebSpec::new(vec![Expr::x(), Expr::y(), f], c.clone()).unwrap();
            let k8 = curvature_k(&ChartedWeb::new(&web).unwrap());
            let diff = k9.sub(&k8.scale(WEB_EQUATION_GAUGE_FACTOR));
            assert!(c.is_identically_zero(&diff).unwrap());
        }
    }

    #[test]
    fn invalid_web_equation() {
        let c = cfg(UNIT);
        let w = parse_with("u3 - u1*u2", &U).unwrap();
        let err = WebEquation::new(w, [Expr::x(), Expr::y(), parse("x+y").unwrap()], &c);
        assert_eq!(err.unwrap_err(), WebError::InvalidWebEquation);
    }

    #[test]
    fn basic_invariant_values() {
        let w = web(&["x", "y", "x + y", "x*y"], (2.0, 3.0, 4.0, 5.0));
        let a = ChartedWeb::new(&w).unwrap().basic_invariants().unwrap();
        assert!(a[0].is_one());
        assert!((a[1].eval_xy(2.0, 3.0).unwrap() - 1.5).abs() < 1e-14);
        let w = web(&["x", "y", "x + y", "x + 2*y"], UNIT);
        let a = ChartedWeb::new(&w).unwrap().basic_invariants().unwrap();
        assert!(w.is_zero(&a[1].sub(&Expr::ratio(1, 2))).unwrap());
    }

    #[test]
    fn degenerate_invariant() {
        // a ≡ 1 means f4 defines the same foliation as f3, which general
        // position already rules out
        let fs = ["x", "y", "x + y", "(x + y)^3"].map(|s| parse(s).unwrap());
        let err = WebSpec::new(fs.to_vec(), cfg(UNIT)).unwrap_err();
        assert_eq!(err, WebError::DegeneratePair { i: 3, j: 4 });
        let w = web(&["x", "y", "x + y", "x - y"], UNIT);
        let a = ChartedWeb::new(&w).unwrap().basic_invariants().unwrap();
        assert!(w.is_zero(&a[1].add(&Expr::one())).unwrap());
    }

    #[test]
    fn parallelizable() {
        assert!(is_parallelizable(&web(&["x", "y", "x + y"], UNIT)).unwrap());
        assert!(is_parallelizable(&web(&["x", "y", "x + y", "x + 2*y"], UNIT)).unwrap());
        let nl = web(&["x", "y", "x/y", "x*y*(x + y)"], (2.0, 3.0, 4.0, 5.0));
        assert!(!is_parallelizable(&nl).unwrap());
    }

    #[test]
    fn subweb_curvatures() {
        let w = web(&["x", "y", "x + y", "x*y"], (2.0, 3.0, 4.0, 5.0));
        assert!(w.is_zero(&subweb_curvature(&w, [0, 1, 3]).unwrap()).unwrap());
        let q = web(&["x", "y", "x^2 + x*y", "x + y"], UNIT);
        let k = subweb_curvature(&q, [0, 1, 2]).unwrap();
        let swapped = subweb_curvature(&q, [1, 0, 2]).unwrap();
        assert!(!q.is_zero(&k).unwrap());
        assert!(!q.is_zero(&swapped).unwrap());
    }

    #[test]
    fn rank_bounds() {
        assert_eq!(max_rank_bound(3).unwrap(), 1);
        assert_eq!(max_rank_bound(4).unwrap(), 3);
        assert_eq!(max_rank_bound(5).unwrap(), 6);
        assert!(max_rank_bound(2).is_err());
    }
}
