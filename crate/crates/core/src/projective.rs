//! The projective structure canonically attached to a 4-web, geodesic webs
//! and linearizability.
//!
//! All coordinate computations use the canonical chart `(X, Y) = (f1, f2)`
//! with `f = f3`, so `ω1 = -f_X dX`, `ω2 = -f_Y dY` and `ω3 = df`. Subscripts
//! X, Y below are plain chart partials; `a1`, `a2` are the frame derivatives
//! `∂1 a`, `∂2 a`.

use crate::error::{Result, WebError};
use crate::expr::Expr;
use crate::web::{ChartedWeb, Dir, WebSpec};

/// A 1-form `p dX + q dY` in the chart.
#[derive(Debug, Clone)]
pub struct Form {
    pub dx: Expr,
    pub dy: Expr,
}

impl Form {
    fn comp(&self, i: usize) -> &Expr {
        if i == 0 {
            &self.dx
        } else {
            &self.dy
        }
    }

    fn combine(a: &Expr, u: &Form, b: &Expr, v: &Form) -> Form {
        Form {
            dx: &(a * &u.dx) + &(b * &v.dx),
            dy: &(a * &u.dy) + &(b * &v.dy),
        }
    }
}

/// Symmetric 2-tensor components `[XX, XY, YY]`.
pub type Sym2 = [Expr; 3];

const PAIRS: [(usize, usize); 3] = [(0, 0), (0, 1), (1, 1)];

fn pair_index(i: usize, j: usize) -> usize {
    i + j
}

/// Christoffel symbols `Γ^l_{ij}` of a torsion-free connection in the chart;
/// `gamma[l][pair]` with pairs ordered XX, XY, YY.
#[derive(Debug, Clone)]
pub struct Christoffel {
    pub gamma: [Sym2; 2],
}

impl Christoffel {
    pub fn get(&self, l: usize, i: usize, j: usize) -> &Expr {
        &self.gamma[l][pair_index(i, j)]
    }

    /// All six symbols in the order Γ^X_XX, Γ^X_XY, Γ^X_YY, Γ^Y_XX, Γ^Y_XY, Γ^Y_YY.
    pub fn flat(&self) -> Vec<Expr> {
        self.gamma.iter().flat_map(|g| g.iter().cloned()).collect()
    }
}

/// The canonical representative of the projective structure of a 4-web.
#[derive(Debug, Clone)]
pub struct ProjectiveRep {
    pub chart: ChartedWeb,
    pub a: Expr,
    pub z: Expr,
    /// `θ_i = A_i ω1 + B_i ω2` as `(A_i, B_i)`, for i = 1..4.
    pub theta: [(Expr, Expr); 4],
    /// `ω1..ω4` in chart components.
    pub omega: [Form; 4],
    pub christoffel: Christoffel,
}

fn px(chart: &ChartedWeb, e: &Expr) -> Expr {
    chart.chart().partial(Dir::One, e)
}

fn py(chart: &ChartedWeb, e: &Expr) -> Expr {
    chart.chart().partial(Dir::Two, e)
}

fn pd(chart: &ChartedWeb, i: usize, e: &Expr) -> Expr {
    if i == 0 {
        px(chart, e)
    } else {
        py(chart, e)
    }
}

/// `z = (a1 - a a2) / (a (1 - a))` for the basic invariant `a`.
pub fn z_invariant(chart: &ChartedWeb, a: &Expr) -> Expr {
    let a1 = chart.partial(Dir::One, a);
    let a2 = chart.partial(Dir::Two, a);
    &(&a1 - &(a * &a2)) / &(a * &(&Expr::one() - a))
}

/// Components of `d∇ˢ(ω) - θ·ω`, where `·` is the symmetrized tensor product.
pub fn symmetric_defect(chart: &ChartedWeb, conn: &Christoffel, omega: &Form, theta: &Form) -> Sym2 {
    let half = Expr::ratio(1, 2);
    PAIRS.map(|(i, j)| {
        let sym_d = &half * &(&pd(chart, i, omega.comp(j)) + &pd(chart, j, omega.comp(i)));
        let gamma_term = &(conn.get(0, i, j) * &omega.dx) + &(conn.get(1, i, j) * &omega.dy);
        let prod = &half * &(&(theta.comp(i) * omega.comp(j)) + &(theta.comp(j) * omega.comp(i)));
        &(&sym_d - &gamma_term) - &prod
    })
}

/// The canonical projective structure of a 4-web.
pub fn projective_rep(web: &WebSpec) -> Result<ProjectiveRep> {
    if web.d() != 4 {
        return Err(WebError::Precondition(format!(
            "the projective structure is defined for 4-webs, got d = {}",
            web.d()
        )));
    }
    let chart = ChartedWeb::new(web)?;
    let a = chart.basic_invariants()?[1].clone();
    let z = z_invariant(&chart, &a);
    let (fx, fy) = chart.f_partials();
    let zero = Expr::zero();
    let w1 = Form { dx: -fx, dy: zero.clone() };
    let w2 = Form { dx: zero.clone(), dy: -fy };
    let w3 = Form { dx: fx.clone(), dy: fy.clone() };
    let minus_one = Expr::int(-1);
    let w4 = Form::combine(&(-&a), &w1, &minus_one, &w2);

    let half_z = &z * &Expr::ratio(1, 2);
    let a1 = chart.partial(Dir::One, &a);
    let (ta, tb) = (-&half_z, -&half_z);
    let theta = [
        (ta.clone(), tb.clone()),
        (&ta + &z, &tb + &z),
        (ta.clone(), &tb + &z),
        (&ta + &(&a1 / &a), &tb + &z),
    ];

    // d∇ˢ ω1 = (z/2) ω3·ω1 and d∇ˢ ω2 = -(z/2) ω3·ω2, i.e. for each pair
    // Γ^X_ij ω_X + Γ^Y_ij ω_Y = sym(∂ω)_ij - (θ·ω)_ij with the Christoffels
    // unknown; two forms give a 2x2 system per pair.
    let theta1 = Form::combine(&half_z, &w3, &zero, &w3);
    let theta2 = Form::combine(&(-&half_z), &w3, &zero, &w3);
    let none = Christoffel {
        gamma: [
            [zero.clone(), zero.clone(), zero.clone()],
            [zero.clone(), zero.clone(), zero.clone()],
        ],
    };
    let r1 = symmetric_defect(&chart, &none, &w1, &theta1);
    let r2 = symmetric_defect(&chart, &none, &w2, &theta2);
    let det = &(&w1.dx * &w2.dy) - &(&w1.dy * &w2.dx);
    let mut gx: Vec<Expr> = Vec::with_capacity(3);
    let mut gy: Vec<Expr> = Vec::with_capacity(3);
    for p in 0..3 {
        gx.push(&(&(&r1[p] * &w2.dy) - &(&r2[p] * &w1.dy)) / &det);
        gy.push(&(&(&w1.dx * &r2[p]) - &(&w2.dx * &r1[p])) / &det);
    }
    let christoffel = Christoffel {
        gamma: [
            [gx[0].clone(), gx[1].clone(), gx[2].clone()],
            [gy[0].clone(), gy[1].clone(), gy[2].clone()],
        ],
    };
    Ok(ProjectiveRep {
        chart,
        a,
        z,
        theta,
        omega: [w1, w2, w3, w4],
        christoffel,
    })
}

impl ProjectiveRep {
    /// `θ_i` (0-based) in chart components.
    pub fn theta_form(&self, i: usize) -> Form {
        let (a, b) = &self.theta[i];
        Form::combine(a, &self.omega[0], b, &self.omega[1])
    }

    /// `d∇ˢ(ω_i) - θ_i·ω_i` for each of the four foliations; all vanish.
    pub fn geodesic_residuals(&self) -> Vec<Sym2> {
        (0..4)
            .map(|i| symmetric_defect(&self.chart, &self.christoffel, &self.omega[i], &self.theta_form(i)))
            .collect()
    }
}

/// `z` of every basic invariant `a_i`, i >= 2, in the chart of `[f1, f2, f3]`.
pub fn z_invariants(web: &WebSpec) -> Result<Vec<Expr>> {
    let chart = ChartedWeb::new(web)?;
    let inv = chart.basic_invariants()?;
    Ok(inv[1..].iter().map(|a| z_invariant(&chart, a)).collect())
}

/// The geodesic defects `z b(1 - b) - (b1 - b b2)` of the foliations f5, f6, ...
/// with respect to the projective structure of `[f1, f2, f3, f4]`.
pub fn geodesic_defects(web: &WebSpec) -> Result<Vec<Expr>> {
    let chart = ChartedWeb::new(web)?;
    let inv = chart.basic_invariants()?;
    let z = z_invariant(&chart, &inv[1]);
    let one = Expr::one();
    Ok(inv[2..]
        .iter()
        .map(|b| {
            let b1 = chart.partial(Dir::One, b);
            let b2 = chart.partial(Dir::Two, b);
            &(&(&z * b) * &(&one - b)) - &(&b1 - &(b * &b2))
        })
        .collect())
}

/// Whether all foliations are geodesic for the structure of the first
/// 4-subweb. A 4-web is geodesic for its own structure.
pub fn geodesic_test(web: &WebSpec) -> Result<bool> {
    match web.d() {
        d if d < 4 => Err(WebError::Precondition(format!(
            "geodesic test needs at least four foliations, got {d}"
        ))),
        4 => Ok(true),
        _ => {
            for defect in geodesic_defects(web)? {
                if !web.is_zero(&defect)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// The invariants `w, α, k` and the Liouville components of a 4-web.
#[derive(Debug, Clone)]
pub struct LiouvilleData {
    pub w: Expr,
    pub alpha: Expr,
    pub k: Expr,
    pub l1: Expr,
    pub l2: Expr,
    /// `(L1, L2)` with the k-terms `-w (kw)_x` and `-w^2 (k/w)_y` as printed.
    /// These do not vanish on linear webs with `k != 0`; `l1`, `l2` use
    /// `-(kw)_x / w` and `-w (k/w)_y`, which agree with the Ricci route.
    pub printed: (Expr, Expr),
}

/// Closed-form Liouville invariants in the canonical chart.
pub fn liouville(web: &WebSpec) -> Result<LiouvilleData> {
    if web.d() != 4 {
        return Err(WebError::Precondition(format!(
            "the Liouville tensor is computed for 4-webs, got d = {}",
            web.d()
        )));
    }
    let c = ChartedWeb::new(web)?;
    let a = c.basic_invariants()?[1].clone();
    let (fx, fy) = c.f_partials();
    let x = |e: &Expr| px(&c, e);
    let y = |e: &Expr| py(&c, e);
    let one = Expr::one();

    let w = fy / fx;
    let alpha = &(&(&a * &y(&a)) - &(&w * &x(&a))) / &(&(&w * &a) * &(&one - &a));
    let k = x(&y(&w.ln()));

    let (wx, wy) = (x(&w), y(&w));
    let wxx = x(&wx);
    let wxy = y(&wx);
    let (al_x, al_y) = (x(&alpha), y(&alpha));
    let al_xx = x(&al_x);
    let al_xy = y(&al_x);
    let al_yy = y(&al_y);
    let al2 = alpha.square();
    let winv = w.recip();
    let third = Expr::ratio(1, 3);

    let kw_x = x(&(&k * &w));
    let k_over_w_y = y(&(&k * &winv));

    // 3 L1 without its k-term
    let t1 = &w * &(&al_xx + &(&alpha * &al_x));
    let t2 = &(&(&(&alpha * &wxx) + &(&(&al2 + &al_x.scale(3)) * &wx)) - &al_xy.scale(2))
        - &(&alpha * &al_y).scale(2);
    let t3 = &winv * &(&(&(-&(&alpha * &wxy)) - &(&al_y * &wx).scale(2)) + &(&alpha * &wx.square()));
    let t4 = &(&winv.square() * &alpha) * &(&wx * &wy);
    let l1_rest = &(&t1 + &t2) + &(&t3 + &t4);
    let l1 = &third * &(&l1_rest - &(&kw_x * &winv));
    let l1_printed = &third * &(&l1_rest - &(&kw_x * &w));

    // 3 L2 without its k-term
    let s1 = &w.square() * &(&alpha * &al_x).scale(2);
    let s2 = &w * &(&(&(&al2 * &wx).scale(2) - &al_xy.scale(2)) - &(&alpha * &al_y));
    let s3 = &(&(-&(&alpha * &wxy)) - &(&al_y * &wx).scale(2)) + &al_yy;
    let s4 = &winv * &(&(&alpha * &(&wx * &wy)) - &(&al_y * &wy));
    let l2_rest = &(&s1 + &s2) + &(&s3 + &s4);
    let l2 = &third * &(&l2_rest - &(&k_over_w_y * &w));
    let l2_printed = &third * &(&l2_rest - &(&k_over_w_y * &w.square()));

    Ok(LiouvilleData {
        w,
        alpha,
        k,
        l1,
        l2,
        printed: (l1_printed, l2_printed),
    })
}

/// Liouville tensor components `(𝔏_XYX, 𝔏_XYY)` built from the Ricci tensor of
/// the canonical representative.
pub fn liouville_via_ricci(rep: &ProjectiveRep) -> (Expr, Expr) {
    let c = &rep.chart;
    let g = |l: usize, i: usize, j: usize| rep.christoffel.get(l, i, j).clone();
    // R^l_{ijk} = ∂_i Γ^l_jk - ∂_j Γ^l_ik + Γ^l_im Γ^m_jk - Γ^l_jm Γ^m_ik
    let riemann = |l: usize, i: usize, j: usize, k: usize| -> Expr {
        let mut r = &pd(c, i, &g(l, j, k)) - &pd(c, j, &g(l, i, k));
        for m in 0..2 {
            r = &r + &(&(&g(l, i, m) * &g(m, j, k)) - &(&g(l, j, m) * &g(m, i, k)));
        }
        r
    };
    let ric = |j: usize, k: usize| -> Expr { &riemann(0, 0, j, k) + &riemann(1, 1, j, k) };
    let mut ricci = vec![vec![Expr::zero(); 2]; 2];
    for (j, row) in ricci.iter_mut().enumerate() {
        for (k, slot) in row.iter_mut().enumerate() {
            *slot = ric(j, k);
        }
    }
    let p = |j: usize, k: usize| -> Expr {
        &(&ricci[j][k] * &Expr::ratio(2, 3)) + &(&ricci[k][j] * &Expr::ratio(1, 3))
    };
    let cov_p = |i: usize, j: usize, k: usize| -> Expr {
        let mut out = pd(c, i, &p(j, k));
        for m in 0..2 {
            out = &out - &(&(&g(m, i, j) * &p(m, k)) + &(&g(m, i, k) * &p(j, m)));
        }
        out
    };
    let l = |k: usize| &cov_p(0, 1, k) - &cov_p(1, 0, k);
    (l(0), l(1))
}

/// Outcome of the linearizability test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Linearizability {
    Linearizable,
    NotLinearizable,
    Indeterminate,
}

/// Verdict with its ingredients.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct LinearizabilityReport {
    pub verdict: Linearizability,
    /// `None` for 4-webs.
    pub geodesic: Option<bool>,
    pub l1_vanishes: bool,
    pub l2_vanishes: bool,
}

fn single_verdict(web: &WebSpec) -> Result<LinearizabilityReport> {
    let geodesic = if web.d() >= 5 { Some(geodesic_test(web)?) } else { None };
    let sub = if web.d() == 4 { web.clone() } else { web.subweb(&[0, 1, 2, 3])? };
    let lio = liouville(&sub)?;
    let l1_vanishes = sub.is_zero(&lio.l1)?;
    let l2_vanishes = sub.is_zero(&lio.l2)?;
    let ok = geodesic.unwrap_or(true) && l1_vanishes && l2_vanishes;
    Ok(LinearizabilityReport {
        verdict: if ok {
            Linearizability::Linearizable
        } else {
            Linearizability::NotLinearizable
        },
        geodesic,
        l1_vanishes,
        l2_vanishes,
    })
}

/// A web is linearizable iff it is geodesic and the Liouville tensor of its
/// first 4-subweb vanishes. The test is repeated with the next two seeds and
/// reported indeterminate when they disagree.
pub fn linearizability_verdict(web: &WebSpec) -> Result<LinearizabilityReport> {
    if web.d() < 4 {
        return Err(WebError::Precondition(format!(
            "linearizability needs at least four foliations, got {}",
            web.d()
        )));
    }
    let seed = web.config().seed;
    let first = single_verdict(web)?;
    for s in [seed.wrapping_add(1), seed.wrapping_add(2)] {
        let cfg = web.config().clone().with_seed(s);
        let other = single_verdict(&web.with_config(&cfg))?;
        if other != first {
            return Ok(LinearizabilityReport {
                verdict: Linearizability::Indeterminate,
                ..first
            });
        }
    }
    Ok(first)
}
