//! Rank of planar 4-webs from the explicit invariants `c0, c1, c2`, the
//! rank-two matrix `G` and the rank-one invariants `J`, and the maximum
//! rank test for 5-webs.

use serde::Serialize;

use crate::covariant::{jet_table, JetTable};
use crate::error::{Result, WebError};
use crate::expr::{Expr, SampleConfig};
use crate::obstruction::kappa_reduce_5web;
use crate::web::{max_rank_bound, ChartedWeb, Dir, WebSpec};

/// The three coefficients of the reduced 4-web obstruction.
#[derive(Debug, Clone)]
pub struct CCoefficients {
    pub c0: Expr,
    pub c1: Expr,
    pub c2: Expr,
}

impl CCoefficients {
    pub fn as_array(&self) -> [&Expr; 3] {
        [&self.c0, &self.c1, &self.c2]
    }
}

/// `c0, c1, c2` in terms of `K` and the covariant jets of `a`, as printed.
///
/// The printed `K` term of `c1` does not agree with the reduced obstruction:
/// on reorderings of a rank-three web with `K ≠ 0` it leaves `c1 ≠ 0`. Use
/// [`c_corrected`] for classification.
pub fn c_explicit(t: &JetTable) -> CCoefficients {
    c_with_k_term(t, |a, a1, a2| (a - 4) * a1 + (11 - 20 * a + 12 * (a * a)) * a2)
}

/// `c0, c1, c2` with the `K` coefficient of `c1` recomputed from
/// [`kappa_reduce_4web`](crate::obstruction::kappa_reduce_4web): it differs
/// from the printed one by `K (a1 - 2 a2) / (12 a (1 - a))`.
pub fn c_corrected(t: &JetTable) -> CCoefficients {
    c_with_k_term(t, |a, a1, a2| -3 * a1 + (9 - 18 * a + 12 * (a * a)) * a2)
}

/// Shared body of the two readings; `k_term(a, a1, a2)` is the numerator of
/// the `K` coefficient of `c1` over `12 (1 - a)^2 a`.
fn c_with_k_term(t: &JetTable, k_term: impl Fn(&Expr, &Expr, &Expr) -> Expr) -> CCoefficients {
    let a = &t.a.value;
    let (a1, a2) = (&t.a.d1, &t.a.d2);
    let (a11, a12, a22) = (&t.a.d11, &t.a.d12, &t.a.d22);
    let (a112, a122) = (&t.a.d112, &t.a.d122);
    let (k, k1, k2) = (&t.k, &t.k1, &t.k2);
    let b = 1 - a;
    let ab = a * &b;
    let a_sq = a * a;
    let b_sq = &b * &b;
    let a1_minus = a1 - a * a2;

    let c0 = k
        + (a11 - a * a22 - 2 * (&b * a12)) / (4 * &ab)
        + ((2 * a - 1) * (a1 * a1) - &a_sq * (a2 * a2) + 2 * (&b_sq * a1 * a2))
            / (4 * (&b_sq * &a_sq));

    let c1 = (k2 - k1) / (4 * &b)
        + k_term(a, a1, a2) / (12 * (&b_sq * a)) * k
        + (a112 - a122) / (4 * &ab)
        + &a1_minus / (4 * (&a_sq * &b)) * a22
        + (2 * a - 1) * &a1_minus / (4 * (&b_sq * &a_sq)) * a12
        - (a2 * a2) * ((1 - 2 * a) * a1 + a * a2) / (4 * (&b_sq * &a_sq));

    let c2 = (a * k2 - k1) / (4 * &ab)
        + ((1 - 2 * a) * a1 - (a - 2) * a * a2) / (4 * (&b_sq * &a_sq)) * k;

    CCoefficients { c0, c1, c2 }
}

/// First covariant jets of the `c`'s: `c_{i,j} = δj(ci)`.
struct CJets {
    c: [Expr; 3],
    d1: [Expr; 3],
    d2: [Expr; 3],
}

const C_WEIGHTS: [i32; 3] = [2, 3, 3];

impl CJets {
    fn new(web: &ChartedWeb, c: &CCoefficients) -> CJets {
        let c = [c.c0.clone(), c.c1.clone(), c.c2.clone()];
        let d = |dir| std::array::from_fn(|i| web.delta(dir, &c[i], C_WEIGHTS[i]));
        CJets {
            d1: d(Dir::One),
            d2: d(Dir::Two),
            c,
        }
    }
}

/// Rank-two compatibility matrix.
#[derive(Debug, Clone)]
pub struct GMatrix {
    pub g11: Expr,
    pub g12: Expr,
    pub g21: Expr,
    pub g22: Expr,
}

/// Weight of every `G_ij`.
pub const G_WEIGHT: i32 = 6;

impl GMatrix {
    pub fn entries(&self) -> [(&'static str, &Expr); 4] {
        [
            ("G11", &self.g11),
            ("G12", &self.g12),
            ("G21", &self.g21),
            ("G22", &self.g22),
        ]
    }
}

pub fn g_matrix(web: &ChartedWeb, t: &JetTable, c: &CCoefficients) -> Result<GMatrix> {
    if web.web().is_zero(&c.c0)? {
        return Err(WebError::Precondition(
            "the rank-two matrix needs c0 not identically zero".into(),
        ));
    }
    Ok(g_matrix_unchecked(web, t, c))
}

fn g_matrix_unchecked(web: &ChartedWeb, t: &JetTable, c: &CCoefficients) -> GMatrix {
    let j = CJets::new(web, c);
    let [c0, c1, c2] = &j.c;
    let [c01, c11, c21] = &j.d1;
    let [c02, c12, c22] = &j.d2;
    let a = &t.a.value;
    let (a1, a2) = (&t.a.d1, &t.a.d2);
    let (a12, a22) = (&t.a.d12, &t.a.d22);
    let k = &t.k;
    let ab = a * (1 - a);

    let g11 = a * c0 * (c22 - c21) + a * c2 * (c01 - c02) - &ab * c1 * c2
        + (2 * a2 - a1 - a * a2) * c0 * c2
        - k * c0 * c0;
    let g12 = a * c0 * (c12 - c11) + a * c1 * (c01 - c02) - &ab * c1 * c1
        + (2 * a2 - a1 - 2 * (a * a2)) * c0 * c1
        + (a2 * a2 + a12 - a22) * c0 * c0;
    let g21 = c0 * (c21 - a * c22) + c2 * (a * c02 - c01) - 2 * (a2 * c0 * c2) + &ab * c2 * c2;
    let g22 = c0 * (c11 - a * c12) + c1 * (a * c02 - c01) + &ab * c1 * c2
        - a2 * c0 * c1
        - a2 * (1 - a) * c0 * c2
        + (a22 - k) * c0 * c0;
    GMatrix { g11, g12, g21, g22 }
}

/// Rank-one invariants, grouped by the case they belong to. A case whose
/// side conditions on `c0, c1, c2` fail is `None`.
#[derive(Debug, Clone, Default)]
pub struct JInvariants {
    /// `c0 = 0`, `c1 ≠ c2`, `c1 ≠ 0`: `J1`, `J2`.
    pub case1: Option<[Expr; 2]>,
    /// `c0 = 0`, `c1 = c2 ≠ 0`: `J3`.
    pub case2: Option<Expr>,
    /// `c0 = 0`, `c1 = 0`, `c2 ≠ 0`: `J4`.
    pub case3: Option<Expr>,
    /// `c0 ≠ 0`: `J10`, `J11`, `J12`.
    pub case4: Option<[Expr; 3]>,
}

/// Second jets `c_{i,jk} = δk(δj(ci))`.
fn c_second(web: &ChartedWeb, c: &Expr, weight: i32, j: Dir, k: Dir) -> Expr {
    web.deltas(c, weight, &[j, k])
}

pub fn j_invariants(
    web: &ChartedWeb,
    t: &JetTable,
    c: &CCoefficients,
    g: Option<&GMatrix>,
) -> Result<JInvariants> {
    let w = web.web();
    let zero = |e: &Expr| w.is_zero(e);
    let a = &t.a.value;
    let (a1, a2) = (&t.a.d1, &t.a.d2);
    let (a12, a22) = (&t.a.d12, &t.a.d22);
    let k = &t.k;
    let mut out = JInvariants::default();

    if zero(&c.c0)? {
        let c0_zero_case = |c1_zero: bool, c2_zero: bool, c12_equal: bool| -> u8 {
            match (c1_zero, c2_zero, c12_equal) {
                (false, _, false) => 1,
                (false, false, true) => 2,
                (true, false, _) => 3,
                _ => 0,
            }
        };
        let case = c0_zero_case(zero(&c.c1)?, zero(&c.c2)?, zero(&(&c.c1 - &c.c2))?);
        match case {
            1 => {
                let j = CJets::new(web, c);
                let [_, c1, c2] = &j.c;
                let [_, c11, c21] = &j.d1;
                let [_, c12, c22] = &j.d2;
                let j1 = a2 * c1 * c2 * (c1 - c2)
                    + a * c2 * c2 * (c12 - c11)
                    + c1 * c2 * (c11 + a * (c21 - c12 - c22))
                    + c1 * c1 * (a * c22 - c21);
                let c1_11 = c_second(web, c1, 3, Dir::One, Dir::One);
                let c1_12 = c_second(web, c1, 3, Dir::One, Dir::Two);
                let c2_11 = c_second(web, c2, 3, Dir::One, Dir::One);
                let c2_12 = c_second(web, c2, 3, Dir::One, Dir::Two);
                let j2 = c1 * c1 * (c1 - c2) * (c1 - c2) * k
                    + (c1_11 - c1_12) * c1 * c2 * (c2 - c1)
                    + c1 * c1 * (c1 - c2) * (c2_11 - c2_12)
                    - c2 * (2 * c1 - c2) * c11 * (c12 - c11)
                    + c1 * c1 * c21 * (c12 - c22 + c21)
                    + c1 * c1 * c11 * (c22 - 2 * c21);
                out.case1 = Some([j1, j2]);
            }
            2 => {
                let b = 1 - a;
                out.case2 = Some((a22 - a12) * &b + a2 * (a2 - a1) - &b * &b * k);
            }
            3 => out.case3 = Some(a12 * a - a1 * a2 - k * a * a),
            _ => {}
        }
    } else {
        let owned;
        let g = match g {
            Some(g) => g,
            None => {
                owned = g_matrix_unchecked(web, t, c);
                &owned
            }
        };
        let (c0, c1, c2) = (&c.c0, &c.c1, &c.c2);
        let (g12, g21, g22) = (&g.g12, &g.g21, &g.g22);
        let g21_1 = web.delta(Dir::One, g21, G_WEIGHT);
        let g22_1 = web.delta(Dir::One, g22, G_WEIGHT);
        let g21_2 = web.delta(Dir::Two, g21, G_WEIGHT);
        let g22_2 = web.delta(Dir::Two, g22, G_WEIGHT);
        let j10 = &g.g11 * g22 - g21 * g12;
        let lead = a2 * c0 - a * c1;
        let j11 = c0 * (g21_1 * g22 - g22_1 * g21)
            + &lead * g21 * g21
            + (a * c2 - a2 * c0 + a * c1) * g21 * g22
            - a * c2 * g22 * g22;
        // The printed coefficient of G21 G22 is a (c2 - c1); with it J12
        // fails to vanish on reorderings of rank-one webs.
        let j12 = c0 * (g21_2 * g22 - g22_2 * g21) + &lead * g21 * g21 + (a * c2 + c1) * g21 * g22
            - c2 * g22 * g22;
        out.case4 = Some([j10, j11, j12]);
    }
    Ok(out)
}

/// Verdict of a rank classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankVerdict {
    /// Rank of a 4-web.
    Rank(u8),
    MaxRank,
    NotMaxRank,
}

/// Sampled magnitude of one invariant backing a verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub name: String,
    pub vanishes: bool,
    pub max_abs: f64,
    pub max_normalized: f64,
    /// Verdict of the exact modular test, for rational invariants.
    pub exact: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RankReport {
    pub functions: Vec<String>,
    pub verdict: RankVerdict,
    /// Which criterion decided, e.g. `"rank-two"` or `"rank-one/case-1"`.
    pub criterion: String,
    pub evidence: Vec<Evidence>,
    pub config: SampleConfig,
}

impl RankReport {
    pub fn rank(&self) -> Option<u8> {
        match self.verdict {
            RankVerdict::Rank(r) => Some(r),
            _ => None,
        }
    }
}

struct EvidenceLog<'a> {
    web: &'a WebSpec,
    items: Vec<Evidence>,
}

impl EvidenceLog<'_> {
    fn vanishes(&mut self, name: &str, e: &Expr) -> Result<bool> {
        let check = self.web.config().check_zero(e)?;
        self.items.push(Evidence {
            name: name.to_string(),
            vanishes: check.is_zero,
            max_abs: check.max_abs,
            max_normalized: check.max_normalized,
            exact: check.exact,
        });
        Ok(check.is_zero)
    }

    fn all_vanish(&mut self, entries: &[(&str, &Expr)]) -> Result<bool> {
        let mut all = true;
        for (name, e) in entries {
            all &= self.vanishes(name, e)?;
        }
        Ok(all)
    }
}

/// Rank of a 4-web by the decision tree over `c`, `G` and `J`.
pub fn classify_rank4(web: &WebSpec) -> Result<RankReport> {
    if web.d() != 4 {
        return Err(WebError::Precondition(format!(
            "rank classification needs a 4-web, got d = {}",
            web.d()
        )));
    }
    let charted = ChartedWeb::new(web)?;
    let t = jet_table(&charted)?;
    let c = c_corrected(&t);
    let mut log = EvidenceLog {
        web,
        items: Vec::new(),
    };
    let c0_zero = log.vanishes("c0", &c.c0)?;
    let c1_zero = log.vanishes("c1", &c.c1)?;
    let c2_zero = log.vanishes("c2", &c.c2)?;

    let (rank, criterion) = if c0_zero && c1_zero && c2_zero {
        (3, "max-rank".to_string())
    } else if c0_zero {
        let j = j_invariants(&charted, &t, &c, None)?;
        let fired = if let Some([j1, j2]) = &j.case1 {
            log.all_vanish(&[("J1", j1), ("J2", j2)])?.then_some(1)
        } else if let Some(j3) = &j.case2 {
            log.vanishes("J3", j3)?.then_some(2)
        } else if let Some(j4) = &j.case3 {
            log.vanishes("J4", j4)?.then_some(3)
        } else {
            None
        };
        match fired {
            Some(case) => (1, format!("rank-one/case-{case}")),
            None => (0, "no-criterion".to_string()),
        }
    } else {
        let g = g_matrix_unchecked(&charted, &t, &c);
        if log.all_vanish(&g.entries())? {
            (2, "rank-two".to_string())
        } else {
            let j = j_invariants(&charted, &t, &c, Some(&g))?;
            let [j10, j11, j12] = j.case4.as_ref().expect("c0 is nonzero");
            if log.all_vanish(&[("J10", j10), ("J11", j11), ("J12", j12)])? {
                (1, "rank-one/case-4".to_string())
            } else {
                (0, "no-criterion".to_string())
            }
        }
    };
    debug_assert!(rank as usize <= max_rank_bound(4).unwrap_or(3));
    Ok(RankReport {
        functions: web.functions().iter().map(|f| f.to_string()).collect(),
        verdict: RankVerdict::Rank(rank),
        criterion,
        evidence: log.items,
        config: web.config().clone(),
    })
}

/// Maximum rank test of a 5-web: all six obstruction coefficients vanish.
pub fn max_rank_5web(web: &WebSpec) -> Result<RankReport> {
    if web.d() != 5 {
        return Err(WebError::Precondition(format!(
            "the maximum rank test needs a 5-web, got d = {}",
            web.d()
        )));
    }
    let charted = ChartedWeb::new(web)?;
    let kappa = kappa_reduce_5web(&charted)?;
    let mut log = EvidenceLog {
        web,
        items: Vec::new(),
    };
    let mut all = true;
    for (i, c) in kappa.c.iter().enumerate() {
        all &= log.vanishes(&format!("c{i}"), c)?;
    }
    Ok(RankReport {
        functions: web.functions().iter().map(|f| f.to_string()).collect(),
        verdict: if all {
            RankVerdict::MaxRank
        } else {
            RankVerdict::NotMaxRank
        },
        criterion: "obstruction".to_string(),
        evidence: log.items,
        config: web.config().clone(),
    })
}

/// Run a classification under several seeds and insist on one verdict.
pub fn stable_verdict(
    web: &WebSpec,
    seeds: &[u64],
    classify: impl Fn(&WebSpec) -> Result<RankReport>,
) -> Result<RankReport> {
    let mut first: Option<RankReport> = None;
    for &seed in seeds {
        let cfg = web.config().clone().with_seed(seed);
        let report = classify(&web.with_config(&cfg))?;
        match &first {
            None => first = Some(report),
            Some(f) if f.verdict != report.verdict => {
                return Err(WebError::Indeterminate(format!(
                    "seed {} gives {:?}, seed {} gives {:?}",
                    f.config.seed, f.verdict, seed, report.verdict
                )));
            }
            Some(_) => {}
        }
    }
    first.ok_or_else(|| WebError::Precondition("no seeds given".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, SampleBox};
    use crate::fixtures::{self, Fixture};
    use crate::obstruction::kappa_reduce_4web;

    fn web_of(functions: &[&str]) -> WebSpec {
        let cfg = SampleConfig::new(SampleBox::new(1.0, 2.0, 1.0, 2.0).unwrap());
        WebSpec::new(functions.iter().map(|s| parse(s).unwrap()).collect(), cfg).unwrap()
    }

    fn rank_of(f: Fixture) -> RankReport {
        classify_rank4(&f.web().unwrap()).unwrap()
    }

    #[test]
    fn explicit_coefficients_against_reduction() {
        let web = web_of(&["x", "y", "x^2 + x*y", "x - y^2"]);
        let w = ChartedWeb::new(&web).unwrap();
        let t = jet_table(&w).unwrap();
        assert!(!web.is_zero(&t.k).unwrap());
        let k = kappa_reduce_4web(&w).unwrap();
        let printed = c_explicit(&t);
        let fixed = c_corrected(&t);
        assert!(web.are_equal(&k.c0, &printed.c0).unwrap());
        assert!(web.are_equal(&k.c2, &printed.c2).unwrap());
        assert!(web.are_equal(&k.c1, &fixed.c1).unwrap());
        // the printed c1 is off by K (a1 - 2 a2) / (12 a (1 - a))
        assert!(!web.are_equal(&k.c1, &printed.c1).unwrap());
        let a = &t.a.value;
        let gap = &t.k * (&t.a.d1 - 2 * &t.a.d2) / (12 * (a * (1 - a)));
        assert!(web.are_equal(&(&fixed.c1 - &printed.c1), &gap).unwrap());
    }

    #[test]
    fn fixture_ranks() {
        let cases = [
            (fixtures::W4_PAR, 3, "max-rank"),
            (fixtures::W4_R3, 3, "max-rank"),
            (fixtures::W4_R2, 2, "rank-two"),
            (fixtures::W4_R2NL, 2, "rank-two"),
            (fixtures::W4_R1, 1, "rank-one/case-1"),
            (fixtures::W4_R1NL, 1, "rank-one/case-1"),
        ];
        for (f, rank, criterion) in cases {
            let r = rank_of(f);
            assert_eq!(r.rank(), Some(rank), "{}", f.name);
            assert_eq!(r.criterion, criterion, "{}", f.name);
        }
    }

    #[test]
    fn web_with_logarithmic_relation_has_rank_one() {
        // log(xy) - log(x) - log(y) = 0 is an abelian relation of W4-R0
        let r = rank_of(fixtures::W4_R0);
        assert_eq!(r.rank(), Some(1));
        assert_eq!(r.criterion, "rank-one/case-4");
    }

    #[test]
    fn generic_web_has_rank_zero() {
        let r = classify_rank4(&web_of(&["x", "y", "x^2 + 3*x*y + y^3/2 + x*y^2", "x^3 - 2*x*y + y^2 + x^2*y"])).unwrap();
        assert_eq!(r.rank(), Some(0));
        assert_eq!(r.criterion, "no-criterion");
        // f4 - f3 + x^2 - x^3 - y^3 = 0 is a relation of this one
        let r = classify_rank4(&web_of(&["x", "y", "x^2 + x*y", "x^3 + x*y + y^3"])).unwrap();
        assert_eq!(r.rank(), Some(1));
    }

    #[test]
    fn rank_ignores_the_order_of_functions() {
        for f in [fixtures::W4_R3, fixtures::W4_R1NL] {
            let web = f.web().unwrap();
            let base = classify_rank4(&web).unwrap().rank();
            for order in [[2, 3, 0, 1], [3, 0, 2, 1], [1, 3, 0, 2]] {
                let r = classify_rank4(&web.permuted(&order).unwrap()).unwrap();
                assert_eq!(r.rank(), base, "{} {order:?}", f.name);
            }
        }
    }

    #[test]
    fn j12_vanishes_on_reordered_rank_one_web() {
        let web = web_of(&["x", "y", "x + y", "x*y^2 + x^2"]).permuted(&[2, 3, 0, 1]).unwrap();
        let w = ChartedWeb::new(&web).unwrap();
        let t = jet_table(&w).unwrap();
        let c = c_corrected(&t);
        let j = j_invariants(&w, &t, &c, None).unwrap();
        let [j10, j11, j12] = j.case4.unwrap();
        for (name, e) in [("J10", j10), ("J11", j11), ("J12", j12)] {
            assert!(web.is_zero(&e).unwrap(), "{name}");
        }
    }

    #[test]
    fn g_matrix_needs_nonzero_c0() {
        let web = fixtures::W4_PAR.web().unwrap();
        let w = ChartedWeb::new(&web).unwrap();
        let t = jet_table(&w).unwrap();
        let c = c_corrected(&t);
        assert!(matches!(g_matrix(&w, &t, &c), Err(WebError::Precondition(_))));
    }

    #[test]
    fn rank_one_nonlinear_web_has_zero_curvature_function() {
        let web = fixtures::W4_R1NL.web().unwrap();
        let t = jet_table(&ChartedWeb::new(&web).unwrap()).unwrap();
        assert!(web.is_zero(&c_corrected(&t).c0).unwrap());
    }

    #[test]
    fn five_web_maximum_rank() {
        let bol = max_rank_5web(&fixtures::W5_BOL.web().unwrap()).unwrap();
        assert_eq!(bol.verdict, RankVerdict::MaxRank);
        let parallel = max_rank_5web(&web_of(&["x", "y", "x + y", "x + 2*y", "x + 3*y"])).unwrap();
        assert_eq!(parallel.verdict, RankVerdict::MaxRank);
        let curved = max_rank_5web(&web_of(&["x", "y", "x + y", "x + 2*y", "x + y^2"])).unwrap();
        assert_eq!(curved.verdict, RankVerdict::NotMaxRank);
    }

    #[test]
    fn verdict_is_stable_across_seeds() {
        let web = fixtures::W4_R2.web().unwrap();
        let r = stable_verdict(&web, &[1, 2, 3], classify_rank4).unwrap();
        assert_eq!(r.rank(), Some(2));
        assert!(matches!(classify_rank4(&fixtures::W5_BOL.web().unwrap()), Err(WebError::Precondition(_))));
    }
}
