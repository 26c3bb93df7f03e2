//! Analyses and the JSON report.

use serde::Serialize;
use webrank_core::abel::{abel_trace, verify_relation};
use webrank_core::expr::SampledCheck;
use webrank_core::projective::{
    geodesic_defects, geodesic_test, linearizability_verdict, liouville, Linearizability,
    LinearizabilityReport,
};
use webrank_core::rank::{classify_rank4, max_rank_5web, stable_verdict, Evidence, RankReport, RankVerdict};
use webrank_core::web::{curvature_function, is_parallelizable, subweb_curvature, triples};
use webrank_core::{ChartedWeb, Expr, SampleBox, WebError, WebSpec};

/// Printed length of expressions in reports.
const EXPR_LIMIT: usize = 240;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Command {
    Analyze,
    Curvature,
    Invariants,
    Rank,
    Abel,
    Geodesic,
    Linearizable,
    VerifyRelation,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Analyze,
        Command::Curvature,
        Command::Invariants,
        Command::Rank,
        Command::Abel,
        Command::Geodesic,
        Command::Linearizable,
        Command::VerifyRelation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Curvature => "curvature",
            Command::Invariants => "invariants",
            Command::Rank => "rank",
            Command::Abel => "abel",
            Command::Geodesic => "geodesic",
            Command::Linearizable => "linearizable",
            Command::VerifyRelation => "verify-relation",
        }
    }

    pub fn from_name(s: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    Indeterminate,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Error => 1,
            Status::Indeterminate => 2,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InputEcho {
    pub name: String,
    pub digest: String,
    /// Functions in analysis order.
    pub functions: Vec<String>,
    /// 1-based positions in the file of the analyzed functions.
    pub order: Vec<usize>,
    pub domain: SampleBox,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub seed: u64,
    pub samples: usize,
    pub tolerance: f64,
}

/// A sampled expression.
#[derive(Debug, Clone, Serialize)]
pub struct Quantity {
    pub expression: String,
    pub vanishes: bool,
    pub max_abs: f64,
    pub max_normalized: f64,
    pub exact: Option<bool>,
}

impl Quantity {
    fn of(web: &WebSpec, e: &Expr) -> Result<Quantity, WebError> {
        let SampledCheck {
            is_zero,
            max_abs,
            max_normalized,
            exact,
            ..
        } = web.config().check_zero(e)?;
        Ok(Quantity {
            expression: e.abbreviated(EXPR_LIMIT),
            vanishes: is_zero,
            max_abs,
            max_normalized,
            exact,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureBlock {
    pub curvature: Quantity,
    pub curvature_function: Option<Quantity>,
    pub parallelizable: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BasicInvariant {
    pub name: String,
    pub expression: String,
    pub max_abs: f64,
    pub constant: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubwebCurvature {
    pub triple: [usize; 3],
    pub vanishes: bool,
    pub max_abs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantsBlock {
    pub basic: Vec<BasicInvariant>,
    pub subweb_curvatures: Vec<SubwebCurvature>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RankBlock {
    pub verdict: RankVerdict,
    pub criterion: String,
    pub seeds: Vec<u64>,
    pub evidence: Vec<Evidence>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AbelStep {
    pub label: String,
    pub rule: String,
    pub equation: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct AbelBlock {
    pub steps: Vec<AbelStep>,
    pub terminal: Option<String>,
    pub order: Option<u32>,
    pub separable: Option<bool>,
    pub system: Vec<String>,
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeodesicBlock {
    pub geodesic: bool,
    /// One defect per foliation beyond the fourth.
    pub defects: Vec<Quantity>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LinearizabilityBlock {
    #[serde(flatten)]
    pub report: LinearizabilityReport,
    pub l1: Quantity,
    pub l2: Quantity,
}

#[derive(Debug, Clone, Serialize)]
pub struct RelationBlock {
    pub name: String,
    pub holds: bool,
    pub mean: f64,
    pub std_dev: f64,
    pub gradient_vanishes: bool,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Results {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curvature: Option<CurvatureBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariants: Option<InvariantsBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<RankBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abel: Option<AbelBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geodesic: Option<GeodesicBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linearizability: Option<LinearizabilityBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relations: Option<Vec<RelationBlock>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub status: Status,
    pub input: InputEcho,
    pub config: ConfigEcho,
    pub results: Results,
    pub errors: Vec<String>,
}

impl Report {
    pub fn new(command: Command, input: InputEcho, web: &WebSpec) -> Report {
        let cfg = web.config();
        Report {
            tool: "webrank",
            version: env!("CARGO_PKG_VERSION"),
            command: command.name(),
            status: Status::Ok,
            input,
            config: ConfigEcho {
                seed: cfg.seed,
                samples: cfg.samples,
                tolerance: cfg.tolerance,
            },
            results: Results::default(),
            errors: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    fn record<T>(&mut self, what: &str, r: Result<T, WebError>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                let status = match e {
                    WebError::Indeterminate(_) => Status::Indeterminate,
                    _ => Status::Error,
                };
                self.escalate(status);
                self.errors.push(format!("{what}: {e}"));
                None
            }
        }
    }

    fn escalate(&mut self, status: Status) {
        self.status = match (self.status, status) {
            (Status::Error, _) | (_, Status::Error) => Status::Error,
            (Status::Indeterminate, _) | (_, Status::Indeterminate) => Status::Indeterminate,
            _ => Status::Ok,
        };
    }
}

fn curvature_block(web: &WebSpec) -> Result<CurvatureBlock, WebError> {
    let charted = ChartedWeb::new(web)?;
    let curvature = Quantity::of(web, &charted.curvature())?;
    let curvature_function = if web.d() >= 4 {
        Some(Quantity::of(web, &curvature_function(web)?)?)
    } else {
        None
    };
    Ok(CurvatureBlock {
        curvature,
        curvature_function,
        parallelizable: is_parallelizable(web)?,
    })
}

fn invariants_block(web: &WebSpec) -> Result<InvariantsBlock, WebError> {
    let mut basic = Vec::new();
    if web.d() >= 4 {
        let charted = ChartedWeb::new(web)?;
        for (i, a) in charted.basic_invariants()?.iter().enumerate().skip(1) {
            let check = web.config().check_zero(a)?;
            let constant = web.is_zero(&a.dx())? && web.is_zero(&a.dy())?;
            basic.push(BasicInvariant {
                name: format!("a{}", i + 1),
                expression: a.abbreviated(EXPR_LIMIT),
                max_abs: check.max_abs,
                constant,
            });
        }
    }
    let mut subweb_curvatures = Vec::new();
    for t in triples(web.d()) {
        let k = subweb_curvature(web, t)?;
        let check = web.config().check_zero(&k)?;
        subweb_curvatures.push(SubwebCurvature {
            triple: t.map(|i| i + 1),
            vanishes: check.is_zero,
            max_abs: check.max_abs,
        });
    }
    Ok(InvariantsBlock {
        basic,
        subweb_curvatures,
    })
}

/// Seeds used for stability checks: the configured one and the next two.
fn stability_seeds(web: &WebSpec) -> Vec<u64> {
    let s = web.config().seed;
    vec![s, s.wrapping_add(1), s.wrapping_add(2)]
}

fn three_web_rank(web: &WebSpec) -> Result<RankReport, WebError> {
    let charted = ChartedWeb::new(web)?;
    let check = web.config().check_zero(&charted.curvature())?;
    let hexagonal = check.is_zero;
    Ok(RankReport {
        functions: web.functions().iter().map(|f| f.to_string()).collect(),
        verdict: RankVerdict::Rank(u8::from(hexagonal)),
        criterion: if hexagonal { "hexagonal" } else { "curved" }.to_string(),
        evidence: vec![Evidence {
            name: "K".into(),
            vanishes: check.is_zero,
            max_abs: check.max_abs,
            max_normalized: check.max_normalized,
            exact: check.exact,
        }],
        config: web.config().clone(),
    })
}

fn rank_block(web: &WebSpec) -> Result<RankBlock, WebError> {
    let seeds = stability_seeds(web);
    let report = match web.d() {
        3 => stable_verdict(web, &seeds, three_web_rank)?,
        4 => stable_verdict(web, &seeds, classify_rank4)?,
        5 => stable_verdict(web, &seeds, max_rank_5web)?,
        d => return Err(WebError::UnsupportedSize(d)),
    };
    Ok(RankBlock {
        verdict: report.verdict,
        criterion: report.criterion,
        seeds,
        evidence: report.evidence,
    })
}

fn abel_block(web: &WebSpec) -> Result<AbelBlock, WebError> {
    let trace = abel_trace(web)?;
    Ok(AbelBlock {
        steps: trace
            .steps
            .iter()
            .map(|s| AbelStep {
                label: s.label.to_string(),
                rule: s.rule.clone(),
                equation: s.equation.render(),
            })
            .collect(),
        terminal: trace.terminal.as_ref().map(|e| e.render()),
        order: trace.order,
        separable: trace.separable,
        system: trace.system.iter().map(|e| e.render()).collect(),
        diagnostic: trace.diagnostic,
    })
}

fn geodesic_block(web: &WebSpec) -> Result<GeodesicBlock, WebError> {
    let defects = if web.d() >= 5 {
        geodesic_defects(web)?
            .iter()
            .map(|e| Quantity::of(web, e))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        Vec::new()
    };
    Ok(GeodesicBlock {
        geodesic: geodesic_test(web)?,
        defects,
    })
}

fn linearizability_block(web: &WebSpec) -> Result<LinearizabilityBlock, WebError> {
    let report = linearizability_verdict(web)?;
    let sub = if web.d() == 4 {
        web.clone()
    } else {
        web.subweb(&[0, 1, 2, 3])?
    };
    let lio = liouville(&sub)?;
    Ok(LinearizabilityBlock {
        report,
        l1: Quantity::of(&sub, &lio.l1)?,
        l2: Quantity::of(&sub, &lio.l2)?,
    })
}

fn relation_blocks(web: &WebSpec, relations: &[(String, Vec<Expr>)]) -> Result<Vec<RelationBlock>, WebError> {
    relations
        .iter()
        .map(|(name, fs)| {
            let c = verify_relation(web, fs)?;
            Ok(RelationBlock {
                name: name.clone(),
                holds: c.holds,
                mean: c.mean,
                std_dev: c.std_dev,
                gradient_vanishes: c.gradient_vanishes,
            })
        })
        .collect()
}

/// Run `command` on a validated web and fill in the report.
pub fn run(command: Command, web: &WebSpec, relations: &[(String, Vec<Expr>)], report: &mut Report) {
    let all = command == Command::Analyze;
    let d = web.d();
    if all || command == Command::Curvature {
        let r = curvature_block(web);
        report.results.curvature = report.record("curvature", r);
    }
    if all || command == Command::Invariants {
        let r = invariants_block(web);
        report.results.invariants = report.record("invariants", r);
    }
    if all || command == Command::Rank {
        let r = rank_block(web);
        report.results.rank = report.record("rank", r);
    }
    if all || command == Command::Abel {
        let r = abel_block(web);
        report.results.abel = report.record("abel", r);
    }
    if (all && d >= 4) || command == Command::Geodesic {
        let r = geodesic_block(web);
        report.results.geodesic = report.record("geodesic", r);
    }
    if (all && d >= 4) || command == Command::Linearizable {
        let r = linearizability_block(web);
        let block = report.record("linearizability", r);
        if let Some(b) = &block {
            if b.report.verdict == Linearizability::Indeterminate {
                report.escalate(Status::Indeterminate);
            }
        }
        report.results.linearizability = block;
    }
    if (all && !relations.is_empty()) || command == Command::VerifyRelation {
        let r = if relations.is_empty() {
            Err(WebError::Precondition("the spec file has no [[relation]] entries".into()))
        } else {
            relation_blocks(web, relations)
        };
        report.results.relations = report.record("verify-relation", r);
    }
}
