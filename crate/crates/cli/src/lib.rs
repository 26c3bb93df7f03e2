//! Front end for `webrank`: spec files in, JSON reports out.
pub mod report;
pub mod specfile;

use std::path::Path;

use report::{Command, InputEcho, Report};
use specfile::{load_webspec, parse_order, SpecError};
use webrank_core::web::make_web;
use webrank_core::{SampleConfig, WebError};

/// Environment variable supplying a default seed.
pub const SEED_ENV: &str = "WEBRANK_SEED";

/// Command-line overrides; `None` keeps the file's (or the default) value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub tolerance: Option<f64>,
    pub order: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("invalid web: {0}")]
    Web(#[from] WebError),
    #[error("invalid {0} in {1}: {2}")]
    Env(&'static str, &'static str, String),
}

/// Load, configure and analyze. Input problems are errors; analysis
/// problems end up inside the report.
pub fn execute(command: Command, path: &Path, over: &Overrides) -> Result<Report, CliError> {
    let spec = load_webspec(path)?;
    let d = spec.functions.len();

    let env_seed = match std::env::var(SEED_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<u64>()
                .map_err(|e| CliError::Env("seed", SEED_ENV, e.to_string()))?,
        ),
        Err(_) => None,
    };
    let s = &spec.file.sampling;
    let mut cfg = SampleConfig::new(spec.domain);
    if let Some(seed) = over.seed.or(s.seed).or(env_seed) {
        cfg = cfg.with_seed(seed);
    }
    if let Some(n) = over.samples.or(s.samples) {
        cfg = cfg.with_samples(n);
    }
    if let Some(t) = over.tolerance.or(s.tolerance) {
        cfg = cfg.with_tolerance(t);
    }
    cfg.validate().map_err(WebError::from)?;

    let order = match &over.order {
        Some(text) => parse_order(text, d)?,
        None => (0..d).collect(),
    };
    let functions = order.iter().map(|&k| spec.functions[k].clone()).collect();
    let web = make_web(functions, spec.domain, &cfg)?;
    let relations: Vec<_> = spec
        .relations
        .iter()
        .map(|(name, fs)| (name.clone(), order.iter().map(|&k| fs[k].clone()).collect()))
        .collect();

    let input = InputEcho {
        name: spec.file.name.clone(),
        digest: spec.digest.clone(),
        functions: web.functions().iter().map(|f| f.to_string()).collect(),
        order: order.iter().map(|k| k + 1).collect(),
        domain: spec.domain,
    };
    let mut report = Report::new(command, input, &web);
    report::run(command, &web, &relations, &mut report);
    Ok(report)
}
