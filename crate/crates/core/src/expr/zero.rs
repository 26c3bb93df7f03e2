//! Probabilistic identity testing by random evaluation.
//!
//! An expression is declared identically zero when it is numerically zero
//! at `samples` random points of a box. The check is one-sided: a `false`
//! verdict is backed by a witness point, a `true` verdict is a high
//! confidence claim that can in principle be wrong for adversarial inputs.
//!
//! "Numerically zero" is relative: the value at a point is compared with
//! the rounding scale of the expression there, the size the value would
//! have if no cancellation took place (see `Tape::eval_with_scale`). A
//! fixed absolute floor is not used because web invariants are relative
//! invariants whose magnitudes span many orders depending on the chart.
//!
//! Rational functions are additionally evaluated exactly in a prime field
//! (see [`super::modular`]). When that is possible its verdict is the one
//! returned; the floating-point magnitudes are still reported as evidence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::modular::{ModTape, MODULUS};
use super::{Env, EvalError, Expr, Tape};

/// Sample points with one value per expression at each.
pub type Samples = Vec<((f64, f64), Vec<f64>)>;

/// Default cap on the DAG size of a single expression.
pub const DEFAULT_NODE_CAP: usize = 2_000_000;

/// Rectangle `[x_min, x_max] × [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl SampleBox {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<SampleBox, ZeroTestError> {
        let b = SampleBox {
            x_min,
            x_max,
            y_min,
            y_max,
        };
        if !(x_min.is_finite() && x_max.is_finite() && y_min.is_finite() && y_max.is_finite())
            || x_max <= x_min
            || y_max <= y_min
        {
            return Err(ZeroTestError::InvalidConfig(format!(
                "sample box [{x_min}, {x_max}] x [{y_min}, {y_max}] has no area"
            )));
        }
        Ok(b)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.y_min..=self.y_max).contains(&y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    /// Number of sample points `M`.
    pub samples: usize,
    /// Zero tolerance, relative to the rounding scale of the expression.
    pub tolerance: f64,
    pub seed: u64,
    pub domain: SampleBox,
    /// Evaluation attempts allowed per requested sample before giving up.
    pub retries_per_sample: usize,
    pub node_cap: usize,
    /// Decide rational functions by exact modular evaluation.
    #[serde(default = "exact_default")]
    pub exact_rational: bool,
}

fn exact_default() -> bool {
    true
}

impl SampleConfig {
    pub const DEFAULT_SAMPLES: usize = 24;
    pub const DEFAULT_TOLERANCE: f64 = 1e-13;
    pub const DEFAULT_SEED: u64 = 0x5eed_2009;

    pub fn new(domain: SampleBox) -> SampleConfig {
        SampleConfig {
            samples: Self::DEFAULT_SAMPLES,
            tolerance: Self::DEFAULT_TOLERANCE,
            seed: Self::DEFAULT_SEED,
            domain,
            retries_per_sample: 20,
            node_cap: DEFAULT_NODE_CAP,
            exact_rational: true,
        }
    }

    /// Switch the exact test for rational functions on or off.
    pub fn with_exact_rational(mut self, exact: bool) -> Self {
        self.exact_rational = exact;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn validate(&self) -> Result<(), ZeroTestError> {
        if self.samples < 8 {
            return Err(ZeroTestError::InvalidConfig(format!(
                "sample count {} is below the minimum of 8",
                self.samples
            )));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(ZeroTestError::InvalidConfig(format!(
                "tolerance {} must be positive",
                self.tolerance
            )));
        }
        SampleBox::new(
            self.domain.x_min,
            self.domain.x_max,
            self.domain.y_min,
            self.domain.y_max,
        )?;
        Ok(())
    }

    /// Deterministic stream of candidate points in the box.
    pub fn point_stream(&self) -> impl Iterator<Item = (f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let b = self.domain;
        std::iter::repeat_with(move || {
            (
                rng.gen_range(b.x_min..=b.x_max),
                rng.gen_range(b.y_min..=b.y_max),
            )
        })
    }

    /// Evaluate `exprs` jointly at `samples` points where all of them are
    /// defined. Returns the points and, per point, one value per expression.
    pub fn sample_many(&self, exprs: &[Expr]) -> Result<Samples, ZeroTestError> {
        self.validate()?;
        let tape = Tape::compile(exprs);
        let mut out = Vec::with_capacity(self.samples);
        let mut last_error = None;
        let budget = self.samples * self.retries_per_sample;
        for (tried, (x, y)) in self.point_stream().enumerate() {
            if out.len() == self.samples {
                break;
            }
            if tried >= budget {
                return Err(ZeroTestError::InsufficientDomain {
                    found: out.len(),
                    wanted: self.samples,
                    last_error,
                });
            }
            match tape.eval(&Env::xy(x, y)) {
                Ok(v) => out.push(((x, y), v)),
                Err(e) => last_error = Some(e),
            }
        }
        Ok(out)
    }

    /// Sampled zero test with the measured magnitudes.
    pub fn check_zero(&self, e: &Expr) -> Result<SampledCheck, ZeroTestError> {
        self.validate()?;
        if let Some(q) = e.as_const() {
            let v = num_traits::ToPrimitive::to_f64(q).unwrap_or(f64::NAN);
            return Ok(SampledCheck {
                is_zero: v == 0.0,
                max_abs: v.abs(),
                max_normalized: v.abs(),
                witness: None,
                exact: Some(v == 0.0),
            });
        }
        let tape = Tape::compile(std::slice::from_ref(e));
        let mut found = 0;
        let mut last_error = None;
        let mut check = SampledCheck {
            is_zero: true,
            max_abs: 0.0,
            max_normalized: 0.0,
            witness: None,
            exact: None,
        };
        let budget = self.samples * self.retries_per_sample;
        for (tried, (x, y)) in self.point_stream().enumerate() {
            if found == self.samples {
                break;
            }
            if tried >= budget {
                return Err(ZeroTestError::InsufficientDomain {
                    found,
                    wanted: self.samples,
                    last_error,
                });
            }
            let (value, scale) = match tape.eval_with_scale(&Env::xy(x, y)) {
                Ok(r) => r,
                Err(err) => {
                    last_error = Some(err);
                    continue;
                }
            };
            found += 1;
            let normalized = normalize(value, scale);
            check.max_abs = check.max_abs.max(value.abs());
            if normalized > check.max_normalized {
                check.max_normalized = normalized;
            }
            if normalized > self.tolerance && check.witness.is_none() {
                check.is_zero = false;
                check.witness = Some((x, y, value));
            }
        }
        if self.exact_rational {
            if let Some(exact) = self.modular_zero(e) {
                check.exact = Some(exact);
                check.is_zero = exact;
            }
        }
        Ok(check)
    }

    /// Exact test at `samples` random points of the prime field; `None` if
    /// `e` is not a rational function or too many points hit a pole.
    fn modular_zero(&self, e: &Expr) -> Option<bool> {
        let tape = ModTape::compile(std::slice::from_ref(e))?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x6d_6f64_756c_6172);
        let mut found = 0;
        for _ in 0..self.samples * self.retries_per_sample {
            let (x, y) = (rng.gen_range(0..MODULUS), rng.gen_range(0..MODULUS));
            if let Some(v) = tape.eval(x, y) {
                if v[0] != 0 {
                    return Some(false);
                }
                found += 1;
                if found == self.samples {
                    return Some(true);
                }
            }
        }
        None
    }

    /// `true` iff `e` vanishes at every sample point (within tolerance).
    pub fn is_identically_zero(&self, e: &Expr) -> Result<bool, ZeroTestError> {
        Ok(self.check_zero(e)?.is_zero)
    }

    /// Sampled test of `a ≡ b`.
    pub fn are_equal(&self, a: &Expr, b: &Expr) -> Result<bool, ZeroTestError> {
        self.is_identically_zero(&a.sub(b))
    }
}

/// `|value| / scale`, with `0/0` read as zero.
pub(crate) fn normalize(value: f64, scale: f64) -> f64 {
    if value == 0.0 {
        0.0
    } else {
        value.abs() / scale
    }
}

/// Outcome of a sampled zero test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledCheck {
    pub is_zero: bool,
    pub max_abs: f64,
    /// Largest `|e(p)| / scale(p)` over the sample.
    pub max_normalized: f64,
    /// First point `(x, y, value)` that failed the floating-point test.
    pub witness: Option<(f64, f64, f64)>,
    /// Verdict of the exact modular test, when `e` is a rational function.
    pub exact: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ZeroTestError {
    #[error("only {found} of {wanted} sample points could be evaluated (last error: {last_error:?})")]
    InsufficientDomain {
        found: usize,
        wanted: usize,
        last_error: Option<EvalError>,
    },
    #[error("invalid sampling configuration: {0}")]
    InvalidConfig(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn cfg() -> SampleConfig {
        SampleConfig::new(SampleBox::new(1.0, 2.0, 1.0, 2.0).unwrap())
    }

    #[test]
    fn identities_vanish() {
        assert!(cfg().is_identically_zero(&parse("x - x").unwrap()).unwrap());
        let e = parse("(x+y)^2 - x^2 - 2*x*y - y^2").unwrap();
        assert!(cfg().is_identically_zero(&e).unwrap());
        let e = parse("sin(x)^2 + cos(x)^2 - 1").unwrap();
        assert!(cfg().is_identically_zero(&e).unwrap());
    }

    #[test]
    fn non_identity_has_witness() {
        let c = cfg().check_zero(&parse("x*y - x - y").unwrap()).unwrap();
        assert!(!c.is_zero);
        let (x, y, v) = c.witness.unwrap();
        assert!((v - (x * y - x - y)).abs() < 1e-12);
    }

    #[test]
    fn small_values_are_not_zero() {
        let e = parse("(x/10^8)*(y/10^8) - (x/10^9)*(y/10^9)").unwrap();
        assert!(!cfg().is_identically_zero(&e).unwrap());
        let e = parse("(x/10^8 + y)*(x/10^8 - y) - x^2/10^16 + y^2").unwrap();
        assert!(cfg().is_identically_zero(&e).unwrap());
    }

    #[test]
    fn seed_stability() {
        let e = parse("x*y - x - y + 1").unwrap();
        let a = cfg().with_seed(7).check_zero(&e).unwrap();
        let b = cfg().with_seed(7).check_zero(&e).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn insufficient_domain() {
        let e = parse("log(-x)").unwrap();
        assert!(matches!(
            cfg().is_identically_zero(&e),
            Err(ZeroTestError::InsufficientDomain { found: 0, .. })
        ));
    }

    #[test]
    fn config_validation() {
        assert!(SampleBox::new(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(cfg().with_samples(4).validate().is_err());
        assert!(cfg().with_tolerance(0.0).validate().is_err());
    }
}
