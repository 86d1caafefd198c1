//! Floating-point stability of geodesics near the boundary of `L₊(n)`.
//!
//! Each trial draws a random Cholesky point and tangent, pushes the smallest
//! diagonal entry down to `eps`, evaluates the raw geodesic and counts a
//! failure when any output entry is Inf or NaN.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cholesky::CholeskyMetric;
use crate::error::{Error, Result};
use crate::linalg::{CholeskyPoint, LowerTri, Matrix, Mode};
use crate::random::mix_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StabilityMetric {
    Cm,
    Dem,
    Dgbwm,
}

impl StabilityMetric {
    fn id(self) -> u64 {
        match self {
            StabilityMetric::Cm => 0,
            StabilityMetric::Dem => 1,
            StabilityMetric::Dgbwm => 2,
        }
    }

    /// Whether the metric depends on θ (CM is its own deformation).
    pub fn uses_theta(self) -> bool {
        self != StabilityMetric::Cm
    }

    /// The raw-mode metric at deformation `theta`.
    pub fn metric(self, theta: f64) -> Result<CholeskyMetric> {
        let g = match self {
            StabilityMetric::Cm => CholeskyMetric::cm(),
            StabilityMetric::Dem => CholeskyMetric::dem(theta)?,
            StabilityMetric::Dgbwm => CholeskyMetric::dgbwm(theta, None)?,
        };
        Ok(g.with_mode(Mode::Raw))
    }
}

impl fmt::Display for StabilityMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StabilityMetric::Cm => "CM",
            StabilityMetric::Dem => "DEM",
            StabilityMetric::Dgbwm => "DGBWM",
        })
    }
}

impl FromStr for StabilityMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "CM" => Ok(StabilityMetric::Cm),
            "DEM" => Ok(StabilityMetric::Dem),
            "DGBWM" | "DBWM" => Ok(StabilityMetric::Dgbwm),
            _ => Err(Error::Config(format!("unknown metric `{s}` (expected CM, DEM or DGBWM)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityConfig {
    pub n: usize,
    pub trials: usize,
    pub eps: Vec<f64>,
    pub thetas: Vec<f64>,
    pub metrics: Vec<StabilityMetric>,
    pub seed: u64,
    /// Geodesic parameter at which the output is inspected.
    pub t: f64,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self {
            n: 3,
            trials: 1000,
            eps: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-10, 1e-15],
            thetas: vec![0.5, 1.5],
            metrics: vec![StabilityMetric::Cm, StabilityMetric::Dem, StabilityMetric::Dgbwm],
            seed: 0,
            t: 1.0,
        }
    }
}

impl StabilityConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.into()));
        if self.n == 0 {
            return bad("n must be positive");
        }
        if self.trials == 0 {
            return bad("trials must be positive");
        }
        if self.eps.is_empty() || self.eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return bad("eps values must be positive and finite");
        }
        if self.metrics.is_empty() {
            return bad("at least one metric is required");
        }
        if self.metrics.iter().any(|m| m.uses_theta()) && self.thetas.is_empty() {
            return bad("DEM and DGBWM need at least one theta");
        }
        if self.thetas.iter().any(|t| *t == 0.0 || !t.is_finite()) {
            return bad("theta values must be nonzero and finite");
        }
        if !self.t.is_finite() {
            return bad("t must be finite");
        }
        Ok(())
    }
}

/// Outcome for one (metric, θ, eps) combination.
#[derive(Clone, Debug, PartialEq)]
pub struct FailureCell {
    pub metric: StabilityMetric,
    /// `None` for CM.
    pub theta: Option<f64>,
    pub eps: f64,
    pub t: f64,
    pub trials: usize,
    pub failures: usize,
    /// Index of the first failing trial.
    pub first_failure: Option<usize>,
}

impl FailureCell {
    /// Failure rate in percent.
    pub fn rate(&self) -> f64 {
        100.0 * self.failures as f64 / self.trials as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FailureReport {
    pub cells: Vec<FailureCell>,
}

impl FailureReport {
    pub fn cell(&self, metric: StabilityMetric, theta: Option<f64>, eps: f64) -> Option<&FailureCell> {
        self.cells
            .iter()
            .find(|c| c.metric == metric && c.eps == eps && (!metric.uses_theta() || c.theta == theta))
    }
}

fn signed_unit(rng: &mut impl Rng) -> f64 {
    let magnitude: f64 = rng.gen_range(0.0..=1.0);
    if rng.gen::<bool>() {
        magnitude
    } else {
        -magnitude
    }
}

/// Random `(L, X)`: strictly lower entries of both have a uniform `[0, 1]`
/// magnitude and a fair-coin sign; `L_ii` is uniform on `(0, 1]` and `X_ii` on `[0, 1]`.
pub fn gen_random_instance(n: usize, rng: &mut impl Rng) -> (CholeskyPoint, LowerTri) {
    let l = Matrix::from_fn(n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Greater => signed_unit(rng),
        std::cmp::Ordering::Equal => 1.0 - rng.gen::<f64>(),
        std::cmp::Ordering::Less => 0.0,
    });
    let x = Matrix::from_fn(n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Greater => signed_unit(rng),
        std::cmp::Ordering::Equal => rng.gen_range(0.0..=1.0),
        std::cmp::Ordering::Less => 0.0,
    });
    (CholeskyPoint::new_unchecked(LowerTri::from_lower(&l)), LowerTri::from_lower(&x))
}

/// Replaces the smallest diagonal entry (lowest index on ties) by `eps`.
pub fn set_min_diag(l: &CholeskyPoint, eps: f64) -> CholeskyPoint {
    let d = l.diagonal();
    let mut idx = 0;
    for (i, &v) in d.iter().enumerate() {
        if v < d[idx] {
            idx = i;
        }
    }
    let mut m = l.as_matrix().clone();
    m[(idx, idx)] = eps;
    CholeskyPoint::new_unchecked(LowerTri::from_lower(&m))
}

/// The `(L, X)` pair used by trial `trial` of a cell.
pub fn trial_instance(
    seed: u64,
    metric: StabilityMetric,
    theta: Option<f64>,
    eps: f64,
    trial: usize,
    n: usize,
) -> (CholeskyPoint, LowerTri) {
    let stream = mix_seed(&[
        seed,
        metric.id(),
        theta.map_or(0, f64::to_bits),
        eps.to_bits(),
        trial as u64,
    ]);
    let mut rng = ChaCha8Rng::seed_from_u64(stream);
    let (l, x) = gen_random_instance(n, &mut rng);
    (set_min_diag(&l, eps), x)
}

fn run_cell(config: &StabilityConfig, metric: StabilityMetric, theta: Option<f64>, eps: f64) -> Result<FailureCell> {
    let g = metric.metric(theta.unwrap_or(1.0))?;
    let failed: Vec<usize> = (0..config.trials)
        .into_par_iter()
        .filter_map(|i| {
            let (l, x) = trial_instance(config.seed, metric, theta, eps, i, config.n);
            let out = g.geodesic(&l, &x, config.t).expect("raw geodesic does not fail");
            (!out.is_finite()).then_some(i)
        })
        .collect();
    Ok(FailureCell {
        metric,
        theta,
        eps,
        t: config.t,
        trials: config.trials,
        failures: failed.len(),
        first_failure: failed.iter().min().copied(),
    })
}

/// Runs every cell of `config`. Results depend only on the configuration, not
/// on the number of worker threads.
pub fn stability_experiment(config: &StabilityConfig) -> Result<FailureReport> {
    config.validate()?;
    let mut cells = Vec::new();
    for &metric in &config.metrics {
        let thetas: Vec<Option<f64>> = if metric.uses_theta() {
            config.thetas.iter().copied().map(Some).collect()
        } else {
            vec![None]
        };
        for theta in thetas {
            for &eps in &config.eps {
                cells.push(run_cell(config, metric, theta, eps)?);
            }
        }
    }
    Ok(FailureReport { cells })
}
