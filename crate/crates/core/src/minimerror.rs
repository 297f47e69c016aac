//! Minimerror: a single binary unit trained by deterministic annealing.
//!
//! The cost is `E = 1/2 sum_mu [1 - tanh(gamma_mu / 2T)]` where
//! `gamma_mu = tau_mu (w . xi_mu) / |w|` is the stability of pattern mu. Each
//! batch epoch adds `eps * sum_mu tau_mu xi_mu / cosh^2(gamma_mu / 2T)` to the
//! weights, using `T-` for misclassified patterns and `T+ = T- / theta` for the
//! others, renormalizes to `|w| = sqrt(N+1)`, and raises `1/T+` by a fixed step.
//! Lowering the temperature narrows the window of patterns that still move the
//! hyperplane, so late epochs only refine its position.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::BinarySet;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

/// Beyond this argument `1/cosh^2` is below 1e-260 and is taken as zero.
const COSH_GUARD: f64 = 300.0;

/// Relative size of the seeded perturbation added to the Hebbian start.
const INIT_NOISE: f64 = 0.1;

/// Starting `T+` of the default schedule. Hotter starts let the early,
/// nearly uniform updates drag the unit towards the Hebbian direction and
/// lose the hard parity optimum.
pub const DEFAULT_START_TEMPERATURE: f64 = 0.5;

/// Weights of one threshold unit, bias first.
#[derive(Debug, Clone, PartialEq)]
pub struct PerceptronWeights(Vec<f64>);

impl PerceptronWeights {
    /// Wraps raw weights without rescaling.
    pub fn new(w: Vec<f64>) -> Self {
        Self(w)
    }

    /// Rescales to `|w| = sqrt(len)`.
    pub fn normalized(w: Vec<f64>) -> Result<Self> {
        normalize(&w).map(Self)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Input dimension N (the vector holds N+1 weights).
    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn bias(&self) -> f64 {
        self.0[0]
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    /// Weighted sum `w . xi` for an augmented input.
    pub fn field(&self, input: &[f64]) -> f64 {
        dot(&self.0, input)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimerrorConfig {
    pub learning_rate: f64,
    /// Increment of `1/T+` per epoch.
    pub annealing_rate: f64,
    /// `T- / T+`.
    pub theta: f64,
    /// Starting `T+`; `None` means `sqrt(N+1)`, the largest stability a
    /// normalized unit can give a standardized pattern.
    pub initial_temperature: Option<f64>,
    pub stop_temperature: f64,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for MinimerrorConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.02,
            annealing_rate: 1e-3,
            theta: 6.0,
            initial_temperature: Some(DEFAULT_START_TEMPERATURE),
            stop_temperature: 0.2,
            max_epochs: 20_000,
            seed: 0,
        }
    }
}

impl MinimerrorConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn start_temperature(&self, dim: usize) -> f64 {
        self.initial_temperature
            .unwrap_or_else(|| ((dim + 1) as f64).sqrt())
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let t0 = self.start_temperature(dim);
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.learning_rate > 0.0) {
            return bad("learning rate must be positive");
        }
        if !(self.annealing_rate > 0.0) {
            return bad("annealing rate must be positive");
        }
        if !(self.theta >= 1.0) {
            return bad("temperature ratio must be at least 1");
        }
        if !(self.stop_temperature > 0.0 && t0 > self.stop_temperature) {
            return bad("need initial temperature > stop temperature > 0");
        }
        Ok(())
    }
}

/// Outcome of [`train_perceptron`]. Weights live in the space of the set
/// that was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub weights: PerceptronWeights,
    pub training_errors: usize,
    pub final_cost: f64,
    pub epochs_run: usize,
    pub final_temperature: f64,
}

/// Snapshot handed to the observer at the start of every epoch.
#[derive(Debug)]
pub struct EpochState<'a> {
    pub epoch: usize,
    pub t_plus: f64,
    pub t_minus: f64,
    pub errors: usize,
    pub weights: &'a [f64],
}

/// `tau (w . xi) / |w|`.
pub fn stability(w: &[f64], input: &[f64], target: i8) -> Result<f64> {
    let len = norm(w);
    if !(len > 0.0) {
        return Err(Error::ZeroWeights);
    }
    Ok(target as f64 * dot(w, input) / len)
}

pub fn cost(w: &[f64], set: &BinarySet, temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::NonPositiveTemperature(temperature));
    }
    let len = norm(w);
    if !(len > 0.0) {
        return Err(Error::ZeroWeights);
    }
    Ok(set
        .iter()
        .map(|(x, t)| {
            let gamma = t as f64 * dot(w, x) / len;
            0.5 * (1.0 - (gamma / (2.0 * temperature)).tanh())
        })
        .sum())
}

#[inline]
fn window(arg: f64) -> f64 {
    if arg.abs() > COSH_GUARD {
        0.0
    } else {
        let c = arg.cosh();
        1.0 / (c * c)
    }
}

/// Unscaled update direction (the caller multiplies by the learning rate).
pub fn weight_update_direction(
    w: &[f64],
    set: &BinarySet,
    t_plus: f64,
    t_minus: f64,
) -> Result<Vec<f64>> {
    for t in [t_plus, t_minus] {
        if !(t > 0.0) {
            return Err(Error::NonPositiveTemperature(t));
        }
    }
    let len = norm(w);
    if !(len > 0.0) {
        return Err(Error::ZeroWeights);
    }
    let mut dir = vec![0.0; w.len()];
    accumulate(w, len, set, t_plus, t_minus, &mut dir);
    Ok(dir)
}

/// Adds the update terms into `dir` and returns the error count of `w`.
fn accumulate(
    w: &[f64],
    len: f64,
    set: &BinarySet,
    t_plus: f64,
    t_minus: f64,
    dir: &mut [f64],
) -> usize {
    let mut errors = 0;
    for (x, t) in set.iter() {
        let field = dot(w, x);
        let tau = t as f64;
        let gamma = tau * field / len;
        let temp = if gamma <= 0.0 {
            errors += 1;
            t_minus
        } else {
            t_plus
        };
        let coef = tau * window(gamma / (2.0 * temp));
        if coef != 0.0 {
            dir.iter_mut().zip(x).for_each(|(d, xi)| *d += coef * xi);
        }
    }
    errors
}

/// Rescales `w` to norm `sqrt(len(w))`.
pub fn normalize(w: &[f64]) -> Result<Vec<f64>> {
    let len = norm(w);
    if !(len > 0.0) || !len.is_finite() {
        return Err(Error::ZeroWeights);
    }
    let scale = (w.len() as f64).sqrt() / len;
    Ok(w.iter().map(|x| x * scale).collect())
}

/// Patterns with `gamma <= 0`; a pattern on the hyperplane counts as an error.
pub fn count_errors(w: &[f64], set: &BinarySet) -> usize {
    set.iter()
        .filter(|(x, t)| *t as f64 * dot(w, x) <= 0.0)
        .count()
}

/// `tanh(|w . xi| / (|w| 2T))`.
pub fn confidence(w: &[f64], input: &[f64], temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::NonPositiveTemperature(temperature));
    }
    let len = norm(w);
    if !(len > 0.0) {
        return Err(Error::ZeroWeights);
    }
    Ok((dot(w, input).abs() / (len * 2.0 * temperature)).tanh())
}

/// Hebbian start plus a seeded perturbation, normalized. A vanishing Hebbian
/// sum leaves only the random part.
fn initial_weights(set: &BinarySet, seed: u64) -> Vec<f64> {
    let width = set.dim() + 1;
    let mut hebb = vec![0.0; width];
    for (x, t) in set.iter() {
        hebb.iter_mut().zip(x).for_each(|(h, xi)| *h += t as f64 * xi);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..width).map(|_| StandardNormal.sample(&mut rng)).collect();
    let noise = normalize(&noise).unwrap_or_else(|_| unit_bias(width));
    let start = normalize(&hebb).unwrap_or_else(|_| unit_bias(width));
    let w: Vec<f64> = start
        .iter()
        .zip(&noise)
        .map(|(a, b)| a + INIT_NOISE * b)
        .collect();
    normalize(&w).unwrap_or_else(|_| unit_bias(width))
}

fn unit_bias(width: usize) -> Vec<f64> {
    let mut w = vec![0.0; width];
    w[0] = (width as f64).sqrt();
    w
}

/// Trains one unit on `set`. Returns the weights with the fewest training
/// errors seen during the run (latest on ties).
pub fn train_perceptron(set: &BinarySet, cfg: &MinimerrorConfig) -> Result<TrainReport> {
    train_perceptron_observed(set, cfg, |_| {})
}

/// As [`train_perceptron`], calling `observer` once per epoch before the
/// update.
pub fn train_perceptron_observed<F>(
    set: &BinarySet,
    cfg: &MinimerrorConfig,
    observer: F,
) -> Result<TrainReport>
where
    F: FnMut(&EpochState<'_>),
{
    run(set, cfg, None, observer)
}

/// As [`train_perceptron`], but annealing starts from `start` instead of the
/// Hebbian guess. The result is never worse than `start` on `set`.
pub fn train_perceptron_from(
    set: &BinarySet,
    cfg: &MinimerrorConfig,
    start: &[f64],
) -> Result<TrainReport> {
    if start.len() != set.dim() + 1 {
        return Err(Error::DimensionMismatch {
            expected: set.dim() + 1,
            found: start.len(),
        });
    }
    run(set, cfg, Some(start), |_| {})
}

fn run<F>(
    set: &BinarySet,
    cfg: &MinimerrorConfig,
    start: Option<&[f64]>,
    mut observer: F,
) -> Result<TrainReport>
where
    F: FnMut(&EpochState<'_>),
{
    if set.is_empty() {
        return Err(Error::EmptyDataset {
            needed: 1,
            found: 0,
        });
    }
    if set.dim() == 0 {
        return Err(Error::InvalidConfig("perceptron needs at least one input".into()));
    }
    cfg.validate(set.dim())?;

    let width = set.dim() + 1;
    let mut w = match start {
        Some(w0) => normalize(w0)?,
        None => initial_weights(set, cfg.seed),
    };
    let mut inv_t = 1.0 / cfg.start_temperature(set.dim());
    let mut best = w.clone();
    let mut best_errors = usize::MAX;
    let mut dir = vec![0.0; width];
    let mut epoch = 0;
    let t_plus = loop {
        let t_plus = 1.0 / inv_t;
        let t_minus = cfg.theta * t_plus;
        dir.iter_mut().for_each(|d| *d = 0.0);
        let errors = accumulate(&w, norm(&w), set, t_plus, t_minus, &mut dir);
        if errors <= best_errors {
            best_errors = errors;
            best.copy_from_slice(&w);
        }
        observer(&EpochState {
            epoch,
            t_plus,
            t_minus,
            errors,
            weights: &w,
        });
        if (errors == 0 && t_plus <= cfg.stop_temperature) || epoch == cfg.max_epochs {
            break t_plus;
        }
        let stepped: Vec<f64> = w
            .iter()
            .zip(&dir)
            .map(|(wi, d)| wi + cfg.learning_rate * d)
            .collect();
        w = normalize(&stepped)?;
        inv_t += cfg.annealing_rate;
        epoch += 1;
    };

    let final_cost = cost(&best, set, t_plus)?;
    Ok(TrainReport {
        weights: PerceptronWeights(best),
        training_errors: best_errors,
        final_cost,
        epochs_run: epoch,
        final_temperature: t_plus,
    })
}
