//! The boosting loop and the quantities it tracks.
//!
//! Exponential-loss training is AdaBoost: `D_{t+1}(i) ∝ D_t(i) exp(-α_t y_i h_t(x_i))`.
//! Logistic-loss training recomputes `D_t(i) ∝ b_i / (1 + exp(y_i f_{t-1}(x_i)))`
//! from scratch every round and picks `α_t` by line search on the logistic
//! objective.

use std::io::Write;

use crate::data::{Dataset, WeightDistribution};
use crate::error::{Error, Result};
use crate::losses::Link;
use crate::scalar::{log1p_exp, sigmoid, sign, Scalar};
use crate::stump::{weighted_error, Stump, StumpMode, StumpSearchConfig, StumpSearcher, MAX_SCORE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoostLoss {
    Exponential,
    Logistic,
}

impl BoostLoss {
    pub fn name(self) -> &'static str {
        match self {
            BoostLoss::Exponential => "exponential",
            BoostLoss::Logistic => "logistic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "exponential" | "exp" => Ok(BoostLoss::Exponential),
            "logistic" | "log" => Ok(BoostLoss::Logistic),
            other => Err(Error::InvalidArgument(format!("unknown loss `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaStrategy {
    /// `½ ln((1-ε)/ε)`; binary stumps only.
    ClosedFormBinary,
    /// Exact 1-D minimization of the round objective (Z for exponential loss,
    /// the logistic loss otherwise).
    LineSearch,
    /// `α = 1`, for confidence-rated stumps whose outputs already carry scale.
    Unit,
}

impl AlphaStrategy {
    pub fn name(self) -> &'static str {
        match self {
            AlphaStrategy::ClosedFormBinary => "closed_form_binary",
            AlphaStrategy::LineSearch => "line_search",
            AlphaStrategy::Unit => "unit",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "closed_form_binary" | "closed_form" => Ok(AlphaStrategy::ClosedFormBinary),
            "line_search" => Ok(AlphaStrategy::LineSearch),
            "unit" => Ok(AlphaStrategy::Unit),
            other => Err(Error::InvalidArgument(format!("unknown alpha strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostConfig<T> {
    pub rounds: usize,
    pub loss: BoostLoss,
    pub stump: StumpSearchConfig<T>,
    pub alpha: AlphaStrategy,
}

impl<T: Scalar> Default for BoostConfig<T> {
    fn default() -> Self {
        Self::adaboost(100)
    }
}

impl<T: Scalar> BoostConfig<T> {
    /// Plain AdaBoost: binary stumps with the closed-form α.
    pub fn adaboost(rounds: usize) -> Self {
        Self {
            rounds,
            loss: BoostLoss::Exponential,
            stump: StumpSearchConfig::binary(),
            alpha: AlphaStrategy::ClosedFormBinary,
        }
    }

    /// Logistic boosting with confidence-rated stumps and line-search α.
    pub fn logistic(rounds: usize) -> Self {
        Self {
            rounds,
            loss: BoostLoss::Logistic,
            stump: StumpSearchConfig::confidence_rated(),
            alpha: AlphaStrategy::LineSearch,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::InvalidArgument("rounds must be >= 1".into()));
        }
        if self.alpha == AlphaStrategy::ClosedFormBinary && self.stump.mode != StumpMode::Binary {
            return Err(Error::InvalidArgument(
                "closed-form alpha requires binary stumps".into(),
            ));
        }
        self.stump.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term<T> {
    pub alpha: T,
    pub stump: Stump<T>,
}

/// `f(x) = Σ_t α_t h_t(x)`, summed in term order.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveModel<T> {
    dims: usize,
    loss: BoostLoss,
    terms: Vec<Term<T>>,
}

impl<T: Scalar> AdditiveModel<T> {
    pub fn new(dims: usize, loss: BoostLoss) -> Self {
        Self {
            dims,
            loss,
            terms: Vec::new(),
        }
    }

    pub fn from_terms(dims: usize, loss: BoostLoss, terms: Vec<Term<T>>) -> Result<Self> {
        if let Some(t) = terms.iter().find(|t| t.stump.feature >= dims) {
            return Err(Error::InvalidArgument(format!(
                "term reads feature {} but the model has {dims} inputs",
                t.stump.feature
            )));
        }
        Ok(Self { dims, loss, terms })
    }

    pub fn push(&mut self, alpha: T, stump: Stump<T>) {
        self.terms.push(Term { alpha, stump });
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn loss(&self) -> BoostLoss {
        self.loss
    }

    pub fn link(&self) -> Link {
        Link::for_loss(self.loss)
    }

    pub fn terms(&self) -> &[Term<T>] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Model made of the first `t` terms.
    pub fn truncated(&self, t: usize) -> Self {
        Self {
            dims: self.dims,
            loss: self.loss,
            terms: self.terms[..t.min(self.terms.len())].to_vec(),
        }
    }

    fn check_dims(&self, x: &[T]) -> Result<()> {
        if x.len() != self.dims {
            return Err(Error::InvalidArgument(format!(
                "input has {} features, model expects {}",
                x.len(),
                self.dims
            )));
        }
        Ok(())
    }

    pub(crate) fn score_unchecked(&self, x: &[T]) -> T {
        self.terms
            .iter()
            .fold(T::zero(), |acc, t| acc + t.alpha * t.stump.eval(x))
    }

    /// `f(x)`.
    pub fn score(&self, x: &[T]) -> Result<T> {
        self.check_dims(x)?;
        Ok(self.score_unchecked(x))
    }

    /// `H(x) = sign(f(x))` with `sign(0) = +1`.
    pub fn predict(&self, x: &[T]) -> Result<T> {
        self.score(x).map(sign)
    }

    /// `Pr[y = +1 | x]` under the link bound to the training loss.
    pub fn prob_positive(&self, x: &[T]) -> Result<T> {
        self.score(x).map(|f| self.link().apply(f))
    }

    pub fn scores(&self, ds: &Dataset<T>) -> Result<Vec<T>> {
        if ds.dims() != self.dims {
            return Err(Error::InvalidArgument(format!(
                "data has {} features, model expects {}",
                ds.dims(),
                self.dims
            )));
        }
        Ok(ds.rows().map(|x| self.score_unchecked(x)).collect())
    }

    pub fn total_abs_alpha(&self) -> T {
        self.terms.iter().map(|t| t.alpha.abs()).fold(T::zero(), |a, b| a + b)
    }

    /// Unweighted misclassification rate on a classification dataset.
    pub fn error_rate(&self, ds: &Dataset<T>) -> Result<T> {
        ds.require_classification()?;
        let f = self.scores(ds)?;
        Ok(error_rate_of(&f, ds.labels()))
    }
}

pub(crate) fn error_rate_of<T: Scalar>(scores: &[T], labels: &[T]) -> T {
    let wrong = scores
        .iter()
        .zip(labels)
        .filter(|(&f, &y)| sign(f) != y)
        .count();
    T::lit(wrong as f64) / T::lit(labels.len() as f64)
}

/// Statistics recorded after each boosting round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundStats<T> {
    pub round: usize,
    pub alpha: T,
    pub epsilon: T,
    pub gamma: T,
    pub z: T,
    /// `Π_{t' <= t} Z_{t'}`.
    pub cumulative_bound: T,
    /// `exp(-2 Σ_{t' <= t} γ_{t'}^2)`.
    pub exp_bound: T,
    pub train_error: T,
    pub test_error: Option<T>,
    /// True when ε was clamped or α capped this round.
    pub clamped: bool,
}

fn alpha_cap<T: Scalar>(max_abs_h: T) -> T {
    if max_abs_h > T::zero() {
        T::lit(MAX_SCORE) / max_abs_h
    } else {
        T::lit(MAX_SCORE)
    }
}

/// Smallest ε the closed-form α accepts for a given smoothing `s`:
/// `s / (1 + 2s)`.
pub fn epsilon_floor<T: Scalar>(smoothing: T) -> T {
    smoothing / (T::one() + T::two() * smoothing)
}

/// `½ ln((1-ε)/ε)` with ε clamped to `[s/(1+2s), 1 - s/(1+2s)]` and the result
/// capped at `MAX_SCORE`. Returns `(alpha, clamped)`.
pub fn alpha_binary_clamped<T: Scalar>(epsilon: T, smoothing: T) -> Result<(T, bool)> {
    if !(epsilon >= T::zero() && epsilon <= T::one()) {
        return Err(Error::InvalidArgument(format!(
            "weighted error {epsilon} outside [0, 1]"
        )));
    }
    let lo = epsilon_floor(smoothing);
    let hi = T::one() - lo;
    let eps = epsilon.max(lo).min(hi);
    let mut clamped = eps != epsilon;
    let cap = T::lit(MAX_SCORE);
    let mut alpha = T::half() * ((T::one() - eps) / eps).ln();
    if alpha.abs() > cap || !alpha.is_finite() {
        alpha = if alpha > T::zero() { cap } else { -cap };
        clamped = true;
    }
    Ok((alpha, clamped))
}

pub fn alpha_binary<T: Scalar>(epsilon: T, smoothing: T) -> Result<T> {
    alpha_binary_clamped(epsilon, smoothing).map(|(a, _)| a)
}

/// `Z = Σ_i D(i) exp(-α y_i h(x_i))`.
pub fn z_value<T: Scalar>(dist: &[T], outputs: &[T], labels: &[T], alpha: T) -> T {
    dist.iter()
        .zip(outputs)
        .zip(labels)
        .map(|((&d, &h), &y)| d * (-alpha * y * h).exp())
        .sum()
}

/// Minimizes a convex function on `[lo, hi]` given its first and second
/// derivative. Newton steps, falling back to bisection whenever a step leaves
/// the bracket. Stops when `|g'| <= tol` or the bracket collapses.
fn minimize_convex<T: Scalar>(deriv: impl Fn(T) -> (T, T), lo: T, hi: T, tol: T) -> T {
    let (g_lo, _) = deriv(lo);
    if g_lo >= T::zero() {
        return lo;
    }
    let (g_hi, _) = deriv(hi);
    if g_hi <= T::zero() {
        return hi;
    }
    let (mut a, mut b) = (lo, hi);
    let mut x = T::zero().max(lo).min(hi);
    for _ in 0..500 {
        let (g, h) = deriv(x);
        if g.abs() <= tol {
            return x;
        }
        if g > T::zero() {
            b = x;
        } else {
            a = x;
        }
        let newton = x - g / h;
        let next = if h > T::zero() && newton > a && newton < b {
            newton
        } else {
            (a + b) * T::half()
        };
        if next == x || b - a <= T::epsilon() * (T::one() + a.abs().max(b.abs())) {
            return next;
        }
        x = next;
    }
    x
}

fn derivative_tolerance<T: Scalar>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(16.0))
}

/// The α minimizing `Z(α) = Σ D(i) exp(-α y_i h_i)`. If every weighted
/// `y_i h_i` has the same sign, α is pushed to the cap `|α| max|h| = 35`.
pub fn alpha_line_search<T: Scalar>(dist: &[T], outputs: &[T], labels: &[T]) -> Result<T> {
    let margins: Vec<(T, T)> = dist
        .iter()
        .zip(outputs)
        .zip(labels)
        .filter(|((&d, _), _)| d > T::zero())
        .map(|((&d, &h), &y)| (d, y * h))
        .collect();
    if margins.iter().all(|&(_, u)| u == T::zero()) {
        return Err(Error::Uninformative);
    }
    let max_h = outputs.iter().fold(T::zero(), |m, h| m.max(h.abs()));
    let cap = alpha_cap(max_h);
    let deriv = |a: T| {
        let mut g = T::zero();
        let mut h = T::zero();
        for &(d, u) in &margins {
            let e = d * (-a * u).exp();
            g = g - u * e;
            h = h + u * u * e;
        }
        (g, h)
    };
    Ok(minimize_convex(deriv, -cap, cap, derivative_tolerance()))
}

/// Logistic objective `Σ_i b_i ln(1 + exp(-y_i f_i))`.
pub fn logistic_objective<T: Scalar>(base: &[T], scores: &[T], labels: &[T]) -> T {
    base.iter()
        .zip(scores)
        .zip(labels)
        .map(|((&b, &f), &y)| b * log1p_exp(-y * f))
        .sum()
}

/// The α minimizing `Σ b_i ln(1 + exp(-y_i (f_i + α h_i)))`.
pub fn logistic_line_search<T: Scalar>(
    base: &[T],
    scores: &[T],
    outputs: &[T],
    labels: &[T],
) -> Result<T> {
    let terms: Vec<(T, T, T)> = base
        .iter()
        .zip(scores)
        .zip(outputs)
        .zip(labels)
        .filter(|(((&b, _), _), _)| b > T::zero())
        .map(|(((&b, &f), &h), &y)| (b, y * f, y * h))
        .collect();
    if terms.iter().all(|&(_, _, u)| u == T::zero()) {
        return Err(Error::Uninformative);
    }
    let scale: T = terms.iter().map(|&(b, _, u)| b * u.abs()).sum();
    let max_h = outputs.iter().fold(T::zero(), |m, h| m.max(h.abs()));
    let cap = alpha_cap(max_h);
    let deriv = |a: T| {
        let mut g = T::zero();
        let mut h = T::zero();
        for &(b, yf, u) in &terms {
            // σ(-y(f + a h)) is the weight of the example at step a
            let s = sigmoid(-(yf + a * u));
            g = g - b * u * s;
            h = h + b * u * u * s * (T::one() - s);
        }
        (g / scale, h / scale)
    };
    Ok(minimize_convex(deriv, -cap, cap, derivative_tolerance()))
}

/// One multiplicative AdaBoost update. Returns the new distribution and its
/// normalizer `Z`.
pub fn update_distribution<T: Scalar>(
    dist: &WeightDistribution<T>,
    outputs: &[T],
    labels: &[T],
    alpha: T,
) -> Result<(WeightDistribution<T>, T)> {
    if outputs.len() != dist.len() || labels.len() != dist.len() {
        return Err(Error::InvalidArgument("length mismatch in distribution update".into()));
    }
    let mut w: Vec<T> = dist
        .as_slice()
        .iter()
        .zip(outputs)
        .zip(labels)
        .map(|((&d, &h), &y)| d * (-alpha * y * h).exp())
        .collect();
    let z: T = w.iter().copied().sum();
    if !(z > T::zero()) || !z.is_finite() {
        return Err(Error::Internal(format!("distribution normalizer is {z}")));
    }
    for v in w.iter_mut() {
        *v = *v / z;
    }
    Ok((WeightDistribution::from_normalized_unchecked(w), z))
}

fn check_base_len<T: Scalar>(scores: &[T], ds: &Dataset<T>) -> Result<()> {
    if scores.len() != ds.len() {
        return Err(Error::InvalidArgument("score vector length mismatch".into()));
    }
    ds.require_classification()
}

/// `D(i) ∝ b_i σ(-y_i f_i)` from precomputed scores. Computed in log space so
/// a fully separated sample still yields a distribution.
pub fn logistic_weights_from_scores<T: Scalar>(
    scores: &[T],
    ds: &Dataset<T>,
) -> Result<WeightDistribution<T>> {
    check_base_len(scores, ds)?;
    let logs: Vec<T> = scores
        .iter()
        .zip(ds.labels())
        .enumerate()
        .map(|(i, (&f, &y))| ds.base_weight(i).ln() - log1p_exp(y * f))
        .collect();
    WeightDistribution::from_unnormalized(shifted_exp(&logs))
}

/// `D(i) ∝ b_i exp(-y_i f_i)` from precomputed scores, shifted in log space
/// so large margins cannot overflow.
pub fn exponential_weights_from_scores<T: Scalar>(
    scores: &[T],
    ds: &Dataset<T>,
) -> Result<WeightDistribution<T>> {
    check_base_len(scores, ds)?;
    let logs: Vec<T> = scores
        .iter()
        .zip(ds.labels())
        .enumerate()
        .map(|(i, (&f, &y))| ds.base_weight(i).ln() - y * f)
        .collect();
    WeightDistribution::from_unnormalized(shifted_exp(&logs))
}

/// `exp(l_i - max_j l_j)`; zero-weight rows (`-inf`) stay zero.
fn shifted_exp<T: Scalar>(logs: &[T]) -> Vec<T> {
    let top = logs
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(T::neg_infinity(), T::max);
    logs.iter().map(|&l| (l - top).exp()).collect()
}

pub fn logistic_weights<T: Scalar>(
    model: &AdditiveModel<T>,
    ds: &Dataset<T>,
) -> Result<WeightDistribution<T>> {
    logistic_weights_from_scores(&model.scores(ds)?, ds)
}

pub fn exponential_weights<T: Scalar>(
    model: &AdditiveModel<T>,
    ds: &Dataset<T>,
) -> Result<WeightDistribution<T>> {
    exponential_weights_from_scores(&model.scores(ds)?, ds)
}

/// `ln Σ_i b̂_i exp(-y_i f_i)` with `b̂` the normalized base weights.
fn log_exp_surrogate<T: Scalar>(base: &[T], scores: &[T], labels: &[T]) -> T {
    let logs: Vec<T> = base
        .iter()
        .zip(scores)
        .zip(labels)
        .map(|((&b, &f), &y)| b.ln() - y * f)
        .collect();
    let top = logs
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(T::neg_infinity(), T::max);
    top + logs.iter().map(|&l| (l - top).exp()).sum::<T>().ln()
}

fn weighted_error_rate<T: Scalar>(base: &[T], scores: &[T], labels: &[T]) -> T {
    base.iter()
        .zip(scores)
        .zip(labels)
        .filter(|((_, &f), &y)| sign(f) != y)
        .map(|((&b, _), _)| b)
        .fold(T::zero(), |a, b| a + b)
}

/// Everything the training loop produced.
#[derive(Debug, Clone)]
pub struct TrainOutput<T> {
    pub model: AdditiveModel<T>,
    pub stats: Vec<RoundStats<T>>,
}

/// Observer hook called once per round with the distribution the base learner
/// saw, the chosen term, and the outputs `h_t(x_i)`.
pub trait RoundObserver<T> {
    fn round(&mut self, round: usize, dist: &WeightDistribution<T>, term: &Term<T>, outputs: &[T]);
}

impl<T> RoundObserver<T> for () {
    fn round(&mut self, _: usize, _: &WeightDistribution<T>, _: &Term<T>, _: &[T]) {}
}

impl<T, F> RoundObserver<T> for F
where
    F: FnMut(usize, &WeightDistribution<T>, &Term<T>, &[T]),
{
    fn round(&mut self, round: usize, dist: &WeightDistribution<T>, term: &Term<T>, outputs: &[T]) {
        self(round, dist, term, outputs)
    }
}

/// Runs exactly `cfg.rounds` rounds of boosting.
pub fn train<T: Scalar>(
    ds: &Dataset<T>,
    cfg: &BoostConfig<T>,
    eval: Option<&Dataset<T>>,
) -> Result<TrainOutput<T>> {
    train_observed(ds, cfg, eval, &mut ())
}

pub fn train_observed<T: Scalar>(
    ds: &Dataset<T>,
    cfg: &BoostConfig<T>,
    eval: Option<&Dataset<T>>,
    observer: &mut impl RoundObserver<T>,
) -> Result<TrainOutput<T>> {
    cfg.validate()?;
    ds.require_classification()?;
    if let Some(e) = eval {
        e.require_classification()?;
        if e.dims() != ds.dims() {
            return Err(Error::InvalidArgument(format!(
                "evaluation data has {} features, training data has {}",
                e.dims(),
                ds.dims()
            )));
        }
    }
    let searcher = StumpSearcher::new(ds)?;
    let labels = ds.labels();
    let m = ds.len();
    let smoothing = cfg.stump.resolved_smoothing(m);
    let base = WeightDistribution::from_dataset(ds)?;
    let base_w = base.as_slice().to_vec();

    let mut model = AdditiveModel::new(ds.dims(), cfg.loss);
    let mut stats = Vec::with_capacity(cfg.rounds);
    let mut scores = vec![T::zero(); m];
    let mut eval_scores = eval.map(|e| vec![T::zero(); e.len()]);
    let mut dist = base.clone();
    let mut prod_z = T::one();
    let mut log_surrogate = T::zero();
    let mut sum_gamma_sq = T::zero();

    for round in 1..=cfg.rounds {
        let wrap = |e: Error| Error::Round {
            round,
            source: Box::new(e),
        };
        if cfg.loss == BoostLoss::Logistic {
            dist = logistic_weights_from_scores(&scores, ds).map_err(wrap)?;
        }
        let stump = searcher.best(&dist, &cfg.stump).map_err(wrap)?;
        let outputs: Vec<T> = ds.rows().map(|x| stump.eval(x)).collect();
        let epsilon = weighted_error(dist.as_slice(), &outputs, labels);
        let cap = alpha_cap(stump.max_abs());

        let (mut alpha, mut clamped) = match cfg.alpha {
            AlphaStrategy::ClosedFormBinary => {
                alpha_binary_clamped(epsilon.min(T::one()), smoothing).map_err(wrap)?
            }
            AlphaStrategy::Unit => (T::one(), false),
            AlphaStrategy::LineSearch => {
                let found = match cfg.loss {
                    BoostLoss::Exponential => alpha_line_search(dist.as_slice(), &outputs, labels),
                    BoostLoss::Logistic => logistic_line_search(&base_w, &scores, &outputs, labels),
                };
                match found {
                    Ok(a) => (a, a.abs() >= cap),
                    // every output is zero on the support: the term cannot help
                    Err(Error::Uninformative) => (T::zero(), false),
                    Err(e) => return Err(wrap(e)),
                }
            }
        };
        if alpha.abs() > cap {
            alpha = if alpha > T::zero() { cap } else { -cap };
            clamped = true;
        }

        let term = Term { alpha, stump };
        observer.round(round, &dist, &term, &outputs);

        for (f, &h) in scores.iter_mut().zip(&outputs) {
            *f = *f + alpha * h;
        }
        let z = match cfg.loss {
            BoostLoss::Exponential => {
                let (next, z) = update_distribution(&dist, &outputs, labels, alpha).map_err(wrap)?;
                dist = next;
                z
            }
            BoostLoss::Logistic => {
                let next = log_exp_surrogate(&base_w, &scores, labels);
                let z = (next - log_surrogate).exp();
                log_surrogate = next;
                z
            }
        };
        prod_z = match cfg.loss {
            BoostLoss::Exponential => prod_z * z,
            BoostLoss::Logistic => log_surrogate.exp(),
        };
        let gamma = T::half() - epsilon;
        sum_gamma_sq = sum_gamma_sq + gamma * gamma;
        let test_error = match (eval, eval_scores.as_mut()) {
            (Some(e), Some(es)) => {
                for (f, x) in es.iter_mut().zip(e.rows()) {
                    *f = *f + alpha * stump.eval(x);
                }
                Some(error_rate_of(es, e.labels()))
            }
            _ => None,
        };
        model.push(alpha, stump);
        stats.push(RoundStats {
            round,
            alpha,
            epsilon,
            gamma,
            z,
            cumulative_bound: prod_z,
            exp_bound: (-T::two() * sum_gamma_sq).exp(),
            train_error: weighted_error_rate(&base_w, &scores, labels),
            test_error,
            clamped,
        });
    }
    Ok(TrainOutput { model, stats })
}

/// Re-runs the exponential-loss distribution updates of a trained model on
/// `ds` and returns per-round statistics as the training loop would have
/// recorded them. `clamped` marks rounds whose ε was 0 or 1.
pub fn replay_stats<T: Scalar>(model: &AdditiveModel<T>, ds: &Dataset<T>) -> Result<Vec<RoundStats<T>>> {
    if model.loss() != BoostLoss::Exponential {
        return Err(Error::InvalidArgument(
            "distribution replay applies to exponential-loss models".into(),
        ));
    }
    ds.require_classification()?;
    let mut scores = vec![T::zero(); ds.len()];
    let base = WeightDistribution::from_dataset(ds)?;
    let base_w = base.as_slice().to_vec();
    let mut dist = base;
    let labels = ds.labels();
    let mut prod_z = T::one();
    let mut sum_gamma_sq = T::zero();
    let mut stats = Vec::with_capacity(model.len());
    for (t, term) in model.terms().iter().enumerate() {
        let outputs = term.stump.outputs(ds)?;
        let epsilon = weighted_error(dist.as_slice(), &outputs, labels);
        let (next, z) = update_distribution(&dist, &outputs, labels, term.alpha)?;
        dist = next;
        prod_z = prod_z * z;
        for (f, &h) in scores.iter_mut().zip(&outputs) {
            *f = *f + term.alpha * h;
        }
        let gamma = T::half() - epsilon;
        sum_gamma_sq = sum_gamma_sq + gamma * gamma;
        stats.push(RoundStats {
            round: t + 1,
            alpha: term.alpha,
            epsilon,
            gamma,
            z,
            cumulative_bound: prod_z,
            exp_bound: (-T::two() * sum_gamma_sq).exp(),
            train_error: weighted_error_rate(&base_w, &scores, labels),
            test_error: None,
            clamped: !(epsilon > T::zero() && epsilon < T::one()),
        });
    }
    Ok(stats)
}

/// One line of the training-error bound report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow<T> {
    pub round: usize,
    pub train_error: T,
    pub prod_z: T,
    /// `Π √(1 - 4γ_t²)`.
    pub prod_edge: T,
    /// `exp(-2 Σ γ_t²)`.
    pub exp_bound: T,
    /// Whether `train_error <= prod_z <= exp_bound` held at this round.
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport<T> {
    pub rows: Vec<BoundRow<T>>,
}

impl<T: Scalar> BoundReport<T> {
    pub fn chain_holds(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }

    pub fn render(&self) -> String {
        let mut s = String::from("round,train_error,prod_z,prod_edge,exp_bound,holds\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.round, r.train_error, r.prod_z, r.prod_edge, r.exp_bound, r.holds
            ));
        }
        s
    }
}

/// Checks `train_error <= Π Z_t <= exp(-2 Σ γ_t²)` round by round. Comparisons
/// allow a relative slack of `1e-12`.
pub fn bound_report<T: Scalar>(stats: &[RoundStats<T>]) -> BoundReport<T> {
    let slack = T::one() + T::lit(1e-12).max(T::epsilon() * T::lit(64.0));
    let mut prod_edge = T::one();
    let mut sum_sq = T::zero();
    let rows = stats
        .iter()
        .map(|s| {
            prod_edge = prod_edge * (T::one() - T::lit(4.0) * s.gamma * s.gamma).max(T::zero()).sqrt();
            sum_sq = sum_sq + s.gamma * s.gamma;
            let exp_bound = (-T::two() * sum_sq).exp();
            let holds = s.train_error <= s.cumulative_bound * slack
                && s.cumulative_bound <= exp_bound * slack;
            BoundRow {
                round: s.round,
                train_error: s.train_error,
                prod_z: s.cumulative_bound,
                prod_edge,
                exp_bound,
                holds,
            }
        })
        .collect();
    BoundReport { rows }
}

/// `y_i f(x_i) / Σ_t |α_t|`.
pub fn margins<T: Scalar>(model: &AdditiveModel<T>, ds: &Dataset<T>) -> Result<Vec<T>> {
    ds.require_classification()?;
    let total = model.total_abs_alpha();
    if !(total > T::zero()) {
        return Err(Error::InvalidArgument("model has zero total |alpha|".into()));
    }
    Ok(model
        .scores(ds)?
        .into_iter()
        .zip(ds.labels())
        .map(|(f, &y)| y * f / total)
        .collect())
}

/// Counts of margins in `bins` equal-width bins over `[-1, 1]`.
pub fn margin_histogram<T: Scalar>(margins: &[T], bins: usize) -> Vec<usize> {
    let mut counts = vec![0; bins];
    for &mg in margins {
        let pos = ((mg.as_f64() + 1.0) / 2.0 * bins as f64).floor();
        let k = (pos.max(0.0) as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts
}

/// Writes per-round statistics with columns
/// `round,epsilon,gamma,z,prod_z,exp_bound,train_error,test_error`.
pub fn write_stats_csv<T: Scalar, W: Write>(stats: &[RoundStats<T>], mut out: W) -> Result<()> {
    let io = |e| Error::io("<stats>", e);
    writeln!(out, "round,epsilon,gamma,z,prod_z,exp_bound,train_error,test_error").map_err(io)?;
    for s in stats {
        let test = s.test_error.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            s.round, s.epsilon, s.gamma, s.z, s.cumulative_bound, s.exp_bound, s.train_error, test
        )
        .map_err(io)?;
    }
    Ok(())
}
