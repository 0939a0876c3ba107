//! Boosting that balances data against a hand-built probability rule.
//!
//! The objective is
//! `Σ_i ln(1 + e^{-y_i f(x_i)}) + η Σ_i RE(p(x_i) ‖ σ(f(x_i)))`.
//! It is minimized by ordinary weighted logistic boosting on an augmented
//! example set: each `x_i` appears with its own label (weight `b_i`), with
//! label `+1` (weight `η p_i`) and with label `-1` (weight `η (1 - p_i)`). The
//! weighted logistic loss of that set differs from the objective by a
//! constant that does not depend on `f`.

use std::fmt;
use std::path::Path;

use crate::booster::{
    logistic_objective, train, AdditiveModel, BoostConfig, BoostLoss, RoundStats,
};
use crate::data::{Dataset, LabelMode};
use crate::error::{Error, Result};
use crate::scalar::{log1p_exp, sigmoid, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorConfig<T> {
    /// Weight of the relative-entropy term. No default.
    pub eta: T,
    /// `σ(f)` is clipped to `[clip, 1 - clip]` inside the relative entropy.
    pub epsilon_clip: T,
}

impl<T: Scalar> PriorConfig<T> {
    pub fn new(eta: T) -> Self {
        Self {
            eta,
            epsilon_clip: T::lit(1e-6),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= T::zero()) || !self.eta.is_finite() {
            return Err(Error::InvalidArgument(format!("eta must be finite and >= 0, got {}", self.eta)));
        }
        if !(self.epsilon_clip > T::zero() && self.epsilon_clip < T::half()) {
            return Err(Error::InvalidArgument("epsilon_clip must lie in (0, 1/2)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparator {
    LessEq,
    Greater,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rule<T> {
    pub feature: usize,
    pub comparator: Comparator,
    pub threshold: T,
    pub probability: T,
}

impl<T: Scalar> Rule<T> {
    fn matches(&self, x: &[T]) -> bool {
        let v = x[self.feature];
        match self.comparator {
            Comparator::LessEq => v <= self.threshold,
            Comparator::Greater => v > self.threshold,
        }
    }
}

/// Ordered rules; the first matching rule supplies `p(x)`, otherwise the
/// default does.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleTable<T> {
    pub rules: Vec<Rule<T>>,
    pub default: T,
}

fn parse_probability<T: Scalar>(s: &str, line: usize) -> Result<T> {
    let p: T = s
        .trim()
        .parse()
        .map_err(|_| Error::InvalidData(format!("rule line {line}: bad probability `{s}`")))?;
    if !(p >= T::zero() && p <= T::one()) {
        return Err(Error::InvalidData(format!("rule line {line}: probability {p} out of [0,1]")));
    }
    Ok(p)
}

impl<T: Scalar> RuleTable<T> {
    /// Parses lines `feature_index, <=|>, threshold, probability`, ending with
    /// a default line holding just a probability (optionally prefixed by
    /// `default,`). Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        let ((last_no, last), body) = lines
            .split_last()
            .ok_or_else(|| Error::InvalidData("empty rule table".into()))?;
        let default_field = match last.split_once(',') {
            Some((tag, rest)) if tag.trim() == "default" => rest,
            _ => last,
        };
        let default = parse_probability(default_field, *last_no)?;
        let mut rules = Vec::with_capacity(body.len());
        for &(no, line) in body {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(Error::InvalidData(format!(
                    "rule line {no}: expected `feature, <=|>, threshold, probability`"
                )));
            }
            let feature = fields[0]
                .parse()
                .map_err(|_| Error::InvalidData(format!("rule line {no}: bad feature index `{}`", fields[0])))?;
            let comparator = match fields[1] {
                "<=" => Comparator::LessEq,
                ">" => Comparator::Greater,
                other => {
                    return Err(Error::InvalidData(format!("rule line {no}: bad comparator `{other}`")))
                }
            };
            let threshold: T = fields[2]
                .parse()
                .ok()
                .filter(|t: &T| t.is_finite())
                .ok_or_else(|| Error::InvalidData(format!("rule line {no}: bad threshold `{}`", fields[2])))?;
            let probability = parse_probability(fields[3], no)?;
            rules.push(Rule {
                feature,
                comparator,
                threshold,
                probability,
            });
        }
        Ok(Self { rules, default })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn evaluate(&self, x: &[T]) -> Result<T> {
        for r in &self.rules {
            if r.feature >= x.len() {
                return Err(Error::InvalidArgument(format!(
                    "rule reads feature {} of a {}-dimensional input",
                    r.feature,
                    x.len()
                )));
            }
            if r.matches(x) {
                return Ok(r.probability);
            }
        }
        Ok(self.default)
    }

    /// `p(x_i)` for every row.
    pub fn apply(&self, ds: &Dataset<T>) -> Result<Vec<T>> {
        ds.rows().map(|x| self.evaluate(x)).collect()
    }
}

impl<T: Scalar> fmt::Display for RuleTable<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            let cmp = match r.comparator {
                Comparator::LessEq => "<=",
                Comparator::Greater => ">",
            };
            writeln!(f, "{}, {}, {}, {}", r.feature, cmp, r.threshold, r.probability)?;
        }
        writeln!(f, "default, {}", self.default)
    }
}

/// Binary relative entropy `p ln(p/q) + (1-p) ln((1-p)/(1-q))` with
/// `0 ln 0 = 0`.
pub fn relative_entropy<T: Scalar>(p: T, q: T) -> Result<T> {
    if !(p >= T::zero() && p <= T::one()) {
        return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1]")));
    }
    if !(q > T::zero() && q < T::one()) {
        return Err(Error::InvalidArgument(format!("q = {q} outside (0, 1)")));
    }
    let part = |a: T, b: T| if a > T::zero() { a * (a / b).ln() } else { T::zero() };
    Ok((part(p, q) + part(T::one() - p, T::one() - q)).max(T::zero()))
}

fn check_prior<T: Scalar>(ds: &Dataset<T>, prior: &[T]) -> Result<()> {
    ds.require_classification()?;
    if prior.len() != ds.len() {
        return Err(Error::InvalidData(format!(
            "prior has {} entries, dataset has {}",
            prior.len(),
            ds.len()
        )));
    }
    if prior.iter().any(|&p| !(p >= T::zero() && p <= T::one())) {
        return Err(Error::InvalidData("prior out of [0,1]".into()));
    }
    Ok(())
}

/// The prior-regularized objective evaluated from per-example scores.
pub fn prior_loss_from_scores<T: Scalar>(
    scores: &[T],
    labels: &[T],
    prior: &[T],
    cfg: &PriorConfig<T>,
) -> Result<T> {
    let lo = cfg.epsilon_clip;
    let hi = T::one() - cfg.epsilon_clip;
    let mut data = T::zero();
    let mut penalty = T::zero();
    for ((&f, &y), &p) in scores.iter().zip(labels).zip(prior) {
        data = data + log1p_exp(-y * f);
        if cfg.eta > T::zero() {
            penalty = penalty + relative_entropy(p, sigmoid(f).max(lo).min(hi))?;
        }
    }
    Ok(data + cfg.eta * penalty)
}

pub fn prior_loss<T: Scalar>(
    model: &AdditiveModel<T>,
    ds: &Dataset<T>,
    prior: &[T],
    cfg: &PriorConfig<T>,
) -> Result<T> {
    check_prior(ds, prior)?;
    cfg.validate()?;
    prior_loss_from_scores(&model.scores(ds)?, ds.labels(), prior, cfg)
}

/// Prior vector from the dataset's prior column.
pub fn dataset_prior<T: Scalar>(ds: &Dataset<T>) -> Result<Vec<T>> {
    ds.prior()
        .map(<[T]>::to_vec)
        .ok_or_else(|| Error::InvalidData("dataset has no prior column".into()))
}

/// Which augmented row came from which original example.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AugmentedRow {
    Data(usize),
    PriorPositive(usize),
    PriorNegative(usize),
}

/// Builds the weighted example set whose logistic loss equals the prior
/// objective up to a constant. Original rows come first in their original
/// order, then the `+1` prior rows, then the `-1` prior rows; rows of zero
/// weight are dropped.
pub fn augment_with_prior<T: Scalar>(
    ds: &Dataset<T>,
    prior: &[T],
    eta: T,
) -> Result<(Dataset<T>, Vec<AugmentedRow>)> {
    check_prior(ds, prior)?;
    if !(eta >= T::zero()) || !eta.is_finite() {
        return Err(Error::InvalidArgument(format!("eta must be finite and >= 0, got {eta}")));
    }
    let m = ds.len();
    let mut origin = Vec::with_capacity(3 * m);
    let mut weights = Vec::with_capacity(3 * m);
    let mut labels = Vec::with_capacity(3 * m);
    for i in 0..m {
        let b = ds.base_weight(i);
        if b > T::zero() {
            origin.push(AugmentedRow::Data(i));
            weights.push(b);
            labels.push(ds.labels()[i]);
        }
    }
    for (i, &p) in prior.iter().enumerate() {
        let w = eta * p;
        if w > T::zero() {
            origin.push(AugmentedRow::PriorPositive(i));
            weights.push(w);
            labels.push(T::one());
        }
    }
    for (i, &p) in prior.iter().enumerate() {
        let w = eta * (T::one() - p);
        if w > T::zero() {
            origin.push(AugmentedRow::PriorNegative(i));
            weights.push(w);
            labels.push(-T::one());
        }
    }
    let source: Vec<usize> = origin
        .iter()
        .map(|r| match *r {
            AugmentedRow::Data(i) | AugmentedRow::PriorPositive(i) | AugmentedRow::PriorNegative(i) => i,
        })
        .collect();
    let rows = ds.subset(&source)?;
    let mut features = Vec::with_capacity(rows.len() * ds.dims());
    for x in rows.rows() {
        features.extend_from_slice(x);
    }
    let out = Dataset::with_mode(features, ds.dims(), labels, LabelMode::Classification)?
        .with_feature_names(ds.feature_names().to_vec())?
        .with_weights(weights)?;
    Ok((out, origin))
}

/// Weighted logistic loss of an augmented set, given scores of the original
/// examples.
pub fn augmented_loss_from_scores<T: Scalar>(aug: &Dataset<T>, origin: &[AugmentedRow], scores: &[T]) -> T {
    let f: Vec<T> = origin
        .iter()
        .map(|r| match *r {
            AugmentedRow::Data(i) | AugmentedRow::PriorPositive(i) | AugmentedRow::PriorNegative(i) => scores[i],
        })
        .collect();
    let base: Vec<T> = (0..aug.len()).map(|i| aug.base_weight(i)).collect();
    logistic_objective(&base, &f, aug.labels())
}

#[derive(Debug, Clone)]
pub struct PriorTrainOutput<T> {
    pub model: AdditiveModel<T>,
    pub stats: Vec<RoundStats<T>>,
    /// Prior objective on the original data after each round.
    pub prior_loss: Vec<T>,
}

/// Logistic boosting on the augmented set.
pub fn train_with_prior<T: Scalar>(
    ds: &Dataset<T>,
    prior: &[T],
    cfg: &PriorConfig<T>,
    boost: &BoostConfig<T>,
) -> Result<PriorTrainOutput<T>> {
    cfg.validate()?;
    if boost.loss != BoostLoss::Logistic {
        return Err(Error::InvalidArgument(
            "prior-knowledge boosting uses the logistic loss".into(),
        ));
    }
    let (aug, _) = augment_with_prior(ds, prior, cfg.eta)?;
    let out = train(&aug, boost, None)?;
    let mut scores = vec![T::zero(); ds.len()];
    let mut per_round = Vec::with_capacity(out.model.len());
    for term in out.model.terms() {
        for (f, x) in scores.iter_mut().zip(ds.rows()) {
            *f = *f + term.alpha * term.stump.eval(x);
        }
        per_round.push(prior_loss_from_scores(&scores, ds.labels(), prior, cfg)?);
    }
    Ok(PriorTrainOutput {
        model: out.model,
        stats: out.stats,
        prior_loss: per_round,
    })
}
