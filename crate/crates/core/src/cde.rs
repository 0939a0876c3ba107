//! Conditional density estimation with a cascade of logistic-boosted
//! classifiers.
//!
//! The label range is cut at breakpoints `b_1 < … < b_k`. Classifier `j`
//! estimates `q_j(x) = Pr[y >= b_j | x]`. The estimates are made monotone by a
//! running minimum and differenced into bin masses; within a bin the density
//! is uniform, and the two end bins stop at the observed label range.

use std::thread;

use crate::booster::{train, AdditiveModel, BoostConfig, BoostLoss, Term};
use crate::data::{Dataset, LabelMode};
use crate::error::{Error, Result};
use crate::losses::Link;
use crate::rng::RngState;
use crate::scalar::Scalar;
use crate::stump::Stump;

/// Probability assigned to the certain class when a breakpoint's labels are
/// all on one side.
pub const CONSTANT_CLIP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Breakpoints<T> {
    values: Vec<T>,
    support_lo: T,
    support_hi: T,
}

impl<T: Scalar> Breakpoints<T> {
    pub fn new(values: Vec<T>, support_lo: T, support_hi: T) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("at least one breakpoint required".into()));
        }
        if values.iter().any(|v| !v.is_finite()) || !support_lo.is_finite() || !support_hi.is_finite() {
            return Err(Error::InvalidArgument("breakpoints must be finite".into()));
        }
        if values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("breakpoints must be strictly increasing".into()));
        }
        if !(support_lo <= values[0] && values[values.len() - 1] <= support_hi) {
            return Err(Error::InvalidArgument("breakpoints outside the support".into()));
        }
        Ok(Self {
            values,
            support_lo,
            support_hi,
        })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn support(&self) -> (T, T) {
        (self.support_lo, self.support_hi)
    }

    /// Bin edges `support_lo, b_1, …, b_k, support_hi`.
    pub fn edges(&self) -> Vec<T> {
        let mut e = Vec::with_capacity(self.values.len() + 2);
        e.push(self.support_lo);
        e.extend_from_slice(&self.values);
        e.push(self.support_hi);
        e
    }
}

/// Linear-interpolation quantile of sorted data: position `level * (n - 1)`.
fn sorted_quantile<T: Scalar>(sorted: &[T], level: f64) -> T {
    let pos = level * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = T::lit(pos - lo as f64);
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Breakpoints at the empirical quantiles `j/(k+1)`, `j = 1..k`. Duplicates and
/// values at the minimum label (which every label satisfies) are dropped, so
/// the result may hold fewer than `k` breakpoints.
pub fn choose_breakpoints<T: Scalar>(labels: &[T], k: usize) -> Result<Breakpoints<T>> {
    let mut sorted = labels.to_vec();
    if sorted.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("non-finite label".into()));
    }
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite labels"));
    let mut distinct = sorted.clone();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::InvalidData("degenerate label range".into()));
    }
    if k == 0 || k >= distinct.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must satisfy 1 <= k < {} (distinct labels)",
            distinct.len()
        )));
    }
    let lo = sorted[0];
    let hi = sorted[sorted.len() - 1];
    let mut values: Vec<T> = Vec::with_capacity(k);
    for j in 1..=k {
        let b = sorted_quantile(&sorted, j as f64 / (k + 1) as f64);
        if b > lo && values.last().is_none_or(|&prev| b > prev) {
            values.push(b);
        }
    }
    if values.is_empty() {
        values.push((distinct[0] + distinct[1]) * T::half());
    }
    Breakpoints::new(values, lo, hi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdeClassifier<T> {
    pub breakpoint: T,
    pub model: AdditiveModel<T>,
    /// Set when every training label fell on one side of the breakpoint and
    /// the classifier is a clipped constant.
    pub constant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalDensityModel<T> {
    breakpoints: Breakpoints<T>,
    classifiers: Vec<CdeClassifier<T>>,
}

impl<T: Scalar> ConditionalDensityModel<T> {
    pub fn new(breakpoints: Breakpoints<T>, classifiers: Vec<CdeClassifier<T>>) -> Result<Self> {
        if classifiers.len() != breakpoints.len() {
            return Err(Error::InvalidArgument(format!(
                "{} classifiers for {} breakpoints",
                classifiers.len(),
                breakpoints.len()
            )));
        }
        if classifiers.iter().any(|c| c.model.loss() != BoostLoss::Logistic) {
            return Err(Error::InvalidArgument(
                "density classifiers must be logistic-loss models".into(),
            ));
        }
        let dims = classifiers[0].model.dims();
        if classifiers.iter().any(|c| c.model.dims() != dims) {
            return Err(Error::InvalidArgument("classifiers disagree on input width".into()));
        }
        Ok(Self {
            breakpoints,
            classifiers,
        })
    }

    pub fn breakpoints(&self) -> &Breakpoints<T> {
        &self.breakpoints
    }

    pub fn classifiers(&self) -> &[CdeClassifier<T>] {
        &self.classifiers
    }

    pub fn dims(&self) -> usize {
        self.classifiers[0].model.dims()
    }

    pub fn link(&self) -> Link {
        Link::Sigmoid
    }

    /// Raw, possibly non-monotone `q_j(x)`.
    pub fn raw_probabilities(&self, x: &[T]) -> Result<Vec<T>> {
        self.classifiers
            .iter()
            .map(|c| c.model.score(x).map(|f| self.link().apply(f)))
            .collect()
    }
}

fn constant_model<T: Scalar>(dims: usize, positive: bool) -> AdditiveModel<T> {
    let clip = T::lit(CONSTANT_CLIP);
    let c = ((T::one() - clip) / clip).ln();
    let c = if positive { c } else { -c };
    let stump = Stump::new(0, T::zero(), c, c);
    AdditiveModel::from_terms(dims, BoostLoss::Logistic, vec![Term { alpha: T::one(), stump }])
        .expect("feature 0 exists")
}

/// Trains one logistic-boosted classifier per breakpoint for the event
/// `y >= b_j`. Breakpoints train concurrently; results keep breakpoint order.
pub fn train_cde<T: Scalar>(
    ds: &Dataset<T>,
    k: usize,
    cfg: &BoostConfig<T>,
) -> Result<ConditionalDensityModel<T>> {
    if ds.mode() != LabelMode::Regression {
        return Err(Error::InvalidData(
            "density estimation needs a regression dataset".into(),
        ));
    }
    if cfg.loss != BoostLoss::Logistic {
        return Err(Error::InvalidArgument(
            "density estimation trains logistic-loss classifiers".into(),
        ));
    }
    cfg.validate()?;
    let breakpoints = choose_breakpoints(ds.labels(), k)?;
    train_cde_at(ds, breakpoints, cfg)
}

/// As [`train_cde`] with caller-chosen breakpoints.
pub fn train_cde_at<T: Scalar>(
    ds: &Dataset<T>,
    breakpoints: Breakpoints<T>,
    cfg: &BoostConfig<T>,
) -> Result<ConditionalDensityModel<T>> {
    let fit = |b: T| -> Result<CdeClassifier<T>> {
        let z: Vec<T> = ds
            .labels()
            .iter()
            .map(|&y| if y >= b { T::one() } else { -T::one() })
            .collect();
        let first = z[0];
        if z.iter().all(|&v| v == first) {
            return Ok(CdeClassifier {
                breakpoint: b,
                model: constant_model(ds.dims(), first > T::zero()),
                constant: true,
            });
        }
        let binary = ds.relabel(z, LabelMode::Classification)?;
        let out = train(&binary, cfg, None)?;
        Ok(CdeClassifier {
            breakpoint: b,
            model: out.model,
            constant: false,
        })
    };
    let results: Vec<Result<CdeClassifier<T>>> = thread::scope(|scope| {
        let handles: Vec<_> = breakpoints
            .values()
            .iter()
            .map(|&b| scope.spawn(move || fit(b)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Internal("breakpoint trainer panicked".into()))))
            .collect()
    });
    let classifiers = results.into_iter().collect::<Result<Vec<_>>>()?;
    ConditionalDensityModel::new(breakpoints, classifiers)
}

/// Probability masses over the `k + 1` bins between consecutive edges.
#[derive(Debug, Clone, PartialEq)]
pub struct BinDistribution<T> {
    masses: Vec<T>,
    edges: Vec<T>,
}

impl<T: Scalar> BinDistribution<T> {
    pub fn masses(&self) -> &[T] {
        &self.masses
    }

    pub fn edges(&self) -> &[T] {
        &self.edges
    }

    /// Inverse of the piecewise-linear CDF. `level` must be in `(0, 1)`.
    pub fn quantile(&self, level: T) -> Result<T> {
        if !(level > T::zero() && level < T::one()) {
            return Err(Error::InvalidArgument(format!("quantile level {level} outside (0, 1)")));
        }
        Ok(self.invert(level))
    }

    fn invert(&self, u: T) -> T {
        let mut cum = T::zero();
        let mut last = 0;
        for (j, &mass) in self.masses.iter().enumerate() {
            if mass <= T::zero() {
                continue;
            }
            last = j;
            let next = cum + mass;
            if next >= u {
                let frac = ((u - cum) / mass).max(T::zero()).min(T::one());
                return self.edges[j] + (self.edges[j + 1] - self.edges[j]) * frac;
            }
            cum = next;
        }
        self.edges[last + 1]
    }

    /// One draw: a bin by inverse CDF on a uniform, then a uniform point in
    /// that bin.
    pub fn sample(&self, rng: &mut RngState) -> T {
        let u: T = rng.unit();
        let mut cum = T::zero();
        let mut chosen = None;
        for (j, &mass) in self.masses.iter().enumerate() {
            if mass <= T::zero() {
                continue;
            }
            chosen = Some(j);
            cum = cum + mass;
            if u < cum {
                break;
            }
        }
        let j = chosen.expect("distribution has positive mass");
        rng.uniform(self.edges[j], self.edges[j + 1])
    }
}

/// Turns raw exceedance probabilities `q_1..q_k` into bin masses: clamp to
/// `[0, 1]`, take the running minimum from `q_0 = 1`, difference against
/// `q_{k+1} = 0`, renormalize.
pub fn combine_exceedance<T: Scalar>(raw: &[T], edges: Vec<T>) -> Result<BinDistribution<T>> {
    if edges.len() != raw.len() + 2 {
        return Err(Error::InvalidArgument(format!(
            "{} probabilities need {} edges, got {}",
            raw.len(),
            raw.len() + 2,
            edges.len()
        )));
    }
    let mut prev = T::one();
    let mut masses = Vec::with_capacity(raw.len() + 1);
    for &q in raw {
        let q = if q.is_nan() { prev } else { q.max(T::zero()).min(T::one()) };
        let cur = prev.min(q);
        masses.push(prev - cur);
        prev = cur;
    }
    masses.push(prev);
    let total: T = masses.iter().copied().sum();
    for v in masses.iter_mut() {
        *v = *v / total;
    }
    Ok(BinDistribution { masses, edges })
}

pub fn conditional_distribution<T: Scalar>(
    model: &ConditionalDensityModel<T>,
    x: &[T],
) -> Result<BinDistribution<T>> {
    let raw = model.raw_probabilities(x)?;
    combine_exceedance(&raw, model.breakpoints.edges())
}

pub fn sample<T: Scalar>(model: &ConditionalDensityModel<T>, x: &[T], rng: &mut RngState) -> Result<T> {
    Ok(conditional_distribution(model, x)?.sample(rng))
}

pub fn quantile<T: Scalar>(model: &ConditionalDensityModel<T>, x: &[T], level: T) -> Result<T> {
    conditional_distribution(model, x)?.quantile(level)
}
