//! Decision stumps: one-feature threshold rules with two real outputs.
//!
//! A stump sends `x` left when `x[feature] <= threshold`. Candidate thresholds
//! for a feature are one value below its minimum plus the midpoints between
//! consecutive distinct sorted values. Among equally good candidates the
//! search keeps the lowest feature index, then the lowest threshold, then the
//! orientation with `left <= right`.

use crate::data::{Dataset, WeightDistribution};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest magnitude any single stump output or `alpha * h(x)` term may take.
/// `e^35` is far inside the range of `f64` (and of `f32`).
pub const MAX_SCORE: f64 = 35.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stump<T> {
    pub feature: usize,
    pub threshold: T,
    pub left: T,
    pub right: T,
}

impl<T: Scalar> Stump<T> {
    pub fn new(feature: usize, threshold: T, left: T, right: T) -> Self {
        Self {
            feature,
            threshold,
            left,
            right,
        }
    }

    /// True when both outputs are ±1.
    pub fn is_binary(&self) -> bool {
        let unit = |v: T| v == T::one() || v == -T::one();
        unit(self.left) && unit(self.right)
    }

    pub fn evaluate(&self, x: &[T]) -> Result<T> {
        match x.get(self.feature) {
            Some(&v) => Ok(if v <= self.threshold { self.left } else { self.right }),
            None => Err(Error::InvalidArgument(format!(
                "stump reads feature {} of a {}-dimensional input",
                self.feature,
                x.len()
            ))),
        }
    }

    /// Evaluation without the bounds check; callers guarantee the
    /// dimensionality.
    #[inline]
    pub(crate) fn eval(&self, x: &[T]) -> T {
        if x[self.feature] <= self.threshold {
            self.left
        } else {
            self.right
        }
    }

    /// Largest output magnitude.
    pub fn max_abs(&self) -> T {
        self.left.abs().max(self.right.abs())
    }

    /// Outputs on every row of `ds`.
    pub fn outputs(&self, ds: &Dataset<T>) -> Result<Vec<T>> {
        if self.feature >= ds.dims() {
            return Err(Error::InvalidArgument(format!(
                "stump reads feature {} of a {}-dimensional dataset",
                self.feature,
                ds.dims()
            )));
        }
        Ok(ds.rows().map(|x| self.eval(x)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StumpMode {
    /// Outputs in {-1, +1}, chosen to minimize weighted error.
    Binary,
    /// Real outputs `½ ln((W+ + s)/(W- + s))` per side, chosen to minimize Z.
    ConfidenceRated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StumpSearchConfig<T> {
    pub mode: StumpMode,
    /// Additive smoothing `s` for confidence-rated outputs and for the
    /// epsilon clamp. `None` means `1/(2m)`.
    pub smoothing: Option<T>,
}

impl<T: Scalar> Default for StumpSearchConfig<T> {
    fn default() -> Self {
        Self {
            mode: StumpMode::Binary,
            smoothing: None,
        }
    }
}

impl<T: Scalar> StumpSearchConfig<T> {
    pub fn binary() -> Self {
        Self::default()
    }

    pub fn confidence_rated() -> Self {
        Self {
            mode: StumpMode::ConfidenceRated,
            smoothing: None,
        }
    }

    pub fn resolved_smoothing(&self, m: usize) -> T {
        self.smoothing
            .unwrap_or_else(|| T::one() / (T::two() * T::lit(m as f64)))
    }

    pub fn validate(&self) -> Result<()> {
        match self.smoothing {
            Some(s) if !(s >= T::zero()) || !s.is_finite() => Err(Error::InvalidArgument(format!(
                "smoothing must be finite and >= 0, got {s}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Confidence-rated output for one side of a split. Computed as a difference
/// of logs so flipping every label negates it exactly.
pub fn confidence_output<T: Scalar>(w_pos: T, w_neg: T, smoothing: T) -> T {
    let a = w_pos + smoothing;
    let b = w_neg + smoothing;
    let cap = T::lit(MAX_SCORE);
    if a <= T::zero() && b <= T::zero() {
        return T::zero();
    }
    if b <= T::zero() {
        return cap;
    }
    if a <= T::zero() {
        return -cap;
    }
    (T::half() * (a.ln() - b.ln())).max(-cap).min(cap)
}

/// Per-feature sort order of a dataset, computed once and reused across
/// boosting rounds.
#[derive(Debug, Clone)]
pub struct StumpSearcher<'a, T> {
    ds: &'a Dataset<T>,
    /// `order[j]` lists row indices sorted by feature `j` (ties by index).
    order: Vec<Vec<usize>>,
    positive: Vec<bool>,
}

struct Best<T> {
    objective: T,
    stump: Stump<T>,
}

impl<'a, T: Scalar> StumpSearcher<'a, T> {
    pub fn new(ds: &'a Dataset<T>) -> Result<Self> {
        ds.require_classification()?;
        let m = ds.len();
        let order = (0..ds.dims())
            .map(|j| {
                let mut idx: Vec<usize> = (0..m).collect();
                idx.sort_by(|&a, &b| {
                    ds.feature(a, j)
                        .partial_cmp(&ds.feature(b, j))
                        .expect("finite features")
                        .then(a.cmp(&b))
                });
                idx
            })
            .collect();
        let positive = ds.labels().iter().map(|&y| y > T::zero()).collect();
        Ok(Self { ds, order, positive })
    }

    pub fn dataset(&self) -> &'a Dataset<T> {
        self.ds
    }

    fn tie_tolerance() -> T {
        T::epsilon() * T::lit(64.0)
    }

    fn check_len(&self, dist: &WeightDistribution<T>) -> Result<()> {
        if dist.len() != self.ds.len() {
            return Err(Error::InvalidArgument(format!(
                "distribution has {} entries, dataset has {}",
                dist.len(),
                self.ds.len()
            )));
        }
        Ok(())
    }

    fn below_min(min: T) -> T {
        min - T::one().max(min.abs())
    }

    /// Walks every candidate split of every feature in tie-break order and
    /// calls `visit(feature, threshold, w_pos_left, w_neg_left)`.
    fn scan(&self, dist: &WeightDistribution<T>, mut visit: impl FnMut(usize, T, T, T)) {
        let w = dist.as_slice();
        let ds = self.ds;
        for (j, idx) in self.order.iter().enumerate() {
            let min = ds.feature(idx[0], j);
            visit(j, Self::below_min(min), T::zero(), T::zero());
            let mut pos_left = T::zero();
            let mut neg_left = T::zero();
            for k in 0..idx.len() {
                let i = idx[k];
                if self.positive[i] {
                    pos_left = pos_left + w[i];
                } else {
                    neg_left = neg_left + w[i];
                }
                if k + 1 < idx.len() {
                    let a = ds.feature(i, j);
                    let b = ds.feature(idx[k + 1], j);
                    if a < b {
                        let mut thr = (a + b) * T::half();
                        if !(thr >= a && thr < b) {
                            thr = a;
                        }
                        visit(j, thr, pos_left, neg_left);
                    }
                }
            }
        }
    }

    fn totals(&self, dist: &WeightDistribution<T>) -> (T, T) {
        let mut pos = T::zero();
        let mut neg = T::zero();
        for (i, &w) in dist.as_slice().iter().enumerate() {
            if self.positive[i] {
                pos = pos + w;
            } else {
                neg = neg + w;
            }
        }
        (pos, neg)
    }

    /// Minimum weighted-error ±1 stump and its error.
    pub fn best_binary(&self, dist: &WeightDistribution<T>) -> Result<(Stump<T>, T)> {
        self.check_len(dist)?;
        let (pos, neg) = self.totals(dist);
        let tol = Self::tie_tolerance();
        let mut best: Option<Best<T>> = None;
        let one = T::one();
        self.scan(dist, |j, thr, pl, nl| {
            let pr = (pos - pl).max(T::zero());
            let nr = (neg - nl).max(T::zero());
            // left -1 / right +1, then left +1 / right -1
            let candidates = [(pl + nr, -one, one), (nl + pr, one, -one)];
            for (err, left, right) in candidates {
                if best.as_ref().is_none_or(|b| err < b.objective - tol) {
                    best = Some(Best {
                        objective: err,
                        stump: Stump::new(j, thr, left, right),
                    });
                }
            }
        });
        let best = best.ok_or_else(|| Error::Internal("no stump candidates".into()))?;
        Ok((best.stump, best.objective))
    }

    /// Confidence-rated stump minimizing the smoothed Z surrogate.
    pub fn best_confidence(&self, dist: &WeightDistribution<T>, smoothing: T) -> Result<Stump<T>> {
        self.check_len(dist)?;
        if !(smoothing >= T::zero()) {
            return Err(Error::InvalidArgument("smoothing must be >= 0".into()));
        }
        let (pos, neg) = self.totals(dist);
        let tol = Self::tie_tolerance();
        let s = smoothing;
        let mut best: Option<(T, usize, T, T, T, T, T)> = None;
        self.scan(dist, |j, thr, pl, nl| {
            let pr = (pos - pl).max(T::zero());
            let nr = (neg - nl).max(T::zero());
            let z = T::two() * ((pl + s) * (nl + s)).sqrt() + T::two() * ((pr + s) * (nr + s)).sqrt();
            if best.as_ref().is_none_or(|b| z < b.0 - tol) {
                best = Some((z, j, thr, pl, nl, pr, nr));
            }
        });
        let (_, j, thr, pl, nl, pr, nr) =
            best.ok_or_else(|| Error::Internal("no stump candidates".into()))?;
        Ok(Stump::new(
            j,
            thr,
            confidence_output(pl, nl, s),
            confidence_output(pr, nr, s),
        ))
    }

    pub fn best(&self, dist: &WeightDistribution<T>, cfg: &StumpSearchConfig<T>) -> Result<Stump<T>> {
        match cfg.mode {
            StumpMode::Binary => self.best_binary(dist).map(|(s, _)| s),
            StumpMode::ConfidenceRated => {
                self.best_confidence(dist, cfg.resolved_smoothing(self.ds.len()))
            }
        }
    }
}

/// Minimum weighted-error binary stump over all features, thresholds and
/// orientations. The returned error never exceeds 1/2.
pub fn best_binary_stump<T: Scalar>(
    ds: &Dataset<T>,
    dist: &WeightDistribution<T>,
) -> Result<(Stump<T>, T)> {
    StumpSearcher::new(ds)?.best_binary(dist)
}

pub fn best_confidence_stump<T: Scalar>(
    ds: &Dataset<T>,
    dist: &WeightDistribution<T>,
    smoothing: T,
) -> Result<Stump<T>> {
    StumpSearcher::new(ds)?.best_confidence(dist, smoothing)
}

/// Weighted error `Pr_D[sign(h(x_i)) != y_i]` of a vector of outputs, with
/// `sign(0) = +1`.
pub fn weighted_error<T: Scalar>(dist: &[T], outputs: &[T], labels: &[T]) -> T {
    dist.iter()
        .zip(outputs)
        .zip(labels)
        .filter(|((_, &h), &y)| crate::scalar::sign(h) != y)
        .map(|((&d, _), _)| d)
        .fold(T::zero(), |a, b| a + b)
}
