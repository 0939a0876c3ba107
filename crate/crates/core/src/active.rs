//! Pool-based active learning by uncertainty sampling, with a simulation
//! harness that replays the loop on a fully labeled dataset.

use std::io::Write;

use crate::booster::{train, AdditiveModel, BoostConfig};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::RngState;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Query the unlabeled examples with smallest `|f(x)|`.
    Uncertainty,
    /// Query uniformly at random.
    Random,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Uncertainty => "uncertainty",
            Strategy::Random => "random",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "uncertainty" => Ok(Strategy::Uncertainty),
            "random" => Ok(Strategy::Random),
            other => Err(Error::InvalidArgument(format!("unknown strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActiveConfig<T> {
    pub init_batch: usize,
    pub batch: usize,
    pub iterations: usize,
    pub strategy: Strategy,
    pub boost: BoostConfig<T>,
    pub seed: u64,
}

impl<T: Scalar> Default for ActiveConfig<T> {
    fn default() -> Self {
        Self {
            init_batch: 500,
            batch: 200,
            iterations: 10,
            strategy: Strategy::Uncertainty,
            boost: BoostConfig::adaboost(100),
            seed: 0,
        }
    }
}

impl<T: Scalar> ActiveConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.init_batch == 0 || self.batch == 0 {
            return Err(Error::InvalidArgument("init_batch and batch must be >= 1".into()));
        }
        self.boost.validate()
    }
}

/// A labeled dataset whose labels are revealed only for acquired indices.
#[derive(Debug, Clone)]
pub struct Pool<'a, T> {
    examples: &'a Dataset<T>,
    labeled_ids: Vec<usize>,
    is_labeled: Vec<bool>,
}

impl<'a, T: Scalar> Pool<'a, T> {
    pub fn new(examples: &'a Dataset<T>) -> Result<Self> {
        examples.require_classification()?;
        Ok(Self {
            examples,
            labeled_ids: Vec::new(),
            is_labeled: vec![false; examples.len()],
        })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.examples.dims()
    }

    /// Features of example `i`. Labels are not reachable through this.
    pub fn features(&self, i: usize) -> &[T] {
        self.examples.row(i)
    }

    pub fn labeled_ids(&self) -> &[usize] {
        &self.labeled_ids
    }

    pub fn budget_used(&self) -> usize {
        self.labeled_ids.len()
    }

    pub fn is_labeled(&self, i: usize) -> bool {
        self.is_labeled[i]
    }

    pub fn unlabeled(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| !self.is_labeled[i])
    }

    pub fn unlabeled_count(&self) -> usize {
        self.len() - self.labeled_ids.len()
    }

    /// Marks `indices` as labeled, in order.
    pub fn acquire(&mut self, indices: &[usize]) -> Result<()> {
        for &i in indices {
            if i >= self.len() {
                return Err(Error::InvalidArgument(format!("pool index {i} out of range")));
            }
            if self.is_labeled[i] {
                return Err(Error::InvalidArgument(format!("example {i} is already labeled")));
            }
            self.is_labeled[i] = true;
            self.labeled_ids.push(i);
        }
        Ok(())
    }

    /// The labeled examples, in acquisition order. This is the only path by
    /// which labels leave the pool.
    pub fn training_set(&self) -> Result<Dataset<T>> {
        self.examples.subset(&self.labeled_ids)
    }
}

/// Indices picked by a query, plus whether fewer than requested were left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub indices: Vec<usize>,
    pub truncated: bool,
}

/// The `k` unlabeled examples with smallest `|f(x)|`, ties by ascending index.
pub fn select_queries<T: Scalar>(model: &AdditiveModel<T>, pool: &Pool<'_, T>, k: usize) -> Result<Selection> {
    if model.dims() != pool.dims() {
        return Err(Error::InvalidArgument(format!(
            "model expects {} features, pool has {}",
            model.dims(),
            pool.dims()
        )));
    }
    let mut scored: Vec<(T, usize)> = pool
        .unlabeled()
        .map(|i| (model.score_unchecked(pool.features(i)).abs(), i))
        .collect();
    scored.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    let truncated = scored.len() < k;
    Ok(Selection {
        indices: scored.into_iter().take(k).map(|(_, i)| i).collect(),
        truncated,
    })
}

fn select_random<T: Scalar>(pool: &Pool<'_, T>, k: usize, rng: &mut RngState) -> Selection {
    let mut free: Vec<usize> = pool.unlabeled().collect();
    let take = k.min(free.len());
    for i in 0..take {
        let j = i + rng.below(free.len() - i);
        free.swap(i, j);
    }
    free.truncate(take);
    Selection {
        indices: free,
        truncated: take < k,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint<T> {
    pub strategy: Strategy,
    pub seed: u64,
    pub iteration: usize,
    pub labels_used: usize,
    pub test_error: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve<T> {
    pub points: Vec<CurvePoint<T>>,
    /// Set when the pool ran out before the configured budget was spent.
    pub truncated: bool,
}

impl<T: Scalar> LearningCurve<T> {
    /// Smallest label count at which test error reached `target`.
    pub fn labels_to_reach(&self, target: T) -> Option<usize> {
        self.points
            .iter()
            .find(|p| p.test_error <= target)
            .map(|p| p.labels_used)
    }
}

/// What the simulation did in one iteration, for instrumentation.
pub struct IterationEvent<'e, T> {
    pub iteration: usize,
    /// The dataset the learner was trained on.
    pub training_set: &'e Dataset<T>,
    pub model: &'e AdditiveModel<T>,
    /// Pool state after training, before the next acquisition.
    pub pool: &'e Pool<'e, T>,
    /// Batch acquired after this iteration (empty on the last one).
    pub acquired: &'e [usize],
}

/// Runs the labeling loop. Iteration 0 labels `init_batch` random examples;
/// each later iteration acquires `batch` more with the configured strategy
/// using the previous model, then retrains from scratch on everything
/// labeled. Emits `iterations + 1` points unless the pool runs dry.
pub fn simulate<T: Scalar>(pool_ds: &Dataset<T>, test: &Dataset<T>, cfg: &ActiveConfig<T>) -> Result<LearningCurve<T>> {
    simulate_observed(pool_ds, test, cfg, |_| {})
}

pub fn simulate_observed<T: Scalar>(
    pool_ds: &Dataset<T>,
    test: &Dataset<T>,
    cfg: &ActiveConfig<T>,
    mut observe: impl FnMut(&IterationEvent<'_, T>),
) -> Result<LearningCurve<T>> {
    cfg.validate()?;
    test.require_classification()?;
    if test.dims() != pool_ds.dims() {
        return Err(Error::InvalidArgument(format!(
            "test data has {} features, pool has {}",
            test.dims(),
            pool_ds.dims()
        )));
    }
    let mut rng = RngState::new(cfg.seed);
    let mut pool = Pool::new(pool_ds)?;
    let init = select_random(&pool, cfg.init_batch, &mut rng);
    let mut truncated = init.truncated;
    pool.acquire(&init.indices)?;

    let mut points = Vec::with_capacity(cfg.iterations + 1);
    for iteration in 0..=cfg.iterations {
        let training_set = pool.training_set()?;
        let model = train(&training_set, &cfg.boost, None)?.model;
        points.push(CurvePoint {
            strategy: cfg.strategy,
            seed: cfg.seed,
            iteration,
            labels_used: pool.budget_used(),
            test_error: model.error_rate(test)?,
        });
        let next = if iteration < cfg.iterations && pool.unlabeled_count() > 0 {
            match cfg.strategy {
                Strategy::Uncertainty => select_queries(&model, &pool, cfg.batch)?,
                Strategy::Random => select_random(&pool, cfg.batch, &mut rng),
            }
        } else {
            Selection {
                indices: Vec::new(),
                truncated: iteration < cfg.iterations,
            }
        };
        observe(&IterationEvent {
            iteration,
            training_set: &training_set,
            model: &model,
            pool: &pool,
            acquired: &next.indices,
        });
        truncated |= next.truncated;
        if next.indices.is_empty() {
            break;
        }
        pool.acquire(&next.indices)?;
    }
    Ok(LearningCurve { points, truncated })
}

/// Writes curve points with columns
/// `strategy,seed,iteration,labels_used,test_error`.
pub fn write_curve_csv<T: Scalar, W: Write>(points: &[CurvePoint<T>], mut out: W, header: bool) -> Result<()> {
    let io = |e| Error::io("<curve>", e);
    if header {
        writeln!(out, "strategy,seed,iteration,labels_used,test_error").map_err(io)?;
    }
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{}",
            p.strategy.name(),
            p.seed,
            p.iteration,
            p.labels_used,
            p.test_error
        )
        .map_err(io)?;
    }
    Ok(())
}
