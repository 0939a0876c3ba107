//! Probability links, the three margin losses, and executable checks of how
//! they relate.

use std::fmt;

use crate::booster::{AdditiveModel, BoostLoss};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::scalar::{log1p_exp, sigmoid, Scalar};

/// Map from the additive score `f` to `Pr[y = +1 | x]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    /// `σ(2f) = e^f / (e^f + e^{-f})`, matching exponential-loss training.
    DoubledSigmoid,
    /// `σ(f)`, matching training on `ln(1 + e^{-yf})`.
    Sigmoid,
}

impl Link {
    pub fn for_loss(loss: BoostLoss) -> Self {
        match loss {
            BoostLoss::Exponential => Link::DoubledSigmoid,
            BoostLoss::Logistic => Link::Sigmoid,
        }
    }

    /// Always strictly inside `(0, 1)`: saturated values are pulled in to the
    /// nearest representable probability.
    pub fn apply<T: Scalar>(self, f: T) -> T {
        let p = match self {
            Link::DoubledSigmoid => sigmoid(T::two() * f),
            Link::Sigmoid => sigmoid(f),
        };
        p.max(T::min_positive_value()).min(T::one() - T::epsilon() * T::half())
    }

    pub fn name(self) -> &'static str {
        match self {
            Link::DoubledSigmoid => "sigmoid2f",
            Link::Sigmoid => "sigmoid",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sigmoid2f" => Ok(Link::DoubledSigmoid),
            "sigmoid" => Ok(Link::Sigmoid),
            other => Err(Error::InvalidArgument(format!("unknown link `{other}`"))),
        }
    }
}

/// Margin losses as functions of `z = y f(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// `e^{-z}`
    Exponential,
    /// `ln(1 + e^{-2z})`
    Logistic2,
    /// `ln(1 + e^{-z})`
    Logistic1,
}

impl LossKind {
    pub fn value<T: Scalar>(self, z: T) -> T {
        match self {
            LossKind::Exponential => (-z).exp(),
            LossKind::Logistic2 => log1p_exp(-T::two() * z),
            LossKind::Logistic1 => log1p_exp(-z),
        }
    }

    pub fn link(self) -> Link {
        match self {
            LossKind::Exponential | LossKind::Logistic2 => Link::DoubledSigmoid,
            LossKind::Logistic1 => Link::Sigmoid,
        }
    }
}

/// `Pr[y = +1 | x]` for score `f` under the link that matches `loss`.
pub fn prob_positive<T: Scalar>(f: T, loss: LossKind) -> Result<T> {
    if !f.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite score {f}")));
    }
    Ok(loss.link().apply(f))
}

/// `Σ_i loss(y_i f(x_i))`, unnormalized.
pub fn empirical_loss<T: Scalar>(model: &AdditiveModel<T>, ds: &Dataset<T>, loss: LossKind) -> Result<T> {
    ds.require_classification()?;
    Ok(model
        .scores(ds)?
        .into_iter()
        .zip(ds.labels())
        .map(|(f, &y)| loss.value(y * f))
        .sum())
}

/// One pass/fail line of a numeric check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub delta: f64,
    pub tolerance: f64,
}

impl CheckLine {
    pub fn new(name: impl Into<String>, delta: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            delta,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.delta <= self.tolerance
    }
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} delta={:.3e} tol={:.1e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.delta,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckReport {
    pub lines: Vec<CheckLine>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(CheckLine::passed)
    }

    pub fn push(&mut self, line: CheckLine) {
        self.lines.push(line);
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Shifted logistic loss `ln(1 + e^{-2z}) + 1 - ln 2`.
fn shifted_logistic(z: f64) -> f64 {
    log1p_exp(-2.0 * z) + 1.0 - std::f64::consts::LN_2
}

fn exp_loss(z: f64) -> f64 {
    (-z).exp()
}

const FD_STEP: f64 = 1e-4;
const FD_TOL: f64 = 1e-5;

fn central_first(g: impl Fn(f64) -> f64, z: f64) -> f64 {
    (g(z + FD_STEP) - g(z - FD_STEP)) / (2.0 * FD_STEP)
}

fn central_second(g: impl Fn(f64) -> f64, z: f64) -> f64 {
    (g(z + FD_STEP) - 2.0 * g(z) + g(z - FD_STEP)) / (FD_STEP * FD_STEP)
}

/// Confirms the shifted logistic loss and the exponential loss agree at zero
/// in value, slope and curvature (central differences, step 1e-4, tolerance
/// 1e-5), and that their gap shrinks like `|z|³` on the grid points inside
/// `[-0.1, 0.1]`.
pub fn taylor_match_check(grid: &[f64]) -> Result<CheckReport> {
    let near: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|z| z.abs() <= 0.1 && *z != 0.0)
        .collect();
    if near.is_empty() {
        return Err(Error::InvalidArgument(
            "grid has no nonzero points in [-0.1, 0.1]".into(),
        ));
    }
    let mut rep = CheckReport::default();
    rep.push(CheckLine::new("value_at_0 shifted_logistic=1", (shifted_logistic(0.0) - 1.0).abs(), FD_TOL));
    rep.push(CheckLine::new("value_at_0 exponential=1", (exp_loss(0.0) - 1.0).abs(), FD_TOL));
    let g1 = central_first(shifted_logistic, 0.0);
    let e1 = central_first(exp_loss, 0.0);
    rep.push(CheckLine::new("d1_at_0 shifted_logistic=-1", (g1 + 1.0).abs(), FD_TOL));
    rep.push(CheckLine::new("d1_at_0 exponential=-1", (e1 + 1.0).abs(), FD_TOL));
    let g2 = central_second(shifted_logistic, 0.0);
    let e2 = central_second(exp_loss, 0.0);
    rep.push(CheckLine::new("d2_at_0 shifted_logistic=1", (g2 - 1.0).abs(), FD_TOL));
    rep.push(CheckLine::new("d2_at_0 exponential=1", (e2 - 1.0).abs(), FD_TOL));
    // the z³ coefficient of the gap is 1/6; anything bounded by 1 is cubic
    let ratio = near
        .iter()
        .map(|&z| (shifted_logistic(z) - exp_loss(z)).abs() / z.abs().powi(3))
        .fold(0.0, f64::max);
    rep.push(CheckLine::new("cubic_gap max|g-e|/|z|^3 <= 1", ratio, 1.0));
    Ok(rep)
}

/// Largest violation of `ln(1 + e^{-2z}) <= e^{-z}` over the grid (zero when
/// the bound holds everywhere).
pub fn loss_bound_check(grid: &[f64]) -> CheckLine {
    let worst = grid
        .iter()
        .map(|&z| LossKind::Logistic2.value(z) - LossKind::Exponential.value(z))
        .fold(f64::NEG_INFINITY, f64::max);
    CheckLine::new("logistic2 <= exponential", worst.max(0.0), 0.0)
}

/// Bisection on the sign of a strictly increasing derivative.
fn argmin_by_derivative(deriv: impl Fn(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (-60.0_f64, 60.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if deriv(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// For each `p`, minimizes the conditional exponential risk
/// `p e^{-f} + (1-p) e^f` and the conditional logistic risk
/// `p ln(1+e^{-2f}) + (1-p) ln(1+e^{2f})` numerically and compares both
/// minimizers with `½ ln(p/(1-p))` at tolerance 1e-6.
pub fn common_minimizer_check(ps: &[f64]) -> Result<CheckReport> {
    let mut rep = CheckReport::default();
    for &p in ps {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "p = {p}: minimizer is at infinity unless 0 < p < 1"
            )));
        }
        let target = 0.5 * (p / (1.0 - p)).ln();
        let f_exp = argmin_by_derivative(|f| -p * (-f).exp() + (1.0 - p) * f.exp());
        let f_log = argmin_by_derivative(|f| {
            -2.0 * p * sigmoid(-2.0 * f) + 2.0 * (1.0 - p) * sigmoid(2.0 * f)
        });
        rep.push(CheckLine::new(format!("exp_minimizer p={p}"), (f_exp - target).abs(), 1e-6));
        rep.push(CheckLine::new(format!("log_minimizer p={p}"), (f_log - target).abs(), 1e-6));
    }
    Ok(rep)
}
