//! Synthetic data shared by the integration tests.
#![allow(dead_code)]

use boostkit::data::Dataset;
use boostkit::RngState;

pub fn uniform_rows(rng: &mut RngState, m: usize, d: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    (0..m)
        .map(|_| (0..d).map(|_| rng.uniform(lo, hi)).collect())
        .collect()
}

pub fn labeled(rows: Vec<Vec<f64>>, rule: impl Fn(&[f64]) -> bool) -> Dataset<f64> {
    let labels = rows.iter().map(|r| if rule(r) { 1.0 } else { -1.0 }).collect();
    Dataset::from_rows(rows, labels).unwrap()
}

/// Random small classification set with integer-grid features (so ties occur)
/// and both labels present.
pub fn random_small(rng: &mut RngState, m: usize, d: usize) -> Dataset<f64> {
    loop {
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..d).map(|_| rng.below(8) as f64).collect())
            .collect();
        let labels: Vec<f64> = (0..m)
            .map(|_| if rng.below(2) == 0 { -1.0 } else { 1.0 })
            .collect();
        if labels.iter().any(|&y| y > 0.0) && labels.iter().any(|&y| y < 0.0) {
            return Dataset::from_rows(rows, labels).unwrap();
        }
    }
}

/// `y = +1` iff `x0 > 0.3 and x1 > 0.5`, features uniform on `[0,1]^3`.
/// Representable by a sum of stumps but not by one stump.
pub fn stump_separable(seed: u64, m: usize) -> Dataset<f64> {
    let mut rng = RngState::new(seed);
    labeled(uniform_rows(&mut rng, m, 3, 0.0, 1.0), |x| x[0] > 0.3 && x[1] > 0.5)
}

/// `y = sign(x0 * x1)` on `[-1,1]^2`.
pub fn xor(seed: u64, m: usize) -> Dataset<f64> {
    let mut rng = RngState::new(seed);
    labeled(uniform_rows(&mut rng, m, 2, -1.0, 1.0), |x| x[0] * x[1] > 0.0)
}

/// Flips each label with probability `noise`.
pub fn with_label_noise(ds: &Dataset<f64>, noise: f64, rng: &mut RngState) -> Dataset<f64> {
    let labels = ds
        .labels()
        .iter()
        .map(|&y| if rng.unit_f64() < noise { -y } else { y })
        .collect();
    ds.relabel(labels, ds.mode()).unwrap()
}
