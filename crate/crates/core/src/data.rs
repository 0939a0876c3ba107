//! Datasets, example weights and train/test splitting.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::rng::RngState;
use crate::scalar::{normalize_in_place, Scalar};

/// Whether labels are ±1 classes or real targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelMode {
    Classification,
    Regression,
}

/// An immutable `m × d` feature matrix with labels and optional per-example
/// prior probabilities and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    feature_names: Vec<String>,
    features: Vec<T>,
    dims: usize,
    labels: Vec<T>,
    mode: LabelMode,
    prior: Option<Vec<T>>,
    weights: Option<Vec<T>>,
}

fn is_class_label<T: Scalar>(y: T) -> bool {
    y == T::one() || y == -T::one()
}

impl<T: Scalar> Dataset<T> {
    /// Builds a dataset from row vectors, inferring the label mode: it is a
    /// classification set iff every label is exactly -1 or +1.
    pub fn from_rows(rows: Vec<Vec<T>>, labels: Vec<T>) -> Result<Self> {
        let dims = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != dims) {
            return Err(Error::InvalidData("rows have unequal length".into()));
        }
        let features = rows.into_iter().flatten().collect();
        Self::from_flat(features, dims, labels)
    }

    /// Row-major feature buffer of length `m * dims`.
    pub fn from_flat(features: Vec<T>, dims: usize, labels: Vec<T>) -> Result<Self> {
        let mode = if !labels.is_empty() && labels.iter().all(|&y| is_class_label(y)) {
            LabelMode::Classification
        } else {
            LabelMode::Regression
        };
        let names = (0..dims).map(|j| format!("x{j}")).collect();
        Self::build(names, features, dims, labels, mode)
    }

    /// Like [`Dataset::from_flat`] but with the mode fixed by the caller. A
    /// regression dataset may legitimately hold only ±1 targets.
    pub fn with_mode(features: Vec<T>, dims: usize, labels: Vec<T>, mode: LabelMode) -> Result<Self> {
        let names = (0..dims).map(|j| format!("x{j}")).collect();
        Self::build(names, features, dims, labels, mode)
    }

    fn build(
        feature_names: Vec<String>,
        features: Vec<T>,
        dims: usize,
        labels: Vec<T>,
        mode: LabelMode,
    ) -> Result<Self> {
        let m = labels.len();
        if m == 0 {
            return Err(Error::InvalidData("dataset has no rows".into()));
        }
        if dims == 0 {
            return Err(Error::InvalidData("dataset has no feature columns".into()));
        }
        if features.len() != m * dims {
            return Err(Error::InvalidData(format!(
                "feature buffer has {} values, expected {m} x {dims}",
                features.len()
            )));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite feature at row {}, column {}",
                pos / dims,
                pos % dims
            )));
        }
        if let Some(i) = labels.iter().position(|y| !y.is_finite()) {
            return Err(Error::InvalidData(format!("non-finite label at row {i}")));
        }
        if mode == LabelMode::Classification {
            if let Some(i) = labels.iter().position(|&y| !is_class_label(y)) {
                return Err(Error::InvalidData(format!(
                    "classification label at row {i} is {}, expected -1 or +1",
                    labels[i]
                )));
            }
        }
        Ok(Self {
            feature_names,
            features,
            dims,
            labels,
            mode,
            prior: None,
            weights: None,
        })
    }

    pub fn with_prior(mut self, prior: Vec<T>) -> Result<Self> {
        if prior.len() != self.len() {
            return Err(Error::InvalidData(format!(
                "prior has {} entries, dataset has {}",
                prior.len(),
                self.len()
            )));
        }
        if let Some(i) = prior
            .iter()
            .position(|&p| !(p >= T::zero() && p <= T::one()))
        {
            return Err(Error::InvalidData(format!(
                "prior out of [0,1] at row {i}: {}",
                prior[i]
            )));
        }
        self.prior = Some(prior);
        Ok(self)
    }

    pub fn with_weights(mut self, weights: Vec<T>) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(Error::InvalidData(format!(
                "weights have {} entries, dataset has {}",
                weights.len(),
                self.len()
            )));
        }
        if let Some(i) = weights.iter().position(|&w| !(w >= T::zero()) || !w.is_finite()) {
            return Err(Error::InvalidData(format!(
                "negative or non-finite weight at row {i}"
            )));
        }
        let total: T = weights.iter().copied().sum();
        if !(total > T::zero()) {
            return Err(Error::InvalidData("weights sum to zero".into()));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.dims {
            return Err(Error::InvalidData(format!(
                "{} feature names for {} columns",
                names.len(),
                self.dims
            )));
        }
        self.feature_names = names;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn mode(&self) -> LabelMode {
        self.mode
    }

    pub fn is_classification(&self) -> bool {
        self.mode == LabelMode::Classification
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.features[i * self.dims..(i + 1) * self.dims]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.features.chunks_exact(self.dims)
    }

    pub fn feature(&self, i: usize, j: usize) -> T {
        self.features[i * self.dims + j]
    }

    pub fn labels(&self) -> &[T] {
        &self.labels
    }

    pub fn prior(&self) -> Option<&[T]> {
        self.prior.as_deref()
    }

    pub fn weights(&self) -> Option<&[T]> {
        self.weights.as_deref()
    }

    /// Per-example base weight, 1 when the dataset carries no weights.
    pub fn base_weight(&self, i: usize) -> T {
        self.weights.as_ref().map_or(T::one(), |w| w[i])
    }

    pub(crate) fn require_classification(&self) -> Result<()> {
        match self.mode {
            LabelMode::Classification => Ok(()),
            LabelMode::Regression => Err(Error::InvalidData(
                "operation requires a classification dataset (labels in {-1,+1})".into(),
            )),
        }
    }

    /// The rows at `indices`, in the given order, carrying over prior and
    /// weights.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(indices.len() * self.dims);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        let mut out = Self::build(
            self.feature_names.clone(),
            features,
            self.dims,
            labels,
            self.mode,
        )?;
        if let Some(p) = &self.prior {
            out = out.with_prior(indices.iter().map(|&i| p[i]).collect())?;
        }
        if let Some(w) = &self.weights {
            out = out.with_weights(indices.iter().map(|&i| w[i]).collect())?;
        }
        Ok(out)
    }

    /// Same features, new labels and mode.
    pub fn relabel(&self, labels: Vec<T>, mode: LabelMode) -> Result<Self> {
        let mut out = Self::build(
            self.feature_names.clone(),
            self.features.clone(),
            self.dims,
            labels,
            mode,
        )?;
        out.weights = self.weights.clone();
        out.prior = self.prior.clone();
        Ok(out)
    }
}

/// A normalized set of nonnegative example weights (the boosting
/// distribution `D_t`).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightDistribution<T> {
    w: Vec<T>,
}

impl<T: Scalar> WeightDistribution<T> {
    fn tolerance() -> T {
        T::lit(1e-9).max(T::epsilon() * T::lit(1024.0))
    }

    /// Uniform distribution over `m` examples.
    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument(
                "uniform distribution over zero examples".into(),
            ));
        }
        let mut w = vec![T::one(); m];
        normalize_in_place(&mut w);
        Ok(Self { w })
    }

    /// Validates an already-normalized weight vector.
    pub fn new(w: Vec<T>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidArgument("empty distribution".into()));
        }
        if w.iter().any(|&v| !(v >= T::zero()) || !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "distribution has a negative or non-finite entry".into(),
            ));
        }
        let total: T = w.iter().copied().sum();
        if (total - T::one()).abs() > Self::tolerance() {
            return Err(Error::InvalidArgument(format!(
                "distribution sums to {total}, not 1"
            )));
        }
        Ok(Self { w })
    }

    /// Normalizes a nonnegative weight vector with positive sum.
    pub fn from_unnormalized(mut w: Vec<T>) -> Result<Self> {
        if w.iter().any(|&v| !(v >= T::zero()) || !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total = normalize_in_place(&mut w);
        if !(total > T::zero()) {
            return Err(Error::Internal("weights sum to zero".into()));
        }
        Ok(Self { w })
    }

    pub(crate) fn from_normalized_unchecked(w: Vec<T>) -> Self {
        Self { w }
    }

    /// Base weights of `ds`, normalized.
    pub fn from_dataset(ds: &Dataset<T>) -> Result<Self> {
        match ds.weights() {
            Some(w) => Self::from_unnormalized(w.to_vec()),
            None => Self::uniform(ds.len()),
        }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.w
    }

    pub fn into_vec(self) -> Vec<T> {
        self.w
    }

    pub fn get(&self, i: usize) -> T {
        self.w[i]
    }
}

/// Convenience wrapper matching the free-function form.
pub fn uniform_distribution<T: Scalar>(m: usize) -> Result<WeightDistribution<T>> {
    WeightDistribution::uniform(m)
}

/// Names of the special CSV columns. Every other column is a feature.
#[derive(Debug, Clone)]
pub struct CsvColumns {
    pub label: String,
    pub prior: Option<String>,
    pub weight: Option<String>,
}

impl Default for CsvColumns {
    fn default() -> Self {
        Self {
            label: "label".into(),
            prior: None,
            weight: None,
        }
    }
}

impl CsvColumns {
    pub fn with_prior(mut self, name: impl Into<String>) -> Self {
        self.prior = Some(name.into());
        self
    }

    pub fn with_weight(mut self, name: impl Into<String>) -> Self {
        self.weight = Some(name.into());
        self
    }
}

fn parse_cell<T: Scalar>(cell: &str, row: usize, column: &str) -> Result<T> {
    match cell.trim().parse::<T>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            row,
            column: column.to_string(),
            value: cell.to_string(),
        }),
    }
}

/// Loads a dataset from a CSV file with one header row.
pub fn load_csv<T: Scalar>(path: impl AsRef<Path>, columns: &CsvColumns) -> Result<Dataset<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, columns)
}

/// Parses CSV from any reader. Row numbers in errors are 1-based data rows
/// (the header is row 0).
pub fn read_csv<T: Scalar, R: Read>(reader: R, columns: &CsvColumns) -> Result<Dataset<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::EmptyFile);
    }
    let find = |name: &str| headers.iter().position(|h| h == name);
    let label_idx = find(&columns.label).ok_or_else(|| Error::MissingColumn(columns.label.clone()))?;
    let prior_idx = match &columns.prior {
        Some(name) => Some(find(name).ok_or_else(|| Error::MissingColumn(name.clone()))?),
        None => None,
    };
    let weight_idx = match &columns.weight {
        Some(name) => Some(find(name).ok_or_else(|| Error::MissingColumn(name.clone()))?),
        None => None,
    };
    let feature_idx: Vec<usize> = (0..headers.len())
        .filter(|&c| c != label_idx && Some(c) != prior_idx && Some(c) != weight_idx)
        .collect();
    let names: Vec<String> = feature_idx.iter().map(|&c| headers[c].to_string()).collect();

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut prior = Vec::new();
    let mut weights = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row = r + 1;
        if record.len() != headers.len() {
            return Err(Error::InvalidData(format!(
                "row {row} has {} cells, header has {}",
                record.len(),
                headers.len()
            )));
        }
        for &c in &feature_idx {
            features.push(parse_cell::<T>(&record[c], row, &headers[c])?);
        }
        labels.push(parse_cell::<T>(&record[label_idx], row, &headers[label_idx])?);
        if let Some(c) = prior_idx {
            prior.push(parse_cell::<T>(&record[c], row, &headers[c])?);
        }
        if let Some(c) = weight_idx {
            weights.push(parse_cell::<T>(&record[c], row, &headers[c])?);
        }
    }
    if labels.is_empty() {
        return Err(Error::EmptyFile);
    }
    let dims = names.len();
    let mode = if labels.iter().all(|&y| is_class_label(y)) {
        LabelMode::Classification
    } else {
        LabelMode::Regression
    };
    let mut ds = Dataset::build(names, features, dims, labels, mode)?;
    if prior_idx.is_some() {
        ds = ds.with_prior(prior)?;
    }
    if weight_idx.is_some() {
        ds = ds.with_weights(weights)?;
    }
    Ok(ds)
}

/// Feature columns of a CSV whose label column may be absent.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable<T> {
    pub names: Vec<String>,
    values: Vec<T>,
    dims: usize,
}

impl<T: Scalar> FeatureTable<T> {
    pub fn len(&self) -> usize {
        self.values.len().checked_div(self.dims).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.dims..(i + 1) * self.dims]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.values.chunks_exact(self.dims.max(1))
    }
}

/// Reads only the feature columns: every column except the label, prior and
/// weight columns, each of which may be missing.
pub fn read_features<T: Scalar, R: Read>(reader: R, columns: &CsvColumns) -> Result<FeatureTable<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::EmptyFile);
    }
    let special = |h: &str| {
        h == columns.label || columns.prior.as_deref() == Some(h) || columns.weight.as_deref() == Some(h)
    };
    let feature_idx: Vec<usize> = (0..headers.len()).filter(|&c| !special(&headers[c])).collect();
    if feature_idx.is_empty() {
        return Err(Error::InvalidData("no feature columns".into()));
    }
    let names = feature_idx.iter().map(|&c| headers[c].to_string()).collect();
    let mut values = Vec::new();
    let mut rows = 0;
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row = r + 1;
        if record.len() != headers.len() {
            return Err(Error::InvalidData(format!(
                "row {row} has {} cells, header has {}",
                record.len(),
                headers.len()
            )));
        }
        for &c in &feature_idx {
            values.push(parse_cell::<T>(&record[c], row, &headers[c])?);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::EmptyFile);
    }
    Ok(FeatureTable {
        names,
        values,
        dims: feature_idx.len(),
    })
}

pub fn load_features<T: Scalar>(path: impl AsRef<Path>, columns: &CsvColumns) -> Result<FeatureTable<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_features(file, columns)
}

/// Writes `ds` as CSV: feature columns, then the label column, then prior and
/// weight columns when present. Numbers use the shortest representation that
/// parses back to the same value.
pub fn write_csv<T: Scalar, W: Write>(ds: &Dataset<T>, writer: W, columns: &CsvColumns) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = ds.feature_names.clone();
    header.push(columns.label.clone());
    if ds.prior.is_some() {
        header.push(columns.prior.clone().unwrap_or_else(|| "prior".into()));
    }
    if ds.weights.is_some() {
        header.push(columns.weight.clone().unwrap_or_else(|| "weight".into()));
    }
    wtr.write_record(&header)?;
    for i in 0..ds.len() {
        let mut rec: Vec<String> = ds.row(i).iter().map(|v| v.to_string()).collect();
        rec.push(ds.labels[i].to_string());
        if let Some(p) = &ds.prior {
            rec.push(p[i].to_string());
        }
        if let Some(w) = &ds.weights {
            rec.push(w[i].to_string());
        }
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// Random train/test partition. `round(m * test_fraction)` rows go to the test
/// set; both parts keep the original row order.
pub fn split<T: Scalar>(
    ds: &Dataset<T>,
    test_fraction: f64,
    rng: &mut RngState,
) -> Result<(Dataset<T>, Dataset<T>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test fraction {test_fraction} outside (0, 1)"
        )));
    }
    let m = ds.len();
    let n_test = (m as f64 * test_fraction).round() as usize;
    if n_test == 0 || n_test >= m {
        return Err(Error::InvalidArgument(format!(
            "test fraction {test_fraction} of {m} rows leaves an empty train or test set"
        )));
    }
    let perm = rng.permutation(m);
    let mut test_idx = perm[..n_test].to_vec();
    let mut train_idx = perm[n_test..].to_vec();
    test_idx.sort_unstable();
    train_idx.sort_unstable();
    Ok((ds.subset(&train_idx)?, ds.subset(&test_idx)?))
}
