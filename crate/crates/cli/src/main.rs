//! `boostkit` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or model error, 3 internal
//! invariant violation.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use boostkit::active::{simulate, write_curve_csv, Strategy};
use boostkit::booster::{
    bound_report, margin_histogram, margins, replay_stats, train, write_stats_csv, AdditiveModel, BoostLoss,
    RoundStats,
};
use boostkit::cde::{conditional_distribution, train_cde, ConditionalDensityModel};
use boostkit::config::ExperimentConfig;
use boostkit::data::{load_csv, load_features, CsvColumns, Dataset, FeatureTable, LabelMode};
use boostkit::losses::{empirical_loss, LossKind};
use boostkit::persist::{write_atomic, ModelFile, SavedModel};
use boostkit::prior::{dataset_prior, train_with_prior};
use boostkit::{Error, RngState};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "boostkit", version, about = "Boosting with decision stumps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a classifier and write the model plus per-round statistics.
    Train(TrainArgs),
    /// Score a CSV with a saved classifier.
    Predict(PredictArgs),
    /// Error, losses, margin histogram and bound chain on labeled data.
    Eval(EvalArgs),
    /// Conditional density estimation.
    #[command(subcommand)]
    Cde(CdeCommand),
    /// Simulate pool-based active learning and write learning curves.
    Active(ActiveArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// Flat key = value configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    rounds: Option<usize>,
    /// exp or logistic
    #[arg(long)]
    loss: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "label-col")]
    label_col: Option<String>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Per-round statistics CSV; defaults to `<out>.stats.csv`.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Held-out labeled data; fills the test_error column.
    #[arg(long)]
    test: Option<PathBuf>,
    /// Column holding prior probabilities Pr[y = +1 | x].
    #[arg(long = "prior-col")]
    prior_col: Option<String>,
    /// Weight of the prior term. Required with --prior-col.
    #[arg(long)]
    eta: Option<f64>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long = "label-col", default_value = "label")]
    label_col: String,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long = "label-col", default_value = "label")]
    label_col: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CdeCommand {
    /// Train one classifier per label breakpoint.
    Train(CdeTrainArgs),
    /// Draw samples of y for each row.
    Sample(CdeSampleArgs),
    /// Conditional quantile of y for each row.
    Quantile(CdeQuantileArgs),
}

#[derive(Args)]
struct CdeTrainArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Number of breakpoints.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args)]
struct CdeSampleArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long = "label-col", default_value = "label")]
    label_col: String,
    #[arg(long = "n-samples", default_value_t = 1)]
    n_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CdeQuantileArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long = "label-col", default_value = "label")]
    label_col: String,
    /// Quantile level in (0, 1).
    #[arg(long)]
    level: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ActiveArgs {
    #[command(flatten)]
    common: Common,
    /// Pool of labeled examples whose labels are revealed on request.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// uncertainty, random or both
    #[arg(long, default_value = "both")]
    strategy: String,
    #[arg(long)]
    init: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Number of consecutive seeds starting at --seed.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Cde(CdeCommand::Train(a)) => cmd_cde_train(a),
        Command::Cde(CdeCommand::Sample(a)) => cmd_cde_sample(a),
        Command::Cde(CdeCommand::Quantile(a)) => cmd_cde_quantile(a),
        Command::Active(a) => cmd_active(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_internal() { 3 } else { 2 })
        }
    }
}

/// Config file, then flags.
fn resolve_config(common: &Common) -> CliResult<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path).map_err(|e| match e {
            Error::Io { .. } => Failure::Run(e),
            other => usage(other.to_string()),
        })?,
        None => ExperimentConfig::default(),
    };
    let mut set = |key: &str, value: String| cfg.set(key, &value).map_err(|e| usage(e.to_string()));
    if let Some(r) = common.rounds {
        set("rounds", r.to_string())?;
    }
    if let Some(l) = &common.loss {
        set("loss", l.clone())?;
    }
    if let Some(s) = common.seed {
        set("seed", s.to_string())?;
    }
    if let Some(c) = &common.label_col {
        set("label_column", c.clone())?;
    }
    Ok(cfg)
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()).map_err(Failure::Run),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_model(path: &Path) -> CliResult<ModelFile<f64>> {
    Ok(ModelFile::load(path)?)
}

fn load_classifier(path: &Path) -> CliResult<AdditiveModel<f64>> {
    match load_model(path)?.model {
        SavedModel::Classifier(m) => Ok(m),
        SavedModel::Density(_) => Err(usage(format!("{} holds a density model, not a classifier", path.display()))),
    }
}

fn load_density(path: &Path) -> CliResult<ConditionalDensityModel<f64>> {
    match load_model(path)?.model {
        SavedModel::Density(m) => Ok(m),
        SavedModel::Classifier(_) => Err(usage(format!("{} holds a classifier, not a density model", path.display()))),
    }
}

fn check_dims(expected: usize, got: usize, what: &Path) -> CliResult<()> {
    if expected != got {
        return Err(Failure::Run(Error::InvalidData(format!(
            "{} has {got} feature columns, model expects d = {expected}",
            what.display()
        ))));
    }
    Ok(())
}

fn default_stats_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".stats.csv");
    PathBuf::from(s)
}

/// Held-out set; its prior column is dropped when present.
fn load_test(path: &Path, cols: &CsvColumns) -> CliResult<Dataset<f64>> {
    match load_csv(path, cols) {
        Err(Error::MissingColumn(c)) if cols.prior.as_deref() == Some(c.as_str()) => {
            let plain = CsvColumns {
                prior: None,
                ..cols.clone()
            };
            Ok(load_csv(path, &plain)?)
        }
        other => Ok(other?),
    }
}

fn fill_test_error(stats: &mut [RoundStats<f64>], model: &AdditiveModel<f64>, test: &Dataset<f64>) -> CliResult<()> {
    let mut scores = vec![0.0; test.len()];
    for (s, term) in stats.iter_mut().zip(model.terms()) {
        for (f, x) in scores.iter_mut().zip(test.rows()) {
            *f += term.alpha * term.stump.evaluate(x)?;
        }
        let wrong = scores
            .iter()
            .zip(test.labels())
            .filter(|(&f, &y)| (if f >= 0.0 { 1.0 } else { -1.0 }) != y)
            .count();
        s.test_error = Some(wrong as f64 / test.len() as f64);
    }
    Ok(())
}

fn cmd_train(a: TrainArgs) -> CliResult<()> {
    let mut cfg = resolve_config(&a.common)?;
    if let Some(e) = a.eta {
        cfg.set("eta", &e.to_string()).map_err(|e| usage(e.to_string()))?;
    }
    if let Some(c) = &a.prior_col {
        cfg.set("prior_column", c).map_err(|e| usage(e.to_string()))?;
    }
    if cfg.eta.is_some() && cfg.prior_column.is_none() {
        return Err(usage("--eta requires --prior-col"));
    }
    let prior_cfg = match cfg.prior_column {
        Some(_) => Some(cfg.prior::<f64>().map_err(|_| usage("--prior-col requires --eta"))?),
        None => None,
    };
    let boost = cfg.boost::<f64>().map_err(|e| usage(e.to_string()))?;
    if prior_cfg.is_some() && boost.loss != BoostLoss::Logistic {
        return Err(usage("training with a prior needs --loss logistic"));
    }

    let mut cols = CsvColumns {
        label: cfg.label_column.clone(),
        ..CsvColumns::default()
    };
    if let Some(c) = &cfg.prior_column {
        cols = cols.with_prior(c.clone());
    }
    let ds = load_csv::<f64>(&a.data, &cols)?;
    let test = match &a.test {
        Some(p) => Some(load_test(p, &cols)?),
        None => None,
    };
    if let Some(t) = &test {
        check_dims(ds.dims(), t.dims(), a.test.as_deref().unwrap_or(Path::new("test")))?;
    }

    let (model, mut stats) = match &prior_cfg {
        Some(pc) => {
            let prior = dataset_prior(&ds)?;
            let out = train_with_prior(&ds, &prior, pc, &boost)?;
            (out.model, out.stats)
        }
        None => {
            let out = train(&ds, &boost, test.as_ref())?;
            (out.model, out.stats)
        }
    };
    if let (Some(t), Some(_)) = (&test, &prior_cfg) {
        fill_test_error(&mut stats, &model, t)?;
    }

    let mut file = ModelFile::classifier(model);
    for (k, v) in cfg.echo() {
        file = file.with_provenance(k, v);
    }
    file.save(&a.out)?;
    let mut csv = Vec::new();
    write_stats_csv(&stats, &mut csv)?;
    let stats_path = a.stats.unwrap_or_else(|| default_stats_path(&a.out));
    write_atomic(&stats_path, &csv)?;
    if let Some(last) = stats.last() {
        eprintln!(
            "trained {} rounds on {} rows; train error {}",
            stats.len(),
            ds.len(),
            last.train_error
        );
    }
    Ok(())
}

fn feature_columns(label: &str) -> CsvColumns {
    CsvColumns {
        label: label.to_string(),
        ..CsvColumns::default()
    }
}

fn cmd_predict(a: PredictArgs) -> CliResult<()> {
    let model = load_classifier(&a.model)?;
    let table: FeatureTable<f64> = load_features(&a.data, &feature_columns(&a.label_col))?;
    check_dims(model.dims(), table.dims(), &a.data)?;
    let mut out = String::from("row,f,H,prob\n");
    for (i, x) in table.rows().enumerate() {
        let f = model.score(x)?;
        let h = if f >= 0.0 { 1 } else { -1 };
        let p = model.link().apply(f);
        let _ = writeln!(out, "{i},{f},{h},{p}");
    }
    write_output(a.out.as_deref(), &out)
}

fn cmd_eval(a: EvalArgs) -> CliResult<()> {
    let model = load_classifier(&a.model)?;
    let ds = load_csv::<f64>(&a.data, &feature_columns(&a.label_col))?;
    check_dims(model.dims(), ds.dims(), &a.data)?;
    if ds.mode() != LabelMode::Classification {
        return Err(Failure::Run(Error::InvalidData("eval needs labels in {-1, +1}".into())));
    }
    let m = ds.len() as f64;
    let logistic_kind = match model.loss() {
        BoostLoss::Exponential => LossKind::Logistic2,
        BoostLoss::Logistic => LossKind::Logistic1,
    };
    let mut out = String::new();
    let _ = writeln!(out, "rows {}", ds.len());
    let _ = writeln!(out, "rounds {}", model.len());
    let _ = writeln!(out, "error_rate {}", model.error_rate(&ds)?);
    let _ = writeln!(out, "exp_loss {}", empirical_loss(&model, &ds, LossKind::Exponential)? / m);
    let _ = writeln!(
        out,
        "logistic_loss {} (link {})",
        empirical_loss(&model, &ds, logistic_kind)? / m,
        model.link().name()
    );
    match margins(&model, &ds) {
        Ok(mg) => {
            let min = mg.iter().cloned().fold(f64::INFINITY, f64::min);
            let _ = writeln!(out, "min_margin {min}");
            let _ = writeln!(out, "margin_histogram lo,hi,count");
            for (b, c) in margin_histogram(&mg, 20).iter().enumerate() {
                let lo = -1.0 + b as f64 * 0.1;
                let _ = writeln!(out, "{:.1},{:.1},{c}", lo, lo + 0.1);
            }
        }
        Err(_) => {
            let _ = writeln!(out, "margin_histogram skipped: total |alpha| is 0");
        }
    }
    let binary = model.terms().iter().all(|t| t.stump.is_binary());
    if model.loss() == BoostLoss::Exponential && binary {
        let report = bound_report(&replay_stats(&model, &ds)?);
        let _ = writeln!(out, "bound_chain train_error <= prod_z <= exp_bound");
        out.push_str(&report.render());
        let _ = writeln!(out, "chain_holds {}", report.chain_holds());
    } else {
        let _ = writeln!(out, "bound_chain not applicable (needs an exponential-loss model with binary stumps)");
    }
    write_output(a.out.as_deref(), &out)
}

fn cmd_cde_train(a: CdeTrainArgs) -> CliResult<()> {
    let mut cfg = resolve_config(&a.common)?;
    if a.common.loss.is_none() {
        cfg.set("loss", "logistic").map_err(|e| usage(e.to_string()))?;
    }
    if let Some(k) = a.k {
        cfg.k = k;
    }
    let boost = cfg.boost::<f64>().map_err(|e| usage(e.to_string()))?;
    if boost.loss != BoostLoss::Logistic {
        return Err(usage("density estimation trains logistic-loss classifiers"));
    }
    let ds = load_csv::<f64>(&a.data, &feature_columns(&cfg.label_column))?;
    let ds = ds.relabel(ds.labels().to_vec(), LabelMode::Regression)?;
    let model = train_cde(&ds, cfg.k, &boost)?;
    let breakpoints = model.breakpoints().len();
    let mut file = ModelFile::density(model);
    for (k, v) in cfg.echo() {
        file = file.with_provenance(k, v);
    }
    file = file.with_provenance("k", cfg.k);
    file.save(&a.out)?;
    eprintln!("trained {breakpoints} breakpoint classifiers on {} rows", ds.len());
    Ok(())
}

fn cmd_cde_sample(a: CdeSampleArgs) -> CliResult<()> {
    let model = load_density(&a.model)?;
    let table: FeatureTable<f64> = load_features(&a.data, &feature_columns(&a.label_col))?;
    check_dims(model.dims(), table.dims(), &a.data)?;
    let mut rng = RngState::new(a.seed);
    let mut out = String::from("row,value\n");
    for (i, x) in table.rows().enumerate() {
        let bins = conditional_distribution(&model, x)?;
        for _ in 0..a.n_samples {
            let _ = writeln!(out, "{i},{}", bins.sample(&mut rng));
        }
    }
    write_output(a.out.as_deref(), &out)
}

fn cmd_cde_quantile(a: CdeQuantileArgs) -> CliResult<()> {
    if !(a.level > 0.0 && a.level < 1.0) {
        return Err(usage(format!("--level {} outside (0, 1)", a.level)));
    }
    let model = load_density(&a.model)?;
    let table: FeatureTable<f64> = load_features(&a.data, &feature_columns(&a.label_col))?;
    check_dims(model.dims(), table.dims(), &a.data)?;
    let mut out = String::from("row,value\n");
    for (i, x) in table.rows().enumerate() {
        let q = conditional_distribution(&model, x)?.quantile(a.level)?;
        let _ = writeln!(out, "{i},{q}");
    }
    write_output(a.out.as_deref(), &out)
}

fn cmd_active(a: ActiveArgs) -> CliResult<()> {
    let mut cfg = resolve_config(&a.common)?;
    let mut set = |key: &str, v: Option<usize>| match v {
        Some(v) => cfg.set(key, &v.to_string()).map_err(|e| usage(e.to_string())),
        None => Ok(()),
    };
    set("init_batch", a.init)?;
    set("batch", a.batch)?;
    set("iterations", a.iterations)?;
    let strategies = match a.strategy.as_str() {
        "both" => vec![Strategy::Uncertainty, Strategy::Random],
        s => vec![Strategy::parse(s).map_err(|e| usage(e.to_string()))?],
    };
    if a.seeds == 0 {
        return Err(usage("--seeds must be >= 1"));
    }
    let base = cfg.active::<f64>().map_err(|e| usage(e.to_string()))?;
    let cols = feature_columns(&cfg.label_column);
    let pool = load_csv::<f64>(&a.data, &cols)?;
    let test = load_csv::<f64>(&a.test, &cols)?;
    check_dims(pool.dims(), test.dims(), &a.test)?;

    let jobs: Vec<(Strategy, u64)> = strategies
        .iter()
        .flat_map(|&s| (0..a.seeds).map(move |i| (s, base.seed + i)))
        .collect();
    let curves = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(strategy, seed)| {
                let cfg = boostkit::active::ActiveConfig { strategy, seed, ..base };
                let (pool, test) = (&pool, &test);
                scope.spawn(move || simulate(pool, test, &cfg))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Internal("simulation thread panicked".into()))))
            .collect::<boostkit::Result<Vec<_>>>()
    })?;
    let mut csv = Vec::new();
    for (i, curve) in curves.iter().enumerate() {
        write_curve_csv(&curve.points, &mut csv, i == 0)?;
        if curve.truncated {
            eprintln!("warning: pool ran out of unlabeled examples for seed {}", jobs[i].1);
        }
    }
    write_atomic(&a.out, &csv)?;
    Ok(())
}
