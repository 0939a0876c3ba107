use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use boostkit::persist::{ModelFile, SavedModel};
use boostkit::RngState;

fn boostkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_boostkit")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// `label = +1` iff `x0 > 0.5`, plus a noise column.
fn write_separable(dir: &Path, name: &str, m: usize, seed: u64) -> PathBuf {
    let mut rng = RngState::new(seed);
    let mut s = String::from("x0,x1,label\n");
    for _ in 0..m {
        let (a, b) = (rng.unit_f64(), rng.unit_f64());
        s.push_str(&format!("{a},{b},{}\n", if a > 0.5 { 1 } else { -1 }));
    }
    let path = dir.join(name);
    fs::write(&path, s).unwrap();
    path
}

fn read_csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn train_reaches_zero_error_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_separable(dir.path(), "train.csv", 100, 1);
    let test = write_separable(dir.path(), "test.csv", 50, 2);
    let m1 = dir.path().join("a.model");
    let m2 = dir.path().join("b.model");
    for m in [&m1, &m2] {
        let o = boostkit(&["train", "--data", p(&data), "--rounds", "5", "--test", p(&test), "--out", p(m)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    assert_eq!(fs::read(&m1).unwrap(), fs::read(&m2).unwrap());
    let stats = read_csv_rows(&dir.path().join("a.model.stats.csv"));
    assert_eq!(stats.len(), 5);
    assert_eq!(stats.last().unwrap()[6], "0");
    assert!(stats.iter().all(|r| !r[7].is_empty()));
}

#[test]
fn eta_without_prior_column_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_separable(dir.path(), "d.csv", 20, 3);
    let out = dir.path().join("m.model");
    let o = boostkit(&["train", "--data", p(&data), "--eta", "2", "--loss", "logistic", "--out", p(&out)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("--prior-col"));
    assert!(!out.exists());
}

#[test]
fn prior_training_route() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = RngState::new(4);
    let mut s = String::from("x0,x1,p,label\n");
    for _ in 0..30 {
        let (a, b) = (rng.unit_f64(), rng.unit_f64());
        s.push_str(&format!("{a},{b},{},{}\n", if a > 0.5 { 0.9 } else { 0.1 }, if a > 0.5 { 1 } else { -1 }));
    }
    let data = dir.path().join("d.csv");
    fs::write(&data, s).unwrap();
    let out = dir.path().join("m.model");
    let args = ["train", "--data", p(&data), "--prior-col", "p", "--eta", "1.5", "--loss", "logistic", "--rounds", "10", "--out", p(&out)];
    let o = boostkit(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("eta 1.5"));

    let o = boostkit(&["train", "--data", p(&data), "--prior-col", "p", "--eta", "1.5", "--out", p(&out)]);
    assert_eq!(code(&o), 1, "exponential loss with a prior must be refused");
    let o = boostkit(&["train", "--data", p(&data), "--prior-col", "p", "--loss", "logistic", "--out", p(&out)]);
    assert_eq!(code(&o), 1, "prior column without eta must be refused");
}

#[test]
fn predict_columns_follow_the_model() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_separable(dir.path(), "d.csv", 60, 5);
    let model_path = dir.path().join("m.model");
    let o = boostkit(&["train", "--data", p(&data), "--rounds", "4", "--loss", "logistic", "--out", p(&model_path)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let preds = dir.path().join("pred.csv");
    let o = boostkit(&["predict", "--model", p(&model_path), "--data", p(&data), "--out", p(&preds)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let SavedModel::Classifier(model) = ModelFile::<f64>::load(&model_path).unwrap().model else {
        panic!("expected a classifier")
    };
    let inputs = read_csv_rows(&data);
    let rows = read_csv_rows(&preds);
    assert_eq!(rows.len(), inputs.len());
    for (r, x) in rows.iter().zip(&inputs) {
        let x: Vec<f64> = x[..2].iter().map(|v| v.parse().unwrap()).collect();
        let f_direct: f64 = model
            .terms()
            .iter()
            .map(|t| t.alpha * if x[t.stump.feature] <= t.stump.threshold { t.stump.left } else { t.stump.right })
            .sum();
        let f: f64 = r[1].parse().unwrap();
        let h: f64 = r[2].parse().unwrap();
        let prob: f64 = r[3].parse().unwrap();
        assert_eq!(f, f_direct);
        assert_eq!(h, if f >= 0.0 { 1.0 } else { -1.0 });
        assert!(prob > 0.0 && prob < 1.0);
    }
}

#[test]
fn zero_score_predicts_positive() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("z.model");
    let mut m = boostkit::booster::AdditiveModel::<f64>::new(1, boostkit::booster::BoostLoss::Exponential);
    m.push(1.0, boostkit::stump::Stump::new(0, 0.0, 0.0, 0.0));
    ModelFile::classifier(m).save(&model).unwrap();
    let data = dir.path().join("x.csv");
    fs::write(&data, "x\n-1\n1\n").unwrap();
    let o = boostkit(&["predict", "--model", p(&model), "--data", p(&data)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text, "row,f,H,prob\n0,0,1,0.5\n1,0,1,0.5\n");
}

#[test]
fn dimension_mismatch_names_expected_d() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_separable(dir.path(), "d.csv", 30, 6);
    let model = dir.path().join("m.model");
    assert_eq!(code(&boostkit(&["train", "--data", p(&data), "--rounds", "2", "--out", p(&model)])), 0);
    let wide = dir.path().join("wide.csv");
    fs::write(&wide, "a,b,c\n1,2,3\n").unwrap();
    let o = boostkit(&["predict", "--model", p(&model), "--data", p(&wide)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("d = 2"), "{}", stderr(&o));
}

#[test]
fn eval_reports_perfect_model_and_bound_chain() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_separable(dir.path(), "d.csv", 80, 7);
    let model = dir.path().join("m.model");
    assert_eq!(code(&boostkit(&["train", "--data", p(&data), "--rounds", "5", "--out", p(&model)])), 0);
    let o = boostkit(&["eval", "--model", p(&model), "--data", p(&data)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("error_rate 0\n"), "{text}");
    let min_margin: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("min_margin "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(min_margin > 0.0);
    assert!(text.contains("chain_holds true"));
    let hist: usize = text
        .lines()
        .skip_while(|l| !l.starts_with("margin_histogram"))
        .skip(1)
        .take(20)
        .map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(hist, 80);
}

#[test]
fn model_without_rounds_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_separable(dir.path(), "d.csv", 10, 8);
    let model = dir.path().join("m.model");
    assert_eq!(code(&boostkit(&["train", "--data", p(&data), "--rounds", "1", "--out", p(&model)])), 0);
    let text = fs::read_to_string(&model).unwrap();
    let mut kept = Vec::new();
    for line in text.lines() {
        if line.starts_with("term ") {
            continue;
        }
        kept.push(if line.starts_with("terms ") { "terms 0" } else { line });
    }
    fs::write(&model, kept.join("\n") + "\n").unwrap();
    let o = boostkit(&["eval", "--model", p(&model), "--data", p(&data)]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn exit_codes_for_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "x,label\n1,1\nfoo,-1\n").unwrap();
    let out = dir.path().join("m.model");
    let o = boostkit(&["train", "--data", p(&bad), "--out", p(&out)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("row 2"));
    assert!(!out.exists());

    assert_eq!(code(&boostkit(&["train", "--nonsense"])), 1);
    let cfg = dir.path().join("c.cfg");
    fs::write(&cfg, "roundz = 3\n").unwrap();
    let o = boostkit(&["train", "--config", p(&cfg), "--data", p(&bad), "--out", p(&out)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("roundz"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_separable(dir.path(), "d.csv", 40, 9);
    let cfg = dir.path().join("c.cfg");
    fs::write(&cfg, "rounds = 7\nloss = logistic\n").unwrap();
    let out = dir.path().join("m.model");
    let o = boostkit(&["train", "--config", p(&cfg), "--rounds", "3", "--data", p(&data), "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("terms 3") && text.contains("loss logistic"));
}

fn write_regression(dir: &Path, m: usize) -> PathBuf {
    let mut rng = RngState::new(10);
    let mut s = String::from("x0,label\n");
    for _ in 0..m {
        let x = rng.unit_f64();
        s.push_str(&format!("{x},{}\n", 2.0 * x + rng.unit_f64()));
    }
    let path = dir.join("reg.csv");
    fs::write(&path, s).unwrap();
    path
}

#[test]
fn cde_train_sample_quantile() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_regression(dir.path(), 400);
    let model = dir.path().join("cde.model");
    let o = boostkit(&["cde", "train", "--data", p(&data), "--k", "5", "--rounds", "20", "--out", p(&model)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let s1 = dir.path().join("s1.csv");
    let s2 = dir.path().join("s2.csv");
    for s in [&s1, &s2] {
        let o = boostkit(&["cde", "sample", "--model", p(&model), "--data", p(&data), "--n-samples", "3", "--seed", "5", "--out", p(s)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    assert_eq!(fs::read(&s1).unwrap(), fs::read(&s2).unwrap());
    assert_eq!(read_csv_rows(&s1).len(), 1200);

    let q = |level: &str| -> Vec<f64> {
        let o = boostkit(&["cde", "quantile", "--model", p(&model), "--data", p(&data), "--level", level]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        String::from_utf8(o.stdout)
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect()
    };
    let (lo, mid, hi) = (q("0.25"), q("0.5"), q("0.75"));
    for i in 0..lo.len() {
        assert!(lo[i] <= mid[i] && mid[i] <= hi[i]);
    }
    assert_eq!(code(&boostkit(&["cde", "quantile", "--model", p(&model), "--data", p(&data), "--level", "1.5"])), 1);
}

#[test]
fn cde_sampling_matches_masses() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_regression(dir.path(), 300);
    let model_path = dir.path().join("cde.model");
    assert_eq!(code(&boostkit(&["cde", "train", "--data", p(&data), "--k", "4", "--rounds", "10", "--out", p(&model_path)])), 0);
    let one = dir.path().join("one.csv");
    fs::write(&one, "x0\n0.3\n").unwrap();
    let o = boostkit(&["cde", "sample", "--model", p(&model_path), "--data", p(&one), "--n-samples", "10000", "--seed", "1"]);
    assert_eq!(code(&o), 0);
    let SavedModel::Density(model) = ModelFile::<f64>::load(&model_path).unwrap().model else {
        panic!("expected a density model")
    };
    let bins = boostkit::cde::conditional_distribution(&model, &[0.3]).unwrap();
    let mut counts = vec![0usize; bins.masses().len()];
    let text = String::from_utf8(o.stdout).unwrap();
    for line in text.lines().skip(1) {
        let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        let j = bins.edges()[1..].iter().position(|&e| v <= e).unwrap_or(counts.len() - 1);
        counts[j] += 1;
    }
    for (c, m) in counts.iter().zip(bins.masses()) {
        assert!((*c as f64 / 10_000.0 - m).abs() <= 0.02);
    }
}

#[test]
fn active_curves_have_expected_shape() {
    let dir = tempfile::tempdir().unwrap();
    let pool = write_separable(dir.path(), "pool.csv", 300, 11);
    let test = write_separable(dir.path(), "test.csv", 100, 12);
    let out = dir.path().join("curve.csv");
    let args = [
        "active", "--data", p(&pool), "--test", p(&test), "--init", "10", "--batch", "5", "--iterations", "4",
        "--seeds", "3", "--rounds", "10", "--out", p(&out),
    ];
    let o = boostkit(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = read_csv_rows(&out);
    for strategy in ["uncertainty", "random"] {
        assert_eq!(rows.iter().filter(|r| r[0] == strategy).count(), 3 * 5);
    }
    for seed in ["0", "1", "2"] {
        let first: Vec<&Vec<String>> = rows.iter().filter(|r| r[1] == seed && r[2] == "0").collect();
        assert_eq!(first.len(), 2);
        assert_eq!(first[0][4], first[1][4]);
    }
    let again = dir.path().join("again.csv");
    let mut args2 = args;
    let last = args2.len() - 1;
    args2[last] = p(&again);
    assert_eq!(code(&boostkit(&args2)), 0);
    assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());
}
