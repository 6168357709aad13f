//! End-to-end tests of the `et0` binary: file formats, exit codes, and
//! reproducibility of outputs.

use std::path::Path;
use std::process::{Command, Output};

fn et0(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_et0"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_ok(output: &Output) {
    assert!(
        output.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).to_string()
}

fn write_station(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("station.toml");
    std::fs::write(
        &path,
        "name = \"Aksaray\"\ncode = 2\nlongitude = 34.0\nlatitude = 38.37\naltitude = 970.0\n",
    )
    .unwrap();
    path
}

#[test]
fn synth_is_reproducible_and_parseable() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        assert_ok(&et0(
            dir.path(),
            &[
                "synth", "--profile", "aksaray", "--days", "120", "--seed", "11", "--output", name,
            ],
        ));
        std::fs::read(dir.path().join(name)).unwrap()
    };
    let a = run("a.csv");
    let b = run("b.csv");
    assert_eq!(a, b, "same seed must produce identical files");
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 121); // header + 120 days
    assert!(text.starts_with("date,tmax,tmin,rs,rhmax,rhmin,u2\n"));
    // Manifest sits next to the output.
    assert!(dir.path().join("a.manifest.json").exists());
}

#[test]
fn compute_row_count_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let station = write_station(dir.path());
    let mut csv = String::from("date,tmax,tmin,rs,rhmax,rhmin,u2\n");
    for day in 1..=10 {
        csv.push_str(&format!("2010-06-{day:02},30.0,18.0,22.5,80,35,1.5\n"));
    }
    std::fs::write(dir.path().join("ok.csv"), &csv).unwrap();
    let out = et0(
        dir.path(),
        &[
            "compute",
            "--input",
            "ok.csv",
            "--station",
            station.to_str().unwrap(),
            "--output",
            "et0.csv",
        ],
    );
    assert_ok(&out);
    let result = std::fs::read_to_string(dir.path().join("et0.csv")).unwrap();
    assert_eq!(result.lines().count(), 11); // header + 10 rows
    assert!(result.starts_with("date,et0_mm_day\n"));
}

#[test]
fn compute_lenient_skips_and_strict_fails() {
    let dir = tempfile::tempdir().unwrap();
    let station = write_station(dir.path());
    let mut csv = String::from("date,tmax,tmin,rs,rhmax,rhmin,u2\n");
    for day in 1..=9 {
        csv.push_str(&format!("2010-06-{day:02},30.0,18.0,22.5,80,35,1.5\n"));
    }
    csv.push_str("2010-06-10,20.0,25.0,22.5,80,35,1.5\n"); // tmin > tmax
    std::fs::write(dir.path().join("bad.csv"), &csv).unwrap();

    let lenient = et0(
        dir.path(),
        &[
            "compute",
            "--input",
            "bad.csv",
            "--station",
            station.to_str().unwrap(),
            "--output",
            "lenient.csv",
        ],
    );
    assert_ok(&lenient);
    let rows = std::fs::read_to_string(dir.path().join("lenient.csv")).unwrap();
    assert_eq!(rows.lines().count(), 10); // header + 9 surviving rows
    let flags = std::fs::read_to_string(dir.path().join("lenient.flags.csv")).unwrap();
    assert!(flags.contains("Rejected"), "flag sidecar records the rejection: {flags}");

    let strict = et0(
        dir.path(),
        &[
            "compute",
            "--input",
            "bad.csv",
            "--station",
            station.to_str().unwrap(),
            "--output",
            "strict.csv",
            "--strict",
        ],
    );
    assert_eq!(strict.status.code(), Some(3), "strict mode exits 3 on invariant violations");
}

#[test]
fn compute_schema_error_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let station = write_station(dir.path());
    std::fs::write(dir.path().join("noschema.csv"), "date,tmax,tmin,rs,rhmax,u2\n").unwrap();
    let out = et0(
        dir.path(),
        &[
            "compute",
            "--input",
            "noschema.csv",
            "--station",
            station.to_str().unwrap(),
            "--output",
            "x.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("x.csv").exists());
}

#[test]
fn grid_dry_run_counts() {
    let dir = tempfile::tempdir().unwrap();
    let full = et0(dir.path(), &["grid", "--synthetic", "--dry-run"]);
    assert_ok(&full);
    assert!(
        stdout(&full).contains("678 specs, 13560 runs"),
        "got: {}",
        stdout(&full)
    );

    let single = et0(
        dir.path(),
        &["grid", "--synthetic", "--dry-run", "--families", "P-DNN-SeLU", "--no-dropout-grid"],
    );
    assert_ok(&single);
    assert!(stdout(&single).contains("1 specs, 20 runs"), "got: {}", stdout(&single));

    // Dry runs leave the directory untouched.
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn grid_small_run_outputs_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("grid.toml"),
        "families = [\"L-ANN\"]\nann_width_range = [1, 2]\nseed = 5\n\n[hyperparams]\nepochs = 1\nbatch_size = 16\nlearning_rate = 0.001\nloss = \"Mse\"\n\n[hyperparams.optimizer]\nAdam = { beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8 }\n",
    )
    .unwrap();
    let run = |out: &str| {
        assert_ok(&et0(
            dir.path(),
            &[
                "grid",
                "--config",
                "grid.toml",
                "--synthetic",
                "--days",
                "80",
                "--folds",
                "2",
                "--output-dir",
                out,
                "--save-predictions",
            ],
        ));
    };
    run("out1");
    run("out2");

    let aggregate1 = std::fs::read(dir.path().join("out1/aggregate.csv")).unwrap();
    let aggregate2 = std::fs::read(dir.path().join("out2/aggregate.csv")).unwrap();
    assert_eq!(aggregate1, aggregate2, "aggregate CSVs must be byte-identical");

    let text = String::from_utf8(aggregate1).unwrap();
    // 2 widths × 4 stations = 8 aggregate rows.
    assert_eq!(text.lines().count(), 9, "{text}");
    assert!(text.contains("L-ANN-w01,L-ANN (1),Adana"));

    let per_fold = std::fs::read_to_string(dir.path().join("out1/per_fold.csv")).unwrap();
    assert_eq!(per_fold.lines().count(), 17); // 8 pairs × 2 folds + header

    // Manifest records every output with digests.
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out1/manifest.json")).unwrap())
            .unwrap();
    let outputs = manifest["outputs"].as_array().unwrap();
    assert!(outputs.len() >= 3);
    assert_eq!(manifest["seeds"][0], 5);
}

#[test]
fn cv_scatter_report_chain_with_slope() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&et0(
        dir.path(),
        &[
            "synth", "--profile", "aksaray", "--days", "1200", "--seed", "3", "--output", "w.csv",
            "--station-output", "s.toml",
        ],
    ));
    assert_ok(&et0(
        dir.path(),
        &[
            "cv",
            "--input",
            "w.csv",
            "--station",
            "s.toml",
            "--hidden",
            "60,90,60",
            "--activation",
            "selu",
            "--folds",
            "3",
            "--seed",
            "9",
            "--epochs",
            "30",
            "--output-dir",
            "run",
            "--save-predictions",
        ],
    ));
    assert_ok(&et0(
        dir.path(),
        &["scatter", "--predictions", "run/predictions.csv", "--output", "scatter.tsv"],
    ));

    let scatter = std::fs::read_to_string(dir.path().join("scatter.tsv")).unwrap();
    let mut lines = scatter.lines();
    assert_eq!(lines.next().unwrap(), "station\tmodel\tobserved_et0\tpredicted_et0");
    let points: Vec<(f64, f64)> = lines
        .map(|line| {
            let parts: Vec<&str> = line.split('\t').collect();
            (parts[2].parse().unwrap(), parts[3].parse().unwrap())
        })
        .collect();
    assert_eq!(points.len(), 1200, "one scatter row per held-out record");

    // Least-squares slope of predicted on observed should hug the 1:1 line.
    let n = points.len() as f64;
    let mx = points.iter().map(|(x, _)| x).sum::<f64>() / n;
    let my = points.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    assert!(
        (0.95..=1.05).contains(&slope),
        "least-squares slope {slope} outside [0.95, 1.05]"
    );

    // Ranking the aggregate file reproduces the report layout.
    let report = et0(
        dir.path(),
        &[
            "report",
            "--results",
            "run/aggregate.csv",
            "--by",
            "r2",
            "--top",
            "5",
            "--output",
            "report.csv",
        ],
    );
    assert_ok(&report);
    let report_text = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(report_text.starts_with("order,model_name,station_name,r2,rmse,mae\n"));
    assert!(report_text.lines().nth(1).unwrap().starts_with("01,"));
}

#[test]
fn train_writes_loadable_model() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&et0(
        dir.path(),
        &[
            "synth", "--profile", "isparta", "--days", "200", "--seed", "6", "--output", "w.csv",
            "--station-output", "s.toml",
        ],
    ));
    assert_ok(&et0(
        dir.path(),
        &[
            "train",
            "--input",
            "w.csv",
            "--station",
            "s.toml",
            "--hidden",
            "12",
            "--activation",
            "relu",
            "--epochs",
            "5",
            "--seed",
            "21",
            "--output",
            "model.json",
        ],
    ));
    let model = et0lab::nn::TrainedModel::load(&dir.path().join("model.json")).unwrap();
    assert_eq!(model.spec.shape_string(), "6-12-1");
    assert_eq!(model.training_loss_trace.len(), 5);
    // The model predicts a finite value for a plausible feature row.
    let features = et0lab::nn::Matrix::from_rows(&[vec![25.0, 12.0, 20.0, 70.0, 35.0, 1.5]]);
    let preds = model.predict(&features).unwrap();
    assert!(preds[0].is_finite());
    assert!(dir.path().join("model.manifest.json").exists());
}

#[test]
fn grid_accepts_real_data_flag() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&et0(
        dir.path(),
        &[
            "synth", "--profile", "nigde", "--days", "140", "--seed", "2", "--output", "w.csv",
            "--station-output", "s.toml",
        ],
    ));
    assert_ok(&et0(
        dir.path(),
        &[
            "grid",
            "--families",
            "L-ANN",
            "--seed",
            "4",
            "--data",
            "Nigde=w.csv:s.toml",
            "--folds",
            "2",
            "--epochs",
            "1",
            "--output-dir",
            "out",
        ],
    ));
    let aggregate = std::fs::read_to_string(dir.path().join("out/aggregate.csv")).unwrap();
    // 30 widths × 1 station.
    assert_eq!(aggregate.lines().count(), 31);
    assert!(aggregate.contains(",Nigde,"));
}

#[test]
fn scatter_without_predictions_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = et0(
        dir.path(),
        &["scatter", "--predictions", "missing.csv", "--output", "s.tsv"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn grid_without_data_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = et0(dir.path(), &["grid", "--output-dir", "out", "--folds", "2"]);
    assert_eq!(out.status.code(), Some(2));
}
