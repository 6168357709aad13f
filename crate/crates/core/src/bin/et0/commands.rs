//! Subcommand implementations.
//!
//! Every command that writes files also writes a manifest recording the
//! command, config digest, seeds, and input/output digests. Result files
//! are written by a single collector in a fixed order, so re-running a
//! command with identical inputs and seeds reproduces them byte for byte
//! (wall-clock timing columns excepted).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use et0lab::experiment::{
    self, build_model_grid, results, GridConfig, LabeledDataset, ModelFamily, ModelGridEntry,
};
use et0lab::manifest::{digest_file, RunManifest};
use et0lab::meteo::{self, ColumnMap, StationMeta};
use et0lab::nn::{ActivationKind, Hyperparams, NetworkSpec, OptimizerKind};
use et0lab::pm::{self, GammaMode, PmOptions, RadiationInput};

use crate::{
    CliError, ComputeArgs, CvArgs, GridArgs, HyperFlags, NetFlags, PmFlags, ReportArgs,
    ScatterArgs, SynthArgs, TrainArgs,
};

type Result<T> = std::result::Result<T, CliError>;

impl PmFlags {
    fn options(&self) -> PmOptions {
        PmOptions {
            gamma_mode: if self.gamma == "fixed" {
                GammaMode::Fixed
            } else {
                GammaMode::AltitudeDerived
            },
            soil_heat_flux: self.g,
            albedo: self.albedo,
            radiation: if self.radiation == "net" {
                RadiationInput::NetDirect
            } else {
                RadiationInput::SolarShortwave
            },
        }
    }

    fn describe(&self) -> String {
        format!(
            "gamma={} g={} albedo={} radiation={}",
            self.gamma, self.g, self.albedo, self.radiation
        )
    }
}

impl NetFlags {
    fn spec(&self, seed: u64) -> Result<NetworkSpec> {
        let widths = parse_usize_list(&self.hidden)
            .ok_or_else(|| CliError::usage(format!("cannot parse --hidden {:?}", self.hidden)))?;
        let activation = ActivationKind::parse(&self.activation)
            .ok_or_else(|| CliError::usage(format!("unknown activation {:?}", self.activation)))?;
        let mut spec = NetworkSpec::mlp(experiment::INPUT_WIDTH, &widths, activation, seed);
        if let Some(raw) = &self.dropout {
            let rates = parse_f64_list(raw)
                .ok_or_else(|| CliError::usage(format!("cannot parse --dropout {raw:?}")))?;
            spec = spec.with_dropout(&rates);
        }
        spec.validate()?;
        Ok(spec)
    }
}

impl HyperFlags {
    fn hyperparams(&self) -> Hyperparams {
        Hyperparams {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            optimizer: if self.optimizer == "sgd" {
                OptimizerKind::Sgd
            } else {
                OptimizerKind::default()
            },
            loss: Default::default(),
        }
    }
}

fn parse_usize_list(raw: &str) -> Option<Vec<usize>> {
    raw.split(',').map(|p| p.trim().parse::<usize>().ok()).collect()
}

fn parse_f64_list(raw: &str) -> Option<Vec<f64>> {
    raw.split(',').map(|p| p.trim().parse::<f64>().ok()).collect()
}

fn load_station(path: &Path) -> Result<StationMeta> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(StationMeta::from_toml(&text)?)
}

fn load_records(path: &Path, strict: bool) -> Result<meteo::ParseOutcome> {
    let file = fs::File::open(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let reader = std::io::BufReader::new(file);
    let outcome = if strict {
        meteo::parse_csv_strict(reader, &ColumnMap::default())?
    } else {
        meteo::parse_csv(reader, &ColumnMap::default())?
    };
    Ok(outcome)
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    Ok(())
}

fn manifest_path_for(output: &Path) -> PathBuf {
    let stem = output.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    output.with_file_name(format!("{stem}.manifest.json"))
}

pub fn compute(args: ComputeArgs) -> Result<()> {
    let station = load_station(&args.station)?;
    let outcome = load_records(&args.input, args.strict)?;
    let options = args.pm.options();

    let mut rows = Vec::with_capacity(outcome.records.len());
    for record in &outcome.records {
        let value = pm::et0_penman_monteith(record, &station, &options)?;
        rows.push((record.date, value.0));
    }

    ensure_parent(&args.output)?;
    let mut out = String::from("date,et0_mm_day\n");
    for (date, value) in &rows {
        out.push_str(&format!("{},{}\n", date.format("%Y-%m-%d"), value));
    }
    fs::write(&args.output, out)?;

    let flags_path = args
        .flags_output
        .clone()
        .unwrap_or_else(|| args.output.with_extension("flags.csv"));
    let mut flags_buf = Vec::new();
    meteo::write_flags_csv(&mut flags_buf, &outcome.flags).map_err(CliError::from)?;
    fs::write(&flags_path, flags_buf)?;

    let mut manifest = RunManifest::new(
        format!(
            "compute --input {} --station {} {} strict={}",
            args.input.display(),
            args.station.display(),
            args.pm.describe(),
            args.strict
        ),
        &args.pm.describe(),
        vec![],
        vec![digest_file(&args.input)?, digest_file(&args.station)?],
    );
    manifest.add_output(&args.output)?;
    manifest.add_output(&flags_path)?;
    manifest.save(&manifest_path_for(&args.output))?;

    println!(
        "computed {} ET0 values ({} rows rejected, {} flagged)",
        rows.len(),
        outcome.rejected_rows(),
        outcome.flags.len() - outcome.rejected_rows()
    );
    Ok(())
}

pub fn synth(args: SynthArgs) -> Result<()> {
    let (meta, profile) = meteo::stations::by_name(&args.profile)
        .ok_or_else(|| CliError::usage(format!("unknown profile {:?}", args.profile)))?;
    let records = meteo::synthesize_dataset(&profile, args.days, args.seed)?;

    ensure_parent(&args.output)?;
    let mut buf = Vec::new();
    meteo::write_csv(&mut buf, &records).map_err(CliError::from)?;
    fs::write(&args.output, buf)?;

    let mut outputs = vec![args.output.clone()];
    if let Some(station_path) = &args.station_output {
        ensure_parent(station_path)?;
        fs::write(station_path, meta.to_toml())?;
        outputs.push(station_path.clone());
    }

    let mut manifest = RunManifest::new(
        format!("synth --profile {} --days {} --seed {}", args.profile, args.days, args.seed),
        &format!("profile={}", args.profile),
        vec![args.seed],
        vec![],
    );
    for path in &outputs {
        manifest.add_output(path)?;
    }
    manifest.save(&manifest_path_for(&args.output))?;

    println!("wrote {} synthetic days for {}", records.len(), meta.name);
    Ok(())
}

fn labeled_dataset(
    input: &Path,
    station_path: &Path,
    pm_flags: &PmFlags,
) -> Result<(LabeledDataset, StationMeta, usize)> {
    let station = load_station(station_path)?;
    let outcome = load_records(input, false)?;
    let data = experiment::label_records(&outcome.records, &station, &pm_flags.options())?;
    Ok((data, station, outcome.rejected_rows()))
}

pub fn train(args: TrainArgs) -> Result<()> {
    let (data, _, rejected) = labeled_dataset(&args.input, &args.station, &args.pm)?;
    if rejected > 0 {
        eprintln!("note: {rejected} invalid rows skipped");
    }
    let spec = args.net.spec(args.seed)?;
    let hp = args.hyper.hyperparams();
    let model = et0lab::nn::train(&spec, &data.features, &data.targets, &hp)?;

    ensure_parent(&args.output)?;
    model.save(&args.output)?;

    let mut manifest = RunManifest::new(
        format!(
            "train --hidden {} --activation {} --seed {} epochs={} {}",
            args.net.hidden,
            args.net.activation,
            args.seed,
            hp.epochs,
            args.pm.describe()
        ),
        &format!("{spec:?} {hp:?}"),
        vec![args.seed],
        vec![digest_file(&args.input)?, digest_file(&args.station)?],
    );
    manifest.add_output(&args.output)?;
    manifest.save(&manifest_path_for(&args.output))?;

    let final_loss = model.training_loss_trace.last().copied().unwrap_or(f64::NAN);
    println!(
        "trained {} for {} epochs, final training MSE {final_loss:.6}",
        spec.shape_string(),
        hp.epochs
    );
    Ok(())
}

struct RunOutputs {
    per_fold: PathBuf,
    aggregate: PathBuf,
    errors: Option<PathBuf>,
    predictions: Option<PathBuf>,
}

fn write_run_outputs(
    dir: &Path,
    run_results: &[experiment::ExperimentResult],
    save_predictions: bool,
) -> Result<RunOutputs> {
    fs::create_dir_all(dir)?;

    let per_fold = dir.join("per_fold.csv");
    let mut buf = Vec::new();
    results::write_per_fold_csv(&mut buf, run_results)?;
    fs::write(&per_fold, buf)?;

    let aggregate = dir.join("aggregate.csv");
    let mut buf = Vec::new();
    results::write_aggregate_csv(&mut buf, run_results)?;
    fs::write(&aggregate, buf)?;

    let any_errors = run_results.iter().any(|r| r.folds.iter().any(|f| f.error.is_some()));
    let errors = if any_errors {
        let path = dir.join("errors.csv");
        let mut buf = Vec::new();
        results::write_errors_csv(&mut buf, run_results)?;
        fs::write(&path, buf)?;
        Some(path)
    } else {
        None
    };

    let predictions = if save_predictions {
        let path = dir.join("predictions.csv");
        let mut buf = Vec::new();
        results::write_predictions_csv(&mut buf, run_results)?;
        fs::write(&path, buf)?;
        Some(path)
    } else {
        None
    };

    Ok(RunOutputs { per_fold, aggregate, errors, predictions })
}

fn finish_run_manifest(
    dir: &Path,
    mut manifest: RunManifest,
    outputs: &RunOutputs,
) -> Result<()> {
    manifest.add_output(&outputs.per_fold)?;
    manifest.add_output(&outputs.aggregate)?;
    if let Some(path) = &outputs.errors {
        manifest.add_output(path)?;
    }
    if let Some(path) = &outputs.predictions {
        manifest.add_output(path)?;
    }
    manifest.save(&dir.join("manifest.json"))?;
    Ok(())
}

pub fn cv(args: CvArgs) -> Result<()> {
    let (data, station, _) = labeled_dataset(&args.input, &args.station, &args.pm)?;
    let spec = args.net.spec(0)?;
    let hp = args.hyper.hyperparams();

    let plan = if args.fold_mode == "chronological" {
        experiment::make_folds_chronological(data.len(), args.folds)?
    } else {
        experiment::make_folds(
            data.len(),
            args.folds,
            et0lab::seed::derive(args.seed, &["folds", &station.name]),
        )?
    };

    let entry = ModelGridEntry {
        id: format!("{}-{}", args.net.activation, spec.shape_string()),
        family: ModelFamily::PDnnSelu,
        spec,
        provenance: "command line",
    };
    let opts = experiment::CvOptions {
        base_seed: args.seed,
        station: station.name.clone(),
        collect_predictions: args.save_predictions,
    };
    let mut result = experiment::run_cv(&entry, &data, &plan, &hp, &opts)?;
    // Ad-hoc runs are named by their id, not by a grid family.
    result.model_name = entry.id.clone();

    let outputs = write_run_outputs(&args.output_dir, std::slice::from_ref(&result), args.save_predictions)?;
    let manifest = RunManifest::new(
        format!(
            "cv --hidden {} --activation {} --folds {} --fold-mode {} --seed {} epochs={} {}",
            args.net.hidden,
            args.net.activation,
            args.folds,
            args.fold_mode,
            args.seed,
            hp.epochs,
            args.pm.describe()
        ),
        &format!("{:?} {hp:?}", entry.spec),
        vec![args.seed],
        vec![digest_file(&args.input)?, digest_file(&args.station)?],
    );
    finish_run_manifest(&args.output_dir, manifest, &outputs)?;

    let mean = result.mean.expect("run_cv errors when all folds fail");
    println!(
        "{} at {}: mean R2 {:.4}, RMSE {:.4}, MAE {:.4} over {} folds",
        result.entry_id, result.station, mean.r2, mean.rmse, mean.mae_standard, args.folds
    );
    Ok(())
}

fn grid_station_data(
    args: &GridArgs,
    config: &GridConfig,
) -> Result<Vec<(String, LabeledDataset)>> {
    if args.synthetic {
        let mut datasets = Vec::new();
        for (meta, profile) in meteo::stations::all() {
            let seed = et0lab::seed::derive(config.seed, &["synth", &meta.name]);
            let records = meteo::synthesize_dataset(&profile, args.days, seed)?;
            let data = experiment::label_records(&records, &meta, &args.pm.options())?;
            datasets.push((meta.name.clone(), data));
        }
        return Ok(datasets);
    }
    if args.data.is_empty() {
        return Err(CliError::usage(
            "no station data: pass --data NAME=CSV:CFG (repeatable) or --synthetic",
        ));
    }
    let mut datasets = Vec::new();
    for spec in &args.data {
        let (name, paths) = spec
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("bad --data value {spec:?}")))?;
        let (csv_path, cfg_path) = paths
            .split_once(':')
            .ok_or_else(|| CliError::usage(format!("bad --data value {spec:?}")))?;
        let (data, _, _) =
            labeled_dataset(Path::new(csv_path), Path::new(cfg_path), &args.pm)?;
        datasets.push((name.to_string(), data));
    }
    Ok(datasets)
}

pub fn grid(args: GridArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
            GridConfig::from_toml(&text)?
        }
        None => GridConfig::default(),
    };
    if let Some(families) = &args.families {
        config.families = families.split(',').map(|f| f.trim().to_string()).collect();
    }
    if args.no_dropout_grid {
        config.dnn_dropout_rates = vec![0.0];
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(epochs) = args.epochs {
        config.hyperparams.epochs = epochs;
    }

    let entries = build_model_grid(&config)?;

    if args.dry_run {
        let station_count = if args.synthetic { 4 } else { args.data.len() };
        println!("{} specs, {} runs", entries.len(), entries.len() * station_count * args.folds);
        return Ok(());
    }

    let output_dir = args
        .output_dir
        .clone()
        .ok_or_else(|| CliError::usage("--output-dir is required unless --dry-run"))?;

    let datasets = grid_station_data(&args, &config)?;
    let stations = experiment::plan_stations(datasets, args.folds, config.seed)?;

    let outcomes = experiment::run_grid(
        &entries,
        &stations,
        &config.hyperparams,
        config.seed,
        args.save_predictions,
    );

    let mut ok = Vec::new();
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(result) => ok.push(result),
            Err(e) => failures.push(e.to_string()),
        }
    }
    if ok.is_empty() {
        return Err(CliError::training(format!(
            "all {} grid tasks failed; first error: {}",
            failures.len(),
            failures.first().cloned().unwrap_or_default()
        )));
    }

    let outputs = write_run_outputs(&output_dir, &ok, args.save_predictions)?;
    if !failures.is_empty() {
        let path = output_dir.join("failed_tasks.txt");
        fs::write(&path, failures.join("\n"))?;
        eprintln!("warning: {} grid tasks failed entirely; see {}", failures.len(), path.display());
    }

    let mut inputs = Vec::new();
    if let Some(path) = &args.config {
        inputs.push(digest_file(path)?);
    }
    for spec in &args.data {
        if let Some((_, paths)) = spec.split_once('=') {
            if let Some((csv_path, cfg_path)) = paths.split_once(':') {
                inputs.push(digest_file(Path::new(csv_path))?);
                inputs.push(digest_file(Path::new(cfg_path))?);
            }
        }
    }
    let manifest = RunManifest::new(
        format!(
            "grid synthetic={} days={} folds={} families={:?} no_dropout_grid={} epochs={} {}",
            args.synthetic,
            args.days,
            args.folds,
            config.families,
            args.no_dropout_grid,
            config.hyperparams.epochs,
            args.pm.describe()
        ),
        &format!("{config:?}"),
        vec![config.seed],
        inputs,
    );
    finish_run_manifest(&output_dir, manifest, &outputs)?;

    println!(
        "grid complete: {} entries × {} stations × {} folds, {} aggregate rows",
        entries.len(),
        stations.len(),
        args.folds,
        ok.len()
    );
    Ok(())
}

pub fn report(args: ReportArgs) -> Result<()> {
    let by = results::RankMetric::parse(&args.by)
        .ok_or_else(|| CliError::usage(format!("unknown ranking metric {:?}", args.by)))?;
    let file = fs::File::open(&args.results)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", args.results.display())))?;
    let rows = results::read_aggregate_csv(std::io::BufReader::new(file))?;
    if rows.is_empty() {
        return Err(CliError::data("results file has no rows"));
    }
    let ranked = results::rank_results(&rows, by, args.top);

    ensure_parent(&args.output)?;
    let mut buf = Vec::new();
    results::write_report_csv(&mut buf, &ranked)?;
    fs::write(&args.output, &buf)?;

    let mut manifest = RunManifest::new(
        format!("report --by {} --top {}", args.by, args.top),
        &format!("by={} top={}", args.by, args.top),
        vec![],
        vec![digest_file(&args.results)?],
    );
    manifest.add_output(&args.output)?;
    manifest.save(&manifest_path_for(&args.output))?;

    let mut stdout = std::io::stdout().lock();
    stdout.write_all(&buf)?;
    Ok(())
}

pub fn scatter(args: ScatterArgs) -> Result<()> {
    if !args.predictions.exists() {
        return Err(CliError::usage(format!(
            "missing predictions file {} (run cv/grid with --save-predictions)",
            args.predictions.display()
        )));
    }
    let file = fs::File::open(&args.predictions)?;
    let rows = results::read_predictions_csv(
        std::io::BufReader::new(file),
        args.station.as_deref(),
        args.model.as_deref(),
    )?;
    if rows.is_empty() {
        return Err(CliError::data("no predictions match the requested filters"));
    }

    ensure_parent(&args.output)?;
    let mut buf = Vec::new();
    results::write_scatter_tsv(&mut buf, &rows)?;
    fs::write(&args.output, buf)?;

    let mut manifest = RunManifest::new(
        format!(
            "scatter station={:?} model={:?}",
            args.station.as_deref().unwrap_or("*"),
            args.model.as_deref().unwrap_or("*")
        ),
        "scatter",
        vec![],
        vec![digest_file(&args.predictions)?],
    );
    manifest.add_output(&args.output)?;
    manifest.save(&manifest_path_for(&args.output))?;

    println!("wrote {} scatter rows", rows.len());
    Ok(())
}
