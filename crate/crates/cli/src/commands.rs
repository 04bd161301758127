//! Subcommand implementations. Inputs are read and validated before the
//! output directory is touched.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use vesselpower_core::data::{split_dataset, DatasetSplit, DEFAULT_FRACTIONS};
use vesselpower_core::harness::{
    compute_metrics, evaluate_model, monotonicity_score, random_search, run_sweep, SearchSpace, SweepColumn,
    SweepScenario,
};
use vesselpower_core::model::{train_model, ModelSpec, PreparedData, Regressor};
use vesselpower_core::synth::{generate_synthetic, GeneratorConfig};
use vesselpower_core::{Error, Family, Mode, SeaTrialBaseline, TrainedModel};

use crate::cli::{Cli, Command, DataArgs, EvaluateArgs, FitBaselineArgs, GenDataArgs, HpoArgs, ModelArgs, SweepArgs, TrainArgs, VerifyArgs};
use crate::error::{CliError, Result};
use crate::formats::{read_baseline, read_json, write_baseline, write_json};
use crate::io::{self, SeaTrials, TrialCondition};
use crate::{presets, svg, verify};

/// Speeds of the generated sea-trial file, knots.
pub const SEA_TRIAL_SPEEDS: [f64; 10] = [8.0, 9.0, 10.0, 11.0, 12.0, 13.0, 14.0, 15.0, 16.0, 17.0];

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::GenData(a) => gen_data(a, cli.seed, &cli.out_dir),
        Command::FitBaseline(a) => fit_baseline(a, &cli.out_dir),
        Command::Train(a) => train(a, cli.seed, &cli.out_dir),
        Command::Evaluate(a) => evaluate(a, cli.seed, &cli.out_dir),
        Command::Hpo(a) => hpo(a, cli.seed, &cli.out_dir),
        Command::Sweep(a) => sweep(a, cli.seed, &cli.out_dir),
        Command::Verify(a) => verify_cmd(a),
    }
}

fn out_path(out_dir: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    Ok(out_dir.join(name))
}

fn gen_data(args: &GenDataArgs, seed: u64, out_dir: &Path) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => read_json::<GeneratorConfig>(path)?,
        None => GeneratorConfig::default(),
    };
    if let Some(n) = args.n {
        cfg.n_records = n;
    }
    cfg.validate()?;
    let ds = generate_synthetic(&cfg, seed)?;
    let split = split_dataset(ds.records.len(), DEFAULT_FRACTIONS, seed)?;
    let (ballast, laden) = cfg.sea_trial_points(&SEA_TRIAL_SPEEDS)?;
    let trials = SeaTrials {
        ballast: TrialCondition {
            draft_m: cfg.ballast.draft_m,
            points: ballast,
        },
        laden: TrialCondition {
            draft_m: cfg.laden.draft_m,
            points: laden,
        },
    };

    io::write_dataset(&out_path(out_dir, "dataset.csv")?, &ds.records)?;
    io::write_ground_truth(&out_path(out_dir, "ground_truth.csv")?, &ds.truth)?;
    write_json(&out_path(out_dir, "split.json")?, &split)?;
    io::write_sea_trials(&out_path(out_dir, "sea_trials.csv")?, &trials)?;
    write_json(&out_path(out_dir, "generator_config.json")?, &cfg)?;
    println!(
        "wrote {} records (train {}, validation {}, test {}) to {}",
        ds.records.len(),
        split.train.len(),
        split.validation.len(),
        split.test.len(),
        out_dir.display()
    );
    Ok(())
}

fn fit_baseline(args: &FitBaselineArgs, out_dir: &Path) -> Result<()> {
    let trials = io::read_sea_trials(&args.sea_trial)?;
    let b = trials.fit().map_err(|e| match e {
        CliError::Core(e) => CliError::format(&args.sea_trial, e),
        other => other,
    })?;
    let path = out_path(out_dir, "baseline.json")?;
    write_baseline(&path, &b)?;
    println!(
        "ballast: c = {}, n = {} at {} m\nladen:   c = {}, n = {} at {} m",
        b.ballast.c, b.ballast.n, b.ballast_draft, b.laden.c, b.laden.n, b.laden_draft
    );
    Ok(())
}

/// Reads the dataset and its split (from `--split` or derived from `seed`).
pub fn load_data(args: &DataArgs, seed: u64) -> Result<PreparedData> {
    let records = io::read_dataset(&args.data)?;
    let split: DatasetSplit = match &args.split {
        Some(p) => read_json(p)?,
        None => split_dataset(records.len(), DEFAULT_FRACTIONS, seed)?,
    };
    PreparedData::new(&records, split).map_err(|e| CliError::format(&args.data, e))
}

fn load_baseline(args: &DataArgs, mode: Mode) -> Result<Option<SeaTrialBaseline>> {
    match (&args.baseline, mode) {
        (Some(p), _) => Ok(Some(read_baseline(p)?)),
        (None, Mode::Hybrid) => Err(CliError::Usage("hybrid mode needs --baseline".into())),
        (None, Mode::Pure) => Ok(None),
    }
}

/// Combines the preset (if any) with explicit flags; flags win.
pub fn resolve_spec(m: &ModelArgs, seed: u64) -> Result<ModelSpec> {
    let preset = m.preset.as_deref().map(presets::load).transpose()?;
    let family = match (m.family.map(Family::from), &preset) {
        (Some(f), Some(p)) if f != p.family => {
            return Err(CliError::Usage(format!(
                "--family {} conflicts with the preset's {}",
                f.as_str(),
                p.family.as_str()
            )))
        }
        (Some(f), _) => f,
        (None, Some(p)) => p.family,
        (None, None) => return Err(CliError::Usage("either --family or --preset is required".into())),
    };
    let mode = match (m.mode.map(Mode::from), &preset) {
        (Some(md), Some(p)) if md != p.mode => {
            return Err(CliError::Usage(format!(
                "--mode {} conflicts with the preset's {}",
                md.as_str(),
                p.mode.as_str()
            )))
        }
        (Some(md), _) => md,
        (None, Some(p)) => p.mode,
        (None, None) => Mode::Pure,
    };

    let mut spec = ModelSpec::new(family, mode);
    spec.mlp.seed = seed;
    spec.train.seed = seed;
    if let Some(p) = &preset {
        p.apply(&mut spec);
    }
    if let Some(lr) = m.learning_rate {
        match family {
            Family::Gbt => spec.gbt.learning_rate = lr,
            Family::Nn | Family::Pinn => spec.train.learning_rate = lr,
        }
    }
    macro_rules! set {
        ($flag:ident => $($field:ident).+) => {
            if let Some(v) = m.$flag {
                spec.$($field).+ = v.into();
            }
        };
    }
    set!(max_depth => gbt.max_depth);
    set!(n_estimators => gbt.n_estimators);
    set!(l1_alpha => gbt.l1_alpha);
    set!(l2_lambda => gbt.l2_lambda);
    set!(min_samples_leaf => gbt.min_samples_leaf);
    set!(hidden_layers => mlp.hidden_layers);
    set!(neurons => mlp.neurons_per_layer);
    set!(activation => mlp.activation);
    set!(epochs => train.epochs);
    set!(batch_size => train.batch_size);
    set!(full_batch_limit => train.full_batch_limit);
    set!(lambda_phys => lambda_phys);
    if let Some(c) = m.c_prop {
        spec.c_prop = Some(c);
    }

    match family {
        Family::Gbt => spec.gbt.validate()?,
        Family::Nn | Family::Pinn => {
            spec.mlp.validate()?;
            if !(spec.train.learning_rate > 0.0 && spec.train.learning_rate.is_finite()) {
                return Err(CliError::Usage("--learning-rate must be positive".into()));
            }
            if spec.train.batch_size == 0 {
                return Err(CliError::Usage("--batch-size must be >= 1".into()));
            }
        }
    }
    if !(spec.lambda_phys >= 0.0 && spec.lambda_phys.is_finite()) {
        return Err(CliError::Usage("--lambda-phys must be finite and >= 0".into()));
    }
    Ok(spec)
}

pub fn model_file_name(family: Family, mode: Mode) -> String {
    format!("model_{}_{}.json", family.as_str(), mode.as_str())
}

fn train(args: &TrainArgs, seed: u64, out_dir: &Path) -> Result<()> {
    let spec = resolve_spec(&args.model, seed)?;
    let baseline = load_baseline(&args.data, spec.mode)?;
    let data = load_data(&args.data, seed)?;
    let out = train_model(&data, baseline.as_ref(), &spec)?;

    let path = out_path(out_dir, &model_file_name(spec.family, spec.mode))?;
    write_json(&path, &out.model)?;
    if !out.history.is_empty() {
        let loss = format!("loss_{}_{}.csv", spec.family.as_str(), spec.mode.as_str());
        io::write_loss_history(&out_path(out_dir, &loss)?, &out.history)?;
    }
    let test = split_metric(&out.model, baseline.as_ref(), &data, &data.split.test)?;
    println!(
        "trained {} {} model -> {} (test MAE {:.2} kW, RMSE {:.2} kW)",
        spec.family.as_str(),
        spec.mode.as_str(),
        path.display(),
        test.0,
        test.1
    );
    Ok(())
}

fn split_metric(
    model: &TrainedModel,
    baseline: Option<&SeaTrialBaseline>,
    data: &PreparedData,
    idx: &[usize],
) -> Result<(f64, f64)> {
    let predicted = idx
        .iter()
        .map(|&i| model.predict_power(baseline, &data.features[i]))
        .collect::<vesselpower_core::Result<Vec<_>>>()?;
    let actual: Vec<f64> = idx.iter().map(|&i| data.power[i]).collect();
    let m = compute_metrics(&predicted, &actual)?;
    Ok((m.mae, m.rmse))
}

fn read_model(path: &Path) -> Result<TrainedModel> {
    let model: TrainedModel = read_json(path)?;
    let input_dim = match &model.regressor {
        Regressor::Gbt(m) => m.n_features,
        Regressor::Mlp { network } => network.input_dim(),
    };
    if input_dim != vesselpower_core::FeatureVector::DIM || model.input_scaler.dim() != input_dim {
        return Err(CliError::format(path, "model does not take the five standard features"));
    }
    Ok(model)
}

fn evaluate(args: &EvaluateArgs, seed: u64, out_dir: &Path) -> Result<()> {
    let model = read_model(&args.model)?;
    let baseline = load_baseline(&args.data, model.mode)?;
    let data = load_data(&args.data, seed)?;
    let report = evaluate_model(&model, baseline.as_ref(), &data)?;
    write_json(&out_path(out_dir, "metrics.json")?, &report)?;
    println!("{} {}", report.family.as_str(), report.mode.as_str());
    for (name, e) in report.entries() {
        println!("{name:<10}  MAE {:>10.3} kW  RMSE {:>10.3} kW  n = {}", e.mae, e.rmse, e.n);
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct HpoBest {
    family: Family,
    mode: Mode,
    trial: usize,
    test_rmse_kw: f64,
    params: BTreeMap<String, f64>,
}

fn hpo(args: &HpoArgs, seed: u64, out_dir: &Path) -> Result<()> {
    let family = Family::from(args.family);
    let mode = Mode::from(args.mode);
    if args.trials < 1 {
        return Err(CliError::Usage("--trials must be >= 1".into()));
    }
    let baseline = load_baseline(&args.data, mode)?;
    let data = load_data(&args.data, seed)?;
    let space = match family {
        Family::Gbt => SearchSpace::gbt(),
        Family::Nn | Family::Pinn => SearchSpace::network(),
    };
    let mut base = ModelSpec::new(family, mode);
    base.mlp.seed = seed;
    base.train.seed = seed;
    base.train.epochs = args.epochs;

    let outcome = random_search(&space, args.trials, seed, |values| {
        let mut spec = base.clone();
        match family {
            Family::Gbt => spec.gbt = space.apply_gbt(values, &base.gbt)?,
            Family::Nn | Family::Pinn => {
                (spec.mlp, spec.train) = space.apply_network(values, (&base.mlp, &base.train))?;
            }
        }
        let model = train_model(&data, baseline.as_ref(), &spec)?.model;
        let predicted = data
            .split
            .test
            .iter()
            .map(|&i| model.predict_power(baseline.as_ref(), &data.features[i]))
            .collect::<vesselpower_core::Result<Vec<_>>>()?;
        let actual: Vec<f64> = data.split.test.iter().map(|&i| data.power[i]).collect();
        Ok(compute_metrics(&predicted, &actual)?.rmse)
    })?;

    io::write_hpo_log(&out_path(out_dir, "hpo_log.csv")?, space.names(), &outcome.trials)?;
    let best = outcome.best_trial();
    let summary = HpoBest {
        family,
        mode,
        trial: best.index,
        test_rmse_kw: best.score,
        params: space.names().map(str::to_string).zip(best.values.iter().copied()).collect(),
    };
    write_json(&out_path(out_dir, "hpo_best.json")?, &summary)?;
    println!(
        "best of {} trials: #{} with test RMSE {:.3} kW",
        outcome.trials.len(),
        best.index,
        best.score
    );
    Ok(())
}

fn sweep(args: &SweepArgs, seed: u64, out_dir: &Path) -> Result<()> {
    let baseline = load_baseline(&args.data, Mode::Hybrid)?.ok_or_else(|| CliError::Usage("sweep needs --baseline".into()))?;
    let pure = read_model(&args.pure)?;
    let hybrid = read_model(&args.hybrid)?;
    let data = load_data(&args.data, seed)?;
    let scenario = SweepScenario {
        draft: args.draft,
        wind_speed: args.wind_speed,
        trim: args.trim,
        speed_step: args.step,
        ..SweepScenario::default()
    };
    let report = run_sweep(&pure, &hybrid, &baseline, &scenario, &data).map_err(|e| match e {
        Error::ModeMismatch(m) => CliError::Usage(m),
        other => other.into(),
    })?;
    io::write_sweep(&out_path(out_dir, "sweep.csv")?, &report)?;
    let svg_path = out_path(out_dir, "sweep.svg")?;
    fs::write(&svg_path, svg::render_sweep(&report, &data)).map_err(|e| CliError::io(&svg_path, e))?;
    println!(
        "{} grid points; monotonicity pure {:.3}, hybrid {:.3}",
        report.rows.len(),
        monotonicity_score(&report, SweepColumn::Pure)?,
        monotonicity_score(&report, SweepColumn::Hybrid)?
    );
    Ok(())
}

fn verify_cmd(args: &VerifyArgs) -> Result<()> {
    let results = verify::run_checks(args.baseline.as_deref());
    print!("{}", verify::render_table(&results));
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(CliError::VerifyFailed {
            failed,
            total: results.len(),
        });
    }
    Ok(())
}
