use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use tvinesynth::cvine::{fit_cvine_with, CVineModel, FitOptions};
use tvinesynth::datagen::{benchmark_spec, simulate};
use tvinesynth::evaluation::{
    fidelity, spread, sweep, utility_trtr, utility_tstr, ForestConfig, SweepConfig, SweepPrivacy,
};
use tvinesynth::numerics::RngStream;
use tvinesynth::ordering::{find_order, validate_order, Association, OrderSpec};
use tvinesynth::privacy::{run_aia, run_mia, select_targets, AiaConfig, AiaReport, MiaConfig, MiaReport, TargetMode};
use tvinesynth::synth::CVineSynthesizer;
use tvinesynth::Dataset;

use crate::args::*;
use crate::error::usage;
use crate::io::*;
use crate::manifest::{Clock, RunManifest};
use crate::plot::{privacy_utility_svg, Competitor};

/// Saved covariate order, by column name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderFile {
    /// Covariates in vine order: first entry is the least connected.
    pub order: Vec<String>,
    pub sensitive: Vec<String>,
    pub associated: Vec<String>,
    pub threshold: f64,
    pub association: Association,
    /// Highest truncation level that keeps the sensitive block apart.
    pub safe_truncation_bound: usize,
}

/// Attack and classifier settings; every table is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttackFile {
    pub aia: AiaConfig,
    pub mia: MiaConfig,
    pub forest: ForestConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelAia {
    pub truncation: usize,
    pub report: AiaReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelMia {
    pub truncation: usize,
    pub reports: Vec<MiaReport>,
    pub pg_median: f64,
}

#[derive(Debug, Serialize)]
struct AiaRow {
    truncation: usize,
    iteration: usize,
    set: usize,
    mab: Option<f64>,
    max_abs_beta: Option<f64>,
}

#[derive(Debug, Serialize)]
struct MiaRow {
    truncation: usize,
    target: usize,
    p_guess_in: f64,
    p_guess_out: f64,
    privacy_gain: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct UtilityReport {
    pub trtr: f64,
    pub tstr: Vec<f64>,
    pub tstr_median: f64,
}

// stream labels shared by `attack` and `sweep`, so a single-level sweep
// reproduces the standalone attack
const TARGET_STREAM: u64 = 4;
const AIA_STREAM: u64 = 2;
const MIA_STREAM: u64 = 3;

fn prepare_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn read_config(path: Option<&Path>) -> Result<AttackFile> {
    let Some(p) = path else {
        return Ok(AttackFile::default());
    };
    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
    if p.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))
    } else {
        toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))
    }
}

fn column(data: &Dataset, name: &str) -> Result<usize> {
    data.column_index(name)
        .ok_or_else(|| usage(format!("no covariate named `{name}`; have {:?}", data.names())))
}

/// Order file resolved against a dataset's columns.
fn resolve_order(data: &Dataset, path: &Path) -> Result<Vec<usize>> {
    let file: OrderFile = read_json(path)?;
    let idx: Vec<usize> = file
        .order
        .iter()
        .map(|n| {
            data.column_index(n).ok_or_else(|| {
                anyhow::Error::new(tvinesynth::Error::Data(format!("order names unknown column `{n}`")))
            })
        })
        .collect::<Result<_>>()?;
    let s: Vec<usize> = file.sensitive.iter().map(|n| column(data, n)).collect::<Result<_>>()?;
    let k: Vec<usize> = file.associated.iter().map(|n| column(data, n)).collect::<Result<_>>()?;
    validate_order(&idx, &s, &k, data.n_covariates()).with_context(|| format!("invalid order in {}", path.display()))?;
    Ok(idx)
}

fn fit_options(f: Families) -> FitOptions {
    match f {
        Families::All => FitOptions::default(),
        Families::Gaussian => FitOptions::gaussian_only(),
    }
}

fn levels_or_full(levels: &[usize], d: usize) -> Vec<usize> {
    if levels.is_empty() {
        vec![d]
    } else {
        levels.to_vec()
    }
}

/// Outlying rows of the sensitive column, then uniformly drawn rows that
/// are not already targets.
pub fn choose_targets(data: &Dataset, sensitive: usize, t: &TargetArgs, seed: u64) -> Result<Vec<usize>> {
    let stream = RngStream::new(seed).derive(TARGET_STREAM);
    let mut targets = if t.outliers > 0 {
        select_targets(data, sensitive, TargetMode::Outlier, t.outliers, &stream.derive(0))?
    } else {
        Vec::new()
    };
    if t.random > 0 {
        let pool = (t.random + targets.len()).min(data.n_rows());
        let extra = select_targets(data, sensitive, TargetMode::Random, pool, &stream.derive(1))?;
        let fresh: Vec<usize> = extra.into_iter().filter(|i| !targets.contains(i)).take(t.random).collect();
        targets.extend(fresh);
    }
    if targets.is_empty() {
        return Err(usage("at least one target is required"));
    }
    Ok(targets)
}

fn manifest(command: &str, argv: &[String], inputs: &[&Path], config: serde_json::Value, seed: u64, outputs: &[&str]) -> RunManifest {
    RunManifest {
        command: command.into(),
        args: argv.to_vec(),
        inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
        config,
        seed,
        version: env!("CARGO_PKG_VERSION").into(),
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
        started_unix: 0.0,
        elapsed_secs: 0.0,
    }
}

pub fn cmd_simulate(a: &SimulateArgs, argv: &[String]) -> Result<()> {
    let clock = Clock::start();
    if a.n == 0 || !(0.0..1.0).contains(&a.test_fraction) {
        return Err(usage("need n ≥ 1 and 0 ≤ test fraction < 1"));
    }
    let n_test = (a.n as f64 * a.test_fraction / (1.0 - a.test_fraction)).round() as usize;
    prepare_out(&a.common.out_dir)?;
    let spec = benchmark_spec();
    let stream = RngStream::new(a.common.seed);
    write_dataset(&a.common.out_dir.join("train.csv"), &simulate(&spec, a.n, &stream.derive(0))?)?;
    let mut outputs = vec!["train.csv"];
    if n_test > 0 {
        write_dataset(&a.common.out_dir.join("test.csv"), &simulate(&spec, n_test, &stream.derive(1))?)?;
        outputs.push("test.csv");
    }
    let cfg = serde_json::json!({ "n": a.n, "n_test": n_test, "test_fraction": a.test_fraction });
    clock.finish(manifest("simulate", argv, &[], cfg, a.common.seed, &outputs), &a.common.out_dir)
}

pub fn cmd_order(a: &OrderArgs, response: &str, argv: &[String]) -> Result<()> {
    let clock = Clock::start();
    let data = read_dataset(&a.data, response)?;
    let sensitive: Vec<usize> = a.sensitive.iter().map(|n| column(&data, n)).collect::<Result<_>>()?;
    let association = match a.association {
        AssociationArg::Kendall => Association::Kendall,
        AssociationArg::Pearson => Association::Pearson,
    };
    let spec = OrderSpec {
        sensitive: sensitive.clone(),
        threshold: a.threshold,
        association,
    };
    let res = find_order(&data, &spec)?;
    let name = |i: &usize| data.names()[*i].clone();
    let d = data.n_covariates();
    let file = OrderFile {
        order: res.order.iter().map(name).collect(),
        sensitive: {
            let mut s = sensitive.clone();
            s.sort_unstable();
            s.iter().map(name).collect()
        },
        associated: res.associated.iter().map(name).collect(),
        threshold: a.threshold,
        association,
        safe_truncation_bound: (d + 1).saturating_sub(sensitive.len() + res.associated.len()),
    };
    prepare_out(&a.common.out_dir)?;
    write_json(&a.common.out_dir.join("order.json"), &file)?;
    let cfg = serde_json::to_value(&spec).expect("serializable");
    clock.finish(manifest("order", argv, &[&a.data], cfg, a.common.seed, &["order.json"]), &a.common.out_dir)
}

pub fn cmd_fit(a: &FitArgs, response: &str, argv: &[String]) -> Result<()> {
    let clock = Clock::start();
    let data = read_dataset(&a.data, response)?;
    let order = resolve_order(&data, &a.model.order)?;
    let t_max = a.t_max.unwrap_or(data.n_covariates());
    let model = fit_cvine_with(&data, &order, t_max, &RngStream::new(a.common.seed), &fit_options(a.model.families))?;
    prepare_out(&a.common.out_dir)?;
    write_text(&a.common.out_dir.join("model.json"), &model.to_json()?)?;
    let cfg = serde_json::json!({ "t_max": t_max, "families": format!("{:?}", a.model.families).to_lowercase() });
    clock.finish(
        manifest("fit", argv, &[&a.data, &a.model.order], cfg, a.common.seed, &["model.json"]),
        &a.common.out_dir,
    )
}

pub fn cmd_sample(a: &SampleArgs, argv: &[String]) -> Result<()> {
    let clock = Clock::start();
    let text = std::fs::read_to_string(&a.model).with_context(|| format!("reading {}", a.model.display()))?;
    let mut model = CVineModel::from_json(&text)?;
    if let Some(t) = a.truncate {
        if t == 0 || t > model.truncation_level() {
            return Err(usage(format!(
                "truncation {t} must lie in 1..={} for this model",
                model.truncation_level()
            )));
        }
        model = model.truncate(t)?;
    }
    let n = a.n.unwrap_or(model.n_train());
    let syn = model.sample(n, &RngStream::new(a.common.seed))?;
    prepare_out(&a.common.out_dir)?;
    write_dataset(&a.common.out_dir.join("synthetic.csv"), &syn)?;
    let cfg = serde_json::json!({ "truncation": model.truncation_level(), "n": n });
    clock.finish(manifest("sample", argv, &[&a.model], cfg, a.common.seed, &["synthetic.csv"]), &a.common.out_dir)
}

struct AttackSetup {
    data: Dataset,
    synth: CVineSynthesizer,
    sensitive: usize,
    targets: Vec<usize>,
    config: AttackFile,
}

fn attack_setup(a: &AttackArgs, response: &str) -> Result<AttackSetup> {
    let data = read_dataset(&a.data, response)?;
    let order = resolve_order(&data, &a.model.order)?;
    let sensitive = column(&data, &a.sensitive)?;
    let levels = levels_or_full(&a.truncations, data.n_covariates());
    if levels.iter().any(|&t| t == 0 || t > data.n_covariates()) {
        return Err(usage(format!("truncation levels must lie in 1..={}", data.n_covariates())));
    }
    let mut synth = CVineSynthesizer::new(order, levels)?;
    synth.options = fit_options(a.model.families);
    let targets = choose_targets(&data, sensitive, &a.targets, a.common.seed)?;
    let config = read_config(a.config.as_deref())?;
    Ok(AttackSetup {
        data,
        synth,
        sensitive,
        targets,
        config,
    })
}

fn attack_inputs(a: &AttackArgs) -> Vec<&Path> {
    let mut v: Vec<&Path> = vec![&a.data, &a.model.order];
    if let Some(c) = &a.config {
        v.push(c);
    }
    v
}

fn run_aia_levels(s: &AttackSetup, seed: u64) -> Result<Vec<LevelAia>> {
    let reports = run_aia(
        &s.data,
        &s.synth,
        s.sensitive,
        &s.targets,
        &s.config.aia,
        &RngStream::new(seed).derive(AIA_STREAM),
    )?;
    Ok(s.synth.levels.iter().zip(reports).map(|(&truncation, report)| LevelAia { truncation, report }).collect())
}

fn run_mia_levels(s: &AttackSetup, seed: u64) -> Result<Vec<LevelMia>> {
    let per_target: Vec<Vec<MiaReport>> = s
        .targets
        .iter()
        .map(|&t| {
            run_mia(
                &s.data,
                &s.synth,
                t,
                &s.config.mia,
                &s.config.forest,
                &RngStream::new(seed).derive2(MIA_STREAM, t as u64),
            )
        })
        .collect::<tvinesynth::Result<_>>()?;
    Ok(s.synth
        .levels
        .iter()
        .enumerate()
        .map(|(v, &truncation)| {
            let reports: Vec<MiaReport> = per_target.iter().map(|r| r[v].clone()).collect();
            let pg_median = spread(&reports.iter().map(|r| r.privacy_gain).collect::<Vec<_>>()).0;
            LevelMia {
                truncation,
                reports,
                pg_median,
            }
        })
        .collect())
}

pub fn cmd_attack(c: &AttackCommand, response: &str, argv: &[String]) -> Result<()> {
    let clock = Clock::start();
    let (kind, a) = match c {
        AttackCommand::Aia(a) => ("aia", a),
        AttackCommand::Mia(a) => ("mia", a),
    };
    let setup = attack_setup(a, response)?;
    let out = &a.common.out_dir;
    prepare_out(out)?;
    let outputs: [&str; 2] = if kind == "aia" {
        let levels = run_aia_levels(&setup, a.common.seed)?;
        write_json(&out.join("aia_report.json"), &levels)?;
        let rows: Vec<AiaRow> = levels
            .iter()
            .flat_map(|l| {
                l.report.beta.iter().enumerate().flat_map(move |(m, sets)| {
                    sets.iter().enumerate().map(move |(set, b)| AiaRow {
                        truncation: l.truncation,
                        iteration: m,
                        set,
                        mab: b.as_ref().map(|b| b.iter().map(|v| v.abs()).sum::<f64>() / b.len() as f64),
                        max_abs_beta: b.as_ref().map(|b| b.iter().fold(0.0, |m, v| f64::max(m, v.abs()))),
                    })
                })
            })
            .collect();
        write_rows(&out.join("aia.csv"), &rows)?;
        ["aia_report.json", "aia.csv"]
    } else {
        let levels = run_mia_levels(&setup, a.common.seed)?;
        write_json(&out.join("mia_report.json"), &levels)?;
        let rows: Vec<MiaRow> = levels
            .iter()
            .flat_map(|l| {
                l.reports.iter().map(move |r| MiaRow {
                    truncation: l.truncation,
                    target: r.target,
                    p_guess_in: r.p_guess_in,
                    p_guess_out: r.p_guess_out,
                    privacy_gain: r.privacy_gain,
                })
            })
            .collect();
        write_rows(&out.join("mia.csv"), &rows)?;
        ["mia_report.json", "mia.csv"]
    };
    let cfg = serde_json::json!({
        "attack": kind,
        "levels": setup.synth.levels,
        "sensitive": a.sensitive,
        "targets": setup.targets,
        "settings": setup.config,
    });
    clock.finish(manifest(&format!("attack {kind}"), argv, &attack_inputs(a), cfg, a.common.seed, &outputs), out)
}

pub fn cmd_utility(a: &UtilityArgs, response: &str, argv: &[String]) -> Result<()> {
    let clock = Clock::start();
    let real = read_dataset(&a.real, response)?;
    let test = read_dataset(&a.test, response)?;
    let mut forest = read_config(a.config.as_deref())?.forest;
    forest.seed = a.common.seed;
    let trtr = utility_trtr(&real, &test, &forest)?;
    let tstr: Vec<f64> = a
        .synthetic
        .iter()
        .map(|p| utility_tstr(&read_dataset(p, response)?, &test, &forest).map_err(Into::into))
        .collect::<Result<_>>()?;
    let report = UtilityReport {
        trtr,
        tstr_median: spread(&tstr).0,
        tstr,
    };
    prepare_out(&a.common.out_dir)?;
    write_json(&a.common.out_dir.join("utility.json"), &report)?;
    let mut inputs: Vec<&Path> = vec![&a.real, &a.test];
    inputs.extend(a.synthetic.iter().map(PathBuf::as_path));
    let cfg = serde_json::to_value(forest).expect("serializable");
    clock.finish(manifest("utility", argv, &inputs, cfg, a.common.seed, &["utility.json"]), &a.common.out_dir)
}

pub fn cmd_fidelity(a: &FidelityArgs, response: &str, argv: &[String]) -> Result<()> {
    let clock = Clock::start();
    let real = read_dataset(&a.real, response)?;
    let syn = read_dataset(&a.synthetic, response)?;
    if real.names() != syn.names() {
        return Err(usage("real and synthetic files have different columns"));
    }
    let report = fidelity(real.covariates(), syn.covariates())?;
    prepare_out(&a.common.out_dir)?;
    write_json(&a.common.out_dir.join("fidelity.json"), &report)?;
    clock.finish(
        manifest("fidelity", argv, &[&a.real, &a.synthetic], serde_json::Value::Null, a.common.seed, &["fidelity.json"]),
        &a.common.out_dir,
    )
}

pub fn cmd_sweep(a: &SweepArgs, response: &str, argv: &[String]) -> Result<()> {
    let clock = Clock::start();
    let data = read_dataset(&a.data, response)?;
    let test = read_dataset(&a.test, response)?;
    let order = resolve_order(&data, &a.model.order)?;
    let sensitive = column(&data, &a.sensitive)?;
    let d = data.n_covariates();
    if a.truncations.iter().any(|&t| t == 0 || t > d) {
        return Err(usage(format!("truncation levels must lie in 1..={d}")));
    }
    let settings = read_config(a.config.as_deref())?;
    let targets = choose_targets(&data, sensitive, &a.targets, a.common.seed)?;
    let privacy = match a.privacy {
        PrivacyArg::Mab => SweepPrivacy::Mab {
            sensitive,
            targets: targets.clone(),
            aia: settings.aia,
        },
        PrivacyArg::Pg => SweepPrivacy::Pg {
            targets: targets.clone(),
            mia: settings.mia,
            forest: settings.forest,
        },
    };
    let mut forest = settings.forest;
    forest.seed = a.common.seed;
    let cfg = SweepConfig {
        truncations: a.truncations.clone(),
        n_rep: a.n_rep,
        forest,
        privacy,
        fit: fit_options(a.model.families),
    };
    let records = sweep(&data, &test, &order, &cfg, &RngStream::new(a.common.seed))?;
    let competitors: Vec<Competitor> = match &a.competitors {
        Some(p) => csv::Reader::from_path(p)
            .with_context(|| format!("opening {}", p.display()))?
            .deserialize()
            .collect::<std::result::Result<_, _>>()
            .with_context(|| format!("parsing {}", p.display()))?,
        None => Vec::new(),
    };
    let out = &a.common.out_dir;
    prepare_out(out)?;
    write_rows(&out.join("sweep.csv"), &records)?;
    write_text(&out.join("sweep.svg"), &privacy_utility_svg(&records, &competitors))?;
    let mut inputs: Vec<&Path> = vec![&a.data, &a.test, &a.model.order];
    inputs.extend(a.config.as_deref());
    inputs.extend(a.competitors.as_deref());
    let snapshot = serde_json::json!({
        "truncations": a.truncations,
        "privacy": format!("{:?}", a.privacy).to_lowercase(),
        "sensitive": a.sensitive,
        "targets": targets,
        "n_rep": a.n_rep,
        "settings": settings,
    });
    clock.finish(manifest("sweep", argv, &inputs, snapshot, a.common.seed, &["sweep.csv", "sweep.svg"]), out)
}
