use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use anyhow::Context;
use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use surfaug::analysis::{class_mean_deviations, correlations_with, max_mean_deviation, sorted_means};
use surfaug::augment::{augment_dataset, Method};
use surfaug::signal::AugmentMethod;
use surfaug::simulate::{generate, select_patch, SimulationConfig};
use surfaug::{EigenBasis64, FilterBank, SignalSet64};

use crate::config::{ensure_dir, mesh, require_file, write_json, Usage};
use crate::geometry::{operator, BankOptions};

fn seed_or_usage(seed: Option<u64>) -> anyhow::Result<u64> {
    seed.ok_or_else(|| Usage::new("--seed is required (flag or config key)").into())
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub mesh: String,
    /// Group-0 size.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Group-1 size.
    #[arg(long, default_value_t = 100)]
    pub m: usize,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 0.6)]
    pub sigma: f64,
    /// Patch center vertex.
    #[arg(long, default_value_t = 0)]
    pub center: usize,
    /// Patch radius in edge hops.
    #[arg(long, default_value_t = 2)]
    pub hops: usize,
    /// Effect added on the patch for group 1.
    #[arg(long, default_value_t = 1.0)]
    pub signal: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Signal file (`.csv`, anything else binary).
    #[arg(long)]
    pub out: PathBuf,
}

pub fn simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let seed = seed_or_usage(args.seed)?;
    let mesh = mesh(&args.mesh)?;
    let patch = select_patch(&mesh, args.center, args.hops)?;
    let mut cfg = SimulationConfig::new(args.n, args.m, args.sigma, patch.clone(), seed);
    cfg.signal_level = args.signal;
    let set = generate(&mesh, &cfg)?;
    set.write(&args.out)?;
    println!("{}", json!({ "observations": set.n_observations(), "vertices": set.n_vertices(), "patch": patch }));
    Ok(())
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct AugmentArgs {
    #[arg(long)]
    pub mesh: String,
    /// Real signal set.
    #[arg(long)]
    pub input: PathBuf,
    /// `lb-eigda` or `c-pda`.
    #[arg(long)]
    pub method: AugmentMethod,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Samples per class as `label=count`, repeatable. Default: each class
    /// gets as many samples as it has observations.
    #[arg(long = "count")]
    pub counts: Vec<String>,
    /// LB-eigDA mode count J (default: all V).
    #[arg(long)]
    pub modes: Option<usize>,
    /// Precomputed eigenbasis for LB-eigDA.
    #[arg(long)]
    pub eigens: Option<PathBuf>,
    /// Precomputed bank JSON for C-pDA.
    #[arg(long)]
    pub bank_file: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub bank: BankOptions,
    /// Augmented signal file.
    #[arg(long)]
    pub out: PathBuf,
    /// JSON report with mean deviations and stage timings.
    #[arg(long)]
    pub report: PathBuf,
}

fn parse_counts(specs: &[String], real: &SignalSet64) -> anyhow::Result<Vec<(String, usize)>> {
    if specs.is_empty() {
        return Ok(real
            .split_by_class()
            .into_iter()
            .map(|(label, set)| (label, set.n_observations()))
            .collect());
    }
    specs
        .iter()
        .map(|s| {
            let (label, n) = s
                .rsplit_once('=')
                .ok_or_else(|| Usage::new(format!("count '{s}' is not label=number")))?;
            let n = n.parse().map_err(|_| Usage::new(format!("count '{s}' is not label=number")))?;
            Ok((label.to_string(), n))
        })
        .collect()
}

pub fn augment(args: AugmentArgs) -> anyhow::Result<()> {
    let seed = seed_or_usage(args.seed)?;
    require_file(&args.input)?;
    for path in [&args.eigens, &args.bank_file].into_iter().flatten() {
        require_file(path)?;
    }
    let mut timings = serde_json::Map::new();
    let mut stage = |name: &str, t: Instant| {
        timings.insert(name.to_string(), json!(t.elapsed().as_secs_f64()));
    };

    let t = Instant::now();
    let mesh = mesh(&args.mesh)?;
    let real = SignalSet64::read(&args.input)?;
    let counts = parse_counts(&args.counts, &real)?;
    stage("load", t);

    let (augmented, details) = match args.method {
        AugmentMethod::LbEigDa => {
            let t = Instant::now();
            let basis = match &args.eigens {
                Some(path) => {
                    let basis = EigenBasis64::load(path)?;
                    match args.modes {
                        Some(j) => basis.truncated(j)?,
                        None => basis,
                    }
                }
                None => {
                    let op = operator(&mesh)?;
                    EigenBasis64::eigendecompose(&op, args.modes.unwrap_or(op.n_vertices()))?
                }
            };
            stage("eigendecomposition", t);
            let t = Instant::now();
            let out = augment_dataset(&real, Method::LbEigDa(&basis), &counts, seed)?;
            stage("augment", t);
            (out, json!({ "modes": basis.n_modes() }))
        }
        AugmentMethod::CPda => {
            let t = Instant::now();
            let op = operator(&mesh)?;
            let norm = op.normalize()?;
            stage("operator", t);
            let t = Instant::now();
            let bank = match &args.bank_file {
                Some(path) => FilterBank::load(path)?,
                None => args.bank.design(norm.lambda_max())?,
            };
            stage("bank", t);
            let t = Instant::now();
            let out = augment_dataset(&real, Method::CPda(&norm, &bank), &counts, seed)?;
            stage("augment", t);
            let details = json!({
                "design": bank.design(),
                "bands": bank.n_bands(),
                "channels": bank.n_channels(),
                "order": bank.order(),
                "damping": bank.damping(),
            });
            (out, details)
        }
    };

    let t = Instant::now();
    augmented.write(&args.out)?;
    stage("write", t);

    let deviations = class_mean_deviations(&real, &augmented)?;
    let classes: Vec<Value> = counts
        .iter()
        .map(|(label, want)| {
            let dev = deviations.iter().find(|(l, _)| l == label).map(|(_, d)| *d);
            json!({ "label": label, "samples": want, "max_mean_deviation": dev })
        })
        .collect();
    let worst = deviations.iter().map(|(_, d)| *d).fold(0.0, f64::max);
    let mut report = json!({
        "method": args.method,
        "seed": seed,
        "vertices": real.n_vertices(),
        "input_observations": real.n_observations(),
        "output_observations": augmented.n_observations(),
        "classes": classes,
        "max_mean_deviation": worst,
        "timings_s": timings,
    });
    report[match args.method {
        AugmentMethod::LbEigDa => "basis",
        AugmentMethod::CPda => "bank",
    }] = details;
    write_json(&args.report, &report)?;
    eprintln!("max per-vertex class mean deviation {worst:e}");
    Ok(())
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct StatsArgs {
    #[arg(long)]
    pub real: PathBuf,
    #[arg(long)]
    pub augmented: PathBuf,
    /// Restrict both sets to one class label.
    #[arg(long)]
    pub class: Option<String>,
    /// Output directory for `sorted_means.csv`, `correlations.json`, `summary.json`.
    #[arg(long)]
    pub out: PathBuf,
}

fn only_class(set: SignalSet64, class: Option<&str>) -> anyhow::Result<SignalSet64> {
    let Some(class) = class else { return Ok(set) };
    let rows: Vec<usize> = (0..set.n_observations()).filter(|&i| set.labels()[i] == class).collect();
    if rows.is_empty() {
        return Err(Usage::new(format!("no observations with label '{class}'")).into());
    }
    Ok(set.select(&rows))
}

pub fn stats(args: StatsArgs) -> anyhow::Result<()> {
    require_file(&args.real)?;
    require_file(&args.augmented)?;
    let real = only_class(SignalSet64::read(&args.real)?, args.class.as_deref())?;
    let augmented = only_class(SignalSet64::read(&args.augmented)?, args.class.as_deref())?;
    let sorted = sorted_means(&real, &augmented)?;
    let dir = ensure_dir(&args.out)?;

    let path = dir.join("sorted_means.csv");
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    writeln!(w, "rank,vertex,real_mean,augmented_mean")?;
    for (rank, ((v, r), a)) in sorted.vertex.iter().zip(&sorted.real).zip(&sorted.augmented).enumerate() {
        writeln!(w, "{rank},{v},{r},{a}")?;
    }
    w.flush()?;

    let reference = real.vertex_means();
    let real_r = correlations_with(&real, reference.view())?;
    let aug_r = correlations_with(&augmented, reference.view())?;
    let undefined = real_r.iter().chain(&aug_r).filter(|r| r.is_none()).count();
    if undefined > 0 {
        eprintln!("warning: {undefined} correlation(s) undefined (zero variance), reported as null");
    }
    write_json(&dir.join("correlations.json"), &json!({ "reference": "real_mean", "real": real_r, "augmented": aug_r }))?;

    let per_class: serde_json::Map<String, Value> = class_mean_deviations(&real, &augmented)?
        .into_iter()
        .map(|(l, d)| (l, json!(d)))
        .collect();
    let summary = json!({
        "vertices": real.n_vertices(),
        "real_observations": real.n_observations(),
        "augmented_observations": augmented.n_observations(),
        "max_mean_deviation": max_mean_deviation(&real, &augmented)?,
        "class_max_mean_deviation": per_class,
        "undefined_correlations": undefined,
    });
    write_json(&dir.join("summary.json"), &summary)?;
    println!("{summary}");
    Ok(())
}
