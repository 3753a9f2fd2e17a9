use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use anyhow::Context;
use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;
use surfaug::analysis::{affine_fit, median};
use surfaug::augment::{c_pda, lb_eig_da, PermutationPlan};
use surfaug::simulate::{generate, SimulationConfig};
use surfaug::{EigenBasis64, FilterBank};

use crate::config::{mesh, write_json, Usage};
use crate::geometry::operator;

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct BenchArgs {
    #[arg(long)]
    pub mesh: String,
    /// Chebyshev orders K for C-pDA.
    #[arg(long, value_delimiter = ',', default_value = "500,1000,2000,4000")]
    pub orders: Vec<usize>,
    /// Mode counts J for LB-eigDA (eigendecomposition included in the timing).
    #[arg(long, value_delimiter = ',', default_value = "100,200,400")]
    pub modes: Vec<usize>,
    /// Dyadic depth of the C-pDA bank.
    #[arg(long, default_value_t = 5)]
    pub levels: u32,
    /// Signals augmented per trial.
    #[arg(long, default_value_t = 16)]
    pub signals: usize,
    #[arg(long, default_value_t = 3)]
    pub trials: usize,
    /// Seed for the benchmark signals and permutations.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Timing CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional JSON with the fits and LB-eigDA/C-pDA ratios.
    #[arg(long)]
    pub fit: Option<PathBuf>,
}

fn time_trials(trials: usize, mut f: impl FnMut() -> anyhow::Result<()>) -> anyhow::Result<Vec<f64>> {
    (0..trials)
        .map(|_| {
            let t = Instant::now();
            f()?;
            Ok(t.elapsed().as_secs_f64())
        })
        .collect()
}

pub fn bench(args: BenchArgs) -> anyhow::Result<()> {
    if args.orders.contains(&0) {
        return Err(Usage::new("orders must be positive").into());
    }
    if args.modes.contains(&0) || args.signals < 2 || args.trials == 0 {
        return Err(Usage::new("modes and trials must be positive and signals at least 2").into());
    }
    let mesh = mesh(&args.mesh)?;
    let op = operator(&mesh)?;
    let norm = op.normalize()?;
    let v = op.n_vertices();
    if let Some(&j) = args.modes.iter().find(|&&j| j > v) {
        return Err(Usage::new(format!("{j} modes requested on a mesh with {v} vertices")).into());
    }
    let sim = generate(&mesh, &SimulationConfig::new(args.signals, 1, 1.0, vec![0], args.seed))?;
    // the first `signals` rows are all group 0
    let real = sim.select(&(0..args.signals).collect::<Vec<_>>());

    let mut rows = Vec::new();
    for &k in &args.orders {
        let bank = FilterBank::design_dyadic(norm.lambda_max(), args.levels, k, true)?;
        let plan = PermutationPlan::random(args.signals, bank.n_channels(), args.seed)?;
        let times = time_trials(args.trials, || Ok(c_pda(&norm, &bank, &real, &plan).map(drop)?))?;
        rows.push(("c-pda", k, times));
    }
    for &j in &args.modes {
        let plan = PermutationPlan::random(args.signals, j, args.seed)?;
        let times = time_trials(args.trials, || {
            let basis = EigenBasis64::eigendecompose(&op, j)?;
            Ok(lb_eig_da(&basis, &real, &plan).map(drop)?)
        })?;
        rows.push(("lb-eigda", j, times));
    }

    let mut w = BufWriter::new(File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?);
    writeln!(w, "method,parameter,median_s,min_s,max_s,trials")?;
    let mut medians = Vec::new();
    for (method, p, times) in &rows {
        let med = median(times).expect("trials >= 1");
        let lo = times.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = times.iter().copied().fold(0.0, f64::max);
        writeln!(w, "{method},{p},{med},{lo},{hi},{}", times.len())?;
        medians.push((*method, *p as f64, med));
    }
    w.flush()?;

    let series = |name: &str| -> (Vec<f64>, Vec<f64>) { medians.iter().filter(|m| m.0 == name).map(|m| (m.1, m.2)).unzip() };
    let (ks, cp) = series("c-pda");
    let (js, lb) = series("lb-eigda");
    let cp_fit = affine_fit(&ks, &cp).ok();
    let log = |xs: &[f64]| xs.iter().map(|x| x.ln()).collect::<Vec<_>>();
    let lb_slope = affine_fit(&log(&js), &log(&lb)).ok().map(|f| f.slope);
    let ratios: Vec<_> = args
        .orders
        .iter()
        .zip(&args.modes)
        .zip(cp.iter().zip(&lb))
        .map(|((k, j), (c, l))| json!({ "order": k, "modes": j, "lb_over_cpda": l / c }))
        .collect();
    let fit = json!({
        "vertices": v,
        "c_pda_affine": cp_fit.map(|f| json!({ "slope": f.slope, "intercept": f.intercept, "r_squared": f.r_squared })),
        "lb_eigda_loglog_slope": lb_slope,
        "ratios": ratios,
    });
    if let Some(path) = &args.fit {
        write_json(path, &fit)?;
    }
    println!("{fit}");
    Ok(())
}

