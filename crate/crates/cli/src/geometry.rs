use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;
use surfaug::spectrum::EigenSolver;
use surfaug::{EigenBasis64, FilterBank, LbOperator64, TriMesh64};

use crate::config::{ensure_dir, mesh, write_json, Usage};

/// Relative tolerance for the `λ_max` estimate used everywhere in the CLI.
pub const RADIUS_TOL: f64 = 1e-10;

pub fn operator(mesh: &TriMesh64) -> anyhow::Result<LbOperator64> {
    let mut op = LbOperator64::assemble(mesh)?;
    op.spectral_radius(RADIUS_TOL)?;
    Ok(op)
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct LaplacianArgs {
    /// Mesh path or synthetic spec.
    #[arg(long)]
    pub mesh: String,
    /// Output directory for `stiffness.coo`, `areas.csv` and `summary.json`.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn laplacian(args: LaplacianArgs) -> anyhow::Result<()> {
    let mesh = mesh(&args.mesh)?;
    let op = operator(&mesh)?;
    let dir = ensure_dir(&args.out)?;

    let coo = dir.join("stiffness.coo");
    let mut w = BufWriter::new(File::create(&coo).with_context(|| format!("creating {}", coo.display()))?);
    op.write_coo(&mut w)?;
    w.flush()?;
    let areas = dir.join("areas.csv");
    let mut w = BufWriter::new(File::create(&areas).with_context(|| format!("creating {}", areas.display()))?);
    op.write_areas_csv(&mut w)?;
    w.flush()?;

    let summary = json!({
        "vertices": mesh.n_vertices(),
        "triangles": mesh.n_triangles(),
        "edges": mesh.edges().len(),
        "total_area": op.total_area(),
        "lambda_max": op.lambda_max(),
    });
    write_json(&dir.join("summary.json"), &summary)?;
    println!("{summary}");
    Ok(())
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Auto,
    Dense,
    Lanczos,
}

impl From<Solver> for EigenSolver {
    fn from(s: Solver) -> Self {
        match s {
            Solver::Auto => EigenSolver::Auto,
            Solver::Dense => EigenSolver::Dense,
            Solver::Lanczos => EigenSolver::Lanczos,
        }
    }
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct EigensArgs {
    #[arg(long)]
    pub mesh: String,
    /// Number of modes J (default: all V).
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, value_enum, default_value = "auto")]
    pub solver: Solver,
    /// Binary eigenbasis file.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn eigens(args: EigensArgs) -> anyhow::Result<()> {
    let mesh = mesh(&args.mesh)?;
    let op = operator(&mesh)?;
    let count = args.count.unwrap_or(op.n_vertices());
    let start = Instant::now();
    let basis = EigenBasis64::eigendecompose_with(&op, count, args.solver.into())?;
    let seconds = start.elapsed().as_secs_f64();
    basis.save(&args.out)?;
    let values = basis.eigenvalues();
    println!(
        "{}",
        json!({
            "vertices": basis.n_vertices(),
            "modes": basis.n_modes(),
            "smallest": values.first(),
            "largest": values.last(),
            "seconds": seconds,
        })
    );
    Ok(())
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Design {
    Dyadic,
    Uniform,
}

/// Bank design flags shared by `bank` and `augment`.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BankOptions {
    #[arg(long, value_enum, default_value = "dyadic")]
    pub design: Design,
    /// Dyadic subdivision depth M.
    #[arg(long, default_value_t = 5)]
    pub levels: u32,
    /// Uniform band width in eigenvalue units.
    #[arg(long)]
    pub width: Option<f64>,
    /// Chebyshev order K.
    #[arg(long, default_value_t = 1000)]
    pub order: usize,
    /// Apply Jackson damping to the coefficients.
    #[arg(long)]
    pub damping: bool,
    /// Leave out the exact mean channel.
    #[arg(long)]
    pub no_mean: bool,
}

impl BankOptions {
    pub fn design(&self, lambda: f64) -> anyhow::Result<FilterBank> {
        let bank = match self.design {
            Design::Dyadic => FilterBank::design_dyadic(lambda, self.levels, self.order, !self.no_mean)?,
            Design::Uniform => {
                let width = self.width.ok_or_else(|| Usage::new("--width is required for a uniform bank"))?;
                FilterBank::design_uniform(lambda, width, self.order, !self.no_mean)?
            }
        };
        Ok(if self.damping { bank.with_damping(true)? } else { bank })
    }
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct BankArgs {
    /// Mesh whose normalized operator the bank will be used with.
    #[arg(long, conflicts_with = "lambda_max")]
    pub mesh: Option<String>,
    /// Normalization λ directly, instead of a mesh.
    #[arg(long)]
    pub lambda_max: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub bank: BankOptions,
    /// Bank JSON file.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional CSV of per-band 10-90% transition widths.
    #[arg(long)]
    pub widths: Option<PathBuf>,
    /// Grid step for the transition widths, in normalized units.
    #[arg(long, default_value_t = 1e-5)]
    pub step: f64,
}

pub fn bank(args: BankArgs) -> anyhow::Result<()> {
    let lambda = match (&args.mesh, args.lambda_max) {
        (Some(spec), None) => {
            let mesh = mesh(spec)?;
            let op = operator(&mesh)?;
            let norm = op.normalize()?;
            norm.lambda_max()
        }
        (None, Some(l)) => l,
        _ => return Err(Usage::new("give exactly one of --mesh and --lambda-max").into()),
    };
    let bank = args.bank.design(lambda)?;
    bank.save(&args.out)?;
    if let Some(path) = &args.widths {
        let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
        writeln!(w, "band,lower,upper,transition_width")?;
        for (l, [lo, hi]) in bank.bands().iter().enumerate() {
            writeln!(w, "{l},{lo},{hi},{}", bank.transition_width(l, args.step)?)?;
        }
        w.flush()?;
    }
    println!(
        "{}",
        json!({
            "lambda_max": bank.lambda_max(),
            "bands": bank.n_bands(),
            "channels": bank.n_channels(),
            "order": bank.order(),
            "tiling": bank.is_tiling(),
        })
    );
    Ok(())
}
