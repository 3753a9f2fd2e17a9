//! Chebyshev bandpass filter banks on the normalized spectrum.
//!
//! A band `[a, b]` in raw eigenvalue units is mapped to `[ã, b̃]` by
//! `λ̃ = 2λ/λ_max − 1`; its indicator has the closed-form expansion
//!
//! ```text
//! θ_0 = (arccos ã − arccos b̃) / π
//! θ_k = 2 (sin(k arccos ã) − sin(k arccos b̃)) / (π k),   k ≥ 1
//! ```
//!
//! Filters are applied with the three-term recurrence on `Δ̃`, one sweep
//! serving every band of the bank.

use std::f64::consts::PI;
use std::path::Path;

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::NormalizedOperator;
use crate::scalar::Scalar;

/// Recurrence terms buffered before each coefficient GEMM.
const CHUNK: usize = 64;

/// Largest grid step accepted by [`transition_width`], relative to `λ_max`.
pub const MAX_GRID_STEP: f64 = 1e-5;

/// Coefficients `θ_0..θ_{K−1}` of the indicator of `[a, b]` (raw units).
pub fn band_coefficients(band: [f64; 2], lambda_max: f64, order: usize) -> Result<Vec<f64>> {
    let [a, b] = band;
    if !(lambda_max > 0.0) || !lambda_max.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda_max must be positive, got {lambda_max}")));
    }
    if !(0.0 <= a && a < b && b <= lambda_max) {
        return Err(Error::InvalidArgument(format!(
            "band [{a}, {b}] must satisfy 0 <= a < b <= {lambda_max}"
        )));
    }
    if order < 1 {
        return Err(Error::InvalidArgument("Chebyshev order K must be at least 1".into()));
    }
    let lo = (2.0 * a / lambda_max - 1.0).clamp(-1.0, 1.0).acos();
    let hi = (2.0 * b / lambda_max - 1.0).clamp(-1.0, 1.0).acos();
    let mut theta = Vec::with_capacity(order);
    theta.push((lo - hi) / PI);
    for k in 1..order {
        let kf = k as f64;
        theta.push(2.0 * ((kf * lo).sin() - (kf * hi).sin()) / (PI * kf));
    }
    Ok(theta)
}

/// Jackson damping factors `g_0..g_{K−1}`; they suppress Gibbs ringing at the
/// cost of wider transitions.
pub fn jackson_damping(order: usize) -> Vec<f64> {
    let kp = order as f64 + 1.0;
    let a = PI / kp;
    (0..order)
        .map(|k| {
            let kf = k as f64;
            ((kp - kf) * (a * kf).cos() + (a * kf).sin() / a.tan()) / kp
        })
        .collect()
}

/// `Σ_k θ_k T_k(x)` by Clenshaw's recurrence.
pub fn chebyshev_sum(theta: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &t in theta.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + t;
        b2 = b1;
        b1 = b0;
    }
    match theta.first() {
        Some(&t0) => t0 + x * b1 - b2,
        None => 0.0,
    }
}

/// Width in `λ̃` units between the 10% and 90% response crossings at the
/// lower edge of `band` (normalized), or at the upper edge when the band
/// starts at `−1`. A filter covering all of `[−1, 1]` has width 0.
///
/// `step` is the grid spacing relative to `λ_max`, at most [`MAX_GRID_STEP`].
pub fn transition_width(theta: &[f64], band: [f64; 2], step: f64) -> Result<f64> {
    if !(step > 0.0 && step <= MAX_GRID_STEP) {
        return Err(Error::InvalidArgument(format!(
            "grid step {step} must lie in (0, {MAX_GRID_STEP}]"
        )));
    }
    let h = 2.0 * step;
    let [lo, hi] = band;
    if hi - lo < h {
        return Err(Error::InvalidArgument(format!(
            "band [{lo}, {hi}] is narrower than the grid step"
        )));
    }
    let at_bottom = lo <= -1.0 + h / 2.0;
    let at_top = hi >= 1.0 - h / 2.0;
    if at_bottom && at_top {
        return Ok(0.0);
    }
    // outside is the stop side of the edge, inside the pass side
    let (edge, outward, inward_limit, outward_limit) = if at_bottom {
        (hi, 1.0, lo, 1.0)
    } else {
        (lo, -1.0, hi, -1.0)
    };
    let inward = -outward;
    let mid = 0.5 * (edge + inward_limit);
    let crossing = |dir: f64, limit: f64, hit: &dyn Fn(f64) -> bool| -> Option<f64> {
        let mut prev_x = edge;
        let mut prev_g = chebyshev_sum(theta, edge);
        if hit(prev_g) {
            return Some(edge);
        }
        let mut i = 1usize;
        loop {
            let x = edge + dir * h * i as f64;
            if (x - limit) * dir > 0.0 {
                return None;
            }
            let g = chebyshev_sum(theta, x);
            if hit(g) {
                let t = (if dir == outward { 0.1 } else { 0.9 } - prev_g) / (g - prev_g);
                return Some(prev_x + t * (x - prev_x));
            }
            prev_x = x;
            prev_g = g;
            i += 1;
        }
    };
    let low = crossing(outward, outward_limit, &|g| g <= 0.1);
    let high = crossing(inward, mid, &|g| g >= 0.9);
    match (low, high) {
        (Some(a), Some(b)) => Ok((a - b).abs()),
        _ => Err(Error::InvalidArgument(format!(
            "no 10%/90% transition found at edge {edge}; band too narrow for this order"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BankDesign {
    Uniform,
    Dyadic,
    Custom,
}

/// Bandpass filters `[ε_l, ε_{l+1}]` with their Chebyshev coefficients.
///
/// When `include_mean` is set, channel 0 is the exact area-weighted mean and
/// the bands occupy channels `1..=L`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    lambda_max: f64,
    order: usize,
    bands: Vec<[f64; 2]>,
    design: BankDesign,
    include_mean: bool,
    damping: bool,
    /// `L × K`
    theta: Array2<f64>,
}

#[derive(Serialize, Deserialize)]
struct BankFile {
    lambda_max: f64,
    #[serde(rename = "K")]
    order: usize,
    bands: Vec<[f64; 2]>,
    design: BankDesign,
    #[serde(default = "yes")]
    include_mean: bool,
    #[serde(default)]
    damping: bool,
}

fn yes() -> bool {
    true
}

impl FilterBank {
    pub fn new(lambda_max: f64, order: usize, bands: Vec<[f64; 2]>, include_mean: bool) -> Result<Self> {
        Self::build(lambda_max, order, bands, BankDesign::Custom, include_mean, false)
    }

    fn build(
        lambda_max: f64,
        order: usize,
        bands: Vec<[f64; 2]>,
        design: BankDesign,
        include_mean: bool,
        damping: bool,
    ) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::InvalidArgument("filter bank needs at least one band".into()));
        }
        let mut theta = Array2::zeros((bands.len(), order.max(1)));
        let damp = damping.then(|| jackson_damping(order));
        for (l, band) in bands.iter().enumerate() {
            let mut row = band_coefficients(*band, lambda_max, order)?;
            if let Some(g) = &damp {
                row.iter_mut().zip(g).for_each(|(t, g)| *t *= g);
            }
            theta.row_mut(l).assign(&ndarray::ArrayView1::from(&row));
        }
        Ok(FilterBank {
            lambda_max,
            order,
            bands,
            design,
            include_mean,
            damping,
            theta,
        })
    }

    /// Contiguous bands of width `w` tiling `[0, λ_max]`; the last one is
    /// clipped at `λ_max`.
    pub fn design_uniform(lambda_max: f64, width: f64, order: usize, include_mean: bool) -> Result<Self> {
        if !(width > 0.0) || width >= lambda_max {
            return Err(Error::InvalidArgument(format!(
                "band width {width} must be positive and below lambda_max {lambda_max}"
            )));
        }
        let count = (lambda_max / width - 1e-9).ceil() as usize;
        let bands = (0..count)
            .map(|i| {
                let hi = if i + 1 == count { lambda_max } else { width * (i + 1) as f64 };
                [width * i as f64, hi]
            })
            .collect();
        Self::build(lambda_max, order, bands, BankDesign::Uniform, include_mean, false)
    }

    /// Level `m` splits `[0, λ_max/4^{m−1}]` into `2^{m+1}` bands and keeps
    /// those above `λ_max/4^m`; the last level keeps all of its bands.
    pub fn design_dyadic(lambda_max: f64, levels: u32, order: usize, include_mean: bool) -> Result<Self> {
        if !(1..=20).contains(&levels) {
            return Err(Error::InvalidArgument(format!("dyadic levels must be in 1..=20, got {levels}")));
        }
        let mut bands = Vec::new();
        for m in (1..=levels).rev() {
            let top = lambda_max / 4f64.powi(m as i32 - 1);
            let count = 1usize << (m + 1);
            let floor = if m == levels { 0.0 } else { lambda_max / 4f64.powi(m as i32) };
            for i in 0..count {
                let lo = top * i as f64 / count as f64;
                if lo >= floor {
                    bands.push([lo, top * (i + 1) as f64 / count as f64]);
                }
            }
        }
        Self::build(lambda_max, order, bands, BankDesign::Dyadic, include_mean, false)
    }

    /// Same bands with Jackson-damped coefficients.
    pub fn with_damping(&self, damping: bool) -> Result<Self> {
        Self::build(
            self.lambda_max,
            self.order,
            self.bands.clone(),
            self.design,
            self.include_mean,
            damping,
        )
    }

    /// Same bands at a different order.
    pub fn with_order(&self, order: usize) -> Result<Self> {
        Self::build(
            self.lambda_max,
            order,
            self.bands.clone(),
            self.design,
            self.include_mean,
            self.damping,
        )
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bands(&self) -> &[[f64; 2]] {
        &self.bands
    }

    pub fn n_bands(&self) -> usize {
        self.bands.len()
    }

    /// Bands plus the mean channel when present.
    pub fn n_channels(&self) -> usize {
        self.bands.len() + usize::from(self.include_mean)
    }

    pub fn design(&self) -> BankDesign {
        self.design
    }

    pub fn include_mean(&self) -> bool {
        self.include_mean
    }

    pub fn damping(&self) -> bool {
        self.damping
    }

    /// `L × K` coefficient matrix, row `l` for band `l`.
    pub fn theta(&self) -> ArrayView2<'_, f64> {
        self.theta.view()
    }

    pub fn theta_as<T: Scalar>(&self) -> Array2<T> {
        self.theta.mapv(T::of)
    }

    /// Band `l` mapped to `[−1, 1]`.
    pub fn normalized_band(&self, l: usize) -> [f64; 2] {
        let [a, b] = self.bands[l];
        [2.0 * a / self.lambda_max - 1.0, 2.0 * b / self.lambda_max - 1.0]
    }

    /// Truncated response `g_l(x̃)` at a normalized point.
    pub fn response(&self, l: usize, x: f64) -> f64 {
        chebyshev_sum(self.theta.row(l).as_slice().expect("standard layout"), x)
    }

    pub fn transition_width(&self, l: usize, step: f64) -> Result<f64> {
        transition_width(
            self.theta.row(l).as_slice().expect("standard layout"),
            self.normalized_band(l),
            step,
        )
    }

    /// The bands cover `[0, λ_max]` without gaps or overlaps.
    pub fn is_tiling(&self) -> bool {
        let mut sorted = self.bands.clone();
        sorted.sort_by(|x, y| x[0].total_cmp(&y[0]));
        let tol = 1e-12 * self.lambda_max;
        sorted.first().is_some_and(|b| b[0].abs() <= tol)
            && sorted.last().is_some_and(|b| (b[1] - self.lambda_max).abs() <= tol)
            && sorted.windows(2).all(|w| (w[0][1] - w[1][0]).abs() <= tol)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&BankFile {
            lambda_max: self.lambda_max,
            order: self.order,
            bands: self.bands.clone(),
            design: self.design,
            include_mean: self.include_mean,
            damping: self.damping,
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: BankFile = serde_json::from_str(text)?;
        Self::build(f.lambda_max, f.order, f.bands, f.design, f.include_mean, f.damping)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    fn check_operator<T: Scalar>(&self, op: &NormalizedOperator<'_, T>) -> Result<()> {
        let lam = op.lambda_max().as_f64();
        if (lam - self.lambda_max).abs() > 1e-6 * lam.abs() {
            return Err(Error::InvalidArgument(format!(
                "filter bank designed for lambda_max {} but operator is normalized by {lam}",
                self.lambda_max
            )));
        }
        Ok(())
    }

    /// All channels of one signal as an `n_channels × V` matrix: the exact
    /// mean (if enabled) followed by each band applied to `f − mean`.
    pub fn filter_signal<T: Scalar>(&self, op: &NormalizedOperator<'_, T>, f: &[T], theta: &Array2<T>) -> Result<Array2<T>> {
        self.check_operator(op)?;
        let v = op.n_vertices();
        let mut out = Array2::zeros((self.n_channels(), v));
        let offset = usize::from(self.include_mean);
        if self.include_mean {
            let mean = area_mean(op.areas(), f);
            out.row_mut(0).fill(mean);
            let centered: Vec<T> = f.iter().map(|x| *x - mean).collect();
            accumulate_terms(op, &centered, theta.view(), out.slice_mut(s![offset.., ..]))?;
        } else {
            accumulate_terms(op, f, theta.view(), out.view_mut())?;
        }
        Ok(out)
    }

    /// [`filter_signal`](Self::filter_signal) for every row of `signals`, in parallel.
    pub fn filter<T: Scalar>(&self, op: &NormalizedOperator<'_, T>, signals: ArrayView2<T>) -> Result<Vec<Array2<T>>> {
        let theta = self.theta_as::<T>();
        signals
            .outer_iter()
            .into_par_iter()
            .map(|row| self.filter_signal(op, &row.to_vec(), &theta))
            .collect()
    }

    /// `h_0 + Σ_l g_l(Δ̃)(f − h_0)` per row: what the bank reproduces of each signal.
    pub fn reconstruct<T: Scalar>(&self, op: &NormalizedOperator<'_, T>, signals: ArrayView2<T>) -> Result<Array2<T>> {
        let channels = self.filter(op, signals)?;
        let mut out = Array2::zeros(signals.raw_dim());
        for (mut row, ch) in out.outer_iter_mut().zip(channels) {
            row.assign(&ch.sum_axis(ndarray::Axis(0)));
        }
        Ok(out)
    }
}

/// `Σ_v A_v f(v) / Σ_v A_v`.
pub fn area_mean<T: Scalar>(areas: &[T], f: &[T]) -> T {
    let total: T = areas.iter().copied().sum();
    let weighted: T = areas.iter().zip(f).map(|(a, x)| *a * *x).sum();
    weighted / total
}

/// `out += Σ_k θ[:, k] ⊗ T_k(Δ̃) f` for `k < K`, where `θ` is `L × K` and
/// `out` is `L × V`.
///
/// Recurrence terms are buffered in chunks and folded in with one matrix
/// product per chunk, so the cost per term is one sparse multiply plus an
/// `L`-row rank update.
pub fn accumulate_terms<T: Scalar>(
    op: &NormalizedOperator<'_, T>,
    f: &[T],
    theta: ArrayView2<T>,
    mut out: ndarray::ArrayViewMut2<T>,
) -> Result<()> {
    let v = op.n_vertices();
    if f.len() != v {
        return Err(Error::DimensionMismatch {
            what: "signal length vs operator vertices",
            expected: v,
            actual: f.len(),
        });
    }
    if out.dim() != (theta.nrows(), v) {
        return Err(Error::DimensionMismatch {
            what: "filter output rows vs coefficient rows",
            expected: theta.nrows(),
            actual: out.nrows(),
        });
    }
    let order = theta.ncols();
    let areas = op.areas();
    let a_norm = |x: &[T]| -> f64 { x.iter().zip(areas).map(|(x, a)| (*x * *x * *a).as_f64()).sum::<f64>().sqrt() };
    // |T_k| ≤ 1 on [−1, 1], so the A-norm of a term can only grow by roundoff
    let bound = 2.0 * a_norm(f) + f64::MIN_POSITIVE;

    let mut chunk = Array2::<T>::zeros((CHUNK.min(order), v));
    let mut prev = vec![T::zero(); v];
    let mut cur = f.to_vec();
    let mut next = vec![T::zero(); v];
    let mut k0 = 0;
    while k0 < order {
        let m = CHUNK.min(order - k0);
        for i in 0..m {
            let k = k0 + i;
            match k {
                0 => {}
                1 => {
                    op.apply(&cur, &mut next);
                    std::mem::swap(&mut prev, &mut cur);
                    std::mem::swap(&mut cur, &mut next);
                }
                _ => {
                    op.recurrence_step(&cur, &prev, &mut next);
                    std::mem::swap(&mut prev, &mut cur);
                    std::mem::swap(&mut cur, &mut next);
                }
            }
            chunk.row_mut(i).assign(&ndarray::ArrayView1::from(&cur[..]));
        }
        let norm = a_norm(&cur);
        if !norm.is_finite() || norm > bound {
            return Err(Error::RecurrenceDiverged { k: k0 + m - 1 });
        }
        general_mat_mul(
            T::one(),
            &theta.slice(s![.., k0..k0 + m]),
            &chunk.slice(s![..m, ..]),
            T::one(),
            &mut out,
        );
        k0 += m;
    }
    Ok(())
}
