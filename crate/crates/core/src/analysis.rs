//! Summary statistics for comparing real and augmented signal sets.

use ndarray::ArrayView1;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::signal::SignalSet;

/// Per-vertex means of both sets, sorted by descending real mean.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedMeans {
    pub vertex: Vec<usize>,
    pub real: Vec<f64>,
    pub augmented: Vec<f64>,
}

pub fn sorted_means<T: Scalar>(real: &SignalSet<T>, augmented: &SignalSet<T>) -> Result<SortedMeans> {
    check_vertices(real, augmented)?;
    let rm = real.vertex_means();
    let am = augmented.vertex_means();
    let mut order: Vec<usize> = (0..rm.len()).collect();
    order.sort_by(|&a, &b| rm[b].as_f64().total_cmp(&rm[a].as_f64()).then(a.cmp(&b)));
    Ok(SortedMeans {
        real: order.iter().map(|&i| rm[i].as_f64()).collect(),
        augmented: order.iter().map(|&i| am[i].as_f64()).collect(),
        vertex: order,
    })
}

/// Pearson correlation, `None` when either side has zero variance.
pub fn pearson<T: Scalar>(x: ArrayView1<T>, y: ArrayView1<T>) -> Option<f64> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return None;
    }
    let mx = x.iter().map(|v| v.as_f64()).sum::<f64>() / n as f64;
    let my = y.iter().map(|v| v.as_f64()).sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y.iter()) {
        let (dx, dy) = (a.as_f64() - mx, b.as_f64() - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Correlation of every observation with `reference`.
pub fn correlations_with<T: Scalar>(set: &SignalSet<T>, reference: ArrayView1<T>) -> Result<Vec<Option<f64>>> {
    if reference.len() != set.n_vertices() {
        return Err(Error::DimensionMismatch {
            what: "reference length vs vertices",
            expected: set.n_vertices(),
            actual: reference.len(),
        });
    }
    Ok(set.data().outer_iter().map(|row| pearson(row, reference)).collect())
}

/// `max_v |mean_a(v) − mean_b(v)|`.
pub fn max_mean_deviation<T: Scalar>(a: &SignalSet<T>, b: &SignalSet<T>) -> Result<f64> {
    check_vertices(a, b)?;
    Ok(a.vertex_means()
        .iter()
        .zip(b.vertex_means().iter())
        .map(|(x, y)| (x.as_f64() - y.as_f64()).abs())
        .fold(0.0, f64::max))
}

/// Per-class [`max_mean_deviation`] for classes present in both sets.
pub fn class_mean_deviations<T: Scalar>(a: &SignalSet<T>, b: &SignalSet<T>) -> Result<Vec<(String, f64)>> {
    let other = b.split_by_class();
    a.split_by_class()
        .into_iter()
        .filter_map(|(label, sa)| {
            other
                .iter()
                .find(|(l, _)| *l == label)
                .map(|(_, sb)| max_mean_deviation(&sa, sb).map(|d| (label.clone(), d)))
        })
        .collect()
}

fn check_vertices<T: Scalar>(a: &SignalSet<T>, b: &SignalSet<T>) -> Result<()> {
    if a.n_vertices() != b.n_vertices() {
        return Err(Error::DimensionMismatch {
            what: "vertex count between signal sets",
            expected: a.n_vertices(),
            actual: b.n_vertices(),
        });
    }
    Ok(())
}

/// Least-squares line `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn affine_fit(x: &[f64], y: &[f64]) -> Result<AffineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidArgument("affine fit needs at least two paired points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("affine fit needs distinct x values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(AffineFit {
        slope,
        intercept,
        r_squared,
    })
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len().is_multiple_of(2) { 0.5 * (v[m - 1] + v[m]) } else { v[m] })
}
