//! Oracles shared by the integration tests. None of these reuse library
//! numerics beyond mesh loading and operator assembly.

#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;
use surfaug::mesh::{load_mesh, make_synthetic, MeshFormat, SyntheticKind, TriMesh};
use surfaug::{FilterBank, LbOperator64, TriMesh64};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn fixture(name: &str) -> TriMesh64 {
    let path = data_path(name);
    let format = MeshFormat::from_path(&path).unwrap();
    load_mesh(&path, format).unwrap()
}

pub fn reference() -> serde_json::Value {
    let text = std::fs::read_to_string(data_path("icosphere2_reference.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

pub fn synthetic(kind: SyntheticKind) -> TriMesh<f64> {
    make_synthetic(kind).unwrap()
}

pub fn operator(mesh: &TriMesh64) -> LbOperator64 {
    let mut op = LbOperator64::assemble(mesh).unwrap();
    op.spectral_radius(1e-10).unwrap();
    op
}

/// Dense generalized eigenpairs of `C ψ = λ A ψ` via nalgebra on
/// `A^{-1/2} C A^{-1/2}`, sorted ascending; vectors are A-orthonormal columns.
pub struct DenseOracle {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
    pub areas: Vec<f64>,
}

pub fn dense_oracle(op: &LbOperator64) -> DenseOracle {
    let n = op.n_vertices();
    let a = op.areas().to_vec();
    let mut b = DMatrix::<f64>::zeros(n, n);
    for (r, c, v) in op.stiffness().iter() {
        b[(r, c)] = v / (a[r] * a[c]).sqrt();
    }
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])] / a[r].sqrt());
    DenseOracle {
        values,
        vectors,
        areas: a,
    }
}

impl DenseOracle {
    /// Filter each row of `signals` channel by channel with exact spectral
    /// responses: mean first (if the bank has one), then
    /// `Σ_j g_l(λ̃_j) c_j ψ_j` on the mean-free signal.
    pub fn filter(&self, bank: &FilterBank, lambda: f64, f: &[f64]) -> Array2<f64> {
        let n = f.len();
        let total: f64 = self.areas.iter().sum();
        let mean = f.iter().zip(&self.areas).map(|(x, a)| x * a).sum::<f64>() / total;
        let centered: Vec<f64> = f.iter().map(|x| x - if bank.include_mean() { mean } else { 0.0 }).collect();
        let coeffs: Vec<f64> = (0..n)
            .map(|j| (0..n).map(|v| self.areas[v] * centered[v] * self.vectors[(v, j)]).sum())
            .collect();
        let offset = usize::from(bank.include_mean());
        let mut out = Array2::zeros((bank.n_channels(), n));
        if bank.include_mean() {
            out.row_mut(0).fill(mean);
        }
        for l in 0..bank.n_bands() {
            for j in 0..n {
                let g = bank.response(l, 2.0 * self.values[j] / lambda - 1.0);
                let w = g * coeffs[j];
                for v in 0..n {
                    out[[l + offset, v]] += w * self.vectors[(v, j)];
                }
            }
        }
        out
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// `(2 − δ_k0)/π ∫_a^b T_k(x) / √(1 − x²) dx` for all `k < order`, by
/// adaptive composite Gauss–Legendre in `x`. Panels start about one local
/// oscillation wide and are bisected until a panel and its two halves agree
/// to `tol` for every `k`.
pub fn quadrature_coefficients(a: f64, b: f64, order: usize, tol: f64) -> Vec<f64> {
    let rule = gauss_legendre(20);
    let mut total = vec![0.0; order];
    let mut x = a;
    while x < b {
        let local = order as f64 / (1.0 - x * x).sqrt();
        let h = (2.0 * std::f64::consts::PI / local).min(b - x);
        let whole = panel(&rule, x, x + h, order);
        adapt(&rule, x, x + h, order, whole, tol, 0, &mut total);
        x += h;
    }
    for (k, t) in total.iter_mut().enumerate() {
        *t *= if k == 0 { 1.0 } else { 2.0 } / std::f64::consts::PI;
    }
    total
}

fn panel(rule: &(Vec<f64>, Vec<f64>), a: f64, b: f64, order: usize) -> Vec<f64> {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut acc = vec![0.0; order];
    for (t, w) in rule.0.iter().zip(&rule.1) {
        let x = mid + half * t;
        let scale = w * half / (1.0 - x * x).sqrt();
        let (mut prev, mut cur) = (1.0, x);
        acc[0] += scale;
        if order > 1 {
            acc[1] += scale * x;
        }
        for slot in acc.iter_mut().skip(2) {
            let next = 2.0 * x * cur - prev;
            prev = cur;
            cur = next;
            *slot += scale * cur;
        }
    }
    acc
}

#[allow(clippy::too_many_arguments)]
fn adapt(
    rule: &(Vec<f64>, Vec<f64>),
    a: f64,
    b: f64,
    order: usize,
    whole: Vec<f64>,
    tol: f64,
    depth: usize,
    total: &mut [f64],
) {
    let m = 0.5 * (a + b);
    let left = panel(rule, a, m, order);
    let right = panel(rule, m, b, order);
    let err = whole
        .iter()
        .zip(left.iter().zip(&right))
        .map(|(w, (l, r))| (w - l - r).abs())
        .fold(0.0, f64::max);
    if err <= tol || depth >= 30 {
        for (t, (l, r)) in total.iter_mut().zip(left.iter().zip(&right)) {
            *t += l + r;
        }
    } else {
        adapt(rule, a, m, order, left, tol / 2.0, depth + 1, total);
        adapt(rule, m, b, order, right, tol / 2.0, depth + 1, total);
    }
}

/// Deterministic pseudo-random signals, `n × v`.
pub fn test_signals(n: usize, v: usize, seed: u64) -> Array2<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((n, v), |_| rng.random_range(-1.0..1.0))
}
