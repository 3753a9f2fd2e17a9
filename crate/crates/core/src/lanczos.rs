//! Lanczos iterations for symmetric operators given as closures.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dense::{sym_eigen, sym_eigenvalues};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const START_SEED: u64 = 0x1b_5eed;

fn random_vector<T: Scalar>(n: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    (0..n)
        .map(|_| {
            let x: f64 = StandardNormal.sample(rng);
            T::of(x)
        })
        .collect()
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * *xi;
    }
}

fn tridiagonal(alpha: &[f64], beta: &[f64]) -> Mat<f64> {
    let m = alpha.len();
    Mat::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i == j + 1 {
            beta[j]
        } else if j == i + 1 {
            beta[i]
        } else {
            0.0
        }
    })
}

/// Largest eigenvalue of a symmetric operator of dimension `n`.
///
/// Lanczos with full reorthogonalization; stops once the top Ritz value's
/// residual bound `β_m |y_m|` falls below `tol · θ`.
pub(crate) fn largest_eigenvalue<T: Scalar>(
    n: usize,
    mut apply: impl FnMut(&[T], &mut [T]),
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut q: Vec<T> = random_vector(n, &mut rng);
    let norm = dot(&q, &q).sqrt();
    q.iter_mut().for_each(|x| *x /= norm);

    let mut basis: Vec<Vec<T>> = Vec::new();
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![T::zero(); n];
    let cap = max_iter.min(n);
    let (mut theta, mut residual) = (0.0, f64::INFINITY);
    for m in 1..=cap {
        apply(&q, &mut w);
        let a = dot(&q, &w);
        axpy(-a, &q, &mut w);
        if let Some(prev) = basis.last() {
            axpy(-T::of(*beta.last().expect("beta follows basis")), prev, &mut w);
        }
        basis.push(q.clone());
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                axpy(-c, v, &mut w);
            }
        }
        alpha.push(a.as_f64());
        let b = dot(&w, &w).sqrt().as_f64();
        let breakdown = b <= 1e-12 * alpha.iter().fold(0.0f64, |s, x| s.max(x.abs())).max(1e-300);

        if m % 4 == 0 || m == cap || breakdown {
            let evd = sym_eigen(&tridiagonal(&alpha, &beta))?;
            let top = m - 1;
            theta = evd.values[top];
            residual = if breakdown { 0.0 } else { b * evd.vectors[(m - 1, top)].abs() };
            if residual <= tol * theta.abs() {
                return Ok(theta);
            }
        }
        if breakdown {
            break;
        }
        beta.push(b);
        q = w.iter().map(|x| *x / T::of(b)).collect();
    }
    Err(Error::NonConvergence {
        what: "Lanczos largest-eigenvalue estimate",
        iterations: alpha.len(),
        estimate: theta,
        residual,
    })
}

/// Orthonormalize the columns of `block` (already orthogonal to `basis` up
/// to roundoff) among themselves. Columns that vanish are replaced with
/// random directions orthogonalized against `basis` and earlier columns.
fn orthonormalize_block(basis: MatRef<'_, f64>, block: &mut Mat<f64>, rng: &mut ChaCha8Rng) {
    let (n, b) = (block.nrows(), block.ncols());
    let scale = (0..b)
        .map(|j| block.col_as_slice(j).iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(f64::MIN_POSITIVE, f64::max);
    for j in 0..b {
        for _ in 0..2 {
            for i in 0..j {
                let qi = block.col_as_slice(i).to_vec();
                let col = block.col_as_slice_mut(j);
                let c = dot(&qi, col);
                axpy(-c, &qi, col);
            }
        }
        let norm = dot(block.col_as_slice(j), block.col_as_slice(j)).sqrt();
        if norm > 1e-10 * scale {
            block.col_as_slice_mut(j).iter_mut().for_each(|x| *x /= norm);
            continue;
        }
        // deflated: any unit vector orthogonal to everything so far will do
        let mut fresh = Mat::from_fn(n, 1, |_, _| StandardNormal.sample(rng));
        for _ in 0..2 {
            if basis.ncols() > 0 {
                let c = basis.transpose() * fresh.as_ref();
                matmul(fresh.as_mut(), Accum::Add, basis, c.as_ref(), -1.0, Par::Seq);
            }
            for i in 0..j {
                let qi = block.col_as_slice(i).to_vec();
                let col = fresh.col_as_slice_mut(0);
                let c = dot(&qi, col);
                axpy(-c, &qi, col);
            }
        }
        let nf = dot(fresh.col_as_slice(0), fresh.col_as_slice(0)).sqrt();
        for (dst, src) in block.col_as_slice_mut(j).iter_mut().zip(fresh.col_as_slice(0)) {
            *dst = src / nf;
        }
    }
}

/// Outcome of [`block_lanczos_top`].
pub(crate) struct RitzPairs {
    /// Ritz values, nonincreasing.
    pub values: Vec<f64>,
    /// Ritz vectors as columns, `n × count`.
    pub vectors: Mat<f64>,
    pub krylov_dim: usize,
}

/// Largest `count` eigenpairs of a symmetric operator by block Lanczos with
/// full reorthogonalization.
///
/// `apply_block` maps an `n × b` block to `op · block`. The Krylov space grows
/// until every wanted Ritz pair has residual bound `≤ tol · |θ_i|`; it is
/// capped at `n`, where the projection is exact. The first convergence check
/// happens once the space reaches `min_dim` columns.
pub(crate) fn block_lanczos_top(
    n: usize,
    count: usize,
    block_size: usize,
    mut apply_block: impl FnMut(MatRef<'_, f64>) -> Mat<f64>,
    tol: f64,
    seed: u64,
    min_dim: usize,
) -> Result<RitzPairs> {
    assert!(count >= 1 && count <= n);
    let b = block_size.clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = Mat::from_fn(n, b, |_, _| StandardNormal.sample(&mut rng));
    orthonormalize_block(Mat::<f64>::zeros(n, 0).as_ref(), &mut current, &mut rng);

    let mut next_check = (count + count / 4 + 4 * b).max(min_dim).div_ceil(b) * b;
    let mut cap = (next_check + 2 * b).min(n);
    let mut basis = Mat::<f64>::zeros(n, cap);
    // projected matrix QᵀOpQ
    let mut tmat = Mat::<f64>::zeros(cap, cap);
    let mut dim = 0usize;

    loop {
        let cols = current.ncols();
        if dim + cols > cap {
            cap = ((cap * 3) / 2).max(dim + cols).min(n);
            let mut bigger = Mat::<f64>::zeros(n, cap);
            bigger.as_mut().subcols_mut(0, dim).copy_from(basis.as_ref().subcols(0, dim));
            basis = bigger;
            let mut t = Mat::<f64>::zeros(cap, cap);
            t.as_mut().submatrix_mut(0, 0, dim, dim).copy_from(tmat.as_ref().submatrix(0, 0, dim, dim));
            tmat = t;
        }
        basis.as_mut().subcols_mut(dim, cols).copy_from(current.as_ref());
        let mut w = apply_block(current.as_ref());
        let q = basis.as_ref().subcols(0, dim + cols);
        // Qᵀ W is both the new column block of T and the first Gram-Schmidt pass
        let coef = q.transpose() * w.as_ref();
        for j in 0..cols {
            for i in 0..dim + cols {
                tmat[(i, dim + j)] = coef[(i, j)];
                tmat[(dim + j, i)] = coef[(i, j)];
            }
        }
        for i in 0..cols {
            for j in 0..i {
                let avg = 0.5 * (coef[(dim + i, j)] + coef[(dim + j, i)]);
                tmat[(dim + i, dim + j)] = avg;
                tmat[(dim + j, dim + i)] = avg;
            }
        }
        matmul(w.as_mut(), Accum::Add, q, coef.as_ref(), -1.0, Par::Seq);
        let c2 = q.transpose() * w.as_ref();
        matmul(w.as_mut(), Accum::Add, q, c2.as_ref(), -1.0, Par::Seq);
        dim += cols;

        let exhausted = dim >= n;
        if dim >= next_check.min(n) || exhausted {
            let m = dim;
            let evd = sym_eigen(&tmat.as_ref().submatrix(0, 0, m, m).to_owned())?;
            let mut converged = true;
            if !exhausted {
                // ‖(I − QQᵀ) Op Q y‖ only involves the last block's rows of y
                let tail = Mat::from_fn(cols, count, |i, j| evd.vectors[(m - cols + i, m - 1 - j)]);
                let res = w.as_ref() * tail.as_ref();
                converged = (0..count).all(|j| {
                    let r = res.col_as_slice(j).iter().map(|x| x * x).sum::<f64>().sqrt();
                    r <= tol * evd.values[m - 1 - j].abs()
                });
            }
            if exhausted || converged {
                let y = Mat::from_fn(m, count, |i, j| evd.vectors[(i, m - 1 - j)]);
                let vectors = basis.as_ref().subcols(0, m) * y.as_ref();
                let values = (0..count).map(|j| evd.values[m - 1 - j]).collect();
                return Ok(RitzPairs {
                    values,
                    vectors,
                    krylov_dim: m,
                });
            }
            next_check = ((dim as f64 * 1.25) as usize).div_ceil(b) * b;
        }
        let remaining = n - dim;
        if remaining < cols {
            w = w.as_ref().subcols(0, remaining).to_owned();
        }
        orthonormalize_block(basis.as_ref().subcols(0, dim), &mut w, &mut rng);
        current = w;
    }
}

/// Eigenvalues of a small dense symmetric matrix, nondecreasing (test helper and diagnostics).
#[allow(dead_code)]
pub(crate) fn dense_eigenvalues(rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = rows.len();
    sym_eigenvalues(&Mat::from_fn(n, n, |i, j| rows[i][j]))
}
