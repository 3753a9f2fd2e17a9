//! Generalized eigenbasis of the LB operator and the spectral transforms.
//!
//! Eigenvectors are `A`-orthonormal (`ψ_jᵀ A ψ_k = δ_jk`), so the coefficient
//! of `f` on `ψ_j` is the area-weighted projection `c_j = Σ_v A_v f(v) ψ_j(v)`.
//!
//! Binary export layout (little-endian):
//!
//! ```text
//! offset   size    field
//! 0        8       magic "LBEIGEN1"
//! 8        8       V (u64)
//! 16       8       J (u64)
//! 24       8·J     eigenvalues λ_0..λ_{J-1} (f64)
//! ...      8·V·J   eigenvectors, column-major (ψ_0 first) (f64)
//! ...      8·V     vertex areas (f64)
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use faer::{Mat, MatRef};
use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;

use crate::dense::sym_eigen;
use crate::error::{Error, Result};
use crate::lanczos::block_lanczos_top;
use crate::operator::LbOperator;
use crate::scalar::Scalar;
use crate::signal::{read_exact, read_u64, SignalSet};
use crate::sparse::SkylineLdlt;

pub const EIGEN_MAGIC: &[u8; 8] = b"LBEIGEN1";

/// Largest vertex count routed to the dense solver by [`EigenSolver::Auto`].
pub const DENSE_MAX_VERTICES: usize = 2000;

const LANCZOS_BLOCK: usize = 16;
const LANCZOS_TOL: f64 = 1e-10;
const LANCZOS_SEED: u64 = 0x00e1_9e45;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenSolver {
    /// Dense for `V ≤ DENSE_MAX_VERTICES`, shift-invert block Lanczos above.
    #[default]
    Auto,
    Dense,
    Lanczos,
}

/// First `J` eigenpairs of `C ψ = λ A ψ`, nondecreasing in `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBasis<T> {
    eigenvalues: Vec<T>,
    /// `V × J`, column `j` is `ψ_j`.
    eigenvectors: Array2<T>,
    areas: Vec<T>,
}

/// `n × J` matrix of coefficients, entry `(i, j) = c_j` of observation `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoeffs<T>(pub Array2<T>);

impl<T: Scalar> SpectralCoeffs<T> {
    pub fn n_observations(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_modes(&self) -> usize {
        self.0.ncols()
    }
}

impl<T: Scalar> EigenBasis<T> {
    pub fn eigendecompose(op: &LbOperator<T>, count: usize) -> Result<Self> {
        Self::eigendecompose_with(op, count, EigenSolver::Auto)
    }

    pub fn eigendecompose_with(op: &LbOperator<T>, count: usize, solver: EigenSolver) -> Result<Self> {
        let n = op.n_vertices();
        if count == 0 || count > n {
            return Err(Error::InvalidArgument(format!(
                "requested {count} eigenpairs of a {n}-vertex operator"
            )));
        }
        let dense = match solver {
            EigenSolver::Auto => n <= DENSE_MAX_VERTICES,
            EigenSolver::Dense => true,
            EigenSolver::Lanczos => false,
        };
        let (values, vectors) = if dense {
            dense_pairs(op, count)?
        } else {
            lanczos_pairs(op, count)?
        };
        let mut basis = EigenBasis {
            eigenvalues: values,
            eigenvectors: vectors,
            areas: op.areas().to_vec(),
        };
        basis.fix_signs();
        Ok(basis)
    }

    /// Assemble from parts, checking shapes.
    pub fn from_parts(eigenvalues: Vec<T>, eigenvectors: Array2<T>, areas: Vec<T>) -> Result<Self> {
        if eigenvectors.ncols() != eigenvalues.len() {
            return Err(Error::DimensionMismatch {
                what: "eigenvector columns vs eigenvalues",
                expected: eigenvalues.len(),
                actual: eigenvectors.ncols(),
            });
        }
        if eigenvectors.nrows() != areas.len() {
            return Err(Error::DimensionMismatch {
                what: "eigenvector rows vs areas",
                expected: areas.len(),
                actual: eigenvectors.nrows(),
            });
        }
        Ok(EigenBasis {
            eigenvalues,
            eigenvectors,
            areas,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.eigenvectors.nrows()
    }

    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> ArrayView2<'_, T> {
        self.eigenvectors.view()
    }

    pub fn areas(&self) -> &[T] {
        &self.areas
    }

    /// Keep only the first `count` modes.
    pub fn truncated(&self, count: usize) -> Result<Self> {
        if count == 0 || count > self.n_modes() {
            return Err(Error::InvalidArgument(format!(
                "cannot truncate {} modes to {count}",
                self.n_modes()
            )));
        }
        Ok(EigenBasis {
            eigenvalues: self.eigenvalues[..count].to_vec(),
            eigenvectors: self.eigenvectors.slice(ndarray::s![.., ..count]).to_owned(),
            areas: self.areas.clone(),
        })
    }

    /// Flip each `ψ_j` so its largest-magnitude entry is positive (first such entry on ties).
    fn fix_signs(&mut self) {
        for mut col in self.eigenvectors.axis_iter_mut(Axis(1)) {
            let peak = col.iter().fold(T::zero(), |m, x| m.max(x.abs()));
            let tie = peak * (T::one() - T::of(1e-9));
            if let Some(first) = col.iter().find(|x| x.abs() >= tie) {
                if *first < T::zero() {
                    col.mapv_inplace(|x| -x);
                }
            }
        }
    }

    /// `c_j^{(i)} = Σ_v A_v f_i(v) ψ_j(v)`.
    pub fn forward(&self, signals: &SignalSet<T>) -> Result<SpectralCoeffs<T>> {
        self.forward_matrix(signals.data().view())
    }

    pub fn forward_matrix(&self, data: ArrayView2<T>) -> Result<SpectralCoeffs<T>> {
        if data.ncols() != self.n_vertices() {
            return Err(Error::DimensionMismatch {
                what: "signal vertices vs eigenbasis",
                expected: self.n_vertices(),
                actual: data.ncols(),
            });
        }
        let mut weighted = data.to_owned();
        for mut row in weighted.axis_iter_mut(Axis(0)) {
            for (x, a) in row.iter_mut().zip(&self.areas) {
                *x *= *a;
            }
        }
        Ok(SpectralCoeffs(weighted.dot(&self.eigenvectors)))
    }

    /// `f_i(v) = Σ_j c_j^{(i)} ψ_j(v)`; returns the `n × V` matrix.
    pub fn inverse(&self, coeffs: &SpectralCoeffs<T>) -> Result<Array2<T>> {
        if coeffs.n_modes() != self.n_modes() {
            return Err(Error::DimensionMismatch {
                what: "coefficient width vs eigenbasis modes",
                expected: self.n_modes(),
                actual: coeffs.n_modes(),
            });
        }
        Ok(coeffs.0.dot(&self.eigenvectors.t()))
    }

    pub fn write_binary<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(EIGEN_MAGIC)?;
        w.write_all(&(self.n_vertices() as u64).to_le_bytes())?;
        w.write_all(&(self.n_modes() as u64).to_le_bytes())?;
        for l in &self.eigenvalues {
            w.write_all(&l.as_f64().to_le_bytes())?;
        }
        for col in self.eigenvectors.axis_iter(Axis(1)) {
            for x in col {
                w.write_all(&x.as_f64().to_le_bytes())?;
            }
        }
        for a in &self.areas {
            w.write_all(&a.as_f64().to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 8];
        read_exact(r, &mut magic)?;
        if &magic != EIGEN_MAGIC {
            return Err(Error::Format {
                format: "LBEIGEN1",
                message: "bad magic".into(),
            });
        }
        let v = read_u64(r)? as usize;
        let j = read_u64(r)? as usize;
        let mut next = || -> Result<T> {
            let mut b = [0u8; 8];
            read_exact(r, &mut b)?;
            Ok(T::of(f64::from_le_bytes(b)))
        };
        let eigenvalues = (0..j).map(|_| next()).collect::<Result<Vec<_>>>()?;
        let mut vectors = Array2::<T>::zeros((v, j));
        for c in 0..j {
            for r in 0..v {
                vectors[[r, c]] = next()?;
            }
        }
        let areas = (0..v).map(|_| next()).collect::<Result<Vec<_>>>()?;
        Self::from_parts(eigenvalues, vectors, areas)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(f);
        self.write_binary(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_binary(&mut BufReader::new(f))
    }
}

/// All eigenpairs of `A^{-1/2} C A^{-1/2}`, mapped back by `ψ = A^{-1/2} u`.
fn dense_pairs<T: Scalar>(op: &LbOperator<T>, count: usize) -> Result<(Vec<T>, Array2<T>)> {
    let n = op.n_vertices();
    let inv_sqrt: Vec<f64> = op.areas().iter().map(|a| 1.0 / a.as_f64().sqrt()).collect();
    let mut b = Mat::<f64>::zeros(n, n);
    for (r, c, v) in op.stiffness().iter() {
        b[(r, c)] = v.as_f64() * inv_sqrt[r] * inv_sqrt[c];
    }
    let evd = sym_eigen(&b)?;
    // C is positive semidefinite: negative values are roundoff around λ₀ = 0
    let values = evd.values[..count].iter().map(|&l| T::of(l.max(0.0))).collect();
    let vectors = Array2::from_shape_fn((n, count), |(i, j)| T::of(evd.vectors[(i, j)] * inv_sqrt[i]));
    Ok((values, vectors))
}

/// Shift-invert block Lanczos on `A^{1/2} (C + sA)^{-1} A^{1/2}`, whose
/// largest eigenvalues `1/(λ + s)` belong to the smallest `λ`.
///
/// Completeness is confirmed by the inertia of `C − μA` with `μ` in the first
/// gap past the wanted pairs; a cluster straddling the cut asks for more
/// pairs, a count mismatch for a larger Krylov space.
fn lanczos_pairs<T: Scalar>(op: &LbOperator<T>, count: usize) -> Result<(Vec<T>, Array2<T>)> {
    let n = op.n_vertices();
    let areas = op.areas();
    let sqrt_a: Vec<T> = areas.iter().map(|a| a.sqrt()).collect();
    let c = op.stiffness();
    // Gershgorin bound on λ_max
    let bound = (0..n)
        .map(|i| T::of(2.0) * c.get(i, i) / areas[i])
        .fold(T::zero(), |m, x| m.max(x));
    let shift = bound * T::of(1e-2) / T::of_usize(n);
    let shifted: Vec<T> = areas.iter().map(|a| *a * shift).collect();
    let factor = SkylineLdlt::factor(c, &shifted)?;

    let mut wanted = (count + LANCZOS_BLOCK).min(n);
    let mut min_dim = 0;
    loop {
        let pairs = block_lanczos_top(
            n,
            wanted,
            LANCZOS_BLOCK,
            |block: MatRef<'_, f64>| {
                let cols: Vec<Vec<T>> = (0..block.ncols())
                    .into_par_iter()
                    .map(|j| {
                        let mut x: Vec<T> = (0..n).map(|i| T::of(block[(i, j)]) * sqrt_a[i]).collect();
                        factor.solve_in_place(&mut x);
                        x.iter_mut().zip(&sqrt_a).for_each(|(v, s)| *v *= *s);
                        x
                    })
                    .collect();
                Mat::from_fn(n, cols.len(), |i, j| cols[j][i].as_f64())
            },
            LANCZOS_TOL,
            LANCZOS_SEED,
            min_dim,
        )?;

        let mut lambdas: Vec<f64> = pairs.values.iter().map(|t| 1.0 / t - shift.as_f64()).collect();
        let mut vectors = Array2::from_shape_fn((n, wanted), |(i, j)| T::of(pairs.vectors[(i, j)]));
        for (j, mut col) in vectors.axis_iter_mut(Axis(1)).enumerate() {
            for (x, s) in col.iter_mut().zip(&sqrt_a) {
                *x /= *s;
            }
            // Rayleigh quotient with A-normalization
            let psi: Vec<T> = col.to_vec();
            let mut cpsi = vec![T::zero(); n];
            c.mul_vec(&psi, &mut cpsi);
            let num: f64 = psi.iter().zip(&cpsi).map(|(a, b)| (*a * *b).as_f64()).sum();
            let den: f64 = psi.iter().zip(areas).map(|(x, a)| (*x * *x * *a).as_f64()).sum();
            lambdas[j] = (num / den).max(0.0);
            let norm = T::of(den.sqrt());
            col.mapv_inplace(|x| x / norm);
        }

        // refinement can swap members of a cluster by roundoff
        let mut order: Vec<usize> = (0..lambdas.len()).collect();
        order.sort_by(|&a, &b| lambdas[a].total_cmp(&lambdas[b]));
        let lambdas: Vec<f64> = order.iter().map(|&i| lambdas[i]).collect();
        let vectors = vectors.select(Axis(1), &order);

        let check = if wanted == n {
            Inertia::Confirmed
        } else {
            inertia_check(op, &lambdas, count)?
        };
        match check {
            Inertia::Confirmed => {
                let values = lambdas[..count].iter().map(|&l| T::of(l)).collect();
                let vectors = vectors.slice(ndarray::s![.., ..count]).to_owned();
                return Ok((values, vectors));
            }
            Inertia::NoGap => {
                wanted = (wanted + LANCZOS_BLOCK).min(n);
            }
            Inertia::Missing => {
                if pairs.krylov_dim >= n {
                    return Err(Error::NonConvergence {
                        what: "shift-invert Lanczos eigenbasis (inertia check)",
                        iterations: pairs.krylov_dim,
                        estimate: lambdas[count - 1],
                        residual: f64::NAN,
                    });
                }
                min_dim = (pairs.krylov_dim * 3 / 2).min(n);
            }
        }
    }
}

enum Inertia {
    Confirmed,
    /// The Ritz values after the cut never separate; more pairs are needed.
    NoGap,
    /// Sylvester's count disagrees: some eigenvalue was skipped.
    Missing,
}

/// Place `μ` in the first spectral gap at or after the cut below `count`
/// and compare the number of Ritz values below it with the inertia of
/// `C − μA`.
fn inertia_check<T: Scalar>(op: &LbOperator<T>, lambdas: &[f64], count: usize) -> Result<Inertia> {
    let scale = lambdas.last().map_or(1.0, |l| l.abs()).max(1e-300);
    let Some(gap) = (count..lambdas.len()).find(|&m| lambdas[m] - lambdas[m - 1] > 1e-6 * scale) else {
        return Ok(Inertia::NoGap);
    };
    let mu = 0.5 * (lambdas[gap - 1] + lambdas[gap]);
    let shift: Vec<T> = op.areas().iter().map(|a| -*a * T::of(mu)).collect();
    match SkylineLdlt::factor(op.stiffness(), &shift) {
        Ok(f) if f.negative_pivots() == gap => Ok(Inertia::Confirmed),
        Ok(_) | Err(Error::Singular(_)) => Ok(Inertia::Missing),
        Err(e) => Err(e),
    }
}
