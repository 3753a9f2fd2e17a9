//! Cotangent Laplace-Beltrami operator on a triangle mesh.
//!
//! The operator is kept in generalized form `Δ = A⁻¹ C`: `C` is the symmetric
//! cotangent stiffness matrix and `A` the diagonal of mixed vertex areas.
//! Eigenpairs solve `C ψ = λ A ψ`, so `0 = λ₀ ≤ λ₁ ≤ …`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::lanczos::largest_eigenvalue;
use crate::mesh::{cross, dot, sub, TriMesh};
use crate::scalar::Scalar;
use crate::sparse::CsrMatrix;

/// Relative headroom added to `λ_max` before normalizing, so the normalized
/// spectrum lies strictly inside `[-1, 1]`.
pub const DEFAULT_NORMALIZATION_MARGIN: f64 = 0.01;

/// Iteration cap for the largest-eigenvalue estimate.
pub const SPECTRAL_RADIUS_MAX_ITER: usize = 600;

#[derive(Debug, Clone, PartialEq)]
pub struct LbOperator<T> {
    stiffness: CsrMatrix<T>,
    areas: Vec<T>,
    lambda_max: Option<T>,
}

impl<T: Scalar> LbOperator<T> {
    /// Assemble `C` (cotangent weights) and `A` (mixed Voronoi areas).
    ///
    /// Off-diagonal `C_ij = -(cot α + cot β)/2` over the one or two triangles
    /// sharing edge `ij`, `C_ii = -Σ_j C_ij`. A corner of a non-obtuse
    /// triangle receives its Voronoi share; in an obtuse triangle the obtuse
    /// corner receives half the area and the other two a quarter each.
    pub fn assemble(mesh: &TriMesh<T>) -> Result<Self> {
        let n = mesh.n_vertices();
        let half = T::of(0.5);
        let quarter = T::of(0.25);
        let eighth = T::of(0.125);
        let mut off = Vec::with_capacity(mesh.n_triangles() * 6);
        let mut areas = vec![T::zero(); n];

        for (t, tri) in mesh.triangles().iter().enumerate() {
            let p = tri.map(|i| mesh.vertices()[i]);
            let double_area = {
                let c = cross(sub(p[1], p[0]), sub(p[2], p[0]));
                dot(c, c).sqrt()
            };
            let area = double_area * half;
            if !(area.as_f64() > crate::mesh::MIN_TRIANGLE_AREA) {
                return Err(Error::DegenerateTriangle {
                    triangle: t,
                    area: area.as_f64(),
                });
            }
            // corner k sits opposite edge (k+1, k+2)
            let mut cot = [T::zero(); 3];
            let mut obtuse_at = None;
            for k in 0..3 {
                let e1 = sub(p[(k + 1) % 3], p[k]);
                let e2 = sub(p[(k + 2) % 3], p[k]);
                let d = dot(e1, e2);
                cot[k] = d / double_area;
                if d < T::zero() {
                    obtuse_at = Some(k);
                }
            }
            for k in 0..3 {
                let (i, j) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                let w = -cot[k] * half;
                off.push((i, j, w));
                off.push((j, i, w));
            }
            for k in 0..3 {
                let share = match obtuse_at {
                    None => {
                        // corner k: edges to k+1 and k+2, weighted by the cotangents opposite them
                        let e_next = sub(p[(k + 1) % 3], p[k]);
                        let e_prev = sub(p[(k + 2) % 3], p[k]);
                        (dot(e_next, e_next) * cot[(k + 2) % 3] + dot(e_prev, e_prev) * cot[(k + 1) % 3])
                            * eighth
                    }
                    Some(o) if o == k => area * half,
                    Some(_) => area * quarter,
                };
                areas[tri[k]] += share;
            }
        }

        let offdiag = CsrMatrix::from_triplets(n, n, &off);
        let mut triplets: Vec<(usize, usize, T)> = offdiag.iter().collect();
        for (i, s) in offdiag.row_sums().into_iter().enumerate() {
            triplets.push((i, i, -s));
        }
        let stiffness = CsrMatrix::from_triplets(n, n, &triplets);
        Ok(LbOperator {
            stiffness,
            areas,
            lambda_max: None,
        })
    }

    /// Rebuild from stored parts (e.g. after import); validates shapes and positivity.
    pub fn from_parts(stiffness: CsrMatrix<T>, areas: Vec<T>, lambda_max: Option<T>) -> Result<Self> {
        if stiffness.nrows() != stiffness.ncols() || stiffness.nrows() != areas.len() {
            return Err(Error::DimensionMismatch {
                what: "stiffness rows vs areas",
                expected: stiffness.nrows(),
                actual: areas.len(),
            });
        }
        if let Some(i) = areas.iter().position(|a| !(*a > T::zero())) {
            return Err(Error::InvalidArgument(format!("area of vertex {i} is not positive")));
        }
        Ok(LbOperator {
            stiffness,
            areas,
            lambda_max,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.areas.len()
    }

    pub fn stiffness(&self) -> &CsrMatrix<T> {
        &self.stiffness
    }

    pub fn areas(&self) -> &[T] {
        &self.areas
    }

    pub fn total_area(&self) -> T {
        self.areas.iter().copied().sum()
    }

    pub fn lambda_max(&self) -> Option<T> {
        self.lambda_max
    }

    /// `y = Δ x = A⁻¹ C x`.
    pub fn apply(&self, x: &[T], y: &mut [T]) {
        self.stiffness.mul_vec(x, y);
        for (yi, a) in y.iter_mut().zip(&self.areas) {
            *yi /= *a;
        }
    }

    /// Estimate `λ_max` of `C ψ = λ A ψ` to relative tolerance `tol ∈ (0, 1e-2]` and store it.
    ///
    /// Works on the similar symmetric matrix `A^{-1/2} C A^{-1/2}`.
    pub fn spectral_radius(&mut self, tol: T) -> Result<T> {
        let tol = tol.as_f64();
        if !(tol > 0.0 && tol <= 1e-2) {
            return Err(Error::InvalidArgument(format!(
                "spectral radius tolerance {tol:e} outside (0, 1e-2]"
            )));
        }
        let inv_sqrt: Vec<T> = self.areas.iter().map(|a| a.sqrt().recip()).collect();
        let mut scratch = vec![T::zero(); self.n_vertices()];
        let lambda = largest_eigenvalue(
            self.n_vertices(),
            |x: &[T], y: &mut [T]| {
                for ((s, xi), w) in scratch.iter_mut().zip(x).zip(&inv_sqrt) {
                    *s = *xi * *w;
                }
                self.stiffness.mul_vec(&scratch, y);
                for (yi, w) in y.iter_mut().zip(&inv_sqrt) {
                    *yi *= *w;
                }
            },
            tol,
            SPECTRAL_RADIUS_MAX_ITER,
        )?;
        let lambda = T::of(lambda);
        self.lambda_max = Some(lambda);
        Ok(lambda)
    }

    /// Record a known `λ_max` (e.g. from a dense eigensolve or a saved summary).
    pub fn set_lambda_max(&mut self, lambda: T) -> Result<()> {
        if !(lambda > T::zero()) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("lambda_max {lambda} must be positive")));
        }
        self.lambda_max = Some(lambda);
        Ok(())
    }

    /// `Δ̃ = 2Δ/λ − I` with `λ = λ_max · (1 + DEFAULT_NORMALIZATION_MARGIN)`.
    pub fn normalize(&self) -> Result<NormalizedOperator<'_, T>> {
        self.normalize_with_margin(T::of(DEFAULT_NORMALIZATION_MARGIN))
    }

    /// `Δ̃ = 2Δ/λ − I` with `λ = λ_max · (1 + margin)`; `margin = 0` is the bare normalization.
    pub fn normalize_with_margin(&self, margin: T) -> Result<NormalizedOperator<'_, T>> {
        let lambda_max = self
            .lambda_max
            .ok_or_else(|| Error::InvalidArgument("lambda_max has not been computed".into()))?;
        let scale = lambda_max * (T::one() + margin);
        if !(scale > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "normalization constant {scale} must be positive"
            )));
        }
        let two = T::of(2.0);
        Ok(NormalizedOperator {
            op: self,
            lambda: scale,
            row_scale: self.areas.iter().map(|a| two / (scale * *a)).collect(),
        })
    }

    /// Coordinate-list export: one `row col value` line per stored entry.
    pub fn write_coo<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "# {} {} {}", self.n_vertices(), self.n_vertices(), self.stiffness.nnz())?;
        for (r, c, v) in self.stiffness.iter() {
            writeln!(w, "{r} {c} {v}")?;
        }
        Ok(())
    }

    /// `vertex,area` CSV.
    pub fn write_areas_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "vertex,area")?;
        for (i, a) in self.areas.iter().enumerate() {
            writeln!(w, "{i},{a}")?;
        }
        Ok(())
    }
}

/// Borrowed view applying `Δ̃ x = (2/λ) A⁻¹ C x − x` without forming `A⁻¹C`.
#[derive(Debug, Clone)]
pub struct NormalizedOperator<'a, T> {
    op: &'a LbOperator<T>,
    lambda: T,
    row_scale: Vec<T>,
}

impl<'a, T: Scalar> NormalizedOperator<'a, T> {
    pub fn n_vertices(&self) -> usize {
        self.row_scale.len()
    }

    /// The constant `λ` the spectrum was mapped against; filter banks must be designed on `[0, λ]`.
    pub fn lambda_max(&self) -> T {
        self.lambda
    }

    pub fn operator(&self) -> &'a LbOperator<T> {
        self.op
    }

    pub fn areas(&self) -> &'a [T] {
        self.op.areas()
    }

    /// Map a raw eigenvalue to `[-1, 1]`.
    pub fn normalize_eigenvalue(&self, lambda: T) -> T {
        T::of(2.0) * lambda / self.lambda - T::one()
    }

    /// `y = Δ̃ x`: one sparse multiply fused with the scaling.
    #[inline]
    pub fn apply(&self, x: &[T], y: &mut [T]) {
        let c = self.op.stiffness();
        for (r, out) in y.iter_mut().enumerate() {
            let (cols, vals) = c.row(r);
            let mut acc = T::zero();
            for (&j, &v) in cols.iter().zip(vals) {
                acc += v * x[j];
            }
            *out = self.row_scale[r] * acc - x[r];
        }
    }

    /// `next = 2 Δ̃ cur − prev`, the Chebyshev three-term step, in one pass.
    #[inline]
    pub fn recurrence_step(&self, cur: &[T], prev: &[T], next: &mut [T]) {
        let c = self.op.stiffness();
        let two = T::of(2.0);
        for (r, out) in next.iter_mut().enumerate() {
            let (cols, vals) = c.row(r);
            let mut acc = T::zero();
            for (&j, &v) in cols.iter().zip(vals) {
                acc += v * cur[j];
            }
            *out = two * (self.row_scale[r] * acc - cur[r]) - prev[r];
        }
    }
}
