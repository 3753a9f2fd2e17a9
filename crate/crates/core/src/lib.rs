//! Unbiased augmentation of scalar signals on triangulated surfaces.
//!
//! Two resampling schemes share one pipeline:
//!
//! * **LB-eigDA** projects each signal onto Laplace-Beltrami eigenfunctions
//!   and permutes every coefficient independently across the observations
//!   of a class ([`augment::lb_eig_da`]).
//! * **C-pDA** splits each signal into bandpass components with Chebyshev
//!   polynomial filters of the normalized operator and permutes every band
//!   independently ([`augment::c_pda`]). No eigenvectors are needed.
//!
//! Both preserve the per-vertex mean of the class they are applied to.
//!
//! Everything numeric is generic over [`Scalar`] (`f32`/`f64`); the `*64`
//! aliases below fix the usual double-precision instantiation.

pub mod analysis;
pub mod augment;
pub mod chebyshev;
mod dense;
pub mod error;
mod lanczos;
pub mod mesh;
pub mod operator;
pub mod scalar;
pub mod signal;
pub mod simulate;
pub mod sparse;
pub mod spectrum;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type TriMesh64 = mesh::TriMesh<f64>;
pub type TriMesh32 = mesh::TriMesh<f32>;
pub type LbOperator64 = operator::LbOperator<f64>;
pub type LbOperator32 = operator::LbOperator<f32>;
pub type NormalizedOperator64<'a> = operator::NormalizedOperator<'a, f64>;
pub type EigenBasis64 = spectrum::EigenBasis<f64>;
pub type EigenBasis32 = spectrum::EigenBasis<f32>;
pub use chebyshev::FilterBank;
pub type SignalSet64 = signal::SignalSet<f64>;
pub type SignalSet32 = signal::SignalSet<f32>;
pub type CsrMatrix64 = sparse::CsrMatrix<f64>;
