//! Periodic homogenization toolkit for regularized 2D Dirac operators.
//!
//! The pipeline goes: periodic cell problems on the unit torus → effective
//! tensor τ and effective masses m± → bulk symbol analysis (spectral gaps,
//! Chern numbers) → domain-wall strip spectra (edge bands, spectral flow,
//! quantized interface conductivity) → resolvent convergence of the
//! oscillatory operator H^ε to the homogenized H⁰ at rate O(ε).
//!
//! Heavy inner loops (momentum sweeps, quadrature rings, solve batches) are
//! data-parallel via rayon behind the `parallel` feature; disabling it gives
//! a bit-identical sequential fallback. Eigenwork goes through LAPACK's
//! banded Hermitian path, so strip sweeps cost O(bandwidth·n²) per momentum.

extern crate openblas_src as _openblas;

pub mod bulk;
pub mod cell;
pub mod edge;
pub mod expr;
pub mod homog;
pub mod krylov;
pub mod linalg;
pub mod oper2d;
pub mod par;
pub mod report;
pub mod strip;
pub mod tensor;
pub mod torus;
pub mod trace;
pub mod wall;

pub use bulk::{BulkModel, GapReport};
pub use cell::{CellSolution, PotentialSet};
pub use edge::{EdgeBands, SwitchFunction};
pub use homog::{ConvergenceStudy, StudyConfig};
pub use oper2d::{BoxGrid, DiscreteOperator2D, SpinorField};
pub use strip::{InterfaceModel, StripOperator};
pub use tensor::EffectiveTensor;
pub use torus::{PeriodicField, PeriodicGrid};
pub use wall::DomainWallProfile;
