//! Clifford-algebra boundary integral equations for Dirac and Maxwell problems.
//!
//! The pointwise algebra, kernels and Mellin symbols are generic over the real
//! scalar; discretized operators, solvers and drivers work in double precision.

pub mod clifford;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod mellin;
pub mod operators;
pub mod scattering;
pub mod solvers;

pub use error::{Error, Result};
pub use geometry::{Curve2D, Mesh, Surface3D};
pub use num_complex::Complex64;
pub use operators::{ComplexOperator, GridFunction, Operator, RealLinearOperator, Space};
pub use solvers::SolveReport;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Multivector = clifford::Multivector<f64>;
pub type UnitVector = clifford::UnitVector<f64>;
pub type WaveNumber = kernels::WaveNumber<f64>;
pub type Bicomplex = mellin::Bicomplex<f64>;
