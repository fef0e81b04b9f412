//! Operator-valued positive definite and conditionally negative definite
//! kernels on Hilbert C*-modules over finite-dimensional C*-algebras.
//!
//! The algebra is a direct sum of full matrix blocks, the module is `A^k`,
//! and a kernel is sampled on finitely many labelled points. See the
//! `examples/` directory for one runnable walk-through per capability.

pub mod algebra;
pub mod cli;
pub mod cnd;
pub mod dense;
pub mod error;
pub mod factorization;
pub mod interpolation;
pub mod io;
pub mod kernel;
pub mod module;
pub mod random;
pub mod relative;
pub mod report;
pub mod rkhm;
pub mod selftest;

pub use algebra::{AlgebraElement, AlgebraShape, Tolerance};
pub use cnd::{cnd_to_pd, pd_to_cnd_reconstruct, schoenberg_embedding, CndTransform};
pub use error::{Error, Result};
pub use factorization::{douglas_solve, DenseOperator};
pub use interpolation::{bounded_extension, interpolate_min_norm, interpolation_exists, InterpolationProblem};
pub use kernel::{AlgebraKernel, KernelSample, PointFamily};
pub use module::{ModuleElement, ModuleOperator};
pub use relative::{decompose, reconstruct_kernel, relative_from_kernel, RelativeKernel};
pub use report::Report;
pub use rkhm::{Rkhm, RkhmElement, Term};
