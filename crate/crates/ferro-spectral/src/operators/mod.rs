//! Bilinear, trilinear and linear maps between the spectral spaces.
//!
//! Quadratic terms reduce to two products, the advection `(a·∇)b` and the
//! pointwise cross product `a×b`, truncated to the Galerkin cube. Two
//! [`ProductEngine`]s evaluate them: [`ModalEngine`] sums wavevector triads
//! directly in coefficient space and serves as the oracle, while
//! [`PseudoSpectralEngine`] multiplies on a dealiased grid. [`OperatorTensor`]
//! materializes the same forms as sparse real tensors for small lattices.

mod engine;
mod forms;
mod tensor;

pub use crate::spectral::DualCoefficients;
pub use engine::{ModalEngine, ModalPrepared, PhysicalPrepared, ProductEngine, PseudoSpectralEngine};
pub use forms::{eval_m1, trilinear_b, BFamily, Operators, StokesFamily};
pub use tensor::{OperatorTensor, TensorFamily};
