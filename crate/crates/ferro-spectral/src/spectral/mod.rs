//! Fourier realization of the function spaces on the periodic box.
//!
//! | tag    | content                                   | constants |
//! |--------|-------------------------------------------|-----------|
//! | `V`    | divergence-free fields                    | no        |
//! | `W`    | all vector fields                         | yes       |
//! | `V2`   | divergence-free fields                    | yes       |
//! | `Grad` | gradients `∇φ`                            | no        |
//! | `V1`   | `V2 ⊕ Grad`, i.e. all vector fields       | yes       |
//!
//! Coefficients are raw amplitudes of the expansion `f(x) = Σ f̂(k) e^{ik·x}`;
//! every L² integral carries the `(2π)³` volume factor.

mod basis;
mod field;
mod lattice;
mod transform;

pub use basis::{
    build_basis, dual_norm, Bases, BasisFunction, DualCoefficients, ModeIndex, Phase,
    Polarization, RealBasis,
};
pub use field::{diff_ops, DiffOps, HelmholtzSplit, ScalarSpectrum, SpectralField, TrigTerm};
pub use lattice::{in_upper_half, norm_sq, Cube, SpaceTag, Wavevector};
pub use transform::{analyze, dealiased_grid, synthesize, Dft1d, Grid, PhysicalField};
pub(crate) use transform::{analyze_on, synthesize_on};
