use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{dealiased_grid, Cube, Grid, SpaceTag, SpectralField};
use crate::spectral::{analyze_on, synthesize_on};

/// Evaluates the quadratic products every nonlinear operator is built from.
///
/// Outputs are truncated to the engine's cube and tagged `W`.
pub trait ProductEngine: Send + Sync {
    /// A field in whatever form the engine multiplies fastest.
    type Prepared: Clone + Send + Sync;

    fn k_max(&self) -> usize;

    fn label(&self) -> &'static str;

    fn prepare(&self, f: &SpectralField) -> Self::Prepared;

    /// `(a·∇)b`.
    fn advect(&self, a: &Self::Prepared, b: &Self::Prepared) -> SpectralField;

    /// `a × b`.
    fn cross(&self, a: &Self::Prepared, b: &Self::Prepared) -> SpectralField;

    fn check(&self, f: &SpectralField) -> Result<()> {
        if f.k_max() != self.k_max() {
            return Err(Error::KMaxMismatch { left: f.k_max(), right: self.k_max() });
        }
        Ok(())
    }
}

/// Direct triad summation `Σ_{k₁+k₂=k}` over coefficients; exact, `O(n²)`.
#[derive(Clone, Copy, Debug)]
pub struct ModalEngine {
    cube: Cube,
}

impl ModalEngine {
    pub fn new(k_max: usize) -> Self {
        ModalEngine { cube: Cube::new(k_max) }
    }
}

#[derive(Clone, Debug)]
pub struct ModalPrepared {
    field: SpectralField,
    support: Vec<(usize, [f64; 3])>,
}

impl ModalPrepared {
    fn new(field: SpectralField) -> Self {
        let cube = field.cube();
        let support = field
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.iter().any(|z| z.re != 0.0 || z.im != 0.0))
            .map(|(i, _)| {
                let k = cube.wavevector(i);
                (i, [f64::from(k[0]), f64::from(k[1]), f64::from(k[2])])
            })
            .collect();
        ModalPrepared { field, support }
    }
}

impl ModalEngine {
    fn triads(
        &self,
        a: &ModalPrepared,
        b: &ModalPrepared,
        mut term: impl FnMut(&[Complex64; 3], [f64; 3], &[Complex64; 3], [f64; 3]) -> [Complex64; 3],
    ) -> SpectralField {
        let cube = self.cube;
        let m = cube.k_max() as i32;
        let mut out = SpectralField::zeros(cube.k_max(), SpaceTag::W);
        let data = out.coeffs_mut();
        let ac = a.field.coeffs();
        let bc = b.field.coeffs();
        for &(i1, k1) in &a.support {
            for &(i2, k2) in &b.support {
                let k = [
                    k1[0] as i32 + k2[0] as i32,
                    k1[1] as i32 + k2[1] as i32,
                    k1[2] as i32 + k2[2] as i32,
                ];
                if k.iter().any(|&c| c < -m || c > m) {
                    continue;
                }
                let t = term(&ac[i1], k1, &bc[i2], k2);
                let slot = &mut data[cube.index_unchecked(k)];
                for d in 0..3 {
                    slot[d] += t[d];
                }
            }
        }
        out
    }
}

impl ProductEngine for ModalEngine {
    type Prepared = ModalPrepared;

    fn k_max(&self) -> usize {
        self.cube.k_max()
    }

    fn label(&self) -> &'static str {
        "modal"
    }

    fn prepare(&self, f: &SpectralField) -> ModalPrepared {
        ModalPrepared::new(f.clone())
    }

    fn advect(&self, a: &ModalPrepared, b: &ModalPrepared) -> SpectralField {
        self.triads(a, b, |ah, _, bh, k2| {
            let s = (ah[0] * k2[0] + ah[1] * k2[1] + ah[2] * k2[2]) * Complex64::i();
            [s * bh[0], s * bh[1], s * bh[2]]
        })
    }

    fn cross(&self, a: &ModalPrepared, b: &ModalPrepared) -> SpectralField {
        self.triads(a, b, |x, _, y, _| {
            [x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2], x[0] * y[1] - x[1] * y[0]]
        })
    }
}

/// Products of grid samples on a grid of at least `3·k_max + 1` points per
/// axis, so truncation back to the cube removes every aliased mode.
#[derive(Clone, Debug)]
pub struct PseudoSpectralEngine {
    cube: Cube,
    grid: Grid,
}

impl PseudoSpectralEngine {
    pub fn new(k_max: usize) -> Self {
        PseudoSpectralEngine { cube: Cube::new(k_max), grid: Grid::new(dealiased_grid(k_max)) }
    }

    pub fn with_grid(k_max: usize, n: usize) -> Result<Self> {
        let required = 3 * k_max + 1;
        if n < required {
            return Err(Error::GridTooSmall { grid: n, required });
        }
        Ok(PseudoSpectralEngine { cube: Cube::new(k_max), grid: Grid::new(n) })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
}

/// Grid samples of a field and of its gradient `∂ᵢ f_j` (stored as `grad[i][j]`).
#[derive(Clone, Debug)]
pub struct PhysicalPrepared {
    pub values: [Vec<f64>; 3],
    pub grad: [[Vec<f64>; 3]; 3],
}

impl ProductEngine for PseudoSpectralEngine {
    type Prepared = PhysicalPrepared;

    fn k_max(&self) -> usize {
        self.cube.k_max()
    }

    fn label(&self) -> &'static str {
        "pseudospectral"
    }

    fn prepare(&self, f: &SpectralField) -> PhysicalPrepared {
        let values = synthesize_on(&self.grid, f).data;
        let cube = f.cube();
        let grad = core::array::from_fn(|i| {
            core::array::from_fn(|j| {
                let comp: Vec<Complex64> = f
                    .coeffs()
                    .iter()
                    .enumerate()
                    .map(|(idx, c)| c[j] * Complex64::new(0.0, f64::from(cube.wavevector(idx)[i])))
                    .collect();
                self.grid.to_physical(cube, &comp)
            })
        });
        PhysicalPrepared { values, grad }
    }

    fn advect(&self, a: &PhysicalPrepared, b: &PhysicalPrepared) -> SpectralField {
        let np = self.grid.points();
        let data: [Vec<f64>; 3] = core::array::from_fn(|j| {
            (0..np)
                .map(|p| {
                    a.values[0][p] * b.grad[0][j][p]
                        + a.values[1][p] * b.grad[1][j][p]
                        + a.values[2][p] * b.grad[2][j][p]
                })
                .collect()
        });
        analyze_on(&self.grid, &data, self.cube.k_max(), SpaceTag::W)
    }

    fn cross(&self, a: &PhysicalPrepared, b: &PhysicalPrepared) -> SpectralField {
        let np = self.grid.points();
        let (x, y) = (&a.values, &b.values);
        let data: [Vec<f64>; 3] = core::array::from_fn(|d| {
            let (p1, p2) = ((d + 1) % 3, (d + 2) % 3);
            (0..np).map(|p| x[p1][p] * y[p2][p] - x[p2][p] * y[p1][p]).collect()
        });
        analyze_on(&self.grid, &data, self.cube.k_max(), SpaceTag::W)
    }
}
