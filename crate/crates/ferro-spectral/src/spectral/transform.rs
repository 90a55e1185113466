use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::field::SpectralField;
use super::lattice::{Cube, SpaceTag};
use crate::error::{Error, Result};
use crate::math::{self, PI};

/// Smallest power of two with at least `3·k_max + 1` points, enough for
/// alias-free quadratic products truncated back to `k_max`.
pub fn dealiased_grid(k_max: usize) -> usize {
    (3 * k_max + 1).next_power_of_two()
}

/// One-dimensional DFT of fixed length: radix-2 when the length is a power of
/// two, direct summation otherwise.
#[derive(Clone, Debug)]
pub struct Dft1d {
    n: usize,
    /// `e^{-2πi j/n}`
    twiddle: Vec<Complex64>,
    bitrev: Option<Vec<usize>>,
}

impl Dft1d {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "transform length must be positive");
        let twiddle = (0..n)
            .map(|j| {
                let t = -2.0 * PI * j as f64 / n as f64;
                Complex64::new(math::cos(t), math::sin(t))
            })
            .collect();
        let bitrev = n.is_power_of_two().then(|| {
            let bits = n.trailing_zeros();
            (0..n)
                .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
                .collect()
        });
        Dft1d { n, twiddle, bitrev }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Unnormalized transform in place; `inverse` flips the exponent sign.
    pub fn transform(&self, buf: &mut [Complex64], inverse: bool, scratch: &mut Vec<Complex64>) {
        debug_assert_eq!(buf.len(), self.n);
        let tw = |j: usize| {
            let t = self.twiddle[j];
            if inverse {
                t.conj()
            } else {
                t
            }
        };
        match &self.bitrev {
            Some(rev) => {
                for i in 0..self.n {
                    let j = rev[i];
                    if i < j {
                        buf.swap(i, j);
                    }
                }
                let mut len = 2;
                while len <= self.n {
                    let half = len / 2;
                    let stride = self.n / len;
                    for start in (0..self.n).step_by(len) {
                        for j in 0..half {
                            let w = tw(j * stride);
                            let a = buf[start + j];
                            let b = buf[start + j + half] * w;
                            buf[start + j] = a + b;
                            buf[start + j + half] = a - b;
                        }
                    }
                    len *= 2;
                }
            }
            None => {
                scratch.clear();
                scratch.extend_from_slice(buf);
                for (m, out) in buf.iter_mut().enumerate() {
                    let mut s = Complex64::new(0.0, 0.0);
                    for (j, x) in scratch.iter().enumerate() {
                        s += x * tw((j * m) % self.n);
                    }
                    *out = s;
                }
            }
        }
    }
}

/// Uniform `n³` grid on the box with separable transforms.
#[derive(Clone, Debug)]
pub struct Grid {
    n: usize,
    dft: Dft1d,
}

impl Grid {
    pub fn new(n: usize) -> Self {
        Grid { n, dft: Dft1d::new(n) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Coordinates of the flat grid index.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let n = self.n;
        let h = 2.0 * PI / n as f64;
        [(idx / (n * n)) as f64 * h, ((idx / n) % n) as f64 * h, (idx % n) as f64 * h]
    }

    fn wrap(&self, k: i32) -> usize {
        k.rem_euclid(self.n as i32) as usize
    }

    fn in_band(&self, idx: usize, k_max: usize) -> bool {
        idx <= k_max || idx + k_max >= self.n
    }

    /// Transforms along the three axes. The inverse runs axis 0 first and
    /// skips all-zero lines, which prunes the zero padding. The forward
    /// transform runs axis 2 first and, given `band`, skips lines whose
    /// outputs fall outside `|k_i| ≤ band` on an axis already transformed.
    fn transform3(&self, data: &mut [Complex64], inverse: bool, band: Option<usize>) {
        let n = self.n;
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = Vec::with_capacity(n);
        let keep = |idx: usize| band.map_or(true, |k| self.in_band(idx, k));
        let axes: [usize; 3] = if inverse { [0, 1, 2] } else { [2, 1, 0] };
        for axis in axes {
            let stride = [n * n, n, 1][axis];
            for a in 0..n {
                for b in 0..n {
                    // (a, b) are the two other axis indices in increasing axis order
                    let (base, others) = match axis {
                        0 => (a * n + b, [a, b]),
                        1 => (a * n * n + b, [a, b]),
                        _ => ((a * n + b) * n, [a, b]),
                    };
                    if !inverse {
                        let done = match axis {
                            2 => true,
                            1 => keep(others[1]),
                            _ => keep(others[0]) && keep(others[1]),
                        };
                        if !done {
                            continue;
                        }
                    }
                    let mut nonzero = false;
                    for (t, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + t * stride];
                        nonzero |= slot.re != 0.0 || slot.im != 0.0;
                    }
                    if !nonzero {
                        continue;
                    }
                    self.dft.transform(&mut line, inverse, &mut scratch);
                    for (t, v) in line.iter().enumerate() {
                        data[base + t * stride] = *v;
                    }
                }
            }
        }
    }

    /// Samples of the real scalar whose coefficients on `cube` are `coeffs`.
    pub fn to_physical(&self, cube: Cube, coeffs: &[Complex64]) -> Vec<f64> {
        let n = self.n;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n * n];
        for (i, k) in cube.iter() {
            let c = coeffs[i];
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            let idx = (self.wrap(k[0]) * n + self.wrap(k[1])) * n + self.wrap(k[2]);
            data[idx] += c;
        }
        self.transform3(&mut data, true, None);
        data.into_iter().map(|z| z.re).collect()
    }

    /// Coefficients on `cube` of the trigonometric interpolant of `samples`.
    pub fn to_spectral(&self, samples: &[f64], cube: Cube) -> Vec<Complex64> {
        let n = self.n;
        let mut data: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.transform3(&mut data, false, Some(cube.k_max()));
        let norm = 1.0 / (n * n * n) as f64;
        cube.iter()
            .map(|(_, k)| {
                let idx = (self.wrap(k[0]) * n + self.wrap(k[1])) * n + self.wrap(k[2]);
                data[idx] * norm
            })
            .collect()
    }
}

/// Point samples of a vector field on an `n³` grid, component-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalField {
    pub n: usize,
    pub data: [Vec<f64>; 3],
}

fn check_grid(n: usize, k_max: usize) -> Result<()> {
    let required = 2 * k_max + 1;
    if n < required {
        return Err(Error::GridTooSmall { grid: n, required });
    }
    Ok(())
}

pub fn synthesize(f: &SpectralField, n: usize) -> Result<PhysicalField> {
    check_grid(n, f.k_max())?;
    let grid = Grid::new(n);
    Ok(synthesize_on(&grid, f))
}

pub(crate) fn synthesize_on(grid: &Grid, f: &SpectralField) -> PhysicalField {
    let cube = f.cube();
    let data = core::array::from_fn(|d| {
        let comp: Vec<Complex64> = f.coeffs().iter().map(|c| c[d]).collect();
        grid.to_physical(cube, &comp)
    });
    PhysicalField { n: grid.n(), data }
}

pub fn analyze(p: &PhysicalField, k_max: usize, tag: SpaceTag) -> Result<SpectralField> {
    check_grid(p.n, k_max)?;
    let grid = Grid::new(p.n);
    Ok(analyze_on(&grid, &p.data, k_max, tag))
}

pub(crate) fn analyze_on(grid: &Grid, data: &[Vec<f64>; 3], k_max: usize, tag: SpaceTag) -> SpectralField {
    let cube = Cube::new(k_max);
    let comps: [Vec<Complex64>; 3] = core::array::from_fn(|d| grid.to_spectral(&data[d], cube));
    let coeffs = (0..cube.len()).map(|i| [comps[0][i], comps[1][i], comps[2][i]]).collect();
    SpectralField::from_raw(cube, tag, coeffs)
}
