//! Shared helpers for unit tests: seeded random fields and an independent
//! quadrature oracle built from analytic trigonometric terms.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::math::PI;
use crate::spectral::{in_upper_half, Phase, SpaceTag, SpectralField, TrigTerm};

pub(crate) struct XorShift(u64);

impl XorShift {
    pub(crate) fn new(seed: u64) -> Self {
        XorShift(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1)
    }

    /// Uniform in `[-1, 1)`.
    pub(crate) fn next(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }
}

/// Random field with amplitudes decaying like `1/(1+‖k‖²)`, projected onto `tag`.
pub(crate) fn random_field(k_max: usize, tag: SpaceTag, seed: u64) -> SpectralField {
    let mut rng = XorShift::new(seed);
    let mut f = SpectralField::zeros(k_max, SpaceTag::W);
    let cube = f.cube();
    for (_, k) in cube.iter() {
        if in_upper_half(k) || k == [0, 0, 0] {
            let w = 1.0 / (1.0 + crate::spectral::norm_sq(k) as f64);
            let amp = core::array::from_fn(|_| Complex64::new(rng.next() * w, rng.next() * w));
            f.set_mode(k, amp).unwrap();
        }
    }
    f.project(tag)
}

/// Field given by explicit real terms, evaluated analytically.
pub(crate) struct Terms(pub Vec<TrigTerm>);

impl Terms {
    pub(crate) fn value(&self, x: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for t in &self.0 {
            let ph = t.k[0] as f64 * x[0] + t.k[1] as f64 * x[1] + t.k[2] as f64 * x[2];
            let s = match t.phase {
                Phase::Cos => ph.cos(),
                Phase::Sin => ph.sin(),
            };
            for d in 0..3 {
                out[d] += t.amp[d] * s;
            }
        }
        out
    }

    /// `∂ᵢ f_j` as `g[i][j]`.
    pub(crate) fn grad(&self, x: [f64; 3]) -> [[f64; 3]; 3] {
        let mut g = [[0.0; 3]; 3];
        for t in &self.0 {
            let ph = t.k[0] as f64 * x[0] + t.k[1] as f64 * x[1] + t.k[2] as f64 * x[2];
            let ds = match t.phase {
                Phase::Cos => -ph.sin(),
                Phase::Sin => ph.cos(),
            };
            for i in 0..3 {
                for j in 0..3 {
                    g[i][j] += t.amp[j] * t.k[i] as f64 * ds;
                }
            }
        }
        g
    }

    pub(crate) fn spectral(&self, k_max: usize) -> SpectralField {
        SpectralField::from_terms(k_max, SpaceTag::W, &self.0).unwrap()
    }
}

/// `∫ integrand` by the uniform rule on `n³` points, exact for trigonometric
/// polynomials of degree below `n` in each variable.
pub(crate) fn quadrature(n: usize, integrand: impl Fn([f64; 3]) -> f64) -> f64 {
    let h = 2.0 * PI / n as f64;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                s += integrand([i as f64 * h, j as f64 * h, l as f64 * h]);
            }
        }
    }
    s * h * h * h
}
