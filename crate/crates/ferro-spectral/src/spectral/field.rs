use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::lattice::{norm_sq, Cube, SpaceTag, Wavevector};
use crate::error::{Error, Result};
use crate::math::{self, VOLUME};

pub(crate) type CVec = [Complex64; 3];

pub(crate) const ZERO3: CVec = [Complex64::new(0.0, 0.0); 3];

/// Phase of a real trigonometric mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    Cos,
    Sin,
}

/// One real term `amp · cos(k·x)` or `amp · sin(k·x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrigTerm {
    pub k: Wavevector,
    pub amp: [f64; 3],
    pub phase: Phase,
}

impl TrigTerm {
    pub fn cos(k: Wavevector, amp: [f64; 3]) -> Self {
        TrigTerm { k, amp, phase: Phase::Cos }
    }

    pub fn sin(k: Wavevector, amp: [f64; 3]) -> Self {
        TrigTerm { k, amp, phase: Phase::Sin }
    }
}

#[inline]
fn kf(k: Wavevector) -> [f64; 3] {
    [f64::from(k[0]), f64::from(k[1]), f64::from(k[2])]
}

#[inline]
fn dot_kc(k: [f64; 3], v: &CVec) -> Complex64 {
    v[0] * k[0] + v[1] * k[1] + v[2] * k[2]
}

#[inline]
fn cnorm_sq(v: &CVec) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

/// Real vector field as Hermitian-symmetric Fourier coefficients on a [`Cube`].
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    cube: Cube,
    tag: SpaceTag,
    coeffs: Vec<CVec>,
}

impl SpectralField {
    pub fn zeros(k_max: usize, tag: SpaceTag) -> Self {
        let cube = Cube::new(k_max);
        SpectralField { cube, tag, coeffs: vec![ZERO3; cube.len()] }
    }

    pub(crate) fn from_raw(cube: Cube, tag: SpaceTag, coeffs: Vec<CVec>) -> Self {
        debug_assert_eq!(coeffs.len(), cube.len());
        SpectralField { cube, tag, coeffs }
    }

    /// Sum of real trigonometric terms, checked against the space constraints of `tag`.
    pub fn from_terms(k_max: usize, tag: SpaceTag, terms: &[TrigTerm]) -> Result<Self> {
        let mut f = SpectralField::zeros(k_max, tag);
        for t in terms {
            f.add_term(t)?;
        }
        f.check_tag(tag)?;
        Ok(f)
    }

    /// Adds one real term without re-checking the space constraint.
    pub fn add_term(&mut self, t: &TrigTerm) -> Result<()> {
        let idx = self.cube.index(t.k).ok_or_else(|| {
            Error::InvalidConfig(alloc::format!(
                "wavevector {:?} outside the cube of k_max {}",
                t.k,
                self.cube.k_max()
            ))
        })?;
        let neg = self.cube.mirror(idx);
        if idx == neg {
            if t.phase == Phase::Cos {
                for (c, a) in self.coeffs[idx].iter_mut().zip(t.amp) {
                    *c += a;
                }
            }
            return Ok(());
        }
        let half = match t.phase {
            Phase::Cos => Complex64::new(0.5, 0.0),
            Phase::Sin => Complex64::new(0.0, -0.5),
        };
        for d in 0..3 {
            self.coeffs[idx][d] += half * t.amp[d];
            self.coeffs[neg][d] += half.conj() * t.amp[d];
        }
        Ok(())
    }

    #[inline]
    pub fn k_max(&self) -> usize {
        self.cube.k_max()
    }

    #[inline]
    pub fn cube(&self) -> Cube {
        self.cube
    }

    #[inline]
    pub fn tag(&self) -> SpaceTag {
        self.tag
    }

    /// Coefficient at `k`; zero outside the cube.
    pub fn coeff(&self, k: Wavevector) -> [Complex64; 3] {
        self.cube.index(k).map_or(ZERO3, |i| self.coeffs[i])
    }

    #[inline]
    pub fn coeffs(&self) -> &[[Complex64; 3]] {
        &self.coeffs
    }

    #[inline]
    pub(crate) fn coeffs_mut(&mut self) -> &mut [CVec] {
        &mut self.coeffs
    }

    /// Sets the amplitude at `k` and its conjugate at `-k`.
    pub fn set_mode(&mut self, k: Wavevector, amp: [Complex64; 3]) -> Result<()> {
        let idx = self.cube.index(k).ok_or(Error::IndexOutOfRange { index: 0, len: 0 })?;
        let neg = self.cube.mirror(idx);
        if idx == neg {
            self.coeffs[idx] = [amp[0].re.into(), amp[1].re.into(), amp[2].re.into()];
        } else {
            self.coeffs[idx] = amp;
            self.coeffs[neg] = [amp[0].conj(), amp[1].conj(), amp[2].conj()];
        }
        Ok(())
    }

    pub(crate) fn same_cube(&self, other: &SpectralField) -> Result<()> {
        if self.k_max() != other.k_max() {
            return Err(Error::KMaxMismatch { left: self.k_max(), right: other.k_max() });
        }
        Ok(())
    }

    pub fn with_tag_unchecked(mut self, tag: SpaceTag) -> Self {
        self.tag = tag;
        self
    }

    /// Re-labels the field after verifying the constraints of `tag`.
    pub fn retag(mut self, tag: SpaceTag) -> Result<Self> {
        self.check_tag(tag)?;
        self.tag = tag;
        Ok(self)
    }

    fn check_tag(&self, tag: SpaceTag) -> Result<()> {
        if self.conforms_to(tag) {
            Ok(())
        } else {
            Err(Error::Constraint(alloc::format!("field does not belong to space {tag}")))
        }
    }

    /// Whether the coefficients satisfy the constraints of `tag` up to rounding.
    pub fn conforms_to(&self, tag: SpaceTag) -> bool {
        let scale = self.max_abs_coeff().max(f64::MIN_POSITIVE);
        let tol = 1e-12 * scale;
        let zero = self.cube.index_unchecked([0, 0, 0]);
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = kf(self.cube.wavevector(i));
            match tag {
                SpaceTag::W | SpaceTag::V1 => {}
                SpaceTag::V | SpaceTag::V2 => {
                    if dot_kc(k, c).norm() > tol * math::sqrt(norm_sq(self.cube.wavevector(i)) as f64) {
                        return false;
                    }
                    if tag == SpaceTag::V && i == zero && math::sqrt(cnorm_sq(c)) > tol {
                        return false;
                    }
                }
                SpaceTag::Grad => {
                    if i == zero {
                        if math::sqrt(cnorm_sq(c)) > tol {
                            return false;
                        }
                        continue;
                    }
                    // k × c = 0
                    let cr = cross_kc(k, c);
                    if math::sqrt(cnorm_sq(&cr)) > tol * math::sqrt(norm_sq(self.cube.wavevector(i)) as f64) {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.coeffs.iter().enumerate().all(|(i, c)| {
            let m = &self.coeffs[self.cube.mirror(i)];
            (0..3).all(|d| (c[d] - m[d].conj()).norm() <= tol)
        })
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| math::sqrt(cnorm_sq(c)))
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    /// `self + s·other`, keeping the tag of `self`.
    pub fn axpy(&mut self, s: f64, other: &SpectralField) -> Result<()> {
        self.same_cube(other)?;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            for d in 0..3 {
                a[d] += b[d] * s;
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    pub fn scaled(&self, s: f64) -> SpectralField {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            for z in c.iter_mut() {
                *z *= s;
            }
        }
        out
    }

    /// `∫ f·g dx` over the box.
    pub fn inner(&self, other: &SpectralField) -> Result<f64> {
        self.same_cube(other)?;
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &SpectralField) -> f64 {
        let mut s = 0.0;
        for (a, b) in self.coeffs.iter().zip(&other.coeffs) {
            for d in 0..3 {
                s += a[d].re * b[d].re + a[d].im * b[d].im;
            }
        }
        VOLUME * s
    }

    pub fn l2_norm_sq(&self) -> f64 {
        VOLUME * self.coeffs.iter().map(cnorm_sq).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        math::sqrt(self.l2_norm_sq())
    }

    fn map_modes(&self, tag: SpaceTag, f: impl Fn([f64; 3], &CVec) -> CVec) -> SpectralField {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| f(kf(self.cube.wavevector(i)), c))
            .collect();
        SpectralField { cube: self.cube, tag, coeffs }
    }

    pub fn curl(&self) -> SpectralField {
        self.map_modes(SpaceTag::V, |k, c| {
            let kc = cross_kc(k, c);
            let i = Complex64::i();
            [kc[0] * i, kc[1] * i, kc[2] * i]
        })
    }

    pub fn div(&self) -> ScalarSpectrum {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| dot_kc(kf(self.cube.wavevector(i)), c) * Complex64::i())
            .collect();
        ScalarSpectrum { cube: self.cube, coeffs }
    }

    /// `-Δf`, coefficient-wise multiplication by `‖k‖²`.
    pub fn neg_laplacian(&self) -> SpectralField {
        self.map_modes(self.tag, |k, c| {
            let w = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            [c[0] * w, c[1] * w, c[2] * w]
        })
    }

    /// `∇(div f)`.
    pub fn grad_div(&self) -> SpectralField {
        self.map_modes(SpaceTag::Grad, |k, c| {
            let kd = dot_kc(k, c);
            [-kd * k[0], -kd * k[1], -kd * k[2]]
        })
    }

    pub fn grad_norm_sq(&self) -> f64 {
        VOLUME
            * self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| norm_sq(self.cube.wavevector(i)) as f64 * cnorm_sq(c))
                .sum::<f64>()
    }

    pub fn curl_norm_sq(&self) -> f64 {
        VOLUME
            * self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| cnorm_sq(&cross_kc(kf(self.cube.wavevector(i)), c)))
                .sum::<f64>()
    }

    pub fn div_norm_sq(&self) -> f64 {
        VOLUME
            * self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| dot_kc(kf(self.cube.wavevector(i)), c).norm_sqr())
                .sum::<f64>()
    }

    /// Coefficient norm of the divergence, `(Σ |k·f̂(k)|²)^{1/2}` without the volume factor.
    pub fn div_coeff_norm(&self) -> f64 {
        math::sqrt(self.div_norm_sq() / VOLUME)
    }

    /// Projection onto divergence-free, mean-zero fields.
    pub fn leray_project(&self) -> SpectralField {
        let mut out = self.solenoidal_part();
        let zero = self.cube.index_unchecked([0, 0, 0]);
        out.coeffs[zero] = ZERO3;
        out.tag = SpaceTag::V;
        out
    }

    fn solenoidal_part(&self) -> SpectralField {
        self.map_modes(SpaceTag::V2, |k, c| {
            let kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            if kk == 0.0 {
                return *c;
            }
            let s = dot_kc(k, c) / kk;
            [c[0] - s * k[0], c[1] - s * k[1], c[2] - s * k[2]]
        })
    }

    /// L²-orthogonal projection onto the space named by `tag`.
    pub fn project(&self, tag: SpaceTag) -> SpectralField {
        match tag {
            SpaceTag::W | SpaceTag::V1 => self.clone().with_tag_unchecked(tag),
            SpaceTag::V => self.leray_project(),
            SpaceTag::V2 => self.solenoidal_part(),
            SpaceTag::Grad => {
                let sol = self.solenoidal_part();
                let mut g = self.clone();
                for (a, b) in g.coeffs.iter_mut().zip(&sol.coeffs) {
                    for d in 0..3 {
                        a[d] -= b[d];
                    }
                }
                g.tag = SpaceTag::Grad;
                g
            }
        }
    }

    pub fn helmholtz_split(&self) -> HelmholtzSplit {
        let solenoidal = self.solenoidal_part();
        let gradient = self.project(SpaceTag::Grad);
        // ∇φ = gradient part  ⇔  φ̂ = -i k·f̂ / ‖k‖²
        let potential = ScalarSpectrum {
            cube: self.cube,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let k = kf(self.cube.wavevector(i));
                    let kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                    if kk == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        -Complex64::i() * dot_kc(k, c) / kk
                    }
                })
                .collect(),
        };
        HelmholtzSplit { solenoidal, gradient, potential }
    }

    /// Copy onto a cube of a different size; modes outside the target are dropped.
    pub fn resized(&self, k_max: usize) -> SpectralField {
        let mut out = SpectralField::zeros(k_max, self.tag);
        for (i, k) in self.cube.iter() {
            if let Some(j) = out.cube.index(k) {
                out.coeffs[j] = self.coeffs[i];
            }
        }
        out
    }

    /// Point evaluation by direct summation.
    pub fn eval_at(&self, x: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (i, c) in self.coeffs.iter().enumerate() {
            if cnorm_sq(c) == 0.0 {
                continue;
            }
            let k = kf(self.cube.wavevector(i));
            let ph = k[0] * x[0] + k[1] * x[1] + k[2] * x[2];
            let e = Complex64::new(math::cos(ph), math::sin(ph));
            for d in 0..3 {
                out[d] += (c[d] * e).re;
            }
        }
        out
    }
}

#[inline]
pub(crate) fn cross_kc(k: [f64; 3], c: &CVec) -> CVec {
    [
        c[2] * k[1] - c[1] * k[2],
        c[0] * k[2] - c[2] * k[0],
        c[1] * k[0] - c[0] * k[1],
    ]
}

/// Real scalar field as Hermitian-symmetric coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarSpectrum {
    cube: Cube,
    coeffs: Vec<Complex64>,
}

impl ScalarSpectrum {
    pub fn zeros(k_max: usize) -> Self {
        let cube = Cube::new(k_max);
        ScalarSpectrum { cube, coeffs: vec![Complex64::new(0.0, 0.0); cube.len()] }
    }

    pub fn k_max(&self) -> usize {
        self.cube.k_max()
    }

    pub fn coeff(&self, k: Wavevector) -> Complex64 {
        self.cube.index(k).map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn set_mode(&mut self, k: Wavevector, amp: Complex64) -> Result<()> {
        let idx = self.cube.index(k).ok_or(Error::IndexOutOfRange { index: 0, len: 0 })?;
        let neg = self.cube.mirror(idx);
        if idx == neg {
            self.coeffs[idx] = amp.re.into();
        } else {
            self.coeffs[idx] = amp;
            self.coeffs[neg] = amp.conj();
        }
        Ok(())
    }

    pub fn l2_norm_sq(&self) -> f64 {
        VOLUME * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn grad(&self) -> SpectralField {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = kf(self.cube.wavevector(i));
                let ic = Complex64::i() * c;
                [ic * k[0], ic * k[1], ic * k[2]]
            })
            .collect();
        SpectralField { cube: self.cube, tag: SpaceTag::Grad, coeffs }
    }
}

/// Solenoidal plus gradient decomposition with the scalar potential of the gradient part.
#[derive(Clone, Debug, PartialEq)]
pub struct HelmholtzSplit {
    pub solenoidal: SpectralField,
    pub gradient: SpectralField,
    pub potential: ScalarSpectrum,
}

/// Derivative fields and torus norms of a vector field.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffOps {
    pub curl: SpectralField,
    pub div: ScalarSpectrum,
    pub grad_norm_sq: f64,
    pub l2_norm_sq: f64,
    pub curl_norm_sq: f64,
    pub div_norm_sq: f64,
}

pub fn diff_ops(f: &SpectralField) -> DiffOps {
    DiffOps {
        curl: f.curl(),
        div: f.div(),
        grad_norm_sq: f.grad_norm_sq(),
        l2_norm_sq: f.l2_norm_sq(),
        curl_norm_sq: f.curl_norm_sq(),
        div_norm_sq: f.div_norm_sq(),
    }
}
