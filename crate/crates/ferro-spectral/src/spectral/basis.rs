use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::field::SpectralField;
pub use super::field::Phase;
use super::lattice::{in_upper_half, norm_sq, Cube, SpaceTag, Wavevector};
use crate::error::{Error, Result};
use crate::math::{self, PI, VOLUME};

/// Polarization of a basis mode, in basis order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarization {
    DivFree1,
    DivFree2,
    Gradient,
    Full1,
    Full2,
    Full3,
}

/// A wavevector class of the upper half-lattice (or `k = 0`) with a polarization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModeIndex {
    pub k: Wavevector,
    pub pol: Polarization,
}

impl ModeIndex {
    fn sort_key(&self) -> (i64, Wavevector, Polarization) {
        (norm_sq(self.k), self.k, self.pol)
    }

    /// Real unit polarization vector.
    pub fn direction(&self) -> [f64; 3] {
        polarization_vector(self.k, self.pol)
    }
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = math::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    [v[0] / n, v[1] / n, v[2] / n]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn polarization_vector(k: Wavevector, pol: Polarization) -> [f64; 3] {
    let kf = [f64::from(k[0]), f64::from(k[1]), f64::from(k[2])];
    match pol {
        Polarization::Full1 => [1.0, 0.0, 0.0],
        Polarization::Full2 => [0.0, 1.0, 0.0],
        Polarization::Full3 => [0.0, 0.0, 1.0],
        Polarization::Gradient => normalize(kf),
        Polarization::DivFree1 | Polarization::DivFree2 => {
            // axis least aligned with k; first index wins ties
            let mut axis = 0;
            for i in 1..3 {
                if k[i].abs() < k[axis].abs() {
                    axis = i;
                }
            }
            let mut e = [0.0; 3];
            e[axis] = 1.0;
            let e1 = normalize(cross(kf, e));
            if pol == Polarization::DivFree1 {
                e1
            } else {
                cross(normalize(kf), e1)
            }
        }
    }
}

/// Ordered complex-mode basis of a space: lexicographic in `(‖k‖², k, pol)`.
///
/// Every `k ≠ 0` entry stands for a complex amplitude paired with its mirror `-k`;
/// for `V1` the result is the `V2` list followed by the `Grad` list.
pub fn build_basis(k_max: usize, tag: SpaceTag) -> Result<Vec<ModeIndex>> {
    if k_max < 1 {
        return Err(Error::InvalidConfig("k_max must be at least 1".into()));
    }
    if tag == SpaceTag::V1 {
        let mut out = build_basis(k_max, SpaceTag::V2)?;
        out.extend(build_basis(k_max, SpaceTag::Grad)?);
        return Ok(out);
    }
    let cube = Cube::new(k_max);
    let mut out = Vec::new();
    if matches!(tag, SpaceTag::W | SpaceTag::V2) {
        for pol in [Polarization::Full1, Polarization::Full2, Polarization::Full3] {
            out.push(ModeIndex { k: [0, 0, 0], pol });
        }
    }
    let pols: &[Polarization] = match tag {
        SpaceTag::V | SpaceTag::V2 => &[Polarization::DivFree1, Polarization::DivFree2],
        SpaceTag::Grad => &[Polarization::Gradient],
        SpaceTag::W => &[Polarization::Full1, Polarization::Full2, Polarization::Full3],
        SpaceTag::V1 => unreachable!(),
    };
    for (_, k) in cube.iter() {
        if in_upper_half(k) {
            for &pol in pols {
                out.push(ModeIndex { k, pol });
            }
        }
    }
    out.sort_by_key(ModeIndex::sort_key);
    Ok(out)
}

/// One real, L²-normalized basis function `dir·cos(k·x)/N` or `dir·sin(k·x)/N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasisFunction {
    pub mode: ModeIndex,
    pub phase: Phase,
    pub(crate) index: usize,
    pub(crate) mirror: usize,
    pub(crate) dir: [f64; 3],
    /// Coefficient at `k` is `amp · dir`.
    pub(crate) amp: Complex64,
    pub(crate) wavenumber_sq: f64,
}

impl BasisFunction {
    pub fn wavenumber_sq(&self) -> f64 {
        self.wavenumber_sq
    }

    pub fn direction(&self) -> [f64; 3] {
        self.dir
    }
}

/// L²-orthonormal real basis of one space; coordinates against it are the
/// Galerkin unknowns and pairings against it are [`DualCoefficients`].
#[derive(Clone, Debug)]
pub struct RealBasis {
    tag: SpaceTag,
    cube: Cube,
    modes: Vec<ModeIndex>,
    functions: Vec<BasisFunction>,
}

impl RealBasis {
    pub fn new(k_max: usize, tag: SpaceTag) -> Result<Self> {
        let modes = build_basis(k_max, tag)?;
        let cube = Cube::new(k_max);
        let cos_amp = 0.5 / math::sqrt(4.0 * PI * PI * PI);
        let zero_amp = 1.0 / math::sqrt(VOLUME);
        let mut functions = Vec::with_capacity(2 * modes.len());
        for &mode in &modes {
            let index = cube.index_unchecked(mode.k);
            let mirror = cube.mirror(index);
            let dir = mode.direction();
            let wavenumber_sq = norm_sq(mode.k) as f64;
            if index == mirror {
                functions.push(BasisFunction {
                    mode,
                    phase: Phase::Cos,
                    index,
                    mirror,
                    dir,
                    amp: Complex64::new(zero_amp, 0.0),
                    wavenumber_sq,
                });
            } else {
                for (phase, amp) in [
                    (Phase::Cos, Complex64::new(cos_amp, 0.0)),
                    (Phase::Sin, Complex64::new(0.0, -cos_amp)),
                ] {
                    functions.push(BasisFunction { mode, phase, index, mirror, dir, amp, wavenumber_sq });
                }
            }
        }
        Ok(RealBasis { tag, cube, modes, functions })
    }

    pub fn tag(&self) -> SpaceTag {
        self.tag
    }

    pub fn k_max(&self) -> usize {
        self.cube.k_max()
    }

    pub fn modes(&self) -> &[ModeIndex] {
        &self.modes
    }

    pub fn functions(&self) -> &[BasisFunction] {
        &self.functions
    }

    /// Number of real coordinates.
    pub fn dim(&self) -> usize {
        self.functions.len()
    }

    /// Field `Σ coords_j φ_j`.
    pub fn to_field(&self, coords: &[f64]) -> Result<SpectralField> {
        if coords.len() != self.dim() {
            return Err(Error::LengthMismatch { expected: self.dim(), found: coords.len() });
        }
        let mut out = SpectralField::zeros(self.k_max(), self.tag);
        self.accumulate(coords, 1.0, &mut out);
        Ok(out)
    }

    /// `out += s · Σ coords_j φ_j`; `coords` must have length [`Self::dim`].
    pub(crate) fn accumulate(&self, coords: &[f64], s: f64, out: &mut SpectralField) {
        let data = out.coeffs_mut();
        for (f, &x) in self.functions.iter().zip(coords) {
            if x == 0.0 {
                continue;
            }
            let a = f.amp * (x * s);
            for d in 0..3 {
                data[f.index][d] += a * f.dir[d];
            }
            if f.mirror != f.index {
                let ac = a.conj();
                for d in 0..3 {
                    data[f.mirror][d] += ac * f.dir[d];
                }
            }
        }
    }

    /// Pairings `⟨f, φ_j⟩` for every basis function; for fields in the span these
    /// are the coordinates.
    pub fn project(&self, f: &SpectralField) -> Result<Vec<f64>> {
        if f.k_max() != self.k_max() {
            return Err(Error::KMaxMismatch { left: f.k_max(), right: self.k_max() });
        }
        Ok(self.project_unchecked(f))
    }

    pub(crate) fn project_unchecked(&self, f: &SpectralField) -> Vec<f64> {
        (0..self.functions.len()).map(|j| self.pair_one(f, j)).collect()
    }

    /// `⟨f, φ_j⟩` for a single basis function.
    pub(crate) fn pair_one(&self, f: &SpectralField, j: usize) -> f64 {
        let b = &self.functions[j];
        let c = &f.coeffs()[b.index];
        let dot = c[0] * b.dir[0] + c[1] * b.dir[1] + c[2] * b.dir[2];
        let p = (b.amp.conj() * dot).re;
        if b.index == b.mirror {
            VOLUME * p
        } else {
            2.0 * VOLUME * p
        }
    }

    pub fn pair(&self, f: &SpectralField) -> Result<DualCoefficients> {
        Ok(DualCoefficients { space: self.tag, values: self.project(f)? })
    }

    /// Dual-norm weight of each function, `‖k‖²` for `V` and `1 + ‖k‖²` otherwise.
    pub fn dual_weights(&self) -> Result<Vec<f64>> {
        let offset = match self.tag {
            SpaceTag::V => 0.0,
            SpaceTag::W | SpaceTag::V1 | SpaceTag::V2 => 1.0,
            SpaceTag::Grad => {
                return Err(Error::InvalidConfig("no dual-norm weight declared for Grad".into()))
            }
        };
        Ok(self.functions.iter().map(|f| offset + f.wavenumber_sq).collect())
    }

    /// Indices of basis functions sitting on wavevector `k` or its mirror.
    pub fn functions_at(&self) -> BTreeMap<Wavevector, Vec<usize>> {
        let mut map: BTreeMap<Wavevector, Vec<usize>> = BTreeMap::new();
        for (j, f) in self.functions.iter().enumerate() {
            map.entry(f.mode.k).or_default().push(j);
        }
        map
    }

    /// Gram matrix computed from the coefficient representation.
    pub fn gram(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let fields: Vec<SpectralField> = (0..n)
            .map(|j| {
                let mut e = alloc::vec![0.0; n];
                e[j] = 1.0;
                self.to_field(&e).expect("length matches")
            })
            .collect();
        fields
            .iter()
            .map(|a| fields.iter().map(|b| a.inner_unchecked(b)).collect())
            .collect()
    }
}

/// Pairings of an operator output with the basis functions of `space`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualCoefficients {
    pub space: SpaceTag,
    pub values: Vec<f64>,
}

impl DualCoefficients {
    pub fn zeros(basis: &RealBasis) -> Self {
        DualCoefficients { space: basis.tag(), values: alloc::vec![0.0; basis.dim()] }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `Σ ℓ_j x_j`, the action on the element with coordinates `x`.
    pub fn apply(&self, coords: &[f64]) -> f64 {
        self.values.iter().zip(coords).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(math::abs(*v)))
    }
}

/// `(Σ ℓ_j² / w_j)^{1/2}` with the spectral weights of the basis.
pub fn dual_norm(ell: &DualCoefficients, basis: &RealBasis) -> Result<f64> {
    if ell.space != basis.tag() {
        return Err(Error::InvalidConfig(alloc::format!(
            "dual coefficients for {} evaluated against {}",
            ell.space,
            basis.tag()
        )));
    }
    if ell.values.len() != basis.dim() {
        return Err(Error::LengthMismatch { expected: basis.dim(), found: ell.values.len() });
    }
    let w = basis.dual_weights()?;
    Ok(math::sqrt(ell.values.iter().zip(&w).map(|(l, w)| l * l / w).sum()))
}

/// The five bases of one Galerkin level.
#[derive(Clone, Debug)]
pub struct Bases {
    pub v: RealBasis,
    pub w: RealBasis,
    pub v1: RealBasis,
    pub v2: RealBasis,
    pub grad: RealBasis,
}

impl Bases {
    pub fn new(k_max: usize) -> Result<Self> {
        Ok(Bases {
            v: RealBasis::new(k_max, SpaceTag::V)?,
            w: RealBasis::new(k_max, SpaceTag::W)?,
            v1: RealBasis::new(k_max, SpaceTag::V1)?,
            v2: RealBasis::new(k_max, SpaceTag::V2)?,
            grad: RealBasis::new(k_max, SpaceTag::Grad)?,
        })
    }

    pub fn k_max(&self) -> usize {
        self.v.k_max()
    }

    pub fn get(&self, tag: SpaceTag) -> &RealBasis {
        match tag {
            SpaceTag::V => &self.v,
            SpaceTag::W => &self.w,
            SpaceTag::V1 => &self.v1,
            SpaceTag::V2 => &self.v2,
            SpaceTag::Grad => &self.grad,
        }
    }
}
