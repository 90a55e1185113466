use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::engine::{ModalEngine, ProductEngine};
use crate::error::{Error, Result};
use crate::spectral::{in_upper_half, RealBasis, SpaceTag, SpectralField, Wavevector};

/// Trilinear form materialized by [`OperatorTensor`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TensorFamily {
    /// `b(φ_i, ψ_j, ψ_l)` with `φ ∈ V` and `ψ` in the given space.
    BForm(SpaceTag),
    /// `M₁(ψ_i, ψ_j, v_l)` with `ψ ∈ V1`, `v ∈ V`.
    M1Form,
    /// `∫ curl(u_i × B_j) · ψ_l` with `u ∈ V`, `B, ψ ∈ V2`.
    M2Form,
}

/// Sparse real tensor `T[i][j][l]` of a trilinear form over three real bases.
///
/// Entries are nonzero only on triads `±k_i ± k_j ± k_l = 0`; only those are stored.
#[derive(Clone, Debug)]
pub struct OperatorTensor {
    family: TensorFamily,
    dims: [usize; 3],
    entries: Vec<(u32, u32, u32, f64)>,
}

fn canonical(k: Wavevector) -> Wavevector {
    if k == [0, 0, 0] || in_upper_half(k) {
        k
    } else {
        [-k[0], -k[1], -k[2]]
    }
}

fn unit_fields(basis: &RealBasis) -> Vec<SpectralField> {
    let n = basis.dim();
    (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            basis.to_field(&e).expect("unit vector has basis length")
        })
        .collect()
}

impl OperatorTensor {
    /// Assembles the tensor on lattice `k_max`; cost grows like `dim²`.
    pub fn assemble(k_max: usize, family: TensorFamily) -> Result<Self> {
        let (s1, s2, s3) = match family {
            TensorFamily::BForm(tag) => {
                if !matches!(tag, SpaceTag::V | SpaceTag::W | SpaceTag::V1) {
                    return Err(Error::InvalidConfig("b-form tensors target V, W or V1".into()));
                }
                (SpaceTag::V, tag, tag)
            }
            TensorFamily::M1Form => (SpaceTag::V1, SpaceTag::V1, SpaceTag::V),
            TensorFamily::M2Form => (SpaceTag::V, SpaceTag::V2, SpaceTag::V2),
        };
        let b1 = RealBasis::new(k_max, s1)?;
        let b2 = RealBasis::new(k_max, s2)?;
        let b3 = RealBasis::new(k_max, s3)?;
        let engine = ModalEngine::new(k_max);
        let first: Vec<_> = unit_fields(&b1).iter().map(|f| engine.prepare(f)).collect();
        let second: Vec<_> = unit_fields(&b2).iter().map(|f| engine.prepare(f)).collect();
        let at: BTreeMap<Wavevector, Vec<usize>> = b3.functions_at();
        let mut entries = Vec::new();
        for (i, fi) in first.iter().enumerate() {
            let ki = b1.functions()[i].mode.k;
            for (j, fj) in second.iter().enumerate() {
                let kj = b2.functions()[j].mode.k;
                let product = match family {
                    TensorFamily::BForm(_) | TensorFamily::M1Form => engine.advect(fi, fj),
                    TensorFamily::M2Form => engine.cross(fi, fj).curl(),
                };
                let mut targets: Vec<Wavevector> = Vec::with_capacity(2);
                for s in [1, -1] {
                    let k = canonical([ki[0] + s * kj[0], ki[1] + s * kj[1], ki[2] + s * kj[2]]);
                    if !targets.contains(&k) {
                        targets.push(k);
                    }
                }
                for k in targets {
                    let Some(ls) = at.get(&k) else { continue };
                    for &l in ls {
                        let v = b3.pair_one(&product, l);
                        if v != 0.0 {
                            entries.push((i as u32, j as u32, l as u32, v));
                        }
                    }
                }
            }
        }
        Ok(OperatorTensor { family, dims: [b1.dim(), b2.dim(), b3.dim()], entries })
    }

    pub fn family(&self) -> TensorFamily {
        self.family
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(u32, u32, u32, f64)] {
        &self.entries
    }

    /// `out_l = Σ_ij x_i y_j T[i][j][l]`.
    pub fn contract(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dims[0] {
            return Err(Error::LengthMismatch { expected: self.dims[0], found: x.len() });
        }
        if y.len() != self.dims[1] {
            return Err(Error::LengthMismatch { expected: self.dims[1], found: y.len() });
        }
        let mut out = vec![0.0; self.dims[2]];
        for &(i, j, l, v) in &self.entries {
            out[l as usize] += x[i as usize] * y[j as usize] * v;
        }
        Ok(out)
    }

    /// `Σ_ijl x_i y_j z_l T[i][j][l]`.
    pub fn evaluate(&self, x: &[f64], y: &[f64], z: &[f64]) -> Result<f64> {
        let out = self.contract(x, y)?;
        if z.len() != out.len() {
            return Err(Error::LengthMismatch { expected: out.len(), found: z.len() });
        }
        Ok(out.iter().zip(z).map(|(a, b)| a * b).sum())
    }
}
