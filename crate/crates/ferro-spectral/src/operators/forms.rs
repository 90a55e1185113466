use alloc::format;

use super::engine::{ModalEngine, ProductEngine};
use crate::error::{Error, Result};
use crate::spectral::{Bases, DualCoefficients, SpaceTag, SpectralField};

/// Transport operators `b(u, v, ·)` by target space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BFamily {
    /// `V × V → V′`
    B0,
    /// `V × W → W′`
    B1,
    /// `V × V1 → V1′`
    B2,
}

impl BFamily {
    pub fn target(self) -> SpaceTag {
        match self {
            BFamily::B0 => SpaceTag::V,
            BFamily::B1 => SpaceTag::W,
            BFamily::B2 => SpaceTag::V1,
        }
    }
}

/// `A = -PΔ` on `V`, `A₁ = -Δ` on `W`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StokesFamily {
    A,
    A1,
}

fn same_k(fields: &[&SpectralField]) -> Result<usize> {
    let k = fields[0].k_max();
    for f in &fields[1..] {
        if f.k_max() != k {
            return Err(Error::KMaxMismatch { left: k, right: f.k_max() });
        }
    }
    Ok(k)
}

fn require_div_free(f: &SpectralField, what: &str) -> Result<()> {
    if f.conforms_to(SpaceTag::V2) {
        Ok(())
    } else {
        Err(Error::Constraint(format!("{what} must be divergence-free")))
    }
}

/// `∫ (φ·∇)ψ · v dx`, evaluated exactly by triad summation.
pub fn trilinear_b(phi: &SpectralField, psi: &SpectralField, v: &SpectralField) -> Result<f64> {
    let k = same_k(&[phi, psi, v])?;
    let e = ModalEngine::new(k);
    Ok(e.advect(&e.prepare(phi), &e.prepare(psi)).inner_unchecked(v))
}

/// `Σᵢⱼ ∫ Mᵢ ∂ᵢHⱼ vⱼ dx`.
pub fn eval_m1(m: &SpectralField, h: &SpectralField, v: &SpectralField) -> Result<f64> {
    trilinear_b(m, h, v)
}

/// Operator family of one Galerkin level, generic over the product engine.
#[derive(Clone, Debug)]
pub struct Operators<E: ProductEngine> {
    engine: E,
    bases: Bases,
}

impl<E: ProductEngine> Operators<E> {
    pub fn new(engine: E) -> Result<Self> {
        let bases = Bases::new(engine.k_max())?;
        Ok(Operators { engine, bases })
    }

    pub fn engine(&self) -> &E {
        &self.engine
    }

    pub fn bases(&self) -> &Bases {
        &self.bases
    }

    pub fn k_max(&self) -> usize {
        self.bases.k_max()
    }

    fn check(&self, fields: &[&SpectralField]) -> Result<()> {
        for f in fields {
            self.engine.check(f)?;
        }
        Ok(())
    }

    fn pair(&self, f: &SpectralField, tag: SpaceTag) -> DualCoefficients {
        let basis = self.bases.get(tag);
        DualCoefficients { space: tag, values: basis.project_unchecked(f) }
    }

    /// `(a·∇)b` truncated to the cube.
    pub fn advect(&self, a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
        self.check(&[a, b])?;
        Ok(self.engine.advect(&self.engine.prepare(a), &self.engine.prepare(b)))
    }

    /// `a × b` truncated to the cube.
    pub fn cross(&self, a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
        self.check(&[a, b])?;
        Ok(self.engine.cross(&self.engine.prepare(a), &self.engine.prepare(b)))
    }

    pub fn trilinear_b(&self, phi: &SpectralField, psi: &SpectralField, v: &SpectralField) -> Result<f64> {
        self.check(&[v])?;
        Ok(self.advect(phi, psi)?.inner_unchecked(v))
    }

    /// Pairings `b(u, v, φ_l)` against the family's target basis.
    pub fn apply_b(&self, family: BFamily, u: &SpectralField, v: &SpectralField) -> Result<DualCoefficients> {
        require_div_free(u, "transporting velocity")?;
        Ok(self.pair(&self.advect(u, v)?, family.target()))
    }

    pub fn eval_m1(&self, m: &SpectralField, h: &SpectralField, v: &SpectralField) -> Result<f64> {
        self.trilinear_b(m, h, v)
    }

    /// `-∫[(M+H)·∇]v·H - ∫ curl H · (H×v)`, equal to `M₁(M,H,v)` when `v` and
    /// `M + H` are divergence-free.
    pub fn eval_m1_kelvin(&self, m: &SpectralField, h: &SpectralField, v: &SpectralField) -> Result<f64> {
        require_div_free(v, "test field")?;
        let b = m.add(h)?;
        let first = self.advect(&b, v)?.inner_unchecked(h);
        let second = h.curl().inner_unchecked(&self.cross(h, v)?);
        Ok(-first - second)
    }

    /// `∫ curl H · (M×v) - ∫ (v·∇)M · H`, equal to `M₁(M,H,v)` when `v` and
    /// `M + H` are divergence-free.
    pub fn eval_m1_transport(&self, m: &SpectralField, h: &SpectralField, v: &SpectralField) -> Result<f64> {
        require_div_free(v, "test field")?;
        let first = h.curl().inner_unchecked(&self.cross(m, v)?);
        let second = self.advect(v, m)?.inner_unchecked(h);
        Ok(first - second)
    }

    /// `M₀(M,H)`: pairings `M₁(M, H, v_l)` against the `V` basis.
    pub fn apply_m0(&self, m: &SpectralField, h: &SpectralField) -> Result<DualCoefficients> {
        Ok(self.pair(&self.advect(m, h)?, SpaceTag::V))
    }

    /// Pairings `∫ curl(u×B) · ψ_l` against the `V2` basis.
    pub fn apply_m2(&self, u: &SpectralField, b: &SpectralField) -> Result<DualCoefficients> {
        require_div_free(b, "induction")?;
        Ok(self.pair(&self.cross(u, b)?.curl(), SpaceTag::V2))
    }

    /// Same pairings through `⟨(B·∇)u - (u·∇)B, ψ⟩ = -b(B,ψ,u) + b(u,ψ,B)`.
    pub fn apply_m2_identity(&self, u: &SpectralField, b: &SpectralField) -> Result<DualCoefficients> {
        require_div_free(b, "induction")?;
        require_div_free(u, "velocity")?;
        let f = self.advect(b, u)?.sub(&self.advect(u, b)?)?;
        Ok(self.pair(&f, SpaceTag::V2))
    }

    /// Pairings `∫∇u:∇v - 2∫ curl w · v` against the `V` basis.
    pub fn apply_r0(&self, u: &SpectralField, w: &SpectralField) -> Result<DualCoefficients> {
        self.check(&[u, w])?;
        require_div_free(u, "velocity")?;
        let mut f = u.neg_laplacian();
        f.axpy(-2.0, &w.curl())?;
        Ok(self.pair(&f, SpaceTag::V))
    }

    /// Pairings `∫ (curl H × h) · v_l` against the `V` basis.
    pub fn apply_r1(&self, h: &SpectralField, hh: &SpectralField) -> Result<DualCoefficients> {
        self.check(&[h])?;
        Ok(self.pair(&self.cross(&h.curl(), hh)?, SpaceTag::V))
    }

    /// `curl u - 2w`.
    pub fn apply_r2(&self, u: &SpectralField, w: &SpectralField) -> Result<SpectralField> {
        self.check(&[u, w])?;
        let mut f = u.curl().with_tag_unchecked(SpaceTag::W);
        f.axpy(-2.0, w)?;
        Ok(f)
    }

    /// `M × H`.
    pub fn apply_r3(&self, m: &SpectralField, h: &SpectralField) -> Result<SpectralField> {
        self.cross(m, h)
    }

    /// Pairings `-∫ div w div φ_l` against `target`.
    pub fn apply_r5(&self, w: &SpectralField, target: SpaceTag) -> Result<DualCoefficients> {
        self.check(&[w])?;
        Ok(self.pair(&w.grad_div(), target))
    }

    /// Pairings `∫ curl H · curl ψ_l` against `target`.
    pub fn apply_r6(&self, h: &SpectralField, target: SpaceTag) -> Result<DualCoefficients> {
        self.check(&[h])?;
        Ok(self.pair(&h.curl().curl(), target))
    }

    pub fn apply_stokes(&self, family: StokesFamily, f: &SpectralField) -> Result<DualCoefficients> {
        self.check(&[f])?;
        match family {
            StokesFamily::A => {
                if !f.conforms_to(SpaceTag::V) {
                    return Err(Error::Constraint("Stokes operator needs a field in V".into()));
                }
                Ok(self.pair(&f.neg_laplacian(), SpaceTag::V))
            }
            StokesFamily::A1 => Ok(self.pair(&f.neg_laplacian(), SpaceTag::W)),
        }
    }
}
