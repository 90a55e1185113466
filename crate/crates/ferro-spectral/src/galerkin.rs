//! Finite-dimensional Galerkin system: state layout, field reconstruction,
//! drift and diffusion.
//!
//! The state holds five coordinate blocks against orthonormal real bases:
//!
//! * `a`: velocity in `V`
//! * `b`: rotation in `W`
//! * `c`: solenoidal part of `M` in `V2`
//! * `d`: gradient part shared by `M` and `H`, in `Grad`
//! * `e`: solenoidal part of `H` in `V2`
//!
//! with `M = Σc ψ + Σd ∇φ`, `H = Σe ψ - Σd ∇φ` and `B = μ₀(M + H) = μ₀Σ(c+e)ψ`.
//! The gradient parts of `M` and `H` cancel identically, so `div B = 0` holds
//! in every state, and `u` lives in `V` so `div u = 0` as well.
//!
//! The `M` equation supplies the `c` and `d` rows. The `B` equation, which is
//! gradient-free, supplies `c + e`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};
use crate::math;
use crate::noise::{NoiseChannel, NoiseModel};
use crate::operators::{Operators, ProductEngine};
use crate::rng::StreamKey;
use crate::spectral::{Bases, SpaceTag, SpectralField};

/// Physical coefficients of the ferrofluid model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalParams {
    /// Kinematic viscosity `ν`.
    pub nu: f64,
    /// Angular viscosities `λ₁`, `λ₂`.
    pub lambda1: f64,
    pub lambda2: f64,
    /// Magnetization diffusion `λ`.
    pub lambda: f64,
    /// Relaxation time `τ`.
    pub tau: f64,
    /// Susceptibility `χ₀`.
    pub chi0: f64,
    /// Conductivity `σ`.
    pub sigma: f64,
    /// Permeability `μ₀`.
    pub mu0: f64,
    /// Vortex viscosity `α`.
    pub alpha: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            nu: 1.0,
            lambda1: 1.0,
            lambda2: 1.0,
            lambda: 0.1,
            tau: 1.0,
            chi0: 0.5,
            sigma: 1.0,
            mu0: 1.0,
            alpha: 0.5,
        }
    }
}

impl PhysicalParams {
    /// Each entry as `(name, value, meaning)`.
    pub fn entries(&self) -> [(&'static str, f64, &'static str); 9] {
        [
            ("nu", self.nu, "viscosity"),
            ("lambda1", self.lambda1, "angular viscosity"),
            ("lambda2", self.lambda2, "angular viscosity"),
            ("lambda", self.lambda, "magnetization diffusion"),
            ("tau", self.tau, "relaxation time"),
            ("chi0", self.chi0, "susceptibility"),
            ("sigma", self.sigma, "conductivity"),
            ("mu0", self.mu0, "permeability"),
            ("alpha", self.alpha, "vortex viscosity"),
        ]
    }

    /// Every violated constraint. `χ₀ = 0` is allowed (no induced magnetization);
    /// all other coefficients must be strictly positive.
    pub fn violations(&self) -> Vec<alloc::string::String> {
        let mut out = Vec::new();
        for (name, v, meaning) in self.entries() {
            let ok = if name == "chi0" { v >= 0.0 } else { v > 0.0 };
            if !v.is_finite() || !ok {
                let need = if name == "chi0" { "nonnegative" } else { "positive" };
                out.push(format!("{name} = {v}: the {meaning} must be finite and {need}"));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(v.join("; ")))
        }
    }
}

/// Block sizes of the state vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub v: usize,
    pub w: usize,
    pub v2: usize,
    pub grad: usize,
}

impl Layout {
    pub fn of(bases: &Bases) -> Self {
        Layout { v: bases.v.dim(), w: bases.w.dim(), v2: bases.v2.dim(), grad: bases.grad.dim() }
    }

    pub fn len(&self) -> usize {
        self.v + self.w + 2 * self.v2 + self.grad
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn a(&self) -> Range<usize> {
        0..self.v
    }

    pub fn b(&self) -> Range<usize> {
        let s = self.v;
        s..s + self.w
    }

    pub fn c(&self) -> Range<usize> {
        let s = self.v + self.w;
        s..s + self.v2
    }

    pub fn d(&self) -> Range<usize> {
        let s = self.v + self.w + self.v2;
        s..s + self.grad
    }

    pub fn e(&self) -> Range<usize> {
        let s = self.v + self.w + self.v2 + self.grad;
        s..s + self.v2
    }
}

/// Coordinates `(a, b, c, d, e)` stored contiguously.
#[derive(Clone, Debug, PartialEq)]
pub struct GalerkinState {
    layout: Layout,
    data: Vec<f64>,
}

/// Drift `Υ(y)` evaluated at a state; same layout as the state.
pub type DriftVector = GalerkinState;

impl GalerkinState {
    pub fn zeros(layout: Layout) -> Self {
        GalerkinState { layout, data: vec![0.0; layout.len()] }
    }

    pub fn from_vec(layout: Layout, data: Vec<f64>) -> Result<Self> {
        if data.len() != layout.len() {
            return Err(Error::LengthMismatch { expected: layout.len(), found: data.len() });
        }
        Ok(GalerkinState { layout, data })
    }

    pub fn from_blocks(layout: Layout, a: &[f64], b: &[f64], c: &[f64], d: &[f64], e: &[f64]) -> Result<Self> {
        let mut s = GalerkinState::zeros(layout);
        for (range, src) in [(layout.a(), a), (layout.b(), b), (layout.c(), c), (layout.d(), d), (layout.e(), e)] {
            if src.len() != range.len() {
                return Err(Error::LengthMismatch { expected: range.len(), found: src.len() });
            }
            s.data[range].copy_from_slice(src);
        }
        Ok(s)
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn a(&self) -> &[f64] {
        &self.data[self.layout.a()]
    }

    pub fn b(&self) -> &[f64] {
        &self.data[self.layout.b()]
    }

    pub fn c(&self) -> &[f64] {
        &self.data[self.layout.c()]
    }

    pub fn d(&self) -> &[f64] {
        &self.data[self.layout.d()]
    }

    pub fn e(&self) -> &[f64] {
        &self.data[self.layout.e()]
    }

    pub fn a_mut(&mut self) -> &mut [f64] {
        let r = self.layout.a();
        &mut self.data[r]
    }

    pub fn b_mut(&mut self) -> &mut [f64] {
        let r = self.layout.b();
        &mut self.data[r]
    }

    pub fn c_mut(&mut self) -> &mut [f64] {
        let r = self.layout.c();
        &mut self.data[r]
    }

    pub fn d_mut(&mut self) -> &mut [f64] {
        let r = self.layout.d();
        &mut self.data[r]
    }

    pub fn e_mut(&mut self) -> &mut [f64] {
        let r = self.layout.e();
        &mut self.data[r]
    }

    fn check(&self, other: &GalerkinState) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::LengthMismatch { expected: self.data.len(), found: other.data.len() });
        }
        Ok(())
    }

    /// `self += s·other`.
    pub fn axpy(&mut self, s: f64, other: &GalerkinState) -> Result<()> {
        self.check(other)?;
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += s * y;
        }
        Ok(())
    }

    pub fn scale(&mut self, s: f64) {
        for x in &mut self.data {
            *x *= s;
        }
    }

    pub fn scaled(&self, s: f64) -> GalerkinState {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    pub fn sub(&self, other: &GalerkinState) -> Result<GalerkinState> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    /// Euclidean inner product of the coordinate vectors.
    pub fn dot(&self, other: &GalerkinState) -> Result<f64> {
        self.check(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(x, y)| x * y).sum())
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(self.data.iter().map(|x| x * x).sum())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Inner product inducing `E_tot`: `a·a' + b·b' + c·c' + (1+μ₀)d·d' + μ₀e·e'`.
    pub fn energy_inner(&self, other: &GalerkinState, mu0: f64) -> Result<f64> {
        self.check(other)?;
        let dot = |r: Range<usize>| -> f64 { self.data[r.clone()].iter().zip(&other.data[r]).map(|(x, y)| x * y).sum() };
        let l = self.layout;
        Ok(dot(l.a()) + dot(l.b()) + dot(l.c()) + (1.0 + mu0) * dot(l.d()) + mu0 * dot(l.e()))
    }

    /// `E_tot = |u|² + |w|² + |M|² + μ₀|H|²`.
    pub fn energy(&self, mu0: f64) -> f64 {
        self.energy_inner(self, mu0).expect("same layout")
    }
}

/// Reconstructed physical fields.
#[derive(Clone, Debug, PartialEq)]
pub struct Fields {
    pub u: SpectralField,
    pub w: SpectralField,
    pub m: SpectralField,
    pub h: SpectralField,
    pub b: SpectralField,
}

/// Galerkin system at one truncation level.
#[derive(Clone, Debug)]
pub struct GalerkinSystem<E: ProductEngine> {
    params: PhysicalParams,
    ops: Operators<E>,
    noise: NoiseModel,
    layout: Layout,
}

impl<E: ProductEngine> GalerkinSystem<E> {
    pub fn new(engine: E, params: PhysicalParams, noise: NoiseModel) -> Result<Self> {
        params.validate()?;
        if noise.k_max() != engine.k_max() {
            return Err(Error::KMaxMismatch { left: engine.k_max(), right: noise.k_max() });
        }
        let ops = Operators::new(engine)?;
        let layout = Layout::of(ops.bases());
        Ok(GalerkinSystem { params, ops, noise, layout })
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn ops(&self) -> &Operators<E> {
        &self.ops
    }

    pub fn bases(&self) -> &Bases {
        self.ops.bases()
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn k_max(&self) -> usize {
        self.ops.k_max()
    }

    pub fn zero_state(&self) -> GalerkinState {
        GalerkinState::zeros(self.layout)
    }

    fn check(&self, y: &GalerkinState) -> Result<()> {
        if y.layout != self.layout {
            return Err(Error::LengthMismatch { expected: self.layout.len(), found: y.data.len() });
        }
        Ok(())
    }

    pub fn reconstruct(&self, y: &GalerkinState) -> Result<Fields> {
        self.check(y)?;
        let bs = self.bases();
        let k = self.k_max();
        let u = bs.v.to_field(y.a())?;
        let w = bs.w.to_field(y.b())?;
        let mut m = SpectralField::zeros(k, SpaceTag::V1);
        bs.v2.accumulate(y.c(), 1.0, &mut m);
        bs.grad.accumulate(y.d(), 1.0, &mut m);
        let mut h = SpectralField::zeros(k, SpaceTag::V1);
        bs.v2.accumulate(y.e(), 1.0, &mut h);
        bs.grad.accumulate(y.d(), -1.0, &mut h);
        let ce: Vec<f64> = y.c().iter().zip(y.e()).map(|(c, e)| c + e).collect();
        let mut b = SpectralField::zeros(k, SpaceTag::V2);
        bs.v2.accumulate(&ce, self.params.mu0, &mut b);
        Ok(Fields { u, w, m, h, b })
    }

    /// State of fields `(u, w, M, H)`. Requires `u ∈ V` and `div(M + H) = 0`,
    /// so the gradient parts of `M` and `H` are exactly opposite.
    pub fn state_from_fields(
        &self,
        u: &SpectralField,
        w: &SpectralField,
        m: &SpectralField,
        h: &SpectralField,
    ) -> Result<GalerkinState> {
        for f in [u, w, m, h] {
            if f.k_max() != self.k_max() {
                return Err(Error::KMaxMismatch { left: self.k_max(), right: f.k_max() });
            }
        }
        if !u.conforms_to(SpaceTag::V) {
            return Err(Error::Constraint("velocity must be divergence-free with zero mean".into()));
        }
        if !m.add(h)?.conforms_to(SpaceTag::V2) {
            return Err(Error::Constraint("div(M + H) must vanish".into()));
        }
        let bs = self.bases();
        let mut y = self.zero_state();
        y.a_mut().copy_from_slice(&bs.v.project_unchecked(u));
        y.b_mut().copy_from_slice(&bs.w.project_unchecked(w));
        y.c_mut().copy_from_slice(&bs.v2.project_unchecked(m));
        y.d_mut().copy_from_slice(&bs.grad.project_unchecked(m));
        y.e_mut().copy_from_slice(&bs.v2.project_unchecked(h));
        Ok(y)
    }

    /// Drift `Υ(y)`:
    ///
    /// * `u' = P_V[-νAu - (u·∇)u + μ₀(M·∇)H + μ₀ curl H × H - α(-Δu - 2 curl w)]`
    /// * `w' = -λ₁(-Δw) - (u·∇)w + (λ₁+λ₂)∇div w + 2α(curl u - 2w) + μ₀ M × H`
    /// * `M' = -(u·∇)M + w × M - (M - χ₀H)/τ - λ curl curl M + λ∇div M`
    /// * `B' = P_V2[-(1/σ) curl curl H + curl(u × B)]`
    ///
    /// and `e' = B'/μ₀ - c'`.
    pub fn drift(&self, y: &GalerkinState) -> Result<DriftVector> {
        let f = self.reconstruct(y)?;
        let p = &self.params;
        let eng = self.ops.engine();
        let bs = self.bases();
        let (pu, pw, pm, ph, pb) = (eng.prepare(&f.u), eng.prepare(&f.w), eng.prepare(&f.m), eng.prepare(&f.h), eng.prepare(&f.b));
        let curl_h = f.h.curl();
        let pch = eng.prepare(&curl_h);

        let mut fu = f.u.neg_laplacian().scaled(-(p.nu + p.alpha));
        fu.axpy(-1.0, &eng.advect(&pu, &pu))?;
        fu.axpy(p.mu0, &eng.advect(&pm, &ph))?;
        fu.axpy(p.mu0, &eng.cross(&pch, &ph))?;
        fu.axpy(2.0 * p.alpha, &f.w.curl())?;

        let mut fw = f.w.neg_laplacian().scaled(-p.lambda1);
        fw.axpy(-1.0, &eng.advect(&pu, &pw))?;
        fw.axpy(p.lambda1 + p.lambda2, &f.w.grad_div())?;
        fw.axpy(2.0 * p.alpha, &f.u.curl())?;
        fw.axpy(-4.0 * p.alpha, &f.w)?;
        fw.axpy(p.mu0, &eng.cross(&pm, &ph))?;

        let mut fm = eng.advect(&pu, &pm).scaled(-1.0);
        fm.axpy(1.0, &eng.cross(&pw, &pm))?;
        fm.axpy(-1.0 / p.tau, &f.m)?;
        fm.axpy(p.chi0 / p.tau, &f.h)?;
        fm.axpy(-p.lambda, &f.m.curl().curl())?;
        fm.axpy(p.lambda, &f.m.grad_div())?;

        let mut fb = curl_h.curl().scaled(-1.0 / p.sigma);
        fb.axpy(1.0, &eng.cross(&pu, &pb).curl())?;

        let mut out = self.zero_state();
        out.a_mut().copy_from_slice(&bs.v.project_unchecked(&fu));
        out.b_mut().copy_from_slice(&bs.w.project_unchecked(&fw));
        let c_rate = bs.v2.project_unchecked(&fm);
        let b_rate = bs.v2.project_unchecked(&fb);
        out.d_mut().copy_from_slice(&bs.grad.project_unchecked(&fm));
        for ((e, c), bb) in out.e_mut().iter_mut().zip(&c_rate).zip(&b_rate) {
            *e = bb / p.mu0 - c;
        }
        out.c_mut().copy_from_slice(&c_rate);
        if !out.is_finite() {
            return Err(Error::NonFinite("drift".into()));
        }
        Ok(out)
    }

    /// Diffusion columns in the flat Brownian ordering of the noise model.
    ///
    /// Velocity and rotation columns move `a` and `b`. A magnetization column
    /// moves `(c, d)` and sets `e = -c` so `B` is untouched. A field column moves
    /// `B` only, so `e` carries it divided by `μ₀`.
    pub fn diffusion(&self, y: &GalerkinState) -> Result<Vec<GalerkinState>> {
        let f = self.reconstruct(y)?;
        let bs = self.bases();
        let mut cols = Vec::with_capacity(self.noise.total_count());
        for channel in NoiseChannel::ALL {
            let src = match channel {
                NoiseChannel::Velocity => &f.u,
                NoiseChannel::Rotation => &f.w,
                NoiseChannel::Magnetization => &f.m,
                NoiseChannel::Field => &f.h,
            };
            if self.noise.count(channel) == 0 {
                continue;
            }
            for g in self.noise.apply_all(channel, src)? {
                let mut col = self.zero_state();
                match channel {
                    NoiseChannel::Velocity => col.a_mut().copy_from_slice(&bs.v.project_unchecked(&g)),
                    NoiseChannel::Rotation => col.b_mut().copy_from_slice(&bs.w.project_unchecked(&g)),
                    NoiseChannel::Magnetization => {
                        let c = bs.v2.project_unchecked(&g);
                        col.d_mut().copy_from_slice(&bs.grad.project_unchecked(&g));
                        for (e, x) in col.e_mut().iter_mut().zip(&c) {
                            *e = -x;
                        }
                        col.c_mut().copy_from_slice(&c);
                    }
                    NoiseChannel::Field => {
                        let inv = 1.0 / self.params.mu0;
                        for (e, x) in col.e_mut().iter_mut().zip(bs.v2.project_unchecked(&g)) {
                            *e = x * inv;
                        }
                    }
                }
                cols.push(col);
            }
        }
        Ok(cols)
    }

    pub fn energy(&self, y: &GalerkinState) -> f64 {
        y.energy(self.params.mu0)
    }

    /// Largest observed `‖Υ(y₁) - Υ(y₂)‖ / ‖y₁ - y₂‖` over `trials` random pairs
    /// in the Euclidean ball of radius `radius`.
    ///
    /// Pairs are scaled copies of radius-independent unit samples, so a sweep
    /// over radii compares like with like.
    pub fn local_lipschitz_probe(&self, radius: f64, trials: usize, seed: u64) -> Result<f64> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidConfig(format!("probe radius must be positive, got {radius}")));
        }
        let n = self.layout.len() as u64;
        let sample = |member: u64| -> GalerkinState {
            let key = StreamKey::new(seed, member);
            let mut y = self.zero_state();
            for (i, x) in y.as_mut_slice().iter_mut().enumerate() {
                *x = key.normal(i as u64, 0);
            }
            let len = y.norm();
            // radial coordinate so points fill the ball rather than its surface
            let r = math::powf(key.uniform(n, 1), 1.0 / n as f64);
            y.scaled(radius * r / len)
        };
        let mut best: f64 = 0.0;
        for t in 0..trials as u64 {
            let y1 = sample(2 * t);
            let y2 = sample(2 * t + 1);
            let dy = y1.sub(&y2)?;
            let df = self.drift(&y1)?.sub(&self.drift(&y2)?)?;
            best = best.max(df.norm() / dy.norm());
        }
        Ok(best)
    }
}
