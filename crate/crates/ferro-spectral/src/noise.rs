//! Transport noise: finite families of coefficient fields per channel, the
//! ellipticity and summability audit, and the diffusion maps `f ↦ (g_k·∇)f`.
//!
//! Each channel drives one unknown:
//!
//! | channel         | acts on | projected onto |
//! |-----------------|---------|----------------|
//! | `Velocity`      | `u`     | `V`            |
//! | `Rotation`      | `w`     | `W`            |
//! | `Magnetization` | `M`     | `V1`           |
//! | `Field`         | `H`     | `V2`           |
//!
//! The field channel lands in `V2` so the induced increment of `B` stays
//! divergence-free.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::{self, PI};
use crate::operators::{ModalEngine, ModalPrepared, ProductEngine};
use crate::spectral::{dual_norm, synthesize_on, Bases, Grid, SpaceTag, SpectralField};

/// Default number of sample points per axis for the ellipticity sweep.
pub const DEFAULT_VALIDATION_GRID: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NoiseChannel {
    Velocity,
    Rotation,
    Magnetization,
    Field,
}

impl NoiseChannel {
    pub const ALL: [NoiseChannel; 4] =
        [NoiseChannel::Velocity, NoiseChannel::Rotation, NoiseChannel::Magnetization, NoiseChannel::Field];

    pub fn as_str(self) -> &'static str {
        match self {
            NoiseChannel::Velocity => "velocity",
            NoiseChannel::Rotation => "rotation",
            NoiseChannel::Magnetization => "magnetization",
            NoiseChannel::Field => "field",
        }
    }

    /// Space the increments `(g_k·∇)f` are projected onto.
    pub fn target(self) -> SpaceTag {
        match self {
            NoiseChannel::Velocity => SpaceTag::V,
            NoiseChannel::Rotation => SpaceTag::W,
            NoiseChannel::Magnetization => SpaceTag::V1,
            NoiseChannel::Field => SpaceTag::V2,
        }
    }

    /// Members must be divergence-free on these channels.
    pub fn requires_div_free(self) -> bool {
        matches!(self, NoiseChannel::Magnetization | NoiseChannel::Field)
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for NoiseChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseChannel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NoiseChannel::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown noise channel `{s}`")))
    }
}

/// Coefficient fields `g_1, …, g_K` of one channel.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseFamily {
    pub channel: NoiseChannel,
    pub members: Vec<SpectralField>,
}

impl NoiseFamily {
    pub fn new(channel: NoiseChannel, members: Vec<SpectralField>) -> Self {
        NoiseFamily { channel, members }
    }

    pub fn empty(channel: NoiseChannel) -> Self {
        NoiseFamily { channel, members: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Ellipticity margins keyed by the channel they constrain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipticityMargins {
    pub velocity: f64,
    pub rotation: f64,
    pub magnetization: f64,
    pub field: f64,
}

impl EllipticityMargins {
    /// Margins of a noise-free model.
    pub const NOISE_FREE: EllipticityMargins =
        EllipticityMargins { velocity: 2.0, rotation: 2.0, magnetization: 2.0, field: 2.0 };

    pub fn get(&self, channel: NoiseChannel) -> f64 {
        match channel {
            NoiseChannel::Velocity => self.velocity,
            NoiseChannel::Rotation => self.rotation,
            NoiseChannel::Magnetization => self.magnetization,
            NoiseChannel::Field => self.field,
        }
    }

    pub fn set(&mut self, channel: NoiseChannel, value: f64) {
        match channel {
            NoiseChannel::Velocity => self.velocity = value,
            NoiseChannel::Rotation => self.rotation = value,
            NoiseChannel::Magnetization => self.magnetization = value,
            NoiseChannel::Field => self.field = value,
        }
    }
}

/// Immutable noise model at one truncation level.
#[derive(Clone, Debug)]
pub struct NoiseModel {
    k_max: usize,
    families: [NoiseFamily; 4],
    prepared: [Vec<ModalPrepared>; 4],
    engine: ModalEngine,
}

impl NoiseModel {
    /// Families missing from `families` are empty. Members with a lower
    /// bandlimit are padded to `k_max`; a higher bandlimit is rejected.
    pub fn new(k_max: usize, families: Vec<NoiseFamily>) -> Result<Self> {
        let mut slots: [Option<NoiseFamily>; 4] = Default::default();
        for mut fam in families {
            let slot = fam.channel.slot();
            if slots[slot].is_some() {
                return Err(Error::InvalidConfig(format!("noise channel `{}` declared twice", fam.channel)));
            }
            for (i, m) in fam.members.iter_mut().enumerate() {
                if m.k_max() > k_max {
                    return Err(Error::InvalidConfig(format!(
                        "{} noise member {i} has bandlimit {} above k_max {k_max}",
                        fam.channel,
                        m.k_max()
                    )));
                }
                if !m.is_finite() {
                    return Err(Error::NonFinite(format!("{} noise member {i}", fam.channel)));
                }
                if m.k_max() < k_max {
                    *m = m.resized(k_max);
                }
            }
            slots[slot] = Some(fam);
        }
        let families: [NoiseFamily; 4] =
            core::array::from_fn(|i| slots[i].take().unwrap_or_else(|| NoiseFamily::empty(NoiseChannel::ALL[i])));
        let engine = ModalEngine::new(k_max);
        let prepared = core::array::from_fn(|i| families[i].members.iter().map(|m| engine.prepare(m)).collect());
        Ok(NoiseModel { k_max, families, prepared, engine })
    }

    pub fn noise_free(k_max: usize) -> Self {
        NoiseModel::new(k_max, Vec::new()).expect("empty model is valid")
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn family(&self, channel: NoiseChannel) -> &NoiseFamily {
        &self.families[channel.slot()]
    }

    pub fn count(&self, channel: NoiseChannel) -> usize {
        self.families[channel.slot()].len()
    }

    /// Total number of scalar Brownian channels, in the order velocity,
    /// rotation, magnetization, field.
    pub fn total_count(&self) -> usize {
        self.families.iter().map(NoiseFamily::len).sum()
    }

    /// Offset of `channel`'s first Brownian index in the flat ordering.
    pub fn offset(&self, channel: NoiseChannel) -> usize {
        self.families[..channel.slot()].iter().map(NoiseFamily::len).sum()
    }

    /// `(g_k·∇)f` projected onto the channel's space.
    pub fn apply(&self, channel: NoiseChannel, f: &SpectralField, k: usize) -> Result<SpectralField> {
        let members = &self.prepared[channel.slot()];
        if k >= members.len() {
            return Err(Error::IndexOutOfRange { index: k, len: members.len() });
        }
        self.engine.check(f)?;
        let g = &members[k];
        let raw = self.engine.advect(g, &self.engine.prepare(f));
        Ok(raw.project(channel.target()))
    }

    /// All columns of one channel.
    pub fn apply_all(&self, channel: NoiseChannel, f: &SpectralField) -> Result<Vec<SpectralField>> {
        self.engine.check(f)?;
        let pf = self.engine.prepare(f);
        Ok(self.prepared[channel.slot()]
            .iter()
            .map(|g| self.engine.advect(g, &pf).project(channel.target()))
            .collect())
    }

    /// `Σ_k ‖(g_k·∇)f‖²` with the channel's projection applied.
    pub fn hs_norm_sq(&self, channel: NoiseChannel, f: &SpectralField) -> Result<f64> {
        Ok(self.apply_all(channel, f)?.iter().map(SpectralField::l2_norm_sq).sum())
    }

    /// `Σ_k ‖(g_k·∇)f‖²` in the dual norm of the channel's space.
    pub fn hs_dual_norm_sq(&self, channel: NoiseChannel, f: &SpectralField, bases: &Bases) -> Result<f64> {
        if bases.k_max() != self.k_max {
            return Err(Error::KMaxMismatch { left: self.k_max, right: bases.k_max() });
        }
        let basis = bases.get(channel.target());
        let mut total = 0.0;
        for col in self.apply_all(channel, f)? {
            let n = dual_norm(&basis.pair(&col)?, basis)?;
            total += n * n;
        }
        Ok(total)
    }
}

/// Audit of one channel.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelReport {
    pub channel: NoiseChannel,
    pub members: usize,
    /// Summability constant of the channel.
    pub summability: f64,
    /// Minimum over the sample grid of the smallest eigenvalue of `2I - Σ g_k g_kᵀ`.
    pub min_eig: f64,
    /// Sample point attaining `min_eig`.
    pub argmin: [f64; 3],
    /// Upper bound on how far the continuum minimum can sit below `min_eig`.
    pub lipschitz_margin: f64,
    pub div_free: bool,
    pub pass: bool,
}

/// Result of [`validate_assumptions`].
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseValidationReport {
    pub grid: usize,
    pub channels: [ChannelReport; 4],
    /// Every failed condition, in channel order.
    pub violations: Vec<String>,
    pub pass: bool,
}

impl NoiseValidationReport {
    pub fn channel(&self, channel: NoiseChannel) -> &ChannelReport {
        &self.channels[channel.slot()]
    }

    /// `Σ (‖b_k‖²_∞ + ‖div b_k‖²_∞)` over velocity members.
    pub fn c5(&self) -> f64 {
        self.channel(NoiseChannel::Velocity).summability
    }

    /// `Σ (‖f_k‖²_∞ + ‖div f_k‖²_∞)` over rotation members.
    pub fn c6(&self) -> f64 {
        self.channel(NoiseChannel::Rotation).summability
    }

    /// `Σ ‖j_k‖²_{W^{1,∞}}` over field members, with `‖j‖_{W^{1,∞}} = ‖j‖_∞ + ‖∇j‖_∞`.
    pub fn c7(&self) -> f64 {
        self.channel(NoiseChannel::Field).summability
    }

    /// `Σ ‖σ_k‖²_∞` over magnetization members.
    pub fn c8(&self) -> f64 {
        self.channel(NoiseChannel::Magnetization).summability
    }

    /// Velocity margin.
    pub fn c1(&self) -> f64 {
        self.channel(NoiseChannel::Velocity).min_eig
    }

    /// Rotation margin.
    pub fn c2(&self) -> f64 {
        self.channel(NoiseChannel::Rotation).min_eig
    }

    /// Field margin (the `j_k` family).
    pub fn c3(&self) -> f64 {
        self.channel(NoiseChannel::Field).min_eig
    }

    /// Magnetization margin (the `σ_k` family).
    pub fn c4(&self) -> f64 {
        self.channel(NoiseChannel::Magnetization).min_eig
    }

    pub fn margins(&self) -> EllipticityMargins {
        let mut m = EllipticityMargins::NOISE_FREE;
        for c in &self.channels {
            m.set(c.channel, c.min_eig);
        }
        m
    }
}

fn partial(f: &SpectralField, axis: usize) -> SpectralField {
    let mut out = f.clone();
    let cube = f.cube();
    for (i, c) in out.coeffs_mut().iter_mut().enumerate() {
        let s = Complex64::new(0.0, cube.wavevector(i)[axis] as f64);
        for x in c.iter_mut() {
            *x *= s;
        }
    }
    out.with_tag_unchecked(SpaceTag::W)
}

/// `(Σ_k |ĝ(k)|, Σ_k |k||ĝ(k)|)`: bounds on `‖g‖_∞` and `‖∇g‖_∞`.
fn coefficient_bounds(f: &SpectralField) -> (f64, f64) {
    let cube = f.cube();
    let mut sup = 0.0;
    let mut grad = 0.0;
    for (i, c) in f.coeffs().iter().enumerate() {
        let a = math::sqrt(c.iter().map(|z| z.norm_sqr()).sum());
        let k = cube.wavevector(i);
        sup += a;
        grad += a * math::sqrt(crate::spectral::norm_sq(k) as f64);
    }
    (sup, grad)
}

/// Summability constants, divergence conditions and a grid sweep of the
/// ellipticity matrices `2I - Σ g_k(x) g_k(x)ᵀ`.
///
/// `min_eig` is the grid minimum. Between grid points the eigenvalue can dip
/// by at most `lipschitz_margin`, a bound computed from coefficient sums, and a
/// channel passes only if `min_eig - lipschitz_margin > 0`.
pub fn validate_assumptions(model: &NoiseModel, grid_size: usize) -> Result<NoiseValidationReport> {
    let required = 2 * model.k_max + 1;
    if grid_size < required {
        return Err(Error::GridTooSmall { grid: grid_size, required });
    }
    let grid = Grid::new(grid_size);
    let npts = grid_size * grid_size * grid_size;
    let spacing = 2.0 * PI / grid_size as f64;
    let reach = 0.5 * math::sqrt(3.0) * spacing;
    let mut violations = Vec::new();

    let channels = NoiseChannel::ALL.map(|channel| {
        let fam = model.family(channel);
        let mut s = alloc::vec![[[0.0f64; 3]; 3]; npts];
        let mut summability = 0.0;
        let mut lip = 0.0;
        let mut div_free = true;
        for (idx, g) in fam.members.iter().enumerate() {
            let vals = synthesize_on(&grid, g);
            let parts: [_; 3] = core::array::from_fn(|a| synthesize_on(&grid, &partial(g, a)));
            let (mut sup, mut sup_div, mut sup_grad) = (0.0f64, 0.0f64, 0.0f64);
            for p in 0..npts {
                let v = [vals.data[0][p], vals.data[1][p], vals.data[2][p]];
                let mut div = 0.0;
                let mut grad_sq = 0.0;
                for a in 0..3 {
                    div += parts[a].data[a][p];
                    for d in 0..3 {
                        grad_sq += parts[a].data[d][p] * parts[a].data[d][p];
                    }
                }
                sup = sup.max(math::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
                sup_div = sup_div.max(math::abs(div));
                sup_grad = sup_grad.max(math::sqrt(grad_sq));
                for i in 0..3 {
                    for j in 0..3 {
                        s[p][i][j] += v[i] * v[j];
                    }
                }
            }
            summability += match channel {
                NoiseChannel::Velocity | NoiseChannel::Rotation => sup * sup + sup_div * sup_div,
                NoiseChannel::Field => (sup + sup_grad) * (sup + sup_grad),
                NoiseChannel::Magnetization => sup * sup,
            };
            let (gb, db) = coefficient_bounds(g);
            lip += 2.0 * gb * db;
            if channel.requires_div_free() && g.div_coeff_norm() > 1e-12 * model.k_max as f64 * g.max_abs_coeff().max(f64::MIN_POSITIVE) {
                div_free = false;
                violations.push(format!("{channel} noise member {idx} is not divergence-free"));
            }
        }
        let mut min_eig = 2.0;
        let mut argmin = [0.0; 3];
        if !fam.is_empty() {
            for (p, sp) in s.iter().enumerate() {
                let mut m = [[0.0; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        m[i][j] = if i == j { 2.0 } else { 0.0 } - sp[i][j];
                    }
                }
                let e = math::sym3_min_eig(m);
                if e < min_eig {
                    min_eig = e;
                    argmin = grid.point(p);
                }
            }
        }
        let lipschitz_margin = lip * reach;
        let elliptic = min_eig - lipschitz_margin > 0.0;
        if !elliptic {
            violations.push(format!(
                "{channel} ellipticity margin {min_eig:.6} (safety margin {lipschitz_margin:.6}) is not positive at x = ({:.4}, {:.4}, {:.4})",
                argmin[0], argmin[1], argmin[2]
            ));
        }
        ChannelReport {
            channel,
            members: fam.len(),
            summability,
            min_eig,
            argmin,
            lipschitz_margin,
            div_free,
            pass: elliptic && div_free,
        }
    });
    let pass = channels.iter().all(|c| c.pass);
    Ok(NoiseValidationReport { grid: grid_size, channels, violations, pass })
}

#[cfg(test)]
mod tests;
