use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::galerkin::{GalerkinState, GalerkinSystem};
use crate::integrator::{StepContext, StepObserver};
use crate::noise::NoiseChannel;
use crate::operators::ProductEngine;

/// Dissipation terms of the summed Itô identity, in display order.
pub const DISSIPATION_NAMES: [&str; 9] = [
    "diss_nu_grad_u",
    "diss_lambda1_grad_w",
    "diss_lambda_curl_div_m",
    "diss_mu0_lambda_div_m",
    "diss_sigma_curl_h",
    "diss_tau_m",
    "diss_chi0_h",
    "diss_lambda12_div_w",
    "diss_alpha_vorticity",
];

/// `2(χ₀+μ₀)/τ ∫M·H` and `2μ₀λ ∫curl M·curl H`.
pub const SOURCE_NAMES: [&str; 2] = ["src_m_h", "src_curl_m_curl_h"];

/// `(μ₀+1)‖G(M)‖²`, `‖F₁(u)‖²`, `‖F₂(w)‖²`, `μ₀⁻¹‖F₃(H)‖²`.
pub const HS_NAMES: [&str; 4] = ["hs_magnetization", "hs_velocity", "hs_rotation", "hs_field"];

/// `2(u,F₁dβ¹)`, `2(w,F₂dβ²)`, `-2μ₀(H,G dβ³)`, `2(H,F₃dβ⁴)`.
pub const MARTINGALE_NAMES: [&str; 4] = ["mart_velocity", "mart_rotation", "mart_magnetization", "mart_field"];

/// CSV header of a ledger.
pub const COLUMN_NAMES: [&str; 25] = [
    "step",
    "time",
    "dt",
    "e_tot",
    "e_tot_next",
    DISSIPATION_NAMES[0],
    DISSIPATION_NAMES[1],
    DISSIPATION_NAMES[2],
    DISSIPATION_NAMES[3],
    DISSIPATION_NAMES[4],
    DISSIPATION_NAMES[5],
    DISSIPATION_NAMES[6],
    DISSIPATION_NAMES[7],
    DISSIPATION_NAMES[8],
    SOURCE_NAMES[0],
    SOURCE_NAMES[1],
    HS_NAMES[0],
    HS_NAMES[1],
    HS_NAMES[2],
    HS_NAMES[3],
    MARTINGALE_NAMES[0],
    MARTINGALE_NAMES[1],
    MARTINGALE_NAMES[2],
    MARTINGALE_NAMES[3],
    "residual",
];

/// Raw quadratic functionals of one state, before any coefficient.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Quadratics {
    pub grad_u: f64,
    pub grad_w: f64,
    pub curl_m: f64,
    pub div_m: f64,
    pub curl_h: f64,
    pub m: f64,
    pub h: f64,
    pub div_w: f64,
    /// `|curl u - 2w|²`.
    pub vorticity_gap: f64,
    /// `∫M·H`.
    pub m_dot_h: f64,
    /// `∫curl M·curl H`.
    pub curl_m_dot_curl_h: f64,
}

impl Quadratics {
    pub fn of<E: ProductEngine>(system: &GalerkinSystem<E>, y: &GalerkinState) -> Result<Self> {
        let f = system.reconstruct(y)?;
        let mut gap = f.u.curl().with_tag_unchecked(f.w.tag());
        gap.axpy(-2.0, &f.w)?;
        Ok(Quadratics {
            grad_u: f.u.grad_norm_sq(),
            grad_w: f.w.grad_norm_sq(),
            curl_m: f.m.curl_norm_sq(),
            div_m: f.m.div_norm_sq(),
            curl_h: f.h.curl_norm_sq(),
            m: f.m.l2_norm_sq(),
            h: f.h.l2_norm_sq(),
            div_w: f.w.div_norm_sq(),
            vorticity_gap: gap.l2_norm_sq(),
            m_dot_h: f.m.inner(&f.h)?,
            curl_m_dot_curl_h: f.m.curl().inner(&f.h.curl())?,
        })
    }
}

/// One step of the energy ledger, evaluated at the left endpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct LedgerRow {
    pub step: usize,
    pub time: f64,
    pub dt: f64,
    pub energy_before: f64,
    pub energy_after: f64,
    /// Rates, multiply by `dt` for the step contribution.
    pub dissipation: [f64; 9],
    pub sources: [f64; 2],
    pub hs: [f64; 4],
    /// Increments over the step.
    pub martingale: [f64; 4],
    /// `ΔE_tot - (-D + S + Q)Δt - ΣΔmartingale`.
    pub residual: f64,
    /// `2⟨y,Υ⟩_E - (-D + S)`, zero up to rounding when no term is missing.
    pub drift_power_defect: f64,
    pub quadratics: Quadratics,
}

impl LedgerRow {
    pub fn dissipation_total(&self) -> f64 {
        self.dissipation.iter().sum()
    }

    pub fn source_total(&self) -> f64 {
        self.sources.iter().sum()
    }

    pub fn hs_total(&self) -> f64 {
        self.hs.iter().sum()
    }

    pub fn martingale_total(&self) -> f64 {
        self.martingale.iter().sum()
    }

    /// Values in [`COLUMN_NAMES`] order.
    pub fn values(&self) -> [f64; 25] {
        let mut out = [0.0; 25];
        out[0] = self.step as f64;
        out[1] = self.time;
        out[2] = self.dt;
        out[3] = self.energy_before;
        out[4] = self.energy_after;
        out[5..14].copy_from_slice(&self.dissipation);
        out[14..16].copy_from_slice(&self.sources);
        out[16..20].copy_from_slice(&self.hs);
        out[20..24].copy_from_slice(&self.martingale);
        out[24] = self.residual;
        out
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

fn channel_slot(channel: NoiseChannel) -> (usize, usize) {
    // (HS column, martingale column) in display order
    match channel {
        NoiseChannel::Velocity => (1, 0),
        NoiseChannel::Rotation => (2, 1),
        NoiseChannel::Magnetization => (0, 2),
        NoiseChannel::Field => (3, 3),
    }
}

/// Fills every term of the summed Itô identity for the step
/// `before → after` driven by `drift`, `diffusion` and `increments`.
///
/// Quadratic-variation and martingale terms are taken from the diffusion
/// columns in the energy inner product, so they carry the Galerkin
/// projections that the state actually feels.
pub fn ito_ledger_step<E: ProductEngine>(
    system: &GalerkinSystem<E>,
    step: usize,
    time: f64,
    dt: f64,
    before: &GalerkinState,
    after: &GalerkinState,
    drift: &GalerkinState,
    diffusion: &[GalerkinState],
    increments: &[f64],
) -> Result<LedgerRow> {
    if diffusion.len() != increments.len() || diffusion.len() != system.noise().total_count() {
        return Err(Error::LengthMismatch { expected: system.noise().total_count(), found: increments.len() });
    }
    let p = system.params();
    let mu0 = p.mu0;
    let q = Quadratics::of(system, before)?;
    let dissipation = [
        2.0 * p.nu * q.grad_u,
        2.0 * p.lambda1 * q.grad_w,
        2.0 * p.lambda * (q.curl_m + q.div_m),
        2.0 * mu0 * p.lambda * q.div_m,
        2.0 / p.sigma * q.curl_h,
        2.0 / p.tau * q.m,
        2.0 * mu0 * p.chi0 / p.tau * q.h,
        2.0 * (p.lambda1 + p.lambda2) * q.div_w,
        2.0 * p.alpha * q.vorticity_gap,
    ];
    let sources = [2.0 * (p.chi0 + mu0) / p.tau * q.m_dot_h, 2.0 * mu0 * p.lambda * q.curl_m_dot_curl_h];
    let mut hs = [0.0; 4];
    let mut martingale = [0.0; 4];
    let noise = system.noise();
    for channel in NoiseChannel::ALL {
        let (hs_col, mart_col) = channel_slot(channel);
        let start = noise.offset(channel);
        for j in start..start + noise.count(channel) {
            let col = &diffusion[j];
            hs[hs_col] += col.energy(mu0);
            martingale[mart_col] += 2.0 * before.energy_inner(col, mu0)? * increments[j];
        }
    }
    let energy_before = before.energy(mu0);
    let energy_after = after.energy(mu0);
    let d: f64 = dissipation.iter().sum();
    let s: f64 = sources.iter().sum();
    let qv: f64 = hs.iter().sum();
    let residual = (energy_after - energy_before) - (-d + s + qv) * dt - martingale.iter().sum::<f64>();
    let drift_power_defect = 2.0 * before.energy_inner(drift, mu0)? - (-d + s);
    Ok(LedgerRow {
        step,
        time,
        dt,
        energy_before,
        energy_after,
        dissipation,
        sources,
        hs,
        martingale,
        residual,
        drift_power_defect,
        quadratics: q,
    })
}

/// Time-integrated ledger of one trajectory.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LedgerTotals {
    pub initial_energy: f64,
    pub final_energy: f64,
    pub dissipation: [f64; 9],
    pub sources: [f64; 2],
    pub hs: [f64; 4],
    pub martingale: [f64; 4],
    pub residual: f64,
    /// Left-endpoint integrals of the raw quadratics.
    pub quadratics: Quadratics,
}

/// Per-step energy ledger of one trajectory; also a [`StepObserver`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EnergyLedger {
    pub rows: Vec<LedgerRow>,
}

impl EnergyLedger {
    pub fn new() -> Self {
        EnergyLedger::default()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.rows.iter().all(LedgerRow::is_finite)
    }

    pub fn initial_energy(&self) -> Option<f64> {
        self.rows.first().map(|r| r.energy_before)
    }

    /// `E_tot` at every grid time reached, starting with the initial value.
    pub fn energies(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rows.len() + 1);
        if let Some(first) = self.rows.first() {
            out.push(first.energy_before);
        }
        out.extend(self.rows.iter().map(|r| r.energy_after));
        out
    }

    pub fn sup_energy(&self) -> f64 {
        self.energies().into_iter().fold(0.0, f64::max)
    }

    /// Totals over the first `steps` rows (all rows if `steps` exceeds the length).
    pub fn totals_until(&self, steps: usize) -> LedgerTotals {
        let rows = &self.rows[..steps.min(self.rows.len())];
        let mut t = LedgerTotals {
            initial_energy: self.initial_energy().unwrap_or(0.0),
            final_energy: rows.last().map(|r| r.energy_after).unwrap_or(self.initial_energy().unwrap_or(0.0)),
            ..LedgerTotals::default()
        };
        for r in rows {
            for (acc, v) in t.dissipation.iter_mut().zip(&r.dissipation) {
                *acc += v * r.dt;
            }
            for (acc, v) in t.sources.iter_mut().zip(&r.sources) {
                *acc += v * r.dt;
            }
            for (acc, v) in t.hs.iter_mut().zip(&r.hs) {
                *acc += v * r.dt;
            }
            for (acc, v) in t.martingale.iter_mut().zip(&r.martingale) {
                *acc += v;
            }
            t.residual += r.residual;
            let (q, a) = (&r.quadratics, &mut t.quadratics);
            a.grad_u += q.grad_u * r.dt;
            a.grad_w += q.grad_w * r.dt;
            a.curl_m += q.curl_m * r.dt;
            a.div_m += q.div_m * r.dt;
            a.curl_h += q.curl_h * r.dt;
            a.m += q.m * r.dt;
            a.h += q.h * r.dt;
            a.div_w += q.div_w * r.dt;
            a.vorticity_gap += q.vorticity_gap * r.dt;
            a.m_dot_h += q.m_dot_h * r.dt;
            a.curl_m_dot_curl_h += q.curl_m_dot_curl_h * r.dt;
        }
        t
    }

    pub fn totals(&self) -> LedgerTotals {
        self.totals_until(self.rows.len())
    }
}

impl<E: ProductEngine> StepObserver<E> for EnergyLedger {
    fn observe(&mut self, ctx: &StepContext<'_, E>) -> Result<()> {
        let row = ito_ledger_step(
            ctx.system,
            ctx.index,
            ctx.time,
            ctx.dt,
            ctx.before,
            ctx.after,
            ctx.drift,
            ctx.diffusion,
            ctx.increments,
        )?;
        self.rows.push(row);
        Ok(())
    }
}
