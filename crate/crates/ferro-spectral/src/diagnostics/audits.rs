use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::admissibility::{AdmissibilityParams, AprioriBrackets};
use super::ledger::EnergyLedger;
use super::EstimateReport;
use crate::error::{Error, Result};
use crate::galerkin::{GalerkinSystem, PhysicalParams};
use crate::integrator::TrajectoryRecord;
use crate::math;
use crate::operators::{BFamily, ProductEngine, StokesFamily};
use crate::spectral::{dual_norm, RealBasis, SpaceTag, SpectralField};
use crate::stats::{log_log_slope, Summary};

/// Largest relative change of a fitted constant between half and full ensemble.
pub const FIT_STABILITY: f64 = 0.2;

/// Smallest ensemble accepted by [`pmoment_check`].
pub const MIN_MOMENT_ENSEMBLE: usize = 100;

/// Empirical constant `mean(samples)/scale`, fitted on the first half of the
/// ensemble and on all of it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FittedConstant {
    pub half: f64,
    pub full: f64,
    /// `|half - full| / full`.
    pub relative_change: f64,
    pub stable: bool,
}

pub fn fitted_constant_stability(samples: &[f64], scale: f64) -> FittedConstant {
    let full = Summary::of(samples).mean / scale;
    let half = Summary::of(&samples[..samples.len() / 2]).mean / scale;
    let relative_change = if full == 0.0 && half == 0.0 { 0.0 } else { math::abs(half - full) / math::abs(full) };
    FittedConstant { half, full, relative_change, stable: relative_change <= FIT_STABILITY }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AprioriReport {
    pub brackets: AprioriBrackets,
    /// Coefficients of `∫|M|²` and `∫|H|²` on the right-hand side.
    pub growth: [f64; 2],
    /// Pre-Gronwall inequality at the grid time with the smallest slack.
    pub pre_gronwall: EstimateReport,
    pub worst_time: f64,
    /// `E[sup_t E_tot] / (1 + E_tot(0))`.
    pub sup_energy: FittedConstant,
    pub pass: bool,
}

fn common_len(ledgers: &[EnergyLedger]) -> Result<usize> {
    if ledgers.is_empty() {
        return Err(Error::InvalidConfig("audit needs at least one ledger".into()));
    }
    let n = ledgers.iter().map(EnergyLedger::len).min().unwrap_or(0);
    if n == 0 {
        return Err(Error::InvalidConfig("audit needs ledgers with at least one step".into()));
    }
    Ok(n)
}

/// Checks the bracket coefficients and the pre-Gronwall inequality
///
/// `E[E_tot(t)] + Σ bracket·E∫dissipation ≤ E_tot(0) + g_M E∫|M|² + g_H E∫|H|²`
///
/// at every grid time, then fits `E[sup E_tot] ≤ C(1 + E_tot(0))`.
pub fn apriori_check(
    ledgers: &[EnergyLedger],
    params: &PhysicalParams,
    adm: &AdmissibilityParams,
) -> Result<AprioriReport> {
    let brackets = AprioriBrackets::estimate(params, adm);
    let bad = brackets.violations();
    if !bad.is_empty() {
        return Err(Error::InvalidConfig(bad.join("; ")));
    }
    let steps = common_len(ledgers)?;
    let p = params;
    let (m, c0) = (&adm.margins, adm.norm_constant);
    let growth = [
        1.0 + (p.mu0 + 1.0) * (2.0 - m.magnetization) * c0,
        (2.0 - m.field) * c0 / p.mu0 + (p.mu0 * p.mu0 + p.chi0 * p.chi0) / p.tau,
    ];
    let b = brackets.values;
    let mut lhs = vec![vec![0.0; ledgers.len()]; steps];
    let mut rhs = vec![vec![0.0; ledgers.len()]; steps];
    for (j, ledger) in ledgers.iter().enumerate() {
        let e0 = ledger.rows[0].energy_before;
        let mut dissipation = 0.0;
        let mut source = 0.0;
        for (n, r) in ledger.rows[..steps].iter().enumerate() {
            let q = &r.quadratics;
            dissipation += r.dt
                * (b[0] * q.grad_u
                    + b[1] * q.grad_w
                    + b[2] * q.curl_m
                    + b[3] * q.curl_h
                    + 2.0 / p.tau * q.m
                    + b[4] * q.div_m
                    + 2.0 * (p.lambda1 + p.lambda2) * q.div_w
                    + 2.0 * p.alpha * q.vorticity_gap);
            source += r.dt * (growth[0] * q.m + growth[1] * q.h);
            lhs[n][j] = r.energy_after + dissipation;
            rhs[n][j] = e0 + source;
        }
    }
    let mut worst: Option<(EstimateReport, f64)> = None;
    for n in 0..steps {
        let rep = EstimateReport::from_differences("pre_gronwall", &lhs[n], &rhs[n]);
        let slack = rep.margin + 3.0 * rep.std_error;
        let t = ledgers[0].rows[n].time + ledgers[0].rows[n].dt;
        let replace = match &worst {
            None => true,
            Some((w, _)) => w.pass && (!rep.pass || slack < w.margin + 3.0 * w.std_error),
        };
        if replace {
            worst = Some((rep, t));
        }
    }
    let (pre_gronwall, worst_time) = worst.expect("at least one step");
    let sups: Vec<f64> = ledgers.iter().map(|l| sup_until(l, steps)).collect();
    let e0 = Summary::of(&ledgers.iter().map(|l| l.rows[0].energy_before).collect::<Vec<_>>()).mean;
    let sup_energy = fitted_constant_stability(&sups, 1.0 + e0);
    let pass = pre_gronwall.pass && sup_energy.stable && sup_energy.full.is_finite();
    Ok(AprioriReport { brackets, growth, pre_gronwall, worst_time, sup_energy, pass })
}

fn sup_until(ledger: &EnergyLedger, steps: usize) -> f64 {
    ledger.rows[..steps].iter().fold(ledger.rows[0].energy_before, |s, r| s.max(r.energy_after))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub p: f64,
    /// `E[sup_t E_tot^p]`.
    pub sup_energy: Summary,
    /// `E[(∫ dissipation)^p]`.
    pub dissipation: Summary,
    /// Both moments divided by `(1 + E_tot(0))^p`.
    pub energy_fit: FittedConstant,
    pub dissipation_fit: FittedConstant,
    pub pass: bool,
}

/// `p`-th moments of the running supremum of `E_tot` and of the integrated
/// dissipation, with constants fitted against `(1 + E_tot(0))^p`.
pub fn pmoment_check(ledgers: &[EnergyLedger], p: f64) -> Result<MomentReport> {
    if !(2.0..=4.0).contains(&p) {
        return Err(Error::InvalidConfig(format!("moment order p = {p} must lie in [2, 4]")));
    }
    if ledgers.len() < MIN_MOMENT_ENSEMBLE {
        return Err(Error::InvalidConfig(format!(
            "moment audit needs at least {MIN_MOMENT_ENSEMBLE} members, got {}",
            ledgers.len()
        )));
    }
    let steps = common_len(ledgers)?;
    let sups: Vec<f64> = ledgers.iter().map(|l| math::powf(sup_until(l, steps), p)).collect();
    let diss: Vec<f64> = ledgers
        .iter()
        .map(|l| {
            let d: f64 = l.rows[..steps].iter().map(|r| r.dissipation_total() * r.dt).sum();
            math::powf(d, p)
        })
        .collect();
    let e0 = Summary::of(&ledgers.iter().map(|l| l.rows[0].energy_before).collect::<Vec<_>>()).mean;
    let scale = math::powf(1.0 + e0, p);
    let energy_fit = fitted_constant_stability(&sups, scale);
    let dissipation_fit = fitted_constant_stability(&diss, scale);
    let sup_energy = Summary::of(&sups);
    let dissipation = Summary::of(&diss);
    let pass = sup_energy.mean.is_finite() && dissipation.mean.is_finite() && energy_fit.stable && dissipation_fit.stable;
    Ok(MomentReport { p, sup_energy, dissipation, energy_fit, dissipation_fit, pass })
}

/// Integrands of the drift dual-norm ledger, with their exponents.
pub const DUAL_NORM_NAMES: [(&str, f64); 16] = [
    ("u:A(u)", 2.0),
    ("u:B0(u,u)", 4.0 / 3.0),
    ("u:M0(M,H)", 8.0 / 7.0),
    ("u:R1(H,H)", 8.0 / 7.0),
    ("u:R0(u,w)", 2.0),
    ("w:A1(w)", 2.0),
    ("w:B1(u,w)", 4.0 / 3.0),
    ("w:R5(w)", 2.0),
    ("w:R2(u,w)", 2.0),
    ("w:R3(M,H)", 4.0 / 3.0),
    ("M:R6(M)", 2.0),
    ("M:R5(M)", 2.0),
    ("M:B2(u,M)", 4.0 / 3.0),
    ("M:w x M", 2.0),
    ("B:R6(H)", 2.0),
    ("B:M2(u,B)", 4.0 / 3.0),
];

#[derive(Clone, Debug, PartialEq)]
pub struct DualNormAudit {
    /// Per member, the time integral of each integrand in [`DUAL_NORM_NAMES`] order.
    pub integrals: Vec<[f64; 16]>,
    /// Ensemble mean of each integral.
    pub means: [f64; 16],
    /// Fitted `C₉`, the ensemble mean of the summed integrals; `None` for a single member.
    pub constant: Option<FittedConstant>,
    pub finite: bool,
    pub pass: bool,
}

/// Every integrand of the dual-norm ledger at one state.
pub fn dual_norm_integrands<E: ProductEngine>(
    system: &GalerkinSystem<E>,
    state: &crate::galerkin::GalerkinState,
) -> Result<[f64; 16]> {
    let f = system.reconstruct(state)?;
    let ops = system.ops();
    let bs = system.bases();
    let (u, w, m, h, b) = (&f.u, &f.w, &f.m, &f.h, &f.b);
    let field_pair = |g: &SpectralField, basis: &RealBasis| -> Result<f64> { dual_norm(&basis.pair(g)?, basis) };
    let norms = [
        dual_norm(&ops.apply_stokes(StokesFamily::A, u)?, &bs.v)?,
        dual_norm(&ops.apply_b(BFamily::B0, u, u)?, &bs.v)?,
        dual_norm(&ops.apply_m0(m, h)?, &bs.v)?,
        dual_norm(&ops.apply_r1(h, h)?, &bs.v)?,
        dual_norm(&ops.apply_r0(u, w)?, &bs.v)?,
        dual_norm(&ops.apply_stokes(StokesFamily::A1, w)?, &bs.w)?,
        dual_norm(&ops.apply_b(BFamily::B1, u, w)?, &bs.w)?,
        dual_norm(&ops.apply_r5(w, SpaceTag::W)?, &bs.w)?,
        field_pair(&ops.apply_r2(u, w)?, &bs.w)?,
        field_pair(&ops.apply_r3(m, h)?, &bs.w)?,
        dual_norm(&ops.apply_r6(m, SpaceTag::V1)?, &bs.v1)?,
        dual_norm(&ops.apply_r5(m, SpaceTag::V1)?, &bs.v1)?,
        dual_norm(&ops.apply_b(BFamily::B2, u, m)?, &bs.v1)?,
        field_pair(&ops.cross(w, m)?, &bs.v1)?,
        dual_norm(&ops.apply_r6(h, SpaceTag::V2)?, &bs.v2)?,
        dual_norm(&ops.apply_m2(u, b)?, &bs.v2)?,
    ];
    let mut out = [0.0; 16];
    for ((o, n), (_, e)) in out.iter_mut().zip(norms).zip(DUAL_NORM_NAMES) {
        *o = math::powf(n, e);
    }
    Ok(out)
}

/// Left-endpoint time integrals over the snapshots of each member of the
/// drift dual-norm ledger.
pub fn drift_dual_norm_audit<E: ProductEngine>(
    system: &GalerkinSystem<E>,
    records: &[TrajectoryRecord],
) -> Result<DualNormAudit> {
    let mut integrals = Vec::with_capacity(records.len());
    for rec in records {
        let mut acc = [0.0; 16];
        for i in 0..rec.states.len().saturating_sub(1) {
            let dt = rec.times[i + 1] - rec.times[i];
            let q = dual_norm_integrands(system, &rec.states[i])?;
            for (a, v) in acc.iter_mut().zip(q) {
                *a += v * dt;
            }
        }
        integrals.push(acc);
    }
    let mut means = [0.0; 16];
    for (k, m) in means.iter_mut().enumerate() {
        *m = Summary::of(&integrals.iter().map(|x| x[k]).collect::<Vec<_>>()).mean;
    }
    let totals: Vec<f64> = integrals.iter().map(|x| x.iter().sum()).collect();
    let finite = totals.iter().all(|t| t.is_finite());
    let constant = (totals.len() >= 2).then(|| fitted_constant_stability(&totals, 1.0));
    let pass = finite && constant.map_or(true, |c| c.stable);
    Ok(DualNormAudit { integrals, means, constant, finite, pass })
}

/// Names of the translated quantities, their exponents and the leading small-`θ` rate.
pub const TRANSLATION_NAMES: [(&str, f64, f64); 5] = [
    ("u", 8.0 / 7.0, 1.0 / 7.0),
    ("w", 4.0 / 3.0, 1.0 / 3.0),
    ("M", 4.0 / 3.0, 1.0 / 3.0),
    ("H", 4.0 / 3.0, 1.0 / 3.0),
    ("B", 4.0 / 3.0, 1.0 / 3.0),
];

/// Slack allowed below the leading exponent.
pub const TRANSLATION_SLACK: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct TranslationReport {
    pub thetas: Vec<f64>,
    /// Mean translation difference per `θ`, in [`TRANSLATION_NAMES`] order.
    pub means: Vec<[f64; 5]>,
    pub std_errors: Vec<[f64; 5]>,
    /// Log-log slope over the positive `θ`; `None` with fewer than two.
    pub slopes: Option<[f64; 5]>,
    pub pass: [bool; 5],
}

impl TranslationReport {
    pub fn all_pass(&self) -> bool {
        self.pass.iter().all(|p| *p)
    }
}

fn translation_norms<E: ProductEngine>(
    system: &GalerkinSystem<E>,
    a: &crate::galerkin::GalerkinState,
    b: &crate::galerkin::GalerkinState,
) -> Result<[f64; 5]> {
    let d = system.reconstruct(&b.sub(a)?)?;
    let bs = system.bases();
    let n = |f: &SpectralField, basis: &RealBasis| -> Result<f64> { dual_norm(&basis.pair(f)?, basis) };
    let raw = [n(&d.u, &bs.v)?, n(&d.w, &bs.w)?, n(&d.m, &bs.v2)?, n(&d.h, &bs.v1)?, n(&d.b, &bs.v1)?];
    let mut out = [0.0; 5];
    for ((o, r), (_, e, _)) in out.iter_mut().zip(raw).zip(TRANSLATION_NAMES) {
        *o = math::powf(r, e);
    }
    Ok(out)
}

/// `E‖y(t+θ) - y(t)‖^p` in the dual norms of each unknown, averaged over the
/// members and over every snapshot time `t` with `t + θ` on the grid.
///
/// Every `θ` must be a multiple of the snapshot spacing and at most the horizon.
pub fn translation_diagnostic<E: ProductEngine>(
    system: &GalerkinSystem<E>,
    records: &[TrajectoryRecord],
    thetas: &[f64],
) -> Result<TranslationReport> {
    let first = records.first().ok_or_else(|| Error::InvalidConfig("translation needs trajectories".into()))?;
    if first.times.len() < 2 {
        return Err(Error::InvalidConfig("translation needs at least two snapshots".into()));
    }
    let h = first.times[1] - first.times[0];
    let horizon = *first.times.last().expect("nonempty");
    let mut lags = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        if !(theta >= 0.0) || theta > horizon * (1.0 + 1e-12) {
            return Err(Error::InvalidConfig(format!("theta = {theta} outside [0, {horizon}]")));
        }
        let lag = math::round(theta / h);
        if math::abs(lag * h - theta) > 1e-9 * h.max(theta) {
            return Err(Error::InvalidConfig(format!("theta = {theta} is not a multiple of the snapshot spacing {h}")));
        }
        lags.push(lag as usize);
    }
    let usable: Vec<&TrajectoryRecord> = records.iter().filter(|r| r.succeeded()).collect();
    let mut means = Vec::with_capacity(lags.len());
    let mut std_errors = Vec::with_capacity(lags.len());
    for &lag in &lags {
        // per-member time averages, so the SE reflects independent paths
        let mut samples: [Vec<f64>; 5] = Default::default();
        for rec in &usable {
            let count = rec.states.len().saturating_sub(lag);
            if count == 0 {
                continue;
            }
            let mut acc = [0.0; 5];
            if lag > 0 {
                for i in 0..count {
                    let v = translation_norms(system, &rec.states[i], &rec.states[i + lag])?;
                    for (a, x) in acc.iter_mut().zip(v) {
                        *a += x;
                    }
                }
            }
            for (s, a) in samples.iter_mut().zip(acc) {
                s.push(a / count as f64);
            }
        }
        let mut m = [0.0; 5];
        let mut se = [0.0; 5];
        for k in 0..5 {
            let s = Summary::of(&samples[k]);
            m[k] = s.mean;
            se[k] = s.std_error;
        }
        means.push(m);
        std_errors.push(se);
    }
    let positive: Vec<usize> = (0..lags.len()).filter(|&i| lags[i] > 0).collect();
    let slopes = (positive.len() >= 2).then(|| {
        let xs: Vec<f64> = positive.iter().map(|&i| thetas[i]).collect();
        core::array::from_fn(|k| {
            let ys: Vec<f64> = positive.iter().map(|&i| means[i][k]).collect();
            log_log_slope(&xs, &ys)
        })
    });
    let pass = match slopes {
        Some(s) => core::array::from_fn(|k| s[k] >= TRANSLATION_NAMES[k].2 - TRANSLATION_SLACK),
        None => [false; 5],
    };
    Ok(TranslationReport { thetas: thetas.to_vec(), means, std_errors, slopes, pass })
}
