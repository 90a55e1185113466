//! Energy ledger, Monte Carlo audits of the a priori estimates, dual-norm
//! drift bounds, translation differences, weak-form residuals and the
//! admissibility windows of the existence theorem.
//!
//! Audits compare measured quantities with pre-Gronwall right-hand sides.
//! The Gronwall constants themselves are fitted from the ensemble, never
//! taken from the proofs.

use alloc::string::String;

use crate::galerkin::GalerkinState;
use crate::spectral::SpectralField;
use crate::stats::Summary;

mod admissibility;
mod audits;
mod ledger;
mod weak;

#[cfg(test)]
mod tests;

pub use admissibility::{
    admissibility_check, bracket_roots, AdmissibilityMode, AdmissibilityParams, AdmissibilityReport,
    AprioriBrackets, BracketRoots, CWindow, DEFAULT_BDG_CONSTANT, DEFAULT_ELL_STAR, DEFAULT_NORM_CONSTANT,
};
pub use audits::{
    apriori_check, drift_dual_norm_audit, dual_norm_integrands, fitted_constant_stability, pmoment_check,
    translation_diagnostic, AprioriReport, DualNormAudit, FittedConstant, MomentReport, TranslationReport,
    DUAL_NORM_NAMES, FIT_STABILITY, MIN_MOMENT_ENSEMBLE, TRANSLATION_NAMES, TRANSLATION_SLACK,
};
pub use ledger::{
    ito_ledger_step, EnergyLedger, LedgerRow, LedgerTotals, Quadratics, COLUMN_NAMES, DISSIPATION_NAMES, HS_NAMES,
    MARTINGALE_NAMES, SOURCE_NAMES,
};
pub use weak::{weak_residual, Equation};

/// `E_tot = |u|² + |w|² + |M|² + μ₀|H|²` of a Galerkin state.
pub fn energy_total(state: &GalerkinState, mu0: f64) -> f64 {
    state.energy(mu0)
}

/// `E_tot` from the physical fields directly.
pub fn energy_total_fields(u: &SpectralField, w: &SpectralField, m: &SpectralField, h: &SpectralField, mu0: f64) -> f64 {
    u.l2_norm_sq() + w.l2_norm_sq() + m.l2_norm_sq() + mu0 * h.l2_norm_sq()
}

/// One Monte Carlo inequality `LHS ≤ RHS`, accepted within three standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub margin: f64,
    pub std_error: f64,
    pub pass: bool,
}

impl EstimateReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, std_error: f64) -> Self {
        let pass = lhs.is_finite() && rhs.is_finite() && lhs <= rhs + 3.0 * std_error;
        EstimateReport { name: name.into(), lhs, rhs, margin: rhs - lhs, std_error, pass }
    }

    /// Report on the sample of per-path differences `lhs_p - rhs_p`.
    pub fn from_differences(name: impl Into<String>, lhs: &[f64], rhs: &[f64]) -> Self {
        let diff: alloc::vec::Vec<f64> = lhs.iter().zip(rhs).map(|(l, r)| l - r).collect();
        let se = Summary::of(&diff).std_error;
        EstimateReport::new(name, Summary::of(lhs).mean, Summary::of(rhs).mean, if se.is_finite() { se } else { 0.0 })
    }
}
