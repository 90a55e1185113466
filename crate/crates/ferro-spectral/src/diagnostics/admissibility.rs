//! Parameter windows of the existence theorem and the bracket coefficients of
//! the a priori estimate.
//!
//! Ellipticity margins are carried by channel name. In the estimate and in
//! the theorem windows, the `(μ₀+1)(2 - c)` terms belong to the
//! magnetization channel and the `(2 - c)C₀/μ₀` terms to the field channel.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::galerkin::PhysicalParams;
use crate::math;
use crate::noise::EllipticityMargins;

/// Norm-equivalence constant `C₀` of the periodic box: `‖∇f‖² = ‖curl f‖² + ‖div f‖²`.
pub const DEFAULT_NORM_CONSTANT: f64 = 1.0;

/// `ℓ*` of the noise-free reduction.
pub const DEFAULT_ELL_STAR: f64 = 0.5;

/// Burkholder–Davis–Gundy constant `C(4)`.
pub const DEFAULT_BDG_CONSTANT: f64 = 2.0;

const THREE_POW_16: f64 = 43_046_721.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdmissibilityMode {
    /// All four lower bounds on `ℓ*`, including `2·3¹⁶C(4)²`.
    TheoremStrict,
    /// `ℓ*` taken as given; the `λ ∈ (0,1)` restriction is reported alongside.
    RemarkRelaxed,
}

impl AdmissibilityMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AdmissibilityMode::TheoremStrict => "theorem_strict",
            AdmissibilityMode::RemarkRelaxed => "remark_relaxed",
        }
    }
}

impl core::str::FromStr for AdmissibilityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theorem_strict" => Ok(AdmissibilityMode::TheoremStrict),
            "remark_relaxed" => Ok(AdmissibilityMode::RemarkRelaxed),
            _ => Err(Error::InvalidConfig(format!("unknown admissibility mode `{s}` (theorem_strict | remark_relaxed)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdmissibilityParams {
    /// `C₀`.
    pub norm_constant: f64,
    /// `ℓ*`.
    pub ell_star: f64,
    /// `C(4)`.
    pub bdg_constant: f64,
    pub margins: EllipticityMargins,
}

impl Default for AdmissibilityParams {
    fn default() -> Self {
        AdmissibilityParams {
            norm_constant: DEFAULT_NORM_CONSTANT,
            ell_star: DEFAULT_ELL_STAR,
            bdg_constant: DEFAULT_BDG_CONSTANT,
            margins: EllipticityMargins::NOISE_FREE,
        }
    }
}

impl AdmissibilityParams {
    pub fn with_margins(margins: EllipticityMargins) -> Self {
        AdmissibilityParams { margins, ..AdmissibilityParams::default() }
    }

    /// The four lower bounds on `ℓ*`.
    pub fn ell_star_bounds(&self, p: &PhysicalParams) -> [f64; 4] {
        let (mu0, sigma, c0) = (p.mu0, p.sigma, self.norm_constant);
        [
            1.0 / (mu0 * math::sqrt(sigma * c0)),
            math::sqrt((mu0 + 1.0) / (mu0 * sigma * c0)),
            (mu0 + 1.0) / mu0,
            2.0 * THREE_POW_16 * self.bdg_constant * self.bdg_constant,
        ]
    }

    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.norm_constant > 0.0 && self.norm_constant.is_finite()) {
            out.push(format!("C0 = {} must be positive", self.norm_constant));
        }
        if !(self.ell_star > 0.0 && self.ell_star.is_finite()) {
            out.push(format!("ell_star = {} must be positive", self.ell_star));
        }
        if !(self.bdg_constant > 0.0 && self.bdg_constant.is_finite()) {
            out.push(format!("C(4) = {} must be positive", self.bdg_constant));
        }
        out
    }
}

/// The five bracket coefficients of the estimate, in the order
/// `∇u`, `∇w`, `curl M`, `curl H`, `div M`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AprioriBrackets {
    pub values: [f64; 5],
}

impl AprioriBrackets {
    pub const NAMES: [&'static str; 5] = [
        "2nu - (2 - c_velocity)",
        "2lambda1 - (2 - c_rotation)",
        "lambda(2 - sigma mu0^2 lambda) - (mu0 + 1)(2 - c_magnetization)C0",
        "1/sigma - (2 - c_field)C0/mu0",
        "2(mu0 + 1)lambda - (mu0 + 1)(2 - c_magnetization)C0 - (2 - c_field)C0/mu0",
    ];

    /// Brackets of the pre-Gronwall estimate at fixed time.
    pub fn estimate(p: &PhysicalParams, adm: &AdmissibilityParams) -> Self {
        Self::with_ell(p, adm, 1.0, false)
    }

    /// Brackets of the supremum estimate, where `ℓ*` multiplies the noise and
    /// Young terms.
    pub fn supremum(p: &PhysicalParams, adm: &AdmissibilityParams) -> Self {
        Self::with_ell(p, adm, adm.ell_star, true)
    }

    fn with_ell(p: &PhysicalParams, adm: &AdmissibilityParams, ell: f64, sup: bool) -> Self {
        let m = &adm.margins;
        let c0 = adm.norm_constant;
        let (mu0, sigma, lam) = (p.mu0, p.sigma, p.lambda);
        let k_mag = (mu0 + 1.0) * (2.0 - m.magnetization) * c0;
        let k_field = (2.0 - m.field) * c0 / mu0;
        let values = if sup {
            [
                2.0 * p.nu - 2.0 + m.velocity - (2.0 - m.velocity) * ell,
                2.0 * p.lambda1 - 2.0 + m.rotation - (2.0 - m.rotation) * ell,
                2.0 * lam - sigma * mu0 * mu0 * lam * lam * ell - ell * k_mag,
                1.0 / sigma - k_field * ell,
                2.0 * lam * (mu0 + 1.0) - ell * k_mag - k_field * ell,
            ]
        } else {
            [
                2.0 * p.nu - (2.0 - m.velocity),
                2.0 * p.lambda1 - (2.0 - m.rotation),
                lam * (2.0 - sigma * mu0 * mu0 * lam) - k_mag,
                1.0 / sigma - k_field,
                2.0 * (mu0 + 1.0) * lam - k_mag - k_field,
            ]
        };
        AprioriBrackets { values }
    }

    /// Every nonpositive bracket, with the inequality it violates.
    pub fn violations(&self) -> Vec<String> {
        self.values
            .iter()
            .zip(Self::NAMES)
            .filter(|(v, _)| !(**v > 0.0))
            .map(|(v, name)| format!("bracket {name} = {v} must be positive"))
            .collect()
    }

    pub fn all_positive(&self) -> bool {
        self.values.iter().all(|v| *v > 0.0)
    }
}

/// Values of `λ` at which the `λ`-dependent brackets of the fixed-time
/// estimate change sign.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BracketRoots {
    /// Roots `(1 ∓ √(1 - σμ₀²K))/(σμ₀²)` of the `curl M` bracket, `K = (μ₀+1)(2-c)C₀`.
    /// `None` when the bracket is negative for every `λ`.
    pub curl_m: Option<(f64, f64)>,
    /// Root of the `div M` bracket.
    pub div_m: f64,
}

pub fn bracket_roots(p: &PhysicalParams, adm: &AdmissibilityParams) -> BracketRoots {
    let c0 = adm.norm_constant;
    let s = p.sigma * p.mu0 * p.mu0;
    let k_mag = (p.mu0 + 1.0) * (2.0 - adm.margins.magnetization) * c0;
    let disc = 1.0 - s * k_mag;
    let curl_m = if disc >= 0.0 {
        let r = math::sqrt(disc);
        Some(((1.0 - r) / s, (1.0 + r) / s))
    } else {
        None
    };
    let div_m = (2.0 - adm.margins.magnetization) * c0 / 2.0
        + (2.0 - adm.margins.field) * c0 / (2.0 * p.mu0 * (p.mu0 + 1.0));
    BracketRoots { curl_m, div_m }
}

/// Window `lower < c ≤ 2` of one ellipticity margin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CWindow {
    pub name: &'static str,
    pub lower: f64,
    pub value: f64,
    pub pass: bool,
}

impl CWindow {
    fn new(name: &'static str, lower: f64, value: f64) -> Self {
        CWindow { name, lower, value, pass: lower < value && value <= 2.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityReport {
    pub mode: AdmissibilityMode,
    pub ell_star: f64,
    pub ell_star_bounds: [f64; 4],
    /// Largest lower bound applied to `ℓ*` in this mode (0 when relaxed).
    pub ell_star_required: f64,
    /// Windows for the velocity, rotation, magnetization and field margins.
    pub c_windows: [CWindow; 4],
    /// The two candidates for the lower end of the `λ`-window.
    pub lower_terms: (f64, f64),
    /// Admissible `λ` interval, open at both ends.
    pub lambda_window: (f64, f64),
    /// Relaxed mode: the window intersected with `(0, 1)`.
    pub remark_subset: Option<(f64, f64)>,
    pub lambda: f64,
    pub lambda_inside: bool,
    pub violations: Vec<String>,
    pub pass: bool,
}

/// Checks the `ℓ*` bounds and the four `c`-windows and returns the admissible
/// `λ` interval.
///
/// An empty `λ`-window is an error naming the binding lower term, and so is a
/// negative radicand, which happens exactly when the magnetization margin
/// sits below its window.
pub fn admissibility_check(
    p: &PhysicalParams,
    adm: &AdmissibilityParams,
    mode: AdmissibilityMode,
) -> Result<AdmissibilityReport> {
    let bad = adm.violations();
    if !bad.is_empty() {
        return Err(Error::InvalidConfig(bad.join("; ")));
    }
    p.validate()?;
    let (mu0, sigma, c0, ell) = (p.mu0, p.sigma, adm.norm_constant, adm.ell_star);
    let m = &adm.margins;
    let mut violations = Vec::new();

    let bounds = adm.ell_star_bounds(p);
    let required = match mode {
        AdmissibilityMode::TheoremStrict => bounds.iter().copied().fold(0.0, f64::max),
        AdmissibilityMode::RemarkRelaxed => 0.0,
    };
    if mode == AdmissibilityMode::TheoremStrict && !(ell > required) {
        violations.push(format!("ell_star = {ell} must exceed {required} (largest of {bounds:?})"));
    }

    let c1_lower = (2.0 * ell + 2.0 - 2.0 * p.nu) / (ell + 1.0);
    let c2_lower = (2.0 * ell + 2.0 - 2.0 * p.lambda1) / (ell + 1.0);
    let mag_lower = 2.0 - 1.0 / (sigma * mu0 * mu0 * (mu0 + 1.0) * ell * ell * c0);
    let field_lower = 2.0 - (mu0 + 1.0) / (sigma * mu0 * c0 * ell * ell);
    let c_windows = [
        CWindow::new("c_velocity", c1_lower, m.velocity),
        CWindow::new("c_rotation", c2_lower, m.rotation),
        CWindow::new("c_magnetization", mag_lower, m.magnetization),
        CWindow::new("c_field", field_lower, m.field),
    ];
    for w in &c_windows {
        if !w.pass {
            violations.push(format!("{} = {} outside window ({}, 2]", w.name, w.value, w.lower));
        }
    }

    let a = 1.0 / (sigma * mu0 * mu0 * ell);
    let radicand = a * a - (mu0 + 1.0) * (2.0 - m.magnetization) * c0 / (sigma * mu0 * mu0);
    if radicand < 0.0 {
        return Err(Error::Constraint(format!(
            "lambda-window radicand {radicand} is negative: c_magnetization = {} violates its window ({mag_lower}, 2]",
            m.magnetization
        )));
    }
    let l1 = a - math::sqrt(radicand);
    let l2 = ell * (2.0 - m.magnetization) * c0 / 2.0 + (2.0 - m.field) * c0 * ell / (2.0 * mu0 * (mu0 + 1.0));
    let lower = l1.max(l2);
    if !(lower < a) {
        let binding = if l1 >= l2 { "the radical term" } else { "the linear (2 - c) term" };
        return Err(Error::Constraint(format!(
            "empty lambda-window: lower bound {lower} from {binding} is not below the upper bound {a}"
        )));
    }
    let remark_subset = match mode {
        AdmissibilityMode::RemarkRelaxed => {
            let (lo, hi) = (lower.max(0.0), a.min(1.0));
            (lo < hi).then_some((lo, hi))
        }
        AdmissibilityMode::TheoremStrict => None,
    };
    let lambda_inside = lower < p.lambda && p.lambda < a;
    if !lambda_inside {
        violations.push(format!("lambda = {} outside the admissible window ({lower}, {a})", p.lambda));
    }
    Ok(AdmissibilityReport {
        mode,
        ell_star: ell,
        ell_star_bounds: bounds,
        ell_star_required: required,
        c_windows,
        lower_terms: (l1, l2),
        lambda_window: (lower, a),
        remark_subset,
        lambda: p.lambda,
        lambda_inside,
        pass: violations.is_empty(),
        violations,
    })
}
