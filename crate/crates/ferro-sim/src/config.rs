//! Experiment configuration: a strict TOML schema with a canonical echo.
//!
//! Physics has no defaults; every other section does. `load_config` reports
//! every violation at once. The canonical form is `toml::to_string` of the
//! parsed value, and the config hash is the SHA-256 of that form with the
//! `[output]` section cleared, so moving the output directory does not change
//! artifact identity.
//!
//! ```toml
//! [physics]
//! nu = 1.0
//! lambda1 = 1.0
//! lambda2 = 1.0
//! lambda = 0.5
//! tau = 1.0
//! chi0 = 0.5
//! sigma = 1.0
//! mu0 = 1.0
//! alpha = 0.5
//!
//! [basis]
//! k_max = 1
//!
//! [run]
//! horizon = 0.2
//! dt = 0.001
//!
//! [[noise.velocity]]
//! wavevector = [0, 0, 0]
//! amplitude = 0.3
//! polarization = [1.0, 0.0, 0.0]
//!
//! [initial]
//! kind = "random"
//! seed = 7
//! energy = 1.0
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use ferro_spectral::diagnostics::{
    AdmissibilityMode, AdmissibilityParams, DEFAULT_BDG_CONSTANT, DEFAULT_ELL_STAR, DEFAULT_NORM_CONSTANT,
};
use ferro_spectral::galerkin::{GalerkinState, GalerkinSystem, Layout, PhysicalParams};
use ferro_spectral::integrator::{RunConfig, Scheme, StoppingRadius, DEFAULT_SNAPSHOT_STRIDE};
use ferro_spectral::noise::{validate_assumptions, NoiseChannel, NoiseFamily, NoiseModel, DEFAULT_VALIDATION_GRID};
use ferro_spectral::operators::ProductEngine;
use ferro_spectral::rng::StreamKey;
use ferro_spectral::spectral::{Bases, SpaceTag, SpectralField, TrigTerm};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Every problem found in a configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub violations: Vec<String>,
}

impl ConfigError {
    fn one(msg: impl Into<String>) -> Self {
        ConfigError { violations: vec![msg.into()] }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} configuration problem(s)", self.violations.len())?;
        for v in &self.violations {
            write!(f, "\n  - {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    pub nu: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda: f64,
    pub tau: f64,
    pub chi0: f64,
    pub sigma: f64,
    pub mu0: f64,
    pub alpha: f64,
}

impl PhysicsSection {
    pub fn params(&self) -> PhysicalParams {
        PhysicalParams {
            nu: self.nu,
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            lambda: self.lambda,
            tau: self.tau,
            chi0: self.chi0,
            sigma: self.sigma,
            mu0: self.mu0,
            alpha: self.alpha,
        }
    }
}

/// Product engine used for the drift.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    /// Direct triad convolution.
    Modal,
    /// Dealiased FFT products.
    Pseudospectral,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSection {
    pub k_max: usize,
    #[serde(default = "default_engine")]
    pub engine: EngineKind,
}

fn default_engine() -> EngineKind {
    EngineKind::Pseudospectral
}

/// `"default"`, `"never"` or a positive number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RadiusSpec {
    Fixed(f64),
    Named(String),
}

impl Default for RadiusSpec {
    fn default() -> Self {
        RadiusSpec::Named("default".into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub horizon: f64,
    pub dt: f64,
    #[serde(default)]
    pub stopping_radius: RadiusSpec,
    #[serde(default = "default_scheme")]
    pub scheme: String,
    #[serde(default = "one")]
    pub ensemble_size: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
}

fn default_scheme() -> String {
    Scheme::EulerMaruyama.as_str().into()
}

fn one() -> usize {
    1
}

fn default_stride() -> usize {
    DEFAULT_SNAPSHOT_STRIDE
}

/// One noise coefficient field `amplitude · polarization · cos(k·x)` (or `sin`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseTerm {
    pub wavevector: [i32; 3],
    pub amplitude: f64,
    pub polarization: [f64; 3],
    #[serde(default = "default_phase")]
    pub phase: String,
}

fn default_phase() -> String {
    "cos".into()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(default)]
    pub velocity: Vec<NoiseTerm>,
    #[serde(default)]
    pub rotation: Vec<NoiseTerm>,
    #[serde(default)]
    pub magnetization: Vec<NoiseTerm>,
    #[serde(default)]
    pub field: Vec<NoiseTerm>,
}

impl NoiseSection {
    fn terms(&self, channel: NoiseChannel) -> &[NoiseTerm] {
        match channel {
            NoiseChannel::Velocity => &self.velocity,
            NoiseChannel::Rotation => &self.rotation,
            NoiseChannel::Magnetization => &self.magnetization,
            NoiseChannel::Field => &self.field,
        }
    }
}

/// A trigonometric term of one initial field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeTerm {
    /// `u`, `w`, `m` or `h`.
    pub field: String,
    pub wavevector: [i32; 3],
    pub amplitude: [f64; 3],
    #[serde(default = "default_phase")]
    pub phase: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSection {
    /// Standard normal coordinates in every block, rescaled to `E_tot = energy`.
    Random { seed: u64, energy: f64 },
    /// Coordinate blocks in basis order; missing blocks are zero.
    Coefficients {
        #[serde(default)]
        a: Vec<f64>,
        #[serde(default)]
        b: Vec<f64>,
        #[serde(default)]
        c: Vec<f64>,
        #[serde(default)]
        d: Vec<f64>,
        #[serde(default)]
        e: Vec<f64>,
    },
    /// Sum of trigonometric terms per field; needs `div(M + H) = 0`.
    Modes { terms: Vec<ModeTerm> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSection {
    #[serde(default = "yes")]
    pub ledger: bool,
    #[serde(default = "default_mode")]
    pub admissibility_mode: String,
    #[serde(default = "default_ell_star")]
    pub ell_star: f64,
    #[serde(default = "default_norm_constant")]
    pub norm_constant: f64,
    #[serde(default = "default_bdg")]
    pub bdg_constant: f64,
    #[serde(default = "yes")]
    pub apriori: bool,
    /// Moment orders for the p-moment audit; empty disables it.
    #[serde(default)]
    pub moments: Vec<f64>,
    /// Lags for the translation diagnostic; empty disables it.
    #[serde(default)]
    pub translation_thetas: Vec<f64>,
    /// Number of weak-form test functions; zero disables the audit.
    #[serde(default)]
    pub weak_tests: usize,
    #[serde(default = "yes")]
    pub dual_norm: bool,
    #[serde(default = "default_grid")]
    pub validation_grid: usize,
}

fn yes() -> bool {
    true
}

fn default_mode() -> String {
    AdmissibilityMode::RemarkRelaxed.as_str().into()
}

fn default_ell_star() -> f64 {
    DEFAULT_ELL_STAR
}

fn default_norm_constant() -> f64 {
    DEFAULT_NORM_CONSTANT
}

fn default_bdg() -> f64 {
    DEFAULT_BDG_CONSTANT
}

fn default_grid() -> usize {
    DEFAULT_VALIDATION_GRID
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        toml::from_str("").expect("all diagnostics fields have defaults")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub points: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection { lambda_min: 0.05, lambda_max: 2.0, points: 9 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_prefix_traj")]
    pub trajectory_prefix: String,
    #[serde(default = "default_prefix_ledger")]
    pub ledger_prefix: String,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_prefix_traj() -> String {
    "trajectory".into()
}

fn default_prefix_ledger() -> String {
    "ledger".into()
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: default_dir(), trajectory_prefix: default_prefix_traj(), ledger_prefix: default_prefix_ledger() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub physics: PhysicsSection,
    pub basis: BasisSection,
    pub run: RunSection,
    #[serde(default)]
    pub noise: NoiseSection,
    pub initial: InitialSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Reads, parses and validates a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::one(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Parses and validates configuration text.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| ConfigError::one(e.to_string()))?;
    let v = cfg.violations();
    if v.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError { violations: v })
    }
}

fn phase_term(phase: &str, k: [i32; 3], amp: [f64; 3]) -> Result<TrigTerm, String> {
    match phase {
        "cos" => Ok(TrigTerm::cos(k, amp)),
        "sin" => Ok(TrigTerm::sin(k, amp)),
        other => Err(format!("phase `{other}` must be `cos` or `sin`")),
    }
}

fn bandlimited(k: [i32; 3], k_max: usize) -> bool {
    k.iter().all(|c| c.unsigned_abs() as usize <= k_max)
}

impl ExperimentConfig {
    /// The canonical TOML echo.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical form with the output section reset, in hex.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputSection::default();
        hex(&Sha256::digest(c.canonical().as_bytes()))
    }

    pub fn params(&self) -> PhysicalParams {
        self.physics.params()
    }

    pub fn run_config(&self) -> Result<RunConfig, String> {
        let stopping_radius = match &self.run.stopping_radius {
            RadiusSpec::Fixed(r) => StoppingRadius::Fixed(*r),
            RadiusSpec::Named(s) if s == "default" => StoppingRadius::Default,
            RadiusSpec::Named(s) if s == "never" => StoppingRadius::Never,
            RadiusSpec::Named(s) => return Err(format!("run.stopping_radius `{s}` must be a number, `default` or `never`")),
        };
        let scheme = self.run.scheme.parse::<Scheme>().map_err(|e| format!("run.scheme: {e}"))?;
        Ok(RunConfig {
            horizon: self.run.horizon,
            dt: self.run.dt,
            stopping_radius,
            scheme,
            ensemble_size: self.run.ensemble_size,
            seed: self.run.seed,
            snapshot_stride: self.run.snapshot_stride,
        })
    }

    pub fn admissibility_mode(&self) -> Result<AdmissibilityMode, String> {
        self.diagnostics
            .admissibility_mode
            .parse::<AdmissibilityMode>()
            .map_err(|e| format!("diagnostics.admissibility_mode: {e}"))
    }

    pub fn noise_model(&self) -> Result<NoiseModel, String> {
        let k = self.basis.k_max;
        let mut families = Vec::new();
        for channel in NoiseChannel::ALL {
            let terms = self.noise.terms(channel);
            if terms.is_empty() {
                continue;
            }
            let mut members = Vec::with_capacity(terms.len());
            for (i, t) in terms.iter().enumerate() {
                if !bandlimited(t.wavevector, k) {
                    return Err(format!("noise.{channel}[{i}]: wavevector {:?} exceeds k_max = {k}", t.wavevector));
                }
                let amp = t.polarization.map(|p| p * t.amplitude);
                let term = phase_term(&t.phase, t.wavevector, amp).map_err(|e| format!("noise.{channel}[{i}]: {e}"))?;
                let field = SpectralField::from_terms(k, SpaceTag::W, &[term])
                    .map_err(|e| format!("noise.{channel}[{i}]: {e}"))?;
                members.push(field);
            }
            families.push(NoiseFamily::new(channel, members));
        }
        NoiseModel::new(k, families).map_err(|e| e.to_string())
    }

    /// Admissibility constants with the margins measured on the noise model.
    pub fn admissibility_params(&self, noise: &NoiseModel) -> Result<AdmissibilityParams, String> {
        let report = validate_assumptions(noise, self.validation_grid()).map_err(|e| e.to_string())?;
        Ok(AdmissibilityParams {
            norm_constant: self.diagnostics.norm_constant,
            ell_star: self.diagnostics.ell_star,
            bdg_constant: self.diagnostics.bdg_constant,
            margins: report.margins(),
        })
    }

    /// Validation grid, raised to the smallest size that resolves `k_max`.
    pub fn validation_grid(&self) -> usize {
        self.diagnostics.validation_grid.max(2 * self.basis.k_max + 1)
    }

    /// Every violated constraint, in section order.
    pub fn violations(&self) -> Vec<String> {
        let mut out: Vec<String> = self.params().violations().into_iter().map(|v| format!("physics.{v}")).collect();
        let k = self.basis.k_max;
        if k == 0 {
            out.push("basis.k_max must be at least 1".into());
        }
        if self.run.seed > i64::MAX as u64 {
            out.push(format!("run.seed = {} exceeds the TOML integer range", self.run.seed));
        }
        match self.run_config() {
            Ok(rc) => {
                let bad = rc.violations();
                // the weak-residual audit reruns on paths coarsened by 2 and 4
                if bad.is_empty() && self.diagnostics.weak_tests > 0 && rc.steps() % 4 != 0 {
                    out.push(format!("diagnostics.weak_tests needs a step count divisible by 4, run has {}", rc.steps()));
                }
                out.extend(bad.into_iter().map(|v| format!("run: {v}")));
            }
            Err(e) => out.push(e),
        }
        if let Err(e) = self.admissibility_mode() {
            out.push(e);
        }
        let d = &self.diagnostics;
        for (name, v) in [("norm_constant", d.norm_constant), ("ell_star", d.ell_star), ("bdg_constant", d.bdg_constant)] {
            if !(v > 0.0 && v.is_finite()) {
                out.push(format!("diagnostics.{name} = {v} must be positive"));
            }
        }
        for &p in &d.moments {
            if !(2.0..=4.0).contains(&p) {
                out.push(format!("diagnostics.moments: order {p} must lie in [2, 4]"));
            }
        }
        for &t in &d.translation_thetas {
            if !(t > 0.0 && t <= self.run.horizon) {
                out.push(format!("diagnostics.translation_thetas: {t} must lie in (0, horizon]"));
            }
        }
        if let InitialSection::Random { seed, energy } = &self.initial {
            if !(*energy >= 0.0 && energy.is_finite()) {
                out.push(format!("initial.energy = {energy} must be finite and nonnegative"));
            }
            if *seed > i64::MAX as u64 {
                out.push(format!("initial.seed = {seed} exceeds the TOML integer range"));
            }
        }
        let s = &self.sweep;
        if !(s.lambda_min > 0.0 && s.lambda_max > s.lambda_min && s.points >= 2) {
            out.push("sweep: need 0 < lambda_min < lambda_max and points >= 2".into());
        }
        if k > 0 {
            match self.noise_model() {
                Ok(noise) => match validate_assumptions(&noise, self.validation_grid()) {
                    Ok(rep) => out.extend(
                        rep.violations.iter().map(|v| format!("noise: {v} (the transport-noise ellipticity assumption)")),
                    ),
                    Err(e) => out.push(format!("noise: {e}")),
                },
                Err(e) => out.push(e),
            }
            if let Err(e) = self.check_initial() {
                out.push(e);
            }
        }
        out
    }

    fn check_initial(&self) -> Result<(), String> {
        let bases = Bases::new(self.basis.k_max).map_err(|e| e.to_string())?;
        let layout = Layout::of(&bases);
        match &self.initial {
            InitialSection::Random { .. } => Ok(()),
            InitialSection::Coefficients { a, b, c, d, e } => {
                let sizes = [("a", a, layout.v), ("b", b, layout.w), ("c", c, layout.v2), ("d", d, layout.grad), ("e", e, layout.v2)];
                let mut bad = Vec::new();
                for (name, v, n) in sizes {
                    if !v.is_empty() && v.len() != n {
                        bad.push(format!("initial.{name} has {} entries, basis needs {n}", v.len()));
                    }
                }
                if bad.is_empty() {
                    Ok(())
                } else {
                    Err(bad.join("; "))
                }
            }
            InitialSection::Modes { terms } => self.mode_fields(terms).map(|_| ()),
        }
    }

    fn mode_fields(&self, terms: &[ModeTerm]) -> Result<[SpectralField; 4], String> {
        let k = self.basis.k_max;
        let mut f: [SpectralField; 4] = std::array::from_fn(|_| SpectralField::zeros(k, SpaceTag::W));
        for (i, t) in terms.iter().enumerate() {
            let slot = match t.field.as_str() {
                "u" => 0,
                "w" => 1,
                "m" => 2,
                "h" => 3,
                other => return Err(format!("initial.terms[{i}]: field `{other}` must be u, w, m or h")),
            };
            if !bandlimited(t.wavevector, k) {
                return Err(format!("initial.terms[{i}]: wavevector {:?} exceeds k_max = {k}", t.wavevector));
            }
            let term = phase_term(&t.phase, t.wavevector, t.amplitude).map_err(|e| format!("initial.terms[{i}]: {e}"))?;
            f[slot].add_term(&term).map_err(|e| format!("initial.terms[{i}]: {e}"))?;
        }
        if !f[0].conforms_to(SpaceTag::V) {
            return Err("initial velocity must be divergence-free with zero mean".into());
        }
        let sum = f[2].add(&f[3]).map_err(|e| e.to_string())?;
        if !sum.conforms_to(SpaceTag::V2) {
            return Err("initial M + H must be divergence-free".into());
        }
        Ok(f)
    }

    /// The initial Galerkin state.
    pub fn initial_state<E: ProductEngine>(&self, system: &GalerkinSystem<E>) -> Result<GalerkinState, String> {
        match &self.initial {
            InitialSection::Random { seed, energy } => {
                let key = StreamKey::new(*seed, u64::MAX);
                let mut y = system.zero_state();
                for (i, x) in y.as_mut_slice().iter_mut().enumerate() {
                    *x = key.normal(i as u64, 0);
                }
                let e = system.energy(&y);
                Ok(if e > 0.0 { y.scaled((energy / e).sqrt()) } else { y })
            }
            InitialSection::Coefficients { a, b, c, d, e } => {
                let l = system.layout();
                let pad = |v: &Vec<f64>, n: usize| if v.is_empty() { vec![0.0; n] } else { v.clone() };
                GalerkinState::from_blocks(l, &pad(a, l.v), &pad(b, l.w), &pad(c, l.v2), &pad(d, l.grad), &pad(e, l.v2))
                    .map_err(|e| e.to_string())
            }
            InitialSection::Modes { terms } => {
                let [u, w, m, h] = self.mode_fields(terms)?;
                system.state_from_fields(&u, &w, &m, &h).map_err(|e| e.to_string())
            }
        }
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = r#"
[physics]
nu = 1.0
lambda1 = 1.0
lambda2 = 1.0
lambda = 0.5
tau = 1.0
chi0 = 0.5
sigma = 1.0
mu0 = 1.0
alpha = 0.5

[basis]
k_max = 1

[run]
horizon = 0.01
dt = 0.001

[initial]
kind = "random"
seed = 3
energy = 1.0
"#;

    #[test]
    fn minimal_config_round_trips() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.run.ensemble_size, 1);
        assert_eq!(cfg.run.snapshot_stride, DEFAULT_SNAPSHOT_STRIDE);
        assert_eq!(cfg.basis.engine, EngineKind::Pseudospectral);
        let echo = cfg.canonical();
        let again = parse_config(&echo).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.canonical(), echo);
        assert_eq!(again.hash(), cfg.hash());
    }

    #[test]
    fn negative_viscosity_names_the_constraint() {
        let err = parse_config(&MINIMAL.replace("nu = 1.0", "nu = -1.0")).unwrap_err();
        assert!(err.violations.iter().any(|v| v.contains("nu = -1") && v.contains("viscosity")), "{err}");
    }

    #[test]
    fn every_violation_is_reported() {
        let text = MINIMAL.replace("nu = 1.0", "nu = -1.0").replace("tau = 1.0", "tau = 0.0").replace("k_max = 1", "k_max = 0");
        let err = parse_config(&text).unwrap_err();
        assert!(err.violations.len() >= 3, "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config(&MINIMAL.replace("[basis]", "[basis]\nkmax = 2")).unwrap_err();
        assert!(err.violations[0].contains("kmax"), "{err}");
        let err = parse_config(&format!("{MINIMAL}\n[extra]\nx = 1\n")).unwrap_err();
        assert!(err.violations[0].contains("extra"), "{err}");
    }

    #[test]
    fn strong_noise_fails_ellipticity() {
        let text = format!(
            "{MINIMAL}\n[[noise.velocity]]\nwavevector = [0, 0, 0]\namplitude = 1.5\npolarization = [1.0, 0.0, 0.0]\n"
        );
        let err = parse_config(&text).unwrap_err();
        assert!(err.violations.iter().any(|v| v.contains("ellipticity")), "{err}");
    }

    #[test]
    fn output_dir_does_not_change_hash() {
        let a = parse_config(MINIMAL).unwrap();
        let mut b = a.clone();
        b.output.dir = PathBuf::from("/elsewhere");
        assert_eq!(a.hash(), b.hash());
        b.run.seed = 9;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn random_initial_state_hits_target_energy() {
        let cfg = parse_config(MINIMAL).unwrap();
        let sys = GalerkinSystem::new(
            ferro_spectral::operators::ModalEngine::new(1),
            cfg.params(),
            cfg.noise_model().unwrap(),
        )
        .unwrap();
        let y = cfg.initial_state(&sys).unwrap();
        assert!((sys.energy(&y) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mode_initial_data_checks_divergence() {
        let text = MINIMAL.replace(
            "kind = \"random\"\nseed = 3\nenergy = 1.0",
            "kind = \"modes\"\n[[initial.terms]]\nfield = \"u\"\nwavevector = [1, 0, 0]\namplitude = [1.0, 0.0, 0.0]\n",
        );
        let err = parse_config(&text).unwrap_err();
        assert!(err.violations.iter().any(|v| v.contains("divergence-free")), "{err}");
    }
}
