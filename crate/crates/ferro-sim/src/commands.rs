//! The `simulate`, `verify`, `sweep` and `inspect` commands.
//!
//! Every command returns an [`Outcome`] whose audit lines are written to
//! `<out>/report.csv`; failed lines also go to `<out>/failures.csv`. The
//! binary exits nonzero when any line fails.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use ferro_spectral::diagnostics::{
    admissibility_check, apriori_check, bracket_roots, drift_dual_norm_audit, pmoment_check, translation_diagnostic,
    weak_residual, AdmissibilityParams, AprioriBrackets, EnergyLedger, Equation, MARTINGALE_NAMES, TRANSLATION_NAMES,
};
use ferro_spectral::galerkin::{GalerkinState, GalerkinSystem, PhysicalParams};
use ferro_spectral::integrator::{RunConfig, TrajectoryRecord};
use ferro_spectral::noise::validate_assumptions;
use ferro_spectral::operators::{ModalEngine, ProductEngine, PseudoSpectralEngine};
use ferro_spectral::stats::{log_log_slope, Summary};

use crate::config::{ConfigError, EngineKind, ExperimentConfig};
use crate::ensemble::{refinement_member, run_ensemble, with_threads, Member};
use crate::ledger_csv::{export_ledger_csv, write_table};
use crate::trajectory::{ArtifactError, TrajectoryFile};

/// Members used by the weak-residual refinement study.
pub const WEAK_MEMBERS: usize = 8;

/// Smallest RMS rate accepted by the weak-residual refinement study.
pub const WEAK_RATE: f64 = 0.4;

/// Relative tolerance on `div u` and `div B` coefficient norms.
pub const CONSTRAINT_TOL: f64 = 1e-13;

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Artifact(ArtifactError),
    Core(ferro_spectral::Error),
    Csv(csv::Error),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Artifact(e) => write!(f, "{e}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Csv(e) => write!(f, "csv error: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<ArtifactError> for CliError {
    fn from(e: ArtifactError) -> Self {
        CliError::Artifact(e)
    }
}

impl From<ferro_spectral::Error> for CliError {
    fn from(e: ferro_spectral::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Csv(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn config_err(msg: String) -> CliError {
    CliError::Config(ConfigError { violations: vec![msg] })
}

/// One row of an audit table: `lhs ≤ rhs` within `3·std_error`, or a
/// qualitative check when both sides are NaN.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditLine {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub std_error: f64,
    pub pass: bool,
    pub detail: String,
}

impl AuditLine {
    pub fn bound(name: impl Into<String>, lhs: f64, rhs: f64, std_error: f64, detail: impl Into<String>) -> Self {
        let pass = lhs.is_finite() && rhs.is_finite() && lhs <= rhs + 3.0 * std_error;
        AuditLine { name: name.into(), lhs, rhs, std_error, pass, detail: detail.into() }
    }

    pub fn check(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        AuditLine { name: name.into(), lhs: f64::NAN, rhs: f64::NAN, std_error: 0.0, pass, detail: detail.into() }
    }

    fn fields(&self) -> Vec<String> {
        let num = |x: f64| if x.is_nan() { String::new() } else { format!("{x:.16e}") };
        vec![
            self.name.clone(),
            num(self.lhs),
            num(self.rhs),
            num(self.rhs - self.lhs),
            num(self.std_error),
            if self.pass { "PASS" } else { "FAIL" }.to_string(),
            self.detail.clone(),
        ]
    }
}

pub const REPORT_COLUMNS: [&str; 7] = ["name", "lhs", "rhs", "margin", "std_error", "status", "detail"];

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub audits: Vec<AuditLine>,
    /// Files written, in order.
    pub artifacts: Vec<PathBuf>,
}

impl Outcome {
    pub fn failures(&self) -> Vec<&AuditLine> {
        self.audits.iter().filter(|a| !a.pass).collect()
    }

    pub fn passed(&self) -> bool {
        self.audits.iter().all(|a| a.pass)
    }

    fn write_reports(&mut self, out: &Path, report: &str) -> Result<(), CliError> {
        let rows: Vec<Vec<String>> = self.audits.iter().map(AuditLine::fields).collect();
        let path = out.join(report);
        write_table(&path, &REPORT_COLUMNS, &rows)?;
        self.artifacts.push(path);
        let failed: Vec<Vec<String>> = self.failures().into_iter().map(AuditLine::fields).collect();
        let path = out.join("failures.csv");
        write_table(&path, &REPORT_COLUMNS, &failed)?;
        self.artifacts.push(path);
        Ok(())
    }
}

/// Builds the Galerkin system of `cfg` with its configured engine and runs
/// `$body` with it bound to `$sys`.
macro_rules! with_system {
    ($cfg:expr, $params:expr, $sys:ident => $body:expr) => {{
        let cfg: &ExperimentConfig = $cfg;
        let noise = cfg.noise_model().map_err(config_err)?;
        let k = cfg.basis.k_max;
        match cfg.basis.engine {
            EngineKind::Modal => {
                let $sys = GalerkinSystem::new(ModalEngine::new(k), $params, noise)?;
                $body
            }
            EngineKind::Pseudospectral => {
                let $sys = GalerkinSystem::new(PseudoSpectralEngine::new(k), $params, noise)?;
                $body
            }
        }
    }};
}

fn member_file(out: &Path, prefix: &str, member: u64, ext: &str) -> PathBuf {
    out.join(format!("{prefix}_{member:04}.{ext}"))
}

fn prepare_out(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out)?;
    Ok(())
}

fn setup<E: ProductEngine>(
    cfg: &ExperimentConfig,
    system: &GalerkinSystem<E>,
) -> Result<(GalerkinState, RunConfig), CliError> {
    let y0 = cfg.initial_state(system).map_err(config_err)?;
    let run = cfg.run_config().map_err(config_err)?;
    Ok((y0, run))
}

/// Runs the ensemble and writes one trajectory file and one ledger CSV per
/// member, plus the canonical config echo and a per-member summary.
pub fn cmd_simulate(cfg: &ExperimentConfig, out: &Path, threads: Option<usize>) -> Result<Outcome, CliError> {
    prepare_out(out)?;
    with_system!(cfg, cfg.params(), sys => simulate_with(cfg, &sys, out, threads))
}

fn simulate_with<E: ProductEngine>(
    cfg: &ExperimentConfig,
    sys: &GalerkinSystem<E>,
    out: &Path,
    threads: Option<usize>,
) -> Result<Outcome, CliError> {
    let (y0, run) = setup(cfg, sys)?;
    let members = with_threads(threads, || run_ensemble(sys, &y0, &run, cfg.diagnostics.ledger))?;
    let mut outcome = Outcome::default();
    let echo = out.join("config.toml");
    fs::write(&echo, cfg.canonical())?;
    outcome.artifacts.push(echo);
    let hash = cfg.hash();
    let mut summary = Vec::with_capacity(members.len());
    for m in &members {
        let rec = &m.record;
        let path = member_file(out, &cfg.output.trajectory_prefix, rec.member, "bin");
        TrajectoryFile::from_record(rec, &hash, sys.bases(), run.dt).write(&path)?;
        outcome.artifacts.push(path);
        if let Some(ledger) = &m.ledger {
            let path = member_file(out, &cfg.output.ledger_prefix, rec.member, "csv");
            export_ledger_csv(ledger, &path)?;
            outcome.artifacts.push(path);
        }
        let e_final = sys.energy(rec.last());
        summary.push(vec![
            rec.member.to_string(),
            rec.seed.to_string(),
            rec.steps_taken.to_string(),
            rec.stopped_at.map_or_else(String::new, |t| format!("{t:.16e}")),
            format!("{e_final:.16e}"),
            rec.failure.as_ref().map_or_else(String::new, |f| f.message.clone()),
        ]);
        let detail = match (&rec.failure, rec.stopped_at) {
            (Some(f), _) => format!("blow-up at step {}: {}", f.step, f.message),
            (None, Some(t)) => format!("stopped at t = {t} (radius {})", rec.radius),
            (None, None) => format!("{} steps", rec.steps_taken),
        };
        outcome.audits.push(AuditLine::check(format!("member_{:04}_finite", rec.member), rec.succeeded(), detail));
    }
    let path = out.join("members.csv");
    write_table(&path, &["member", "seed", "steps", "stopped_at", "e_tot_final", "failure"], &summary)?;
    outcome.artifacts.push(path);
    outcome.write_reports(out, "report.csv")?;
    Ok(outcome)
}

/// Checks existing artifacts against `cfg`, reruns the ensemble and every
/// enabled audit, and writes the report table.
pub fn cmd_verify(cfg: &ExperimentConfig, out: &Path, threads: Option<usize>) -> Result<Outcome, CliError> {
    prepare_out(out)?;
    with_system!(cfg, cfg.params(), sys => verify_with(cfg, &sys, out, threads))
}

/// Trajectory artifacts of this config already present in `out`.
fn existing_artifacts(cfg: &ExperimentConfig, out: &Path) -> Vec<(u64, PathBuf)> {
    (0..cfg.run.ensemble_size as u64)
        .map(|m| (m, member_file(out, &cfg.output.trajectory_prefix, m, "bin")))
        .filter(|(_, p)| p.exists())
        .collect()
}

fn verify_with<E: ProductEngine>(
    cfg: &ExperimentConfig,
    sys: &GalerkinSystem<E>,
    out: &Path,
    threads: Option<usize>,
) -> Result<Outcome, CliError> {
    let hash = cfg.hash();
    let artifacts = existing_artifacts(cfg, out);
    let mut files = Vec::with_capacity(artifacts.len());
    for (m, path) in &artifacts {
        let file = TrajectoryFile::read(path)?;
        file.check_against(&hash, sys.bases())?;
        files.push((*m, file));
    }
    let (y0, run) = setup(cfg, sys)?;
    let members = with_threads(threads, || run_ensemble(sys, &y0, &run, true))?;
    let mut outcome = Outcome::default();
    let params = cfg.params();
    let a = &mut outcome.audits;

    for (m, file) in &files {
        let fresh = TrajectoryFile::from_record(&members[*m as usize].record, &hash, sys.bases(), run.dt);
        a.push(AuditLine::check(
            format!("artifact_{m:04}_reproduces"),
            fresh == *file,
            "stored trajectory equals a fresh rerun bit for bit",
        ));
    }

    let report = validate_assumptions(sys.noise(), cfg.validation_grid())?;
    a.push(AuditLine::check("noise_assumptions", report.pass, report.violations.join("; ")));
    let adm = AdmissibilityParams {
        norm_constant: cfg.diagnostics.norm_constant,
        ell_star: cfg.diagnostics.ell_star,
        bdg_constant: cfg.diagnostics.bdg_constant,
        margins: report.margins(),
    };
    let mode = cfg.admissibility_mode().map_err(config_err)?;
    match admissibility_check(&params, &adm, mode) {
        Ok(r) => a.push(AuditLine::check(
            "admissibility",
            r.pass,
            format!("lambda = {} in window ({}, {}); {}", r.lambda, r.lambda_window.0, r.lambda_window.1, r.violations.join("; ")),
        )),
        Err(e) => a.push(AuditLine::check("admissibility", false, e.to_string())),
    }
    let brackets = AprioriBrackets::estimate(&params, &adm);
    a.push(AuditLine::check("brackets_positive", brackets.all_positive(), format!("{:?}", brackets.values)));

    let records: Vec<TrajectoryRecord> = members.iter().map(|m| m.record.clone()).collect();
    let failed = records.iter().filter(|r| !r.succeeded()).count();
    a.push(AuditLine::check("members_finite", failed == 0, format!("{failed} of {} members blew up", records.len())));
    a.push(constraint_audit(sys, &records)?);

    let ledgers: Vec<EnergyLedger> = members.into_iter().filter_map(|m: Member| m.ledger).collect();
    ledger_audits(a, &ledgers);
    if cfg.diagnostics.apriori {
        match apriori_check(&ledgers, &params, &adm) {
            Ok(r) => {
                let g = &r.pre_gronwall;
                a.push(AuditLine::bound("apriori_pre_gronwall", g.lhs, g.rhs, g.std_error, format!("worst t = {}", r.worst_time)));
                a.push(AuditLine::check(
                    "apriori_sup_constant",
                    r.sup_energy.stable && r.sup_energy.full.is_finite(),
                    format!("C = {} (half {}, change {})", r.sup_energy.full, r.sup_energy.half, r.sup_energy.relative_change),
                ));
            }
            Err(e) => a.push(AuditLine::check("apriori_pre_gronwall", false, e.to_string())),
        }
    }
    for &p in &cfg.diagnostics.moments {
        match pmoment_check(&ledgers, p) {
            Ok(r) => a.push(AuditLine::check(
                format!("pmoment_p{p}"),
                r.pass,
                format!("C_sup = {}, C_diss = {}", r.energy_fit.full, r.dissipation_fit.full),
            )),
            Err(e) => a.push(AuditLine::check(format!("pmoment_p{p}"), false, e.to_string())),
        }
    }
    if cfg.diagnostics.dual_norm {
        let d = drift_dual_norm_audit(sys, &records)?;
        let detail = d.constant.map_or_else(|| "single member".into(), |c| format!("C9 = {} (change {})", c.full, c.relative_change));
        a.push(AuditLine::check("dual_norm", d.pass, detail));
    }
    if !cfg.diagnostics.translation_thetas.is_empty() {
        match translation_diagnostic(sys, &records, &cfg.diagnostics.translation_thetas) {
            Ok(r) => {
                for (k, (name, _, rate)) in TRANSLATION_NAMES.iter().enumerate() {
                    let slope = r.slopes.map_or(f64::NAN, |s| s[k]);
                    a.push(AuditLine::check(
                        format!("translation_{name}"),
                        r.pass[k],
                        format!("slope {slope} vs leading rate {rate}"),
                    ));
                }
            }
            Err(e) => a.push(AuditLine::check("translation", false, e.to_string())),
        }
    }
    if cfg.diagnostics.weak_tests > 0 {
        a.push(weak_rate_audit(sys, &y0, &run, cfg.diagnostics.weak_tests)?);
    }
    outcome.write_reports(out, "report.csv")?;
    Ok(outcome)
}

/// `div u` and `div B` at every snapshot of every member.
pub fn constraint_audit<E: ProductEngine>(
    sys: &GalerkinSystem<E>,
    records: &[TrajectoryRecord],
) -> Result<AuditLine, CliError> {
    let mut worst: f64 = 0.0;
    for rec in records {
        for y in &rec.states {
            let f = sys.reconstruct(y)?;
            for (field, _) in [(&f.u, "u"), (&f.b, "B")] {
                let norm = field.l2_norm();
                if norm > 0.0 {
                    worst = worst.max(field.div_coeff_norm() / norm);
                } else if field.div_coeff_norm() > 0.0 {
                    worst = f64::INFINITY;
                }
            }
        }
    }
    Ok(AuditLine::bound("divergence_free", worst, CONSTRAINT_TOL, 0.0, "max relative div coefficient norm of u and B"))
}

fn ledger_audits(a: &mut Vec<AuditLine>, ledgers: &[EnergyLedger]) {
    let finite = ledgers.iter().all(EnergyLedger::is_finite);
    a.push(AuditLine::check("ledger_finite", finite, format!("{} ledgers", ledgers.len())));
    for (k, name) in MARTINGALE_NAMES.iter().enumerate() {
        let totals: Vec<f64> = ledgers.iter().map(|l| l.rows.iter().map(|r| r.martingale[k]).sum()).collect();
        let s = Summary::of(&totals);
        let se = if s.std_error.is_finite() { s.std_error } else { 0.0 };
        a.push(AuditLine::bound(format!("{name}_mean_zero"), s.mean.abs(), 0.0, se, "|mean| within 3 SE of 0"));
    }
    let residuals: Vec<f64> = ledgers.iter().map(|l| l.rows.iter().map(|r| r.residual).sum()).collect();
    let s = Summary::of(&residuals);
    a.push(AuditLine::check("ito_residual_finite", s.mean.is_finite(), format!("mean total residual {}", s.mean)));
}

/// Deterministic in-span test functions: coordinate functions of each
/// equation's test space, cycling over the equations.
pub fn weak_test_functions<E: ProductEngine>(
    sys: &GalerkinSystem<E>,
    count: usize,
) -> Result<Vec<(Equation, ferro_spectral::spectral::SpectralField)>, CliError> {
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let eq = Equation::ALL[i % Equation::ALL.len()];
        let basis = sys.bases().get(eq.test_space());
        let mut e = vec![0.0; basis.dim()];
        e[(i / Equation::ALL.len() * 5 + i) % basis.dim()] = 1.0;
        out.push((eq, basis.to_field(&e)?));
    }
    Ok(out)
}

/// RMS weak residuals at `dt`, `2dt`, `4dt` on shared paths, with the fitted rate.
pub fn weak_rms_levels<E: ProductEngine>(
    sys: &GalerkinSystem<E>,
    y0: &GalerkinState,
    run: &RunConfig,
    tests: usize,
    members: usize,
) -> Result<([f64; 3], f64), CliError> {
    let funcs = weak_test_functions(sys, tests)?;
    let mut rms = [0.0; 3];
    for (level, r) in rms.iter_mut().enumerate() {
        let mut acc = 0.0;
        let mut n = 0usize;
        for m in 0..members as u64 {
            let (rec, path) = refinement_member(sys, y0, run, m, level as u32)?;
            for (eq, v) in &funcs {
                let res = weak_residual(sys, &rec, &path, v, *eq)?;
                acc += res * res;
                n += 1;
            }
        }
        *r = (acc / n as f64).sqrt();
    }
    let dts = [run.dt, 2.0 * run.dt, 4.0 * run.dt];
    Ok((rms, log_log_slope(&dts, &rms)))
}

fn weak_rate_audit<E: ProductEngine>(
    sys: &GalerkinSystem<E>,
    y0: &GalerkinState,
    run: &RunConfig,
    tests: usize,
) -> Result<AuditLine, CliError> {
    let members = run.ensemble_size.min(WEAK_MEMBERS);
    let (rms, rate) = weak_rms_levels(sys, y0, run, tests, members)?;
    Ok(AuditLine::bound("weak_residual_rate", WEAK_RATE, rate, 0.0, format!("RMS residuals {rms:?} at dt, 2dt, 4dt")))
}

/// One row of a `λ` sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub brackets: [f64; 5],
    /// Admissible window, or `None` when the window is empty.
    pub window: Option<(f64, f64)>,
    pub admissible: bool,
    /// Fraction of members whose pathwise pre-Gronwall inequality held at every
    /// step; `None` when a bracket is nonpositive.
    pub pass_rate: Option<f64>,
    /// Bracket signs agree with the predicted sign-change points.
    pub sign_consistent: bool,
}

pub const SWEEP_COLUMNS: [&str; 12] = [
    "lambda", "bracket_grad_u", "bracket_grad_w", "bracket_curl_m", "bracket_curl_h", "bracket_div_m",
    "window_lower", "window_upper", "admissible", "energy_pass_rate", "sign_consistent", "members",
];

/// `points` evenly spaced values with the predicted sign-change points inside
/// `[min, max]` merged in.
pub fn sweep_grid(cfg: &ExperimentConfig, adm: &AdmissibilityParams) -> Vec<f64> {
    let s = &cfg.sweep;
    let mut grid: Vec<f64> = (0..s.points)
        .map(|i| s.lambda_min + (s.lambda_max - s.lambda_min) * i as f64 / (s.points - 1) as f64)
        .collect();
    let roots = bracket_roots(&cfg.params(), adm);
    let mut extra = vec![roots.div_m];
    if let Some((lo, hi)) = roots.curl_m {
        extra.extend([lo, hi]);
    }
    grid.extend(extra.into_iter().filter(|r| *r >= s.lambda_min && *r <= s.lambda_max));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Sign expected from the predicted roots: `1`, `-1`, or `0` at a root.
fn predicted_signs(p: &PhysicalParams, adm: &AdmissibilityParams) -> [i8; 2] {
    let r = bracket_roots(p, adm);
    let lam = p.lambda;
    let curl = match r.curl_m {
        Some((lo, hi)) if lam == lo || lam == hi => 0,
        Some((lo, hi)) if lo < lam && lam < hi => 1,
        _ => -1,
    };
    let div = if lam == r.div_m { 0 } else if lam > r.div_m { 1 } else { -1 };
    [curl, div]
}

fn sign_matches(value: f64, predicted: i8, scale: f64) -> bool {
    match predicted {
        0 => value.abs() <= 1e-12 * scale,
        1 => value > 0.0,
        _ => value < 0.0,
    }
}

/// Tabulates the brackets, the admissible window and the energy-audit pass
/// rate across the `λ` grid.
pub fn cmd_sweep(cfg: &ExperimentConfig, out: &Path, threads: Option<usize>) -> Result<(Outcome, Vec<SweepRow>), CliError> {
    prepare_out(out)?;
    let noise = cfg.noise_model().map_err(config_err)?;
    let adm = cfg.admissibility_params(&noise).map_err(config_err)?;
    let mode = cfg.admissibility_mode().map_err(config_err)?;
    let mut rows = Vec::new();
    let mut outcome = Outcome::default();
    for lambda in sweep_grid(cfg, &adm) {
        let params = PhysicalParams { lambda, ..cfg.params() };
        let brackets = AprioriBrackets::estimate(&params, &adm);
        let check = admissibility_check(&params, &adm, mode);
        let window = check.as_ref().ok().map(|r| r.lambda_window);
        let admissible = check.as_ref().map_or(false, |r| r.pass);
        let pass_rate = if brackets.all_positive() {
            Some(with_system!(cfg, params, sys => sweep_pass_rate(cfg, &sys, &params, &adm, threads))?)
        } else {
            None
        };
        let predicted = predicted_signs(&params, &adm);
        let scale = 1.0 + lambda * lambda * params.sigma * params.mu0 * params.mu0 + lambda * (params.mu0 + 1.0);
        let sign_consistent =
            sign_matches(brackets.values[2], predicted[0], scale) && sign_matches(brackets.values[4], predicted[1], scale);
        outcome.audits.push(AuditLine::check(
            format!("sweep_lambda_{lambda}_signs"),
            sign_consistent,
            format!("brackets {:?}", brackets.values),
        ));
        if let Some(rate) = pass_rate {
            outcome.audits.push(AuditLine::bound(
                format!("sweep_lambda_{lambda}_energy_audit"),
                0.0,
                rate - 1.0,
                0.0,
                "every member satisfies the pre-Gronwall inequality when all brackets are positive",
            ));
        }
        rows.push(SweepRow { lambda, brackets: brackets.values, window, admissible, pass_rate, sign_consistent });
    }
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut v = vec![format!("{:.16e}", r.lambda)];
            v.extend(r.brackets.iter().map(|b| format!("{b:.16e}")));
            let (lo, hi) = r.window.map_or((String::new(), String::new()), |(a, b)| (format!("{a:.16e}"), format!("{b:.16e}")));
            v.extend([lo, hi, r.admissible.to_string()]);
            v.push(r.pass_rate.map_or_else(String::new, |p| format!("{p}")));
            v.push(r.sign_consistent.to_string());
            v.push(cfg.run.ensemble_size.to_string());
            v
        })
        .collect();
    let path = out.join("sweep.csv");
    write_table(&path, &SWEEP_COLUMNS, &table)?;
    outcome.artifacts.push(path);
    outcome.write_reports(out, "sweep_report.csv")?;
    Ok((outcome, rows))
}

fn sweep_pass_rate<E: ProductEngine>(
    cfg: &ExperimentConfig,
    sys: &GalerkinSystem<E>,
    params: &PhysicalParams,
    adm: &AdmissibilityParams,
    threads: Option<usize>,
) -> Result<f64, CliError> {
    let (y0, run) = setup(cfg, sys)?;
    let members = with_threads(threads, || run_ensemble(sys, &y0, &run, true))?;
    let mut ok = 0usize;
    for m in &members {
        let ledger = m.ledger.as_ref().expect("ledger requested");
        if m.record.succeeded() && !ledger.is_empty() {
            let r = apriori_check(std::slice::from_ref(ledger), params, adm)?;
            if r.pre_gronwall.pass {
                ok += 1;
            }
        }
    }
    Ok(ok as f64 / members.len() as f64)
}

/// Human-readable summary of a trajectory file; with a config, also checks
/// the pairing and prints `E_tot` per snapshot.
pub fn cmd_inspect(path: &Path, cfg: Option<&ExperimentConfig>) -> Result<String, CliError> {
    let file = TrajectoryFile::read(path)?;
    let h = &file.header;
    let mut s = format!(
        "file        {}\nschema      {}\nconfig_hash {}\nbasis       {}\nseed        {}\nmember      {}\nk_max       {}\nblocks      {:?}\nsnapshots   {}\ndt          {}\nradius      {}\nstopped_at  {:?}\nfailure     {}\n",
        path.display(),
        h.schema_version,
        h.config_hash,
        h.basis_digest,
        h.seed,
        h.member,
        h.k_max,
        h.blocks,
        h.snapshots,
        h.dt,
        h.radius,
        h.stopped_at,
        h.failure.as_deref().unwrap_or("none"),
    );
    let energies: Option<Vec<f64>> = match cfg {
        Some(cfg) => {
            let params = cfg.params();
            Some(with_system!(cfg, params, sys => inspect_energies(cfg, &sys, &file))?)
        }
        None => None,
    };
    s.push_str("step\ttime\tnorm");
    if energies.is_some() {
        s.push_str("\te_tot");
    }
    s.push('\n');
    for (i, ((step, t), row)) in file.index.iter().zip(&file.rows).enumerate() {
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        s.push_str(&format!("{step}\t{t:.6e}\t{norm:.6e}"));
        if let Some(e) = &energies {
            s.push_str(&format!("\t{:.6e}", e[i]));
        }
        s.push('\n');
    }
    Ok(s)
}

fn inspect_energies<E: ProductEngine>(
    cfg: &ExperimentConfig,
    sys: &GalerkinSystem<E>,
    file: &TrajectoryFile,
) -> Result<Vec<f64>, CliError> {
    file.check_against(&cfg.hash(), sys.bases())?;
    file.rows
        .iter()
        .map(|r| Ok(sys.energy(&GalerkinState::from_vec(sys.layout(), r.clone())?)))
        .collect()
}
