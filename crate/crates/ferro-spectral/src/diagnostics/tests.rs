use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;

use super::*;
use crate::error::Error;
use crate::galerkin::{GalerkinSystem, PhysicalParams};
use crate::integrator::{integrate_member, integrate_with_path, BrownianPath, RunConfig, StoppingRadius};
use crate::math::PI;
use crate::noise::{EllipticityMargins, NoiseChannel, NoiseFamily, NoiseModel};
use crate::operators::ModalEngine;
use crate::rng::StreamKey;
use crate::spectral::{SpaceTag, SpectralField, TrigTerm};
use crate::testutil::random_field;

fn params() -> PhysicalParams {
    PhysicalParams { nu: 0.7, lambda1: 0.9, lambda2: 0.4, lambda: 0.3, tau: 0.8, chi0: 0.6, sigma: 1.3, mu0: 1.7, alpha: 0.25 }
}

fn constant(k: usize, amp: [f64; 3]) -> SpectralField {
    SpectralField::from_terms(k, SpaceTag::W, &[TrigTerm::cos([0, 0, 0], amp)]).unwrap()
}

/// One constant field per channel, plus a divergence-free shear on the magnetization channel.
fn all_channel_noise(k: usize, amp: f64) -> NoiseModel {
    let shear = SpectralField::from_terms(k, SpaceTag::W, &[TrigTerm::sin([0, 0, 1], [0.0, 0.5 * amp, 0.0])]).unwrap();
    NoiseModel::new(
        k,
        vec![
            NoiseFamily::new(NoiseChannel::Velocity, vec![constant(k, [amp, 0.0, 0.0])]),
            NoiseFamily::new(NoiseChannel::Rotation, vec![constant(k, [0.0, amp, 0.0])]),
            NoiseFamily::new(NoiseChannel::Magnetization, vec![constant(k, [0.0, 0.0, amp]), shear]),
            NoiseFamily::new(NoiseChannel::Field, vec![constant(k, [0.7 * amp, 0.7 * amp, 0.0])]),
        ],
    )
    .unwrap()
}

fn system(k: usize, p: PhysicalParams, noise: NoiseModel) -> GalerkinSystem<ModalEngine> {
    GalerkinSystem::new(ModalEngine::new(k), p, noise).unwrap()
}

fn random_state(sys: &GalerkinSystem<ModalEngine>, seed: u64, scale: f64) -> crate::galerkin::GalerkinState {
    let k = sys.k_max();
    let m = random_field(k, SpaceTag::V1, seed ^ 2).scaled(scale);
    let h = random_field(k, SpaceTag::V2, seed ^ 3).scaled(scale).sub(&m.project(SpaceTag::Grad)).unwrap();
    sys.state_from_fields(
        &random_field(k, SpaceTag::V, seed).scaled(scale),
        &random_field(k, SpaceTag::W, seed ^ 1).scaled(scale),
        &m,
        &h,
    )
    .unwrap()
}

fn run(horizon: f64, dt: f64, stride: usize) -> RunConfig {
    RunConfig { horizon, dt, stopping_radius: StoppingRadius::Never, snapshot_stride: stride, ..RunConfig::default() }
}

/// State holding only the constant rotation mode along `x`.
fn rotation_mode(sys: &GalerkinSystem<ModalEngine>, amp: f64) -> crate::galerkin::GalerkinState {
    let w = constant(sys.k_max(), [amp, 0.0, 0.0]);
    let z = SpectralField::zeros(sys.k_max(), SpaceTag::V);
    sys.state_from_fields(&z, &w, &z, &z).unwrap()
}

fn ledger_of(
    sys: &GalerkinSystem<ModalEngine>,
    y0: &crate::galerkin::GalerkinState,
    cfg: &RunConfig,
    member: u64,
) -> EnergyLedger {
    let mut ledger = EnergyLedger::new();
    integrate_member(sys, y0, cfg, member, &mut ledger).unwrap();
    ledger
}

// energy functional

#[test]
fn energy_of_zero_state_is_zero() {
    let sys = system(1, params(), NoiseModel::noise_free(1));
    assert_eq!(energy_total(&sys.zero_state(), 1.7), 0.0);
}

#[test]
fn energy_of_single_cosine_mode() {
    let k = 2;
    let u = SpectralField::from_terms(k, SpaceTag::V, &[TrigTerm::cos([1, 0, 0], [0.0, 1.0, 0.0])]).unwrap();
    let z = SpectralField::zeros(k, SpaceTag::W);
    // ∫cos²x₁ over the box = (2π)³/2
    let expected = 4.0 * PI * PI * PI;
    assert!((energy_total_fields(&u, &z, &z, &z, 1.0) - expected).abs() < 1e-12);
    assert!((expected - 124.0251).abs() < 1e-4);
    let h = u.clone();
    let e = energy_total_fields(&u, &z, &z, &h, 2.0);
    assert!((e - 12.0 * PI * PI * PI).abs() < 1e-11);
    assert!((e - 372.0753).abs() < 1e-4);

    let sys = system(k, params(), NoiseModel::noise_free(k));
    let y = sys.state_from_fields(&u, &z, &SpectralField::zeros(k, SpaceTag::V1), &h.retag(SpaceTag::V1).unwrap()).unwrap();
    assert!((energy_total(&y, 2.0) - e).abs() < 1e-11);
}

// ledger

fn row_for(sys: &GalerkinSystem<ModalEngine>, y: &crate::galerkin::GalerkinState, dt: f64, dw: &[f64]) -> LedgerRow {
    let drift = sys.drift(y).unwrap();
    let diffusion = sys.diffusion(y).unwrap();
    let next = crate::integrator::step(y, &drift, &diffusion, dw, crate::integrator::Scheme::EulerMaruyama, dt).unwrap();
    ito_ledger_step(sys, 0, 0.0, dt, y, &next, &drift, &diffusion, dw).unwrap()
}

#[test]
fn zero_state_gives_all_zero_row() {
    let sys = system(1, params(), all_channel_noise(1, 0.6));
    let dw = vec![0.1; sys.noise().total_count()];
    let row = row_for(&sys, &sys.zero_state(), 1e-2, &dw);
    assert!(row.values()[3..].iter().all(|v| *v == 0.0), "{:?}", row.values());
}

#[test]
fn deterministic_residual_is_drift_square_times_dt_squared() {
    // Euler step: ΔE - 2⟨y,Υ⟩Δt = ‖Υ‖²Δt², so the residual is second order.
    let sys = system(1, params(), NoiseModel::noise_free(1));
    let y = random_state(&sys, 5, 0.4);
    let drift = sys.drift(&y).unwrap();
    let norm = drift.energy(params().mu0);
    let mut previous = None;
    for dt in [1e-2, 5e-3, 2.5e-3] {
        let row = row_for(&sys, &y, dt, &[]);
        assert!((row.residual - norm * dt * dt).abs() <= 1e-9 * row.energy_before, "{} vs {}", row.residual, norm * dt * dt);
        if let Some(prev) = previous {
            let ratio: f64 = prev / row.residual;
            assert!((ratio - 4.0).abs() < 1e-3, "ratio {ratio}");
        }
        previous = Some(row.residual);
    }
}

#[test]
fn stochastic_residual_is_square_of_increment_minus_quadratic_variation() {
    let p = params();
    let sys = system(1, p, all_channel_noise(1, 0.6));
    let y = random_state(&sys, 8, 0.5);
    let drift = sys.drift(&y).unwrap();
    let diffusion = sys.diffusion(&y).unwrap();
    let dt = 1e-3;
    let dw: Vec<f64> = (0..diffusion.len()).map(|j| 0.03 * (j as f64 - 1.5)).collect();
    let row = row_for(&sys, &y, dt, &dw);
    let mut inc = drift.scaled(dt);
    for (c, b) in diffusion.iter().zip(&dw) {
        inc.axpy(*b, c).unwrap();
    }
    let expected = inc.energy(p.mu0) - row.hs_total() * dt;
    assert!((row.residual - expected).abs() < 1e-11 * row.energy_before);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn ledger_accounts_for_the_whole_drift_power(seed in 0u64..1000, scale in 0.1f64..2.0) {
        let sys = system(1, params(), all_channel_noise(1, 0.5));
        let y = random_state(&sys, seed, scale);
        let dw = vec![0.0; sys.noise().total_count()];
        let row = row_for(&sys, &y, 1e-3, &dw);
        let size = row.dissipation_total() + row.source_total().abs() + row.energy_before;
        prop_assert!(row.drift_power_defect.abs() <= 1e-11 * size, "defect {}", row.drift_power_defect);
        prop_assert!(row.dissipation.iter().all(|d| *d >= 0.0));
    }

    #[test]
    fn admissibility_window_is_monotone_in_margins(
        c_mag in 1.9f64..2.0, c_field in 1.5f64..2.0, d_mag in 0.0f64..0.05, d_field in 0.0f64..0.3,
    ) {
        let p = PhysicalParams { sigma: 1.0, mu0: 1.0, lambda: 0.5, ..PhysicalParams::default() };
        let adm = |m: f64, f: f64| AdmissibilityParams::with_margins(EllipticityMargins {
            velocity: 2.0, rotation: 2.0, magnetization: m, field: f,
        });
        let narrow = admissibility_check(&p, &adm(c_mag, c_field), AdmissibilityMode::RemarkRelaxed);
        let wide = admissibility_check(
            &p,
            &adm((c_mag + d_mag).min(2.0), (c_field + d_field).min(2.0)),
            AdmissibilityMode::RemarkRelaxed,
        );
        if let Ok(n) = narrow {
            let w = wide.expect("enlarging margins keeps the window nonempty");
            prop_assert!(w.lambda_window.0 <= n.lambda_window.0 + 1e-15);
            prop_assert!(w.lambda_window.1 >= n.lambda_window.1);
        }
    }

    #[test]
    fn dual_norm_integrands_have_the_stated_homogeneity(seed in 0u64..1000, s in 0.2f64..3.0) {
        let sys = system(1, params(), NoiseModel::noise_free(1));
        let y = random_state(&sys, seed, 0.7);
        let base = dual_norm_integrands(&sys, &y).unwrap();
        let scaled = dual_norm_integrands(&sys, &y.scaled(s)).unwrap();
        // quadratic terms at power 4/3 give s^{8/3}; linear at power 2 give s²
        for (k, (_, e)) in DUAL_NORM_NAMES.iter().enumerate() {
            let degree = match k { 0 | 4 | 5 | 7 | 8 | 10 | 11 | 14 => 1.0, _ => 2.0 };
            let expected = base[k] * s.powf(degree * e);
            prop_assert!((scaled[k] - expected).abs() <= 1e-9 * expected.abs().max(1e-300), "{k}: {} vs {}", scaled[k], expected);
        }
    }
}

#[test]
fn martingale_columns_have_zero_mean() {
    let p = params();
    let sys = system(1, p, all_channel_noise(1, 0.6));
    let y = random_state(&sys, 3, 0.5);
    let cfg = RunConfig { seed: 17, ..run(0.05, 5e-3, 10) };
    let totals: Vec<LedgerTotals> = (0..200).map(|m| ledger_of(&sys, &y, &cfg, m).totals()).collect();
    for c in 0..4 {
        let xs: Vec<f64> = totals.iter().map(|t| t.martingale[c]).collect();
        let s = crate::stats::Summary::of(&xs);
        assert!(s.mean.abs() <= 3.0 * s.std_error, "{}: mean {} se {}", MARTINGALE_NAMES[c], s.mean, s.std_error);
    }
}

#[test]
fn column_names_match_row_width() {
    let row = LedgerRow {
        step: 0,
        time: 0.0,
        dt: 0.0,
        energy_before: 0.0,
        energy_after: 0.0,
        dissipation: [0.0; 9],
        sources: [0.0; 2],
        hs: [0.0; 4],
        martingale: [0.0; 4],
        residual: 0.0,
        drift_power_defect: 0.0,
        quadratics: Quadratics::default(),
    };
    assert_eq!(row.values().len(), COLUMN_NAMES.len());
    assert_eq!(COLUMN_NAMES.len(), 5 + DISSIPATION_NAMES.len() + SOURCE_NAMES.len() + HS_NAMES.len() + MARTINGALE_NAMES.len() + 1);
}

// a priori brackets

#[test]
fn velocity_bracket_arithmetic() {
    let p = PhysicalParams { nu: 1.0, ..PhysicalParams::default() };
    let adm = AdmissibilityParams::with_margins(EllipticityMargins { velocity: 1.0, ..EllipticityMargins::NOISE_FREE });
    assert_eq!(AprioriBrackets::estimate(&p, &adm).values[0], 1.0);
}

#[test]
fn noise_free_curl_m_bracket() {
    let p = PhysicalParams { lambda: 0.1, sigma: 1.0, mu0: 1.0, ..PhysicalParams::default() };
    let b = AprioriBrackets::estimate(&p, &AdmissibilityParams::default());
    assert!((b.values[2] - 0.19).abs() < 1e-15);
}

#[test]
fn brackets_are_linear_in_the_margins() {
    let p = params();
    let base = AprioriBrackets::estimate(&p, &AdmissibilityParams::default()).values;
    let delta = -0.125;
    let c0 = DEFAULT_NORM_CONSTANT;
    let shifted = |set: fn(&mut EllipticityMargins, f64)| {
        let mut m = EllipticityMargins::NOISE_FREE;
        set(&mut m, 2.0 + delta);
        AprioriBrackets::estimate(&p, &AdmissibilityParams::with_margins(m)).values
    };
    let v = shifted(|m, x| m.velocity = x);
    assert!((v[0] - base[0] - delta).abs() < 1e-15);
    let r = shifted(|m, x| m.rotation = x);
    assert!((r[1] - base[1] - delta).abs() < 1e-15);
    let g = shifted(|m, x| m.magnetization = x);
    assert!((g[2] - base[2] - (p.mu0 + 1.0) * c0 * delta).abs() < 1e-14);
    assert!((g[4] - base[4] - (p.mu0 + 1.0) * c0 * delta).abs() < 1e-14);
    let f = shifted(|m, x| m.field = x);
    assert!((f[3] - base[3] - c0 * delta / p.mu0).abs() < 1e-14);
    assert!((f[4] - base[4] - c0 * delta / p.mu0).abs() < 1e-14);
}

#[test]
fn nonpositive_bracket_is_rejected_by_name() {
    let p = PhysicalParams { lambda: 3.0, sigma: 1.0, mu0: 1.0, ..PhysicalParams::default() };
    let sys = system(1, p, NoiseModel::noise_free(1));
    let ledger = ledger_of(&sys, &rotation_mode(&sys, 1.0), &run(0.01, 1e-3, 1), 0);
    match apriori_check(&[ledger], &p, &AdmissibilityParams::default()) {
        Err(Error::InvalidConfig(msg)) => assert!(msg.contains("lambda(2 - sigma mu0^2 lambda)"), "{msg}"),
        other => panic!("expected rejection, got {other:?}"),
    }
}

#[test]
fn decoupled_noise_free_energy_never_increases() {
    let p = PhysicalParams { chi0: 0.0, ..params() };
    let sys = system(1, p, NoiseModel::noise_free(1));
    let ledger = ledger_of(&sys, &rotation_mode(&sys, 1.3), &run(0.5, 1e-3, 10), 0);
    let e = ledger.energies();
    assert!(e.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn noise_free_ensemble_satisfies_the_pre_gronwall_bound() {
    let p = PhysicalParams { lambda: 0.3, sigma: 1.0, mu0: 1.0, ..params() };
    let sys = system(1, p, NoiseModel::noise_free(1));
    let y = random_state(&sys, 6, 0.8);
    let ledgers: Vec<EnergyLedger> = (0..4).map(|m| ledger_of(&sys, &y, &run(0.5, 1e-3, 10), m)).collect();
    let report = apriori_check(&ledgers, &p, &AdmissibilityParams::default()).unwrap();
    assert!(report.pass, "{report:?}");
    let e0 = ledgers[0].rows[0].energy_before;
    assert!(report.sup_energy.full <= e0 / (1.0 + e0) + 1e-12);
}

#[test]
fn apriori_check_passes_on_a_noisy_ensemble() {
    let p = PhysicalParams { nu: 1.0, lambda1: 1.0, lambda2: 0.5, lambda: 0.5, tau: 1.0, chi0: 0.5, sigma: 1.0, mu0: 1.0, alpha: 0.3 };
    let noise = all_channel_noise(1, 0.3);
    let report = crate::noise::validate_assumptions(&noise, 8).unwrap();
    let adm = AdmissibilityParams::with_margins(report.margins());
    let sys = system(1, p, noise);
    let y = random_state(&sys, 11, 0.5);
    let cfg = RunConfig { seed: 4, ..run(0.2, 1e-2, 5) };
    let ledgers: Vec<EnergyLedger> = (0..40).map(|m| ledger_of(&sys, &y, &cfg, m)).collect();
    let rep = apriori_check(&ledgers, &p, &adm).unwrap();
    assert!(rep.pre_gronwall.pass, "{:?}", rep.pre_gronwall);
    assert!(rep.brackets.all_positive());
}

// moments

fn decaying_ledgers(amp: f64, count: usize) -> Vec<EnergyLedger> {
    let p = PhysicalParams { chi0: 0.0, ..params() };
    let sys = system(1, p, NoiseModel::noise_free(1));
    let one = ledger_of(&sys, &rotation_mode(&sys, amp), &run(0.2, 1e-2, 5), 0);
    vec![one; count]
}

#[test]
fn moment_check_needs_a_hundred_members() {
    assert!(pmoment_check(&decaying_ledgers(1.0, 99), 2.0).is_err());
    assert!(pmoment_check(&decaying_ledgers(1.0, 100), 2.0).is_ok());
    assert!(pmoment_check(&decaying_ledgers(1.0, 100), 5.0).is_err());
}

#[test]
fn deterministic_moments_are_exact() {
    let ledgers = decaying_ledgers(1.0, 100);
    let e0 = ledgers[0].rows[0].energy_before;
    let r = pmoment_check(&ledgers, 3.0).unwrap();
    assert!((r.sup_energy.mean - e0.powi(3)).abs() < 1e-12 * e0.powi(3));
    assert!(r.pass);
}

#[test]
fn power_mean_ordering_of_moments() {
    let p = params();
    let sys = system(1, p, all_channel_noise(1, 0.6));
    let y = random_state(&sys, 2, 0.6);
    let cfg = RunConfig { seed: 9, ..run(0.1, 1e-2, 5) };
    let ledgers: Vec<EnergyLedger> = (0..100).map(|m| ledger_of(&sys, &y, &cfg, m)).collect();
    let r2 = pmoment_check(&ledgers, 2.0).unwrap();
    let r4 = pmoment_check(&ledgers, 4.0).unwrap();
    assert!(r4.sup_energy.mean.powf(0.25) >= r2.sup_energy.mean.sqrt());
    assert!(r4.dissipation.mean.powf(0.25) >= r2.dissipation.mean.sqrt());
}

#[test]
fn doubling_initial_energy_quadruples_second_moment() {
    let a = pmoment_check(&decaying_ledgers(1.0, 100), 2.0).unwrap();
    let b = pmoment_check(&decaying_ledgers(2f64.sqrt(), 100), 2.0).unwrap();
    let ratio = b.sup_energy.mean / a.sup_energy.mean;
    assert!((ratio - 4.0).abs() <= 0.25 * 4.0, "ratio {ratio}");
    assert!((ratio - 4.0).abs() < 1e-9);
}

// admissibility

#[test]
fn noise_free_relaxed_window_is_zero_to_two() {
    let p = PhysicalParams { sigma: 1.0, mu0: 1.0, lambda: 0.5, ..PhysicalParams::default() };
    let r = admissibility_check(&p, &AdmissibilityParams::default(), AdmissibilityMode::RemarkRelaxed).unwrap();
    assert_eq!(r.lambda_window, (0.0, 2.0));
    assert_eq!(r.remark_subset, Some((0.0, 1.0)));
    assert!(r.pass, "{:?}", r.violations);
}

#[test]
fn full_margins_collapse_the_lower_bound() {
    let p = PhysicalParams { sigma: 1.3, mu0: 1.7, lambda: 0.1, ..PhysicalParams::default() };
    let adm = AdmissibilityParams { ell_star: 0.8, ..AdmissibilityParams::default() };
    let r = admissibility_check(&p, &adm, AdmissibilityMode::RemarkRelaxed).unwrap();
    assert_eq!(r.lambda_window.0, 0.0);
    assert_eq!(r.lambda_window.1, 1.0 / (1.3 * 1.7 * 1.7 * 0.8));
}

#[test]
fn velocity_margin_threshold() {
    let p = PhysicalParams { nu: 1.0, sigma: 1.0, mu0: 1.0, lambda: 0.5, ..PhysicalParams::default() };
    let with = |c1: f64| {
        let adm = AdmissibilityParams::with_margins(EllipticityMargins { velocity: c1, ..EllipticityMargins::NOISE_FREE });
        admissibility_check(&p, &adm, AdmissibilityMode::RemarkRelaxed).unwrap()
    };
    let pass = with(1.0);
    assert!((pass.c_windows[0].lower - 2.0 / 3.0).abs() <= 1e-15);
    assert!(pass.c_windows[0].pass);
    assert!(!with(0.5).c_windows[0].pass);
}

#[test]
fn strict_mode_requires_the_bdg_bound() {
    let p = PhysicalParams { sigma: 1.0, mu0: 1.0, lambda: 0.5, ..PhysicalParams::default() };
    let r = admissibility_check(&p, &AdmissibilityParams::default(), AdmissibilityMode::TheoremStrict).unwrap();
    assert_eq!(r.ell_star_required, 344_373_768.0);
    assert!(!r.pass);
    assert!(r.remark_subset.is_none());
}

#[test]
fn small_magnetization_margin_is_rejected_through_the_radicand() {
    let p = PhysicalParams { sigma: 1.0, mu0: 1.0, lambda: 0.5, ..PhysicalParams::default() };
    let adm = AdmissibilityParams {
        ell_star: 1.0,
        ..AdmissibilityParams::with_margins(EllipticityMargins { magnetization: 0.5, ..EllipticityMargins::NOISE_FREE })
    };
    match admissibility_check(&p, &adm, AdmissibilityMode::RemarkRelaxed) {
        Err(Error::Constraint(msg)) => assert!(msg.contains("c_magnetization"), "{msg}"),
        other => panic!("expected rejection, got {other:?}"),
    }
}

#[test]
fn empty_window_names_the_binding_term() {
    let p = PhysicalParams { sigma: 1.0, mu0: 1.0, lambda: 0.5, ..PhysicalParams::default() };
    // radicand stays positive but the linear term exceeds the upper bound
    let adm = AdmissibilityParams {
        ell_star: 2.0,
        ..AdmissibilityParams::with_margins(EllipticityMargins { field: 0.0, ..EllipticityMargins::NOISE_FREE })
    };
    match admissibility_check(&p, &adm, AdmissibilityMode::RemarkRelaxed) {
        Err(Error::Constraint(msg)) => assert!(msg.contains("empty lambda-window") && msg.contains("linear"), "{msg}"),
        other => panic!("expected rejection, got {other:?}"),
    }
}

#[test]
fn bracket_roots_bound_the_positive_range() {
    let p = PhysicalParams { sigma: 1.0, mu0: 1.0, ..PhysicalParams::default() };
    let m = EllipticityMargins { magnetization: 1.9, field: 1.8, ..EllipticityMargins::NOISE_FREE };
    let adm = AdmissibilityParams::with_margins(m);
    let roots = bracket_roots(&p, &adm);
    let (lo, hi) = roots.curl_m.unwrap();
    let at = |lambda: f64| AprioriBrackets::estimate(&PhysicalParams { lambda, ..p }, &adm).values;
    for r in [lo, hi] {
        assert!(at(r)[2].abs() < 1e-14);
    }
    assert!(at(roots.div_m)[4].abs() < 1e-14);
    assert!(at(0.5 * (lo + hi))[2] > 0.0 && at(hi + 1e-3)[2] < 0.0 && at(lo - 1e-3)[2] < 0.0);
    assert!(at(roots.div_m + 1e-3)[4] > 0.0 && at(roots.div_m - 1e-3)[4] < 0.0);
}

// dual-norm audit

#[test]
fn zero_trajectory_has_zero_dual_norm_integrals() {
    let sys = system(1, params(), all_channel_noise(1, 0.5));
    let recs: Vec<_> = (0..2).map(|m| integrate_member(&sys, &sys.zero_state(), &run(0.05, 1e-2, 1), m, &mut ()).unwrap()).collect();
    let audit = drift_dual_norm_audit(&sys, &recs).unwrap();
    assert!(audit.means.iter().all(|m| *m == 0.0));
    assert!(audit.pass);
}

#[test]
fn stokes_term_of_a_unit_wavenumber_mode() {
    let k = 1;
    let sys = system(k, params(), NoiseModel::noise_free(k));
    let u = SpectralField::from_terms(k, SpaceTag::V, &[TrigTerm::cos([1, 0, 0], [0.0, 1.0, 0.0])]).unwrap();
    let z = SpectralField::zeros(k, SpaceTag::V1);
    let y = sys.state_from_fields(&u, &SpectralField::zeros(k, SpaceTag::W), &z, &z).unwrap();
    let q = dual_norm_integrands(&sys, &y).unwrap();
    assert!((q[0] - u.l2_norm_sq()).abs() < 1e-11 * u.l2_norm_sq());
}

// translation

#[test]
fn translation_rejects_long_shifts_and_vanishes_at_zero() {
    let sys = system(1, params(), all_channel_noise(1, 0.5));
    let y = random_state(&sys, 4, 0.5);
    let recs: Vec<_> = (0..3).map(|m| integrate_member(&sys, &y, &run(0.1, 1e-2, 1), m, &mut ()).unwrap()).collect();
    let r = translation_diagnostic(&sys, &recs, &[0.0]).unwrap();
    assert!(r.means[0].iter().all(|m| *m == 0.0));
    assert!(translation_diagnostic(&sys, &recs, &[0.2]).is_err());
    assert!(translation_diagnostic(&sys, &recs, &[0.015]).is_err());
}

#[test]
fn smooth_decay_translates_at_full_order() {
    let p = PhysicalParams { chi0: 0.0, ..params() };
    let sys = system(1, p, NoiseModel::noise_free(1));
    let rec = integrate_member(&sys, &rotation_mode(&sys, 1.0), &run(1.0, 1e-3, 1), 0, &mut ()).unwrap();
    let r = translation_diagnostic(&sys, &[rec], &[0.002, 0.004, 0.008, 0.016]).unwrap();
    let slope = r.slopes.unwrap()[1];
    assert!((slope - 4.0 / 3.0).abs() < 0.05, "slope {slope}");
    assert!(r.pass[1]);
}

// weak residual

#[test]
fn weak_form_matches_assembled_drift_at_unit_stride() {
    // At stride 1 the left-endpoint rule is the Euler step itself, so any
    // mismatch is a disagreement between the weak form and the drift.
    let k = 1;
    let sys = system(k, params(), all_channel_noise(k, 0.5));
    let y = random_state(&sys, 21, 0.6);
    let cfg = run(0.02, 2e-3, 1);
    let path = BrownianPath::generate(StreamKey::new(5, 0), sys.noise().total_count(), cfg.steps(), cfg.dt);
    let rec = integrate_with_path(&sys, &y, &cfg, &path, &mut ()).unwrap();
    for eq in Equation::ALL {
        for seed in 0..3 {
            let v = random_field(k, eq.test_space(), 100 + seed);
            let r = weak_residual(&sys, &rec, &path, &v, eq).unwrap();
            assert!(r.abs() < 1e-11, "{}: residual {r}", eq.as_str());
        }
    }
}

#[test]
fn zero_trajectory_has_zero_weak_residual() {
    let sys = system(1, params(), all_channel_noise(1, 0.5));
    let cfg = run(0.05, 1e-2, 2);
    let path = BrownianPath::generate(StreamKey::new(1, 0), sys.noise().total_count(), cfg.steps(), cfg.dt);
    let rec = integrate_with_path(&sys, &sys.zero_state(), &cfg, &path, &mut ()).unwrap();
    for eq in Equation::ALL {
        let v = random_field(1, eq.test_space(), 7);
        assert_eq!(weak_residual(&sys, &rec, &path, &v, eq).unwrap(), 0.0);
    }
}

#[test]
fn stationary_magnetization_balance() {
    let p = params();
    let k = 1;
    let sys = system(k, p, NoiseModel::noise_free(k));
    let h = constant(k, [0.3, -0.2, 0.5]).retag(SpaceTag::V1).unwrap();
    let m = h.scaled(p.chi0);
    let z = SpectralField::zeros(k, SpaceTag::V);
    let y = sys.state_from_fields(&z, &SpectralField::zeros(k, SpaceTag::W), &m, &h).unwrap();
    let cfg = run(0.2, 1e-2, 4);
    let path = BrownianPath::generate(StreamKey::new(1, 0), 0, cfg.steps(), cfg.dt);
    let rec = integrate_with_path(&sys, &y, &cfg, &path, &mut ()).unwrap();
    for eq in Equation::ALL {
        for seed in 0..3 {
            let v = random_field(k, eq.test_space(), 40 + seed);
            let r = weak_residual(&sys, &rec, &path, &v, eq).unwrap();
            assert!(r.abs() <= 1e-10, "{}: {r}", eq.as_str());
        }
    }
}

#[test]
fn test_functions_outside_the_span_are_rejected() {
    let sys = system(1, params(), NoiseModel::noise_free(1));
    let cfg = run(0.02, 1e-2, 1);
    let path = BrownianPath::generate(StreamKey::new(1, 0), 0, cfg.steps(), cfg.dt);
    let rec = integrate_with_path(&sys, &sys.zero_state(), &cfg, &path, &mut ()).unwrap();
    // gradient field is not in V
    let grad = SpectralField::from_terms(1, SpaceTag::W, &[TrigTerm::cos([1, 0, 0], [1.0, 0.0, 0.0])]).unwrap();
    assert!(weak_residual(&sys, &rec, &path, &grad, Equation::Velocity).is_err());
    assert!(weak_residual(&sys, &rec, &path, &grad, Equation::Rotation).is_ok());
    // modes above the cutoff
    let high = SpectralField::from_terms(2, SpaceTag::W, &[TrigTerm::cos([2, 0, 0], [0.0, 1.0, 0.0])]).unwrap();
    assert!(weak_residual(&sys, &rec, &path, &high, Equation::Rotation).is_err());
    let low = SpectralField::from_terms(2, SpaceTag::W, &[TrigTerm::cos([1, 0, 0], [0.0, 1.0, 0.0])]).unwrap();
    assert!(weak_residual(&sys, &rec, &path, &low, Equation::Rotation).is_ok());
}
