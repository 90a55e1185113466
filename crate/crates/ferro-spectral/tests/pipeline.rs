//! The public API end to end: fields, operators, a noisy run and its ledger.

use ferro_spectral::diagnostics::EnergyLedger;
use ferro_spectral::galerkin::{GalerkinState, GalerkinSystem, PhysicalParams};
use ferro_spectral::integrator::{integrate_member, RunConfig, StoppingRadius};
use ferro_spectral::noise::{NoiseChannel, NoiseFamily, NoiseModel};
use ferro_spectral::operators::{trilinear_b, PseudoSpectralEngine};
use ferro_spectral::spectral::{SpaceTag, SpectralField, TrigTerm};

/// A real trigonometric field kept as terms, so values and gradients are analytic.
struct Terms(Vec<(f64, [i32; 3], [f64; 3])>);

impl Terms {
    fn phase(k: [i32; 3], x: [f64; 3]) -> f64 {
        k[0] as f64 * x[0] + k[1] as f64 * x[1] + k[2] as f64 * x[2]
    }

    /// Each term is `amp · cos(k·x + shift)`.
    fn value(&self, x: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (shift, k, amp) in &self.0 {
            let c = (Self::phase(*k, x) + shift).cos();
            for d in 0..3 {
                out[d] += amp[d] * c;
            }
        }
        out
    }

    /// `g[i][j] = ∂ᵢ f_j`.
    fn grad(&self, x: [f64; 3]) -> [[f64; 3]; 3] {
        let mut g = [[0.0; 3]; 3];
        for (shift, k, amp) in &self.0 {
            let s = -(Self::phase(*k, x) + shift).sin();
            for i in 0..3 {
                for j in 0..3 {
                    g[i][j] += k[i] as f64 * amp[j] * s;
                }
            }
        }
        g
    }

    fn field(&self, k_max: usize) -> SpectralField {
        let terms: Vec<TrigTerm> = self
            .0
            .iter()
            .map(|(shift, k, amp)| {
                if *shift == 0.0 {
                    TrigTerm::cos(*k, *amp)
                } else {
                    // cos(θ + π/2) = -sin θ
                    TrigTerm::sin(*k, amp.map(|a| -a))
                }
            })
            .collect();
        SpectralField::from_terms(k_max, SpaceTag::W, &terms).unwrap()
    }
}

const QUARTER: f64 = std::f64::consts::FRAC_PI_2;

#[test]
fn trilinear_form_matches_grid_quadrature() {
    let phi = Terms(vec![(0.0, [1, 0, 0], [0.0, 1.0, -0.5]), (QUARTER, [0, 1, 1], [0.3, 0.2, -0.2])]);
    let psi = Terms(vec![(QUARTER, [1, 1, 0], [0.5, -0.7, 0.1]), (0.0, [0, 0, 1], [1.0, 0.0, 0.0])]);
    let v = Terms(vec![(0.0, [0, 1, 1], [0.2, 0.4, 0.9]), (QUARTER, [1, 1, 1], [-1.0, 0.5, 0.25])]);

    // degree at most 3 per axis, so 8 points per axis integrate exactly
    let n = 8;
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let mut oracle = 0.0;
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let x = [i as f64 * h, j as f64 * h, l as f64 * h];
                let (a, g, w) = (phi.value(x), psi.grad(x), v.value(x));
                for r in 0..3 {
                    for c in 0..3 {
                        oracle += a[r] * g[r][c] * w[c];
                    }
                }
            }
        }
    }
    oracle *= h * h * h;
    let got = trilinear_b(&phi.field(1), &psi.field(1), &v.field(1)).unwrap();
    assert!((got - oracle).abs() <= 1e-12 * oracle.abs().max(1.0), "{got} vs {oracle}");
}

fn noisy_system() -> GalerkinSystem<PseudoSpectralEngine> {
    let k = 1;
    let shear = SpectralField::from_terms(k, SpaceTag::W, &[TrigTerm::cos([0, 0, 1], [0.2, 0.0, 0.0])]).unwrap();
    let drift = SpectralField::from_terms(k, SpaceTag::W, &[TrigTerm::cos([0, 0, 0], [0.0, 0.25, 0.0])]).unwrap();
    let noise = NoiseModel::new(
        k,
        vec![
            NoiseFamily::new(NoiseChannel::Velocity, vec![shear.clone()]),
            NoiseFamily::new(NoiseChannel::Magnetization, vec![drift.clone()]),
            NoiseFamily::new(NoiseChannel::Field, vec![shear, drift]),
        ],
    )
    .unwrap();
    GalerkinSystem::new(PseudoSpectralEngine::new(k), PhysicalParams::default(), noise).unwrap()
}

fn spread_state(sys: &GalerkinSystem<PseudoSpectralEngine>) -> GalerkinState {
    let mut y = sys.zero_state();
    for (i, x) in y.as_mut_slice().iter_mut().enumerate() {
        *x = 0.3 * ((i * 7 % 11) as f64 / 11.0 - 0.5);
    }
    y
}

#[test]
fn ledger_telescopes_to_the_energy_change() {
    let sys = noisy_system();
    let y = spread_state(&sys);
    let run = RunConfig { horizon: 0.1, dt: 1e-3, seed: 3, stopping_radius: StoppingRadius::Never, ..RunConfig::default() };
    let mut ledger = EnergyLedger::new();
    let rec = integrate_member(&sys, &y, &run, 0, &mut ledger).unwrap();
    assert!(rec.succeeded());
    assert_eq!(ledger.len(), 100);

    let t = ledger.totals();
    let d: f64 = t.dissipation.iter().sum();
    let s: f64 = t.sources.iter().sum();
    let q: f64 = t.hs.iter().sum();
    let m: f64 = t.martingale.iter().sum();
    let change = t.final_energy - t.initial_energy;
    assert!((change - (-d + s + q + m + t.residual)).abs() <= 1e-12 * (d + s.abs() + q + m.abs() + 1.0));
    assert!((t.final_energy - sys.energy(rec.last())).abs() <= 1e-14 * t.final_energy);
    for row in &ledger.rows {
        assert!(row.drift_power_defect.abs() <= 1e-10 * (row.dissipation.iter().sum::<f64>() + 1.0));
        assert!(row.hs.iter().all(|x| *x >= 0.0));
    }
    // only the active channels carry martingale increments
    assert!(ledger.rows.iter().all(|r| r.martingale[1] == 0.0));
    assert!(ledger.rows.iter().any(|r| r.martingale[0] != 0.0));
}

#[test]
fn members_are_reproducible_and_distinct() {
    let sys = noisy_system();
    let y = spread_state(&sys);
    let run = RunConfig { horizon: 0.05, dt: 1e-3, seed: 42, ..RunConfig::default() };
    let a = integrate_member(&sys, &y, &run, 1, &mut ()).unwrap();
    let b = integrate_member(&sys, &y, &run, 1, &mut ()).unwrap();
    let c = integrate_member(&sys, &y, &run, 2, &mut ()).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.last(), c.last());
    // divergence constraints hold on every stored snapshot
    for s in &a.states {
        let f = sys.reconstruct(s).unwrap();
        assert!(f.u.div_coeff_norm() <= 1e-13 * f.u.l2_norm().max(1e-300));
        assert!(f.b.div_coeff_norm() <= 1e-13 * f.b.l2_norm().max(1e-300));
    }
}
