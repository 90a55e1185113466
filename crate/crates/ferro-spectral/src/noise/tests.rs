use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;

use super::*;
use crate::spectral::TrigTerm;
use crate::testutil::random_field;

const PI3: f64 = PI * PI * PI;

fn member(k_max: usize, terms: &[TrigTerm]) -> SpectralField {
    let mut f = SpectralField::zeros(k_max, SpaceTag::W);
    for t in terms {
        f.add_term(t).unwrap();
    }
    f
}

fn constant(k_max: usize, v: [f64; 3]) -> SpectralField {
    member(k_max, &[TrigTerm::cos([0, 0, 0], v)])
}

fn single(k_max: usize, channel: NoiseChannel, g: SpectralField) -> NoiseModel {
    NoiseModel::new(k_max, vec![NoiseFamily::new(channel, vec![g])]).unwrap()
}

#[test]
fn constant_velocity_noise_margin() {
    let m = single(1, NoiseChannel::Velocity, constant(1, [1.0, 0.0, 0.0]));
    let r = validate_assumptions(&m, DEFAULT_VALIDATION_GRID).unwrap();
    // 2I - e₁e₁ᵀ has eigenvalues 1, 2, 2
    assert!((r.c1() - 1.0).abs() < 1e-14);
    assert_eq!(r.c2(), 2.0);
    assert_eq!(r.channel(NoiseChannel::Velocity).lipschitz_margin, 0.0);
    // C5 = ‖b‖²_∞ + ‖div b‖²_∞ = 1
    assert!((r.c5() - 1.0).abs() < 1e-14);
    assert!(r.pass, "{:?}", r.violations);
}

#[test]
fn sinusoidal_magnetization_noise_margin() {
    let g = member(1, &[TrigTerm::sin([1, 0, 0], [0.0, 0.0, 1.0])]);
    assert!(g.div_coeff_norm() == 0.0);
    let m = single(1, NoiseChannel::Magnetization, g);
    let r = validate_assumptions(&m, DEFAULT_VALIDATION_GRID).unwrap();
    // 2 - max sin²x₁ = 1, attained on the grid at x₁ = π/2
    assert!((r.c4() - 1.0).abs() < 1e-14);
    assert!((r.channel(NoiseChannel::Magnetization).argmin[0] - PI / 2.0).abs() < 1e-12);
    assert!((r.c8() - 1.0).abs() < 1e-14);
    assert!(r.channel(NoiseChannel::Magnetization).div_free);
    assert!(r.pass, "{:?}", r.violations);
}

#[test]
fn strong_noise_fails_with_point() {
    let m = single(1, NoiseChannel::Velocity, constant(1, [1.5, 0.0, 0.0]));
    let r = validate_assumptions(&m, DEFAULT_VALIDATION_GRID).unwrap();
    assert!((r.c1() - (2.0 - 2.25)).abs() < 1e-14);
    assert!(!r.pass);
    assert_eq!(r.violations.len(), 1);
    assert!(r.violations[0].contains("velocity"));
}

#[test]
fn divergent_magnetization_member_fails() {
    // (sin x₁, 0, 0) has divergence cos x₁
    let g = member(1, &[TrigTerm::sin([1, 0, 0], [0.5, 0.0, 0.0])]);
    let m = single(1, NoiseChannel::Magnetization, g.clone());
    let r = validate_assumptions(&m, DEFAULT_VALIDATION_GRID).unwrap();
    assert!(!r.channel(NoiseChannel::Magnetization).div_free);
    assert!(!r.pass);
    // the same field is admissible for rotation, where divergence only enters C6
    let m = single(1, NoiseChannel::Rotation, g);
    let r = validate_assumptions(&m, DEFAULT_VALIDATION_GRID).unwrap();
    assert!(r.pass, "{:?}", r.violations);
    assert!((r.c6() - (0.25 + 0.25)).abs() < 1e-14);
}

#[test]
fn field_summability_uses_gradient() {
    // j = (0, 0, a cos x₁): ‖j‖_∞ = a, ‖∇j‖_∞ = a
    let a = 0.4;
    let g = member(1, &[TrigTerm::cos([1, 0, 0], [0.0, 0.0, a])]);
    let r = validate_assumptions(&single(1, NoiseChannel::Field, g), 16).unwrap();
    assert!((r.c7() - 4.0 * a * a).abs() < 1e-14);
    assert!((r.c3() - (2.0 - a * a)).abs() < 1e-14);
}

#[test]
fn grid_must_resolve_members() {
    let m = NoiseModel::noise_free(3);
    assert!(matches!(validate_assumptions(&m, 6), Err(Error::GridTooSmall { .. })));
}

#[test]
fn member_above_bandlimit_rejected() {
    let g = member(2, &[TrigTerm::cos([2, 0, 0], [0.0, 1.0, 0.0])]);
    let r = NoiseModel::new(1, vec![NoiseFamily::new(NoiseChannel::Rotation, vec![g])]);
    assert!(matches!(r, Err(Error::InvalidConfig(_))));
    let twice = vec![NoiseFamily::empty(NoiseChannel::Field), NoiseFamily::empty(NoiseChannel::Field)];
    assert!(NoiseModel::new(1, twice).is_err());
}

#[test]
fn apply_constant_velocity_noise() {
    let m = single(1, NoiseChannel::Velocity, constant(1, [1.0, 0.0, 0.0]));
    let u = SpectralField::from_terms(1, SpaceTag::V, &[TrigTerm::cos([1, 0, 0], [0.0, 1.0, 0.0])]).unwrap();
    let got = m.apply(NoiseChannel::Velocity, &u, 0).unwrap();
    let want = SpectralField::from_terms(1, SpaceTag::V, &[TrigTerm::sin([1, 0, 0], [0.0, -1.0, 0.0])]).unwrap();
    assert!(got.sub(&want).unwrap().max_abs_coeff() < 1e-15);
    assert_eq!(got.tag(), SpaceTag::V);
    // HS norm 4π³ = (2 - c₁)‖∇u‖² with c₁ = 1
    let hs = m.hs_norm_sq(NoiseChannel::Velocity, &u).unwrap();
    assert!((hs - 4.0 * PI3).abs() < 1e-12 * hs);
    assert!((hs - u.grad_norm_sq()).abs() < 1e-12 * hs);
    assert!(matches!(m.apply(NoiseChannel::Velocity, &u, 1), Err(Error::IndexOutOfRange { index: 1, len: 1 })));
    assert!(matches!(m.apply(NoiseChannel::Rotation, &u, 0), Err(Error::IndexOutOfRange { .. })));
}

#[test]
fn constant_state_gives_zero() {
    let g = member(1, &[TrigTerm::sin([1, 0, 0], [0.0, 0.0, 1.0])]);
    let m = single(1, NoiseChannel::Magnetization, g);
    let c = constant(1, [1.0, -2.0, 0.5]);
    assert_eq!(m.apply(NoiseChannel::Magnetization, &c, 0).unwrap().max_abs_coeff(), 0.0);
    assert_eq!(m.hs_norm_sq(NoiseChannel::Magnetization, &c).unwrap(), 0.0);
}

#[test]
fn flat_channel_ordering() {
    let m = NoiseModel::new(
        1,
        vec![
            NoiseFamily::new(NoiseChannel::Field, vec![constant(1, [0.1, 0.0, 0.0]); 2]),
            NoiseFamily::new(NoiseChannel::Velocity, vec![constant(1, [0.1, 0.0, 0.0]); 3]),
        ],
    )
    .unwrap();
    assert_eq!(m.total_count(), 5);
    assert_eq!(m.offset(NoiseChannel::Velocity), 0);
    assert_eq!(m.offset(NoiseChannel::Magnetization), 3);
    assert_eq!(m.offset(NoiseChannel::Field), 3);
    assert_eq!("field".parse::<NoiseChannel>().unwrap(), NoiseChannel::Field);
    assert!("pressure".parse::<NoiseChannel>().is_err());
}

/// Div-free noise family at `k_max` with amplitudes scaled by `amp`.
fn div_free_family(k_max: usize, n: usize, seed: u64, amp: f64) -> Vec<SpectralField> {
    (0..n)
        .map(|i| {
            let f = random_field(k_max, SpaceTag::V2, seed.wrapping_add(i as u64));
            f.scaled(amp / f.max_abs_coeff().max(1e-300) / 8.0)
        })
        .collect()
}

fn any_family(k_max: usize, n: usize, seed: u64, amp: f64) -> Vec<SpectralField> {
    (0..n)
        .map(|i| {
            let f = random_field(k_max, SpaceTag::W, seed.wrapping_add(i as u64));
            f.scaled(amp / f.max_abs_coeff().max(1e-300) / 8.0)
        })
        .collect()
}

#[test]
fn dual_hs_norm_bounded_by_summability() {
    let k = 2;
    let members = any_family(k, 3, 11, 1.0);
    let m = NoiseModel::new(k, vec![NoiseFamily::new(NoiseChannel::Rotation, members)]).unwrap();
    let r = validate_assumptions(&m, 16).unwrap();
    let bases = Bases::new(k).unwrap();
    for seed in 0..10 {
        let w = random_field(k, SpaceTag::W, 100 + seed);
        let d = m.hs_dual_norm_sq(NoiseChannel::Rotation, &w, &bases).unwrap();
        // the grid supremum underestimates the true one, so allow the Lipschitz slack
        assert!(d <= 2.0 * r.c6() * w.l2_norm_sq() * 1.5, "{d} vs {}", 2.0 * r.c6() * w.l2_norm_sq());
        assert!(d > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn magnetization_martingale_term_vanishes(seed in any::<u64>(), k in 1usize..=2) {
        let members = div_free_family(k, 3, seed, 0.7);
        let m = NoiseModel::new(k, vec![NoiseFamily::new(NoiseChannel::Magnetization, members)]).unwrap();
        let mm = random_field(k, SpaceTag::V1, seed ^ 0x55);
        for col in m.apply_all(NoiseChannel::Magnetization, &mm).unwrap() {
            let scale = col.l2_norm() * mm.l2_norm();
            prop_assert!(col.inner(&mm).unwrap().abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn hs_norm_within_ellipticity_bound(seed in any::<u64>(), k in 1usize..=2, chan in 0usize..4) {
        let channel = NoiseChannel::ALL[chan];
        let members = if channel.requires_div_free() {
            div_free_family(k, 2, seed, 0.6)
        } else {
            any_family(k, 2, seed, 0.6)
        };
        let m = NoiseModel::new(k, vec![NoiseFamily::new(channel, members)]).unwrap();
        let r = validate_assumptions(&m, 16).unwrap();
        let rep = r.channel(channel);
        let f = random_field(k, SpaceTag::W, seed ^ 0xAA).project(match channel {
            NoiseChannel::Velocity => SpaceTag::V,
            NoiseChannel::Rotation => SpaceTag::W,
            _ => SpaceTag::V1,
        });
        let hs = m.hs_norm_sq(channel, &f).unwrap();
        // (2 - c) with the continuum c bounded below by the grid value minus the safety margin
        let bound = (2.0 - (rep.min_eig - rep.lipschitz_margin)) * f.grad_norm_sq();
        prop_assert!(hs <= bound * (1.0 + 1e-12), "hs {} bound {}", hs, bound);
    }

    #[test]
    fn hs_norm_is_two_homogeneous(seed in any::<u64>(), s in -3.0f64..3.0) {
        let m = NoiseModel::new(2, vec![NoiseFamily::new(NoiseChannel::Velocity, any_family(2, 2, seed, 0.5))]).unwrap();
        let u = random_field(2, SpaceTag::V, seed ^ 3);
        let a = m.hs_norm_sq(NoiseChannel::Velocity, &u.scaled(s)).unwrap();
        let b = m.hs_norm_sq(NoiseChannel::Velocity, &u).unwrap();
        prop_assert!((a - s * s * b).abs() <= 1e-12 * b.max(a));
    }

    #[test]
    fn adding_members_never_raises_margin(seed in any::<u64>()) {
        let base = any_family(1, 2, seed, 0.5);
        let mut more = base.clone();
        more.extend(any_family(1, 1, seed ^ 0xF00D, 0.5));
        let a = validate_assumptions(&NoiseModel::new(1, vec![NoiseFamily::new(NoiseChannel::Velocity, base)]).unwrap(), 16).unwrap();
        let b = validate_assumptions(&NoiseModel::new(1, vec![NoiseFamily::new(NoiseChannel::Velocity, more)]).unwrap(), 16).unwrap();
        prop_assert!(b.c1() <= a.c1() + 1e-15);
        prop_assert!(b.c5() >= a.c5());
    }
}
