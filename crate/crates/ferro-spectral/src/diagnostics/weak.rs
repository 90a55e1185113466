use alloc::format;

use crate::error::{Error, Result};
use crate::galerkin::{Fields, GalerkinSystem};
use crate::integrator::{BrownianPath, TrajectoryRecord};
use crate::math;
use crate::noise::NoiseChannel;
use crate::operators::ProductEngine;
use crate::spectral::{SpaceTag, SpectralField};

/// Equation tested by [`weak_residual`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Equation {
    Velocity,
    Rotation,
    Magnetization,
    Induction,
}

impl Equation {
    pub const ALL: [Equation; 4] = [Equation::Velocity, Equation::Rotation, Equation::Magnetization, Equation::Induction];

    /// Space the test functions must belong to.
    pub fn test_space(self) -> SpaceTag {
        match self {
            Equation::Velocity => SpaceTag::V,
            Equation::Rotation => SpaceTag::W,
            Equation::Magnetization => SpaceTag::V1,
            Equation::Induction => SpaceTag::V2,
        }
    }

    fn channel(self) -> NoiseChannel {
        match self {
            Equation::Velocity => NoiseChannel::Velocity,
            Equation::Rotation => NoiseChannel::Rotation,
            Equation::Magnetization => NoiseChannel::Magnetization,
            Equation::Induction => NoiseChannel::Field,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Equation::Velocity => "u",
            Equation::Rotation => "w",
            Equation::Magnetization => "M",
            Equation::Induction => "B",
        }
    }
}

fn unknown(f: &Fields, eq: Equation) -> &SpectralField {
    match eq {
        Equation::Velocity => &f.u,
        Equation::Rotation => &f.w,
        Equation::Magnetization => &f.m,
        Equation::Induction => &f.b,
    }
}

/// Field the noise of `eq` acts on.
fn noise_source(f: &Fields, eq: Equation) -> &SpectralField {
    match eq {
        Equation::Velocity => &f.u,
        Equation::Rotation => &f.w,
        Equation::Magnetization => &f.m,
        Equation::Induction => &f.h,
    }
}

/// Deterministic weak-form integrand against `v`, built from the
/// integrated-by-parts forms rather than from the assembled drift.
fn integrand<E: ProductEngine>(system: &GalerkinSystem<E>, f: &Fields, v: &SpectralField, eq: Equation) -> Result<f64> {
    let p = system.params();
    let ops = system.ops();
    let (u, w, m, h) = (&f.u, &f.w, &f.m, &f.h);
    Ok(match eq {
        Equation::Velocity => {
            let b = m.add(h)?;
            ops.trilinear_b(u, v, u)? - p.nu * u.neg_laplacian().inner(v)?
                - p.mu0 * ops.trilinear_b(&b, v, h)?
                - p.alpha * ops.apply_r2(u, w)?.inner(&v.curl())?
        }
        Equation::Rotation => {
            ops.trilinear_b(u, v, w)? + (p.lambda1 + p.lambda2) * w.grad_div().inner(v)?
                - p.lambda1 * w.neg_laplacian().inner(v)?
                + 2.0 * p.alpha * u.inner(&v.curl())?
                - 4.0 * p.alpha * w.inner(v)?
                + p.mu0 * ops.cross(m, h)?.inner(v)?
        }
        Equation::Magnetization => {
            let relax = m.sub(&h.scaled(p.chi0))?;
            ops.trilinear_b(u, v, m)? + ops.cross(w, m)?.inner(v)? - relax.inner(v)? / p.tau
                - p.lambda * m.curl().inner(&v.curl())?
                + p.lambda * m.grad_div().inner(v)?
        }
        Equation::Induction => {
            -h.curl().inner(&v.curl())? / p.sigma + ops.cross(u, &f.b)?.curl().inner(v)?
        }
    })
}

/// Test function on the trajectory's lattice, or an error if it lies outside
/// the Galerkin span of `eq`.
fn in_span(test: &SpectralField, k_max: usize, eq: Equation) -> Result<SpectralField> {
    let v = if test.k_max() == k_max {
        test.clone()
    } else if test.k_max() > k_max && test.resized(k_max).resized(test.k_max()) == *test {
        test.resized(k_max)
    } else {
        return Err(Error::Constraint(format!(
            "test function has modes beyond the Galerkin cutoff k_max = {k_max}"
        )));
    };
    if !v.conforms_to(eq.test_space()) {
        return Err(Error::Constraint(format!("test function is not in {}", eq.test_space())));
    }
    Ok(v)
}

/// Defect of the time-integrated weak form of `eq` at the last snapshot:
///
/// `⟨X(T), v⟩ - ⟨X(0), v⟩ - Σ integrand(tᵢ)Δtᵢ - Σ ⟨noise(tᵢ), v⟩Δβᵢ`
///
/// with the drift and noise frozen at the left end of each snapshot interval.
pub fn weak_residual<E: ProductEngine>(
    system: &GalerkinSystem<E>,
    record: &TrajectoryRecord,
    path: &BrownianPath,
    test: &SpectralField,
    eq: Equation,
) -> Result<f64> {
    let v = in_span(test, system.k_max(), eq)?;
    if record.states.is_empty() {
        return Err(Error::InvalidConfig("trajectory has no snapshots".into()));
    }
    let noise = system.noise();
    let channel = eq.channel();
    let offset = noise.offset(channel);
    let dt = path.dt();
    let step_of = |t: f64| math::round(t / dt) as usize;
    let first = system.reconstruct(&record.states[0])?;
    let start = unknown(&first, eq).inner(&v)?;
    let mut integral = 0.0;
    let mut fields = first;
    for i in 0..record.states.len() - 1 {
        let h = record.times[i + 1] - record.times[i];
        integral += integrand(system, &fields, &v, eq)? * h;
        let (from, to) = (step_of(record.times[i]), step_of(record.times[i + 1]));
        for k in 0..noise.count(channel) {
            let g = noise.apply(channel, noise_source(&fields, eq), k)?;
            integral += g.inner(&v)? * path.sum(offset + k, from, to);
        }
        fields = system.reconstruct(&record.states[i + 1])?;
    }
    Ok(unknown(&fields, eq).inner(&v)? - start - integral)
}
