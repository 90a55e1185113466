//! Parallel ensembles with deterministic output order.
//!
//! Each member draws its increments from `(seed, member)` alone, and results
//! are collected by member index, so the thread count never changes a bit of
//! the output.

use ferro_spectral::diagnostics::EnergyLedger;
use ferro_spectral::galerkin::{GalerkinState, GalerkinSystem};
use ferro_spectral::integrator::{integrate_member, integrate_with_path, BrownianPath, RunConfig, TrajectoryRecord};
use ferro_spectral::operators::ProductEngine;
use ferro_spectral::rng::StreamKey;
use ferro_spectral::Result;
use rayon::prelude::*;

#[derive(Clone, Debug)]
pub struct Member {
    pub record: TrajectoryRecord,
    pub ledger: Option<EnergyLedger>,
}

/// Runs members `0..run.ensemble_size` on the current rayon pool.
pub fn run_ensemble<E: ProductEngine>(
    system: &GalerkinSystem<E>,
    initial: &GalerkinState,
    run: &RunConfig,
    with_ledger: bool,
) -> Result<Vec<Member>> {
    (0..run.ensemble_size as u64)
        .into_par_iter()
        .map(|m| {
            if with_ledger {
                let mut ledger = EnergyLedger::new();
                let record = integrate_member(system, initial, run, m, &mut ledger)?;
                Ok(Member { record, ledger: Some(ledger) })
            } else {
                Ok(Member { record: integrate_member(system, initial, run, m, &mut ())?, ledger: None })
            }
        })
        .collect()
}

/// The Brownian path member `member` sees under `run`.
pub fn member_path(run: &RunConfig, channels: usize, member: u64) -> BrownianPath {
    let key = StreamKey::new(StreamKey::member_seed(run.seed, member), member);
    BrownianPath::generate(key, channels, run.steps(), run.dt)
}

/// Member `member` integrated at `run.dt · 2^level` on the coarsened path of
/// the finest level, keeping the snapshot stride in steps fixed.
pub fn refinement_member<E: ProductEngine>(
    system: &GalerkinSystem<E>,
    initial: &GalerkinState,
    finest: &RunConfig,
    member: u64,
    level: u32,
) -> Result<(TrajectoryRecord, BrownianPath)> {
    let fine = member_path(finest, system.noise().total_count(), member);
    let factor = 1usize << level;
    let path = if factor == 1 { fine } else { fine.coarsen(factor)? };
    let run = RunConfig { dt: finest.dt * factor as f64, ..*finest };
    let record = integrate_with_path(system, initial, &run, &path, &mut ())?;
    Ok((record, path))
}

/// Runs `f` on a pool of `threads` workers, or on the global pool when `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().expect("thread pool").install(f),
        None => f(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ferro_spectral::galerkin::PhysicalParams;
    use ferro_spectral::noise::{NoiseChannel, NoiseFamily, NoiseModel};
    use ferro_spectral::operators::ModalEngine;
    use ferro_spectral::spectral::{SpaceTag, SpectralField, TrigTerm};

    fn system() -> GalerkinSystem<ModalEngine> {
        let g = SpectralField::from_terms(1, SpaceTag::W, &[TrigTerm::cos([0, 0, 0], [0.3, 0.0, 0.0])]).unwrap();
        let noise = NoiseModel::new(1, vec![NoiseFamily::new(NoiseChannel::Rotation, vec![g])]).unwrap();
        GalerkinSystem::new(ModalEngine::new(1), PhysicalParams::default(), noise).unwrap()
    }

    fn initial(sys: &GalerkinSystem<ModalEngine>) -> GalerkinState {
        let mut y = sys.zero_state();
        for (i, x) in y.as_mut_slice().iter_mut().enumerate() {
            *x = 0.1 * ((i % 5) as f64 - 2.0);
        }
        y
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let sys = system();
        let y0 = initial(&sys);
        let run = RunConfig { horizon: 0.02, dt: 1e-3, ensemble_size: 6, seed: 11, ..RunConfig::default() };
        let one = with_threads(Some(1), || run_ensemble(&sys, &y0, &run, true).unwrap());
        let three = with_threads(Some(3), || run_ensemble(&sys, &y0, &run, true).unwrap());
        for (a, b) in one.iter().zip(&three) {
            assert_eq!(a.record, b.record);
            assert_eq!(a.ledger.as_ref().unwrap().rows, b.ledger.as_ref().unwrap().rows);
        }
        assert_eq!(one.iter().map(|m| m.record.member).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn level_zero_matches_plain_member() {
        let sys = system();
        let y0 = initial(&sys);
        let run = RunConfig { horizon: 0.02, dt: 1e-3, seed: 5, ..RunConfig::default() };
        let (rec, _) = refinement_member(&sys, &y0, &run, 0, 0).unwrap();
        let plain = integrate_member(&sys, &y0, &run, 0, &mut ()).unwrap();
        assert_eq!(rec, plain);
    }
}
