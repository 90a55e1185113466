use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::rng::StreamKey;

/// Increments `Δβ_k(n) ~ N(0, Δt)` for every channel and step, stored
/// step-major. Each entry depends only on `(seed, member, channel, step)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BrownianPath {
    seed: u64,
    member: u64,
    dt: f64,
    channels: usize,
    steps: usize,
    increments: Vec<f64>,
}

impl BrownianPath {
    pub fn generate(key: StreamKey, channels: usize, steps: usize, dt: f64) -> Self {
        let sd = math::sqrt(dt);
        let mut increments = Vec::with_capacity(channels * steps);
        for n in 0..steps as u64 {
            for c in 0..channels as u64 {
                increments.push(sd * key.normal(c, n));
            }
        }
        BrownianPath { seed: key.seed, member: key.member, dt, channels, steps, increments }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn member(&self) -> u64 {
        self.member
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// All channel increments of step `n`.
    pub fn increments_at(&self, n: usize) -> &[f64] {
        &self.increments[n * self.channels..(n + 1) * self.channels]
    }

    pub fn increment(&self, n: usize, channel: usize) -> f64 {
        self.increments[n * self.channels + channel]
    }

    /// Path on the grid of step `factor·dt`, each increment the sum of
    /// `factor` consecutive fine increments.
    pub fn coarsen(&self, factor: usize) -> Result<BrownianPath> {
        if factor == 0 || self.steps % factor != 0 {
            return Err(Error::InvalidConfig(alloc::format!(
                "coarsening factor {factor} does not divide {} steps",
                self.steps
            )));
        }
        let steps = self.steps / factor;
        let mut increments = alloc::vec![0.0; steps * self.channels];
        for n in 0..self.steps {
            let coarse = n / factor;
            for c in 0..self.channels {
                increments[coarse * self.channels + c] += self.increment(n, c);
            }
        }
        Ok(BrownianPath {
            seed: self.seed,
            member: self.member,
            dt: self.dt * factor as f64,
            channels: self.channels,
            steps,
            increments,
        })
    }

    /// Sum of increments of one channel over steps `from..to`.
    pub fn sum(&self, channel: usize, from: usize, to: usize) -> f64 {
        (from..to).map(|n| self.increment(n, channel)).sum()
    }
}
