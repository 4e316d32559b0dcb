//! Kick parameters and the reproducible kick-noise stream.

use std::f64::consts::PI;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Drive of period `τ` with kick angle `φ_i = π(1/2 - ε_i)` per site.
///
/// With `noise_bound = 0` every site uses `ε_i = epsilon`; otherwise `ε_i` is
/// drawn afresh each period, uniformly on `[0, noise_bound]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    pub period_tau: f64,
    pub epsilon: f64,
    #[serde(default)]
    pub noise_bound: f64,
    pub n_periods: usize,
    #[serde(default)]
    pub rng_seed: u64,
}

impl DriveSpec {
    pub fn new(period_tau: f64, epsilon: f64, n_periods: usize) -> Self {
        Self {
            period_tau,
            epsilon,
            noise_bound: 0.0,
            n_periods,
            rng_seed: 0,
        }
    }

    pub fn with_noise(mut self, noise_bound: f64, rng_seed: u64) -> Self {
        self.noise_bound = noise_bound;
        self.rng_seed = rng_seed;
        self
    }

    pub fn is_noisy(&self) -> bool {
        self.noise_bound > 0.0
    }

    /// `ω_d = 2π/τ`.
    pub fn drive_frequency(&self) -> f64 {
        2.0 * PI / self.period_tau
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period_tau >= 0.0) || !self.period_tau.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "period tau must be finite and >= 0, got {}",
                self.period_tau
            )));
        }
        if !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter("epsilon must be finite".into()));
        }
        if !(self.noise_bound >= 0.0) || !self.noise_bound.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise bound must be finite and >= 0, got {}",
                self.noise_bound
            )));
        }
        Ok(())
    }

    /// Noise-free per-site angles `π(1/2 - ε)`.
    pub fn nominal_angles(&self, n_sites: usize) -> Vec<f64> {
        vec![kick_angle(self.epsilon); n_sites]
    }
}

pub fn kick_angle(epsilon: f64) -> f64 {
    PI * (0.5 - epsilon)
}

/// Uniform kick errors, addressable by `(seed, realization, period, site)`.
///
/// Each realization is a separate ChaCha8 stream; the draw for `(period,
/// site)` sits at a fixed word offset, so any period can be regenerated
/// without replaying the earlier ones.
#[derive(Clone, Debug)]
pub struct KickNoise {
    seed: u64,
    realization: u64,
    n_sites: usize,
    bound: f64,
}

impl KickNoise {
    pub fn new(seed: u64, realization: u64, n_sites: usize, bound: f64) -> Self {
        Self {
            seed,
            realization,
            n_sites,
            bound,
        }
    }

    /// `ε_i` for every site at `period`.
    pub fn epsilons(&self, period: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.realization);
        // one u64 (two 32-bit words) per draw
        rng.set_word_pos(2 * (period as u128) * (self.n_sites as u128));
        (0..self.n_sites)
            .map(|_| {
                let unit = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                self.bound * unit
            })
            .collect()
    }

    pub fn angles(&self, period: usize) -> Vec<f64> {
        self.epsilons(period).into_iter().map(kick_angle).collect()
    }
}
