//! State vectors over the `σ^z` computational basis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{C64, MAX_SITES};

/// Tolerance on `Σ|a|² = 1` accepted by [`StateVector::new`].
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Normalized amplitudes `ψ[b]` for the `2^N` bitstrings `b`.
///
/// Bit `i` of `b` is 0 for `|↑⟩_i` and 1 for `|↓⟩_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_sites: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Wraps normalized amplitudes. The length must be exactly `2^n_sites`.
    pub fn new(n_sites: usize, amplitudes: Vec<C64>) -> Result<Self> {
        check_sites(n_sites)?;
        if amplitudes.len() != 1 << n_sites {
            return Err(Error::DimensionMismatch {
                expected: 1 << n_sites,
                got: amplitudes.len(),
            });
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm_sqr));
        }
        Ok(Self {
            n_sites,
            amplitudes,
        })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn from_unnormalized(n_sites: usize, mut amplitudes: Vec<C64>) -> Result<Self> {
        check_sites(n_sites)?;
        if amplitudes.len() != 1 << n_sites {
            return Err(Error::DimensionMismatch {
                expected: 1 << n_sites,
                got: amplitudes.len(),
            });
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm * norm));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(Self {
            n_sites,
            amplitudes,
        })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_sites: usize, index: usize) -> Result<Self> {
        check_sites(n_sites)?;
        let dim = 1usize << n_sites;
        if index >= dim {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self {
            n_sites,
            amplitudes,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub(crate) fn replace_amplitudes(&mut self, amplitudes: Vec<C64>) {
        debug_assert_eq!(amplitudes.len(), self.amplitudes.len());
        self.amplitudes = amplitudes;
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Renormalizes in place and returns the norm deviation `‖ψ‖ - 1` found.
    pub(crate) fn renormalize(&mut self) -> f64 {
        let norm = self.norm();
        self.amplitudes.iter_mut().for_each(|a| *a /= norm);
        norm - 1.0
    }
}

fn check_sites(n_sites: usize) -> Result<()> {
    if n_sites == 0 {
        return Err(Error::InvalidParameter("n_sites must be at least 1".into()));
    }
    if n_sites > MAX_SITES {
        return Err(Error::SizeCap {
            n_sites,
            cap: MAX_SITES,
            what: "state vectors",
        });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// All spins along `+x`.
    Right,
    /// All spins along `-x`.
    Left,
}

/// The fully `x`-polarized product state `⊗|→⟩` or `⊗|←⟩`.
pub fn product_state_x(n_sites: usize, direction: Direction) -> Result<StateVector> {
    check_sites(n_sites)?;
    let dim = 1usize << n_sites;
    let scale = (dim as f64).sqrt().recip();
    let amplitudes = (0..dim)
        .map(|b| match direction {
            Direction::Right => C64::new(scale, 0.0),
            Direction::Left if (b as u64).count_ones() % 2 == 1 => C64::new(-scale, 0.0),
            Direction::Left => C64::new(scale, 0.0),
        })
        .collect();
    Ok(StateVector {
        n_sites,
        amplitudes,
    })
}

/// `⟨ψ|Σ_i σ^x_i|ψ⟩`, computed with bit flips.
pub fn total_sigma_x(amplitudes: &[C64], n_sites: usize) -> f64 {
    let mut total = 0.0;
    for site in 0..n_sites {
        let mask = 1usize << site;
        for (b, a) in amplitudes.iter().enumerate() {
            if b & mask == 0 {
                // pairs (b, b|mask) contribute 2 Re(conj(a_b) a_{b|mask})
                total += 2.0 * (a.conj() * amplitudes[b | mask]).re;
            }
        }
    }
    total
}

/// Per-spin magnetization `m^x = ⟨Σσ^x⟩ / N`.
pub fn magnetization_x(state: &StateVector) -> f64 {
    total_sigma_x(&state.amplitudes, state.n_sites) / state.n_sites as f64
}

/// Applies `Σ_i σ^x_i` to `input`, writing into `out`.
pub fn apply_total_sigma_x(input: &[C64], out: &mut [C64], n_sites: usize) {
    out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
    for site in 0..n_sites {
        let mask = 1usize << site;
        for (b, o) in out.iter_mut().enumerate() {
            *o += input[b ^ mask];
        }
    }
}

/// In-place normalized Walsh-Hadamard transform: maps `σ^z`-basis amplitudes
/// to `σ^x`-product-basis amplitudes and back (the transform is an involution).
pub fn hadamard_transform(amplitudes: &mut [C64]) {
    let dim = amplitudes.len();
    debug_assert!(dim.is_power_of_two());
    let mut half = 1;
    while half < dim {
        for block in amplitudes.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half *= 2;
    }
    let scale = (dim as f64).sqrt().recip();
    amplitudes.iter_mut().for_each(|a| *a *= scale);
}

/// Parity `∏σ^z` eigenvalue of a basis state: `+1` for an even number of down spins.
pub fn parity_of(b: usize) -> i8 {
    if (b as u64).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}
