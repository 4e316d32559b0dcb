//! Free evolution, kicks and the one-period Floquet map `U = K_φ U₀`.

use log::debug;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drive::{DriveSpec, KickNoise};
use crate::error::{Error, Result};
use crate::hamiltonian::{parity_sectors, Hamiltonian};
use crate::krylov;
use crate::state::{hadamard_transform, StateVector};
use crate::{C64, DENSE_MAX_SITES};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Norm drift above which a propagated state is renormalized.
pub const RENORMALIZE_THRESHOLD: f64 = 1e-12;

/// Largest chain for which `Method::Auto` picks dense diagonalization when `h ≠ 0`.
pub const AUTO_EXACT_MAX_SITES: usize = 10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Exact when `h = 0` or the chain is small, Krylov otherwise.
    #[default]
    Auto,
    /// Eigen-decomposition of `H₀` (phase table in the `σ^x` basis when `h = 0`).
    Exact,
    /// Lanczos approximation of `exp(-iH₀τ)ψ` with adaptive dimension.
    Krylov,
}

#[derive(Clone, Debug)]
struct SectorEigen {
    indices: Vec<usize>,
    vectors: DMatrix<f64>,
    energies: Vec<f64>,
}

#[derive(Clone, Debug)]
enum FreeKind {
    /// `h = 0`: `U₀` is diagonal in the `σ^x` product basis.
    IsingDiagonal,
    /// Eigenvectors of each parity block of `H₀`.
    Eigen(Vec<SectorEigen>),
    Krylov {
        max_dim: usize,
    },
}

/// Generator of `U₀ = exp(-iH₀τ)` for one Hamiltonian.
#[derive(Clone, Debug)]
pub struct Propagator {
    hamiltonian: Hamiltonian,
    kind: FreeKind,
    tolerance: f64,
}

impl Propagator {
    pub fn new(hamiltonian: &Hamiltonian, method: Method) -> Result<Self> {
        let n = hamiltonian.n_sites();
        let zero_field = hamiltonian.field() == 0.0;
        let kind = match method {
            Method::Krylov => FreeKind::Krylov {
                max_dim: krylov::DEFAULT_MAX_DIM,
            },
            _ if zero_field => FreeKind::IsingDiagonal,
            Method::Auto if n > AUTO_EXACT_MAX_SITES => FreeKind::Krylov {
                max_dim: krylov::DEFAULT_MAX_DIM,
            },
            _ => {
                if n > DENSE_MAX_SITES {
                    return Err(Error::SizeCap {
                        n_sites: n,
                        cap: DENSE_MAX_SITES,
                        what: "exact diagonalization",
                    });
                }
                FreeKind::Eigen(sector_eigen(hamiltonian))
            }
        };
        Ok(Self {
            hamiltonian: hamiltonian.clone(),
            kind,
            tolerance: DEFAULT_TOLERANCE,
        })
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    /// The method actually in use (`Auto` resolved).
    pub fn method(&self) -> Method {
        match self.kind {
            FreeKind::Krylov { .. } => Method::Krylov,
            _ => Method::Exact,
        }
    }

    /// Precomputes whatever depends on `τ` for repeated free steps.
    pub fn free_stepper(&self, tau: f64) -> Result<FreeStepper<'_>> {
        if !(tau >= 0.0) || !tau.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "evolution time must be finite and >= 0, got {tau}"
            )));
        }
        let phases = match &self.kind {
            FreeKind::IsingDiagonal => self
                .hamiltonian
                .x_energies()
                .iter()
                .map(|&e| C64::from_polar(1.0, -e * tau))
                .collect(),
            FreeKind::Eigen(sectors) => sectors
                .iter()
                .flat_map(|s| s.energies.iter().map(|&e| C64::from_polar(1.0, -e * tau)))
                .collect(),
            FreeKind::Krylov { .. } => Vec::new(),
        };
        Ok(FreeStepper {
            prop: self,
            tau,
            phases,
        })
    }

    /// `ψ ← exp(-iH₀τ)ψ`. Returns the norm drift observed before any
    /// renormalization.
    pub fn evolve_free(&self, state: &mut StateVector, tau: f64) -> Result<f64> {
        self.free_stepper(tau)?.apply(state)
    }
}

fn sector_eigen(hamiltonian: &Hamiltonian) -> Vec<SectorEigen> {
    parity_sectors(hamiltonian.n_sites())
        .into_iter()
        .map(|indices| {
            let eig = SymmetricEigen::new(hamiltonian.dense_block(&indices));
            SectorEigen {
                indices,
                vectors: eig.eigenvectors,
                energies: eig.eigenvalues.iter().copied().collect(),
            }
        })
        .collect()
}

/// `U₀` for a fixed `τ`.
pub struct FreeStepper<'p> {
    prop: &'p Propagator,
    tau: f64,
    phases: Vec<C64>,
}

impl FreeStepper<'_> {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn apply(&self, state: &mut StateVector) -> Result<f64> {
        if state.n_sites() != self.prop.hamiltonian.n_sites() {
            return Err(Error::DimensionMismatch {
                expected: self.prop.hamiltonian.n_sites(),
                got: state.n_sites(),
            });
        }
        if self.tau == 0.0 {
            return Ok(0.0);
        }
        match &self.prop.kind {
            FreeKind::IsingDiagonal => {
                let amps = state.amplitudes_mut();
                hadamard_transform(amps);
                amps.iter_mut().zip(&self.phases).for_each(|(a, p)| *a *= p);
                hadamard_transform(amps);
            }
            FreeKind::Eigen(sectors) => {
                let amps = state.amplitudes_mut();
                let mut offset = 0;
                for sector in sectors {
                    let d = sector.indices.len();
                    let phases = &self.phases[offset..offset + d];
                    offset += d;
                    apply_sector(sector, phases, amps);
                }
            }
            FreeKind::Krylov { max_dim } => {
                let hamiltonian = &self.prop.hamiltonian;
                // keep τ‖H‖ per sub-step moderate so the Krylov space stays small
                let substeps = (self.tau * hamiltonian.norm_bound() / 8.0).ceil().max(1.0) as usize;
                let dt = self.tau / substeps as f64;
                let tol = self.prop.tolerance / substeps as f64;
                let mut psi = state.amplitudes().to_vec();
                for _ in 0..substeps {
                    psi = krylov::expm_apply(hamiltonian, &psi, dt, tol, *max_dim)?;
                }
                state.replace_amplitudes(psi);
            }
        }
        let drift = state.norm() - 1.0;
        if drift.abs() > RENORMALIZE_THRESHOLD {
            debug!("free evolution norm drift {drift:e}; renormalizing");
            state.renormalize();
        }
        Ok(drift)
    }
}

fn apply_sector(sector: &SectorEigen, phases: &[C64], amps: &mut [C64]) {
    let d = sector.indices.len();
    let re = DVector::from_iterator(d, sector.indices.iter().map(|&b| amps[b].re));
    let im = DVector::from_iterator(d, sector.indices.iter().map(|&b| amps[b].im));
    if re.iter().chain(im.iter()).all(|&x| x == 0.0) {
        return;
    }
    let c_re = sector.vectors.tr_mul(&re);
    let c_im = sector.vectors.tr_mul(&im);
    let mut r_re = DVector::zeros(d);
    let mut r_im = DVector::zeros(d);
    for k in 0..d {
        let c = C64::new(c_re[k], c_im[k]) * phases[k];
        r_re[k] = c.re;
        r_im[k] = c.im;
    }
    let out_re = &sector.vectors * r_re;
    let out_im = &sector.vectors * r_im;
    for (k, &b) in sector.indices.iter().enumerate() {
        amps[b] = C64::new(out_re[k], out_im[k]);
    }
}

/// `exp(-i Σ φ_i σ^z_i)` as a diagonal over `σ^z` basis states.
pub fn kick_phase_table(angles: &[f64]) -> Vec<C64> {
    let n = angles.len();
    let mut table = vec![C64::new(0.0, 0.0); 1 << n];
    table[0] = C64::from_polar(1.0, -angles.iter().sum::<f64>());
    for (i, &phi) in angles.iter().enumerate() {
        // flipping site i from ↑ to ↓ changes the phase by exp(+2iφ_i)
        let step = C64::from_polar(1.0, 2.0 * phi);
        let half = 1usize << i;
        let (lo, hi) = table[..2 * half].split_at_mut(half);
        hi.iter_mut()
            .zip(lo.iter())
            .for_each(|(h, l)| *h = l * step);
    }
    table
}

/// `ψ ← exp(-i Σ φ_i σ^z_i) ψ`.
pub fn apply_kick(state: &mut StateVector, angles: &[f64]) -> Result<()> {
    if angles.len() != state.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: state.n_sites(),
            got: angles.len(),
        });
    }
    let table = kick_phase_table(angles);
    state
        .amplitudes_mut()
        .iter_mut()
        .zip(&table)
        .for_each(|(a, p)| *a *= p);
    Ok(())
}

enum Kick {
    Fixed(Vec<C64>),
    Noisy(KickNoise),
}

/// One drive period: free evolution for `τ`, then the kick.
pub struct FloquetMap<'p> {
    free: FreeStepper<'p>,
    kick: Kick,
}

impl<'p> FloquetMap<'p> {
    /// `realization` selects the noise stream when the drive is noisy.
    pub fn new(prop: &'p Propagator, drive: &DriveSpec, realization: u64) -> Result<Self> {
        drive.validate()?;
        let n = prop.hamiltonian.n_sites();
        let kick = if drive.is_noisy() {
            Kick::Noisy(KickNoise::new(
                drive.rng_seed,
                realization,
                n,
                drive.noise_bound,
            ))
        } else {
            Kick::Fixed(kick_phase_table(&drive.nominal_angles(n)))
        };
        Ok(Self {
            free: prop.free_stepper(drive.period_tau)?,
            kick,
        })
    }

    /// Applies period number `period` (0-based); returns the free-step norm drift.
    pub fn step(&self, state: &mut StateVector, period: usize) -> Result<f64> {
        let drift = self.free.apply(state)?;
        match &self.kick {
            Kick::Fixed(table) => state
                .amplitudes_mut()
                .iter_mut()
                .zip(table)
                .for_each(|(a, p)| *a *= p),
            Kick::Noisy(noise) => apply_kick(state, &noise.angles(period))?,
        }
        Ok(drift)
    }
}

/// Single application of `U = K_φ U₀`. For noisy drives the kick angles are
/// those of `(drive.rng_seed, realization, period)`.
pub fn floquet_step(
    state: &mut StateVector,
    prop: &Propagator,
    drive: &DriveSpec,
    realization: u64,
    period: usize,
) -> Result<f64> {
    FloquetMap::new(prop, drive, realization)?.step(state, period)
}

/// Dense one-period unitary; column `j` is the Floquet step applied to `|j⟩`.
pub fn build_floquet_matrix(prop: &Propagator, drive: &DriveSpec) -> Result<DMatrix<C64>> {
    let n = prop.hamiltonian.n_sites();
    if n > DENSE_MAX_SITES {
        return Err(Error::SizeCap {
            n_sites: n,
            cap: DENSE_MAX_SITES,
            what: "dense Floquet matrices",
        });
    }
    if drive.is_noisy() {
        return Err(Error::NoisyDrive);
    }
    let map = FloquetMap::new(prop, drive, 0)?;
    let dim = 1usize << n;
    let columns = (0..dim)
        .into_par_iter()
        .map(|j| {
            let mut state = StateVector::basis(n, j)?;
            map.step(&mut state, 0)?;
            Ok(state.into_amplitudes())
        })
        .collect::<Result<Vec<_>>>()?;
    let u = DMatrix::from_fn(dim, dim, |r, c| columns[c][r]);
    let residual = crate::floquet::unitarity_residual(&u);
    if residual >= 1e-9 {
        return Err(Error::NotUnitary(residual));
    }
    Ok(u)
}
