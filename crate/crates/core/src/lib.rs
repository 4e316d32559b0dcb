//! Exact numerical simulation of periodically kicked transverse-field Ising
//! chains.
//!
//! The crate covers the full pipeline used to diagnose discrete time-crystal
//! behaviour in small chains:
//!
//! - [`hamiltonian`] and [`state`]: basis conventions, Ising Hamiltonians
//!   (nearest-neighbour and power-law) acting matrix-free on `2^N` amplitudes.
//! - [`propagator`]: free evolution `exp(-i H τ)` (phase-table fast path at
//!   `h = 0`, dense eigen-decomposition, or Lanczos/Krylov), per-site kicks,
//!   the one-period Floquet map and its dense matrix.
//! - [`dynamics`]: initial-state preparation and stroboscopic magnetization
//!   trajectories, including noisy kick ensembles.
//! - [`spectral`]: normalized Fourier spectra, main-peak splitting, the
//!   KL-divergence phase diagnostic, parameter scans and scaling fits.
//! - [`floquet`]: quasi-energies, parity labels and π-pairing gap statistics.
//! - [`lmg`]: the infinite-range model in the maximal-spin Dicke sector and
//!   its first-order closed form.
//!
//! Bit conventions: site `i` is bit `i` of the basis index (site 0 is the
//! least significant bit). In the `σ^z` basis bit 0 is `|↑⟩`; in the `σ^x`
//! product basis bit 0 is `|→⟩`.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod drive;
pub mod dynamics;
pub mod error;
pub mod fit;
pub mod floquet;
pub mod hamiltonian;
pub mod io;
pub mod krylov;
pub mod lmg;
pub mod propagator;
pub mod spectral;
pub mod state;

pub use num_complex::Complex64 as C64;

pub use drive::{kick_angle, DriveSpec, KickNoise};
pub use dynamics::{
    prepare_initial_state, run_noisy_ensemble, run_trajectory, simulate, EnsembleResult,
    InitialState, TrajectoryResult,
};
pub use error::{Error, Result};
pub use fit::{ols, LinearFit};
pub use floquet::{
    floquet_eigensystem, pairing_gaps, pairing_point, pairing_size_scaling, FloquetEigensystem,
    PairingGaps, PairingPoint, PairingScaling, PairingSlope,
};
pub use hamiltonian::{build_hamiltonian, Boundary, Hamiltonian, HamiltonianSpec};
pub use lmg::{
    dicke_omega_1, lmg_exact_trajectory, lmg_perturbative_mx, DickeSector, LmgClosedForm,
};
pub use propagator::{apply_kick, build_floquet_matrix, floquet_step, Method, Propagator};
pub use spectral::{
    fit_splitting_scaling, fourier_spectrum, kld, main_peak_splitting, reference_spectrum,
    scan_phase_map, threshold_crossings, PeakSplitting, PhaseMap, ScalingFit, ScanParameter,
    ScanRow, ScanSpec, Spectrum, SplittingPoint,
};
pub use state::{magnetization_x, product_state_x, Direction, StateVector};

/// Largest chain accepted by the state-vector code (`2^20` amplitudes).
pub const MAX_SITES: usize = 20;

/// Largest chain for which dense `2^N × 2^N` matrices are formed.
pub const DENSE_MAX_SITES: usize = 12;
