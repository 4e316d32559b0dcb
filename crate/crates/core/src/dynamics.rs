//! Stroboscopic trajectories `m^x(n)` from prepared initial states.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drive::DriveSpec;
use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, parity_sectors, Hamiltonian, HamiltonianSpec};
use crate::krylov;
use crate::propagator::{FloquetMap, Method, Propagator};
use crate::state::{apply_total_sigma_x, magnetization_x, product_state_x, Direction, StateVector};
use crate::C64;

/// Below this `|⟨E₀|Σσ^x|E₁⟩|/N` the two lowest states cannot be combined
/// into a magnetized state.
const MIN_CAT_COUPLING: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    ProductRight,
    ProductLeft,
    /// Magnetized (`m^x > 0`) combination of the two lowest eigenstates of
    /// `H₀` at the Hamiltonian's own `h/J`.
    SymmetryBrokenGs,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrajectoryResult {
    /// `m^x(n)` for `n = 0..n_periods`; entry 0 is the initial state.
    pub mx_series: Vec<f64>,
    pub hamiltonian: HamiltonianSpec,
    pub drive: DriveSpec,
    pub initial_state: InitialState,
    /// Largest `|‖ψ‖ - 1|` seen after a free-evolution step.
    pub norm_drift: f64,
}

/// Builds `|Ψ(0)⟩` for `tag`.
pub fn prepare_initial_state(spec: &HamiltonianSpec, tag: InitialState) -> Result<StateVector> {
    match tag {
        InitialState::ProductRight => product_state_x(spec.n_sites, Direction::Right),
        InitialState::ProductLeft => product_state_x(spec.n_sites, Direction::Left),
        InitialState::SymmetryBrokenGs => {
            let hamiltonian = build_hamiltonian(spec)?;
            symmetry_broken_ground_state(&hamiltonian)
        }
    }
}

/// `(|E₀⟩ + s|E₁⟩)/√2` with `|E₀⟩`, `|E₁⟩` the lowest states of the two
/// parity sectors and `s` chosen so that `m^x > 0`.
pub fn symmetry_broken_ground_state(hamiltonian: &Hamiltonian) -> Result<StateVector> {
    let spec = hamiltonian.spec();
    let n = hamiltonian.n_sites();
    if !(spec.coupling > 0.0) {
        return Err(Error::InvalidParameter(
            "a ferromagnetic ground state needs J > 0".into(),
        ));
    }
    let ratio = hamiltonian.field() / spec.coupling;
    if !(0.0..1.0).contains(&ratio) {
        return Err(Error::InvalidParameter(format!(
            "h/J = {ratio} is outside the ferromagnetic range [0, 1)"
        )));
    }
    if hamiltonian.field() == 0.0 {
        return product_state_x(n, Direction::Right);
    }

    let right = product_state_x(n, Direction::Right)?;
    let left = product_state_x(n, Direction::Left)?;
    let dim = hamiltonian.dim();
    let mut lowest = Vec::with_capacity(2);
    for (sign, sector) in [1.0, -1.0].into_iter().zip(parity_sectors(n)) {
        // (|R⟩ ± |L⟩) lives entirely in one parity sector
        let start: Vec<C64> = right
            .amplitudes()
            .iter()
            .zip(left.amplitudes())
            .map(|(r, l)| r + l * sign)
            .collect();
        let (_, vector) =
            krylov::lowest_eigenpair(hamiltonian, &start, 1e-12, sector.len().min(400))?;
        lowest.push(vector);
    }
    let mut x_e1 = vec![C64::new(0.0, 0.0); dim];
    apply_total_sigma_x(&lowest[1], &mut x_e1, n);
    let coupling: C64 = lowest[0].iter().zip(&x_e1).map(|(a, b)| a.conj() * b).sum();
    if coupling.norm() / (n as f64) < MIN_CAT_COUPLING {
        return Err(Error::DegeneracyResolution(format!(
            "⟨E0|Σσx|E1⟩ = {coupling} vanishes"
        )));
    }
    // relative phase that makes ⟨E₀|Σσ^x|E₁⟩ s real and positive
    let phase = coupling.conj() / coupling.norm();
    let amplitudes = lowest[0]
        .iter()
        .zip(&lowest[1])
        .map(|(a, b)| (a + b * phase) * std::f64::consts::FRAC_1_SQRT_2)
        .collect();
    StateVector::from_unnormalized(n, amplitudes)
}

/// Runs `drive.n_periods` samples from `initial`, recording `m^x` after each
/// completed period (kick included).
pub fn run_from_state(
    prop: &Propagator,
    drive: &DriveSpec,
    mut state: StateVector,
    realization: u64,
) -> Result<(Vec<f64>, f64)> {
    let map = FloquetMap::new(prop, drive, realization)?;
    let mut series = Vec::with_capacity(drive.n_periods);
    let mut drift: f64 = 0.0;
    if drive.n_periods > 0 {
        series.push(magnetization_x(&state));
    }
    for period in 1..drive.n_periods {
        drift = drift.max(map.step(&mut state, period - 1)?.abs());
        series.push(magnetization_x(&state));
    }
    Ok((series, drift))
}

/// `m^x(n)` for a single realization.
pub fn run_trajectory(
    prop: &Propagator,
    drive: &DriveSpec,
    tag: InitialState,
) -> Result<TrajectoryResult> {
    run_realization(prop, drive, tag, 0)
}

fn run_realization(
    prop: &Propagator,
    drive: &DriveSpec,
    tag: InitialState,
    realization: u64,
) -> Result<TrajectoryResult> {
    let spec = prop.hamiltonian().spec().clone();
    let state = prepare_initial_state(&spec, tag)?;
    let (mx_series, norm_drift) = run_from_state(prop, drive, state, realization)?;
    Ok(TrajectoryResult {
        mx_series,
        hamiltonian: spec,
        drive: drive.clone(),
        initial_state: tag,
        norm_drift,
    })
}

/// Builds the Hamiltonian and propagator, then runs one trajectory.
pub fn simulate(
    spec: &HamiltonianSpec,
    drive: &DriveSpec,
    tag: InitialState,
    method: Method,
) -> Result<TrajectoryResult> {
    let hamiltonian = build_hamiltonian(spec)?;
    let prop = Propagator::new(&hamiltonian, method)?;
    run_trajectory(&prop, drive, tag)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub realizations: Vec<TrajectoryResult>,
    /// Pointwise mean over realizations.
    pub mean: TrajectoryResult,
}

/// Independent noise realizations `0..n_realizations` and their mean.
///
/// With `noise_bound = 0` the drive is deterministic and a single trajectory
/// is returned as both the only realization and the mean.
pub fn run_noisy_ensemble(
    prop: &Propagator,
    drive: &DriveSpec,
    tag: InitialState,
    n_realizations: usize,
) -> Result<EnsembleResult> {
    if !drive.is_noisy() {
        let single = run_trajectory(prop, drive, tag)?;
        return Ok(EnsembleResult {
            realizations: vec![single.clone()],
            mean: single,
        });
    }
    if n_realizations == 0 {
        return Err(Error::InvalidParameter(
            "need at least one realization".into(),
        ));
    }
    let realizations = (0..n_realizations as u64)
        .into_par_iter()
        .map(|r| run_realization(prop, drive, tag, r))
        .collect::<Result<Vec<_>>>()?;
    let mean = ensemble_mean(&realizations);
    Ok(EnsembleResult { realizations, mean })
}

/// Pointwise mean; each point is summed in sorted order so the result does
/// not depend on the order of the realizations.
pub fn ensemble_mean(realizations: &[TrajectoryResult]) -> TrajectoryResult {
    let first = &realizations[0];
    let len = first.mx_series.len();
    let count = realizations.len() as f64;
    let mx_series = (0..len)
        .map(|n| {
            let mut values: Vec<f64> = realizations.iter().map(|r| r.mx_series[n]).collect();
            values.sort_by(f64::total_cmp);
            values.iter().sum::<f64>() / count
        })
        .collect();
    TrajectoryResult {
        mx_series,
        hamiltonian: first.hamiltonian.clone(),
        drive: first.drive.clone(),
        initial_state: first.initial_state,
        norm_drift: realizations
            .iter()
            .map(|r| r.norm_drift)
            .fold(0.0, f64::max),
    }
}
