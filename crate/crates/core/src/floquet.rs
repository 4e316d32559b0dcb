//! Quasi-energy spectrum of the one-period unitary and π-pairing statistics.
//!
//! The Floquet operator commutes with the parity `P = ∏σ^z`, which is
//! diagonal in the computational basis. Diagonalizing the two parity blocks
//! separately gives every quasi-energy an exact parity label, so nearly
//! degenerate states of opposite parity never mix.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drive::DriveSpec;
use crate::error::{Error, Result};
use crate::fit::{ols, LinearFit};
use crate::hamiltonian::{build_hamiltonian, parity_sectors, HamiltonianSpec};
use crate::propagator::{build_floquet_matrix, Method, Propagator};
use crate::{C64, DENSE_MAX_SITES};

/// Gaps are floored here before taking logarithms.
pub const GAP_FLOOR: f64 = 1e-15;

/// `⟨ln Δ_π⟩` below this is treated as exact pairing at machine precision.
pub const PINNED_LOG_GAP: f64 = -20.0;

const UNITARITY_TOLERANCE: f64 = 1e-9;
const PARITY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FloquetEigensystem {
    pub tau: f64,
    /// `μ_α ∈ (-π/τ, π/τ]`, ascending.
    pub quasi_energies: Vec<f64>,
    /// Parity `±1` of each eigenstate, aligned with `quasi_energies`.
    pub parities: Vec<i8>,
    pub hilbert_dim: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairingGaps {
    pub delta_0: Vec<f64>,
    pub delta_pi: Vec<f64>,
    pub mean_log_delta_0: f64,
    pub mean_log_delta_pi: f64,
}

/// Splits `u` into its two parity blocks and returns them with the largest
/// matrix element connecting different parities (`max |UP - PU| / 2`).
fn parity_blocks(u: &DMatrix<C64>) -> Result<([DMatrix<C64>; 2], f64)> {
    let dim = u.nrows();
    if dim != u.ncols() || !dim.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "Floquet matrix must be square with power-of-two size, got {}x{}",
            u.nrows(),
            u.ncols()
        )));
    }
    let n = dim.trailing_zeros() as usize;
    let [even, odd] = parity_sectors(n);
    let mut leak: f64 = 0.0;
    for &r in &even {
        for &c in &odd {
            leak = leak.max(u[(r, c)].norm()).max(u[(c, r)].norm());
        }
    }
    let block = |idx: &[usize]| DMatrix::from_fn(idx.len(), idx.len(), |r, c| u[(idx[r], idx[c])]);
    Ok(([block(&even), block(&odd)], leak))
}

fn gram_residual(m: &DMatrix<C64>) -> f64 {
    let g = m.adjoint() * m;
    let mut worst: f64 = 0.0;
    for r in 0..g.nrows() {
        for c in 0..g.ncols() {
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((g[(r, c)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// `max |U†U - I|`. Parity-conserving matrices are checked block by block.
pub fn unitarity_residual(u: &DMatrix<C64>) -> f64 {
    match parity_blocks(u) {
        Ok((blocks, leak)) if leak <= 1e-12 && u.nrows() > 1 => blocks
            .iter()
            .map(gram_residual)
            .fold(0.0, f64::max)
            .max(leak),
        _ => gram_residual(u),
    }
}

/// Folds a quasi-energy into `(-π/τ, π/τ]`.
pub fn fold_quasi_energy(mu: f64, tau: f64) -> f64 {
    let zone = 2.0 * PI / tau;
    let mut folded = mu - zone * (mu / zone).round();
    if folded <= -PI / tau {
        folded += zone;
    }
    if folded > PI / tau {
        folded -= zone;
    }
    folded
}

/// Quasi-energies `μ = -arg(λ)/τ` of a parity-conserving unitary.
pub fn floquet_eigensystem(u: &DMatrix<C64>, tau: f64) -> Result<FloquetEigensystem> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tau must be > 0, got {tau}"
        )));
    }
    let (blocks, leak) = parity_blocks(u)?;
    let n = u.nrows().trailing_zeros() as usize;
    if n > DENSE_MAX_SITES {
        return Err(Error::SizeCap {
            n_sites: n,
            cap: DENSE_MAX_SITES,
            what: "Floquet diagonalization",
        });
    }
    if leak > PARITY_TOLERANCE {
        return Err(Error::ParityBroken(2.0 * leak));
    }
    let residual = blocks.iter().map(gram_residual).fold(0.0, f64::max);
    if residual >= UNITARITY_TOLERANCE {
        return Err(Error::NotUnitary(residual));
    }

    let per_block: Vec<Vec<C64>> = blocks
        .into_par_iter()
        .map(|b| {
            if b.nrows() == 0 {
                return Ok(Vec::new());
            }
            b.eigenvalues()
                .map(|v| v.iter().copied().collect())
                .ok_or_else(|| Error::EigenNotConverged("complex Schur iteration".into()))
        })
        .collect::<Result<_>>()?;

    let mut labelled: Vec<(f64, i8)> = Vec::with_capacity(u.nrows());
    for (lambdas, parity) in per_block.iter().zip([1i8, -1]) {
        for lambda in lambdas {
            if (lambda.norm() - 1.0).abs() >= UNITARITY_TOLERANCE {
                return Err(Error::NotUnitary((lambda.norm() - 1.0).abs()));
            }
            labelled.push((fold_quasi_energy(-lambda.arg() / tau, tau), parity));
        }
    }
    labelled.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    Ok(FloquetEigensystem {
        tau,
        quasi_energies: labelled.iter().map(|x| x.0).collect(),
        parities: labelled.iter().map(|x| x.1).collect(),
        hilbert_dim: u.nrows(),
    })
}

fn mean_log_abs(values: &[f64]) -> f64 {
    values
        .iter()
        .map(|d| d.abs().max(GAP_FLOOR).ln())
        .sum::<f64>()
        / values.len() as f64
}

/// `Δ₀ = μ_{α+1} - μ_α` and `Δ_π = μ_{α+𝔑/2} - (μ_α + π/τ)`, cyclic in `α`.
pub fn pairing_gaps(es: &FloquetEigensystem) -> PairingGaps {
    let mu = &es.quasi_energies;
    let dim = mu.len();
    let tau = es.tau;
    let zone = 2.0 * PI / tau;
    // index arithmetic wraps past the zone edge by adding one zone width
    let shifted = |alpha: usize, offset: usize| {
        let k = alpha + offset;
        if k >= dim {
            mu[k - dim] + zone
        } else {
            mu[k]
        }
    };
    let delta_0: Vec<f64> = (0..dim).map(|a| shifted(a, 1) - mu[a]).collect();
    let delta_pi: Vec<f64> = (0..dim)
        .map(|a| fold_quasi_energy(shifted(a, dim / 2) - (mu[a] + PI / tau), tau))
        .collect();
    PairingGaps {
        mean_log_delta_0: mean_log_abs(&delta_0),
        mean_log_delta_pi: mean_log_abs(&delta_pi),
        delta_0,
        delta_pi,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairingPoint {
    pub epsilon: f64,
    pub n_sites: usize,
    pub mean_log_delta_0: f64,
    pub mean_log_delta_pi: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairingSlope {
    pub epsilon: f64,
    /// Fit of `⟨ln Δ₀⟩ = a + b ln N`.
    pub fit_0: LinearFit,
    /// Fit of `⟨ln Δ_π⟩ = a + b ln N`; `None` when `Δ_π` sits at the floor
    /// for every size.
    pub fit_pi: Option<LinearFit>,
    /// `b_π < b₀`: `Δ_π` closes faster with system size than `Δ₀`.
    pub dtc_compatible: bool,
}

impl PairingSlope {
    pub fn slope_b0(&self) -> f64 {
        self.fit_0.slope
    }

    pub fn slope_bpi(&self) -> Option<f64> {
        self.fit_pi.as_ref().map(|f| f.slope)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairingScaling {
    pub points: Vec<PairingPoint>,
    pub slopes: Vec<PairingSlope>,
}

/// Gap statistics for a single `(template, n_sites, epsilon)` point.
pub fn pairing_point(
    template: &HamiltonianSpec,
    drive: &DriveSpec,
    n_sites: usize,
) -> Result<(FloquetEigensystem, PairingGaps)> {
    let spec = HamiltonianSpec {
        n_sites,
        ..template.clone()
    };
    let hamiltonian = build_hamiltonian(&spec)?;
    let prop = Propagator::new(&hamiltonian, Method::Exact)?;
    let u = build_floquet_matrix(&prop, drive)?;
    let es = floquet_eigensystem(&u, drive.period_tau)?;
    let gaps = pairing_gaps(&es);
    Ok((es, gaps))
}

/// Fits `⟨ln Δ_{0/π}⟩ = a + b ln N` over `sizes` for every kick error in `epsilons`.
pub fn pairing_size_scaling(
    template: &HamiltonianSpec,
    drive: &DriveSpec,
    sizes: &[usize],
    epsilons: &[f64],
) -> Result<PairingScaling> {
    if sizes.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 system sizes, got {}",
            sizes.len()
        )));
    }
    if let Some(&n) = sizes.iter().find(|&&n| n > DENSE_MAX_SITES) {
        return Err(Error::SizeCap {
            n_sites: n,
            cap: DENSE_MAX_SITES,
            what: "Floquet diagonalization",
        });
    }
    let grid: Vec<(f64, usize)> = epsilons
        .iter()
        .flat_map(|&e| sizes.iter().map(move |&n| (e, n)))
        .collect();
    let points = grid
        .iter()
        .map(|&(epsilon, n_sites)| {
            let drive = DriveSpec {
                epsilon,
                ..drive.clone()
            };
            let (_, gaps) = pairing_point(template, &drive, n_sites)?;
            Ok(PairingPoint {
                epsilon,
                n_sites,
                mean_log_delta_0: gaps.mean_log_delta_0,
                mean_log_delta_pi: gaps.mean_log_delta_pi,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let slopes = epsilons
        .iter()
        .map(|&epsilon| {
            let at_eps: Vec<&PairingPoint> =
                points.iter().filter(|p| p.epsilon == epsilon).collect();
            let log_n: Vec<f64> = at_eps.iter().map(|p| (p.n_sites as f64).ln()).collect();
            let l0: Vec<f64> = at_eps.iter().map(|p| p.mean_log_delta_0).collect();
            let lpi: Vec<f64> = at_eps.iter().map(|p| p.mean_log_delta_pi).collect();
            let fit_0 = ols(&log_n, &l0)?;
            let pinned = lpi.iter().all(|&v| v < PINNED_LOG_GAP);
            let fit_pi = if pinned {
                None
            } else {
                Some(ols(&log_n, &lpi)?)
            };
            let dtc_compatible = fit_pi.as_ref().is_some_and(|f| f.slope < fit_0.slope);
            Ok(PairingSlope {
                epsilon,
                fit_0,
                fit_pi,
                dtc_compatible,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PairingScaling { points, slopes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::build_hamiltonian;

    fn floquet(spec: HamiltonianSpec, tau: f64, eps: f64) -> DMatrix<C64> {
        let h = build_hamiltonian(&spec).unwrap();
        let prop = Propagator::new(&h, Method::Exact).unwrap();
        build_floquet_matrix(&prop, &DriveSpec::new(tau, eps, 1)).unwrap()
    }

    fn has_partner(mu: &[f64], tau: f64, tol: f64) -> bool {
        mu.iter().all(|&m| {
            let target = fold_quasi_energy(m + PI / tau, tau);
            mu.iter().any(|&o| {
                let d = fold_quasi_energy(o - target, tau);
                d.abs() < tol
            })
        })
    }

    #[test]
    fn perfect_flip_spectrum_is_pi_paired() {
        let tau = 0.6;
        let u = floquet(HamiltonianSpec::nearest_neighbour(4, 1.0, 0.0), tau, 0.0);
        let es = floquet_eigensystem(&u, tau).unwrap();
        assert_eq!(es.quasi_energies.len(), 16);
        assert!(has_partner(&es.quasi_energies, tau, 1e-9));
        let gaps = pairing_gaps(&es);
        assert!(gaps.delta_pi.iter().all(|d| d.abs() < 1e-9));
        assert!(gaps.mean_log_delta_pi < PINNED_LOG_GAP);
        assert!(gaps.mean_log_delta_0 > gaps.mean_log_delta_pi + 5.0);
    }

    #[test]
    fn two_free_spins_under_pure_flip() {
        // K_{π/2} on two spins: phases exp(-iπ/2 Σ s_i) = {-1, 1, 1, -1}
        // so eigenvalues are ±1 twice each: μ = 0 (x2) and π/τ (x2)
        let tau = 0.6;
        let u = floquet(HamiltonianSpec::nearest_neighbour(2, 0.0, 0.0), tau, 0.0);
        let es = floquet_eigensystem(&u, tau).unwrap();
        let mut want = [0.0, 0.0, PI / tau, PI / tau];
        want.sort_by(f64::total_cmp);
        for (got, w) in es.quasi_energies.iter().zip(want) {
            assert!((got - w).abs() < 1e-12, "{got} vs {w}");
        }
        // λ = -1 states are |↑↑⟩, |↓↓⟩ (even), λ = +1 states are odd
        for (mu, p) in es.quasi_energies.iter().zip(&es.parities) {
            if mu.abs() < 1e-9 {
                assert_eq!(*p, -1);
            } else {
                assert_eq!(*p, 1);
            }
        }
    }

    #[test]
    fn parity_labels_sum_to_trace_of_parity() {
        for n in 1..=5 {
            let u = floquet(HamiltonianSpec::nearest_neighbour(n, 1.0, 0.32), 0.6, 0.08);
            let es = floquet_eigensystem(&u, 0.6).unwrap();
            assert_eq!(es.parities.iter().map(|&p| p as i32).sum::<i32>(), 0);
            assert!(es.quasi_energies.windows(2).all(|w| w[0] <= w[1]));
            assert!(es
                .quasi_energies
                .iter()
                .all(|&m| m > -PI / 0.6 && m <= PI / 0.6));
        }
    }

    #[test]
    fn large_kick_error_breaks_pairing() {
        let tau = 0.6;
        let u = floquet(HamiltonianSpec::nearest_neighbour(4, 1.0, 0.0), tau, 0.2);
        let gaps = pairing_gaps(&floquet_eigensystem(&u, tau).unwrap());
        assert!(gaps.mean_log_delta_pi > gaps.mean_log_delta_0 - 2.0);
    }

    #[test]
    fn sign_rule_for_paired_eigenvalues() {
        // h = 0, ε = 0: |E_s, ±⟩ has eigenvalue ±e^{-iE_s τ} for N = 4m and
        // ∓e^{-iE_s τ} for N = 4m + 2
        let tau = 0.6;
        for n in [4usize, 6] {
            let spec = HamiltonianSpec::nearest_neighbour(n, 1.0, 0.0);
            let h = build_hamiltonian(&spec).unwrap();
            let u = floquet(spec, tau, 0.0);
            let dim = 1 << n;
            // cat states of x-basis configurations c and its complement
            for c in [0usize, 1, 5] {
                let energy = h.x_energies()[c];
                for sign in [1.0, -1.0] {
                    let mut psi_x = vec![C64::new(0.0, 0.0); dim];
                    psi_x[c] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                    psi_x[(dim - 1) ^ c] = C64::new(sign * std::f64::consts::FRAC_1_SQRT_2, 0.0);
                    let mut psi = psi_x.clone();
                    crate::state::hadamard_transform(&mut psi);
                    let v = nalgebra::DVector::from_vec(psi.clone());
                    let uv = &u * &v;
                    let parity: f64 = psi
                        .iter()
                        .enumerate()
                        .map(|(b, a)| a.norm_sqr() * crate::state::parity_of(b) as f64)
                        .sum();
                    let rule = if n % 4 == 0 { parity } else { -parity };
                    let want = v * C64::from_polar(rule, -energy * tau);
                    let err = (uv - want).norm();
                    assert!(err < 1e-10, "N={n}, c={c}, sign={sign}: {err}");
                }
            }
        }
    }

    #[test]
    fn perfectly_even_synthetic_spectrum_has_zero_pi_gaps() {
        let tau = 0.6;
        let dim = 16;
        let mu: Vec<f64> = (0..dim)
            .map(|a| fold_quasi_energy(a as f64 * 2.0 * PI / (dim as f64 * tau), tau))
            .collect();
        let mut sorted = mu.clone();
        sorted.sort_by(f64::total_cmp);
        let es = FloquetEigensystem {
            tau,
            quasi_energies: sorted,
            parities: vec![1; dim],
            hilbert_dim: dim,
        };
        let gaps = pairing_gaps(&es);
        assert!(gaps.delta_pi.iter().all(|d| d.abs() < 1e-12));
        assert!(gaps
            .delta_0
            .iter()
            .all(|d| (d - 2.0 * PI / (dim as f64 * tau)).abs() < 1e-12));
    }

    #[test]
    fn folding_is_idempotent_and_zone_periodic() {
        let tau = 0.6;
        for k in -40..40 {
            let mu = k as f64 * 0.37;
            let f = fold_quasi_energy(mu, tau);
            assert_eq!(fold_quasi_energy(f, tau), f);
            assert!((fold_quasi_energy(mu + 2.0 * PI / tau, tau) - f).abs() < 1e-12);
            assert!(f > -PI / tau && f <= PI / tau);
        }
        assert_eq!(fold_quasi_energy(-PI / tau, tau), PI / tau);
    }

    #[test]
    fn floquet_operator_commutes_with_parity() {
        let u = floquet(HamiltonianSpec::power_law(5, 1.0, 0.4, 1.5), 0.6, 0.13);
        let (_, leak) = parity_blocks(&u).unwrap();
        assert!(2.0 * leak < 1e-9);
    }

    #[test]
    fn rejects_non_unitary_input() {
        let mut u = DMatrix::<C64>::identity(4, 4);
        u[(0, 0)] = C64::new(1.1, 0.0);
        assert!(matches!(
            floquet_eigensystem(&u, 0.6),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn zero_kick_error_and_field_pin_pi_gap_for_all_sizes() {
        let template = HamiltonianSpec::nearest_neighbour(4, 1.0, 0.0);
        let scaling =
            pairing_size_scaling(&template, &DriveSpec::new(0.6, 0.0, 1), &[4, 5, 6], &[0.0])
                .unwrap();
        assert!(scaling.slopes[0].fit_pi.is_none());
        assert!(!scaling.slopes[0].dtc_compatible);
    }
}
