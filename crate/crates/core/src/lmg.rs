//! Infinite-range (LMG) chain restricted to the maximal-spin Dicke sector.
//!
//! The ladder is quantized along `x`: basis index `k` holds `|S, S - k⟩_x`,
//! so index 0 is the fully `x`-polarized state `|R⟩`. In this basis `S^x` is
//! diagonal and `S^z = (S⁺ + S⁻)/2` is real tridiagonal.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::drive::kick_angle;
use crate::error::{Error, Result};
use crate::C64;

pub const MAX_LMG_SITES: usize = 1000;

/// Closed-form prefactors above this are outside the perturbative regime.
pub const PERTURBATIVE_LIMIT: f64 = 0.1;

#[derive(Clone, Debug)]
pub struct DickeSector {
    n_sites: usize,
    field: f64,
    /// `m` of each basis state, `S, S - 1, …, -S`.
    m: Vec<f64>,
    sz: DMatrix<f64>,
    hamiltonian: DMatrix<f64>,
}

impl DickeSector {
    /// `H = -(1/N)(S^x)² - h S^z` on the `N + 1` states with `S = N/2`.
    pub fn new(n_sites: usize, field: f64) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_LMG_SITES {
            return Err(Error::SizeCap {
                n_sites,
                cap: MAX_LMG_SITES,
                what: "Dicke sector",
            });
        }
        if !field.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "field {field} is not finite"
            )));
        }
        let dim = n_sites + 1;
        let s = n_sites as f64 / 2.0;
        let m: Vec<f64> = (0..dim).map(|k| s - k as f64).collect();
        let mut sz = DMatrix::zeros(dim, dim);
        for k in 0..n_sites {
            // ⟨m|S⁺|m-1⟩ with m = m[k]
            let lower = m[k + 1];
            let e = 0.5 * (s * (s + 1.0) - lower * (lower + 1.0)).sqrt();
            sz[(k, k + 1)] = e;
            sz[(k + 1, k)] = e;
        }
        let mut hamiltonian = &sz * (-field);
        for k in 0..dim {
            hamiltonian[(k, k)] -= m[k] * m[k] / n_sites as f64;
        }
        Ok(Self {
            n_sites,
            field,
            m,
            sz,
            hamiltonian,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.n_sites + 1
    }

    pub fn total_spin(&self) -> f64 {
        self.n_sites as f64 / 2.0
    }

    pub fn field(&self) -> f64 {
        self.field
    }

    pub fn hamiltonian(&self) -> &DMatrix<f64> {
        &self.hamiltonian
    }

    pub fn sz(&self) -> &DMatrix<f64> {
        &self.sz
    }

    pub fn sx_diagonal(&self) -> &[f64] {
        &self.m
    }

    /// Sorted eigenvalues of `H`.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(self.hamiltonian.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        e.sort_by(f64::total_cmp);
        e
    }

    /// One-magnon frequency: the gap from the (quasi-)degenerate ground
    /// doublet to the next level, `E₂ - E₀`. Equals `(N - 1)/N` at `h = 0`.
    pub fn omega_1(&self) -> Result<f64> {
        if self.n_sites < 2 {
            return Err(Error::InvalidParameter(
                "ω₁ needs at least two spins".into(),
            ));
        }
        let e = self.spectrum();
        Ok(e[2] - e[0])
    }

    /// `exp(-i t A)` for a real symmetric `A`.
    fn expm(a: &DMatrix<f64>, t: f64) -> DMatrix<C64> {
        let eig = SymmetricEigen::new(a.clone());
        let q = eig.eigenvectors.map(|x| C64::new(x, 0.0));
        let phases = DVector::from_iterator(
            a.nrows(),
            eig.eigenvalues
                .iter()
                .map(|&l| C64::from_polar(1.0, -t * l)),
        );
        &q * DMatrix::from_diagonal(&phases) * q.adjoint()
    }

    /// `exp(-i 2φ S^z)`, the collective kick `exp(-iφ Σσ^z)`.
    pub fn kick(&self, phi: f64) -> DMatrix<C64> {
        Self::expm(&self.sz, 2.0 * phi)
    }

    /// One-period map `K U₀` with `U₀ = exp(-i H τ)`.
    pub fn floquet_matrix(&self, tau: f64, epsilon: f64) -> DMatrix<C64> {
        self.kick(kick_angle(epsilon)) * Self::expm(&self.hamiltonian, tau)
    }

    /// Per-spin magnetization `2⟨S^x⟩/N`.
    pub fn magnetization_x(&self, psi: &DVector<C64>) -> f64 {
        let sx: f64 = psi.iter().zip(&self.m).map(|(a, m)| a.norm_sqr() * m).sum();
        2.0 * sx / self.n_sites as f64
    }
}

/// `ω₁` of the sector with `N` spins and field `h`.
pub fn dicke_omega_1(n_sites: usize, field: f64) -> Result<f64> {
    DickeSector::new(n_sites, field)?.omega_1()
}

/// Exact kicked evolution from `|S, S⟩_x`; `m^x(0)` is the initial value.
pub fn lmg_exact_trajectory(
    n_sites: usize,
    field: f64,
    tau: f64,
    epsilon: f64,
    n_periods: usize,
) -> Result<Vec<f64>> {
    let sector = DickeSector::new(n_sites, field)?;
    let u = sector.floquet_matrix(tau, epsilon);
    let mut psi = DVector::from_element(sector.dim(), C64::new(0.0, 0.0));
    psi[0] = C64::new(1.0, 0.0);
    let mut series = Vec::with_capacity(n_periods);
    for n in 0..n_periods {
        if n > 0 {
            psi = &u * &psi;
        }
        series.push(sector.magnetization_x(&psi));
    }
    Ok(series)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LmgClosedForm {
    pub mx_series: Vec<f64>,
    /// `C = 2ε²π² / (1 - cos ω₁τ)`.
    pub prefactor: f64,
    /// `false` when `C` exceeds [`PERTURBATIVE_LIMIT`].
    pub within_validity: bool,
}

/// First-order result
/// `m^x_n = (-1)^n (1 - C) + (C/2)[cos n(π - ω₁τ) + cos n(π + ω₁τ)]`.
///
/// The weight moved into the one-magnon state is `(πε)² N |χ_n|²`; each
/// magnon lowers the per-spin magnetization by `2/N`, so `N` cancels in `C`.
pub fn lmg_perturbative_mx(
    epsilon: f64,
    tau: f64,
    omega_1: f64,
    n_periods: usize,
) -> Result<LmgClosedForm> {
    let denom = 1.0 - (omega_1 * tau).cos();
    if !(denom > 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "ω₁τ = {} is resonant with the drive",
            omega_1 * tau
        )));
    }
    let pi = std::f64::consts::PI;
    let prefactor = 2.0 * (epsilon * pi).powi(2) / denom;
    let within_validity = prefactor <= PERTURBATIVE_LIMIT;
    if !within_validity {
        log::warn!("closed-form prefactor {prefactor} is outside the perturbative regime");
    }
    let w = omega_1 * tau;
    let mx_series = (0..n_periods)
        .map(|n| {
            let n = n as f64;
            let sign = if (n as usize).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            sign * (1.0 - prefactor)
                + 0.5 * prefactor * ((n * (pi - w)).cos() + (n * (pi + w)).cos())
        })
        .collect();
    Ok(LmgClosedForm {
        mx_series,
        prefactor,
        within_validity,
    })
}
