//! Lanczos routines for the Hermitian `H₀`: the action of `exp(-iHt)` on a
//! vector and the lowest eigenpair within the span of a start vector.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::C64;

/// First Krylov dimension tried; doubled until the error estimate is met.
pub const INITIAL_DIM: usize = 12;
pub const DEFAULT_MAX_DIM: usize = 192;

/// Orthonormal Lanczos basis with tridiagonal coefficients.
struct Lanczos<'h> {
    hamiltonian: &'h Hamiltonian,
    basis: Vec<Vec<C64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    /// Residual vector `H v_last - ...` after the last completed step.
    residual: Vec<C64>,
    exhausted: bool,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

impl<'h> Lanczos<'h> {
    /// `start` must be nonzero; it is normalized internally.
    fn new(hamiltonian: &'h Hamiltonian, start: &[C64]) -> Self {
        let n0 = norm(start);
        let v0: Vec<C64> = start.iter().map(|a| a / n0).collect();
        Self {
            hamiltonian,
            basis: vec![v0],
            alpha: Vec::new(),
            beta: Vec::new(),
            residual: Vec::new(),
            exhausted: false,
        }
    }

    fn len(&self) -> usize {
        self.alpha.len()
    }

    /// Extends the decomposition to `target` steps (or until an invariant
    /// subspace is found).
    fn extend_to(&mut self, target: usize) {
        let dim = self.hamiltonian.dim();
        while self.len() < target && !self.exhausted {
            let k = self.len();
            if k > 0 {
                let b = self.beta[k - 1];
                let next: Vec<C64> = self.residual.iter().map(|r| r / b).collect();
                self.basis.push(next);
            }
            let mut w = vec![C64::new(0.0, 0.0); dim];
            self.hamiltonian.apply(&self.basis[k], &mut w);
            let a = dot(&self.basis[k], &w).re;
            // full re-orthogonalization, two passes
            for _ in 0..2 {
                for v in &self.basis {
                    let c = dot(v, &w);
                    w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= vi * c);
                }
            }
            let b = norm(&w);
            self.alpha.push(a);
            self.beta.push(b);
            self.residual = w;
            if b <= 1e-13 * (a.abs() + 1.0) || self.len() >= dim {
                self.exhausted = true;
            }
        }
    }

    fn tridiagonal(&self, m: usize) -> DMatrix<f64> {
        let mut t = DMatrix::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = self.alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = self.beta[i];
                t[(i + 1, i)] = self.beta[i];
            }
        }
        t
    }

    fn combine(&self, coeffs: &[C64], scale: f64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.hamiltonian.dim()];
        for (v, &c) in self.basis.iter().zip(coeffs) {
            let c = c * scale;
            out.iter_mut().zip(v).for_each(|(o, vi)| *o += vi * c);
        }
        out
    }
}

/// `exp(-i H t) ψ` with an adaptive Krylov dimension.
///
/// The a-posteriori estimate `‖ψ‖ β_m |[exp(-itT_m)]_{m,1}|` must fall below
/// `tolerance` before `max_dim` is exceeded, otherwise the call fails.
pub fn expm_apply(
    hamiltonian: &Hamiltonian,
    psi: &[C64],
    t: f64,
    tolerance: f64,
    max_dim: usize,
) -> Result<Vec<C64>> {
    let psi_norm = norm(psi);
    if psi_norm == 0.0 || t == 0.0 {
        return Ok(psi.to_vec());
    }
    let mut lanczos = Lanczos::new(hamiltonian, psi);
    let mut m = INITIAL_DIM.min(max_dim);
    loop {
        lanczos.extend_to(m);
        let k = lanczos.len();
        let eig = SymmetricEigen::new(lanczos.tridiagonal(k));
        // y = Q exp(-i t Λ) Qᵀ e_1
        let coeffs: Vec<C64> = (0..k)
            .map(|row| {
                (0..k)
                    .map(|j| {
                        let q = eig.eigenvectors[(row, j)] * eig.eigenvectors[(0, j)];
                        C64::from_polar(q, -t * eig.eigenvalues[j])
                    })
                    .sum()
            })
            .collect();
        let estimate = if lanczos.exhausted {
            0.0
        } else {
            psi_norm * lanczos.beta[k - 1] * coeffs[k - 1].norm()
        };
        if estimate <= tolerance {
            return Ok(lanczos.combine(&coeffs, psi_norm));
        }
        if k >= max_dim {
            return Err(Error::KrylovNotConverged {
                tolerance,
                estimate,
                dim: k,
            });
        }
        m = (2 * m).min(max_dim);
    }
}

/// Lowest eigenpair of `H` within the invariant subspace generated by
/// `start`. Converged when the Ritz residual `‖Hv - λv‖` is below `tolerance`.
pub fn lowest_eigenpair(
    hamiltonian: &Hamiltonian,
    start: &[C64],
    tolerance: f64,
    max_dim: usize,
) -> Result<(f64, Vec<C64>)> {
    if norm(start) == 0.0 {
        return Err(Error::InvalidParameter("zero start vector".into()));
    }
    let mut lanczos = Lanczos::new(hamiltonian, start);
    let mut m = 16;
    loop {
        lanczos.extend_to(m.min(max_dim));
        let k = lanczos.len();
        let eig = SymmetricEigen::new(lanczos.tridiagonal(k));
        let (idx, &lambda) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty Krylov space");
        let y: Vec<C64> = (0..k)
            .map(|r| C64::new(eig.eigenvectors[(r, idx)], 0.0))
            .collect();
        let residual = if lanczos.exhausted {
            0.0
        } else {
            lanczos.beta[k - 1] * y[k - 1].norm()
        };
        if residual <= tolerance {
            let mut v = lanczos.combine(&y, 1.0);
            let n = norm(&v);
            v.iter_mut().for_each(|a| *a /= n);
            return Ok((lambda, v));
        }
        if k >= max_dim {
            return Err(Error::EigenNotConverged(format!(
                "Lanczos residual {residual:e} after {k} steps"
            )));
        }
        m *= 2;
    }
}
