//! Ising Hamiltonians `H₀ = -Σ_{i<j} J_ij σ^x_i σ^x_j - h Σ_i σ^z_i` on open chains.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::parity_of;
use crate::{C64, MAX_SITES};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Open,
}

/// Chain parameters. `range_exponent = ∞` selects nearest-neighbour coupling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub n_sites: usize,
    pub coupling: f64,
    pub field: f64,
    #[serde(with = "range_exponent_serde")]
    pub range_exponent: f64,
    #[serde(default)]
    pub boundary: Boundary,
}

impl HamiltonianSpec {
    pub fn nearest_neighbour(n_sites: usize, coupling: f64, field: f64) -> Self {
        Self {
            n_sites,
            coupling,
            field,
            range_exponent: f64::INFINITY,
            boundary: Boundary::Open,
        }
    }

    pub fn power_law(n_sites: usize, coupling: f64, field: f64, alpha: f64) -> Self {
        Self {
            range_exponent: alpha,
            ..Self::nearest_neighbour(n_sites, coupling, field)
        }
    }

    pub fn is_nearest_neighbour(&self) -> bool {
        self.range_exponent == f64::INFINITY
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites == 0 {
            return Err(Error::InvalidParameter("n_sites must be at least 1".into()));
        }
        if self.n_sites > MAX_SITES {
            return Err(Error::SizeCap {
                n_sites: self.n_sites,
                cap: MAX_SITES,
                what: "Hamiltonians",
            });
        }
        if !(self.range_exponent > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "range exponent must be > 0, got {}",
                self.range_exponent
            )));
        }
        if !self.coupling.is_finite() || !self.field.is_finite() {
            return Err(Error::InvalidParameter(
                "coupling and field must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Bond list `(i, j, J_ij)` with `i < j`.
    fn bonds(&self) -> Vec<Bond> {
        let n = self.n_sites;
        if self.is_nearest_neighbour() {
            return (0..n.saturating_sub(1))
                .map(|i| Bond {
                    i,
                    j: i + 1,
                    strength: self.coupling,
                })
                .collect();
        }
        let mut bonds = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                let distance = (j - i) as f64;
                bonds.push(Bond {
                    i,
                    j,
                    strength: self.coupling / distance.powf(self.range_exponent),
                });
            }
        }
        bonds
    }
}

/// `-strength · σ^x_i σ^x_j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bond {
    pub i: usize,
    pub j: usize,
    pub strength: f64,
}

/// Matrix-free realization of `H₀` in the `σ^z` basis.
///
/// The Ising part is stored as its diagonal in the `σ^x` product basis
/// (`x_energies`); in the `σ^z` basis it acts as pair flips. The transverse
/// part is diagonal in `σ^z`.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    spec: HamiltonianSpec,
    field: f64,
    bonds: Vec<Bond>,
    x_energies: Vec<f64>,
    z_diagonal: Vec<f64>,
}

/// Validates `spec` and builds its operator.
pub fn build_hamiltonian(spec: &HamiltonianSpec) -> Result<Hamiltonian> {
    spec.validate()?;
    Ok(Hamiltonian::from_bonds(
        spec.clone(),
        spec.n_sites,
        spec.bonds(),
        spec.field,
    ))
}

impl Hamiltonian {
    /// Arbitrary couplings `-Σ J_ij σ^x_i σ^x_j - field Σ σ^z_i`. The stored
    /// spec only records `n_sites` and `field`.
    pub fn from_couplings(n_sites: usize, bonds: Vec<Bond>, field: f64) -> Result<Self> {
        let spec = HamiltonianSpec::nearest_neighbour(n_sites, 0.0, field);
        spec.validate()?;
        if let Some(b) = bonds
            .iter()
            .find(|b| b.i >= n_sites || b.j >= n_sites || b.i == b.j)
        {
            return Err(Error::InvalidParameter(format!(
                "bond ({}, {}) invalid for {} sites",
                b.i, b.j, n_sites
            )));
        }
        Ok(Self::from_bonds(spec, n_sites, bonds, field))
    }

    fn from_bonds(spec: HamiltonianSpec, n_sites: usize, bonds: Vec<Bond>, field: f64) -> Self {
        let dim = 1usize << n_sites;
        let mut x_energies = vec![0.0; dim];
        for bond in &bonds {
            let mask = (1usize << bond.i) | (1usize << bond.j);
            for (c, e) in x_energies.iter_mut().enumerate() {
                // aligned pair -> s_i s_j = +1
                if (c & mask).count_ones().is_multiple_of(2) {
                    *e -= bond.strength;
                } else {
                    *e += bond.strength;
                }
            }
        }
        let z_diagonal = (0..dim)
            .map(|b| -field * (n_sites as f64 - 2.0 * (b as u64).count_ones() as f64))
            .collect();
        Self {
            spec,
            field,
            bonds,
            x_energies,
            z_diagonal,
        }
    }

    pub fn spec(&self) -> &HamiltonianSpec {
        &self.spec
    }

    pub fn n_sites(&self) -> usize {
        self.spec.n_sites
    }

    pub fn dim(&self) -> usize {
        self.x_energies.len()
    }

    pub fn field(&self) -> f64 {
        self.field
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    /// Ising energies in the `σ^x` product basis (bit 0 = `|→⟩`).
    pub fn x_energies(&self) -> &[f64] {
        &self.x_energies
    }

    /// Diagonal of the transverse term in the `σ^z` basis.
    pub fn z_diagonal(&self) -> &[f64] {
        &self.z_diagonal
    }

    /// Upper bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        self.bonds.iter().map(|b| b.strength.abs()).sum::<f64>()
            + self.field.abs() * self.n_sites() as f64
    }

    /// `out = H ψ` in the `σ^z` basis.
    pub fn apply(&self, input: &[C64], out: &mut [C64]) {
        debug_assert_eq!(input.len(), self.dim());
        for ((o, &d), &a) in out.iter_mut().zip(&self.z_diagonal).zip(input) {
            *o = a * d;
        }
        for bond in &self.bonds {
            let mask = (1usize << bond.i) | (1usize << bond.j);
            let s = bond.strength;
            for (b, o) in out.iter_mut().enumerate() {
                *o -= input[b ^ mask] * s;
            }
        }
    }

    /// `⟨ψ|H|ψ⟩`.
    pub fn expectation(&self, amplitudes: &[C64]) -> f64 {
        let mut tmp = vec![C64::new(0.0, 0.0); amplitudes.len()];
        self.apply(amplitudes, &mut tmp);
        amplitudes
            .iter()
            .zip(&tmp)
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }

    /// Real symmetric block of `H` restricted to the basis states `indices`
    /// (which must be closed under the pair flips, e.g. a parity sector).
    pub fn dense_block(&self, indices: &[usize]) -> DMatrix<f64> {
        let dim = self.dim();
        let mut position = vec![usize::MAX; dim];
        for (k, &b) in indices.iter().enumerate() {
            position[b] = k;
        }
        let n = indices.len();
        let mut m = DMatrix::zeros(n, n);
        for (col, &b) in indices.iter().enumerate() {
            m[(col, col)] += self.z_diagonal[b];
            for bond in &self.bonds {
                let mask = (1usize << bond.i) | (1usize << bond.j);
                let row = position[b ^ mask];
                debug_assert!(row != usize::MAX, "index set not closed under pair flips");
                m[(row, col)] -= bond.strength;
            }
        }
        m
    }

    /// Full real symmetric matrix in the `σ^z` basis.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let all: Vec<usize> = (0..self.dim()).collect();
        self.dense_block(&all)
    }
}

/// Basis states of the even (`∏σ^z = +1`) and odd parity sectors.
pub fn parity_sectors(n_sites: usize) -> [Vec<usize>; 2] {
    let dim = 1usize << n_sites;
    let even = (0..dim).filter(|&b| parity_of(b) == 1).collect();
    let odd = (0..dim).filter(|&b| parity_of(b) == -1).collect();
    [even, odd]
}

/// Serde adapter writing `α = ∞` as the string `"inf"` (JSON has no infinity).
pub mod range_exponent_serde {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &f64, serializer: S) -> Result<S::Ok, S::Error> {
        if value.is_infinite() && *value > 0.0 {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(*value)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<f64, D::Error> {
        struct RangeVisitor;
        impl Visitor<'_> for RangeVisitor {
            type Value = f64;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a positive number or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
                Ok(v)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
                match v {
                    "inf" | "infinity" | "Infinity" => Ok(f64::INFINITY),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        deserializer.deserialize_any(RangeVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;
    use rand::{Rng, SeedableRng};

    fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
        a.kronecker(b)
    }

    /// Dense `⊗` construction, site 0 as the rightmost (least significant) factor.
    fn dense_oracle(spec: &HamiltonianSpec) -> DMatrix<C64> {
        let n = spec.n_sites;
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let id = DMatrix::<C64>::identity(2, 2);
        let sx = DMatrix::from_row_slice(2, 2, &[zero, one, one, zero]);
        let sz = DMatrix::from_row_slice(2, 2, &[one, zero, zero, -one]);
        let site_op = |op: &DMatrix<C64>, site: usize| {
            let mut acc = DMatrix::<C64>::identity(1, 1);
            for k in (0..n).rev() {
                acc = kron(&acc, if k == site { op } else { &id });
            }
            acc
        };
        let dim = 1 << n;
        let mut h = DMatrix::<C64>::zeros(dim, dim);
        for i in 0..n {
            for j in i + 1..n {
                let d = (j - i) as f64;
                let jij = if spec.is_nearest_neighbour() {
                    if j == i + 1 {
                        spec.coupling
                    } else {
                        0.0
                    }
                } else {
                    spec.coupling / d.powf(spec.range_exponent)
                };
                h -= (site_op(&sx, i) * site_op(&sx, j)) * C64::new(jij, 0.0);
            }
            h -= site_op(&sz, i) * C64::new(spec.field, 0.0);
        }
        h
    }

    #[test]
    fn two_site_single_bond() {
        let h = build_hamiltonian(&HamiltonianSpec::nearest_neighbour(2, 1.0, 0.0)).unwrap();
        let e = sorted_eigenvalues(h.to_dense());
        for (got, want) in e.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn four_site_ladder_has_gap_two_j() {
        let h = build_hamiltonian(&HamiltonianSpec::nearest_neighbour(4, 1.0, 0.0)).unwrap();
        let e = sorted_eigenvalues(h.to_dense());
        assert!((e[0] + 3.0).abs() < 1e-12);
        let first_excited = e.iter().copied().find(|&x| x > -3.0 + 1e-9).unwrap();
        assert!((first_excited + 1.0).abs() < 1e-12);
    }

    #[test]
    fn domain_wall_manifolds_and_degeneracies() {
        for n in 2..=8 {
            let j = 0.7;
            let h = build_hamiltonian(&HamiltonianSpec::nearest_neighbour(n, j, 0.0)).unwrap();
            let e = sorted_eigenvalues(h.to_dense());
            for k in 0..n {
                let level = -j * (n as f64 - 1.0) + 2.0 * j * k as f64;
                let count = e.iter().filter(|&&x| (x - level).abs() < 1e-9).count();
                let binom = (0..k).fold(1usize, |acc, t| acc * (n - 1 - t) / (t + 1));
                assert_eq!(count, 2 * binom, "N={n}, k={k}");
            }
        }
    }

    #[test]
    fn power_law_matches_kronecker_oracle() {
        let spec = HamiltonianSpec::power_law(4, 1.0, 0.5, 2.0);
        let h = build_hamiltonian(&spec).unwrap();
        let dense = h.to_dense();
        let oracle = dense_oracle(&spec);
        for r in 0..16 {
            for c in 0..16 {
                assert!((oracle[(r, c)] - C64::new(dense[(r, c)], 0.0)).norm() < 1e-12);
            }
        }
        let mut oracle_re = DMatrix::<f64>::zeros(16, 16);
        for r in 0..16 {
            for c in 0..16 {
                oracle_re[(r, c)] = oracle[(r, c)].re;
            }
        }
        let a = sorted_eigenvalues(dense);
        let b = sorted_eigenvalues(oracle_re);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn nearest_neighbour_matches_kronecker_oracle_with_field() {
        let spec = HamiltonianSpec::nearest_neighbour(5, 0.8, 0.32);
        let dense = build_hamiltonian(&spec).unwrap().to_dense();
        let oracle = dense_oracle(&spec);
        let max = (0..32 * 32)
            .map(|k| (oracle[k] - C64::new(dense[k], 0.0)).norm())
            .fold(0.0, f64::max);
        assert!(max < 1e-12);
    }

    #[test]
    fn hermitian_on_random_vectors() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for trial in 0..100 {
            let n = 2 + trial % 5;
            let alpha = if trial % 2 == 0 { f64::INFINITY } else { 1.5 };
            let spec = HamiltonianSpec {
                range_exponent: alpha,
                ..HamiltonianSpec::nearest_neighbour(n, 1.0, 0.4)
            };
            let h = build_hamiltonian(&spec).unwrap();
            let dim = h.dim();
            let mut draw = || -> Vec<C64> {
                (0..dim)
                    .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                    .collect()
            };
            let (phi, psi) = (draw(), draw());
            let mut h_psi = vec![C64::new(0.0, 0.0); dim];
            let mut h_phi = vec![C64::new(0.0, 0.0); dim];
            h.apply(&psi, &mut h_psi);
            h.apply(&phi, &mut h_phi);
            let a: C64 = phi.iter().zip(&h_psi).map(|(x, y)| x.conj() * y).sum();
            let b: C64 = psi.iter().zip(&h_phi).map(|(x, y)| x.conj() * y).sum();
            assert!((a - b.conj()).norm() <= 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn x_energies_are_the_x_basis_diagonal() {
        let spec = HamiltonianSpec::power_law(5, 1.0, 0.0, 1.5);
        let h = build_hamiltonian(&spec).unwrap();
        // |R⟩ is x-basis state 0
        let r = crate::state::product_state_x(5, crate::state::Direction::Right).unwrap();
        assert!((h.expectation(r.amplitudes()) - h.x_energies()[0]).abs() < 1e-12);
        let r10 = crate::state::product_state_x(10, crate::state::Direction::Right).unwrap();
        let h10 = build_hamiltonian(&HamiltonianSpec::nearest_neighbour(10, 1.0, 0.0)).unwrap();
        assert!((h10.expectation(r10.amplitudes()) + 9.0).abs() < 1e-12);
    }

    #[test]
    fn large_alpha_converges_to_nearest_neighbour() {
        for n in [4, 6] {
            let nn = sorted_eigenvalues(
                build_hamiltonian(&HamiltonianSpec::nearest_neighbour(n, 1.0, 0.3))
                    .unwrap()
                    .to_dense(),
            );
            let lr = sorted_eigenvalues(
                build_hamiltonian(&HamiltonianSpec::power_law(n, 1.0, 0.3, 30.0))
                    .unwrap()
                    .to_dense(),
            );
            let bound = 2f64.powi(1 - 30) * (n * n) as f64;
            for (a, b) in nn.iter().zip(&lr) {
                assert!((a - b).abs() < bound);
            }
        }
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(build_hamiltonian(&HamiltonianSpec::power_law(4, 1.0, 0.0, 0.0)).is_err());
        assert!(build_hamiltonian(&HamiltonianSpec::power_law(4, 1.0, 0.0, -1.0)).is_err());
        assert!(matches!(
            build_hamiltonian(&HamiltonianSpec::nearest_neighbour(MAX_SITES + 1, 1.0, 0.0)),
            Err(Error::SizeCap { .. })
        ));
    }

    #[test]
    fn spec_serializes_infinite_range_as_string() {
        let spec = HamiltonianSpec::nearest_neighbour(4, 1.0, 0.0);
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"inf\""));
        let back: HamiltonianSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        let lr: HamiltonianSpec =
            serde_json::from_str(r#"{"n_sites":4,"coupling":1,"field":0,"range_exponent":1.5}"#)
                .unwrap();
        assert_eq!(lr.range_exponent, 1.5);
    }
}
