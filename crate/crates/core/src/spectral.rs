//! Normalized Fourier spectra of stroboscopic series and the diagnostics
//! built on them: main-peak splitting, KL divergence against a perfect
//! period-2 signal, one-parameter phase-map scans and splitting-scaling fits.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::drive::DriveSpec;
use crate::dynamics::{simulate, InitialState};
use crate::error::{Error, Result};
use crate::fit::{ols, LinearFit};
use crate::hamiltonian::HamiltonianSpec;
use crate::propagator::Method;
use crate::C64;

pub const MIN_SERIES_LEN: usize = 16;

/// Additive floor applied to the raw reference magnitudes before
/// normalization.
pub const REFERENCE_FLOOR: f64 = 1e-9;

/// A peak counts as prominent when it exceeds this multiple of the median
/// amplitude in the search window.
pub const PROMINENCE_RATIO: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// `ω_k τ`; `[-π, π)` when folded, `[0, 2π)` otherwise.
    pub omega_tau: Vec<f64>,
    /// Sums to 1.
    pub amplitude: Vec<f64>,
    pub folded: bool,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.amplitude.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitude.is_empty()
    }

    /// Bin spacing `2π/M`.
    pub fn resolution(&self) -> f64 {
        2.0 * PI / self.len() as f64
    }

    /// Index of the bin closest to `omega_tau` (taken modulo `2π`).
    pub fn bin_of(&self, omega_tau: f64) -> usize {
        let m = self.len() as f64;
        let k = (omega_tau.rem_euclid(2.0 * PI) / self.resolution()).round() as usize % self.len();
        if self.folded {
            let start = (m / 2.0).ceil() as usize;
            (k + self.len() - start) % self.len()
        } else {
            k
        }
    }

    /// Amplitude at `ω τ` (nearest bin).
    pub fn amplitude_at(&self, omega_tau: f64) -> f64 {
        self.amplitude[self.bin_of(omega_tau)]
    }

    /// Bin indices of strict local maxima (cyclic) above `threshold`.
    pub fn peaks(&self, threshold: f64) -> Vec<usize> {
        let m = self.len();
        (0..m)
            .filter(|&k| {
                let a = self.amplitude[k];
                a > threshold
                    && a > self.amplitude[(k + m - 1) % m]
                    && a >= self.amplitude[(k + 1) % m]
            })
            .collect()
    }
}

fn folded_index_order(m: usize) -> impl Iterator<Item = usize> {
    let start = m.div_ceil(2);
    (start..m).chain(0..start)
}

fn spectrum_from_magnitudes(magnitudes: Vec<f64>, fold: bool) -> Spectrum {
    let m = magnitudes.len();
    let total: f64 = magnitudes.iter().sum();
    let step = 2.0 * PI / m as f64;
    let order: Vec<usize> = if fold {
        folded_index_order(m).collect()
    } else {
        (0..m).collect()
    };
    let omega_tau = order
        .iter()
        .map(|&k| {
            let w = step * k as f64;
            if fold && k >= m.div_ceil(2) {
                w - 2.0 * PI
            } else {
                w
            }
        })
        .collect();
    let amplitude = order.iter().map(|&k| magnitudes[k] / total).collect();
    Spectrum {
        omega_tau,
        amplitude,
        folded: fold,
    }
}

fn dft_magnitudes(series: &[f64]) -> Vec<f64> {
    let mut buf: Vec<C64> = series.iter().map(|&x| C64::new(x, 0.0)).collect();
    FftPlanner::new()
        .plan_fft_forward(buf.len())
        .process(&mut buf);
    buf.iter().map(|z| z.norm()).collect()
}

/// `A_k = |X_k| / Σ|X|` of the DFT `X` of `series`. An all-zero series is
/// mapped to a delta at `ω = 0`.
pub fn fourier_spectrum(series: &[f64], fold: bool) -> Result<Spectrum> {
    if series.len() < MIN_SERIES_LEN {
        return Err(Error::InsufficientData(format!(
            "spectrum needs at least {MIN_SERIES_LEN} samples, got {}",
            series.len()
        )));
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(
            "series contains non-finite values".into(),
        ));
    }
    let mut magnitudes = dft_magnitudes(series);
    if magnitudes.iter().sum::<f64>() == 0.0 {
        magnitudes[0] = 1.0;
    }
    Ok(spectrum_from_magnitudes(magnitudes, fold))
}

/// Spectrum of `cos(π n)`, `n = 0..m`, with [`REFERENCE_FLOOR`] added to every
/// raw magnitude before normalization.
pub fn reference_spectrum(m: usize, fold: bool) -> Result<Spectrum> {
    if m < MIN_SERIES_LEN {
        return Err(Error::InsufficientData(format!(
            "reference needs at least {MIN_SERIES_LEN} samples, got {m}"
        )));
    }
    let series: Vec<f64> = (0..m)
        .map(|n| if n % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    let magnitudes = dft_magnitudes(&series)
        .into_iter()
        .map(|a| a + REFERENCE_FLOOR)
        .collect();
    Ok(spectrum_from_magnitudes(magnitudes, fold))
}

/// `Σ_ω A_ω ln(A_ω / A_ω^ref)` over bins with `A_ω > 0`.
pub fn kld(spectrum: &Spectrum, reference: &Spectrum) -> Result<f64> {
    if spectrum.len() != reference.len() || spectrum.folded != reference.folded {
        return Err(Error::GridMismatch);
    }
    let mut total = 0.0;
    for (&a, &r) in spectrum.amplitude.iter().zip(&reference.amplitude) {
        if a > 0.0 {
            if r <= 0.0 {
                return Err(Error::InvalidParameter(
                    "reference has an empty bin where the spectrum does not".into(),
                ));
            }
            total += a * (a / r).ln();
        }
    }
    // a nonnegative quantity; rounding can leave a tiny negative residue
    Ok(total.max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakSplitting {
    /// `|ω_f τ - π|` folded into `[0, π/2)`.
    pub delta_omega: f64,
    /// `ω_f τ` of the strongest bin with `|ωτ| > π/2` (folded convention).
    pub omega_f: f64,
    pub amplitude: f64,
}

fn fold_angle(w: f64) -> f64 {
    let x = (w + PI).rem_euclid(2.0 * PI) - PI;
    if x >= PI {
        x - 2.0 * PI
    } else {
        x
    }
}

/// Strongest bin in the window `|ωτ| > π/2` and its distance from `π`.
pub fn main_peak_splitting(spectrum: &Spectrum) -> Result<PeakSplitting> {
    let window: Vec<(f64, f64)> = spectrum
        .omega_tau
        .iter()
        .zip(&spectrum.amplitude)
        .map(|(&w, &a)| (fold_angle(w), a))
        .filter(|(w, _)| w.abs() > PI / 2.0)
        .collect();
    if window.is_empty() {
        return Err(Error::InsufficientData("empty search window".into()));
    }
    let (omega_f, max) = window
        .iter()
        .copied()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty window");
    let mut amps: Vec<f64> = window.iter().map(|p| p.1).collect();
    amps.sort_by(f64::total_cmp);
    let median = amps[amps.len() / 2];
    if !(max > PROMINENCE_RATIO * median) {
        return Err(Error::NoProminentPeak { max, median });
    }
    Ok(PeakSplitting {
        delta_omega: PI - omega_f.abs(),
        omega_f,
        amplitude: max,
    })
}

/// Parameter values where `values` crosses `threshold`, linearly
/// interpolated between neighbouring grid points.
pub fn threshold_crossings(params: &[f64], values: &[f64], threshold: f64) -> Vec<f64> {
    params
        .windows(2)
        .zip(values.windows(2))
        .filter_map(|(p, v)| {
            let (a, b) = (v[0] - threshold, v[1] - threshold);
            if a == 0.0 {
                Some(p[0])
            } else if a * b < 0.0 {
                Some(p[0] + (p[1] - p[0]) * a / (a - b))
            } else {
                None
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplittingPoint {
    pub n_sites: usize,
    pub epsilon: f64,
    pub delta_omega: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeFit {
    pub n_sites: usize,
    /// `ln δω = b + a ln ε`: `slope` is `a(N)`, `intercept` is `b(N)`.
    pub fit: LinearFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub per_size: Vec<SizeFit>,
    /// `a(N)` against `N`; the slope is `m_a`.
    pub fit_a: LinearFit,
    /// `b(N)` against `N`; the slope is `m_b`.
    pub fit_b: LinearFit,
    pub m_a: f64,
    pub m_b: f64,
    pub epsilon_star: f64,
    /// Points dropped because `δω` did not exceed the resolution.
    pub excluded: Vec<SplittingPoint>,
}

/// Fits `ln δω = b(N) + a(N) ln ε` for every `N`, then `a` and `b` linearly
/// in `N`; `ε* = exp(-m_b/m_a)`.
///
/// Points with `δω ≤ resolution` are excluded (and logged). Sizes left with
/// fewer than three points are dropped; at least three sizes must remain.
pub fn fit_splitting_scaling(points: &[SplittingPoint], resolution: f64) -> Result<ScalingFit> {
    let mut by_size: BTreeMap<usize, Vec<SplittingPoint>> = BTreeMap::new();
    let mut excluded = Vec::new();
    for p in points {
        if p.delta_omega > resolution && p.epsilon > 0.0 {
            by_size.entry(p.n_sites).or_default().push(*p);
        } else {
            log::warn!(
                "excluding N = {}, ε = {}: δω = {:e} is at or below the resolution {:e}",
                p.n_sites,
                p.epsilon,
                p.delta_omega,
                resolution
            );
            excluded.push(*p);
        }
    }
    let mut per_size = Vec::new();
    for (n_sites, pts) in by_size {
        if pts.len() < 3 {
            log::warn!("dropping N = {n_sites}: only {} resolved points", pts.len());
            excluded.extend(pts);
            continue;
        }
        let x: Vec<f64> = pts.iter().map(|p| p.epsilon.ln()).collect();
        let y: Vec<f64> = pts.iter().map(|p| p.delta_omega.ln()).collect();
        per_size.push(SizeFit {
            n_sites,
            fit: ols(&x, &y)?,
        });
    }
    if per_size.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 sizes with 3 resolved points each, have {}",
            per_size.len()
        )));
    }
    let sizes: Vec<f64> = per_size.iter().map(|s| s.n_sites as f64).collect();
    let a: Vec<f64> = per_size.iter().map(|s| s.fit.slope).collect();
    let b: Vec<f64> = per_size.iter().map(|s| s.fit.intercept).collect();
    let fit_a = ols(&sizes, &a)?;
    let fit_b = ols(&sizes, &b)?;
    let (m_a, m_b) = (fit_a.slope, fit_b.slope);
    Ok(ScalingFit {
        per_size,
        fit_a,
        fit_b,
        m_a,
        m_b,
        epsilon_star: (-m_b / m_a).exp(),
        excluded,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanParameter {
    Epsilon,
    /// `Jτ` at fixed `τ` and fixed `h/J` (only `Jτ` and `hτ` enter the
    /// Floquet map, so this is equivalent to varying `τ`).
    JTau,
    HOverJ,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanSpec {
    pub parameter: ScanParameter,
    pub values: Vec<f64>,
    pub hamiltonian: HamiltonianSpec,
    pub drive: DriveSpec,
    pub initial_state: InitialState,
    #[serde(default)]
    pub method: Method,
    #[serde(default = "default_fold")]
    pub fold: bool,
}

fn default_fold() -> bool {
    true
}

impl ScanSpec {
    /// The Hamiltonian and drive at one grid value.
    pub fn point(&self, value: f64) -> (HamiltonianSpec, DriveSpec) {
        let mut h = self.hamiltonian.clone();
        let mut d = self.drive.clone();
        match self.parameter {
            ScanParameter::Epsilon => d.epsilon = value,
            ScanParameter::JTau => {
                let ratio = h.field / h.coupling;
                h.coupling = value / d.period_tau;
                h.field = ratio * h.coupling;
            }
            ScanParameter::HOverJ => h.field = value * h.coupling,
        }
        (h, d)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanRow {
    pub value: f64,
    /// `None` when the point failed; see `error`.
    pub spectrum: Option<Spectrum>,
    pub kld: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhaseMap {
    pub parameter: ScanParameter,
    pub rows: Vec<ScanRow>,
    /// Largest amplitude over all successful rows, used for the normalized
    /// view.
    pub max_amplitude: f64,
}

impl PhaseMap {
    /// Amplitudes of row `i` divided by the map-wide maximum.
    pub fn normalized(&self, i: usize) -> Option<Vec<f64>> {
        let s = self.rows[i].spectrum.as_ref()?;
        Some(s.amplitude.iter().map(|a| a / self.max_amplitude).collect())
    }

    /// `(value, kld)` for successful rows.
    pub fn kld_curve(&self) -> (Vec<f64>, Vec<f64>) {
        self.rows
            .iter()
            .filter_map(|r| r.kld.map(|k| (r.value, k)))
            .unzip()
    }
}

fn scan_point(spec: &ScanSpec, value: f64, reference: &Spectrum) -> Result<(Spectrum, f64)> {
    let (h, d) = spec.point(value);
    let traj = simulate(&h, &d, spec.initial_state, spec.method)?;
    let spectrum = fourier_spectrum(&traj.mx_series, spec.fold)?;
    let k = kld(&spectrum, reference)?;
    Ok((spectrum, k))
}

/// Runs one trajectory per grid value (in parallel) and returns rows in grid
/// order. A failing point is recorded in its row.
pub fn scan_phase_map(spec: &ScanSpec) -> Result<PhaseMap> {
    if spec.values.len() < 2 {
        return Err(Error::InsufficientData(
            "a scan needs at least 2 grid points".into(),
        ));
    }
    let reference = reference_spectrum(spec.drive.n_periods, spec.fold)?;
    let rows: Vec<ScanRow> = spec
        .values
        .par_iter()
        .map(|&value| match scan_point(spec, value, &reference) {
            Ok((spectrum, k)) => ScanRow {
                value,
                spectrum: Some(spectrum),
                kld: Some(k),
                error: None,
            },
            Err(e) => {
                log::warn!("scan point {value} failed: {e}");
                ScanRow {
                    value,
                    spectrum: None,
                    kld: None,
                    error: Some(e.to_string()),
                }
            }
        })
        .collect();
    let max_amplitude = rows
        .iter()
        .filter_map(|r| r.spectrum.as_ref())
        .flat_map(|s| s.amplitude.iter().copied())
        .fold(0.0, f64::max);
    Ok(PhaseMap {
        parameter: spec.parameter,
        rows,
        max_amplitude,
    })
}
