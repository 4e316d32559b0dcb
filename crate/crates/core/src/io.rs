//! Plain-text table renderers shared by the command-line tool.
//!
//! Every table is comma-separated with one header row. Floats use
//! [`float`], which round-trips `f64` exactly.

use std::fmt::Write;

use crate::floquet::{FloquetEigensystem, PairingPoint, PairingSlope};
use crate::spectral::{PhaseMap, ScalingFit, Spectrum, SplittingPoint};

/// Scientific notation with 17 significant digits.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

/// Columns `n,mx`.
pub fn series_csv(series: &[f64]) -> String {
    let mut out = String::from("n,mx\n");
    for (n, m) in series.iter().enumerate() {
        writeln!(out, "{n},{}", float(*m)).unwrap();
    }
    out
}

/// Columns `omega_tau,amplitude`.
pub fn spectrum_csv(spectrum: &Spectrum) -> String {
    let mut out = String::from("omega_tau,amplitude\n");
    for (w, a) in spectrum.omega_tau.iter().zip(&spectrum.amplitude) {
        writeln!(out, "{},{}", float(*w), float(*a)).unwrap();
    }
    out
}

/// Long format, one line per (grid value, frequency bin):
/// `param,omega_tau,amplitude_raw,amplitude_maxnorm`, where the last column
/// is divided by the largest amplitude in the whole map. Failed points are
/// omitted.
pub fn phase_map_csv(map: &PhaseMap) -> String {
    let mut out = String::from("param,omega_tau,amplitude_raw,amplitude_maxnorm\n");
    for (i, row) in map.rows.iter().enumerate() {
        let (Some(s), Some(norm)) = (&row.spectrum, map.normalized(i)) else {
            continue;
        };
        for ((w, a), an) in s.omega_tau.iter().zip(&s.amplitude).zip(norm) {
            writeln!(
                out,
                "{},{},{},{}",
                float(row.value),
                float(*w),
                float(*a),
                float(an)
            )
            .unwrap();
        }
    }
    out
}

/// Columns `param,kld`; failed points are omitted.
pub fn kld_csv(map: &PhaseMap) -> String {
    let mut out = String::from("param,kld\n");
    for row in &map.rows {
        if let Some(k) = row.kld {
            writeln!(out, "{},{}", float(row.value), float(k)).unwrap();
        }
    }
    out
}

/// Columns `epsilon,N,mean_log_delta_0,mean_log_delta_pi`.
pub fn pairing_csv(points: &[PairingPoint]) -> String {
    let mut out = String::from("epsilon,N,mean_log_delta_0,mean_log_delta_pi\n");
    for p in points {
        writeln!(
            out,
            "{},{},{},{}",
            float(p.epsilon),
            p.n_sites,
            float(p.mean_log_delta_0),
            float(p.mean_log_delta_pi)
        )
        .unwrap();
    }
    out
}

/// Columns `epsilon,slope_b0,slope_bpi`; `slope_bpi` is empty when `Δ_π`
/// is pinned at the floor for every size.
pub fn pairing_slopes_csv(slopes: &[PairingSlope]) -> String {
    let mut out = String::from("epsilon,slope_b0,slope_bpi\n");
    for s in slopes {
        writeln!(
            out,
            "{},{},{}",
            float(s.epsilon),
            float(s.slope_b0()),
            opt_float(s.slope_bpi())
        )
        .unwrap();
    }
    out
}

/// Columns `alpha,mu,parity`.
pub fn quasi_energies_csv(es: &FloquetEigensystem) -> String {
    let mut out = String::from("alpha,mu,parity\n");
    for (a, (mu, p)) in es.quasi_energies.iter().zip(&es.parities).enumerate() {
        writeln!(out, "{a},{},{p}", float(*mu)).unwrap();
    }
    out
}

/// Columns `n_sites,epsilon,delta_omega`.
pub fn splitting_csv(points: &[SplittingPoint]) -> String {
    let mut out = String::from("n_sites,epsilon,delta_omega\n");
    for p in points {
        writeln!(
            out,
            "{},{},{}",
            p.n_sites,
            float(p.epsilon),
            float(p.delta_omega)
        )
        .unwrap();
    }
    out
}

/// Columns `n_sites,a,b,r_squared`, one line per size.
pub fn scaling_csv(fit: &ScalingFit) -> String {
    let mut out = String::from("n_sites,a,b,r_squared\n");
    for s in &fit.per_size {
        writeln!(
            out,
            "{},{},{},{}",
            s.n_sites,
            float(s.fit.slope),
            float(s.fit.intercept),
            float(s.fit.r_squared)
        )
        .unwrap();
    }
    out
}
