//! One pipeline per subcommand. Each writes its files and returns a summary
//! object that ends up in `meta.json`.

use dtc_core::floquet::GAP_FLOOR;
use dtc_core::io;
use dtc_core::spectral::MIN_SERIES_LEN;
use dtc_core::{
    build_hamiltonian, dicke_omega_1, fit_splitting_scaling, fourier_spectrum, kld,
    lmg_exact_trajectory, lmg_perturbative_mx, main_peak_splitting, pairing_point,
    pairing_size_scaling, reference_spectrum, run_noisy_ensemble, run_trajectory, scan_phase_map,
    simulate, DriveSpec, HamiltonianSpec, Propagator, ScanSpec, SplittingPoint,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Command, ExperimentConfig};
use crate::error::CliError;
use crate::output::OutputDir;

pub fn execute(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    match cfg.command {
        Command::Run => run(cfg, out),
        Command::Scan => scan(cfg, out),
        Command::Floquet => floquet(cfg, out),
        Command::Lmg => lmg(cfg, out),
        Command::Fit => fit(cfg, out),
    }
}

/// Spectrum file plus the diagnostics that need a long enough series.
fn spectrum_summary(series: &[f64], fold: bool, out: &mut OutputDir) -> Result<Value, CliError> {
    if series.len() < MIN_SERIES_LEN {
        log::warn!(
            "{} samples is too short for a spectrum; skipping spectrum.csv",
            series.len()
        );
        return Ok(Value::Null);
    }
    let spectrum = fourier_spectrum(series, fold)?;
    out.csv("spectrum.csv", &io::spectrum_csv(&spectrum))?;
    let reference = reference_spectrum(series.len(), fold)?;
    let main_peak = match main_peak_splitting(&spectrum) {
        Ok(p) => {
            json!({ "delta_omega": p.delta_omega, "omega_f": p.omega_f, "amplitude": p.amplitude })
        }
        Err(e) => json!({ "error": e.to_string() }),
    };
    Ok(json!({
        "kld": kld(&spectrum, &reference)?,
        "resolution": spectrum.resolution(),
        "main_peak": main_peak,
    }))
}

fn run(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let hamiltonian = build_hamiltonian(&cfg.hamiltonian())?;
    let prop = Propagator::new(&hamiltonian, cfg.method)?;
    let drive = cfg.drive();
    let traj = if drive.is_noisy() {
        run_noisy_ensemble(&prop, &drive, cfg.initial_state, cfg.realizations)?.mean
    } else {
        run_trajectory(&prop, &drive, cfg.initial_state)?
    };
    out.csv("mx.csv", &io::series_csv(&traj.mx_series))?;
    let spectrum = spectrum_summary(&traj.mx_series, cfg.fold, out)?;
    Ok(json!({
        "norm_drift": traj.norm_drift,
        "realizations": if drive.is_noisy() { cfg.realizations } else { 1 },
        "spectrum": spectrum,
    }))
}

fn scan(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let spec = ScanSpec {
        parameter: cfg.scan.parameter,
        values: cfg.scan.values(),
        hamiltonian: cfg.hamiltonian(),
        drive: cfg.drive(),
        initial_state: cfg.initial_state,
        method: cfg.method,
        fold: cfg.fold,
    };
    let map = scan_phase_map(&spec)?;
    out.csv("phase_map.csv", &io::phase_map_csv(&map))?;
    out.csv("kld.csv", &io::kld_csv(&map))?;
    let failed: Vec<Value> = map
        .rows
        .iter()
        .filter_map(|r| {
            r.error
                .as_ref()
                .map(|e| json!({ "param": r.value, "error": e }))
        })
        .collect();
    if !failed.is_empty() {
        log::warn!("{} of {} scan points failed", failed.len(), map.rows.len());
    }
    Ok(json!({
        "points": map.rows.len(),
        "max_amplitude": map.max_amplitude,
        "failed_points": failed,
    }))
}

fn floquet(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let template = cfg.hamiltonian();
    let drive = cfg.drive();
    let (es, gaps) = pairing_point(&template, &drive, cfg.n_sites)?;
    out.csv("quasi_energies.csv", &io::quasi_energies_csv(&es))?;
    let scaling = pairing_size_scaling(&template, &drive, &cfg.sizes, &cfg.epsilons)?;
    out.csv("pairing.csv", &io::pairing_csv(&scaling.points))?;
    out.csv(
        "pairing_slopes.csv",
        &io::pairing_slopes_csv(&scaling.slopes),
    )?;
    let slopes: Vec<Value> = scaling
        .slopes
        .iter()
        .map(|s| {
            json!({
                "epsilon": s.epsilon,
                "slope_b0": s.slope_b0(),
                "slope_bpi": s.slope_bpi(),
                "pi_pairing_favourable": s.dtc_compatible,
            })
        })
        .collect();
    Ok(json!({
        "gap_floor": GAP_FLOOR,
        "log": "natural",
        "mean_log_delta_0": gaps.mean_log_delta_0,
        "mean_log_delta_pi": gaps.mean_log_delta_pi,
        "slopes": slopes,
    }))
}

fn lmg(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let (n, tau, m) = (cfg.n_sites, cfg.period_tau, cfg.n_periods);
    let exact = lmg_exact_trajectory(n, cfg.field, tau, cfg.epsilon, m)?;
    let omega_1 = dicke_omega_1(n, cfg.field)?;
    let closed = lmg_perturbative_mx(cfg.epsilon, tau, omega_1, m)?;
    if !closed.within_validity {
        log::warn!(
            "closed-form prefactor C = {} is outside the perturbative regime",
            closed.prefactor
        );
    }
    out.csv("mx.csv", &io::series_csv(&exact))?;
    out.csv("mx_closed_form.csv", &io::series_csv(&closed.mx_series))?;
    let spectrum = spectrum_summary(&exact, cfg.fold, out)?;
    let max_deviation = exact
        .iter()
        .zip(&closed.mx_series)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(json!({
        "omega_1": omega_1,
        "prefactor": closed.prefactor,
        "within_validity": closed.within_validity,
        "max_deviation": max_deviation,
        "spectrum": spectrum,
    }))
}

fn fit(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let grid: Vec<(usize, f64)> = cfg
        .sizes
        .iter()
        .flat_map(|&n| cfg.epsilons.iter().map(move |&e| (n, e)))
        .collect();
    let points = grid
        .par_iter()
        .map(|&(n_sites, epsilon)| {
            let spec = HamiltonianSpec {
                n_sites,
                ..cfg.hamiltonian()
            };
            let drive = DriveSpec {
                epsilon,
                ..cfg.drive()
            };
            let traj = simulate(&spec, &drive, cfg.initial_state, cfg.method)?;
            let p = main_peak_splitting(&fourier_spectrum(&traj.mx_series, true)?)?;
            Ok(SplittingPoint {
                n_sites,
                epsilon,
                delta_omega: p.delta_omega,
            })
        })
        .collect::<dtc_core::Result<Vec<_>>>()?;
    out.csv("splitting.csv", &io::splitting_csv(&points))?;
    let resolution = 2.0 * std::f64::consts::PI / cfg.n_periods as f64;
    let fit = fit_splitting_scaling(&points, resolution)?;
    out.csv("scaling.csv", &io::scaling_csv(&fit))?;
    let per_size: Vec<Value> = fit
        .per_size
        .iter()
        .map(|s| {
            json!({
                "n_sites": s.n_sites,
                "a": s.fit.slope,
                "b": s.fit.intercept,
                "r_squared": s.fit.r_squared,
                "n_points": s.fit.n_points,
            })
        })
        .collect();
    let summary = json!({
        "m_a": fit.m_a,
        "m_b": fit.m_b,
        "epsilon_star": fit.epsilon_star,
        "fit_a": fit.fit_a,
        "fit_b": fit.fit_b,
        "per_size": per_size,
        "excluded": fit.excluded,
        "resolution": resolution,
    });
    out.json("fit.json", summary.clone())?;
    Ok(summary)
}
