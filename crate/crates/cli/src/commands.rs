//! Subcommand pipelines: chain construction, evolution, geometry and bounds
//! reports, and model-family tables.

use serde_json::json;

use ksphere_core::bounds::BoundsReport;
use ksphere_core::dynamics::{evolve_ode, evolve_spectral, AmplitudeTrajectory};
use ksphere_core::error::{Error, Result};
use ksphere_core::export;
use ksphere_core::geometry::{hall_check, GeometryReport, DEFAULT_EPS_OCCUPATION};
use ksphere_core::lanczos::{build_chain, LanczosChain};
use ksphere_core::models::ModelSpec;
use ksphere_core::operator_space::Liouvillian;

use crate::config::{LoadedConfig, RunConfig};
use crate::output::OutputDir;

/// Above this chain length the spectral cross-check is skipped: the dense
/// eigendecomposition cost grows cubically while the integrator path stays
/// linear per step.
const SPECTRAL_LIMIT: usize = 1024;

/// Builds the chain for whichever input the config carries.
pub fn resolve_chain(config: &RunConfig) -> Result<LanczosChain> {
    if let Some(system) = config.dense_system()? {
        let l = Liouvillian::new(system.hamiltonian);
        let d = l.dim();
        return build_chain(&l, &system.seed, config.tolerances.term_tol(), d * d);
    }
    if let Some(model) = config.model() {
        let horizon = config.time_grid.t_max();
        let truncated = model.truncated_chain(config.tolerances.tail_tol(), horizon)?;
        return Ok(truncated.chain);
    }
    Err(Error::InvalidInput(
        "config needs an input (hamiltonian, hamiltonian_path, or model)".into(),
    ))
}

pub fn cmd_lanczos(loaded: &LoadedConfig, out: &OutputDir, include_basis: bool) -> Result<()> {
    let chain = resolve_chain(&loaded.config)?;
    let path = out.write_json("chain.json", export::chain_json(&chain, include_basis))?;
    eprintln!(
        "chain: D = {}, stationary = {} -> {}",
        chain.dim_krylov(),
        chain.is_stationary(),
        path.display()
    );
    Ok(())
}

/// Evolves with the integrator, cross-checks against the spectral route when
/// the chain is small enough, and emits the trajectory plus diagnostics.
pub fn evolve_with_diagnostics(
    config: &RunConfig,
    chain: &LanczosChain,
    times: &[f64],
) -> Result<(AmplitudeTrajectory, serde_json::Value)> {
    if chain.is_stationary() {
        return Err(Error::Undefined(
            "stationary operator: the seed commutes with the Hamiltonian".into(),
        ));
    }
    let traj = evolve_ode(
        chain,
        times,
        config.tolerances.rtol(),
        config.tolerances.atol(),
    )?;
    let method_agreement = if chain.dim_krylov() <= SPECTRAL_LIMIT {
        let reference = evolve_spectral(chain, times)?;
        let mut max = 0.0_f64;
        for (a, b) in traj.phi().iter().zip(reference.phi()) {
            max = max.max((a - b).abs().max());
        }
        Some(max)
    } else {
        None
    };
    let mut diagnostics = export::trajectory_diagnostics(&traj, chain);
    diagnostics["method_agreement_max"] = json!(method_agreement);
    Ok((traj, diagnostics))
}

pub fn cmd_evolve(loaded: &LoadedConfig, out: &OutputDir) -> Result<()> {
    let chain = resolve_chain(&loaded.config)?;
    let times = loaded.config.time_grid.realize()?;
    let (traj, diagnostics) = evolve_with_diagnostics(&loaded.config, &chain, &times)?;
    let mut w = out.csv_writer("trajectory.csv")?;
    export::trajectory_csv(&traj, &mut w)
        .map_err(|e| Error::Numerical(format!("csv write failed: {e}")))?;
    out.write_json("evolve_diagnostics.json", diagnostics)?;
    eprintln!(
        "trajectory: {} samples x {} levels -> {}",
        traj.len(),
        traj.dim(),
        out.path("trajectory.csv").display()
    );
    Ok(())
}

/// Uses the spectral route for report-quality trajectories when possible.
fn report_trajectory(
    config: &RunConfig,
    chain: &LanczosChain,
    times: &[f64],
) -> Result<AmplitudeTrajectory> {
    if chain.is_stationary() {
        return Err(Error::Undefined(
            "stationary operator: geometry is undefined".into(),
        ));
    }
    if chain.dim_krylov() <= SPECTRAL_LIMIT {
        evolve_spectral(chain, times)
    } else {
        evolve_ode(
            chain,
            times,
            config.tolerances.rtol(),
            config.tolerances.atol(),
        )
    }
}

pub fn cmd_geometry(loaded: &LoadedConfig, out: &OutputDir) -> Result<()> {
    let chain = resolve_chain(&loaded.config)?;
    let times = loaded.config.time_grid.realize()?;
    let traj = report_trajectory(&loaded.config, &chain, &times)?;
    let report = GeometryReport::compute(&traj, &chain)?;
    let hall = hall_check(&traj, &chain, DEFAULT_EPS_OCCUPATION)?;
    out.write_json(
        "geometry.json",
        json!({
            "geometry": report,
            "hall": hall,
        }),
    )?;
    let mut w = out.csv_writer("geometry.csv")?;
    export::geometry_csv(&report, &mut w)
        .map_err(|e| Error::Numerical(format!("csv write failed: {e}")))?;
    eprintln!(
        "geometry: curvature closed form {:.6}, speed deviation {:.3e} -> {}",
        report.curvature_closed_form,
        report.speed_deviation_max,
        out.path("geometry.json").display()
    );
    Ok(())
}

pub fn cmd_bounds(loaded: &LoadedConfig, out: &OutputDir, tail_grid: bool) -> Result<()> {
    let chain = resolve_chain(&loaded.config)?;
    let times = loaded.config.time_grid.realize()?;
    let traj = report_trajectory(&loaded.config, &chain, &times)?;
    let report = BoundsReport::compute(&traj, &chain);
    out.write_json("bounds.json", serde_json::to_value(&report).unwrap())?;
    let mut w = out.csv_writer("bounds.csv")?;
    export::bounds_csv(&report, &mut w)
        .map_err(|e| Error::Numerical(format!("csv write failed: {e}")))?;
    if tail_grid {
        let grid = ksphere_core::bounds::tail_envelope_grid(&traj, &chain);
        let mut w = out.csv_writer("tail_grid.csv")?;
        export::tail_grid_csv(traj.times(), &grid, &mut w)
            .map_err(|e| Error::Numerical(format!("csv write failed: {e}")))?;
    }
    eprintln!(
        "bounds: v_op = {:.6}, tail margin {:.3e} -> {}",
        report.v_op,
        report.tail_margin_min,
        out.path("bounds.json").display()
    );
    Ok(())
}

pub fn cmd_model(loaded: &LoadedConfig, out: &OutputDir) -> Result<()> {
    let model: &ModelSpec = loaded
        .config
        .model()
        .ok_or_else(|| Error::InvalidInput("the model command needs a model input".into()))?;
    model.validate()?;
    let times = loaded.config.time_grid.realize()?;
    let horizon = loaded.config.time_grid.t_max();
    let truncated = model.truncated_chain(loaded.config.tolerances.tail_tol(), horizon)?;

    let traj = model.amplitude_trajectory(&times)?;
    let mut w = out.csv_writer("model_amplitudes.csv")?;
    export::trajectory_csv(&traj, &mut w)
        .map_err(|e| Error::Numerical(format!("csv write failed: {e}")))?;

    let predictions: Vec<serde_json::Value> = times
        .iter()
        .filter(|&&t| t > 0.0)
        .map(|&t| {
            let peak = model.peak_prediction(t).ok();
            json!({
                "t": t,
                "peak": peak,
                "continuum_front": model.continuum_front(t),
            })
        })
        .collect();
    out.write_json(
        "model.json",
        json!({
            "spec": model,
            "levels": truncated.levels,
            "truncation": {
                "max_buffer_mass": truncated.max_buffer_mass,
                "doubling_gap": truncated.doubling_gap,
            },
            "coefficients": truncated.chain.coefficient_profile(),
            "predictions": predictions,
        }),
    )?;
    eprintln!(
        "model: {} levels -> {}",
        truncated.levels,
        out.path("model.json").display()
    );
    Ok(())
}
