//! Emission of chains, trajectories, and reports as JSON values and CSV.
//!
//! Series go to CSV, scalars and diagnostics to JSON. Floats are printed with
//! full round-trip precision so identical inputs yield byte-identical files.

use std::io::{self, Write};

use serde_json::{json, Value};

use crate::dynamics::AmplitudeTrajectory;
use crate::geometry;
use crate::io::DenseMatrixFile;
use crate::lanczos::LanczosChain;

/// Full-precision float formatting used in every emitted file.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.17e}")
}

/// Chain export: coefficient list plus diagnostics, optionally with the
/// operator basis in the dense re/im layout.
pub fn chain_json(chain: &LanczosChain, include_basis: bool) -> Value {
    let mut value = json!({
        "D": chain.dim_krylov(),
        "b": chain.coefficient_profile(),
        "ortho_residual": chain.ortho_residual(),
        "tridiag_residual": chain.tridiag_residual(),
        "stationary": chain.is_stationary(),
    });
    if include_basis {
        if let Some(basis) = chain.basis() {
            let dump: Vec<Value> = basis
                .iter()
                .map(|k| serde_json::to_value(DenseMatrixFile::from_matrix(k.entries())).unwrap())
                .collect();
            value["basis"] = Value::Array(dump);
        }
    }
    value
}

/// Trajectory CSV with header `t,phi_0,...,phi_{D-1}`.
pub fn trajectory_csv(traj: &AmplitudeTrajectory, w: &mut impl Write) -> io::Result<()> {
    write!(w, "t")?;
    for n in 0..traj.dim() {
        write!(w, ",phi_{n}")?;
    }
    writeln!(w)?;
    for (i, t) in traj.times().iter().enumerate() {
        write!(w, "{}", fmt_float(*t))?;
        for v in traj.phi()[i].iter() {
            write!(w, ",{}", fmt_float(*v))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Sidecar diagnostics for a trajectory run.
pub fn trajectory_diagnostics(traj: &AmplitudeTrajectory, chain: &LanczosChain) -> Value {
    let speed_dev = chain.b1().map(|b1| {
        geometry::krylov_speed(traj)
            .iter()
            .map(|v| (v - b1).abs() / b1)
            .fold(0.0_f64, f64::max)
    });
    json!({
        "norm_drift_max": traj.max_norm_drift(),
        "speed_deviation_max": speed_dev,
        "samples": traj.len(),
        "levels": traj.dim(),
    })
}

/// Geometry CSV mirror: per-sample series from the report.
pub fn geometry_csv(report: &geometry::GeometryReport, w: &mut impl Write) -> io::Result<()> {
    writeln!(w, "t,speed,curvature,torsion,geodesic_residual,theta")?;
    for i in 0..report.times.len() {
        let torsion = report
            .torsion
            .as_ref()
            .map_or(String::from(""), |series| fmt_float(series[i]));
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_float(report.times[i]),
            fmt_float(report.speed[i]),
            fmt_float(report.curvature[i]),
            torsion,
            fmt_float(report.geodesic_residual[i]),
            fmt_float(report.theta[i]),
        )?;
    }
    Ok(())
}

/// Bounds CSV mirror: per-sample level-space series.
pub fn bounds_csv(report: &crate::bounds::BoundsReport, w: &mut impl Write) -> io::Result<()> {
    writeln!(
        w,
        "t,front_geometric,front_peak,complexity,complexity_deviation,complexity_rate,growth_margin,complexity_ratio"
    )?;
    for i in 0..report.times.len() {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            fmt_float(report.times[i]),
            report.front_geometric[i],
            report.front_peak[i],
            fmt_float(report.complexity[i]),
            fmt_float(report.complexity_deviation[i]),
            fmt_float(report.complexity_rate[i]),
            fmt_float(report.growth_margins[i]),
            fmt_float(report.complexity_ratio[i]),
        )?;
    }
    Ok(())
}

/// Tail-margin heat-map CSV: one row per sample, one column per level;
/// blank cells where the margin is undefined (t = 0 or amplitude below the
/// noise floor).
pub fn tail_grid_csv(
    times: &[f64],
    grid: &[Vec<Option<f64>>],
    w: &mut impl Write,
) -> io::Result<()> {
    let levels = grid.first().map_or(0, Vec::len);
    write!(w, "t")?;
    for n in 0..levels {
        write!(w, ",margin_{n}")?;
    }
    writeln!(w)?;
    for (t, row) in times.iter().zip(grid) {
        write!(w, "{}", fmt_float(*t))?;
        for cell in row {
            match cell {
                Some(m) => write!(w, ",{}", fmt_float(*m))?,
                None => write!(w, ",")?,
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve_spectral;

    #[test]
    fn chain_json_shape() {
        let chain = LanczosChain::from_coefficients(vec![1.0, 0.5]).unwrap();
        let v = chain_json(&chain, false);
        assert_eq!(v["D"], 3);
        assert_eq!(v["b"].as_array().unwrap().len(), 2);
        assert!(v.get("basis").is_none());
    }

    #[test]
    fn trajectory_csv_layout() {
        let chain = LanczosChain::from_coefficients(vec![1.0]).unwrap();
        let traj = evolve_spectral(&chain, &[0.0, 1.0]).unwrap();
        let mut buf = Vec::new();
        trajectory_csv(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,phi_0,phi_1");
        assert_eq!(lines.count(), 2);
    }

    #[test]
    fn csv_output_is_deterministic() {
        let chain = LanczosChain::from_coefficients(vec![0.9, 1.1]).unwrap();
        let grid = [0.0, 0.7, 1.9];
        let a = {
            let traj = evolve_spectral(&chain, &grid).unwrap();
            let mut buf = Vec::new();
            trajectory_csv(&traj, &mut buf).unwrap();
            buf
        };
        let b = {
            let traj = evolve_spectral(&chain, &grid).unwrap();
            let mut buf = Vec::new();
            trajectory_csv(&traj, &mut buf).unwrap();
            buf
        };
        assert_eq!(a, b);
    }
}
