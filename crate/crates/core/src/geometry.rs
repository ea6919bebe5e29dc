//! Geometry of the amplitude trajectory on the unit sphere: speed, arc
//! length, curvature, torsion, geodesic residual, the return-amplitude bound,
//! and the exact uncertainty product.
//!
//! Cross products have no meaning in D dimensions, so curvature and torsion
//! are computed from Gram determinants of the first three derivatives. The
//! closed forms in terms of the leading coefficients,
//! kappa = sqrt(1 + b2^2/b1^2) and |tau| = b2 b3 / (b1^2 sqrt(b1^2 + b2^2)),
//! are evaluated alongside; constancy in time is asserted by tests, never
//! assumed.

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::AmplitudeTrajectory;
use crate::error::{Error, Result};
use crate::lanczos::LanczosChain;

/// Occupation cutoff below which a level is excluded from the raw
/// uncertainty-functional ratio and its closed-form limit is used instead.
pub const DEFAULT_EPS_OCCUPATION: f64 = 1e-12;

/// ||dPhi/dt|| per sample; equals b_1 at all times for exact dynamics.
pub fn krylov_speed(traj: &AmplitudeTrajectory) -> Vec<f64> {
    traj.dphi().iter().map(|d| d.norm()).collect()
}

/// d||dPhi/dt||/dt per sample, from the algebraic derivatives.
fn speed_rate(traj: &AmplitudeTrajectory) -> Vec<f64> {
    traj.dphi()
        .iter()
        .zip(traj.d2phi())
        .map(|(v, a)| {
            let n = v.norm();
            if n == 0.0 {
                0.0
            } else {
                v.dot(a) / n
            }
        })
        .collect()
}

/// Arc length between `t0` and `t1`, by corrected-trapezoid quadrature of the
/// speed (endpoint derivatives make each panel fourth-order accurate).
/// Both endpoints must lie inside the sampled range.
pub fn arc_length(traj: &AmplitudeTrajectory, t0: f64, t1: f64) -> Result<f64> {
    let times = traj.times();
    let (lo, hi) = (times[0], *times.last().unwrap());
    if !(t0 <= t1) || t0 < lo || t1 > hi {
        return Err(Error::InvalidInput(format!(
            "arc-length range [{t0}, {t1}] outside sampled [{lo}, {hi}]"
        )));
    }
    let v = krylov_speed(traj);
    let s = speed_rate(traj);
    let mut total = 0.0;
    for i in 0..times.len() - 1 {
        let (a, b) = (times[i], times[i + 1]);
        if b <= t0 || a >= t1 {
            continue;
        }
        let (from, to) = (t0.max(a), t1.min(b));
        total += panel_integral(a, b, v[i], v[i + 1], s[i], s[i + 1], from, to);
    }
    Ok(total)
}

/// Cumulative arc length from the start of the grid to each sample.
pub fn cumulative_arc_length(traj: &AmplitudeTrajectory) -> Vec<f64> {
    let times = traj.times();
    let v = krylov_speed(traj);
    let s = speed_rate(traj);
    let mut out = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 0..times.len() - 1 {
        let (a, b) = (times[i], times[i + 1]);
        acc += panel_integral(a, b, v[i], v[i + 1], s[i], s[i + 1], a, b);
        out.push(acc);
    }
    out
}

/// Integral over [from, to] of the cubic Hermite interpolant of v on [a, b].
#[allow(clippy::too_many_arguments)]
fn panel_integral(a: f64, b: f64, va: f64, vb: f64, sa: f64, sb: f64, from: f64, to: f64) -> f64 {
    let h = b - a;
    if h <= 0.0 {
        return 0.0;
    }
    // Hermite basis antiderivatives evaluated at normalized u = (t - a)/h.
    let anti = |u: f64| -> f64 {
        let u2 = u * u;
        let u3 = u2 * u;
        let u4 = u2 * u2;
        let h00 = u - u3 + 0.5 * u4;
        let h10 = 0.5 * u2 - (2.0 / 3.0) * u3 + 0.25 * u4;
        let h01 = u3 - 0.5 * u4;
        let h11 = -(1.0 / 3.0) * u3 + 0.25 * u4;
        h * (va * h00 + sa * h * h10 + vb * h01 + sb * h * h11)
    };
    anti((to - a) / h) - anti((from - a) / h)
}

/// A per-sample Frenet series together with its coefficient closed form.
#[derive(Debug, Clone, Serialize)]
pub struct FrenetSeries {
    pub series: Vec<f64>,
    pub closed_form: f64,
}

/// Curvature kappa(t) from the Gram form of the cross-product norm,
/// sqrt(|v|^2 |a|^2 - (v.a)^2) / |v|^3, alongside sqrt(1 + b2^2/b1^2).
pub fn frenet_curvature(traj: &AmplitudeTrajectory, chain: &LanczosChain) -> Result<FrenetSeries> {
    let b1 = chain.b(1);
    if b1 == 0.0 {
        return Err(Error::Undefined(
            "curvature undefined for a stationary chain (b_1 = 0)".into(),
        ));
    }
    let b2 = chain.b(2);
    let closed_form = (1.0 + (b2 / b1) * (b2 / b1)).sqrt();
    let series = traj
        .dphi()
        .iter()
        .zip(traj.d2phi())
        .map(|(v, a)| {
            let v2 = v.norm_squared();
            let a2 = a.norm_squared();
            let va = v.dot(a);
            (v2 * a2 - va * va).max(0.0).sqrt() / (v2 * v2.sqrt())
        })
        .collect();
    Ok(FrenetSeries {
        series,
        closed_form,
    })
}

/// |tau(t)| from the 3x3 Gram determinant of (dPhi, d2Phi, d3Phi), alongside
/// the coefficient closed form b2 b3 / (b1 sqrt(b1^2 + b2^2)).
///
/// The closed form follows from the conserved even moments of the flow and,
/// like any Frenet invariant, is unchanged by rescaling every coefficient
/// (which only reparametrizes time along the same path). The Gram route
/// loses the sign; all coefficients being non-negative makes the closed form
/// non-negative too.
pub fn frenet_torsion(traj: &AmplitudeTrajectory, chain: &LanczosChain) -> Result<FrenetSeries> {
    if chain.dim_krylov() < 3 {
        return Err(Error::Undefined(
            "torsion undefined: motion is planar (fewer than three chain levels)".into(),
        ));
    }
    let b1 = chain.b(1);
    let b2 = chain.b(2);
    let b3 = chain.b(3);
    if b1 == 0.0 {
        return Err(Error::Undefined("torsion undefined for b_1 = 0".into()));
    }
    let closed_form = b2 * b3 / (b1 * (b1 * b1 + b2 * b2).sqrt());
    let mut series = Vec::with_capacity(traj.len());
    for ((v, a), j) in traj.dphi().iter().zip(traj.d2phi()).zip(traj.d3phi()) {
        let g11 = v.dot(v);
        let g12 = v.dot(a);
        let g13 = v.dot(j);
        let g22 = a.dot(a);
        let g23 = a.dot(j);
        let g33 = j.dot(j);
        let det = g11 * (g22 * g33 - g23 * g23) - g12 * (g12 * g33 - g23 * g13)
            + g13 * (g12 * g23 - g22 * g13);
        let denom = g11 * g22 - g12 * g12;
        if denom <= f64::EPSILON * g11.max(1.0) * g22.max(1.0) {
            return Err(Error::Undefined(
                "torsion undefined: degenerate velocity-acceleration Gram matrix".into(),
            ));
        }
        series.push(det.max(0.0).sqrt() / denom);
    }
    Ok(FrenetSeries {
        series,
        closed_form,
    })
}

/// ||d2Phi + b1^2 Phi|| per sample: zero exactly on geodesic (two-level)
/// motion, and equal to b1 b2 at t = 0 otherwise.
pub fn geodesic_residual(traj: &AmplitudeTrajectory, chain: &LanczosChain) -> Vec<f64> {
    let b1sq = chain.b(1) * chain.b(1);
    traj.phi()
        .iter()
        .zip(traj.d2phi())
        .map(|(p, a)| (a + p * b1sq).norm())
        .collect()
}

/// Return-amplitude bound diagnostics over the first quarter period.
#[derive(Debug, Clone, Serialize)]
pub struct ReturnAmplitudeCheck {
    /// Sample times with b1 t <= pi/2.
    pub times: Vec<f64>,
    /// phi_0(t) - cos(b1 t) at those times; non-negative up to tolerance.
    pub margins: Vec<f64>,
    /// Geodesic distance arccos(phi_0) at those times.
    pub theta: Vec<f64>,
    /// b1 t - theta(t); the distance never beats the linear light cone.
    ///
    /// Near theta = 0 the arccos map amplifies an amplitude error eps into an
    /// angle error of order sqrt(2 eps), so negative excursions of that size
    /// are numerical, not violations; the well-conditioned form of the same
    /// statement is the `margins` field.
    pub theta_margins: Vec<f64>,
    /// Largest arccos-argument clip applied (|phi_0| beyond 1).
    pub max_clip: f64,
}

/// Checks phi_0(t) >= cos(b1 t) on 0 <= b1 t <= pi/2 and theta(t) <= b1 t.
pub fn return_amplitude_check(
    traj: &AmplitudeTrajectory,
    chain: &LanczosChain,
) -> ReturnAmplitudeCheck {
    let b1 = chain.b(1);
    let mut times = Vec::new();
    let mut margins = Vec::new();
    let mut theta = Vec::new();
    let mut theta_margins = Vec::new();
    let mut max_clip = 0.0_f64;
    for (i, &t) in traj.times().iter().enumerate() {
        let bt = b1 * t;
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&bt) {
            continue;
        }
        let phi0 = traj.phi()[i][0];
        max_clip = max_clip.max((phi0.abs() - 1.0).max(0.0));
        let th = phi0.clamp(-1.0, 1.0).acos();
        times.push(t);
        margins.push(phi0 - bt.cos());
        theta.push(th);
        theta_margins.push(bt - th);
    }
    ReturnAmplitudeCheck {
        times,
        margins,
        theta,
        theta_margins,
        max_clip,
    }
}

/// One sampled evaluation of the exact uncertainty relation.
#[derive(Debug, Clone, Serialize)]
pub struct HallSample {
    pub t: f64,
    /// Nonclassical generator spread ||A Phi|| (= b_1 exactly).
    pub delta_nc: f64,
    /// Inverse-root of the raw information functional.
    pub delta_functional: f64,
    /// delta_functional * delta_nc; equals 1/2 identically.
    pub product: f64,
}

/// Collected uncertainty-relation diagnostics along a trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct HallReport {
    pub samples: Vec<HallSample>,
    /// Max over samples and occupied levels of the classical-part diagonal
    /// divided by the occupation; vanishes identically in exact arithmetic.
    pub classical_part_norm: f64,
    /// Max relative gap between the raw ratio route and its closed form
    /// 4 sum dphi_n^2.
    pub raw_vs_closed_gap: f64,
    /// Max |Phi^T A Phi| (the generator expectation, zero by skew-symmetry).
    pub expectation_residual: f64,
    /// Max |product - 1/2| over samples.
    pub product_worst: f64,
}

/// Evaluates both routes to the uncertainty functional at every sample.
///
/// The raw route sums <K_n| i[L, rho] |K_n>^2 / <K_n| rho |K_n> over levels
/// with occupation at least `eps_occupation`; skipped levels contribute their
/// finite limit 4 dphi_n^2 taken from the closed form, and the gap between
/// routes is reported.
pub fn hall_check(
    traj: &AmplitudeTrajectory,
    chain: &LanczosChain,
    eps_occupation: f64,
) -> Result<HallReport> {
    let d = traj.dim();
    let mut samples = Vec::with_capacity(traj.len());
    let mut classical_part_norm = 0.0_f64;
    let mut raw_vs_closed_gap = 0.0_f64;
    let mut expectation_residual = 0.0_f64;
    let mut product_worst = 0.0_f64;

    // i^{-n} cycle used to rebuild the complex Krylov-basis coordinates.
    let phase = |n: usize| -> Complex64 {
        match n % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        }
    };

    for (i, &t) in traj.times().iter().enumerate() {
        let p = &traj.phi()[i];
        let dp = &traj.dphi()[i];
        if p.norm_squared() < eps_occupation * d as f64 {
            return Err(Error::Numerical(
                "all levels unoccupied; amplitude vector is not normalized".into(),
            ));
        }
        expectation_residual = expectation_residual.max(p.dot(dp).abs());

        let c: Vec<Complex64> = (0..d).map(|n| phase(n) * p[n]).collect();
        let mut raw = 0.0_f64;
        for n in 0..d {
            let mut lc = Complex64::new(0.0, 0.0);
            if n > 0 {
                lc += c[n - 1] * chain.b(n);
            }
            if n + 1 < d {
                lc += c[n + 1] * chain.b(n + 1);
            }
            let diag = lc * c[n].conj(); // <K_n| L rho |K_n>
            let occupation = p[n] * p[n];
            if occupation >= eps_occupation {
                // <K_n| i[L, rho] |K_n> = -2 Im diag; classical part is Re diag.
                let comm = -2.0 * diag.im;
                raw += comm * comm / occupation;
                classical_part_norm = classical_part_norm.max(diag.re.abs() / occupation);
            } else {
                raw += 4.0 * dp[n] * dp[n];
            }
        }
        let closed = 4.0 * dp.norm_squared();
        if closed > 0.0 {
            raw_vs_closed_gap = raw_vs_closed_gap.max((raw - closed).abs() / closed);
        }

        let delta_nc = dp.norm();
        if raw <= 0.0 {
            return Err(Error::Numerical(
                "uncertainty functional vanished; stationary amplitude vector".into(),
            ));
        }
        let delta_functional = 1.0 / raw.sqrt();
        let product = delta_functional * delta_nc;
        product_worst = product_worst.max((product - 0.5).abs());
        samples.push(HallSample {
            t,
            delta_nc,
            delta_functional,
            product,
        });
    }
    Ok(HallReport {
        samples,
        classical_part_norm,
        raw_vs_closed_gap,
        expectation_residual,
        product_worst,
    })
}

/// Aggregated geometric diagnostics for export.
#[derive(Debug, Clone, Serialize)]
pub struct GeometryReport {
    pub times: Vec<f64>,
    pub speed: Vec<f64>,
    pub speed_deviation_max: f64,
    pub arc_length_total: f64,
    pub curvature: Vec<f64>,
    pub curvature_closed_form: f64,
    pub torsion: Option<Vec<f64>>,
    pub torsion_closed_form: Option<f64>,
    pub geodesic_residual: Vec<f64>,
    pub theta: Vec<f64>,
    pub return_bound: ReturnAmplitudeCheck,
    pub norm_drift_max: f64,
}

impl GeometryReport {
    pub fn compute(traj: &AmplitudeTrajectory, chain: &LanczosChain) -> Result<Self> {
        let b1 = chain
            .b1()
            .ok_or_else(|| Error::Undefined("geometry undefined for a stationary chain".into()))?;
        let speed = krylov_speed(traj);
        let speed_deviation_max = speed
            .iter()
            .map(|v| (v - b1).abs() / b1)
            .fold(0.0_f64, f64::max);
        let times = traj.times().to_vec();
        let arc_length_total = arc_length(traj, times[0], *times.last().unwrap())?;
        let curvature = frenet_curvature(traj, chain)?;
        let (torsion, torsion_closed_form) = match frenet_torsion(traj, chain) {
            Ok(f) => (Some(f.series), Some(f.closed_form)),
            Err(Error::Undefined(_)) => (None, None),
            Err(e) => return Err(e),
        };
        let theta: Vec<f64> = traj
            .phi()
            .iter()
            .map(|p| p[0].clamp(-1.0, 1.0).acos())
            .collect();
        let return_bound = return_amplitude_check(traj, chain);
        Ok(Self {
            times,
            speed,
            speed_deviation_max,
            arc_length_total,
            curvature: curvature.series,
            curvature_closed_form: curvature.closed_form,
            torsion,
            torsion_closed_form,
            geodesic_residual: geodesic_residual(traj, chain),
            theta,
            return_bound,
            norm_drift_max: traj.max_norm_drift(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve_spectral;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn chain(b: &[f64]) -> LanczosChain {
        LanczosChain::from_coefficients(b.to_vec()).unwrap()
    }

    fn grid(t_max: f64, samples: usize) -> Vec<f64> {
        (0..samples)
            .map(|i| t_max * i as f64 / (samples - 1) as f64)
            .collect()
    }

    fn meixner_rule(alpha: f64, eta: f64) -> impl Fn(usize) -> f64 {
        move |n: usize| alpha * ((n as f64) * (n as f64 - 1.0 + eta)).sqrt()
    }

    #[test]
    fn speed_is_b1_for_two_and_three_level_chains() {
        for b in [&[1.0][..], &[1.0, 1.0][..]] {
            let c = chain(b);
            let traj = evolve_spectral(&c, &grid(8.0, 81)).unwrap();
            for v in krylov_speed(&traj) {
                assert_abs_diff_eq!(v, 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn speed_of_truncated_meixner_chain() {
        let rule = meixner_rule(1.0, 2.0);
        let b: Vec<f64> = (1..160).map(&rule).collect();
        let c = chain(&b);
        let traj = evolve_spectral(&c, &grid(1.5, 16)).unwrap();
        let b1 = 2.0_f64.sqrt();
        for v in krylov_speed(&traj) {
            assert!((v - b1).abs() <= 1e-8 * b1);
        }
    }

    #[test]
    fn arc_length_examples() {
        let c = chain(&[1.0]);
        let traj = evolve_spectral(&c, &grid(PI, 65)).unwrap();
        let l = arc_length(&traj, 0.0, PI).unwrap();
        assert!((l - PI).abs() <= 1e-8 * PI);
        assert_eq!(arc_length(&traj, 1.0, 1.0).unwrap(), 0.0);
        assert!(arc_length(&traj, -0.1, 1.0).is_err());

        let rule = meixner_rule(1.0, 2.0);
        let b: Vec<f64> = (1..220).map(&rule).collect();
        let traj = evolve_spectral(&chain(&b), &grid(2.0, 65)).unwrap();
        let want = 2.0 * 2.0_f64.sqrt();
        let l = arc_length(&traj, 0.0, 2.0).unwrap();
        assert!((l - want).abs() <= 1e-8 * want, "arc {l} want {want}");
    }

    #[test]
    fn arc_length_of_partial_window() {
        let c = chain(&[2.0, 1.0]);
        let traj = evolve_spectral(&c, &grid(3.0, 101)).unwrap();
        // window endpoints off the sample grid
        let l = arc_length(&traj, 0.4123, 1.8517).unwrap();
        let want = 2.0 * (1.8517 - 0.4123);
        assert!((l - want).abs() <= 1e-8 * want);
    }

    #[test]
    fn curvature_examples() {
        let cases: [(&[f64], f64); 3] = [
            (&[1.0], 1.0),
            (&[1.0, 1.0], 2.0_f64.sqrt()),
            (&[2.0, 1.0], 1.25_f64.sqrt()),
        ];
        for (b, want) in cases {
            let c = chain(b);
            let traj = evolve_spectral(&c, &grid(5.0, 51)).unwrap();
            let f = frenet_curvature(&traj, &c).unwrap();
            assert_abs_diff_eq!(f.closed_form, want, epsilon = 1e-14);
            for k in &f.series {
                assert!(
                    (k - want).abs() <= 1e-7 * want,
                    "curvature {k} vs {want} for {b:?}"
                );
            }
        }
    }

    #[test]
    fn acceleration_norm_identity() {
        // ||d2Phi||^2 = b1^2 (b1^2 + b2^2) at every sample.
        for b in [&[1.0, 1.0][..], &[2.0, 0.5][..], &[0.7, 1.9, 1.2][..]] {
            let c = chain(b);
            let traj = evolve_spectral(&c, &grid(7.0, 71)).unwrap();
            let b1 = c.b(1);
            let b2 = c.b(2);
            let want = b1 * b1 * (b1 * b1 + b2 * b2);
            for a in traj.d2phi() {
                assert!((a.norm_squared() - want).abs() <= 1e-8 * want);
            }
        }
    }

    #[test]
    fn torsion_examples() {
        // three levels, b3 = 0: planar-on-sphere motion, zero torsion
        let c = chain(&[1.0, 1.0]);
        let traj = evolve_spectral(&c, &grid(4.0, 41)).unwrap();
        let f = frenet_torsion(&traj, &c).unwrap();
        assert_eq!(f.closed_form, 0.0);
        for tau in &f.series {
            assert!(tau.abs() <= 1e-6);
        }

        // constant chain: |tau| = 1/sqrt(2) for all t
        let b: Vec<f64> = vec![1.0; 23];
        let c = chain(&b);
        let traj = evolve_spectral(&c, &grid(3.0, 31)).unwrap();
        let f = frenet_torsion(&traj, &c).unwrap();
        let want = 1.0 / 2.0_f64.sqrt();
        assert_abs_diff_eq!(f.closed_form, want, epsilon = 1e-14);
        for tau in &f.series {
            assert!((tau - want).abs() <= 1e-6 * want, "torsion {tau}");
        }

        // two levels: undefined, flagged
        let c = chain(&[1.0]);
        let traj = evolve_spectral(&c, &grid(1.0, 5)).unwrap();
        assert!(matches!(
            frenet_torsion(&traj, &c),
            Err(Error::Undefined(_))
        ));
    }

    #[test]
    fn geodesic_residual_examples() {
        let c = chain(&[1.0]);
        let traj = evolve_spectral(&c, &grid(6.0, 61)).unwrap();
        for r in geodesic_residual(&traj, &c) {
            assert!(r <= 1e-10, "geodesic residual {r}");
        }

        let c = chain(&[1.0, 1.0]);
        let traj = evolve_spectral(&c, &[0.0, 0.3]).unwrap();
        let r = geodesic_residual(&traj, &c);
        assert_abs_diff_eq!(r[0], 1.0, epsilon = 1e-12);

        let c = chain(&[2.0, 3.0]);
        let traj = evolve_spectral(&c, &[0.0, 0.1]).unwrap();
        let r = geodesic_residual(&traj, &c);
        assert_abs_diff_eq!(r[0], 6.0, epsilon = 1e-12);
    }

    #[test]
    fn return_amplitude_bound() {
        // geodesic chain saturates the bound
        let c = chain(&[1.0]);
        let traj = evolve_spectral(&c, &grid(PI / 2.0, 33)).unwrap();
        let check = return_amplitude_check(&traj, &c);
        assert_eq!(check.times.len(), 33);
        for m in &check.margins {
            assert!(m.abs() <= 1e-9, "geodesic margin {m}");
        }
        assert!(check.max_clip <= 1e-9);

        // non-geodesic chain has strictly positive margin away from t = 0
        let c = chain(&[1.0, 1.0]);
        let traj = evolve_spectral(&c, &[0.0, 0.5]).unwrap();
        let check = return_amplitude_check(&traj, &c);
        assert_abs_diff_eq!(check.margins[0], 0.0, epsilon = 1e-14);
        assert!(check.margins[1] > 1e-4);
        // arccos conditioning near theta = 0 turns ~1e-15 amplitude error
        // into ~4e-8 of angle; anything beyond that is a real violation.
        for tm in &check.theta_margins {
            assert!(*tm >= -1e-7);
        }
    }

    #[test]
    fn theta_never_exceeds_arc_length() {
        let c = chain(&[1.3, 0.8, 1.1]);
        let traj = evolve_spectral(&c, &grid(2.0, 41)).unwrap();
        let arcs = cumulative_arc_length(&traj);
        for (p, arc) in traj.phi().iter().zip(arcs) {
            let theta = p[0].clamp(-1.0, 1.0).acos();
            // 1e-7 headroom for the arccos conditioning at theta ~ 0.
            assert!(theta <= arc + 1e-7);
        }
    }

    #[test]
    fn hall_product_is_one_half() {
        for b in [&[1.0][..], &[1.0, 1.0][..], &[0.4, 1.7, 0.9, 1.2][..]] {
            let c = chain(b);
            let traj = evolve_spectral(&c, &grid(5.0, 21)).unwrap();
            let report = hall_check(&traj, &c, DEFAULT_EPS_OCCUPATION).unwrap();
            assert!(
                report.product_worst <= 1e-8,
                "product deviation {}",
                report.product_worst
            );
            assert!(report.classical_part_norm <= 1e-10);
            assert!(report.expectation_residual <= 1e-10);
        }
    }

    #[test]
    fn hall_delta_nc_is_b1() {
        let c = chain(&[1.0, 1.0]);
        let traj = evolve_spectral(&c, &[0.0, 0.3]).unwrap();
        let report = hall_check(&traj, &c, DEFAULT_EPS_OCCUPATION).unwrap();
        assert_abs_diff_eq!(report.samples[1].delta_nc, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn hall_raw_route_matches_closed_form() {
        let b: Vec<f64> = vec![1.0; 40];
        let c = chain(&b);
        let traj = evolve_spectral(&c, &[0.0, 1.0]).unwrap();
        let report = hall_check(&traj, &c, DEFAULT_EPS_OCCUPATION).unwrap();
        assert!(
            report.raw_vs_closed_gap <= 1e-8,
            "gap {}",
            report.raw_vs_closed_gap
        );
    }

    #[test]
    fn geometry_report_aggregates() {
        let c = chain(&[1.0, 1.0]);
        let traj = evolve_spectral(&c, &grid(3.0, 31)).unwrap();
        let report = GeometryReport::compute(&traj, &c).unwrap();
        assert!(report.speed_deviation_max <= 1e-9);
        assert!((report.arc_length_total - 3.0).abs() <= 1e-8 * 3.0);
        assert_abs_diff_eq!(report.curvature_closed_form, 2.0_f64.sqrt(), epsilon = 1e-14);
        assert_eq!(report.torsion_closed_form, Some(0.0));

        let c2 = chain(&[1.0]);
        let traj2 = evolve_spectral(&c2, &grid(1.0, 5)).unwrap();
        let report2 = GeometryReport::compute(&traj2, &c2).unwrap();
        assert!(report2.torsion.is_none());
    }
}
