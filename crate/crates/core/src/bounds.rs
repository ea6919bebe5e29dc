//! Light-cone structure in level space: the operator-norm velocity, the
//! factorial tail envelope, harmonic-sum and peak fronts, mean-level
//! complexity, and its growth-rate bound.
//!
//! Envelope arithmetic is done entirely in log space (factorials via a
//! cumulative log table) so levels in the tens of thousands never overflow.

use serde::Serialize;

use crate::dynamics::AmplitudeTrajectory;
use crate::lanczos::LanczosChain;

/// Amplitude threshold below which a level counts as decayed when locating
/// the empirical onset of exponential decay.
pub const DECAY_AMPLITUDE: f64 = 1e-8;

/// Noise floor of evolved amplitudes. A computed |phi_n| below this value is
/// indistinguishable from zero: the exact amplitude it approximates can be
/// orders of magnitude smaller (often underflow-level), so comparing the
/// rounding noise against the tail envelope would be meaningless. Levels
/// below the floor are skipped by the envelope check.
pub const AMPLITUDE_NOISE_FLOOR: f64 = 1e-13;

/// v_op = max_n (b_n + b_{n+1}) with boundary b_0 = b_D = 0; a row-sum bound
/// on the generator norm.
pub fn operator_norm_velocity(chain: &LanczosChain) -> f64 {
    let d = chain.dim_krylov();
    (0..d).fold(0.0_f64, |acc, n| acc.max(chain.b(n) + chain.b(n + 1)))
}

/// ln(0!), ln(1!), ..., ln((len-1)!) by cumulative summation (exact to rounding).
fn log_factorials(len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut acc = 0.0_f64;
    out.push(0.0);
    for n in 1..len {
        acc += (n as f64).ln();
        out.push(acc);
    }
    out
}

/// Decay-onset data for one sample time.
#[derive(Debug, Clone, Serialize)]
pub struct DecayOnset {
    pub t: f64,
    /// Smallest level at which the Stirling form of the envelope,
    /// -n ln(n / (v_op t)) + n + v_op t, turns negative.
    pub stirling_level: usize,
    /// Smallest level beyond which every amplitude is below [`DECAY_AMPLITUDE`].
    pub observed_level: Option<usize>,
    /// observed_level / (v_op t).
    pub observed_ratio: Option<f64>,
}

/// Result of checking |phi_n(t)| <= (v_op t)^n / n! * e^{v_op t} over the grid.
#[derive(Debug, Clone, Serialize)]
pub struct TailEnvelopeCheck {
    pub v_op: f64,
    /// Min over all (n, t > 0) of log-envelope minus log |phi_n(t)|.
    /// The bound is a theorem: a negative value beyond rounding is a bug.
    pub margin_min: f64,
    pub decay_onsets: Vec<DecayOnset>,
}

/// Checks the factorial tail envelope in log space and locates where decay
/// sets in relative to the v_op t scale. The t = 0 column is skipped (the
/// envelope degenerates there and every phi_n(0) with n >= 1 vanishes).
pub fn tail_envelope_check(traj: &AmplitudeTrajectory, chain: &LanczosChain) -> TailEnvelopeCheck {
    let v_op = operator_norm_velocity(chain);
    let d = traj.dim();
    let lnfact = log_factorials(d);
    let mut margin_min = f64::INFINITY;
    let mut decay_onsets = Vec::new();

    for (i, &t) in traj.times().iter().enumerate() {
        if t <= 0.0 {
            continue;
        }
        let p = &traj.phi()[i];
        let log_vt = (v_op * t).ln();
        for n in 0..d {
            let amp = p[n].abs();
            if amp < AMPLITUDE_NOISE_FLOOR {
                continue;
            }
            let envelope = n as f64 * log_vt - lnfact[n] + v_op * t;
            margin_min = margin_min.min(envelope - amp.ln());
        }

        let stirling_level = (1..).find(|&n| {
            let x = n as f64;
            -x * (x / (v_op * t)).ln() + x + v_op * t < 0.0
        });
        let observed_level = (0..d).rev().find(|&n| p[n].abs() >= DECAY_AMPLITUDE);
        let observed = observed_level.and_then(|n| if n + 1 < d { Some(n + 1) } else { None });
        decay_onsets.push(DecayOnset {
            t,
            stirling_level: stirling_level.unwrap_or(usize::MAX),
            observed_level: observed,
            observed_ratio: observed.map(|n| n as f64 / (v_op * t)),
        });
    }
    TailEnvelopeCheck {
        v_op,
        margin_min,
        decay_onsets,
    }
}

/// Per-(n, t) tail margins (log envelope minus log amplitude) for heat-map
/// export; `None` where the amplitude is an exact zero or t = 0.
pub fn tail_envelope_grid(
    traj: &AmplitudeTrajectory,
    chain: &LanczosChain,
) -> Vec<Vec<Option<f64>>> {
    let v_op = operator_norm_velocity(chain);
    let d = traj.dim();
    let lnfact = log_factorials(d);
    traj.times()
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let p = &traj.phi()[i];
            (0..d)
                .map(|n| {
                    if t <= 0.0 || p[n].abs() < AMPLITUDE_NOISE_FLOOR {
                        None
                    } else {
                        let envelope = n as f64 * (v_op * t).ln() - lnfact[n] + v_op * t;
                        Some(envelope - p[n].abs().ln())
                    }
                })
                .collect()
        })
        .collect()
}

/// Furthest level allowed by the harmonic-sum travel-time rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FrontResult {
    /// Largest n with sum_{m=1}^{n} 1/b_m <= t (subject to the caps below).
    pub level: usize,
    /// True when the scan hit `max_level` with time budget remaining.
    pub capped: bool,
    /// First level whose coefficient vanished; levels beyond are unreachable.
    pub unreachable_at: Option<usize>,
}

/// Front from an arbitrary coefficient rule, scanning up to `max_level`.
pub fn geometric_front_rule(
    rule: impl Fn(usize) -> f64,
    t: f64,
    max_level: usize,
) -> FrontResult {
    let mut sum = 0.0_f64;
    let mut level = 0usize;
    while level < max_level {
        let b = rule(level + 1);
        if b <= 0.0 {
            return FrontResult {
                level,
                capped: false,
                unreachable_at: Some(level + 1),
            };
        }
        sum += 1.0 / b;
        if sum > t {
            return FrontResult {
                level,
                capped: false,
                unreachable_at: None,
            };
        }
        level += 1;
    }
    FrontResult {
        level,
        capped: true,
        unreachable_at: None,
    }
}

/// Front of a finite chain; levels beyond the chain length are unreachable.
pub fn geometric_front(chain: &LanczosChain, t: f64) -> FrontResult {
    let d = chain.dim_krylov();
    let mut result = geometric_front_rule(|n| chain.b(n), t, d - 1);
    // Hitting the end of a finite chain is exhaustion, not a cap.
    if result.capped && result.level == d - 1 {
        result.capped = false;
    }
    result
}

/// argmax_n phi_n(t)^2 per sample, ties broken toward smaller n.
pub fn peak_front(traj: &AmplitudeTrajectory) -> Vec<usize> {
    traj.phi()
        .iter()
        .map(|p| {
            let mut best = 0usize;
            let mut best_val = p[0] * p[0];
            for n in 1..p.len() {
                let v = p[n] * p[n];
                if v > best_val {
                    best = n;
                    best_val = v;
                }
            }
            best
        })
        .collect()
}

/// Mean level, its spread, and the algebraic growth rate of the mean.
#[derive(Debug, Clone, Serialize)]
pub struct ComplexitySeries {
    /// C(t) = sum_n n phi_n^2.
    pub mean: Vec<f64>,
    /// Delta C(t) = sqrt(sum_n n^2 phi_n^2 - C^2).
    pub deviation: Vec<f64>,
    /// dC/dt = 2 sum_n n phi_n dphi_n (derivatives from powers of A).
    pub rate: Vec<f64>,
}

pub fn krylov_complexity(traj: &AmplitudeTrajectory) -> ComplexitySeries {
    let mut mean = Vec::with_capacity(traj.len());
    let mut deviation = Vec::with_capacity(traj.len());
    let mut rate = Vec::with_capacity(traj.len());
    for (p, dp) in traj.phi().iter().zip(traj.dphi()) {
        let mut c = 0.0;
        let mut c2 = 0.0;
        let mut r = 0.0;
        for n in 0..p.len() {
            let nf = n as f64;
            let w = p[n] * p[n];
            c += nf * w;
            c2 += nf * nf * w;
            r += 2.0 * nf * p[n] * dp[n];
        }
        mean.push(c);
        deviation.push((c2 - c * c).max(0.0).sqrt());
        rate.push(r);
    }
    ComplexitySeries {
        mean,
        deviation,
        rate,
    }
}

/// Margins 2 b_1 DeltaC(t) - |dC/dt| of the growth-rate bound, per sample.
pub fn growth_rate_bound_check(traj: &AmplitudeTrajectory, chain: &LanczosChain) -> Vec<f64> {
    let b1 = chain.b(1);
    let c = krylov_complexity(traj);
    c.deviation
        .iter()
        .zip(&c.rate)
        .map(|(dc, r)| 2.0 * b1 * dc - r.abs())
        .collect()
}

/// C(t) / max(1, harmonic-sum front), a soft diagnostic of the complexity
/// bound. Not asserted <= 1: the travel-time estimate carries an order-one
/// prefactor and the square-root family demonstrably approaches 4.
pub fn complexity_front_ratio(traj: &AmplitudeTrajectory, chain: &LanczosChain) -> Vec<f64> {
    let c = krylov_complexity(traj);
    traj.times()
        .iter()
        .zip(&c.mean)
        .map(|(&t, &cv)| {
            let front = geometric_front(chain, t).level;
            cv / (front.max(1) as f64)
        })
        .collect()
}

/// Aggregated level-space bound diagnostics for export.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub times: Vec<f64>,
    pub v_op: f64,
    pub tail_margin_min: f64,
    pub decay_onsets: Vec<DecayOnset>,
    pub front_geometric: Vec<usize>,
    pub front_peak: Vec<usize>,
    pub complexity: Vec<f64>,
    pub complexity_deviation: Vec<f64>,
    pub complexity_rate: Vec<f64>,
    pub growth_margins: Vec<f64>,
    pub growth_margin_min: f64,
    pub complexity_ratio: Vec<f64>,
}

impl BoundsReport {
    pub fn compute(traj: &AmplitudeTrajectory, chain: &LanczosChain) -> Self {
        let tail = tail_envelope_check(traj, chain);
        let complexity = krylov_complexity(traj);
        let growth_margins = growth_rate_bound_check(traj, chain);
        let growth_margin_min = growth_margins.iter().fold(f64::INFINITY, |a, &m| a.min(m));
        Self {
            times: traj.times().to_vec(),
            v_op: tail.v_op,
            tail_margin_min: tail.margin_min,
            decay_onsets: tail.decay_onsets,
            front_geometric: traj
                .times()
                .iter()
                .map(|&t| geometric_front(chain, t).level)
                .collect(),
            front_peak: peak_front(traj),
            complexity: complexity.mean,
            complexity_deviation: complexity.deviation,
            complexity_rate: complexity.rate,
            complexity_ratio: complexity_front_ratio(traj, chain),
            growth_margins,
            growth_margin_min,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve_spectral;
    use approx::assert_abs_diff_eq;

    fn chain(b: &[f64]) -> LanczosChain {
        LanczosChain::from_coefficients(b.to_vec()).unwrap()
    }

    fn grid(t_max: f64, samples: usize) -> Vec<f64> {
        (0..samples)
            .map(|i| t_max * i as f64 / (samples - 1) as f64)
            .collect()
    }

    #[test]
    fn operator_norm_velocity_examples() {
        assert_eq!(operator_norm_velocity(&chain(&[1.0])), 1.0);
        assert_eq!(operator_norm_velocity(&chain(&[1.0, 1.0])), 2.0);
        let long = vec![2.0; 30];
        assert_eq!(operator_norm_velocity(&chain(&long)), 4.0);
    }

    #[test]
    fn tail_envelope_holds_on_constant_chain() {
        let b = vec![1.0; 59];
        let c = chain(&b);
        let traj = evolve_spectral(&c, &grid(2.0, 9)).unwrap();
        let check = tail_envelope_check(&traj, &c);
        assert_eq!(check.v_op, 2.0);
        assert!(check.margin_min >= -1e-9, "margin {}", check.margin_min);

        // level 20 at t = 2 sits far below its envelope
        let i = traj.times().len() - 1;
        let amp = traj.phi()[i][20].abs();
        let envelope = 20.0 * (2.0 * 2.0_f64).ln() - log_factorials(21)[20] + 4.0;
        assert!(envelope - amp.ln() > 1.0);
    }

    #[test]
    fn tail_envelope_holds_on_growing_chain() {
        let rule = |n: usize| ((n as f64) * (n as f64 + 1.0)).sqrt();
        let b: Vec<f64> = (1..160).map(rule).collect();
        let c = chain(&b);
        let traj = evolve_spectral(&c, &grid(1.5, 7)).unwrap();
        let check = tail_envelope_check(&traj, &c);
        assert!(check.margin_min >= -1e-9);
    }

    #[test]
    fn stirling_onset_tracks_the_analytic_constant() {
        // The Stirling form turns negative at n/(v_op t) ~ 3.59.
        let b = vec![1.0; 99];
        let c = chain(&b);
        let traj = evolve_spectral(&c, &[0.0, 8.0]).unwrap();
        let check = tail_envelope_check(&traj, &c);
        let onset = check.decay_onsets[0].stirling_level as f64;
        let ratio = onset / (check.v_op * 8.0);
        assert!((ratio - 3.59).abs() < 0.1, "stirling ratio {ratio}");
    }

    #[test]
    fn geometric_front_unit_steps() {
        let front = geometric_front_rule(|_| 1.0, 3.0, 100);
        assert_eq!(front.level, 3);
        assert!(!front.capped);
    }

    #[test]
    fn geometric_front_square_root_rule() {
        // b_n = sqrt(n): the front approaches t^2/4 from above as t grows.
        let t = 40.0;
        let front = geometric_front_rule(|n| (n as f64).sqrt(), t, 10_000_000);
        let scale = t * t / 4.0;
        let ratio = front.level as f64 / scale;
        assert!((ratio - 1.0).abs() <= 0.1, "front ratio {ratio}");
    }

    #[test]
    fn geometric_front_linear_rule() {
        // b_n = n: log front grows linearly in t.
        let t = 12.0;
        let front = geometric_front_rule(|n| n as f64, t, 10_000_000);
        let log_front = (front.level as f64).ln();
        assert!(
            (log_front - t).abs() / t <= 0.1,
            "log front {log_front} vs t {t}"
        );
    }

    #[test]
    fn geometric_front_zero_coefficient() {
        let front = geometric_front_rule(|n| if n >= 2 { 0.0 } else { 1.0 }, 10.0, 100);
        assert_eq!(front.level, 1);
        assert_eq!(front.unreachable_at, Some(2));
    }

    #[test]
    fn geometric_front_monotone_in_time() {
        let c = chain(&[0.8, 1.4, 0.3, 2.0]);
        let mut prev = 0;
        for i in 0..40 {
            let f = geometric_front(&c, i as f64 * 0.25);
            assert!(f.level >= prev);
            prev = f.level;
        }
    }

    #[test]
    fn peak_front_constant_chain_tracks_double_speed() {
        // The half-line constant chain peaks just below n = 2bt; the offset is
        // the turning-point width and stays within 3 levels on this range
        // (exact values: -2 at bt <= 5, -3 from bt = 6 on).
        let b = vec![1.0; 55];
        let c = chain(&b);
        for bt in [2.0_f64, 4.0, 6.0, 8.0, 10.0] {
            let traj = evolve_spectral(&c, &[0.0, bt]).unwrap();
            let peak = peak_front(&traj)[1] as f64;
            assert!(
                (peak - 2.0 * bt).abs() <= 3.0,
                "peak {peak} vs 2bt {}",
                2.0 * bt
            );
        }
    }

    #[test]
    fn peak_front_at_zero_and_tie_break() {
        let c = chain(&[1.0]);
        let traj = evolve_spectral(&c, &[0.0, 0.1]).unwrap();
        assert_eq!(peak_front(&traj)[0], 0);
        // Quarter period: phi = (cos, sin) with equal weight at pi/4; the tie
        // goes to the smaller level.
        let traj = evolve_spectral(&c, &[0.0, std::f64::consts::FRAC_PI_4]).unwrap();
        assert_eq!(peak_front(&traj)[1], 0);
    }

    #[test]
    fn complexity_of_square_root_family() {
        // b_n = sqrt(n) gives mean level t^2, spread t, rate 2t.
        let b: Vec<f64> = (1..60).map(|n| (n as f64).sqrt()).collect();
        let c = chain(&b);
        let traj = evolve_spectral(&c, &[0.0, 2.0]).unwrap();
        let series = krylov_complexity(&traj);
        assert_abs_diff_eq!(series.mean[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(series.deviation[0], 0.0, epsilon = 1e-6);
        assert!((series.mean[1] - 4.0).abs() <= 1e-6 * 4.0, "C {}", series.mean[1]);
        assert!((series.deviation[1] - 2.0).abs() <= 1e-6 * 2.0);
        assert!((series.rate[1] - 4.0).abs() <= 1e-6 * 4.0);
    }

    #[test]
    fn growth_rate_bound_saturated_by_square_root_family() {
        let b: Vec<f64> = (1..80).map(|n| (n as f64).sqrt()).collect();
        let c = chain(&b);
        let traj = evolve_spectral(&c, &grid(2.5, 26)).unwrap();
        let margins = growth_rate_bound_check(&traj, &c);
        let series = krylov_complexity(&traj);
        for (m, dc) in margins.iter().zip(&series.deviation) {
            let scale = 1.0 + dc;
            assert!(m.abs() <= 1e-6 * scale, "saturation margin {m}");
        }
    }

    #[test]
    fn growth_rate_bound_strict_on_lopsided_qubit() {
        let c = chain(&[2.0, 0.5]);
        let traj = evolve_spectral(&c, &[0.0, 0.7]).unwrap();
        let margins = growth_rate_bound_check(&traj, &c);
        assert_abs_diff_eq!(margins[0], 0.0, epsilon = 1e-12);
        assert!(margins[1] > 0.1, "margin {}", margins[1]);
    }

    #[test]
    fn complexity_ratio_bounded_for_two_level_chain() {
        let c = chain(&[1.0]);
        let traj = evolve_spectral(&c, &grid(3.0, 31)).unwrap();
        let ratios = complexity_front_ratio(&traj, &c);
        assert_eq!(ratios[0], 0.0);
        for r in &ratios {
            assert!(*r <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn bounds_report_aggregates() {
        let b: Vec<f64> = (1..40).map(|n| (n as f64).sqrt()).collect();
        let c = chain(&b);
        let traj = evolve_spectral(&c, &grid(1.5, 16)).unwrap();
        let report = BoundsReport::compute(&traj, &c);
        assert!(report.tail_margin_min >= -1e-9);
        assert!(report.growth_margin_min >= -1e-6);
        assert_eq!(report.front_peak[0], 0);
        assert!(report.complexity_ratio.iter().all(|r| *r < 10.0));
    }
}
