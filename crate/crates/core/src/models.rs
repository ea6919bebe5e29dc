//! Exactly solvable coefficient families with closed-form amplitudes, used to
//! validate the whole pipeline end to end.
//!
//! Five families: the two- and three-level qubit chains, the constant chain,
//! the square-root ("coherent") family b_n = alpha sqrt(n) whose amplitude
//! weights are Poisson, and the "meixner" family b_n = alpha sqrt(n(n-1+eta))
//! whose weights are negative-binomial. Amplitudes are the real main-line
//! values with the level phase factor stripped; every check built on them
//! depends only on phi_n^2. Pochhammer symbols and factorials are evaluated
//! through log-gamma differences so levels in the thousands stay finite.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::dynamics::{self, AmplitudeTrajectory, HoppingMatrix};
use crate::error::{Error, Result};
use crate::lanczos::LanczosChain;

/// Mass tolerance for choosing how many levels of a closed form to evaluate.
/// Kept a few decades above machine epsilon: the running mass sum converges
/// to 1 only within a few ulp.
const MODEL_TAIL_TOL: f64 = 1e-13;

/// Evaluates exp(log_phi(n)) for n = 0, 1, ... until the missing mass is
/// negligible or the terms have decayed into irrelevance past the peak.
fn collect_until_converged(log_phi: impl Fn(usize) -> f64) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut mass = 0.0_f64;
    let mut prev = f64::INFINITY;
    for n in 0..2_000_000usize {
        let phi = log_phi(n).exp();
        out.push(phi);
        mass += phi * phi;
        let term = phi * phi;
        if n > 4 && (1.0 - mass < MODEL_TAIL_TOL || (term < 1e-30 && term < prev)) {
            return Ok(out);
        }
        prev = term;
    }
    Err(Error::TruncationCap {
        cap: 2_000_000,
        tail_mass: 1.0 - mass,
    })
}

/// One of the exactly solvable coefficient families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Two-level chain: b = (omega). Uniform rotation on the unit circle.
    QubitZ { omega: f64 },
    /// Three-level chain: b = (omega, h).
    QubitTransverse { omega: f64, h: f64 },
    /// Semi-infinite constant chain b_n = b. No closed form is asserted;
    /// amplitudes come from the spectral evolution of a truncated chain.
    ConstantB { b: f64 },
    /// b_n = alpha sqrt(n (n - 1 + eta)); negative-binomial weights.
    Meixner { alpha: f64, eta: f64 },
    /// b_n = alpha sqrt(n); Poisson weights with mean (alpha t)^2.
    Coherent { alpha: f64 },
}

/// Peak-position predictions for the semi-infinite growing families.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PeakPrediction {
    /// Finite-time saddle estimate.
    pub finite_t: f64,
    /// Long-time asymptotic form.
    pub asymptotic: f64,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            ModelSpec::QubitZ { omega } => *omega > 0.0,
            ModelSpec::QubitTransverse { omega, h } => *omega > 0.0 && *h >= 0.0,
            ModelSpec::ConstantB { b } => *b > 0.0,
            ModelSpec::Meixner { alpha, eta } => *alpha > 0.0 && *eta > 0.0,
            ModelSpec::Coherent { alpha } => *alpha > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "model parameters out of range: {self:?}"
            )))
        }
    }

    /// b_n for n >= 1; the qubit families return 0 beyond their truncation.
    pub fn coefficient(&self, n: usize) -> f64 {
        debug_assert!(n >= 1);
        let x = n as f64;
        match self {
            ModelSpec::QubitZ { omega } => {
                if n == 1 {
                    *omega
                } else {
                    0.0
                }
            }
            ModelSpec::QubitTransverse { omega, h } => match n {
                1 => *omega,
                2 => *h,
                _ => 0.0,
            },
            ModelSpec::ConstantB { b } => *b,
            ModelSpec::Meixner { alpha, eta } => alpha * (x * (x - 1.0 + eta)).sqrt(),
            ModelSpec::Coherent { alpha } => alpha * x.sqrt(),
        }
    }

    /// Whether the family is a finite chain (qubit families) or semi-infinite.
    pub fn is_finite(&self) -> bool {
        matches!(
            self,
            ModelSpec::QubitZ { .. } | ModelSpec::QubitTransverse { .. }
        )
    }

    /// Natural chain length for the finite families.
    pub fn natural_levels(&self) -> Option<usize> {
        match self {
            ModelSpec::QubitZ { .. } => Some(2),
            ModelSpec::QubitTransverse { h, .. } => Some(if *h == 0.0 { 2 } else { 3 }),
            _ => None,
        }
    }

    /// A chain of `levels` levels built from the coefficient rule.
    pub fn chain(&self, levels: usize) -> Result<LanczosChain> {
        self.validate()?;
        if levels == 0 {
            return Err(Error::InvalidInput("levels must be positive".into()));
        }
        LanczosChain::from_coefficients((1..levels).map(|n| self.coefficient(n)).collect())
    }

    /// A chain truncated adaptively so `horizon` cannot see the cut.
    pub fn truncated_chain(&self, tail_tol: f64, horizon: f64) -> Result<dynamics::TruncatedChain> {
        self.validate()?;
        if let Some(levels) = self.natural_levels() {
            return Ok(dynamics::TruncatedChain {
                chain: self.chain(levels)?,
                levels,
                max_buffer_mass: 0.0,
                doubling_gap: 0.0,
            });
        }
        dynamics::truncated_chain(|n| self.coefficient(n), tail_tol, horizon)
    }

    /// Closed-form amplitudes at time `t` (spectral evolution for the
    /// constant family), with enough levels that the missing mass is below
    /// truncation tolerance. Values are real main-line amplitudes; for the
    /// growing families they are non-negative.
    pub fn amplitudes(&self, t: f64) -> Result<Vec<f64>> {
        self.validate()?;
        if t < 0.0 || !t.is_finite() {
            return Err(Error::InvalidInput("time must be finite and >= 0".into()));
        }
        match self {
            ModelSpec::QubitZ { omega } => {
                let th = omega * t;
                Ok(vec![th.cos(), th.sin()])
            }
            ModelSpec::QubitTransverse { omega, h } => {
                let big = (omega * omega + h * h).sqrt();
                let c = (big * t).cos();
                let s = (big * t).sin();
                Ok(vec![
                    c + h * h / (big * big) * (1.0 - c),
                    omega / big * s,
                    h * omega / (big * big) * (1.0 - c),
                ])
            }
            ModelSpec::ConstantB { .. } => {
                let truncated = self.truncated_chain(dynamics::DEFAULT_TAIL_TOL, t.max(0.1))?;
                let grid = [0.0, t];
                let times: &[f64] = if t == 0.0 { &grid[..1] } else { &grid };
                let traj = dynamics::evolve_spectral(&truncated.chain, times)?;
                Ok(traj.phi().last().unwrap().iter().copied().collect())
            }
            ModelSpec::Meixner { alpha, eta } => {
                if t == 0.0 {
                    return Ok(vec![1.0]);
                }
                let th = (alpha * t).tanh();
                let log_th = th.ln();
                let log_sech = -(alpha * t).cosh().ln();
                collect_until_converged(|n| {
                    // phi_n = sqrt((eta)_n / n!) tanh^n sech^eta
                    let log_poch = ln_gamma(eta + n as f64) - ln_gamma(*eta);
                    0.5 * (log_poch - ln_gamma(n as f64 + 1.0)) + n as f64 * log_th
                        + eta * log_sech
                })
            }
            ModelSpec::Coherent { alpha } => {
                if t == 0.0 {
                    return Ok(vec![1.0]);
                }
                let lambda = (alpha * t) * (alpha * t);
                let log_at = (alpha * t).ln();
                // phi_n = e^{-lambda/2} (alpha t)^n / sqrt(n!)
                collect_until_converged(|n| {
                    -0.5 * lambda + n as f64 * log_at - 0.5 * ln_gamma(n as f64 + 1.0)
                })
            }
        }
    }

    /// Closed-form amplitude trajectory on `times`, padded to a common level
    /// count, with derivative fields from the matching hopping matrix.
    pub fn amplitude_trajectory(&self, times: &[f64]) -> Result<AmplitudeTrajectory> {
        let rows: Vec<Vec<f64>> = times.iter().map(|&t| self.amplitudes(t)).collect::<Result<_>>()?;
        let levels = rows.iter().map(Vec::len).max().unwrap_or(1);
        let states: Vec<DVector<f64>> = rows
            .into_iter()
            .map(|mut r| {
                r.resize(levels, 0.0);
                DVector::from_vec(r)
            })
            .collect();
        let hopping =
            HoppingMatrix::from_coefficients((1..levels).map(|n| self.coefficient(n)).collect());
        AmplitudeTrajectory::from_amplitudes(&hopping, times.to_vec(), states)
    }

    /// Predicted position of the amplitude peak for the growing families.
    ///
    /// Flagged undefined for the meixner family at eta <= 1 (the weight
    /// profile is monotone decreasing; the saddle sits at or below zero).
    pub fn peak_prediction(&self, t: f64) -> Result<PeakPrediction> {
        self.validate()?;
        if t <= 0.0 {
            return Err(Error::InvalidInput("peak prediction needs t > 0".into()));
        }
        match self {
            ModelSpec::Meixner { alpha, eta } => {
                if *eta <= 1.0 {
                    return Err(Error::Undefined(
                        "peak prediction undefined for eta <= 1 (monotone weight profile)".into(),
                    ));
                }
                let finite_t = -(eta - 1.0) / (2.0 * (alpha * t).tanh().ln());
                let asymptotic = (eta - 1.0) / 4.0 * (2.0 * alpha * t).exp();
                Ok(PeakPrediction {
                    finite_t,
                    asymptotic,
                })
            }
            ModelSpec::Coherent { alpha } => {
                let peak = (alpha * t) * (alpha * t);
                Ok(PeakPrediction {
                    finite_t: peak,
                    asymptotic: peak,
                })
            }
            _ => Err(Error::Undefined(
                "peak prediction only applies to the meixner and coherent families".into(),
            )),
        }
    }

    /// Prefactor-free continuum front scale from the travel-time integral:
    /// (alpha t)^2 / 4 for the square-root family, e^{alpha t} for the
    /// asymptotically linear family, b t for the constant chain.
    pub fn continuum_front(&self, t: f64) -> Option<f64> {
        match self {
            ModelSpec::ConstantB { b } => Some(b * t),
            ModelSpec::Meixner { alpha, .. } => Some((alpha * t).exp()),
            ModelSpec::Coherent { alpha } => Some((alpha * t) * (alpha * t) / 4.0),
            _ => None,
        }
    }
}
