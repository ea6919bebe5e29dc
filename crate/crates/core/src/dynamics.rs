//! Amplitude dynamics on the unit sphere generated by the skew tridiagonal
//! hopping matrix.
//!
//! In the Krylov basis the operator's real amplitude vector obeys
//! dPhi/dt = A Phi with A_{n,n-1} = b_n, A_{n,n+1} = -b_{n+1} and zero
//! elsewhere. Two independent integration routes are provided: an adaptive
//! Runge-Kutta path ([`evolve_ode`]) and an eigendecomposition of the
//! symmetric tridiagonal representation ([`evolve_spectral`]), which is exact
//! up to eigensolver precision and serves as the in-repo oracle for the
//! former. Time derivatives are always algebraic powers of A applied to Phi,
//! never finite differences.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lanczos::LanczosChain;
use crate::ode;

/// Default relative tolerance for the Runge-Kutta path.
pub const DEFAULT_RTOL: f64 = 1e-10;
/// Default absolute tolerance for the Runge-Kutta path.
pub const DEFAULT_ATOL: f64 = 1e-12;
/// Norm-drift budget |sum phi_n^2 - 1| for a healthy trajectory.
pub const DEFAULT_NORM_TOL: f64 = 1e-9;
/// Default tail-mass tolerance for truncating semi-infinite chains.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;
/// Hard cap on truncation length.
pub const TRUNCATION_HARD_CAP: usize = 20_000;
/// Phase-residual tolerance in the spectral route.
pub const PHASE_RESIDUAL_TOL: f64 = 1e-10;

/// The real skew-symmetric tridiagonal generator of the amplitude flow.
///
/// Stored by its coefficient list; applications use the tridiagonal structure
/// directly so large truncated chains never materialize a dense matrix.
#[derive(Debug, Clone)]
pub struct HoppingMatrix {
    b: Vec<f64>,
}

impl HoppingMatrix {
    pub fn from_chain(chain: &LanczosChain) -> Self {
        Self {
            b: chain.coefficient_profile(),
        }
    }

    pub fn from_coefficients(b: Vec<f64>) -> Self {
        Self { b }
    }

    pub fn dim(&self) -> usize {
        self.b.len() + 1
    }

    /// b_n with boundary convention b_0 = b_D = 0.
    fn coeff(&self, n: usize) -> f64 {
        if n == 0 || n > self.b.len() {
            0.0
        } else {
            self.b[n - 1]
        }
    }

    /// (A x)_n = b_n x_{n-1} - b_{n+1} x_{n+1}.
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let d = self.dim();
        let mut out = DVector::zeros(d);
        for n in 0..d {
            let mut v = 0.0;
            if n > 0 {
                v += self.coeff(n) * x[n - 1];
            }
            if n + 1 < d {
                v -= self.coeff(n + 1) * x[n + 1];
            }
            out[n] = v;
        }
        out
    }

    /// Dense realization of A. Intended for small chains (diagnostics, invariants).
    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut a = DMatrix::zeros(d, d);
        for n in 1..d {
            a[(n, n - 1)] = self.coeff(n);
            a[(n - 1, n)] = -self.coeff(n);
        }
        a
    }

    /// The symmetric tridiagonal representation L with L_{n,n-1} = L_{n-1,n} = b_n.
    pub fn symmetric_tridiagonal(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut l = DMatrix::zeros(d, d);
        for n in 1..d {
            l[(n, n - 1)] = self.coeff(n);
            l[(n - 1, n)] = self.coeff(n);
        }
        l
    }
}

/// A sampled amplitude trajectory with algebraic derivatives and norm diagnostics.
#[derive(Debug, Clone)]
pub struct AmplitudeTrajectory {
    times: Vec<f64>,
    phi: Vec<DVector<f64>>,
    dphi: Vec<DVector<f64>>,
    d2phi: Vec<DVector<f64>>,
    d3phi: Vec<DVector<f64>>,
    norm_drift: Vec<f64>,
}

impl AmplitudeTrajectory {
    /// Wraps amplitude samples, filling the derivative fields with A Phi,
    /// A^2 Phi, A^3 Phi and the per-sample norm drift.
    pub fn from_amplitudes(
        hopping: &HoppingMatrix,
        times: Vec<f64>,
        phi: Vec<DVector<f64>>,
    ) -> Result<Self> {
        if times.len() != phi.len() {
            return Err(Error::DimensionMismatch {
                left: times.len(),
                right: phi.len(),
            });
        }
        let mut dphi = Vec::with_capacity(phi.len());
        let mut d2phi = Vec::with_capacity(phi.len());
        let mut d3phi = Vec::with_capacity(phi.len());
        let mut norm_drift = Vec::with_capacity(phi.len());
        for p in &phi {
            if p.len() != hopping.dim() {
                return Err(Error::DimensionMismatch {
                    left: p.len(),
                    right: hopping.dim(),
                });
            }
            let d1 = hopping.apply(p);
            let d2 = hopping.apply(&d1);
            let d3 = hopping.apply(&d2);
            dphi.push(d1);
            d2phi.push(d2);
            d3phi.push(d3);
            norm_drift.push((p.norm_squared() - 1.0).abs());
        }
        Ok(Self {
            times,
            phi,
            dphi,
            d2phi,
            d3phi,
            norm_drift,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.phi.first().map_or(0, |p| p.len())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn phi(&self) -> &[DVector<f64>] {
        &self.phi
    }

    pub fn dphi(&self) -> &[DVector<f64>] {
        &self.dphi
    }

    pub fn d2phi(&self) -> &[DVector<f64>] {
        &self.d2phi
    }

    pub fn d3phi(&self) -> &[DVector<f64>] {
        &self.d3phi
    }

    pub fn norm_drift(&self) -> &[f64] {
        &self.norm_drift
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.norm_drift.iter().fold(0.0_f64, |a, &d| a.max(d))
    }
}

fn validate_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidInput("empty time grid".into()));
    }
    if times[0] != 0.0 {
        return Err(Error::InvalidInput(format!(
            "time grid must start at 0, got {}",
            times[0]
        )));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "time grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

fn unit_seed(dim: usize) -> DVector<f64> {
    let mut e0 = DVector::zeros(dim);
    e0[0] = 1.0;
    e0
}

/// Integrates dPhi/dt = A Phi from Phi(0) = e_0 with the adaptive embedded
/// Runge-Kutta scheme, emitting dense output at the requested times.
pub fn evolve_ode(
    chain: &LanczosChain,
    times: &[f64],
    rtol: f64,
    atol: f64,
) -> Result<AmplitudeTrajectory> {
    validate_grid(times)?;
    let hopping = HoppingMatrix::from_chain(chain);
    let rhs = |y: &DVector<f64>| hopping.apply(y);
    let states = ode::integrate_dense(rhs, unit_seed(hopping.dim()), times, rtol, atol)?;
    AmplitudeTrajectory::from_amplitudes(&hopping, times.to_vec(), states)
}

/// Exact evolution via eigendecomposition of the symmetric tridiagonal
/// representation.
///
/// phi_n(t) is recovered as the real part of i^n (e^{-iLt})_{n0}; the
/// imaginary residual of that product is checked against
/// [`PHASE_RESIDUAL_TOL`] before being discarded.
pub fn evolve_spectral(chain: &LanczosChain, times: &[f64]) -> Result<AmplitudeTrajectory> {
    validate_grid(times)?;
    let hopping = HoppingMatrix::from_chain(chain);
    let states = spectral_states(&hopping, times)?;
    AmplitudeTrajectory::from_amplitudes(&hopping, times.to_vec(), states)
}

fn spectral_states(hopping: &HoppingMatrix, times: &[f64]) -> Result<Vec<DVector<f64>>> {
    let d = hopping.dim();
    if d == 1 {
        return Ok(times.iter().map(|_| unit_seed(1)).collect());
    }
    let eig = hopping.symmetric_tridiagonal().symmetric_eigen();
    let v = &eig.eigenvectors;
    let lambda = &eig.eigenvalues;
    let w: Vec<f64> = (0..d).map(|k| v[(0, k)]).collect();

    let mut states = Vec::with_capacity(times.len());
    for &t in times {
        let mut z = vec![Complex64::new(0.0, 0.0); d];
        for k in 0..d {
            let phase = Complex64::from_polar(w[k], -lambda[k] * t);
            for n in 0..d {
                z[n] += v[(n, k)] * phase;
            }
        }
        let mut phi = DVector::zeros(d);
        for n in 0..d {
            // i^n z_n must be real; its imaginary part is the phase residual.
            let (value, residual) = match n % 4 {
                0 => (z[n].re, z[n].im),
                1 => (-z[n].im, z[n].re),
                2 => (-z[n].re, z[n].im),
                _ => (z[n].im, z[n].re),
            };
            if residual.abs() > PHASE_RESIDUAL_TOL {
                return Err(Error::PhaseResidual {
                    residual: residual.abs(),
                    tolerance: PHASE_RESIDUAL_TOL,
                    level: n,
                });
            }
            phi[n] = value;
        }
        states.push(phi);
    }
    Ok(states)
}

/// Result of adaptively truncating a semi-infinite coefficient rule.
#[derive(Debug, Clone)]
pub struct TruncatedChain {
    pub chain: LanczosChain,
    /// Number of levels N retained.
    pub levels: usize,
    /// Max over the horizon of the squared-amplitude mass in the last 10% of levels.
    pub max_buffer_mass: f64,
    /// Max entrywise amplitude difference against the doubled-length run.
    pub doubling_gap: f64,
}

/// Truncates the semi-infinite chain `rule` to a finite length that the given
/// horizon cannot distinguish from infinity.
///
/// The length N is grown until the amplitude mass in the last 10% of levels
/// stays below `tail_tol` over [0, horizon], then verified by re-running with
/// 2N levels and requiring entrywise agreement below 10 * tail_tol on the
/// common support. Reflection artifacts from the hard wall fail the doubling
/// comparison and force a larger N.
pub fn truncated_chain(
    rule: impl Fn(usize) -> f64,
    tail_tol: f64,
    horizon: f64,
) -> Result<TruncatedChain> {
    if !(tail_tol > 0.0) {
        return Err(Error::InvalidInput("tail_tol must be positive".into()));
    }
    if horizon < 0.0 || !horizon.is_finite() {
        return Err(Error::InvalidInput("horizon must be finite and >= 0".into()));
    }
    if horizon == 0.0 {
        return Ok(TruncatedChain {
            chain: LanczosChain::from_coefficients(Vec::new())?,
            levels: 1,
            max_buffer_mass: 0.0,
            doubling_gap: 0.0,
        });
    }

    let grid: Vec<f64> = (0..=64).map(|i| horizon * i as f64 / 64.0).collect();
    let mut n = 16usize;
    let mut last_mass = f64::INFINITY;
    loop {
        if n > TRUNCATION_HARD_CAP {
            return Err(Error::TruncationCap {
                cap: TRUNCATION_HARD_CAP,
                tail_mass: last_mass,
            });
        }
        let states = truncated_states(&rule, n, &grid)?;
        let buffer_start = n - (n / 10).max(1);
        let mass = states
            .iter()
            .map(|p| (buffer_start..n).map(|i| p[i] * p[i]).sum::<f64>())
            .fold(0.0_f64, f64::max);
        last_mass = mass;
        if mass >= tail_tol {
            n *= 2;
            continue;
        }
        // Doubling verification on the common support.
        let doubled = truncated_states(&rule, 2 * n, &grid)?;
        let gap = states
            .iter()
            .zip(&doubled)
            .map(|(a, b)| (0..n).map(|i| (a[i] - b[i]).abs()).fold(0.0_f64, f64::max))
            .fold(0.0_f64, f64::max);
        if gap < 10.0 * tail_tol {
            let coefficients: Vec<f64> = (1..n).map(&rule).collect();
            return Ok(TruncatedChain {
                chain: LanczosChain::from_coefficients(coefficients)?,
                levels: n,
                max_buffer_mass: mass,
                doubling_gap: gap,
            });
        }
        n *= 2;
    }
}

fn truncated_states(
    rule: &impl Fn(usize) -> f64,
    n: usize,
    grid: &[f64],
) -> Result<Vec<DVector<f64>>> {
    let b: Vec<f64> = (1..n).map(rule).collect();
    let hopping = HoppingMatrix::from_coefficients(b);
    if n <= 384 {
        spectral_states(&hopping, grid)
    } else {
        let rhs = |y: &DVector<f64>| hopping.apply(y);
        ode::integrate_dense(rhs, unit_seed(n), grid, 1e-12, 1e-14)
    }
}
