//! Quadratic invariants of the orthogonal amplitude flow.
//!
//! The flow dPhi/dt = A Phi with skew-symmetric A conserves Phi^T I Phi for
//! every symmetric I commuting with A. Even powers of A provide a canonical
//! family (and reproduce the generator moments); the full commutant is built
//! from the rotation-plane decomposition of A: block-diagonal matrices whose
//! 2x2 blocks are multiples of the identity.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::{AmplitudeTrajectory, HoppingMatrix};
use crate::error::{Error, Result};
use crate::lanczos::LanczosChain;

/// Relative gap below which two rotation rates count as degenerate and their
/// coefficients are merged.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Conservation data for one moment order.
#[derive(Debug, Clone, Serialize)]
pub struct MomentDrift {
    pub order: usize,
    /// Phi^T A^k Phi at the first sample.
    pub initial: f64,
    /// Max |m_k(t) - m_k(0)| over the trajectory.
    pub max_drift: f64,
    /// Max |m_k(t)| over the trajectory (the whole series vanishes for odd k).
    pub max_abs: f64,
    /// For even k = 2j, the generator moment (-1)^j m_k; `None` for odd k.
    pub liouvillian_moment: Option<f64>,
}

/// Evaluates Phi^T A^k Phi along the trajectory for each requested order.
///
/// Even orders are conserved by the orthogonal flow; odd orders vanish
/// identically by skew-symmetry.
pub fn moment_conservation(
    traj: &AmplitudeTrajectory,
    chain: &LanczosChain,
    orders: &[usize],
) -> Vec<MomentDrift> {
    let hopping = HoppingMatrix::from_chain(chain);
    orders
        .iter()
        .map(|&order| {
            let mut initial = 0.0;
            let mut max_drift = 0.0_f64;
            let mut max_abs = 0.0_f64;
            for (i, p) in traj.phi().iter().enumerate() {
                let mut v = p.clone();
                for _ in 0..order {
                    v = hopping.apply(&v);
                }
                let m = p.dot(&v);
                if i == 0 {
                    initial = m;
                }
                max_drift = max_drift.max((m - initial).abs());
                max_abs = max_abs.max(m.abs());
            }
            let liouvillian_moment = if order % 2 == 0 {
                let j = order / 2;
                Some(if j % 2 == 0 { initial } else { -initial })
            } else {
                None
            };
            MomentDrift {
                order,
                initial,
                max_drift,
                max_abs,
                liouvillian_moment,
            }
        })
        .collect()
}

/// How to build a symmetric matrix commuting with the hopping generator.
#[derive(Debug, Clone)]
pub enum InvariantSpec {
    /// I = sum_j coeffs[j] (A^2)^j, starting from the identity at j = 0.
    PolynomialInGeneratorSquared(Vec<f64>),
    /// I = sum_k coeffs[k] P_k over the rotation-plane projectors of A
    /// (rates in descending order, zero modes last as one block).
    CanonicalBlocks(Vec<f64>),
}

/// A symmetric matrix commuting with A, with its commutator residual.
#[derive(Debug, Clone)]
pub struct QuadraticInvariant {
    pub matrix: DMatrix<f64>,
    /// ||A I - I A||_F, the honest measure of how well I commutes.
    pub commutator_norm: f64,
    /// Groups of block indices whose rotation rates were numerically
    /// degenerate and therefore share one coefficient.
    pub merged_blocks: Vec<Vec<usize>>,
}

impl QuadraticInvariant {
    /// Phi^T I Phi per sample.
    pub fn value_series(&self, traj: &AmplitudeTrajectory) -> Vec<f64> {
        traj.phi().iter().map(|p| p.dot(&(&self.matrix * p))).collect()
    }

    pub fn max_drift(&self, traj: &AmplitudeTrajectory) -> f64 {
        let values = self.value_series(traj);
        let first = values[0];
        values
            .iter()
            .map(|v| (v - first).abs())
            .fold(0.0_f64, f64::max)
    }
}

/// Builds a commuting symmetric matrix for the chain's hopping generator.
pub fn build_commuting_invariant(
    chain: &LanczosChain,
    spec: &InvariantSpec,
) -> Result<QuadraticInvariant> {
    let hopping = HoppingMatrix::from_chain(chain);
    let a = hopping.to_dense();
    let d = a.nrows();
    let (matrix, merged_blocks) = match spec {
        InvariantSpec::PolynomialInGeneratorSquared(coeffs) => {
            if coeffs.is_empty() {
                return Err(Error::InvalidInput(
                    "polynomial invariant needs at least one coefficient".into(),
                ));
            }
            let a2 = &a * &a;
            let mut power = DMatrix::identity(d, d);
            let mut m = DMatrix::zeros(d, d);
            for (j, &c) in coeffs.iter().enumerate() {
                if j > 0 {
                    power = &power * &a2;
                }
                m += &power * c;
            }
            (m, Vec::new())
        }
        InvariantSpec::CanonicalBlocks(coeffs) => canonical_block_invariant(&a, coeffs)?,
    };
    let commutator_norm = (&a * &matrix - &matrix * &a).norm();
    Ok(QuadraticInvariant {
        matrix,
        commutator_norm,
        merged_blocks,
    })
}

/// Rotation-plane decomposition of the skew matrix via the Hermitian
/// eigenproblem of iA: rates theta_k > 0 give 2x2 rotation planes with real
/// projector 2 Re(z z^dagger); zero modes form one final block.
fn canonical_block_invariant(
    a: &DMatrix<f64>,
    coeffs: &[f64],
) -> Result<(DMatrix<f64>, Vec<Vec<usize>>)> {
    let d = a.nrows();
    let ia = DMatrix::from_fn(d, d, |i, j| Complex64::new(0.0, a[(i, j)]));
    let eig = ia.symmetric_eigen();
    let scale = eig
        .eigenvalues
        .iter()
        .fold(0.0_f64, |acc, &v| acc.max(v.abs()));
    let zero_tol = 1e-12 * scale.max(1.0);

    // Positive rates sorted descending; their conjugate partners are implicit.
    let mut positive: Vec<(f64, usize)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > zero_tol)
        .map(|(k, &v)| (v, k))
        .collect();
    positive.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());

    // Cluster numerically degenerate rates; each cluster takes one coefficient.
    let mut clusters: Vec<Vec<(f64, usize)>> = Vec::new();
    for entry in positive {
        match clusters.last_mut() {
            Some(cluster)
                if (cluster[0].0 - entry.0).abs() <= DEGENERACY_TOL * cluster[0].0.abs() =>
            {
                cluster.push(entry)
            }
            _ => clusters.push(vec![entry]),
        }
    }
    let zero_modes: Vec<usize> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &v)| v.abs() <= zero_tol)
        .map(|(k, _)| k)
        .collect();

    let num_blocks = clusters.len() + usize::from(!zero_modes.is_empty());
    if coeffs.len() != num_blocks {
        return Err(Error::InvalidInput(format!(
            "canonical invariant needs {num_blocks} coefficients ({} rotation blocks{}), got {}",
            clusters.len(),
            if zero_modes.is_empty() {
                String::new()
            } else {
                format!(" + {} zero modes", zero_modes.len())
            },
            coeffs.len()
        )));
    }

    let mut merged_blocks = Vec::new();
    let mut m = DMatrix::<f64>::zeros(d, d);
    for (ci, cluster) in clusters.iter().enumerate() {
        if cluster.len() > 1 {
            merged_blocks.push((0..cluster.len()).map(|j| ci + j).collect());
        }
        let mut projector = DMatrix::<f64>::zeros(d, d);
        for &(_, k) in cluster {
            let z = eig.eigenvectors.column(k);
            for i in 0..d {
                for j in 0..d {
                    projector[(i, j)] += 2.0 * (z[i] * z[j].conj()).re;
                }
            }
        }
        m += projector * coeffs[ci];
    }
    if !zero_modes.is_empty() {
        let c = coeffs[clusters.len()];
        let mut projector = DMatrix::<f64>::zeros(d, d);
        for &k in &zero_modes {
            let z = eig.eigenvectors.column(k);
            for i in 0..d {
                for j in 0..d {
                    projector[(i, j)] += (z[i] * z[j].conj()).re;
                }
            }
        }
        m += projector * c;
    }
    Ok((m, merged_blocks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve_spectral;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn chain(b: &[f64]) -> LanczosChain {
        LanczosChain::from_coefficients(b.to_vec()).unwrap()
    }

    fn grid(t_max: f64, samples: usize) -> Vec<f64> {
        (0..samples)
            .map(|i| t_max * i as f64 / (samples - 1) as f64)
            .collect()
    }

    #[test]
    fn second_moment_is_minus_b1_squared() {
        let c = chain(&[1.3, 0.6, 1.9]);
        let traj = evolve_spectral(&c, &grid(10.0, 41)).unwrap();
        let drifts = moment_conservation(&traj, &c, &[2]);
        let m = &drifts[0];
        assert_abs_diff_eq!(m.initial, -1.3 * 1.3, epsilon = 1e-12);
        assert!(m.max_drift <= 1e-8 * m.initial.abs());
        // the generator moment flips the sign back
        assert_abs_diff_eq!(m.liouvillian_moment.unwrap(), 1.3 * 1.3, epsilon = 1e-12);
    }

    #[test]
    fn odd_moments_vanish() {
        let c = chain(&[0.9, 1.7, 0.4, 1.1]);
        let traj = evolve_spectral(&c, &grid(10.0, 41)).unwrap();
        for m in moment_conservation(&traj, &c, &[1, 3, 5]) {
            assert!(m.max_abs <= 1e-12, "order {} moment {}", m.order, m.max_abs);
            assert!(m.liouvillian_moment.is_none());
        }
    }

    #[test]
    fn fourth_moment_conserved_on_three_level_chain() {
        let c = chain(&[1.0, 1.0]);
        let traj = evolve_spectral(&c, &grid(10.0, 101)).unwrap();
        let drifts = moment_conservation(&traj, &c, &[4]);
        let m = &drifts[0];
        // (A^4)_{00} at t = 0: ||A^2 e_0||^2 = b1^4 + b1^2 b2^2 = 2
        assert_abs_diff_eq!(m.initial, 2.0, epsilon = 1e-12);
        assert!(m.max_drift <= 1e-8 * m.initial.abs());
    }

    #[test]
    fn polynomial_invariant_minus_a_squared() {
        let c = chain(&[1.2, 0.8]);
        let traj = evolve_spectral(&c, &grid(8.0, 33)).unwrap();
        let inv =
            build_commuting_invariant(&c, &InvariantSpec::PolynomialInGeneratorSquared(vec![0.0, -1.0]))
                .unwrap();
        assert!(inv.commutator_norm <= 1e-13);
        let values = inv.value_series(&traj);
        // -Phi^T A^2 Phi = ||A Phi||^2 = b1^2
        assert_abs_diff_eq!(values[0], 1.2 * 1.2, epsilon = 1e-12);
        assert!(inv.max_drift(&traj) <= 1e-8 * values[0].abs());
    }

    #[test]
    fn identity_invariant_is_normalization() {
        let c = chain(&[0.7, 1.5, 0.9]);
        let traj = evolve_spectral(&c, &grid(5.0, 21)).unwrap();
        let inv =
            build_commuting_invariant(&c, &InvariantSpec::PolynomialInGeneratorSquared(vec![1.0]))
                .unwrap();
        for v in inv.value_series(&traj) {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-11);
        }
    }

    #[test]
    fn canonical_invariant_on_four_level_chain() {
        let mut rng = StdRng::seed_from_u64(31);
        let b: Vec<f64> = (0..3).map(|_| rng.random_range(0.2..2.0)).collect();
        let c = chain(&b);
        let traj = evolve_spectral(&c, &grid(10.0, 41)).unwrap();
        // D = 4: two rotation planes, no zero modes
        let inv =
            build_commuting_invariant(&c, &InvariantSpec::CanonicalBlocks(vec![1.0, 2.0])).unwrap();
        let a = HoppingMatrix::from_chain(&c).to_dense();
        assert!(
            inv.commutator_norm <= 1e-10 * a.norm() * inv.matrix.norm(),
            "commutator {}",
            inv.commutator_norm
        );
        let values = inv.value_series(&traj);
        assert!(inv.max_drift(&traj) <= 1e-8 * values[0].abs().max(1.0));
    }

    #[test]
    fn canonical_invariant_counts_blocks() {
        // D = 5: two rotation planes plus one zero mode -> three coefficients.
        let c = chain(&[1.0, 0.5, 1.5, 0.8]);
        assert!(matches!(
            build_commuting_invariant(&c, &InvariantSpec::CanonicalBlocks(vec![1.0, 2.0])),
            Err(Error::InvalidInput(_))
        ));
        let inv =
            build_commuting_invariant(&c, &InvariantSpec::CanonicalBlocks(vec![1.0, 2.0, 3.0]))
                .unwrap();
        let traj = evolve_spectral(&c, &grid(6.0, 25)).unwrap();
        assert!(inv.max_drift(&traj) <= 1e-8 * 3.0);
    }

    #[test]
    fn degenerate_rates_are_merged() {
        // Two decoupled planes with the same rate: b = (1, 0, 1) splits into
        // levels {0,1} and {2,3} both rotating at rate 1.
        let c = chain(&[1.0, 0.0, 1.0]);
        let inv =
            build_commuting_invariant(&c, &InvariantSpec::CanonicalBlocks(vec![2.5])).unwrap();
        assert_eq!(inv.merged_blocks.len(), 1);
        let traj = evolve_spectral(&c, &grid(4.0, 17)).unwrap();
        assert!(inv.max_drift(&traj) <= 1e-8 * 2.5);
    }

    #[test]
    fn complexity_operator_matches_complexity_series() {
        // I_nm = n delta_nm does not commute with A, but Phi^T I Phi must equal
        // the mean-level series exactly.
        let c = chain(&[1.0, 1.4, 0.6]);
        let traj = evolve_spectral(&c, &grid(5.0, 21)).unwrap();
        let d = c.dim_krylov();
        let number = DMatrix::from_fn(d, d, |i, j| if i == j { i as f64 } else { 0.0 });
        let inv = QuadraticInvariant {
            matrix: number,
            commutator_norm: f64::NAN,
            merged_blocks: Vec::new(),
        };
        let values = inv.value_series(&traj);
        let complexity = crate::bounds::krylov_complexity(&traj);
        for (v, cm) in values.iter().zip(&complexity.mean) {
            assert_abs_diff_eq!(*v, *cm, epsilon = 1e-13);
        }
    }
}
