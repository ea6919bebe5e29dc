//! Operators as vectors under the trace inner product, and the commutator
//! action of a Hamiltonian.
//!
//! A d-dimensional Hilbert space carries the d^2-dimensional operator space
//! with inner product (A|B) = Tr(A^dagger B). [`Liouvillian`] wraps a
//! Hamiltonian H and acts as O -> [H, O]; [`HeisenbergPropagator`] applies the
//! exact flow generated by that action, computed from the eigendecomposition
//! of H. All values are immutable after construction and all operations are
//! pure, so they can be shared freely across threads.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest dense Hilbert-space dimension accepted by constructors.
pub const DEFAULT_DIM_MAX: usize = 64;

/// Relative Hermiticity tolerance: max |H - H^dagger| <= tol * max |H|.
pub const DEFAULT_HERMITICITY_TOL: f64 = 1e-12;

/// Sign s in the propagator U(t) = exp(s i H t), with O(t) = U O U^dagger.
///
/// Fixed once so that the evolved operator satisfies i dO/dt = [H, O(t)];
/// the finite-difference check lives in the tests of this module.
pub const HEISENBERG_SIGN: f64 = -1.0;

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

fn all_finite(m: &DMatrix<Complex64>) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Dense complex Hamiltonian, validated Hermitian at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    entries: DMatrix<Complex64>,
}

impl HermitianMatrix {
    /// Validates shape, finiteness, the dimension cap and Hermiticity
    /// (relative tolerance [`DEFAULT_HERMITICITY_TOL`]).
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        Self::with_tolerance(entries, DEFAULT_HERMITICITY_TOL)
    }

    /// Same as [`HermitianMatrix::new`] with an explicit relative Hermiticity tolerance.
    pub fn with_tolerance(entries: DMatrix<Complex64>, tol_rel: f64) -> Result<Self> {
        let (r, c) = entries.shape();
        if r != c {
            return Err(Error::DimensionMismatch { left: r, right: c });
        }
        if r == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if r > DEFAULT_DIM_MAX {
            return Err(Error::DimensionLimit {
                dim: r,
                max: DEFAULT_DIM_MAX,
            });
        }
        if !all_finite(&entries) {
            return Err(Error::NonFinite);
        }
        let scale = max_abs(&entries);
        let tolerance = tol_rel * scale.max(f64::MIN_POSITIVE);
        let mut max_violation = 0.0_f64;
        for i in 0..r {
            for j in 0..r {
                let v = (entries[(i, j)] - entries[(j, i)].conj()).norm();
                max_violation = max_violation.max(v);
            }
        }
        if max_violation > tolerance {
            return Err(Error::NotHermitian {
                max_violation,
                tolerance,
            });
        }
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// H -> c H for real c. Used by the coefficient-rescaling checks.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            entries: self.entries.map(|z| z * c),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// An operator viewed as a vector in the d^2-dimensional trace-inner-product space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorState {
    entries: DMatrix<Complex64>,
}

impl OperatorState {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        let (r, c) = entries.shape();
        if r != c {
            return Err(Error::DimensionMismatch { left: r, right: c });
        }
        if r == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if !all_finite(&entries) {
            return Err(Error::NonFinite);
        }
        Ok(Self { entries })
    }

    /// The identity operator on a d-dimensional space.
    pub fn identity(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim),
        }
    }

    pub fn from_hermitian(h: &HermitianMatrix) -> Self {
        Self {
            entries: h.entries.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// sqrt(Tr(O^dagger O)).
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Unit-norm copy; zero operators are rejected.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroSeed);
        }
        Ok(Self {
            entries: self.entries.map(|z| z / n),
        })
    }

    /// O - Tr(O)/d * I. Convenient for traceless seeds.
    pub fn traceless(&self) -> Self {
        let d = self.dim();
        let tr = self.entries.trace() / Complex64::new(d as f64, 0.0);
        let mut entries = self.entries.clone();
        for i in 0..d {
            entries[(i, i)] -= tr;
        }
        Self { entries }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            entries: self.entries.map(|z| z * c),
        }
    }

    pub fn add_scaled(&self, other: &Self, c: Complex64) -> Self {
        Self {
            entries: &self.entries + other.entries.map(|z| z * c),
        }
    }
}

/// (a|b) = Tr(a^dagger b). Conjugate-symmetric; rejects mismatched dimensions.
pub fn inner_product(a: &OperatorState, b: &OperatorState) -> Result<Complex64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(a.entries.dotc(&b.entries))
}

/// The commutator action O -> [H, O] of a fixed Hamiltonian.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    hamiltonian: HermitianMatrix,
}

impl Liouvillian {
    pub fn new(hamiltonian: HermitianMatrix) -> Self {
        Self { hamiltonian }
    }

    pub fn hamiltonian(&self) -> &HermitianMatrix {
        &self.hamiltonian
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    /// [H, O] = HO - OH.
    pub fn apply(&self, o: &OperatorState) -> Result<OperatorState> {
        if o.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: o.dim(),
            });
        }
        let h = &self.hamiltonian.entries;
        let entries = h * &o.entries - &o.entries * h;
        Ok(OperatorState { entries })
    }

    /// Evolves `o` for time `t` under the flow i dO/dt = [H, O].
    ///
    /// Exact at machine precision via eigendecomposition of H; for repeated
    /// times prefer a cached [`HeisenbergPropagator`].
    pub fn heisenberg_oracle(&self, o: &OperatorState, t: f64) -> Result<OperatorState> {
        HeisenbergPropagator::new(self)?.evolve(o, t)
    }
}

/// Cached eigendecomposition of H for repeated exact evolution.
#[derive(Debug, Clone)]
pub struct HeisenbergPropagator {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl HeisenbergPropagator {
    pub fn new(l: &Liouvillian) -> Result<Self> {
        let eig = l.hamiltonian.entries.clone().symmetric_eigen();
        Ok(Self {
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// O(t) = U O U^dagger with U = exp([`HEISENBERG_SIGN`] i H t).
    pub fn evolve(&self, o: &OperatorState, t: f64) -> Result<OperatorState> {
        if o.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: o.dim(),
            });
        }
        if !t.is_finite() {
            return Err(Error::InvalidInput("time must be finite".into()));
        }
        let d = self.dim();
        let v = &self.eigenvectors;
        // U = V diag(exp(s i lambda t)) V^dagger
        let mut u = DMatrix::<Complex64>::zeros(d, d);
        for k in 0..d {
            let phase = Complex64::from_polar(1.0, HEISENBERG_SIGN * self.eigenvalues[k] * t);
            let col = v.column(k);
            for i in 0..d {
                let ci = col[i] * phase;
                for j in 0..d {
                    u[(i, j)] += ci * col[j].conj();
                }
            }
        }
        let entries = &u * &o.entries * u.adjoint();
        Ok(OperatorState { entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{sigma_x, sigma_y, sigma_z};
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    pub(crate) fn random_hermitian(dim: usize, rng: &mut StdRng) -> HermitianMatrix {
        let g = DMatrix::from_fn(dim, dim, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let herm = (&g + g.adjoint()).map(|z| z * 0.5);
        HermitianMatrix::new(herm).unwrap()
    }

    fn op(m: DMatrix<Complex64>) -> OperatorState {
        OperatorState::new(m).unwrap()
    }

    #[test]
    fn inner_product_examples() {
        let inv_sqrt2 = Complex64::new(1.0 / 2.0_f64.sqrt(), 0.0);
        let a = op(sigma_x().map(|z| z * inv_sqrt2));
        let v = inner_product(&a, &a).unwrap();
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-14);

        let x = op(sigma_x());
        let y = op(sigma_y());
        let v = inner_product(&x, &y).unwrap();
        assert_abs_diff_eq!(v.norm(), 0.0, epsilon = 1e-14);

        let id = OperatorState::identity(2);
        let v = inner_product(&id, &id).unwrap();
        assert_abs_diff_eq!(v.re, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn inner_product_conjugate_symmetric() {
        let mut rng = StdRng::seed_from_u64(7);
        let a = op(random_hermitian(3, &mut rng).entries().clone());
        let g = DMatrix::from_fn(3, 3, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let b = op(g);
        let ab = inner_product(&a, &b).unwrap();
        let ba = inner_product(&b, &a).unwrap();
        assert_abs_diff_eq!(ab.re, ba.re, epsilon = 1e-13);
        assert_abs_diff_eq!(ab.im, -ba.im, epsilon = 1e-13);
    }

    #[test]
    fn inner_product_rejects_dimension_mismatch() {
        let a = OperatorState::identity(2);
        let b = OperatorState::identity(3);
        assert!(matches!(
            inner_product(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn self_inner_product_real_nonnegative() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let g = DMatrix::from_fn(4, 4, |_, _| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let o = op(g);
            let v = inner_product(&o, &o).unwrap();
            assert!(v.im.abs() < 1e-14);
            assert!(v.re >= 0.0);
        }
    }

    #[test]
    fn liouvillian_on_sigma_x() {
        // H = (1/2) sigma_z: [H, sigma_x] = i sigma_y
        let h = HermitianMatrix::new(sigma_z().map(|z| z * 0.5)).unwrap();
        let l = Liouvillian::new(h);
        let out = l.apply(&op(sigma_x())).unwrap();
        let want = sigma_y().map(|z| z * Complex64::i());
        assert!((out.entries() - want).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn liouvillian_annihilates_identity_and_h() {
        let mut rng = StdRng::seed_from_u64(3);
        let h = random_hermitian(4, &mut rng);
        let l = Liouvillian::new(h.clone());
        let zero_id = l.apply(&OperatorState::identity(4)).unwrap();
        assert!(zero_id.norm() < 1e-13);
        let zero_h = l.apply(&OperatorState::from_hermitian(&h)).unwrap();
        assert!(zero_h.norm() < 1e-13);
    }

    #[test]
    fn commutator_output_traceless_and_antihermitian() {
        let mut rng = StdRng::seed_from_u64(5);
        let h = random_hermitian(5, &mut rng);
        let seed = random_hermitian(5, &mut rng);
        let l = Liouvillian::new(h);
        let out = l.apply(&OperatorState::from_hermitian(&seed)).unwrap();
        assert!(out.entries().trace().norm() < 1e-12);
        // [H, O]^dagger = -[H, O] for Hermitian H, O
        let sum = out.entries() + out.entries().adjoint();
        assert!(sum.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn oracle_identity_at_t_zero() {
        let mut rng = StdRng::seed_from_u64(9);
        let h = random_hermitian(3, &mut rng);
        let o = op(random_hermitian(3, &mut rng).entries().clone());
        let l = Liouvillian::new(h);
        let out = l.heisenberg_oracle(&o, 0.0).unwrap();
        assert!((out.entries() - o.entries()).iter().all(|z| z.norm() < 1e-13));
    }

    #[test]
    fn oracle_qubit_half_period() {
        // H = (1/2) sigma_z, O = sigma_x: O(t) = cos(t) sigma_x + sin(t) sigma_y,
        // so O(pi) = -sigma_x and the overlap with the normalized seed is cos(t).
        let h = HermitianMatrix::new(sigma_z().map(|z| z * 0.5)).unwrap();
        let l = Liouvillian::new(h);
        let o = op(sigma_x());
        let out = l.heisenberg_oracle(&o, std::f64::consts::PI).unwrap();
        let minus_x = sigma_x().map(|z| -z);
        assert!((out.entries() - minus_x).iter().all(|z| z.norm() < 1e-12));

        let seed = o.normalized().unwrap();
        let overlap = inner_product(&seed, &out.normalized().unwrap()).unwrap();
        assert_abs_diff_eq!(overlap.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn oracle_satisfies_defining_ode() {
        // Finite-difference check of i dO/dt = [H, O(t)]; this pins HEISENBERG_SIGN.
        let mut rng = StdRng::seed_from_u64(21);
        let h = random_hermitian(4, &mut rng);
        let l = Liouvillian::new(h);
        let o = op(random_hermitian(4, &mut rng).entries().clone());
        let prop = HeisenbergPropagator::new(&l).unwrap();
        let eps = 1e-6;
        let plus = prop.evolve(&o, eps).unwrap();
        let minus = prop.evolve(&o, -eps).unwrap();
        let fd = (plus.entries() - minus.entries()).map(|z| z / Complex64::new(2.0 * eps, 0.0));
        let rhs = l.apply(&o).unwrap();
        // i * dO/dt == [H, O]
        let lhs = fd.map(|z| z * Complex64::i());
        let err = (lhs - rhs.entries()).iter().fold(0.0_f64, |a, z| a.max(z.norm()));
        assert!(err < 1e-7, "ODE sign check failed: residual {err}");
    }

    #[test]
    fn oracle_preserves_norm_and_inner_products() {
        let mut rng = StdRng::seed_from_u64(13);
        let h = random_hermitian(4, &mut rng);
        let l = Liouvillian::new(h);
        let prop = HeisenbergPropagator::new(&l).unwrap();
        let a = op(random_hermitian(4, &mut rng).entries().clone());
        let g = DMatrix::from_fn(4, 4, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let b = op(g);
        let t = 1.7;
        let at = prop.evolve(&a, t).unwrap();
        let bt = prop.evolve(&b, t).unwrap();
        assert_abs_diff_eq!(at.norm(), a.norm(), epsilon = 1e-10);
        let before = inner_product(&a, &b).unwrap();
        let after = inner_product(&at, &bt).unwrap();
        assert!((before - after).norm() < 1e-10);
    }

    #[test]
    fn hermitian_validation() {
        let mut m = sigma_x();
        m[(0, 1)] += Complex64::new(1e-6, 0.0);
        let err = HermitianMatrix::new(m).unwrap_err();
        match err {
            Error::NotHermitian { max_violation, .. } => {
                assert!(max_violation > 1e-7);
            }
            other => panic!("expected NotHermitian, got {other:?}"),
        }
    }

    #[test]
    fn dimension_cap_enforced() {
        let m = DMatrix::<Complex64>::identity(65, 65);
        assert!(matches!(
            HermitianMatrix::new(m),
            Err(Error::DimensionLimit { dim: 65, max: 64 })
        ));
    }

    #[test]
    fn zero_seed_rejected() {
        let z = OperatorState::new(DMatrix::zeros(2, 2)).unwrap();
        assert!(matches!(z.normalized(), Err(Error::ZeroSeed)));
    }
}
