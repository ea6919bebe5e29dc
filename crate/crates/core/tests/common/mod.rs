//! Shared fixtures for the integration and acceptance suites.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use ksphere_core::operator_space::{HermitianMatrix, Liouvillian, OperatorState};
use ksphere_core::pauli::{sigma_x, sigma_z};

pub fn random_hermitian(dim: usize, rng: &mut StdRng) -> HermitianMatrix {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    HermitianMatrix::new((&g + g.adjoint()).map(|z| z * 0.5)).unwrap()
}

pub fn random_traceless_seed(dim: usize, rng: &mut StdRng) -> OperatorState {
    OperatorState::from_hermitian(&random_hermitian(dim, rng)).traceless()
}

pub fn qubit_z_liouvillian(omega: f64) -> Liouvillian {
    Liouvillian::new(HermitianMatrix::new(sigma_z().map(|z| z * (omega / 2.0))).unwrap())
}

pub fn qubit_transverse_liouvillian(omega: f64, h: f64) -> Liouvillian {
    let m = sigma_z().map(|z| z * (omega / 2.0)) + sigma_x().map(|z| z * (h / 2.0));
    Liouvillian::new(HermitianMatrix::new(m).unwrap())
}

pub fn seed_sigma_x() -> OperatorState {
    OperatorState::new(sigma_x()).unwrap()
}

pub fn grid(t_max: f64, samples: usize) -> Vec<f64> {
    (0..samples)
        .map(|i| t_max * i as f64 / (samples - 1) as f64)
        .collect()
}

pub fn seeded_rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}
