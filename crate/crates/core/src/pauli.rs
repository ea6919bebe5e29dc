//! Weighted Pauli-string sums and their dense realization.
//!
//! Ingestion format for spin Hamiltonians: a list of (real coefficient,
//! string over {I, X, Y, Z}) pairs. Qubit 0 is the first character of each
//! string and the leftmost Kronecker factor.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator_space::{HermitianMatrix, DEFAULT_DIM_MAX};

pub fn sigma_x() -> DMatrix<Complex64> {
    DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ],
    )
}

pub fn sigma_y() -> DMatrix<Complex64> {
    DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 0.0),
        ],
    )
}

pub fn sigma_z() -> DMatrix<Complex64> {
    DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ],
    )
}

fn single(ch: char) -> Result<DMatrix<Complex64>> {
    match ch {
        'I' => Ok(DMatrix::identity(2, 2)),
        'X' => Ok(sigma_x()),
        'Y' => Ok(sigma_y()),
        'Z' => Ok(sigma_z()),
        other => Err(Error::InvalidInput(format!(
            "unknown Pauli letter '{other}'; expected one of I, X, Y, Z"
        ))),
    }
}

/// Dense Kronecker-product realization of one Pauli string.
pub fn pauli_string_matrix(s: &str) -> Result<DMatrix<Complex64>> {
    if s.is_empty() {
        return Err(Error::InvalidInput("empty Pauli string".into()));
    }
    let mut chars = s.chars();
    let mut m = single(chars.next().unwrap())?;
    for ch in chars {
        m = m.kronecker(&single(ch)?);
    }
    Ok(m)
}

/// A real-weighted sum of Pauli strings on a fixed number of qubits.
#[derive(Debug, Clone)]
pub struct PauliStringSum {
    num_qubits: usize,
    terms: Vec<(f64, String)>,
}

impl PauliStringSum {
    pub fn new(num_qubits: usize, terms: Vec<(f64, String)>) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidInput("num_qubits must be positive".into()));
        }
        let dim = 1usize
            .checked_shl(num_qubits as u32)
            .ok_or(Error::DimensionLimit {
                dim: usize::MAX,
                max: DEFAULT_DIM_MAX,
            })?;
        if dim > DEFAULT_DIM_MAX {
            return Err(Error::DimensionLimit {
                dim,
                max: DEFAULT_DIM_MAX,
            });
        }
        for (coeff, s) in &terms {
            if !coeff.is_finite() {
                return Err(Error::NonFinite);
            }
            if s.chars().count() != num_qubits {
                return Err(Error::InvalidInput(format!(
                    "Pauli string '{s}' has length {} but num_qubits is {num_qubits}",
                    s.chars().count()
                )));
            }
        }
        Ok(Self { num_qubits, terms })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn terms(&self) -> &[(f64, String)] {
        &self.terms
    }

    /// Dense realization; Hermitian by construction since coefficients are real.
    pub fn realize(&self) -> Result<HermitianMatrix> {
        let dim = self.dim();
        let mut total = DMatrix::<Complex64>::zeros(dim, dim);
        for (coeff, s) in &self.terms {
            let m = pauli_string_matrix(s)?;
            total += m.map(|z| z * *coeff);
        }
        HermitianMatrix::new(total)
    }
}
