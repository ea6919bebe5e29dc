//! JSON ingestion formats for Hamiltonians and seed operators.
//!
//! Dense input: `{"dim": d, "re": [[...]], "im": [[...]]}`.
//! Spin input: `{"qubits": n, "terms": [[coeff, "XZI..."], ...]}`.
//! Non-Hermitian dense input is rejected with the max violation in the
//! message.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator_space::{HermitianMatrix, OperatorState};
use crate::pauli::{pauli_string_matrix, PauliStringSum};

/// Dense complex matrix layout shared by Hamiltonian and operator files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DenseMatrixFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl DenseMatrixFile {
    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        let d = self.dim;
        if d == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if self.re.len() != d || self.im.len() != d {
            return Err(Error::InvalidInput(format!(
                "expected {d} rows, got re: {}, im: {}",
                self.re.len(),
                self.im.len()
            )));
        }
        for (label, rows) in [("re", &self.re), ("im", &self.im)] {
            if let Some(row) = rows.iter().find(|r| r.len() != d) {
                return Err(Error::InvalidInput(format!(
                    "{label} row of length {} in a dim-{d} matrix",
                    row.len()
                )));
            }
        }
        Ok(DMatrix::from_fn(d, d, |i, j| {
            Complex64::new(self.re[i][j], self.im[i][j])
        }))
    }

    pub fn from_matrix(m: &DMatrix<Complex64>) -> Self {
        let d = m.nrows();
        Self {
            dim: d,
            re: (0..d)
                .map(|i| (0..d).map(|j| m[(i, j)].re).collect())
                .collect(),
            im: (0..d)
                .map(|i| (0..d).map(|j| m[(i, j)].im).collect())
                .collect(),
        }
    }
}

/// A Hamiltonian file: either a dense matrix or a Pauli-string sum.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum HamiltonianFile {
    Pauli {
        qubits: usize,
        terms: Vec<(f64, String)>,
    },
    Dense(DenseMatrixFile),
}

impl HamiltonianFile {
    pub fn realize(&self) -> Result<HermitianMatrix> {
        match self {
            HamiltonianFile::Dense(file) => HermitianMatrix::new(file.to_matrix()?),
            HamiltonianFile::Pauli { qubits, terms } => {
                PauliStringSum::new(*qubits, terms.clone())?.realize()
            }
        }
    }
}

pub fn hamiltonian_from_json(json: &str) -> Result<HermitianMatrix> {
    let file: HamiltonianFile =
        serde_json::from_str(json).map_err(|e| Error::InvalidInput(format!("bad Hamiltonian JSON: {e}")))?;
    file.realize()
}

/// A seed operator: a named Pauli string or a dense matrix.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    Pauli { pauli: String },
    Matrix { matrix: DenseMatrixFile },
}

impl SeedSpec {
    pub fn realize(&self) -> Result<OperatorState> {
        match self {
            SeedSpec::Pauli { pauli } => OperatorState::new(pauli_string_matrix(pauli)?),
            SeedSpec::Matrix { matrix } => OperatorState::new(matrix.to_matrix()?),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_hamiltonian_round_trip() {
        let json = r#"{"dim": 2, "re": [[0.5, 0.0], [0.0, -0.5]], "im": [[0.0, 0.0], [0.0, 0.0]]}"#;
        let h = hamiltonian_from_json(json).unwrap();
        assert_eq!(h.dim(), 2);
        assert_eq!(h.entries()[(0, 0)].re, 0.5);
    }

    #[test]
    fn pauli_hamiltonian_file() {
        let json = r#"{"qubits": 1, "terms": [[0.5, "Z"], [0.5, "X"]]}"#;
        let h = hamiltonian_from_json(json).unwrap();
        assert_eq!(h.dim(), 2);
        assert_eq!(h.entries()[(0, 1)].re, 0.5);
    }

    #[test]
    fn non_hermitian_rejected_with_violation() {
        let json = r#"{"dim": 2, "re": [[0.0, 1.0], [0.0, 0.0]], "im": [[0.0, 0.0], [0.0, 0.0]]}"#;
        let err = hamiltonian_from_json(json).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("not Hermitian"), "message: {msg}");
        assert!(msg.contains("1.0"), "message should name the violation: {msg}");
    }

    #[test]
    fn seed_specs() {
        let seed: SeedSpec = serde_json::from_str(r#"{"pauli": "X"}"#).unwrap();
        let o = seed.realize().unwrap();
        assert_eq!(o.dim(), 2);

        let seed: SeedSpec = serde_json::from_str(
            r#"{"matrix": {"dim": 2, "re": [[0.0, 1.0], [1.0, 0.0]], "im": [[0.0, 0.0], [0.0, 0.0]]}}"#,
        )
        .unwrap();
        assert_eq!(seed.realize().unwrap().dim(), 2);
    }

    #[test]
    fn ragged_matrix_rejected() {
        let json = r#"{"dim": 2, "re": [[0.0], [0.0, 0.0]], "im": [[0.0, 0.0], [0.0, 0.0]]}"#;
        assert!(hamiltonian_from_json(json).is_err());
    }
}
