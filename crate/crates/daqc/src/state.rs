//! Pure-state vectors over `2^N` computational-basis amplitudes.

use std::str::FromStr;

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::error::{DaqcError, Result};
use crate::MAX_QUBITS;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Computational basis state `|index>`; qubit 0 is the most significant bit.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(DaqcError::InvalidArgument(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    /// Normalizes the given amplitudes; errors if the length is not a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(DaqcError::InvalidArgument(format!(
                "state dimension {dim} is not a power of two"
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_qubits(n_qubits)?;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(DaqcError::InvalidArgument("zero or non-finite state".into()));
        }
        Ok(StateVector {
            n_qubits,
            amps: amps.into_iter().map(|a| a / norm).collect(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(DaqcError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Applies a 2x2 matrix on `qubit`.
    pub fn apply_single(&mut self, qubit: usize, m: &Matrix2<Complex64>) {
        let stride = 1usize << (self.n_qubits - 1 - qubit);
        let dim = self.amps.len();
        let mut base = 0;
        while base < dim {
            for i in base..base + stride {
                let a0 = self.amps[i];
                let a1 = self.amps[i + stride];
                self.amps[i] = m[(0, 0)] * a0 + m[(0, 1)] * a1;
                self.amps[i + stride] = m[(1, 0)] * a0 + m[(1, 1)] * a1;
            }
            base += 2 * stride;
        }
    }

    /// Applies a 4x4 matrix on the ordered pair `(q_hi, q_lo)`; `q_hi` is the
    /// more significant factor of the 4x4 basis.
    pub fn apply_two(&mut self, q_hi: usize, q_lo: usize, m: &Matrix4<Complex64>) {
        assert_ne!(q_hi, q_lo);
        let n = self.n_qubits;
        let bh = 1usize << (n - 1 - q_hi);
        let bl = 1usize << (n - 1 - q_lo);
        for i in 0..self.amps.len() {
            if i & bh != 0 || i & bl != 0 {
                continue;
            }
            let idx = [i, i | bl, i | bh, i | bh | bl];
            let v = idx.map(|k| self.amps[k]);
            for (r, &k) in idx.iter().enumerate() {
                self.amps[k] = (0..4).map(|c| m[(r, c)] * v[c]).sum();
            }
        }
    }

    pub fn scale(&mut self, c: Complex64) {
        for a in &mut self.amps {
            *a *= c;
        }
    }
}

/// Parses `u`/`d` spin strings (`u` = spin up = `|0>`) or `0`/`1` bit strings.
impl FromStr for StateVector {
    type Err = DaqcError;

    fn from_str(s: &str) -> Result<Self> {
        let mut index = 0usize;
        let mut n = 0;
        for c in s.chars() {
            let bit = match c {
                'u' | 'U' | '0' | '↑' => 0,
                'd' | 'D' | '1' | '↓' => 1,
                _ => {
                    return Err(DaqcError::InvalidArgument(format!(
                        "bad initial state `{s}`"
                    )))
                }
            };
            index = (index << 1) | bit;
            n += 1;
        }
        StateVector::basis(n, index)
    }
}

/// `|<a|b>|^2`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

pub(crate) fn check_qubits(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        Err(DaqcError::DimensionOverflow {
            n_qubits,
            max: MAX_QUBITS,
        })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fidelity_examples() {
        let a: StateVector = "00".parse().unwrap();
        let b: StateVector = "11".parse().unwrap();
        assert_eq!(fidelity(&a, &a).unwrap(), 1.0);
        assert_eq!(fidelity(&a, &b).unwrap(), 0.0);
        let zero = StateVector::basis(1, 0).unwrap();
        let plus = StateVector::from_amplitudes(vec![Complex64::new(1.0, 0.0); 2]).unwrap();
        assert!((fidelity(&zero, &plus).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fidelity_dimension_mismatch() {
        let a = StateVector::basis(1, 0).unwrap();
        let b = StateVector::basis(2, 0).unwrap();
        assert!(matches!(
            fidelity(&a, &b),
            Err(DaqcError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn spin_string_ordering() {
        let s: StateVector = "ddudd".parse().unwrap();
        assert_eq!(s.n_qubits(), 5);
        assert_eq!(s.amplitudes()[0b11011].re, 1.0);
    }

    #[test]
    fn apply_single_targets_msb_for_qubit_zero() {
        let mut s = StateVector::basis(2, 0).unwrap();
        s.apply_single(0, &crate::pauli::Pauli::X.matrix());
        assert_eq!(s.amplitudes()[0b10].re, 1.0);
    }
}
