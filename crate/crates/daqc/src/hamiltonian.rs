//! Spin Hamiltonians as real-weighted sums of Pauli words.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DaqcError, Result};
use crate::pauli::PauliWord;
use crate::state::{check_qubits, StateVector};

/// `H = sum_w c_w P_w` with real `c_w` (so Hermitian by construction).
///
/// Terms are kept in a sorted map keyed by word; adding an existing word
/// merges coefficients and exact cancellations are removed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HamiltonianDoc", into = "HamiltonianDoc")]
pub struct SpinHamiltonian {
    n_qubits: usize,
    terms: BTreeMap<PauliWord, f64>,
}

/// JSON shape: `{n_qubits, terms: [{coeff, word: "IZXY"}]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HamiltonianDoc {
    pub n_qubits: usize,
    pub terms: Vec<TermDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermDoc {
    pub coeff: f64,
    pub word: PauliWord,
}

impl TryFrom<HamiltonianDoc> for SpinHamiltonian {
    type Error = DaqcError;

    fn try_from(doc: HamiltonianDoc) -> Result<Self> {
        SpinHamiltonian::from_terms(doc.n_qubits, doc.terms.into_iter().map(|t| (t.coeff, t.word)))
    }
}

impl From<SpinHamiltonian> for HamiltonianDoc {
    fn from(h: SpinHamiltonian) -> Self {
        HamiltonianDoc {
            n_qubits: h.n_qubits,
            terms: h
                .terms
                .into_iter()
                .map(|(word, coeff)| TermDoc { coeff, word })
                .collect(),
        }
    }
}

impl SpinHamiltonian {
    pub fn new(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        Ok(SpinHamiltonian {
            n_qubits,
            terms: BTreeMap::new(),
        })
    }

    pub fn from_terms(
        n_qubits: usize,
        terms: impl IntoIterator<Item = (f64, PauliWord)>,
    ) -> Result<Self> {
        let mut h = SpinHamiltonian::new(n_qubits)?;
        for (c, w) in terms {
            h.add(c, w)?;
        }
        Ok(h)
    }

    pub fn add(&mut self, coeff: f64, word: PauliWord) -> Result<()> {
        if word.len() != self.n_qubits {
            return Err(DaqcError::DimensionMismatch {
                expected: self.n_qubits,
                found: word.len(),
            });
        }
        if !coeff.is_finite() {
            return Err(DaqcError::NonFiniteCoefficient {
                word: word.to_string(),
                value: coeff,
            });
        }
        if coeff == 0.0 {
            return Ok(());
        }
        let entry = self.terms.entry(word).or_insert(0.0);
        *entry += coeff;
        if *entry == 0.0 {
            self.terms.retain(|_, c| *c != 0.0);
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliWord, f64)> {
        self.terms.iter().map(|(w, c)| (w, *c))
    }

    pub fn coefficient(&self, word: &PauliWord) -> f64 {
        self.terms.get(word).copied().unwrap_or(0.0)
    }

    pub fn is_z_diagonal(&self) -> bool {
        self.terms.keys().all(PauliWord::is_z_diagonal)
    }

    /// Sum of absolute coefficients, an upper bound on the spectral norm.
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).sum()
    }

    pub fn scaled(&self, factor: f64) -> SpinHamiltonian {
        let mut out = SpinHamiltonian {
            n_qubits: self.n_qubits,
            terms: BTreeMap::new(),
        };
        for (w, c) in &self.terms {
            // scaling by a finite factor keeps coefficients finite
            let _ = out.add(c * factor, w.clone());
        }
        out
    }

    pub fn plus(&self, other: &SpinHamiltonian) -> Result<SpinHamiltonian> {
        let mut out = self.clone();
        for (w, c) in other.terms() {
            out.add(c, w.clone())?;
        }
        Ok(out)
    }

    /// Drops terms with `|c| <= tol`.
    pub fn pruned(&self, tol: f64) -> SpinHamiltonian {
        SpinHamiltonian {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.abs() > tol)
                .map(|(w, c)| (w.clone(), *c))
                .collect(),
        }
    }

    /// Largest coefficient-wise difference `max_w |a_w - b_w|`.
    pub fn max_coefficient_diff(&self, other: &SpinHamiltonian) -> f64 {
        self.terms
            .keys()
            .chain(other.terms.keys())
            .map(|w| (self.coefficient(w) - other.coefficient(w)).abs())
            .fold(0.0, f64::max)
    }

    pub fn operator(&self) -> PauliOperator {
        PauliOperator::new(self)
    }

    pub fn matrix(&self) -> Result<DMatrix<Complex64>> {
        Ok(self.operator().matrix())
    }
}

/// A Hamiltonian grouped by X-flip mask for fast application to states.
///
/// For each flip mask `x` the group stores `d_x[b]` so that
/// `(H psi)[b ^ x] += d_x[b] psi[b]`.
#[derive(Clone, Debug)]
pub struct PauliOperator {
    n_qubits: usize,
    groups: Vec<(usize, Vec<Complex64>)>,
}

impl PauliOperator {
    pub fn new(h: &SpinHamiltonian) -> Self {
        let dim = h.dim();
        let mut by_mask: BTreeMap<usize, Vec<Complex64>> = BTreeMap::new();
        for (word, c) in h.terms() {
            let m = word.masks();
            let phase = m.y_phase() * c;
            let diag = by_mask
                .entry(m.x)
                .or_insert_with(|| vec![Complex64::new(0.0, 0.0); dim]);
            for (b, d) in diag.iter_mut().enumerate() {
                if (b & m.z).count_ones() % 2 == 0 {
                    *d += phase;
                } else {
                    *d -= phase;
                }
            }
        }
        PauliOperator {
            n_qubits: h.n_qubits(),
            groups: by_mask.into_iter().collect(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Diagonal entries when the operator has no flipping terms.
    pub fn diagonal(&self) -> Option<Vec<f64>> {
        match self.groups.as_slice() {
            [] => Some(vec![0.0; self.dim()]),
            [(0, d)] => Some(d.iter().map(|c| c.re).collect()),
            _ => None,
        }
    }

    /// Upper bound on the spectral norm: each group is a permutation times a diagonal.
    pub fn norm_bound(&self) -> f64 {
        self.groups
            .iter()
            .map(|(_, d)| d.iter().map(|c| c.norm()).fold(0.0, f64::max))
            .sum()
    }

    /// `out = H psi`.
    pub fn apply_into(&self, psi: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        for (x, d) in &self.groups {
            for (b, (&p, &c)) in psi.iter().zip(d).enumerate() {
                out[b ^ x] += c * p;
            }
        }
    }

    pub fn apply(&self, psi: &StateVector) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); psi.dim()];
        self.apply_into(psi.amplitudes(), &mut out);
        out
    }

    pub fn matrix(&self) -> DMatrix<Complex64> {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for (x, d) in &self.groups {
            for (b, c) in d.iter().enumerate() {
                m[(b ^ x, b)] += *c;
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(s: &str) -> PauliWord {
        s.parse().unwrap()
    }

    #[test]
    fn merging_and_cancellation() {
        let mut h = SpinHamiltonian::new(2).unwrap();
        h.add(1.0, word("ZZ")).unwrap();
        h.add(0.5, word("ZZ")).unwrap();
        assert_eq!(h.coefficient(&word("ZZ")), 1.5);
        h.add(-1.5, word("ZZ")).unwrap();
        assert!(h.is_empty());
    }

    #[test]
    fn rejects_bad_terms() {
        let mut h = SpinHamiltonian::new(2).unwrap();
        assert!(h.add(f64::NAN, word("ZZ")).is_err());
        assert!(h.add(1.0, word("ZZZ")).is_err());
    }

    #[test]
    fn json_round_trip() {
        let h = SpinHamiltonian::from_terms(3, [(0.5, word("ZZI")), (-1.0, word("XIY"))]).unwrap();
        let s = serde_json::to_string(&h).unwrap();
        assert!(s.contains("\"word\":\"XIY\""));
        let back: SpinHamiltonian = serde_json::from_str(&s).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn operator_matches_matrix_action() {
        let h = SpinHamiltonian::from_terms(
            3,
            [(0.3, word("XYZ")), (-0.7, word("ZIZ")), (1.1, word("IYI"))],
        )
        .unwrap();
        let m = h.matrix().unwrap();
        assert!((m.adjoint() - &m).norm() < 1e-14);
        let psi = StateVector::from_amplitudes(
            (0..8).map(|k| Complex64::new(k as f64, 1.0 - k as f64)).collect(),
        )
        .unwrap();
        let fast = h.operator().apply(&psi);
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        let dense = &m * v;
        for (a, b) in fast.iter().zip(dense.iter()) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
