//! Dense matrices, propagators and the exact evolution kernels.
//!
//! All analog evolutions use the `e^{+iHt}` convention unless a sign is passed
//! explicitly.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{DaqcError, Result};
use crate::hamiltonian::{PauliOperator, SpinHamiltonian};
use crate::pauli::PauliWord;
use crate::state::{check_qubits, StateVector};

/// Kronecker product of the single-qubit matrices of `word`, qubit 0 leftmost.
pub fn word_matrix(word: &PauliWord) -> Result<DMatrix<Complex64>> {
    check_qubits(word.len())?;
    let dim = 1usize << word.len();
    let m = word.masks();
    let phase = m.y_phase();
    let mut out = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        let sign = if (b & m.z).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
        out[(b ^ m.x, b)] = phase * sign;
    }
    Ok(out)
}

/// `e^{i t A}` for Hermitian `A` by eigendecomposition.
pub fn expm_i_hermitian(a: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let eig = SymmetricEigen::new(a.clone());
    let v = &eig.eigenvectors;
    let phases = eig
        .eigenvalues
        .map(|lambda| Complex64::from_polar(1.0, lambda * t));
    let mut scaled = v.clone();
    for (mut col, p) in scaled.column_iter_mut().zip(phases.iter()) {
        col *= *p;
    }
    scaled * v.adjoint()
}

/// A unitary kept diagonal when possible.
#[derive(Clone, Debug)]
pub enum Propagator {
    Diagonal(Vec<Complex64>),
    Dense(DMatrix<Complex64>),
}

impl Propagator {
    pub fn dim(&self) -> usize {
        match self {
            Propagator::Diagonal(d) => d.len(),
            Propagator::Dense(m) => m.nrows(),
        }
    }

    pub fn apply(&self, psi: &mut StateVector) {
        match self {
            Propagator::Diagonal(d) => {
                for (a, p) in psi.amplitudes_mut().iter_mut().zip(d) {
                    *a *= p;
                }
            }
            Propagator::Dense(m) => {
                let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
                let out = m * v;
                psi.amplitudes_mut().copy_from_slice(out.as_slice());
            }
        }
    }

    pub fn matrix(&self) -> DMatrix<Complex64> {
        match self {
            Propagator::Diagonal(d) => DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)),
            Propagator::Dense(m) => m.clone(),
        }
    }
}

/// `e^{+iHt}`.
pub fn propagator(h: &SpinHamiltonian, t: f64) -> Result<Propagator> {
    propagator_signed(h, t, 1.0)
}

/// `e^{i sign H t}`. Z-diagonal Hamiltonians take the closed-form phase path.
pub fn propagator_signed(h: &SpinHamiltonian, t: f64, sign: f64) -> Result<Propagator> {
    if !t.is_finite() {
        return Err(DaqcError::InvalidArgument(format!("non-finite time {t}")));
    }
    for (w, c) in h.terms() {
        if !c.is_finite() {
            return Err(DaqcError::NonFiniteCoefficient {
                word: w.to_string(),
                value: c,
            });
        }
    }
    let op = h.operator();
    Ok(match op.diagonal() {
        Some(d) => Propagator::Diagonal(
            d.iter()
                .map(|e| Complex64::from_polar(1.0, sign * e * t))
                .collect(),
        ),
        None => Propagator::Dense(expm_i_hermitian(&op.matrix(), sign * t)),
    })
}

/// Applies `e^{iHt}` to `psi` without forming the matrix.
///
/// Diagonal operators use exact phases; otherwise a scaled Taylor series is
/// summed to machine precision.
pub fn evolve(op: &PauliOperator, t: f64, psi: &mut StateVector) {
    if t == 0.0 {
        return;
    }
    if let Some(d) = op.diagonal() {
        for (a, e) in psi.amplitudes_mut().iter_mut().zip(d) {
            *a *= Complex64::from_polar(1.0, e * t);
        }
        return;
    }
    let bound = op.norm_bound();
    let steps = ((bound * t.abs()) / 0.5).ceil().max(1.0) as usize;
    let tau = t / steps as f64;
    let dim = psi.dim();
    let mut term = vec![Complex64::new(0.0, 0.0); dim];
    let mut next = vec![Complex64::new(0.0, 0.0); dim];
    let itau = Complex64::new(0.0, tau);
    for _ in 0..steps {
        let acc = psi.amplitudes_mut();
        term.copy_from_slice(acc);
        for k in 1..80 {
            op.apply_into(&term, &mut next);
            let f = itau / k as f64;
            let mut norm = 0.0;
            for (t_i, n_i) in term.iter_mut().zip(&next) {
                *t_i = n_i * f;
                norm += t_i.norm_sqr();
            }
            for (a, t_i) in acc.iter_mut().zip(&term) {
                *a += t_i;
            }
            if norm < 1e-34 {
                break;
            }
        }
    }
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// `max |U^dag U - I|` entrywise.
pub fn unitarity_error(u: &DMatrix<Complex64>) -> f64 {
    let p = u.adjoint() * u;
    let mut err: f64 = 0.0;
    for r in 0..p.nrows() {
        for c in 0..p.ncols() {
            let target = if r == c { 1.0 } else { 0.0 };
            err = err.max((p[(r, c)] - target).norm());
        }
    }
    err
}

/// `min_phi max |A - e^{i phi} B|` with `phi` taken from `arg tr(B^dag A)`.
pub fn phase_aligned_distance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let overlap: Complex64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - phase * y).norm())
        .fold(0.0, f64::max)
}

/// Builds the full matrix of a state map by acting on every basis state.
pub fn unitary_of<F>(n_qubits: usize, mut f: F) -> Result<DMatrix<Complex64>>
where
    F: FnMut(&mut StateVector) -> Result<()>,
{
    let dim = 1usize << n_qubits;
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut psi = StateVector::basis(n_qubits, col)?;
        f(&mut psi)?;
        for (row, a) in psi.amplitudes().iter().enumerate() {
            m[(row, col)] = *a;
        }
    }
    Ok(m)
}
