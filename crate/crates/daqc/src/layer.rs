//! Layers of single-qubit unitaries (the digital blocks).

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DaqcError, Result};
use crate::hamiltonian::SpinHamiltonian;
use crate::pauli::{Pauli, PauliWord};
use crate::state::StateVector;

const AXIS_TOL: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-9;

/// `r X + s Y + t Z` for a unit vector `(r, s, t)`: a Hermitian unitary reflection.
pub fn reflection(axis: [f64; 3]) -> Result<Matrix2<Complex64>> {
    let [r, s, t] = axis;
    let norm2 = r * r + s * s + t * t;
    if !(norm2 - 1.0).abs().le(&AXIS_TOL) {
        return Err(DaqcError::NonNormalizedAxis(r, s, t));
    }
    Ok(Pauli::X.matrix() * Complex64::from(r)
        + Pauli::Y.matrix() * Complex64::from(s)
        + Pauli::Z.matrix() * Complex64::from(t))
}

/// `exp(-i angle/2 n.sigma)`.
pub fn rotation(axis: [f64; 3], angle: f64) -> Result<Matrix2<Complex64>> {
    let n = reflection(axis)?;
    let (s, c) = (angle / 2.0).sin_cos();
    Ok(Matrix2::identity() * Complex64::from(c) - n * Complex64::new(0.0, s))
}

/// Canonical form `U = e^{i phase} exp(-i angle/2 n.sigma)` with `angle` in `[0, pi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisAngle {
    pub axis: [f64; 3],
    pub angle: f64,
    #[serde(default)]
    pub phase: f64,
}

impl AxisAngle {
    pub fn from_unitary(u: &Matrix2<Complex64>) -> Result<AxisAngle> {
        let dev = (u.adjoint() * u - Matrix2::identity()).norm();
        if dev > UNITARY_TOL {
            return Err(DaqcError::NotUnitary(dev));
        }
        let det = u.determinant();
        let mut phase = det.arg() / 2.0;
        let mut v = u * Complex64::from_polar(1.0, -phase);
        let mut c = v[(0, 0)].re;
        if c < 0.0 {
            v = -v;
            c = -c;
            phase += std::f64::consts::PI;
        }
        let nz = -v[(0, 0)].im;
        let nx = -(v[(0, 1)] + v[(1, 0)]).im / 2.0;
        let ny = (v[(1, 0)] - v[(0, 1)]).re / 2.0;
        let s = (nx * nx + ny * ny + nz * nz).sqrt();
        let (axis, angle) = if s < 1e-15 {
            ([0.0, 0.0, 1.0], 0.0)
        } else {
            ([nx / s, ny / s, nz / s], 2.0 * s.atan2(c))
        };
        Ok(AxisAngle { axis, angle, phase })
    }

    pub fn unitary(&self) -> Result<Matrix2<Complex64>> {
        Ok(rotation(self.axis, self.angle)? * Complex64::from_polar(1.0, self.phase))
    }

    /// Coefficients `(I, X, Y, Z)` of `G` with `e^{iG} = U` on the principal branch.
    pub fn generator(&self) -> [f64; 4] {
        let h = -self.angle / 2.0;
        [
            self.phase,
            h * self.axis[0],
            h * self.axis[1],
            h * self.axis[2],
        ]
    }
}

/// Per-qubit unitaries applied simultaneously; `None` is identity.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationLayer {
    n_qubits: usize,
    ops: Vec<Option<Matrix2<Complex64>>>,
}

impl RotationLayer {
    pub fn identity(n_qubits: usize) -> Self {
        RotationLayer {
            n_qubits,
            ops: vec![None; n_qubits],
        }
    }

    /// Reflection `r_q X + s_q Y + t_q Z` on every qubit `q`.
    pub fn reflections(axes: &[[f64; 3]]) -> Result<Self> {
        let ops = axes
            .iter()
            .map(|a| reflection(*a).map(Some))
            .collect::<Result<Vec<_>>>()?;
        Ok(RotationLayer {
            n_qubits: axes.len(),
            ops,
        })
    }

    /// `cos(theta_q/2) Z + sin(theta_q/2) X` on every qubit, which conjugates
    /// `Z` into `cos(theta_q) Z + sin(theta_q) X`.
    pub fn xz_reflections(thetas: &[f64]) -> Self {
        let axes: Vec<[f64; 3]> = thetas
            .iter()
            .map(|th| {
                let (s, c) = (th / 2.0).sin_cos();
                [s, 0.0, c]
            })
            .collect();
        RotationLayer::reflections(&axes).expect("unit axes")
    }

    /// The same Pauli on each listed qubit.
    pub fn paulis(n_qubits: usize, qubits: &[usize], p: Pauli) -> Self {
        let mut layer = RotationLayer::identity(n_qubits);
        for &q in qubits {
            layer.ops[q] = Some(p.matrix());
        }
        layer
    }

    pub fn from_ops(ops: Vec<Option<Matrix2<Complex64>>>) -> Result<Self> {
        for m in ops.iter().flatten() {
            let dev = (m.adjoint() * m - Matrix2::identity()).norm();
            if dev > UNITARY_TOL {
                return Err(DaqcError::NotUnitary(dev));
            }
        }
        Ok(RotationLayer {
            n_qubits: ops.len(),
            ops,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn op(&self, qubit: usize) -> Option<&Matrix2<Complex64>> {
        self.ops[qubit].as_ref()
    }

    pub fn set(&mut self, qubit: usize, m: Matrix2<Complex64>) {
        self.ops[qubit] = Some(m);
    }

    /// Layer equivalent to applying `self` and then `later`.
    pub fn then(&self, later: &RotationLayer) -> RotationLayer {
        let ops = self
            .ops
            .iter()
            .zip(&later.ops)
            .map(|(a, b)| match (a, b) {
                (None, None) => None,
                (Some(a), None) => Some(*a),
                (None, Some(b)) => Some(*b),
                (Some(a), Some(b)) => Some(b * a),
            })
            .collect();
        RotationLayer {
            n_qubits: self.n_qubits,
            ops,
        }
    }

    pub fn adjoint(&self) -> RotationLayer {
        RotationLayer {
            n_qubits: self.n_qubits,
            ops: self.ops.iter().map(|o| o.map(|m| m.adjoint())).collect(),
        }
    }

    /// True when every factor is the identity up to a phase.
    pub fn is_identity(&self, tol: f64) -> bool {
        self.ops.iter().flatten().all(|m| {
            let phase = m[(0, 0)];
            phase.norm() > 0.5
                && (m - Matrix2::identity() * phase).norm() < tol
        })
    }

    /// Drops factors equal to the identity up to phase.
    pub fn simplified(&self, tol: f64) -> RotationLayer {
        let ops = self
            .ops
            .iter()
            .map(|o| {
                o.filter(|m| {
                    let phase = m[(0, 0)];
                    !(phase.norm() > 0.5 && (m - Matrix2::identity() * phase).norm() < tol)
                })
            })
            .collect();
        RotationLayer {
            n_qubits: self.n_qubits,
            ops,
        }
    }

    pub fn active_qubits(&self) -> Vec<usize> {
        (0..self.n_qubits).filter(|q| self.ops[*q].is_some()).collect()
    }

    pub fn apply(&self, psi: &mut StateVector) {
        for (q, m) in self.ops.iter().enumerate() {
            if let Some(m) = m {
                psi.apply_single(q, m);
            }
        }
    }

    pub fn matrix(&self) -> DMatrix<Complex64> {
        let mut out = DMatrix::from_element(1, 1, Complex64::from(1.0));
        for m in &self.ops {
            let m = m.unwrap_or_else(Matrix2::identity);
            let dm = DMatrix::from_fn(2, 2, |r, c| m[(r, c)]);
            out = out.kronecker(&dm);
        }
        out
    }

    /// Canonical axis-angle form per qubit (`None` for identity factors).
    pub fn axis_angles(&self) -> Result<Vec<Option<AxisAngle>>> {
        self.ops
            .iter()
            .map(|o| o.as_ref().map(AxisAngle::from_unitary).transpose())
            .collect()
    }

    /// Hamiltonian `G` with `e^{iG} = U` on the principal branch, including the
    /// identity (global phase) part.
    pub fn generator(&self) -> Result<SpinHamiltonian> {
        let mut h = SpinHamiltonian::new(self.n_qubits)?;
        for (q, aa) in self.axis_angles()?.into_iter().enumerate() {
            let Some(aa) = aa else { continue };
            let g = aa.generator();
            h.add(g[0], PauliWord::identity(self.n_qubits))?;
            for (p, c) in Pauli::NONTRIVIAL.iter().zip(&g[1..]) {
                h.add(*c, PauliWord::from_sparse(self.n_qubits, &[(q, *p)])?)?;
            }
        }
        Ok(h)
    }

    /// Heisenberg image `U^dag H U` expanded in the Pauli basis.
    ///
    /// For a reflection layer `R = R^dag` this is `R H R`, and
    /// `U^dag e^{iHt} U = e^{i (U^dag H U) t}`.
    pub fn conjugate(&self, h: &SpinHamiltonian) -> Result<SpinHamiltonian> {
        if h.n_qubits() != self.n_qubits {
            return Err(DaqcError::DimensionMismatch {
                expected: self.n_qubits,
                found: h.n_qubits(),
            });
        }
        let images: Vec<Option<[[f64; 4]; 4]>> = self
            .ops
            .iter()
            .map(|o| o.as_ref().map(pauli_images))
            .collect();
        let mut out = SpinHamiltonian::new(self.n_qubits)?;
        for (word, coeff) in h.terms() {
            let mut partial: Vec<(f64, Vec<Pauli>)> = vec![(coeff, Vec::with_capacity(self.n_qubits))];
            for (q, p) in word.axes().iter().enumerate() {
                let expansion: Vec<(f64, Pauli)> = match (&images[q], p) {
                    (_, Pauli::I) | (None, _) => vec![(1.0, *p)],
                    (Some(img), p) => {
                        let row = img[pauli_index(*p)];
                        [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z]
                            .into_iter()
                            .zip(row)
                            .filter(|(_, c)| c.abs() > 1e-15)
                            .map(|(p, c)| (c, p))
                            .collect()
                    }
                };
                let mut next = Vec::with_capacity(partial.len() * expansion.len());
                for (c0, axes) in &partial {
                    for (c1, p1) in &expansion {
                        let mut a = axes.clone();
                        a.push(*p1);
                        next.push((c0 * c1, a));
                    }
                }
                partial = next;
            }
            for (c, axes) in partial {
                out.add(c, PauliWord::new(axes))?;
            }
        }
        Ok(out)
    }
}

fn pauli_index(p: Pauli) -> usize {
    match p {
        Pauli::I => 0,
        Pauli::X => 1,
        Pauli::Y => 2,
        Pauli::Z => 3,
    }
}

/// Row `a` holds the Pauli coefficients of `U^dag sigma_a U`.
fn pauli_images(u: &Matrix2<Complex64>) -> [[f64; 4]; 4] {
    let basis = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z].map(Pauli::matrix);
    let mut out = [[0.0; 4]; 4];
    for (a, sa) in basis.iter().enumerate() {
        let img = u.adjoint() * sa * u;
        for (b, sb) in basis.iter().enumerate() {
            out[a][b] = (sb * img).trace().re / 2.0;
        }
    }
    out
}

/// Applies `layer` to a copy of `psi`.
pub fn apply_rotation_layer(layer: &RotationLayer, psi: &StateVector) -> Result<StateVector> {
    if layer.n_qubits() != psi.n_qubits() {
        return Err(DaqcError::DimensionMismatch {
            expected: psi.n_qubits(),
            found: layer.n_qubits(),
        });
    }
    let mut out = psi.clone();
    layer.apply(&mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn xz_reflection_rotates_z_into_x() {
        let layer = RotationLayer::xz_reflections(&[PI / 2.0]);
        let z = SpinHamiltonian::from_terms(1, [(1.0, "Z".parse().unwrap())]).unwrap();
        let img = layer.conjugate(&z).unwrap().pruned(1e-14);
        assert!((img.coefficient(&"X".parse().unwrap()) - 1.0).abs() < 1e-14);
        assert_eq!(img.len(), 1);
    }

    #[test]
    fn theta_zero_reflection_is_z_and_squares_to_identity() {
        let layer = RotationLayer::xz_reflections(&[0.0, 0.0]);
        assert!((layer.op(0).unwrap() - Pauli::Z.matrix()).norm() < 1e-15);
        let sq = layer.then(&layer);
        assert!(sq.is_identity(1e-14));
    }

    #[test]
    fn non_normalized_axis_rejected() {
        assert!(matches!(
            RotationLayer::reflections(&[[1.0, 1.0, 0.0]]),
            Err(DaqcError::NonNormalizedAxis(..))
        ));
    }

    #[test]
    fn axis_angle_round_trip_and_generator() {
        let u = rotation([0.6, 0.0, 0.8], 2.5).unwrap() * Complex64::from_polar(1.0, 0.3);
        let aa = AxisAngle::from_unitary(&u).unwrap();
        assert!((aa.unitary().unwrap() - u).norm() < 1e-13);
        let layer = RotationLayer::from_ops(vec![Some(u)]).unwrap();
        let g = layer.generator().unwrap();
        let v = crate::linalg::propagator(&g, 1.0).unwrap().matrix();
        let um = layer.matrix();
        assert!((v - um).norm() < 1e-12);
    }

    #[test]
    fn reflection_generator_has_no_branch_ambiguity() {
        let r = reflection([0.0, 0.0, 1.0]).unwrap();
        let aa = AxisAngle::from_unitary(&r).unwrap();
        assert!((aa.angle - PI).abs() < 1e-14);
        assert!((aa.unitary().unwrap() - r).norm() < 1e-14);
    }
}
