//! Two-body XZ targets as Trotterized sums of four rotated ZZ evolutions.
//!
//! With `R_theta = cos(theta/2) Z + sin(theta/2) X` on every qubit,
//! `R Z_j Z_k R = (cos t_j Z + sin t_j X)(cos t_k Z + sin t_k X)`, so four angle
//! sets give four unknown ZZ strengths per pair and one 4x4 system per pair.

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{DaqcError, Result};
use crate::hamiltonian::SpinHamiltonian;
use crate::ising::{compile_ising_into, CompileReport, IsingOptions};
use crate::layer::RotationLayer;
use crate::pauli::{Pauli, PauliWord};
use crate::schedule::Schedule;

const MAX_PAIR_COND: f64 = 1e8;

/// Rows of every pair system.
pub const AXIS_ROWS: [(Pauli, Pauli); 4] = [
    (Pauli::X, Pauli::X),
    (Pauli::X, Pauli::Z),
    (Pauli::Z, Pauli::X),
    (Pauli::Z, Pauli::Z),
];

/// `theta[q][s]` for qubit `q` and angle set `s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleSet {
    pub theta: Vec<[f64; 4]>,
}

/// `theta_w^(s) = s pi w / (2 (w + 1))` with 1-based `s` and `w = q + 1`.
pub fn default_angles(n_qubits: usize) -> AngleSet {
    AngleSet {
        theta: (0..n_qubits)
            .map(|q| {
                let w = (q + 1) as f64;
                [1.0, 2.0, 3.0, 4.0].map(|s| s * PI * w / (2.0 * (w + 1.0)))
            })
            .collect(),
    }
}

fn alpha(p: Pauli, theta: f64) -> f64 {
    match p {
        Pauli::X => theta.sin(),
        _ => theta.cos(),
    }
}

/// Matrix mapping the four set strengths of pair `(j, k)` to its
/// `(XX, XZ, ZX, ZZ)` coefficients.
pub fn pair_matrix(angles: &AngleSet, j: usize, k: usize) -> Matrix4<f64> {
    Matrix4::from_fn(|row, s| {
        let (mu, nu) = AXIS_ROWS[row];
        alpha(mu, angles.theta[j][s]) * alpha(nu, angles.theta[k][s])
    })
}

/// Per-pair ZZ strengths of each angle set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairStrengths {
    pub pair: (usize, usize),
    pub target: [f64; 4],
    pub strengths: [f64; 4],
    pub condition_number: f64,
    pub residual: f64,
}

fn condition(m: &Matrix4<f64>) -> f64 {
    let sv = m.svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// XZ coefficients of `target` on pair `(j, k)` in [`AXIS_ROWS`] order.
fn pair_target(target: &SpinHamiltonian, j: usize, k: usize) -> Result<[f64; 4]> {
    let n = target.n_qubits();
    let mut out = [0.0; 4];
    for (row, (mu, nu)) in AXIS_ROWS.iter().enumerate() {
        out[row] = target.coefficient(&PauliWord::from_sparse(n, &[(j, *mu), (k, *nu)])?);
    }
    Ok(out)
}

/// Pairs carrying at least one target term; errors on anything outside the
/// two-body XZ family.
pub fn xz_pairs(target: &SpinHamiltonian) -> Result<Vec<(usize, usize)>> {
    let mut pairs = Vec::new();
    for (w, _) in target.terms() {
        let s = w.support();
        if s.len() != 2 || w.axes().contains(&Pauli::Y) {
            return Err(DaqcError::UnsupportedTerm(w.to_string()));
        }
        pairs.push((s[0], s[1]));
    }
    pairs.sort_unstable();
    pairs.dedup();
    Ok(pairs)
}

pub fn solve_pair_strengths(angles: &AngleSet, target: &SpinHamiltonian) -> Result<Vec<PairStrengths>> {
    if angles.theta.len() != target.n_qubits() {
        return Err(DaqcError::DimensionMismatch {
            expected: target.n_qubits(),
            found: angles.theta.len(),
        });
    }
    xz_pairs(target)?
        .into_iter()
        .map(|(j, k)| {
            let m = pair_matrix(angles, j, k);
            let cond = condition(&m);
            if !(cond <= MAX_PAIR_COND) {
                return Err(DaqcError::SingularPairSystem(j, k, cond));
            }
            let rhs = pair_target(target, j, k)?;
            let b = Vector4::from(rhs);
            let x = m.lu().solve(&b).ok_or(DaqcError::SingularPairSystem(j, k, cond))?;
            let scale = b.amax().max(f64::MIN_POSITIVE);
            let residual = (m * x - b).amax() / scale;
            Ok(PairStrengths {
                pair: (j, k),
                target: rhs,
                strengths: [x[0], x[1], x[2], x[3]],
                condition_number: cond,
                residual,
            })
        })
        .collect()
}

/// ZZ sub-target of angle set `s`.
pub fn sub_target(n_qubits: usize, strengths: &[PairStrengths], s: usize) -> Result<SpinHamiltonian> {
    SpinHamiltonian::from_terms(
        n_qubits,
        strengths
            .iter()
            .map(|p| (p.strengths[s], PauliWord::zz(n_qubits, p.pair.0, p.pair.1))),
    )
}

/// `sum_s R^(s) H^(s) R^(s)`, which equals the target when the solve is exact.
pub fn reconstruct(angles: &AngleSet, strengths: &[PairStrengths]) -> Result<SpinHamiltonian> {
    let n = angles.theta.len();
    let mut h = SpinHamiltonian::new(n)?;
    for s in 0..4 {
        let layer = set_layer(angles, s);
        h = h.plus(&layer.conjugate(&sub_target(n, strengths, s)?)?)?;
    }
    Ok(h)
}

fn set_layer(angles: &AngleSet, s: usize) -> RotationLayer {
    let th: Vec<f64> = angles.theta.iter().map(|t| t[s]).collect();
    RotationLayer::xz_reflections(&th)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct XzOptions {
    pub angles: Option<AngleSet>,
    /// Order `1,2,3,4,4,3,2,1` with half durations inside each step.
    pub symmetrized: bool,
    pub ising: IsingOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XzReport {
    pub angles: AngleSet,
    pub pairs: Vec<PairStrengths>,
    /// One entry per sub-schedule of a single Trotter step.
    pub sub_reports: Vec<CompileReport>,
    pub n_steps: usize,
    pub analog_blocks_per_step: usize,
    pub analog_time_per_step: f64,
}

/// Schedule for `e^{i t_F H_XZ}` as `n_steps` repetitions of the four rotated
/// ZZ evolutions.
pub fn compile_xz(
    target: &SpinHamiltonian,
    resource: &SpinHamiltonian,
    t_final: f64,
    n_steps: usize,
    opts: &XzOptions,
) -> Result<(Schedule, XzReport)> {
    let n = target.n_qubits();
    if n_steps == 0 {
        return Err(DaqcError::InvalidArgument("need at least one Trotter step".into()));
    }
    let angles = opts.angles.clone().unwrap_or_else(|| default_angles(n));
    let pairs = solve_pair_strengths(&angles, target)?;
    let dt = t_final / n_steps as f64;
    let order: Vec<(usize, f64)> = if opts.symmetrized {
        (0..4).chain((0..4).rev()).map(|s| (s, dt / 2.0)).collect()
    } else {
        (0..4).map(|s| (s, dt)).collect()
    };

    let mut step = Schedule::new(resource.clone());
    let mut sub_reports = Vec::with_capacity(order.len());
    if target.is_z_diagonal() {
        sub_reports.push(compile_ising_into(&mut step, target, dt, &opts.ising)?);
    }
    for (s, tau) in order.into_iter().filter(|_| !target.is_z_diagonal()) {
        let layer = set_layer(&angles, s);
        let sub = sub_target(n, &pairs, s)?;
        step.push_layer(layer.clone());
        sub_reports.push(compile_ising_into(&mut step, &sub, tau, &opts.ising)?);
        step.push_layer(layer);
    }
    let mut schedule = Schedule::new(resource.clone());
    for _ in 0..n_steps {
        schedule.mark_step();
        schedule.append(&step)?;
    }
    let report = XzReport {
        angles,
        pairs,
        analog_blocks_per_step: sub_reports.iter().map(|r| r.block_count).sum(),
        analog_time_per_step: sub_reports.iter().map(|r| r.total_analog_time).sum(),
        sub_reports,
        n_steps,
    };
    Ok((schedule, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::executor::run_sdaqc;
    use crate::linalg::propagator;
    use crate::models::{build_ising, build_xz_target, CouplingProfile, Topology};
    use crate::state::{fidelity, StateVector};

    fn paper_target(n: usize) -> SpinHamiltonian {
        let p = CouplingProfile::polynomial(0.5, 0.5);
        build_xz_target(n, &["xx", "xz", "zx", "zz"].map(|l| (l, p.clone())), Topology::Ata).unwrap()
    }

    #[test]
    fn default_angle_values() {
        let a = default_angles(3);
        assert!((a.theta[0][0] - PI / 4.0).abs() < 1e-15);
        assert!((a.theta[0][3] - PI).abs() < 1e-15);
        let d = (a.theta[0][0] - a.theta[1][0]).abs();
        assert!((d - PI / 12.0).abs() < 1e-15);
    }

    #[test]
    fn identical_sets_are_singular() {
        let angles = AngleSet { theta: vec![[0.3; 4]; 2] };
        let t = SpinHamiltonian::from_terms(2, [(1.0, "ZZ".parse().unwrap())]).unwrap();
        assert!(matches!(
            solve_pair_strengths(&angles, &t),
            Err(DaqcError::SingularPairSystem(0, 1, _))
        ));
    }

    #[test]
    fn reconstruction_is_exact() {
        let t = paper_target(5);
        let angles = default_angles(5);
        let p = solve_pair_strengths(&angles, &t).unwrap();
        assert_eq!(p.len(), 10);
        assert!(p.iter().all(|x| x.residual < 1e-10));
        let back = reconstruct(&angles, &p).unwrap();
        assert!(back.max_coefficient_diff(&t) < 1e-10);
    }

    #[test]
    fn pure_zz_target_is_exact_for_one_step() {
        let res = build_ising(3, &CouplingProfile::homogeneous(1.0), Topology::Ata).unwrap();
        let t = build_ising(3, &CouplingProfile::polynomial(0.7, 1.0), Topology::Ata).unwrap();
        let (s, _) = compile_xz(&t, &res, 1.0, 1, &XzOptions::default()).unwrap();
        let psi0: StateVector = "010".parse().unwrap();
        let plus = StateVector::from_amplitudes(vec![num_complex::Complex64::new(1.0, 0.0); 8]).unwrap();
        for psi in [psi0, plus] {
            let mut exact = psi.clone();
            propagator(&t, 1.0).unwrap().apply(&mut exact);
            let f = fidelity(&run_sdaqc(&s, &psi).unwrap(), &exact).unwrap();
            assert!((1.0 - f) < 1e-12);
        }
    }

    #[test]
    fn block_count_per_step() {
        let res = build_ising(4, &CouplingProfile::homogeneous(0.5), Topology::Nn).unwrap();
        let p = CouplingProfile::polynomial(0.5, 0.5);
        let t = build_xz_target(4, &["xx", "xz", "zx", "zz"].map(|l| (l, p.clone())), Topology::Nn).unwrap();
        let (_, r) = compile_xz(&t, &res, 1.0, 3, &XzOptions::default()).unwrap();
        assert!(r.analog_blocks_per_step <= 4 * 3);
        let res5 = build_ising(5, &CouplingProfile::polynomial(0.5, 2.5), Topology::Ata).unwrap();
        let (_, r5) = compile_xz(&paper_target(5), &res5, 2.0, 1, &XzOptions::default()).unwrap();
        assert!(r5.analog_blocks_per_step <= 4 * 10);
    }

    #[test]
    fn symmetrized_converges_faster() {
        let res = build_ising(3, &CouplingProfile::homogeneous(1.0), Topology::Ata).unwrap();
        let t = paper_target(3);
        let psi: StateVector = "011".parse().unwrap();
        let mut exact = psi.clone();
        propagator(&t, 1.0).unwrap().apply(&mut exact);
        let infid = |n, sym| {
            let opts = XzOptions {
                symmetrized: sym,
                ..Default::default()
            };
            let (s, _) = compile_xz(&t, &res, 1.0, n, &opts).unwrap();
            1.0 - fidelity(&run_sdaqc(&s, &psi).unwrap(), &exact).unwrap()
        };
        let (a, b) = (infid(4, true), infid(8, true));
        assert!((b / a).log2() < -1.5, "{a} {b}");
        assert!(infid(8, true) < infid(8, false));
    }
}
