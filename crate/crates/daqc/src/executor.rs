//! Schedule execution on state vectors.

use std::f64::consts::FRAC_PI_4;

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DaqcError, Result};
use crate::hamiltonian::{PauliOperator, SpinHamiltonian};
use crate::linalg::{evolve, expm_i_hermitian, phase_aligned_distance, spectral_norm, unitary_of};
use crate::layer::RotationLayer;
use crate::pauli::{Pauli, PauliWord};
use crate::schedule::{Block, Schedule};
use crate::state::StateVector;

/// Resource evolution, with the diagonal case cached.
pub(crate) struct BaseEvolution {
    op: PauliOperator,
    diag: Option<Vec<f64>>,
}

impl BaseEvolution {
    pub(crate) fn new(schedule: &Schedule) -> Self {
        let op = schedule.base().operator();
        let diag = op.diagonal();
        BaseEvolution { op, diag }
    }

    /// `psi <- e^{i sign H t} psi`.
    pub(crate) fn apply(&self, t: f64, sign: f64, psi: &mut StateVector) {
        match &self.diag {
            Some(d) => {
                for (a, e) in psi.amplitudes_mut().iter_mut().zip(d) {
                    *a *= Complex64::from_polar(1.0, sign * e * t);
                }
            }
            None => evolve(&self.op, sign * t, psi),
        }
    }
}

fn check_dims(schedule: &Schedule, psi: &StateVector) -> Result<()> {
    if schedule.n_qubits() != psi.n_qubits() {
        return Err(DaqcError::DimensionMismatch {
            expected: schedule.n_qubits(),
            found: psi.n_qubits(),
        });
    }
    Ok(())
}

/// Stepwise execution: analog blocks are exact resource propagators and layers
/// are instantaneous.
pub fn run_sdaqc(schedule: &Schedule, psi0: &StateVector) -> Result<StateVector> {
    run_sdaqc_inner(schedule, psi0, None)
}

/// Dense unitary of a schedule under stepwise execution.
pub fn schedule_unitary(schedule: &Schedule) -> Result<DMatrix<Complex64>> {
    let base = BaseEvolution::new(schedule);
    let Some(diag) = &base.diag else {
        return unitary_of(schedule.n_qubits(), |psi| {
            *psi = run_sdaqc(schedule, psi)?;
            Ok(())
        });
    };
    let n = schedule.n_qubits();
    let mut cols: Vec<StateVector> = (0..1usize << n).map(|c| StateVector::basis(n, c)).collect::<Result<_>>()?;
    for (index, b) in schedule.blocks().iter().enumerate() {
        match b {
            Block::Analog { duration, sign } => {
                if *duration < 0.0 {
                    return Err(DaqcError::NegativeDuration {
                        index,
                        duration: *duration,
                    });
                }
                let phases: Vec<Complex64> = diag.iter().map(|e| Complex64::from_polar(1.0, sign * e * duration)).collect();
                for psi in &mut cols {
                    for (a, p) in psi.amplitudes_mut().iter_mut().zip(&phases) {
                        *a *= p;
                    }
                }
            }
            Block::Layer { layer, .. } => cols.iter_mut().for_each(|psi| layer.apply(psi)),
        }
    }
    let dim = cols.len();
    Ok(DMatrix::from_fn(dim, dim, |r, c| cols[c].amplitudes()[r]))
}

/// Perturbs analog evolutions: maps a nominal duration to the executed
/// duration plus an extra term added inside the exponent.
pub trait AnalogNoise {
    fn perturb(&mut self, duration: f64) -> (f64, Option<SpinHamiltonian>);
}

fn apply_analog(
    base: &BaseEvolution,
    h: &SpinHamiltonian,
    duration: f64,
    sign: f64,
    noise: &mut Option<&mut dyn AnalogNoise>,
    psi: &mut StateVector,
) -> Result<()> {
    match noise {
        None => base.apply(duration, sign, psi),
        Some(n) => {
            let (t, field) = n.perturb(duration);
            match field {
                None => base.apply(t, sign, psi),
                Some(f) => {
                    let gen = h.scaled(sign * t).plus(&f)?;
                    evolve(&gen.operator(), 1.0, psi);
                }
            }
        }
    }
    Ok(())
}

/// Stepwise execution with perturbed analog blocks; layers stay ideal.
pub fn run_sdaqc_noisy(schedule: &Schedule, psi0: &StateVector, noise: &mut dyn AnalogNoise) -> Result<StateVector> {
    run_sdaqc_inner(schedule, psi0, Some(noise))
}

fn run_sdaqc_inner(
    schedule: &Schedule,
    psi0: &StateVector,
    mut noise: Option<&mut dyn AnalogNoise>,
) -> Result<StateVector> {
    check_dims(schedule, psi0)?;
    let base = BaseEvolution::new(schedule);
    let mut psi = psi0.clone();
    for (index, b) in schedule.blocks().iter().enumerate() {
        match b {
            Block::Analog { duration, sign } => {
                if *duration < 0.0 {
                    return Err(DaqcError::NegativeDuration {
                        index,
                        duration: *duration,
                    });
                }
                apply_analog(&base, schedule.base(), *duration, *sign, &mut noise, &mut psi)?;
            }
            Block::Layer { layer, .. } => layer.apply(&mut psi),
        }
    }
    Ok(psi)
}

/// One rotation pulse of the banged timeline.
#[derive(Clone, Debug)]
pub struct Pulse {
    pub block: usize,
    pub start: f64,
    pub width: f64,
    /// Generator `G` with `e^{iG}` equal to the layer.
    pub generator: SpinHamiltonian,
}

/// Pulse windows for a banged execution. The first layer at `t = 0` starts
/// at 0, a layer at the end of the schedule ends there, and interior layers
/// are centred on their sudden-limit times. Layers with no analog time between
/// them form a single pulse.
pub fn bang_timeline(schedule: &Schedule, dt: f64) -> Result<(Vec<Pulse>, f64)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(DaqcError::InvalidArgument(format!("pulse width must be positive, got {dt}")));
    }
    let mut layers: Vec<(usize, f64, RotationLayer)> = Vec::new();
    let mut t = 0.0;
    for (index, b) in schedule.blocks().iter().enumerate() {
        match b {
            Block::Analog { duration, sign } => {
                if *sign < 0.0 {
                    return Err(DaqcError::InvertedBlockInBanged(index));
                }
                if *duration < 0.0 {
                    return Err(DaqcError::NegativeDuration {
                        index,
                        duration: *duration,
                    });
                }
                t += duration;
            }
            Block::Layer { layer, .. } => {
                let merged = match layers.last_mut() {
                    Some((_, at, prev)) if *at == t => {
                        *prev = prev.then(layer);
                        true
                    }
                    _ => false,
                };
                if !merged {
                    layers.push((index, t, layer.clone()));
                }
            }
        }
    }
    let mut events = Vec::with_capacity(layers.len());
    for (index, at, layer) in layers {
        let g = layer.generator().map_err(|_| DaqcError::GeneratorUndefined(index))?;
        events.push((index, at, g));
    }
    let total = t;
    let eps = 1e-12 * total.max(1.0);
    let mut pulses: Vec<Pulse> = Vec::with_capacity(events.len());
    for (block, at, generator) in events {
        let start = if at <= eps {
            0.0
        } else if at >= total - eps {
            total - dt
        } else {
            at - dt / 2.0
        };
        let overlaps = pulses.last().is_some_and(|p| start < p.start + p.width - eps);
        if start < -eps || start + dt > total + eps || overlaps {
            return Err(DaqcError::PulseOverlap { time: at, width: dt });
        }
        pulses.push(Pulse {
            block,
            start,
            width: dt,
            generator,
        });
    }
    Ok((pulses, total))
}

/// Banged execution: `H_I` is never switched off and each layer becomes a
/// pulse of width `dt` evolving under `H_I + G / dt`.
pub fn run_bdaqc(schedule: &Schedule, psi0: &StateVector, dt: f64) -> Result<StateVector> {
    run_bdaqc_inner(schedule, psi0, dt, None)
}

/// Banged execution with perturbed free-evolution segments.
pub fn run_bdaqc_noisy(
    schedule: &Schedule,
    psi0: &StateVector,
    dt: f64,
    noise: &mut dyn AnalogNoise,
) -> Result<StateVector> {
    run_bdaqc_inner(schedule, psi0, dt, Some(noise))
}

fn run_bdaqc_inner(
    schedule: &Schedule,
    psi0: &StateVector,
    dt: f64,
    mut noise: Option<&mut dyn AnalogNoise>,
) -> Result<StateVector> {
    check_dims(schedule, psi0)?;
    let (pulses, total) = bang_timeline(schedule, dt)?;
    let base = BaseEvolution::new(schedule);
    let h = schedule.base();
    let mut psi = psi0.clone();
    let mut cursor = 0.0;
    for p in &pulses {
        let free = (p.start - cursor).max(0.0);
        if free > 0.0 {
            apply_analog(&base, h, free, 1.0, &mut noise, &mut psi)?;
        }
        let gen = h.plus(&p.generator.scaled(1.0 / p.width))?;
        evolve(&gen.operator(), p.width, &mut psi);
        cursor = p.start + p.width;
    }
    let rest = (total - cursor).max(0.0);
    if rest > 0.0 {
        apply_analog(&base, h, rest, 1.0, &mut noise, &mut psi)?;
    }
    Ok(psi)
}

/// Dense unitary of a schedule under banged execution.
pub fn banged_unitary(schedule: &Schedule, dt: f64) -> Result<DMatrix<Complex64>> {
    unitary_of(schedule.n_qubits(), |psi| {
        *psi = run_bdaqc(schedule, psi, dt)?;
        Ok(())
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BangError {
    /// `dt^3 / 4 * || [[H_I, H_R], H_I + 2 H_R] ||`.
    pub estimate: f64,
    /// `|| e^{i(H_I + H_R) dt} - e^{i H_I dt/2} e^{i H_R dt} e^{i H_I dt/2} ||`.
    pub measured_interior: f64,
    /// `|| e^{i(H_I + H_R) dt} - e^{i H_I dt} e^{i H_R dt} ||`.
    pub measured_boundary: f64,
}

fn commutator(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a * b - b * a
}

/// Per-pulse digital error for a fixed-strength rotation Hamiltonian `H_R`.
pub fn bang_error_estimate(h_i: &SpinHamiltonian, h_r: &SpinHamiltonian, dt: f64) -> Result<BangError> {
    let a = h_i.matrix()?;
    let b = h_r.matrix()?;
    let inner = commutator(&a, &b);
    let outer = commutator(&inner, &(&a + &b * Complex64::from(2.0)));
    let exact = expm_i_hermitian(&(&a + &b), dt);
    let half = expm_i_hermitian(&a, dt / 2.0);
    let full = expm_i_hermitian(&a, dt);
    let rot = expm_i_hermitian(&b, dt);
    Ok(BangError {
        estimate: dt.powi(3) / 4.0 * spectral_norm(&outer),
        measured_interior: spectral_norm(&(&exact - &half * &rot * &half)),
        measured_boundary: spectral_norm(&(&exact - &full * &rot)),
    })
}

/// Analog time and block counts per Trotter step and overall.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeReport {
    pub step_times: Vec<f64>,
    pub total_analog_time: f64,
    pub analog_blocks: usize,
    pub layers: usize,
    pub inverted_blocks: usize,
    /// Longest single analog block.
    pub max_block: f64,
}

pub fn schedule_time_report(schedule: &Schedule) -> TimeReport {
    TimeReport {
        step_times: schedule.step_times(),
        total_analog_time: schedule.total_analog_time(),
        analog_blocks: schedule.analog_count(),
        layers: schedule.layer_count(),
        inverted_blocks: schedule.analog_durations().filter(|(_, s)| *s < 0.0).count(),
        max_block: schedule.analog_durations().map(|(d, _)| d).fold(0.0, f64::max),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DqcMode {
    DirectAta,
    NnSwap,
}

/// A gate of the digital baseline.
#[derive(Clone, Debug, PartialEq)]
pub enum DqcGate {
    Local { qubit: usize, op: Matrix2<Complex64> },
    /// `e^{i pi/4 sigma_a^{pa} sigma_b^{pb}}`, costing `(pi/4)/|g_ab|`.
    Quarter { a: usize, b: usize, pa: Pauli, pb: Pauli },
}

impl DqcGate {
    pub fn is_quarter(&self) -> bool {
        matches!(self, DqcGate::Quarter { .. })
    }
}

/// `sigma_a (x) sigma_b` with `a` the more significant factor.
pub fn two_qubit_pauli(pa: Pauli, pb: Pauli) -> Matrix4<Complex64> {
    let (ma, mb) = (pa.matrix(), pb.matrix());
    Matrix4::from_fn(|r, c| ma[(r / 2, c / 2)] * mb[(r % 2, c % 2)])
}

/// `e^{i angle P}` for a two-qubit Pauli product `P`.
pub fn quarter_gate(pa: Pauli, pb: Pauli, angle: f64) -> Matrix4<Complex64> {
    let (s, c) = angle.sin_cos();
    Matrix4::identity() * Complex64::from(c) + two_qubit_pauli(pa, pb) * Complex64::new(0.0, s)
}

fn pauli_exp(p: Pauli, angle: f64) -> Matrix2<Complex64> {
    let (s, c) = angle.sin_cos();
    Matrix2::identity() * Complex64::from(c) + p.matrix() * Complex64::new(0.0, s)
}

/// `e^{i phi sigma_mu^j sigma_nu^k}` from two quarter gates and `Y` rotations on `j`:
/// `e^{i pi/4 Y} Q e^{i phi Y} Q e^{-i pi/4 Y}` after a Pauli correction on both qubits.
pub fn term_gates(j: usize, k: usize, mu: Pauli, nu: Pauli, phi: f64) -> Result<Vec<DqcGate>> {
    let fix = match mu {
        Pauli::Z => Pauli::X,
        Pauli::X => Pauli::Z,
        _ => return Err(DaqcError::UnsupportedAxis(format!("{}{}", mu.as_char(), nu.as_char()))),
    };
    if nu == Pauli::I {
        return Err(DaqcError::UnsupportedAxis(format!("{}{}", mu.as_char(), nu.as_char())));
    }
    let q = DqcGate::Quarter { a: j, b: k, pa: mu, pb: nu };
    Ok(vec![
        DqcGate::Local { qubit: j, op: fix.matrix() },
        DqcGate::Local { qubit: k, op: nu.matrix() },
        DqcGate::Local { qubit: j, op: pauli_exp(Pauli::Y, -FRAC_PI_4) },
        q.clone(),
        DqcGate::Local { qubit: j, op: pauli_exp(Pauli::Y, phi) },
        q,
        DqcGate::Local { qubit: j, op: pauli_exp(Pauli::Y, FRAC_PI_4) },
    ])
}

/// `e^{i pi/4 XX} e^{i pi/4 YY} e^{i pi/4 ZZ}`, which is SWAP up to a phase.
pub fn swap_gates(a: usize, b: usize) -> Vec<DqcGate> {
    [Pauli::X, Pauli::Y, Pauli::Z]
        .into_iter()
        .map(|p| DqcGate::Quarter { a, b, pa: p, pb: p })
        .collect()
}

/// Result of checking the two-qubit decomposition against its target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub axes: String,
    /// Phase-aligned distance between the uncorrected product and the target.
    pub uncorrected: f64,
    /// Right factor `C` with `product = target * C`.
    pub correction: String,
    pub corrected: f64,
}

fn gates_matrix(gates: &[DqcGate]) -> Matrix4<Complex64> {
    let mut u = Matrix4::identity();
    for g in gates {
        let m = match g {
            DqcGate::Local { qubit, op } => {
                let id = Matrix2::<Complex64>::identity();
                let (ma, mb) = if *qubit == 0 { (*op, id) } else { (id, *op) };
                Matrix4::from_fn(|r, c| ma[(r / 2, c / 2)] * mb[(r % 2, c % 2)])
            }
            DqcGate::Quarter { pa, pb, .. } => quarter_gate(*pa, *pb, FRAC_PI_4),
        };
        u = m * u;
    }
    u
}

fn dist4(a: &Matrix4<Complex64>, b: &Matrix4<Complex64>) -> f64 {
    let da = DMatrix::from_column_slice(4, 4, a.as_slice());
    let db = DMatrix::from_column_slice(4, 4, b.as_slice());
    phase_aligned_distance(&da, &db)
}

/// Compares the printed two-qubit decomposition with `e^{i phi sigma_mu sigma_nu}`.
pub fn check_term_identity(mu: Pauli, nu: Pauli, phi: f64) -> Result<IdentityCheck> {
    let gates = term_gates(0, 1, mu, nu, phi)?;
    let target = quarter_gate(mu, nu, phi);
    let uncorrected = gates_matrix(&gates[2..]);
    let corrected = gates_matrix(&gates);
    let fix = if mu == Pauli::Z { 'X' } else { 'Z' };
    let phase = if mu == Pauli::Z { "-i" } else { "i" };
    Ok(IdentityCheck {
        axes: format!("{}{}", mu.as_char(), nu.as_char()),
        uncorrected: dist4(&uncorrected, &target),
        correction: format!("{phase} {fix}{}", nu.as_char()),
        corrected: dist4(&corrected, &target),
    })
}

/// A Trotter step of the digital baseline and its gate-time accounting.
#[derive(Clone, Debug, PartialEq)]
pub struct DqcCircuit {
    pub n_qubits: usize,
    pub mode: DqcMode,
    pub step: Vec<DqcGate>,
    pub n_steps: usize,
    pub quarter_gates_per_step: usize,
    /// Sum of `(pi/4)/|g_ab|` over the quarter gates of one step.
    pub step_time: f64,
}

impl DqcCircuit {
    pub fn total_time(&self) -> f64 {
        self.step_time * self.n_steps as f64
    }
}

fn term_axes(w: &PauliWord) -> Result<(usize, usize, Pauli, Pauli)> {
    let support = w.support();
    if support.len() != 2 {
        return Err(DaqcError::UnsupportedTerm(w.to_string()));
    }
    Ok((support[0], support[1], w.get(support[0]), w.get(support[1])))
}

pub fn dqc_circuit(
    target: &SpinHamiltonian,
    resource: &SpinHamiltonian,
    t_final: f64,
    n_steps: usize,
    mode: DqcMode,
) -> Result<DqcCircuit> {
    if n_steps == 0 {
        return Err(DaqcError::InvalidArgument("need at least one Trotter step".into()));
    }
    let n = target.n_qubits();
    let tau = t_final / n_steps as f64;
    let mut step = Vec::new();
    for (w, c) in target.terms() {
        let (j, k, mu, nu) = term_axes(w)?;
        match mode {
            DqcMode::NnSwap if k > j + 1 => {
                let mut swaps = Vec::new();
                for q in (j + 1..k).rev() {
                    swaps.extend(swap_gates(q, q + 1));
                }
                step.extend(swaps.iter().cloned());
                step.extend(term_gates(j, j + 1, mu, nu, c * tau)?);
                for chunk in swaps.chunks(3).rev() {
                    step.extend(chunk.iter().cloned());
                }
            }
            _ => step.extend(term_gates(j, k, mu, nu, c * tau)?),
        }
    }
    let mut step_time = 0.0;
    let mut quarters = 0;
    for g in &step {
        if let DqcGate::Quarter { a, b, .. } = g {
            let coupling = resource.coefficient(&PauliWord::zz(n, *a, *b)).abs();
            if coupling == 0.0 {
                return Err(DaqcError::ZeroResourceCoupling(*a, *b));
            }
            step_time += FRAC_PI_4 / coupling;
            quarters += 1;
        }
    }
    Ok(DqcCircuit {
        n_qubits: n,
        mode,
        step,
        n_steps,
        quarter_gates_per_step: quarters,
        step_time,
    })
}

/// Runs a baseline circuit; `quarter` supplies the 4x4 unitary of each quarter gate.
pub fn run_dqc_circuit<F>(circuit: &DqcCircuit, psi0: &StateVector, mut quarter: F) -> Result<StateVector>
where
    F: FnMut(&DqcGate) -> Matrix4<Complex64>,
{
    if psi0.n_qubits() != circuit.n_qubits {
        return Err(DaqcError::DimensionMismatch {
            expected: circuit.n_qubits,
            found: psi0.n_qubits(),
        });
    }
    let mut psi = psi0.clone();
    for _ in 0..circuit.n_steps {
        for g in &circuit.step {
            match g {
                DqcGate::Local { qubit, op } => psi.apply_single(*qubit, op),
                DqcGate::Quarter { a, b, .. } => psi.apply_two(*a, *b, &quarter(g)),
            }
        }
    }
    Ok(psi)
}

pub fn ideal_quarter(g: &DqcGate) -> Matrix4<Complex64> {
    match g {
        DqcGate::Quarter { pa, pb, .. } => quarter_gate(*pa, *pb, FRAC_PI_4),
        DqcGate::Local { .. } => Matrix4::identity(),
    }
}

/// Gate-time accounting of the baseline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DqcTimes {
    pub step_time: f64,
    pub total_time: f64,
    pub quarter_gates_per_step: usize,
}

pub fn run_dqc_baseline(
    target: &SpinHamiltonian,
    resource: &SpinHamiltonian,
    t_final: f64,
    n_steps: usize,
    mode: DqcMode,
    psi0: &StateVector,
) -> Result<(StateVector, DqcTimes)> {
    for mu in [Pauli::X, Pauli::Z] {
        for nu in [Pauli::X, Pauli::Z] {
            let check = check_term_identity(mu, nu, 0.3)?;
            if check.corrected > 1e-12 {
                return Err(DaqcError::InvalidArgument(format!(
                    "two-qubit decomposition failed for {}",
                    check.axes
                )));
            }
        }
    }
    let circuit = dqc_circuit(target, resource, t_final, n_steps, mode)?;
    let psi = run_dqc_circuit(&circuit, psi0, ideal_quarter)?;
    Ok((
        psi,
        DqcTimes {
            step_time: circuit.step_time,
            total_time: circuit.total_time(),
            quarter_gates_per_step: circuit.quarter_gates_per_step,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::{compile_ising, IsingOptions};
    use crate::linalg::propagator;
    use crate::models::{build_ising, CouplingProfile, Topology};
    use crate::state::fidelity;

    fn h(n: usize, terms: &[(f64, &str)]) -> SpinHamiltonian {
        SpinHamiltonian::from_terms(n, terms.iter().map(|(c, w)| (*c, w.parse().unwrap()))).unwrap()
    }

    fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
        let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
        let mx = lx.iter().sum::<f64>() / lx.len() as f64;
        let my = ly.iter().sum::<f64>() / ly.len() as f64;
        let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
        num / den
    }

    #[test]
    fn empty_schedule_is_identity() {
        let s = Schedule::new(h(2, &[(1.0, "ZZ")]));
        let psi: StateVector = "01".parse().unwrap();
        assert_eq!(run_sdaqc(&s, &psi).unwrap(), psi);
        assert_eq!(run_bdaqc(&s, &psi, 0.1).unwrap(), psi);
    }

    #[test]
    fn sdaqc_matches_exact_ising() {
        let res = build_ising(3, &CouplingProfile::homogeneous(1.0), Topology::Ata).unwrap();
        let target = h(3, &[(0.3, "ZZI"), (-0.7, "ZIZ"), (0.2, "IZZ")]);
        let (s, _) = compile_ising(&target, &res, 1.3, &IsingOptions::default()).unwrap();
        let u = schedule_unitary(&s).unwrap();
        let exact = propagator(&target, 1.3).unwrap().matrix();
        assert!(phase_aligned_distance(&u, &exact) < 1e-10);
    }

    #[test]
    fn negative_duration_rejected() {
        let doc = r#"{"version":1,"n_qubits":1,"base":{"n_qubits":1,"terms":[]},"blocks":[{"type":"analog","duration":-1.0}]}"#;
        let s = Schedule::from_json(doc).unwrap();
        let psi = StateVector::basis(1, 0).unwrap();
        assert!(matches!(run_sdaqc(&s, &psi), Err(DaqcError::NegativeDuration { index: 0, .. })));
    }

    #[test]
    fn commuting_bang_is_exact() {
        let base = h(2, &[(1.0, "ZZ"), (0.4, "ZI")]);
        let mut s = Schedule::new(base);
        let rz = crate::layer::rotation([0.0, 0.0, 1.0], 0.8).unwrap();
        let layer = RotationLayer::from_ops(vec![Some(rz), None]).unwrap();
        s.push_layer(layer.clone());
        s.push_analog(0.5, 1.0);
        s.push_layer(layer.clone());
        s.push_analog(0.3, 1.0);
        s.push_layer(layer);
        let psi: StateVector = "+0".parse().unwrap_or_else(|_| StateVector::basis(2, 1).unwrap());
        let a = run_sdaqc(&s, &psi).unwrap();
        let b = run_bdaqc(&s, &psi, 0.05).unwrap();
        assert!((1.0 - fidelity(&a, &b).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn pulse_overlap_detected() {
        let mut s = Schedule::new(h(1, &[(1.0, "Z")]));
        s.push_layer(RotationLayer::paulis(1, &[0], Pauli::X));
        s.push_analog(0.1, 1.0);
        s.push_layer(RotationLayer::paulis(1, &[0], Pauli::Y));
        s.push_analog(0.1, 1.0);
        let psi = StateVector::basis(1, 0).unwrap();
        assert!(run_bdaqc(&s, &psi, 0.05).is_ok());
        assert!(matches!(run_bdaqc(&s, &psi, 0.09), Err(DaqcError::PulseOverlap { .. })));
    }

    #[test]
    fn inverted_blocks_rejected_in_banged_mode() {
        let mut s = Schedule::new(h(1, &[(1.0, "Z")]));
        s.push_analog(0.5, -1.0);
        let psi = StateVector::basis(1, 0).unwrap();
        assert!(matches!(run_bdaqc(&s, &psi, 0.01), Err(DaqcError::InvertedBlockInBanged(0))));
    }

    #[test]
    fn banged_converges_to_stepwise() {
        let base = h(2, &[(1.0, "ZZ")]);
        let mut s = Schedule::new(base);
        s.push_analog(0.4, 1.0);
        s.push_layer(RotationLayer::xz_reflections(&[0.7, 1.9]));
        s.push_analog(0.6, 1.0);
        let us = schedule_unitary(&s).unwrap();
        let dts = [0.04, 0.02, 0.01, 0.005];
        let devs: Vec<f64> = dts
            .iter()
            .map(|&dt| spectral_norm(&(banged_unitary(&s, dt).unwrap() - &us)))
            .collect();
        assert!(devs.windows(2).all(|w| w[1] < w[0]));
        let slope = log_slope(&dts, &devs);
        assert!((slope - 1.0).abs() < 0.1, "fixed-angle slope {slope}");
    }

    #[test]
    fn bang_error_commuting_vanishes() {
        let e = bang_error_estimate(&h(2, &[(1.0, "ZZ")]), &h(2, &[(2.0, "ZI")]), 0.1).unwrap();
        assert_eq!(e.estimate, 0.0);
        assert!(e.measured_interior < 1e-12 && e.measured_boundary < 1e-12);
    }

    #[test]
    fn bang_error_scaling() {
        let hi = h(2, &[(0.8, "ZZ")]);
        let hr = h(2, &[(1.3, "XI")]);
        let dts = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1];
        let errs: Vec<BangError> = dts.iter().map(|&dt| bang_error_estimate(&hi, &hr, dt).unwrap()).collect();
        let interior: Vec<f64> = errs.iter().map(|e| e.measured_interior).collect();
        let boundary: Vec<f64> = errs.iter().map(|e| e.measured_boundary).collect();
        assert!((log_slope(&dts, &interior) - 3.0).abs() < 0.2);
        assert!((log_slope(&dts, &boundary) - 2.0).abs() < 0.2);
        // nested commutator is -4 g^2 W XI + 8 g W^2 ZZ, two anticommuting words
        let (g, om) = (0.8f64, 1.3f64);
        let expected = 1e-3f64.powi(3) / 4.0 * 4.0 * g * om * (g * g + 4.0 * om * om).sqrt();
        assert!((errs[0].estimate - expected).abs() / expected < 1e-9);
    }

    #[test]
    fn term_identity_needs_pauli_correction() {
        for mu in [Pauli::X, Pauli::Z] {
            for nu in [Pauli::X, Pauli::Z] {
                let c = check_term_identity(mu, nu, 0.37).unwrap();
                assert!(c.uncorrected > 0.1, "{c:?}");
                assert!(c.corrected < 1e-12, "{c:?}");
            }
        }
    }

    #[test]
    fn swap_from_three_quarter_gates() {
        let u = gates_matrix(&swap_gates(0, 1));
        let mut swap = Matrix4::<Complex64>::zeros();
        for (r, c) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            swap[(r, c)] = Complex64::new(1.0, 0.0);
        }
        assert!(dist4(&u, &swap) < 1e-14);
        let two = gates_matrix(&swap_gates(0, 1)[..2]);
        assert!(dist4(&two, &swap) > 0.5);
    }

    #[test]
    fn dqc_converges() {
        let res = build_ising(4, &CouplingProfile::homogeneous(1.0), Topology::Ata).unwrap();
        let target = h(4, &[(0.5, "XIXI"), (0.3, "ZZII"), (-0.4, "IXIZ"), (0.2, "ZIIX")]);
        let psi0 = StateVector::basis(4, 5).unwrap();
        let mut exact = psi0.clone();
        propagator(&target, 1.0).unwrap().apply(&mut exact);
        let mut last = 0.0;
        for n in [1, 4, 16, 64] {
            for mode in [DqcMode::DirectAta, DqcMode::NnSwap] {
                let (psi, t) = run_dqc_baseline(&target, &res, 1.0, n, mode, &psi0).unwrap();
                let f = fidelity(&psi, &exact).unwrap();
                if mode == DqcMode::DirectAta {
                    assert!(f >= last - 1e-9);
                    last = f;
                }
                assert!(t.total_time > 0.0);
            }
        }
        assert!(last > 0.999);
    }

    #[test]
    fn time_report_totals() {
        let res = build_ising(3, &CouplingProfile::homogeneous(1.0), Topology::Ata).unwrap();
        let (s, _) = compile_ising(&res, &res, 0.7, &IsingOptions::default()).unwrap();
        let r = schedule_time_report(&s);
        assert!((r.total_analog_time - 0.7).abs() < 1e-12);
        assert_eq!(r.analog_blocks, 1);
    }
}
