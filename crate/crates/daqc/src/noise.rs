//! Coherent noise channels and Monte Carlo fidelity estimation.

use std::f64::consts::FRAC_PI_4;

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DaqcError, Result};
use crate::executor::{
    quarter_gate, run_bdaqc_noisy, run_dqc_circuit, run_sdaqc_noisy, two_qubit_pauli, AnalogNoise, DqcCircuit,
    DqcGate,
};
use crate::hamiltonian::SpinHamiltonian;
use crate::linalg::expm_i_hermitian;
use crate::pauli::{Pauli, PauliWord};
use crate::schedule::Schedule;
use crate::state::{fidelity, StateVector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSpec {
    /// Relative phase deviation of quarter gates.
    pub sigma_d: f64,
    /// Field-noise amplitude ratio: `Delta B ~ U(-r_u dt/2, r_u dt/2)`.
    pub r_u: f64,
    /// Stepwise time-jitter ratio: `delta_s ~ N(0, r_s dt)`.
    pub r_s: f64,
    /// Banged time-jitter ratio: `delta_b ~ N(0, r_b dt)`.
    pub r_b: f64,
    /// Pulse width in units of `1/J`.
    pub dt: f64,
    pub seed: u64,
    pub runs: usize,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            sigma_d: 0.009,
            r_u: 0.002,
            r_s: 1.8,
            r_b: 0.9,
            dt: 1.0 / (500.0 * 0.5),
            seed: 0,
            runs: 1000,
        }
    }
}

impl NoiseSpec {
    /// No noise at all; a single run suffices.
    pub fn ideal() -> Self {
        NoiseSpec {
            sigma_d: 0.0,
            r_u: 0.0,
            r_s: 0.0,
            r_b: 0.0,
            runs: 1,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma_d", self.sigma_d),
            ("r_u", self.r_u),
            ("r_s", self.r_s),
            ("r_b", self.r_b),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(DaqcError::InvalidArgument(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(DaqcError::InvalidArgument(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.runs == 0 {
            return Err(DaqcError::InvalidArgument("runs must be positive".into()));
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        self.sigma_d == 0.0 && self.r_u == 0.0 && self.r_s == 0.0 && self.r_b == 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalogMode {
    Sdaqc,
    Bdaqc,
}

/// SplitMix64 finalizer folded over the key words.
pub fn mix_seed(seed: u64, key: &[u64]) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    key.iter().fold(splitmix(seed), |acc, &k| splitmix(acc ^ splitmix(k)))
}

/// Independent generator for run `run` of the stream `stream`.
pub fn run_rng(stream: u64, run: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(stream);
    rng.set_stream(run as u64);
    rng
}

fn field_amplitudes<R: Rng + ?Sized>(spec: &NoiseSpec, count: usize, rng: &mut R) -> Vec<f64> {
    let half = spec.r_u * spec.dt / 2.0;
    let u = Uniform::new_inclusive(-half, half).expect("finite bounds");
    (0..count).map(|_| u.sample(rng)).collect()
}

fn normal<R: Rng + ?Sized>(std: f64, rng: &mut R) -> f64 {
    if std == 0.0 {
        0.0
    } else {
        Normal::new(0.0, std).expect("finite std").sample(rng)
    }
}

/// `e^{i pi/4 (1 + xi) P + sum Delta B sigma}` with the field on the gate's two qubits.
pub fn noisy_dqc_gate<R: Rng + ?Sized>(gate: &DqcGate, spec: &NoiseSpec, rng: &mut R) -> Matrix4<Complex64> {
    let DqcGate::Quarter { pa, pb, .. } = gate else {
        return Matrix4::identity();
    };
    if spec.sigma_d == 0.0 && spec.r_u == 0.0 {
        return quarter_gate(*pa, *pb, FRAC_PI_4);
    }
    let xi = normal(spec.sigma_d, rng);
    let mut gen = two_qubit_pauli(*pa, *pb) * Complex64::from(FRAC_PI_4 * (1.0 + xi));
    if spec.r_u > 0.0 {
        let b = field_amplitudes(spec, 6, rng);
        for (i, p) in Pauli::NONTRIVIAL.iter().enumerate() {
            gen += two_qubit_pauli(*p, Pauli::I) * Complex64::from(b[i]);
            gen += two_qubit_pauli(Pauli::I, *p) * Complex64::from(b[3 + i]);
        }
    }
    let dense = DMatrix::from_column_slice(4, 4, gen.as_slice());
    let u = expm_i_hermitian(&dense, 1.0);
    Matrix4::from_column_slice(u.as_slice())
}

/// Draws a jittered duration and an in-exponent field term for one analog block.
pub fn noisy_analog_block<R: Rng + ?Sized>(
    duration: f64,
    n_qubits: usize,
    spec: &NoiseSpec,
    mode: AnalogMode,
    rng: &mut R,
) -> (f64, Option<SpinHamiltonian>) {
    let ratio = match mode {
        AnalogMode::Sdaqc => spec.r_s,
        AnalogMode::Bdaqc => spec.r_b,
    };
    let t = duration + normal(ratio * spec.dt, rng);
    if spec.r_u == 0.0 {
        return (t, None);
    }
    let b = field_amplitudes(spec, 3 * n_qubits, rng);
    let terms = (0..n_qubits).flat_map(|q| {
        Pauli::NONTRIVIAL
            .iter()
            .enumerate()
            .map(move |(i, p)| (q, i, *p))
    });
    let field = SpinHamiltonian::from_terms(
        n_qubits,
        terms.map(|(q, i, p)| {
            (
                b[3 * q + i],
                PauliWord::from_sparse(n_qubits, &[(q, p)]).expect("qubit in range"),
            )
        }),
    )
    .expect("valid field");
    (t, Some(field))
}

/// `e^{i(sign H (t + delta) + field)}` as a dense matrix.
pub fn noisy_analog_unitary<R: Rng + ?Sized>(
    h: &SpinHamiltonian,
    duration: f64,
    sign: f64,
    spec: &NoiseSpec,
    mode: AnalogMode,
    rng: &mut R,
) -> Result<DMatrix<Complex64>> {
    let (t, field) = noisy_analog_block(duration, h.n_qubits(), spec, mode, rng);
    let mut gen = h.scaled(sign * t);
    if let Some(f) = field {
        gen = gen.plus(&f)?;
    }
    Ok(expm_i_hermitian(&gen.matrix()?, 1.0))
}

struct Sampler<'a, R: Rng> {
    spec: &'a NoiseSpec,
    mode: AnalogMode,
    n_qubits: usize,
    rng: &'a mut R,
}

impl<R: Rng> AnalogNoise for Sampler<'_, R> {
    fn perturb(&mut self, duration: f64) -> (f64, Option<SpinHamiltonian>) {
        noisy_analog_block(duration, self.n_qubits, self.spec, self.mode, self.rng)
    }
}

/// A compiled protocol ready for repeated noisy execution.
#[derive(Clone, Debug)]
pub enum Protocol {
    Stepwise(Schedule),
    Banged { schedule: Schedule, dt: f64 },
    Digital(DqcCircuit),
}

impl Protocol {
    pub fn label(&self) -> &'static str {
        match self {
            Protocol::Stepwise(_) => "sdaqc",
            Protocol::Banged { .. } => "bdaqc",
            Protocol::Digital(_) => "dqc",
        }
    }

    /// One execution; noise draws come from `rng`.
    pub fn run<R: Rng>(&self, psi0: &StateVector, spec: &NoiseSpec, rng: &mut R) -> Result<StateVector> {
        let n = psi0.n_qubits();
        match self {
            Protocol::Stepwise(s) => {
                let mut noise = Sampler { spec, mode: AnalogMode::Sdaqc, n_qubits: n, rng };
                run_sdaqc_noisy(s, psi0, &mut noise)
            }
            Protocol::Banged { schedule, dt } => {
                let mut noise = Sampler { spec, mode: AnalogMode::Bdaqc, n_qubits: n, rng };
                run_bdaqc_noisy(schedule, psi0, *dt, &mut noise)
            }
            Protocol::Digital(c) => run_dqc_circuit(c, psi0, |g| noisy_dqc_gate(g, spec, rng)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub mean: f64,
    pub stderr: f64,
    pub fidelities: Vec<f64>,
}

impl McResult {
    pub fn from_samples(fidelities: Vec<f64>) -> McResult {
        let n = fidelities.len() as f64;
        let mean = fidelities.iter().sum::<f64>() / n;
        let stderr = if fidelities.len() > 1 {
            let var = fidelities.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        McResult { mean, stderr, fidelities }
    }
}

/// Mean fidelity with `target` over `spec.runs` noisy executions.
///
/// Run `r` draws from stream `mix_seed(spec.seed, key)` at stream index `r`, so
/// results do not depend on the thread count.
pub fn monte_carlo_fidelity(
    protocol: &Protocol,
    psi0: &StateVector,
    target: &StateVector,
    spec: &NoiseSpec,
    key: &[u64],
) -> Result<McResult> {
    spec.validate()?;
    let stream = mix_seed(spec.seed, key);
    let runs = if spec.is_ideal() { 1 } else { spec.runs };
    let fids = (0..runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = run_rng(stream, r);
            let psi = protocol.run(psi0, spec, &mut rng)?;
            fidelity(&psi, target)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(McResult::from_samples(fids))
}
