//! Benchmark protocols: the XZ simulation problem, fidelity sweeps and time
//! comparisons between analog and digital compilations.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{DaqcError, Result};
use crate::executor::{dqc_circuit, run_bdaqc, run_dqc_circuit, run_sdaqc, ideal_quarter, DqcMode};
use crate::hamiltonian::SpinHamiltonian;
use crate::ising::{compile_ising, IsingOptions, Remediation};
use crate::linalg::propagator;
use crate::models::{build_ising, build_xz_target, CouplingProfile, Topology};
use crate::noise::{monte_carlo_fidelity, McResult, NoiseSpec, Protocol};
use crate::schedule::Schedule;
use crate::state::{fidelity, StateVector};
use crate::xz::{compile_xz, XzOptions, XzReport};

/// Energy scale of the benchmark runs; the final time is `1/J`.
pub const PAPER_J: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Sdaqc,
    Bdaqc,
    Dqc,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Sdaqc => "sdaqc",
            Mode::Bdaqc => "bdaqc",
            Mode::Dqc => "dqc",
        }
    }
}

/// Resource profiles of the benchmark: `J/|j-k|^{5/2}` or `J e^{-(|j-k|-1)^2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResourceKind {
    Polynomial,
    Exponential,
}

impl ResourceKind {
    pub fn profile(self, j: f64) -> CouplingProfile {
        match self {
            ResourceKind::Polynomial => CouplingProfile::polynomial(j, 2.5),
            ResourceKind::Exponential => CouplingProfile::exponential(j),
        }
    }
}

/// All spins down except an up spin on the middle qubit.
pub fn middle_excitation(n_qubits: usize) -> Result<StateVector> {
    let s: String = (0..n_qubits)
        .map(|q| if q == n_qubits / 2 { '0' } else { '1' })
        .collect();
    s.parse()
}

/// An ATA XZ target, its resource and the exact final state.
#[derive(Clone, Debug)]
pub struct XzProblem {
    pub resource: SpinHamiltonian,
    pub target: SpinHamiltonian,
    pub t_final: f64,
    pub psi0: StateVector,
    pub exact: StateVector,
}

impl XzProblem {
    pub fn new(
        resource: SpinHamiltonian,
        target: SpinHamiltonian,
        t_final: f64,
        psi0: StateVector,
    ) -> Result<XzProblem> {
        if resource.n_qubits() != target.n_qubits() || psi0.n_qubits() != target.n_qubits() {
            return Err(DaqcError::DimensionMismatch {
                expected: target.n_qubits(),
                found: psi0.n_qubits(),
            });
        }
        let mut exact = psi0.clone();
        propagator(&target, t_final)?.apply(&mut exact);
        Ok(XzProblem {
            resource,
            target,
            t_final,
            psi0,
            exact,
        })
    }

    /// Targets `g^{mu nu}_{jk} = J/|j-k|^{1/2}` for all four axis pairs,
    /// `t_F = 1/J` and a middle excitation.
    pub fn paper(n_qubits: usize, resource: ResourceKind) -> Result<XzProblem> {
        let j = PAPER_J;
        let res = build_ising(n_qubits, &resource.profile(j), Topology::Ata)?;
        let target_profile = CouplingProfile::polynomial(j, 0.5);
        let target = build_xz_target(
            n_qubits,
            &["xx", "xz", "zx", "zz"].map(|l| (l, target_profile.clone())),
            Topology::Ata,
        )?;
        XzProblem::new(res, target, 1.0 / j, middle_excitation(n_qubits)?)
    }

    pub fn n_qubits(&self) -> usize {
        self.target.n_qubits()
    }

    pub fn compile(&self, n_steps: usize, opts: &XzOptions) -> Result<(Schedule, XzReport)> {
        compile_xz(&self.target, &self.resource, self.t_final, n_steps, opts)
    }

    pub fn protocol(
        &self,
        mode: Mode,
        n_steps: usize,
        dt: f64,
        dqc_mode: DqcMode,
        opts: &XzOptions,
    ) -> Result<Protocol> {
        Ok(match mode {
            Mode::Sdaqc => Protocol::Stepwise(self.compile(n_steps, opts)?.0),
            Mode::Bdaqc => Protocol::Banged {
                schedule: self.compile(n_steps, opts)?.0,
                dt,
            },
            Mode::Dqc => Protocol::Digital(dqc_circuit(&self.target, &self.resource, self.t_final, n_steps, dqc_mode)?),
        })
    }

    /// Noise-free fidelity of one protocol.
    pub fn ideal_fidelity(&self, mode: Mode, n_steps: usize, dt: f64, dqc_mode: DqcMode, opts: &XzOptions) -> Result<f64> {
        let psi = match self.protocol(mode, n_steps, dt, dqc_mode, opts)? {
            Protocol::Stepwise(s) => run_sdaqc(&s, &self.psi0)?,
            Protocol::Banged { schedule, dt } => run_bdaqc(&schedule, &self.psi0, dt)?,
            Protocol::Digital(c) => run_dqc_circuit(&c, &self.psi0, ideal_quarter)?,
        };
        fidelity(&psi, &self.exact)
    }
}

/// One row of a fidelity sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n_steps: usize,
    pub mode: Mode,
    pub dt: Option<f64>,
    pub mean_fidelity: f64,
    pub stderr: f64,
    /// Analog time for DAQC modes, quarter-gate time for the digital mode.
    pub total_time: f64,
    pub wall_time: f64,
    pub status: String,
}

impl CurvePoint {
    /// `sdaqc`, `dqc`, or `bdaqc@<dt>`.
    pub fn mode_label(&self) -> String {
        match (self.mode, self.dt) {
            (Mode::Bdaqc, Some(dt)) => format!("bdaqc@{dt}"),
            (m, _) => m.label().to_string(),
        }
    }
}

/// Fidelity-curve sweep settings.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub n_steps: Vec<usize>,
    pub modes: Vec<Mode>,
    /// Pulse widths for the banged mode; the noise spec's width is used when empty.
    pub dts: Vec<f64>,
    pub dqc_mode: DqcMode,
    pub noise: NoiseSpec,
    pub xz: XzOptions,
}

fn mode_key(mode: Mode) -> u64 {
    match mode {
        Mode::Sdaqc => 1,
        Mode::Bdaqc => 2,
        Mode::Dqc => 3,
    }
}

fn protocol_time(p: &Protocol) -> f64 {
    match p {
        Protocol::Stepwise(s) | Protocol::Banged { schedule: s, .. } => s.total_analog_time(),
        Protocol::Digital(c) => c.total_time(),
    }
}

/// Runs one sweep point; failures become a status string instead of an error.
pub fn curve_point(problem: &XzProblem, mode: Mode, n_steps: usize, dt: Option<f64>, sweep: &SweepSpec) -> CurvePoint {
    let start = Instant::now();
    let width = dt.unwrap_or(sweep.noise.dt);
    let key = [mode_key(mode), n_steps as u64, width.to_bits()];
    let outcome = problem
        .protocol(mode, n_steps, width, sweep.dqc_mode, &sweep.xz)
        .and_then(|p| {
            let spec = NoiseSpec { dt: width, ..sweep.noise.clone() };
            let r: McResult = monte_carlo_fidelity(&p, &problem.psi0, &problem.exact, &spec, &key)?;
            Ok((r, protocol_time(&p)))
        });
    let (mean_fidelity, stderr, total_time, status) = match outcome {
        Ok((r, t)) => (r.mean, r.stderr, t, "ok".to_string()),
        Err(e) => (f64::NAN, f64::NAN, f64::NAN, format!("error: {e}")),
    };
    CurvePoint {
        n_steps,
        mode,
        dt: (mode == Mode::Bdaqc).then_some(width),
        mean_fidelity,
        stderr,
        total_time,
        wall_time: start.elapsed().as_secs_f64(),
        status,
    }
}

/// Every (point, mode) of a sweep in a fixed order.
pub fn fidelity_curve(problem: &XzProblem, sweep: &SweepSpec) -> Vec<CurvePoint> {
    let mut jobs = Vec::new();
    for &n in &sweep.n_steps {
        for &mode in &sweep.modes {
            if mode == Mode::Bdaqc && !sweep.dts.is_empty() {
                jobs.extend(sweep.dts.iter().map(|&dt| (n, mode, Some(dt))));
            } else {
                jobs.push((n, mode, None));
            }
        }
    }
    jobs.into_iter()
        .map(|(n, mode, dt)| curve_point(problem, mode, n, dt, sweep))
        .collect()
}

/// Per-step time totals of the analog compilation and the digital baseline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeComparison {
    pub n_qubits: usize,
    pub n_steps: usize,
    pub daqc_step_time: f64,
    pub daqc_blocks_per_step: usize,
    pub dqc_direct_step_time: f64,
    pub dqc_swap_step_time: f64,
    pub remediations: Vec<Remediation>,
}

pub fn time_comparison(problem: &XzProblem, n_steps: usize, opts: &XzOptions) -> Result<TimeComparison> {
    let (_, report) = problem.compile(n_steps, opts)?;
    let direct = dqc_circuit(&problem.target, &problem.resource, problem.t_final, n_steps, DqcMode::DirectAta)?;
    let swap = dqc_circuit(&problem.target, &problem.resource, problem.t_final, n_steps, DqcMode::NnSwap)?;
    Ok(TimeComparison {
        n_qubits: problem.n_qubits(),
        n_steps,
        daqc_step_time: report.analog_time_per_step,
        daqc_blocks_per_step: report.analog_blocks_per_step,
        dqc_direct_step_time: direct.step_time,
        dqc_swap_step_time: swap.step_time,
        remediations: report.sub_reports.iter().map(|r| r.remediation).collect(),
    })
}

/// Block times of one rotated sub-problem, with the most negative raw time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockTimes {
    pub set: usize,
    pub raw_times: Vec<f64>,
    pub executed_times: Vec<f64>,
    pub t_min: f64,
    pub t_min_index: usize,
    pub remediation: Remediation,
}

/// Raw and executed block times of each rotated sub-problem for one Trotter step.
pub fn block_times(problem: &XzProblem, n_steps: usize, opts: &XzOptions) -> Result<Vec<BlockTimes>> {
    let (_, report) = problem.compile(n_steps, opts)?;
    Ok(report
        .sub_reports
        .iter()
        .enumerate()
        .map(|(set, r)| {
            let (t_min_index, t_min) = r
                .times
                .iter()
                .copied()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (i, t)| if t < acc.1 { (i, t) } else { acc });
            BlockTimes {
                set,
                raw_times: r.times.clone(),
                executed_times: r.shifted_times.clone(),
                t_min,
                t_min_index,
                remediation: r.remediation,
            }
        })
        .collect())
}

/// Per-step analog time of a pure ZZ compilation, for resource profiles.
pub fn ising_step_time(n_qubits: usize, resource: &CouplingProfile, target: &CouplingProfile, t_final: f64) -> Result<f64> {
    let res = build_ising(n_qubits, resource, Topology::Ata)?;
    let tgt = build_ising(n_qubits, target, Topology::Ata)?;
    Ok(compile_ising(&tgt, &res, t_final, &IsingOptions::default())?.1.total_analog_time)
}
