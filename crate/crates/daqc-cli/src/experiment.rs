//! Problems built from a config, their compilation, and the rows of each experiment.

use std::collections::BTreeMap;
use std::time::Instant;

use anyhow::Context;
use daqc::bench::Mode;
use daqc::executor::{dqc_circuit, DqcMode};
use daqc::ising::{compile_ising_into, IsingOptions};
use daqc::linalg::propagator;
use daqc::mbody::{compile_mbody, plan_mbody, schedule_for_plan, MBodyOptions, MBodyPlan, ROTATION_SEED};
use daqc::models::{build_ising, build_mbody_target, build_xz_target, CouplingProfile};
use daqc::noise::{monte_carlo_fidelity, NoiseSpec, Protocol};
use daqc::xz::{compile_xz, XzOptions};
use daqc::{Schedule, SpinHamiltonian, StateVector};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::config::{Experiment, RunConfig, TargetSpec};
use crate::output::{CouplingRow, Row, RunRow};

/// A target, its resource and compiler settings at one qubit count.
#[derive(Clone, Debug)]
pub struct Problem {
    pub spec: TargetSpec,
    pub resource: SpinHamiltonian,
    pub target: SpinHamiltonian,
    pub t_final: f64,
    pub ising: IsingOptions,
    pub symmetrized: bool,
    pub mbody: Option<MBodyOptions>,
    plan: Option<MBodyPlan>,
}

/// A compiled schedule with its report.
#[derive(Clone, Debug, Serialize)]
pub struct Compiled {
    #[serde(skip)]
    pub schedule: Schedule,
    pub warnings: Vec<String>,
    pub details: Value,
}

impl Problem {
    pub fn new(cfg: &RunConfig, n_qubits: usize) -> anyhow::Result<Problem> {
        let resource = build_ising(n_qubits, &cfg.resource, cfg.topology).context("resource")?;
        let target = match &cfg.target {
            TargetSpec::Ising { profile, topology } => build_ising(n_qubits, profile, *topology),
            TargetSpec::Xz { topology, .. } => build_xz_target(n_qubits, &cfg.target.xz_profiles(), *topology),
            TargetSpec::Mbody { max_body, source } => build_mbody_target(n_qubits, *max_body, source),
        }
        .context("target")?;
        let ising = IsingOptions {
            allow_fallback: cfg.compile.allow_fallback,
            allow_inversion: !cfg.compile.forbid_inversion,
            ..Default::default()
        };
        let mbody = match &cfg.target {
            TargetSpec::Mbody { max_body, .. } => Some(MBodyOptions {
                max_body: *max_body,
                rotations: cfg.compile.rotations,
                rotation_seed: cfg.compile.rotation_seed.unwrap_or(ROTATION_SEED),
                ising: ising.clone(),
                ..Default::default()
            }),
            _ => None,
        };
        Ok(Problem {
            spec: cfg.target.clone(),
            resource,
            target,
            t_final: cfg.t_final,
            ising,
            symmetrized: cfg.compile.symmetrized,
            mbody,
            plan: None,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.target.n_qubits()
    }

    fn two_body_zz(&self) -> bool {
        self.target.terms().all(|(w, _)| w.is_z_diagonal() && w.weight() == 2)
    }

    /// Solves the M-body decomposition once so later compilations reuse it.
    pub fn prepare(&mut self) -> daqc::Result<()> {
        if let Some(opts) = &self.mbody {
            if self.plan.is_none() && !self.two_body_zz() {
                self.plan = Some(plan_mbody(&self.target, opts)?);
            }
        }
        Ok(())
    }

    pub fn compile(&self, n_steps: usize) -> daqc::Result<Compiled> {
        match &self.spec {
            TargetSpec::Ising { .. } => {
                let mut schedule = Schedule::new(self.resource.clone());
                let tau = self.t_final / n_steps as f64;
                let mut first = None;
                for _ in 0..n_steps {
                    schedule.mark_step();
                    let r = compile_ising_into(&mut schedule, &self.target, tau, &self.ising)?;
                    first.get_or_insert(r);
                }
                let report = first.expect("at least one step");
                Ok(Compiled {
                    schedule,
                    warnings: report.warnings.clone(),
                    details: to_value(&report),
                })
            }
            TargetSpec::Xz { .. } => {
                let opts = XzOptions {
                    angles: None,
                    symmetrized: self.symmetrized,
                    ising: self.ising.clone(),
                };
                let (schedule, report) = compile_xz(&self.target, &self.resource, self.t_final, n_steps, &opts)?;
                let warnings = report.sub_reports.iter().flat_map(|r| r.warnings.clone()).collect();
                Ok(Compiled {
                    schedule,
                    warnings,
                    details: to_value(&report),
                })
            }
            TargetSpec::Mbody { .. } => {
                let opts = self.mbody.as_ref().expect("mbody options");
                let (schedule, plan) = match &self.plan {
                    Some(plan) => (
                        schedule_for_plan(plan, &self.resource, self.t_final, n_steps, &self.ising)?,
                        plan.clone(),
                    ),
                    None => compile_mbody(&self.target, &self.resource, self.t_final, n_steps, opts)?,
                };
                Ok(Compiled {
                    schedule,
                    warnings: Vec::new(),
                    details: to_value(&plan),
                })
            }
        }
    }

    pub fn protocol(&self, mode: Mode, n_steps: usize, dt: f64, dqc_mode: DqcMode) -> daqc::Result<Protocol> {
        Ok(match mode {
            Mode::Sdaqc => Protocol::Stepwise(self.compile(n_steps)?.schedule),
            Mode::Bdaqc => Protocol::Banged {
                schedule: self.compile(n_steps)?.schedule,
                dt,
            },
            Mode::Dqc => Protocol::Digital(dqc_circuit(&self.target, &self.resource, self.t_final, n_steps, dqc_mode)?),
        })
    }

    pub fn exact_state(&self, psi0: &StateVector) -> daqc::Result<StateVector> {
        let mut psi = psi0.clone();
        propagator(&self.target, self.t_final)?.apply(&mut psi);
        Ok(psi)
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
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

/// Everything an experiment produced.
#[derive(Clone, Debug, Default)]
pub struct Results {
    pub rows: Vec<Row>,
    pub runs: Vec<RunRow>,
    pub couplings: Vec<CouplingRow>,
}

impl Results {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_ok()).count()
    }

    /// Plot series keyed by mode: fidelity for fidelity sweeps, times otherwise.
    pub fn series(&self, experiment: Experiment) -> BTreeMap<String, Vec<(f64, f64)>> {
        let mut out: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
        if experiment == Experiment::Couplings {
            for c in &self.couplings {
                out.entry(c.series.clone()).or_default().push((c.distance as f64, c.coupling));
            }
            return out;
        }
        for r in &self.rows {
            let y = match experiment {
                Experiment::Fidelity => r.mean_fidelity,
                _ => r.total_analog_time,
            };
            out.entry(r.mode.clone())
                .or_default()
                .push((r.sweep_var, y.unwrap_or(f64::NAN)));
        }
        out
    }
}

pub fn run_experiment(cfg: &RunConfig) -> anyhow::Result<Results> {
    match cfg.experiment {
        Experiment::Fidelity => fidelity(cfg),
        Experiment::Times => Ok(times(cfg)),
        Experiment::BlockTimes => block_times(cfg),
        Experiment::Couplings => Ok(couplings(cfg)),
    }
}

/// Fidelity against the exact state for every (n_T, mode, dt) point.
fn fidelity(cfg: &RunConfig) -> anyhow::Result<Results> {
    let mut problem = Problem::new(cfg, cfg.n_qubits)?;
    let psi0 = cfg.initial_state_for(cfg.n_qubits)?;
    let exact = problem.exact_state(&psi0)?;
    let prepared = problem.prepare();
    let mut jobs = Vec::new();
    for &n in &cfg.n_steps {
        for &mode in &cfg.modes {
            if mode == Mode::Bdaqc && !cfg.dt.is_empty() {
                jobs.extend(cfg.dt.iter().map(|&dt| (n, mode, dt)));
            } else {
                jobs.push((n, mode, cfg.noise.dt));
            }
        }
    }
    let out: Vec<(Row, Vec<RunRow>)> = jobs
        .into_par_iter()
        .map(|(n, mode, dt)| {
            let start = Instant::now();
            let label = match mode {
                Mode::Bdaqc => format!("bdaqc@{dt}"),
                m => m.label().to_string(),
            };
            let x = n as f64;
            let outcome = prepared.clone().and_then(|_| {
                let p = problem.protocol(mode, n, dt, cfg.dqc_mode)?;
                let spec = NoiseSpec { dt, ..cfg.noise.clone() };
                let key = [mode_key(mode), n as u64, dt.to_bits()];
                let r = monte_carlo_fidelity(&p, &psi0, &exact, &spec, &key)?;
                Ok((r, protocol_time(&p)))
            });
            let wall = start.elapsed().as_secs_f64();
            match outcome {
                Ok((r, t)) => {
                    let runs = r
                        .fidelities
                        .iter()
                        .enumerate()
                        .map(|(i, &f)| RunRow {
                            sweep_var: x,
                            mode: label.clone(),
                            run: i,
                            fidelity: f,
                        })
                        .collect();
                    let row = Row {
                        sweep_var: x,
                        mode: label,
                        mean_fidelity: Some(r.mean),
                        stderr: Some(r.stderr),
                        total_analog_time: Some(t),
                        wall_time: wall,
                        status: "ok".into(),
                    };
                    (row, runs)
                }
                Err(e) => (Row::failed(x, label, wall, e), Vec::new()),
            }
        })
        .collect();
    let (rows, runs): (Vec<Row>, Vec<Vec<RunRow>>) = out.into_iter().unzip();
    Ok(Results {
        rows,
        runs: runs.into_iter().flatten().collect(),
        couplings: Vec::new(),
    })
}

/// Per-Trotter-step time of the analog compilation and both digital baselines per qubit count.
fn times(cfg: &RunConfig) -> Results {
    let n_steps = cfg.n_steps[0];
    let rows = cfg
        .qubit_counts()
        .into_par_iter()
        .flat_map_iter(|n| {
            let x = n as f64;
            let start = Instant::now();
            let problem = Problem::new(cfg, n);
            let daqc = problem
                .as_ref()
                .map_err(|e| format!("{e:#}"))
                .and_then(|p| p.compile(n_steps).map_err(|e| e.to_string()))
                .map(|c| c.schedule.total_analog_time() / n_steps as f64);
            let mut rows = vec![time_row(x, "daqc", daqc, start)];
            for (label, mode) in [("dqc-direct", DqcMode::DirectAta), ("dqc-swap", DqcMode::NnSwap)] {
                let start = Instant::now();
                let t = problem
                    .as_ref()
                    .map_err(|e| format!("{e:#}"))
                    .and_then(|p| {
                        dqc_circuit(&p.target, &p.resource, p.t_final, n_steps, mode).map_err(|e| e.to_string())
                    })
                    .map(|c| c.step_time);
                rows.push(time_row(x, label, t, start));
            }
            rows
        })
        .collect();
    Results {
        rows,
        ..Default::default()
    }
}

fn time_row(x: f64, mode: &str, t: Result<f64, String>, start: Instant) -> Row {
    let wall = start.elapsed().as_secs_f64();
    match t {
        Ok(t) => Row {
            sweep_var: x,
            mode: mode.into(),
            mean_fidelity: None,
            stderr: None,
            total_analog_time: Some(t),
            wall_time: wall,
            status: "ok".into(),
        },
        Err(e) => Row::failed(x, mode.into(), wall, e),
    }
}

/// Block times of one Trotter step by block index, and digital times by term index.
fn block_times(cfg: &RunConfig) -> anyhow::Result<Results> {
    let n_steps = cfg.n_steps[0];
    let problem = Problem::new(cfg, cfg.n_qubits)?;
    let mut rows = Vec::new();
    let start = Instant::now();
    let sub_reports: Vec<Value> = match problem.compile(n_steps) {
        Ok(c) => match &problem.spec {
            TargetSpec::Xz { .. } => c.details["sub_reports"].as_array().cloned().unwrap_or_default(),
            _ => vec![c.details],
        },
        Err(e) => {
            rows.push(Row::failed(0.0, "daqc".into(), start.elapsed().as_secs_f64(), e));
            Vec::new()
        }
    };
    let wall = start.elapsed().as_secs_f64();
    for (set, report) in sub_reports.iter().enumerate() {
        for (suffix, field) in [("raw", "times"), ("executed", "shifted_times")] {
            let values = report[field].as_array().cloned().unwrap_or_default();
            for (alpha, v) in values.iter().enumerate() {
                rows.push(time_row(
                    alpha as f64,
                    &format!("daqc-set{set}-{suffix}"),
                    v.as_f64().ok_or_else(|| "missing time".to_string()),
                    Instant::now(),
                ));
                rows.last_mut().expect("pushed").wall_time = wall;
            }
        }
    }
    let n = problem.n_qubits();
    for (label, mode) in [("dqc-direct", DqcMode::DirectAta), ("dqc-swap", DqcMode::NnSwap)] {
        for (beta, (w, c)) in problem.target.terms().enumerate() {
            let start = Instant::now();
            let t = SpinHamiltonian::from_terms(n, [(c, w.clone())])
                .and_then(|single| dqc_circuit(&single, &problem.resource, problem.t_final, n_steps, mode))
                .map(|circ| circ.step_time)
                .map_err(|e| e.to_string());
            rows.push(time_row(beta as f64, label, t, start));
        }
    }
    Ok(Results {
        rows,
        ..Default::default()
    })
}

pub fn profile_label(p: &CouplingProfile) -> String {
    match p {
        CouplingProfile::Homogeneous { .. } => "homogeneous".into(),
        CouplingProfile::Polynomial { alpha, .. } => format!("polynomial(alpha={alpha})"),
        CouplingProfile::Exponential { .. } => "exponential".into(),
        CouplingProfile::Explicit { .. } => "explicit".into(),
    }
}

/// `g(0, d)` for each resource, comparison and target profile.
fn couplings(cfg: &RunConfig) -> Results {
    let mut named: Vec<(String, CouplingProfile)> = std::iter::once(&cfg.resource)
        .chain(&cfg.compare)
        .map(|p| (format!("resource:{}", profile_label(p)), p.clone()))
        .collect();
    match &cfg.target {
        TargetSpec::Ising { profile, .. } => named.push(("target:zz".into(), profile.clone())),
        TargetSpec::Xz { .. } => {
            named.extend(cfg.target.xz_profiles().into_iter().map(|(l, p)| (format!("target:{l}"), p)))
        }
        TargetSpec::Mbody { .. } => {}
    }
    let couplings = named
        .iter()
        .flat_map(|(series, p)| {
            (1..cfg.n_qubits).map(move |d| CouplingRow {
                distance: d,
                series: series.clone(),
                coupling: p.coupling(0, d),
            })
        })
        .collect();
    Results {
        couplings,
        ..Default::default()
    }
}
