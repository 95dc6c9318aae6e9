//! Run configuration: parsing from TOML or JSON, validation and CLI overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use daqc::bench::{middle_excitation, Mode};
use daqc::executor::DqcMode;
use daqc::models::{CouplingProfile, MBodySource, Topology};
use daqc::noise::NoiseSpec;
use daqc::{StateVector, MAX_QUBITS};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    /// Fidelity against the exact evolution, swept over Trotter steps.
    #[default]
    Fidelity,
    /// Per-step analog and digital time totals, swept over qubit counts.
    Times,
    /// Raw and executed block times of one Trotter step.
    BlockTimes,
    /// Coupling strengths against qubit distance.
    Couplings,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    Ising {
        profile: CouplingProfile,
        #[serde(default)]
        topology: Topology,
    },
    Xz {
        #[serde(default)]
        topology: Topology,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        xx: Option<CouplingProfile>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        xz: Option<CouplingProfile>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        zx: Option<CouplingProfile>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        zz: Option<CouplingProfile>,
    },
    Mbody {
        max_body: usize,
        source: MBodySource,
    },
}

impl TargetSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            TargetSpec::Ising { .. } => "ising",
            TargetSpec::Xz { .. } => "xz",
            TargetSpec::Mbody { .. } => "mbody",
        }
    }

    /// Axis labels and profiles of an XZ target.
    pub fn xz_profiles(&self) -> Vec<(&'static str, CouplingProfile)> {
        match self {
            TargetSpec::Xz { xx, xz, zx, zz, .. } => [("xx", xx), ("xz", xz), ("zx", zx), ("zz", zz)]
                .into_iter()
                .filter_map(|(l, p)| p.clone().map(|p| (l, p)))
                .collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompileSettings {
    pub allow_fallback: bool,
    /// Refuse sign-inverted blocks.
    pub forbid_inversion: bool,
    pub symmetrized: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rotations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rotation_seed: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSettings {
    /// Also write every Monte Carlo fidelity to `runs.csv`.
    pub raw: bool,
    /// Also render `results.svg`.
    pub plot: bool,
}

fn default_name() -> String {
    "run".into()
}

fn default_modes() -> Vec<Mode> {
    vec![Mode::Sdaqc, Mode::Bdaqc, Mode::Dqc]
}

fn default_dqc_mode() -> DqcMode {
    DqcMode::DirectAta
}

fn default_state() -> String {
    "middle".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub experiment: Experiment,
    pub n_qubits: usize,
    /// Qubit counts swept by the `times` experiment; defaults to `[n_qubits]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n_qubits_list: Vec<usize>,
    /// Topology of the resource couplings.
    #[serde(default)]
    pub topology: Topology,
    pub t_final: f64,
    pub n_steps: Vec<usize>,
    /// Pulse widths of the banged mode; the noise width is used when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dt: Vec<f64>,
    #[serde(default = "default_modes")]
    pub modes: Vec<Mode>,
    #[serde(default = "default_dqc_mode")]
    pub dqc_mode: DqcMode,
    /// `middle` or a spin string such as `ddudd`.
    #[serde(default = "default_state")]
    pub initial_state: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub resource: CouplingProfile,
    /// Extra resource profiles listed by the `couplings` experiment.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub compare: Vec<CouplingProfile>,
    pub target: TargetSpec,
    #[serde(default = "NoiseSpec::ideal")]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub compile: CompileSettings,
    #[serde(default)]
    pub output: OutputSettings,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub runs: Option<usize>,
    pub no_noise: bool,
    pub allow_fallback: bool,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            RunConfig::from_json(&text)
        } else {
            RunConfig::from_toml(&text)
        }
    }

    pub fn from_toml(text: &str) -> anyhow::Result<RunConfig> {
        toml::from_str(text).context("parsing TOML config")
    }

    pub fn from_json(text: &str) -> anyhow::Result<RunConfig> {
        serde_json::from_str(text).context("parsing JSON config")
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.noise.seed = seed;
        }
        if let Some(out) = &o.out {
            self.output_dir = Some(out.clone());
        }
        if let Some(runs) = o.runs {
            self.noise.runs = runs;
        }
        if o.no_noise {
            self.noise = NoiseSpec {
                sigma_d: 0.0,
                r_u: 0.0,
                r_s: 0.0,
                r_b: 0.0,
                ..self.noise.clone()
            };
        }
        if o.allow_fallback {
            self.compile.allow_fallback = true;
        }
        if self.output_dir.is_none() {
            self.output_dir = Some(PathBuf::from("out").join(&self.name));
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("out").join(&self.name))
    }

    pub fn qubit_counts(&self) -> Vec<usize> {
        if self.n_qubits_list.is_empty() {
            vec![self.n_qubits]
        } else {
            self.n_qubits_list.clone()
        }
    }

    pub fn initial_state_for(&self, n_qubits: usize) -> anyhow::Result<StateVector> {
        if self.initial_state == "middle" {
            return Ok(middle_excitation(n_qubits)?);
        }
        let psi: StateVector = self
            .initial_state
            .parse()
            .with_context(|| format!("initial_state `{}`", self.initial_state))?;
        if psi.n_qubits() != n_qubits {
            bail!(
                "initial_state `{}` has {} qubits, expected {n_qubits}",
                self.initial_state,
                psi.n_qubits()
            );
        }
        Ok(psi)
    }

    /// Checks every field before any computation starts.
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            bail!("name must be a non-empty plain file name, got `{}`", self.name);
        }
        for n in self.qubit_counts().into_iter().chain([self.n_qubits]) {
            if !(2..=MAX_QUBITS).contains(&n) {
                bail!("qubit count {n} outside 2..={MAX_QUBITS}");
            }
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            bail!("t_final must be positive and finite, got {}", self.t_final);
        }
        if self.n_steps.is_empty() || self.n_steps.contains(&0) {
            bail!("n_steps must be a non-empty list of positive integers");
        }
        if let Some(dt) = self.dt.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
            bail!("dt entries must be positive, got {dt}");
        }
        if self.modes.is_empty() {
            bail!("modes must not be empty");
        }
        self.noise.validate().context("noise")?;
        self.resource.validate().context("resource")?;
        for p in &self.compare {
            p.validate().context("compare")?;
        }
        match &self.target {
            TargetSpec::Ising { profile, .. } => profile.validate().context("target.profile")?,
            TargetSpec::Xz { .. } => {
                let profiles = self.target.xz_profiles();
                if profiles.is_empty() {
                    bail!("xz target needs at least one of xx, xz, zx, zz");
                }
                for (l, p) in profiles {
                    p.validate().with_context(|| format!("target.{l}"))?;
                }
            }
            TargetSpec::Mbody { max_body, .. } => {
                if !(2..=self.n_qubits).contains(max_body) {
                    bail!("max_body must lie in 2..={}, got {max_body}", self.n_qubits);
                }
                if self.experiment != Experiment::Fidelity && self.experiment != Experiment::Couplings {
                    bail!("mbody targets support the fidelity experiment only");
                }
                if self.modes.contains(&Mode::Dqc) {
                    bail!("the dqc baseline covers two-body targets only; drop it from modes");
                }
            }
        }
        if self.experiment == Experiment::Fidelity {
            self.initial_state_for(self.n_qubits)?;
        }
        if self.experiment == Experiment::BlockTimes && matches!(self.target, TargetSpec::Mbody { .. }) {
            bail!("block_times needs an ising or xz target");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEMO: &str = r#"
name = "demo"
n_qubits = 3
t_final = 1.0
n_steps = [1]
modes = ["sdaqc"]

[resource]
kind = "homogeneous"
J = 1.0

[target]
kind = "ising"
profile = { kind = "polynomial", J = 0.7, alpha = 0.5 }
"#;

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::from_toml(DEMO).unwrap();
        assert_eq!(c.experiment, Experiment::Fidelity);
        assert_eq!(c.initial_state, "middle");
        assert!(c.noise.is_ideal());
        c.validate().unwrap();
    }

    #[test]
    fn toml_roundtrip_and_json_agree() {
        let c = RunConfig::from_toml(DEMO).unwrap();
        let back = RunConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(back, c);
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(RunConfig::from_json(&json).unwrap(), c);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = format!("{DEMO}\nbogus = 1\n");
        assert!(RunConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn validation_catches_bad_values() {
        let mut c = RunConfig::from_toml(DEMO).unwrap();
        c.n_steps = vec![0];
        assert!(c.validate().is_err());
        let mut c = RunConfig::from_toml(DEMO).unwrap();
        c.initial_state = "udu d".into();
        assert!(c.validate().is_err());
        let mut c = RunConfig::from_toml(DEMO).unwrap();
        c.noise.dt = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn overrides_take_precedence() {
        let mut c = RunConfig::from_toml(DEMO).unwrap();
        c.noise = NoiseSpec::default();
        c.apply(&Overrides {
            seed: Some(5),
            runs: Some(1),
            no_noise: true,
            allow_fallback: true,
            ..Default::default()
        });
        assert_eq!(c.noise.seed, 5);
        assert_eq!(c.noise.runs, 1);
        assert!(c.noise.is_ideal());
        assert!(c.compile.allow_fallback);
        assert_eq!(c.out_dir(), PathBuf::from("out/demo"));
    }
}
