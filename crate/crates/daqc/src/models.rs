//! Builders for the target and resource Hamiltonian families.
//!
//! Qubit indices are 0-based throughout; `(j, k)` always means `j < k`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DaqcError, Result};
use crate::hamiltonian::SpinHamiltonian;
use crate::pauli::{Pauli, PauliWord};

/// One entry of an explicit coupling table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCoupling {
    pub j: usize,
    pub k: usize,
    pub g: f64,
}

/// Distance-dependent two-body coupling strengths `g_jk`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CouplingProfile {
    /// `g_jk = J`.
    Homogeneous {
        #[serde(rename = "J")]
        j: f64,
    },
    /// `g_jk = J / |j-k|^alpha`.
    Polynomial {
        #[serde(rename = "J")]
        j: f64,
        alpha: f64,
        #[serde(default)]
        physical_ion: bool,
    },
    /// `g_jk = J exp(-(|j-k|-1)^2)`.
    Exponential {
        #[serde(rename = "J")]
        j: f64,
    },
    /// Arbitrary table; missing pairs are zero.
    Explicit { table: Vec<PairCoupling> },
}

impl CouplingProfile {
    pub fn homogeneous(j: f64) -> Self {
        CouplingProfile::Homogeneous { j }
    }

    pub fn polynomial(j: f64, alpha: f64) -> Self {
        CouplingProfile::Polynomial {
            j,
            alpha,
            physical_ion: false,
        }
    }

    pub fn exponential(j: f64) -> Self {
        CouplingProfile::Exponential { j }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |x: f64, what: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(DaqcError::InvalidArgument(format!("non-finite {what} {x}")))
            }
        };
        match self {
            CouplingProfile::Homogeneous { j } | CouplingProfile::Exponential { j } => finite(*j, "J"),
            CouplingProfile::Polynomial {
                j,
                alpha,
                physical_ion,
            } => {
                finite(*j, "J")?;
                finite(*alpha, "alpha")?;
                if *physical_ion && !(*alpha > 0.0 && *alpha < 3.0) {
                    return Err(DaqcError::InvalidArgument(format!(
                        "ion-trap exponent alpha={alpha} outside (0, 3)"
                    )));
                }
                Ok(())
            }
            CouplingProfile::Explicit { table } => {
                for e in table {
                    finite(e.g, "coupling")?;
                    if e.j == e.k {
                        return Err(DaqcError::InvalidPair(e.j, e.k));
                    }
                }
                Ok(())
            }
        }
    }

    /// Coupling between qubits `j` and `k`.
    pub fn coupling(&self, j: usize, k: usize) -> f64 {
        let d = j.abs_diff(k) as f64;
        match self {
            CouplingProfile::Homogeneous { j } => *j,
            CouplingProfile::Polynomial { j, alpha, .. } => j / d.powf(*alpha),
            CouplingProfile::Exponential { j } => j * (-(d - 1.0).powi(2)).exp(),
            CouplingProfile::Explicit { table } => {
                let (a, b) = (j.min(k), j.max(k));
                table
                    .iter()
                    .filter(|e| e.j.min(e.k) == a && e.j.max(e.k) == b)
                    .map(|e| e.g)
                    .sum()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    #[default]
    Ata,
    Nn,
}

impl Topology {
    /// Ordered pairs `(j, k)`, `j < k`, in pair-index order.
    pub fn pairs(self, n_qubits: usize) -> Vec<(usize, usize)> {
        match self {
            Topology::Ata => (0..n_qubits)
                .flat_map(|j| (j + 1..n_qubits).map(move |k| (j, k)))
                .collect(),
            Topology::Nn => (0..n_qubits.saturating_sub(1)).map(|j| (j, j + 1)).collect(),
        }
    }
}

fn check_two(n_qubits: usize) -> Result<()> {
    if n_qubits < 2 {
        return Err(DaqcError::InvalidArgument(format!(
            "need at least 2 qubits, got {n_qubits}"
        )));
    }
    Ok(())
}

/// `sum_{(j,k)} g_jk Z_j Z_k` over the pairs of `topology`.
pub fn build_ising(
    n_qubits: usize,
    profile: &CouplingProfile,
    topology: Topology,
) -> Result<SpinHamiltonian> {
    check_two(n_qubits)?;
    profile.validate()?;
    SpinHamiltonian::from_terms(
        n_qubits,
        topology
            .pairs(n_qubits)
            .into_iter()
            .map(|(j, k)| (profile.coupling(j, k), PauliWord::zz(n_qubits, j, k))),
    )
}

fn axis_label(label: &str) -> Result<(Pauli, Pauli)> {
    let mut it = label.chars().map(|c| match c.to_ascii_lowercase() {
        'x' => Ok(Pauli::X),
        'z' => Ok(Pauli::Z),
        _ => Err(DaqcError::UnsupportedAxis(label.to_string())),
    });
    match (it.next(), it.next(), it.next()) {
        (Some(a), Some(b), None) => Ok((a?, b?)),
        _ => Err(DaqcError::UnsupportedAxis(label.to_string())),
    }
}

/// `sum_{(j,k)} sum_{mu,nu} g^{mu nu}_jk sigma_mu^j sigma_nu^k` with one profile
/// per axis label among `xx`, `xz`, `zx`, `zz`.
pub fn build_xz_target(
    n_qubits: usize,
    profiles: &[(&str, CouplingProfile)],
    topology: Topology,
) -> Result<SpinHamiltonian> {
    check_two(n_qubits)?;
    let mut h = SpinHamiltonian::new(n_qubits)?;
    for (label, profile) in profiles {
        let (mu, nu) = axis_label(label)?;
        profile.validate()?;
        for (j, k) in topology.pairs(n_qubits) {
            let w = PauliWord::from_sparse(n_qubits, &[(j, mu), (k, nu)])?;
            h.add(profile.coupling(j, k), w)?;
        }
    }
    Ok(h)
}

/// All nearest-neighbour contiguous words with 2..=`max_body` non-identity
/// factors over {X, Y, Z}, ordered by body count, start site, then axes.
pub fn mbody_words(n_qubits: usize, max_body: usize) -> Vec<PauliWord> {
    let mut out = Vec::new();
    for body in 2..=max_body.min(n_qubits) {
        for start in 0..=n_qubits - body {
            for combo in 0..3usize.pow(body as u32) {
                let mut axes = vec![Pauli::I; n_qubits];
                let mut c = combo;
                for q in (0..body).rev() {
                    axes[start + q] = Pauli::NONTRIVIAL[c % 3];
                    c /= 3;
                }
                out.push(PauliWord::new(axes));
            }
        }
    }
    out
}

/// Start qubit and length of a word whose support is one contiguous run, if any.
pub fn contiguous_window(word: &PauliWord) -> Option<(usize, usize)> {
    let s = word.support();
    let (&first, &last) = (s.first()?, s.last()?);
    (last - first + 1 == s.len()).then_some((first, s.len()))
}

/// Coefficient source for [`build_mbody_target`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MBodySource {
    Explicit { terms: Vec<(f64, PauliWord)> },
    /// Uniform in `[-J, J]` drawn in [`mbody_words`] order.
    Random {
        seed: u64,
        #[serde(rename = "J")]
        j: f64,
    },
}

pub fn build_mbody_target(n_qubits: usize, max_body: usize, source: &MBodySource) -> Result<SpinHamiltonian> {
    if max_body < 2 || n_qubits < max_body {
        return Err(DaqcError::InvalidArgument(format!(
            "need 2 <= M <= N, got M={max_body}, N={n_qubits}"
        )));
    }
    match source {
        MBodySource::Explicit { terms } => {
            let mut h = SpinHamiltonian::new(n_qubits)?;
            for (c, w) in terms {
                match contiguous_window(w) {
                    Some((_, len)) if (2..=max_body).contains(&len) => h.add(*c, w.clone())?,
                    _ => return Err(DaqcError::UnsupportedTerm(w.to_string())),
                }
            }
            Ok(h)
        }
        MBodySource::Random { seed, j } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            SpinHamiltonian::from_terms(
                n_qubits,
                mbody_words(n_qubits, max_body)
                    .into_iter()
                    .map(|w| (j * rng.random_range(-1.0..=1.0), w)),
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn homogeneous_ata_n3() {
        let h = build_ising(3, &CouplingProfile::homogeneous(1.0), Topology::Ata).unwrap();
        assert_eq!(h.len(), 3);
        for w in ["ZZI", "ZIZ", "IZZ"] {
            assert_eq!(h.coefficient(&w.parse().unwrap()), 1.0);
        }
    }

    #[test]
    fn profile_values() {
        let p = CouplingProfile::polynomial(1.0, 2.5);
        assert!((p.coupling(0, 2) - 0.176_776_695_296_636_9).abs() < 1e-15);
        let e = CouplingProfile::exponential(1.0);
        assert!((e.coupling(0, 2) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(e.coupling(1, 2), 1.0);
    }

    #[test]
    fn term_counts() {
        for n in 2..=10 {
            let p = CouplingProfile::homogeneous(0.3);
            assert_eq!(build_ising(n, &p, Topology::Ata).unwrap().len(), n * (n - 1) / 2);
            assert_eq!(build_ising(n, &p, Topology::Nn).unwrap().len(), n - 1);
            if n >= 4 {
                let words = mbody_words(n, 4);
                assert_eq!(words.len(), 9 * (n - 1) + 27 * (n - 2) + 81 * (n - 3));
            }
        }
        assert_eq!(mbody_words(4, 4).len(), 162);
    }

    #[test]
    fn xz_paper_target() {
        let p = CouplingProfile::polynomial(0.5, 0.5);
        let labels = ["xx", "xz", "zx", "zz"].map(|l| (l, p.clone()));
        let h = build_xz_target(5, &labels, Topology::Ata).unwrap();
        assert_eq!(h.len(), 40);
        assert_eq!(h.coefficient(&"XXIII".parse().unwrap()), 0.5);
        assert!(build_xz_target(3, &[("xy", p)], Topology::Ata).is_err());
    }

    #[test]
    fn xz_reduces_to_ising() {
        let h = build_xz_target(2, &[("zz", CouplingProfile::homogeneous(1.0))], Topology::Ata).unwrap();
        assert_eq!(h, build_ising(2, &CouplingProfile::homogeneous(1.0), Topology::Ata).unwrap());
    }

    #[test]
    fn seeded_mbody_is_reproducible() {
        let src = MBodySource::Random { seed: 7, j: 0.5 };
        let a = build_mbody_target(5, 4, &src).unwrap();
        let b = build_mbody_target(5, 4, &src).unwrap();
        assert_eq!(a, b);
        assert!(a.terms().all(|(_, c)| c.abs() <= 0.5));
        assert!(build_mbody_target(3, 4, &src).is_err());
    }

    #[test]
    fn explicit_mbody_single_word() {
        let w: PauliWord = "XXXXI".parse().unwrap();
        let h = build_mbody_target(5, 4, &MBodySource::Explicit { terms: vec![(1.0, w.clone())] }).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h.coefficient(&w), 1.0);
        let bad = MBodySource::Explicit { terms: vec![(1.0, "XIXII".parse().unwrap())] };
        assert!(build_mbody_target(5, 4, &bad).is_err());
    }

    #[test]
    fn profile_json_shorthand() {
        let p: CouplingProfile = serde_json::from_str(r#"{"kind":"polynomial","J":0.5,"alpha":2.5}"#).unwrap();
        assert_eq!(p, CouplingProfile::polynomial(0.5, 2.5));
        let bad = CouplingProfile::Polynomial { j: 1.0, alpha: 3.5, physical_ion: true };
        assert!(bad.validate().is_err());
    }
}
