//! Golden checks: closed forms, printed tables and oracle equivalences.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::executor::{bang_error_estimate, check_term_identity, run_bdaqc, run_sdaqc, schedule_unitary};
use crate::hamiltonian::SpinHamiltonian;
use crate::ising::{compile_ising, cz_gadget, pair_index, sign_matrix, sign_matrix_eigenvalues, IsingOptions};
use crate::linalg::{phase_aligned_distance, propagator};
use crate::mbody::{conjugated_block, plan_mbody, MBodyOptions, OxxLayer};
use crate::models::{build_ising, build_mbody_target, CouplingProfile, MBodySource, Topology};
use crate::noise::{monte_carlo_fidelity, NoiseSpec, Protocol};
use crate::pauli::{Pauli, PauliWord};
use crate::state::{fidelity, StateVector};
use crate::xz::{default_angles, reconstruct, solve_pair_strengths};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

/// One printed term `g_bond * prod trig(2 theta_i) * word`, 1-based indices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GoldenTerm {
    pub bond: usize,
    pub factors: &'static [(Trig, usize)],
    pub word: &'static str,
}

use Trig::{Cos, Sin};

const fn t(bond: usize, factors: &'static [(Trig, usize)], word: &'static str) -> GoldenTerm {
    GoldenTerm { bond, factors, word }
}

/// Printed expansion conjugated by the XX generators on sites (2,3), (4,5), (6,7).
pub const PRINTED_EVEN: [GoldenTerm; 15] = [
    t(1, &[(Cos, 2)], "Z1Z2"),
    t(1, &[(Sin, 2)], "Z1Y2X3"),
    t(2, &[], "Z2Z3"),
    t(3, &[(Cos, 2), (Cos, 4)], "Z3Z4"),
    t(3, &[(Sin, 2), (Cos, 4)], "X2Y3Z4"),
    t(3, &[(Cos, 2), (Sin, 4)], "Z2Y3X4"),
    t(3, &[(Sin, 2), (Sin, 4)], "X2Y3Y4X5"),
    t(4, &[], "Z4Z5"),
    t(5, &[(Cos, 4), (Cos, 6)], "Z5Z6"),
    t(5, &[(Sin, 4), (Cos, 6)], "X4Y5Z6"),
    t(5, &[(Cos, 4), (Sin, 6)], "Z4Y5X6"),
    t(5, &[(Sin, 4), (Sin, 6)], "X4Y5Y6X7"),
    t(6, &[], "Z6Z7"),
    t(7, &[(Cos, 6)], "Z7Z8"),
    t(7, &[(Sin, 6)], "X6Y7Z8"),
];

/// Printed expansion conjugated by the XX generators on sites (1,2), (3,4), (5,6), (7,8).
pub const PRINTED_ODD: [GoldenTerm; 16] = [
    t(1, &[], "Z1Z2"),
    t(2, &[(Cos, 1), (Cos, 3)], "Z2Z3"),
    t(2, &[(Sin, 1), (Cos, 3)], "X1Y2Z3"),
    t(2, &[(Cos, 1), (Sin, 3)], "Z2Y3X4"),
    t(2, &[(Cos, 1), (Cos, 3)], "X1Y2Y3X4"),
    t(3, &[], "Z3Z4"),
    t(4, &[(Cos, 3), (Cos, 5)], "Z4Z5"),
    t(4, &[(Sin, 3), (Cos, 5)], "X3Y4Z5"),
    t(4, &[(Cos, 3), (Sin, 5)], "Z4Y5X6"),
    t(4, &[(Cos, 3), (Cos, 5)], "X3Y4Y5X6"),
    t(5, &[], "Z5Z6"),
    t(6, &[(Cos, 5), (Cos, 7)], "Z6Z7"),
    t(6, &[(Sin, 5), (Cos, 7)], "X5Y6Z7"),
    t(6, &[(Cos, 5), (Sin, 7)], "Z6Y7X8"),
    t(6, &[(Sin, 5), (Sin, 7)], "X5Y6Y7X8"),
    t(7, &[], "Y7Z8"),
];

/// Printed entries that disagree with the expansion, with their corrected form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Erratum {
    pub odd: bool,
    pub index: usize,
    pub corrected: GoldenTerm,
}

pub const ERRATA: [Erratum; 5] = [
    Erratum { odd: false, index: 5, corrected: t(3, &[(Cos, 2), (Sin, 4)], "Z3Y4X5") },
    Erratum { odd: false, index: 10, corrected: t(5, &[(Cos, 4), (Sin, 6)], "Z5Y6X7") },
    Erratum { odd: true, index: 4, corrected: t(2, &[(Sin, 1), (Sin, 3)], "X1Y2Y3X4") },
    Erratum { odd: true, index: 9, corrected: t(4, &[(Sin, 3), (Sin, 5)], "X3Y4Y5X6") },
    Erratum { odd: true, index: 15, corrected: t(7, &[], "Z7Z8") },
];

/// The printed expansions use `e^{iO} H e^{-iO}`, which is [`conjugated_block`]
/// with every phase negated.
pub const GOLDEN_PHASE_SIGN: f64 = -1.0;

pub const GOLDEN_QUBITS: usize = 8;

/// Parses `Z1Y2X3` (1-based sites) into a word on `n` qubits.
pub fn parse_sites(n: usize, s: &str) -> Result<PauliWord> {
    let mut factors = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let p = Pauli::from_char(chars[i])
            .ok_or_else(|| crate::error::DaqcError::InvalidWord(s.to_string()))?;
        let mut j = i + 1;
        while j < chars.len() && chars[j].is_ascii_digit() {
            j += 1;
        }
        let site: usize = chars[i + 1..j]
            .iter()
            .collect::<String>()
            .parse()
            .map_err(|_| crate::error::DaqcError::InvalidWord(s.to_string()))?;
        if site == 0 {
            return Err(crate::error::DaqcError::InvalidWord(s.to_string()));
        }
        factors.push((site - 1, p));
        i = j;
    }
    PauliWord::from_sparse(n, &factors)
}

impl GoldenTerm {
    /// Coefficient for 1-based `theta` and `g` (index 0 unused).
    pub fn value(&self, theta: &[f64], g: &[f64]) -> f64 {
        self.factors.iter().fold(g[self.bond], |acc, (f, i)| {
            let x = 2.0 * theta[*i];
            acc * match f {
                Cos => x.cos(),
                Sin => x.sin(),
            }
        })
    }
}

/// Expansion of `e^{iO} (sum_j g_j Z_j Z_{j+1}) e^{-iO}` with `O` on the odd or even sites.
pub fn golden_expansion(odd: bool, theta: &[f64], g: &[f64]) -> Result<SpinHamiltonian> {
    signed_expansion(odd, theta, g, GOLDEN_PHASE_SIGN)
}

fn signed_expansion(odd: bool, theta: &[f64], g: &[f64], sign: f64) -> Result<SpinHamiltonian> {
    let n = GOLDEN_QUBITS;
    let first = if odd { 1 } else { 2 };
    let generators = (first..n)
        .step_by(2)
        .map(|site| (site - 1, sign * theta[site]))
        .collect();
    let o = OxxLayer { set: usize::from(!odd), generators };
    let zz = SpinHamiltonian::from_terms(n, (1..n).map(|j| (g[j], PauliWord::zz(n, j - 1, j))))?;
    conjugated_block(&zz, &o)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldenReport {
    pub printed_terms: usize,
    /// `(odd, index, printed word, deviation)` of printed entries that disagree.
    pub mismatches: Vec<(bool, usize, String, f64)>,
    /// Largest deviation once the recorded errata are applied.
    pub corrected_deviation: f64,
    /// Expansion terms not accounted for by the corrected table.
    pub unexplained_terms: usize,
}

impl GoldenReport {
    /// Every mismatch is a recorded erratum and the corrected table is exact.
    pub fn passes(&self, tol: f64) -> bool {
        let expected: Vec<(bool, usize)> = ERRATA.iter().map(|e| (e.odd, e.index)).collect();
        let found: Vec<(bool, usize)> = self.mismatches.iter().map(|m| (m.0, m.1)).collect();
        found == expected && self.corrected_deviation <= tol && self.unexplained_terms == 0
    }
}

fn table(odd: bool) -> &'static [GoldenTerm] {
    if odd {
        &PRINTED_ODD
    } else {
        &PRINTED_EVEN
    }
}

/// Compares the printed tables with the expansion at the given angles and strengths.
pub fn check_golden_table(theta: &[f64], g: &[f64], tol: f64) -> Result<GoldenReport> {
    check_golden_table_signed(theta, g, tol, GOLDEN_PHASE_SIGN)
}

/// As [`check_golden_table`] with an explicit phase sign for the expansion.
pub fn check_golden_table_signed(theta: &[f64], g: &[f64], tol: f64, sign: f64) -> Result<GoldenReport> {
    let n = GOLDEN_QUBITS;
    let mut mismatches = Vec::new();
    let mut corrected_deviation: f64 = 0.0;
    let mut unexplained_terms = 0;
    let mut printed_terms = 0;
    for odd in [false, true] {
        let h = signed_expansion(odd, theta, g, sign)?;
        let printed = table(odd);
        printed_terms += printed.len();
        let mut corrected = SpinHamiltonian::new(n)?;
        for (i, term) in printed.iter().enumerate() {
            let w = parse_sites(n, term.word)?;
            let dev = (h.coefficient(&w) - term.value(theta, g)).abs();
            if dev > tol {
                mismatches.push((odd, i, term.word.to_string(), dev));
            }
            let fixed = ERRATA
                .iter()
                .find(|e| e.odd == odd && e.index == i)
                .map_or(*term, |e| e.corrected);
            corrected.add(fixed.value(theta, g), parse_sites(n, fixed.word)?)?;
        }
        corrected_deviation = corrected_deviation.max(corrected.max_coefficient_diff(&h));
        unexplained_terms += h
            .terms()
            .filter(|(w, c)| c.abs() > tol && corrected.coefficient(w) == 0.0)
            .count();
    }
    Ok(GoldenReport {
        printed_terms,
        mismatches,
        corrected_deviation,
        unexplained_terms,
    })
}

/// Random angles and strengths for the golden comparison, 1-based with index 0 unused.
pub fn golden_sample(seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = (0..=GOLDEN_QUBITS).map(|_| rng.random_range(-PI..PI)).collect();
    let g = (0..GOLDEN_QUBITS).map(|_| rng.random_range(-1.0..1.0)).collect();
    (theta, g)
}

/// Test hooks that deliberately break one check.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Perturbation {
    /// Flip one off-diagonal entry of the sign matrix before the spectrum check.
    pub sign_matrix: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub module: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, module: &str, outcome: Result<(bool, String)>) -> Check {
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    Check {
        name: name.into(),
        module: module.into(),
        passed,
        detail,
    }
}

fn spectrum_check(perturb: bool) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for n in 3..=10 {
        let mut m = sign_matrix(n);
        if perturb {
            m[(0, 1)] = -m[(0, 1)];
            m[(1, 0)] = -m[(1, 0)];
        }
        let mut eig: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        let [l1, l2, l3] = sign_matrix_eigenvalues(n);
        let k = n * (n - 1) / 2;
        let mut expected: Vec<f64> = std::iter::once(l1)
            .chain(std::iter::repeat_n(l2, n - 1))
            .chain(std::iter::repeat_n(l3, k - n))
            .collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in eig.iter().zip(&expected) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok((worst < 1e-9, format!("max eigenvalue deviation {worst:.2e} for N=3..10")))
}

fn table_check() -> Result<(bool, String)> {
    let m = sign_matrix(3);
    let expected = [[1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];
    let signs_ok = (0..3).all(|i| (0..3).all(|j| m[(i, j)] == expected[i][j]));
    let index_ok = pair_index(0, 1, 3)? == 0 && pair_index(0, 2, 3)? == 1 && pair_index(1, 2, 3)? == 2;
    Ok((signs_ok && index_ok, "N=3 signs and pair ordering".into()))
}

fn ising_check() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for (n, profile) in [
        (3, CouplingProfile::homogeneous(1.0)),
        (5, CouplingProfile::polynomial(1.0, 1.0)),
        (6, CouplingProfile::exponential(1.0)),
    ] {
        let res = build_ising(n, &profile, Topology::Ata)?;
        let target = build_ising(n, &CouplingProfile::exponential(-0.6), Topology::Ata)?;
        let (s, _) = compile_ising(&target, &res, 1.0, &IsingOptions::default())?;
        let exact = propagator(&target, 1.0)?.matrix();
        worst = worst.max(phase_aligned_distance(&schedule_unitary(&s)?, &exact));
    }
    Ok((worst < 1e-9, format!("max unitary deviation {worst:.2e}")))
}

fn cz_check() -> Result<(bool, String)> {
    let res = build_ising(2, &CouplingProfile::homogeneous(1.0), Topology::Ata)?;
    let mut worst: f64 = 0.0;
    for phi in [0.3, 1.1, PI / 2.0, 2.9] {
        let s = cz_gadget(&res, 0, 1, phi, &IsingOptions::default())?;
        let u = schedule_unitary(&s)?;
        let mut cp = nalgebra::DMatrix::identity(4, 4);
        cp[(3, 3)] = num_complex::Complex64::from_polar(1.0, -2.0 * phi);
        worst = worst.max(phase_aligned_distance(&u, &cp));
    }
    Ok((worst < 1e-10, format!("max deviation {worst:.2e}")))
}

fn xz_check() -> Result<(bool, String)> {
    let n = 4;
    let profile = CouplingProfile::polynomial(0.5, 1.0);
    let target = crate::models::build_xz_target(
        n,
        &[("xx", profile.clone()), ("zx", profile.clone()), ("zz", profile)],
        Topology::Ata,
    )?;
    let angles = default_angles(n);
    let strengths = solve_pair_strengths(&angles, &target)?;
    let back = reconstruct(&angles, &strengths)?;
    let dev = back.max_coefficient_diff(&target);
    Ok((dev < 1e-10, format!("pair-system reconstruction deviation {dev:.2e}")))
}

fn golden_check() -> Result<(bool, String)> {
    let (theta, g) = golden_sample(2024);
    let r = check_golden_table(&theta, &g, 1e-10)?;
    Ok((
        r.passes(1e-10),
        format!(
            "{} of {} printed entries exact, {} recorded errata, corrected deviation {:.2e}",
            r.printed_terms - r.mismatches.len(),
            r.printed_terms,
            ERRATA.len(),
            r.corrected_deviation
        ),
    ))
}

fn mbody_check() -> Result<(bool, String)> {
    let target = build_mbody_target(4, 4, &MBodySource::Random { seed: 3, j: 0.5 })?;
    let plan = plan_mbody(&target, &MBodyOptions::default())?;
    let dev = plan.reconstruct()?.max_coefficient_diff(&target);
    Ok((dev < 1e-8, format!("N=4 reconstruction deviation {dev:.2e}")))
}

fn executor_check() -> Result<(bool, String)> {
    let h = SpinHamiltonian::from_terms(2, [(1.0, PauliWord::zz(2, 0, 1))])?;
    let r = SpinHamiltonian::from_terms(2, [(2.0, PauliWord::from_sparse(2, &[(0, Pauli::Z)])?)])?;
    let commuting = bang_error_estimate(&h, &r, 0.1)?;
    let mut worst: f64 = 0.0;
    for (mu, nu) in [(Pauli::X, Pauli::X), (Pauli::X, Pauli::Z), (Pauli::Z, Pauli::X), (Pauli::Z, Pauli::Z)] {
        worst = worst.max(check_term_identity(mu, nu, 0.41)?.corrected);
    }
    let mut s = crate::schedule::Schedule::new(h);
    s.push_analog(0.5, 1.0);
    let psi = StateVector::basis(2, 1)?;
    let same = fidelity(&run_sdaqc(&s, &psi)?, &run_bdaqc(&s, &psi, 0.1)?)?;
    let ok = commuting.estimate == 0.0 && worst < 1e-12 && (same - 1.0).abs() < 1e-12;
    Ok((ok, format!("corrected two-qubit identity deviation {worst:.2e}")))
}

fn noise_check() -> Result<(bool, String)> {
    let h = build_ising(2, &CouplingProfile::homogeneous(1.0), Topology::Ata)?;
    let mut s = crate::schedule::Schedule::new(h);
    s.push_analog(0.7, 1.0);
    let psi = StateVector::basis(2, 2)?;
    let ideal = run_sdaqc(&s, &psi)?;
    let r = monte_carlo_fidelity(&Protocol::Stepwise(s), &psi, &ideal, &NoiseSpec::ideal(), &[0])?;
    Ok(((r.mean - 1.0).abs() < 1e-12, format!("noise-free fidelity {:.15}", r.mean)))
}

fn models_check() -> Result<(bool, String)> {
    let n = 6;
    let ata = build_ising(n, &CouplingProfile::polynomial(1.0, 1.0), Topology::Ata)?;
    let nn = build_ising(n, &CouplingProfile::homogeneous(1.0), Topology::Nn)?;
    let far = ata.coefficient(&PauliWord::zz(n, 0, 5));
    let ok = ata.len() == n * (n - 1) / 2 && nn.len() == n - 1 && far > 0.0 && far < ata.coefficient(&PauliWord::zz(n, 0, 1));
    Ok((ok, format!("{} ATA and {} NN couplings", ata.len(), nn.len())))
}

/// Runs every golden check.
pub fn run_golden_suite(perturb: Perturbation) -> Vec<Check> {
    vec![
        check("coupling-profiles", "hamiltonian-models", models_check()),
        check("sign-table", "ising-compiler", table_check()),
        check("sign-spectrum", "ising-compiler", spectrum_check(perturb.sign_matrix)),
        check("ising-exactness", "ising-compiler", ising_check()),
        check("cz-gadget", "ising-compiler", cz_check()),
        check("xz-pair-system", "xz-compiler", xz_check()),
        check("xx-golden-table", "mbody-compiler", golden_check()),
        check("mbody-reconstruction", "mbody-compiler", mbody_check()),
        check("executor-oracles", "executor", executor_check()),
        check("noise-free-limit", "noise-engine", noise_check()),
        check(
            "pauli-algebra",
            "pauli-core",
            (|| {
                let x: PauliWord = "XI".parse()?;
                let z: PauliWord = "ZI".parse()?;
                let (phase, y) = z.mul(&x)?;
                Ok((
                    y.to_string() == "YI" && (phase - num_complex::Complex64::new(0.0, 1.0)).norm() < 1e-15,
                    "ZX = iY".into(),
                ))
            })(),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_one_based_sites() {
        assert_eq!(parse_sites(8, "X2Y3Y4X5").unwrap().to_string(), "IXYYXIII");
        assert!(parse_sites(8, "Z0").is_err());
    }

    #[test]
    fn printed_table_matches_up_to_recorded_errata() {
        for seed in [1, 2, 3] {
            let (theta, g) = golden_sample(seed);
            let r = check_golden_table(&theta, &g, 1e-10).unwrap();
            assert_eq!(r.printed_terms, 31);
            assert!(r.passes(1e-10), "{r:?}");
        }
    }

    #[test]
    fn opposite_sign_convention_fails() {
        let (theta, g) = golden_sample(5);
        let r = check_golden_table_signed(&theta, &g, 1e-10, -GOLDEN_PHASE_SIGN).unwrap();
        assert!(r.mismatches.len() > ERRATA.len());
    }

    #[test]
    fn suite_passes() {
        let checks = run_golden_suite(Perturbation::default());
        for c in &checks {
            assert!(c.passed, "{c:?}");
        }
        let modules: std::collections::BTreeSet<&str> = checks.iter().map(|c| c.module.as_str()).collect();
        assert!(modules.len() >= 7);
    }

    #[test]
    fn perturbed_sign_matrix_is_named() {
        let checks = run_golden_suite(Perturbation { sign_matrix: true });
        let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        assert_eq!(failed, ["sign-spectrum"]);
    }
}
