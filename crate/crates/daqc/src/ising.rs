//! Inhomogeneous ZZ targets from a fixed ZZ resource.
//!
//! A block flipping the qubit set `S` with `sigma_x` layers turns the resource
//! coupling on pair `(j, k)` into `(-1)^{|S n {j,k}|} gbar_jk`. With one block
//! per generator the effective coupling on pair `b` is
//! `gbar_b sum_g A_bg t_g`, so block times solve `A t = t_F g / gbar`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{DaqcError, Result};
use crate::hamiltonian::SpinHamiltonian;
use crate::layer::RotationLayer;
use crate::pauli::{Pauli, PauliWord};
use crate::schedule::Schedule;

const SINGULAR_COND: f64 = 1e12;
const WARN_COND: f64 = 1e8;
/// Largest accumulated resource phase whose rounding stays below 1e-9.
const PHASE_PRECISION_LIMIT: f64 = 1e-9 / f64::EPSILON;
const RESIDUAL_TOL: f64 = 1e-10;

pub fn pair_count(n_qubits: usize) -> usize {
    n_qubits * n_qubits.saturating_sub(1) / 2
}

/// Position of pair `(n, m)`, `n < m`, in lexicographic order (0-based).
pub fn pair_index(n: usize, m: usize, n_qubits: usize) -> Result<usize> {
    if n >= m || m >= n_qubits {
        return Err(DaqcError::InvalidPair(n, m));
    }
    Ok(n * n_qubits - n * (n + 1) / 2 + m - n - 1)
}

/// Inverse of [`pair_index`], by walking the rows of the triangle.
pub fn pair_unindex(alpha: usize, n_qubits: usize) -> Result<(usize, usize)> {
    let mut rest = alpha;
    for n in 0..n_qubits.saturating_sub(1) {
        let row = n_qubits - 1 - n;
        if rest < row {
            return Ok((n, n + 1 + rest));
        }
        rest -= row;
    }
    Err(DaqcError::InvalidArgument(format!(
        "pair index {alpha} out of range for {n_qubits} qubits"
    )))
}

fn flip_sign(flips: &[usize], (j, k): (usize, usize)) -> f64 {
    let hits = flips.iter().filter(|&&q| q == j || q == k).count();
    if hits % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `M_ab = (-1)^{d_nj + d_nk + d_mj + d_mk}` for `a = (n, m)`, `b = (j, k)`.
pub fn sign_matrix(n_qubits: usize) -> DMatrix<f64> {
    let pairs = all_pairs(n_qubits);
    DMatrix::from_fn(pairs.len(), pairs.len(), |a, b| {
        let (n, m) = pairs[a];
        flip_sign(&[n, m], pairs[b])
    })
}

/// Closed-form spectrum of [`sign_matrix`]: `(l1, l2, l3)` with
/// multiplicities `1`, `N-1` and `N(N-1)/2 - N`.
pub fn sign_matrix_eigenvalues(n_qubits: usize) -> [f64; 3] {
    let n = n_qubits as f64;
    [n * (n - 9.0) / 2.0 + 8.0, 2.0 * (4.0 - n), 4.0]
}

fn all_pairs(n_qubits: usize) -> Vec<(usize, usize)> {
    (0..n_qubits)
        .flat_map(|j| (j + 1..n_qubits).map(move |k| (j, k)))
        .collect()
}

/// How negative block times were removed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Remediation {
    None,
    /// Constant shift along the uniform eigenvector plus one bare block.
    EigenShift,
    /// `t mod 2 pi / g` for a homogeneous resource.
    PeriodWrap,
    /// Negative blocks run with the resource sign inverted (stepwise only).
    SignInversion,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsingOptions {
    /// Use the augmented generator set when the pair set is singular.
    pub allow_fallback: bool,
    /// Permit sign-inverted blocks when nothing else removes negative times.
    pub allow_inversion: bool,
    /// Blocks shorter than `zero_tol * |t_F|` are dropped.
    pub zero_tol: f64,
}

impl Default for IsingOptions {
    fn default() -> Self {
        IsingOptions {
            allow_fallback: false,
            allow_inversion: true,
            zero_tol: 1e-12,
        }
    }
}

impl IsingOptions {
    pub fn with_fallback() -> Self {
        IsingOptions {
            allow_fallback: true,
            ..Default::default()
        }
    }
}

/// Solved block times and bookkeeping for one ZZ compilation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompileReport {
    pub n_qubits: usize,
    pub t_final: f64,
    /// Resource pairs `(j, k)` constrained by the solve (rows).
    pub pairs: Vec<(usize, usize)>,
    /// Qubits flipped by each generator's `sigma_x` layer (columns); empty is bare.
    pub generators: Vec<Vec<usize>>,
    /// Raw solution of the linear system.
    pub times: Vec<f64>,
    /// Durations actually scheduled, signed (negative means sign-inverted).
    pub shifted_times: Vec<f64>,
    /// Extra unsandwiched block added by the eigenvector shift.
    pub extra_bare_time: f64,
    pub remediation: Remediation,
    pub fallback: bool,
    pub condition_number: f64,
    pub residual: f64,
    pub warnings: Vec<String>,
    pub total_analog_time: f64,
    pub block_count: usize,
}

impl CompileReport {
    /// Most negative raw time, or zero.
    pub fn t_min(&self) -> f64 {
        self.times.iter().copied().fold(0.0, f64::min)
    }

    /// Effective coupling per row pair implied by the scheduled durations,
    /// divided by the resource coupling.
    pub fn effective_rhs(&self) -> Vec<f64> {
        self.pairs
            .iter()
            .map(|&p| {
                let gens: f64 = self
                    .generators
                    .iter()
                    .zip(&self.shifted_times)
                    .map(|(g, t)| flip_sign(g, p) * t)
                    .sum();
                gens + self.extra_bare_time
            })
            .collect()
    }
}

fn zz_couplings(h: &SpinHamiltonian) -> Result<Vec<f64>> {
    let n = h.n_qubits();
    let mut g = vec![0.0; pair_count(n)];
    for (w, c) in h.terms() {
        let s = w.support();
        if s.len() != 2 || w.axes().iter().any(|p| !matches!(p, Pauli::I | Pauli::Z)) {
            return Err(DaqcError::UnsupportedTerm(w.to_string()));
        }
        g[pair_index(s[0], s[1], n)?] = c;
    }
    Ok(g)
}

fn svd_condition(a: &DMatrix<f64>) -> (f64, usize) {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let tol = max * 1e-12 * a.nrows().max(a.ncols()) as f64;
    let rank = sv.iter().filter(|&&s| s > tol).count();
    let min = sv.iter().copied().filter(|&s| s > tol).fold(f64::INFINITY, f64::min);
    let min_all = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let cond = if rank < a.nrows().min(a.ncols()) {
        if min_all > 0.0 {
            max / min_all
        } else {
            f64::INFINITY
        }
    } else {
        max / min
    };
    (cond, rank)
}

fn generator_matrix(pairs: &[(usize, usize)], gens: &[Vec<usize>]) -> DMatrix<f64> {
    DMatrix::from_fn(pairs.len(), gens.len(), |b, g| flip_sign(&gens[g], pairs[b]))
}

/// Square subset of `{bare} u {single sites}` with the smallest condition number.
fn best_local_generators(n_qubits: usize, pairs: &[(usize, usize)]) -> Option<Vec<Vec<usize>>> {
    let pool: Vec<Vec<usize>> = std::iter::once(vec![]).chain((0..n_qubits).map(|q| vec![q])).collect();
    let k = pairs.len();
    if k > pool.len() {
        return None;
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut idx: Vec<usize> = (0..k).collect();
    let mut visited = 0usize;
    loop {
        visited += 1;
        if visited > 20_000 {
            break;
        }
        let gens: Vec<Vec<usize>> = idx.iter().map(|&i| pool[i].clone()).collect();
        let (cond, rank) = svd_condition(&generator_matrix(pairs, &gens));
        if rank == k && best.as_ref().is_none_or(|(c, _)| cond < c * (1.0 - 1e-9)) {
            best = Some((cond, idx.clone()));
        }
        // next combination in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                return best.map(|(_, idx)| idx.iter().map(|&i| pool[i].clone()).collect());
            }
            i -= 1;
            if idx[i] < pool.len() - k + i {
                break;
            }
        }
        idx[i] += 1;
        for r in i + 1..k {
            idx[r] = idx[r - 1] + 1;
        }
    }
    best.map(|(_, idx)| idx.iter().map(|&i| pool[i].clone()).collect())
}

/// Solves for block times with the appropriate generator set.
pub fn solve_block_times(
    target: &SpinHamiltonian,
    resource: &SpinHamiltonian,
    t_final: f64,
    opts: &IsingOptions,
) -> Result<CompileReport> {
    let n = target.n_qubits();
    if resource.n_qubits() != n {
        return Err(DaqcError::DimensionMismatch {
            expected: n,
            found: resource.n_qubits(),
        });
    }
    if n < 2 {
        return Err(DaqcError::InvalidArgument("Ising compilation needs at least 2 qubits".into()));
    }
    if !t_final.is_finite() {
        return Err(DaqcError::InvalidArgument(format!("non-finite final time {t_final}")));
    }
    let g = zz_couplings(target)?;
    let gbar = zz_couplings(resource)?;
    let mut pairs = Vec::new();
    let mut rhs = Vec::new();
    for (alpha, (&gt, &gr)) in g.iter().zip(&gbar).enumerate() {
        let (j, k) = pair_unindex(alpha, n)?;
        if gr == 0.0 {
            if gt != 0.0 {
                return Err(DaqcError::ZeroResourceCoupling(j, k));
            }
            continue;
        }
        pairs.push((j, k));
        rhs.push(t_final * gt / gr);
    }
    let b = DVector::from_vec(rhs.clone());
    let mut warnings = Vec::new();
    let mut fallback = false;

    let square_gens: Option<Vec<Vec<usize>>> = if pairs.len() == pair_count(n) {
        let gens: Vec<Vec<usize>> = pairs.iter().map(|&(j, k)| vec![j, k]).collect();
        let (cond, _) = svd_condition(&generator_matrix(&pairs, &gens));
        if cond < SINGULAR_COND {
            Some(gens)
        } else if !opts.allow_fallback {
            return Err(DaqcError::SingularGeneratorSet { n_qubits: n });
        } else {
            None
        }
    } else {
        best_local_generators(n, &pairs)
    };

    let (gens, times, cond) = match square_gens {
        Some(gens) => {
            let a = generator_matrix(&pairs, &gens);
            let (cond, _) = svd_condition(&a);
            let t = a
                .lu()
                .solve(&b)
                .ok_or(DaqcError::SingularGeneratorSet { n_qubits: n })?;
            (gens, t, cond)
        }
        None => {
            fallback = true;
            let mut gens: Vec<Vec<usize>> = pairs.iter().map(|&(j, k)| vec![j, k]).collect();
            gens.extend((0..n).map(|q| vec![q]));
            if pairs.len() != pair_count(n) {
                gens.push(vec![]);
            }
            let a = generator_matrix(&pairs, &gens);
            let (cond, rank) = svd_condition(&a);
            if rank < pairs.len() {
                return Err(DaqcError::RankDeficient {
                    rank,
                    needed: pairs.len(),
                });
            }
            let t = a
                .svd(true, true)
                .solve(&b, 1e-12)
                .map_err(|e| DaqcError::InvalidArgument(e.to_string()))?;
            warnings.push(format!(
                "augmented generator set with {} single-site layers (minimum-norm solution)",
                n
            ));
            (gens, t, cond)
        }
    };
    if cond > WARN_COND {
        warnings.push(format!("ill-conditioned generator system (condition {cond:e})"));
    }
    let a = generator_matrix(&pairs, &gens);
    let scale = rhs.iter().map(|x| x.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let residual = (&a * &times - &b).amax() / scale;
    if residual > RESIDUAL_TOL {
        return Err(DaqcError::ResidualTooLarge(residual, RESIDUAL_TOL));
    }
    let times: Vec<f64> = times.iter().copied().collect();
    let gmax = gbar.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let phase = times.iter().fold(0.0f64, |m, t| m.max(t.abs())) * gmax;
    if phase > PHASE_PRECISION_LIMIT {
        warnings.push(format!(
            "block phases up to {phase:.1e} rad exceed double-precision exactness; weak resource couplings force long blocks"
        ));
    }
    Ok(CompileReport {
        n_qubits: n,
        t_final,
        pairs,
        shifted_times: times.clone(),
        generators: gens,
        times,
        extra_bare_time: 0.0,
        remediation: Remediation::None,
        fallback,
        condition_number: cond,
        residual,
        warnings,
        total_analog_time: 0.0,
        block_count: 0,
    })
}

/// Homogeneous resource magnitude over the row pairs, if any.
fn homogeneous_magnitude(resource: &SpinHamiltonian, pairs: &[(usize, usize)]) -> Option<f64> {
    let n = resource.n_qubits();
    let mags: Vec<f64> = pairs
        .iter()
        .map(|&(j, k)| resource.coefficient(&PauliWord::zz(n, j, k)).abs())
        .collect();
    let g = *mags.first()?;
    mags.iter().all(|m| (m - g).abs() <= 1e-14 * g).then_some(g)
}

/// Removes negative durations from `report` in place, trying the eigenvector
/// shift, then period wrapping, then sign inversion.
pub fn remediate_negative_times(
    report: &mut CompileReport,
    resource: &SpinHamiltonian,
    opts: &IsingOptions,
) -> Result<()> {
    let tol = opts.zero_tol * report.t_final.abs().max(1e-300);
    let t = report.times.clone();
    let t_min = t.iter().copied().fold(f64::INFINITY, f64::min);
    report.shifted_times = t.clone();
    report.extra_bare_time = 0.0;
    report.remediation = Remediation::None;
    if t.is_empty() || t_min >= -tol {
        report.shifted_times = t.iter().map(|&x| x.max(0.0)).collect();
        return Ok(());
    }

    // Eigenvector shift: every row must see the same summed sign over the
    // sandwiched generators, and that sum must be negative.
    let sandwiched: Vec<usize> = (0..t.len()).filter(|&g| !report.generators[g].is_empty()).collect();
    let bare_col = (0..t.len()).find(|&g| report.generators[g].is_empty());
    let sums: Vec<f64> = report
        .pairs
        .iter()
        .map(|&p| sandwiched.iter().map(|&g| flip_sign(&report.generators[g], p)).sum())
        .collect();
    if let Some(&kappa) = sums.first() {
        let uniform = sums.iter().all(|s| (s - kappa).abs() < 1e-9);
        let sandwiched_min = sandwiched.iter().map(|&g| t[g]).fold(f64::INFINITY, f64::min);
        let shift = (-sandwiched_min).max(0.0);
        let bare_total = bare_col.map_or(0.0, |g| t[g]) - kappa * shift;
        if uniform && kappa < 0.0 && bare_total >= -tol {
            let mut shifted = t.clone();
            for &g in &sandwiched {
                shifted[g] += shift;
            }
            match bare_col {
                Some(g) => {
                    shifted[g] = bare_total.max(0.0);
                }
                None => report.extra_bare_time = bare_total.max(0.0),
            }
            report.shifted_times = shifted.into_iter().map(|x| x.max(0.0)).collect();
            report.remediation = Remediation::EigenShift;
            return Ok(());
        }
    }

    if let Some(g) = homogeneous_magnitude(resource, &report.pairs) {
        let period = 2.0 * PI / g;
        report.shifted_times = t
            .iter()
            .map(|&x| {
                let w = x.rem_euclid(period);
                if period - w <= tol {
                    0.0
                } else {
                    w
                }
            })
            .collect();
        report.remediation = Remediation::PeriodWrap;
        return Ok(());
    }

    if opts.allow_inversion {
        report.remediation = Remediation::SignInversion;
        report.warnings.push("negative block times run with inverted resource sign".into());
        return Ok(());
    }
    Err(DaqcError::NoRemediation(format!(
        "t_min = {t_min}; the resource is inhomogeneous and the uniform shift does not apply; \
         sign inversion (stepwise mode only) is required"
    )))
}

/// Appends the schedule for `e^{i t_F H_target}` to `schedule`, whose base is the resource.
pub fn compile_ising_into(
    schedule: &mut Schedule,
    target: &SpinHamiltonian,
    t_final: f64,
    opts: &IsingOptions,
) -> Result<CompileReport> {
    let resource = schedule.base().clone();
    let mut report = solve_block_times(target, &resource, t_final, opts)?;
    remediate_negative_times(&mut report, &resource, opts)?;
    let n = report.n_qubits;
    let tol = opts.zero_tol * t_final.abs();
    let mut count = 0;
    let mut total = 0.0;
    let bare: f64 = report.extra_bare_time
        + report
            .generators
            .iter()
            .zip(&report.shifted_times)
            .filter(|(g, _)| g.is_empty())
            .map(|(_, t)| *t)
            .sum::<f64>();
    if bare.abs() > tol {
        schedule.push_analog(bare.abs(), bare.signum());
        count += 1;
        total += bare.abs();
    }
    for (g, &t) in report.generators.iter().zip(&report.shifted_times) {
        if g.is_empty() || t.abs() <= tol {
            continue;
        }
        schedule.push_sandwich(&RotationLayer::paulis(n, g, Pauli::X), t.abs(), t.signum());
        count += 1;
        total += t.abs();
    }
    report.block_count = count;
    report.total_analog_time = total;
    Ok(report)
}

pub fn compile_ising(
    target: &SpinHamiltonian,
    resource: &SpinHamiltonian,
    t_final: f64,
    opts: &IsingOptions,
) -> Result<(Schedule, CompileReport)> {
    let mut s = Schedule::new(resource.clone());
    let report = compile_ising_into(&mut s, target, t_final, opts)?;
    Ok((s, report))
}

/// Controlled phase `diag(1, 1, 1, e^{-2i phi})` on qubits `(i, j)` up to a
/// global phase: `ZZ_ij(phi/2) = e^{-i phi/2 Z_i Z_j}` compiled from the
/// resource, then `Z(-phi) = diag(1, e^{-i phi})` on both qubits.
pub fn cz_gadget(
    resource: &SpinHamiltonian,
    i: usize,
    j: usize,
    phi: f64,
    opts: &IsingOptions,
) -> Result<Schedule> {
    let n = resource.n_qubits();
    if i == j || i >= n || j >= n {
        return Err(DaqcError::InvalidPair(i, j));
    }
    let target = SpinHamiltonian::from_terms(n, [(-phi / 2.0, PauliWord::zz(n, i.min(j), i.max(j)))])?;
    let mut s = Schedule::new(resource.clone());
    compile_ising_into(&mut s, &target, 1.0, opts)?;
    let zphase = nalgebra::Matrix2::new(
        num_complex::Complex64::new(1.0, 0.0),
        num_complex::Complex64::new(0.0, 0.0),
        num_complex::Complex64::new(0.0, 0.0),
        num_complex::Complex64::from_polar(1.0, -phi),
    );
    let mut layer = RotationLayer::identity(n);
    layer.set(i, zphase);
    layer.set(j, zphase);
    s.push_layer(layer);
    Ok(s)
}
