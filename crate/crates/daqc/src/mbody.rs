//! Nearest-neighbour Hamiltonians with up to `M`-body terms.
//!
//! Each piece is `R e^{-iO} H_ZZ e^{iO} R`: an NN ZZ Hamiltonian conjugated by
//! an XX layer `O` and by a reflection layer `R`. With all angles fixed the
//! target coefficients are linear in the ZZ strengths of every piece, and the
//! strengths come from a minimum-norm least-squares solve.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{DaqcError, Result};
use crate::hamiltonian::SpinHamiltonian;
use crate::ising::{compile_ising_into, IsingOptions};
use crate::layer::RotationLayer;
use crate::models::{contiguous_window, mbody_words};
use crate::pauli::{Pauli, PauliWord};
use crate::schedule::Schedule;

const RESIDUAL_TOL: f64 = 1e-8;
const RANK_TOL: f64 = 1e-7;
pub const ROTATION_SEED: u64 = 0x5eed_d0c5;

/// `O = sum Phi_j X_j X_{j+1}` over disjoint nearest-neighbour pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OxxLayer {
    pub set: usize,
    /// `(j, Phi_j)`: generator `Phi_j X_j X_{j+1}`.
    pub generators: Vec<(usize, f64)>,
}

impl OxxLayer {
    /// Generators starting at every `j` with `j % spacing == set`.
    pub fn shifted(n_qubits: usize, set: usize, spacing: usize, phases: &[f64]) -> OxxLayer {
        OxxLayer {
            set,
            generators: (0..n_qubits.saturating_sub(1))
                .filter(|j| j % spacing == set)
                .map(|j| (j, phases[j]))
                .collect(),
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let mut used = vec![false; n_qubits];
        for &(j, phi) in &self.generators {
            if j + 1 >= n_qubits {
                return Err(DaqcError::InvalidPair(j, j + 1));
            }
            if !phi.is_finite() {
                return Err(DaqcError::InvalidArgument(format!("non-finite phase {phi}")));
            }
            for q in [j, j + 1] {
                if used[q] {
                    return Err(DaqcError::OverlappingGenerators(q));
                }
                used[q] = true;
            }
        }
        Ok(())
    }

    pub fn negated(&self) -> OxxLayer {
        OxxLayer {
            set: self.set,
            generators: self.generators.iter().map(|&(j, p)| (j, -p)).collect(),
        }
    }

    /// The ZZ Hamiltonian `sum Phi_j Z_j Z_{j+1}` whose Hadamard-like rotation is `O`.
    pub fn zz_image(&self, n_qubits: usize) -> Result<SpinHamiltonian> {
        SpinHamiltonian::from_terms(
            n_qubits,
            self.generators.iter().map(|&(j, p)| (p, PauliWord::zz(n_qubits, j, j + 1))),
        )
    }
}

/// `e^{-iO} H e^{iO}` expanded exactly in the Pauli basis.
///
/// A word `P` anticommuting with `X_j X_{j+1}` maps to
/// `cos(2 Phi) P + i sin(2 Phi) P X_j X_{j+1}`; commuting words are unchanged.
pub fn conjugated_block(h: &SpinHamiltonian, o: &OxxLayer) -> Result<SpinHamiltonian> {
    let n = h.n_qubits();
    o.validate(n)?;
    let mut terms: Vec<(f64, PauliWord)> = h.terms().map(|(w, c)| (c, w.clone())).collect();
    for &(j, phi) in &o.generators {
        let g = PauliWord::from_sparse(n, &[(j, Pauli::X), (j + 1, Pauli::X)])?;
        let (s, c) = (2.0 * phi).sin_cos();
        let mut next = Vec::with_capacity(terms.len() * 2);
        for (coeff, w) in terms {
            if w.commutes_with(&g) {
                next.push((coeff, w));
                continue;
            }
            let (phase, prod) = w.mul(&g)?;
            let factor = Complex64::new(0.0, s) * phase * coeff;
            debug_assert!(factor.im.abs() < 1e-12);
            next.push((coeff * c, w));
            next.push((factor.re, prod));
        }
        terms = next;
    }
    SpinHamiltonian::from_terms(n, terms)
}

/// Default XX phases: `2 pi k / 3` on sites `j = 1, 2 (mod 4)` and `2 pi k / 5`
/// on `j = 3, 0 (mod 4)`, with 1-based `j` and `k`.
pub fn default_phases(n_qubits: usize, k: usize) -> Vec<f64> {
    (1..=n_qubits)
        .map(|j| {
            let denom = if matches!(j % 4, 1 | 2) { 3.0 } else { 5.0 };
            2.0 * PI * k as f64 / denom
        })
        .collect()
}

/// `(number of shifted sets, number of phase choices k)` per body order.
pub fn structure(max_body: usize) -> Result<(usize, usize)> {
    match max_body {
        2 => Ok((1, 1)),
        3 => Ok((3, 2)),
        4 => Ok((2, 4)),
        _ => Err(DaqcError::InvalidArgument(format!(
            "body order {max_body} not supported (2..=4)"
        ))),
    }
}

/// Deterministic pseudo-random unit vectors, one per `(layer, qubit)`.
///
/// Axes that depend linearly on the layer index make the rotated ZZ pieces
/// linearly dependent, so the axes come from a fixed-seed generator instead.
pub fn rotation_axes(n_layers: usize, n_qubits: usize, seed: u64) -> Vec<Vec<[f64; 3]>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_layers)
        .map(|_| {
            (0..n_qubits)
                .map(|_| loop {
                    let v: [f64; 3] = [
                        rng.sample(StandardNormal),
                        rng.sample(StandardNormal),
                        rng.sample(StandardNormal),
                    ];
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if norm > 1e-6 {
                        break v.map(|x| x / norm);
                    }
                })
                .collect()
        })
        .collect()
}

/// Sum over `k` of both shifted conjugated blocks for the given strengths.
pub fn assemble_h0(
    n_qubits: usize,
    layers: &[OxxLayer],
    strengths: &[Vec<f64>],
) -> Result<SpinHamiltonian> {
    let mut h = SpinHamiltonian::new(n_qubits)?;
    for (o, g) in layers.iter().zip(strengths) {
        let zz = SpinHamiltonian::from_terms(
            n_qubits,
            g.iter().enumerate().map(|(j, &c)| (c, PauliWord::zz(n_qubits, j, j + 1))),
        )?;
        h = h.plus(&conjugated_block(&zz, o)?)?;
    }
    Ok(h)
}

/// Contiguous windows `(start, len)` with `2 <= len <= max_body` that carry no term.
pub fn uncovered_windows(h: &SpinHamiltonian, max_body: usize) -> Vec<(usize, usize)> {
    let n = h.n_qubits();
    let mut hit = std::collections::HashSet::new();
    for (w, _) in h.terms() {
        if let Some(win) = contiguous_window(w) {
            hit.insert(win);
        }
    }
    (2..=max_body.min(n))
        .flat_map(|len| (0..=n - len).map(move |s| (s, len)))
        .filter(|win| !hit.contains(win))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub set: usize,
    pub k: usize,
    pub l: usize,
    /// NN ZZ strengths `g_j` on `(j, j+1)`.
    pub strengths: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MBodyPlan {
    pub n_qubits: usize,
    pub max_body: usize,
    /// Indexed by `k * n_sets + set`.
    pub layers: Vec<OxxLayer>,
    /// Reflection axes per rotation layer and qubit.
    pub rotations: Vec<Vec<[f64; 3]>>,
    pub pieces: Vec<Piece>,
    pub n_unknowns: usize,
    pub n_coefficients: usize,
    pub rank: usize,
    pub condition_number: f64,
    pub residual: f64,
}

impl MBodyPlan {
    fn layer(&self, set: usize, k: usize) -> &OxxLayer {
        let n_sets = self.layers.len() / self.n_phase_sets();
        &self.layers[k * n_sets + set]
    }

    fn n_phase_sets(&self) -> usize {
        self.layers.iter().filter(|o| o.set == 0).count()
    }

    /// `sum_pieces R e^{-iO} H_ZZ e^{iO} R`.
    pub fn reconstruct(&self) -> Result<SpinHamiltonian> {
        let n = self.n_qubits;
        let mut h = SpinHamiltonian::new(n)?;
        for p in &self.pieces {
            let zz = SpinHamiltonian::from_terms(
                n,
                p.strengths.iter().enumerate().map(|(j, &c)| (c, PauliWord::zz(n, j, j + 1))),
            )?;
            let inner = conjugated_block(&zz, self.layer(p.set, p.k))?;
            h = h.plus(&RotationLayer::reflections(&self.rotations[p.l])?.conjugate(&inner)?)?;
        }
        Ok(h)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MBodyOptions {
    pub max_body: usize,
    /// Number of phase choices `k`; defaults per body order.
    pub phase_sets: Option<usize>,
    /// Number of reflection layers; defaults to `2 * 3^M`. Exactly `3^M`
    /// layers give full rank but a badly conditioned map.
    pub rotations: Option<usize>,
    pub rotation_seed: u64,
    pub ising: IsingOptions,
}

impl Default for MBodyOptions {
    fn default() -> Self {
        MBodyOptions {
            max_body: 4,
            phase_sets: None,
            rotations: None,
            rotation_seed: ROTATION_SEED,
            ising: IsingOptions::default(),
        }
    }
}

fn check_target(target: &SpinHamiltonian, max_body: usize) -> Result<()> {
    for (w, _) in target.terms() {
        match contiguous_window(w) {
            Some((_, len)) if (2..=max_body).contains(&len) => {}
            _ => return Err(DaqcError::UnsupportedTerm(w.to_string())),
        }
    }
    Ok(())
}

/// Builds the linear map from piece strengths to target coefficients and solves it.
pub fn plan_mbody(target: &SpinHamiltonian, opts: &MBodyOptions) -> Result<MBodyPlan> {
    let n = target.n_qubits();
    let m = opts.max_body;
    let (n_sets, default_k) = structure(m)?;
    if n < m {
        return Err(DaqcError::InvalidArgument(format!("need N >= M, got N={n}, M={m}")));
    }
    check_target(target, m)?;
    let n_k = opts.phase_sets.unwrap_or(default_k);
    let n_l = opts.rotations.unwrap_or(2 * 3usize.pow(m as u32));
    let words = mbody_words(n, m);
    let rows: HashMap<&PauliWord, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();

    let mut layers = Vec::with_capacity(n_sets * n_k);
    for k in 1..=n_k {
        let phases = default_phases(n, k);
        for set in 0..n_sets {
            let o = if m == 2 {
                OxxLayer { set, generators: vec![] }
            } else {
                OxxLayer::shifted(n, set, n_sets, &phases)
            };
            o.validate(n)?;
            layers.push(o);
        }
    }
    let rotations = rotation_axes(n_l, n, opts.rotation_seed);
    let reflections = rotations
        .iter()
        .map(|axes| RotationLayer::reflections(axes))
        .collect::<Result<Vec<_>>>()?;

    let n_bonds = n - 1;
    let n_unknowns = layers.len() * n_l * n_bonds;
    let mut a = DMatrix::<f64>::zeros(words.len(), n_unknowns);
    for (li, o) in layers.iter().enumerate() {
        for j in 0..n_bonds {
            let zz = SpinHamiltonian::from_terms(n, [(1.0, PauliWord::zz(n, j, j + 1))])?;
            let inner = conjugated_block(&zz, o)?;
            for (l, r) in reflections.iter().enumerate() {
                let col = (li * n_l + l) * n_bonds + j;
                for (w, c) in r.conjugate(&inner)?.terms() {
                    if c.abs() < 1e-15 {
                        continue;
                    }
                    let row = *rows.get(w).ok_or_else(|| DaqcError::UnsupportedTerm(w.to_string()))?;
                    a[(row, col)] += c;
                }
            }
        }
    }
    let b = DVector::from_iterator(words.len(), words.iter().map(|w| target.coefficient(w)));

    // Minimum-norm solution through the Gram matrix of the rows, which is far
    // smaller than the column space.
    let at = a.transpose();
    let gram = &a * &at;
    let eig = gram.clone().symmetric_eigen().eigenvalues;
    let smax = eig.max().max(0.0).sqrt();
    let sv: Vec<f64> = eig.iter().map(|e| e.max(0.0).sqrt()).collect();
    let rank = sv.iter().filter(|&&s| s > RANK_TOL * smax).count();
    let chol = match gram.cholesky() {
        Some(c) if rank == words.len() => c,
        _ => {
            return Err(DaqcError::RankDeficient {
                rank,
                needed: words.len(),
            })
        }
    };
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let mut x = &at * chol.solve(&b);
    let r = &b - &a * &x;
    x += &at * chol.solve(&r);
    let residual = (&a * &x - &b).amax();
    if residual > RESIDUAL_TOL {
        return Err(DaqcError::ResidualTooLarge(residual, RESIDUAL_TOL));
    }

    let mut pieces = Vec::new();
    for (li, o) in layers.iter().enumerate() {
        for l in 0..n_l {
            let start = (li * n_l + l) * n_bonds;
            let strengths: Vec<f64> = x.rows(start, n_bonds).iter().copied().collect();
            if strengths.iter().all(|g| g.abs() < 1e-14) {
                continue;
            }
            pieces.push(Piece {
                set: o.set,
                k: li / n_sets,
                l,
                strengths,
            });
        }
    }
    Ok(MBodyPlan {
        n_qubits: n,
        max_body: m,
        layers,
        rotations,
        pieces,
        n_unknowns,
        n_coefficients: words.len(),
        rank,
        condition_number: smax / smin,
        residual,
    })
}

fn hadamard_layer(n_qubits: usize) -> RotationLayer {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    RotationLayer::reflections(&vec![[s, 0.0, s]; n_qubits]).expect("unit axes")
}

/// Appends `e^{i t R e^{-iO} H_ZZ e^{iO} R}` as
/// `R`, `e^{iO}`, `e^{i t H_ZZ}`, `e^{-iO}`, `R` with each `e^{+-iO}` realized
/// as a Hadamard-rotated ZZ evolution.
fn push_piece(
    schedule: &mut Schedule,
    plan: &MBodyPlan,
    piece: &Piece,
    tau: f64,
    opts: &IsingOptions,
) -> Result<usize> {
    let n = plan.n_qubits;
    let r = RotationLayer::reflections(&plan.rotations[piece.l])?;
    let hd = hadamard_layer(n);
    let o = plan.layer(piece.set, piece.k);
    let zz = SpinHamiltonian::from_terms(
        n,
        piece.strengths.iter().enumerate().map(|(j, &c)| (c, PauliWord::zz(n, j, j + 1))),
    )?;
    let mut blocks = 0;
    schedule.push_layer(r.clone());
    let phi = o.zz_image(n)?;
    if !phi.is_empty() {
        schedule.push_layer(hd.clone());
        blocks += compile_ising_into(schedule, &phi, 1.0, opts)?.block_count;
        schedule.push_layer(hd.clone());
    }
    blocks += compile_ising_into(schedule, &zz, tau, opts)?.block_count;
    if !phi.is_empty() {
        schedule.push_layer(hd.clone());
        blocks += compile_ising_into(schedule, &o.negated().zz_image(n)?, 1.0, opts)?.block_count;
        schedule.push_layer(hd);
    }
    schedule.push_layer(r);
    Ok(blocks)
}

/// Schedule for `e^{i t_F H_target}` by `n_steps` Trotter steps over all pieces.
pub fn compile_mbody(
    target: &SpinHamiltonian,
    resource: &SpinHamiltonian,
    t_final: f64,
    n_steps: usize,
    opts: &MBodyOptions,
) -> Result<(Schedule, MBodyPlan)> {
    if n_steps == 0 {
        return Err(DaqcError::InvalidArgument("need at least one Trotter step".into()));
    }
    let plan = plan_mbody(target, opts)?;
    let two_body_zz = target.terms().all(|(w, _)| w.is_z_diagonal() && w.weight() == 2);
    if !two_body_zz {
        return Ok((schedule_for_plan(&plan, resource, t_final, n_steps, &opts.ising)?, plan));
    }
    let mut step = Schedule::new(resource.clone());
    compile_ising_into(&mut step, target, t_final / n_steps as f64, &opts.ising)?;
    Ok((repeat_steps(&step, n_steps)?, plan))
}

/// Trotterized schedule running every piece of `plan` once per step.
pub fn schedule_for_plan(
    plan: &MBodyPlan,
    resource: &SpinHamiltonian,
    t_final: f64,
    n_steps: usize,
    opts: &IsingOptions,
) -> Result<Schedule> {
    if n_steps == 0 {
        return Err(DaqcError::InvalidArgument("need at least one Trotter step".into()));
    }
    let tau = t_final / n_steps as f64;
    let mut step = Schedule::new(resource.clone());
    for piece in &plan.pieces {
        push_piece(&mut step, plan, piece, tau, opts)?;
    }
    repeat_steps(&step, n_steps)
}

fn repeat_steps(step: &Schedule, n_steps: usize) -> Result<Schedule> {
    let mut schedule = Schedule::new(step.base().clone());
    for _ in 0..n_steps {
        schedule.mark_step();
        schedule.append(step)?;
    }
    Ok(schedule)
}

/// Closed-form and counted analog blocks per Trotter step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockCount {
    pub a: f64,
    pub b: f64,
    /// `a(M) N + b(M)`.
    pub formula: f64,
    /// The four-body total quoted in the text, `117 N - 306`.
    pub quoted: Option<f64>,
    /// Analog blocks in one assembled Trotter step.
    pub empirical: usize,
    /// Pieces with nonzero strengths in the solved plan.
    pub pieces: usize,
}

/// `a(M) = 9/4 (3^{M-1} - 3)` and `b(M) = 3^{M-1}/2 (3/2 - M)`.
pub fn block_formula(max_body: usize) -> (f64, f64) {
    let p = 3f64.powi(max_body as i32 - 1);
    (2.25 * (p - 3.0), p / 2.0 * (1.5 - max_body as f64))
}

/// Compares the closed form with a plan assembled for a seeded random target.
pub fn count_blocks(max_body: usize, n_qubits: usize, resource: &SpinHamiltonian) -> Result<BlockCount> {
    use crate::models::{build_mbody_target, MBodySource};
    let target = build_mbody_target(n_qubits, max_body, &MBodySource::Random { seed: 1, j: 1.0 })?;
    let opts = MBodyOptions {
        max_body,
        ..Default::default()
    };
    let (schedule, plan) = compile_mbody(&target, resource, 1.0, 1, &opts)?;
    let (a, b) = block_formula(max_body);
    Ok(BlockCount {
        a,
        b,
        formula: a * n_qubits as f64 + b,
        quoted: (max_body == 4).then_some(117.0 * n_qubits as f64 - 306.0),
        empirical: schedule.analog_count(),
        pieces: plan.pieces.len(),
    })
}
