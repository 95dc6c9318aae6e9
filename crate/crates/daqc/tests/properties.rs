use daqc::executor::{run_bdaqc, run_sdaqc, schedule_unitary};
use daqc::ising::{compile_ising, IsingOptions};
use daqc::linalg::{expm_i_hermitian, phase_aligned_distance, propagator, spectral_norm, unitarity_error, word_matrix};
use daqc::mbody::{conjugated_block, plan_mbody, MBodyOptions, OxxLayer};
use daqc::models::{build_mbody_target, MBodySource};
use daqc::noise::{monte_carlo_fidelity, run_rng, NoiseSpec, Protocol};
use daqc::xz::{default_angles, reconstruct, solve_pair_strengths};
use daqc::{fidelity, Pauli, PauliWord, RotationLayer, Schedule, SpinHamiltonian, StateVector};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

const PAULIS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

fn word(n: usize) -> impl Strategy<Value = PauliWord> {
    prop::collection::vec(0..4usize, n).prop_map(|v| PauliWord::new(v.into_iter().map(|i| PAULIS[i]).collect()))
}

fn hamiltonian(n: usize, max_terms: usize) -> impl Strategy<Value = SpinHamiltonian> {
    prop::collection::vec((-1.0..1.0f64, word(n)), 1..=max_terms)
        .prop_map(move |terms| SpinHamiltonian::from_terms(n, terms).unwrap())
}

fn zz_hamiltonian(n: usize, lo: f64, hi: f64) -> impl Strategy<Value = SpinHamiltonian> {
    prop::collection::vec(lo..hi, n * (n - 1) / 2).prop_map(move |c| {
        let mut h = SpinHamiltonian::new(n).unwrap();
        let mut it = c.into_iter();
        for j in 0..n {
            for k in j + 1..n {
                h.add(it.next().unwrap(), PauliWord::zz(n, j, k)).unwrap();
            }
        }
        h
    })
}

fn state(n: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1 << n).prop_filter_map("zero vector", |v| {
        let norm = v.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
        (norm > 1e-3).then(|| StateVector::from_amplitudes(v.iter().map(|(a, b)| Complex64::new(a / norm, b / norm)).collect()).unwrap())
    })
}

fn rotated_schedule(n: usize) -> impl Strategy<Value = Schedule> {
    (
        hamiltonian(n, 5),
        prop::collection::vec((0.05..0.6f64, prop::collection::vec(0.0..6.3f64, n)), 1..5),
    )
        .prop_map(move |(base, steps)| {
            let mut s = Schedule::new(base);
            for (t, thetas) in steps {
                s.push_analog(t, 1.0);
                s.push_layer(RotationLayer::xz_reflections(&thetas));
            }
            s
        })
}

fn dense_conjugate(h: &SpinHamiltonian, o: &OxxLayer) -> DMatrix<Complex64> {
    let n = h.n_qubits();
    let gen = SpinHamiltonian::from_terms(
        n,
        o.generators
            .iter()
            .map(|&(j, p)| (p, PauliWord::from_sparse(n, &[(j, Pauli::X), (j + 1, Pauli::X)]).unwrap())),
    )
    .unwrap();
    let u = expm_i_hermitian(&gen.matrix().unwrap(), 1.0);
    u.adjoint() * h.matrix().unwrap() * u
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pauli_products_match_matrices((p, q) in (1..=4usize).prop_flat_map(|n| (word(n), word(n)))) {
        let (phase, pq) = p.mul(&q).unwrap();
        let lhs = word_matrix(&p).unwrap() * word_matrix(&q).unwrap();
        let rhs = word_matrix(&pq).unwrap() * phase;
        prop_assert!(spectral_norm(&(lhs.clone() - rhs)) < 1e-14);
        let qp = word_matrix(&q).unwrap() * word_matrix(&p).unwrap();
        prop_assert_eq!(p.commutes_with(&q), spectral_norm(&(lhs - qp)) < 1e-12);
    }

    #[test]
    fn propagators_are_unitary(h in (1..=3usize).prop_flat_map(|n| hamiltonian(n, 6)), t in -3.0..3.0f64) {
        prop_assert!(unitarity_error(&propagator(&h, t).unwrap().matrix()) <= 1e-10);
    }

    #[test]
    fn diagonal_fast_path_matches_dense(h in (2..=4usize).prop_flat_map(|n| zz_hamiltonian(n, -2.0, 2.0)), t in -3.0..3.0f64) {
        let fast = propagator(&h, t).unwrap().matrix();
        let dense = expm_i_hermitian(&h.matrix().unwrap(), t);
        prop_assert!(spectral_norm(&(fast - dense)) <= 1e-12);
    }

    #[test]
    fn fidelity_ignores_global_phase(psi in state(3), phi in -10.0..10.0f64) {
        let mut rotated = psi.clone();
        rotated.scale(Complex64::from_polar(1.0, phi));
        prop_assert!((fidelity(&psi, &rotated).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reflection_layers_are_involutions(thetas in prop::collection::vec(0.0..6.3f64, 1..=4)) {
        let r = RotationLayer::xz_reflections(&thetas).matrix();
        let dim = r.nrows();
        prop_assert!(spectral_norm(&(&r * &r - DMatrix::<Complex64>::identity(dim, dim))) < 1e-12);
        prop_assert!(spectral_norm(&(&r - r.adjoint())) < 1e-12);
    }

    #[test]
    fn norm_preserved_in_both_modes(s in rotated_schedule(3), psi in state(3)) {
        prop_assert!((run_sdaqc(&s, &psi).unwrap().norm() - 1.0).abs() < 1e-12);
        prop_assert!((run_bdaqc(&s, &psi, 0.01).unwrap().norm() - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ising_compilation_is_exact(
        (n, target, resource) in prop::sample::select(vec![3usize, 5, 6, 7, 8])
            .prop_flat_map(|n| (Just(n), zz_hamiltonian(n, -1.0, 1.0), zz_hamiltonian(n, 0.3, 1.5))),
        t in 0.1..2.0f64,
    ) {
        let (s, r) = compile_ising(&target, &resource, t, &IsingOptions::default()).unwrap();
        prop_assert!(!r.fallback);
        prop_assert_eq!(r.generators.len(), n * (n - 1) / 2);
        let exact = propagator(&target, t).unwrap().matrix();
        prop_assert!(phase_aligned_distance(&schedule_unitary(&s).unwrap(), &exact) <= 1e-9);
    }

    #[test]
    fn remediated_times_are_nonnegative(
        (n, target) in prop::sample::select(vec![3usize, 5, 6, 7, 8]).prop_flat_map(|n| (Just(n), zz_hamiltonian(n, -1.0, 1.0))),
        g in 0.2..2.0f64,
    ) {
        let resource = zz_hamiltonian_const(n, g);
        let opts = IsingOptions { allow_inversion: false, ..Default::default() };
        let (s, r) = compile_ising(&target, &resource, 1.0, &opts).unwrap();
        prop_assert!(r.shifted_times.iter().all(|&t| t >= 0.0) && r.extra_bare_time >= 0.0);
        prop_assert!(s.analog_durations().all(|(d, sign)| d >= 0.0 && sign > 0.0));
        let exact = propagator(&target, 1.0).unwrap().matrix();
        prop_assert!(phase_aligned_distance(&schedule_unitary(&s).unwrap(), &exact) <= 1e-9);
    }

    #[test]
    fn xz_pair_system_reconstructs_hamiltonian(
        (n, coeffs) in (2..=4usize).prop_flat_map(|n| (Just(n), prop::collection::vec(-1.0..1.0f64, 2 * n * (n - 1)))),
    ) {
        let mut target = SpinHamiltonian::new(n).unwrap();
        let mut it = coeffs.into_iter();
        for j in 0..n {
            for k in j + 1..n {
                for (mu, nu) in [(Pauli::X, Pauli::X), (Pauli::X, Pauli::Z), (Pauli::Z, Pauli::X), (Pauli::Z, Pauli::Z)] {
                    target.add(it.next().unwrap(), PauliWord::from_sparse(n, &[(j, mu), (k, nu)]).unwrap()).unwrap();
                }
            }
        }
        let angles = default_angles(n);
        let back = reconstruct(&angles, &solve_pair_strengths(&angles, &target).unwrap()).unwrap();
        prop_assert!(spectral_norm(&(back.matrix().unwrap() - target.matrix().unwrap())) <= 1e-10);
    }

    #[test]
    fn conjugation_matches_dense(
        (n, h) in (4..=6usize).prop_flat_map(|n| (Just(n), hamiltonian(n, 6))),
        set in 0..2usize,
        phases in prop::collection::vec(-3.2..3.2f64, 6),
    ) {
        let o = OxxLayer::shifted(n, set, 2, &phases[..n]);
        let expanded = conjugated_block(&h, &o).unwrap().matrix().unwrap();
        prop_assert!(spectral_norm(&(expanded - dense_conjugate(&h, &o))) <= 1e-10);
    }

    #[test]
    fn four_body_support_alternates_with_set(
        strengths in prop::collection::vec(0.1..1.0f64, 7),
        phases in prop::collection::vec(0.1..1.4f64, 8),
    ) {
        let n = 8;
        for set in 0..2 {
            let o = OxxLayer::shifted(n, set, 2, &phases);
            let zz = SpinHamiltonian::from_terms(n, strengths.iter().enumerate().map(|(j, &g)| (g, PauliWord::zz(n, j, j + 1)))).unwrap();
            for (w, c) in conjugated_block(&zz, &o).unwrap().terms() {
                let s = w.support();
                if c.abs() > 1e-12 && s.len() == 4 {
                    prop_assert_eq!(s[0] % 2, set, "{}", w);
                }
            }
        }
    }

    #[test]
    fn noisy_runs_are_deterministic_and_unitary(seed in any::<u64>(), thetas in prop::collection::vec(0.0..6.3f64, 3)) {
        let base = zz_hamiltonian_const(3, 0.5);
        let mut s = Schedule::new(base);
        s.push_analog(0.4, 1.0);
        s.push_layer(RotationLayer::xz_reflections(&thetas));
        s.push_analog(0.3, 1.0);
        let psi = StateVector::basis(3, 5).unwrap();
        let spec = NoiseSpec { seed, runs: 8, ..Default::default() };
        for protocol in [Protocol::Stepwise(s.clone()), Protocol::Banged { schedule: s.clone(), dt: 0.01 }] {
            let mut rng = run_rng(seed, 0);
            prop_assert!((protocol.run(&psi, &spec, &mut rng).unwrap().norm() - 1.0).abs() < 1e-12);
            let a = monte_carlo_fidelity(&protocol, &psi, &psi, &spec, &[1]).unwrap();
            let b = monte_carlo_fidelity(&protocol, &psi, &psi, &spec, &[1]).unwrap();
            prop_assert_eq!(a.fidelities, b.fidelities);
        }
        let ideal = monte_carlo_fidelity(&Protocol::Stepwise(s.clone()), &psi, &run_sdaqc(&s, &psi).unwrap(), &NoiseSpec::ideal(), &[2]).unwrap();
        prop_assert!((ideal.mean - 1.0).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn mbody_plans_reconstruct_targets(n in 4..=5usize, seed in any::<u64>()) {
        let target = build_mbody_target(n, 4, &MBodySource::Random { seed, j: 0.5 }).unwrap();
        let plan = plan_mbody(&target, &MBodyOptions::default()).unwrap();
        prop_assert!(plan.reconstruct().unwrap().max_coefficient_diff(&target) <= 1e-8);
    }
}

fn zz_hamiltonian_const(n: usize, g: f64) -> SpinHamiltonian {
    let mut h = SpinHamiltonian::new(n).unwrap();
    for j in 0..n {
        for k in j + 1..n {
            h.add(g, PauliWord::zz(n, j, k)).unwrap();
        }
    }
    h
}
