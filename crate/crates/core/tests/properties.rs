use proptest::prelude::*;

use repqed::analytic::{f_ign_nq, f_qed_nq, f_qed_nq_weighted};
use repqed::channels::{apply_damping, step_decoherence, KrausChannel, QubitDecoherence};
use repqed::correction::{
    numeric_unitary_search, optimal_correction, six_state_average, BranchKK, EulerGrid, LinearQubitOp, OutcomeClass,
};
use repqed::protocol::{self, ErrorKind, ProtocolConfig, ProtocolKind};
use repqed::qmath::{
    apply_gate, cnot, controlled_phase, cz, hadamard, partial_trace, rotation_gate, state_fidelity, tensor, Axis,
    ComplexMatrix, GateMode, PureState,
};
use repqed::scenario::{bloch_average, unravel, BlochAverager, CompiledCode, Linearity};
use repqed::{Complex64, Matrix, State};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn state(n_qubits: usize) -> impl Strategy<Value = State> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1 << n_qubits)
        .prop_filter_map("zero vector", |v| {
            PureState::unnormalized(v.into_iter().map(|(a, b)| c(a, b)).collect()).ok()?.normalize()
        })
}

fn qubit_amps() -> impl Strategy<Value = (Complex64, Complex64)> {
    state(1).prop_map(|s| (s.amplitudes()[0], s.amplitudes()[1]))
}

fn matrix(dim: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim * dim)
        .prop_map(move |v| ComplexMatrix::from_vec(dim, dim, v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap())
}

/// Mixture of a few random pure states.
fn density(n_qubits: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec((state(n_qubits), 0.05..1.0f64), 1..4).prop_map(|parts| {
        let total: f64 = parts.iter().map(|(_, w)| w).sum();
        parts
            .iter()
            .map(|(s, w)| s.density().scale_real(w / total))
            .reduce(|a, b| &a + &b)
            .unwrap()
    })
}

fn axis() -> impl Strategy<Value = Axis> {
    prop_oneof![Just(Axis::X), Just(Axis::Y), Just(Axis::Z)]
}

fn gate() -> impl Strategy<Value = (Matrix, usize)> {
    prop_oneof![
        (axis(), -7.0..7.0f64).prop_map(|(a, t)| (rotation_gate(a, t), 1)),
        Just((hadamard(), 1)),
        Just((cnot(), 2)),
        Just((cz(), 2)),
        (-7.0..7.0f64).prop_map(|phi| (controlled_phase(phi), 2)),
    ]
}

/// Trace-decreasing linear map built from two random Kraus factors.
fn linear_op() -> impl Strategy<Value = LinearQubitOp<f64>> {
    (matrix(2), matrix(2), 0.05..1.0f64).prop_map(|(a, b, shrink)| {
        let s = &(&a.adjoint() * &a) + &(&b.adjoint() * &b);
        // Σ K†K ≤ I after scaling by the largest eigenvalue bound (the Frobenius norm).
        let norm = s.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let k = (shrink / norm).sqrt();
        LinearQubitOp::from_kraus(&[a.scale_real(k), b.scale_real(k)]).unwrap()
    })
}

fn targets(n: usize, arity: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle().prop_map(move |v| v[..arity].to_vec())
}

fn ghz(n: usize, alpha: Complex64, beta: Complex64) -> State {
    let mut amps = vec![c(0.0, 0.0); 1 << n];
    amps[0] = alpha;
    amps[(1 << n) - 1] = beta;
    PureState::new(amps).unwrap()
}

fn quadrature(nodes: usize, azimuths: usize) -> BlochAverager {
    BlochAverager::Quadrature { nodes, azimuths }
}

proptest! {
    #[test]
    fn gates_are_unitary((g, _) in gate()) {
        prop_assert!(g.unitarity_deviation() < 1e-12);
    }

    #[test]
    fn gates_preserve_trace_and_norm(
        rho in density(3),
        psi in state(3),
        (g, arity) in gate(),
        order in targets(3, 2),
    ) {
        let t = &order[..arity];
        let out = apply_gate(&rho, &g, t, GateMode::Unitary).unwrap();
        prop_assert!((out.trace() - c(1.0, 0.0)).norm() < 1e-12);
        let moved = apply_gate(&psi, &g, t, GateMode::Unitary).unwrap();
        prop_assert!((moved.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_recovers_factors(a in density(1), b in density(1), d in density(1)) {
        let joint = tensor(&tensor(&a, &b).unwrap(), &d).unwrap();
        for (q, want) in [(0, &a), (1, &b), (2, &d)] {
            prop_assert!(partial_trace(&joint, q, 3).unwrap().max_abs_diff(want) < 1e-12);
        }
    }

    #[test]
    fn tensor_is_associative(a in matrix(2), b in matrix(2), d in matrix(4)) {
        let left = tensor(&tensor(&a, &b).unwrap(), &d).unwrap();
        let right = tensor(&a, &tensor(&b, &d).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right) < 1e-14);
    }

    #[test]
    fn state_fidelity_is_linear(r1 in density(2), r2 in density(2), psi in state(2), w in 0.0..2.0f64) {
        let sum = &r1 + &r2.scale_real(w);
        let lhs = state_fidelity(&sum, &psi).unwrap();
        let rhs = state_fidelity(&r1, &psi).unwrap() + w * state_fidelity(&r2, &psi).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn channels_are_complete(p in 0.0..=1.0f64, lambda in 0.0..=1.0f64) {
        prop_assert!(KrausChannel::damping(p).unwrap().completeness_deviation() < 1e-14);
        prop_assert!(KrausChannel::dephasing(lambda).unwrap().completeness_deviation() < 1e-14);
    }

    #[test]
    fn decoherence_steps_compose(
        rho in density(2),
        dt1 in 0.1..50.0f64,
        dt2 in 0.1..50.0f64,
        t1 in prop::collection::vec(20.0..2000.0f64, 2),
        ratio in prop::collection::vec(0.1..2.0f64, 2),
    ) {
        let q: Vec<_> = t1.iter().zip(&ratio)
            .map(|(&a, &r)| QubitDecoherence::from_t1_t2(a, r * a).unwrap())
            .collect();
        let two = step_decoherence(&step_decoherence(&rho, dt1, &q).unwrap(), dt2, &q).unwrap();
        let one = step_decoherence(&rho, dt1 + dt2, &q).unwrap();
        prop_assert!(two.max_abs_diff(&one) < 1e-12);
    }

    #[test]
    fn ground_state_is_fixed_by_damping(p in 0.0..=1.0f64) {
        let g = PureState::basis(1, 0).unwrap().density();
        prop_assert!(apply_damping(&g, p, 0).unwrap().max_abs_diff(&g) < 1e-15);
    }

    #[test]
    fn coherences_decay_at_t2(t in 0.0..3000.0f64, t1 in 20.0..2000.0f64, ratio in 0.05..2.0f64) {
        let q = QubitDecoherence::from_t1_t2(t1, ratio * t1).unwrap();
        let plus = PureState::qubit(c(0.5f64.sqrt(), 0.0), c(0.5f64.sqrt(), 0.0)).unwrap().density();
        let out = step_decoherence(&plus, t.max(1e-9), &[q]).unwrap();
        let want = 0.5 * (-t.max(1e-9) / q.t2()).exp();
        prop_assert!((out.get(0, 1).norm() - want).abs() < 1e-12);
    }

    #[test]
    fn scenario_probabilities_sum_to_one(
        (alpha, beta) in qubit_amps(),
        ps in prop::collection::vec(0.0..=1.0f64, 1..=6),
    ) {
        let scenarios = unravel(ps.len(), &ps, alpha, beta).unwrap();
        prop_assert_eq!(scenarios.len(), 1 << ps.len());
        prop_assert!(scenarios.iter().all(|s| s.probability >= 0.0));
        let total: f64 = scenarios.iter().map(|s| s.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scenarios_reproduce_the_damping_map(
        (alpha, beta) in qubit_amps(),
        ps in prop::collection::vec(0.0..=1.0f64, 1..=6),
    ) {
        let n = ps.len();
        let mut want = ghz(n, alpha, beta).density();
        for (q, &p) in ps.iter().enumerate() {
            want = apply_damping(&want, p, q).unwrap();
        }
        let got = unravel(n, &ps, alpha, beta).unwrap()
            .iter()
            .map(|s| s.relaxed.density())
            .reduce(|a, b| &a + &b)
            .unwrap();
        prop_assert!(got.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn six_states_match_quadrature(op in linear_op(), (a, t) in (axis(), -4.0..4.0f64)) {
        let u = rotation_gate(a, t);
        let six = six_state_average(&op, &u).unwrap();
        let quad = bloch_average(
            |b| {
                let psi = b.to_state();
                let target = PureState::new(u.apply(psi.amplitudes()).unwrap()).unwrap();
                state_fidelity(&op.apply(&psi.density()).unwrap(), &target).unwrap()
            },
            &quadrature(64, 8),
            Linearity::Linear,
        ).unwrap();
        prop_assert!((six - quad).abs() < 1e-9, "{} vs {}", six, quad);
    }

    #[test]
    fn weighted_selection_never_hurts(n in 1usize..=8, p in 0.0..=1.0f64) {
        let ign = f_ign_nq(n, p).unwrap();
        prop_assert!(f_qed_nq_weighted(n, p).unwrap() >= ign - 1e-12);
    }

    #[test]
    fn uniform_selection_helps_below_0_4(n in 1usize..=8, p in 0.0..=0.4f64) {
        prop_assert!(f_qed_nq(n, p).unwrap() >= f_ign_nq(n, p).unwrap() - 1e-12);
    }

    #[test]
    fn two_points_give_selection_probability(
        n in 1usize..=5,
        ps in prop::collection::vec(0.0..=1.0f64, 5),
        b in (0.0..=std::f64::consts::PI, 0.0..std::f64::consts::TAU),
    ) {
        let code = CompiledCode::new(n, &ps[..n]).unwrap();
        let sel = code.selected();
        let weight = |s: &State| sel.overlap_and_weight(&[s.amplitudes()[0], s.amplitudes()[1]]).1;
        let quad = bloch_average(|pt| weight(&pt.to_state()), &quadrature(64, 1), Linearity::Linear).unwrap();
        let point = repqed::Bloch::new(b.0, b.1).unwrap();
        let anti = repqed::Bloch::new(std::f64::consts::PI - b.0, (b.1 + std::f64::consts::PI) % std::f64::consts::TAU).unwrap();
        let pair = 0.5 * (weight(&point.to_state()) + weight(&anti.to_state()));
        prop_assert!((pair - quad).abs() < 1e-12);
    }
}

// Uniform weighting counts rarely selected inputs fully, so at large p it can fall below ignoring the result.
#[test]
fn uniform_selection_can_hurt_at_large_p() {
    for (n, p) in [(2, 0.9), (3, 0.8), (8, 0.5)] {
        assert!(f_qed_nq(n, p).unwrap() < f_ign_nq(n, p).unwrap() - 1e-3, "n = {n}, p = {p}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grid_search_never_beats_closed_form(
        r in 0.0..=1.0f64,
        phi in 0.0..=std::f64::consts::FRAC_PI_2,
        error_result in any::<bool>(),
    ) {
        let class = if error_result { OutcomeClass::ErrorResult } else { OutcomeClass::NoError };
        let branch = BranchKK::new(r * phi.cos(), r * phi.sin(), class).unwrap();
        let found = numeric_unitary_search(&branch.to_op(), &EulerGrid::new(24).unwrap());
        prop_assert!(found.f_bar <= optimal_correction(&branch).f_bar_max + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn protocol_states_stay_physical(
        theta2 in 0.0..=std::f64::consts::PI,
        t1 in 100.0..2000.0f64,
        ratio in 0.3..2.0f64,
        e in 0usize..6,
        kind in 0usize..3,
    ) {
        let kind = ProtocolKind::ALL[kind];
        let config = ProtocolConfig::new(kind, ErrorKind::ALL[e])
            .with_theta2(theta2)
            .with_t1_t2(t1, ratio * t1)
            .unwrap();
        // Trace and positivity are asserted at every step inside the engine.
        let r = protocol::simulate_all(&config).unwrap();
        for (p0, p1) in r.p0.iter().zip(&r.p1) {
            prop_assert!((p0 + p1 - 1.0).abs() < 1e-10);
        }
        for f in [r.report.f_ign, r.report.f_qed_weighted, r.report.f_qec].into_iter().flatten() {
            prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
        }
    }
}
