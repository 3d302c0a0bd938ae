use lqc_core::circuit::{parse, serialize, Circuit, GateSpec};
use lqc_core::gates::{controlled, is_isometry, local_metric, random_isometry, Gate, GateMatrix, LocalMetric};
use lqc_core::linalg;
use lqc_core::synthesis::{self, two_level, CompileOptions};
use lqc_core::{simulator, BitKind, RegisterLayout, StateVector};
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum Op {
    Single { gate: u8, param: f64, target: usize, control: Option<usize> },
    Cz(usize, usize),
    Custom { seed: u64, a: usize, b: usize },
}

fn layout_strategy() -> impl Strategy<Value = RegisterLayout> {
    prop::collection::vec(prop::bool::ANY, 1..=6)
        .prop_map(|v| RegisterLayout::from_bits(v.into_iter().map(|h| if h { BitKind::Hybit } else { BitKind::Qubit }).collect()))
}

fn op_strategy() -> impl Strategy<Value = Op> {
    prop_oneof![
        4 => (0u8..8, -1.5f64..1.5, 0usize..64, prop::option::of(0usize..64))
            .prop_map(|(gate, param, target, control)| Op::Single { gate, param, target, control }),
        1 => (0usize..64, 0usize..64).prop_map(|(a, b)| Op::Cz(a, b)),
        1 => (any::<u64>(), 0usize..64, 0usize..64).prop_map(|(seed, a, b)| Op::Custom { seed, a, b }),
    ]
}

/// Builds a valid circuit from loosely generated ops, skipping ones that collide.
fn build(layout: RegisterLayout, ops: &[Op]) -> Circuit {
    let bits = layout.num_bits();
    let mut circuit = Circuit::new(layout.clone());
    for (i, op) in ops.iter().enumerate() {
        match *op {
            Op::Single { gate, param, target, control } => {
                let t = target % bits;
                let hybit = layout.kind(t) == BitKind::Hybit;
                let g = match (gate, hybit) {
                    (0, false) => Gate::H,
                    (0, true) => Gate::Tau,
                    (1, false) => Gate::X,
                    (1, true) => Gate::Boost(param),
                    (2, _) => Gate::T,
                    (3, _) => Gate::Sz,
                    (4, _) => Gate::Szd,
                    (5, _) => Gate::Z,
                    (6, false) => Gate::Y,
                    _ => Gate::Phase(param),
                };
                let controls: Vec<usize> = control.map(|c| c % bits).filter(|&c| c != t).into_iter().collect();
                circuit.push_at(g, &[t], &controls).unwrap();
            }
            Op::Cz(a, b) => {
                let (a, b) = (a % bits, b % bits);
                if a != b {
                    circuit.push_at(Gate::Cz, &[a, b], &[]).unwrap();
                }
            }
            Op::Custom { seed, a, b } => {
                let (a, b) = (a % bits, b % bits);
                if a != b {
                    let eta = local_metric(&layout, &[a, b]).unwrap();
                    let m = GateMatrix::new(random_isometry(&eta, seed).unwrap()).unwrap();
                    circuit.push_at(GateSpec::custom(format!("c{i}"), m), &[a, b], &[]).unwrap();
                }
            }
        }
    }
    circuit
}

fn circuit_strategy() -> impl Strategy<Value = Circuit> {
    (layout_strategy(), prop::collection::vec(op_strategy(), 0..20)).prop_map(|(l, ops)| build(l, &ops))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialized_text_is_a_fixed_point(circuit in circuit_strategy()) {
        let text = serialize(&circuit);
        let reparsed = parse(&text).unwrap();
        prop_assert_eq!(reparsed.layout(), circuit.layout());
        prop_assert_eq!(reparsed.len(), circuit.len());
        prop_assert_eq!(serialize(&reparsed), text);
    }

    #[test]
    fn circuits_are_isometries_and_conserve_pseudo_norm(circuit in circuit_strategy()) {
        let m = circuit.to_matrix().unwrap();
        let eta = LocalMetric::of_layout(circuit.layout());
        prop_assert!(is_isometry(m.matrix(), &eta).unwrap().is_isometry);

        let layout = circuit.layout().clone();
        let out = simulator::run(&circuit, StateVector::zero(layout)).unwrap();
        let drift = (out.pseudo_norm() - 1.0).abs();
        prop_assert!(drift <= 1e-9 * out.euclidean_norm_sqr().max(1.0), "drift {drift}");
    }

    #[test]
    fn kernels_agree_with_dense_elaboration(circuit in circuit_strategy(), basis in any::<usize>()) {
        let layout = circuit.layout().clone();
        let idx = basis % layout.dimension();
        let input = StateVector::basis_state(layout.clone(), &layout.decode(idx)).unwrap();
        let out = simulator::run(&circuit, input).unwrap();
        let m = circuit.to_matrix().unwrap();
        let col = m.matrix().column(idx);
        let scale = linalg::max_abs(m.matrix()).max(1.0);
        for (a, b) in out.amplitudes().iter().zip(col.iter()) {
            prop_assert!((a - b).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn two_level_factors_rebuild_the_input(m in 0usize..4, n in 0usize..4, seed in any::<u64>()) {
        prop_assume!(m + n >= 2);
        let metric = LocalMetric::signature(m, n);
        let a = random_isometry(&metric, seed).unwrap();
        let factors = synthesis::two_level_factorize(&a, &metric).unwrap();
        let d = m + n;
        prop_assert!(factors.len() <= d * (d - 1) / 2);
        prop_assert!(factors.iter().all(|f| f.is_isometric()));
        let err = linalg::max_abs_diff(&two_level::product(&factors, d), &a);
        prop_assert!(err <= 1e-8 * linalg::max_abs(&a).powi(2).max(1.0), "error {err}");
    }

    #[test]
    fn lambda_k_matches_controlled_matrix(kinds in prop::collection::vec(prop::bool::ANY, 2..=4), seed in any::<u64>()) {
        let layout = RegisterLayout::from_bits(kinds.iter().map(|&h| if h { BitKind::Hybit } else { BitKind::Qubit }).collect());
        let k = layout.num_bits() - 1;
        let v = random_isometry(&LocalMetric::from_kinds(&[layout.kind(k)]), seed).unwrap();
        let controls: Vec<usize> = (0..k).collect();
        let circ = synthesis::lambda_k(&layout, &controls, k, &linalg::to_c2(&v)).unwrap();
        let expect = controlled(&GateMatrix::new(v.clone()).unwrap(), k).into_matrix();
        let err = linalg::max_abs_diff(circ.to_matrix().unwrap().matrix(), &expect);
        prop_assert!(err <= 1e-9 * linalg::max_abs(&v).powi(4).max(1.0), "error {err}");
    }

    #[test]
    fn qubit_only_measurement_is_born_rule(circuit in circuit_strategy()) {
        prop_assume!(circuit.layout().num_hybits() == 0);
        let out = simulator::run(&circuit, StateVector::zero(circuit.layout().clone())).unwrap();
        let dist = simulator::observe(&out).unwrap();
        prop_assert!((dist.observable_mass() - 1.0).abs() <= 1e-12);
        for (p, a) in dist.probabilities().iter().zip(out.amplitudes()) {
            prop_assert!((p - a.norm_sqr()).abs() <= 1e-12);
        }
    }
}

#[test]
fn compiled_circuit_for_interleaved_layout() {
    let layout = RegisterLayout::from_kinds_str("hqh").unwrap();
    let a = random_isometry(&LocalMetric::of_layout(&layout), 17).unwrap();
    let out = synthesis::compile(&a, &layout, &CompileOptions::default()).unwrap();
    let err = linalg::max_abs_diff(out.circuit.to_matrix().unwrap().matrix(), &a);
    assert!(err <= 1e-8, "error {err}");
    assert!(out.report.exact_ok());
}

#[test]
fn tau_conjugation_keeps_observable_mass_bounded() {
    let layout = RegisterLayout::new(1, 1);
    let mut circuit = Circuit::new(layout.clone());
    circuit.push_at(Gate::H, &[0], &[]).unwrap();
    circuit.push_at(Gate::Tau, &[1], &[0]).unwrap();
    let out = simulator::run(&circuit, StateVector::zero(layout)).unwrap();
    let dist = simulator::observe(&out).unwrap();
    let amps = out.amplitudes();
    let visible = amps[0].norm_sqr() + amps[2].norm_sqr();
    assert!((dist.observable_mass() - visible).abs() < 1e-14);
    assert!(dist.probabilities().iter().all(|p| *p >= 0.0));
    assert!((dist.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-14);
}
