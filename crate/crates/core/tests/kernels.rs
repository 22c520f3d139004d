mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use spinstate::ansatz::{apply_ansatz, compile_ansatz, AnsatzFlavor, AnsatzSpec};
use spinstate::mapping::build_spin_observables;
use spinstate::statevector::{ExcitationGenerator, ExcitationKind, StateVector};

const N: usize = 8;

fn kind_strategy() -> impl Strategy<Value = ExcitationKind> {
    prop_oneof![
        (0..N, 0..N).prop_map(|(from, to)| ExcitationKind::Single { from, to }),
        (0..N / 2, 0..N / 2).prop_map(|(from, to)| ExcitationKind::PairDouble { from, to }),
        (0..N, 0..N, 0..N, 0..N).prop_map(|(a, b, c, d)| ExcitationKind::Double { from: [a, b], to: [c, d] }),
    ]
    .prop_filter("distinct indices", |k| ExcitationGenerator::new(*k, N).is_ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exponential_matches_dense(kind in kind_strategy(), theta in -4.0f64..4.0, seed in any::<u64>()) {
        let g = ExcitationGenerator::new(kind, N).unwrap();
        let mut s = StateVector::<f64>::random(N, seed);
        let a = common::dense_generator(kind, N) * Complex64::new(theta, 0.0);
        let expect = a.exp() * common::column(&s);
        g.apply_exponential(&mut s, theta).unwrap();
        prop_assert!((common::column(&s) - expect).camax() < 1e-12);
    }

    #[test]
    fn exponential_is_unitary_and_invertible(kind in kind_strategy(), theta in -4.0f64..4.0, seed in any::<u64>()) {
        let g = ExcitationGenerator::new(kind, N).unwrap();
        let original = StateVector::<f64>::random(N, seed);
        let mut s = original.clone();
        g.apply_exponential(&mut s, theta).unwrap();
        prop_assert!((s.norm() - 1.0).abs() < 1e-13);
        g.apply_exponential(&mut s, -theta).unwrap();
        for (a, b) in s.amplitudes().iter().zip(original.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn ansatz_preserves_inner_products(seed in any::<u64>(), scale in 0.1f64..2.0) {
        let spec = AnsatzSpec::kupccgsd(2);
        let program = compile_ansatz(&spec, 4, 2, 2).unwrap();
        let theta = spinstate::vqe::ThetaInit::Uniform { seed }.build(program.n_parameters());
        let theta: Vec<f64> = theta.iter().map(|t| t * 100.0 * scale).collect();
        let a = StateVector::<f64>::random(N, seed);
        let b = StateVector::<f64>::random(N, seed ^ 0x5a5a);
        let before = a.inner_product(&b).unwrap();
        let ua = apply_ansatz(&a, &program, &theta).unwrap();
        let ub = apply_ansatz(&b, &program, &theta).unwrap();
        prop_assert!((ua.inner_product(&ub).unwrap() - before).norm() < 1e-12);
    }

    #[test]
    fn ansatz_conserves_number_and_spin_projection(
        seed in any::<u64>(),
        flavor in prop_oneof![Just(AnsatzFlavor::Uccsd), Just(AnsatzFlavor::Uccgsd), Just(AnsatzFlavor::KUpCCGSD)],
        n_alpha in 0usize..=4,
        n_beta in 0usize..=4,
    ) {
        let spec = AnsatzSpec { flavor, ..AnsatzSpec::kupccgsd(1) };
        let program = compile_ansatz(&spec, 4, n_alpha, n_beta).unwrap();
        let theta: Vec<f64> = spinstate::vqe::ThetaInit::Uniform { seed }
            .build(program.n_parameters())
            .iter()
            .map(|t| t * 150.0)
            .collect();
        let psi = StateVector::<f64>::random_in_sector(N, n_alpha, n_beta, seed).unwrap();
        let out = apply_ansatz(&psi, &program, &theta).unwrap();
        let obs = build_spin_observables(4);
        prop_assert!((out.expectation(&obs.n).unwrap() - (n_alpha + n_beta) as f64).abs() < 1e-10);
        let sz = 0.5 * (n_alpha as f64 - n_beta as f64);
        prop_assert!((out.expectation(&obs.sz).unwrap() - sz).abs() < 1e-10);
    }

    #[test]
    fn spin_adapted_circuit_keeps_spin(seed in any::<u64>(), spin in 0usize..=2) {
        let spec = AnsatzSpec { spin_adapted_singles: true, ..AnsatzSpec::kupccgsd(2) };
        let reference = spinstate::ansatz::build_reference_t0(4, 4, spin).unwrap();
        let program = compile_ansatz(&spec, 4, reference.n_alpha, reference.n_beta).unwrap();
        let theta: Vec<f64> = spinstate::vqe::ThetaInit::Uniform { seed }
            .build(program.n_parameters())
            .iter()
            .map(|t| t * 150.0)
            .collect();
        let out = apply_ansatz(&reference.to_state::<f64>().unwrap(), &program, &theta).unwrap();
        let s2 = out.expectation(&build_spin_observables(4).s2).unwrap();
        prop_assert!((s2 - (spin * (spin + 1)) as f64).abs() < 1e-8);
    }
}

#[test]
fn zero_parameters_leave_the_state_bitwise_unchanged() {
    let program = compile_ansatz(&AnsatzSpec::kupccgsd(3), 4, 2, 2).unwrap();
    let psi = StateVector::<f64>::random(N, 11);
    let out = apply_ansatz(&psi, &program, &vec![0.0; program.n_parameters()]).unwrap();
    assert_eq!(out.amplitudes(), psi.amplitudes());
}

#[test]
fn single_precision_tracks_double() {
    let program = compile_ansatz(&AnsatzSpec::kupccgsd(2), 4, 2, 2).unwrap();
    let theta: Vec<f64> = (0..program.n_parameters()).map(|i| 0.05 * ((i % 7) as f64 - 3.0)).collect();
    let psi = StateVector::<f64>::random_in_sector(N, 2, 2, 5).unwrap();
    let wide = apply_ansatz(&psi, &program, &theta).unwrap();
    let narrow = apply_ansatz(&psi.cast::<f32>(), &program, &theta).unwrap();
    let err = (0..wide.dim()).map(|x| (wide.amplitude(x) - narrow.amplitude(x)).norm()).fold(0.0, f64::max);
    assert!(err < 1e-5, "f32 drift {err}");
}
