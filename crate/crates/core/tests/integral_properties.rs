use proptest::prelude::*;
use spinstate::integrals::{energy_from_rdms, parse_fcidump, rotate_integrals, transform_integrals, ActiveSpaceIntegrals, OrbitalRotation};
use spinstate::mapping::build_qubit_hamiltonian;
use spinstate::scf::compute_rdms;
use spinstate::statevector::StateVector;

fn rotation(n_orb: usize, params: &[f64]) -> OrbitalRotation {
    let mut k = OrbitalRotation::zeros(n_orb);
    let mut it = params.iter();
    for p in 0..n_orb {
        for q in 0..p {
            k.set(p, q, *it.next().unwrap());
        }
    }
    k
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fcidump_text_round_trips(seed in any::<u64>(), n_orb in 1usize..=4) {
        let ints = ActiveSpaceIntegrals::random(n_orb, 1.min(n_orb), 1.min(n_orb), seed);
        let back = parse_fcidump(&ints.to_fcidump()).unwrap();
        prop_assert!((&back.h - &ints.h).amax() < 1e-14);
        for (a, b) in back.g.iter().zip(&ints.g) {
            prop_assert!((a - b).abs() < 1e-14);
        }
        prop_assert_eq!(back.core_energy, ints.core_energy);
    }

    #[test]
    fn rotations_compose_and_keep_symmetry(
        seed in any::<u64>(),
        a in prop::collection::vec(-1.5f64..1.5, 6),
        b in prop::collection::vec(-1.5f64..1.5, 6),
    ) {
        let ints = ActiveSpaceIntegrals::random(4, 2, 2, seed);
        let (ka, kb) = (rotation(4, &a), rotation(4, &b));
        let u = ka.unitary();
        prop_assert!((u.transpose() * &u - nalgebra::DMatrix::<f64>::identity(4, 4)).amax() < 1e-12);
        let twice = rotate_integrals(&rotate_integrals(&ints, &ka).unwrap(), &kb).unwrap();
        let once = transform_integrals(&ints, &(ka.unitary() * kb.unitary()));
        once.validate(1e-10).unwrap();
        prop_assert!((&twice.h - &once.h).amax() < 1e-10);
        for (x, y) in twice.g.iter().zip(&once.g) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn rdm_energy_equals_qubit_expectation(seed in any::<u64>(), na in 0usize..=3, nb in 0usize..=3) {
        let ints = ActiveSpaceIntegrals::random(3, na, nb, seed);
        let psi = StateVector::<f64>::random_in_sector(6, na, nb, seed.wrapping_add(1)).unwrap();
        let rdms = compute_rdms(&psi);
        rdms.check((na + nb) as f64, 1e-10).unwrap();
        let from_rdms = energy_from_rdms(&ints, &rdms.gamma, &rdms.two).unwrap();
        let direct = psi.expectation(&build_qubit_hamiltonian(&ints)).unwrap();
        prop_assert!((from_rdms - direct).abs() < 1e-10);
    }

    #[test]
    fn qubit_hamiltonian_is_hermitian(seed in any::<u64>()) {
        let h = build_qubit_hamiltonian(&ActiveSpaceIntegrals::random(3, 1, 1, seed));
        prop_assert!(h.is_hermitian(1e-12));
    }
}
