use proptest::prelude::*;
use spinstate::ansatz::build_reference_t1;
use spinstate::diagnostics::{
    diagnostics_report, mutual_information, one_orbital_eigenvalues, one_orbital_entropy, two_orbital_entropy, z_s1,
};
use spinstate::linalg::hermitian_eigenvalues;
use spinstate::statevector::{reduced_density, StateVector};

#[test]
fn eigenvalue_routes_agree_on_random_sector_states() {
    for seed in 0..100u64 {
        let (na, nb) = ((seed % 4) as usize, ((seed / 4) % 4) as usize);
        let s = StateVector::<f64>::random_in_sector(8, na, nb, seed).unwrap();
        for i in 0..4 {
            let mut formula = one_orbital_eigenvalues(&s, i).unwrap().to_vec();
            formula.sort_by(f64::total_cmp);
            let traced = hermitian_eigenvalues(reduced_density(&s, &[i]).unwrap());
            for (a, b) in formula.iter().zip(&traced) {
                assert!((a - b).abs() <= 1e-10, "seed {seed} orbital {i}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn triplet_reference_golden_values() {
    let s = build_reference_t1(5, 6, 1).unwrap().to_state::<f64>().unwrap();
    assert!((z_s1(&s).unwrap() - 0.2).abs() <= 1e-10);
    let mi = mutual_information(&s).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            let expect = if (i, j) == (2, 3) || (i, j) == (3, 2) { 2f64.ln() } else { 0.0 };
            assert!((mi[(i, j)] - expect).abs() <= 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn entropy_bounds_and_subadditivity(seed in any::<u64>(), na in 0usize..=3, nb in 0usize..=3) {
        let s = StateVector::<f64>::random_in_sector(6, na, nb, seed).unwrap();
        let ln4 = 4f64.ln();
        let s1: Vec<f64> = (0..3).map(|i| one_orbital_entropy(&s, i).unwrap()).collect();
        for &v in &s1 {
            prop_assert!((-1e-12..=ln4 + 1e-12).contains(&v));
        }
        for i in 0..3 {
            for j in i + 1..3 {
                prop_assert!(two_orbital_entropy(&s, i, j).unwrap() <= s1[i] + s1[j] + 1e-12);
            }
        }
        let z = z_s1(&s).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&z));
    }

    #[test]
    fn mutual_information_is_symmetric_and_nonnegative(seed in any::<u64>()) {
        let s = StateVector::<f64>::random_in_sector(6, 2, 1, seed).unwrap();
        let r = diagnostics_report(&s, "random").unwrap();
        let mi = r.mutual_information_matrix();
        for i in 0..3 {
            prop_assert_eq!(mi[(i, i)], 0.0);
            for j in 0..3 {
                prop_assert_eq!(mi[(i, j)], mi[(j, i)]);
                prop_assert!(mi[(i, j)] >= -1e-12);
            }
        }
    }

    #[test]
    fn reduced_densities_are_physical(seed in any::<u64>(), i in 0usize..4, j in 0usize..4) {
        prop_assume!(i != j);
        let s = StateVector::<f64>::random_in_sector(8, 2, 1, seed).unwrap();
        let rho = reduced_density(&s, &[i, j]).unwrap();
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-12);
        prop_assert!((&rho - rho.adjoint()).camax() < 1e-14);
        for w in hermitian_eigenvalues(rho) {
            prop_assert!(w >= -1e-12);
        }
    }
}
