mod common;

use spinstate::ansatz::AnsatzSpec;
use spinstate::integrals::{rotate_integrals, ActiveSpaceIntegrals, OrbitalRotation};
use spinstate::oracle::casci_energy;
use spinstate::scf::{run_oo_vqe, OoOptions, OoProblem, OoResult};
use spinstate::vqe::ThetaInit;

fn oo_problem(ints: &ActiveSpaceIntegrals, spec: &AnsatzSpec, spins: &[usize], max_steps: usize) -> OoProblem {
    OoProblem {
        states: common::targets(ints.n_orb, ints.n_electrons(), spins),
        program: common::program(spec, ints),
        tolerance: 1e-10,
        window: 50,
        max_steps,
    }
}

fn assert_macro_descent(result: &OoResult) {
    let rows = &result.macro_trace.rows;
    for w in rows.windows(2) {
        assert!(w[1].e_avg_pre <= w[0].e_avg_post + 1e-9, "{} -> {}", w[0].e_avg_post, w[1].e_avg_pre);
    }
    for r in rows {
        assert!(r.e_avg_post <= r.e_avg_pre + 1e-12);
    }
    for s in &result.states {
        s.rdms.check(s.number, 1e-8).unwrap();
    }
}

#[test]
fn rotations_are_redundant_for_an_exact_circuit() {
    let ints = common::h2();
    let problem = oo_problem(&ints, &AnsatzSpec::kupccgsd(1), &[0], 3000);
    let theta0 = ThetaInit::Zeros.build(problem.program.n_parameters());
    let options = common::quick_options();
    let fixed = run_oo_vqe::<f64>(&ints, &problem, &options, &OoOptions { enabled: false, ..OoOptions::default() }, &theta0)
        .unwrap();
    let rotated = run_oo_vqe::<f64>(&ints, &problem, &options, &OoOptions::default(), &theta0).unwrap();
    let fci = casci_energy(&ints, 2, 0).unwrap();
    assert!((fixed.e_avg - fci).abs() < 1e-8, "{} vs {fci}", fixed.e_avg);
    assert!((rotated.e_avg - fixed.e_avg).abs() < 1e-8, "{} vs {}", rotated.e_avg, fixed.e_avg);
    assert_macro_descent(&rotated);
}

#[test]
fn restricted_circuit_descends_from_rotated_orbitals() {
    let base = ActiveSpaceIntegrals::random(3, 1, 1, 12);
    let mut kappa = OrbitalRotation::zeros(3);
    kappa.set(1, 0, 0.4);
    kappa.set(2, 1, -0.3);
    let ints = rotate_integrals(&base, &kappa).unwrap();
    let spec = AnsatzSpec { flavor: spinstate::ansatz::AnsatzFlavor::Uccsd, ..AnsatzSpec::kupccgsd(1) };
    let problem = oo_problem(&ints, &spec, &[0, 1], 600);
    let theta0 = ThetaInit::Zeros.build(problem.program.n_parameters());
    let oo = OoOptions { max_macros: 8, ..OoOptions::default() };
    let result = run_oo_vqe::<f64>(&ints, &problem, &common::quick_options(), &oo, &theta0).unwrap();
    let first = &result.macro_trace.rows[0];
    assert!(result.e_avg <= first.e_avg_pre + 1e-12);
    assert_macro_descent(&result);

    // Composition bookkeeping: the accumulated rotation maps the input
    // integrals onto the final working set.
    let recomposed = rotate_integrals(&ints, &result.kappa_total).unwrap();
    assert!((&recomposed.h - &result.integrals.h).amax() < 1e-8);
    let g_err = recomposed.g.iter().zip(&result.integrals.g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(g_err < 1e-8);
    result.integrals.validate(1e-10).unwrap();
}

#[test]
fn disabled_rotation_is_a_single_vqe() {
    let ints = ActiveSpaceIntegrals::random(2, 1, 1, 3);
    let problem = oo_problem(&ints, &AnsatzSpec::kupccgsd(1), &[0, 1], 300);
    let theta0 = ThetaInit::Zeros.build(problem.program.n_parameters());
    let oo = OoOptions { enabled: false, ..OoOptions::default() };
    let result = run_oo_vqe::<f64>(&ints, &problem, &common::quick_options(), &oo, &theta0).unwrap();
    assert_eq!(result.macro_trace.rows.len(), 0);
    assert_eq!(result.kappa_total.norm(), 0.0);
    assert_eq!(result.integrals, ints);
}
