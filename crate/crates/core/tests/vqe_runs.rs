mod common;

use spinstate::ansatz::{AnsatzSpec, Tying};
use spinstate::integrals::ActiveSpaceIntegrals;
use spinstate::oracle::casci_energy;
use spinstate::vqe::{overlap_matrix, run_vqe, sa_energy, sa_gradient, ThetaInit, VqeOptions, VqeResult};

fn assert_conserved(result: &VqeResult, problem: &spinstate::vqe::SaVqeProblem, spin_adapted: bool) {
    for row in &result.trace.rows {
        for (i, t) in problem.states.iter().enumerate() {
            let r = &t.reference;
            assert!((row.number[i] - r.n_electrons() as f64).abs() <= 1e-10, "step {}", row.step);
            let sz = 0.5 * (r.n_alpha as f64 - r.n_beta as f64);
            assert!((row.spin_z[i] - sz).abs() <= 1e-10, "step {}", row.step);
            if spin_adapted {
                let s = r.spin as f64;
                assert!((row.spin_squared[i] - s * (s + 1.0)).abs() <= 1e-8, "step {}", row.step);
            }
        }
        assert!(row.max_overlap <= 1e-10, "step {}: overlap {}", row.step, row.max_overlap);
    }
}

#[test]
fn h2_singlet_reaches_chemical_accuracy() {
    let ints = common::h2();
    let problem = common::problem(&ints, &AnsatzSpec::kupccgsd(1), &[0]);
    let fci = casci_energy(&ints, 2, 0).unwrap();
    let theta0 = ThetaInit::Zeros.build(problem.program.n_parameters());
    let result = run_vqe::<f64>(&problem, &VqeOptions::default(), &theta0).unwrap();
    assert!(result.converged);
    let e = result.energies[0];
    assert!(e - fci <= 1.6e-3, "{e} vs {fci}");
    assert!(e >= fci - 1e-9);
    for row in &result.trace.rows {
        assert!(row.e_avg >= fci - 1e-9);
    }
    assert_conserved(&result, &problem, false);
}

#[test]
fn three_spin_states_stay_orthogonal_and_conserved() {
    let ints = ActiveSpaceIntegrals::random(4, 2, 2, 21);
    let spec = AnsatzSpec { spin_adapted_singles: true, ..AnsatzSpec::kupccgsd(1) };
    let mut problem = common::problem(&ints, &spec, &[0, 1, 2]);
    problem.max_steps = 400;
    let theta0 = ThetaInit::Uniform { seed: 3 }.build(problem.program.n_parameters());
    let result = run_vqe::<f64>(&problem, &common::quick_options(), &theta0).unwrap();
    assert_conserved(&result, &problem, true);
    let overlaps = overlap_matrix(&result.states).unwrap();
    for (i, row) in overlaps.iter().enumerate() {
        for (j, o) in row.iter().enumerate() {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((o.norm() - expect).abs() <= 1e-10);
        }
    }
    // Each state respects its own spin-sector bound.
    for (i, spin) in [0usize, 1, 2].into_iter().enumerate() {
        assert!(result.energies[i] >= casci_energy(&ints, 4, spin).unwrap() - 1e-9);
    }
    // Best-so-far never worse than the starting point.
    assert!(result.e_avg <= result.trace.rows[0].e_avg);
}

#[test]
fn single_precision_run_tracks_double() {
    let ints = common::h2();
    let problem = common::problem(&ints, &AnsatzSpec::kupccgsd(1), &[0]);
    let theta0 = ThetaInit::Zeros.build(problem.program.n_parameters());
    let wide = run_vqe::<f64>(&problem, &VqeOptions::default(), &theta0).unwrap();
    let narrow = run_vqe::<f32>(&problem, &VqeOptions::default(), &theta0).unwrap();
    assert!((wide.e_avg - narrow.e_avg).abs() < 1e-4, "{} vs {}", wide.e_avg, narrow.e_avg);
}

#[test]
fn gradient_matches_central_differences_on_eight_qubits() {
    let ints = ActiveSpaceIntegrals::random(4, 2, 2, 5);
    let problem = common::problem(&ints, &AnsatzSpec::kupccgsd(1), &[0, 1, 2]);
    let h = 1e-5;
    for seed in 0..4 {
        let theta: Vec<f64> = ThetaInit::Uniform { seed }.build(problem.program.n_parameters()).iter().map(|t| t * 50.0).collect();
        let g = sa_gradient(&theta, &problem).unwrap();
        let scale = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for i in 0..theta.len() {
            let mut p = theta.clone();
            p[i] += h;
            let mut m = theta.clone();
            m[i] -= h;
            let fd = (sa_energy(&p, &problem).unwrap().0 - sa_energy(&m, &problem).unwrap().0) / (2.0 * h);
            assert!((g[i] - fd).abs() <= 1e-6 * scale.max(1.0), "seed {seed} slot {i}: {} vs {fd}", g[i]);
        }
    }
}

#[test]
fn tied_gradient_is_the_sum_over_shared_generators() {
    let ints = ActiveSpaceIntegrals::random(4, 2, 2, 8);
    let tied_spec = AnsatzSpec { tying: Tying::SharedFirstLayerSingles, spin_adapted_singles: true, ..AnsatzSpec::kupccgsd(2) };
    let tied = common::problem(&ints, &tied_spec, &[0, 1]);
    let free = common::problem(&ints, &AnsatzSpec::kupccgsd(2), &[0, 1]);
    assert!(tied.program.n_parameters() < free.program.n_parameters());
    let theta: Vec<f64> = ThetaInit::Uniform { seed: 1 }.build(tied.program.n_parameters()).iter().map(|t| t * 30.0).collect();
    let expanded = tied.program.generator_angles(&theta).unwrap();
    let g_tied = sa_gradient(&theta, &tied).unwrap();
    let g_free = sa_gradient(&expanded, &free).unwrap();
    let folded = tied.program.fold_to_slots(&g_free);
    for (a, b) in g_tied.iter().zip(&folded) {
        assert!((a - b).abs() < 1e-12);
    }
    let (e_tied, _) = sa_energy(&theta, &tied).unwrap();
    let (e_free, _) = sa_energy(&expanded, &free).unwrap();
    assert!((e_tied - e_free).abs() < 1e-13);
}

#[test]
fn occupied_occupied_singles_have_no_gradient_at_a_closed_shell() {
    let ints = ActiveSpaceIntegrals::random(3, 2, 2, 4);
    let spec = AnsatzSpec { flavor: spinstate::ansatz::AnsatzFlavor::Uccgsd, ..AnsatzSpec::kupccgsd(1) };
    let problem = common::problem(&ints, &spec, &[0]);
    let g = sa_gradient(&vec![0.0; problem.program.n_parameters()], &problem).unwrap();
    let mut checked = 0;
    for (gen, &slot) in problem.program.generators().iter().zip(problem.program.slot_map()) {
        if let spinstate::statevector::ExcitationKind::Single { from, to } = gen.kind() {
            if from / 2 < 2 && to / 2 < 2 {
                assert!(g[slot].abs() < 1e-14, "{:?}", gen.kind());
                checked += 1;
            }
        }
    }
    assert!(checked > 0);
}

#[test]
fn runs_are_reproducible() {
    let ints = ActiveSpaceIntegrals::random(3, 2, 2, 2);
    let mut problem = common::problem(&ints, &AnsatzSpec::kupccgsd(1), &[0, 1]);
    problem.max_steps = 200;
    let theta0 = ThetaInit::Uniform { seed: 9 }.build(problem.program.n_parameters());
    let a = run_vqe::<f64>(&problem, &VqeOptions::default(), &theta0).unwrap();
    let b = run_vqe::<f64>(&problem, &VqeOptions::default(), &theta0).unwrap();
    assert_eq!(a.e_avg.to_bits(), b.e_avg.to_bits());
    assert_eq!(a.theta, b.theta);
    assert_eq!(a.trace.to_csv(), b.trace.to_csv());
}
