use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use unitary_fisher::channel_model::{BipartiteState, Chart, ProbeFamily};
use unitary_fisher::estimate::{decode_amplitudes, QfiAtIdentity, SearchReport};
use unitary_fisher::fisher;
use unitary_fisher::linalg::{self, RMat};
use unitary_fisher::povm::{random_product_povm, refine_separable, Povm, PovmElement};
use unitary_fisher::su_algebra::{gellmann_basis, su2_polar_to_exp, su2_polar_to_exp_jacobian};
use unitary_fisher::{serialize, Tolerances};

fn polar() -> impl Strategy<Value = [f64; 3]> {
    (0.2..2.9f64, 0.2..2.9f64, 0.0..6.2f64).prop_map(|(a, t, p)| [a, t, p])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn qfi_is_chart_covariant(t in polar()) {
        // H_polar = Jᵀ H_exp J with J the polar-to-exp Jacobian.
        let polar_fam = ProbeFamily::su2_singlet();
        let exp_fam = ProbeFamily::new(
            Chart::Exp(gellmann_basis(2).unwrap()),
            polar_fam.input().clone(),
        ).unwrap();
        let h_polar = fisher::qfi_pure(&polar_fam.output_model(&t).unwrap());
        let x = su2_polar_to_exp(t[0], t[1], t[2]);
        let h_exp = fisher::qfi_pure(&exp_fam.output_model(&x).unwrap());
        let j = su2_polar_to_exp_jacobian(t[0], t[1], t[2]);
        let pulled = j.transpose() * h_exp.entries() * &j;
        prop_assert!(linalg::max_abs_real(&(pulled - h_polar.entries())) < 1e-8);
    }

    #[test]
    fn copies_add_information(t in polar(), n in 1usize..4, seed in 0u64..1000) {
        // N independent copies: the joint distribution's FI is N times the single-copy FI.
        let fam = ProbeFamily::su2_singlet();
        let model = fam.output_model(&t).unwrap();
        let povm = random_product_povm(2, 2, seed).unwrap();
        let tol = Tolerances::default();
        let (p, dp) = fisher::pure_distribution(&model, &povm).unwrap();
        let single = fisher::fisher_from_distribution(&p, &dp, 3, &tol).unwrap();
        // Product distribution over n outcomes, enumerated recursively.
        let mut probs = vec![1.0];
        let mut derivs = vec![vec![0.0; 3]];
        for _ in 0..n {
            let mut np = Vec::new();
            let mut nd = Vec::new();
            for (q, dq) in probs.iter().zip(&derivs) {
                for (pk, dpk) in p.iter().zip(&dp) {
                    np.push(q * pk);
                    nd.push((0..3).map(|i| dq[i] * pk + q * dpk[i]).collect::<Vec<f64>>());
                }
            }
            probs = np;
            derivs = nd;
        }
        let joint = fisher::fisher_from_distribution(&probs, &derivs, 3, &tol).unwrap();
        let scaled = single.entries() * n as f64;
        prop_assert!(linalg::max_abs_real(&(joint.entries() - scaled)) < 1e-8);
    }

    #[test]
    fn refinement_never_loses_information(t in polar(), seed in 0u64..1000, split in 2usize..4) {
        let fam = ProbeFamily::su2_singlet();
        let model = fam.output_model(&t).unwrap();
        let fine = random_product_povm(2, 2, seed).unwrap();
        let terms: Vec<_> = fine.elements().iter().map(|e| e.product_terms().unwrap()[0].clone()).collect();
        let coarse: Vec<_> = terms.chunks(split).map(|c| PovmElement::separable(c.to_vec())).collect();
        let coarse = Povm::new(4, coarse, &Tolerances::default()).unwrap();
        let tol = Tolerances::default();
        let i_coarse = fisher::classical_fi_pure(&model, &coarse, &tol).unwrap();
        let i_fine = fisher::classical_fi_pure(&model, &refine_separable(&coarse).unwrap(), &tol).unwrap();
        prop_assert!(linalg::min_eigenvalue_symmetric(&(i_fine.entries() - i_coarse.entries())) > -1e-9);
    }

    #[test]
    fn qcrb_holds_for_random_probes(seed in 0u64..10_000, d in 2usize..4) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let input = BipartiteState::random(d, &mut rng);
        let fam = ProbeFamily::new(Chart::Exp(gellmann_basis(d).unwrap()), input).unwrap();
        let theta: Vec<f64> = (0..d * d - 1).map(|k| ((seed + k as u64) % 7) as f64 * 0.1 - 0.3).collect();
        let model = fam.output_model(&theta).unwrap();
        let povm = random_product_povm(d, 2, seed).unwrap();
        let (h, i, report) = fisher::evaluate(&model, &povm, fam.tolerances()).unwrap();
        prop_assert!(linalg::min_eigenvalue_symmetric(&(h.entries() - i.entries())) > -1e-9);
        prop_assert!(report.merit <= (d * d - 1) as f64 + 1e-8);
    }
}

#[test]
fn separable_identity_for_d_two_to_five() {
    for d in 2..=5 {
        let fam = ProbeFamily::exp_max_entangled(d).unwrap();
        let theta = vec![0.1; d * d - 1];
        for seed in 0..3 {
            let povm = random_product_povm(d, 1 + seed as usize, seed).unwrap();
            let (_, _, r) =
                fisher::evaluate(&fam.output_model(&theta).unwrap(), &povm, fam.tolerances())
                    .unwrap();
            assert!((r.merit - (d * (d - 1)) as f64 / 2.0).abs() < 1e-9);
        }
    }
}

#[test]
fn frozen_qutrit_witness_still_beats_max_entangled() {
    let report: SearchReport =
        serialize::from_str(include_str!("fixtures/qutrit_witness.json")).unwrap();
    assert_eq!(report.d, 3);
    assert!(report.found);
    let state = BipartiteState::normalize(decode_amplitudes(&report.best_r).unwrap()).unwrap();
    let h = QfiAtIdentity::new(3).unwrap().qfi(&state).unwrap();
    let stored = RMat::from_fn(8, 8, |i, j| report.qfi[i][j]);
    assert!(linalg::max_abs_real(&(h.entries() - stored)) < 1e-10);
    let top = *h.eigenvalues().last().unwrap();
    assert!(top > 4.0 / 3.0 + 1e-6);
    assert!((top - report.max_eigenvalue).abs() < 1e-10);
}
