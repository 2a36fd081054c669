//! Randomized invariants of the public API.

use bellkit::bds::{
    bds_from_probabilities, ccnr_value_equal_dims, fourier_from_probabilities, probabilities_from_fourier,
    twirl_channel, ProbabilityMatrix,
};
use bellkit::criteria::{ccnr, correlation_matrix, de_vicente, ppt_check, ssc_value};
use bellkit::io::{parse_state_json, to_json, StateInput};
use bellkit::qlinalg::{
    hermitian_eigenvalues, hermiticity_defect, max_abs_diff, partial_transpose, trace_norm, BipartiteDims, Subsystem,
};
use bellkit::sample::{
    ginibre, haar_unitary, random_density, random_probability_matrix, random_product_state, random_separable_state,
};
use bellkit::search::{
    canonical_mask, ccnr_homogeneous, dichotomous_state, displacement_homogeneity, fourier_l1, link_counts,
    phase_condition_check, SupportSet,
};
use bellkit::witness::{optimal_witness, sparse_witness, witness_expectation, SparseOptions};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dims() -> impl Strategy<Value = BipartiteDims> {
    prop_oneof![Just((2, 2)), Just((2, 3)), Just((3, 3)), Just((2, 4)), Just((4, 4)), Just((4, 6))]
        .prop_map(|(a, b)| BipartiteDims::new(a, b).unwrap())
}

fn small_dims() -> impl Strategy<Value = BipartiteDims> {
    prop_oneof![Just((2, 2)), Just((2, 3)), Just((3, 3))].prop_map(|(a, b)| BipartiteDims::new(a, b).unwrap())
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn support(d: usize) -> impl Strategy<Value = SupportSet> {
    let n = d * d;
    (1u64..(1u64 << n) - 1).prop_map(move |m| SupportSet::from_mask(BipartiteDims::square(d).unwrap(), m).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn fourier_round_trip(d in dims(), seed in any::<u64>()) {
        let p = random_probability_matrix(&mut rng(seed), d);
        let back = probabilities_from_fourier(&fourier_from_probabilities(&p)).unwrap();
        prop_assert!((p.matrix() - back.matrix()).abs().max() < 1e-12);
    }

    #[test]
    fn fourier_conjugate_symmetry(d in dims(), seed in any::<u64>()) {
        let l = fourier_from_probabilities(&random_probability_matrix(&mut rng(seed), d));
        prop_assert!((l.get(0, 0).re - 1.0).abs() < 1e-12);
        for mu in 0..d.d_a() as i64 {
            for nu in 0..d.d_b() as i64 {
                prop_assert!((l.get(-mu, -nu) - l.get(mu, nu).conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn bell_diagonal_states_are_states(d in dims(), seed in any::<u64>()) {
        let rho = bds_from_probabilities(&random_probability_matrix(&mut rng(seed), d));
        let m = rho.matrix();
        prop_assert!(hermiticity_defect(m) < 1e-12);
        prop_assert!((m.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(rho.min_eigenvalue().unwrap() > -1e-10);
    }

    #[test]
    fn partial_transpose_keeps_trace_and_hermiticity(d in small_dims(), seed in any::<u64>(), side_a in any::<bool>()) {
        let rho = random_density(&mut rng(seed), d, 3);
        let side = if side_a { Subsystem::A } else { Subsystem::B };
        let pt = partial_transpose(rho.matrix(), d, side).unwrap();
        prop_assert!((pt.trace() - rho.matrix().trace()).norm() < 1e-12);
        prop_assert!(hermiticity_defect(&pt) < 1e-12);
        let twice = partial_transpose(&pt, d, side).unwrap();
        prop_assert!(max_abs_diff(&twice, rho.matrix()) < 1e-14);
    }

    #[test]
    fn trace_norm_unitary_invariance(n in 2usize..7, seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = ginibre(&mut r, n, n);
        let (u, v) = (haar_unitary(&mut r, n), haar_unitary(&mut r, n));
        let a = trace_norm(&m).unwrap();
        prop_assert!((trace_norm(&(&u * &m * &v)).unwrap() - a).abs() < 1e-10 * a.max(1.0));
    }

    #[test]
    fn ssc_corners_are_ccnr_and_de_vicente(d in small_dims(), seed in any::<u64>(), rank in 1usize..4) {
        let rho = random_density(&mut rng(seed), d, rank);
        let c = correlation_matrix(&rho);
        prop_assert_eq!(ssc_value(&c, 1.0, 1.0).unwrap().detected(), ccnr(&rho).unwrap().detected);
        prop_assert_eq!(ssc_value(&c, 0.0, 0.0).unwrap().detected(), de_vicente(&rho).unwrap().detected);
    }

    #[test]
    fn correlation_trace_norm_is_fourier_l1(d in 2usize..6, seed in any::<u64>()) {
        let dims = BipartiteDims::square(d).unwrap();
        let p = random_probability_matrix(&mut rng(seed), dims);
        let rho = bds_from_probabilities(&p);
        let direct = ccnr(&rho).unwrap().value;
        let fourier = ccnr_value_equal_dims(&fourier_from_probabilities(&p)).unwrap();
        prop_assert!((direct - fourier).abs() < 1e-10);
    }

    #[test]
    fn optimal_witness_attains_ssc(d in small_dims(), seed in any::<u64>(), x in 0.0f64..2.0, y in 0.0f64..2.0) {
        let rho = random_density(&mut rng(seed), d, 2);
        let (w, value) = optimal_witness(&rho, x, y).unwrap();
        let g = ssc_value(&correlation_matrix(&rho), x, y).unwrap().g;
        prop_assert!((value - g).abs() < 1e-8);
        prop_assert!((witness_expectation(&w, &rho).unwrap() - g).abs() < 1e-8);
    }

    #[test]
    fn witnesses_are_nonnegative_on_separable_states(d in small_dims(), seed in any::<u64>(), x in 0.0f64..2.0, y in 0.0f64..2.0) {
        let mut r = rng(seed);
        let target = random_density(&mut r, d, 1);
        let (w, _) = optimal_witness(&target, x, y).unwrap();
        for _ in 0..8 {
            prop_assert!(witness_expectation(&w, &random_product_state(&mut r, d)).unwrap() >= -1e-8);
        }
        prop_assert!(witness_expectation(&w, &random_separable_state(&mut r, d, 4)).unwrap() >= -1e-8);
    }

    #[test]
    fn separable_states_satisfy_ssc(d in small_dims(), seed in any::<u64>(), x in 0.0f64..3.0, y in 0.0f64..3.0) {
        let sigma = random_separable_state(&mut rng(seed), d, 3);
        prop_assert!(ssc_value(&correlation_matrix(&sigma), x, y).unwrap().g >= -1e-10);
    }

    #[test]
    fn sparse_witness_never_beats_the_full_criterion(seed in any::<u64>(), ell in 1usize..6, x in 0.0f64..2.0, y in 0.0f64..2.0) {
        let d = BipartiteDims::new(2, 3).unwrap();
        let c = correlation_matrix(&random_density(&mut rng(seed), d, 1));
        let g = ssc_value(&c, x, y).unwrap().g;
        let o = sparse_witness(&c, x, y, ell, &SparseOptions::default()).unwrap();
        prop_assert!(o.value >= g - 1e-8);
        prop_assert!(o.lower_bound <= o.value + 1e-8);
    }

    #[test]
    fn twirl_is_a_trace_preserving_projection(seed in any::<u64>(), q in 0.0f64..1.0) {
        let d = BipartiteDims::square(3).unwrap();
        let mut r = rng(seed);
        let rho = random_density(&mut r, d, 2);
        let once = twirl_channel(&rho, 1.0).unwrap();
        let twice = twirl_channel(&once, 1.0).unwrap();
        prop_assert!(max_abs_diff(once.matrix(), twice.matrix()) < 1e-10);
        let partial = twirl_channel(&rho, q).unwrap();
        prop_assert!((partial.matrix().trace().re - 1.0).abs() < 1e-10);
        prop_assert!(partial.min_eigenvalue().unwrap() > -1e-10);
        let product = twirl_channel(&random_product_state(&mut r, d), 1.0).unwrap();
        prop_assert!(ppt_check(&product).unwrap().is_ppt);
    }

    #[test]
    fn homogeneity_is_translation_invariant_and_complement_dual(s in support(4), mu in 0usize..4, nu in 0usize..4) {
        let t = s.translated(mu, nu);
        prop_assert_eq!(displacement_homogeneity(&s), displacement_homogeneity(&t));
        prop_assert_eq!(canonical_mask(&s), canonical_mask(&t));
        let total: usize = link_counts(&s).iter().sum();
        prop_assert_eq!(total, s.len() * (16 - s.len()));
        if let Some(c) = s.complement() {
            prop_assert_eq!(link_counts(&s), link_counts(&c));
        }
    }

    #[test]
    fn phase_condition_implies_ppt(s in support(3)) {
        if phase_condition_check(&s).unwrap().holds {
            prop_assert!(ppt_check(&bds_from_probabilities(&dichotomous_state(&s))).unwrap().is_ppt);
        }
    }

    #[test]
    fn homogeneous_supports_follow_the_closed_form(s in support(3)) {
        if let Some(k) = displacement_homogeneity(&s) {
            let closed = ccnr_homogeneous(3, s.len(), k).unwrap();
            prop_assert!((closed - fourier_l1(&s)).abs() < 1e-10);
        }
    }

    #[test]
    fn probability_json_round_trip(d in dims(), seed in any::<u64>()) {
        let p = random_probability_matrix(&mut rng(seed), d);
        let text = serde_json::to_string(&p).unwrap();
        match parse_state_json(&text).unwrap() {
            StateInput::Probabilities(q) => prop_assert_eq!(q, p.clone()),
            other => prop_assert!(false, "parsed as {:?}", other),
        }
        // The rounded form stays within the printed precision.
        let rounded = to_json(&p, false).unwrap();
        match parse_state_json(&rounded).unwrap() {
            StateInput::Probabilities(q) => prop_assert!((q.matrix() - p.matrix()).abs().max() < 1e-12),
            other => prop_assert!(false, "parsed as {:?}", other),
        }
    }
}

#[test]
fn spectrum_of_partial_transpose_of_bell_state() {
    let d = BipartiteDims::square(3).unwrap();
    let p = ProbabilityMatrix::uniform_on(d, &[(0, 0)]).unwrap();
    let pt = partial_transpose(bds_from_probabilities(&p).matrix(), d, Subsystem::B).unwrap();
    let mut ev = hermitian_eigenvalues(&pt).unwrap();
    ev.sort_by(f64::total_cmp);
    assert!((ev[0] + 1.0 / 3.0).abs() < 1e-12);
    assert!((ev[8] - 1.0 / 3.0).abs() < 1e-12);
}
