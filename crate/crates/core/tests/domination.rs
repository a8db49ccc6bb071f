use nalgebra::DVector;
use oplab_core::builders;
use oplab_core::domination::{
    check_asymptotic_domination, extract_summable_subsequence, TimeDomain, Trajectory, Verdict,
};
use oplab_core::{Cone, NormSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const W: (f64, f64) = (10.0, 200.0);

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn pointwise_smaller_orbits_are_dominated(seed in 0u64..10_000, d in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = builders::random_primitive_stochastic::<f64, _>(d, 0.1, &mut rng);
        let t = oplab_core::Semigroup::discrete(m, Cone::orthant(d).unwrap()).unwrap();
        let k: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let s = builders::dominated_by(&t, &k).unwrap();
        let x = DVector::from_fn(d, |_, _| rng.random::<f64>());
        let f = Trajectory::orbit(&s, x.clone()).unwrap();
        let g = Trajectory::orbit(&t, x).unwrap();
        let rep = check_asymptotic_domination(&f, &g, W, 1e-6).unwrap();
        prop_assert_eq!(rep.verdict(), Verdict::Dominated);
        prop_assert!(rep.error_samples.iter().all(|e| e.error_fg <= 1e-12));
    }

    #[test]
    fn domination_is_reflexive_and_symmetric_for_equal_trajectories(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DVector::from_fn(3, |_, _| 2.0 * rng.random::<f64>() - 1.0);
        let f = Trajectory::constant(x, Cone::orthant(3).unwrap(), NormSpec::L1, TimeDomain::Continuous).unwrap();
        let rep = check_asymptotic_domination(&f, &f, W, 1e-9).unwrap();
        prop_assert!(rep.equivalent);
    }
}

#[test]
fn a_persistent_gap_is_not_dominated() {
    let cone = Cone::orthant(2).unwrap();
    let f = Trajectory::constant(DVector::from_vec(vec![1.0, 0.0]), cone.clone(), NormSpec::L1, TimeDomain::Continuous)
        .unwrap();
    let g = Trajectory::constant(DVector::from_vec(vec![0.0, 1.0]), cone, NormSpec::L1, TimeDomain::Continuous).unwrap();
    let rep = check_asymptotic_domination(&f, &g, W, 1e-6).unwrap();
    assert_eq!(rep.forward.verdict, Verdict::NotDominated);
    assert_eq!(rep.reverse.verdict, Verdict::NotDominated);
    assert!((rep.forward.sup_tail - 1.0).abs() < 1e-12);
}

#[test]
fn decaying_excess_yields_a_summable_slack() {
    let cone = Cone::orthant(2).unwrap();
    let f = Trajectory::function(
        |t| DVector::from_vec(vec![1.0 + (-t).exp(), 1.0]),
        cone.clone(),
        NormSpec::L1,
        TimeDomain::Continuous,
    )
    .unwrap();
    let g = Trajectory::constant(DVector::from_vec(vec![1.0, 1.0]), cone, NormSpec::L1, TimeDomain::Continuous).unwrap();
    let rep = check_asymptotic_domination(&f, &g, W, 1e-6).unwrap();
    assert_eq!(rep.verdict(), Verdict::Dominated);
    assert!(rep.reverse.verdict == Verdict::Dominated);
    let sub = extract_summable_subsequence(&f, &g, 40.0).unwrap();
    assert!(sub.verified);
    for (k, r) in sub.residual_norms.iter().enumerate() {
        assert!(*r <= 0.5f64.powi(k as i32) + 1e-15);
    }
    assert!(sub.times.windows(2).all(|w| w[0] < w[1]));
}
