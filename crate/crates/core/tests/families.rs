mod common;

use common::bits_of;
use num_traits::Zero;
use xpaudit::explanations::is_waxp;
use xpaudit::generators::{
    gen_prop1, gen_prop2, gen_prop4_with, gen_prop5, generate, Family, GeneratorConfig,
    ProblemSidecar,
};
use xpaudit::rational::{int, rat};
use xpaudit::shapley::ShapleyEngine;
use xpaudit::{Error, FeatureSet, Rational};

#[test]
fn prop2_fixing_the_active_half_and_the_switch_is_sufficient() {
    for m in 1..=3 {
        let p = gen_prop2(m).unwrap().problem;
        let n = 2 * m;
        let active: FeatureSet = (m..=n).collect();
        assert!(is_waxp(&p, active).unwrap());
        assert!(!is_waxp(&p, active.without(n)).unwrap());
    }
}

#[test]
fn prop2_marginal_contributions_cancel_in_pairs() {
    for m in 1..=3 {
        let p = gen_prop2(m).unwrap().problem;
        let n = 2 * m;
        let e = ShapleyEngine::new(&p);
        // S inside one half, S′ its mirror image in the other
        for s in FeatureSet::full(m).subsets() {
            let mirrored: FeatureSet = s.iter().map(|i| i + m).collect();
            assert_eq!(
                e.delta(n, s).unwrap(),
                -e.delta(n, mirrored).unwrap(),
                "m = {m}, S = {s}"
            );
        }
        assert!(e.shap(n).unwrap().is_zero());
    }
}

#[test]
fn prop5_last_feature_contribution_is_half_of_g() {
    for m in 2..=4 {
        let p = gen_prop5(m).unwrap().problem;
        let n = m + 1;
        let e = ShapleyEngine::new(&p);
        let g = |x: &[bool]| !x[0] && !x[1..].iter().all(|&b| b);
        for s in FeatureSet::full(n).subsets() {
            // E[g | x_S] with v = 1, counting over the first m features
            let matching: Vec<Vec<bool>> = (0..1usize << m)
                .map(|idx| bits_of(idx, m))
                .filter(|x| s.iter().filter(|&i| i < m).all(|i| x[i]))
                .collect();
            let hits = matching.iter().filter(|x| g(x)).count();
            let expected = rat(hits as i64, 2 * matching.len() as i64);
            assert_eq!(e.delta(n, s).unwrap(), expected, "m = {m}, S = {s}");
        }
    }
}

#[test]
fn generators_refuse_inputs_that_break_their_conditions() {
    assert!(gen_prop1(1).is_err());
    let and = |x: &[bool]| x.iter().all(|&b| b);
    match gen_prop4_with(3, &and) {
        Err(Error::ConditionFailed(_)) => {}
        other => panic!("expected a refusal, got {:?}", other.map(|g| g.family)),
    }
    let prop4 = GeneratorConfig::new(Family::Prop4).with_alpha(rat(1, 2));
    assert!(generate(&prop4).is_err());
    let rho2 = GeneratorConfig::new(Family::Rho2).with_m(3);
    assert!(generate(&rho2).is_err());
}

#[test]
fn every_family_generates_with_defaults_and_round_trips_its_sidecar() {
    for family in Family::ALL {
        let generated = generate(&GeneratorConfig::new(family)).unwrap();
        assert!(generated.conditions.iter().all(|c| c.holds), "{family}");
        let sidecar = generated.sidecar();
        let back = ProblemSidecar::from_json(&sidecar.to_json()).unwrap();
        assert_eq!(back, sidecar);
        assert_eq!(&back.prediction, generated.problem.prediction());
    }
}

#[test]
fn boolean_families_reject_a_threshold() {
    let config = GeneratorConfig::new(Family::Prop1).with_delta(rat(1, 10));
    assert!(generate(&config).is_err());
    let zero: Rational = int(0);
    assert!(generate(&GeneratorConfig::new(Family::Prop1).with_delta(zero)).is_ok());
}
