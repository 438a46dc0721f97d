mod common;

use std::collections::BTreeMap;

use furstenberg_core::actions::evaluate_cocycle;
use furstenberg_core::cantor::{assignments, rn_terms, PointSampler};
use furstenberg_core::*;
use proptest::prelude::*;

fn element(max: u32) -> impl Strategy<Value = GroupElement> {
    proptest::collection::btree_set(1..=max, 0..8).prop_map(|s| GroupElement::from_coords(s).unwrap())
}

fn spec() -> impl Strategy<Value = ProductMeasureSpec> {
    prop_oneof![
        Just(ProductMeasureSpec::zero()),
        (-3.0f64..3.0).prop_map(ProductMeasureSpec::constant),
        (-2.0f64..2.0, 0.0f64..2.0).prop_map(|(c, a)| ProductMeasureSpec::power(c, a)),
    ]
}

fn terms(f: &GroupElement, y: &PointPrefix) -> BTreeMap<u32, i32> {
    let mut m = BTreeMap::new();
    for (n, s) in rn_terms(f, y).unwrap() {
        *m.entry(n).or_insert(0) += i32::from(s);
    }
    m.retain(|_, v| *v != 0);
    m
}

proptest! {
    #[test]
    fn group_law(f in element(30), g in element(30), h in element(30)) {
        prop_assert_eq!(f.add(&g).add(&h), f.add(&g.add(&h)));
        prop_assert!(f.add(&f).is_identity());
        prop_assert_eq!(f.add(&g), g.add(&f));
        prop_assert!(norm(&f.add(&g)) <= norm(&f).max(norm(&g)));
        prop_assert_eq!(f.to_string().parse::<GroupElement>().unwrap(), f);
    }

    #[test]
    fn rn_chain_rule(f in element(20), g in element(20), s in spec(), seed in any::<u64>()) {
        let mut sampler = PointSampler::new(&s, seed, 0);
        sampler.reveal_support(&f);
        sampler.reveal_support(&g);
        let y = sampler.into_prefix();
        let gy = y.translated(&g).unwrap();
        let mut rhs = terms(&f, &gy);
        for (n, v) in terms(&g, &y) {
            *rhs.entry(n).or_insert(0) += v;
        }
        rhs.retain(|_, v| *v != 0);
        prop_assert_eq!(terms(&f.add(&g), &y), rhs);

        let lhs = log_rn_derivative(&f.add(&g), &y, &s).unwrap();
        let sum = log_rn_derivative(&f, &gy, &s).unwrap() + log_rn_derivative(&g, &y, &s).unwrap();
        prop_assert!((lhs - sum).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn translation_is_an_involution(f in element(20), seed in any::<u64>()) {
        let s = ProductMeasureSpec::constant(0.4);
        let mut sampler = PointSampler::new(&s, seed, 1);
        sampler.reveal_support(&f);
        let y = sampler.into_prefix();
        prop_assert_eq!(y.translated(&f).unwrap().translated(&f).unwrap(), y);
    }

    #[test]
    fn rn_has_unit_mass(f in element(10), s in spec()) {
        let total: f64 = assignments(f.support())
            .map(|y| y.cylinder_probability(&s) * rn_derivative(&f, &y, &s).unwrap())
            .sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn phi_decreases_towards_half(a in 1e-9f64..0.5, b in 1e-9f64..0.5) {
        prop_assume!(a < b);
        prop_assert!(phi(a).unwrap() >= phi(b).unwrap());
        prop_assert!(phi(a).unwrap() >= 0.0);
    }

    #[test]
    fn jeffreys_is_phi(eps in -20.0f64..20.0) {
        // 1/(1 + e^|ε|) keeps full relative precision; Φ is symmetric
        let t = 1.0 / (1.0 + eps.abs().exp());
        let j = jeffreys_weight(eps);
        prop_assert!((phi(t).unwrap() - j).abs() <= 1e-12 * (1.0 + j));
        prop_assert!((ProductMeasureSpec::constant(eps).law(3).jeffreys() - j).abs() <= 1e-15 * (1.0 + j));
    }

    #[test]
    fn cocycle_identity(g in -50i64..50, h in -50i64..50, x in 0u32..3) {
        let s = &common::cycle_fixtures()[0];
        let (g, h, x) = (Element::Int(g), Element::Int(h), BasePoint::Cycle(x));
        let lhs = evaluate_cocycle(&s.cocycle, &s.base, &s.group.op(&g, &h), &x).unwrap();
        let hx = s.base.act(&h, &x).unwrap();
        let rhs = evaluate_cocycle(&s.cocycle, &s.base, &g, &hx).unwrap()
            .add(&evaluate_cocycle(&s.cocycle, &s.base, &h, &x).unwrap());
        prop_assert_eq!(lhs, rhs);
        prop_assert!(evaluate_cocycle(&s.cocycle, &s.base, &Element::Int(0), &x).unwrap().is_identity());
    }

    #[test]
    fn deformation_raises_entropy(a in 0.01f64..1.0, b in 0.01f64..1.0, eps in -2.0f64..2.0) {
        prop_assume!(a < b);
        let s = common::single().with_nu(ProductMeasureSpec::constant(eps));
        let curve = realize::DeformationCurve::new(&s, 1).unwrap();
        let limit = curve.monotone_limit();
        let (a, b) = (a * limit, b * limit);
        prop_assert!(curve.entropy(a).unwrap() >= curve.entropy(b).unwrap());
        let direct = skew_entropy(&s.with_nu(deform(&s.nu, 1, a).unwrap())).unwrap().total;
        prop_assert!((direct - curve.entropy(a).unwrap()).abs() <= 1e-12 * (1.0 + direct));
    }

    #[test]
    fn small_entropy_bound(eps in 1e-4f64..0.5, budget in 1.05f64..4.0, lambda in any::<bool>()) {
        let kappa = common::cantor_kappa(&[("{1}", 0.25), ("{2}", 0.25), ("{1,3}", 0.25), ("{7}", 0.25)]);
        let flag = if lambda { TypeFlag::IIILambda } else { TypeFlag::III1 };
        let c = build_small_entropy_scenario(&kappa, eps, flag, budget).unwrap();
        prop_assert!(c.entropy.total > 0.0);
        prop_assert!(c.entropy.total <= c.bound + 1e-15);
        prop_assert!(c.bound < eps * budget);
        prop_assert!(c.budget.kappa_weighted_sum() < budget);
    }

    #[test]
    fn budget_sequences_are_admissible(ratio in 0.05f64..0.95, budget in 1.01f64..5.0) {
        let w = KappaWeights::Geometric { first: 1.0 - ratio, ratio };
        let b = build_budget(&w, budget).unwrap();
        prop_assert!(b.verify_prefix(500));
        prop_assert!(b.kappa_weighted_sum() <= 1.0 + (budget - 1.0) / 3.0 + 1e-12);
    }

    #[test]
    fn classification_ignores_finite_changes(s in spec(), n in 1u32..50, p in 0.01f64..0.99, theta in 0.01f64..1.0) {
        let base = classify_family(&s).label;
        prop_assert_ne!(&base, &TypeLabel::III0);
        prop_assert_eq!(&classify_family(&s.clone().with_override(n, p, 1.0 - p).unwrap()).label, &base);
        prop_assert_eq!(&classify_family(&deform(&s, n, theta).unwrap()).label, &base);
    }
}
