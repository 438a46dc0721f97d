#![allow(dead_code)]

use std::f64::consts::LN_2;

use furstenberg_core::{
    deform, BaseSystem, CocycleSpec, Element, GroupElement, GroupSpec, KappaMeasure, ProductMeasureSpec, Scenario,
};

pub fn el(s: &str) -> GroupElement {
    s.parse().unwrap()
}

pub fn cantor_kappa(atoms: &[(&str, f64)]) -> KappaMeasure {
    KappaMeasure::from_f64(atoms.iter().map(|(g, w)| (Element::Cantor(el(g)), *w)).collect()).unwrap()
}

pub fn odometer(kappa: KappaMeasure, nu: ProductMeasureSpec) -> Scenario {
    Scenario::new(GroupSpec::DirectSumZ2, kappa, BaseSystem::HaarOdometer, CocycleSpec::canonical(), nu).unwrap()
}

/// `κ = δ_{1}`, `ε ≡ ln 2`.
pub fn single() -> Scenario {
    odometer(cantor_kappa(&[("{1}", 1.0)]), ProductMeasureSpec::constant(LN_2)).named("single")
}

/// The five Monte Carlo cross-check fixtures with their exact entropies.
pub fn mc_fixtures() -> Vec<Scenario> {
    vec![
        single(),
        odometer(cantor_kappa(&[("{1,2}", 1.0)]), ProductMeasureSpec::constant(LN_2)).named("two coordinates"),
        odometer(cantor_kappa(&[("{1}", 0.5), ("{1,3}", 0.2), ("{2}", 0.3)]), ProductMeasureSpec::constant(0.7))
            .named("mixed weights"),
        odometer(
            cantor_kappa(&[("{1}", 1.0 / 3.0), ("{2,5}", 1.0 / 3.0), ("{3,4,7}", 1.0 / 3.0)]),
            ProductMeasureSpec::power(1.0, 0.5),
        )
        .named("power family"),
        single().with_nu(deform(&ProductMeasureSpec::constant(LN_2), 1, 0.3).unwrap()).named("deformed"),
    ]
}

/// `Z` acting on `Z/m` with non-constant generator tables.
pub fn cycle_fixtures() -> Vec<Scenario> {
    let z = |atoms: &[(i64, f64)]| {
        KappaMeasure::from_f64(atoms.iter().map(|(k, w)| (Element::Int(*k), *w)).collect()).unwrap()
    };
    vec![
        Scenario::new(
            GroupSpec::Integers,
            z(&[(1, 0.5), (2, 0.25), (-1, 0.25)]),
            BaseSystem::FiniteCycle { m: 3 },
            CocycleSpec::GeneratorTable { values: vec![el("{1}"), el("{2}"), el("{1,3}")] },
            ProductMeasureSpec::constant(LN_2).with_override(2, 0.1, 0.9).unwrap(),
        )
        .unwrap()
        .named("cycle m=3"),
        Scenario::new(
            GroupSpec::Integers,
            z(&[(1, 0.6), (-3, 0.4)]),
            BaseSystem::FiniteCycle { m: 2 },
            CocycleSpec::GeneratorTable { values: vec![el("{1,2}"), el("{4}")] },
            ProductMeasureSpec::power(0.8, 0.5),
        )
        .unwrap()
        .named("cycle m=2"),
        Scenario::new(
            GroupSpec::Integers,
            z(&[(1, 0.5), (-1, 0.5)]),
            BaseSystem::FiniteCycle { m: 5 },
            CocycleSpec::GeneratorTable { values: vec![el("{1}"), el("{2}"), el("{3}"), el("{1,2}"), el("{5}")] },
            ProductMeasureSpec::constant(1.3),
        )
        .unwrap()
        .named("cycle m=5"),
    ]
}

/// A fixture whose fiber measure is invariant.
pub fn haar() -> Scenario {
    odometer(cantor_kappa(&[("{1}", 0.5), ("{2,3}", 0.5)]), ProductMeasureSpec::zero()).named("haar")
}
