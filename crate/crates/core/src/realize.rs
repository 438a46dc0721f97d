//! Realizing entropy values.
//!
//! Two constructions live here. The budget construction builds scenarios of
//! a prescribed Krieger type whose entropy is at most `2ε`. The deformation
//! `ν^θ` then raises the entropy continuously and without bound as `θ → 0`,
//! which lets [`realize_target`] hit any value above the undeformed entropy.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::actions::{rational_to_f64, reduce, BaseSystem, CocycleSpec, Element, GroupSpec, KappaMeasure};
use crate::cantor::{phi, GroupElement, ProductMeasureSpec};
use crate::entropy::{pushforwards, skew_entropy, EntropyBreakdown};
use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Default tolerance of [`realize_target`].
pub const DEFAULT_TOL: f64 = 1e-9;
/// Bisection iteration cap.
pub const MAX_ITERATIONS: u32 = 200;
/// Default budget `B` in `Σ κ(g_n)(l_n + 1) < B`.
pub const DEFAULT_BUDGET: f64 = 2.0;

/// `ν^θ`: coordinate `n0` becomes `θ ν_{n0} + (1 - θ) δ_1`.
pub fn deform(spec: &ProductMeasureSpec, n0: u32, theta: f64) -> Result<ProductMeasureSpec> {
    spec.deformed(n0, theta)
}

/// `∫ κ_x({f : f(n0) ≠ 0}) dμ(x)`, computed exactly.
pub fn kappa_bar(scenario: &Scenario, n0: u32) -> Result<f64> {
    let mut total = BigRational::zero();
    for (_, _, kx) in pushforwards(scenario)? {
        // every base used here is uniform, so the weights are equal
        total += kx.mass_through(n0);
    }
    let points = scenario.base.integration_points(&scenario.cocycle)?.len();
    Ok(rational_to_f64(&(total / BigRational::from_integer(BigInt::from(points)))))
}

/// `h(ν) - h(ν^θ) = κ̄ (Φ(p) - Φ(θ p))` with `p = ν_{n0}(0)`.
pub fn entropy_shift(scenario: &Scenario, n0: u32, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidTheta(theta));
    }
    let kbar = kappa_bar(scenario, n0)?;
    let p = scenario.nu.law(n0).p0;
    Ok(kbar * (phi(p)? - phi(theta * p)?))
}

/// Closed form of `θ ↦ h_κ(T(α, S), μ × ν^θ)` for one deformation coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeformationCurve {
    pub n0: u32,
    /// Entropy at `θ = 1`.
    pub baseline: f64,
    pub kappa_bar: f64,
    /// `ν_{n0}(0)` before deformation.
    pub p: f64,
}

impl DeformationCurve {
    pub fn new(scenario: &Scenario, n0: u32) -> Result<Self> {
        Ok(Self {
            n0,
            baseline: skew_entropy(scenario)?.total,
            kappa_bar: kappa_bar(scenario, n0)?,
            p: scenario.nu.law(n0).p0,
        })
    }

    pub fn entropy(&self, theta: f64) -> Result<f64> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::InvalidTheta(theta));
        }
        if theta == 1.0 {
            return Ok(self.baseline);
        }
        Ok(self.baseline + self.kappa_bar * (phi(theta * self.p)? - phi(self.p)?))
    }

    /// Largest `θ` on which the curve is strictly decreasing: `Φ` decreases
    /// on `(0, 1/2]`, so `θ p` must stay below `1/2`.
    pub fn monotone_limit(&self) -> f64 {
        (0.5 / self.p).min(1.0)
    }

    /// `(θ, h(θ))` on `points` log-spaced values of `θ` in `[theta_min, 1]`.
    pub fn sample(&self, theta_min: f64, points: usize) -> Result<Vec<(f64, f64)>> {
        if !(theta_min > 0.0 && theta_min <= 1.0) {
            return Err(Error::InvalidTheta(theta_min));
        }
        let points = points.max(2);
        let log_min = theta_min.ln();
        (0..points)
            .map(|i| {
                let t = if i + 1 == points { 1.0 } else { (log_min * (1.0 - i as f64 / (points - 1) as f64)).exp() };
                Ok((t, self.entropy(t)?))
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealizationResult {
    pub theta_star: f64,
    pub achieved_entropy: f64,
    pub iterations: u32,
    pub bracket_width: f64,
}

/// Finds `θ* ∈ (0, 1]` with `|h(θ*) - target| ≤ tol`.
///
/// Brackets by halving `θ` until `h(θ) ≥ target`, then bisects. The achieved
/// value is recomputed from the deformed scenario, not from the closed form.
pub fn realize_target(scenario: &Scenario, n0: u32, target: f64, tol: f64) -> Result<RealizationResult> {
    if tol.is_nan() || tol <= 0.0 || !target.is_finite() {
        return Err(Error::Validation(format!("need finite target and tol > 0, got target={target}, tol={tol}")));
    }
    if n0 == 0 {
        return Err(Error::Validation("n0 must be >= 1".into()));
    }
    let curve = DeformationCurve::new(scenario, n0)?;
    if curve.kappa_bar == 0.0 {
        return Err(Error::NoMass { n0 });
    }
    if (target - curve.baseline).abs() <= tol {
        return Ok(RealizationResult {
            theta_star: 1.0,
            achieved_entropy: curve.baseline,
            iterations: 0,
            bracket_width: 0.0,
        });
    }
    if target < curve.baseline {
        return Err(Error::TargetUnreachable { target, baseline: curve.baseline });
    }

    // h(hi) <= target < h(lo) throughout
    let mut hi = curve.monotone_limit();
    let mut lo = hi;
    loop {
        lo *= 0.5;
        if lo * curve.p == 0.0 {
            return Err(Error::Solver(format!("target {target} needs theta below the floating-point range")));
        }
        if curve.entropy(lo)? >= target {
            break;
        }
        hi = lo;
    }

    let goal = 0.5 * tol;
    let mut iterations = 0;
    let theta_star = loop {
        iterations += 1;
        // geometric midpoint while the bracket spans orders of magnitude
        let mid = if hi > 2.0 * lo { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        let h = curve.entropy(mid)?;
        if (h - target).abs() <= goal {
            break mid;
        }
        if iterations >= MAX_ITERATIONS || mid == lo || mid == hi {
            return Err(Error::Solver(format!("no convergence after {iterations} iterations; bracket [{lo}, {hi}]")));
        }
        if h > target {
            lo = mid;
        } else {
            hi = mid;
        }
    };

    let deformed = scenario.with_nu(deform(&scenario.nu, n0, theta_star)?);
    let achieved_entropy = skew_entropy(&deformed)?.total;
    if (achieved_entropy - target).abs() > tol {
        return Err(Error::Solver(format!(
            "re-evaluated entropy {achieved_entropy} misses target {target} by more than {tol}"
        )));
    }
    Ok(RealizationResult { theta_star, achieved_entropy, iterations, bracket_width: hi - lo })
}

/// The weights `κ(g_1), κ(g_2), …` fed to the budget construction.
#[derive(Clone, Debug, PartialEq)]
pub enum KappaWeights {
    /// Finitely many exact weights; `κ(g_n) = 0` past the end.
    Finite(Vec<BigRational>),
    /// `κ(g_n) = first · ratio^(n-1)`.
    Geometric { first: f64, ratio: f64 },
}

impl From<&KappaMeasure> for KappaWeights {
    fn from(k: &KappaMeasure) -> Self {
        KappaWeights::Finite(k.atoms().iter().map(|(_, w)| w.clone()).collect())
    }
}

impl KappaWeights {
    pub fn weight(&self, n: u64) -> f64 {
        match self {
            KappaWeights::Finite(w) => w.get(n as usize - 1).map(rational_to_f64).unwrap_or(0.0),
            KappaWeights::Geometric { first, ratio } => first * ratio.powf((n - 1) as f64),
        }
    }

    /// `Σ_{m ≥ n} κ(g_m)`.
    pub fn tail(&self, n: u64) -> f64 {
        match self {
            KappaWeights::Finite(w) => w.iter().skip(n as usize - 1).map(rational_to_f64).sum(),
            KappaWeights::Geometric { first, ratio } => first * ratio.powf((n - 1) as f64) / (1.0 - ratio),
        }
    }

    pub fn mass(&self) -> f64 {
        self.tail(1)
    }

    fn validate(&self) -> Result<()> {
        match self {
            KappaWeights::Finite(w) if w.is_empty() => Err(Error::Validation("no weights".into())),
            KappaWeights::Finite(_) => Ok(()),
            KappaWeights::Geometric { first, ratio } => {
                if !(*ratio > 0.0 && *ratio < 1.0 && *first > 0.0) {
                    return Err(Error::Validation(format!(
                        "geometric weights need first > 0 and 0 < ratio < 1, got {first}, {ratio}"
                    )));
                }
                if (self.mass() - 1.0).abs() > 1e-12 {
                    return Err(Error::Validation(format!("geometric weights sum to {}, not 1", self.mass())));
                }
                Ok(())
            }
        }
    }
}

/// A nondecreasing integer sequence `l_1 = 0, l_2, …` with unit steps,
/// `l_n → ∞` and `Σ κ(g_n)(l_n + 1) < B`.
///
/// The sequence is stored by its jump indices: `l_n = #{k : n_k ≤ n}`.
/// Jump `k` is placed at the first index (after the previous jump) whose
/// κ-tail is at most `(B - 1) 4^(-k)`. Since
/// `Σ κ(g_n)(l_n + 1) = Σ κ + Σ_k tail(n_k)`, the weighted sum is at most
/// `1 + (B - 1)/3`.
#[derive(Clone, Debug, PartialEq)]
pub struct BudgetSequences {
    weights: KappaWeights,
    budget: f64,
    /// Jumps computed so far; for finite weights, up to the first jump past the support.
    jumps: Vec<u64>,
    kappa_weighted_sum: f64,
    exact_sum: Option<BigRational>,
}

impl BudgetSequences {
    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn weights(&self) -> &KappaWeights {
        &self.weights
    }

    /// `Σ_n κ(g_n)(l_n + 1)`.
    pub fn kappa_weighted_sum(&self) -> f64 {
        self.kappa_weighted_sum
    }

    /// The weighted sum as an exact rational, for finite weights.
    pub fn exact_weighted_sum(&self) -> Option<&BigRational> {
        self.exact_sum.as_ref()
    }

    fn threshold(&self, k: u64) -> f64 {
        (self.budget - 1.0) * 0.25f64.powf(k as f64)
    }

    /// Jump index `n_k` (1-based `k`).
    pub fn jump(&self, k: u64) -> u64 {
        let known = self.jumps.len() as u64;
        if k <= known {
            return self.jumps[k as usize - 1];
        }
        match self.weights {
            // past the support every index is a jump
            KappaWeights::Finite(_) => self.jumps.last().copied().unwrap_or(1) + (k - known),
            KappaWeights::Geometric { .. } => {
                let mut n = self.jumps.last().copied().unwrap_or(1);
                for j in known + 1..=k {
                    n = geometric_jump(&self.weights, self.threshold(j), n + 1);
                }
                n
            }
        }
    }

    /// `l_n`.
    pub fn l(&self, n: u64) -> u64 {
        assert!(n >= 1);
        self.prefix(n as usize)[n as usize - 1]
    }

    /// `l_1, …, l_len`.
    pub fn prefix(&self, len: usize) -> Vec<u64> {
        let mut out = Vec::with_capacity(len);
        let mut level = 0;
        let mut next = self.jump(1);
        for n in 1..=len as u64 {
            while next <= n {
                level += 1;
                next = self.jump(level + 1);
            }
            out.push(level);
        }
        out
    }

    /// Checks the structural constraints on the first `len` terms, and that
    /// the partial sum plus the smallest possible tail stays within the
    /// reported weighted sum.
    pub fn verify_prefix(&self, len: usize) -> bool {
        let l = self.prefix(len);
        let steps_ok = l.first() == Some(&0) && l.windows(2).all(|w| w[1] == w[0] || w[1] == w[0] + 1);
        let partial: f64 =
            l.iter().enumerate().map(|(i, &li)| self.weights.weight(i as u64 + 1) * (li + 1) as f64).sum();
        let tail_floor = (l[len - 1] + 1) as f64 * self.weights.tail(len as u64 + 1);
        steps_ok
            && partial + tail_floor <= self.kappa_weighted_sum * (1.0 + 1e-12)
            && self.kappa_weighted_sum < self.budget
    }
}

/// First `n ≥ start` with `tail(n) ≤ threshold` for geometric weights.
fn geometric_jump(w: &KappaWeights, threshold: f64, start: u64) -> u64 {
    let KappaWeights::Geometric { first, ratio } = *w else { unreachable!() };
    let guess = 1.0 + ((threshold * (1.0 - ratio) / first).ln() / ratio.ln()).ceil();
    let mut n = if guess.is_finite() && guess > start as f64 { guess as u64 } else { start };
    while n > start && w.tail(n - 1) <= threshold {
        n -= 1;
    }
    while w.tail(n) > threshold {
        n += 1;
    }
    n
}

/// Builds the slow-growth sequence `l` for the weights and budget `B > 1`.
pub fn build_budget(weights: &KappaWeights, budget: f64) -> Result<BudgetSequences> {
    weights.validate()?;
    if !budget.is_finite() || budget <= 1.0 {
        return Err(Error::Infeasible(format!(
            "budget {budget}: every admissible l has Σ κ(g_n)(l_n+1) ≥ Σ κ(g_n) = 1, so the sum cannot stay below {budget}"
        )));
    }
    match weights {
        KappaWeights::Finite(w) => {
            let b = BigRational::from_float(budget).expect("finite budget");
            let support = w.len() as u64;
            // tails[n - 1] = Σ_{m ≥ n} w_m for n = 1..=support+1
            let mut tails = vec![BigRational::zero(); w.len() + 1];
            for i in (0..w.len()).rev() {
                tails[i] = &tails[i + 1] + &w[i];
            }
            let four = BigRational::from_integer(BigInt::from(4));
            let mut thr = b - BigRational::one();
            let mut jumps = Vec::new();
            let mut sum = tails[0].clone();
            let mut n = 1u64;
            loop {
                thr /= four.clone();
                n += 1;
                while n <= support && tails[n as usize - 1] > thr {
                    n += 1;
                }
                jumps.push(n);
                if n > support {
                    break;
                }
                sum += &tails[n as usize - 1];
            }
            let kappa_weighted_sum = rational_to_f64(&sum);
            Ok(BudgetSequences { weights: weights.clone(), budget, jumps, kappa_weighted_sum, exact_sum: Some(sum) })
        }
        KappaWeights::Geometric { .. } => {
            let mut out = BudgetSequences {
                weights: weights.clone(),
                budget,
                jumps: Vec::new(),
                kappa_weighted_sum: 0.0,
                exact_sum: None,
            };
            let mut sum = weights.mass();
            let mut n = 1;
            for k in 1.. {
                n = geometric_jump(weights, out.threshold(k), n + 1);
                out.jumps.push(n);
                let term = weights.tail(n);
                sum += term;
                if term <= sum * 1e-18 || k >= 4096 {
                    break;
                }
            }
            out.kappa_weighted_sum = sum;
            Ok(out)
        }
    }
}

/// Krieger type requested from the small-entropy construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TypeFlag {
    /// `ε_n = eps · n^(-1/2)`.
    III1,
    /// `ε_n = eps`, type `III_{e^{-eps}}`.
    IIILambda,
}

/// Output of [`build_small_entropy_scenario`].
#[derive(Clone, Debug)]
pub struct ConstructedScenario {
    pub scenario: Scenario,
    pub budget: BudgetSequences,
    pub entropy: EntropyBreakdown,
    /// `eps · Σ κ(g_n)(l_n + 1)`, the a priori entropy bound.
    pub bound: f64,
}

/// Builds a scenario of the requested type with `0 < h ≤ 2 eps`.
///
/// The cocycle is a homomorphism that sends `g_n` to an element of norm at
/// most `l_n + 1`, so `∫ ‖α(T_{g_n} x, x)‖ dμ ≤ l_n + 1` and the entropy is
/// bounded by `eps · Σ κ(g_n)(l_n + 1) < eps · B`.
pub fn build_small_entropy_scenario(
    kappa: &KappaMeasure,
    eps: f64,
    flag: TypeFlag,
    budget: f64,
) -> Result<ConstructedScenario> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::Validation(format!("eps must be a positive finite number, got {eps}")));
    }
    let seq = build_budget(&KappaWeights::from(kappa), budget)?;
    let l = seq.prefix(kappa.len());

    let group = kappa.group();
    let (base, table) = match group {
        GroupSpec::DirectSumZ2 => (BaseSystem::HaarOdometer, cantor_labels(kappa, &l)),
        GroupSpec::Integers => (BaseSystem::FiniteCycle { m: 1 }, integer_labels(kappa)),
    };
    if table.iter().all(|(_, f)| f.is_identity()) {
        return Err(Error::Infeasible("kappa is concentrated on the identity, so every cocycle is trivial".into()));
    }
    let nu = match flag {
        TypeFlag::III1 => ProductMeasureSpec::power(eps, 0.5),
        TypeFlag::IIILambda => ProductMeasureSpec::constant(eps),
    };
    let mut scenario = Scenario::new(group, kappa.clone(), base, CocycleSpec::ConstantPerGenerator { table }, nu)?;
    scenario.name = match flag {
        TypeFlag::III1 => format!("small-entropy III_1 (eps={eps})"),
        TypeFlag::IIILambda => format!("small-entropy III_lambda (eps={eps})"),
    };
    let entropy = skew_entropy(&scenario)?;
    let bound = eps * seq.kappa_weighted_sum();
    Ok(ConstructedScenario { scenario, budget: seq, entropy, bound })
}

/// Labels `g_n ↦ {l_n + 1}` on a GF(2) basis extracted in enumeration order;
/// dependent atoms get the induced value.
fn cantor_labels(kappa: &KappaMeasure, l: &[u64]) -> Vec<(Element, GroupElement)> {
    let mut basis: BTreeMap<u32, (GroupElement, GroupElement)> = BTreeMap::new();
    kappa
        .atoms()
        .iter()
        .enumerate()
        .map(|(i, (g, _))| {
            let Element::Cantor(h) = g else { unreachable!("kappa on F") };
            let (rest, acc) = reduce(&basis, h.clone(), GroupElement::identity());
            let value = if rest.is_identity() {
                acc
            } else {
                let label = GroupElement::unit(l[i] as u32 + 1);
                basis.insert(rest.norm(), (rest, label.add(&acc)));
                label
            };
            (g.clone(), value)
        })
        .collect()
}

/// `k ↦ {1}` on odd multiples of `gcd(supp κ)`, identity otherwise.
fn integer_labels(kappa: &KappaMeasure) -> Vec<(Element, GroupElement)> {
    let ints: Vec<i64> = kappa
        .atoms()
        .iter()
        .map(|(g, _)| match g {
            Element::Int(k) => *k,
            Element::Cantor(_) => unreachable!("kappa on Z"),
        })
        .collect();
    let d = ints.iter().fold(0i64, |acc, k| acc.gcd(k));
    ints.iter()
        .map(|&k| {
            let odd = d != 0 && (k / d).rem_euclid(2) == 1;
            (Element::Int(k), if odd { GroupElement::unit(1) } else { GroupElement::identity() })
        })
        .collect()
}
