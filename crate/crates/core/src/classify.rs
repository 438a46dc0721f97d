//! Krieger type of the odometer action on `(X, ν)`.
//!
//! Labels are read off the family symbolically. The ratio-set estimator only
//! produces diagnostic evidence and never feeds back into a label.

use std::fmt;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cantor::{Family, GroupElement, PointSampler, ProductMeasureSpec};
use crate::error::{Error, Result};
use crate::montecarlo::collect_chunked;

/// Relative tolerance of the lattice detector.
pub const LATTICE_TOL: f64 = 1e-9;
/// Largest continued-fraction denominator tried per ratio.
pub const MAX_DENOMINATOR: i64 = 1000;
/// Observed log-ratios closer than this (relative) are merged.
pub const MERGE_TOL: f64 = 1e-12;

const MAX_LATTICE_INDEX: i64 = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub enum TypeLabel {
    II1,
    IIILambda(f64),
    III1,
    III0,
    Unknown(String),
}

impl fmt::Display for TypeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeLabel::II1 => f.write_str("II_1"),
            TypeLabel::IIILambda(l) => {
                let s = format!("{l:.12}");
                write!(f, "III_lambda({})", s.trim_end_matches('0').trim_end_matches('.'))
            }
            TypeLabel::III1 => f.write_str("III_1"),
            TypeLabel::III0 => f.write_str("III_0"),
            TypeLabel::Unknown(reason) => write!(f, "Unknown({reason})"),
        }
    }
}

/// A type label together with the rule that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct KriegerType {
    pub label: TypeLabel,
    pub evidence: String,
}

impl KriegerType {
    fn new(label: TypeLabel, evidence: impl Into<String>) -> Self {
        Self { label, evidence: evidence.into() }
    }

    /// `λ` for `III_λ`.
    pub fn lambda(&self) -> Option<f64> {
        match self.label {
            TypeLabel::IIILambda(l) => Some(l),
            _ => None,
        }
    }
}

impl fmt::Display for KriegerType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.label.fmt(f)
    }
}

/// Growth of the partial sums `Σ_{n ≤ N} ε_n²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DivergenceRate {
    /// `~ coefficient · N`.
    Linear { coefficient: f64 },
    /// `~ coefficient · N^exponent`.
    Power { coefficient: f64, exponent: f64 },
    /// `~ coefficient · ln N`.
    Logarithmic { coefficient: f64 },
}

impl fmt::Display for DivergenceRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DivergenceRate::Linear { coefficient } => write!(f, "{coefficient}·N"),
            DivergenceRate::Power { coefficient, exponent } => write!(f, "{coefficient}·N^{exponent}"),
            DivergenceRate::Logarithmic { coefficient } => write!(f, "{coefficient}·ln N"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SquareSum {
    Converges(f64),
    Diverges(DivergenceRate),
}

impl SquareSum {
    pub fn converges(&self) -> bool {
        matches!(self, SquareSum::Converges(_))
    }
}

impl fmt::Display for SquareSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SquareSum::Converges(v) => write!(f, "converges to {v}"),
            SquareSum::Diverges(r) => write!(f, "diverges like {r}"),
        }
    }
}

/// `ζ(s)` for real `s > 1` by Euler–Maclaurin.
fn zeta(s: f64) -> f64 {
    const N: f64 = 64.0;
    let head: f64 = (1..64).map(|n| f64::from(n).powf(-s)).sum();
    let t = N.powf(-s);
    head + N * t / (s - 1.0) + t / 2.0 + s * t / (12.0 * N) - s * (s + 1.0) * (s + 2.0) * t / (720.0 * N.powi(3))
        + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * t / (30240.0 * N.powi(5))
}

/// Decides `Σ ε_n² < ∞` from the family. Overrides and deformation only
/// touch finitely many terms and are ignored.
pub fn kakutani_square_sum(spec: &ProductMeasureSpec) -> SquareSum {
    match spec.family() {
        Family::Zero => SquareSum::Converges(0.0),
        Family::Constant { epsilon } if *epsilon == 0.0 => SquareSum::Converges(0.0),
        Family::Constant { epsilon } => SquareSum::Diverges(DivergenceRate::Linear { coefficient: epsilon * epsilon }),
        Family::Power { c, .. } if *c == 0.0 => SquareSum::Converges(0.0),
        Family::Power { c, a } => {
            let c2 = c * c;
            if *a > 0.5 {
                SquareSum::Converges(c2 * zeta(2.0 * a))
            } else if *a == 0.5 {
                SquareSum::Diverges(DivergenceRate::Logarithmic { coefficient: c2 })
            } else if *a == 0.0 {
                SquareSum::Diverges(DivergenceRate::Linear { coefficient: c2 })
            } else {
                let exponent = 1.0 - 2.0 * a;
                SquareSum::Diverges(DivergenceRate::Power { coefficient: c2 / exponent, exponent })
            }
        }
        Family::Periodic { epsilons } => {
            let mean = epsilons.iter().map(|e| e * e).sum::<f64>() / epsilons.len() as f64;
            if mean == 0.0 {
                SquareSum::Converges(0.0)
            } else {
                SquareSum::Diverges(DivergenceRate::Linear { coefficient: mean })
            }
        }
    }
}

/// Krieger type of the odometer on `(X, ν)`, decided from the family alone.
///
/// `III_0` is never returned.
pub fn classify_family(spec: &ProductMeasureSpec) -> KriegerType {
    if let SquareSum::Converges(v) = kakutani_square_sum(spec) {
        return KriegerType::new(
            TypeLabel::II1,
            format!("Σ ε_n² = {v} < ∞: ν is equivalent to the invariant Haar measure"),
        );
    }
    match spec.family() {
        Family::Constant { epsilon } => constant_type(epsilon.abs()),
        Family::Power { c, a } => {
            if *a == 0.0 {
                constant_type(c.abs())
            } else if *a > 0.0 {
                KriegerType::new(TypeLabel::III1, format!("ε_n = {c}·n^-{a} → 0 with Σ ε_n² = ∞"))
            } else {
                KriegerType::new(
                    TypeLabel::Unknown(format!("|ε_n| → ∞ (a = {a})")),
                    "no rule covers unbounded log-odds",
                )
            }
        }
        Family::Periodic { epsilons } => {
            let nonzero: Vec<f64> = epsilons.iter().map(|e| e.abs()).filter(|e| *e > 0.0).collect();
            match detect_lattice(&nonzero) {
                LatticeFit::Lattice { generator, .. } => {
                    let lambda = (-generator).exp();
                    KriegerType::new(
                        TypeLabel::IIILambda(lambda),
                        format!("periodic log-odds {epsilons:?} generate the lattice {generator}·ℤ"),
                    )
                }
                LatticeFit::Dense => KriegerType::new(
                    TypeLabel::III1,
                    format!("periodic log-odds {epsilons:?} are rationally independent"),
                ),
                LatticeFit::Trivial => unreachable!("a divergent square sum has a nonzero term"),
            }
        }
        Family::Zero => unreachable!("zero family converges"),
    }
}

fn constant_type(eps: f64) -> KriegerType {
    KriegerType::new(
        TypeLabel::IIILambda((-eps).exp()),
        format!("constant log-odds ε = {eps}: ratio set {{e^(kε)}}, λ = e^-ε"),
    )
}

/// Best common divisor of a set of reals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LatticeFit {
    /// Every value is zero.
    Trivial,
    /// Every value lies within `residual` of `generator · ℤ`.
    Lattice { generator: f64, residual: f64 },
    /// Some ratio has no rational approximation with small denominator.
    Dense,
}

impl LatticeFit {
    pub fn generator(&self) -> Option<f64> {
        match self {
            LatticeFit::Lattice { generator, .. } => Some(*generator),
            _ => None,
        }
    }
}

/// Continued-fraction approximation `p/q` of `x ≥ 0` within `tol`, with `q ≤ max_q`.
fn rational_approx(x: f64, tol: f64, max_q: i64) -> Option<(i64, i64)> {
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a > 1e15 {
            return None;
        }
        let a = a as i64;
        let (p2, q2) = (a.checked_mul(p1)?.checked_add(p0)?, a.checked_mul(q1)?.checked_add(q0)?);
        if q2 > max_q {
            return None;
        }
        if (x - p2 as f64 / q2 as f64).abs() <= tol {
            return Some((p2, q2));
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = r - a as f64;
        if frac <= 0.0 {
            return None;
        }
        r = 1.0 / frac;
    }
    None
}

/// Finds `g > 0` with every value in `g · ℤ`, using continued fractions of
/// each `|v| / min|v|` at relative tolerance [`LATTICE_TOL`].
pub fn detect_lattice(values: &[f64]) -> LatticeFit {
    // sums that cancel leave rounding noise, which is treated as zero
    let top = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mags: Vec<f64> = values.iter().map(|v| v.abs()).filter(|v| *v > LATTICE_TOL * top).collect();
    let Some(&base) = mags.iter().min_by(|a, b| a.total_cmp(b)) else {
        return LatticeFit::Trivial;
    };
    let mut ratios = Vec::with_capacity(mags.len());
    let mut lcm = 1i64;
    for &v in &mags {
        let x = v / base;
        let Some((p, q)) = rational_approx(x, LATTICE_TOL * x.max(1.0), MAX_DENOMINATOR) else {
            return LatticeFit::Dense;
        };
        lcm = lcm.lcm(&q);
        if lcm > MAX_LATTICE_INDEX {
            return LatticeFit::Dense;
        }
        ratios.push((p, q));
    }
    // v_i = (p_i/q_i) base = (p_i lcm/q_i) (base/lcm)
    let k = ratios.iter().fold(0i64, |acc, (p, q)| acc.gcd(&(p * (lcm / q))));
    let generator = base * k as f64 / lcm as f64;
    let residual = mags.iter().map(|v| (v - (v / generator).round() * generator).abs()).fold(0.0, f64::max);
    LatticeFit::Lattice { generator, residual }
}

/// Distinct log-ratios observed by [`ratio_set_estimate`].
#[derive(Clone, Debug, PartialEq)]
pub struct RatioSetEstimate {
    /// Sorted distinct values with multiplicities.
    pub values: Vec<(f64, u64)>,
    pub lattice: LatticeFit,
    pub samples: u64,
    pub depth: u32,
    pub seed: u64,
}

impl RatioSetEstimate {
    /// Largest gap between consecutive distinct values inside `[lo, hi]`.
    pub fn max_gap_within(&self, lo: f64, hi: f64) -> Option<f64> {
        let inside: Vec<f64> = self.values.iter().map(|(v, _)| *v).filter(|v| *v >= lo && *v <= hi).collect();
        inside.windows(2).map(|w| w[1] - w[0]).reduce(f64::max)
    }

    pub fn distinct(&self) -> usize {
        self.values.len()
    }
}

/// Stream id reserved for drawing `f`, disjoint from the point streams.
const ELEMENT_STREAM: u64 = 1 << 63;

/// Draws `f` with each coordinate of `[1, depth]` present independently with
/// probability 1/2.
fn random_element(depth: u32, seed: u64, i: u64) -> GroupElement {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(ELEMENT_STREAM | i);
    let coords: Vec<u32> = (1..=depth).filter(|_| rng.random::<bool>()).collect();
    GroupElement::from_coords(coords).expect("distinct positive coordinates")
}

/// Samples `log dν∘S_f/dν (y)` for random `f` supported in `[1, depth]` and
/// `ν`-random `y`.
pub fn ratio_set_estimate(
    spec: &ProductMeasureSpec,
    depth: u32,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<RatioSetEstimate> {
    if depth == 0 {
        return Err(Error::Validation("depth must be >= 1".into()));
    }
    if samples == 0 {
        return Err(Error::Validation("need at least one sample".into()));
    }
    let mut raw = collect_chunked(samples, workers, |i| {
        let f = random_element(depth, seed, i);
        PointSampler::new(spec, seed, i).log_rn(&f) + 0.0
    });
    raw.sort_by(f64::total_cmp);
    let mut values: Vec<(f64, u64)> = Vec::new();
    for v in raw {
        match values.last_mut() {
            Some((u, m)) if (v - *u).abs() <= MERGE_TOL * u.abs().max(1.0) => *m += 1,
            _ => values.push((v, 1)),
        }
    }
    let distinct: Vec<f64> = values.iter().map(|(v, _)| *v).collect();
    Ok(RatioSetEstimate { lattice: detect_lattice(&distinct), values, samples, depth, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{LN_2, PI};

    #[test]
    fn labels_render() {
        assert_eq!(TypeLabel::II1.to_string(), "II_1");
        assert_eq!(TypeLabel::IIILambda(0.5).to_string(), "III_lambda(0.5)");
        assert_eq!(TypeLabel::IIILambda((-LN_2).exp()).to_string(), "III_lambda(0.5)");
        assert_eq!(TypeLabel::III1.to_string(), "III_1");
        assert_eq!(TypeLabel::III0.to_string(), "III_0");
        assert_eq!(TypeLabel::Unknown("x".into()).to_string(), "Unknown(x)");
    }

    #[test]
    fn zeta_values() {
        assert!((zeta(2.0) - PI * PI / 6.0).abs() < 1e-14);
        assert!((zeta(4.0) - PI.powi(4) / 90.0).abs() < 1e-14);
        assert!((zeta(1.5) - 2.612_375_348_685_488).abs() < 1e-13);
    }

    #[test]
    fn square_sum_examples() {
        assert_eq!(kakutani_square_sum(&ProductMeasureSpec::power(1.0, 1.0)), SquareSum::Converges(zeta(2.0)));
        assert!(!kakutani_square_sum(&ProductMeasureSpec::power(1.0, 0.5)).converges());
        assert_eq!(kakutani_square_sum(&ProductMeasureSpec::zero()), SquareSum::Converges(0.0));
        assert!(!kakutani_square_sum(&ProductMeasureSpec::constant(0.1)).converges());
        let with = ProductMeasureSpec::constant(0.1).with_override(2, 0.5, 0.5).unwrap();
        assert!(!kakutani_square_sum(&with).converges());
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_family(&ProductMeasureSpec::zero()).label, TypeLabel::II1);
        let half = classify_family(&ProductMeasureSpec::constant(LN_2));
        assert!((half.lambda().unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(classify_family(&ProductMeasureSpec::constant(-LN_2)).to_string(), "III_lambda(0.5)");
        assert_eq!(classify_family(&ProductMeasureSpec::power(1.0, 0.5)).label, TypeLabel::III1);
        assert_eq!(classify_family(&ProductMeasureSpec::power(1.0, 1.0)).label, TypeLabel::II1);
        assert!(matches!(classify_family(&ProductMeasureSpec::power(1.0, -1.0)).label, TypeLabel::Unknown(_)));
        assert_eq!(
            classify_family(&ProductMeasureSpec::power(2.0, 0.0)).to_string(),
            TypeLabel::IIILambda((-2.0f64).exp()).to_string()
        );
    }

    #[test]
    fn periodic_families() {
        let spec = |e: Vec<f64>| ProductMeasureSpec::new(Family::Periodic { epsilons: e }).unwrap();
        let t = classify_family(&spec(vec![LN_2, 2.0 * LN_2, 0.0]));
        assert!((t.lambda().unwrap() - 0.5).abs() < 1e-12);
        let t = classify_family(&spec(vec![0.4, 0.6]));
        assert!((t.lambda().unwrap() - (-0.2f64).exp()).abs() < 1e-12);
        assert_eq!(classify_family(&spec(vec![1.0, 2f64.sqrt()])).label, TypeLabel::III1);
        assert_eq!(classify_family(&spec(vec![0.0, 0.0])).label, TypeLabel::II1);
    }

    #[test]
    fn lattice_detection() {
        assert_eq!(detect_lattice(&[0.0, 0.0]), LatticeFit::Trivial);
        let g = detect_lattice(&[3.0 * LN_2, -5.0 * LN_2, 0.0]).generator().unwrap();
        assert!((g - LN_2).abs() < 1e-12);
        let g = detect_lattice(&[0.3, 0.45]).generator().unwrap();
        assert!((g - 0.15).abs() < 1e-12);
        assert_eq!(detect_lattice(&[1.0, PI]), LatticeFit::Dense);
    }

    #[test]
    fn ratio_set_examples() {
        let r = ratio_set_estimate(&ProductMeasureSpec::zero(), 20, 500, 1, 1).unwrap();
        assert_eq!(r.values, vec![(0.0, 500)]);
        assert_eq!(r.lattice, LatticeFit::Trivial);

        let r = ratio_set_estimate(&ProductMeasureSpec::constant(LN_2), 30, 2000, 7, 2).unwrap();
        for (v, _) in &r.values {
            assert!((v / LN_2 - (v / LN_2).round()).abs() * LN_2 < 1e-9);
        }
        assert!((r.lattice.generator().unwrap() - LN_2).abs() < 1e-9);
        assert_eq!(r.values.iter().map(|(_, m)| m).sum::<u64>(), 2000);
        assert_eq!(ratio_set_estimate(&ProductMeasureSpec::constant(LN_2), 30, 2000, 7, 1).unwrap(), r);
        assert!(ratio_set_estimate(&ProductMeasureSpec::zero(), 0, 10, 1, 1).is_err());
    }
}
