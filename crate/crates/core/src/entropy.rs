//! Furstenberg entropy of skew-product actions `T(α, S)` on `X × K`.
//!
//! For a probability `ξ` on `F` the fiber entropy has the closed form
//! `h_ξ(S, ν) = Σ_f ξ(f) Σ_{n ∈ N_f} (ν_n(1) - ν_n(0)) ln(ν_n(1)/ν_n(0))`,
//! and over a measure-preserving base the skew-product entropy is the
//! `μ`-average of `h_{κ_x}(S, ν)`. Monte Carlo estimators of the defining
//! integral are provided as an independent check.

use std::collections::BTreeMap;

use crate::actions::{pushforward_compiled, rational_to_f64, BasePoint, CompiledCocycle, FiniteMeasure};
use crate::cantor::{assignments, log_rn_derivative, phi, GroupElement, PointSampler, ProductMeasureSpec};
use crate::error::{Error, Result};
use crate::montecarlo::run_chunked;
use crate::scenario::Scenario;

/// Largest `|N_f|` enumerated by the direct product-space computations.
pub const ENUMERATION_LIMIT: usize = 24;

/// Total entropy split along the addition formula.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropyBreakdown {
    /// `h_κ(T, μ)`; zero for the measure-preserving bases supported here.
    pub base_term: f64,
    /// `∫ h_{κ_x}(S, ν) dμ(x)`.
    pub fiber_integral: f64,
    pub total: f64,
    /// Contribution of each fiber coordinate to `fiber_integral`.
    pub per_coordinate: BTreeMap<u32, f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

impl McEstimate {
    /// `|mean - value| ≤ k · stderr`.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.stderr
    }
}

/// How the base coordinate is integrated in Monte Carlo runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum McMode {
    /// Exact sum over the base, sampling only the fiber point.
    #[default]
    FiberOnly,
    /// Sample the base point as well.
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    /// Worker threads; 0 picks the rayon default.
    pub workers: usize,
    pub mode: McMode,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self { samples, seed, workers: 0, mode: McMode::FiberOnly }
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn mode(mut self, mode: McMode) -> Self {
        self.mode = mode;
        self
    }
}

/// `h_ξ(S, ν)` summed atom by atom.
pub fn exact_entropy(xi: &FiniteMeasure, spec: &ProductMeasureSpec) -> f64 {
    xi.iter_f64().map(|(f, w)| w * f.support().iter().map(|&n| spec.law(n).jeffreys()).sum::<f64>()).sum()
}

/// `h_ξ(S, ν)` summed coordinate by coordinate: `Σ_n ξ({f : n ∈ N_f}) Φ(ν_n(0))`.
pub fn exact_entropy_fubini(xi: &FiniteMeasure, spec: &ProductMeasureSpec) -> Result<f64> {
    xi.touched_coordinates().into_iter().map(|n| Ok(rational_to_f64(&xi.mass_through(n)) * phi(spec.law(n).p0)?)).sum()
}

/// Entropy of the skew product through the addition formula.
pub fn skew_entropy(scenario: &Scenario) -> Result<EntropyBreakdown> {
    let compiled = CompiledCocycle::new(&scenario.cocycle, &scenario.base)?;
    let mut fiber_integral = 0.0;
    let mut per_coordinate: BTreeMap<u32, f64> = BTreeMap::new();
    for (x, mu) in scenario.base.integration_points(&scenario.cocycle)? {
        let kx = pushforward_compiled(&compiled, &scenario.kappa, &x)?;
        let mu = rational_to_f64(&mu);
        fiber_integral += mu * exact_entropy(&kx, &scenario.nu);
        for n in kx.touched_coordinates() {
            let c = mu * rational_to_f64(&kx.mass_through(n)) * scenario.nu.law(n).jeffreys();
            *per_coordinate.entry(n).or_insert(0.0) += c;
        }
    }
    let base_term = 0.0;
    Ok(EntropyBreakdown { base_term, fiber_integral, total: base_term + fiber_integral, per_coordinate })
}

/// The defining integral `-Σ_g κ(g) ∫∫ ln d(μ×ν)∘T_g(α)/d(μ×ν) dμ dν`,
/// evaluated by enumerating the base and every bit assignment on `N_α`.
pub fn product_space_entropy(scenario: &Scenario) -> Result<f64> {
    let compiled = CompiledCocycle::new(&scenario.cocycle, &scenario.base)?;
    let mut acc = 0.0;
    for (x, mu) in scenario.base.integration_points(&scenario.cocycle)? {
        let mu = rational_to_f64(&mu);
        for (g, k) in scenario.kappa.iter_f64() {
            let f = compiled.eval(g, &x)?;
            check_enumerable(f.support().len())?;
            let base_log = scenario.base.log_rn(g, &x);
            for y in assignments(f.support()) {
                let p = y.cylinder_probability(&scenario.nu);
                let log_rn = base_log + log_rn_derivative(&f, &y, &scenario.nu)?;
                acc -= mu * k * p * log_rn;
            }
        }
    }
    Ok(acc)
}

fn check_enumerable(coords: usize) -> Result<()> {
    if coords > ENUMERATION_LIMIT {
        return Err(Error::TooLarge { coords, limit: ENUMERATION_LIMIT });
    }
    Ok(())
}

/// Per-base-point list of `(κ(g), α(T_g x, x))`, plus the base weights.
struct Prepared {
    points: Vec<(f64, Vec<(f64, GroupElement)>)>,
}

impl Prepared {
    fn new(scenario: &Scenario) -> Result<Self> {
        let compiled = CompiledCocycle::new(&scenario.cocycle, &scenario.base)?;
        let points = scenario
            .base
            .integration_points(&scenario.cocycle)?
            .into_iter()
            .map(|(x, mu)| {
                let row = scenario
                    .kappa
                    .iter_f64()
                    .map(|(g, k)| Ok((k, compiled.eval(g, &x)?)))
                    .collect::<Result<Vec<_>>>()?;
                Ok((rational_to_f64(&mu), row))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { points })
    }

    /// Index of the base point drawn for sample `sampler` in full mode.
    fn draw_point(&self, sampler: &mut PointSampler<'_>) -> usize {
        let u = sampler.auxiliary_u64();
        ((u128::from(u) * self.points.len() as u128) >> 64) as usize
    }

    /// `∫ g(row) dμ`, exactly over the base or at one drawn point.
    fn integrate<G>(&self, mode: McMode, sampler: &mut PointSampler<'_>, mut g: G) -> f64
    where
        G: FnMut(&[(f64, GroupElement)], &mut PointSampler<'_>) -> f64,
    {
        match mode {
            McMode::FiberOnly => self.points.iter().map(|(mu, row)| mu * g(row, sampler)).sum(),
            McMode::Full => {
                let i = self.draw_point(sampler);
                g(&self.points[i].1, sampler)
            }
        }
    }
}

/// Monte Carlo estimate of the defining integral of `h_κ(T(α, S), μ × ν)`.
pub fn mc_entropy(scenario: &Scenario, config: &McConfig) -> Result<McEstimate> {
    if config.samples < 2 {
        return Err(Error::Validation("mc-entropy needs at least 2 samples".into()));
    }
    let prepared = Prepared::new(scenario)?;
    let nu = &scenario.nu;
    let summary = run_chunked(config.samples, config.workers, |i| {
        let mut sampler = PointSampler::new(nu, config.seed, i);
        // base RN derivatives vanish: both bases preserve μ
        prepared.integrate(config.mode, &mut sampler, |row, y| -row.iter().map(|(k, f)| k * y.log_rn(f)).sum::<f64>())
    });
    Ok(McEstimate { mean: summary.mean, stderr: summary.stderr, samples: config.samples, seed: config.seed })
}

/// Monte Carlo estimate of `E |Σ_g κ(g) · d(μ×ν)∘T_g(α)/d(μ×ν) - 1|`.
pub fn stationarity_defect(scenario: &Scenario, config: &McConfig) -> Result<McEstimate> {
    if config.samples < 1 {
        return Err(Error::Validation("stationarity needs at least 1 sample".into()));
    }
    let prepared = Prepared::new(scenario)?;
    let nu = &scenario.nu;
    let summary = run_chunked(config.samples, config.workers, |i| {
        let mut sampler = PointSampler::new(nu, config.seed, i);
        prepared.integrate(config.mode, &mut sampler, |row, y| {
            // Σ κ(g)(rn_g - 1) equals Σ κ(g) rn_g - 1 and is exactly 0 when every rn_g is 1
            row.iter().map(|(k, f)| k * y.log_rn(f).exp_m1()).sum::<f64>().abs()
        })
    });
    Ok(McEstimate { mean: summary.mean, stderr: summary.stderr, samples: config.samples, seed: config.seed })
}

/// Exact stationarity defect by enumerating every coordinate the cocycle touches.
pub fn stationarity_defect_exact(scenario: &Scenario) -> Result<f64> {
    let prepared = Prepared::new(scenario)?;
    let mut acc = 0.0;
    for (mu, row) in &prepared.points {
        let mut coords: Vec<u32> = row.iter().flat_map(|(_, f)| f.support().iter().copied()).collect();
        coords.sort_unstable();
        coords.dedup();
        check_enumerable(coords.len())?;
        for y in assignments(&coords) {
            let p = y.cylinder_probability(&scenario.nu);
            let mut s = 0.0;
            for (k, f) in row {
                s += k * log_rn_derivative(f, &y, &scenario.nu)?.exp_m1();
            }
            acc += mu * p * s.abs();
        }
    }
    Ok(acc)
}

/// `κ_x` at every integration point of the base, with its weight.
pub fn pushforwards(scenario: &Scenario) -> Result<Vec<(BasePoint, f64, FiniteMeasure)>> {
    let compiled = CompiledCocycle::new(&scenario.cocycle, &scenario.base)?;
    scenario
        .base
        .integration_points(&scenario.cocycle)?
        .into_iter()
        .map(|(x, mu)| {
            let kx = pushforward_compiled(&compiled, &scenario.kappa, &x)?;
            Ok((x, rational_to_f64(&mu), kx))
        })
        .collect()
}
