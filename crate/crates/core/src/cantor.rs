//! The Cantor group `F = ⊕ Z/2Z`, points of `K = (Z/2Z)^N`, and the product
//! measures `ν = ⊗ν_n` that act as fiber measures.
//!
//! Coordinates are 1-based. A product measure is described by a closed-form
//! parameter family `ε_n` with finitely many explicit overrides, so every
//! computation here touches only finitely many coordinates.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Finite-support element of `F`, stored as its sorted support `N_f`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElement {
    support: Vec<u32>,
}

impl GroupElement {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Builds an element from any list of coordinates. Repeated coordinates
    /// cancel in pairs, since every generator has order two.
    pub fn from_coords<I: IntoIterator<Item = u32>>(coords: I) -> Result<Self> {
        let mut out = Self::identity();
        for n in coords {
            if n == 0 {
                return Err(Error::Validation("coordinate indices start at 1".into()));
            }
            out = out.add(&Self { support: vec![n] });
        }
        Ok(out)
    }

    /// Single-coordinate generator `e_n`.
    pub fn unit(n: u32) -> Self {
        assert!(n >= 1, "coordinate indices start at 1");
        Self { support: vec![n] }
    }

    pub fn support(&self) -> &[u32] {
        &self.support
    }

    pub fn is_identity(&self) -> bool {
        self.support.is_empty()
    }

    pub fn contains(&self, n: u32) -> bool {
        self.support.binary_search(&n).is_ok()
    }

    /// `‖f‖`, the largest flipped coordinate; 0 for the identity.
    pub fn norm(&self) -> u32 {
        self.support.last().copied().unwrap_or(0)
    }

    /// Group operation: symmetric difference of supports.
    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = (&self.support, &other.support);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Self { support: out }
    }
}

/// `‖f‖ := max N_f`, with `‖0‖ = 0`.
pub fn norm(f: &GroupElement) -> u32 {
    f.norm()
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, n) in self.support.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        f.write_str("}")
    }
}

impl FromStr for GroupElement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| Error::Parse(format!("expected a support list like {{1,4}}, got {s:?}")))?;
        let mut coords = Vec::new();
        for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let n: u32 = part.parse().map_err(|_| Error::Parse(format!("bad coordinate {part:?} in {s:?}")))?;
            coords.push(n);
        }
        let mut sorted = coords.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != coords.len() {
            return Err(Error::Parse(format!("repeated coordinate in {s:?}")));
        }
        Self::from_coords(sorted).map_err(|e| Error::Parse(format!("{s:?}: {e}")))
    }
}

/// Closed-form description of the coordinate parameters `ε_n`.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// `ε_n = 0`: the Haar measure.
    Zero,
    /// `ε_n = ε` for every `n`.
    Constant { epsilon: f64 },
    /// `ε_n = c · n^(-a)`.
    Power { c: f64, a: f64 },
    /// `ε_n = epsilons[(n - 1) mod k]`.
    Periodic { epsilons: Vec<f64> },
}

impl Family {
    pub fn epsilon(&self, n: u32) -> f64 {
        match self {
            Family::Zero => 0.0,
            Family::Constant { epsilon } => *epsilon,
            Family::Power { c, a } => {
                if *c == 0.0 {
                    0.0
                } else {
                    c * f64::from(n).powf(-a)
                }
            }
            Family::Periodic { epsilons } => epsilons[(n as usize - 1) % epsilons.len()],
        }
    }
}

/// Marker for `ν^θ`: coordinate `n0` is replaced by `θ ν_{n0} + (1-θ) δ_1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Deformation {
    pub n0: u32,
    pub theta: f64,
}

/// Effective law of one coordinate of `ν`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoordinateLaw {
    pub p0: f64,
    pub p1: f64,
    /// `ln(p1 / p0)`; equals `ε_n` exactly for untouched coordinates.
    pub log_odds: f64,
}

impl CoordinateLaw {
    fn from_epsilon(eps: f64) -> Self {
        // logistic split, evaluated on the side that does not overflow
        let (p0, p1) = if eps >= 0.0 {
            let e = (-eps).exp();
            (e / (1.0 + e), 1.0 / (1.0 + e))
        } else {
            let e = eps.exp();
            (1.0 / (1.0 + e), e / (1.0 + e))
        };
        Self { p0, p1, log_odds: eps }
    }

    fn from_pair(p0: f64, p1: f64) -> Self {
        Self { p0, p1, log_odds: p1.ln() - p0.ln() }
    }

    fn deformed(self, theta: f64) -> Self {
        let p0 = theta * self.p0;
        Self { p0, p1: 1.0 - p0, log_odds: (-p0).ln_1p() - p0.ln() }
    }

    /// `(ν(1) - ν(0)) · ln(ν(1)/ν(0))`, the per-coordinate entropy weight.
    pub fn jeffreys(&self) -> f64 {
        (self.p1 - self.p0) * self.log_odds
    }

    pub fn prob(&self, bit: u8) -> f64 {
        if bit == 0 {
            self.p0
        } else {
            self.p1
        }
    }
}

/// The product measure `ν = ⊗ν_n` on `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductMeasureSpec {
    family: Family,
    overrides: BTreeMap<u32, (f64, f64)>,
    deformation: Option<Deformation>,
}

impl ProductMeasureSpec {
    pub fn new(family: Family) -> Result<Self> {
        match &family {
            Family::Constant { epsilon } if !epsilon.is_finite() => {
                return Err(Error::Validation(format!("epsilon must be finite, got {epsilon}")))
            }
            Family::Power { c, a } if !c.is_finite() || !a.is_finite() => {
                return Err(Error::Validation(format!("power family needs finite c, a; got c={c}, a={a}")))
            }
            Family::Periodic { epsilons } if epsilons.is_empty() || epsilons.iter().any(|e| !e.is_finite()) => {
                return Err(Error::Validation("periodic family needs a non-empty list of finite epsilons".into()))
            }
            _ => {}
        }
        Ok(Self { family, overrides: BTreeMap::new(), deformation: None })
    }

    pub fn zero() -> Self {
        Self { family: Family::Zero, overrides: BTreeMap::new(), deformation: None }
    }

    pub fn constant(epsilon: f64) -> Self {
        Self::new(Family::Constant { epsilon }).expect("finite epsilon")
    }

    pub fn power(c: f64, a: f64) -> Self {
        Self::new(Family::Power { c, a }).expect("finite power parameters")
    }

    /// Replaces coordinate `n` by the explicit law `(p0, p1)`.
    pub fn with_override(mut self, n: u32, p0: f64, p1: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Validation("override coordinate must be >= 1".into()));
        }
        if !(p0 > 0.0 && p1 > 0.0) || (p0 + p1 - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "override at {n} must be a strictly positive probability pair, got ({p0}, {p1})"
            )));
        }
        self.overrides.insert(n, (p0, p1));
        Ok(self)
    }

    /// Applies `ν^θ` at `n0`. Deforming twice at the same coordinate
    /// multiplies the weights; deforming a different coordinate first freezes
    /// the previous deformation into an override.
    pub fn deformed(&self, n0: u32, theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::InvalidTheta(theta));
        }
        if n0 == 0 {
            return Err(Error::Validation("deformation coordinate must be >= 1".into()));
        }
        let mut out = self.clone();
        match self.deformation {
            Some(d) if d.n0 == n0 => out.deformation = Some(Deformation { n0, theta: d.theta * theta }),
            Some(d) => {
                let law = self.law(d.n0);
                out.overrides.insert(d.n0, (law.p0, law.p1));
                out.deformation = Some(Deformation { n0, theta });
            }
            None => out.deformation = Some(Deformation { n0, theta }),
        }
        Ok(out)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn overrides(&self) -> &BTreeMap<u32, (f64, f64)> {
        &self.overrides
    }

    pub fn deformation(&self) -> Option<Deformation> {
        self.deformation
    }

    /// Same measure without the deformation marker.
    pub fn undeformed(&self) -> Self {
        Self { deformation: None, ..self.clone() }
    }

    /// Effective law of coordinate `n` after overrides and deformation.
    pub fn law(&self, n: u32) -> CoordinateLaw {
        debug_assert!(n >= 1);
        let base = match self.overrides.get(&n) {
            Some(&(p0, p1)) => CoordinateLaw::from_pair(p0, p1),
            None => CoordinateLaw::from_epsilon(self.family.epsilon(n)),
        };
        match self.deformation {
            Some(d) if d.n0 == n && d.theta != 1.0 => base.deformed(d.theta),
            _ => base,
        }
    }
}

/// `(ν_n(0), ν_n(1))` after overrides and deformation.
pub fn coordinate_distribution(spec: &ProductMeasureSpec, n: u32) -> (f64, f64) {
    let law = spec.law(n);
    (law.p0, law.p1)
}

/// `Φ(t) = (1 - 2t) ln((1 - t)/t)` on `(0, 1)`.
pub fn phi(t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::OutOfDomain { what: "phi argument", value: t });
    }
    // Evaluate on the lower half so that phi(t) == phi(1 - t) bit for bit.
    let s = if t > 0.5 { 1.0 - t } else { t };
    let d = 1.0 - 2.0 * s;
    Ok(d * (d / s).ln_1p())
}

/// Entropy weight of the two-point law with parameter `ε`: `ε · tanh(ε/2)`.
pub fn jeffreys_weight(eps: f64) -> f64 {
    eps * (0.5 * eps).tanh()
}

/// Finitely many revealed coordinates of a point `y ∈ K`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PointPrefix {
    coords: BTreeMap<u32, u8>,
}

impl PointPrefix {
    pub fn new() -> Self {
        Self::default()
    }

    /// Prefix with coordinates `1..=bits.len()` set from `bits`.
    pub fn from_bits(bits: &[u8]) -> Self {
        let coords = bits.iter().enumerate().map(|(i, &b)| (i as u32 + 1, b & 1)).collect();
        Self { coords }
    }

    pub fn get(&self, n: u32) -> Option<u8> {
        self.coords.get(&n).copied()
    }

    pub fn set(&mut self, n: u32, bit: u8) {
        self.coords.insert(n, bit & 1);
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u8)> + '_ {
        self.coords.iter().map(|(&n, &b)| (n, b))
    }

    fn bit(&self, n: u32) -> Result<u8> {
        self.get(n).ok_or(Error::Unrevealed(n))
    }

    /// `S_f y`: flips the coordinates in `N_f`.
    pub fn translated(&self, f: &GroupElement) -> Result<Self> {
        let mut out = self.clone();
        for &n in f.support() {
            out.set(n, self.bit(n)? ^ 1);
        }
        Ok(out)
    }

    /// `ν`-probability of the cylinder fixed by the revealed coordinates.
    pub fn cylinder_probability(&self, spec: &ProductMeasureSpec) -> f64 {
        self.iter().map(|(n, b)| spec.law(n).prob(b)).product()
    }
}

/// Every bit assignment on `coords`, in lexicographic order.
pub fn assignments(coords: &[u32]) -> impl Iterator<Item = PointPrefix> + '_ {
    assert!(coords.len() < 64, "too many coordinates to enumerate");
    (0u64..1 << coords.len()).map(move |mask| {
        let mut p = PointPrefix::new();
        for (i, &n) in coords.iter().enumerate() {
            p.set(n, ((mask >> i) & 1) as u8);
        }
        p
    })
}

/// Signed per-coordinate terms of `ln dν∘S_f/dν (y)`: `+1` when `y_n = 0`
/// (the factor is `ν_n(1)/ν_n(0)`), `-1` when `y_n = 1`.
pub fn rn_terms(f: &GroupElement, y: &PointPrefix) -> Result<Vec<(u32, i8)>> {
    f.support().iter().map(|&n| Ok((n, if y.bit(n)? == 0 { 1 } else { -1 }))).collect()
}

/// `ln dν∘S_f/dν (y) = Σ_{n ∈ N_f} ln ν_n(y_n ⊕ 1)/ν_n(y_n)`.
pub fn log_rn_derivative(f: &GroupElement, y: &PointPrefix, spec: &ProductMeasureSpec) -> Result<f64> {
    let mut acc = 0.0;
    for &n in f.support() {
        let l = spec.law(n).log_odds;
        acc += if y.bit(n)? == 0 { l } else { -l };
    }
    Ok(acc)
}

pub fn rn_derivative(f: &GroupElement, y: &PointPrefix, spec: &ProductMeasureSpec) -> Result<f64> {
    log_rn_derivative(f, y, spec).map(f64::exp)
}

const F64_UNIT: f64 = 1.0 / (1u64 << 53) as f64;

/// Lazily sampled point `y ~ ν`.
///
/// Coordinate `n` is drawn from a fixed position of a ChaCha stream selected
/// by `(seed, stream)`, so the value of a coordinate does not depend on the
/// order in which coordinates are revealed.
pub struct PointSampler<'a> {
    spec: &'a ProductMeasureSpec,
    rng: ChaCha8Rng,
    prefix: PointPrefix,
}

impl<'a> PointSampler<'a> {
    pub fn new(spec: &'a ProductMeasureSpec, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { spec, rng, prefix: PointPrefix::new() }
    }

    pub fn reveal(&mut self, n: u32) -> u8 {
        if let Some(b) = self.prefix.get(n) {
            return b;
        }
        let pos = 2 * u128::from(n);
        if self.rng.get_word_pos() != pos {
            self.rng.set_word_pos(pos);
        }
        let u = (self.rng.next_u64() >> 11) as f64 * F64_UNIT;
        let bit = u8::from(u >= self.spec.law(n).p0);
        self.prefix.set(n, bit);
        bit
    }

    /// A uniform draw from the stream position reserved for auxiliary use
    /// (coordinate indices start at 1, so position 0 is never a coordinate).
    pub fn auxiliary_u64(&mut self) -> u64 {
        self.rng.set_word_pos(0);
        self.rng.next_u64()
    }

    pub fn reveal_support(&mut self, f: &GroupElement) {
        for &n in f.support() {
            self.reveal(n);
        }
    }

    /// `ln dν∘S_f/dν` at the sampled point, revealing `N_f` first.
    pub fn log_rn(&mut self, f: &GroupElement) -> f64 {
        self.reveal_support(f);
        log_rn_derivative(f, &self.prefix, self.spec).expect("support revealed")
    }

    pub fn prefix(&self) -> &PointPrefix {
        &self.prefix
    }

    pub fn into_prefix(self) -> PointPrefix {
        self.prefix
    }
}

/// Samples coordinates `1..=depth` of `y ~ ν`; deterministic in `(seed, depth)`.
pub fn sample_prefix(spec: &ProductMeasureSpec, depth: u32, seed: u64) -> PointPrefix {
    let mut sampler = PointSampler::new(spec, seed, 0);
    for n in 1..=depth {
        sampler.reveal(n);
    }
    sampler.into_prefix()
}
