//! Acting groups, measures `κ`, measure-preserving base systems and cocycles
//! `α` with values in `F`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::cantor::{GroupElement, PointPrefix};
use crate::error::{Error, Result};

/// The two computable acting groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupSpec {
    /// `Z`, acting on a finite cycle by rotation.
    Integers,
    /// `F = ⊕ Z/2Z`, acting on `K` by translation.
    DirectSumZ2,
}

/// Element of one of the acting groups.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    Int(i64),
    Cantor(GroupElement),
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Int(k) if *k > 0 => write!(f, "+{k}"),
            Element::Int(k) => write!(f, "{k}"),
            Element::Cantor(g) => write!(f, "{g}"),
        }
    }
}

impl GroupSpec {
    pub fn identity(&self) -> Element {
        match self {
            GroupSpec::Integers => Element::Int(0),
            GroupSpec::DirectSumZ2 => Element::Cantor(GroupElement::identity()),
        }
    }

    pub fn contains(&self, g: &Element) -> bool {
        matches!((self, g), (GroupSpec::Integers, Element::Int(_)) | (GroupSpec::DirectSumZ2, Element::Cantor(_)))
    }

    pub fn op(&self, a: &Element, b: &Element) -> Element {
        match (a, b) {
            (Element::Int(x), Element::Int(y)) => Element::Int(x + y),
            (Element::Cantor(x), Element::Cantor(y)) => Element::Cantor(x.add(y)),
            _ => panic!("mixed group elements {a} and {b}"),
        }
    }

    pub fn inverse(&self, a: &Element) -> Element {
        match a {
            Element::Int(x) => Element::Int(-x),
            Element::Cantor(x) => Element::Cantor(x.clone()),
        }
    }

    /// Parses `+3`, `-2`, `0` for the integers and `{1,4}` for `F`.
    pub fn parse_element(&self, s: &str) -> Result<Element> {
        match self {
            GroupSpec::Integers => s
                .trim()
                .trim_start_matches('+')
                .parse::<i64>()
                .map(Element::Int)
                .map_err(|_| Error::Parse(format!("expected an integer group element, got {s:?}"))),
            GroupSpec::DirectSumZ2 => s.parse().map(Element::Cantor),
        }
    }
}

/// Parses an exact weight written as `p/q` or as a decimal (`0.25`, `1e-3`).
pub fn parse_weight(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad weight {s:?}; expected p/q or a decimal"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all: BigInt = format!("0{int_part}{frac_part}").parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(all);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -r } else { r })
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Tolerance on the total mass of a measure, for weights that started as floats.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Finitely supported probability `κ` on an acting group, stored in its
/// enumeration order `g_1, g_2, …`.
#[derive(Clone, Debug, PartialEq)]
pub struct KappaMeasure {
    atoms: Vec<(Element, BigRational)>,
    float: Vec<f64>,
}

impl KappaMeasure {
    pub fn new(atoms: Vec<(Element, BigRational)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Validation("kappa has no atoms".into()));
        }
        let mut seen = HashSet::new();
        let mut total = BigRational::zero();
        for (g, w) in &atoms {
            if !w.is_positive() {
                return Err(Error::Validation(format!("kappa weight of {g} must be positive")));
            }
            if !seen.insert(g.clone()) {
                return Err(Error::Validation(format!("kappa atom {g} listed twice")));
            }
            total += w;
        }
        let excess = rational_to_f64(&(total - BigRational::one()).abs());
        if excess > MASS_TOLERANCE {
            return Err(Error::Validation(format!("kappa mass ≠ 1 (total differs from 1 by {excess:e})")));
        }
        let float = atoms.iter().map(|(_, w)| rational_to_f64(w)).collect();
        Ok(Self { atoms, float })
    }

    /// Convenience constructor from float weights; each float is taken at
    /// its exact binary value.
    pub fn from_f64(atoms: Vec<(Element, f64)>) -> Result<Self> {
        let atoms = atoms
            .into_iter()
            .map(|(g, w)| {
                BigRational::from_float(w)
                    .map(|r| (g, r))
                    .ok_or_else(|| Error::Validation(format!("non-finite kappa weight {w}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(atoms)
    }

    pub fn point_mass(g: Element) -> Self {
        Self::new(vec![(g, BigRational::one())]).expect("unit mass")
    }

    /// Reorders the atoms to follow `enumeration`, which must list each atom once.
    pub fn reordered(&self, enumeration: &[Element]) -> Result<Self> {
        if enumeration.len() != self.atoms.len() {
            return Err(Error::Validation(format!(
                "kappa enumeration lists {} elements but kappa has {} atoms",
                enumeration.len(),
                self.atoms.len()
            )));
        }
        let lookup: BTreeMap<_, _> = self.atoms.iter().cloned().collect();
        let atoms = enumeration
            .iter()
            .map(|g| {
                lookup
                    .get(g)
                    .map(|w| (g.clone(), w.clone()))
                    .ok_or_else(|| Error::Validation(format!("kappa enumeration names {g}, which is not an atom")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(atoms)
    }

    pub fn atoms(&self) -> &[(Element, BigRational)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Atoms with float weights, in enumeration order.
    pub fn iter_f64(&self) -> impl Iterator<Item = (&Element, f64)> + '_ {
        self.atoms.iter().zip(&self.float).map(|((g, _), &w)| (g, w))
    }

    pub fn weights_f64(&self) -> &[f64] {
        &self.float
    }

    pub fn group(&self) -> GroupSpec {
        match self.atoms[0].0 {
            Element::Int(_) => GroupSpec::Integers,
            Element::Cantor(_) => GroupSpec::DirectSumZ2,
        }
    }
}

/// Finitely supported (sub-)probability on `F`, with exact masses.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FiniteMeasure {
    atoms: BTreeMap<GroupElement, BigRational>,
}

impl FiniteMeasure {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn point_mass(f: GroupElement) -> Self {
        let mut m = Self::new();
        m.add_mass(f, BigRational::one());
        m
    }

    /// Builds a measure from float masses taken at their exact binary values.
    pub fn from_f64<I: IntoIterator<Item = (GroupElement, f64)>>(atoms: I) -> Self {
        let mut m = Self::new();
        for (f, w) in atoms {
            m.add_mass(f, BigRational::from_float(w).expect("finite mass"));
        }
        m
    }

    pub fn add_mass(&mut self, f: GroupElement, w: BigRational) {
        if w.is_zero() {
            return;
        }
        let slot = self.atoms.entry(f).or_insert_with(BigRational::zero);
        *slot += w;
    }

    /// Adds `scale · other`.
    pub fn add_scaled(&mut self, other: &FiniteMeasure, scale: &BigRational) {
        for (f, w) in &other.atoms {
            self.add_mass(f.clone(), w * scale);
        }
    }

    pub fn mass(&self, f: &GroupElement) -> BigRational {
        self.atoms.get(f).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn total_mass(&self) -> BigRational {
        self.atoms.values().fold(BigRational::zero(), |acc, w| acc + w)
    }

    /// `ξ({f : n ∈ N_f})`.
    pub fn mass_through(&self, n: u32) -> BigRational {
        self.atoms.iter().filter(|(f, _)| f.contains(n)).fold(BigRational::zero(), |acc, (_, w)| acc + w)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GroupElement, &BigRational)> + '_ {
        self.atoms.iter()
    }

    pub fn iter_f64(&self) -> impl Iterator<Item = (&GroupElement, f64)> + '_ {
        self.atoms.iter().map(|(f, w)| (f, rational_to_f64(w)))
    }

    /// Union of the supports `N_f` over the atoms, sorted.
    pub fn touched_coordinates(&self) -> Vec<u32> {
        let set: BTreeSet<u32> = self.atoms.keys().flat_map(|f| f.support().iter().copied()).collect();
        set.into_iter().collect()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// Measure-preserving base system `(X, μ, T)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseSystem {
    /// `Z` rotating `{0, …, m-1}` with uniform measure.
    FiniteCycle { m: u32 },
    /// `F` translating `K` with Haar measure.
    HaarOdometer,
}

/// Point of a base system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BasePoint {
    Cycle(u32),
    Odometer(PointPrefix),
}

impl BaseSystem {
    pub fn group(&self) -> GroupSpec {
        match self {
            BaseSystem::FiniteCycle { .. } => GroupSpec::Integers,
            BaseSystem::HaarOdometer => GroupSpec::DirectSumZ2,
        }
    }

    /// `T_g x`.
    pub fn act(&self, g: &Element, x: &BasePoint) -> Result<BasePoint> {
        match (self, g, x) {
            (BaseSystem::FiniteCycle { m }, Element::Int(k), BasePoint::Cycle(i)) => {
                let m = i64::from(*m);
                Ok(BasePoint::Cycle((i64::from(*i) + k).rem_euclid(m) as u32))
            }
            (BaseSystem::HaarOdometer, Element::Cantor(f), BasePoint::Odometer(p)) => {
                Ok(BasePoint::Odometer(p.translated(f)?))
            }
            _ => Err(Error::Validation(format!("element {g} or point {x:?} does not belong to {self:?}"))),
        }
    }

    /// `ln dμ∘T_g/dμ`, identically zero since both bases preserve `μ`.
    pub fn log_rn(&self, _g: &Element, _x: &BasePoint) -> f64 {
        0.0
    }

    /// Points and weights that integrate `x ↦ F(κ_x)` exactly for the given cocycle.
    ///
    /// The Haar odometer only carries constant cocycles, for which `κ_x` does
    /// not depend on `x`; one representative point with full mass suffices.
    pub fn integration_points(&self, cocycle: &CocycleSpec) -> Result<Vec<(BasePoint, BigRational)>> {
        match self {
            BaseSystem::FiniteCycle { m } => {
                let w = BigRational::new(BigInt::one(), BigInt::from(*m));
                Ok((0..*m).map(|i| (BasePoint::Cycle(i), w.clone())).collect())
            }
            BaseSystem::HaarOdometer if cocycle.is_constant() => {
                Ok(vec![(BasePoint::Odometer(PointPrefix::new()), BigRational::one())])
            }
            BaseSystem::HaarOdometer => Err(Error::Validation("cocycle/base mismatch".into())),
        }
    }
}

/// Restriction to coordinates `M_1 < M_2 < …` followed by `M_n ↦ n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projection(Vec<u32>);

impl Projection {
    pub fn new(coords: Vec<u32>) -> Result<Self> {
        if coords.first() == Some(&0) || coords.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation("projection coordinates must be positive and strictly increasing".into()));
        }
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[u32] {
        &self.0
    }

    pub fn apply(&self, f: &GroupElement) -> GroupElement {
        let kept = f.support().iter().filter_map(|n| self.0.binary_search(n).ok().map(|i| i as u32 + 1));
        GroupElement::from_coords(kept).expect("relabelled coordinates are positive")
    }

    /// `outer ∘ self`.
    pub fn then(&self, outer: &Projection) -> Projection {
        let coords = outer.0.iter().filter_map(|&j| self.0.get(j as usize - 1).copied()).collect();
        Projection(coords)
    }
}

/// A cocycle `α` into `F` over a base system.
#[derive(Clone, Debug, PartialEq)]
pub enum CocycleSpec {
    /// `β(S_f y, y) = f` on the Haar odometer, optionally followed by a projection.
    Canonical { projection: Option<Projection> },
    /// A homomorphism `G → F` given on generators, independent of the base point.
    ConstantPerGenerator { table: Vec<(Element, GroupElement)> },
    /// On `FiniteCycle(m)`: `α(R x, x) = values[x]` for the unit rotation `R`.
    GeneratorTable { values: Vec<GroupElement> },
}

impl CocycleSpec {
    pub fn canonical() -> Self {
        CocycleSpec::Canonical { projection: None }
    }

    pub fn is_constant(&self) -> bool {
        !matches!(self, CocycleSpec::GeneratorTable { .. })
    }

    /// Checks that the cocycle is defined over `base` and, for tables of
    /// generator values, that they extend to a homomorphism.
    pub fn validate(&self, base: &BaseSystem) -> Result<()> {
        match (self, base) {
            (CocycleSpec::Canonical { .. }, BaseSystem::HaarOdometer) => Ok(()),
            (CocycleSpec::GeneratorTable { values }, BaseSystem::FiniteCycle { m }) => {
                if values.len() != *m as usize {
                    return Err(Error::Validation(format!(
                        "generator table has {} entries but the cycle has {m} points",
                        values.len()
                    )));
                }
                Ok(())
            }
            (CocycleSpec::ConstantPerGenerator { table }, base) => {
                if let Some((g, _)) = table.iter().find(|(g, _)| !base.group().contains(g)) {
                    return Err(Error::Validation(format!("cocycle generator {g} is not in the base group")));
                }
                Homomorphism::compile(base.group(), table).map(|_| ())
            }
            _ => Err(Error::Validation("cocycle/base mismatch".into())),
        }
    }
}

/// A constant cocycle reduced to a normal form that evaluates any reachable element.
#[derive(Clone, Debug)]
enum Homomorphism {
    /// Generators span `dZ`; `φ(d m) = (m mod 2) · v`.
    Integers { d: i64, v: GroupElement },
    /// GF(2) echelon basis keyed by pivot coordinate, carrying label sums.
    Cantor { basis: BTreeMap<u32, (GroupElement, GroupElement)> },
}

impl Homomorphism {
    fn compile(group: GroupSpec, table: &[(Element, GroupElement)]) -> Result<Self> {
        let mismatch = |g: &Element| {
            Error::Validation(format!("constant cocycle table is not a homomorphism (conflict at generator {g})"))
        };
        match group {
            GroupSpec::Integers => {
                let ints: Vec<(i64, &GroupElement)> = table
                    .iter()
                    .map(|(g, f)| match g {
                        Element::Int(k) => Ok((*k, f)),
                        _ => Err(Error::Validation(format!("generator {g} is not an integer"))),
                    })
                    .collect::<Result<_>>()?;
                let d = ints.iter().fold(0i64, |acc, (k, _)| acc.gcd(k));
                let v = if d == 0 {
                    GroupElement::identity()
                } else {
                    ints.iter().find(|(k, _)| (k / d).rem_euclid(2) == 1).map(|(_, f)| (*f).clone()).unwrap_or_default()
                };
                for (k, f) in &ints {
                    let expect =
                        if d != 0 && (k / d).rem_euclid(2) == 1 { v.clone() } else { GroupElement::identity() };
                    if **f != expect {
                        return Err(mismatch(&Element::Int(*k)));
                    }
                }
                Ok(Homomorphism::Integers { d, v })
            }
            GroupSpec::DirectSumZ2 => {
                let mut basis: BTreeMap<u32, (GroupElement, GroupElement)> = BTreeMap::new();
                for (g, label) in table {
                    let Element::Cantor(h) = g else {
                        return Err(Error::Validation(format!("generator {g} is not in F")));
                    };
                    let (rest, acc) = reduce(&basis, h.clone(), label.clone());
                    if rest.is_identity() {
                        if !acc.is_identity() {
                            return Err(mismatch(g));
                        }
                    } else {
                        basis.insert(rest.norm(), (rest, acc));
                    }
                }
                Ok(Homomorphism::Cantor { basis })
            }
        }
    }

    fn eval(&self, g: &Element) -> Result<GroupElement> {
        match (self, g) {
            (Homomorphism::Integers { d, v }, Element::Int(k)) => {
                if *d == 0 {
                    return if *k == 0 {
                        Ok(GroupElement::identity())
                    } else {
                        Err(Error::UnreachableElement(g.to_string()))
                    };
                }
                if k % d != 0 {
                    return Err(Error::UnreachableElement(g.to_string()));
                }
                Ok(if (k / d).rem_euclid(2) == 1 { v.clone() } else { GroupElement::identity() })
            }
            (Homomorphism::Cantor { basis }, Element::Cantor(h)) => {
                let (rest, acc) = reduce(basis, h.clone(), GroupElement::identity());
                if rest.is_identity() {
                    // reduce() adds basis labels to acc, which is exactly φ(h)
                    Ok(acc)
                } else {
                    Err(Error::UnreachableElement(g.to_string()))
                }
            }
            _ => Err(Error::UnreachableElement(g.to_string())),
        }
    }
}

/// Eliminates `h` against the echelon basis; returns the residual and the
/// label accumulated along the way (starting from `label`).
pub(crate) fn reduce(
    basis: &BTreeMap<u32, (GroupElement, GroupElement)>,
    mut h: GroupElement,
    mut label: GroupElement,
) -> (GroupElement, GroupElement) {
    while let Some((b, l)) = basis.get(&h.norm()).filter(|_| !h.is_identity()) {
        h = h.add(b);
        label = label.add(l);
    }
    (h, label)
}

/// A cocycle prepared for repeated evaluation.
#[derive(Clone, Debug)]
pub struct CompiledCocycle {
    kind: Compiled,
    base: BaseSystem,
}

#[derive(Clone, Debug)]
enum Compiled {
    Canonical(Option<Projection>),
    Constant(Homomorphism),
    Table(Vec<GroupElement>, GroupElement),
}

impl CompiledCocycle {
    pub fn new(c: &CocycleSpec, base: &BaseSystem) -> Result<Self> {
        c.validate(base)?;
        let kind = match c {
            CocycleSpec::Canonical { projection } => Compiled::Canonical(projection.clone()),
            CocycleSpec::ConstantPerGenerator { table } => {
                Compiled::Constant(Homomorphism::compile(base.group(), table)?)
            }
            CocycleSpec::GeneratorTable { values } => {
                let full = values.iter().fold(GroupElement::identity(), |acc, w| acc.add(w));
                Compiled::Table(values.clone(), full)
            }
        };
        Ok(Self { kind, base: *base })
    }

    /// `α(T_g x, x)`.
    pub fn eval(&self, g: &Element, x: &BasePoint) -> Result<GroupElement> {
        match &self.kind {
            Compiled::Canonical(projection) => match g {
                Element::Cantor(f) => Ok(projection.as_ref().map_or_else(|| f.clone(), |p| p.apply(f))),
                _ => Err(Error::UnreachableElement(g.to_string())),
            },
            Compiled::Constant(h) => h.eval(g),
            Compiled::Table(values, full) => {
                let (Element::Int(k), BasePoint::Cycle(x)) = (g, x) else {
                    return Err(Error::UnreachableElement(g.to_string()));
                };
                let m = values.len() as i64;
                let steps = k.unsigned_abs();
                let (laps, rest) = (steps / m as u64, (steps % m as u64) as i64);
                let mut acc = if laps % 2 == 1 { full.clone() } else { GroupElement::identity() };
                let x = i64::from(*x);
                for i in 0..rest {
                    // forward: w(x), w(x+1), …; backward: w(x-1), w(x-2), …
                    let idx = if *k >= 0 { x + i } else { x - 1 - i };
                    acc = acc.add(&values[idx.rem_euclid(m) as usize]);
                }
                Ok(acc)
            }
        }
    }

    pub fn base(&self) -> &BaseSystem {
        &self.base
    }
}

/// `α(T_g x, x)` for the cocycle `c` over `base`.
pub fn evaluate_cocycle(c: &CocycleSpec, base: &BaseSystem, g: &Element, x: &BasePoint) -> Result<GroupElement> {
    CompiledCocycle::new(c, base)?.eval(g, x)
}

/// `κ_x`: the image of `κ` under `g ↦ α(T_g x, x)`.
pub fn pushforward_kappa(
    c: &CocycleSpec,
    base: &BaseSystem,
    kappa: &KappaMeasure,
    x: &BasePoint,
) -> Result<FiniteMeasure> {
    pushforward_compiled(&CompiledCocycle::new(c, base)?, kappa, x)
}

pub(crate) fn pushforward_compiled(c: &CompiledCocycle, kappa: &KappaMeasure, x: &BasePoint) -> Result<FiniteMeasure> {
    let mut out = FiniteMeasure::new();
    for (g, w) in kappa.atoms() {
        out.add_mass(c.eval(g, x)?, w.clone());
    }
    Ok(out)
}

/// `∫ κ_x dμ(x)`, exactly.
pub fn averaged_pushforward(c: &CocycleSpec, base: &BaseSystem, kappa: &KappaMeasure) -> Result<FiniteMeasure> {
    let compiled = CompiledCocycle::new(c, base)?;
    let mut out = FiniteMeasure::new();
    for (x, mu) in base.integration_points(c)? {
        out.add_scaled(&pushforward_compiled(&compiled, kappa, &x)?, &mu);
    }
    Ok(out)
}

/// Quotient cocycle `α + N`, with `N = {f : f(M_n) = 0 ∀n}`, written in the
/// relabelled coordinates.
pub fn project_cocycle(c: &CocycleSpec, coords: &Projection) -> CocycleSpec {
    match c {
        CocycleSpec::Canonical { projection } => CocycleSpec::Canonical {
            projection: Some(match projection {
                Some(p) => p.then(coords),
                None => coords.clone(),
            }),
        },
        CocycleSpec::ConstantPerGenerator { table } => CocycleSpec::ConstantPerGenerator {
            table: table.iter().map(|(g, f)| (g.clone(), coords.apply(f))).collect(),
        },
        CocycleSpec::GeneratorTable { values } => {
            CocycleSpec::GeneratorTable { values: values.iter().map(|f| coords.apply(f)).collect() }
        }
    }
}

/// One row of the check `∫ ‖α(T_{g_n} x, x)‖ dμ(x) ≤ l_n + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct BudgetCheck {
    /// 1-based position of the atom in the enumeration.
    pub n: usize,
    pub integral: BigRational,
    pub bound: u64,
    pub within: bool,
}

/// Exact norm integrals for each atom of `κ`, compared with `l_n + 1`.
pub fn norm_budget_report(
    c: &CocycleSpec,
    base: &BaseSystem,
    kappa: &KappaMeasure,
    l: &[u64],
) -> Result<Vec<BudgetCheck>> {
    if l.len() < kappa.len() {
        return Err(Error::Validation(format!(
            "budget sequence has {} terms but kappa has {} atoms",
            l.len(),
            kappa.len()
        )));
    }
    let compiled = CompiledCocycle::new(c, base)?;
    let points = base.integration_points(c)?;
    kappa
        .atoms()
        .iter()
        .enumerate()
        .map(|(i, (g, _))| {
            let mut integral = BigRational::zero();
            for (x, mu) in &points {
                let norm = compiled.eval(g, x)?.norm();
                integral += mu * BigRational::from_integer(BigInt::from(norm));
            }
            let bound = l[i] + 1;
            let within = integral <= BigRational::from_integer(BigInt::from(bound));
            Ok(BudgetCheck { n: i + 1, integral, bound, within })
        })
        .collect()
}

/// Outcome of the bounded semigroup-closure search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GenerationVerdict {
    /// The closure contains the inverse of every generator, so the semigroup
    /// generated by `supp κ` is the subgroup it generates.
    GeneratesDeclaredSubgroup {
        depth: u32,
    },
    FailsWithinDepth {
        depth: u32,
        closure_size: usize,
    },
}

const CLOSURE_LIMIT: usize = 1 << 20;

/// Breadth-first semigroup closure of `supp κ` up to word length `depth`.
pub fn check_generating(group: GroupSpec, kappa: &KappaMeasure, depth: u32) -> GenerationVerdict {
    let gens: Vec<Element> = kappa.atoms().iter().map(|(g, _)| g.clone()).collect();
    let inverses: Vec<Element> = gens.iter().map(|g| group.inverse(g)).collect();
    let mut closure: HashSet<Element> = HashSet::new();
    let mut frontier: Vec<Element> = Vec::new();
    for g in &gens {
        if closure.insert(g.clone()) {
            frontier.push(g.clone());
        }
    }
    let mut level = 1;
    loop {
        if inverses.iter().all(|g| closure.contains(g)) {
            return GenerationVerdict::GeneratesDeclaredSubgroup { depth: level };
        }
        if level >= depth || frontier.is_empty() || closure.len() > CLOSURE_LIMIT {
            return GenerationVerdict::FailsWithinDepth { depth: level, closure_size: closure.len() };
        }
        let mut next = Vec::new();
        for w in &frontier {
            for g in &gens {
                let p = group.op(w, g);
                if closure.insert(p.clone()) {
                    next.push(p);
                }
            }
        }
        frontier = next;
        level += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(s: &str) -> GroupElement {
        s.parse().unwrap()
    }

    fn q(s: &str) -> BigRational {
        parse_weight(s).unwrap()
    }

    fn cycle2() -> (BaseSystem, CocycleSpec) {
        (BaseSystem::FiniteCycle { m: 2 }, CocycleSpec::GeneratorTable { values: vec![el("{1}"), el("{2}")] })
    }

    #[test]
    fn weights_parse_exactly() {
        assert_eq!(q("1/3") * BigRational::from_integer(3.into()), BigRational::one());
        assert_eq!(q("0.7") + q("0.3"), BigRational::one());
        assert_eq!(q("25e-2"), q("1/4"));
        assert_eq!(q("-.5"), q("-1/2"));
        assert!(parse_weight("1/0").is_err());
        assert!(parse_weight("abc").is_err());
        assert!(parse_weight(".").is_err());
    }

    #[test]
    fn kappa_validation() {
        let atoms = |ws: &[&str]| ws.iter().enumerate().map(|(i, w)| (Element::Int(i as i64 + 1), q(w))).collect();
        assert!(KappaMeasure::new(atoms(&["1/3", "1/3", "1/3"])).is_ok());
        let err = KappaMeasure::new(atoms(&["0.5", "0.4"])).unwrap_err();
        assert!(err.to_string().contains("kappa mass ≠ 1"));
        assert!(KappaMeasure::new(atoms(&["1", "0"])).is_err());
        assert!(KappaMeasure::from_f64(vec![(Element::Int(1), 0.7), (Element::Int(2), 0.3)]).is_ok());
        let dup = vec![(Element::Int(1), q("1/2")), (Element::Int(1), q("1/2"))];
        assert!(KappaMeasure::new(dup).is_err());
    }

    #[test]
    fn cocycle_examples() {
        let x0 = BasePoint::Cycle(0);
        let (base, c) = cycle2();
        assert!(evaluate_cocycle(&c, &base, &Element::Int(0), &x0).unwrap().is_identity());
        assert_eq!(evaluate_cocycle(&c, &base, &Element::Int(2), &x0).unwrap(), el("{1,2}"));
        assert_eq!(evaluate_cocycle(&c, &base, &Element::Int(-1), &x0).unwrap(), el("{2}"));
        let haar = BaseSystem::HaarOdometer;
        let f = el("{2,5}");
        for y in [PointPrefix::new(), PointPrefix::from_bits(&[1, 0, 1, 1, 0])] {
            let v = evaluate_cocycle(
                &CocycleSpec::canonical(),
                &haar,
                &Element::Cantor(f.clone()),
                &BasePoint::Odometer(y),
            );
            assert_eq!(v.unwrap(), f);
        }
    }

    #[test]
    fn pushforward_examples() {
        let (base, c) = cycle2();
        let kappa = KappaMeasure::new(vec![(Element::Int(1), q("1/2")), (Element::Int(2), q("1/2"))]).unwrap();
        let k0 = pushforward_kappa(&c, &base, &kappa, &BasePoint::Cycle(0)).unwrap();
        assert_eq!(k0.mass(&el("{1}")), q("1/2"));
        assert_eq!(k0.mass(&el("{1,2}")), q("1/2"));
        assert_eq!(k0.total_mass(), BigRational::one());

        let delta = KappaMeasure::point_mass(Element::Int(0));
        let k = pushforward_kappa(&c, &base, &delta, &BasePoint::Cycle(1)).unwrap();
        assert_eq!(k, FiniteMeasure::point_mass(GroupElement::identity()));
    }

    #[test]
    fn constant_cocycle_on_integers() {
        let base = BaseSystem::FiniteCycle { m: 5 };
        let c = CocycleSpec::ConstantPerGenerator {
            table: vec![(Element::Int(2), el("{3}")), (Element::Int(6), el("{3}")), (Element::Int(4), el("{}"))],
        };
        let x = BasePoint::Cycle(4);
        assert_eq!(evaluate_cocycle(&c, &base, &Element::Int(10), &x).unwrap(), el("{3}"));
        assert!(evaluate_cocycle(&c, &base, &Element::Int(8), &x).unwrap().is_identity());
        assert_eq!(evaluate_cocycle(&c, &base, &Element::Int(3), &x), Err(Error::UnreachableElement("+3".into())));
        let bad = CocycleSpec::ConstantPerGenerator {
            table: vec![(Element::Int(1), el("{1}")), (Element::Int(2), el("{2}"))],
        };
        assert!(bad.validate(&base).is_err());
    }

    #[test]
    fn constant_cocycle_on_cantor_group() {
        let base = BaseSystem::HaarOdometer;
        let c = CocycleSpec::ConstantPerGenerator {
            table: vec![
                (Element::Cantor(el("{1}")), el("{1}")),
                (Element::Cantor(el("{1,2}")), el("{2,3}")),
                (Element::Cantor(el("{2}")), el("{1,2,3}")),
            ],
        };
        let x = BasePoint::Odometer(PointPrefix::new());
        assert_eq!(evaluate_cocycle(&c, &base, &Element::Cantor(el("{2}")), &x).unwrap(), el("{1,2,3}"));
        assert_eq!(
            evaluate_cocycle(&c, &base, &Element::Cantor(el("{3}")), &x),
            Err(Error::UnreachableElement("{3}".into()))
        );
        let bad = CocycleSpec::ConstantPerGenerator {
            table: vec![
                (Element::Cantor(el("{1}")), el("{1}")),
                (Element::Cantor(el("{2}")), el("{2}")),
                (Element::Cantor(el("{1,2}")), el("{4}")),
            ],
        };
        assert!(bad.validate(&base).is_err());
    }

    #[test]
    fn base_compatibility() {
        let (_, table) = cycle2();
        assert!(table.validate(&BaseSystem::HaarOdometer).is_err());
        assert!(CocycleSpec::canonical().validate(&BaseSystem::FiniteCycle { m: 3 }).is_err());
        assert!(table.validate(&BaseSystem::FiniteCycle { m: 3 }).is_err());
    }

    #[test]
    fn projection_examples() {
        let p = Projection::new(vec![2, 4, 5, 9, 11]).unwrap();
        assert_eq!(p.apply(&el("{2}")), el("{1}"));
        assert!(p.apply(&el("{1,3}")).is_identity());
        let p = Projection::new(vec![3, 4, 6, 8, 10]).unwrap();
        assert_eq!(p.apply(&el("{4,10,7}")), el("{2,5}"));
        assert!(Projection::new(vec![2, 2]).is_err());
        assert!(Projection::new(vec![0, 2]).is_err());

        let (base, c) = cycle2();
        let projected = project_cocycle(&c, &Projection::new(vec![2]).unwrap());
        let v = evaluate_cocycle(&projected, &base, &Element::Int(1), &BasePoint::Cycle(1)).unwrap();
        assert_eq!(v, el("{1}"));

        let inner = Projection::new(vec![2, 3, 5]).unwrap();
        let outer = Projection::new(vec![1, 3]).unwrap();
        let composed = project_cocycle(&project_cocycle(&CocycleSpec::canonical(), &inner), &outer);
        let f = Element::Cantor(el("{1,2,3,5}"));
        let x = BasePoint::Odometer(PointPrefix::new());
        assert_eq!(evaluate_cocycle(&composed, &BaseSystem::HaarOdometer, &f, &x).unwrap(), el("{1,2}"));
    }

    #[test]
    fn budget_report_examples() {
        let base = BaseSystem::HaarOdometer;
        let atoms: Vec<_> = (1..=5u32).map(|n| (Element::Cantor(GroupElement::unit(n)), 0.2)).collect();
        let kappa = KappaMeasure::from_f64(atoms).unwrap();
        let l: Vec<u64> = (1..=5).collect();
        let rows = norm_budget_report(&CocycleSpec::canonical(), &base, &kappa, &l).unwrap();
        assert!(rows.iter().all(|r| r.within));
        assert_eq!(rows[4].integral, BigRational::from_integer(5.into()));

        let trivial = CocycleSpec::ConstantPerGenerator {
            table: kappa.atoms().iter().map(|(g, _)| (g.clone(), GroupElement::identity())).collect(),
        };
        let rows = norm_budget_report(&trivial, &base, &kappa, &[0; 5]).unwrap();
        assert!(rows.iter().all(|r| r.within && r.integral.is_zero()));

        let (base, c) = cycle2();
        let kappa = KappaMeasure::new(vec![(Element::Int(1), q("1/2")), (Element::Int(2), q("1/2"))]).unwrap();
        let rows = norm_budget_report(&c, &base, &kappa, &[0, 0]).unwrap();
        assert_eq!(rows[1].integral, BigRational::from_integer(2.into()));
        assert!(!rows[1].within);
        let rows = norm_budget_report(&c, &base, &kappa, &[0, 1]).unwrap();
        assert!(rows[1].within);
        assert!(norm_budget_report(&c, &base, &kappa, &[0]).is_err());
    }

    #[test]
    fn generation_examples() {
        let kappa = |ks: &[i64]| {
            let w = 1.0 / ks.len() as f64;
            KappaMeasure::from_f64(ks.iter().map(|&k| (Element::Int(k), w)).collect()).unwrap()
        };
        assert!(matches!(
            check_generating(GroupSpec::Integers, &kappa(&[1, -1]), 2),
            GenerationVerdict::GeneratesDeclaredSubgroup { .. }
        ));
        for depth in [1, 5, 40] {
            assert!(matches!(
                check_generating(GroupSpec::Integers, &kappa(&[1]), depth),
                GenerationVerdict::FailsWithinDepth { .. }
            ));
        }
        assert!(matches!(
            check_generating(GroupSpec::Integers, &kappa(&[2, 3]), 10),
            GenerationVerdict::FailsWithinDepth { .. }
        ));
        assert!(matches!(
            check_generating(GroupSpec::Integers, &kappa(&[2, -3]), 10),
            GenerationVerdict::GeneratesDeclaredSubgroup { .. }
        ));
        let z2 = KappaMeasure::from_f64(vec![(Element::Cantor(el("{1}")), 0.5), (Element::Cantor(el("{2,3}")), 0.5)])
            .unwrap();
        assert_eq!(
            check_generating(GroupSpec::DirectSumZ2, &z2, 1),
            GenerationVerdict::GeneratesDeclaredSubgroup { depth: 1 }
        );
    }
}
