//! Scenarios: the assembled `(G, κ, T, α, ν)` that every command runs on,
//! and their JSON file format.
//!
//! ```json
//! {
//!   "name": "single-coordinate",
//!   "group": { "kind": "direct_sum_z2" },
//!   "kappa": { "atoms": [["{1}", "1"]] },
//!   "base": { "kind": "haar_odometer" },
//!   "cocycle": { "kind": "canonical" },
//!   "nu": { "family": "constant", "epsilon": "ln(2)" }
//! }
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::actions::{parse_weight, BaseSystem, CocycleSpec, Element, GroupSpec, KappaMeasure, Projection};
use crate::cantor::{Family, GroupElement, ProductMeasureSpec};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub group: GroupSpec,
    pub kappa: KappaMeasure,
    pub base: BaseSystem,
    pub cocycle: CocycleSpec,
    pub nu: ProductMeasureSpec,
}

impl Scenario {
    /// Assembles and validates a scenario.
    pub fn new(
        group: GroupSpec,
        kappa: KappaMeasure,
        base: BaseSystem,
        cocycle: CocycleSpec,
        nu: ProductMeasureSpec,
    ) -> Result<Self> {
        let s = Self { name: String::new(), description: String::new(), group, kappa, base, cocycle, nu };
        s.validate()?;
        Ok(s)
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.base.group() != self.group {
            return Err(Error::Validation(format!(
                "group/base mismatch: {:?} does not act on {:?}",
                self.group, self.base
            )));
        }
        if let BaseSystem::FiniteCycle { m: 0 } = self.base {
            return Err(Error::Validation("base.m must be at least 1".into()));
        }
        if let Some((g, _)) = self.kappa.atoms().iter().find(|(g, _)| !self.group.contains(g)) {
            return Err(Error::Validation(format!("kappa atom {g} is not an element of {:?}", self.group)));
        }
        self.cocycle.validate(&self.base)?;
        // every atom must have a cocycle value
        let compiled = crate::actions::CompiledCocycle::new(&self.cocycle, &self.base)?;
        for (x, _) in self.base.integration_points(&self.cocycle)?.iter().take(1) {
            for (g, _) in self.kappa.atoms() {
                compiled.eval(g, x).map_err(|e| Error::Validation(format!("kappa atom {g}: {e}")))?;
            }
        }
        Ok(())
    }

    /// Same scenario with a different fiber measure.
    pub fn with_nu(&self, nu: ProductMeasureSpec) -> Self {
        Self { nu, ..self.clone() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))?;
        file.into_scenario()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ScenarioFile::from(self)).expect("scenario serializes")
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    Scenario::from_json(&text).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// A number written either as a JSON number or as a string; strings may be
/// `p/q`, a decimal, or `ln(x)` for a positive decimal or rational `x`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum NumberText {
    Number(f64),
    Text(String),
}

impl NumberText {
    fn real(&self, field: &str) -> Result<f64> {
        match self {
            NumberText::Number(v) => Ok(*v),
            NumberText::Text(s) => {
                let t = s.trim();
                let inner = t.strip_prefix("ln(").or_else(|| t.strip_prefix("log(")).and_then(|r| r.strip_suffix(')'));
                let value = match inner {
                    Some(arg) => {
                        let x = crate::actions::rational_to_f64(&parse_weight(arg)?);
                        if x <= 0.0 {
                            return Err(Error::Validation(format!("{field}: logarithm of non-positive {arg}")));
                        }
                        x.ln()
                    }
                    None => crate::actions::rational_to_f64(&parse_weight(t)?),
                };
                Ok(value)
            }
        }
        .map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{field}: {m}")),
            other => other,
        })
    }

    fn weight(&self, field: &str) -> Result<num_rational::BigRational> {
        let text = match self {
            // shortest round-trip decimal, i.e. what the user wrote
            NumberText::Number(v) => format!("{v}"),
            NumberText::Text(s) => s.clone(),
        };
        parse_weight(&text).map_err(|e| Error::Parse(format!("{field}: {e}")))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub group: GroupFile,
    pub kappa: KappaFile,
    pub base: BaseFile,
    pub cocycle: CocycleFile,
    pub nu: NuFile,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    pub kind: GroupKind,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKind {
    Integers,
    DirectSumZ2,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KappaFile {
    pub atoms: Vec<(String, NumberText)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enumeration: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BaseFile {
    FiniteCycle { m: u32 },
    HaarOdometer,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CocycleFile {
    Canonical {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        projection: Option<Vec<u32>>,
    },
    ConstantPerGenerator {
        table: Vec<(String, String)>,
    },
    GeneratorTable {
        table: Vec<String>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NuFile {
    pub family: FamilyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<NumberText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<NumberText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<NumberText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<NumberText>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<String, (f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deformation: Option<DeformationFile>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Zero,
    Constant,
    Power,
    Periodic,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeformationFile {
    pub n0: u32,
    pub theta: f64,
}

fn require<'a>(v: &'a Option<NumberText>, field: &str) -> Result<&'a NumberText> {
    v.as_ref().ok_or_else(|| Error::Parse(format!("missing field `{field}`")))
}

impl ScenarioFile {
    pub fn into_scenario(self) -> Result<Scenario> {
        let group = match self.group.kind {
            GroupKind::Integers => GroupSpec::Integers,
            GroupKind::DirectSumZ2 => GroupSpec::DirectSumZ2,
        };
        let parse_el =
            |s: &str, field: String| group.parse_element(s).map_err(|e| Error::Parse(format!("{field}: {e}")));

        let mut atoms = Vec::with_capacity(self.kappa.atoms.len());
        for (i, (label, w)) in self.kappa.atoms.iter().enumerate() {
            let g = parse_el(label, format!("kappa.atoms[{i}]"))?;
            atoms.push((g, w.weight(&format!("kappa.atoms[{i}]"))?));
        }
        let mut kappa = KappaMeasure::new(atoms).map_err(|e| prefix("kappa", e))?;
        if let Some(order) = &self.kappa.enumeration {
            let order = order
                .iter()
                .enumerate()
                .map(|(i, s)| parse_el(s, format!("kappa.enumeration[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            kappa = kappa.reordered(&order).map_err(|e| prefix("kappa.enumeration", e))?;
        }

        let base = match self.base {
            BaseFile::FiniteCycle { m } => BaseSystem::FiniteCycle { m },
            BaseFile::HaarOdometer => BaseSystem::HaarOdometer,
        };

        let parse_f =
            |s: &str, field: String| s.parse::<GroupElement>().map_err(|e| Error::Parse(format!("{field}: {e}")));
        let cocycle = match &self.cocycle {
            CocycleFile::Canonical { projection } => CocycleSpec::Canonical {
                projection: projection
                    .clone()
                    .map(Projection::new)
                    .transpose()
                    .map_err(|e| prefix("cocycle.projection", e))?,
            },
            CocycleFile::ConstantPerGenerator { table } => CocycleSpec::ConstantPerGenerator {
                table: table
                    .iter()
                    .enumerate()
                    .map(|(i, (g, f))| {
                        Ok((parse_el(g, format!("cocycle.table[{i}]"))?, parse_f(f, format!("cocycle.table[{i}]"))?))
                    })
                    .collect::<Result<_>>()?,
            },
            CocycleFile::GeneratorTable { table } => CocycleSpec::GeneratorTable {
                values: table
                    .iter()
                    .enumerate()
                    .map(|(i, f)| parse_f(f, format!("cocycle.table[{i}]")))
                    .collect::<Result<_>>()?,
            },
        };

        let nu = self.nu.to_spec().map_err(|e| prefix("nu", e))?;
        let mut scenario = Scenario::new(group, kappa, base, cocycle, nu)?;
        scenario.name = self.name;
        scenario.description = self.description;
        Ok(scenario)
    }
}

fn prefix(field: &str, e: Error) -> Error {
    match e {
        Error::Parse(m) => Error::Parse(format!("{field}: {m}")),
        Error::Validation(m) => Error::Validation(format!("{field}: {m}")),
        other => other,
    }
}

impl NuFile {
    fn to_spec(&self) -> Result<ProductMeasureSpec> {
        let family = match self.family {
            FamilyKind::Zero => Family::Zero,
            FamilyKind::Constant => Family::Constant { epsilon: require(&self.epsilon, "epsilon")?.real("epsilon")? },
            FamilyKind::Power => {
                Family::Power { c: require(&self.c, "c")?.real("c")?, a: require(&self.a, "a")?.real("a")? }
            }
            FamilyKind::Periodic => Family::Periodic {
                epsilons: self
                    .epsilons
                    .as_ref()
                    .ok_or_else(|| Error::Parse("missing field `epsilons`".into()))?
                    .iter()
                    .enumerate()
                    .map(|(i, e)| e.real(&format!("epsilons[{i}]")))
                    .collect::<Result<_>>()?,
            },
        };
        let mut spec = ProductMeasureSpec::new(family)?;
        for (key, &(p0, p1)) in &self.overrides {
            let n: u32 = key
                .parse()
                .map_err(|_| Error::Parse(format!("overrides: coordinate key {key:?} is not a positive integer")))?;
            spec = spec.with_override(n, p0, p1)?;
        }
        if let Some(d) = self.deformation {
            spec = spec.deformed(d.n0, d.theta).map_err(|e| Error::Validation(format!("deformation: {e}")))?;
        }
        Ok(spec)
    }
}

impl From<&Scenario> for ScenarioFile {
    fn from(s: &Scenario) -> Self {
        let group = GroupFile {
            kind: match s.group {
                GroupSpec::Integers => GroupKind::Integers,
                GroupSpec::DirectSumZ2 => GroupKind::DirectSumZ2,
            },
        };
        let atoms = s.kappa.atoms().iter().map(|(g, w)| (g.to_string(), NumberText::Text(w.to_string()))).collect();
        let base = match s.base {
            BaseSystem::FiniteCycle { m } => BaseFile::FiniteCycle { m },
            BaseSystem::HaarOdometer => BaseFile::HaarOdometer,
        };
        let cocycle = match &s.cocycle {
            CocycleSpec::Canonical { projection } => {
                CocycleFile::Canonical { projection: projection.as_ref().map(|p| p.coords().to_vec()) }
            }
            CocycleSpec::ConstantPerGenerator { table } => CocycleFile::ConstantPerGenerator {
                table: table.iter().map(|(g, f)| (g.to_string(), f.to_string())).collect(),
            },
            CocycleSpec::GeneratorTable { values } => {
                CocycleFile::GeneratorTable { table: values.iter().map(ToString::to_string).collect() }
            }
        };
        let num = |v: f64| Some(NumberText::Number(v));
        let mut nu = NuFile {
            family: FamilyKind::Zero,
            epsilon: None,
            c: None,
            a: None,
            epsilons: None,
            overrides: s.nu.overrides().iter().map(|(n, &p)| (n.to_string(), p)).collect(),
            deformation: s.nu.deformation().map(|d| DeformationFile { n0: d.n0, theta: d.theta }),
        };
        match s.nu.family() {
            Family::Zero => {}
            Family::Constant { epsilon } => {
                nu.family = FamilyKind::Constant;
                nu.epsilon = num(*epsilon);
            }
            Family::Power { c, a } => {
                nu.family = FamilyKind::Power;
                nu.c = num(*c);
                nu.a = num(*a);
            }
            Family::Periodic { epsilons } => {
                nu.family = FamilyKind::Periodic;
                nu.epsilons = Some(epsilons.iter().map(|&e| NumberText::Number(e)).collect());
            }
        }
        ScenarioFile {
            name: s.name.clone(),
            description: s.description.clone(),
            group,
            kappa: KappaFile { atoms, enumeration: None },
            base,
            cocycle,
            nu,
        }
    }
}

/// Element label helper for tests and fixtures: `"{1,2}"` or `"+3"`.
pub fn element(group: GroupSpec, s: &str) -> Element {
    group.parse_element(s).expect("valid element literal")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    const MINIMAL: &str = r#"{
        "name": "minimal",
        "group": {"kind": "direct_sum_z2"},
        "kappa": {"atoms": [["{1}", "1"]]},
        "base": {"kind": "haar_odometer"},
        "cocycle": {"kind": "canonical"},
        "nu": {"family": "constant", "epsilon": "ln(2)"}
    }"#;

    #[test]
    fn minimal_file_loads() {
        let s = Scenario::from_json(MINIMAL).unwrap();
        assert_eq!(s.name, "minimal");
        assert_eq!(s.nu.family(), &Family::Constant { epsilon: LN_2 });
        assert_eq!(s.kappa.len(), 1);
    }

    #[test]
    fn bad_mass_is_rejected() {
        let text = MINIMAL.replace(r#"[["{1}", "1"]]"#, r#"[["{1}", "0.6"], ["{2}", 0.3]]"#);
        let err = Scenario::from_json(&text).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        assert!(err.to_string().contains("kappa mass ≠ 1"), "{err}");
    }

    #[test]
    fn table_on_odometer_is_rejected() {
        let text = MINIMAL.replace(r#"{"kind": "canonical"}"#, r#"{"kind": "generator_table", "table": ["{1}"]}"#);
        let err = Scenario::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("cocycle/base mismatch"), "{err}");
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = Scenario::from_json("{\n  \"name\": 3\n}").unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
        assert!(err.to_string().contains("line 2"), "{err}");
        let text = MINIMAL.replace(r#"[["{1}", "1"]]"#, r#"[["{1,x}", "1"]]"#);
        let err = Scenario::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("kappa.atoms[0]"), "{err}");
    }

    #[test]
    fn integers_on_cycle_round_trips() {
        let text = r#"{
            "group": {"kind": "integers"},
            "kappa": {"atoms": [["+1", "1/2"], ["+2", "1/2"]], "enumeration": ["+2", "+1"]},
            "base": {"kind": "finite_cycle", "m": 2},
            "cocycle": {"kind": "generator_table", "table": ["{1}", "{2}"]},
            "nu": {"family": "power", "c": 1, "a": 0.5, "overrides": {"3": [0.25, 0.75]},
                   "deformation": {"n0": 1, "theta": 0.3}}
        }"#;
        let s = Scenario::from_json(text).unwrap();
        assert_eq!(s.kappa.atoms()[0].0, Element::Int(2));
        let again = Scenario::from_json(&s.to_json()).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn unreachable_atom_is_a_validation_error() {
        let text = r#"{
            "group": {"kind": "direct_sum_z2"},
            "kappa": {"atoms": [["{1}", "1/2"], ["{2}", "1/2"]]},
            "base": {"kind": "haar_odometer"},
            "cocycle": {"kind": "constant_per_generator", "table": [["{1}", "{1}"]]},
            "nu": {"family": "zero"}
        }"#;
        assert!(matches!(Scenario::from_json(text), Err(Error::Validation(_))));
    }
}
