//! JSON wire formats for maps, representations, experiment configurations
//! and registry files.
//!
//! Rationals are strings `"p/q"`; u-gamma roles are one-based.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::{FlowSpec, Integrator, Schedule};
use crate::poly::Poly;
use crate::polymap::PolyMap;
use crate::rat::{fmt_rat, parse_rat, CF};
use crate::registry::Registry;
use crate::uvrep::UVRep;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JsonError {
    #[error("malformed JSON: {0}")]
    Syntax(String),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("unknown registry entry `{0}`")]
    UnknownName(String),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
}

fn syntax(e: serde_json::Error) -> JsonError {
    JsonError::Syntax(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub coeff: String,
    pub exps: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapJson {
    pub arity: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vars: Option<Vec<String>>,
    pub components: Vec<Vec<TermJson>>,
}

impl MapJson {
    pub fn to_map(&self) -> Result<PolyMap, JsonError> {
        let n = self.arity;
        if n == 0 {
            return Err(JsonError::Schema("arity must be positive".into()));
        }
        if self.components.len() != n {
            return Err(JsonError::Schema(format!("{} components for arity {n}", self.components.len())));
        }
        let mut comps = Vec::with_capacity(n);
        for (i, terms) in self.components.iter().enumerate() {
            let mut parsed = Vec::with_capacity(terms.len());
            for t in terms {
                if t.exps.len() != n {
                    return Err(JsonError::Schema(format!(
                        "component {}: exponent vector of length {} for arity {n}",
                        i + 1,
                        t.exps.len()
                    )));
                }
                if t.exps.iter().any(|&e| e > 64) {
                    return Err(JsonError::Schema(format!("component {}: exponent above 64", i + 1)));
                }
                let c = parse_rat(&t.coeff).map_err(|e| JsonError::Schema(format!("component {}: {e}", i + 1)))?;
                parsed.push((t.exps.clone(), c));
            }
            comps.push(Poly::from_terms(n, parsed).map_err(|e| JsonError::Schema(e.to_string()))?);
        }
        let vars = match &self.vars {
            Some(v) => v.clone(),
            None => (1..=n).map(|i| format!("x{i}")).collect(),
        };
        PolyMap::with_vars(comps, vars).map_err(|e| JsonError::Schema(e.to_string()))
    }

    pub fn from_map(f: &PolyMap) -> Self {
        let components = f
            .components()
            .iter()
            .map(|p| p.terms().map(|(e, c)| TermJson { coeff: fmt_rat(c), exps: e.clone() }).collect())
            .collect();
        MapJson { arity: f.arity(), vars: Some(f.vars().to_vec()), components }
    }
}

pub fn parse_map(text: &str) -> Result<PolyMap, JsonError> {
    serde_json::from_str::<MapJson>(text).map_err(syntax)?.to_map()
}

pub fn map_to_json(f: &PolyMap) -> String {
    serde_json::to_string_pretty(&MapJson::from_map(f)).expect("maps serialize")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepJson {
    pub m: u32,
    #[serde(rename = "N")]
    pub n: u32,
    pub h: Vec<String>,
    pub role: [usize; 2],
    pub sign: i8,
}

impl RepJson {
    pub fn to_rep(&self) -> Result<UVRep, JsonError> {
        let h = self
            .h
            .iter()
            .map(|s| parse_rat(s).map_err(|e| JsonError::Schema(format!("h: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if self.role.iter().any(|&r| r == 0 || r > 2) {
            return Err(JsonError::Schema("role entries are 1 or 2".into()));
        }
        UVRep::new(self.m, self.n, h, [self.role[0] - 1, self.role[1] - 1], self.sign)
            .map_err(|e| JsonError::Schema(e.to_string()))
    }

    pub fn from_rep(rep: &UVRep) -> Self {
        let [a, b] = rep.role();
        RepJson {
            m: rep.m(),
            n: rep.N(),
            h: rep.h().iter().map(fmt_rat).collect(),
            role: [a + 1, b + 1],
            sign: rep.sign(),
        }
    }
}

pub fn parse_rep(text: &str) -> Result<UVRep, JsonError> {
    serde_json::from_str::<RepJson>(text).map_err(syntax)?.to_rep()
}

pub fn rep_to_json(rep: &UVRep) -> String {
    serde_json::to_string_pretty(&RepJson::from_rep(rep)).expect("reps serialize")
}

/// A real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexJson {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexJson {
    pub fn to_cf(self) -> CF {
        match self {
            ComplexJson::Real(r) => CF::new(r, 0.0),
            ComplexJson::Pair([re, im]) => CF::new(re, im),
        }
    }
}

/// Registry name or inline object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source<T> {
    Name(String),
    Inline(T),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleJson {
    Stride,
    Decades,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    /// Registry name or inline map.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<Source<MapJson>>,
    /// Map file, relative to the configuration file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map_path: Option<PathBuf>,
    /// Registry name (whose representation is used) or inline representation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rep: Option<Source<RepJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rep_path: Option<PathBuf>,
    /// One-based index of the driven image component.
    pub driven: usize,
    pub step: f64,
    pub max_steps: u64,
    #[serde(default = "default_stride")]
    pub stride: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleJson>,
    #[serde(default)]
    pub integrator: Integrator,
    pub x0: Vec<ComplexJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<ComplexJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn default_stride() -> u64 {
    1
}

/// A configuration resolved against a registry and the file system.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub name: String,
    pub spec: FlowSpec,
    pub x0: Vec<CF>,
    pub out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, JsonError> {
    std::fs::read_to_string(path).map_err(|e| JsonError::Io { path: path.display().to_string(), msg: e.to_string() })
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, JsonError> {
        serde_json::from_str(text).map_err(syntax)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs serialize")
    }

    /// Resolves names against `registry` and paths against `base_dir`.
    pub fn resolve(&self, registry: &Registry, base_dir: Option<&Path>) -> Result<Experiment, JsonError> {
        let join = |p: &Path| match base_dir {
            Some(b) if p.is_relative() => b.join(p),
            _ => p.to_path_buf(),
        };
        let map = match (&self.map, &self.map_path) {
            (Some(_), Some(_)) => return Err(JsonError::Schema("give either map or map_path, not both".into())),
            (Some(Source::Name(n)), None) => {
                registry.example(n).ok_or_else(|| JsonError::UnknownName(n.clone()))?.map.clone()
            }
            (Some(Source::Inline(m)), None) => m.to_map()?,
            (None, Some(p)) => parse_map(&read(&join(p))?)?,
            (None, None) => return Err(JsonError::Schema("missing map".into())),
        };
        let rep = match (&self.rep, &self.rep_path) {
            (Some(_), Some(_)) => return Err(JsonError::Schema("give either rep or rep_path, not both".into())),
            (Some(Source::Name(n)), None) => {
                let e = registry.example(n).ok_or_else(|| JsonError::UnknownName(n.clone()))?;
                Some(e.rep.clone().ok_or_else(|| JsonError::Schema(format!("entry `{n}` has no representation")))?)
            }
            (Some(Source::Inline(r)), None) => Some(r.to_rep()?),
            (None, Some(p)) => Some(parse_rep(&read(&join(p))?)?),
            (None, None) => None,
        };
        if self.driven == 0 || self.driven > map.arity() {
            return Err(JsonError::Schema(format!("driven must be in 1..={}", map.arity())));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(JsonError::Schema("step must be positive".into()));
        }
        if self.stride == 0 {
            return Err(JsonError::Schema("stride must be positive".into()));
        }
        if self.x0.len() != map.arity() {
            return Err(JsonError::Schema(format!("x0 has {} entries for arity {}", self.x0.len(), map.arity())));
        }
        if rep.is_some() && map.arity() != 2 {
            return Err(JsonError::Schema("a representation needs a planar map".into()));
        }
        let x0: Vec<CF> = self.x0.iter().map(|c| c.to_cf()).collect();
        if x0.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(JsonError::Schema("x0 must be finite".into()));
        }
        let schedule = match self.schedule {
            Some(ScheduleJson::Decades) => Schedule::Decades,
            _ => Schedule::Stride(self.stride),
        };
        let spec = FlowSpec {
            map,
            driven: self.driven - 1,
            integrator: self.integrator,
            step: self.step,
            max_steps: self.max_steps,
            schedule,
            rep,
            initial_branch: self.branch.map(ComplexJson::to_cf),
        };
        spec.validate().map_err(|e| JsonError::Schema(e.to_string()))?;
        Ok(Experiment { name: self.name.clone(), spec, x0, out: self.out.as_ref().map(|p| join(p)) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryJson {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub map: MapJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rep: Option<RepJson>,
    /// One-based driven component used by default.
    #[serde(default = "default_driven")]
    pub driven: usize,
}

fn default_driven() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RegistryJson {
    #[serde(default)]
    pub entries: Vec<EntryJson>,
    #[serde(default)]
    pub experiments: Vec<ExperimentConfig>,
}

pub fn parse_registry(text: &str) -> Result<RegistryJson, JsonError> {
    serde_json::from_str(text).map_err(syntax)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    const F0: &str = r#"{"arity": 2, "vars": ["x1", "x2"], "components": [
        [{"coeff": "1", "exps": [1, 1]}],
        [{"coeff": "1", "exps": [1, 1]}, {"coeff": "1", "exps": [0, 2]}]]}"#;

    #[test]
    fn map_roundtrip() {
        let f = parse_map(F0).unwrap();
        assert_eq!(f.jacobian_det().unwrap().to_string(), "2*x2^2");
        assert_eq!(parse_map(&map_to_json(&f)).unwrap(), f);
    }

    #[test]
    fn map_schema_errors() {
        assert!(matches!(parse_map("{"), Err(JsonError::Syntax(_))));
        assert!(matches!(parse_map(r#"{"arity": 2, "components": []}"#), Err(JsonError::Schema(_))));
        assert!(matches!(parse_map(r#"{"arity": 0, "components": []}"#), Err(JsonError::Schema(_))));
        let bad_exps = r#"{"arity": 1, "components": [[{"coeff": "1", "exps": [1, 1]}]]}"#;
        assert!(matches!(parse_map(bad_exps), Err(JsonError::Schema(_))));
        let bad_coeff = r#"{"arity": 1, "components": [[{"coeff": "1/0", "exps": [1]}]]}"#;
        assert!(matches!(parse_map(bad_coeff), Err(JsonError::Schema(_))));
        let extra = r#"{"arity": 1, "components": [[]], "bogus": 1}"#;
        assert!(matches!(parse_map(extra), Err(JsonError::Syntax(_))));
    }

    #[test]
    fn rep_roundtrip() {
        let text = r#"{"m": 2, "N": 4, "h": ["0", "1", "0", "0"], "role": [2, 1], "sign": -1}"#;
        let rep = parse_rep(text).unwrap();
        assert_eq!(rep.role(), [1, 0]);
        assert_eq!(rep.h()[1], rat(1));
        assert_eq!(parse_rep(&rep_to_json(&rep)).unwrap(), rep);
        assert!(parse_rep(r#"{"m": 2, "N": 4, "h": ["0"], "role": [1, 2], "sign": 1}"#).is_err());
        assert!(parse_rep(r#"{"m": 1, "N": 1, "h": ["0"], "role": [0, 1], "sign": 1}"#).is_err());
    }

    #[test]
    fn config_resolution() {
        let reg = Registry::builtin();
        let text = r#"{"name": "t", "map": "f0", "rep": "f0", "driven": 1, "step": 1e-5,
                       "max_steps": 10, "x0": [-7, [3, 0]]}"#;
        let cfg = ExperimentConfig::parse(text).unwrap();
        let exp = cfg.resolve(&reg, None).unwrap();
        assert_eq!(exp.x0, vec![CF::new(-7.0, 0.0), CF::new(3.0, 0.0)]);
        assert_eq!(exp.spec.schedule, Schedule::Stride(1));
        assert_eq!(ExperimentConfig::parse(&cfg.to_json()).unwrap(), cfg);

        let unknown = ExperimentConfig::parse(&text.replace("\"f0\", \"rep\"", "\"nope\", \"rep\"")).unwrap();
        assert_eq!(unknown.resolve(&reg, None).unwrap_err(), JsonError::UnknownName("nope".into()));
        let bad_driven = ExperimentConfig::parse(&text.replace("\"driven\": 1", "\"driven\": 3")).unwrap();
        assert!(matches!(bad_driven.resolve(&reg, None), Err(JsonError::Schema(_))));
        let inline = format!(
            r#"{{"name": "i", "map": {F0}, "driven": 1, "step": 0.1, "max_steps": 1, "x0": [1, 1], "schedule": "decades"}}"#
        );
        let exp = ExperimentConfig::parse(&inline).unwrap().resolve(&reg, None).unwrap();
        assert_eq!(exp.spec.schedule, Schedule::Decades);
    }

    #[test]
    fn registry_file() {
        let text = format!(r#"{{"entries": [{{"name": "mine", "map": {F0}}}]}}"#);
        let r = parse_registry(&text).unwrap();
        assert_eq!(r.entries[0].driven, 1);
        assert!(parse_registry("3").is_err());
        assert_eq!(parse_registry("{}").unwrap(), RegistryJson::default());
    }
}
