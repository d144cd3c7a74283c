//! Named example maps, their u-gamma representations and ready-made
//! experiments.

use crate::flow::Integrator;
use crate::json::{ComplexJson, ExperimentConfig, JsonError, RegistryJson, ScheduleJson, Source};
use crate::poly::Poly;
use crate::polymap::PolyMap;
use crate::rat::rat;
use crate::uvrep::UVRep;

#[derive(Debug, Clone)]
pub struct Example {
    pub name: String,
    pub description: String,
    pub map: PolyMap,
    pub rep: Option<UVRep>,
    /// Zero-based driven component used by default.
    pub driven: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Registry {
    examples: Vec<Example>,
    experiments: Vec<ExperimentConfig>,
}

fn var(n: usize, i: usize) -> Poly {
    Poly::var(n, i).expect("index in range")
}

/// `(x1 x2, x1 x2 + x2^2)`.
pub fn f0() -> PolyMap {
    let p = &var(2, 0) * &var(2, 1);
    PolyMap::new(vec![p.clone(), &p + &var(2, 1).pow(2)]).expect("well formed")
}

/// `(z1, z2 + z1^2)`, a Keller map.
pub fn g0() -> PolyMap {
    let (z1, z2) = (var(2, 0), var(2, 1));
    PolyMap::with_vars(vec![z1.clone(), &z2 + &z1.pow(2)], vec!["z1".into(), "z2".into()]).expect("well formed")
}

/// `(x1 x2 + x2^2, x1 x2) o g0`.
pub fn f1() -> PolyMap {
    let p = &var(2, 0) * &var(2, 1);
    let outer = PolyMap::new(vec![&p + &var(2, 1).pow(2), p]).expect("well formed");
    outer.compose(&g0()).expect("same arity")
}

/// `(x1 + x2^2, x2 + x3^2, x3)`, a triangular Keller map of A^3.
pub fn n3_triangular() -> PolyMap {
    let x = |i| var(3, i);
    PolyMap::new(vec![&x(0) + &x(1).pow(2), &x(1) + &x(2).pow(2), x(2)]).expect("well formed")
}

pub fn f0_rep() -> UVRep {
    UVRep::new(1, 2, vec![rat(0); 2], [0, 1], 1).expect("valid")
}

pub fn f0_sqrt_rep() -> UVRep {
    UVRep::new(2, 4, vec![rat(0); 4], [0, 1], 1).expect("valid")
}

/// `z2 = -v^2`, `z1 = v + gamma v^-2`.
pub fn f1_rep() -> UVRep {
    UVRep::new(2, 4, vec![rat(0), rat(1), rat(0), rat(0)], [1, 0], -1).expect("valid")
}

#[allow(clippy::too_many_arguments)]
fn experiment(
    name: &str,
    description: &str,
    map: &str,
    rep: Option<&str>,
    integrator: Integrator,
    step: f64,
    max_steps: u64,
    schedule: (Option<ScheduleJson>, u64),
    x0: [f64; 2],
    branch: Option<f64>,
) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        description: Some(description.into()),
        map: Some(Source::Name(map.into())),
        map_path: None,
        rep: rep.map(|r| Source::Name(r.into())),
        rep_path: None,
        driven: 1,
        step,
        max_steps,
        stride: schedule.1,
        schedule: schedule.0,
        integrator,
        x0: x0.iter().map(|&v| ComplexJson::Real(v)).collect(),
        branch: branch.map(ComplexJson::Real),
        out: None,
    }
}

impl Registry {
    pub fn empty() -> Self {
        Registry::default()
    }

    pub fn builtin() -> Self {
        let ex = |name: &str, description: &str, map: PolyMap, rep: Option<UVRep>| Example {
            name: name.into(),
            description: description.into(),
            map,
            rep,
            driven: 0,
        };
        let examples = vec![
            ex("f0", "rep x1 = u, x2 = g/u", f0(), Some(f0_rep())),
            ex("f0-sqrt", "f0 in the squared chart x1 = v^2, x2 = g/v^2", f0(), Some(f0_sqrt_rep())),
            ex("f1", "(x1*x2 + x2^2, x1*x2) o g0; rep z2 = -v^2, z1 = v + g/v^2", f1(), Some(f1_rep())),
            ex("g0", "Keller", g0(), None),
            ex("n3-triangular", "triangular, Keller", n3_triangular(), None),
        ];
        let decades = (Some(ScheduleJson::Decades), 1);
        let experiments = vec![
            experiment(
                "f0-basic",
                "f0 from (-7, 3): x1*x2 + x2^2 stays at -12 while x1*x2 tends to it",
                "f0",
                Some("f0"),
                Integrator::Rk4,
                1e-5,
                800_000,
                (None, 10_000),
                [-7.0, 3.0],
                None,
            ),
            experiment(
                "f0-sqrt-p3",
                "f0 squared chart, v(0) = 3, eps = 27, residual of dv/dr",
                "f0",
                Some("f0-sqrt"),
                Integrator::Euler,
                1e-6,
                100_000,
                decades.clone(),
                [9.0, 3.0],
                Some(3.0),
            ),
            experiment(
                "f0-sqrt-m3",
                "f0 squared chart, v(0) = -3, eps = 27, residual of dv/dr",
                "f0",
                Some("f0-sqrt"),
                Integrator::Euler,
                1e-6,
                100_000,
                decades.clone(),
                [9.0, 3.0],
                Some(-3.0),
            ),
            experiment(
                "f0-sqrt-m3-fine",
                "as f0-sqrt-m3 with a ten times smaller step",
                "f0",
                Some("f0-sqrt"),
                Integrator::Euler,
                1e-7,
                1_000_000,
                decades.clone(),
                [9.0, 3.0],
                Some(-3.0),
            ),
            experiment(
                "f0-sqrt-m3-coarse",
                "as f0-sqrt-m3 with a ten times larger step, residual of deps/dr",
                "f0",
                Some("f0-sqrt"),
                Integrator::Euler,
                1e-5,
                10_000,
                decades,
                [9.0, 3.0],
                Some(-3.0),
            ),
            experiment(
                "f1-long",
                "f1 from (5, -11) to r = 2.1: y2 = 70 throughout, gamma tends to 35",
                "f1",
                Some("f1"),
                Integrator::Euler,
                1e-7,
                21_000_000,
                (None, 1_000_000),
                [5.0, -11.0],
                Some(3.0),
            ),
        ];
        Registry { examples, experiments }
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn experiments(&self) -> &[ExperimentConfig] {
        &self.experiments
    }

    pub fn example(&self, name: &str) -> Option<&Example> {
        self.examples.iter().find(|e| e.name == name)
    }

    pub fn experiment(&self, name: &str) -> Option<&ExperimentConfig> {
        self.experiments.iter().find(|e| e.name == name)
    }

    /// Adds the entries of a registry file; a name may be defined only once.
    pub fn extend(&mut self, file: &RegistryJson) -> Result<(), JsonError> {
        for e in &file.entries {
            if self.example(&e.name).is_some() {
                return Err(JsonError::Schema(format!("duplicate entry `{}`", e.name)));
            }
            let map = e.map.to_map()?;
            if e.driven == 0 || e.driven > map.arity() {
                return Err(JsonError::Schema(format!("entry `{}`: driven out of range", e.name)));
            }
            let rep = e.rep.as_ref().map(|r| r.to_rep()).transpose()?;
            self.examples.push(Example {
                name: e.name.clone(),
                description: e.description.clone(),
                map,
                rep,
                driven: e.driven - 1,
            });
        }
        for x in &file.experiments {
            if self.experiment(&x.name).is_some() {
                return Err(JsonError::Schema(format!("duplicate experiment `{}`", x.name)));
            }
            self.experiments.push(x.clone());
        }
        Ok(())
    }
}
