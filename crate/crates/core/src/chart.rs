//! Explicit chains of monoidal-transformation charts and the limits of a
//! formal trajectory in each chart.
//!
//! A chart step introduces a coordinate `new = (a - c_a) / (b - c_b)` built
//! from two earlier coordinates and a center. Feeding a trajectory given as
//! series in `z` through the chain and reading off constant terms yields the
//! point the trajectory tends to on each exceptional divisor.

use num_traits::Zero;
use thiserror::Error;

use crate::poly::Poly;
use crate::pseries::{PSeries, PSeriesError};
use crate::rat::{rat, Rat};

/// Order to which chart quotients are expanded.
pub const DEFAULT_WORKING_ORDER: i64 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChartError {
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),
    #[error("expected {expected} trajectory series, got {got}")]
    TrajectoryLength { expected: usize, got: usize },
    #[error("coordinate `{0}` diverges along the trajectory")]
    DivisionByZeroValuation(String),
    #[error("coordinate `{0}` is not known to order zero")]
    InsufficientPrecision(String),
    #[error(transparent)]
    Series(#[from] PSeriesError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartStep {
    pub name: String,
    pub num: (String, Rat),
    pub den: (String, Rat),
}

impl ChartStep {
    pub fn new(name: &str, num: &str, num_center: Rat, den: &str, den_center: Rat) -> Self {
        ChartStep {
            name: name.to_string(),
            num: (num.to_string(), num_center),
            den: (den.to_string(), den_center),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartChain {
    base: Vec<String>,
    steps: Vec<ChartStep>,
}

impl ChartChain {
    pub fn new(base: Vec<String>, steps: Vec<ChartStep>) -> Result<Self, ChartError> {
        let mut known = base.clone();
        for step in &steps {
            for name in [&step.num.0, &step.den.0] {
                if !known.contains(name) {
                    return Err(ChartError::UnknownCoordinate(name.clone()));
                }
            }
            known.push(step.name.clone());
        }
        Ok(ChartChain { base, steps })
    }

    /// The planar chain `u = x2/t`, `w = t/(u-2)`, `v = (w-1)/(u-2)`.
    pub fn planar_example() -> Self {
        let zero = Rat::zero;
        ChartChain::new(
            vec!["x2".into(), "t".into()],
            vec![
                ChartStep::new("u", "x2", zero(), "t", zero()),
                ChartStep::new("w", "t", zero(), "u", rat(2)),
                ChartStep::new("v", "w", rat(1), "u", rat(2)),
            ],
        )
        .expect("example chain is well formed")
    }

    pub fn steps(&self) -> &[ChartStep] {
        &self.steps
    }

    pub fn base(&self) -> &[String] {
        &self.base
    }

    /// Every chart coordinate as a series in the trajectory variable.
    pub fn coordinates(&self, trajectory: &[PSeries], order: i64) -> Result<Vec<(String, PSeries)>, ChartError> {
        if trajectory.len() != self.base.len() {
            return Err(ChartError::TrajectoryLength { expected: self.base.len(), got: trajectory.len() });
        }
        let mut coords: Vec<(String, PSeries)> =
            self.base.iter().cloned().zip(trajectory.iter().cloned()).collect();
        for step in &self.steps {
            let num = centered(&coords, &step.num)?;
            let den = centered(&coords, &step.den)?;
            let q = num
                .div(&den, order)
                .map_err(|e| match e {
                    PSeriesError::DivisionByZeroValuation | PSeriesError::NotUnit => {
                        ChartError::DivisionByZeroValuation(step.name.clone())
                    }
                    other => other.into(),
                })?;
            coords.push((step.name.clone(), q));
        }
        Ok(coords.split_off(self.base.len()))
    }

    /// `z -> 0` limits of the chart coordinates, as polynomials in the parameters.
    pub fn limits(&self, trajectory: &[PSeries]) -> Result<Vec<(String, Poly)>, ChartError> {
        self.coordinates(trajectory, DEFAULT_WORKING_ORDER)?
            .into_iter()
            .map(|(name, s)| {
                if s.valuation().is_some_and(|v| v < 0) {
                    return Err(ChartError::DivisionByZeroValuation(name));
                }
                match s.coeff(0) {
                    Some(c) => Ok((name, c)),
                    None => Err(ChartError::InsufficientPrecision(name)),
                }
            })
            .collect()
    }
}

fn centered(coords: &[(String, PSeries)], (name, center): &(String, Rat)) -> Result<PSeries, ChartError> {
    let (_, s) = coords
        .iter()
        .find(|(n, _)| n == name)
        .ok_or_else(|| ChartError::UnknownCoordinate(name.clone()))?;
    Ok(s.sub(&PSeries::constant_rat(s.param_arity(), center.clone()))?)
}

/// Smallest exponent whose coefficient is not constant in the parameters.
pub fn first_param_dependent_index(series: &PSeries) -> Option<i64> {
    series.coeffs().find(|(_, c)| !c.is_constant()).map(|(k, _)| k)
}

/// How the trajectory fed to the chain is truncated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// Keep terms up to the first parameter-dependent index.
    FirstDependent,
    /// Keep terms up to (and including) the given exponent.
    At(i64),
    /// Use the series as composed.
    None,
}

/// Intermediate objects of the planar blowup example in one place.
#[derive(Debug, Clone)]
pub struct BlowupDemo {
    pub chain: ChartChain,
    /// `t(s) = w(s) (u(s) - 2)`.
    pub t_of_s: PSeries,
    /// `x2(s) = u(s) t(s)`.
    pub x2_of_s: PSeries,
    /// Reversion `s(z)` of `z = t(s)`.
    pub s_of_z: PSeries,
    /// `x2(s(z))`.
    pub x2_of_z: PSeries,
    pub first_dependent: Option<i64>,
    /// Trajectory actually fed to the chain.
    pub used: PSeries,
    pub limits: Vec<(String, Poly)>,
}

impl BlowupDemo {
    /// Expected limits `(u, w, v) = (2, 1, e)`.
    pub fn expected_limits() -> Vec<(String, Poly)> {
        let e = Poly::var(1, 0).expect("one parameter");
        vec![
            ("u".into(), Poly::constant(1, rat(2))),
            ("w".into(), Poly::one(1)),
            ("v".into(), e),
        ]
    }

    pub fn limits_match(&self) -> bool {
        self.limits == Self::expected_limits()
    }
}

/// Runs the planar example: `u = 2 + s`, `w = 1 + e s + s^2` in the
/// exceptional charts, reverted through `z = t(s)` to order `order`.
pub fn blowup_demo(truncation: Truncation, order: i64) -> Result<BlowupDemo, ChartError> {
    let e = Poly::var(1, 0).expect("one parameter");
    let one = Poly::one(1);
    let s = PSeries::var(1);
    let u_of_s = PSeries::constant_rat(1, rat(2)).add(&s)?;
    let w_of_s = PSeries::from_coeffs(1, [(0, one.clone()), (1, e), (2, one)], None)?;
    let t_of_s = w_of_s.mul(&u_of_s.sub(&PSeries::constant_rat(1, rat(2)))?)?;
    let x2_of_s = u_of_s.mul(&t_of_s)?;
    let s_of_z = t_of_s.revert(order)?;
    let x2_of_z = PSeries::compose(&x2_of_s, &s_of_z)?;
    let first_dependent = first_param_dependent_index(&x2_of_z);
    let used = match truncation {
        Truncation::None => x2_of_z.clone(),
        Truncation::At(k) => x2_of_z.truncate(k).into_exact(),
        Truncation::FirstDependent => {
            let k = first_dependent.unwrap_or(order);
            x2_of_z.truncate(k).into_exact()
        }
    };
    let chain = ChartChain::planar_example();
    let limits = chain.limits(&[used.clone(), PSeries::var(1)])?;
    Ok(BlowupDemo { chain, t_of_s, x2_of_s, s_of_z, x2_of_z, first_dependent, used, limits })
}
