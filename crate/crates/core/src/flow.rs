//! Fixed-step integration of the inverse dynamics system
//!
//! ```text
//! dx_i/dr = (-1)^(d+i) |J_(d,i)|
//! ```
//!
//! where `J_(d,i)` is the Jacobian with the driven row `d` and column `i`
//! removed. Along this field every image component except `f_d` is constant
//! and `f_d` advances at rate `|J(f)|`. When a u-gamma representation is
//! supplied, the branch of `u` is tracked at every step and `(u, gamma)`
//! plus rate residuals are attached to each record.

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jacrep::{flow_rates, Driven};
use crate::poly::CompiledPoly;
use crate::polymap::{MatrixError, PolyMap, MAX_LAPLACE_DIM};
use crate::rat::{rat_to_cf, CF};
use crate::uvrep::{eval_at, LaurentGamma, UVRep, UVRepError};

/// Coordinates beyond this magnitude end a run as diverged.
pub const OVERFLOW_LIMIT: f64 = 1e300;

/// Relative gap below which two candidate roots count as equidistant.
const BRANCH_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("map arity {0} exceeds the supported maximum of {MAX_LAPLACE_DIM}")]
    TooLarge(usize),
    #[error("invalid flow specification: {0}")]
    InvalidSpec(String),
    #[error("initial state has {got} coordinates, map has arity {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("the u^m coordinate vanishes")]
    ZeroLeadCoordinate,
    #[error("two branches of u are equally close to the previous value")]
    BranchAmbiguous,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Rep(#[from] UVRepError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    #[default]
    Euler,
    Rk4,
}

impl std::str::FromStr for Integrator {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euler" => Ok(Integrator::Euler),
            "rk4" => Ok(Integrator::Rk4),
            other => Err(format!("unknown integrator `{other}` (expected euler or rk4)")),
        }
    }
}

/// Which steps produce a record. Step 0 and the last step are always recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    /// Every `k`-th step.
    Stride(u64),
    /// Steps 1, 2, 3, 4 and every power of ten.
    Decades,
}

impl Schedule {
    fn hit(&self, n: u64) -> bool {
        match *self {
            Schedule::Stride(k) => n.is_multiple_of(k),
            Schedule::Decades => n <= 4 || is_power_of_ten(n),
        }
    }
}

fn is_power_of_ten(mut n: u64) -> bool {
    while n >= 10 && n.is_multiple_of(10) {
        n /= 10;
    }
    n == 1
}

#[derive(Debug, Clone)]
pub struct FlowSpec {
    pub map: PolyMap,
    /// Zero-based index of the driven image component.
    pub driven: usize,
    pub integrator: Integrator,
    pub step: f64,
    pub max_steps: u64,
    pub schedule: Schedule,
    pub rep: Option<UVRep>,
    /// Seed for the branch of `u`; defaults to the principal root.
    pub initial_branch: Option<CF>,
}

impl FlowSpec {
    pub fn new(map: PolyMap, driven: usize) -> Self {
        FlowSpec {
            map,
            driven,
            integrator: Integrator::Euler,
            step: 1e-5,
            max_steps: 1000,
            schedule: Schedule::Stride(1),
            rep: None,
            initial_branch: None,
        }
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        let n = self.map.arity();
        if n > MAX_LAPLACE_DIM {
            return Err(FlowError::TooLarge(n));
        }
        if self.driven >= n {
            return Err(FlowError::InvalidSpec(format!("driven index {} out of range for arity {n}", self.driven + 1)));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(FlowError::InvalidSpec("step must be a positive finite number".into()));
        }
        if let Schedule::Stride(0) = self.schedule {
            return Err(FlowError::InvalidSpec("record stride must be positive".into()));
        }
        if self.rep.is_some() && n != 2 {
            return Err(FlowError::InvalidSpec("branch tracking needs a planar map".into()));
        }
        Ok(())
    }
}

/// The signed-minor velocity field, compiled for fast evaluation.
#[derive(Debug, Clone)]
pub struct VelocityField {
    comps: Vec<CompiledPoly>,
}

impl VelocityField {
    pub fn new(f: &PolyMap, driven: usize) -> Result<Self, FlowError> {
        let n = f.arity();
        if n > MAX_LAPLACE_DIM {
            return Err(FlowError::TooLarge(n));
        }
        if driven >= n {
            return Err(FlowError::InvalidSpec(format!("driven index {} out of range", driven + 1)));
        }
        let j = f.jacobian();
        let comps = (0..n)
            .map(|i| j.signed_minor(driven, i).map(|p| p.compile()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(VelocityField { comps })
    }

    #[inline]
    pub fn eval_into(&self, x: &[CF], out: &mut [CF]) {
        for (o, c) in out.iter_mut().zip(&self.comps) {
            *o = c.eval(x);
        }
    }
}

/// The velocity field at a single point.
pub fn rhs(f: &PolyMap, driven: usize, x: &[CF]) -> Result<Vec<CF>, FlowError> {
    if x.len() != f.arity() {
        return Err(FlowError::DimensionMismatch { expected: f.arity(), got: x.len() });
    }
    let field = VelocityField::new(f, driven)?;
    let mut out = vec![CF::zero(); x.len()];
    field.eval_into(x, &mut out);
    Ok(out)
}

/// All `m`-th roots of `z`, principal root first.
pub fn mth_roots(z: CF, m: u32) -> Vec<CF> {
    match m {
        1 => return vec![z],
        2 => return vec![z.sqrt(), -z.sqrt()],
        _ => {}
    }
    let r0 = CF::from_polar(z.norm().powf(1.0 / m as f64), z.arg() / m as f64);
    (0..m)
        .map(|k| r0 * CF::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / m as f64))
        .collect()
}

/// Recovers `(u, gamma)` from a point, picking the `m`-th root closest to `prev_u`.
pub fn solve_uv(rep: &UVRep, x: &[CF], prev_u: CF) -> Result<(CF, CF), FlowError> {
    let [r0, r1] = rep.role();
    let lead = x[r0] * rep.sign() as f64;
    if lead == CF::zero() {
        return Err(FlowError::ZeroLeadCoordinate);
    }
    let roots = mth_roots(lead, rep.m());
    let mut dist: Vec<(f64, CF)> = roots.iter().map(|&r| ((r - prev_u).norm(), r)).collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0));
    if dist.len() > 1 {
        let scale = prev_u.norm() + dist[0].1.norm();
        if dist[1].0 - dist[0].0 <= BRANCH_TIE_TOL * scale {
            return Err(FlowError::BranchAmbiguous);
        }
    }
    let u = dist[0].1;
    Ok((u, gamma_of(rep, x[r1], u)))
}

/// `gamma = (X2 - sum h_i u^(m-i)) u^(N-m)`.
pub fn gamma_of(rep: &UVRep, x2: CF, u: CF) -> CF {
    let m = rep.m() as i32;
    let mut rest = x2;
    for (i, h) in rep.h().iter().enumerate() {
        if !h.is_zero() {
            rest -= rat_to_cf(h) * u.powi(m - i as i32);
        }
    }
    rest * u.powi(rep.N() as i32 - m)
}

/// Symbolic `(du/dr, dgamma/dr)` ready for evaluation along a trajectory.
#[derive(Debug, Clone)]
pub struct RatePredictor {
    pub du_dr: LaurentGamma,
    pub dgamma_dr: LaurentGamma,
}

impl RatePredictor {
    pub fn new(f: &PolyMap, rep: &UVRep, driven: usize, max_order: i64) -> Result<Self, FlowError> {
        let exp = rep.expand_image(f, max_order)?;
        let d = match driven {
            0 => Driven::A,
            1 => Driven::B,
            _ => return Err(FlowError::InvalidSpec("driven index out of range".into())),
        };
        let (du_dr, dgamma_dr) = flow_rates(&exp, rep, d);
        Ok(RatePredictor { du_dr, dgamma_dr })
    }

    pub fn predict(&self, u: CF, gamma: CF) -> (CF, CF) {
        (eval_at(&self.du_dr, gamma, u), eval_at(&self.dgamma_dr, gamma, u))
    }
}

/// Backward difference over one step minus the prediction at the newer state.
pub fn rate_residuals(prev: (CF, CF), cur: (CF, CF), step: f64, predictor: &RatePredictor) -> (CF, CF) {
    let (pu, pg) = predictor.predict(cur.0, cur.1);
    ((cur.0 - prev.0) / step - pu, (cur.1 - prev.1) / step - pg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    Completed,
    Diverged,
    NonFiniteState,
    BranchAmbiguous,
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RunStatus::Completed => "completed",
            RunStatus::Diverged => "diverged",
            RunStatus::NonFiniteState => "non-finite state",
            RunStatus::BranchAmbiguous => "branch ambiguous",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub step: u64,
    pub r: f64,
    pub x: Vec<CF>,
    /// `f(x)`, recomputed from `x`.
    pub y: Vec<CF>,
    pub u: Option<CF>,
    pub gamma: Option<CF>,
    /// `|f_j(x) - f_j(x0)|`; `None` for the driven component.
    pub drift: Vec<Option<f64>>,
    pub res_u: Option<CF>,
    pub res_gamma: Option<CF>,
    /// `(f_d(x_n) - f_d(x_(n-1))) / step`.
    pub driven_rate: Option<CF>,
    /// Mean of `|J(f)|` at both ends of the last step.
    pub jdet_step: Option<CF>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
    pub status: RunStatus,
    pub steps_taken: u64,
    /// Largest drift per component over every step, recorded or not.
    pub step_drift: Vec<Option<f64>>,
    /// Steps at which the tracked root was not the closest one to its predecessor.
    pub branch_breaks: u64,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectoryRecord {
        self.records.last().expect("a trajectory always holds the initial record")
    }

    /// Largest recorded drift per component.
    pub fn max_drift(&self) -> Vec<Option<f64>> {
        let n = self.records[0].drift.len();
        (0..n)
            .map(|j| {
                self.records
                    .iter()
                    .filter_map(|r| r.drift[j])
                    .filter(|d| d.is_finite())
                    .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.max(d))))
            })
            .collect()
    }
}

struct Evaluators {
    comps: Vec<CompiledPoly>,
    jdet: CompiledPoly,
}

impl Evaluators {
    fn image(&self, x: &[CF]) -> Vec<CF> {
        self.comps.iter().map(|c| c.eval(x)).collect()
    }
}

fn state_status(x: &[CF]) -> Option<RunStatus> {
    if x.iter().any(|c| c.re.is_nan() || c.im.is_nan()) {
        return Some(RunStatus::NonFiniteState);
    }
    if x.iter().any(|c| !(c.re.abs() <= OVERFLOW_LIMIT && c.im.abs() <= OVERFLOW_LIMIT)) {
        return Some(RunStatus::Diverged);
    }
    None
}

struct Stepper {
    field: VelocityField,
    integrator: Integrator,
    h: f64,
    k: [Vec<CF>; 4],
    tmp: Vec<CF>,
}

impl Stepper {
    fn new(field: VelocityField, integrator: Integrator, h: f64, n: usize) -> Self {
        let z = vec![CF::zero(); n];
        Stepper { field, integrator, h, k: [z.clone(), z.clone(), z.clone(), z.clone()], tmp: z }
    }

    #[inline]
    fn advance(&mut self, x: &mut [CF]) {
        let h = self.h;
        match self.integrator {
            Integrator::Euler => {
                self.field.eval_into(x, &mut self.k[0]);
                for (xi, ki) in x.iter_mut().zip(&self.k[0]) {
                    *xi += ki * h;
                }
            }
            Integrator::Rk4 => {
                let [k1, k2, k3, k4] = &mut self.k;
                self.field.eval_into(x, k1);
                for ((t, xi), ki) in self.tmp.iter_mut().zip(x.iter()).zip(k1.iter()) {
                    *t = xi + ki * (0.5 * h);
                }
                self.field.eval_into(&self.tmp, k2);
                for ((t, xi), ki) in self.tmp.iter_mut().zip(x.iter()).zip(k2.iter()) {
                    *t = xi + ki * (0.5 * h);
                }
                self.field.eval_into(&self.tmp, k3);
                for ((t, xi), ki) in self.tmp.iter_mut().zip(x.iter()).zip(k3.iter()) {
                    *t = xi + ki * h;
                }
                self.field.eval_into(&self.tmp, k4);
                for i in 0..x.len() {
                    x[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
                }
            }
        }
    }
}

/// Runs the flow from `x0`. Problems met along the way end the run and
/// are reported through [`Trajectory::status`]; only invalid input is an error.
pub fn integrate(spec: &FlowSpec, x0: &[CF]) -> Result<Trajectory, FlowError> {
    spec.validate()?;
    let n = spec.map.arity();
    if x0.len() != n {
        return Err(FlowError::DimensionMismatch { expected: n, got: x0.len() });
    }
    let field = VelocityField::new(&spec.map, spec.driven)?;
    let ev = Evaluators {
        comps: spec.map.components().iter().map(|p| p.compile()).collect(),
        jdet: spec.map.jacobian_det()?.compile(),
    };
    let y0 = ev.image(x0);
    let predictor = match &spec.rep {
        Some(rep) => Some(RatePredictor::new(&spec.map, rep, spec.driven, 64)?),
        None => None,
    };

    let mut branch: Option<(CF, CF)> = None;
    if let Some(rep) = &spec.rep {
        let seed = match spec.initial_branch {
            Some(s) => s,
            None => mth_roots(x0[rep.role()[0]] * rep.sign() as f64, rep.m())[0],
        };
        branch = Some(solve_uv(rep, x0, seed)?);
    }

    let make_record = |step: u64, x: &[CF], prev: Option<&[CF]>, uv: Option<(CF, CF)>, prev_uv: Option<(CF, CF)>| {
        let y = ev.image(x);
        let drift = (0..n)
            .map(|j| if j == spec.driven { None } else { Some((y[j] - y0[j]).norm()) })
            .collect();
        let (driven_rate, jdet_step) = match prev {
            Some(p) => {
                let yd_prev = ev.comps[spec.driven].eval(p);
                let rate = (y[spec.driven] - yd_prev) / spec.step;
                (Some(rate), Some((ev.jdet.eval(x) + ev.jdet.eval(p)) * 0.5))
            }
            None => (None, None),
        };
        let (res_u, res_gamma) = match (uv, prev_uv, &predictor) {
            (Some(c), Some(p), Some(pred)) => {
                let (a, b) = rate_residuals(p, c, spec.step, pred);
                (Some(a), Some(b))
            }
            _ => (None, None),
        };
        TrajectoryRecord {
            step,
            r: step as f64 * spec.step,
            x: x.to_vec(),
            y,
            u: uv.map(|p| p.0),
            gamma: uv.map(|p| p.1),
            drift,
            res_u,
            res_gamma,
            driven_rate,
            jdet_step,
        }
    };

    let mut records = vec![make_record(0, x0, None, branch, None)];
    let mut stepper = Stepper::new(field, spec.integrator, spec.step, n);
    let mut x = x0.to_vec();
    let mut prev = x0.to_vec();
    let mut status = RunStatus::Completed;
    let mut taken = 0;
    let mut step_drift: Vec<Option<f64>> = (0..n).map(|j| (j != spec.driven).then_some(0.0)).collect();
    let mut branch_breaks = 0;
    for step in 1..=spec.max_steps {
        prev.copy_from_slice(&x);
        stepper.advance(&mut x);
        taken = step;
        if let Some(s) = state_status(&x) {
            status = s;
            records.push(make_record(step, &x, Some(&prev), None, None));
            break;
        }
        let prev_branch = branch;
        if let (Some(rep), Some((u_prev, _))) = (&spec.rep, branch) {
            let [r0, r1] = rep.role();
            let lead = x[r0] * rep.sign() as f64;
            match pick_root(lead, rep.m(), u_prev) {
                Some(u) => {
                    if !branch_continuous(rep.m(), u_prev, u) {
                        branch_breaks += 1;
                    }
                    branch = Some((u, gamma_of(rep, x[r1], u)));
                }
                None => {
                    status = RunStatus::BranchAmbiguous;
                    records.push(make_record(step, &x, Some(&prev), None, None));
                    break;
                }
            }
        }
        for (j, d) in step_drift.iter_mut().enumerate() {
            if let Some(d) = d {
                *d = d.max((ev.comps[j].eval(&x) - y0[j]).norm());
            }
        }
        if spec.schedule.hit(step) || step == spec.max_steps {
            let prev_uv = prev_branch.map(|(u, _)| {
                let rep = spec.rep.as_ref().expect("branch implies rep");
                (u, gamma_of(rep, prev[rep.role()[1]], u))
            });
            records.push(make_record(step, &x, Some(&prev), branch, prev_uv));
        }
    }
    Ok(Trajectory { records, status, steps_taken: taken, step_drift, branch_breaks })
}

/// Closest `m`-th root of `lead` to `prev`; `None` on a tie or a zero lead.
#[inline]
fn pick_root(lead: CF, m: u32, prev: CF) -> Option<CF> {
    if lead == CF::zero() {
        return None;
    }
    if m == 1 {
        return Some(lead);
    }
    if m == 2 {
        let r = lead.sqrt();
        let (d1, d2) = ((r - prev).norm(), (r + prev).norm());
        let scale = prev.norm() + r.norm();
        if (d1 - d2).abs() <= BRANCH_TIE_TOL * scale {
            return None;
        }
        return Some(if d1 < d2 { r } else { -r });
    }
    let mut best: Option<(f64, CF)> = None;
    let mut second = f64::INFINITY;
    for r in mth_roots(lead, m) {
        let d = (r - prev).norm();
        match best {
            Some((bd, _)) if d >= bd => second = second.min(d),
            _ => {
                if let Some((bd, _)) = best {
                    second = second.min(bd);
                }
                best = Some((d, r));
            }
        }
    }
    let (bd, r) = best?;
    if second - bd <= BRANCH_TIE_TOL * (prev.norm() + r.norm()) {
        return None;
    }
    Some(r)
}

/// Runs independent integrations on separate threads. Results come back in
/// input order.
pub fn integrate_batch(jobs: &[(FlowSpec, Vec<CF>)]) -> Vec<Result<Trajectory, FlowError>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = jobs.iter().map(|(spec, x0)| scope.spawn(move || integrate(spec, x0))).collect();
        handles.into_iter().map(|h| h.join().expect("integration thread panicked")).collect()
    })
}

/// `|u_next - u_prev|` is smaller than the distance from `u_prev` to any
/// other `m`-th root sharing `u_next^m`.
pub fn branch_continuous(m: u32, u_prev: CF, u_next: CF) -> bool {
    let d = (u_next - u_prev).norm();
    if m == 2 {
        return d < (u_next + u_prev).norm();
    }
    (1..m).all(|k| {
        let z = CF::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / m as f64);
        d < (z * u_next - u_prev).norm()
    })
}
