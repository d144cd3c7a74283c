//! u-gamma representations of planar maps near a finiteness variety.
//!
//! A representation is the curve
//!
//! ```text
//! X1 = sign * u^m,   X2 = h_0 u^m + h_1 u^(m-1) + .. + h_(N-1) u^(m-N+1) + gamma u^(m-N)
//! ```
//!
//! where `(X1, X2)` are two ambient coordinates selected by `role`. Image
//! expansions are Laurent series in `w = 1/u` with coefficients polynomial
//! in `gamma`; [`LaurentGamma`] is that series type.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{Poly, PolyError};
use crate::polymap::PolyMap;
use crate::pseries::PSeries;
use crate::rat::{rat, rat_to_cf, Rat, CF};

/// Series in `w = 1/u` whose coefficients are polynomials in `gamma`.
pub type LaurentGamma = PSeries;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UVRepError {
    #[error("invalid representation: {0}")]
    Invalid(String),
    #[error("u must be nonzero")]
    ZeroU,
    #[error("component {component} keeps a positive power u^{power}")]
    NonConvergent { component: usize, power: i64 },
    #[error("map arity {0} is not 2")]
    ArityMismatch(usize),
    #[error("all positive-index coefficients vanish")]
    AllHigherOrdersZero,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UVRep {
    m: u32,
    n: u32,
    h: Vec<Rat>,
    role: [usize; 2],
    sign: i8,
}

impl UVRep {
    /// `role[0]` is the ambient index (zero-based) carrying `sign * u^m`,
    /// `role[1]` the one carrying the `h`/`gamma` part.
    pub fn new(m: u32, n: u32, h: Vec<Rat>, role: [usize; 2], sign: i8) -> Result<Self, UVRepError> {
        if m == 0 || n == 0 {
            return Err(UVRepError::Invalid("m and N must be positive".into()));
        }
        if h.len() != n as usize {
            return Err(UVRepError::Invalid(format!("expected {n} h coefficients, got {}", h.len())));
        }
        if !(role == [0, 1] || role == [1, 0]) {
            return Err(UVRepError::Invalid("role must be a permutation of the two coordinates".into()));
        }
        if sign != 1 && sign != -1 {
            return Err(UVRepError::Invalid("sign must be 1 or -1".into()));
        }
        Ok(UVRep { m, n, h, role, sign })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    #[allow(non_snake_case)]
    pub fn N(&self) -> u32 {
        self.n
    }

    pub fn h(&self) -> &[Rat] {
        &self.h
    }

    pub fn role(&self) -> [usize; 2] {
        self.role
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    /// `L = N - m`.
    pub fn l(&self) -> i64 {
        self.n as i64 - self.m as i64
    }

    /// Sign of the role permutation.
    pub fn permutation_sign(&self) -> i8 {
        if self.role == [0, 1] {
            1
        } else {
            -1
        }
    }

    /// Orientation of `(u, gamma)` relative to the ambient coordinates:
    /// `sign * permutation_sign`.
    pub fn orientation(&self) -> i8 {
        self.sign * self.permutation_sign()
    }

    /// Both curve coordinates as `(X1, X2)` in role order.
    pub fn role_series(&self) -> [LaurentGamma; 2] {
        let m = self.m as i64;
        let x1 = PSeries::monomial(-m, Poly::constant(1, rat(self.sign.into())));
        let mut x2 = PSeries::monomial(self.n as i64 - m, Poly::var(1, 0).expect("gamma"));
        for (i, h) in self.h.iter().enumerate() {
            if !h.is_zero() {
                x2 = x2.add(&PSeries::monomial(i as i64 - m, Poly::constant(1, h.clone()))).expect("arity 1");
            }
        }
        [x1, x2]
    }

    /// The curve in ambient coordinate order.
    pub fn curve_series(&self) -> [LaurentGamma; 2] {
        let [x1, x2] = self.role_series();
        if self.role == [0, 1] {
            [x1, x2]
        } else {
            [x2, x1]
        }
    }

    /// `d X2 / du` as a series in `w`.
    pub fn x2_u(&self) -> LaurentGamma {
        du(&self.role_series()[1])
    }

    /// Numerical point on the curve, in ambient order.
    pub fn curve_eval(&self, gamma: CF, u: CF) -> Result<[CF; 2], UVRepError> {
        if u == CF::zero() {
            return Err(UVRepError::ZeroU);
        }
        let m = self.m as i32;
        let x1 = CF::from(self.sign as f64) * u.powi(m);
        let mut x2 = gamma * u.powi(m - self.n as i32);
        for (i, h) in self.h.iter().enumerate() {
            if !h.is_zero() {
                x2 += rat_to_cf(h) * u.powi(m - i as i32);
            }
        }
        Ok(if self.role == [0, 1] { [x1, x2] } else { [x2, x1] })
    }

    /// Composes `f` onto the curve and expands both image components in `u^-1`.
    pub fn expand_image(&self, f: &PolyMap, max_order: i64) -> Result<ABExpansion, UVRepError> {
        if f.arity() != 2 {
            return Err(UVRepError::ArityMismatch(f.arity()));
        }
        let curve = self.curve_series();
        let one = PSeries::one(1);
        let mut parts = Vec::with_capacity(2);
        for (c, p) in f.components().iter().enumerate() {
            let s = p.substitute(&curve, &one)?;
            if let Some(v) = s.valuation() {
                if v < 0 {
                    return Err(UVRepError::NonConvergent { component: c, power: -v });
                }
            }
            let lossless = s.top_exponent().is_none_or(|t| t <= max_order);
            parts.push(if lossless { s } else { s.truncate(max_order) });
        }
        let b = parts.pop().expect("two components");
        let a = parts.pop().expect("two components");
        Ok(ABExpansion { a, b, max_order })
    }

    /// Index record `m, N, L = N - m, K = L - m` and the first index `k`.
    pub fn indices(&self, exp: &ABExpansion) -> Result<Indices, UVRepError> {
        let k = exp.first_nonconstant_index().ok_or(UVRepError::AllHigherOrdersZero)?;
        let l = self.l();
        Ok(Indices { m: self.m, n: self.n, l, k_ram: l - self.m as i64, k })
    }
}

/// `d/du` of a series in `w = 1/u`: `-w^2 d/dw`.
pub fn du(s: &LaurentGamma) -> LaurentGamma {
    s.derivative().shift(2).neg()
}

/// `u^k` as a series in `w`.
pub fn u_pow(k: i64) -> LaurentGamma {
    PSeries::monomial(-k, Poly::one(1))
}

/// Numerical value of a series in `w` at `(gamma, u)`.
pub fn eval_at(s: &LaurentGamma, gamma: CF, u: CF) -> CF {
    s.eval(&[gamma], CF::one() / u)
}

pub fn gamma_names() -> Vec<String> {
    vec!["g".to_string()]
}

/// Prints a series in `w = 1/u` as powers of `u`.
pub fn fmt_u(s: &LaurentGamma) -> String {
    s.display_with("w", &gamma_names()).to_string()
}

/// `f(C(gamma, u)) = (a, b)` as series in `w = 1/u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ABExpansion {
    pub a: LaurentGamma,
    pub b: LaurentGamma,
    pub max_order: i64,
}

impl ABExpansion {
    pub fn new(a: LaurentGamma, b: LaurentGamma, max_order: i64) -> Self {
        ABExpansion { a, b, max_order }
    }

    pub fn a_coeff(&self, i: i64) -> Poly {
        self.a.coeff_or_zero(i)
    }

    pub fn b_coeff(&self, i: i64) -> Poly {
        self.b.coeff_or_zero(i)
    }

    pub fn a_coeffs(&self) -> Vec<Poly> {
        dense(&self.a)
    }

    pub fn b_coeffs(&self) -> Vec<Poly> {
        dense(&self.b)
    }

    fn first_nonconstant_index(&self) -> Option<i64> {
        let first = |s: &LaurentGamma| s.coeffs().map(|(k, _)| k).find(|&k| k > 0);
        match (first(&self.a), first(&self.b)) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        }
    }

    /// `(a_0(gamma), b_0(gamma))`.
    pub fn fv_component(&self) -> FVComponent {
        let a0 = self.a_coeff(0);
        let b0 = self.b_coeff(0);
        let degenerate = a0.is_constant() && b0.is_constant();
        FVComponent { a0, b0, degenerate }
    }

    /// Numerical value of `(a, b)` at `(gamma, u)`.
    pub fn eval(&self, gamma: CF, u: CF) -> [CF; 2] {
        [eval_at(&self.a, gamma, u), eval_at(&self.b, gamma, u)]
    }
}

fn dense(s: &LaurentGamma) -> Vec<Poly> {
    let top = s.top_exponent().unwrap_or(-1).max(-1);
    let mut out: Vec<Poly> = (0..=top).map(|k| s.coeff_or_zero(k)).collect();
    while out.last().is_some_and(Poly::is_zero) {
        out.pop();
    }
    out
}

/// Parametrization `gamma -> (a_0, b_0)` of a finiteness-variety component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FVComponent {
    pub a0: Poly,
    pub b0: Poly,
    /// Both coordinates constant: the "component" collapses to a point.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Indices {
    pub m: u32,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "L")]
    pub l: i64,
    #[serde(rename = "K")]
    pub k_ram: i64,
    pub k: i64,
}

impl Indices {
    /// `N - 2m`, the index at which the Keller bracket becomes `m/k`.
    pub fn critical_k(&self) -> i64 {
        self.n as i64 - 2 * self.m as i64
    }
}

/// Rational `m/k` helper used by the index checks.
pub fn m_over_k(m: u32, k: i64) -> Rat {
    Rat::new(i64::from(m).into(), k.into())
}

/// True when `s` has exactly the single term `c * w^k`.
pub fn is_monomial(s: &LaurentGamma, k: i64, c: &Rat) -> bool {
    let mut it = s.coeffs();
    match (it.next(), it.next()) {
        (Some((e, p)), None) => e == k && p.as_constant().as_ref() == Some(c),
        (None, None) => c.is_zero(),
        _ => false,
    }
}

/// Series that is the constant `1`.
pub fn is_one(s: &LaurentGamma) -> bool {
    is_monomial(s, 0, &Rat::one())
}
