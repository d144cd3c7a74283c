//! The cyclic action `u -> zeta_m^j u` on a u-gamma representation and the
//! induced transformation of `gamma`, computed over exact cyclotomic
//! coefficients.
//!
//! `sigma(gamma)` is fixed by requiring the curve to stay put:
//!
//! ```text
//! sigma(gamma) = zeta^(j(N-m)) (gamma + sum_i h_i (1 - zeta^(j(m-i))) u^(N-i))
//! ```

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::jacrep::{chi_psi, Status, Verification};
use crate::pseries::PSeries;
use crate::rat::{fmt_rat, rat, rat_to_cf, Rat, CF};
use crate::uvrep::{ABExpansion, LaurentGamma, UVRep};

/// Largest cyclotomic degree handled exactly.
pub const MAX_CYCLO_DEGREE: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GaloisError {
    #[error("order {0} has cyclotomic degree above {MAX_CYCLO_DEGREE}; use the pointwise float action")]
    UnsupportedOrder(u32),
    #[error("expression is truncated; the action lowers orders without bound")]
    TruncationInsufficient,
    #[error("orders {0} and {1} differ")]
    OrderMismatch(u32, u32),
}

fn poly_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Remainder and quotient of `a` by a monic `d`.
fn poly_divmod(a: &[Rat], d: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    let dd = d.len() - 1;
    let mut r = a.to_vec();
    if r.len() <= dd {
        r.resize(dd, Rat::zero());
        return (Vec::new(), r);
    }
    let mut q = vec![Rat::zero(); r.len() - dd];
    for k in (dd..r.len()).rev() {
        let c = r[k].clone();
        if c.is_zero() {
            continue;
        }
        q[k - dd] = c.clone();
        for (i, di) in d.iter().enumerate() {
            r[k - dd + i] -= &c * di;
        }
    }
    r.truncate(dd);
    (q, r)
}

/// Coefficients (ascending) of the m-th cyclotomic polynomial.
pub fn cyclotomic(m: u32) -> Vec<Rat> {
    assert!(m >= 1);
    let mut num = vec![Rat::zero(); m as usize + 1];
    num[0] = rat(-1);
    num[m as usize] = Rat::one();
    for d in (1..m).filter(|d| m.is_multiple_of(*d)) {
        let (q, _) = poly_divmod(&num, &cyclotomic(d));
        num = q;
    }
    num
}

/// Element of `Q(zeta_m)`, stored as a polynomial in `zeta_m` reduced modulo
/// the cyclotomic polynomial.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CycloScalar {
    m: u32,
    c: Vec<Rat>,
}

/// Reduction data shared by all scalars of one order.
#[derive(Clone, Debug)]
pub struct CycloField {
    m: u32,
    phi: Vec<Rat>,
}

impl CycloField {
    pub fn new(m: u32) -> Result<Self, GaloisError> {
        if m == 0 {
            return Err(GaloisError::UnsupportedOrder(m));
        }
        let phi = cyclotomic(m);
        if phi.len() - 1 > MAX_CYCLO_DEGREE {
            return Err(GaloisError::UnsupportedOrder(m));
        }
        Ok(CycloField { m, phi })
    }

    pub fn order(&self) -> u32 {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.phi.len() - 1
    }

    fn reduce(&self, v: Vec<Rat>) -> CycloScalar {
        let (_, r) = poly_divmod(&v, &self.phi);
        CycloScalar { m: self.m, c: r }
    }

    pub fn from_rat(&self, r: Rat) -> CycloScalar {
        self.reduce(vec![r])
    }

    pub fn zero(&self) -> CycloScalar {
        self.from_rat(Rat::zero())
    }

    pub fn one(&self) -> CycloScalar {
        self.from_rat(Rat::one())
    }

    /// `zeta_m^k` for any integer `k`.
    pub fn zeta_pow(&self, k: i64) -> CycloScalar {
        let e = k.rem_euclid(self.m as i64) as usize;
        let mut v = vec![Rat::zero(); e + 1];
        v[e] = Rat::one();
        self.reduce(v)
    }

    pub fn mul(&self, a: &CycloScalar, b: &CycloScalar) -> CycloScalar {
        self.reduce(poly_mul(&a.c, &b.c))
    }
}

impl CycloScalar {
    pub fn order(&self) -> u32 {
        self.m
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &CycloScalar) -> CycloScalar {
        let c = self.c.iter().zip(&other.c).map(|(a, b)| a + b).collect();
        CycloScalar { m: self.m, c }
    }

    pub fn neg(&self) -> CycloScalar {
        CycloScalar { m: self.m, c: self.c.iter().map(|a| -a).collect() }
    }

    pub fn scale(&self, r: &Rat) -> CycloScalar {
        CycloScalar { m: self.m, c: self.c.iter().map(|a| a * r).collect() }
    }

    /// The rational value, when the element lies in `Q`.
    pub fn as_rat(&self) -> Option<Rat> {
        if self.c.iter().skip(1).all(Zero::is_zero) {
            Some(self.c[0].clone())
        } else {
            None
        }
    }

    /// Value with `zeta_m = exp(2 pi i / m)`.
    pub fn to_cf(&self) -> CF {
        let z = CF::from_polar(1.0, 2.0 * PI / self.m as f64);
        self.c.iter().enumerate().map(|(i, a)| rat_to_cf(a) * z.powi(i as i32)).sum()
    }
}

impl fmt::Display for CycloScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.as_rat() {
            return write!(f, "{}", fmt_rat(&r));
        }
        let parts: Vec<String> = self
            .c
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(i, a)| match i {
                0 => fmt_rat(a),
                1 => format!("{}*z", fmt_rat(a)),
                _ => format!("{}*z^{i}", fmt_rat(a)),
            })
            .collect();
        write!(f, "({})", parts.join(" + "))
    }
}

/// Exact Laurent polynomial in `w = 1/u` and `gamma` with cyclotomic
/// coefficients; keys are `(w exponent, gamma exponent)`.
#[derive(Clone, Debug)]
pub struct CycloLaurent {
    field: CycloField,
    terms: BTreeMap<(i64, u32), CycloScalar>,
}

impl PartialEq for CycloLaurent {
    fn eq(&self, other: &Self) -> bool {
        self.field.m == other.field.m && self.terms == other.terms
    }
}

impl CycloLaurent {
    pub fn zero(field: &CycloField) -> Self {
        CycloLaurent { field: field.clone(), terms: BTreeMap::new() }
    }

    pub fn monomial(field: &CycloField, w_exp: i64, g_exp: u32, c: CycloScalar) -> Self {
        let mut out = Self::zero(field);
        out.add_term(w_exp, g_exp, c);
        out
    }

    fn add_term(&mut self, w: i64, g: u32, c: CycloScalar) {
        if c.is_zero() {
            return;
        }
        let key = (w, g);
        let sum = match self.terms.remove(&key) {
            Some(old) => old.add(&c),
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(key, sum);
        }
    }

    /// Embeds an exact gamma-series.
    pub fn from_series(field: &CycloField, s: &LaurentGamma) -> Result<Self, GaloisError> {
        if !s.is_exact() {
            return Err(GaloisError::TruncationInsufficient);
        }
        let mut out = Self::zero(field);
        for (k, p) in s.coeffs() {
            for (e, c) in p.terms() {
                out.add_term(k, e[0], field.from_rat(c.clone()));
            }
        }
        Ok(out)
    }

    /// Back to a gamma-series when every coefficient is rational.
    pub fn to_series(&self) -> Option<LaurentGamma> {
        let mut out = PSeries::zero(1);
        for (&(w, g), c) in &self.terms {
            let r = c.as_rat()?;
            let p = crate::poly::Poly::monomial(1, vec![g], r);
            out = out.add(&PSeries::monomial(w, p)).expect("one parameter");
        }
        Some(out)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &CycloLaurent) -> CycloLaurent {
        let mut out = self.clone();
        for (&(w, g), c) in &other.terms {
            out.add_term(w, g, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &CycloLaurent) -> CycloLaurent {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> CycloLaurent {
        CycloLaurent { field: self.field.clone(), terms: self.terms.iter().map(|(&k, c)| (k, c.neg())).collect() }
    }

    pub fn mul(&self, other: &CycloLaurent) -> CycloLaurent {
        let mut out = Self::zero(&self.field);
        for (&(w1, g1), c1) in &self.terms {
            for (&(w2, g2), c2) in &other.terms {
                out.add_term(w1 + w2, g1 + g2, self.field.mul(c1, c2));
            }
        }
        out
    }

    pub fn scale(&self, c: &CycloScalar) -> CycloLaurent {
        let mut out = Self::zero(&self.field);
        for (&(w, g), a) in &self.terms {
            out.add_term(w, g, self.field.mul(a, c));
        }
        out
    }

    pub fn pow(&self, e: u32) -> CycloLaurent {
        let mut acc = Self::monomial(&self.field, 0, 0, self.field.one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn max_gamma_degree(&self) -> u32 {
        self.terms.keys().map(|&(_, g)| g).max().unwrap_or(0)
    }

    pub fn eval(&self, gamma: CF, u: CF) -> CF {
        let w = CF::one() / u;
        self.terms
            .iter()
            .map(|(&(k, g), c)| c.to_cf() * w.powi(k as i32) * gamma.powi(g as i32))
            .sum()
    }
}

impl fmt::Display for CycloLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut out = String::new();
        for (i, (&(w, g), c)) in self.terms.iter().enumerate() {
            let mut mono = Vec::new();
            match g {
                0 => {}
                1 => mono.push("g".to_string()),
                _ => mono.push(format!("g^{g}")),
            }
            match w {
                0 => {}
                1 => mono.push("w".to_string()),
                _ => mono.push(format!("w^{w}")),
            }
            let mono = mono.join("*");
            let (neg, coef) = match c.as_rat() {
                Some(r) if r.is_negative() => (true, fmt_rat(&-r)),
                Some(r) => (false, fmt_rat(&r)),
                None => (false, c.to_string()),
            };
            let body = match (coef.as_str(), mono.is_empty()) {
                (_, true) => coef,
                ("1", false) => mono,
                (_, false) => format!("{coef}*{mono}"),
            };
            out += match (i, neg) {
                (0, false) => "",
                (0, true) => "-",
                (_, false) => " + ",
                (_, true) => " - ",
            };
            out += &body;
        }
        f.write_str(&out)
    }
}

/// `u -> zeta_m^j u`, `gamma -> gamma_image`.
#[derive(Clone, Debug)]
pub struct SigmaAction {
    pub m: u32,
    pub j: i64,
    pub gamma_image: CycloLaurent,
    field: CycloField,
}

impl SigmaAction {
    pub fn field(&self) -> &CycloField {
        &self.field
    }

    pub fn is_identity(&self) -> bool {
        self.j.rem_euclid(self.m as i64) == 0
    }
}

pub fn derive_sigma(rep: &UVRep, j: i64) -> Result<SigmaAction, GaloisError> {
    let m = rep.m();
    let field = CycloField::new(m)?;
    let j = j.rem_euclid(m as i64);
    let m_i = m as i64;
    let n_i = rep.N() as i64;
    let mut inner = CycloLaurent::monomial(&field, 0, 1, field.one());
    for (i, h) in rep.h().iter().enumerate() {
        if h.is_zero() {
            continue;
        }
        let i = i as i64;
        let c = field.one().add(&field.zeta_pow(j * (m_i - i)).neg()).scale(h);
        // u^(N-i) = w^(i-N)
        inner = inner.add(&CycloLaurent::monomial(&field, i - n_i, 0, c));
    }
    let gamma_image = inner.scale(&field.zeta_pow(j * (n_i - m_i)));
    Ok(SigmaAction { m, j, gamma_image, field })
}

/// Applies the action to an exact expression.
pub fn apply_sigma_cyclo(action: &SigmaAction, expr: &CycloLaurent) -> Result<CycloLaurent, GaloisError> {
    if expr.field.m != action.m {
        return Err(GaloisError::OrderMismatch(expr.field.m, action.m));
    }
    let field = &action.field;
    let gamma_pows: Vec<CycloLaurent> =
        (0..=expr.max_gamma_degree()).map(|p| action.gamma_image.pow(p)).collect();
    let mut out = CycloLaurent::zero(field);
    for (&(w, g), c) in &expr.terms {
        // w -> zeta^(-j) w
        let coef = field.mul(c, &field.zeta_pow(-action.j * w));
        let term = gamma_pows[g as usize].mul(&CycloLaurent::monomial(field, w, 0, coef));
        out = out.add(&term);
    }
    Ok(out)
}

pub fn apply_sigma(action: &SigmaAction, expr: &LaurentGamma) -> Result<CycloLaurent, GaloisError> {
    apply_sigma_cyclo(action, &CycloLaurent::from_series(&action.field, expr)?)
}

/// Float version of the action at a point: `(gamma, u) -> (sigma gamma, zeta^j u)`.
/// Works for every order `m`.
pub fn sigma_point(rep: &UVRep, j: i64, gamma: CF, u: CF) -> (CF, CF) {
    let m = rep.m() as i64;
    let n = rep.N() as i64;
    let zeta = |k: i64| CF::from_polar(1.0, 2.0 * PI * (k.rem_euclid(m)) as f64 / m as f64);
    let mut inner = gamma;
    for (i, h) in rep.h().iter().enumerate() {
        let i = i as i64;
        inner += rat_to_cf(h) * (CF::one() - zeta(j * (m - i))) * u.powi((n - i) as i32);
    }
    (zeta(j * (n - m)) * inner, zeta(j) * u)
}

/// Checks that `a` and `b` are fixed by the action and that
/// `sigma(chi1) = zeta^(-jK) chi1`, `sigma(psi1) = zeta^(-jK) psi1` with `K = L - m`.
pub fn check_equivariance(exp: &ABExpansion, rep: &UVRep, action: &SigmaAction) -> Result<Verification, GaloisError> {
    let (chi1, psi1) = chi_psi(exp);
    let k = rep.l() - rep.m() as i64;
    let field = &action.field;
    let twist = field.zeta_pow(-action.j * k);
    let mut notes = vec![
        format!("m = {}, j = {}, K = {k}", action.m, action.j),
        format!("sigma(gamma) = {}", action.gamma_image),
    ];
    let mut residuals = Vec::new();
    for (name, s, factor) in
        [("a", &exp.a, field.one()), ("b", &exp.b, field.one()), ("chi1", &chi1, twist.clone()), ("psi1", &psi1, twist)]
    {
        let image = apply_sigma(action, s)?;
        let residual = image.sub(&CycloLaurent::from_series(field, s)?.scale(&factor));
        notes.push(format!("sigma({name}) = {image}"));
        if !residual.is_zero() {
            residuals.push(format!("{name}: {residual}"));
        }
    }
    let status = if residuals.is_empty() { Status::Pass } else { Status::Fail };
    Ok(Verification {
        identity: "galois".into(),
        status,
        residual: if residuals.is_empty() { "0".into() } else { residuals.join("; ") },
        notes,
    })
}
