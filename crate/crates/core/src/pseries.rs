//! Truncated Laurent series in one formal variable whose coefficients are
//! polynomials in auxiliary parameters.
//!
//! A series stores its known coefficients together with an explicit
//! truncation order: `trunc = Some(t)` means every coefficient of exponent
//! `<= t` is known (absent ones are zero) and nothing is known beyond `t`;
//! `trunc = None` marks an exact, finite series. Orders propagate
//! pessimistically through every operation. Operations that are asked for
//! more precision than their inputs carry fail with
//! [`PSeriesError::InsufficientPrecision`] instead of padding with zeros.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::algebra::Algebra;
use crate::poly::Poly;
use crate::rat::{fmt_rat, rat_nth_root, rat_to_cf, Rat, CF};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PSeriesError {
    #[error("parameter arity mismatch: {left} vs {right}")]
    ParamArityMismatch { left: usize, right: usize },
    #[error("inner series of a composition must have positive valuation")]
    InnerNotPositiveValuation,
    #[error("outer series of a composition must have nonnegative valuation")]
    OuterNegativeValuation,
    #[error("series is not revertible: {0}")]
    NotRevertible(&'static str),
    #[error("series is not a unit (needs valuation 0 and a nonzero constant leading coefficient)")]
    NotUnit,
    #[error("valuation {valuation} is not divisible by {m}")]
    ValuationNotDivisible { valuation: i64, m: u32 },
    #[error("leading coefficient is not an exact rational power")]
    LeadingNotPerfectPower,
    #[error("requested order {requested} exceeds the available order {available}")]
    InsufficientPrecision { requested: i64, available: i64 },
    #[error("division by a series with unknown or zero leading term")]
    DivisionByZeroValuation,
}

#[derive(Clone, PartialEq, Eq)]
pub struct PSeries {
    param_arity: usize,
    coeffs: BTreeMap<i64, Poly>,
    trunc: Option<i64>,
}

fn min_order(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl PSeries {
    pub fn zero(param_arity: usize) -> Self {
        PSeries { param_arity, coeffs: BTreeMap::new(), trunc: None }
    }

    pub fn one(param_arity: usize) -> Self {
        Self::constant(Poly::one(param_arity))
    }

    pub fn constant(c: Poly) -> Self {
        Self::monomial(0, c)
    }

    pub fn constant_rat(param_arity: usize, c: Rat) -> Self {
        Self::constant(Poly::constant(param_arity, c))
    }

    /// The formal variable itself.
    pub fn var(param_arity: usize) -> Self {
        Self::monomial(1, Poly::one(param_arity))
    }

    pub fn monomial(exp: i64, c: Poly) -> Self {
        let param_arity = c.arity();
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(exp, c);
        }
        PSeries { param_arity, coeffs, trunc: None }
    }

    /// Builds a series from (exponent, coefficient) pairs; repeated exponents add up.
    pub fn from_coeffs<I>(param_arity: usize, coeffs: I, trunc: Option<i64>) -> Result<Self, PSeriesError>
    where
        I: IntoIterator<Item = (i64, Poly)>,
    {
        let mut s = PSeries::zero(param_arity);
        for (k, c) in coeffs {
            if c.arity() != param_arity {
                return Err(PSeriesError::ParamArityMismatch { left: param_arity, right: c.arity() });
            }
            s.add_coeff(k, c);
        }
        Ok(s.with_trunc(trunc))
    }

    /// Series with constant rational coefficients.
    pub fn from_rats<I>(param_arity: usize, coeffs: I, trunc: Option<i64>) -> Self
    where
        I: IntoIterator<Item = (i64, Rat)>,
    {
        Self::from_coeffs(param_arity, coeffs.into_iter().map(|(k, c)| (k, Poly::constant(param_arity, c))), trunc)
            .expect("constant coefficients share the parameter arity")
    }

    fn add_coeff(&mut self, k: i64, c: Poly) {
        if c.is_zero() {
            return;
        }
        if let Some(t) = self.trunc {
            if k > t {
                return;
            }
        }
        match self.coeffs.remove(&k) {
            Some(old) => {
                let sum = &old + &c;
                if !sum.is_zero() {
                    self.coeffs.insert(k, sum);
                }
            }
            None => {
                self.coeffs.insert(k, c);
            }
        }
    }

    /// Lowers the truncation order to `min(trunc, order)`; `None` keeps it.
    pub fn with_trunc(mut self, order: Option<i64>) -> Self {
        self.trunc = min_order(self.trunc, order);
        if let Some(t) = self.trunc {
            self.coeffs.retain(|&k, _| k <= t);
        }
        self
    }

    pub fn truncate(&self, order: i64) -> Self {
        self.clone().with_trunc(Some(order))
    }

    /// Forgets the truncation marker, declaring the known terms to be exact.
    pub fn into_exact(mut self) -> Self {
        self.trunc = None;
        self
    }

    pub fn param_arity(&self) -> usize {
        self.param_arity
    }

    pub fn trunc(&self) -> Option<i64> {
        self.trunc
    }

    pub fn is_exact(&self) -> bool {
        self.trunc.is_none()
    }

    /// Lowest exponent with a known nonzero coefficient.
    pub fn valuation(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    /// Highest stored exponent.
    pub fn top_exponent(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// Lower bound on the true valuation: `None` stands for +infinity (exact zero).
    fn val_bound(&self) -> Option<i64> {
        self.valuation().or(self.trunc.map(|t| t + 1))
    }

    /// True when no known coefficient is nonzero (a truncated tail may still hide terms).
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (i64, &Poly)> {
        self.coeffs.iter().map(|(&k, c)| (k, c))
    }

    /// Coefficient of `s^k`; `None` when `k` lies beyond the truncation order.
    pub fn coeff(&self, k: i64) -> Option<Poly> {
        match self.trunc {
            Some(t) if k > t => None,
            _ => Some(self.coeff_or_zero(k)),
        }
    }

    pub fn coeff_or_zero(&self, k: i64) -> Poly {
        self.coeffs.get(&k).cloned().unwrap_or_else(|| Poly::zero(self.param_arity))
    }

    fn check(&self, other: &PSeries) -> Result<(), PSeriesError> {
        if self.param_arity != other.param_arity {
            return Err(PSeriesError::ParamArityMismatch { left: self.param_arity, right: other.param_arity });
        }
        Ok(())
    }

    pub fn add(&self, other: &PSeries) -> Result<PSeries, PSeriesError> {
        self.check(other)?;
        let mut out = self.clone().with_trunc(other.trunc);
        for (&k, c) in &other.coeffs {
            out.add_coeff(k, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &PSeries) -> Result<PSeries, PSeriesError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> PSeries {
        PSeries {
            param_arity: self.param_arity,
            coeffs: self.coeffs.iter().map(|(&k, c)| (k, -c)).collect(),
            trunc: self.trunc,
        }
    }

    pub fn mul(&self, other: &PSeries) -> Result<PSeries, PSeriesError> {
        self.check(other)?;
        Ok(self.mul_upto(other, None))
    }

    /// Product, computing only exponents up to `cap` (when given).
    fn mul_upto(&self, other: &PSeries, cap: Option<i64>) -> PSeries {
        // An exact zero factor annihilates any tail.
        if (self.is_exact() && self.is_zero()) || (other.is_exact() && other.is_zero()) {
            return PSeries::zero(self.param_arity);
        }
        let t1 = self.trunc.map(|t| t + other.val_bound().expect("nonzero or truncated"));
        let t2 = other.trunc.map(|t| t + self.val_bound().expect("nonzero or truncated"));
        let trunc = min_order(min_order(t1, t2), cap);
        let mut acc: BTreeMap<i64, Poly> = BTreeMap::new();
        for (&i, a) in &self.coeffs {
            for (&j, b) in &other.coeffs {
                let k = i + j;
                if trunc.is_some_and(|t| k > t) {
                    // Coefficients are sorted, so later j only grow.
                    break;
                }
                let prod = a * b;
                match acc.remove(&k) {
                    Some(old) => {
                        let s = &old + &prod;
                        if !s.is_zero() {
                            acc.insert(k, s);
                        }
                    }
                    None => {
                        if !prod.is_zero() {
                            acc.insert(k, prod);
                        }
                    }
                }
            }
        }
        PSeries { param_arity: self.param_arity, coeffs: acc, trunc }
    }

    pub fn scale(&self, c: &Rat) -> PSeries {
        if c.is_zero() {
            return PSeries { param_arity: self.param_arity, coeffs: BTreeMap::new(), trunc: self.trunc };
        }
        PSeries {
            param_arity: self.param_arity,
            coeffs: self.coeffs.iter().map(|(&k, p)| (k, p.scale(c))).collect(),
            trunc: self.trunc,
        }
    }

    pub fn scale_poly(&self, c: &Poly) -> Result<PSeries, PSeriesError> {
        if c.arity() != self.param_arity {
            return Err(PSeriesError::ParamArityMismatch { left: self.param_arity, right: c.arity() });
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|(&k, p)| (k, p * c))
            .filter(|(_, p)| !p.is_zero())
            .collect();
        Ok(PSeries { param_arity: self.param_arity, coeffs, trunc: self.trunc })
    }

    /// Multiplication by `s^k`.
    pub fn shift(&self, k: i64) -> PSeries {
        PSeries {
            param_arity: self.param_arity,
            coeffs: self.coeffs.iter().map(|(&e, c)| (e + k, c.clone())).collect(),
            trunc: self.trunc.map(|t| t + k),
        }
    }

    pub fn pow(&self, e: u32) -> PSeries {
        self.pow_u32(e)
    }

    /// `d/ds`.
    pub fn derivative(&self) -> PSeries {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(&k, _)| k != 0)
            .map(|(&k, c)| (k - 1, c.scale(&Rat::from_integer(k.into()))))
            .collect();
        PSeries { param_arity: self.param_arity, coeffs, trunc: self.trunc.map(|t| t - 1) }
    }

    /// Coefficientwise partial derivative in parameter `index`.
    pub fn param_partial(&self, index: usize) -> PSeries {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(&k, c)| (k, c.partial(index).expect("parameter index in range")))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        PSeries { param_arity: self.param_arity, coeffs, trunc: self.trunc }
    }

    /// Numerical value of the known part at parameter values `params` and variable `s`.
    pub fn eval(&self, params: &[CF], s: CF) -> CF {
        self.coeffs
            .iter()
            .map(|(&k, c)| c.eval(params).expect("parameter arity") * s.powi(k as i32))
            .sum()
    }

    fn leading_constant(&self) -> Option<(i64, Rat)> {
        let (&k, c) = self.coeffs.iter().next()?;
        let v = c.as_constant()?;
        (!v.is_zero()).then_some((k, v))
    }

    /// `outer(inner)`: substitutes `inner` for the variable of `outer`.
    pub fn compose(outer: &PSeries, inner: &PSeries) -> Result<PSeries, PSeriesError> {
        outer.check(inner)?;
        let vi = inner.val_bound();
        if vi.is_some_and(|v| v < 1) {
            return Err(PSeriesError::InnerNotPositiveValuation);
        }
        if outer.valuation().is_some_and(|v| v < 0) {
            return Err(PSeriesError::OuterNegativeValuation);
        }
        // Truncation of the outer series: the tail O(s^(To+1)) becomes O(z^((To+1)*vi)).
        let from_outer = match (outer.trunc, vi) {
            (Some(to), Some(v)) => Some((to + 1) * v - 1),
            _ => None,
        };
        // Truncation of the inner series: s^k (I + d)^k differs from I^k at order (k-1)*vi + Ti + 1.
        let kmin = outer.coeffs.keys().copied().find(|&k| k >= 1);
        let from_inner = match (inner.trunc, kmin) {
            (Some(ti), Some(k)) => Some((k - 1) * vi.unwrap_or(0) + ti),
            _ => None,
        };
        let trunc = min_order(from_outer, from_inner);

        let pa = outer.param_arity;
        let mut acc = PSeries::zero(pa).with_trunc(trunc);
        let mut power = PSeries::one(pa);
        let mut current = 0i64;
        for (&k, c) in &outer.coeffs {
            if let (Some(t), Some(v)) = (trunc, vi) {
                if k * v > t {
                    break;
                }
            }
            while current < k {
                power = power.mul_upto(inner, trunc);
                current += 1;
            }
            let term = power.scale_poly(c)?;
            acc = acc.add(&term)?;
        }
        Ok(acc.with_trunc(trunc))
    }

    /// Multiplicative inverse of a unit (valuation 0, nonzero constant
    /// leading coefficient) up to `order`.
    pub fn invert_unit(&self, order: i64) -> Result<PSeries, PSeriesError> {
        let (v, c0) = self.leading_constant().ok_or(PSeriesError::NotUnit)?;
        if v != 0 {
            return Err(PSeriesError::NotUnit);
        }
        if let Some(t) = self.trunc {
            if t < order {
                return Err(PSeriesError::InsufficientPrecision { requested: order, available: t });
            }
        }
        Ok(self.invert_unit_unchecked(&c0, order))
    }

    fn invert_unit_unchecked(&self, c0: &Rat, order: i64) -> PSeries {
        let pa = self.param_arity;
        if self.is_exact() && self.coeffs.len() == 1 {
            return PSeries::constant_rat(pa, c0.recip());
        }
        let inv0 = c0.recip();
        let mut b: Vec<Poly> = vec![Poly::constant(pa, inv0.clone())];
        for n in 1..=order.max(0) {
            let mut s = Poly::zero(pa);
            for (&k, a) in self.coeffs.range(1..=n) {
                s = &s + &(a * &b[(n - k) as usize]);
            }
            b.push(s.scale(&-inv0.clone()));
        }
        PSeries::from_coeffs(pa, b.into_iter().enumerate().map(|(k, c)| (k as i64, c)), Some(order))
            .expect("same parameter arity")
    }

    /// Laurent quotient `self / den` with coefficients up to `order`
    /// (fewer if the inputs do not carry that much information).
    pub fn div(&self, den: &PSeries, order: i64) -> Result<PSeries, PSeriesError> {
        self.check(den)?;
        let (d, c0) = den.leading_constant().ok_or(PSeriesError::DivisionByZeroValuation)?;
        let unit = den.shift(-d);
        let num_val = self.val_bound().unwrap_or(order + d);
        let want = order + d - num_val;
        let avail = unit.trunc.map_or(want, |t| t.min(want));
        let inv = unit.invert_unit_unchecked(&c0, avail.max(0));
        let inv = if unit.is_exact() && unit.coeffs.len() == 1 { inv } else { inv.with_trunc(Some(avail)) };
        Ok(self.mul_upto(&inv, Some(order + d)).shift(-d).with_trunc(Some(order)).exact_if(self, den))
    }

    // Division of exact series by an exact monomial stays exact.
    fn exact_if(self, num: &PSeries, den: &PSeries) -> PSeries {
        if num.is_exact() && den.is_exact() && den.coeffs.len() == 1 {
            let (&d, c) = den.coeffs.iter().next().unwrap();
            let c = c.as_constant().expect("checked constant");
            return num.shift(-d).scale(&c.recip());
        }
        self
    }

    /// Compositional inverse of a series `a(s) = c1 s + c2 s^2 + ..` with
    /// nonzero constant `c1`, up to `order`, by Lagrange inversion:
    /// `[z^n] b = (1/n) [s^(n-1)] (s / a(s))^n`.
    pub fn revert(&self, order: i64) -> Result<PSeries, PSeriesError> {
        let (v, c1) = self.leading_constant().ok_or(PSeriesError::NotRevertible(
            "leading coefficient must be a nonzero constant",
        ))?;
        if v != 1 {
            return Err(PSeriesError::NotRevertible("valuation must be exactly 1"));
        }
        let pa = self.param_arity;
        if self.is_exact() && self.coeffs.len() == 1 {
            return Ok(PSeries::monomial(1, Poly::constant(pa, c1.recip())));
        }
        if let Some(t) = self.trunc {
            if t < order {
                return Err(PSeriesError::InsufficientPrecision { requested: order, available: t });
            }
        }
        if order < 1 {
            return Ok(PSeries::zero(pa).with_trunc(Some(order)));
        }
        let phi = self.shift(-1).invert_unit_unchecked(&c1, order - 1);
        let mut out = PSeries::zero(pa).with_trunc(Some(order));
        let mut phi_pow = PSeries::one(pa);
        for n in 1..=order {
            phi_pow = phi_pow.mul_upto(&phi, Some(order - 1));
            let c = phi_pow.coeff_or_zero(n - 1).scale(&Rat::new(1.into(), n.into()));
            out.add_coeff(n, c);
        }
        Ok(out)
    }

    /// Principal `m`-th root up to `order`.
    pub fn root(&self, m: u32, order: i64) -> Result<PSeries, PSeriesError> {
        assert!(m >= 1, "root order must be positive");
        let (v, c) = match self.coeffs.iter().next() {
            Some((&k, c)) => (k, c),
            None => return Err(PSeriesError::DivisionByZeroValuation),
        };
        if v % m as i64 != 0 {
            return Err(PSeriesError::ValuationNotDivisible { valuation: v, m });
        }
        let c = c.as_constant().ok_or(PSeriesError::LeadingNotPerfectPower)?;
        let r0 = rat_nth_root(&c, m).ok_or(PSeriesError::LeadingNotPerfectPower)?;
        let pa = self.param_arity;
        let vr = v / m as i64;
        if self.is_exact() && self.coeffs.len() == 1 {
            return Ok(PSeries::monomial(vr, Poly::constant(pa, r0)));
        }
        if let Some(t) = self.trunc {
            let available = t - v + vr;
            if available < order {
                return Err(PSeriesError::InsufficientPrecision { requested: order, available });
            }
        }
        // a = c s^v (1 + t), root = r0 s^(v/m) (1 + t)^(1/m)
        let rel_order = order - vr;
        let t = self.shift(-v).scale(&c.recip()).sub(&PSeries::one(pa))?.with_trunc(Some(rel_order));
        let exponent = Rat::new(1.into(), (m as i64).into());
        let mut binom = Rat::one();
        let mut acc = PSeries::one(pa).with_trunc(Some(rel_order));
        let mut t_pow = PSeries::one(pa);
        for k in 1..=rel_order.max(0) {
            binom = binom * (&exponent - Rat::from_integer((k - 1).into())) / Rat::from_integer(k.into());
            t_pow = t_pow.mul_upto(&t, Some(rel_order));
            if t_pow.is_zero() && t_pow.is_exact() {
                break;
            }
            acc = acc.add(&t_pow.scale(&binom))?;
        }
        Ok(acc.scale(&r0).shift(vr).with_trunc(Some(order)))
    }

    pub fn display_with<'a>(&'a self, var: &'a str, params: &'a [String]) -> SeriesDisplay<'a> {
        SeriesDisplay { series: self, var, params }
    }
}

impl Algebra for PSeries {
    fn zero_like(&self) -> Self {
        PSeries::zero(self.param_arity)
    }
    fn one_like(&self) -> Self {
        PSeries::one(self.param_arity)
    }
    fn add_ref(&self, other: &Self) -> Self {
        self.add(other).expect("parameter arity mismatch in series algebra")
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self.mul(other).expect("parameter arity mismatch in series algebra")
    }
    fn scale_rat(&self, c: &Rat) -> Self {
        self.scale(c)
    }
}

/// Text form `c_v*s^v + .. + O(s^(t+1))`, ascending exponents.
pub struct SeriesDisplay<'a> {
    series: &'a PSeries,
    var: &'a str,
    params: &'a [String],
}

impl fmt::Display for SeriesDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.series;
        let var_pow = |k: i64| -> String {
            match k {
                0 => String::new(),
                1 => self.var.to_string(),
                _ => format!("{}^{}", self.var, k),
            }
        };
        let mut first = true;
        for (&k, c) in &s.coeffs {
            let mono = var_pow(k);
            let (neg, body) = match c.as_constant() {
                Some(v) => {
                    let mag = v.abs();
                    let body = if mono.is_empty() {
                        fmt_rat(&mag)
                    } else if mag.is_one() {
                        mono.clone()
                    } else {
                        format!("{}*{}", fmt_rat(&mag), mono)
                    };
                    (v.is_negative(), body)
                }
                None if c.num_terms() == 1 => {
                    let (_, coef) = c.terms().next().unwrap();
                    let neg = coef.is_negative();
                    let text = if neg { c.neg_ref() } else { c.clone() };
                    let text = text.display_with(self.params).to_string();
                    let body = if mono.is_empty() { text } else { format!("{text}*{mono}") };
                    (neg, body)
                }
                None => {
                    let text = c.display_with(self.params).to_string();
                    let body = if mono.is_empty() { format!("({text})") } else { format!("({text})*{mono}") };
                    (false, body)
                }
            };
            if first {
                write!(f, "{}{}", if neg { "-" } else { "" }, body)?;
                first = false;
            } else {
                write!(f, " {} {}", if neg { "-" } else { "+" }, body)?;
            }
        }
        if let Some(t) = s.trunc {
            let tail = format!("O({})", if t + 1 == 1 { self.var.to_string() } else { format!("{}^{}", self.var, t + 1) });
            if first {
                write!(f, "{tail}")?;
            } else {
                write!(f, " + {tail}")?;
            }
        } else if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Display for PSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = (1..=self.param_arity).map(|i| format!("p{i}")).collect();
        write!(f, "{}", self.display_with("s", &params))
    }
}

impl fmt::Debug for PSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PSeries({self})")
    }
}

/// Numerical value of a constant-coefficient series at `s` (helper for tests and demos).
pub fn eval_constant_series(series: &PSeries, s: f64) -> f64 {
    series
        .coeffs()
        .map(|(k, c)| rat_to_cf(&c.as_constant().unwrap_or_else(Rat::zero)).re * s.powi(k as i32))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, ratio};

    fn e() -> Poly {
        Poly::var(1, 0).unwrap()
    }

    fn c(v: i64) -> Poly {
        Poly::constant(1, rat(v))
    }

    fn names() -> Vec<String> {
        vec!["e".to_string()]
    }

    /// `z = s + e s^2 + s^3`.
    fn t_of_s() -> PSeries {
        PSeries::from_coeffs(1, [(1, c(1)), (2, e()), (3, c(1))], None).unwrap()
    }

    #[test]
    fn square_of_variable() {
        let s = PSeries::var(1).truncate(5);
        let sq = s.mul(&s).unwrap();
        assert_eq!(sq.coeff_or_zero(2), c(1));
        assert_eq!(sq.trunc(), Some(6));
        assert_eq!(sq.valuation(), Some(2));
    }

    #[test]
    fn difference_of_squares() {
        let a = PSeries::from_coeffs(1, [(0, c(1)), (1, e())], None).unwrap();
        let b = PSeries::from_coeffs(1, [(0, c(1)), (1, -&e())], None).unwrap();
        let p = a.mul(&b).unwrap();
        assert_eq!(p.display_with("s", &names()).to_string(), "1 - e^2*s^2");
    }

    #[test]
    fn blowup_chain_product() {
        let w = PSeries::from_coeffs(1, [(0, c(1)), (1, e()), (2, c(1))], None).unwrap();
        let u_minus_2 = PSeries::var(1);
        assert_eq!(w.mul(&u_minus_2).unwrap(), t_of_s());
    }

    #[test]
    fn reversion_of_worked_example() {
        let s_of_z = t_of_s().revert(3).unwrap();
        let two_e2_minus_1 = &e().pow(2).scale(&rat(2)) - &c(1);
        let expected = PSeries::from_coeffs(1, [(1, c(1)), (2, -&e()), (3, two_e2_minus_1)], Some(3)).unwrap();
        assert_eq!(s_of_z, expected);
        assert_eq!(s_of_z.display_with("z", &names()).to_string(), "z - e*z^2 + (2*e^2 - 1)*z^3 + O(z^4)");
        // back-substitution
        let back = PSeries::compose(&t_of_s(), &s_of_z).unwrap();
        assert_eq!(back, PSeries::var(1).truncate(3));
    }

    #[test]
    fn reversion_trivial_cases() {
        assert_eq!(PSeries::var(1).revert(5).unwrap(), PSeries::var(1));
        let two_s = PSeries::var(1).scale(&rat(2));
        assert_eq!(two_s.revert(5).unwrap(), PSeries::var(1).scale(&ratio(1, 2)));
        assert!(matches!(PSeries::one(1).revert(3), Err(PSeriesError::NotRevertible(_))));
        let non_unit = PSeries::from_coeffs(1, [(1, e()), (2, c(1))], None).unwrap();
        assert!(matches!(non_unit.revert(3), Err(PSeriesError::NotRevertible(_))));
        assert!(matches!(
            t_of_s().truncate(3).revert(5),
            Err(PSeriesError::InsufficientPrecision { requested: 5, available: 3 })
        ));
    }

    #[test]
    fn compose_worked_example() {
        let x2 = PSeries::from_coeffs(
            1,
            [(1, c(2)), (2, &c(1) + &e().scale(&rat(2))), (3, &e() + &c(2)), (4, c(1))],
            None,
        )
        .unwrap();
        let s_of_z = t_of_s().revert(3).unwrap();
        let composed = PSeries::compose(&x2, &s_of_z).unwrap();
        assert_eq!(composed.display_with("z", &names()).to_string(), "2*z + z^2 - e*z^3 + O(z^4)");
    }

    #[test]
    fn compose_trivial_cases() {
        let p = PSeries::from_coeffs(1, [(1, c(1)), (2, e())], Some(4)).unwrap();
        assert_eq!(PSeries::compose(&PSeries::var(1), &p).unwrap(), p);
        let inner = PSeries::from_rats(1, [(1, rat(1)), (2, rat(1))], None);
        let sq = PSeries::compose(&PSeries::var(1).pow(2), &inner).unwrap();
        assert_eq!(sq, PSeries::from_rats(1, [(2, rat(1)), (3, rat(2)), (4, rat(1))], None));
        assert_eq!(
            PSeries::compose(&p, &PSeries::one(1)),
            Err(PSeriesError::InnerNotPositiveValuation)
        );
    }

    #[test]
    fn geometric_inverse() {
        let one_minus_x = PSeries::from_rats(1, [(0, rat(1)), (1, rat(-1))], None);
        let inv = one_minus_x.invert_unit(5).unwrap();
        for k in 0..=5 {
            assert_eq!(inv.coeff(k), Some(c(1)));
        }
        assert_eq!(inv.coeff(6), None);
        assert_eq!(PSeries::one(1).invert_unit(4).unwrap(), PSeries::one(1));
        assert_eq!(PSeries::var(1).invert_unit(3), Err(PSeriesError::NotUnit));
    }

    #[test]
    fn square_root_with_laurent_valuation() {
        // u^2 (1 - eps u^-3) in w = 1/u
        let a = PSeries::from_coeffs(1, [(-2, c(1)), (1, -&e())], None).unwrap();
        let r = a.root(2, 4).unwrap();
        assert_eq!(r.coeff_or_zero(-1), c(1));
        assert_eq!(r.coeff_or_zero(2), e().scale(&ratio(-1, 2)));
        let back = r.mul(&r).unwrap();
        assert_eq!(back.coeff_or_zero(-2), c(1));
        assert_eq!(back.coeff_or_zero(1), -&e());
        for k in [-1, 0, 2, 3] {
            assert!(back.coeff_or_zero(k).is_zero());
        }
    }

    #[test]
    fn root_errors_and_trivia() {
        let s2 = PSeries::var(1).pow(2);
        assert_eq!(s2.root(2, 5).unwrap(), PSeries::var(1));
        assert_eq!(
            PSeries::var(1).root(2, 3),
            Err(PSeriesError::ValuationNotDivisible { valuation: 1, m: 2 })
        );
        let two = PSeries::from_rats(1, [(0, rat(2)), (1, rat(1))], None);
        assert_eq!(two.root(2, 3), Err(PSeriesError::LeadingNotPerfectPower));
    }

    #[test]
    fn laurent_division() {
        let z = PSeries::var(1);
        let den = PSeries::from_coeffs(1, [(1, c(1)), (2, -&e())], None).unwrap();
        let q = z.div(&den, 3).unwrap();
        // 1/(1 - e z) = 1 + e z + e^2 z^2 + ..
        assert_eq!(q.coeff_or_zero(0), c(1));
        assert_eq!(q.coeff_or_zero(2), e().pow(2));
        assert_eq!(q.trunc(), Some(3));
        let exact = den.div(&z, 3).unwrap();
        assert!(exact.is_exact());
        assert_eq!(exact.coeff_or_zero(1), -&e());
    }

    #[test]
    fn derivative_and_param_partial() {
        let p = PSeries::from_coeffs(1, [(-2, e().pow(2)), (0, e()), (3, c(4))], Some(5)).unwrap();
        let d = p.derivative();
        assert_eq!(d.coeff_or_zero(-3), e().pow(2).scale(&rat(-2)));
        assert_eq!(d.coeff_or_zero(2), c(12));
        assert_eq!(d.trunc(), Some(4));
        let g = p.param_partial(0);
        assert_eq!(g.coeff_or_zero(-2), e().scale(&rat(2)));
        assert_eq!(g.coeff_or_zero(0), c(1));
        assert!(g.coeff_or_zero(3).is_zero());
    }

    #[test]
    fn mismatched_params() {
        let a = PSeries::one(1);
        let b = PSeries::one(2);
        assert!(matches!(a.add(&b), Err(PSeriesError::ParamArityMismatch { .. })));
        assert!(matches!(a.mul(&b), Err(PSeriesError::ParamArityMismatch { .. })));
    }
}
