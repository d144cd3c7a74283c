//! Exact multivariate polynomials over the rationals.
//!
//! A [`Poly`] is a canonical table from exponent vectors to nonzero
//! rational coefficients. The arity (number of variables) is fixed at
//! construction and every operation between two polynomials checks it.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::algebra::Algebra;
use crate::rat::{fmt_rat, rat_to_cf, Rat, CF};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("arity mismatch: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },
    #[error("variable index {index} out of range for arity {arity}")]
    IndexOutOfRange { index: usize, arity: usize },
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    arity: usize,
    terms: BTreeMap<Vec<u32>, Rat>,
}

impl Poly {
    pub fn zero(arity: usize) -> Self {
        Poly { arity, terms: BTreeMap::new() }
    }

    pub fn one(arity: usize) -> Self {
        Self::constant(arity, Rat::one())
    }

    pub fn constant(arity: usize, c: Rat) -> Self {
        Self::monomial(arity, vec![0; arity], c)
    }

    /// The variable `x_{index+1}` (indices are zero-based).
    pub fn var(arity: usize, index: usize) -> Result<Self, PolyError> {
        if index >= arity {
            return Err(PolyError::IndexOutOfRange { index, arity });
        }
        let mut exps = vec![0; arity];
        exps[index] = 1;
        Ok(Self::monomial(arity, exps, Rat::one()))
    }

    /// # Panics
    /// If `exps.len() != arity`.
    pub fn monomial(arity: usize, exps: Vec<u32>, c: Rat) -> Self {
        assert_eq!(exps.len(), arity, "exponent vector length must equal arity");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        Poly { arity, terms }
    }

    /// Builds a polynomial from (exponents, coefficient) pairs, summing repeats.
    pub fn from_terms<I>(arity: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Vec<u32>, Rat)>,
    {
        let mut p = Poly::zero(arity);
        for (exps, c) in terms {
            if exps.len() != arity {
                return Err(PolyError::ArityMismatch { left: arity, right: exps.len() });
            }
            p.add_term(exps, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, exps: Vec<u32>, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exps: &[u32]) -> Rat {
        self.terms.get(exps).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn degree_in(&self, index: usize) -> u32 {
        self.terms.keys().map(|e| e[index]).max().unwrap_or(0)
    }

    /// The constant value, if the polynomial has no non-constant terms.
    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.iter().all(|&x| x == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    fn check(&self, other: &Poly) -> Result<(), PolyError> {
        if self.arity != other.arity {
            Err(PolyError::ArityMismatch { left: self.arity, right: other.arity })
        } else {
            Ok(())
        }
    }

    pub fn checked_add(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.check(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.checked_add(&other.neg_ref())
    }

    pub fn checked_mul(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.check(other)?;
        let mut out = Poly::zero(self.arity);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn neg_ref(&self) -> Poly {
        Poly {
            arity: self.arity,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.arity);
        }
        Poly {
            arity: self.arity,
            terms: self.terms.iter().map(|(e, k)| (e.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        self.pow_u32(e)
    }

    /// Formal partial derivative in the variable with zero-based `index`.
    pub fn partial(&self, index: usize) -> Result<Poly, PolyError> {
        if index >= self.arity {
            return Err(PolyError::IndexOutOfRange { index, arity: self.arity });
        }
        let mut out = Poly::zero(self.arity);
        for (e, c) in &self.terms {
            if e[index] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[index] -= 1;
            out.add_term(e2, c * Rat::from_integer(e[index].into()));
        }
        Ok(out)
    }

    /// Evaluates at a complex point, using a per-variable power table.
    pub fn eval(&self, point: &[CF]) -> Result<CF, PolyError> {
        if point.len() != self.arity {
            return Err(PolyError::ArityMismatch { left: self.arity, right: point.len() });
        }
        let powers = power_table(point, |i| self.degree_in(i), CF::new(1.0, 0.0), |a, b| a * b);
        let mut acc = CF::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = rat_to_cf(c);
            for (i, &k) in e.iter().enumerate() {
                t *= powers[i][k as usize];
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Exact evaluation at a rational point, by Horner's rule in the last variable.
    pub fn eval_rat(&self, point: &[Rat]) -> Result<Rat, PolyError> {
        if point.len() != self.arity {
            return Err(PolyError::ArityMismatch { left: self.arity, right: point.len() });
        }
        Ok(horner_rat(&self.terms, point))
    }

    /// Substitutes `point[i]` for variable `i`, in any commutative algebra.
    ///
    /// `one` is the multiplicative identity of the target algebra; it is
    /// needed when the polynomial has arity zero or `point` is empty.
    pub fn substitute<A: Algebra>(&self, point: &[A], one: &A) -> Result<A, PolyError> {
        if point.len() != self.arity {
            return Err(PolyError::ArityMismatch { left: self.arity, right: point.len() });
        }
        let powers = power_table(point, |i| self.degree_in(i), one.clone(), |a, b| a.mul_ref(b));
        let mut acc = one.zero_like();
        for (e, c) in &self.terms {
            let mut t = one.scale_rat(c);
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = t.mul_ref(&powers[i][k as usize]);
                }
            }
            acc = acc.add_ref(&t);
        }
        Ok(acc)
    }

    /// Polynomial composition: replaces variable `i` by `polys[i]`.
    pub fn compose(&self, polys: &[Poly]) -> Result<Poly, PolyError> {
        let target = polys.first().map_or(self.arity, |p| p.arity);
        if let Some(bad) = polys.iter().find(|p| p.arity != target) {
            return Err(PolyError::ArityMismatch { left: target, right: bad.arity });
        }
        self.substitute(polys, &Poly::one(target))
    }

    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            arity: self.arity,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), rat_to_cf(c))).collect(),
        }
    }

    /// Renders with the given variable names (defaults are `x1..xn`).
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, names: Some(names) }
    }
}

fn power_table<T: Clone>(
    point: &[T],
    degree: impl Fn(usize) -> u32,
    one: T,
    mul: impl Fn(&T, &T) -> T,
) -> Vec<Vec<T>> {
    point
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let d = degree(i) as usize;
            let mut row = Vec::with_capacity(d + 1);
            row.push(one.clone());
            for k in 1..=d {
                let next = mul(&row[k - 1], x);
                row.push(next);
            }
            row
        })
        .collect()
}

fn horner_rat(terms: &BTreeMap<Vec<u32>, Rat>, point: &[Rat]) -> Rat {
    let n = point.len();
    if n == 0 {
        return terms.values().next().cloned().unwrap_or_else(Rat::zero);
    }
    // Group by the exponent of the last variable, recurse on the rest.
    let mut groups: BTreeMap<u32, BTreeMap<Vec<u32>, Rat>> = BTreeMap::new();
    for (e, c) in terms {
        groups.entry(e[n - 1]).or_default().insert(e[..n - 1].to_vec(), c.clone());
    }
    let Some(&top) = groups.keys().next_back() else {
        return Rat::zero();
    };
    let x = &point[n - 1];
    let mut acc = Rat::zero();
    for k in (0..=top).rev() {
        acc *= x;
        if let Some(g) = groups.get(&k) {
            acc += horner_rat(g, &point[..n - 1]);
        }
    }
    acc
}

/// Float copy of a polynomial for hot-loop evaluation.
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    arity: usize,
    terms: Vec<(Vec<u32>, CF)>,
}

impl CompiledPoly {
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Caller guarantees `point.len() == arity`.
    pub fn eval(&self, point: &[CF]) -> CF {
        let mut acc = CF::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = *c;
            for (x, &k) in point.iter().zip(e) {
                match k {
                    0 => {}
                    1 => t *= x,
                    2 => t *= x * x,
                    _ => t *= x.powu(k),
                }
            }
            acc += t;
        }
        acc
    }
}

impl Algebra for Poly {
    fn zero_like(&self) -> Self {
        Poly::zero(self.arity)
    }
    fn one_like(&self) -> Self {
        Poly::one(self.arity)
    }
    fn add_ref(&self, other: &Self) -> Self {
        self.checked_add(other).expect("arity mismatch in polynomial algebra")
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self.checked_mul(other).expect("arity mismatch in polynomial algebra")
    }
    fn scale_rat(&self, c: &Rat) -> Self {
        self.scale(c)
    }
}

// Operator sugar. These panic on arity mismatch; use the checked_* methods
// where the arities are not already known to agree.
impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.add_ref(rhs)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self.checked_sub(rhs).expect("arity mismatch in polynomial subtraction")
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.mul_ref(rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.neg_ref()
    }
}

pub struct PolyDisplay<'a> {
    poly: &'a Poly,
    names: Option<&'a [String]>,
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.poly;
        if p.terms.is_empty() {
            return write!(f, "0");
        }
        let name = |i: usize| -> String {
            match self.names {
                Some(n) if i < n.len() => n[i].clone(),
                _ => format!("x{}", i + 1),
            }
        };
        // Descending total degree, then descending lexicographic exponents.
        let mut terms: Vec<_> = p.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        for (idx, (e, c)) in terms.into_iter().enumerate() {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| if k == 1 { name(i) } else { format!("{}^{}", name(i), k) })
                .collect();
            let neg = c.is_negative();
            let mag = c.abs();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            if mono.is_empty() {
                write!(f, "{}", fmt_rat(&mag))?;
            } else if mag.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{}*{}", fmt_rat(&mag), mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        PolyDisplay { poly: self, names: None }.fmt(f)
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[{}]({})", self.arity, self)
    }
}
