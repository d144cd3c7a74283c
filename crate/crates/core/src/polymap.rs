//! Polynomial self-maps of affine space: Jacobians, determinants, signed
//! minors, the Keller test and composition.

use std::fmt;

use thiserror::Error;

use crate::poly::{Poly, PolyError};

/// Largest dimension handled by cofactor (Laplace) expansion.
pub const MAX_LAPLACE_DIM: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("matrix is not square")]
    NotSquare,
    #[error("dimension {0} exceeds the Laplace expansion limit of {MAX_LAPLACE_DIM}")]
    TooLarge(usize),
    #[error("row/column index ({row}, {col}) out of range for dimension {dim}")]
    IndexOutOfRange { row: usize, col: usize, dim: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("map arity {arity} does not match its {components} components")]
    ComponentCount { arity: usize, components: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// `f = (f_1, .., f_n) : A^n -> A^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMap {
    components: Vec<Poly>,
    vars: Vec<String>,
}

impl PolyMap {
    pub fn new(components: Vec<Poly>) -> Result<Self, MapError> {
        let n = components.len();
        let vars = (1..=n).map(|i| format!("x{i}")).collect();
        Self::with_vars(components, vars)
    }

    pub fn with_vars(components: Vec<Poly>, vars: Vec<String>) -> Result<Self, MapError> {
        let n = components.len();
        if n == 0 || vars.len() != n {
            return Err(MapError::ComponentCount { arity: vars.len(), components: n });
        }
        if let Some(bad) = components.iter().find(|p| p.arity() != n) {
            return Err(PolyError::ArityMismatch { left: n, right: bad.arity() }.into());
        }
        Ok(PolyMap { components, vars })
    }

    pub fn identity(n: usize) -> Self {
        let comps = (0..n).map(|i| Poly::var(n, i).expect("index < n")).collect();
        Self::new(comps).expect("identity map is well formed")
    }

    pub fn arity(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Poly {
        &self.components[i]
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// `self ∘ inner`; the result keeps `inner`'s variable names.
    pub fn compose(&self, inner: &PolyMap) -> Result<PolyMap, MapError> {
        if self.arity() != inner.arity() {
            return Err(PolyError::ArityMismatch { left: self.arity(), right: inner.arity() }.into());
        }
        let comps = self
            .components
            .iter()
            .map(|p| p.compose(&inner.components))
            .collect::<Result<Vec<_>, _>>()?;
        PolyMap::with_vars(comps, inner.vars.clone())
    }

    pub fn jacobian(&self) -> PolyMatrix {
        let n = self.arity();
        let rows = self
            .components
            .iter()
            .map(|p| (0..n).map(|j| p.partial(j).expect("j < arity")).collect())
            .collect();
        PolyMatrix { rows }
    }

    /// `det J(f)`; only defined up to [`MAX_LAPLACE_DIM`] variables.
    pub fn jacobian_det(&self) -> Result<Poly, MatrixError> {
        self.jacobian().det()
    }

    /// True iff the Jacobian determinant is the constant polynomial 1.
    pub fn is_keller(&self) -> Result<bool, MatrixError> {
        Ok(self.jacobian_det()?.is_one())
    }
}

/// Square (usually) matrix of polynomials, stored by rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: Vec<Vec<Poly>>,
}

impl PolyMatrix {
    pub fn from_rows(rows: Vec<Vec<Poly>>) -> Self {
        PolyMatrix { rows }
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Poly::one(n) } else { Poly::zero(n) }).collect())
            .collect();
        PolyMatrix { rows }
    }

    pub fn rows(&self) -> &[Vec<Poly>] {
        &self.rows
    }

    pub fn entry(&self, i: usize, j: usize) -> &Poly {
        &self.rows[i][j]
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    fn square_dim(&self) -> Result<usize, MatrixError> {
        let n = self.rows.len();
        if n == 0 || self.rows.iter().any(|r| r.len() != n) {
            return Err(MatrixError::NotSquare);
        }
        Ok(n)
    }

    fn arity(&self) -> usize {
        self.rows[0][0].arity()
    }

    /// Exact determinant by cofactor expansion along the first row.
    pub fn det(&self) -> Result<Poly, MatrixError> {
        let n = self.square_dim()?;
        if n > MAX_LAPLACE_DIM {
            return Err(MatrixError::TooLarge(n));
        }
        let rows: Vec<usize> = (0..n).collect();
        let cols: Vec<usize> = (0..n).collect();
        Ok(self.laplace(&rows, &cols))
    }

    fn laplace(&self, rows: &[usize], cols: &[usize]) -> Poly {
        match rows.len() {
            0 => Poly::one(self.arity()),
            1 => self.rows[rows[0]][cols[0]].clone(),
            2 => {
                let a = &self.rows[rows[0]][cols[0]] * &self.rows[rows[1]][cols[1]];
                let b = &self.rows[rows[0]][cols[1]] * &self.rows[rows[1]][cols[0]];
                &a - &b
            }
            _ => {
                let r0 = rows[0];
                let sub_rows = &rows[1..];
                let mut acc = Poly::zero(self.arity());
                for (k, &c) in cols.iter().enumerate() {
                    let entry = &self.rows[r0][c];
                    if entry.is_zero() {
                        continue;
                    }
                    let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                    let term = entry * &self.laplace(sub_rows, &sub_cols);
                    acc = if k % 2 == 0 { &acc + &term } else { &acc - &term };
                }
                acc
            }
        }
    }

    /// Unsigned minor: determinant with `row` and `col` (zero-based) deleted.
    pub fn minor(&self, row: usize, col: usize) -> Result<Poly, MatrixError> {
        let n = self.square_dim()?;
        if row >= n || col >= n {
            return Err(MatrixError::IndexOutOfRange { row, col, dim: n });
        }
        if n - 1 > MAX_LAPLACE_DIM {
            return Err(MatrixError::TooLarge(n));
        }
        let rows: Vec<usize> = (0..n).filter(|&r| r != row).collect();
        let cols: Vec<usize> = (0..n).filter(|&c| c != col).collect();
        if rows.is_empty() {
            return Ok(Poly::one(self.arity()));
        }
        Ok(self.laplace(&rows, &cols))
    }

    /// Cofactor `(-1)^(row+col) * minor(row, col)`.
    ///
    /// Velocity component `i` of the inverse-dynamics field driven by
    /// component `d` is `signed_minor(J, d, i)`. For `d` the first row this
    /// is the sign `(-1)^(1+s(i))` with `s(i)` the parity of the one-based
    /// column index, which reproduces `dx1/dr = df2/dx2, dx2/dr = -df2/dx1`
    /// in two dimensions.
    pub fn signed_minor(&self, row: usize, col: usize) -> Result<Poly, MatrixError> {
        let m = self.minor(row, col)?;
        Ok(if (row + col).is_multiple_of(2) { m } else { -&m })
    }

    pub fn display_with(&self, names: &[String]) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|p| p.display_with(names).to_string()).collect())
            .collect();
        cells.iter().map(|r| format!("[{}]", r.join(", "))).collect::<Vec<_>>().join("\n")
    }
}

impl fmt::Display for PolyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(&[]))
    }
}
