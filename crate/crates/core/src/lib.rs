//! Exact algebra and numerics for studying polynomial maps of affine space
//! through their u-gamma (Puiseux curve) representations.

pub mod algebra;
pub mod chart;
pub mod flow;
pub mod galois;
pub mod jacrep;
pub mod json;
pub mod poly;
pub mod polymap;
pub mod pseries;
pub mod rat;
pub mod registry;
pub mod trajcsv;
pub mod uvrep;

pub use algebra::Algebra;
pub use poly::{Poly, PolyError};
pub use polymap::{MapError, MatrixError, PolyMap, PolyMatrix};
pub use pseries::{PSeries, PSeriesError};
pub use rat::{fmt_rat, parse_rat, rat, ratio, Rat, CF};
