//! Exact lattice arithmetic: sites, truncated `z`-polynomials and
//! finitely supported series over `Z^d`.

mod function;
mod point;
mod poly;
mod series;

pub use function::LatticeFunction;
pub(crate) use point::distinct_permutations;
pub use point::{representatives_in_box, representatives_in_l1_ball, LatticePoint};
pub use poly::{one, parse_rational, rational, rational_from_int, rational_to_f64, rationalize, ZPolynomial};
pub use series::{omega_power, SpatialSeries, Storage};
