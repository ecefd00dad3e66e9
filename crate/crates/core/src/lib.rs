//! Certification of congruent and non-congruent numbers.
//!
//! A square-free `n` is congruent exactly when `E_n: n y^2 = x^3 - x` has
//! positive rank.  The crate decides many `n` through mod-2 sums of genus
//! class numbers `g(d) = #(2 Cl(Q(sqrt(-d))))` over decompositions of `n`,
//! and checks those decisions against Tunnell's counts, numerical
//! L-values and explicit rational points.
//!
//! Modules, bottom up:
//! - [`arith`]: factorization, Jacobi symbols, root numbers
//! - [`classgroup`]: reduced forms, Gauss composition, genus data, Rédei matrices
//! - [`parity`]: the decomposition sums and single-genus criteria
//! - [`analytic`]: Tunnell counts, L-series, periods, point search
//! - [`certify`]: verdicts, range scans, density statistics
//! - [`cli`]: the `cnum` command line

pub mod analytic;
pub mod arith;
pub mod certify;
pub mod classgroup;
pub mod cli;
pub mod error;
pub mod parity;

pub use error::{Error, Result};
