//! Exact finite-n statistics of greatest common divisors of uniform random
//! integer samples, the Euler-product constants governing their limits, and
//! reproducible Monte Carlo experiments for the associated limit laws.
//!
//! Module map:
//!
//! - [`arith`]: sieved arithmetic functions (Möbius, Jordan totients,
//!   divisor counts, Pillai functions) and gcd/lcm helpers.
//! - [`exact`]: Cesàro-type closed forms evaluated exactly as rationals
//!   `numerator / n^power`, including U-statistic variances.
//! - [`constants`]: truncated Euler products with tail bounds, zeta values,
//!   and partial-sum trend checks.
//! - [`montecarlo`]: seeded sampling and fast divisor-multiplicity
//!   statistics for coprime counts, gcd sums, maxima and exceedance counts.
//! - [`stattest`]: reference laws and KS / total-variation distances.
//! - [`oracle`]: brute-force enumeration used to cross-check [`exact`].
//! - [`verify`]: the acceptance suites, shared by the CLI and the tests.

pub mod arith;
mod compensated;
pub mod constants;
pub mod error;
pub mod exact;
pub mod montecarlo;
pub mod oracle;
pub mod stattest;
pub mod verify;

pub use arith::ArithTable;
pub use error::{Error, Result};
pub use exact::ExactResult;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
