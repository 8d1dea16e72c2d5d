//! Configurable-precision computation of the fractional Poisson probability
//! distribution, fractional Bell polynomials/numbers, and fractional
//! Stirling numbers of the second kind, together with machine checks of the
//! identities tying the three families together.
//!
//! The stack, bottom to top:
//!
//! * [`precision`] — `PrecReal`, arbitrary-precision reals carrying a stated
//!   decimal precision and an absolute error bound;
//! * [`gamma`] — Spouge-based Γ with a precision-derived parameter, plus the
//!   shared lattice of Γ(μj+1) values;
//! * [`combin`] — exact big-integer binomials, factorials, falling products;
//! * [`series`] — adaptive summation with geometric tail certificates and
//!   cancellation-aware precision escalation;
//! * [`mittag_leffler`] — E_μ(z) and its derivatives (the series kernel
//!   behind the probability masses);
//! * [`stirling`], [`bell`], [`poisson`], [`genfun`] — the number and
//!   polynomial families and their generating functions;
//! * [`sampler`] — reproducible inverse-CDF Monte Carlo;
//! * [`check`] — the verification suites exposed by the CLI.
//!
//! The `parallel` feature (on by default) runs table construction, triangle
//! building, and sampling shards on rayon; disabling it yields a fully
//! sequential build with identical outputs.

pub mod bell;
pub mod check;
pub mod combin;
pub mod error;
pub mod gamma;
pub mod genfun;
pub mod mittag_leffler;
pub mod poisson;
pub mod precision;
pub mod sampler;
pub mod series;
pub mod stirling;

pub use error::{Error, Result};
pub use precision::{MuParam, PrecReal, DEFAULT_DIGITS, DEFAULT_TARGET_REL_ERR, MIN_DIGITS};

/// Re-exported arbitrary-precision integer type used for all exact
/// combinatorics.
pub use num_bigint::BigInt;
