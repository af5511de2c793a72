//! Expected gaps between consecutive order statistics.
//!
//! For `X_1, …, X_n` iid with CDF `F`, the top gap is
//! `R_n = E(X_{n:n} − X_{n−1:n}) = n ∫ F^{n−1}(1 − F) dx`. This crate computes
//! `R_n` and the general gaps `E(X_{k+1:n} − X_{k:n})` three ways:
//!
//! * direct adaptive quadrature ([`gaps::r_direct`], [`gaps::gap_expectation`]),
//! * a Stieltjes integral against the inverse hazard rate
//!   ([`gaps::r_stieltjes`]), valid for increasing-hazard-rate laws,
//! * Monte Carlo with counter-based streams ([`mc::mc_gap`]).
//!
//! [`monotone::check_all`] judges whether a computed sequence is decreasing,
//! log-convex and completely monotone up to a given order, with error floors
//! propagated from the quadrature estimates.
//!
//! ```
//! use ordgap::{dist::make_builtin, gaps::r_direct, QuadratureConfig};
//!
//! let d = make_builtin("uniform:a=0,b=1").unwrap();
//! let r = r_direct(&d, 3, &QuadratureConfig::default()).unwrap();
//! assert!((r.value - 0.25).abs() < 1e-10);
//! ```

pub mod approx;
pub mod defaults;
pub mod dist;
pub mod error;
pub mod gaps;
pub mod mc;
pub mod monotone;
pub mod ode;
pub mod quad;

pub use approx::{ApproxFit, ApproxResult};
pub use dist::{DistributionSpec, Family, IhrVerdict, Probe, SupportBounds};
pub use error::{Error, Result};
pub use gaps::{GapValue, Method, QuadratureConfig};
pub use mc::MCEstimate;
pub use monotone::{GapSequence, MonotonicityReport, Verdict};
