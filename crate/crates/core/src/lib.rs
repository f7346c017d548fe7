//! Over-relaxed ADMM with closed-form convergence-rate bounds.
//!
//! The crate has three layers:
//!
//! - [`rate`]: pure formulas. The linear rate `τ`, the constant in front of
//!   `τ^t`, the optimal penalty and relaxation, and reference rates from
//!   neighbouring analyses.
//! - [`engine`]: the iteration itself over any [`Problem`], with traces,
//!   stopping rules, fixed points and empirical rate fitting.
//! - [`problems`]: quadratic and sparse-logistic instances.
//!
//! ```
//! use relaxed_admm::rate::{optimal_params, ConditioningInfo};
//!
//! let cond = ConditioningInfo::new(1.0, 100.0, 1.0, 1.0)?;
//! let (params, cert) = optimal_params(&cond, 0.01)?;
//! assert!((params.rho - 10.0).abs() < 1e-12);
//! assert!(cert.tau < 0.82);
//! # Ok::<(), relaxed_admm::Error>(())
//! ```
//!
//! A longer walk-through lives in the `book/` directory of the repository;
//! its code listings are compiled and run as doc-tests of this crate.

pub mod engine;
mod error;
pub mod problems;
pub mod rate;

pub use engine::{
    estimate_rate, fixed_point_of, run, run_with, step, FixedPoint, IterateState, Problem, RunOptions, RunTrace,
    StoppingRule, Termination,
};
pub use error::{Error, Result};
pub use rate::{
    best_alpha, certificate, chi, comparison_rates, eta, inf_rate, normalize, optimal_params, tau_a, AdmmParams,
    BoundConstant, ConditioningInfo, RateCertificate,
};

// The guide's listings are run by `cargo test --doc`.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/rates.md")]
    mod rates {}
    #[doc = include_str!("../../../book/src/tuning.md")]
    mod tuning {}
    #[doc = include_str!("../../../book/src/engine.md")]
    mod engine {}
    #[doc = include_str!("../../../book/src/attainability.md")]
    mod attainability {}
    #[doc = include_str!("../../../book/src/logistic.md")]
    mod logistic {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
