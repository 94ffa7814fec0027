//! Bifractional Brownian motion: covariance kernels, exact Berry-Esseen
//! quantities for the normalized quadratic variation `V_n`, exact
//! Cholesky samplers, and Monte Carlo checks of the CLT and almost sure CLT.
//!
//! ```
//! use bifbm_core::{build_gram, stein_bound, BifBmParams};
//!
//! let params = BifBmParams::new(0.6, 0.5)?;
//! let gram = build_gram(&params, 64)?;
//! assert!(stein_bound(&gram) < 0.5);
//! # Ok::<(), bifbm_core::BifbmError>(())
//! ```
//!
//! At `H·K = 3/4` the constant `sigma^2` is infinite; the variance
//! normalization there uses the log-density constant `9/64` instead, see
//! [`kernel::log_sigma_sq_threequarters`].

pub mod error;
pub mod exactstats;
pub mod kernel;
pub mod linalg;
pub mod mcverify;
pub mod normal;
pub mod params;
pub mod rng;
pub mod sampler;

pub use error::{BifbmError, Result};
pub use exactstats::{
    a_n, build_gram, build_gram_capped, cross_gram, cross_gram_capped, quad_var_report, rate_table,
    rate_table_capped, stein_bound, var_zn, var_zn_prefix, variance_ratio, variance_ratio_capped, vn_correlation,
    IncrementGram, QuadVarReport, DEFAULT_CAP,
};
pub use kernel::{
    cov, gamma_fn, increment_inner, log_sigma_sq_threequarters, rho, rho_sq_log_slope, rho_sq_partial_sum,
    sigma_sq, theta,
};
pub use linalg::{chol_factor, CholeskyFactor, JitterPolicy};
pub use mcverify::{
    asclt_bifbm, asclt_vn, divisors, harmonic, ks_distance, mc_vn_sample, mc_vn_sample_with, AscltReport,
    AscltScheme, BifbmAsclt, EcdfSummary, TestFunction, VnAsclt,
};
pub use normal::std_normal_cdf;
pub use params::{BifBmParams, RateRegime};
pub use rng::GENERATOR_NAME;
pub use sampler::{sample_grid, sample_increments, GridSample, GridSampler, IncrementSampler, PathSample, SeedTag};
