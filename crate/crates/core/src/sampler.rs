//! Exact Gaussian sampling of bifBm increments and grid values by Cholesky
//! factorization of the covariance.
//!
//! bifBm increments are not stationary for `K < 1`, so circulant embedding
//! does not apply. A sampler factors its covariance once; draws then only
//! need a matrix-vector product and can run concurrently from the shared
//! factor.

use ndarray::Array2;
use serde::Serialize;

use crate::error::{BifbmError, Result};
use crate::exactstats::{build_gram_capped, check_cap, DEFAULT_CAP};
use crate::kernel::cov_unchecked;
use crate::linalg::{chol_factor, CholeskyFactor, JitterPolicy};
use crate::params::BifBmParams;
use crate::rng::PathRng;

/// Identifies the random stream behind a draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SeedTag {
    pub master_seed: u64,
    pub path_index: u64,
}

/// One draw of the unit-spaced increments `(B_1 - B_0, ..., B_n - B_{n-1})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSample {
    pub params: BifBmParams,
    pub n: usize,
    pub increments: Vec<f64>,
    pub seed_tag: SeedTag,
}

/// One draw of `B_t` on a finite grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSample {
    pub params: BifBmParams,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub seed_tag: SeedTag,
}

/// Sampler for `N(0, Θ)` with a cached factor of `Θ`.
#[derive(Debug, Clone)]
pub struct IncrementSampler {
    params: BifBmParams,
    factor: CholeskyFactor,
}

impl IncrementSampler {
    pub fn new(params: &BifBmParams, n: usize) -> Result<Self> {
        Self::with_options(params, n, DEFAULT_CAP, JitterPolicy::default())
    }

    pub fn with_options(params: &BifBmParams, n: usize, cap: usize, policy: JitterPolicy) -> Result<Self> {
        let gram = build_gram_capped(params, n, cap)?;
        let factor = chol_factor(gram.entries(), policy)?;
        Ok(IncrementSampler {
            params: *params,
            factor,
        })
    }

    pub fn n(&self) -> usize {
        self.factor.dim()
    }

    pub fn factor(&self) -> &CholeskyFactor {
        &self.factor
    }

    /// Writes one draw into `out`; `scratch` receives the underlying standard normals.
    pub fn sample_into(&self, master_seed: u64, path_index: u64, scratch: &mut [f64], out: &mut [f64]) {
        let mut rng = PathRng::new(master_seed, path_index);
        rng.fill_normal(scratch);
        self.factor.mul_vec(scratch, out);
    }

    pub fn sample(&self, master_seed: u64, path_index: u64) -> PathSample {
        let n = self.n();
        let mut xi = vec![0.0; n];
        let mut increments = vec![0.0; n];
        self.sample_into(master_seed, path_index, &mut xi, &mut increments);
        PathSample {
            params: self.params,
            n,
            increments,
            seed_tag: SeedTag {
                master_seed,
                path_index,
            },
        }
    }
}

/// One-shot increment draw; factors `Θ` on every call.
pub fn sample_increments(params: &BifBmParams, n: usize, master_seed: u64, path_index: u64) -> Result<PathSample> {
    Ok(IncrementSampler::new(params, n)?.sample(master_seed, path_index))
}

/// Sampler for `B` on a sorted grid of distinct nonnegative times.
///
/// `B_0 = 0` almost surely, so a zero time is pinned and excluded from the
/// factored covariance.
#[derive(Debug, Clone)]
pub struct GridSampler {
    params: BifBmParams,
    grid: Vec<f64>,
    pinned_zero: bool,
    factor: CholeskyFactor,
}

impl GridSampler {
    pub fn new(params: &BifBmParams, grid: &[f64]) -> Result<Self> {
        Self::with_options(params, grid, DEFAULT_CAP, JitterPolicy::default())
    }

    pub fn with_options(params: &BifBmParams, grid: &[f64], cap: usize, policy: JitterPolicy) -> Result<Self> {
        if grid.is_empty() {
            return Err(BifbmError::domain("grid", "[]", "must be nonempty"));
        }
        for (i, &t) in grid.iter().enumerate() {
            if !t.is_finite() || t < 0.0 {
                return Err(BifbmError::domain("grid", t, "times must be finite and nonnegative"));
            }
            if i > 0 && grid[i - 1] >= t {
                return Err(BifbmError::domain("grid", t, "times must be strictly increasing"));
            }
        }
        check_cap("grid", grid.len(), cap)?;
        let pinned_zero = grid[0] == 0.0;
        let times = if pinned_zero { &grid[1..] } else { grid };
        let m = times.len();
        let mut cov = Array2::<f64>::zeros((m, m));
        for i in 0..m {
            for j in i..m {
                let v = cov_unchecked(params, times[i], times[j]);
                cov[[i, j]] = v;
                cov[[j, i]] = v;
            }
        }
        let factor = chol_factor(&cov, policy)?;
        Ok(GridSampler {
            params: *params,
            grid: grid.to_vec(),
            pinned_zero,
            factor,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn factor(&self) -> &CholeskyFactor {
        &self.factor
    }

    /// Writes `B` at every grid time into `out` (length = grid length).
    pub fn sample_into(&self, master_seed: u64, path_index: u64, scratch: &mut [f64], out: &mut [f64]) {
        let offset = usize::from(self.pinned_zero);
        let mut rng = PathRng::new(master_seed, path_index);
        rng.fill_normal(scratch);
        if self.pinned_zero {
            out[0] = 0.0;
        }
        self.factor.mul_vec(scratch, &mut out[offset..]);
    }

    pub fn sample(&self, master_seed: u64, path_index: u64) -> GridSample {
        let mut xi = vec![0.0; self.factor.dim()];
        let mut values = vec![0.0; self.grid.len()];
        self.sample_into(master_seed, path_index, &mut xi, &mut values);
        GridSample {
            params: self.params,
            grid: self.grid.clone(),
            values,
            seed_tag: SeedTag {
                master_seed,
                path_index,
            },
        }
    }
}

/// One-shot grid draw; factors the covariance on every call.
pub fn sample_grid(params: &BifBmParams, grid: &[f64], master_seed: u64, path_index: u64) -> Result<GridSample> {
    Ok(GridSampler::new(params, grid)?.sample(master_seed, path_index))
}
