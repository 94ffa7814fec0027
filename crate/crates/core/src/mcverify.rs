//! Monte Carlo checks: the empirical law of `V_n` against `N(0,1)` and
//! log-weighted (almost sure CLT) averages along single trajectories.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{BifbmError, Result};
use crate::exactstats::{check_cap, var_zn_prefix, DEFAULT_CAP};
use crate::kernel::theta;
use crate::linalg::JitterPolicy;
use crate::normal::std_normal_cdf;
use crate::params::{BifBmParams, RateRegime};
use crate::sampler::{GridSampler, IncrementSampler};

/// Smallest Monte Carlo sample accepted by [`mc_vn_sample`].
pub const MIN_MC_PATHS: usize = 100;

/// Minimum number of divisors for the exact-divisor scheme.
pub const MIN_DIVISORS: usize = 12;

/// Kolmogorov distance between the ECDF of a sorted sample and `Φ`.
///
/// Evaluated at the jump points: `max_i max(i/m - Φ(x_i), Φ(x_i) - (i-1)/m)`.
pub fn ks_distance(sorted_sample: &[f64]) -> Result<f64> {
    if sorted_sample.is_empty() {
        return Err(BifbmError::domain("sample", "[]", "must be nonempty"));
    }
    if sorted_sample.iter().any(|x| x.is_nan()) {
        return Err(BifbmError::domain("sample", "NaN", "must not contain NaN"));
    }
    if sorted_sample.windows(2).any(|w| w[0] > w[1]) {
        return Err(BifbmError::domain("sample", "unsorted", "must be sorted ascending"));
    }
    let m = sorted_sample.len() as f64;
    let d = sorted_sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = std_normal_cdf(x);
            let above = (i + 1) as f64 / m - f;
            let below = f - i as f64 / m;
            above.max(below)
        })
        .fold(0.0f64, f64::max);
    Ok(d)
}

/// Sorted Monte Carlo sample of `V_n` with its Kolmogorov distance to `N(0,1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EcdfSummary {
    pub params: BifBmParams,
    pub n: usize,
    pub m: usize,
    pub ks_distance: f64,
    pub sample: Vec<f64>,
}

/// Draws `m` independent paths of `n` increments and returns the law of `V_n`.
///
/// Path `j` uses stream `(master_seed, j)`; results do not depend on the
/// number of worker threads.
pub fn mc_vn_sample(params: &BifBmParams, n: usize, m: usize, master_seed: u64) -> Result<EcdfSummary> {
    let sampler = IncrementSampler::new(params, n)?;
    mc_vn_sample_with(&sampler, params, m, master_seed)
}

/// [`mc_vn_sample`] on a prebuilt sampler.
pub fn mc_vn_sample_with(
    sampler: &IncrementSampler,
    params: &BifBmParams,
    m: usize,
    master_seed: u64,
) -> Result<EcdfSummary> {
    if m < MIN_MC_PATHS {
        return Err(BifbmError::domain("m", m, "Monte Carlo sample size must be at least 100"));
    }
    let n = sampler.n();
    let var = *var_zn_prefix(params, n).last().expect("n >= 1");
    let diag: Vec<f64> = (0..n as u64).map(|k| theta(params, k, k)).collect();
    let scale = var.sqrt();
    let mut sample: Vec<f64> = (0..m as u64)
        .into_par_iter()
        .map_init(
            || (vec![0.0; n], vec![0.0; n]),
            |(xi, y), j| {
                sampler.sample_into(master_seed, j, xi, y);
                let z: f64 = y.iter().zip(&diag).map(|(v, d)| v * v - d).sum();
                z / scale
            },
        )
        .collect();
    sample.sort_by(f64::total_cmp);
    let ks = ks_distance(&sample)?;
    Ok(EcdfSummary {
        params: *params,
        n,
        m,
        ks_distance: ks,
        sample,
    })
}

/// Bounded continuous test functions for the almost sure CLT.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunction {
    Constant { value: f64 },
    Cos,
    Sin,
    /// `1 / (1 + exp(slope·x))`, a smoothed indicator of `x <= 0`.
    Logistic { slope: f64 },
    /// `clamp(sum_i coeffs[i] x^i, lo, hi)`.
    ClampedPoly { coeffs: Vec<f64>, lo: f64, hi: f64 },
}

impl TestFunction {
    pub fn name(&self) -> String {
        match self {
            TestFunction::Constant { value } => format!("const({value})"),
            TestFunction::Cos => "cos".into(),
            TestFunction::Sin => "sin".into(),
            TestFunction::Logistic { slope } => format!("logistic({slope})"),
            TestFunction::ClampedPoly { coeffs, lo, hi } => format!("clamped-poly({coeffs:?},{lo},{hi})"),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::Constant { value } => *value,
            TestFunction::Cos => x.cos(),
            TestFunction::Sin => x.sin(),
            TestFunction::Logistic { slope } => 1.0 / (1.0 + (slope * x).exp()),
            TestFunction::ClampedPoly { coeffs, lo, hi } => {
                coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c).clamp(*lo, *hi)
            }
        }
    }

    /// `E[φ(N)]` for `N ~ N(0,1)`.
    pub fn target(&self) -> f64 {
        match self {
            TestFunction::Constant { value } => *value,
            TestFunction::Cos => (-0.5f64).exp(),
            TestFunction::Sin => 0.0,
            // φ(x) + φ(-x) = 1 and N is symmetric
            TestFunction::Logistic { .. } => 0.5,
            TestFunction::ClampedPoly { .. } => gaussian_expectation(|x| self.eval(x)),
        }
    }
}

/// `E[f(N)]` by composite Simpson quadrature on `[-12, 12]`.
fn gaussian_expectation(f: impl Fn(f64) -> f64) -> f64 {
    const HALF_WIDTH: f64 = 12.0;
    const STEPS: usize = 24_000;
    let h = 2.0 * HALF_WIDTH / STEPS as f64;
    let density = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = 0.0;
    for i in 0..=STEPS {
        let x = -HALF_WIDTH + i as f64 * h;
        let w = if i == 0 || i == STEPS {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        s += w * f(x) * density(x);
    }
    s * h / 3.0
}

/// Which resolutions enter a log-average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AscltScheme {
    /// `V_k` only for divisors `k` of the grid size (exact).
    ExactDivisor,
    /// `V_k` for every `k`, with times `i/k` snapped to the nearest grid point.
    SnappedGrid,
    /// `k^{-HK} B_k` at integer times.
    IntegerTimes,
}

impl AscltScheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            AscltScheme::ExactDivisor => "exact-divisor",
            AscltScheme::SnappedGrid => "snapped-grid",
            AscltScheme::IntegerTimes => "integer-times",
        }
    }
}

/// Result of one log-weighted average along one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AscltReport {
    pub phi_name: String,
    pub weighted_average: f64,
    pub target: f64,
    pub n_max: usize,
    /// `sum 1/k` over the resolutions used.
    pub weight_normalizer: f64,
    /// Number of resolutions `k` in the average.
    pub terms: usize,
    pub scheme: AscltScheme,
    pub master_seed: u64,
}

impl AscltReport {
    pub fn error(&self) -> f64 {
        (self.weighted_average - self.target).abs()
    }
}

/// `sum_{k=1}^n 1/k`.
pub fn harmonic(n: usize) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

/// Divisors of `n` in ascending order.
pub fn divisors(n: usize) -> Vec<usize> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// `sum w_k φ(v_k) / sum w_k` with `w_k = 1/k`, accumulated as deviations
/// from the first term so that a constant `φ` is reproduced exactly.
fn log_average(values: impl Iterator<Item = (usize, f64)>, phi: &TestFunction) -> (f64, f64, usize) {
    let mut shift = None;
    let mut num = 0.0;
    let mut den = 0.0;
    let mut terms = 0;
    for (k, v) in values {
        let w = 1.0 / k as f64;
        let f = phi.eval(v);
        let c = *shift.get_or_insert(f);
        num += w * (f - c);
        den += w;
        terms += 1;
    }
    (shift.unwrap_or(f64::NAN) + num / den, den, terms)
}

/// Log-average of `φ(k^{-HK} B_k)`, `k = 1..n_max`, along one path sampled
/// exactly on the integer times.
#[derive(Debug, Clone)]
pub struct BifbmAsclt {
    params: BifBmParams,
    n_max: usize,
    sampler: GridSampler,
}

impl BifbmAsclt {
    pub fn new(params: &BifBmParams, n_max: usize) -> Result<Self> {
        Self::with_cap(params, n_max, DEFAULT_CAP)
    }

    pub fn with_cap(params: &BifBmParams, n_max: usize, cap: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(BifbmError::domain("n_max", 0, "must be at least 1"));
        }
        check_cap("n_max", n_max, cap)?;
        let grid: Vec<f64> = (1..=n_max).map(|k| k as f64).collect();
        let sampler = GridSampler::with_options(params, &grid, cap, JitterPolicy::default())?;
        Ok(BifbmAsclt {
            params: *params,
            n_max,
            sampler,
        })
    }

    /// Normalized values `k^{-HK} B_k` for `k = 1..=n_max`.
    pub fn normalized_path(&self, master_seed: u64) -> Vec<f64> {
        let path = self.sampler.sample(master_seed, 0);
        let hk = self.params.hk();
        path.values
            .iter()
            .enumerate()
            .map(|(i, b)| b * ((i + 1) as f64).powf(-hk))
            .collect()
    }

    pub fn run(&self, phi: &TestFunction, master_seed: u64) -> AscltReport {
        let path = self.normalized_path(master_seed);
        let (avg, den, terms) = log_average(path.iter().enumerate().map(|(i, &v)| (i + 1, v)), phi);
        AscltReport {
            phi_name: phi.name(),
            weighted_average: avg,
            target: phi.target(),
            n_max: self.n_max,
            weight_normalizer: den,
            terms,
            scheme: AscltScheme::IntegerTimes,
            master_seed,
        }
    }
}

/// One-shot [`BifbmAsclt`].
pub fn asclt_bifbm(params: &BifBmParams, n_max: usize, phi: &TestFunction, master_seed: u64) -> Result<AscltReport> {
    Ok(BifbmAsclt::new(params, n_max)?.run(phi, master_seed))
}

/// Log-average of `φ(V_k)` along one path sampled on the uniform grid
/// `{i / N : 0 <= i <= N}`.
#[derive(Debug, Clone)]
pub struct VnAsclt {
    params: BifBmParams,
    n_grid: usize,
    scheme: AscltScheme,
    resolutions: Vec<usize>,
    var_prefix: Vec<f64>,
    diag: Vec<f64>,
    sampler: GridSampler,
}

impl VnAsclt {
    pub fn new(params: &BifBmParams, n_grid: usize, scheme: AscltScheme) -> Result<Self> {
        Self::with_cap(params, n_grid, scheme, DEFAULT_CAP)
    }

    pub fn with_cap(params: &BifBmParams, n_grid: usize, scheme: AscltScheme, cap: usize) -> Result<Self> {
        if params.regime() == RateRegime::Supercritical {
            return Err(BifbmError::domain("HK", params.hk(), "V_n is not asymptotically normal for H*K > 3/4"));
        }
        if n_grid == 0 {
            return Err(BifbmError::domain("N_grid", 0, "must be at least 1"));
        }
        check_cap("N_grid", n_grid, cap)?;
        let resolutions = match scheme {
            AscltScheme::ExactDivisor => {
                let d = divisors(n_grid);
                if d.len() < MIN_DIVISORS {
                    return Err(BifbmError::domain(
                        "N_grid",
                        format!("{n_grid} (has {} divisors)", d.len()),
                        "exact-divisor scheme needs at least 12 divisors",
                    ));
                }
                d
            }
            AscltScheme::SnappedGrid => (1..=n_grid).collect(),
            AscltScheme::IntegerTimes => {
                return Err(BifbmError::domain("scheme", "integer-times", "not a V_n scheme"));
            }
        };
        let grid: Vec<f64> = (0..=n_grid).map(|i| i as f64 / n_grid as f64).collect();
        let sampler = GridSampler::with_options(params, &grid, cap + 1, JitterPolicy::default())?;
        Ok(VnAsclt {
            params: *params,
            n_grid,
            scheme,
            var_prefix: var_zn_prefix(params, n_grid),
            diag: (0..n_grid as u64).map(|k| theta(params, k, k)).collect(),
            resolutions,
            sampler,
        })
    }

    pub fn resolutions(&self) -> &[usize] {
        &self.resolutions
    }

    /// `(k, V_k)` for every resolution, from path `(master_seed, 0)`.
    pub fn vn_values(&self, master_seed: u64) -> Vec<(usize, f64)> {
        let b = self.sampler.sample(master_seed, 0).values;
        let n = self.n_grid;
        let hk2 = 2.0 * self.params.hk();
        self.resolutions
            .iter()
            .map(|&k| {
                // nearest grid index to i/k; exact when k divides N
                let idx = |i: usize| (2 * i * n + k) / (2 * k);
                let scale = (k as f64).powf(hk2);
                let z: f64 = (0..k)
                    .map(|i| {
                        let d = b[idx(i + 1)] - b[idx(i)];
                        scale * d * d - self.diag[i]
                    })
                    .sum();
                (k, z / self.var_prefix[k].sqrt())
            })
            .collect()
    }

    pub fn run(&self, phi: &TestFunction, master_seed: u64) -> AscltReport {
        let values = self.vn_values(master_seed);
        let (avg, den, terms) = log_average(values.into_iter(), phi);
        AscltReport {
            phi_name: phi.name(),
            weighted_average: avg,
            target: phi.target(),
            n_max: self.n_grid,
            weight_normalizer: den,
            terms,
            scheme: self.scheme,
            master_seed,
        }
    }
}

/// One-shot [`VnAsclt`].
pub fn asclt_vn(
    params: &BifBmParams,
    n_grid: usize,
    phi: &TestFunction,
    master_seed: u64,
    scheme: AscltScheme,
) -> Result<AscltReport> {
    Ok(VnAsclt::new(params, n_grid, scheme)?.run(phi, master_seed))
}
