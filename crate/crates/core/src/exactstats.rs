//! Exact finite-`n` statistics of the quadratic variation
//! `Z_n = sum_{i<n} [n^{2HK}(B_{(i+1)/n} - B_{i/n})^2 - theta(i,i)]`.
//!
//! By self-similarity the scaled increments on the `1/n` grid have the same
//! law as the unit-spaced increments, whose covariance is the Gram matrix
//! `Θ[i][j] = theta(i, j)`. Everything here is a function of `Θ`:
//!
//! - `Var(Z_n) = 2 ‖Θ‖_F²`
//! - `A(n) = n^{-2} trace(Θ⁴) = n^{-2} ‖Θ²‖_F²`
//! - the Kolmogorov-distance bound `sqrt(8 n² A(n)) / Var(Z_n)` for `V_n`.

use ndarray::Array2;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{BifbmError, Result};
use crate::kernel::{increment_inner_unchecked, log_sigma_sq_threequarters, sigma_sq, ThetaTable};
use crate::linalg::sym_square_frobenius_sq;
use crate::params::{BifBmParams, RateRegime};

/// Default cap on matrix dimensions (`2^13`).
pub const DEFAULT_CAP: usize = 1 << 13;

const SIGMA_REL_TOL: f64 = 1e-12;

/// Covariance matrix of the first `n` unit-spaced increments.
#[derive(Debug, Clone)]
pub struct IncrementGram {
    params: BifBmParams,
    entries: Array2<f64>,
}

impl IncrementGram {
    pub fn params(&self) -> &BifBmParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<f64> {
        self.entries
    }
}

pub(crate) fn check_cap(what: &'static str, n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(BifbmError::Capacity { what, requested: n, cap });
    }
    Ok(())
}

fn check_positive(what: &'static str, n: usize) -> Result<()> {
    if n == 0 {
        return Err(BifbmError::domain(what, n, "must be at least 1"));
    }
    Ok(())
}

/// Builds `Θ` for `n <= DEFAULT_CAP`.
pub fn build_gram(params: &BifBmParams, n: usize) -> Result<IncrementGram> {
    build_gram_capped(params, n, DEFAULT_CAP)
}

pub fn build_gram_capped(params: &BifBmParams, n: usize, cap: usize) -> Result<IncrementGram> {
    check_positive("n", n)?;
    check_cap("n", n, cap)?;
    let table = ThetaTable::new(params, n);
    let mut data = vec![0.0; n * n];
    data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, v) in row.iter_mut().enumerate().skip(i) {
            *v = table.upper(i, j);
        }
    });
    for i in 1..n {
        for j in 0..i {
            data[i * n + j] = data[j * n + i];
        }
    }
    let entries = Array2::from_shape_vec((n, n), data).expect("n*n buffer");
    Ok(IncrementGram {
        params: *params,
        entries,
    })
}

/// `Var(Z_n) = 2 sum_{i,j} theta(i,j)^2`.
pub fn var_zn(gram: &IncrementGram) -> f64 {
    let s: f64 = gram
        .entries
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>())
        .sum();
    2.0 * s
}

/// `A(n) = n^{-2} trace(Θ⁴)`.
pub fn a_n(gram: &IncrementGram) -> f64 {
    let n = gram.n() as f64;
    sym_square_frobenius_sq(gram.entries.view()) / (n * n)
}

/// Stein-Malliavin bound `sqrt(8 n² A(n) / Var(Z_n)²)` on `d_Kol(V_n, N(0,1))`.
pub fn stein_bound(gram: &IncrementGram) -> f64 {
    stein_from_parts(gram.n(), a_n(gram), var_zn(gram))
}

fn stein_from_parts(n: usize, a: f64, var: f64) -> f64 {
    let n = n as f64;
    (8.0 * n * n * a / (var * var)).sqrt()
}

/// `Var(Z_k)` for every `k = 0..=n_max` in one `O(n_max²)` pass.
///
/// `theta` does not depend on `k`, so `Var(Z_k)/2` is the sum of squares of
/// the leading `k×k` block of `Θ` and grows by one bordered row per step.
pub fn var_zn_prefix(params: &BifBmParams, n_max: usize) -> Vec<f64> {
    let table = ThetaTable::new(params, n_max);
    let border: Vec<f64> = (0..n_max)
        .into_par_iter()
        .map(|k| {
            let off: f64 = (0..k).map(|i| table.upper(i, k).powi(2)).sum();
            2.0 * off + table.upper(k, k).powi(2)
        })
        .collect();
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(0.0);
    let mut acc = 0.0;
    for b in border {
        acc += b;
        out.push(2.0 * acc);
    }
    out
}

fn variance_normalizer(params: &BifBmParams, n: usize) -> Result<f64> {
    let scale = 4f64.powf(2.0 - params.k()) * n as f64;
    match params.regime() {
        RateRegime::ThreeQuarters => {
            if n < 2 {
                return Err(BifbmError::domain("n", n, "H*K = 3/4 requires n >= 2 (log n > 0)"));
            }
            Ok(scale * log_sigma_sq_threequarters() * (n as f64).ln())
        }
        RateRegime::Supercritical => Err(BifbmError::domain(
            "HK",
            params.hk(),
            "no normal limit for H*K > 3/4",
        )),
        _ => Ok(scale * sigma_sq(params, SIGMA_REL_TOL)?),
    }
}

/// `Var(Z_n) / (4^{2-K} n sigma^2)`, or at `H·K = 3/4`
/// `Var(Z_n) / (4^{2-K} (9/64) n ln n)`.
pub fn variance_ratio(params: &BifBmParams, n: usize) -> Result<f64> {
    variance_ratio_capped(params, n, DEFAULT_CAP)
}

pub fn variance_ratio_capped(params: &BifBmParams, n: usize, cap: usize) -> Result<f64> {
    check_positive("n", n)?;
    check_cap("n", n, cap)?;
    let norm = variance_normalizer(params, n)?;
    let var = *var_zn_prefix(params, n).last().expect("n >= 1");
    Ok(var / norm)
}

/// Exact finite-`n` summary of the quadratic variation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadVarReport {
    pub params: BifBmParams,
    pub n: usize,
    pub var_zn: f64,
    pub a_n: f64,
    pub stein_bound: f64,
    pub variance_ratio: f64,
    pub regime: RateRegime,
    pub normalized_bound: f64,
}

/// Builds the report for one `n` from an already built Gram matrix.
pub fn quad_var_report(gram: &IncrementGram) -> Result<QuadVarReport> {
    let params = *gram.params();
    let n = gram.n();
    let regime = params.regime();
    let rate = regime.rate(params.hk(), n).ok_or_else(|| {
        BifbmError::domain("HK", params.hk(), "no Berry-Esseen rate for H*K > 3/4")
    })?;
    let var = var_zn(gram);
    let a = a_n(gram);
    let bound = stein_from_parts(n, a, var);
    let variance_ratio = var / variance_normalizer(&params, n)?;
    Ok(QuadVarReport {
        params,
        n,
        var_zn: var,
        a_n: a,
        stein_bound: bound,
        variance_ratio,
        regime,
        normalized_bound: bound / rate,
    })
}

/// One report per `n`, with the Stein bound divided by the regime's rate.
pub fn rate_table(params: &BifBmParams, n_values: &[usize]) -> Result<Vec<QuadVarReport>> {
    rate_table_capped(params, n_values, DEFAULT_CAP)
}

pub fn rate_table_capped(params: &BifBmParams, n_values: &[usize], cap: usize) -> Result<Vec<QuadVarReport>> {
    if n_values.is_empty() {
        return Err(BifbmError::domain("n_values", "[]", "must be nonempty"));
    }
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(BifbmError::domain("n_values", format!("{n_values:?}"), "must be strictly ascending"));
    }
    if params.regime() == RateRegime::Supercritical {
        return Err(BifbmError::domain("HK", params.hk(), "no Berry-Esseen rate for H*K > 3/4"));
    }
    let &n_top = n_values.last().expect("nonempty");
    check_cap("n", n_top, cap)?;
    if n_values[0] == 1 && params.regime() == RateRegime::ThreeQuarters {
        return Err(BifbmError::domain("n", 1, "H*K = 3/4 requires n >= 2 (log n > 0)"));
    }
    n_values
        .iter()
        .map(|&n| quad_var_report(&build_gram_capped(params, n, cap)?))
        .collect()
}

/// `⟨g_k, g_l⟩` for the normalized kernels with `V_n = I_2(g_n)`:
/// `(kl)^{2HK} / sqrt(Var(Z_k) Var(Z_l)) · sum_{i<k, j<l} ⟨δ_{i/k}, δ_{j/l}⟩²`.
///
/// Equals `E[V_k V_l] / 2`, so the diagonal value is `1/2`.
pub fn cross_gram(params: &BifBmParams, k: usize, l: usize) -> Result<f64> {
    cross_gram_capped(params, k, l, DEFAULT_CAP)
}

pub fn cross_gram_capped(params: &BifBmParams, k: usize, l: usize, cap: usize) -> Result<f64> {
    check_positive("k", k)?;
    check_positive("l", l)?;
    if k > l {
        return Err(BifbmError::domain("k", k, "cross_gram requires k <= l"));
    }
    check_cap("l", l, cap)?;
    let var = var_zn_prefix(params, l);
    Ok(cross_gram_with_vars(params, k, l, var[k], var[l]))
}

pub(crate) fn cross_gram_with_vars(params: &BifBmParams, k: usize, l: usize, var_k: f64, var_l: f64) -> f64 {
    let (kf, lf) = (k as f64, l as f64);
    let mut s = 0.0;
    for i in 0..k {
        let (a, b) = (i as f64 / kf, (i + 1) as f64 / kf);
        for j in 0..l {
            let v = increment_inner_unchecked(params, a, b, j as f64 / lf, (j + 1) as f64 / lf);
            s += v * v;
        }
    }
    (kf * lf).powf(2.0 * params.hk()) * s / (var_k * var_l).sqrt()
}

/// `E[V_k V_l] = 2 ⟨g_k, g_l⟩`; equal to 1 on the diagonal.
pub fn vn_correlation(params: &BifBmParams, k: usize, l: usize) -> Result<f64> {
    Ok(2.0 * cross_gram(params, k, l)?)
}
