//! Covariance kernel of the bifractional Brownian motion and the
//! unit-spaced increment correlation functions built from it.
//!
//! ```text
//! R(s,t)    = 2^{-K} ((t^{2H} + s^{2H})^K - |t-s|^{2HK})
//! rho(r)    = |r+1|^{2HK} + |r-1|^{2HK} - 2|r|^{2HK}
//! gamma(i,j) = ((i+1)^{2H}+(j+1)^{2H})^K - (i^{2H}+(j+1)^{2H})^K
//!            - ((i+1)^{2H}+j^{2H})^K + (i^{2H}+j^{2H})^K
//! theta(i,j) = 2^{-K} (gamma(i,j) + rho(i-j)) = E[(B_{i+1}-B_i)(B_{j+1}-B_j)]
//! ```
//!
//! `gamma` and `rho` are second differences of smooth functions and lose
//! most of their significant digits when evaluated term by term at large
//! indices. Both are evaluated in cancellation-free forms here: `rho` by its
//! binomial series in `1/r`, `gamma` through `expm1`/`ln1p` regrouping.

use crate::error::{BifbmError, Result};
use crate::params::BifBmParams;

/// Covariance `R_{H,K}(s, t) = E[B_s B_t]`.
pub fn cov(params: &BifBmParams, s: f64, t: f64) -> Result<f64> {
    check_time("s", s)?;
    check_time("t", t)?;
    Ok(cov_unchecked(params, s, t))
}

#[inline]
pub(crate) fn cov_unchecked(params: &BifBmParams, s: f64, t: f64) -> f64 {
    if s == 0.0 || t == 0.0 {
        return 0.0;
    }
    let (h, k) = (params.h(), params.k());
    let two_h = 2.0 * h;
    let lead = (t.powf(two_h) + s.powf(two_h)).powf(k);
    let lag = (t - s).abs().powf(two_h * k);
    (lead - lag) * (-k).exp2()
}

fn check_time(name: &'static str, t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(BifbmError::domain(name, t, "time must be finite and nonnegative"));
    }
    Ok(())
}

/// `E[(B_b - B_a)(B_d - B_c)]` for `0 <= a <= b`, `0 <= c <= d`.
pub fn increment_inner(params: &BifBmParams, a: f64, b: f64, c: f64, d: f64) -> Result<f64> {
    for (name, t) in [("a", a), ("b", b), ("c", c), ("d", d)] {
        check_time(name, t)?;
    }
    if a > b {
        return Err(BifbmError::domain("a", a, "interval [a, b] requires a <= b"));
    }
    if c > d {
        return Err(BifbmError::domain("c", c, "interval [c, d] requires c <= d"));
    }
    Ok(increment_inner_unchecked(params, a, b, c, d))
}

#[inline]
pub(crate) fn increment_inner_unchecked(params: &BifBmParams, a: f64, b: f64, c: f64, d: f64) -> f64 {
    cov_unchecked(params, b, d) - cov_unchecked(params, b, c) - cov_unchecked(params, a, d)
        + cov_unchecked(params, a, c)
}

/// Second difference `rho(r)` of `|x|^{2HK}` at integer `r`; even in `r`.
pub fn rho(params: &BifBmParams, r: i64) -> f64 {
    rho_alpha(2.0 * params.hk(), r.unsigned_abs())
}

// Below this lag the direct three-term form is accurate to a few ulps.
const RHO_SERIES_FROM: u64 = 8;

pub(crate) fn rho_alpha(alpha: f64, r: u64) -> f64 {
    if r == 0 {
        return 2.0;
    }
    if alpha == 1.0 {
        return 0.0;
    }
    let rf = r as f64;
    if r < RHO_SERIES_FROM {
        return (rf + 1.0).powf(alpha) + (rf - 1.0).powf(alpha) - 2.0 * rf.powf(alpha);
    }
    // (1+x)^a + (1-x)^a - 2 = 2 sum_{m>=1} C(a, 2m) x^{2m}, x = 1/r <= 1/8
    let x2 = 1.0 / (rf * rf);
    let mut coef = alpha * (alpha - 1.0) / 2.0;
    let mut pow = x2;
    let mut sum = 0.0;
    for m in 1..40 {
        let term = coef * pow;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        let m = m as f64;
        coef *= (alpha - 2.0 * m) * (alpha - 2.0 * m - 1.0) / ((2.0 * m + 1.0) * (2.0 * m + 2.0));
        pow *= x2;
    }
    2.0 * rf.powf(alpha) * sum
}

/// The non-stationary correction `gamma(i, j)`; zero when `K = 1`, negative otherwise.
pub fn gamma_fn(params: &BifBmParams, i: u64, j: u64) -> f64 {
    if params.k() == 1.0 {
        return 0.0;
    }
    let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
    let two_h = 2.0 * params.h();
    gamma_core(
        params.k(),
        pow_index(two_h, lo),
        pow_step(two_h, lo),
        pow_index(two_h, hi),
        pow_step(two_h, hi),
    )
}

/// `x^{2H}` at an integer index.
#[inline]
pub(crate) fn pow_index(two_h: f64, i: u64) -> f64 {
    (i as f64).powf(two_h)
}

/// `(i+1)^{2H} - i^{2H}` without cancellation.
#[inline]
pub(crate) fn pow_step(two_h: f64, i: u64) -> f64 {
    if i == 0 {
        1.0
    } else {
        let x = i as f64;
        x.powf(two_h) * (two_h * (1.0 / x).ln_1p()).exp_m1()
    }
}

/// Stable evaluation of
/// `(u0+w+da)^K - (u0+w)^K - (u0+da)^K + u0^K` with `u0 = a + q0`.
///
/// `a, da` are the power and forward step of the smaller index, `q0, w`
/// those of the larger one.
#[inline]
pub(crate) fn gamma_core(k: f64, a: f64, da: f64, q0: f64, w: f64) -> f64 {
    let u0 = a + q0;
    if u0 == 0.0 {
        return (da + w).powf(k) - w.powf(k) - da.powf(k);
    }
    let u1 = u0 + w;
    let f = (k * (w / u0).ln_1p()).exp_m1();
    let e0 = (k * (da / u0).ln_1p()).exp_m1();
    let e1 = (k * (da / u1).ln_1p()).exp_m1();
    let dy = k * (-(da * w) / ((u0 + da) * u1)).ln_1p();
    u0.powf(k) * (f * e1 + (1.0 + e0) * dy.exp_m1())
}

/// Unit-spaced increment covariance `theta(i, j) = E[(B_{i+1}-B_i)(B_{j+1}-B_j)]`.
pub fn theta(params: &BifBmParams, i: u64, j: u64) -> f64 {
    let lag = i.abs_diff(j);
    (-params.k()).exp2() * (gamma_fn(params, i, j) + rho_alpha(2.0 * params.hk(), lag))
}

/// Precomputed per-index powers for filling many `theta` entries.
///
/// Entries agree bit-for-bit with [`theta`].
pub(crate) struct ThetaTable {
    k: f64,
    scale: f64,
    pow: Vec<f64>,
    step: Vec<f64>,
    rho: Vec<f64>,
}

impl ThetaTable {
    pub(crate) fn new(params: &BifBmParams, n: usize) -> Self {
        let two_h = 2.0 * params.h();
        let alpha = 2.0 * params.hk();
        ThetaTable {
            k: params.k(),
            scale: (-params.k()).exp2(),
            pow: (0..n as u64).map(|i| pow_index(two_h, i)).collect(),
            step: (0..n as u64).map(|i| pow_step(two_h, i)).collect(),
            rho: (0..n as u64).map(|r| rho_alpha(alpha, r)).collect(),
        }
    }

    /// `theta(i, j)` for `i <= j < n`.
    #[inline]
    pub(crate) fn upper(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i <= j);
        let g = if self.k == 1.0 {
            0.0
        } else {
            gamma_core(self.k, self.pow[i], self.step[i], self.pow[j], self.step[j])
        };
        self.scale * (g + self.rho[j - i])
    }
}

// Safety factors and expansion depths for the sigma^2 series.
const SIGMA_DIRECT_TERMS: u64 = 256;
const SIGMA_SERIES_ORDER: usize = 16;

/// `sigma^2 = (1/8) sum_{r in Z} rho(r)^2`, finite only for `H·K < 3/4`.
///
/// The lags `|r| <= R` are summed directly. The remaining tail is summed in
/// closed form from the binomial expansion of `rho(r)^2` in powers of `1/r`,
/// each power contributing a Hurwitz zeta value. `R` grows until the
/// estimated truncation error is below `rel_tol` times the result.
pub fn sigma_sq(params: &BifBmParams, rel_tol: f64) -> Result<f64> {
    let hk = params.hk();
    if hk >= 0.75 - crate::params::THREE_QUARTERS_TOL {
        return Err(BifbmError::domain(
            "HK",
            hk,
            "sum of rho^2 diverges for H*K >= 3/4",
        ));
    }
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(BifbmError::domain("rel_tol", rel_tol, "must lie in (0, 1)"));
    }
    let alpha = 2.0 * hk;
    if alpha == 1.0 {
        return Ok(0.5);
    }

    // C(alpha, 2m), m = 1..
    let mut binom = Vec::with_capacity(SIGMA_SERIES_ORDER);
    let mut c = alpha * (alpha - 1.0) / 2.0;
    for m in 1..=SIGMA_SERIES_ORDER {
        binom.push(c);
        let m = m as f64;
        c *= (alpha - 2.0 * m) * (alpha - 2.0 * m - 1.0) / ((2.0 * m + 1.0) * (2.0 * m + 2.0));
    }

    let mut direct_to = SIGMA_DIRECT_TERMS;
    let mut partial = 0.0;
    let mut summed_to = 0u64;
    loop {
        for r in summed_to + 1..=direct_to {
            let v = rho_alpha(alpha, r);
            partial += v * v;
        }
        summed_to = direct_to;

        // rho(r)^2 = 4 sum_{s>=2} c_s r^{2 alpha - 2 s}, c_s = sum_{m+m'=s} C(a,2m) C(a,2m')
        let a = (direct_to + 1) as f64;
        let mut tail = 0.0;
        let mut last = f64::INFINITY;
        let mut zeta_err = 0.0;
        for s in 2..=SIGMA_SERIES_ORDER {
            let cs: f64 = (1..s).map(|m| binom[m - 1] * binom[s - m - 1]).sum();
            let (z, err) = hurwitz_zeta(2.0 * s as f64 - 2.0 * alpha, a);
            last = 4.0 * cs * z;
            tail += last;
            zeta_err += (4.0 * cs * err).abs();
        }
        let total = 4.0 + 2.0 * (partial + tail);
        let err_est = 2.0 * (last.abs() + zeta_err);
        if err_est <= rel_tol * total || direct_to >= 1 << 24 {
            return Ok(total / 8.0);
        }
        direct_to *= 4;
    }
}

/// Hurwitz zeta `sum_{k>=0} (a+k)^{-s}` for `s > 1` and large `a`, by
/// Euler-Maclaurin summation. Returns the value and the first omitted
/// correction as an error estimate.
fn hurwitz_zeta(s: f64, a: f64) -> (f64, f64) {
    const B2J_OVER_FACT: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    ];
    let mut value = a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
    // d/da^{2j-1} factor: s (s+1) ... (s+2j-2) a^{-s-2j+1}
    let mut rising = s;
    let mut apow = a.powf(-s - 1.0);
    let mut last = 0.0;
    for (j, b) in B2J_OVER_FACT.iter().enumerate() {
        last = b * rising * apow;
        value += last;
        let j = j as f64 + 1.0;
        rising *= (s + 2.0 * j - 1.0) * (s + 2.0 * j);
        apow /= a * a;
    }
    (value, last)
}

/// The log-density constant `lim (1/(8 ln n)) sum_{|r|<n} rho(r)^2` at `H·K = 3/4`.
///
/// At `H·K = 3/4` the series defining `sigma^2` diverges logarithmically;
/// since `rho(r)^2 ~ (3/4)^2 / |r|`, the constant equals `(1/8)·2·(3/4)^2 = 9/64`.
/// [`rho_sq_log_slope`] confirms it numerically.
pub fn log_sigma_sq_threequarters() -> f64 {
    9.0 / 64.0
}

/// `sum_{|r| < n} rho(r)^2`.
pub fn rho_sq_partial_sum(params: &BifBmParams, n: u64) -> f64 {
    let alpha = 2.0 * params.hk();
    let mut s = 0.0;
    for r in 1..n {
        let v = rho_alpha(alpha, r);
        s += v * v;
    }
    if n == 0 {
        0.0
    } else {
        4.0 + 2.0 * s
    }
}

/// Growth rate of `(1/8) sum_{|r|<n} rho(r)^2` per unit of `ln n` between
/// `n_lo` and `n_hi`; tends to [`log_sigma_sq_threequarters`] at `H·K = 3/4`.
pub fn rho_sq_log_slope(params: &BifBmParams, n_lo: u64, n_hi: u64) -> f64 {
    let alpha = 2.0 * params.hk();
    let mut s = 0.0;
    for r in n_lo..n_hi {
        let v = rho_alpha(alpha, r);
        s += v * v;
    }
    2.0 * s / (8.0 * ((n_hi as f64).ln() - (n_lo as f64).ln()))
}
