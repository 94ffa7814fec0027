use serde::{Deserialize, Serialize};

use crate::error::{BifbmError, Result};

/// Absolute tolerance used to recognise the critical product `H·K = 3/4`.
pub const THREE_QUARTERS_TOL: f64 = 1e-12;

/// Parameters `(H, K)` of a bifractional Brownian motion.
///
/// `0 < H < 1` and `0 < K <= 1`. The self-similarity exponent `H·K` is
/// always recomputed from the two fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct BifBmParams {
    h: f64,
    k: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    #[serde(rename = "H")]
    h: f64,
    #[serde(rename = "K")]
    k: f64,
}

impl TryFrom<RawParams> for BifBmParams {
    type Error = BifbmError;

    fn try_from(raw: RawParams) -> Result<Self> {
        BifBmParams::new(raw.h, raw.k)
    }
}

impl From<BifBmParams> for RawParams {
    fn from(p: BifBmParams) -> Self {
        RawParams { h: p.h, k: p.k }
    }
}

impl BifBmParams {
    pub fn new(h: f64, k: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0 && h < 1.0) {
            return Err(BifbmError::domain("H", h, "must lie in (0, 1)"));
        }
        if !(k.is_finite() && k > 0.0 && k <= 1.0) {
            return Err(BifbmError::domain("K", k, "must lie in (0, 1]"));
        }
        Ok(BifBmParams { h, k })
    }

    /// Fractional Brownian motion with Hurst index `h` (`K = 1`).
    pub fn fbm(h: f64) -> Result<Self> {
        Self::new(h, 1.0)
    }

    /// Standard Brownian motion (`H = 1/2`, `K = 1`).
    pub fn brownian() -> Self {
        BifBmParams { h: 0.5, k: 1.0 }
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn k(&self) -> f64 {
        self.k
    }

    /// Self-similarity exponent `H·K`.
    #[inline]
    pub fn hk(&self) -> f64 {
        self.h * self.k
    }

    pub fn regime(&self) -> RateRegime {
        RateRegime::from_hk(self.hk())
    }
}

/// Berry-Esseen rate regime as a function of `H·K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RateRegime {
    /// `H·K` in `(0, 1/2]`: rate `n^{-1/2}`.
    SubHalf,
    /// `H·K` in `(1/2, 3/4)`: rate `n^{2HK - 3/2}`.
    MidRange,
    /// `H·K = 3/4`: rate `(log n)^{-1/2}`.
    ThreeQuarters,
    /// `H·K > 3/4`: no normal limit, no rate.
    Supercritical,
}

impl RateRegime {
    pub fn from_hk(hk: f64) -> Self {
        if (hk - 0.75).abs() <= THREE_QUARTERS_TOL {
            RateRegime::ThreeQuarters
        } else if hk <= 0.5 {
            RateRegime::SubHalf
        } else if hk < 0.75 {
            RateRegime::MidRange
        } else {
            RateRegime::Supercritical
        }
    }

    pub fn rate_exponent_description(&self) -> &'static str {
        match self {
            RateRegime::SubHalf => "n^(-1/2)",
            RateRegime::MidRange => "n^(2HK-3/2)",
            RateRegime::ThreeQuarters => "(log n)^(-1/2)",
            RateRegime::Supercritical => "none",
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            RateRegime::SubHalf => "SubHalf",
            RateRegime::MidRange => "MidRange",
            RateRegime::ThreeQuarters => "ThreeQuarters",
            RateRegime::Supercritical => "Supercritical",
        }
    }

    /// Value of the regime's rate at `n`, or `None` when the regime has no rate.
    pub fn rate(&self, hk: f64, n: usize) -> Option<f64> {
        let n = n as f64;
        match self {
            RateRegime::SubHalf => Some(n.powf(-0.5)),
            RateRegime::MidRange => Some(n.powf(2.0 * hk - 1.5)),
            RateRegime::ThreeQuarters => Some(n.ln().powf(-0.5)),
            RateRegime::Supercritical => None,
        }
    }
}

impl std::fmt::Display for RateRegime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
