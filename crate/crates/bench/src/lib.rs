//! Shared fixtures for the benchmarks.

use bifbm_core::BifBmParams;

/// One parameter pair per rate regime, as `(label, params)`.
pub fn regime_params() -> Vec<(&'static str, BifBmParams)> {
    vec![
        ("subhalf", BifBmParams::new(0.6, 0.5).expect("valid")),
        ("midrange", BifBmParams::new(0.65, 1.0).expect("valid")),
        ("three-quarters", BifBmParams::new(0.9, 5.0 / 6.0).expect("valid")),
    ]
}

/// Dyadic sizes `2^lo ..= 2^hi`.
pub fn dyadic(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|e| 1usize << e).collect()
}
