use bifbm_core::{cov, gamma_fn, increment_inner, rho, theta, BifBmParams};
use proptest::prelude::*;

const HS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
const KS: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];

fn grid_params() -> impl Iterator<Item = BifBmParams> {
    HS.iter()
        .flat_map(|&h| KS.iter().map(move |&k| BifBmParams::new(h, k).unwrap()))
}

fn params_strategy() -> impl Strategy<Value = BifBmParams> {
    (0.01f64..0.99, 0.01f64..=1.0).prop_map(|(h, k)| BifBmParams::new(h, k).unwrap())
}

proptest! {
    #[test]
    fn cov_symmetric(p in params_strategy(), s in 0.0f64..10.0, t in 0.0f64..10.0) {
        prop_assert_eq!(cov(&p, s, t).unwrap(), cov(&p, t, s).unwrap());
    }

    #[test]
    fn theta_and_gamma_symmetric(p in params_strategy(), i in 0u64..20_000, j in 0u64..20_000) {
        prop_assert_eq!(theta(&p, i, j), theta(&p, j, i));
        prop_assert_eq!(gamma_fn(&p, i, j), gamma_fn(&p, j, i));
    }

    #[test]
    fn rho_even(p in params_strategy(), r in -100_000i64..100_000) {
        prop_assert_eq!(rho(&p, r), rho(&p, -r));
    }

    #[test]
    fn gamma_nonpositive(p in params_strategy(), i in 0u64..5_000, j in 0u64..5_000) {
        prop_assert!(gamma_fn(&p, i, j) <= 0.0);
    }
}

#[test]
fn quasi_helix_sandwich() {
    let times: Vec<f64> = (0..64).map(|i| 2.0 * i as f64 / 63.0).collect();
    for p in grid_params() {
        let k = p.k();
        for &s in &times {
            for &t in &times {
                if s == t {
                    continue;
                }
                let (a, b) = (s.min(t), s.max(t));
                let v = increment_inner(&p, a, b, a, b).unwrap();
                let d = (b - a).powf(2.0 * p.hk());
                let lo = 2f64.powf(-k) * d;
                let hi = 2f64.powf(1.0 - k) * d;
                let slack = 1e-12 * hi;
                assert!(v >= lo - slack && v <= hi + slack, "{p:?} s={s} t={t}: {lo} <= {v} <= {hi}");
            }
        }
    }
}

#[test]
fn k_one_collapses_to_fbm() {
    for &h in &HS {
        let p = BifBmParams::fbm(h).unwrap();
        for i in 0..40u64 {
            for j in 0..40u64 {
                assert_eq!(gamma_fn(&p, i, j), 0.0);
                let want = rho(&p, i as i64 - j as i64) / 2.0;
                assert!((theta(&p, i, j) - want).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn gamma_nondecreasing_in_first_argument_for_rough_h() {
    for &h in &[0.1, 0.25, 0.4, 0.5] {
        for &k in &[0.2, 0.5, 0.8] {
            let p = BifBmParams::new(h, k).unwrap();
            for &j in &[0u64, 1, 3, 17, 64, 200] {
                let mut prev = gamma_fn(&p, 0, j);
                for i in 1..=200u64 {
                    let g = gamma_fn(&p, i, j);
                    assert!(g >= prev - 1e-15 * prev.abs(), "H={h} K={k} j={j} i={i}: {prev} -> {g}");
                    prev = g;
                }
            }
        }
    }
}

#[test]
fn gamma_diagonal_decay_exponent() {
    // gamma(j,j) ~ c j^{2HK-2}
    for &(h, k) in &[(0.3, 0.5), (0.6, 0.5), (0.9, 0.8), (0.5, 0.3), (0.2, 0.9)] {
        let p = BifBmParams::new(h, k).unwrap();
        let e = 2.0 - 2.0 * p.hk();
        let a = gamma_fn(&p, 4096, 4096) * 4096f64.powf(e);
        let b = gamma_fn(&p, 8192, 8192) * 8192f64.powf(e);
        assert!((a / b - 1.0).abs() < 0.02, "({h},{k}) {a} {b}");
    }
}

#[test]
fn gamma_edge_decay_exponent() {
    // gamma(0,j) ~ c j^{2HK-2H-1}; agrees with j^{2HK-2} only at H = 1/2
    for &(h, k) in &[(0.3, 0.5), (0.6, 0.5), (0.9, 0.8), (0.5, 0.3), (0.2, 0.9)] {
        let p = BifBmParams::new(h, k).unwrap();
        let e = 1.0 + 2.0 * h - 2.0 * p.hk();
        let a = gamma_fn(&p, 0, 4096) * 4096f64.powf(e);
        let b = gamma_fn(&p, 0, 8192) * 8192f64.powf(e);
        assert!((a / b - 1.0).abs() < 0.02, "({h},{k}) {a} {b}");
    }
    let p = BifBmParams::new(0.3, 0.5).unwrap();
    let e = 2.0 - 2.0 * p.hk();
    let a = gamma_fn(&p, 0, 4096) * 4096f64.powf(e);
    let b = gamma_fn(&p, 0, 8192) * 8192f64.powf(e);
    assert!(b / a > 1.25, "j^(2HK-2) scaling should keep growing for H < 1/2");
}

fn domination_profile(p: &BifBmParams, l: u64) -> f64 {
    let e = 2.0 - 2.0 * p.hk();
    (0..=l).map(|j| gamma_fn(p, j, l).abs()).fold(0.0, f64::max) * (l as f64).powf(e)
}

#[test]
fn gamma_dominated_by_l_power_for_smooth_h() {
    // H >= 1/2: the profile sup_j |gamma(j,l)| l^{2-2HK} saturates, so a
    // constant fitted on l <= 128 still bounds l = 256.
    for &(h, k) in &[(0.5, 0.3), (0.6, 0.5), (0.75, 0.8), (0.9, 0.8), (0.5, 1.0)] {
        let p = BifBmParams::new(h, k).unwrap();
        let c = (1..=128).map(|l| domination_profile(&p, l)).fold(0.0, f64::max);
        for l in 129..=256 {
            let v = domination_profile(&p, l);
            assert!(v <= c * 1.01 + 1e-300, "({h},{k}) l={l} {v} > {c}");
        }
    }
}

#[test]
fn gamma_bounded_by_edge_for_rough_h() {
    // H < 1/2: |gamma(j,l)| <= |gamma(0,l)|, by monotonicity in j
    for &(h, k) in &[(0.1, 0.5), (0.3, 0.5), (0.45, 0.9)] {
        let p = BifBmParams::new(h, k).unwrap();
        for l in 0..=256u64 {
            let edge = gamma_fn(&p, 0, l).abs();
            for j in 0..=l {
                assert!(gamma_fn(&p, j, l).abs() <= edge * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn self_similar_increments() {
    for p in grid_params() {
        for &n in &[2u64, 3, 5, 8] {
            let nf = n as f64;
            let scale = nf.powf(2.0 * p.hk());
            for i in 0..n {
                for j in 0..n {
                    let (a, b) = (i as f64 / nf, (i + 1) as f64 / nf);
                    let (c, d) = (j as f64 / nf, (j + 1) as f64 / nf);
                    let v = scale * increment_inner(&p, a, b, c, d).unwrap();
                    let want = theta(&p, i, j);
                    assert!((v - want).abs() < 1e-10, "{p:?} n={n} ({i},{j}) {v} {want}");
                }
            }
        }
    }
}

#[test]
fn identities_on_parameter_grid() {
    for p in grid_params() {
        assert!((theta(&p, 0, 0) - 1.0).abs() < 1e-12);
        assert!((rho(&p, 0) - 2.0).abs() < 1e-12);
        for &t in &[0.1, 0.5, 1.0, 3.7] {
            assert!((cov(&p, t, t).unwrap() - t.powf(2.0 * p.hk())).abs() < 1e-12);
            assert_eq!(cov(&p, 0.0, t).unwrap(), 0.0);
        }
    }
}
