//! One function per subcommand.

use std::fs::File;
use std::io::BufWriter;

use bifbm_core::{
    build_gram_capped, cov, gamma_fn, increment_inner, mc_vn_sample_with, rate_table_capped, rho, sigma_sq,
    stein_bound, theta, AscltReport, BifBmParams, BifbmAsclt, IncrementSampler, JitterPolicy, QuadVarReport,
    RateRegime, TestFunction, VnAsclt,
};
use serde::Serialize;

use crate::config::{AscltArgs, AscltMode, Command, Format, KernelArgs, McArgs, ParamArgs, RateTableArgs, RunConfig};
use crate::output::{io_err, write_csv, write_json, write_plot_data, Envelope};
use crate::CliError;

pub fn run(config: &RunConfig) -> Result<(), CliError> {
    match &config.command {
        Command::Kernel(a) => cmd_kernel(config, a),
        Command::RateTable(a) => cmd_rate_table(config, a),
        Command::Mc(a) => cmd_mc(config, a),
        Command::Asclt(a) => cmd_asclt(config, a),
    }
}

fn params(p: &ParamArgs) -> Result<BifBmParams, CliError> {
    Ok(BifBmParams::new(p.h, p.k)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelRow {
    pub quantity: &'static str,
    pub arguments: String,
    pub value: f64,
}

fn join(xs: &[impl ToString]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

pub fn cmd_kernel(config: &RunConfig, a: &KernelArgs) -> Result<(), CliError> {
    let p = params(&a.params)?;
    let mut rows = Vec::new();
    for st in a.cov.chunks_exact(2) {
        rows.push(KernelRow {
            quantity: "cov",
            arguments: join(st),
            value: cov(&p, st[0], st[1])?,
        });
    }
    for abcd in a.inc.chunks_exact(4) {
        rows.push(KernelRow {
            quantity: "inc",
            arguments: join(abcd),
            value: increment_inner(&p, abcd[0], abcd[1], abcd[2], abcd[3])?,
        });
    }
    for range in &a.rho {
        for r in range.start..=range.end {
            rows.push(KernelRow {
                quantity: "rho",
                arguments: r.to_string(),
                value: rho(&p, r),
            });
        }
    }
    for ij in a.theta.chunks_exact(2) {
        rows.push(KernelRow {
            quantity: "theta",
            arguments: join(ij),
            value: theta(&p, ij[0], ij[1]),
        });
    }
    for ij in a.gamma.chunks_exact(2) {
        rows.push(KernelRow {
            quantity: "gamma",
            arguments: join(ij),
            value: gamma_fn(&p, ij[0], ij[1]),
        });
    }
    if a.sigma_sq {
        rows.push(KernelRow {
            quantity: "sigma_sq",
            arguments: String::new(),
            value: sigma_sq(&p, 1e-12)?,
        });
    }
    if rows.is_empty() {
        return Err(CliError::Config {
            param: "kernel",
            reason: "no quantity requested (use --cov, --inc, --rho, --theta, --gamma or --sigma-sq)".into(),
        });
    }
    if let Some(path) = &a.output.plot_data {
        // first argument against value
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| {
                let x = r.arguments.split(' ').next().and_then(|s| s.parse().ok()).unwrap_or(f64::NAN);
                (x, r.value)
            })
            .collect();
        write_plot_data(path, ["x", "value"], &pts)?;
    }
    match a.output.format {
        Format::Csv => write_csv(a.output.out.as_deref(), &rows),
        Format::Json => write_json(
            a.output.out.as_deref(),
            &Envelope::new(config, p, None, a.output.deterministic, rows),
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub n: usize,
    pub var_zn: f64,
    pub a_n: f64,
    pub stein_bound: f64,
    pub variance_ratio: f64,
    pub regime: &'static str,
    pub normalized_bound: f64,
}

impl From<&QuadVarReport> for RateRow {
    fn from(r: &QuadVarReport) -> Self {
        RateRow {
            n: r.n,
            var_zn: r.var_zn,
            a_n: r.a_n,
            stein_bound: r.stein_bound,
            variance_ratio: r.variance_ratio,
            regime: r.regime.as_str(),
            normalized_bound: r.normalized_bound,
        }
    }
}

pub fn cmd_rate_table(config: &RunConfig, a: &RateTableArgs) -> Result<(), CliError> {
    let p = params(&a.params)?;
    let ns: Vec<usize> = match a.n {
        Some(n) => vec![n],
        None => a.n_list.clone(),
    };
    if ns.is_empty() {
        return Err(CliError::Config {
            param: "n-list",
            reason: "give --n or --n-list".into(),
        });
    }
    if p.regime() == RateRegime::Supercritical {
        return Err(bifbm_core::BifbmError::Domain {
            param: "HK",
            value: p.hk().to_string(),
            reason: "no Berry-Esseen rate for H*K > 3/4",
        }
        .into());
    }
    let reports = rate_table_capped(&p, &ns, a.cap.cap)?;
    let rows: Vec<RateRow> = reports.iter().map(RateRow::from).collect();
    if let Some(path) = &a.output.plot_data {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.normalized_bound)).collect();
        write_plot_data(path, ["n", "normalized_bound"], &pts)?;
    }
    match a.output.format {
        Format::Csv => write_csv(a.output.out.as_deref(), &rows),
        Format::Json => write_json(
            a.output.out.as_deref(),
            &Envelope::new(config, p, None, a.output.deterministic, rows),
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McRow {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub ks_distance: f64,
    pub stein_bound: f64,
}

pub fn cmd_mc(config: &RunConfig, a: &McArgs) -> Result<(), CliError> {
    let p = params(&a.params)?;
    if a.n == 0 {
        return Err(CliError::Config {
            param: "n",
            reason: "must be at least 1".into(),
        });
    }
    let sampler = IncrementSampler::with_options(&p, a.n, a.cap.cap, JitterPolicy::default())?;
    let summary = mc_vn_sample_with(&sampler, &p, a.m, a.seed)?;
    let bound = stein_bound(&build_gram_capped(&p, a.n, a.cap.cap)?);
    if let Some(path) = &a.dump_paths {
        dump_paths(path, &sampler, a.m, a.seed)?;
    }
    if let Some(path) = &a.output.plot_data {
        let m = summary.m as f64;
        let pts: Vec<(f64, f64)> = summary
            .sample
            .iter()
            .enumerate()
            .map(|(i, &x)| (x, (i + 1) as f64 / m))
            .collect();
        write_plot_data(path, ["v_n", "ecdf"], &pts)?;
    }
    let row = McRow {
        n: summary.n,
        m: summary.m,
        seed: a.seed,
        ks_distance: summary.ks_distance,
        stein_bound: bound,
    };
    match a.output.format {
        Format::Csv => write_csv(a.output.out.as_deref(), &[row]),
        Format::Json => write_json(
            a.output.out.as_deref(),
            &Envelope::new(config, p, Some(a.seed), a.output.deterministic, row),
        ),
    }
}

/// One CSV row per path; columns `path, inc_0, ..., inc_{n-1}`.
fn dump_paths(path: &std::path::Path, sampler: &IncrementSampler, m: usize, seed: u64) -> Result<(), CliError> {
    let f = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(f));
    let n = sampler.n();
    let mut header = vec!["path".to_string()];
    header.extend((0..n).map(|i| format!("inc_{i}")));
    w.write_record(&header)?;
    let mut xi = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut rec = Vec::with_capacity(n + 1);
    for j in 0..m as u64 {
        sampler.sample_into(seed, j, &mut xi, &mut x);
        rec.clear();
        rec.push(j.to_string());
        rec.extend(x.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AscltRow {
    pub seed: u64,
    pub phi: String,
    pub scheme: &'static str,
    pub n_max: usize,
    pub terms: usize,
    pub weighted_average: f64,
    pub target: f64,
    pub error: f64,
    pub pass: Option<bool>,
}

#[derive(Debug, Serialize)]
pub struct AscltSummary {
    pub mode: AscltMode,
    pub tol: Option<f64>,
    pub pass_count: Option<usize>,
    pub runs: usize,
    pub reports: Vec<AscltReport>,
}

pub fn cmd_asclt(config: &RunConfig, a: &AscltArgs) -> Result<(), CliError> {
    let p = params(&a.params)?;
    if a.seeds == 0 {
        return Err(CliError::Config {
            param: "seeds",
            reason: "must be at least 1".into(),
        });
    }
    let phi: &TestFunction = &a.phi.0;
    let seeds: Vec<u64> = (0..a.seeds).map(|i| a.seed.wrapping_add(i)).collect();
    // path values for the first seed, for the running-average plot
    let (reports, first_path): (Vec<AscltReport>, Vec<(usize, f64)>) = match a.mode {
        AscltMode::Bifbm => {
            let h = BifbmAsclt::with_cap(&p, a.n, a.cap.cap)?;
            let path = h.normalized_path(seeds[0]).into_iter().enumerate().map(|(i, v)| (i + 1, v)).collect();
            (seeds.iter().map(|&s| h.run(phi, s)).collect(), path)
        }
        AscltMode::Vn => {
            let h = VnAsclt::with_cap(&p, a.n, a.scheme.into(), a.cap.cap)?;
            let path = h.vn_values(seeds[0]);
            (seeds.iter().map(|&s| h.run(phi, s)).collect(), path)
        }
    };
    if let Some(path) = &a.output.plot_data {
        let mut num = 0.0;
        let mut den = 0.0;
        let pts: Vec<(f64, f64)> = first_path
            .iter()
            .map(|&(k, v)| {
                let w = 1.0 / k as f64;
                num += w * phi.eval(v);
                den += w;
                (k as f64, num / den)
            })
            .collect();
        write_plot_data(path, ["k", "running_average"], &pts)?;
    }
    let pass_count = a.tol.map(|t| reports.iter().filter(|r| r.error() <= t).count());
    match a.output.format {
        Format::Csv => {
            let rows: Vec<AscltRow> = reports
                .iter()
                .map(|r| AscltRow {
                    seed: r.master_seed,
                    phi: r.phi_name.clone(),
                    scheme: r.scheme.as_str(),
                    n_max: r.n_max,
                    terms: r.terms,
                    weighted_average: r.weighted_average,
                    target: r.target,
                    error: r.error(),
                    pass: a.tol.map(|t| r.error() <= t),
                })
                .collect();
            write_csv(a.output.out.as_deref(), &rows)
        }
        Format::Json => {
            let summary = AscltSummary {
                mode: a.mode,
                tol: a.tol,
                pass_count,
                runs: reports.len(),
                reports,
            };
            write_json(
                a.output.out.as_deref(),
                &Envelope::new(config, p, Some(a.seed), a.output.deterministic, summary),
            )
        }
    }
}
