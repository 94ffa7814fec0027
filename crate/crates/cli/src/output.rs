//! Output sinks and the JSON provenance envelope.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use bifbm_core::{BifBmParams, GENERATOR_NAME};
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Opens `path`, or stdout when `None`.
pub fn open_sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|source| io_err(p, source))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

pub(crate) fn io_err(path: &Path, source: io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn sink_err(path: Option<&Path>, source: io::Error) -> CliError {
    match path {
        Some(p) => io_err(p, source),
        None => io_err(Path::new("<stdout>"), source),
    }
}

/// Every JSON record carries enough to reproduce it.
#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub generator: &'static str,
    pub version: &'static str,
    pub seed: Option<u64>,
    pub params: BifBmParams,
    pub config: &'a RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub result: T,
}

impl<'a, T: Serialize> Envelope<'a, T> {
    pub fn new(config: &'a RunConfig, params: BifBmParams, seed: Option<u64>, deterministic: bool, result: T) -> Self {
        let timestamp = (!deterministic).then(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        Envelope {
            generator: GENERATOR_NAME,
            version: VERSION,
            seed,
            params,
            config,
            timestamp,
            result,
        }
    }
}

pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut w = open_sink(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| sink_err(path, e))
}

/// CSV with a single header row taken from the record type.
pub fn write_csv<T: Serialize>(path: Option<&Path>, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(open_sink(path)?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| sink_err(path, e))
}

/// Gnuplot-style two-column file with a commented header.
pub fn write_plot_data(path: &Path, columns: [&str; 2], points: &[(f64, f64)]) -> Result<(), CliError> {
    let f = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(f);
    let res = (|| {
        writeln!(w, "# {} {}", columns[0], columns[1])?;
        for (x, y) in points {
            writeln!(w, "{x} {y}")?;
        }
        w.flush()
    })();
    res.map_err(|e| io_err(path, e))
}
