use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use dyadic_core::chains::RNG_IDENTITY;
use serde::Serialize;
use serde_json::Value;

use crate::{Cli, CliError};

#[derive(Clone, Debug, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub config: Value,
    pub seed: Option<u64>,
    pub rng: &'static str,
}

/// Run-dependent fields, kept apart so that the rest of a report is
/// reproducible byte for byte.
#[derive(Clone, Debug, Serialize)]
pub struct Metadata {
    pub timestamp_unix: u64,
    pub elapsed_ms: u128,
    pub threads: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Envelope {
    pub header: Header,
    pub payload: Value,
    pub metadata: Metadata,
}

impl Header {
    pub fn new(subcommand: &str, config: &impl Serialize, seed: Option<u64>) -> Result<Self, CliError> {
        Ok(Header {
            tool: "dyadic",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            config: serde_json::to_value(config)?,
            seed,
            rng: RNG_IDENTITY,
        })
    }
}

impl Envelope {
    pub fn new(header: Header, payload: Value, started: Instant) -> Self {
        Envelope {
            header,
            payload,
            metadata: Metadata {
                timestamp_unix: SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
                elapsed_ms: started.elapsed().as_millis(),
                threads: rayon::current_num_threads(),
            },
        }
    }
}

/// Destination chosen from `--out`, `$DYADIC_OUT_DIR`, or stdout.
pub fn sink(cli: &Cli, default_name: &str) -> Result<Box<dyn Write>, CliError> {
    let path: Option<PathBuf> = match (&cli.out, &cli.out_dir) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => {
            std::fs::create_dir_all(dir)?;
            Some(dir.join(default_name))
        }
        (None, None) => None,
    };
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

pub fn write_json(w: &mut dyn Write, v: &impl Serialize, compact: bool) -> Result<(), CliError> {
    if compact {
        serde_json::to_writer(&mut *w, v)?;
    } else {
        serde_json::to_writer_pretty(&mut *w, v)?;
    }
    writeln!(w)?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)?;
    Ok(())
}
