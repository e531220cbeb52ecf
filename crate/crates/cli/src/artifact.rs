//! Artifact files: CSV tables with a commented header, and `.miw.json` records.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use miw_core::constructor::MiwRecord;
use serde::{Deserialize, Serialize};

use crate::config::Config;

/// Prefix of the header line that differs between otherwise identical runs.
pub const TIMESTAMP_PREFIX: &str = "# generated ";

pub fn open(out: &str) -> io::Result<Box<dyn Write>> {
    if out == "-" {
        Ok(Box::new(BufWriter::new(io::stdout().lock())))
    } else {
        Ok(Box::new(BufWriter::new(File::create(out)?)))
    }
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn config_json(config: &Config) -> String {
    serde_json::to_string(config).expect("configuration serializes")
}

/// Writes the `#` header, the column names and the rows.
pub fn write_csv<R: Serialize>(config: &Config, header: &str, rows: &[R]) -> io::Result<()> {
    let mut w = open(&config.out)?;
    writeln!(w, "# miw {}", miw_core::VERSION)?;
    writeln!(w, "# config {}", config_json(config))?;
    writeln!(w, "{TIMESTAMP_PREFIX}{}", timestamp())?;
    writeln!(w, "{header}")?;
    {
        let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(&mut w);
        for row in rows {
            csv.serialize(row).map_err(io::Error::other)?;
        }
        csv.flush()?;
    }
    w.flush()
}

/// Writes pre-formatted records under the header, for tables whose width
/// depends on the data.
pub fn write_csv_records(config: &Config, header: &[String], rows: &[Vec<String>]) -> io::Result<()> {
    let mut w = open(&config.out)?;
    writeln!(w, "# miw {}", miw_core::VERSION)?;
    writeln!(w, "# config {}", config_json(config))?;
    writeln!(w, "{TIMESTAMP_PREFIX}{}", timestamp())?;
    {
        let mut csv = csv::WriterBuilder::new().from_writer(&mut w);
        csv.write_record(header).map_err(io::Error::other)?;
        for row in rows {
            csv.write_record(row).map_err(io::Error::other)?;
        }
        csv.flush()?;
    }
    w.flush()
}

/// `.miw.json`: the sequence record plus provenance fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceFile {
    #[serde(flatten)]
    pub record: MiwRecord,
    #[serde(default)]
    pub version: String,
    #[serde(default)]
    pub generated: String,
    #[serde(default)]
    pub config: serde_json::Value,
}

pub fn write_sequence(config: &Config, record: MiwRecord) -> io::Result<()> {
    let file = SequenceFile {
        record,
        version: miw_core::VERSION.to_string(),
        generated: timestamp(),
        config: serde_json::to_value(config).map_err(io::Error::other)?,
    };
    let mut w = open(&config.out)?;
    serde_json::to_writer_pretty(&mut w, &file).map_err(io::Error::other)?;
    writeln!(w)?;
    w.flush()
}

pub enum ReadError {
    Io(io::Error),
    Format(String),
}

pub fn read_sequence(path: &Path) -> Result<SequenceFile, ReadError> {
    let text = std::fs::read_to_string(path).map_err(ReadError::Io)?;
    serde_json::from_str(&text).map_err(|e| ReadError::Format(format!("{}: {e}", path.display())))
}

/// Formats a float so that it parses back to the same value.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}
