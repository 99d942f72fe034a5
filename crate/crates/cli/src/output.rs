//! CSV sinks that open with a `#` provenance line.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

/// Lowercase hex SHA-256 of the raw graph file bytes.
pub fn graph_hash(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// The first line of every CSV: tool version, graph hash and the parameters
/// that determine the rows.
pub struct Provenance {
    line: String,
}

impl Provenance {
    pub fn new(command: &str, hash: &str, params: &[(&str, String)]) -> Self {
        let mut line = format!("# bowtie {} {command} graph_sha256={hash}", env!("CARGO_PKG_VERSION"));
        for (k, v) in params {
            line.push(' ');
            line.push_str(k);
            line.push('=');
            line.push_str(v);
        }
        Self { line }
    }
}

pub struct CsvSink {
    out: Box<dyn Write>,
}

impl CsvSink {
    /// Writes to `path`, or to stdout when absent.
    pub fn open(path: Option<&Path>, prov: &Provenance, columns: &[&str]) -> io::Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        let mut sink = Self { out };
        writeln!(sink.out, "{}", prov.line)?;
        writeln!(sink.out, "{}", columns.join(","))?;
        Ok(sink)
    }

    pub fn row(&mut self, fields: &[String]) -> io::Result<()> {
        writeln!(self.out, "{}", fields.join(","))
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.out.flush()
    }
}

/// Shortest representation that parses back to the same `f64`; the empty
/// sum's `-0.0` prints as `0.0`.
pub fn num(x: f64) -> String {
    format!("{:?}", x + 0.0)
}
