//! Line-delimited JSON records on stdout, human summary on stderr, CSV files.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use epd_hodograph::hodograph::Locus;
use epd_hodograph::{Hierarchy, VERSION};

use crate::CliError;

#[derive(Serialize)]
struct Record<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    hierarchy: Option<Hierarchy>,
    #[serde(flatten)]
    data: &'a T,
}

pub struct Emitter<W: Write> {
    out: W,
    command: &'static str,
    hierarchy: Option<Hierarchy>,
    quiet: bool,
}

impl Emitter<io::StdoutLock<'static>> {
    pub fn stdout(command: &'static str, hierarchy: Option<Hierarchy>, quiet: bool) -> Self {
        Self {
            out: io::stdout().lock(),
            command,
            hierarchy,
            quiet,
        }
    }
}

impl<W: Write> Emitter<W> {
    pub fn record<T: Serialize>(&mut self, data: &T) -> Result<(), CliError> {
        let rec = Record {
            tool: "epd-hodograph",
            version: VERSION,
            command: self.command,
            hierarchy: self.hierarchy,
            data,
        };
        serde_json::to_writer(&mut self.out, &rec).map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(self.out).map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn summary(&self, line: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", line.as_ref());
        }
    }
}

/// Locus CSV: one row per converged sample.
pub fn write_locus_csv(path: &Path, locus: &Locus) -> Result<(), CliError> {
    let io_err = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    w.write_record([
        "param1", "param2", "x", "beta1_re", "beta1_im", "beta2_re", "beta2_im", "class", "residual",
    ])
    .map_err(io_err)?;
    for s in &locus.samples {
        let Some(p) = &s.point else { continue };
        let x = p.t.get(p.t.hierarchy().x_slot());
        let (b1, b2) = (p.p.beta1(), p.p.beta2());
        let residual = p.residuals.gradient.max(p.residuals.constraints);
        w.write_record([
            s.param1.to_string(),
            s.param2.to_string(),
            x.to_string(),
            b1.re.to_string(),
            b1.im.to_string(),
            b2.re.to_string(),
            b2.im.to_string(),
            p.sector.to_string(),
            residual.to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

/// Residual table with one row per grid node.
pub fn write_csv_rows(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let io_err = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    w.write_record(header).map_err(io_err)?;
    for r in rows {
        w.write_record(r.iter().map(f64::to_string)).map_err(io_err)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}
