//! Output sinks. CSV output starts with the resolved settings as `#` comment
//! lines; JSON output is a single document, so the settings go to stderr.

use std::fs::File;
use std::io::{self, BufWriter, Write};

use roqec::optimize::CellOutcome;
use serde::Serialize;

use crate::config::{Format, Output, Settings};
use crate::Failure;

pub struct Sink {
    writer: Box<dyn Write>,
}

impl Sink {
    pub fn open(output: &Output, command: &str, settings: &Settings) -> Result<Self, Failure> {
        let writer: Box<dyn Write> = match &output.out {
            Some(path) => Box::new(BufWriter::new(
                File::create(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        let mut sink = Self { writer };
        let header = settings.comment_lines(command);
        match output.format {
            Format::Csv => sink.writer.write_all(header.as_bytes())?,
            Format::Json => eprint!("{header}"),
        }
        Ok(sink)
    }

    pub fn comment(&mut self, line: &str) -> Result<(), Failure> {
        writeln!(self.writer, "# {line}")?;
        Ok(())
    }

    pub fn csv<R, I>(&mut self, header: &[&str], rows: I) -> Result<(), Failure>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator,
        R::Item: AsRef<[u8]>,
    {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut self.writer);
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, value: &T) -> Result<(), Failure> {
        serde_json::to_writer_pretty(&mut self.writer, value)?;
        self.writer.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), Failure> {
        self.writer.flush()?;
        Ok(())
    }
}

#[derive(Debug, Serialize)]
pub struct BaselinePoint {
    pub x: f64,
    pub fidelity: f64,
}

#[derive(Debug, Serialize)]
pub struct PerNEntry {
    pub n: usize,
    pub pfb_n: f64,
    pub f_n: f64,
}

/// JSON form of one phase-map cell; keys mirror the CSV columns.
#[derive(Debug, Serialize)]
pub struct MapEntry {
    pub x: f64,
    pub pmeas: f64,
    pub best_n: Option<usize>,
    pub best_pfb: Option<f64>,
    pub fmax: Option<f64>,
    pub baseline: f64,
    pub status: String,
    pub per_n: Vec<PerNEntry>,
}

impl From<&CellOutcome> for MapEntry {
    fn from(c: &CellOutcome) -> Self {
        let baseline = roqec::single_qubit_fidelity(c.x);
        match &c.result {
            Ok(r) => MapEntry {
                x: c.x,
                pmeas: c.p_meas,
                best_n: Some(r.best.n),
                best_pfb: Some(r.best.p_fb_star),
                fmax: Some(r.best.f_star),
                baseline,
                status: "ok".into(),
                per_n: r
                    .per_n
                    .iter()
                    .map(|o| PerNEntry {
                        n: o.n,
                        pfb_n: o.p_fb_star,
                        f_n: o.f_star,
                    })
                    .collect(),
            },
            Err(msg) => MapEntry {
                x: c.x,
                pmeas: c.p_meas,
                best_n: None,
                best_pfb: None,
                fmax: None,
                baseline,
                status: format!("error: {msg}"),
                per_n: Vec::new(),
            },
        }
    }
}
