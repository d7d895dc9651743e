//! Matrix ingestion, CSV tables and SVG plots.

mod csv;
mod npy;
mod plot;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

pub use self::csv::{
    emit_csv, emit_matrix_csv, format_float, read_csv, write_csv, AlignmentTable, EstimateTable, LocalTable, Metadata, Table,
};
pub use self::npy::{read_npy, write_npy};
pub use self::plot::{emit_plot, render_svg, PlotData, PlotPoint, Plottable, Series};

use crate::error::{Error, Result};
use crate::matrix::SampleMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Csv,
    Npy,
}

impl InputFormat {
    /// `.npy` by extension, CSV otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("npy") => InputFormat::Npy,
            _ => InputFormat::Csv,
        }
    }
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(InputFormat::Csv),
            "npy" => Ok(InputFormat::Npy),
            other => Err(Error::InvalidArgument(format!("unknown format '{other}' (expected csv or npy)"))),
        }
    }
}

impl fmt::Display for InputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputFormat::Csv => "csv",
            InputFormat::Npy => "npy",
        })
    }
}

pub fn ingest(path: impl AsRef<Path>, format: InputFormat) -> Result<SampleMatrix> {
    match format {
        InputFormat::Csv => read_csv(path),
        InputFormat::Npy => read_npy(path),
    }
}
