use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use csv::{ErrorKind, ReaderBuilder, Trim, WriterBuilder};
use ndarray::Array2;

use crate::analysis::AlignmentReport;
use crate::error::{Error, Result};
use crate::estimator::DimEstimate;
use crate::local::LocalDimResult;
use crate::matrix::SampleMatrix;
use crate::sweep::SweepResult;

/// Reads a headerless numeric CSV. Lines starting with `#` are skipped.
pub fn read_csv(path: impl AsRef<Path>) -> Result<SampleMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(Trim::All)
        .from_reader(file);

    let mut data = Vec::new();
    let mut cols = 0;
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            match e.into_kind() {
                ErrorKind::Io(io) => Error::io(path, io),
                ErrorKind::UnequalLengths { expected_len, len, .. } => Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    field: len as usize,
                    message: format!("expected {expected_len} fields, found {len}"),
                },
                other => Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    field: 0,
                    message: format!("{other:?}"),
                },
            }
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        cols = record.len();
        for (col, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line,
                field: col + 1,
                message: format!("'{field}' is not a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::NonFiniteEntry {
                    path: path.to_path_buf(),
                    row: rows,
                    col,
                });
            }
            data.push(value);
        }
        rows += 1;
    }
    SampleMatrix::from_shape_vec(rows, cols, data)
}

/// Seventeen significant digits, enough to round-trip every double.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn opt_float(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

/// `# key: value` lines written above the header.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata {
    entries: Vec<(String, String)>,
}

impl Metadata {
    /// Starts with the tool name and version.
    pub fn new() -> Self {
        Self {
            entries: vec![("tool".into(), format!("prdim {}", env!("CARGO_PKG_VERSION")))],
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.push(key, value);
        self
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        // keep every metadata entry on one comment line
        let value = value.to_string().replace(['\n', '\r'], " ");
        self.entries.push((key.into(), value));
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }
}

/// A result that serializes to one CSV header and a list of rows.
pub trait Table {
    fn header(&self) -> Vec<&'static str>;
    fn rows(&self) -> Vec<Vec<String>>;
}

pub fn write_csv<W: Write>(table: &dyn Table, meta: &Metadata, out: W) -> std::io::Result<()> {
    let mut out = BufWriter::new(out);
    for (k, v) in meta.entries() {
        writeln!(out, "# {k}: {v}")?;
    }
    let mut writer = WriterBuilder::new().from_writer(out);
    writer.write_record(table.header())?;
    for row in table.rows() {
        writer.write_record(&row)?;
    }
    writer.flush()
}

pub fn emit_csv(table: &dyn Table, meta: &Metadata, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(table, meta, file).map_err(|e| Error::io(path, e))
}

/// Writes a matrix as headerless CSV readable by [`read_csv`], metadata first.
pub fn emit_matrix_csv(matrix: &SampleMatrix, meta: &Metadata, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let write = || -> std::io::Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        for (k, v) in meta.entries() {
            writeln!(out, "# {k}: {v}")?;
        }
        for row in matrix.view().rows() {
            let fields: Vec<String> = row.iter().map(|&v| format_float(v)).collect();
            writeln!(out, "{}", fields.join(","))?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

const ESTIMATE_COLUMNS: [&str; 13] = [
    "correction",
    "centering",
    "gamma",
    "valid",
    "noise_corrected",
    "a",
    "b",
    "t1",
    "t2",
    "t3",
    "t4",
    "t5",
    "diagnostics",
];

fn estimate_fields(e: &DimEstimate) -> Vec<String> {
    let t = &e.terms;
    let mut row = vec![
        e.variant.correction.to_string(),
        e.variant.centering.to_string(),
        opt_float(e.value),
        e.is_valid().to_string(),
        e.noise_corrected.to_string(),
        format_float(t.a),
        format_float(t.b),
    ];
    row.extend(t.as_array().iter().map(|&v| format_float(v)));
    row.push(e.diagnostics.join("; "));
    row
}

/// One row per estimate.
pub struct EstimateTable<'a>(pub &'a [DimEstimate]);

impl Table for EstimateTable<'_> {
    fn header(&self) -> Vec<&'static str> {
        ESTIMATE_COLUMNS.to_vec()
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.0.iter().map(estimate_fields).collect()
    }
}

/// Wall-clock times are left out so that reruns are byte-identical.
impl Table for SweepResult {
    fn header(&self) -> Vec<&'static str> {
        let mut h = vec!["p", "q", "repetition", "seed"];
        h.extend(ESTIMATE_COLUMNS);
        h
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.records
            .iter()
            .map(|r| {
                let mut row = vec![
                    r.p.to_string(),
                    r.q.to_string(),
                    r.repetition.to_string(),
                    r.seed.to_string(),
                ];
                row.extend(estimate_fields(&r.estimate));
                row
            })
            .collect()
    }
}

/// One row per radius and variant.
pub struct LocalTable<'a>(pub &'a [LocalDimResult]);

impl Table for LocalTable<'_> {
    fn header(&self) -> Vec<&'static str> {
        vec![
            "radius",
            "correction",
            "centering",
            "mean_gamma",
            "std_gamma",
            "valid_centers",
            "skipped_centers",
            "small_balls",
            "mean_ball_size",
        ]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.0
            .iter()
            .map(|r| {
                vec![
                    format_float(r.radius),
                    r.variant.correction.to_string(),
                    r.variant.centering.to_string(),
                    opt_float(r.mean_gamma),
                    opt_float(r.std_gamma()),
                    r.per_center.len().to_string(),
                    r.skipped_centers.to_string(),
                    r.small_balls.to_string(),
                    opt_float(r.mean_ball_size()),
                ]
            })
            .collect()
    }
}

/// Long format: one `(quantity, i, j, value)` row per number of the report.
pub struct AlignmentTable<'a>(pub &'a AlignmentReport);

impl Table for AlignmentTable<'_> {
    fn header(&self) -> Vec<&'static str> {
        vec!["quantity", "i", "j", "value"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        let r = self.0;
        let scalar = |name: &str, v: f64| vec![name.to_string(), String::new(), String::new(), format_float(v)];
        let mut rows = Vec::new();
        for (i, m) in r.per_manifold.iter().enumerate() {
            rows.push(vec!["kappa".into(), i.to_string(), String::new(), format_float(m.kappa)]);
            rows.push(vec!["gamma".into(), i.to_string(), String::new(), format_float(m.gamma)]);
        }
        let cka: &Array2<f64> = &r.cka_matrix;
        for ((i, j), &v) in cka.indexed_iter() {
            if i < j {
                rows.push(vec!["cka".into(), i.to_string(), j.to_string(), format_float(v)]);
            }
        }
        for (name, v) in [
            ("gamma_joint", r.gamma_joint),
            ("gamma_align", r.gamma_align),
            ("gamma_ortho", r.gamma_ortho),
            ("exd", r.exd),
            ("weighted_mean_cka", r.weighted_mean_cka),
            ("decomposition_residual", r.decomposition_residual),
            ("identity_residual", r.identity_residual),
        ] {
            rows.push(scalar(name, v));
        }
        rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 123_456_789.123_456_78] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn metadata_stays_on_one_line() {
        let m = Metadata::new().with("note", "a\nb");
        assert_eq!(m.entries()[1].1, "a b");
    }
}
