//! `.npy` version 1.0, little-endian 8-byte floats, C order, two dimensions.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::SampleMatrix;

const MAGIC: &[u8] = b"\x93NUMPY";
const PREAMBLE: usize = 10;

fn unsupported(path: &Path, message: impl Into<String>) -> Error {
    Error::UnsupportedFormat {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn malformed(path: &Path, offset: usize, message: impl Into<String>) -> Error {
    Error::ParseBinary {
        path: path.to_path_buf(),
        offset: offset as u64,
        message: message.into(),
    }
}

/// Value of `'key':` in the header dict, up to the next top-level comma.
fn dict_value<'h>(header: &'h str, key: &str) -> Option<&'h str> {
    let start = header.find(&format!("'{key}'"))? + key.len() + 2;
    let rest = header[start..].trim_start().strip_prefix(':')?.trim_start();
    let end = if rest.starts_with('(') {
        rest.find(')')? + 1
    } else {
        rest.find([',', '}']).unwrap_or(rest.len())
    };
    Some(rest[..end].trim())
}

fn parse_shape(path: &Path, text: &str) -> Result<Vec<usize>> {
    let inner = text
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| malformed(path, PREAMBLE, format!("shape '{text}' is not a tuple")))?;
    inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| malformed(path, PREAMBLE, format!("shape entry '{s}' is not an integer")))
        })
        .collect()
}

pub fn read_npy(path: impl AsRef<Path>) -> Result<SampleMatrix> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < PREAMBLE || !bytes.starts_with(MAGIC) {
        return Err(malformed(path, 0, "missing .npy magic string"));
    }
    let (major, minor) = (bytes[6], bytes[7]);
    if (major, minor) != (1, 0) {
        return Err(unsupported(path, format!("format version {major}.{minor}; only 1.0 is read")));
    }
    let header_len = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
    let data_start = PREAMBLE + header_len;
    let header = bytes
        .get(PREAMBLE..data_start)
        .and_then(|h| std::str::from_utf8(h).ok())
        .ok_or_else(|| malformed(path, PREAMBLE, "header is truncated or not ASCII"))?;

    let descr = dict_value(header, "descr").ok_or_else(|| malformed(path, PREAMBLE, "header lacks 'descr'"))?;
    if descr.trim_matches(['\'', '"']) != "<f8" {
        return Err(unsupported(path, format!("dtype {descr}; only '<f8' is read")));
    }
    match dict_value(header, "fortran_order") {
        Some("False") => {}
        Some("True") => return Err(unsupported(path, "Fortran-ordered arrays are not read")),
        _ => return Err(malformed(path, PREAMBLE, "header lacks 'fortran_order'")),
    }
    let shape_text = dict_value(header, "shape").ok_or_else(|| malformed(path, PREAMBLE, "header lacks 'shape'"))?;
    let shape = parse_shape(path, shape_text)?;
    if shape.len() != 2 {
        return Err(Error::NotTwoDimensional {
            path: path.to_path_buf(),
            ndim: shape.len(),
        });
    }
    let (rows, cols) = (shape[0], shape[1]);
    let expected = rows * cols * 8;
    let payload = &bytes[data_start..];
    if payload.len() != expected {
        return Err(malformed(
            path,
            data_start + payload.len().min(expected),
            format!("expected {expected} data bytes, found {}", payload.len()),
        ));
    }
    let data: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteEntry {
            path: path.to_path_buf(),
            row: pos / cols,
            col: pos % cols,
        });
    }
    SampleMatrix::from_shape_vec(rows, cols, data)
}

/// Writes a version 1.0 file readable by [`read_npy`] and by numpy.
pub fn write_npy(matrix: &SampleMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (rows, cols) = matrix.shape();
    let mut header = format!("{{'descr': '<f8', 'fortran_order': False, 'shape': ({rows}, {cols}), }}");
    // pad so that the data starts on a 64-byte boundary, header ends in '\n'
    let unpadded = PREAMBLE + header.len() + 1;
    header.push_str(&" ".repeat((64 - unpadded % 64) % 64));
    header.push('\n');

    let mut bytes = Vec::with_capacity(PREAMBLE + header.len() + rows * cols * 8);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&[1, 0]);
    bytes.extend_from_slice(&(header.len() as u16).to_le_bytes());
    bytes.extend_from_slice(header.as_bytes());
    for v in matrix.view().iter() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dict_values_are_extracted() {
        let h = "{'descr': '<f8', 'fortran_order': False, 'shape': (4, 2), }";
        assert_eq!(dict_value(h, "descr"), Some("'<f8'"));
        assert_eq!(dict_value(h, "fortran_order"), Some("False"));
        assert_eq!(dict_value(h, "shape"), Some("(4, 2)"));
    }

    #[test]
    fn shapes_of_any_rank_parse() {
        let p = Path::new("x");
        assert_eq!(parse_shape(p, "(3,)").unwrap(), vec![3]);
        assert_eq!(parse_shape(p, "()").unwrap(), Vec::<usize>::new());
        assert_eq!(parse_shape(p, "(2, 3, 4)").unwrap(), vec![2, 3, 4]);
    }
}
