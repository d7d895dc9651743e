use std::fs;
use std::path::Path;

use prdim::estimator::{estimate_all_variants, Centering, Correction, EstimatorVariant};
use prdim::io::{
    emit_csv, emit_plot, ingest, read_csv, read_npy, render_svg, write_npy, EstimateTable, InputFormat, Metadata,
};
use prdim::local::{radius_sweep, BallSpec};
use prdim::sweep::{all_corrections, subsample_sweep};
use prdim::synth::{generate, PopulationSpec};
use prdim::{Error, SampleMatrix};

fn four_by_two() -> SampleMatrix {
    SampleMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0], vec![7.0, 8.0]]).unwrap()
}

/// Data rows of an emitted CSV: comment lines and the header removed.
fn data_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .unwrap();
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

/// A version 1.0 `.npy` file assembled byte by byte.
fn npy_bytes(descr: &str, shape: &str, payload: &[u8]) -> Vec<u8> {
    let mut header = format!("{{'descr': '{descr}', 'fortran_order': False, 'shape': {shape}, }}");
    while (10 + header.len() + 1) % 64 != 0 {
        header.push(' ');
    }
    header.push('\n');
    let mut out = b"\x93NUMPY\x01\x00".to_vec();
    out.extend_from_slice(&(header.len() as u16).to_le_bytes());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(payload);
    out
}

#[test]
fn csv_example_is_four_by_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    fs::write(&path, "1,2\n3,4\n5,6\n7,8").unwrap();
    assert_eq!(read_csv(&path).unwrap(), four_by_two());
    assert_eq!(ingest(&path, InputFormat::Csv).unwrap(), four_by_two());
}

#[test]
fn csv_comments_and_spaces_are_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    fs::write(&path, "# produced elsewhere\n1, 2\n3 ,4\n5,6\n7,8\n").unwrap();
    assert_eq!(read_csv(&path).unwrap(), four_by_two());
}

#[test]
fn csv_nan_reports_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    fs::write(&path, "1,2\n3,nan\n5,6\n").unwrap();
    let err = read_csv(&path).unwrap_err();
    assert!(matches!(err, Error::NonFiniteEntry { row: 1, col: 1, .. }), "{err}");
}

#[test]
fn csv_parse_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    fs::write(&path, "1,2\n3,x\n").unwrap();
    assert!(matches!(read_csv(&path).unwrap_err(), Error::Parse { line: 2, field: 2, .. }));
    fs::write(&path, "1,2\n3,4,5\n").unwrap();
    assert!(matches!(read_csv(&path).unwrap_err(), Error::Parse { line: 2, .. }));
}

#[test]
fn npy_from_bytes_matches_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.npy");
    let payload: Vec<u8> = (1..=8).flat_map(|v| (v as f64).to_le_bytes()).collect();
    fs::write(&path, npy_bytes("<f8", "(4, 2)", &payload)).unwrap();
    assert_eq!(read_npy(&path).unwrap(), four_by_two());
    assert_eq!(InputFormat::from_path(&path), InputFormat::Npy);
}

#[test]
fn npy_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.npy");
    let m = generate(&PopulationSpec::rff(3, 1.0, 0.2), 17, 9, 5).unwrap();
    write_npy(&m, &path).unwrap();
    assert_eq!(read_npy(&path).unwrap(), m);
}

#[test]
fn npy_rejects_other_layouts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.npy");
    fs::write(&path, npy_bytes("<f4", "(2, 2)", &[0; 16])).unwrap();
    assert!(matches!(read_npy(&path).unwrap_err(), Error::UnsupportedFormat { .. }));
    fs::write(&path, npy_bytes("<f8", "(2, 2, 1)", &[0; 32])).unwrap();
    assert!(matches!(read_npy(&path).unwrap_err(), Error::NotTwoDimensional { ndim: 3, .. }));
    fs::write(&path, npy_bytes("<f8", "(3, 2)", &[0; 40])).unwrap();
    assert!(matches!(read_npy(&path).unwrap_err(), Error::ParseBinary { .. }));
    fs::write(&path, b"not an npy file").unwrap();
    assert!(read_npy(&path).is_err());
}

#[test]
fn npy_nan_reports_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.npy");
    let payload: Vec<u8> = [1.0, 2.0, 3.0, f64::INFINITY].iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(&path, npy_bytes("<f8", "(2, 2)", &payload)).unwrap();
    assert!(matches!(read_npy(&path).unwrap_err(), Error::NonFiniteEntry { row: 1, col: 1, .. }));
}

#[test]
fn emitted_floats_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("est.csv");
    let m = generate(&PopulationSpec::linear(4, 0.7), 30, 20, 11).unwrap();
    let estimates: Vec<_> = estimate_all_variants(&m, Centering::Task, None).unwrap().into_values().collect();
    emit_csv(&EstimateTable(&estimates), &Metadata::new().with("seed", 11), &path).unwrap();
    let (header, rows) = data_rows(&path);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    assert_eq!(rows.len(), 4);
    for (row, est) in rows.iter().zip(&estimates) {
        assert_eq!(row[col("gamma")].parse::<f64>().unwrap().to_bits(), est.gamma().to_bits());
        assert_eq!(row[col("a")].parse::<f64>().unwrap().to_bits(), est.terms.a.to_bits());
        let t = est.terms.as_array();
        for k in 0..5 {
            assert_eq!(row[col(&format!("t{}", k + 1))].parse::<f64>().unwrap().to_bits(), t[k].to_bits());
        }
    }
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.lines().any(|l| l == "# seed: 11"));
}

#[test]
fn empty_grid_writes_header_and_metadata_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let m = generate(&PopulationSpec::linear(2, 0.1), 20, 10, 1).unwrap();
    let sweep = subsample_sweep(&m, &[], &[10], 3, &all_corrections(Centering::Task), 0).unwrap();
    emit_csv(&sweep, &Metadata::new().with("note", "empty"), &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let non_comment: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(non_comment.len(), 1);
    assert!(non_comment[0].starts_with("p,q,repetition,seed"));
    assert!(text.lines().any(|l| l.starts_with('#')));
}

#[test]
fn two_cell_sweep_has_two_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let m = generate(&PopulationSpec::linear(2, 0.1), 20, 10, 1).unwrap();
    let sweep = subsample_sweep(&m, &[8, 16], &[10], 1, &[EstimatorVariant::both()], 4).unwrap();
    emit_csv(&sweep, &Metadata::new(), &path).unwrap();
    assert_eq!(data_rows(&path).1.len(), 2);
}

fn count(svg: &str, tag: &str, class: &str) -> usize {
    let doc = roxmltree::Document::parse(svg).unwrap();
    doc.descendants()
        .filter(|n| n.has_tag_name(tag) && n.attribute("class") == Some(class))
        .count()
}

#[test]
fn single_point_plot_has_one_marker_and_no_line() {
    let m = generate(&PopulationSpec::linear(2, 0.1), 20, 10, 1).unwrap();
    let sweep = subsample_sweep(&m, &[20], &[10], 1, &[EstimatorVariant::both()], 0).unwrap();
    let svg = render_svg(&sweep).unwrap();
    assert_eq!(count(&svg, "circle", "marker"), 1);
    assert_eq!(count(&svg, "polyline", "series"), 0);
}

#[test]
fn four_variant_sweep_has_four_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plot.svg");
    let m = generate(&PopulationSpec::linear(3, 0.3), 80, 20, 2).unwrap();
    let sweep = subsample_sweep(&m, &[10, 20, 40, 80], &[20], 3, &all_corrections(Centering::Task), 0).unwrap();
    emit_plot(&sweep, &path).unwrap();
    let svg = fs::read_to_string(&path).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    assert_eq!(doc.root_element().attribute("version"), Some("1.1"));
    assert_eq!(count(&svg, "polyline", "series"), 4);
    let legend: std::collections::BTreeSet<String> = doc
        .descendants()
        .filter(|n| n.attribute("class") == Some("legend"))
        .filter_map(|n| n.text().map(String::from))
        .collect();
    assert_eq!(legend.len(), 4);
    for c in Correction::ALL {
        assert!(legend.iter().any(|l| l.contains(c.as_str())), "{legend:?}");
    }
}

#[test]
fn invalid_points_break_the_line() {
    // 4 rows cannot support the row correction at p = 3, so that column is a gap
    let m = generate(&PopulationSpec::linear(3, 0.3), 40, 12, 2).unwrap();
    let sweep = subsample_sweep(&m, &[3, 10, 20, 30, 40], &[12], 2, &[EstimatorVariant::both()], 0).unwrap();
    assert!(sweep.records.iter().filter(|r| r.p == 3).all(|r| !r.estimate.is_valid()));
    let svg = render_svg(&sweep).unwrap();
    assert_eq!(count(&svg, "circle", "marker"), 4);
    assert_eq!(count(&svg, "polyline", "series"), 1);
}

#[test]
fn plot_without_valid_records_fails() {
    let m = generate(&PopulationSpec::linear(3, 0.3), 40, 12, 2).unwrap();
    let sweep = subsample_sweep(&m, &[3], &[12], 2, &[EstimatorVariant::both()], 0).unwrap();
    assert!(matches!(render_svg(&sweep).unwrap_err(), Error::NoValidRecords));
}

#[test]
fn local_results_plot_per_variant() {
    let m = generate(&PopulationSpec::rff(2, 1.0, 0.0), 120, 30, 2).unwrap();
    let radii = [2.0, 3.0, 4.0, 6.0];
    let mut results = radius_sweep(&m, &BallSpec::euclidean(radii[0]), &radii, EstimatorVariant::both()).unwrap();
    results.extend(radius_sweep(&m, &BallSpec::euclidean(radii[0]), &radii, EstimatorVariant::naive()).unwrap());
    let svg = render_svg(results.as_slice()).unwrap();
    assert!(count(&svg, "polyline", "series") >= 2);
}
