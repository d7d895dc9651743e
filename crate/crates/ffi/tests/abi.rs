use std::ffi::CStr;
use std::ptr;

use prdim::estimator::{estimate_dimensionality, Centering, Correction, EstimatorVariant};
use prdim::synth::{generate, PopulationSpec};
use prdim_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    unsafe { prdim_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn matrix(data: &[f64], rows: usize, cols: usize) -> *mut PrdimMatrix {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { prdim_matrix_new(data.as_ptr(), rows, cols, &mut m) }, PrdimStatus::Ok);
    m
}

#[test]
fn matrix_round_trip() {
    let data = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    let m = matrix(&data, 3, 2);
    let (mut r, mut c) = (0, 0);
    assert_eq!(unsafe { prdim_matrix_shape(m, &mut r, &mut c) }, PrdimStatus::Ok);
    assert_eq!((r, c), (3, 2));
    let mut out = [0.0; 6];
    assert_eq!(unsafe { prdim_matrix_copy(m, out.as_mut_ptr(), 6) }, PrdimStatus::Ok);
    assert_eq!(out, data);
    assert_eq!(unsafe { prdim_matrix_copy(m, out.as_mut_ptr(), 5) }, PrdimStatus::InvalidInput);
    unsafe { prdim_matrix_free(m) };
}

#[test]
fn estimate_matches_library() {
    let spec = PopulationSpec::linear(3, 0.5);
    let reference = generate(&spec, 40, 30, 7).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { prdim_generate(PrdimModel::Linear, 3, 1.0, 0.5, 40, 30, 7, &mut m) },
        PrdimStatus::Ok
    );
    let mut est = std::mem::MaybeUninit::<PrdimEstimate>::uninit();
    let status = unsafe {
        prdim_estimate(m, PrdimCorrection::Both, PrdimCentering::Task, ptr::null(), 0, est.as_mut_ptr())
    };
    assert_eq!(status, PrdimStatus::Ok);
    let est = unsafe { est.assume_init() };
    let expected = estimate_dimensionality(
        &reference,
        EstimatorVariant::new(Correction::Both, Centering::Task),
        None,
    )
    .unwrap();
    assert!(est.valid);
    assert!(!est.noise_corrected);
    assert_eq!(est.gamma, expected.gamma());
    assert_eq!(est.terms, expected.terms.as_array());
    unsafe { prdim_matrix_free(m) };
}

#[test]
fn pair_is_noise_corrected() {
    let mut pair = ptr::null_mut();
    assert_eq!(
        unsafe { prdim_generate_pair(PrdimModel::Rff, 2, 1.0, 0.3, 30, 20, 1, &mut pair) },
        PrdimStatus::Ok
    );
    let mut est = PrdimEstimate {
        gamma: 0.0,
        a: 0.0,
        b: 0.0,
        terms: [0.0; 5],
        valid: false,
        noise_corrected: false,
    };
    let status = unsafe {
        prdim_estimate_pair(pair, PrdimCorrection::Naive, PrdimCentering::None, ptr::null(), 0, &mut est)
    };
    assert_eq!(status, PrdimStatus::Ok);
    assert!(est.noise_corrected);
    unsafe { prdim_pair_free(pair) };
}

#[test]
fn weights_are_passed_through() {
    let data: Vec<f64> = (0..24).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
    let m = matrix(&data, 6, 4);
    let w = [1.0, 1.0, 0.0, 1.0, 1.0, 1.0];
    let mut weighted = std::mem::MaybeUninit::<PrdimEstimate>::uninit();
    let status = unsafe {
        prdim_estimate(m, PrdimCorrection::Both, PrdimCentering::Task, w.as_ptr(), 6, weighted.as_mut_ptr())
    };
    assert_eq!(status, PrdimStatus::Ok);
    let mut kept = data[..8].to_vec();
    kept.extend_from_slice(&data[12..]);
    let k = matrix(&kept, 5, 4);
    let mut direct = std::mem::MaybeUninit::<PrdimEstimate>::uninit();
    let status = unsafe {
        prdim_estimate(k, PrdimCorrection::Both, PrdimCentering::Task, ptr::null(), 0, direct.as_mut_ptr())
    };
    assert_eq!(status, PrdimStatus::Ok);
    let (a, b) = unsafe { (weighted.assume_init(), direct.assume_init()) };
    assert!((a.a - b.a).abs() <= 1e-12 * b.a.abs());
    assert!((a.b - b.b).abs() <= 1e-12 * b.b.abs());

    let status = unsafe {
        prdim_estimate(m, PrdimCorrection::Both, PrdimCentering::Task, w.as_ptr(), 5, weighted.as_mut_ptr())
    };
    assert_ne!(status, PrdimStatus::Ok);
    unsafe {
        prdim_matrix_free(m);
        prdim_matrix_free(k);
    }
}

#[test]
fn errors_are_reported() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { prdim_matrix_new(ptr::null(), 2, 2, &mut m) }, PrdimStatus::NullPointer);
    assert!(last_error().contains("null"));

    let data = [1.0, f64::NAN, 3.0, 4.0];
    assert_eq!(unsafe { prdim_matrix_new(data.as_ptr(), 2, 2, &mut m) }, PrdimStatus::InvalidInput);
    assert!(!last_error().is_empty());

    let small = matrix(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 3, 2);
    assert!(last_error().is_empty());
    let mut est = std::mem::MaybeUninit::<PrdimEstimate>::uninit();
    let status = unsafe {
        prdim_estimate(small, PrdimCorrection::Both, PrdimCentering::Task, ptr::null(), 0, est.as_mut_ptr())
    };
    assert_eq!(status, PrdimStatus::Precondition);
    unsafe { prdim_matrix_free(small) };
}

#[test]
fn twonn_rejects_duplicate_rows() {
    let dup = matrix(&[0.0, 0.0, 0.0, 0.0, 1.0, 2.0], 3, 2);
    let mut d = 0.0;
    assert_ne!(unsafe { prdim_twonn(dup, &mut d) }, PrdimStatus::Ok);
    unsafe { prdim_matrix_free(dup) };

    let line: Vec<f64> = (0..50).flat_map(|i| [i as f64 * (1.0 + 0.01 * (i % 3) as f64), 0.0]).collect();
    let m = matrix(&line, 50, 2);
    assert_eq!(unsafe { prdim_twonn(m, &mut d) }, PrdimStatus::Ok);
    assert!(d > 0.0);
    unsafe { prdim_matrix_free(m) };
}

#[test]
fn message_is_truncated_and_terminated() {
    let mut m = ptr::null_mut();
    unsafe { prdim_matrix_new(ptr::null(), 1, 1, &mut m) };
    let mut buf = [1 as std::ffi::c_char; 4];
    let full = unsafe { prdim_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(full > 3);
    assert_eq!(buf[3], 0);
}
