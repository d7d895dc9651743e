use std::collections::BTreeMap;

use prdim::estimator::{estimate_all_variants, Centering, Correction};
use prdim::synth::{generate, PopulationSpec};

fn mean_gamma(size: usize, seeds: std::ops::Range<u64>) -> BTreeMap<Correction, f64> {
    let spec = PopulationSpec::linear(5, 0.0);
    let n = seeds.end - seeds.start;
    let mut mean = BTreeMap::new();
    for seed in seeds {
        let m = generate(&spec, size, size, seed).unwrap();
        for (c, e) in estimate_all_variants(&m, Centering::Task, None).unwrap() {
            *mean.entry(c).or_insert(0.0) += e.gamma() / n as f64;
        }
    }
    mean
}

#[test]
fn large_samples_agree_across_variants() {
    for (c, g) in mean_gamma(2000, 600..610) {
        assert!((g - 5.0).abs() <= 0.02 * 5.0, "{c:?}: {g}");
    }
}

#[test]
fn small_samples_need_both_corrections() {
    let mean = mean_gamma(30, 700..800);
    for (c, g) in mean {
        let close = (g - 5.0).abs() <= 0.1 * 5.0;
        assert_eq!(close, c == Correction::Both, "{c:?}: {g}");
    }
}
