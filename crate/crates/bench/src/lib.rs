//! Shared fixtures for the engine benchmarks.

use arbias_core::{simulate, ArModel};

pub fn ar2_model() -> ArModel {
    ArModel::ar2(0.5, 0.2, 1.0).unwrap()
}

pub fn ar2_series(n: usize) -> Vec<f64> {
    simulate(&ar2_model(), n, 0xBE7C).unwrap()
}
