//! Benchmark harness, synthetic data and file formats around `acm-core`.

pub mod bench;
pub mod datagen;
pub mod io;
