//! Criterion benchmarks for the `popart` crate live under `benches/`.
