//! Criterion benchmarks for pess-core live under `benches/`.
