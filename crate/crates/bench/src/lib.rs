//! Criterion benchmarks for `repvar`; see `benches/`.
