//! Criterion benchmarks for the chatmood pipeline; see `benches/`.
