//! Criterion benchmarks for `slitcap-core`; see `benches/`.
