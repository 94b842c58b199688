//! Criterion benchmarks for `cbsim`; see `benches/`.
