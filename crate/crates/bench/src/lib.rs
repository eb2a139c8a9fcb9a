//! Criterion benchmarks for the lbsched solvers live under `benches/`.
