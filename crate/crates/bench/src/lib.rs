//! Criterion benchmarks for the energy-space solvers live under `benches/`.
