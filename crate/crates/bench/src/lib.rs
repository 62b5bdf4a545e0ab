//! Benchmarks for the prover pipeline live in `benches/`.
