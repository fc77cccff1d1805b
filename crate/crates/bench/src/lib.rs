//! Criterion benchmarks for the factorization kernels; run with
//! `cargo bench -p drnmf-bench`.
