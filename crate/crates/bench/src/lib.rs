//! Benchmarks live in benches/kernels.rs; this crate exports nothing.
