//! Benchmark-only crate; see benches/kernels.rs. The library target exists
//! so the crate participates in the workspace build and shares the compiled
//! core crate with the benchmarks.
