//! Benchmark-only crate; see `benches/eta_pipeline.rs`.
