//! Benchmark-only crate; the benches under `benches/` hold the content.
