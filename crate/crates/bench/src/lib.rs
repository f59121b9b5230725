//! Benchmark-only crate; see benches/analyses.rs.
