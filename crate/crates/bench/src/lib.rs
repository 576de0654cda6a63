//! Benchmark-only crate; see benches/primitives.rs.
