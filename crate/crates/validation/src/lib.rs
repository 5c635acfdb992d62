//! Acceptance runs for `nlslab`; see `tests/acceptance.rs`.
//!
//! Kept in its own package so that `cargo test --workspace` reaches it
//! after the unit and integration suites of the other crates.
