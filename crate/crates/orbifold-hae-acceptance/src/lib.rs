//! Acceptance harness; the criteria live in tests/acceptance.rs.
