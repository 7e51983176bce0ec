//! Acceptance criteria for `normrel`; see `tests/acceptance.rs`.
