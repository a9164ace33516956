//! Verdict reporting for the acceptance suite.
//!
//! Lines go straight to the process stderr handle, so they appear even when
//! the test harness captures output.

use std::fmt::Display;
use std::io::Write;

/// Writes `criterion NN: PASS|FAIL title (detail)` and returns `ok`.
pub fn verdict(id: u32, title: &str, ok: bool, detail: impl Display) -> bool {
    let status = if ok { "PASS" } else { "FAIL" };
    let line = format!("criterion {id:>2}: {status} {title} ({detail})\n");
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    ok
}
