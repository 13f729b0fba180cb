//! JSON-lines report emission.
//!
//! Every record is one self-contained JSON object on one line: the command
//! name, the full resolved parameter set, the seed, the result payload, and
//! the wall time. Rerunning with the same seed reproduces every field except
//! `wall_time_seconds` bit-for-bit, because floats serialize through the
//! shortest round-trip representation.

use std::io::Write as _;
use std::time::Instant;

use serde_json::{json, Value};

/// Stopwatch for the `wall_time_seconds` field.
pub struct Timer(Instant);

impl Timer {
    pub fn start() -> Timer {
        Timer(Instant::now())
    }

    pub fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// Print one record to stdout. Each line is written atomically so records
/// from interleaved workers never shear.
pub fn emit(command: &str, seed: u64, params: &Value, result: Value, wall_seconds: f64) {
    let record = json!({
        "command": command,
        "seed": seed,
        "params": params,
        "result": result,
        "wall_time_seconds": wall_seconds,
    });
    let mut line = serde_json::to_string(&record).expect("report serialization cannot fail");
    line.push('\n');
    let stdout = std::io::stdout();
    let mut handle = stdout.lock();
    handle
        .write_all(line.as_bytes())
        .expect("stdout write failed");
}

/// Same envelope with `"summary": true`, for the closing aggregate record.
pub fn emit_summary(command: &str, seed: u64, params: &Value, result: Value, wall_seconds: f64) {
    let record = json!({
        "command": command,
        "summary": true,
        "seed": seed,
        "params": params,
        "result": result,
        "wall_time_seconds": wall_seconds,
    });
    let mut line = serde_json::to_string(&record).expect("report serialization cannot fail");
    line.push('\n');
    let stdout = std::io::stdout();
    let mut handle = stdout.lock();
    handle
        .write_all(line.as_bytes())
        .expect("stdout write failed");
}
