//! Deterministic report encoding: JSON with sorted keys and CSV with LF line
//! endings, all floats printed with 17 significant digits.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use super::CliError;
use crate::analysis::Tolerances;
use crate::linalg::CMat;

pub const TOOL: &str = "thirdq";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `x` with 17 significant digits, round-trip exact.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        // fold -0 into 0 so equal values print identically
        let x = if x == 0.0 { 0.0 } else { x };
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    // arbitrary_precision keeps the literal digits
    Value::Number(serde_json::from_str(&fmt_f64(x)).expect("formatted float is a JSON number"))
}

pub fn complex(z: C64) -> Value {
    Value::Array(vec![num(z.re), num(z.im)])
}

pub fn cvec(v: &[C64]) -> Value {
    Value::Array(v.iter().copied().map(complex).collect())
}

pub fn rvec(v: &[f64]) -> Value {
    Value::Array(v.iter().copied().map(num).collect())
}

pub fn cmat(m: &CMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Common report envelope.
pub fn envelope(command: &str, model_sha256: &str, tol: &Tolerances, extra_tol: Map<String, Value>, results: Value) -> Value {
    let mut tolerances = Map::new();
    tolerances.insert("input".into(), num(tol.input));
    tolerances.insert("marginal".into(), num(tol.marginal));
    tolerances.extend(extra_tol);
    json!({
        "tool": TOOL,
        "version": VERSION,
        "command": command,
        "model_sha256": model_sha256,
        "tolerances": Value::Object(tolerances),
        "results": results,
    })
}

pub fn json_bytes(v: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("report serializes");
    out.push(b'\n');
    out
}

pub fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Input(format!("csv encoding failed: {e}"));
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Input(format!("csv encoding failed: {e}")))
}

/// Write to `path`, or to stdout when absent.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Input(format!("cannot write to stdout: {e}")))
        }
    }
}
