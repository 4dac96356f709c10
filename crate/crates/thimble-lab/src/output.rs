//! Serialization helpers and atomic file output.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde_json::{json, Map, Value};
use thimble_core::cps_model::{AffineMap, Point, Q};
use thimble_core::homology::MonodromyMatrix;
use thimble_core::Complex64;

use crate::SCHEMA_VERSION;

/// Reals as decimal strings with 17 significant digits.
pub fn num(x: f64) -> Value {
    Value::String(format!("{x:.16e}"))
}

pub fn complex(z: Complex64) -> Value {
    json!({ "re": num(z.re), "im": num(z.im) })
}

pub fn rational(x: Q) -> Value {
    json!({ "num": x.numer(), "den": x.denom() })
}

pub fn point(p: Point) -> Value {
    Value::Array(p.iter().map(|x| rational(*x)).collect())
}

pub fn matrix(m: &MonodromyMatrix) -> Value {
    json!(m.entries())
}

pub fn affine_map(a: &AffineMap) -> Value {
    json!({ "linear": matrix(&a.linear), "translation": point(a.translation) })
}

pub fn real_matrix(m: [[f64; 2]; 2]) -> Value {
    Value::Array(m.iter().map(|r| Value::Array(r.iter().map(|x| num(*x)).collect())).collect())
}

/// Top-level document: `schema_version`, `command` and the given fields.
pub fn document(command: &str, fields: Map<String, Value>) -> Value {
    let mut m = fields;
    m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    m.insert("command".into(), json!(command));
    Value::Object(m)
}

pub fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

/// Writes to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}

/// Sends output to `--out` if given, stdout otherwise.
pub fn emit(out: Option<&Path>, text: &str) -> io::Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            let mut s = io::stdout().lock();
            s.write_all(text.as_bytes())?;
            s.flush()
        }
    }
}
