use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use coarsedim::Window;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::manifest::{Recorder, RunManifest};

#[derive(Debug)]
pub enum CliError {
    Core(coarsedim::Error),
    Io(String),
    Json(String),
    Usage(String),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Io(_) => "E_IO",
            CliError::Json(_) => "E_JSON",
            CliError::Usage(_) => "E_USAGE",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) | CliError::Json(m) | CliError::Usage(m) => f.write_str(m),
        }
    }
}

impl From<coarsedim::Error> for CliError {
    fn from(e: coarsedim::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn read(path: &str, rec: &mut Recorder) -> CliResult<Vec<u8>> {
    let bytes = fs::read(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
    rec.input(path, &bytes);
    Ok(bytes)
}

fn json_err(path: &str, e: impl fmt::Display) -> CliError {
    // keep the message on one line
    CliError::Json(format!("{path}: {}", e.to_string().replace('\n', " ")))
}

pub fn load_json<T: DeserializeOwned>(path: &str, rec: &mut Recorder) -> CliResult<T> {
    let bytes = read(path, rec)?;
    serde_json::from_slice(&bytes).map_err(|e| json_err(path, e))
}

/// Reads a window written as one JSON document or as JSON lines (a header
/// object followed by one point array per line).
pub fn load_window(path: &str, rec: &mut Recorder) -> CliResult<Window> {
    let bytes = read(path, rec)?;
    if let Ok(w) = serde_json::from_slice::<Window>(&bytes) {
        return Ok(w);
    }
    let text = std::str::from_utf8(&bytes).map_err(|e| json_err(path, e))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| CliError::Json(format!("{path}: empty window file")))?;
    let mut doc: Map<String, Value> = match serde_json::from_str(header) {
        Ok(m) => m,
        // a single-document window that failed validation: report that error
        Err(_) => return Err(json_err(path, serde_json::from_slice::<Window>(&bytes).unwrap_err())),
    };
    if doc.contains_key("points") {
        return Err(json_err(path, serde_json::from_slice::<Window>(&bytes).unwrap_err()));
    }
    let points = lines
        .map(serde_json::from_str::<Value>)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| json_err(path, e))?;
    doc.insert("points".into(), Value::Array(points));
    serde_json::from_value(Value::Object(doc)).map_err(|e| json_err(path, e))
}

/// Serializes `body` as a JSON object with the manifest attached.
pub fn document<T: Serialize>(body: &T, manifest: &RunManifest) -> Value {
    let mut value = serde_json::to_value(body).expect("output serializes");
    let obj = value.as_object_mut().expect("outputs are JSON objects");
    obj.insert(
        "manifest".into(),
        serde_json::to_value(manifest).expect("manifest serializes"),
    );
    value
}

fn write_text(out: Option<&str>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("{path}: {e}"))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

pub fn emit(doc: &Value, out: Option<&str>) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(doc).expect("value serializes");
    text.push('\n');
    write_text(out, &text)
}

/// Writes a window document; a `.jsonl` target gets one point per line.
pub fn emit_window(window: &Window, manifest: &RunManifest, out: Option<&str>) -> CliResult<()> {
    let jsonl = out.is_some_and(|p| Path::new(p).extension().is_some_and(|e| e == "jsonl"));
    if !jsonl {
        return emit(&document(window, manifest), out);
    }
    let mut header = document(window, manifest);
    let points = header
        .as_object_mut()
        .expect("window is an object")
        .remove("points")
        .expect("window has points");
    let mut text = serde_json::to_string(&header).expect("header serializes");
    text.push('\n');
    for p in points.as_array().expect("points are an array") {
        text.push_str(&serde_json::to_string(p).expect("point serializes"));
        text.push('\n');
    }
    write_text(out, &text)
}
