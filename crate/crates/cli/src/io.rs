use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

/// Failure to obtain a well-formed input. Maps to exit code 3.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

pub fn input_error(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

/// Byte offset of a 1-based (line, column) position.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    start + column.saturating_sub(1)
}

pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> anyhow::Result<T> {
    serde_json::from_str(text).map_err(|e| {
        if e.line() == 0 {
            input_error(format!("{origin}: {e}"))
        } else {
            let offset = byte_offset(text, e.line(), e.column());
            input_error(format!("{origin}:{}:{} (byte offset {offset}): {e}", e.line(), e.column()))
        }
    })
}

pub fn read_text(path: &str) -> anyhow::Result<String> {
    fs::read_to_string(path).map_err(|e| input_error(format!("{path}: {e}")))
}

pub fn read_json<T: DeserializeOwned>(path: &str) -> anyhow::Result<T> {
    parse_json(&read_text(path)?, path)
}

pub fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, to_pretty(value))?;
    Ok(())
}
