//! Output is assembled in memory and written in one step, so a failed command
//! never leaves a partial file behind.

use std::io::Write;
use std::path::Path;

use tempfile::NamedTempFile;

use crate::error::CliError;

pub fn emit(text: &str, path: Option<&str>) -> Result<(), CliError> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(CliError::io("<stdout>"))?;
            out.flush().map_err(CliError::io("<stdout>"))
        }
        Some(p) => write_atomic(Path::new(p), text),
    }
}

fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let shown = path.display().to_string();
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(CliError::io(&shown))?;
    tmp.write_all(text.as_bytes()).map_err(CliError::io(&shown))?;
    tmp.persist(path).map_err(|e| CliError::Io { path: shown, source: e.error })?;
    Ok(())
}

pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialises");
    s.push('\n');
    s
}
