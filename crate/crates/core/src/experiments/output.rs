use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::config::ScenarioConfig;

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

/// Writes `rows` as CSV with a header row taken from the field names.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Writes `<out_dir>/<command>-report.txt`: the resolved scenario followed by
/// the command's findings. Returns the path written.
pub fn write_report(config: &ScenarioConfig, command: &str, body: &str) -> Result<PathBuf> {
    let dir = &config.out_dir;
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = dir.join(format!("{command}-report.txt"));
    let text = format!("# command: {command}\n# resolved scenario\n{}\n# results\n{body}", config.to_toml());
    fs::write(&path, text).map_err(|e| io_err(&path, e))?;
    Ok(path)
}
