//! File output helpers. Everything lands atomically: write to a temp file
//! in the target directory, then rename over the destination.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(CliError::Io)
}

/// Atomically write `bytes` to `dir/name`, returning the final path.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    let final_path = dir.join(name);
    let tmp_path = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp_path).map_err(CliError::Io)?;
        f.write_all(bytes).map_err(CliError::Io)?;
        f.sync_all().map_err(CliError::Io)?;
    }
    fs::rename(&tmp_path, &final_path).map_err(CliError::Io)?;
    Ok(final_path)
}

/// Pretty-printed JSON, atomically.
pub fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    write_atomic(dir, name, text.as_bytes())
}

/// Trajectory CSV, atomically.
pub fn write_trajectory_csv(
    dir: &Path,
    name: &str,
    traj: &epinet::integrate::Trajectory,
) -> Result<PathBuf, CliError> {
    let mut buf = Vec::new();
    traj.write_csv(&mut buf).map_err(CliError::Io)?;
    write_atomic(dir, name, &buf)
}
