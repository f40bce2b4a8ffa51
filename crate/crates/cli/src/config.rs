use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

/// Every field a JSON config file may set. Command-line flags take precedence.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub restarts: Option<usize>,
    pub sdp_tol: Option<f64>,
    pub channel: Option<String>,
    pub param: Option<String>,
    pub grid: Option<String>,
    pub levels: Option<u32>,
    pub s: Option<f64>,
    pub d: Option<usize>,
    pub n: Option<usize>,
    pub random: Option<usize>,
    pub instances: Option<PathBuf>,
    pub replay_dir: Option<PathBuf>,
    pub swarm: Option<bool>,
    pub tolerance: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::validation(format!("config {}: {e}", path.display())))
    }
}

/// `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = |msg: String| CliError::validation(format!("grid `{text}`: {msg}"));
    let text = text.trim();
    let values: Vec<f64> = if text.contains(':') {
        let parts: Vec<f64> = text
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|e| bad(e.to_string())))
            .collect::<Result<_, _>>()?;
        let [start, stop, step] = parts[..] else {
            return Err(bad("expected start:stop:step".into()));
        };
        if !(step > 0.0) || !start.is_finite() || !stop.is_finite() {
            return Err(bad("step must be positive and the ends finite".into()));
        }
        if stop < start {
            Vec::new()
        } else {
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            (0..count)
                .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
                .collect()
        }
    } else {
        text.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| p.parse::<f64>().map_err(|e| bad(e.to_string())))
            .collect::<Result<_, _>>()?
    };
    if values.is_empty() {
        return Err(bad("no grid points".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad("non-finite grid point".into()));
    }
    Ok(values)
}

/// Fails early when the output file could not be created.
pub fn check_writable(path: &Path) -> Result<(), CliError> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if !parent.is_dir() {
        return Err(CliError::validation(format!(
            "output directory {} does not exist",
            parent.display()
        )));
    }
    if path.is_dir() {
        return Err(CliError::validation(format!(
            "output path {} is a directory",
            path.display()
        )));
    }
    Ok(())
}
