//! Plain-text file formats: grid maps, trajectories, network snapshots and
//! Q tables.

mod map;
mod policy;
mod qtable;
mod snapshot;
mod trajectory;

use std::path::{Path, PathBuf};

pub use map::{parse_map, render_map};
pub use policy::{load_policy, save_policy};
pub use qtable::{parse_qtable, write_qtable};
pub use snapshot::{load_equality, parse_net, save_equality, write_net, NET_FORMAT_VERSION};
pub use trajectory::{
    load_case_base, load_trajectories, parse_trajectories, save_trajectories, write_trajectories,
};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("map line {line}, column {column}: {message}")]
    Map {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("no trajectories")]
    NoTrajectories,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

impl FormatError {
    pub(crate) fn syntax(line: usize, message: impl Into<String>) -> Self {
        FormatError::Syntax {
            line,
            message: message.into(),
        }
    }
}

pub(crate) fn read(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write(path: &Path, contents: &str) -> Result<(), FormatError> {
    std::fs::write(path, contents).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Seventeen significant digits: enough to round-trip any `f64`.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Parses a finite real, naming the line on failure.
pub(crate) fn parse_f64(token: &str, line: usize) -> Result<f64, FormatError> {
    let v: f64 = token
        .parse()
        .map_err(|_| FormatError::syntax(line, format!("`{token}` is not a number")))?;
    if !v.is_finite() {
        return Err(FormatError::syntax(line, format!("`{token}` is not finite")));
    }
    Ok(v)
}

/// Lines with `#` comments stripped and surrounding whitespace trimmed,
/// numbered from 1. Blank lines are dropped.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}
