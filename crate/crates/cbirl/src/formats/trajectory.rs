use std::path::Path;

use cbirl_core::case_base::CaseBase;
use cbirl_core::Trajectory;

use super::{content_lines, fmt_f64, parse_f64, read, write, FormatError};

/// Parses the line-oriented trajectory format: `#` starts a comment, a line
/// `trajectory` opens a new trajectory, and every other line is one state.
pub fn parse_trajectories(text: &str) -> Result<Vec<Trajectory>, FormatError> {
    let mut out: Vec<Trajectory> = Vec::new();
    let mut opened_at = Vec::new();
    let mut dim = None;
    for (line, content) in content_lines(text) {
        if content == "trajectory" {
            out.push(Vec::new());
            opened_at.push(line);
            continue;
        }
        let Some(current) = out.last_mut() else {
            return Err(FormatError::syntax(line, "state before any `trajectory` line"));
        };
        let state = content
            .split_whitespace()
            .map(|tok| parse_f64(tok, line))
            .collect::<Result<Vec<_>, _>>()?;
        match dim {
            None => dim = Some(state.len()),
            Some(d) if d != state.len() => {
                return Err(FormatError::syntax(
                    line,
                    format!("state has {} components, expected {d}", state.len()),
                ))
            }
            Some(_) => {}
        }
        current.push(state);
    }
    if out.is_empty() {
        return Err(FormatError::NoTrajectories);
    }
    if let Some(i) = out.iter().position(Vec::is_empty) {
        return Err(FormatError::syntax(opened_at[i], "trajectory has no states"));
    }
    Ok(out)
}

pub fn write_trajectories(trajectories: &[Trajectory]) -> String {
    let mut out = String::new();
    for t in trajectories {
        out.push_str("trajectory\n");
        for state in t {
            let row: Vec<String> = state.iter().map(|&v| fmt_f64(v)).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    out
}

pub fn load_trajectories(path: &Path) -> Result<Vec<Trajectory>, FormatError> {
    parse_trajectories(&read(path)?)
}

pub fn save_trajectories(path: &Path, trajectories: &[Trajectory]) -> Result<(), FormatError> {
    write(path, &write_trajectories(trajectories))
}

pub fn load_case_base(path: &Path) -> Result<CaseBase, FormatError> {
    CaseBase::new(load_trajectories(path)?).map_err(|e| FormatError::Invalid(e.to_string()))
}
