use cbirl_core::agent::TabularQ;

use super::{content_lines, fmt_f64, parse_f64, FormatError};

const HEADER: &str = "cbirl-qtable";

/// One `state_key action q_value` line per table entry, after a header
/// giving the table shape.
pub fn write_qtable(q: &TabularQ) -> String {
    let cells = q.cell_count();
    let actions = q.action_count();
    let mut out = format!("{HEADER} {cells} {actions}\n");
    for cell in 0..cells {
        for a in 0..actions {
            out.push_str(&format!("{cell} {a} {}\n", fmt_f64(q.value(cell, a))));
        }
    }
    out
}

/// Parses a table written by [`write_qtable`] into row-major values, checking
/// the declared shape against `cells` and `actions`.
pub fn parse_qtable(text: &str, cells: usize, actions: usize) -> Result<Vec<f64>, FormatError> {
    let mut lines = content_lines(text);
    let (line, header) = lines
        .next()
        .ok_or_else(|| FormatError::Invalid("empty Q table".into()))?;
    let shape: Vec<&str> = header.split_whitespace().collect();
    if shape.first() != Some(&HEADER) || shape.len() != 3 {
        return Err(FormatError::syntax(line, "expected `cbirl-qtable <cells> <actions>`"));
    }
    if shape[1] != cells.to_string() || shape[2] != actions.to_string() {
        return Err(FormatError::syntax(
            line,
            format!("table is {}x{}, environment needs {cells}x{actions}", shape[1], shape[2]),
        ));
    }
    let mut table = vec![f64::NAN; cells * actions];
    for (line, content) in lines {
        let parts: Vec<&str> = content.split_whitespace().collect();
        let [key, action, value] = parts[..] else {
            return Err(FormatError::syntax(line, "expected `state_key action q_value`"));
        };
        let index = |t: &str, bound: usize, what: &str| {
            t.parse::<usize>()
                .ok()
                .filter(|&v| v < bound)
                .ok_or_else(|| FormatError::syntax(line, format!("bad {what} `{t}`")))
        };
        let slot = index(key, cells, "state key")? * actions + index(action, actions, "action")?;
        if !table[slot].is_nan() {
            return Err(FormatError::syntax(line, "duplicate entry"));
        }
        table[slot] = parse_f64(value, line)?;
    }
    if table.iter().any(|v| v.is_nan()) {
        return Err(FormatError::Invalid("Q table is missing entries".into()));
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use cbirl_core::agent::{AgentConfig, Transition};
    use cbirl_core::env::StateDiscretizer;

    #[test]
    fn round_trip() {
        let mut q = TabularQ::new(StateDiscretizer::unit_lattice(&[3]), 2, &AgentConfig::default());
        q.update(&[Transition {
            state: vec![0.5],
            action: 1,
            reward: 0.1,
            next_state: vec![1.0],
            episode_end: false,
        }])
        .unwrap();
        let text = write_qtable(&q);
        let table = parse_qtable(&text, 3, 2).unwrap();
        assert_eq!(table, q.table());
        assert!(parse_qtable(&text, 4, 2).is_err());
        assert!(parse_qtable(&text.replace("1 1 ", "1 7 "), 3, 2).is_err());
        let missing: String = text.lines().take(3).map(|l| format!("{l}\n")).collect();
        assert!(parse_qtable(&missing, 3, 2).is_err());
    }
}
