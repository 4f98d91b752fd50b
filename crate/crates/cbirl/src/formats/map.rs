use cbirl_core::env::GridWorld;

use super::FormatError;

fn map_error(line: usize, column: usize, message: impl Into<String>) -> FormatError {
    FormatError::Map {
        line,
        column,
        message: message.into(),
    }
}

/// Parses a grid map: one row per line, `.` free, `#` wall, `S` start, `G`
/// target. Trailing blank lines are ignored; everything else must be a
/// rectangle.
pub fn parse_map(text: &str) -> Result<GridWorld, FormatError> {
    let rows: Vec<&str> = text.trim_end().lines().map(|l| l.trim_end_matches('\r')).collect();
    if rows.is_empty() || rows[0].is_empty() {
        return Err(map_error(1, 1, "empty map"));
    }
    let width = rows[0].chars().count();
    let mut walls = Vec::with_capacity(width * rows.len());
    let mut start = None;
    let mut goal = None;
    for (y, row) in rows.iter().enumerate() {
        let line = y + 1;
        let len = row.chars().count();
        if len != width {
            return Err(map_error(
                line,
                len.min(width) + 1,
                format!("row has {len} cells, expected {width}"),
            ));
        }
        for (x, c) in row.chars().enumerate() {
            let column = x + 1;
            match c {
                '.' => walls.push(false),
                '#' => walls.push(true),
                'S' | 'G' => {
                    let slot = if c == 'S' { &mut start } else { &mut goal };
                    if slot.is_some() {
                        return Err(map_error(line, column, format!("second `{c}` cell")));
                    }
                    *slot = Some((x, y));
                    walls.push(false);
                }
                other => return Err(map_error(line, column, format!("unexpected character `{other}`"))),
            }
        }
    }
    let last = rows.len();
    let start = start.ok_or_else(|| map_error(last, width, "map has no `S` cell"))?;
    let goal = goal.ok_or_else(|| map_error(last, width, "map has no `G` cell"))?;
    GridWorld::new(width, rows.len(), walls, start, goal).map_err(|e| map_error(1, 1, e.to_string()))
}

pub fn render_map(grid: &GridWorld) -> String {
    let mut out = String::with_capacity((grid.width() + 1) * grid.height());
    for y in 0..grid.height() {
        for x in 0..grid.width() {
            out.push(if (x, y) == grid.start() {
                'S'
            } else if (x, y) == grid.goal() {
                'G'
            } else if grid.is_wall(x, y) {
                '#'
            } else {
                '.'
            });
        }
        out.push('\n');
    }
    out
}
