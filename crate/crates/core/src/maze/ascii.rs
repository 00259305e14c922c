//! Plain-text level format: `#` wall, `.` empty, `A` start, `G` goal, one row
//! per line.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;

use super::level::{Cell, Direction, MazeLevel};
use crate::error::{Error, Result};

pub fn render_ascii(level: &MazeLevel) -> String {
    let mut out = String::with_capacity((level.width + 1) * level.height);
    for y in 0..level.height {
        for x in 0..level.width {
            let c = Cell::new(x, y);
            out.push(if c == level.start {
                'A'
            } else if c == level.goal {
                'G'
            } else if level.is_wall(c) {
                '#'
            } else {
                '.'
            });
        }
        out.push('\n');
    }
    out
}

/// Parses a level; the start facing is always east.
pub fn parse_ascii(text: &str) -> Result<MazeLevel> {
    let err = |line: usize, message: String| Error::Parse { line, message };
    let mut rows: alloc::vec::Vec<&str> = text.lines().map(|l| l.trim_end_matches('\r')).collect();
    while rows.last().is_some_and(|l| l.is_empty()) {
        rows.pop();
    }
    if rows.is_empty() {
        return Err(err(1, "empty level".into()));
    }
    let width = rows[0].chars().count();
    let mut start = None;
    let mut goal = None;
    let mut walls = BTreeSet::new();
    for (y, row) in rows.iter().enumerate() {
        let line = y + 1;
        if row.chars().count() != width {
            return Err(err(
                line,
                format!("row has {} cells, expected {width}", row.chars().count()),
            ));
        }
        for (x, ch) in row.chars().enumerate() {
            let c = Cell::new(x, y);
            match ch {
                '#' => {
                    walls.insert(c);
                }
                '.' => {}
                'A' if start.is_none() => start = Some(c),
                'G' if goal.is_none() => goal = Some(c),
                'A' | 'G' => return Err(err(line, format!("duplicate '{ch}'"))),
                other => return Err(err(line, format!("unknown character {other:?}"))),
            }
        }
    }
    let start = start.ok_or_else(|| err(rows.len(), "missing start 'A'".into()))?;
    let goal = goal.ok_or_else(|| err(rows.len(), "missing goal 'G'".into()))?;
    Ok(MazeLevel {
        width,
        height: rows.len(),
        start,
        facing: Direction::East,
        goal,
        walls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_map_parses() {
        let level = parse_ascii("A.#\n...\n..G\n").unwrap();
        assert_eq!(level.width, 3);
        assert_eq!(level.height, 3);
        assert_eq!(level.start, Cell::new(0, 0));
        assert_eq!(level.goal, Cell::new(2, 2));
        assert_eq!(
            level.walls.iter().copied().collect::<alloc::vec::Vec<_>>(),
            [Cell::new(2, 0)]
        );
    }

    #[test]
    fn render_then_parse_is_identity() {
        let level = parse_ascii("#..A\n.##.\nG...\r\n\n").unwrap();
        assert_eq!(parse_ascii(&render_ascii(&level)).unwrap(), level);
    }

    #[test]
    fn missing_goal_is_an_error() {
        assert!(matches!(parse_ascii("A..\n...\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn ragged_rows_are_an_error() {
        assert!(matches!(
            parse_ascii("A..\n..\n..G\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn duplicate_start_is_an_error() {
        assert!(matches!(parse_ascii("A.A\n..G\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn unknown_character_is_an_error() {
        assert!(matches!(parse_ascii("A.x\n..G\n"), Err(Error::Parse { .. })));
    }
}
