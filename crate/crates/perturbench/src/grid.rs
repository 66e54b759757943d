//! Rectangular character grids shared by the spatial encodings.
//!
//! Grids render between `GRID START` / `GRID END` marker lines, bit-exact:
//! no whitespace is trimmed or added, so message spaces survive as literal
//! cells. The fill character `.` marks cells the encoding never visits;
//! decoders walk positions algorithmically and never strip dots, so message
//! dots are never confused with fill.

use thiserror::Error;

/// Fill character for structurally empty cells.
pub const FILL: char = '.';

const GRID_START: &str = "GRID START";
const GRID_END: &str = "GRID END";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GridError {
    #[error("grid rows have unequal lengths")]
    RaggedGrid,
    #[error("missing GRID START / GRID END markers")]
    MissingMarkers,
    #[error("grid must have at least one row and one column")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharGrid {
    rows: Vec<Vec<char>>,
}

impl CharGrid {
    /// A `width` x `height` grid of fill cells.
    pub fn filled(width: usize, height: usize) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::Empty);
        }
        Ok(Self {
            rows: vec![vec![FILL; width]; height],
        })
    }

    pub fn from_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self, GridError> {
        if rows.is_empty() {
            return Err(GridError::Empty);
        }
        let parsed: Vec<Vec<char>> = rows.iter().map(|r| r.as_ref().chars().collect()).collect();
        let width = parsed[0].len();
        if width == 0 {
            return Err(GridError::Empty);
        }
        if parsed.iter().any(|r| r.len() != width) {
            return Err(GridError::RaggedGrid);
        }
        Ok(Self { rows: parsed })
    }

    pub fn width(&self) -> usize {
        self.rows[0].len()
    }

    pub fn height(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, row: usize, col: usize) -> char {
        self.rows[row][col]
    }

    pub fn set(&mut self, row: usize, col: usize, ch: char) {
        self.rows[row][col] = ch;
    }

    /// `GRID START`, the rows on separate lines, `GRID END`. Exactly
    /// `height + 2` lines, no trailing whitespace added or removed.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(GRID_START);
        for row in &self.rows {
            out.push('\n');
            out.extend(row.iter());
        }
        out.push('\n');
        out.push_str(GRID_END);
        out
    }

    /// Inverse of [`render`](Self::render): `parse(render(g)) == g`.
    pub fn parse(text: &str) -> Result<Self, GridError> {
        let lines: Vec<&str> = text.split('\n').collect();
        if lines.len() < 3 || lines[0] != GRID_START || lines[lines.len() - 1] != GRID_END {
            return Err(GridError::MissingMarkers);
        }
        Self::from_rows(&lines[1..lines.len() - 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn renders_with_markers() {
        let g = CharGrid::from_rows(&["AB", "CD"]).unwrap();
        assert_eq!(g.render(), "GRID START\nAB\nCD\nGRID END");
    }

    #[test]
    fn renders_single_cell() {
        let g = CharGrid::from_rows(&["X"]).unwrap();
        assert_eq!(g.render(), "GRID START\nX\nGRID END");
    }

    #[test]
    fn fill_cells_render_as_literal_dots() {
        let g = CharGrid::from_rows(&["A.", "..", ".B"]).unwrap();
        assert_eq!(g.render(), "GRID START\nA.\n..\n.B\nGRID END");
    }

    #[test]
    fn render_has_height_plus_two_lines() {
        let g = CharGrid::filled(4, 3).unwrap();
        assert_eq!(g.render().split('\n').count(), 5);
    }

    #[test]
    fn parse_inverts_render() {
        let g = CharGrid::parse("GRID START\nAB\nCD\nGRID END").unwrap();
        assert_eq!(g, CharGrid::from_rows(&["AB", "CD"]).unwrap());
    }

    #[test]
    fn parse_single_row() {
        let g = CharGrid::parse("GRID START\nX\nGRID END").unwrap();
        assert_eq!(g, CharGrid::from_rows(&["X"]).unwrap());
    }

    #[test]
    fn parse_rejects_missing_markers() {
        assert_eq!(CharGrid::parse("AB\nCD").unwrap_err(), GridError::MissingMarkers);
    }

    #[test]
    fn parse_rejects_ragged_interior() {
        assert_eq!(
            CharGrid::parse("GRID START\nAB\nC\nGRID END").unwrap_err(),
            GridError::RaggedGrid
        );
    }

    #[test]
    fn ragged_rows_rejected_at_construction() {
        assert_eq!(
            CharGrid::from_rows(&["AB", "C"]).unwrap_err(),
            GridError::RaggedGrid
        );
    }

    #[test]
    fn trailing_spaces_are_content() {
        let g = CharGrid::from_rows(&["A ", "  "]).unwrap();
        let rendered = g.render();
        assert_eq!(rendered, "GRID START\nA \n  \nGRID END");
        assert_eq!(CharGrid::parse(&rendered).unwrap(), g);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn round_trip_identity(
            width in 1usize..40,
            height in 1usize..20,
            seed in any::<u64>(),
        ) {
            // Cells drawn from the full payload alphabet, dots and spaces
            // included.
            let alphabet: Vec<char> =
                " .$abcXYZ019{}^+\\".chars().collect();
            let mut rng = crate::rng::SplitMix64::new(seed);
            let mut g = CharGrid::filled(width, height).unwrap();
            for r in 0..height {
                for c in 0..width {
                    let ch = alphabet[rng.next_below(alphabet.len() as u64) as usize];
                    g.set(r, c, ch);
                }
            }
            let parsed = CharGrid::parse(&g.render()).unwrap();
            prop_assert_eq!(parsed, g);
        }
    }
}
