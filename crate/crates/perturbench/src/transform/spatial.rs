//! Visual and spatial encodings: the 1D statement mapped onto 2D grids.
//!
//! Each encoder writes the message characters along a fixed walk over the
//! grid and leaves `.` in every cell the walk never reaches. Decoders
//! replay the same walk, so message dots and spaces survive untouched.

use crate::grid::CharGrid;

use super::TransformError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Vertical,
    Horizontal,
}

/// Rail index for the character at position `i` in a zigzag over `rails`
/// rows: 0, 1, ..., rails-1, rails-2, ..., 1, 0, 1, ...
fn zigzag_rail(i: usize, rails: usize) -> usize {
    let period = 2 * rails - 2;
    let r = i % period;
    if r < rails {
        r
    } else {
        period - r
    }
}

/// Character `i` goes to column `i` on its zigzag rail; the grid is
/// `len(text)` wide and `rails` tall.
pub fn encode_rail_fence(text: &str, rails: usize) -> Result<CharGrid, TransformError> {
    if rails < 2 {
        return Err(TransformError::InvalidParams(
            "rail fence needs at least 2 rails".into(),
        ));
    }
    if text.is_empty() {
        return Err(TransformError::InvalidParams(
            "rail fence input is empty".into(),
        ));
    }
    let chars: Vec<char> = text.chars().collect();
    let mut grid = CharGrid::filled(chars.len(), rails)?;
    for (i, &ch) in chars.iter().enumerate() {
        grid.set(zigzag_rail(i, rails), i, ch);
    }
    Ok(grid)
}

/// Read the zigzag back column by column. The grid width is exactly the
/// message length, so no length bookkeeping is needed.
pub fn invert_rail_fence(grid: &CharGrid, rails: usize) -> Result<String, TransformError> {
    if grid.height() != rails {
        return Err(TransformError::DecodeMismatch(format!(
            "grid has {} rows, spec says {rails} rails",
            grid.height()
        )));
    }
    Ok((0..grid.width())
        .map(|i| grid.get(zigzag_rail(i, rails), i))
        .collect())
}

/// Perimeter cell count of a `w` x `h` rectangle. Degenerate strips are all
/// perimeter.
fn perimeter_cells(w: usize, h: usize) -> usize {
    if w == 1 || h == 1 {
        w * h
    } else {
        2 * w + 2 * h - 4
    }
}

/// Candidate-ranking metric: `2W + 2H - 4`, or `W*H` when `H <= 2`. For a
/// width-1 column this overstates the true cell count, which keeps
/// degenerate strips from winning ties against real rectangles.
fn perimeter_metric(w: usize, h: usize) -> usize {
    if h <= 2 {
        w * h
    } else {
        2 * w + 2 * h - 4
    }
}

/// Clockwise perimeter walk from the top-left corner: across the top, down
/// the right edge, back across the bottom, up the left edge.
fn perimeter_walk(w: usize, h: usize) -> Vec<(usize, usize)> {
    if h == 1 {
        return (0..w).map(|c| (0, c)).collect();
    }
    if w == 1 {
        return (0..h).map(|r| (r, 0)).collect();
    }
    let mut walk = Vec::with_capacity(perimeter_cells(w, h));
    walk.extend((0..w).map(|c| (0, c)));
    walk.extend((1..h).map(|r| (r, w - 1)));
    walk.extend((0..w - 1).rev().map(|c| (h - 1, c)));
    walk.extend((1..h - 1).rev().map(|r| (r, 0)));
    walk
}

/// Pick the rectangle for a message of `len` characters: the perimeter
/// must hold the message, slack against the metric is minimized, and among
/// equal-slack candidates the widest wins (capped at `max_width`).
fn choose_rectangle(len: usize, max_width: usize) -> (usize, usize) {
    let mut best: Option<(usize, usize, usize)> = None;
    for w in 1..=max_width {
        let h = min_height(len, w);
        let slack = perimeter_metric(w, h) - len;
        match best {
            Some((_, _, best_slack)) if slack > best_slack => {}
            _ => best = Some((w, h, slack)),
        }
    }
    let (w, h, _) = best.expect("max_width >= 1");
    (w, h)
}

/// Smallest height whose perimeter holds `len` characters at width `w`,
/// measured by both the metric and the true cell count.
fn min_height(len: usize, w: usize) -> usize {
    if w == 1 {
        return len;
    }
    if w >= len {
        return 1;
    }
    if 2 * w >= len {
        return 2;
    }
    // 2w + 2h - 4 >= len, h >= 3 guaranteed because 2w < len.
    (len + 4 - 2 * w).div_ceil(2)
}

pub fn encode_rectangle_perimeter(
    text: &str,
    max_width: usize,
) -> Result<CharGrid, TransformError> {
    if text.is_empty() {
        return Err(TransformError::InvalidParams(
            "rectangle input is empty".into(),
        ));
    }
    let len = text.chars().count();
    let (w, h) = choose_rectangle(len, max_width);
    encode_rectangle_with_dims(text, w, h)
}

fn encode_rectangle_with_dims(text: &str, w: usize, h: usize) -> Result<CharGrid, TransformError> {
    let walk = perimeter_walk(w, h);
    let len = text.chars().count();
    if walk.len() < len {
        return Err(TransformError::InvalidParams(format!(
            "{w}x{h} perimeter holds {} characters, message has {len}",
            walk.len()
        )));
    }
    let mut grid = CharGrid::filled(w, h)?;
    for (ch, &(r, c)) in text.chars().zip(&walk) {
        grid.set(r, c, ch);
    }
    Ok(grid)
}

/// Read `msg_len` characters back along the clockwise walk. The length
/// comes from aux because trailing fill dots are indistinguishable from
/// message dots.
pub fn invert_rectangle_perimeter(
    grid: &CharGrid,
    msg_len: usize,
) -> Result<String, TransformError> {
    let walk = perimeter_walk(grid.width(), grid.height());
    if msg_len > walk.len() {
        return Err(TransformError::DecodeMismatch(format!(
            "message length {msg_len} exceeds perimeter {}",
            walk.len()
        )));
    }
    Ok(walk[..msg_len].iter().map(|&(r, c)| grid.get(r, c)).collect())
}

/// Cell order for the snake walk over a `w` x `h` grid.
fn snake_walk(w: usize, h: usize, orientation: Orientation) -> Vec<(usize, usize)> {
    let mut walk = Vec::with_capacity(w * h);
    match orientation {
        Orientation::Vertical => {
            for c in 0..w {
                if c % 2 == 0 {
                    walk.extend((0..h).map(|r| (r, c)));
                } else {
                    walk.extend((0..h).rev().map(|r| (r, c)));
                }
            }
        }
        Orientation::Horizontal => {
            for r in 0..h {
                if r % 2 == 0 {
                    walk.extend((0..w).map(|c| (r, c)));
                } else {
                    walk.extend((0..w).rev().map(|c| (r, c)));
                }
            }
        }
    }
    walk
}

/// Boustrophedon fill. Vertical: down the first column, up the second, and
/// so on, `extent` rows tall. Horizontal: across the first row, back along
/// the second, `extent` characters wide.
pub fn encode_snake(
    text: &str,
    orientation: Orientation,
    extent: usize,
) -> Result<CharGrid, TransformError> {
    if extent < 1 {
        return Err(TransformError::InvalidParams(
            "snake extent must be at least 1".into(),
        ));
    }
    if text.is_empty() {
        return Err(TransformError::InvalidParams("snake input is empty".into()));
    }
    let len = text.chars().count();
    let (w, h) = match orientation {
        Orientation::Vertical => (len.div_ceil(extent), extent),
        Orientation::Horizontal => (extent, len.div_ceil(extent)),
    };
    let walk = snake_walk(w, h, orientation);
    let mut grid = CharGrid::filled(w, h)?;
    for (ch, &(r, c)) in text.chars().zip(&walk) {
        grid.set(r, c, ch);
    }
    Ok(grid)
}

/// Read `msg_len` characters back along the snake walk. As with the
/// rectangle, trailing fill cells force the length to come from aux.
pub fn invert_snake(
    grid: &CharGrid,
    orientation: Orientation,
    msg_len: usize,
) -> Result<String, TransformError> {
    let walk = snake_walk(grid.width(), grid.height(), orientation);
    if msg_len > walk.len() {
        return Err(TransformError::DecodeMismatch(format!(
            "message length {msg_len} exceeds grid capacity {}",
            walk.len()
        )));
    }
    Ok(walk[..msg_len]
        .iter()
        .map(|&(r, c)| grid.get(r, c))
        .collect())
}
