//! Rendering of move sequences: side-by-side diagrams with a number above
//! each, a stacked file format that can be read back, and SVG.

use std::fmt::Write as _;

use thiserror::Error;

use crate::board::{Board, BoardError, Cell, Orientation};

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("frame {frame}: {source}")]
    Board { frame: usize, source: BoardError },
    #[error("line {0}: expected '% step <k> [distance <d>]'")]
    Header(usize),
    #[error("trace has no frames")]
    Empty,
}

/// One diagram of a trace with the number printed above it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub step: usize,
    pub distance: Option<usize>,
    pub board: Board,
}

/// Frames from a sequence of boards leading to a solved one: distances
/// count down to zero.
pub fn solution_frames(boards: &[Board]) -> Vec<Frame> {
    let n = boards.len();
    boards
        .iter()
        .enumerate()
        .map(|(i, b)| Frame {
            step: i,
            distance: Some(n - 1 - i),
            board: b.clone(),
        })
        .collect()
}

fn grid_lines(board: &Board) -> Vec<String> {
    board
        .render()
        .lines()
        .filter(|l| !l.starts_with('%'))
        .map(str::to_string)
        .collect()
}

/// Diagrams left to right, two spaces apart, each headed by a right-aligned
/// label.
pub fn side_by_side(labels: &[String], boards: &[Board]) -> String {
    let grids: Vec<Vec<String>> = boards.iter().map(grid_lines).collect();
    let width = |i: usize| {
        grids[i]
            .first()
            .map_or(0, String::len)
            .max(labels[i].len().min(3))
    };
    let mut lines = vec![String::new()];
    let height = grids.iter().map(Vec::len).max().unwrap_or(0);
    lines.extend(std::iter::repeat_n(String::new(), height));
    for i in 0..grids.len() {
        let w = width(i);
        let sep = if i == 0 { "" } else { "  " };
        let _ = write!(lines[0], "{sep}{:<w$}", format!("{:>3}", labels[i]));
        for r in 0..height {
            let row = grids[i].get(r).map_or("", String::as_str);
            let _ = write!(lines[r + 1], "{sep}{row:<w$}");
        }
    }
    let mut out: Vec<String> = lines
        .into_iter()
        .map(|l| l.trim_end().to_string())
        .collect();
    out.retain(|l| !l.is_empty() || height == 0);
    out.join("\n")
}

/// Side-by-side diagrams labelled with distance-to-solve (or step number).
pub fn render_frames(frames: &[Frame]) -> String {
    let labels: Vec<String> = frames
        .iter()
        .map(|f| f.distance.unwrap_or(f.step).to_string())
        .collect();
    let boards: Vec<Board> = frames.iter().map(|f| f.board.clone()).collect();
    side_by_side(&labels, &boards)
}

/// Stacked form: `% step <k> [distance <d>]` followed by the board text,
/// frames separated by blank lines.
pub fn write_trace(frames: &[Frame]) -> String {
    let mut out = String::new();
    for (i, f) in frames.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = write!(out, "% step {}", f.step);
        if let Some(d) = f.distance {
            let _ = write!(out, " distance {d}");
        }
        out.push('\n');
        out.push_str(&f.board.render());
        out.push('\n');
    }
    out
}

/// Reads the stacked form. A file holding a single board without a step
/// header is one frame.
pub fn parse_trace(text: &str) -> Result<Vec<Frame>, TraceError> {
    let mut frames = Vec::new();
    let mut header: Option<(usize, Option<usize>)> = None;
    let mut body = String::new();
    let flush =
        |header: Option<(usize, Option<usize>)>, body: &mut String, frames: &mut Vec<Frame>| {
            if body.trim().is_empty() {
                return Ok(());
            }
            let frame = frames.len();
            let (board, _) =
                Board::parse_layout(body).map_err(|source| TraceError::Board { frame, source })?;
            let (step, distance) = header.unwrap_or((frame, None));
            frames.push(Frame {
                step,
                distance,
                board,
            });
            body.clear();
            Ok(())
        };
    for (ln, line) in text.lines().enumerate() {
        let t = line.trim();
        if let Some(rest) = t.strip_prefix("% step") {
            flush(header, &mut body, &mut frames)?;
            let words: Vec<&str> = rest.split_whitespace().collect();
            let step = words
                .first()
                .and_then(|w| w.parse().ok())
                .ok_or(TraceError::Header(ln + 1))?;
            let distance = match words.get(1..) {
                Some(["distance", d]) => Some(d.parse().map_err(|_| TraceError::Header(ln + 1))?),
                Some([]) | None => None,
                _ => return Err(TraceError::Header(ln + 1)),
            };
            header = Some((step, distance));
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    flush(header, &mut body, &mut frames)?;
    if frames.is_empty() {
        return Err(TraceError::Empty);
    }
    Ok(frames)
}

/// Empty-cell positions of single-empty frames; `None` if any frame has a
/// different number of empty cells.
pub fn empty_path(frames: &[Frame]) -> Option<Vec<(usize, usize)>> {
    frames
        .iter()
        .map(|f| {
            let b = &f.board;
            let mut empty = (0..b.height())
                .flat_map(|r| (0..b.width()).map(move |c| (r, c)))
                .filter(|&(r, c)| b.cell(r, c) == Cell::Empty);
            let first = empty.next()?;
            empty.next().is_none().then_some(first)
        })
        .collect()
}

const CELL: usize = 20;
const GAP: usize = 12;

/// SVG of the frames left to right; when every frame has one empty cell a
/// thick polyline over the first frame traces the empty cell's path.
pub fn render_svg(frames: &[Frame]) -> String {
    let (w, h) = frames
        .first()
        .map_or((0, 0), |f| (f.board.width(), f.board.height()));
    let frame_w = w * CELL;
    let total_w = frames.len() * (frame_w + GAP) + GAP;
    let total_h = h * CELL + 2 * GAP + 14;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" height="{total_h}" viewBox="0 0 {total_w} {total_h}">"#
    );
    for (i, f) in frames.iter().enumerate() {
        let x0 = GAP + i * (frame_w + GAP);
        let y0 = GAP + 14;
        let label = f.distance.unwrap_or(f.step);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="monospace" font-size="12" text-anchor="middle">{label}</text>"#,
            x0 + frame_w / 2,
            GAP + 6
        );
        let _ = writeln!(s, r#"<g class="frame" data-step="{}">"#, f.step);
        for r in 0..f.board.height() {
            for c in 0..f.board.width() {
                let (x, y) = (x0 + c * CELL, y0 + r * CELL);
                let fill = match f.board.cell(r, c) {
                    Cell::Empty => "#ffffff",
                    Cell::Wall => "#333333",
                    Cell::Car(id) if f.board.cars()[id.0].is_target => "#d04040",
                    Cell::Car(_) => "#cccccc",
                };
                let _ = writeln!(
                    s,
                    r##"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{fill}" stroke="#888888"/>"##
                );
                if let Cell::Car(id) = f.board.cell(r, c) {
                    let (cx, cy) = (x + CELL / 2, y + CELL / 2);
                    let half = CELL / 2 - 4;
                    let (x1, y1, x2, y2) = match f.board.cars()[id.0].orientation {
                        Orientation::Horizontal => (cx - half, cy, cx + half, cy),
                        Orientation::Vertical => (cx, cy - half, cx, cy + half),
                    };
                    let _ = writeln!(
                        s,
                        r##"<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="#000000" stroke-width="2"/>"##
                    );
                }
            }
        }
        s.push_str("</g>\n");
    }
    if let Some(path) = empty_path(frames) {
        let pts: Vec<String> = path
            .iter()
            .map(|&(r, c)| {
                format!(
                    "{},{}",
                    GAP + c * CELL + CELL / 2,
                    GAP + 14 + r * CELL + CELL / 2
                )
            })
            .collect();
        let _ = writeln!(
            s,
            r##"<polyline class="empty-path" points="{}" fill="none" stroke="#1060c0" stroke-width="5" stroke-linejoin="round"/>"##,
            pts.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s
}
