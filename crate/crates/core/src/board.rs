//! Generalized Rush Hour boards.
//!
//! A board is a rectangular parking lot holding cars of length 1 to 3 and
//! optional immovable wall cells. Cars only move lengthwise, one cell per
//! move. Exactly one horizontal car is the target; the puzzle is solved once
//! that car occupies the exit-side end cell of its row.
//!
//! Text format, one character per cell:
//!
//! ```text
//! .  empty            #  wall
//! |  vertical unit    -  horizontal unit    =  horizontal unit target
//! A-Z multi-cell car (same letter in 2-3 contiguous collinear cells)
//! T  multi-cell target
//! % exit: row <e> [left|right]
//! ```

use std::collections::VecDeque;
use std::fmt;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The axis a car slides along.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// Which end of the exit row the target car must reach.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    #[default]
    Left,
    Right,
}

impl std::str::FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "left" | "l" => Ok(Side::Left),
            "right" | "r" => Ok(Side::Right),
            other => Err(format!("unknown exit side '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExitSpec {
    pub row: usize,
    pub side: Side,
}

/// Index of a car within its board. Ids are assigned in row-major order of
/// each car's anchor cell when a board is parsed and stay fixed across moves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CarId(pub usize);

impl fmt::Display for CarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Up,
        Direction::Right,
        Direction::Down,
        Direction::Left,
    ];

    pub fn reverse(self) -> Direction {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }

    /// Quarter turn clockwise (as seen on a board drawn with row 0 on top).
    pub fn clockwise(self) -> Direction {
        match self {
            Direction::Up => Direction::Right,
            Direction::Right => Direction::Down,
            Direction::Down => Direction::Left,
            Direction::Left => Direction::Up,
        }
    }

    pub fn counter_clockwise(self) -> Direction {
        self.clockwise().reverse()
    }

    pub fn axis(self) -> Orientation {
        match self {
            Direction::Up | Direction::Down => Orientation::Vertical,
            Direction::Left | Direction::Right => Orientation::Horizontal,
        }
    }

    /// (row delta, column delta)
    pub fn delta(self) -> (isize, isize) {
        match self {
            Direction::Up => (-1, 0),
            Direction::Down => (1, 0),
            Direction::Left => (0, -1),
            Direction::Right => (0, 1),
        }
    }

    /// The neighbor of `(row, col)` in this direction, if it lies on a
    /// `width` x `height` grid.
    pub fn step(
        self,
        (row, col): (usize, usize),
        width: usize,
        height: usize,
    ) -> Option<(usize, usize)> {
        let (dr, dc) = self.delta();
        let r = row.checked_add_signed(dr)?;
        let c = col.checked_add_signed(dc)?;
        (r < height && c < width).then_some((r, c))
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Up => "up",
            Direction::Down => "down",
            Direction::Left => "left",
            Direction::Right => "right",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Car {
    pub id: CarId,
    pub orientation: Orientation,
    pub length: usize,
    /// (row, col) of the leftmost or topmost segment.
    pub anchor: (usize, usize),
    pub is_target: bool,
    /// Letter used for multi-cell cars in the text format.
    pub label: Option<char>,
}

impl Car {
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (r, c) = self.anchor;
        (0..self.length).map(move |i| match self.orientation {
            Orientation::Horizontal => (r, c + i),
            Orientation::Vertical => (r + i, c),
        })
    }

    /// Coordinate along the car's axis: column for horizontal cars, row for
    /// vertical ones.
    pub fn position(&self) -> usize {
        match self.orientation {
            Orientation::Horizontal => self.anchor.1,
            Orientation::Vertical => self.anchor.0,
        }
    }

    fn with_position(&self, pos: usize) -> (usize, usize) {
        match self.orientation {
            Orientation::Horizontal => (self.anchor.0, pos),
            Orientation::Vertical => (pos, self.anchor.1),
        }
    }

    fn glyph(&self) -> char {
        match (self.length, self.is_target, self.orientation) {
            (1, true, _) => '=',
            (1, false, Orientation::Horizontal) => '-',
            (1, false, Orientation::Vertical) => '|',
            _ => self.label.unwrap_or(if self.is_target { 'T' } else { '?' }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cell {
    Empty,
    Wall,
    Car(CarId),
}

/// A single one-cell step of one car.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Move {
    pub car: CarId,
    pub direction: Direction,
}

impl Move {
    pub fn reverse(self) -> Move {
        Move {
            car: self.car,
            direction: self.direction.reverse(),
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.car, self.direction)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoardError {
    #[error("board has no rows")]
    EmptyGrid,
    #[error("row {row} has {found} cells, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("unknown cell character '{ch}' at ({row},{col})")]
    BadChar { ch: char, row: usize, col: usize },
    #[error("car '{0}' is not a single contiguous straight run of cells")]
    AmbiguousCar(char),
    #[error("car '{label}' has {len} cells, must have 2 or 3")]
    BadCarLength { label: char, len: usize },
    #[error("no target car ('=' or 'T')")]
    NoTarget,
    #[error("more than one target car")]
    MultipleTargets,
    #[error("target car is not horizontal")]
    TargetNotHorizontal,
    #[error("target car is on row {target_row} but the exit is on row {exit_row}")]
    TargetNotOnExitRow { target_row: usize, exit_row: usize },
    #[error("exit row {row} outside a board of height {height}")]
    ExitOutOfRange { row: usize, height: usize },
    #[error("bad metadata line '{0}'")]
    BadMetadata(String),
    #[error("car {car} cannot move {direction}")]
    IllegalMove { car: CarId, direction: Direction },
    #[error("no car {0}")]
    NoSuchCar(CarId),
    #[error("position vector has {found} entries, board has {expected} cars")]
    PositionCount { expected: usize, found: usize },
    #[error("cars overlap at ({0},{1})")]
    Overlap(usize, usize),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("state-space cap of {cap} states exceeded")]
    StateCapExceeded { cap: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Board {
    width: usize,
    height: usize,
    cells: Vec<Cell>,
    cars: Vec<Car>,
    exit: ExitSpec,
}

/// A shortest move sequence together with its length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub length: usize,
    pub moves: Vec<Move>,
}

impl Solution {
    /// Every board along the solution, starting with `start`.
    pub fn states(&self, start: &Board) -> Vec<Board> {
        let mut out = Vec::with_capacity(self.moves.len() + 1);
        out.push(start.clone());
        for m in &self.moves {
            let next = out
                .last()
                .unwrap()
                .apply_move(*m)
                .expect("solution moves are legal");
            out.push(next);
        }
        out
    }
}

pub const DEFAULT_STATE_CAP: usize = 20_000_000;

struct CarSpec {
    anchor: (usize, usize),
    orientation: Orientation,
    length: usize,
    is_target: bool,
    label: Option<char>,
}

impl Board {
    /// Parses a puzzle: a target car is mandatory.
    pub fn parse(text: &str) -> Result<Board, BoardError> {
        let (board, extra) = Self::parse_layout(text)?;
        if board.target().is_none() {
            return Err(BoardError::NoTarget);
        }
        if let Some(line) = extra.into_iter().next() {
            return Err(BoardError::BadMetadata(line));
        }
        Ok(board)
    }

    /// Parses a layout in which the target car is optional. Metadata lines
    /// other than `% exit:` are handed back untouched for the caller.
    pub fn parse_layout(text: &str) -> Result<(Board, Vec<String>), BoardError> {
        let mut rows: Vec<Vec<char>> = Vec::new();
        let mut extra = Vec::new();
        let mut exit_meta: Option<ExitSpec> = None;
        for line in text.lines() {
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(meta) = trimmed.strip_prefix('%') {
                let meta = meta.trim();
                if let Some(rest) = meta.strip_prefix("exit:") {
                    exit_meta = Some(
                        parse_exit(rest)
                            .ok_or_else(|| BoardError::BadMetadata(trimmed.to_string()))?,
                    );
                } else {
                    extra.push(trimmed.to_string());
                }
                continue;
            }
            rows.push(trimmed.chars().filter(|c| !c.is_whitespace()).collect());
        }
        if rows.is_empty() {
            return Err(BoardError::EmptyGrid);
        }
        let width = rows[0].len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != width {
                return Err(BoardError::RaggedRow {
                    row: i,
                    expected: width,
                    found: r.len(),
                });
            }
        }
        let height = rows.len();

        let mut walls = vec![false; width * height];
        let mut specs = Vec::new();
        let mut lettered: Vec<(char, Vec<(usize, usize)>)> = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            for (c, &ch) in row.iter().enumerate() {
                let unit = |orientation, is_target| CarSpec {
                    anchor: (r, c),
                    orientation,
                    length: 1,
                    is_target,
                    label: None,
                };
                match ch {
                    '.' => {}
                    '#' => walls[r * width + c] = true,
                    '|' => specs.push(unit(Orientation::Vertical, false)),
                    '-' => specs.push(unit(Orientation::Horizontal, false)),
                    '=' => specs.push(unit(Orientation::Horizontal, true)),
                    'A'..='Z' => match lettered.iter_mut().find(|(l, _)| *l == ch) {
                        Some((_, cells)) => cells.push((r, c)),
                        None => lettered.push((ch, vec![(r, c)])),
                    },
                    _ => return Err(BoardError::BadChar { ch, row: r, col: c }),
                }
            }
        }
        for (label, cells) in lettered {
            specs.push(letter_car(label, &cells)?);
        }
        specs.sort_by_key(|s| s.anchor);

        let targets: Vec<&CarSpec> = specs.iter().filter(|s| s.is_target).collect();
        if targets.len() > 1 {
            return Err(BoardError::MultipleTargets);
        }
        let target = targets.first().map(|t| (t.anchor.0, t.orientation));
        let exit = match (exit_meta, target) {
            (_, Some((_, Orientation::Vertical))) => return Err(BoardError::TargetNotHorizontal),
            (Some(exit), Some((row, _))) if exit.row != row => {
                return Err(BoardError::TargetNotOnExitRow {
                    target_row: row,
                    exit_row: exit.row,
                })
            }
            (Some(exit), _) => exit,
            (None, Some((row, _))) => ExitSpec {
                row,
                side: Side::Left,
            },
            (None, None) => ExitSpec::default(),
        };
        if exit.row >= height {
            return Err(BoardError::ExitOutOfRange {
                row: exit.row,
                height,
            });
        }

        let mut cells: Vec<Cell> = walls
            .iter()
            .map(|&w| if w { Cell::Wall } else { Cell::Empty })
            .collect();
        let cars: Vec<Car> = specs
            .into_iter()
            .enumerate()
            .map(|(i, s)| Car {
                id: CarId(i),
                orientation: s.orientation,
                length: s.length,
                anchor: s.anchor,
                is_target: s.is_target,
                label: s.label,
            })
            .collect();
        for car in &cars {
            for (r, c) in car.cells() {
                cells[r * width + c] = Cell::Car(car.id);
            }
        }
        Ok((
            Board {
                width,
                height,
                cells,
                cars,
                exit,
            },
            extra,
        ))
    }

    /// Canonical text form; `Board::parse_layout(&b.render())` rebuilds `b`
    /// for any board whose car ids are in row-major order.
    pub fn render(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height + 24);
        for r in 0..self.height {
            if r > 0 {
                out.push('\n');
            }
            for c in 0..self.width {
                out.push(match self.cell(r, c) {
                    Cell::Empty => '.',
                    Cell::Wall => '#',
                    Cell::Car(id) => self.cars[id.0].glyph(),
                });
            }
        }
        let implicit_row = self.target().map_or(0, |t| t.anchor.0);
        if self.exit.side == Side::Right || self.exit.row != implicit_row {
            let side = match self.exit.side {
                Side::Left => "left",
                Side::Right => "right",
            };
            out.push_str(&format!("\n% exit: row {} {side}", self.exit.row));
        }
        out
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn exit(&self) -> ExitSpec {
        self.exit
    }

    pub fn cars(&self) -> &[Car] {
        &self.cars
    }

    pub fn car(&self, id: CarId) -> Option<&Car> {
        self.cars.get(id.0)
    }

    pub fn cell(&self, row: usize, col: usize) -> Cell {
        self.cells[row * self.width + col]
    }

    pub fn target(&self) -> Option<&Car> {
        self.cars.iter().find(|c| c.is_target)
    }

    /// Returns a copy with a different exit. The target (if any) must sit on
    /// the new exit row.
    pub fn with_exit(&self, exit: ExitSpec) -> Result<Board, BoardError> {
        if exit.row >= self.height {
            return Err(BoardError::ExitOutOfRange {
                row: exit.row,
                height: self.height,
            });
        }
        if let Some(t) = self.target() {
            if t.anchor.0 != exit.row {
                return Err(BoardError::TargetNotOnExitRow {
                    target_row: t.anchor.0,
                    exit_row: exit.row,
                });
            }
        }
        Ok(Board {
            exit,
            ..self.clone()
        })
    }

    /// Number of empty cells.
    pub fn empty_count(&self) -> usize {
        self.cells.iter().filter(|c| **c == Cell::Empty).count()
    }

    pub fn has_walls(&self) -> bool {
        self.cells.contains(&Cell::Wall)
    }

    fn directions(&self, car: &Car) -> [Direction; 2] {
        match (car.orientation, self.exit.side) {
            (Orientation::Horizontal, Side::Left) => [Direction::Left, Direction::Right],
            (Orientation::Horizontal, Side::Right) => [Direction::Right, Direction::Left],
            (Orientation::Vertical, _) => [Direction::Up, Direction::Down],
        }
    }

    /// The cell a car would newly occupy by moving one step in `dir`.
    fn entry_cell(&self, car: &Car, dir: Direction) -> Option<(usize, usize)> {
        if dir.axis() != car.orientation {
            return None;
        }
        let (r, c) = car.anchor;
        let lead = match dir {
            Direction::Left | Direction::Up => (r, c),
            Direction::Right => (r, c + car.length - 1),
            Direction::Down => (r + car.length - 1, c),
        };
        dir.step(lead, self.width, self.height)
    }

    /// All unit moves, ordered by car id and then toward-exit direction
    /// first (up before down for vertical cars).
    pub fn legal_moves(&self) -> Vec<Move> {
        let mut out = Vec::new();
        for car in &self.cars {
            for dir in self.directions(car) {
                if let Some((r, c)) = self.entry_cell(car, dir) {
                    if self.cell(r, c) == Cell::Empty {
                        out.push(Move {
                            car: car.id,
                            direction: dir,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn is_legal(&self, m: Move) -> bool {
        self.car(m.car)
            .and_then(|car| self.entry_cell(car, m.direction))
            .is_some_and(|(r, c)| self.cell(r, c) == Cell::Empty)
    }

    pub fn apply_move(&self, m: Move) -> Result<Board, BoardError> {
        let car = self.car(m.car).ok_or(BoardError::NoSuchCar(m.car))?;
        if !self.is_legal(m) {
            return Err(BoardError::IllegalMove {
                car: m.car,
                direction: m.direction,
            });
        }
        let mut next = self.clone();
        let (dr, dc) = m.direction.delta();
        for (r, c) in car.cells() {
            next.cells[r * self.width + c] = Cell::Empty;
        }
        let moved = &mut next.cars[m.car.0];
        moved.anchor = (
            (moved.anchor.0 as isize + dr) as usize,
            (moved.anchor.1 as isize + dc) as usize,
        );
        let moved = moved.clone();
        for (r, c) in moved.cells() {
            next.cells[r * self.width + c] = Cell::Car(moved.id);
        }
        Ok(next)
    }

    /// True iff the target's leading segment is in the exit-side end cell of
    /// the exit row. A board without a target is never solved.
    pub fn is_solved(&self) -> bool {
        self.target().is_some_and(|t| match self.exit.side {
            Side::Left => t.anchor.1 == 0,
            Side::Right => t.anchor.1 + t.length == self.width,
        })
    }

    /// Per-car coordinate along its axis, in car-id order.
    pub fn positions(&self) -> Vec<u8> {
        self.cars.iter().map(|c| c.position() as u8).collect()
    }

    /// Rebuilds the board with every car moved to the given axis coordinate.
    pub fn with_positions(&self, positions: &[u8]) -> Result<Board, BoardError> {
        if positions.len() != self.cars.len() {
            return Err(BoardError::PositionCount {
                expected: self.cars.len(),
                found: positions.len(),
            });
        }
        let mut cells: Vec<Cell> = self
            .cells
            .iter()
            .map(|c| {
                if *c == Cell::Wall {
                    Cell::Wall
                } else {
                    Cell::Empty
                }
            })
            .collect();
        let mut cars = self.cars.clone();
        for (car, &p) in cars.iter_mut().zip(positions) {
            car.anchor = car.with_position(p as usize);
            for (r, c) in car.cells() {
                if r >= self.height || c >= self.width || cells[r * self.width + c] != Cell::Empty {
                    return Err(BoardError::Overlap(r, c));
                }
                cells[r * self.width + c] = Cell::Car(car.id);
            }
        }
        Ok(Board {
            cells,
            cars,
            ..self.clone()
        })
    }

    /// Breadth-first shortest solution with the default state cap.
    pub fn shortest_solution(&self) -> Result<Option<Solution>, SearchError> {
        self.shortest_solution_capped(DEFAULT_STATE_CAP)
    }

    /// Breadth-first shortest solution. `Ok(None)` means every reachable
    /// state was explored and none is solved.
    pub fn shortest_solution_capped(&self, cap: usize) -> Result<Option<Solution>, SearchError> {
        let space = PositionSpace::new(self);
        let start = self.positions();
        if space.solved(&start) {
            return Ok(Some(Solution {
                length: 0,
                moves: Vec::new(),
            }));
        }
        let mut index: FxHashMap<Box<[u8]>, usize> = FxHashMap::default();
        let mut states: Vec<Box<[u8]>> = vec![start.clone().into_boxed_slice()];
        let mut parent: Vec<Option<(usize, Move)>> = vec![None];
        index.insert(start.into_boxed_slice(), 0);
        let mut queue = VecDeque::from([0usize]);
        let mut occ = Vec::new();
        while let Some(i) = queue.pop_front() {
            let cur = states[i].clone();
            space.occupancy(&cur, &mut occ);
            for (m, next) in space.successors(&cur, &occ) {
                if index.contains_key(next.as_slice()) {
                    continue;
                }
                if states.len() >= cap {
                    return Err(SearchError::StateCapExceeded { cap });
                }
                let j = states.len();
                let solved = space.solved(&next);
                let boxed = next.into_boxed_slice();
                index.insert(boxed.clone(), j);
                states.push(boxed);
                parent.push(Some((i, m)));
                if solved {
                    let mut moves = Vec::new();
                    let mut k = j;
                    while let Some((p, m)) = parent[k] {
                        moves.push(m);
                        k = p;
                    }
                    moves.reverse();
                    return Ok(Some(Solution {
                        length: moves.len(),
                        moves,
                    }));
                }
                queue.push_back(j);
            }
        }
        Ok(None)
    }
}

impl fmt::Display for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn parse_exit(rest: &str) -> Option<ExitSpec> {
    let mut words = rest.split_whitespace();
    if words.next()? != "row" {
        return None;
    }
    let row = words.next()?.parse().ok()?;
    let side = match words.next() {
        None => Side::Left,
        Some(s) => s.parse().ok()?,
    };
    if words.next().is_some() {
        return None;
    }
    Some(ExitSpec { row, side })
}

fn letter_car(label: char, cells: &[(usize, usize)]) -> Result<CarSpec, BoardError> {
    let len = cells.len();
    if !(2..=3).contains(&len) {
        return Err(BoardError::BadCarLength { label, len });
    }
    let (r0, c0) = cells[0];
    let orientation = if cells
        .iter()
        .enumerate()
        .all(|(i, &(r, c))| r == r0 && c == c0 + i)
    {
        Orientation::Horizontal
    } else if cells
        .iter()
        .enumerate()
        .all(|(i, &(r, c))| c == c0 && r == r0 + i)
    {
        Orientation::Vertical
    } else {
        return Err(BoardError::AmbiguousCar(label));
    };
    Ok(CarSpec {
        anchor: (r0, c0),
        orientation,
        length: len,
        is_target: label == 'T',
        label: Some(label),
    })
}

/// Static part of a board for searches that store only per-car positions.
pub(crate) struct PositionSpace {
    width: usize,
    height: usize,
    walls: Vec<bool>,
    cars: Vec<SpaceCar>,
    target: Option<usize>,
    side: Side,
}

struct SpaceCar {
    orientation: Orientation,
    length: usize,
    /// Row of a horizontal car or column of a vertical one.
    lane: usize,
    dirs: [Direction; 2],
}

impl PositionSpace {
    pub(crate) fn new(board: &Board) -> Self {
        PositionSpace {
            width: board.width,
            height: board.height,
            walls: board.cells.iter().map(|c| *c == Cell::Wall).collect(),
            cars: board
                .cars
                .iter()
                .map(|c| SpaceCar {
                    orientation: c.orientation,
                    length: c.length,
                    lane: match c.orientation {
                        Orientation::Horizontal => c.anchor.0,
                        Orientation::Vertical => c.anchor.1,
                    },
                    dirs: board.directions(c),
                })
                .collect(),
            target: board.target().map(|t| t.id.0),
            side: board.exit.side,
        }
    }

    fn cell_index(&self, car: &SpaceCar, pos: usize, offset: usize) -> usize {
        match car.orientation {
            Orientation::Horizontal => car.lane * self.width + pos + offset,
            Orientation::Vertical => (pos + offset) * self.width + car.lane,
        }
    }

    pub(crate) fn occupancy(&self, pos: &[u8], occ: &mut Vec<bool>) {
        occ.clear();
        occ.extend_from_slice(&self.walls);
        for (car, &p) in self.cars.iter().zip(pos) {
            for k in 0..car.length {
                occ[self.cell_index(car, p as usize, k)] = true;
            }
        }
    }

    /// Successor states in `Board::legal_moves` order.
    pub(crate) fn successors<'a>(
        &'a self,
        pos: &'a [u8],
        occ: &'a [bool],
    ) -> impl Iterator<Item = (Move, Vec<u8>)> + 'a {
        self.cars.iter().enumerate().flat_map(move |(i, car)| {
            car.dirs.into_iter().filter_map(move |dir| {
                let p = pos[i] as usize;
                let limit = match car.orientation {
                    Orientation::Horizontal => self.width,
                    Orientation::Vertical => self.height,
                };
                let (entry, np) = match dir {
                    Direction::Left | Direction::Up => (p.checked_sub(1)?, p - 1),
                    Direction::Right | Direction::Down => {
                        if p + car.length >= limit {
                            return None;
                        }
                        (p + car.length, p + 1)
                    }
                };
                if occ[self.cell_index(car, entry, 0)] {
                    return None;
                }
                let mut next = pos.to_vec();
                next[i] = np as u8;
                Some((
                    Move {
                        car: CarId(i),
                        direction: dir,
                    },
                    next,
                ))
            })
        })
    }

    pub(crate) fn solved(&self, pos: &[u8]) -> bool {
        self.target.is_some_and(|t| match self.side {
            Side::Left => pos[t] == 0,
            Side::Right => pos[t] as usize + self.cars[t].length == self.width,
        })
    }
}

pub fn parse_board(text: &str) -> Result<Board, BoardError> {
    Board::parse(text)
}

pub fn render_board(board: &Board) -> String {
    board.render()
}

pub fn legal_moves(board: &Board) -> Vec<Move> {
    board.legal_moves()
}

pub fn apply_move(board: &Board, m: Move) -> Result<Board, BoardError> {
    board.apply_move(m)
}

pub fn is_solved(board: &Board) -> bool {
    board.is_solved()
}

pub fn shortest_solution(board: &Board) -> Result<Option<Solution>, SearchError> {
    board.shortest_solution()
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE_3X3: &str = "||=\n|-|\n-.|";

    fn unit(text: &str) -> Board {
        Board::parse(text).unwrap()
    }

    #[test]
    fn parses_unit_example() {
        let b = unit(EXAMPLE_3X3);
        assert_eq!((b.width(), b.height()), (3, 3));
        assert_eq!(b.cars().len(), 8);
        let t = b.target().unwrap();
        assert_eq!(t.anchor, (0, 2));
        assert_eq!(
            b.exit(),
            ExitSpec {
                row: 0,
                side: Side::Left
            }
        );
    }

    #[test]
    fn minimal_board_is_solved() {
        let b = unit("=.");
        assert_eq!(b.cars().len(), 1);
        assert!(b.is_solved());
        assert_eq!(b.legal_moves().len(), 1);
    }

    #[test]
    fn spaced_layout_with_wall_needs_target() {
        assert_eq!(Board::parse("A A .\n# . ."), Err(BoardError::NoTarget));
        let (b, _) = Board::parse_layout("A A .\n# . .").unwrap();
        assert_eq!(b.cell(1, 0), Cell::Wall);
        assert_eq!(b.cars()[0].length, 2);
        assert_eq!(b.cars()[0].orientation, Orientation::Horizontal);
        assert_eq!(b.render(), "AA.\n#..");
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            Board::parse("=.\n..."),
            Err(BoardError::RaggedRow { .. })
        ));
        assert!(matches!(
            Board::parse("=A.A"),
            Err(BoardError::AmbiguousCar('A'))
        ));
        assert!(matches!(
            Board::parse("=A.."),
            Err(BoardError::BadCarLength { label: 'A', len: 1 })
        ));
        assert!(matches!(
            Board::parse("=AAAA"),
            Err(BoardError::BadCarLength { label: 'A', len: 4 })
        ));
        assert!(matches!(
            Board::parse("==."),
            Err(BoardError::MultipleTargets)
        ));
        assert!(matches!(
            Board::parse("T.\nT."),
            Err(BoardError::TargetNotHorizontal)
        ));
        assert!(matches!(
            Board::parse("=.\n..\n% exit: row 1"),
            Err(BoardError::TargetNotOnExitRow {
                target_row: 0,
                exit_row: 1
            })
        ));
        assert!(matches!(
            Board::parse("=x"),
            Err(BoardError::BadChar { ch: 'x', .. })
        ));
        assert!(matches!(
            Board::parse("=.\n% exit: col 3"),
            Err(BoardError::BadMetadata(_))
        ));
        assert!(matches!(Board::parse(""), Err(BoardError::EmptyGrid)));
    }

    #[test]
    fn render_round_trips() {
        for text in [
            EXAMPLE_3X3,
            "=.",
            "AA.\n#=.",
            ".=BB\n|..C\n|..C\n% exit: row 0 right",
            ".",
        ] {
            let (b, _) = Board::parse_layout(text).unwrap();
            assert_eq!(b.render(), text);
            assert_eq!(Board::parse_layout(&b.render()).unwrap().0, b);
        }
    }

    #[test]
    fn example_moves() {
        let b = unit(EXAMPLE_3X3);
        let moves = b.legal_moves();
        // Empty cell at (2,1): the '-' at (2,0) slides right, the '|' at (1,1)
        // cannot reach it (it is horizontal), the '|' at (2,2) is vertical.
        assert_eq!(moves.len(), 1);
        let next = b.apply_move(moves[0]).unwrap();
        assert_eq!(next.render(), "||=\n|-|\n.-|");
        assert_eq!(next.apply_move(moves[0].reverse()).unwrap(), b);
    }

    #[test]
    fn jammed_two_by_two() {
        let b = unit("|=\n|.");
        assert!(b.legal_moves().is_empty());
        assert_eq!(b.shortest_solution().unwrap(), None);
    }

    #[test]
    fn vertical_up_then_down_is_identity() {
        let b = unit("=.\n.|\n..");
        let up = Move {
            car: CarId(1),
            direction: Direction::Up,
        };
        assert!(b.is_legal(up));
        let moved = b.apply_move(up).unwrap();
        assert_eq!(moved.apply_move(up.reverse()).unwrap(), b);
    }

    #[test]
    fn illegal_move_rejected() {
        let b = unit(EXAMPLE_3X3);
        let m = Move {
            car: CarId(0),
            direction: Direction::Up,
        };
        assert_eq!(
            b.apply_move(m),
            Err(BoardError::IllegalMove {
                car: CarId(0),
                direction: Direction::Up
            })
        );
        let sideways = Move {
            car: CarId(0),
            direction: Direction::Left,
        };
        assert!(b.apply_move(sideways).is_err());
    }

    #[test]
    fn move_order_prefers_exit_direction() {
        let b = unit(".=.");
        assert_eq!(
            b.legal_moves()
                .iter()
                .map(|m| m.direction)
                .collect::<Vec<_>>(),
            vec![Direction::Left, Direction::Right]
        );
        let r = b
            .with_exit(ExitSpec {
                row: 0,
                side: Side::Right,
            })
            .unwrap();
        assert_eq!(
            r.legal_moves()
                .iter()
                .map(|m| m.direction)
                .collect::<Vec<_>>(),
            vec![Direction::Right, Direction::Left]
        );
    }

    #[test]
    fn shortest_solution_of_example() {
        let b = unit(EXAMPLE_3X3);
        let sol = b.shortest_solution().unwrap().unwrap();
        assert_eq!(sol.length, 12);
        let states = sol.states(&b);
        assert!(states.last().unwrap().is_solved());
        assert_eq!(states.last().unwrap().render(), "=.|\n|-|\n||-");
    }

    #[test]
    fn solved_and_unsolved() {
        assert!(unit("=.|\n|-|\n||-").is_solved());
        assert!(!unit(EXAMPLE_3X3).is_solved());
        let r = unit(".=\n% exit: row 0 right");
        assert!(r.is_solved());
        assert_eq!(r.shortest_solution().unwrap().unwrap().length, 0);
    }

    #[test]
    fn multi_cell_cars_and_walls() {
        // Horizontal cars never pass each other.
        let b = unit("AA.TT\n#....\n% exit: row 0");
        assert_eq!(b.shortest_solution().unwrap(), None);
        let blocked = unit("A.#TT\nA....\n.....");
        assert_eq!(blocked.shortest_solution().unwrap(), None);
        let free = unit("A..TT\nA....\n.....");
        assert_eq!(free.shortest_solution().unwrap().unwrap().length, 4);
    }

    #[test]
    fn state_cap_is_distinct_from_unsolvable() {
        let b = unit(".....\n....=\n.....");
        assert!(matches!(
            b.shortest_solution_capped(2),
            Err(SearchError::StateCapExceeded { cap: 2 })
        ));
    }
}
