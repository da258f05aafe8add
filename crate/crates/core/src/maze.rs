//! Rush Hour Maze: the single-empty-cell unit puzzle seen from the empty
//! cell. The player may enter a neighbouring cell only along that cell's
//! orientation, and the cell it leaves takes the orientation of the move.

use std::collections::hash_map::Entry;
use std::fmt::Write as _;

use rustc_hash::FxHashMap;
use serde::Serialize;
use thiserror::Error;

use crate::board::{Board, BoardError, CarId, Cell, Direction, ExitSpec, Orientation, Side};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MazeError {
    #[error(transparent)]
    Board(#[from] BoardError),
    #[error("board must consist of unit cars and exactly one empty cell")]
    NotSingleEmptyUnit,
    #[error("the target must be the leftmost horizontal car on its row with the exit on the left")]
    TargetNotLeftmost,
    #[error("no horizontal car on exit row {0}")]
    NoTargetCandidate(usize),
    #[error("maze text: {0}")]
    Syntax(String),
    #[error("maze needs exactly one player cell, found {0}")]
    PlayerCount(usize),
    #[error("exit cells ({0},{1}) and ({2},{3}) are not in-bounds neighbours")]
    BadExit(usize, usize, usize, usize),
    #[error("exit must be the two leftmost cells of a row to convert to a board")]
    ExitNotLeftmost,
    #[error("no car {0:?}")]
    NoSuchCar(CarId),
}

/// Contents of a maze cell other than the player's.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum MazeCell {
    Player,
    Oriented(Orientation),
    Wall,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Maze {
    width: usize,
    height: usize,
    cells: Vec<MazeCell>,
    player: (usize, usize),
    /// The player solves the maze by stepping from `exit.0` to `exit.1`.
    exit: ((usize, usize), (usize, usize)),
}

/// A maze position together with the number of moves made to reach it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlayerState {
    pub maze: Maze,
    pub moves: usize,
}

impl Maze {
    pub fn new(
        width: usize,
        height: usize,
        cells: Vec<MazeCell>,
        exit: ((usize, usize), (usize, usize)),
    ) -> Result<Maze, MazeError> {
        if width == 0 || height == 0 || cells.len() != width * height {
            return Err(MazeError::Syntax(
                "grid size does not match cell count".into(),
            ));
        }
        let players: Vec<usize> = (0..cells.len())
            .filter(|&i| cells[i] == MazeCell::Player)
            .collect();
        if players.len() != 1 {
            return Err(MazeError::PlayerCount(players.len()));
        }
        let ((r0, c0), (r1, c1)) = exit;
        if r0 >= height
            || r1 >= height
            || c0 >= width
            || c1 >= width
            || r0.abs_diff(r1) + c0.abs_diff(c1) != 1
        {
            return Err(MazeError::BadExit(r0, c0, r1, c1));
        }
        let player = (players[0] / width, players[0] % width);
        Ok(Maze {
            width,
            height,
            cells,
            player,
            exit,
        })
    }

    /// Text form: one row per line of `H`, `V`, `P` (player) or `#` (wall),
    /// and a line `% exit: (r,c)-(r,c)`.
    pub fn parse(text: &str) -> Result<Maze, MazeError> {
        let mut rows: Vec<Vec<MazeCell>> = Vec::new();
        let mut exit = None;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(meta) = line.strip_prefix('%') {
                let spec = meta
                    .trim()
                    .strip_prefix("exit:")
                    .ok_or_else(|| MazeError::Syntax(format!("unknown metadata '{line}'")))?;
                exit = Some(
                    parse_exit_pair(spec)
                        .ok_or_else(|| MazeError::Syntax(format!("bad exit '{line}'")))?,
                );
                continue;
            }
            let row = line
                .chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| match c {
                    'H' => Ok(MazeCell::Oriented(Orientation::Horizontal)),
                    'V' => Ok(MazeCell::Oriented(Orientation::Vertical)),
                    'P' => Ok(MazeCell::Player),
                    '#' => Ok(MazeCell::Wall),
                    other => Err(MazeError::Syntax(format!("unexpected '{other}'"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(MazeError::Syntax("ragged rows".into()));
                }
            }
            rows.push(row);
        }
        let exit = exit.ok_or_else(|| MazeError::Syntax("missing '% exit:' line".into()))?;
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        Maze::new(width, height, rows.concat(), exit)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in 0..self.height {
            for c in 0..self.width {
                out.push(match self.cell(r, c) {
                    MazeCell::Player => 'P',
                    MazeCell::Oriented(Orientation::Horizontal) => 'H',
                    MazeCell::Oriented(Orientation::Vertical) => 'V',
                    MazeCell::Wall => '#',
                });
            }
            out.push('\n');
        }
        let ((r0, c0), (r1, c1)) = self.exit;
        let _ = write!(out, "% exit: ({r0},{c0})-({r1},{c1})");
        out
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn player(&self) -> (usize, usize) {
        self.player
    }

    pub fn exit(&self) -> ((usize, usize), (usize, usize)) {
        self.exit
    }

    pub fn cell(&self, r: usize, c: usize) -> MazeCell {
        self.cells[r * self.width + c]
    }

    /// Moves available to the player, in `Direction::ALL` order.
    pub fn player_moves(&self) -> Vec<Direction> {
        Direction::ALL
            .into_iter()
            .filter(|&d| self.can_step(d))
            .collect()
    }

    pub fn can_step(&self, d: Direction) -> bool {
        d.step(self.player, self.width, self.height)
            .is_some_and(|(r, c)| self.cell(r, c) == MazeCell::Oriented(d.axis()))
    }

    /// Moves the player one cell; the vacated cell takes the move's axis.
    pub fn step(&self, d: Direction) -> Option<Maze> {
        if !self.can_step(d) {
            return None;
        }
        let (r, c) = d.step(self.player, self.width, self.height)?;
        let mut next = self.clone();
        next.cells[self.player.0 * self.width + self.player.1] = MazeCell::Oriented(d.axis());
        next.cells[r * self.width + c] = MazeCell::Player;
        next.player = (r, c);
        Some(next)
    }

    /// True when moving in `d` takes the player across the exit.
    pub fn crosses_exit(&self, d: Direction) -> bool {
        self.player == self.exit.0
            && d.step(self.player, self.width, self.height) == Some(self.exit.1)
    }

    /// Cells the player can ever stand on: a depth-first search over edges
    /// into neighbours whose current orientation admits entry.
    pub fn reachable_cells(&self) -> Vec<(usize, usize)> {
        let mut seen = vec![false; self.cells.len()];
        let mut stack = vec![self.player];
        seen[self.player.0 * self.width + self.player.1] = true;
        while let Some(p) = stack.pop() {
            for d in Direction::ALL {
                if let Some((r, c)) = d.step(p, self.width, self.height) {
                    let i = r * self.width + c;
                    if !seen[i] && self.cells[i] == MazeCell::Oriented(d.axis()) {
                        seen[i] = true;
                        stack.push((r, c));
                    }
                }
            }
        }
        (0..self.cells.len())
            .filter(|&i| seen[i])
            .map(|i| (i / self.width, i % self.width))
            .collect()
    }

    /// Whether the exit can ever be crossed: a breadth-first search over full
    /// maze states.
    pub fn solvable(&self) -> bool {
        self.shortest_exit().is_some()
    }

    /// Fewest player moves that end by crossing the exit.
    pub fn shortest_exit(&self) -> Option<usize> {
        let mut seen: FxHashMap<Vec<MazeCell>, ()> = FxHashMap::default();
        let mut frontier = vec![self.clone()];
        seen.insert(self.cells.clone(), ());
        let mut depth = 0;
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for m in &frontier {
                for d in m.player_moves() {
                    if m.crosses_exit(d) {
                        return Some(depth + 1);
                    }
                    let n = m.step(d).expect("listed move");
                    if let Entry::Vacant(v) = seen.entry(n.cells.clone()) {
                        v.insert(());
                        next.push(n);
                    }
                }
            }
            frontier = next;
            depth += 1;
        }
        None
    }
}

fn parse_exit_pair(s: &str) -> Option<((usize, usize), (usize, usize))> {
    let s = s.trim();
    let (a, b) = s.split_once(")-(").or_else(|| s.split_once(") - ("))?;
    let cell = |t: &str| -> Option<(usize, usize)> {
        let t = t.trim().trim_start_matches('(').trim_end_matches(')');
        let (r, c) = t.split_once(',')?;
        Some((r.trim().parse().ok()?, c.trim().parse().ok()?))
    };
    Some((cell(a)?, cell(b)?))
}

fn orientation_grid(board: &Board) -> Result<Vec<MazeCell>, MazeError> {
    if board.cars().iter().any(|c| c.length != 1) || board.empty_count() != 1 {
        return Err(MazeError::NotSingleEmptyUnit);
    }
    let mut cells = Vec::with_capacity(board.width() * board.height());
    for r in 0..board.height() {
        for c in 0..board.width() {
            cells.push(match board.cell(r, c) {
                Cell::Empty => MazeCell::Player,
                Cell::Wall => MazeCell::Wall,
                Cell::Car(id) => MazeCell::Oriented(board.cars()[id.0].orientation),
            });
        }
    }
    Ok(cells)
}

/// The maze equivalent of a single-empty unit board whose target is the
/// leftmost horizontal car of the exit row and whose exit is on the left.
pub fn unit_to_maze(board: &Board) -> Result<Maze, MazeError> {
    let cells = orientation_grid(board)?;
    let exit = board.exit();
    let target = board.target().ok_or(BoardError::NoTarget)?;
    let w = board.width();
    let leftmost =
        (0..w).find(|&c| cells[exit.row * w + c] == MazeCell::Oriented(Orientation::Horizontal));
    if exit.side != Side::Left || w < 2 || leftmost != Some(target.anchor.1) {
        return Err(MazeError::TargetNotLeftmost);
    }
    Maze::new(w, board.height(), cells, ((exit.row, 0), (exit.row, 1)))
}

/// Inverse of [`unit_to_maze`]: the leftmost horizontal cell of the exit row
/// becomes the target.
pub fn maze_to_unit(maze: &Maze) -> Result<Board, MazeError> {
    let ((r0, c0), (r1, c1)) = maze.exit;
    if r0 != r1 || c0 != 0 || c1 != 1 {
        return Err(MazeError::ExitNotLeftmost);
    }
    let target = (0..maze.width)
        .find(|&c| maze.cell(r0, c) == MazeCell::Oriented(Orientation::Horizontal))
        .ok_or(MazeError::NoTargetCandidate(r0))?;
    let mut text = String::new();
    for r in 0..maze.height {
        for c in 0..maze.width {
            text.push(match maze.cell(r, c) {
                MazeCell::Player => '.',
                MazeCell::Wall => '#',
                MazeCell::Oriented(Orientation::Horizontal) if (r, c) == (r0, target) => '=',
                MazeCell::Oriented(Orientation::Horizontal) => '-',
                MazeCell::Oriented(Orientation::Vertical) => '|',
            });
        }
        text.push('\n');
    }
    let board = Board::parse(&text)?;
    Ok(board.with_exit(ExitSpec {
        row: r0,
        side: Side::Left,
    })?)
}

/// Whether `car` can ever move: some cell of it must be reachable by the
/// player of the board's maze image. Walls are allowed; no target is needed.
pub fn can_move_car(board: &Board, car: CarId) -> Result<bool, MazeError> {
    let car = board.car(car).ok_or(MazeError::NoSuchCar(car))?;
    let cells = orientation_grid(board)?;
    let maze = Maze {
        width: board.width(),
        height: board.height(),
        player: (0, 0),
        exit: ((0, 0), (0, 0)),
        cells,
    };
    let empty = maze
        .cells
        .iter()
        .position(|c| *c == MazeCell::Player)
        .expect("one empty cell");
    let maze = Maze {
        player: (empty / maze.width, empty % maze.width),
        ..maze
    };
    Ok(maze.reachable_cells().contains(&car.anchor))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RhrOutcome {
    /// The move numbered `step` crossed the exit.
    ExitFound {
        step: usize,
    },
    /// The state (board and heading) after `repeat` moves equals the one
    /// after `first` moves.
    CycleDetected {
        first: usize,
        repeat: usize,
    },
    /// The player had no legal move after `step` moves.
    Stuck {
        step: usize,
    },
    StepLimit {
        steps: usize,
    },
}

#[derive(Clone, Debug)]
pub struct RhrStep {
    pub state: PlayerState,
    pub heading: Direction,
}

#[derive(Clone, Debug)]
pub struct RhrTrace {
    /// Entry `k` is the state after `k` moves.
    pub steps: Vec<RhrStep>,
    pub outcome: RhrOutcome,
}

impl RhrTrace {
    pub fn player_at(&self, step: usize) -> Option<(usize, usize)> {
        self.steps.get(step).map(|s| s.state.maze.player())
    }

    pub fn maze_at(&self, step: usize) -> Option<&Maze> {
        self.steps.get(step).map(|s| &s.state.maze)
    }

    pub fn exit_found(&self) -> bool {
        matches!(self.outcome, RhrOutcome::ExitFound { .. })
    }
}

/// Preference order of the right-hand rule relative to `heading`.
pub fn rhr_priorities(heading: Direction) -> [Direction; 4] {
    [
        heading.clockwise(),
        heading,
        heading.counter_clockwise(),
        heading.reverse(),
    ]
}

/// Follows the right-hand rule from `maze`, starting as if the player had
/// last moved in `heading`.
pub fn right_hand_run(maze: &Maze, heading: Direction, step_limit: usize) -> RhrTrace {
    let mut steps = vec![RhrStep {
        state: PlayerState {
            maze: maze.clone(),
            moves: 0,
        },
        heading,
    }];
    let mut seen: FxHashMap<(Vec<MazeCell>, Direction), usize> = FxHashMap::default();
    seen.insert((maze.cells.clone(), heading), 0);
    loop {
        let k = steps.len() - 1;
        let cur = &steps[k];
        let Some(d) = rhr_priorities(cur.heading)
            .into_iter()
            .find(|&d| cur.state.maze.can_step(d))
        else {
            return RhrTrace {
                steps,
                outcome: RhrOutcome::Stuck { step: k },
            };
        };
        let crossing = cur.state.maze.crosses_exit(d);
        let next = cur.state.maze.step(d).expect("checked");
        steps.push(RhrStep {
            state: PlayerState {
                maze: next.clone(),
                moves: k + 1,
            },
            heading: d,
        });
        if crossing {
            return RhrTrace {
                steps,
                outcome: RhrOutcome::ExitFound { step: k + 1 },
            };
        }
        match seen.entry((next.cells, d)) {
            Entry::Occupied(o) => {
                let first = *o.get();
                return RhrTrace {
                    steps,
                    outcome: RhrOutcome::CycleDetected {
                        first,
                        repeat: k + 1,
                    },
                };
            }
            Entry::Vacant(v) => {
                v.insert(k + 1);
            }
        }
        if k + 1 >= step_limit {
            return RhrTrace {
                steps,
                outcome: RhrOutcome::StepLimit { steps: k + 1 },
            };
        }
    }
}
