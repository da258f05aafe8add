//! Rush Hour computation toolkit.
//!
//! * [`board`]: generalized Rush Hour (cars of length 1-3, walls) with
//!   breadth-first shortest solutions.
//! * [`ncl`]: Nondeterministic Constraint Logic gate types and machines, with
//!   projection of a machine onto its ports.
//! * [`gadgets`]: exhaustive verification of single-block gadgets against an
//!   intended gate type.
//! * [`unitsearch`]: exhaustive worst-case search over single-empty-cell Unit
//!   Rush Hour.
//! * [`maze`]: the Rush Hour Maze view of unit puzzles and the right-hand rule.
//! * [`trace`]: side-by-side, stacked and SVG rendering of move sequences.
//! * [`cli`]: the `rushhour` command-line front end.

pub mod board;
pub mod cli;
pub mod gadgets;
pub mod maze;
pub mod ncl;
pub mod trace;
pub mod unitsearch;

pub use board::{
    Board, BoardError, Car, CarId, Cell, Direction, ExitSpec, Move, Orientation, SearchError, Side,
    Solution,
};
