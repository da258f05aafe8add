//! Solve a board and print the trace with the distance-to-solve
//! above each diagram.
//!
//! `cargo run --example solve_board [-- path/to/file.board]`

use rushhour::trace::{render_frames, solution_frames};
use rushhour::Board;

const DEFAULT: &str = "||=\n|-|\n-.|";

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path).expect("readable board file"),
        None => DEFAULT.to_string(),
    };
    let board = Board::parse(&text).expect("valid board");
    match board.shortest_solution().expect("within state cap") {
        Some(solution) => {
            println!("length: {}", solution.length);
            println!(
                "{}",
                render_frames(&solution_frames(&solution.states(&board)))
            );
        }
        None => println!("unsolvable"),
    }
}
