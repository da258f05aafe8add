//! Right-hand rule on the 4x4 maze, from each of the four initial headings.
//! Prints the outcome and the diagrams at selected steps.

use rushhour::maze::{maze_to_unit, right_hand_run, unit_to_maze};
use rushhour::trace::side_by_side;
use rushhour::{Board, Direction};

const BOARD: &str = "||=-\n|-|.\n|--|\n---|";
const SHOWN: [usize; 9] = [0, 3, 9, 12, 14, 22, 32, 36, 44];

fn main() {
    let maze = unit_to_maze(&Board::parse(BOARD).unwrap()).unwrap();
    for heading in Direction::ALL {
        let trace = right_hand_run(&maze, heading, 1_000);
        println!("initial heading {heading:?}: {:?}", trace.outcome);
        let steps: Vec<usize> = SHOWN
            .iter()
            .copied()
            .filter(|&s| s < trace.steps.len())
            .collect();
        let boards: Vec<Board> = steps
            .iter()
            .map(|&s| maze_to_unit(trace.maze_at(s).unwrap()).unwrap())
            .collect();
        let labels: Vec<String> = steps.iter().map(|s| s.to_string()).collect();
        println!("{}\n", side_by_side(&labels, &boards));
    }
}
