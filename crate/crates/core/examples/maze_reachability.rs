//! The maze view of a unit puzzle: which cells the empty cell can visit and
//! which cars can move at all.

use rushhour::maze::{can_move_car, unit_to_maze};
use rushhour::Board;

fn main() {
    for text in ["||=\n|-|\n-.|", "|=\n|."] {
        let board = Board::parse(text).expect("valid board");
        let maze = unit_to_maze(&board).expect("single-empty unit board");
        println!("{}", maze.render());
        println!("reachable: {:?}", maze.reachable_cells());
        for car in board.cars() {
            println!(
                "  car at {:?} movable: {}",
                car.anchor,
                can_move_car(&board, car.id).unwrap()
            );
        }
        println!(
            "fewest player moves to the exit: {:?}\n",
            maze.shortest_exit()
        );
    }
}
