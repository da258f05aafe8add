//! Splits the empty cell's path along a worst-case solution into simple
//! paths and circuits, and writes the trace as SVG.
//!
//! `cargo run --release --example trajectory_render -- 4 4 out.svg`

use rushhour::trace::{render_svg, solution_frames};
use rushhour::unitsearch::{analyze_solution, worst_case};
use rushhour::Board;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (w, h) = match args.as_slice() {
        [w, h, ..] => (w.parse().unwrap(), h.parse().unwrap()),
        _ => (3, 3),
    };
    let report = worst_case(w, h).expect("search");
    let path = report.witness_path().expect("witness is solvable");
    println!(
        "{w}x{h}: worst {} on exit row {}",
        report.worst, report.exit_row
    );
    for seg in analyze_solution(&path) {
        println!(
            "  {:?} steps {}..{} cells {:?}",
            seg.kind, seg.start, seg.end, seg.cells
        );
    }
    if let Some(out) = args.get(2) {
        let boards: Vec<Board> = path
            .iter()
            .map(|s| s.decode(report.exit_row).unwrap())
            .collect();
        std::fs::write(out, render_svg(&solution_frames(&boards))).expect("writable output");
        println!("wrote {out}");
    }
}
