//! Worst-case distance-to-solve for single-empty unit boards.
//!
//! `cargo run --release --example worst_case_table -- 4 4` prints one grid
//! cell; with no arguments the whole table up to 20 cells is printed.

use std::time::Instant;

use rushhour::unitsearch::worst_case;

fn main() {
    let args: Vec<usize> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("numeric argument"))
        .collect();
    let cells: Vec<(usize, usize)> = match args.as_slice() {
        [w, h] => vec![(*w, *h)],
        [] => (2..=10)
            .flat_map(|h| (2..=10).map(move |w| (w, h)))
            .filter(|(w, h)| w * h <= 20)
            .collect(),
        _ => panic!("usage: worst_case_table [width height]"),
    };
    for (w, h) in cells {
        let t = Instant::now();
        let report = worst_case(w, h).expect("search");
        let best = report
            .per_exit
            .iter()
            .map(|e| format!("e{}={}", e.exit_row, e.worst))
            .collect::<Vec<_>>();
        println!(
            "{w}x{h}: {:>4}  [{}]  {:.2?}",
            report.worst,
            best.join(" "),
            t.elapsed()
        );
    }
}
