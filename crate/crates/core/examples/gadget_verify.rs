//! Exhaustively checks gadget blocks: a straight wire and a block whose
//! "always occupied" cell can in fact be vacated.

use rushhour::gadgets::{parse_block, verify_block, DEFAULT_BLOCK_BOUND};

const WIRE: &str = "\
AA.BB
% port a: car A in=0,1
% port b: car B in=0,2
% intended: wire";

const LEAKY: &str = "\
AA.
###
-..
% port a: car A in=0,1
% black: 2,0
% intended: free(a)";

fn main() {
    for (name, text) in [("wire corridor", WIRE), ("leaky black cell", LEAKY)] {
        let block = parse_block(text).expect("valid block");
        let report = verify_block(&block, DEFAULT_BLOCK_BOUND).expect("within bound");
        println!("{name}: {} configurations", report.states);
        println!(
            "  induced gate: {} states, {} transitions",
            report.induced.states.len(),
            report.induced.transition_count()
        );
        println!("  matches intended: {:?}", report.equivalent);
        match &report.counterexample {
            None => println!("  black cells stay occupied"),
            Some((board, (r, c))) => println!("  cell ({r},{c}) vacated in\n{}", board.render()),
        }
    }
}
