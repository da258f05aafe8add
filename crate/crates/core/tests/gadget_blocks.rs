mod common;

use std::collections::{HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rushhour::board::Orientation;
use rushhour::gadgets::{enumerate_block, enumeration_closed, parse_block, verify_block, Block};
use rushhour::ncl::{gate_equivalence, quotient_gate};
use rushhour::Board;

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

/// Reachable boards and their move graph, found with the plain move
/// generator; a move is kept only if no port car leaves its two positions.
fn naive_enumeration(block: &Block) -> (Vec<Board>, Vec<(usize, usize)>) {
    let anchor = |b: &Board, car: usize| {
        let c = &b.cars()[car];
        match c.orientation {
            Orientation::Horizontal => c.anchor.1,
            Orientation::Vertical => c.anchor.0,
        }
    };
    let ok = |b: &Board| {
        block.ports.iter().all(|p| {
            let pos = anchor(b, p.car.0);
            pos == p.in_position || pos == p.out_position
        })
    };
    let mut index = HashMap::from([(common::key(&block.layout), 0)]);
    let mut boards = vec![block.layout.clone()];
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([0]);
    while let Some(i) = queue.pop_front() {
        for m in boards[i].legal_moves() {
            let next = boards[i].apply_move(m).unwrap();
            if !ok(&next) {
                continue;
            }
            let j = *index.entry(common::key(&next)).or_insert_with(|| {
                boards.push(next);
                queue.push_back(boards.len() - 1);
                boards.len() - 1
            });
            edges.push((i.min(j), i.max(j)));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    (boards, edges)
}

fn check_against_oracle(block: &Block) {
    let e = enumerate_block(block, 100_000).unwrap();
    let (boards, edges) = naive_enumeration(block);
    assert_eq!(e.configurations.len(), boards.len());
    assert_eq!(e.edges.len(), edges.len());
    assert!(enumeration_closed(block, &e));
    let out = |b: &Board| {
        block.ports.iter().enumerate().fold(0u32, |acc, (i, p)| {
            let c = &b.cars()[p.car.0];
            let pos = if c.orientation == Orientation::Horizontal {
                c.anchor.1
            } else {
                c.anchor.0
            };
            acc | ((pos == p.out_position) as u32) << i
        })
    };
    let profiles: Vec<u32> = boards.iter().map(out).collect();
    let naive = quotient_gate("naive", block.port_labels(), &profiles, &edges);
    assert!(gate_equivalence(
        &verify_block(block, 100_000).unwrap().induced,
        &naive
    ));
}

#[test]
fn fixtures_match_oracle() {
    for name in [
        "wire_corridor.block",
        "black_violation.block",
        "no_intended.block",
    ] {
        check_against_oracle(&parse_block(&fixture(name)).unwrap());
    }
}

#[test]
fn random_blocks_match_oracle() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 200 {
        let (w, h) = (rng.gen_range(3..=5), rng.gen_range(2..=4));
        let cells: Vec<char> = (0..w * h)
            .map(|_| match rng.gen_range(0..8) {
                0 => '#',
                1..=2 => '.',
                3..=5 => '-',
                _ => '|',
            })
            .collect();
        // A horizontal port car in the top-left corner, drawn out.
        let mut grid = cells;
        grid[0] = 'P';
        grid[1] = 'P';
        grid[2] = '.';
        let mut text: Vec<String> = grid.chunks(w).map(|r| r.iter().collect()).collect();
        text.push("% port p: car P in=0,1".into());
        let Ok(block) = parse_block(&text.join("\n")) else {
            continue;
        };
        check_against_oracle(&block);
        checked += 1;
    }
}

#[test]
fn separated_wires_form_a_product() {
    let text = "\
AA.BB
#####
CC.DD
% port a: car A in=0,1
% port b: car B in=0,2
% port c: car C in=2,1
% port d: car D in=2,2
% intended: wire * wire(a=c,b=d)";
    let report = verify_block(&parse_block(text).unwrap(), 1000).unwrap();
    assert_eq!(report.states, 9);
    assert_eq!(report.equivalent, Some(true));
}

#[test]
fn vertical_wire() {
    let text = "A\nA\n.\nB\nB\n% port a: car A in=1,0\n% port b: car B in=2,0\n% intended: wire";
    let report = verify_block(&parse_block(text).unwrap(), 100).unwrap();
    assert!(report.passed());
}

#[test]
fn internal_car_is_hidden_by_the_projection() {
    // The corridor cell holds a unit car that must drop out of the way
    // before either port can go in.
    let text = "\
AA|BB
##.##
% port a: car A in=0,1
% port b: car B in=0,2
% intended: wire";
    let report = verify_block(&parse_block(text).unwrap(), 100).unwrap();
    assert_eq!(report.states, 4);
    assert_eq!(report.equivalent, Some(true));
    let report = verify_block(
        &parse_block(&text.replace("wire", "free(a) * free(b)")).unwrap(),
        100,
    )
    .unwrap();
    assert_eq!(report.equivalent, Some(false));
}
