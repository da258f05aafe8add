mod common;

use rand::{Rng, SeedableRng};
use rushhour::unitsearch::{
    component_distance_field, search_components, worst_for_exit, Dims, SearchConfig, UnitState,
};
use rushhour::{Board, ExitSpec, Side};

#[test]
fn shortest_solution_matches_naive_bfs_on_small_unit_boards() {
    for (w, h) in common::small_dims(9) {
        for e in 0..h {
            let boards = common::unit_boards(w, h, e);
            let oracle = common::naive_distances(&boards);
            for b in &boards {
                let got = b.shortest_solution().unwrap().map(|s| s.length as u32);
                assert_eq!(got, oracle[&common::key(b)], "{w}x{h} e{e}\n{}", b.render());
            }
        }
    }
}

#[test]
fn solution_moves_replay_to_a_solved_board() {
    let b = Board::parse("AA.|\n.B.|\n.B..\nTT..").unwrap();
    let sol = b.shortest_solution().unwrap().unwrap();
    let mut cur = b.clone();
    for m in &sol.moves {
        cur = cur.apply_move(*m).unwrap();
    }
    assert!(cur.is_solved());
    assert_eq!(common::naive_distance(&b), Some(sol.length as u32));
}

/// Random boards with walls, longer cars and several empty cells.
fn random_board(rng: &mut impl Rng, w: usize, h: usize) -> Option<Board> {
    let mut grid = vec!['.'; w * h];
    let mut letter = b'A';
    let row = rng.gen_range(0..h);
    let tc = rng.gen_range(0..w - 1);
    grid[row * w + tc] = 'T';
    grid[row * w + tc + 1] = 'T';
    for _ in 0..w * h {
        let (r, c) = (rng.gen_range(0..h), rng.gen_range(0..w));
        if grid[r * w + c] != '.' {
            continue;
        }
        match rng.gen_range(0..10) {
            0 => grid[r * w + c] = '#',
            1..=3 => grid[r * w + c] = '|',
            4..=6 => grid[r * w + c] = '-',
            _ if letter <= b'S' => {
                let len = rng.gen_range(2..=3);
                let vertical = rng.gen_bool(0.5);
                let cells: Vec<usize> = (0..len)
                    .map(|k| {
                        if vertical {
                            (r + k) * w + c
                        } else {
                            r * w + c + k
                        }
                    })
                    .filter(|&i| if vertical { i < w * h } else { c + len <= w })
                    .collect();
                if cells.len() == len && cells.iter().all(|&i| grid[i] == '.') {
                    for i in cells {
                        grid[i] = letter as char;
                    }
                    letter += 1;
                }
            }
            _ => {}
        }
    }
    if grid.iter().filter(|&&c| c == '.').count() < 2 {
        return None;
    }
    let text: Vec<String> = grid.chunks(w).map(|r| r.iter().collect()).collect();
    let b = Board::parse(&text.join("\n")).ok()?;
    let side = if rng.gen_bool(0.3) {
        Side::Right
    } else {
        Side::Left
    };
    b.with_exit(ExitSpec { row, side }).ok()
}

#[test]
fn shortest_solution_matches_naive_bfs_on_random_boards() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let mut checked = 0;
    while checked < 300 {
        let (w, h) = (rng.gen_range(3..=5), rng.gen_range(2..=4));
        let Some(b) = random_board(&mut rng, w, h) else {
            continue;
        };
        let got = b.shortest_solution().unwrap().map(|s| s.length as u32);
        assert_eq!(got, common::naive_distance(&b), "\n{}", b.render());
        checked += 1;
    }
}

#[test]
fn component_distances_match_whole_graph_distances() {
    for (w, h) in [(3, 3), (4, 2), (2, 4)] {
        for e in 0..h {
            let boards = common::unit_boards(w, h, e);
            let oracle = common::naive_distances(&boards);
            let cfg = SearchConfig::new(Dims::new(w, h).unwrap(), e);
            for report in search_components(&cfg).unwrap() {
                let field = component_distance_field(&report.seed, e).unwrap();
                assert_eq!(field.states.len() as u64, report.size);
                for (s, d) in field.states.iter().zip(&field.distances) {
                    let b = s.decode(e).unwrap();
                    assert_eq!(oracle[&common::key(&b)], Some(*d));
                }
            }
            let worst = boards
                .iter()
                .filter_map(|b| oracle[&common::key(b)])
                .max()
                .unwrap_or(0);
            assert_eq!(worst_for_exit(&cfg).unwrap().worst, worst, "{w}x{h} e{e}");
        }
    }
}

#[test]
fn encode_matches_board_text() {
    let b = Board::parse("||=\n|-|\n-.|").unwrap();
    let s = UnitState::encode(&b).unwrap();
    assert_eq!(s.render(Some(0)), common::key(&b));
}
