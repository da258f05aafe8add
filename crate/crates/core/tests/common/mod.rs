//! Brute-force oracles shared by the integration tests. Nothing here uses
//! the compact encoding or the component search: boards are built from text
//! and explored with the plain `Board` move generator.

#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use rushhour::{Board, ExitSpec, Side};

/// Every single-empty unit board of a `w x h` grid with exit row `e` that
/// has a horizontal car on row `e` (that car, the leftmost, is the target).
pub fn unit_boards(w: usize, h: usize, e: usize) -> Vec<Board> {
    let n = w * h;
    let mut out = Vec::new();
    for empty in 0..n {
        for bits in 0u64..1 << (n - 1) {
            let mut grid = vec!['.'; n];
            let mut k = 0;
            for (i, cell) in grid.iter_mut().enumerate() {
                if i == empty {
                    continue;
                }
                *cell = if bits >> k & 1 == 1 { '|' } else { '-' };
                k += 1;
            }
            let Some(t) = (0..w).map(|c| e * w + c).find(|&i| grid[i] == '-') else {
                continue;
            };
            grid[t] = '=';
            let text: String = grid
                .chunks(w)
                .map(|r| r.iter().collect::<String>())
                .collect::<Vec<_>>()
                .join("\n");
            let board = Board::parse(&text).expect("generated board parses");
            out.push(
                board
                    .with_exit(ExitSpec {
                        row: e,
                        side: Side::Left,
                    })
                    .unwrap(),
            );
        }
    }
    out
}

/// Grid text of a board (no metadata line).
pub fn key(board: &Board) -> String {
    board
        .render()
        .lines()
        .filter(|l| !l.starts_with('%'))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Distance-to-solve of every board in `boards`, by breadth-first search
/// outward from all solved boards over the materialized move graph.
pub fn naive_distances(boards: &[Board]) -> HashMap<String, Option<u32>> {
    let mut dist: HashMap<String, Option<u32>> = boards.iter().map(|b| (key(b), None)).collect();
    let by_key: HashMap<String, &Board> = boards.iter().map(|b| (key(b), b)).collect();
    let mut queue = VecDeque::new();
    for b in boards {
        if b.is_solved() {
            dist.insert(key(b), Some(0));
            queue.push_back(key(b));
        }
    }
    while let Some(k) = queue.pop_front() {
        let d = dist[&k].unwrap();
        let b = by_key[&k];
        for m in b.legal_moves() {
            let nk = key(&b.apply_move(m).unwrap());
            let slot = dist
                .get_mut(&nk)
                .expect("moves stay inside the enumerated set");
            if slot.is_none() {
                *slot = Some(d + 1);
                queue.push_back(nk);
            }
        }
    }
    dist
}

/// Distance of one board by plain breadth-first search on boards.
pub fn naive_distance(start: &Board) -> Option<u32> {
    let mut seen: HashMap<String, u32> = HashMap::from([(key(start), 0)]);
    let mut queue = VecDeque::from([start.clone()]);
    while let Some(b) = queue.pop_front() {
        let d = seen[&key(&b)];
        if b.is_solved() {
            return Some(d);
        }
        for m in b.legal_moves() {
            let n = b.apply_move(m).unwrap();
            if let std::collections::hash_map::Entry::Vacant(v) = seen.entry(key(&n)) {
                v.insert(d + 1);
                queue.push_back(n);
            }
        }
    }
    None
}

/// Grids with `w >= 2` and at most `max_cells` cells.
pub fn small_dims(max_cells: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for h in 1..=max_cells {
        for w in 2..=max_cells {
            if w * h <= max_cells {
                v.push((w, h));
            }
        }
    }
    v
}
