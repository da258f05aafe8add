mod common;

use rushhour::unitsearch::{
    search_components, state_count, worst_case, worst_case_with, Class, Dims, SearchConfig,
    UnitState,
};

#[test]
fn classes_match_board_predicates() {
    for (w, h) in common::small_dims(9) {
        let dims = Dims::new(w, h).unwrap();
        for e in 0..h {
            let mut counts = [0u64; 4];
            for code in 0..state_count(w, h).unwrap() {
                let s = UnitState::from_code(dims, code).unwrap();
                let class = s.classify(e);
                counts[class as usize] += 1;
                if class == Class::Filtered {
                    continue;
                }
                let board = s.decode(e).unwrap();
                assert_eq!(
                    board.is_solved(),
                    matches!(class, Class::Solved | Class::JustSolved)
                );
            }
            // The target sits at the exit and the empty cell right behind it;
            // every other cell is free.
            assert_eq!(counts[Class::JustSolved as usize], 1 << (w * h - 2));
        }
    }
}

#[test]
fn witness_paths_are_shortest_solutions() {
    for (w, h) in [(2, 2), (3, 2), (3, 3), (4, 3), (2, 5)] {
        let report = worst_case(w, h).unwrap();
        let path = report.witness_path().unwrap();
        assert_eq!(path.len() - 1, report.worst as usize);
        assert!(matches!(
            path.last().unwrap().classify(report.exit_row),
            Class::Solved | Class::JustSolved
        ));
        for pair in path.windows(2) {
            assert!(pair[0].neighbors().contains(&pair[1]));
        }
        let start = path[0].decode(report.exit_row).unwrap();
        assert_eq!(common::naive_distance(&start), Some(report.worst));
    }
}

#[test]
fn component_maxima_match_naive_search() {
    let (w, h, e) = (3, 3, 1);
    let boards = common::unit_boards(w, h, e);
    let oracle = common::naive_distances(&boards);
    for c in search_components(&SearchConfig::new(Dims::new(w, h).unwrap(), e)).unwrap() {
        let witness = c.witness.decode(e).unwrap();
        assert_eq!(oracle[&common::key(&witness)], Some(c.max_distance));
        assert!(c.justsolved >= 1 && c.size >= c.justsolved);
    }
}

#[test]
fn workers_do_not_change_results() {
    let dims = Dims::new(4, 3).unwrap();
    let one = worst_case_with(&SearchConfig::new(dims, 0)).unwrap();
    let many = worst_case_with(&SearchConfig::new(dims, 0).workers(3)).unwrap();
    assert_eq!(one, many);
}
