use std::collections::BTreeSet;

use rushhour::ncl::{
    builtin_gate, gate_equivalence, machine_states, machine_step_graph, or_from_half_ors,
    parse_ncl, project_machine, validate_gate_type, Builtin, Flip, Machine, Node,
};

const ALL: [Builtin; 4] = [Builtin::Wire, Builtin::And, Builtin::Or, Builtin::HalfOr];

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

#[test]
fn builtin_transitions_flip_one_label() {
    for kind in ALL {
        let g = builtin_gate(kind);
        assert!(validate_gate_type(&g).is_ok());
        for &(a, b) in &g.transitions {
            assert_eq!((g.states[a].out ^ g.states[b].out).count_ones(), 1);
        }
    }
}

#[test]
fn single_gate_machine_projects_to_itself() {
    for kind in ALL {
        let gate = builtin_gate(kind);
        let m = Machine::new(
            vec![Node {
                id: "g".into(),
                gate: gate.clone(),
            }],
            vec![],
            &[],
        )
        .unwrap();
        let induced = project_machine(&m, 1_000).unwrap();
        let renamed: Vec<String> = gate.labels.iter().map(|l| format!("g.{l}")).collect();
        let map = gate.labels.iter().cloned().zip(renamed).collect();
        let expected = gate.relabel(&map);
        // HALF-OR's two states with the same orientation stay apart: no
        // internal step joins them.
        assert_eq!(induced.states.len(), gate.states.len());
        assert!(gate_equivalence(&induced, &expected), "{kind:?}");
    }
}

#[test]
fn step_graph_is_symmetric_and_flips_are_local() {
    let m = or_from_half_ors();
    let graph = machine_step_graph(&m, 10_000).unwrap();
    let edges: BTreeSet<(usize, usize)> = graph.edges.iter().map(|&(a, b, _)| (a, b)).collect();
    assert_eq!(edges.len(), graph.edges.len());
    for &(a, b, flip) in &graph.edges {
        assert!(a < b);
        let (sa, sb) = (&graph.states[a], &graph.states[b]);
        let changed = (0..sa.gate_states.len())
            .filter(|&i| sa.gate_states[i] != sb.gate_states[i])
            .count();
        let flipped: u32 = sa
            .out
            .iter()
            .zip(&sb.out)
            .map(|(x, y)| (x ^ y).count_ones())
            .sum();
        match flip {
            Flip::Matched(i) => {
                let (h1, h2) = m.matching()[i];
                assert_eq!(changed, if h1.node == h2.node { 1 } else { 2 });
                assert_eq!(flipped, 2);
            }
            Flip::Port(_) => {
                assert_eq!(changed, 1);
                assert_eq!(flipped, 1);
            }
        }
    }
    let mut adj = vec![BTreeSet::new(); graph.states.len()];
    for &(a, b, _) in &graph.edges {
        adj[a].insert(b);
        adj[b].insert(a);
    }
    for (a, ns) in adj.iter().enumerate() {
        for &b in ns {
            assert!(adj[b].contains(&a));
        }
    }
}

#[test]
fn half_or_machine_from_file_is_or() {
    let doc = parse_ncl(&fixture("or_of_half_ors.machine")).unwrap();
    let m = doc.machine.unwrap();
    assert_eq!(m.port_labels(), vec!["z", "x", "y"]);
    let induced = project_machine(&m, 10_000).unwrap();
    assert!(gate_equivalence(&induced, &builtin_gate(Builtin::Or)));
    assert!(!gate_equivalence(&induced, &builtin_gate(Builtin::And)));
    assert_eq!(machine_states(&m, 10_000).unwrap().len(), 36);
}

#[test]
fn half_or_machine_can_switch_inputs_while_output_stays_active() {
    // With both inputs active, the output may be carried by either HALF-OR;
    // releasing x must still leave the output active through y.
    let m = or_from_half_ors();
    let graph = machine_step_graph(&m, 10_000).unwrap();
    let profile = |i: usize| m.profile(&graph.states[i]);
    // Port order z, x, y; bit set = Out. Output active = z In; inputs active = Out.
    let z_active_x_only: Vec<usize> = (0..graph.states.len())
        .filter(|&i| profile(i) == 0b010)
        .collect();
    let z_active_y_only: Vec<usize> = (0..graph.states.len())
        .filter(|&i| profile(i) == 0b100)
        .collect();
    assert!(!z_active_x_only.is_empty() && !z_active_y_only.is_empty());
    // They are connected without ever releasing the output.
    let keep: Vec<bool> = (0..graph.states.len())
        .map(|i| profile(i) & 1 == 0)
        .collect();
    let mut reach = vec![false; graph.states.len()];
    let mut stack = vec![z_active_x_only[0]];
    reach[z_active_x_only[0]] = true;
    while let Some(s) = stack.pop() {
        for &(a, b, _) in &graph.edges {
            let t = if a == s {
                b
            } else if b == s {
                a
            } else {
                continue;
            };
            if keep[t] && !reach[t] {
                reach[t] = true;
                stack.push(t);
            }
        }
    }
    assert!(z_active_y_only.iter().any(|&i| reach[i]));
}

#[test]
fn machine_file_errors() {
    assert!(parse_ncl("node a or\nnode a and").is_err());
    assert!(parse_ncl("node a or\nmatch a.q a.x").is_err());
    assert!(parse_ncl("node a or\nnode b or\nmatch a.x b.x\nmatch a.x b.y").is_err());
    assert!(parse_ncl("node a or\nport p a.q").is_err());
}

#[test]
fn custom_gate_in_machine() {
    let text = "\
gate buf: labels i,o
state s0: out={i}
state s1: out={o}
state s2: out={i,o}
trans s0 s2
trans s1 s2
node b buf
";
    let doc = parse_ncl(text).unwrap();
    let m = doc.machine.unwrap();
    let induced = project_machine(&m, 100).unwrap();
    assert_eq!(induced.states.len(), 3);
    assert_eq!(induced.transition_count(), 2);
}
