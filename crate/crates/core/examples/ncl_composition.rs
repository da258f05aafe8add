//! Builds OR from a SPLIT and two HALF-OR gates and checks that the machine,
//! seen only through its three ports, behaves exactly like OR.

use rushhour::ncl::{
    builtin_gate, gate_equivalence, machine_states, or_from_half_ors, project_machine, Builtin,
};

fn main() {
    let machine = or_from_half_ors();
    let states = machine_states(&machine, 1_000).expect("small machine");
    println!("machine states: {}", states.len());

    let induced = project_machine(&machine, 1_000).expect("small machine");
    print!("{}", induced.render());

    let or = builtin_gate(Builtin::Or);
    println!(
        "equivalent to or: {} ({} states, {} transitions)",
        gate_equivalence(&induced, &or),
        induced.states.len(),
        induced.transition_count()
    );
    println!(
        "equivalent to and: {}",
        gate_equivalence(&induced, &builtin_gate(Builtin::And))
    );
}
