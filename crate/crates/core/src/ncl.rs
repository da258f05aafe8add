//! Nondeterministic Constraint Logic.
//!
//! A gate type has labelled half-edges, a set of states each orienting every
//! half-edge `In` or `Out`, and a symmetric transition relation between states
//! that differ in exactly one half-edge. A machine wires gates together by
//! matching half-edges; the unmatched ones are its ports. Projecting a
//! machine onto its ports yields a new gate type.
//!
//! Activity convention: a gate input is active when oriented `Out`, an output
//! is active when oriented `In`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use rustc_hash::FxHashMap;
use thiserror::Error;

/// Bit `i` set means label `i` is oriented `Out`.
pub type Mask = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NclError {
    #[error("unknown gate type '{0}'")]
    UnknownGate(String),
    #[error("gate '{gate}' has no label '{label}'")]
    UnknownLabel { gate: String, label: String },
    #[error("unknown node '{0}'")]
    UnknownNode(String),
    #[error("duplicate node '{0}'")]
    DuplicateNode(String),
    #[error("half-edge {0} is matched more than once")]
    HalfEdgeReused(String),
    #[error("half-edge {0} is matched to itself")]
    SelfMatch(String),
    #[error("port name '{0}' is not an unmatched half-edge or is used twice")]
    BadPort(String),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("more than {bound} machine states")]
    BoundExceeded { bound: usize },
    #[error("gate has {0} labels; at most 32 are supported")]
    TooManyLabels(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GateState {
    pub id: String,
    pub out: Mask,
    /// Annotation separating states that share an orientation.
    pub dep: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateType {
    pub name: String,
    pub labels: Vec<String>,
    pub states: Vec<GateState>,
    /// Directed pairs of state indices; a well-formed gate lists both
    /// directions of every transition.
    pub transitions: BTreeSet<(usize, usize)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Builtin {
    Wire,
    /// Also used as SPLIT.
    And,
    Or,
    HalfOr,
}

impl std::str::FromStr for Builtin {
    type Err = NclError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "wire" => Ok(Builtin::Wire),
            "and" | "split" => Ok(Builtin::And),
            "or" => Ok(Builtin::Or),
            "half-or" | "halfor" | "half_or" | "latch" => Ok(Builtin::HalfOr),
            _ => Err(NclError::UnknownGate(s.to_string())),
        }
    }
}

/// Violations reported by [`validate_gate_type`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GateViolation {
    NotSingleFlip { from: String, to: String },
    Asymmetric { from: String, to: String },
    BadStateIndex(usize),
}

impl fmt::Display for GateViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateViolation::NotSingleFlip { from, to } => {
                write!(
                    f,
                    "transition {from} -> {to} does not flip exactly one half-edge"
                )
            }
            GateViolation::Asymmetric { from, to } => {
                write!(f, "transition {from} -> {to} has no reverse")
            }
            GateViolation::BadStateIndex(i) => write!(f, "transition refers to missing state {i}"),
        }
    }
}

impl GateType {
    /// Gate whose states are all orientations accepted by `valid`, with every
    /// single-flip pair as a transition.
    pub fn from_constraint(name: &str, labels: &[&str], valid: impl Fn(Mask) -> bool) -> GateType {
        let states: Vec<GateState> = (0..1u32 << labels.len())
            .filter(|&m| valid(m))
            .map(|m| GateState {
                id: m.to_string(),
                out: m,
                dep: None,
            })
            .collect();
        let mut transitions = BTreeSet::new();
        for (i, a) in states.iter().enumerate() {
            for (j, b) in states.iter().enumerate() {
                if (a.out ^ b.out).count_ones() == 1 {
                    transitions.insert((i, j));
                }
            }
        }
        GateType {
            name: name.to_string(),
            labels: labels.iter().map(|l| l.to_string()).collect(),
            states,
            transitions,
        }
    }

    /// One port, free to be in or out.
    pub fn free(label: &str) -> GateType {
        GateType::from_constraint("free", &[label], |_| true)
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Number of undirected transitions.
    pub fn transition_count(&self) -> usize {
        self.transitions.iter().filter(|(a, b)| a < b).count()
    }

    pub fn neighbors(&self, state: usize) -> impl Iterator<Item = usize> + '_ {
        self.transitions
            .range((state, 0)..(state + 1, 0))
            .map(|&(_, b)| b)
    }

    pub fn has_transition(&self, a: usize, b: usize) -> bool {
        self.transitions.contains(&(a, b))
    }

    /// The set of `Out` labels of a state, as names.
    pub fn out_labels(&self, state: usize) -> Vec<&str> {
        let m = self.states[state].out;
        self.labels
            .iter()
            .enumerate()
            .filter(|(i, _)| m >> i & 1 == 1)
            .map(|(_, l)| l.as_str())
            .collect()
    }

    /// Gate acting as `self` and `other` side by side; label sets must be
    /// disjoint.
    pub fn product(&self, other: &GateType) -> GateType {
        let shift = self.labels.len();
        let mut states = Vec::new();
        for a in &self.states {
            for b in &other.states {
                let dep = match (&a.dep, &b.dep) {
                    (None, None) => None,
                    (x, y) => Some(format!(
                        "{}|{}",
                        x.as_deref().unwrap_or(""),
                        y.as_deref().unwrap_or("")
                    )),
                };
                states.push(GateState {
                    id: format!("{}.{}", a.id, b.id),
                    out: a.out | b.out << shift,
                    dep,
                });
            }
        }
        let nb = other.states.len();
        let mut transitions = BTreeSet::new();
        for &(a1, a2) in &self.transitions {
            for b in 0..nb {
                transitions.insert((a1 * nb + b, a2 * nb + b));
            }
        }
        for &(b1, b2) in &other.transitions {
            for a in 0..self.states.len() {
                transitions.insert((a * nb + b1, a * nb + b2));
            }
        }
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        GateType {
            name: format!("{}*{}", self.name, other.name),
            labels,
            states,
            transitions,
        }
    }

    /// Renames labels; names missing from `map` are kept.
    pub fn relabel(&self, map: &BTreeMap<String, String>) -> GateType {
        GateType {
            labels: self
                .labels
                .iter()
                .map(|l| map.get(l).cloned().unwrap_or_else(|| l.clone()))
                .collect(),
            ..self.clone()
        }
    }

    /// Text form, parseable by [`parse_ncl`].
    pub fn render(&self) -> String {
        let mut out = format!("gate {}: labels {}\n", self.name, self.labels.join(","));
        for (i, s) in self.states.iter().enumerate() {
            let _ = write!(
                out,
                "state {}: out={{{}}}",
                s.id,
                self.out_labels(i).join(",")
            );
            if let Some(d) = &s.dep {
                let _ = write!(out, " dep={d}");
            }
            out.push('\n');
        }
        for &(a, b) in &self.transitions {
            if a < b {
                let _ = writeln!(out, "trans {} {}", self.states[a].id, self.states[b].id);
            }
        }
        out
    }
}

pub fn builtin_gate(kind: Builtin) -> GateType {
    const X: Mask = 1;
    const Y: Mask = 2;
    const Z: Mask = 4;
    match kind {
        Builtin::Wire => GateType::from_constraint("wire", &["a", "b"], |m| m != 0),
        Builtin::And => GateType::from_constraint("and", &["x", "y", "z"], |m| {
            m & Z != 0 || m & (X | Y) == X | Y
        }),
        Builtin::Or => GateType::from_constraint("or", &["x", "y", "z"], |m| m != 0),
        Builtin::HalfOr => {
            let mut states = Vec::new();
            for m in 1..8u32 {
                if m == X | Y {
                    for dep in ["x", "y"] {
                        states.push(GateState {
                            id: format!("{m}{dep}"),
                            out: m,
                            dep: Some(dep.to_string()),
                        });
                    }
                } else {
                    states.push(GateState {
                        id: m.to_string(),
                        out: m,
                        dep: None,
                    });
                }
            }
            let mut transitions = BTreeSet::new();
            for (i, a) in states.iter().enumerate() {
                for (j, b) in states.iter().enumerate() {
                    let flip = a.out ^ b.out;
                    if flip.count_ones() != 1 {
                        continue;
                    }
                    // With the output active the input it depends on is held.
                    let held = |s: &GateState| match s.dep.as_deref() {
                        Some("x") => flip == X,
                        Some("y") => flip == Y,
                        _ => false,
                    };
                    if !held(a) && !held(b) {
                        transitions.insert((i, j));
                    }
                }
            }
            GateType {
                name: "half-or".into(),
                labels: vec!["x".into(), "y".into(), "z".into()],
                states,
                transitions,
            }
        }
    }
}

/// Checks that every transition flips exactly one label and has a reverse.
pub fn validate_gate_type(gate: &GateType) -> Result<(), Vec<GateViolation>> {
    let mut problems = Vec::new();
    let name = |i: usize| gate.states[i].id.clone();
    for &(a, b) in &gate.transitions {
        if a >= gate.states.len() || b >= gate.states.len() {
            problems.push(GateViolation::BadStateIndex(a.max(b)));
            continue;
        }
        if (gate.states[a].out ^ gate.states[b].out).count_ones() != 1 {
            problems.push(GateViolation::NotSingleFlip {
                from: name(a),
                to: name(b),
            });
        }
        if !gate.transitions.contains(&(b, a)) {
            problems.push(GateViolation::Asymmetric {
                from: name(a),
                to: name(b),
            });
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(problems)
    }
}

/// True iff a bijection between the states of the two gates preserves
/// orientations (matching labels by name) and transitions.
pub fn gate_equivalence(g1: &GateType, g2: &GateType) -> bool {
    if g1.labels.len() != g2.labels.len() || g1.states.len() != g2.states.len() {
        return false;
    }
    let mut perm = Vec::with_capacity(g2.labels.len());
    for l in &g2.labels {
        match g1.label_index(l) {
            Some(i) => perm.push(i),
            None => return false,
        }
    }
    let remap = |m: Mask| {
        perm.iter()
            .enumerate()
            .fold(0, |acc, (j, &i)| acc | (m >> j & 1) << i)
    };
    let masks2: Vec<Mask> = g2.states.iter().map(|s| remap(s.out)).collect();
    if g1.transition_count() != g2.transition_count()
        || g1.transitions.len() != g2.transitions.len()
    {
        return false;
    }
    let degree = |g: &GateType, i| g.neighbors(i).count();
    let mut assign: Vec<Option<usize>> = vec![None; g1.states.len()];
    let mut used = vec![false; g2.states.len()];

    fn extend(
        i: usize,
        g1: &GateType,
        g2: &GateType,
        masks2: &[Mask],
        degree: &dyn Fn(&GateType, usize) -> usize,
        assign: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
    ) -> bool {
        if i == g1.states.len() {
            return true;
        }
        for j in 0..g2.states.len() {
            if used[j] || masks2[j] != g1.states[i].out || degree(g1, i) != degree(g2, j) {
                continue;
            }
            let consistent = (0..i).all(|k| {
                let jk = assign[k].expect("assigned");
                g1.has_transition(i, k) == g2.has_transition(j, jk)
                    && g1.has_transition(k, i) == g2.has_transition(jk, j)
            });
            if !consistent {
                continue;
            }
            assign[i] = Some(j);
            used[j] = true;
            if extend(i + 1, g1, g2, masks2, degree, assign, used) {
                return true;
            }
            assign[i] = None;
            used[j] = false;
        }
        false
    }
    extend(0, g1, g2, &masks2, &degree, &mut assign, &mut used)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfEdge {
    pub node: usize,
    pub label: usize,
}

#[derive(Clone, Debug)]
pub struct Node {
    pub id: String,
    pub gate: GateType,
}

#[derive(Clone, Debug)]
pub struct Machine {
    nodes: Vec<Node>,
    matching: Vec<(HalfEdge, HalfEdge)>,
    ports: Vec<(String, HalfEdge)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MachineState {
    /// State index per node.
    pub gate_states: Vec<usize>,
    /// Orientation mask per node, equal to its gate state's orientation.
    pub out: Vec<Mask>,
}

/// What an edge of the step graph flips.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flip {
    /// Index into the machine's matching.
    Matched(usize),
    /// Index into the machine's ports.
    Port(usize),
}

#[derive(Clone, Debug)]
pub struct StepGraph {
    pub states: Vec<MachineState>,
    /// Undirected edges `(a, b)` with `a < b`.
    pub edges: Vec<(usize, usize, Flip)>,
}

pub const DEFAULT_STATE_BOUND: usize = 1_000_000;

impl Machine {
    /// Builds a machine. `port_names` renames selected unmatched half-edges;
    /// the rest are called `node.label`.
    pub fn new(
        nodes: Vec<Node>,
        matching: Vec<(HalfEdge, HalfEdge)>,
        port_names: &[(String, HalfEdge)],
    ) -> Result<Machine, NclError> {
        let he_name = |h: &HalfEdge| {
            format!(
                "{}.{}",
                nodes[h.node].id, nodes[h.node].gate.labels[h.label]
            )
        };
        let mut used = BTreeSet::new();
        for (a, b) in &matching {
            for h in [a, b] {
                if h.node >= nodes.len() || h.label >= nodes[h.node].gate.labels.len() {
                    return Err(NclError::UnknownLabel {
                        gate: format!("node {}", h.node),
                        label: h.label.to_string(),
                    });
                }
            }
            if a == b {
                return Err(NclError::SelfMatch(he_name(a)));
            }
            for h in [a, b] {
                if !used.insert(*h) {
                    return Err(NclError::HalfEdgeReused(he_name(h)));
                }
            }
        }
        for n in &nodes {
            if n.gate.labels.len() > 32 {
                return Err(NclError::TooManyLabels(n.gate.labels.len()));
            }
        }
        let mut ports = Vec::new();
        for (i, n) in nodes.iter().enumerate() {
            for l in 0..n.gate.labels.len() {
                let h = HalfEdge { node: i, label: l };
                if !used.contains(&h) {
                    ports.push((he_name(&h), h));
                }
            }
        }
        let mut renamed = BTreeSet::new();
        for (name, h) in port_names {
            let Some(slot) = ports.iter_mut().find(|(_, p)| p == h) else {
                return Err(NclError::BadPort(name.clone()));
            };
            if !renamed.insert(*h) {
                return Err(NclError::BadPort(name.clone()));
            }
            slot.0 = name.clone();
        }
        let names: BTreeSet<&String> = ports.iter().map(|(n, _)| n).collect();
        if names.len() != ports.len() {
            return Err(NclError::BadPort("duplicate port name".into()));
        }
        Ok(Machine {
            nodes,
            matching,
            ports,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn matching(&self) -> &[(HalfEdge, HalfEdge)] {
        &self.matching
    }

    pub fn ports(&self) -> &[(String, HalfEdge)] {
        &self.ports
    }

    pub fn port_labels(&self) -> Vec<String> {
        self.ports.iter().map(|(n, _)| n.clone()).collect()
    }

    /// Port orientation vector of a machine state.
    pub fn profile(&self, state: &MachineState) -> Mask {
        self.ports.iter().enumerate().fold(0, |acc, (i, (_, h))| {
            acc | (state.out[h.node] >> h.label & 1) << i
        })
    }

    fn find_node(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    /// Looks up a node id and label name.
    pub fn half_edge(&self, node: &str, label: &str) -> Result<HalfEdge, NclError> {
        let n = self
            .find_node(node)
            .ok_or_else(|| NclError::UnknownNode(node.to_string()))?;
        let gate = &self.nodes[n].gate;
        let l = gate
            .label_index(label)
            .ok_or_else(|| NclError::UnknownLabel {
                gate: gate.name.clone(),
                label: label.to_string(),
            })?;
        Ok(HalfEdge { node: n, label: l })
    }
}

/// Every assignment of gate states whose matched half-edges are oriented
/// one `In`, one `Out`.
pub fn machine_states(m: &Machine, bound: usize) -> Result<Vec<MachineState>, NclError> {
    let n = m.nodes.len();
    // Constraints checked once both ends are assigned.
    let mut checks: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); n];
    for (a, b) in &m.matching {
        let (early, late) = if a.node <= b.node { (a, b) } else { (b, a) };
        checks[late.node].push((late.label, early.node, early.label));
    }
    let mut out = Vec::new();
    let mut current = vec![0usize; n];
    let mut masks = vec![0 as Mask; n];

    #[allow(clippy::too_many_arguments)]
    fn rec(
        i: usize,
        m: &Machine,
        checks: &[Vec<(usize, usize, usize)>],
        current: &mut Vec<usize>,
        masks: &mut Vec<Mask>,
        out: &mut Vec<MachineState>,
        bound: usize,
    ) -> Result<(), NclError> {
        if i == m.nodes.len() {
            if out.len() >= bound {
                return Err(NclError::BoundExceeded { bound });
            }
            out.push(MachineState {
                gate_states: current.clone(),
                out: masks.clone(),
            });
            return Ok(());
        }
        for (s, st) in m.nodes[i].gate.states.iter().enumerate() {
            let ok = checks[i].iter().all(|&(label, other, other_label)| {
                let here = st.out >> label & 1;
                let there = if other == i { st.out } else { masks[other] } >> other_label & 1;
                here != there
            });
            if ok {
                current[i] = s;
                masks[i] = st.out;
                rec(i + 1, m, checks, current, masks, out, bound)?;
            }
        }
        Ok(())
    }
    rec(0, m, &checks, &mut current, &mut masks, &mut out, bound)?;
    Ok(out)
}

/// Step graph over all machine states: one matched pair or one port flips,
/// and every node touched makes a transition of its gate.
pub fn machine_step_graph(m: &Machine, bound: usize) -> Result<StepGraph, NclError> {
    let states = machine_states(m, bound)?;
    let index: FxHashMap<&[usize], usize> = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.gate_states.as_slice(), i))
        .collect();
    let units: Vec<(Flip, Vec<HalfEdge>)> = m
        .matching
        .iter()
        .enumerate()
        .map(|(i, (a, b))| (Flip::Matched(i), vec![*a, *b]))
        .chain(
            m.ports
                .iter()
                .enumerate()
                .map(|(i, (_, h))| (Flip::Port(i), vec![*h])),
        )
        .collect();
    let mut edges = BTreeSet::new();
    for (si, st) in states.iter().enumerate() {
        for (flip, hes) in &units {
            let mut new_masks: BTreeMap<usize, Mask> = BTreeMap::new();
            for h in hes {
                let e = new_masks.entry(h.node).or_insert(st.out[h.node]);
                *e ^= 1 << h.label;
            }
            // Candidate gate states per touched node.
            let mut options: Vec<(usize, Vec<usize>)> = Vec::new();
            for (&node, &mask) in &new_masks {
                let gate = &m.nodes[node].gate;
                let cur = st.gate_states[node];
                let cands: Vec<usize> = gate
                    .neighbors(cur)
                    .filter(|&t| gate.states[t].out == mask)
                    .collect();
                options.push((node, cands));
            }
            let mut combos: Vec<Vec<usize>> = vec![st.gate_states.clone()];
            for (node, cands) in &options {
                combos = combos
                    .into_iter()
                    .flat_map(|c| {
                        cands.iter().map(move |&t| {
                            let mut c = c.clone();
                            c[*node] = t;
                            c
                        })
                    })
                    .collect();
            }
            for c in combos {
                if let Some(&ti) = index.get(c.as_slice()) {
                    if ti != si {
                        edges.insert((si.min(ti), si.max(ti), *flip));
                    }
                }
            }
        }
    }
    Ok(StepGraph {
        states,
        edges: edges.into_iter().collect(),
    })
}

impl PartialOrd for Flip {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Flip {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let key = |f: &Flip| match f {
            Flip::Matched(i) => (0, *i),
            Flip::Port(i) => (1, *i),
        };
        key(self).cmp(&key(other))
    }
}

/// Contracts every edge whose endpoints share a port profile and returns the
/// quotient as a gate type: one state per contracted class (ordered by the
/// smallest member), one transition per pair of classes joined by an edge.
pub fn quotient_gate(
    name: &str,
    labels: Vec<String>,
    profiles: &[Mask],
    edges: &[(usize, usize)],
) -> GateType {
    let n = profiles.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(a, b) in edges {
        if profiles[a] == profiles[b] {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut class_of = vec![usize::MAX; n];
    let mut states = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        if class_of[r] == usize::MAX {
            class_of[r] = states.len();
            states.push(GateState {
                id: format!("c{}", states.len()),
                out: profiles[i],
                dep: None,
            });
        }
        class_of[i] = class_of[r];
    }
    let mut transitions = BTreeSet::new();
    for &(a, b) in edges {
        let (ca, cb) = (class_of[a], class_of[b]);
        if ca != cb {
            transitions.insert((ca, cb));
            transitions.insert((cb, ca));
        }
    }
    GateType {
        name: name.to_string(),
        labels,
        states,
        transitions,
    }
}

/// The gate type a machine induces on its ports.
pub fn project_machine(m: &Machine, bound: usize) -> Result<GateType, NclError> {
    let graph = machine_step_graph(m, bound)?;
    let profiles: Vec<Mask> = graph.states.iter().map(|s| m.profile(s)).collect();
    let edges: Vec<(usize, usize)> = graph.edges.iter().map(|&(a, b, _)| (a, b)).collect();
    Ok(quotient_gate("induced", m.port_labels(), &profiles, &edges))
}

/// Gates and (optionally) a machine read from one text file.
#[derive(Clone, Debug, Default)]
pub struct NclDocument {
    pub gates: Vec<GateType>,
    pub machine: Option<Machine>,
}

impl NclDocument {
    /// Gate by name: gates defined in the document first, then built-ins.
    pub fn resolve(&self, name: &str) -> Result<GateType, NclError> {
        resolve_gate(&self.gates, name)
    }
}

fn resolve_gate(defined: &[GateType], name: &str) -> Result<GateType, NclError> {
    if let Some(g) = defined.iter().find(|g| g.name == name) {
        return Ok(g.clone());
    }
    Ok(builtin_gate(name.parse()?))
}

/// Parses gate definitions and machine descriptions.
///
/// ```text
/// gate <name>: labels x,y,z
/// state <id>: out={x,y} [dep=<label>]
/// trans <id> <id>
/// node <id> <gate>
/// match <id>.<label> <id>.<label>
/// port <name> <id>.<label>
/// ```
///
/// `#` starts a comment. Transitions are undirected.
pub fn parse_ncl(text: &str) -> Result<NclDocument, NclError> {
    struct PendingGate {
        gate: GateType,
        ids: BTreeMap<String, usize>,
    }
    let mut gates: Vec<GateType> = Vec::new();
    let mut pending: Option<PendingGate> = None;
    let mut node_lines: Vec<(usize, String, String)> = Vec::new();
    let mut match_lines: Vec<(usize, String, String)> = Vec::new();
    let mut port_lines: Vec<(usize, String, String)> = Vec::new();
    let syntax = |line: usize, msg: &str| NclError::Syntax {
        line,
        msg: msg.to_string(),
    };

    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match kw {
            "gate" => {
                if let Some(p) = pending.take() {
                    gates.push(p.gate);
                }
                let (name, labels) = rest
                    .split_once(':')
                    .ok_or_else(|| syntax(line_no, "expected 'gate <name>: labels ...'"))?;
                let labels = labels
                    .trim()
                    .strip_prefix("labels")
                    .ok_or_else(|| syntax(line_no, "expected 'labels'"))?;
                let labels: Vec<String> = labels
                    .split(',')
                    .map(|l| l.trim().to_string())
                    .filter(|l| !l.is_empty())
                    .collect();
                if labels.len() > 32 {
                    return Err(NclError::TooManyLabels(labels.len()));
                }
                pending = Some(PendingGate {
                    gate: GateType {
                        name: name.trim().to_string(),
                        labels,
                        states: Vec::new(),
                        transitions: BTreeSet::new(),
                    },
                    ids: BTreeMap::new(),
                });
            }
            "state" => {
                let p = pending
                    .as_mut()
                    .ok_or_else(|| syntax(line_no, "state outside a gate"))?;
                let (id, spec) = rest
                    .split_once(':')
                    .ok_or_else(|| syntax(line_no, "expected 'state <id>: out={...}'"))?;
                let spec = spec.trim();
                let body = spec
                    .strip_prefix("out={")
                    .and_then(|s| s.split_once('}'))
                    .ok_or_else(|| syntax(line_no, "expected out={...}"))?;
                let mut out = 0;
                for l in body.0.split(',').map(str::trim).filter(|l| !l.is_empty()) {
                    let i = p
                        .gate
                        .label_index(l)
                        .ok_or_else(|| NclError::UnknownLabel {
                            gate: p.gate.name.clone(),
                            label: l.to_string(),
                        })?;
                    out |= 1 << i;
                }
                let tail = body.1.trim();
                let dep = if tail.is_empty() {
                    None
                } else {
                    Some(
                        tail.strip_prefix("dep=")
                            .ok_or_else(|| syntax(line_no, "expected dep=<label>"))?
                            .to_string(),
                    )
                };
                let id = id.trim().to_string();
                if p.ids.insert(id.clone(), p.gate.states.len()).is_some() {
                    return Err(syntax(line_no, "duplicate state id"));
                }
                p.gate.states.push(GateState { id, out, dep });
            }
            "trans" => {
                let p = pending
                    .as_mut()
                    .ok_or_else(|| syntax(line_no, "trans outside a gate"))?;
                let ids: Vec<&str> = rest.split_whitespace().collect();
                if ids.len() != 2 {
                    return Err(syntax(line_no, "expected 'trans <id> <id>'"));
                }
                let a = *p
                    .ids
                    .get(ids[0])
                    .ok_or_else(|| syntax(line_no, "unknown state id"))?;
                let b = *p
                    .ids
                    .get(ids[1])
                    .ok_or_else(|| syntax(line_no, "unknown state id"))?;
                p.gate.transitions.insert((a, b));
                p.gate.transitions.insert((b, a));
            }
            "node" | "match" | "port" => {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 2 {
                    return Err(syntax(
                        line_no,
                        &format!("expected '{kw}' with two arguments"),
                    ));
                }
                let entry = (line_no, parts[0].to_string(), parts[1].to_string());
                match kw {
                    "node" => node_lines.push(entry),
                    "match" => match_lines.push(entry),
                    _ => port_lines.push(entry),
                }
            }
            _ => return Err(syntax(line_no, &format!("unknown keyword '{kw}'"))),
        }
    }
    if let Some(p) = pending.take() {
        gates.push(p.gate);
    }
    if node_lines.is_empty() {
        if !match_lines.is_empty() || !port_lines.is_empty() {
            return Err(syntax(
                match_lines
                    .first()
                    .or(port_lines.first())
                    .map_or(0, |l| l.0),
                "no nodes declared",
            ));
        }
        return Ok(NclDocument {
            gates,
            machine: None,
        });
    }
    let mut nodes = Vec::new();
    for (_, id, gate) in &node_lines {
        if nodes.iter().any(|n: &Node| &n.id == id) {
            return Err(NclError::DuplicateNode(id.clone()));
        }
        nodes.push(Node {
            id: id.clone(),
            gate: resolve_gate(&gates, gate)?,
        });
    }
    let lookup = |spec: &str, line: usize| -> Result<HalfEdge, NclError> {
        let (node, label) = spec
            .split_once('.')
            .ok_or_else(|| syntax(line, "expected <node>.<label>"))?;
        let n = nodes
            .iter()
            .position(|x| x.id == node)
            .ok_or_else(|| NclError::UnknownNode(node.to_string()))?;
        let l = nodes[n]
            .gate
            .label_index(label)
            .ok_or_else(|| NclError::UnknownLabel {
                gate: nodes[n].gate.name.clone(),
                label: label.to_string(),
            })?;
        Ok(HalfEdge { node: n, label: l })
    };
    let mut matching = Vec::new();
    for (line, a, b) in &match_lines {
        matching.push((lookup(a, *line)?, lookup(b, *line)?));
    }
    let mut names = Vec::new();
    for (line, name, he) in &port_lines {
        names.push((name.clone(), lookup(he, *line)?));
    }
    let machine = Machine::new(nodes, matching, &names)?;
    Ok(NclDocument {
        gates,
        machine: Some(machine),
    })
}

/// The two-HALF-OR-plus-SPLIT machine whose ports behave as an OR.
pub fn or_from_half_ors() -> Machine {
    let split = builtin_gate(Builtin::And);
    let half_or = builtin_gate(Builtin::HalfOr);
    let nodes = vec![
        Node {
            id: "split".into(),
            gate: split,
        },
        Node {
            id: "ho1".into(),
            gate: half_or.clone(),
        },
        Node {
            id: "ho2".into(),
            gate: half_or,
        },
    ];
    let (x, y, z) = (0, 1, 2);
    let he = |node, label| HalfEdge { node, label };
    let matching = vec![
        (he(0, x), he(1, x)),
        (he(0, y), he(2, x)),
        (he(1, z), he(2, z)),
    ];
    let names = vec![
        ("x".to_string(), he(1, y)),
        ("y".to_string(), he(2, y)),
        ("z".to_string(), he(0, z)),
    ];
    Machine::new(nodes, matching, &names).expect("fixed wiring is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(kind: Builtin) -> (usize, usize) {
        let g = builtin_gate(kind);
        (g.states.len(), g.transition_count())
    }

    #[test]
    fn builtin_counts() {
        assert_eq!(counts(Builtin::Wire), (3, 2));
        assert_eq!(counts(Builtin::And), (5, 5));
        assert_eq!(counts(Builtin::Or), (7, 9));
        assert_eq!(counts(Builtin::HalfOr), (8, 10));
    }

    #[test]
    fn builtins_validate() {
        for kind in [Builtin::Wire, Builtin::And, Builtin::Or, Builtin::HalfOr] {
            assert_eq!(validate_gate_type(&builtin_gate(kind)), Ok(()));
        }
    }

    #[test]
    fn double_flip_rejected() {
        let mut g = builtin_gate(Builtin::Or);
        let a = g.states.iter().position(|s| s.out == 0b011).unwrap();
        let b = g.states.iter().position(|s| s.out == 0b101).unwrap();
        g.transitions.insert((a, b));
        g.transitions.insert((b, a));
        let errs = validate_gate_type(&g).unwrap_err();
        assert_eq!(errs.len(), 2);
        assert!(matches!(errs[0], GateViolation::NotSingleFlip { .. }));
    }

    #[test]
    fn asymmetric_rejected() {
        let mut g = builtin_gate(Builtin::Wire);
        let (a, b) = *g.transitions.iter().next().unwrap();
        g.transitions.remove(&(b, a));
        assert!(matches!(
            validate_gate_type(&g).unwrap_err()[0],
            GateViolation::Asymmetric { .. }
        ));
    }

    #[test]
    fn empty_gate_is_valid() {
        let g = GateType::from_constraint("none", &["a"], |_| false);
        assert!(g.states.is_empty());
        assert_eq!(validate_gate_type(&g), Ok(()));
    }

    #[test]
    fn half_or_dependency_holds_input() {
        let g = builtin_gate(Builtin::HalfOr);
        let dep_x = g
            .states
            .iter()
            .position(|s| s.dep.as_deref() == Some("x"))
            .unwrap();
        let outs: BTreeSet<Mask> = g.neighbors(dep_x).map(|t| g.states[t].out).collect();
        // Either z goes inactive, or y is released; x stays out.
        assert_eq!(outs, BTreeSet::from([0b111, 0b001]));
    }

    #[test]
    fn single_wire_machine() {
        let m = Machine::new(
            vec![Node {
                id: "w".into(),
                gate: builtin_gate(Builtin::Wire),
            }],
            vec![],
            &[],
        )
        .unwrap();
        assert_eq!(machine_states(&m, 100).unwrap().len(), 3);
        let graph = machine_step_graph(&m, 100).unwrap();
        assert_eq!(graph.edges.len(), 2);
        let induced = project_machine(&m, 100).unwrap();
        assert_eq!(induced.labels, vec!["w.a", "w.b"]);
        let wire = builtin_gate(Builtin::Wire).relabel(&BTreeMap::from([
            ("a".to_string(), "w.a".to_string()),
            ("b".to_string(), "w.b".to_string()),
        ]));
        assert!(gate_equivalence(&induced, &wire));
    }

    #[test]
    fn equivalence_basics() {
        let or = builtin_gate(Builtin::Or);
        let half_or = builtin_gate(Builtin::HalfOr);
        assert!(gate_equivalence(&or, &or));
        assert!(gate_equivalence(&half_or, &half_or));
        assert!(!gate_equivalence(&or, &half_or));
        assert!(!gate_equivalence(&or, &builtin_gate(Builtin::And)));
        let wire = builtin_gate(Builtin::Wire);
        assert!(!gate_equivalence(&or, &wire));
    }

    #[test]
    fn equivalence_ignores_label_order() {
        let and = builtin_gate(Builtin::And);
        let mut reordered =
            GateType::from_constraint("and2", &["z", "x", "y"], |m| m & 1 != 0 || m & 6 == 6);
        assert!(gate_equivalence(&and, &reordered));
        reordered.transitions.clear();
        assert!(!gate_equivalence(&and, &reordered));
    }

    #[test]
    fn machine_errors() {
        let w = || Node {
            id: "w".into(),
            gate: builtin_gate(Builtin::Wire),
        };
        let h = HalfEdge { node: 0, label: 0 };
        assert!(matches!(
            Machine::new(vec![w()], vec![(h, h)], &[]),
            Err(NclError::SelfMatch(_))
        ));
        let h2 = HalfEdge { node: 0, label: 1 };
        assert!(matches!(
            Machine::new(vec![w()], vec![(h, h2), (h2, h)], &[]),
            Err(NclError::HalfEdgeReused(_))
        ));
        assert!(matches!(
            Machine::new(vec![w()], vec![(h, h2)], &[("p".into(), h)]),
            Err(NclError::BadPort(_))
        ));
    }

    #[test]
    fn bound_is_enforced() {
        let m = or_from_half_ors();
        assert!(matches!(
            machine_states(&m, 3),
            Err(NclError::BoundExceeded { bound: 3 })
        ));
    }

    #[test]
    fn parse_and_render_gate() {
        let or = builtin_gate(Builtin::Or);
        let doc = parse_ncl(&or.render()).unwrap();
        assert_eq!(doc.gates.len(), 1);
        assert!(doc.machine.is_none());
        assert_eq!(doc.gates[0], or);
        let ho = builtin_gate(Builtin::HalfOr);
        assert_eq!(parse_ncl(&ho.render()).unwrap().gates[0], ho);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_ncl("state a: out={}"),
            Err(NclError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_ncl("gate g: labels a\nstate s: out={b}"),
            Err(NclError::UnknownLabel { .. })
        ));
        assert!(matches!(
            parse_ncl("node a nand"),
            Err(NclError::UnknownGate(_))
        ));
        assert!(matches!(
            parse_ncl("node a or\nmatch a.x b.x"),
            Err(NclError::UnknownNode(_))
        ));
        assert!(matches!(parse_ncl("bogus"), Err(NclError::Syntax { .. })));
    }
}
