//! Single-block gadgets: a layout whose boundary gaps hold two-position port
//! cars. Enumerating every configuration reachable from the drawn one and
//! projecting onto the port positions yields the gate the block implements.

use std::collections::VecDeque;

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::board::{Board, BoardError, Car, CarId, Cell, Orientation, PositionSpace};
use crate::ncl::{builtin_gate, gate_equivalence, quotient_gate, GateType, Mask, NclError};

pub const DEFAULT_BLOCK_BOUND: usize = 2_000_000;

#[derive(Debug, Error)]
pub enum GadgetError {
    #[error(transparent)]
    Board(#[from] BoardError),
    #[error(transparent)]
    Ncl(#[from] NclError),
    #[error("bad block metadata: {0}")]
    Metadata(String),
    #[error("port '{port}': no car labelled '{car}'")]
    UnknownCar { port: String, car: char },
    #[error("port '{0}' declared twice")]
    DuplicatePort(String),
    #[error("port '{port}': car is not bi-positional ({reason})")]
    NotBiPositional { port: String, reason: String },
    #[error("black cell ({0},{1}) is empty or a wall in the layout")]
    BlackCellEmpty(usize, usize),
    #[error("block has no intended gate")]
    NoIntendedGate,
    #[error("more than {bound} reachable configurations")]
    BoundExceeded { bound: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Port {
    pub name: String,
    pub car: CarId,
    pub axis: Orientation,
    /// Anchor position along the axis when the port is in.
    pub in_position: usize,
    pub out_position: usize,
}

#[derive(Clone, Debug)]
pub struct Block {
    pub layout: Board,
    pub ports: Vec<Port>,
    pub black: Vec<(usize, usize)>,
    pub intended: Option<GateType>,
    /// Source text of the intended gate expression.
    pub intended_name: Option<String>,
}

/// One reachable arrangement, as per-car axis positions.
pub type Configuration = Vec<u8>;

#[derive(Clone, Debug)]
pub struct Enumeration {
    pub configurations: Vec<Configuration>,
    /// Undirected edges between configuration indices, `a < b`.
    pub edges: Vec<(usize, usize)>,
}

#[derive(Clone, Debug)]
pub struct BlockReport {
    pub states: usize,
    pub induced: GateType,
    /// `None` when the block names no intended gate.
    pub equivalent: Option<bool>,
    pub black_ok: bool,
    /// First reachable configuration (in search order) that vacates a black
    /// cell, with the vacated cell.
    pub counterexample: Option<(Board, (usize, usize))>,
}

impl BlockReport {
    pub fn passed(&self) -> bool {
        self.equivalent != Some(false) && self.black_ok
    }
}

/// Resolves an intended-gate expression: factors joined by `*`, each a
/// built-in name optionally relabelled, `or(x=a,y=b,z=c)`, or `free(<label>)`.
pub fn parse_gate_expr(expr: &str) -> Result<GateType, GadgetError> {
    let mut result: Option<GateType> = None;
    for factor in expr.split('*').map(str::trim) {
        let (name, args) = match factor.split_once('(') {
            Some((n, rest)) => {
                let args = rest
                    .strip_suffix(')')
                    .ok_or_else(|| GadgetError::Metadata(format!("unclosed '(' in '{factor}'")))?;
                (n.trim(), Some(args))
            }
            None => (factor, None),
        };
        let gate = if name == "free" {
            let label = args.map(str::trim).filter(|a| !a.is_empty());
            GateType::free(
                label.ok_or_else(|| GadgetError::Metadata("free() needs a label".into()))?,
            )
        } else {
            let mut gate = builtin_gate(name.parse()?);
            if let Some(args) = args {
                let mut map = std::collections::BTreeMap::new();
                for pair in args.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                    let (from, to) = pair.split_once('=').ok_or_else(|| {
                        GadgetError::Metadata(format!("expected label=name, got '{pair}'"))
                    })?;
                    if gate.label_index(from.trim()).is_none() {
                        return Err(NclError::UnknownLabel {
                            gate: gate.name,
                            label: from.trim().into(),
                        }
                        .into());
                    }
                    map.insert(from.trim().to_string(), to.trim().to_string());
                }
                gate = gate.relabel(&map);
            }
            gate
        };
        result = Some(match result {
            None => gate,
            Some(acc) => acc.product(&gate),
        });
    }
    result.ok_or_else(|| GadgetError::Metadata("empty gate expression".into()))
}

fn parse_cell(s: &str) -> Option<(usize, usize)> {
    let s = s.trim().trim_start_matches('(').trim_end_matches(')');
    let (r, c) = s.split_once(',')?;
    Some((r.trim().parse().ok()?, c.trim().parse().ok()?))
}

fn blocked(board: &Board, cell: Option<(usize, usize)>) -> bool {
    cell.is_none_or(|(r, c)| board.cell(r, c) == Cell::Wall)
}

/// Cell just past the car's end in the direction of `delta` (+1 or -1 along
/// its axis), for the car anchored at `pos`.
fn cell_beyond(board: &Board, car: &Car, pos: usize, forward: bool) -> Option<(usize, usize)> {
    let (lane_len, lane) = match car.orientation {
        Orientation::Horizontal => (board.width(), car.anchor.0),
        Orientation::Vertical => (board.height(), car.anchor.1),
    };
    let along = if forward {
        pos + car.length
    } else {
        pos.checked_sub(1)?
    };
    if along >= lane_len {
        return None;
    }
    Some(match car.orientation {
        Orientation::Horizontal => (lane, along),
        Orientation::Vertical => (along, lane),
    })
}

/// Parses a block file: a board layout plus `% port`, `% black` and
/// `% intended` lines. Port cars are drawn in their out position.
pub fn parse_block(text: &str) -> Result<Block, GadgetError> {
    let (layout, meta) = Board::parse_layout(text)?;
    let mut ports: Vec<Port> = Vec::new();
    let mut black = Vec::new();
    let mut intended_name = None;
    for line in meta {
        let body = line.trim_start_matches('%').trim();
        if let Some(rest) = body.strip_prefix("port") {
            let (name, spec) = rest
                .split_once(':')
                .ok_or_else(|| GadgetError::Metadata(line.clone()))?;
            let name = name.trim().to_string();
            let mut letter = None;
            let mut in_cell = None;
            let mut words = spec.split_whitespace();
            while let Some(w) = words.next() {
                if w == "car" {
                    letter = words.next().and_then(|l| l.chars().next());
                } else if let Some(c) = w.strip_prefix("in=") {
                    in_cell = parse_cell(c);
                } else {
                    return Err(GadgetError::Metadata(line.clone()));
                }
            }
            let (Some(letter), Some(in_cell)) = (letter, in_cell) else {
                return Err(GadgetError::Metadata(line.clone()));
            };
            if ports.iter().any(|p| p.name == name) {
                return Err(GadgetError::DuplicatePort(name));
            }
            let car = layout
                .cars()
                .iter()
                .find(|c| c.label == Some(letter))
                .ok_or_else(|| GadgetError::UnknownCar {
                    port: name.clone(),
                    car: letter,
                })?;
            ports.push(check_port(&layout, car, name, in_cell)?);
        } else if let Some(rest) = body.strip_prefix("black:") {
            for tok in rest.split_whitespace() {
                let (r, c) = parse_cell(tok).ok_or_else(|| GadgetError::Metadata(line.clone()))?;
                if r >= layout.height()
                    || c >= layout.width()
                    || !matches!(layout.cell(r, c), Cell::Car(_))
                {
                    return Err(GadgetError::BlackCellEmpty(r, c));
                }
                black.push((r, c));
            }
        } else if let Some(rest) = body.strip_prefix("intended:") {
            intended_name = Some(rest.trim().to_string());
        } else {
            return Err(GadgetError::Metadata(line));
        }
    }
    let intended = intended_name.as_deref().map(parse_gate_expr).transpose()?;
    Ok(Block {
        layout,
        ports,
        black,
        intended,
        intended_name,
    })
}

fn check_port(
    layout: &Board,
    car: &Car,
    name: String,
    in_cell: (usize, usize),
) -> Result<Port, GadgetError> {
    let bad = |reason: &str| GadgetError::NotBiPositional {
        port: name.clone(),
        reason: reason.to_string(),
    };
    let out_position = car.position();
    let (in_lane, in_position) = match car.orientation {
        Orientation::Horizontal => in_cell,
        Orientation::Vertical => (in_cell.1, in_cell.0),
    };
    let lane = match car.orientation {
        Orientation::Horizontal => car.anchor.0,
        Orientation::Vertical => car.anchor.1,
    };
    if in_lane != lane || in_position.abs_diff(out_position) != 1 {
        return Err(bad("in position must be one step along the car's axis"));
    }
    let inward = in_position > out_position;
    let entry = cell_beyond(layout, car, out_position, inward);
    if entry.is_none() || blocked(layout, entry) {
        return Err(bad("in position runs into a wall or the border"));
    }
    if !blocked(layout, cell_beyond(layout, car, out_position, !inward)) {
        return Err(bad("car can move past its out position"));
    }
    Ok(Port {
        name,
        car: car.id,
        axis: car.orientation,
        in_position,
        out_position,
    })
}

impl Block {
    fn port_index(&self) -> FxHashMap<usize, usize> {
        self.ports
            .iter()
            .enumerate()
            .map(|(i, p)| (p.car.0, i))
            .collect()
    }

    /// Port profile of a configuration: bit `i` set when port `i` is out.
    pub fn profile(&self, config: &[u8]) -> Mask {
        self.ports.iter().enumerate().fold(0, |acc, (i, p)| {
            acc | ((config[p.car.0] as usize == p.out_position) as Mask) << i
        })
    }

    pub fn board_at(&self, config: &[u8]) -> Board {
        self.layout
            .with_positions(config)
            .expect("enumerated configurations are valid")
    }

    pub fn port_labels(&self) -> Vec<String> {
        self.ports.iter().map(|p| p.name.clone()).collect()
    }
}

/// Breadth-first closure of the drawn configuration. Port cars may only move
/// between their two positions.
pub fn enumerate_block(block: &Block, bound: usize) -> Result<Enumeration, GadgetError> {
    let space = PositionSpace::new(&block.layout);
    let ports = block.port_index();
    let allowed = |car: usize, pos: u8| {
        ports.get(&car).is_none_or(|&i| {
            let p = &block.ports[i];
            pos as usize == p.in_position || pos as usize == p.out_position
        })
    };
    let start = block.layout.positions();
    let mut index: FxHashMap<Configuration, usize> = FxHashMap::default();
    let mut configurations = vec![start.clone()];
    index.insert(start, 0);
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    let mut occ = Vec::new();
    while let Some(i) = queue.pop_front() {
        let cur = configurations[i].clone();
        space.occupancy(&cur, &mut occ);
        for (mv, next) in space.successors(&cur, &occ) {
            if !allowed(mv.car.0, next[mv.car.0]) {
                continue;
            }
            let j = match index.get(&next) {
                Some(&j) => j,
                None => {
                    if configurations.len() >= bound {
                        return Err(GadgetError::BoundExceeded { bound });
                    }
                    let j = configurations.len();
                    index.insert(next.clone(), j);
                    configurations.push(next);
                    queue.push_back(j);
                    j
                }
            };
            if i < j {
                edges.push((i, j));
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    Ok(Enumeration {
        configurations,
        edges,
    })
}

/// Induced gate over the port names.
pub fn project_block(block: &Block, bound: usize) -> Result<GateType, GadgetError> {
    Ok(project_enumeration(block, &enumerate_block(block, bound)?))
}

fn project_enumeration(block: &Block, e: &Enumeration) -> GateType {
    let profiles: Vec<Mask> = e.configurations.iter().map(|c| block.profile(c)).collect();
    quotient_gate("induced", block.port_labels(), &profiles, &e.edges)
}

pub fn verify_block(block: &Block, bound: usize) -> Result<BlockReport, GadgetError> {
    let e = enumerate_block(block, bound)?;
    let induced = project_enumeration(block, &e);
    let equivalent = block
        .intended
        .as_ref()
        .map(|g| gate_equivalence(&induced, g));
    let mut counterexample = None;
    'outer: for config in &e.configurations {
        let board = block.board_at(config);
        for &(r, c) in &block.black {
            if board.cell(r, c) == Cell::Empty {
                counterexample = Some((board, (r, c)));
                break 'outer;
            }
        }
    }
    Ok(BlockReport {
        states: e.configurations.len(),
        induced,
        equivalent,
        black_ok: counterexample.is_none(),
        counterexample,
    })
}

/// True when every legal move from every listed configuration that keeps
/// port cars on their two positions lands in the list.
pub fn enumeration_closed(block: &Block, e: &Enumeration) -> bool {
    let set: std::collections::HashSet<&Configuration> = e.configurations.iter().collect();
    let ports = block.port_index();
    e.configurations.iter().all(|c| {
        let board = block.board_at(c);
        board.legal_moves().into_iter().all(|m| {
            let next = board.apply_move(m).expect("legal").positions();
            let port_ok = ports.get(&m.car.0).is_none_or(|&i| {
                let p = &block.ports[i];
                let pos = next[m.car.0] as usize;
                pos == p.in_position || pos == p.out_position
            });
            !port_ok || set.contains(&next)
        })
    })
}
