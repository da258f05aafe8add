//! Exhaustive search over Unit Rush Hour with a single empty cell.
//!
//! Every cell but one holds a unit car that is either horizontal or vertical,
//! so a state is an empty-cell index plus one orientation bit per occupied
//! cell. For an exit on row `e` the states split into:
//!
//! * filtered: no horizontal car on row `e` (no target, unsolvable);
//! * solved: the leftmost horizontal car of row `e` sits in column 0;
//! * justsolved: solved, with the empty cell at `(e, 1)`;
//! * unsolved: everything else.
//!
//! Dropping the filtered and the solved-but-not-justsolved states splits the
//! state graph into components; each solvable component holds at least one
//! justsolved state and its worst distance-to-solve is found by a
//! multi-source BFS from those. The only whole-space storage is one bit per
//! justsolved state, `2^(wh-2)` bits in total.

use std::fmt;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;

use rustc_hash::FxHashMap;
use serde::Serialize;
use thiserror::Error;

use crate::board::{Board, BoardError, Cell, Orientation};

/// Largest grid the bit-array search accepts.
pub const MAX_SEARCH_CELLS: usize = 36;
/// Largest grid a [`UnitState`] can describe.
pub const MAX_STATE_CELLS: usize = 58;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UnitError {
    #[error("board contains a car of length {0}; unit boards only hold 1-cell cars")]
    NonUnitCar(usize),
    #[error("board contains walls")]
    Walls,
    #[error("board has {0} empty cells, expected exactly one")]
    EmptyCount(usize),
    #[error("{width}x{height} grid is out of range")]
    BadDims { width: usize, height: usize },
    #[error("state count for {width}x{height} overflows 64 bits")]
    Overflow { width: usize, height: usize },
    #[error("states have different dimensions")]
    DimMismatch,
    #[error("cell index {0} out of range")]
    BadIndex(usize),
    #[error("state is not justsolved for exit row {0}")]
    NotJustSolved(usize),
    #[error("exit row {row} outside a grid of height {height}")]
    BadExitRow { row: usize, height: usize },
    #[error("justsolved bit array needs {required} bytes, budget is {budget} bytes")]
    BudgetExceeded { required: u64, budget: u64 },
    #[error(transparent)]
    Board(#[from] BoardError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Dims {
    pub width: usize,
    pub height: usize,
}

impl Dims {
    pub fn new(width: usize, height: usize) -> Result<Dims, UnitError> {
        if width == 0 || height == 0 || width * height > MAX_STATE_CELLS {
            return Err(UnitError::BadDims { width, height });
        }
        Ok(Dims { width, height })
    }

    pub fn cells(self) -> usize {
        self.width * self.height
    }

    pub fn row_col(self, cell: usize) -> (usize, usize) {
        (cell / self.width, cell % self.width)
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

/// A single-empty-cell unit state.
///
/// Internally the orientation bits are kept at their grid positions
/// (`vertical` bit `i` set iff cell `i` holds a vertical car; the empty cell's
/// bit is clear). [`UnitState::orientation_bits`] gives the packed form with
/// the empty cell skipped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct UnitState {
    dims: Dims,
    empty: u8,
    vertical: u64,
}

fn low_mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Removes bit `at` and shifts the higher bits down.
fn squeeze(mask: u64, at: usize) -> u64 {
    (mask & low_mask(at)) | ((mask >> (at + 1)) << at)
}

/// Inverse of [`squeeze`], inserting a zero bit at `at`.
fn spread(bits: u64, at: usize) -> u64 {
    (bits & low_mask(at)) | ((bits >> at) << (at + 1))
}

impl UnitState {
    /// Builds a state from the packed orientation bits (row-major, empty cell
    /// skipped).
    pub fn new(
        dims: Dims,
        empty_index: usize,
        orientation_bits: u64,
    ) -> Result<UnitState, UnitError> {
        let n = dims.cells();
        if empty_index >= n {
            return Err(UnitError::BadIndex(empty_index));
        }
        let orientation_bits = orientation_bits & low_mask(n - 1);
        Ok(UnitState {
            dims,
            empty: empty_index as u8,
            vertical: spread(orientation_bits, empty_index),
        })
    }

    fn from_raw(dims: Dims, empty: usize, vertical: u64) -> UnitState {
        UnitState {
            dims,
            empty: empty as u8,
            vertical,
        }
    }

    /// Packed code `empty_index * 2^(wh-1) + orientation_bits`. Ordering by
    /// code is the tie-break order for witnesses.
    pub fn code(&self) -> u64 {
        ((self.empty as u64) << (self.dims.cells() - 1)) | self.orientation_bits()
    }

    pub fn from_code(dims: Dims, code: u64) -> Result<UnitState, UnitError> {
        let n = dims.cells();
        Self::new(dims, (code >> (n - 1)) as usize, code & low_mask(n - 1))
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn empty_index(&self) -> usize {
        self.empty as usize
    }

    pub fn orientation_bits(&self) -> u64 {
        squeeze(self.vertical, self.empty as usize)
    }

    /// Grid-indexed vertical mask.
    pub fn vertical_mask(&self) -> u64 {
        self.vertical
    }

    /// `None` for the empty cell.
    pub fn orientation_at(&self, cell: usize) -> Option<Orientation> {
        if cell == self.empty as usize {
            None
        } else if self.vertical >> cell & 1 == 1 {
            Some(Orientation::Vertical)
        } else {
            Some(Orientation::Horizontal)
        }
    }

    pub fn encode(board: &Board) -> Result<UnitState, UnitError> {
        if board.has_walls() {
            return Err(UnitError::Walls);
        }
        if let Some(car) = board.cars().iter().find(|c| c.length != 1) {
            return Err(UnitError::NonUnitCar(car.length));
        }
        let empties = board.empty_count();
        if empties != 1 {
            return Err(UnitError::EmptyCount(empties));
        }
        let dims = Dims::new(board.width(), board.height())?;
        let mut empty = 0;
        let mut vertical = 0u64;
        for r in 0..board.height() {
            for c in 0..board.width() {
                let i = r * board.width() + c;
                match board.cell(r, c) {
                    Cell::Empty => empty = i,
                    Cell::Car(id) => {
                        if board.cars()[id.0].orientation == Orientation::Vertical {
                            vertical |= 1 << i;
                        }
                    }
                    Cell::Wall => unreachable!(),
                }
            }
        }
        Ok(UnitState::from_raw(dims, empty, vertical))
    }

    /// Text rendering; with an exit row, the leftmost horizontal car of that
    /// row is drawn as the target `=`.
    pub fn render(&self, exit_row: Option<usize>) -> String {
        let Dims { width, height } = self.dims;
        let target = exit_row.and_then(|e| self.target_cell(e));
        let mut out = String::with_capacity((width + 1) * height);
        for r in 0..height {
            if r > 0 {
                out.push('\n');
            }
            for c in 0..width {
                let i = r * width + c;
                out.push(match self.orientation_at(i) {
                    None => '.',
                    Some(_) if Some(i) == target => '=',
                    Some(Orientation::Horizontal) => '-',
                    Some(Orientation::Vertical) => '|',
                });
            }
        }
        out
    }

    /// Board with the leftmost horizontal car of `exit_row` as target. If the
    /// row has no horizontal car the board has no target.
    pub fn decode(&self, exit_row: usize) -> Result<Board, UnitError> {
        if exit_row >= self.dims.height {
            return Err(UnitError::BadExitRow {
                row: exit_row,
                height: self.dims.height,
            });
        }
        let mut text = self.render(Some(exit_row));
        if self.target_cell(exit_row).is_none() && exit_row != 0 {
            text.push_str(&format!("\n% exit: row {exit_row}"));
        }
        Ok(Board::parse_layout(&text)?.0)
    }

    fn target_cell(&self, exit_row: usize) -> Option<usize> {
        let w = self.dims.width;
        let row = low_mask(w) << (exit_row * w);
        let horizontal = !self.vertical & row & !(1u64 << self.empty);
        (horizontal != 0).then(|| horizontal.trailing_zeros() as usize)
    }

    /// States reachable by one move, in the order empty-cell moves left,
    /// right, up, down.
    pub fn neighbors(&self) -> Vec<UnitState> {
        let geo = Geometry::new(self.dims);
        let mut out = Vec::with_capacity(4);
        geo.for_each_neighbor(self.empty as usize, self.vertical, |e, v| {
            out.push(UnitState::from_raw(self.dims, e, v))
        });
        out
    }

    pub fn classify(&self, exit_row: usize) -> Class {
        Geometry::new(self.dims).classify(self.empty as usize, self.vertical, exit_row)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Class {
    /// No horizontal car on the exit row.
    Filtered,
    Unsolved,
    Solved,
    JustSolved,
}

pub fn encode(board: &Board) -> Result<UnitState, UnitError> {
    UnitState::encode(board)
}

pub fn decode(state: &UnitState, exit_row: usize) -> Result<Board, UnitError> {
    state.decode(exit_row)
}

pub fn classify(state: &UnitState, exit_row: usize) -> Class {
    state.classify(exit_row)
}

/// Number of single-empty states, `wh * 2^(wh-1)`.
pub fn state_count(width: usize, height: usize) -> Result<u64, UnitError> {
    let n = width
        .checked_mul(height)
        .filter(|&n| n > 0)
        .ok_or(UnitError::BadDims { width, height })?;
    1u64.checked_shl((n - 1) as u32)
        .filter(|_| n - 1 < 64)
        .and_then(|p| p.checked_mul(n as u64))
        .ok_or(UnitError::Overflow { width, height })
}

/// Index of a justsolved state in the visited bit array: the orientation bits
/// of every cell except `(e,0)` and `(e,1)`, packed in row-major order.
pub fn justsolved_bit_index(state: &UnitState, exit_row: usize) -> Result<u64, UnitError> {
    if state.classify(exit_row) != Class::JustSolved {
        return Err(UnitError::NotJustSolved(exit_row));
    }
    Ok(Geometry::new(state.dims).just_index(state.vertical, exit_row))
}

/// Inverse of [`justsolved_bit_index`].
pub fn justsolved_from_index(
    dims: Dims,
    exit_row: usize,
    index: u64,
) -> Result<UnitState, UnitError> {
    if exit_row >= dims.height {
        return Err(UnitError::BadExitRow {
            row: exit_row,
            height: dims.height,
        });
    }
    if dims.width < 2 || index >> (dims.cells() - 2) != 0 {
        return Err(UnitError::BadIndex(index as usize));
    }
    let p = exit_row * dims.width;
    Ok(UnitState::from_raw(
        dims,
        p + 1,
        spread(spread(index, p), p + 1),
    ))
}

/// Cells whose content (orientation or emptiness) differs.
pub fn state_diff(a: &UnitState, b: &UnitState) -> Result<Vec<usize>, UnitError> {
    if a.dims != b.dims {
        return Err(UnitError::DimMismatch);
    }
    Ok((0..a.dims.cells())
        .filter(|&i| a.orientation_at(i) != b.orientation_at(i))
        .collect())
}

/// Precomputed per-grid tables for the hot loop.
#[derive(Clone)]
struct Geometry {
    dims: Dims,
    col: Vec<u8>,
    row: Vec<u8>,
}

impl Geometry {
    fn new(dims: Dims) -> Geometry {
        let n = dims.cells();
        Geometry {
            dims,
            col: (0..n).map(|i| (i % dims.width) as u8).collect(),
            row: (0..n).map(|i| (i / dims.width) as u8).collect(),
        }
    }

    #[inline]
    fn for_each_neighbor(&self, empty: usize, vertical: u64, mut f: impl FnMut(usize, u64)) {
        let w = self.dims.width;
        let c = self.col[empty] as usize;
        let r = self.row[empty] as usize;
        if c > 0 && vertical >> (empty - 1) & 1 == 0 {
            f(empty - 1, vertical);
        }
        if c + 1 < w && vertical >> (empty + 1) & 1 == 0 {
            f(empty + 1, vertical);
        }
        if r > 0 && vertical >> (empty - w) & 1 == 1 {
            f(empty - w, vertical ^ (1 << (empty - w)) ^ (1 << empty));
        }
        if r + 1 < self.dims.height && vertical >> (empty + w) & 1 == 1 {
            f(empty + w, vertical ^ (1 << (empty + w)) ^ (1 << empty));
        }
    }

    #[inline]
    fn classify(&self, empty: usize, vertical: u64, exit_row: usize) -> Class {
        let w = self.dims.width;
        let base = exit_row * w;
        let horizontal = !vertical & (low_mask(w) << base) & !(1u64 << empty);
        if horizontal == 0 {
            Class::Filtered
        } else if horizontal.trailing_zeros() as usize != base {
            Class::Unsolved
        } else if empty == base + 1 {
            Class::JustSolved
        } else {
            Class::Solved
        }
    }

    #[inline]
    fn just_index(&self, vertical: u64, exit_row: usize) -> u64 {
        let p = exit_row * self.dims.width;
        squeeze(squeeze(vertical, p + 1), p)
    }

    #[inline]
    fn key(empty: usize, vertical: u64) -> u64 {
        vertical | (empty as u64) << 58
    }

    #[inline]
    fn unkey(key: u64) -> (usize, u64) {
        ((key >> 58) as usize, key & low_mask(58))
    }
}

/// Fixed-size bit set with atomic test-and-set.
pub struct AtomicBitArray {
    words: Vec<AtomicU64>,
    len: u64,
}

impl AtomicBitArray {
    pub fn new(len: u64) -> AtomicBitArray {
        let words = len.div_ceil(64) as usize;
        AtomicBitArray {
            words: (0..words).map(|_| AtomicU64::new(0)).collect(),
            len,
        }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Sets bit `i`, returning its previous value.
    #[inline]
    pub fn test_and_set(&self, i: u64) -> bool {
        let bit = 1u64 << (i % 64);
        self.words[(i / 64) as usize].fetch_or(bit, Ordering::Relaxed) & bit != 0
    }

    #[inline]
    pub fn get(&self, i: u64) -> bool {
        self.words[(i / 64) as usize].load(Ordering::Relaxed) >> (i % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> u64 {
        self.words
            .iter()
            .map(|w| w.load(Ordering::Relaxed).count_ones() as u64)
            .sum()
    }
}

/// Bytes needed for the justsolved bit array of a `w x h` grid.
pub fn bit_array_bytes(dims: Dims) -> u64 {
    (1u64 << (dims.cells().saturating_sub(2))).div_ceil(8)
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchConfig {
    pub dims: Dims,
    pub exit_row: usize,
    pub budget_bytes: u64,
    /// Components larger than this are explored only partially and flagged.
    pub component_cap: usize,
    pub workers: usize,
}

pub const DEFAULT_BUDGET_BYTES: u64 = 3 << 30;

impl SearchConfig {
    pub fn new(dims: Dims, exit_row: usize) -> SearchConfig {
        SearchConfig {
            dims,
            exit_row,
            budget_bytes: DEFAULT_BUDGET_BYTES,
            component_cap: usize::MAX,
            workers: 1,
        }
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn budget(mut self, bytes: u64) -> Self {
        self.budget_bytes = bytes;
        self
    }

    pub fn component_cap(mut self, cap: usize) -> Self {
        self.component_cap = cap;
        self
    }

    fn check(&self) -> Result<(), UnitError> {
        let Dims { width, height } = self.dims;
        if width < 2 || self.dims.cells() > MAX_SEARCH_CELLS {
            return Err(UnitError::BadDims { width, height });
        }
        if self.exit_row >= height {
            return Err(UnitError::BadExitRow {
                row: self.exit_row,
                height,
            });
        }
        let required = bit_array_bytes(self.dims);
        if required > self.budget_bytes {
            return Err(UnitError::BudgetExceeded {
                required,
                budget: self.budget_bytes,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentReport {
    pub exit_row: usize,
    /// The justsolved member with the smallest bit index.
    #[serde(serialize_with = "ser_code")]
    pub seed: UnitState,
    pub size: u64,
    pub justsolved: u64,
    pub max_distance: u32,
    /// Smallest-code state at `max_distance`.
    #[serde(serialize_with = "ser_code")]
    pub witness: UnitState,
    /// Set when the component exceeded the size cap; distances are then only
    /// those of the explored part.
    pub truncated: bool,
}

fn ser_code<S: serde::Serializer>(s: &UnitState, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_u64(s.code())
}

/// Distance-to-solve for every state of one component.
#[derive(Clone, Debug)]
pub struct DistanceField {
    pub states: Vec<UnitState>,
    pub distances: Vec<u32>,
}

#[derive(Default)]
struct Scratch {
    index: FxHashMap<u64, u32>,
    states: Vec<u64>,
    dist: Vec<u32>,
    queue: Vec<u32>,
}

impl Scratch {
    fn reset(&mut self) {
        self.index.clear();
        self.states.clear();
        self.dist.clear();
        self.queue.clear();
    }
}

struct Searcher<'a> {
    geo: Geometry,
    exit_row: usize,
    cap: usize,
    bits: &'a AtomicBitArray,
}

impl Searcher<'_> {
    #[inline]
    fn kept(&self, empty: usize, vertical: u64) -> Option<Class> {
        match self.geo.classify(empty, vertical, self.exit_row) {
            c @ (Class::Unsolved | Class::JustSolved) => Some(c),
            _ => None,
        }
    }

    /// Discovers the component of `seed`, marking its justsolved bits, and
    /// computes multi-source distances. Returns `None` if another search owns
    /// the component (it set the bit of the smallest justsolved index first).
    fn explore(&self, seed: u64, s: &mut Scratch) -> Option<ComponentReport> {
        s.reset();
        s.index.insert(seed, 0);
        s.states.push(seed);
        let mut owner: Option<(u64, bool)> = None;
        let mut truncated = false;
        let mut i = 0;
        while i < s.states.len() {
            let (empty, vertical) = Geometry::unkey(s.states[i]);
            if self.kept(empty, vertical) == Some(Class::JustSolved) {
                s.queue.push(i as u32);
                let idx = self.geo.just_index(vertical, self.exit_row);
                let won = !self.bits.test_and_set(idx);
                if owner.is_none_or(|(m, _)| idx < m) {
                    owner = Some((idx, won));
                }
            }
            if !truncated {
                let states = &mut s.states;
                let index = &mut s.index;
                let cap = self.cap;
                self.geo.for_each_neighbor(empty, vertical, |e, v| {
                    if truncated || self.kept(e, v).is_none() {
                        return;
                    }
                    let key = Geometry::key(e, v);
                    if let std::collections::hash_map::Entry::Vacant(slot) = index.entry(key) {
                        if states.len() >= cap {
                            truncated = true;
                            return;
                        }
                        slot.insert(states.len() as u32);
                        states.push(key);
                    }
                });
            }
            i += 1;
        }
        let (min_idx, won) = owner?;
        if !won {
            return None;
        }

        s.dist.resize(s.states.len(), u32::MAX);
        for &q in &s.queue {
            s.dist[q as usize] = 0;
        }
        let mut head = 0;
        let mut max_distance = 0;
        let mut witness = u64::MAX;
        while head < s.queue.len() {
            let q = s.queue[head] as usize;
            head += 1;
            let d = s.dist[q];
            let (empty, vertical) = Geometry::unkey(s.states[q]);
            let code = UnitState::from_raw(self.geo.dims, empty, vertical).code();
            if d > max_distance || (d == max_distance && code < witness) {
                max_distance = d;
                witness = code;
            }
            let (dist, queue, index) = (&mut s.dist, &mut s.queue, &s.index);
            self.geo.for_each_neighbor(empty, vertical, |e, v| {
                if let Some(&j) = index.get(&Geometry::key(e, v)) {
                    if dist[j as usize] == u32::MAX {
                        dist[j as usize] = d + 1;
                        queue.push(j);
                    }
                }
            });
        }
        let dims = self.geo.dims;
        Some(ComponentReport {
            exit_row: self.exit_row,
            seed: justsolved_from_index(dims, self.exit_row, min_idx).expect("index in range"),
            size: s.states.len() as u64,
            justsolved: s.dist.iter().filter(|&&d| d == 0).count() as u64,
            max_distance,
            witness: UnitState::from_code(dims, witness).expect("valid code"),
            truncated,
        })
    }
}

/// Runs the partitioned search, handing each solvable component to `sink`
/// exactly once. Returns the number of justsolved bits set, which equals the
/// number of justsolved states.
pub fn search_components_with<F>(cfg: &SearchConfig, sink: F) -> Result<u64, UnitError>
where
    F: Fn(ComponentReport) + Sync,
{
    cfg.check()?;
    let total = 1u64 << (cfg.dims.cells() - 2);
    let bits = AtomicBitArray::new(total);
    let next = AtomicUsize::new(0);
    const CHUNK: u64 = 1 << 12;
    let worker = || {
        let searcher = Searcher {
            geo: Geometry::new(cfg.dims),
            exit_row: cfg.exit_row,
            cap: cfg.component_cap,
            bits: &bits,
        };
        let mut scratch = Scratch::default();
        loop {
            let start = next.fetch_add(1, Ordering::Relaxed) as u64 * CHUNK;
            if start >= total {
                break;
            }
            for idx in start..(start + CHUNK).min(total) {
                if bits.get(idx) {
                    continue;
                }
                let seed =
                    justsolved_from_index(cfg.dims, cfg.exit_row, idx).expect("index in range");
                let key = Geometry::key(seed.empty as usize, seed.vertical);
                if let Some(report) = searcher.explore(key, &mut scratch) {
                    sink(report);
                }
            }
        }
    };
    if cfg.workers <= 1 {
        worker();
    } else {
        std::thread::scope(|scope| {
            for _ in 0..cfg.workers {
                scope.spawn(worker);
            }
        });
    }
    Ok(bits.count_ones())
}

/// All component reports, sorted by seed bit index.
pub fn search_components(cfg: &SearchConfig) -> Result<Vec<ComponentReport>, UnitError> {
    let out = Mutex::new(Vec::new());
    search_components_with(cfg, |r| out.lock().unwrap().push(r))?;
    let mut reports = out.into_inner().unwrap();
    let geo = Geometry::new(cfg.dims);
    reports.sort_by_key(|r| geo.just_index(r.seed.vertical, cfg.exit_row));
    Ok(reports)
}

/// Distances for the component containing `member` (which must not be
/// filtered or solved-but-not-justsolved).
pub fn component_distance_field(
    member: &UnitState,
    exit_row: usize,
) -> Result<DistanceField, UnitError> {
    let dims = member.dims;
    if exit_row >= dims.height {
        return Err(UnitError::BadExitRow {
            row: exit_row,
            height: dims.height,
        });
    }
    let bits = AtomicBitArray::new(1u64 << dims.cells().saturating_sub(2));
    let searcher = Searcher {
        geo: Geometry::new(dims),
        exit_row,
        cap: usize::MAX,
        bits: &bits,
    };
    if searcher
        .kept(member.empty as usize, member.vertical)
        .is_none()
    {
        return Ok(DistanceField {
            states: Vec::new(),
            distances: Vec::new(),
        });
    }
    let mut scratch = Scratch::default();
    let _ = searcher.explore(
        Geometry::key(member.empty as usize, member.vertical),
        &mut scratch,
    );
    if scratch.dist.len() != scratch.states.len() {
        // Component without a justsolved state.
        scratch.dist = vec![u32::MAX; scratch.states.len()];
    }
    let states = scratch
        .states
        .iter()
        .map(|&k| {
            let (e, v) = Geometry::unkey(k);
            UnitState::from_raw(dims, e, v)
        })
        .collect();
    Ok(DistanceField {
        states,
        distances: scratch.dist,
    })
}

/// Shortest path from `start` to a solved state, as the list of visited
/// states (both ends included). `None` if unsolvable or filtered.
pub fn solution_path(start: &UnitState, exit_row: usize) -> Option<Vec<UnitState>> {
    let geo = Geometry::new(start.dims);
    let class = geo.classify(start.empty as usize, start.vertical, exit_row);
    match class {
        Class::Filtered => return None,
        Class::Solved | Class::JustSolved => return Some(vec![*start]),
        Class::Unsolved => {}
    }
    let mut parent: FxHashMap<u64, u64> = FxHashMap::default();
    let start_key = Geometry::key(start.empty as usize, start.vertical);
    parent.insert(start_key, start_key);
    let mut frontier = vec![start_key];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &k in &frontier {
            let (e, v) = Geometry::unkey(k);
            let mut found = None;
            geo.for_each_neighbor(e, v, |ne, nv| {
                if found.is_some() {
                    return;
                }
                let nk = Geometry::key(ne, nv);
                if parent.contains_key(&nk) {
                    return;
                }
                match geo.classify(ne, nv, exit_row) {
                    Class::Filtered => {}
                    Class::Solved | Class::JustSolved => {
                        parent.insert(nk, k);
                        found = Some(nk);
                    }
                    Class::Unsolved => {
                        parent.insert(nk, k);
                        next.push(nk);
                    }
                }
            });
            if let Some(mut k) = found {
                let mut path = Vec::new();
                loop {
                    let (e, v) = Geometry::unkey(k);
                    path.push(UnitState::from_raw(start.dims, e, v));
                    if k == start_key {
                        break;
                    }
                    k = parent[&k];
                }
                path.reverse();
                return Some(path);
            }
        }
        frontier = next;
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExitSummary {
    pub exit_row: usize,
    pub worst: u32,
    #[serde(serialize_with = "ser_opt_code")]
    pub witness: Option<UnitState>,
    pub components: u64,
    pub states: u64,
    pub justsolved_marked: u64,
    pub truncated_components: u64,
}

fn ser_opt_code<S: serde::Serializer>(s: &Option<UnitState>, ser: S) -> Result<S::Ok, S::Error> {
    match s {
        Some(s) => ser.serialize_some(&s.code()),
        None => ser.serialize_none(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableReport {
    pub dims: Dims,
    pub worst: u32,
    pub exit_row: usize,
    #[serde(serialize_with = "ser_opt_code")]
    pub witness: Option<UnitState>,
    pub per_exit: Vec<ExitSummary>,
}

impl TableReport {
    /// Shortest solution of the overall witness, as a state sequence.
    pub fn witness_path(&self) -> Option<Vec<UnitState>> {
        self.witness
            .as_ref()
            .and_then(|w| solution_path(w, self.exit_row))
    }
}

/// Worst distance and witness over every component for one exit row.
pub fn worst_for_exit(cfg: &SearchConfig) -> Result<ExitSummary, UnitError> {
    #[derive(Default)]
    struct Acc {
        worst: Option<(u32, u64)>,
        components: u64,
        states: u64,
        truncated: u64,
    }
    let acc = Mutex::new(Acc::default());
    let marked = search_components_with(cfg, |r| {
        let mut a = acc.lock().unwrap();
        a.components += 1;
        a.states += r.size;
        a.truncated += r.truncated as u64;
        let cand = (r.max_distance, r.witness.code());
        if a.worst
            .is_none_or(|(d, c)| cand.0 > d || (cand.0 == d && cand.1 < c))
        {
            a.worst = Some(cand);
        }
    })?;
    let a = acc.into_inner().unwrap();
    Ok(ExitSummary {
        exit_row: cfg.exit_row,
        worst: a.worst.map_or(0, |w| w.0),
        witness: a
            .worst
            .map(|(_, c)| UnitState::from_code(cfg.dims, c).expect("valid code")),
        components: a.components,
        states: a.states,
        justsolved_marked: marked,
        truncated_components: a.truncated,
    })
}

/// Worst-case distance-to-solve over all exit rows and states of a grid.
pub fn worst_case(width: usize, height: usize) -> Result<TableReport, UnitError> {
    worst_case_with(&SearchConfig::new(Dims::new(width, height)?, 0))
}

/// Like [`worst_case`], taking budget, cap and workers from `base` (its
/// `exit_row` is ignored).
pub fn worst_case_with(base: &SearchConfig) -> Result<TableReport, UnitError> {
    let mut per_exit = Vec::with_capacity(base.dims.height);
    for e in 0..base.dims.height {
        let cfg = SearchConfig {
            exit_row: e,
            ..base.clone()
        };
        per_exit.push(worst_for_exit(&cfg)?);
    }
    let best = per_exit
        .iter()
        .filter_map(|s| s.witness.map(|w| (s.worst, w.code(), s.exit_row, w)))
        .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)).then(b.2.cmp(&a.2)));
    Ok(TableReport {
        dims: base.dims,
        worst: best.map_or(0, |b| b.0),
        exit_row: best.map_or(0, |b| b.2),
        witness: best.map(|b| b.3),
        per_exit,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SegmentKind {
    SimplePath,
    PathCircuitReverse,
    /// A stretch the greedy rule could not classify.
    Raw,
}

/// One piece of an empty-cell trajectory. Consecutive segments share their
/// boundary position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrajectorySegment {
    pub kind: SegmentKind,
    /// Index range into the trajectory, inclusive on both ends.
    pub start: usize,
    pub end: usize,
    /// Empty-cell positions from `start` to `end`.
    pub cells: Vec<usize>,
    /// Length of the lead-in path (and of its reversal) for circuits.
    pub lead_in: usize,
    /// Cells of the circuit, starting and ending at the same cell (last
    /// repeat omitted).
    pub circuit: Vec<usize>,
    /// Circuit cells where the trajectory turns.
    pub corners: Vec<usize>,
}

/// Empty-cell positions along a sequence of states.
pub fn empty_trajectory(states: &[UnitState]) -> Vec<usize> {
    states.iter().map(|s| s.empty_index()).collect()
}

/// Greedy decomposition of an empty-cell trajectory into simple paths and
/// path-circuit-reverse segments.
pub fn analyze_trajectory(dims: Dims, positions: &[usize]) -> Vec<TrajectorySegment> {
    let n = positions.len().saturating_sub(1);
    let mut segments = Vec::new();
    let simple = |a: usize, b: usize| TrajectorySegment {
        kind: SegmentKind::SimplePath,
        start: a,
        end: b,
        cells: positions[a..=b].to_vec(),
        lead_in: 0,
        circuit: Vec::new(),
        corners: Vec::new(),
    };
    if positions.is_empty() {
        return segments;
    }
    let mut i = 0;
    while i < n {
        let mut seen: FxHashMap<usize, usize> = FxHashMap::default();
        seen.insert(positions[i], i);
        let mut j = i;
        loop {
            if j == n {
                segments.push(simple(i, n));
                i = n;
                break;
            }
            let next = positions[j + 1];
            let Some(&k) = seen.get(&next) else {
                seen.insert(next, j + 1);
                j += 1;
                continue;
            };
            let closing = j + 1;
            if closing - k < 4 {
                if k > i {
                    segments.push(simple(i, k));
                }
                segments.push(TrajectorySegment {
                    kind: SegmentKind::Raw,
                    ..simple(k, closing)
                });
                i = closing;
                break;
            }
            let mut back = 0;
            while back < k - i
                && closing + back < n
                && positions[closing + back + 1] == positions[k - back - 1]
            {
                back += 1;
            }
            let lead_start = k - back;
            if lead_start > i {
                segments.push(simple(i, lead_start));
            }
            let circuit = positions[k..closing].to_vec();
            let corners = circuit_corners(dims, &circuit);
            segments.push(TrajectorySegment {
                kind: SegmentKind::PathCircuitReverse,
                start: lead_start,
                end: closing + back,
                cells: positions[lead_start..=closing + back].to_vec(),
                lead_in: back,
                circuit,
                corners,
            });
            i = closing + back;
            break;
        }
    }
    segments
}

/// Decomposes the trajectory of a state sequence.
pub fn analyze_solution(states: &[UnitState]) -> Vec<TrajectorySegment> {
    match states.first() {
        Some(s) => analyze_trajectory(s.dims, &empty_trajectory(states)),
        None => Vec::new(),
    }
}

fn circuit_corners(dims: Dims, circuit: &[usize]) -> Vec<usize> {
    let len = circuit.len();
    let step = |a: usize, b: usize| {
        let (ra, ca) = dims.row_col(a);
        let (rb, cb) = dims.row_col(b);
        (rb as isize - ra as isize, cb as isize - ca as isize)
    };
    let mut out: Vec<usize> = (0..len)
        .filter(|&t| {
            let prev = circuit[(t + len - 1) % len];
            let next = circuit[(t + 1) % len];
            step(prev, circuit[t]) != step(circuit[t], next)
        })
        .map(|t| circuit[t])
        .collect();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims(w: usize, h: usize) -> Dims {
        Dims::new(w, h).unwrap()
    }

    #[test]
    fn encodes_unit_example() {
        let b = Board::parse("||=\n|-|\n-.|").unwrap();
        let s = UnitState::encode(&b).unwrap();
        assert_eq!(s.empty_index(), 7);
        // Cells 0..8 without 7: | | = | - | - |  -> vertical at 0,1,3,5,8.
        // Packed (skip 7): positions 0,1,3,5,7.
        assert_eq!(s.orientation_bits(), 0b1010_1011);
        assert_eq!(s.decode(0).unwrap(), b);
    }

    #[test]
    fn all_horizontal_is_zero() {
        let s = UnitState::new(dims(3, 2), 0, 0).unwrap();
        assert_eq!(s.orientation_bits(), 0);
        assert_eq!(s.render(None), ".--\n---");
    }

    #[test]
    fn encode_rejects_non_unit_boards() {
        assert_eq!(
            UnitState::encode(&Board::parse("AA.=").unwrap()),
            Err(UnitError::NonUnitCar(2))
        );
        assert_eq!(
            UnitState::encode(&Board::parse("#.=").unwrap()),
            Err(UnitError::Walls)
        );
        assert_eq!(
            UnitState::encode(&Board::parse("..=").unwrap()),
            Err(UnitError::EmptyCount(2))
        );
    }

    #[test]
    fn state_counts() {
        assert_eq!(state_count(3, 3).unwrap(), 2304);
        assert_eq!(state_count(1, 1).unwrap(), 1);
        assert_eq!(state_count(6, 6).unwrap(), 36 << 35);
        assert!(matches!(state_count(8, 9), Err(UnitError::Overflow { .. })));
        assert_eq!(bit_array_bytes(dims(6, 6)), 2 << 30);
    }

    #[test]
    fn classification() {
        let solved = UnitState::encode(&Board::parse("=.|\n|-|\n||-").unwrap()).unwrap();
        assert_eq!(solved.classify(0), Class::JustSolved);
        let start = UnitState::encode(&Board::parse("||=\n|-|\n-.|").unwrap()).unwrap();
        assert_eq!(start.classify(0), Class::Unsolved);
        let (b, _) = Board::parse_layout("|||\n-.-\n---").unwrap();
        assert_eq!(UnitState::encode(&b).unwrap().classify(0), Class::Filtered);
        let (b, _) = Board::parse_layout("-|.\n---\n---").unwrap();
        assert_eq!(UnitState::encode(&b).unwrap().classify(0), Class::Solved);
    }

    #[test]
    fn justsolved_index_is_bijective_3x3() {
        let d = dims(3, 3);
        for e in 0..3 {
            let mut seen = std::collections::HashSet::new();
            for idx in 0..128u64 {
                let s = justsolved_from_index(d, e, idx).unwrap();
                assert_eq!(s.classify(e), Class::JustSolved);
                assert_eq!(justsolved_bit_index(&s, e).unwrap(), idx);
                assert!(seen.insert(s));
            }
        }
        let zero = justsolved_from_index(d, 1, 0).unwrap();
        assert_eq!(zero.vertical_mask(), 0);
        let unsolved = UnitState::new(d, 0, 0).unwrap();
        assert_eq!(
            justsolved_bit_index(&unsolved, 0),
            Err(UnitError::NotJustSolved(0))
        );
    }

    #[test]
    fn small_table_cells() {
        assert_eq!(worst_case(2, 2).unwrap().worst, 3);
        assert_eq!(worst_case(3, 3).unwrap().worst, 12);
        assert_eq!(worst_case(2, 5).unwrap().worst, 9);
    }

    #[test]
    fn budget_refusal() {
        let cfg = SearchConfig::new(dims(4, 4), 0).budget(100);
        assert_eq!(
            search_components(&cfg),
            Err(UnitError::BudgetExceeded {
                required: 2048,
                budget: 100
            })
        );
    }

    #[test]
    fn every_justsolved_bit_gets_marked() {
        let cfg = SearchConfig::new(dims(3, 3), 1);
        let marked = search_components_with(&cfg, |_| {}).unwrap();
        assert_eq!(marked, 128);
    }

    #[test]
    fn capped_components_are_flagged() {
        let cfg = SearchConfig::new(dims(3, 3), 0).component_cap(5);
        let reports = search_components(&cfg).unwrap();
        assert!(reports.iter().any(|r| r.truncated));
        assert!(reports.iter().all(|r| r.size <= 5));
    }

    #[test]
    fn example_component_reaches_twelve() {
        let seed = UnitState::encode(&Board::parse("=.|\n|-|\n||-").unwrap()).unwrap();
        let field = component_distance_field(&seed, 0).unwrap();
        assert_eq!(field.distances.iter().max(), Some(&12));
        let start = UnitState::encode(&Board::parse("||=\n|-|\n-.|").unwrap()).unwrap();
        let i = field.states.iter().position(|s| *s == start).unwrap();
        assert_eq!(field.distances[i], 12);
        let path = solution_path(&start, 0).unwrap();
        assert_eq!(path.len(), 13);
    }

    #[test]
    fn straight_line_is_one_simple_path() {
        let segs = analyze_trajectory(dims(4, 1), &[0, 1, 2, 3]);
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].kind, SegmentKind::SimplePath);
        assert_eq!((segs[0].start, segs[0].end), (0, 3));
    }

    #[test]
    fn square_circuit_has_four_corners() {
        let d = dims(2, 2);
        let segs = analyze_trajectory(d, &[0, 1, 3, 2, 0]);
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].kind, SegmentKind::PathCircuitReverse);
        assert_eq!(segs[0].lead_in, 0);
        assert_eq!(segs[0].corners, vec![0, 1, 2, 3]);
    }

    #[test]
    fn lead_in_circuit_and_reverse() {
        // 3x3: path 6 -> 3, loop 3 -> 4 -> 1 -> 0 -> 3, back to 6.
        let segs = analyze_trajectory(dims(3, 3), &[6, 3, 4, 1, 0, 3, 6]);
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].kind, SegmentKind::PathCircuitReverse);
        assert_eq!(segs[0].lead_in, 1);
        assert_eq!(segs[0].circuit, vec![3, 4, 1, 0]);
    }

    #[test]
    fn back_and_forth_is_raw() {
        let segs = analyze_trajectory(dims(3, 1), &[0, 1, 2, 1]);
        assert_eq!(
            segs.iter().map(|s| s.kind).collect::<Vec<_>>(),
            vec![SegmentKind::SimplePath, SegmentKind::Raw]
        );
    }

    #[test]
    fn diff_counts() {
        let a = UnitState::encode(&Board::parse("||=\n|-|\n-.|").unwrap()).unwrap();
        assert!(state_diff(&a, &a).unwrap().is_empty());
        let b = a.neighbors()[0];
        assert_eq!(state_diff(&a, &b).unwrap().len(), 2);
        let other = UnitState::new(dims(2, 2), 0, 0).unwrap();
        assert_eq!(state_diff(&a, &other), Err(UnitError::DimMismatch));
    }
}
