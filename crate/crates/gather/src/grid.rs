//! Ground-truth world representation, weak-multiplicity snapshots, corner
//! sequences with lexicographic order, the minimum enclosing square and the
//! gathering-accomplished predicate.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GridError {
    #[error("grid sides must be at least 2, got {0}x{1}")]
    SideTooSmall(usize, usize),
    #[error("corners {0:?} and {1:?} are not adjacent")]
    NonAdjacentCorners(Corner, Corner),
    #[error("sequence lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("configuration is empty")]
    EmptyConfiguration,
    #[error("minimum enclosing square requires an even-sided square grid")]
    NotSquareGrid,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("initial world must place at least 3 robots, found {0}")]
    TooFewRobots(usize),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Parity class of the grid sides (number of nodes per side).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    OddOdd,
    EvenOdd,
    EvenEven,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridDims {
    /// Number of rows (nodes per column).
    pub rows: usize,
    /// Number of columns (nodes per row).
    pub cols: usize,
}

impl GridDims {
    pub fn new(rows: usize, cols: usize) -> Result<Self, GridError> {
        if rows < 2 || cols < 2 {
            return Err(GridError::SideTooSmall(rows, cols));
        }
        Ok(GridDims { rows, cols })
    }

    pub fn node_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn parity(&self) -> Parity {
        match (self.rows % 2 == 0, self.cols % 2 == 0) {
            (false, false) => Parity::OddOdd,
            (true, true) => Parity::EvenEven,
            _ => Parity::EvenOdd,
        }
    }

    pub fn contains(&self, p: Pos) -> bool {
        p.row >= 1 && p.row <= self.rows && p.col >= 1 && p.col <= self.cols
    }

    /// The unique central node; only defined on odd x odd grids.
    pub fn center(&self) -> Option<Pos> {
        if self.parity() == Parity::OddOdd {
            Some(Pos::new((self.rows + 1) / 2, (self.cols + 1) / 2))
        } else {
            None
        }
    }

    pub fn corner_pos(&self, c: Corner) -> Pos {
        match c {
            Corner::D => Pos::new(1, 1),
            Corner::C => Pos::new(1, self.cols),
            Corner::A => Pos::new(self.rows, 1),
            Corner::B => Pos::new(self.rows, self.cols),
        }
    }

    pub fn is_corner(&self, p: Pos) -> bool {
        (p.row == 1 || p.row == self.rows) && (p.col == 1 || p.col == self.cols)
    }

    pub fn corners(&self) -> [Pos; 4] {
        [
            self.corner_pos(Corner::D),
            self.corner_pos(Corner::C),
            self.corner_pos(Corner::A),
            self.corner_pos(Corner::B),
        ]
    }

    pub fn is_boundary(&self, p: Pos) -> bool {
        p.row == 1 || p.row == self.rows || p.col == 1 || p.col == self.cols
    }
}

/// 1-based node coordinates; row 1 is the top side in file order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pos {
    pub row: usize,
    pub col: usize,
}

impl Pos {
    pub fn new(row: usize, col: usize) -> Self {
        Pos { row, col }
    }

    pub fn manhattan(&self, other: Pos) -> usize {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col)
    }

    pub fn is_adjacent(&self, other: Pos) -> bool {
        self.manhattan(other) == 1
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

/// Corner labels in the fixed file-order frame: D=(1,1), C=(1,n), A=(m,1),
/// B=(m,n). Frames anchored elsewhere are expressed through [`Frame`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Corner {
    D,
    C,
    A,
    B,
}

impl Corner {
    pub const ALL: [Corner; 4] = [Corner::D, Corner::C, Corner::A, Corner::B];

    pub fn adjacent(self) -> [Corner; 2] {
        match self {
            Corner::D => [Corner::A, Corner::C],
            Corner::C => [Corner::B, Corner::D],
            Corner::A => [Corner::D, Corner::B],
            Corner::B => [Corner::C, Corner::A],
        }
    }

    pub fn opposite(self) -> Corner {
        match self {
            Corner::D => Corner::B,
            Corner::B => Corner::D,
            Corner::A => Corner::C,
            Corner::C => Corner::A,
        }
    }

    pub fn is_adjacent_to(self, other: Corner) -> bool {
        self.adjacent().contains(&other)
    }

    /// All 8 (from, along) adjacent ordered pairs, in a fixed enumeration order.
    pub fn sequence_pairs() -> [(Corner, Corner); 8] {
        [
            (Corner::D, Corner::A),
            (Corner::D, Corner::C),
            (Corner::A, Corner::D),
            (Corner::A, Corner::B),
            (Corner::B, Corner::A),
            (Corner::B, Corner::C),
            (Corner::C, Corner::B),
            (Corner::C, Corner::D),
        ]
    }
}

impl fmt::Display for Corner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

/// What a robot decides at the end of a compute step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Stay,
    MoveTo(Pos),
}

/// Simulator bookkeeping for one robot. The id is its index in the robot
/// list; the policy never sees it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Robot {
    pub pos: Pos,
    pub crashed: bool,
    pub pending: Option<Action>,
}

/// Ground truth: exact per-node counts plus the robot list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorldState {
    pub dims: GridDims,
    counts: Vec<u32>,
    pub robots: Vec<Robot>,
}

impl WorldState {
    pub fn from_positions(dims: GridDims, positions: &[Pos]) -> Self {
        let mut counts = vec![0u32; dims.node_count()];
        let mut robots = Vec::with_capacity(positions.len());
        for &p in positions {
            debug_assert!(dims.contains(p));
            counts[(p.row - 1) * dims.cols + (p.col - 1)] += 1;
            robots.push(Robot {
                pos: p,
                crashed: false,
                pending: None,
            });
        }
        WorldState {
            dims,
            counts,
            robots,
        }
    }

    pub fn count_at(&self, p: Pos) -> u32 {
        self.counts[(p.row - 1) * self.dims.cols + (p.col - 1)]
    }

    pub fn robot_count(&self) -> usize {
        self.robots.len()
    }

    /// Moves robot `idx` to `to`, keeping counts consistent.
    pub fn relocate(&mut self, idx: usize, to: Pos) {
        debug_assert!(self.dims.contains(to));
        let from = self.robots[idx].pos;
        self.counts[(from.row - 1) * self.dims.cols + (from.col - 1)] -= 1;
        self.counts[(to.row - 1) * self.dims.cols + (to.col - 1)] += 1;
        self.robots[idx].pos = to;
    }

    pub fn crashed_robot(&self) -> Option<usize> {
        self.robots.iter().position(|r| r.crashed)
    }
}

/// The m x n matrix over {0,1,2} a robot perceives: weak multiplicity
/// projection of the true counts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Snapshot {
    pub dims: GridDims,
    cells: Vec<u8>,
}

impl Snapshot {
    pub fn empty(dims: GridDims) -> Self {
        Snapshot {
            cells: vec![0; dims.node_count()],
            dims,
        }
    }

    pub fn from_cells(dims: GridDims, cells: Vec<u8>) -> Self {
        assert_eq!(cells.len(), dims.node_count());
        debug_assert!(cells.iter().all(|&v| v <= 2));
        Snapshot { dims, cells }
    }

    pub fn get(&self, p: Pos) -> u8 {
        self.cells[(p.row - 1) * self.dims.cols + (p.col - 1)]
    }

    pub fn set(&mut self, p: Pos, v: u8) {
        debug_assert!(v <= 2);
        self.cells[(p.row - 1) * self.dims.cols + (p.col - 1)] = v;
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn positions(&self) -> impl Iterator<Item = Pos> + '_ {
        let cols = self.dims.cols;
        (0..self.cells.len()).map(move |i| Pos::new(i / cols + 1, i % cols + 1))
    }

    pub fn occupied(&self) -> impl Iterator<Item = (Pos, u8)> + '_ {
        self.positions()
            .map(|p| (p, self.get(p)))
            .filter(|&(_, v)| v > 0)
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|&&v| v > 0).count()
    }

    /// Robot count as perceivable under weak multiplicity detection: a
    /// multiplicity contributes 2. Exact on multiplicity-free configurations.
    pub fn perceived_robots(&self) -> usize {
        self.cells.iter().map(|&v| v as usize).sum()
    }

    pub fn multiplicities(&self) -> Vec<Pos> {
        self.occupied()
            .filter(|&(_, v)| v == 2)
            .map(|(p, _)| p)
            .collect()
    }

    pub fn singletons(&self) -> Vec<Pos> {
        self.occupied()
            .filter(|&(_, v)| v == 1)
            .map(|(p, _)| p)
            .collect()
    }

    /// Extracts the sub-grid `bounds` as a standalone snapshot.
    pub fn restrict(&self, bounds: MesBounds) -> Snapshot {
        let dims = GridDims {
            rows: bounds.row_hi - bounds.row_lo + 1,
            cols: bounds.col_hi - bounds.col_lo + 1,
        };
        let mut cells = Vec::with_capacity(dims.node_count());
        for r in bounds.row_lo..=bounds.row_hi {
            for c in bounds.col_lo..=bounds.col_hi {
                cells.push(self.get(Pos::new(r, c)));
            }
        }
        Snapshot { dims, cells }
    }
}

/// Weak-multiplicity projection of the ground truth; crashed robots are
/// physically present and therefore included.
pub fn project_snapshot(world: &WorldState) -> Snapshot {
    let cells = world.counts.iter().map(|&c| c.min(2) as u8).collect();
    Snapshot {
        dims: world.dims,
        cells,
    }
}

/// A scan frame: one of the 8 ways to read the grid as a matrix with the
/// anchor corner at position (1,1) and the scan side as the first column.
/// Sequence index t and frame coordinates (i, j) relate by t = (j-1)*rows + i.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Frame {
    origin: Pos,
    /// Unit step along the scan side (frame "down", increasing i).
    down: (i32, i32),
    /// Unit step across scan lines (frame "right", increasing j).
    right: (i32, i32),
    /// Frame rows = length of the scan side.
    pub rows: usize,
    /// Frame columns = number of scan lines.
    pub cols: usize,
}

impl Frame {
    pub fn from_corners(dims: GridDims, from: Corner, along: Corner) -> Result<Frame, GridError> {
        if !from.is_adjacent_to(along) {
            return Err(GridError::NonAdjacentCorners(from, along));
        }
        let d = dims.corner_pos(from);
        let a = dims.corner_pos(along);
        let down = (
            (a.row as i32 - d.row as i32).signum(),
            (a.col as i32 - d.col as i32).signum(),
        );
        // Perpendicular direction pointing into the grid from the anchor.
        let right = if down.0 != 0 {
            (0, if d.col == 1 { 1 } else { -1 })
        } else {
            (if d.row == 1 { 1 } else { -1 }, 0)
        };
        let rows = if down.0 != 0 { dims.rows } else { dims.cols };
        let cols = if down.0 != 0 { dims.cols } else { dims.rows };
        Ok(Frame {
            origin: d,
            down,
            right,
            rows,
            cols,
        })
    }

    /// Anchored at an arbitrary corner position of `dims` (must be a corner).
    pub fn anchored_frames(dims: GridDims, corner: Pos) -> [Frame; 2] {
        debug_assert!(dims.is_corner(corner));
        let label = Corner::ALL
            .into_iter()
            .find(|&c| dims.corner_pos(c) == corner)
            .expect("position is a corner");
        let [x, y] = label.adjacent();
        [
            Frame::from_corners(dims, label, x).unwrap(),
            Frame::from_corners(dims, label, y).unwrap(),
        ]
    }

    pub fn all(dims: GridDims) -> Vec<(Corner, Corner, Frame)> {
        Corner::sequence_pairs()
            .into_iter()
            .map(|(f, a)| (f, a, Frame::from_corners(dims, f, a).unwrap()))
            .collect()
    }

    pub fn anchor(&self) -> Pos {
        self.origin
    }

    /// Frame coordinates (i, j), both 1-based.
    pub fn to_frame(&self, p: Pos) -> (usize, usize) {
        let dr = p.row as i32 - self.origin.row as i32;
        let dc = p.col as i32 - self.origin.col as i32;
        let i = dr * self.down.0 + dc * self.down.1;
        let j = dr * self.right.0 + dc * self.right.1;
        debug_assert!(i >= 0 && j >= 0);
        (i as usize + 1, j as usize + 1)
    }

    pub fn to_lab(&self, i: usize, j: usize) -> Pos {
        let (i, j) = (i as i32 - 1, j as i32 - 1);
        Pos::new(
            (self.origin.row as i32 + i * self.down.0 + j * self.right.0) as usize,
            (self.origin.col as i32 + i * self.down.1 + j * self.right.1) as usize,
        )
    }

    /// 1-based scan index of a position.
    pub fn index_of(&self, p: Pos) -> usize {
        let (i, j) = self.to_frame(p);
        (j - 1) * self.rows + i
    }

    pub fn pos_at(&self, t: usize) -> Pos {
        let i = (t - 1) % self.rows + 1;
        let j = (t - 1) / self.rows + 1;
        self.to_lab(i, j)
    }

    /// Lab position of a frame-labelled corner (D = anchor).
    pub fn corner(&self, c: Corner) -> Pos {
        match c {
            Corner::D => self.to_lab(1, 1),
            Corner::A => self.to_lab(self.rows, 1),
            Corner::C => self.to_lab(1, self.cols),
            Corner::B => self.to_lab(self.rows, self.cols),
        }
    }

    /// True when the frame's down axis runs along lab columns.
    pub fn down_axis_vertical(&self) -> bool {
        self.down.0 != 0
    }

    pub fn scan(&self, snap: &Snapshot) -> Vec<u8> {
        (1..=self.rows * self.cols)
            .map(|t| snap.get(self.pos_at(t)))
            .collect()
    }
}

/// A corner sequence: the symbol string read by scanning from `from` along
/// side (from, along), then all parallel lines in the same direction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CornerSequence {
    pub from: Corner,
    pub along: Corner,
    pub symbols: Vec<u8>,
}

impl CornerSequence {
    pub fn as_string(&self) -> String {
        self.symbols.iter().map(|&v| (b'0' + v) as char).collect()
    }
}

pub fn corner_sequence(
    snap: &Snapshot,
    from: Corner,
    along: Corner,
) -> Result<CornerSequence, GridError> {
    let frame = Frame::from_corners(snap.dims, from, along)?;
    Ok(CornerSequence {
        from,
        along,
        symbols: frame.scan(snap),
    })
}

pub fn all_sequences(snap: &Snapshot) -> BTreeMap<(Corner, Corner), CornerSequence> {
    Corner::sequence_pairs()
        .into_iter()
        .map(|(f, a)| ((f, a), corner_sequence(snap, f, a).unwrap()))
        .collect()
}

/// Dictionary order over symbol values 0 < 1 < 2.
pub fn lex_compare(a: &CornerSequence, b: &CornerSequence) -> Result<Ordering, GridError> {
    if a.symbols.len() != b.symbols.len() {
        return Err(GridError::LengthMismatch(a.symbols.len(), b.symbols.len()));
    }
    Ok(a.symbols.cmp(&b.symbols))
}

/// Inclusive sub-grid bounds in lab coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MesBounds {
    pub row_lo: usize,
    pub row_hi: usize,
    pub col_lo: usize,
    pub col_hi: usize,
}

impl MesBounds {
    pub fn full(dims: GridDims) -> Self {
        MesBounds {
            row_lo: 1,
            row_hi: dims.rows,
            col_lo: 1,
            col_hi: dims.cols,
        }
    }

    pub fn side(&self) -> usize {
        self.row_hi - self.row_lo + 1
    }

    pub fn contains(&self, p: Pos) -> bool {
        p.row >= self.row_lo && p.row <= self.row_hi && p.col >= self.col_lo && p.col <= self.col_hi
    }

    /// Maps a position of the restricted sub-snapshot back to lab coordinates.
    pub fn to_lab(&self, p: Pos) -> Pos {
        Pos::new(p.row + self.row_lo - 1, p.col + self.col_lo - 1)
    }

    pub fn to_sub(&self, p: Pos) -> Pos {
        debug_assert!(self.contains(p));
        Pos::new(p.row - self.row_lo + 1, p.col - self.col_lo + 1)
    }
}

/// Minimum enclosing square: the smallest even-sided square sub-grid sharing
/// the grid's geometric center that contains every robot.
pub fn compute_mes(snap: &Snapshot) -> Result<MesBounds, GridError> {
    let n = snap.dims.rows;
    if !snap.dims.is_square() || n % 2 != 0 {
        return Err(GridError::NotSquareGrid);
    }
    let mut row_lo = usize::MAX;
    let mut row_hi = 0;
    let mut col_lo = usize::MAX;
    let mut col_hi = 0;
    for (p, _) in snap.occupied() {
        row_lo = row_lo.min(p.row);
        row_hi = row_hi.max(p.row);
        col_lo = col_lo.min(p.col);
        col_hi = col_hi.max(p.col);
    }
    if row_hi == 0 {
        return Err(GridError::EmptyConfiguration);
    }
    let mut side = 2;
    while side <= n {
        let lo = (n - side) / 2 + 1;
        let hi = lo + side - 1;
        if row_lo >= lo && row_hi <= hi && col_lo >= lo && col_hi <= hi {
            return Ok(MesBounds {
                row_lo: lo,
                row_hi: hi,
                col_lo: lo,
                col_hi: hi,
            });
        }
        side += 2;
    }
    unreachable!("full grid always covers");
}

/// True iff exactly one occupied node, or exactly two occupied nodes with one
/// singleton and one multiplicity.
pub fn gathering_accomplished(snap: &Snapshot) -> bool {
    let occ: Vec<u8> = snap.occupied().map(|(_, v)| v).collect();
    match occ.as_slice() {
        [_] => true,
        [a, b] => a != b,
        _ => false,
    }
}

/// Corners of the snapshot's own grid with a nonzero value.
pub fn occupied_corners(snap: &Snapshot) -> Vec<Corner> {
    Corner::ALL
        .into_iter()
        .filter(|&c| snap.get(snap.dims.corner_pos(c)) > 0)
        .collect()
}

// ---------------------------------------------------------------------------
// World file format: first line "m n", then m lines of n characters each;
// '.' = empty, digits '1'..'9' = that many robots.
// ---------------------------------------------------------------------------

pub fn parse_world(text: &str) -> Result<WorldState, ParseError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(ParseError::Malformed {
        line: 1,
        msg: "missing header".into(),
    })?;
    let mut it = header.split_whitespace();
    let parse_dim = |s: Option<&str>| {
        s.and_then(|v| v.parse::<usize>().ok())
            .ok_or(ParseError::Malformed {
                line: 1,
                msg: "header must be \"m n\"".into(),
            })
    };
    let rows = parse_dim(it.next())?;
    let cols = parse_dim(it.next())?;
    if it.next().is_some() {
        return Err(ParseError::Malformed {
            line: 1,
            msg: "header must be \"m n\"".into(),
        });
    }
    let dims = GridDims::new(rows, cols)?;
    let mut positions = Vec::new();
    for r in 1..=rows {
        let line = lines.next().ok_or(ParseError::Malformed {
            line: r + 1,
            msg: "missing row".into(),
        })?;
        let chars: Vec<char> = line.chars().collect();
        if chars.len() != cols {
            return Err(ParseError::Malformed {
                line: r + 1,
                msg: format!("row has {} cells, expected {}", chars.len(), cols),
            });
        }
        for (c, &ch) in chars.iter().enumerate() {
            match ch {
                '.' => {}
                '1'..='9' => {
                    for _ in 0..(ch as u8 - b'0') {
                        positions.push(Pos::new(r, c + 1));
                    }
                }
                _ => {
                    return Err(ParseError::Malformed {
                        line: r + 1,
                        msg: format!("invalid cell character {:?}", ch),
                    })
                }
            }
        }
    }
    if let Some(extra) = lines.next() {
        if !extra.trim().is_empty() {
            return Err(ParseError::Malformed {
                line: rows + 2,
                msg: "trailing content".into(),
            });
        }
    }
    Ok(WorldState::from_positions(dims, &positions))
}

/// Validates the constraints on simulation inputs: at least 3 robots, all at
/// distinct nodes.
pub fn validate_initial(world: &WorldState) -> Result<(), ParseError> {
    if world.robot_count() < 3 {
        return Err(ParseError::TooFewRobots(world.robot_count()));
    }
    if world.counts.iter().any(|&c| c > 1) {
        return Err(ParseError::Malformed {
            line: 0,
            msg: "initial world must not contain multiplicities".into(),
        });
    }
    Ok(())
}

pub fn emit_world(world: &WorldState) -> String {
    let dims = world.dims;
    let mut out = format!("{} {}\n", dims.rows, dims.cols);
    for r in 1..=dims.rows {
        for c in 1..=dims.cols {
            let v = world.count_at(Pos::new(r, c));
            out.push(match v {
                0 => '.',
                1..=9 => (b'0' + v as u8) as char,
                _ => panic!("cell count {} not representable in world file", v),
            });
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap_with(dims: (usize, usize), cells: &[(usize, usize, u8)]) -> Snapshot {
        let dims = GridDims::new(dims.0, dims.1).unwrap();
        let mut s = Snapshot::empty(dims);
        for &(r, c, v) in cells {
            s.set(Pos::new(r, c), v);
        }
        s
    }

    /// The 6x6 configuration whose D->A scan reads the known string; decoded
    /// by inverting the scan order.
    pub(crate) fn reference_6x6() -> Snapshot {
        let s = "010102000000000100010220100000001011";
        let dims = GridDims::new(6, 6).unwrap();
        let frame = Frame::from_corners(dims, Corner::D, Corner::A).unwrap();
        let mut snap = Snapshot::empty(dims);
        for (idx, ch) in s.bytes().enumerate() {
            snap.set(frame.pos_at(idx + 1), ch - b'0');
        }
        snap
    }

    #[test]
    fn projection_clamps_to_two() {
        let dims = GridDims::new(4, 4).unwrap();
        let world = WorldState::from_positions(
            dims,
            &[Pos::new(2, 2), Pos::new(2, 2), Pos::new(2, 2)],
        );
        let snap = project_snapshot(&world);
        assert_eq!(snap.get(Pos::new(2, 2)), 2);
        assert_eq!(snap.occupied_count(), 1);
    }

    #[test]
    fn projection_identity_below_threshold() {
        let dims = GridDims::new(4, 4).unwrap();
        let world = WorldState::from_positions(dims, &[Pos::new(1, 1), Pos::new(3, 3)]);
        let snap = project_snapshot(&world);
        assert_eq!(snap.get(Pos::new(1, 1)), 1);
        assert_eq!(snap.get(Pos::new(3, 3)), 1);
        assert_eq!(snap.occupied_count(), 2);
    }

    #[test]
    fn projection_matches_per_cell_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let dims = GridDims::new(rng.gen_range(2..7), rng.gen_range(2..7)).unwrap();
            let mut positions = Vec::new();
            for r in 1..=dims.rows {
                for c in 1..=dims.cols {
                    for _ in 0..rng.gen_range(0..5u32) {
                        positions.push(Pos::new(r, c));
                    }
                }
            }
            let world = WorldState::from_positions(dims, &positions);
            let snap = project_snapshot(&world);
            for r in 1..=dims.rows {
                for c in 1..=dims.cols {
                    let p = Pos::new(r, c);
                    assert_eq!(snap.get(p) as u32, world.count_at(p).min(2));
                }
            }
        }
    }

    #[test]
    fn reference_sequence_reproduced() {
        let snap = reference_6x6();
        let seq = corner_sequence(&snap, Corner::D, Corner::A).unwrap();
        assert_eq!(seq.as_string(), "010102000000000100010220100000001011");
    }

    #[test]
    fn empty_snapshot_all_zero_sequences() {
        let snap = Snapshot::empty(GridDims::new(3, 5).unwrap());
        for (_, seq) in all_sequences(&snap) {
            assert_eq!(seq.as_string(), "0".repeat(15));
        }
    }

    #[test]
    fn diagonal_corner_pair_rejected() {
        let snap = Snapshot::empty(GridDims::new(4, 4).unwrap());
        assert_eq!(
            corner_sequence(&snap, Corner::D, Corner::B).unwrap_err(),
            GridError::NonAdjacentCorners(Corner::D, Corner::B)
        );
    }

    /// Independent coordinate-loop extraction for each of the 8 scan orders.
    fn oracle_sequence(snap: &Snapshot, from: Corner, along: Corner) -> Vec<u8> {
        let (m, n) = (snap.dims.rows, snap.dims.cols);
        let fp = snap.dims.corner_pos(from);
        let ap = snap.dims.corner_pos(along);
        let mut out = Vec::new();
        if fp.col == ap.col {
            // Scan lines are columns.
            let rows: Vec<usize> = if fp.row == 1 {
                (1..=m).collect()
            } else {
                (1..=m).rev().collect()
            };
            let cols: Vec<usize> = if fp.col == 1 {
                (1..=n).collect()
            } else {
                (1..=n).rev().collect()
            };
            for &c in &cols {
                for &r in &rows {
                    out.push(snap.get(Pos::new(r, c)));
                }
            }
        } else {
            let cols: Vec<usize> = if fp.col == 1 {
                (1..=n).collect()
            } else {
                (1..=n).rev().collect()
            };
            let rows: Vec<usize> = if fp.row == 1 {
                (1..=m).collect()
            } else {
                (1..=m).rev().collect()
            };
            for &r in &rows {
                for &c in &cols {
                    out.push(snap.get(Pos::new(r, c)));
                }
            }
        }
        out
    }

    #[test]
    fn sequences_match_coordinate_loop_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let dims = GridDims::new(5, 4).unwrap();
            let cells: Vec<u8> = (0..dims.node_count()).map(|_| rng.gen_range(0..3)).collect();
            let snap = Snapshot::from_cells(dims, cells);
            for (from, along) in Corner::sequence_pairs() {
                let seq = corner_sequence(&snap, from, along).unwrap();
                assert_eq!(seq.symbols, oracle_sequence(&snap, from, along));
            }
        }
    }

    #[test]
    fn lex_compare_definition() {
        let mk = |s: &str| CornerSequence {
            from: Corner::D,
            along: Corner::A,
            symbols: s.bytes().map(|b| b - b'0').collect(),
        };
        assert_eq!(
            lex_compare(&mk("0100"), &mk("0011")).unwrap(),
            Ordering::Greater
        );
        assert_eq!(
            lex_compare(&mk("0100"), &mk("0100")).unwrap(),
            Ordering::Equal
        );
        assert!(lex_compare(&mk("010"), &mk("0100")).is_err());
    }

    #[test]
    fn lex_compare_matches_scan_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10_000 {
            let len = rng.gen_range(1..20);
            let a: Vec<u8> = (0..len).map(|_| rng.gen_range(0..3)).collect();
            let b: Vec<u8> = (0..len).map(|_| rng.gen_range(0..3)).collect();
            let mut oracle = Ordering::Equal;
            for i in 0..len {
                if a[i] != b[i] {
                    oracle = a[i].cmp(&b[i]);
                    break;
                }
            }
            let sa = CornerSequence {
                from: Corner::D,
                along: Corner::A,
                symbols: a,
            };
            let sb = CornerSequence {
                from: Corner::D,
                along: Corner::A,
                symbols: b,
            };
            assert_eq!(lex_compare(&sa, &sb).unwrap(), oracle);
        }
    }

    #[test]
    fn single_robot_sequence_endpoints() {
        let snap = snap_with((4, 4), &[(1, 1, 1)]);
        let seqs = all_sequences(&snap);
        assert_eq!(seqs[&(Corner::D, Corner::A)].symbols[0], 1);
        assert_eq!(seqs[&(Corner::D, Corner::C)].symbols[0], 1);
        assert_eq!(*seqs[&(Corner::B, Corner::C)].symbols.last().unwrap(), 1);
        assert_eq!(*seqs[&(Corner::B, Corner::A)].symbols.last().unwrap(), 1);
    }

    #[test]
    fn mes_inner_square() {
        let snap = snap_with((6, 6), &[(2, 2, 1), (5, 5, 1), (3, 4, 1)]);
        let b = compute_mes(&snap).unwrap();
        assert_eq!((b.row_lo, b.row_hi, b.col_lo, b.col_hi), (2, 5, 2, 5));
    }

    #[test]
    fn mes_corner_forces_full_grid() {
        let snap = snap_with((6, 6), &[(1, 1, 1), (3, 3, 1)]);
        let b = compute_mes(&snap).unwrap();
        assert_eq!((b.row_lo, b.row_hi, b.col_lo, b.col_hi), (1, 6, 1, 6));
    }

    #[test]
    fn mes_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let dims = GridDims::new(8, 8).unwrap();
        for _ in 0..200 {
            let mut snap = Snapshot::empty(dims);
            let k = rng.gen_range(1..6);
            for _ in 0..k {
                snap.set(
                    Pos::new(rng.gen_range(1..9), rng.gen_range(1..9)),
                    rng.gen_range(1..3),
                );
            }
            // Try all centered squares of even side, ascending.
            let mut expect = None;
            for side in [2usize, 4, 6, 8] {
                let lo = (8 - side) / 2 + 1;
                let hi = lo + side - 1;
                let covers = snap
                    .occupied()
                    .all(|(p, _)| p.row >= lo && p.row <= hi && p.col >= lo && p.col <= hi);
                if covers {
                    expect = Some((lo, hi));
                    break;
                }
            }
            let (lo, hi) = expect.unwrap();
            let b = compute_mes(&snap).unwrap();
            assert_eq!((b.row_lo, b.row_hi, b.col_lo, b.col_hi), (lo, hi, lo, hi));
        }
    }

    #[test]
    fn mes_errors() {
        assert_eq!(
            compute_mes(&Snapshot::empty(GridDims::new(6, 6).unwrap())).unwrap_err(),
            GridError::EmptyConfiguration
        );
        assert_eq!(
            compute_mes(&snap_with((6, 4), &[(1, 1, 1)])).unwrap_err(),
            GridError::NotSquareGrid
        );
        assert_eq!(
            compute_mes(&snap_with((5, 5), &[(1, 1, 1)])).unwrap_err(),
            GridError::NotSquareGrid
        );
    }

    #[test]
    fn gathering_predicate() {
        assert!(gathering_accomplished(&snap_with((4, 4), &[(2, 2, 2)])));
        assert!(gathering_accomplished(&snap_with(
            (4, 4),
            &[(1, 1, 2), (3, 3, 1)]
        )));
        assert!(!gathering_accomplished(&snap_with(
            (4, 4),
            &[(1, 1, 1), (3, 3, 1)]
        )));
        assert!(!gathering_accomplished(&snap_with(
            (4, 4),
            &[(1, 1, 2), (3, 3, 2)]
        )));
    }

    #[test]
    fn occupied_corner_reporting() {
        assert_eq!(
            occupied_corners(&snap_with((4, 4), &[(1, 1, 1)])),
            vec![Corner::D]
        );
        assert!(occupied_corners(&snap_with((4, 4), &[(2, 2, 1)])).is_empty());
        let all = snap_with((4, 4), &[(1, 1, 1), (1, 4, 1), (4, 1, 1), (4, 4, 1)]);
        assert_eq!(occupied_corners(&all).len(), 4);
    }

    #[test]
    fn world_file_round_trip() {
        let text = "4 5\n.1...\n..2..\n.....\n1...1\n";
        let world = parse_world(text).unwrap();
        assert_eq!(world.robot_count(), 5);
        assert_eq!(emit_world(&world), text);
    }

    #[test]
    fn world_file_errors() {
        assert!(matches!(
            parse_world("4 5\n.1..\n").unwrap_err(),
            ParseError::Malformed { line: 2, .. }
        ));
        assert!(matches!(
            parse_world("x y\n").unwrap_err(),
            ParseError::Malformed { line: 1, .. }
        ));
        let two = parse_world("4 4\n1...\n....\n....\n...1\n").unwrap();
        assert!(matches!(
            validate_initial(&two).unwrap_err(),
            ParseError::TooFewRobots(2)
        ));
        let multi = parse_world("4 4\n2...\n....\n.1..\n...1\n").unwrap();
        assert!(validate_initial(&multi).is_err());
    }

    #[test]
    fn frame_index_round_trip() {
        for dims in [GridDims::new(4, 4).unwrap(), GridDims::new(3, 5).unwrap()] {
            for (_, _, frame) in Frame::all(dims) {
                for t in 1..=dims.node_count() {
                    let p = frame.pos_at(t);
                    assert!(dims.contains(p));
                    assert_eq!(frame.index_of(p), t);
                }
            }
        }
    }
}

#[cfg(test)]
pub(crate) use tests::reference_6x6;
