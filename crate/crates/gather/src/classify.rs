//! Configuration taxonomy driving the gathering algorithm: largest corner,
//! symmetry and almost-symmetry types, leading duo, impeding robots, critical
//! configurations, 2S2, and the three- and four-corner subclasses.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{
    compute_mes, gathering_accomplished, occupied_corners, Corner, Frame, GridDims, MesBounds,
    Parity, Pos, Snapshot,
};
use crate::symmetry::{is_partitive, transform_snapshot, SymmetryKind};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("configuration is partitive")]
    PartitiveInput,
    #[error("a corner is occupied")]
    CornerOccupied,
    #[error("expected {expected} occupied corners, found {found}")]
    WrongCornerCount { expected: usize, found: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolated(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ThreeCornerSub {
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FourCornerSub {
    FiveRobots,
    InteriorOnly,
    BoundaryRich,
}

/// The configuration taxonomy tag. `Plain` covers odd×odd and even×odd
/// configurations, which need no further case analysis beyond partitivity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tag {
    GatheringDone,
    Partitive,
    TwoS2,
    Unsupported,
    Plain,
    PurelyAsymmetric,
    Critical,
    AlmostSym1,
    AlmostSym2,
    Sym1,
    Sym2,
    OneCorner,
    TwoCorners,
    ThreeCorners(ThreeCornerSub),
    FourCorners(FourCornerSub),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    FirstRobot,
    SecondRobot,
    Impeding,
    CornerRobot,
    Solitary,
    RegionRobot,
    BoundaryLeaver,
    All,
}

/// Robots designated to move by the current case, with the node they are
/// heading for (absent for 3C5, whose movers step perpendicular off their
/// side instead of toward a fixed target). Positions are lab coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoverSelection {
    pub movers: Vec<(Pos, Role)>,
    pub target: Option<Pos>,
}

impl MoverSelection {
    pub fn contains(&self, p: Pos) -> bool {
        self.movers.iter().any(|&(q, _)| q == p)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub parity: Parity,
    /// Occupied corner count of the analysis grid (the MES on even×even
    /// squares, the whole grid otherwise).
    pub corners_occupied: usize,
    pub tag: Tag,
    pub largest_corner: Option<Pos>,
    pub second_largest_corner: Option<Pos>,
    pub mes: Option<MesBounds>,
    pub movers: Option<MoverSelection>,
}

/// Full per-snapshot analysis. Total: defensive fallbacks (never panics on
/// any snapshot with at least one robot).
pub fn classify(snap: &Snapshot) -> Classification {
    let parity = snap.dims.parity();
    let base = |tag| Classification {
        parity,
        corners_occupied: occupied_corners(snap).len(),
        tag,
        largest_corner: None,
        second_largest_corner: None,
        mes: None,
        movers: None,
    };
    if gathering_accomplished(snap) {
        return base(Tag::GatheringDone);
    }
    if is_partitive(snap) {
        return base(Tag::Partitive);
    }
    match parity {
        Parity::OddOdd | Parity::EvenOdd => base(Tag::Plain),
        Parity::EvenEven => {
            if !snap.dims.is_square() {
                return base(Tag::Unsupported);
            }
            let mes = compute_mes(snap).expect("square grid with robots");
            let sub = snap.restrict(mes);
            let mut cls = classify_even_square(&sub);
            // Lift sub-grid coordinates back to the lab frame.
            cls.largest_corner = cls.largest_corner.map(|p| mes.to_lab(p));
            cls.second_largest_corner = cls.second_largest_corner.map(|p| mes.to_lab(p));
            cls.movers = cls.movers.map(|mut m| {
                for (p, _) in &mut m.movers {
                    *p = mes.to_lab(*p);
                }
                m.target = m.target.map(|p| mes.to_lab(p));
                m
            });
            cls.mes = Some(mes);
            cls.parity = parity;
            cls
        }
    }
}

/// Case analysis on an even×even square snapshot that is its own MES.
/// All coordinates in the result are relative to `sub`.
pub(crate) fn classify_even_square(sub: &Snapshot) -> Classification {
    let corners = occupied_corners(sub);
    let mut cls = Classification {
        parity: Parity::EvenEven,
        corners_occupied: corners.len(),
        tag: Tag::Unsupported,
        largest_corner: None,
        second_largest_corner: None,
        mes: None,
        movers: None,
    };
    match corners.len() {
        0 => match no_corner_analysis(sub) {
            Ok(a) => {
                cls.tag = a.tag;
                cls.largest_corner = Some(a.frame.anchor());
                cls.second_largest_corner = a.second_largest;
                cls.movers = Some(MoverSelection {
                    movers: a.duo,
                    target: Some(a.target),
                });
            }
            // Unreachable for non-partitive inputs; kept defensive.
            Err(_) => cls.tag = Tag::Unsupported,
        },
        1 => {
            let corner = sub.dims.corner_pos(corners[0]);
            cls.tag = Tag::OneCorner;
            cls.largest_corner = Some(corner);
            cls.movers = Some(MoverSelection {
                movers: sub
                    .occupied()
                    .filter(|&(p, _)| p != corner)
                    .map(|(p, _)| (p, Role::All))
                    .collect(),
                target: Some(corner),
            });
        }
        2 => match two_corner_analysis(sub) {
            Ok(TwoCornerVerdict::TwoS2) => cls.tag = Tag::TwoS2,
            Ok(TwoCornerVerdict::Ordered {
                larger,
                smaller,
                leading_non_corner,
            }) => {
                cls.tag = Tag::TwoCorners;
                cls.largest_corner = Some(sub.dims.corner_pos(larger));
                let mut movers = vec![(sub.dims.corner_pos(smaller), Role::CornerRobot)];
                for p in leading_non_corner {
                    movers.push((p, Role::FirstRobot));
                }
                cls.movers = Some(MoverSelection {
                    movers,
                    target: Some(sub.dims.corner_pos(larger)),
                });
            }
            Err(_) => cls.tag = Tag::Unsupported,
        },
        3 => {
            let (subclass, movers) = three_corner_unified(sub);
            cls.tag = Tag::ThreeCorners(subclass);
            cls.movers = movers;
        }
        4 => match four_corner_analysis(sub) {
            Ok(a) => {
                cls.tag = Tag::FourCorners(a.sub);
                cls.largest_corner = a.largest;
                cls.second_largest_corner = a.second_largest;
                cls.movers = Some(a.movers);
            }
            Err(_) => cls.tag = Tag::Unsupported,
        },
        _ => unreachable!(),
    }
    cls
}

// ---------------------------------------------------------------------------
// No corners occupied
// ---------------------------------------------------------------------------

pub(crate) struct NoCornerAnalysis {
    pub tag: Tag,
    /// The frame of the governing (largest) sequence; its anchor is the
    /// largest corner.
    pub frame: Frame,
    /// Second largest corner for Sym2/AlmostSym2.
    pub second_largest: Option<Pos>,
    /// Designated movers. For Critical this is the substitute duo.
    pub duo: Vec<(Pos, Role)>,
    /// The corner the duo heads for.
    pub target: Pos,
}

pub(crate) fn frames_with_sequences(sub: &Snapshot) -> Vec<(Frame, Vec<u8>)> {
    Frame::all(sub.dims)
        .into_iter()
        .map(|(_, _, f)| {
            let s = f.scan(sub);
            (f, s)
        })
        .collect()
}

pub(crate) fn first_occupied(frame: &Frame, seq: &[u8]) -> Option<(usize, Pos)> {
    seq.iter()
        .position(|&v| v > 0)
        .map(|idx| (idx + 1, frame.pos_at(idx + 1)))
}

/// Tests whether the two scans become equal once the robots at the leading
/// nonzero terms of both are removed from the configuration, i.e. whether
/// removing the impeding pair restores the symmetry connecting the two
/// scans. Each impeding robot must sit on its own scan's starting side
/// (the perturbed mirror pair the proofs reason about); without that
/// requirement small configurations can degenerate into spurious matches.
fn impeding_removal_equal(
    sub: &Snapshot,
    f1: &Frame,
    s1: &[u8],
    f2: &Frame,
    s2: &[u8],
) -> Option<[Pos; 2]> {
    let (_, r1) = first_occupied(f1, s1)?;
    let (_, r2) = first_occupied(f2, s2)?;
    if r1 == r2 {
        // A single robot cannot act as a duo; treat as not almost symmetric.
        return None;
    }
    if f1.to_frame(r1).1 != 1 || f2.to_frame(r2).1 != 1 {
        return None;
    }
    let mut m = sub.clone();
    m.set(r1, 0);
    m.set(r2, 0);
    if f1.scan(&m) == f2.scan(&m) {
        Some([r1, r2])
    } else {
        None
    }
}

/// The two frames anchored at a given corner position, with sequences.
fn corner_frames(sub: &Snapshot, corner: Pos) -> [(Frame, Vec<u8>); 2] {
    let [f1, f2] = Frame::anchored_frames(sub.dims, corner);
    let s1 = f1.scan(sub);
    let s2 = f2.scan(sub);
    [(f1, s1), (f2, s2)]
}

pub(crate) enum AlmostType {
    Type1 {
        impeding: [Pos; 2],
    },
    Type2 {
        impeding: [Pos; 2],
        second_largest: Pos,
    },
}

/// The strictly largest frame of an asymmetric no-corner configuration, if
/// the preconditions of the almost-symmetry definitions hold.
fn almost_precondition(sub: &Snapshot) -> Option<(Frame, Vec<u8>)> {
    if !occupied_corners(sub).is_empty() || !sub.multiplicities().is_empty() {
        return None;
    }
    let all = frames_with_sequences(sub);
    let max_seq = all.iter().map(|(_, s)| s.clone()).max()?;
    let mut max_frames: Vec<(Frame, Vec<u8>)> =
        all.into_iter().filter(|(_, s)| *s == max_seq).collect();
    if max_frames.len() != 1 {
        return None; // symmetric, not asymmetric
    }
    max_frames.pop()
}

/// First type given the strictly largest frame: a robot on side DC of the
/// governing frame, and the two D-sequences agree after the impeding pair
/// is removed.
fn almost_first_type(sub: &Snapshot, largest_frame: &Frame, largest_seq: &[u8]) -> Option<[Pos; 2]> {
    let d = largest_frame.anchor();
    let partner = corner_frames(sub, d)
        .into_iter()
        .find(|(f, _)| f.to_lab(2, 1) != largest_frame.to_lab(2, 1))
        .expect("two distinct frames per corner");
    let dc_occupied = (1..=largest_frame.cols).any(|j| sub.get(largest_frame.to_lab(1, j)) > 0);
    if !dc_occupied {
        return None;
    }
    impeding_removal_equal(sub, largest_frame, largest_seq, &partner.0, &partner.1)
}

/// Second type given the strictly largest frame: among the two corners
/// adjacent to the largest corner, the one owning the largest of their four
/// sequences; its pair must agree after the impeding pair is removed.
fn almost_second_type(sub: &Snapshot, largest_frame: &Frame) -> Option<([Pos; 2], Pos)> {
    let a = largest_frame.corner(Corner::A);
    let c = largest_frame.corner(Corner::C);
    let candidates: Vec<(Frame, Vec<u8>)> = corner_frames(sub, a)
        .into_iter()
        .chain(corner_frames(sub, c))
        .collect();
    let best = candidates
        .iter()
        .max_by(|x, y| x.1.cmp(&y.1))
        .expect("four candidate sequences");
    let s = best.0.anchor();
    let [(f1, s1), (f2, s2)] = corner_frames(sub, s);
    impeding_removal_equal(sub, &f1, &s1, &f2, &s2).map(|impeding| (impeding, s))
}

/// Total internal form of the almost-symmetric test: `None` unless the
/// configuration is asymmetric with no occupied corners and no multiplicities
/// and one of the two definitions applies.
pub(crate) fn almost_type(sub: &Snapshot) -> Option<AlmostType> {
    let (largest_frame, largest_seq) = almost_precondition(sub)?;
    if let Some(impeding) = almost_first_type(sub, &largest_frame, &largest_seq) {
        return Some(AlmostType::Type1 { impeding });
    }
    if let Some((impeding, second_largest)) = almost_second_type(sub, &largest_frame) {
        return Some(AlmostType::Type2 {
            impeding,
            second_largest,
        });
    }
    None
}

/// Both almost-symmetry tests evaluated independently; `almost_type` stops
/// at the first match, which would mask a configuration satisfying both.
pub(crate) fn almost_flags(sub: &Snapshot) -> (bool, bool) {
    match almost_precondition(sub) {
        None => (false, false),
        Some((largest_frame, largest_seq)) => (
            almost_first_type(sub, &largest_frame, &largest_seq).is_some(),
            almost_second_type(sub, &largest_frame).is_some(),
        ),
    }
}

/// Algorithm-2 step for a duo member at frame coordinates (i, j): column
/// step toward the largest corner under the quoted branch condition, else
/// row step.
pub(crate) fn toy_step(frame: &Frame, i: usize, j: usize) -> (usize, usize) {
    let n = frame.rows;
    if j == 1 || (j == 2 && i > 2) || (i == n && j <= n / 2) {
        (i - 1, j)
    } else {
        (i, j - 1)
    }
}

/// Applies the second robot's Algorithm-2 move on the snapshot level.
fn apply_second_robot_move(sub: &Snapshot, frame: &Frame, second: Pos) -> Snapshot {
    let (i, j) = frame.to_frame(second);
    let (ni, nj) = toy_step(frame, i, j);
    let to = frame.to_lab(ni, nj);
    let mut out = sub.clone();
    out.set(second, out.get(second) - 1);
    out.set(to, (out.get(to) + 1).min(2));
    out
}

/// Unique non-corner robot position on a frame side, if exactly one cell of
/// that side is occupied. `row1` selects side DC (frame row 1); otherwise
/// side AB (frame row `rows`).
pub(crate) fn unique_on_side(sub: &Snapshot, frame: &Frame, row: usize) -> Option<Pos> {
    let mut found = None;
    for j in 2..frame.cols {
        let p = frame.to_lab(row, j);
        if sub.get(p) > 0 {
            if found.is_some() || sub.get(p) > 1 {
                return None;
            }
            found = Some(p);
        }
    }
    found
}

pub(crate) fn no_corner_analysis(sub: &Snapshot) -> Result<NoCornerAnalysis, ClassifyError> {
    let all = frames_with_sequences(sub);
    let max_seq = all
        .iter()
        .map(|(_, s)| s.clone())
        .max()
        .ok_or(ClassifyError::PreconditionViolated("empty snapshot"))?;
    let max_frames: Vec<(Frame, Vec<u8>)> = all
        .into_iter()
        .filter(|(_, s)| *s == max_seq)
        .collect();

    match max_frames.len() {
        1 => {
            let (frame, seq) = max_frames.into_iter().next().unwrap();
            let d = frame.anchor();
            match almost_type(sub) {
                Some(AlmostType::Type1 { impeding, .. }) => Ok(NoCornerAnalysis {
                    tag: Tag::AlmostSym1,
                    frame,
                    second_largest: None,
                    duo: impeding.iter().map(|&p| (p, Role::Impeding)).collect(),
                    target: d,
                }),
                Some(AlmostType::Type2 {
                    impeding,
                    second_largest,
                    ..
                }) => Ok(NoCornerAnalysis {
                    tag: Tag::AlmostSym2,
                    frame,
                    second_largest: Some(second_largest),
                    duo: impeding.iter().map(|&p| (p, Role::Impeding)).collect(),
                    target: second_largest,
                }),
                None => {
                    // Purely asymmetric: leading duo = first two occupied
                    // places of the largest sequence (one place if it is a
                    // multiplicity).
                    let (t1, p1) = first_occupied(&frame, &seq)
                        .ok_or(ClassifyError::PreconditionViolated("empty sequence"))?;
                    let duo: Vec<(Pos, Role)> = if seq[t1 - 1] == 2 {
                        vec![(p1, Role::FirstRobot)]
                    } else {
                        let t2 = seq[t1..]
                            .iter()
                            .position(|&v| v > 0)
                            .map(|off| t1 + off + 1)
                            .ok_or(ClassifyError::PreconditionViolated("single robot"))?;
                        vec![(p1, Role::FirstRobot), (frame.pos_at(t2), Role::SecondRobot)]
                    };
                    // Critical: the second robot's Algorithm-2 move would
                    // make the configuration almost symmetric of the second
                    // type; the substitute duo then moves instead.
                    if let &[(_, _), (p2, _)] = duo.as_slice() {
                        let moved = apply_second_robot_move(sub, &frame, p2);
                        if matches!(almost_type(&moved), Some(AlmostType::Type2 { .. })) {
                            let on_da = unique_on_side_col(sub, &frame);
                            let on_ab = unique_on_side(sub, &frame, frame.rows);
                            if let (Some(r1), Some(r3)) = (on_da, on_ab) {
                                return Ok(NoCornerAnalysis {
                                    tag: Tag::Critical,
                                    frame,
                                    second_largest: None,
                                    duo: vec![
                                        (r1, Role::FirstRobot),
                                        (r3, Role::SecondRobot),
                                    ],
                                    target: d,
                                });
                            }
                        }
                    }
                    Ok(NoCornerAnalysis {
                        tag: Tag::PurelyAsymmetric,
                        frame,
                        second_largest: None,
                        duo,
                        target: d,
                    })
                }
            }
        }
        2 => {
            let (f1, s1) = &max_frames[0];
            let (f2, s2) = &max_frames[1];
            if f1.anchor() == f2.anchor() {
                // Symmetric of the first type: axis through the largest
                // corner; the duo are the leading robots of its sequences.
                let d = f1.anchor();
                let r1 = first_occupied(f1, s1)
                    .ok_or(ClassifyError::PreconditionViolated("empty sequence"))?
                    .1;
                let r2 = first_occupied(f2, s2)
                    .ok_or(ClassifyError::PreconditionViolated("empty sequence"))?
                    .1;
                Ok(NoCornerAnalysis {
                    tag: Tag::Sym1,
                    frame: *f1,
                    second_largest: None,
                    duo: vec![(r1, Role::FirstRobot), (r2, Role::SecondRobot)],
                    target: d,
                })
            } else if !f1.anchor().is_adjacent_on_boundary(f2.anchor(), sub.dims) {
                // Symmetric of the second type: two diagonally opposite
                // largest corners; the axis passes through the other two.
                let (s_corner, sf1, ss1, sf2, ss2) =
                    second_largest_corner(sub, f1.corner(Corner::A), f1.corner(Corner::C))?;
                let r1 = first_occupied(&sf1, &ss1)
                    .ok_or(ClassifyError::PreconditionViolated("empty sequence"))?
                    .1;
                let r2 = first_occupied(&sf2, &ss2)
                    .ok_or(ClassifyError::PreconditionViolated("empty sequence"))?
                    .1;
                Ok(NoCornerAnalysis {
                    tag: Tag::Sym2,
                    frame: *f1,
                    second_largest: Some(s_corner),
                    duo: vec![(r1, Role::FirstRobot), (r2, Role::SecondRobot)],
                    target: s_corner,
                })
            } else {
                // Equal sequences at side-sharing corners are partitive.
                Err(ClassifyError::PartitiveInput)
            }
        }
        _ => Err(ClassifyError::PartitiveInput),
    }
}

/// Unique non-corner robot on side DA (frame column 1).
pub(crate) fn unique_on_side_col(sub: &Snapshot, frame: &Frame) -> Option<Pos> {
    let mut found = None;
    for i in 2..frame.rows {
        let p = frame.to_lab(i, 1);
        if sub.get(p) > 0 {
            if found.is_some() || sub.get(p) > 1 {
                return None;
            }
            found = Some(p);
        }
    }
    found
}

/// Picks the corner among {a, c} owning the largest of their four sequences;
/// returns that corner with both its frames and sequences.
fn second_largest_corner(
    sub: &Snapshot,
    a: Pos,
    c: Pos,
) -> Result<(Pos, Frame, Vec<u8>, Frame, Vec<u8>), ClassifyError> {
    let fa = corner_frames(sub, a);
    let fc = corner_frames(sub, c);
    let best_a = fa.iter().map(|(_, s)| s.clone()).max().unwrap();
    let best_c = fc.iter().map(|(_, s)| s.clone()).max().unwrap();
    let winner = match best_a.cmp(&best_c) {
        std::cmp::Ordering::Greater => a,
        std::cmp::Ordering::Less => c,
        std::cmp::Ordering::Equal => {
            // Would imply an extra symmetry making the configuration
            // partitive; rejected upstream.
            return Err(ClassifyError::PartitiveInput);
        }
    };
    let [(f1, s1), (f2, s2)] = corner_frames(sub, winner);
    Ok((winner, f1, s1, f2, s2))
}

impl Pos {
    /// True when two corner positions share a side of the grid.
    fn is_adjacent_on_boundary(&self, other: Pos, _dims: GridDims) -> bool {
        self.row == other.row || self.col == other.col
    }
}

// ---------------------------------------------------------------------------
// Public per-case operations (callers pass the MES-restricted snapshot)
// ---------------------------------------------------------------------------

/// The corner owning a lexicographically maximal sequence, with that
/// sequence's direction pair.
pub fn largest_corner(snap: &Snapshot) -> Result<(Corner, Corner), ClassifyError> {
    if is_partitive(snap) {
        return Err(ClassifyError::PartitiveInput);
    }
    Frame::all(snap.dims)
        .into_iter()
        .map(|(from, along, f)| (f.scan(snap), from, along))
        .max()
        .map(|(_, from, along)| (from, along))
        .ok_or(ClassifyError::PreconditionViolated("empty grid"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlmostVerdict {
    None,
    Type1 { impeding: [Pos; 2] },
    Type2 { impeding: [Pos; 2] },
}

/// Spec-facing almost-symmetry test with explicit preconditions.
pub fn almost_symmetric_type(snap: &Snapshot) -> Result<AlmostVerdict, ClassifyError> {
    if !occupied_corners(snap).is_empty() {
        return Err(ClassifyError::CornerOccupied);
    }
    if !snap.multiplicities().is_empty() {
        return Err(ClassifyError::PreconditionViolated("multiplicity present"));
    }
    if !crate::symmetry::automorphisms(snap).is_empty() {
        return Err(ClassifyError::PreconditionViolated("not asymmetric"));
    }
    Ok(match almost_type(snap) {
        Some(AlmostType::Type1 { impeding, .. }) => AlmostVerdict::Type1 { impeding },
        Some(AlmostType::Type2 { impeding, .. }) => AlmostVerdict::Type2 { impeding },
        None => AlmostVerdict::None,
    })
}

/// The leading duo of a no-corner configuration.
pub fn leading_duo(snap: &Snapshot) -> Result<MoverSelection, ClassifyError> {
    if is_partitive(snap) {
        return Err(ClassifyError::PartitiveInput);
    }
    if !occupied_corners(snap).is_empty() {
        return Err(ClassifyError::CornerOccupied);
    }
    let a = no_corner_analysis(snap)?;
    Ok(MoverSelection {
        movers: a.duo,
        target: Some(a.target),
    })
}

/// Critical test; returns the substitute duo when positive.
pub fn is_critical(snap: &Snapshot) -> Result<Option<[Pos; 2]>, ClassifyError> {
    if !occupied_corners(snap).is_empty() {
        return Err(ClassifyError::CornerOccupied);
    }
    let a = no_corner_analysis(snap)?;
    match a.tag {
        Tag::Critical => {
            let &[(r1, _), (r3, _)] = a.duo.as_slice() else {
                unreachable!()
            };
            Ok(Some([r1, r3]))
        }
        Tag::PurelyAsymmetric => Ok(None),
        _ => Err(ClassifyError::PreconditionViolated("not purely asymmetric")),
    }
}

// ---------------------------------------------------------------------------
// Two corners occupied
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TwoCornerVerdict {
    TwoS2,
    Ordered {
        larger: Corner,
        smaller: Corner,
        /// The robots at the leading nonzero terms of the larger corner's
        /// defining sequences, skipping occupied-corner positions. Usually a
        /// single robot; two when the larger corner's sequences tie under a
        /// diagonal automorphism (both mirror twins must then move, or the
        /// selection would not commute with the symmetry).
        leading_non_corner: Vec<Pos>,
    },
}

pub fn two_corner_analysis(snap: &Snapshot) -> Result<TwoCornerVerdict, ClassifyError> {
    let occ = occupied_corners(snap);
    if occ.len() != 2 {
        return Err(ClassifyError::WrongCornerCount {
            expected: 2,
            found: occ.len(),
        });
    }
    let (x, y) = (occ[0], occ[1]);
    let (larger, smaller);
    let mut defining: Vec<Frame> = Vec::new();
    if x.is_adjacent_to(y) {
        // Same-side corners: each defining sequence scans toward the
        // unoccupied adjacent corner (the one with 0 at the n-th place).
        let def = |corner: Corner, other: Corner| {
            let away = corner
                .adjacent()
                .into_iter()
                .find(|&z| z != other)
                .unwrap();
            let fr = Frame::from_corners(snap.dims, corner, away).unwrap();
            let s = fr.scan(snap);
            (fr, s)
        };
        let (fx, sx) = def(x, y);
        let (fy, sy) = def(y, x);
        match sx.cmp(&sy) {
            std::cmp::Ordering::Greater => {
                larger = x;
                smaller = y;
                defining.push(fx);
            }
            std::cmp::Ordering::Less => {
                larger = y;
                smaller = x;
                defining.push(fy);
            }
            std::cmp::Ordering::Equal => return Err(ClassifyError::PartitiveInput),
        }
    } else {
        // Diagonal corners: 2S2 when the reflection through the two
        // unoccupied corners preserves the configuration.
        let axis = if x == Corner::D || x == Corner::B {
            SymmetryKind::ReflectAntiDiag
        } else {
            SymmetryKind::ReflectMainDiag
        };
        if snap.dims.is_square() && transform_snapshot(snap, axis) == *snap {
            return Ok(TwoCornerVerdict::TwoS2);
        }
        let scans: Vec<(Corner, Frame, Vec<u8>)> = Frame::all(snap.dims)
            .into_iter()
            .filter(|(f, _, _)| *f == x || *f == y)
            .map(|(f, _, fr)| {
                let s = fr.scan(snap);
                (f, fr, s)
            })
            .collect();
        let best = scans.iter().map(|(_, _, s)| s.clone()).max().unwrap();
        larger = scans.iter().find(|(_, _, s)| *s == best).unwrap().0;
        smaller = if larger == x { y } else { x };
        // Both of the larger corner's sequences can attain the maximum when
        // the configuration admits a diagonal automorphism through the
        // occupied corners; keep every maximal frame so the mover set stays
        // symmetric.
        for (f, fr, s) in scans {
            if f == larger && s == best {
                defining.push(fr);
            }
        }
    }
    let mut leading_non_corner: Vec<Pos> = Vec::new();
    for frame in &defining {
        let seq = frame.scan(snap);
        if let Some(pos) = seq
            .iter()
            .enumerate()
            .filter(|&(idx, &v)| v > 0 && !snap.dims.is_corner(frame.pos_at(idx + 1)))
            .map(|(idx, _)| frame.pos_at(idx + 1))
            .next()
        {
            if !leading_non_corner.contains(&pos) {
                leading_non_corner.push(pos);
            }
        }
    }
    Ok(TwoCornerVerdict::Ordered {
        larger,
        smaller,
        leading_non_corner,
    })
}

// ---------------------------------------------------------------------------
// Three corners occupied
// ---------------------------------------------------------------------------

pub(crate) struct ThreeCornerGeometry {
    /// The unoccupied corner.
    pub unoccupied: Pos,
    /// The occupied corner diagonally opposite the unoccupied one.
    pub angular: Pos,
    /// The two occupied corners adjacent to the unoccupied one.
    pub flank: [Pos; 2],
}

pub(crate) fn three_corner_geometry(sub: &Snapshot) -> Result<ThreeCornerGeometry, ClassifyError> {
    let occ = occupied_corners(sub);
    if occ.len() != 3 {
        return Err(ClassifyError::WrongCornerCount {
            expected: 3,
            found: occ.len(),
        });
    }
    let unoccupied_label = Corner::ALL
        .into_iter()
        .find(|c| !occ.contains(c))
        .unwrap();
    let unoccupied = sub.dims.corner_pos(unoccupied_label);
    let angular = sub.dims.corner_pos(unoccupied_label.opposite());
    let [p, q] = unoccupied_label.adjacent();
    Ok(ThreeCornerGeometry {
        unoccupied,
        angular,
        flank: [sub.dims.corner_pos(p), sub.dims.corner_pos(q)],
    })
}

/// Nodes of the two sides incident to the unoccupied corner, corners
/// excluded.
fn incident_side_cells(sub: &Snapshot, geo: &ThreeCornerGeometry) -> [Vec<Pos>; 2] {
    geo.flank.map(|f| side_between(sub.dims, geo.unoccupied, f))
}

/// Non-corner nodes strictly between two corners sharing a side, ordered
/// from `a` to `b`.
fn side_between(_dims: GridDims, a: Pos, b: Pos) -> Vec<Pos> {
    let mut out = Vec::new();
    if a.row == b.row {
        let (lo, hi) = (a.col.min(b.col), a.col.max(b.col));
        for c in lo + 1..hi {
            out.push(Pos::new(a.row, c));
        }
        if a.col > b.col {
            out.reverse();
        }
    } else {
        let (lo, hi) = (a.row.min(b.row), a.row.max(b.row));
        for r in lo + 1..hi {
            out.push(Pos::new(r, a.col));
        }
        if a.row > b.row {
            out.reverse();
        }
    }
    out
}

/// The shaded region: nodes that are neither corners nor on the two sides
/// incident to the unoccupied corner.
pub(crate) fn shaded_region(sub: &Snapshot, geo: &ThreeCornerGeometry) -> Vec<Pos> {
    let [s1, s2] = incident_side_cells(sub, geo);
    sub.positions()
        .filter(|&p| !sub.dims.is_corner(p) && !s1.contains(&p) && !s2.contains(&p))
        .collect()
}

pub fn three_corner_subclass(sub: &Snapshot) -> Result<ThreeCornerSub, ClassifyError> {
    let geo = three_corner_geometry(sub)?;
    Ok(three_corner_sub_inner(sub, &geo).0)
}

fn three_corner_sub_inner(
    sub: &Snapshot,
    geo: &ThreeCornerGeometry,
) -> (ThreeCornerSub, Option<(Pos, Pos)>) {
    let k = sub.perceived_robots();
    // 3C1: exactly 4 robots, or at least 6 with exactly four singleton
    // boundary robots: three at corners plus one solitary robot on a side
    // incident to the unoccupied corner.
    let boundary_cells: Vec<(Pos, u8)> = sub
        .occupied()
        .filter(|&(p, _)| sub.dims.is_boundary(p))
        .collect();
    let corners_singleton = geo
        .flank
        .iter()
        .chain(std::iter::once(&geo.angular))
        .all(|&c| sub.get(c) == 1);
    let solitary = if boundary_cells.len() == 4
        && corners_singleton
        && boundary_cells.iter().all(|&(_, v)| v == 1)
    {
        let [s1, s2] = incident_side_cells(sub, geo);
        boundary_cells
            .iter()
            .map(|&(p, _)| p)
            .find(|p| s1.contains(p) || s2.contains(p))
    } else {
        None
    };
    if (k == 4 || k >= 6) && solitary.is_some() {
        let sol = solitary.unwrap();
        // The solitary robot's side's occupied endpoint.
        let endpoint = geo
            .flank
            .iter()
            .copied()
            .find(|&f| side_between(sub.dims, geo.unoccupied, f).contains(&sol))
            .unwrap();
        return (ThreeCornerSub::C1, Some((sol, endpoint)));
    }
    match k {
        0..=4 => (ThreeCornerSub::C3, None),
        5 => (ThreeCornerSub::C2, None),
        _ => {
            let shaded_robots: usize = shaded_region(sub, geo)
                .iter()
                .map(|&p| sub.get(p) as usize)
                .sum();
            if shaded_robots >= 2 {
                (ThreeCornerSub::C4, None)
            } else if k >= 8 {
                (ThreeCornerSub::C5, None)
            } else {
                (ThreeCornerSub::C6, None)
            }
        }
    }
}

/// Unified-mode subclass + mover selection.
pub(crate) fn three_corner_unified(sub: &Snapshot) -> (ThreeCornerSub, Option<MoverSelection>) {
    let geo = match three_corner_geometry(sub) {
        Ok(g) => g,
        Err(_) => return (ThreeCornerSub::C6, None),
    };
    let (subclass, c1_info) = three_corner_sub_inner(sub, &geo);
    let movers = match subclass {
        ThreeCornerSub::C1 => {
            let (sol, endpoint) = c1_info.unwrap();
            Some(MoverSelection {
                movers: vec![(sol, Role::Solitary), (geo.angular, Role::CornerRobot)],
                target: Some(endpoint),
            })
        }
        ThreeCornerSub::C2 => Some(MoverSelection {
            movers: sub
                .occupied()
                .filter(|&(p, _)| !sub.dims.is_corner(p))
                .map(|(p, _)| (p, Role::All))
                .collect(),
            target: Some(geo.angular),
        }),
        ThreeCornerSub::C3 => Some(MoverSelection {
            movers: geo.flank.iter().map(|&p| (p, Role::CornerRobot)).collect(),
            target: Some(geo.angular),
        }),
        ThreeCornerSub::C4 => Some(MoverSelection {
            movers: shaded_region(sub, &geo)
                .into_iter()
                .filter(|&p| sub.get(p) > 0)
                .map(|p| (p, Role::RegionRobot))
                .collect(),
            target: Some(geo.angular),
        }),
        ThreeCornerSub::C5 => Some(MoverSelection {
            movers: three_c5_leavers(sub, &geo)
                .into_iter()
                .map(|p| (p, Role::BoundaryLeaver))
                .collect(),
            target: None,
        }),
        ThreeCornerSub::C6 => None,
    };
    (subclass, movers)
}

/// 3C5 movers: boundary robots designated to step off their side. If one
/// incident side is empty, the 2 robots on the other side closest to its
/// occupied endpoint; otherwise one robot per side, closest to the occupied
/// endpoint of each.
pub(crate) fn three_c5_leavers(sub: &Snapshot, geo: &ThreeCornerGeometry) -> Vec<Pos> {
    // Cells per incident side, ordered from the occupied endpoint inward.
    let sides: Vec<Vec<(Pos, u8)>> = geo
        .flank
        .iter()
        .map(|&f| {
            let mut cells = side_between(sub.dims, geo.unoccupied, f);
            cells.reverse(); // closest to the occupied endpoint first
            cells
                .into_iter()
                .map(|p| (p, sub.get(p)))
                .filter(|&(_, v)| v > 0)
                .collect()
        })
        .collect();
    let take_robots = |cells: &[(Pos, u8)], want: usize| {
        let mut got = 0usize;
        let mut out = Vec::new();
        for &(p, v) in cells {
            if got >= want {
                break;
            }
            out.push(p);
            got += v as usize;
        }
        out
    };
    match (sides[0].is_empty(), sides[1].is_empty()) {
        (true, false) => take_robots(&sides[1], 2),
        (false, true) => take_robots(&sides[0], 2),
        (false, false) => {
            let mut out = take_robots(&sides[0], 1);
            out.extend(take_robots(&sides[1], 1));
            out
        }
        (true, true) => Vec::new(), // defensive; 3C5 guarantees nonempty
    }
}

/// Per-case-mode mover selection for three occupied corners (the gathering
/// theorem for standalone three-corner inputs).
pub(crate) fn three_corner_percase(sub: &Snapshot) -> Option<MoverSelection> {
    let geo = three_corner_geometry(sub).ok()?;
    let k = sub.perceived_robots();
    if k >= 5 {
        return Some(MoverSelection {
            movers: sub
                .occupied()
                .filter(|&(p, _)| !sub.dims.is_corner(p))
                .map(|(p, _)| (p, Role::All))
                .collect(),
            target: Some(geo.angular),
        });
    }
    if k == 4 {
        let [s1, s2] = incident_side_cells(sub, &geo);
        let fourth = sub
            .occupied()
            .map(|(p, _)| p)
            .find(|&p| !sub.dims.is_corner(p));
        if let Some(f) = fourth {
            if s1.contains(&f) || s2.contains(&f) {
                let endpoint = geo
                    .flank
                    .iter()
                    .copied()
                    .find(|&fl| side_between(sub.dims, geo.unoccupied, fl).contains(&f))
                    .unwrap();
                return Some(MoverSelection {
                    movers: vec![(f, Role::Solitary), (geo.angular, Role::CornerRobot)],
                    target: Some(endpoint),
                });
            }
        }
    }
    Some(MoverSelection {
        movers: geo.flank.iter().map(|&p| (p, Role::CornerRobot)).collect(),
        target: Some(geo.angular),
    })
}

// ---------------------------------------------------------------------------
// Four corners occupied
// ---------------------------------------------------------------------------

pub(crate) struct FourCornerAnalysis {
    pub sub: FourCornerSub,
    pub largest: Option<Pos>,
    pub second_largest: Option<Pos>,
    pub movers: MoverSelection,
    /// Present for the masked-replication case: the no-corner analysis of
    /// the corner-masked snapshot.
    pub masked: Option<NoCornerAnalysis>,
}

pub(crate) fn four_corner_analysis(sub: &Snapshot) -> Result<FourCornerAnalysis, ClassifyError> {
    let occ = occupied_corners(sub);
    if occ.len() != 4 {
        return Err(ClassifyError::WrongCornerCount {
            expected: 4,
            found: occ.len(),
        });
    }
    let k = sub.perceived_robots();
    let non_corner: Vec<(Pos, u8)> = sub
        .occupied()
        .filter(|&(p, _)| !sub.dims.is_corner(p))
        .collect();
    let non_corner_robots: usize = non_corner.iter().map(|&(_, v)| v as usize).sum();
    let boundary_non_corner = non_corner
        .iter()
        .any(|&(p, _)| sub.dims.is_boundary(p));

    if k >= 6 && non_corner_robots >= 2 && boundary_non_corner {
        // Replicate the no-corner strategy on the corner-masked snapshot;
        // the duo heads for a real, occupied corner, creating a corner
        // multiplicity.
        let mut masked = sub.clone();
        for c in sub.dims.corners() {
            masked.set(c, 0);
        }
        let a = no_corner_analysis(&masked)?;
        return Ok(FourCornerAnalysis {
            sub: FourCornerSub::BoundaryRich,
            largest: Some(a.frame.anchor()),
            second_largest: a.second_largest,
            movers: MoverSelection {
                movers: a.duo.clone(),
                target: Some(a.target),
            },
            masked: Some(a),
        });
    }

    // Largest-corner analysis over the full (corner-occupied) snapshot.
    let all = frames_with_sequences(sub);
    let max_seq = all.iter().map(|(_, s)| s.clone()).max().unwrap();
    let max_frames: Vec<&(Frame, Vec<u8>)> =
        all.iter().filter(|(_, s)| *s == max_seq).collect();
    let anchors: Vec<Pos> = {
        let mut v: Vec<Pos> = max_frames.iter().map(|(f, _)| f.anchor()).collect();
        v.dedup();
        v
    };

    let sym2_like = anchors.len() == 2 && !anchors[0].is_adjacent_on_boundary(anchors[1], sub.dims);
    if anchors.len() > 2 || (anchors.len() == 2 && !sym2_like && anchors[0] != anchors[1]) {
        return Err(ClassifyError::PartitiveInput);
    }

    if k == 5 {
        if sym2_like {
            // Both diagonal largest corners move toward the second largest
            // corner on the symmetry axis.
            let f1 = max_frames[0].0;
            let (s_corner, ..) =
                second_largest_corner(sub, f1.corner(Corner::A), f1.corner(Corner::C))?;
            return Ok(FourCornerAnalysis {
                sub: FourCornerSub::FiveRobots,
                largest: Some(anchors[0]),
                second_largest: Some(s_corner),
                movers: MoverSelection {
                    movers: anchors.iter().map(|&p| (p, Role::CornerRobot)).collect(),
                    target: Some(s_corner),
                },
                masked: None,
            });
        }
        let d = anchors[0];
        let opposite = Pos::new(
            sub.dims.rows + 1 - d.row,
            sub.dims.cols + 1 - d.col,
        );
        let mut movers = vec![(opposite, Role::CornerRobot)];
        if let Some(&(p, _)) = non_corner.first() {
            movers.push((p, Role::FirstRobot));
        }
        return Ok(FourCornerAnalysis {
            sub: FourCornerSub::FiveRobots,
            largest: Some(d),
            second_largest: None,
            movers: MoverSelection {
                movers,
                target: Some(d),
            },
            masked: None,
        });
    }

    // At least 6 robots, no non-corner robot on the boundary.
    if sym2_like {
        let f1 = max_frames[0].0;
        let (s_corner, ..) =
            second_largest_corner(sub, f1.corner(Corner::A), f1.corner(Corner::C))?;
        Ok(FourCornerAnalysis {
            sub: FourCornerSub::InteriorOnly,
            largest: Some(anchors[0]),
            second_largest: Some(s_corner),
            movers: MoverSelection {
                movers: anchors.iter().map(|&p| (p, Role::CornerRobot)).collect(),
                target: Some(s_corner),
            },
            masked: None,
        })
    } else {
        let d = anchors[0];
        let adjacent: Vec<Pos> = sub
            .dims
            .corners()
            .into_iter()
            .filter(|&c| c != d && (c.row == d.row || c.col == d.col))
            .collect();
        Ok(FourCornerAnalysis {
            sub: FourCornerSub::InteriorOnly,
            largest: Some(d),
            second_largest: None,
            movers: MoverSelection {
                movers: adjacent.into_iter().map(|p| (p, Role::CornerRobot)).collect(),
                target: Some(d),
            },
            masked: None,
        })
    }
}
