//! The per-robot gathering policy: turns a perceived snapshot into a single
//! Look-Compute-Move decision. Dispatches on grid parity, then on the
//! even-square case taxonomy from [`crate::classify`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{
    four_corner_analysis, no_corner_analysis, three_corner_percase, three_corner_unified,
    toy_step, FourCornerSub, NoCornerAnalysis, Tag, ThreeCornerSub, TwoCornerVerdict,
};
use crate::classify::{two_corner_analysis, ClassifyError};
use crate::grid::{
    compute_mes, gathering_accomplished, occupied_corners, Action, Frame, Parity, Pos, Snapshot,
};
use crate::symmetry::is_partitive;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolicyMode {
    /// Three-corner configurations handled by the standalone three-corner
    /// strategy (angular-corner rally).
    PerCase,
    /// Three-corner configurations handled by the subclass strategy that
    /// composes with the other cases; rejects subclass 3C6.
    #[default]
    Unified,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolicyVariant {
    #[default]
    Standard,
    /// Skips the critical-configuration detour and always moves the plain
    /// leading duo. Not crash-tolerant; kept as a negative control.
    NaiveNoCritical,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolicyError {
    #[error("configuration is partitive; gathering is impossible")]
    RejectedPartitive,
    #[error("configuration is 2S2; gathering is impossible")]
    RejectedTwoS2,
    #[error("three-corner subclass 3C6 is outside the unified strategy")]
    Rejected3C6,
    #[error("even x even grids must be square")]
    UnsupportedGrid,
    #[error("query position holds no robot")]
    NotOnRobot,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyDecision {
    pub action: Action,
    /// Which rule produced the action; stable strings meant for traces.
    pub rationale: &'static str,
}

fn decide(action: Action, rationale: &'static str) -> Result<PolicyDecision, PolicyError> {
    Ok(PolicyDecision { action, rationale })
}

pub fn compute_action(
    snap: &Snapshot,
    me: Pos,
    mode: PolicyMode,
) -> Result<PolicyDecision, PolicyError> {
    compute_action_variant(snap, me, mode, PolicyVariant::Standard)
}

pub fn compute_action_variant(
    snap: &Snapshot,
    me: Pos,
    mode: PolicyMode,
    variant: PolicyVariant,
) -> Result<PolicyDecision, PolicyError> {
    if !snap.dims.contains(me) || snap.get(me) == 0 {
        return Err(PolicyError::NotOnRobot);
    }
    // Only the single-site state short-circuits. A singleton-plus-
    // multiplicity state goes through the regular case machinery: directing
    // the singleton at the multiplicity would let stale pending moves
    // ping-pong two robots between the sites forever, while the machinery's
    // targets are fixed geometric nodes.
    if gathering_accomplished(snap) && snap.occupied_count() == 1 {
        return decide(Action::Stay, "gathered");
    }
    if is_partitive(snap) {
        return Err(PolicyError::RejectedPartitive);
    }
    match snap.dims.parity() {
        Parity::OddOdd => odd_odd_action(snap, me),
        Parity::EvenOdd => even_odd_action(snap, me),
        Parity::EvenEven => {
            if !snap.dims.is_square() {
                return Err(PolicyError::UnsupportedGrid);
            }
            let mes = compute_mes(snap).expect("square grid with robots");
            let sub = snap.restrict(mes);
            let mut d = even_square_action(&sub, mes.to_sub(me), mode, variant)?;
            if let Action::MoveTo(p) = d.action {
                d.action = Action::MoveTo(mes.to_lab(p));
            }
            Ok(d)
        }
    }
}

/// The unique corner holding a multiplicity, if exactly one corner does.
fn unique_corner_multiplicity(snap: &Snapshot) -> Option<Pos> {
    let mults: Vec<Pos> = snap
        .dims
        .corners()
        .into_iter()
        .filter(|&c| snap.get(c) == 2)
        .collect();
    match mults.as_slice() {
        &[c] => Some(c),
        _ => None,
    }
}

fn odd_odd_action(snap: &Snapshot, me: Pos) -> Result<PolicyDecision, PolicyError> {
    if let Some(cm) = unique_corner_multiplicity(snap) {
        return corner_rally(snap, me, cm);
    }
    let center = snap.dims.center().expect("odd x odd grid");
    if me == center {
        return decide(Action::Stay, "at the center");
    }
    let frame = global_governing_frame(snap, me);
    decide(
        move_toward(snap, &frame, me, center, true),
        "moving to the center",
    )
}

/// Everyone converges on a corner multiplicity; the gathering point is
/// already decided and can only grow.
fn corner_rally(snap: &Snapshot, me: Pos, cm: Pos) -> Result<PolicyDecision, PolicyError> {
    if me == cm {
        return decide(Action::Stay, "at the corner multiplicity");
    }
    let frame = governing_frame_at(snap, cm, me);
    decide(
        move_toward(snap, &frame, me, cm, true),
        "joining the corner multiplicity",
    )
}

/// Even x odd grids gather at the middle node of an odd side adjacent to the
/// largest even-side sequence: robots in the southern half (the half away
/// from that side) drain north first, then everyone climbs to the rally row
/// and walks to its middle.
fn even_odd_action(snap: &Snapshot, me: Pos) -> Result<PolicyDecision, PolicyError> {
    if let Some(cm) = unique_corner_multiplicity(snap) {
        return corner_rally(snap, me, cm);
    }
    let frame = even_side_governing_frame(snap);
    let (i, j) = frame.to_frame(me);
    let half = frame.rows / 2;
    let southern: usize = (half + 1..=frame.rows)
        .flat_map(|fi| (1..=frame.cols).map(move |fj| (fi, fj)))
        .map(|(fi, fj)| snap.get(frame.to_lab(fi, fj)) as usize)
        .sum();
    if i > half {
        return decide(
            Action::MoveTo(frame.to_lab(i - 1, j)),
            "southern robot drains north",
        );
    }
    if southern >= 2 {
        return decide(Action::Stay, "waiting for the southern half to drain");
    }
    if i > 1 {
        return decide(
            Action::MoveTo(frame.to_lab(i - 1, j)),
            "climbing to the rally row",
        );
    }
    let jc = (frame.cols + 1) / 2;
    if j == jc {
        return decide(Action::Stay, "at the rally node");
    }
    let nj = if j < jc { j + 1 } else { j - 1 };
    decide(
        Action::MoveTo(frame.to_lab(1, nj)),
        "walking the rally row to its middle",
    )
}

/// The maximal frame among the four whose scan direction runs along the even
/// dimension. Ties pick frames reaching the same lab nodes, so the choice of
/// representative does not affect the resulting action.
fn even_side_governing_frame(snap: &Snapshot) -> Frame {
    use crate::grid::Corner::*;
    let pairs: [(crate::grid::Corner, crate::grid::Corner); 4] = if snap.dims.rows % 2 == 0 {
        [(D, A), (A, D), (C, B), (B, C)]
    } else {
        [(D, C), (C, D), (A, B), (B, A)]
    };
    pairs
        .into_iter()
        .map(|(from, along)| {
            let f = Frame::from_corners(snap.dims, from, along).unwrap();
            let s = f.scan(snap);
            (s, f)
        })
        .max_by(|a, b| a.0.cmp(&b.0))
        .map(|(_, f)| f)
        .unwrap()
}

/// Case analysis on the MES-restricted even square; all coordinates are
/// relative to `sub`.
fn even_square_action(
    sub: &Snapshot,
    me: Pos,
    mode: PolicyMode,
    variant: PolicyVariant,
) -> Result<PolicyDecision, PolicyError> {
    let corner_mults: Vec<Pos> = sub
        .dims
        .corners()
        .into_iter()
        .filter(|&c| sub.get(c) == 2)
        .collect();
    match corner_mults.as_slice() {
        [] => {}
        &[cm] => return corner_rally(sub, me, cm),
        // Two corner multiplicities never arise under this policy; freeze
        // rather than guess.
        _ => return decide(Action::Stay, "multiple corner multiplicities"),
    }
    match occupied_corners(sub).len() {
        0 => {
            let a = no_corner_analysis(sub).map_err(reject)?;
            no_corner_action(sub, &a, me, variant)
        }
        1 => {
            let corner = sub.dims.corner_pos(occupied_corners(sub)[0]);
            if me == corner {
                return decide(Action::Stay, "holding the occupied corner");
            }
            let frame = governing_frame_at(sub, corner, me);
            decide(
                move_toward(sub, &frame, me, corner, true),
                "moving to the occupied corner",
            )
        }
        2 => match two_corner_analysis(sub).map_err(reject)? {
            TwoCornerVerdict::TwoS2 => Err(PolicyError::RejectedTwoS2),
            TwoCornerVerdict::Ordered {
                larger,
                smaller,
                leading_non_corner,
            } => {
                let target = sub.dims.corner_pos(larger);
                let smaller_pos = sub.dims.corner_pos(smaller);
                if me == smaller_pos || leading_non_corner.contains(&me) {
                    // Same-side corners move in the larger corner's defining
                    // frame (the scan toward the unoccupied adjacent corner);
                    // diagonal corners in its maximal anchored frame.
                    let frame = if larger.is_adjacent_to(smaller) {
                        let away = larger
                            .adjacent()
                            .into_iter()
                            .find(|&c| c != smaller)
                            .unwrap();
                        Frame::from_corners(sub.dims, larger, away).unwrap()
                    } else {
                        governing_frame_at(sub, target, me)
                    };
                    decide(
                        move_toward(sub, &frame, me, target, true),
                        "two corners: moving to the larger corner",
                    )
                } else {
                    decide(Action::Stay, "two corners: not a mover")
                }
            }
        },
        3 => three_corner_action(sub, me, mode),
        4 => four_corner_action(sub, me, variant),
        _ => unreachable!(),
    }
}

fn reject(e: ClassifyError) -> PolicyError {
    match e {
        ClassifyError::PartitiveInput => PolicyError::RejectedPartitive,
        // Remaining variants are precondition bugs, not inputs; surface them
        // as the closest rejection rather than panicking mid-simulation.
        _ => PolicyError::RejectedPartitive,
    }
}

/// Actions for the no-corner taxonomy. Also used for the corner-masked
/// snapshot in the four-corner boundary-rich case.
fn no_corner_action(
    sub: &Snapshot,
    a: &NoCornerAnalysis,
    me: Pos,
    variant: PolicyVariant,
) -> Result<PolicyDecision, PolicyError> {
    let in_duo = a.duo.iter().any(|&(p, _)| p == me);
    match a.tag {
        Tag::Critical => {
            if variant == PolicyVariant::NaiveNoCritical {
                // Negative control: ignore criticality and march the plain
                // leading duo.
                let seq = a.frame.scan(sub);
                let duo = plain_duo(&a.frame, &seq);
                if duo.contains(&me) {
                    return decide(toy_move(&a.frame, me), "leading duo (criticality ignored)");
                }
                return decide(Action::Stay, "not in the leading duo");
            }
            if in_duo {
                // Substitute duo members sit on the frame sides DA and AB
                // and take the column step toward the largest corner.
                let (i, j) = a.frame.to_frame(me);
                return decide(
                    Action::MoveTo(a.frame.to_lab(i - 1, j)),
                    "critical: substitute duo column step",
                );
            }
            decide(Action::Stay, "critical: not in the substitute duo")
        }
        Tag::PurelyAsymmetric => {
            if in_duo {
                decide(toy_move(&a.frame, me), "leading duo step")
            } else {
                decide(Action::Stay, "not in the leading duo")
            }
        }
        Tag::Sym1 | Tag::Sym2 | Tag::AlmostSym1 | Tag::AlmostSym2 => {
            if in_duo {
                decide(
                    side_step(sub, me, a.target),
                    "symmetry duo moves along its side to its corner",
                )
            } else {
                decide(Action::Stay, "not in the symmetry duo")
            }
        }
        _ => decide(Action::Stay, "unrecognized no-corner tag"),
    }
}

/// First two occupied places of the governing sequence; a single place if
/// the first is a multiplicity.
fn plain_duo(frame: &Frame, seq: &[u8]) -> Vec<Pos> {
    let mut out = Vec::new();
    for (idx, &v) in seq.iter().enumerate() {
        if v > 0 {
            out.push(frame.pos_at(idx + 1));
            if v == 2 || out.len() == 2 {
                break;
            }
        }
    }
    out
}

/// One step toward `target` for a duo robot sitting on a boundary side. The
/// robot walks along its own side (around the perimeter when the side does
/// not end at the target corner), which keeps synchronized duo moves mirror
/// images of each other. Falls back to a framed step for interior robots.
fn side_step(sub: &Snapshot, me: Pos, target: Pos) -> Action {
    let dims = sub.dims;
    if me == target {
        return Action::Stay;
    }
    let toward = |a: usize, b: usize| if a < b { a + 1 } else { a - 1 };
    let on_row_side = me.row == 1 || me.row == dims.rows;
    let on_col_side = me.col == 1 || me.col == dims.cols;
    if on_row_side && me.row == target.row && me.col != target.col {
        return Action::MoveTo(Pos::new(me.row, toward(me.col, target.col)));
    }
    if on_col_side && me.col == target.col && me.row != target.row {
        return Action::MoveTo(Pos::new(toward(me.row, target.row), me.col));
    }
    if on_row_side && me.col != target.col {
        return Action::MoveTo(Pos::new(me.row, toward(me.col, target.col)));
    }
    if on_col_side && me.row != target.row {
        return Action::MoveTo(Pos::new(toward(me.row, target.row), me.col));
    }
    let frame = governing_frame_at(sub, target, me);
    move_toward(sub, &frame, me, target, true)
}

fn toy_move(frame: &Frame, me: Pos) -> Action {
    let (i, j) = frame.to_frame(me);
    let (ni, nj) = toy_step(frame, i, j);
    Action::MoveTo(frame.to_lab(ni, nj))
}

fn three_corner_action(
    sub: &Snapshot,
    me: Pos,
    mode: PolicyMode,
) -> Result<PolicyDecision, PolicyError> {
    let sel = match mode {
        PolicyMode::PerCase => match three_corner_percase(sub) {
            Some(sel) => sel,
            None => return decide(Action::Stay, "three corners: no mover selection"),
        },
        PolicyMode::Unified => {
            let (subclass, movers) = three_corner_unified(sub);
            if subclass == ThreeCornerSub::C6 {
                return Err(PolicyError::Rejected3C6);
            }
            movers.expect("non-3C6 subclasses always select movers")
        }
    };
    if !sel.contains(me) {
        return decide(Action::Stay, "three corners: not a mover");
    }
    match sel.target {
        Some(t) => {
            let frame = governing_frame_at(sub, t, me);
            decide(
                move_toward(sub, &frame, me, t, true),
                "three corners: moving to the rally corner",
            )
        }
        None => decide(
            step_off_boundary(sub, me),
            "three corners: stepping off the boundary",
        ),
    }
}

/// The perpendicular step away from the boundary side holding `me`.
/// Only called for non-corner boundary robots, where the side is unique.
fn step_off_boundary(sub: &Snapshot, me: Pos) -> Action {
    let dims = sub.dims;
    if me.row == 1 {
        Action::MoveTo(Pos::new(2, me.col))
    } else if me.row == dims.rows {
        Action::MoveTo(Pos::new(dims.rows - 1, me.col))
    } else if me.col == 1 {
        Action::MoveTo(Pos::new(me.row, 2))
    } else if me.col == dims.cols {
        Action::MoveTo(Pos::new(me.row, dims.cols - 1))
    } else {
        Action::Stay
    }
}

fn four_corner_action(
    sub: &Snapshot,
    me: Pos,
    variant: PolicyVariant,
) -> Result<PolicyDecision, PolicyError> {
    let a = four_corner_analysis(sub).map_err(reject)?;
    match a.sub {
        FourCornerSub::BoundaryRich => {
            // Corner robots hold; the rest replays the no-corner strategy on
            // the corner-masked configuration.
            if sub.dims.is_corner(me) {
                return decide(Action::Stay, "four corners: holding a corner");
            }
            let mut masked = sub.clone();
            for c in sub.dims.corners() {
                masked.set(c, 0);
            }
            let inner = a.masked.expect("boundary-rich carries the masked analysis");
            no_corner_action(&masked, &inner, me, variant)
        }
        FourCornerSub::FiveRobots | FourCornerSub::InteriorOnly => {
            if !a.movers.contains(me) {
                return decide(Action::Stay, "four corners: not a mover");
            }
            let t = a.movers.target.expect("corner-rally cases have a target");
            let frame = governing_frame_at(sub, t, me);
            decide(
                move_toward(sub, &frame, me, t, true),
                "four corners: moving to the rally corner",
            )
        }
    }
}

// ---------------------------------------------------------------------------
// Movement primitives
// ---------------------------------------------------------------------------

/// A single Manhattan-reducing step from `me` toward `target`. When two steps
/// reduce the distance, the one along the governing frame's scan axis wins,
/// so mirror-image robots take mirror-image steps. With `avoid_corners`,
/// steps landing on a corner other than the target are discarded; if nothing
/// remains the robot stays put.
pub fn move_toward(
    snap: &Snapshot,
    frame: &Frame,
    me: Pos,
    target: Pos,
    avoid_corners: bool,
) -> Action {
    if me == target {
        return Action::Stay;
    }
    let mut candidates: Vec<Pos> = Vec::with_capacity(2);
    for (dr, dc) in [(-1i32, 0i32), (1, 0), (0, -1), (0, 1)] {
        let r = me.row as i32 + dr;
        let c = me.col as i32 + dc;
        if r < 1 || c < 1 {
            continue;
        }
        let p = Pos::new(r as usize, c as usize);
        if !snap.dims.contains(p) || p.manhattan(target) >= me.manhattan(target) {
            continue;
        }
        if avoid_corners && snap.dims.is_corner(p) && p != target {
            continue;
        }
        candidates.push(p);
    }
    let vertical = frame.down_axis_vertical();
    candidates
        .iter()
        .find(|p| if vertical { p.row != me.row } else { p.col != me.col })
        .or_else(|| candidates.first())
        .map(|&p| Action::MoveTo(p))
        .unwrap_or(Action::Stay)
}

/// The governing frame for a robot heading to a corner: the anchored frame
/// with the larger sequence; on ties, the one scanning the robot earlier.
fn governing_frame_at(snap: &Snapshot, corner: Pos, me: Pos) -> Frame {
    let [f1, f2] = Frame::anchored_frames(snap.dims, corner);
    let s1 = f1.scan(snap);
    let s2 = f2.scan(snap);
    match s1.cmp(&s2) {
        std::cmp::Ordering::Greater => f1,
        std::cmp::Ordering::Less => f2,
        std::cmp::Ordering::Equal => {
            if f1.index_of(me) <= f2.index_of(me) {
                f1
            } else {
                f2
            }
        }
    }
}

/// The globally governing frame: maximal sequence over all eight frames,
/// ties broken by scanning the robot earlier, then by enumeration order.
fn global_governing_frame(snap: &Snapshot, me: Pos) -> Frame {
    let scans: Vec<(Frame, Vec<u8>)> = Frame::all(snap.dims)
        .into_iter()
        .map(|(_, _, f)| {
            let s = f.scan(snap);
            (f, s)
        })
        .collect();
    let best = scans.iter().map(|(_, s)| s.clone()).max().unwrap();
    scans
        .iter()
        .filter(|(_, s)| *s == best)
        .min_by_key(|(f, _)| f.index_of(me))
        .map(|&(f, _)| f)
        .unwrap()
}
