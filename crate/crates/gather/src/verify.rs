//! Exhaustive small-instance verification: a bounded adversary game over
//! robot positions, pending actions, crash budget, and fairness clocks.
//! Every fair maximal play must gather; exact-state cycles are livelocks.

use std::collections::HashSet;

use crate::classify::{classify, Tag, ThreeCornerSub};
use crate::grid::{
    gathering_accomplished, project_snapshot, Action, GridDims, Pos, Snapshot, WorldState,
};
use crate::policy::{compute_action_variant, PolicyMode, PolicyVariant};
use crate::sim::{Decision, Engine, Outcome, Trace};
use crate::symmetry::SymmetryKind;

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub crash_budget: u8,
    pub window: usize,
    pub depth_limit: usize,
    pub mode: PolicyMode,
    pub variant: PolicyVariant,
}

impl VerifyOptions {
    pub fn new(crash_budget: u8, window: usize) -> Self {
        VerifyOptions {
            crash_budget,
            window,
            depth_limit: 5_000,
            mode: PolicyMode::Unified,
            variant: PolicyVariant::Standard,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Verdict {
    AllGathered { states: usize, max_depth: usize },
    /// A fair maximal play that never gathers: either a reachable exact-state
    /// cycle or a stuck state the policy cannot leave.
    Counterexample { decisions: Vec<Decision>, trace: Trace },
    Inconclusive { states: usize },
    Rejected { reason: String },
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
enum Status {
    Idle,
    Pending(Pos),
    Crashed,
}

/// Full adversary-game state. Robots are anonymous, so states are compared
/// through the sorted per-robot tuples.
#[derive(Clone)]
struct GState {
    robots: Vec<(Pos, Status)>,
    clocks: Vec<u16>,
    budget: u8,
}

type Key = (Vec<(Pos, Status, u16)>, u8);

impl GState {
    fn from_world(world: &WorldState, budget: u8) -> Self {
        GState {
            robots: world
                .robots
                .iter()
                .map(|r| {
                    let status = if r.crashed {
                        Status::Crashed
                    } else {
                        match r.pending {
                            Some(Action::MoveTo(p)) => Status::Pending(p),
                            _ => Status::Idle,
                        }
                    };
                    (r.pos, status)
                })
                .collect(),
            clocks: vec![0; world.robot_count()],
            budget,
        }
    }

    fn key(&self) -> Key {
        let mut rs: Vec<(Pos, Status, u16)> = self
            .robots
            .iter()
            .zip(&self.clocks)
            .map(|(&(p, s), &c)| (p, s, c))
            .collect();
        rs.sort();
        (rs, self.budget)
    }

    fn snapshot(&self, dims: GridDims) -> Snapshot {
        let mut snap = Snapshot::empty(dims);
        for &(p, _) in &self.robots {
            let v = snap.get(p);
            snap.set(p, (v + 1).min(2));
        }
        snap
    }

    fn idle(&self) -> Vec<usize> {
        (0..self.robots.len())
            .filter(|&i| self.robots[i].1 == Status::Idle)
            .collect()
    }

    fn pending(&self) -> Vec<usize> {
        (0..self.robots.len())
            .filter(|&i| matches!(self.robots[i].1, Status::Pending(_)))
            .collect()
    }

    /// Terminal success: no pending stale moves, and the snapshot is
    /// gathered with any two-site split pinned by a crashed singleton.
    fn gathered(&self, dims: GridDims) -> bool {
        if self.pending().iter().any(|&i| self.robots[i].1 != Status::Crashed) {
            return false;
        }
        let snap = self.snapshot(dims);
        if !gathering_accomplished(&snap) {
            return false;
        }
        let occ: Vec<(Pos, u8)> = snap.occupied().collect();
        if occ.len() == 1 {
            return true;
        }
        let singleton = if occ[0].1 == 1 { occ[0].0 } else { occ[1].0 };
        self.robots
            .iter()
            .any(|&(p, s)| p == singleton && s == Status::Crashed)
            && self.robots.iter().filter(|&&(p, _)| p == singleton).count() == 1
    }
}

struct Search {
    dims: GridDims,
    opts: VerifyOptions,
    memo: HashSet<Key>,
    on_path: HashSet<Key>,
    decisions: Vec<Decision>,
    counter: Option<Vec<Decision>>,
    depth_exceeded: bool,
    max_depth: usize,
}

impl Search {
    /// Returns true when the subtree is fully verified (memoizable).
    fn explore(&mut self, st: &GState, depth: usize) -> bool {
        if self.counter.is_some() {
            return false;
        }
        self.max_depth = self.max_depth.max(depth);
        let key = st.key();
        if self.memo.contains(&key) {
            return true;
        }
        if self.on_path.contains(&key) {
            // The adversary can repeat this loop forever; every robot is
            // served inside it (a starving robot's clock would differ), so
            // the play is fair and never gathers.
            self.counter = Some(self.decisions.clone());
            return false;
        }
        if st.gathered(self.dims) {
            self.memo.insert(key);
            return true;
        }
        if depth >= self.opts.depth_limit {
            self.depth_exceeded = true;
            return false;
        }

        let snap = st.snapshot(self.dims);
        let idle = st.idle();
        let pending = st.pending();
        // Policy decisions are state-level: compute once per idle robot. A
        // rejection (e.g. a partitive state) dooms every Activate branch.
        let mut actions: Vec<Option<Action>> = vec![None; st.robots.len()];
        let mut policy_stuck = false;
        for &i in &idle {
            match compute_action_variant(&snap, st.robots[i].0, self.opts.mode, self.opts.variant) {
                Ok(d) => actions[i] = Some(d.action),
                Err(_) => {
                    policy_stuck = true;
                    break;
                }
            }
        }
        if policy_stuck && pending.is_empty() {
            // Nothing can ever change: idle robots cannot compute and there
            // are no stale moves left to shake the state loose.
            self.counter = Some(self.decisions.clone());
            return false;
        }

        self.on_path.insert(key.clone());
        let mut complete = true;
        let visit = |s: &mut Search, st2: GState, d: Decision| -> bool {
            s.decisions.push(d);
            let ok = s.explore(&st2, depth + 1);
            s.decisions.pop();
            ok
        };

        // Activate subsets (skipped entirely when the policy is stuck).
        if !policy_stuck {
            for mask in 1u32..(1 << idle.len()) {
                let set: Vec<usize> = idle
                    .iter()
                    .enumerate()
                    .filter(|&(b, _)| mask & (1 << b) != 0)
                    .map(|(_, &i)| i)
                    .collect();
                if let Some(st2) = self.apply_activate(st, &set, &actions) {
                    complete &= visit(self, st2, Decision::Activate(set));
                } // inadmissible: someone would starve past the window
                if self.counter.is_some() {
                    break;
                }
            }
        }
        // Execute subsets.
        if self.counter.is_none() {
            for mask in 1u32..(1 << pending.len()) {
                let set: Vec<usize> = pending
                    .iter()
                    .enumerate()
                    .filter(|&(b, _)| mask & (1 << b) != 0)
                    .map(|(_, &i)| i)
                    .collect();
                if let Some(st2) = self.apply_execute(st, &set) {
                    complete &= visit(self, st2, Decision::Execute(set));
                }
                if self.counter.is_some() {
                    break;
                }
            }
        }
        // Crash.
        if self.counter.is_none() && st.budget > 0 {
            for i in 0..st.robots.len() {
                if st.robots[i].1 == Status::Crashed {
                    continue;
                }
                if let Some(st2) = self.apply_crash(st, i) {
                    complete &= visit(self, st2, Decision::Crash(i));
                }
                if self.counter.is_some() {
                    break;
                }
            }
        }
        self.on_path.remove(&key);
        if self.counter.is_some() {
            return false;
        }
        if complete {
            self.memo.insert(key);
        }
        complete
    }

    /// Advances clocks after a turn serving `served`; `None` when the turn
    /// would push a live robot past the fairness window (inadmissible).
    fn tick(&self, st: &mut GState, served: &[usize]) -> bool {
        for i in 0..st.clocks.len() {
            if st.robots[i].1 == Status::Crashed || served.contains(&i) {
                st.clocks[i] = 0;
            } else {
                st.clocks[i] += 1;
                if st.clocks[i] as usize > self.opts.window {
                    return false;
                }
            }
        }
        true
    }

    fn apply_activate(
        &self,
        st: &GState,
        set: &[usize],
        actions: &[Option<Action>],
    ) -> Option<GState> {
        let mut st2 = st.clone();
        for &i in set {
            match actions[i].expect("idle robot has a computed action") {
                Action::Stay => {}
                Action::MoveTo(p) => st2.robots[i].1 = Status::Pending(p),
            }
        }
        self.tick(&mut st2, set).then_some(st2)
    }

    fn apply_execute(&self, st: &GState, set: &[usize]) -> Option<GState> {
        let mut st2 = st.clone();
        for &i in set {
            let Status::Pending(p) = st2.robots[i].1 else {
                unreachable!("execute set drawn from pending robots")
            };
            st2.robots[i] = (p, Status::Idle);
        }
        self.tick(&mut st2, set).then_some(st2)
    }

    fn apply_crash(&self, st: &GState, i: usize) -> Option<GState> {
        let mut st2 = st.clone();
        st2.robots[i].1 = Status::Crashed;
        st2.budget -= 1;
        self.tick(&mut st2, &[i]).then_some(st2)
    }
}

pub fn verify_gatherable(world0: &WorldState, opts: &VerifyOptions) -> Verdict {
    if world0.robot_count() < 3 {
        return Verdict::Rejected {
            reason: "fewer than 3 robots".into(),
        };
    }
    let cls = classify(&project_snapshot(world0));
    let reason = match cls.tag {
        Tag::Partitive => Some("partitive"),
        Tag::TwoS2 => Some("two-s2"),
        Tag::Unsupported => Some("unsupported-grid"),
        Tag::ThreeCorners(ThreeCornerSub::C6) if opts.mode == PolicyMode::Unified => {
            Some("three-corner subclass 3C6")
        }
        _ => None,
    };
    if let Some(reason) = reason {
        return Verdict::Rejected {
            reason: reason.into(),
        };
    }
    let mut search = Search {
        dims: world0.dims,
        opts: *opts,
        memo: HashSet::new(),
        on_path: HashSet::new(),
        decisions: Vec::new(),
        counter: None,
        depth_exceeded: false,
        max_depth: 0,
    };
    let root = GState::from_world(world0, opts.crash_budget);
    let complete = search.explore(&root, 0);
    if let Some(decisions) = search.counter {
        let trace = replay(world0, &decisions, opts);
        return Verdict::Counterexample { decisions, trace };
    }
    if complete && !search.depth_exceeded {
        Verdict::AllGathered {
            states: search.memo.len(),
            max_depth: search.max_depth,
        }
    } else {
        Verdict::Inconclusive {
            states: search.memo.len(),
        }
    }
}

/// Replays a decision sequence through the simulator engine to produce a
/// shareable trace for a counterexample.
fn replay(world0: &WorldState, decisions: &[Decision], opts: &VerifyOptions) -> Trace {
    let mut eng = Engine::new(world0.clone(), opts.mode, opts.variant, opts.window);
    let mut reason = "livelock: reachable fair cycle that never gathers".to_string();
    for d in decisions {
        if let Err(e) = eng.apply(d.clone()) {
            reason = e.to_string();
            break;
        }
    }
    // The stuck-state case: idle robots whose compute is rejected.
    if !decisions.is_empty() || eng.outcome_if_terminal().is_none() {
        let snap = eng.snapshot();
        if eng.pending_robots().is_empty() && !gathering_accomplished(&snap) {
            if let Some(&i) = eng.idle_robots().first() {
                let pos = eng.world.robots[i].pos;
                if let Err(e) = compute_action_variant(&snap, pos, opts.mode, opts.variant) {
                    reason = format!("stuck: {}", e);
                }
            }
        }
    }
    Trace {
        meta: crate::sim::TraceMeta {
            world_hash: verify_world_hash(world0),
            scheduler: crate::sim::SchedulerKind::Synchronous,
            policy_mode: opts.mode,
            policy_variant: opts.variant,
            crash_plan: crate::sim::CrashPlan::none(),
            max_steps: decisions.len(),
            fairness_window: opts.window,
            fairness_violations: eng.fairness_violations(),
        },
        events: eng.events().to_vec(),
        outcome: Outcome::Rejected { reason },
    }
}

fn verify_world_hash(world: &WorldState) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update(crate::grid::emit_world(world).as_bytes());
    let out = h.finalize();
    out[..8].iter().map(|b| format!("{:02x}", b)).collect()
}

// ---------------------------------------------------------------------------
// Configuration enumeration
// ---------------------------------------------------------------------------

/// All k-singleton initial worlds on `dims`, optionally filtered by
/// classification tag and deduplicated up to the grid's symmetry group.
pub fn enumerate_configs(
    dims: GridDims,
    k: usize,
    filter: Option<Tag>,
    dedup: bool,
) -> Vec<WorldState> {
    let nodes: Vec<Pos> = (1..=dims.rows)
        .flat_map(|r| (1..=dims.cols).map(move |c| Pos::new(r, c)))
        .collect();
    let mut seen: HashSet<Vec<Pos>> = HashSet::new();
    let mut out = Vec::new();
    let mut idx = vec![0usize; k];
    for combo in combinations(nodes.len(), k, &mut idx) {
        let positions: Vec<Pos> = combo.iter().map(|&i| nodes[i]).collect();
        if dedup {
            let canon = canonical_positions(dims, &positions);
            if !seen.insert(canon) {
                continue;
            }
        }
        let world = WorldState::from_positions(dims, &positions);
        if let Some(tag) = filter {
            if classify(&project_snapshot(&world)).tag != tag {
                continue;
            }
        }
        out.push(world);
    }
    out
}

/// Lexicographically least image of the position set under the grid's
/// applicable symmetries.
pub fn canonical_positions(dims: GridDims, positions: &[Pos]) -> Vec<Pos> {
    SymmetryKind::applicable(dims)
        .into_iter()
        .map(|sym| {
            let mut img: Vec<Pos> = positions.iter().map(|&p| sym.apply(dims, p)).collect();
            img.sort();
            img
        })
        .min()
        .unwrap()
}

/// Plain k-combination generator over 0..n, reusing `idx` as scratch.
fn combinations(n: usize, k: usize, idx: &mut [usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    for (i, v) in idx.iter_mut().enumerate() {
        *v = i;
    }
    loop {
        out.push(idx.to_vec());
        // Advance to the next combination.
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Burnside orbit count of k-subsets of nodes under the grid's symmetry
/// group: the independent oracle for symmetry deduplication.
pub fn orbit_count(dims: GridDims, k: usize) -> usize {
    let group = SymmetryKind::applicable(dims);
    let order = group.len();
    let mut total = 0usize;
    for &sym in &group {
        total += invariant_subsets(dims, sym, k);
    }
    total / order
}

/// Number of k-subsets fixed by one symmetry: subsets are unions of node
/// orbits, counted by a subset-sum over orbit sizes.
fn invariant_subsets(dims: GridDims, sym: SymmetryKind, k: usize) -> usize {
    let mut visited: HashSet<Pos> = HashSet::new();
    let mut orbit_sizes = Vec::new();
    for r in 1..=dims.rows {
        for c in 1..=dims.cols {
            let start = Pos::new(r, c);
            if visited.contains(&start) {
                continue;
            }
            let mut p = start;
            let mut size = 0;
            loop {
                visited.insert(p);
                size += 1;
                p = sym.apply(dims, p);
                if p == start {
                    break;
                }
            }
            orbit_sizes.push(size);
        }
    }
    let mut ways = vec![0usize; k + 1];
    ways[0] = 1;
    for s in orbit_sizes {
        for t in (s..=k).rev() {
            ways[t] += ways[t - s];
        }
    }
    ways[k]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn world(dims: (usize, usize), positions: &[(usize, usize)]) -> WorldState {
        let dims = GridDims::new(dims.0, dims.1).unwrap();
        let ps: Vec<Pos> = positions.iter().map(|&(r, c)| Pos::new(r, c)).collect();
        WorldState::from_positions(dims, &ps)
    }

    #[test]
    fn enumerate_counts_match_binomials_and_burnside() {
        let dims = GridDims::new(4, 4).unwrap();
        let raw = enumerate_configs(dims, 3, None, false);
        assert_eq!(raw.len(), 560); // C(16, 3)
        let dedup = enumerate_configs(dims, 3, None, true);
        assert_eq!(dedup.len(), orbit_count(dims, 3));
        assert!(dedup.len() < raw.len());
    }

    #[test]
    fn enumerate_filter_finds_known_tags() {
        let dims = GridDims::new(4, 4).unwrap();
        let partitive = enumerate_configs(dims, 2, Some(Tag::Partitive), false);
        assert!(!partitive.is_empty());
        let two_s2 = enumerate_configs(dims, 4, Some(Tag::TwoS2), false);
        assert!(two_s2.iter().any(|w| {
            let pos: HashSet<Pos> = w.robots.iter().map(|r| r.pos).collect();
            [(1, 1), (4, 4), (1, 2), (3, 4)]
                .iter()
                .all(|&(r, c)| pos.contains(&Pos::new(r, c)))
        }));
    }

    #[test]
    fn verifier_accepts_the_reference_instance() {
        let w = world((4, 4), &[(1, 1), (2, 3), (3, 2)]);
        match verify_gatherable(&w, &VerifyOptions::new(0, 8)) {
            Verdict::AllGathered { states, .. } => assert!(states > 0),
            v => panic!("expected AllGathered, got {:?}", v),
        }
        match verify_gatherable(&w, &VerifyOptions::new(1, 8)) {
            Verdict::AllGathered { .. } => {}
            v => panic!("expected AllGathered with crash budget, got {:?}", v),
        }
    }

    #[test]
    fn verifier_rejects_excluded_inputs() {
        let partitive = world((4, 4), &[(1, 2), (1, 3), (3, 2), (3, 3)]);
        assert!(matches!(
            verify_gatherable(&partitive, &VerifyOptions::new(0, 8)),
            Verdict::Rejected { ref reason } if reason == "partitive"
        ));
        let two_s2 = world((4, 4), &[(1, 1), (4, 4), (1, 2), (3, 4)]);
        assert!(matches!(
            verify_gatherable(&two_s2, &VerifyOptions::new(0, 8)),
            Verdict::Rejected { ref reason } if reason == "two-s2"
        ));
    }

    #[test]
    fn naive_variant_fails_on_a_critical_configuration() {
        // Find a critical configuration, then verify the negative control
        // produces a counterexample there while the standard policy passes.
        let dims = GridDims::new(6, 6).unwrap();
        let w = enumerate_configs(dims, 3, Some(Tag::Critical), true)
            .into_iter()
            .next()
            .expect("a critical configuration exists on 6x6");
        let mut naive = VerifyOptions::new(0, 12);
        naive.variant = PolicyVariant::NaiveNoCritical;
        naive.depth_limit = 2_000;
        match verify_gatherable(&w, &naive) {
            Verdict::Counterexample { trace, .. } => {
                assert!(matches!(trace.outcome, Outcome::Rejected { .. }));
            }
            v => panic!("expected Counterexample for the naive variant, got {:?}", v),
        }
        let mut std_opts = VerifyOptions::new(0, 12);
        std_opts.depth_limit = 2_000;
        assert!(matches!(
            verify_gatherable(&w, &std_opts),
            Verdict::AllGathered { .. }
        ));
    }

    #[test]
    fn budget_zero_accepts_whatever_budget_one_accepts() {
        // Spot-check the monotonicity invariant on a handful of instances.
        let dims = GridDims::new(4, 4).unwrap();
        let sample = enumerate_configs(dims, 3, None, true);
        for w in sample.iter().take(12) {
            let b1 = verify_gatherable(w, &VerifyOptions::new(1, 8));
            if matches!(b1, Verdict::AllGathered { .. }) {
                let b0 = verify_gatherable(w, &VerifyOptions::new(0, 8));
                assert!(
                    matches!(b0, Verdict::AllGathered { .. }),
                    "budget 0 must accept when budget 1 does: {:?}",
                    b0
                );
            }
        }
    }
}
