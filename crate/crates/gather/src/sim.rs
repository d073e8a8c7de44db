//! Asynchronous Look-Compute-Move execution engine: stale-snapshot pending
//! moves, single-crash injection, fairness bookkeeping, and deterministic
//! seeded schedulers producing replayable traces.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::classify::{classify, Tag, ThreeCornerSub};
use crate::grid::{
    emit_world, gathering_accomplished, project_snapshot, Action, GridDims, Pos, Snapshot,
    WorldState,
};
use crate::policy::{compute_action_variant, PolicyMode, PolicyVariant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchedulerKind {
    /// Lock-step rounds: everyone looks, then everyone moves.
    Synchronous,
    /// Random nonempty activation/execution sets each turn.
    RandomAsync { seed: u64 },
    /// Delays one victim maximally and executes pending moves in bulk,
    /// targeting the failure modes crash tolerance must survive.
    AdversarialHeuristic { seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrashTarget {
    None,
    Robot(usize),
    Random,
    /// Prefers a robot with a pending move at the crash instant; defers the
    /// crash until one exists.
    Adversarial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrashPlan {
    pub target: CrashTarget,
    /// Engine-step index; `None` draws one from the plan seed.
    pub instant: Option<usize>,
    pub seed: u64,
}

impl CrashPlan {
    pub fn none() -> Self {
        CrashPlan {
            target: CrashTarget::None,
            instant: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("crash budget exhausted")]
    CrashBudgetExhausted,
    #[error("robot {0} has already crashed")]
    RobotAlreadyCrashed(usize),
    #[error("execute set is empty")]
    EmptyExecuteSet,
    #[error("policy rejected the configuration: {0}")]
    PolicyRejected(String),
}

/// One adversary/scheduler turn.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    /// Each listed idle robot atomically looks and computes.
    Activate(Vec<usize>),
    /// All listed pending robots move simultaneously.
    Execute(Vec<usize>),
    Crash(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub step: usize,
    /// "look" | "stay" | "move" | "crash".
    pub kind: String,
    pub robots: Vec<usize>,
    /// Move targets, parallel to `robots`; empty for other kinds.
    pub targets: Vec<Pos>,
    /// Snapshot digest for look/stay events.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result")]
pub enum Outcome {
    Gathered {
        node: Pos,
        steps: usize,
    },
    TwoSiteDone {
        singleton: Pos,
        multiplicity: Pos,
        steps: usize,
    },
    StepLimitExceeded,
    Rejected {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub world_hash: String,
    pub scheduler: SchedulerKind,
    pub policy_mode: PolicyMode,
    pub policy_variant: PolicyVariant,
    pub crash_plan: CrashPlan,
    pub max_steps: usize,
    pub fairness_window: usize,
    pub fairness_violations: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub meta: TraceMeta,
    pub events: Vec<Event>,
    pub outcome: Outcome,
}

pub fn default_max_steps(dims: GridDims, k: usize) -> usize {
    10 * dims.rows * dims.cols * k
}

pub fn default_fairness_window(k: usize) -> usize {
    4 * k
}

/// Truncated hex digest of a snapshot's cell matrix; stable across runs.
pub fn snapshot_digest(snap: &Snapshot) -> String {
    let mut h = Sha256::new();
    h.update(snap.dims.rows.to_le_bytes());
    h.update(snap.dims.cols.to_le_bytes());
    h.update(snap.cells());
    hex16(&h.finalize())
}

fn world_hash(world: &WorldState) -> String {
    let mut h = Sha256::new();
    h.update(emit_world(world).as_bytes());
    hex16(&h.finalize())
}

fn hex16(bytes: &[u8]) -> String {
    bytes[..8].iter().map(|b| format!("{:02x}", b)).collect()
}

/// Single-threaded deterministic engine. One `apply` call is one adversary
/// turn; fairness clocks advance for every robot not receiving an event.
pub struct Engine {
    pub world: WorldState,
    mode: PolicyMode,
    variant: PolicyVariant,
    crash_budget: u8,
    window: usize,
    clocks: Vec<usize>,
    step: usize,
    events: Vec<Event>,
    fairness_violations: usize,
}

impl Engine {
    pub fn new(world: WorldState, mode: PolicyMode, variant: PolicyVariant, window: usize) -> Self {
        let k = world.robot_count();
        Engine {
            world,
            mode,
            variant,
            crash_budget: 1,
            window,
            clocks: vec![0; k],
            step: 0,
            events: Vec::new(),
            fairness_violations: 0,
        }
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn fairness_violations(&self) -> usize {
        self.fairness_violations
    }

    pub fn snapshot(&self) -> Snapshot {
        project_snapshot(&self.world)
    }

    pub fn idle_robots(&self) -> Vec<usize> {
        (0..self.world.robot_count())
            .filter(|&i| {
                let r = &self.world.robots[i];
                !r.crashed && r.pending.is_none()
            })
            .collect()
    }

    pub fn pending_robots(&self) -> Vec<usize> {
        (0..self.world.robot_count())
            .filter(|&i| !self.world.robots[i].crashed && self.world.robots[i].pending.is_some())
            .collect()
    }

    /// Robots the fairness window is about to starve; schedulers must serve
    /// these first.
    pub fn urgent_robots(&self) -> Vec<usize> {
        let threshold = self.window.saturating_sub(2);
        (0..self.world.robot_count())
            .filter(|&i| !self.world.robots[i].crashed && self.clocks[i] >= threshold)
            .collect()
    }

    pub fn apply(&mut self, decision: Decision) -> Result<(), SimError> {
        let mut served: Vec<usize> = Vec::new();
        match decision {
            Decision::Activate(set) => {
                let snap = self.snapshot();
                let digest = snapshot_digest(&snap);
                let mut looked: Vec<usize> = Vec::new();
                let mut targets: Vec<Pos> = Vec::new();
                let mut stayed: Vec<usize> = Vec::new();
                for idx in set {
                    let r = &self.world.robots[idx];
                    if r.crashed || r.pending.is_some() {
                        continue;
                    }
                    let d = compute_action_variant(&snap, r.pos, self.mode, self.variant)
                        .map_err(|e| SimError::PolicyRejected(e.to_string()))?;
                    match d.action {
                        Action::Stay => stayed.push(idx),
                        Action::MoveTo(p) => {
                            self.world.robots[idx].pending = Some(Action::MoveTo(p));
                            looked.push(idx);
                            targets.push(p);
                        }
                    }
                }
                served.extend(&looked);
                served.extend(&stayed);
                if !looked.is_empty() {
                    self.events.push(Event {
                        step: self.step,
                        kind: "look".into(),
                        robots: looked,
                        targets,
                        snapshot: Some(digest.clone()),
                    });
                }
                if !stayed.is_empty() {
                    self.events.push(Event {
                        step: self.step,
                        kind: "stay".into(),
                        robots: stayed,
                        targets: Vec::new(),
                        snapshot: Some(digest),
                    });
                }
            }
            Decision::Execute(set) => {
                let mut moved: Vec<usize> = Vec::new();
                let mut targets: Vec<Pos> = Vec::new();
                for idx in set {
                    let r = &self.world.robots[idx];
                    if r.crashed {
                        continue;
                    }
                    if let Some(Action::MoveTo(p)) = r.pending {
                        moved.push(idx);
                        targets.push(p);
                    }
                }
                if moved.is_empty() {
                    return Err(SimError::EmptyExecuteSet);
                }
                // Simultaneous execution: all relocations happen against the
                // same pre-state, which relocate() preserves since targets
                // were fixed at COMPUTE time.
                for (&idx, &p) in moved.iter().zip(&targets) {
                    self.world.relocate(idx, p);
                    self.world.robots[idx].pending = None;
                }
                served.extend(&moved);
                self.events.push(Event {
                    step: self.step,
                    kind: "move".into(),
                    robots: moved,
                    targets,
                    snapshot: None,
                });
            }
            Decision::Crash(idx) => {
                if self.crash_budget == 0 {
                    return Err(SimError::CrashBudgetExhausted);
                }
                if self.world.robots[idx].crashed {
                    return Err(SimError::RobotAlreadyCrashed(idx));
                }
                self.crash_budget = 0;
                self.world.robots[idx].crashed = true;
                self.world.robots[idx].pending = None;
                served.push(idx);
                self.events.push(Event {
                    step: self.step,
                    kind: "crash".into(),
                    robots: vec![idx],
                    targets: Vec::new(),
                    snapshot: None,
                });
            }
        }
        self.step += 1;
        for i in 0..self.clocks.len() {
            if self.world.robots[i].crashed {
                self.clocks[i] = 0;
            } else if served.contains(&i) {
                self.clocks[i] = 0;
            } else {
                self.clocks[i] += 1;
                if self.clocks[i] > self.window {
                    self.fairness_violations += 1;
                }
            }
        }
        Ok(())
    }

    /// Terminal outcome, if any. Requires all pending moves flushed so the
    /// reported final state cannot be disturbed by stale executions.
    pub fn outcome_if_terminal(&self) -> Option<Outcome> {
        if self
            .world
            .robots
            .iter()
            .any(|r| !r.crashed && r.pending.is_some())
        {
            return None;
        }
        let snap = self.snapshot();
        if !gathering_accomplished(&snap) {
            return None;
        }
        let occ: Vec<(Pos, u8)> = snap.occupied().collect();
        if occ.len() == 1 {
            return Some(Outcome::Gathered {
                node: occ[0].0,
                steps: self.step,
            });
        }
        let (singleton, multiplicity) = if occ[0].1 == 1 {
            (occ[0].0, occ[1].0)
        } else {
            (occ[1].0, occ[0].0)
        };
        // Two sites are final only when the lone robot at the singleton has
        // crashed; a live singleton keeps walking toward the multiplicity.
        let lone_crashed = self
            .world
            .robots
            .iter()
            .any(|r| r.crashed && r.pos == singleton)
            && self.world.count_at(singleton) == 1;
        if lone_crashed {
            Some(Outcome::TwoSiteDone {
                singleton,
                multiplicity,
                steps: self.step,
            })
        } else {
            None
        }
    }
}

/// Stateful wrapper producing one fair decision per turn.
pub struct Scheduler {
    kind: SchedulerKind,
    rng: Option<ChaCha8Rng>,
    victim: Option<usize>,
    sync_execute: bool,
}

impl Scheduler {
    pub fn new(kind: SchedulerKind) -> Self {
        let rng = match kind {
            SchedulerKind::Synchronous => None,
            SchedulerKind::RandomAsync { seed } | SchedulerKind::AdversarialHeuristic { seed } => {
                Some(ChaCha8Rng::seed_from_u64(seed))
            }
        };
        Scheduler {
            kind,
            rng,
            victim: None,
            sync_execute: false,
        }
    }

    pub fn decide(&mut self, eng: &Engine) -> Decision {
        let idle = eng.idle_robots();
        let pending = eng.pending_robots();
        // Serve starving robots first, regardless of strategy.
        let urgent = eng.urgent_robots();
        if !urgent.is_empty() {
            let urgent_pending: Vec<usize> = urgent
                .iter()
                .copied()
                .filter(|i| pending.contains(i))
                .collect();
            if !urgent_pending.is_empty() {
                return Decision::Execute(urgent_pending);
            }
            return Decision::Activate(urgent);
        }
        match self.kind {
            SchedulerKind::Synchronous => {
                if self.sync_execute && !pending.is_empty() {
                    self.sync_execute = false;
                    Decision::Execute(pending)
                } else {
                    self.sync_execute = true;
                    if idle.is_empty() {
                        self.sync_execute = false;
                        Decision::Execute(pending)
                    } else {
                        Decision::Activate(idle)
                    }
                }
            }
            SchedulerKind::RandomAsync { .. } => {
                let rng = self.rng.as_mut().unwrap();
                let pick_execute = !pending.is_empty() && (idle.is_empty() || rng.gen_bool(0.5));
                if pick_execute {
                    Decision::Execute(random_subset(rng, &pending))
                } else {
                    Decision::Activate(random_subset(rng, &idle))
                }
            }
            SchedulerKind::AdversarialHeuristic { .. } => {
                let rng = self.rng.as_mut().unwrap();
                let victim = *self
                    .victim
                    .get_or_insert_with(|| rng.gen_range(0..eng.world.robot_count()));
                // Execute every pending move at once (simultaneity is the
                // adversary's weapon), starving the victim as long as the
                // fairness window allows.
                let bulk: Vec<usize> = pending.iter().copied().filter(|&i| i != victim).collect();
                if !bulk.is_empty() {
                    return Decision::Execute(bulk);
                }
                let others: Vec<usize> = idle.iter().copied().filter(|&i| i != victim).collect();
                if !others.is_empty() {
                    return Decision::Activate(others);
                }
                if pending.contains(&victim) {
                    Decision::Execute(vec![victim])
                } else {
                    Decision::Activate(vec![victim])
                }
            }
        }
    }
}

fn random_subset(rng: &mut ChaCha8Rng, pool: &[usize]) -> Vec<usize> {
    debug_assert!(!pool.is_empty());
    let mut out: Vec<usize> = pool.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    if out.is_empty() {
        out.push(pool[rng.gen_range(0..pool.len())]);
    }
    out
}

fn rejection_reason(tag: Tag) -> Option<&'static str> {
    match tag {
        Tag::Partitive => Some("partitive"),
        Tag::TwoS2 => Some("two-s2"),
        Tag::Unsupported => Some("unsupported-grid"),
        _ => None,
    }
}

pub fn run(
    world0: &WorldState,
    scheduler: SchedulerKind,
    crash: &CrashPlan,
    mode: PolicyMode,
    variant: PolicyVariant,
    max_steps: usize,
    window: usize,
) -> Trace {
    let meta = |violations| TraceMeta {
        world_hash: world_hash(world0),
        scheduler,
        policy_mode: mode,
        policy_variant: variant,
        crash_plan: *crash,
        max_steps,
        fairness_window: window,
        fairness_violations: violations,
    };
    let rejected = |reason: String| Trace {
        meta: meta(0),
        events: Vec::new(),
        outcome: Outcome::Rejected { reason },
    };
    if world0.robot_count() < 3 {
        return rejected("fewer than 3 robots".into());
    }
    let cls = classify(&project_snapshot(world0));
    if let Some(reason) = rejection_reason(cls.tag) {
        return rejected(reason.into());
    }
    if mode == PolicyMode::Unified && cls.tag == Tag::ThreeCorners(ThreeCornerSub::C6) {
        return rejected("three-corner subclass 3C6".into());
    }

    let mut crash_rng = ChaCha8Rng::seed_from_u64(crash.seed);
    let crash_at = match crash.target {
        CrashTarget::None => usize::MAX,
        _ => crash
            .instant
            .unwrap_or_else(|| crash_rng.gen_range(0..(max_steps / 4).max(1))),
    };

    let mut eng = Engine::new(world0.clone(), mode, variant, window);
    let mut sched = Scheduler::new(scheduler);
    let mut crash_done = false;
    loop {
        if let Some(outcome) = eng.outcome_if_terminal() {
            return Trace {
                meta: meta(eng.fairness_violations()),
                events: eng.events().to_vec(),
                outcome,
            };
        }
        if eng.step_index() >= max_steps {
            return Trace {
                meta: meta(eng.fairness_violations()),
                events: eng.events().to_vec(),
                outcome: Outcome::StepLimitExceeded,
            };
        }
        let decision = if !crash_done && eng.step_index() >= crash_at {
            match resolve_crash_target(crash.target, &eng, &mut crash_rng) {
                Some(victim) => {
                    crash_done = true;
                    Decision::Crash(victim)
                }
                None => sched.decide(&eng),
            }
        } else {
            sched.decide(&eng)
        };
        if let Err(e) = eng.apply(decision) {
            return Trace {
                meta: meta(eng.fairness_violations()),
                events: eng.events().to_vec(),
                outcome: Outcome::Rejected {
                    reason: e.to_string(),
                },
            };
        }
    }
}

/// The robot to crash, or `None` to defer (adversarial plans wait for a
/// pending mover).
fn resolve_crash_target(
    target: CrashTarget,
    eng: &Engine,
    rng: &mut ChaCha8Rng,
) -> Option<usize> {
    let alive: Vec<usize> = (0..eng.world.robot_count())
        .filter(|&i| !eng.world.robots[i].crashed)
        .collect();
    match target {
        CrashTarget::None => None,
        CrashTarget::Robot(i) => alive.contains(&i).then_some(i),
        CrashTarget::Random => Some(alive[rng.gen_range(0..alive.len())]),
        CrashTarget::Adversarial => {
            let pending = eng.pending_robots();
            if pending.is_empty() {
                None
            } else {
                Some(pending[rng.gen_range(0..pending.len())])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridDims;

    fn world(dims: (usize, usize), positions: &[(usize, usize)]) -> WorldState {
        let dims = GridDims::new(dims.0, dims.1).unwrap();
        let ps: Vec<Pos> = positions.iter().map(|&(r, c)| Pos::new(r, c)).collect();
        WorldState::from_positions(dims, &ps)
    }

    #[test]
    fn synchronous_odd_grid_gathers_at_center() {
        let w = world((5, 5), &[(1, 2), (4, 5), (3, 1)]);
        let t = run(
            &w,
            SchedulerKind::Synchronous,
            &CrashPlan::none(),
            PolicyMode::Unified,
            PolicyVariant::Standard,
            default_max_steps(w.dims, 3),
            default_fairness_window(3),
        );
        match t.outcome {
            Outcome::Gathered { node, .. } => assert_eq!(node, Pos::new(3, 3)),
            o => panic!("expected Gathered, got {:?}", o),
        }
        assert_eq!(t.meta.fairness_violations, 0);
    }

    #[test]
    fn stale_pending_move_executes_against_the_old_view() {
        // Robot 0 computes, then robot 1 completes a full cycle changing the
        // world; robot 0's later execution still uses the stored target.
        let w = world((5, 5), &[(1, 2), (4, 5), (3, 1)]);
        let mut eng = Engine::new(w, PolicyMode::Unified, PolicyVariant::Standard, 100);
        eng.apply(Decision::Activate(vec![0])).unwrap();
        let stale = match eng.world.robots[0].pending {
            Some(Action::MoveTo(p)) => p,
            ref a => panic!("robot 0 should be pending, got {:?}", a),
        };
        eng.apply(Decision::Activate(vec![1])).unwrap();
        eng.apply(Decision::Execute(vec![1])).unwrap();
        eng.apply(Decision::Execute(vec![0])).unwrap();
        assert_eq!(eng.world.robots[0].pos, stale);
    }

    #[test]
    fn crash_cancels_the_pending_move() {
        let w = world((5, 5), &[(1, 2), (4, 5), (3, 1)]);
        let mut eng = Engine::new(w, PolicyMode::Unified, PolicyVariant::Standard, 100);
        eng.apply(Decision::Activate(vec![0])).unwrap();
        assert!(eng.world.robots[0].pending.is_some());
        eng.apply(Decision::Crash(0)).unwrap();
        assert!(eng.world.robots[0].pending.is_none());
        assert_eq!(
            eng.apply(Decision::Execute(vec![0])),
            Err(SimError::EmptyExecuteSet)
        );
        assert_eq!(
            eng.apply(Decision::Crash(1)),
            Err(SimError::CrashBudgetExhausted)
        );
    }

    #[test]
    fn crashed_singleton_yields_two_site_outcome() {
        let w = world((5, 5), &[(1, 1), (5, 5), (3, 3)]);
        let t = run(
            &w,
            SchedulerKind::RandomAsync { seed: 7 },
            &CrashPlan {
                target: CrashTarget::Robot(0),
                instant: Some(0),
                seed: 7,
            },
            PolicyMode::Unified,
            PolicyVariant::Standard,
            default_max_steps(w.dims, 3),
            default_fairness_window(3),
        );
        match t.outcome {
            Outcome::TwoSiteDone {
                singleton,
                multiplicity,
                ..
            } => {
                assert_eq!(singleton, Pos::new(1, 1));
                assert_eq!(multiplicity, Pos::new(3, 3));
            }
            Outcome::Gathered { .. } => {} // crash landed after robot 0 moved
            o => panic!("unexpected outcome {:?}", o),
        }
        assert_eq!(t.meta.fairness_violations, 0);
    }

    #[test]
    fn sym1_duo_member_crash_still_gathers() {
        // {(1,2),(2,1),(3,3)} on 4x4 is Sym1 with duo {(2,1),(1,2)}; crash
        // one duo member immediately.
        let w = world((4, 4), &[(1, 2), (2, 1), (3, 3)]);
        for seed in 0..20 {
            let t = run(
                &w,
                SchedulerKind::RandomAsync { seed },
                &CrashPlan {
                    target: CrashTarget::Robot(0),
                    instant: Some(0),
                    seed,
                },
                PolicyMode::Unified,
                PolicyVariant::Standard,
                default_max_steps(w.dims, 3),
                default_fairness_window(3),
            );
            assert!(
                matches!(
                    t.outcome,
                    Outcome::Gathered { .. } | Outcome::TwoSiteDone { .. }
                ),
                "seed {}: {:?}",
                seed,
                t.outcome
            );
            assert_eq!(t.meta.fairness_violations, 0);
        }
    }

    #[test]
    fn even_odd_southern_crash_releases_the_northern_half() {
        // 6x5: crash a southern robot; the wait rule demands the northern
        // robots proceed once at most one southerner remains.
        let w = world((6, 5), &[(2, 1), (5, 3), (6, 4)]);
        let t = run(
            &w,
            SchedulerKind::RandomAsync { seed: 3 },
            &CrashPlan {
                target: CrashTarget::Robot(2),
                instant: Some(0),
                seed: 3,
            },
            PolicyMode::Unified,
            PolicyVariant::Standard,
            default_max_steps(w.dims, 3),
            default_fairness_window(3),
        );
        assert!(
            matches!(
                t.outcome,
                Outcome::Gathered { .. } | Outcome::TwoSiteDone { .. }
            ),
            "{:?}",
            t.outcome
        );
    }

    #[test]
    fn rejected_initial_configurations() {
        let partitive = world((4, 4), &[(1, 2), (1, 3), (3, 2), (3, 3)]);
        let t = run(
            &partitive,
            SchedulerKind::Synchronous,
            &CrashPlan::none(),
            PolicyMode::Unified,
            PolicyVariant::Standard,
            100,
            16,
        );
        assert!(matches!(t.outcome, Outcome::Rejected { ref reason } if reason == "partitive"));
        let two_s2 = world((4, 4), &[(1, 1), (4, 4), (1, 2), (3, 4)]);
        let t = run(
            &two_s2,
            SchedulerKind::Synchronous,
            &CrashPlan::none(),
            PolicyMode::Unified,
            PolicyVariant::Standard,
            100,
            16,
        );
        assert!(matches!(t.outcome, Outcome::Rejected { ref reason } if reason == "two-s2"));
    }

    #[test]
    fn traces_are_deterministic_and_carry_fixed_field_names() {
        let w = world((4, 4), &[(1, 1), (2, 3), (3, 2)]);
        let go = || {
            run(
                &w,
                SchedulerKind::RandomAsync { seed: 42 },
                &CrashPlan {
                    target: CrashTarget::Random,
                    instant: None,
                    seed: 42,
                },
                PolicyMode::Unified,
                PolicyVariant::Standard,
                default_max_steps(w.dims, 3),
                default_fairness_window(3),
            )
        };
        let a = serde_json::to_string(&go()).unwrap();
        let b = serde_json::to_string(&go()).unwrap();
        assert_eq!(a, b);
        for field in ["\"step\"", "\"kind\"", "\"robots\"", "\"targets\"", "\"outcome\""] {
            assert!(a.contains(field), "trace JSON missing {}", field);
        }
        let back: Trace = serde_json::from_str(&a).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), a);
    }

    #[test]
    fn adversarial_scheduler_still_gathers() {
        let w = world((4, 4), &[(1, 1), (2, 3), (3, 2)]);
        for seed in 0..10 {
            let t = run(
                &w,
                SchedulerKind::AdversarialHeuristic { seed },
                &CrashPlan {
                    target: CrashTarget::Adversarial,
                    instant: Some(2),
                    seed,
                },
                PolicyMode::Unified,
                PolicyVariant::Standard,
                default_max_steps(w.dims, 3),
                default_fairness_window(3),
            );
            assert!(
                matches!(
                    t.outcome,
                    Outcome::Gathered { .. } | Outcome::TwoSiteDone { .. }
                ),
                "seed {}: {:?}",
                seed,
                t.outcome
            );
            assert_eq!(t.meta.fairness_violations, 0, "seed {}", seed);
        }
    }

    #[test]
    fn robot_count_is_conserved() {
        let w = world((4, 4), &[(1, 1), (2, 3), (3, 2), (4, 2)]);
        let mut eng = Engine::new(w, PolicyMode::Unified, PolicyVariant::Standard, 16);
        let mut sched = Scheduler::new(SchedulerKind::RandomAsync { seed: 5 });
        for _ in 0..200 {
            if eng.outcome_if_terminal().is_some() {
                break;
            }
            let d = sched.decide(&eng);
            eng.apply(d).unwrap();
            let total: usize = eng
                .snapshot()
                .positions()
                .map(|p| eng.world.count_at(p) as usize)
                .sum();
            assert_eq!(total, 4);
        }
    }
}
