//! Command-line front end: classification reports, seeded simulation runs,
//! exhaustive verification, configuration generation and lemma suites.
//!
//! Exit codes: 0 success, 1 rejected input, 2 counterexample or lemma
//! violation, 3 usage or parse error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gather::classify::{classify, Tag, ThreeCornerSub};
use gather::grid::{
    all_sequences, compute_mes, emit_world, parse_world, project_snapshot, validate_initial,
    GridDims, Pos, WorldState,
};
use gather::lemmas::{check_lemma, LEMMAS};
use gather::policy::{PolicyMode, PolicyVariant};
use gather::sim::{
    default_fairness_window, default_max_steps, run, CrashPlan, CrashTarget, Outcome,
    SchedulerKind,
};
use gather::symmetry::automorphisms;
use gather::verify::{verify_gatherable, Verdict, VerifyOptions};

const EXIT_OK: u8 = 0;
const EXIT_REJECTED: u8 = 1;
const EXIT_VIOLATION: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "gather",
    about = "Crash-tolerant gathering of asynchronous oblivious robots on finite grids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a world file: tag, corner sequences, MES, automorphisms.
    Classify(ClassifyArgs),
    /// Run one seeded simulation and write its trace.
    Simulate(SimulateArgs),
    /// Exhaustively verify gatherability under every fair schedule.
    Verify(VerifyArgs),
    /// Rejection-sample an initial world with a requested classification.
    Gen(GenArgs),
    /// Check a structural lemma over all small configurations.
    Lemmas(LemmasArgs),
}

#[derive(Args)]
struct ClassifyArgs {
    /// World file path.
    world: PathBuf,
    /// Emit a machine-readable JSON report instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchedulerArg {
    Sync,
    Random,
    Adversarial,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Unified,
    Percase,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Standard,
    Naive,
}

#[derive(Clone, Copy, ValueEnum)]
enum CrashArg {
    None,
    Random,
    Adversarial,
}

#[derive(Args)]
struct SimulateArgs {
    world: PathBuf,
    #[arg(long, value_enum, default_value = "unified")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "standard")]
    variant: VariantArg,
    #[arg(long, value_enum, default_value = "random")]
    scheduler: SchedulerArg,
    /// Seed for the scheduler and any random crash draw.
    #[arg(long, default_value = "0")]
    seed: u64,
    /// Crash mode when no explicit victim is given.
    #[arg(long, value_enum, default_value = "none")]
    crash: CrashArg,
    /// Crash this robot index (overrides --crash).
    #[arg(long)]
    crash_robot: Option<usize>,
    /// Engine step at which the crash lands.
    #[arg(long)]
    crash_at: Option<usize>,
    /// Engine-step budget; defaults to 10·m·n·k.
    #[arg(long)]
    max_steps: Option<usize>,
    /// Fairness audit window; defaults to 4k.
    #[arg(long)]
    fairness_window: Option<usize>,
    /// Trace output path; defaults to <world>.trace.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    world: PathBuf,
    #[arg(long, value_enum, default_value = "unified")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "standard")]
    variant: VariantArg,
    /// Number of crashes the adversary may spend.
    #[arg(long, default_value = "1")]
    budget: u8,
    /// Fairness window; defaults to 4k.
    #[arg(long)]
    window: Option<usize>,
    /// Search depth limit; exceeding it is Inconclusive, never a verdict.
    #[arg(long, default_value = "5000")]
    depth: usize,
}

#[derive(Args)]
struct GenArgs {
    rows: usize,
    cols: usize,
    robots: usize,
    #[arg(long, default_value = "0")]
    seed: u64,
    /// Required classification tag; default accepts anything gatherable
    /// (neither partitive nor 2S2).
    #[arg(long)]
    require: Option<String>,
    #[arg(long, default_value = "100000")]
    attempts: usize,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LemmasArgs {
    /// Lemma identifier; see --help for the registered set.
    #[arg(long, value_parser = LEMMAS.to_vec())]
    id: String,
    #[arg(long, default_value = "4")]
    rows: usize,
    #[arg(long, default_value = "4")]
    cols: usize,
    #[arg(long, default_value = "3")]
    k: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap uses exit code 2 for usage errors; remap onto the
            // contract's usage slot but keep --help/--version at 0.
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    let code = match cli.command {
        Command::Classify(a) => classify_cmd(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Gen(a) => gen_cmd(a),
        Command::Lemmas(a) => lemmas_cmd(a),
    };
    match code {
        Ok(c) => ExitCode::from(c),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn load_world(path: &PathBuf) -> Result<WorldState, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_world(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn classify_cmd(a: ClassifyArgs) -> Result<u8, String> {
    let world = load_world(&a.world)?;
    let snap = project_snapshot(&world);
    let cls = classify(&snap);
    let seqs = all_sequences(&snap);
    let autos = automorphisms(&snap);
    let mes = compute_mes(&snap).ok();
    if a.json {
        let report = serde_json::json!({
            "dims": { "rows": snap.dims.rows, "cols": snap.dims.cols },
            "parity": cls.parity,
            "tag": cls.tag,
            "corners_occupied": cls.corners_occupied,
            "largest_corner": cls.largest_corner,
            "second_largest_corner": cls.second_largest_corner,
            "mes": mes,
            "movers": cls.movers,
            "automorphisms": autos.iter().map(|s| format!("{s:?}")).collect::<Vec<_>>(),
            "sequences": seqs
                .values()
                .map(|s| (format!("{}{}", s.from, s.along), s.as_string()))
                .collect::<std::collections::BTreeMap<_, _>>(),
        });
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        println!("grid      {} x {} ({:?})", snap.dims.rows, snap.dims.cols, cls.parity);
        println!("tag       {:?}", cls.tag);
        if let Some(p) = cls.largest_corner {
            println!("largest   corner at {p}");
        }
        if let Some(p) = cls.second_largest_corner {
            println!("second    corner at {p}");
        }
        if let Some(b) = mes {
            println!(
                "mes       rows {}..={} cols {}..={}",
                b.row_lo, b.row_hi, b.col_lo, b.col_hi
            );
        }
        if autos.is_empty() {
            println!("symmetry  none (asymmetric)");
        } else {
            let names: Vec<String> = autos.iter().map(|s| format!("{s:?}")).collect();
            println!("symmetry  {}", names.join(", "));
        }
        if let Some(m) = &cls.movers {
            let who: Vec<String> = m
                .movers
                .iter()
                .map(|(p, role)| format!("{p} ({role:?})"))
                .collect();
            match m.target {
                Some(t) => println!("movers    {} -> {t}", who.join(", ")),
                None => println!("movers    {}", who.join(", ")),
            }
        }
        for s in seqs.values() {
            println!("lambda_{}{}  {}", s.from, s.along, s.as_string());
        }
    }
    Ok(EXIT_OK)
}

fn simulate_cmd(a: SimulateArgs) -> Result<u8, String> {
    let world = load_world(&a.world)?;
    validate_initial(&world).map_err(|e| e.to_string())?;
    let k = world.robot_count();
    let scheduler = match a.scheduler {
        SchedulerArg::Sync => SchedulerKind::Synchronous,
        SchedulerArg::Random => SchedulerKind::RandomAsync { seed: a.seed },
        SchedulerArg::Adversarial => SchedulerKind::AdversarialHeuristic { seed: a.seed },
    };
    let target = match (a.crash_robot, a.crash) {
        (Some(i), _) => CrashTarget::Robot(i),
        (None, CrashArg::None) => CrashTarget::None,
        (None, CrashArg::Random) => CrashTarget::Random,
        (None, CrashArg::Adversarial) => CrashTarget::Adversarial,
    };
    let crash = CrashPlan {
        target,
        instant: a.crash_at,
        seed: a.seed,
    };
    let mode = match a.mode {
        ModeArg::Unified => PolicyMode::Unified,
        ModeArg::Percase => PolicyMode::PerCase,
    };
    let variant = match a.variant {
        VariantArg::Standard => PolicyVariant::Standard,
        VariantArg::Naive => PolicyVariant::NaiveNoCritical,
    };
    let max_steps = a.max_steps.unwrap_or_else(|| default_max_steps(world.dims, k));
    let window = a.fairness_window.unwrap_or_else(|| default_fairness_window(k));

    let trace = run(&world, scheduler, &crash, mode, variant, max_steps, window);

    let out = a.out.unwrap_or_else(|| {
        let mut p = a.world.clone();
        p.set_extension("trace.json");
        p
    });
    let bytes = serde_json::to_vec_pretty(&trace).unwrap();
    fs::write(&out, bytes).map_err(|e| format!("{}: {e}", out.display()))?;

    match &trace.outcome {
        Outcome::Gathered { node, steps } => {
            println!("gathered at {node} after {steps} steps ({})", out.display());
            Ok(EXIT_OK)
        }
        Outcome::TwoSiteDone {
            singleton,
            multiplicity,
            steps,
        } => {
            println!(
                "done after {steps} steps: crashed singleton at {singleton}, everyone else at {multiplicity} ({})",
                out.display()
            );
            Ok(EXIT_OK)
        }
        Outcome::StepLimitExceeded => {
            println!("step limit {max_steps} exceeded ({})", out.display());
            Ok(EXIT_VIOLATION)
        }
        Outcome::Rejected { reason } => {
            println!("rejected: {reason}");
            Ok(EXIT_REJECTED)
        }
    }
}

fn verify_cmd(a: VerifyArgs) -> Result<u8, String> {
    let world = load_world(&a.world)?;
    let k = world.robot_count();
    let mut opts = VerifyOptions::new(a.budget, a.window.unwrap_or_else(|| default_fairness_window(k)));
    opts.depth_limit = a.depth;
    opts.mode = match a.mode {
        ModeArg::Unified => PolicyMode::Unified,
        ModeArg::Percase => PolicyMode::PerCase,
    };
    opts.variant = match a.variant {
        VariantArg::Standard => PolicyVariant::Standard,
        VariantArg::Naive => PolicyVariant::NaiveNoCritical,
    };
    match verify_gatherable(&world, &opts) {
        Verdict::AllGathered { states, max_depth } => {
            println!("all schedules gather ({states} states, max depth {max_depth})");
            Ok(EXIT_OK)
        }
        Verdict::Counterexample { decisions, trace } => {
            println!("counterexample: {} adversary turns", decisions.len());
            println!("{}", serde_json::to_string_pretty(&trace).unwrap());
            Ok(EXIT_VIOLATION)
        }
        Verdict::Inconclusive { states } => {
            println!("inconclusive: depth limit hit after {states} states");
            Ok(EXIT_VIOLATION)
        }
        Verdict::Rejected { reason } => {
            println!("rejected: {reason}");
            Ok(EXIT_REJECTED)
        }
    }
}

/// Tag names accepted by `gen --require`.
fn parse_require(s: &str) -> Result<Option<Tag>, String> {
    let tag = match s.to_ascii_lowercase().as_str() {
        "nonpartitive" | "any" => return Ok(None),
        "partitive" => Tag::Partitive,
        "twos2" | "2s2" => Tag::TwoS2,
        "plain" => Tag::Plain,
        "purelyasymmetric" | "asymmetric" => Tag::PurelyAsymmetric,
        "critical" => Tag::Critical,
        "sym1" => Tag::Sym1,
        "sym2" => Tag::Sym2,
        "almostsym1" => Tag::AlmostSym1,
        "almostsym2" => Tag::AlmostSym2,
        "onecorner" => Tag::OneCorner,
        "twocorners" => Tag::TwoCorners,
        "3c1" => Tag::ThreeCorners(ThreeCornerSub::C1),
        "3c2" => Tag::ThreeCorners(ThreeCornerSub::C2),
        "3c3" => Tag::ThreeCorners(ThreeCornerSub::C3),
        "3c4" => Tag::ThreeCorners(ThreeCornerSub::C4),
        "3c5" => Tag::ThreeCorners(ThreeCornerSub::C5),
        "3c6" => Tag::ThreeCorners(ThreeCornerSub::C6),
        other => return Err(format!("unknown tag `{other}`")),
    };
    Ok(Some(tag))
}

fn gen_cmd(a: GenArgs) -> Result<u8, String> {
    let dims = GridDims::new(a.rows, a.cols).map_err(|e| e.to_string())?;
    if a.robots > a.rows * a.cols {
        return Err(format!(
            "{} robots do not fit on {} nodes as singletons",
            a.robots,
            a.rows * a.cols
        ));
    }
    if a.robots < 3 {
        return Err("need at least 3 robots".into());
    }
    let required = match &a.require {
        Some(s) => parse_require(s)?,
        None => None,
    };
    let nodes: Vec<Pos> = (1..=a.rows)
        .flat_map(|r| (1..=a.cols).map(move |c| Pos::new(r, c)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    for _ in 0..a.attempts {
        let mut picked = nodes.clone();
        picked.shuffle(&mut rng);
        picked.truncate(a.robots);
        let world = WorldState::from_positions(dims, &picked);
        let tag = classify(&project_snapshot(&world)).tag;
        let accept = match required {
            Some(want) => tag == want,
            None => tag != Tag::Partitive && tag != Tag::TwoS2,
        };
        if accept {
            let text = emit_world(&world);
            match &a.out {
                Some(p) => fs::write(p, &text).map_err(|e| format!("{}: {e}", p.display()))?,
                None => print!("{text}"),
            }
            return Ok(EXIT_OK);
        }
    }
    eprintln!(
        "no matching configuration in {} attempts (is the tag reachable on this grid?)",
        a.attempts
    );
    Ok(EXIT_REJECTED)
}

fn lemmas_cmd(a: LemmasArgs) -> Result<u8, String> {
    let dims = GridDims::new(a.rows, a.cols).map_err(|e| e.to_string())?;
    let report = check_lemma(&a.id, dims, a.k).map_err(|e| e.to_string())?;
    println!(
        "lemma {}: {} configurations tested, {} violations",
        report.lemma,
        report.tested,
        report.violations.len()
    );
    for v in &report.violations {
        println!("  violation: {v}");
    }
    Ok(if report.ok() { EXIT_OK } else { EXIT_VIOLATION })
}
