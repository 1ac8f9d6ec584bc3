use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use urykit::builder::{generate_rational_urysohn, GrowingSpace, UrysohnConfig};
use urykit::extension::{embed_into, spec_from_closure, ExtensionGraph, ExtensionSpec};
use urykit::homotopy::{sample_path, uniform_grid};
use urykit::io::{
    instance_from_labels, labels, parse_space, point, points, read_json, split_labels, to_json, IoError, IsometryFile,
    MapFile, OpenSetFile, SpaceFile, SpecFile, TraceFile,
};
use urykit::metric::{check_partial_isometry, FinMetric, PointId};
use urykit::rational::{format_rat, parse_rat, Rat};
use urykit::stabilizer::{
    displacement_audit, extend_word_to, random_instance, stabilize, StabilizerInstance, Strategy,
};
use urykit::suite::{run_suite, SuiteName};

#[derive(Parser)]
#[command(
    name = "urykit",
    version,
    about = "Exact finite approximations of the rational Urysohn space"
)]
struct Cli {
    /// Seed for every randomized step; URYKIT_SEED takes precedence.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print progress to stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a distance-matrix file.
    Validate {
        #[arg(long)]
        space: PathBuf,
    },
    /// Extend a space by a tuple isometric to a pattern, with given cross distances.
    Extend {
        /// Space file.
        #[arg(long)]
        space: PathBuf,
        /// Space file for the pattern; its labels must not occur in the space.
        #[arg(long)]
        pattern: PathBuf,
        /// Cross distances from each pattern point to each space point.
        #[arg(long)]
        spec: PathBuf,
        /// Audit the within-copy distances of the extension graph.
        #[arg(long)]
        check_b: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find or add a point realizing a Katětov map.
    Realize {
        #[arg(long)]
        space: PathBuf,
        /// Map file: `{"domain": [labels], "values": [rationals]}`.
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extend a partial isometry forth and back over listed points.
    Backforth {
        #[arg(long)]
        space: PathBuf,
        /// Isometry file: `{"domain": [labels], "range": [labels]}`.
        #[arg(long)]
        phi: PathBuf,
        /// Comma-separated labels to add to the domain.
        #[arg(long, default_value = "")]
        forth: String,
        /// Comma-separated labels to add to the range.
        #[arg(long, default_value = "")]
        back: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grow a finite saturated space over a distance set.
    UrysohnGen {
        /// Comma-separated rationals.
        #[arg(long)]
        distances: String,
        /// Saturation rounds.
        #[arg(long, default_value_t = 2)]
        rounds: usize,
        /// Largest domain size of the maps realized in a round.
        #[arg(long, default_value_t = 2)]
        cap: usize,
        /// Stop adding points at this size.
        #[arg(long, default_value_t = 20_000)]
        max_points: usize,
        /// Starting space; a single point when omitted.
        #[arg(long)]
        space: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the straight-line path between two isometric tuples.
    Homotopy {
        #[arg(long)]
        space: PathBuf,
        /// Isometry file for the start tuple.
        #[arg(long)]
        phi0: PathBuf,
        /// Isometry file for the end tuple, on the same domain.
        #[arg(long)]
        phi1: PathBuf,
        /// Number of equal steps between 0 and 1.
        #[arg(long, default_value_t = 8)]
        grid: usize,
        /// Anchors that every sampled tuple must stay within.
        #[arg(long)]
        open_set: Option<PathBuf>,
        /// Reference points; every point of the input space when omitted.
        #[arg(long)]
        y: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Approximate phi on A by words in the stabilizers of A and B.
    Stabilize {
        #[arg(long, required_unless_present = "random")]
        space: Option<PathBuf>,
        /// Comma-separated labels of A.
        #[arg(long = "A", required_unless_present = "random")]
        a: Option<String>,
        /// Comma-separated labels of B; shared points come first in both.
        #[arg(long = "B", required_unless_present = "random")]
        b: Option<String>,
        /// Isometry file with domain A.
        #[arg(long, required_unless_present = "random")]
        phi: Option<PathBuf>,
        /// Use a random instance drawn from the seed instead of input files.
        #[arg(long)]
        random: bool,
        /// Target accuracy, a positive rational.
        #[arg(long, default_value = "1/100")]
        eps: String,
        /// Cap on move attempts.
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
        #[arg(long, value_enum, default_value_t = StrategyArg::Steered)]
        strategy: StrategyArg,
        /// Write the verified trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Audit the displacement of a point along the word of a trace.
    Displacement {
        /// Must agree with the trace's space on its points.
        #[arg(long)]
        space: Option<PathBuf>,
        /// Trace file written by `stabilize`.
        #[arg(long)]
        word: PathBuf,
        /// Label of the audited point.
        #[arg(long)]
        point: String,
    },
    /// Run the property suites.
    Check {
        /// katetov, lemma1, homotopy, stabilizer or all.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Cases per property.
        #[arg(long, default_value_t = 100)]
        budget: usize,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum StrategyArg {
    Steered,
    Greedy,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Steered => Strategy::Steered,
            StrategyArg::Greedy => Strategy::Greedy,
        }
    }
}

/// Exit status 1, 2 or 3 with a message.
#[derive(Debug)]
enum Failure {
    Parse(String),
    Invalid(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::Internal(_) => 3,
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e.exit_code() {
            1 => Failure::Parse(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure::Invalid(e.to_string())
}

fn internal(e: impl std::fmt::Display) -> Failure {
    Failure::Internal(e.to_string())
}

type Outcome = Result<(), Failure>;

struct Ctx {
    seed: u64,
    verbose: u8,
}

impl Ctx {
    fn note(&self, msg: impl AsRef<str>) {
        if self.verbose > 0 {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Outcome {
    let text = to_json(value);
    match out {
        Some(path) => fs::write(path, text).map_err(|e| internal(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_rat_arg(s: &str) -> Result<Rat, Failure> {
    parse_rat(s).map_err(|e| Failure::Parse(e.to_string()))
}

fn growing(path: &Path) -> Result<GrowingSpace, Failure> {
    Ok(read_json::<SpaceFile>(path)?.to_growing()?)
}

fn tuple_file(path: &Path, m: &FinMetric) -> Result<Vec<PointId>, Failure> {
    let names: Vec<String> = read_json(path)?;
    Ok(points(m, &names)?)
}

fn validate(space: &Path) -> Outcome {
    let m = parse_space(space)?;
    emit(
        &json!({ "valid": true, "points": m.len(), "diameter": format_rat(&m.diameter()) }),
        None,
    )
}

fn extend(space: &Path, pattern: &Path, spec: &Path, check_b: bool, out: Option<&Path>) -> Outcome {
    let base = parse_space(space)?;
    let pattern = parse_space(pattern)?;
    let cross = read_json::<SpecFile>(spec)?.cross;
    if let Some(l) = pattern.labels().iter().find(|l| base.index_of(l).is_some()) {
        return Err(invalid(format!("pattern label {l:?} is already a point of the space")));
    }
    let spec = ExtensionSpec::new(base.clone(), pattern.clone(), cross).map_err(invalid)?;
    let mut graph = ExtensionGraph::new(base.clone(), pattern.clone());
    let verts = embed_into(&mut graph, &spec).map_err(invalid)?;
    let closure = graph.closure_metric();
    if check_b {
        graph
            .audit_claim(&closure)
            .map_err(|(u, v)| invalid(format!("closure differs from the edge weight at {u:?}, {v:?}")))?;
        graph
            .audit_condition_b(&closure)
            .map_err(|(u, v)| invalid(format!("within-copy distance differs at {u:?}, {v:?}")))?;
    }
    let realized = spec_from_closure(&graph, &closure, &verts).map_err(internal)?;
    let names: Vec<String> = base.labels().iter().chain(pattern.labels()).cloned().collect();
    let joint = FinMetric::new(names, realized.joint_matrix()).map_err(internal)?;
    emit(&SpaceFile::from_metric(&joint), out)
}

fn realize(space: &Path, map: &Path, out: Option<&Path>) -> Outcome {
    let mut s = growing(space)?;
    let f = read_json::<MapFile>(map)?.to_map(s.space())?;
    let before = s.len();
    let z = s.realize_katetov(&f).map_err(invalid)?;
    emit(
        &json!({
            "point": s.space().label(z),
            "new": z >= before,
            "space": SpaceFile::from_growing(&s),
        }),
        out,
    )
}

fn backforth(space: &Path, phi: &Path, forth: &str, back: &str, out: Option<&Path>) -> Outcome {
    let mut s = growing(space)?;
    let phi = read_json::<IsometryFile>(phi)?.to_isometry(s.space())?;
    check_partial_isometry(&phi, s.space(), s.space()).map_err(invalid)?;
    let forth = points(s.space(), &split_labels(forth))?;
    let back = points(s.space(), &split_labels(back))?;
    let ext = s.extend_isometry(&phi, &forth, &back).map_err(invalid)?;
    emit(
        &json!({
            "phi": IsometryFile::from_isometry(s.space(), &ext),
            "space": SpaceFile::from_growing(&s),
        }),
        out,
    )
}

#[allow(clippy::too_many_arguments)]
fn urysohn_gen(
    ctx: &Ctx,
    distances: &str,
    rounds: usize,
    cap: usize,
    max_points: usize,
    space: Option<&Path>,
    out: Option<&Path>,
) -> Outcome {
    let distances = distances
        .split(',')
        .map(|d| parse_rat_arg(d.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    if rounds == 0 || cap == 0 || max_points == 0 {
        return Err(invalid("rounds, cap and max-points must be positive"));
    }
    let start = match space {
        Some(p) => growing(p)?,
        None => GrowingSpace::single_point("p0"),
    };
    let cfg = UrysohnConfig {
        distances,
        rounds,
        cap,
        seed: ctx.seed,
        max_points,
    };
    let (s, report) = generate_rational_urysohn(start, &cfg).map_err(invalid)?;
    ctx.note(format!(
        "{} points; realized per round {:?}{}",
        s.len(),
        report.realized_per_round,
        if report.budget_exhausted {
            "; point budget exhausted"
        } else {
            ""
        }
    ));
    emit(&SpaceFile::from_growing(&s), out)
}

#[allow(clippy::too_many_arguments)]
fn homotopy(
    space: &Path,
    phi0: &Path,
    phi1: &Path,
    grid: usize,
    open_set: Option<&Path>,
    y: Option<&str>,
    out: Option<&Path>,
) -> Outcome {
    let mut s = growing(space)?;
    let t0 = tuple_file(phi0, s.space())?;
    let t1 = tuple_file(phi1, s.space())?;
    let v = match open_set {
        Some(p) => read_json::<OpenSetFile>(p)?.to_open_set(s.space())?,
        None => Default::default(),
    };
    let y = match y {
        Some(list) => points(s.space(), &split_labels(list))?,
        None => (0..s.len()).collect(),
    };
    if grid == 0 {
        return Err(invalid("grid must be positive"));
    }
    let path = sample_path(&mut s, &t0, &t1, &y, &uniform_grid(grid), &v).map_err(invalid)?;
    let m = s.space();
    let report = json!({
        "grid": path.grid.iter().map(format_rat).collect::<Vec<_>>(),
        "reference": labels(m, &path.reference),
        "lipschitz": format_rat(&path.lipschitz),
        "tuples": path.tuples.iter().map(|t| labels(m, t)).collect::<Vec<_>>(),
        "margins": path.margins.iter().map(|r| r.iter().map(format_rat).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "modulus": path.modulus.iter().map(|e| json!({
            "a": e.a,
            "b": e.b,
            "realized": format_rat(&e.realized),
            "bound": format_rat(&e.bound),
        })).collect::<Vec<_>>(),
        "within_open_set": path.within_open_set(),
        "modulus_holds": path.modulus_holds(),
        "space": SpaceFile::from_growing(&s),
    });
    emit(&report, out)?;
    if !path.within_open_set() || !path.modulus_holds() {
        return Err(invalid("sampled path violates the open set or the modulus bound"));
    }
    Ok(())
}

struct StabilizeArgs<'a> {
    space: Option<&'a Path>,
    a: Option<&'a str>,
    b: Option<&'a str>,
    phi: Option<&'a Path>,
    random: bool,
    eps: &'a str,
    max_iter: usize,
    strategy: Strategy,
    trace: Option<&'a Path>,
}

fn load_instance(args: &StabilizeArgs, seed: u64, epsilon: Rat) -> Result<StabilizerInstance, Failure> {
    if args.random {
        return random_instance(seed, epsilon).map_err(invalid);
    }
    let (Some(space), Some(a), Some(b), Some(phi)) = (args.space, args.a, args.b, args.phi) else {
        return Err(Failure::Parse("--space, --A, --B and --phi are required".into()));
    };
    let phi: IsometryFile = read_json(phi)?;
    Ok(instance_from_labels(
        growing(space)?,
        &split_labels(a),
        &split_labels(b),
        &phi,
        epsilon,
    )?)
}

fn run_stabilize(ctx: &Ctx, args: StabilizeArgs) -> Outcome {
    let epsilon = parse_rat_arg(args.eps)?;
    if args.max_iter == 0 {
        return Err(invalid("max-iter must be positive"));
    }
    let mut inst = load_instance(&args, ctx.seed, epsilon)?;
    let out = stabilize(&mut inst, args.max_iter, args.strategy).map_err(|e| {
        if e.rejects_instance() {
            invalid(e)
        } else {
            internal(e)
        }
    })?;
    let file = TraceFile::new(&inst, args.strategy, &out);
    file.verify()
        .map_err(|e| internal(format!("trace fails its own check: {e}")))?;
    if let Some(path) = args.trace {
        emit(&file, Some(path))?;
    }
    emit(
        &json!({
            "converged": out.trace.converged,
            "within_epsilon": out.within_epsilon,
            "iterations": out.trace.iterations,
            "moves": out.trace.steps.len(),
            "initial_objective": format_rat(&out.trace.initial_objective),
            "final_objective": format_rat(out.trace.final_objective()),
            "errors": out.errors.iter().map(format_rat).collect::<Vec<_>>(),
            "failure": out.trace.failure,
        }),
        None,
    )?;
    if !out.within_epsilon {
        return Err(invalid(
            out.trace
                .failure
                .clone()
                .unwrap_or_else(|| "result is not within epsilon".into()),
        ));
    }
    Ok(())
}

fn displacement(space: Option<&Path>, word: &Path, at: &str) -> Outcome {
    let file: TraceFile = read_json(word)?;
    file.verify()?;
    let mut s = file.space.to_growing()?;
    if let Some(path) = space {
        let given = parse_space(path)?;
        let ids = points(s.space(), given.labels())?;
        for (i, &p) in ids.iter().enumerate() {
            for (j, &q) in ids.iter().enumerate() {
                if given.d(i, j) != s.d(p, q) {
                    return Err(invalid("space disagrees with the trace"));
                }
            }
        }
    }
    let x = point(s.space(), at)?;
    let word = file.word(s.space())?;
    let word = extend_word_to(&mut s, &word, x).map_err(invalid)?;
    let m = s.space();
    let a = points(m, &file.a)?;
    let b = points(m, &file.b)?;
    let r = displacement_audit(m, &word, &a, &b, x).map_err(invalid)?;
    emit(
        &json!({
            "point": m.label(r.point),
            "image": m.label(r.image),
            "displacement": format_rat(&r.displacement),
            "word_bound": format_rat(&r.word_bound),
            "generators": r.generators.iter().map(|g| json!({
                "point": m.label(g.point),
                "image": m.label(g.image),
                "displacement": format_rat(&g.displacement),
                "bound": format_rat(&g.bound),
                "union_bound": format_rat(&g.union_bound),
                "holds": g.holds(),
            })).collect::<Vec<_>>(),
            "all_hold": r.all_hold(),
        }),
        None,
    )?;
    if !r.all_hold() {
        return Err(invalid("displacement bound fails"));
    }
    Ok(())
}

fn check(ctx: &Ctx, suite: &str, budget: usize) -> Outcome {
    let name: SuiteName = suite
        .parse()
        .map_err(|e: urykit::suite::UnknownSuite| Failure::Parse(e.to_string()))?;
    let report = run_suite(name, ctx.seed, budget);
    for r in &report.results {
        ctx.note(format!(
            "{} {}/{}: {}",
            if r.passed { "pass" } else { "FAIL" },
            r.suite,
            r.property,
            r.cases
        ));
    }
    emit(&report, None)?;
    if !report.passed {
        return Err(invalid("some properties failed"));
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    let seed = match std::env::var("URYKIT_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Parse(format!("URYKIT_SEED={v:?} is not a 64-bit integer")))?,
        Err(_) => cli.seed,
    };
    let ctx = Ctx {
        seed,
        verbose: cli.verbose,
    };
    match cli.command {
        Command::Validate { space } => validate(&space),
        Command::Extend {
            space,
            pattern,
            spec,
            check_b,
            out,
        } => extend(&space, &pattern, &spec, check_b, out.as_deref()),
        Command::Realize { space, map, out } => realize(&space, &map, out.as_deref()),
        Command::Backforth {
            space,
            phi,
            forth,
            back,
            out,
        } => backforth(&space, &phi, &forth, &back, out.as_deref()),
        Command::UrysohnGen {
            distances,
            rounds,
            cap,
            max_points,
            space,
            out,
        } => urysohn_gen(
            &ctx,
            &distances,
            rounds,
            cap,
            max_points,
            space.as_deref(),
            out.as_deref(),
        ),
        Command::Homotopy {
            space,
            phi0,
            phi1,
            grid,
            open_set,
            y,
            out,
        } => homotopy(
            &space,
            &phi0,
            &phi1,
            grid,
            open_set.as_deref(),
            y.as_deref(),
            out.as_deref(),
        ),
        Command::Stabilize {
            space,
            a,
            b,
            phi,
            random,
            eps,
            max_iter,
            strategy,
            trace,
        } => run_stabilize(
            &ctx,
            StabilizeArgs {
                space: space.as_deref(),
                a: a.as_deref(),
                b: b.as_deref(),
                phi: phi.as_deref(),
                random,
                eps: &eps,
                max_iter,
                strategy: strategy.into(),
                trace: trace.as_deref(),
            },
        ),
        Command::Displacement { space, word, point } => displacement(space.as_deref(), &word, &point),
        Command::Check { suite, budget } => check(&ctx, &suite, budget),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(f)) => {
            let (Failure::Parse(msg) | Failure::Invalid(msg) | Failure::Internal(msg)) = &f;
            eprintln!("urykit: {msg}");
            ExitCode::from(f.code())
        }
        Err(_) => ExitCode::from(3),
    }
}
