use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use dendrolab_core::backforth::{bf_chains, bf_chains_omega, bf_subcontinua, extend_and_verify, PartialIso};
use dendrolab_core::chain::{
    check_generic_conditions, check_omega_conditions, endpoint_of_hitting_time, generate_generic_chain, is_willful,
    WillfulMode,
};
use dendrolab_core::fullness::{endpoint_diff, is_full, is_nowhere_dense, maximality_failures, perturb_to_full};
use dendrolab_core::hyperspace::hausdorff;
use dendrolab_core::nerve::tree_like_check;
use dendrolab_core::rational::{self, Rational};
use dendrolab_core::wazewski::{build_wm, gamma_chain, inverse_limit_stage, relocate_subdendrite, BondingFunction, RefinementSchedule};
use dendrolab_core::{dot, io, Dendrite, Error, Order, Subdendrite};

#[derive(Parser)]
#[command(name = "dendrolab", version, about = "Finite-scale tools for generalized Ważewski dendrites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a finite approximation of W_M.
    Build(BuildArgs),
    /// One stage of the inverse-limit tree for a bonding function.
    Invlimit(InvlimitArgs),
    /// Exact Hausdorff distance between two subdendrites.
    Hausdorff(HausdorffArgs),
    /// Fullness and nowhere-density report for a subdendrite.
    Classify(ClassifyArgs),
    /// Generate, check or construct maximal order arcs.
    #[command(subcommand)]
    Chain(ChainCommand),
    /// Back-and-forth between two subdendrites or two chains.
    Homeo(HomeoArgs),
    /// Nerve of the canonical cover of a metric graph, as DOT with a verdict.
    Nerve(NerveArgs),
    /// Dendrite as DOT, optionally highlighting a subdendrite.
    ExportDot(ExportDotArgs),
}

#[derive(Args)]
struct ScheduleArgs {
    /// Branch orders, e.g. `3,omega`.
    #[arg(long, value_delimiter = ',', value_parser = parse_order)]
    orders: Vec<Order>,
    /// Sprout length as a fraction of the edge being split.
    #[arg(long, value_parser = parse_rational)]
    ratio: Option<Rational>,
    /// New nodes per order on every edge at each level.
    #[arg(long, default_value_t = 1)]
    count: u32,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    schedule: ScheduleArgs,
    #[arg(long)]
    depth: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InvlimitArgs {
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long, value_parser = parse_rational)]
    t: Rational,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HausdorffArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    k: PathBuf,
    #[arg(long, value_parser = parse_rational)]
    eps: Rational,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ChainCommand {
    /// Random chain meeting the generic conditions.
    Gen {
        #[arg(long)]
        space: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Step bound; defaults to the ambient mesh.
        #[arg(long, value_parser = parse_rational)]
        delta: Option<Rational>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report on the chain conditions.
    Check {
        #[arg(long)]
        chain: PathBuf,
        /// Resolution; defaults to the chain's mesh.
        #[arg(long, value_parser = parse_rational)]
        eps: Option<Rational>,
        /// Also report the conditions used for W_ω.
        #[arg(long)]
        omega: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The chain γ on a stage of the inverse-limit tree.
    Gamma {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        k: u32,
        /// Grid spacing in time; pair values and tip times are always added.
        #[arg(long, value_parser = parse_rational, default_value = "1/16")]
        step: Rational,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct HomeoArgs {
    /// Ambient of `--k1` and `--k2`.
    #[arg(long)]
    space: Option<PathBuf>,
    #[arg(long, requires = "space", requires = "k2", conflicts_with_all = ["c1", "c2"])]
    k1: Option<PathBuf>,
    #[arg(long, requires = "k1")]
    k2: Option<PathBuf>,
    #[arg(long, requires = "c2")]
    c1: Option<PathBuf>,
    #[arg(long, requires = "c1")]
    c2: Option<PathBuf>,
    /// Use the conditions for W_ω (chains only).
    #[arg(long, requires = "c1")]
    omega: bool,
    #[arg(long, default_value_t = 12)]
    steps: usize,
    /// Deeper approximations to try when the search runs out of nodes
    /// (subcontinua only; needs the schedule the space was built with).
    #[arg(long, default_value_t = 0)]
    auto_refine: u32,
    #[command(flatten)]
    schedule: ScheduleArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NerveArgs {
    /// Metric graph or dendrite JSON.
    #[arg(long)]
    space: PathBuf,
    #[arg(long, value_parser = parse_rational)]
    eps: Rational,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportDotArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    k: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    rational::parse(s).map_err(|e| e.to_string())
}

fn parse_order(s: &str) -> Result<Order, String> {
    if s.eq_ignore_ascii_case("omega") {
        return Ok(Order::Omega);
    }
    s.parse::<u32>().map(Order::Finite).map_err(|_| format!("{s:?} is neither an integer nor `omega`"))
}

/// Failure carrying the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Precondition { .. } | Error::AmbientMismatch | Error::NotInSubdendrite => 2,
            Error::RefineNeeded(_) => 3,
            _ => 1,
        };
        let message = match &e {
            Error::RefineNeeded(m) => format!("REFINE_NEEDED: {m}"),
            other => other.to_string(),
        };
        Failure { code, message }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Parse errors name the file they came from.
fn in_file<T>(path: &Path, r: dendrolab_core::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn load_dendrite(path: &Path) -> Result<Arc<Dendrite>, Failure> {
    in_file(path, io::parse_dendrite(&read(path)?)).map(Arc::new)
}

fn load_subdendrite(w: &Arc<Dendrite>, path: &Path) -> Result<Subdendrite, Failure> {
    in_file(path, io::parse_subdendrite(w, &read(path)?))
}

fn emit_text(text: &str, out: Option<&Path>) -> Outcome {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit(v: &Value, out: Option<&Path>) -> Outcome {
    let mut text = serde_json::to_string_pretty(v).expect("values serialize");
    text.push('\n');
    emit_text(&text, out)
}

fn schedule_of(s: &ScheduleArgs, depth: u32) -> Result<RefinementSchedule, Failure> {
    let ratio = s.ratio.clone().ok_or_else(|| usage("--ratio is required"))?;
    if s.orders.is_empty() {
        return Err(usage("--orders is required"));
    }
    Ok(RefinementSchedule::new(&s.orders, s.count, ratio, depth)?)
}

fn build(a: BuildArgs) -> Outcome {
    let w = build_wm(&schedule_of(&a.schedule, a.depth)?)?;
    emit(&io::dendrite_json(&w), a.out.as_deref())
}

fn load_bonding(path: &Path) -> Result<BondingFunction, Failure> {
    let pairs = in_file(path, io::parse_pairs(&read(path)?))?;
    Ok(BondingFunction::new(pairs)?)
}

fn invlimit(a: InvlimitArgs) -> Outcome {
    let f = load_bonding(&a.pairs)?;
    let w = inverse_limit_stage(&f, &a.t, a.k)?;
    emit(&io::dendrite_json(&w), a.out.as_deref())
}

fn hausdorff_cmd(a: HausdorffArgs) -> Outcome {
    let w = load_dendrite(&a.space)?;
    let x = load_subdendrite(&w, &a.a)?;
    let y = load_subdendrite(&w, &a.b)?;
    println!("{}", rational::format(&hausdorff(&x, &y)?));
    Ok(())
}

fn classify(a: ClassifyArgs) -> Outcome {
    let w = load_dendrite(&a.space)?;
    let k = load_subdendrite(&w, &a.k)?;
    let diff: Vec<Value> = endpoint_diff(&k)
        .into_iter()
        .map(|(p, c)| json!({"point": io::point_json(&p), "witness": c}))
        .collect();
    let report = json!({
        "full": is_full(&k),
        "nowhere_dense": is_nowhere_dense(&k, &a.eps)?,
        "endpoint_diff": diff,
        "maximality_failures": maximality_failures(&k),
    });
    emit(&report, a.out.as_deref())
}

/// Multiples of `step` in (0,1] together with the pair values and tip times.
fn gamma_grid(f: &BondingFunction, step: &Rational) -> Result<Vec<Rational>, Failure> {
    if !(rational::is_positive(step) && *step <= rational::one()) {
        return Err(usage("--step must lie in (0,1]"));
    }
    let mut grid = Vec::new();
    let mut t = step.clone();
    while t < rational::one() {
        grid.push(t.clone());
        t += step;
    }
    grid.push(rational::one());
    for (a, b) in f.pairs() {
        grid.extend([a.clone(), b.clone()]);
    }
    grid.extend(f.tip_hitting_times());
    grid.sort();
    grid.dedup();
    Ok(grid)
}

fn chain_cmd(c: ChainCommand) -> Outcome {
    match c {
        ChainCommand::Gen { space, seed, delta, out } => {
            let w = load_dendrite(&space)?;
            let delta = delta.unwrap_or_else(|| w.mesh());
            let chain = generate_generic_chain(&w, seed, &delta)?;
            emit(&io::chain_json(&chain), out.as_deref())
        }
        ChainCommand::Check { chain, eps, omega, out } => {
            let c = in_file(&chain, io::parse_chain(&read(&chain)?))?;
            let eps = eps.unwrap_or_else(|| c.mesh().clone());
            let generic = check_generic_conditions(&c, &eps)?;
            let mut report = json!({
                "elements": c.len(),
                "eps": rational::format(&eps),
                "passed": generic.passed(),
                "generic": generic,
                "willful_all_arcs": is_willful(&c, WillfulMode::AllArcs),
                "endpoint_of_hitting_time": endpoint_of_hitting_time(&c)?,
            });
            if omega {
                report["omega"] = serde_json::to_value(check_omega_conditions(&c, &eps)?).expect("reports serialize");
            }
            emit(&report, out.as_deref())
        }
        ChainCommand::Gamma { pairs, k, step, out } => {
            let f = load_bonding(&pairs)?;
            let grid = gamma_grid(&f, &step)?;
            let chain = gamma_chain(&f, k, &grid)?;
            emit(&io::chain_json(&chain), out.as_deref())
        }
    }
}

fn homeo_report(iso: &PartialIso, extra: Value) -> Result<Value, Failure> {
    let verify = extend_and_verify(iso)?;
    let mut v = json!({
        "iso": iso.to_json(),
        "verify": verify,
    });
    if let (Some(obj), Value::Object(more)) = (v.as_object_mut(), extra) {
        obj.extend(more);
    }
    Ok(v)
}

fn homeo(a: HomeoArgs) -> Outcome {
    if let (Some(c1), Some(c2)) = (&a.c1, &a.c2) {
        if a.auto_refine > 0 {
            eprintln!("note: --auto-refine applies to subcontinua only and is ignored for chains");
        }
        let x = in_file(c1, io::parse_chain(&read(c1)?))?;
        let y = in_file(c2, io::parse_chain(&read(c2)?))?;
        let iso = if a.omega {
            bf_chains_omega(&x, &y, a.steps)?
        } else {
            bf_chains(&x, &y, a.steps)?
        };
        return emit(&homeo_report(&iso, json!({"refinements": 0}))?, a.out.as_deref());
    }
    let (Some(space), Some(k1), Some(k2)) = (&a.space, &a.k1, &a.k2) else {
        return Err(usage("homeo needs --space with --k1 and --k2, or --c1 and --c2"));
    };
    let mut w = load_dendrite(space)?;
    let mut x = load_subdendrite(&w, k1)?;
    let mut y = load_subdendrite(&w, k2)?;
    let schedule = if a.auto_refine > 0 {
        let depth = w
            .depth_tag()
            .ok_or_else(|| usage("--auto-refine needs a space carrying its depth"))?;
        let s = schedule_of(&a.schedule, depth)?;
        if build_wm(&s)? != *w {
            return Err(usage("the space was not built with the given --orders/--ratio/--count"));
        }
        Some(s)
    } else {
        None
    };
    let mut refinements = 0;
    loop {
        match bf_subcontinua(&x, &y, a.steps) {
            Ok(iso) => {
                let mut extra = json!({"refinements": refinements});
                if refinements > 0 {
                    extra["space"] = io::dendrite_json(&w);
                    extra["k1"] = io::subdendrite_json(&x);
                    extra["k2"] = io::subdendrite_json(&y);
                }
                return emit(&homeo_report(&iso, extra)?, a.out.as_deref());
            }
            Err(Error::RefineNeeded(m)) if refinements < a.auto_refine => {
                let s = schedule.as_ref().expect("set whenever auto_refine > 0");
                refinements += 1;
                let fine = Arc::new(build_wm(&s.with_depth(s.depth() + refinements))?);
                let eps = rational::half(&fine.mesh());
                x = perturb_to_full(&relocate_subdendrite(&x, &fine)?, &eps)?;
                y = perturb_to_full(&relocate_subdendrite(&y, &fine)?, &eps)?;
                w = fine;
                eprintln!("refining to depth {} after: {m}", s.depth() + refinements);
            }
            Err(e) => return Err(e.into()),
        }
    }
}

fn nerve_cmd(a: NerveArgs) -> Outcome {
    let g = Arc::new(in_file(&a.space, io::parse_graph(&read(&a.space)?))?);
    let report = tree_like_check(&g, &a.eps)?;
    let mut text = dot::nerve_dot(&report.cover, &report.nerve);
    let verdict = if report.tree_like {
        format!(
            "// verdict: tree-like at eps {} ({} balls, mesh at most {})\n",
            rational::format(&a.eps),
            report.cover.balls().len(),
            rational::format(&report.cover.mesh_bound())
        )
    } else {
        let nodes: Vec<String> = report.cycle_nodes.iter().map(|u| u.to_string()).collect();
        format!(
            "// verdict: not tree-like at eps {}; nerve cycle of {} balls through graph nodes [{}]\n",
            rational::format(&a.eps),
            report.cycle.as_ref().map_or(0, |c| c.len()),
            nodes.join(", ")
        )
    };
    text.push_str(&verdict);
    emit_text(&text, a.out.as_deref())
}

fn export_dot(a: ExportDotArgs) -> Outcome {
    let w = load_dendrite(&a.space)?;
    let k = a.k.as_deref().map(|p| load_subdendrite(&w, p)).transpose()?;
    emit_text(&dot::dendrite_dot(&w, k.as_ref()), a.out.as_deref())
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Build(a) => build(a),
        Command::Invlimit(a) => invlimit(a),
        Command::Hausdorff(a) => hausdorff_cmd(a),
        Command::Classify(a) => classify(a),
        Command::Chain(c) => chain_cmd(c),
        Command::Homeo(a) => homeo(a),
        Command::Nerve(a) => nerve_cmd(a),
        Command::ExportDot(a) => export_dot(a),
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
