mod settings;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};
use knnsp::experiments::config::CONFIG_KEYS;
use knnsp::experiments::{self, DensitySpec, Experiment, ExperimentConfig};
use knnsp::oracle::{default_resolution, ContinuumOracle};
use knnsp::shortest_path::sp_distance;
use knnsp::{GeometricGraph, TheoremConstants, WeightScheme};

use settings::{parse_point, CliError, CliResult, Settings};

#[derive(Parser)]
#[command(name = "knnsp", version, about = "Shortest paths on random kNN and epsilon graphs")]
struct Cli {
    /// Flat `key = value` file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print result tables to stdout as well.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Do not echo the effective config or warnings.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample points and write a kNN or epsilon graph.
    BuildGraph(BuildGraph),
    /// Shortest path between two vertices of a saved graph.
    Sp(Sp),
    /// Continuum f-distance between two points from the lattice oracle.
    OracleDist(OracleDist),
    /// Report the convergence theorem's constants.
    Constants(Constants),
    /// Rescaled unweighted shortest paths against the q-distance.
    ExpConvergence(ExpArgs),
    /// Weighted shortest paths against their limit field.
    ExpWeighted(ExpArgs),
    /// Weights that realize a chosen density-based distance.
    ExpWeightsCorollary(ExpArgs),
    /// Isomap embeddings of a two-density sample.
    ExpIsomap(ExpArgs),
    /// kNN against epsilon graphs under superadditive weights.
    ExpSuperadditive(ExpArgs),
}

#[derive(Args)]
struct BuildGraph {
    /// Density spec, e.g. `uniform:d=2` or `two-squares:ratio=8`.
    #[arg(long)]
    density: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Neighbors per point; exclusive with `--eps`.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    /// Weight scheme tag, e.g. `unit`, `euclidean`, `h-power:0.5`.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Graph file to write.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the sample as CSV.
    #[arg(long)]
    points: Option<PathBuf>,
}

#[derive(Args)]
struct Sp {
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    source: Option<usize>,
    #[arg(long)]
    target: Option<usize>,
    /// Write the loaded graph back out.
    #[arg(long)]
    write_graph: Option<PathBuf>,
}

#[derive(Args)]
struct OracleDist {
    #[arg(long)]
    density: Option<String>,
    /// `q` (density to the 1/d), `p` (density) or `one`.
    #[arg(long)]
    field: Option<String>,
    /// Lattice cells per axis.
    #[arg(long)]
    m: Option<usize>,
    /// First point, e.g. "0.2 0.5".
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    y: Option<String>,
}

#[derive(Args)]
struct Constants {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    /// Density spec; adds the smallest admissible lambda.
    #[arg(long)]
    density: Option<String>,
}

#[derive(Args)]
struct ExpArgs {
    /// `ratio` or `detour` (convergence only).
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    density: Option<String>,
    /// Sample sizes as a comma list.
    #[arg(long)]
    n: Option<String>,
    /// Fixed k or `schedule:<alpha>`.
    #[arg(long)]
    k: Option<String>,
    /// Fixed radius or `auto`.
    #[arg(long)]
    eps: Option<String>,
    /// `knn` or `eps`.
    #[arg(long)]
    graph: Option<String>,
    #[arg(long)]
    scheme: Option<String>,
    /// `fixed:x1 y1 x2 y2,...` or `random:count=..;margin=..;min_sep=..`.
    #[arg(long)]
    pairs: Option<String>,
    #[arg(long)]
    oracle_m: Option<String>,
    /// `auto` or `lattice`.
    #[arg(long)]
    reference: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    a: Option<String>,
    /// Embedding dimension (isomap only).
    #[arg(long)]
    dim: Option<String>,
    /// Also run the uniform control (isomap only).
    #[arg(long)]
    control: Option<String>,
    #[arg(long)]
    outdir: Option<String>,
}

const BUILD_KEYS: &[&str] = &["density", "n", "k", "eps", "scheme", "seed", "out", "points"];
const SP_KEYS: &[&str] = &["graph", "source", "target", "write_graph"];
const ORACLE_KEYS: &[&str] = &["density", "field", "m", "x", "y"];
const CONSTANT_KEYS: &[&str] = &["n", "k", "d", "lambda", "a", "density"];

struct Ctx {
    config: Option<PathBuf>,
    verbose: u8,
    quiet: bool,
}

impl Ctx {
    fn settings(&self, keys: &'static [&'static str]) -> CliResult<Settings> {
        Settings::load(keys, self.config.as_deref())
    }

    fn echo(&self, text: &str) {
        if !self.quiet {
            eprint!("{text}");
            eprintln!("---");
        }
    }

    fn warn(&self, msg: &str) {
        if !self.quiet {
            eprintln!("warning: {msg}");
        }
    }
}

fn density(spec: &str) -> CliResult<DensitySpec> {
    DensitySpec::parse(spec).map_err(CliError::from)
}

fn build_graph(ctx: &Ctx, args: BuildGraph) -> CliResult<()> {
    let mut s = ctx.settings(BUILD_KEYS)?;
    s.flag("density", args.density)?;
    s.flag("n", args.n)?;
    s.flag("k", args.k)?;
    s.flag("eps", args.eps)?;
    s.flag("scheme", args.scheme)?;
    s.flag("seed", args.seed)?;
    s.flag("out", args.out.map(|p| p.display().to_string()))?;
    s.flag("points", args.points.map(|p| p.display().to_string()))?;
    s.set_default("density", "uniform:d=2")?;
    s.set_default("scheme", "unit")?;
    s.set_default("seed", "0")?;
    let n: usize = s.require("n")?;
    let out: PathBuf = s.require("out")?;
    let (k, eps) = (s.get::<usize>("k")?, s.get::<f64>("eps")?);
    ctx.echo(&s.to_text());

    let model = density(s.raw("density").unwrap_or_default())?.model()?;
    let scheme = WeightScheme::parse(s.raw("scheme").unwrap_or_default())?;
    let points = model.sample(n, s.require("seed")?)?;
    let graph = match (k, eps) {
        (Some(k), None) => GeometricGraph::build_knn(&points, k, &scheme)?,
        (None, Some(eps)) => GeometricGraph::build_eps(&points, eps, &scheme)?,
        _ => return Err(CliError::Config("give exactly one of `k` and `eps`".into())),
    };
    graph.save(&out)?;
    if let Some(path) = s.get::<PathBuf>("points")? {
        points.save_csv(&path)?;
    }
    let components = knnsp::shortest_path::component_labels(&graph).into_iter().max().map_or(0, |m| m + 1);
    println!("vertices = {}", graph.n());
    println!("edges = {}", graph.edge_count());
    println!("components = {components}");
    println!("wrote {}", out.display());
    Ok(())
}

fn sp(ctx: &Ctx, args: Sp) -> CliResult<()> {
    let mut s = ctx.settings(SP_KEYS)?;
    s.flag("graph", args.graph.map(|p| p.display().to_string()))?;
    s.flag("source", args.source)?;
    s.flag("target", args.target)?;
    s.flag("write_graph", args.write_graph.map(|p| p.display().to_string()))?;
    let path: PathBuf = s.require("graph")?;
    let (source, target): (usize, usize) = (s.require("source")?, s.require("target")?);
    ctx.echo(&s.to_text());

    let graph = GeometricGraph::load(&path)?;
    if let Some(out) = s.get::<PathBuf>("write_graph")? {
        graph.save(&out)?;
    }
    let result = sp_distance(&graph, source, target)?;
    if !result.reachable {
        return Err(CliError::Runtime(format!("vertex {target} is not reachable from {source}")));
    }
    println!("length = {}", result.length);
    println!("hops = {}", result.hops());
    let path: Vec<String> = result.path.iter().map(|v| v.to_string()).collect();
    println!("path = {}", path.join(" "));
    Ok(())
}

fn oracle_dist(ctx: &Ctx, args: OracleDist) -> CliResult<()> {
    let mut s = ctx.settings(ORACLE_KEYS)?;
    s.flag("density", args.density)?;
    s.flag("field", args.field)?;
    s.flag("m", args.m)?;
    s.flag("x", args.x)?;
    s.flag("y", args.y)?;
    s.set_default("density", "uniform:d=2")?;
    s.set_default("field", "q")?;
    let x = parse_point(&s.require::<String>("x")?)?;
    let y = parse_point(&s.require::<String>("y")?)?;
    let model = density(s.raw("density").unwrap_or_default())?.model()?;
    s.set_default("m", default_resolution(model.dim()).to_string())?;
    let m: usize = s.require("m")?;
    ctx.echo(&s.to_text());

    let domain = model.domain().clone();
    let oracle = match s.raw("field").unwrap_or_default() {
        "q" => ContinuumOracle::for_q(&model, m)?,
        "p" => ContinuumOracle::build(domain, m, move |p| model.density_unchecked(p))?,
        "one" => ContinuumOracle::build(domain, m, |_| 1.0)?,
        other => return Err(CliError::Config(format!("unknown field `{other}`; use q, p or one"))),
    };
    let geodesic = oracle.geodesic(&x, &y)?;
    println!("distance = {}", geodesic.length);
    println!("lattice_nodes = {}", geodesic.nodes.len());
    Ok(())
}

fn constants(ctx: &Ctx, args: Constants) -> CliResult<()> {
    let mut s = ctx.settings(CONSTANT_KEYS)?;
    s.flag("n", args.n)?;
    s.flag("k", args.k)?;
    s.flag("d", args.d)?;
    s.flag("lambda", args.lambda)?;
    s.flag("a", args.a)?;
    s.flag("density", args.density)?;
    s.set_default("d", "2")?;
    s.set_default("lambda", "0.1")?;
    s.set_default("a", "0.3")?;
    let (n, k, d): (usize, usize, usize) = (s.require("n")?, s.require("k")?, s.require("d")?);
    let (lambda, a): (f64, f64) = (s.require("lambda")?, s.require("a")?);
    ctx.echo(&s.to_text());

    let mut c = TheoremConstants::evaluate(n, k, d, lambda, a)?;
    if let Some(spec) = s.raw("density") {
        let model = density(spec)?.model()?;
        if model.dim() != d {
            return Err(CliError::Config(format!("density has dimension {}, not {d}", model.dim())));
        }
        let (l, p_min, _) = model.lipschitz_constants();
        c = c.with_density(l, p_min);
    }
    println!("{c}");
    if !c.admissible() {
        ctx.warn("parameters are outside the theorem's admissible range");
    }
    Ok(())
}

fn experiment(ctx: &Ctx, which: Experiment, args: ExpArgs) -> CliResult<()> {
    let mut s = ctx.settings(&CONFIG_KEYS)?;
    let flags = [
        ("mode", args.mode),
        ("density", args.density),
        ("n", args.n),
        ("k", args.k),
        ("eps", args.eps),
        ("graph", args.graph),
        ("scheme", args.scheme),
        ("pairs", args.pairs),
        ("oracle_m", args.oracle_m),
        ("reference", args.reference),
        ("trials", args.trials),
        ("seed", args.seed),
        ("lambda", args.lambda),
        ("a", args.a),
        ("dim", args.dim),
        ("control", args.control),
        ("outdir", args.outdir),
    ];
    for (key, value) in flags {
        s.flag(key, value)?;
    }
    let config = ExperimentConfig::from_settings(which, s.pairs())?;
    ctx.echo(&config.to_text());

    let output = experiments::run(&config)?;
    for note in &output.notes {
        ctx.warn(note);
    }
    let dir = experiments::write_run(&config, &output)?;
    let mut stdout = std::io::stdout().lock();
    if ctx.verbose > 0 {
        experiments::report::write_csv(&output.table, &[], &mut stdout)?;
    }
    let _ = writeln!(stdout, "rows = {}", output.table.rows.len());
    for (key, median) in medians(&output.table) {
        let _ = writeln!(stdout, "{key} = {median:.6}");
    }
    let _ = writeln!(stdout, "wrote {}", dir.display());
    Ok(())
}

/// Median of the ratio column, split by sample and pipeline when present.
fn medians(table: &experiments::Table) -> Vec<(String, f64)> {
    let Some(column) = ["ratio", "stretch_ratio"].into_iter().find(|c| table.column(c).is_some()) else {
        return Vec::new();
    };
    let values = table.numbers(column).unwrap_or_default();
    let group: Vec<usize> = ["sample", "pipeline"].iter().filter_map(|c| table.column(c)).collect();
    let mut keys: Vec<String> = Vec::new();
    let mut buckets: Vec<Vec<f64>> = Vec::new();
    for (row, v) in table.rows.iter().zip(values) {
        let key = std::iter::once(format!("median_{column}"))
            .chain(group.iter().map(|&i| row[i].clone()))
            .collect::<Vec<_>>()
            .join(".");
        match keys.iter().position(|k| *k == key) {
            Some(i) => buckets[i].push(v),
            None => {
                keys.push(key);
                buckets.push(vec![v]);
            }
        }
    }
    keys.into_iter().zip(buckets.iter().map(|b| experiments::median(b))).collect()
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let ctx = Ctx { config: cli.config, verbose: cli.verbose, quiet: cli.quiet };
    match cli.command {
        Command::BuildGraph(a) => build_graph(&ctx, a),
        Command::Sp(a) => sp(&ctx, a),
        Command::OracleDist(a) => oracle_dist(&ctx, a),
        Command::Constants(a) => constants(&ctx, a),
        Command::ExpConvergence(a) => experiment(&ctx, Experiment::Convergence, a),
        Command::ExpWeighted(a) => experiment(&ctx, Experiment::Weighted, a),
        Command::ExpWeightsCorollary(a) => experiment(&ctx, Experiment::WeightsCorollary, a),
        Command::ExpIsomap(a) => experiment(&ctx, Experiment::Isomap, a),
        Command::ExpSuperadditive(a) => experiment(&ctx, Experiment::Superadditive, a),
    }
}

fn subcommand_name(argv: &[String]) -> Option<String> {
    let names: Vec<String> = Cli::command().get_subcommands().map(|c| c.get_name().to_string()).collect();
    argv.iter().skip(1).find(|a| names.contains(a)).cloned()
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Missing(_) = e {
                let mut cmd = Cli::command();
                cmd.build();
                let usage =
                    match subcommand_name(&argv).and_then(|n| cmd.find_subcommand_mut(&n).map(|c| c.render_usage())) {
                        Some(u) => u,
                        None => cmd.render_usage(),
                    };
                eprintln!("\n{usage}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
