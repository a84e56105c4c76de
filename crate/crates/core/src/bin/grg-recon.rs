use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use grg_recon::bounds::{self, BoundParams};
use grg_recon::experiments::{self, ExperimentKind, ExperimentSpec, RadiusPolicy, ResultRow};
use grg_recon::graph::{self, EdgeListHeader, GeometricGraph, DEFAULT_CONNECT_ATTEMPTS};
use grg_recon::{Boundary, Error, PointSet, Result, SeedKind, SeedStrategy, Topology};

#[derive(Parser)]
#[command(name = "grg-recon", version, about = "Geometric random graph reconstruction with distance queries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a connected geometric random graph and write it to disk.
    Generate(GraphArgs),
    /// Reconstruct a graph with SIMPLE and report the query counts.
    Reconstruct(RunArgs),
    /// Run phase 1 only and report the share of non-edges it rules out.
    Nonedge(RunArgs),
    /// Run a full experiment sweep and write its CSV.
    Sweep(SweepArgs),
    /// Print reference quantities and the complexity curve.
    Bounds(BoundsArgs),
}

#[derive(Args, Clone)]
struct GraphArgs {
    /// Expected node count (window side sqrt(n)).
    #[arg(long)]
    n: Option<usize>,
    /// Radius exponent: r = n^k.
    #[arg(long, conflicts_with = "r")]
    k: Option<f64>,
    /// Connection radius.
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, default_value = "torus")]
    boundary: Boundary,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    /// Coordinate file (written by generate, read by reconstruct and nonedge).
    #[arg(long)]
    coords: Option<PathBuf>,
    /// Edge list (the graph for generate, the recovered edges for reconstruct).
    #[arg(long)]
    edge_list: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// count:<s> | thinning:<eps> | optimal4 | fixed:<i,j,..>
    #[arg(long, default_value = "count:4")]
    seeds: String,
    /// Results CSV (one row).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall-clock time in the CSV.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// One of: complexity-dense, torus-vs-square, seed-size-sweep,
    /// rrg-compare-sparse, rrg-compare-dense, nonedge-sparse, nonedge-dense.
    #[arg(long)]
    experiment: ExperimentKind,
    /// Comma-separated n grid (overrides the experiment default).
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Radius exponent (overrides the experiment default).
    #[arg(long, conflicts_with = "r")]
    k: Option<f64>,
    /// Fixed radius (overrides the experiment default).
    #[arg(long)]
    r: Option<f64>,
    /// Seed-set sizes for seed-size-sweep.
    #[arg(long, value_delimiter = ',')]
    seed_sizes: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    iterations: usize,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    #[arg(long, default_value_t = bounds::DEFAULT_C)]
    c: f64,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, value_delimiter = ',', default_value = "500,1000,2000,4000,8000,16000")]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.3")]
    k: Vec<f64>,
    /// Radius for the distance-sandwich quantities; n^k of the first k when absent.
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, default_value_t = bounds::DEFAULT_C)]
    c: f64,
    /// Reference-curve CSV; printed after the summary when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_seeds(spec: &str, rng_seed: u64) -> Result<SeedStrategy> {
    let bad = |detail: String| Error::Parse { what: "--seeds", detail };
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let kind = match kind {
        "count" => SeedKind::UniformCount(arg.parse().map_err(|e| bad(format!("count: {e}")))?),
        "thinning" => SeedKind::UniformThinning(arg.parse().map_err(|e| bad(format!("thinning: {e}")))?),
        "optimal4" => SeedKind::NearOptimal4,
        "fixed" => SeedKind::FixedNodes(
            arg.split(',')
                .filter(|s| !s.is_empty())
                .map(|s| s.trim().parse().map_err(|e| bad(format!("fixed: {e}"))))
                .collect::<Result<_>>()?,
        ),
        other => return Err(bad(format!("unknown seed strategy '{other}'"))),
    };
    Ok(SeedStrategy::new(kind, grg_recon::rng::derive_seed(rng_seed, &[1])))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn radius_for(n: usize, k: Option<f64>, r: Option<f64>) -> Result<f64> {
    match (k, r) {
        (_, Some(r)) => Ok(r),
        (Some(k), None) => Ok((n as f64).powf(k)),
        (None, None) => Err(Error::Parameter("one of --k or --r is required".into())),
    }
}

/// Loads the graph from `--coords`, or samples a connected one.
fn load_or_sample(args: &GraphArgs) -> Result<GeometricGraph> {
    if let Some(path) = &args.coords {
        let ps = PointSet::read_from(BufReader::new(File::open(path)?))?;
        let n = ps.domain().area().round() as usize;
        return graph::build_grg(&ps, radius_for(n, args.k, args.r)?);
    }
    let n = args
        .n
        .ok_or_else(|| Error::Parameter("--n is required without --coords".into()))?;
    let r = radius_for(n, args.k, args.r)?;
    Ok(graph::sample_connected_grg(n, r, args.boundary, args.rng_seed, DEFAULT_CONNECT_ATTEMPTS)?.0)
}

fn write_single_row(path: &Path, row: &ResultRow) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "# schema={}", experiments::SCHEMA_VERSION)?;
    experiments::write_rows(&mut w, std::slice::from_ref(row))?;
    w.flush()?;
    Ok(())
}

fn generate(args: &GraphArgs) -> Result<()> {
    if args.coords.is_some() && args.n.is_none() {
        return Err(Error::Parameter("generate needs --n".into()));
    }
    let g = load_or_sample(&GraphArgs { coords: None, ..args.clone() })?;
    if let Some(path) = &args.coords {
        let mut w = create(path)?;
        g.point_set().write_to(&mut w)?;
        w.flush()?;
    }
    if let Some(path) = &args.edge_list {
        let mut w = create(path)?;
        graph::write_edge_list(&mut w, &EdgeListHeader::for_graph(&g, Some(g.radius())), g.adjacency().edges())?;
        w.flush()?;
    }
    println!(
        "nodes={} edges={} r={} boundary={} mean_degree={:.4} connected={}",
        g.node_count(),
        g.edge_count(),
        g.radius(),
        g.domain().boundary(),
        graph::mean_degree(&g),
        graph::is_connected(&g),
    );
    Ok(())
}

fn reconstruct(args: &RunArgs) -> Result<()> {
    let g = load_or_sample(&args.graph)?;
    let strategy = parse_seeds(&args.seeds, args.graph.rng_seed)?;
    let row = experiments::reconstruction_row(&g, args.graph.k, Some(g.radius()), &strategy, args.timing)?;
    if let Some(path) = &args.graph.edge_list {
        let res = grg_recon::reconstruct(&g, &strategy)?;
        let mut w = create(path)?;
        graph::write_edge_list(&mut w, &EdgeListHeader::for_graph(&g, Some(g.radius())), res.edges)?;
        w.flush()?;
    }
    if let Some(path) = &args.out {
        write_single_row(path, &row)?;
    }
    println!(
        "nodes={} edges={} seeds={} phase1={} phase2={} total={} exact={}",
        row.node_count,
        row.edge_count,
        row.seed_count,
        row.phase1,
        row.phase2,
        row.total_queries,
        row.exact == Some(1.0),
    );
    Ok(())
}

fn nonedge(args: &RunArgs) -> Result<()> {
    let g = load_or_sample(&args.graph)?;
    let strategy = parse_seeds(&args.seeds, args.graph.rng_seed)?;
    let row = experiments::nonedge_row(&g, args.graph.k, &strategy, args.timing)?;
    if let Some(path) = &args.out {
        write_single_row(path, &row)?;
    }
    println!(
        "nodes={} edges={} seeds={} phase1={} nonedge_fraction={:.6} directed_fraction={:.6}",
        row.node_count,
        row.edge_count,
        row.seed_count,
        row.phase1,
        row.nonedge_fraction.unwrap_or(0.0),
        row.directed_fraction.unwrap_or(0.0),
    );
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let mut spec = ExperimentSpec::preset(args.experiment);
    if !args.n.is_empty() {
        spec.n_values = args.n.clone();
    }
    if let Some(k) = args.k {
        spec = spec.with_k(k);
    }
    if let Some(r) = args.r {
        spec.radius = RadiusPolicy::Fixed { r };
    }
    if !args.seed_sizes.is_empty() {
        spec.seed_sizes = args.seed_sizes.clone();
    }
    spec.iterations = args.iterations;
    spec.base_rng_seed = args.rng_seed;
    spec.c = args.c;
    spec.timing = args.timing;
    let rows = experiments::run(&spec)?;
    match &args.out {
        Some(path) => {
            let mut w = create(path)?;
            experiments::write_csv(&mut w, &spec, &rows)?;
            w.flush()?;
        }
        None => experiments::write_csv(io::stdout().lock(), &spec, &rows)?,
    }
    let errors = rows.iter().filter(|r| r.row == experiments::RowKind::Error).count();
    if errors > 0 {
        eprintln!("warning: {errors} cell(s) failed; see the error column");
    }
    Ok(())
}

fn bounds_cmd(args: &BoundsArgs) -> Result<()> {
    let mut summary = Vec::new();
    summary.push(format!("nonedge_constant={}", bounds::nonedge_constant()));
    for &k in &args.k {
        let e = bounds::seed_exponents(Some(k))?;
        summary.push(format!(
            "k={k} exponent={} a={} eps={}",
            bounds::complexity_exponent(k)?,
            e.a,
            e.eps
        ));
    }
    for &n in &args.n {
        let first_k = args.k.first().copied();
        let r = radius_for(n, first_k, args.r)?;
        let p = BoundParams::new(n, r, args.c)?;
        let seeds = first_k
            .map(|k| bounds::seed_exponents(Some(k)).map(|e| bounds::seed_count(n, e.eps)))
            .transpose()?;
        summary.push(format!(
            "n={n} r={r} x_n={} ell_n(1)={} u_n(1)={} seed_count={}",
            bounds::x_n(n),
            p.ell_n(1),
            p.u_n(1),
            seeds.map_or_else(|| "-".into(), |s| s.to_string()),
        ));
    }
    match &args.out {
        Some(path) => {
            let mut w = create(path)?;
            bounds::write_reference_curve(&mut w, &args.n, &args.k)?;
            w.flush()?;
            for line in summary {
                println!("{line}");
            }
        }
        None => {
            let mut out = io::stdout().lock();
            for line in summary {
                writeln!(out, "# {line}")?;
            }
            bounds::write_reference_curve(out, &args.n, &args.k)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::Nonedge(a) => nonedge(a),
        Command::Sweep(a) => sweep(a),
        Command::Bounds(a) => bounds_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
