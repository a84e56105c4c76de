//! Reproducible simulation sweeps with CSV output.
//!
//! Every `(n, trial)` cell draws its randomness from a substream of the base
//! seed keyed by the experiment, `n` and the trial index, so cells can run in
//! any order or in parallel and still produce identical rows.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::bounds::{check_distance_sandwich, complexity_curve, seed_count, seed_exponents, DEFAULT_C, DEFAULT_C1};
use crate::error::{param, Error, Result};
use crate::geometry::{sample_ppp, Boundary, Domain};
use crate::graph::{
    build_grg, matched_degree, sample_connected_grg, sample_connected_rrg, GeometricGraph, Topology,
    DEFAULT_CONNECT_ATTEMPTS,
};
use crate::rng::derive_seed;
use crate::simple::{nonedge_detection, reconstruct, SeedStrategy};

/// Version tag written in the first line of every results file.
pub const SCHEMA_VERSION: &str = "grg-recon-results/1";

/// CSV columns, in order.
pub const COLUMNS: [&str; 25] = [
    "experiment",
    "row",
    "n",
    "k",
    "r",
    "boundary",
    "graph_family",
    "trial",
    "seed_target",
    "node_count",
    "seed_count",
    "phase1",
    "phase2",
    "total_queries",
    "edge_count",
    "exact",
    "nonedge_fraction",
    "directed_fraction",
    "total_queries_se",
    "nonedge_fraction_se",
    "reference_curve",
    "lower_violations",
    "min_sufficient_c",
    "elapsed_s",
    "error",
];

/// Sandwich-check sampling per geometric trial: sources x targets.
const SANDWICH_SOURCES: usize = 100;
const SANDWICH_TARGETS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    /// Query count against `n` for `r = n^k`.
    ComplexityDense,
    /// Same point sets under torus and square boundaries.
    TorusVsSquare,
    /// Query count against seed-set size at fixed `n`.
    SeedSizeSweep,
    /// Geometric vs degree-matched random regular graph, mean degree 50, four seeds.
    RrgCompareSparse,
    /// Geometric (`r = n^k`) vs degree-matched random regular graph.
    RrgCompareDense,
    /// Non-edge detection with `r = 2 sqrt(ln n)` and four near-optimal seeds.
    NonEdgeSparse,
    /// Non-edge detection with `r = n^k` and `ceil(ln(n) n^k)` seeds.
    NonEdgeDense,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::ComplexityDense,
        ExperimentKind::TorusVsSquare,
        ExperimentKind::SeedSizeSweep,
        ExperimentKind::RrgCompareSparse,
        ExperimentKind::RrgCompareDense,
        ExperimentKind::NonEdgeSparse,
        ExperimentKind::NonEdgeDense,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::ComplexityDense => "complexity-dense",
            ExperimentKind::TorusVsSquare => "torus-vs-square",
            ExperimentKind::SeedSizeSweep => "seed-size-sweep",
            ExperimentKind::RrgCompareSparse => "rrg-compare-sparse",
            ExperimentKind::RrgCompareDense => "rrg-compare-dense",
            ExperimentKind::NonEdgeSparse => "nonedge-sparse",
            ExperimentKind::NonEdgeDense => "nonedge-dense",
        }
    }

    fn tag(self) -> u64 {
        Self::ALL.iter().position(|&k| k == self).unwrap() as u64
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|k| k.name()).collect();
                Error::Parameter(format!("unknown experiment '{s}' (one of {})", names.join(", ")))
            })
    }
}

/// How the connection radius depends on `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusPolicy {
    /// `r = n^k`.
    Power { k: f64 },
    /// `r = sqrt(degree / pi)`, giving mean degree `degree` at unit intensity.
    MeanDegree { degree: f64 },
    /// `r = c1 sqrt(ln n)`.
    LogScaled { c1: f64 },
    Fixed { r: f64 },
}

impl RadiusPolicy {
    pub fn radius(&self, n: usize) -> f64 {
        let nf = n as f64;
        match *self {
            RadiusPolicy::Power { k } => nf.powf(k),
            RadiusPolicy::MeanDegree { degree } => (degree / std::f64::consts::PI).sqrt(),
            RadiusPolicy::LogScaled { c1 } => c1 * nf.ln().sqrt(),
            RadiusPolicy::Fixed { r } => r,
        }
    }

    pub fn k(&self) -> Option<f64> {
        match *self {
            RadiusPolicy::Power { k } => Some(k),
            _ => None,
        }
    }
}

/// How many seeds, and how they are picked, as a function of `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeedPolicy {
    /// `max(4, round(ln(n) n^eps))` uniform seeds with `eps` from the seed
    /// exponents of the radius exponent (sparse values when there is none).
    PrescribedCount,
    /// `ceil(ln(n) n^eps)` uniform seeds.
    LogPowerCeil { eps: f64 },
    /// A fixed number of uniform seeds.
    Count(usize),
    /// Independent thinning with exponent `eps`.
    Thinning { eps: f64 },
    /// Nearest nodes to the four torus packing locations.
    NearOptimal4,
}

impl SeedPolicy {
    fn strategy(&self, n: usize, k: Option<f64>, node_count: usize, rng_seed: u64) -> Result<SeedStrategy> {
        let count = |s: usize| SeedStrategy::uniform_count(s.min(node_count), rng_seed);
        Ok(match *self {
            SeedPolicy::PrescribedCount => count(seed_count(n, seed_exponents(k)?.eps)),
            SeedPolicy::LogPowerCeil { eps } => {
                let nf = n as f64;
                count((nf.ln() * nf.powf(eps)).ceil() as usize)
            }
            SeedPolicy::Count(s) => count(s),
            SeedPolicy::Thinning { eps } => SeedStrategy::thinning(eps, rng_seed),
            SeedPolicy::NearOptimal4 => SeedStrategy::near_optimal4(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub n_values: Vec<usize>,
    pub radius: RadiusPolicy,
    pub seeds: SeedPolicy,
    /// Seed-set sizes for [`ExperimentKind::SeedSizeSweep`].
    pub seed_sizes: Vec<usize>,
    pub iterations: usize,
    pub base_rng_seed: u64,
    pub c: f64,
    /// Record wall-clock time per trial. Off by default so output is
    /// byte-for-byte reproducible.
    pub timing: bool,
}

impl ExperimentSpec {
    /// Defaults for each experiment, with 100 iterations per cell.
    pub fn preset(kind: ExperimentKind) -> Self {
        let dense = RadiusPolicy::Power { k: 0.3 };
        let (n_values, radius, seeds) = match kind {
            ExperimentKind::ComplexityDense | ExperimentKind::TorusVsSquare => {
                (vec![500, 1000, 2000, 4000], dense, SeedPolicy::PrescribedCount)
            }
            ExperimentKind::SeedSizeSweep => (vec![2000], dense, SeedPolicy::PrescribedCount),
            ExperimentKind::RrgCompareSparse => (
                vec![500, 1000, 2000, 4000],
                RadiusPolicy::MeanDegree { degree: 50.0 },
                SeedPolicy::Count(4),
            ),
            ExperimentKind::RrgCompareDense => (vec![500, 1000, 2000], dense, SeedPolicy::PrescribedCount),
            ExperimentKind::NonEdgeSparse => (
                vec![500, 1000, 2000, 5000],
                RadiusPolicy::LogScaled { c1: DEFAULT_C1 },
                SeedPolicy::NearOptimal4,
            ),
            ExperimentKind::NonEdgeDense => (
                vec![500, 1000, 2000, 5000],
                dense,
                SeedPolicy::LogPowerCeil { eps: 0.3 },
            ),
        };
        Self {
            kind,
            n_values,
            radius,
            seeds,
            seed_sizes: vec![4, 8, 16, 32, 64, 128, 256, 512, 1024],
            iterations: 100,
            base_rng_seed: 0,
            c: DEFAULT_C,
            timing: false,
        }
    }

    /// Sets the radius exponent, keeping dense-regime seed policies in step.
    pub fn with_k(mut self, k: f64) -> Self {
        self.radius = RadiusPolicy::Power { k };
        if let SeedPolicy::LogPowerCeil { .. } = self.seeds {
            self.seeds = SeedPolicy::LogPowerCeil { eps: k };
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return param("iterations must be at least 1");
        }
        if self.n_values.is_empty() {
            return param("n_values must not be empty");
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return param("n_values must be strictly increasing");
        }
        if self.n_values[0] < 2 {
            return param("n must be at least 2");
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return param(format!("c must be positive, got {}", self.c));
        }
        if let Some(k) = self.radius.k() {
            seed_exponents(Some(k))?;
        }
        if self.kind == ExperimentKind::SeedSizeSweep && self.seed_sizes.contains(&0) {
            return param("seed sizes must be positive");
        }
        Ok(())
    }

    /// Seed sizes actually swept at `n`: the configured list plus the count
    /// prescribed by the seed policy, ascending.
    pub fn sweep_sizes(&self, n: usize) -> Result<Vec<usize>> {
        let mut sizes = self.seed_sizes.clone();
        if let SeedPolicy::PrescribedCount = self.seeds {
            sizes.push(seed_count(n, seed_exponents(self.radius.k())?.eps));
        }
        sizes.retain(|&s| s <= n);
        sizes.sort_unstable();
        sizes.dedup();
        Ok(sizes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GraphFamily {
    Grg,
    Rrg,
}

impl fmt::Display for GraphFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphFamily::Grg => "grg",
            GraphFamily::Rrg => "rrg",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Trial,
    Mean,
    Error,
}

impl fmt::Display for RowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowKind::Trial => "trial",
            RowKind::Mean => "mean",
            RowKind::Error => "error",
        })
    }
}

/// One CSV line: a trial, the mean over a group of trials, or a failed cell.
///
/// Counts are stored as `f64` so that mean rows share the layout; trial values
/// are exact integers.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: ExperimentKind,
    pub row: RowKind,
    pub n: usize,
    pub k: Option<f64>,
    pub r: Option<f64>,
    pub boundary: Option<Boundary>,
    pub family: Option<GraphFamily>,
    pub trial: Option<usize>,
    pub seed_target: Option<usize>,
    pub node_count: f64,
    pub seed_count: f64,
    pub phase1: f64,
    pub phase2: f64,
    pub total_queries: f64,
    pub edge_count: f64,
    pub exact: Option<f64>,
    pub nonedge_fraction: Option<f64>,
    pub directed_fraction: Option<f64>,
    pub total_queries_se: Option<f64>,
    pub nonedge_fraction_se: Option<f64>,
    pub reference_curve: Option<f64>,
    pub lower_violations: Option<f64>,
    pub min_sufficient_c: Option<f64>,
    pub elapsed_s: Option<f64>,
    pub error: Option<String>,
}

impl ResultRow {
    fn blank(experiment: ExperimentKind, row: RowKind, n: usize) -> Self {
        Self {
            experiment,
            row,
            n,
            k: None,
            r: None,
            boundary: None,
            family: None,
            trial: None,
            seed_target: None,
            node_count: 0.0,
            seed_count: 0.0,
            phase1: 0.0,
            phase2: 0.0,
            total_queries: 0.0,
            edge_count: 0.0,
            exact: None,
            nonedge_fraction: None,
            directed_fraction: None,
            total_queries_se: None,
            nonedge_fraction_se: None,
            reference_curve: None,
            lower_violations: None,
            min_sufficient_c: None,
            elapsed_s: None,
            error: None,
        }
    }

    fn group_key(&self) -> (Option<GraphFamily>, Option<u8>, Option<usize>) {
        (
            self.family,
            self.boundary.map(|b| b as u8),
            self.seed_target,
        )
    }

    fn record(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_default();
        vec![
            self.experiment.to_string(),
            self.row.to_string(),
            self.n.to_string(),
            opt(self.k),
            opt(self.r),
            self.boundary.map(|b| b.to_string()).unwrap_or_default(),
            self.family.map(|f| f.to_string()).unwrap_or_default(),
            self.trial.map(|t| t.to_string()).unwrap_or_default(),
            self.seed_target.map(|t| t.to_string()).unwrap_or_default(),
            fmt_num(self.node_count),
            fmt_num(self.seed_count),
            fmt_num(self.phase1),
            fmt_num(self.phase2),
            fmt_num(self.total_queries),
            fmt_num(self.edge_count),
            opt(self.exact),
            opt(self.nonedge_fraction),
            opt(self.directed_fraction),
            opt(self.total_queries_se),
            opt(self.nonedge_fraction_se),
            opt(self.reference_curve),
            opt(self.lower_violations),
            opt(self.min_sufficient_c),
            opt(self.elapsed_s),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

/// Integers without a fractional part, everything else in shortest
/// round-trip form.
fn fmt_num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Parameters shared by all rows of one cell.
struct Cell<'a> {
    spec: &'a ExperimentSpec,
    n: usize,
    trial: usize,
    seed: u64,
}

impl Cell<'_> {
    fn row(&self) -> ResultRow {
        let mut row = ResultRow::blank(self.spec.kind, RowKind::Trial, self.n);
        row.k = self.spec.radius.k();
        row.trial = Some(self.trial);
        row.reference_curve = row.k.and_then(|k| complexity_curve(self.n, k).ok());
        row
    }

    fn sub(&self, tag: u64) -> u64 {
        derive_seed(self.seed, &[tag])
    }

    fn radius(&self) -> f64 {
        self.spec.radius.radius(self.n)
    }

    fn connected_grg(&self, boundary: Boundary) -> Result<GeometricGraph> {
        Ok(sample_connected_grg(self.n, self.radius(), boundary, self.sub(0), DEFAULT_CONNECT_ATTEMPTS)?.0)
    }

    fn strategy(&self, node_count: usize) -> Result<SeedStrategy> {
        self.spec
            .seeds
            .strategy(self.n, self.spec.radius.k(), node_count, self.sub(1))
    }

    fn reconstruct_row<G: Topology>(
        &self,
        g: &G,
        family: GraphFamily,
        strategy: &SeedStrategy,
    ) -> Result<ResultRow> {
        let res = reconstruct(g, strategy)?;
        let truth: Vec<(u32, u32)> = g.adjacency().edges().collect();
        let mut row = self.row();
        row.family = Some(family);
        row.boundary = g.points().map(|p| p.domain().boundary());
        row.node_count = res.node_count as f64;
        row.seed_count = res.seed_count() as f64;
        row.phase1 = res.phase1_queries as f64;
        row.phase2 = res.phase2_queries as f64;
        row.total_queries = res.total_queries() as f64;
        row.edge_count = truth.len() as f64;
        row.exact = Some(if res.edges == truth { 1.0 } else { 0.0 });
        if self.spec.timing {
            row.elapsed_s = Some(res.elapsed.as_secs_f64());
        }
        Ok(row)
    }

    fn annotate_geometry(&self, row: &mut ResultRow, g: &GeometricGraph) -> Result<()> {
        row.r = Some(g.radius());
        let report = check_distance_sandwich(g, self.spec.c, SANDWICH_SOURCES, SANDWICH_TARGETS, self.sub(2))?;
        row.lower_violations = Some(report.lower_violations as f64);
        row.min_sufficient_c = Some(report.min_sufficient_c);
        Ok(())
    }

    fn run(&self) -> Result<Vec<ResultRow>> {
        match self.spec.kind {
            ExperimentKind::ComplexityDense => {
                let g = self.connected_grg(Boundary::Torus)?;
                let mut row = self.reconstruct_row(&g, GraphFamily::Grg, &self.strategy(g.node_count())?)?;
                self.annotate_geometry(&mut row, &g)?;
                Ok(vec![row])
            }
            ExperimentKind::TorusVsSquare => {
                let (torus, square) = self.paired_boundaries()?;
                let strategy = self.strategy(torus.node_count())?;
                let mut rows = Vec::new();
                for g in [&torus, &square] {
                    let mut row = self.reconstruct_row(g, GraphFamily::Grg, &strategy)?;
                    self.annotate_geometry(&mut row, g)?;
                    rows.push(row);
                }
                Ok(rows)
            }
            ExperimentKind::SeedSizeSweep => {
                let g = self.connected_grg(Boundary::Torus)?;
                let mut rows = Vec::new();
                for s in self.spec.sweep_sizes(self.n)? {
                    let strategy = SeedStrategy::uniform_count(s.min(g.node_count()), self.sub(1));
                    let mut row = self.reconstruct_row(&g, GraphFamily::Grg, &strategy)?;
                    row.r = Some(g.radius());
                    row.seed_target = Some(s);
                    rows.push(row);
                }
                Ok(rows)
            }
            ExperimentKind::RrgCompareSparse | ExperimentKind::RrgCompareDense => {
                let g = self.connected_grg(Boundary::Torus)?;
                let nodes = g.node_count();
                let degree = matched_degree(g.adjacency().mean_degree(), nodes)?;
                let (rrg, _) = sample_connected_rrg(nodes, degree, self.sub(3), DEFAULT_CONNECT_ATTEMPTS)?;
                let strategy = self.strategy(nodes)?;
                let mut grg_row = self.reconstruct_row(&g, GraphFamily::Grg, &strategy)?;
                grg_row.r = Some(g.radius());
                let rrg_row = self.reconstruct_row(&rrg, GraphFamily::Rrg, &strategy)?;
                Ok(vec![grg_row, rrg_row])
            }
            ExperimentKind::NonEdgeSparse | ExperimentKind::NonEdgeDense => {
                let g = self.connected_grg(Boundary::Torus)?;
                let strategy = self.strategy(g.node_count())?;
                let mut row = nonedge_row(&g, self.spec.radius.k(), &strategy, self.spec.timing)?;
                let template = self.row();
                row.experiment = template.experiment;
                row.n = template.n;
                row.trial = template.trial;
                row.reference_curve = template.reference_curve;
                Ok(vec![row])
            }
        }
    }

    /// One point set, connected under both boundary conditions.
    fn paired_boundaries(&self) -> Result<(GeometricGraph, GeometricGraph)> {
        let domain = Domain::for_nodes(self.n, Boundary::Torus)?;
        let r = self.radius();
        for attempt in 0..DEFAULT_CONNECT_ATTEMPTS {
            let ps = sample_ppp(domain, 1.0, derive_seed(self.sub(0), &[attempt as u64]))?;
            if ps.is_empty() {
                continue;
            }
            let torus = build_grg(&ps, r)?;
            let square = build_grg(&ps.with_boundary(Boundary::Square), r)?;
            if torus.adjacency().is_connected() && square.adjacency().is_connected() {
                return Ok((torus, square));
            }
        }
        Err(Error::Disconnected(format!(
            "no point set connected on both torus and square (n={}, r={r})",
            self.n
        )))
    }
}

/// How cells are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Serial,
    Parallel,
}

/// Runs every `(n, trial)` cell and returns trial rows followed, per group,
/// by a mean row. Failed cells become error rows.
pub fn run(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    run_with(spec, Execution::Parallel)
}

pub fn run_with(spec: &ExperimentSpec, execution: Execution) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let cells: Vec<(usize, usize)> = spec
        .n_values
        .iter()
        .flat_map(|&n| (0..spec.iterations).map(move |t| (n, t)))
        .collect();
    let run_cell = |&(n, trial): &(usize, usize)| {
        let cell = Cell {
            spec,
            n,
            trial,
            seed: derive_seed(spec.base_rng_seed, &[spec.kind.tag(), n as u64, trial as u64]),
        };
        cell.run().unwrap_or_else(|e| {
            let mut row = cell.row();
            row.row = RowKind::Error;
            row.error = Some(e.to_string());
            vec![row]
        })
    };
    let per_cell: Vec<Vec<ResultRow>> = match execution {
        Execution::Serial => cells.iter().map(run_cell).collect(),
        Execution::Parallel => cells.par_iter().map(run_cell).collect(),
    };

    let mut out = Vec::new();
    for &n in &spec.n_values {
        let rows: Vec<&ResultRow> = per_cell.iter().flatten().filter(|r| r.n == n).collect();
        let mut keys = Vec::new();
        for r in rows.iter().filter(|r| r.row == RowKind::Trial) {
            if !keys.contains(&r.group_key()) {
                keys.push(r.group_key());
            }
        }
        for key in keys {
            let group: Vec<&ResultRow> = rows
                .iter()
                .copied()
                .filter(|r| r.row == RowKind::Trial && r.group_key() == key)
                .collect();
            out.extend(group.iter().map(|r| (*r).clone()));
            out.push(mean_row(&group));
        }
        out.extend(rows.iter().filter(|r| r.row == RowKind::Error).map(|r| (*r).clone()));
    }
    Ok(out)
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn std_error(values: &[f64]) -> f64 {
    let m = values.len();
    if m < 2 {
        return 0.0;
    }
    let mu = mean(values);
    let var = values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (m - 1) as f64;
    (var / m as f64).sqrt()
}

fn mean_row(group: &[&ResultRow]) -> ResultRow {
    let first = group[0];
    let col = |f: fn(&ResultRow) -> f64| -> Vec<f64> { group.iter().map(|r| f(r)).collect() };
    let opt_col = |f: fn(&ResultRow) -> Option<f64>| -> Option<Vec<f64>> {
        group.iter().map(|r| f(r)).collect::<Option<Vec<f64>>>()
    };
    let mut row = ResultRow::blank(first.experiment, RowKind::Mean, first.n);
    row.k = first.k;
    row.boundary = first.boundary;
    row.family = first.family;
    row.seed_target = first.seed_target;
    row.reference_curve = first.reference_curve;
    row.r = opt_col(|r| r.r).map(|v| mean(&v));
    row.node_count = mean(&col(|r| r.node_count));
    row.seed_count = mean(&col(|r| r.seed_count));
    row.phase1 = mean(&col(|r| r.phase1));
    row.phase2 = mean(&col(|r| r.phase2));
    let totals = col(|r| r.total_queries);
    row.total_queries = mean(&totals);
    row.total_queries_se = Some(std_error(&totals));
    row.edge_count = mean(&col(|r| r.edge_count));
    row.exact = opt_col(|r| r.exact).map(|v| mean(&v));
    if let Some(fr) = opt_col(|r| r.nonedge_fraction) {
        row.nonedge_fraction = Some(mean(&fr));
        row.nonedge_fraction_se = Some(std_error(&fr));
    }
    row.directed_fraction = opt_col(|r| r.directed_fraction).map(|v| mean(&v));
    row.lower_violations = opt_col(|r| r.lower_violations).map(|v| v.iter().sum());
    row.min_sufficient_c = opt_col(|r| r.min_sufficient_c).map(|v| v.iter().copied().fold(0.0, f64::max));
    row.elapsed_s = opt_col(|r| r.elapsed_s).map(|v| mean(&v));
    row
}

/// Writes a `# schema=...` line, the header row and one line per row.
pub fn write_csv<W: Write>(mut w: W, spec: &ExperimentSpec, rows: &[ResultRow]) -> Result<()> {
    let n_values: Vec<String> = spec.n_values.iter().map(|n| n.to_string()).collect();
    writeln!(
        w,
        "# schema={SCHEMA_VERSION} experiment={} n_values={} iterations={} rng_seed={} c={} timing={}",
        spec.kind,
        n_values.join(";"),
        spec.iterations,
        spec.base_rng_seed,
        spec.c,
        if spec.timing { "on" } else { "off" },
    )?;
    write_rows(w, rows)
}

/// Header row plus rows, without the schema line.
pub fn write_rows<W: Write>(w: W, rows: &[ResultRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(COLUMNS)?;
    for r in rows {
        out.write_record(r.record())?;
    }
    out.flush()?;
    Ok(())
}

/// One row describing a single reconstruction, in the results schema.
pub fn reconstruction_row<G: Topology>(
    g: &G,
    k: Option<f64>,
    r: Option<f64>,
    strategy: &SeedStrategy,
    timing: bool,
) -> Result<ResultRow> {
    let spec = ExperimentSpec {
        timing,
        ..ExperimentSpec::preset(ExperimentKind::ComplexityDense)
    };
    let cell = Cell {
        spec: &spec,
        n: g.adjacency().node_count(),
        trial: 0,
        seed: 0,
    };
    let family = if g.points().is_some() { GraphFamily::Grg } else { GraphFamily::Rrg };
    let mut row = cell.reconstruct_row(g, family, strategy)?;
    row.k = k;
    row.r = r;
    row.reference_curve = k.and_then(|k| complexity_curve(row.n, k).ok());
    Ok(row)
}

/// One row describing a single non-edge detection run.
pub fn nonedge_row(g: &GeometricGraph, k: Option<f64>, strategy: &SeedStrategy, timing: bool) -> Result<ResultRow> {
    let rep = nonedge_detection(g, strategy)?;
    let mut row = ResultRow::blank(ExperimentKind::NonEdgeSparse, RowKind::Trial, g.node_count());
    row.k = k;
    row.r = Some(g.radius());
    row.trial = Some(0);
    row.family = Some(GraphFamily::Grg);
    row.boundary = Some(g.domain().boundary());
    row.node_count = rep.node_count as f64;
    row.seed_count = rep.seeds.len() as f64;
    row.phase1 = rep.phase1_queries as f64;
    row.total_queries = rep.phase1_queries as f64;
    row.edge_count = g.edge_count() as f64;
    row.nonedge_fraction = Some(rep.fraction);
    row.directed_fraction = Some(rep.directed_fraction);
    if timing {
        row.elapsed_s = Some(rep.elapsed.as_secs_f64());
    }
    Ok(row)
}

/// Least-squares slope of `ln(mean total_queries)` against `ln n` over the
/// mean rows.
pub fn fit_exponent(rows: &[ResultRow]) -> Result<f64> {
    let mut points: Vec<(f64, f64)> = Vec::new();
    for r in rows.iter().filter(|r| r.row == RowKind::Mean) {
        if points.iter().any(|p| p.0 == (r.n as f64).ln()) {
            return param(format!("several mean rows for n = {}; filter to one group first", r.n));
        }
        if r.total_queries <= 0.0 {
            return param(format!("non-positive query count at n = {}", r.n));
        }
        points.push(((r.n as f64).ln(), r.total_queries.ln()));
    }
    loglog_slope(&points)
}

/// Ordinary least-squares slope through `(x, y)` points; needs 3 distinct `x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 3 {
        return param(format!("need at least 3 distinct n values, got {}", xs.len()));
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}
