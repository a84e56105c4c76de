//! The SIMPLE reconstruction algorithm.
//!
//! Phase 1 queries every seed against every node. A pair `{a, b}` survives
//! into the candidate set when no seed sees a hop-distance difference above
//! one between `a` and `b`; an edge can never be cut this way because it would
//! lie on a shortest path from the seed. Phase 2 queries each surviving pair
//! and keeps those at distance one.

use std::time::{Duration, Instant};

use rand::seq::index;
use rayon::prelude::*;

use crate::bounds::expected_seed_count;
use crate::error::{param, Error, Result};
use crate::geometry::{bernoulli_subset, Boundary};
use crate::graph::{Adjacency, Topology};
use crate::oracle::{DistanceOracle, Phase};
use crate::rng::rng_from_seed;

/// How seeds are drawn.
#[derive(Debug, Clone, PartialEq)]
pub enum SeedKind {
    /// Exactly `s` distinct nodes, uniformly at random.
    UniformCount(usize),
    /// Each node independently with probability `ln(n) n^(eps - 1)`, clipped to 1.
    UniformThinning(f64),
    /// The node nearest to each of the four torus packing locations.
    NearOptimal4,
    /// An explicit node list.
    FixedNodes(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedStrategy {
    pub kind: SeedKind,
    pub rng_seed: u64,
}

impl SeedStrategy {
    pub fn new(kind: SeedKind, rng_seed: u64) -> Self {
        Self { kind, rng_seed }
    }

    pub fn uniform_count(s: usize, rng_seed: u64) -> Self {
        Self::new(SeedKind::UniformCount(s), rng_seed)
    }

    pub fn thinning(eps: f64, rng_seed: u64) -> Self {
        Self::new(SeedKind::UniformThinning(eps), rng_seed)
    }

    pub fn near_optimal4() -> Self {
        Self::new(SeedKind::NearOptimal4, 0)
    }

    pub fn fixed(nodes: Vec<usize>) -> Self {
        Self::new(SeedKind::FixedNodes(nodes), 0)
    }
}

/// Chooses the seed nodes. Uniform selections are returned in ascending
/// order; `NearOptimal4` keeps location order and drops repeated nodes.
pub fn select_seeds<G: Topology + ?Sized>(g: &G, strategy: &SeedStrategy) -> Result<Vec<usize>> {
    let n = g.adjacency().node_count();
    match &strategy.kind {
        SeedKind::UniformCount(s) => {
            if *s == 0 || *s > n {
                return param(format!("seed count must lie in [1, {n}], got {s}"));
            }
            let mut rng = rng_from_seed(strategy.rng_seed);
            let mut seeds = index::sample(&mut rng, n, *s).into_vec();
            seeds.sort_unstable();
            Ok(seeds)
        }
        SeedKind::UniformThinning(eps) => {
            if !(*eps > 0.0 && *eps < 1.0) {
                return param(format!("thinning exponent must lie in (0, 1), got {eps}"));
            }
            let p = if n == 0 {
                0.0
            } else {
                (expected_seed_count(n, *eps) / n as f64).clamp(0.0, 1.0)
            };
            bernoulli_subset(n, p, strategy.rng_seed)
        }
        SeedKind::NearOptimal4 => {
            let ps = g.points().ok_or_else(|| {
                Error::Unsupported("near-optimal seeds need node coordinates".into())
            })?;
            let domain = ps.domain();
            if domain.boundary() != Boundary::Torus {
                return Err(Error::Unsupported(
                    "near-optimal seeds are only defined on the torus".into(),
                ));
            }
            if ps.is_empty() {
                return param("graph has no nodes");
            }
            let mut seeds = Vec::with_capacity(4);
            for target in domain.optimal_seed_locations()? {
                let mut best = (f64::INFINITY, 0usize);
                for (v, &p) in ps.points().iter().enumerate() {
                    let d = domain.distance_sq_unchecked(p, target);
                    if d < best.0 {
                        best = (d, v);
                    }
                }
                if !seeds.contains(&best.1) {
                    seeds.push(best.1);
                }
            }
            Ok(seeds)
        }
        SeedKind::FixedNodes(nodes) => {
            if let Some(&v) = nodes.iter().find(|&&v| v >= n) {
                return param(format!("seed {v} out of range (graph has {n} nodes)"));
            }
            Ok(nodes.clone())
        }
    }
}

/// Hop distances from every seed to every node, stored node-major so that
/// one node's distance profile across all seeds is contiguous.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedTable {
    seeds: Vec<usize>,
    n: usize,
    profiles: Vec<u32>,
}

impl SeedTable {
    /// Builds a table from explicit rows, `rows[i][v]` being the distance from
    /// seed `i` to node `v`.
    pub fn from_rows(seeds: Vec<usize>, n: usize, rows: &[Vec<u32>]) -> Result<Self> {
        if rows.len() != seeds.len() || rows.iter().any(|r| r.len() != n) {
            return param("seed table rows do not match seeds x nodes");
        }
        let s = seeds.len();
        let mut profiles = vec![0u32; n * s];
        for (i, row) in rows.iter().enumerate() {
            for (v, &d) in row.iter().enumerate() {
                profiles[v * s + i] = d;
            }
        }
        Ok(Self { seeds, n, profiles })
    }

    pub fn seeds(&self) -> &[usize] {
        &self.seeds
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Distance from the `i`-th seed to node `v`.
    pub fn distance(&self, i: usize, v: usize) -> u32 {
        self.profiles[v * self.seeds.len() + i]
    }

    pub fn row(&self, i: usize) -> Vec<u32> {
        (0..self.n).map(|v| self.distance(i, v)).collect()
    }

    fn profile(&self, v: usize) -> &[u32] {
        let s = self.seeds.len();
        &self.profiles[v * s..(v + 1) * s]
    }
}

/// Phase 1: one row query per seed.
pub fn phase1(oracle: &DistanceOracle<'_>, seeds: &[usize]) -> Result<SeedTable> {
    let n = oracle.node_count();
    let rows = oracle.query_rows(seeds, Phase::Phase1)?;
    if let Some(row) = rows.iter().find(|r| !r.all_reachable()) {
        return Err(Error::Disconnected(format!(
            "seed {} does not reach every node",
            row.source()
        )));
    }
    let s = seeds.len();
    let mut profiles = vec![0u32; n * s];
    for (i, row) in rows.iter().enumerate() {
        for (v, &d) in row.raw().iter().enumerate() {
            profiles[v * s + i] = d;
        }
    }
    Ok(SeedTable {
        seeds: seeds.to_vec(),
        n,
        profiles,
    })
}

/// Unordered node pairs `(a, b)` with `a < b`, sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CandidateSet {
    pairs: Vec<(u32, u32)>,
}

impl CandidateSet {
    pub fn from_pairs(mut pairs: Vec<(u32, u32)>) -> Self {
        for p in &mut pairs {
            *p = (p.0.min(p.1), p.0.max(p.1));
        }
        pairs.sort_unstable();
        pairs.dedup();
        Self { pairs }
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, a: u32, b: u32) -> bool {
        self.pairs.binary_search(&(a.min(b), a.max(b))).is_ok()
    }
}

/// Nodes grouped by their distance to one pivot seed.
struct PivotBuckets {
    pivot: usize,
    buckets: Vec<Vec<u32>>,
}

impl PivotBuckets {
    /// Picks the seed whose near-diagonal pair count is smallest.
    fn best(table: &SeedTable) -> Option<Self> {
        (0..table.seeds.len())
            .map(|i| {
                let max = (0..table.n).map(|v| table.distance(i, v)).max().unwrap_or(0);
                let mut buckets = vec![Vec::new(); max as usize + 1];
                for v in 0..table.n {
                    buckets[table.distance(i, v) as usize].push(v as u32);
                }
                let size = |b: &Vec<u32>| b.len() as u128;
                let work: u128 = buckets.iter().map(|b| size(b) * size(b)).sum::<u128>()
                    + buckets.windows(2).map(|w| 2 * size(&w[0]) * size(&w[1])).sum::<u128>();
                (work, i, buckets)
            })
            .min_by_key(|(work, i, _)| (*work, *i))
            .map(|(_, pivot, buckets)| Self { pivot, buckets })
    }

    /// Partners `b > a` of `a` that no seed distinguishes, ascending.
    fn partners(&self, table: &SeedTable, a: usize) -> Vec<u32> {
        let d = table.distance(self.pivot, a) as usize;
        let pa = table.profile(a);
        let mut out = Vec::new();
        for bucket in &self.buckets[d.saturating_sub(1)..(d + 2).min(self.buckets.len())] {
            let from = bucket.partition_point(|&b| b as usize <= a);
            for &b in &bucket[from..] {
                let pb = table.profile(b as usize);
                if pa.iter().zip(pb).all(|(x, y)| x.abs_diff(*y) <= 1) {
                    out.push(b);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Pairs not distinguished by any seed.
///
/// Nodes are bucketed by distance to a pivot seed; only pairs in equal or
/// adjacent buckets are tested against the remaining seeds.
pub fn candidates(table: &SeedTable) -> CandidateSet {
    let n = table.n;
    let Some(buckets) = PivotBuckets::best(table) else {
        let pairs = (0..n as u32)
            .flat_map(|a| (a + 1..n as u32).map(move |b| (a, b)))
            .collect();
        return CandidateSet { pairs };
    };
    let pairs = (0..n)
        .into_par_iter()
        .flat_map_iter(|a| {
            buckets
                .partners(table, a)
                .into_iter()
                .map(move |b| (a as u32, b))
        })
        .collect();
    CandidateSet { pairs }
}

/// Number of candidate pairs that are not edges of `adj`.
fn candidate_nonedges(table: &SeedTable, adj: &Adjacency) -> u64 {
    let n = table.n as u64;
    let Some(buckets) = PivotBuckets::best(table) else {
        return n * n.saturating_sub(1) / 2 - adj.edge_count() as u64;
    };
    (0..table.n)
        .into_par_iter()
        .map(|a| {
            buckets
                .partners(table, a)
                .into_iter()
                .filter(|&b| !adj.has_edge(a, b as usize))
                .count() as u64
        })
        .sum()
}

/// Phase 2: one query per candidate; returns the pairs at distance one.
pub fn phase2(oracle: &DistanceOracle<'_>, cand: &CandidateSet) -> Vec<(u32, u32)> {
    let adjacent = oracle.query_adjacent_batch(cand.pairs());
    cand.pairs()
        .iter()
        .zip(adjacent)
        .filter_map(|(&p, is_edge)| is_edge.then_some(p))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    /// Recovered edges `(u, v)`, `u < v`, sorted.
    pub edges: Vec<(u32, u32)>,
    pub seeds: Vec<usize>,
    pub node_count: usize,
    pub phase1_queries: u64,
    pub phase2_queries: u64,
    pub candidate_count: usize,
    pub elapsed: Duration,
}

impl ReconstructionResult {
    pub fn seed_count(&self) -> usize {
        self.seeds.len()
    }

    pub fn total_queries(&self) -> u64 {
        self.phase1_queries + self.phase2_queries
    }
}

fn require_connected<G: Topology + ?Sized>(g: &G) -> Result<()> {
    let adj = g.adjacency();
    if adj.node_count() == 0 {
        return param("graph has no nodes");
    }
    if !adj.is_connected() {
        return Err(Error::Disconnected(format!(
            "reconstruction needs a connected graph ({} nodes)",
            adj.node_count()
        )));
    }
    Ok(())
}

/// Runs SIMPLE on a connected graph.
pub fn reconstruct<G: Topology + ?Sized>(g: &G, strategy: &SeedStrategy) -> Result<ReconstructionResult> {
    let start = Instant::now();
    require_connected(g)?;
    let seeds = select_seeds(g, strategy)?;
    let oracle = DistanceOracle::new(g);
    let table = phase1(&oracle, &seeds)?;
    let cand = candidates(&table);
    let edges = phase2(&oracle, &cand);
    let counts = oracle.counts();
    Ok(ReconstructionResult {
        edges,
        seeds,
        node_count: oracle.node_count(),
        phase1_queries: counts.phase1,
        phase2_queries: counts.phase2,
        candidate_count: cand.len(),
        elapsed: start.elapsed(),
    })
}

/// Share of non-edges already ruled out after phase 1.
#[derive(Debug, Clone, PartialEq)]
pub struct NonEdgeReport {
    pub seeds: Vec<usize>,
    pub node_count: usize,
    pub phase1_queries: u64,
    /// Unordered non-adjacent pairs distinguished by some seed.
    pub distinguishable_pairs: u64,
    pub total_nonedges: u64,
    /// `distinguishable_pairs / total_nonedges`; 1 when there are no non-edges.
    pub fraction: f64,
    /// Distinguishable ordered pairs over all `n (n - 1)` ordered pairs.
    pub directed_fraction: f64,
    pub elapsed: Duration,
}

/// Runs phase 1 only and measures how many non-edges it already excludes.
pub fn nonedge_detection<G: Topology + ?Sized>(g: &G, strategy: &SeedStrategy) -> Result<NonEdgeReport> {
    let start = Instant::now();
    require_connected(g)?;
    let adj = g.adjacency();
    let seeds = select_seeds(g, strategy)?;
    let oracle = DistanceOracle::new(g);
    let table = phase1(&oracle, &seeds)?;
    let n = adj.node_count() as u64;
    let all_pairs = n * (n - 1) / 2;
    let total_nonedges = all_pairs - adj.edge_count() as u64;
    let distinguishable_pairs = total_nonedges - candidate_nonedges(&table, adj);
    let fraction = if total_nonedges == 0 {
        1.0
    } else {
        distinguishable_pairs as f64 / total_nonedges as f64
    };
    let directed_fraction = if n < 2 {
        0.0
    } else {
        2.0 * distinguishable_pairs as f64 / (n * (n - 1)) as f64
    };
    Ok(NonEdgeReport {
        seeds,
        node_count: n as usize,
        phase1_queries: oracle.phase1_queries(),
        distinguishable_pairs,
        total_nonedges,
        fraction,
        directed_fraction,
        elapsed: start.elapsed(),
    })
}
