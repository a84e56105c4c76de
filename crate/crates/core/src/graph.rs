//! Graph construction (geometric and random regular) and hop-distance search.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;

use crate::error::{param, Error, Result};
use crate::geometry::{parse_header, sample_ppp, Boundary, Domain, PointSet};
use crate::rng::{derive_seed, rng_from_seed, SimRng};

/// Default number of resampling attempts when a connected instance is required.
pub const DEFAULT_CONNECT_ATTEMPTS: usize = 100;

/// Restart cap for the random regular pairing procedure.
pub const RRG_MAX_RESTARTS: usize = 10_000;

const UNREACHABLE: u32 = u32::MAX;

/// Compressed adjacency of a simple undirected graph. Neighbor lists are
/// sorted ascending and symmetric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Adjacency {
    /// Builds from per-node neighbor lists. Lists are sorted here; symmetry,
    /// self-loops and duplicates are validated.
    pub fn from_neighbor_lists(mut lists: Vec<Vec<u32>>) -> Result<Self> {
        let n = lists.len();
        if n >= UNREACHABLE as usize {
            return param("too many nodes");
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut targets = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        for (u, list) in lists.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return param(format!("duplicate edge at node {u}"));
            }
            if let Some(&v) = list.iter().find(|&&v| v as usize >= n || v as usize == u) {
                return param(format!("invalid neighbor {v} of node {u}"));
            }
            targets.extend_from_slice(list);
            offsets.push(targets.len());
        }
        let adj = Self { offsets, targets };
        for u in 0..n {
            for &v in adj.neighbors(u) {
                if !adj.has_edge(v as usize, u) {
                    return param(format!("asymmetric edge {u} -> {v}"));
                }
            }
        }
        Ok(adj)
    }

    /// Builds from an undirected edge list.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut lists = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return param(format!("edge ({u}, {v}) out of range for n = {n}"));
            }
            lists[u as usize].push(v);
            if u != v {
                lists[v as usize].push(u);
            }
        }
        Self::from_neighbor_lists(lists)
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    /// All edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v as usize > u)
                .map(move |v| (u as u32, v))
        })
    }

    pub fn mean_degree(&self) -> f64 {
        match self.node_count() {
            0 => 0.0,
            n => 2.0 * self.edge_count() as f64 / n as f64,
        }
    }

    fn check_node(&self, v: usize) -> Result<()> {
        if v >= self.node_count() {
            return param(format!(
                "node {v} out of range (graph has {} nodes)",
                self.node_count()
            ));
        }
        Ok(())
    }

    /// Single-source hop distances.
    pub fn bfs(&self, source: usize) -> Result<DistanceVector> {
        self.check_node(source)?;
        let mut dist = vec![UNREACHABLE; self.node_count()];
        let mut queue = VecDeque::new();
        self.bfs_fill(source, &mut dist, &mut queue);
        Ok(DistanceVector { source, dist })
    }

    pub(crate) fn bfs_fill(&self, source: usize, dist: &mut [u32], queue: &mut VecDeque<u32>) {
        dist.fill(UNREACHABLE);
        queue.clear();
        dist[source] = 0;
        queue.push_back(source as u32);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize] + 1;
            for &v in self.neighbors(u as usize) {
                if dist[v as usize] == UNREACHABLE {
                    dist[v as usize] = du;
                    queue.push_back(v);
                }
            }
        }
    }

    /// Exact hop distance between `u` and `v` by bidirectional search.
    pub fn hop_distance(&self, u: usize, v: usize) -> Result<Option<u32>> {
        self.check_node(u)?;
        self.check_node(v)?;
        if u == v {
            return Ok(Some(0));
        }
        let n = self.node_count();
        let mut dist = [vec![UNREACHABLE; n], vec![UNREACHABLE; n]];
        let mut frontier = [vec![u as u32], vec![v as u32]];
        dist[0][u] = 0;
        dist[1][v] = 0;
        let mut depth = [0u32, 0u32];
        while !frontier[0].is_empty() && !frontier[1].is_empty() {
            let side = usize::from(frontier[1].len() < frontier[0].len());
            let other = 1 - side;
            let mut next = Vec::new();
            let mut best: Option<u32> = None;
            for &x in &frontier[side] {
                for &y in self.neighbors(x as usize) {
                    let y = y as usize;
                    if dist[other][y] != UNREACHABLE {
                        let total = depth[side] + 1 + dist[other][y];
                        best = Some(best.map_or(total, |b| b.min(total)));
                    }
                    if dist[side][y] == UNREACHABLE {
                        dist[side][y] = depth[side] + 1;
                        next.push(y as u32);
                    }
                }
            }
            if best.is_some() {
                return Ok(best);
            }
            depth[side] += 1;
            frontier[side] = next;
        }
        Ok(None)
    }

    /// True iff a search from node 0 reaches every node.
    pub fn is_connected(&self) -> bool {
        if self.node_count() == 0 {
            return true;
        }
        let mut dist = vec![UNREACHABLE; self.node_count()];
        self.bfs_fill(0, &mut dist, &mut VecDeque::new());
        dist.iter().all(|&d| d != UNREACHABLE)
    }
}

/// Anything that exposes an [`Adjacency`].
pub trait Topology {
    fn adjacency(&self) -> &Adjacency;

    /// Coordinates, for graphs that have them.
    fn points(&self) -> Option<&PointSet> {
        None
    }
}

impl Topology for Adjacency {
    fn adjacency(&self) -> &Adjacency {
        self
    }
}

pub fn bfs<G: Topology + ?Sized>(g: &G, source: usize) -> Result<DistanceVector> {
    g.adjacency().bfs(source)
}

pub fn is_connected<G: Topology + ?Sized>(g: &G) -> bool {
    g.adjacency().is_connected()
}

pub fn mean_degree<G: Topology + ?Sized>(g: &G) -> f64 {
    g.adjacency().mean_degree()
}

/// Hop distances from one source. Unreachable nodes report `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceVector {
    source: usize,
    dist: Vec<u32>,
}

impl DistanceVector {
    pub fn source(&self) -> usize {
        self.source
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn get(&self, v: usize) -> Option<u32> {
        match self.dist[v] {
            UNREACHABLE => None,
            d => Some(d),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Option<u32>> + '_ {
        (0..self.dist.len()).map(|v| self.get(v))
    }

    pub fn to_vec(&self) -> Vec<Option<u32>> {
        self.iter().collect()
    }

    pub fn all_reachable(&self) -> bool {
        self.dist.iter().all(|&d| d != UNREACHABLE)
    }

    pub(crate) fn from_raw(source: usize, dist: Vec<u32>) -> Self {
        Self { source, dist }
    }

    /// Raw hop counts; only meaningful when [`Self::all_reachable`] holds.
    pub(crate) fn raw(&self) -> &[u32] {
        &self.dist
    }
}

/// A geometric random graph: nodes at the points of a [`PointSet`], joined
/// when their distance is at most `radius` (closed ball).
#[derive(Debug, Clone)]
pub struct GeometricGraph {
    points: PointSet,
    radius: f64,
    adjacency: Adjacency,
}

impl Topology for GeometricGraph {
    fn adjacency(&self) -> &Adjacency {
        &self.adjacency
    }

    fn points(&self) -> Option<&PointSet> {
        Some(&self.points)
    }
}

impl GeometricGraph {
    pub fn point_set(&self) -> &PointSet {
        &self.points
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn domain(&self) -> Domain {
        self.points.domain()
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.edge_count()
    }
}

/// Builds the radius-`r` graph on `ps` with a uniform cell grid.
///
/// Cells have width `side / floor(side / r) >= r`, so every neighbor of a
/// point lies in its own cell or one of the 8 surrounding cells (wrapping on
/// the torus).
pub fn build_grg(ps: &PointSet, r: f64) -> Result<GeometricGraph> {
    if !(r.is_finite() && r > 0.0) {
        return param(format!("radius must be positive, got {r}"));
    }
    let n = ps.len();
    if n >= UNREACHABLE as usize {
        return param("too many points");
    }
    let domain = ps.domain();
    let side = domain.side();
    let torus = domain.boundary() == Boundary::Torus;
    let cells = ((side / r).floor() as usize).clamp(1, 1 << 12);
    let width = side / cells as f64;
    let cell_of = |c: f64| ((c / width) as usize).min(cells - 1);

    // Counting sort of point indices by cell.
    let keys: Vec<usize> = ps
        .points()
        .iter()
        .map(|p| cell_of(p.y) * cells + cell_of(p.x))
        .collect();
    let mut start = vec![0usize; cells * cells + 1];
    for &k in &keys {
        start[k + 1] += 1;
    }
    for i in 0..cells * cells {
        start[i + 1] += start[i];
    }
    let mut fill = start.clone();
    let mut members = vec![0u32; n];
    for (i, &k) in keys.iter().enumerate() {
        members[fill[k]] = i as u32;
        fill[k] += 1;
    }

    let r2 = r * r;
    let pts = ps.points();
    let mut lists: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut around = Vec::with_capacity(9);
    for cy in 0..cells {
        for cx in 0..cells {
            around.clear();
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (mut nx, mut ny) = (cx as i64 + dx, cy as i64 + dy);
                    if torus {
                        nx = nx.rem_euclid(cells as i64);
                        ny = ny.rem_euclid(cells as i64);
                    } else if nx < 0 || ny < 0 || nx >= cells as i64 || ny >= cells as i64 {
                        continue;
                    }
                    around.push(ny as usize * cells + nx as usize);
                }
            }
            around.sort_unstable();
            around.dedup();
            let here = cy * cells + cx;
            for &u in &members[start[here]..start[here + 1]] {
                for &cell in &around {
                    for &v in &members[start[cell]..start[cell + 1]] {
                        if v > u && domain.distance_sq_unchecked(pts[u as usize], pts[v as usize]) <= r2 {
                            lists[u as usize].push(v);
                            lists[v as usize].push(u);
                        }
                    }
                }
            }
        }
    }
    for l in &mut lists {
        l.sort_unstable();
    }
    let adjacency = Adjacency::from_sorted_lists_unchecked(lists);
    Ok(GeometricGraph {
        points: ps.clone(),
        radius: r,
        adjacency,
    })
}

impl Adjacency {
    fn from_sorted_lists_unchecked(lists: Vec<Vec<u32>>) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let mut targets = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        for l in lists {
            targets.extend_from_slice(&l);
            offsets.push(targets.len());
        }
        Self { offsets, targets }
    }
}

/// Samples unit-intensity point sets of side `sqrt(n)` until the radius-`r`
/// graph is connected. Attempt `i` uses the seed `derive_seed(rng_seed, [i])`.
///
/// Returns the graph and the number of attempts used.
pub fn sample_connected_grg(
    n: usize,
    r: f64,
    boundary: Boundary,
    rng_seed: u64,
    max_attempts: usize,
) -> Result<(GeometricGraph, usize)> {
    let domain = Domain::for_nodes(n, boundary)?;
    for attempt in 0..max_attempts {
        let ps = sample_ppp(domain, 1.0, derive_seed(rng_seed, &[attempt as u64]))?;
        let g = build_grg(&ps, r)?;
        if !g.points.is_empty() && g.adjacency.is_connected() {
            return Ok((g, attempt + 1));
        }
    }
    Err(Error::Disconnected(format!(
        "no connected instance with n={n}, r={r} after {max_attempts} attempts"
    )))
}

/// A simple graph in which every node has the same degree.
#[derive(Debug, Clone)]
pub struct RegularGraph {
    degree: usize,
    adjacency: Adjacency,
}

impl Topology for RegularGraph {
    fn adjacency(&self) -> &Adjacency {
        &self.adjacency
    }
}

impl RegularGraph {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.node_count()
    }
}

/// Random `degree`-regular simple graph on `n` nodes.
///
/// Stubs are shuffled and paired; pairs that would form a loop or a repeated
/// edge are returned to the pool and re-shuffled. When the remaining stubs
/// cannot be completed the whole pairing restarts (at most
/// [`RRG_MAX_RESTARTS`] times).
pub fn build_rrg(n: usize, degree: usize, rng_seed: u64) -> Result<RegularGraph> {
    if n == 0 || degree >= n {
        return param(format!("degree must be below n (n = {n}, degree = {degree})"));
    }
    if !(n * degree).is_multiple_of(2) {
        return param(format!("n * degree must be even (n = {n}, degree = {degree})"));
    }
    if n >= UNREACHABLE as usize {
        return param("too many nodes");
    }
    let mut rng = rng_from_seed(rng_seed);
    for _ in 0..RRG_MAX_RESTARTS {
        if let Some(edges) = try_regular_pairing(n, degree, &mut rng) {
            let adjacency = Adjacency::from_edges(n, &edges)?;
            return Ok(RegularGraph { degree, adjacency });
        }
    }
    Err(Error::Parameter(format!(
        "no simple {degree}-regular graph on {n} nodes after {RRG_MAX_RESTARTS} restarts"
    )))
}

fn try_regular_pairing(n: usize, degree: usize, rng: &mut SimRng) -> Option<Vec<(u32, u32)>> {
    let mut seen: HashSet<(u32, u32)> = HashSet::with_capacity(n * degree / 2);
    let mut edges = Vec::with_capacity(n * degree / 2);
    let mut stubs: Vec<u32> = (0..n as u32)
        .flat_map(|v| std::iter::repeat_n(v, degree))
        .collect();
    while !stubs.is_empty() {
        stubs.shuffle(rng);
        let mut leftover: BTreeMap<u32, usize> = BTreeMap::new();
        for pair in stubs.chunks_exact(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a != b && seen.insert((a, b)) {
                edges.push((a, b));
            } else {
                *leftover.entry(a).or_default() += 1;
                *leftover.entry(b).or_default() += 1;
            }
        }
        // Some pair of distinct leftover nodes must still be joinable.
        let nodes: Vec<u32> = leftover.keys().copied().collect();
        let completable = nodes.is_empty()
            || nodes.iter().enumerate().any(|(i, &a)| {
                nodes[i + 1..].iter().any(|&b| !seen.contains(&(a, b)))
            });
        if !completable {
            return None;
        }
        stubs = leftover
            .into_iter()
            .flat_map(|(v, c)| std::iter::repeat_n(v, c))
            .collect();
    }
    Some(edges)
}

/// Regular-graph degree matching a mean degree: the rounded mean, moved by
/// one toward the mean when `n * degree` would be odd.
pub fn matched_degree(mean_degree: f64, n: usize) -> Result<usize> {
    if !(mean_degree.is_finite() && mean_degree >= 0.0) || n < 2 {
        return param(format!("cannot match degree {mean_degree} on {n} nodes"));
    }
    let mut d = (mean_degree.round() as usize).min(n - 1);
    if !(n * d).is_multiple_of(2) {
        d = if (mean_degree > d as f64 && d + 1 < n) || d == 0 {
            d + 1
        } else {
            d - 1
        };
    }
    if d >= n || !(n * d).is_multiple_of(2) {
        return param(format!("no valid regular degree near {mean_degree} for n = {n}"));
    }
    Ok(d)
}

/// Samples random regular graphs until one is connected.
pub fn sample_connected_rrg(
    n: usize,
    degree: usize,
    rng_seed: u64,
    max_attempts: usize,
) -> Result<(RegularGraph, usize)> {
    for attempt in 0..max_attempts {
        let g = build_rrg(n, degree, derive_seed(rng_seed, &[attempt as u64]))?;
        if g.adjacency.is_connected() {
            return Ok((g, attempt + 1));
        }
    }
    Err(Error::Disconnected(format!(
        "no connected {degree}-regular graph on {n} nodes after {max_attempts} attempts"
    )))
}

/// Header fields of the edge-list format.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeListHeader {
    pub n: usize,
    pub r: Option<f64>,
    pub boundary: Option<Boundary>,
}

impl EdgeListHeader {
    pub fn for_graph<G: Topology + ?Sized>(g: &G, r: Option<f64>) -> Self {
        Self {
            n: g.adjacency().node_count(),
            r,
            boundary: g.points().map(|p| p.domain().boundary()),
        }
    }
}

/// Writes `# n=<n> r=<r> boundary=<b>` followed by one `u v` line per edge
/// with `u < v`. Missing fields are written as `none`.
pub fn write_edge_list<W: Write>(
    mut w: W,
    header: &EdgeListHeader,
    edges: impl IntoIterator<Item = (u32, u32)>,
) -> Result<()> {
    let r = header.r.map_or_else(|| "none".to_string(), |r| r.to_string());
    let b = header
        .boundary
        .map_or_else(|| "none".to_string(), |b| b.to_string());
    writeln!(w, "# n={} r={} boundary={}", header.n, r, b)?;
    for (u, v) in edges {
        let (u, v) = (u.min(v), u.max(v));
        writeln!(w, "{u} {v}")?;
    }
    Ok(())
}

pub fn read_edge_list<R: BufRead>(r: R) -> Result<(EdgeListHeader, Adjacency)> {
    let bad = |detail: String| Error::Parse {
        what: "edge list",
        detail,
    };
    let mut lines = r.lines();
    let first = lines.next().ok_or_else(|| bad("missing header".into()))??;
    let fields = parse_header(&first, "edge list")?;
    let get = |key: &str| {
        fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| bad(format!("header lacks '{key}'")))
    };
    let n: usize = get("n")?.parse().map_err(|e| bad(format!("n: {e}")))?;
    let r = match get("r")? {
        "none" => None,
        s => Some(s.parse::<f64>().map_err(|e| bad(format!("r: {e}")))?),
    };
    let boundary = match get("boundary")? {
        "none" => None,
        s => Some(s.parse::<Boundary>()?),
    };
    let mut edges = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let mut node = || -> Result<u32> {
            it.next()
                .ok_or_else(|| bad(format!("line {}: expected 'u v'", i + 2)))?
                .parse()
                .map_err(|e| bad(format!("line {}: {e}", i + 2)))
        };
        let (u, v) = (node()?, node()?);
        edges.push((u, v));
    }
    let adjacency = Adjacency::from_edges(n, &edges)?;
    Ok((EdgeListHeader { n, r, boundary }, adjacency))
}
