#![allow(dead_code)]

use std::collections::VecDeque;

use grg_recon::Adjacency;

/// Textbook BFS over `adj`, independent of the crate's own traversal.
pub fn naive_bfs(adj: &Adjacency, source: usize) -> Vec<Option<u32>> {
    let mut dist = vec![None; adj.node_count()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &w in adj.neighbors(u) {
            let w = w as usize;
            if dist[w].is_none() {
                dist[w] = Some(du + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Rows of hop distances from each seed; panics if the graph is disconnected.
pub fn naive_rows(adj: &Adjacency, seeds: &[usize]) -> Vec<Vec<u32>> {
    seeds
        .iter()
        .map(|&s| naive_bfs(adj, s).into_iter().map(|d| d.expect("connected")).collect())
        .collect()
}

/// All pairs `u < v` whose distances differ by at most one from every seed.
pub fn naive_candidates(rows: &[Vec<u32>], n: usize) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rows.iter().all(|row| row[u].abs_diff(row[v]) <= 1) {
                out.push((u as u32, v as u32));
            }
        }
    }
    out
}

/// Pairs `{u, v}` of true edges that some seed row separates by more than one hop.
pub fn distinguished_edges(adj: &Adjacency, rows: &[Vec<u32>]) -> usize {
    adj.edges()
        .filter(|&(u, v)| rows.iter().any(|row| row[u as usize].abs_diff(row[v as usize]) > 1))
        .count()
}
