//! Level-synchronous BFS and the Floyd-Warshall oracle.

use std::collections::VecDeque;

use super::{divides, AppEnv, AppRun};
use crate::collectives::{allreduce, ReductionOperator};
use crate::netsim::SimError;
use crate::Matrix;

/// Distance label of an unreachable vertex.
pub const INF_DIST: u64 = u64::MAX;

/// Weight of an absent edge.
pub const INF_WEIGHT: i64 = i64::MAX;

const WORD: usize = 64;

fn adjacency(n: usize, edges: &[(usize, usize)]) -> Result<Vec<Vec<usize>>, SimError> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        if u >= n || v >= n {
            return Err(SimError::Domain(format!("edge ({u},{v}) outside {n} vertices")));
        }
        adj[u].push(v);
        adj[v].push(u);
    }
    Ok(adj)
}

/// Sequential BFS over the undirected graph.
pub fn bfs_seq(n: usize, edges: &[(usize, usize)], s: usize) -> Result<Vec<u64>, SimError> {
    if s >= n {
        return Err(SimError::Domain(format!("source {s} outside {n} vertices")));
    }
    let adj = adjacency(n, edges)?;
    let mut dist = vec![INF_DIST; n];
    dist[s] = 0;
    let mut q = VecDeque::from([s]);
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            if dist[v] == INF_DIST {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
        }
    }
    Ok(dist)
}

/// Level-wise BFS with vertices in `n/p` blocks. Each level unions the
/// locally discovered frontier bits with one Allreduce(BOr), so a source
/// of eccentricity `K` costs `K + 1` reductions.
pub fn bfs_levelwise(env: &AppEnv, n: usize, edges: &[(usize, usize)], s: usize) -> Result<AppRun<Vec<u64>>, SimError> {
    let p = env.p();
    if s >= n {
        return Err(SimError::Domain(format!("source {s} outside {n} vertices")));
    }
    divides(p, n, "n")?;
    let adj = adjacency(n, edges)?;
    let adj = &adj;
    let words = n.div_ceil(WORD);
    let (out, trace) = env
        .world
        .run(|pr| async move {
            let c = pr.world();
            let (lo, hi) = (c.rank() * n / p, (c.rank() + 1) * n / p);
            let mut visited = vec![0i64; words];
            let mut frontier = vec![0i64; words];
            let bit = |v: usize| (v / WORD, 1i64 << (v % WORD));
            let (w, b) = bit(s);
            visited[w] |= b;
            frontier[w] |= b;
            let mut dist = vec![INF_DIST; n];
            dist[s] = 0;
            let mut level = 0u64;
            let mut ops = 0u64;
            loop {
                let mut next = vec![0i64; words];
                for (u, nbrs) in adj.iter().enumerate().take(hi).skip(lo) {
                    let (w, b) = bit(u);
                    if frontier[w] & b != 0 {
                        for &v in nbrs {
                            let (vw, vb) = bit(v);
                            next[vw] |= vb;
                            ops += 1;
                        }
                    }
                }
                pr.compute(env.op_time * ((hi - lo) as u64 + ops) as f64);
                let union = allreduce(&pr, &c, next, &ReductionOperator::BOr).await?;
                level += 1;
                let mut any = false;
                for (k, word) in union.into_iter().enumerate() {
                    let fresh = word & !visited[k];
                    visited[k] |= fresh;
                    frontier[k] = fresh;
                    any |= fresh != 0;
                    let mut f = fresh as u64;
                    while f != 0 {
                        let v = k * WORD + f.trailing_zeros() as usize;
                        dist[v] = level;
                        f &= f - 1;
                    }
                }
                if !any {
                    break;
                }
            }
            Ok((dist[lo..hi].to_vec(), ops))
        })
        .into_result()?;
    let (blocks, local_ops): (Vec<Vec<u64>>, Vec<u64>) = out.into_iter().unzip();
    Ok(AppRun { output: blocks.concat(), trace, local_ops })
}

/// All-pairs shortest paths by the `k, i, j` triple loop. Absent edges are
/// [`INF_WEIGHT`]; sums saturate at it.
pub fn fw_seq(w: &Matrix<i64>) -> Matrix<i64> {
    let n = w.rows();
    assert_eq!(n, w.cols(), "square weight matrix");
    let mut d = w.clone();
    for k in 0..n {
        for i in 0..n {
            let dik = d[(i, k)];
            if dik == INF_WEIGHT {
                continue;
            }
            for j in 0..n {
                let dkj = d[(k, j)];
                if dkj != INF_WEIGHT {
                    let via = dik.saturating_add(dkj).min(INF_WEIGHT - 1);
                    if via < d[(i, j)] {
                        d[(i, j)] = via;
                    }
                }
            }
        }
    }
    d
}
