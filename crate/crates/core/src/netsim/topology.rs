//! Interconnection topologies and their metrics.

use std::collections::VecDeque;
use std::fmt;

use super::SimError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TopologyKind {
    Ring(usize),
    FullyConnected(usize),
    Mesh(Vec<usize>),
    Torus(Vec<usize>),
    Hypercube(u32),
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dims = |d: &[usize]| d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("x");
        match self {
            TopologyKind::Ring(p) => write!(f, "ring{p}"),
            TopologyKind::FullyConnected(p) => write!(f, "full{p}"),
            TopologyKind::Mesh(d) => write!(f, "mesh{}", dims(d)),
            TopologyKind::Torus(d) => write!(f, "torus{}", dims(d)),
            TopologyKind::Hypercube(d) => write!(f, "hypercube{d}"),
        }
    }
}

/// Undirected simple graph over nodes `0..p` with all-pairs hop distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    kind: TopologyKind,
    adj: Vec<Vec<usize>>,
    dist: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TopologyMetrics {
    pub diameter: usize,
    pub max_degree: usize,
    pub bisection_width: usize,
}

/// Exhaustive bisection is used up to this many nodes.
pub const EXHAUSTIVE_BISECTION_LIMIT: usize = 20;

const UNREACHABLE: usize = usize::MAX;

fn grid_coords(mut v: usize, dims: &[usize]) -> Vec<usize> {
    dims.iter()
        .map(|&r| {
            let c = v % r;
            v /= r;
            c
        })
        .collect()
}

fn grid_index(coords: &[usize], dims: &[usize]) -> usize {
    coords.iter().zip(dims).rev().fold(0, |acc, (&c, &r)| acc * r + c)
}

impl Topology {
    pub fn new(kind: TopologyKind) -> Result<Self, SimError> {
        let bad = |m: &str| Err(SimError::Domain(m.to_string()));
        let p = match &kind {
            TopologyKind::Ring(p) | TopologyKind::FullyConnected(p) => *p,
            TopologyKind::Mesh(d) | TopologyKind::Torus(d) => {
                if d.is_empty() || d.contains(&0) {
                    return bad("grid dimensions must be non-empty and positive");
                }
                d.iter().product()
            }
            TopologyKind::Hypercube(d) => {
                if *d > 20 {
                    return bad("hypercube dimension above 20");
                }
                1usize << d
            }
        };
        if p < 1 {
            return bad("topology needs at least one node");
        }
        let mut adj = vec![Vec::new(); p];
        let mut link = |u: usize, v: usize| {
            if u != v {
                adj[u].push(v);
                adj[v].push(u);
            }
        };
        match &kind {
            TopologyKind::Ring(_) => {
                for v in 0..p {
                    link(v, (v + 1) % p);
                }
            }
            TopologyKind::FullyConnected(_) => {
                for u in 0..p {
                    for v in u + 1..p {
                        link(u, v);
                    }
                }
            }
            TopologyKind::Mesh(dims) | TopologyKind::Torus(dims) => {
                let wrap = matches!(kind, TopologyKind::Torus(_));
                for v in 0..p {
                    let c = grid_coords(v, dims);
                    for (axis, &r) in dims.iter().enumerate() {
                        let mut n = c.clone();
                        if c[axis] + 1 < r {
                            n[axis] = c[axis] + 1;
                        } else if wrap && r > 1 {
                            n[axis] = 0;
                        } else {
                            continue;
                        }
                        link(v, grid_index(&n, dims));
                    }
                }
            }
            TopologyKind::Hypercube(d) => {
                for v in 0..p {
                    for b in 0..*d {
                        if v & (1 << b) == 0 {
                            link(v, v | (1 << b));
                        }
                    }
                }
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        let dist = (0..p).map(|s| bfs(&adj, s)).collect();
        Ok(Topology { kind, adj, dist })
    }

    pub fn kind(&self) -> &TopologyKind {
        &self.kind
    }

    pub fn nodes(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_connected(&self) -> bool {
        self.dist[0].iter().all(|&d| d != UNREACHABLE)
    }

    /// Shortest-path hop count between `u` and `v`.
    pub fn hops(&self, u: usize, v: usize) -> usize {
        self.dist[u][v]
    }

    pub fn diameter(&self) -> usize {
        self.dist.iter().flatten().copied().max().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Minimum cut over all partitions into ⌊p/2⌋ and ⌈p/2⌉ nodes.
    /// `None` above [`EXHAUSTIVE_BISECTION_LIMIT`] nodes.
    pub fn bisection_exhaustive(&self) -> Option<usize> {
        let p = self.nodes();
        if !(2..=EXHAUSTIVE_BISECTION_LIMIT).contains(&p) {
            return None;
        }
        let half = p / 2;
        let edges: Vec<(usize, usize)> =
            (0..p).flat_map(|u| self.adj[u].iter().filter(move |&&v| u < v).map(move |&v| (u, v))).collect();
        let mut best = usize::MAX;
        for mask in 0u32..(1 << p) {
            let size = mask.count_ones() as usize;
            // for even p, fixing node 0 outside the chosen half halves the work
            if size != half || (p.is_multiple_of(2) && mask & 1 == 1) {
                continue;
            }
            let cut = edges.iter().filter(|&&(u, v)| ((mask >> u) & 1) != ((mask >> v) & 1)).count();
            best = best.min(cut);
        }
        Some(best)
    }

    /// Known bisection width of the family, where one is established.
    pub fn bisection_closed_form(&self) -> Option<usize> {
        let p = self.nodes();
        if p < 2 {
            return None;
        }
        match &self.kind {
            TopologyKind::Ring(_) => Some(if p == 2 { 1 } else { 2 }),
            TopologyKind::FullyConnected(_) => Some((p / 2) * p.div_ceil(2)),
            TopologyKind::Hypercube(_) => Some(p / 2),
            TopologyKind::Mesh(dims) => {
                let real: Vec<usize> = dims.iter().copied().filter(|&r| r > 1).collect();
                let rmax = *real.iter().max()?;
                if real.len() == 1 {
                    Some(1)
                } else if rmax % 2 == 0 {
                    Some(p / rmax)
                } else {
                    None
                }
            }
            TopologyKind::Torus(dims) => {
                let real: Vec<usize> = dims.iter().copied().filter(|&r| r > 1).collect();
                let rmax = *real.iter().max()?;
                if real.len() == 1 {
                    Some(if rmax == 2 { 1 } else { 2 })
                } else if rmax == 2 {
                    Some(p / 2)
                } else if rmax % 2 == 0 {
                    Some(2 * p / rmax)
                } else {
                    None
                }
            }
        }
    }

    /// Known diameter of the family.
    pub fn diameter_closed_form(&self) -> usize {
        let p = self.nodes();
        match &self.kind {
            TopologyKind::Ring(_) => p / 2,
            TopologyKind::FullyConnected(_) => usize::from(p > 1),
            TopologyKind::Hypercube(d) => *d as usize,
            TopologyKind::Mesh(dims) => dims.iter().map(|r| r - 1).sum(),
            TopologyKind::Torus(dims) => dims.iter().map(|r| r / 2).sum(),
        }
    }

    pub fn metrics(&self) -> Result<TopologyMetrics, SimError> {
        if self.nodes() < 2 {
            return Err(SimError::Domain("metrics need at least two nodes".into()));
        }
        if !self.is_connected() {
            return Err(SimError::Domain("disconnected network".into()));
        }
        let bisection_width = self
            .bisection_exhaustive()
            .or_else(|| self.bisection_closed_form())
            .ok_or_else(|| SimError::Domain(format!("no bisection width available for {}", self.kind)))?;
        Ok(TopologyMetrics { diameter: self.diameter(), max_degree: self.max_degree(), bisection_width })
    }
}

fn bfs(adj: &[Vec<usize>], s: usize) -> Vec<usize> {
    let mut d = vec![UNREACHABLE; adj.len()];
    let mut q = VecDeque::from([s]);
    d[s] = 0;
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            if d[v] == UNREACHABLE {
                d[v] = d[u] + 1;
                q.push_back(v);
            }
        }
    }
    d
}
