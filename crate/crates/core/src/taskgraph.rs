//! Weighted task graphs: work, span, greedy list scheduling and loop
//! iteration scheduling.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DagError {
    #[error("task graph contains a cycle")]
    Cycle,
    #[error("domain error: {0}")]
    Domain(String),
}

pub type TaskId = u64;

/// Acyclic task graph with positive integer weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskDag {
    ids: Vec<TaskId>,
    weights: Vec<u64>,
    edges: Vec<(TaskId, TaskId)>,
    succ: Vec<Vec<usize>>,
    indeg: Vec<usize>,
    /// Topological order of task indices.
    order: Vec<usize>,
}

impl TaskDag {
    pub fn new(tasks: &[(TaskId, u64)], edges: &[(TaskId, TaskId)]) -> Result<Self, DagError> {
        let mut index = HashMap::new();
        for (i, &(id, w)) in tasks.iter().enumerate() {
            if w < 1 {
                return Err(DagError::Domain(format!("task {id} has weight 0")));
            }
            if index.insert(id, i).is_some() {
                return Err(DagError::Domain(format!("duplicate task id {id}")));
            }
        }
        let n = tasks.len();
        let mut succ = vec![Vec::new(); n];
        let mut indeg = vec![0; n];
        for &(u, v) in edges {
            let lookup = |id| {
                index.get(&id).copied().ok_or_else(|| DagError::Domain(format!("edge references unknown task {id}")))
            };
            let (iu, iv) = (lookup(u)?, lookup(v)?);
            succ[iu].push(iv);
            indeg[iv] += 1;
        }
        // Kahn, smallest index first for a stable order
        let mut deg = indeg.clone();
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| deg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for &s in &succ[i] {
                deg[s] -= 1;
                if deg[s] == 0 {
                    ready.insert(s);
                }
            }
        }
        if order.len() != n {
            return Err(DagError::Cycle);
        }
        Ok(TaskDag {
            ids: tasks.iter().map(|t| t.0).collect(),
            weights: tasks.iter().map(|t| t.1).collect(),
            edges: edges.to_vec(),
            succ,
            indeg,
            order,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn tasks(&self) -> impl Iterator<Item = (TaskId, u64)> + '_ {
        self.ids.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn edges(&self) -> &[(TaskId, TaskId)] {
        &self.edges
    }

    pub fn weight(&self, id: TaskId) -> Option<u64> {
        self.ids.iter().position(|&x| x == id).map(|i| self.weights[i])
    }

    /// Parses `task <id> <weight>` and `edge <u> <v>` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, DagError> {
        let mut tasks = Vec::new();
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = || DagError::Domain(format!("line {}: cannot parse {raw:?}", lineno + 1));
            let f: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| s.parse::<u64>().map_err(|_| bad());
            match f.as_slice() {
                ["task", id, w] => tasks.push((num(id)?, num(w)?)),
                ["edge", u, v] => edges.push((num(u)?, num(v)?)),
                _ => return Err(bad()),
            }
        }
        TaskDag::new(&tasks, &edges)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkSpan {
    pub work: u64,
    pub span: u64,
    pub parallelism: f64,
}

pub fn work_span(dag: &TaskDag) -> WorkSpan {
    let work: u64 = dag.weights.iter().sum();
    let mut finish = vec![0u64; dag.len()];
    for &i in &dag.order {
        finish[i] += dag.weights[i];
        for &s in &dag.succ[i] {
            finish[s] = finish[s].max(finish[i]);
        }
    }
    let span = finish.iter().copied().max().unwrap_or(0);
    let parallelism = if span == 0 { 0.0 } else { work as f64 / span as f64 };
    WorkSpan { work, span, parallelism }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduleEntry {
    pub task: TaskId,
    pub proc: usize,
    pub start: u64,
    pub end: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub p: usize,
    /// In order of start time, then processor.
    pub entries: Vec<ScheduleEntry>,
    pub makespan: u64,
}

impl Schedule {
    /// Checks durations, processor exclusivity, precedence and coverage.
    pub fn validate(&self, dag: &TaskDag) -> Result<(), String> {
        let mut at: HashMap<TaskId, &ScheduleEntry> = HashMap::new();
        for e in &self.entries {
            if at.insert(e.task, e).is_some() {
                return Err(format!("task {} scheduled twice", e.task));
            }
            let w = dag.weight(e.task).ok_or_else(|| format!("unknown task {}", e.task))?;
            if e.end - e.start != w {
                return Err(format!("task {} runs {} units, weight {w}", e.task, e.end - e.start));
            }
            if e.proc >= self.p {
                return Err(format!("task {} on processor {} of {}", e.task, e.proc, self.p));
            }
        }
        if at.len() != dag.len() {
            return Err(format!("{} of {} tasks scheduled", at.len(), dag.len()));
        }
        for &(u, v) in dag.edges() {
            if at[&u].end > at[&v].start {
                return Err(format!("edge {u}->{v} violated"));
            }
        }
        let mut by_proc: Vec<Vec<(u64, u64)>> = vec![Vec::new(); self.p];
        for e in &self.entries {
            by_proc[e.proc].push((e.start, e.end));
        }
        for (q, iv) in by_proc.iter_mut().enumerate() {
            iv.sort_unstable();
            if iv.windows(2).any(|w| w[0].1 > w[1].0) {
                return Err(format!("overlap on processor {q}"));
            }
        }
        let makespan = self.entries.iter().map(|e| e.end).max().unwrap_or(0);
        if makespan != self.makespan {
            return Err(format!("makespan {} but last end {makespan}", self.makespan));
        }
        Ok(())
    }
}

/// Event-driven greedy list scheduler. Ready tasks are taken in order of
/// readiness time, then task id; idle processors in order of id.
pub fn greedy_schedule(dag: &TaskDag, p: usize) -> Result<Schedule, DagError> {
    if p < 1 {
        return Err(DagError::Domain("p must be at least 1".into()));
    }
    let n = dag.len();
    let mut deg = dag.indeg.clone();
    let mut ready: BTreeSet<(u64, TaskId, usize)> =
        (0..n).filter(|&i| deg[i] == 0).map(|i| (0, dag.ids[i], i)).collect();
    let mut idle: BTreeSet<usize> = (0..p).collect();
    let mut running: BinaryHeap<Reverse<(u64, usize, usize)>> = BinaryHeap::new();
    let mut entries = Vec::with_capacity(n);
    let mut now = 0;
    loop {
        while !idle.is_empty() && !ready.is_empty() {
            let (_, id, i) = ready.pop_first().expect("nonempty");
            let proc = idle.pop_first().expect("nonempty");
            let end = now + dag.weights[i];
            entries.push(ScheduleEntry { task: id, proc, start: now, end });
            running.push(Reverse((end, proc, i)));
        }
        let Some(Reverse((t, _, _))) = running.peek().copied() else {
            break;
        };
        now = t;
        while let Some(Reverse((end, proc, i))) = running.peek().copied() {
            if end != now {
                break;
            }
            running.pop();
            idle.insert(proc);
            for &s in &dag.succ[i] {
                deg[s] -= 1;
                if deg[s] == 0 {
                    ready.insert((now, dag.ids[s], s));
                }
            }
        }
    }
    let makespan = entries.iter().map(|e| e.end).max().unwrap_or(0);
    Ok(Schedule { p, entries, makespan })
}

/// Cost in time units of executing one iteration.
pub type IterCost<'a> = &'a dyn Fn(usize) -> u64;

pub enum LoopKind<'a> {
    /// `None` gives ⌈n/p⌉ contiguous iterations to the first `n mod p`
    /// threads and ⌊n/p⌋ to the rest.
    Static {
        chunk: Option<usize>,
    },
    Dynamic {
        chunk: usize,
        cost: IterCost<'a>,
    },
    Guided {
        min_chunk: usize,
        cost: IterCost<'a>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopAssignment {
    pub thread_of: Vec<usize>,
    pub per_thread_counts: Vec<usize>,
    /// `(first iteration, length, thread)` in the order chunks were handed out.
    pub chunks: Vec<(usize, usize, usize)>,
}

pub fn loop_schedule(n: usize, p: usize, kind: &LoopKind<'_>) -> Result<LoopAssignment, DagError> {
    if p < 1 {
        return Err(DagError::Domain("p must be at least 1".into()));
    }
    let mut chunks = Vec::new();
    match *kind {
        LoopKind::Static { chunk: Some(c) } => {
            if c < 1 {
                return Err(DagError::Domain("chunk must be at least 1".into()));
            }
            for (j, start) in (0..n).step_by(c).enumerate() {
                chunks.push((start, c.min(n - start), j % p));
            }
        }
        LoopKind::Static { chunk: None } => {
            let (q, r) = (n / p, n % p);
            let mut start = 0;
            for t in 0..p {
                let len = q + usize::from(t < r);
                if len > 0 {
                    chunks.push((start, len, t));
                }
                start += len;
            }
        }
        LoopKind::Dynamic { chunk, cost } => {
            if chunk < 1 {
                return Err(DagError::Domain("chunk must be at least 1".into()));
            }
            let mut free = vec![0u64; p];
            let mut start = 0;
            while start < n {
                let len = chunk.min(n - start);
                grab(&mut free, &mut chunks, start, len, cost);
                start += len;
            }
        }
        LoopKind::Guided { min_chunk, cost } => {
            if min_chunk < 1 {
                return Err(DagError::Domain("min_chunk must be at least 1".into()));
            }
            let mut free = vec![0u64; p];
            let mut start = 0;
            while start < n {
                let remaining = n - start;
                let len = min_chunk.max(remaining.div_ceil(p)).min(remaining);
                grab(&mut free, &mut chunks, start, len, cost);
                start += len;
            }
        }
    }
    let mut thread_of = vec![0; n];
    let mut per_thread_counts = vec![0; p];
    for &(start, len, t) in &chunks {
        thread_of[start..start + len].fill(t);
        per_thread_counts[t] += len;
    }
    Ok(LoopAssignment { thread_of, per_thread_counts, chunks })
}

/// Earliest-free thread (lowest id on ties) takes the chunk.
fn grab(free: &mut [u64], chunks: &mut Vec<(usize, usize, usize)>, start: usize, len: usize, cost: IterCost<'_>) {
    let t = (0..free.len()).min_by_key(|&t| (free[t], t)).expect("p >= 1");
    free[t] += (start..start + len).map(cost).sum::<u64>();
    chunks.push((start, len, t));
}
