//! Collective operations built from point-to-point messages.
//!
//! Every member of a communicator must call the same collectives in the same
//! order. Collective traffic travels on its own matching context, so it never
//! interferes with user messages.

use std::fmt;

use crate::netsim::{Channel, Comm, CostModel, Payload, Proc, SimError, World, PROC_NULL};
use crate::util::ceil_log2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CollectiveKind {
    Barrier,
    Bcast,
    Gather,
    Scatter,
    Allgather,
    Alltoall,
    Reduce,
    Allreduce,
    ReduceScatterBlock,
    Scan,
    Exscan,
}

impl CollectiveKind {
    pub const ALL: [CollectiveKind; 11] = [
        CollectiveKind::Barrier,
        CollectiveKind::Bcast,
        CollectiveKind::Gather,
        CollectiveKind::Scatter,
        CollectiveKind::Allgather,
        CollectiveKind::Alltoall,
        CollectiveKind::Reduce,
        CollectiveKind::Allreduce,
        CollectiveKind::ReduceScatterBlock,
        CollectiveKind::Scan,
        CollectiveKind::Exscan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CollectiveKind::Barrier => "barrier",
            CollectiveKind::Bcast => "bcast",
            CollectiveKind::Gather => "gather",
            CollectiveKind::Scatter => "scatter",
            CollectiveKind::Allgather => "allgather",
            CollectiveKind::Alltoall => "alltoall",
            CollectiveKind::Reduce => "reduce",
            CollectiveKind::Allreduce => "allreduce",
            CollectiveKind::ReduceScatterBlock => "reduce_scatter_block",
            CollectiveKind::Scan => "scan",
            CollectiveKind::Exscan => "exscan",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s.to_ascii_lowercase())
    }

    pub fn rooted(self) -> bool {
        matches!(
            self,
            CollectiveKind::Bcast | CollectiveKind::Gather | CollectiveKind::Scatter | CollectiveKind::Reduce
        )
    }

    fn tag(self) -> i64 {
        -1 - self as i64
    }
}

impl fmt::Display for CollectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Flat,
    Ring,
    Binomial,
    Linear,
    Pairwise,
    Dissemination,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Flat => "flat",
            Algorithm::Ring => "ring",
            Algorithm::Binomial => "binomial",
            Algorithm::Linear => "linear",
            Algorithm::Pairwise => "pairwise",
            Algorithm::Dissemination => "dissemination",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Algorithm::Flat,
            Algorithm::Ring,
            Algorithm::Binomial,
            Algorithm::Linear,
            Algorithm::Pairwise,
            Algorithm::Dissemination,
        ]
        .into_iter()
        .find(|a| a.name() == s.to_ascii_lowercase())
    }

    /// Algorithms implemented for `kind`; the first is the default.
    pub fn available(kind: CollectiveKind) -> &'static [Algorithm] {
        match kind {
            CollectiveKind::Barrier => &[Algorithm::Dissemination],
            CollectiveKind::Bcast => &[Algorithm::Binomial, Algorithm::Flat, Algorithm::Ring],
            CollectiveKind::Allgather => &[Algorithm::Ring],
            CollectiveKind::Alltoall => &[Algorithm::Pairwise],
            CollectiveKind::Scan | CollectiveKind::Exscan => &[Algorithm::Binomial, Algorithm::Linear],
            _ => &[Algorithm::Binomial],
        }
    }
}

/// Element type that can travel in a message payload.
pub trait Wire: Clone {
    fn pack(v: Vec<Self>) -> Payload;
    fn unpack(p: Payload) -> Result<Vec<Self>, SimError>;
}

impl Wire for i64 {
    fn pack(v: Vec<Self>) -> Payload {
        Payload::Int(v)
    }

    fn unpack(p: Payload) -> Result<Vec<Self>, SimError> {
        p.into_ints()
    }
}

impl Wire for f64 {
    fn pack(v: Vec<Self>) -> Payload {
        Payload::Real(v)
    }

    fn unpack(p: Payload) -> Result<Vec<Self>, SimError> {
        p.into_reals()
    }
}

/// Associative operator with identity; need not be commutative.
pub trait Reducer<T> {
    fn combine(&self, left: &T, right: &T) -> T;
    fn identity(&self) -> T;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionOperator {
    Sum,
    Prod,
    Min,
    Max,
    LAnd,
    LOr,
    BAnd,
    BOr,
    BXor,
}

impl ReductionOperator {
    pub const ALL: [ReductionOperator; 9] = [
        ReductionOperator::Sum,
        ReductionOperator::Prod,
        ReductionOperator::Min,
        ReductionOperator::Max,
        ReductionOperator::LAnd,
        ReductionOperator::LOr,
        ReductionOperator::BAnd,
        ReductionOperator::BOr,
        ReductionOperator::BXor,
    ];

    pub fn commutative(self) -> bool {
        true
    }
}

impl Reducer<i64> for ReductionOperator {
    fn combine(&self, a: &i64, b: &i64) -> i64 {
        let (a, b) = (*a, *b);
        match self {
            ReductionOperator::Sum => a.wrapping_add(b),
            ReductionOperator::Prod => a.wrapping_mul(b),
            ReductionOperator::Min => a.min(b),
            ReductionOperator::Max => a.max(b),
            ReductionOperator::LAnd => i64::from(a != 0 && b != 0),
            ReductionOperator::LOr => i64::from(a != 0 || b != 0),
            ReductionOperator::BAnd => a & b,
            ReductionOperator::BOr => a | b,
            ReductionOperator::BXor => a ^ b,
        }
    }

    fn identity(&self) -> i64 {
        match self {
            ReductionOperator::Sum | ReductionOperator::LOr | ReductionOperator::BOr | ReductionOperator::BXor => 0,
            ReductionOperator::Prod | ReductionOperator::LAnd => 1,
            ReductionOperator::Min => i64::MAX,
            ReductionOperator::Max => i64::MIN,
            ReductionOperator::BAnd => -1,
        }
    }
}

fn combine_vec<T, R: Reducer<T> + ?Sized>(op: &R, left: &[T], right: &[T]) -> Result<Vec<T>, SimError> {
    if left.len() != right.len() {
        return Err(SimError::Domain(format!("reduction length mismatch: {} vs {}", left.len(), right.len())));
    }
    Ok(left.iter().zip(right).map(|(a, b)| op.combine(a, b)).collect())
}

/// Lower bounds: broadcast rounds `⌈log_{k+1} p⌉` and all-to-all rounds
/// `p²/(4·bisection)`.
pub fn collective_bounds(p: usize, k_ports: usize, bisection: usize) -> (u32, f64) {
    let base = k_ports.max(1) as u128 + 1;
    let (mut i, mut reach) = (0u32, 1u128);
    while reach < p as u128 {
        reach *= base;
        i += 1;
    }
    let pf = p as f64;
    (i, pf * pf / (4.0 * bisection.max(1) as f64))
}

async fn xsend<T: Wire>(p: &Proc, c: &Comm, dst: usize, tag: i64, v: Vec<T>) -> Result<(), SimError> {
    let n = v.len() as u64;
    p.send_on(c, dst, Channel::Coll, tag, T::pack(v), n).await
}

async fn xrecv<T: Wire>(p: &Proc, c: &Comm, src: usize, tag: i64) -> Result<Vec<T>, SimError> {
    T::unpack(p.recv_on(c, Some(src), Channel::Coll, Some(tag)).await?.payload)
}

async fn xsendrecv<T: Wire>(
    p: &Proc,
    c: &Comm,
    dst: usize,
    v: Vec<T>,
    src: usize,
    tag: i64,
) -> Result<Vec<T>, SimError> {
    let n = v.len() as u64;
    let r = p.sendrecv_on(c, dst, tag, T::pack(v), n, Some(src), Some(tag), Channel::Coll).await?;
    T::unpack(r.payload)
}

fn check_root(c: &Comm, root: usize) -> Result<(), SimError> {
    if root >= c.size() {
        return Err(SimError::Domain(format!("root {root} outside communicator of size {}", c.size())));
    }
    Ok(())
}

/// Dissemination barrier in `⌈log₂ p⌉` rounds.
pub async fn barrier(p: &Proc, c: &Comm) -> Result<(), SimError> {
    p.log_collective(c, CollectiveKind::Barrier.name());
    let (n, i) = (c.size(), c.rank());
    let tag = CollectiveKind::Barrier.tag();
    let mut d = 1;
    while d < n {
        xsendrecv::<i64>(p, c, (i + d) % n, Vec::new(), (i + n - d) % n, tag).await?;
        d <<= 1;
    }
    Ok(())
}

/// Root's `data` reaches every rank; other ranks' `data` is ignored.
pub async fn bcast<T: Wire>(p: &Proc, c: &Comm, root: usize, data: Vec<T>, alg: Algorithm) -> Result<Vec<T>, SimError> {
    p.log_collective(c, CollectiveKind::Bcast.name());
    bcast_impl(p, c, root, data, alg).await
}

async fn bcast_impl<T: Wire>(
    p: &Proc,
    c: &Comm,
    root: usize,
    data: Vec<T>,
    alg: Algorithm,
) -> Result<Vec<T>, SimError> {
    check_root(c, root)?;
    let (n, tag) = (c.size(), CollectiveKind::Bcast.tag());
    let v = (c.rank() + n - root) % n;
    let real = |x: usize| (x + root) % n;
    match alg {
        Algorithm::Flat => {
            if v == 0 {
                for x in 1..n {
                    xsend(p, c, real(x), tag, data.clone()).await?;
                }
                Ok(data)
            } else {
                xrecv(p, c, root, tag).await
            }
        }
        Algorithm::Ring => {
            let data = if v == 0 { data } else { xrecv(p, c, real(v - 1), tag).await? };
            if v + 1 < n {
                xsend(p, c, real(v + 1), tag, data.clone()).await?;
            }
            Ok(data)
        }
        Algorithm::Binomial => {
            let mut data = data;
            let mut mask = 1;
            while mask < n {
                if v & mask != 0 {
                    data = xrecv(p, c, real(v - mask), tag).await?;
                    break;
                }
                mask <<= 1;
            }
            mask >>= 1;
            while mask > 0 {
                if v + mask < n {
                    xsend(p, c, real(v + mask), tag, data.clone()).await?;
                }
                mask >>= 1;
            }
            Ok(data)
        }
        other => Err(SimError::Domain(format!("bcast has no {} algorithm", other.name()))),
    }
}

/// Binomial gather of equal-size blocks; the root gets them in rank order.
pub async fn gather<T: Wire>(p: &Proc, c: &Comm, root: usize, block: Vec<T>) -> Result<Option<Vec<Vec<T>>>, SimError> {
    p.log_collective(c, CollectiveKind::Gather.name());
    gather_impl(p, c, root, block).await
}

async fn gather_impl<T: Wire>(p: &Proc, c: &Comm, root: usize, block: Vec<T>) -> Result<Option<Vec<Vec<T>>>, SimError> {
    check_root(c, root)?;
    let (n, tag) = (c.size(), CollectiveKind::Gather.tag());
    let v = (c.rank() + n - root) % n;
    let real = |x: usize| (x + root) % n;
    let m = block.len();
    // blocks of virtual ranks v, v+1, ... concatenated
    let mut acc = block;
    let mut mask = 1;
    while mask < n {
        if v & mask != 0 {
            xsend(p, c, real(v - mask), tag, acc).await?;
            return Ok(None);
        }
        if v + mask < n {
            let part = xrecv::<T>(p, c, real(v + mask), tag).await?;
            let want = mask.min(n - v - mask) * m;
            if part.len() != want {
                return Err(SimError::Domain("gather blocks must have equal size".into()));
            }
            acc.extend(part);
        }
        mask <<= 1;
    }
    let by_virtual: Vec<Vec<T>> = if m == 0 { vec![Vec::new(); n] } else { acc.chunks(m).map(<[T]>::to_vec).collect() };
    Ok(Some((0..n).map(|r| by_virtual[(r + n - root) % n].clone()).collect()))
}

/// Binomial scatter; the root supplies one equal-size block per rank.
pub async fn scatter<T: Wire>(
    p: &Proc,
    c: &Comm,
    root: usize,
    blocks: Option<Vec<Vec<T>>>,
) -> Result<Vec<T>, SimError> {
    p.log_collective(c, CollectiveKind::Scatter.name());
    scatter_impl(p, c, root, blocks).await
}

async fn scatter_impl<T: Wire>(
    p: &Proc,
    c: &Comm,
    root: usize,
    blocks: Option<Vec<Vec<T>>>,
) -> Result<Vec<T>, SimError> {
    check_root(c, root)?;
    let (n, tag) = (c.size(), CollectiveKind::Scatter.tag());
    let v = (c.rank() + n - root) % n;
    let real = |x: usize| (x + root) % n;
    // `held` covers virtual ranks v .. v+span
    let (mut held, m, mut mask) = if v == 0 {
        let blocks = blocks.ok_or_else(|| SimError::Domain("scatter root needs blocks".into()))?;
        if blocks.len() != n || blocks.iter().any(|b| b.len() != blocks[0].len()) {
            return Err(SimError::Domain("scatter needs one equal-size block per rank".into()));
        }
        let m = blocks[0].len();
        let held: Vec<T> = (0..n).flat_map(|x| blocks[real(x)].clone()).collect();
        (held, m, n.next_power_of_two())
    } else {
        let low = v & v.wrapping_neg();
        let held = xrecv::<T>(p, c, real(v - low), tag).await?;
        let span = low.min(n - v);
        if held.len() % span != 0 {
            return Err(SimError::Domain("scatter received a ragged block set".into()));
        }
        let m = held.len() / span;
        (held, m, low)
    };
    mask >>= 1;
    while mask > 0 {
        if v + mask < n {
            let part = held.split_off(mask * m);
            xsend(p, c, real(v + mask), tag, part).await?;
        }
        mask >>= 1;
    }
    held.truncate(m);
    Ok(held)
}

/// Ring allgather in `p − 1` rounds; block `r` comes from rank `r`.
pub async fn allgather<T: Wire>(p: &Proc, c: &Comm, block: Vec<T>) -> Result<Vec<Vec<T>>, SimError> {
    p.log_collective(c, CollectiveKind::Allgather.name());
    let (n, i, tag) = (c.size(), c.rank(), CollectiveKind::Allgather.tag());
    let mut out: Vec<Vec<T>> = vec![Vec::new(); n];
    out[i] = block;
    for s in 0..n.saturating_sub(1) {
        let send = (i + n - s) % n;
        let got = xsendrecv(p, c, (i + 1) % n, out[send].clone(), (i + n - 1) % n, tag).await?;
        out[(i + 2 * n - s - 1) % n] = got;
    }
    Ok(out)
}

/// Pairwise exchange in `p − 1` rounds. `blocks[j]` goes to rank `j`;
/// result `[j]` came from rank `j`. Block sizes may differ.
pub async fn alltoall<T: Wire>(p: &Proc, c: &Comm, blocks: Vec<Vec<T>>) -> Result<Vec<Vec<T>>, SimError> {
    p.log_collective(c, CollectiveKind::Alltoall.name());
    let (n, i, tag) = (c.size(), c.rank(), CollectiveKind::Alltoall.tag());
    if blocks.len() != n {
        return Err(SimError::Domain(format!("alltoall needs {n} blocks, got {}", blocks.len())));
    }
    let mut blocks: Vec<Option<Vec<T>>> = blocks.into_iter().map(Some).collect();
    let mut out: Vec<Vec<T>> = vec![Vec::new(); n];
    out[i] = blocks[i].take().expect("own block");
    for r in 1..n {
        let (dst, src) = if n.is_power_of_two() { (i ^ r, i ^ r) } else { ((i + r) % n, (i + n - r) % n) };
        let data = blocks[dst].take().expect("each block is sent once");
        out[src] = xsendrecv(p, c, dst, data, src, tag).await?;
    }
    Ok(out)
}

/// Elementwise reduction in rank order, result at `root`.
pub async fn reduce<T: Wire, R: Reducer<T> + ?Sized>(
    p: &Proc,
    c: &Comm,
    root: usize,
    data: Vec<T>,
    op: &R,
) -> Result<Option<Vec<T>>, SimError> {
    p.log_collective(c, CollectiveKind::Reduce.name());
    reduce_impl(p, c, root, data, op).await
}

async fn reduce_impl<T: Wire, R: Reducer<T> + ?Sized>(
    p: &Proc,
    c: &Comm,
    root: usize,
    data: Vec<T>,
    op: &R,
) -> Result<Option<Vec<T>>, SimError> {
    check_root(c, root)?;
    let (n, i, tag) = (c.size(), c.rank(), CollectiveKind::Reduce.tag());
    // acc folds ranks i .. i+mask, always a contiguous range
    let mut acc = Some(data);
    let mut mask = 1;
    while mask < n {
        if i & mask != 0 {
            xsend(p, c, i - mask, tag, acc.take().expect("live")).await?;
            break;
        }
        if i + mask < n {
            let right = xrecv::<T>(p, c, i + mask, tag).await?;
            acc = Some(combine_vec(op, acc.as_ref().expect("live"), &right)?);
        }
        mask <<= 1;
    }
    if root == 0 {
        return Ok(acc);
    }
    if i == 0 {
        xsend(p, c, root, tag, acc.take().expect("rank 0 holds the result")).await?;
        Ok(None)
    } else if i == root {
        Ok(Some(xrecv(p, c, 0, tag).await?))
    } else {
        Ok(None)
    }
}

/// Reduce to rank 0 followed by a binomial broadcast.
pub async fn allreduce<T: Wire, R: Reducer<T> + ?Sized>(
    p: &Proc,
    c: &Comm,
    data: Vec<T>,
    op: &R,
) -> Result<Vec<T>, SimError> {
    p.log_collective(c, CollectiveKind::Allreduce.name());
    let r = reduce_impl(p, c, 0, data, op).await?.unwrap_or_default();
    bcast_impl(p, c, 0, r, Algorithm::Binomial).await
}

/// Reduce to rank 0 followed by a scatter of equal blocks.
pub async fn reduce_scatter_block<T: Wire, R: Reducer<T> + ?Sized>(
    p: &Proc,
    c: &Comm,
    data: Vec<T>,
    op: &R,
) -> Result<Vec<T>, SimError> {
    p.log_collective(c, CollectiveKind::ReduceScatterBlock.name());
    let n = c.size();
    if !data.len().is_multiple_of(n) {
        return Err(SimError::Domain(format!("length {} not divisible by {n}", data.len())));
    }
    let r = reduce_impl(p, c, 0, data, op).await?;
    let blocks = r.map(|v| {
        let m = v.len() / n;
        (0..n).map(|k| v[k * m..(k + 1) * m].to_vec()).collect()
    });
    scatter_impl(p, c, 0, blocks).await
}

/// Inclusive prefix reduction over ranks.
pub async fn scan<T: Wire, R: Reducer<T> + ?Sized>(
    p: &Proc,
    c: &Comm,
    data: Vec<T>,
    op: &R,
    alg: Algorithm,
) -> Result<Vec<T>, SimError> {
    p.log_collective(c, CollectiveKind::Scan.name());
    Ok(scan_impl(p, c, data, op, alg, CollectiveKind::Scan).await?.0)
}

/// Exclusive prefix reduction over ranks; rank 0 receives the identity.
pub async fn exscan<T: Wire, R: Reducer<T> + ?Sized>(
    p: &Proc,
    c: &Comm,
    data: Vec<T>,
    op: &R,
    alg: Algorithm,
) -> Result<Vec<T>, SimError> {
    p.log_collective(c, CollectiveKind::Exscan.name());
    let len = data.len();
    let (_, ex) = scan_impl(p, c, data, op, alg, CollectiveKind::Exscan).await?;
    Ok(ex.unwrap_or_else(|| vec![op.identity(); len]))
}

/// Returns the inclusive prefix and, except at rank 0, the exclusive one.
async fn scan_impl<T: Wire, R: Reducer<T> + ?Sized>(
    p: &Proc,
    c: &Comm,
    data: Vec<T>,
    op: &R,
    alg: Algorithm,
    kind: CollectiveKind,
) -> Result<(Vec<T>, Option<Vec<T>>), SimError> {
    let (n, i, tag) = (c.size(), c.rank(), kind.tag());
    match alg {
        Algorithm::Linear => {
            let ex = if i > 0 { Some(xrecv::<T>(p, c, i - 1, tag).await?) } else { None };
            let inc = match &ex {
                Some(left) => combine_vec(op, left, &data)?,
                None => data,
            };
            if i + 1 < n {
                xsend(p, c, i + 1, tag, inc.clone()).await?;
            }
            Ok((inc, ex))
        }
        Algorithm::Binomial => {
            // inc folds ranks i-d+1 ..= i after the round with distance d
            let (mut inc, mut ex) = (data, None::<Vec<T>>);
            let mut d = 1;
            while d < n {
                let dst = if i + d < n { i + d } else { PROC_NULL };
                let src = if i >= d { i - d } else { PROC_NULL };
                let got = xsendrecv(p, c, dst, inc.clone(), src, tag).await?;
                if src != PROC_NULL {
                    ex = Some(match ex {
                        Some(e) => combine_vec(op, &got, &e)?,
                        None => got.clone(),
                    });
                    inc = combine_vec(op, &got, &inc)?;
                }
                d <<= 1;
            }
            Ok((inc, ex))
        }
        other => Err(SimError::Domain(format!("{} has no {} algorithm", kind.name(), other.name()))),
    }
}

/// Measured behaviour of one collective on a fully connected machine.
#[derive(Debug, Clone, PartialEq)]
pub struct CollMeasure {
    pub rounds: u64,
    pub total_time: f64,
    pub lower_bound: f64,
    /// Result equals the definitional oracle at every rank.
    pub ok: bool,
}

fn block_of(rank: usize, m: usize) -> Vec<i64> {
    (0..m).map(|j| (rank * 1000 + j) as i64 + 1).collect()
}

/// Runs `kind` with `m`-element blocks at root 0 and checks the result.
pub fn measure(
    kind: CollectiveKind,
    alg: Algorithm,
    p: usize,
    m: usize,
    model: CostModel,
) -> Result<CollMeasure, SimError> {
    if !Algorithm::available(kind).contains(&alg) {
        return Err(SimError::Domain(format!("{kind} has no {} algorithm", alg.name())));
    }
    let world = World::new(p, model)?;
    let op = ReductionOperator::Sum;
    let (out, trace) = world
        .run(|pr| async move {
            let c = pr.world();
            let (n, r) = (c.size(), c.rank());
            let mine = block_of(r, m);
            let ok = match kind {
                CollectiveKind::Barrier => {
                    barrier(&pr, &c).await?;
                    true
                }
                CollectiveKind::Bcast => {
                    let data = if r == 0 { mine } else { Vec::new() };
                    bcast(&pr, &c, 0, data, alg).await? == block_of(0, m)
                }
                CollectiveKind::Gather => match gather(&pr, &c, 0, mine).await? {
                    Some(all) => all == (0..n).map(|x| block_of(x, m)).collect::<Vec<_>>(),
                    None => r != 0,
                },
                CollectiveKind::Scatter => {
                    let blocks = (r == 0).then(|| (0..n).map(|x| block_of(x, m)).collect());
                    scatter(&pr, &c, 0, blocks).await? == block_of(r, m)
                }
                CollectiveKind::Allgather => {
                    allgather(&pr, &c, mine).await? == (0..n).map(|x| block_of(x, m)).collect::<Vec<_>>()
                }
                CollectiveKind::Alltoall => {
                    let blocks = (0..n).map(|j| block_of(r * n + j, m)).collect();
                    let got = alltoall(&pr, &c, blocks).await?;
                    got == (0..n).map(|j| block_of(j * n + r, m)).collect::<Vec<_>>()
                }
                CollectiveKind::Reduce | CollectiveKind::Allreduce => {
                    let want = fold_oracle(&op, (0..n).map(|x| block_of(x, m)));
                    if kind == CollectiveKind::Reduce {
                        reduce(&pr, &c, 0, mine, &op).await?.is_none_or(|v| v == want)
                    } else {
                        allreduce(&pr, &c, mine, &op).await? == want
                    }
                }
                CollectiveKind::ReduceScatterBlock => {
                    let data = block_of(r, m * n);
                    let want = fold_oracle(&op, (0..n).map(|x| block_of(x, m * n)));
                    reduce_scatter_block(&pr, &c, data, &op).await? == want[r * m..(r + 1) * m]
                }
                CollectiveKind::Scan => {
                    scan(&pr, &c, mine, &op, alg).await? == fold_oracle(&op, (0..=r).map(|x| block_of(x, m)))
                }
                CollectiveKind::Exscan => {
                    let want = if r == 0 { vec![0; m] } else { fold_oracle(&op, (0..r).map(|x| block_of(x, m))) };
                    exscan(&pr, &c, mine, &op, alg).await? == want
                }
            };
            Ok(ok)
        })
        .into_result()?;
    let (bcast_lb, a2a_lb) = collective_bounds(p, 1, (p / 2) * p.div_ceil(2));
    let lower_bound = match kind {
        CollectiveKind::Alltoall if p > 1 => a2a_lb,
        CollectiveKind::Alltoall => 0.0,
        _ => f64::from(bcast_lb),
    };
    Ok(CollMeasure { rounds: trace.rounds, total_time: trace.total_time, lower_bound, ok: out.iter().all(|&b| b) })
}

/// Left-to-right elementwise fold; empty input gives an empty vector.
pub fn fold_oracle<T: Clone, R: Reducer<T> + ?Sized>(op: &R, vs: impl IntoIterator<Item = Vec<T>>) -> Vec<T> {
    let mut it = vs.into_iter();
    let Some(first) = it.next() else { return Vec::new() };
    it.fold(first, |acc, v| acc.iter().zip(&v).map(|(a, b)| op.combine(a, b)).collect())
}

/// Expected dependent rounds of each algorithm on `p` ranks.
pub fn expected_rounds(kind: CollectiveKind, alg: Algorithm, p: usize) -> u64 {
    let lg = ceil_log2(p) as u64;
    let lin = p.saturating_sub(1) as u64;
    match (kind, alg) {
        (CollectiveKind::Bcast, Algorithm::Flat | Algorithm::Ring) => lin,
        (CollectiveKind::Allgather | CollectiveKind::Alltoall, _) => lin,
        (CollectiveKind::Scan | CollectiveKind::Exscan, Algorithm::Linear) => lin,
        (CollectiveKind::Allreduce | CollectiveKind::ReduceScatterBlock, _) => 2 * lg,
        _ => lg,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `x ↦ a·x + b`; composition is associative and not commutative.
    #[derive(Debug, Clone, Copy, PartialEq)]
    struct Affine(i64, i64);

    struct Compose;

    impl Reducer<Affine> for Compose {
        fn combine(&self, f: &Affine, g: &Affine) -> Affine {
            // apply f, then g
            Affine(f.0.wrapping_mul(g.0), g.0.wrapping_mul(f.1).wrapping_add(g.1))
        }

        fn identity(&self) -> Affine {
            Affine(1, 0)
        }
    }

    impl Wire for Affine {
        fn pack(v: Vec<Self>) -> Payload {
            Payload::Int(v.into_iter().flat_map(|Affine(a, b)| [a, b]).collect())
        }

        fn unpack(p: Payload) -> Result<Vec<Self>, SimError> {
            Ok(p.into_ints()?.chunks(2).map(|c| Affine(c[0], c[1])).collect())
        }
    }

    fn run<T, F, Fut>(p: usize, f: F) -> (Vec<T>, crate::netsim::SimTrace)
    where
        F: Fn(Proc) -> Fut,
        Fut: std::future::Future<Output = Result<T, SimError>>,
    {
        World::new(p, CostModel::linear(1.0, 1.0)).unwrap().run(f).into_result().unwrap()
    }

    #[test]
    fn bounds() {
        assert_eq!(collective_bounds(8, 1, 2), (3, 8.0));
        assert_eq!(collective_bounds(9, 2, 1).0, 2);
        assert_eq!(collective_bounds(1, 1, 1).0, 0);
    }

    #[test]
    fn every_kind_matches_its_oracle() {
        for p in 1..=9 {
            for kind in CollectiveKind::ALL {
                for &alg in Algorithm::available(kind) {
                    let r = measure(kind, alg, p, 3, CostModel::default()).unwrap();
                    assert!(r.ok, "{kind} {} p={p}", alg.name());
                    assert_eq!(r.rounds, expected_rounds(kind, alg, p), "{kind} {} p={p}", alg.name());
                }
            }
        }
    }

    #[test]
    fn ring_bcast_from_nonzero_root() {
        let (out, trace) = run(5, |p| async move {
            let c = p.world();
            let d = if c.rank() == 3 { vec![7, 8] } else { vec![] };
            bcast(&p, &c, 3, d, Algorithm::Ring).await
        });
        assert!(out.iter().all(|v| *v == [7, 8]));
        assert_eq!(trace.rounds, 4);
    }

    #[test]
    fn non_commutative_reductions_follow_rank_order() {
        let f = |r: usize| Affine(r as i64 + 2, 3 * r as i64 - 1);
        for n in 1..=7 {
            let (out, _) = run(n, |p| async move {
                let c = p.world();
                let r = c.rank();
                let all = allreduce(&p, &c, vec![f(r)], &Compose).await?;
                let s1 = scan(&p, &c, vec![f(r)], &Compose, Algorithm::Binomial).await?;
                let s2 = scan(&p, &c, vec![f(r)], &Compose, Algorithm::Linear).await?;
                let e1 = exscan(&p, &c, vec![f(r)], &Compose, Algorithm::Binomial).await?;
                let e2 = exscan(&p, &c, vec![f(r)], &Compose, Algorithm::Linear).await?;
                Ok((all, s1, s2, e1, e2))
            });
            let total = fold_oracle(&Compose, (0..n).map(|r| vec![f(r)]));
            for (r, (all, s1, s2, e1, e2)) in out.into_iter().enumerate() {
                assert_eq!(all, total);
                let inc = fold_oracle(&Compose, (0..=r).map(|x| vec![f(x)]));
                assert_eq!((&s1, &s2), (&inc, &inc));
                let exc = if r == 0 { vec![Affine(1, 0)] } else { fold_oracle(&Compose, (0..r).map(|x| vec![f(x)])) };
                assert_eq!((&e1, &e2), (&exc, &exc));
            }
        }
    }

    #[test]
    fn reduce_scatter_example_and_mismatch() {
        let (out, _) = run(2, |p| async move {
            let c = p.world();
            let v = if c.rank() == 0 { vec![1, 2] } else { vec![3, 4] };
            reduce_scatter_block(&p, &c, v, &ReductionOperator::Sum).await
        });
        assert_eq!(out, [vec![4], vec![6]]);
        let rep = World::new(2, CostModel::default()).unwrap().run(|p| async move {
            let c = p.world();
            allreduce(&p, &c, vec![0i64; c.rank() + 1], &ReductionOperator::Sum).await
        });
        assert!(matches!(rep.outcome, Err(SimError::Domain(_))));
    }

    #[test]
    fn operator_identities() {
        for op in ReductionOperator::ALL {
            for x in [-5i64, 0, 1, 9] {
                let x =
                    if matches!(op, ReductionOperator::LAnd | ReductionOperator::LOr) { i64::from(x != 0) } else { x };
                assert_eq!(op.combine(&op.identity(), &x), x, "{op:?}");
            }
        }
    }

    #[test]
    fn barrier_exit_after_all_entries() {
        let (out, _) = run(6, |p| async move {
            p.compute(10.0 * p.rank() as f64);
            let c = p.world();
            let entry = p.clock();
            barrier(&p, &c).await?;
            Ok((entry, p.clock()))
        });
        let last_entry = out.iter().map(|x| x.0).fold(0.0, f64::max);
        assert!(out.iter().all(|x| x.1 >= last_entry));
    }

    #[test]
    fn bcast_is_not_synchronizing() {
        let (out, _) = run(4, |p| async move {
            if p.rank() == 3 {
                p.compute(100.0);
            }
            let c = p.world();
            let entry = p.clock();
            bcast(&p, &c, 0, vec![1i64], Algorithm::Binomial).await?;
            Ok((entry, p.clock()))
        });
        assert!(out[1].1 < out[3].0);
    }

    #[test]
    fn binomial_bcast_time_bound() {
        for p in 1..=16 {
            let m = 5;
            let r = measure(CollectiveKind::Bcast, Algorithm::Binomial, p, m, CostModel::linear(3.0, 0.5)).unwrap();
            let lg = ceil_log2(p) as f64;
            assert!(r.total_time <= lg * (3.0 + 0.5 * m as f64) + 1e-9);
        }
    }

    #[test]
    fn collective_counts_once_per_call() {
        let (_, trace) = run(4, |p| async move {
            let c = p.world();
            allreduce(&p, &c, vec![1i64], &ReductionOperator::Sum).await?;
            barrier(&p, &c).await
        });
        assert_eq!(trace.collective_count("allreduce"), 1);
        assert_eq!(trace.collective_count("bcast"), 0);
        assert_eq!(trace.collective_total(), 2);
    }
}
