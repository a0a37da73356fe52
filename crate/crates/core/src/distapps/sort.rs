//! Distributed quicksort and counting sort.

use super::{AppEnv, AppRun};
use crate::collectives::{allreduce, alltoall, bcast, exscan, gather, Algorithm, ReductionOperator};
use crate::netsim::{Payload, SimError};
use crate::util::ceil_log2;

#[derive(Debug, Clone, PartialEq)]
pub struct QuicksortRun {
    pub blocks: Vec<Vec<i64>>,
    pub levels: u32,
    /// Largest output block over the average block size; 1 is perfect.
    pub imbalance: f64,
    /// Largest number of elements a rank sent in one level.
    pub max_exchange: usize,
}

fn sort_cost(n: usize) -> u64 {
    (n * ceil_log2(n).max(1)) as u64
}

fn search_cost(n: usize) -> u64 {
    ceil_log2(n + 1) as u64
}

/// Hypercube quicksort on `p = 2^k` ranks. At each level the pivot is the
/// median of the per-rank medians; the lower half of the communicator keeps
/// elements `≤ pivot`.
pub fn dist_quicksort(env: &AppEnv, locals: &[Vec<i64>]) -> Result<AppRun<QuicksortRun>, SimError> {
    let p = env.p();
    if !p.is_power_of_two() {
        return Err(SimError::Domain(format!("{p} processes is not a power of two")));
    }
    if locals.len() != p {
        return Err(SimError::Domain(format!("{} local arrays for {p} processes", locals.len())));
    }
    let (out, trace) = env
        .world
        .run(|pr| async move {
            let mut c = pr.world();
            let mut v = locals[c.rank()].clone();
            let (mut levels, mut max_exchange, mut ops) = (0u32, 0usize, 0u64);
            while c.size() > 1 {
                v.sort_unstable();
                ops += sort_cost(v.len());
                let med = if v.is_empty() { vec![0, 0] } else { vec![1, v[(v.len() - 1) / 2]] };
                let pivot = match gather(&pr, &c, 0, med).await? {
                    Some(all) => {
                        let mut meds: Vec<i64> = all.iter().filter(|m| m[0] == 1).map(|m| m[1]).collect();
                        meds.sort_unstable();
                        vec![meds.get(meds.len().saturating_sub(1) / 2).copied().unwrap_or(0)]
                    }
                    None => Vec::new(),
                };
                let pivot = bcast(&pr, &c, 0, pivot, Algorithm::Binomial).await?[0];
                let half = c.size() / 2;
                let low = c.rank() < half;
                let cut = v.partition_point(|&x| x <= pivot);
                let (keep, give) = if low {
                    let give = v.split_off(cut);
                    (v, give)
                } else {
                    let hi = v.split_off(cut);
                    (hi, v)
                };
                ops += search_cost(keep.len() + give.len());
                let partner = if low { c.rank() + half } else { c.rank() - half };
                max_exchange = max_exchange.max(give.len());
                let n_in = pr
                    .sendrecv(&c, partner, 0, Payload::Int(vec![give.len() as i64]), Some(partner), Some(0))
                    .await?
                    .payload
                    .into_ints()?[0] as usize;
                let got = pr.sendrecv(&c, partner, 1, Payload::Int(give), Some(partner), Some(1)).await?;
                let got = got.payload.into_ints()?;
                if got.len() != n_in {
                    return Err(SimError::Domain("exchange size mismatch".into()));
                }
                v = keep;
                v.extend(got);
                let color = i64::from(!low);
                c = pr.split(&c, Some(color), c.rank() as i64).await?.expect("colored");
                levels += 1;
            }
            v.sort_unstable();
            ops += sort_cost(v.len());
            pr.compute(env.op_time * ops as f64);
            Ok((v, levels, max_exchange, ops))
        })
        .into_result()?;
    let total: usize = locals.iter().map(Vec::len).sum();
    let levels = out.first().map_or(0, |o| o.1);
    let max_exchange = out.iter().map(|o| o.2).max().unwrap_or(0);
    let local_ops = out.iter().map(|o| o.3).collect();
    let blocks: Vec<Vec<i64>> = out.into_iter().map(|o| o.0).collect();
    let biggest = blocks.iter().map(Vec::len).max().unwrap_or(0);
    let imbalance = if total == 0 { 1.0 } else { biggest as f64 * p as f64 / total as f64 };
    Ok(AppRun { output: QuicksortRun { blocks, levels, imbalance, max_exchange }, trace, local_ops })
}

/// Where an output key came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Origin {
    pub key: i64,
    pub rank: usize,
    pub index: usize,
}

/// Stable sequential oracle: keys ordered by `(key, rank, index)`.
pub fn counting_sort_seq(locals: &[Vec<i64>]) -> Vec<Origin> {
    let mut all: Vec<Origin> = locals
        .iter()
        .enumerate()
        .flat_map(|(rank, v)| v.iter().enumerate().map(move |(index, &key)| Origin { key, rank, index }))
        .collect();
    all.sort();
    all
}

/// Distributed counting sort over keys in `[0, r)`. Rank `i` receives the
/// global output positions `[i·N/p, (i+1)·N/p)`.
pub fn counting_sort(env: &AppEnv, locals: &[Vec<i64>], r: usize) -> Result<AppRun<Vec<Vec<Origin>>>, SimError> {
    let p = env.p();
    if locals.len() != p {
        return Err(SimError::Domain(format!("{} local arrays for {p} processes", locals.len())));
    }
    if let Some(&k) = locals.iter().flatten().find(|&&k| k < 0 || k as usize >= r) {
        return Err(SimError::Domain(format!("key {k} outside [0, {r})")));
    }
    let (out, trace) = env
        .world
        .run(|pr| async move {
            let c = pr.world();
            let me = c.rank();
            let v = &locals[me];
            let mut counts = vec![0i64; r];
            for &k in v {
                counts[k as usize] += 1;
            }
            let all = allreduce(&pr, &c, counts.clone(), &ReductionOperator::Sum).await?;
            let pre = exscan(&pr, &c, counts, &ReductionOperator::Sum, Algorithm::Binomial).await?;
            let total: i64 = all.iter().sum();
            let n = total as usize;
            let start = |i: usize| i * n / p;
            let mut next: Vec<i64> = (0..r)
                .scan(0i64, |acc, k| {
                    let s = *acc;
                    *acc += all[k];
                    Some(s + pre[k])
                })
                .collect();
            let mut blocks: Vec<Vec<i64>> = vec![Vec::new(); p];
            for (idx, &k) in v.iter().enumerate() {
                let g = next[k as usize] as usize;
                next[k as usize] += 1;
                let owner = (0..p).rev().find(|&o| start(o) <= g).expect("start(0) = 0");
                blocks[owner].extend([g as i64, k, idx as i64]);
            }
            let got = alltoall(&pr, &c, blocks).await?;
            let lo = start(me);
            let mut mine: Vec<Option<Origin>> = vec![None; start(me + 1) - lo];
            for (src, blk) in got.into_iter().enumerate() {
                for t in blk.chunks(3) {
                    let o = Origin { key: t[1], rank: src, index: t[2] as usize };
                    mine[t[0] as usize - lo] = Some(o);
                }
            }
            let ops = (2 * v.len() + r + mine.len()) as u64;
            pr.compute(env.op_time * ops as f64);
            let mine: Option<Vec<Origin>> = mine.into_iter().collect();
            let mine = mine.ok_or_else(|| SimError::Domain("output block has holes".into()))?;
            Ok((mine, ops))
        })
        .into_result()?;
    let (blocks, local_ops) = out.into_iter().unzip();
    Ok(AppRun { output: blocks, trace, local_ops })
}
