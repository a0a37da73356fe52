//! Ranking, co-ranking and stable merging of sorted sequences.

use super::{InstrumentedRun, KernelError};
use crate::util::ceil_log2;

/// Number of elements of `a` strictly smaller than `x`.
pub fn rank<T: Ord>(x: &T, a: &[T]) -> usize {
    rank_counted(x, a).0
}

/// [`rank`] together with the number of comparisons performed.
pub fn rank_counted<T: Ord>(x: &T, a: &[T]) -> (usize, u64) {
    search(a, |e| e < x)
}

/// Number of elements of `a` not larger than `x`, with comparisons.
fn rank_le<T: Ord>(x: &T, a: &[T]) -> (usize, u64) {
    search(a, |e| e <= x)
}

/// Length of the prefix of `a` satisfying `below`, which must be monotone.
fn search<T>(a: &[T], below: impl Fn(&T) -> bool) -> (usize, u64) {
    let (mut lo, mut hi, mut cmp) = (0, a.len(), 0);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        cmp += 1;
        if below(&a[mid]) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    (lo, cmp)
}

/// Split of output index `i = j + k` between `j` elements of A and `k` of B.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorankPair {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl CorankPair {
    /// The uniqueness conditions: `j = 0 or A[j-1] <= B[k]` and
    /// `k = 0 or B[k-1] < A[j]`, with out-of-range elements as ±∞.
    pub fn satisfies<T: Ord>(&self, a: &[T], b: &[T]) -> bool {
        if self.j + self.k != self.i || self.j > a.len() || self.k > b.len() {
            return false;
        }
        let left = self.j == 0 || self.k == b.len() || a[self.j - 1] <= b[self.k];
        let right = self.k == 0 || self.j == a.len() || b[self.k - 1] < a[self.j];
        left && right
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Corank {
    pub pair: CorankPair,
    pub iterations: u64,
    pub comparisons: u64,
}

/// Co-rank of output index `i` in the stable merge of `a` and `b`.
pub fn corank<T: Ord>(i: usize, a: &[T], b: &[T]) -> Result<Corank, KernelError> {
    let (m, n) = (a.len(), b.len());
    if i > m + n {
        return Err(KernelError::Domain(format!("index {i} beyond merged length {}", m + n)));
    }
    let mut j = i.min(m);
    let mut k = i - j;
    let mut jlow = i.saturating_sub(n);
    let mut klow = 0;
    let limit = ceil_log2(m + n) as u64 + 2;
    let (mut iterations, mut comparisons) = (0u64, 0u64);
    loop {
        if j > 0 && k < n && {
            comparisons += 1;
            a[j - 1] > b[k]
        } {
            let d = (1 + j - jlow) / 2;
            klow = k;
            j -= d;
            k += d;
        } else if k > 0 && j < m && {
            comparisons += 1;
            b[k - 1] >= a[j]
        } {
            let d = (1 + k - klow) / 2;
            jlow = j;
            k -= d;
            j += d;
        } else {
            break;
        }
        iterations += 1;
        if iterations > limit {
            return Err(KernelError::Domain("co-rank search did not converge; unsorted input".into()));
        }
    }
    let pair = CorankPair { i, j, k };
    if !pair.satisfies(a, b) {
        return Err(KernelError::Domain("co-rank conditions violated; unsorted input".into()));
    }
    Ok(Corank { pair, iterations, comparisons })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MergeVariant {
    Sequential,
    /// Pieces cut at the ranks of the first elements of `p` blocks of each input.
    RankBlocks(usize),
    /// `p` pieces of equal output size cut at co-ranks.
    Corank(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Merged<T> {
    pub c: Vec<T>,
    pub run: InstrumentedRun,
    /// Output length of every independently merged piece.
    pub pieces: Vec<usize>,
}

fn check_sorted<T: Ord>(name: &str, a: &[T]) -> Result<(), KernelError> {
    if a.windows(2).any(|w| w[0] > w[1]) {
        return Err(KernelError::Domain(format!("input {name} is not sorted")));
    }
    Ok(())
}

/// Sequential stable merge; returns comparisons.
fn merge_into<T: Ord + Clone>(a: &[T], b: &[T], out: &mut Vec<T>) -> u64 {
    let (mut i, mut j, mut cmp) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        cmp += 1;
        if b[j] < a[i] {
            out.push(b[j].clone());
            j += 1;
        } else {
            out.push(a[i].clone());
            i += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    cmp
}

/// Stable merge: equal elements of `a` precede those of `b`.
pub fn merge<T: Ord + Clone>(variant: MergeVariant, a: &[T], b: &[T]) -> Result<Merged<T>, KernelError> {
    check_sorted("a", a)?;
    check_sorted("b", b)?;
    let (m, n) = (a.len(), b.len());
    let mut c = Vec::with_capacity(m + n);
    let cuts: Vec<(usize, usize)>;
    let mut split = InstrumentedRun::default();
    match variant {
        MergeVariant::Sequential => {
            let cmp = merge_into(a, b, &mut c);
            let run = InstrumentedRun { ops: cmp, depth: cmp, rounds: cmp };
            return Ok(Merged { c, run, pieces: vec![m + n] });
        }
        MergeVariant::RankBlocks(p) | MergeVariant::Corank(p) if p < 1 => {
            return Err(KernelError::Domain("p must be at least 1".into()));
        }
        MergeVariant::RankBlocks(p) => {
            let mut v = vec![(0, 0), (m, n)];
            for t in 0..p {
                let ja = t * m / p;
                if ja < m {
                    let (r, cmp) = rank_counted(&a[ja], b);
                    v.push((ja, r));
                    split.ops += cmp;
                    split.depth = split.depth.max(cmp);
                }
                let kb = t * n / p;
                if kb < n {
                    let (r, cmp) = rank_le(&b[kb], a);
                    v.push((r, kb));
                    split.ops += cmp;
                    split.depth = split.depth.max(cmp);
                }
            }
            v.sort_unstable_by_key(|&(j, k)| (j + k, j, k));
            v.dedup();
            cuts = v;
        }
        MergeVariant::Corank(p) => {
            let mut v = Vec::with_capacity(p + 1);
            for t in 0..=p {
                let r = corank(t * (m + n) / p, a, b)?;
                v.push((r.pair.j, r.pair.k));
                split.ops += r.comparisons;
                split.depth = split.depth.max(r.comparisons);
            }
            cuts = v;
        }
    }
    split.rounds = 1;
    let mut pieces = Vec::with_capacity(cuts.len() - 1);
    let mut work = InstrumentedRun { rounds: 1, ..Default::default() };
    for w in cuts.windows(2) {
        let ((j0, k0), (j1, k1)) = (w[0], w[1]);
        debug_assert!(j0 <= j1 && k0 <= k1);
        let cmp = merge_into(&a[j0..j1], &b[k0..k1], &mut c);
        pieces.push(j1 - j0 + k1 - k0);
        work.ops += cmp;
        work.depth = work.depth.max(cmp);
    }
    Ok(Merged { c, run: split.then(work), pieces })
}
