//! Bitonic merge of two ascending sequences.

use super::InstrumentedRun;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitonicMerge<T> {
    pub c: Vec<T>,
    /// Comparator index pairs `(lo, hi)` into the output, one list per round.
    pub schedule: Vec<Vec<(usize, usize)>>,
    pub run: InstrumentedRun,
}

/// Merges `a` and `b` by a bitonic merging network over `a ++ reverse(b)`.
///
/// The sequence is virtually prefixed with −∞ up to the next power of two.
/// Padding stays at the low positions throughout, so every comparator whose
/// low index lies in the padding is known in advance and skipped.
pub fn bitonic_merge<T: Ord + Clone>(a: &[T], b: &[T]) -> BitonicMerge<T> {
    let n = a.len() + b.len();
    let size = n.next_power_of_two().max(1);
    let pad = size - n;
    let mut x: Vec<T> = a.iter().chain(b.iter().rev()).cloned().collect();
    let mut depth = vec![0u64; n];
    let mut schedule = Vec::new();
    let mut ops = 0;
    let mut h = size / 2;
    while h >= 1 {
        let mut round = Vec::new();
        for i in pad..size {
            if i & h == 0 {
                let (lo, hi) = (i - pad, i + h - pad);
                if x[lo] > x[hi] {
                    x.swap(lo, hi);
                }
                let d = depth[lo].max(depth[hi]) + 1;
                depth[lo] = d;
                depth[hi] = d;
                round.push((lo, hi));
                ops += 1;
            }
        }
        schedule.push(round);
        h /= 2;
    }
    let run = InstrumentedRun { ops, depth: depth.iter().copied().max().unwrap_or(0), rounds: schedule.len() as u64 };
    BitonicMerge { c: x, schedule, run }
}
