//! Three-way partition by mark-and-compact, and quicksort on top of it.

use std::cmp::Ordering;

use super::scan::{scan, ScanMode, ScanVariant};
use super::InstrumentedRun;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partitioned<T> {
    /// `[< pivot][= pivot][> pivot]`, each class in input order.
    pub a: Vec<T>,
    pub lt: usize,
    pub eq: usize,
    pub run: InstrumentedRun,
}

pub fn parallel_partition<T: Ord + Clone>(a: &[T], pivot: &T) -> Partitioned<T> {
    let n = a.len();
    if n == 0 {
        return Partitioned { a: Vec::new(), lt: 0, eq: 0, run: InstrumentedRun::default() };
    }
    let class: Vec<usize> = a
        .iter()
        .map(|x| match x.cmp(pivot) {
            Ordering::Less => 0,
            Ordering::Equal => 1,
            Ordering::Greater => 2,
        })
        .collect();
    let mut offsets = [0usize; 3];
    let mut positions = vec![vec![]; 3];
    let mut scans = InstrumentedRun::default();
    for (c, pos) in positions.iter_mut().enumerate() {
        let marks: Vec<u64> = class.iter().map(|&k| u64::from(k == c)).collect();
        let (excl, run) = scan(ScanVariant::UpDown, &marks, |x, y| x + y, ScanMode::Exclusive(0)).expect("nonempty");
        offsets[c] = (excl[n - 1] + marks[n - 1]) as usize;
        *pos = excl;
        // the three scans are independent
        scans.ops += run.ops;
        scans.depth = scans.depth.max(run.depth);
        scans.rounds = scans.rounds.max(run.rounds);
    }
    let base = [0, offsets[0], offsets[0] + offsets[1]];
    let mut out: Vec<Option<T>> = vec![None; n];
    for (i, x) in a.iter().enumerate() {
        let c = class[i];
        out[base[c] + positions[c][i] as usize] = Some(x.clone());
    }
    // classification costs two comparisons per element, scatter is free
    let mark = InstrumentedRun { ops: 2 * n as u64, depth: 1, rounds: 1 };
    let scatter = InstrumentedRun { ops: 0, depth: 0, rounds: 1 };
    Partitioned {
        a: out.into_iter().map(|x| x.expect("scatter is a permutation")).collect(),
        lt: offsets[0],
        eq: offsets[1],
        run: mark.then(scans).then(scatter),
    }
}

pub const QUICKSORT_CUTOFF: usize = 32;

/// Quicksort with median-of-three pivots and insertion sort below
/// [`QUICKSORT_CUTOFF`]. The two recursive calls are independent, so depth
/// and rounds follow the deeper branch.
pub fn quicksort<T: Ord + Clone>(a: &[T]) -> (Vec<T>, InstrumentedRun) {
    let mut v = a.to_vec();
    let run = sort_in_place(&mut v);
    (v, run)
}

fn sort_in_place<T: Ord + Clone>(v: &mut [T]) -> InstrumentedRun {
    let n = v.len();
    if n <= QUICKSORT_CUTOFF {
        let cmp = insertion_sort(v);
        return InstrumentedRun { ops: cmp, depth: cmp, rounds: cmp };
    }
    let pivot = median_of_three(&v[0], &v[n / 2], &v[n - 1]).clone();
    let part = parallel_partition(v, &pivot);
    v.clone_from_slice(&part.a);
    let (lt, eq) = (part.lt, part.eq);
    let (left, rest) = v.split_at_mut(lt);
    let right = &mut rest[eq..];
    let l = sort_in_place(left);
    let r = sort_in_place(right);
    let children = InstrumentedRun { ops: l.ops + r.ops, depth: l.depth.max(r.depth), rounds: l.rounds.max(r.rounds) };
    let pick = InstrumentedRun { ops: 3, depth: 3, rounds: 1 };
    pick.then(part.run).then(children)
}

fn median_of_three<'a, T: Ord>(x: &'a T, y: &'a T, z: &'a T) -> &'a T {
    if (x <= y) == (y <= z) {
        y
    } else if (y <= x) == (x <= z) {
        x
    } else {
        z
    }
}

fn insertion_sort<T: Ord>(v: &mut [T]) -> u64 {
    let mut cmp = 0;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 {
            cmp += 1;
            if v[j - 1] <= v[j] {
                break;
            }
            v.swap(j - 1, j);
            j -= 1;
        }
    }
    cmp
}
