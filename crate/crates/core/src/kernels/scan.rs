//! Prefix sums.

use super::{InstrumentedRun, KernelError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanVariant {
    Sequential,
    /// Pairwise reduction, recursive scan of the pair sums, fix-up.
    Recursive,
    /// In-place up-sweep followed by down-sweep.
    UpDown,
    /// Non work-optimal doubling, ⌈log₂ n⌉ rounds.
    HillisSteele,
    /// `p` contiguous blocks: block reduction, scan of the block sums,
    /// offset-and-scan of every block.
    Blocked(usize),
    /// `p+1` equal blocks with ops + depth = 2n − 2; requires `(p+1) | n`.
    OptimalTradeoff(usize),
}

impl ScanVariant {
    pub fn name(&self) -> &'static str {
        match self {
            ScanVariant::Sequential => "sequential",
            ScanVariant::Recursive => "recursive",
            ScanVariant::UpDown => "updown",
            ScanVariant::HillisSteele => "hillis_steele",
            ScanVariant::Blocked(_) => "blocked",
            ScanVariant::OptimalTradeoff(_) => "tradeoff",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScanMode<T> {
    Inclusive,
    /// Output `i` folds inputs `0..i`; output 0 is the given identity.
    Exclusive(T),
}

/// A value with the depth of the operator chain that produced it.
#[derive(Clone)]
struct V<T> {
    v: T,
    d: u64,
}

struct Ctx<F> {
    op: F,
    ops: u64,
    rounds: u64,
}

impl<F> Ctx<F> {
    fn apply<T>(&mut self, x: &V<T>, y: &V<T>) -> V<T>
    where
        F: Fn(&T, &T) -> T,
    {
        self.ops += 1;
        V { v: (self.op)(&x.v, &y.v), d: x.d.max(y.d) + 1 }
    }
}

pub fn scan<T: Clone>(
    variant: ScanVariant,
    a: &[T],
    op: impl Fn(&T, &T) -> T,
    mode: ScanMode<T>,
) -> Result<(Vec<T>, InstrumentedRun), KernelError> {
    let n = a.len();
    if n == 0 {
        return Err(KernelError::Domain("empty array".into()));
    }
    let mut x: Vec<V<T>> = a.iter().map(|v| V { v: v.clone(), d: 0 }).collect();
    let mut c = Ctx { op, ops: 0, rounds: 0 };
    match variant {
        ScanVariant::Sequential => sequential(&mut c, &mut x),
        ScanVariant::Recursive => recursive(&mut c, &mut x),
        ScanVariant::UpDown => updown(&mut c, &mut x),
        ScanVariant::HillisSteele => hillis_steele(&mut c, &mut x),
        ScanVariant::Blocked(p) => {
            if p < 1 {
                return Err(KernelError::Domain("p must be at least 1".into()));
            }
            blocked(&mut c, &mut x, p.min(n))
        }
        ScanVariant::OptimalTradeoff(p) => {
            if p < 1 || !n.is_multiple_of(p + 1) {
                return Err(KernelError::Domain(format!("p+1 = {} does not divide n = {n}", p + 1)));
            }
            tradeoff(&mut c, &mut x, p)
        }
    }
    let run = InstrumentedRun { ops: c.ops, depth: x.iter().map(|v| v.d).max().unwrap_or(0), rounds: c.rounds };
    let mut out: Vec<T> = x.into_iter().map(|v| v.v).collect();
    if let ScanMode::Exclusive(id) = mode {
        out.pop();
        out.insert(0, id);
    }
    Ok((out, run))
}

fn sequential<T: Clone, F: Fn(&T, &T) -> T>(c: &mut Ctx<F>, x: &mut [V<T>]) {
    for i in 1..x.len() {
        x[i] = c.apply(&x[i - 1], &x[i]);
        c.rounds += 1;
    }
}

fn recursive<T: Clone, F: Fn(&T, &T) -> T>(c: &mut Ctx<F>, x: &mut [V<T>]) {
    let n = x.len();
    if n < 2 {
        return;
    }
    let mut y: Vec<V<T>> = (0..n / 2).map(|i| c.apply(&x[2 * i], &x[2 * i + 1])).collect();
    c.rounds += 1;
    recursive(c, &mut y);
    for (i, yi) in y.iter().enumerate() {
        x[2 * i + 1] = yi.clone();
    }
    for i in 1..=(n - 1) / 2 {
        x[2 * i] = c.apply(&y[i - 1], &x[2 * i]);
    }
    c.rounds += 1;
}

fn updown<T: Clone, F: Fn(&T, &T) -> T>(c: &mut Ctx<F>, x: &mut [V<T>]) {
    let n = x.len();
    let mut k = 1;
    while k < n {
        let kk = k << 1;
        let mut i = kk - 1;
        while i < n {
            x[i] = c.apply(&x[i - k], &x[i]);
            i += kk;
        }
        c.rounds += 1;
        k = kk;
    }
    k >>= 1;
    while k > 1 {
        let kk = k >> 1;
        let mut i = k - 1;
        while i + kk < n {
            x[i + kk] = c.apply(&x[i], &x[i + kk]);
            i += k;
        }
        c.rounds += 1;
        k = kk;
    }
}

fn hillis_steele<T: Clone, F: Fn(&T, &T) -> T>(c: &mut Ctx<F>, x: &mut [V<T>]) {
    let n = x.len();
    let mut k = 1;
    while k < n {
        let prev = x.to_vec();
        for i in k..n {
            x[i] = c.apply(&prev[i - k], &prev[i]);
        }
        c.rounds += 1;
        k <<= 1;
    }
}

fn blocked<T: Clone, F: Fn(&T, &T) -> T>(c: &mut Ctx<F>, x: &mut [V<T>], p: usize) {
    let n = x.len();
    if p == 1 {
        return sequential(c, x);
    }
    let bounds: Vec<usize> = (0..=p).map(|i| i * n / p).collect();
    let maxb = bounds.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0) as u64;

    let mut sums: Vec<V<T>> = bounds
        .windows(2)
        .map(|w| {
            let mut acc = x[w[0]].clone();
            for v in &x[w[0] + 1..w[1]] {
                acc = c.apply(&acc, v);
            }
            acc
        })
        .collect();
    c.rounds += maxb - 1;

    hillis_steele(c, &mut sums);

    for b in 1..p {
        let s = bounds[b];
        x[s] = c.apply(&sums[b - 1], &x[s]);
    }
    c.rounds += 1;
    for w in bounds.windows(2) {
        for i in w[0] + 1..w[1] {
            x[i] = c.apply(&x[i - 1], &x[i]);
        }
    }
    c.rounds += maxb - 1;
}

fn tradeoff<T: Clone, F: Fn(&T, &T) -> T>(c: &mut Ctx<F>, x: &mut [V<T>], p: usize) {
    let b = x.len() / (p + 1);
    let last = |i: usize| (i + 1) * b - 1;
    for blk in 0..p {
        for i in blk * b + 1..(blk + 1) * b {
            x[i] = c.apply(&x[i - 1], &x[i]);
        }
    }
    c.rounds += b as u64 - 1;
    for blk in 1..p {
        x[last(blk)] = c.apply(&x[last(blk - 1)], &x[last(blk)]);
    }
    c.rounds += p as u64 - 1;
    for blk in 1..p {
        for i in blk * b..last(blk) {
            x[i] = c.apply(&x[last(blk - 1)], &x[i]);
        }
    }
    let s = p * b;
    x[s] = c.apply(&x[last(p - 1)], &x[s]);
    for i in s + 1..s + b {
        x[i] = c.apply(&x[i - 1], &x[i]);
    }
    c.rounds += b as u64;
}
