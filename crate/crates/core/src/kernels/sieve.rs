//! Sieve of Eratosthenes with scan-based compaction.

use super::scan::{scan, ScanMode, ScanVariant};
use super::InstrumentedRun;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sieve {
    /// Ascending primes below `n`.
    pub primes: Vec<u64>,
    /// Individual cross-out writes.
    pub cross_outs: u64,
    pub run: InstrumentedRun,
}

/// Crossing out for prime `i` starts at `i²`; the outer loop runs while
/// `i·i < n`. Each prime's cross-out loop is one round of independent writes.
pub fn prime_sieve(n: u64) -> Sieve {
    if n < 3 {
        return Sieve { primes: Vec::new(), cross_outs: 0, run: InstrumentedRun::default() };
    }
    let len = n as usize;
    let mut mark = vec![1u64; len];
    mark[0] = 0;
    mark[1] = 0;
    let mut cross_outs = 0;
    let mut rounds = 0;
    let mut i = 2usize;
    while i * i < len {
        if mark[i] == 1 {
            for j in (i * i..len).step_by(i) {
                mark[j] = 0;
                cross_outs += 1;
            }
            rounds += 1;
        }
        i += 1;
    }
    let (pos, run) = scan(ScanVariant::UpDown, &mark, |x, y| x + y, ScanMode::Exclusive(0)).expect("n >= 3");
    let count = (pos[len - 1] + mark[len - 1]) as usize;
    let mut primes = vec![0u64; count];
    for (k, &m) in mark.iter().enumerate() {
        if m == 1 {
            primes[pos[k] as usize] = k as u64;
        }
    }
    let crossing = InstrumentedRun { ops: cross_outs, depth: 1, rounds };
    let scatter = InstrumentedRun { ops: 0, depth: 0, rounds: 1 };
    Sieve { primes, cross_outs, run: crossing.then(run).then(scatter) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small() {
        assert_eq!(prime_sieve(10).primes, [2, 3, 5, 7]);
        assert!(prime_sieve(2).primes.is_empty());
        assert!(prime_sieve(0).primes.is_empty());
        assert_eq!(prime_sieve(3).primes, [2]);
        assert_eq!(prime_sieve(5).primes, [2, 3]);
    }

    #[test]
    fn count_below_1000() {
        assert_eq!(prime_sieve(1000).primes.len(), 168);
    }
}
