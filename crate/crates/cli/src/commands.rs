//! Subcommands over the shared-memory modules and the collective catalogue.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use parwb::collectives::{measure, Algorithm, CollectiveKind};
use parwb::kernels::{bitonic_merge, merge, parallel_partition, prime_sieve, quicksort, scan};
use parwb::kernels::{InstrumentedRun, MergeVariant, ScanMode, ScanVariant};
use parwb::netsim::CostModel;
use parwb::perfcalc::{model_time, speedup_efficiency, ModelKind, TimeModel};
use parwb::pram::{fastmax, loglogmax, logmax, pram_matmul, wyllie_list_rank, Variant};
use parwb::taskgraph::{greedy_schedule, work_span, TaskDag};
use parwb::Matrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{CliError, Csv};

fn domain(e: impl std::fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn non_empty<T>(name: &str, v: &[T]) -> Result<(), CliError> {
    if v.is_empty() {
        return Err(CliError::Args(format!("--{name} needs at least one value")));
    }
    Ok(())
}

fn model_label(kind: &ModelKind) -> &'static str {
    match kind {
        ModelKind::NOverPPlus1 => "N_over_P_plus_1",
        ModelKind::NOverPPlusLogP => "N_over_P_plus_logP",
        ModelKind::NOverPPlusLogN => "N_over_P_plus_logN",
        ModelKind::NOverPPlusP => "N_over_P_plus_P",
        ModelKind::Custom(_) => "custom",
    }
}

/// Model running times `C·(n/p + t(n,p))` against the sequential time `C·n`.
#[derive(Debug, Args)]
#[command(after_help = "CSV columns: model,n,p,time,speedup,efficiency")]
pub struct AnalyzeArgs {
    /// Problem sizes.
    #[arg(long, value_delimiter = ',', default_value = "128")]
    n: Vec<u64>,
    /// Processor counts; `1..=n` when absent.
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<u64>>,
    /// Leading constant of every model.
    #[arg(long = "C", default_value_t = 1.0)]
    c: f64,
}

pub fn analyze(a: &AnalyzeArgs) -> Result<Csv, CliError> {
    non_empty("n", &a.n)?;
    if let Some(p) = &a.p {
        non_empty("p", p)?;
    }
    let mut csv = Csv::new("model,n,p,time,speedup,efficiency");
    for kind in ModelKind::standard() {
        let label = model_label(&kind);
        let model = TimeModel::new(kind, a.c).map_err(domain)?;
        for &n in &a.n {
            let ps = a.p.clone().unwrap_or_else(|| (1..=n).collect());
            for p in ps {
                let t = model_time(&model, n, p).map_err(domain)?;
                let s = speedup_efficiency(a.c * n as f64, t, p).map_err(domain)?;
                csv.row(&[
                    label.into(),
                    n.to_string(),
                    p.to_string(),
                    t.to_string(),
                    s.speedup.to_string(),
                    s.efficiency.to_string(),
                ]);
            }
        }
    }
    Ok(csv)
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum PramAlgo {
    Fastmax,
    Logmax,
    Loglogmax,
    /// `n×n` matrix product.
    Matmul,
    /// List ranking of a random `n`-element list.
    Wyllie,
}

/// Runs a PRAM program on a random instance under the chosen memory model.
#[derive(Debug, Args)]
#[command(after_help = "CSV columns: algo,n,variant,steps,ops,ok")]
pub struct PramArgs {
    #[arg(long, value_enum)]
    algo: PramAlgo,
    #[arg(long, default_value_t = 64)]
    n: usize,
    /// EREW, CREW, CRCW_Common, CRCW_Arbitrary or CRCW_Priority.
    #[arg(long, default_value = "CRCW_Common", value_parser = parse_variant)]
    variant: Variant,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    Variant::parse(s).ok_or_else(|| format!("unknown PRAM variant {s:?}"))
}

fn random_list(r: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(r);
    let mut next = vec![0; n];
    for w in order.windows(2) {
        next[w[0]] = w[1];
    }
    if let Some(&tail) = order.last() {
        next[tail] = tail;
    }
    next
}

pub fn pram(a: &PramArgs, seed: u64) -> Result<Csv, CliError> {
    let mut r = rng(seed);
    let n = a.n;
    let (stats, ok) = match a.algo {
        PramAlgo::Fastmax | PramAlgo::Logmax | PramAlgo::Loglogmax => {
            if n == 0 {
                return Err(domain("maximum of an empty array"));
            }
            let v: Vec<i64> = (0..n).map(|_| r.gen_range(-1000..=1000)).collect();
            let f = match a.algo {
                PramAlgo::Fastmax => fastmax,
                PramAlgo::Logmax => logmax,
                _ => loglogmax,
            };
            let (m, st) = f(&v, a.variant).map_err(domain)?;
            (st, Some(m) == v.iter().max().copied())
        }
        PramAlgo::Matmul => {
            let x = Matrix::from_fn(n, n, |_, _| r.gen_range(-9..=9));
            let y = Matrix::from_fn(n, n, |_, _| r.gen_range(-9..=9));
            let (c, st) = pram_matmul(&x, &y, a.variant).map_err(domain)?;
            (st, c == x.mul_naive(&y))
        }
        PramAlgo::Wyllie => {
            let next = random_list(&mut r, n);
            let values: Vec<i64> = (0..n).map(|_| r.gen_range(-9..=9)).collect();
            let out = wyllie_list_rank(&next, &values, |x, y| x + y, a.variant).map_err(domain)?;
            let ok = (0..n).all(|i| {
                let (mut j, mut d, mut s) = (i, 0, values[i]);
                while next[j] != j {
                    j = next[j];
                    d += 1;
                    s += values[j];
                }
                out.dist[i] == d && out.sums[i] == s
            });
            (out.stats, ok)
        }
    };
    let algo = a.algo.to_possible_value().expect("named").get_name().to_string();
    let mut csv = Csv::new("algo,n,variant,steps,ops,ok");
    csv.row(&[
        algo,
        n.to_string(),
        a.variant.name().into(),
        stats.steps.to_string(),
        stats.ops.to_string(),
        ok.to_string(),
    ]);
    Ok(csv)
}

/// Work, span and greedy schedules of a task graph read from a file of
/// `task <id> <weight>` and `edge <u> <v>` lines.
#[derive(Debug, Args)]
#[command(after_help = "CSV columns: work,span,parallelism,p,makespan,bound")]
pub struct DagArgs {
    #[arg(long)]
    file: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    p: Vec<usize>,
}

pub fn dag(a: &DagArgs) -> Result<Csv, CliError> {
    non_empty("p", &a.p)?;
    let text = std::fs::read_to_string(&a.file)
        .map_err(|e| CliError::Args(format!("cannot read {}: {e}", a.file.display())))?;
    let g = TaskDag::parse(&text).map_err(domain)?;
    let ws = work_span(&g);
    let mut csv = Csv::new("work,span,parallelism,p,makespan,bound");
    for &p in &a.p {
        let s = greedy_schedule(&g, p).map_err(domain)?;
        s.validate(&g).map_err(domain)?;
        let bound = ws.work / p as u64 + ws.span;
        csv.row(&[
            ws.work.to_string(),
            ws.span.to_string(),
            ws.parallelism.to_string(),
            p.to_string(),
            s.makespan.to_string(),
            bound.to_string(),
        ]);
    }
    Ok(csv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum KernelAlgo {
    ScanSequential,
    ScanRecursive,
    ScanUpdown,
    ScanHillisSteele,
    ScanBlocked,
    ScanTradeoff,
    MergeSequential,
    MergeRank,
    MergeCorank,
    Bitonic,
    Partition,
    Quicksort,
    Sieve,
}

/// Instrumented kernel on a random instance of every `(n, p)` pair.
#[derive(Debug, Args)]
#[command(after_help = "CSV columns: n,p,ops,depth,rounds,ok")]
pub struct KernelsArgs {
    #[arg(long, value_enum)]
    algo: KernelAlgo,
    #[arg(long, value_delimiter = ',', default_value = "1024")]
    n: Vec<usize>,
    /// Block or piece count; ignored by kernels without one.
    #[arg(long, value_delimiter = ',', default_value = "4")]
    p: Vec<usize>,
}

fn sorted_input(r: &mut ChaCha8Rng, len: usize) -> Vec<i64> {
    let mut v: Vec<i64> = (0..len).map(|_| r.gen_range(0..100)).collect();
    v.sort_unstable();
    v
}

fn kernel_once(algo: KernelAlgo, n: usize, p: usize, r: &mut ChaCha8Rng) -> Result<(InstrumentedRun, bool), CliError> {
    use KernelAlgo::*;
    let input: Vec<i64> = (0..n).map(|_| r.gen_range(-1000..=1000)).collect();
    let scan_variant = match algo {
        ScanSequential => Some(ScanVariant::Sequential),
        ScanRecursive => Some(ScanVariant::Recursive),
        ScanUpdown => Some(ScanVariant::UpDown),
        ScanHillisSteele => Some(ScanVariant::HillisSteele),
        ScanBlocked => Some(ScanVariant::Blocked(p)),
        ScanTradeoff => Some(ScanVariant::OptimalTradeoff(p)),
        _ => None,
    };
    if let Some(v) = scan_variant {
        let (out, run) = scan(v, &input, |x: &i64, y: &i64| x + y, ScanMode::Inclusive).map_err(domain)?;
        let want: Vec<i64> = input
            .iter()
            .scan(0, |acc, x| {
                *acc += x;
                Some(*acc)
            })
            .collect();
        return Ok((run, out == want));
    }
    let merged = |a: &[i64], b: &[i64]| {
        let mut c = [a, b].concat();
        c.sort_unstable();
        c
    };
    Ok(match algo {
        MergeSequential | MergeRank | MergeCorank => {
            let (a, b) = (sorted_input(r, n / 2), sorted_input(r, n - n / 2));
            let variant = match algo {
                MergeSequential => MergeVariant::Sequential,
                MergeRank => MergeVariant::RankBlocks(p),
                _ => MergeVariant::Corank(p),
            };
            let out = merge(variant, &a, &b).map_err(domain)?;
            (out.run, out.c == merged(&a, &b))
        }
        Bitonic => {
            let (a, b) = (sorted_input(r, n / 2), sorted_input(r, n - n / 2));
            let out = bitonic_merge(&a, &b);
            (out.run, out.c == merged(&a, &b))
        }
        Partition => {
            let pivot = input.first().copied().unwrap_or(0);
            let out = parallel_partition(&input, &pivot);
            let ok = out.a[..out.lt].iter().all(|&x| x < pivot)
                && out.a[out.lt..out.lt + out.eq].iter().all(|&x| x == pivot)
                && out.a[out.lt + out.eq..].iter().all(|&x| x > pivot)
                && merged(&out.a, &[]) == merged(&input, &[]);
            (out.run, ok)
        }
        Quicksort => {
            let (out, run) = quicksort(&input);
            (run, out == merged(&input, &[]))
        }
        Sieve => {
            let s = prime_sieve(n as u64);
            let want: Vec<u64> =
                (2..n as u64).filter(|&q| (2..).take_while(|d| d * d <= q).all(|d| q % d != 0)).collect();
            (s.run, s.primes == want)
        }
        _ => unreachable!("scans handled above"),
    })
}

pub fn kernels(a: &KernelsArgs, seed: u64) -> Result<Csv, CliError> {
    non_empty("n", &a.n)?;
    non_empty("p", &a.p)?;
    let mut r = rng(seed);
    let mut csv = Csv::new("n,p,ops,depth,rounds,ok");
    for &n in &a.n {
        for &p in &a.p {
            let (run, ok) = kernel_once(a.algo, n, p, &mut r)?;
            csv.row(&[
                n.to_string(),
                p.to_string(),
                run.ops.to_string(),
                run.depth.to_string(),
                run.rounds.to_string(),
                ok.to_string(),
            ]);
        }
    }
    Ok(csv)
}

/// One collective with `m`-element blocks at root 0 on a fully connected
/// machine under the linear cost model.
#[derive(Debug, Args)]
#[command(after_help = "CSV columns: kind,alg,p,m,rounds,total_time,lower_bound")]
pub struct CollArgs {
    /// barrier, bcast, gather, scatter, allgather, alltoall, reduce,
    /// allreduce, reduce_scatter_block, scan or exscan.
    #[arg(long, value_parser = parse_kind)]
    kind: CollectiveKind,
    /// flat, ring, binomial, linear, pairwise or dissemination; the first
    /// algorithm available for the kind when absent.
    #[arg(long, value_parser = parse_alg)]
    alg: Option<Algorithm>,
    #[arg(long, value_delimiter = ',', default_value = "8")]
    p: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
}

fn parse_kind(s: &str) -> Result<CollectiveKind, String> {
    CollectiveKind::parse(s).ok_or_else(|| format!("unknown collective {s:?}"))
}

fn parse_alg(s: &str) -> Result<Algorithm, String> {
    Algorithm::parse(s).ok_or_else(|| format!("unknown algorithm {s:?}"))
}

pub fn coll(a: &CollArgs) -> Result<Csv, CliError> {
    non_empty("p", &a.p)?;
    let alg = a.alg.unwrap_or(Algorithm::available(a.kind)[0]);
    if !Algorithm::available(a.kind).contains(&alg) {
        return Err(CliError::Args(format!("{} has no {} algorithm", a.kind, alg.name())));
    }
    let model = CostModel::new(a.alpha, a.beta, parwb::netsim::Switching::Direct, parwb::netsim::Ports::OnePorted)?;
    let mut csv = Csv::new("kind,alg,p,m,rounds,total_time,lower_bound");
    for &p in &a.p {
        let r = measure(a.kind, alg, p, a.m, model)?;
        if !r.ok {
            return Err(domain(format!("{} with {} ranks differs from its oracle", a.kind, p)));
        }
        csv.row(&[
            a.kind.name().into(),
            alg.name().into(),
            p.to_string(),
            a.m.to_string(),
            r.rounds.to_string(),
            r.total_time.to_string(),
            r.lower_bound.to_string(),
        ]);
    }
    Ok(csv)
}
