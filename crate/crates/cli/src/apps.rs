//! Random-instance driver for the distributed kernels.

use clap::{Args, ValueEnum};
use parwb::distapps::{
    bfs_levelwise, bfs_seq, counting_sort, counting_sort_seq, dist_quicksort, matvec_colwise, matvec_rowwise,
    matvec_seq, stencil_iterate, stencil_seq, summa, AppEnv, Boundary, HaloScheme,
};
use parwb::netsim::{CostModel, SimError, SimTrace};
use parwb::Matrix;
use rand::Rng;

use crate::commands::{non_empty, rng};
use crate::{CliError, Csv};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Kernel {
    /// `n×n` matrix-vector product, row blocks.
    MatvecRow,
    /// `n×n` matrix-vector product, column blocks.
    MatvecCol,
    /// `n×n` matrix product on a `√p×√p` grid.
    Summa,
    /// `n` keys in total.
    Quicksort,
    /// `n` keys in total from `[0, range)`.
    CountingSort,
    /// `n×n` grid with reflecting boundary.
    Stencil,
    /// `n` vertices and `2n` random undirected edges, source 0.
    Bfs,
}

/// Runs a distributed kernel on seeded random instances.
#[derive(Debug, Args)]
#[command(after_help = "CSV columns: kernel,n,p,total_time,collectives,ok (with --speedup: ,speedup)")]
pub struct AppsArgs {
    #[arg(long, value_enum)]
    kernel: Kernel,
    #[arg(long, value_delimiter = ',', default_value = "16")]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1,4")]
    p: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Simulated time per local operation.
    #[arg(long = "op-time", default_value_t = 1.0)]
    op_time: f64,
    /// Repetitions; repetition `r` uses seed `seed + r`.
    #[arg(long, default_value_t = 1)]
    reps: u64,
    /// Key range of counting sort.
    #[arg(long, default_value_t = 16)]
    range: usize,
    /// Sweeps of the stencil.
    #[arg(long, default_value_t = 10)]
    iters: usize,
    /// Adds `speedup = T(1)/T(p)` from a rerun with one process.
    #[arg(long)]
    speedup: bool,
}

enum Instance {
    Linear(Matrix<i64>, Vec<i64>),
    Product(Matrix<i64>, Matrix<i64>),
    Keys(Vec<i64>),
    Grid(Matrix<f64>),
    Graph(Vec<(usize, usize)>),
}

fn instance(kernel: Kernel, n: usize, range: usize, seed: u64) -> Instance {
    let mut r = rng(seed);
    let mat = |r: &mut rand_chacha::ChaCha8Rng| Matrix::from_fn(n, n, |_, _| r.gen_range(-9..=9i64));
    match kernel {
        Kernel::MatvecRow | Kernel::MatvecCol => {
            let a = mat(&mut r);
            Instance::Linear(a, (0..n).map(|_| r.gen_range(-9..=9)).collect())
        }
        Kernel::Summa => Instance::Product(mat(&mut r), mat(&mut r)),
        Kernel::Quicksort => Instance::Keys((0..n).map(|_| r.gen_range(-1000..=1000)).collect()),
        Kernel::CountingSort => Instance::Keys((0..n).map(|_| r.gen_range(0..range.max(1) as i64)).collect()),
        Kernel::Stencil => Instance::Grid(Matrix::from_fn(n, n, |_, _| r.gen_range(-10.0..10.0))),
        Kernel::Bfs => {
            Instance::Graph((0..2 * n).map(|_| (r.gen_range(0..n.max(1)), r.gen_range(0..n.max(1)))).collect())
        }
    }
}

/// Key blocks `[i·n/p, (i+1)·n/p)`.
fn spread(keys: &[i64], p: usize) -> Vec<Vec<i64>> {
    let n = keys.len();
    (0..p).map(|i| keys[i * n / p..(i + 1) * n / p].to_vec()).collect()
}

fn execute(
    kernel: Kernel,
    inst: &Instance,
    a: &AppsArgs,
    n: usize,
    env: &AppEnv,
) -> Result<(SimTrace, bool), SimError> {
    let p = env.p();
    Ok(match (kernel, inst) {
        (Kernel::MatvecRow, Instance::Linear(m, x)) => {
            let run = matvec_rowwise(env, m, x)?;
            (run.trace, run.output == matvec_seq(m, x))
        }
        (Kernel::MatvecCol, Instance::Linear(m, x)) => {
            let run = matvec_colwise(env, m, x)?;
            (run.trace, run.output == matvec_seq(m, x))
        }
        (Kernel::Summa, Instance::Product(x, y)) => {
            let run = summa(env, x, y)?;
            (run.trace, run.output == x.mul_naive(y))
        }
        (Kernel::Quicksort, Instance::Keys(k)) => {
            let run = dist_quicksort(env, &spread(k, p))?;
            let mut want = k.clone();
            want.sort_unstable();
            (run.trace, run.output.blocks.concat() == want)
        }
        (Kernel::CountingSort, Instance::Keys(k)) => {
            let locals = spread(k, p);
            let run = counting_sort(env, &locals, a.range)?;
            (run.trace, run.output.concat() == counting_sort_seq(&locals))
        }
        (Kernel::Stencil, Instance::Grid(u)) => {
            let run = stencil_iterate(env, u, a.iters, Boundary::Reflecting, None, HaloScheme::SendRecv)?;
            (run.trace, run.output == stencil_seq(u, a.iters, Boundary::Reflecting, None))
        }
        (Kernel::Bfs, Instance::Graph(edges)) => {
            let run = bfs_levelwise(env, n, edges, 0)?;
            (run.trace, run.output == bfs_seq(n, edges, 0)?)
        }
        _ => unreachable!("instance built for its kernel"),
    })
}

pub fn run(a: &AppsArgs, seed: u64) -> Result<Csv, CliError> {
    non_empty("n", &a.n)?;
    non_empty("p", &a.p)?;
    if a.reps < 1 {
        return Err(CliError::Args("--reps must be at least 1".into()));
    }
    if !(a.op_time >= 0.0 && a.op_time.is_finite()) {
        return Err(CliError::Args("--op-time must be finite and non-negative".into()));
    }
    let model = CostModel::new(a.alpha, a.beta, parwb::netsim::Switching::Direct, parwb::netsim::Ports::OnePorted)?;
    let env = |p: usize| AppEnv::new(p, model).map(|e| e.with_op_time(a.op_time));
    let name = a.kernel.to_possible_value().expect("named").get_name().to_string();
    let header =
        if a.speedup { "kernel,n,p,total_time,collectives,ok,speedup" } else { "kernel,n,p,total_time,collectives,ok" };
    let mut csv = Csv::new(header);
    for rep in 0..a.reps {
        for &n in &a.n {
            let inst = instance(a.kernel, n, a.range, seed.wrapping_add(rep));
            let t1 = if a.speedup { Some(execute(a.kernel, &inst, a, n, &env(1)?)?.0.total_time) } else { None };
            for &p in &a.p {
                let (trace, ok) = execute(a.kernel, &inst, a, n, &env(p)?)?;
                let mut row = vec![
                    name.clone(),
                    n.to_string(),
                    p.to_string(),
                    trace.total_time.to_string(),
                    trace.collective_total().to_string(),
                    ok.to_string(),
                ];
                if let Some(t1) = t1 {
                    row.push((t1 / trace.total_time).to_string());
                }
                csv.row(&row);
            }
        }
    }
    Ok(csv)
}
