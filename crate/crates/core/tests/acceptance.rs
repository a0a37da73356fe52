//! Acceptance gate: one PASS/FAIL line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use parwb::collectives::{collective_bounds, expected_rounds, measure, Algorithm, CollectiveKind};
use parwb::distapps::{
    bfs_levelwise, bfs_seq, counting_sort, counting_sort_seq, dist_quicksort, matvec_colwise, matvec_rowwise,
    matvec_seq, stencil_iterate, stencil_seq, summa, AppEnv, Boundary, HaloScheme,
};
use parwb::kernels::{bitonic_merge, corank, merge, scan, CorankPair, MergeVariant, ScanMode, ScanVariant};
use parwb::netsim::{
    optimal_packet_size, pipelined_optimum, transfer_cost, CostModel, Payload, Ports, SimError, Switching, Topology,
    TopologyKind, World,
};
use parwb::perfcalc::{
    amdahl, amdahl_limit, iso_efficiency, master_solve, model_time, recurrence_eval, ModelKind, Recurrence, TimeModel,
};
use parwb::pram::{fastmax, loglog_ceil, loglogmax, logmax, PramError, Variant};
use parwb::taskgraph::{greedy_schedule, work_span, TaskDag};
use parwb::util::{ceil_log2, floor_log2};
use parwb::Matrix;

type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {{
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($fmt)+));
        }
    }};
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn pram_max_trio() -> Check {
    let mut r = rng(1);
    for n in 4..=256usize {
        let a: Vec<i64> = (0..n).map(|_| r.gen_range(-1000..1000)).collect();
        let want = *a.iter().max().unwrap();
        let (m, st) = fastmax(&a, Variant::CrcwCommon).map_err(|e| e.to_string())?;
        ensure!(m == want && st.steps == 3, "fastmax n={n}: max {m}, steps {}", st.steps);
        ensure!(
            st.ops >= n * (n - 1) && st.ops <= 2 * n * n + 3 * n,
            "fastmax n={n}: work {} outside [n(n-1), 2n^2+3n]",
            st.ops
        );
        let (m, st) = logmax(&a, Variant::Erew).map_err(|e| e.to_string())?;
        ensure!(m == want && st.ops == n - 1, "logmax n={n}: max {m}, comparisons {}", st.ops);
    }
    let mut sizes: Vec<usize> = (4..=300).collect();
    sizes.extend((9..=16).map(|k| 1usize << k));
    sizes.extend((0..20).map(|_| r.gen_range(300..=65536)));
    for n in sizes {
        let a: Vec<i64> = (0..n).map(|_| r.gen_range(-1_000_000..1_000_000)).collect();
        let (m, st) = loglogmax(&a, Variant::CrcwCommon).map_err(|e| e.to_string())?;
        ensure!(m == *a.iter().max().unwrap(), "loglogmax n={n} wrong maximum");
        ensure!(st.ops <= 8 * n, "loglogmax n={n}: work {} > 8n", st.ops);
        ensure!(st.steps <= 4 * loglog_ceil(n), "loglogmax n={n}: {} rounds", st.steps);
    }
    for seed in 0..100 {
        let mut r = rng(1000 + seed);
        let n = r.gen_range(1..=64);
        let a: Vec<i64> = (0..n).map(|_| r.gen_range(-50..50)).collect();
        let want = *a.iter().max().unwrap();
        let got = [
            fastmax(&a, Variant::CrcwCommon).map_err(|e| e.to_string())?.0,
            logmax(&a, Variant::Erew).map_err(|e| e.to_string())?.0,
            loglogmax(&a, Variant::CrcwCommon).map_err(|e| e.to_string())?.0,
        ];
        ensure!(got.iter().all(|&g| g == want), "seed {seed}: {got:?} vs {want}");
    }
    Ok(())
}

fn conflict_checking() -> Check {
    let mut r = rng(2);
    let mut inputs: Vec<Vec<i64>> = vec![vec![1, 2], vec![2, 1], vec![1, 1, 2], vec![3, 1, 2]];
    for _ in 0..300 {
        let n = r.gen_range(2..=24);
        let a: Vec<i64> = (0..n).map(|_| r.gen_range(0..5)).collect();
        inputs.push(a);
    }
    for a in &inputs {
        ensure!(fastmax(a, Variant::CrcwCommon).is_ok(), "CRCW_Common raised on {a:?}");
    }
    let constant = vec![7; 9];
    ensure!(fastmax(&constant, Variant::CrcwCommon).is_ok(), "CRCW_Common raised on a constant input");
    let mut quiet = Vec::new();
    for a in inputs.iter().filter(|a| a.iter().any(|&x| x != a[0])) {
        match fastmax(a, Variant::Crew) {
            Err(PramError::ConflictViolation { .. }) => {}
            _ => quiet.push(a.clone()),
        }
    }
    ensure!(
        quiet.is_empty(),
        "CREW raised no conflict on {} non-constant inputs, e.g. {:?}",
        quiet.len(),
        quiet.iter().take(3).collect::<Vec<_>>()
    );
    Ok(())
}

fn random_dag(r: &mut ChaCha8Rng) -> TaskDag {
    let n = r.gen_range(1..=40u64);
    let density = r.gen_range(0.02..0.4);
    let tasks: Vec<(u64, u64)> = (0..n).map(|i| (i, r.gen_range(1..=20))).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if r.gen_bool(density) {
                edges.push((u, v));
            }
        }
    }
    TaskDag::new(&tasks, &edges).expect("forward edges only")
}

fn greedy_scheduling() -> Check {
    let mut r = rng(3);
    let mut violations = 0;
    for _ in 0..1000 {
        let dag = random_dag(&mut r);
        let ws = work_span(&dag);
        for p in [1usize, 2, 3, 4, 8] {
            let s = greedy_schedule(&dag, p).map_err(|e| e.to_string())?;
            s.validate(&dag)?;
            if s.makespan > ws.work / p as u64 + ws.span {
                violations += 1;
            }
        }
    }
    ensure!(violations == 0, "{violations} schedules exceed floor(T1/p) + Tinf");
    let mut tasks = vec![(0, 1), (1, 4), (100, 1)];
    let mut edges = vec![(0, 1), (1, 100)];
    for i in 0..27 {
        tasks.push((2 + i, 1));
        edges.extend([(0, 2 + i), (2 + i, 100)]);
    }
    let ws = work_span(&TaskDag::new(&tasks, &edges).map_err(|e| e.to_string())?);
    ensure!((ws.work, ws.span, ws.parallelism) == (33, 6, 5.5), "fork-join example gave {ws:?}");
    Ok(())
}

fn add(x: &i64, y: &i64) -> i64 {
    x + y
}

fn scan_variants(n: usize) -> Vec<ScanVariant> {
    let mut v = vec![ScanVariant::Sequential, ScanVariant::Recursive, ScanVariant::UpDown, ScanVariant::HillisSteele];
    for p in [2, 3, 7] {
        if p <= n {
            v.push(ScanVariant::Blocked(p));
        }
    }
    for p in 1..=15 {
        if n.is_multiple_of(p + 1) {
            v.push(ScanVariant::OptimalTradeoff(p));
        }
    }
    v
}

fn scan_tradeoff() -> Check {
    for n in 2..=512usize {
        let a: Vec<i64> = (0..n as i64).collect();
        for v in scan_variants(n) {
            let (_, run) = scan(v, &a, add, ScanMode::Inclusive).map_err(|e| e.to_string())?;
            let total = run.ops + run.depth;
            ensure!(total >= 2 * n as u64 - 2, "{} n={n}: ops+depth = {total}", v.name());
            if let ScanVariant::OptimalTradeoff(p) = v {
                ensure!(total == 2 * n as u64 - 2, "tradeoff n={n} p={p}: ops+depth = {total}");
            }
        }
    }
    Ok(())
}

fn scan_rounds_and_oracle() -> Check {
    let mut off_range = Vec::new();
    for n in 2..=512usize {
        let a = vec![1i64; n];
        let (_, hs) = scan(ScanVariant::HillisSteele, &a, add, ScanMode::Inclusive).map_err(|e| e.to_string())?;
        ensure!(hs.rounds == ceil_log2(n) as u64, "Hillis-Steele n={n}: {} rounds", hs.rounds);
        let (_, ud) = scan(ScanVariant::UpDown, &a, add, ScanMode::Inclusive).map_err(|e| e.to_string())?;
        let want = 2 * floor_log2(n) as u64;
        if !(want..=want + 1).contains(&ud.rounds) {
            off_range.push((n, ud.rounds, want));
        }
    }
    let mut r = rng(5);
    let concat = |x: &String, y: &String| format!("{x}{y}");
    for case in 0..500 {
        let n = r.gen_range(1..=200usize);
        let words: Vec<String> = (0..n).map(|_| ((b'a' + r.gen_range(0..26)) as char).to_string()).collect();
        let nums: Vec<i64> = (0..n).map(|_| r.gen_range(-100..100)).collect();
        let exclusive = case % 2 == 1;
        let smode = || {
            if exclusive {
                ScanMode::Exclusive(String::new())
            } else {
                ScanMode::Inclusive
            }
        };
        let imode = || {
            if exclusive {
                ScanMode::Exclusive(0)
            } else {
                ScanMode::Inclusive
            }
        };
        let (ws, _) = scan(ScanVariant::Sequential, &words, concat, smode()).map_err(|e| e.to_string())?;
        let (is, _) = scan(ScanVariant::Sequential, &nums, add, imode()).map_err(|e| e.to_string())?;
        for v in scan_variants(n) {
            let (w, _) = scan(v, &words, concat, smode()).map_err(|e| e.to_string())?;
            ensure!(w == ws, "{} on strings, n={n}, case {case}", v.name());
            let (i, _) = scan(v, &nums, add, imode()).map_err(|e| e.to_string())?;
            ensure!(i == is, "{} on integers, n={n}, case {case}", v.name());
        }
    }
    ensure!(
        off_range.is_empty(),
        "up/down rounds outside [2floor(log2 n), +1] at {} sizes, (n, rounds, 2floor(log2 n)) = {:?}",
        off_range.len(),
        off_range
    );
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct Tagged {
    key: u8,
    from_b: bool,
    idx: usize,
}

impl PartialEq for Tagged {
    fn eq(&self, o: &Self) -> bool {
        self.key == o.key
    }
}

impl Eq for Tagged {}

impl PartialOrd for Tagged {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Tagged {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.key.cmp(&o.key)
    }
}

fn corank_and_merge() -> Check {
    let zero_one = |len: usize, zeros: usize| -> Vec<u8> { (0..len).map(|i| u8::from(i >= zeros)).collect() };
    for m in 0..=8 {
        for za in 0..=m {
            let a = zero_one(m, za);
            for n in 0..=8 {
                for zb in 0..=n {
                    let b = zero_one(n, zb);
                    for i in 0..=m + n {
                        let found = corank(i, &a, &b).map_err(|e| e.to_string())?.pair;
                        ensure!(found.satisfies(&a, &b), "co-rank of {i} in {a:?},{b:?} fails the conditions");
                        let all: Vec<usize> =
                            (0..=i).filter(|&j| CorankPair { i, j, k: i - j }.satisfies(&a, &b)).collect();
                        ensure!(all == [found.j], "co-ranks of {i} in {a:?},{b:?}: {all:?}");
                    }
                }
            }
        }
    }
    let mut r = rng(6);
    for case in 0..200 {
        let (m, n, p) = (r.gen_range(0..300usize), r.gen_range(0..300usize), r.gen_range(1..=16usize));
        let mut keys = |len: usize, from_b: bool| -> Vec<Tagged> {
            let mut k: Vec<u8> = (0..len).map(|_| r.gen_range(0..20)).collect();
            k.sort_unstable();
            k.into_iter().enumerate().map(|(idx, key)| Tagged { key, from_b, idx }).collect()
        };
        let (a, b) = (keys(m, false), keys(n, true));
        let out = merge(MergeVariant::Corank(p), &a, &b).map_err(|e| e.to_string())?;
        let avg = (m + n) as f64 / p as f64;
        ensure!(
            out.pieces.iter().all(|&s| (s as f64 - avg).abs() <= 1.0),
            "case {case}: pieces {:?} for average {avg}",
            out.pieces
        );
        for w in out.c.windows(2) {
            let (x, y) = (w[0], w[1]);
            ensure!(x.key <= y.key, "case {case}: output not sorted");
            if x.key == y.key {
                ensure!((x.from_b, x.idx) < (y.from_b, y.idx), "case {case}: unstable order of equal keys");
            }
        }
        ensure!(out.c.len() == m + n, "case {case}: length");
    }
    Ok(())
}

fn bitonic() -> Check {
    let mut r = rng(7);
    for k in 1..=10u32 {
        let n = 1usize << k;
        let mut schedule = None;
        for _ in 0..3 {
            let mut a: Vec<i32> = (0..n / 2).map(|_| r.gen_range(-99..99)).collect();
            let mut b: Vec<i32> = (0..n / 2).map(|_| r.gen_range(-99..99)).collect();
            a.sort_unstable();
            b.sort_unstable();
            let out = bitonic_merge(&a, &b);
            ensure!(out.run.ops == (n / 2 * k as usize) as u64, "n={n}: {} comparators", out.run.ops);
            let mut want = [a, b].concat();
            want.sort_unstable();
            ensure!(out.c == want, "n={n}: wrong output");
            match &schedule {
                None => schedule = Some(out.schedule),
                Some(s) => ensure!(*s == out.schedule, "n={n}: schedule depends on the data"),
            }
        }
    }
    Ok(())
}

fn families() -> Vec<TopologyKind> {
    let mut f = Vec::new();
    for p in 2..=16 {
        f.push(TopologyKind::Ring(p));
        f.push(TopologyKind::FullyConnected(p));
    }
    for d in 1..=4 {
        f.push(TopologyKind::Hypercube(d));
    }
    for x in 1..=16usize {
        for y in 1..=16 / x {
            if x * y >= 2 {
                f.push(TopologyKind::Mesh(vec![x, y]));
                f.push(TopologyKind::Torus(vec![x, y]));
            }
        }
    }
    for dims in [vec![2, 2, 2], vec![2, 2, 4], vec![2, 4, 2], vec![16]] {
        f.push(TopologyKind::Mesh(dims.clone()));
        f.push(TopologyKind::Torus(dims));
    }
    f
}

fn topology_metrics() -> Check {
    let mut compared = 0;
    for kind in families() {
        let t = Topology::new(kind.clone()).map_err(|e| e.to_string())?;
        ensure!(t.diameter() == t.diameter_closed_form(), "{kind}: BFS diameter {}", t.diameter());
        let ex = t.bisection_exhaustive().ok_or(format!("{kind}: no exhaustive bisection"))?;
        if let Some(cf) = t.bisection_closed_form() {
            ensure!(cf == ex, "{kind}: closed form {cf}, exhaustive {ex}");
            compared += 1;
        }
    }
    ensure!(compared > 60, "only {compared} closed forms compared");
    for d in 1..=4u32 {
        let m = Topology::new(TopologyKind::Hypercube(d)).unwrap().metrics().map_err(|e| e.to_string())?;
        let dd = d as usize;
        ensure!((m.diameter, m.max_degree, m.bisection_width) == (dd, dd, 1 << (d - 1)), "hypercube {d}: {m:?}");
    }
    for p in 3..=16 {
        let m = Topology::new(TopologyKind::Ring(p)).unwrap().metrics().map_err(|e| e.to_string())?;
        ensure!((m.diameter, m.max_degree, m.bisection_width) == (p / 2, 2, 2), "ring {p}: {m:?}");
    }
    for p in (2..=16).step_by(2) {
        let m = Topology::new(TopologyKind::FullyConnected(p)).unwrap().metrics().map_err(|e| e.to_string())?;
        ensure!(m.bisection_width == p * p / 4, "full {p}: {m:?}");
    }
    Ok(())
}

fn collectives() -> Check {
    let model = CostModel::default();
    for p in 1..=64 {
        let b = measure(CollectiveKind::Bcast, Algorithm::Binomial, p, 2, model).map_err(|e| e.to_string())?;
        let lb = collective_bounds(p, 1, 1).0 as u64;
        ensure!(b.ok && b.rounds == ceil_log2(p) as u64 && b.rounds == lb, "binomial p={p}: {} rounds", b.rounds);
        let ring = measure(CollectiveKind::Bcast, Algorithm::Ring, p, 2, model).map_err(|e| e.to_string())?;
        ensure!(ring.ok && ring.rounds == p as u64 - 1, "ring p={p}: {} rounds", ring.rounds);
    }
    for p in 1..=16 {
        for kind in CollectiveKind::ALL {
            for &alg in Algorithm::available(kind) {
                for m in [0, 1, 5] {
                    let r = measure(kind, alg, p, m, model).map_err(|e| e.to_string())?;
                    ensure!(r.ok, "{kind}/{} p={p} m={m} differs from its oracle", alg.name());
                    ensure!(
                        r.rounds <= expected_rounds(kind, alg, p),
                        "{kind}/{} p={p}: {} rounds",
                        alg.name(),
                        r.rounds
                    );
                }
            }
        }
    }
    let mut r = rng(9);
    for _ in 0..40 {
        let (p, m) = (r.gen_range(1..=64), r.gen_range(0..200));
        let (alpha, beta) = (r.gen_range(0.0..50.0), r.gen_range(0.0..5.0));
        let b = measure(CollectiveKind::Bcast, Algorithm::Binomial, p, m, CostModel::linear(alpha, beta))
            .map_err(|e| e.to_string())?;
        let bound = ceil_log2(p) as f64 * (alpha + beta * m as f64);
        ensure!(b.total_time <= bound * (1.0 + 1e-12) + 1e-9, "p={p} m={m}: {} > {bound}", b.total_time);
    }
    Ok(())
}

fn pipelined_routing() -> Check {
    let mut r = rng(10);
    for _ in 0..50 {
        let m = r.gen_range(1000..=100_000u64);
        let l = r.gen_range(2..=16usize);
        let alpha = r.gen_range(1.0..100.0);
        let beta = r.gen_range(0.5..5.0);
        let cost = |b: u64| {
            let model = CostModel::new(alpha, beta, Switching::Pipelined(b), Ports::OnePorted).unwrap();
            transfer_cost(&model, m, l)
        };
        let best = (1..=m).map(cost).fold(f64::INFINITY, f64::min);
        let b = optimal_packet_size(m, l, alpha, beta).map_err(|e| e.to_string())?;
        let at = cost(b);
        ensure!(at <= best * 1.01, "m={m} l={l} a={alpha} b={beta}: {at} vs minimum {best}");
        let closed = pipelined_optimum(m, l, alpha, beta);
        ensure!((at - closed).abs() <= 0.02 * closed, "m={m} l={l}: {at} vs closed form {closed}");
    }
    Ok(())
}

fn deadlock_semantics() -> Check {
    let (alpha, beta, m) = (4.0, 0.5, 10usize);
    for p in 2..=8 {
        let world = World::new(p, CostModel::linear(alpha, beta)).unwrap();
        let unsafe_ring = world.run(|pr| async move {
            let c = pr.world();
            let n = c.size();
            pr.send(&c, (c.rank() + 1) % n, 0, Payload::Int(vec![0; m])).await?;
            pr.recv(&c, Some((c.rank() + n - 1) % n), Some(0)).await?;
            Ok(())
        });
        match unsafe_ring.outcome {
            Err(SimError::Deadlock { blocked, edges }) => {
                ensure!(blocked == (0..p).collect::<Vec<_>>(), "p={p}: blocked {blocked:?}");
                let cycle: Vec<(usize, usize)> = (0..p).map(|i| (i, (i + 1) % p)).collect();
                ensure!(edges == cycle, "p={p}: wait-for edges {edges:?}");
            }
            other => return Err(format!("p={p}: unsafe ring ended with {other:?}")),
        }
        let safe = world
            .run(|pr| async move {
                let c = pr.world();
                let n = c.size();
                let (to, from) = ((c.rank() + 1) % n, (c.rank() + n - 1) % n);
                pr.sendrecv(&c, to, 0, Payload::Int(vec![c.rank() as i64; m]), Some(from), Some(0)).await
            })
            .into_result()
            .map_err(|e| format!("p={p}: sendrecv ring failed: {e}"))?;
        ensure!(safe.1.total_time == alpha + beta * m as f64, "p={p}: sendrecv ring took {}", safe.1.total_time);
        ensure!(safe.0.iter().enumerate().all(|(i, got)| got.src == (i + p - 1) % p), "p={p}: wrong senders");
        let buffered = world.clone().with_eager_threshold(m as u64).run(|pr| async move {
            let c = pr.world();
            let n = c.size();
            pr.send(&c, (c.rank() + 1) % n, 0, Payload::Int(vec![0; m])).await?;
            pr.recv(&c, Some((c.rank() + n - 1) % n), Some(0)).await?;
            Ok(())
        });
        ensure!(buffered.outcome.is_ok(), "p={p}: buffered ring failed");
    }
    Ok(())
}

fn random_matrix(r: &mut ChaCha8Rng, m: usize, n: usize) -> Matrix<i64> {
    Matrix::from_fn(m, n, |_, _| r.gen_range(-9..=9))
}

fn distributed_kernels() -> Check {
    let err = |e: SimError| e.to_string();
    for seed in 0..100u64 {
        let mut r = rng(12_000 + seed);
        for p in [1usize, 4] {
            let env = AppEnv::new(p, CostModel::linear(r.gen_range(0.0..5.0), r.gen_range(0.0..1.0))).unwrap();
            let (m, n) = (p * r.gen_range(1..=4), p * r.gen_range(1..=4));
            let a = random_matrix(&mut r, m, n);
            let x: Vec<i64> = (0..n).map(|_| r.gen_range(-9..=9)).collect();
            let want = matvec_seq(&a, &x);
            let row = matvec_rowwise(&env, &a, &x).map_err(err)?;
            ensure!(row.output == want, "seed {seed} p={p}: rowwise matvec");
            ensure!(
                row.trace.collective_count("allgather") == 1 && row.trace.collective_total() == 1,
                "seed {seed}: rowwise collectives"
            );
            let col = matvec_colwise(&env, &a, &x).map_err(err)?;
            ensure!(col.output == want, "seed {seed} p={p}: colwise matvec");
            ensure!(
                col.trace.collective_count("reduce_scatter_block") == 1 && col.trace.collective_total() == 1,
                "seed {seed}: colwise collectives"
            );

            let q = if p == 4 { 2 } else { 1 };
            let (mm, ll, nn) = (q * r.gen_range(1..=3), q * r.gen_range(1..=3), q * r.gen_range(1..=3));
            let (sa, sb) = (random_matrix(&mut r, mm, ll), random_matrix(&mut r, ll, nn));
            let s = summa(&env, &sa, &sb).map_err(err)?;
            ensure!(s.output == sa.mul_naive(&sb), "seed {seed} p={p}: SUMMA");
            ensure!(s.trace.collective_count("bcast") == 2 * q * q, "seed {seed}: SUMMA bcasts");
            let rank0 = s.trace.collectives.iter().filter(|c| c.world_rank == 0).count();
            ensure!(rank0 == 2 * q, "seed {seed}: SUMMA bcasts per rank {rank0}");

            let each = r.gen_range(0..=12);
            let locals: Vec<Vec<i64>> = (0..p).map(|_| (0..each).map(|_| r.gen_range(-50..50)).collect()).collect();
            let qs = dist_quicksort(&env, &locals).map_err(err)?;
            let mut all = locals.concat();
            all.sort_unstable();
            ensure!(qs.output.blocks.concat() == all, "seed {seed} p={p}: quicksort");
            ensure!(qs.output.levels == p.trailing_zeros(), "seed {seed}: quicksort levels");

            let range = r.gen_range(1..=10usize);
            let keys: Vec<Vec<i64>> =
                (0..p).map(|_| (0..r.gen_range(0..=16)).map(|_| r.gen_range(0..range as i64)).collect()).collect();
            let cs = counting_sort(&env, &keys, range).map_err(err)?;
            ensure!(cs.output.concat() == counting_sort_seq(&keys), "seed {seed} p={p}: counting sort");
            ensure!(
                cs.trace.collective_count("allreduce") == 1 && cs.trace.collective_count("exscan") == 1,
                "seed {seed}: counting sort collectives"
            );

            let side = q * r.gen_range(1..=4);
            let u = Matrix::from_fn(side, side, |_, _| r.gen_range(-10.0..10.0));
            let boundary = if seed % 2 == 0 { Boundary::Fixed(r.gen_range(-1.0..1.0)) } else { Boundary::Reflecting };
            let iters = r.gen_range(1..=5);
            let st = stencil_iterate(&env, &u, iters, boundary, None, HaloScheme::SendRecv).map_err(err)?;
            ensure!(st.output == stencil_seq(&u, iters, boundary, None), "seed {seed} p={p}: stencil");

            let nv = p * r.gen_range(1..=16);
            let ne = r.gen_range(0..=2 * nv);
            let edges: Vec<(usize, usize)> = (0..ne).map(|_| (r.gen_range(0..nv), r.gen_range(0..nv))).collect();
            let src = r.gen_range(0..nv);
            let bfs = bfs_levelwise(&env, nv, &edges, src).map_err(err)?;
            let want = bfs_seq(nv, &edges, src).map_err(err)?;
            ensure!(bfs.output == want, "seed {seed} p={p}: BFS");
            let ecc = want.iter().filter(|&&d| d != u64::MAX).max().copied().unwrap_or(0) as usize;
            ensure!(bfs.trace.collective_count("allreduce") == ecc + 1, "seed {seed}: BFS reductions");
        }
    }
    Ok(())
}

fn analytic_curves() -> Check {
    let err = |e: parwb::perfcalc::PerfError| e.to_string();
    let model = TimeModel::new(ModelKind::NOverPPlusP, 1.0).map_err(err)?;
    let times: Vec<f64> = (1..=128).map(|p| model_time(&model, 128, p).unwrap()).collect();
    let best = (1..=128).min_by(|&a, &b| times[a - 1].total_cmp(&times[b - 1])).unwrap();
    ensure!((11..=12).contains(&best), "argmin at p={best}");
    ensure!(times[..best].windows(2).all(|w| w[1] <= w[0]), "not decreasing before the minimum");
    ensure!(times[best - 1..].windows(2).all(|w| w[1] >= w[0]), "not increasing after the minimum");
    let mut prev = 0.0;
    for k in 0..=30 {
        let s = amdahl(0.1, 1u64 << k).map_err(err)?;
        ensure!(s >= prev && s < 10.0, "Amdahl s=0.1 p=2^{k}: {s}");
        prev = s;
    }
    ensure!((prev - 10.0).abs() < 1e-6, "Amdahl asymptote {prev}");
    ensure!(amdahl_limit(0.1).map_err(err)? == 10.0, "Amdahl limit");
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * y.abs().max(1.0);
    for (e, p) in [(0.9, 10u64), (0.5, 4), (0.75, 64), (0.3, 1000)] {
        let iso = |k: ModelKind| iso_efficiency(&TimeModel::new(k, 1.0).unwrap(), e, p).map_err(err);
        let pf = p as f64;
        ensure!(close(iso(ModelKind::NOverPPlus1)?, e * pf / (1.0 - e)), "kind 1 e={e} p={p}");
        ensure!(close(iso(ModelKind::NOverPPlusLogP)?, e * pf * pf.log2() / (1.0 - e)), "kind 2 e={e} p={p}");
        ensure!(close(iso(ModelKind::NOverPPlusP)?, e * pf * pf / (1.0 - e)), "kind 4 e={e} p={p}");
        let n = iso(ModelKind::NOverPPlusLogN)?;
        let target = e * pf / (1.0 - e);
        ensure!(close(n / n.log2(), target), "kind 3 e={e} p={p}: n={n}");
    }
    ensure!(close(iso_efficiency(&TimeModel::new(ModelKind::NOverPPlus1, 1.0).unwrap(), 0.9, 10).unwrap(), 90.0), "90");
    Ok(())
}

/// Growth of the exact recurrence over one factor of `b` against the
/// claimed class, at the largest power of `b` below 2^60.
fn growth_agrees(r: &Recurrence) -> Result<bool, String> {
    let b = r.b as u64;
    let mut n = 1u64;
    while n <= (1u64 << 60) / b / b {
        n *= b;
    }
    let t0 = recurrence_eval(r, 1.0, n).map_err(|e| e.to_string())?;
    let t1 = recurrence_eval(r, 1.0, n * b).map_err(|e| e.to_string())?;
    let class = master_solve(r);
    let (nf, bf) = (n as f64, r.b);
    let ratio = (t1 / t0) / (class.eval(nf * bf) / class.eval(nf));
    Ok((ratio - 1.0).abs() <= 0.01)
}

fn master_solver() -> Check {
    let named = [
        ("n log n", (2.0, 2.0, 1.0, 0.0), 2, 1.0, 1.0),
        ("log n", (1.0, 2.0, 0.0, 0.0), 2, 0.0, 1.0),
        ("n", (1.0, 2.0, 1.0, 0.0), 1, 1.0, 0.0),
        ("n^3", (8.0, 2.0, 2.0, 0.0), 3, 3.0, 0.0),
        ("n^log2(7)", (7.0, 2.0, 2.0, 0.0), 3, 7f64.log2(), 0.0),
    ];
    for (name, (a, b, d, e), case, exp, lp) in named {
        let r = Recurrence::new(a, b, d, e).map_err(|e| e.to_string())?;
        let c = master_solve(&r);
        ensure!(c.case.id() == case && (c.exponent - exp).abs() < 1e-12 && c.log_power == lp, "{name}: {c:?}");
        ensure!(growth_agrees(&r)?, "{name}: growth differs from the recurrence");
    }
    let mut rg = rng(14);
    for draw in 0..50 {
        let b = rg.gen_range(2..=4) as f64;
        let e = rg.gen_range(0..=2) as f64;
        let r = if draw % 3 == 0 {
            let d = rg.gen_range(0..=2) as f64;
            Recurrence::new(b.powf(d), b, d, e)
        } else {
            loop {
                let (a, d) = (rg.gen_range(1.0f64..16.0), rg.gen_range(0.0f64..3.0));
                if (a.ln() / b.ln() - d).abs() >= 0.3 {
                    break Recurrence::new(a, b, d, e);
                }
            }
        }
        .map_err(|e| e.to_string())?;
        ensure!(growth_agrees(&r)?, "draw {draw}: {r:?} classified {:?}", master_solve(&r));
    }
    Ok(())
}

type Criterion = (&'static str, fn() -> Check);

fn main() -> ExitCode {
    let criteria: [Criterion; 14] = [
        ("pram maximum trio", pram_max_trio),
        ("pram conflict checking", conflict_checking),
        ("greedy scheduling bound", greedy_scheduling),
        ("scan work-depth trade-off", scan_tradeoff),
        ("scan rounds and oracle", scan_rounds_and_oracle),
        ("co-rank and balanced merge", corank_and_merge),
        ("bitonic merge network", bitonic),
        ("topology metrics", topology_metrics),
        ("collective algorithms", collectives),
        ("pipelined routing", pipelined_routing),
        ("deadlock semantics", deadlock_semantics),
        ("distributed kernels", distributed_kernels),
        ("analytic curves", analytic_curves),
        ("master solver", master_solver),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = std::time::Instant::now();
        let outcome = match catch_unwind(AssertUnwindSafe(check)) {
            Ok(r) => r,
            Err(p) => Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into())),
        };
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(()) => println!("PASS {:>2} {name} ({secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.2}s): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
