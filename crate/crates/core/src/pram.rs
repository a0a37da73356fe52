//! Lock-step PRAM simulator with per-step conflict checking.
//!
//! A program is a list of steps. Each step is a closure that performs the
//! reads and writes of every processor through a [`StepCtx`]; reads see the
//! memory as it was before the step and writes are committed together after
//! the step has been checked against the variant's concurrency rules.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Erew,
    Crew,
    CrcwCommon,
    CrcwArbitrary,
    CrcwPriority,
}

impl Variant {
    pub const ALL: [Variant; 5] =
        [Variant::Erew, Variant::Crew, Variant::CrcwCommon, Variant::CrcwArbitrary, Variant::CrcwPriority];

    /// EREW < CREW < CRCW_*; the CRCW variants share one level.
    pub fn permissiveness(self) -> u8 {
        match self {
            Variant::Erew => 0,
            Variant::Crew => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Erew => "EREW",
            Variant::Crew => "CREW",
            Variant::CrcwCommon => "CRCW_Common",
            Variant::CrcwArbitrary => "CRCW_Arbitrary",
            Variant::CrcwPriority => "CRCW_Priority",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        let key = s.to_ascii_lowercase().replace(['-', '_'], "");
        Some(match key.as_str() {
            "erew" => Variant::Erew,
            "crew" => Variant::Crew,
            "crcwcommon" | "common" => Variant::CrcwCommon,
            "crcwarbitrary" | "arbitrary" => Variant::CrcwArbitrary,
            "crcwpriority" | "priority" => Variant::CrcwPriority,
            _ => return None,
        })
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConflictKind {
    /// A cell read by one processor and written by another in the same step.
    RwMix,
    ConcurrentReadUnderErew,
    ConcurrentWriteUnderCrew,
    UnequalCommonWrites,
}

impl fmt::Display for ConflictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConflictKind::RwMix => "RW-mix",
            ConflictKind::ConcurrentReadUnderErew => "concurrent-read-under-EREW",
            ConflictKind::ConcurrentWriteUnderCrew => "concurrent-write-under-<=CREW",
            ConflictKind::UnequalCommonWrites => "unequal-common-writes",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PramError {
    #[error("conflict violation in step {step} at cell {cell}: {kind}")]
    ConflictViolation { step: usize, cell: usize, kind: ConflictKind },
    #[error("processor {proc} accessed cell {cell} outside memory in step {step}")]
    OutOfBounds { step: usize, proc: usize, cell: usize },
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessKind {
    Read,
    Write,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Access {
    pub proc: usize,
    pub cell: usize,
    pub kind: AccessKind,
    /// Present for writes.
    pub value: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PramStepTrace {
    pub step_index: usize,
    pub accesses: Vec<Access>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PramStats {
    pub steps: usize,
    /// Processor-steps of processors that accessed memory.
    pub ops: usize,
    pub max_procs: usize,
}

/// Access recorder handed to a step closure.
pub struct StepCtx<'m> {
    mem: &'m [i64],
    accesses: Vec<Access>,
}

impl StepCtx<'_> {
    /// Pre-step value of `cell`; out-of-range reads yield 0 and fail the step.
    pub fn read(&mut self, proc: usize, cell: usize) -> i64 {
        self.accesses.push(Access { proc, cell, kind: AccessKind::Read, value: None });
        self.mem.get(cell).copied().unwrap_or(0)
    }

    pub fn write(&mut self, proc: usize, cell: usize, value: i64) {
        self.accesses.push(Access { proc, cell, kind: AccessKind::Write, value: Some(value) });
    }
}

pub type Step = Box<dyn Fn(&mut StepCtx<'_>)>;

#[derive(Default)]
pub struct Program {
    steps: Vec<Step>,
}

impl Program {
    pub fn new() -> Self {
        Program::default()
    }

    pub fn step(mut self, f: impl Fn(&mut StepCtx<'_>) + 'static) -> Self {
        self.steps.push(Box::new(f));
        self
    }

    pub fn push(&mut self, f: impl Fn(&mut StepCtx<'_>) + 'static) {
        self.steps.push(Box::new(f));
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PramOutcome {
    pub memory: Vec<i64>,
    pub stats: PramStats,
    /// Filled only by [`pram_run_traced`].
    pub trace: Vec<PramStepTrace>,
}

pub fn pram_run(program: &Program, variant: Variant, memory: Vec<i64>) -> Result<PramOutcome, PramError> {
    run(program, variant, memory, false)
}

pub fn pram_run_traced(program: &Program, variant: Variant, memory: Vec<i64>) -> Result<PramOutcome, PramError> {
    run(program, variant, memory, true)
}

#[derive(Default)]
struct CellUse {
    readers: BTreeSet<usize>,
    /// proc -> last value written by it in this step
    writers: BTreeMap<usize, i64>,
}

fn run(program: &Program, variant: Variant, mut memory: Vec<i64>, keep: bool) -> Result<PramOutcome, PramError> {
    let mut stats = PramStats::default();
    let mut trace = Vec::new();
    for (step, f) in program.steps.iter().enumerate() {
        let mut ctx = StepCtx { mem: &memory, accesses: Vec::new() };
        f(&mut ctx);
        let accesses = ctx.accesses;

        let mut cells: BTreeMap<usize, CellUse> = BTreeMap::new();
        let mut active = BTreeSet::new();
        for a in &accesses {
            if a.cell >= memory.len() {
                return Err(PramError::OutOfBounds { step, proc: a.proc, cell: a.cell });
            }
            active.insert(a.proc);
            let u = cells.entry(a.cell).or_default();
            match a.kind {
                AccessKind::Read => {
                    u.readers.insert(a.proc);
                }
                AccessKind::Write => {
                    u.writers.insert(a.proc, a.value.unwrap_or(0));
                }
            }
        }

        let mut commits = Vec::new();
        for (&cell, u) in &cells {
            let conflict = |kind| PramError::ConflictViolation { step, cell, kind };
            let mixed = u.readers.iter().any(|r| u.writers.keys().any(|w| w != r));
            if mixed {
                return Err(conflict(ConflictKind::RwMix));
            }
            if variant == Variant::Erew && u.readers.len() > 1 {
                return Err(conflict(ConflictKind::ConcurrentReadUnderErew));
            }
            if u.writers.len() > 1 {
                match variant {
                    Variant::Erew | Variant::Crew => return Err(conflict(ConflictKind::ConcurrentWriteUnderCrew)),
                    Variant::CrcwCommon => {
                        let mut vals = u.writers.values();
                        let first = vals.next().copied();
                        if vals.any(|v| Some(*v) != first) {
                            return Err(conflict(ConflictKind::UnequalCommonWrites));
                        }
                    }
                    Variant::CrcwArbitrary | Variant::CrcwPriority => {}
                }
            }
            // lowest proc id wins; BTreeMap iterates in ascending order
            if let Some((_, &v)) = u.writers.iter().next() {
                commits.push((cell, v));
            }
        }
        for (cell, v) in commits {
            memory[cell] = v;
        }

        stats.steps += 1;
        stats.ops += active.len();
        stats.max_procs = stats.max_procs.max(active.len());
        if keep {
            trace.push(PramStepTrace { step_index: step, accesses });
        }
    }
    Ok(PramOutcome { memory, stats, trace })
}

fn nonempty(a: &[i64]) -> Result<(), PramError> {
    if a.is_empty() {
        return Err(PramError::Domain("empty array".into()));
    }
    Ok(())
}

/// Constant-time maximum with n² processors.
///
/// Layout: `a` in `[0,n)`, flags in `[n,2n)`, result at `2n`.
pub fn fastmax(a: &[i64], variant: Variant) -> Result<(i64, PramStats), PramError> {
    nonempty(a)?;
    let n = a.len();
    let prog = Program::new()
        .step(move |c| {
            for i in 0..n {
                c.write(i, n + i, 1);
            }
        })
        .step(move |c| {
            for i in 0..n {
                for j in 0..n {
                    let proc = i * n + j;
                    let (x, y) = (c.read(proc, i), c.read(proc, j));
                    if x < y {
                        c.write(proc, n + i, 0);
                    }
                }
            }
        })
        .step(move |c| {
            for i in 0..n {
                if c.read(i, n + i) == 1 {
                    let v = c.read(i, i);
                    c.write(i, 2 * n, v);
                }
            }
        });
    let mut mem = a.to_vec();
    mem.resize(2 * n + 1, 0);
    let out = pram_run(&prog, variant, mem)?;
    Ok((out.memory[2 * n], out.stats))
}

/// Logarithmic-time maximum by repeated halving of the active prefix.
pub fn logmax(a: &[i64], variant: Variant) -> Result<(i64, PramStats), PramError> {
    nonempty(a)?;
    let mut prog = Program::new();
    let mut nn = a.len();
    while nn > 1 {
        let k = (nn + 1) >> 1;
        let len = nn;
        prog.push(move |c| {
            for i in 0..k {
                if i + k < len {
                    let (x, y) = (c.read(i, i), c.read(i, i + k));
                    c.write(i, i, x.max(y));
                }
            }
        });
        nn = k;
    }
    let out = pram_run(&prog, variant, a.to_vec())?;
    Ok((out.memory[0], out.stats))
}

/// Per-processor instruction of a planned step.
#[derive(Debug, Clone, Copy)]
enum Instr {
    /// `dst = max(dst, src)`
    Max { dst: usize, src: usize },
    /// `dst = 1`
    Set { dst: usize },
    /// `if m[x] < m[y] { flag = 0 }`
    Beaten { x: usize, y: usize, flag: usize },
    /// `if flag == 1 { dst = m[src] }`
    Select { flag: usize, src: usize, dst: usize },
}

fn exec(c: &mut StepCtx<'_>, proc: usize, ins: Instr) {
    match ins {
        Instr::Max { dst, src } => {
            let (x, y) = (c.read(proc, dst), c.read(proc, src));
            c.write(proc, dst, x.max(y));
        }
        Instr::Set { dst } => c.write(proc, dst, 1),
        Instr::Beaten { x, y, flag } => {
            if c.read(proc, x) < c.read(proc, y) {
                c.write(proc, flag, 0);
            }
        }
        Instr::Select { flag, src, dst } => {
            if c.read(proc, flag) == 1 {
                let v = c.read(proc, src);
                c.write(proc, dst, v);
            }
        }
    }
}

type Plan = Vec<Vec<Instr>>;

fn merge_plans(into: &mut Plan, other: Plan) {
    for (i, step) in other.into_iter().enumerate() {
        if i == into.len() {
            into.push(step);
        } else {
            into[i].extend(step);
        }
    }
}

/// Plans the maximum of `cells`; returns the result cell. `next` is the bump
/// pointer for scratch cells.
fn plan_max(cells: &[usize], next: &mut usize) -> (usize, Plan) {
    let len = cells.len();
    if len <= 4 {
        let plan = cells[1..].iter().map(|&src| vec![Instr::Max { dst: cells[0], src }]).collect();
        return (cells[0], plan);
    }
    let s = (len as f64).sqrt().ceil() as usize;
    let mut plan = Plan::new();
    let mut leaders = Vec::new();
    for group in cells.chunks(s) {
        let (r, p) = plan_max(group, next);
        leaders.push(r);
        merge_plans(&mut plan, p);
    }
    let k = leaders.len();
    let flags = *next;
    let out = flags + k;
    *next = out + 1;
    let mut fm: Plan = vec![vec![], vec![], vec![]];
    for i in 0..k {
        fm[0].push(Instr::Set { dst: flags + i });
        for j in 0..k {
            fm[1].push(Instr::Beaten { x: leaders[i], y: leaders[j], flag: flags + i });
        }
        fm[2].push(Instr::Select { flag: flags + i, src: leaders[i], dst: out });
    }
    plan.extend(fm);
    (out, plan)
}

/// `⌈log₂ log₂ n⌉` for n ≥ 4.
pub fn loglog_ceil(n: usize) -> usize {
    let l = crate::util::ceil_log2(n);
    crate::util::ceil_log2(l).max(1)
}

/// Doubly-logarithmic maximum: sequential reduction of blocks of size
/// `⌈log₂log₂ n⌉`, then recursive √-splitting with [`fastmax`]-style
/// combination of the group maxima. Inputs shorter than 4 use [`logmax`].
pub fn loglogmax(a: &[i64], variant: Variant) -> Result<(i64, PramStats), PramError> {
    nonempty(a)?;
    let n = a.len();
    if n < 4 {
        return logmax(a, variant);
    }
    let g = loglog_ceil(n);
    let mut plan = Plan::new();
    let mut leaders = Vec::new();
    for start in (0..n).step_by(g) {
        let block: Vec<usize> = (start..(start + g).min(n)).collect();
        leaders.push(start);
        let p = block[1..].iter().map(|&src| vec![Instr::Max { dst: start, src }]).collect();
        merge_plans(&mut plan, p);
    }
    let mut next = n;
    let (res, rest) = plan_max(&leaders, &mut next);
    plan.extend(rest);

    let mut prog = Program::new();
    for step in plan {
        prog.push(move |c| {
            for (proc, &ins) in step.iter().enumerate() {
                exec(c, proc, ins);
            }
        });
    }
    let mut mem = a.to_vec();
    mem.resize(next, 0);
    let out = pram_run(&prog, variant, mem)?;
    Ok((out.memory[res], out.stats))
}

/// `C = A·B` in `l` multiply-add rounds with `m·n` processors.
pub fn pram_matmul(a: &Matrix<i64>, b: &Matrix<i64>, variant: Variant) -> Result<(Matrix<i64>, PramStats), PramError> {
    if a.cols() != b.rows() {
        return Err(PramError::Domain(format!(
            "dimension mismatch: {}x{} times {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let (m, l, n) = (a.rows(), a.cols(), b.cols());
    let (ab, bb, cb) = (0, m * l, m * l + l * n);
    let mut prog = Program::new();
    for k in 0..l {
        prog.push(move |c| {
            for i in 0..m {
                for j in 0..n {
                    let proc = i * n + j;
                    let x = c.read(proc, ab + i * l + k);
                    let y = c.read(proc, bb + k * n + j);
                    let acc = if k == 0 { 0 } else { c.read(proc, cb + i * n + j) };
                    c.write(proc, cb + i * n + j, acc + x * y);
                }
            }
        });
    }
    let mut mem = Vec::with_capacity(cb + m * n);
    mem.extend_from_slice(a.as_slice());
    mem.extend_from_slice(b.as_slice());
    mem.resize(cb + m * n, 0);
    let out = pram_run(&prog, variant, mem)?;
    let c = Matrix::from_vec(m, n, out.memory[cb..].to_vec()).expect("shape");
    Ok((c, out.stats))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListRanking {
    pub dist: Vec<i64>,
    pub sums: Vec<i64>,
    pub rounds: usize,
    pub stats: PramStats,
}

/// Checks that `next` describes disjoint lists ending in self-loops.
pub fn validate_lists(next: &[usize]) -> Result<(), PramError> {
    let n = next.len();
    let mut pred = vec![0usize; n];
    for (i, &j) in next.iter().enumerate() {
        if j >= n {
            return Err(PramError::Domain(format!("next[{i}]={j} out of range")));
        }
        if j != i {
            pred[j] += 1;
            if pred[j] > 1 {
                return Err(PramError::Domain(format!("index {j} has two predecessors")));
            }
        }
    }
    let mut seen = vec![false; n];
    for h in (0..n).filter(|&h| pred[h] == 0) {
        let mut i = h;
        loop {
            seen[i] = true;
            if next[i] == i {
                break;
            }
            i = next[i];
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(PramError::Domain(format!("index {i} lies on a cycle")));
    }
    Ok(())
}

/// Pointer-jumping list ranking. `sums[i]` folds `values` from `i` to its
/// tail in list order with `op`.
pub fn wyllie_list_rank(
    next: &[usize],
    values: &[i64],
    op: fn(i64, i64) -> i64,
    variant: Variant,
) -> Result<ListRanking, PramError> {
    let n = next.len();
    if values.len() != n {
        return Err(PramError::Domain("next and values differ in length".into()));
    }
    validate_lists(next)?;
    // next | dist | sum | jump flag | next' | dist' | sum'
    let (nx, ds, sm, tj, tn, td, ts) = (0, n, 2 * n, 3 * n, 4 * n, 5 * n, 6 * n);
    let rounds = crate::util::ceil_log2(n);
    let mut prog = Program::new();
    prog.push(move |c| {
        for i in 0..n {
            let j = c.read(i, nx + i);
            c.write(i, ds + i, i64::from(j as usize != i));
        }
    });
    for _ in 0..rounds {
        prog.push(move |c| {
            for i in 0..n {
                let j = c.read(i, nx + i) as usize;
                if j == i {
                    continue;
                }
                let k = c.read(i, nx + j) as usize;
                if k == j {
                    c.write(i, tj + i, 0);
                    continue;
                }
                let d = c.read(i, ds + i) + c.read(i, ds + j);
                let s = op(c.read(i, sm + i), c.read(i, sm + j));
                c.write(i, tj + i, 1);
                c.write(i, tn + i, k as i64);
                c.write(i, td + i, d);
                c.write(i, ts + i, s);
            }
        });
        prog.push(move |c| {
            for i in 0..n {
                // tails never set the flag; their temp cells stay 0
                if c.read(i, tj + i) == 1 {
                    let (k, d, s) = (c.read(i, tn + i), c.read(i, td + i), c.read(i, ts + i));
                    c.write(i, nx + i, k);
                    c.write(i, ds + i, d);
                    c.write(i, sm + i, s);
                }
            }
        });
    }
    prog.push(move |c| {
        for i in 0..n {
            let t = c.read(i, nx + i) as usize;
            if t != i {
                let s = op(c.read(i, sm + i), c.read(i, sm + t));
                c.write(i, sm + i, s);
            }
        }
    });
    let mut mem = vec![0i64; 7 * n];
    for i in 0..n {
        mem[nx + i] = next[i] as i64;
        mem[sm + i] = values[i];
    }
    let out = pram_run(&prog, variant, mem)?;
    Ok(ListRanking {
        dist: out.memory[ds..ds + n].to_vec(),
        sums: out.memory[sm..sm + n].to_vec(),
        rounds,
        stats: out.stats,
    })
}
