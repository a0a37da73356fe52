//! Deterministic single-threaded message-passing engine.
//!
//! Every process is an `async` program driven by a cooperative executor.
//! After any state change the executor restarts polling at world rank 0, so
//! the runnable process with the lowest rank always steps first. When no
//! process can make progress and some are unfinished, the run ends with a
//! deadlock report.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::future::Future;
use std::pin::Pin;
use std::rc::Rc;
use std::task::{Context, Poll, Waker};

use super::comm::{comm_split, CommId, Communicator};
use super::cost::{transfer_cost, CostModel, Switching};
use super::topology::Topology;
use super::SimError;

/// Rank that turns a send or receive into a no-op.
pub const PROC_NULL: usize = usize::MAX;

/// Receive source or tag wildcard.
pub const ANY: Option<usize> = None;
pub const ANY_TAG: Option<i64> = None;

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Empty,
    Int(Vec<i64>),
    Real(Vec<f64>),
}

impl Payload {
    pub fn len(&self) -> usize {
        match self {
            Payload::Empty => 0,
            Payload::Int(v) => v.len(),
            Payload::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Integer contents; `Empty` yields an empty vector.
    pub fn into_ints(self) -> Result<Vec<i64>, SimError> {
        match self {
            Payload::Empty => Ok(Vec::new()),
            Payload::Int(v) => Ok(v),
            Payload::Real(_) => Err(SimError::Domain("expected integer payload".into())),
        }
    }

    /// Real contents; `Empty` yields an empty vector.
    pub fn into_reals(self) -> Result<Vec<f64>, SimError> {
        match self {
            Payload::Empty => Ok(Vec::new()),
            Payload::Real(v) => Ok(v),
            Payload::Int(_) => Err(SimError::Domain("expected real payload".into())),
        }
    }
}

/// Matching context; collective traffic never matches point-to-point traffic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Channel {
    P2p,
    Coll,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Received {
    /// Sender's rank in the communicator.
    pub src: usize,
    pub tag: i64,
    pub units: u64,
    pub payload: Payload,
}

fn fmt_opt<T: fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "any".to_string(), |x| x.to_string())
}

/// Transcript entry. Ranks are world ranks.
#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Send { t: f64, src: usize, dst: usize, tag: i64, m: u64 },
    Recv { t: f64, src: Option<usize>, dst: usize, tag: Option<i64> },
    Match { t: f64, src: usize, dst: usize, tag: i64, m: u64 },
    Deadlock { t: f64, src: usize, dst: Option<usize>, tag: Option<i64>, m: u64 },
    Coll { t: f64, rank: usize, comm: CommId, kind: &'static str },
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Send { t, src, dst, tag, m } => {
                write!(f, "t={t} ev=send src={src} dst={dst} tag={tag} m={m}")
            }
            Event::Recv { t, src, dst, tag } => {
                write!(f, "t={t} ev=recv src={} dst={dst} tag={} m=any", fmt_opt(*src), fmt_opt(*tag))
            }
            Event::Match { t, src, dst, tag, m } => {
                write!(f, "t={t} ev=match src={src} dst={dst} tag={tag} m={m}")
            }
            Event::Deadlock { t, src, dst, tag, m } => {
                write!(f, "t={t} ev=deadlock src={src} dst={} tag={} m={m}", fmt_opt(*dst), fmt_opt(*tag))
            }
            Event::Coll { t, rank, comm, kind } => {
                write!(f, "t={t} ev=coll kind={kind} src={rank} comm={comm}")
            }
        }
    }
}

/// One process's entry into a collective operation.
#[derive(Debug, Clone, PartialEq)]
pub struct CollRecord {
    pub kind: &'static str,
    pub comm: CommId,
    pub world_rank: usize,
    pub comm_rank: usize,
    pub t: f64,
}

/// Handle to a communicator from the point of view of one member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comm {
    info: Rc<Communicator>,
    rank: usize,
}

impl Comm {
    pub fn id(&self) -> CommId {
        self.info.id
    }

    pub fn size(&self) -> usize {
        self.info.size()
    }

    /// The calling process's rank.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn world_rank(&self, rank: usize) -> usize {
        self.info.members[rank]
    }

    pub fn communicator(&self) -> &Communicator {
        &self.info
    }
}

type OpId = u64;

#[derive(Debug, Clone)]
enum Wait {
    Send {
        dst: usize,
        tag: i64,
        units: u64,
    },
    /// `members` lists the communicator for any-source receives.
    Recv {
        src: Option<usize>,
        tag: Option<i64>,
        members: Vec<usize>,
    },
    Split {
        comm: CommId,
        missing: Vec<usize>,
    },
}

struct PendingSend {
    id: OpId,
    src: usize,
    src_rank: usize,
    dst: usize,
    comm: CommId,
    chan: Channel,
    tag: i64,
    units: u64,
    payload: Payload,
    ready: f64,
    hops: u64,
    /// Arrival time of an eagerly delivered message.
    arrival: Option<f64>,
}

struct PendingRecv {
    id: OpId,
    dst: usize,
    src: Option<usize>,
    comm: CommId,
    chan: Channel,
    tag: Option<i64>,
    ready: f64,
    hops: u64,
}

struct Done {
    time: f64,
    hops: u64,
    recv: Option<Received>,
    split: Option<Option<Comm>>,
}

/// `(color, key, clock, hops)` of a rank that reached the split.
type SplitEntry = (Option<i64>, i64, f64, u64);

struct SplitState {
    parent: Rc<Communicator>,
    entries: Vec<Option<SplitEntry>>,
    ops: Vec<OpId>,
}

struct Engine {
    model: CostModel,
    topo: Option<Topology>,
    eager: u64,
    clocks: Vec<f64>,
    hops: Vec<u64>,
    out_free: Vec<Vec<f64>>,
    in_free: Vec<Vec<f64>>,
    sends: Vec<PendingSend>,
    recvs: Vec<PendingRecv>,
    done: HashMap<OpId, Done>,
    next_op: OpId,
    progress: u64,
    waiting: Vec<Option<Wait>>,
    transcript: Vec<Event>,
    splits: BTreeMap<(CommId, u64), SplitState>,
    split_seq: HashMap<(usize, CommId), u64>,
    next_comm: CommId,
    collectives: Vec<CollRecord>,
}

impl Engine {
    fn op(&mut self) -> OpId {
        self.next_op += 1;
        self.next_op
    }

    fn path_len(&self, src: usize, dst: usize) -> usize {
        match (&self.topo, self.model.switching) {
            (_, Switching::Direct) | (None, _) => 1,
            (Some(t), _) => t.hops(src, dst).max(1),
        }
    }

    fn take_port(ports: &mut [f64]) -> usize {
        (0..ports.len()).min_by(|&a, &b| ports[a].total_cmp(&ports[b])).expect("k >= 1")
    }

    fn post_send(&mut self, mut s: PendingSend) {
        self.transcript.push(Event::Send { t: s.ready, src: s.src, dst: s.dst, tag: s.tag, m: s.units });
        if s.units <= self.eager {
            let cost = transfer_cost(&self.model, s.units, self.path_len(s.src, s.dst));
            let port = Self::take_port(&mut self.out_free[s.src]);
            let arrival = s.ready.max(self.out_free[s.src][port]) + cost;
            self.out_free[s.src][port] = arrival;
            s.arrival = Some(arrival);
            let done = Done { time: s.ready, hops: s.hops + 1, recv: None, split: None };
            self.done.insert(s.id, done);
        }
        let hit = self.recvs.iter().position(|r| {
            r.dst == s.dst
                && r.comm == s.comm
                && r.chan == s.chan
                && r.src.is_none_or(|x| x == s.src)
                && r.tag.is_none_or(|t| t == s.tag)
        });
        match hit {
            Some(i) => {
                let r = self.recvs.remove(i);
                self.complete(s, r);
            }
            None => self.sends.push(s),
        }
        self.progress += 1;
    }

    fn post_recv(&mut self, r: PendingRecv) {
        self.transcript.push(Event::Recv { t: r.ready, src: r.src, dst: r.dst, tag: r.tag });
        let hit = self
            .sends
            .iter()
            .enumerate()
            .filter(|(_, s)| {
                s.dst == r.dst
                    && s.comm == r.comm
                    && s.chan == r.chan
                    && r.src.is_none_or(|x| x == s.src)
                    && r.tag.is_none_or(|t| t == s.tag)
            })
            .min_by_key(|&(i, s)| (s.src, i))
            .map(|(i, _)| i);
        match hit {
            Some(i) => {
                let s = self.sends.remove(i);
                self.complete(s, r);
            }
            None => self.recvs.push(r),
        }
        self.progress += 1;
    }

    fn complete(&mut self, s: PendingSend, r: PendingRecv) {
        let round = s.hops.max(r.hops) + 1;
        let end = match s.arrival {
            Some(arrival) => r.ready.max(arrival),
            None => {
                let cost = transfer_cost(&self.model, s.units, self.path_len(s.src, s.dst));
                let op = Self::take_port(&mut self.out_free[s.src]);
                let ip = Self::take_port(&mut self.in_free[s.dst]);
                let start = s.ready.max(r.ready).max(self.out_free[s.src][op]).max(self.in_free[s.dst][ip]);
                let end = start + cost;
                self.out_free[s.src][op] = end;
                self.in_free[s.dst][ip] = end;
                self.done.insert(s.id, Done { time: end, hops: round, recv: None, split: None });
                end
            }
        };
        self.transcript.push(Event::Match { t: end, src: s.src, dst: s.dst, tag: s.tag, m: s.units });
        let recv = Received { src: s.src_rank, tag: s.tag, units: s.units, payload: s.payload };
        self.done.insert(r.id, Done { time: end, hops: round, recv: Some(recv), split: None });
    }

    fn join_split(&mut self, comm: &Comm, world: usize, color: Option<i64>, key: i64) -> OpId {
        let id = self.op();
        let seq = self.split_seq.entry((world, comm.id())).or_insert(0);
        let key_ = (comm.id(), *seq);
        *seq += 1;
        let (clock, hops) = (self.clocks[world], self.hops[world]);
        let state = self.splits.entry(key_).or_insert_with(|| SplitState {
            parent: comm.info.clone(),
            entries: vec![None; comm.size()],
            ops: vec![0; comm.size()],
        });
        state.entries[comm.rank()] = Some((color, key, clock, hops));
        state.ops[comm.rank()] = id;
        if state.entries.iter().all(Option::is_some) {
            let state = self.splits.remove(&key_).expect("present");
            let entries: Vec<_> = state.entries.into_iter().map(|e| e.expect("joined")).collect();
            let colors: Vec<Option<i64>> = entries.iter().map(|e| e.0).collect();
            let keys: Vec<i64> = entries.iter().map(|e| e.1).collect();
            let t = entries.iter().map(|e| e.2).fold(f64::NEG_INFINITY, f64::max);
            let h = entries.iter().map(|e| e.3).max().unwrap_or(0);
            let children = comm_split(&state.parent, &colors, &keys, &mut self.next_comm);
            for (r, &op) in state.ops.iter().enumerate() {
                let mine = children.iter().find_map(|(_, c)| {
                    let w = state.parent.members[r];
                    c.rank_of(w).map(|rank| Comm { info: Rc::new(c.clone()), rank })
                });
                self.done.insert(op, Done { time: t, hops: h, recv: None, split: Some(mine) });
            }
        }
        self.progress += 1;
        id
    }

    fn missing_split_members(&self, comm: CommId, world: usize) -> Vec<usize> {
        let seq = self.split_seq.get(&(world, comm)).copied().unwrap_or(1) - 1;
        match self.splits.get(&(comm, seq)) {
            Some(s) => {
                s.entries.iter().enumerate().filter(|(_, e)| e.is_none()).map(|(r, _)| s.parent.members[r]).collect()
            }
            None => Vec::new(),
        }
    }
}

/// Handle through which a simulated process acts on the world.
#[derive(Clone)]
pub struct Proc {
    rank: usize,
    world: Comm,
    engine: Rc<RefCell<Engine>>,
}

struct WaitOp<'a> {
    proc: &'a Proc,
    op: OpId,
    wait: Wait,
}

impl Future for WaitOp<'_> {
    type Output = Done;

    fn poll(self: Pin<&mut Self>, _cx: &mut Context<'_>) -> Poll<Done> {
        let mut e = self.proc.engine.borrow_mut();
        let r = self.proc.rank;
        match e.done.remove(&self.op) {
            Some(d) => {
                e.clocks[r] = e.clocks[r].max(d.time);
                e.hops[r] = e.hops[r].max(d.hops);
                e.waiting[r] = None;
                e.progress += 1;
                Poll::Ready(d)
            }
            None => {
                let wait = match &self.wait {
                    Wait::Split { comm, .. } => Wait::Split { comm: *comm, missing: e.missing_split_members(*comm, r) },
                    w => w.clone(),
                };
                e.waiting[r] = Some(wait);
                Poll::Pending
            }
        }
    }
}

impl Proc {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn size(&self) -> usize {
        self.world.size()
    }

    pub fn world(&self) -> Comm {
        self.world.clone()
    }

    pub fn clock(&self) -> f64 {
        self.engine.borrow().clocks[self.rank]
    }

    /// Dependent communication rounds on this process's critical path.
    pub fn hops(&self) -> u64 {
        self.engine.borrow().hops[self.rank]
    }

    /// Local computation of `dt` time units.
    pub fn compute(&self, dt: f64) {
        let mut e = self.engine.borrow_mut();
        e.clocks[self.rank] += dt.max(0.0);
        e.progress += 1;
    }

    fn check_rank(comm: &Comm, r: usize) -> Result<(), SimError> {
        if r != PROC_NULL && r >= comm.size() {
            return Err(SimError::InvalidRank { rank: r, size: comm.size() });
        }
        Ok(())
    }

    fn post_send(
        &self,
        comm: &Comm,
        dst: usize,
        chan: Channel,
        tag: i64,
        payload: Payload,
        units: u64,
    ) -> Result<Option<(OpId, Wait)>, SimError> {
        Self::check_rank(comm, dst)?;
        if dst == PROC_NULL {
            return Ok(None);
        }
        let mut e = self.engine.borrow_mut();
        let id = e.op();
        let s = PendingSend {
            id,
            src: self.rank,
            src_rank: comm.rank(),
            dst: comm.world_rank(dst),
            comm: comm.id(),
            chan,
            tag,
            units,
            payload,
            ready: e.clocks[self.rank],
            hops: e.hops[self.rank],
            arrival: None,
        };
        let wait = Wait::Send { dst: s.dst, tag, units };
        e.post_send(s);
        Ok(Some((id, wait)))
    }

    fn post_recv(
        &self,
        comm: &Comm,
        src: Option<usize>,
        chan: Channel,
        tag: Option<i64>,
    ) -> Result<Option<(OpId, Wait)>, SimError> {
        if let Some(s) = src {
            Self::check_rank(comm, s)?;
            if s == PROC_NULL {
                return Ok(None);
            }
        }
        let mut e = self.engine.borrow_mut();
        let id = e.op();
        let src = src.map(|s| comm.world_rank(s));
        let r = PendingRecv {
            id,
            dst: self.rank,
            src,
            comm: comm.id(),
            chan,
            tag,
            ready: e.clocks[self.rank],
            hops: e.hops[self.rank],
        };
        e.post_recv(r);
        let members = if src.is_none() { comm.info.members.clone() } else { Vec::new() };
        Ok(Some((id, Wait::Recv { src, tag, members })))
    }

    async fn wait(&self, op: Option<(OpId, Wait)>) -> Option<Done> {
        match op {
            Some((op, wait)) => Some(WaitOp { proc: self, op, wait }.await),
            None => None,
        }
    }

    fn null_recv() -> Received {
        Received { src: PROC_NULL, tag: 0, units: 0, payload: Payload::Empty }
    }

    pub(crate) async fn send_on(
        &self,
        comm: &Comm,
        dst: usize,
        chan: Channel,
        tag: i64,
        payload: Payload,
        units: u64,
    ) -> Result<(), SimError> {
        let op = self.post_send(comm, dst, chan, tag, payload, units)?;
        self.wait(op).await;
        Ok(())
    }

    pub(crate) async fn recv_on(
        &self,
        comm: &Comm,
        src: Option<usize>,
        chan: Channel,
        tag: Option<i64>,
    ) -> Result<Received, SimError> {
        let op = self.post_recv(comm, src, chan, tag)?;
        Ok(self.wait(op).await.and_then(|d| d.recv).unwrap_or_else(Self::null_recv))
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) async fn sendrecv_on(
        &self,
        comm: &Comm,
        dst: usize,
        stag: i64,
        payload: Payload,
        units: u64,
        src: Option<usize>,
        rtag: Option<i64>,
        chan: Channel,
    ) -> Result<Received, SimError> {
        let s = self.post_send(comm, dst, chan, stag, payload, units)?;
        let r = self.post_recv(comm, src, chan, rtag)?;
        self.wait(s).await;
        Ok(self.wait(r).await.and_then(|d| d.recv).unwrap_or_else(Self::null_recv))
    }

    /// Blocking send of `payload`; its length is the message size.
    pub async fn send(&self, comm: &Comm, dst: usize, tag: i64, payload: Payload) -> Result<(), SimError> {
        let units = payload.len() as u64;
        self.send_on(comm, dst, Channel::P2p, tag, payload, units).await
    }

    /// Blocking send with an explicit message size.
    pub async fn send_sized(
        &self,
        comm: &Comm,
        dst: usize,
        tag: i64,
        payload: Payload,
        units: u64,
    ) -> Result<(), SimError> {
        self.send_on(comm, dst, Channel::P2p, tag, payload, units).await
    }

    /// Blocking receive; `None` source or tag matches any.
    pub async fn recv(&self, comm: &Comm, src: Option<usize>, tag: Option<i64>) -> Result<Received, SimError> {
        self.recv_on(comm, src, Channel::P2p, tag).await
    }

    /// Combined send and receive that completes when both have.
    pub async fn sendrecv(
        &self,
        comm: &Comm,
        dst: usize,
        stag: i64,
        payload: Payload,
        src: Option<usize>,
        rtag: Option<i64>,
    ) -> Result<Received, SimError> {
        let units = payload.len() as u64;
        self.sendrecv_on(comm, dst, stag, payload, units, src, rtag, Channel::P2p).await
    }

    /// Collective split; returns `None` for an undefined color.
    pub async fn split(&self, comm: &Comm, color: Option<i64>, key: i64) -> Result<Option<Comm>, SimError> {
        let op = self.engine.borrow_mut().join_split(comm, self.rank, color, key);
        let wait = Wait::Split { comm: comm.id(), missing: Vec::new() };
        let done = WaitOp { proc: self, op, wait }.await;
        Ok(done.split.flatten())
    }

    pub(crate) fn log_collective(&self, comm: &Comm, kind: &'static str) {
        let mut e = self.engine.borrow_mut();
        let t = e.clocks[self.rank];
        e.collectives.push(CollRecord { kind, comm: comm.id(), world_rank: self.rank, comm_rank: comm.rank(), t });
        e.transcript.push(Event::Coll { t, rank: self.rank, comm: comm.id(), kind });
    }
}

/// Configuration of a simulated machine.
#[derive(Debug, Clone)]
pub struct World {
    p: usize,
    model: CostModel,
    topology: Option<Topology>,
    eager_threshold: u64,
}

/// Everything observed during a run.
#[derive(Debug, Clone, Default)]
pub struct SimTrace {
    /// Clock of every process when it finished (or stopped).
    pub finish: Vec<f64>,
    pub total_time: f64,
    /// Longest chain of dependent message rounds.
    pub rounds: u64,
    pub transcript: Vec<Event>,
    pub collectives: Vec<CollRecord>,
}

impl SimTrace {
    /// Invocations of collective `kind`, counted once per communicator call.
    pub fn collective_count(&self, kind: &str) -> usize {
        self.collectives.iter().filter(|c| c.kind == kind && c.comm_rank == 0).count()
    }

    /// Total collective invocations.
    pub fn collective_total(&self) -> usize {
        self.collectives.iter().filter(|c| c.comm_rank == 0).count()
    }

    pub fn transcript_text(&self) -> String {
        self.transcript.iter().map(|e| format!("{e}\n")).collect()
    }
}

#[derive(Debug)]
pub struct SimReport<T> {
    pub outcome: Result<Vec<T>, SimError>,
    pub trace: SimTrace,
}

impl<T> SimReport<T> {
    pub fn into_result(self) -> Result<(Vec<T>, SimTrace), SimError> {
        let trace = self.trace;
        self.outcome.map(|v| (v, trace))
    }
}

impl World {
    pub fn new(p: usize, model: CostModel) -> Result<Self, SimError> {
        if p < 1 {
            return Err(SimError::Domain("world needs at least one process".into()));
        }
        Ok(World { p, model, topology: None, eager_threshold: 0 })
    }

    pub fn with_topology(mut self, t: Topology) -> Result<Self, SimError> {
        if t.nodes() != self.p {
            return Err(SimError::Domain(format!("topology has {} nodes for {} processes", t.nodes(), self.p)));
        }
        self.topology = Some(t);
        Ok(self)
    }

    /// Messages of at most `e` units are delivered eagerly.
    pub fn with_eager_threshold(mut self, e: u64) -> Self {
        self.eager_threshold = e;
        self
    }

    pub fn size(&self) -> usize {
        self.p
    }

    pub fn model(&self) -> &CostModel {
        &self.model
    }

    pub fn topology(&self) -> Option<&Topology> {
        self.topology.as_ref()
    }

    pub fn run<T, F, Fut>(&self, program: F) -> SimReport<T>
    where
        F: Fn(Proc) -> Fut,
        Fut: Future<Output = Result<T, SimError>>,
    {
        let p = self.p;
        let k = self.model.ports.count();
        let engine = Rc::new(RefCell::new(Engine {
            model: self.model,
            topo: self.topology.clone(),
            eager: self.eager_threshold,
            clocks: vec![0.0; p],
            hops: vec![0; p],
            out_free: vec![vec![0.0; k]; p],
            in_free: vec![vec![0.0; k]; p],
            sends: Vec::new(),
            recvs: Vec::new(),
            done: HashMap::new(),
            next_op: 0,
            progress: 0,
            waiting: vec![None; p],
            transcript: Vec::new(),
            splits: BTreeMap::new(),
            split_seq: HashMap::new(),
            next_comm: 1,
            collectives: Vec::new(),
        }));
        let world = Rc::new(Communicator::world(p));
        let mut futs: Vec<Pin<Box<Fut>>> = (0..p)
            .map(|rank| {
                let proc = Proc { rank, world: Comm { info: world.clone(), rank }, engine: engine.clone() };
                Box::pin(program(proc))
            })
            .collect();
        let mut results: Vec<Option<T>> = (0..p).map(|_| None).collect();
        let mut cx = Context::from_waker(Waker::noop());
        let mut outcome = Ok(());
        'run: loop {
            let mut moved = false;
            for r in 0..p {
                if results[r].is_some() {
                    continue;
                }
                let before = engine.borrow().progress;
                match futs[r].as_mut().poll(&mut cx) {
                    Poll::Ready(Ok(v)) => {
                        results[r] = Some(v);
                        moved = true;
                    }
                    Poll::Ready(Err(e)) => {
                        outcome = Err(e);
                        break 'run;
                    }
                    Poll::Pending => moved = engine.borrow().progress != before,
                }
                if moved {
                    break;
                }
            }
            if results.iter().all(Option::is_some) {
                break;
            }
            if !moved {
                outcome = Err(deadlock(&mut engine.borrow_mut(), &results));
                break;
            }
        }
        drop(futs);
        let mut e = engine.borrow_mut();
        if outcome.is_ok() {
            if let Some(s) = e.sends.first() {
                outcome = Err(SimError::UnmatchedMessage { src: s.src, dst: s.dst, tag: s.tag, units: s.units });
            }
        }
        let trace = SimTrace {
            finish: e.clocks.clone(),
            total_time: e.clocks.iter().copied().fold(0.0, f64::max),
            rounds: e.hops.iter().copied().max().unwrap_or(0),
            transcript: std::mem::take(&mut e.transcript),
            collectives: std::mem::take(&mut e.collectives),
        };
        SimReport { outcome: outcome.map(|()| results.into_iter().map(|r| r.expect("finished")).collect()), trace }
    }
}

fn deadlock<T>(e: &mut Engine, results: &[Option<T>]) -> SimError {
    let blocked: Vec<usize> = (0..results.len()).filter(|&r| results[r].is_none()).collect();
    let mut edges = Vec::new();
    for &r in &blocked {
        let t = e.clocks[r];
        let ev = match e.waiting[r].clone() {
            Some(Wait::Send { dst, tag, units, .. }) => {
                edges.push((r, dst));
                Event::Deadlock { t, src: r, dst: Some(dst), tag: Some(tag), m: units }
            }
            Some(Wait::Recv { src, tag, members }) => {
                match src {
                    Some(s) => edges.push((r, s)),
                    None => edges.extend(members.into_iter().filter(|&w| w != r).map(|w| (r, w))),
                }
                Event::Deadlock { t, src: r, dst: src, tag, m: 0 }
            }
            Some(Wait::Split { missing, .. }) => {
                edges.extend(missing.iter().map(|&w| (r, w)));
                Event::Deadlock { t, src: r, dst: missing.first().copied(), tag: None, m: 0 }
            }
            None => Event::Deadlock { t, src: r, dst: None, tag: None, m: 0 },
        };
        e.transcript.push(ev);
    }
    SimError::Deadlock { blocked, edges }
}
