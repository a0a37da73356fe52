//! Point-to-point communication patterns on the simulator.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use parwb::netsim::{CostModel, Payload, Ports, Proc, SimError, Switching, Topology, TopologyKind, World, PROC_NULL};

use crate::{CliError, Csv, Outcome};

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Pattern {
    /// Blocking send to the right neighbour, then receive from the left.
    Ring,
    /// Combined send-receive around the ring.
    Sendrecv,
    /// Rank 0 and rank p−1 exchange one message each way.
    Pingpong,
    /// Non-periodic shift to the right.
    Shift,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum TopoArg {
    None,
    Ring,
    Full,
    Mesh,
    Torus,
    Hypercube,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum SwitchArg {
    Direct,
    StoreForward,
    Pipelined,
}

/// Runs a communication pattern and reports its simulated time. The event
/// transcript goes to `--transcript`, or to standard error.
#[derive(Debug, Args)]
#[command(after_help = "CSV columns: p,topology,total_time,rounds,deadlock\n\
Transcript lines: t=<time> ev=<send|recv|match|deadlock> src=<r> dst=<r> tag=<t> m=<units>")]
pub struct NetsimArgs {
    #[arg(long, value_enum, default_value = "sendrecv")]
    pattern: Pattern,
    #[arg(long, default_value_t = 4)]
    p: usize,
    /// Message size in data units.
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Eager threshold: sends of at most this many units complete locally.
    #[arg(long = "E", default_value_t = 0)]
    eager: u64,
    #[arg(long, value_enum, default_value = "direct")]
    switching: SwitchArg,
    /// Packet size of pipelined switching.
    #[arg(long, default_value_t = 1)]
    packet: u64,
    /// Ports per process and direction.
    #[arg(long, default_value_t = 1)]
    ports: usize,
    #[arg(long, value_enum, default_value = "none")]
    topology: TopoArg,
    /// Mesh or torus extents, e.g. `4x2`.
    #[arg(long)]
    dims: Option<String>,
    #[arg(long)]
    transcript: Option<PathBuf>,
}

fn topology(a: &NetsimArgs) -> Result<Option<Topology>, CliError> {
    let dims = || -> Result<Vec<usize>, CliError> {
        let d = a.dims.as_deref().ok_or_else(|| CliError::Args("--dims is required for mesh and torus".into()))?;
        d.split('x').map(|x| x.trim().parse().map_err(|_| CliError::Args(format!("bad --dims {d:?}")))).collect()
    };
    let kind = match a.topology {
        TopoArg::None => return Ok(None),
        TopoArg::Ring => TopologyKind::Ring(a.p),
        TopoArg::Full => TopologyKind::FullyConnected(a.p),
        TopoArg::Mesh => TopologyKind::Mesh(dims()?),
        TopoArg::Torus => TopologyKind::Torus(dims()?),
        TopoArg::Hypercube => {
            if !a.p.is_power_of_two() {
                return Err(CliError::Domain(format!("hypercube needs a power of two, not {}", a.p)));
            }
            TopologyKind::Hypercube(a.p.trailing_zeros())
        }
    };
    Ok(Some(Topology::new(kind)?))
}

async fn program(pr: Proc, pattern: Pattern, m: usize) -> Result<(), SimError> {
    let c = pr.world();
    let (n, r) = (c.size(), c.rank());
    let data = Payload::Int(vec![r as i64; m]);
    let (right, left) = ((r + 1) % n, (r + n - 1) % n);
    match pattern {
        Pattern::Ring => {
            pr.send(&c, right, 0, data).await?;
            pr.recv(&c, Some(left), Some(0)).await?;
        }
        Pattern::Sendrecv => {
            pr.sendrecv(&c, right, 0, data, Some(left), Some(0)).await?;
        }
        Pattern::Pingpong => {
            if n > 1 && r == 0 {
                pr.send(&c, n - 1, 0, data).await?;
                pr.recv(&c, Some(n - 1), Some(1)).await?;
            } else if n > 1 && r == n - 1 {
                pr.recv(&c, Some(0), Some(0)).await?;
                pr.send(&c, 0, 1, data).await?;
            }
        }
        Pattern::Shift => {
            let to = if r + 1 < n { r + 1 } else { PROC_NULL };
            let from = if r > 0 { r - 1 } else { PROC_NULL };
            pr.sendrecv(&c, to, 0, data, Some(from), Some(0)).await?;
        }
    }
    Ok(())
}

pub fn run(a: &NetsimArgs) -> Result<Outcome, CliError> {
    let switching = match a.switching {
        SwitchArg::Direct => Switching::Direct,
        SwitchArg::StoreForward => Switching::StoreAndForward,
        SwitchArg::Pipelined => Switching::Pipelined(a.packet),
    };
    let ports = if a.ports == 1 { Ports::OnePorted } else { Ports::KPorted(a.ports) };
    let model = CostModel::new(a.alpha, a.beta, switching, ports)?;
    let topo = topology(a)?;
    let label = topo.as_ref().map_or("none".to_string(), |t| t.kind().to_string());
    let mut world = World::new(a.p, model)?.with_eager_threshold(a.eager);
    if let Some(t) = topo {
        world = world.with_topology(t)?;
    }
    let (pattern, m) = (a.pattern, a.m);
    let report = world.run(|pr| program(pr, pattern, m));
    let text = report.trace.transcript_text();
    match &a.transcript {
        Some(path) => std::fs::write(path, &text)
            .map_err(|e| CliError::Domain(format!("cannot write {}: {e}", path.display())))?,
        None => eprint!("{text}"),
    }
    let deadlock = matches!(report.outcome, Err(SimError::Deadlock { .. }));
    let mut csv = Csv::new("p,topology,total_time,rounds,deadlock");
    csv.row(&[
        a.p.to_string(),
        label,
        report.trace.total_time.to_string(),
        report.trace.rounds.to_string(),
        deadlock.to_string(),
    ]);
    Ok(Outcome { csv, error: report.outcome.err().map(CliError::from) })
}
