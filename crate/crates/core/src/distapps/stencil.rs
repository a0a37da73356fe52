//! Five-point averaging stencil with halo exchange.

use super::{divides, grid_side, AppEnv, AppRun};
use crate::collectives::{allreduce, ReductionOperator};
use crate::netsim::{Comm, Payload, Proc, SimError, PROC_NULL};
use crate::Matrix;

/// Value seen beyond the edge of the global grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Fixed(f64),
    /// The edge cell itself.
    Reflecting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HaloScheme {
    /// Combined send-receive per direction.
    SendRecv,
    /// Blocking send followed by receive; deadlocks without buffering.
    Naive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StencilResult {
    pub grid: Matrix<f64>,
    pub iterations: usize,
}

#[inline]
fn average(w: f64, e: f64, n: f64, s: f64, c: f64) -> f64 {
    ((((w + e) + n) + s) + c) / 5.0
}

fn ghost(b: Boundary, edge: f64) -> f64 {
    match b {
        Boundary::Fixed(v) => v,
        Boundary::Reflecting => edge,
    }
}

/// One sweep over `u` with explicit halos; returns the largest change.
/// Halos are `[west, east, north, south]`.
fn sweep(u: &Matrix<f64>, halo: &[Vec<f64>; 4], out: &mut Matrix<f64>) -> f64 {
    let (rows, cols) = (u.rows(), u.cols());
    let mut delta: f64 = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            let w = if j > 0 { u[(i, j - 1)] } else { halo[0][i] };
            let e = if j + 1 < cols { u[(i, j + 1)] } else { halo[1][i] };
            let n = if i > 0 { u[(i - 1, j)] } else { halo[2][j] };
            let s = if i + 1 < rows { u[(i + 1, j)] } else { halo[3][j] };
            let c = u[(i, j)];
            let v = average(w, e, n, s, c);
            delta = delta.max((v - c).abs());
            out[(i, j)] = v;
        }
    }
    delta
}

fn column(u: &Matrix<f64>, j: usize) -> Vec<f64> {
    (0..u.rows()).map(|i| u[(i, j)]).collect()
}

fn boundary_halos(u: &Matrix<f64>, b: Boundary) -> [Vec<f64>; 4] {
    let (rows, cols) = (u.rows(), u.cols());
    [
        column(u, 0).into_iter().map(|x| ghost(b, x)).collect(),
        column(u, cols - 1).into_iter().map(|x| ghost(b, x)).collect(),
        u.row(0).iter().map(|&x| ghost(b, x)).collect(),
        u.row(rows - 1).iter().map(|&x| ghost(b, x)).collect(),
    ]
}

/// Sequential oracle: at most `iters` sweeps, stopping after the first sweep
/// whose largest change is below `eps`.
pub fn stencil_seq(u: &Matrix<f64>, iters: usize, b: Boundary, eps: Option<f64>) -> StencilResult {
    let mut cur = u.clone();
    let mut next = u.clone();
    let mut done = 0;
    if u.rows() == 0 || u.cols() == 0 {
        return StencilResult { grid: cur, iterations: 0 };
    }
    while done < iters {
        let halo = boundary_halos(&cur, b);
        let delta = sweep(&cur, &halo, &mut next);
        std::mem::swap(&mut cur, &mut next);
        done += 1;
        if eps.is_some_and(|e| delta < e) {
            break;
        }
    }
    StencilResult { grid: cur, iterations: done }
}

/// Sends `out[d]` to `to[d]` and receives from `from[d]` for each of the
/// four directions; `None` where the source is [`PROC_NULL`].
async fn exchange(
    pr: &Proc,
    c: &Comm,
    scheme: HaloScheme,
    to: [usize; 4],
    from: [usize; 4],
    out: [Vec<f64>; 4],
) -> Result<[Option<Vec<f64>>; 4], SimError> {
    let mut got: [Option<Vec<f64>>; 4] = Default::default();
    match scheme {
        HaloScheme::SendRecv => {
            for (d, data) in out.into_iter().enumerate() {
                let tag = d as i64;
                let r = pr.sendrecv(c, to[d], tag, Payload::Real(data), Some(from[d]), Some(tag)).await?;
                got[d] = Some(r.payload.into_reals()?);
            }
        }
        HaloScheme::Naive => {
            for (d, data) in out.into_iter().enumerate() {
                pr.send(c, to[d], d as i64, Payload::Real(data)).await?;
            }
            for d in 0..4 {
                got[d] = Some(pr.recv(c, Some(from[d]), Some(d as i64)).await?.payload.into_reals()?);
            }
        }
    }
    for d in 0..4 {
        if from[d] == PROC_NULL {
            got[d] = None;
        }
    }
    Ok(got)
}

/// Distributed stencil on a `√p × √p` block grid; equals [`stencil_seq`]
/// bit for bit. With `eps`, all ranks agree on stopping through an
/// Allreduce(LAnd) after each sweep.
pub fn stencil_iterate(
    env: &AppEnv,
    u: &Matrix<f64>,
    iters: usize,
    b: Boundary,
    eps: Option<f64>,
    scheme: HaloScheme,
) -> Result<AppRun<StencilResult>, SimError> {
    let q = grid_side(env.p())?;
    let (rows, cols) = (u.rows(), u.cols());
    divides(q, rows, "rows")?;
    divides(q, cols, "cols")?;
    if rows == 0 || cols == 0 {
        return Err(SimError::Domain("empty grid".into()));
    }
    let (br, bc) = (rows / q, cols / q);
    let (out, trace) = env
        .world
        .run(|pr| async move {
            let c = pr.world();
            let (gi, gj) = (c.rank() / q, c.rank() % q);
            let at = |i: usize, j: usize| i * q + j;
            let west = if gj > 0 { at(gi, gj - 1) } else { PROC_NULL };
            let east = if gj + 1 < q { at(gi, gj + 1) } else { PROC_NULL };
            let north = if gi > 0 { at(gi - 1, gj) } else { PROC_NULL };
            let south = if gi + 1 < q { at(gi + 1, gj) } else { PROC_NULL };
            let mut cur = u.block(gi * br, gj * bc, br, bc);
            let mut next = cur.clone();
            let mut done = 0;
            while done < iters {
                let mut halo = boundary_halos(&cur, b);
                let out = [column(&cur, 0), column(&cur, bc - 1), cur.row(0).to_vec(), cur.row(br - 1).to_vec()];
                let got =
                    exchange(&pr, &c, scheme, [west, east, north, south], [east, west, south, north], out).await?;
                // data from the east neighbour fills the east halo, and so on
                for (slot, h) in [1, 0, 3, 2].into_iter().zip(got) {
                    if let Some(h) = h {
                        halo[slot] = h;
                    }
                }
                let delta = sweep(&cur, &halo, &mut next);
                pr.compute(env.op_time * (5 * br * bc) as f64);
                std::mem::swap(&mut cur, &mut next);
                done += 1;
                if let Some(e) = eps {
                    let flag = vec![i64::from(delta < e)];
                    if allreduce(&pr, &c, flag, &ReductionOperator::LAnd).await?[0] == 1 {
                        break;
                    }
                }
            }
            Ok((cur, done))
        })
        .into_result()?;
    let mut grid = Matrix::filled(rows, cols, 0.0);
    let iterations = out.first().map_or(0, |o| o.1);
    for (r, (blk, _)) in out.into_iter().enumerate() {
        grid.set_block((r / q) * br, (r % q) * bc, &blk);
    }
    let per = (5 * br * bc * iterations) as u64;
    Ok(AppRun { output: StencilResult { grid, iterations }, trace, local_ops: vec![per; q * q] })
}
