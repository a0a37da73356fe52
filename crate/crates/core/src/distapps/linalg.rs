//! Matrix-vector products and SUMMA.

use super::{divides, grid_side, AppEnv, AppRun};
use crate::collectives::{allgather, bcast, reduce_scatter_block, Algorithm, ReductionOperator};
use crate::netsim::SimError;
use crate::Matrix;

pub fn matvec_seq(a: &Matrix<i64>, x: &[i64]) -> Vec<i64> {
    (0..a.rows()).map(|i| a.row(i).iter().zip(x).map(|(u, v)| u * v).sum()).collect()
}

fn check_shapes(env: &AppEnv, a: &Matrix<i64>, x: &[i64]) -> Result<(), SimError> {
    if x.len() != a.cols() {
        return Err(SimError::Domain(format!("vector length {} for {} columns", x.len(), a.cols())));
    }
    divides(env.p(), a.rows(), "m")?;
    divides(env.p(), a.cols(), "n")
}

/// Row-block distribution: one Allgather of `x`, then local rows times `x`.
pub fn matvec_rowwise(env: &AppEnv, a: &Matrix<i64>, x: &[i64]) -> Result<AppRun<Vec<i64>>, SimError> {
    check_shapes(env, a, x)?;
    let (m, n, p) = (a.rows(), a.cols(), env.p());
    let (mb, nb) = (m / p, n / p);
    let (out, trace) = env
        .world
        .run(|pr| async move {
            let c = pr.world();
            let r = c.rank();
            let local = a.block(r * mb, 0, mb, n);
            let xs = allgather(&pr, &c, x[r * nb..(r + 1) * nb].to_vec()).await?.concat();
            let ops = (mb * n) as u64;
            pr.compute(env.op_time * ops as f64);
            Ok((matvec_seq(&local, &xs), ops))
        })
        .into_result()?;
    let (ys, ops): (Vec<_>, Vec<_>) = out.into_iter().unzip();
    Ok(AppRun { output: ys.concat(), trace, local_ops: ops })
}

/// Column-block distribution: local partial products, one ReduceScatterBlock.
pub fn matvec_colwise(env: &AppEnv, a: &Matrix<i64>, x: &[i64]) -> Result<AppRun<Vec<i64>>, SimError> {
    check_shapes(env, a, x)?;
    let (m, n, p) = (a.rows(), a.cols(), env.p());
    let nb = n / p;
    let (out, trace) = env
        .world
        .run(|pr| async move {
            let c = pr.world();
            let r = c.rank();
            let local = a.block(0, r * nb, m, nb);
            let partial = matvec_seq(&local, &x[r * nb..(r + 1) * nb]);
            let ops = (m * nb) as u64;
            pr.compute(env.op_time * ops as f64);
            let y = reduce_scatter_block(&pr, &c, partial, &ReductionOperator::Sum).await?;
            Ok((y, ops))
        })
        .into_result()?;
    let (ys, ops): (Vec<_>, Vec<_>) = out.into_iter().unzip();
    Ok(AppRun { output: ys.concat(), trace, local_ops: ops })
}

/// `C = A·B` on a `√p × √p` grid. Each of the `√p` phases broadcasts one
/// block of `A` along every grid row and one block of `B` along every grid
/// column.
pub fn summa(env: &AppEnv, a: &Matrix<i64>, b: &Matrix<i64>) -> Result<AppRun<Matrix<i64>>, SimError> {
    let q = grid_side(env.p())?;
    let (m, l, n) = (a.rows(), a.cols(), b.cols());
    if b.rows() != l {
        return Err(SimError::Domain("non-conforming SUMMA operands".into()));
    }
    divides(q, m, "m")?;
    divides(q, l, "l")?;
    divides(q, n, "n")?;
    let (mb, lb, nb) = (m / q, l / q, n / q);
    let (out, trace) = env
        .world
        .run(|pr| async move {
            let w = pr.world();
            let (i, j) = (w.rank() / q, w.rank() % q);
            let row = pr.split(&w, Some(i as i64), j as i64).await?.expect("colored");
            let col = pr.split(&w, Some(j as i64), i as i64).await?.expect("colored");
            let a_ij = a.block(i * mb, j * lb, mb, lb);
            let b_ij = b.block(i * lb, j * nb, lb, nb);
            let mut c_ij = vec![0i64; mb * nb];
            let mut ops = 0;
            for k in 0..q {
                let ak = if j == k { a_ij.as_slice().to_vec() } else { Vec::new() };
                let ak = bcast(&pr, &row, k, ak, Algorithm::Binomial).await?;
                let bk = if i == k { b_ij.as_slice().to_vec() } else { Vec::new() };
                let bk = bcast(&pr, &col, k, bk, Algorithm::Binomial).await?;
                for r in 0..mb {
                    for t in 0..lb {
                        let x = ak[r * lb + t];
                        for s in 0..nb {
                            c_ij[r * nb + s] += x * bk[t * nb + s];
                        }
                    }
                }
                let phase = (mb * lb * nb) as u64;
                pr.compute(env.op_time * phase as f64);
                ops += phase;
            }
            Ok((c_ij, ops))
        })
        .into_result()?;
    let mut c = Matrix::filled(m, n, 0);
    let mut local_ops = Vec::with_capacity(q * q);
    for (r, (blk, ops)) in out.into_iter().enumerate() {
        let blk = Matrix::from_vec(mb, nb, blk).expect("block shape");
        c.set_block((r / q) * mb, (r % q) * nb, &blk);
        local_ops.push(ops);
    }
    Ok(AppRun { output: c, trace, local_ops })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netsim::CostModel;

    fn env(p: usize) -> AppEnv {
        AppEnv::new(p, CostModel::default()).unwrap()
    }

    fn pseudo(m: usize, n: usize, seed: i64) -> Matrix<i64> {
        Matrix::from_fn(m, n, |i, j| ((i as i64 * 31 + j as i64 * 17 + seed) % 11) - 5)
    }

    #[test]
    fn identity_and_oracle() {
        let x = [1, 2, 3, 4];
        assert_eq!(matvec_rowwise(&env(2), &Matrix::identity(4), &x).unwrap().output, x);
        let a = pseudo(8, 6, 3);
        let x: Vec<i64> = (0..6).map(|v| v * 2 - 3).collect();
        let run = matvec_rowwise(&env(2), &a, &x).unwrap();
        assert_eq!(run.output, matvec_seq(&a, &x));
        assert_eq!(run.trace.collective_count("allgather"), 1);
        assert_eq!(run.trace.collective_total(), 1);
        assert_eq!(run.local_ops, [24, 24]);
    }

    #[test]
    fn colwise_agrees() {
        let a = pseudo(6, 8, 1);
        let x: Vec<i64> = (0..8).collect();
        let run = matvec_colwise(&env(2), &a, &x).unwrap();
        assert_eq!(run.output, matvec_seq(&a, &x));
        assert_eq!(run.trace.collective_count("reduce_scatter_block"), 1);
        assert_eq!(run.trace.collective_total(), 1);
        let z = matvec_colwise(&env(2), &Matrix::filled(4, 4, 0), &[1, 2, 3, 4]).unwrap();
        assert_eq!(z.output, [0; 4]);
        assert!(matvec_colwise(&env(3), &a, &x).is_err());
    }

    #[test]
    fn summa_matches_product() {
        for (p, m, l, n) in [(1, 3, 2, 4), (4, 4, 4, 4), (4, 2, 6, 4), (9, 6, 3, 9)] {
            let a = pseudo(m, l, 2);
            let b = pseudo(l, n, 7);
            let run = summa(&env(p), &a, &b).unwrap();
            assert_eq!(run.output, a.mul_naive(&b), "p={p}");
            let q = (p as f64).sqrt() as usize;
            let per_rank = run.trace.collectives.iter().filter(|c| c.world_rank == 0).count();
            assert_eq!(per_rank, 2 * q);
            assert_eq!(run.trace.collective_count("bcast"), 2 * q * q);
        }
        assert!(summa(&env(2), &pseudo(2, 2, 0), &pseudo(2, 2, 0)).is_err());
    }
}
