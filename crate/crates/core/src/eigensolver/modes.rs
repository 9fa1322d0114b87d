//! Lowest eigenvectors of the five-point Dirichlet Laplacian, used as
//! starting points.

use nalgebra::{DMatrix, SymmetricEigen};

use super::precond::Operator;
use crate::error::{domain, Result};

/// Orthonormalises the columns in place (modified Gram–Schmidt, twice).
pub(crate) fn orthonormalize(cols: &mut [Vec<f64>]) {
    for _ in 0..2 {
        for i in 0..cols.len() {
            let (done, rest) = cols.split_at_mut(i);
            let v = &mut rest[0];
            for u in done.iter() {
                let d = dot(u, v);
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
            }
            let n = dot(v, v).sqrt();
            v.iter_mut().for_each(|a| *a /= n);
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The `m` lowest modes, unit Euclidean length, in ascending order of
/// eigenvalue, each with a nonnegative sum.
pub(crate) fn laplace_modes(op: &Operator, m: usize) -> Result<Vec<Vec<f64>>> {
    let n = op.stiffness.len();
    if m == 0 || m > n {
        return Err(domain(format!("need 1 <= m <= {n} modes, got {m}")));
    }
    let block = (m + 3).min(n);
    let solver = op.factor(0.0)?;
    // deterministic, generic start: low-discrepancy values per node
    let mut cols: Vec<Vec<f64>> = (0..block)
        .map(|b| (0..n).map(|k| ((k as f64 + 1.0) * (0.754_877_666 + 0.569_840_291 * b as f64)).fract() - 0.5).collect())
        .collect();
    orthonormalize(&mut cols);
    let mut prev: Vec<f64> = vec![f64::INFINITY; m];
    for _ in 0..500 {
        for c in cols.iter_mut() {
            *c = solver.solve(c);
        }
        orthonormalize(&mut cols);
        let ritz = rayleigh_ritz(op, &mut cols);
        let change = ritz.iter().zip(&prev).map(|(a, b)| ((a - b) / a).abs()).fold(0.0, f64::max);
        prev = ritz[..m].to_vec();
        if change < 1e-13 {
            break;
        }
    }
    cols.truncate(m);
    for c in cols.iter_mut() {
        if c.iter().sum::<f64>() < 0.0 {
            c.iter_mut().for_each(|v| *v = -*v);
        }
    }
    Ok(cols)
}

fn rayleigh_ritz(op: &Operator, cols: &mut Vec<Vec<f64>>) -> Vec<f64> {
    let b = cols.len();
    let sc: Vec<Vec<f64>> = cols.iter().map(|c| op.apply_stiffness(c)).collect();
    let mut a = DMatrix::zeros(b, b);
    for i in 0..b {
        for j in 0..b {
            a[(i, j)] = 0.5 * (dot(&cols[i], &sc[j]) + dot(&cols[j], &sc[i]));
        }
    }
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..b).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let n = cols[0].len();
    let rotated: Vec<Vec<f64>> = order
        .iter()
        .map(|&o| {
            let mut v = vec![0.0; n];
            for (i, c) in cols.iter().enumerate() {
                let w = eig.eigenvectors[(i, o)];
                v.iter_mut().zip(c).for_each(|(a, b)| *a += w * b);
            }
            v
        })
        .collect();
    *cols = rotated;
    order.iter().map(|&o| eig.eigenvalues[o] / op.mass).collect()
}
