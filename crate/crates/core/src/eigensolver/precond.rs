//! Banded SPD factorisations used as preconditioners: the five-point
//! `(-Δ + I)` for the Laplace modes, and the frozen-coefficient
//! linearisation of `K'` at the current iterate for the descent.

use crate::discretize::Mesh;
use crate::error::{Error, Result};

/// Symmetric band matrix, lower half stored row by row, factored in place.
pub(crate) struct Banded {
    n: usize,
    band: usize,
    /// Row `i` holds entries `(i, i - band ..= i)`.
    l: Vec<f64>,
}

impl Banded {
    pub fn zeros(n: usize, band: usize) -> Banded {
        Banded { n, band, l: vec![0.0; n * (band + 1)] }
    }

    /// Adds `v` at `(i, j)` and, implicitly, `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(i - j <= self.band);
        self.l[i * (self.band + 1) + self.band - (i - j)] += v;
    }

    /// Cholesky factorisation `L Lᵀ`.
    pub fn factor(mut self) -> Result<Banded> {
        let (n, b, w) = (self.n, self.band, self.band + 1);
        for i in 0..n {
            let j0 = i.saturating_sub(b);
            for j in j0..=i {
                let mut s = self.l[i * w + b - (i - j)];
                for k in j0.max(j.saturating_sub(b))..j {
                    s -= self.l[i * w + b - (i - k)] * self.l[j * w + b - (j - k)];
                }
                if j == i {
                    if !(s > 0.0) {
                        return Err(Error::Numerical("preconditioner is not positive definite".into()));
                    }
                    self.l[i * w + b] = s.sqrt();
                } else {
                    self.l[i * w + b - (i - j)] = s / self.l[j * w + b];
                }
            }
        }
        Ok(self)
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let (n, b, w) = (self.n, self.band, self.band + 1);
        let mut y = rhs.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(b)..i {
                s -= self.l[i * w + b - (i - k)] * y[k];
            }
            y[i] = s / self.l[i * w + b];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n.min(i + b + 1) {
                s -= self.l[k * w + b - (k - i)] * y[k];
            }
            y[i] = s / self.l[i * w + b];
        }
        y
    }
}

/// Sparse rows of the five-point stiffness, `(diag, [(col, off)])`, and
/// the lumped mass per node.
pub(crate) struct Operator {
    pub stiffness: Vec<(f64, Vec<(usize, f64)>)>,
    pub mass: f64,
    /// Bandwidth of the bilinear cell coupling (covers the five-point one).
    pub band: usize,
}

impl Operator {
    pub fn new(mesh: &Mesh) -> Operator {
        let [hx, hy] = mesh.spacing();
        let nodes = mesh.node_indices();
        let stiffness = if mesh.dim() == 1 {
            (0..nodes.len())
                .map(|k| {
                    let mut off = Vec::new();
                    if k > 0 {
                        off.push((k - 1, -1.0 / hx));
                    }
                    if k + 1 < nodes.len() {
                        off.push((k + 1, -1.0 / hx));
                    }
                    (2.0 / hx, off)
                })
                .collect()
        } else {
            let (cx, cy) = (hy / hx, hx / hy);
            nodes
                .iter()
                .map(|&(i, j)| {
                    let mut off = Vec::new();
                    for (di, dj, c) in [(-1, 0, cx), (1, 0, cx), (0, -1, cy), (0, 1, cy)] {
                        let (ni, nj) = (i as isize + di, j as isize + dj);
                        if ni < 0 || nj < 0 {
                            continue;
                        }
                        if let Some(m) = mesh.node_at(ni as usize, nj as usize) {
                            off.push((m, -c));
                        }
                    }
                    (2.0 * (cx + cy), off)
                })
                .collect()
        };
        let band = mesh
            .corners()
            .iter()
            .map(|c| {
                let ks: Vec<usize> = c.iter().flatten().copied().collect();
                let lo = ks.iter().min().copied().unwrap_or(0);
                let hi = ks.iter().max().copied().unwrap_or(0);
                hi - lo
            })
            .max()
            .unwrap_or(0);
        Operator { stiffness, mass: mesh.cell_measure(), band }
    }

    pub fn apply_stiffness(&self, x: &[f64]) -> Vec<f64> {
        self.stiffness
            .iter()
            .enumerate()
            .map(|(k, (d, off))| d * x[k] + off.iter().map(|&(m, c)| c * x[m]).sum::<f64>())
            .collect()
    }

    /// `scale * (stiffness + shift * mass)` added into `m`.
    pub fn add_to(&self, m: &mut Banded, scale: f64, shift: f64) {
        for (k, (d, off)) in self.stiffness.iter().enumerate() {
            m.add(k, k, scale * (d + shift * self.mass));
            for &(j, c) in off {
                if j < k {
                    m.add(k, j, scale * c);
                }
            }
        }
    }

    /// Factored `stiffness + shift * mass`.
    pub fn factor(&self, shift: f64) -> Result<Banded> {
        let mut m = Banded::zeros(self.stiffness.len(), self.band);
        self.add_to(&mut m, 1.0, shift);
        m.factor()
    }
}

/// Gradients of the four (1D: two) corner hat functions on a cell.
pub(crate) fn hat_gradients(mesh: &Mesh) -> Vec<[f64; 2]> {
    let [hx, hy] = mesh.spacing();
    if mesh.dim() == 1 {
        vec![[-1.0 / hx, 0.0], [1.0 / hx, 0.0]]
    } else {
        let (gx, gy) = (0.5 / hx, 0.5 / hy);
        vec![[-gx, -gy], [gx, -gy], [-gx, gy], [gx, gy]]
    }
}

/// Factored `Σ_c β_c G_cᵀ G_c + τ (stiffness + mass)`.
pub(crate) fn weighted_stiffness(mesh: &Mesh, op: &Operator, beta: &[f64], tau: f64) -> Result<Banded> {
    let mut m = Banded::zeros(op.stiffness.len(), op.band);
    let hats = hat_gradients(mesh);
    for (corners, &b) in mesh.corners().iter().zip(beta) {
        if b == 0.0 {
            continue;
        }
        for (s, gs) in hats.iter().enumerate() {
            let Some(i) = corners[s] else { continue };
            for (t, gt) in hats.iter().enumerate().take(s + 1) {
                let Some(j) = corners[t] else { continue };
                let v = b * (gs[0] * gt[0] + gs[1] * gt[1]);
                // the off-diagonal pair (s, t) and (t, s) lands on one slot
                m.add(i, j, if s == t { v } else if i == j { 2.0 * v } else { v });
            }
        }
    }
    op.add_to(&mut m, tau, 1.0);
    m.factor()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_inverts_operator_on_masked_grid() {
        let mesh = Mesh::disk(1.0, 0.2).unwrap();
        let op = Operator::new(&mesh);
        let pc = op.factor(1.0).unwrap();
        let n = mesh.node_count();
        let x: Vec<f64> = (0..n).map(|k| ((k * 7 % 11) as f64 - 5.0) / 3.0).collect();
        let mut b = op.apply_stiffness(&x);
        for (bi, xi) in b.iter_mut().zip(&x) {
            *bi += op.mass * xi;
        }
        let y = pc.solve(&b);
        for (a, e) in y.iter().zip(&x) {
            assert!((a - e).abs() < 1e-10, "{a} vs {e}");
        }
    }

    #[test]
    fn weighted_stiffness_matches_gradient_energy() {
        let mesh = Mesh::rectangle(0.0, 1.0, 0.0, 2.0, 5, 7).unwrap();
        let op = Operator::new(&mesh);
        let n = mesh.node_count();
        let beta: Vec<f64> = (0..mesh.cell_count()).map(|c| 1.0 + (c % 3) as f64).collect();
        let pc = weighted_stiffness(&mesh, &op, &beta, 0.0).unwrap();
        // xᵀ P x = Σ β |∇x|² for the solution x of P x = b
        let b: Vec<f64> = (0..n).map(|k| (k as f64 * 0.37).sin()).collect();
        let x = pc.solve(&b);
        let energy: f64 = mesh
            .gradient_raw(&x)
            .iter()
            .zip(&beta)
            .map(|(g, bb)| bb * (g[0] * g[0] + g[1] * g[1]))
            .sum();
        let xb: f64 = x.iter().zip(&b).map(|(a, c)| a * c).sum();
        assert!((energy - xb).abs() < 1e-9 * xb, "{energy} vs {xb}");
    }
}
