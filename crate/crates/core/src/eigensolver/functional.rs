//! The discrete functionals `k(u) = ‖u‖_H`, `K(u) = ‖∇u‖_H` on nodal
//! vectors, their derivatives (the `A(u)`, `B(u)` pairings) and the weak
//! residual of the Euler–Lagrange equation.

use crate::discretize::Mesh;
use crate::orlicz::{moment_norm, NFunctionParams};

/// Which modular the norms are taken with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// `ρ_H`.
    Standard,
    /// `ρ_H / (|Ω| + ‖a‖₁)`.
    Rescaled,
}

#[derive(Clone)]
pub(crate) struct Functional<'a> {
    pub mesh: &'a Mesh,
    a: &'a [f64],
    p: f64,
    q: f64,
    factor: f64,
    w: f64,
}

/// Per-cell quantities at the unit-sphere scaling `t = |s| / norm`.
pub(crate) struct Scaled {
    pub norm: f64,
    /// `w H'(t_c)` per cell.
    pub dh: Vec<f64>,
    /// `Σ w (p t^p + q a t^q)`.
    pub denom: f64,
}

impl<'a> Functional<'a> {
    pub fn new(mesh: &'a Mesh, h: &'a NFunctionParams, kind: NormKind) -> Functional<'a> {
        let (p, q) = h.exponents();
        let factor = match kind {
            NormKind::Standard => 1.0,
            NormKind::Rescaled => 1.0 / h.rescale_constant(mesh),
        };
        Functional { mesh, a: h.weight().values(), p, q, factor, w: mesh.cell_measure() }
    }

    pub fn norm_of(&self, samples: &[f64]) -> f64 {
        moment_norm(samples, self.a, self.w, self.p, self.q, self.factor)
    }

    pub fn cells(&self, x: &[f64]) -> Vec<f64> {
        self.mesh.cell_values_raw(x)
    }

    pub fn grads(&self, x: &[f64]) -> (Vec<[f64; 2]>, Vec<f64>) {
        let g = self.mesh.gradient_raw(x);
        let mag = g.iter().map(|v| v[0].hypot(v[1])).collect();
        (g, mag)
    }

    pub fn k(&self, x: &[f64]) -> f64 {
        self.norm_of(&self.cells(x))
    }

    pub fn big_k(&self, x: &[f64]) -> f64 {
        self.norm_of(&self.grads(x).1)
    }

    /// `K(x) / k(x)`.
    pub fn rayleigh(&self, x: &[f64]) -> f64 {
        self.big_k(x) / self.k(x)
    }

    /// `w H'(t)` and the normalising sum for nonnegative magnitudes.
    pub fn scaled(&self, mags: &[f64]) -> Scaled {
        let norm = self.norm_of(mags);
        let (p, q) = (self.p, self.q);
        let mut dh = Vec::with_capacity(mags.len());
        let mut denom = 0.0;
        for (&s, &a) in mags.iter().zip(self.a) {
            let t = s.abs() / norm;
            if t == 0.0 || norm == 0.0 {
                dh.push(0.0);
                continue;
            }
            let tp1 = t.powf(p - 1.0);
            let (tq1, aq) = if a == 0.0 { (0.0, 0.0) } else { (t.powf(q - 1.0), a) };
            dh.push(self.w * (p * tp1 + q * aq * tq1));
            denom += self.w * (p * tp1 * t + q * aq * tq1 * t);
        }
        Scaled { norm, dh, denom }
    }

    /// `k(x)` and the nodal covector of `k'(x)`.
    pub fn k_with_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let cells = self.cells(x);
        let s = self.scaled(&cells);
        let cov: Vec<f64> = cells.iter().zip(&s.dh).map(|(c, d)| d * c.signum() / s.denom).collect();
        (s.norm, self.mesh.cell_values_adjoint(&cov))
    }

    /// `K(x)` and the nodal covector of `K'(x)`.
    pub fn big_k_with_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (g, mag) = self.grads(x);
        let s = self.scaled(&mag);
        let cov: Vec<[f64; 2]> = g
            .iter()
            .zip(&mag)
            .zip(&s.dh)
            .map(|((v, &m), d)| if m == 0.0 { [0.0, 0.0] } else { [d * v[0] / (m * s.denom), d * v[1] / (m * s.denom)] })
            .collect();
        (s.norm, self.mesh.gradient_adjoint(&cov))
    }

    /// `R = K/k` and its gradient `(K' - R k') / k`.
    pub fn rayleigh_with_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (k, dk) = self.k_with_grad(x);
        let (big_k, d_big_k) = self.big_k_with_grad(x);
        let r = big_k / k;
        let g = d_big_k.iter().zip(&dk).map(|(a, b)| (a - r * b) / k).collect();
        (r, g)
    }

    /// `β_c` with `K'(x) = Gᵀ diag(β) G x`: the coefficients of the
    /// linearisation at `x` (0 where the gradient vanishes).
    pub fn flux_weights(&self, x: &[f64]) -> Vec<f64> {
        let (_, mag) = self.grads(x);
        let s = self.scaled(&mag);
        mag.iter().zip(&s.dh).map(|(&m, d)| if m == 0.0 { 0.0 } else { d / (m * s.denom) }).collect()
    }

    /// `⟨k'(u), v⟩`.
    pub fn k_pairing(&self, u: &[f64], v: &[f64]) -> f64 {
        let cu = self.cells(u);
        let cv = self.cells(v);
        let s = self.scaled(&cu);
        cu.iter().zip(&cv).zip(&s.dh).map(|((a, b), d)| d * a.signum() * b).sum::<f64>() / s.denom
    }

    /// `⟨K'(u), v⟩`.
    pub fn big_k_pairing(&self, u: &[f64], v: &[f64]) -> f64 {
        let (gu, mag) = self.grads(u);
        let (gv, _) = self.grads(v);
        let s = self.scaled(&mag);
        gu.iter()
            .zip(&gv)
            .zip(mag.iter().zip(&s.dh))
            .map(|((a, b), (&m, d))| if m == 0.0 { 0.0 } else { d * (a[0] * b[0] + a[1] * b[1]) / m })
            .sum::<f64>()
            / s.denom
    }

    /// `S(u)`: ratio of `Σ w (p T^p + q a T^q)` for `T = |∇u|/K` to the
    /// same sum for `t = |u|/k`.
    pub fn s_of_u(&self, x: &[f64]) -> f64 {
        let num = self.scaled(&self.grads(x).1).denom;
        let den = self.scaled(&self.cells(x)).denom;
        num / den
    }

    /// Largest over nodes of `|LHS - RHS|` of the weak form tested with the
    /// hat function at that node, divided by the sum of the absolute cell
    /// contributions to both sides (0 when both sides vanish).
    pub fn weak_residual(&self, x: &[f64], lambda: f64) -> f64 {
        let n = self.mesh.node_count();
        let cells = self.cells(x);
        let (g, mag) = self.grads(x);
        let sc = self.scaled(&cells);
        let sg = self.scaled(&mag);
        let s_u = sg.denom / sc.denom;
        let [hx, hy] = self.mesh.spacing();
        let mut diff = vec![0.0; n];
        let mut scale = vec![0.0; n];
        let dim = self.mesh.dim();
        for (c, corners) in self.mesh.corners().iter().enumerate() {
            // flux H'(T) ∇u/|∇u| and source λ S H'(t) sgn(u), cell integrals
            let flux = if mag[c] == 0.0 { [0.0, 0.0] } else { [sg.dh[c] * g[c][0] / mag[c], sg.dh[c] * g[c][1] / mag[c]] };
            let src = lambda * s_u * sc.dh[c] * cells[c].signum();
            let mut add = |slot: usize, grad_phi: [f64; 2], phi: f64| {
                if let Some(k) = corners[slot] {
                    let l = flux[0] * grad_phi[0] + flux[1] * grad_phi[1];
                    let r = src * phi;
                    diff[k] += l - r;
                    scale[k] += l.abs() + r.abs();
                }
            };
            if dim == 1 {
                add(0, [-1.0 / hx, 0.0], 0.5);
                add(1, [1.0 / hx, 0.0], 0.5);
            } else {
                let (gx, gy) = (0.5 / hx, 0.5 / hy);
                add(0, [-gx, -gy], 0.25);
                add(1, [gx, -gy], 0.25);
                add(2, [-gx, gy], 0.25);
                add(3, [gx, gy], 0.25);
            }
        }
        diff.iter()
            .zip(&scale)
            .map(|(d, s)| if *s == 0.0 { 0.0 } else { d.abs() / s })
            .fold(0.0, f64::max)
    }
}
