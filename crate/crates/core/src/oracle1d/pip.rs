use crate::discretize::{Field, Mesh};
use crate::error::{domain, Error, Result};
use crate::quad::{tanh_sinh, tanh_sinh_level};

/// `π_p = 2 (p-1)^{1/p} ∫₀¹ (1 - s^p)^{-1/p} ds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiP {
    pub p: f64,
    pub value: f64,
    /// Difference to the previous refinement level.
    pub error_estimate: f64,
    pub level: u32,
}

/// `(1 - s^p)^{-1/p}` where `s = 1 - c`, accurate for small `c`.
fn kernel(p: f64, c: f64) -> f64 {
    let one_minus_sp = -(p * (-c).ln_1p()).exp_m1();
    one_minus_sp.powf(-1.0 / p)
}

fn prefactor(p: f64) -> f64 {
    2.0 * (p - 1.0).powf(1.0 / p)
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(domain(format!("p must be finite and > 1, got {p}")));
    }
    Ok(())
}

/// `∫₀¹ (1 - s^p)^{-1/p} ds`, refined until consecutive levels agree to
/// about 1e-15.
pub fn arcsin_integral(p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(tanh_sinh(|_, _, dr| kernel(p, dr), 0.0, 1.0, 1e-15, 12)?.value)
}

/// `π_p` by tanh-sinh quadrature, refined to convergence.
pub fn pi_p(p: f64) -> Result<PiP> {
    check_p(p)?;
    let q = tanh_sinh(|_, _, dr| kernel(p, dr), 0.0, 1.0, 1e-15, 12)?;
    let c = prefactor(p);
    Ok(PiP { p, value: c * q.value, error_estimate: c * q.error_estimate, level: q.level })
}

/// `π_p` from the tanh-sinh sum with step `2^-level`; the error estimate
/// is the difference to step `2^{1-level}`.
pub fn pi_p_at_level(p: f64, level: u32) -> Result<PiP> {
    check_p(p)?;
    if level == 0 {
        return Err(domain("level 0 has no coarser level to compare against"));
    }
    let f = |_: f64, _: f64, dr: f64| kernel(p, dr);
    let c = prefactor(p);
    let fine = tanh_sinh_level(f, 0.0, 1.0, level);
    let coarse = tanh_sinh_level(f, 0.0, 1.0, level - 1);
    Ok(PiP { p, value: c * fine, error_estimate: c * (fine - coarse).abs(), level })
}

/// `F(y) = ∫₀^y (1 - s^p)^{-1/p} ds` for `0 ≤ y ≤ 1`.
fn arcsin_p(p: f64, y: f64) -> Result<f64> {
    if y == 0.0 {
        return Ok(0.0);
    }
    let c = 1.0 - y;
    Ok(tanh_sinh(|_, _, dr| kernel(p, c + dr), 0.0, y, 1e-15, 12)?.value)
}

/// Solves `F(y) = target` on `[0, 1]` by safeguarded Newton.
fn invert_arcsin_p(p: f64, target: f64, total: f64) -> Result<f64> {
    if target <= 0.0 {
        return Ok(0.0);
    }
    if target >= total {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut y = target / total;
    for _ in 0..200 {
        let r = arcsin_p(p, y)? - target;
        if r == 0.0 {
            return Ok(y);
        }
        if r < 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        let slope = (-(p * y.ln()).exp_m1()).powf(-1.0 / p);
        let mut next = y - r / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - y).abs() <= 1e-16 || hi - lo <= 1e-16 {
            return Ok(next);
        }
        y = next;
    }
    Err(Error::Numerical(format!("sin_p inversion did not converge for target {target}")))
}

/// First-eigenfunction profile on `(a, b)` with `cells` cells: `sin_p` on
/// the rising quarter period (the inverse of `F`), reflected about the
/// midpoint, with peak 1.
pub fn sinp_profile(p: f64, interval: (f64, f64), cells: usize) -> Result<(Mesh, Field)> {
    check_p(p)?;
    let (a, b) = interval;
    let mesh = Mesh::interval(a, b, cells)?;
    let total = arcsin_integral(p)?;
    let half = 0.5 * (b - a);
    let values = mesh
        .node_indices()
        .iter()
        .map(|&(i, _)| {
            // distance to the nearer endpoint, in cells, keeps the reflection exact
            let k = i.min(cells - i) as f64;
            let d = k * (b - a) / cells as f64;
            invert_arcsin_p(p, total * (d / half).min(1.0), total)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((mesh, Field::new(values)))
}

/// Maximum over interior nodes of the conservative finite-difference
/// residual `-(φ_p(u'))' - λ φ_p(u)` (with `φ_p(z) = |z|^{p-2} z`),
/// relative to `λ max|u|^{p-1}`.
pub fn ode_residual(u: &Field, mesh: &Mesh, p: f64, lambda: f64) -> Result<f64> {
    if mesh.dim() != 1 {
        return Err(Error::Geometry("ODE residual is defined on intervals".into()));
    }
    let h = mesh.spacing()[0];
    let n = u.len();
    let at = |k: isize| if k < 0 || k as usize >= n { 0.0 } else { u.values()[k as usize] };
    let phi = |z: f64| z.abs().powf(p - 2.0) * z;
    let scale = lambda * u.max_abs().powf(p - 1.0);
    let mut worst = 0.0f64;
    for k in 0..n as isize {
        let right = phi((at(k + 1) - at(k)) / h);
        let left = phi((at(k) - at(k - 1)) / h);
        let r = -(right - left) / h - lambda * phi(at(k));
        worst = worst.max(r.abs());
    }
    Ok(worst / scale)
}
