use serde::Serialize;

use super::norm::{luxemburg_norm_cells, w_inverse, weighted_lp_norm};
use super::params::NFunctionParams;
use crate::discretize::{Field, Mesh};
use crate::error::{domain, Error, Result};
use crate::quad::tanh_sinh;

/// Constant `C` with `‖u‖_H ≤ C ‖u‖_{H̃}` for `H̃ = t^p̃ + a t^q̃`, valid
/// for `p ≤ p̃ < 2p` and `q ≤ q̃ < 2q`.
///
/// With `ε = (p̃ - p)/p` when `q̃/q ≤ p̃/p` (and `ε = (q̃ - q)/q`, `p → q`
/// otherwise) the constant is `ε (|Ω| + ‖a‖₁) + ε^{(p - p̃)/p}`. Identical
/// exponents give 1.
pub fn embedding_constant(htilde: &NFunctionParams, h: &NFunctionParams, omega_measure: f64, a_l1: f64) -> Result<f64> {
    let (pt, qt) = htilde.exponents();
    let (p, q) = h.exponents();
    if htilde.weight() != h.weight() {
        return Err(domain("embedding constant needs the same weight a on both sides"));
    }
    if !(p <= pt && pt < 2.0 * p && q <= qt && qt < 2.0 * q) {
        return Err(domain(format!(
            "embedding needs p <= p~ < 2p and q <= q~ < 2q, got (p, q) = ({p}, {q}), (p~, q~) = ({pt}, {qt})"
        )));
    }
    if !(omega_measure > 0.0 && a_l1 >= 0.0) {
        return Err(domain("|Ω| must be positive and ‖a‖₁ nonnegative"));
    }
    if pt == p && qt == q {
        return Ok(1.0);
    }
    let (base, tilde) = if qt / q <= pt / p { (p, pt) } else { (q, qt) };
    let eps = (tilde - base) / base;
    Ok(eps * (omega_measure + a_l1) + eps.powf((base - tilde) / base))
}

/// The three quotients of the two-sided bound on the Rayleigh ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sandwich {
    /// `(1/w) ‖∇u‖_p / ‖u‖_q`
    pub lower: f64,
    /// `‖∇u‖_H / ‖u‖_H`
    pub mid: f64,
    /// `w ‖∇u‖_q / ‖u‖_p`
    pub upper: f64,
    pub w: f64,
}

/// Lower, middle and upper quotients with `w = 1 + ‖a‖_∞ + |Ω|`. Fails
/// with a contract error if the ordering is violated beyond rounding.
pub fn sandwich_ratios(u: &Field, h: &NFunctionParams, mesh: &Mesh) -> Result<Sandwich> {
    if u.is_zero() {
        return Err(domain("sandwich ratios of the zero field"));
    }
    let (p, q) = h.exponents();
    let cells = mesh.cell_values(u)?;
    let grad = mesh.gradient(u)?;
    let g = grad.magnitude();
    let wc = mesh.cell_measure();
    let w = h.w_constant(mesh);
    let lower = weighted_lp_norm(g, None, p, wc) / (w * weighted_lp_norm(&cells, None, q, wc));
    let upper = w * weighted_lp_norm(g, None, q, wc) / weighted_lp_norm(&cells, None, p, wc);
    let mid = luxemburg_norm_cells(g, h, mesh)?.value / luxemburg_norm_cells(&cells, h, mesh)?.value;
    let slack = 1e-12;
    if !(lower <= mid * (1.0 + slack) && mid <= upper * (1.0 + slack)) {
        return Err(Error::Contract(format!("sandwich violated: {lower} <= {mid} <= {upper}")));
    }
    Ok(Sandwich { lower, mid, upper, w })
}

/// `∫₀^s H⁻¹(x, τ) / τ^{(n+1)/n} dτ` at the quadrature point `x_index`,
/// with `H⁻¹(x, ·)` from [`w_inverse`]. Requires `p < n`.
pub fn sobolev_conjugate_inverse(h: &NFunctionParams, x_index: usize, s: f64, n: usize) -> Result<f64> {
    let (p, q) = h.exponents();
    if !(p < n as f64) {
        return Err(domain(format!("Sobolev conjugate needs p < n, got p = {p}, n = {n}")));
    }
    if !(s >= 0.0 && s.is_finite()) {
        return Err(domain(format!("upper limit must be finite and nonnegative, got {s}")));
    }
    let a = *h
        .weight()
        .values()
        .get(x_index)
        .ok_or_else(|| domain(format!("no quadrature point {x_index}")))?;
    if s == 0.0 {
        return Ok(0.0);
    }
    let e = (n as f64 + 1.0) / n as f64;
    let failed = std::cell::Cell::new(None);
    let integrand = |_: f64, tau: f64, _: f64| match w_inverse(tau, p, q, a) {
        Ok(t) if t > 0.0 => (t.ln() - e * tau.ln()).exp(),
        Ok(_) => 0.0,
        Err(err) => {
            failed.set(Some(err.to_string()));
            0.0
        }
    };
    let quad = tanh_sinh(integrand, 0.0, s, 1e-13, 12)?;
    if let Some(msg) = failed.take() {
        return Err(Error::Numerical(msg));
    }
    Ok(quad.value)
}
