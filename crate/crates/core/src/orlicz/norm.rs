//! Modulars and Luxemburg norms on quadrature samples.
//!
//! All norms are computed on the per-cell samples `u_c` (midpoint rule),
//! after scaling by `max |u_c|` so that arbitrarily large exponents never
//! overflow.

use serde::Serialize;

use super::params::NFunctionParams;
use crate::discretize::{Field, Mesh};
use crate::error::{domain, Error, Result};

const MAX_EXPANSIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    Bisection,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormResult {
    pub value: f64,
    pub method: NormMethod,
    /// `ρ(u / value)`; 0 for the zero field.
    pub modular_at_unit: f64,
}

fn check_samples(samples: &[f64], h: &NFunctionParams, mesh: &Mesh) -> Result<()> {
    h.check_mesh(mesh)?;
    if samples.len() != mesh.cell_count() {
        return Err(Error::Shape { expected: mesh.cell_count(), got: samples.len() });
    }
    if let Some(v) = samples.iter().find(|v| !v.is_finite()) {
        return Err(domain(format!("non-finite sample {v}")));
    }
    Ok(())
}

/// `t^e` for `t ≥ 0`, with `0 * ∞` read as 0 by the callers.
#[inline]
fn pow(t: f64, e: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.powf(e)
    }
}

/// `Σ_c w (|s_c|^p + a_c |s_c|^q)` for the samples divided by `gamma`.
fn modular_scaled(samples: &[f64], weight: &[f64], w: f64, p: f64, q: f64, gamma: f64) -> f64 {
    let sum: f64 = samples
        .iter()
        .zip(weight)
        .map(|(&s, &a)| {
            let t = s.abs() / gamma;
            let tq = if a == 0.0 { 0.0 } else { a * pow(t, q) };
            pow(t, p) + tq
        })
        .sum();
    w * sum
}

/// Quadrature of `∫ H(x, |u|)` from cell samples.
pub fn modular_cells(samples: &[f64], h: &NFunctionParams, mesh: &Mesh) -> Result<f64> {
    check_samples(samples, h, mesh)?;
    let (p, q) = h.exponents();
    Ok(modular_scaled(samples, h.weight().values(), mesh.cell_measure(), p, q, 1.0))
}

/// `ρ_H(u)` with nodal values averaged to cell centres.
pub fn modular(u: &Field, h: &NFunctionParams, mesh: &Mesh) -> Result<f64> {
    modular_cells(&mesh.cell_values(u)?, h, mesh)
}

/// Lumped nodal quadrature `Σ_nodes |cell| (|u_i|^p + a_i |u_i|^q)`.
///
/// Rearrangements permute nodal values, so this is the modular they
/// preserve exactly.
pub fn modular_nodal(u: &Field, h: &NFunctionParams, mesh: &Mesh) -> Result<f64> {
    h.check_mesh(mesh)?;
    if u.len() != mesh.node_count() {
        return Err(Error::Shape { expected: mesh.node_count(), got: u.len() });
    }
    let (p, q) = h.exponents();
    Ok(modular_scaled(u.values(), h.weight().node_values(), mesh.cell_measure(), p, q, 1.0))
}

/// Discrete `L^r` norm of cell samples.
pub fn lp_norm_cells(samples: &[f64], r: f64, mesh: &Mesh) -> f64 {
    weighted_lp_norm(samples, None, r, mesh.cell_measure())
}

/// `(Σ w a |s|^r)^{1/r}`, evaluated after scaling by the largest sample.
pub(crate) fn weighted_lp_norm(samples: &[f64], weight: Option<&[f64]>, r: f64, w: f64) -> f64 {
    let m = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if m == 0.0 {
        return 0.0;
    }
    let sum: f64 = match weight {
        None => samples.iter().map(|s| pow(s.abs() / m, r)).sum(),
        Some(a) => samples
            .iter()
            .zip(a)
            .map(|(s, &a)| if a == 0.0 { 0.0 } else { a * pow(s.abs() / m, r) })
            .sum(),
    };
    m * (w * sum).powf(1.0 / r)
}

/// Luxemburg norm by bracketing and bisection of `γ ↦ factor·ρ(u/γ) - 1`.
fn bisection_norm(samples: &[f64], h: &NFunctionParams, mesh: &Mesh, factor: f64) -> Result<f64> {
    let m = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if m == 0.0 {
        return Ok(0.0);
    }
    let (p, q) = h.exponents();
    let a = h.weight().values();
    let w = factor * mesh.cell_measure();
    // work with y = u/m and s = m/γ: ρ(u/γ) = Σ w H(x, y s)
    let y: Vec<f64> = samples.iter().map(|s| s.abs() / m).collect();
    let rho = |s: f64| modular_scaled(&y, a, w, p, q, 1.0 / s);

    let lp = weighted_lp_norm(&y, None, p, w);
    let lq = weighted_lp_norm(&y, Some(a), q, w);
    let gamma0 = lp.max(lq * (1.0 + h.weight().sup_norm()));
    let mut lo = 1.0 / gamma0;
    let mut hi = lo;
    let mut expansions = 0;
    while rho(lo) > 1.0 {
        lo *= 0.5;
        expansions += 1;
        if expansions > MAX_EXPANSIONS {
            return Err(Error::NumericalRange(MAX_EXPANSIONS));
        }
    }
    while rho(hi) < 1.0 {
        hi *= 2.0;
        expansions += 1;
        if expansions > MAX_EXPANSIONS {
            return Err(Error::NumericalRange(MAX_EXPANSIONS));
        }
    }
    for _ in 0..200 {
        if hi / lo - 1.0 <= 1e-15 {
            break;
        }
        let mid = (lo * hi).sqrt();
        let mid = if mid > lo && mid < hi { mid } else { 0.5 * (lo + hi) };
        if mid <= lo || mid >= hi {
            break;
        }
        if rho(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(m / (0.5 * (lo + hi)))
}

fn norm_result(samples: &[f64], h: &NFunctionParams, mesh: &Mesh, value: f64, method: NormMethod) -> NormResult {
    let modular_at_unit = if value > 0.0 {
        let (p, q) = h.exponents();
        modular_scaled(samples, h.weight().values(), mesh.cell_measure(), p, q, value)
    } else {
        0.0
    };
    NormResult { value, method, modular_at_unit }
}

/// Luxemburg norm of cell samples by bisection.
pub fn luxemburg_norm_cells(samples: &[f64], h: &NFunctionParams, mesh: &Mesh) -> Result<NormResult> {
    check_samples(samples, h, mesh)?;
    let value = bisection_norm(samples, h, mesh, 1.0)?;
    Ok(norm_result(samples, h, mesh, value, NormMethod::Bisection))
}

/// `‖u‖_H = inf{γ > 0 : ρ_H(u/γ) ≤ 1}`, by bisection.
pub fn luxemburg_norm(u: &Field, h: &NFunctionParams, mesh: &Mesh) -> Result<NormResult> {
    luxemburg_norm_cells(&mesh.cell_values(u)?, h, mesh)
}

/// Norm with respect to the rescaled modular `ρ / (|Ω| + ‖a‖₁)`.
pub fn rescaled_norm_cells(samples: &[f64], h: &NFunctionParams, mesh: &Mesh) -> Result<f64> {
    check_samples(samples, h, mesh)?;
    bisection_norm(samples, h, mesh, 1.0 / h.rescale_constant(mesh))
}

pub fn rescaled_norm(u: &Field, h: &NFunctionParams, mesh: &Mesh) -> Result<f64> {
    rescaled_norm_cells(&mesh.cell_values(u)?, h, mesh)
}

/// Closed form `‖u‖_p Θ / W⁻¹(Θ^p)` with
/// `Θ = (‖a^{1/q} u‖_q / ‖u‖_p)^{q/(q-p)}` and `W(t) = t^p + t^q`.
pub fn closed_form_norm_cells(samples: &[f64], h: &NFunctionParams, mesh: &Mesh) -> Result<NormResult> {
    check_samples(samples, h, mesh)?;
    let (p, q) = h.exponents();
    if p == q {
        return Err(Error::DegenerateExponent(p));
    }
    let m = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if m == 0.0 {
        return Ok(NormResult { value: 0.0, method: NormMethod::ClosedForm, modular_at_unit: 0.0 });
    }
    let w = mesh.cell_measure();
    let y: Vec<f64> = samples.iter().map(|s| s / m).collect();
    let lp = weighted_lp_norm(&y, None, p, w);
    let lq = weighted_lp_norm(&y, Some(h.weight().values()), q, w);
    if lq == 0.0 {
        return Err(Error::FallbackRequired);
    }
    let ln_theta = q / (q - p) * (lq.ln() - lp.ln());
    let theta_p = (p * ln_theta).exp();
    if !theta_p.is_finite() {
        return Err(Error::Numerical(format!("Θ^p overflows (ln Θ = {ln_theta})")));
    }
    let t = w_inverse(theta_p, p, q, 1.0)?;
    let value = m * lp * ln_theta.exp() / t;
    Ok(norm_result(samples, h, mesh, value, NormMethod::ClosedForm))
}

pub fn closed_form_norm(u: &Field, h: &NFunctionParams, mesh: &Mesh) -> Result<NormResult> {
    closed_form_norm_cells(&mesh.cell_values(u)?, h, mesh)
}

/// Solves `α s^p + β s^q = 1` for `x = ln s`, given `ln α` and `ln β`
/// (either may be `-∞`, not both). Log-space bisection until the bracket
/// is narrower than 1e-3, then safeguarded Newton; 60 iterations at most.
pub(crate) fn solve_two_term(ln_alpha: f64, p: f64, ln_beta: f64, q: f64) -> f64 {
    if ln_beta == f64::NEG_INFINITY {
        return -ln_alpha / p;
    }
    if ln_alpha == f64::NEG_INFINITY {
        return -ln_beta / q;
    }
    // hi: each term alone reaches 1; lo: both terms at most 1/(α+β)
    let mut hi = (-ln_alpha / p).min(-ln_beta / q);
    let ln_sum = ln_alpha.max(ln_beta) + (-(ln_alpha - ln_beta).abs()).exp().ln_1p();
    let mut lo = (-ln_sum / p).min(-ln_sum / q);
    let g = |x: f64| {
        let (ta, tb) = ((ln_alpha + p * x).exp(), (ln_beta + q * x).exp());
        (ta + tb - 1.0, p * ta + q * tb)
    };
    let mut x = 0.5 * (lo + hi);
    for _ in 0..60 {
        if hi - lo > 1e-3 {
            x = 0.5 * (lo + hi);
            if g(x).0 < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            continue;
        }
        let (val, slope) = g(x);
        if val == 0.0 {
            return x;
        }
        if val < 0.0 {
            lo = lo.max(x);
        } else {
            hi = hi.min(x);
        }
        let mut next = x - val / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-16 * x.abs().max(1.0) {
            return next;
        }
        x = next;
    }
    x
}

/// The unique `t ≥ 0` with `t^p + weight·t^q = y`.
pub fn w_inverse(y: f64, p: f64, q: f64, weight: f64) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(domain(format!("w_inverse needs y >= 0, got {y}")));
    }
    if !(p > 1.0 && p <= q) || !(weight >= 0.0) {
        return Err(domain(format!("w_inverse needs 1 < p <= q and weight >= 0, got p = {p}, q = {q}, weight = {weight}")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let ln_y = y.ln();
    Ok(solve_two_term(-ln_y, p, weight.ln() - ln_y, q).exp())
}

/// Luxemburg norm of samples through the two moments
/// `P = Σ w |s/m|^p`, `Q = Σ w a |s/m|^q` (the root of `Pσ^p + Qσ^q = 1`
/// in `σ = m/γ`). Agrees with the bisection engine to rounding and is the
/// fast path used inside the eigensolver.
pub fn moment_norm(samples: &[f64], weight: &[f64], cell_measure: f64, p: f64, q: f64, factor: f64) -> f64 {
    let m = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if m == 0.0 {
        return 0.0;
    }
    let (mut sp, mut sq) = (0.0, 0.0);
    for (&s, &a) in samples.iter().zip(weight) {
        let y = s.abs() / m;
        sp += pow(y, p);
        if a != 0.0 {
            sq += a * pow(y, q);
        }
    }
    let w = factor * cell_measure;
    let x = solve_two_term((w * sp).ln(), p, (w * sq).ln(), q);
    m * (-x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orlicz::WeightField;

    fn setup(p: f64, q: f64, a: f64, n: usize) -> (Mesh, NFunctionParams) {
        let m = Mesh::interval(0.0, 1.0, n).unwrap();
        let w = WeightField::constant(&m, a).unwrap();
        (m.clone(), NFunctionParams::relaxed(p, q, w).unwrap())
    }

    #[test]
    fn trivial_modulars() {
        let (m, h) = setup(2.0, 3.0, 0.0, 8);
        assert_eq!(modular_cells(&[0.0; 8], &h, &m).unwrap(), 0.0);
        assert!((modular_cells(&[1.0; 8], &h, &m).unwrap() - 1.0).abs() < 1e-15);
        let (m, h) = setup(2.0, 3.0, 1.0, 8);
        assert!((modular_cells(&[1.0; 8], &h, &m).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(modular_cells(&[1.0; 7], &h, &m), Err(Error::Shape { .. })));
    }

    #[test]
    fn zero_weight_gives_lp_norm() {
        let (m, h) = setup(2.5, 4.0, 0.0, 16);
        let s: Vec<f64> = (0..16).map(|k| (k as f64 * 0.7).sin()).collect();
        let n = luxemburg_norm_cells(&s, &h, &m).unwrap().value;
        let lp = lp_norm_cells(&s, 2.5, &m);
        assert!((n - lp).abs() < 1e-13 * lp);
        assert!(matches!(closed_form_norm_cells(&s, &h, &m), Err(Error::FallbackRequired)));
    }

    #[test]
    fn w_inverse_examples() {
        assert_eq!(w_inverse(0.0, 2.0, 4.0, 1.0).unwrap(), 0.0);
        assert!((w_inverse(2.0, 2.0, 4.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(w_inverse(-1.0, 2.0, 4.0, 1.0).is_err());
        for &(y, p, q, c) in &[(1e-30, 1.5, 7.0, 3.0), (1e30, 2.0, 48.0, 0.5), (3.0, 2.0, 2.0, 1.0), (5.0, 1.1, 1.2, 0.0)] {
            let t = w_inverse(y, p, q, c).unwrap();
            let back = t.powf(p) + c * t.powf(q);
            assert!((back - y).abs() <= 1e-13 * y, "{y} {p} {q} {c}: {back}");
        }
    }

    #[test]
    fn moment_path_matches_bisection() {
        let (m, h) = setup(1.7, 3.1, 0.6, 32);
        let s: Vec<f64> = (0..32).map(|k| 3.0 * (k as f64 * 0.37).cos()).collect();
        let b = luxemburg_norm_cells(&s, &h, &m).unwrap().value;
        let f = moment_norm(&s, h.weight().values(), m.cell_measure(), 1.7, 3.1, 1.0);
        assert!((b - f).abs() < 1e-13 * b);
    }

    #[test]
    fn huge_exponents_do_not_overflow() {
        let (m, h) = setup(2.0, 3.0, 1.0, 64);
        let h = h.with_scale(16).unwrap();
        let s: Vec<f64> = (0..64).map(|k| 50.0 * ((k as f64 + 0.5) / 64.0 * std::f64::consts::PI).sin()).collect();
        let r = luxemburg_norm_cells(&s, &h, &m).unwrap();
        assert!(r.value.is_finite() && r.value > 0.0);
        assert!((r.modular_at_unit - 1.0).abs() < 1e-12);
        let t = rescaled_norm_cells(&s, &h, &m).unwrap();
        assert!(t <= 50.0 && t > 40.0, "{t}");
    }
}
