//! First eigenpairs of the double-phase operator by minimising the
//! Rayleigh ratio `‖∇u‖_H / ‖u‖_H`, and subspace-minimax upper bounds for
//! the higher variational eigenvalues.
//!
//! All functionals are evaluated on the cell quadrature samples of
//! [`Mesh`]; the discrete problem is the exact minimisation of the
//! discrete ratio, so the first-order conditions hold to rounding at a
//! converged minimiser.

mod descent;
mod functional;
mod minimax;
mod modes;
mod precond;

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::discretize::io::{write_samples, SampleKind};
use crate::discretize::{Field, Mesh};
use crate::error::{domain, Error, Result};
use crate::orlicz::{luxemburg_norm_cells, rescaled_norm_cells, NFunctionParams};

pub use functional::NormKind;
use functional::Functional;
use precond::{Banded, Operator};

/// Knobs of [`first_eigenpair`] and [`minimax_upper_bound`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Relative change of `λ` between accepted steps.
    pub tol_lambda: f64,
    /// Bound on [`weak_residual`].
    pub tol_residual: f64,
    pub max_iter: usize,
    pub restarts: usize,
    pub rng_seed: u64,
    /// First trial step of every line search.
    pub armijo_step: f64,
    pub armijo_shrink: f64,
    pub armijo_slope: f64,
    /// Amplitude of the seeded perturbation of the starting mode.
    pub noise: f64,
    /// Frame updates in the minimax descent.
    pub minimax_outer_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol_lambda: 1e-10,
            tol_residual: 1e-6,
            max_iter: 5000,
            restarts: 5,
            rng_seed: 0,
            armijo_step: 1.0,
            armijo_shrink: 0.5,
            armijo_slope: 1e-4,
            noise: 0.05,
            minimax_outer_iter: 40,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tol_lambda", self.tol_lambda),
            ("tol_residual", self.tol_residual),
            ("armijo_step", self.armijo_step),
            ("armijo_slope", self.armijo_slope),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(domain(format!("solver.{name} must be positive, got {v}")));
            }
        }
        if !(self.armijo_shrink > 0.0 && self.armijo_shrink < 1.0) {
            return Err(domain(format!("solver.armijo_shrink must lie in (0, 1), got {}", self.armijo_shrink)));
        }
        if !(self.armijo_slope < 1.0) {
            return Err(domain(format!("solver.armijo_slope must be below 1, got {}", self.armijo_slope)));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(domain(format!("solver.noise must be nonnegative, got {}", self.noise)));
        }
        if self.restarts == 0 {
            return Err(domain("solver.restarts must be at least 1"));
        }
        if self.max_iter == 0 {
            return Err(domain("solver.max_iter must be at least 1"));
        }
        Ok(())
    }
}

/// A computed first eigenpair with `‖u‖ = 1` and `λ = ‖∇u‖` in the norm
/// named by `kind`.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub lambda: f64,
    pub u: Field,
    pub residual: f64,
    /// Descent steps of the winning restart.
    pub iterations: usize,
    pub converged: bool,
    pub s_of_u: f64,
    pub kind: NormKind,
    pub seed: u64,
    /// Largest minus smallest `λ` over the restarts.
    pub restart_spread: f64,
}

#[derive(Serialize)]
struct Metadata<'a> {
    schema: u32,
    p: f64,
    q: f64,
    weight: String,
    mesh: String,
    norm: &'a str,
    lambda: f64,
    residual: f64,
    s_of_u: f64,
    iterations: usize,
    converged: bool,
    restart_spread: f64,
    seed: u64,
}

impl Eigenpair {
    /// Nodal values in the versioned sample format.
    pub fn write_csv<W: Write>(&self, out: W, mesh: &Mesh) -> Result<()> {
        write_samples(out, mesh, SampleKind::Node, self.u.values())
    }

    /// The sidecar record as pretty-printed JSON text.
    pub fn metadata_json(&self, h: &NFunctionParams, mesh: &Mesh, weight: &str) -> Result<String> {
        let (p, q) = h.exponents();
        let meta = Metadata {
            schema: crate::discretize::io::SCHEMA_VERSION,
            p,
            q,
            weight: weight.to_string(),
            mesh: mesh.descriptor(),
            norm: match self.kind {
                NormKind::Standard => "standard",
                NormKind::Rescaled => "rescaled",
            },
            lambda: self.lambda,
            residual: self.residual,
            s_of_u: self.s_of_u,
            iterations: self.iterations,
            converged: self.converged,
            restart_spread: self.restart_spread,
            seed: self.seed,
        };
        Ok(serde_json::to_string_pretty(&meta)?)
    }
}

fn nonzero_field(u: &Field, mesh: &Mesh) -> Result<()> {
    if u.len() != mesh.node_count() {
        return Err(Error::Shape { expected: mesh.node_count(), got: u.len() });
    }
    if !u.is_finite() {
        return Err(domain("field has non-finite values"));
    }
    if u.is_zero() {
        return Err(domain("the zero field has no Rayleigh ratio"));
    }
    Ok(())
}

/// `‖∇u‖_H / ‖u‖_H` with the bisection norm engine.
pub fn rayleigh(u: &Field, h: &NFunctionParams, mesh: &Mesh) -> Result<f64> {
    nonzero_field(u, mesh)?;
    h.check_mesh(mesh)?;
    let cells = mesh.cell_values(u)?;
    let grad = mesh.gradient(u)?;
    let den = luxemburg_norm_cells(&cells, h, mesh)?.value;
    if den == 0.0 {
        return Err(domain("field vanishes on every quadrature cell"));
    }
    Ok(luxemburg_norm_cells(grad.magnitude(), h, mesh)?.value / den)
}

/// `S(u)` for `u` on the unit sphere with `λ = ‖∇u‖_H`.
pub fn s_of_u(u: &Field, lambda: f64, h: &NFunctionParams, mesh: &Mesh) -> Result<f64> {
    nonzero_field(u, mesh)?;
    h.check_mesh(mesh)?;
    let k = luxemburg_norm_cells(&mesh.cell_values(u)?, h, mesh)?.value;
    let big_k = luxemburg_norm_cells(mesh.gradient(u)?.magnitude(), h, mesh)?.value;
    if (k - 1.0).abs() > 1e-6 {
        return Err(Error::Contract(format!("S(u) needs ‖u‖_H = 1, got {k}")));
    }
    if (big_k - lambda).abs() > 1e-6 * lambda.abs().max(1.0) {
        return Err(Error::Contract(format!("S(u) needs λ = ‖∇u‖_H, got λ = {lambda}, ‖∇u‖_H = {big_k}")));
    }
    Ok(Functional::new(mesh, h, NormKind::Standard).s_of_u(u.values()))
}

fn pair_args(u: &Field, v: &Field, h: &NFunctionParams, mesh: &Mesh) -> Result<()> {
    nonzero_field(u, mesh)?;
    h.check_mesh(mesh)?;
    if v.len() != mesh.node_count() {
        return Err(Error::Shape { expected: mesh.node_count(), got: v.len() });
    }
    Ok(())
}

/// `⟨k'(u), v⟩` for `k = ‖·‖_H`.
pub fn kprime_pairing(u: &Field, v: &Field, h: &NFunctionParams, mesh: &Mesh) -> Result<f64> {
    pair_args(u, v, h, mesh)?;
    Ok(Functional::new(mesh, h, NormKind::Standard).k_pairing(u.values(), v.values()))
}

/// `⟨K'(u), v⟩` for `K = ‖∇·‖_H`.
pub fn big_kprime_pairing(u: &Field, v: &Field, h: &NFunctionParams, mesh: &Mesh) -> Result<f64> {
    pair_args(u, v, h, mesh)?;
    let f = Functional::new(mesh, h, NormKind::Standard);
    if f.big_k(u.values()) == 0.0 {
        return Err(domain("∇u vanishes identically"));
    }
    Ok(f.big_k_pairing(u.values(), v.values()))
}

/// Pairing versus central difference quotient for `k` and `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeCheck {
    pub k_analytic: f64,
    pub k_numeric: f64,
    pub big_k_analytic: f64,
    pub big_k_numeric: f64,
}

/// Compares the pairings with `(F(u + εv) - F(u - εv)) / 2ε`.
pub fn directional_derivative_check(
    u: &Field,
    v: &Field,
    h: &NFunctionParams,
    mesh: &Mesh,
    eps: f64,
) -> Result<DerivativeCheck> {
    pair_args(u, v, h, mesh)?;
    let f = Functional::new(mesh, h, NormKind::Standard);
    let shift = |s: f64| -> Vec<f64> { u.values().iter().zip(v.values()).map(|(a, b)| a + s * b).collect() };
    let (plus, minus) = (shift(eps), shift(-eps));
    Ok(DerivativeCheck {
        k_analytic: f.k_pairing(u.values(), v.values()),
        k_numeric: (f.k(&plus) - f.k(&minus)) / (2.0 * eps),
        big_k_analytic: f.big_k_pairing(u.values(), v.values()),
        big_k_numeric: (f.big_k(&plus) - f.big_k(&minus)) / (2.0 * eps),
    })
}

/// Largest nodal defect of the weak Euler–Lagrange equation, each
/// normalised by the absolute size of the terms it balances.
pub fn weak_residual(u: &Field, lambda: f64, h: &NFunctionParams, mesh: &Mesh) -> Result<f64> {
    nonzero_field(u, mesh)?;
    h.check_mesh(mesh)?;
    Ok(Functional::new(mesh, h, NormKind::Standard).weak_residual(u.values(), lambda))
}

/// `♯{m : λ_m < λ}` for an ascending list.
pub fn spectrum_counting(lambdas: &[f64], lambda: f64) -> usize {
    lambdas.partition_point(|&l| l < lambda)
}

/// First eigenpair for the Luxemburg norm of `H`.
pub fn first_eigenpair(mesh: &Mesh, h: &NFunctionParams, opts: &SolverOptions) -> Result<Eigenpair> {
    solve_first(mesh, h, opts, NormKind::Standard)
}

/// First eigenpair for the rescaled norm (modular divided by
/// `|Ω| + ‖a‖₁`).
pub fn first_eigenpair_rescaled(mesh: &Mesh, h: &NFunctionParams, opts: &SolverOptions) -> Result<Eigenpair> {
    solve_first(mesh, h, opts, NormKind::Rescaled)
}

fn setup(mesh: &Mesh, h: &NFunctionParams, opts: &SolverOptions) -> Result<(Operator, Banded)> {
    opts.validate()?;
    h.check_mesh(mesh)?;
    if mesh.node_count() == 0 {
        return Err(Error::Geometry("mesh has no interior nodes".into()));
    }
    let op = Operator::new(mesh);
    let pc = op.factor(1.0)?;
    Ok((op, pc))
}

fn solve_first(mesh: &Mesh, h: &NFunctionParams, opts: &SolverOptions, kind: NormKind) -> Result<Eigenpair> {
    let (op, _) = setup(mesh, h, opts)?;
    let mode = modes::laplace_modes(&op, 1)?.remove(0);
    let f = Functional::new(mesh, h, kind);
    let runs: Vec<descent::Run> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let start = descent::seeded_start(&mode, opts.rng_seed, r, opts.noise);
            descent::descend(&f, &op, &start, opts)
        })
        .collect();
    let finite: Vec<&descent::Run> = runs.iter().filter(|r| r.lambda.is_finite()).collect();
    if finite.is_empty() {
        return Err(Error::Numerical("every restart produced a non-finite Rayleigh ratio".into()));
    }
    let lo = finite.iter().map(|r| r.lambda).fold(f64::INFINITY, f64::min);
    let hi = finite.iter().map(|r| r.lambda).fold(f64::NEG_INFINITY, f64::max);
    // lowest λ wins; earlier restarts win ties
    let best = finite.iter().copied().fold(None::<&descent::Run>, |b, r| match b {
        Some(b) if b.lambda <= r.lambda => Some(b),
        _ => Some(r),
    });
    let best = best.expect("nonempty");

    let sign = if best.x.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let abs: Vec<f64> = best.x.iter().map(|v| (sign * v).abs()).collect();
    let k = f.k(&abs);
    let x: Vec<f64> = abs.iter().map(|v| v / k).collect();
    let lambda = f.big_k(&x);
    let residual = f.weak_residual(&x, lambda);
    let converged = best.converged && residual <= opts.tol_residual;
    let s = f.s_of_u(&x);

    // the norms must also hold for the bisection engine
    let cells = mesh.cell_values_raw(&x);
    let grads: Vec<f64> = mesh.gradient_raw(&x).iter().map(|g| g[0].hypot(g[1])).collect();
    let (kn, kg) = match kind {
        NormKind::Standard => {
            (luxemburg_norm_cells(&cells, h, mesh)?.value, luxemburg_norm_cells(&grads, h, mesh)?.value)
        }
        NormKind::Rescaled => (rescaled_norm_cells(&cells, h, mesh)?, rescaled_norm_cells(&grads, h, mesh)?),
    };
    if (kn - 1.0).abs() > 1e-9 || (kg - lambda).abs() > 1e-9 * lambda {
        return Err(Error::Numerical(format!(
            "norm engines disagree at the solution: ‖u‖ = {kn}, ‖∇u‖ = {kg}, λ = {lambda}"
        )));
    }
    Ok(Eigenpair {
        lambda,
        u: Field::new(x),
        residual,
        iterations: best.iterations,
        converged,
        s_of_u: s,
        kind,
        seed: opts.rng_seed,
        restart_spread: hi - lo,
    })
}

/// Upper bound for the `m`-th variational eigenvalue: the smallest
/// subspace maximum of the Rayleigh ratio found by descent over
/// `m`-dimensional trial spaces seeded with the lowest Laplace modes.
///
/// Only an upper bound: the inner maxima come from a finite multi-start
/// ascent.
pub fn minimax_upper_bound(mesh: &Mesh, h: &NFunctionParams, m: usize, opts: &SolverOptions) -> Result<f64> {
    if m == 0 || m > mesh.node_count() {
        return Err(domain(format!("m must lie in 1..={}, got {m}", mesh.node_count())));
    }
    let (op, pc) = setup(mesh, h, opts)?;
    let seed = modes::laplace_modes(&op, m)?;
    let f = Functional::new(mesh, h, NormKind::Standard);
    Ok(minimax::minimax(&f, &op, &pc, seed, opts))
}

/// Bounds for `m = 1..=m_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimaxTable {
    /// Per-`m` values as computed.
    pub raw: Vec<f64>,
    /// `bounds[m-1] = min(raw[m-1..])`: still an upper bound for `λ^m`
    /// since `λ^m ≤ λ^{m'}` for `m ≤ m'`, and non-decreasing.
    pub bounds: Vec<f64>,
}

pub fn minimax_table(mesh: &Mesh, h: &NFunctionParams, m_max: usize, opts: &SolverOptions) -> Result<MinimaxTable> {
    if m_max == 0 || m_max > mesh.node_count() {
        return Err(domain(format!("m_max must lie in 1..={}, got {m_max}", mesh.node_count())));
    }
    let raw: Vec<f64> = (1..=m_max)
        .into_par_iter()
        .map(|m| minimax_upper_bound(mesh, h, m, opts))
        .collect::<Result<_>>()?;
    let mut bounds = raw.clone();
    for i in (0..bounds.len().saturating_sub(1)).rev() {
        bounds[i] = bounds[i].min(bounds[i + 1]);
    }
    Ok(MinimaxTable { raw, bounds })
}
