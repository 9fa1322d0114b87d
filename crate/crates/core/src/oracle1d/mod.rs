//! Exact and semi-analytic 1D p-Laplacian eigenpairs: `π_p`, the `sin_p`
//! profile and a shooting solver. These are the ground truth for the
//! generic eigensolver.
//!
//! For `-(|u'|^{p-2} u')' = λ |u|^{p-2} u` on `(0, L)` the eigenvalues are
//! `λ_m = (m π_p / L)^p`.

mod pip;
mod shooting;

use std::io::Write;

pub use pip::{arcsin_integral, ode_residual, pi_p, pi_p_at_level, sinp_profile, PiP};
pub use shooting::{plap_shooting, sign_changes, ShootingEigenpair};

use crate::error::Result;

/// `λ_m = (m π_p / L)^p` from the closed form of `π_p`.
pub fn exact_lambda(p: f64, length: f64, m: usize) -> Result<f64> {
    let pi = pi_p(p)?.value;
    Ok((m as f64 * pi / length).powf(p))
}

/// The alternative first-eigenvalue formula `(π_p / L)^{p-1}`, kept only
/// for side-by-side comparison with the shooting value.
pub fn literature_formula(p: f64, length: f64) -> Result<f64> {
    Ok((pi_p(p)?.value / length).powf(p - 1.0))
}

/// One row of the oracle fixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleRow {
    pub p: f64,
    pub m: usize,
    pub length: f64,
    pub lambda: f64,
}

/// Shooting eigenvalues for every `(p, m, L)` combination, computed in
/// parallel and returned in input order.
pub fn oracle_table(ps: &[f64], ms: &[usize], lengths: &[f64]) -> Result<Vec<OracleRow>> {
    use rayon::prelude::*;
    let jobs: Vec<(f64, usize, f64)> = ps
        .iter()
        .flat_map(|&p| ms.iter().flat_map(move |&m| lengths.iter().map(move |&l| (p, m, l))))
        .collect();
    jobs.par_iter()
        .map(|&(p, m, length)| {
            let e = plap_shooting(p, (0.0, length), m, 16)?;
            Ok(OracleRow { p, m, length, lambda: e.lambda_ode })
        })
        .collect()
}

/// Writes the fixture as `p,m,L,lambda` under a `# schema=1` preamble.
pub fn write_oracle_table<W: Write>(mut out: W, rows: &[OracleRow]) -> Result<()> {
    writeln!(out, "# schema=1 kind=oracle1d")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["p", "m", "L", "lambda"])?;
    for r in rows {
        w.write_record([r.p.to_string(), r.m.to_string(), r.length.to_string(), r.lambda.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
