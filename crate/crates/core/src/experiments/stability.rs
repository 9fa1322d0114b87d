use rayon::prelude::*;

use super::report::{Check, ExperimentReport, Series};
use super::{phase_on, resolution_of};
use crate::discretize::Mesh;
use crate::eigensolver::{first_eigenpair, Eigenpair, SolverOptions};
use crate::error::{domain, Result};
use crate::orlicz::WeightSpec;

/// First eigenvalue for `(p_h, q_h) = (p + δ₀/h, q + δ₀/h)`, `h = 1..=steps`,
/// against the limit `(p, q)` on a fixed mesh.
///
/// Checks: relative gap at `h = steps` at most 1%, gaps non-increasing from
/// `h = 4` on (slack: twice the λ tolerance), every row converged.
pub fn run_stability(
    p: f64,
    q: f64,
    steps: usize,
    delta0: f64,
    mesh: &Mesh,
    weight: &WeightSpec,
    opts: &SolverOptions,
) -> Result<ExperimentReport> {
    if steps == 0 {
        return Err(domain("stability needs at least one step"));
    }
    if !(delta0 >= 0.0 && delta0.is_finite()) {
        return Err(domain(format!("delta0 must be finite and nonnegative, got {delta0}")));
    }
    let limit_h = phase_on(mesh, p, q, weight)?;
    let shifted: Vec<_> = (1..=steps)
        .map(|h| phase_on(mesh, p + delta0 / h as f64, q + delta0 / h as f64, weight))
        .collect::<Result<_>>()?;

    let (limit, rows) = rayon::join(
        || first_eigenpair(mesh, &limit_h, opts),
        || shifted.par_iter().map(|hh| first_eigenpair(mesh, hh, opts)).collect::<Result<Vec<Eigenpair>>>(),
    );
    let (limit, rows) = (limit?, rows?);

    let mut report = ExperimentReport::new(
        "stability",
        &["h", "p_h", "q_h"],
        &["lambda", "gap", "rel_gap", "residual"],
        opts.rng_seed,
        resolution_of(mesh),
    );
    report.push_row("limit", vec![f64::INFINITY, p, q], vec![limit.lambda, 0.0, 0.0, limit.residual], limit.converged);
    let mut gaps = Vec::with_capacity(steps);
    for (k, e) in rows.iter().enumerate() {
        let h = (k + 1) as f64;
        let gap = (e.lambda - limit.lambda).abs();
        gaps.push(gap);
        report.push_row(
            format!("h={}", k + 1),
            vec![h, p + delta0 / h, q + delta0 / h],
            vec![e.lambda, gap, gap / limit.lambda, e.residual],
            e.converged,
        );
    }
    let last = gaps[steps - 1] / limit.lambda;
    report.check(Check::at_most("final_relative_gap", last, 0.01, 0.0));
    if steps > 4 {
        let slack = 2.0 * opts.tol_lambda * limit.lambda + 1e-12;
        let rise = gaps[3..].windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        report.check(Check::at_most("gaps_nonincreasing_from_h4", rise, 0.0, slack));
    }
    report.check_rows_converged();
    report.summarize("lambda_limit", limit.lambda);
    report.summarize("final_relative_gap", last);
    report.x_label = "h".into();
    report.y_label = "lambda".into();
    report.series.push(Series {
        name: "lambda_h".into(),
        points: rows.iter().enumerate().map(|(k, e)| ((k + 1) as f64, e.lambda)).collect(),
    });
    report.series.push(Series { name: "limit".into(), points: vec![(1.0, limit.lambda), (steps as f64, limit.lambda)] });
    Ok(report)
}
