use rayon::prelude::*;

use super::report::{Check, ExperimentReport, Series};
use super::{max_relative_increase, phase_on, resolution_of};
use crate::discretize::{Geometry, Mesh};
use crate::eigensolver::{first_eigenpair, SolverOptions};
use crate::error::{domain, Error, Result};
use crate::oracle1d::plap_shooting;
use crate::orlicz::WeightSpec;

/// `(0, 1 - 1/h)` for each `h`, then `(0, 1)`, all with cell size
/// `1/cells_per_unit`. Each `(1 - 1/h)·cells_per_unit` must be an integer.
pub fn interval_family(hs: &[usize], cells_per_unit: usize) -> Result<Vec<Mesh>> {
    let mut out = Vec::with_capacity(hs.len() + 1);
    for &h in hs {
        if h < 2 || cells_per_unit % h != 0 {
            return Err(domain(format!("1 - 1/{h} is not a whole number of cells of size 1/{cells_per_unit}")));
        }
        let cells = cells_per_unit - cells_per_unit / h;
        out.push(Mesh::interval(0.0, cells as f64 / cells_per_unit as f64, cells)?);
    }
    out.push(Mesh::interval(0.0, 1.0, cells_per_unit)?);
    Ok(out)
}

/// Squares `[0, s/n]²` for each side `s` (in cells) as masks of one
/// `n × n` grid on the unit square, then the full grid.
pub fn square_family(sides: &[usize], n: usize) -> Result<Vec<Mesh>> {
    let mut out = Vec::with_capacity(sides.len() + 1);
    for &s in sides.iter().chain(std::iter::once(&n)) {
        if s < 2 || s > n {
            return Err(domain(format!("square side {s} must lie in 2..={n} cells")));
        }
        let mask = (0..n * n).map(|k| k % n < s && k / n < s).collect();
        out.push(Mesh::masked(0.0, 1.0, 0.0, 1.0, n, n, mask)?);
    }
    Ok(out)
}

fn interval_length(mesh: &Mesh) -> Option<(f64, f64)> {
    match *mesh.geometry() {
        Geometry::Interval { a, b, .. } => Some((a, b)),
        Geometry::Grid { .. } => None,
    }
}

/// First eigenvalue along a nested family ending at the limit domain.
///
/// Checks: the chain is non-increasing up to 1e-3 relative slack, the last
/// step gap is at most 2%, and, for single-phase runs on intervals with a
/// constant weight, each value is within 1% of `λ_ode^{1/p}` from the
/// shooting oracle.
pub fn run_domain_monotonicity(
    domains: &[Mesh],
    p: f64,
    q: f64,
    weight: &WeightSpec,
    opts: &SolverOptions,
) -> Result<ExperimentReport> {
    if domains.len() < 2 {
        return Err(domain("a domain family needs at least two members"));
    }
    for (k, w) in domains.windows(2).enumerate() {
        if !w[0].is_nested_in(&w[1]) {
            return Err(Error::Geometry(format!("domain {k} is not contained in domain {}", k + 1)));
        }
    }
    let phases: Vec<_> = domains.iter().map(|m| phase_on(m, p, q, weight)).collect::<Result<_>>()?;
    let pairs: Vec<_> = domains
        .par_iter()
        .zip(&phases)
        .map(|(m, h)| first_eigenpair(m, h, opts))
        .collect::<Result<_>>()?;

    let oracle_applies = p == q && matches!(weight, WeightSpec::Constant(_)) && domains.iter().all(|m| interval_length(m).is_some());
    let oracle: Vec<f64> = if oracle_applies {
        domains
            .par_iter()
            .map(|m| {
                let (a, b) = interval_length(m).expect("interval");
                Ok(plap_shooting(p, (a, b), 1, 16)?.lambda_ode.powf(1.0 / p))
            })
            .collect::<Result<_>>()?
    } else {
        vec![f64::NAN; domains.len()]
    };

    let mut report = ExperimentReport::new(
        "domains",
        &["index", "measure"],
        &["lambda", "oracle", "oracle_rel_err", "residual"],
        opts.rng_seed,
        resolution_of(domains.last().expect("nonempty")),
    );
    let lambdas: Vec<f64> = pairs.iter().map(|e| e.lambda).collect();
    for (k, (e, m)) in pairs.iter().zip(domains).enumerate() {
        let err = ((e.lambda - oracle[k]) / oracle[k]).abs();
        report.push_row(
            m.descriptor(),
            vec![k as f64, m.total_measure()],
            vec![e.lambda, oracle[k], err, e.residual],
            e.converged,
        );
    }
    report.check(Check::at_most("chain_nonincreasing", max_relative_increase(&lambdas), 0.0, 1e-3));
    let n = lambdas.len();
    let gap = (lambdas[n - 2] - lambdas[n - 1]).abs() / lambdas[n - 1];
    report.check(Check::at_most("last_gap", gap, 0.02, 0.0));
    if oracle_applies {
        let worst = lambdas.iter().zip(&oracle).map(|(l, o)| ((l - o) / o).abs()).fold(0.0, f64::max);
        report.check(Check::at_most("oracle_scaling", worst, 0.01, 0.0));
        report.summarize("max_oracle_rel_err", worst);
    }
    report.check_rows_converged();
    report.summarize("lambda_limit", lambdas[n - 1]);
    report.x_label = "measure".into();
    report.y_label = "lambda".into();
    report.series.push(Series {
        name: "lambda".into(),
        points: domains.iter().zip(&lambdas).map(|(m, &l)| (m.total_measure(), l)).collect(),
    });
    if oracle_applies {
        report.series.push(Series {
            name: "oracle".into(),
            points: domains.iter().zip(&oracle).map(|(m, &l)| (m.total_measure(), l)).collect(),
        });
    }
    Ok(report)
}
