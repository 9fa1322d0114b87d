use super::report::{Check, ExperimentReport, Series};
use super::resolution_of;
use crate::discretize::Mesh;
use crate::eigensolver::{first_eigenpair, minimax_table, spectrum_counting, SolverOptions};
use crate::error::{domain, Result};
use crate::orlicz::NFunctionParams;

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Minimax upper bounds for `m = 1..=m_max` and their log-log slope.
///
/// Checks: slope within `[(1-σ)/n - 0.25, (1+σ)/n + 0.25]`, table
/// non-decreasing, counting function `N(λ̂^k (1 + 1e-9)) ≥ k`, and the
/// `m = 1` bound within 1% of the first eigenvalue.
pub fn run_weyl(mesh: &Mesh, h: &NFunctionParams, m_max: usize, opts: &SolverOptions) -> Result<ExperimentReport> {
    if m_max < 3 {
        return Err(domain(format!("Weyl fit needs m_max >= 3, got {m_max}")));
    }
    let (table, first) = rayon::join(|| minimax_table(mesh, h, m_max, opts), || first_eigenpair(mesh, h, opts));
    let (table, first) = (table?, first?);
    let n = mesh.dim();
    let sigma = h.sigma(n);
    let (lo, hi) = ((1.0 - sigma) / n as f64 - 0.25, (1.0 + sigma) / n as f64 + 0.25);

    let mut report = ExperimentReport::new(
        "weyl",
        &["m"],
        &["bound", "raw_bound", "counting"],
        opts.rng_seed,
        resolution_of(mesh),
    );
    let ms: Vec<f64> = (1..=m_max).map(|m| m as f64).collect();
    let finite: Vec<(f64, f64)> =
        ms.iter().zip(&table.bounds).filter(|(_, b)| b.is_finite()).map(|(&m, &b)| (m, b)).collect();
    let mut counting_ok = true;
    for (k, (&b, &raw)) in table.bounds.iter().zip(&table.raw).enumerate() {
        let count = spectrum_counting(&table.bounds, b * (1.0 + 1e-9));
        counting_ok &= count > k;
        report.push_row(format!("m={}", k + 1), vec![ms[k]], vec![b, raw, count as f64], b.is_finite());
    }
    report.check(Check::flag("conclusive", finite.len() >= 3));
    let slope = if finite.len() >= 2 {
        let (x, y): (Vec<f64>, Vec<f64>) = finite.iter().copied().unzip();
        loglog_slope(&x, &y)
    } else {
        f64::NAN
    };
    report.check(Check::at_least("slope_lower", slope, lo, 0.0));
    report.check(Check::at_most("slope_upper", slope, hi, 0.0));
    let drop = table.bounds.windows(2).map(|w| w[0] - w[1]).fold(f64::NEG_INFINITY, f64::max);
    report.check(Check::at_most("table_nondecreasing", drop, 0.0, 0.0));
    report.check(Check::flag("counting_function", counting_ok));
    let m1 = ((table.bounds[0] - first.lambda) / first.lambda).abs();
    report.check(Check::at_most("m1_matches_first_eigenvalue", m1, 0.01, 0.0));
    report.check(Check::flag("first_eigenpair_converged", first.converged));

    report.summarize("slope", slope);
    report.summarize("sigma", sigma);
    report.summarize("window_lo", lo);
    report.summarize("window_hi", hi);
    report.summarize("lambda1", first.lambda);
    report.x_label = "m".into();
    report.y_label = "bound".into();
    report.log_log = true;
    report.series.push(Series { name: "minimax bound".into(), points: ms.iter().copied().zip(table.bounds.iter().copied()).collect() });
    Ok(report)
}
