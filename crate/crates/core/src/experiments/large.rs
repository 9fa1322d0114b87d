use rayon::prelude::*;

use super::report::{Check, ExperimentReport, Series};
use super::resolution_of;
use crate::discretize::{inradius, Mesh};
use crate::eigensolver::{first_eigenpair, first_eigenpair_rescaled, SolverOptions};
use crate::error::{domain, Result};
use crate::orlicz::NFunctionParams;

/// Rescaled first eigenvalue for `hH = t^{hp} + a t^{hq}` against the
/// limit `1/R` (`R` the inradius).
///
/// Checks: the gap `|λ̃_h - 1/R|` decreases over the last half of `h_list`
/// (at least two entries), the final relative gap is at most 15%, and at
/// every `h` the norm equivalence brackets `λ̃_h` by `λ_h·C^{±1}` with
/// `C = |Ω| + ‖a‖₁`.
pub fn run_large_exponents(
    mesh: &Mesh,
    base: &NFunctionParams,
    h_list: &[u32],
    opts: &SolverOptions,
) -> Result<ExperimentReport> {
    if base.p() >= base.q() {
        return Err(domain(format!("large exponents need p < q, got p = {}, q = {}", base.p(), base.q())));
    }
    if h_list.is_empty() || h_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(domain("h_list must be nonempty and strictly increasing"));
    }
    let target = 1.0 / inradius(mesh)?;
    let c = base.rescale_constant(mesh);
    let (lo, hi) = (c.min(1.0 / c), c.max(1.0 / c));

    let phases: Vec<NFunctionParams> = h_list.iter().map(|&h| base.with_scale(h)).collect::<Result<_>>()?;
    let pairs: Vec<_> = phases
        .par_iter()
        .map(|hh| {
            let (a, b) = rayon::join(|| first_eigenpair_rescaled(mesh, hh, opts), || first_eigenpair(mesh, hh, opts));
            Ok((a?, b?))
        })
        .collect::<Result<_>>()?;

    let mut report = ExperimentReport::new(
        "largeexp",
        &["h", "hp", "hq"],
        &["lambda_rescaled", "lambda", "gap", "rel_gap", "bracket_lo", "bracket_hi"],
        opts.rng_seed,
        resolution_of(mesh),
    );
    let mut gaps = Vec::new();
    let mut bracket_ok = true;
    let mut worst_bracket: f64 = f64::NEG_INFINITY;
    for (&h, (rs, st)) in h_list.iter().zip(&pairs) {
        let gap = (rs.lambda - target).abs();
        gaps.push(gap);
        let (blo, bhi) = (lo * st.lambda, hi * st.lambda);
        let slack = 1e-9 * st.lambda;
        bracket_ok &= rs.lambda >= blo - slack && rs.lambda <= bhi + slack;
        worst_bracket = worst_bracket.max((blo - rs.lambda).max(rs.lambda - bhi));
        let hf = h as f64;
        report.push_row(
            format!("h={h}"),
            vec![hf, hf * base.p(), hf * base.q()],
            vec![rs.lambda, st.lambda, gap, gap / target, blo, bhi],
            rs.converged && st.converged,
        );
    }
    let half = (gaps.len() + 1) / 2;
    let tail = &gaps[gaps.len() - half.max(2).min(gaps.len())..];
    let rise = tail.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    if tail.len() >= 2 {
        report.check(Check { name: "gap_decreasing_tail".into(), passed: rise < 0.0, value: rise, bound: 0.0, slack: 0.0 });
    }
    let final_rel = gaps[gaps.len() - 1] / target;
    report.check(Check::at_most("final_relative_gap", final_rel, 0.15, 0.0));
    report.check(Check {
        name: "equivalence_bracket".into(),
        passed: bracket_ok,
        value: worst_bracket,
        bound: 0.0,
        slack: 1e-9,
    });
    report.check_rows_converged();
    report.summarize("target", target);
    report.summarize("equivalence_constant", c);
    report.summarize("final_relative_gap", final_rel);
    report.x_label = "h".into();
    report.y_label = "lambda_rescaled".into();
    report.series.push(Series {
        name: "rescaled".into(),
        points: h_list.iter().zip(&pairs).map(|(&h, (r, _))| (h as f64, r.lambda)).collect(),
    });
    report.series.push(Series {
        name: "1/R".into(),
        points: vec![(h_list[0] as f64, target), (*h_list.last().expect("nonempty") as f64, target)],
    });
    Ok(report)
}
