use super::report::{Check, ExperimentReport, Series};
use crate::discretize::{dual_gradient_lp, equal_measure_disk, schwarz_symmetrize_cells, Mesh};
use crate::eigensolver::{first_eigenpair, Eigenpair, SolverOptions};
use crate::error::{domain, Error, Result};
use crate::orlicz::{modular_cells, NFunctionParams, WeightField};

fn unit_weight(mesh: &Mesh, p: f64, q: f64) -> Result<NFunctionParams> {
    NFunctionParams::relaxed(p, q, WeightField::constant(mesh, 1.0)?)
}

struct Pair {
    domain: Eigenpair,
    disk: Eigenpair,
    disk_mesh: Mesh,
}

fn solve_pair(mesh: &Mesh, p: f64, q: f64, opts: &SolverOptions) -> Result<Pair> {
    if mesh.dim() != 2 {
        return Err(domain("Faber–Krahn comparison needs a 2D mesh"));
    }
    let [hx, hy] = mesh.spacing();
    if (hx - hy).abs() > 1e-12 * hx {
        return Err(domain("Faber–Krahn comparison needs square cells"));
    }
    let disk_mesh = equal_measure_disk(mesh.cell_count(), hx)?;
    let mismatch = (disk_mesh.total_measure() - mesh.total_measure()).abs();
    if mismatch > mesh.cell_measure() {
        return Err(Error::Geometry(format!("equal-measure disk is off by {mismatch}")));
    }
    let (h_dom, h_disk) = (unit_weight(mesh, p, q)?, unit_weight(&disk_mesh, p, q)?);
    let (a, b) = rayon::join(|| first_eigenpair(mesh, &h_dom, opts), || first_eigenpair(&disk_mesh, &h_disk, opts));
    Ok(Pair { domain: a?, disk: b?, disk_mesh })
}

/// `λ¹` of `domain` against its equal-measure disk (`a ≡ 1`).
///
/// The discretisation slack is the larger change of either eigenvalue
/// between `coarse` and `domain` (0 without `coarse`); the check demands a
/// margin `λ¹(Ω) - λ¹(disk)` strictly above it. Also symmetrises the
/// domain eigenfunction and checks modular preservation (1e-12 relative)
/// and the discrete Pólya–Szegő inequality (5% slack).
pub fn run_faber_krahn(
    domain_mesh: &Mesh,
    coarse: Option<&Mesh>,
    p: f64,
    q: f64,
    opts: &SolverOptions,
) -> Result<ExperimentReport> {
    let (fine, coarse_pair) = rayon::join(
        || solve_pair(domain_mesh, p, q, opts),
        || coarse.map(|c| solve_pair(c, p, q, opts)).transpose(),
    );
    let (fine, coarse_pair) = (fine?, coarse_pair?);

    let mut report = ExperimentReport::new(
        "faberkrahn",
        &["cells_per_side", "measure"],
        &["lambda_domain", "lambda_disk", "residual_domain", "residual_disk"],
        opts.rng_seed,
        domain_mesh.grid_shape().0,
    );
    let mut push = |label: &str, m: &Mesh, pair: &Pair| {
        report.push_row(
            label,
            vec![m.grid_shape().0 as f64, m.total_measure()],
            vec![pair.domain.lambda, pair.disk.lambda, pair.domain.residual, pair.disk.residual],
            pair.domain.converged && pair.disk.converged,
        );
    };
    if let (Some(c), Some(cp)) = (coarse, coarse_pair.as_ref()) {
        push("coarse", c, cp);
    }
    push("fine", domain_mesh, &fine);

    let slack = coarse_pair.as_ref().map_or(0.0, |cp| {
        (fine.domain.lambda - cp.domain.lambda).abs().max((fine.disk.lambda - cp.disk.lambda).abs())
    });
    let margin = fine.domain.lambda - fine.disk.lambda;
    report.check(Check {
        name: "disk_below_domain".into(),
        passed: margin > slack,
        value: margin,
        bound: 0.0,
        slack,
    });

    // rearrangement diagnostics on the domain eigenfunction
    let cells = domain_mesh.cell_values(&fine.domain.u)?;
    let sym = schwarz_symmetrize_cells(&cells, domain_mesh)?;
    let h_dom = unit_weight(domain_mesh, p, q)?;
    let h_sym = unit_weight(&sym.mesh, p, q)?;
    let rho = modular_cells(&cells, &h_dom, domain_mesh)?;
    let rho_sym = modular_cells(&sym.cells, &h_sym, &sym.mesh)?;
    report.check(Check::at_most("symmetrization_modular", ((rho_sym - rho) / rho).abs(), 0.0, 1e-12));
    let g = dual_gradient_lp(&cells, domain_mesh, p)?;
    let g_sym = dual_gradient_lp(&sym.cells, &sym.mesh, p)?;
    report.check(Check::at_most("polya_szego", g_sym / g, 1.0, 0.05));
    report.check_rows_converged();

    report.summarize("margin", margin);
    report.summarize("discretization_slack", slack);
    report.summarize("disk_cells", fine.disk_mesh.cell_count() as f64);
    report.summarize("polya_szego_ratio", g_sym / g);
    report.x_label = "cells_per_side".into();
    report.y_label = "lambda".into();
    let mut pts_dom = Vec::new();
    let mut pts_disk = Vec::new();
    if let (Some(c), Some(cp)) = (coarse, coarse_pair.as_ref()) {
        pts_dom.push((c.grid_shape().0 as f64, cp.domain.lambda));
        pts_disk.push((c.grid_shape().0 as f64, cp.disk.lambda));
    }
    pts_dom.push((domain_mesh.grid_shape().0 as f64, fine.domain.lambda));
    pts_disk.push((domain_mesh.grid_shape().0 as f64, fine.disk.lambda));
    report.series.push(Series { name: "domain".into(), points: pts_dom });
    report.series.push(Series { name: "disk".into(), points: pts_disk });
    Ok(report)
}
