use super::report::{Check, ExperimentReport, Series};
use super::resolution_of;
use crate::discretize::{mirror_map, polarize, polarize_cells, symmetry_defect, HalfSpace, Mesh, ReflectionPlane};
use crate::eigensolver::{first_eigenpair, rayleigh, SolverOptions};
use crate::error::Result;
use crate::orlicz::{lp_norm_cells, modular_cells, modular_nodal, NFunctionParams, WeightField};

/// First eigenfunction on a mirror-symmetric mesh (`a ≡ 1`) and its
/// polarization across the mid-plane of `axis`.
///
/// Checks: `R(u^H) ≤ R(u)(1 + 1e-6)`, symmetry defect at most 1%,
/// polarization preserves the nodal and cell modulars (1e-12 relative),
/// and `u^H` is a fixed point of a second polarization.
pub fn run_symmetry(mesh: &Mesh, p: f64, q: f64, axis: usize, opts: &SolverOptions) -> Result<ExperimentReport> {
    mirror_map(mesh, axis)?;
    let h = NFunctionParams::relaxed(p, q, WeightField::constant(mesh, 1.0)?)?;
    let e = first_eigenpair(mesh, &h, opts)?;
    let plane = ReflectionPlane::new(axis, HalfSpace::Upper);
    let u = &e.u;
    let uh = polarize(u, mesh, plane)?;
    let r = rayleigh(u, &h, mesh)?;
    let rh = rayleigh(&uh, &h, mesh)?;
    let defect = symmetry_defect(u, mesh, axis)?;

    let cells = mesh.cell_values(u)?;
    let cells_h = mesh.cell_values(&uh)?;
    let diff: Vec<f64> = cells.iter().zip(&cells_h).map(|(a, b)| a - b).collect();
    let dist = lp_norm_cells(&diff, p, mesh);

    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    let nodal = rel(modular_nodal(&uh, &h, mesh)?, modular_nodal(u, &h, mesh)?);
    let pc = polarize_cells(&cells, mesh, plane)?;
    let cell = rel(modular_cells(&pc, &h, mesh)?, modular_cells(&cells, &h, mesh)?);
    let twice = polarize(&uh, mesh, plane)?;
    let fixed = twice.values().iter().zip(uh.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let mut report = ExperimentReport::new(
        "symmetry",
        &["axis"],
        &["lambda", "rayleigh_u", "rayleigh_polarized", "distance_lp", "symmetry_defect", "residual"],
        opts.rng_seed,
        resolution_of(mesh),
    );
    report.push_row("eigenfunction", vec![axis as f64], vec![e.lambda, r, rh, dist, defect, e.residual], e.converged);
    report.check(Check::at_most("polarization_rayleigh", rh, r * (1.0 + 1e-6), 0.0));
    report.check(Check::at_most("symmetry_defect", defect, 0.01, 0.0));
    report.check(Check::at_most("polarization_modular_nodal", nodal, 0.0, 1e-12));
    report.check(Check::at_most("polarization_modular_cells", cell, 0.0, 1e-12));
    report.check(Check::at_most("polarization_fixed_point", fixed, 0.0, 0.0));
    report.check_rows_converged();
    report.summarize("symmetry_defect", defect);
    report.summarize("distance_lp", dist);
    report.x_label = "node".into();
    report.y_label = "u".into();
    report.series.push(Series { name: "u".into(), points: u.values().iter().enumerate().map(|(k, &v)| (k as f64, v)).collect() });
    report.series.push(Series { name: "u^H".into(), points: uh.values().iter().enumerate().map(|(k, &v)| (k as f64, v)).collect() });
    Ok(report)
}
