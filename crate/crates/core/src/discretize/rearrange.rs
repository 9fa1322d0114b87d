//! Rearrangements: Schwarz symmetrization onto the equal-measure ball,
//! two-point polarization and homothetic rescaling.
//!
//! Symmetrization works in cell arithmetic: the per-cell quadrature samples
//! are permuted onto the cells of the ball, so the multiset of cell values
//! and every modular without an x-dependent weight are preserved exactly.
//! Polarization is available on nodal fields and on cell samples.

use std::cmp::Ordering;

use super::mesh::{Field, Geometry, Mesh};
use crate::error::{domain, Error, Result};

/// Result of [`schwarz_symmetrize`].
#[derive(Debug, Clone)]
pub struct Symmetrized {
    /// The ball (the interval itself, or a rasterised disk) carrying the
    /// rearrangement.
    pub mesh: Mesh,
    /// One value per inside cell of `mesh`.
    pub cells: Vec<f64>,
    /// `|Ω*| - |Ω|`.
    pub measure_mismatch: f64,
}

fn polar_key(p: [f64; 2], c: [f64; 2]) -> (f64, f64) {
    let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
    (dx * dx + dy * dy, dy.atan2(dx))
}

fn by_polar(a: (f64, f64), b: (f64, f64)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1))
}

/// Equal-measure disk on square cells of side `h` holding exactly
/// `cells` cells: the `cells` cell centres closest to the origin, ties in
/// distance broken by angle.
pub fn equal_measure_disk(cells: usize, h: f64) -> Result<Mesh> {
    if cells == 0 {
        return Err(domain("empty source domain"));
    }
    let radius = (cells as f64 / std::f64::consts::PI).sqrt() * h;
    let half = (radius / h).ceil() as usize + 2;
    let n = 2 * half;
    let extent = half as f64 * h;
    let mut order: Vec<(usize, (f64, f64))> = (0..n * n)
        .map(|k| {
            let (i, j) = (k % n, k / n);
            let c = [-extent + (i as f64 + 0.5) * h, -extent + (j as f64 + 0.5) * h];
            (k, polar_key(c, [0.0, 0.0]))
        })
        .collect();
    order.sort_by(|a, b| by_polar(a.1, b.1));
    let mut mask = vec![false; n * n];
    for &(k, _) in order.iter().take(cells) {
        mask[k] = true;
    }
    Mesh::masked(-extent, extent, -extent, extent, n, n, mask)
}

/// Schwarz symmetrization of nonnegative cell samples: the values sorted
/// in decreasing order are placed on the cells of the equal-measure ball
/// sorted by increasing distance from its centre. In 1D the ball is the
/// interval itself.
pub fn schwarz_symmetrize_cells(cells: &[f64], mesh: &Mesh) -> Result<Symmetrized> {
    if cells.len() != mesh.cell_count() {
        return Err(Error::Shape { expected: mesh.cell_count(), got: cells.len() });
    }
    if let Some(v) = cells.iter().find(|v| !(**v >= 0.0)) {
        return Err(domain(format!("symmetrization needs a nonnegative field, found {v}")));
    }
    let target = match mesh.geometry() {
        Geometry::Interval { .. } => mesh.clone(),
        Geometry::Grid { .. } => {
            let [hx, hy] = mesh.spacing();
            if (hx - hy).abs() > 1e-12 * hx.max(hy) {
                return Err(Error::Geometry("symmetrization needs square cells".into()));
            }
            equal_measure_disk(mesh.cell_count(), hx)?
        }
    };
    let mismatch = target.total_measure() - mesh.total_measure();
    if mismatch.abs() > mesh.cell_measure() * (1.0 + 1e-9) {
        return Err(Error::Geometry(format!("ball measure differs by {mismatch}")));
    }
    let mut values = cells.to_vec();
    values.sort_by(|a, b| b.total_cmp(a));
    let center = target.bounding_center();
    let mut order: Vec<(usize, (f64, f64))> = target
        .cell_centers()
        .iter()
        .enumerate()
        .map(|(k, &x)| (k, polar_key(x, center)))
        .collect();
    order.sort_by(|a, b| by_polar(a.1, b.1).then(a.0.cmp(&b.0)));
    let mut out = vec![0.0; target.cell_count()];
    for (&(cell, _), &v) in order.iter().zip(&values) {
        out[cell] = v;
    }
    Ok(Symmetrized { mesh: target, cells: out, measure_mismatch: mismatch })
}

/// Symmetrization of a nonnegative nodal field through its cell samples.
pub fn schwarz_symmetrize(u: &Field, mesh: &Mesh) -> Result<Symmetrized> {
    if let Some(v) = u.values().iter().find(|v| !(**v >= 0.0)) {
        return Err(domain(format!("symmetrization needs a nonnegative field, found {v}")));
    }
    schwarz_symmetrize_cells(&mesh.cell_values(u)?, mesh)
}

/// `‖∇c‖_p` of piecewise-constant cell samples (zero outside), using the
/// bilinear difference on the dual grid whose cells are centred at the
/// mesh nodes. The same operator applied to `c` and to its rearrangement
/// gives a discrete Pólya–Szegő comparison.
pub fn dual_gradient_lp(cells: &[f64], mesh: &Mesh, p: f64) -> Result<f64> {
    if cells.len() != mesh.cell_count() {
        return Err(Error::Shape { expected: mesh.cell_count(), got: cells.len() });
    }
    let (nx, ny) = mesh.grid_shape();
    let mut grid = vec![0.0; nx * ny];
    for (&(i, j), &v) in mesh.cell_indices().iter().zip(cells) {
        grid[j * nx + i] = v;
    }
    let [hx, hy] = mesh.spacing();
    let at = |i: isize, j: isize| {
        if i < 0 || j < 0 || i >= nx as isize || j >= ny as isize {
            0.0
        } else {
            grid[j as usize * nx + i as usize]
        }
    };
    let mut sum = 0.0;
    if mesh.dim() == 1 {
        for i in 0..=nx as isize {
            sum += ((at(i, 0) - at(i - 1, 0)) / hx).abs().powf(p);
        }
    } else {
        for j in 0..=ny as isize {
            for i in 0..=nx as isize {
                let (c00, c10, c01, c11) = (at(i - 1, j - 1), at(i, j - 1), at(i - 1, j), at(i, j));
                let gx = 0.5 * ((c10 - c00) + (c11 - c01)) / hx;
                let gy = 0.5 * ((c01 - c00) + (c11 - c10)) / hy;
                sum += gx.hypot(gy).powf(p);
            }
        }
    }
    Ok((sum * mesh.cell_measure()).powf(1.0 / p))
}

/// Which side of the reflection plane receives the larger value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfSpace {
    /// Coordinates above the plane.
    Upper,
    /// Coordinates below the plane.
    Lower,
}

/// Axis-aligned reflection plane through the centre of the bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReflectionPlane {
    pub axis: usize,
    pub side: HalfSpace,
}

impl ReflectionPlane {
    pub fn new(axis: usize, side: HalfSpace) -> ReflectionPlane {
        ReflectionPlane { axis, side }
    }
}

/// For every unknown, the unknown at its mirror image. Errors unless the
/// mesh is symmetric under the reflection.
pub fn mirror_map(mesh: &Mesh, axis: usize) -> Result<Vec<usize>> {
    if axis >= mesh.dim() {
        return Err(Error::Geometry(format!("no axis {axis} in a {}D mesh", mesh.dim())));
    }
    let (nx, ny) = mesh.grid_shape();
    if mesh.dim() == 2 {
        let mask = mesh.mask();
        for j in 0..ny {
            for i in 0..nx {
                let (mi, mj) = if axis == 0 { (nx - 1 - i, j) } else { (i, ny - 1 - j) };
                if mask[j * nx + i] != mask[mj * nx + mi] {
                    return Err(Error::Geometry("mesh is not symmetric under the reflection".into()));
                }
            }
        }
    }
    mesh.node_indices()
        .iter()
        .map(|&(i, j)| {
            let (mi, mj) = if axis == 0 { (nx - i, j) } else { (i, ny - j) };
            mesh.node_at(mi, mj)
                .ok_or_else(|| Error::Geometry("mirror node is not interior".into()))
        })
        .collect()
}

/// Two-point rearrangement of `|u|`: on the chosen half-space each node
/// takes the larger of its value and its mirror value, on the other side
/// the smaller. Nodes on the plane are unchanged.
pub fn polarize(u: &Field, mesh: &Mesh, plane: ReflectionPlane) -> Result<Field> {
    if u.len() != mesh.node_count() {
        return Err(Error::Shape { expected: mesh.node_count(), got: u.len() });
    }
    let mirror = mirror_map(mesh, plane.axis)?;
    let (nx, ny) = mesh.grid_shape();
    let twice_mid = if plane.axis == 0 { nx } else { ny };
    let abs = u.abs();
    let vals = abs.values();
    let out = mesh
        .node_indices()
        .iter()
        .enumerate()
        .map(|(k, &(i, j))| {
            let twice_coord = 2 * if plane.axis == 0 { i } else { j };
            let (own, other) = (vals[k], vals[mirror[k]]);
            match (twice_coord.cmp(&twice_mid), plane.side) {
                (Ordering::Equal, _) => own,
                (Ordering::Greater, HalfSpace::Upper) | (Ordering::Less, HalfSpace::Lower) => own.max(other),
                _ => own.min(other),
            }
        })
        .collect();
    Ok(Field::new(out))
}

/// [`polarize`] on cell samples: each inside cell is paired with its
/// mirror cell.
pub fn polarize_cells(cells: &[f64], mesh: &Mesh, plane: ReflectionPlane) -> Result<Vec<f64>> {
    if cells.len() != mesh.cell_count() {
        return Err(Error::Shape { expected: mesh.cell_count(), got: cells.len() });
    }
    mirror_map(mesh, plane.axis)?;
    let (nx, ny) = mesh.grid_shape();
    let idx = mesh.cell_indices();
    let mut slot = vec![usize::MAX; nx * ny];
    for (k, &(i, j)) in idx.iter().enumerate() {
        slot[j * nx + i] = k;
    }
    let twice_mid = if plane.axis == 0 { nx } else { ny };
    let out = idx
        .iter()
        .enumerate()
        .map(|(k, &(i, j))| {
            let (mi, mj) = if plane.axis == 0 { (nx - 1 - i, j) } else { (i, ny - 1 - j) };
            let (own, other) = (cells[k].abs(), cells[slot[mj * nx + mi]].abs());
            // cell centre coordinate, doubled: 2i + 1
            let twice_coord = 2 * if plane.axis == 0 { i } else { j } + 1;
            match (twice_coord.cmp(&twice_mid), plane.side) {
                (Ordering::Equal, _) => own,
                (Ordering::Greater, HalfSpace::Upper) | (Ordering::Less, HalfSpace::Lower) => own.max(other),
                _ => own.min(other),
            }
        })
        .collect();
    Ok(out)
}

/// Relative reflection defect `max |u - u∘R| / max |u|`.
pub fn symmetry_defect(u: &Field, mesh: &Mesh, axis: usize) -> Result<f64> {
    let mirror = mirror_map(mesh, axis)?;
    let scale = u.max_abs();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let vals = u.values();
    Ok(mirror
        .iter()
        .enumerate()
        .map(|(k, &m)| (vals[k] - vals[m]).abs())
        .fold(0.0, f64::max)
        / scale)
}

/// Homothety `x ↦ δx`: the same nodal values on the mesh scaled by `δ`
/// about the origin, i.e. `v(y) = u(y/δ)`. `δ = 1` is accepted.
pub fn homothety_rescale(u: &Field, mesh: &Mesh, delta: f64) -> Result<(Mesh, Field)> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(domain(format!("homothety factor {delta} outside (0, 1]")));
    }
    if u.len() != mesh.node_count() {
        return Err(Error::Shape { expected: mesh.node_count(), got: u.len() });
    }
    let scaled = match *mesh.geometry() {
        Geometry::Interval { a, b, cells } => Mesh::interval(delta * a, delta * b, cells)?,
        Geometry::Grid { x0, x1, y0, y1, nx, ny } => Mesh::masked(
            delta * x0,
            delta * x1,
            delta * y0,
            delta * y1,
            nx,
            ny,
            mesh.mask().to_vec(),
        )?,
    };
    Ok((scaled, u.clone()))
}
