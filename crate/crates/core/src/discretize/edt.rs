//! Exact Euclidean distance transform on cell grids and the inradius built
//! on it.

use super::mesh::{Geometry, Mesh};
use crate::error::{domain, Result};

/// Squared distance from every sample to the nearest zero of `f`, along a
/// single row whose samples are `spacing` apart (lower envelope of
/// parabolas). `f` holds 0 at feature samples and `f64::INFINITY` elsewhere,
/// or the output of a previous pass.
fn squared_distance_1d(f: &[f64], spacing: f64, out: &mut [f64]) {
    let n = f.len();
    let pos = |i: usize| i as f64 * spacing;
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    let mut started = false;
    for q in 0..n {
        if !f[q].is_finite() {
            continue;
        }
        if !started {
            v[0] = q;
            z[0] = f64::NEG_INFINITY;
            z[1] = f64::INFINITY;
            started = true;
            continue;
        }
        let parabola_cut = |p: usize| {
            ((f[q] + pos(q) * pos(q)) - (f[p] + pos(p) * pos(p))) / (2.0 * (pos(q) - pos(p)))
        };
        // z[0] is -inf, so this never runs past k = 0
        let mut s = parabola_cut(v[k]);
        while s <= z[k] {
            k -= 1;
            s = parabola_cut(v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    if !started {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    }
    let mut k = 0usize;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < pos(q) {
            k += 1;
        }
        let d = pos(q) - pos(v[k]);
        *o = d * d + f[v[k]];
    }
}

/// Squared Euclidean distance from each cell centre of an `nx * ny` grid to
/// the nearest feature cell centre. Cells outside the grid count as
/// features, so the result is finite.
pub fn squared_distance_to_features(
    feature: &[bool],
    nx: usize,
    ny: usize,
    hx: f64,
    hy: f64,
) -> Vec<f64> {
    // pad with a ring of feature cells
    let (px, py) = (nx + 2, ny + 2);
    let mut grid = vec![0.0; px * py];
    for j in 0..ny {
        for i in 0..nx {
            if !feature[j * nx + i] {
                grid[(j + 1) * px + i + 1] = f64::INFINITY;
            }
        }
    }
    let mut row_out = vec![0.0; px];
    for j in 0..py {
        let row = &grid[j * px..(j + 1) * px];
        squared_distance_1d(row, hx, &mut row_out);
        grid[j * px..(j + 1) * px].copy_from_slice(&row_out);
    }
    let mut col = vec![0.0; py];
    let mut col_out = vec![0.0; py];
    for i in 0..px {
        for j in 0..py {
            col[j] = grid[j * px + i];
        }
        squared_distance_1d(&col, hy, &mut col_out);
        for j in 0..py {
            grid[j * px + i] = col_out[j];
        }
    }
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        out.extend_from_slice(&grid[(j + 1) * px + 1..(j + 1) * px + 1 + nx]);
    }
    out
}

/// Radius of the largest inscribed ball.
///
/// 1D: half the interval length. 2D: the largest distance from an inside
/// cell centre to the nearest outside cell centre (the grid exterior counts
/// as outside), which is exact to within one cell size.
pub fn inradius(mesh: &Mesh) -> Result<f64> {
    match *mesh.geometry() {
        Geometry::Interval { a, b, .. } => Ok(0.5 * (b - a)),
        Geometry::Grid { nx, ny, .. } => {
            if mesh.cell_count() == 0 {
                return Err(domain("inradius of an empty domain"));
            }
            let [hx, hy] = mesh.spacing();
            let outside: Vec<bool> = mesh.mask().iter().map(|&m| !m).collect();
            let d2 = squared_distance_to_features(&outside, nx, ny, hx, hy);
            let best = d2
                .iter()
                .zip(mesh.mask())
                .filter(|(_, &inside)| inside)
                .fold(0.0f64, |m, (&d, _)| m.max(d));
            Ok(best.sqrt())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(feature: &[bool], nx: usize, ny: usize, hx: f64, hy: f64) -> Vec<f64> {
        let mut pts = Vec::new();
        for j in -1..=ny as isize {
            for i in -1..=nx as isize {
                let inside_grid = i >= 0 && j >= 0 && i < nx as isize && j < ny as isize;
                if !inside_grid || feature[j as usize * nx + i as usize] {
                    pts.push((i as f64 * hx, j as f64 * hy));
                }
            }
        }
        let mut out = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let (x, y) = (i as f64 * hx, j as f64 * hy);
                let d = pts
                    .iter()
                    .map(|(px, py)| (x - px).powi(2) + (y - py).powi(2))
                    .fold(f64::INFINITY, f64::min);
                out.push(d);
            }
        }
        out
    }

    #[test]
    fn matches_brute_force() {
        let (nx, ny) = (13, 9);
        let feature: Vec<bool> = (0..nx * ny).map(|k| (k * 37 + 11) % 23 == 0).collect();
        let fast = squared_distance_to_features(&feature, nx, ny, 0.3, 0.7);
        let slow = brute_force(&feature, nx, ny, 0.3, 0.7);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn interval_inradius_is_half_length() {
        let m = Mesh::interval(0.0, 1.0, 16).unwrap();
        assert_eq!(inradius(&m).unwrap(), 0.5);
        let m = Mesh::interval(-1.0, 2.0, 7).unwrap();
        assert_eq!(inradius(&m).unwrap(), 1.5);
    }

    #[test]
    fn unit_square_inradius() {
        let n = 32;
        let m = Mesh::rectangle(0.0, 1.0, 0.0, 1.0, n, n).unwrap();
        let r = inradius(&m).unwrap();
        assert!((r - 0.5).abs() <= 1.0 / n as f64, "r = {r}");
    }

    #[test]
    fn disk_inradius_within_one_cell() {
        for &h in &[0.05, 0.025] {
            let m = Mesh::disk(1.0, h).unwrap();
            let r = inradius(&m).unwrap();
            assert!((r - 1.0).abs() <= h, "h = {h}: r = {r}");
        }
    }
}
