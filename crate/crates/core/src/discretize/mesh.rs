use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Bounding geometry of a mesh. The inside-mask lives on [`Mesh`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    Interval { a: f64, b: f64, cells: usize },
    Grid { x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize },
}

/// A discretised domain: a uniform interval, or a masked uniform grid of
/// axis-aligned cells.
///
/// Unknowns live on interior nodes. A grid node is interior when every cell
/// touching it is inside; all other nodes carry the zero Dirichlet value.
/// Quadrature is the midpoint rule on inside cells, with nodal values
/// averaged to the cell centre.
#[derive(Debug, Clone)]
pub struct Mesh {
    geometry: Geometry,
    spacing: [f64; 2],
    /// Per grid cell (row-major, x fastest). All true in 1D.
    mask: Vec<bool>,
    /// Grid index of each inside cell.
    cells: Vec<usize>,
    centers: Vec<[f64; 2]>,
    /// Unknown index of each corner of each inside cell, ordered
    /// `[(0,0), (1,0), (0,1), (1,1)]`; 1D cells use the first two slots.
    corners: Vec<[Option<usize>; 4]>,
    /// Grid node index (i, j) of each unknown.
    nodes: Vec<(usize, usize)>,
    node_coords: Vec<[f64; 2]>,
    /// Grid node -> unknown.
    node_lookup: Vec<Option<usize>>,
}

impl Mesh {
    /// Uniform mesh of `(a, b)` with `cells` cells and `cells - 1` unknowns.
    pub fn interval(a: f64, b: f64, cells: usize) -> Result<Mesh> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(domain(format!("interval ({a}, {b}) is empty")));
        }
        if cells < 2 {
            return Err(domain("an interval mesh needs at least two cells"));
        }
        let h = (b - a) / cells as f64;
        let centers = (0..cells).map(|i| [a + (i as f64 + 0.5) * h, 0.0]).collect();
        let corners = (0..cells)
            .map(|i| {
                let left = if i == 0 { None } else { Some(i - 1) };
                let right = if i + 1 == cells { None } else { Some(i) };
                [left, right, None, None]
            })
            .collect();
        let nodes = (1..cells).map(|i| (i, 0)).collect();
        let node_coords = (1..cells).map(|i| [a + i as f64 * h, 0.0]).collect();
        let mut node_lookup = vec![None; cells + 1];
        for (k, slot) in node_lookup.iter_mut().enumerate().take(cells).skip(1) {
            *slot = Some(k - 1);
        }
        Ok(Mesh {
            geometry: Geometry::Interval { a, b, cells },
            spacing: [h, 1.0],
            mask: vec![true; cells],
            cells: (0..cells).collect(),
            centers,
            corners,
            nodes,
            node_coords,
            node_lookup,
        })
    }

    /// Full rectangle `[x0,x1] x [y0,y1]` split into `nx * ny` cells.
    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Result<Mesh> {
        Mesh::masked(x0, x1, y0, y1, nx, ny, vec![true; nx * ny])
    }

    /// Masked grid. `mask` is row-major with x fastest.
    pub fn masked(
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
        nx: usize,
        ny: usize,
        mask: Vec<bool>,
    ) -> Result<Mesh> {
        if !(x0 < x1 && y0 < y1) || !(x0.is_finite() && x1.is_finite() && y0.is_finite() && y1.is_finite()) {
            return Err(domain("grid bounds must satisfy x0 < x1 and y0 < y1"));
        }
        if nx < 2 || ny < 2 {
            return Err(domain("a grid mesh needs at least 2x2 cells"));
        }
        if mask.len() != nx * ny {
            return Err(Error::Shape { expected: nx * ny, got: mask.len() });
        }
        let hx = (x1 - x0) / nx as f64;
        let hy = (y1 - y0) / ny as f64;
        let inside = |i: isize, j: isize| -> bool {
            i >= 0 && j >= 0 && (i as usize) < nx && (j as usize) < ny && mask[j as usize * nx + i as usize]
        };

        let mut node_lookup = vec![None; (nx + 1) * (ny + 1)];
        let mut nodes = Vec::new();
        let mut node_coords = Vec::new();
        for j in 0..=ny {
            for i in 0..=nx {
                let (ii, jj) = (i as isize, j as isize);
                if inside(ii - 1, jj - 1) && inside(ii, jj - 1) && inside(ii - 1, jj) && inside(ii, jj) {
                    node_lookup[j * (nx + 1) + i] = Some(nodes.len());
                    nodes.push((i, j));
                    node_coords.push([x0 + i as f64 * hx, y0 + j as f64 * hy]);
                }
            }
        }

        let mut cells = Vec::new();
        let mut centers = Vec::new();
        let mut corners = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                if !mask[j * nx + i] {
                    continue;
                }
                cells.push(j * nx + i);
                centers.push([x0 + (i as f64 + 0.5) * hx, y0 + (j as f64 + 0.5) * hy]);
                let node = |di: usize, dj: usize| node_lookup[(j + dj) * (nx + 1) + i + di];
                corners.push([node(0, 0), node(1, 0), node(0, 1), node(1, 1)]);
            }
        }
        if cells.is_empty() {
            return Err(domain("mask selects no cells"));
        }
        Ok(Mesh {
            geometry: Geometry::Grid { x0, x1, y0, y1, nx, ny },
            spacing: [hx, hy],
            mask,
            cells,
            centers,
            corners,
            nodes,
            node_coords,
            node_lookup,
        })
    }

    /// Grid over `[x0,x1] x [y0,y1]` whose inside cells are those with
    /// centre in the closed disk.
    #[allow(clippy::too_many_arguments)]
    pub fn disk_in_box(
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
        nx: usize,
        ny: usize,
        center: [f64; 2],
        radius: f64,
    ) -> Result<Mesh> {
        let hx = (x1 - x0) / nx as f64;
        let hy = (y1 - y0) / ny as f64;
        let mut mask = vec![false; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let cx = x0 + (i as f64 + 0.5) * hx - center[0];
                let cy = y0 + (j as f64 + 0.5) * hy - center[1];
                mask[j * nx + i] = cx * cx + cy * cy <= radius * radius;
            }
        }
        Mesh::masked(x0, x1, y0, y1, nx, ny, mask)
    }

    /// Disk of the given radius centred at the origin, rasterised on square
    /// cells of side `h`.
    pub fn disk(radius: f64, h: f64) -> Result<Mesh> {
        if !(radius > 0.0 && h > 0.0) {
            return Err(domain("disk radius and cell size must be positive"));
        }
        let half = (radius / h).ceil() as usize + 1;
        let extent = half as f64 * h;
        Mesh::disk_in_box(-extent, extent, -extent, extent, 2 * half, 2 * half, [0.0, 0.0], radius)
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn dim(&self) -> usize {
        match self.geometry {
            Geometry::Interval { .. } => 1,
            Geometry::Grid { .. } => 2,
        }
    }

    /// Cell side lengths; the second entry is 1 in 1D.
    pub fn spacing(&self) -> [f64; 2] {
        self.spacing
    }

    pub fn cell_measure(&self) -> f64 {
        match self.geometry {
            Geometry::Interval { .. } => self.spacing[0],
            Geometry::Grid { .. } => self.spacing[0] * self.spacing[1],
        }
    }

    /// |Ω|: number of inside cells times the cell measure.
    pub fn total_measure(&self) -> f64 {
        self.cells.len() as f64 * self.cell_measure()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn cell_centers(&self) -> &[[f64; 2]] {
        &self.centers
    }

    pub fn node_coords(&self) -> &[[f64; 2]] {
        &self.node_coords
    }

    /// Grid indices `(i, j)` of each unknown.
    pub fn node_indices(&self) -> &[(usize, usize)] {
        &self.nodes
    }

    /// Grid indices `(i, j)` of each inside cell.
    pub fn cell_indices(&self) -> Vec<(usize, usize)> {
        let nx = self.grid_shape().0;
        self.cells.iter().map(|&c| (c % nx, c / nx)).collect()
    }

    /// Cells per axis of the underlying grid (`(N, 1)` in 1D).
    pub fn grid_shape(&self) -> (usize, usize) {
        match self.geometry {
            Geometry::Interval { cells, .. } => (cells, 1),
            Geometry::Grid { nx, ny, .. } => (nx, ny),
        }
    }

    /// Per grid cell inside flags, row-major.
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn corners(&self) -> &[[Option<usize>; 4]] {
        &self.corners
    }

    /// Unknown index of grid node `(i, j)`, if it is interior.
    pub fn node_at(&self, i: usize, j: usize) -> Option<usize> {
        let (nx, _) = self.grid_shape();
        let stride = nx + 1;
        self.node_lookup.get(j * stride + i).copied().flatten()
    }

    /// Midpoint of the bounding box.
    pub fn bounding_center(&self) -> [f64; 2] {
        match self.geometry {
            Geometry::Interval { a, b, .. } => [0.5 * (a + b), 0.0],
            Geometry::Grid { x0, x1, y0, y1, .. } => [0.5 * (x0 + x1), 0.5 * (y0 + y1)],
        }
    }

    fn check_field(&self, u: &Field) -> Result<()> {
        if u.len() != self.node_count() {
            return Err(Error::Shape { expected: self.node_count(), got: u.len() });
        }
        Ok(())
    }

    /// Nodal values averaged to cell centres (the quadrature samples).
    pub fn cell_values(&self, u: &Field) -> Result<Vec<f64>> {
        self.check_field(u)?;
        Ok(self.cell_values_raw(u.values()))
    }

    pub(crate) fn cell_values_raw(&self, x: &[f64]) -> Vec<f64> {
        let at = |c: Option<usize>| c.map_or(0.0, |k| x[k]);
        match self.dim() {
            1 => self.corners.iter().map(|c| 0.5 * (at(c[0]) + at(c[1]))).collect(),
            _ => self
                .corners
                .iter()
                .map(|c| 0.25 * (at(c[0]) + at(c[1]) + at(c[2]) + at(c[3])))
                .collect(),
        }
    }

    /// Adjoint of [`Mesh::cell_values`]: maps a per-cell covector to nodes.
    pub(crate) fn cell_values_adjoint(&self, cov: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.node_count()];
        let (slots, w) = if self.dim() == 1 { (2, 0.5) } else { (4, 0.25) };
        for (c, &g) in self.corners.iter().zip(cov) {
            for k in c.iter().take(slots).flatten() {
                out[*k] += w * g;
            }
        }
        out
    }

    /// Per-cell discrete gradient.
    ///
    /// 1D: difference quotient on every interval, boundary intervals
    /// included against the zero extension. 2D: the bilinear cell-centre
    /// gradient from the four corner values, with zero ghost values on the
    /// Dirichlet ring.
    pub fn gradient(&self, u: &Field) -> Result<GradField> {
        self.check_field(u)?;
        Ok(GradField::new(self.gradient_raw(u.values())))
    }

    pub(crate) fn gradient_raw(&self, x: &[f64]) -> Vec<[f64; 2]> {
        let at = |c: Option<usize>| c.map_or(0.0, |k| x[k]);
        let [hx, hy] = self.spacing;
        match self.dim() {
            1 => self.corners.iter().map(|c| [(at(c[1]) - at(c[0])) / hx, 0.0]).collect(),
            _ => self
                .corners
                .iter()
                .map(|c| {
                    let (u00, u10, u01, u11) = (at(c[0]), at(c[1]), at(c[2]), at(c[3]));
                    [
                        0.5 * ((u10 - u00) + (u11 - u01)) / hx,
                        0.5 * ((u01 - u00) + (u11 - u10)) / hy,
                    ]
                })
                .collect(),
        }
    }

    /// Adjoint of the gradient: per-cell vector covector to nodes.
    pub(crate) fn gradient_adjoint(&self, cov: &[[f64; 2]]) -> Vec<f64> {
        let mut out = vec![0.0; self.node_count()];
        let [hx, hy] = self.spacing;
        let mut add = |c: Option<usize>, v: f64| {
            if let Some(k) = c {
                out[k] += v;
            }
        };
        match self.dim() {
            1 => {
                for (c, g) in self.corners.iter().zip(cov) {
                    add(c[0], -g[0] / hx);
                    add(c[1], g[0] / hx);
                }
            }
            _ => {
                for (c, g) in self.corners.iter().zip(cov) {
                    let gx = 0.5 * g[0] / hx;
                    let gy = 0.5 * g[1] / hy;
                    add(c[0], -gx - gy);
                    add(c[1], gx - gy);
                    add(c[2], -gx + gy);
                    add(c[3], gx + gy);
                }
            }
        }
        out
    }

    /// Field obtained by evaluating `f` at every interior node.
    pub fn field_from_fn(&self, f: impl Fn([f64; 2]) -> f64) -> Field {
        Field::new(self.node_coords.iter().map(|&x| f(x)).collect())
    }

    /// Cell-centre samples of `f` on the inside cells.
    pub fn sample_cells(&self, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        self.centers.iter().map(|&x| f(x)).collect()
    }

    /// True when every inside cell of `self` is inside `other` on the same
    /// grid, or when `self` is a subinterval of `other`.
    pub fn is_nested_in(&self, other: &Mesh) -> bool {
        match (&self.geometry, &other.geometry) {
            (Geometry::Interval { a, b, .. }, Geometry::Interval { a: oa, b: ob, .. }) => {
                a >= oa && b <= ob
            }
            (Geometry::Grid { .. }, Geometry::Grid { .. }) => {
                self.geometry == other.geometry
                    && self.mask.iter().zip(&other.mask).all(|(&s, &o)| !s || o)
            }
            _ => false,
        }
    }

    /// A one-line description used in report metadata.
    pub fn descriptor(&self) -> String {
        match self.geometry {
            Geometry::Interval { a, b, cells } => format!("interval({a},{b};N={cells})"),
            Geometry::Grid { x0, x1, y0, y1, nx, ny } => format!(
                "grid([{x0},{x1}]x[{y0},{y1}];{nx}x{ny};cells={})",
                self.cell_count()
            ),
        }
    }
}

/// Real-valued function on the interior nodes of a mesh, extended by zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: Vec<f64>,
}

impl Field {
    pub fn new(values: Vec<f64>) -> Field {
        Field { values }
    }

    pub fn zeros(n: usize) -> Field {
        Field { values: vec![0.0; n] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Field {
        Field::new(self.values.iter().map(|v| c * v).collect())
    }

    pub fn abs(&self) -> Field {
        Field::new(self.values.iter().map(|v| v.abs()).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Per-cell gradient vectors and their Euclidean lengths.
#[derive(Debug, Clone)]
pub struct GradField {
    vectors: Vec<[f64; 2]>,
    magnitude: Vec<f64>,
}

impl GradField {
    pub fn new(vectors: Vec<[f64; 2]>) -> GradField {
        let magnitude = vectors.iter().map(|g| g[0].hypot(g[1])).collect();
        GradField { vectors, magnitude }
    }

    pub fn vectors(&self) -> &[[f64; 2]] {
        &self.vectors
    }

    pub fn magnitude(&self) -> &[f64] {
        &self.magnitude
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_bookkeeping() {
        let m = Mesh::interval(0.0, 2.0, 8).unwrap();
        assert_eq!(m.node_count(), 7);
        assert_eq!(m.cell_count(), 8);
        assert!((m.total_measure() - 2.0).abs() < 1e-15);
        assert_eq!(m.corners()[0], [None, Some(0), None, None]);
        assert_eq!(m.corners()[7], [Some(6), None, None, None]);
    }

    #[test]
    fn grid_interior_nodes_need_four_inside_cells() {
        let m = Mesh::rectangle(0.0, 1.0, 0.0, 1.0, 4, 4).unwrap();
        assert_eq!(m.node_count(), 9);
        let mut mask = vec![true; 16];
        mask[5] = false;
        let holed = Mesh::masked(0.0, 1.0, 0.0, 1.0, 4, 4, mask).unwrap();
        // the four corners of cell (1,1) stop being interior
        assert_eq!(holed.node_count(), 5);
        assert!((holed.total_measure() - 15.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn zero_field_has_zero_gradient() {
        let m = Mesh::rectangle(0.0, 1.0, 0.0, 1.0, 6, 5).unwrap();
        let g = m.gradient(&Field::zeros(m.node_count())).unwrap();
        assert!(g.magnitude().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_field_gradient_exact_in_interior_cells() {
        let m = Mesh::interval(0.0, 1.0, 10).unwrap();
        let u = m.field_from_fn(|x| x[0]);
        let g = m.gradient(&u).unwrap();
        for (c, v) in g.vectors().iter().enumerate() {
            if c == 9 {
                // last interval drops to the zero boundary value
                assert!((v[0] + 9.0).abs() < 1e-12);
            } else {
                assert!((v[0] - 1.0).abs() < 1e-12, "cell {c}: {}", v[0]);
            }
        }

        let m2 = Mesh::rectangle(0.0, 1.0, 0.0, 1.0, 8, 8).unwrap();
        let u2 = m2.field_from_fn(|x| 2.0 * x[0] - 3.0 * x[1]);
        let g2 = m2.gradient(&u2).unwrap();
        for ((c, v), corners) in g2.vectors().iter().enumerate().zip(m2.corners()) {
            if corners.iter().all(|k| k.is_some()) {
                assert!((v[0] - 2.0).abs() < 1e-12 && (v[1] + 3.0).abs() < 1e-12, "cell {c}");
            }
        }
    }

    #[test]
    fn hat_function_slopes() {
        let m = Mesh::interval(0.0, 1.0, 8).unwrap();
        let u = m.field_from_fn(|x| 1.0 - (2.0 * x[0] - 1.0).abs());
        let g = m.gradient(&u).unwrap();
        for (c, v) in g.vectors().iter().enumerate() {
            let expected = if c < 4 { 2.0 } else { -2.0 };
            assert!((v[0] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn adjoints_match_forward_maps() {
        let m = Mesh::masked(0.0, 1.0, 0.0, 2.0, 5, 7, (0..35).map(|k| k % 11 != 3).collect()).unwrap();
        let n = m.node_count();
        let x: Vec<f64> = (0..n).map(|k| ((k * 7919) % 13) as f64 - 6.0).collect();
        let cov: Vec<f64> = (0..m.cell_count()).map(|k| ((k * 104729) % 17) as f64 * 0.1).collect();
        let lhs: f64 = m.cell_values_raw(&x).iter().zip(&cov).map(|(a, b)| a * b).sum();
        let rhs: f64 = m.cell_values_adjoint(&cov).iter().zip(&x).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-10);

        let gcov: Vec<[f64; 2]> = cov.iter().map(|&c| [c, 1.0 - c]).collect();
        let lhs: f64 = m
            .gradient_raw(&x)
            .iter()
            .zip(&gcov)
            .map(|(a, b)| a[0] * b[0] + a[1] * b[1])
            .sum();
        let rhs: f64 = m.gradient_adjoint(&gcov).iter().zip(&x).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn shape_errors() {
        let m = Mesh::interval(0.0, 1.0, 4).unwrap();
        assert!(matches!(m.gradient(&Field::zeros(2)), Err(Error::Shape { .. })));
        assert!(Mesh::interval(1.0, 0.0, 4).is_err());
    }
}
