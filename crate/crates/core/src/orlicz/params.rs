use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::discretize::io::{read_samples, SampleKind};
use crate::discretize::{Geometry, Mesh};
use crate::error::{domain, Error, Result};

/// How the weight `a(x)` is generated on a mesh.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    /// `a ≡ c`.
    Constant(f64),
    /// Linear in the first coordinate across the bounding box, from `c0`
    /// on the left edge to `c1` on the right edge.
    Ramp(f64, f64),
    /// `c` on alternate blocks of a `k x k` (or `k` in 1D) subdivision of
    /// the bounding box, 0 on the others.
    Checkerboard(f64, usize),
    /// Per-cell values from a cell CSV file.
    File(PathBuf),
}

impl WeightSpec {
    fn eval(&self, mesh: &Mesh, x: [f64; 2]) -> f64 {
        let (lo, hi) = match *mesh.geometry() {
            Geometry::Interval { a, b, .. } => ([a, 0.0], [b, 1.0]),
            Geometry::Grid { x0, x1, y0, y1, .. } => ([x0, y0], [x1, y1]),
        };
        let rel = |d: usize| ((x[d] - lo[d]) / (hi[d] - lo[d])).clamp(0.0, 1.0);
        match *self {
            WeightSpec::Constant(c) => c,
            WeightSpec::Ramp(c0, c1) => c0 + (c1 - c0) * rel(0),
            WeightSpec::Checkerboard(c, k) => {
                let block = |d: usize| ((rel(d) * k as f64).floor() as usize).min(k - 1);
                let parity = if mesh.dim() == 1 { block(0) } else { block(0) + block(1) };
                if parity % 2 == 0 {
                    c
                } else {
                    0.0
                }
            }
            WeightSpec::File(_) => unreachable!("file weights are read, not evaluated"),
        }
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::Constant(c) => write!(f, "constant:{c}"),
            WeightSpec::Ramp(c0, c1) => write!(f, "ramp:{c0},{c1}"),
            WeightSpec::Checkerboard(c, k) => write!(f, "checkerboard:{c},{k}"),
            WeightSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for WeightSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<WeightSpec> {
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| Error::Invalid(format!("weight descriptor '{s}' lacks a ':'")))?;
        let nums = || -> Result<Vec<f64>> {
            args.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Invalid(format!("bad number '{t}' in weight '{s}'")))
                })
                .collect()
        };
        let spec = match kind.trim() {
            "constant" => match nums()?[..] {
                [c] => WeightSpec::Constant(c),
                _ => return Err(Error::Invalid(format!("'{s}': constant takes one value"))),
            },
            "ramp" => match nums()?[..] {
                [c0, c1] => WeightSpec::Ramp(c0, c1),
                _ => return Err(Error::Invalid(format!("'{s}': ramp takes two values"))),
            },
            "checkerboard" => match nums()?[..] {
                [c, k] if k >= 1.0 && k.fract() == 0.0 => WeightSpec::Checkerboard(c, k as usize),
                _ => return Err(Error::Invalid(format!("'{s}': checkerboard takes c and a block count k >= 1"))),
            },
            "file" => WeightSpec::File(PathBuf::from(args.trim())),
            other => return Err(Error::Invalid(format!("unknown weight kind '{other}'"))),
        };
        match spec {
            WeightSpec::Constant(c) | WeightSpec::Ramp(c, _) | WeightSpec::Checkerboard(c, _) if c < 0.0 => {
                Err(Error::Invalid(format!("weight '{s}' is negative somewhere")))
            }
            WeightSpec::Ramp(_, c1) if c1 < 0.0 => Err(Error::Invalid(format!("weight '{s}' is negative somewhere"))),
            spec => Ok(spec),
        }
    }
}

/// The weight `a(x) ≥ 0` sampled on a mesh: one value per inside cell
/// (the quadrature points) and one per interior node (for lumped nodal
/// quadrature).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightField {
    cell: Vec<f64>,
    node: Vec<f64>,
    sup_norm: f64,
    l1_norm: f64,
}

impl WeightField {
    pub fn constant(mesh: &Mesh, c: f64) -> Result<WeightField> {
        WeightField::from_spec(&WeightSpec::Constant(c), mesh)
    }

    pub fn zero(mesh: &Mesh) -> WeightField {
        WeightField::constant(mesh, 0.0).expect("zero weight is valid")
    }

    pub fn from_spec(spec: &WeightSpec, mesh: &Mesh) -> Result<WeightField> {
        if let WeightSpec::File(path) = spec {
            let file = std::fs::File::open(path)?;
            let (kind, values) = read_samples(file, mesh)?;
            if kind != SampleKind::Cell {
                return Err(Error::Invalid(format!("{}: weights must be cell samples", path.display())));
            }
            return WeightField::from_cell_values(mesh, values);
        }
        let cell = mesh.sample_cells(|x| spec.eval(mesh, x));
        let node = mesh.node_coords().iter().map(|&x| spec.eval(mesh, x)).collect();
        WeightField::assemble(mesh, cell, node)
    }

    /// Per-cell values; node values are the mean over the adjacent cells.
    pub fn from_cell_values(mesh: &Mesh, cell: Vec<f64>) -> Result<WeightField> {
        if cell.len() != mesh.cell_count() {
            return Err(Error::Shape { expected: mesh.cell_count(), got: cell.len() });
        }
        let mut sum = vec![0.0; mesh.node_count()];
        let mut count = vec![0usize; mesh.node_count()];
        for (corners, &a) in mesh.corners().iter().zip(&cell) {
            for k in corners.iter().flatten() {
                sum[*k] += a;
                count[*k] += 1;
            }
        }
        let node = sum.iter().zip(&count).map(|(s, &c)| s / c as f64).collect();
        WeightField::assemble(mesh, cell, node)
    }

    fn assemble(mesh: &Mesh, cell: Vec<f64>, node: Vec<f64>) -> Result<WeightField> {
        if let Some(v) = cell.iter().chain(&node).find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(domain(format!("weight values must be finite and nonnegative, found {v}")));
        }
        let sup_norm = cell.iter().fold(0.0f64, |m, &v| m.max(v));
        let l1_norm = cell.iter().sum::<f64>() * mesh.cell_measure();
        Ok(WeightField { cell, node, sup_norm, l1_norm })
    }

    /// Values at the quadrature points.
    pub fn values(&self) -> &[f64] {
        &self.cell
    }

    pub fn node_values(&self) -> &[f64] {
        &self.node
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn l1_norm(&self) -> f64 {
        self.l1_norm
    }

    pub fn is_zero(&self) -> bool {
        self.sup_norm == 0.0
    }
}

/// The double-phase N-function `H(x, t) = t^p + a(x) t^q`, optionally
/// raised to `(hH)(x, t) = t^{hp} + a(x) t^{hq}`.
#[derive(Debug, Clone, PartialEq)]
pub struct NFunctionParams {
    p: f64,
    q: f64,
    weight: WeightField,
    scale_h: u32,
}

impl NFunctionParams {
    /// Requires `1 < p < q`.
    pub fn new(p: f64, q: f64, weight: WeightField) -> Result<NFunctionParams> {
        if !(p < q) {
            return Err(domain(format!("exponents must satisfy p < q, got p = {p}, q = {q}")));
        }
        NFunctionParams::relaxed(p, q, weight)
    }

    /// Like [`NFunctionParams::new`] but also accepts the single-phase
    /// limit `p = q`.
    pub fn relaxed(p: f64, q: f64, weight: WeightField) -> Result<NFunctionParams> {
        if !(p.is_finite() && q.is_finite() && p > 1.0) {
            return Err(domain(format!("exponent p must be finite and > 1, got {p}")));
        }
        if !(p <= q) {
            return Err(domain(format!("exponents must satisfy p <= q, got p = {p}, q = {q}")));
        }
        let h = NFunctionParams { p, q, weight, scale_h: 1 };
        h.delta2_check()?;
        Ok(h)
    }

    /// Same weight, exponents `(hp, hq)`.
    pub fn with_scale(&self, scale_h: u32) -> Result<NFunctionParams> {
        if scale_h == 0 {
            return Err(domain("scale h must be a positive integer"));
        }
        Ok(NFunctionParams { scale_h, ..self.clone() })
    }

    /// Same weight, new base exponents.
    pub fn with_exponents(&self, p: f64, q: f64) -> Result<NFunctionParams> {
        let mut h = NFunctionParams::relaxed(p, q, self.weight.clone())?;
        h.scale_h = self.scale_h;
        Ok(h)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn scale_h(&self) -> u32 {
        self.scale_h
    }

    /// Effective exponents `(hp, hq)`.
    pub fn exponents(&self) -> (f64, f64) {
        let h = self.scale_h as f64;
        (h * self.p, h * self.q)
    }

    pub fn weight(&self) -> &WeightField {
        &self.weight
    }

    /// `H(x, t)` at a point where the weight is `a`.
    pub fn value(&self, a: f64, t: f64) -> f64 {
        let (p, q) = self.exponents();
        let t = t.abs();
        let tq = if a == 0.0 { 0.0 } else { a * t.powf(q) };
        t.powf(p) + tq
    }

    /// `σ = n (1/p - 1/q)`.
    pub fn sigma(&self, n: usize) -> f64 {
        let (p, q) = self.exponents();
        n as f64 * (1.0 / p - 1.0 / q)
    }

    /// `w = 1 + ‖a‖_∞ + |Ω|`.
    pub fn w_constant(&self, mesh: &Mesh) -> f64 {
        1.0 + self.weight.sup_norm() + mesh.total_measure()
    }

    /// `|Ω| + ‖a‖₁`, the rescaled-modular normaliser.
    pub fn rescale_constant(&self, mesh: &Mesh) -> f64 {
        mesh.total_measure() + self.weight.l1_norm()
    }

    /// Spot check of `H(x, 2t) ≤ 2^q H(x, t)` at `t ∈ {1e-3, 1, 1e3}` on
    /// every quadrature point.
    pub fn delta2_check(&self) -> Result<()> {
        let (_, q) = self.exponents();
        let bound = q.exp2();
        for &a in self.weight.values() {
            for t in [1e-3, 1.0, 1e3] {
                let (lhs, rhs) = (self.value(a, 2.0 * t), bound * self.value(a, t));
                if lhs.is_finite() && rhs.is_finite() && lhs > rhs * (1.0 + 1e-12) {
                    return Err(Error::Contract(format!("Δ2 condition fails at a = {a}, t = {t}")));
                }
            }
        }
        Ok(())
    }

    /// Errors unless the weight lives on `mesh`.
    pub fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        if self.weight.values().len() != mesh.cell_count() || self.weight.node_values().len() != mesh.node_count() {
            return Err(Error::Shape { expected: mesh.cell_count(), got: self.weight.values().len() });
        }
        Ok(())
    }
}
