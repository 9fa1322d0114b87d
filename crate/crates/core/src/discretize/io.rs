//! CSV import/export of nodal fields, cell samples and masks.
//!
//! Every file starts with a `# schema=1 kind=<node|cell|mask> dim=<1|2>`
//! line, followed by a header row and one row per entry with integer grid
//! coordinates and a value.

use std::io::{BufRead, BufReader, Read, Write};

use super::mesh::Mesh;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// What a CSV row indexes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    /// Interior nodes, indexed by grid node coordinates.
    Node,
    /// Inside cells, indexed by grid cell coordinates.
    Cell,
}

impl SampleKind {
    fn tag(self) -> &'static str {
        match self {
            SampleKind::Node => "node",
            SampleKind::Cell => "cell",
        }
    }
}

fn keys(mesh: &Mesh, kind: SampleKind) -> Vec<(usize, usize)> {
    match kind {
        SampleKind::Node => mesh.node_indices().to_vec(),
        SampleKind::Cell => mesh.cell_indices(),
    }
}

/// Writes per-node or per-cell values in mesh order.
pub fn write_samples<W: Write>(mut out: W, mesh: &Mesh, kind: SampleKind, values: &[f64]) -> Result<()> {
    let idx = keys(mesh, kind);
    if idx.len() != values.len() {
        return Err(Error::Shape { expected: idx.len(), got: values.len() });
    }
    writeln!(out, "# schema={SCHEMA_VERSION} kind={} dim={}", kind.tag(), mesh.dim())?;
    let mut w = csv::Writer::from_writer(out);
    if mesh.dim() == 1 {
        w.write_record(["i", "value"])?;
        for (&(i, _), v) in idx.iter().zip(values) {
            w.write_record([i.to_string(), v.to_string()])?;
        }
    } else {
        w.write_record(["i", "j", "value"])?;
        for (&(i, j), v) in idx.iter().zip(values) {
            w.write_record([i.to_string(), j.to_string(), v.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn parse_preamble(line: &str) -> Result<(String, usize)> {
    let body = line
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| Error::Invalid("missing '# schema=' preamble".into()))?;
    let mut schema = None;
    let mut kind = None;
    let mut dim = None;
    for tok in body.split_whitespace() {
        match tok.split_once('=') {
            Some(("schema", v)) => schema = v.parse::<u32>().ok(),
            Some(("kind", v)) => kind = Some(v.to_string()),
            Some(("dim", v)) => dim = v.parse::<usize>().ok(),
            _ => {}
        }
    }
    if schema != Some(SCHEMA_VERSION) {
        return Err(Error::Invalid(format!("unsupported schema in preamble '{}'", line.trim())));
    }
    match (kind, dim) {
        (Some(k), Some(d)) => Ok((k, d)),
        _ => Err(Error::Invalid("preamble must name kind and dim".into())),
    }
}

fn read_table<R: Read>(input: R) -> Result<(String, usize, Vec<csv::StringRecord>)> {
    let mut reader = BufReader::new(input);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let (kind, dim) = parse_preamble(&first)?;
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let rows = r.records().collect::<std::result::Result<Vec<_>, _>>()?;
    Ok((kind, dim, rows))
}

fn parse<T: std::str::FromStr>(s: &str, row: usize) -> Result<T> {
    s.parse().map_err(|_| Error::Invalid(format!("row {row}: cannot parse '{s}'")))
}

/// Reads values written by [`write_samples`] back into mesh order. Every
/// node (or cell) must appear exactly once.
pub fn read_samples<R: Read>(input: R, mesh: &Mesh) -> Result<(SampleKind, Vec<f64>)> {
    let (tag, dim, rows) = read_table(input)?;
    let kind = match tag.as_str() {
        "node" => SampleKind::Node,
        "cell" => SampleKind::Cell,
        other => return Err(Error::Invalid(format!("expected node or cell samples, found '{other}'"))),
    };
    if dim != mesh.dim() {
        return Err(Error::Invalid(format!("file is {dim}D, mesh is {}D", mesh.dim())));
    }
    let idx = keys(mesh, kind);
    let (nx, _) = mesh.grid_shape();
    let width = nx + 1;
    let mut slot = std::collections::HashMap::with_capacity(idx.len());
    for (k, &(i, j)) in idx.iter().enumerate() {
        slot.insert(j * width + i, k);
    }
    let mut out = vec![f64::NAN; idx.len()];
    for (r, rec) in rows.iter().enumerate() {
        if rec.len() != dim + 1 {
            return Err(Error::Invalid(format!("row {r}: expected {} columns", dim + 1)));
        }
        let i: usize = parse(&rec[0], r)?;
        let j: usize = if dim == 2 { parse(&rec[1], r)? } else { 0 };
        let v: f64 = parse(&rec[dim], r)?;
        if !v.is_finite() {
            return Err(Error::Invalid(format!("row {r}: non-finite value")));
        }
        let k = *slot
            .get(&(j * width + i))
            .ok_or_else(|| Error::Invalid(format!("row {r}: ({i}, {j}) is not an unknown of the mesh")))?;
        if !out[k].is_nan() {
            return Err(Error::Invalid(format!("row {r}: ({i}, {j}) given twice")));
        }
        out[k] = v;
    }
    if let Some(k) = out.iter().position(|v| v.is_nan()) {
        return Err(Error::Invalid(format!("missing value for {:?}", idx[k])));
    }
    Ok((kind, out))
}

/// Writes the inside-mask of a 2D grid as `i,j,inside` rows.
pub fn write_mask<W: Write>(mut out: W, mesh: &Mesh) -> Result<()> {
    let (nx, ny) = mesh.grid_shape();
    writeln!(out, "# schema={SCHEMA_VERSION} kind=mask dim=2 nx={nx} ny={ny}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "j", "inside"])?;
    for j in 0..ny {
        for i in 0..nx {
            let inside = u8::from(mesh.mask()[j * nx + i]);
            w.write_record([i.to_string(), j.to_string(), inside.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a mask for an `nx * ny` grid; cells not listed are outside.
pub fn read_mask<R: Read>(input: R, nx: usize, ny: usize) -> Result<Vec<bool>> {
    let (tag, _, rows) = read_table(input)?;
    if tag != "mask" {
        return Err(Error::Invalid(format!("expected a mask file, found '{tag}'")));
    }
    let mut mask = vec![false; nx * ny];
    for (r, rec) in rows.iter().enumerate() {
        if rec.len() != 3 {
            return Err(Error::Invalid(format!("row {r}: expected 3 columns")));
        }
        let i: usize = parse(&rec[0], r)?;
        let j: usize = parse(&rec[1], r)?;
        if i >= nx || j >= ny {
            return Err(Error::Invalid(format!("row {r}: cell ({i}, {j}) outside the {nx}x{ny} grid")));
        }
        mask[j * nx + i] = parse::<u8>(&rec[2], r)? != 0;
    }
    Ok(mask)
}
