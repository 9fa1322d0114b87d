use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use doublephase::discretize::io::{read_mask, read_samples, SampleKind};
use doublephase::discretize::{Field, Mesh};
use doublephase::eigensolver::{first_eigenpair, first_eigenpair_rescaled, minimax_table, SolverOptions};
use doublephase::error::{Error, Result};
use doublephase::experiments::{
    interval_family, run_domain_monotonicity, run_faber_krahn, run_large_exponents, run_stability, run_symmetry,
    run_weyl, square_family, ExperimentReport, EXPERIMENTS,
};
use doublephase::orlicz::{
    closed_form_norm_cells, lp_norm_cells, luxemburg_norm_cells, modular_cells, rescaled_norm_cells, NFunctionParams,
    WeightField, WeightSpec,
};

use crate::config::RunConfig;

/// Outcome classes mapped onto process exit codes.
pub enum Outcome {
    Ok,
    Failed(Error),
    NotConverged,
    ChecksFailed,
}

impl Outcome {
    pub fn code(&self) -> u8 {
        match self {
            Outcome::Ok => 0,
            Outcome::Failed(e) if e.is_validation() => 2,
            Outcome::Failed(_) | Outcome::ChecksFailed => 3,
            Outcome::NotConverged => 4,
        }
    }
}

const DEFAULT_1D: usize = 512;
const DEFAULT_2D: usize = 96;

fn build_mesh(cfg: &RunConfig, default_dim: usize) -> Result<Mesh> {
    let dim: usize = cfg.get_opt("mesh.dim")?.unwrap_or(default_dim);
    let (x0, x1): (f64, f64) = (cfg.get("mesh.x0")?, cfg.get("mesh.x1")?);
    let mask = cfg.raw("mesh.mask").unwrap_or("none");
    match dim {
        1 => {
            if mask != "none" {
                return Err(Error::Invalid(format!("mesh.mask = {mask} needs a 2D mesh")));
            }
            Mesh::interval(x0, x1, cfg.get_opt("mesh.resolution")?.unwrap_or(DEFAULT_1D))
        }
        2 => {
            let (y0, y1): (f64, f64) = (cfg.get("mesh.y0")?, cfg.get("mesh.y1")?);
            let n = cfg.get_opt("mesh.resolution")?.unwrap_or(DEFAULT_2D);
            match mask {
                "none" => Mesh::rectangle(x0, x1, y0, y1, n, n),
                "disk" => {
                    let r = 0.5 * (x1 - x0).min(y1 - y0);
                    Mesh::disk_in_box(x0, x1, y0, y1, n, n, [0.5 * (x0 + x1), 0.5 * (y0 + y1)], r)
                }
                other => match other.strip_prefix("file:") {
                    Some(path) => {
                        let file = File::open(path).map_err(|e| Error::Invalid(format!("cannot open mask {path}: {e}")))?;
                        Mesh::masked(x0, x1, y0, y1, n, n, read_mask(file, n, n)?)
                    }
                    None => Err(Error::Invalid(format!("unknown mesh.mask '{other}' (none, disk, file:PATH)"))),
                },
            }
        }
        d => Err(Error::Invalid(format!("mesh.dim must be 1 or 2, got {d}"))),
    }
}

fn weight_spec(cfg: &RunConfig) -> Result<WeightSpec> {
    cfg.get::<String>("phase.weight")?.parse()
}

fn exponents(cfg: &RunConfig) -> Result<(f64, f64)> {
    Ok((cfg.get("phase.p")?, cfg.get("phase.q")?))
}

fn phase(cfg: &RunConfig, mesh: &Mesh) -> Result<NFunctionParams> {
    let (p, q) = exponents(cfg)?;
    NFunctionParams::relaxed(p, q, WeightField::from_spec(&weight_spec(cfg)?, mesh)?)
}

fn create(out: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(out)?;
    Ok(BufWriter::new(File::create(out.join(name))?))
}

fn field_samples(cfg: &RunConfig, mesh: &Mesh) -> Result<Vec<f64>> {
    let spec: String = cfg.get("norm.field")?;
    if let Some(c) = spec.strip_prefix("constant:") {
        let c: f64 = c.trim().parse().map_err(|_| Error::Invalid(format!("bad constant field '{spec}'")))?;
        return Ok(vec![c; mesh.cell_count()]);
    }
    let file = File::open(&spec).map_err(|e| Error::Invalid(format!("cannot open field {spec}: {e}")))?;
    match read_samples(file, mesh)? {
        (SampleKind::Cell, v) => Ok(v),
        (SampleKind::Node, v) => mesh.cell_values(&Field::new(v)),
    }
}

pub fn cmd_norm(cfg: &RunConfig) -> Result<Outcome> {
    let mesh = build_mesh(cfg, 1)?;
    let (p, q) = exponents(cfg)?;
    let h = NFunctionParams::new(p, q, WeightField::from_spec(&weight_spec(cfg)?, &mesh)?)?;
    let u = field_samples(cfg, &mesh)?;
    let bisection = luxemburg_norm_cells(&u, &h, &mesh)?;
    let closed = match closed_form_norm_cells(&u, &h, &mesh) {
        Ok(r) => format!("{}", r.value),
        Err(Error::FallbackRequired) => format!("{} (L^p fallback, a·|u|^q vanishes)", lp_norm_cells(&u, p, &mesh)),
        Err(e) => return Err(e),
    };
    println!("mesh        {}", mesh.descriptor());
    println!("bisection   {}", bisection.value);
    println!("closed_form {closed}");
    println!("modular     {}", modular_cells(&u, &h, &mesh)?);
    println!("rescaled    {}", rescaled_norm_cells(&u, &h, &mesh)?);
    Ok(Outcome::Ok)
}

pub fn cmd_eig(cfg: &RunConfig, strict: bool) -> Result<Outcome> {
    let mesh = build_mesh(cfg, 1)?;
    let h = phase(cfg, &mesh)?;
    let opts = cfg.solver()?;
    let e = match cfg.raw("eig.norm").unwrap_or("standard") {
        "standard" => first_eigenpair(&mesh, &h, &opts)?,
        "rescaled" => first_eigenpair_rescaled(&mesh, &h, &opts)?,
        other => return Err(Error::Invalid(format!("eig.norm must be standard or rescaled, got '{other}'"))),
    };
    let out = cfg.out_dir();
    let mut w = create(&out, "eigenfunction.csv")?;
    e.write_csv(&mut w, &mesh)?;
    w.flush()?;
    let mut w = create(&out, "eigenpair.json")?;
    writeln!(w, "{}", e.metadata_json(&h, &mesh, &weight_spec(cfg)?.to_string())?)?;
    w.flush()?;
    println!("lambda     {}", e.lambda);
    println!("residual   {:e}", e.residual);
    println!("s_of_u     {}", e.s_of_u);
    println!("iterations {}", e.iterations);
    println!("converged  {}", e.converged);
    Ok(if strict && !e.converged { Outcome::NotConverged } else { Outcome::Ok })
}

pub fn cmd_eigm(cfg: &RunConfig) -> Result<Outcome> {
    let mesh = build_mesh(cfg, 1)?;
    let h = phase(cfg, &mesh)?;
    let opts = cfg.solver()?;
    let m_max: usize = cfg.get("eigm.m_max")?;
    let table = minimax_table(&mesh, &h, m_max, &opts)?;
    let mut w = create(&cfg.out_dir(), "minimax.csv")?;
    writeln!(w, "# schema=1 kind=minimax seed={} mesh={}", opts.rng_seed, mesh.descriptor())?;
    writeln!(w, "m,upper_bound,raw")?;
    println!("m  upper_bound");
    for (k, (b, r)) in table.bounds.iter().zip(&table.raw).enumerate() {
        writeln!(w, "{},{b},{r}", k + 1)?;
        println!("{:<2} {b}", k + 1);
    }
    w.flush()?;
    Ok(Outcome::Ok)
}

fn unit_weight_only(cfg: &RunConfig, name: &str) -> Result<()> {
    match weight_spec(cfg)? {
        WeightSpec::Constant(c) if c == 1.0 => Ok(()),
        other => Err(Error::Invalid(format!("experiment {name} needs phase.weight = constant:1, got {other}"))),
    }
}

fn run_named(name: &str, cfg: &RunConfig, opts: &SolverOptions) -> Result<ExperimentReport> {
    let (p, q) = exponents(cfg)?;
    match name {
        "stability" => {
            let mesh = build_mesh(cfg, 1)?;
            run_stability(p, q, cfg.get("experiment.steps")?, cfg.get("experiment.delta0")?, &mesh, &weight_spec(cfg)?, opts)
        }
        "domains" => {
            let n: Option<usize> = cfg.get_opt("mesh.resolution")?;
            let family = match cfg.raw("experiment.family").unwrap_or("intervals") {
                "intervals" => {
                    let hs = cfg.list("experiment.sizes")?.unwrap_or_else(|| vec![2, 4, 8, 16, 32, 64]);
                    interval_family(&hs, n.unwrap_or(DEFAULT_1D))?
                }
                "squares" => {
                    let n = n.unwrap_or(DEFAULT_2D);
                    let sides = cfg.list("experiment.sizes")?.unwrap_or_else(|| vec![n / 2, 3 * n / 4, 7 * n / 8, n - 1]);
                    square_family(&sides, n)?
                }
                other => return Err(Error::Invalid(format!("experiment.family must be intervals or squares, got '{other}'"))),
            };
            run_domain_monotonicity(&family, p, q, &weight_spec(cfg)?, opts)
        }
        "faberkrahn" => {
            unit_weight_only(cfg, name)?;
            let mesh = build_mesh(cfg, 2)?;
            let coarse = if cfg.bool("experiment.coarse")? {
                let mut c = cfg.clone();
                c.set("mesh.resolution", &(mesh.grid_shape().0 / 2).to_string())?;
                c.set("mesh.dim", "2")?;
                Some(build_mesh(&c, 2)?)
            } else {
                None
            };
            run_faber_krahn(&mesh, coarse.as_ref(), p, q, opts)
        }
        "largeexp" => {
            let mesh = build_mesh(cfg, 1)?;
            let base = NFunctionParams::new(p, q, WeightField::from_spec(&weight_spec(cfg)?, &mesh)?)?;
            let hs: Vec<u32> = cfg.list("experiment.h_list")?.unwrap_or_default();
            run_large_exponents(&mesh, &base, &hs, opts)
        }
        "weyl" => {
            let mesh = build_mesh(cfg, 1)?;
            run_weyl(&mesh, &phase(cfg, &mesh)?, cfg.get("experiment.m_max")?, opts)
        }
        "symmetry" => {
            unit_weight_only(cfg, name)?;
            let mesh = build_mesh(cfg, 1)?;
            run_symmetry(&mesh, p, q, cfg.get("experiment.axis")?, opts)
        }
        other => Err(Error::Invalid(format!("unknown experiment '{other}' (one of {})", EXPERIMENTS.join(", ")))),
    }
}

pub fn cmd_experiment(name: &str, cfg: &RunConfig, strict: bool) -> Result<Outcome> {
    let opts = cfg.solver()?;
    let report = run_named(name, cfg, &opts)?;
    let out = cfg.out_dir();
    let mut w = create(&out, &format!("{name}.csv"))?;
    report.write_csv(&mut w)?;
    w.flush()?;
    let mut w = create(&out, &format!("{name}.svg"))?;
    w.write_all(report.svg().as_bytes())?;
    w.flush()?;
    print!("{}", report.summary_text());
    let unconverged = report.check_named("all_rows_converged").is_some_and(|c| !c.passed);
    Ok(if strict && unconverged {
        Outcome::NotConverged
    } else if report.passed() {
        Outcome::Ok
    } else {
        Outcome::ChecksFailed
    })
}
