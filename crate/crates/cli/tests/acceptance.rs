//! Acceptance suite: one PASS/FAIL line per criterion, run sequentially so
//! the wall-clock limits are measured without interference.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use doublephase::discretize::{
    dual_gradient_lp, polarize_cells, schwarz_symmetrize_cells, Field, HalfSpace, Mesh, ReflectionPlane,
};
use doublephase::eigensolver::{
    big_kprime_pairing, directional_derivative_check, first_eigenpair, kprime_pairing, Eigenpair, SolverOptions,
};
use doublephase::experiments::{
    interval_family, run_domain_monotonicity, run_faber_krahn, run_large_exponents, run_stability, run_symmetry,
    run_weyl, square_family, ExperimentReport,
};
use doublephase::oracle1d::{pi_p, pi_p_at_level, plap_shooting};
use doublephase::orlicz::{
    closed_form_norm_cells, luxemburg_norm_cells, modular_cells, sandwich_ratios, NFunctionParams, WeightField,
    WeightSpec,
};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn within(elapsed: Duration, limit_s: u64) -> Outcome {
    ensure!(elapsed <= Duration::from_secs(limit_s), "took {:.1?}, limit {limit_s} s", elapsed);
    Ok(String::new())
}

fn phase(mesh: &Mesh, p: f64, q: f64, w: &WeightSpec) -> NFunctionParams {
    NFunctionParams::relaxed(p, q, WeightField::from_spec(w, mesh).unwrap()).unwrap()
}

fn unit(mesh: &Mesh, p: f64, q: f64) -> NFunctionParams {
    phase(mesh, p, q, &WeightSpec::Constant(1.0))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn report_ok(r: &ExperimentReport) -> Outcome {
    let failed: Vec<String> = r.failed_checks().iter().map(|c| format!("{} = {}", c.name, c.value)).collect();
    ensure!(failed.is_empty(), "failed checks: {}", failed.join(", "));
    Ok(String::new())
}

fn norm_engine() -> Outcome {
    let t = Instant::now();
    let mesh = Mesh::interval(0.0, 1.0, 200).unwrap();
    let weights = [WeightSpec::Constant(1.3), WeightSpec::Ramp(0.0, 2.0), WeightSpec::Checkerboard(1.5, 5)];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut cf, mut ball, mut homo) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..200 {
        let p = rng.gen_range(1.2..3.5);
        let q = p + rng.gen_range(0.1..3.0);
        let h = phase(&mesh, p, q, &weights[k % 3]);
        let u: Vec<f64> = (0..200).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let b = luxemburg_norm_cells(&u, &h, &mesh).unwrap().value;
        cf = cf.max(rel(closed_form_norm_cells(&u, &h, &mesh).unwrap().value, b));
        let unit_u: Vec<f64> = u.iter().map(|v| v / b).collect();
        ball = ball.max((modular_cells(&unit_u, &h, &mesh).unwrap() - 1.0).abs());
        for c in [-2.0, 0.5, 10.0] {
            let cu: Vec<f64> = u.iter().map(|v| c * v).collect();
            homo = homo.max(rel(luxemburg_norm_cells(&cu, &h, &mesh).unwrap().value, f64::abs(c) * b));
        }
    }
    ensure!(cf <= 1e-9, "closed form vs bisection {cf:e}");
    ensure!(ball <= 1e-9, "unit-ball defect {ball:e}");
    ensure!(homo <= 1e-10, "homogeneity defect {homo:e}");
    within(t.elapsed(), 5)?;
    Ok(format!("closed-form {cf:.1e}, unit ball {ball:.1e}, homogeneity {homo:.1e}, {:.2?}", t.elapsed()))
}

fn golden_ratio() -> Outcome {
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid.powi(-2) + mid.powi(-4) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let gamma = 0.5 * (lo + hi);
    let mesh = Mesh::interval(0.0, 1.0, 512).unwrap();
    let got = luxemburg_norm_cells(&[1.0; 512], &unit(&mesh, 2.0, 4.0), &mesh).unwrap().value;
    ensure!((got - gamma).abs() <= 1e-9, "norm {got} vs oracle {gamma}");
    Ok(format!("norm {got:.10}, oracle {gamma:.10}"))
}

fn pi_p_quadrature() -> Outcome {
    let v = pi_p(2.0).map_err(|e| e.to_string())?;
    ensure!((v.value - PI).abs() <= 1e-8, "π₂ = {}", v.value);
    let e1 = pi_p_at_level(2.0, 2).unwrap().error_estimate;
    let e2 = pi_p_at_level(2.0, 3).unwrap().error_estimate;
    ensure!(e1 >= 4.0 * e2, "error estimates {e1:e} -> {e2:e}");
    Ok(format!("π₂ - π = {:.1e}, refinement ratio {:.1e}", v.value - PI, e1 / e2))
}

fn single_phase_oracle() -> Outcome {
    let mesh = Mesh::interval(0.0, 1.0, 512).unwrap();
    let mut detail = Vec::new();
    for (p, tol) in [(2.0, 0.01), (3.0, 0.02)] {
        let t = Instant::now();
        let e = first_eigenpair(&mesh, &unit(&mesh, p, p), &SolverOptions::default()).unwrap();
        let elapsed = t.elapsed();
        let oracle = plap_shooting(p, (0.0, 1.0), 1, 16).unwrap().lambda_ode.powf(1.0 / p);
        ensure!(e.converged, "p = {p} did not converge");
        ensure!(rel(e.lambda, oracle) <= tol, "p = {p}: λ = {} vs {oracle}", e.lambda);
        within(elapsed, 30)?;
        detail.push(format!("p={p}: rel err {:.1e} in {elapsed:.2?}", rel(e.lambda, oracle)));
    }
    Ok(detail.join("; "))
}

fn eigenpairs() -> Vec<(Mesh, NFunctionParams, Eigenpair)> {
    let mesh = Mesh::interval(0.0, 1.0, 256).unwrap();
    let configs = [
        (2.0, 2.0, WeightSpec::Constant(1.0)),
        (3.0, 3.0, WeightSpec::Constant(2.0)),
        (2.0, 3.0, WeightSpec::Constant(1.0)),
        (2.0, 2.4, WeightSpec::Ramp(0.0, 1.0)),
        (1.5, 3.0, WeightSpec::Checkerboard(2.0, 4)),
    ];
    configs
        .iter()
        .map(|(p, q, w)| {
            let h = phase(&mesh, *p, *q, w);
            let e = first_eigenpair(&mesh, &h, &SolverOptions::default()).unwrap();
            (mesh.clone(), h, e)
        })
        .collect()
}

fn sandwich() -> Outcome {
    let mut checked = 0;
    for (mesh, h, e) in eigenpairs() {
        ensure!(e.converged, "eigenpair for {:?} did not converge", h.exponents());
        let s = sandwich_ratios(&e.u, &h, &mesh).map_err(|err| err.to_string())?;
        ensure!(s.lower <= e.lambda * (1.0 + 1e-12) && e.lambda <= s.upper * (1.0 + 1e-12), "{s:?} vs {}", e.lambda);
        checked += 1;
    }
    let mesh = Mesh::interval(0.0, 1.0, 128).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let p = rng.gen_range(1.3..3.0);
        let h = phase(&mesh, p, p + rng.gen_range(0.0..2.0), &WeightSpec::Ramp(rng.gen_range(0.0..1.0), 2.0));
        let u = Field::new((0..127).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let s = sandwich_ratios(&u, &h, &mesh).map_err(|err| err.to_string())?;
        ensure!(s.lower <= s.mid * (1.0 + 1e-12) && s.mid <= s.upper * (1.0 + 1e-12), "{s:?}");
    }
    Ok(format!("{checked} eigenpairs and 100 random fields ordered"))
}

fn s_of_u_bounds() -> Outcome {
    let mut detail = Vec::new();
    for (_, h, e) in eigenpairs() {
        let (p, q) = h.exponents();
        if p == q {
            ensure!((e.s_of_u - 1.0).abs() <= 1e-8, "single phase S = {}", e.s_of_u);
        }
        ensure!(e.s_of_u >= p / q - 1e-12 && e.s_of_u <= q / p + 1e-12 && e.s_of_u <= q, "(p, q) = ({p}, {q}): S = {}", e.s_of_u);
        detail.push(format!("{:.6}", e.s_of_u));
    }
    Ok(format!("S(u) = [{}]", detail.join(", ")))
}

fn pairings() -> Outcome {
    let mesh = Mesh::interval(0.0, 1.0, 128).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut euler, mut fd) = (0.0f64, 0.0f64);
    let smooth = |rng: &mut ChaCha8Rng| {
        let c: Vec<f64> = (1..=4).map(|k| rng.gen_range(-1.0..1.0) / k as f64).collect();
        mesh.field_from_fn(|x| c.iter().enumerate().map(|(k, a)| a * ((k + 1) as f64 * PI * x[0]).sin()).sum())
    };
    for _ in 0..100 {
        let p = rng.gen_range(1.3..3.0);
        let q = p + rng.gen_range(0.2..2.0);
        let h = phase(&mesh, p, q, &WeightSpec::Ramp(rng.gen_range(0.0..1.0), rng.gen_range(0.5..2.0)));
        let (u, v) = (smooth(&mut rng), smooth(&mut rng));
        let k = luxemburg_norm_cells(&mesh.cell_values(&u).unwrap(), &h, &mesh).unwrap().value;
        let grads = mesh.gradient(&u).unwrap().magnitude().to_vec();
        let big_k = luxemburg_norm_cells(&grads, &h, &mesh).unwrap().value;
        euler = euler.max(rel(kprime_pairing(&u, &u, &h, &mesh).unwrap(), k));
        euler = euler.max(rel(big_kprime_pairing(&u, &u, &h, &mesh).unwrap(), big_k));
        let vk = luxemburg_norm_cells(&mesh.cell_values(&v).unwrap(), &h, &mesh).unwrap().value;
        let a = kprime_pairing(&u, &v, &h, &mesh).unwrap();
        ensure!(a.abs() <= q * vk, "|<k'(u), v>| = {} > q ‖v‖ = {}", a.abs(), q * vk);
        let c = directional_derivative_check(&u, &v, &h, &mesh, 1e-5).unwrap();
        fd = fd.max(rel(c.k_numeric, c.k_analytic)).max(rel(c.big_k_numeric, c.big_k_analytic));
    }
    ensure!(euler <= 1e-8, "Euler identity defect {euler:e}");
    ensure!(fd <= 1e-5, "finite-difference disagreement {fd:e}");
    Ok(format!("Euler {euler:.1e}, finite differences {fd:.1e}, 100 pairs bounded"))
}

fn domain_monotonicity() -> Outcome {
    let opts = SolverOptions::default();
    let w = WeightSpec::Constant(1.0);
    let intervals = run_domain_monotonicity(&interval_family(&[2, 4, 8, 16, 32, 64], 512).unwrap(), 2.0, 2.0, &w, &opts)
        .map_err(|e| e.to_string())?;
    report_ok(&intervals)?;
    ensure!(intervals.check_named("oracle_scaling").is_some_and(|c| c.passed), "oracle scaling missing");
    let squares = run_domain_monotonicity(&square_family(&[32, 48, 56, 63], 64).unwrap(), 2.0, 2.4, &w, &opts)
        .map_err(|e| e.to_string())?;
    report_ok(&squares)?;
    let err = intervals.check_named("oracle_scaling").unwrap().value;
    Ok(format!("intervals and squares non-increasing, oracle rel err {err:.1e}"))
}

fn faber_krahn() -> Outcome {
    let t = Instant::now();
    let square = Mesh::rectangle(0.0, 1.0, 0.0, 1.0, 96, 96).unwrap();
    let coarse = Mesh::rectangle(0.0, 1.0, 0.0, 1.0, 48, 48).unwrap();
    let mut detail = Vec::new();
    for q in [2.0, 2.4] {
        let r = run_faber_krahn(&square, Some(&coarse), 2.0, q, &SolverOptions::default()).map_err(|e| e.to_string())?;
        report_ok(&r)?;
        let c = r.check_named("disk_below_domain").unwrap();
        detail.push(format!("q={q}: margin {:.4} > slack {:.4}", c.value, c.slack));
    }
    within(t.elapsed(), 300)?;
    Ok(format!("{} in {:.1?}", detail.join("; "), t.elapsed()))
}

fn large_exponents() -> Outcome {
    let mesh = Mesh::interval(0.0, 1.0, 512).unwrap();
    let base = NFunctionParams::new(2.0, 3.0, WeightField::constant(&mesh, 1.0).unwrap()).unwrap();
    let r = run_large_exponents(&mesh, &base, &[1, 2, 4, 8, 16], &SolverOptions::default()).map_err(|e| e.to_string())?;
    report_ok(&r)?;
    let gaps = r.result_column("gap").unwrap();
    ensure!(gaps[2] > gaps[3] && gaps[3] > gaps[4], "gaps over the last three h: {:?}", &gaps[2..]);
    let target = r.summary.iter().find(|(n, _)| n == "target").unwrap().1;
    ensure!(target == 2.0, "target {target}");
    let last = r.result_column("rel_gap").unwrap()[4];
    Ok(format!("final relative gap {last:.3}, bracket holds at every h"))
}

fn stability() -> Outcome {
    let mesh = Mesh::interval(0.0, 1.0, 512).unwrap();
    let r = run_stability(2.0, 2.4, 16, 1.0, &mesh, &WeightSpec::Constant(1.0), &SolverOptions::default())
        .map_err(|e| e.to_string())?;
    report_ok(&r)?;
    let last = r.check_named("final_relative_gap").unwrap().value;
    ensure!(last <= 0.01, "relative gap at h=16 {last}");
    Ok(format!("relative gap at h=16 {last:.1e}, gaps non-increasing from h=4"))
}

fn weyl() -> Outcome {
    let mesh = Mesh::interval(0.0, 1.0, 512).unwrap();
    let mut detail = Vec::new();
    for (q, lo, hi) in [(2.0, 0.75, 1.25), (2.4, 1.0 - 1.0 / 12.0 - 0.25, 1.0 + 1.0 / 12.0 + 0.25)] {
        let r = run_weyl(&mesh, &unit(&mesh, 2.0, q), 6, &SolverOptions::default()).map_err(|e| e.to_string())?;
        report_ok(&r)?;
        let slope = r.summary.iter().find(|(n, _)| n == "slope").unwrap().1;
        ensure!(slope >= lo - 1e-12 && slope <= hi + 1e-12, "q = {q}: slope {slope} outside [{lo}, {hi}]");
        detail.push(format!("q={q}: slope {slope:.4} in [{lo:.3}, {hi:.3}]"));
    }
    Ok(detail.join("; "))
}

fn symmetry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let grid = Mesh::rectangle(0.0, 1.0, 0.0, 1.0, 32, 32).unwrap();
    let h = unit(&grid, 2.0, 3.0);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let cells: Vec<f64> = (0..grid.cell_count()).map(|_| rng.gen_range(0.0..3.0)).collect();
        let rho = modular_cells(&cells, &h, &grid).unwrap();
        let side = if k % 2 == 0 { HalfSpace::Upper } else { HalfSpace::Lower };
        let pol = polarize_cells(&cells, &grid, ReflectionPlane::new(k % 2, side)).unwrap();
        worst = worst.max(rel(modular_cells(&pol, &h, &grid).unwrap(), rho));
        let sym = schwarz_symmetrize_cells(&cells, &grid).unwrap();
        worst = worst.max(rel(modular_cells(&sym.cells, &unit(&sym.mesh, 2.0, 3.0), &sym.mesh).unwrap(), rho));
    }
    ensure!(worst <= 1e-12, "modular drift {worst:e}");

    let line = Mesh::interval(0.0, 1.0, 512).unwrap();
    let r = run_symmetry(&line, 2.0, 2.4, 0, &SolverOptions::default()).map_err(|e| e.to_string())?;
    report_ok(&r)?;
    let defect = r.summary.iter().find(|(n, _)| n == "symmetry_defect").unwrap().1;

    let n = 64;
    let square = Mesh::rectangle(0.0, 1.0, 0.0, 1.0, n, n).unwrap();
    let mut ps = 0.0f64;
    for (cx, cy, s) in [(0.5, 0.5, 0.15), (0.3, 0.6, 0.1), (0.65, 0.35, 0.2)] {
        let bump = |x: [f64; 2]| {
            let r2 = ((x[0] - cx).powi(2) + (x[1] - cy).powi(2)) / (s * s);
            (-r2).exp() * (PI * x[0]).sin() * (PI * x[1]).sin()
        };
        let cells = square.sample_cells(bump);
        let sym = schwarz_symmetrize_cells(&cells, &square).unwrap();
        let ratio = dual_gradient_lp(&sym.cells, &sym.mesh, 2.0).unwrap() / dual_gradient_lp(&cells, &square, 2.0).unwrap();
        ps = ps.max(ratio);
    }
    ensure!(ps <= 1.05, "Pólya–Szegő ratio {ps}");
    Ok(format!("modular drift {worst:.1e}, symmetry defect {defect:.1e}, Pólya–Szegő ratio {ps:.4}"))
}

fn cli(dir: &Path, args: &[&str]) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_doublephase"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .arg("--seed")
        .arg("7")
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(status.status.success(), "{args:?} exited with {:?}", status.status.code());
    Ok(())
}

fn determinism() -> Outcome {
    let runs: [(&[&str], &[&str]); 4] = [
        (&["eig", "--set", "phase.weight=ramp:0,2", "--resolution", "256"], &["eigenfunction.csv", "eigenpair.json"]),
        (&["eigm", "--set", "eigm.m_max=3", "--resolution", "128"], &["minimax.csv"]),
        (&["experiment", "stability", "--set", "experiment.steps=6", "--resolution", "128"], &["stability.csv", "stability.svg"]),
        (&["experiment", "symmetry", "--resolution", "128"], &["symmetry.csv"]),
    ];
    let mut files = 0;
    for (args, outputs) in runs {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        cli(a.path(), args)?;
        cli(b.path(), args)?;
        for f in outputs {
            let (x, y) = (std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
            ensure!(x == y, "{f} differs between runs of {args:?}");
            files += 1;
        }
    }
    Ok(format!("{files} output files byte-identical across repeated runs"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 14] = [
        ("norm engine", norm_engine),
        ("golden-ratio norm", golden_ratio),
        ("pi_p quadrature", pi_p_quadrature),
        ("single-phase oracle", single_phase_oracle),
        ("sandwich", sandwich),
        ("S(u) bounds", s_of_u_bounds),
        ("k'/K' pairings", pairings),
        ("domain monotonicity", domain_monotonicity),
        ("Faber-Krahn", faber_krahn),
        ("large exponents", large_exponents),
        ("stability", stability),
        ("Weyl slope", weyl),
        ("symmetry and rearrangement", symmetry),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("[PASS] {:>2} {name}: {detail} ({:.1?})", k + 1, t.elapsed()),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {:>2} {name}: {why} ({:.1?})", k + 1, t.elapsed());
            }
        }
    }
    if failed > 0 {
        println!("acceptance: {failed} criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
