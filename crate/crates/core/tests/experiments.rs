use doublephase::discretize::Mesh;
use doublephase::eigensolver::SolverOptions;
use doublephase::error::Error;
use doublephase::experiments::*;
use doublephase::orlicz::{NFunctionParams, WeightField, WeightSpec};

fn fast() -> SolverOptions {
    SolverOptions { restarts: 2, ..SolverOptions::default() }
}

fn csv(r: &ExperimentReport) -> String {
    let mut out = Vec::new();
    r.write_csv(&mut out).unwrap();
    String::from_utf8(out).unwrap()
}

#[test]
fn zero_shift_gives_a_constant_column() {
    let mesh = Mesh::interval(0.0, 1.0, 128).unwrap();
    let r = run_stability(2.0, 2.5, 5, 0.0, &mesh, &WeightSpec::Ramp(0.0, 1.0), &fast()).unwrap();
    let lambdas = r.result_column("lambda").unwrap();
    assert_eq!(lambdas.len(), 6);
    assert!(lambdas.iter().all(|l| l.to_bits() == lambdas[0].to_bits()));
    assert!(r.passed());
}

#[test]
fn repeated_domain_gives_a_constant_chain() {
    let mesh = Mesh::interval(0.0, 1.0, 128).unwrap();
    let family = vec![mesh.clone(), mesh.clone(), mesh];
    let r = run_domain_monotonicity(&family, 2.0, 2.0, &WeightSpec::Constant(1.0), &fast()).unwrap();
    let l = r.result_column("lambda").unwrap();
    assert!(l.iter().all(|x| x.to_bits() == l[0].to_bits()));
    assert!(r.passed());
}

#[test]
fn non_nested_family_is_a_geometry_error() {
    let family = vec![Mesh::interval(0.0, 0.75, 96).unwrap(), Mesh::interval(0.0, 0.5, 64).unwrap()];
    let err = run_domain_monotonicity(&family, 2.0, 2.4, &WeightSpec::Constant(1.0), &fast()).unwrap_err();
    assert!(matches!(err, Error::Geometry(_)));
    assert!(interval_family(&[3], 512).is_err());
}

#[test]
fn growing_squares_have_a_non_increasing_chain() {
    let family = square_family(&[32, 48, 63], 64).unwrap();
    let r = run_domain_monotonicity(&family, 2.0, 2.4, &WeightSpec::Constant(1.0), &fast()).unwrap();
    assert!(r.check_named("chain_nonincreasing").unwrap().passed);
    assert!(r.passed(), "{}", r.summary_text());
}

#[test]
fn disk_against_itself_has_no_margin() {
    let disk = Mesh::disk(0.5, 1.0 / 32.0).unwrap();
    let r = run_faber_krahn(&disk, None, 2.0, 2.0, &fast()).unwrap();
    let row = &r.rows[0];
    let (dom, disk_l) = (row.results[0], row.results[1]);
    assert!((dom - disk_l).abs() < 0.02 * dom, "{dom} vs {disk_l}");
    assert!(r.check_named("symmetrization_modular").unwrap().passed);
}

#[test]
fn faber_krahn_on_a_small_square() {
    let sq = Mesh::rectangle(0.0, 1.0, 0.0, 1.0, 32, 32).unwrap();
    let coarse = Mesh::rectangle(0.0, 1.0, 0.0, 1.0, 16, 16).unwrap();
    let r = run_faber_krahn(&sq, Some(&coarse), 2.0, 2.4, &fast()).unwrap();
    assert!(r.passed(), "{}", r.summary_text());
    assert!(run_faber_krahn(&Mesh::interval(0.0, 1.0, 32).unwrap(), None, 2.0, 2.0, &fast()).is_err());
}

#[test]
fn large_exponents_need_distinct_exponents() {
    let mesh = Mesh::interval(0.0, 1.0, 64).unwrap();
    let single = NFunctionParams::relaxed(2.0, 2.0, WeightField::constant(&mesh, 1.0).unwrap()).unwrap();
    assert!(run_large_exponents(&mesh, &single, &[1, 2], &fast()).is_err());
    let h = NFunctionParams::new(2.0, 3.0, WeightField::constant(&mesh, 1.0).unwrap()).unwrap();
    assert!(run_large_exponents(&mesh, &h, &[2, 1], &fast()).is_err());
    let r = run_large_exponents(&mesh, &h, &[1, 2, 4], &fast()).unwrap();
    assert!(r.check_named("equivalence_bracket").unwrap().passed);
    assert_eq!(r.summary.iter().find(|(n, _)| n == "target").unwrap().1, 2.0);
}

#[test]
fn weyl_needs_three_bounds() {
    let mesh = Mesh::interval(0.0, 1.0, 64).unwrap();
    let h = NFunctionParams::relaxed(2.0, 2.0, WeightField::constant(&mesh, 1.0).unwrap()).unwrap();
    assert!(matches!(run_weyl(&mesh, &h, 2, &fast()), Err(Error::Domain(_))));
}

#[test]
fn symmetry_rejects_asymmetric_meshes() {
    let n = 16;
    let mask = (0..n * n).map(|k| !(k % n == 0 && k / n == 0)).collect();
    let mesh = Mesh::masked(0.0, 1.0, 0.0, 1.0, n, n, mask).unwrap();
    assert!(matches!(run_symmetry(&mesh, 2.0, 2.0, 0, &fast()), Err(Error::Geometry(_))));
}

#[test]
fn symmetry_in_two_dimensions() {
    let mesh = Mesh::rectangle(0.0, 2.0, 0.0, 1.0, 32, 16).unwrap();
    let r = run_symmetry(&mesh, 2.0, 2.4, 0, &fast()).unwrap();
    assert!(r.passed(), "{}", r.summary_text());
}

#[test]
fn reports_are_reproducible() {
    let mesh = Mesh::interval(0.0, 1.0, 128).unwrap();
    let run = || run_stability(2.0, 2.4, 4, 1.0, &mesh, &WeightSpec::Checkerboard(1.0, 3), &fast()).unwrap();
    let (a, b) = (run(), run());
    assert_eq!(csv(&a), csv(&b));
    assert_eq!(a.svg(), b.svg());
    assert!(csv(&a).starts_with("# schema=1 kind=report name=stability\n"));
    for line in csv(&a).lines().skip(2) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[3], "0", "seed column in {line}");
        assert_eq!(fields[4], "128", "resolution column in {line}");
    }
}
