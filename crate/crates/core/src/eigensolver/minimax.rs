//! Subspace minimax: `inf_V max_{u ∈ V} K(u)/k(u)` over `m`-dimensional
//! trial spaces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::functional::Functional;
use super::modes::{dot, orthonormalize};
use super::descent::linearised;
use super::precond::{Banded, Operator};
use super::SolverOptions;

const INNER_ITER: usize = 300;
const RANDOM_STARTS: usize = 4;

fn combine(basis: &[Vec<f64>], c: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; basis[0].len()];
    for (v, &w) in basis.iter().zip(c) {
        x.iter_mut().zip(v).for_each(|(a, b)| *a += w * b);
    }
    x
}

fn unit(mut c: Vec<f64>) -> Vec<f64> {
    let n = dot(&c, &c).sqrt();
    c.iter_mut().for_each(|v| *v /= n);
    c
}

/// Projected ascent of `c ↦ R(Σ c_i v_i)` on the unit sphere.
fn ascend(f: &Functional, basis: &[Vec<f64>], start: Vec<f64>) -> (f64, Vec<f64>) {
    let mut c = unit(start);
    let (mut r, mut gx) = f.rayleigh_with_grad(&combine(basis, &c));
    let mut step = 1.0;
    for _ in 0..INNER_ITER {
        let g: Vec<f64> = basis.iter().map(|v| dot(v, &gx)).collect();
        let gg = dot(&g, &g);
        if gg.sqrt() <= 1e-12 * r {
            break;
        }
        let mut t = step;
        let mut moved = false;
        while t > 1e-20 {
            let trial = unit(c.iter().zip(&g).map(|(a, b)| a + t * b).collect());
            let x = combine(basis, &trial);
            let rt = f.rayleigh(&x);
            if rt >= r + 1e-4 * t * gg {
                let (rn, gn) = f.rayleigh_with_grad(&x);
                let gain = rn - r;
                c = trial;
                r = rn;
                gx = gn;
                moved = gain > 1e-15 * r;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
        step = 2.0 * t;
    }
    (r, c)
}

/// Best inner maximum over the coordinate axes, the warm start and a few
/// seeded random directions.
fn inner_max(f: &Functional, basis: &[Vec<f64>], warm: Option<&[f64]>, rng: &mut ChaCha8Rng) -> (f64, Vec<f64>) {
    let m = basis.len();
    let mut starts: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut e = vec![0.0; m];
            e[i] = 1.0;
            e
        })
        .collect();
    if let Some(w) = warm {
        starts.push(w.to_vec());
    }
    if m > 1 {
        for _ in 0..RANDOM_STARTS {
            starts.push((0..m).map(|_| rng.gen_range(-1.0..1.0)).collect());
        }
    }
    let mut best = (f64::NEG_INFINITY, vec![]);
    for s in starts {
        let (r, c) = ascend(f, basis, s);
        if r > best.0 {
            best = (r, c);
        }
    }
    best
}

/// Upper bound for the `m`-th variational eigenvalue on the span of
/// `seed` (orthonormal), improved by Danskin descent on the frame.
pub(crate) fn minimax(f: &Functional, op: &Operator, fallback: &Banded, seed: Vec<Vec<f64>>, opts: &SolverOptions) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.rng_seed);
    rng.set_stream(seed.len() as u64);
    let mut basis = seed;
    let (mut value, mut c) = inner_max(f, &basis, None, &mut rng);
    for _ in 0..opts.minimax_outer_iter {
        let x = combine(&basis, &c);
        let (_, g) = f.rayleigh_with_grad(&x);
        let pc = linearised(f, op, &x);
        let d = pc.as_ref().unwrap_or(fallback).solve(&g);
        let slope = -dot(&g, &d);
        if !(slope < 0.0) {
            break;
        }
        let mut t = opts.armijo_step;
        let mut accepted = None;
        while t > 1e-12 * opts.armijo_step {
            // x ↦ x - t d, carried by the frame as V - t d cᵀ
            let mut trial: Vec<Vec<f64>> = basis
                .iter()
                .zip(&c)
                .map(|(v, &ci)| v.iter().zip(&d).map(|(a, b)| a - t * ci * b).collect())
                .collect();
            orthonormalize(&mut trial);
            let xt: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a - t * b).collect();
            let warm: Vec<f64> = trial.iter().map(|v| dot(v, &xt)).collect();
            let (vt, ct) = inner_max(f, &trial, Some(&warm), &mut rng);
            if vt <= value + opts.armijo_slope * t * slope {
                accepted = Some((trial, vt, ct));
                break;
            }
            t *= opts.armijo_shrink;
        }
        let Some((b, v, cn)) = accepted else { break };
        let gain = value - v;
        basis = b;
        value = v;
        c = cn;
        if gain <= opts.tol_lambda * value {
            break;
        }
    }
    value
}
