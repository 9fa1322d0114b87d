use crate::discretize::{Field, Mesh};
use crate::error::{domain, Error, Result};

/// A Dirichlet eigenpair of `-(|u'|^{p-2} u')' = λ |u|^{p-2} u` on `(a, b)`.
#[derive(Debug, Clone)]
pub struct ShootingEigenpair {
    pub p: f64,
    pub m: usize,
    pub interval: (f64, f64),
    pub lambda_ode: f64,
    /// Nodal samples normalised to `max |u| = 1`, positive near `a`.
    pub profile: Field,
    /// Interior sign changes of the profile.
    pub node_count: usize,
}

const RK_TOL: f64 = 1e-10;
const LAMBDA_TOL: f64 = 1e-10;

/// `|z|^{r-2} z`
#[inline]
fn phi(z: f64, r: f64) -> f64 {
    z.signum() * z.abs().powf(r - 1.0)
}

struct System {
    p: f64,
    p_conj: f64,
    lambda: f64,
}

impl System {
    #[inline]
    fn rhs(&self, y: [f64; 2]) -> [f64; 2] {
        [phi(y[1], self.p_conj), -self.lambda * phi(y[0], self.p)]
    }

    /// One Dormand–Prince 5(4) step: fifth-order solution and error norm.
    fn step(&self, y: [f64; 2], h: f64) -> ([f64; 2], f64) {
        let k1 = self.rhs(y);
        let at = |c: &[(f64, [f64; 2])]| -> [f64; 2] {
            let mut z = y;
            for (w, k) in c {
                z[0] += h * w * k[0];
                z[1] += h * w * k[1];
            }
            z
        };
        let k2 = self.rhs(at(&[(1.0 / 5.0, k1)]));
        let k3 = self.rhs(at(&[(3.0 / 40.0, k1), (9.0 / 40.0, k2)]));
        let k4 = self.rhs(at(&[(44.0 / 45.0, k1), (-56.0 / 15.0, k2), (32.0 / 9.0, k3)]));
        let k5 = self.rhs(at(&[
            (19372.0 / 6561.0, k1),
            (-25360.0 / 2187.0, k2),
            (64448.0 / 6561.0, k3),
            (-212.0 / 729.0, k4),
        ]));
        let k6 = self.rhs(at(&[
            (9017.0 / 3168.0, k1),
            (-355.0 / 33.0, k2),
            (46732.0 / 5247.0, k3),
            (49.0 / 176.0, k4),
            (-5103.0 / 18656.0, k5),
        ]));
        let y5 = at(&[
            (35.0 / 384.0, k1),
            (500.0 / 1113.0, k3),
            (125.0 / 192.0, k4),
            (-2187.0 / 6784.0, k5),
            (11.0 / 84.0, k6),
        ]);
        let k7 = self.rhs(y5);
        // difference between the fifth- and fourth-order weights
        let e = [
            71.0 / 57600.0,
            0.0,
            -71.0 / 16695.0,
            71.0 / 1920.0,
            -17253.0 / 339200.0,
            22.0 / 525.0,
            -1.0 / 40.0,
        ];
        let ks = [k1, k2, k3, k4, k5, k6, k7];
        let mut err = 0.0f64;
        for c in 0..2 {
            let d: f64 = h * ks.iter().zip(&e).map(|(k, w)| w * k[c]).sum::<f64>();
            let sc = RK_TOL + RK_TOL * y[c].abs().max(y5[c].abs());
            err = err.max((d / sc).abs());
        }
        (y5, err)
    }

    /// Integrates from `x0` to `x1` starting at `y`, updating the step
    /// size guess and the sign-change counter of `u`.
    fn advance(&self, y: &mut [f64; 2], x0: f64, x1: f64, h: &mut f64, sign: &mut f64, zeros: &mut usize) -> Result<()> {
        let mut x = x0;
        let mut steps = 0usize;
        while x < x1 {
            let hh = h.min(x1 - x);
            let (next, err) = self.step(*y, hh);
            steps += 1;
            if steps > 10_000_000 {
                return Err(Error::Numerical("shooting integrator exceeded the step budget".into()));
            }
            if err <= 1.0 {
                x = if hh == x1 - x { x1 } else { x + hh };
                *y = next;
                if y[0] != 0.0 && y[0].signum() != *sign {
                    *sign = y[0].signum();
                    *zeros += 1;
                }
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            *h = hh * factor;
            if *h < 1e-14 * (x1 - x0).abs().max(1.0) {
                *h = 1e-14 * (x1 - x0).abs().max(1.0);
            }
        }
        Ok(())
    }
}

/// Number of sign changes of `u` on `(a, b]` for a given `λ`.
fn zero_count(p: f64, a: f64, b: f64, lambda: f64) -> Result<usize> {
    let sys = System { p, p_conj: p / (p - 1.0), lambda };
    let mut y = [0.0, 1.0];
    let (mut h, mut sign, mut zeros) = (1e-3 * (b - a), 1.0, 0usize);
    sys.advance(&mut y, a, b, &mut h, &mut sign, &mut zeros)?;
    Ok(zeros)
}

/// The `m`-th Dirichlet eigenpair on `(a, b)` by shooting from
/// `u(a) = 0, u'(a) = 1`: `λ` is bisected until `u` has its `m`-th zero at
/// `b`. The profile is sampled on a uniform mesh with `cells` cells.
pub fn plap_shooting(p: f64, interval: (f64, f64), m: usize, cells: usize) -> Result<ShootingEigenpair> {
    let (a, b) = interval;
    if !(p > 1.0 && p.is_finite()) {
        return Err(domain(format!("p must be finite and > 1, got {p}")));
    }
    if m == 0 {
        return Err(domain("mode index m starts at 1"));
    }
    if !(a < b) {
        return Err(domain(format!("interval ({a}, {b}) is empty")));
    }
    let mesh = Mesh::interval(a, b, cells)?;

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while zero_count(p, a, b, hi)? < m {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Numerical(format!("no eigenvalue bracket for m = {m}: last [{lo}, {hi}]")));
        }
    }
    let mut iters = 0;
    while hi - lo > LAMBDA_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if zero_count(p, a, b, mid)? >= m {
            hi = mid;
        } else {
            lo = mid;
        }
        iters += 1;
        if iters > 400 {
            return Err(Error::Numerical(format!("eigenvalue bisection stalled in [{lo}, {hi}]")));
        }
    }
    let lambda = 0.5 * (lo + hi);

    let sys = System { p, p_conj: p / (p - 1.0), lambda };
    let mut y = [0.0, 1.0];
    let (mut h, mut sign, mut zeros) = (1e-3 * (b - a), 1.0, 0usize);
    let mut x = a;
    let mut values = Vec::with_capacity(mesh.node_count());
    for node in mesh.node_coords() {
        sys.advance(&mut y, x, node[0], &mut h, &mut sign, &mut zeros)?;
        x = node[0];
        values.push(y[0]);
    }
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let profile = Field::new(values.iter().map(|v| v / peak).collect());
    let node_count = sign_changes(profile.values());
    Ok(ShootingEigenpair { p, m, interval, lambda_ode: lambda, profile, node_count })
}

/// Sign changes along a sequence, ignoring exact zeros.
pub fn sign_changes(values: &[f64]) -> usize {
    let mut last = 0.0;
    let mut count = 0;
    for &v in values {
        if v != 0.0 {
            if last != 0.0 && v.signum() != last {
                count += 1;
            }
            last = v.signum();
        }
    }
    count
}
