use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::TFField;

use super::mask::DomainMask;

/// Weights below this are raised to it and counted in the report.
pub const WEIGHT_FLOOR: f64 = 1e-30;
const MAX_OUTER: usize = 300;
const OUTER_TOL: f64 = 1e-10;
const CG_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct PoincareReport {
    /// Smallest nonzero Neumann eigenvalue; `0` when the domain is disconnected.
    pub mu1: f64,
    /// `1 / sqrt(mu1)`, `+inf` when disconnected.
    pub constant: f64,
    pub connected: bool,
    pub status: String,
    pub nodes: usize,
    pub clipped: usize,
    pub iterations: usize,
}

/// Weighted Neumann graph Laplacian restricted to a mask: node masses
/// `rho dA`, four-neighbour conductances `(rho_i + rho_j)/2 dA / h^2`.
struct Laplacian {
    mass: Vec<f64>,
    /// `(neighbour, conductance)` lists per node.
    edges: Vec<Vec<(usize, f64)>>,
}

impl Laplacian {
    fn apply(&self, u: &[f64], out: &mut [f64]) {
        for (i, nb) in self.edges.iter().enumerate() {
            out[i] = nb.iter().map(|&(j, c)| c * (u[i] - u[j])).sum();
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        self.edges.iter().map(|nb| nb.iter().map(|e| e.1).sum()).collect()
    }

    fn quadratic(&self, u: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, nb) in self.edges.iter().enumerate() {
            for &(j, c) in nb {
                if j > i {
                    s += c * (u[i] - u[j]).powi(2);
                }
            }
        }
        s
    }

    /// Removes the `M`-weighted mean.
    fn deflate(&self, u: &mut [f64]) {
        let total: f64 = self.mass.iter().sum();
        let mean = u.iter().zip(&self.mass).map(|(a, m)| a * m).sum::<f64>() / total;
        u.iter_mut().for_each(|a| *a -= mean);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned CG for `L x = b` with `b` summing to zero. The
/// iterate is kept orthogonal to constants.
fn solve(lap: &Laplacian, diag: &[f64], b: &[f64], x: &mut [f64]) {
    let n = b.len();
    let center = |v: &mut [f64]| {
        let m = v.iter().sum::<f64>() / n as f64;
        v.iter_mut().for_each(|a| *a -= m);
    };
    let mut lx = vec![0.0; n];
    lap.apply(x, &mut lx);
    let mut r: Vec<f64> = b.iter().zip(&lx).map(|(a, c)| a - c).collect();
    let bnorm = dot(b, b).sqrt().max(f64::MIN_POSITIVE);
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(a, d)| a / d).collect();
    center(&mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for _ in 0..4 * n.max(10) {
        if dot(&r, &r).sqrt() <= CG_TOL * bnorm {
            break;
        }
        lap.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        x.iter_mut().zip(&p).for_each(|(a, q)| *a += alpha * q);
        r.iter_mut().zip(&ap).for_each(|(a, q)| *a -= alpha * q);
        z.iter_mut().zip(r.iter().zip(diag)).for_each(|(a, (q, d))| *a = q / d);
        center(&mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut().zip(&z).for_each(|(a, q)| *a = q + beta * *a);
    }
    center(x);
}

/// Poincare constant `1/sqrt(mu1)` of `(Omega, W gamma dA)` where `gamma` is the
/// standard Gaussian density `e^{-pi |z|^2}` if `gaussian` is set and `1`
/// otherwise.
pub fn poincare_constant(omega: &DomainMask, w: &TFField, gaussian: bool) -> Result<PoincareReport> {
    if !omega.grid().same_as(w.grid()) {
        return Err(Error::IncompatibleGrids("weight and mask on different grids".into()));
    }
    if w.values().iter().any(|v| v.im != 0.0 || v.re < 0.0 || !v.re.is_finite()) {
        return Err(Error::Precondition("weight must be real, finite and nonnegative".into()));
    }
    let values: Vec<f64> = w.values().iter().map(|v| v.re).collect();
    poincare_on_values(omega, &values, gaussian)
}

pub(crate) fn poincare_on_values(omega: &DomainMask, w: &[f64], gaussian: bool) -> Result<PoincareReport> {
    let g = *omega.grid();
    let (nx, nw) = g.shape();
    let nodes: Vec<usize> = (0..g.len()).filter(|&i| omega.contains(i)).collect();
    if nodes.len() < 2 {
        return Err(Error::Precondition("the domain needs at least two nodes".into()));
    }
    let mut local = vec![usize::MAX; g.len()];
    for (k, &i) in nodes.iter().enumerate() {
        local[i] = k;
    }
    let mut clipped = 0;
    let rho: Vec<f64> = nodes
        .iter()
        .map(|&i| {
            let (x, y) = g.coords(i);
            let gamma = if gaussian { (-PI * (x * x + y * y)).exp() } else { 1.0 };
            let v = w[i] * gamma;
            if v < WEIGHT_FLOOR {
                clipped += 1;
                WEIGHT_FLOOR
            } else {
                v
            }
        })
        .collect();
    let da = g.cell_area();
    let (hx, hw) = (g.x.spacing(), g.omega.spacing());
    let mut edges = vec![Vec::with_capacity(4); nodes.len()];
    for (k, &i) in nodes.iter().enumerate() {
        let (ix, iw) = (i / nw, i % nw);
        let mut link = |j: usize, h: f64| {
            let l = local[j];
            if l != usize::MAX {
                edges[k].push((l, 0.5 * (rho[k] + rho[l]) * da / (h * h)));
            }
        };
        if ix > 0 {
            link(i - nw, hx);
        }
        if ix + 1 < nx {
            link(i + nw, hx);
        }
        if iw > 0 {
            link(i - 1, hw);
        }
        if iw + 1 < nw {
            link(i + 1, hw);
        }
    }
    let report = |mu1: f64, connected: bool, iterations: usize| PoincareReport {
        mu1,
        constant: if connected { 1.0 / mu1.sqrt() } else { f64::INFINITY },
        connected,
        status: if connected { "ok".into() } else { "disconnected, C_poinc = inf".into() },
        nodes: nodes.len(),
        clipped,
        iterations,
    };
    if omega.components() > 1 {
        return Ok(report(0.0, false, 0));
    }
    let lap = Laplacian { mass: rho.iter().map(|r| r * da).collect(), edges };
    let diag = lap.diagonal();
    let n = nodes.len();
    // Deterministic start that is not orthogonal to the low modes.
    let mut u: Vec<f64> = nodes
        .iter()
        .map(|&i| {
            let (x, y) = g.coords(i);
            x + 0.7 * y + 0.1 * (x * y).sin()
        })
        .collect();
    lap.deflate(&mut u);
    let mut mu = f64::INFINITY;
    let mut iterations = 0;
    let mut x = vec![0.0; n];
    for it in 1..=MAX_OUTER {
        iterations = it;
        let unorm = u.iter().zip(&lap.mass).map(|(a, m)| a * a * m).sum::<f64>().sqrt();
        u.iter_mut().for_each(|a| *a /= unorm);
        let mut b: Vec<f64> = u.iter().zip(&lap.mass).map(|(a, m)| a * m).collect();
        let mean = b.iter().sum::<f64>() / n as f64;
        b.iter_mut().for_each(|a| *a -= mean);
        x.copy_from_slice(&u);
        solve(&lap, &diag, &b, &mut x);
        lap.deflate(&mut x);
        let num = lap.quadratic(&x);
        let den = x.iter().zip(&lap.mass).map(|(a, m)| a * a * m).sum::<f64>();
        let next = num / den;
        std::mem::swap(&mut u, &mut x);
        if (mu - next).abs() <= OUTER_TOL * next {
            mu = next;
            break;
        }
        mu = next;
    }
    Ok(report(mu, true, iterations))
}
