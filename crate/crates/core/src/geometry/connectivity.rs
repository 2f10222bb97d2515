use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::TFField;

use super::mask::DomainMask;

const UNIMODULAR_TOL: f64 = 1e-9;

/// `|W|_{L2(A cap B)} / (|W|_{L2(A)} + |W|_{L2(B)})`.
pub fn connectivity(w: &TFField, a: &DomainMask, b: &DomainMask) -> Result<f64> {
    let overlap = a.intersection(b)?;
    let num = overlap.l2_norm(w)?;
    if num <= 0.0 {
        return Err(Error::ZeroInput("the overlap carries no mass".into()));
    }
    Ok(num / (a.l2_norm(w)? + b.l2_norm(w)?))
}

/// `(c_A^2 + c_B^2)^{1/2} (1/lambda + sqrt 2)`.
pub fn gluing_bound(c_a: f64, c_b: f64, lambda: f64) -> Result<f64> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::Precondition(format!("connectivity must be positive, got {lambda}")));
    }
    if !(c_a >= 0.0 && c_b >= 0.0) {
        return Err(Error::Precondition(format!("constants must be nonnegative, got {c_a}, {c_b}")));
    }
    Ok(c_a.hypot(c_b) * (1.0 / lambda + std::f64::consts::SQRT_2))
}

/// Which point of the circle sits "between" two phases.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircleVariant {
    /// `(a - b)/|a - b|`, with `i a` for antipodes and `a` for equal inputs.
    #[default]
    Difference,
    /// Geodesic midpoint `(a + b)/|a + b|`, with `i a` for antipodes.
    Midpoint,
}

pub fn circle_average(a: Complex64, b: Complex64, variant: CircleVariant) -> Result<Complex64> {
    for t in [a, b] {
        if (t.norm() - 1.0).abs() > UNIMODULAR_TOL {
            return Err(Error::Precondition(format!("{t} is not unimodular")));
        }
    }
    if a == -b {
        return Ok(Complex64::i() * a);
    }
    match variant {
        CircleVariant::Difference => {
            let d = a - b;
            if d.norm() == 0.0 {
                Ok(a)
            } else {
                Ok(d / d.norm())
            }
        }
        CircleVariant::Midpoint => {
            let s = a + b;
            Ok(s / s.norm())
        }
    }
}

/// Distances of an average to its two inputs, and whether the claimed
/// `|a - t| = |b - t| <= |a - b| / sqrt 2` holds.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AverageCheck {
    pub tau: [f64; 2],
    pub to_a: f64,
    pub to_b: f64,
    pub half_gap: f64,
    pub equidistant: bool,
    pub within_bound: bool,
}

pub fn check_average(a: Complex64, b: Complex64, variant: CircleVariant) -> Result<AverageCheck> {
    let t = circle_average(a, b, variant)?;
    let (to_a, to_b) = ((a - t).norm(), (b - t).norm());
    let half_gap = (a - b).norm() / std::f64::consts::SQRT_2;
    Ok(AverageCheck {
        tau: [t.re, t.im],
        to_a,
        to_b,
        half_gap,
        equidistant: (to_a - to_b).abs() <= 1e-12,
        within_bound: to_a.max(to_b) <= half_gap + 1e-12,
    })
}

/// `inf over |lambda| = 1 of |F - lambda G|_{L2(S)}` together with the
/// conjugate of the minimising phase.
pub fn phase_distance_on(f: &TFField, g: &TFField, s: &DomainMask) -> Result<(f64, Complex64)> {
    f.check_same(g)?;
    if !s.grid().same_as(f.grid()) {
        return Err(Error::IncompatibleGrids("mask and fields on different grids".into()));
    }
    let pairs = || f.values().iter().zip(g.values()).zip(s.inside()).filter(|(_, &inside)| inside).map(|(p, _)| p);
    let fg: Complex64 = pairs().map(|(u, v)| u * v.conj()).sum();
    let lambda = if fg.norm() > 0.0 { fg / fg.norm() } else { Complex64::new(1.0, 0.0) };
    // Evaluated at the minimiser rather than from the expanded square, which cancels.
    let d2: f64 = pairs().map(|(u, v)| (u - lambda * v).norm_sqr()).sum::<f64>() * s.grid().cell_area();
    Ok((d2.sqrt(), lambda.conj()))
}

/// `(sum over S of (u^2 + |grad u|^2) <z>^{2r} dA)^{1/2}` for a real field `u`.
/// Gradients are centered differences on the whole grid, one-sided at the
/// frame, so the norm is monotone in `S`.
pub fn local_h1(u: &[f64], s: &DomainMask, r: f64) -> f64 {
    let g = s.grid();
    let (nx, nw) = g.shape();
    let (hx, hw) = (g.x.spacing(), g.omega.spacing());
    let diff = |lo: usize, hi: usize, h: f64, span: usize| (u[hi] - u[lo]) / (h * span as f64);
    let mut sum = 0.0;
    for ix in 0..nx {
        for iw in 0..nw {
            let i = ix * nw + iw;
            if !s.contains(i) {
                continue;
            }
            let (xl, xh) = (ix.saturating_sub(1), (ix + 1).min(nx - 1));
            let (wl, wh) = (iw.saturating_sub(1), (iw + 1).min(nw - 1));
            let dx = diff(xl * nw + iw, xh * nw + iw, hx, xh - xl);
            let dw = diff(ix * nw + wl, ix * nw + wh, hw, wh - wl);
            let (x, w) = g.coords(i);
            let weight = (1.0 + x * x + w * w).powf(r);
            sum += (u[i] * u[i] + dx * dx + dw * dw) * weight;
        }
    }
    (sum * g.cell_area()).sqrt()
}

/// Per-domain ratios for one competitor `g`.
#[derive(Debug, Clone, Serialize)]
pub struct AdversaryRow {
    pub label: String,
    pub distance: [f64; 3],
    pub measurement: [f64; 3],
    pub ratio: [f64; 3],
    pub tau_a: [f64; 2],
    pub tau_b: [f64; 2],
}

/// Adversarial lower bounds for the local stability constants on `A`, `B`
/// and `Omega = A cup B`, and the gluing bound built from the first two.
#[derive(Debug, Clone, Serialize)]
pub struct GluingCheck {
    pub lambda: f64,
    pub c_a: f64,
    pub c_b: f64,
    pub c_omega: f64,
    pub bound: f64,
    pub holds: bool,
    pub rows: Vec<AdversaryRow>,
}

/// Phase distances below this fraction of `|F|_{L2(S)}` are rounding noise
/// and count as exact recovery.
const DISTANCE_FLOOR: f64 = 1e-12;

fn ratio(d: f64, m: f64, scale: f64) -> f64 {
    if d <= DISTANCE_FLOOR * scale {
        0.0
    } else {
        d / m
    }
}

/// Runs every adversary `g` against `f` on `A`, `B` and `Omega`. `Omega`
/// must equal `A cup B`.
pub fn gluing_check(
    f: &TFField,
    adversaries: &[(String, TFField)],
    omega: &DomainMask,
    a: &DomainMask,
    b: &DomainMask,
    r: f64,
) -> Result<GluingCheck> {
    if &a.union(b)? != omega {
        return Err(Error::Precondition("A and B must cover Omega exactly".into()));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::Precondition("A and B must be nonempty".into()));
    }
    if adversaries.is_empty() {
        return Err(Error::Precondition("no adversaries given".into()));
    }
    let lambda = connectivity(f, a, b)?;
    let fmod = f.moduli();
    let masks = [a, b, omega];
    let scale = [a.l2_norm(f)?, b.l2_norm(f)?, omega.l2_norm(f)?];
    let mut rows = Vec::with_capacity(adversaries.len());
    for (label, g) in adversaries {
        let diff: Vec<f64> = fmod.iter().zip(g.moduli()).map(|(p, q)| p - q).collect();
        let mut distance = [0.0; 3];
        let mut measurement = [0.0; 3];
        let mut taus = [Complex64::new(0.0, 0.0); 3];
        for (k, m) in masks.iter().enumerate() {
            let (d, tau) = phase_distance_on(f, g, m)?;
            distance[k] = d;
            taus[k] = tau;
            measurement[k] = local_h1(&diff, m, r);
        }
        let ratio = [0, 1, 2].map(|k| ratio(distance[k], measurement[k], scale[k]));
        rows.push(AdversaryRow {
            label: label.clone(),
            distance,
            measurement,
            ratio,
            tau_a: [taus[0].re, taus[0].im],
            tau_b: [taus[1].re, taus[1].im],
        });
    }
    let max = |k: usize| rows.iter().map(|r| r.ratio[k]).fold(0.0, f64::max);
    let (c_a, c_b, c_omega) = (max(0), max(1), max(2));
    let bound = gluing_bound(c_a, c_b, lambda)?;
    Ok(GluingCheck { lambda, c_a, c_b, c_omega, bound, holds: c_omega <= bound * (1.0 + 1e-6), rows })
}
