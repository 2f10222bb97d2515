use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::transforms::FockField;

use super::mask::DomainMask;
use super::poincare::poincare_on_values;

/// Default zero excision radius in grid cells.
pub const EXCISION_CELLS: f64 = 3.0;
/// Samples with `|F1|` below this fraction of its maximum on the domain are dropped.
pub const MODULUS_FLOOR: f64 = 1e-6;

/// A zero of a sampled entire function located by the discrete winding number of one cell.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridZero {
    pub x: f64,
    pub w: f64,
    pub winding: i32,
}

/// Cells of `F` inside `omega` whose corner phases wind around the origin.
pub fn find_zeros(f: &FockField, omega: &DomainMask) -> Vec<GridZero> {
    let g = *f.grid();
    let (nx, nw) = g.shape();
    let mut out = Vec::new();
    for ix in 0..nx - 1 {
        for iw in 0..nw - 1 {
            let corners = [(ix, iw), (ix + 1, iw), (ix + 1, iw + 1), (ix, iw + 1)];
            if corners.iter().any(|&(a, b)| {
                let i = g.index(a, b);
                !omega.contains(i) || !f.valid[i]
            }) {
                continue;
            }
            let v = corners.map(|(a, b)| f.at(a, b));
            if v.iter().any(|z| z.norm() == 0.0) {
                let k = v.iter().position(|z| z.norm() == 0.0).unwrap();
                let (a, b) = corners[k];
                // An exact node zero is reported once, from the cell it is the lower-left corner of.
                if k == 0 {
                    out.push(GridZero { x: g.x.point(a), w: g.omega.point(b), winding: 0 });
                }
                continue;
            }
            let turn: f64 = (0..4).map(|k| (v[(k + 1) % 4] / v[k]).arg()).sum();
            let winding = (turn / (2.0 * PI)).round() as i32;
            if winding != 0 {
                out.push(GridZero {
                    x: g.x.point(ix) + 0.5 * g.x.spacing(),
                    w: g.omega.point(iw) + 0.5 * g.omega.spacing(),
                    winding,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    /// `| |F1| - |F2| |`.
    pub modulus_term: f64,
    /// `| grad|F1| - grad|F2| |`.
    pub gradient_term: f64,
    /// `| (grad|F1| / |F1|)(|F1| - |F2|) |`.
    pub log_gradient_term: f64,
    pub poincare: f64,
    pub bound: f64,
    /// `inf over |lambda| = 1 of |F2 - lambda F1|`.
    pub distance: f64,
    pub sound: bool,
    pub zeros: Vec<GridZero>,
    pub excision_radius: f64,
    pub excised_fraction: f64,
    pub nodes: usize,
    pub dropped: usize,
}

/// Explicit form of the phase-removal estimate on `Omega` minus disks around
/// the zeros of `F1`, all norms in `L2(e^{-pi |z|^2} dA)`:
/// `d <= T1 + 2 sqrt 2 C_P (T2 + T3)`, with `C_P` the Poincare constant of
/// `|F1|^2 dgamma`. Only `p = 2` is supported.
pub fn stability_certificate(
    f1: &FockField,
    f2: &FockField,
    omega: &DomainMask,
    p: f64,
    excision_cells: f64,
) -> Result<CertificateReport> {
    if p != 2.0 {
        return Err(Error::Unsupported(format!("certificate for p = {p}; only p = 2 is implemented")));
    }
    f1.field.check_same(&f2.field)?;
    if !omega.grid().same_as(f1.grid()) {
        return Err(Error::IncompatibleGrids("mask and fields on different grids".into()));
    }
    let g = *f1.grid();
    let (nx, nw) = g.shape();
    let peak = (0..g.len())
        .filter(|&i| omega.contains(i) && f1.valid[i])
        .map(|i| f1.field.values()[i].norm())
        .fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::ZeroInput("F1 vanishes on the domain".into()));
    }
    let zeros = find_zeros(f1, omega);
    let radius = excision_cells * g.x.spacing().max(g.omega.spacing());
    let excised = DomainMask::from_fn(g, |x, w| zeros.iter().any(|z| (x - z.x).hypot(w - z.w) <= radius));
    let floor = MODULUS_FLOOR * peak;
    let keep: Vec<bool> = (0..g.len())
        .map(|i| {
            let (ix, iw) = (i / nw, i % nw);
            omega.contains(i)
                && !excised.contains(i)
                && f1.stencil_valid(ix, iw, 2, 2)
                && f2.stencil_valid(ix, iw, 2, 2)
                && f1.field.values()[i].norm() > floor
        })
        .collect();
    let domain = DomainMask::new(g, keep)?;
    let in_omega = omega.count();
    let dropped = in_omega - domain.count() - omega.intersection(&excised)?.count();
    if domain.count() < 2 {
        return Err(Error::Degenerate("no usable nodes after excision".into()));
    }
    let da = g.cell_area();
    let (mut t1, mut t2, mut t3) = (0.0, 0.0, 0.0);
    let mut fg = Complex64::new(0.0, 0.0);
    let mut weight = vec![0.0; g.len()];
    for ix in 0..nx {
        for iw in 0..nw {
            let i = g.index(ix, iw);
            if !domain.contains(i) {
                continue;
            }
            let (x, w) = g.coords(i);
            let gamma = (-PI * (x * x + w * w)).exp();
            let (a, b) = (f1.at(ix, iw), f2.at(ix, iw));
            let (ma, mb) = (a.norm(), b.norm());
            let ga = modulus_gradient_vec(a, f1.gradient4(ix, iw));
            let gb = modulus_gradient_vec(b, f2.gradient4(ix, iw));
            let d = ma - mb;
            t1 += d * d * gamma;
            t2 += ((ga.0 - gb.0).powi(2) + (ga.1 - gb.1).powi(2)) * gamma;
            t3 += (ga.0 * ga.0 + ga.1 * ga.1) / (ma * ma) * d * d * gamma;
            fg += b * a.conj() * gamma;
            weight[i] = ma * ma;
        }
    }
    let (t1, t2, t3) = ((t1 * da).sqrt(), (t2 * da).sqrt(), (t3 * da).sqrt());
    let lambda = if fg.norm() > 0.0 { fg / fg.norm() } else { Complex64::new(1.0, 0.0) };
    let distance = ((0..g.len())
        .filter(|&i| domain.contains(i))
        .map(|i| {
            let (x, w) = g.coords(i);
            (f2.field.values()[i] - lambda * f1.field.values()[i]).norm_sqr() * (-PI * (x * x + w * w)).exp()
        })
        .sum::<f64>()
        * da)
        .sqrt();
    let poincare = poincare_on_values(&domain, &weight, true)?.constant;
    let bound = if t2 + t3 == 0.0 { t1 } else { t1 + 2.0 * SQRT_2 * poincare * (t2 + t3) };
    Ok(CertificateReport {
        modulus_term: t1,
        gradient_term: t2,
        log_gradient_term: t3,
        poincare,
        bound,
        distance,
        sound: bound >= distance,
        excision_radius: radius,
        excised_fraction: omega.intersection(&excised)?.count() as f64 / in_omega as f64,
        zeros,
        nodes: domain.count(),
        dropped,
    })
}

/// `grad |F| = Re(conj(F) grad F) / |F|`.
fn modulus_gradient_vec(f: Complex64, (dx, dw): (Complex64, Complex64)) -> (f64, f64) {
    let a = f.norm();
    ((f.conj() * dx).re / a, (f.conj() * dw).re / a)
}

#[derive(Debug, Clone, Serialize)]
pub struct LogConcavity {
    pub nodes: usize,
    pub violations: usize,
    pub min_eigenvalue: f64,
}

impl LogConcavity {
    pub fn is_log_concave(&self) -> bool {
        self.violations == 0
    }
}

/// Smallest eigenvalue of the finite-difference Hessian of `-log(W gamma)` over
/// mask nodes whose 3x3 neighbourhood lies in the mask with `W > 0`. A node
/// violates log-concavity when that eigenvalue is below `-tol`.
pub fn log_concavity(w: &[f64], omega: &DomainMask, gaussian: bool, tol: f64) -> LogConcavity {
    let g = omega.grid();
    let (nx, nw) = g.shape();
    let (hx, hw) = (g.x.spacing(), g.omega.spacing());
    let v = |ix: usize, iw: usize| {
        let i = ix * nw + iw;
        let (x, y) = g.coords(i);
        let gamma = if gaussian { -PI * (x * x + y * y) } else { 0.0 };
        -(w[i].ln() + gamma)
    };
    let mut report = LogConcavity { nodes: 0, violations: 0, min_eigenvalue: f64::INFINITY };
    for ix in 1..nx.saturating_sub(1) {
        for iw in 1..nw.saturating_sub(1) {
            let ok =
                (ix - 1..=ix + 1).all(|a| (iw - 1..=iw + 1).all(|b| omega.contains(a * nw + b) && w[a * nw + b] > 0.0));
            if !ok {
                continue;
            }
            let c = v(ix, iw);
            let vxx = (v(ix + 1, iw) - 2.0 * c + v(ix - 1, iw)) / (hx * hx);
            let vww = (v(ix, iw + 1) - 2.0 * c + v(ix, iw - 1)) / (hw * hw);
            let vxw = (v(ix + 1, iw + 1) - v(ix + 1, iw - 1) - v(ix - 1, iw + 1) + v(ix - 1, iw - 1)) / (4.0 * hx * hw);
            let mean = 0.5 * (vxx + vww);
            let lmin = mean - (0.25 * (vxx - vww).powi(2) + vxw * vxw).sqrt();
            report.nodes += 1;
            report.min_eigenvalue = report.min_eigenvalue.min(lmin);
            if lmin < -tol {
                report.violations += 1;
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::TFField;
    use crate::grid::TFGrid;
    use crate::transforms::fock_polynomial_field;

    fn grid() -> TFGrid {
        TFGrid::square(12.0, 192).unwrap()
    }

    fn scaled(f: &FockField, c: Complex64) -> FockField {
        FockField { field: f.field.scale(c), valid: f.valid.clone() }
    }

    #[test]
    fn identical_fields_certify_zero() {
        let g = grid();
        let (f, _) = fock_polynomial_field(&[Complex64::new(0.3, -0.2)], g).unwrap();
        let r = stability_certificate(&f, &f, &DomainMask::disk(g, (0.0, 0.0), 2.0), 2.0, EXCISION_CELLS).unwrap();
        assert_eq!((r.modulus_term, r.gradient_term, r.log_gradient_term), (0.0, 0.0, 0.0));
        assert_eq!(r.bound, 0.0);
        assert!(r.distance < 1e-12);
    }

    #[test]
    fn constant_has_no_log_gradient_term() {
        let g = grid();
        let (one, _) = fock_polynomial_field(&[], g).unwrap();
        let (p, _) = fock_polynomial_field(&[Complex64::new(3.0, 0.0)], g).unwrap();
        let f2 =
            FockField { field: one.field.zip_with(&p.field, |a, b| a + 0.01 * b).unwrap(), valid: one.valid.clone() };
        let r = stability_certificate(&one, &f2, &DomainMask::disk(g, (0.0, 0.0), 2.0), 2.0, EXCISION_CELLS).unwrap();
        assert_eq!(r.log_gradient_term, 0.0);
        assert!(r.gradient_term > 0.0);
        assert!(r.sound, "{r:?}");
    }

    #[test]
    fn linear_zero_is_excised_and_bound_holds() {
        let g = grid();
        let z0 = Complex64::new(0.4, 0.25);
        let (f1, _) = fock_polynomial_field(&[z0], g).unwrap();
        let (f2, _) = fock_polynomial_field(&[z0 + Complex64::new(0.05, -0.03)], g).unwrap();
        let f2 = scaled(&f2, Complex64::cis(0.7));
        let omega = DomainMask::disk(g, (0.0, 0.0), 2.0);
        let r = stability_certificate(&f1, &f2, &omega, 2.0, EXCISION_CELLS).unwrap();
        assert_eq!(r.zeros.len(), 1);
        assert!((r.zeros[0].x - z0.re).abs() < 0.07 && (r.zeros[0].w - z0.im).abs() < 0.07);
        assert_eq!(r.zeros[0].winding, 1);
        assert!(r.excised_fraction < 0.01);
        assert!(r.sound && r.distance > 0.0, "{r:?}");
    }

    #[test]
    fn rejects_zero_field_and_other_exponents() {
        let g = grid();
        let zero = FockField { field: TFField::zeros(g), valid: vec![true; g.len()] };
        let omega = DomainMask::disk(g, (0.0, 0.0), 1.0);
        assert!(matches!(stability_certificate(&zero, &zero, &omega, 2.0, 3.0), Err(Error::ZeroInput(_))));
        let (f, _) = fock_polynomial_field(&[], g).unwrap();
        assert!(matches!(stability_certificate(&f, &f, &omega, 1.5, 3.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn gaussian_measure_is_log_concave() {
        let g = TFGrid::square(4.0, 32).unwrap();
        let full = DomainMask::full(g);
        let ones = vec![1.0; g.len()];
        assert!(log_concavity(&ones, &full, true, 1e-8).is_log_concave());
        let bimodal: Vec<f64> = (0..g.len())
            .map(|i| {
                let (x, _) = g.coords(i);
                (-4.0 * PI * (x - 1.0).powi(2)).exp() + (-4.0 * PI * (x + 1.0).powi(2)).exp()
            })
            .collect();
        assert!(!log_concavity(&bimodal, &full, true, 1e-8).is_log_concave());
    }
}
