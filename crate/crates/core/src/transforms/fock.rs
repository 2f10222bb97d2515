use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::TFField;
use crate::grid::TFGrid;

use super::stft::WindowSpec;

/// Relative modulus below which a Gabor sample is treated as numerical noise
/// when stripping the Gaussian weight.
const NOISE_FLOOR: f64 = 1e-8;

/// Samples of an entire function `F(z)`, `z = x + i w`, on a time-frequency grid.
///
/// Convention: `F(z) = e^{pi |z|^2 / 2} e^{-pi i x w} G f(x, -w)` where `G f` is
/// the Gabor transform (Gaussian window). Samples are kept only where the
/// Gabor field is above its noise floor; `valid` marks them.
#[derive(Debug, Clone)]
pub struct FockField {
    pub field: TFField,
    pub valid: Vec<bool>,
}

fn mirror_index(iw: usize, n: usize) -> usize {
    (n - iw) % n
}

impl FockField {
    /// Strips the Gaussian weight from a Gabor field. The frequency axis must
    /// be symmetric (even count, centered) so that `-w` is a grid node.
    pub fn from_gabor(g: &TFField, window: &WindowSpec) -> Result<FockField> {
        if !window.is_gaussian() {
            return Err(Error::Precondition(format!("the Fock view needs a Gaussian window, got {}", window.label())));
        }
        let grid = *g.grid();
        let (nx, nw) = grid.shape();
        let (gmax, _) = g.max_modulus();
        let floor = NOISE_FLOOR * gmax;
        let mut values = Vec::with_capacity(grid.len());
        let mut valid = Vec::with_capacity(grid.len());
        for ix in 0..nx {
            let x = grid.x.point(ix);
            for iw in 0..nw {
                let w = grid.omega.point(iw);
                let sample = g.get(ix, mirror_index(iw, nw));
                if sample.norm() >= floor && gmax > 0.0 {
                    let weight = (0.5 * PI * (x * x + w * w)).exp();
                    values.push(sample * Complex64::cis(-PI * x * w) * weight);
                    valid.push(true);
                } else {
                    values.push(Complex64::new(0.0, 0.0));
                    valid.push(false);
                }
            }
        }
        Ok(FockField { field: TFField::new(grid, values)?, valid })
    }

    pub fn grid(&self) -> &TFGrid {
        self.field.grid()
    }

    pub fn at(&self, ix: usize, iw: usize) -> Complex64 {
        self.field.get(ix, iw)
    }

    /// Whether a centered stencil of half-width `reach` around `(ix, iw)` is
    /// valid and at least `frame` cells away from the grid edge.
    pub fn interior(&self, ix: usize, iw: usize, frame: usize) -> bool {
        self.stencil_valid(ix, iw, frame, 1)
    }

    pub(crate) fn stencil_valid(&self, ix: usize, iw: usize, frame: usize, reach: usize) -> bool {
        let (nx, nw) = self.grid().shape();
        let margin = frame.max(reach);
        if ix < margin || iw < margin || ix + margin >= nx || iw + margin >= nw {
            return false;
        }
        let g = self.grid();
        (1..=reach).all(|d| {
            [(ix - d, iw), (ix + d, iw), (ix, iw - d), (ix, iw + d)].iter().all(|&(a, b)| self.valid[g.index(a, b)])
        }) && self.valid[g.index(ix, iw)]
    }

    /// Second-order centered differences `(dF/dx, dF/dw)` at an interior node.
    pub fn gradient(&self, ix: usize, iw: usize) -> (Complex64, Complex64) {
        let hx = self.grid().x.spacing();
        let hw = self.grid().omega.spacing();
        let dx = (self.at(ix + 1, iw) - self.at(ix - 1, iw)) / (2.0 * hx);
        let dw = (self.at(ix, iw + 1) - self.at(ix, iw - 1)) / (2.0 * hw);
        (dx, dw)
    }

    /// Fourth-order five-point differences `(dF/dx, dF/dw)`.
    pub fn gradient4(&self, ix: usize, iw: usize) -> (Complex64, Complex64) {
        let hx = self.grid().x.spacing();
        let hw = self.grid().omega.spacing();
        let d = |m2: Complex64, m1: Complex64, p1: Complex64, p2: Complex64, h: f64| {
            (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h)
        };
        let dx = d(self.at(ix - 2, iw), self.at(ix - 1, iw), self.at(ix + 1, iw), self.at(ix + 2, iw), hx);
        let dw = d(self.at(ix, iw - 2), self.at(ix, iw - 1), self.at(ix, iw + 1), self.at(ix, iw + 2), hw);
        (dx, dw)
    }

    /// Relative sup-norm of the Cauchy-Riemann defect `dF/dw - i dF/dx`,
    /// excluding a 2-cell frame and invalid stencils. Scale is the larger of
    /// `sup |grad F|` and `sup |F|` over the same nodes.
    pub fn cauchy_riemann_residual(&self) -> f64 {
        let (nx, nw) = self.grid().shape();
        let (mut defect, mut grad, mut size) = (0f64, 0f64, 0f64);
        for ix in 0..nx {
            for iw in 0..nw {
                if !self.interior(ix, iw, 2) {
                    continue;
                }
                let (dx, dw) = self.gradient(ix, iw);
                defect = defect.max((dw - Complex64::i() * dx).norm());
                grad = grad.max(dx.norm() + dw.norm());
                size = size.max(self.at(ix, iw).norm());
            }
        }
        let scale = grad.max(size);
        if scale == 0.0 {
            0.0
        } else {
            defect / scale
        }
    }

    /// Largest relative mismatch between `|grad |F||` and `|F'|` over interior
    /// nodes with `|F| > floor * max |F|` restricted to `|z| <= radius`.
    ///
    /// `grad |F|` is taken through the chain rule `Re(conj(F) grad F) / |F|`
    /// from the five-point gradient of `F`, which stays accurate near zeros
    /// where differencing `|F|` directly does not.
    pub fn key_identity_residual(&self, floor: f64, radius: f64) -> f64 {
        let g = *self.grid();
        let (nx, nw) = g.shape();
        let fmax = (0..g.len())
            .filter(|&i| {
                self.valid[i] && {
                    let (x, w) = g.coords(i);
                    x.hypot(w) <= radius
                }
            })
            .map(|i| self.field.values()[i].norm())
            .fold(0.0, f64::max);
        let mut worst = 0f64;
        for ix in 0..nx {
            for iw in 0..nw {
                let (x, w) = (g.x.point(ix), g.omega.point(iw));
                if x.hypot(w) > radius || !self.stencil_valid(ix, iw, 2, 2) {
                    continue;
                }
                let f = self.at(ix, iw);
                if f.norm() <= floor * fmax {
                    continue;
                }
                let (dx, dw) = self.gradient4(ix, iw);
                let grad_mod = modulus_gradient(f, dx, dw);
                let deriv = dx.norm();
                let scale = deriv.max(grad_mod);
                if scale > 0.0 {
                    worst = worst.max((grad_mod - deriv).abs() / scale);
                }
            }
        }
        worst
    }

    /// Least-squares fit of `sum_{k<=degree} c_k z^k` over valid nodes with
    /// `|z| <= radius`; returns the coefficients and the relative residual.
    pub fn polynomial_fit(&self, degree: usize, radius: f64) -> (Vec<Complex64>, f64) {
        let g = *self.grid();
        let m = degree + 1;
        let mut normal = vec![Complex64::new(0.0, 0.0); m * m];
        let mut rhs = vec![Complex64::new(0.0, 0.0); m];
        let mut samples = Vec::new();
        for i in 0..g.len() {
            let (x, w) = g.coords(i);
            if !self.valid[i] || x.hypot(w) > radius {
                continue;
            }
            let z = Complex64::new(x, w);
            let powers: Vec<Complex64> = (0..m)
                .scan(Complex64::new(1.0, 0.0), |p, _| {
                    let cur = *p;
                    *p *= z;
                    Some(cur)
                })
                .collect();
            let v = self.field.values()[i];
            for a in 0..m {
                for b in 0..m {
                    normal[a * m + b] += powers[a].conj() * powers[b];
                }
                rhs[a] += powers[a].conj() * v;
            }
            samples.push((powers, v));
        }
        let coef = solve_dense(normal, rhs, m);
        let (mut res, mut tot) = (0.0, 0.0);
        for (powers, v) in &samples {
            let fit: Complex64 = powers.iter().zip(&coef).map(|(p, c)| p * c).sum();
            res += (fit - v).norm_sqr();
            tot += v.norm_sqr();
        }
        let rel = if tot > 0.0 { (res / tot).sqrt() } else { 0.0 };
        (coef, rel)
    }
}

/// `|grad |F||` from `F` and its partial derivatives, valid where `F != 0`.
pub fn modulus_gradient(f: Complex64, dx: Complex64, dw: Complex64) -> f64 {
    let a = f.norm();
    if a == 0.0 {
        return 0.0;
    }
    let gx = (f.conj() * dx).re / a;
    let gw = (f.conj() * dw).re / a;
    gx.hypot(gw)
}

/// Gaussian elimination with partial pivoting on a small dense system.
fn solve_dense(mut a: Vec<Complex64>, mut b: Vec<Complex64>, m: usize) -> Vec<Complex64> {
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i * m + col].norm().total_cmp(&a[j * m + col].norm())).unwrap_or(col);
        if piv != col {
            for k in 0..m {
                a.swap(col * m + k, piv * m + k);
            }
            b.swap(col, piv);
        }
        let d = a[col * m + col];
        if d.norm() == 0.0 {
            continue;
        }
        for row in col + 1..m {
            let factor = a[row * m + col] / d;
            for k in col..m {
                let t = a[col * m + k];
                a[row * m + k] -= factor * t;
            }
            let t = b[col];
            b[row] -= factor * t;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); m];
    for row in (0..m).rev() {
        let mut s = b[row];
        for k in row + 1..m {
            s -= a[row * m + k] * x[k];
        }
        let d = a[row * m + row];
        x[row] = if d.norm() == 0.0 { Complex64::new(0.0, 0.0) } else { s / d };
    }
    x
}

/// Inverse of the Fock convention: `G f(x, w) = e^{-pi i x w} F(x - i w) e^{-pi |z|^2 / 2}`.
pub fn gabor_from_fock(grid: TFGrid, f: impl Fn(Complex64) -> Complex64) -> Result<TFField> {
    TFField::from_fn(grid, |x, w| {
        let z = Complex64::new(x, -w);
        f(z) * Complex64::cis(-PI * x * w) * (-0.5 * PI * (x * x + w * w)).exp()
    })
}

/// The polynomial `prod (z - root)` on `grid`, with its Gaussian-weighted
/// field `p(z) e^{-pi |z|^2 / 2}` (the modulus of the corresponding Gabor transform).
pub fn fock_polynomial_field(roots: &[Complex64], grid: TFGrid) -> Result<(FockField, TFField)> {
    let (hx, hw) = (0.5 * grid.x.length(), 0.5 * grid.omega.length());
    if let Some(r) = roots.iter().find(|r| r.re.abs() >= hx || r.im.abs() >= hw) {
        return Err(Error::Precondition(format!("root {r} lies outside the grid interior")));
    }
    let p = |z: Complex64| roots.iter().fold(Complex64::new(1.0, 0.0), |acc, r| acc * (z - r));
    let f = TFField::from_fn(grid, |x, w| p(Complex64::new(x, w)))?;
    let weighted = f.map_indexed(|x, w, v| v * (-0.5 * PI * (x * x + w * w)).exp());
    let (nx, nw) = grid.shape();
    let edge = (0..grid.len())
        .filter(|&i| {
            let (ix, iw) = (i / nw, i % nw);
            ix == 0 || iw == 0 || ix == nx - 1 || iw == nw - 1
        })
        .map(|i| weighted.values()[i].norm())
        .fold(0.0, f64::max);
    if edge >= 1e-8 {
        return Err(Error::Precondition(format!("weighted polynomial is {edge:e} at the grid edge; enlarge the grid")));
    }
    Ok((FockField { field: f, valid: vec![true; grid.len()] }, weighted))
}

/// `max |p'/p| * dist(z, roots) / deg(p)` over grid nodes with `Re z >= re_min`.
/// The logarithmic-derivative bound asserts this is at most 1.
pub fn log_derivative_ratio(roots: &[Complex64], grid: &TFGrid, re_min: f64) -> f64 {
    if roots.is_empty() {
        return 0.0;
    }
    let deg = roots.len() as f64;
    let mut worst = 0f64;
    for i in 0..grid.len() {
        let (x, w) = grid.coords(i);
        if x < re_min {
            continue;
        }
        let z = Complex64::new(x, w);
        let dist = roots.iter().map(|r| (z - r).norm()).fold(f64::INFINITY, f64::min);
        if dist == 0.0 {
            continue;
        }
        let logd: Complex64 = roots.iter().map(|r| 1.0 / (z - r)).sum();
        worst = worst.max(logd.norm() * dist / deg);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use crate::signal::Signal;
    use crate::transforms::stft;

    fn gabor(f: &Signal) -> TFField {
        let tf = TFGrid::for_signal(f.grid(), 12.0, 4).unwrap();
        let phi = Signal::gaussian(*f.grid(), 0.0, 0.0).unwrap();
        stft(f, &phi, &tf).unwrap()
    }

    fn grid() -> Grid1D {
        Grid1D::new(16.0, 512).unwrap()
    }

    #[test]
    fn gaussian_maps_to_constant() {
        let phi = Signal::gaussian(grid(), 0.0, 0.0).unwrap();
        let fock = FockField::from_gabor(&gabor(&phi), &WindowSpec::Gaussian).unwrap();
        let g = *fock.grid();
        for i in 0..g.len() {
            let (x, w) = g.coords(i);
            if x.hypot(w) <= 2.0 {
                assert!((fock.field.values()[i] - 1.0).norm() < 1e-4);
            }
        }
        assert!(fock.cauchy_riemann_residual() < 1e-2);
    }

    #[test]
    fn hermite_maps_to_monomial() {
        for n in 1..4 {
            let h = Signal::hermite(grid(), n).unwrap();
            let fock = FockField::from_gabor(&gabor(&h), &WindowSpec::Gaussian).unwrap();
            let (coef, rel) = fock.polynomial_fit(n, 2.0);
            assert!(rel < 1e-3, "n = {n}, residual {rel}");
            let top = coef[n].norm();
            let factorial: f64 = (1..=n).map(|k| k as f64).product();
            assert!((top - (PI.powi(n as i32) / factorial).sqrt()).abs() < 1e-3);
            assert!(fock.cauchy_riemann_residual() < 1e-2);
            let k = fock.key_identity_residual(1e-3, 2.0);
            assert!(k < 5e-2, "n = {n}, key identity residual {k}");
        }
    }

    #[test]
    fn modulus_gradient_never_exceeds_full_gradient() {
        let f = Complex64::new(0.3, -1.2);
        let (dx, dw) = (Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.25));
        let full = (dx.norm_sqr() + dw.norm_sqr()).sqrt();
        assert!(modulus_gradient(f, dx, dw) <= full + 1e-15);
        // Holomorphic case: dw = i dx gives equality with |F'|.
        let g = modulus_gradient(f, dx, Complex64::i() * dx);
        assert!((g - dx.norm()).abs() < 1e-14);
    }

    #[test]
    fn rejects_other_windows() {
        let phi = Signal::gaussian(grid(), 0.0, 0.0).unwrap();
        assert!(FockField::from_gabor(&gabor(&phi), &WindowSpec::Hermite { n: 1 }).is_err());
    }

    #[test]
    fn polynomial_fields() {
        let grid = TFGrid::square(12.0, 96).unwrap();
        let (f, w) = fock_polynomial_field(&[], grid).unwrap();
        assert!(f.field.values().iter().all(|v| *v == Complex64::new(1.0, 0.0)));
        assert!(w.norm(f64::INFINITY) <= 1.0);
        let (f, _) = fock_polynomial_field(&[Complex64::new(0.0, 0.0)], grid).unwrap();
        let zeros = f.field.values().iter().filter(|v| v.norm() == 0.0).count();
        assert_eq!(zeros, 1);
        assert!(fock_polynomial_field(&[], TFGrid::square(4.0, 32).unwrap()).is_err());
        let roots = [Complex64::new(0.5, 1.0), Complex64::new(-1.0, 0.0)];
        assert!(log_derivative_ratio(&roots, &grid, 1.0) <= 1.0);
    }
}
