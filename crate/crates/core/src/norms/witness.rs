use num_complex::Complex64;

use crate::error::{Error, Result};

use super::{GridField, Norm};

const DECOMPOSITION_TOL: f64 = 1e-8;

/// `rho = || |g| ∧ |h| || / min(||g||, ||h||)` for a decomposition `f = g + h`.
/// Small values certify a local instability of size about `1 / rho`.
pub fn disjointness_witness<F: GridField>(f: &F, g: &F, h: &F, norm: &Norm) -> Result<f64> {
    if !(f.same_grid(g) && f.same_grid(h)) {
        return Err(Error::IncompatibleGrids("witness fields on different grids".into()));
    }
    let residual: Vec<Complex64> =
        f.samples().iter().zip(g.samples().iter().zip(h.samples())).map(|(a, (b, c))| a - b - c).collect();
    let nf = norm.eval(f);
    let nr = norm.eval(&f.with_samples(residual));
    if nr > DECOMPOSITION_TOL * nf {
        return Err(Error::Precondition(format!("decomposition is inexact: ||f - g - h|| = {nr:e}")));
    }
    let (ng, nh) = (norm.eval(g), norm.eval(h));
    if ng == 0.0 || nh == 0.0 {
        return Err(Error::ZeroInput("witness parts must be nonzero".into()));
    }
    let meet: Vec<Complex64> =
        g.samples().iter().zip(h.samples()).map(|(a, b)| Complex64::new(a.norm().min(b.norm()), 0.0)).collect();
    Ok(norm.eval(&f.with_samples(meet)) / ng.min(nh))
}

/// `|| |F| ||_W / ||F||_W` for a Sobolev-type norm `W`.
pub fn modulus_sobolev_ratio<F: GridField>(f: &F, norm: &Norm) -> Result<f64> {
    let denom = norm.eval(f);
    if denom == 0.0 {
        return Err(Error::ZeroInput("modulus ratio of a zero field".into()));
    }
    let modulus: Vec<Complex64> = f.samples().iter().map(|v| Complex64::new(v.norm(), 0.0)).collect();
    Ok(norm.eval(&f.with_samples(modulus)) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::TFField;
    use crate::grid::{Grid1D, TFGrid};
    use crate::signal::Signal;

    #[test]
    fn witness_edge_cases() {
        let grid = Grid1D::new(32.0, 256).unwrap();
        let g = Signal::gaussian(grid, -6.0, 0.0).unwrap();
        let h = Signal::from_fn(grid, |x| Complex64::new(if x > 0.0 { (-x).exp() } else { 0.0 }, 0.0)).unwrap();
        let disjoint_g = Signal::from_fn(grid, |x| Complex64::new(if x <= 0.0 { 1.0 } else { 0.0 }, 0.0)).unwrap();
        let f = disjoint_g.add(&h).unwrap();
        let l2 = Norm::l2();
        assert_eq!(disjointness_witness(&f, &disjoint_g, &h, &l2).unwrap(), 0.0);
        let half = g.scale(Complex64::new(0.5, 0.0));
        assert_eq!(disjointness_witness(&g, &half, &half, &l2).unwrap(), 1.0);
        assert!(disjointness_witness(&g, &half, &g, &l2).is_err());
    }

    #[test]
    fn modulus_ratio_of_phased_real_field_is_one() {
        let g = TFGrid::square(8.0, 64).unwrap();
        let real = TFField::from_fn(g, |x, w| Complex64::new((-(x * x + w * w)).exp(), 0.0)).unwrap();
        let norm = Norm::Sobolev { s: 1.0, p: 2.0, r: 1.0 };
        assert_eq!(modulus_sobolev_ratio(&real, &norm).unwrap(), 1.0);
        let phased = real.scale(Complex64::cis(0.7));
        assert!((modulus_sobolev_ratio(&phased, &norm).unwrap() - 1.0).abs() < 1e-12);
        assert!(modulus_sobolev_ratio(&TFField::zeros(g), &norm).is_err());
    }
}
