use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::TFField;
use crate::grid::Grid1D;
use crate::grid::TFGrid;

use super::ambiguity::ambiguity;
use super::stft::WindowSpec;

/// Relative modulus below which ambiguity samples are unresolved noise.
const RESOLUTION_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct WindowRatio {
    /// `<(x, w)> |A phi / A Phi|` on resolved, non-vanishing cells, 0 elsewhere.
    pub field: TFField,
    /// Grid supremum; infinite when `A Phi` vanishes somewhere on the grid.
    pub sup: f64,
    /// Midpoints of grid edges across which both parts of `A Phi` change sign.
    pub zero_locus: Vec<(f64, f64)>,
    pub resolved: Vec<bool>,
}

fn ambiguity_on(spec: &WindowSpec, grid: &TFGrid, signal_grid: Grid1D) -> Result<TFField> {
    if spec.ambiguity_closed_form(0.0, 0.0).is_some() {
        TFField::from_fn(*grid, |x, w| Complex64::new(spec.ambiguity_closed_form(x, w).unwrap_or(0.0), 0.0))
    } else {
        let s = spec.signal(signal_grid)?;
        ambiguity(&s)
    }
}

/// Compares the ambiguity functions of two windows on the full grid of
/// `signal_grid`. Closed forms are used for Gaussian and Hermite windows,
/// sampled windows go through the STFT.
pub fn window_comparison_ratio(phi: &WindowSpec, big_phi: &WindowSpec, signal_grid: Grid1D) -> Result<WindowRatio> {
    let tf = TFGrid::full(&signal_grid);
    let a = ambiguity_on(phi, &tf, signal_grid)?;
    let b = ambiguity_on(big_phi, &tf, signal_grid)?;
    if !a.grid().same_as(b.grid()) {
        return Err(Error::IncompatibleGrids("window ambiguities on different grids".into()));
    }
    let (nx, nw) = tf.shape();
    // Closed forms are exact down to underflow; sampled ambiguities carry FFT noise.
    let floor =
        if big_phi.ambiguity_closed_form(0.0, 0.0).is_some() { 0.0 } else { RESOLUTION_FLOOR * b.norm(f64::INFINITY) };
    let resolved: Vec<bool> = b.values().iter().map(|v| v.norm() > floor).collect();
    let negligible = |v: f64| v.abs() <= floor;
    let crosses = |p: Complex64, q: Complex64| {
        let re = p.re * q.re < 0.0 || (negligible(p.re) && negligible(q.re));
        let im = p.im * q.im < 0.0 || (negligible(p.im) && negligible(q.im));
        re && im
    };
    let mut zero_locus = Vec::new();
    for ix in 0..nx {
        for iw in 0..nw {
            let i = tf.index(ix, iw);
            let (x, w) = tf.coords(i);
            let here = b.values()[i];
            if here == Complex64::new(0.0, 0.0) {
                zero_locus.push((x, w));
                continue;
            }
            for (jx, jw) in [(ix + 1, iw), (ix, iw + 1)] {
                if jx >= nx || jw >= nw {
                    continue;
                }
                let j = tf.index(jx, jw);
                if !(resolved[i] || resolved[j]) {
                    continue;
                }
                if crosses(here, b.values()[j]) {
                    let (x2, w2) = tf.coords(j);
                    zero_locus.push((0.5 * (x + x2), 0.5 * (w + w2)));
                }
            }
        }
    }
    let mut sup = 0f64;
    let values: Vec<Complex64> = (0..tf.len())
        .map(|i| {
            let (x, w) = tf.coords(i);
            let den = b.values()[i];
            if !resolved[i] || den.norm() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let r = (1.0 + x * x + w * w).sqrt() * (a.values()[i] / den).norm();
            sup = sup.max(r);
            Complex64::new(r, 0.0)
        })
        .collect();
    if !zero_locus.is_empty() {
        sup = f64::INFINITY;
    }
    Ok(WindowRatio { field: TFField::new(tf, values)?, sup, zero_locus, resolved })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use std::f64::consts::PI;

    #[test]
    fn identical_windows_give_bracket() {
        let g = Grid1D::new(16.0, 256).unwrap();
        let r = window_comparison_ratio(&WindowSpec::Gaussian, &WindowSpec::Gaussian, g).unwrap();
        assert!(r.zero_locus.is_empty());
        let corner = (1.0 + 2.0 * 64.0f64).sqrt();
        assert!((r.sup - corner).abs() < 1e-12);
        assert_eq!(r.field.values()[0].re, r.sup);
    }

    #[test]
    fn hermite_one_vanishes_on_circle() {
        let g = Grid1D::new(16.0, 256).unwrap();
        let r = window_comparison_ratio(&WindowSpec::Gaussian, &WindowSpec::Hermite { n: 1 }, g).unwrap();
        assert!(r.sup.is_infinite());
        let radius = 1.0 / PI.sqrt();
        for &(x, w) in &r.zero_locus {
            assert!((x.hypot(w) - radius).abs() < 0.1, "({x}, {w})");
        }
        assert!(r.zero_locus.len() > 20);
        let origin = r.field.get(128, 128).re;
        assert!((origin - 1.0).abs() < 1e-12);
    }
}
