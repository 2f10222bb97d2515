use crate::error::{Error, Result};

use super::GridField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpMode {
    Below,
    AtOrAbove,
}

/// Smooth cutoff: 1 on `[0, 1]`, 0 on `[2, inf)`, `C^inf` in between.
pub fn lp_profile(t: f64) -> f64 {
    if t <= 1.0 {
        return 1.0;
    }
    if t >= 2.0 {
        return 0.0;
    }
    let s = t - 1.0;
    let a = (-1.0 / (1.0 - s)).exp();
    let b = (-1.0 / s).exp();
    a / (a + b)
}

/// Littlewood-Paley projection at frequency `2^j`: `Below` applies the
/// multiplier `psi(|xi| / 2^j)`, `AtOrAbove` is `F - P_{<j} F`.
pub fn littlewood_paley<F: GridField>(f: &F, j: i32, mode: LpMode) -> Result<F> {
    let cutoff = 2f64.powi(j);
    if cutoff > f.nyquist_max() {
        return Err(Error::Precondition(format!(
            "2^{j} = {cutoff} exceeds the grid Nyquist frequency {}",
            f.nyquist_max()
        )));
    }
    let below = f.radial_multiplier(&|xi| lp_profile(xi / cutoff));
    Ok(match mode {
        LpMode::Below => below,
        LpMode::AtOrAbove => {
            let values = f.samples().iter().zip(below.samples()).map(|(a, b)| a - b).collect();
            f.with_samples(values)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::TFField;
    use crate::grid::{Grid1D, TFGrid};
    use crate::signal::Signal;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn profile_shape() {
        assert_eq!(lp_profile(0.0), 1.0);
        assert_eq!(lp_profile(1.0), 1.0);
        assert_eq!(lp_profile(2.0), 0.0);
        assert!((lp_profile(1.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for k in 0..=100 {
            let v = lp_profile(1.0 + k as f64 / 100.0);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn partition_and_nesting_of_multipliers() {
        // Multiplier-level identities hold exactly.
        for k in 0..1000 {
            let t = k as f64 * 0.005;
            let j = 3;
            let below = lp_profile(t / 2f64.powi(j));
            let above = 1.0 - below;
            assert_eq!(below + above, 1.0);
            let inner = lp_profile(t / 2f64.powi(j - 2));
            if inner > 0.0 {
                assert_eq!(below * inner, inner);
            }
        }
    }

    #[test]
    fn field_partition_of_unity() {
        let g = TFGrid::square(8.0, 64).unwrap();
        let f = TFField::from_fn(g, |x, w| Complex64::new((-(x * x + w * w)).exp(), (3.0 * x).sin())).unwrap();
        let lo = littlewood_paley(&f, 1, LpMode::Below).unwrap();
        let hi = littlewood_paley(&f, 1, LpMode::AtOrAbove).unwrap();
        let sum = lo.add(&hi).unwrap();
        assert!(sum.sub(&f).unwrap().norm(f64::INFINITY) <= 1e-15 * f.norm(f64::INFINITY));
        let nested = littlewood_paley(&littlewood_paley(&f, 2, LpMode::Below).unwrap(), 0, LpMode::Below).unwrap();
        let direct = littlewood_paley(&f, 0, LpMode::Below).unwrap();
        assert!(nested.sub(&direct).unwrap().norm(f64::INFINITY) < 1e-13);
    }

    #[test]
    fn constants_and_high_waves() {
        let g = Grid1D::new(16.0, 256).unwrap();
        let c = Signal::from_fn(g, |_| Complex64::new(2.0, -1.0)).unwrap();
        let p = littlewood_paley(&c, 1, LpMode::Below).unwrap();
        assert!(p.sub(&c).unwrap().norm(f64::INFINITY) < 1e-14);
        let j = 1;
        let xi0 = 2f64.powi(j + 2);
        let wave = Signal::from_fn(g, |x| Complex64::cis(2.0 * PI * xi0 * x)).unwrap();
        let low = littlewood_paley(&wave, j, LpMode::Below).unwrap();
        assert!(low.norm(2.0) / wave.norm(2.0) < 1e-8);
        assert!(littlewood_paley(&wave, 4, LpMode::Below).is_err());
    }
}
