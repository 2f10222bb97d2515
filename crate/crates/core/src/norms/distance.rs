use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

use super::{GridField, Norm};

const SCAN_POINTS: usize = 720;
const THETA_TOL: f64 = 1e-10;
const DEGENERATE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMethod {
    ClosedForm,
    Degenerate,
    ScanRefine,
}

/// `inf_{|lambda| = 1} ||lambda F - G||` together with its minimiser.
///
/// `lambda` multiplies the first argument; equivalently `conj(lambda)` is the
/// minimiser of `||F - mu G||`, and the distance is the same.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhaseDistance {
    pub distance: f64,
    #[serde(serialize_with = "ser_complex")]
    pub lambda: Complex64,
    pub method: DistanceMethod,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

/// Phase-infimum distance between `f` and `g`. `domain` restricts the sum to
/// the marked samples and is supported for Lebesgue norms only.
pub fn phase_inf_distance<F: GridField>(f: &F, g: &F, norm: &Norm, domain: Option<&[bool]>) -> Result<PhaseDistance> {
    if !f.same_grid(g) {
        return Err(Error::IncompatibleGrids("phase distance needs fields on the same grid".into()));
    }
    norm.validate()?;
    if let Some(mask) = domain {
        if !matches!(norm, Norm::Lebesgue { .. }) {
            return Err(Error::Unsupported(format!("domain restriction of {}", norm.label())));
        }
        if mask.len() != f.samples().len() {
            return Err(Error::IncompatibleGrids("domain mask size mismatch".into()));
        }
    }
    let select = |v: &[Complex64]| -> Vec<Complex64> {
        match domain {
            Some(mask) => v.iter().zip(mask).filter(|(_, &m)| m).map(|(a, _)| *a).collect(),
            None => v.to_vec(),
        }
    };
    let w = f.cell_measure();
    let fc: Vec<(Vec<Complex64>, f64)> = norm.components(f).into_iter().map(|c| (select(&c.values), c.p)).collect();
    let gc: Vec<(Vec<Complex64>, f64)> = norm.components(g).into_iter().map(|c| (select(&c.values), c.p)).collect();
    let objective = |lambda: Complex64, exact: bool| -> f64 {
        fc.iter()
            .zip(&gc)
            .map(|((a, p), (b, _))| {
                let moduli = a.iter().zip(b).map(|(x, y)| (lambda * x - y).norm());
                if exact {
                    crate::signal::lp_norm(moduli, *p, w)
                } else {
                    fast_lp(moduli, *p, w)
                }
            })
            .sum()
    };

    if let Norm::Lebesgue { q } = norm {
        if *q == 2.0 {
            let (a, b) = (&fc[0].0, &gc[0].0);
            let ip: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
            let na = a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let nb = b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let (lambda, method) = if ip.norm() <= DEGENERATE_TOL * na * nb || ip.norm() == 0.0 {
                (Complex64::new(1.0, 0.0), DistanceMethod::Degenerate)
            } else {
                (ip / ip.norm(), DistanceMethod::ClosedForm)
            };
            return Ok(PhaseDistance { distance: objective(lambda, true), lambda, method });
        }
    }

    let theta_at = |k: usize| 2.0 * std::f64::consts::PI * k as f64 / SCAN_POINTS as f64;
    let values: Vec<f64> = (0..SCAN_POINTS).map(|k| objective(Complex64::cis(theta_at(k)), false)).collect();
    let spread =
        values.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - values.iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = values.iter().cloned().fold(0.0, f64::max);
    if spread <= DEGENERATE_TOL * scale || scale == 0.0 {
        let lambda = Complex64::new(1.0, 0.0);
        return Ok(PhaseDistance { distance: objective(lambda, true), lambda, method: DistanceMethod::Degenerate });
    }
    let mut best = 0;
    for (k, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = k;
        }
    }
    let step = theta_at(1);
    let (mut lo, mut hi) = (theta_at(best) - step, theta_at(best) + step);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let eval = |t: f64| objective(Complex64::cis(t), false);
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let (mut fc_, mut fd) = (eval(c), eval(d));
    while hi - lo > THETA_TOL {
        if fc_ <= fd {
            hi = d;
            d = c;
            fd = fc_;
            c = hi - phi * (hi - lo);
            fc_ = eval(c);
        } else {
            lo = c;
            c = d;
            fc_ = fd;
            d = lo + phi * (hi - lo);
            fd = eval(d);
        }
    }
    let theta = 0.5 * (lo + hi);
    let lambda = Complex64::cis(theta);
    Ok(PhaseDistance { distance: objective(lambda, true), lambda, method: DistanceMethod::ScanRefine })
}

/// Unsorted `L^p` sum for the inner scan loop; the reported value is
/// recomputed with the order-independent sum.
fn fast_lp(moduli: impl Iterator<Item = f64>, p: f64, w: f64) -> f64 {
    if p.is_infinite() {
        return moduli.fold(0.0, f64::max);
    }
    if p == 2.0 {
        return (w * moduli.map(|a| a * a).sum::<f64>()).sqrt();
    }
    (w * moduli.map(|a| a.powf(p)).sum::<f64>()).powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use crate::rng;
    use crate::signal::Signal;

    fn pair(seed: u64) -> (Signal, Signal) {
        let g = Grid1D::new(16.0, 128).unwrap();
        let mut r = rng::stream(seed);
        (rng::random_signal(g, &mut r, 3, 3.0, 2.0).unwrap(), rng::random_signal(g, &mut r, 3, 3.0, 2.0).unwrap())
    }

    #[test]
    fn rotated_copy_has_zero_distance() {
        let (f, _) = pair(1);
        let g = f.scale(Complex64::i());
        for norm in [Norm::l2(), Norm::Lebesgue { q: 4.0 }, Norm::Sobolev { s: 1.0, p: 2.0, r: 1.0 }] {
            let d = phase_inf_distance(&f, &g, &norm, None).unwrap();
            assert!(d.distance < 1e-8, "{}: {}", norm.label(), d.distance);
            assert!((d.lambda - Complex64::i()).norm() < 1e-8);
        }
    }

    #[test]
    fn orthogonal_pair_is_degenerate() {
        let g = Grid1D::new(16.0, 128).unwrap();
        let a = Signal::hermite(g, 0).unwrap();
        let b = Signal::hermite(g, 1).unwrap();
        let d = phase_inf_distance(&a, &b, &Norm::l2(), None).unwrap();
        assert_eq!(d.method, DistanceMethod::Degenerate);
        assert!((d.distance - 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn scan_matches_dense_brute_force() {
        let (f, g) = pair(5);
        let norm = Norm::Lebesgue { q: 4.0 };
        let d = phase_inf_distance(&f, &g, &norm, None).unwrap();
        let brute = (0..100_000)
            .map(|k| {
                let l = Complex64::cis(2.0 * std::f64::consts::PI * k as f64 / 100_000.0);
                norm.eval(&f.scale(l).sub(&g).unwrap())
            })
            .fold(f64::INFINITY, f64::min);
        assert!(d.distance <= brute + 1e-12);
        assert!((d.distance - brute).abs() < 1e-6);
    }

    #[test]
    fn domain_only_for_lebesgue() {
        let (f, g) = pair(2);
        let mask = vec![true; f.len()];
        assert!(phase_inf_distance(&f, &g, &Norm::l2(), Some(&mask)).is_ok());
        let sob = Norm::Sobolev { s: 1.0, p: 2.0, r: 0.0 };
        assert!(matches!(phase_inf_distance(&f, &g, &sob, Some(&mask)), Err(Error::Unsupported(_))));
    }
}
