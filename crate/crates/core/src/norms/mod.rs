//! Weighted Lebesgue and fractional Sobolev norms, Littlewood-Paley
//! projections, phase-infimum distances and the disjointness witness.

mod distance;
mod lp;
mod witness;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::field::TFField;
use crate::signal::{lp_norm, Signal};

pub use distance::{phase_inf_distance, DistanceMethod, PhaseDistance};
pub use lp::{littlewood_paley, lp_profile, LpMode};
pub use witness::{disjointness_witness, modulus_sobolev_ratio};

/// Common interface of sampled signals and time-frequency fields.
pub trait GridField: Clone {
    fn samples(&self) -> &[Complex64];
    fn with_samples(&self, values: Vec<Complex64>) -> Self;
    /// Riemann weight of one sample (`dx` or `dx dw`).
    fn cell_measure(&self) -> f64;
    /// Euclidean norm of the coordinates of sample `i`.
    fn radius_at(&self, i: usize) -> f64;
    /// Fourier multiplier `m(|xi|)` applied by raw FFT on the periodic grid.
    fn radial_multiplier(&self, m: &dyn Fn(f64) -> f64) -> Self;
    /// Largest radial frequency representable along some axis.
    fn nyquist_max(&self) -> f64;
    fn same_grid(&self, other: &Self) -> bool;
}

impl GridField for Signal {
    fn samples(&self) -> &[Complex64] {
        self.values()
    }

    fn with_samples(&self, values: Vec<Complex64>) -> Self {
        Signal::new(*self.grid(), values).expect("sample count preserved")
    }

    fn cell_measure(&self) -> f64 {
        self.grid().spacing()
    }

    fn radius_at(&self, i: usize) -> f64 {
        self.grid().point(i).abs()
    }

    fn radial_multiplier(&self, m: &dyn Fn(f64) -> f64) -> Self {
        let n = self.len();
        let l = self.grid().length();
        let mult: Vec<f64> = (0..n).map(|k| m((fft::signed_bin(k, n) / l).abs())).collect();
        let mut buf = self.values().to_vec();
        fft::apply_line_multiplier(&mut buf, &mult);
        self.with_samples(buf)
    }

    fn nyquist_max(&self) -> f64 {
        self.grid().nyquist()
    }

    fn same_grid(&self, other: &Self) -> bool {
        self.grid().same_as(other.grid())
    }
}

impl GridField for TFField {
    fn samples(&self) -> &[Complex64] {
        self.values()
    }

    fn with_samples(&self, values: Vec<Complex64>) -> Self {
        TFField::new(*self.grid(), values).expect("sample count preserved")
    }

    fn cell_measure(&self) -> f64 {
        self.grid().cell_area()
    }

    fn radius_at(&self, i: usize) -> f64 {
        let (x, w) = self.grid().coords(i);
        x.hypot(w)
    }

    fn radial_multiplier(&self, m: &dyn Fn(f64) -> f64) -> Self {
        let g = self.grid();
        let (nx, nw) = g.shape();
        let (lx, lw) = (g.x.length(), g.omega.length());
        let mut buf = self.values().to_vec();
        fft::raw_2d(&mut buf, nx, nw, false);
        let inv = 1.0 / (nx * nw) as f64;
        for a in 0..nx {
            let fa = fft::signed_bin(a, nx) / lx;
            for b in 0..nw {
                let fb = fft::signed_bin(b, nw) / lw;
                buf[a * nw + b] *= m(fa.hypot(fb)) * inv;
            }
        }
        fft::raw_2d(&mut buf, nx, nw, true);
        self.with_samples(buf)
    }

    fn nyquist_max(&self) -> f64 {
        self.grid().nyquist_max()
    }

    fn same_grid(&self, other: &Self) -> bool {
        self.grid().same_as(other.grid())
    }
}

/// Japanese bracket `<t> = (1 + t^2)^{1/2}`.
pub fn bracket(t: f64) -> f64 {
    (1.0 + t * t).sqrt()
}

/// Parameters `(s, p, r, q, sigma)` of the weighted norm family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSpec {
    pub s: f64,
    pub p: f64,
    #[serde(default)]
    pub r: f64,
    #[serde(default = "two")]
    pub q: f64,
    #[serde(default)]
    pub sigma: f64,
}

fn two() -> f64 {
    2.0
}

impl NormSpec {
    pub fn new(s: f64, p: f64, r: f64, q: f64, sigma: f64) -> Result<Self> {
        let spec = Self { s, p, r, q, sigma };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s >= 0.0 && self.r >= 0.0 && self.sigma >= 0.0) {
            return Err(Error::Precondition("s, r and sigma must be nonnegative".into()));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::Precondition(format!("p must lie in [1, inf), got {}", self.p)));
        }
        if !(self.q >= 1.0) {
            return Err(Error::Precondition(format!("q must lie in [1, inf], got {}", self.q)));
        }
        Ok(())
    }

    /// Whether `s < 1 + 1/p`, the range where `F -> |F|` is bounded.
    pub fn below_modulus_threshold(&self) -> bool {
        self.s < 1.0 + 1.0 / self.p
    }

    pub fn sobolev(&self) -> Norm {
        Norm::Sobolev { s: self.s, p: self.p, r: self.r }
    }
}

/// A norm on sampled fields. `Sum` realises intersection norms such as
/// `X^p_sigma ∩ L^q` as the sum of their parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum Norm {
    /// `||F||_{L^q}`.
    Lebesgue {
        q: f64,
    },
    /// `||<x>^r F||_{L^p}`.
    Weighted {
        p: f64,
        r: f64,
    },
    /// `||<x>^r F||_{L^p} + ||<D>^s F||_{L^p}`.
    Sobolev {
        s: f64,
        p: f64,
        r: f64,
    },
    Sum {
        parts: Vec<Norm>,
    },
}

/// One `L^p` term of a norm: the sampled function and its exponent.
pub(crate) struct Component {
    pub values: Vec<Complex64>,
    pub p: f64,
}

impl Norm {
    pub fn l2() -> Norm {
        Norm::Lebesgue { q: 2.0 }
    }

    pub fn intersection(a: Norm, b: Norm) -> Norm {
        Norm::Sum { parts: vec![a, b] }
    }

    pub fn label(&self) -> String {
        match self {
            Norm::Lebesgue { q } => format!("L^{q}"),
            Norm::Weighted { p, r } => format!("L^{p}_{r}"),
            Norm::Sobolev { s, p, r } => format!("W^{{{s},{p}}}_{r}"),
            Norm::Sum { parts } => parts.iter().map(Norm::label).collect::<Vec<_>>().join(" + "),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check_p = |p: f64, allow_inf: bool| {
            if p >= 1.0 && (allow_inf || p.is_finite()) {
                Ok(())
            } else {
                Err(Error::Precondition(format!("exponent {p} out of range")))
            }
        };
        match self {
            Norm::Lebesgue { q } => check_p(*q, true),
            Norm::Weighted { p, r } => {
                check_p(*p, true)?;
                if *r < 0.0 {
                    return Err(Error::Precondition("weight power must be nonnegative".into()));
                }
                Ok(())
            }
            Norm::Sobolev { s, p, r } => {
                check_p(*p, true)?;
                if *s < 0.0 || *r < 0.0 {
                    return Err(Error::Precondition("s and r must be nonnegative".into()));
                }
                Ok(())
            }
            Norm::Sum { parts } => parts.iter().try_for_each(Norm::validate),
        }
    }

    /// Linear pieces whose `L^p` norms add up to this norm. The phase scan
    /// precomputes them once per field.
    pub(crate) fn components<F: GridField>(&self, f: &F) -> Vec<Component> {
        match self {
            Norm::Lebesgue { q } => vec![Component { values: f.samples().to_vec(), p: *q }],
            Norm::Weighted { p, r } => vec![Component { values: weighted_values(f, *r), p: *p }],
            Norm::Sobolev { s, p, r } => vec![
                Component { values: weighted_values(f, *r), p: *p },
                Component { values: bessel_potential(f, *s).samples().to_vec(), p: *p },
            ],
            Norm::Sum { parts } => parts.iter().flat_map(|n| n.components(f)).collect(),
        }
    }

    pub fn eval<F: GridField>(&self, f: &F) -> f64 {
        let w = f.cell_measure();
        self.components(f).iter().map(|c| lp_norm(c.values.iter().map(|v| v.norm()), c.p, w)).sum()
    }
}

fn weighted_values<F: GridField>(f: &F, r: f64) -> Vec<Complex64> {
    if r == 0.0 {
        return f.samples().to_vec();
    }
    f.samples().iter().enumerate().map(|(i, v)| v * bracket(f.radius_at(i)).powf(r)).collect()
}

/// `||<x>^r F||_{L^p}`, radius measured in the ambient dimension of `F`.
pub fn lp_weighted_norm<F: GridField>(f: &F, p: f64, r: f64) -> f64 {
    Norm::Weighted { p, r }.eval(f)
}

/// `<D>^s F`, the multiplier `(1 + |xi|^2)^{s/2}` on the grid frequencies.
pub fn bessel_potential<F: GridField>(f: &F, s: f64) -> F {
    if s == 0.0 {
        return f.clone();
    }
    f.radial_multiplier(&|xi| (1.0 + xi * xi).powf(0.5 * s))
}

/// `||<x>^r F||_{L^p} + ||<D>^s F||_{L^p}`.
pub fn frac_sobolev_norm<F: GridField>(f: &F, spec: &NormSpec) -> f64 {
    spec.sobolev().eval(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid1D, TFGrid};
    use std::f64::consts::PI;

    #[test]
    fn weighted_norm_basics() {
        let g = TFGrid::square(8.0, 64).unwrap();
        let ind = TFField::from_fn(g, |x, w| {
            let inside = (-0.5..0.5).contains(&x) && (-0.5..0.5).contains(&w);
            Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
        })
        .unwrap();
        assert_eq!(lp_weighted_norm(&ind, 1.0, 0.0), ind.norm(1.0));
        // Midpoint-free oracle: same Riemann sum written out directly.
        let mut oracle = 0.0;
        for i in 0..g.len() {
            let (x, w) = g.coords(i);
            if (-0.5..0.5).contains(&x) && (-0.5..0.5).contains(&w) {
                oracle += (1.0 + x * x + w * w) * g.cell_area();
            }
        }
        assert!((lp_weighted_norm(&ind, 1.0, 2.0) - oracle).abs() < 1e-12);
        // Continuum value of the integral over the unit square is 1 + 1/6.
        assert!((oracle - (1.0 + 1.0 / 6.0)).abs() < 0.02);
        assert_eq!(lp_weighted_norm(&TFField::zeros(g), 3.0, 1.0), 0.0);
    }

    #[test]
    fn sobolev_of_constant_and_wave() {
        let g = Grid1D::new(8.0, 64).unwrap();
        let c = Signal::from_fn(g, |_| Complex64::new(0.5, 0.0)).unwrap();
        let spec = NormSpec::new(1.3, 3.0, 0.0, 2.0, 0.0).unwrap();
        let want = 2.0 * c.norm(3.0);
        assert!((frac_sobolev_norm(&c, &spec) - want).abs() < 1e-12);

        let xi0 = 1.5;
        let wave = Signal::from_fn(g, |x| Complex64::cis(2.0 * PI * xi0 * x)).unwrap();
        let spec = NormSpec::new(0.7, 2.0, 0.0, 2.0, 0.0).unwrap();
        let want = (1.0 + (1.0 + xi0 * xi0).powf(0.35)) * wave.norm(2.0);
        assert!((frac_sobolev_norm(&wave, &spec) - want).abs() < 1e-12);
    }

    #[test]
    fn multiplier_matches_plancherel() {
        let g = Grid1D::new(16.0, 256).unwrap();
        let f = Signal::hermite(g, 3).unwrap().modulate(0.5).unwrap();
        let s = 1.4;
        let lhs = bessel_potential(&f, s).norm(2.0);
        let spec = f.fourier();
        let rhs = (spec
            .values()
            .iter()
            .enumerate()
            .map(|(m, v)| (1.0 + spec.grid().point(m).powi(2)).powf(s) * v.norm_sqr())
            .sum::<f64>()
            * spec.grid().spacing())
        .sqrt();
        assert!((lhs - rhs).abs() < 1e-12 * rhs);
    }

    #[test]
    fn s_zero_reduces_to_lp() {
        let g = TFGrid::square(8.0, 32).unwrap();
        let f = TFField::from_fn(g, |x, w| Complex64::new((-x * x).exp(), w.sin())).unwrap();
        let spec = NormSpec::new(0.0, 1.5, 1.0, 2.0, 0.0).unwrap();
        let want = lp_weighted_norm(&f, 1.5, 1.0) + f.norm(1.5);
        assert!((frac_sobolev_norm(&f, &spec) - want).abs() < 1e-12 * want);
    }

    #[test]
    fn spec_validation() {
        assert!(NormSpec::new(1.0, 0.5, 0.0, 2.0, 0.0).is_err());
        assert!(NormSpec::new(-1.0, 2.0, 0.0, 2.0, 0.0).is_err());
        let s = NormSpec::new(1.4, 2.0, 0.0, 2.0, 0.0).unwrap();
        assert!(s.below_modulus_threshold());
        assert!(!NormSpec::new(1.6, 2.0, 0.0, 2.0, 0.0).unwrap().below_modulus_threshold());
    }
}
